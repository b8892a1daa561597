use super::{IntegratorConfig, ModelSpec, Scheme, Splitting};
use crate::error::{DynamicsError, SpectralError};
use crate::forcing::ForcingModel;
use crate::phi::phi_functions;
use crate::scalar::Scalar;
use crate::spectral::{SpectralField, SpectralSpace, BLOWUP_THRESHOLD};

#[derive(Clone, Debug)]
enum Weights<T> {
    Etd1 {
        e: Vec<T>,
        p1: Vec<T>,
    },
    Rk4 {
        e: Vec<T>,
        e2: Vec<T>,
        q: Vec<T>,
        f1: Vec<T>,
        f2: Vec<T>,
        f3: Vec<T>,
    },
    Cn {
        num: Vec<T>,
        inv: Vec<T>,
    },
}

/// One-step map with per-mode weights precomputed for a fixed `dt`.
#[derive(Clone, Debug)]
pub struct Stepper<'a, T: Scalar> {
    space: &'a SpectralSpace<T>,
    model: ModelSpec<T>,
    dt: T,
    /// `Λ − κ`, the explicit part of the linear operator.
    explicit: Vec<T>,
    linear_only: bool,
    weights: Weights<T>,
}

impl<'a, T: Scalar> Stepper<'a, T> {
    pub fn new(
        space: &'a SpectralSpace<T>,
        model: ModelSpec<T>,
        cfg: &IntegratorConfig<T>,
    ) -> Result<Self, DynamicsError<T>> {
        model.validate()?;
        cfg.validate()?;
        if cfg.padded != space.is_padded() {
            return Err(DynamicsError::Config(
                "padding flag differs from the space's product grid".into(),
            ));
        }
        let h = cfg.dt;
        let kappa: Vec<T> = space
            .mode_mu()
            .iter()
            .map(|&mu| match cfg.splitting {
                Splitting::Principal => model.principal(mu),
                Splitting::Full => model.lambda(mu),
            })
            .collect();
        let explicit = space
            .mode_mu()
            .iter()
            .zip(&kappa)
            .map(|(&mu, &k)| model.lambda(mu) - k)
            .collect();
        let half = T::lit(0.5);
        let weights = match cfg.scheme {
            Scheme::Etd1 => {
                let (mut e, mut p1) = (Vec::new(), Vec::new());
                for &k in &kappa {
                    let p = phi_functions(-k * h, 1);
                    e.push(p[0]);
                    p1.push(h * p[1]);
                }
                Weights::Etd1 { e, p1 }
            }
            Scheme::EtdRk4 => {
                let n = kappa.len();
                let (mut e, mut e2, mut q) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
                let (mut f1, mut f2, mut f3) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
                let (two, three, four) = (T::lit(2.0), T::lit(3.0), T::lit(4.0));
                for &k in &kappa {
                    let z = -k * h;
                    let p = phi_functions(z, 3);
                    let ph = phi_functions(z * half, 1);
                    e.push(p[0]);
                    e2.push(ph[0]);
                    q.push(h * half * ph[1]);
                    f1.push(h * (p[1] - three * p[2] + four * p[3]));
                    f2.push(h * (p[2] - two * p[3]));
                    f3.push(h * (four * p[3] - p[2]));
                }
                Weights::Rk4 { e, e2, q, f1, f2, f3 }
            }
            Scheme::ImexCn => {
                let mut num = Vec::new();
                let mut inv = Vec::new();
                for &k in &kappa {
                    let d = T::one() + half * h * k;
                    if !(d > T::zero()) {
                        return Err(DynamicsError::Config(
                            "IMEX-CN needs 1 + dt·κ/2 > 0 on every mode".into(),
                        ));
                    }
                    num.push(T::one() - half * h * k);
                    inv.push(T::one() / d);
                }
                Weights::Cn { num, inv }
            }
        };
        Ok(Self {
            space,
            model,
            dt: h,
            explicit,
            linear_only: cfg.linear_only,
            weights,
        })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn space(&self) -> &SpectralSpace<T> {
        self.space
    }

    /// Explicit part `N(u, t) = −(Λ − κ)u − Q(u) + g(t)`.
    pub fn explicit_term(
        &self,
        u: &SpectralField<T>,
        t: T,
        g: &ForcingModel<T>,
    ) -> Result<SpectralField<T>, SpectralError> {
        let mut out = if self.linear_only {
            SpectralField::zeros(u.shape)
        } else {
            self.space
                .polynomial_terms(u, self.model.gradient_coefficient())?
                .neg()
        };
        for ((o, &c), &e) in out.coeffs.iter_mut().zip(&u.coeffs).zip(&self.explicit) {
            *o = *o - e * c;
        }
        g.accumulate(t, T::one(), &mut out);
        Ok(out)
    }

    /// Advances `u` from `t` to `t + dt`.
    pub fn step(
        &self,
        u: &SpectralField<T>,
        t: T,
        g: &ForcingModel<T>,
    ) -> Result<SpectralField<T>, DynamicsError<T>> {
        let h = self.dt;
        let diverged = |_| DynamicsError::Diverged {
            t,
            partial: Box::default(),
        };
        let nl = |v: &SpectralField<T>, s: T| self.explicit_term(v, s, g).map_err(diverged);
        let coeffs: Vec<T> = match &self.weights {
            Weights::Etd1 { e, p1 } => {
                let n0 = nl(u, t)?;
                (0..u.len())
                    .map(|i| e[i] * u.coeffs[i] + p1[i] * n0.coeffs[i])
                    .collect()
            }
            Weights::Rk4 { e, e2, q, f1, f2, f3 } => {
                let th = t + h * T::lit(0.5);
                let nu = nl(u, t)?;
                let ua = combine(u, |i, c| e2[i] * c + q[i] * nu.coeffs[i]);
                let na = nl(&ua, th)?;
                let ub = combine(u, |i, c| e2[i] * c + q[i] * na.coeffs[i]);
                let nb = nl(&ub, th)?;
                let two = T::lit(2.0);
                let uc = combine(&ua, |i, c| {
                    e2[i] * c + q[i] * (two * nb.coeffs[i] - nu.coeffs[i])
                });
                let nc = nl(&uc, t + h)?;
                (0..u.len())
                    .map(|i| {
                        e[i] * u.coeffs[i]
                            + f1[i] * nu.coeffs[i]
                            + two * f2[i] * (na.coeffs[i] + nb.coeffs[i])
                            + f3[i] * nc.coeffs[i]
                    })
                    .collect()
            }
            Weights::Cn { num, inv } => {
                let n0 = nl(u, t)?;
                (0..u.len())
                    .map(|i| inv[i] * (num[i] * u.coeffs[i] + h * n0.coeffs[i]))
                    .collect()
            }
        };
        let limit = T::lit(BLOWUP_THRESHOLD);
        if coeffs
            .iter()
            .any(|c| !c.is_finite() || num_traits::Float::abs(*c) > limit)
        {
            return Err(diverged(SpectralError::NonFinite));
        }
        Ok(SpectralField {
            coeffs,
            shape: u.shape,
        })
    }
}

fn combine<T: Scalar>(u: &SpectralField<T>, f: impl Fn(usize, T) -> T) -> SpectralField<T> {
    SpectralField {
        coeffs: u.coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect(),
        shape: u.shape,
    }
}

/// One step of `scheme` with principal splitting. Builds the weights on every
/// call; use [`Stepper`] in loops.
pub fn step<T: Scalar>(
    space: &SpectralSpace<T>,
    state: &SpectralField<T>,
    t: T,
    g: &ForcingModel<T>,
    model: ModelSpec<T>,
    dt: T,
    scheme: Scheme,
) -> Result<SpectralField<T>, DynamicsError<T>> {
    let cfg = IntegratorConfig {
        dt,
        scheme,
        t_end: t + dt,
        record_every: 1,
        padded: space.is_padded(),
        splitting: Splitting::Principal,
        linear_only: false,
    };
    Stepper::new(space, model, &cfg)?.step(state, t, g)
}
