//! Finitely parameterized recurrent forcings `g(t) = Σ A_i cos(ω_i (t + s) + φ_i) P_i`,
//! the Bebutov shift `θ_τ g = g(· + τ)` (carried exactly by the offset `s`),
//! the sup bound 𝓜(g) and the Bebutov metric on C(ℝ, L²).

use serde::{Deserialize, Serialize};

use crate::error::ForcingError;
use crate::scalar::Scalar;
use crate::spectral::{ModeShape, SpectralField, SpectralSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    Zero,
    Periodic,
    Quasiperiodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingComponent<T> {
    pub amplitude: T,
    /// Angular frequency (rad / time).
    pub frequency: T,
    pub phase: T,
    pub profile: SpectralField<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingModel<T> {
    kind: ForcingKind,
    components: Vec<ForcingComponent<T>>,
    phase_offset: T,
    shape: ModeShape,
}

/// Largest denominator tried when testing frequency ratios for commensurability.
pub const MAX_DENOMINATOR: i64 = 1000;
/// Match tolerance for a convergent p/q against a frequency ratio.
pub const RATIO_TOLERANCE: f64 = 1e-12;

/// Returns `(p, q)` if some continued-fraction convergent of `r` with
/// `q ≤ MAX_DENOMINATOR` matches `r` within `RATIO_TOLERANCE`.
pub fn rational_approximation(r: f64) -> Option<(i64, i64)> {
    if !r.is_finite() {
        return None;
    }
    let (mut h_prev, mut h) = (1i64, r.floor() as i64);
    let (mut k_prev, mut k) = (0i64, 1i64);
    let mut x = r;
    loop {
        if (r - h as f64 / k as f64).abs() <= RATIO_TOLERANCE {
            return Some((h, k));
        }
        let frac = x - x.floor();
        if frac.abs() < 1e-15 {
            return None;
        }
        x = 1.0 / frac;
        let a = x.floor() as i64;
        let k_next = a.checked_mul(k)?.checked_add(k_prev)?;
        if k_next > MAX_DENOMINATOR {
            return None;
        }
        let h_next = a.checked_mul(h)?.checked_add(h_prev)?;
        h_prev = h;
        h = h_next;
        k_prev = k;
        k = k_next;
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl<T: Scalar> ForcingModel<T> {
    pub fn zero(shape: ModeShape) -> Self {
        Self {
            kind: ForcingKind::Zero,
            components: Vec::new(),
            phase_offset: T::zero(),
            shape,
        }
    }

    pub fn new(
        kind: ForcingKind,
        components: Vec<ForcingComponent<T>>,
        shape: ModeShape,
    ) -> Result<Self, ForcingError> {
        let model = Self {
            kind,
            components,
            phase_offset: T::zero(),
            shape,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn periodic(components: Vec<ForcingComponent<T>>, shape: ModeShape) -> Result<Self, ForcingError> {
        Self::new(ForcingKind::Periodic, components, shape)
    }

    pub fn quasiperiodic(
        components: Vec<ForcingComponent<T>>,
        shape: ModeShape,
    ) -> Result<Self, ForcingError> {
        Self::new(ForcingKind::Quasiperiodic, components, shape)
    }

    pub fn kind(&self) -> ForcingKind {
        self.kind
    }

    pub fn components(&self) -> &[ForcingComponent<T>] {
        &self.components
    }

    pub fn phase_offset(&self) -> T {
        self.phase_offset
    }

    pub fn shape(&self) -> ModeShape {
        self.shape
    }

    pub fn is_zero(&self) -> bool {
        self.kind == ForcingKind::Zero
    }

    fn validate(&self) -> Result<(), ForcingError> {
        for c in &self.components {
            if c.profile.shape != self.shape {
                return Err(ForcingError::InvalidModel(
                    "profile shape differs from the model shape".into(),
                ));
            }
            if !(c.amplitude.is_finite() && c.frequency.is_finite() && c.phase.is_finite())
                || !c.profile.is_finite()
            {
                return Err(ForcingError::InvalidModel("non-finite component".into()));
            }
        }
        match self.kind {
            ForcingKind::Zero if !self.components.is_empty() => Err(ForcingError::InvalidModel(
                "zero forcing carries no components".into(),
            )),
            ForcingKind::Periodic => {
                if self.components.is_empty() {
                    return Err(ForcingError::InvalidModel(
                        "periodic forcing needs at least one component".into(),
                    ));
                }
                let freqs = self.nonzero_frequencies();
                if let Some(&w0) = freqs.first() {
                    for &w in &freqs[1..] {
                        if rational_approximation(w / w0).is_none() {
                            return Err(ForcingError::InvalidModel(format!(
                                "frequencies {w0} and {w} are not commensurate"
                            )));
                        }
                    }
                }
                Ok(())
            }
            ForcingKind::Quasiperiodic => {
                let freqs = self.nonzero_frequencies();
                let independent = freqs.iter().enumerate().any(|(i, &wi)| {
                    freqs[i + 1..]
                        .iter()
                        .any(|&wj| rational_approximation(wi / wj).is_none())
                });
                if independent {
                    Ok(())
                } else {
                    Err(ForcingError::InvalidModel(
                        "quasi-periodic forcing needs two rationally independent frequencies"
                            .into(),
                    ))
                }
            }
            _ => Ok(()),
        }
    }

    fn nonzero_frequencies(&self) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.frequency.as_f64().abs())
            .filter(|w| *w > 0.0)
            .collect()
    }

    /// Exact period of a periodic model (None for zero, constant or
    /// quasi-periodic models).
    pub fn period(&self) -> Option<T> {
        if self.kind != ForcingKind::Periodic {
            return None;
        }
        let freqs = self.nonzero_frequencies();
        let w0 = *freqs.first()?;
        let ratios: Vec<(i64, i64)> = freqs
            .iter()
            .map(|&w| rational_approximation(w / w0).expect("validated"))
            .collect();
        let lcm = ratios.iter().fold(1i64, |l, &(_, q)| l / gcd(l, q) * q);
        let multiples: Vec<i64> = ratios.iter().map(|&(p, q)| p * (lcm / q)).collect();
        let g = multiples.iter().fold(0i64, |g, &m| gcd(g, m));
        let fundamental = w0 / lcm as f64 * g as f64;
        Some(T::lit(2.0 * std::f64::consts::PI / fundamental))
    }

    /// Longest component period 2π/|ω| (a time scale for horizons).
    pub fn characteristic_period(&self) -> Option<T> {
        self.nonzero_frequencies()
            .into_iter()
            .map(|w| 2.0 * std::f64::consts::PI / w)
            .fold(None, |m: Option<f64>, p| Some(m.map_or(p, |m| m.max(p))))
            .map(T::lit)
    }

    /// Time-dependent weight of component `i` at time `t`.
    #[inline]
    fn weight(&self, i: usize, t: T) -> T {
        let c = &self.components[i];
        c.amplitude * (c.frequency * (t + self.phase_offset) + c.phase).cos()
    }

    pub fn evaluate(&self, t: T) -> SpectralField<T> {
        let mut out = SpectralField::zeros(self.shape);
        self.accumulate(t, T::one(), &mut out);
        out
    }

    /// `out += scale · g(t)`.
    pub fn accumulate(&self, t: T, scale: T, out: &mut SpectralField<T>) {
        for (i, c) in self.components.iter().enumerate() {
            let w = scale * self.weight(i, t);
            for (o, &p) in out.coeffs.iter_mut().zip(&c.profile.coeffs) {
                *o = *o + w * p;
            }
        }
    }

    /// θ_τ g.
    pub fn shift(&self, tau: T) -> Self {
        let mut out = self.clone();
        if self.kind != ForcingKind::Zero {
            out.phase_offset = self.phase_offset + tau;
        }
        out
    }

    /// Returns a copy with all amplitudes multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            c.amplitude = c.amplitude * s;
        }
        out
    }

    /// 𝓜(g) bound Σ|A_i|·‖P_i‖, optionally with a dense scan of ‖g(t)‖ over
    /// `[0, scan_horizon]`.
    pub fn sup_bound(
        &self,
        space: &SpectralSpace<T>,
        scan: Option<(T, usize)>,
    ) -> SupBound<T> {
        let bound = self
            .components
            .iter()
            .map(|c| num_traits::Float::abs(c.amplitude) * space.l2_norm(&c.profile))
            .sum::<T>();
        let active = self
            .components
            .iter()
            .filter(|c| !c.amplitude.is_zero() && !c.profile.is_zero())
            .count();
        let scanned_max = scan.map(|(horizon, per_unit)| {
            let gram = PairGram::new(space, self, None);
            let n = (horizon.as_f64() * per_unit as f64).ceil() as usize;
            let dt = horizon / T::from_usize_lossy(n.max(1));
            (0..=n)
                .map(|i| gram.norm_at(T::from_usize_lossy(i) * dt, T::zero()))
                .fold(T::zero(), T::max)
        });
        SupBound {
            bound,
            attained: active <= 1,
            scanned_max,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupBound<T> {
    pub bound: T,
    /// True when the bound is the exact supremum (at most one active component).
    pub attained: bool,
    pub scanned_max: Option<T>,
}

/// Gram-matrix evaluator for ‖g₁(t) − g₂(t + τ)‖ (or ‖g₁(t)‖ alone) without
/// forming fields.
pub(crate) struct PairGram<T> {
    /// (amplitude·sign, frequency, phase + frequency·offset) per term.
    terms: Vec<(T, T, T, bool)>,
    gram: Vec<T>,
}

impl<T: Scalar> PairGram<T> {
    pub fn new(space: &SpectralSpace<T>, g1: &ForcingModel<T>, g2: Option<&ForcingModel<T>>) -> Self {
        let mut profiles: Vec<&SpectralField<T>> = Vec::new();
        let mut terms = Vec::new();
        for c in &g1.components {
            terms.push((c.amplitude, c.frequency, c.phase + c.frequency * g1.phase_offset, false));
            profiles.push(&c.profile);
        }
        if let Some(g2) = g2 {
            for c in &g2.components {
                terms.push((-c.amplitude, c.frequency, c.phase + c.frequency * g2.phase_offset, true));
                profiles.push(&c.profile);
            }
        }
        let m = profiles.len();
        let mut gram = vec![T::zero(); m * m];
        for i in 0..m {
            for j in i..m {
                let v = space.l2_inner(profiles[i], profiles[j]);
                gram[i * m + j] = v;
                gram[j * m + i] = v;
            }
        }
        Self { terms, gram }
    }

    /// ‖g₁(t) − g₂(t + τ)‖ (second model's terms are evaluated at t + τ).
    pub fn norm_at(&self, t: T, tau: T) -> T {
        let m = self.terms.len();
        let w: Vec<T> = self
            .terms
            .iter()
            .map(|&(a, f, p, second)| {
                let s = if second { t + tau } else { t };
                a * (f * s + p).cos()
            })
            .collect();
        let mut s = T::zero();
        for i in 0..m {
            if w[i].is_zero() {
                continue;
            }
            let row = &self.gram[i * m..(i + 1) * m];
            s = s + w[i] * row.iter().zip(&w).map(|(&g, &x)| g * x).sum::<T>();
        }
        s.max(T::zero()).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BebutovConfig {
    pub trunc: usize,
    pub samples_per_unit: usize,
}

impl Default for BebutovConfig {
    fn default() -> Self {
        Self {
            trunc: 20,
            samples_per_unit: 16,
        }
    }
}

impl BebutovConfig {
    pub fn validate(&self) -> Result<(), ForcingError> {
        if self.trunc < 1 || self.samples_per_unit < 4 {
            return Err(ForcingError::InvalidModel(format!(
                "Bebutov config needs trunc >= 1 and samples_per_unit >= 4, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Truncated Bebutov metric
/// ρ(g₁, g₂) = Σ_{n ≤ trunc} 2⁻ⁿ m_n / (1 + m_n),
/// m_n = max_{t ∈ [−n, n]} ‖g₁(t) − g₂(t)‖ on the sampling grid.
pub fn bebutov_distance<T: Scalar>(
    space: &SpectralSpace<T>,
    g1: &ForcingModel<T>,
    g2: &ForcingModel<T>,
    cfg: BebutovConfig,
) -> T {
    // the Gram form leaves rounding residue where terms cancel
    if g1 == g2 {
        return T::zero();
    }
    let gram = PairGram::new(space, g1, Some(g2));
    let spu = cfg.samples_per_unit;
    let h = T::one() / T::from_usize_lossy(spu);
    let at = |j: isize| -> T {
        let t = T::lit(j as f64) * h;
        gram.norm_at(t, T::zero())
    };
    let mut running = at(0);
    let mut rho = T::zero();
    let mut weight = T::one();
    for n in 1..=cfg.trunc {
        let lo = ((n - 1) * spu) as isize;
        let hi = (n * spu) as isize;
        for j in lo + 1..=hi {
            running = running.max(at(j)).max(at(-j));
        }
        weight = weight * T::lit(0.5);
        rho = rho + weight * running / (T::one() + running);
    }
    rho
}

/// Shift grid search for ε-almost periods of `g` on `[0, horizon]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostPeriodScan<T> {
    pub eps: T,
    pub window: T,
    pub horizon: T,
    pub tau_step: T,
    pub taus: Vec<T>,
    /// Largest distance between consecutive almost periods (including from 0
    /// to the first one and from the last one to `horizon`).
    pub max_gap: Option<T>,
}

impl<T: Scalar> AlmostPeriodScan<T> {
    pub fn found(&self) -> bool {
        !self.taus.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid<T> {
    pub tau_step: T,
    pub t_samples_per_unit: usize,
}

impl<T: Scalar> Default for ScanGrid<T> {
    fn default() -> Self {
        Self {
            tau_step: T::lit(1.0 / 16.0),
            t_samples_per_unit: 16,
        }
    }
}

/// All grid shifts τ ∈ (0, horizon] with max_{|t| ≤ window} ‖g(t+τ) − g(t)‖ < ε.
pub fn almost_period_scan<T: Scalar>(
    space: &SpectralSpace<T>,
    g: &ForcingModel<T>,
    eps: T,
    window: T,
    horizon: T,
    grid: ScanGrid<T>,
) -> Result<AlmostPeriodScan<T>, ForcingError> {
    if !(eps > T::zero()) || !(horizon > window) || !(grid.tau_step > T::zero()) {
        return Err(ForcingError::InvalidModel(
            "almost-period scan needs eps > 0, horizon > window and a positive step".into(),
        ));
    }
    let gram = PairGram::new(space, g, Some(g));
    let nt = (window.as_f64() * grid.t_samples_per_unit as f64).ceil().max(1.0) as usize;
    let ht = window / T::from_usize_lossy(nt);
    let ntau = (horizon / grid.tau_step).floor().as_f64() as usize;
    let mut taus = Vec::new();
    for i in 1..=ntau {
        let tau = T::from_usize_lossy(i) * grid.tau_step;
        let ok = (0..=2 * nt).all(|j| {
            let t = T::lit(j as f64 - nt as f64) * ht;
            gram.norm_at(t, tau) < eps
        });
        if ok {
            taus.push(tau);
        }
    }
    let max_gap = if taus.is_empty() {
        None
    } else {
        let mut gap = taus[0];
        for w in taus.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        Some(gap.max(horizon - *taus.last().unwrap()))
    };
    Ok(AlmostPeriodScan {
        eps,
        window,
        horizon,
        tau_step: grid.tau_step,
        taus,
        max_gap,
    })
}
