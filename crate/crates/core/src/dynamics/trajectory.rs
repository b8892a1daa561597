use serde::{Deserialize, Serialize};

use super::{IntegratorConfig, ModelSpec, Stepper};
use crate::error::DynamicsError;
use crate::forcing::ForcingModel;
use crate::scalar::Scalar;
use crate::spectral::{NormBundle, SpectralField, SpectralSpace};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostics<T> {
    pub norms: NormBundle<T>,
    /// `½(Λu, u) + ¼∫u⁴`.
    pub v: T,
    /// Phase offset of `θ_t g`.
    pub fingerprint: T,
}

/// Uniformly sampled solution `u(t_i)` with per-sample diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<SpectralField<T>>,
    pub diagnostics: Vec<SampleDiagnostics<T>>,
    /// Integrator step.
    pub dt: T,
    /// Steps between samples.
    pub record_every: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Spacing between recorded samples.
    pub fn sample_step(&self) -> T {
        self.dt * T::from_usize_lossy(self.record_every)
    }

    pub fn horizon(&self) -> T {
        match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => b - a,
            _ => T::zero(),
        }
    }

    pub fn last_state(&self) -> Option<&SpectralField<T>> {
        self.states.last()
    }

    /// Trajectory holding a single state at every time in `times`.
    pub fn constant(
        space: &SpectralSpace<T>,
        model: &ModelSpec<T>,
        state: SpectralField<T>,
        times: Vec<T>,
    ) -> Self {
        let dt = if times.len() > 1 { times[1] - times[0] } else { T::one() };
        let d = diagnostics(space, model, &state, T::zero());
        Self {
            diagnostics: vec![d; times.len()],
            states: vec![state; times.len()],
            times,
            dt,
            record_every: 1,
        }
    }

    /// Samples with `t ≥ t0`.
    pub fn tail_from(&self, t0: T) -> Self {
        let i = self.times.partition_point(|&t| t < t0);
        Self {
            times: self.times[i..].to_vec(),
            states: self.states[i..].to_vec(),
            diagnostics: self.diagnostics[i..].to_vec(),
            dt: self.dt,
            record_every: self.record_every,
        }
    }

    pub(crate) fn push(&mut self, t: T, u: SpectralField<T>, d: SampleDiagnostics<T>) {
        self.times.push(t);
        self.states.push(u);
        self.diagnostics.push(d);
    }
}

pub(crate) fn diagnostics<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    u: &SpectralField<T>,
    fingerprint: T,
) -> SampleDiagnostics<T> {
    let norms = space.norms(u);
    let quad: T = u
        .coeffs
        .iter()
        .zip(space.mode_mu())
        .map(|(&c, &mu)| model.lambda(mu) * c * c)
        .sum();
    let half = T::lit(0.5);
    let l4sq = norms.l4 * norms.l4;
    let v = half * weight(space) * quad + T::lit(0.25) * l4sq * l4sq;
    SampleDiagnostics {
        norms,
        v,
        fingerprint,
    }
}

/// `Π l/2`: `‖u‖² = weight · Σ c²`.
fn weight<T: Scalar>(space: &SpectralSpace<T>) -> T {
    space.measure() / T::from_usize_lossy(1 << space.shape().rank)
}

/// Solves `u(τ) = ς` forward to `cfg.t_end`, recording every
/// `cfg.record_every` steps (the initial state is always recorded).
pub fn integrate<T: Scalar>(
    space: &SpectralSpace<T>,
    model: ModelSpec<T>,
    g: &ForcingModel<T>,
    init: &SpectralField<T>,
    tau: T,
    cfg: &IntegratorConfig<T>,
) -> Result<Trajectory<T>, DynamicsError<T>> {
    if init.shape != space.shape() || g.shape() != space.shape() {
        return Err(DynamicsError::Config("state or forcing shape differs from the space".into()));
    }
    if !init.is_finite() {
        return Err(DynamicsError::Config("initial state is not finite".into()));
    }
    let stepper = Stepper::new(space, model, cfg)?;
    let steps = cfg.steps_from(tau)?;
    let mut traj = Trajectory {
        dt: cfg.dt,
        record_every: cfg.record_every,
        ..Default::default()
    };
    let fp = |t: T| g.shift(t).phase_offset();
    traj.push(tau, init.clone(), diagnostics(space, &model, init, fp(tau)));
    let mut u = init.clone();
    for n in 0..steps {
        let t = tau + T::from_usize_lossy(n) * cfg.dt;
        u = match stepper.step(&u, t, g) {
            Ok(v) => v,
            Err(DynamicsError::Diverged { t, .. }) => {
                return Err(DynamicsError::Diverged {
                    t,
                    partial: Box::new(traj),
                })
            }
            Err(e) => return Err(e),
        };
        if (n + 1) % cfg.record_every == 0 {
            let t1 = tau + T::from_usize_lossy(n + 1) * cfg.dt;
            let d = diagnostics(space, &model, &u, fp(t1));
            traj.push(t1, u.clone(), d);
        }
    }
    Ok(traj)
}

/// Skew-product view: `(phase offset of θ_{t_i} g, u(t_i))`.
pub fn skew_orbit<'a, T: Scalar>(
    traj: &'a Trajectory<T>,
    g: &ForcingModel<T>,
) -> Vec<(T, &'a SpectralField<T>)> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| (g.shift(t).phase_offset(), u))
        .collect()
}
