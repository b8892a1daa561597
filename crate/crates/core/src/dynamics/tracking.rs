//! Bounded solutions near a hyperbolic equilibrium at 0, computed on the
//! whole time line by the exponential dichotomy of `u_t + Λu = N`:
//! stable modes are integrated forward from the far past, unstable modes
//! backward from the far future, and the nonlinearity is iterated to a
//! fixed point (Lyapunov–Perron).

use serde::{Deserialize, Serialize};

use super::trajectory::diagnostics;
use super::{ModelSpec, Trajectory};
use crate::error::DynamicsError;
use crate::forcing::ForcingModel;
use crate::phi::phi_functions;
use crate::scalar::Scalar;
use crate::spectral::{SpectralField, SpectralSpace};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackingConfig<T> {
    /// Step of the exponential trapezoid rule.
    pub h: T,
    /// Recorded span.
    pub t_start: T,
    pub t_end: T,
    pub record_every: usize,
    /// Sup-norm change (L²) at which the fixed-point iteration stops.
    pub tol: T,
    pub max_iter: usize,
    /// Decay budget for the discarded lead-in and tail, in units of the
    /// slowest stable / unstable time scale.
    pub margin_scales: T,
}

impl<T: Scalar> Default for TrackingConfig<T> {
    fn default() -> Self {
        Self {
            h: T::lit(0.01),
            t_start: T::zero(),
            t_end: T::lit(100.0),
            record_every: 5,
            tol: T::lit(1e-11),
            max_iter: 200,
            margin_scales: T::lit(30.0),
        }
    }
}

/// Bounded orbit near 0 of the forced equation on `[t_start, t_end]`.
///
/// Needs `Λ` hyperbolic (no `|λ_k| ≤ 10⁻⁹`); the iteration converges when
/// the forcing is small against the spectral gap.
pub fn track_bounded_orbit<T: Scalar>(
    space: &SpectralSpace<T>,
    model: ModelSpec<T>,
    g: &ForcingModel<T>,
    cfg: &TrackingConfig<T>,
) -> Result<Trajectory<T>, DynamicsError<T>> {
    model.validate()?;
    if !(cfg.h > T::zero()) || !(cfg.t_end > cfg.t_start) || cfg.record_every == 0 {
        return Err(DynamicsError::Config(
            "tracking needs h > 0, t_end > t_start and record_every >= 1".into(),
        ));
    }
    let lambda = model.lambda_modes(space.mode_mu());
    let marginal = T::lit(1e-9);
    if lambda.iter().any(|l| num_traits::Float::abs(*l) <= marginal) {
        return Err(DynamicsError::Config(
            "0 is not hyperbolic; the dichotomy does not exist".into(),
        ));
    }
    let slowest = |unstable: bool| {
        lambda
            .iter()
            .filter(|&&l| (l < T::zero()) == unstable)
            .map(|&l| num_traits::Float::abs(l))
            .fold(None, |m: Option<T>, l| Some(m.map_or(l, |m| m.min(l))))
    };
    let lead = slowest(false).map_or(T::zero(), |l| cfg.margin_scales / l);
    let tail = slowest(true).map_or(T::zero(), |l| cfg.margin_scales / l);
    let h = cfg.h;
    let lead_steps = (lead / h).ceil().as_f64() as usize;
    let span_steps = ((cfg.t_end - cfg.t_start) / h).round().as_f64() as usize;
    let tail_steps = (tail / h).ceil().as_f64() as usize;
    let total = lead_steps + span_steps + tail_steps;
    let t0 = cfg.t_start - T::from_usize_lossy(lead_steps) * h;
    let time = |i: usize| t0 + T::from_usize_lossy(i) * h;

    let n = lambda.len();
    // Forward weights for stable modes, backward weights for unstable ones.
    let mut e = Vec::with_capacity(n);
    let mut w1 = Vec::with_capacity(n);
    let mut w2 = Vec::with_capacity(n);
    for &l in &lambda {
        let z = if l > T::zero() { -l * h } else { l * h };
        let p = phi_functions(z, 2);
        e.push(p[0]);
        w1.push(h * p[1]);
        w2.push(h * p[2]);
    }
    let stable: Vec<bool> = lambda.iter().map(|&l| l > T::zero()).collect();
    let b = model.gradient_coefficient();
    let shape = space.shape();
    let sqrt_w = (space.measure() / T::from_usize_lossy(1 << shape.rank)).sqrt();

    let mut path = vec![T::zero(); (total + 1) * n];
    let mut unstable_n = vec![T::zero(); (total + 1) * n];
    let forcing_term = |u: &[T], t: T| -> Result<Vec<T>, DynamicsError<T>> {
        let field = SpectralField {
            coeffs: u.to_vec(),
            shape,
        };
        let mut out = space
            .polynomial_terms(&field, b)
            .map_err(|_| DynamicsError::Diverged {
                t,
                partial: Box::default(),
            })?
            .neg();
        g.accumulate(t, T::one(), &mut out);
        Ok(out.coeffs)
    };

    let mut converged = false;
    let mut change = T::infinity();
    for _ in 0..cfg.max_iter {
        change = T::zero();
        let mut prev_n = forcing_term(&path[..n], time(0))?;
        unstable_n[..n].copy_from_slice(&prev_n);
        // Stable modes start from rest in the far past.
        for k in (0..n).filter(|&k| stable[k]) {
            change = change.max(num_traits::Float::abs(path[k]) * sqrt_w);
            path[k] = T::zero();
        }
        for i in 0..total {
            let next = (i + 1) * n;
            let next_n = forcing_term(&path[next..next + n], time(i + 1))?;
            unstable_n[next..next + n].copy_from_slice(&next_n);
            let mut updated = path[next..next + n].to_vec();
            for k in 0..n {
                if stable[k] {
                    updated[k] = e[k] * path[i * n + k]
                        + w1[k] * prev_n[k]
                        + w2[k] * (next_n[k] - prev_n[k]);
                }
            }
            change = change.max(l2_change(space, &path[next..next + n], &updated));
            path[next..next + n].copy_from_slice(&updated);
            prev_n = next_n;
        }
        for k in (0..n).filter(|&k| !stable[k]) {
            path[total * n + k] = T::zero();
            for i in (0..total).rev() {
                let (nn, nx) = (unstable_n[i * n + k], unstable_n[(i + 1) * n + k]);
                let v = e[k] * path[(i + 1) * n + k] - (w1[k] * nx + w2[k] * (nn - nx));
                let d = num_traits::Float::abs(v - path[i * n + k]);
                change = change.max(d * sqrt_w);
                path[i * n + k] = v;
            }
        }
        if !change.is_finite() {
            break;
        }
        if change < cfg.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(DynamicsError::NoConvergence(format!(
            "last sup change {change} after {} iterations",
            cfg.max_iter
        )));
    }

    let mut traj = Trajectory {
        dt: h,
        record_every: cfg.record_every,
        ..Default::default()
    };
    for i in (lead_steps..=lead_steps + span_steps).step_by(cfg.record_every) {
        let t = time(i);
        let u = SpectralField {
            coeffs: path[i * n..(i + 1) * n].to_vec(),
            shape,
        };
        let d = diagnostics(space, &model, &u, g.shift(t).phase_offset());
        traj.push(t, u, d);
    }
    Ok(traj)
}

fn l2_change<T: Scalar>(space: &SpectralSpace<T>, a: &[T], b: &[T]) -> T {
    let s: T = a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum();
    (space.measure() / T::from_usize_lossy(1 << space.shape().rank) * s).sqrt()
}
