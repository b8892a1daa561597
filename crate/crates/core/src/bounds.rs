//! A-priori absorbing constants and discrete checks of the energy estimates.
//!
//! Testing the equation with `u` and absorbing the `2Δu`, forcing and
//! `b|∇u|²` pairings by Young's inequality gives
//!
//! ```text
//! d/dt‖u‖² + ‖u‖² + ‖Δu‖² + ½(4 − b²)‖u‖⁴_{L⁴} + (2a − 11)‖u‖² ≤ ½‖g‖²,
//! ```
//!
//! and with `‖u‖⁴_{L⁴} ≥ ‖u‖⁴/|Ω|` the right side is at most `R0²`, where
//! `R0² = M²/2 + sup_s [(11 − 2a)s − ½(4 − b̃²)s²/|Ω|]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{ModelKind, ModelSpec, Trajectory};
use crate::error::BoundsError;
use crate::forcing::ForcingModel;
use crate::scalar::Scalar;
use crate::spectral::SpectralSpace;

/// How `‖u‖²` is compared with `‖u‖²_{L⁴}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OmegaConvention {
    /// `‖u‖² ≤ |Ω|^{1/2}‖u‖²_{L⁴}` (Cauchy–Schwarz), so the sup scales with `|Ω|`.
    #[default]
    CauchySchwarz,
    /// `‖u‖² ≤ |Ω|‖u‖²_{L⁴}`, as sometimes quoted; the sup scales with `|Ω|²`.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct R0Breakdown<T> {
    /// `M²/2`.
    pub forcing_term: T,
    /// `sup_s [(11 − 2a)s − ½(4 − b̃²)s²/c]`.
    pub polynomial_term: T,
    /// `(11 − 2a)₊`.
    pub linear_coefficient: T,
    /// `½(4 − b̃²)`.
    pub quartic_coefficient: T,
    /// `c`, the factor in `‖u‖⁴ ≤ c‖u‖⁴_{L⁴}`.
    pub omega_factor: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AprioriConstants<T> {
    pub a: T,
    pub b_tilde: T,
    pub m: T,
    pub omega_measure: T,
    pub convention: OmegaConvention,
    pub r0: T,
    pub r0_sq: T,
    pub breakdown: R0Breakdown<T>,
}

pub fn compute_r0<T: Scalar>(
    a: T,
    b_tilde: T,
    m: T,
    omega_measure: T,
    convention: OmegaConvention,
) -> Result<AprioriConstants<T>, BoundsError> {
    let two = T::lit(2.0);
    if !(b_tilde > T::zero() && b_tilde < two) {
        return Err(BoundsError::CoercivityLost(b_tilde.as_f64()));
    }
    if !(m >= T::zero()) || !m.is_finite() {
        return Err(BoundsError::Invalid(format!("forcing bound M = {m} must be >= 0")));
    }
    if !(omega_measure > T::zero()) || !a.is_finite() {
        return Err(BoundsError::Invalid("need |Ω| > 0 and finite a".into()));
    }
    let c = match convention {
        OmegaConvention::CauchySchwarz => omega_measure,
        OmegaConvention::Literal => omega_measure * omega_measure,
    };
    let lin = (T::lit(11.0) - two * a).max(T::zero());
    let quart = (T::lit(4.0) - b_tilde * b_tilde) / two;
    let forcing_term = m * m / two;
    // maximum of lin·s − quart·s²/c at s = lin·c/(2 quart)
    let polynomial_term = lin * lin * c / (T::lit(4.0) * quart);
    let r0_sq = forcing_term + polynomial_term;
    Ok(AprioriConstants {
        a,
        b_tilde,
        m,
        omega_measure,
        convention,
        r0: r0_sq.sqrt(),
        r0_sq,
        breakdown: R0Breakdown {
            forcing_term,
            polynomial_term,
            linear_coefficient: lin,
            quartic_coefficient: quart,
            omega_factor: c,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `d/dt‖u‖² + ‖u‖² + ‖Δu‖² < R0²` between consecutive samples.
    Energy,
    /// `‖u(t)‖² ≤ e^{τ−t}‖u(τ)‖² + R0²(1 − e^{τ−t})` for every sample pair.
    Envelope,
    /// Empirical sup of `‖Δu‖` after a dwell time.
    H2Regularization,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundKind::Energy => "energy",
            BoundKind::Envelope => "envelope",
            BoundKind::H2Regularization => "h2_regularization",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport<T> {
    pub inequality: BoundKind,
    /// Largest excess of the left side over the right side, 0 if none.
    pub max_violation: T,
    /// Smallest `right − left` over the checked samples (for the H² check, the
    /// fitted bound).
    pub margin_min: T,
    /// Discretization allowance `10·h·(1 + max‖u‖²)`, `h` the sample spacing.
    pub slack: T,
    pub applicable: bool,
    pub note: Option<String>,
    /// First recorded time with `‖u‖ ≤ R0`.
    pub entry_time: Option<T>,
    /// `max ‖u‖/R0` after entry.
    pub post_entry_ratio: Option<T>,
    pub dwell_time: Option<T>,
}

impl<T: Scalar> BoundReport<T> {
    fn new(inequality: BoundKind) -> Self {
        Self {
            inequality,
            max_violation: T::zero(),
            margin_min: T::infinity(),
            slack: T::zero(),
            applicable: true,
            note: None,
            entry_time: None,
            post_entry_ratio: None,
            dwell_time: None,
        }
    }

    pub fn inapplicable(inequality: BoundKind, why: String) -> Self {
        Self {
            applicable: false,
            note: Some(why),
            ..Self::new(inequality)
        }
    }

    /// Applicable and within the slack.
    pub fn passed(&self) -> bool {
        self.applicable && self.max_violation <= self.slack
    }
}

fn applicability<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    consts: &AprioriConstants<T>,
) -> Result<(), String> {
    if model.kind != ModelKind::ModifiedSwiftHohenberg {
        return Err("constants are derived for the Swift-Hohenberg operator".into());
    }
    let tol = T::lit(1e-12);
    if num_traits::Float::abs(model.a - consts.a) > tol * (T::one() + num_traits::Float::abs(consts.a)) {
        return Err(format!("model a = {} differs from constants a = {}", model.a, consts.a));
    }
    if num_traits::Float::abs(model.b) > consts.b_tilde {
        return Err(format!("|b| = {} exceeds b_tilde = {}", model.b, consts.b_tilde));
    }
    let sup = g.sup_bound(space, None).bound;
    if sup > consts.m * (T::one() + tol) {
        return Err(format!("forcing bound {sup} exceeds M = {}", consts.m));
    }
    if num_traits::Float::abs(space.measure() - consts.omega_measure) > tol * space.measure() {
        return Err("domain measure differs from the constants".into());
    }
    Ok(())
}

fn sq_norms<T: Scalar>(space: &SpectralSpace<T>, traj: &Trajectory<T>) -> (Vec<T>, Vec<T>) {
    traj.states
        .par_iter()
        .map(|u| {
            let h = space.h2_norm(u);
            (space.l2_norm_sq(u), h * h)
        })
        .unzip()
}

fn slack<T: Scalar>(traj: &Trajectory<T>, l2sq: &[T]) -> T {
    let max = l2sq.iter().fold(T::zero(), |m, &x| m.max(x));
    T::lit(10.0) * traj.sample_step() * (T::one() + max)
}

/// Integrated form over each sample interval:
/// `(‖u_{i+1}‖² − ‖u_i‖²)/h + trapezoid mean of (‖u‖² + ‖Δu‖²) ≤ R0²`.
pub fn verify_energy_inequality<T: Scalar>(
    space: &SpectralSpace<T>,
    traj: &Trajectory<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    consts: &AprioriConstants<T>,
) -> BoundReport<T> {
    if let Err(why) = applicability(space, model, g, consts) {
        return BoundReport::inapplicable(BoundKind::Energy, why);
    }
    let mut rep = BoundReport::new(BoundKind::Energy);
    let (l2sq, h2sq) = sq_norms(space, traj);
    rep.slack = slack(traj, &l2sq);
    let half = T::lit(0.5);
    for i in 0..traj.len().saturating_sub(1) {
        let h = traj.times[i + 1] - traj.times[i];
        let lhs = (l2sq[i + 1] - l2sq[i]) / h + half * (l2sq[i] + h2sq[i] + l2sq[i + 1] + h2sq[i + 1]);
        let margin = consts.r0_sq - lhs;
        rep.margin_min = rep.margin_min.min(margin);
        rep.max_violation = rep.max_violation.max(-margin);
    }
    rep
}

/// Pairwise envelope check plus the entry time into the `R0` ball and the
/// largest excursion after entry.
pub fn verify_absorbing<T: Scalar>(
    space: &SpectralSpace<T>,
    traj: &Trajectory<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    consts: &AprioriConstants<T>,
) -> BoundReport<T> {
    if let Err(why) = applicability(space, model, g, consts) {
        return BoundReport::inapplicable(BoundKind::Envelope, why);
    }
    let mut rep = BoundReport::new(BoundKind::Envelope);
    let (l2sq, _) = sq_norms(space, traj);
    rep.slack = slack(traj, &l2sq);
    let r0sq = consts.r0_sq;
    let times = &traj.times;
    let (violation, margin) = (0..traj.len())
        .into_par_iter()
        .map(|k| {
            let (mut v, mut m) = (T::zero(), T::infinity());
            for j in k + 1..times.len() {
                let e = (times[k] - times[j]).exp();
                let margin = e * l2sq[k] + r0sq * (T::one() - e) - l2sq[j];
                m = m.min(margin);
                v = v.max(-margin);
            }
            (v, m)
        })
        .reduce(
            || (T::zero(), T::infinity()),
            |a, b| (a.0.max(b.0), a.1.min(b.1)),
        );
    rep.max_violation = violation;
    rep.margin_min = margin;
    if let Some(i) = l2sq.iter().position(|&s| s <= r0sq) {
        rep.entry_time = Some(times[i]);
        if consts.r0 > T::zero() {
            let peak = l2sq[i..].iter().fold(T::zero(), |m, &x| m.max(x));
            rep.post_entry_ratio = Some(peak.sqrt() / consts.r0);
        }
    }
    rep
}

/// Largest `‖Δu‖` once `t ≥ t₀ + dwell`; reported in `margin_min`.
pub fn verify_h2_regularization<T: Scalar>(
    space: &SpectralSpace<T>,
    traj: &Trajectory<T>,
    dwell: T,
) -> BoundReport<T> {
    let mut rep = BoundReport::new(BoundKind::H2Regularization);
    rep.dwell_time = Some(dwell);
    let Some(&t0) = traj.times.first() else {
        return BoundReport::inapplicable(BoundKind::H2Regularization, "empty trajectory".into());
    };
    let sup = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(&t, _)| t >= t0 + dwell)
        .map(|(_, u)| space.h2_norm(u))
        .fold(T::zero(), |m, x| if x.is_finite() { m.max(x) } else { T::infinity() });
    rep.margin_min = sup;
    if !sup.is_finite() {
        rep.max_violation = T::infinity();
    }
    rep
}
