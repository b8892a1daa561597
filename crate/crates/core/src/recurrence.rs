//! Finite-horizon Birkhoff recurrence evidence for recorded orbits.
//!
//! For a base sample `x = u(s)` the return set is `{t_j : ‖u(t_j) − x‖ < ε}`
//! over the analysed span (after burn-in). The largest gap of that set,
//! counting the stretches to either end of the span, is the shortest window
//! length ℓ such that every window `[a, a + ℓ]` holds a return to `x`;
//! ℓ(ε) is its maximum over all base samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::AnalysisError;
use crate::scalar::Scalar;
use crate::spectral::{SpectralField, SpectralSpace};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceNorm {
    #[default]
    #[serde(rename = "L2")]
    L2,
    /// ‖Δ(u − v)‖.
    #[serde(rename = "H2")]
    H2,
}

impl std::fmt::Display for DistanceNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistanceNorm::L2 => "L2",
            DistanceNorm::H2 => "H2",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    RecurrentEvidence,
    Inconclusive,
    NonrecurrentEvidence,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::RecurrentEvidence => "recurrent_evidence",
            Verdict::Inconclusive => "inconclusive",
            Verdict::NonrecurrentEvidence => "nonrecurrent_evidence",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsEll<T> {
    pub eps: T,
    /// Shortest window length with a return in every window, for every base.
    pub ell: T,
    /// Return pairs `(base, t)` with `t ≠ base`.
    pub witnesses: usize,
    /// Largest gap between consecutive returns (span ends excluded).
    pub max_gap: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceReport<T> {
    pub eps_ell: Vec<EpsEll<T>>,
    pub verdict: Verdict,
    /// Length of the analysed span (after burn-in).
    pub horizon: T,
    pub burn_in: T,
    pub sample_step: T,
    pub samples: usize,
    pub norm_used: DistanceNorm,
    /// Largest distance between analysed samples. An ε above it makes every
    /// sample a return, so ℓ(ε) is just the sample step and says nothing.
    pub diameter: T,
}

impl<T: Scalar> RecurrenceReport<T> {
    /// The ε values that exceed the orbit diameter.
    pub fn trivial_eps(&self) -> Vec<T> {
        self.eps_ell.iter().map(|e| e.eps).filter(|&e| e > self.diameter).collect()
    }
}

/// Verdict thresholds as fractions of the analysed horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds<T> {
    /// Recurrent evidence needs ℓ(ε) ≤ `recurrent · horizon` for every ε.
    pub recurrent: T,
    /// Nonrecurrent evidence if some ℓ(ε) > `nonrecurrent · horizon`.
    pub nonrecurrent: T,
}

impl<T: Scalar> Default for Thresholds<T> {
    fn default() -> Self {
        Self {
            recurrent: T::lit(1.0 / 20.0),
            nonrecurrent: T::lit(0.5),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceConfig<T> {
    pub burn_in: T,
    pub norm: DistanceNorm,
    pub thresholds: Thresholds<T>,
    /// Longest forcing time scale; the span must be at least ten of them.
    pub forcing_period: Option<T>,
}

impl<T: Scalar> Default for RecurrenceConfig<T> {
    fn default() -> Self {
        Self {
            burn_in: T::zero(),
            norm: DistanceNorm::L2,
            thresholds: Thresholds::default(),
            forcing_period: None,
        }
    }
}

/// States as Euclidean vectors whose distances are the chosen norm.
fn embed<T: Scalar>(space: &SpectralSpace<T>, states: &[SpectralField<T>], norm: DistanceNorm) -> Vec<Vec<T>> {
    let w = (space.measure() / T::from_usize_lossy(1 << space.shape().rank)).sqrt();
    states
        .iter()
        .map(|u| match norm {
            DistanceNorm::L2 => u.coeffs.iter().map(|&c| w * c).collect(),
            DistanceNorm::H2 => u.coeffs.iter().zip(space.mode_mu()).map(|(&c, &mu)| w * mu * c).collect(),
        })
        .collect()
}

fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum::<T>().sqrt()
}

fn analysed<T: Scalar>(traj: &Trajectory<T>, burn_in: T) -> Result<usize, AnalysisError> {
    if traj.len() < 2 {
        return Err(AnalysisError::Precondition("trajectory needs at least two samples".into()));
    }
    if !(burn_in >= T::zero()) || !(burn_in < traj.horizon()) {
        return Err(AnalysisError::Precondition(format!(
            "burn_in {burn_in} must lie in [0, {})",
            traj.horizon()
        )));
    }
    let t0 = traj.times[0] + burn_in;
    // tolerate round-off in the recorded times
    let eps = traj.sample_step() * T::lit(1e-6);
    Ok(traj.times.partition_point(|&t| t < t0 - eps))
}

pub fn epsilon_ell_table<T: Scalar>(
    space: &SpectralSpace<T>,
    traj: &Trajectory<T>,
    eps_list: &[T],
    cfg: &RecurrenceConfig<T>,
) -> Result<RecurrenceReport<T>, AnalysisError> {
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > T::zero())) {
        return Err(AnalysisError::Precondition("eps values must be positive".into()));
    }
    let start = analysed(traj, cfg.burn_in)?;
    let times = &traj.times[start..];
    let m = times.len();
    if m < 2 {
        return Err(AnalysisError::Precondition("fewer than two samples after burn-in".into()));
    }
    let horizon = times[m - 1] - times[0];
    if let Some(p) = cfg.forcing_period {
        if horizon < T::lit(10.0) * p {
            return Err(AnalysisError::Precondition(format!(
                "analysed span {horizon} is shorter than 10 forcing periods ({p})"
            )));
        }
    }
    let step = traj.sample_step();
    let x = embed(space, &traj.states[start..], cfg.norm);

    // Per base sample: the farthest sample, and per ε (boundary-inclusive max
    // gap, interior max gap, returns).
    let rows: Vec<(T, Vec<(T, T, usize)>)> = (0..m)
        .into_par_iter()
        .map(|s| {
            let d: Vec<T> = (0..m).map(|j| dist(&x[s], &x[j])).collect();
            let far = d.iter().fold(T::zero(), |a, &b| a.max(b));
            let per_eps = eps_list
                .iter()
                .map(|&eps| {
                    let mut last: Option<usize> = None;
                    let mut interior = T::zero();
                    let mut count = 0usize;
                    let mut first = 0usize;
                    for (j, &dj) in d.iter().enumerate() {
                        if dj < eps || j == s {
                            match last {
                                Some(l) => interior = interior.max(times[j] - times[l]),
                                None => first = j,
                            }
                            last = Some(j);
                            count += 1;
                        }
                    }
                    let l = last.expect("base sample returns to itself");
                    let outer = (times[first] - times[0]).max(times[m - 1] - times[l]);
                    (outer.max(interior).max(step), interior, count - 1)
                })
                .collect();
            (far, per_eps)
        })
        .collect();
    let diameter = rows.iter().fold(T::zero(), |a, r| a.max(r.0));

    let eps_ell: Vec<EpsEll<T>> = eps_list
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let (mut ell, mut gap, mut witnesses) = (T::zero(), T::zero(), 0usize);
            for (_, row) in &rows {
                ell = ell.max(row[k].0);
                gap = gap.max(row[k].1);
                witnesses += row[k].2;
            }
            EpsEll { eps, ell, witnesses, max_gap: gap }
        })
        .collect();
    let th = cfg.thresholds;
    let verdict = if eps_ell.iter().any(|e| e.ell > th.nonrecurrent * horizon) {
        Verdict::NonrecurrentEvidence
    } else if eps_ell.iter().all(|e| e.ell <= th.recurrent * horizon) {
        Verdict::RecurrentEvidence
    } else {
        Verdict::Inconclusive
    };
    Ok(RecurrenceReport {
        eps_ell,
        verdict,
        horizon,
        burn_in: cfg.burn_in,
        sample_step: step,
        samples: m,
        norm_used: cfg.norm,
        diameter,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport<T> {
    pub min_shift_distance: T,
    /// Shift (time of the second orbit minus the first) attaining the minimum.
    pub best_shift: T,
    pub shift_grid: Vec<T>,
    /// Time-averaged distance at each grid shift.
    pub averages: Vec<T>,
    pub pair: Option<(String, String)>,
}

/// Minimum over shifts `k·Δ` (|k·Δ| ≤ `max_shift`) of the time average of
/// `‖u₁(t) − u₂(t + kΔ)‖` over the common post-burn-in samples.
pub fn separation<T: Scalar>(
    space: &SpectralSpace<T>,
    first: &Trajectory<T>,
    second: &Trajectory<T>,
    burn_in: T,
    max_shift: Option<T>,
) -> Result<SeparationReport<T>, AnalysisError> {
    let s1 = analysed(first, burn_in)?;
    let s2 = analysed(second, burn_in)?;
    let n = (first.len() - s1).min(second.len() - s2);
    let step = first.sample_step();
    let same_grid = num_traits::Float::abs(second.sample_step() - step) <= step * T::lit(1e-9);
    if !same_grid || n < 2 {
        return Err(AnalysisError::Precondition(
            "separation needs two orbits on the same sampling grid".into(),
        ));
    }
    let span = step * T::from_usize_lossy(n - 1);
    let max_shift = max_shift.unwrap_or(span * T::lit(0.25)).min(span * T::lit(0.5));
    let kmax = (max_shift / step).floor().as_f64() as isize;
    let a = embed(space, &first.states[s1..s1 + n], DistanceNorm::L2);
    let b = embed(space, &second.states[s2..s2 + n], DistanceNorm::L2);
    let shifts: Vec<isize> = (-kmax..=kmax).collect();
    let averages: Vec<T> = shifts
        .par_iter()
        .map(|&k| {
            let (lo, hi) = if k >= 0 { (0, n - k as usize) } else { ((-k) as usize, n) };
            let total: T = (lo..hi).map(|i| dist(&a[i], &b[(i as isize + k) as usize])).sum();
            total / T::from_usize_lossy(hi - lo)
        })
        .collect();
    let (best, &min) = averages
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
        .expect("shift grid contains 0");
    Ok(SeparationReport {
        min_shift_distance: min,
        best_shift: T::lit(shifts[best] as f64) * step,
        shift_grid: shifts.iter().map(|&k| T::lit(k as f64) * step).collect(),
        averages,
        pair: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster<T> {
    pub center: SpectralField<T>,
    pub occupancy: usize,
}

/// Greedy clustering of the last `tail_fraction` of the samples: each sample
/// joins the first center within `cluster_tol` or opens a new one.
pub fn omega_limit_estimate<T: Scalar>(
    space: &SpectralSpace<T>,
    traj: &Trajectory<T>,
    tail_fraction: T,
    cluster_tol: T,
) -> Result<Vec<Cluster<T>>, AnalysisError> {
    if !(tail_fraction > T::zero() && tail_fraction <= T::lit(0.5)) {
        return Err(AnalysisError::Precondition("tail_fraction must lie in (0, 1/2]".into()));
    }
    if traj.is_empty() {
        return Err(AnalysisError::Precondition("empty trajectory".into()));
    }
    let n = traj.len();
    let tail = ((T::from_usize_lossy(n) * tail_fraction).ceil().as_f64() as usize).clamp(1, n);
    let mut clusters: Vec<Cluster<T>> = Vec::new();
    for u in &traj.states[n - tail..] {
        match clusters
            .iter_mut()
            .find(|c| space.l2_distance(&c.center, u) <= cluster_tol)
        {
            Some(c) => c.occupancy += 1,
            None => clusters.push(Cluster {
                center: u.clone(),
                occupancy: 1,
            }),
        }
    }
    Ok(clusters)
}
