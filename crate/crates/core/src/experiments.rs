//! Multi-run studies: pairs (or triples) of forced orbits seeded near
//! distinct unforced equilibria, with recurrence and separation evidence.
//!
//! The orbit near the unstable equilibrium 0 cannot be reached by forward
//! integration (it would leave along the unstable modes), so it is computed
//! as the bounded solution by [`track_bounded_orbit`]. Orbits near stable
//! equilibria are plain forward runs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    integrate, track_bounded_orbit, IntegratorConfig, ModelKind, ModelSpec, TrackingConfig, Trajectory,
};
use crate::error::ExperimentError;
use crate::forcing::ForcingModel;
use crate::gradient::{
    default_seeds, find_equilibria, lambda_zero, morse_index_zero, Equilibrium, EquilibriumSearch, NewtonConfig,
};
use crate::recurrence::{epsilon_ell_table, separation, RecurrenceConfig, RecurrenceReport, SeparationReport, Verdict};
use crate::scalar::Scalar;
use crate::spectral::{SpectralField, SpectralSpace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig<T> {
    pub horizon: T,
    pub burn_in: T,
    /// ETDRK4 step of the forward runs.
    pub dt: T,
    /// Step of the bounded-orbit iteration.
    pub tracking_h: T,
    /// Recording interval shared by every run.
    pub sample_step: T,
    pub eps: Vec<T>,
    /// Required separation as a fraction of ‖u₀‖.
    pub separation_fraction: T,
    /// Largest |b| accepted.
    pub b_gate: T,
    /// Largest forcing bound accepted.
    pub m_gate: T,
    pub random_seeds: usize,
    pub rng_seed: u64,
}

impl<T: Scalar> Default for StudyConfig<T> {
    fn default() -> Self {
        Self {
            horizon: T::lit(500.0),
            burn_in: T::lit(50.0),
            dt: T::lit(5e-3),
            tracking_h: T::lit(0.01),
            sample_step: T::lit(0.1),
            eps: vec![T::lit(0.1), T::lit(0.05)],
            separation_fraction: T::lit(0.5),
            b_gate: T::lit(0.2),
            m_gate: T::lit(0.2),
            random_seeds: 4,
            rng_seed: 7,
        }
    }
}

impl<T: Scalar> StudyConfig<T> {
    fn every(&self, step: T) -> Result<usize, ExperimentError<T>> {
        let k = (self.sample_step / step).round();
        let ok = k >= T::one() && num_traits::Float::abs(k * step - self.sample_step) <= T::lit(1e-9) * self.sample_step;
        if !ok {
            return Err(ExperimentError::Gate(format!(
                "sample_step {} must be a multiple of the step {step}",
                self.sample_step
            )));
        }
        Ok(k.as_f64() as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Swift–Hohenberg with `a < −λ₀`: orbits near 0 and near u₀.
    TwoOrbits,
    /// Chafee–Infante with `a > μ₁`: orbits near 0 and ±u₀.
    ThreeOrbits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMethod {
    Tracked,
    Forward,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRun<T> {
    pub label: String,
    pub method: RunMethod,
    pub initial: SpectralField<T>,
    pub trajectory: Trajectory<T>,
    pub recurrence: RecurrenceReport<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate<T> {
    pub lambda_zero: T,
    /// `−λ₀` for the two-orbit study, `μ₁` for the three-orbit study.
    pub threshold: T,
    pub forcing_bound: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport<T> {
    pub kind: StudyKind,
    pub model: ModelSpec<T>,
    pub gate: Gate<T>,
    pub equilibria: EquilibriumSearch<T>,
    pub u0_norm: T,
    pub runs: Vec<OrbitRun<T>>,
    pub separations: Vec<SeparationReport<T>>,
    pub verdict: bool,
}

impl<T: Scalar> StudyReport<T> {
    pub fn verdict_line(&self) -> String {
        let what = match self.kind {
            StudyKind::TwoOrbits => "two",
            StudyKind::ThreeOrbits => "three",
        };
        let yn = if self.verdict { "yes" } else { "no" };
        format!("{what} distinct recurrent-evidence orbits: {yn}")
    }
}

fn forcing_bound<T: Scalar>(space: &SpectralSpace<T>, g: &ForcingModel<T>) -> T {
    g.sup_bound(space, None).bound
}

/// Gate check for the two-orbit study; `Ok` carries the gate values.
pub fn two_orbit_gate<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    cfg: &StudyConfig<T>,
) -> Result<Gate<T>, ExperimentError<T>> {
    if model.kind != ModelKind::ModifiedSwiftHohenberg {
        return Err(ExperimentError::Gate("the two-orbit study needs the Swift-Hohenberg model".into()));
    }
    let l0 = lambda_zero(space.spectrum());
    let gate = Gate {
        lambda_zero: l0,
        threshold: -l0,
        forcing_bound: forcing_bound(space, g),
    };
    if !(model.a < -l0) {
        return Err(ExperimentError::Gate(format!(
            "a = {} must be below -lambda_0 = {} (lambda_0 = {l0})",
            model.a, -l0
        )));
    }
    check_small(model.b, gate.forcing_bound, cfg)?;
    Ok(gate)
}

pub fn three_orbit_gate<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    cfg: &StudyConfig<T>,
) -> Result<Gate<T>, ExperimentError<T>> {
    if model.kind != ModelKind::ChafeeInfante {
        return Err(ExperimentError::Gate("the three-orbit study needs the Chafee-Infante model".into()));
    }
    let mu1 = space.mode_mu().iter().copied().fold(T::infinity(), T::min);
    let gate = Gate {
        lambda_zero: mu1 - model.a,
        threshold: mu1,
        forcing_bound: forcing_bound(space, g),
    };
    if !(model.a > mu1) {
        return Err(ExperimentError::Gate(format!("a = {} must exceed mu_1 = {mu1}", model.a)));
    }
    check_small(T::zero(), gate.forcing_bound, cfg)?;
    Ok(gate)
}

fn check_small<T: Scalar>(b: T, m: T, cfg: &StudyConfig<T>) -> Result<(), ExperimentError<T>> {
    if num_traits::Float::abs(b) > cfg.b_gate {
        return Err(ExperimentError::Gate(format!("|b| = {b} exceeds the gate {}", cfg.b_gate)));
    }
    if m > cfg.m_gate {
        return Err(ExperimentError::Gate(format!("forcing bound {m} exceeds the gate {}", cfg.m_gate)));
    }
    Ok(())
}

/// Unforced equilibria from the default seeds.
pub fn inventory<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    cfg: &StudyConfig<T>,
) -> Result<EquilibriumSearch<T>, ExperimentError<T>> {
    let seeds = default_seeds(space, model, cfg.random_seeds, cfg.rng_seed);
    Ok(find_equilibria(space, model, &seeds, &NewtonConfig::default())?)
}

/// Lowest-V nontrivial equilibrium, preferring stable ones.
pub fn pick_u0<T: Scalar>(space: &SpectralSpace<T>, found: &EquilibriumSearch<T>) -> Option<Equilibrium<T>> {
    let nontrivial = |e: &&Equilibrium<T>| space.l2_norm(&e.state) > T::lit(1e-8);
    let by_v = |x: &&Equilibrium<T>, y: &&Equilibrium<T>| x.v.partial_cmp(&y.v).unwrap();
    let stable = found
        .equilibria
        .iter()
        .filter(nontrivial)
        .filter(|e| e.unstable_dim == 0)
        .min_by(by_v);
    stable
        .or_else(|| found.equilibria.iter().filter(nontrivial).min_by(by_v))
        .cloned()
}

struct Seed<T> {
    label: String,
    method: RunMethod,
    initial: SpectralField<T>,
}

fn run_seed<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    cfg: &StudyConfig<T>,
    seed: &Seed<T>,
) -> Result<Trajectory<T>, ExperimentError<T>> {
    match seed.method {
        RunMethod::Tracked => {
            let tc = TrackingConfig {
                h: cfg.tracking_h,
                t_start: T::zero(),
                t_end: cfg.horizon,
                record_every: cfg.every(cfg.tracking_h)?,
                ..TrackingConfig::default()
            };
            Ok(track_bounded_orbit(space, *model, g, &tc)?)
        }
        RunMethod::Forward => {
            let ic = IntegratorConfig {
                dt: cfg.dt,
                t_end: cfg.horizon,
                record_every: cfg.every(cfg.dt)?,
                ..IntegratorConfig::default()
            };
            Ok(integrate(space, *model, g, &seed.initial, T::zero(), &ic)?)
        }
    }
}

fn study<T: Scalar>(
    kind: StudyKind,
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    cfg: &StudyConfig<T>,
    gate: Gate<T>,
) -> Result<StudyReport<T>, ExperimentError<T>> {
    let found = inventory(space, model, cfg)?;
    let u0 = pick_u0(space, &found)
        .ok_or_else(|| ExperimentError::Gate("no nontrivial equilibrium found".into()))?
        .state;
    let mut seeds = vec![
        Seed {
            label: "zero".into(),
            method: RunMethod::Tracked,
            initial: space.zeros(),
        },
        Seed {
            label: "u0".into(),
            method: RunMethod::Forward,
            initial: u0.clone(),
        },
    ];
    if kind == StudyKind::ThreeOrbits {
        // the mirror image, or the found equilibrium closest to it
        let mirror = u0.neg();
        let minus = found
            .equilibria
            .iter()
            .map(|e| &e.state)
            .min_by(|x, y| {
                space
                    .l2_distance(x, &mirror)
                    .partial_cmp(&space.l2_distance(y, &mirror))
                    .unwrap()
            })
            .filter(|e| space.l2_distance(e, &mirror) < T::lit(1e-6) * (T::one() + space.l2_norm(&u0)))
            .cloned()
            .unwrap_or(mirror);
        seeds.push(Seed {
            label: "minus_u0".into(),
            method: RunMethod::Forward,
            initial: minus,
        });
    }
    let rc = RecurrenceConfig {
        burn_in: cfg.burn_in,
        forcing_period: g.characteristic_period(),
        ..RecurrenceConfig::default()
    };
    let runs = seeds
        .into_par_iter()
        .map(|seed| {
            let trajectory = run_seed(space, model, g, cfg, &seed)?;
            let recurrence = epsilon_ell_table(space, &trajectory, &cfg.eps, &rc)?;
            Ok(OrbitRun {
                label: seed.label,
                method: seed.method,
                initial: seed.initial,
                trajectory,
                recurrence,
            })
        })
        .collect::<Result<Vec<_>, ExperimentError<T>>>()?;
    let mut separations = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            let mut s = separation(space, &runs[i].trajectory, &runs[j].trajectory, cfg.burn_in, None)?;
            s.pair = Some((runs[i].label.clone(), runs[j].label.clone()));
            separations.push(s);
        }
    }
    let u0_norm = space.l2_norm(&u0);
    let verdict = runs.iter().all(|r| r.recurrence.verdict == Verdict::RecurrentEvidence)
        && separations
            .iter()
            .all(|s| s.min_shift_distance >= cfg.separation_fraction * u0_norm);
    Ok(StudyReport {
        kind,
        model: *model,
        gate,
        equilibria: found,
        u0_norm,
        runs,
        separations,
        verdict,
    })
}

/// Two forced orbits near the equilibria 0 and u₀ of the unforced problem.
pub fn two_orbit_study<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    cfg: &StudyConfig<T>,
) -> Result<StudyReport<T>, ExperimentError<T>> {
    let gate = two_orbit_gate(space, model, g, cfg)?;
    study(StudyKind::TwoOrbits, space, model, g, cfg, gate)
}

/// Three forced orbits near 0 and ±u₀ of the Chafee–Infante problem.
pub fn three_orbit_study<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    g: &ForcingModel<T>,
    cfg: &StudyConfig<T>,
) -> Result<StudyReport<T>, ExperimentError<T>> {
    let gate = three_orbit_gate(space, model, g, cfg)?;
    study(StudyKind::ThreeOrbits, space, model, g, cfg, gate)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    A,
    B,
    #[serde(rename = "M")]
    M,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "a" => Ok(SweepAxis::A),
            "b" => Ok(SweepAxis::B),
            "M" | "m" => Ok(SweepAxis::M),
            _ => Err(format!("unknown sweep axis {s:?} (a, b or M)")),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::A => "a",
            SweepAxis::B => "b",
            SweepAxis::M => "M",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub axis: SweepAxis,
    pub value: T,
    pub r_zero: usize,
    pub equilibria: usize,
    /// Two-orbit verdict; `None` when the gate refused or a run failed.
    pub verdict: Option<bool>,
    pub min_separation: Option<T>,
    /// Share of sample steps of an unforced run on which V rose by more than
    /// 1e-8.
    pub v_increase_fraction: Option<T>,
    pub error: Option<String>,
}

/// Per-point spectral data, equilibrium count, V-monotonicity of an unforced
/// run and the two-orbit verdict. Failures are recorded, never fatal.
pub fn sweep_point<T: Scalar>(
    space: &SpectralSpace<T>,
    model: ModelSpec<T>,
    g: &ForcingModel<T>,
    axis: SweepAxis,
    value: T,
    cfg: &StudyConfig<T>,
) -> SweepPoint<T> {
    let (model, g) = match axis {
        SweepAxis::A => (ModelSpec { a: value, ..model }, g.clone()),
        SweepAxis::B => (ModelSpec { b: value, ..model }, g.clone()),
        SweepAxis::M => {
            let m = forcing_bound(space, g);
            let s = if m > T::zero() { value / m } else { T::zero() };
            (model, g.scaled(s))
        }
    };
    let mut p = SweepPoint {
        axis,
        value,
        r_zero: morse_index_zero(&model, space.spectrum()).r,
        equilibria: 0,
        verdict: None,
        min_separation: None,
        v_increase_fraction: None,
        error: None,
    };
    match inventory(space, &model, cfg) {
        Ok(found) => p.equilibria = found.equilibria.len(),
        Err(e) => p.error = Some(e.to_string()),
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let u = space.random_smooth(&mut rng, T::lit(0.5));
    let ic = IntegratorConfig {
        dt: cfg.dt,
        t_end: T::lit(20.0),
        record_every: cfg.every(cfg.dt).unwrap_or(1),
        ..IntegratorConfig::default()
    };
    if let Ok(tr) = integrate(space, model, &ForcingModel::zero(space.shape()), &u, T::zero(), &ic) {
        let steps = tr.diagnostics.windows(2).count().max(1);
        let ups = tr
            .diagnostics
            .windows(2)
            .filter(|w| w[1].v > w[0].v + T::lit(1e-8))
            .count();
        p.v_increase_fraction = Some(T::from_usize_lossy(ups) / T::from_usize_lossy(steps));
    }
    match two_orbit_study(space, &model, &g, cfg) {
        Ok(rep) => {
            p.verdict = Some(rep.verdict);
            p.min_separation = rep
                .separations
                .iter()
                .map(|s| s.min_shift_distance)
                .reduce(T::min);
        }
        Err(e) => p.error = Some(e.to_string()),
    }
    p
}

pub fn sweep<T: Scalar>(
    space: &SpectralSpace<T>,
    model: ModelSpec<T>,
    g: &ForcingModel<T>,
    axis: SweepAxis,
    grid: &[T],
    cfg: &StudyConfig<T>,
) -> Vec<SweepPoint<T>> {
    grid.par_iter()
        .map(|&v| sweep_point(space, model, g, axis, v, cfg))
        .collect()
}
