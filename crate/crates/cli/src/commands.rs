use std::io::Write;

use msh_core::bounds::{
    compute_r0, verify_absorbing, verify_energy_inequality, verify_h2_regularization, BoundKind, BoundReport,
    OmegaConvention,
};
use msh_core::dynamics::{duhamel_residual, integrate, ModelKind};
use msh_core::experiments::{inventory, sweep, three_orbit_study, two_orbit_study, StudyKind, StudyReport};
use msh_core::export::{
    fmt_float, verdict_line, write_bounds_csv, write_coeffs_ndjson, write_equilibria_ndjson, write_morse_summary_csv,
    write_recurrence_csv, write_separation_csv, write_sweep_csv, write_trajectory_csv,
};
use msh_core::gradient::{lambda_zero, morse_decomposition, morse_index_zero, MorseConfig};
use msh_core::recurrence::{epsilon_ell_table, RecurrenceConfig};
use msh_core::{DynamicsError, Forcing, Model, Orbit, Space};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Built, Format, ScenarioConfig};
use crate::error::CliError;
use crate::output::RunDir;

/// Bound checks for one trajectory. `b̃` is taken as `|b|` (or 1e-6 when
/// `b = 0`) and `M` as the forcing bound.
pub fn bound_reports(space: &Space, model: &Model, g: &Forcing, traj: &Orbit) -> Vec<BoundReport<f64>> {
    let b_tilde = if model.b == 0.0 { 1e-6 } else { model.b.abs() };
    let m = g.sup_bound(space, None).bound;
    let mut out = match compute_r0(model.a, b_tilde, m, space.measure(), OmegaConvention::CauchySchwarz) {
        Ok(c) => vec![
            verify_energy_inequality(space, traj, model, g, &c),
            verify_absorbing(space, traj, model, g, &c),
        ],
        Err(e) => [BoundKind::Energy, BoundKind::Envelope]
            .into_iter()
            .map(|k| BoundReport::inapplicable(k, e.to_string()))
            .collect(),
    };
    out.push(verify_h2_regularization(space, traj, 1.0));
    out
}

fn write_orbit(dir: &mut RunDir, sub: &str, cfg: &ScenarioConfig, traj: &Orbit) -> Result<(), CliError> {
    if cfg.output.formats.contains(&Format::Csv) {
        dir.write(format!("{sub}/trajectory.csv"), |w| write_trajectory_csv(w, traj))?;
    }
    if cfg.output.formats.contains(&Format::Ndjson) {
        dir.write(format!("{sub}/coeffs.ndjson"), |w| write_coeffs_ndjson(w, traj))?;
    }
    Ok(())
}

pub fn spectrum(cfg: &ScenarioConfig, dir: Option<&mut RunDir>) -> Result<(), CliError> {
    let Built { space, model, .. } = cfg.build()?;
    let spec = space.spectrum();
    let idx = morse_index_zero(&model, spec);
    let mut table = String::from("mu,lambda,multiplicity\n");
    for (&mu, &m) in spec.mu.iter().zip(&spec.multiplicity) {
        table.push_str(&format!("{},{},{}\n", fmt_float(mu), fmt_float(model.lambda(mu)), m));
    }
    print!("{table}");
    let l0 = lambda_zero(spec);
    println!("lambda_0 = {}", fmt_float(l0));
    println!("r = {}", idx.r);
    if idx.marginal > 0 {
        println!("marginal = {}", idx.marginal);
    }
    if let Some(dir) = dir {
        dir.write("spectrum.csv", |w| w.write_all(table.as_bytes()))?;
        dir.write_json(
            "spectrum.json",
            &serde_json::json!({ "lambda_0": l0, "r": idx.r, "marginal": idx.marginal, "a": model.a }),
        )?;
    }
    Ok(())
}

pub fn simulate(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<(), CliError> {
    let Built { space, model, forcing } = cfg.build()?;
    let mut equilibria = Vec::new();
    if cfg.analyses.morse {
        let mc = MorseConfig {
            rng_seed: cfg.study.rng_seed,
            ..MorseConfig::default()
        };
        let rep = morse_decomposition(&space, &model, &mc)?;
        dir.write("morse_summary.csv", |w| write_morse_summary_csv(w, std::slice::from_ref(&rep)))?;
        equilibria = rep.equilibria;
    } else if cfg.seeds.iter().any(|s| s.needs_equilibria()) {
        equilibria = inventory(&space, &model, &cfg.study)?.equilibria;
    }
    if !equilibria.is_empty() {
        dir.write("equilibria.ndjson", |w| write_equilibria_ndjson(w, &equilibria))?;
    }
    let inits = cfg
        .seeds
        .iter()
        .map(|s| s.build(&space, &equilibria))
        .collect::<Result<Vec<_>, _>>()?;
    let results: Vec<_> = inits
        .par_iter()
        .map(|u| integrate(&space, model, &forcing, u, 0.0, &cfg.integrator))
        .collect();
    let mut failure = None;
    for (i, (seed, res)) in cfg.seeds.iter().zip(results).enumerate() {
        let sub = format!("seed_{i}_{}", seed.label());
        let traj = match res {
            Ok(t) => t,
            Err(DynamicsError::Diverged { t, partial }) => {
                write_orbit(dir, &sub, cfg, &partial)?;
                failure.get_or_insert(CliError::Diverged(format!("seed {seed} diverged at t = {t}")));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        write_orbit(dir, &sub, cfg, &traj)?;
        if cfg.analyses.bounds {
            let reps = bound_reports(&space, &model, &forcing, &traj);
            dir.write(format!("{sub}/bounds.csv"), |w| write_bounds_csv(w, &reps))?;
        }
        if cfg.analyses.recurrence {
            let rc = RecurrenceConfig {
                burn_in: cfg.recurrence.burn_in,
                norm: cfg.recurrence.norm,
                forcing_period: forcing.characteristic_period(),
                ..RecurrenceConfig::default()
            };
            let rep = epsilon_ell_table(&space, &traj, &cfg.recurrence.eps, &rc)?;
            dir.write(format!("{sub}/recurrence.csv"), |w| write_recurrence_csv(w, &rep))?;
            println!("{sub}: {}", verdict_line(&rep));
        }
        if cfg.analyses.duhamel {
            // windows of about one time unit
            let stride = ((1.0 / traj.sample_step()).round() as usize).max(1);
            let r = duhamel_residual(&space, &traj, &forcing, model, stride)?;
            dir.write(format!("{sub}/duhamel.csv"), |w| {
                writeln!(w, "stride,residual")?;
                writeln!(w, "{stride},{}", fmt_float(r))
            })?;
        }
    }
    failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    label: &'a str,
    method: msh_core::experiments::RunMethod,
    verdict: String,
    horizon: f64,
    diameter: f64,
    /// ε values above the diameter, where every sample is a return.
    trivial_eps: Vec<f64>,
    eps_ell: &'a [msh_core::recurrence::EpsEll<f64>],
}

#[derive(Serialize)]
struct SeparationSummary<'a> {
    pair: &'a Option<(String, String)>,
    min_shift_distance: f64,
    best_shift: f64,
}

#[derive(Serialize)]
struct StudySummary<'a> {
    verdict: bool,
    verdict_line: String,
    gate: &'a msh_core::experiments::Gate<f64>,
    u0_norm: f64,
    runs: Vec<RunSummary<'a>>,
    separations: Vec<SeparationSummary<'a>>,
}

pub fn study(cfg: &ScenarioConfig, kind: StudyKind, dir: &mut RunDir) -> Result<StudyReport<f64>, CliError> {
    let Built { space, model, forcing } = cfg.build()?;
    let rep = match kind {
        StudyKind::TwoOrbits => two_orbit_study(&space, &model, &forcing, &cfg.study)?,
        StudyKind::ThreeOrbits => three_orbit_study(&space, &model, &forcing, &cfg.study)?,
    };
    println!(
        "gate: a = {}, lambda_0 = {}, threshold = {}, forcing bound = {}",
        model.a, rep.gate.lambda_zero, rep.gate.threshold, rep.gate.forcing_bound
    );
    dir.write("equilibria.ndjson", |w| write_equilibria_ndjson(w, &rep.equilibria.equilibria))?;
    for run in &rep.runs {
        write_orbit(dir, &run.label, cfg, &run.trajectory)?;
        dir.write(format!("{}/recurrence.csv", run.label), |w| write_recurrence_csv(w, &run.recurrence))?;
        if model.kind == ModelKind::ModifiedSwiftHohenberg {
            let reps = bound_reports(&space, &model, &forcing, &run.trajectory);
            dir.write(format!("{}/bounds.csv", run.label), |w| write_bounds_csv(w, &reps))?;
        }
        println!("{}: {}", run.label, verdict_line(&run.recurrence));
    }
    for s in &rep.separations {
        let (p, q) = s.pair.clone().unwrap_or_default();
        dir.write(format!("separation_{p}__{q}.csv"), |w| write_separation_csv(w, s))?;
        println!("separation {p} / {q}: {}", fmt_float(s.min_shift_distance));
    }
    let summary = StudySummary {
        verdict: rep.verdict,
        verdict_line: rep.verdict_line(),
        gate: &rep.gate,
        u0_norm: rep.u0_norm,
        runs: rep
            .runs
            .iter()
            .map(|r| RunSummary {
                label: &r.label,
                method: r.method,
                verdict: r.recurrence.verdict.to_string(),
                horizon: r.recurrence.horizon,
                diameter: r.recurrence.diameter,
                trivial_eps: r.recurrence.trivial_eps(),
                eps_ell: &r.recurrence.eps_ell,
            })
            .collect(),
        separations: rep
            .separations
            .iter()
            .map(|s| SeparationSummary {
                pair: &s.pair,
                min_shift_distance: s.min_shift_distance,
                best_shift: s.best_shift,
            })
            .collect(),
    };
    dir.write_json("summary.json", &summary)?;
    println!("{}", rep.verdict_line());
    Ok(rep)
}

pub fn run_sweep(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<(), CliError> {
    let Built { space, model, forcing } = cfg.build()?;
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs --axis and --grid or a [sweep] section".into()))?;
    let points = sweep(&space, model, &forcing, sw.axis, &sw.grid, &cfg.study);
    for (k, p) in points.iter().enumerate() {
        dir.write_json(format!("point_{k:03}/point.json"), p)?;
    }
    dir.write("sweep.csv", |w| write_sweep_csv(w, &points))?;
    for p in &points {
        let v = match p.verdict {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        println!(
            "{} = {}: r = {}, equilibria = {}, verdict = {v}",
            p.axis, p.value, p.r_zero, p.equilibria
        );
    }
    Ok(())
}
