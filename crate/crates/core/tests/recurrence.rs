use std::f64::consts::PI;

use msh_core::dynamics::Trajectory;
use msh_core::recurrence::{
    epsilon_ell_table, omega_limit_estimate, separation, DistanceNorm, RecurrenceConfig, Verdict,
};
use msh_core::spectral::{DomainSpec, SpectralField, SpectralSpace};
use msh_core::{AnalysisError, Space};
use proptest::prelude::*;

fn space() -> Space {
    SpectralSpace::new(DomainSpec::interval_pi(8).unwrap()).unwrap()
}

fn orbit(s: &Space, step: f64, n: usize, f: impl Fn(f64) -> Vec<f64>) -> Trajectory<f64> {
    let times: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    let states = times
        .iter()
        .map(|&t| {
            let mut c = f(t);
            c.resize(s.shape().len(), 0.0);
            SpectralField::from_coeffs(s.shape(), c).unwrap()
        })
        .collect();
    Trajectory {
        times,
        states,
        diagnostics: Vec::new(),
        dt: step,
        record_every: 1,
    }
}

// L² radius `r` on (0, π): coefficient amplitude r / sqrt(π/2).
fn circle(s: &Space, period: f64, r: f64, phase: f64, step: f64, n: usize) -> Trajectory<f64> {
    let a = r / (PI / 2.0).sqrt();
    orbit(s, step, n, |t| {
        let th = 2.0 * PI * t / period + phase;
        vec![a * th.cos(), a * th.sin()]
    })
}

#[test]
fn constant_orbit_has_ell_equal_to_step() {
    let s = space();
    let u = s.mode(&[2], 0.7).unwrap();
    let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
    let m = msh_core::dynamics::ModelSpec::swift_hohenberg(0.5, 0.0);
    let traj = Trajectory::constant(&s, &m, u, times);
    let rep = epsilon_ell_table(&s, &traj, &[1e-3, 0.1], &RecurrenceConfig::default()).unwrap();
    for row in &rep.eps_ell {
        assert!((row.ell - 0.05).abs() < 1e-12);
        assert_eq!(row.witnesses, 200 * 199);
    }
    assert_eq!(rep.verdict, Verdict::RecurrentEvidence);
    // every ε is degenerate for a point
    assert_eq!(rep.diameter, 0.0);
    assert_eq!(rep.trivial_eps(), vec![1e-3, 0.1]);
}

#[test]
fn periodic_orbit_matches_return_window() {
    let s = space();
    let (p, step) = (1.0, 0.005);
    let traj = circle(&s, p, 1.0, 0.3, step, 10_001);
    let eps = [0.2, 0.5, 1.0];
    let rep = epsilon_ell_table(&s, &traj, &eps, &RecurrenceConfig::default()).unwrap();
    for row in &rep.eps_ell {
        let delta = p / PI * (row.eps / 2.0).asin();
        let exact = p - 2.0 * delta;
        assert!((row.ell - exact).abs() <= 2.0 * step, "{row:?} vs {exact}");
        assert!((row.max_gap - exact).abs() <= 2.0 * step);
    }
    assert_eq!(rep.verdict, Verdict::RecurrentEvidence);
    assert!((rep.horizon - 50.0).abs() < 1e-9);
    // radius 1: the diameter is 2, attained by antipodal samples
    assert!((rep.diameter - 2.0).abs() < 1e-9, "{}", rep.diameter);
    assert!(rep.trivial_eps().is_empty());
    let wide = epsilon_ell_table(&s, &traj, &[2.5], &RecurrenceConfig::default()).unwrap();
    assert_eq!(wide.trivial_eps(), vec![2.5]);
    assert_eq!(wide.eps_ell[0].witnesses, 10_001 * 10_000);
}

#[test]
fn h2_norm_scales_by_eigenvalue() {
    let s = space();
    // single-mode circle in modes 2 and 3 would mix weights; use mode 2 only
    let a = 1.0 / (PI / 2.0).sqrt();
    let traj = orbit(&s, 0.01, 2001, |t| vec![0.0, a * (2.0 * PI * t).cos()]);
    let l2 = epsilon_ell_table(&s, &traj, &[0.4], &RecurrenceConfig::default()).unwrap();
    let cfg = RecurrenceConfig {
        norm: DistanceNorm::H2,
        ..RecurrenceConfig::default()
    };
    // ‖Δ e₂‖ = 4 ‖e₂‖
    let h2 = epsilon_ell_table(&s, &traj, &[1.6], &cfg).unwrap();
    assert_eq!(l2.eps_ell[0].ell, h2.eps_ell[0].ell);
    assert_eq!(h2.norm_used, DistanceNorm::H2);
}

#[test]
fn drifting_orbit_is_nonrecurrent() {
    let s = space();
    let traj = orbit(&s, 0.05, 1001, |t| vec![t / 10.0]);
    let rep = epsilon_ell_table(&s, &traj, &[0.1, 0.05], &RecurrenceConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::NonrecurrentEvidence);
}

#[test]
fn slow_period_is_inconclusive() {
    let s = space();
    // period 10 on a span of 50: returns exist but gaps exceed span/20
    let traj = circle(&s, 10.0, 1.0, 0.0, 0.05, 1001);
    let rep = epsilon_ell_table(&s, &traj, &[0.2], &RecurrenceConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Inconclusive);
}

#[test]
fn preconditions() {
    let s = space();
    let traj = circle(&s, 1.0, 1.0, 0.0, 0.05, 201);
    let short = RecurrenceConfig {
        forcing_period: Some(2.0),
        ..RecurrenceConfig::default()
    };
    assert!(matches!(
        epsilon_ell_table(&s, &traj, &[0.1], &short),
        Err(AnalysisError::Precondition(_))
    ));
    let late = RecurrenceConfig {
        burn_in: 10.0,
        ..RecurrenceConfig::default()
    };
    assert!(epsilon_ell_table(&s, &traj, &[0.1], &late).is_err());
    assert!(epsilon_ell_table(&s, &traj, &[0.0], &RecurrenceConfig::default()).is_err());
}

#[test]
fn burn_in_drops_transient() {
    let s = space();
    let a = 1.0 / (PI / 2.0).sqrt();
    // fast exponential approach to a circle
    let traj = orbit(&s, 0.01, 6001, |t| {
        let r = 1.0 + 5.0 * (-4.0 * t).exp();
        vec![a * r * (2.0 * PI * t).cos(), a * r * (2.0 * PI * t).sin()]
    });
    let raw = epsilon_ell_table(&s, &traj, &[0.1], &RecurrenceConfig::default()).unwrap();
    let cfg = RecurrenceConfig {
        burn_in: 10.0,
        ..RecurrenceConfig::default()
    };
    let cut = epsilon_ell_table(&s, &traj, &[0.1], &cfg).unwrap();
    assert_eq!(raw.verdict, Verdict::NonrecurrentEvidence);
    assert_eq!(cut.verdict, Verdict::RecurrentEvidence);
    assert_eq!(cut.samples, 5001);
}

#[test]
fn separation_of_circles() {
    let s = space();
    let c1 = circle(&s, 1.0, 1.0, 0.0, 0.01, 4001);
    let c2 = circle(&s, 1.0, 1.0, 0.9, 0.01, 4001);
    let c3 = circle(&s, 1.0, 0.4, 0.0, 0.01, 4001);
    let same = separation(&s, &c1, &c1, 0.0, None).unwrap();
    assert!(same.min_shift_distance < 1e-14);
    // a phase shift is undone by a time shift, up to half a sample
    let shifted = separation(&s, &c1, &c2, 0.0, None).unwrap();
    assert!(shifted.min_shift_distance < 2.0 * (PI * 0.005).sin() * 1.0);
    // concentric circles stay |r1 - r2| apart whatever the shift
    let apart = separation(&s, &c1, &c3, 0.0, None).unwrap();
    assert!((apart.min_shift_distance - 0.6).abs() < 1e-12);
    let back = separation(&s, &c3, &c1, 0.0, None).unwrap();
    assert!((back.min_shift_distance - apart.min_shift_distance).abs() < 1e-14);
    assert_eq!(apart.shift_grid.len(), apart.averages.len());
}

#[test]
fn omega_limit_of_damped_spiral() {
    let s = space();
    let a = 1.0 / (PI / 2.0).sqrt();
    let traj = orbit(&s, 0.01, 5001, |t| {
        let r = (-t).exp();
        vec![0.3 + a * r * (7.0 * t).cos(), a * r * (7.0 * t).sin()]
    });
    let clusters = omega_limit_estimate(&s, &traj, 0.2, 1e-3).unwrap();
    assert_eq!(clusters.len(), 1);
    assert_eq!(clusters[0].occupancy, 1001);
    assert!((clusters[0].center.coeffs[0] - 0.3).abs() < 1e-3);
    let ring = circle(&s, 1.0, 1.0, 0.0, 0.01, 1001);
    assert!(omega_limit_estimate(&s, &ring, 0.5, 0.05).unwrap().len() > 10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ell_is_monotone_in_eps(seed in 0u64..1000, p in 0.5f64..3.0) {
        let s = space();
        let q = p * (1.0 + (seed as f64) / 997.0);
        let a = 1.0 / (PI / 2.0).sqrt();
        let traj = orbit(&s, 0.02, 1501, |t| {
            vec![a * (2.0 * PI * t / p).cos(), a * (2.0 * PI * t / q).sin(), 0.1 * a * (t / q).cos()]
        });
        let eps = [0.05, 0.1, 0.2, 0.4, 0.8];
        let rep = epsilon_ell_table(&s, &traj, &eps, &RecurrenceConfig::default()).unwrap();
        for w in rep.eps_ell.windows(2) {
            prop_assert!(w[1].ell <= w[0].ell);
            prop_assert!(w[1].witnesses >= w[0].witnesses);
        }
    }

    #[test]
    fn separation_is_symmetric(ph in 0.0f64..6.0, r in 0.1f64..2.0) {
        let s = space();
        let c1 = circle(&s, 1.3, 1.0, 0.0, 0.02, 801);
        let c2 = circle(&s, 1.3, r, ph, 0.02, 801);
        let ab = separation(&s, &c1, &c2, 1.0, None).unwrap();
        let ba = separation(&s, &c2, &c1, 1.0, None).unwrap();
        prop_assert!((ab.min_shift_distance - ba.min_shift_distance).abs() <= 1e-12);
    }
}
