use std::f64::consts::PI;

use msh_core::dynamics::{integrate, IntegratorConfig, ModelSpec};
use msh_core::forcing::ForcingModel;
use msh_core::gradient::{
    default_seeds, dissipation, equilibrium_identity, find_equilibria, jacobian, lyapunov,
    lyapunov_lower_bound, morse_decomposition, morse_index_zero, stationary_residual, MorseConfig,
    NewtonConfig,
};
use msh_core::spectral::{DomainSpec, SpectralField, SpectralSpace};
use msh_core::Space;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space(n: usize) -> Space {
    SpectralSpace::new(DomainSpec::interval_pi(n).unwrap()).unwrap()
}

fn random(s: &Space, seed: u64, scale: f64) -> SpectralField<f64> {
    s.random_smooth(&mut ChaCha8Rng::seed_from_u64(seed), scale)
}

#[test]
fn equilibria_at_half() {
    let s = space(32);
    let m = ModelSpec::swift_hohenberg(0.5, 0.0);
    let seeds = default_seeds(&s, &m, 6, 1);
    // 1-mode Galerkin seed: c² = 4/3 · 0.5
    assert!((seeds[1].coeffs[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    let found = find_equilibria(&s, &m, &seeds, &NewtonConfig::default()).unwrap();
    let eqs = &found.equilibria;
    assert!(eqs.iter().any(|e| e.state.is_zero() && e.residual == 0.0 && e.unstable_dim == 1));
    let nontrivial: Vec<_> = eqs.iter().filter(|e| !e.state.is_zero()).collect();
    assert!(nontrivial.len() >= 2);
    for e in &eqs[..] {
        assert!(e.residual <= 1e-10);
        assert!(equilibrium_identity(&s, &m, &e.state).unwrap() <= 1e-8 * (1.0 + e.v.abs()));
        assert!(e.v <= 1e-12);
        assert!(dissipation(&s, &m, &e.state).unwrap().abs() <= 1e-20);
        // ± symmetry
        let mirror = e.state.neg();
        let partner = eqs.iter().find(|f| s.l2_distance(&f.state, &mirror) < 1e-9).expect("mirror root");
        assert!((partner.v - e.v).abs() < 1e-12);
        assert_eq!(partner.unstable_dim, e.unstable_dim);
        for (x, y) in partner.spectrum.iter().zip(&e.spectrum) {
            assert!((x.re - y.re).abs() < 1e-8 * (1.0 + x.re.abs()));
        }
    }
    // the minimizers ±u₀ sit near the 1-mode prediction and are stable
    let u0 = &eqs[0];
    assert_eq!(u0.unstable_dim, 0);
    assert!(u0.v < 0.0);
    let n = s.l2_norm(&u0.state);
    assert!((n - (2.0f64 / 3.0).sqrt() * (PI / 2.0).sqrt()).abs() < 0.02, "{n}");
}

#[test]
fn identity_defect_grows_under_perturbation() {
    let s = space(32);
    let m = ModelSpec::swift_hohenberg(0.5, 0.0);
    let eqs = find_equilibria(&s, &m, &default_seeds(&s, &m, 0, 0), &NewtonConfig::default()).unwrap();
    let e = &eqs.equilibria[0].state;
    let dir = random(&s, 3, 1.0);
    let dir = dir.scaled(1.0 / s.l2_norm(&dir));
    let d1 = equilibrium_identity(&s, &m, &e.axpy(1e-2, &dir)).unwrap();
    let d2 = equilibrium_identity(&s, &m, &e.axpy(5e-3, &dir)).unwrap();
    assert!(d1 > 1e-4 && d1 < 1e-2, "{d1}");
    // V is critical at e but ¼∫u⁴ is not: the defect V + ¼∫u⁴ moves at
    // first order, with slope ∫e³δ.
    let slope: f64 = {
        let cube = s.cubic(e).unwrap();
        s.l2_inner(&cube, &dir)
    };
    let d_small = equilibrium_identity(&s, &m, &e.axpy(1e-4, &dir)).unwrap();
    assert!((d_small - 1e-4 * slope.abs()).abs() < 0.01 * d_small, "{d_small} vs {}", 1e-4 * slope.abs());
    assert!((d1 / d2 - 2.0).abs() < 0.2, "{}", d1 / d2);
    assert!(equilibrium_identity(&s, &ModelSpec::swift_hohenberg(0.5, 0.1), e).is_err());
}

#[test]
fn jacobian_matches_finite_differences() {
    let s = space(16);
    for b in [0.0, 0.3] {
        let m = ModelSpec::swift_hohenberg(0.5, b);
        let u = random(&s, 8, 0.8);
        let jac = jacobian(&s, &m, &u).unwrap();
        for seed in 0..5 {
            let v = random(&s, 100 + seed, 1.0);
            let jv: Vec<f64> = (0..16).map(|i| (0..16).map(|j| jac[i * 16 + j] * v.coeffs[j]).sum()).collect();
            let h = 1e-6;
            let fp = stationary_residual(&s, &m, &u.axpy(h, &v)).unwrap();
            let fm = stationary_residual(&s, &m, &u.axpy(-h, &v)).unwrap();
            let fd: Vec<f64> = fp.coeffs.iter().zip(&fm.coeffs).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let num: f64 = fd.iter().zip(&jv).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = jv.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(num <= 1e-6 * den, "b={b}: {num} vs {den}");
        }
    }
}

#[test]
fn lyapunov_lower_bound_holds() {
    let s = space(32);
    for a in [-1.0, 0.0, 0.5, 3.0] {
        let m = ModelSpec::swift_hohenberg(a, 0.0);
        for seed in 0..20 {
            let u = random(&s, seed, 0.2 + seed as f64 * 0.1);
            assert!(lyapunov(&s, &m, &u) >= lyapunov_lower_bound(&s, &m, &u) - 1e-12);
        }
    }
}

#[test]
fn v_decreases_and_matches_dissipation() {
    let s = space(32);
    let m = ModelSpec::swift_hohenberg(0.5, 0.0);
    let g = ForcingModel::zero(s.shape());
    let cfg = IntegratorConfig { dt: 1e-4, t_end: 0.5, record_every: 1, ..Default::default() };
    for seed in 0..3 {
        let tr = integrate(&s, m, &g, &random(&s, seed, 0.8), 0.0, &cfg).unwrap();
        for w in tr.diagnostics.windows(2) {
            assert!(w[1].v <= w[0].v + 1e-8 * (1.0 + w[0].v.abs()));
        }
        for i in [1000, 2500, 4000] {
            let slope = (tr.diagnostics[i + 1].v - tr.diagnostics[i - 1].v) / 2e-4;
            let d = dissipation(&s, &m, &tr.states[i]).unwrap();
            assert!((slope - d).abs() <= 1e-4, "{slope} vs {d}");
        }
    }
}

#[test]
fn forward_run_lands_on_newton_root() {
    let s = space(32);
    let m = ModelSpec::swift_hohenberg(0.5, 0.0);
    let g = ForcingModel::zero(s.shape());
    let cfg = IntegratorConfig { dt: 5e-3, t_end: 80.0, record_every: 1000, ..Default::default() };
    let tr = integrate(&s, m, &g, &s.mode(&[1], 1e-3).unwrap(), 0.0, &cfg).unwrap();
    let eqs = find_equilibria(&s, &m, &default_seeds(&s, &m, 0, 0), &NewtonConfig::default()).unwrap();
    let d = eqs
        .equilibria
        .iter()
        .map(|e| s.l2_distance(&e.state, tr.last_state().unwrap()))
        .fold(f64::INFINITY, f64::min);
    assert!(d < 1e-6, "{d}");
    assert!(tr.last_state().unwrap().coeffs[0] > 0.0);
}

#[test]
fn morse_decomposition_cases() {
    let s = space(16);
    let cfg = MorseConfig {
        sample_count: 6,
        integrator: IntegratorConfig { dt: 5e-3, t_end: 60.0, record_every: 200, ..Default::default() },
        ..Default::default()
    };
    let m = ModelSpec::swift_hohenberg(0.5, 0.0);
    let r = morse_decomposition(&s, &m, &cfg).unwrap();
    assert_eq!(r.r_zero, 1);
    assert!(r.k0_members.len() >= 2);
    assert!(r.k0_members.iter().all(|&i| r.equilibria[i].v < 0.0));
    let z = r.zero_index.unwrap();
    assert!(!r.k0_members.contains(&z));
    assert_eq!(r.connections.len(), 2);
    assert!(r.connections.iter().all(|c| c.from == z && r.k0_members.contains(&c.to)));
    assert_ne!(r.connections[0].to, r.connections[1].to);
    assert!(r.ordered);
    assert_eq!(r.unclassified, 0);

    let trivial = morse_decomposition(&s, &ModelSpec::swift_hohenberg(2.0, 0.0), &cfg).unwrap();
    assert_eq!(trivial.equilibria.len(), 1);
    assert!(trivial.k0_members.is_empty());
    assert_eq!(trivial.r_zero, 0);
    assert!(trivial.connections.is_empty());
    assert!(trivial.classifications.iter().all(|c| *c == trivial.zero_index));
}

proptest! {
    #[test]
    fn index_is_monotone_in_a(a1 in -50.0f64..50.0, da in 0.0f64..20.0) {
        let s = SpectralSpace::new(DomainSpec::rectangle(PI, 2.0, 8, 8).unwrap()).unwrap();
        let r1 = morse_index_zero(&ModelSpec::swift_hohenberg(a1, 0.0), s.spectrum()).r;
        let r2 = morse_index_zero(&ModelSpec::swift_hohenberg(a1 + da, 0.0), s.spectrum()).r;
        prop_assert!(r2 <= r1);
    }
}
