//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//! Runs with `cargo test --test acceptance`; checks run concurrently.

use std::f64::consts::{PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use msh_core::bounds::{compute_r0, verify_absorbing, verify_energy_inequality, AprioriConstants, OmegaConvention};
use msh_core::dynamics::{duhamel_residual, integrate, IntegratorConfig, ModelSpec};
use msh_core::experiments::{inventory, three_orbit_study, two_orbit_study, StudyConfig, StudyReport};
use msh_core::forcing::{bebutov_distance, BebutovConfig, ForcingComponent, ForcingModel};
use msh_core::gradient::{
    default_seeds, dissipation, equilibrium_identity, find_equilibria, lambda_zero, morse_index_zero, NewtonConfig,
};
use msh_core::recurrence::Verdict;
use msh_core::spectral::{DomainSpec, SpectralSpace};
use msh_core::{Field, Forcing, Model, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn space(n: usize) -> Space {
    SpectralSpace::new(DomainSpec::interval_pi(n).unwrap()).unwrap()
}

fn unit(s: &Space, k: usize) -> Field {
    let u = s.mode(&[k], 1.0).unwrap();
    u.scaled(1.0 / s.l2_norm(&u))
}

fn two_freq(s: &Space, amps: (f64, f64)) -> Forcing {
    ForcingModel::quasiperiodic(
        vec![
            ForcingComponent { amplitude: amps.0, frequency: 1.0, phase: 0.0, profile: unit(s, 1) },
            ForcingComponent { amplitude: amps.1, frequency: SQRT_2, phase: 0.0, profile: unit(s, 2) },
        ],
        s.shape(),
    )
    .unwrap()
}

fn run_cfg(dt: f64, t_end: f64, record_every: usize) -> IntegratorConfig<f64> {
    IntegratorConfig { dt, t_end, record_every, ..Default::default() }
}

fn ladder() -> Check {
    let s = space(64);
    let spec = s.spectrum();
    ensure!(spec.mu.len() == 64, "expected 64 distinct eigenvalues, got {}", spec.mu.len());
    for a in [0.0, 0.5, 2.0, -3.25] {
        let m = ModelSpec::swift_hohenberg(a, 0.0);
        for (i, &mu) in spec.mu.iter().enumerate() {
            let k = (i + 1) as f64;
            ensure!(mu == k * k && spec.multiplicity[i] == 1, "mu_{} = {mu}", i + 1);
            let want = k.powi(4) - 2.0 * k * k + a;
            ensure!(m.lambda(mu) == want, "lambda_{} at a = {a}: {} vs {want}", i + 1, m.lambda(mu));
        }
    }
    ensure!(lambda_zero(spec) == -1.0, "lambda_0 = {}", lambda_zero(spec));
    let r = |a: f64, sp: &msh_core::spectral::OperatorSpectrum<f64>| morse_index_zero(&ModelSpec::swift_hohenberg(a, 0.0), sp).r;
    ensure!(r(0.0, spec) == 1 && r(2.0, spec) == 0, "r(0) = {}, r(2) = {}", r(0.0, spec), r(2.0, spec));
    let sq = SpectralSpace::new(DomainSpec::rectangle(PI, PI, 8, 8).unwrap()).unwrap();
    let sp2 = sq.spectrum();
    let i5 = sp2.mu.iter().position(|&m| m == 5.0).ok_or("mu = 5 missing in 2-D")?;
    ensure!(sp2.multiplicity[i5] == 2, "multiplicity at mu = 5 is {}", sp2.multiplicity[i5]);
    // a = -16: lambda(2) = -16, lambda(5) = -1 (twice), lambda(8) = 32
    ensure!(r(-16.0, sp2) == 3, "2-D r(-16) = {}", r(-16.0, sp2));
    Ok("k <= 64 exact, lambda_0 = -1, r = 1 at a = 0, r = 0 at a = 2, 2-D mu = 5 counted twice".into())
}

fn parseval() -> Check {
    let mut worst: f64 = 0.0;
    for (n, l) in [(16, PI), (64, 2.0), (128, PI), (256, 2.0 * PI)] {
        let s = SpectralSpace::new(DomainSpec::interval(l, n).unwrap()).unwrap();
        for seed in 0..5 {
            let u = s.random_smooth(&mut ChaCha8Rng::seed_from_u64(seed), 1.0);
            let g = s.to_grid(&u).unwrap();
            let back = s.to_coeff(&g).unwrap();
            let scale = u.max_abs_coeff();
            let err = u.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
            let norm = s.l2_norm(&u);
            let perr = (s.grid_l2_norm(&g) - norm).abs() / norm;
            worst = worst.max(err).max(perr);
        }
    }
    ensure!(worst <= 1e-12, "round-trip/Parseval relative error {worst:e}");
    let s = space(128);
    let nb = s.norms(&s.mode(&[1], 1.0).unwrap());
    let (e2, e4) = ((nb.l2 * nb.l2 - PI / 2.0).abs(), (nb.l4.powi(4) - 3.0 * PI / 8.0).abs());
    ensure!(e2 <= 1e-10 && e4 <= 1e-10, "sin norms off by {e2:e}, {e4:e}");
    Ok(format!("worst relative error {worst:.2e}, sin(x) norms within {:.1e}", e2.max(e4)))
}

fn duhamel() -> Check {
    let s = space(128);
    let g = ForcingModel::zero(s.shape());
    let m = ModelSpec::swift_hohenberg(0.5, 0.0);
    let mut u = s.zeros();
    u.coeffs[0] = 0.5;
    u.coeffs[1] = -0.2;
    u.coeffs[2] = 0.1;
    let relaxed = integrate(&s, m, &g, &u, 0.0, &run_cfg(1e-4, 1.0, 10_000)).map_err(|e| e.to_string())?;
    let u0 = relaxed.last_state().unwrap().clone();
    let res: Vec<f64> = [1usize, 2, 4]
        .par_iter()
        .map(|&k| {
            let dt = 1.0 / (96.0 * k as f64);
            let tr = integrate(&s, m, &g, &u0, 0.0, &run_cfg(dt, 2.0, 1)).unwrap();
            duhamel_residual(&s, &tr, &g, m, 96 * k).unwrap()
        })
        .collect();
    let ratios = [res[0] / res[1], res[1] / res[2]];
    for r in ratios {
        ensure!((12.8..=19.2).contains(&r), "residuals {res:?}, ratios {ratios:?}");
    }
    Ok(format!("ratios {:.2}, {:.2} for dt 1/96 -> 1/192 -> 1/384", ratios[0], ratios[1]))
}

fn gradient_structure() -> Check {
    let s = space(64);
    let m = ModelSpec::swift_hohenberg(0.5, 0.0);
    let g = ForcingModel::zero(s.shape());
    let cfg = run_cfg(1e-4, 0.5, 1);
    let out: Vec<Result<(f64, f64), String>> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let u0 = s.random_smooth(&mut ChaCha8Rng::seed_from_u64(100 + seed), 0.8);
            let tr = integrate(&s, m, &g, &u0, 0.0, &cfg).map_err(|e| e.to_string())?;
            let rise = tr.diagnostics.windows(2).map(|w| w[1].v - w[0].v).fold(f64::NEG_INFINITY, f64::max);
            let mut slope_err: f64 = 0.0;
            for i in [500, 1000, 2500, 4000, 4900] {
                let slope = (tr.diagnostics[i + 1].v - tr.diagnostics[i - 1].v) / 2e-4;
                let d = dissipation(&s, &m, &tr.states[i]).map_err(|e| e.to_string())?;
                slope_err = slope_err.max((slope - d).abs());
            }
            Ok((rise, slope_err))
        })
        .collect();
    let (mut rise, mut slope) = (f64::NEG_INFINITY, 0.0f64);
    for r in out {
        let (a, b) = r?;
        rise = rise.max(a);
        slope = slope.max(b);
    }
    ensure!(rise <= 1e-8, "V increased by {rise:e}");
    ensure!(slope <= 1e-4, "FD slope error {slope:e}");
    Ok(format!("20 trajectories, max V step {rise:.1e}, max slope error {slope:.1e}"))
}

fn equilibrium_identity_check() -> Check {
    let s = space(128);
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for a in [0.5, -3.0] {
        let m = ModelSpec::swift_hohenberg(a, 0.0);
        let seeds = default_seeds(&s, &m, 8, 3);
        let found = find_equilibria(&s, &m, &seeds, &NewtonConfig::default()).map_err(|e| e.to_string())?;
        for e in &found.equilibria {
            let d = equilibrium_identity(&s, &m, &e.state).map_err(|e| e.to_string())?;
            worst = worst.max(d);
            let mirror = e.state.neg();
            let partner = found
                .equilibria
                .iter()
                .find(|f| s.l2_distance(&f.state, &mirror) < 1e-9)
                .ok_or_else(|| format!("no mirror for an equilibrium at a = {a} with V = {}", e.v))?;
            ensure!((partner.v - e.v).abs() <= 1e-12, "mirror V differs at a = {a}");
            ensure!(partner.unstable_dim == e.unstable_dim, "mirror index differs at a = {a}");
            count += 1;
        }
    }
    ensure!(count >= 6, "only {count} equilibria found");
    ensure!(worst <= 1e-8, "identity defect {worst:e}");
    Ok(format!("{count} equilibria, worst defect {worst:.1e}, all mirrored"))
}

/// Golden-section maximization after a coarse scan.
fn numeric_sup(a: f64, bt: f64, c: f64) -> f64 {
    let f = |s: f64| (11.0 - 2.0 * a) * s - 0.5 * (4.0 - bt * bt) * s * s / c;
    let n = 100_000;
    let (mut best, mut arg) = (f(0.0), 0.0);
    for i in 1..=n {
        let x = 1e3 * i as f64 / n as f64;
        if f(x) > best {
            best = f(x);
            arg = x;
        }
    }
    let (mut lo, mut hi) = ((arg - 1e-2).max(0.0), (arg + 1e-2).min(1e3));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - r * (hi - lo);
        let x2 = lo + r * (hi - lo);
        if f(x1) < f(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    f(0.5 * (lo + hi)).max(f(0.0))
}

fn constants_for(s: &Space, m: &Model, g: &Forcing) -> AprioriConstants<f64> {
    let bt = if m.b == 0.0 { 1e-6 } else { m.b.abs() };
    let sup = g.sup_bound(s, None).bound;
    compute_r0(m.a, bt, sup, s.measure(), OmegaConvention::CauchySchwarz).unwrap()
}

fn absorbing_bounds() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut worst_rel: f64 = 0.0;
    for _ in 0..200 {
        let (a, bt, om) = (rng.random_range(-10.0..6.0), rng.random_range(0.01..1.99), rng.random_range(0.5..4.0));
        let c = compute_r0(a, bt, 0.0, om, OmegaConvention::CauchySchwarz).map_err(|e| e.to_string())?;
        let num = numeric_sup(a, bt, om);
        let rel = (c.breakdown.polynomial_term - num).abs() / num.abs().max(1e-300);
        if num > 0.0 {
            worst_rel = worst_rel.max(rel);
        } else {
            ensure!(c.breakdown.polynomial_term == 0.0, "a = {a}: closed form {} vs 0", c.breakdown.polynomial_term);
        }
    }
    ensure!(worst_rel <= 1e-9, "closed form vs numeric sup: relative {worst_rel:e}");

    // the shipped scenarios, same parameters as scenarios/*.toml
    struct Case {
        name: &'static str,
        n: usize,
        model: Model,
        amps: Option<(f64, f64)>,
        dt: f64,
        t_end: f64,
        every: usize,
    }
    let sh = ModelSpec::swift_hohenberg;
    let cases = [
        Case { name: "zero", n: 32, model: sh(0.5, 0.0), amps: None, dt: 0.01, t_end: 10.0, every: 10 },
        Case { name: "decay", n: 128, model: sh(6.0, 0.0), amps: None, dt: 1e-3, t_end: 20.0, every: 10 },
        Case { name: "desk_forced", n: 128, model: sh(0.5, 0.05), amps: Some((0.06, 0.04)), dt: 5e-3, t_end: 200.0, every: 2 },
        Case { name: "reentry", n: 128, model: sh(0.5, 0.05), amps: Some((0.06, 0.04)), dt: 2.5e-4, t_end: 6.0, every: 4 },
    ];
    let results: Vec<Result<Vec<String>, String>> = cases
        .par_iter()
        .map(|c| {
            let s = space(c.n);
            let g = c.amps.map_or_else(|| ForcingModel::zero(s.shape()), |a| two_freq(&s, a));
            let k = constants_for(&s, &c.model, &g);
            let seeds: Vec<(String, Field)> = match c.name {
                "zero" => vec![("zero".into(), s.zeros())],
                "decay" => vec![("random:1".into(), s.random_smooth(&mut ChaCha8Rng::seed_from_u64(1), 1.0))],
                "desk_forced" => {
                    let eq = inventory(&s, &c.model, &StudyConfig::default()).map_err(|e| e.to_string())?;
                    vec![
                        ("random:11".into(), s.random_smooth(&mut ChaCha8Rng::seed_from_u64(11), 0.5)),
                        ("equilibrium:0".into(), eq.equilibria[0].state.clone()),
                    ]
                }
                _ => {
                    let u = s.mode(&[1], 25.1).unwrap();
                    if s.l2_norm(&u) < 5.0 * k.r0 {
                        return Err(format!("re-entry seed {} below 5 R0 = {}", s.l2_norm(&u), 5.0 * k.r0));
                    }
                    vec![("5R0".into(), u)]
                }
            };
            let mut lines = Vec::new();
            for (label, u0) in seeds {
                let tr = integrate(&s, c.model, &g, &u0, 0.0, &run_cfg(c.dt, c.t_end, c.every)).map_err(|e| e.to_string())?;
                let e = verify_energy_inequality(&s, &tr, &c.model, &g, &k);
                let v = verify_absorbing(&s, &tr, &c.model, &g, &k);
                for rep in [&e, &v] {
                    if !(rep.applicable && rep.max_violation <= 10.0 * c.dt) {
                        return Err(format!("{}/{label} {}: {rep:?}", c.name, rep.inequality));
                    }
                }
                if c.name == "reentry" {
                    let t = v.entry_time.ok_or("re-entry run never entered the ball")?;
                    if t >= 25f64.ln() {
                        return Err(format!("entry at t = {t}"));
                    }
                }
                lines.push(format!("{}/{label} {:.1e}/{:.1e}", c.name, e.max_violation, v.max_violation));
            }
            Ok(lines)
        })
        .collect();
    let mut lines = Vec::new();
    for r in results {
        lines.extend(r?);
    }
    Ok(format!("R0 relative error {worst_rel:.1e}; violations {}", lines.join(", ")))
}

fn study_summary(rep: &StudyReport<f64>, cfg: &StudyConfig<f64>) -> Check {
    let cap = cfg.horizon / 20.0;
    for r in &rep.runs {
        ensure!(
            r.recurrence.verdict == Verdict::RecurrentEvidence,
            "{}: verdict {} ({:?})",
            r.label,
            r.recurrence.verdict,
            r.recurrence.eps_ell
        );
        for e in &r.recurrence.eps_ell {
            ensure!(e.ell <= cap, "{}: ell({}) = {} > {cap}", r.label, e.eps, e.ell);
        }
        ensure!(r.recurrence.horizon + cfg.burn_in >= cfg.horizon - 1e-9, "{}: short horizon", r.label);
    }
    let need = cfg.separation_fraction * rep.u0_norm;
    for s in &rep.separations {
        ensure!(s.min_shift_distance >= need, "{:?}: separation {} < {need}", s.pair, s.min_shift_distance);
    }
    ensure!(rep.verdict, "study verdict is no");
    let seps: Vec<String> = rep.separations.iter().map(|s| format!("{:.3}", s.min_shift_distance)).collect();
    Ok(format!("{} runs recurrent, separations [{}] >= {need:.3}", rep.runs.len(), seps.join(", ")))
}

fn theorem41() -> Check {
    let s = space(128);
    let g = two_freq(&s, (0.03, 0.02));
    let sup = g.sup_bound(&s, None).bound;
    ensure!((sup - 0.05).abs() < 1e-12, "forcing bound {sup}");
    let cfg = StudyConfig::default();
    ensure!(cfg.horizon == 500.0 && cfg.eps == vec![0.1, 0.05], "unexpected study defaults");
    let rep = two_orbit_study(&s, &ModelSpec::swift_hohenberg(0.5, 0.05), &g, &cfg).map_err(|e| e.to_string())?;
    study_summary(&rep, &cfg)
}

fn chafee() -> Check {
    let s = space(128);
    let g = two_freq(&s, (0.006, 0.004));
    let cfg = StudyConfig::default();
    let rep = three_orbit_study(&s, &ModelSpec::chafee_infante(2.0), &g, &cfg).map_err(|e| e.to_string())?;
    ensure!(rep.separations.len() == 3, "{} separations", rep.separations.len());
    study_summary(&rep, &cfg)
}

fn random_forcing(s: &Space, rng: &mut ChaCha8Rng) -> Forcing {
    let n = rng.random_range(1..=3);
    let comps = (0..n)
        .map(|i| ForcingComponent {
            amplitude: rng.random_range(-1.0..1.0),
            // distinct, rationally related frequencies keep the model periodic
            frequency: (i + 1) as f64 * rng.random_range(1..=3) as f64 * 0.5,
            phase: rng.random_range(0.0..2.0 * PI),
            profile: unit(s, rng.random_range(1..=4)),
        })
        .collect();
    ForcingModel::periodic(comps, s.shape()).unwrap().shift(rng.random_range(-5.0..5.0))
}

fn bebutov() -> Check {
    let s = space(16);
    let cfg = BebutovConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_tri: f64 = f64::NEG_INFINITY;
    for i in 0..100 {
        let (f, g, h) = (random_forcing(&s, &mut rng), random_forcing(&s, &mut rng), random_forcing(&s, &mut rng));
        let d = |x: &Forcing, y: &Forcing| bebutov_distance(&s, x, y, cfg);
        let (fg, gf, fh, hg) = (d(&f, &g), d(&g, &f), d(&f, &h), d(&h, &g));
        ensure!(d(&f, &f) == 0.0, "pair {i}: rho(f, f) = {}", d(&f, &f));
        ensure!((0.0..1.0).contains(&fg), "pair {i}: rho = {fg}");
        ensure!(fg > 0.0 || f == g, "pair {i}: distinct models at distance 0");
        ensure!((fg - gf).abs() <= 1e-15, "pair {i}: asymmetric {fg} vs {gf}");
        worst_tri = worst_tri.max(fg - fh - hg);
        ensure!(fg <= fh + hg + 1e-14, "pair {i}: triangle {fg} > {fh} + {hg}");
    }
    let zero = ForcingModel::zero(s.shape());
    let c = ForcingModel::periodic(
        vec![ForcingComponent { amplitude: 1.0, frequency: 0.0, phase: 0.0, profile: unit(&s, 3) }],
        s.shape(),
    )
    .unwrap();
    let expected: f64 = (1..=20).map(|n| 0.5f64.powi(n) / 2.0).sum();
    let off = (bebutov_distance(&s, &zero, &c, cfg) - expected).abs();
    ensure!(off <= 1e-6, "constant offset off by {off:e}");

    // shift continuity: largest tau0 with rho(theta_tau g, g) <= 0.1 on [0, tau0]
    let g = two_freq(&s, (0.6, 0.4));
    let rho = |tau: f64| bebutov_distance(&s, &g.shift(tau), &g, cfg);
    let (mut lo, mut hi) = (0.0, 1.0);
    ensure!(rho(hi) > 0.1, "rho(theta_1 g, g) = {} already small", rho(hi));
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if rho(mid) <= 0.1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau0 = lo;
    ensure!(tau0 > 0.0, "bisection collapsed to 0");
    for j in 0..=200 {
        let tau = tau0 * j as f64 / 200.0;
        for t in [tau, -tau] {
            ensure!(rho(t) <= 0.1 + 1e-12, "rho(theta_{t} g, g) = {}", rho(t));
        }
    }
    ensure!(rho(1e-8) < 1e-6, "no continuity at 0: {}", rho(1e-8));
    Ok(format!("100 triples ok (smallest triangle slack {:.1e}), offset error {off:.1e}, tau0 = {tau0:.4}", -worst_tri))
}

fn main() {
    let checks: [Criterion; 9] = [
        ("eigenvalue ladder and Morse index of 0", ladder),
        ("transform round-trip and Parseval", parseval),
        ("mild-solution consistency (ETDRK4 order)", duhamel),
        ("gradient structure of V", gradient_structure),
        ("equilibrium identity and symmetry", equilibrium_identity_check),
        ("absorbing bounds on shipped scenarios", absorbing_bounds),
        ("two recurrent orbits (Swift-Hohenberg, a = 0.5)", theorem41),
        ("three recurrent orbits (Chafee-Infante, a = 2)", chafee),
        ("Bebutov metric", bebutov),
    ];
    // optional name filters, as in `cargo test --test acceptance -- bebutov`
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let checks: Vec<_> = checks
        .into_iter()
        .filter(|(name, _)| filters.is_empty() || filters.iter().any(|f| name.to_lowercase().contains(&f.to_lowercase())))
        .collect();
    let outcomes: Vec<(Check, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = checks
            .iter()
            .map(|&(_, f)| {
                scope.spawn(move || {
                    let t = Instant::now();
                    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
                        let msg = p
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_default();
                        Err(format!("panicked: {msg}"))
                    });
                    (r, t.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut failed = 0;
    for ((name, _), (res, secs)) in checks.iter().zip(outcomes) {
        match res {
            Ok(msg) => println!("PASS  {name} [{secs:.1}s]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1}s]: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
