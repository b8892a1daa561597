//! Autonomous structure: the Lyapunov function
//! `V(u) = ½(Λu, u) + ¼∫u⁴`, equilibria by damped Newton, linearized spectra,
//! the Morse index of 0 and the decomposition `{K₀, {0}}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, IntegratorConfig, ModelSpec, Trajectory};
use crate::error::{AnalysisError, SpectralError};
use crate::forcing::ForcingModel;
use crate::linalg::{eigenvalues, lu_solve};
use crate::scalar::Scalar;
use crate::spectral::{OperatorSpectrum, SpectralField, SpectralSpace};

/// Eigenvalues within this distance of 0 are marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

/// `V(u) = ½ Σ λ_k ‖c_k e_k‖² + ¼∫u⁴`.
pub fn lyapunov<T: Scalar>(space: &SpectralSpace<T>, model: &ModelSpec<T>, u: &SpectralField<T>) -> T {
    let quad: T = u
        .coeffs
        .iter()
        .zip(space.mode_mu())
        .map(|(&c, &mu)| model.lambda(mu) * c * c)
        .sum();
    T::lit(0.5) * unit_weight(space) * quad + T::lit(0.25) * space.integral_u4(u)
}

fn unit_weight<T: Scalar>(space: &SpectralSpace<T>) -> T {
    space.measure() / T::from_usize_lossy(1 << space.shape().rank)
}

/// `λ₀ = min_k (μ_k² − 2μ_k)` over the retained modes.
pub fn lambda_zero<T: Scalar>(spectrum: &OperatorSpectrum<T>) -> T {
    spectrum
        .mu
        .iter()
        .map(|&mu| mu * mu - T::lit(2.0) * mu)
        .fold(T::infinity(), T::min)
}

/// Right-hand side of `V(u) ≥ ¼∫(u² + λ₀ + a)² − (|Ω|/4)(λ₀ + a)²`
/// (Swift–Hohenberg models).
pub fn lyapunov_lower_bound<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    u: &SpectralField<T>,
) -> T {
    let s = lambda_zero(space.spectrum()) + model.a;
    let quarter = T::lit(0.25);
    // ∫(u² + s)² = ∫u⁴ + 2s‖u‖² + s²|Ω|
    let m = space.measure();
    quarter * (space.integral_u4(u) + T::lit(2.0) * s * space.l2_norm_sq(u) + s * s * m)
        - quarter * m * s * s
}

/// `Λu + Q(u)`, the stationary residual (Q includes `b|∇u|²`).
pub fn stationary_residual<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    u: &SpectralField<T>,
) -> Result<SpectralField<T>, SpectralError> {
    let q = space.polynomial_terms(u, model.gradient_coefficient())?;
    Ok(space.diagonal(u, |mu| model.lambda(mu)).add(&q))
}

/// `−‖Λu + Pu³‖²`, the time derivative of V along solutions when the
/// gradient term is absent.
pub fn dissipation<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    u: &SpectralField<T>,
) -> Result<T, SpectralError> {
    let r = space.diagonal(u, |mu| model.lambda(mu)).add(&space.cubic(u)?);
    Ok(-space.l2_norm_sq(&r))
}

/// Dense Jacobian of the stationary residual, row-major.
pub fn jacobian<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    u: &SpectralField<T>,
) -> Result<Vec<T>, SpectralError> {
    let n = u.len();
    let b = model.gradient_coefficient();
    let lambda = model.lambda_modes(space.mode_mu());
    let columns: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = SpectralField::zeros(u.shape);
            e.coeffs[j] = T::one();
            space.polynomial_jvp(u, &e, b).map(|c| c.coeffs)
        })
        .collect::<Result<_, _>>()?;
    let mut jac = vec![T::zero(); n * n];
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            jac[i * n + j] = v;
        }
        jac[j * n + j] = jac[j * n + j] + lambda[j];
    }
    Ok(jac)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonConfig<T> {
    pub tol: T,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl<T: Scalar> Default for NewtonConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 50,
            max_halvings: 20,
        }
    }
}

/// One eigenvalue of the linearization with its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T> {
    pub state: SpectralField<T>,
    /// ‖Λu + Q(u)‖ at the root.
    pub residual: T,
    #[serde(rename = "V")]
    pub v: T,
    /// Eigenvalues of `Λ + DQ(u)`, ascending by real part.
    pub spectrum: Vec<SpectrumEntry>,
    /// Multiplicity-weighted count of eigenvalues with Re < −MARGINAL_TOL.
    pub unstable_dim: usize,
    pub marginal_dim: usize,
    /// Index of the first seed that converged here.
    pub seed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub seed: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSearch<T> {
    pub equilibria: Vec<Equilibrium<T>>,
    pub failed: Vec<SeedFailure>,
}

/// Damped Newton from `seed`; returns the root or a reason.
pub fn newton<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    seed: &SpectralField<T>,
    cfg: &NewtonConfig<T>,
) -> Result<SpectralField<T>, String> {
    let n = seed.len();
    let mut u = seed.clone();
    let mut f = stationary_residual(space, model, &u).map_err(|e| e.to_string())?;
    let mut fnorm = space.l2_norm(&f);
    for _ in 0..cfg.max_iter {
        if fnorm <= cfg.tol {
            return Ok(u);
        }
        let jac = jacobian(space, model, &u).map_err(|e| e.to_string())?;
        let rhs: Vec<T> = f.coeffs.iter().map(|&x| -x).collect();
        let delta = lu_solve(jac, rhs, n).ok_or_else(|| "singular Jacobian".to_string())?;
        let delta = SpectralField {
            coeffs: delta,
            shape: u.shape,
        };
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..=cfg.max_halvings {
            let trial = u.axpy(alpha, &delta);
            if let Ok(ft) = stationary_residual(space, model, &trial) {
                let tn = space.l2_norm(&ft);
                if tn < fnorm {
                    u = trial;
                    f = ft;
                    fnorm = tn;
                    accepted = true;
                    break;
                }
            }
            alpha = alpha * T::lit(0.5);
        }
        if !accepted {
            // Stagnation at round-off level still counts as converged.
            return if fnorm <= cfg.tol {
                Ok(u)
            } else {
                Err(format!("line search failed at residual {fnorm}"))
            };
        }
    }
    if fnorm <= cfg.tol {
        Ok(u)
    } else {
        Err(format!("no convergence after {} iterations (residual {fnorm})", cfg.max_iter))
    }
}

/// Eigenvalues of the linearization grouped by multiplicity.
pub fn linearized_spectrum<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    u: &SpectralField<T>,
) -> Result<Vec<SpectrumEntry>, SpectralError> {
    let n = u.len();
    let jac = jacobian(space, model, u)?;
    let symmetric = model.gradient_coefficient().is_zero();
    let ev = eigenvalues(&jac, n, symmetric);
    let mut out: Vec<SpectrumEntry> = Vec::new();
    for (re, im) in ev {
        let scale = 1.0f64.max(re.abs());
        match out.last_mut() {
            Some(last) if (last.re - re).abs() <= 1e-8 * scale && (last.im - im).abs() <= 1e-8 * scale => {
                last.multiplicity += 1
            }
            _ => out.push(SpectrumEntry {
                re,
                im,
                multiplicity: 1,
            }),
        }
    }
    Ok(out)
}

fn count_dims(spectrum: &[SpectrumEntry]) -> (usize, usize) {
    let unstable = spectrum
        .iter()
        .filter(|e| e.re < -MARGINAL_TOL)
        .map(|e| e.multiplicity)
        .sum();
    let marginal = spectrum
        .iter()
        .filter(|e| e.re.abs() <= MARGINAL_TOL)
        .map(|e| e.multiplicity)
        .sum();
    (unstable, marginal)
}

/// Solves from every seed (in parallel), deduplicates roots closer than
/// `10·tol` and sorts by (V, first coefficient).
pub fn find_equilibria<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    seeds: &[SpectralField<T>],
    cfg: &NewtonConfig<T>,
) -> Result<EquilibriumSearch<T>, AnalysisError> {
    if seeds.iter().any(|s| !s.is_finite() || s.shape != space.shape()) {
        return Err(AnalysisError::Precondition("seeds must be finite fields of the space".into()));
    }
    let results: Vec<Result<SpectralField<T>, String>> =
        seeds.par_iter().map(|s| newton(space, model, s, cfg)).collect();
    let mut roots: Vec<(usize, SpectralField<T>)> = Vec::new();
    let mut failed = Vec::new();
    let dedup = T::lit(10.0) * cfg.tol;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(u) => {
                if !roots.iter().any(|(_, v)| space.l2_distance(v, &u) < dedup) {
                    roots.push((i, u));
                }
            }
            Err(reason) => failed.push(SeedFailure { seed: i, reason }),
        }
    }
    let mut equilibria = roots
        .into_par_iter()
        .map(|(seed, state)| {
            let spectrum = linearized_spectrum(space, model, &state)?;
            let (unstable_dim, marginal_dim) = count_dims(&spectrum);
            let residual = space.l2_norm(&stationary_residual(space, model, &state)?);
            Ok(Equilibrium {
                v: lyapunov(space, model, &state),
                residual,
                spectrum,
                unstable_dim,
                marginal_dim,
                seed,
                state,
            })
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    equilibria.sort_by(|x, y| {
        x.v.partial_cmp(&y.v)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.state.coeffs[0].partial_cmp(&y.state.coeffs[0]).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(EquilibriumSearch { equilibria, failed })
}

/// Single-mode Galerkin amplitude for mode `index` with `λ < 0`:
/// `λc + γc³ = 0`, `γ = (3/4)^d` the self-projection of `(Π sin)³`.
pub fn single_mode_amplitude<T: Scalar>(lambda: T, dimension: usize) -> Option<T> {
    if lambda < T::zero() {
        let gamma = T::lit(0.75f64.powi(dimension as i32));
        Some((-lambda / gamma).sqrt())
    } else {
        None
    }
}

/// 0, ± single-mode Galerkin amplitudes for every unstable mode, and
/// `random` analytic fields from a ChaCha8 stream seeded with `rng_seed`.
pub fn default_seeds<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    random: usize,
    rng_seed: u64,
) -> Vec<SpectralField<T>> {
    let mut seeds = vec![space.zeros()];
    let d = space.shape().rank;
    for (i, &mu) in space.mode_mu().iter().enumerate() {
        if let Some(c) = single_mode_amplitude(model.lambda(mu), d) {
            for sign in [T::one(), -T::one()] {
                let mut u = space.zeros();
                u.coeffs[i] = sign * c;
                seeds.push(u);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..random {
        seeds.push(space.random_smooth(&mut rng, T::one()));
    }
    seeds
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseIndexZero {
    /// Multiplicity-weighted count of `λ_k < −marginal_tol`.
    pub r: usize,
    /// Multiplicity of `|λ_k| ≤ marginal_tol` (not counted in `r`).
    pub marginal: usize,
}

pub fn morse_index_zero<T: Scalar>(model: &ModelSpec<T>, spectrum: &OperatorSpectrum<T>) -> MorseIndexZero {
    let tol = T::lit(MARGINAL_TOL);
    let mut out = MorseIndexZero { r: 0, marginal: 0 };
    for (&mu, &m) in spectrum.mu.iter().zip(&spectrum.multiplicity) {
        let l = model.lambda(mu);
        if num_traits::Float::abs(l) <= tol {
            out.marginal += m;
        } else if l < T::zero() {
            out.r += m;
        }
    }
    out
}

/// `|V(e) + ¼∫e⁴|`; only an identity without the gradient term.
pub fn equilibrium_identity<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    e: &SpectralField<T>,
) -> Result<T, AnalysisError> {
    if !model.gradient_coefficient().is_zero() {
        return Err(AnalysisError::Precondition(
            "the identity V(e) = -1/4 int e^4 holds only for b = 0".into(),
        ));
    }
    let v = lyapunov(space, model, e);
    Ok(num_traits::Float::abs(v + T::lit(0.25) * space.integral_u4(e)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseConfig<T> {
    pub sample_count: usize,
    pub cluster_tol: T,
    pub integrator: IntegratorConfig<T>,
    /// Size of the unstable-direction offsets from 0.
    pub offset: T,
    /// Scale of the random forward seeds.
    pub seed_scale: T,
    pub random_seeds: usize,
    pub rng_seed: u64,
}

impl<T: Scalar> Default for MorseConfig<T> {
    fn default() -> Self {
        Self {
            sample_count: 8,
            cluster_tol: T::lit(1e-3),
            integrator: IntegratorConfig {
                t_end: T::lit(60.0),
                record_every: 100,
                ..Default::default()
            },
            offset: T::lit(1e-3),
            seed_scale: T::lit(0.5),
            random_seeds: 8,
            rng_seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connection<T> {
    /// Index into `MorseReport::equilibria`.
    pub from: usize,
    pub to: usize,
    pub trajectory: usize,
    pub v_from: T,
    pub v_to: T,
    /// V non-increasing along the recorded samples (10⁻⁸ relative slack).
    pub v_monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorseReport<T> {
    pub a: T,
    pub b: T,
    pub equilibria: Vec<Equilibrium<T>>,
    pub failed_seeds: Vec<SeedFailure>,
    pub r_zero: usize,
    pub marginal_zero: usize,
    /// Indices of equilibria with V < 0.
    pub k0_members: Vec<usize>,
    pub zero_index: Option<usize>,
    pub connections: Vec<Connection<T>>,
    /// ω-limit of each forward sample: equilibrium index or None.
    pub classifications: Vec<Option<usize>>,
    pub unclassified: usize,
    /// Every connection runs from higher to lower V with V monotone.
    pub ordered: bool,
}

impl<T: Scalar> MorseReport<T> {
    pub fn min_v(&self) -> Option<T> {
        self.equilibria.iter().map(|e| e.v).fold(None, |m, v| Some(m.map_or(v, |m: T| m.min(v))))
    }
}

fn nearest<T: Scalar>(space: &SpectralSpace<T>, eqs: &[Equilibrium<T>], u: &SpectralField<T>, tol: T) -> Option<usize> {
    eqs.iter()
        .enumerate()
        .map(|(i, e)| (i, space.l2_distance(&e.state, u)))
        .filter(|(_, d)| *d <= tol)
        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
        .map(|(i, _)| i)
}

pub(crate) fn v_monotone<T: Scalar>(traj: &Trajectory<T>) -> bool {
    traj.diagnostics.windows(2).all(|w| {
        w[1].v <= w[0].v + T::lit(1e-8) * (T::one() + num_traits::Float::abs(w[0].v))
    })
}

/// Equilibria, index of 0, forward ω-limit classification of random samples
/// and connections shot from the unstable directions of 0.
pub fn morse_decomposition<T: Scalar>(
    space: &SpectralSpace<T>,
    model: &ModelSpec<T>,
    cfg: &MorseConfig<T>,
) -> Result<MorseReport<T>, AnalysisError> {
    let seeds = default_seeds(space, model, cfg.random_seeds, cfg.rng_seed);
    let search = find_equilibria(space, model, &seeds, &NewtonConfig::default())?;
    let eqs = search.equilibria;
    let zero_index = eqs.iter().position(|e| e.state.is_zero() || space.l2_norm(&e.state) < T::lit(1e-12));
    let idx = morse_index_zero(model, space.spectrum());
    let k0_members: Vec<usize> = (0..eqs.len()).filter(|&i| eqs[i].v < T::zero()).collect();
    let g = ForcingModel::zero(space.shape());

    let run = |init: &SpectralField<T>| -> Result<Trajectory<T>, AnalysisError> {
        integrate(space, *model, &g, init, T::zero(), &cfg.integrator)
            .map_err(|e| AnalysisError::Integration(e.to_string()))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_add(1));
    let samples: Vec<SpectralField<T>> = (0..cfg.sample_count)
        .map(|_| space.random_smooth(&mut rng, cfg.seed_scale))
        .collect();
    let classifications: Vec<Option<usize>> = samples
        .par_iter()
        .map(|s| {
            let tr = run(s)?;
            Ok(nearest(space, &eqs, tr.last_state().unwrap(), cfg.cluster_tol))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let unclassified = classifications.iter().filter(|c| c.is_none()).count();

    let mut offsets = Vec::new();
    if let Some(z) = zero_index {
        for (i, &mu) in space.mode_mu().iter().enumerate() {
            if model.lambda(mu) < -T::lit(MARGINAL_TOL) {
                for sign in [T::one(), -T::one()] {
                    let mut u = space.zeros();
                    u.coeffs[i] = sign * cfg.offset;
                    offsets.push((z, u));
                }
            }
        }
    }
    let shots: Vec<(usize, Option<usize>, bool)> = offsets
        .par_iter()
        .map(|(z, u)| {
            let tr = run(u)?;
            Ok((*z, nearest(space, &eqs, tr.last_state().unwrap(), cfg.cluster_tol), v_monotone(&tr)))
        })
        .collect::<Result<_, AnalysisError>>()?;
    let connections: Vec<Connection<T>> = shots
        .into_iter()
        .enumerate()
        .filter_map(|(id, (from, to, mono))| {
            to.filter(|&t| t != from).map(|to| Connection {
                from,
                to,
                trajectory: id,
                v_from: eqs[from].v,
                v_to: eqs[to].v,
                v_monotone: mono,
            })
        })
        .collect();
    let ordered = connections.iter().all(|c| c.v_monotone && c.v_to < c.v_from);
    Ok(MorseReport {
        a: model.a,
        b: model.b,
        failed_seeds: search.failed,
        r_zero: idx.r,
        marginal_zero: idx.marginal,
        k0_members,
        zero_index,
        connections,
        classifications,
        unclassified,
        ordered,
        equilibria: eqs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::DomainSpec;
    use std::f64::consts::PI;

    fn space(n: usize) -> SpectralSpace<f64> {
        SpectralSpace::new(DomainSpec::interval_pi(n).unwrap()).unwrap()
    }

    #[test]
    fn lyapunov_single_mode() {
        let s = space(16);
        for &(a, c) in &[(0.5, 0.7), (2.0, -1.3), (0.0, 0.1)] {
            let m = ModelSpec::swift_hohenberg(a, 0.0);
            let u = s.mode(&[1], c).unwrap();
            let want = 0.5 * (a - 1.0) * (PI / 2.0) * c * c + 0.25 * (3.0 * PI / 8.0) * c.powi(4);
            assert!((lyapunov(&s, &m, &u) - want).abs() < 1e-13);
        }
        assert_eq!(lyapunov(&s, &ModelSpec::swift_hohenberg(0.5, 0.0), &s.zeros()), 0.0);
    }

    #[test]
    fn morse_index_examples() {
        let s = space(16);
        let sp = s.spectrum();
        assert_eq!(morse_index_zero(&ModelSpec::swift_hohenberg(0.0, 0.0), sp), MorseIndexZero { r: 1, marginal: 0 });
        assert_eq!(morse_index_zero(&ModelSpec::swift_hohenberg(2.0, 0.0), sp), MorseIndexZero { r: 0, marginal: 0 });
        assert_eq!(morse_index_zero(&ModelSpec::swift_hohenberg(1.0, 0.0), sp), MorseIndexZero { r: 0, marginal: 1 });
        assert_eq!(morse_index_zero(&ModelSpec::chafee_infante(2.0), sp).r, 1);
        let sq = SpectralSpace::new(DomainSpec::rectangle(PI, PI, 8, 8).unwrap()).unwrap();
        // μ = 2, 5, 8, ...; λ(2) = a, λ(5) = 15 + a (r = 2), λ(8) = 48 + a
        assert_eq!(morse_index_zero(&ModelSpec::swift_hohenberg(-20.0, 0.0), sq.spectrum()).r, 1 + 2);
        assert_eq!(morse_index_zero(&ModelSpec::swift_hohenberg(-10.0, 0.0), sq.spectrum()).r, 1);
    }

    #[test]
    fn single_mode_seed_formula() {
        assert!((single_mode_amplitude(-0.5f64, 1).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(single_mode_amplitude(0.5f64, 1).is_none());
        assert!((single_mode_amplitude(-9.0f64 / 16.0, 2).unwrap() - 1.0).abs() < 1e-15);
    }
}
