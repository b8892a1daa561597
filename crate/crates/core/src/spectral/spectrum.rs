use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use crate::scalar::Scalar;

/// Distinct eigenvalues μ_k of −Δ (Dirichlet) on the retained modes, with
/// multiplicities, and the eigenvalues μ_k² of the biharmonic operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpectrum<T> {
    pub mu: Vec<T>,
    pub multiplicity: Vec<usize>,
    pub biharmonic: Vec<T>,
}

/// λ_k(a) = μ_k² − 2μ_k + a per distinct μ_k, and λ₀ = min_k (μ_k² − 2μ_k).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaLadder<T> {
    pub entries: Vec<(T, usize)>,
    pub lambda0: T,
}

/// μ for one axis index `k ≥ 1`: (kπ/l)².
#[inline]
pub(crate) fn axis_mu<T: Scalar>(k: usize, length: T) -> T {
    let w = T::from_usize_lossy(k) * (T::PI() / length);
    w * w
}

/// Per-coefficient μ values in row-major coefficient order.
pub(crate) fn coefficient_mu<T: Scalar>(domain: &DomainSpec<T>) -> Vec<T> {
    match domain.dimension() {
        1 => (1..=domain.modes[0])
            .map(|k| axis_mu(k, domain.lengths[0]))
            .collect(),
        _ => {
            let (nx, ny) = (domain.modes[0], domain.modes[1]);
            let mut out = Vec::with_capacity(nx * ny);
            for kx in 1..=nx {
                let mx = axis_mu(kx, domain.lengths[0]);
                for ky in 1..=ny {
                    out.push(mx + axis_mu(ky, domain.lengths[1]));
                }
            }
            out
        }
    }
}

pub fn build_spectrum<T: Scalar>(domain: &DomainSpec<T>) -> OperatorSpectrum<T> {
    let mut all = coefficient_mu(domain);
    all.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let tol = T::lit(1e-12);
    let mut mu: Vec<T> = Vec::new();
    let mut multiplicity: Vec<usize> = Vec::new();
    for v in all {
        match mu.last() {
            Some(&last) if num_traits::Float::abs(v - last) <= tol * last.max(T::one()) => {
                *multiplicity.last_mut().unwrap() += 1;
            }
            _ => {
                mu.push(v);
                multiplicity.push(1);
            }
        }
    }
    let biharmonic = mu.iter().map(|&m| m * m).collect();
    OperatorSpectrum {
        mu,
        multiplicity,
        biharmonic,
    }
}

impl<T: Scalar> OperatorSpectrum<T> {
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

pub fn lambda_ladder<T: Scalar>(spectrum: &OperatorSpectrum<T>, a: T) -> LambdaLadder<T> {
    let two = T::lit(2.0);
    let base: Vec<T> = spectrum.mu.iter().map(|&m| m * m - two * m).collect();
    let lambda0 = base.iter().copied().fold(T::infinity(), T::min);
    let entries = base
        .iter()
        .zip(&spectrum.multiplicity)
        .map(|(&b, &r)| (b + a, r))
        .collect();
    LambdaLadder { entries, lambda0 }
}
