//! The φ-functions of exponential integrators,
//! `φ₀(z) = e^z`, `φ_{k+1}(z) = (φ_k(z) − 1/k!) / z`, `φ_k(0) = 1/k!`.
//!
//! Small |z| uses the Taylor series `φ_k(z) = Σ_j z^j/(j+k)!`; the upward
//! recurrence is only applied for |z| ≥ [`SERIES_RADIUS`], where it is
//! well conditioned for the orders used here (k ≤ 8).

use crate::scalar::Scalar;

pub const SERIES_RADIUS: f64 = 2.0;
const SERIES_TERMS: usize = 40;

/// Returns `[φ₀(z), …, φ_kmax(z)]`.
pub fn phi_functions<T: Scalar>(z: T, kmax: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(kmax + 1);
    out.push(z.exp());
    if num_traits::Float::abs(z) < T::lit(SERIES_RADIUS) {
        for k in 1..=kmax {
            // 1/k! · Σ_j z^j k!/(j+k)!
            let mut inv_fact = T::one();
            for i in 2..=k {
                inv_fact = inv_fact / T::from_usize_lossy(i);
            }
            let mut term = inv_fact;
            let mut sum = term;
            for j in 1..SERIES_TERMS {
                term = term * z / T::from_usize_lossy(j + k);
                sum = sum + term;
            }
            out.push(sum);
        }
    } else {
        let mut inv_fact = T::one();
        for k in 1..=kmax {
            let prev = out[k - 1];
            out.push((prev - inv_fact) / z);
            inv_fact = inv_fact / T::from_usize_lossy(k);
        }
    }
    out
}
