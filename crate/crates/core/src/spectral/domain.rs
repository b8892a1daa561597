use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::scalar::Scalar;

/// Rectangular domain `(0, l_1) x ... x (0, l_d)` with `u = Δu = 0` on the
/// boundary, truncated to `modes[i]` sine modes per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec<T> {
    pub lengths: Vec<T>,
    pub modes: Vec<usize>,
}

impl<T: Scalar> DomainSpec<T> {
    pub fn new(lengths: Vec<T>, modes: Vec<usize>) -> Result<Self, SpectralError> {
        let spec = Self { lengths, modes };
        spec.validate()?;
        Ok(spec)
    }

    /// The default desk domain: `(0, π)` with `modes` sine modes.
    pub fn interval_pi(modes: usize) -> Result<Self, SpectralError> {
        Self::new(vec![T::PI()], vec![modes])
    }

    pub fn interval(length: T, modes: usize) -> Result<Self, SpectralError> {
        Self::new(vec![length], vec![modes])
    }

    pub fn rectangle(lx: T, ly: T, nx: usize, ny: usize) -> Result<Self, SpectralError> {
        Self::new(vec![lx, ly], vec![nx, ny])
    }

    pub fn dimension(&self) -> usize {
        self.lengths.len()
    }

    /// Lebesgue measure |Ω|.
    pub fn measure(&self) -> T {
        self.lengths.iter().fold(T::one(), |acc, &l| acc * l)
    }

    pub fn coeff_count(&self) -> usize {
        self.modes.iter().product()
    }

    /// Checks the structural invariants: dimension 1 or 2, positive lengths,
    /// power-of-two mode counts. Small counts (1, 2) pass here so that tiny
    /// analytic fixtures can be built; see [`DomainSpec::validate_strict`].
    pub fn validate(&self) -> Result<(), SpectralError> {
        let dim = self.lengths.len();
        if !(dim == 1 || dim == 2) {
            return Err(SpectralError::InvalidDomain(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if self.modes.len() != dim {
            return Err(SpectralError::InvalidDomain(format!(
                "{} mode counts for a {dim}-dimensional domain",
                self.modes.len()
            )));
        }
        for &l in &self.lengths {
            if !(l > T::zero()) || !l.is_finite() {
                return Err(SpectralError::InvalidDomain(format!(
                    "axis length must be positive and finite, got {l}"
                )));
            }
        }
        for &n in &self.modes {
            if n == 0 || !n.is_power_of_two() {
                return Err(SpectralError::InvalidDomain(format!(
                    "mode count must be a power of two, got {n}"
                )));
            }
        }
        Ok(())
    }

    /// Strict check used by scenario configs: every axis carries N ≥ 4 modes.
    pub fn validate_strict(&self) -> Result<(), SpectralError> {
        self.validate()?;
        if let Some(&n) = self.modes.iter().find(|&&n| n < 4) {
            return Err(SpectralError::InvalidDomain(format!(
                "mode count must be at least 4, got {n}"
            )));
        }
        Ok(())
    }
}
