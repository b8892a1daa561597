use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::scalar::Scalar;

/// Shape of a coefficient array: `rank` axes, sizes in `dims[..rank]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeShape {
    pub rank: usize,
    pub dims: [usize; 2],
}

impl ModeShape {
    pub fn new(modes: &[usize]) -> Self {
        match modes {
            [n] => Self {
                rank: 1,
                dims: [*n, 1],
            },
            [nx, ny] => Self {
                rank: 2,
                dims: [*nx, *ny],
            },
            _ => panic!("rank 1 or 2 only"),
        }
    }

    pub fn axes(&self) -> &[usize] {
        &self.dims[..self.rank]
    }

    pub fn len(&self) -> usize {
        self.axes().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A state in the sine eigenbasis of −Δ: `u = Σ c_k Π_d sin(k_d π x_d / l_d)`,
/// coefficients stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralField<T> {
    pub coeffs: Vec<T>,
    pub shape: ModeShape,
}

impl<T: Scalar> SpectralField<T> {
    pub fn zeros(shape: ModeShape) -> Self {
        Self {
            coeffs: vec![T::zero(); shape.len()],
            shape,
        }
    }

    pub fn from_coeffs(shape: ModeShape, coeffs: Vec<T>) -> Result<Self, SpectralError> {
        if coeffs.len() != shape.len() {
            return Err(SpectralError::SizeMismatch {
                expected: shape.len(),
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        Ok(Self { coeffs, shape })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
            shape: self.shape,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + s * b)
    }

    pub fn neg(&self) -> Self {
        self.scaled(-T::one())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.shape, other.shape, "field shapes differ");
        Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            shape: self.shape,
        }
    }

    /// Plain Euclidean sum of squared coefficients (not the L² norm; see
    /// `SpectralSpace::l2_norm`).
    pub fn coeff_sq_sum(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum()
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs
            .iter()
            .fold(T::zero(), |m, &c| m.max(num_traits::Float::abs(c)))
    }
}

/// Nodal values on the interior points `x_j = j l/(N+1)` of each axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridField<T> {
    pub values: Vec<T>,
    pub shape: ModeShape,
    pub spacing: Vec<T>,
}
