use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::domain::DomainSpec;
use super::field::{GridField, ModeShape, SpectralField};
use super::spectrum::{build_spectrum, coefficient_mu, OperatorSpectrum};
use super::transform::{map_axis, AxisTransform};
use crate::error::SpectralError;
use crate::scalar::Scalar;

/// Grid max |u| beyond which a nonlinearity evaluation is treated as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBundle<T> {
    pub l2: T,
    pub l4: T,
    pub l6: T,
    /// ‖Δu‖, the X^{1/2} seminorm.
    pub h2: T,
}

/// Discretization of a [`DomainSpec`]: eigenvalues, transform plans and the
/// de-aliased product machinery. Immutable once built and shareable across
/// threads.
#[derive(Clone, Debug)]
pub struct SpectralSpace<T: Scalar> {
    domain: DomainSpec<T>,
    spectrum: OperatorSpectrum<T>,
    shape: ModeShape,
    mode_mu: Vec<T>,
    /// Π_d l_d/2: ‖u‖² = weight · Σ c².
    weight: T,
    natural: Vec<AxisTransform<T>>,
    product: Vec<AxisTransform<T>>,
    quad: Vec<AxisTransform<T>>,
    padded: bool,
}

impl<T: Scalar> SpectralSpace<T> {
    /// Space with factor-2 zero padding for the products in the nonlinearity.
    pub fn new(domain: DomainSpec<T>) -> Result<Self, SpectralError> {
        Self::with_padding(domain, true)
    }

    pub fn with_padding(domain: DomainSpec<T>, padded: bool) -> Result<Self, SpectralError> {
        domain.validate()?;
        let mut planner = FftPlanner::new();
        let build = |factor: usize, planner: &mut FftPlanner<T>| -> Vec<AxisTransform<T>> {
            domain
                .modes
                .iter()
                .zip(&domain.lengths)
                .map(|(&n, &l)| AxisTransform::new(n, factor * (n + 1), l, planner))
                .collect()
        };
        let natural = build(1, &mut planner);
        let product = if padded {
            build(2, &mut planner)
        } else {
            natural.clone()
        };
        let quad = build(3, &mut planner);
        let half = T::lit(0.5);
        let weight = domain.lengths.iter().fold(T::one(), |acc, &l| acc * l * half);
        Ok(Self {
            spectrum: build_spectrum(&domain),
            shape: ModeShape::new(&domain.modes),
            mode_mu: coefficient_mu(&domain),
            weight,
            natural,
            product,
            quad,
            padded,
            domain,
        })
    }

    pub fn domain(&self) -> &DomainSpec<T> {
        &self.domain
    }

    pub fn spectrum(&self) -> &OperatorSpectrum<T> {
        &self.spectrum
    }

    pub fn shape(&self) -> ModeShape {
        self.shape
    }

    pub fn is_padded(&self) -> bool {
        self.padded
    }

    /// μ (eigenvalue of −Δ) for every coefficient, row-major.
    pub fn mode_mu(&self) -> &[T] {
        &self.mode_mu
    }

    pub fn measure(&self) -> T {
        self.domain.measure()
    }

    pub fn zeros(&self) -> SpectralField<T> {
        SpectralField::zeros(self.shape)
    }

    pub fn field(&self, coeffs: Vec<T>) -> Result<SpectralField<T>, SpectralError> {
        SpectralField::from_coeffs(self.shape, coeffs)
    }

    /// Single eigenmode with amplitude `amp`; `index` holds the 1-based mode
    /// number per axis.
    pub fn mode(&self, index: &[usize], amp: T) -> Result<SpectralField<T>, SpectralError> {
        let axes = self.shape.axes();
        if index.len() != axes.len() || index.iter().zip(axes).any(|(&k, &n)| k == 0 || k > n) {
            return Err(SpectralError::InvalidMode(index.to_vec()));
        }
        let mut u = self.zeros();
        let flat = match index {
            [k] => k - 1,
            [kx, ky] => (kx - 1) * axes[1] + (ky - 1),
            _ => unreachable!(),
        };
        u.coeffs[flat] = amp;
        Ok(u)
    }

    /// Random analytic field: coefficients `scale · z · exp(1 − √(μ/μ₁))`
    /// with standard normal z, so the lowest mode carries amplitude of order
    /// `scale` and the spectrum decays geometrically.
    pub fn random_smooth<R: Rng + ?Sized>(&self, rng: &mut R, scale: T) -> SpectralField<T> {
        let mu1 = self.spectrum.mu[0];
        let coeffs = self
            .mode_mu
            .iter()
            .map(|&mu| {
                let z: f64 = rng.sample(StandardNormal);
                scale * T::lit(z) * (T::one() - (mu / mu1).sqrt()).exp()
            })
            .collect();
        SpectralField {
            coeffs,
            shape: self.shape,
        }
    }

    fn check(&self, u: &SpectralField<T>) -> Result<(), SpectralError> {
        if u.shape != self.shape {
            return Err(SpectralError::SizeMismatch {
                expected: self.shape.len(),
                found: u.len(),
            });
        }
        Ok(())
    }

    // ---- coefficient-space operators and norms ----

    pub fn l2_inner(&self, u: &SpectralField<T>, v: &SpectralField<T>) -> T {
        self.weight
            * u.coeffs
                .iter()
                .zip(&v.coeffs)
                .map(|(&a, &b)| a * b)
                .sum::<T>()
    }

    pub fn l2_norm_sq(&self, u: &SpectralField<T>) -> T {
        self.weight * u.coeff_sq_sum()
    }

    pub fn l2_norm(&self, u: &SpectralField<T>) -> T {
        self.l2_norm_sq(u).sqrt()
    }

    pub fn l2_distance(&self, u: &SpectralField<T>, v: &SpectralField<T>) -> T {
        let s: T = u
            .coeffs
            .iter()
            .zip(&v.coeffs)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        (self.weight * s).sqrt()
    }

    /// ‖Δ(u − v)‖.
    pub fn h2_distance(&self, u: &SpectralField<T>, v: &SpectralField<T>) -> T {
        let s: T = u
            .coeffs
            .iter()
            .zip(&v.coeffs)
            .zip(&self.mode_mu)
            .map(|((&a, &b), &mu)| {
                let d = (a - b) * mu;
                d * d
            })
            .sum();
        (self.weight * s).sqrt()
    }

    /// ‖Δu‖ from coefficients.
    pub fn h2_norm(&self, u: &SpectralField<T>) -> T {
        let s: T = u
            .coeffs
            .iter()
            .zip(&self.mode_mu)
            .map(|(&c, &mu)| c * c * mu * mu)
            .sum();
        (self.weight * s).sqrt()
    }

    /// Δu.
    pub fn laplacian(&self, u: &SpectralField<T>) -> SpectralField<T> {
        self.diagonal(u, |mu| -mu)
    }

    /// L u = Δ²u.
    pub fn biharmonic(&self, u: &SpectralField<T>) -> SpectralField<T> {
        self.diagonal(u, |mu| mu * mu)
    }

    /// Applies a diagonal operator given by its symbol in μ.
    pub fn diagonal(&self, u: &SpectralField<T>, symbol: impl Fn(T) -> T) -> SpectralField<T> {
        SpectralField {
            coeffs: u
                .coeffs
                .iter()
                .zip(&self.mode_mu)
                .map(|(&c, &mu)| symbol(mu) * c)
                .collect(),
            shape: u.shape,
        }
    }

    // ---- transforms ----

    fn grid_shape(trs: &[AxisTransform<T>]) -> Vec<usize> {
        trs.iter().map(|t| t.m + 1).collect()
    }

    /// Values of `u` (or of ∂u/∂x_d when `derivative = Some(d)`) on the full
    /// grid of `trs`, endpoints included.
    fn values(&self, coeffs: &[T], trs: &[AxisTransform<T>], derivative: Option<usize>) -> Vec<T> {
        let mut data: Vec<T>;
        let axes = self.shape.axes();
        match derivative {
            Some(d) => {
                data = coeffs.to_vec();
                let n1 = self.shape.dims[1];
                for (i, c) in data.iter_mut().enumerate() {
                    let k = if self.shape.rank == 1 || d == 0 {
                        if self.shape.rank == 1 {
                            i
                        } else {
                            i / n1
                        }
                    } else {
                        i % n1
                    };
                    *c = *c * trs[d].wavenumber[k];
                }
            }
            None => data = coeffs.to_vec(),
        }
        let mut shape = axes.to_vec();
        for (axis, tr) in trs.iter().enumerate() {
            let cos = derivative == Some(axis);
            let (out, s) = map_axis(&data, &shape, axis, tr.m + 1, |line| {
                if cos {
                    let mut c = Vec::with_capacity(line.len() + 1);
                    c.push(T::zero());
                    c.extend_from_slice(line);
                    tr.cos_synth(&c)
                } else {
                    tr.sine_synth(line)
                }
            });
            data = out;
            shape = s;
        }
        data
    }

    fn sine_coeffs(&self, values: &[T], trs: &[AxisTransform<T>]) -> Vec<T> {
        let mut data = values.to_vec();
        let mut shape = Self::grid_shape(trs);
        for (axis, tr) in trs.iter().enumerate() {
            let (out, s) = map_axis(&data, &shape, axis, tr.n, |line| tr.sine_analysis(line));
            data = out;
            shape = s;
        }
        data
    }

    /// Sine projection of a function that is a cosine series along every axis.
    fn cos_values_to_sine(&self, values: &[T], trs: &[AxisTransform<T>]) -> Vec<T> {
        let mut data = values.to_vec();
        let mut shape = Self::grid_shape(trs);
        for (axis, tr) in trs.iter().enumerate() {
            let keep = tr.cos_keep();
            let (out, s) = map_axis(&data, &shape, axis, keep, |line| tr.cos_analysis(line, keep));
            data = out;
            shape = s;
        }
        for (axis, tr) in trs.iter().enumerate() {
            let (out, s) = map_axis(&data, &shape, axis, tr.n, |line| tr.project_cos_to_sine(line));
            data = out;
            shape = s;
        }
        data
    }

    /// Nodal values at the interior points `j l/(N+1)`.
    pub fn to_grid(&self, u: &SpectralField<T>) -> Result<GridField<T>, SpectralError> {
        self.check(u)?;
        let full = self.values(&u.coeffs, &self.natural, None);
        let full_shape = Self::grid_shape(&self.natural);
        let values = match self.shape.rank {
            1 => full[1..full.len() - 1].to_vec(),
            _ => {
                let (g0, g1) = (full_shape[0], full_shape[1]);
                (1..g0 - 1)
                    .flat_map(|r| full[r * g1 + 1..(r + 1) * g1 - 1].iter().copied())
                    .collect()
            }
        };
        Ok(GridField {
            values,
            shape: self.shape,
            spacing: self.natural.iter().map(|t| t.spacing()).collect(),
        })
    }

    /// Inverse of [`Self::to_grid`].
    pub fn to_coeff(&self, grid: &GridField<T>) -> Result<SpectralField<T>, SpectralError> {
        if grid.shape != self.shape || grid.values.len() != self.shape.len() {
            return Err(SpectralError::SizeMismatch {
                expected: self.shape.len(),
                found: grid.values.len(),
            });
        }
        let full_shape = Self::grid_shape(&self.natural);
        let mut full = vec![T::zero(); full_shape.iter().product()];
        match self.shape.rank {
            1 => full[1..full_shape[0] - 1].copy_from_slice(&grid.values),
            _ => {
                let (g0, g1) = (full_shape[0], full_shape[1]);
                let n1 = self.shape.dims[1];
                for r in 1..g0 - 1 {
                    full[r * g1 + 1..(r + 1) * g1 - 1]
                        .copy_from_slice(&grid.values[(r - 1) * n1..r * n1]);
                }
            }
        }
        self.field(self.sine_coeffs(&full, &self.natural))
    }

    /// Trapezoid-rule L² norm on the natural interior grid (Parseval partner
    /// of [`Self::l2_norm`]).
    pub fn grid_l2_norm(&self, grid: &GridField<T>) -> T {
        let cell = grid.spacing.iter().fold(T::one(), |a, &h| a * h);
        (cell * grid.values.iter().map(|&v| v * v).sum::<T>()).sqrt()
    }

    // ---- nonlinear terms ----

    fn guard(values: &[T]) -> Result<(), SpectralError> {
        let limit = T::lit(BLOWUP_THRESHOLD);
        for &v in values {
            if !v.is_finite() || num_traits::Float::abs(v) > limit {
                return Err(SpectralError::NonfiniteNonlinearity);
            }
        }
        Ok(())
    }

    /// Sine projection of u³.
    pub fn cubic(&self, u: &SpectralField<T>) -> Result<SpectralField<T>, SpectralError> {
        self.check(u)?;
        let v = self.values(&u.coeffs, &self.product, None);
        Self::guard(&v)?;
        let cubed: Vec<T> = v.iter().map(|&x| x * x * x).collect();
        self.field_unchecked(self.sine_coeffs(&cubed, &self.product))
    }

    /// Sine projection of |∇u|².
    pub fn grad_sq(&self, u: &SpectralField<T>) -> Result<SpectralField<T>, SpectralError> {
        self.check(u)?;
        let h = self.grad_dot_values(&u.coeffs, &u.coeffs);
        Self::guard(&h)?;
        self.field_unchecked(self.cos_values_to_sine(&h, &self.product))
    }

    fn grad_dot_values(&self, u: &[T], v: &[T]) -> Vec<T> {
        let mut acc: Option<Vec<T>> = None;
        for d in 0..self.shape.rank {
            let gu = self.values(u, &self.product, Some(d));
            let prod: Vec<T> = if std::ptr::eq(u, v) {
                gu.iter().map(|&x| x * x).collect()
            } else {
                let gv = self.values(v, &self.product, Some(d));
                gu.iter().zip(&gv).map(|(&x, &y)| x * y).collect()
            };
            acc = Some(match acc {
                None => prod,
                Some(a) => a.iter().zip(&prod).map(|(&x, &y)| x + y).collect(),
            });
        }
        acc.expect("rank >= 1")
    }

    fn field_unchecked(&self, coeffs: Vec<T>) -> Result<SpectralField<T>, SpectralError> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(SpectralError::NonfiniteNonlinearity);
        }
        Ok(SpectralField {
            coeffs,
            shape: self.shape,
        })
    }

    /// Sine projection of `b|∇u|² + u³`, the part of every model's
    /// nonlinearity that is not diagonal in the eigenbasis.
    pub fn polynomial_terms(&self, u: &SpectralField<T>, b: T) -> Result<SpectralField<T>, SpectralError> {
        let mut out = self.cubic(u)?;
        if !b.is_zero() {
            let g = self.grad_sq(u)?;
            out = out.axpy(b, &g);
        }
        Ok(out)
    }

    /// Sine projection of `f(u) = 2Δu + au + b|∇u|² + u³`.
    pub fn nonlinear_f(&self, u: &SpectralField<T>, a: T, b: T) -> Result<SpectralField<T>, SpectralError> {
        let two = T::lit(2.0);
        let linear = self.diagonal(u, |mu| a - two * mu);
        Ok(linear.add(&self.polynomial_terms(u, b)?))
    }

    /// Directional derivative of `b|∇u|² + u³` at `u` along `v`:
    /// projection of `2b ∇u·∇v + 3u²v`.
    pub fn polynomial_jvp(
        &self,
        u: &SpectralField<T>,
        v: &SpectralField<T>,
        b: T,
    ) -> Result<SpectralField<T>, SpectralError> {
        self.check(u)?;
        self.check(v)?;
        let uu = self.values(&u.coeffs, &self.product, None);
        let vv = self.values(&v.coeffs, &self.product, None);
        let three = T::lit(3.0);
        let w: Vec<T> = uu.iter().zip(&vv).map(|(&x, &y)| three * x * x * y).collect();
        let mut out = self.sine_coeffs(&w, &self.product);
        if !b.is_zero() {
            let h = self.grad_dot_values(&u.coeffs, &v.coeffs);
            let g = self.cos_values_to_sine(&h, &self.product);
            let two_b = T::lit(2.0) * b;
            for (o, gi) in out.iter_mut().zip(g) {
                *o = *o + two_b * gi;
            }
        }
        self.field_unchecked(out)
    }

    // ---- quadrature norms ----

    fn quad_power_integral(&self, u: &SpectralField<T>, p: i32) -> T {
        let v = self.values(&u.coeffs, &self.quad, None);
        let cell = self.quad.iter().fold(T::one(), |a, t| a * t.spacing());
        // Endpoint values vanish for sine fields, so interior sum = trapezoid.
        cell * v.iter().map(|&x| x.abs().powi(p)).sum::<T>()
    }

    /// ∫_Ω u⁴, exact for the retained modes.
    pub fn integral_u4(&self, u: &SpectralField<T>) -> T {
        self.quad_power_integral(u, 4)
    }

    pub fn norms(&self, u: &SpectralField<T>) -> NormBundle<T> {
        let v = self.values(&u.coeffs, &self.quad, None);
        let cell = self.quad.iter().fold(T::one(), |a, t| a * t.spacing());
        let (mut s2, mut s4, mut s6) = (T::zero(), T::zero(), T::zero());
        for &x in &v {
            let x2 = x * x;
            s2 = s2 + x2;
            s4 = s4 + x2 * x2;
            s6 = s6 + x2 * x2 * x2;
        }
        NormBundle {
            l2: (cell * s2).sqrt(),
            l4: (cell * s4).sqrt().sqrt(),
            l6: (cell * s6).powf(T::one() / T::lit(6.0)),
            h2: self.h2_norm(u),
        }
    }
}
