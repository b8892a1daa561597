//! Sine/cosine transforms on uniform grids of `(0, l)`, built on a complex FFT
//! of length `2m` (odd/even extension). A grid with `m` intervals has nodes
//! `x_j = j l / m`, `j = 0..=m`.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Scalar;

#[derive(Clone)]
pub(crate) struct AxisTransform<T: Scalar> {
    pub n: usize,
    pub m: usize,
    pub length: T,
    fft: Arc<dyn Fft<T>>,
    /// kπ/l for k = 1..=n.
    pub wavenumber: Vec<T>,
    /// Row k-1 holds (q, weight) pairs of the cos(qπx/l) → sin(kπx/l)
    /// L²-projection, for q = 0..=min(2n, m).
    cos_to_sine: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> std::fmt::Debug for AxisTransform<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AxisTransform")
            .field("n", &self.n)
            .field("m", &self.m)
            .field("length", &self.length)
            .finish()
    }
}

impl<T: Scalar> AxisTransform<T> {
    pub fn new(n: usize, m: usize, length: T, planner: &mut FftPlanner<T>) -> Self {
        assert!(m > n, "grid must resolve every retained mode");
        let fft = planner.plan_fft_forward(2 * m);
        let wavenumber = (1..=n)
            .map(|k| T::from_usize_lossy(k) * (T::PI() / length))
            .collect();
        let qmax = (2 * n).min(m);
        let two_over_pi = T::lit(2.0) / T::PI();
        let cos_to_sine = (1..=n)
            .map(|k| {
                // (2/π)(1 − (−1)^{k+q}) k / (k² − q²), nonzero only for k + q odd.
                let start = if k % 2 == 0 { 1 } else { 0 };
                (start..=qmax)
                    .step_by(2)
                    .map(|q| {
                        let kf = T::from_usize_lossy(k);
                        let qf = T::from_usize_lossy(q);
                        (q, two_over_pi * T::lit(2.0) * kf / (kf * kf - qf * qf))
                    })
                    .collect()
            })
            .collect();
        Self {
            n,
            m,
            length,
            fft,
            wavenumber,
            cos_to_sine,
        }
    }

    pub fn spacing(&self) -> T {
        self.length / T::from_usize_lossy(self.m)
    }

    fn run(&self, buf: &mut [Complex<T>]) {
        self.fft.process(buf);
    }

    /// v_j = Σ_{k=1}^{n} c_k sin(πkj/m), j = 0..=m.
    pub fn sine_synth(&self, coeffs: &[T]) -> Vec<T> {
        let mut buf = vec![Complex::zero(); 2 * self.m];
        for (k, &c) in coeffs.iter().enumerate() {
            buf[k + 1] = Complex::new(c, T::zero());
        }
        self.run(&mut buf);
        buf[..=self.m].iter().map(|z| -z.im).collect()
    }

    /// v_j = Σ_{q} d_q cos(πqj/m), j = 0..=m, with `coeffs[q]` for q = 0...
    pub fn cos_synth(&self, coeffs: &[T]) -> Vec<T> {
        let mut buf = vec![Complex::zero(); 2 * self.m];
        for (q, &d) in coeffs.iter().enumerate() {
            buf[q] = Complex::new(d, T::zero());
        }
        self.run(&mut buf);
        buf[..=self.m].iter().map(|z| z.re).collect()
    }

    /// Inverse of [`Self::sine_synth`] (DST-I), returning the first `n` modes.
    pub fn sine_analysis(&self, values: &[T]) -> Vec<T> {
        debug_assert_eq!(values.len(), self.m + 1);
        let mut buf = vec![Complex::zero(); 2 * self.m];
        for j in 1..self.m {
            buf[j] = Complex::new(values[j], T::zero());
        }
        self.run(&mut buf);
        let scale = T::lit(2.0) / T::from_usize_lossy(self.m);
        (1..=self.n).map(|k| -buf[k].im * scale).collect()
    }

    /// DCT-I: cosine coefficients d_0..d_{keep-1} with
    /// v(x) = Σ_q d_q cos(qπx/l) exactly for degree < m.
    pub fn cos_analysis(&self, values: &[T], keep: usize) -> Vec<T> {
        debug_assert_eq!(values.len(), self.m + 1);
        let half = T::lit(0.5);
        let mut buf = vec![Complex::zero(); 2 * self.m];
        buf[0] = Complex::new(values[0] * half, T::zero());
        for j in 1..self.m {
            buf[j] = Complex::new(values[j], T::zero());
        }
        buf[self.m] = Complex::new(values[self.m] * half, T::zero());
        self.run(&mut buf);
        let mf = T::from_usize_lossy(self.m);
        let keep = keep.min(self.m + 1);
        (0..keep)
            .map(|q| {
                let s = if q == 0 || q == self.m {
                    T::one() / mf
                } else {
                    T::lit(2.0) / mf
                };
                buf[q].re * s
            })
            .collect()
    }

    pub fn cos_keep(&self) -> usize {
        (2 * self.n).min(self.m) + 1
    }

    /// L²(0,l)-orthogonal projection of a cosine series onto the sine modes.
    pub fn project_cos_to_sine(&self, cos_coeffs: &[T]) -> Vec<T> {
        self.cos_to_sine
            .iter()
            .map(|row| {
                row.iter()
                    .filter(|(q, _)| *q < cos_coeffs.len())
                    .fold(T::zero(), |acc, &(q, w)| acc + w * cos_coeffs[q])
            })
            .collect()
    }
}

/// Applies a 1-D map along `axis` of a row-major array of rank 1 or 2.
pub(crate) fn map_axis<T: Copy + Zero>(
    data: &[T],
    shape: &[usize],
    axis: usize,
    out_len: usize,
    f: impl Fn(&[T]) -> Vec<T>,
) -> (Vec<T>, Vec<usize>) {
    match shape.len() {
        1 => {
            let out = f(data);
            debug_assert_eq!(out.len(), out_len);
            (out, vec![out_len])
        }
        2 => {
            let (s0, s1) = (shape[0], shape[1]);
            if axis == 1 {
                let mut out = Vec::with_capacity(s0 * out_len);
                for r in 0..s0 {
                    let row = f(&data[r * s1..(r + 1) * s1]);
                    debug_assert_eq!(row.len(), out_len);
                    out.extend_from_slice(&row);
                }
                (out, vec![s0, out_len])
            } else {
                let mut out = vec![T::zero(); out_len * s1];
                let mut col = Vec::with_capacity(s0);
                for c in 0..s1 {
                    col.clear();
                    col.extend((0..s0).map(|r| data[r * s1 + c]));
                    let mapped = f(&col);
                    debug_assert_eq!(mapped.len(), out_len);
                    for (r, v) in mapped.into_iter().enumerate() {
                        out[r * s1 + c] = v;
                    }
                }
                (out, vec![out_len, s1])
            }
        }
        _ => unreachable!("rank 1 or 2 only"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tr(n: usize, m: usize) -> AxisTransform<f64> {
        AxisTransform::new(n, m, PI, &mut FftPlanner::new())
    }

    #[test]
    fn sine_pair_inverts() {
        let t = tr(8, 9);
        let c: Vec<f64> = (0..8).map(|k| ((k * 7 + 3) % 5) as f64 - 2.0).collect();
        let v = t.sine_synth(&c);
        assert!(v[0].abs() < 1e-13 && v[9].abs() < 1e-13);
        let back = t.sine_analysis(&v);
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn cosine_pair_inverts() {
        let t = tr(4, 10);
        let d = vec![0.5, -1.0, 0.25, 2.0, 0.0, 0.75, -0.3, 0.1, 0.0];
        let v = t.cos_synth(&d);
        let back = t.cos_analysis(&v, 9);
        for (a, b) in d.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn cos_to_sine_constant() {
        // 1 = (4/π) Σ_{k odd} sin(kx)/k
        let t = tr(4, 10);
        let p = t.project_cos_to_sine(&[1.0]);
        assert!((p[0] - 4.0 / PI).abs() < 1e-14);
        assert!(p[1].abs() < 1e-14);
        assert!((p[2] - 4.0 / (3.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn map_axis_2d_roundtrip_shape() {
        let data: Vec<f64> = (0..6).map(|x| x as f64).collect();
        let (o, s) = map_axis(&data, &[2, 3], 0, 4, |c| {
            let mut v = c.to_vec();
            v.extend([0.0, 0.0]);
            v
        });
        assert_eq!(s, vec![4, 3]);
        assert_eq!(&o[..6], &data[..]);
        assert!(o[6..].iter().all(|&x| x == 0.0));
    }
}
