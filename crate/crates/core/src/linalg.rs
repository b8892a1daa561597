//! Dense helpers: a partial-pivoting LU solve generic over the scalar type
//! and an f64 eigenvalue front-end over nalgebra.

use nalgebra::DMatrix;

use crate::scalar::Scalar;

/// Solves `A x = rhs` for a row-major `n × n` matrix. Returns `None` when a
/// pivot vanishes.
pub(crate) fn lu_solve<T: Scalar>(mut a: Vec<T>, mut rhs: Vec<T>, n: usize) -> Option<Vec<T>> {
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, num_traits::Float::abs(a[r * n + col])))
            .fold((col, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmax > T::zero()) {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            rhs.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f.is_zero() {
                continue;
            }
            for j in col..n {
                a[r * n + j] = a[r * n + j] - f * a[col * n + j];
            }
            rhs[r] = rhs[r] - f * rhs[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = rhs[r];
        for j in r + 1..n {
            s = s - a[r * n + j] * x[j];
        }
        x[r] = s / a[r * n + r];
    }
    Some(x)
}

/// Eigenvalues (re, im) of a row-major real matrix, ascending by real part.
/// Uses the symmetric solver when `symmetric` is set.
pub(crate) fn eigenvalues<T: Scalar>(a: &[T], n: usize, symmetric: bool) -> Vec<(f64, f64)> {
    let m = DMatrix::from_fn(n, n, |i, j| a[i * n + j].as_f64());
    let mut ev: Vec<(f64, f64)> = if symmetric {
        let sym = (&m + m.transpose()) * 0.5;
        sym.symmetric_eigenvalues().iter().map(|&x| (x, 0.0)).collect()
    } else {
        m.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
    };
    ev.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.partial_cmp(&y.1).unwrap()));
    ev
}
