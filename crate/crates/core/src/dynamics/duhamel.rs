use super::{IntegratorConfig, ModelSpec, Stepper, Trajectory};
use crate::error::DynamicsError;
use crate::forcing::ForcingModel;
use crate::linalg::lu_solve;
use crate::phi::phi_functions;
use crate::scalar::Scalar;
use crate::spectral::SpectralSpace;

/// Largest panel degree `p ≤ 6` dividing `stride`.
fn panel_degree(stride: usize) -> usize {
    (1..=6).rev().find(|p| stride.is_multiple_of(*p)).unwrap_or(1)
}

/// Inverse of the Vandermonde matrix on the nodes `j/p`, row-major `[m][j]`.
fn inverse_vandermonde(p: usize) -> Vec<f64> {
    let n = p + 1;
    let v: Vec<f64> = (0..n)
        .flat_map(|j| (0..n).map(move |m| (j as f64 / p as f64).powi(m as i32)))
        .collect();
    let mut inv = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = lu_solve(v.clone(), e, n).expect("Vandermonde on distinct nodes");
        for m in 0..n {
            inv[m * n + j] = col[m];
        }
    }
    inv
}

/// Maximum defect of the mild formulation over all windows
/// `[t_i, t_{i+stride}]`:
///
/// `‖u(t_{i+s}) − e^{−LΔ}u(t_i) − ∫ e^{−L(t−r)} N(u(r), r) dr‖`,
///
/// with `L` the principal part and `N` everything else. The integrand is
/// interpolated by degree-`p` polynomials on panels of recorded samples and
/// integrated exactly against the exponential, so the check is only as good
/// as the sampling resolves `u`: fast initial layers (data far from the slow
/// dynamics) show up as quadrature error.
pub fn duhamel_residual<T: Scalar>(
    space: &SpectralSpace<T>,
    traj: &Trajectory<T>,
    g: &ForcingModel<T>,
    model: ModelSpec<T>,
    stride: usize,
) -> Result<T, DynamicsError<T>> {
    if stride == 0 {
        return Err(DynamicsError::Config("stride must be >= 1".into()));
    }
    if traj.len() <= stride {
        return Ok(T::zero());
    }
    let hs = traj.sample_step();
    let cfg = IntegratorConfig {
        dt: hs,
        padded: space.is_padded(),
        ..Default::default()
    };
    let stepper = Stepper::new(space, model, &cfg)?;
    let nonlinear = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, u)| {
            stepper.explicit_term(u, t, g).map_err(|_| DynamicsError::Diverged {
                t,
                partial: Box::default(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let p = panel_degree(stride);
    let panels = stride / p;
    let hp = hs * T::from_usize_lossy(p);
    let vinv = inverse_vandermonde(p);
    let factorial: Vec<f64> = (0..=p).scan(1.0, |f, m| {
        let out = *f;
        *f *= (m + 1) as f64;
        Some(out)
    }).collect();
    let n = space.shape().len();
    // Per mode: panel decay e^{−κ pH} and node weights w_j.
    let mut decay = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n * (p + 1));
    for &mu in space.mode_mu() {
        let phis = phi_functions(-model.principal(mu) * hp, p + 1);
        decay.push(phis[0]);
        for j in 0..=p {
            let w: T = (0..=p)
                .map(|m| T::lit(vinv[m * (p + 1) + j] * factorial[m]) * phis[m + 1])
                .sum();
            weights.push(hp * w);
        }
    }

    let mut worst = T::zero();
    let mut integral = vec![T::zero(); n];
    let mut propagated = vec![T::zero(); n];
    for start in 0..traj.len() - stride {
        integral.iter_mut().for_each(|x| *x = T::zero());
        propagated.copy_from_slice(&traj.states[start].coeffs);
        for panel in 0..panels {
            let base = start + panel * p;
            for k in 0..n {
                let mut acc = decay[k] * integral[k];
                for j in 0..=p {
                    acc = acc + weights[k * (p + 1) + j] * nonlinear[base + j].coeffs[k];
                }
                integral[k] = acc;
                propagated[k] = decay[k] * propagated[k];
            }
        }
        let end = &traj.states[start + stride].coeffs;
        let s: T = (0..n)
            .map(|k| {
                let d = end[k] - propagated[k] - integral[k];
                d * d
            })
            .sum();
        let weight = space.measure() / T::from_usize_lossy(1 << space.shape().rank);
        worst = worst.max((weight * s).sqrt());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees() {
        assert_eq!(panel_degree(48), 6);
        assert_eq!(panel_degree(10), 5);
        assert_eq!(panel_degree(7), 1);
    }

    #[test]
    fn vandermonde_inverse_reproduces_monomials() {
        for p in 1..=6 {
            let inv = inverse_vandermonde(p);
            // Interpolating x^p on the nodes recovers the coefficient vector e_p.
            let vals: Vec<f64> = (0..=p).map(|j| (j as f64 / p as f64).powi(p as i32)).collect();
            for m in 0..=p {
                let c: f64 = (0..=p).map(|j| inv[m * (p + 1) + j] * vals[j]).sum();
                let want = if m == p { 1.0 } else { 0.0 };
                assert!((c - want).abs() < 1e-9, "p={p} m={m} c={c}");
            }
        }
    }
}
