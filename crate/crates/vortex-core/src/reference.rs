//! Independent single-component reference implementations used to
//! cross-check the coupled machinery.
//!
//! Everything here is deliberately self-contained: hand-rolled
//! residual loops, a Thomas tridiagonal solve, and a Sturm-sequence
//! eigenvalue bisection — no shared code with [`crate::grid`],
//! [`crate::linalg`] or [`crate::profile`] beyond the grid definition
//! itself (cell centers `r_i = (i+1/2)h`, mirrored Dirichlet ghost at
//! the outer radius), which both routes must share for nodewise
//! comparisons to make sense.

use crate::error::{Error, Result};

/// Cell-center radius of node `i` (0-based).
fn node(i: usize, h: f64) -> f64 {
    (i as f64 + 0.5) * h
}

/// Solve the single-component vortex profile equation
///
/// ```text
/// -u'' - u'/r + u/r² + multiplier · a (u² - t²) u = 0,   u(R) = t,
/// ```
///
/// on `[0, radius]` with `n_cells` cells, by damped Newton iteration
/// with a Thomas solve per step. Returns the nodal values.
pub fn solve_single_component(
    a: f64,
    t: f64,
    multiplier: f64,
    radius: f64,
    n_cells: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    if !(a > 0.0 && t > 0.0 && multiplier > 0.0 && radius > 0.0) || n_cells < 2 {
        return Err(Error::InvalidArgument(
            "single-component solve needs positive a, t, multiplier, radius and ≥ 2 cells".into(),
        ));
    }
    let n = n_cells;
    let h = radius / n as f64;
    let core = 1.0 / multiplier;
    let mut u: Vec<f64> = (0..n)
        .map(|i| {
            let r = node(i, h);
            t * r / (r * r + core).sqrt()
        })
        .collect();

    let residual = |u: &[f64]| -> Vec<f64> {
        let mut res = vec![0.0; n];
        for i in 0..n {
            let r = node(i, h);
            let w = r * h;
            if i > 0 {
                res[i] += (i as f64) * h * (u[i] - u[i - 1]) / h;
            }
            if i + 1 < n {
                res[i] += ((i + 1) as f64) * h * (u[i] - u[i + 1]) / h;
            } else {
                res[i] += 2.0 * radius * (u[i] - t) / h;
            }
            res[i] += w * (u[i] / (r * r) + multiplier * a * (u[i] * u[i] - t * t) * u[i]);
        }
        res
    };

    let l2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut res = residual(&u);
    let mut rnorm = l2(&res);
    for _ in 0..80 {
        let sup = res
            .iter()
            .enumerate()
            .map(|(i, g)| (g / (node(i, h) * h)).abs())
            .fold(0.0f64, f64::max);
        if sup <= tol {
            return Ok(u);
        }
        // Tridiagonal Jacobian.
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let r = node(i, h);
            let w = r * h;
            let mut d = w * (1.0 / (r * r) + multiplier * a * (3.0 * u[i] * u[i] - t * t));
            if i > 0 {
                d += i as f64;
            }
            if i + 1 < n {
                d += (i + 1) as f64;
                sub[i] = -((i + 1) as f64);
            } else {
                d += 2.0 * radius / h;
            }
            diag[i] = d;
        }
        // Thomas elimination on (diag, sub) — symmetric tridiagonal.
        let mut c = vec![0.0; n];
        let mut dvec = vec![0.0; n];
        c[0] = sub.first().copied().unwrap_or(0.0) / diag[0];
        dvec[0] = res[0] / diag[0];
        for i in 1..n {
            let m = diag[i] - sub[i - 1] * c[i - 1];
            if m == 0.0 {
                return Err(Error::SingularFactor { index: i });
            }
            if i < n - 1 {
                c[i] = sub[i] / m;
            }
            dvec[i] = (res[i] - sub[i - 1] * dvec[i - 1]) / m;
        }
        let mut delta = vec![0.0; n];
        delta[n - 1] = dvec[n - 1];
        for i in (0..n - 1).rev() {
            delta[i] = dvec[i] - c[i] * delta[i + 1];
        }
        // Damped update.
        let mut eta = 1.0f64;
        let mut accepted = false;
        while eta >= 1.0 / 1024.0 {
            let trial: Vec<f64> = (0..n).map(|i| u[i] - eta * delta[i]).collect();
            let tres = residual(&trial);
            let tnorm = l2(&tres);
            if tnorm.is_finite() && tnorm <= (1.0 - 0.25 * eta) * rnorm {
                u = trial;
                res = tres;
                rnorm = tnorm;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonFailure {
                residual: rnorm,
                detail: "reference solver line search stalled".into(),
            });
        }
    }
    Err(Error::NewtonFailure {
        residual: rnorm,
        detail: "reference solver did not converge".into(),
    })
}

/// Tridiagonal matrices `(diag, sub, mass)` of the scalar angular
/// operator `-Δ_m + V` on the cell-centered grid: quadratic form
/// `Σ faces r_f (Δb)²/h + Σ w (m²/r² + V) b²` with the mirrored
/// Dirichlet ghost at the outer radius.
pub fn single_mode_matrices(
    radius: f64,
    n_cells: usize,
    m: i32,
    v: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = n_cells;
    let h = radius / n as f64;
    let msq = (m as f64) * (m as f64);
    let mut diag = vec![0.0; n];
    let mut sub = vec![0.0; n.saturating_sub(1)];
    let mut mass = vec![0.0; n];
    for i in 0..n {
        let r = node(i, h);
        let w = r * h;
        mass[i] = w;
        let mut d = w * (msq / (r * r) + v[i]);
        if i > 0 {
            d += i as f64;
        }
        if i + 1 < n {
            d += (i + 1) as f64;
            sub[i] = -((i + 1) as f64);
        } else {
            d += 2.0 * radius / h;
        }
        diag[i] = d;
    }
    (diag, sub, mass)
}

/// Smallest eigenvalue of the generalized tridiagonal problem
/// `T x = μ M x` (`M` diagonal positive), located by bisection on the
/// Sturm sequence of `T - σM`: the number of negative pivots in the
/// `LDLᵀ` recurrence counts the eigenvalues below `σ`.
pub fn smallest_generalized_eigenvalue(diag: &[f64], sub: &[f64], mass: &[f64]) -> f64 {
    let n = diag.len();
    let count_below = |sigma: f64| -> usize {
        let mut count = 0usize;
        let mut prev = f64::NAN;
        for i in 0..n {
            let mut d = diag[i] - sigma * mass[i];
            if i > 0 {
                let mut p = prev;
                if p == 0.0 {
                    p = f64::MIN_POSITIVE;
                }
                d -= sub[i - 1] * sub[i - 1] / p;
            }
            if d < 0.0 {
                count += 1;
            }
            prev = d;
        }
        count
    };
    // Gershgorin bounds for M⁻¹T.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut radius_sum = 0.0;
        if i > 0 {
            radius_sum += sub[i - 1].abs();
        }
        if i < n - 1 {
            radius_sum += sub[i].abs();
        }
        lo = lo.min((diag[i] - radius_sum) / mass[i]);
        hi = hi.max((diag[i] + radius_sum) / mass[i]);
    }
    let scale = hi.abs().max(lo.abs()).max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-14 * scale {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::{j0_zero, j1_zero};
    use approx::assert_relative_eq;

    #[test]
    fn reference_profile_has_the_right_tail() {
        let u = solve_single_component(1.0, 1.0, 1.0, 30.0, 1500, 1e-11).unwrap();
        // u ≈ t + a/r² with a = -1/(2at) = -0.5 in the far field.
        let h = 30.0 / 1500.0;
        let i = (20.0 / h) as usize;
        let r = node(i, h);
        let fitted = r * r * (u[i] - 1.0);
        assert_relative_eq!(fitted, -0.5, max_relative = 0.05);
    }

    #[test]
    fn sturm_bisection_reproduces_disk_eigenvalues() {
        let n = 2000;
        let v = vec![0.0; n];
        let (d0, s0, m0) = single_mode_matrices(1.0, n, 0, &v);
        let mu0 = smallest_generalized_eigenvalue(&d0, &s0, &m0);
        let j01 = j0_zero(1);
        assert_relative_eq!(mu0, j01 * j01, max_relative = 1e-5);
        let (d1, s1, m1) = single_mode_matrices(1.0, n, 1, &v);
        let mu1 = smallest_generalized_eigenvalue(&d1, &s1, &m1);
        let j11 = j1_zero(1);
        assert_relative_eq!(mu1, j11 * j11, max_relative = 1e-5);
    }
}
