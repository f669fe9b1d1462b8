//! Banded linear algebra used by the discretized operators.
//!
//! Two factorizations cover every solve in the crate:
//!
//! - [`SymBanded::ldlt`], an unpivoted LDLᵀ of a symmetric banded
//!   matrix. Besides solving positive-definite systems it reports the
//!   factor inertia, which by Sylvester's law counts the eigenvalues
//!   of `A - σ M` below zero — the backbone of the bisection
//!   eigensolver in [`crate::grid`].
//! - [`GeneralBanded::lu`], a banded LU with partial pivoting, used
//!   for Newton corrections where the Jacobian may be indefinite along
//!   the continuation path.
//!
//! All matrices are stored diagonal-major in flat `Vec<f64>` buffers;
//! the problem sizes here (bandwidth ≤ a few hundred, dimension ≤ a
//! few tens of thousands) never justify blocked kernels.

use crate::error::{Error, Result};

/// Symmetric banded matrix, lower triangle stored by diagonals.
///
/// Entry `A[i+d][i]` of diagonal `d in 0..=bw` lives at `data[d*n+i]`.
#[derive(Debug, Clone)]
pub struct SymBanded {
    /// Dimension.
    pub n: usize,
    /// Number of sub-diagonals.
    pub bw: usize,
    /// Flat storage, length `(bw + 1) * n`.
    pub data: Vec<f64>,
}

impl SymBanded {
    /// Zero matrix of dimension `n` with `bw` sub-diagonals.
    pub fn new(n: usize, bw: usize) -> Self {
        SymBanded {
            n,
            bw,
            data: vec![0.0; (bw + 1) * n],
        }
    }

    /// Add `v` to entry `(i, j)`; the mirrored entry is implied.
    ///
    /// Panics if `|i - j|` exceeds the bandwidth.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.bw, "entry ({i}, {j}) outside bandwidth {}", self.bw);
        self.data[d * self.n + lo] += v;
    }

    /// Entry `(i, j)`, zero outside the band.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.bw {
            0.0
        } else {
            self.data[d * self.n + lo]
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let n = self.n;
        for i in 0..n {
            y[i] = self.data[i] * x[i];
        }
        for d in 1..=self.bw {
            let band = &self.data[d * n..(d + 1) * n];
            for i in 0..n.saturating_sub(d) {
                let a = band[i];
                if a != 0.0 {
                    y[i + d] += a * x[i];
                    y[i] += a * x[i + d];
                }
            }
        }
    }

    /// Quadratic form `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            s += self.data[i] * x[i] * x[i];
        }
        for d in 1..=self.bw {
            let band = &self.data[d * n..(d + 1) * n];
            let mut t = 0.0;
            for i in 0..n.saturating_sub(d) {
                t += band[i] * x[i] * x[i + d];
            }
            s += 2.0 * t;
        }
        s
    }

    /// Copy of `A - σ diag(mass)`.
    pub fn shifted(&self, sigma: f64, mass: &[f64]) -> SymBanded {
        assert_eq!(mass.len(), self.n);
        let mut out = self.clone();
        for i in 0..self.n {
            out.data[i] -= sigma * mass[i];
        }
        out
    }

    /// Unpivoted LDLᵀ factorization.
    ///
    /// Fails with [`Error::SingularFactor`] when a pivot underflows
    /// relative to the matrix scale; callers doing spectrum bisection
    /// respond by nudging the shift.
    pub fn ldlt(&self) -> Result<Ldlt> {
        let n = self.n;
        let bw = self.bw;
        let mut f = self.data.clone();
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let tiny = scale * 1e-300f64.max(f64::EPSILON * f64::EPSILON);
        let mut neg = 0usize;
        // Column j of L is computed from columns j-bw..j; banded LDLᵀ
        // with in-place storage: after the loop f[0] holds D and
        // f[d*n+j] holds L[j+d][j].
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut dj = f[j];
            for k in k0..j {
                let l = f[(j - k) * n + k];
                dj -= l * l * f[k];
            }
            if dj.abs() <= tiny {
                return Err(Error::SingularFactor { index: j });
            }
            if dj < 0.0 {
                neg += 1;
            }
            f[j] = dj;
            let imax = (j + bw).min(n - 1);
            for i in (j + 1)..=imax {
                let mut s = f[(i - j) * n + j];
                let kk0 = i.saturating_sub(bw).max(k0);
                for k in kk0..j {
                    s -= f[(i - k) * n + k] * f[(j - k) * n + k] * f[k];
                }
                f[(i - j) * n + j] = s / dj;
            }
        }
        Ok(Ldlt {
            n,
            bw,
            data: f,
            negative_pivots: neg,
        })
    }
}

/// LDLᵀ factors of a symmetric banded matrix.
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    bw: usize,
    /// `data[0..n]` is D; `data[d*n+j]` is `L[j+d][j]` (unit diagonal).
    data: Vec<f64>,
    /// Number of negative entries of D = number of eigenvalues below
    /// the shift at which the matrix was formed (Sylvester's law).
    pub negative_pivots: usize,
}

impl Ldlt {
    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let bw = self.bw;
        // Forward: L z = b.
        for j in 0..n {
            let bj = b[j];
            if bj != 0.0 {
                let imax = (j + bw).min(n - 1);
                for i in (j + 1)..=imax {
                    b[i] -= self.data[(i - j) * n + j] * bj;
                }
            }
        }
        // Diagonal.
        for j in 0..n {
            b[j] /= self.data[j];
        }
        // Backward: Lᵀ x = z.
        for j in (0..n).rev() {
            let imax = (j + bw).min(n - 1);
            let mut s = b[j];
            for i in (j + 1)..=imax {
                s -= self.data[(i - j) * n + j] * b[i];
            }
            b[j] = s;
        }
    }
}

/// General banded matrix in LAPACK-style storage with headroom for
/// pivoting fill: entry `A[i][j]` lives at `data[(kl+ku+i-j)*n + j]`.
#[derive(Debug, Clone)]
pub struct GeneralBanded {
    /// Dimension.
    pub n: usize,
    /// Sub-diagonals.
    pub kl: usize,
    /// Super-diagonals (before fill).
    pub ku: usize,
    data: Vec<f64>,
}

impl GeneralBanded {
    /// Zero matrix with `kl` sub- and `ku` super-diagonals.
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        GeneralBanded {
            n,
            kl,
            ku,
            data: vec![0.0; (2 * kl + ku + 1) * n],
        }
    }

    /// Add `v` to entry `(i, j)`. Panics outside the declared band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            (j <= i + self.ku) && (i <= j + self.kl),
            "entry ({i}, {j}) outside band (kl={}, ku={})",
            self.kl,
            self.ku
        );
        let r = self.kl + self.ku + i - j;
        self.data[r * self.n + j] += v;
    }

    /// LU factorization with partial pivoting, consuming the matrix.
    pub fn lu(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let m = self.kl + self.ku; // storage row of the diagonal
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            let lm = kl.min(n - 1 - j);
            // Partial pivot among rows j..=j+lm of column j.
            let mut p = 0usize;
            let mut pmax = self.data[m * n + j].abs();
            for s in 1..=lm {
                let v = self.data[(m + s) * n + j].abs();
                if v > pmax {
                    pmax = v;
                    p = s;
                }
            }
            if pmax == 0.0 {
                return Err(Error::SingularFactor { index: j });
            }
            ipiv[j] = j + p;
            if p != 0 {
                // Swap rows j and j+p across the columns they occupy.
                for jj in j..=(j + m).min(n - 1) {
                    let r1 = m + j - jj;
                    self.data.swap(r1 * n + jj, (r1 + p) * n + jj);
                }
            }
            let piv = self.data[m * n + j];
            for s in 1..=lm {
                let mult = self.data[(m + s) * n + j] / piv;
                self.data[(m + s) * n + j] = mult;
                if mult != 0.0 {
                    for jj in (j + 1)..=(j + m).min(n - 1) {
                        let rj = m + j - jj;
                        let u = self.data[rj * n + jj];
                        if u != 0.0 {
                            self.data[(rj + s) * n + jj] -= mult * u;
                        }
                    }
                }
            }
        }
        Ok(BandedLu {
            n,
            kl,
            m,
            data: self.data,
            ipiv,
        })
    }
}

/// Pivoted LU factors of a [`GeneralBanded`] matrix.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    m: usize,
    data: Vec<f64>,
    ipiv: Vec<usize>,
}

impl BandedLu {
    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let m = self.m;
        // Forward with the recorded row exchanges.
        for j in 0..n {
            b.swap(j, self.ipiv[j]);
            let bj = b[j];
            if bj != 0.0 {
                let lm = self.kl.min(n - 1 - j);
                for s in 1..=lm {
                    b[j + s] -= self.data[(m + s) * n + j] * bj;
                }
            }
        }
        // Backward on U.
        for j in (0..n).rev() {
            let x = b[j] / self.data[m * n + j];
            b[j] = x;
            if x != 0.0 {
                let lo = j.saturating_sub(m);
                for i in lo..j {
                    b[i] -= self.data[(m + i - j) * n + j] * x;
                }
            }
        }
    }
}

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Deterministic pseudo-random stream for test matrices.
    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    }

    fn random_spd(n: usize, bw: usize, seed: u64) -> SymBanded {
        let mut s = seed;
        let mut a = SymBanded::new(n, bw);
        for i in 0..n {
            for d in 1..=bw.min(n - 1 - i) {
                a.add(i + d, i, lcg(&mut s));
            }
        }
        for i in 0..n {
            // Diagonal dominance makes the matrix comfortably SPD.
            a.add(i, i, 2.0 * bw as f64 + 1.0 + lcg(&mut s).abs());
        }
        a
    }

    #[test]
    fn ldlt_solves_spd_system() {
        let a = random_spd(40, 3, 7);
        let x_true: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; 40];
        a.matvec(&x_true, &mut b);
        let f = a.ldlt().unwrap();
        assert_eq!(f.negative_pivots, 0);
        f.solve(&mut b);
        for (xi, ti) in b.iter().zip(&x_true) {
            assert_relative_eq!(xi, ti, max_relative = 1e-12);
        }
    }

    #[test]
    fn inertia_counts_laplacian_eigenvalues() {
        // Tridiagonal (2, -1) of dimension n has eigenvalues
        // 2 - 2 cos(k π / (n+1)), k = 1..n.
        let n = 17;
        let mut a = SymBanded::new(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0);
            if i + 1 < n {
                a.add(i + 1, i, -1.0);
            }
        }
        let eigs: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        let mass = vec![1.0; n];
        for &sigma in &[0.1, 0.51, 1.23, 2.07, 3.3, 3.999] {
            let expect = eigs.iter().filter(|&&e| e < sigma).count();
            let f = a.shifted(sigma, &mass).ldlt().unwrap();
            assert_eq!(f.negative_pivots, expect, "shift {sigma}");
        }
        // A shift hitting an eigenvalue of a leading principal minor
        // exactly (σ = 1 makes the second pivot vanish) must be
        // reported as a breakdown, not mis-counted.
        match a.shifted(1.0, &mass).ldlt() {
            Err(Error::SingularFactor { .. }) => {}
            other => panic!("expected pivot breakdown, got {other:?}"),
        }
    }

    #[test]
    fn banded_lu_solves_unsymmetric_system() {
        let n = 60;
        let (kl, ku) = (2, 3);
        let mut s = 99u64;
        let mut a = GeneralBanded::new(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                let v = if i == j { 6.0 + lcg(&mut s) } else { lcg(&mut s) };
                a.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| ((i * i) as f64 * 0.11).cos()).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| dense[i][j] * x_true[j]).sum())
            .collect();
        let f = a.lu().unwrap();
        f.solve(&mut b);
        for (xi, ti) in b.iter().zip(&x_true) {
            assert_relative_eq!(xi, ti, max_relative = 1e-11);
        }
    }

    #[test]
    fn lu_pivoting_handles_zero_diagonal() {
        // Leading diagonal entry zero: fails without pivoting.
        let mut a = GeneralBanded::new(3, 1, 1);
        a.add(0, 0, 0.0);
        a.add(0, 1, 2.0);
        a.add(1, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(1, 2, 1.0);
        a.add(2, 1, 3.0);
        a.add(2, 2, 1.0);
        // A = [[0,2,0],[1,1,1],[0,3,1]], b = A·[1,2,3]ᵀ = [4, 6, 9].
        let f = a.lu().unwrap();
        let mut b = vec![4.0, 6.0, 9.0];
        f.solve(&mut b);
        assert_relative_eq!(b[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(b[1], 2.0, max_relative = 1e-14);
        assert_relative_eq!(b[2], 3.0, max_relative = 1e-14);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = GeneralBanded::new(4, 1, 1);
        match a.lu() {
            Err(Error::SingularFactor { index: 0 }) => {}
            other => panic!("expected singular report, got {other:?}"),
        }
    }

    #[test]
    fn quadratic_form_matches_matvec() {
        let a = random_spd(25, 4, 3);
        let x: Vec<f64> = (0..25).map(|i| (i as f64 * 0.71).cos()).collect();
        let mut y = vec![0.0; 25];
        a.matvec(&x, &mut y);
        assert_relative_eq!(a.quadratic_form(&x), dot(&x, &y), max_relative = 1e-13);
    }
}
