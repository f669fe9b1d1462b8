//! Bessel functions of the first kind, orders 0 and 1, and their
//! positive zeros.
//!
//! Everything the crate needs lives at small argument (the relevant
//! zeros are below 10), so the functions are evaluated by their power
//! series, which is accurate to essentially machine precision for
//! `|x| <= 12`. Zeros are found at runtime by bracketing bisection
//! seeded with the McMahon estimate; nothing is hard-coded.

/// Bessel function J0 by power series.
///
/// Intended for `|x| <= 12`; beyond that the alternating series loses
/// accuracy and callers should not rely on it.
pub fn j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        let kf = k as f64;
        term *= -q / (kf * kf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// Bessel function J1 by power series.
///
/// Same range of validity as [`j0`].
pub fn j1(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for k in 1..64 {
        let kf = k as f64;
        term *= -q / (kf * (kf + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    sum
}

/// `k`-th positive zero of J0 (`k >= 1`), e.g. `j0_zero(1) ≈ 2.4048`.
pub fn j0_zero(k: usize) -> f64 {
    assert!(k >= 1, "zeros are indexed from 1");
    // McMahon: zeros of J0 lie near (k - 1/4)π, consecutive zeros are
    // about π apart, so a ±0.5 bracket isolates exactly one.
    let beta = (k as f64 - 0.25) * std::f64::consts::PI;
    bisect_zero(j0, beta + 1.0 / (8.0 * beta) - 0.5, beta + 0.5)
}

/// `k`-th positive zero of J1 (`k >= 1`), e.g. `j1_zero(1) ≈ 3.8317`.
pub fn j1_zero(k: usize) -> f64 {
    assert!(k >= 1, "zeros are indexed from 1");
    let beta = (k as f64 + 0.25) * std::f64::consts::PI;
    bisect_zero(j1, beta + 3.0 / (8.0 * beta) - 0.5, beta + 0.5)
}

/// Bisection on a bracketing interval, run to f64 resolution.
fn bisect_zero(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo * fhi < 0.0,
        "bracket [{lo}, {hi}] does not straddle a sign change"
    );
    // 64 halvings take the bracket width below 1 ulp of any root < 16.
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval no longer representable
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn series_matches_reference_values() {
        // Reference values from Abramowitz & Stegun tables.
        assert_eq!(j0(0.0), 1.0);
        assert_eq!(j1(0.0), 0.0);
        assert_relative_eq!(j0(1.0), 0.765_197_686_557_966_6, max_relative = 1e-15);
        assert_relative_eq!(j1(1.0), 0.440_050_585_744_933_5, max_relative = 1e-15);
        assert_relative_eq!(j0(5.0), -0.177_596_771_314_338_3, max_relative = 1e-13);
        assert_relative_eq!(j1(5.0), -0.327_579_137_591_465_2, max_relative = 1e-13);
    }

    #[test]
    fn derivative_identity_j0_prime_is_minus_j1() {
        // Central difference of J0 against -J1 at a few points.
        let h = 1e-6;
        for &x in &[0.3, 1.1, 2.4, 4.8] {
            let d = (j0(x + h) - j0(x - h)) / (2.0 * h);
            assert_relative_eq!(d, -j1(x), max_relative = 1e-8);
        }
    }

    #[test]
    fn first_zeros_match_frozen_values() {
        assert_relative_eq!(j0_zero(1), 2.404_825_557_695_773, max_relative = 1e-14);
        assert_relative_eq!(j0_zero(2), 5.520_078_110_286_311, max_relative = 1e-14);
        assert_relative_eq!(j1_zero(1), 3.831_705_970_207_512, max_relative = 1e-14);
        assert_relative_eq!(j1_zero(2), 7.015_586_669_815_619, max_relative = 1e-14);
    }

    #[test]
    fn squared_first_zeros() {
        // The disk eigenvalues used elsewhere in the crate.
        assert_relative_eq!(
            j0_zero(1).powi(2),
            5.783_185_962_946_785,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            j1_zero(1).powi(2),
            14.681_970_642_123_893,
            max_relative = 1e-13
        );
    }

    #[test]
    fn zeros_actually_vanish() {
        assert!(j0(j0_zero(1)).abs() < 1e-15);
        assert!(j1(j1_zero(1)).abs() < 1e-15);
    }
}
