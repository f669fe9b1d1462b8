//! Model parameters, admissibility conditions and derived bounds.
//!
//! The reduced energy is controlled by five constants: the diagonal
//! self-couplings `a_plus`, `a_minus`, the cross-coupling `b`, and the
//! far-field moduli `t_plus`, `t_minus`. The admissible region is
//!
//! ```text
//! a± > 0,   b² < a_plus · a_minus,   t± > 0,
//! ```
//!
//! which makes the quartic potential coercive with a strict minimum at
//! `(|psi+|², |psi-|²) = (t+², t-²)`.

use serde::{Deserialize, Serialize};

use crate::bessel;
use crate::error::{Error, Result};

/// Coupling and far-field parameters of the two-component energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlParams {
    /// Self-coupling of the first component (`A+ > 0`).
    pub a_plus: f64,
    /// Self-coupling of the second component (`A- > 0`).
    pub a_minus: f64,
    /// Cross-coupling (`b² < a_plus·a_minus`), any sign.
    pub b: f64,
    /// Far-field modulus of the first component (`t+ > 0`).
    pub t_plus: f64,
    /// Far-field modulus of the second component (`t- > 0`).
    pub t_minus: f64,
}

/// Two-species condensate constants that reduce to [`GlParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BecParams {
    /// Mass of species 1.
    pub m1: f64,
    /// Mass of species 2.
    pub m2: f64,
    /// Intra-species interaction of species 1.
    pub g1: f64,
    /// Intra-species interaction of species 2.
    pub g2: f64,
    /// Inter-species interaction.
    pub g12: f64,
    /// Chemical potential of species 1.
    pub mu1: f64,
    /// Chemical potential of species 2.
    pub mu2: f64,
    /// Reduced Planck constant in the chosen units.
    pub hbar: f64,
}

/// A-priori sup-norm bound on minimizers and its ingredients.
///
/// Any minimizer satisfies `|psi±| ≤ Λ` with
/// `Λ² = min { 2M/λ_s , t+² + t-² }`, where `λ_s` is the smallest
/// eigenvalue of the coupling matrix `[[a+, b], [b, a-]]` and
/// `M = max { a+ t+² + b t-² , a- t-² + b t+² }`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundReport {
    /// Smallest eigenvalue of the coupling matrix; positive under the
    /// admissibility conditions.
    pub lambda_s: f64,
    /// The constant `M`; positive under the admissibility conditions.
    pub m_const: f64,
    /// First candidate, `2M/λ_s`.
    pub quotient_candidate: f64,
    /// Second candidate, `t+² + t-²`.
    pub sum_candidate: f64,
    /// `Λ²`, the smaller of the two candidates.
    pub lambda_squared: f64,
    /// `Λ` itself.
    pub sup_bound: f64,
}

/// Check the admissibility conditions, returning the first violated
/// condition as data (`None` means the parameters are admissible).
///
/// ```
/// use vortex_core::model::{validate_params, GlParams};
/// let p = GlParams { a_plus: 1.0, a_minus: 1.0, b: 1.5, t_plus: 1.0, t_minus: 1.0 };
/// assert_eq!(validate_params(&p), Some("b^2 < a_plus*a_minus"));
/// ```
pub fn validate_params(p: &GlParams) -> Option<&'static str> {
    // NaN fails every comparison, so corrupt inputs are caught too.
    if !(p.a_plus > 0.0) {
        return Some("a_plus > 0");
    }
    if !(p.a_minus > 0.0) {
        return Some("a_minus > 0");
    }
    if !(p.b * p.b < p.a_plus * p.a_minus) {
        return Some("b^2 < a_plus*a_minus");
    }
    if !(p.t_plus > 0.0) {
        return Some("t_plus > 0");
    }
    if !(p.t_minus > 0.0) {
        return Some("t_minus > 0");
    }
    None
}

/// [`validate_params`] as a `Result` for use inside solver pipelines.
pub fn require_admissible(p: &GlParams) -> Result<()> {
    match validate_params(p) {
        None => Ok(()),
        Some(cond) => Err(Error::InvalidParams(cond.to_string())),
    }
}

/// Sup-norm a-priori bound `Λ` for minimizers, with its ingredients.
///
/// ```
/// use vortex_core::model::{sup_bound, GlParams};
/// let p = GlParams { a_plus: 1.0, a_minus: 1.0, b: 0.5, t_plus: 1.0, t_minus: 1.0 };
/// let r = sup_bound(&p).unwrap();
/// assert!((r.lambda_s - 0.5).abs() < 1e-15);
/// assert!((r.lambda_squared - 2.0).abs() < 1e-15);
/// ```
pub fn sup_bound(p: &GlParams) -> Result<BoundReport> {
    require_admissible(p)?;
    let half_sum = 0.5 * (p.a_plus + p.a_minus);
    let half_diff = 0.5 * (p.a_plus - p.a_minus);
    let lambda_s = half_sum - (half_diff * half_diff + p.b * p.b).sqrt();
    let tp2 = p.t_plus * p.t_plus;
    let tm2 = p.t_minus * p.t_minus;
    let m_const = (p.a_plus * tp2 + p.b * tm2).max(p.a_minus * tm2 + p.b * tp2);
    let quotient_candidate = 2.0 * m_const / lambda_s;
    let sum_candidate = tp2 + tm2;
    let lambda_squared = quotient_candidate.min(sum_candidate);
    Ok(BoundReport {
        lambda_s,
        m_const,
        quotient_candidate,
        sum_candidate,
        lambda_squared,
        sup_bound: lambda_squared.sqrt(),
    })
}

/// Scale threshold below which the symmetric vortex is the unique
/// critical point: `λ* = j²₀₁ / C` with
/// `C = a+ t+² + a- t-² + |b| (t+² + t-²)` and `j₀₁` the first zero of
/// the Bessel function J0 (the first Dirichlet eigenvalue of the unit
/// disk is `j²₀₁`).
pub fn small_lambda_uniqueness_bound(p: &GlParams) -> Result<f64> {
    require_admissible(p)?;
    let tp2 = p.t_plus * p.t_plus;
    let tm2 = p.t_minus * p.t_minus;
    let c = p.a_plus * tp2 + p.a_minus * tm2 + p.b.abs() * (tp2 + tm2);
    Ok(disk_dirichlet_eigenvalue() / c)
}

/// First Dirichlet eigenvalue of the Laplacian on the unit disk, i.e.
/// the squared first zero of J0. Computed once, at runtime.
pub fn disk_dirichlet_eigenvalue() -> f64 {
    use std::sync::OnceLock;
    static CELL: OnceLock<f64> = OnceLock::new();
    *CELL.get_or_init(|| bessel::j0_zero(1).powi(2))
}

/// Reduce condensate constants to [`GlParams`] plus the scale `λ`.
///
/// The reduction is
///
/// ```text
/// λ  = √(m1 m2) / ħ²,
/// a+ = (m1/m2) g1,            a- = (m2/m1) g2,        b = g12,
/// t+² = (μ1 g2 - μ2 g12)/(g1 g2 - g12²) · √(m2/m1),
/// t-² = (μ2 g1 - μ1 g12)/(g1 g2 - g12²) · √(m1/m2).
/// ```
///
/// Parameter sets that land outside the admissible region are
/// rejected, naming the offending derived quantity.
pub fn bec_map(bp: &BecParams) -> Result<(GlParams, f64)> {
    if !(bp.m1 > 0.0) {
        return Err(Error::BecRejected("m1 must be positive".into()));
    }
    if !(bp.m2 > 0.0) {
        return Err(Error::BecRejected("m2 must be positive".into()));
    }
    if !(bp.hbar > 0.0) {
        return Err(Error::BecRejected("hbar must be positive".into()));
    }
    let lambda = (bp.m1 * bp.m2).sqrt() / (bp.hbar * bp.hbar);
    let a_plus = bp.m1 / bp.m2 * bp.g1;
    let a_minus = bp.m2 / bp.m1 * bp.g2;
    let b = bp.g12;
    let det = bp.g1 * bp.g2 - bp.g12 * bp.g12;
    if !(det > 0.0) {
        return Err(Error::BecRejected(format!(
            "g1*g2 - g12^2 = {det} must be positive"
        )));
    }
    let tp2 = (bp.mu1 * bp.g2 - bp.mu2 * bp.g12) / det * (bp.m2 / bp.m1).sqrt();
    let tm2 = (bp.mu2 * bp.g1 - bp.mu1 * bp.g12) / det * (bp.m1 / bp.m2).sqrt();
    if !(tp2 > 0.0) {
        return Err(Error::BecRejected(format!("t_plus^2 = {tp2} must be positive")));
    }
    if !(tm2 > 0.0) {
        return Err(Error::BecRejected(format!(
            "t_minus^2 = {tm2} must be positive"
        )));
    }
    let gl = GlParams {
        a_plus,
        a_minus,
        b,
        t_plus: tp2.sqrt(),
        t_minus: tm2.sqrt(),
    };
    if let Some(cond) = validate_params(&gl) {
        return Err(Error::BecRejected(format!("mapped parameters violate {cond}")));
    }
    Ok((gl, lambda))
}

/// Convenience constructor for equal-component parameter sets
/// (`a± = a`, `t± = t`), used widely in tests and examples.
pub fn balanced(a: f64, t: f64, b: f64) -> GlParams {
    GlParams {
        a_plus: a,
        a_minus: a,
        b,
        t_plus: t,
        t_minus: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn validation_names_first_violated_condition() {
        let ok = balanced(1.0, 1.0, 0.5);
        assert_eq!(validate_params(&ok), None);
        let mut p = ok;
        p.a_plus = -1.0;
        assert_eq!(validate_params(&p), Some("a_plus > 0"));
        let mut p = ok;
        p.b = -1.0001;
        assert_eq!(validate_params(&p), Some("b^2 < a_plus*a_minus"));
        let mut p = ok;
        p.t_minus = 0.0;
        assert_eq!(validate_params(&p), Some("t_minus > 0"));
        let mut p = ok;
        p.t_plus = f64::NAN;
        assert_eq!(validate_params(&p), Some("t_plus > 0"));
    }

    #[test]
    fn sup_bound_examples() {
        // Balanced, attractive cross-coupling.
        let r = sup_bound(&balanced(1.0, 1.0, 0.5)).unwrap();
        assert_relative_eq!(r.lambda_s, 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.m_const, 1.5, max_relative = 1e-15);
        assert_relative_eq!(r.quotient_candidate, 6.0, max_relative = 1e-15);
        assert_relative_eq!(r.lambda_squared, 2.0, max_relative = 1e-15);

        // Balanced, repulsive cross-coupling: λ_s unchanged, M smaller.
        let r = sup_bound(&balanced(1.0, 1.0, -0.5)).unwrap();
        assert_relative_eq!(r.lambda_s, 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.m_const, 0.5, max_relative = 1e-15);
        assert_relative_eq!(r.quotient_candidate, 2.0, max_relative = 1e-15);
        assert_relative_eq!(r.lambda_squared, 2.0, max_relative = 1e-15);

        // Asymmetric decoupled case.
        let p = GlParams {
            a_plus: 2.0,
            a_minus: 1.0,
            b: 0.0,
            t_plus: 1.0,
            t_minus: 2.0,
        };
        let r = sup_bound(&p).unwrap();
        assert_relative_eq!(r.lambda_s, 1.0, max_relative = 1e-15);
        assert_relative_eq!(r.m_const, 4.0, max_relative = 1e-15);
        assert_relative_eq!(r.quotient_candidate, 8.0, max_relative = 1e-15);
        assert_relative_eq!(r.sum_candidate, 5.0, max_relative = 1e-15);
        assert_relative_eq!(r.lambda_squared, 5.0, max_relative = 1e-15);
    }

    #[test]
    fn uniqueness_bound_balanced_example() {
        let bound = small_lambda_uniqueness_bound(&balanced(1.0, 1.0, 0.0)).unwrap();
        assert_relative_eq!(bound, 5.783_185_962_946_785 / 2.0, max_relative = 1e-12);
        // |b| enters the denominator regardless of sign.
        let b_plus = small_lambda_uniqueness_bound(&balanced(1.0, 1.0, 0.3)).unwrap();
        let b_minus = small_lambda_uniqueness_bound(&balanced(1.0, 1.0, -0.3)).unwrap();
        assert_relative_eq!(b_plus, b_minus, max_relative = 1e-15);
        assert_relative_eq!(b_plus, 5.783_185_962_946_785 / 2.6, max_relative = 1e-12);
    }

    #[test]
    fn bec_map_identity_example() {
        let bp = BecParams {
            m1: 1.0,
            m2: 1.0,
            g1: 1.0,
            g2: 1.0,
            g12: 0.0,
            mu1: 1.0,
            mu2: 1.0,
            hbar: 1.0,
        };
        let (gl, lambda) = bec_map(&bp).unwrap();
        assert_relative_eq!(lambda, 1.0, max_relative = 1e-15);
        assert_relative_eq!(gl.a_plus, 1.0, max_relative = 1e-15);
        assert_relative_eq!(gl.a_minus, 1.0, max_relative = 1e-15);
        assert_eq!(gl.b, 0.0);
        assert_relative_eq!(gl.t_plus, 1.0, max_relative = 1e-15);
        assert_relative_eq!(gl.t_minus, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn bec_map_mass_ratio_example() {
        let bp = BecParams {
            m1: 4.0,
            m2: 1.0,
            g1: 1.0,
            g2: 4.0,
            g12: 0.0,
            mu1: 1.0,
            mu2: 1.0,
            hbar: 1.0,
        };
        let (gl, lambda) = bec_map(&bp).unwrap();
        assert_relative_eq!(lambda, 2.0, max_relative = 1e-15);
        assert_relative_eq!(gl.a_plus, 4.0, max_relative = 1e-15);
        assert_relative_eq!(gl.a_minus, 1.0, max_relative = 1e-15);
        assert_relative_eq!(gl.t_plus * gl.t_plus, 0.5, max_relative = 1e-15);
        assert_relative_eq!(gl.t_minus * gl.t_minus, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn bec_map_rejects_negative_density() {
        // Strong cross-repulsion drives t-² negative.
        let bp = BecParams {
            m1: 1.0,
            m2: 1.0,
            g1: 1.0,
            g2: 1.0,
            g12: 0.9,
            mu1: 1.0,
            mu2: 0.5,
            hbar: 1.0,
        };
        match bec_map(&bp) {
            Err(Error::BecRejected(msg)) => assert!(msg.contains("t_minus^2")),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    proptest! {
        /// Under the admissibility conditions both bound ingredients
        /// are strictly positive and Λ² never exceeds t+²+t-².
        #[test]
        fn bound_ingredients_positive(
            a_plus in 0.05f64..8.0,
            a_minus in 0.05f64..8.0,
            frac in -0.999f64..0.999,
            t_plus in 0.05f64..4.0,
            t_minus in 0.05f64..4.0,
        ) {
            let b = frac * (a_plus * a_minus).sqrt();
            let p = GlParams { a_plus, a_minus, b, t_plus, t_minus };
            prop_assert!(validate_params(&p).is_none());
            let r = sup_bound(&p).unwrap();
            prop_assert!(r.lambda_s > 0.0);
            prop_assert!(r.m_const > 0.0);
            prop_assert!(r.lambda_squared <= r.sum_candidate + 1e-15);
            prop_assert!(r.lambda_squared > 0.0);
        }

        /// Whenever the condensate map succeeds, the result is
        /// admissible and the scale is positive.
        #[test]
        fn bec_map_lands_admissible(
            m1 in 0.2f64..5.0,
            m2 in 0.2f64..5.0,
            g1 in 0.1f64..4.0,
            g2 in 0.1f64..4.0,
            g12 in -1.5f64..1.5,
            mu1 in 0.1f64..3.0,
            mu2 in 0.1f64..3.0,
        ) {
            let bp = BecParams { m1, m2, g1, g2, g12, mu1, mu2, hbar: 1.0 };
            if let Ok((gl, lambda)) = bec_map(&bp) {
                prop_assert!(validate_params(&gl).is_none());
                prop_assert!(lambda > 0.0);
            }
        }
    }
}
