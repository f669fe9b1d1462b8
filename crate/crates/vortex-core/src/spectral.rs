//! Angular-block decomposition of the second variation.
//!
//! A perturbation of the symmetric vortex decomposes over Fourier
//! modes `b_n±(r) e^{inθ}`, and the second variation couples the
//! coefficients only in pairs `(1+n, 1−n)`. This module assembles the
//! resulting block quadratic forms as [`BlockOperator`]s:
//!
//! * the `n = 0` block — two decoupled scalar operators with angular
//!   index 1 (the phase/translation sector `a₁^±`),
//! * the `n = 1` block — the four-component real operator `M⁽¹⁾` on
//!   `(a₀^±, a₂^±)` (angular indices 0 and 2), whose ground eigenvalue
//!   `μ⁽¹⁾` decides stability, together with its complex counterpart
//!   `L⁽¹⁾`,
//! * general blocks `n ≥ 2` on `(b_{1+n}^±, b_{1−n}^±)`, exposed for
//!   verification.
//!
//! The ground eigenvalue of the full second variation equals
//! `min{μ⁽⁰⁾, μ⁽¹⁾}`; the higher blocks never go below it. The module
//! also evaluates the far-field test direction whose quadratic form
//! becomes negative for positive cross-coupling at large radius, and
//! checks the first-derivative identity satisfied by `(f/r, f′)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ground_eigenpair, second_eigenvalue, BlockOperator, RadialGrid};
use crate::model::GlParams;
use crate::profile::{Profile, TestField};

/// Which angular block a spectrum belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockId {
    /// The `n = 0` block (phase sector, scalar operators on `a₁^±`).
    N0,
    /// The `n = 1` block (`M⁽¹⁾` on `(a₀^±, a₂^±)`).
    N1,
    /// A general block `n ≥ 2`.
    General(u32),
}

impl std::fmt::Display for BlockId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BlockId::N0 => write!(f, "n0"),
            BlockId::N1 => write!(f, "n1"),
            BlockId::General(n) => write!(f, "n{n}"),
        }
    }
}

/// Real block eigenvector: radial coefficients on the grid nodes.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SpectralVector {
    /// Mode-0 coefficient, first component.
    pub a0_plus: Vec<f64>,
    /// Mode-0 coefficient, second component.
    pub a0_minus: Vec<f64>,
    /// Mode-2 coefficient, first component.
    pub a2_plus: Vec<f64>,
    /// Mode-2 coefficient, second component.
    pub a2_minus: Vec<f64>,
    /// Phase-sector coefficient (index-1), set for the `n = 0` block.
    pub a1_plus: Option<Vec<f64>>,
    /// See `a1_plus`.
    pub a1_minus: Option<Vec<f64>>,
}

impl SpectralVector {
    /// All-zero vector of the given length (no phase sector).
    pub fn zeros(n: usize) -> Self {
        SpectralVector {
            a0_plus: vec![0.0; n],
            a0_minus: vec![0.0; n],
            a2_plus: vec![0.0; n],
            a2_minus: vec![0.0; n],
            a1_plus: None,
            a1_minus: None,
        }
    }
}

/// Complex coefficients of the `n = 1` block `(b₀^±, b₂^±)`.
#[derive(Debug, Clone)]
pub struct ComplexBlockVector {
    /// Mode-0 complex coefficient, first component.
    pub b0_plus: Vec<Complex64>,
    /// Mode-0 complex coefficient, second component.
    pub b0_minus: Vec<Complex64>,
    /// Mode-2 complex coefficient, first component.
    pub b2_plus: Vec<Complex64>,
    /// Mode-2 complex coefficient, second component.
    pub b2_minus: Vec<Complex64>,
}

/// Ground eigenpair of one angular block.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    /// Which block.
    pub block_id: BlockId,
    /// Ground eigenvalue.
    pub mu: f64,
    /// Ground eigenvector (mass-normalized; sign-normalized).
    pub vec: SpectralVector,
    /// Gap to the second eigenvalue exceeds `1e-8`.
    pub simple: bool,
    /// Distance from the ground to the second eigenvalue.
    pub gap: f64,
}

fn check_profile(prof: &Profile) -> Result<()> {
    if prof.f_plus.len() != prof.grid.n_cells || prof.f_minus.len() != prof.grid.n_cells {
        return Err(Error::LengthMismatch {
            expected: prof.grid.n_cells,
            got: prof.f_plus.len().max(prof.f_minus.len()),
        });
    }
    Ok(())
}

/// Add the quartic coupling of one conjugation sector to an operator.
///
/// A sector is a real linear combination `s = Σ ε_c u_c` per
/// component family; the form gains
/// `mult · λ Σ_i w_i [A₊f₊² s₊² + A₋f₋² s₋² + 2B f₊f₋ s₊ s₋]`.
fn add_sector_coupling(
    op: &mut BlockOperator,
    grid: &RadialGrid,
    p: &GlParams,
    lambda: f64,
    fp: &[f64],
    fm: &[f64],
    plus: &[(usize, f64)],
    minus: &[(usize, f64)],
    mult: f64,
) {
    let n = grid.n_cells;
    let gpp: Vec<f64> = (0..n).map(|i| mult * lambda * p.a_plus * fp[i] * fp[i]).collect();
    let gmm: Vec<f64> = (0..n).map(|i| mult * lambda * p.a_minus * fm[i] * fm[i]).collect();
    let gpm: Vec<f64> = (0..n).map(|i| mult * lambda * p.b * fp[i] * fm[i]).collect();
    let scaled = |g: &[f64], s: f64| -> Vec<f64> { g.iter().map(|v| v * s).collect() };
    for (ia, &(ca, ea)) in plus.iter().enumerate() {
        for &(cb, eb) in &plus[ia..] {
            op.add_coupling(&grid.weights, ca, cb, &scaled(&gpp, ea * eb));
        }
    }
    for (ia, &(ca, ea)) in minus.iter().enumerate() {
        for &(cb, eb) in &minus[ia..] {
            op.add_coupling(&grid.weights, ca, cb, &scaled(&gmm, ea * eb));
        }
    }
    for &(ca, ea) in plus {
        for &(cb, eb) in minus {
            op.add_coupling(&grid.weights, ca, cb, &scaled(&gpm, ea * eb));
        }
    }
}

/// The two decoupled scalar operators of the `n = 0` block: angular
/// index 1, potentials `V_±`, no coupling (the quartic term cancels
/// against the phase direction).
pub fn assemble_q0(prof: &Profile, lambda: f64) -> Result<(BlockOperator, BlockOperator)> {
    check_profile(prof)?;
    let (vp, vm) = prof.potentials(lambda);
    let op_p = crate::grid::scalar_radial_operator(&prof.grid, 1, &vp)?;
    let op_m = crate::grid::scalar_radial_operator(&prof.grid, 1, &vm)?;
    Ok((op_p, op_m))
}

/// The four-component operator `M⁽¹⁾` on `(a₀^±, a₂^±)`, components
/// interleaved in the order `[a₀⁺, a₀⁻, a₂⁺, a₂⁻]` with angular
/// indices `[0, 0, 2, 2]`: potentials `V_±` on every component plus
/// the coupling `λ[A₊f₊²(a₀⁺−a₂⁺)² + A₋f₋²(a₀⁻−a₂⁻)²
/// + 2Bf₊f₋(a₀⁺−a₂⁺)(a₀⁻−a₂⁻)]`.
///
/// The quadratic form of the block equals `2π · vᵀ(stiffness)v` and
/// the mass matrix drops the same `2π`, so generalized eigenvalues
/// are unaffected.
pub fn assemble_m1(prof: &Profile, lambda: f64) -> Result<BlockOperator> {
    check_profile(prof)?;
    let grid = &prof.grid;
    let mut op = BlockOperator::new(grid, &[0, 0, 2, 2]);
    let (vp, vm) = prof.potentials(lambda);
    op.add_potential(&grid.weights, 0, &vp);
    op.add_potential(&grid.weights, 1, &vm);
    op.add_potential(&grid.weights, 2, &vp);
    op.add_potential(&grid.weights, 3, &vm);
    add_sector_coupling(
        &mut op,
        grid,
        &prof.params,
        lambda,
        &prof.f_plus,
        &prof.f_minus,
        &[(0, 1.0), (2, -1.0)],
        &[(1, 1.0), (3, -1.0)],
        1.0,
    );
    Ok(op)
}

/// Real 8-component realization of the complex `n = 1` operator
/// `L⁽¹⁾` on `(b₀^±, b₂^±)`: components `[Re b₀⁺, Im b₀⁺, Re b₀⁻,
/// Im b₀⁻, Re b₂⁺, Im b₂⁺, Re b₂⁻, Im b₂⁻]`, angular indices
/// `[0,0,0,0,2,2,2,2]`, potentials `V_±`, and the conjugation
/// coupling built from `s_± = b₂^± + conj(b₀^±)`, which splits into a
/// real sector `Re b₂ + Re b₀` and an imaginary sector
/// `Im b₂ − Im b₀`.
pub fn assemble_l1_complex(prof: &Profile, lambda: f64) -> Result<BlockOperator> {
    check_profile(prof)?;
    let grid = &prof.grid;
    let mut op = BlockOperator::new(grid, &[0, 0, 0, 0, 2, 2, 2, 2]);
    let (vp, vm) = prof.potentials(lambda);
    for c in [0usize, 1, 4, 5] {
        op.add_potential(&grid.weights, c, &vp);
    }
    for c in [2usize, 3, 6, 7] {
        op.add_potential(&grid.weights, c, &vm);
    }
    // Real sector.
    add_sector_coupling(
        &mut op,
        grid,
        &prof.params,
        lambda,
        &prof.f_plus,
        &prof.f_minus,
        &[(0, 1.0), (4, 1.0)],
        &[(2, 1.0), (6, 1.0)],
        1.0,
    );
    // Imaginary sector.
    add_sector_coupling(
        &mut op,
        grid,
        &prof.params,
        lambda,
        &prof.f_plus,
        &prof.f_minus,
        &[(1, -1.0), (5, 1.0)],
        &[(3, -1.0), (7, 1.0)],
        1.0,
    );
    Ok(op)
}

/// Real 8-component realization of the block `Q⁽ⁿ⁾`, `n ≥ 2`, on
/// `(b_{1+n}^±, b_{1−n}^±)`: components `[Re b₁₊ₙ⁺, Im b₁₊ₙ⁺,
/// Re b₁₊ₙ⁻, Im b₁₊ₙ⁻, Re b₁₋ₙ⁺, Im b₁₋ₙ⁺, Re b₁₋ₙ⁻, Im b₁₋ₙ⁻]`,
/// angular indices `1+n` (first four) and `1−n` (last four),
/// potentials `V_±`, coupling from `s_± = b_{1+n}^± + conj(b_{1−n}^±)`.
pub fn assemble_qn(prof: &Profile, lambda: f64, n: u32) -> Result<BlockOperator> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "general blocks require n ≥ 2 (use the dedicated n = 0, 1 assemblies); got {n}"
        )));
    }
    check_profile(prof)?;
    let grid = &prof.grid;
    let m_hi = 1 + n as i32;
    let m_lo = 1 - n as i32;
    let mut op = BlockOperator::new(grid, &[m_hi, m_hi, m_hi, m_hi, m_lo, m_lo, m_lo, m_lo]);
    let (vp, vm) = prof.potentials(lambda);
    for c in [0usize, 1, 4, 5] {
        op.add_potential(&grid.weights, c, &vp);
    }
    for c in [2usize, 3, 6, 7] {
        op.add_potential(&grid.weights, c, &vm);
    }
    // Re s = Re b_{1+n} + Re b_{1−n}.
    add_sector_coupling(
        &mut op,
        grid,
        &prof.params,
        lambda,
        &prof.f_plus,
        &prof.f_minus,
        &[(0, 1.0), (4, 1.0)],
        &[(2, 1.0), (6, 1.0)],
        1.0,
    );
    // Im s = Im b_{1+n} − Im b_{1−n}.
    add_sector_coupling(
        &mut op,
        grid,
        &prof.params,
        lambda,
        &prof.f_plus,
        &prof.f_minus,
        &[(1, 1.0), (5, -1.0)],
        &[(3, 1.0), (7, -1.0)],
        1.0,
    );
    Ok(op)
}

/// Internal full `n = 0` block on the complex mode-1 coefficient
/// `b₁^±` (four real components `[Re b₁⁺, Im b₁⁺, Re b₁⁻, Im b₁⁻]`).
/// The self-paired mode doubles the conjugation coupling, which acts
/// on the real parts only; the imaginary rows are exactly the scalar
/// operators of [`assemble_q0`].
pub(crate) fn assemble_n0_full(prof: &Profile, lambda: f64) -> Result<BlockOperator> {
    check_profile(prof)?;
    let grid = &prof.grid;
    let mut op = BlockOperator::new(grid, &[1, 1, 1, 1]);
    let (vp, vm) = prof.potentials(lambda);
    op.add_potential(&grid.weights, 0, &vp);
    op.add_potential(&grid.weights, 1, &vp);
    op.add_potential(&grid.weights, 2, &vm);
    op.add_potential(&grid.weights, 3, &vm);
    add_sector_coupling(
        &mut op,
        grid,
        &prof.params,
        lambda,
        &prof.f_plus,
        &prof.f_minus,
        &[(0, 1.0)],
        &[(2, 1.0)],
        2.0,
    );
    Ok(op)
}

fn spectrum_from_op(op: &BlockOperator, block_id: BlockId) -> Result<(f64, Vec<f64>, f64)> {
    let ground = ground_eigenpair(op, None)?;
    let second = second_eigenvalue(op, &ground)?;
    let _ = block_id;
    Ok((ground.value, ground.vector, second - ground.value))
}

/// Ground spectrum of the `n = 1` block `M⁽¹⁾`.
pub fn m1_spectrum(prof: &Profile, lambda: f64) -> Result<BlockSpectrum> {
    let op = assemble_m1(prof, lambda)?;
    let (mu, v, gap) = spectrum_from_op(&op, BlockId::N1)?;
    let n = prof.grid.n_cells;
    let mut vec = SpectralVector::zeros(n);
    for i in 0..n {
        vec.a0_plus[i] = v[i * 4];
        vec.a0_minus[i] = v[i * 4 + 1];
        vec.a2_plus[i] = v[i * 4 + 2];
        vec.a2_minus[i] = v[i * 4 + 3];
    }
    Ok(BlockSpectrum {
        block_id: BlockId::N1,
        mu,
        vec,
        simple: gap > 1e-8,
        gap,
    })
}

/// Ground spectrum of the `n = 0` block: the smaller of the two
/// scalar ground eigenvalues, with the winning eigenvector housed in
/// the phase sector. The gap is measured against the next candidate
/// across both scalars.
pub fn q0_spectrum(prof: &Profile, lambda: f64) -> Result<BlockSpectrum> {
    let (op_p, op_m) = assemble_q0(prof, lambda)?;
    let gp = ground_eigenpair(&op_p, None)?;
    let gm = ground_eigenpair(&op_m, None)?;
    let (winner, loser, win_plus) = if gp.value <= gm.value {
        (&gp, &gm, true)
    } else {
        (&gm, &gp, false)
    };
    let second_same = second_eigenvalue(if win_plus { &op_p } else { &op_m }, winner)?;
    let gap = second_same.min(loser.value) - winner.value;
    let n = prof.grid.n_cells;
    let mut vec = SpectralVector::zeros(n);
    let zero = vec![0.0; n];
    if win_plus {
        vec.a1_plus = Some(winner.vector.clone());
        vec.a1_minus = Some(zero);
    } else {
        vec.a1_plus = Some(zero);
        vec.a1_minus = Some(winner.vector.clone());
    }
    Ok(BlockSpectrum {
        block_id: BlockId::N0,
        mu: winner.value,
        vec,
        simple: gap > 1e-8,
        gap,
    })
}

/// Ground spectrum of a general block `n ≥ 2` (eigenvalue, gap and
/// simplicity only; the eight-component eigenvector stays internal).
pub fn qn_ground(prof: &Profile, lambda: f64, n: u32) -> Result<(f64, f64)> {
    let op = assemble_qn(prof, lambda, n)?;
    let (mu, _, gap) = spectrum_from_op(&op, BlockId::General(n))?;
    Ok((mu, gap))
}

/// Ground eigenvalues `(μ⁽⁰⁾, μ⁽¹⁾, min)` of the two decisive blocks.
/// The minimum equals the ground eigenvalue of the full second
/// variation.
pub fn mu_min(prof: &Profile, lambda: f64) -> Result<(f64, f64, f64)> {
    let q0 = q0_spectrum(prof, lambda)?;
    let m1 = m1_spectrum(prof, lambda)?;
    Ok((q0.mu, m1.mu, q0.mu.min(m1.mu)))
}

// ---------------------------------------------------------------------------
// Blockwise second variation (cross-check route for module profile)
// ---------------------------------------------------------------------------

/// Evaluate the second variation of a [`TestField`] as a sum of block
/// quadratic forms: every present mode `n` joins the block of its
/// pair class `|n−1|`, absent partners count as zero.
pub(crate) fn second_variation_blockwise(
    prof: &Profile,
    lambda: f64,
    field: &TestField,
) -> Result<f64> {
    check_profile(prof)?;
    let n_cells = prof.grid.n_cells;
    let mut classes: Vec<u32> = Vec::new();
    for m in &field.modes {
        if m.b_plus.len() != n_cells || m.b_minus.len() != n_cells {
            return Err(Error::LengthMismatch {
                expected: n_cells,
                got: m.b_plus.len().max(m.b_minus.len()),
            });
        }
        let class = (m.n - 1).unsigned_abs();
        if !classes.contains(&class) {
            classes.push(class);
        }
    }
    classes.sort_unstable();
    let zero = vec![Complex64::new(0.0, 0.0); n_cells];
    let coeffs = |n: i32| -> (&[Complex64], &[Complex64]) {
        match field.mode(n) {
            Some(m) => (&m.b_plus, &m.b_minus),
            None => (&zero, &zero),
        }
    };
    let mut total = 0.0;
    for &class in &classes {
        let (op, v) = match class {
            0 => {
                let op = assemble_n0_full(prof, lambda)?;
                let (bp, bm) = coeffs(1);
                let mut v = vec![0.0; op.dim()];
                for i in 0..n_cells {
                    v[i * 4] = bp[i].re;
                    v[i * 4 + 1] = bp[i].im;
                    v[i * 4 + 2] = bm[i].re;
                    v[i * 4 + 3] = bm[i].im;
                }
                (op, v)
            }
            1 => {
                let op = assemble_l1_complex(prof, lambda)?;
                let (b0p, b0m) = coeffs(0);
                let (b2p, b2m) = coeffs(2);
                let mut v = vec![0.0; op.dim()];
                for i in 0..n_cells {
                    v[i * 8] = b0p[i].re;
                    v[i * 8 + 1] = b0p[i].im;
                    v[i * 8 + 2] = b0m[i].re;
                    v[i * 8 + 3] = b0m[i].im;
                    v[i * 8 + 4] = b2p[i].re;
                    v[i * 8 + 5] = b2p[i].im;
                    v[i * 8 + 6] = b2m[i].re;
                    v[i * 8 + 7] = b2m[i].im;
                }
                (op, v)
            }
            k => {
                let op = assemble_qn(prof, lambda, k)?;
                let (hp, hm) = coeffs(1 + k as i32);
                let (lp, lm) = coeffs(1 - k as i32);
                let mut v = vec![0.0; op.dim()];
                for i in 0..n_cells {
                    v[i * 8] = hp[i].re;
                    v[i * 8 + 1] = hp[i].im;
                    v[i * 8 + 2] = hm[i].re;
                    v[i * 8 + 3] = hm[i].im;
                    v[i * 8 + 4] = lp[i].re;
                    v[i * 8 + 5] = lp[i].im;
                    v[i * 8 + 6] = lm[i].re;
                    v[i * 8 + 7] = lm[i].im;
                }
                (op, v)
            }
        };
        total += 2.0 * std::f64::consts::PI * op.stiffness.quadratic_form(&v);
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Simplicity and eigenvector structure
// ---------------------------------------------------------------------------

/// Result of [`simplicity_and_sign`].
#[derive(Debug, Clone, Copy)]
pub struct SimplicityReport {
    /// Gap to the second eigenvalue exceeds `1e-8`.
    pub simple: bool,
    /// The gap itself.
    pub gap: f64,
    /// After global sign normalization, `0 ≤ a₂⁺ ≤ a₀⁺` node-wise
    /// (within `1e-8`).
    pub plus_ordered: bool,
    /// Same for the second component.
    pub minus_ordered: bool,
    /// Worst ordering violation encountered (0 when ordered).
    pub worst_violation: f64,
}

/// Sign-normalize a block eigenvector, per component.
///
/// Each radial-sector pair `(a₀^s, a₂^s)` is flipped jointly when its
/// mode-0 mass `Σᵢ a₀^s(rᵢ)` is negative, so a ground state comes out
/// with `a₀^s ≥ 0`. The flip is per component rather than global: for
/// positive cross-coupling the two components of the minimizer are
/// anti-correlated (the coupling rewards opposite signs of `a₀ − a₂`),
/// so a single global flip cannot orient both. A phase sector, when
/// present, is oriented by its own mass.
pub fn sign_normalized(vec: &SpectralVector) -> SpectralVector {
    let mut v = vec.clone();
    for (a0, a2) in [
        (&mut v.a0_plus, &mut v.a2_plus),
        (&mut v.a0_minus, &mut v.a2_minus),
    ] {
        let weight: f64 = a0.iter().sum();
        if weight < 0.0 {
            for x in a0.iter_mut().chain(a2.iter_mut()) {
                *x = -*x;
            }
        }
    }
    for a1 in [&mut v.a1_plus, &mut v.a1_minus].into_iter().flatten() {
        let weight: f64 = a1.iter().sum();
        if weight < 0.0 {
            for x in a1.iter_mut() {
                *x = -*x;
            }
        }
    }
    v
}

/// Check that a ground spectrum of the `n = 1` block is simple and
/// that its eigenvector has the fixed-sign structure of a ground
/// state: each component pair `(a₀^s, a₂^s)` keeps one sign, with
/// `|a₂^s(r)| ≤ |a₀^s(r)|` node-wise. Signs are fixed by
/// [`sign_normalized`]; the check is then `0 ≤ a₂^s ≤ a₀^s` within
/// `1e-8` of the vector's sup norm. Degenerate inputs are reported,
/// not asserted.
pub fn simplicity_and_sign(spec: &BlockSpectrum) -> SimplicityReport {
    let v = sign_normalized(&spec.vec);
    let (a0p, a0m, a2p, a2m) = (v.a0_plus, v.a0_minus, v.a2_plus, v.a2_minus);
    let scale = a0p
        .iter()
        .chain(a0m.iter())
        .chain(a2p.iter())
        .chain(a2m.iter())
        .fold(0.0f64, |m, &x| m.max(x.abs()));
    let tol = 1e-8 * scale.max(1.0);
    let check = |a0: &[f64], a2: &[f64]| -> (bool, f64) {
        let mut worst = 0.0f64;
        for (x0, x2) in a0.iter().zip(a2) {
            worst = worst.max(-x2).max(x2 - x0);
        }
        (worst <= tol, worst.max(0.0))
    };
    let (plus_ordered, wp) = check(&a0p, &a2p);
    let (minus_ordered, wm) = check(&a0m, &a2m);
    SimplicityReport {
        simple: spec.simple,
        gap: spec.gap,
        plus_ordered,
        minus_ordered,
        worst_violation: wp.max(wm),
    }
}

// ---------------------------------------------------------------------------
// F/K change of variables
// ---------------------------------------------------------------------------

/// Half-sum/half-difference variables of the `n = 1` block.
#[derive(Debug, Clone)]
pub struct FkPair {
    /// `F_± = (a₀^± + a₂^±)/2`, first component.
    pub f_plus: Vec<f64>,
    /// Second component.
    pub f_minus: Vec<f64>,
    /// `K_± = (a₀^± − a₂^±)/2`, first component.
    pub k_plus: Vec<f64>,
    /// Second component.
    pub k_minus: Vec<f64>,
}

/// Forward transform `F = (a₀+a₂)/2, K = (a₀−a₂)/2`.
pub fn fk_transform(v: &SpectralVector) -> FkPair {
    let half = |a: &[f64], b: &[f64], sign: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| 0.5 * (x + sign * y)).collect()
    };
    FkPair {
        f_plus: half(&v.a0_plus, &v.a2_plus, 1.0),
        f_minus: half(&v.a0_minus, &v.a2_minus, 1.0),
        k_plus: half(&v.a0_plus, &v.a2_plus, -1.0),
        k_minus: half(&v.a0_minus, &v.a2_minus, -1.0),
    }
}

/// Inverse transform `a₀ = F + K, a₂ = F − K`.
pub fn fk_inverse(fk: &FkPair) -> SpectralVector {
    let comb = |f: &[f64], k: &[f64], sign: f64| -> Vec<f64> {
        f.iter().zip(k).map(|(x, y)| x + sign * y).collect()
    };
    SpectralVector {
        a0_plus: comb(&fk.f_plus, &fk.k_plus, 1.0),
        a0_minus: comb(&fk.f_minus, &fk.k_minus, 1.0),
        a2_plus: comb(&fk.f_plus, &fk.k_plus, -1.0),
        a2_minus: comb(&fk.f_minus, &fk.k_minus, -1.0),
        a1_plus: None,
        a1_minus: None,
    }
}

/// Face-difference gradient part of `∫ |u'|² r dr` with the Dirichlet
/// closure at the outer radius.
fn real_gradient_form(grid: &RadialGrid, u: &[f64]) -> f64 {
    let n = grid.n_cells;
    let h = grid.h;
    let mut s = 0.0;
    for j in 1..n {
        let d = u[j] - u[j - 1];
        s += grid.face(j) * d * d / h;
    }
    s += 2.0 * grid.radius * u[n - 1] * u[n - 1] / h;
    s
}

/// Evaluate the `n = 1` quadratic form in the F/K variables:
///
/// ```text
/// 4π ∫ |F±'|² + |K±'|² + (2/r²)(F± − K±)²  r dr
/// + 8λπ ∫ A₊f₊²K₊² + A₋f₋²K₋² + 2Bf₊f₋K₊K₋  r dr
/// + 4λπ ∫ V₊/λ (F₊²+K₊²) + V₋/λ (F₋²+K₋²)  r dr
/// ```
///
/// This equals `2π·vᵀ(M⁽¹⁾)v` for the corresponding `(a₀, a₂)`.
pub fn q1_fk_form(prof: &Profile, lambda: f64, fk: &FkPair) -> Result<f64> {
    check_profile(prof)?;
    let g = &prof.grid;
    let n = g.n_cells;
    if fk.f_plus.len() != n || fk.f_minus.len() != n || fk.k_plus.len() != n || fk.k_minus.len() != n
    {
        return Err(Error::LengthMismatch {
            expected: n,
            got: fk.f_plus.len(),
        });
    }
    let p = &prof.params;
    let (vp, vm) = prof.potentials(lambda);
    let pi = std::f64::consts::PI;
    let mut grad = 0.0;
    for u in [&fk.f_plus, &fk.f_minus, &fk.k_plus, &fk.k_minus] {
        grad += real_gradient_form(g, u);
    }
    let mut cent = 0.0;
    let mut coupling = 0.0;
    let mut pot = 0.0;
    for i in 0..n {
        let w = g.weights[i];
        let r = g.nodes[i];
        let dp = fk.f_plus[i] - fk.k_plus[i];
        let dm = fk.f_minus[i] - fk.k_minus[i];
        cent += w * 2.0 * (dp * dp + dm * dm) / (r * r);
        let kp = fk.k_plus[i];
        let km = fk.k_minus[i];
        coupling += w
            * (p.a_plus * prof.f_plus[i] * prof.f_plus[i] * kp * kp
                + p.a_minus * prof.f_minus[i] * prof.f_minus[i] * km * km
                + 2.0 * p.b * prof.f_plus[i] * prof.f_minus[i] * kp * km);
        pot += w
            * (vp[i] * (fk.f_plus[i] * fk.f_plus[i] + kp * kp)
                + vm[i] * (fk.f_minus[i] * fk.f_minus[i] + km * km));
    }
    Ok(4.0 * pi * (grad + cent) + 8.0 * lambda * pi * coupling + 4.0 * pi * pot)
}

// ---------------------------------------------------------------------------
// Derivative stencils (fourth order, odd/even extensions at the axis)
// ---------------------------------------------------------------------------

/// Fourth-order first derivative on cell centers of an odd function
/// (`f(-r) = -f(r)`; ghosts mirror with a sign). One-sided stencils
/// of the same order near the outer boundary.
fn d1_fourth_order_odd(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 5, "need at least five nodes for fourth-order stencils");
    let mut d = vec![0.0; n];
    let at = |i: isize| -> f64 {
        if i >= 0 {
            f[i as usize]
        } else {
            // Node -1 sits at -h/2 → mirror of node 0, etc.
            -f[(-i - 1) as usize]
        }
    };
    for i in 0..n {
        let ii = i as isize;
        d[i] = if i + 2 < n {
            (at(ii - 2) - 8.0 * at(ii - 1) + 8.0 * at(ii + 1) - at(ii + 2)) / (12.0 * h)
        } else if i + 1 < n {
            (-at(ii - 3) + 6.0 * at(ii - 2) - 18.0 * at(ii - 1) + 10.0 * at(ii)
                + 3.0 * at(ii + 1))
                / (12.0 * h)
        } else {
            (3.0 * at(ii - 4) - 16.0 * at(ii - 3) + 36.0 * at(ii - 2) - 48.0 * at(ii - 1)
                + 25.0 * at(ii))
                / (12.0 * h)
        };
    }
    d
}

/// Second-order first and second derivatives of an even function on
/// cell centers (`g(-r) = g(r)`), one-sided at the outer boundary.
fn d12_second_order_even(g: &[f64], h: f64) -> (Vec<f64>, Vec<f64>) {
    let n = g.len();
    assert!(n >= 5, "need at least five nodes");
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let at = |i: isize| -> f64 {
        if i >= 0 {
            g[i as usize]
        } else {
            g[(-i - 1) as usize]
        }
    };
    for i in 0..n {
        let ii = i as isize;
        if i + 1 < n {
            d1[i] = (at(ii + 1) - at(ii - 1)) / (2.0 * h);
            d2[i] = (at(ii + 1) - 2.0 * at(ii) + at(ii - 1)) / (h * h);
        } else {
            d1[i] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * h);
            d2[i] = (35.0 * g[n - 1] - 104.0 * g[n - 2] + 114.0 * g[n - 3] - 56.0 * g[n - 4]
                + 11.0 * g[n - 5])
                / (12.0 * h * h);
        }
    }
    (d1, d2)
}

// ---------------------------------------------------------------------------
// First-derivative identity of the profile
// ---------------------------------------------------------------------------

/// Residual report of [`tilde_solution_check`].
///
/// The per-equation sups and `sup` are taken over `r ≥ min(1, R/4)`;
/// `sup_all_nodes` additionally includes the axis cells, where the
/// residual of a discrete solution does not converge (see
/// [`tilde_solution_check`]).
#[derive(Debug, Clone, Copy)]
pub struct TildeResidual {
    /// Sup-norm residual of the `f₊/r` equation.
    pub sup_f_plus: f64,
    /// Sup-norm residual of the `f₋/r` equation.
    pub sup_f_minus: f64,
    /// Sup-norm residual of the `f₊'` equation.
    pub sup_k_plus: f64,
    /// Sup-norm residual of the `f₋'` equation.
    pub sup_k_minus: f64,
    /// Overall sup over the checked region.
    pub sup: f64,
    /// Overall sup over every node, axis cells included.
    pub sup_all_nodes: f64,
}

/// Verify the first-derivative identity of the profile equations: the
/// pair `(F̃, K̃) = (f/r, f')` of any solution satisfies
///
/// ```text
/// -F̃'' - F̃'/r + (2/r²)(F̃ - K̃) + V F̃ = 0
/// -K̃'' - K̃'/r + (2/r²)(K̃ - F̃) + V K̃ + 2λA f² K̃ + 2λB f₊f₋ K̃_other = 0
/// ```
///
/// (differentiate the profile equation once). Evaluated with
/// fourth-order differences for `K̃` and second-order differences for
/// the outer derivatives.
///
/// The reported sup norms cover `r ≥ min(1, R/4)` and shrink as
/// `O(h²)` on refinement for a converged profile, while any
/// perturbation of the profile blows them up. The axis cells are
/// reported separately (`sup_all_nodes`) because they cannot
/// converge: the cell-centered scheme's first-derivative truncation
/// `−(h²/6) f‴(r)/r` is singular at the axis (`f‴` is even and
/// nonzero at 0), which deposits an `O(h² · r log r)` error mode into
/// every discrete solution; `e = a·r·log r` gives `e/r − e′ ≡ −a`, so
/// the `2/r²` factor amplifies that mode to `O(h²/r²)` — order one at
/// the first node, convergent only at fixed physical radius.
pub fn tilde_solution_check(prof: &Profile) -> Result<TildeResidual> {
    check_profile(prof)?;
    let g = &prof.grid;
    let n = g.n_cells;
    if n < 5 {
        return Err(Error::ResolutionGuard(
            "first-derivative identity needs at least five cells".into(),
        ));
    }
    let h = g.h;
    let p = &prof.params;
    let le = prof.lambda_eff;
    let (vp, vm) = prof.potentials(le);
    let r_floor = 1.0f64.min(0.25 * g.radius);
    let mut sup = [0.0f64; 4];
    let mut sup_all = 0.0f64;
    let kt_p = d1_fourth_order_odd(&prof.f_plus, h);
    let kt_m = d1_fourth_order_odd(&prof.f_minus, h);
    let ft_p: Vec<f64> = (0..n).map(|i| prof.f_plus[i] / g.nodes[i]).collect();
    let ft_m: Vec<f64> = (0..n).map(|i| prof.f_minus[i] / g.nodes[i]).collect();
    let (ftp1, ftp2) = d12_second_order_even(&ft_p, h);
    let (ftm1, ftm2) = d12_second_order_even(&ft_m, h);
    let (ktp1, ktp2) = d12_second_order_even(&kt_p, h);
    let (ktm1, ktm2) = d12_second_order_even(&kt_m, h);
    for i in 0..n {
        let r = g.nodes[i];
        let fp2 = prof.f_plus[i] * prof.f_plus[i];
        let fm2 = prof.f_minus[i] * prof.f_minus[i];
        let fpm = prof.f_plus[i] * prof.f_minus[i];
        let res_fp = -ftp2[i] - ftp1[i] / r + 2.0 / (r * r) * (ft_p[i] - kt_p[i]) + vp[i] * ft_p[i];
        let res_fm = -ftm2[i] - ftm1[i] / r + 2.0 / (r * r) * (ft_m[i] - kt_m[i]) + vm[i] * ft_m[i];
        let res_kp = -ktp2[i] - ktp1[i] / r + 2.0 / (r * r) * (kt_p[i] - ft_p[i])
            + vp[i] * kt_p[i]
            + 2.0 * le * p.a_plus * fp2 * kt_p[i]
            + 2.0 * le * p.b * fpm * kt_m[i];
        let res_km = -ktm2[i] - ktm1[i] / r + 2.0 / (r * r) * (kt_m[i] - ft_m[i])
            + vm[i] * kt_m[i]
            + 2.0 * le * p.a_minus * fm2 * kt_m[i]
            + 2.0 * le * p.b * fpm * kt_p[i];
        let node_max = res_fp
            .abs()
            .max(res_fm.abs())
            .max(res_kp.abs())
            .max(res_km.abs());
        sup_all = sup_all.max(node_max);
        if r >= r_floor {
            sup[0] = sup[0].max(res_fp.abs());
            sup[1] = sup[1].max(res_fm.abs());
            sup[2] = sup[2].max(res_kp.abs());
            sup[3] = sup[3].max(res_km.abs());
        }
    }
    Ok(TildeResidual {
        sup_f_plus: sup[0],
        sup_f_minus: sup[1],
        sup_k_plus: sup[2],
        sup_k_minus: sup[3],
        sup: sup.iter().fold(0.0f64, |m, &x| m.max(x)),
        sup_all_nodes: sup_all,
    })
}

// ---------------------------------------------------------------------------
// Far-field instability direction
// ---------------------------------------------------------------------------

/// Smooth cubic ramp: 1 on `[0, 1/2]`, descending to 0 at 1.
fn cutoff_ramp(x: f64) -> f64 {
    if x <= 0.5 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let s = 2.0 * x - 1.0;
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

/// Evaluate the far-field test direction of the instability argument.
///
/// From a large-disk profile build `L₊ = f₊/r, L₋ = −f₋/r,
/// P₊ = f₊', P₋ = −f₋'`, multiply by the cutoff `η(r/cutoff_r)` (one
/// on the inner half, smooth ramp to zero), assemble the test vector
/// `â₀^± = η(L±+P±)/2, â₂^± = η(L±−P±)/2`, and return
///
/// * the quadratic form `Q̆ = 2π·vᵀ(M⁽¹⁾)v` of that vector, and
/// * `limit_integral = −8πB ∫ f₊f₋f₊'f₋' r dr`, the closed-form limit
///   the form approaches as the radius and cutoff grow.
///
/// For positive cross-coupling and monotone profiles the limit is
/// negative — the source of large-λ instability.
pub fn instability_direction(prof_entire: &Profile, cutoff_r: f64) -> Result<(f64, f64)> {
    check_profile(prof_entire)?;
    let g = &prof_entire.grid;
    if !(cutoff_r > 0.0) || cutoff_r > g.radius * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "cutoff {cutoff_r} must lie in (0, {}]",
            g.radius
        )));
    }
    let n = g.n_cells;
    if n < 5 {
        return Err(Error::ResolutionGuard(
            "instability direction needs at least five cells".into(),
        ));
    }
    let dp = d1_fourth_order_odd(&prof_entire.f_plus, g.h);
    let dm = d1_fourth_order_odd(&prof_entire.f_minus, g.h);
    let op = assemble_m1(prof_entire, prof_entire.lambda_eff)?;
    let mut v = vec![0.0; op.dim()];
    for i in 0..n {
        let r = g.nodes[i];
        let eta = cutoff_ramp(r / cutoff_r);
        let (lp, pp) = (prof_entire.f_plus[i] / r, dp[i]);
        let (lm, pm) = (-prof_entire.f_minus[i] / r, -dm[i]);
        v[i * 4] = eta * 0.5 * (lp + pp);
        v[i * 4 + 1] = eta * 0.5 * (lm + pm);
        v[i * 4 + 2] = eta * 0.5 * (lp - pp);
        v[i * 4 + 3] = eta * 0.5 * (lm - pm);
    }
    let q = 2.0 * std::f64::consts::PI * op.stiffness.quadratic_form(&v);
    let mut integral = 0.0;
    for i in 0..n {
        integral += g.weights[i] * prof_entire.f_plus[i] * prof_entire.f_minus[i] * dp[i] * dm[i];
    }
    let limit = -8.0 * std::f64::consts::PI * prof_entire.params.b * integral;
    Ok((q, limit))
}
