//! Radial vortex profiles: the coupled boundary-value problem, its
//! damped-Newton solver, energies, and far-field diagnostics.
//!
//! A symmetric degree-one configuration `psi± = f±(r) e^{iθ}` reduces
//! the Euler-Lagrange equations to the radial system
//!
//! ```text
//! -f±'' - f±'/r + f±/r² + λ [ A±(f±² - t±²) + B(f∓² - t∓²) ] f± = 0
//! ```
//!
//! on `(0, R)` with `f±(0) = 0` (regularity) and `f±(R)` prescribed.
//! Two frames appear: the unit disk carries the factor `λ` explicitly
//! (`lambda_eff = λ`, `R = 1`), while the rescaled frame solves with
//! `lambda_eff = 1` on `R = √λ`. The solver is frame-agnostic; the
//! [`Profile`] records which frame it lives in.
//!
//! The discretization matches [`crate::grid`]: cell centers, face-flux
//! gradients, ghost-mirrored Dirichlet data at `R`. Newton corrections
//! are damped by a residual line search, and a continuation ladder
//! (first in the cross-coupling, then in the potential strength)
//! catches starts outside the basin of attraction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{make_grid, RadialGrid};
use crate::linalg::{norm2, GeneralBanded, SymBanded};
use crate::model::{require_admissible, GlParams};

/// Initial iterate fed to the Newton solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialGuess {
    /// `f±(r) = t± · r / √(r² + 1/λ)`: correct slope at the origin and
    /// correct limit at infinity, with the core width of the true
    /// solution. The default.
    CoreScaled,
    /// `f±(r) = t± · r / R`, a structureless ramp; mainly used to
    /// confirm that distinct starts reach the same solution.
    LinearRamp,
}

/// Options for [`solve_profile`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Convergence threshold on the scaled sup norm of the residual
    /// (the discrete equations divided by the quadrature weights, i.e.
    /// a pointwise ODE residual).
    pub tol: f64,
    /// Newton iteration cap per continuation stage.
    pub max_iter: usize,
    /// Starting iterate.
    pub initial: InitialGuess,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-9,
            max_iter: 60,
            initial: InitialGuess::CoreScaled,
        }
    }
}

/// A converged radial profile.
#[derive(Debug, Clone)]
pub struct Profile {
    /// The grid the amplitudes live on.
    pub grid: RadialGrid,
    /// First-component amplitude at the nodes.
    pub f_plus: Vec<f64>,
    /// Second-component amplitude at the nodes.
    pub f_minus: Vec<f64>,
    /// Parameters the profile was solved with.
    pub params: GlParams,
    /// Boundary values imposed at `r = R` (usually `t±`; the corrected
    /// far-field values when requested).
    pub bc_plus: f64,
    /// See `bc_plus`.
    pub bc_minus: f64,
    /// Potential multiplier the profile was solved with: `1` in the
    /// rescaled frame, `λ` on the unit disk.
    pub lambda_eff: f64,
    /// True when `lambda_eff == 1` (radius plays the role of `√λ`).
    pub radius_is_rescaled: bool,
    /// Total Newton iterations across continuation stages.
    pub newton_iterations: usize,
    /// Final scaled sup-norm residual per component.
    pub final_residual: (f64, f64),
}

impl Profile {
    /// Wrap existing nodal data as a profile (no solve). Used for
    /// synthetic configurations in diagnostics and tests.
    pub fn from_arrays(
        grid: RadialGrid,
        f_plus: Vec<f64>,
        f_minus: Vec<f64>,
        params: GlParams,
        bc_plus: f64,
        bc_minus: f64,
        lambda_eff: f64,
    ) -> Result<Self> {
        if f_plus.len() != grid.n_cells || f_minus.len() != grid.n_cells {
            return Err(Error::LengthMismatch {
                expected: grid.n_cells,
                got: f_plus.len().max(f_minus.len()),
            });
        }
        Ok(Profile {
            radius_is_rescaled: lambda_eff == 1.0,
            grid,
            f_plus,
            f_minus,
            params,
            bc_plus,
            bc_minus,
            lambda_eff,
            newton_iterations: 0,
            final_residual: (f64::NAN, f64::NAN),
        })
    }

    /// Linearization potentials
    /// `V± = λ [ A±(f±² - t±²) + B(f∓² - t∓²) ]`
    /// on the nodes, for a caller-chosen multiplier `λ`.
    pub fn potentials(&self, lambda: f64) -> (Vec<f64>, Vec<f64>) {
        let p = &self.params;
        let tp2 = p.t_plus * p.t_plus;
        let tm2 = p.t_minus * p.t_minus;
        let n = self.grid.n_cells;
        let mut vp = vec![0.0; n];
        let mut vm = vec![0.0; n];
        for i in 0..n {
            let dp = self.f_plus[i] * self.f_plus[i] - tp2;
            let dm = self.f_minus[i] * self.f_minus[i] - tm2;
            vp[i] = lambda * (p.a_plus * dp + p.b * dm);
            vm[i] = lambda * (p.a_minus * dm + p.b * dp);
        }
        (vp, vm)
    }

    /// One-sided second-order boundary derivatives `f±'(R)` from the
    /// last two nodes and the imposed boundary value.
    pub fn boundary_derivatives(&self) -> (f64, f64) {
        let n = self.grid.n_cells;
        let h = self.grid.h;
        let d = |f: &[f64], bc: f64| f[n - 2] / (3.0 * h) - 3.0 * f[n - 1] / h + 8.0 * bc / (3.0 * h);
        (
            d(&self.f_plus, self.bc_plus),
            d(&self.f_minus, self.bc_minus),
        )
    }
}

/// Far-field tail coefficients: `f±(r) = t± + a±/r² + O(r⁻⁴)`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct AsymptoticCoeffs {
    /// Coefficient of `r⁻²` in the first component.
    pub a_plus: f64,
    /// Coefficient of `r⁻²` in the second component.
    pub a_minus: f64,
}

/// Closed-form tail coefficients
/// `a± = (B - A∓) / ( 2 (A₊A₋ - B²) t± )`.
///
/// For balanced parameters (`A± = 1`, `t±² = 1/2`) this reduces to
/// `a± = -1/(√2 (1+B))`.
pub fn closed_form_asymptotics(p: &GlParams) -> Result<AsymptoticCoeffs> {
    require_admissible(p)?;
    let det = p.a_plus * p.a_minus - p.b * p.b;
    Ok(AsymptoticCoeffs {
        a_plus: 0.5 * (p.b - p.a_minus) / (det * p.t_plus),
        a_minus: 0.5 * (p.b - p.a_plus) / (det * p.t_minus),
    })
}

// ---------------------------------------------------------------------------
// Nonlinear system and Newton solver
// ---------------------------------------------------------------------------

/// The discretized coupled system at fixed coefficients. Unknowns are
/// interleaved `[f+_1, f-_1, f+_2, f-_2, …]`.
struct RadialSystem<'a> {
    grid: &'a RadialGrid,
    p: GlParams,
    lambda_eff: f64,
    bc: (f64, f64),
    /// Mode-1 stiffness with zero potential, shared by both components.
    k1: &'a SymBanded,
}

impl<'a> RadialSystem<'a> {
    /// Weighted residual `G` of the discrete equations (interleaved).
    fn residual(&self, fp: &[f64], fm: &[f64]) -> Vec<f64> {
        let n = self.grid.n_cells;
        let p = &self.p;
        let le = self.lambda_eff;
        let tp2 = p.t_plus * p.t_plus;
        let tm2 = p.t_minus * p.t_minus;
        let bflux = 2.0 * self.grid.radius / self.grid.h;
        let mut kp = vec![0.0; n];
        let mut km = vec![0.0; n];
        self.k1.matvec(fp, &mut kp);
        self.k1.matvec(fm, &mut km);
        let mut g = vec![0.0; 2 * n];
        for i in 0..n {
            let w = self.grid.weights[i];
            let dp = fp[i] * fp[i] - tp2;
            let dm = fm[i] * fm[i] - tm2;
            g[2 * i] = kp[i] + w * le * (p.a_plus * dp + p.b * dm) * fp[i];
            g[2 * i + 1] = km[i] + w * le * (p.a_minus * dm + p.b * dp) * fm[i];
        }
        g[2 * (n - 1)] -= bflux * self.bc.0;
        g[2 * (n - 1) + 1] -= bflux * self.bc.1;
        g
    }

    /// Scaled sup norm per component: `max_i |G_i| / w_i`.
    fn scaled_sup(&self, g: &[f64]) -> (f64, f64) {
        let n = self.grid.n_cells;
        let mut sp = 0.0f64;
        let mut sm = 0.0f64;
        for i in 0..n {
            let w = self.grid.weights[i];
            sp = sp.max((g[2 * i] / w).abs());
            sm = sm.max((g[2 * i + 1] / w).abs());
        }
        (sp, sm)
    }

    /// Jacobian of the weighted residual, banded with `kl = ku = 2`.
    fn jacobian(&self, fp: &[f64], fm: &[f64]) -> GeneralBanded {
        let n = self.grid.n_cells;
        let p = &self.p;
        let le = self.lambda_eff;
        let tp2 = p.t_plus * p.t_plus;
        let tm2 = p.t_minus * p.t_minus;
        let mut j = GeneralBanded::new(2 * n, 2, 2);
        for i in 0..n {
            let w = self.grid.weights[i];
            let kdiag = self.k1.data[i];
            let dp = fp[i] * fp[i] - tp2;
            let dm = fm[i] * fm[i] - tm2;
            j.add(
                2 * i,
                2 * i,
                kdiag + w * le * (p.a_plus * (dp + 2.0 * fp[i] * fp[i]) + p.b * dm),
            );
            j.add(
                2 * i + 1,
                2 * i + 1,
                kdiag + w * le * (p.a_minus * (dm + 2.0 * fm[i] * fm[i]) + p.b * dp),
            );
            let cross = w * le * 2.0 * p.b * fp[i] * fm[i];
            j.add(2 * i, 2 * i + 1, cross);
            j.add(2 * i + 1, 2 * i, cross);
            if i + 1 < n {
                let koff = self.k1.data[self.k1.n + i];
                j.add(2 * i, 2 * (i + 1), koff);
                j.add(2 * (i + 1), 2 * i, koff);
                j.add(2 * i + 1, 2 * (i + 1) + 1, koff);
                j.add(2 * (i + 1) + 1, 2 * i + 1, koff);
            }
        }
        j
    }

    /// One damped Newton step: solve for the correction, then accept
    /// the longest step in `{1, 1/2, …}` that reduces the residual
    /// norm by a fraction of the step length.
    fn damped_step(
        &self,
        fp: &[f64],
        fm: &[f64],
        g: &[f64],
        gnorm: f64,
    ) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
        let n = self.grid.n_cells;
        let lu = self.jacobian(fp, fm).lu()?;
        let mut delta = g.to_vec();
        lu.solve(&mut delta);
        let mut eta = 1.0f64;
        while eta >= 1.0 / 1024.0 {
            let tp: Vec<f64> = (0..n).map(|i| fp[i] - eta * delta[2 * i]).collect();
            let tm: Vec<f64> = (0..n).map(|i| fm[i] - eta * delta[2 * i + 1]).collect();
            let gt = self.residual(&tp, &tm);
            let gt_norm = norm2(&gt);
            if gt_norm.is_finite() && gt_norm <= (1.0 - 0.25 * eta) * gnorm {
                return Ok((tp, tm, gt, gt_norm));
            }
            eta *= 0.5;
        }
        Err(Error::NewtonFailure {
            residual: gnorm,
            detail: "line search stalled".into(),
        })
    }

    /// Damped Newton iteration from the given start. Returns the
    /// iterate, iterations used and the final per-component residual.
    fn newton(
        &self,
        mut fp: Vec<f64>,
        mut fm: Vec<f64>,
        tol: f64,
        max_iter: usize,
    ) -> Result<(Vec<f64>, Vec<f64>, usize, (f64, f64))> {
        let mut g = self.residual(&fp, &fm);
        let mut gnorm = norm2(&g);
        for it in 0..max_iter {
            let (sp, sm) = self.scaled_sup(&g);
            if sp.max(sm) <= tol {
                return Ok((fp, fm, it, (sp, sm)));
            }
            let (tp, tm, gt, gt_norm) = self.damped_step(&fp, &fm, &g, gnorm).map_err(|e| {
                match e {
                    Error::NewtonFailure { residual: _, detail } => Error::NewtonFailure {
                        residual: sp.max(sm),
                        detail: format!("{detail} at iteration {it}"),
                    },
                    other => other,
                }
            })?;
            fp = tp;
            fm = tm;
            g = gt;
            gnorm = gt_norm;
        }
        let (sp, sm) = self.scaled_sup(&g);
        if sp.max(sm) <= tol {
            return Ok((fp, fm, max_iter, (sp, sm)));
        }
        Err(Error::NewtonFailure {
            residual: sp.max(sm),
            detail: format!("no convergence within {max_iter} iterations"),
        })
    }
}

fn initial_iterate(
    grid: &RadialGrid,
    p: &GlParams,
    lambda_eff: f64,
    guess: InitialGuess,
) -> (Vec<f64>, Vec<f64>) {
    let shape: Vec<f64> = match guess {
        InitialGuess::CoreScaled => {
            let core = 1.0 / lambda_eff.max(1e-12);
            grid.nodes.iter().map(|&r| r / (r * r + core).sqrt()).collect()
        }
        InitialGuess::LinearRamp => grid.nodes.iter().map(|&r| r / grid.radius).collect(),
    };
    (
        shape.iter().map(|s| p.t_plus * s).collect(),
        shape.iter().map(|s| p.t_minus * s).collect(),
    )
}

/// Signed artifacts indicate the iteration left the basin of the
/// nonnegative solution; treat them like a failed stage.
fn is_nonnegative(fp: &[f64], fm: &[f64]) -> bool {
    fp.iter().chain(fm.iter()).all(|&v| v >= -1e-10)
}

/// Solve the coupled system in a general frame: potential multiplier
/// `lambda_eff` on the domain `[0, radius]`, boundary values `bc`.
///
/// Tries a direct Newton solve first; on failure (or a signed
/// artifact) continues in the cross-coupling from `B = 0` in steps of
/// at most `0.1` (retrying with halved steps), and as a last resort
/// ramps the potential multiplier up geometrically.
pub(crate) fn solve_in_frame(
    grid: &RadialGrid,
    p: &GlParams,
    lambda_eff: f64,
    bc: (f64, f64),
    opts: &SolveOptions,
) -> Result<(Vec<f64>, Vec<f64>, usize, (f64, f64))> {
    require_admissible(p)?;
    if !(lambda_eff > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "potential multiplier must be positive, got {lambda_eff}"
        )));
    }
    let zero_v = vec![0.0; grid.n_cells];
    let k1 = crate::grid::scalar_radial_operator(grid, 1, &zero_v)?.stiffness;

    let attempt = |params: GlParams,
                   le: f64,
                   start: (Vec<f64>, Vec<f64>)|
     -> Result<(Vec<f64>, Vec<f64>, usize, (f64, f64))> {
        let sys = RadialSystem {
            grid,
            p: params,
            lambda_eff: le,
            bc,
            k1: &k1,
        };
        let (fp, fm, its, res) = sys.newton(start.0, start.1, opts.tol, opts.max_iter)?;
        if !is_nonnegative(&fp, &fm) {
            return Err(Error::NewtonFailure {
                residual: res.0.max(res.1),
                detail: "converged to a signed artifact".into(),
            });
        }
        Ok((fp, fm, its, res))
    };

    // Stage 0: direct.
    let start = initial_iterate(grid, p, lambda_eff, opts.initial);
    let mut last_err = match attempt(*p, lambda_eff, start) {
        Ok(out) => return Ok(out),
        Err(e) => e,
    };

    // Stage 1: continuation in the cross-coupling at full strength.
    for halvings in 0..3 {
        let step = 0.1 / f64::powi(2.0, halvings);
        match continue_in_b(grid, p, lambda_eff, bc, opts, step, &attempt) {
            Ok(out) => return Ok(out),
            Err(e) => last_err = e,
        }
    }

    // Stage 2: ramp the potential multiplier geometrically, carrying
    // the cross-coupling continuation at the weakest stage.
    let mut stages = Vec::new();
    let mut le = lambda_eff;
    while le > lambda_eff / 256.0 {
        stages.push(le);
        le /= 4.0;
    }
    stages.reverse();
    let mut carried: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut total_its = 0usize;
    for (si, &le) in stages.iter().enumerate() {
        let result = match carried.take() {
            None => continue_in_b(grid, p, le, bc, opts, 0.05, &attempt),
            Some(warm) => attempt(*p, le, warm),
        };
        match result {
            Ok((fp, fm, its, res)) => {
                total_its += its;
                if si + 1 == stages.len() {
                    return Ok((fp, fm, total_its, res));
                }
                carried = Some((fp, fm));
            }
            Err(e) => {
                return Err(Error::NewtonFailure {
                    residual: match &e {
                        Error::NewtonFailure { residual, .. } => *residual,
                        _ => f64::NAN,
                    },
                    detail: format!(
                        "continuation exhausted (multiplier stage {le:.3e}): {e}; direct attempt: {last_err}"
                    ),
                });
            }
        }
    }
    Err(last_err)
}

/// Walk the cross-coupling from 0 to its target in steps of at most
/// `step`, warm-starting each solve from the previous one.
fn continue_in_b<F>(
    grid: &RadialGrid,
    p: &GlParams,
    lambda_eff: f64,
    _bc: (f64, f64),
    opts: &SolveOptions,
    step: f64,
    attempt: &F,
) -> Result<(Vec<f64>, Vec<f64>, usize, (f64, f64))>
where
    F: Fn(GlParams, f64, (Vec<f64>, Vec<f64>)) -> Result<(Vec<f64>, Vec<f64>, usize, (f64, f64))>,
{
    let mut total_its = 0usize;
    let mut b_cur = 0.0f64;
    let mut state = initial_iterate(grid, p, lambda_eff, opts.initial);
    loop {
        let mut pb = *p;
        pb.b = b_cur;
        let (fp, fm, its, res) = attempt(pb, lambda_eff, state)?;
        total_its += its;
        if (b_cur - p.b).abs() <= f64::EPSILON * (1.0 + p.b.abs()) {
            return Ok((fp, fm, total_its, res));
        }
        state = (fp, fm);
        b_cur = if p.b > 0.0 {
            (b_cur + step).min(p.b)
        } else {
            (b_cur - step).max(p.b)
        };
    }
}

/// Solve the profile equations with `λ = 1` on `[0, radius]` and the
/// natural boundary data `f±(R) = t±`.
pub fn solve_profile(
    p: &GlParams,
    radius: f64,
    n_cells: usize,
    opts: &SolveOptions,
) -> Result<Profile> {
    solve_profile_in_frame(p, radius, 1.0, n_cells, opts)
}

/// Solve in a general frame: potential multiplier `lambda_eff` on
/// `[0, radius]`. `lambda_eff = λ, radius = 1` is the unit-disk frame;
/// `lambda_eff = 1, radius = √λ` is the rescaled frame.
pub fn solve_profile_in_frame(
    p: &GlParams,
    radius: f64,
    lambda_eff: f64,
    n_cells: usize,
    opts: &SolveOptions,
) -> Result<Profile> {
    let grid = make_grid(radius, n_cells)?;
    let bc = (p.t_plus, p.t_minus);
    let (f_plus, f_minus, newton_iterations, final_residual) =
        solve_in_frame(&grid, p, lambda_eff, bc, opts)?;
    Ok(Profile {
        radius_is_rescaled: lambda_eff == 1.0,
        grid,
        f_plus,
        f_minus,
        params: *p,
        bc_plus: bc.0,
        bc_minus: bc.1,
        lambda_eff,
        newton_iterations,
        final_residual,
    })
}

/// Approximate the entire (whole-plane) solution by solving on a
/// large disk. With `corrected_bc` the boundary data is pushed from
/// `t±` to the two-term far-field expansion `t± + a±/R²`, reducing
/// the domain-truncation error from `O(R⁻²)` toward `O(R⁻⁴)`.
pub fn entire_solution_approx(
    p: &GlParams,
    radius: f64,
    n_cells: usize,
    corrected_bc: bool,
) -> Result<Profile> {
    let grid = make_grid(radius, n_cells)?;
    let bc = if corrected_bc {
        let a = closed_form_asymptotics(p)?;
        let bp = p.t_plus + a.a_plus / (radius * radius);
        let bm = p.t_minus + a.a_minus / (radius * radius);
        if !(bp > 0.0 && bm > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "corrected boundary values ({bp}, {bm}) are not positive; enlarge the radius"
            )));
        }
        (bp, bm)
    } else {
        (p.t_plus, p.t_minus)
    };
    let opts = SolveOptions::default();
    let (f_plus, f_minus, newton_iterations, final_residual) =
        solve_in_frame(&grid, p, 1.0, bc, &opts)?;
    Ok(Profile {
        radius_is_rescaled: true,
        grid,
        f_plus,
        f_minus,
        params: *p,
        bc_plus: bc.0,
        bc_minus: bc.1,
        lambda_eff: 1.0,
        newton_iterations,
        final_residual,
    })
}

/// Scaled sup norm of the discrete equation residual, per component,
/// evaluated with the profile's own boundary data and multiplier.
pub fn profile_residual(prof: &Profile) -> Result<(f64, f64)> {
    let zero_v = vec![0.0; prof.grid.n_cells];
    let k1 = crate::grid::scalar_radial_operator(&prof.grid, 1, &zero_v)?.stiffness;
    let sys = RadialSystem {
        grid: &prof.grid,
        p: prof.params,
        lambda_eff: prof.lambda_eff,
        bc: (prof.bc_plus, prof.bc_minus),
        k1: &k1,
    };
    let g = sys.residual(&prof.f_plus, &prof.f_minus);
    Ok(sys.scaled_sup(&g))
}

// ---------------------------------------------------------------------------
// Energies
// ---------------------------------------------------------------------------

/// Reduced radial energy of the configuration,
///
/// ```text
/// E = π ∫ (f+')² + (f-')² + (f+² + f-²)/r²  r dr
///   + (λπ/2) ∫ A₊(f+²-t+²)² + A₋(f-²-t-²)² + 2B(f+²-t+²)(f-²-t-²)  r dr,
/// ```
///
/// i.e. the two-dimensional energy (with the `|∇ψ|²/2 + λ(…)/4`
/// normalization) of `psi± = f± e^{iθ}` after the angular integral.
/// Gradients use face differences, closed at `r = R` against the
/// profile's boundary data.
pub fn energy(prof: &Profile, lambda: f64) -> f64 {
    let g = &prof.grid;
    let n = g.n_cells;
    let h = g.h;
    let p = &prof.params;
    let tp2 = p.t_plus * p.t_plus;
    let tm2 = p.t_minus * p.t_minus;
    let mut grad = 0.0;
    for j in 1..n {
        let dp = prof.f_plus[j] - prof.f_plus[j - 1];
        let dm = prof.f_minus[j] - prof.f_minus[j - 1];
        grad += g.face(j) * (dp * dp + dm * dm) / h;
    }
    let dbp = prof.bc_plus - prof.f_plus[n - 1];
    let dbm = prof.bc_minus - prof.f_minus[n - 1];
    grad += 2.0 * g.radius * (dbp * dbp + dbm * dbm) / h;
    let mut centrifugal = 0.0;
    let mut potential = 0.0;
    for i in 0..n {
        let w = g.weights[i];
        let r = g.nodes[i];
        let fp = prof.f_plus[i];
        let fm = prof.f_minus[i];
        centrifugal += w * (fp * fp + fm * fm) / (r * r);
        let dp = fp * fp - tp2;
        let dm = fm * fm - tm2;
        potential += w * (p.a_plus * dp * dp + p.a_minus * dm * dm + 2.0 * p.b * dp * dm);
    }
    std::f64::consts::PI * (grad + centrifugal) + 0.5 * lambda * std::f64::consts::PI * potential
}

// ---------------------------------------------------------------------------
// Test fields and the second variation
// ---------------------------------------------------------------------------

/// One angular mode of a perturbation field: the complex radial
/// coefficients of `e^{inθ}` for both components.
#[derive(Debug, Clone)]
pub struct FieldMode {
    /// Angular index `n` (any integer).
    pub n: i32,
    /// Radial coefficient of the first component on the nodes.
    pub b_plus: Vec<Complex64>,
    /// Radial coefficient of the second component on the nodes.
    pub b_minus: Vec<Complex64>,
}

/// A perturbation `Φ = (φ+, φ-)` supported on finitely many angular
/// modes, `φ± = Σ_n b_n±(r) e^{inθ}`, vanishing at `r = R` (the grid's
/// mirrored-ghost closure represents exactly such fields).
#[derive(Debug, Clone, Default)]
pub struct TestField {
    /// The modes, with pairwise distinct angular indices.
    pub modes: Vec<FieldMode>,
}

impl TestField {
    /// Empty field.
    pub fn new() -> Self {
        TestField { modes: Vec::new() }
    }

    /// Add a mode. Panics if the index is already present.
    pub fn add_mode(&mut self, n: i32, b_plus: Vec<Complex64>, b_minus: Vec<Complex64>) {
        assert!(
            self.mode(n).is_none(),
            "mode {n} already present in the test field"
        );
        self.modes.push(FieldMode { n, b_plus, b_minus });
    }

    /// Look up a mode by angular index.
    pub fn mode(&self, n: i32) -> Option<&FieldMode> {
        self.modes.iter().find(|m| m.n == n)
    }

    fn check(&self, n_cells: usize) -> Result<()> {
        for m in &self.modes {
            if m.b_plus.len() != n_cells || m.b_minus.len() != n_cells {
                return Err(Error::LengthMismatch {
                    expected: n_cells,
                    got: m.b_plus.len().max(m.b_minus.len()),
                });
            }
        }
        Ok(())
    }

    /// Complex coefficient pair of mode `n` at node `i` (zero when the
    /// mode is absent).
    fn at(&self, n: i32, i: usize) -> (Complex64, Complex64) {
        match self.mode(n) {
            Some(m) => (m.b_plus[i], m.b_minus[i]),
            None => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }
}

/// Gradient + centrifugal + boundary part of the quadratic form for a
/// single complex radial coefficient with angular index `m`:
/// `∫ (|b'|² + m²|b|²/r²) r dr` with the Dirichlet closure at `R`.
fn complex_mode_form(grid: &RadialGrid, m: i32, b: &[Complex64]) -> f64 {
    let n = grid.n_cells;
    let h = grid.h;
    let msq = (m as f64) * (m as f64);
    let mut s = 0.0;
    for j in 1..n {
        let d = b[j] - b[j - 1];
        s += grid.face(j) * d.norm_sqr() / h;
    }
    s += 2.0 * grid.radius * b[n - 1].norm_sqr() / h;
    if msq > 0.0 {
        for i in 0..n {
            s += grid.weights[i] * msq * b[i].norm_sqr() / (grid.nodes[i] * grid.nodes[i]);
        }
    }
    s
}

/// Second variation of the energy at the profile, in the direction of
/// the test field, by direct quadrature: the angular integrals are
/// done analytically (modes couple only through the pairing
/// `n ↔ 2-n`), the radial ones on the grid.
pub(crate) fn second_variation_direct(
    prof: &Profile,
    lambda: f64,
    field: &TestField,
) -> Result<f64> {
    field.check(prof.grid.n_cells)?;
    let g = &prof.grid;
    let n_cells = g.n_cells;
    let p = &prof.params;
    let (vp, vm) = prof.potentials(lambda);
    let pi = std::f64::consts::PI;

    let mut total = 0.0;
    for m in &field.modes {
        let mut part = complex_mode_form(g, m.n, &m.b_plus) + complex_mode_form(g, m.n, &m.b_minus);
        for i in 0..n_cells {
            part += g.weights[i] * (vp[i] * m.b_plus[i].norm_sqr() + vm[i] * m.b_minus[i].norm_sqr());
        }
        total += 2.0 * pi * part;
    }

    // Pairing terms: each integer mode couples to its mirror `2 - n`.
    let mut pair_modes: Vec<i32> = Vec::new();
    for m in &field.modes {
        if !pair_modes.contains(&m.n) {
            pair_modes.push(m.n);
        }
        if !pair_modes.contains(&(2 - m.n)) {
            pair_modes.push(2 - m.n);
        }
    }
    let mut coupling = 0.0;
    for &n in &pair_modes {
        for i in 0..n_cells {
            let (bp, bm) = field.at(n, i);
            let (cp, cm) = field.at(2 - n, i);
            let sp = bp + cp.conj();
            let sm = bm + cm.conj();
            let fp = prof.f_plus[i];
            let fm = prof.f_minus[i];
            coupling += g.weights[i]
                * (p.a_plus * fp * fp * sp.norm_sqr()
                    + p.a_minus * fm * fm * sm.norm_sqr()
                    + 2.0 * p.b * fp * fm * (sp * sm.conj()).re);
        }
    }
    total += lambda * pi * coupling;
    Ok(total)
}

/// Second variation `E''[Φ]`.
///
/// Evaluated two ways — the direct quadrature above and the blockwise
/// sum of the assembled angular-block forms — as a permanent internal
/// cross-check; the direct value is returned. Use
/// [`second_variation_routes`] to observe both.
pub fn second_variation(prof: &Profile, lambda: f64, field: &TestField) -> Result<f64> {
    Ok(second_variation_routes(prof, lambda, field)?.0)
}

/// Both evaluation routes of the second variation:
/// `(direct quadrature, blockwise sum)`.
pub fn second_variation_routes(
    prof: &Profile,
    lambda: f64,
    field: &TestField,
) -> Result<(f64, f64)> {
    let direct = second_variation_direct(prof, lambda, field)?;
    let blockwise = crate::spectral::second_variation_blockwise(prof, lambda, field)?;
    Ok((direct, blockwise))
}

/// Full two-dimensional energy of the perturbed configuration
/// `Ψ + ε Φ` on the disk, with the same discretization as [`energy`]
/// and the block operators: face-difference radial gradients with the
/// profile's boundary data (perturbation modes vanish at `R`), exact
/// angular integration (the integrand is a trigonometric polynomial),
/// and nodal quadrature in `r`. Agrees with [`energy`] at `ε = 0`.
pub fn perturbed_field_energy(
    prof: &Profile,
    lambda: f64,
    field: &TestField,
    eps: f64,
) -> Result<f64> {
    field.check(prof.grid.n_cells)?;
    let g = &prof.grid;
    let n = g.n_cells;
    let h = g.h;
    let p = &prof.params;
    let pi = std::f64::consts::PI;

    // Collect the coefficient arrays of Ψ + εΦ: the profile occupies
    // mode 1, the field adds its own modes.
    let mut modes: Vec<i32> = vec![1];
    for m in &field.modes {
        if !modes.contains(&m.n) {
            modes.push(m.n);
        }
    }
    let coeff = |n_mode: i32, i: usize| -> (Complex64, Complex64) {
        let (bp, bm) = field.at(n_mode, i);
        let mut cp = eps * bp;
        let mut cm = eps * bm;
        if n_mode == 1 {
            cp += Complex64::new(prof.f_plus[i], 0.0);
            cm += Complex64::new(prof.f_minus[i], 0.0);
        }
        (cp, cm)
    };

    // Gradient, centrifugal and boundary terms, mode by mode.
    let mut quad = 0.0;
    for &nm in &modes {
        let msq = (nm as f64) * (nm as f64);
        let bc = if nm == 1 {
            (prof.bc_plus, prof.bc_minus)
        } else {
            (0.0, 0.0)
        };
        for j in 1..n {
            let (ap, am) = coeff(nm, j);
            let (bp, bm) = coeff(nm, j - 1);
            quad += g.face(j) * ((ap - bp).norm_sqr() + (am - bm).norm_sqr()) / h;
        }
        let (lp, lm) = coeff(nm, n - 1);
        quad += 2.0 * g.radius
            * ((Complex64::new(bc.0, 0.0) - lp).norm_sqr()
                + (Complex64::new(bc.1, 0.0) - lm).norm_sqr())
            / h;
        if msq > 0.0 {
            for i in 0..n {
                let (cp, cm) = coeff(nm, i);
                quad += g.weights[i] * msq * (cp.norm_sqr() + cm.norm_sqr())
                    / (g.nodes[i] * g.nodes[i]);
            }
        }
    }
    let mut e = pi * quad; // (1/2)·2π per the |∇ψ|²/2 normalization

    // Quartic potential: exact trapezoid in θ (trig polynomial of
    // degree ≤ 4·max|mode|), nodal in r.
    let max_mode = modes.iter().map(|m| m.unsigned_abs()).max().unwrap_or(1) as usize;
    let k_theta = 4 * max_mode + 8;
    let tp2 = p.t_plus * p.t_plus;
    let tm2 = p.t_minus * p.t_minus;
    let mut pot = 0.0;
    for i in 0..n {
        let mut node_sum = 0.0;
        for k in 0..k_theta {
            let theta = 2.0 * pi * k as f64 / k_theta as f64;
            let mut psi_p = Complex64::new(0.0, 0.0);
            let mut psi_m = Complex64::new(0.0, 0.0);
            for &nm in &modes {
                let phase = Complex64::from_polar(1.0, nm as f64 * theta);
                let (cp, cm) = coeff(nm, i);
                psi_p += cp * phase;
                psi_m += cm * phase;
            }
            let dp = psi_p.norm_sqr() - tp2;
            let dm = psi_m.norm_sqr() - tm2;
            node_sum += p.a_plus * dp * dp + p.a_minus * dm * dm + 2.0 * p.b * dp * dm;
        }
        pot += g.weights[i] * node_sum * (2.0 * pi / k_theta as f64);
    }
    e += 0.25 * lambda * pot;
    Ok(e)
}

/// Symmetric finite-difference quotient
/// `[E(Ψ+εΦ) + E(Ψ-εΦ) - 2E(Ψ)] / ε²`, an independent oracle for the
/// second variation (the energy is a quartic polynomial in `ε`, so
/// the quotient equals `E''[Φ] + 2ε²·E⁗/4!·…` exactly).
pub fn second_variation_fd_quotient(
    prof: &Profile,
    lambda: f64,
    field: &TestField,
    eps: f64,
) -> Result<f64> {
    let e_plus = perturbed_field_energy(prof, lambda, field, eps)?;
    let e_minus = perturbed_field_energy(prof, lambda, field, -eps)?;
    let e_zero = perturbed_field_energy(prof, lambda, field, 0.0)?;
    Ok((e_plus + e_minus - 2.0 * e_zero) / (eps * eps))
}

// ---------------------------------------------------------------------------
// Tail diagnostics
// ---------------------------------------------------------------------------

/// Measure the far-field coefficients by least squares: fit
/// `r²(f±(r) - t±)` to a constant over the window.
pub fn tail_fit(prof: &Profile, window: (f64, f64)) -> Result<AsymptoticCoeffs> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi < prof.grid.radius) {
        return Err(Error::InvalidArgument(format!(
            "tail window ({lo}, {hi}) must satisfy 0 < lo < hi < R = {}",
            prof.grid.radius
        )));
    }
    let mut count = 0usize;
    let mut sum_p = 0.0;
    let mut sum_m = 0.0;
    for (i, &r) in prof.grid.nodes.iter().enumerate() {
        if r >= lo && r <= hi {
            count += 1;
            sum_p += r * r * (prof.f_plus[i] - prof.params.t_plus);
            sum_m += r * r * (prof.f_minus[i] - prof.params.t_minus);
        }
    }
    if count == 0 {
        return Err(Error::InvalidArgument(
            "tail window contains no grid nodes".into(),
        ));
    }
    Ok(AsymptoticCoeffs {
        a_plus: sum_p / count as f64,
        a_minus: sum_m / count as f64,
    })
}

/// Default tail-fit window `[0.6 R, 0.9 R]`: outside the vortex core,
/// inside the layer distorted by the domain truncation.
pub fn default_tail_window(prof: &Profile) -> (f64, f64) {
    (0.6 * prof.grid.radius, 0.9 * prof.grid.radius)
}

/// Result of [`monotonicity_check`].
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityReport {
    /// Forward differences of `f+` all exceed `-tol·t+`.
    pub plus_monotone: bool,
    /// Forward differences of `f-` all exceed `-tol·t-`.
    pub minus_monotone: bool,
    /// Most negative forward difference of `f+`.
    pub worst_plus: f64,
    /// Most negative forward difference of `f-`.
    pub worst_minus: f64,
}

/// Check discrete monotonicity of both components: every forward
/// difference must be at least `-tol · t±`.
pub fn monotonicity_check(prof: &Profile, tol: f64) -> MonotonicityReport {
    let worst = |f: &[f64]| -> f64 {
        f.windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    };
    let wp = worst(&prof.f_plus);
    let wm = worst(&prof.f_minus);
    MonotonicityReport {
        plus_monotone: wp >= -tol * prof.params.t_plus,
        minus_monotone: wm >= -tol * prof.params.t_minus,
        worst_plus: wp,
        worst_minus: wm,
    }
}
