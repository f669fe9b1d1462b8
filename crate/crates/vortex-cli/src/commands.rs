//! Implementations of the four subcommands.
//!
//! Each command resolves its inputs (parameter files, frame, grid
//! resolution), computes, and emits artifacts through [`crate::emit`]:
//! a CSV per table plus a `.meta.json` sidecar that embeds the full
//! semantic configuration and its SHA-256 hash. Identical
//! configurations produce byte-identical outputs.

use std::fs;
use std::path::Path;

use anyhow::Result;
use serde_json::json;

use vortex_core::grid::{ground_eigenpair, make_grid};
use vortex_core::model::bec_map;
use vortex_core::profile::{energy, entire_solution_approx, solve_profile};
use vortex_core::spectral::{
    assemble_l1_complex, m1_spectrum, q0_spectrum, qn_ground, sign_normalized,
};
use vortex_core::stability::{classify_with_margin, default_cells_for_radius, sweep_b};
use vortex_core::{BecParams, GlParams, Profile, SolveOptions};

use crate::emit::{
    config_hash, file_error, input_error, meta_path, read_json, sci, write_csv, write_json,
    VerificationError,
};
use crate::{BecMapArgs, ProfileArgs, SpectrumArgs, StabilityArgs};

/// Parameters resolved from `--params` or `--bec`.
struct LoadedParams {
    gl: GlParams,
    bec: Option<BecParams>,
    /// Coupling strength intrinsic to the condensate data, when the
    /// parameters came from `--bec`.
    bec_lambda: Option<f64>,
}

/// Load the model parameters from exactly one of the two sources.
fn load_params(params: &Option<std::path::PathBuf>, bec: &Option<std::path::PathBuf>) -> Result<LoadedParams> {
    match (params, bec) {
        (Some(p), None) => {
            let gl: GlParams = read_json(p, "parameter")?;
            Ok(LoadedParams {
                gl,
                bec: None,
                bec_lambda: None,
            })
        }
        (None, Some(p)) => {
            let bp: BecParams = read_json(p, "condensate parameter")?;
            let (gl, lambda) = match bec_map(&bp) {
                Ok(x) => x,
                Err(e @ vortex_core::Error::BecRejected(_)) => {
                    return Err(file_error("invalid_input", e.to_string(), p));
                }
                Err(e) => return Err(e.into()),
            };
            Ok(LoadedParams {
                gl,
                bec: Some(bp),
                bec_lambda: Some(lambda),
            })
        }
        (None, None) => Err(input_error(
            "invalid_input",
            "one of --params or --bec is required",
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects --params together with --bec"),
    }
}

/// Disk radius for the rescaled frame: explicit `--radius`, else
/// `√λ` from `--lambda`, else `√λ` intrinsic to the condensate data.
fn resolve_radius(radius: Option<f64>, lambda: Option<f64>, bec_lambda: Option<f64>) -> Result<f64> {
    let r = match (radius, lambda, bec_lambda) {
        (Some(r), _, _) => r,
        (None, Some(l), _) | (None, None, Some(l)) => {
            if !(l > 0.0) {
                return Err(input_error("invalid_input", "lambda must be positive"));
            }
            l.sqrt()
        }
        (None, None, None) => {
            return Err(input_error(
                "invalid_input",
                "no domain size: pass --radius or --lambda (condensate input carries its own)",
            ));
        }
    };
    if !(r > 0.0) {
        return Err(input_error("invalid_input", "radius must be positive"));
    }
    Ok(r)
}

/// `profile`: solve the symmetric vortex pair and write it out.
pub fn cmd_profile(args: &ProfileArgs) -> Result<()> {
    let loaded = load_params(&args.params, &args.bec)?;
    let radius = resolve_radius(args.radius, args.lambda, loaded.bec_lambda)?;
    if !(args.tol > 0.0) {
        return Err(input_error("invalid_input", "tol must be positive"));
    }
    let n_cells = args.cells.unwrap_or_else(|| default_cells_for_radius(radius));

    let config = json!({
        "command": "profile",
        "params": loaded.gl,
        "bec_params": loaded.bec,
        "bec_lambda": loaded.bec_lambda,
        "radius": radius,
        "n_cells": n_cells,
        "corrected_bc": args.corrected_bc,
        "tol": args.tol,
        "seed": args.seed,
    });
    let hash = config_hash(&config);

    let prof = if args.corrected_bc {
        entire_solution_approx(&loaded.gl, radius, n_cells, true)?
    } else {
        let opts = SolveOptions {
            tol: args.tol,
            ..SolveOptions::default()
        };
        solve_profile(&loaded.gl, radius, n_cells, &opts)?
    };

    let rows: Vec<String> = prof
        .grid
        .nodes
        .iter()
        .zip(prof.f_plus.iter().zip(prof.f_minus.iter()))
        .map(|(r, (fp, fm))| format!("{},{},{}", sci(*r), sci(*fp), sci(*fm)))
        .collect();
    write_csv(&args.out, "r,f_plus,f_minus", &rows)?;

    let meta = json!({
        "command": "profile",
        "config_hash": hash,
        "config": config,
        "params": prof.params,
        "radius": prof.grid.radius,
        "n_cells": prof.grid.n_cells,
        "lambda_eff": prof.lambda_eff,
        "bc_plus": prof.bc_plus,
        "bc_minus": prof.bc_minus,
        "newton_iterations": prof.newton_iterations,
        "final_residual": [prof.final_residual.0, prof.final_residual.1],
        "energy": energy(&prof, prof.lambda_eff),
    });
    let mp = meta_path(&args.out);
    write_json(&mp, &meta)?;
    println!("wrote {}", args.out.display());
    println!("wrote {}", mp.display());
    Ok(())
}

/// A profile reconstructed from a CSV + sidecar pair.
struct StoredProfile {
    prof: Profile,
    config_hash: Option<String>,
}

fn read_profile(path: &Path) -> Result<StoredProfile> {
    #[derive(serde::Deserialize)]
    struct MetaFile {
        params: GlParams,
        radius: f64,
        n_cells: usize,
        lambda_eff: f64,
        bc_plus: f64,
        bc_minus: f64,
        config_hash: Option<String>,
    }
    let meta: MetaFile = read_json(&meta_path(path), "profile metadata")?;

    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(file_error("missing_file", "profile file not found", path));
        }
        Err(e) => {
            return Err(file_error(
                "unreadable_input",
                format!("cannot read profile: {e}"),
                path,
            ));
        }
    };
    let mut lines = text.lines();
    match lines.next() {
        Some("r,f_plus,f_minus") => {}
        _ => {
            return Err(file_error(
                "invalid_input",
                "profile CSV must start with the header r,f_plus,f_minus",
                path,
            ));
        }
    }
    let mut r_col = Vec::new();
    let mut fp = Vec::new();
    let mut fm = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            fields
                .next()
                .ok_or_else(|| {
                    file_error(
                        "invalid_input",
                        format!("row {}: missing {name}", i + 2),
                        path,
                    )
                })?
                .parse::<f64>()
                .map_err(|e| {
                    file_error(
                        "invalid_input",
                        format!("row {}: bad {name}: {e}", i + 2),
                        path,
                    )
                })
        };
        r_col.push(next("r")?);
        fp.push(next("f_plus")?);
        fm.push(next("f_minus")?);
    }

    let grid = make_grid(meta.radius, meta.n_cells)?;
    if r_col.len() != grid.n_cells {
        return Err(file_error(
            "invalid_input",
            format!(
                "profile has {} rows but its metadata declares {} cells",
                r_col.len(),
                grid.n_cells
            ),
            path,
        ));
    }
    let rtol = 1e-9 * (1.0 + meta.radius);
    for (r, node) in r_col.iter().zip(grid.nodes.iter()) {
        if (r - node).abs() > rtol {
            return Err(file_error(
                "invalid_input",
                format!("radial column does not match the declared grid near r = {r}"),
                path,
            ));
        }
    }
    let prof = Profile::from_arrays(
        grid,
        fp,
        fm,
        meta.params,
        meta.bc_plus,
        meta.bc_minus,
        meta.lambda_eff,
    )?;
    Ok(StoredProfile {
        prof,
        config_hash: meta.config_hash,
    })
}

/// `spectrum`: ground eigenvalue of every angular block up to
/// `--blocks`, reported on the unit disk.
pub fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let (prof, source, profile_hash) = if let Some(ppath) = &args.profile {
        let stored = read_profile(ppath)?;
        (
            stored.prof,
            json!(ppath.display().to_string()),
            stored.config_hash,
        )
    } else {
        let loaded = load_params(&args.params, &args.bec)?;
        let lambda = match args.lambda.or(loaded.bec_lambda) {
            Some(l) if l > 0.0 => l,
            Some(_) => return Err(input_error("invalid_input", "lambda must be positive")),
            None => {
                return Err(input_error(
                    "invalid_input",
                    "an inline solve needs --lambda (or condensate input carrying one)",
                ));
            }
        };
        let radius = lambda.sqrt();
        let n_cells = args.cells.unwrap_or_else(|| default_cells_for_radius(radius));
        let prof = solve_profile(&loaded.gl, radius, n_cells, &SolveOptions::default())?;
        (prof, json!("inline"), None)
    };

    let le = prof.lambda_eff;
    // Eigenvalues are computed in the profile's own frame and
    // reported on the unit disk; the factor is exactly radius².
    let rsq = prof.grid.radius * prof.grid.radius;

    // The input's identity is its content (covered by the stored
    // profile's own hash and the resolved parameters), not its path:
    // `source` stays out of the hashed configuration.
    let config = json!({
        "command": "spectrum",
        "profile_config_hash": profile_hash,
        "params": prof.params,
        "radius": prof.grid.radius,
        "n_cells": prof.grid.n_cells,
        "lambda": le * rsq,
        "blocks": args.blocks,
        "check_l1": args.check_l1,
        "seed": args.seed,
    });
    let hash = config_hash(&config);

    let q0 = q0_spectrum(&prof, le)?;
    let m1 = m1_spectrum(&prof, le)?;
    let mut table = vec![
        ("n0".to_string(), rsq * q0.mu, q0.simple, rsq * q0.gap),
        ("n1".to_string(), rsq * m1.mu, m1.simple, rsq * m1.gap),
    ];
    for n in 2..=args.blocks {
        let (mu, gap) = qn_ground(&prof, le, n)?;
        table.push((format!("n{n}"), rsq * mu, gap > 1e-8, rsq * gap));
    }
    let (mut min_block, mut min_mu) = (table[0].0.clone(), table[0].1);
    for (id, mu, _, _) in &table[1..] {
        if *mu < min_mu {
            min_mu = *mu;
            min_block = id.clone();
        }
    }

    let check_l1 = if args.check_l1 {
        let op = assemble_l1_complex(&prof, le)?;
        let pair = ground_eigenpair(&op, None)?;
        let l1_mu = rsq * pair.value;
        let m1_mu = rsq * m1.mu;
        let abs_diff = (l1_mu - m1_mu).abs();
        let agree = abs_diff <= 1e-9 * m1_mu.abs().max(1.0);
        Some((l1_mu, m1_mu, abs_diff, agree))
    } else {
        None
    };

    let rows: Vec<String> = table
        .iter()
        .map(|(id, mu, simple, gap)| format!("{id},{},{simple},{}", sci(*mu), sci(*gap)))
        .collect();
    write_csv(&args.out, "block_id,mu,simple,gap", &rows)?;

    let meta = json!({
        "command": "spectrum",
        "config_hash": hash,
        "config": config,
        "source": source,
        "mu0": rsq * q0.mu,
        "mu1": rsq * m1.mu,
        "min_block": min_block,
        "min_mu": min_mu,
        "check_l1": check_l1.map(|(l1_mu, m1_mu, abs_diff, agree)| {
            json!({
                "l1_mu": l1_mu,
                "m1_mu": m1_mu,
                "abs_diff": abs_diff,
                "agree": agree,
            })
        }),
    });
    let mp = meta_path(&args.out);
    write_json(&mp, &meta)?;

    if let Some(evpath) = &args.eigvec {
        let v = sign_normalized(&m1.vec);
        let ev_rows: Vec<String> = prof
            .grid
            .nodes
            .iter()
            .enumerate()
            .map(|(i, r)| {
                format!(
                    "{},{},{},{},{}",
                    sci(*r),
                    sci(v.a0_plus[i]),
                    sci(v.a0_minus[i]),
                    sci(v.a2_plus[i]),
                    sci(v.a2_minus[i]),
                )
            })
            .collect();
        write_csv(evpath, "r,a0_plus,a0_minus,a2_plus,a2_minus", &ev_rows)?;
        write_json(
            &meta_path(evpath),
            &json!({
                "command": "spectrum",
                "config_hash": hash,
                "kind": "eigenvector",
                "block": "n1",
                "mu": rsq * m1.mu,
            }),
        )?;
        println!("wrote {}", evpath.display());
    }

    println!(
        "mu0={} mu1={} min_block={}",
        sci(rsq * q0.mu),
        sci(rsq * m1.mu),
        min_block
    );
    println!("wrote {}", args.out.display());
    println!("wrote {}", mp.display());

    if let Some((l1_mu, m1_mu, abs_diff, false)) = check_l1 {
        return Err(anyhow::Error::new(VerificationError {
            message: format!(
                "complex and real routes to the second block disagree: \
                 l1_mu = {l1_mu:.17e}, m1_mu = {m1_mu:.17e}, |diff| = {abs_diff:.3e}"
            ),
        }));
    }
    Ok(())
}

/// Parse `lo:hi:step` into an inclusive arithmetic progression.
fn parse_sweep(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |msg: &str| input_error("invalid_input", format!("--b-sweep {spec}: {msg}"));
    if parts.len() != 3 {
        return Err(bad("expected LO:HI:STEP"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|s| s.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| bad(&format!("{e}")))?;
    let (lo, hi, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    if hi < lo {
        return Err(bad("upper end below lower end"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

fn parse_b_values(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|e| {
                input_error("invalid_input", format!("--b-values entry {s:?}: {e}"))
            })
        })
        .collect()
}

/// `stability`: classify one point, or sweep the coupling and locate
/// the instability threshold for each value.
pub fn cmd_stability(args: &StabilityArgs) -> Result<()> {
    let loaded = load_params(&args.params, &args.bec)?;

    let b_list = match (&args.b_sweep, &args.b_values) {
        (Some(spec), None) => Some(parse_sweep(spec)?),
        (None, Some(spec)) => Some(parse_b_values(spec)?),
        (None, None) => None,
        (Some(_), Some(_)) => unreachable!("clap rejects --b-sweep together with --b-values"),
    };

    match (args.lambda, b_list) {
        (Some(lambda), None) => cmd_stability_single(args, &loaded, lambda),
        (None, Some(bs)) => cmd_stability_sweep(args, &loaded, &bs),
        (None, None) => Err(input_error(
            "invalid_input",
            "pass --lambda for a single classification or --b-sweep/--b-values for a sweep",
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects --lambda together with sweep flags"),
    }
}

fn cmd_stability_single(args: &StabilityArgs, loaded: &LoadedParams, lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(input_error("invalid_input", "lambda must be positive"));
    }
    if !(args.margin >= 0.0) {
        return Err(input_error("invalid_input", "margin must be nonnegative"));
    }
    let n_cells = args
        .cells
        .unwrap_or_else(|| default_cells_for_radius(lambda.sqrt()));
    let config = json!({
        "command": "stability",
        "mode": "single",
        "params": loaded.gl,
        "bec_params": loaded.bec,
        "lambda": lambda,
        "n_cells": n_cells,
        "margin": args.margin,
        "seed": args.seed,
    });
    let hash = config_hash(&config);

    let report = classify_with_margin(&loaded.gl, lambda, n_cells, args.margin)?;
    println!(
        "b={} lambda={} mu0={} mu1={} classification={}",
        sci(loaded.gl.b),
        sci(lambda),
        sci(report.mu0),
        sci(report.mu1),
        report.classification
    );

    if let Some(out) = &args.out {
        let row = format!(
            "{},{},{},{},{}",
            sci(loaded.gl.b),
            sci(lambda),
            sci(report.mu0),
            sci(report.mu1),
            report.classification
        );
        write_csv(out, "b,lambda,mu0,mu1,classification", &[row])?;
        write_json(
            &meta_path(out),
            &json!({
                "command": "stability",
                "config_hash": hash,
                "config": config,
                "mu0": report.mu0,
                "mu1": report.mu1,
                "classification": report.classification.to_string(),
            }),
        )?;
        println!("wrote {}", out.display());
        println!("wrote {}", meta_path(out).display());
    }
    Ok(())
}

fn cmd_stability_sweep(args: &StabilityArgs, loaded: &LoadedParams, bs: &[f64]) -> Result<()> {
    if !(args.lambda_max > 0.0) {
        return Err(input_error("invalid_input", "lambda-max must be positive"));
    }
    if !(args.rel_tol > 0.0 && args.rel_tol < 1.0) {
        return Err(input_error("invalid_input", "rel-tol must lie in (0, 1)"));
    }
    let out = args.out.as_ref().ok_or_else(|| {
        input_error("invalid_input", "a sweep needs --out for the diagram CSV")
    })?;

    let config = json!({
        "command": "stability",
        "mode": "sweep",
        "params": loaded.gl,
        "bec_params": loaded.bec,
        "b_values": bs,
        "lambda_max": args.lambda_max,
        "rel_tol": args.rel_tol,
        "seed": args.seed,
    });
    let hash = config_hash(&config);

    let entries = sweep_b(&loaded.gl, bs, args.lambda_max, args.rel_tol);

    let mut diagram = Vec::with_capacity(entries.len());
    let mut trace_rows = Vec::new();
    let mut summary = Vec::with_capacity(entries.len());
    for entry in &entries {
        match &entry.result {
            Ok(r) => {
                let star = r.lambda_star.map(sci).unwrap_or_else(|| "nan".to_string());
                diagram.push(format!(
                    "{},{star},{},{}",
                    sci(entry.b),
                    r.status,
                    r.n_bisections
                ));
                for t in &r.mu1_trace {
                    trace_rows.push(format!(
                        "{},{},{},{}",
                        sci(entry.b),
                        sci(t.lambda),
                        sci(t.mu0),
                        sci(t.mu1)
                    ));
                }
                summary.push(json!({
                    "b": entry.b,
                    "status": r.status.to_string(),
                    "lambda_star": r.lambda_star,
                    "bracket": r.bracket.map(|(lo, hi)| vec![lo, hi]),
                    "n_bisections": r.n_bisections,
                    "n_trace_points": r.mu1_trace.len(),
                    "sign_changes": r.sign_changes,
                    "error": serde_json::Value::Null,
                }));
            }
            Err(e) => {
                diagram.push(format!("{},nan,error,0", sci(entry.b)));
                summary.push(json!({
                    "b": entry.b,
                    "status": "error",
                    "lambda_star": serde_json::Value::Null,
                    "bracket": serde_json::Value::Null,
                    "n_bisections": 0,
                    "n_trace_points": 0,
                    "sign_changes": [],
                    "error": e.to_string(),
                }));
            }
        }
    }

    write_csv(out, "b,lambda_star,status,n_bisections", &diagram)?;
    write_json(
        &meta_path(out),
        &json!({
            "command": "stability",
            "config_hash": hash,
            "config": config,
            "entries": summary,
        }),
    )?;
    println!("wrote {}", out.display());
    println!("wrote {}", meta_path(out).display());

    if let Some(tpath) = &args.trace {
        write_csv(tpath, "b,lambda,mu0,mu1", &trace_rows)?;
        write_json(
            &meta_path(tpath),
            &json!({
                "command": "stability",
                "config_hash": hash,
                "kind": "trace",
            }),
        )?;
        println!("wrote {}", tpath.display());
    }
    Ok(())
}

/// `bec-map`: reduce condensate parameters to the effective model
/// parameters and coupling strength.
pub fn cmd_bec_map(args: &BecMapArgs) -> Result<()> {
    let bp: BecParams = read_json(&args.bec, "condensate parameter")?;
    let (gl, lambda) = match bec_map(&bp) {
        Ok(x) => x,
        Err(e @ vortex_core::Error::BecRejected(_)) => {
            return Err(file_error("invalid_input", e.to_string(), &args.bec));
        }
        Err(e) => return Err(e.into()),
    };
    let config = json!({
        "command": "bec-map",
        "bec_params": bp,
    });
    let payload = json!({
        "command": "bec-map",
        "config_hash": config_hash(&config),
        "bec_params": bp,
        "params": gl,
        "lambda": lambda,
    });
    match &args.out {
        Some(out) => {
            write_json(out, &payload)?;
            println!("wrote {}", out.display());
        }
        None => println!("{}", serde_json::to_string(&payload).expect("payload serializes")),
    }
    Ok(())
}
