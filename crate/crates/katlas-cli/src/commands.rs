//! Subcommand implementations: assumption checks, bound-state solves,
//! thresholds, the atlas (fixed b or b-sweep), and artifact verification.

use std::fs;
use std::path::{Path, PathBuf};

use katlas::cache::StateCache;
use katlas::groundstate::{
    action, dirichlet_norm_sq, tail_decay_rate, BoundState, BoundStateMeta, RadialProfile,
};
use katlas::jsonnum;
use katlas::kirchhoff::{
    build_atlas, continuum_family, lift_with_root, solve_states, SolutionAtlas,
};
use katlas::nonlinearity::check_berestycki_lions;
use katlas::rescale::{g_energy, h_eval, h_roots, thresholds_a, thresholds_b, KirchhoffParams};
use katlas::Error;

use crate::config::RunConfig;
use crate::{CmdError, CmdResult};

fn domain(e: impl std::fmt::Display) -> CmdError {
    CmdError::Domain(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CmdError {
    CmdError::Usage(e.to_string())
}

fn map_solver_error(e: Error) -> CmdError {
    match e {
        Error::CacheIo(_) | Error::RecordFormat(_) => usage(e),
        other => domain(other),
    }
}

fn open_cache(config: &RunConfig) -> Result<StateCache, CmdError> {
    let cache = match &config.cache {
        Some(dir) => StateCache::new(dir),
        None => StateCache::from_env(),
    };
    cache.map_err(|e| usage(format!("cannot open cache: {e}")))
}

fn ensure_out(config: &RunConfig) -> Result<(), CmdError> {
    fs::create_dir_all(&config.out).map_err(|e| {
        usage(format!(
            "cannot create output dir {}: {e}",
            config.out.display()
        ))
    })
}

fn write_atomic(path: &Path, content: &str) -> Result<(), CmdError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).map_err(|e| usage(format!("write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| usage(format!("rename to {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CmdError> {
    jsonnum::to_string(value).map_err(|e| domain(format!("serialization failed: {e}")))
}

/// `check-f`: validate (f1)-(f4) at the configured dimension.
pub fn check_f(config: &RunConfig) -> CmdResult {
    let report = check_berestycki_lions(&config.nonlinearity, config.n);
    println!("{}", to_json(&report)?);
    if report.all_ok() {
        Ok(())
    } else {
        Err(CmdError::Domain("assumptions (f1)-(f4) failed".into()))
    }
}

fn state_file_names(k: usize) -> (String, String) {
    (format!("state_k{k}.json"), format!("state_k{k}.csv"))
}

fn write_state_files(out: &Path, state: &BoundState) -> Result<(), CmdError> {
    let (json_name, csv_name) = state_file_names(state.nodes);
    write_atomic(&out.join(json_name), &to_json(&state.meta())?)?;
    write_atomic(&out.join(csv_name), &state.profile.to_csv())
}

/// `solve-q`: bound states k = 0..k_max-1 of the local problem.
pub fn solve_q(config: &RunConfig) -> CmdResult {
    let report = check_berestycki_lions(&config.nonlinearity, config.n);
    if !report.all_ok() {
        println!("{}", to_json(&report)?);
        return Err(CmdError::Domain("assumptions (f1)-(f4) failed".into()));
    }
    let cache = open_cache(config)?;
    let states = solve_states(
        &config.nonlinearity,
        config.n,
        config.k_max,
        &config.shooting,
        Some(&cache),
    )
    .map_err(map_solver_error)?;
    ensure_out(config)?;
    for state in &states {
        write_state_files(&config.out, state)?;
        println!(
            "k={} zeta0={:.16e} D={:.16e} S={:.16e} pohozaev_residual={:.3e} decay_rate={:.6}",
            state.nodes, state.zeta0, state.d, state.s, state.pohozaev_residual, state.decay_rate
        );
    }
    Ok(())
}

fn thresholds_for(config: &RunConfig, d1: f64) -> Result<katlas::rescale::Thresholds, CmdError> {
    if config.n >= 5 && config.a > 0.0 {
        let mut th = thresholds_b(config.a, config.n, d1).map_err(domain)?;
        if let Some(b) = config.b {
            let dual = thresholds_a(b, config.n, d1).map_err(domain)?;
            th.a_star = dual.a_star;
            th.a_dstar = dual.a_dstar;
        }
        Ok(th)
    } else if config.n == 4 && config.a > 0.0 {
        thresholds_b(config.a, 4, d1).map_err(domain)
    } else {
        Err(CmdError::Domain(format!(
            "no thresholds for N = {}, a = {}: existence does not hinge on b",
            config.n, config.a
        )))
    }
}

/// `thresholds`: b_star/b_dstar (and duals in a) from the solved ground state.
pub fn thresholds(config: &RunConfig) -> CmdResult {
    if config.n < 4 || config.a == 0.0 {
        return Err(CmdError::Domain(format!(
            "no thresholds for N = {}, a = {}: existence does not hinge on b",
            config.n, config.a
        )));
    }
    let cache = open_cache(config)?;
    let ground = solve_states(
        &config.nonlinearity,
        config.n,
        1,
        &config.shooting,
        Some(&cache),
    )
    .map_err(map_solver_error)?
    .remove(0);
    let th = thresholds_for(config, ground.d)?;
    let json = to_json(&th)?;
    println!("{json}");
    ensure_out(config)?;
    write_atomic(&config.out.join("thresholds.json"), &json)
}

/// `atlas`: full report at fixed b, or the branch-count diagram over a sweep.
pub fn atlas(config: &RunConfig) -> CmdResult {
    if config.b_sweep.is_some() {
        return sweep_atlas(config);
    }
    let b = config.fixed_b()?;
    let params = KirchhoffParams::new(config.a, b, config.n).map_err(domain)?;
    let cache = open_cache(config)?;
    let mut build = build_atlas(
        &config.nonlinearity,
        &params,
        config.k_max,
        &config.shooting,
        &config.lambdas,
        Some(&cache),
    )
    .map_err(map_solver_error)?;

    ensure_out(config)?;
    for (i, state) in build.states.iter().enumerate() {
        write_state_files(&config.out, state)?;
        let (json_name, csv_name) = state_file_names(state.nodes);
        build.atlas.entries[i].state_json = Some(json_name);
        build.atlas.entries[i].state_csv = Some(csv_name);
    }
    for (entry, sols) in build.atlas.entries.iter().zip(&build.solutions) {
        for (j, sol) in sols.iter().enumerate() {
            let name = if sol.label == "continuum" {
                format!("branch_k{}_continuum{j}.csv", entry.k)
            } else {
                format!("branch_k{}_{}.csv", entry.k, sol.label)
            };
            write_atomic(&config.out.join(name), &sol.u_csv())?;
        }
    }
    write_atomic(&config.out.join("atlas.json"), &to_json(&build.atlas)?)?;

    let mut verified = 0usize;
    let mut total = 0usize;
    for (entry, sols) in build.atlas.entries.iter().zip(&build.solutions) {
        for sol in sols {
            total += 1;
            let ok = sol.gates_ok(&params);
            verified += ok as usize;
            println!(
                "k={} branch={} t={:.12e} phi={:.12e} pde_residual={:.3e} pohozaev={:.3e}{}",
                entry.k,
                sol.label,
                sol.t,
                sol.phi_formula,
                sol.residual_pde,
                sol.residual_pohozaev,
                if ok { "" } else { "  GATES FAILED" }
            );
        }
    }
    match &build.atlas.ground_state {
        Some(gs) => println!("ground_state: k={} branch={}", gs.k, gs.label),
        None => println!("ground_state: none (no branches exist at these parameters)"),
    }
    if verified == 0 {
        return Err(CmdError::Domain(format!(
            "no verified branches ({total} computed)"
        )));
    }
    if verified != total {
        eprintln!("warning: {verified} of {total} branches verified");
    }
    Ok(())
}

/// Sweep mode: two-branch diagram data over b, driven by the ground state.
fn sweep_atlas(config: &RunConfig) -> CmdResult {
    let sweep = config.b_sweep.as_ref().expect("sweep mode");
    let cache = open_cache(config)?;
    let ground = solve_states(
        &config.nonlinearity,
        config.n,
        1,
        &config.shooting,
        Some(&cache),
    )
    .map_err(map_solver_error)?
    .remove(0);

    ensure_out(config)?;
    if let Ok(th) = thresholds_for(config, ground.d) {
        write_atomic(&config.out.join("thresholds.json"), &to_json(&th)?)?;
    }

    let mut csv = String::from("b,branch_count,phi_lower,phi_upper\n");
    let mut any = false;
    for b in sweep.values() {
        let roots = h_roots(b * ground.d, config.a, config.n);
        let energies: Vec<f64> = roots
            .iter()
            .map(|root| match root.t() {
                Some(t) => g_energy(t, config.a, b, config.n),
                None => 0.0,
            })
            .collect();
        any |= !roots.is_empty();
        let (lo, hi) = match energies.as_slice() {
            [] => (String::new(), String::new()),
            [one] => (format!("{one:.16e}"), format!("{one:.16e}")),
            [first, .., last] => (format!("{first:.16e}"), format!("{last:.16e}")),
        };
        csv.push_str(&format!("{b:.16e},{},{lo},{hi}\n", roots.len()));
    }
    write_atomic(&config.out.join("sweep.csv"), &csv)?;
    println!(
        "sweep: {} values of b written to {}",
        sweep.values().len(),
        config.out.display()
    );
    if any {
        Ok(())
    } else {
        Err(CmdError::Domain(
            "no branch exists anywhere on the sweep".into(),
        ))
    }
}

/// `verify`: re-run every residual gate from the stored artifacts.
pub fn verify(atlas_path: &Path) -> CmdResult {
    let text = fs::read_to_string(atlas_path)
        .map_err(|e| usage(format!("cannot read {}: {e}", atlas_path.display())))?;
    let atlas: SolutionAtlas =
        serde_json::from_str(&text).map_err(|e| usage(format!("atlas parse error: {e}")))?;
    let dir = atlas_path.parent().unwrap_or_else(|| Path::new("."));
    let params = atlas.params;
    let nl = &atlas.nonlinearity;

    let mut failures: Vec<String> = Vec::new();
    let mut branches = 0usize;

    for entry in &atlas.entries {
        let (json_name, csv_name) = match (&entry.state_json, &entry.state_csv) {
            (Some(j), Some(c)) => (j.clone(), c.clone()),
            _ => {
                failures.push(format!("entry k={}: no stored state files", entry.k));
                continue;
            }
        };
        let meta_text = fs::read_to_string(dir.join(&json_name))
            .map_err(|e| usage(format!("cannot read {json_name}: {e}")))?;
        let meta: BoundStateMeta = serde_json::from_str(&meta_text)
            .map_err(|e| usage(format!("{json_name} parse error: {e}")))?;
        let csv_text = fs::read_to_string(dir.join(&csv_name))
            .map_err(|e| usage(format!("cannot read {csv_name}: {e}")))?;
        let profile = RadialProfile::from_csv(params.n, &csv_text)
            .map_err(|e| usage(format!("{csv_name}: {e}")))?;

        let mut fail = |msg: String| failures.push(format!("entry k={}: {msg}", entry.k));

        if meta.n != params.n {
            fail(format!(
                "stored dimension {} != atlas dimension {}",
                meta.n, params.n
            ));
        }
        let d = dirichlet_norm_sq(&profile);
        let s = action(&profile, nl);
        if (d - meta.d).abs() > 1.0e-12 * d.abs() {
            fail(format!("stored D {:.17e} != recomputed {:.17e}", meta.d, d));
        }
        if (s - meta.s).abs() > 1.0e-12 * s.abs() {
            fail(format!("stored S {:.17e} != recomputed {:.17e}", meta.s, s));
        }
        let pohozaev = s - d / params.n as f64;
        if pohozaev.abs() > 1.0e-5 * d {
            fail(format!("Pohozaev defect {pohozaev:.3e} exceeds 1e-5 D"));
        }
        let nodes = profile.count_nodes();
        if nodes != entry.k || meta.k != entry.k {
            fail(format!(
                "node count {nodes} (meta {}) != k = {}",
                meta.k, entry.k
            ));
        }
        match tail_decay_rate(&profile, nl) {
            Ok(rate) => {
                let target = nl.omega().sqrt();
                if (rate - target).abs() > 0.05 * target {
                    fail(format!(
                        "decay rate {rate:.6} off sqrt(omega) = {target:.6}"
                    ));
                }
            }
            Err(e) => fail(format!("decay fit failed: {e}")),
        }

        let state = BoundState {
            profile,
            nodes: meta.k,
            zeta0: meta.zeta0,
            d,
            s,
            pohozaev_residual: pohozaev,
            decay_rate: meta.decay_rate,
        };

        for branch in &entry.branches {
            branches += 1;
            let mut bfail =
                |msg: String| failures.push(format!("entry k={} {}: {msg}", entry.k, branch.label));
            let sol = if branch.label == "continuum" {
                match continuum_family(&state, branch.t, nl, &params) {
                    Ok(sol) => sol,
                    Err(e) => {
                        bfail(format!("continuum rebuild failed: {e}"));
                        continue;
                    }
                }
            } else {
                let level = params.b * d;
                let defect = (h_eval(branch.t, params.a, params.n) - level).abs();
                if defect > 1.0e-12 * level.max(1.0) {
                    bfail(format!("scaling root defect |h(t) - bD| = {defect:.3e}"));
                }
                lift_with_root(&state, nl, &params, branch.t, &branch.label)
            };
            for failure in sol.gate_failures(&params) {
                bfail(failure);
            }
            let close = |x: f64, y: f64| (x - y).abs() <= 1.0e-12 * y.abs().max(1.0e-12);
            if !close(branch.phi_formula, sol.phi_formula)
                || !close(branch.phi_quadrature, sol.phi_quadrature)
            {
                bfail(format!(
                    "stored energies ({:.17e}, {:.17e}) != recomputed ({:.17e}, {:.17e})",
                    branch.phi_formula, branch.phi_quadrature, sol.phi_formula, sol.phi_quadrature
                ));
            }
        }
    }

    if failures.is_empty() {
        println!(
            "verified: {} entries, {branches} branches, all gates passed",
            atlas.entries.len()
        );
        Ok(())
    } else {
        for failure in &failures {
            eprintln!("FAIL {failure}");
        }
        Err(CmdError::Domain(format!(
            "{} verification failures",
            failures.len()
        )))
    }
}

/// Resolve the atlas path argument: a directory means `<dir>/atlas.json`.
pub fn resolve_atlas_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("atlas.json")
    } else {
        path.to_path_buf()
    }
}
