//! Lifting scalar-field bound states to verified Kirchhoff solutions.
//!
//! Every lifted solution u(x) = v(tx) is checked through independent routes:
//! the closed-form energy g(t) against direct quadrature of the functional,
//! the change-of-variable identities D_u = t^{2-N}·D_v and a + b·D_u = t^{-2},
//! a grid PDE residual, and the Pohozaev identity of the nonlocal problem.

use serde::{Deserialize, Serialize};

use crate::cache::StateCache;
use crate::groundstate::{
    big_f_integral, closed_form_1d, dirichlet_norm_sq, find_bound_state, BoundState, RadialProfile,
    ShootingConfig,
};
use crate::nonlinearity::{check_berestycki_lions, PowerNonlinearity};
use crate::quad::{integrate_grid, sphere_surface};
use crate::rescale::{
    classify_existence, critical_scales, g_energy, h_eval, h_roots, thresholds_a, thresholds_b,
    CriticalScales, ExistenceClass, KirchhoffParams, Thresholds,
};
use crate::{Error, Result};

/// Verification gates applied to every accepted solution.
pub const PDE_RESIDUAL_GATE: f64 = 1.0e-6;
pub const POHOZAEV_P_GATE: f64 = 1.0e-5;
pub const ENERGY_AGREEMENT_GATE: f64 = 1.0e-4;
pub const SCALING_D_GATE: f64 = 1.0e-10;
pub const SCALING_T_GATE: f64 = 1.0e-8;
/// |Φ| bound for members of the degenerate N = 4 continuum.
pub const CONTINUUM_ENERGY_GATE: f64 = 1.0e-6;

/// A verified solution of the nonlocal problem obtained by rescaling.
#[derive(Debug, Clone)]
pub struct KirchhoffSolution {
    /// Scaling factor (the free λ for continuum members).
    pub t: f64,
    pub label: String,
    pub profile_u: RadialProfile,
    /// Dirichlet seminorm squared of u, by quadrature on the rescaled grid.
    pub d_u: f64,
    /// Closed-form energy g(t); exactly zero on the continuum.
    pub phi_formula: f64,
    /// Energy by direct quadrature of the functional.
    pub phi_quadrature: f64,
    /// Relative L²(r^{N-1}) norm of the PDE defect.
    pub residual_pde: f64,
    /// Pohozaev defect of the nonlocal problem, normalized.
    pub residual_pohozaev: f64,
    /// Source bound-state data.
    pub source_k: usize,
    pub source_d: f64,
    pub source_zeta0: f64,
}

impl KirchhoffSolution {
    /// All verification gates at their shipped tolerances.
    pub fn gates_ok(&self, params: &KirchhoffParams) -> bool {
        self.gate_failures(params).is_empty()
    }

    pub fn gate_failures(&self, params: &KirchhoffParams) -> Vec<String> {
        let mut failures = Vec::new();
        let nf = params.n as f64;
        let d_expected = self.t.powf(2.0 - nf) * self.source_d;
        if (self.d_u - d_expected).abs() > SCALING_D_GATE * self.d_u.abs() {
            failures.push(format!(
                "D_u = {:.17e} vs t^(2-N) D_v = {:.17e}",
                self.d_u, d_expected
            ));
        }
        let t_inv_sq = 1.0 / (self.t * self.t);
        if (params.a + params.b * self.d_u - t_inv_sq).abs() > SCALING_T_GATE * t_inv_sq {
            failures.push(format!(
                "a + b D_u = {:.17e} vs t^-2 = {:.17e}",
                params.a + params.b * self.d_u,
                t_inv_sq
            ));
        }
        if self.residual_pde > PDE_RESIDUAL_GATE {
            failures.push(format!("PDE residual {:.3e}", self.residual_pde));
        }
        if self.residual_pohozaev.abs() > POHOZAEV_P_GATE {
            failures.push(format!("Pohozaev residual {:.3e}", self.residual_pohozaev));
        }
        let phi_scale = self.phi_formula.abs().max(1.0);
        if (self.phi_formula - self.phi_quadrature).abs() > ENERGY_AGREEMENT_GATE * phi_scale {
            failures.push(format!(
                "energies disagree: formula {:.17e}, quadrature {:.17e}",
                self.phi_formula, self.phi_quadrature
            ));
        }
        if self.label == "continuum" && self.phi_quadrature.abs() > CONTINUUM_ENERGY_GATE {
            failures.push(format!(
                "continuum energy {:.3e} not zero",
                self.phi_quadrature
            ));
        }
        failures
    }

    /// Two-column CSV `r,u` of the rescaled profile, for plotting.
    pub fn u_csv(&self) -> String {
        let mut out = String::from("r,u\n");
        for i in 0..self.profile_u.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e}\n",
                self.profile_u.r()[i],
                self.profile_u.v()[i]
            ));
        }
        out
    }
}

/// Lift a bound state along every root of h(t) = b·D_v.
///
/// The empty list encodes nonexistence. The degenerate N = 4 continuum is not
/// enumerable and must go through [`continuum_family`].
pub fn lift(
    bs: &BoundState,
    nl: &PowerNonlinearity,
    params: &KirchhoffParams,
) -> Result<Vec<KirchhoffSolution>> {
    let roots = h_roots(params.b * bs.d, params.a, params.n);
    let mut out = Vec::with_capacity(roots.len());
    for root in roots {
        match root.t() {
            Some(t) => out.push(lift_with_root(bs, nl, params, t, root.label())),
            None => return Err(Error::ContinuumCase),
        }
    }
    Ok(out)
}

/// Build the rescaled solution for an explicit root t. Also used by the
/// verifier to rebuild branches from stored scalings.
pub fn lift_with_root(
    bs: &BoundState,
    nl: &PowerNonlinearity,
    params: &KirchhoffParams,
    t: f64,
    label: &str,
) -> KirchhoffSolution {
    debug_assert!(t > 0.0);
    // u sampled at r/t carries the values of v at r exactly; no interpolation.
    let r_u: Vec<f64> = bs.profile.r().iter().map(|&r| r / t).collect();
    let u: Vec<f64> = bs.profile.v().to_vec();
    let du: Vec<f64> = bs.profile.dv().iter().map(|&d| t * d).collect();
    let profile_u =
        RadialProfile::new(params.n, r_u, u, du).expect("rescaling preserves profile invariants");

    let d_u = dirichlet_norm_sq(&profile_u);
    let phi_formula = if label == "continuum" {
        0.0
    } else {
        g_energy(t, params.a, params.b, params.n)
    };
    let phi_quadrature = energy_quadrature(&profile_u, nl, params);

    let sol = KirchhoffSolution {
        t,
        label: label.to_string(),
        d_u,
        phi_formula,
        phi_quadrature,
        residual_pde: 0.0,
        residual_pohozaev: 0.0,
        source_k: bs.nodes,
        source_d: bs.d,
        source_zeta0: bs.zeta0,
        profile_u,
    };
    let residual_pde = kirchhoff_residual(&sol, nl, params);
    let raw_pohozaev = pohozaev_residual_p(&sol, nl, params);
    let f_int = sphere_surface(params.n) * big_f_integral(&sol.profile_u, nl);
    let denom = (params.a * d_u + params.b * d_u * d_u).max(f_int.abs());
    KirchhoffSolution {
        residual_pde,
        residual_pohozaev: raw_pohozaev / denom,
        ..sol
    }
}

/// Φ(u) = (a/2)D_u + (b/4)D_u² - ∫F(u) by direct quadrature.
pub fn energy_quadrature(
    u: &RadialProfile,
    nl: &PowerNonlinearity,
    params: &KirchhoffParams,
) -> f64 {
    let d_u = dirichlet_norm_sq(u);
    let f_int = sphere_surface(params.n) * big_f_integral(u, nl);
    0.5 * params.a * d_u + 0.25 * params.b * d_u * d_u - f_int
}

/// Relative L²(r^{N-1}) residual of -(a + b·D_u)Δu = f(u) over the grid.
///
/// The radial Laplacian of u(x) = v(tx) is reconstructed ODE-consistently:
/// u'' + (N-1)/r·u' = -t²·f(u), which is exact along the source trajectory,
/// so the residual isolates the scaling-algebra defect 1 - (a + b·D_u)t².
pub fn kirchhoff_residual(
    sol: &KirchhoffSolution,
    nl: &PowerNonlinearity,
    params: &KirchhoffParams,
) -> f64 {
    let coeff = params.a + params.b * sol.d_u;
    let t_sq = sol.t * sol.t;
    let nm1 = (params.n - 1) as i32;
    let p = &sol.profile_u;
    let num = integrate_grid(p.r(), p.v(), p.dv(), |r, v, _dv| {
        let f_u = nl.eval_f(v);
        let defect = coeff * (-t_sq * f_u) + f_u;
        defect * defect * r.powi(nm1)
    });
    let den = integrate_grid(p.r(), p.v(), p.dv(), |r, v, _dv| {
        let f_u = nl.eval_f(v);
        f_u * f_u * r.powi(nm1)
    });
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

/// Signed Pohozaev defect of the nonlocal problem:
/// (N-2)/(2N)·(a·D_u + b·D_u²) - ∫F(u).
pub fn pohozaev_residual_p(
    sol: &KirchhoffSolution,
    nl: &PowerNonlinearity,
    params: &KirchhoffParams,
) -> f64 {
    let nf = params.n as f64;
    let f_int = sphere_surface(params.n) * big_f_integral(&sol.profile_u, nl);
    (nf - 2.0) / (2.0 * nf) * (params.a * sol.d_u + params.b * sol.d_u * sol.d_u) - f_int
}

/// One member u_λ(·) = v(λ·) of the degenerate N = 4 continuum, which exists
/// exactly when a = 0 and b·D_v = 1; every member has zero energy.
pub fn continuum_family(
    bs: &BoundState,
    lambda: f64,
    nl: &PowerNonlinearity,
    params: &KirchhoffParams,
) -> Result<KirchhoffSolution> {
    if params.n != 4 || params.a != 0.0 {
        return Err(Error::Precondition(format!(
            "continuum requires N = 4, a = 0; got N = {}, a = {}",
            params.n, params.a
        )));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Precondition(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let s = params.b * bs.d;
    if (s - 1.0).abs() > 1.0e-10 {
        return Err(Error::NotOnContinuum { s });
    }
    Ok(lift_with_root(bs, nl, params, lambda, "continuum"))
}

/// Reference to the minimal-energy branch of an atlas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStateRef {
    pub k: usize,
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchReport {
    pub label: String,
    pub t: f64,
    pub phi_formula: f64,
    pub phi_quadrature: f64,
    pub residual_pde: f64,
    pub residual_pohozaev: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtlasEntry {
    pub k: usize,
    pub zeta0: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub classification: ExistenceClass,
    pub branches: Vec<BranchReport>,
    /// Relative paths of the stored source-state files, set by the CLI.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_json: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_csv: Option<String>,
}

/// The per-(a, b, N) report over the computed bound states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionAtlas {
    pub params: KirchhoffParams,
    pub nonlinearity: PowerNonlinearity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<CriticalScales>,
    pub entries: Vec<AtlasEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_state: Option<GroundStateRef>,
    /// Sorted distinct energies of the computed branches. Witness values
    /// only: finitely many branches cannot certify the full critical set.
    pub witness_critical_values: Vec<f64>,
    /// min(0, smallest computed energy): a witness-level infimum candidate.
    pub m_inf_witness: f64,
    /// For N ≥ 5, a > 0 and b below the small-b gate: whether the computed
    /// branches form the signed double ladder (all lower-branch energies
    /// negative and increasing, all upper-branch energies positive and
    /// increasing, interleaved around zero). None when out of regime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signed_ladder_verified: Option<bool>,
    pub messages: Vec<String>,
}

/// Atlas plus the in-memory states and solutions it reports on.
#[derive(Debug, Clone)]
pub struct AtlasBuild {
    pub atlas: SolutionAtlas,
    pub states: Vec<BoundState>,
    pub solutions: Vec<Vec<KirchhoffSolution>>,
}

/// Solve (or load from cache) the bound states k = 0..k_max-1 at dimension N.
/// Mutually independent solves run on separate threads.
pub fn solve_states(
    nl: &PowerNonlinearity,
    n: u32,
    k_max: usize,
    cfg: &ShootingConfig,
    cache: Option<&StateCache>,
) -> Result<Vec<BoundState>> {
    if k_max == 0 {
        return Err(Error::Precondition("k_max must be >= 1".into()));
    }
    if n == 1 {
        // The nontrivial N = 1 solution is unique up to sign and translation.
        return Ok(vec![closed_form_1d(nl, cfg)?]);
    }

    let mut states: Vec<Option<BoundState>> = vec![None; k_max];
    let mut missing: Vec<usize> = Vec::new();
    for (k, slot) in states.iter_mut().enumerate() {
        if let Some(cache) = cache {
            if let Some(hit) = cache.load(&StateCache::key(nl, n, k, cfg))? {
                *slot = Some(hit);
                continue;
            }
        }
        missing.push(k);
    }

    if !missing.is_empty() {
        let mut solved: Vec<(usize, Result<BoundState>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = missing
                .iter()
                .map(|&k| scope.spawn(move || (k, find_bound_state(nl, n, k, cfg))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        });
        solved.sort_by_key(|(k, _)| *k);
        for (k, result) in solved {
            let state = result?;
            if let Some(cache) = cache {
                cache.store(&StateCache::key(nl, n, k, cfg), &state)?;
            }
            states[k] = Some(state);
        }
    }
    Ok(states
        .into_iter()
        .map(|s| s.expect("all states filled"))
        .collect())
}

/// Assemble the full atlas: solve states, sort by D, lift every branch,
/// attach thresholds, scales and classifications, and select a ground state.
pub fn build_atlas(
    nl: &PowerNonlinearity,
    params: &KirchhoffParams,
    k_max: usize,
    cfg: &ShootingConfig,
    lambdas: &[f64],
    cache: Option<&StateCache>,
) -> Result<AtlasBuild> {
    let report = check_berestycki_lions(nl, params.n);
    if !report.all_ok() {
        return Err(Error::Precondition(format!(
            "assumptions (f1)-(f4) fail at N = {}: {:?}",
            params.n, report.messages
        )));
    }

    let mut states = solve_states(nl, params.n, k_max, cfg, cache)?;
    // Energies are driven by D, not by the node index; order by D.
    states.sort_by(|x, y| x.d.partial_cmp(&y.d).expect("finite norms"));

    let mut messages = Vec::new();
    if params.n == 1 && k_max > 1 {
        messages.push("N = 1 admits a single nontrivial state; k_max reduced to 1".into());
    }

    let d1 = states[0].d;
    let thresholds = match (params.n, params.a > 0.0) {
        (n, true) if n >= 5 => {
            let mut th = thresholds_b(params.a, n, d1)?;
            let dual = thresholds_a(params.b, n, d1)?;
            th.a_star = dual.a_star;
            th.a_dstar = dual.a_dstar;
            Some(th)
        }
        (4, true) => Some(thresholds_b(params.a, 4, d1)?),
        _ => None,
    };
    let scales = critical_scales(params.a, params.n).ok();

    let mut entries = Vec::with_capacity(states.len());
    let mut solutions: Vec<Vec<KirchhoffSolution>> = Vec::with_capacity(states.len());
    for state in &states {
        let classification = classify_existence(params.a, params.b, params.n, state.d);
        let sols = if classification == ExistenceClass::Continuum {
            let mut members = Vec::with_capacity(lambdas.len());
            for &lambda in lambdas {
                members.push(continuum_family(state, lambda, nl, params)?);
            }
            members
        } else {
            lift(state, nl, params)?
        };
        for sol in &sols {
            for failure in sol.gate_failures(params) {
                messages.push(format!(
                    "gate failure on k = {}, branch {}: {}",
                    state.nodes, sol.label, failure
                ));
            }
        }
        entries.push(AtlasEntry {
            k: state.nodes,
            zeta0: state.zeta0,
            d: state.d,
            classification,
            branches: sols
                .iter()
                .map(|s| BranchReport {
                    label: s.label.clone(),
                    t: s.t,
                    phi_formula: s.phi_formula,
                    phi_quadrature: s.phi_quadrature,
                    residual_pde: s.residual_pde,
                    residual_pohozaev: s.residual_pohozaev,
                })
                .collect(),
            state_json: None,
            state_csv: None,
        });
        solutions.push(sols);
    }

    let mut witness: Vec<f64> = entries
        .iter()
        .flat_map(|e| e.branches.iter().map(|b| b.phi_formula))
        .collect();
    witness.sort_by(|x, y| x.partial_cmp(y).expect("finite energies"));
    witness.dedup_by(|x, y| (*x - *y).abs() <= 1.0e-10 * x.abs().max(y.abs()).max(1.0));
    let m_inf_witness = witness.first().copied().unwrap_or(0.0).min(0.0);

    let signed_ladder_verified = signed_ladder_check(&entries, params, &scales);

    let mut atlas = SolutionAtlas {
        params: *params,
        nonlinearity: nl.clone(),
        thresholds,
        scales,
        entries,
        ground_state: None,
        witness_critical_values: witness,
        m_inf_witness,
        signed_ladder_verified,
        messages,
    };
    atlas.ground_state = match ground_state_select(&atlas) {
        Ok((entry, branch)) => Some(GroundStateRef {
            k: atlas.entries[entry].k,
            label: atlas.entries[entry].branches[branch].label.clone(),
        }),
        Err(Error::EmptyAtlas) => None,
        Err(e) => return Err(e),
    };
    Ok(AtlasBuild {
        atlas,
        states,
        solutions,
    })
}

/// For N ≥ 5, a > 0 and b < h(t**)/D_max: check the interleaved signed-energy
/// ladder over the computed entries.
fn signed_ladder_check(
    entries: &[AtlasEntry],
    params: &KirchhoffParams,
    scales: &Option<CriticalScales>,
) -> Option<bool> {
    if params.n < 5 || params.a <= 0.0 || entries.is_empty() {
        return None;
    }
    let scales = scales.as_ref()?;
    let t_dstar = scales.t_dstar?;
    let t_star = scales.t_star?;
    let d_max = entries.last()?.d;
    let b_gate = h_eval(t_dstar, params.a, params.n) / d_max;
    if params.b >= b_gate {
        return None;
    }
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for entry in entries {
        if entry.branches.len() != 2 {
            return Some(false);
        }
        for branch in &entry.branches {
            match branch.label.as_str() {
                "lower" => lowers.push((branch.t, branch.phi_formula)),
                "upper" => uppers.push((branch.t, branch.phi_formula)),
                _ => return Some(false),
            }
        }
    }
    // Entries are D-ascending, so lower roots ascend below t** and upper
    // roots descend toward t*; energies interleave around zero.
    let mut ok = true;
    for window in lowers.windows(2) {
        ok &= window[0].0 < window[1].0 && window[0].1 < window[1].1;
    }
    for window in uppers.windows(2) {
        ok &= window[0].0 > window[1].0 && window[0].1 < window[1].1;
    }
    ok &= lowers.iter().all(|&(t, phi)| t < t_dstar && phi < 0.0);
    ok &= uppers.iter().all(|&(t, phi)| t > t_star && phi > 0.0);
    Some(ok)
}

/// Minimal-energy branch of the atlas as (entry index, branch index).
pub fn ground_state_select(atlas: &SolutionAtlas) -> Result<(usize, usize)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, entry) in atlas.entries.iter().enumerate() {
        for (j, branch) in entry.branches.iter().enumerate() {
            let phi = branch.phi_formula;
            if best.is_none_or(|(_, _, current)| phi < current) {
                best = Some((i, j, phi));
            }
        }
    }
    let (i, j, _) = best.ok_or(Error::EmptyAtlas)?;
    Ok((i, j))
}

/// Two distinct positive radial solutions from the same ground state, for
/// N ≥ 5, a > 0, 0 < b < b_star: the lower branch carries the larger norm and
/// the smaller energy.
pub fn uniqueness_breaking_witness(
    nl: &PowerNonlinearity,
    n: u32,
    a: f64,
    b: f64,
    cfg: &ShootingConfig,
    cache: Option<&StateCache>,
) -> Result<(KirchhoffSolution, KirchhoffSolution)> {
    if n < 5 || a <= 0.0 {
        return Err(Error::Precondition(format!(
            "uniqueness breaking requires N >= 5 and a > 0; got N = {n}, a = {a}"
        )));
    }
    let ground = solve_states(nl, n, 1, cfg, cache)?.remove(0);
    let b_star = thresholds_b(a, n, ground.d)?
        .b_star
        .expect("b_star exists for N >= 5");
    if !(b > 0.0 && b < b_star * (1.0 - 1.0e-12)) {
        return Err(Error::OutOfRegime { b, b_star });
    }
    let params = KirchhoffParams::new(a, b, n)?;
    let mut sols = lift(&ground, nl, &params)?;
    if sols.len() != 2 {
        return Err(Error::NoConvergence(format!(
            "expected two branches below b_star, found {}",
            sols.len()
        )));
    }
    let upper = sols.pop().expect("two branches");
    let lower = sols.pop().expect("two branches");
    debug_assert!(lower.t < upper.t);
    Ok((lower, upper))
}
