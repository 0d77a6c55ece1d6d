//! Acceptance suite: one test per criterion, each printing a PASS line.
//!
//! Every tolerance is pinned here, in code. Solved states are shared across
//! criteria through a file cache in a per-run temp directory.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use katlas::cache::StateCache;
use katlas::groundstate::{closed_form_1d, BoundState, RadialProfile, ShootingConfig};
use katlas::kirchhoff::{
    build_atlas, continuum_family, lift, uniqueness_breaking_witness, KirchhoffSolution,
};
use katlas::nonlinearity::PowerNonlinearity;
use katlas::ode::{integrate, Dp54Options, State2, StepControl};
use katlas::rescale::{
    beta_degenerate, critical_scales, g_energy, h_eval, level_roots_g, phi_n3, phi_n4,
    thresholds_a, thresholds_b, ExistenceClass, KirchhoffParams,
};

fn cfg() -> ShootingConfig {
    ShootingConfig::default()
}

fn shared_cache() -> &'static StateCache {
    static CACHE: OnceLock<StateCache> = OnceLock::new();
    CACHE.get_or_init(|| {
        let dir = std::env::temp_dir().join(format!("katlas-acceptance-{}", std::process::id()));
        StateCache::new(dir).expect("cache dir")
    })
}

fn solve(nl: &PowerNonlinearity, n: u32, k_max: usize) -> Vec<BoundState> {
    katlas::kirchhoff::solve_states(nl, n, k_max, &cfg(), Some(shared_cache())).expect("solve")
}

fn single(omega: f64, coeff: f64, p: f64) -> PowerNonlinearity {
    PowerNonlinearity::single(omega, coeff, p).expect("valid prototype")
}

fn assert_rel(got: f64, want: f64, rel: f64, what: &str) {
    let scale = want.abs().max(f64::MIN_POSITIVE);
    assert!(
        (got - want).abs() <= rel * scale,
        "{what}: got {got:.17e}, want {want:.17e} (rel {:.3e})",
        (got - want).abs() / scale
    );
}

fn assert_gates(sol: &KirchhoffSolution, params: &KirchhoffParams, what: &str) {
    // Criterion 4 gates: a + bD_u = t^-2 (1e-8), D_u = t^(2-N) D_v (1e-10),
    // PDE residual <= 1e-6, Pohozaev residual <= 1e-5, energy agreement 1e-4.
    let failures = sol.gate_failures(params);
    assert!(
        failures.is_empty(),
        "{what} [{} at t={}]: {failures:?}",
        sol.label,
        sol.t
    );
}

/// Criterion 1: the 1D closed forms zeta = sqrt(2), D = S = 4/3 for
/// f(v) = -v + v^3, and pointwise agreement between the time-map route and a
/// direct second-order integration, all inside one second.
#[test]
fn criterion_01_one_dimensional_oracle() {
    let start = Instant::now();
    let nl = single(1.0, 1.0, 4.0);
    let state = closed_form_1d(&nl, &cfg()).expect("1D state");

    assert_rel(state.zeta0, 2.0f64.sqrt(), 1.0e-6, "zeta");
    assert_rel(state.d, 4.0 / 3.0, 1.0e-6, "D");
    assert_rel(state.s, 4.0 / 3.0, 1.0e-6, "S");

    // Direct route: v'' = -f(v) from (zeta, 0) with a Taylor start.
    let zeta = state.zeta0;
    let x0 = 1.0e-6;
    let f_zeta = nl.eval_f(zeta);
    let y0: State2 = [zeta - 0.5 * f_zeta * x0 * x0, -f_zeta * x0];
    let opts = Dp54Options {
        rel_tol: 1.0e-12,
        abs_tol: [1.0e-14, 1.0e-14],
        h_init: 1.0e-6,
        h_max: 0.01,
        h_min: 1.0e-15,
    };
    let rhs = |_x: f64, y: State2| [y[1], -nl.eval_f(y[0])];
    let targets: Vec<f64> = (1..=40).map(|i| 0.25 * i as f64).collect();
    let mut next = 0usize;
    let mut compared = 0usize;
    integrate(rhs, x0, y0, 1.0, 10.0, true, &opts, |step| {
        while next < targets.len() && targets[next] <= step.r1 {
            let x = targets[next];
            if x >= step.r0 {
                let direct = step.eval(x)[0];
                let timemap = profile_value_at(&state.profile, x);
                assert!(
                    (direct - timemap).abs() <= 1.0e-6 * zeta,
                    "x = {x}: direct {direct:.12e} vs time-map {timemap:.12e}"
                );
                compared += 1;
            }
            next += 1;
        }
        StepControl::Continue
    })
    .expect("direct integration");
    assert_eq!(compared, 40);

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "runtime {elapsed:?} exceeds 1 s"
    );
    println!("PASS criterion 1: 1D closed-form oracle (zeta, D, S, dual route) in {elapsed:?}");
}

fn profile_value_at(p: &RadialProfile, x: f64) -> f64 {
    let idx = p.r().partition_point(|&r| r <= x);
    let (i0, i1) = (idx.saturating_sub(1), idx.min(p.len() - 1));
    if i0 == i1 {
        return p.v()[i1];
    }
    let h = p.r()[i1] - p.r()[i0];
    let s = (x - p.r()[i0]) / h;
    let (s2, s3) = (s * s, s * s * s);
    p.v()[i0] * (2.0 * s3 - 3.0 * s2 + 1.0)
        + h * p.dv()[i0] * (s3 - 2.0 * s2 + s)
        + p.v()[i1] * (-2.0 * s3 + 3.0 * s2)
        + h * p.dv()[i1] * (s3 - s2)
}

/// Criterion 2: Pohozaev gate |S - D/N| <= 1e-5 D for ground states across
/// dimensions 2-6, within 60 s.
#[test]
fn criterion_02_pohozaev_gate() {
    let start = Instant::now();
    let cases: &[(u32, f64)] = &[(2, 4.0), (3, 4.0), (4, 3.0), (5, 2.5), (6, 2.2)];
    for &(n, p) in cases {
        let nl = single(1.0, 1.0, p);
        let state = solve(&nl, n, 1).remove(0);
        assert_eq!(state.nodes, 0, "N={n}");
        assert!(
            state.pohozaev_residual.abs() <= 1.0e-5 * state.d,
            "N={n}, p={p}: |S - D/N| = {:.3e} vs 1e-5 D = {:.3e}",
            state.pohozaev_residual.abs(),
            1.0e-5 * state.d
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "runtime {elapsed:?} exceeds 60 s"
    );
    println!("PASS criterion 2: Pohozaev gate at (N,p) in {{(2,4),(3,4),(4,3),(5,2.5),(6,2.2)}} in {elapsed:?}");
}

/// Criterion 3: exact algebra identities at 1e-12 (limits as noted).
#[test]
fn criterion_03_exact_algebra() {
    for &(a, b, n) in &[(1.0, 1.0, 5u32), (0.7, 0.3, 6), (2.5, 0.05, 7)] {
        let nf = n as f64;
        let scales = critical_scales(a, n).unwrap();
        let (t_star, t_dstar, s_star) = (
            scales.t_star.unwrap(),
            scales.t_dstar.unwrap(),
            scales.s_star.unwrap(),
        );

        // s_star = h(t_star), with the closed form as the second route.
        assert_rel(s_star, h_eval(t_star, a, n), 1.0e-12, "s* = h(t*)");
        let closed = 2.0 / (nf - 2.0) * ((nf - 4.0) / ((nf - 2.0) * a)).powf((nf - 4.0) / 2.0);
        assert_rel(s_star, closed, 1.0e-12, "s* closed form");

        // g(t**) = 0 and g(t*) = a^2/(N(N-4)b).
        let c_star = a * a / (nf * (nf - 4.0) * b);
        assert!(
            g_energy(t_dstar, a, b, n).abs() <= 1.0e-12 * c_star,
            "g(t**) = 0"
        );
        assert_rel(g_energy(t_star, a, b, n), c_star, 1.0e-12, "g(t*)");
        if (a, b, n) == (1.0, 1.0, 5) {
            assert_rel(c_star, 0.2, 1.0e-15, "c* = 1/5 at N=5, a=b=1");
        }

        // Thresholds and ordering.
        let th = thresholds_b(a, n, 1.7).unwrap();
        assert!(th.b_dstar.unwrap() < th.b_star.unwrap(), "b** < b*");

        // Level roots: coalescence at c*, limits at c -> 0+.
        let lr_star = level_roots_g(c_star, a, b, n).unwrap();
        assert_rel(lr_star.tau_c, t_star, 1.0e-12, "tau_c(c*) = t*");
        assert_rel(lr_star.tau_up_c, t_star, 1.0e-12, "tau^c(c*) = t*");
        let lr0 = level_roots_g(1.0e-8 * c_star, a, b, n).unwrap();
        assert_rel(lr0.tau_c, t_dstar, 1.0e-3, "tau_c -> t** as c -> 0+");
        assert_rel(
            lr0.tau_up_c,
            1.0 / a.sqrt(),
            1.0e-3,
            "tau^c -> a^(-1/2) as c -> 0+",
        );

        // gamma'(c) > 0 at 20 interior samples.
        for i in 1..=20 {
            let c = c_star * (0.04 + 0.9 * (i as f64 - 1.0) / 19.0);
            let h_fd = 1.0e-6 * c_star;
            let gamma = |c: f64| level_roots_g(c, a, b, n).unwrap().gamma;
            assert!(
                gamma(c + h_fd) > gamma(c),
                "gamma increasing at c = {c:.3e}"
            );
        }

        // Duality: b_star evaluated at a_star recovers b.
        for &d1 in &[0.3, 1.0, 42.0] {
            let a_star = thresholds_a(b, n, d1).unwrap().a_star.unwrap();
            let back = thresholds_b(a_star, n, d1).unwrap().b_star.unwrap();
            assert_rel(back, b, 1.0e-10, "thresholds_b(a*).b_star = b");
        }
    }
    println!(
        "PASS criterion 3: exact algebra identities (scales, g, thresholds, level roots, duality)"
    );
}

/// Criterion 4: the five lift gates hold on solutions from every regime.
#[test]
fn criterion_04_lift_verification() {
    let quartic = single(1.0, 1.0, 4.0);
    let mut checked = 0usize;

    // N = 1, nondegenerate and degenerate.
    let one_d = closed_form_1d(&quartic, &cfg()).unwrap();
    for (a, b) in [(1.0, 1.0), (0.0, 1.0)] {
        let params = KirchhoffParams::new(a, b, 1).unwrap();
        for sol in lift(&one_d, &quartic, &params).unwrap() {
            assert_gates(&sol, &params, "N=1");
            checked += 1;
        }
    }

    // N = 2 and N = 3 single-branch lifts, ground and excited states.
    for n in [2u32, 3] {
        let params = KirchhoffParams::new(1.0, 1.0, n).unwrap();
        for state in solve(&quartic, n, 2) {
            for sol in lift(&state, &quartic, &params).unwrap() {
                assert_gates(&sol, &params, "low dimension");
                checked += 1;
            }
        }
    }

    // N = 4 below the border.
    let cubic2 = single(1.0, 2.0, 3.0);
    let g4 = solve(&cubic2, 4, 1).remove(0);
    let params4 = KirchhoffParams::new(1.0, 0.5 / g4.d, 4).unwrap();
    for sol in lift(&g4, &cubic2, &params4).unwrap() {
        assert_gates(&sol, &params4, "N=4");
        checked += 1;
    }

    // N = 5 two-branch regime and the degenerate monomial regime.
    let p25 = single(1.0, 1.0, 2.5);
    let g5 = solve(&p25, 5, 1).remove(0);
    let b_star = thresholds_b(1.0, 5, g5.d).unwrap().b_star.unwrap();
    let params5 = KirchhoffParams::new(1.0, 0.5 * b_star, 5).unwrap();
    let sols = lift(&g5, &p25, &params5).unwrap();
    assert_eq!(sols.len(), 2);
    for sol in sols {
        assert_gates(&sol, &params5, "N=5 two-branch");
        checked += 1;
    }
    let params50 = KirchhoffParams::new(0.0, 1.0, 5).unwrap();
    for sol in lift(&g5, &p25, &params50).unwrap() {
        assert_gates(&sol, &params50, "N=5 degenerate");
        checked += 1;
    }

    assert!(
        checked >= 10,
        "expected a broad set of lifted solutions, got {checked}"
    );
    println!("PASS criterion 4: lift gates on {checked} solutions across all regimes");
}

/// Criterion 5: N = 3 multiplicity with strictly increasing positive energies
/// matching the closed form phi(D_k) to 1e-8.
#[test]
fn criterion_05_three_dimensional_multiplicity() {
    let nl = single(1.0, 1.0, 4.0);
    let params = KirchhoffParams::new(1.0, 1.0, 3).unwrap();
    let build = build_atlas(&nl, &params, 3, &cfg(), &[], Some(shared_cache())).unwrap();
    assert_eq!(build.atlas.entries.len(), 3);

    let mut previous = 0.0f64;
    for (entry, sols) in build.atlas.entries.iter().zip(&build.solutions) {
        assert_eq!(entry.classification, ExistenceClass::UniqueBranch);
        assert_eq!(sols.len(), 1);
        let sol = &sols[0];
        assert_gates(sol, &params, "N=3 branch");
        assert!(
            sol.phi_formula > previous,
            "energies must strictly increase"
        );
        previous = sol.phi_formula;
        let closed = phi_n3(params.a, params.b, entry.d).unwrap();
        assert_rel(sol.phi_formula, closed, 1.0e-8, "phi matches phi(D_k)");
    }
    let gs = build.atlas.ground_state.as_ref().unwrap();
    assert_eq!(
        (gs.k, gs.label.as_str()),
        (0, "unique"),
        "smallest-D entry wins"
    );
    println!("PASS criterion 5: N=3 three verified branches, energies increase and match phi(D_k)");
}

/// Criterion 6: N = 5 uniqueness breaking at a = 1, p = 2.5.
#[test]
fn criterion_06_uniqueness_breaking() {
    let nl = single(1.0, 1.0, 2.5);
    let ground = solve(&nl, 5, 1).remove(0);
    let th = thresholds_b(1.0, 5, ground.d).unwrap();
    let (b_star, b_dstar) = (th.b_star.unwrap(), th.b_dstar.unwrap());

    // Mid-regime: two positive solutions, ordered energies and norms.
    let b_mid = 0.5 * (b_dstar + b_star);
    let (u1, u2) =
        uniqueness_breaking_witness(&nl, 5, 1.0, b_mid, &cfg(), Some(shared_cache())).unwrap();
    let params_mid = KirchhoffParams::new(1.0, b_mid, 5).unwrap();
    assert_gates(&u1, &params_mid, "u1");
    assert_gates(&u2, &params_mid, "u2");
    for sol in [&u1, &u2] {
        assert!(
            sol.profile_u.v().iter().all(|&v| v > 0.0),
            "both witnesses must be positive solutions"
        );
    }
    assert!(u1.phi_formula < u2.phi_formula, "Phi(u1) < Phi(u2)");
    assert!(u1.d_u > u2.d_u, "norm of u1 exceeds norm of u2");

    // Below b_dstar the lower branch energy turns negative.
    let b_low = 0.9 * b_dstar;
    let (v1, v2) =
        uniqueness_breaking_witness(&nl, 5, 1.0, b_low, &cfg(), Some(shared_cache())).unwrap();
    assert!(
        v1.phi_formula < 0.0 && v2.phi_formula > 0.0,
        "Phi(u1) < 0 < Phi(u2)"
    );

    // Above b_star nothing lifts.
    let params_high = KirchhoffParams::new(1.0, 1.01 * b_star, 5).unwrap();
    assert!(
        lift(&ground, &nl, &params_high).unwrap().is_empty(),
        "zero branches above b*"
    );

    println!("PASS criterion 6: N=5 uniqueness breaking (mid, below b**, above b*)");
}

/// Criterion 7: the N = 4 regimes.
#[test]
fn criterion_07_four_dimensional_regimes() {
    let nl = single(1.0, 2.0, 3.0);
    let ground = solve(&nl, 4, 1).remove(0);
    let d1 = ground.d;

    // a = 1: branches exist iff b D1 < 1, with the closed-form energy.
    for (factor, expect) in [(0.5, true), (0.999, true), (1.0, false), (1.01, false)] {
        let params = KirchhoffParams::new(1.0, factor / d1, 4).unwrap();
        let sols = lift(&ground, &nl, &params).unwrap();
        assert_eq!(
            !sols.is_empty(),
            expect,
            "existence iff bD1 < 1 at factor {factor}"
        );
        if let Some(sol) = sols.first() {
            assert_gates(sol, &params, "N=4 nondegenerate");
            let closed = phi_n4(params.a, params.b, d1).unwrap().unwrap();
            assert_rel(sol.phi_formula, closed, 1.0e-12, "phi formula route");
            assert_rel(sol.phi_quadrature, closed, 1.0e-4, "phi quadrature route");
        }
    }

    // a = 0, b = 1/D1: the continuum; every member verifies with |Phi| <= 1e-6.
    let params_cont = KirchhoffParams::new(0.0, 1.0 / d1, 4).unwrap();
    for lambda in [0.5, 1.0, 2.0] {
        let member = continuum_family(&ground, lambda, &nl, &params_cont).unwrap();
        assert_gates(&member, &params_cont, "continuum member");
        assert!(
            member.phi_quadrature.abs() <= 1.0e-6,
            "lambda = {lambda}: |Phi| = {:.3e}",
            member.phi_quadrature.abs()
        );
        assert_eq!(member.phi_formula, 0.0);
    }

    // a = 0, b = 1.1/D1: zero branches.
    let params_off = KirchhoffParams::new(0.0, 1.1 / d1, 4).unwrap();
    assert!(lift(&ground, &nl, &params_off).unwrap().is_empty());

    println!("PASS criterion 7: N=4 borders, continuum members, and off-level nonexistence");
}

/// Criterion 8: degenerate N = 5 with three branches at beta(D_k), negative
/// and increasing toward zero.
#[test]
fn criterion_08_degenerate_high_dimension() {
    let nl = single(1.0, 1.0, 2.2);
    let params = KirchhoffParams::new(0.0, 1.0, 5).unwrap();
    let build = build_atlas(&nl, &params, 3, &cfg(), &[], Some(shared_cache())).unwrap();
    assert_eq!(build.atlas.entries.len(), 3);

    let mut previous = f64::NEG_INFINITY;
    for (entry, sols) in build.atlas.entries.iter().zip(&build.solutions) {
        assert_eq!(sols.len(), 1);
        let sol = &sols[0];
        assert_gates(sol, &params, "N=5 degenerate branch");
        assert!(sol.phi_formula < 0.0, "all energies negative");
        assert!(sol.phi_formula > previous, "energies increase toward zero");
        previous = sol.phi_formula;
        let beta = beta_degenerate(params.b, 5, entry.d);
        assert_rel(sol.phi_formula, beta, 1.0e-8, "phi equals beta(D_k)");
    }
    let gs = build.atlas.ground_state.as_ref().unwrap();
    assert_eq!(
        gs.k, build.atlas.entries[0].k,
        "smallest-D entry carries the infimum"
    );
    assert_rel(
        build.atlas.m_inf_witness,
        beta_degenerate(params.b, 5, build.atlas.entries[0].d),
        1.0e-12,
        "m_inf witness",
    );
    println!("PASS criterion 8: N=5, a=0 three negative energies equal to beta(D_k), increasing");
}

/// Criterion 9: N = 1 uniqueness of the branch; N = 2 Pohozaev-forced
/// energies, strictly increasing.
#[test]
fn criterion_09_low_dimensions() {
    let nl = single(1.0, 1.0, 4.0);

    let one_d = closed_form_1d(&nl, &cfg()).unwrap();
    let params1 = KirchhoffParams::new(1.0, 1.0, 1).unwrap();
    let sols = lift(&one_d, &nl, &params1).unwrap();
    assert_eq!(sols.len(), 1, "exactly one branch at N = 1");
    assert_gates(&sols[0], &params1, "N=1 branch");

    let params2 = KirchhoffParams::new(1.0, 1.0, 2).unwrap();
    let states = solve(&nl, 2, 2);
    let mut previous = 0.0f64;
    for state in &states {
        let sols = lift(state, &nl, &params2).unwrap();
        assert_eq!(sols.len(), 1);
        let sol = &sols[0];
        assert_gates(sol, &params2, "N=2 branch");
        let closed = 0.5 * params2.a * state.d + 0.25 * params2.b * state.d * state.d;
        assert_rel(sol.phi_formula, closed, 1.0e-12, "N=2 formula route");
        assert_rel(sol.phi_quadrature, closed, 1.0e-4, "N=2 quadrature route");
        assert!(sol.phi_formula > previous, "energies strictly increase");
        previous = sol.phi_formula;
    }
    println!("PASS criterion 9: N=1 single branch; N=2 energies aD/2 + bD^2/4, increasing");
}

/// Criterion 10: the interleaved signed-energy ladder at small b.
#[test]
fn criterion_10_signed_energy_ladder() {
    let nl = single(1.0, 1.0, 2.5);
    let states = solve(&nl, 5, 2);
    let d_max = states.iter().map(|s| s.d).fold(0.0, f64::max);
    let scales = critical_scales(1.0, 5).unwrap();
    let b_tilde = h_eval(scales.t_dstar.unwrap(), 1.0, 5) / d_max;
    let params = KirchhoffParams::new(1.0, 0.5 * b_tilde, 5).unwrap();

    let build = build_atlas(&nl, &params, 2, &cfg(), &[], Some(shared_cache())).unwrap();
    assert_eq!(build.atlas.signed_ladder_verified, Some(true));

    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for (entry, sols) in build.atlas.entries.iter().zip(&build.solutions) {
        assert_eq!(sols.len(), 2, "two branches per entry at k = {}", entry.k);
        for sol in sols {
            assert_gates(sol, &params, "ladder branch");
            match sol.label.as_str() {
                "lower" => lowers.push(sol.phi_formula),
                "upper" => uppers.push(sol.phi_formula),
                other => panic!("unexpected label {other}"),
            }
        }
    }
    // g(t1) < g(t2) < 0 < g(s1) < g(s2), indexed by ascending D.
    assert_eq!((lowers.len(), uppers.len()), (2, 2));
    assert!(
        lowers[0] < lowers[1] && lowers[1] < 0.0,
        "negative ladder: {lowers:?}"
    );
    assert!(
        0.0 < uppers[0] && uppers[0] < uppers[1],
        "positive ladder: {uppers:?}"
    );

    println!("PASS criterion 10: 2 negative lower + 2 positive upper branches, interleaved");
}

/// Criterion 11: verify passes on the emitted artifacts of every regime, and
/// reruns with cleared and warm caches reproduce each report byte for byte.
#[test]
fn criterion_11_determinism_round_trip() {
    use katlas_cli::commands;
    use katlas_cli::config::{Overrides, RunConfig};

    let base = std::env::temp_dir().join(format!("katlas-criterion11-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);
    std::fs::create_dir_all(&base).unwrap();

    // Parameters that depend on solved norms, computed up front.
    let d1_n4 = solve(&single(1.0, 2.0, 3.0), 4, 1).remove(0).d;
    let g5 = solve(&single(1.0, 1.0, 2.5), 5, 1).remove(0);
    let th5 = thresholds_b(1.0, 5, g5.d).unwrap();
    let b5 = 0.5 * (th5.b_star.unwrap() + th5.b_dstar.unwrap());

    let configs: Vec<(&str, String)> = vec![
        (
            "n3",
            r#"{"nonlinearity": {"omega": 1.0, "terms": [{"coeff": 1.0, "p": 4.0}]},
                "N": 3, "a": 1.0, "b": 1.0, "k_max": 2}"#
                .to_string(),
        ),
        (
            "n5",
            format!(
                r#"{{"nonlinearity": {{"omega": 1.0, "terms": [{{"coeff": 1.0, "p": 2.5}}]}},
                    "N": 5, "a": 1.0, "b": {b5:.17e}, "k_max": 1}}"#
            ),
        ),
        (
            "n4cont",
            format!(
                r#"{{"nonlinearity": {{"omega": 1.0, "terms": [{{"coeff": 2.0, "p": 3.0}}]}},
                    "N": 4, "a": 0.0, "b": {:.17e}, "k_max": 1}}"#,
                1.0 / d1_n4
            ),
        ),
        (
            "n1",
            r#"{"nonlinearity": {"omega": 1.0, "terms": [{"coeff": 1.0, "p": 4.0}]},
                "N": 1, "a": 1.0, "b": 1.0, "k_max": 1}"#
                .to_string(),
        ),
    ];

    for (name, body) in &configs {
        let config_path = base.join(format!("{name}.json"));
        std::fs::write(&config_path, body).unwrap();
        let cache_dir = base.join(format!("cache-{name}"));

        let run = |out: &str| -> PathBuf {
            let out_dir = base.join(out);
            let overrides = Overrides {
                out: Some(out_dir.clone()),
                cache: Some(cache_dir.clone()),
                ..Default::default()
            };
            let config = RunConfig::load(&config_path, &overrides).unwrap();
            commands::atlas(&config).unwrap_or_else(|e| panic!("{name}: atlas failed: {e}"));
            assert!(
                commands::verify(&out_dir.join("atlas.json")).is_ok(),
                "{name}: verify must pass"
            );
            out_dir
        };

        let first = run(&format!("{name}-out1"));
        // Cleared cache: everything recomputed from scratch.
        std::fs::remove_dir_all(&cache_dir).unwrap();
        let second = run(&format!("{name}-out2"));
        // Warm cache: loaded states must reproduce the same bytes too.
        let third = run(&format!("{name}-out3"));

        let mut files: Vec<String> = std::fs::read_dir(&first)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        files.sort();
        assert!(files.contains(&"atlas.json".to_string()));
        for file in &files {
            let a = std::fs::read(first.join(file)).unwrap();
            let b = std::fs::read(second.join(file)).unwrap();
            let c = std::fs::read(third.join(file)).unwrap();
            assert_eq!(a, b, "{name}/{file} differs after cache-cleared rerun");
            assert_eq!(a, c, "{name}/{file} differs after warm-cache rerun");
        }
    }

    let _ = std::fs::remove_dir_all(&base);
    println!(
        "PASS criterion 11: verify round-trip and byte-identical reruns across 4 regimes \
         (cold and warm cache)"
    );
}
