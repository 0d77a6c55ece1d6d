//! Radial bound states of the local scalar-field problem
//!
//! ```text
//! v'' + (N-1)/r · v' + f(v) = 0,   v'(0) = 0,   v(r) -> 0,
//! ```
//!
//! solved by shooting on the height ζ₀ = v(0) with bisection for N ≥ 2, and by
//! the first-integral time map for N = 1. The k-th bound state has exactly k
//! interior sign changes; the quality oracle is the Pohozaev identity
//! S = D/N relating the action to the Dirichlet seminorm squared.

use serde::{Deserialize, Serialize};

use crate::nonlinearity::{check_berestycki_lions, PowerNonlinearity};
use crate::ode::{integrate, Dp54Options, State2, Step, StepControl};
use crate::quad::{integrate_grid, sphere_surface};
use crate::{Error, Result};

/// Hard decay invariant for profiles: |v[last]| must not exceed this fraction
/// of |v[0]|. Configured tail cutoffs are tighter (default 1e-10).
const DECAY_INVARIANT: f64 = 1.0e-8;

/// Relative height at which the outward shot is truncated and handed to the
/// stabilized inward tail integration. Past this level a bisection-limited
/// trajectory starts drifting off the separatrix.
const TRUNC_LEVEL: f64 = 1.0e-4;

/// Pohozaev residual gate |S - D/N| <= gate · D for accepted states.
pub const POHOZAEV_GATE: f64 = 1.0e-5;

/// Solver knobs. The shipped defaults are the documented contract values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShootingConfig {
    /// Relative width of the final bisection bracket on ζ₀.
    pub bisection_rel_tol: f64,
    /// Profiles end once |v| falls below tail_cutoff·ζ₀.
    pub tail_cutoff: f64,
    /// Initial integration range is r_max_factor/sqrt(ω) ...
    pub r_max_factor: f64,
    /// ... doubled on demand up to this many times.
    pub r_max_doublings: u32,
    /// Relative tolerance of the adaptive integrator.
    pub integrator_rel_tol: f64,
    /// Bisection iteration cap.
    pub max_bisection_iters: u32,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            bisection_rel_tol: 1.0e-12,
            tail_cutoff: 1.0e-10,
            r_max_factor: 50.0,
            r_max_doublings: 12,
            integrator_rel_tol: 1.0e-10,
            max_bisection_iters: 200,
        }
    }
}

impl ShootingConfig {
    pub fn canonical_string(&self) -> String {
        format!(
            "btol={:.17e};cutoff={:.17e};rmax={:.17e};dbl={};itol={:.17e};iters={}",
            self.bisection_rel_tol,
            self.tail_cutoff,
            self.r_max_factor,
            self.r_max_doublings,
            self.integrator_rel_tol,
            self.max_bisection_iters
        )
    }
}

/// A radial profile sampled on a strictly increasing grid starting at r = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    n: u32,
    r: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
}

impl RadialProfile {
    pub fn new(n: u32, r: Vec<f64>, v: Vec<f64>, dv: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::Precondition("profile dimension must be >= 1".into()));
        }
        if r.len() < 8 || r.len() != v.len() || v.len() != dv.len() {
            return Err(Error::Precondition(
                "profile arrays mismatched or too short".into(),
            ));
        }
        if r[0] != 0.0 || dv[0] != 0.0 {
            return Err(Error::Precondition(
                "profile must start at r = 0 with dv = 0".into(),
            ));
        }
        if !(v[0].is_finite() && v[0].abs() > 0.0) {
            return Err(Error::Precondition(
                "profile height v(0) must be nonzero".into(),
            ));
        }
        for i in 1..r.len() {
            if !(r[i] > r[i - 1]) || !v[i].is_finite() || !dv[i].is_finite() {
                return Err(Error::Precondition(format!("bad grid node at index {i}")));
            }
        }
        let last = v[v.len() - 1].abs();
        if last > DECAY_INVARIANT * v[0].abs() {
            return Err(Error::Precondition(format!(
                "profile has not decayed: |v_end|/|v0| = {:.3e}",
                last / v[0].abs()
            )));
        }
        Ok(Self { n, r, v, dv })
    }

    pub fn dim(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn dv(&self) -> &[f64] {
        &self.dv
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// Number of interior sign changes, ignoring the decayed tail noise floor.
    pub fn count_nodes(&self) -> usize {
        let floor = DECAY_INVARIANT * self.v[0].abs();
        let mut nodes = 0;
        let mut last_sign = 0i8;
        for &val in &self.v {
            if val.abs() <= floor {
                continue;
            }
            let sign = if val > 0.0 { 1 } else { -1 };
            if last_sign != 0 && sign != last_sign {
                nodes += 1;
            }
            last_sign = sign;
        }
        nodes
    }

    /// CSV serialization with header `r,v,dv` at full precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,v,dv\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.r[i], self.v[i], self.dv[i]
            ));
        }
        out
    }

    pub fn from_csv(n: u32, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "r,v,dv" => {}
            other => return Err(Error::RecordFormat(format!("bad CSV header: {other:?}"))),
        }
        let (mut r, mut v, mut dv) = (Vec::new(), Vec::new(), Vec::new());
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let mut take = || -> Result<f64> {
                cols.next()
                    .ok_or_else(|| Error::RecordFormat(format!("short CSV row {idx}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::RecordFormat(format!("row {idx}: {e}")))
            };
            r.push(take()?);
            v.push(take()?);
            dv.push(take()?);
        }
        Self::new(n, r, v, dv)
    }
}

/// A solved bound state of the local problem.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub profile: RadialProfile,
    /// Interior sign changes; k for the k-th excited state.
    pub nodes: usize,
    /// Shooting height v(0).
    pub zeta0: f64,
    /// Dirichlet seminorm squared D = ‖∇v‖²_{L²}.
    pub d: f64,
    /// Action S = D/2 - ∫F(v).
    pub s: f64,
    /// Signed Pohozaev defect S - D/N.
    pub pohozaev_residual: f64,
    /// Fitted exponential decay rate of the tail; contract: within 5% of √ω.
    pub decay_rate: f64,
}

/// Terminal classification of a single shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShotOutcome {
    /// v reached zero with dv < 0 at radius r.
    CrossesZero { r: f64 },
    /// v attained a positive local minimum at radius r and cannot reach zero.
    TurnsBack { r: f64 },
    /// |v| fell below tail_cutoff·ζ₀ inside the linearized regime.
    Decays,
}

/// Outcome of integrating one trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub outcome: ShotOutcome,
    pub crossings: usize,
    pub r_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Terminal {
    /// Local extremum with F(v) < 0: the energy argument forbids any further
    /// zero crossing.
    Trapped {
        r: f64,
    },
    Decayed,
    FirstCross {
        r: f64,
    },
}

struct RawShot {
    terminal: Terminal,
    crossings: usize,
    r_end: f64,
    grid: Vec<[f64; 3]>,
}

fn radial_rhs<'a>(nl: &'a PowerNonlinearity, n: u32) -> impl Fn(f64, State2) -> State2 + 'a {
    let nm1 = (n - 1) as f64;
    move |r: f64, y: State2| [y[1], -nm1 / r * y[1] - nl.eval_f(y[0])]
}

fn integrator_options(nl: &PowerNonlinearity, zeta0: f64, cfg: &ShootingConfig) -> Dp54Options {
    let omega_sqrt = nl.omega().sqrt();
    Dp54Options {
        rel_tol: cfg.integrator_rel_tol,
        abs_tol: [
            cfg.integrator_rel_tol * zeta0 * 1.0e-4,
            cfg.integrator_rel_tol * zeta0 * omega_sqrt * 1.0e-4,
        ],
        h_init: 1.0e-4 / omega_sqrt,
        // The step cap bounds the Hermite reconstruction error of the stored
        // grid; quadrature accuracy scales like h^4.
        h_max: 0.01 / omega_sqrt,
        h_min: 1.0e-14 / omega_sqrt,
    }
}

/// Integrate one outward shot from height zeta0, classifying the terminal
/// event and counting zero crossings. `stop_at_first_cross` makes the first
/// crossing terminal (the overshoot side of the basic dichotomy); `record`
/// keeps the accepted-step grid.
fn run_shot(
    nl: &PowerNonlinearity,
    n: u32,
    zeta0: f64,
    cfg: &ShootingConfig,
    stop_at_first_cross: bool,
    record: bool,
) -> Result<RawShot> {
    let omega_sqrt = nl.omega().sqrt();
    let mut grid: Vec<[f64; 3]> = Vec::new();

    // Heights with F(ζ₀) < 0 can never build the positive energy needed to
    // reach zero; they are trapped at once.
    if nl.eval_big_f(zeta0) < 0.0 {
        return Ok(RawShot {
            terminal: Terminal::Trapped { r: 0.0 },
            crossings: 0,
            r_end: 0.0,
            grid,
        });
    }

    // Second-order Taylor start on [0, r_start]; the (N-1)/r term is removable
    // at the origin for even solutions.
    let r_start = 1.0e-4 / omega_sqrt;
    let f0 = nl.eval_f(zeta0);
    let y_start: State2 = [
        zeta0 - f0 * r_start * r_start / (2.0 * n as f64),
        -f0 * r_start / n as f64,
    ];
    if record {
        grid.push([0.0, zeta0, 0.0]);
        grid.push([r_start, y_start[0], y_start[1]]);
    }

    let r_cap = cfg.r_max_factor / omega_sqrt * 2.0f64.powi(cfg.r_max_doublings as i32);
    let opts = integrator_options(nl, zeta0, cfg);
    let rhs = radial_rhs(nl, n);
    let cutoff = cfg.tail_cutoff * zeta0;

    let mut crossings: usize = 0;
    let mut terminal: Option<Terminal> = None;

    let inspect = |step: &Step| {
        if record {
            grid.push([step.r1, step.y1[0], step.y1[1]]);
        }
        // Zero crossing of v.
        let (v0, v1) = (step.y0[0], step.y1[0]);
        if v0 != 0.0 && v1 != 0.0 && (v0 > 0.0) != (v1 > 0.0) {
            crossings += 1;
            if stop_at_first_cross {
                terminal = Some(Terminal::FirstCross {
                    r: step.locate_zero(0),
                });
                return StepControl::Stop;
            }
        }
        // Turning point of v: trapped once the conserved-energy bound fails.
        let (d0, d1) = (step.y0[1], step.y1[1]);
        if d0 != 0.0 && d1 != 0.0 && (d0 > 0.0) != (d1 > 0.0) {
            let r_turn = step.locate_zero(1);
            let v_turn = step.eval(r_turn)[0];
            if v_turn.abs() > cutoff && nl.eval_big_f(v_turn) < 0.0 {
                terminal = Some(Terminal::Trapped { r: r_turn });
                return StepControl::Stop;
            }
        }
        // Decay inside the linearized regime.
        if v1.abs() <= cutoff && step.y1[1].abs() <= cutoff * omega_sqrt.max(1.0) * 4.0 {
            let lin_defect = nl.eval_f(v1) + nl.omega() * v1;
            if lin_defect.abs() <= 0.1 * nl.omega() * v1.abs().max(f64::MIN_POSITIVE) {
                terminal = Some(Terminal::Decayed);
                return StepControl::Stop;
            }
        }
        StepControl::Continue
    };

    let (r_end, _) = integrate(rhs, r_start, y_start, 1.0, r_cap, false, &opts, inspect)?;
    let terminal = terminal.ok_or(Error::Inconclusive { r_max: r_cap })?;
    Ok(RawShot {
        terminal,
        crossings,
        r_end,
        grid,
    })
}

/// Classify a single shot from height ζ₀ (N ≥ 2).
pub fn shoot(
    nl: &PowerNonlinearity,
    n: u32,
    zeta0: f64,
    cfg: &ShootingConfig,
) -> Result<Trajectory> {
    if n < 2 {
        return Err(Error::Precondition(
            "shoot requires N >= 2; use closed_form_1d".into(),
        ));
    }
    if !(zeta0.is_finite() && zeta0 > 0.0) {
        return Err(Error::Precondition(format!(
            "zeta0 must be positive, got {zeta0}"
        )));
    }
    let raw = run_shot(nl, n, zeta0, cfg, true, false)?;
    let outcome = match raw.terminal {
        Terminal::FirstCross { r } => ShotOutcome::CrossesZero { r },
        Terminal::Trapped { r } => ShotOutcome::TurnsBack { r },
        Terminal::Decayed => ShotOutcome::Decays,
    };
    Ok(Trajectory {
        outcome,
        crossings: raw.crossings,
        r_end: raw.r_end,
    })
}

/// Crossing count of the full trajectory (used by the bracket search).
fn crossing_count(
    nl: &PowerNonlinearity,
    n: u32,
    zeta0: f64,
    cfg: &ShootingConfig,
) -> Result<usize> {
    Ok(run_shot(nl, n, zeta0, cfg, false, false)?.crossings)
}

/// Least-squares decay rate over the final decade of the profile tail.
///
/// Fits -log|v(r)| - (N-1)/2·log r against r on the monotone tail segment
/// where |v| is within a factor 10 of |v_end|; interior near-node points never
/// enter since the walk stops at any sign change or amplitude reversal, and
/// points where the linearization f(v) ≈ -ωv is off by more than 5% are
/// dropped so slow nonlinearities cannot bias the rate.
pub fn tail_decay_rate(p: &RadialProfile, nl: &PowerNonlinearity) -> Result<f64> {
    let grid: Vec<[f64; 3]> = (0..p.len())
        .map(|i| [p.r()[i], p.v()[i], p.dv()[i]])
        .collect();
    let end = grid.len() - 1;
    let v_end = grid[end][1].abs();
    if v_end == 0.0 {
        return Err(Error::TailTooShort);
    }
    let mut start = tail_window_start(&grid, end, 10.0 * v_end);
    while start < end {
        let v = grid[start][1];
        let lin_defect = nl.eval_f(v) + nl.omega() * v;
        if lin_defect.abs() <= 0.05 * nl.omega() * v.abs() {
            break;
        }
        start += 1;
    }
    fit_decay_tail(&grid[start..=end], p.dim())
        .map(|(kappa, _)| kappa)
        .ok_or(Error::TailTooShort)
}

/// Walk backward from `end` over a sign-constant, monotonically decaying
/// segment whose amplitude stays below `hi_abs`; returns the start index.
fn tail_window_start(grid: &[[f64; 3]], end: usize, hi_abs: f64) -> usize {
    let sign = grid[end][1] >= 0.0;
    let mut start = end;
    while start > 0 {
        let prev = grid[start - 1][1];
        if prev == 0.0 || (prev >= 0.0) != sign {
            break;
        }
        if prev.abs() > hi_abs || prev.abs() < grid[start][1].abs() {
            break;
        }
        start -= 1;
    }
    start
}

/// Least-squares (κ, log A) of |v| ≈ A r^{-(N-1)/2} e^{-κr} over a tail slice.
fn fit_decay_tail(tail: &[[f64; 3]], n: u32) -> Option<(f64, f64)> {
    let half_pow = (n as f64 - 1.0) / 2.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for node in tail {
        if node[0] > 0.0 && node[1] != 0.0 {
            xs.push(node[0]);
            ys.push(-node[1].abs().ln() - half_pow * node[0].ln());
        }
    }
    if xs.len() < 6 {
        return None;
    }
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let kappa = sxy / sxx;
    let log_amp = -(mean_y - kappa * mean_x);
    Some((kappa, log_amp))
}

/// Find the k-node bound state by bracketing the crossing count and bisecting
/// on ζ₀, then rebuilding the tail by a stabilized inward integration.
pub fn find_bound_state(
    nl: &PowerNonlinearity,
    n: u32,
    k: usize,
    cfg: &ShootingConfig,
) -> Result<BoundState> {
    if n < 2 {
        return Err(Error::Precondition(
            "find_bound_state requires N >= 2".into(),
        ));
    }
    let report = check_berestycki_lions(nl, n);
    if !report.all_ok() {
        return Err(Error::Precondition(format!(
            "assumptions (f1)-(f4) fail at N = {n}: {:?}",
            report.messages
        )));
    }
    let zeta = nl.zeta()?;

    // Geometric scan for a height with at least k+1 crossings. Heights at or
    // below zeta are trapped with zero crossings by the energy argument.
    let mut lo = zeta;
    let mut hi = None;
    let mut z = zeta;
    for _ in 0..62 {
        z *= 1.25;
        let c = crossing_count(nl, n, z, cfg)?;
        if c > k {
            hi = Some(z);
            break;
        }
        lo = z;
    }
    let mut hi = hi.ok_or(Error::BracketNotFound {
        target: k + 1,
        limit: zeta * 1.0e6,
    })?;

    for _ in 0..cfg.max_bisection_iters {
        if hi - lo <= cfg.bisection_rel_tol * lo {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if crossing_count(nl, n, mid, cfg)? > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - lo > cfg.bisection_rel_tol * lo {
        return Err(Error::NoConvergence(format!(
            "bisection bracket still {:.3e} wide after {} iterations",
            hi - lo,
            cfg.max_bisection_iters
        )));
    }

    // Final shot from the k-crossing side of the bracket.
    let zeta0 = lo;
    let raw = run_shot(nl, n, zeta0, cfg, false, true)?;
    if raw.crossings != k {
        return Err(Error::NoConvergence(format!(
            "final trajectory has {} crossings, expected {k}",
            raw.crossings
        )));
    }

    assemble_state(nl, n, k, zeta0, raw.grid, cfg)
}

/// Truncate the outward grid where it is still separatrix-accurate, then
/// integrate the tail inward from a fitted asymptotic start and glue.
fn assemble_state(
    nl: &PowerNonlinearity,
    n: u32,
    k: usize,
    zeta0: f64,
    grid: Vec<[f64; 3]>,
    cfg: &ShootingConfig,
) -> Result<BoundState> {
    // Last sign change on the raw grid.
    let mut last_cross = 0usize;
    for i in 1..grid.len() {
        if grid[i - 1][1] != 0.0
            && grid[i][1] != 0.0
            && (grid[i - 1][1] > 0.0) != (grid[i][1] > 0.0)
        {
            last_cross = i;
        }
    }

    // Truncation happens on the monotone descent past the peak of the final
    // lobe, which for excited states can sit well below zeta0.
    let mut j_peak = last_cross;
    for i in last_cross..grid.len() {
        if grid[i][1].abs() > grid[j_peak][1].abs() {
            j_peak = i;
        }
    }
    let peak = grid[j_peak][1].abs();
    let trunc_abs = (TRUNC_LEVEL.max(cfg.bisection_rel_tol.sqrt() * 10.0) * zeta0).min(0.05 * peak);
    let mut i_trunc = None;
    let mut i_min = j_peak;
    for i in j_peak..grid.len() {
        if grid[i][1].abs() < grid[i_min][1].abs() {
            i_min = i;
        }
        if grid[i][1].abs() <= trunc_abs && i > j_peak {
            i_trunc = Some(i);
            break;
        }
    }
    let i_trunc = match i_trunc {
        Some(i) => i,
        None if grid[i_min][1].abs() <= 0.1 * peak => i_min,
        None => {
            return Err(Error::NoConvergence(
                "trajectory never descended from the final lobe".into(),
            ))
        }
    };

    let v_tr = grid[i_trunc][1];
    let r_tr = grid[i_trunc][0];
    let sign = v_tr.signum();

    // Fit the asymptotic amplitude and rate one decade above the truncation,
    // restricted to the monotone final descent.
    let start = tail_window_start(&grid[..=i_trunc], i_trunc, 10.0 * v_tr.abs());
    let wide = tail_window_start(&grid[..=i_trunc], i_trunc, 100.0 * v_tr.abs());
    let (kappa, log_amp) = fit_decay_tail(&grid[start..=i_trunc], n)
        .or_else(|| fit_decay_tail(&grid[wide..=i_trunc], n))
        .ok_or_else(|| {
            Error::NoConvergence(format!(
                "tail fit near truncation failed: {} points below 10·|v_tr|",
                i_trunc - start + 1
            ))
        })?;
    if !(kappa > 0.0) {
        return Err(Error::NoConvergence(format!(
            "nonpositive fitted decay rate {kappa:.3e}"
        )));
    }

    // Inward integration from beyond the configured cutoff depth. The decaying
    // branch is the growing one under backward integration, so start errors
    // are suppressed toward the gluing radius. The fitted rate only places the
    // start; the start slope uses the linearized far-field rate sqrt(omega),
    // exact at that depth, because slow nonlinearities (p close to 2) bias the
    // fit at truncation level.
    let depth_target = 0.03 * cfg.tail_cutoff * zeta0;
    let r_out = r_tr + (v_tr.abs() / depth_target).ln() / kappa;
    let kappa_far = nl.omega().sqrt();
    let half_pow = (n as f64 - 1.0) / 2.0;
    let opts = integrator_options(nl, zeta0, cfg);
    let rhs = radial_rhs(nl, n);

    let mut amp = (log_amp).exp();
    let mut tail: Vec<[f64; 3]> = Vec::new();
    for _ in 0..12 {
        let v_start = sign * amp * r_out.powf(-half_pow) * (-kappa * r_out).exp();
        let dv_start = v_start * (-kappa_far - half_pow / r_out);
        tail.clear();
        tail.push([r_out, v_start, dv_start]);
        let (_, _) = integrate(
            &rhs,
            r_out,
            [v_start, dv_start],
            -1.0,
            r_tr,
            true,
            &opts,
            |step: &Step| {
                tail.push([step.r1, step.y1[0], step.y1[1]]);
                StepControl::Continue
            },
        )?;
        let v_in = tail.last().expect("tail nonempty")[1];
        if v_in == 0.0 || !v_in.is_finite() {
            return Err(Error::NoConvergence(
                "inward tail integration degenerated".into(),
            ));
        }
        let rho = v_tr / v_in;
        if !(rho > 0.0) {
            return Err(Error::NoConvergence("inward tail changed sign".into()));
        }
        amp *= rho;
        if (rho - 1.0).abs() <= 1.0e-10 {
            break;
        }
    }

    // Glue: outward up to r_tr, then the inward tail reversed (drop its last
    // point, which duplicates r_tr).
    let mut r: Vec<f64> = Vec::with_capacity(i_trunc + tail.len());
    let mut v: Vec<f64> = Vec::with_capacity(i_trunc + tail.len());
    let mut dv: Vec<f64> = Vec::with_capacity(i_trunc + tail.len());
    for node in &grid[..=i_trunc] {
        r.push(node[0]);
        v.push(node[1]);
        dv.push(node[2]);
    }
    for node in tail.iter().rev() {
        if node[0] <= r_tr * (1.0 + 1.0e-12) {
            continue;
        }
        r.push(node[0]);
        v.push(node[1]);
        dv.push(node[2]);
    }

    let profile = RadialProfile::new(n, r, v, dv)?;
    let nodes = profile.count_nodes();
    if nodes != k {
        return Err(Error::NoConvergence(format!(
            "profile has {nodes} nodes, expected {k}"
        )));
    }
    finish_state(nl, profile, zeta0)
}

fn finish_state(nl: &PowerNonlinearity, profile: RadialProfile, zeta0: f64) -> Result<BoundState> {
    let n = profile.dim();
    let d = dirichlet_norm_sq(&profile);
    let s = action(&profile, nl);
    let pohozaev_residual = s - d / n as f64;
    let decay_rate = tail_decay_rate(&profile, nl)?;

    if pohozaev_residual.abs() > POHOZAEV_GATE * d {
        return Err(Error::NoConvergence(format!(
            "Pohozaev defect {:.3e} exceeds {:.1e}·D",
            pohozaev_residual.abs(),
            POHOZAEV_GATE
        )));
    }
    let omega_sqrt = nl.omega().sqrt();
    if (decay_rate - omega_sqrt).abs() > 0.05 * omega_sqrt {
        return Err(Error::NoConvergence(format!(
            "tail decay rate {decay_rate:.6} deviates from sqrt(omega) = {omega_sqrt:.6} by more than 5%"
        )));
    }

    Ok(BoundState {
        nodes: profile.count_nodes(),
        profile,
        zeta0,
        d,
        s,
        pohozaev_residual,
        decay_rate,
    })
}

/// N = 1 ground state through the first integral (time map): on the even
/// solution (1/2)(v')² + F(v) = 0, so v' = -sqrt(-2F(v)) for x > 0, reduced to
/// a stable first-order integration from the series start at the top.
pub fn closed_form_1d(nl: &PowerNonlinearity, cfg: &ShootingConfig) -> Result<BoundState> {
    let report = check_berestycki_lions(nl, 1);
    if !report.all_ok() {
        return Err(Error::Precondition(format!(
            "assumptions (f1)-(f4) fail at N = 1: {:?}",
            report.messages
        )));
    }
    let zeta = nl.zeta()?;
    let omega_sqrt = nl.omega().sqrt();

    // Series start: v(x) = ζ - f(ζ)x²/2 + f'(ζ)f(ζ)x⁴/24 with v''(0) = -f(ζ) < 0.
    let x0 = 1.0e-4 / omega_sqrt;
    let f_zeta = nl.eval_f(zeta);
    let df_zeta = nl.eval_df(zeta);
    let v0 = zeta - 0.5 * f_zeta * x0 * x0 + df_zeta * f_zeta * x0.powi(4) / 24.0;
    let dv0 = -f_zeta * x0 + df_zeta * f_zeta * x0.powi(3) / 6.0;

    let speed = |v: f64| -(-2.0 * nl.eval_big_f(v)).max(0.0).sqrt();
    let rhs = |_x: f64, y: State2| [speed(y[0]), 0.0];
    let opts = Dp54Options {
        rel_tol: cfg.integrator_rel_tol,
        abs_tol: [cfg.integrator_rel_tol * zeta * 1.0e-4, 1.0],
        h_init: 1.0e-4 / omega_sqrt,
        h_max: 0.01 / omega_sqrt,
        h_min: 1.0e-14 / omega_sqrt,
    };

    let mut grid: Vec<[f64; 3]> = vec![[0.0, zeta, 0.0], [x0, v0, dv0]];
    let depth = 0.03 * cfg.tail_cutoff * zeta;
    let limit = cfg.r_max_factor / omega_sqrt * 2.0f64.powi(cfg.r_max_doublings as i32);
    integrate(
        rhs,
        x0,
        [v0, 0.0],
        1.0,
        limit,
        false,
        &opts,
        |step: &Step| {
            grid.push([step.r1, step.y1[0], speed(step.y1[0])]);
            if step.y1[0] <= depth {
                return StepControl::Stop;
            }
            StepControl::Continue
        },
    )?;

    let (r, v, dv): (Vec<f64>, Vec<f64>, Vec<f64>) = grid.iter().fold(
        (Vec::new(), Vec::new(), Vec::new()),
        |(mut r, mut v, mut dv), node| {
            r.push(node[0]);
            v.push(node[1]);
            dv.push(node[2]);
            (r, v, dv)
        },
    );
    let profile = RadialProfile::new(1, r, v, dv)?;
    finish_state(nl, profile, zeta)
}

/// D = σ_N ∫ (v')² r^{N-1} dr over the grid, plus the analytic integral of the
/// fitted exponential beyond the last node.
pub fn dirichlet_norm_sq(p: &RadialProfile) -> f64 {
    let nm1 = (p.dim() - 1) as i32;
    let core = integrate_grid(p.r(), p.v(), p.dv(), |r, _v, dv| dv * dv * r.powi(nm1));
    sphere_surface(p.dim()) * (core + dirichlet_tail(p))
}

/// Tail correction ∫_{R}^∞ (v')² r^{N-1} dr ≈ (v'(R))² R^{N-1} / (2κ) with the
/// measured decay rate κ; zero when the tail is too short to fit.
fn dirichlet_tail(p: &RadialProfile) -> f64 {
    let m = p.len() - 1;
    match tail_rate_only(p) {
        Some(kappa) if kappa > 0.0 => {
            let r_end = p.r()[m];
            p.dv()[m] * p.dv()[m] * r_end.powi((p.dim() - 1) as i32) / (2.0 * kappa)
        }
        _ => 0.0,
    }
}

fn tail_rate_only(p: &RadialProfile) -> Option<f64> {
    let m = p.len();
    let v_end = p.v()[m - 1].abs();
    if v_end == 0.0 {
        return None;
    }
    let grid: Vec<[f64; 3]> = (0..m).map(|i| [p.r()[i], p.v()[i], p.dv()[i]]).collect();
    let start = tail_window_start(&grid, m - 1, 10.0 * v_end);
    fit_decay_tail(&grid[start..], p.dim()).map(|(kappa, _)| kappa)
}

/// Action S = D/2 - σ_N ∫ F(v) r^{N-1} dr (with the same tail treatment).
pub fn action(p: &RadialProfile, nl: &PowerNonlinearity) -> f64 {
    0.5 * dirichlet_norm_sq(p) - sphere_surface(p.dim()) * big_f_integral(p, nl)
}

/// ∫ F(v) r^{N-1} dr over the grid plus the linearized exponential tail.
pub fn big_f_integral(p: &RadialProfile, nl: &PowerNonlinearity) -> f64 {
    let nm1 = (p.dim() - 1) as i32;
    let core = integrate_grid(p.r(), p.v(), p.dv(), |r, v, _dv| {
        nl.eval_big_f(v) * r.powi(nm1)
    });
    let m = p.len() - 1;
    let tail = match tail_rate_only(p) {
        Some(kappa) if kappa > 0.0 => {
            let r_end = p.r()[m];
            let v_end = p.v()[m];
            -0.5 * nl.omega() * v_end * v_end * r_end.powi(nm1) / (2.0 * kappa)
        }
        _ => 0.0,
    };
    core + tail
}

/// L² norm squared σ_N ∫ v² r^{N-1} dr (with exponential tail correction).
pub fn l2_norm_sq(p: &RadialProfile) -> f64 {
    let nm1 = (p.dim() - 1) as i32;
    let core = integrate_grid(p.r(), p.v(), p.dv(), |r, v, _dv| v * v * r.powi(nm1));
    let m = p.len() - 1;
    let tail = match tail_rate_only(p) {
        Some(kappa) if kappa > 0.0 => p.v()[m] * p.v()[m] * p.r()[m].powi(nm1) / (2.0 * kappa),
        _ => 0.0,
    };
    sphere_surface(p.dim()) * (core + tail)
}

/// Signed Pohozaev defect S - D/N of a solved state.
pub fn pohozaev_residual_q(bs: &BoundState) -> f64 {
    bs.s - bs.d / bs.profile.dim() as f64
}

/// Metadata serialized alongside the profile CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundStateMeta {
    #[serde(rename = "N")]
    pub n: u32,
    pub k: usize,
    pub zeta0: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "S")]
    pub s: f64,
    pub pohozaev_residual: f64,
    pub decay_rate: f64,
}

impl BoundState {
    pub fn meta(&self) -> BoundStateMeta {
        BoundStateMeta {
            n: self.profile.dim(),
            k: self.nodes,
            zeta0: self.zeta0,
            d: self.d,
            s: self.s,
            pohozaev_residual: self.pohozaev_residual,
            decay_rate: self.decay_rate,
        }
    }
}
