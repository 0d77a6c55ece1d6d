//! Scalar rescaling algebra connecting the local problem to the Kirchhoff one.
//!
//! A nontrivial solution v of -Δv = f(v) with Dirichlet seminorm squared D
//! produces a Kirchhoff solution u(x) = v(tx) exactly when t > 0 solves
//!
//! ```text
//! h(t) = t^{N-4} - a t^{N-2} = b·D,
//! ```
//!
//! and the energy of that solution is the closed form
//!
//! ```text
//! g(t) = (1 - at²)·[4 - N(1 - at²)] / (4bN t⁴).
//! ```
//!
//! This module enumerates the root branches of h for every (N, a) regime,
//! the critical scales and thresholds, the dimension-specific closed forms,
//! and the level-set roots of g.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters (a, b, N) of the nonlocal problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KirchhoffParams {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "N")]
    pub n: u32,
}

impl KirchhoffParams {
    pub fn new(a: f64, b: f64, n: u32) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::Precondition(format!("a must be >= 0, got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Precondition(format!("b must be > 0, got {b}")));
        }
        if n < 1 {
            return Err(Error::Precondition("N must be >= 1".into()));
        }
        Ok(Self { a, b, n })
    }
}

/// Distinguished scales of h and g.
///
/// For N ≥ 5, a > 0: t_star is the maximizer of h, s_star = h(t_star) its
/// maximum and t_dstar the zero of g, with t_dstar < t_star < a^{-1/2}.
/// For N = 1, a > 0: tau minimizes h with negative minimum s_tau.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct CriticalScales {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_dstar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_tau: Option<f64>,
}

/// Existence and sign thresholds in b (given a) and in a (given b),
/// all scaled by the ground-state Dirichlet seminorm squared D₁.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Thresholds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_dstar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_dstar: Option<f64>,
}

/// A positive root of h(t) = s with its branch position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchRoot {
    /// The single root of a monotone regime (N ≤ 4 and N ≥ 5 with a = 0).
    Unique(f64),
    /// Root in (0, t_star) for N ≥ 5, a > 0.
    Lower(f64),
    /// Root in (t_star, a^{-1/2}) for N ≥ 5, a > 0.
    Upper(f64),
    /// The double root t_star at s = s_star.
    Tangent(f64),
    /// N = 4, a = 0, s = 1: every t > 0 solves h(t) = s.
    ContinuumFree,
}

impl BranchRoot {
    pub fn t(&self) -> Option<f64> {
        match *self {
            BranchRoot::Unique(t)
            | BranchRoot::Lower(t)
            | BranchRoot::Upper(t)
            | BranchRoot::Tangent(t) => Some(t),
            BranchRoot::ContinuumFree => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            BranchRoot::Unique(_) => "unique",
            BranchRoot::Lower(_) => "lower",
            BranchRoot::Upper(_) => "upper",
            BranchRoot::Tangent(_) => "tangent",
            BranchRoot::ContinuumFree => "continuum",
        }
    }
}

/// Structure of the branch set for one scalar-field solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExistenceClass {
    NoBranch,
    UniqueBranch,
    TwoBranches,
    TangentBranch,
    Continuum,
}

/// h(t) = t^{N-4} - a t^{N-2} for t > 0.
pub fn h_eval(t: f64, a: f64, n: u32) -> f64 {
    debug_assert!(t > 0.0);
    let nf = n as f64;
    t.powf(nf - 4.0) - a * t.powf(nf - 2.0)
}

/// Relative tolerance for recognizing the tangent level s = s_star and the
/// N = 4 degenerate continuum level s = 1. Exact-threshold inputs produced by
/// the threshold formulas must round-trip through root enumeration.
const LEVEL_MATCH_TOL: f64 = 1.0e-12;

/// All positive roots of h(t) = s that are relevant to lifting (s > 0).
///
/// Nonexistence is encoded by an empty list; s ≤ 0 always returns empty since
/// lifting only ever consumes s = b·D > 0.
pub fn h_roots(s: f64, a: f64, n: u32) -> Vec<BranchRoot> {
    if !(s > 0.0) {
        return Vec::new();
    }
    match n {
        1 => vec![BranchRoot::Unique(root_n1(s, a))],
        2 => vec![BranchRoot::Unique(1.0 / (s + a).sqrt())],
        3 => {
            if a == 0.0 {
                // h(t) = 1/t.
                vec![BranchRoot::Unique(1.0 / s)]
            } else {
                vec![BranchRoot::Unique(psi_from_s(s, a))]
            }
        }
        4 => {
            if a == 0.0 {
                if (s - 1.0).abs() <= LEVEL_MATCH_TOL {
                    vec![BranchRoot::ContinuumFree]
                } else {
                    Vec::new()
                }
            } else if s < 1.0 {
                vec![BranchRoot::Unique(((1.0 - s) / a).sqrt())]
            } else {
                Vec::new()
            }
        }
        _ => {
            if a == 0.0 {
                return vec![BranchRoot::Unique(s.powf(1.0 / (n as f64 - 4.0)))];
            }
            let t_star = ((n as f64 - 4.0) / ((n as f64 - 2.0) * a)).sqrt();
            let s_star = h_eval(t_star, a, n);
            if (s - s_star).abs() <= LEVEL_MATCH_TOL * s_star {
                vec![BranchRoot::Tangent(t_star)]
            } else if s > s_star {
                Vec::new()
            } else {
                // h is strictly increasing on (0, t_star) and strictly
                // decreasing on (t_star, a^{-1/2}); bisect each branch.
                let lower = bisect_h(s, a, n, 1.0e-8 * t_star, t_star, true);
                let upper = bisect_h(s, a, n, t_star, 1.0 / a.sqrt(), false);
                vec![BranchRoot::Lower(lower), BranchRoot::Upper(upper)]
            }
        }
    }
}

/// Unique root of h(t) = s for N = 1, s > 0, via w = 1/t: w³ - aw = s with
/// w > sqrt(a), solved in Cardano/trigonometric closed form.
fn root_n1(s: f64, a: f64) -> f64 {
    if a == 0.0 {
        return s.powf(-1.0 / 3.0);
    }
    // Depressed cubic w^3 + pw + q = 0 with p = -a, q = -s.
    let disc = 0.25 * s * s - a * a * a / 27.0;
    let w = if disc >= 0.0 {
        let sq = disc.sqrt();
        (0.5 * s + sq).cbrt() + (0.5 * s - sq).cbrt()
    } else {
        // Three real roots; the largest one exceeds sqrt(a).
        let scale = 2.0 * (a / 3.0).sqrt();
        let theta = (1.5 * s / a * (3.0 / a).sqrt()).min(1.0).acos();
        scale * (theta / 3.0).cos()
    };
    // Two Newton polishes of w^3 - aw - s.
    let w = w - (w * w * w - a * w - s) / (3.0 * w * w - a);
    let w = w - (w * w * w - a * w - s) / (3.0 * w * w - a);
    1.0 / w
}

/// Stable ψ for N = 3: the root of at² + st - 1 = 0 written as
/// 2 / (sqrt(s² + 4a) + s), valid for every s > 0 and a > 0.
fn psi_from_s(s: f64, a: f64) -> f64 {
    2.0 / ((s * s + 4.0 * a).sqrt() + s)
}

fn bisect_h(s: f64, a: f64, n: u32, mut lo: f64, mut hi: f64, increasing: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let above = h_eval(mid, a, n) >= s;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1.0e-14 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Critical scales: N ≥ 5 with a > 0, or N = 1 with a > 0.
pub fn critical_scales(a: f64, n: u32) -> Result<CriticalScales> {
    if a <= 0.0 {
        return Err(Error::NotApplicable { n, a });
    }
    if n >= 5 {
        let nf = n as f64;
        let t_star = ((nf - 4.0) / ((nf - 2.0) * a)).sqrt();
        let t_dstar = ((nf - 4.0) / (nf * a)).sqrt();
        Ok(CriticalScales {
            t_star: Some(t_star),
            t_dstar: Some(t_dstar),
            s_star: Some(h_eval(t_star, a, n)),
            ..Default::default()
        })
    } else if n == 1 {
        let tau = (3.0 / a).sqrt();
        Ok(CriticalScales {
            tau: Some(tau),
            s_tau: Some(-2.0 * 3.0f64.sqrt() / 9.0 * a.powf(1.5)),
            ..Default::default()
        })
    } else {
        Err(Error::NotApplicable { n, a })
    }
}

/// Closed-form energy g(t) = (1 - at²)[4 - N(1 - at²)] / (4bN t⁴) of the
/// solution rescaled by t.
pub fn g_energy(t: f64, a: f64, b: f64, n: u32) -> f64 {
    debug_assert!(t > 0.0);
    let nf = n as f64;
    let y = 1.0 - a * t * t;
    y * (4.0 - nf * y) / (4.0 * b * nf * t.powi(4))
}

/// Existence threshold b_star and sign threshold b_dstar in b, for N ≥ 4,
/// a > 0, given the ground-state D₁. For N = 4 only b_star = 1/D₁ exists.
pub fn thresholds_b(a: f64, n: u32, d1: f64) -> Result<Thresholds> {
    if n < 4 || a <= 0.0 {
        return Err(Error::NotApplicable { n, a });
    }
    if !(d1 > 0.0) {
        return Err(Error::Precondition(format!(
            "D1 must be positive, got {d1}"
        )));
    }
    if n == 4 {
        return Ok(Thresholds {
            b_star: Some(1.0 / d1),
            ..Default::default()
        });
    }
    let nf = n as f64;
    let b_star = 2.0 / (nf - 2.0) * ((nf - 4.0) / ((nf - 2.0) * a)).powf((nf - 4.0) / 2.0) / d1;
    let b_dstar = 4.0 / nf * ((nf - 4.0) / (nf * a)).powf((nf - 4.0) / 2.0) / d1;
    Ok(Thresholds {
        b_star: Some(b_star),
        b_dstar: Some(b_dstar),
        ..Default::default()
    })
}

/// Dual thresholds in a for fixed b, N ≥ 5.
pub fn thresholds_a(b: f64, n: u32, d1: f64) -> Result<Thresholds> {
    if n < 5 {
        return Err(Error::NotApplicable { n, a: f64::NAN });
    }
    if !(b > 0.0 && d1 > 0.0) {
        return Err(Error::Precondition(format!(
            "b, D1 must be positive, got {b}, {d1}"
        )));
    }
    let nf = n as f64;
    let a_star = (nf - 4.0) / (nf - 2.0) * (2.0 / ((nf - 2.0) * b * d1)).powf(2.0 / (nf - 4.0));
    let a_dstar = (nf - 4.0) / nf * (4.0 / (nf * b * d1)).powf(2.0 / (nf - 4.0));
    Ok(Thresholds {
        a_star: Some(a_star),
        a_dstar: Some(a_dstar),
        ..Default::default()
    })
}

/// N = 3 scaling root ψ(D) = (sqrt(4a + b²D²) - bD)/(2a), in the
/// cancellation-free arrangement 2/(sqrt(4a + b²D²) + bD).
pub fn psi_n3(a: f64, b: f64, d: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::DegenerateRequiresA);
    }
    Ok(psi_from_s(b * d, a))
}

/// N = 3 energy φ(D) = a²(2R - bD)·D / (3(R - bD)²) with R = sqrt(4a + b²D²),
/// rewritten as D(2R - bD)(R + bD)²/48 to avoid the cancellation in R - bD.
pub fn phi_n3(a: f64, b: f64, d: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::DegenerateRequiresA);
    }
    let bd = b * d;
    let r = (4.0 * a + bd * bd).sqrt();
    Ok(d * (2.0 * r - bd) * (r + bd) * (r + bd) / 48.0)
}

/// N = 4 scaling root t = sqrt((1 - bD)/a), present iff bD < 1.
pub fn t_n4(a: f64, b: f64, d: f64) -> Result<Option<f64>> {
    if !(a > 0.0) {
        return Err(Error::Precondition("t_n4 requires a > 0".into()));
    }
    let bd = b * d;
    Ok(if bd < 1.0 {
        Some(((1.0 - bd) / a).sqrt())
    } else {
        None
    })
}

/// N = 4 energy a²D/(4(1 - bD)), present iff bD < 1; always positive.
pub fn phi_n4(a: f64, b: f64, d: f64) -> Result<Option<f64>> {
    if !(a > 0.0) {
        return Err(Error::Precondition("phi_n4 requires a > 0".into()));
    }
    let bd = b * d;
    Ok(if bd < 1.0 {
        Some(a * a * d / (4.0 * (1.0 - bd)))
    } else {
        None
    })
}

/// Degenerate (a = 0, N ≥ 5) energy: with t = (bD)^{1/(N-4)},
/// β = (4 - N)/(4bN t⁴) < 0, increasing in D toward zero.
pub fn beta_degenerate(b: f64, n: u32, d: f64) -> f64 {
    debug_assert!(n >= 5 && b > 0.0 && d > 0.0);
    let nf = n as f64;
    let t4 = (b * d).powf(4.0 / (nf - 4.0));
    (4.0 - nf) / (4.0 * b * nf * t4)
}

/// The two roots of g(t) = c for 0 < c ≤ c_star = g(t_star), N ≥ 5, a > 0.
#[derive(Debug, Clone, Copy)]
pub struct LevelRoots {
    /// Root in (t_dstar, t_star]; equals t_star at c = c_star.
    pub tau_c: f64,
    /// Root in [t_star, a^{-1/2}); equals t_star at c = c_star.
    pub tau_up_c: f64,
    /// gamma(c) = h(tau_up_c) - h(tau_c) < 0 on (0, c_star).
    pub gamma: f64,
}

pub fn level_roots_g(c: f64, a: f64, b: f64, n: u32) -> Result<LevelRoots> {
    if n < 5 || a <= 0.0 {
        return Err(Error::NotApplicable { n, a });
    }
    let nf = n as f64;
    let c_star = a * a / (nf * (nf - 4.0) * b);
    if !(c > 0.0 && c <= c_star * (1.0 + 1.0e-12)) {
        return Err(Error::OutOfRange { c, c_star });
    }
    let disc = (a * a - nf * (nf - 4.0) * b * c).max(0.0).sqrt();
    let denom = nf * (a * a + 4.0 * b * c);
    let tau_c = (((nf - 2.0) * a - 2.0 * disc) / denom).sqrt();
    let tau_up_c = (((nf - 2.0) * a + 2.0 * disc) / denom).sqrt();
    let gamma = h_eval(tau_up_c, a, n) - h_eval(tau_c, a, n);
    Ok(LevelRoots {
        tau_c,
        tau_up_c,
        gamma,
    })
}

/// Branch structure of h_roots(b·D, a, N) as a classification.
pub fn classify_existence(a: f64, b: f64, n: u32, d: f64) -> ExistenceClass {
    let roots = h_roots(b * d, a, n);
    match roots.as_slice() {
        [] => ExistenceClass::NoBranch,
        [BranchRoot::ContinuumFree] => ExistenceClass::Continuum,
        [BranchRoot::Tangent(_)] => ExistenceClass::TangentBranch,
        [_] => ExistenceClass::UniqueBranch,
        [_, _] => ExistenceClass::TwoBranches,
        _ => unreachable!("h has at most two positive roots"),
    }
}

/// Root count per entry of an ascending list of Dirichlet norms.
pub fn count_liftable(a: f64, b: f64, n: u32, d_list: &[f64]) -> Vec<(usize, usize)> {
    let mut sorted = d_list.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite norms"));
    sorted
        .iter()
        .enumerate()
        .map(|(k, &d)| (k, h_roots(b * d, a, n).len()))
        .collect()
}
