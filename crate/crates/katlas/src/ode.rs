//! Adaptive Dormand–Prince 5(4) integration for two-component radial systems.
//!
//! The driver hands every accepted step to a caller-supplied inspector, which
//! classifies events (zero crossings, turning points, decay) and decides when
//! to stop. Within a step, states are reconstructed by the cubic Hermite
//! interpolant of the endpoint values and derivatives.

use crate::{Error, Result};

pub type State2 = [f64; 2];

#[derive(Debug, Clone)]
pub struct Dp54Options {
    pub rel_tol: f64,
    pub abs_tol: State2,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
}

/// One accepted step with endpoint derivatives, enough for dense evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub r0: f64,
    pub r1: f64,
    pub y0: State2,
    pub y1: State2,
    pub f0: State2,
    pub f1: State2,
}

impl Step {
    /// Cubic Hermite evaluation of the state at r within [r0, r1].
    pub fn eval(&self, r: f64) -> State2 {
        let h = self.r1 - self.r0;
        let s = (r - self.r0) / h;
        let (s2, s3) = (s * s, s * s * s);
        let b0 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let b1 = s3 - 2.0 * s2 + s;
        let b2 = -2.0 * s3 + 3.0 * s2;
        let b3 = s3 - s2;
        std::array::from_fn(|i| {
            b0 * self.y0[i] + h * b1 * self.f0[i] + b2 * self.y1[i] + h * b3 * self.f1[i]
        })
    }

    /// Locate a sign change of component `comp` inside the step by bisection
    /// on the Hermite interpolant. Assumes the endpoint values bracket zero.
    pub fn locate_zero(&self, comp: usize) -> f64 {
        let mut lo = self.r0;
        let mut hi = self.r1;
        let y_lo = if comp == 0 { self.y0[0] } else { self.y0[1] };
        let mut sign_lo = y_lo >= 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let val = self.eval(mid)[comp];
            if (val >= 0.0) == sign_lo {
                lo = mid;
                sign_lo = val >= 0.0;
            } else {
                hi = mid;
            }
            if hi - lo <= 1.0e-14 * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

pub enum StepControl {
    Continue,
    Stop,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate y' = rhs(r, y) from (r0, y0) in direction `dir` (+1 or -1).
///
/// `limit` bounds |r|: integration stops with `Inconclusive` if the limit is
/// reached before the inspector stops it. When `clip_to_limit` is set the
/// final step lands exactly on the limit and the run ends there normally.
#[allow(clippy::too_many_arguments)]
pub fn integrate<F, C>(
    rhs: F,
    r0: f64,
    y0: State2,
    dir: f64,
    limit: f64,
    clip_to_limit: bool,
    opts: &Dp54Options,
    mut inspect: C,
) -> Result<(f64, State2)>
where
    F: Fn(f64, State2) -> State2,
    C: FnMut(&Step) -> StepControl,
{
    debug_assert!(dir == 1.0 || dir == -1.0);
    let mut r = r0;
    let mut y = y0;
    let mut f_cur = rhs(r, y);
    let mut h = opts.h_init.min(opts.h_max).max(opts.h_min);

    loop {
        let remaining = (limit - r) * dir;
        if remaining <= 0.0 {
            if clip_to_limit {
                return Ok((r, y));
            }
            return Err(Error::Inconclusive { r_max: limit });
        }
        let mut h_step = h;
        let mut clipped = false;
        if clip_to_limit && h_step >= remaining {
            h_step = remaining;
            clipped = true;
        }
        let hs = h_step * dir;

        let k1 = f_cur;
        let k2 = rhs(r + 0.2 * hs, add(y, hs, &[(A21, k1)]));
        let k3 = rhs(r + 0.3 * hs, add(y, hs, &[(A31, k1), (A32, k2)]));
        let k4 = rhs(r + 0.8 * hs, add(y, hs, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = rhs(
            r + 8.0 / 9.0 * hs,
            add(y, hs, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]),
        );
        let k6 = rhs(
            r + hs,
            add(
                y,
                hs,
                &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
            ),
        );
        let y_new = add(y, hs, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = rhs(r + hs, y_new);

        let mut err_sq = 0.0;
        for i in 0..2 {
            let e =
                hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol[i] + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (0.5 * err_sq).sqrt();

        if err <= 1.0 || h_step <= opts.h_min {
            let step = Step {
                r0: r,
                r1: r + hs,
                y0: y,
                y1: y_new,
                f0: k1,
                f1: k7,
            };
            r += hs;
            y = y_new;
            f_cur = k7;
            if let StepControl::Stop = inspect(&step) {
                return Ok((r, y));
            }
            if clipped && clip_to_limit && (limit - r) * dir <= 0.0 {
                return Ok((r, y));
            }
        }

        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h = (h_step * factor.clamp(0.2, 5.0)).clamp(opts.h_min, opts.h_max);
        if h <= opts.h_min && err > 1.0 {
            return Err(Error::IntegratorFailure { r });
        }
    }
}

fn add(y: State2, h: f64, parts: &[(f64, State2)]) -> State2 {
    let mut out = y;
    for &(c, k) in parts {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}
