//! Mode of the tanh-squashed Gaussian.
//!
//! Two independent routes to the most probable action:
//!
//! * [`grid_mode`] scans the density on a fixed grid starting at -0.999 with
//!   step 0.0004 and keeps the argmax.
//! * [`analytic_mode`] solves the stationarity condition in pre-squash
//!   coordinates. Writing `y = tanh(t)`, the log density is
//!   `h(t) = 2 ln cosh t - (t - mu)^2 / (2 sigma^2) + const`, so
//!   `h'(t) = 0` is `t = mu + 2 sigma^2 tanh(t)`.
//!
//! With `k = 2 sigma^2`, `g(t) = t - mu - k tanh t` has `g'(t) = 1 - k sech^2 t`.
//! For `k <= 1` it is monotone and has exactly one root. For `k > 1` it
//! decreases on `[-t_c, t_c]`, `t_c = arccosh(sqrt(k))`, and increases
//! outside, so there are at most three roots; the outer ones are maxima of
//! the density and a middle one is the minimum between them.

use serde::Serialize;

use crate::dist::{clamp_to_support, DiagSquashedGaussian, SquashedGaussian1D};
use crate::error::{Error, Result};

/// First grid point of the scan.
pub const GRID_START: f64 = -0.999;
/// Grid spacing of the scan.
pub const GRID_STEP: f64 = 0.0004;
/// Nominal index bound `N` of the scan. Indices above [`GRID_LAST_INDEX`]
/// land at or past 0.999 + step and are skipped.
pub const GRID_N: usize = 5000;
/// Last evaluated index; `GRID_START + GRID_STEP * 4995 = 0.999`.
pub const GRID_LAST_INDEX: usize = 4995;

const ROOT_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeMethod {
    GridScan,
    Analytic,
}

/// A located mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeResult {
    pub y_star: f64,
    pub t_star: f64,
    pub density_at_mode: f64,
    pub method: ModeMethod,
    /// Density evaluations (grid scan) or root-finder iterations (analytic).
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StationaryKind {
    LocalMax,
    LocalMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub t: f64,
    pub y: f64,
    pub density: f64,
    pub kind: StationaryKind,
}

/// All stationary points of the squashed density plus the global mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSet {
    pub stationary_points: Vec<StationaryPoint>,
    pub global: ModeResult,
    pub bimodal: bool,
}

/// Grid value at index `i`.
pub fn grid_point(i: usize) -> f64 {
    GRID_START + GRID_STEP * i as f64
}

/// Argmax of the density over the scan grid. Ties keep the smallest index.
pub fn grid_mode(d: &SquashedGaussian1D) -> ModeResult {
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=GRID_LAST_INDEX {
        // every grid point is inside (-1, 1)
        let lp = d.log_pdf(grid_point(i)).unwrap_or(f64::NEG_INFINITY);
        if lp > best {
            best = lp;
            best_i = i;
        }
    }
    let y_star = grid_point(best_i);
    ModeResult {
        y_star,
        t_star: y_star.atanh(),
        density_at_mode: best.exp(),
        method: ModeMethod::GridScan,
        evaluations: GRID_LAST_INDEX + 1,
    }
}

/// Safeguarded Newton iteration on a bracket `[lo, hi]` with
/// `f(lo) <= 0 <= f(hi)` or `f(lo) >= 0 >= f(hi)`. Returns the root and the
/// number of iterations.
fn newton_bisect<F>(f: F, mut lo: f64, mut hi: f64) -> Option<(f64, usize)>
where
    F: Fn(f64) -> (f64, f64),
{
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Some((lo, 0));
    }
    if fhi == 0.0 {
        return Some((hi, 0));
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    // orient so that f(lo) < 0 < f(hi)
    if flo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut x = 0.5 * (lo + hi);
    for iter in 1..=MAX_ITER {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Some((x, iter));
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let inside = newton.is_finite() && (newton - lo) * (newton - hi) < 0.0;
        let next = if inside { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= ROOT_TOL || (hi - lo).abs() <= ROOT_TOL {
            return Some((next, iter));
        }
        x = next;
    }
    None
}

/// Solve `t = mu + 2 sigma^2 tanh t` for every real root and classify it.
pub fn stationary_points(d: &SquashedGaussian1D) -> Result<ModeSet> {
    let (mu, sigma) = (d.mu(), d.sigma());
    let k = 2.0 * sigma * sigma;
    let g = |t: f64| -> (f64, f64) {
        let th = t.tanh();
        (t - mu - k * th, 1.0 - k * (1.0 - th * th))
    };
    // Outer bracket ends sit one unit past mu -/+ k, where |g| >= 1, so
    // saturated tanh cannot round them onto the root.
    let fail = || Error::NonConvergence {
        iterations: MAX_ITER,
        mu,
        sigma,
    };

    let mut brackets = Vec::with_capacity(3);
    if k <= 1.0 {
        brackets.push((mu - k - 1.0, mu + k + 1.0));
    } else {
        let tc = k.sqrt().acosh();
        let g_left = g(-tc).0;
        let g_right = g(tc).0;
        if g_left >= 0.0 {
            brackets.push(((mu - k).min(-tc) - 1.0, -tc));
        }
        if g_left >= 0.0 && g_right <= 0.0 {
            brackets.push((-tc, tc));
        }
        if g_right <= 0.0 {
            brackets.push((tc, (mu + k).max(tc) + 1.0));
        }
    }

    let mut roots: Vec<(f64, usize)> = Vec::with_capacity(3);
    for (lo, hi) in brackets {
        let (t, it) = newton_bisect(g, lo, hi).ok_or_else(fail)?;
        if roots.iter().all(|&(r, _)| (r - t).abs() > DEDUP_TOL) {
            roots.push((t, it));
        }
    }
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points = Vec::with_capacity(roots.len());
    let mut evaluations = 0;
    for &(t, it) in &roots {
        evaluations += it;
        let y = clamp_to_support(t.tanh());
        // a lone stationary point of a density vanishing at both ends is
        // its maximum, including the flat k = 1, mu = 0 case where g' = 0
        let kind = if roots.len() == 1 || g(t).1 > 0.0 {
            StationaryKind::LocalMax
        } else {
            StationaryKind::LocalMin
        };
        points.push(StationaryPoint {
            t,
            y,
            density: d.pdf(y)?,
            kind,
        });
    }

    let maxima: Vec<&StationaryPoint> = points
        .iter()
        .filter(|p| p.kind == StationaryKind::LocalMax)
        .collect();
    // Rank maxima by the density as evaluated on the clamped support, so the
    // reported global mode is never beaten by another listed point even when
    // a far mode has been clamped to 1 - 1e-12. Near-ties go to the positive
    // mode.
    let mut best = *maxima.first().ok_or_else(fail)?;
    let mut best_lp = d.log_pdf(best.y)?;
    for &p in &maxima[1..] {
        let lp = d.log_pdf(p.y)?;
        let tie = (lp - best_lp).abs() <= 1e-12 * best_lp.abs().max(1.0);
        if (tie && p.t > best.t) || (!tie && lp > best_lp) {
            best = p;
            best_lp = lp;
        }
    }

    let global = ModeResult {
        y_star: best.y,
        t_star: best.t,
        density_at_mode: best.density,
        method: ModeMethod::Analytic,
        evaluations,
    };
    Ok(ModeSet {
        bimodal: maxima.len() == 2,
        stationary_points: points,
        global,
    })
}

/// Global mode from the stationary-point solver.
pub fn analytic_mode(d: &SquashedGaussian1D) -> Result<ModeResult> {
    stationary_points(d).map(|s| s.global)
}

/// `tanh(mu)`, the action standard SAC inference returns.
pub fn naive_action(d: &SquashedGaussian1D) -> f64 {
    d.mu().tanh()
}

/// `|mode - tanh(mu)|`. Symmetric bimodal ties use the positive mode.
pub fn action_bias(d: &SquashedGaussian1D) -> Result<f64> {
    Ok((analytic_mode(d)?.y_star - naive_action(d)).abs())
}

/// Per-dimension analytic modes; the joint density factorizes, so this is
/// the joint mode.
pub fn joint_mode(d: &DiagSquashedGaussian) -> Result<Vec<ModeResult>> {
    d.components().map(|c| analytic_mode(&c)).collect()
}
