//! Locating the threshold α below which a bounding function is sublinear.
//!
//! α is the smallest positive root of `g(u) = u`: a sign-bracketing scan over
//! a uniform grid of `(0, search_hi]`, geometric probes between the first grid
//! point and the origin, and bisection on the first bracket. Touch points
//! where `g(u) - u` reaches zero without changing sign are found by refining
//! local maxima of the grid values and are flagged as tangent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::serde_util::extended;

pub const DEFAULT_SUBDIVISIONS: usize = 10_000;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Geometric probes below the first grid point.
const NEAR_ZERO_PROBES: u32 = 60;
/// Probes this deep must all satisfy `g(u) < u`.
const REQUIRED_SUBLINEAR_DEPTH: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    /// `g(u) - u` changes sign at α.
    Crossing,
    /// `g(u) = u` is touched at α without a sign change; the inequality is
    /// non-strict there.
    Tangent,
    /// No root in the searched range: α = +∞.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    #[serde(with = "extended")]
    pub alpha: f64,
    pub kind: ThresholdKind,
}

impl Threshold {
    pub fn crossing(alpha: f64) -> Self {
        Self {
            alpha,
            kind: ThresholdKind::Crossing,
        }
    }

    pub fn tangent(alpha: f64) -> Self {
        Self {
            alpha,
            kind: ThresholdKind::Tangent,
        }
    }

    pub fn unbounded() -> Self {
        Self {
            alpha: f64::INFINITY,
            kind: ThresholdKind::Unbounded,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.kind == ThresholdKind::Unbounded
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    pub subdivisions: usize,
    pub tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            subdivisions: DEFAULT_SUBDIVISIONS,
            tol: DEFAULT_TOLERANCE,
        }
    }
}

/// Smallest positive root of `g(u) = u` on `(0, search_hi]`, or +∞.
pub fn solve_threshold(g: impl Fn(f64) -> f64, search_hi: f64, tol: f64) -> Result<Threshold> {
    solve_threshold_with(
        g,
        search_hi,
        ThresholdOptions {
            tol,
            ..Default::default()
        },
    )
}

pub fn solve_threshold_with(
    g: impl Fn(f64) -> f64,
    search_hi: f64,
    opts: ThresholdOptions,
) -> Result<Threshold> {
    if !(search_hi > 0.0 && search_hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "search_hi must be positive and finite, got {search_hi}"
        )));
    }
    if opts.subdivisions < 2 {
        return Err(Error::InvalidParameter("need at least 2 subdivisions".into()));
    }
    let excess = |u: f64| -> Result<f64> {
        let v = g(u);
        if v.is_finite() {
            Ok(v - u)
        } else {
            Err(Error::NonFiniteBound { u })
        }
    };
    let n = opts.subdivisions;
    let grid = |i: usize| search_hi * i as f64 / n as f64;
    let first = grid(1);

    // Probes u_1 / 2^j, j = 1..=60, from the first grid point toward 0.
    let mut deepest_violation = None;
    for j in 1..=NEAR_ZERO_PROBES {
        let p = first * 0.5f64.powi(j as i32);
        if excess(p)? >= 0.0 {
            if j >= REQUIRED_SUBLINEAR_DEPTH {
                return Err(Error::NotSublinear { u: p });
            }
            deepest_violation = Some(j);
        }
    }
    if let Some(j) = deepest_violation {
        let hi = first * 0.5f64.powi(j as i32);
        let lo = 0.5 * hi;
        return Ok(Threshold::crossing(bisect(|u| g(u) - u, lo, hi, scaled(opts.tol, hi))));
    }

    let values = (0..=n)
        .map(|i| if i == 0 { Ok(-1.0) } else { excess(grid(i)) })
        .collect::<Result<Vec<f64>>>()?;
    // values[0] stands in for the probe at first/2, which is known negative.
    let point = |i: usize| if i == 0 { 0.5 * first } else { grid(i) };

    let sign_change = (1..=n).find(|&i| values[i] >= 0.0);
    let scan_end = sign_change.unwrap_or(n);

    // A touch point below the first sign change is the smaller root.
    for i in 1..scan_end.min(n) {
        if values[i] >= values[i - 1] && values[i] >= values[i + 1] {
            let (lo, hi) = (point(i - 1), point(i + 1));
            let (peak, peak_value) = golden_max(|u| g(u) - u, lo, hi, scaled(opts.tol, hi));
            let touch = touch_tolerance(peak);
            if peak_value > touch {
                return Ok(Threshold::crossing(bisect(
                    |u| g(u) - u,
                    lo,
                    peak,
                    scaled(opts.tol, peak),
                )));
            }
            if peak_value >= -touch {
                return Ok(Threshold::tangent(peak));
            }
        }
    }

    match sign_change {
        Some(i) => {
            if values[i] == 0.0 && (i == n || values[i + 1] < 0.0) {
                Ok(Threshold::tangent(point(i)))
            } else if values[i] == 0.0 {
                Ok(Threshold::crossing(point(i)))
            } else {
                Ok(Threshold::crossing(bisect(
                    |u| g(u) - u,
                    point(i - 1),
                    point(i),
                    scaled(opts.tol, point(i)),
                )))
            }
        }
        None => Ok(Threshold::unbounded()),
    }
}

/// Width tolerance that stays relative for roots below 1.
fn scaled(tol: f64, hi: f64) -> f64 {
    tol * hi.min(1.0)
}

fn touch_tolerance(u: f64) -> f64 {
    1e-12 * u.abs().max(1.0)
}

/// Root of `f` in `[lo, hi]` given `f(lo) < 0 <= f(hi)`, to width `tol`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximiser of a unimodal `f` on `[lo, hi]` by golden-section search.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    if fa >= fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen from an independent bisection of 0.5 ln u = c u - 1.5 (the
    // log form of u^{3/2} e^{1.5 - c u} = u) run to 1e-15.
    const ROOT_C09: f64 = 0.054964735256981326;
    const ROOT_C07: f64 = 0.053672268617553184;
    const ROOT_C16: f64 = 0.06040345722312391;

    fn ricker(c: f64) -> impl Fn(f64) -> f64 {
        move |u: f64| u.powf(1.5) * (1.5 - c * u).exp()
    }

    #[test]
    fn sp3_thresholds() {
        for (c, root) in [(0.9, ROOT_C09), (0.7, ROOT_C07), (1.6, ROOT_C16)] {
            let t = solve_threshold(ricker(c), 10.0, 1e-12).unwrap();
            assert_eq!(t.kind, ThresholdKind::Crossing);
            assert!((t.alpha - root).abs() < 1e-11, "c={c}: {}", t.alpha);
        }
    }

    #[test]
    fn rigorous_k1_threshold_is_e_minus_3() {
        let t = solve_threshold(|u: f64| u.powf(1.5) * 1.5f64.exp(), 10.0, 1e-12).unwrap();
        assert!((t.alpha - (-3.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn no_root_means_unbounded() {
        let t = solve_threshold(|u| u * u / (1.0 + u * u), 100.0, 1e-12).unwrap();
        assert_eq!(t, Threshold::unbounded());
    }

    #[test]
    fn superlinear_near_origin_is_rejected() {
        assert!(matches!(
            solve_threshold(|u| 2.0 * u, 1.0, 1e-12),
            Err(Error::NotSublinear { .. })
        ));
    }

    #[test]
    fn tangency_on_grid_point() {
        // u e^{1-u} <= 1 with equality only at u = 1.
        let t = solve_threshold(|u: f64| u * u * (1.0 - u).exp(), 10.0, 1e-12).unwrap();
        assert_eq!(t, Threshold::tangent(1.0));
    }

    #[test]
    fn tangency_between_grid_points() {
        // Double root at an irrational point; g(u) - u = -(u - r)^2 u.
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let t = solve_threshold(move |u: f64| u - u * (u - r).powi(2), 10.0, 1e-12).unwrap();
        assert_eq!(t.kind, ThresholdKind::Tangent);
        assert!((t.alpha - r).abs() < 1e-6);
    }

    #[test]
    fn root_below_first_grid_point() {
        // Root at 1e-5 while the grid starts at 1e-3.
        let t = solve_threshold(|u| u * u / 1e-5, 10.0, 1e-15).unwrap();
        assert!((t.alpha - 1e-5).abs() < 1e-12);
    }

    #[test]
    fn bisection_oracle() {
        let r = bisect(|u| u * u - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn golden_section_finds_peak() {
        let (u, v) = golden_max(|u| -(u - 0.3).powi(2) + 1.0, 0.0, 1.0, 1e-10);
        assert!((u - 0.3).abs() < 1e-5);
        assert!((v - 1.0).abs() < 1e-10);
    }
}
