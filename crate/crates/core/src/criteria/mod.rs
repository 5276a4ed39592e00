//! Bounding functions, threshold windows and the subsequence predictions they
//! license.
//!
//! A bound `g` for lag `k` asserts `|F_n(u)| <= g(u_k)` on the domain. Below
//! its threshold α, `g(u) < |u|`, so once a term `x_{n0}` enters the window
//! `(-α, α) ∩ π_k(D)` the stride-`k` subsequence through `n0` contracts to 0.

mod threshold;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use threshold::{
    bisect, golden_max, solve_threshold, solve_threshold_with, Threshold, ThresholdKind,
    ThresholdOptions, DEFAULT_SUBDIVISIONS, DEFAULT_TOLERANCE,
};

use crate::analysis::{ConvergenceReport, Prediction, Verdict};
use crate::equation::{EquationSpec, Interval, Trajectory};
use crate::error::{Error, Result};
use crate::serde_util::extended_pair;

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Grid size used when validating a bound before it is used for predictions.
pub const VALIDATION_GRID: usize = 10_000;

/// How the dominance `|F_n| <= g(u_k)` is backed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominanceClaim {
    /// Derived from the model's closed form.
    Analytic,
    /// A bound used for illustration that does not dominate `F_n` everywhere.
    Informal,
    /// Supplied with a user equation and not checked.
    Unverified,
}

#[derive(Clone)]
pub struct BoundingFunction {
    label: String,
    g: ScalarFn,
    support: Interval,
    dominant_lag: usize,
    search_hi: f64,
    threshold: Threshold,
    claim: DominanceClaim,
    limit_candidates: Vec<f64>,
}

impl fmt::Debug for BoundingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundingFunction")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("dominant_lag", &self.dominant_lag)
            .field("threshold", &self.threshold)
            .field("claim", &self.claim)
            .finish_non_exhaustive()
    }
}

impl BoundingFunction {
    /// Bound whose threshold is located numerically on `(0, search_hi]`.
    pub fn new(
        label: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: Interval,
        dominant_lag: usize,
        search_hi: f64,
        claim: DominanceClaim,
    ) -> Result<Self> {
        let mut bound = Self::with_threshold(
            label,
            g,
            support,
            dominant_lag,
            Threshold::unbounded(),
            claim,
        )?;
        let hi = if support.hi.is_finite() {
            search_hi.min(support.hi)
        } else {
            search_hi
        };
        bound.search_hi = hi;
        let h = bound.symmetrized();
        bound.threshold = solve_threshold(|u| h(u), hi, DEFAULT_TOLERANCE)?;
        Ok(bound)
    }

    /// Bound with a threshold known in closed form.
    pub fn with_threshold(
        label: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: Interval,
        dominant_lag: usize,
        threshold: Threshold,
        claim: DominanceClaim,
    ) -> Result<Self> {
        if dominant_lag == 0 {
            return Err(Error::InvalidParameter("dominant lag must be positive".into()));
        }
        if !support.contains(0.0) {
            return Err(Error::InvalidParameter(
                "bound support must contain the origin".into(),
            ));
        }
        let search_hi = if threshold.alpha.is_finite() {
            (4.0 * threshold.alpha).max(1.0)
        } else {
            10.0
        };
        Ok(Self {
            label: label.into(),
            g: Arc::new(g),
            support,
            dominant_lag,
            search_hi,
            threshold,
            claim,
            limit_candidates: Vec::new(),
        })
    }

    /// Points a non-converging subsequence may settle at, used when
    /// classifying limits.
    pub fn with_limit_candidates(mut self, candidates: Vec<f64>) -> Self {
        self.limit_candidates = candidates;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn dominant_lag(&self) -> usize {
        self.dominant_lag
    }

    pub fn search_hi(&self) -> f64 {
        self.search_hi
    }

    pub fn threshold(&self) -> Threshold {
        self.threshold
    }

    pub fn alpha(&self) -> f64 {
        self.threshold.alpha
    }

    pub fn claim(&self) -> DominanceClaim {
        self.claim
    }

    pub fn limit_candidates(&self) -> &[f64] {
        &self.limit_candidates
    }

    /// `h(u) = max{g(u), g(-u)}`, using only the side inside the support.
    pub fn symmetrized(&self) -> ScalarFn {
        symmetrize(self)
    }

    pub fn window(&self) -> ThresholdWindow {
        ThresholdWindow::symmetric(self.threshold, self.support)
    }

    /// Grid falsification of `g(0) = 0` and `g(u) < |u|` on the
    /// window, clipped to the search range when the window is unbounded.
    pub fn validate(&self, grid_points: usize) -> Result<()> {
        let g0 = self.eval(0.0);
        if g0 != 0.0 {
            return Err(Error::BoundValidation(format!("g(0) = {g0}, expected 0")));
        }
        let w = self.window();
        let lo = w.lo.max(-self.search_hi);
        let hi = w.hi.min(self.search_hi);
        let clipped = ThresholdWindow {
            lo,
            hi,
            lo_closed: w.lo_closed,
        };
        match verify_sublinearity(|u| self.eval(u), &clipped, grid_points)? {
            Sublinearity::Holds => Ok(()),
            Sublinearity::Counterexample(u) => Err(Error::BoundValidation(format!(
                "{}: g({u}) = {} is not below |u|",
                self.label,
                self.eval(u)
            ))),
        }
    }
}

pub fn symmetrize(bound: &BoundingFunction) -> ScalarFn {
    let g = bound.g.clone();
    let support = bound.support;
    Arc::new(move |u: f64| {
        let plus = support.contains(u).then(|| g(u));
        let minus = support.contains(-u).then(|| g(-u));
        match (plus, minus) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => f64::NAN,
        }
    })
}

/// `(-α, α) ∩ π_k(D)`, or a translate of it. The upper end is always open;
/// the lower end is closed when it comes from a closed domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdWindow {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
}

impl ThresholdWindow {
    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
        }
    }

    pub fn symmetric(threshold: Threshold, support: Interval) -> Self {
        let alpha = threshold.alpha;
        let (lo, lo_closed) = if support.lo > -alpha {
            (support.lo, true)
        } else {
            (-alpha, false)
        };
        Self {
            lo,
            hi: alpha.min(support.hi),
            lo_closed,
        }
    }

    /// Membership as used by the predictions, closed at a domain boundary.
    pub fn contains(&self, x: f64) -> bool {
        (self.lo < x || (self.lo_closed && x == self.lo)) && x < self.hi
    }

    /// Strict interior membership as used for crossing detection.
    pub fn contains_strict(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self {
            lo: self.lo + by,
            hi: self.hi + by,
            lo_closed: self.lo_closed,
        }
    }

    pub fn as_pair(&self) -> [f64; 2] {
        [self.lo, self.hi]
    }
}

impl Serialize for ThresholdWindow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        extended_pair::serialize(&self.as_pair(), s)
    }
}

impl<'de> Deserialize<'de> for ThresholdWindow {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [lo, hi] = extended_pair::deserialize(d)?;
        Ok(Self::open(lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "u", rename_all = "kebab-case")]
pub enum Sublinearity {
    Holds,
    Counterexample(f64),
}

/// Samples `grid_points` interior points of the window, skipping 0, and
/// reports the first with `g(u) >= |u|`. Falsification only.
pub fn verify_sublinearity(
    g: impl Fn(f64) -> f64,
    window: &ThresholdWindow,
    grid_points: usize,
) -> Result<Sublinearity> {
    if grid_points < 2 {
        return Err(Error::InvalidParameter("grid_points must be at least 2".into()));
    }
    if !(window.lo.is_finite() && window.hi.is_finite()) {
        return Err(Error::InvalidParameter(
            "sublinearity grid needs a bounded window".into(),
        ));
    }
    let width = window.hi - window.lo;
    for i in 1..=grid_points {
        let u = window.lo + width * i as f64 / (grid_points + 1) as f64;
        if u == 0.0 {
            continue;
        }
        let v = g(u);
        if !v.is_finite() {
            return Err(Error::NonFiniteBound { u });
        }
        if v >= u.abs() {
            return Ok(Sublinearity::Counterexample(u));
        }
    }
    Ok(Sublinearity::Holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ChainVerdict {
    /// Every link checked; `links` counts them. `terminated_at_zero` marks a
    /// chain that reached an exact zero term.
    Holds {
        links: usize,
        terminated_at_zero: bool,
    },
    /// First failing link: `j` counts strides from `n0`, `index` is
    /// `n0 + j k`.
    Violated {
        j: usize,
        index: usize,
        term: f64,
        next: f64,
        bound: f64,
    },
}

impl ChainVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ChainVerdict::Holds { .. })
    }
}

/// Checks `|x_{n0+(j+1)k}| <= h(x_{n0+jk}) < |x_{n0+jk}|` for every `j` in
/// range. An exact zero term ends the chain.
pub fn check_inequality_chain(
    terms: &[f64],
    n0: usize,
    k: usize,
    h: impl Fn(f64) -> f64,
) -> ChainVerdict {
    let mut links = 0;
    let mut j = 0;
    while let Some(next_index) = n0.checked_add((j + 1) * k).filter(|&i| i < terms.len()) {
        let index = n0 + j * k;
        let term = terms[index];
        if term == 0.0 {
            return ChainVerdict::Holds {
                links,
                terminated_at_zero: true,
            };
        }
        let next = terms[next_index];
        let bound = h(term);
        if !(next.abs() <= bound && bound < term.abs()) {
            return ChainVerdict::Violated {
                j,
                index,
                term,
                next,
                bound,
            };
        }
        links += 1;
        j += 1;
    }
    ChainVerdict::Holds {
        links,
        terminated_at_zero: terms.get(n0 + j * k) == Some(&0.0),
    }
}

fn check_lag(eq: &EquationSpec, bound: &BoundingFunction) -> Result<()> {
    if eq.dominant_lag() != bound.dominant_lag() {
        return Err(Error::LagMismatch {
            equation: eq.dominant_lag(),
            bound: bound.dominant_lag(),
        });
    }
    Ok(())
}

/// First index from which the stride-`k` prediction is meaningful: the next
/// term of the class, `x_{n0+k}`, must be computed by the recurrence.
fn earliest_start(order: usize, k: usize) -> usize {
    order.saturating_sub(k)
}

/// For each residue class mod `k`, the first index whose term lies in the
/// window, with the inequality chain checked along its subsequence.
pub fn predict_subsequence_convergence(
    eq: &EquationSpec,
    bound: &BoundingFunction,
    traj: &Trajectory,
) -> Result<ConvergenceReport> {
    check_lag(eq, bound)?;
    bound.validate(VALIDATION_GRID)?;
    let k = bound.dominant_lag();
    let window = bound.window();
    let h = bound.symmetrized();
    let terms = &traj.terms;

    let mut covered = vec![false; k];
    let mut predictions = Vec::new();
    for n0 in earliest_start(eq.order(), k)..terms.len() {
        let class = n0 % k;
        if covered[class] || !window.contains(terms[n0]) {
            continue;
        }
        covered[class] = true;
        let chain = check_inequality_chain(terms, n0, k, |u| h(u));
        let verdict = match chain {
            ChainVerdict::Violated { j, index, .. } => Verdict::Violated {
                reason: format!("inequality chain fails at j = {j} (index {index})"),
            },
            ChainVerdict::Holds { .. } => Verdict::Inconclusive,
        };
        predictions.push(Prediction::new(terms, n0, k, &window, chain, verdict));
        if covered.iter().all(|&c| c) {
            break;
        }
    }

    let chain_verified = predictions.iter().all(|p| p.chain.holds());
    Ok(ConvergenceReport {
        equation: eq.name().to_string(),
        bound: bound.label().to_string(),
        claim: bound.claim(),
        threshold: bound.threshold(),
        crossing_index: crate::analysis::detect_crossing(terms, &window, 0),
        stride: k,
        window,
        offset: 0.0,
        predictions,
        full_convergence_from: full_convergence_start(terms, eq.order(), k, &window),
        chain_verified,
        limits: Vec::new(),
        y_limits: Vec::new(),
    })
}

/// First `n0` with `k` consecutive terms `x_{n0}, ..., x_{n0+k-1}` in the
/// window, after which the whole tail converges to 0.
pub fn predict_full_convergence(
    eq: &EquationSpec,
    bound: &BoundingFunction,
    traj: &Trajectory,
) -> Result<Option<usize>> {
    check_lag(eq, bound)?;
    Ok(full_convergence_start(
        &traj.terms,
        eq.order(),
        bound.dominant_lag(),
        &bound.window(),
    ))
}

fn full_convergence_start(
    terms: &[f64],
    order: usize,
    k: usize,
    window: &ThresholdWindow,
) -> Option<usize> {
    let mut run = 0;
    for (n, &x) in terms.iter().enumerate().skip(earliest_start(order, k)) {
        if window.contains(x) {
            run += 1;
            if run == k {
                return Some(n + 1 - k);
            }
        } else {
            run = 0;
        }
    }
    None
}
