//! Empirical side of the criterion: locating crossings, checking that the
//! predicted subsequences really decrease to zero, and classifying the limits
//! of the residue classes the criterion says nothing about.

use serde::{Deserialize, Serialize};

use crate::criteria::{
    predict_subsequence_convergence, BoundingFunction, ChainVerdict, DominanceClaim, Threshold,
    ThresholdWindow,
};
use crate::equation::{extract_subsequence, EquationSpec, Trajectory};
use crate::error::Result;
use crate::serde_util::extended_pair;

/// Number of trailing subsequence terms copied into a prediction.
const TAIL_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// A subsequence has reached zero once below this.
    pub zero: f64,
    /// Distance and tail width allowed when matching a limit candidate.
    pub limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero: 1e-10,
            limit: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    ConvergingToZero,
    ConvergingToFixedPoint { value: f64 },
    Inconclusive,
    Violated { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub n0: usize,
    pub stride: usize,
    pub residue_class: usize,
    #[serde(with = "extended_pair")]
    pub window: [f64; 2],
    pub chain_verified: bool,
    pub chain: ChainVerdict,
    pub subsequence_tail: Vec<f64>,
    pub verdict: Verdict,
}

impl Prediction {
    pub(crate) fn new(
        terms: &[f64],
        n0: usize,
        stride: usize,
        window: &ThresholdWindow,
        chain: ChainVerdict,
        verdict: Verdict,
    ) -> Self {
        let sub: Vec<f64> = terms[n0..].iter().step_by(stride).copied().collect();
        Self {
            n0,
            stride,
            residue_class: n0 % stride,
            window: window.as_pair(),
            chain_verified: chain.holds(),
            chain,
            subsequence_tail: sub[sub.len().saturating_sub(TAIL_LEN)..].to_vec(),
            verdict,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum LimitClass {
    Zero,
    FixedPoint(f64),
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub class: LimitClass,
    pub tail_mean: f64,
    /// `max - min` over the tail, a Cauchy-style spread.
    pub tail_width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassLimit {
    pub residue_class: usize,
    pub start: usize,
    pub stride: usize,
    pub monotone: MonotoneVerdict,
    #[serde(flatten)]
    pub limit: LimitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub equation: String,
    pub bound: String,
    pub claim: DominanceClaim,
    pub threshold: Threshold,
    pub crossing_index: Option<usize>,
    pub stride: usize,
    pub window: ThresholdWindow,
    /// The analysed sequence is `x_n - offset`; nonzero after translating a
    /// fixed point to the origin.
    pub offset: f64,
    pub predictions: Vec<Prediction>,
    pub full_convergence_from: Option<usize>,
    pub chain_verified: bool,
    pub limits: Vec<ClassLimit>,
    pub y_limits: Vec<ClassLimit>,
}

impl ConvergenceReport {
    pub fn any_violated(&self) -> bool {
        self.predictions
            .iter()
            .any(|p| matches!(p.verdict, Verdict::Violated { .. }))
    }

    /// Re-expresses the report in the original coordinate `x = y + offset`.
    pub fn with_offset(mut self, offset: f64) -> Self {
        if offset == 0.0 {
            return self;
        }
        self.offset = offset;
        self.window = self.window.shifted(offset);
        for p in &mut self.predictions {
            p.window = [p.window[0] + offset, p.window[1] + offset];
            for x in &mut p.subsequence_tail {
                *x += offset;
            }
            if p.verdict == Verdict::ConvergingToZero {
                p.verdict = Verdict::ConvergingToFixedPoint { value: offset };
            }
        }
        for l in &mut self.limits {
            l.limit.tail_mean += offset;
            l.limit.class = match l.limit.class {
                LimitClass::Zero => LimitClass::FixedPoint(offset),
                LimitClass::FixedPoint(c) => LimitClass::FixedPoint(c + offset),
                LimitClass::Inconclusive => LimitClass::Inconclusive,
            };
        }
        self
    }
}

/// Smallest `n >= from_index` with `terms[n]` strictly inside the window.
pub fn detect_crossing(terms: &[f64], window: &ThresholdWindow, from_index: usize) -> Option<usize> {
    terms
        .iter()
        .enumerate()
        .skip(from_index)
        .find(|(_, &x)| window.contains_strict(x))
        .map(|(n, _)| n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MonotoneVerdict {
    Verified,
    Violation { j: usize },
    Inconclusive,
}

/// Strictly decreasing in absolute value and ending below `tol`. Once a term
/// is exactly zero every later term must be zero as well.
pub fn verify_monotone_to_zero(subseq: &[f64], tol: f64) -> MonotoneVerdict {
    for j in 1..subseq.len() {
        let (prev, cur) = (subseq[j - 1].abs(), subseq[j].abs());
        let ok = if prev == 0.0 { cur == 0.0 } else { cur < prev };
        if !ok {
            return MonotoneVerdict::Violation { j };
        }
    }
    match subseq.last() {
        Some(x) if x.abs() < tol => MonotoneVerdict::Verified,
        _ => MonotoneVerdict::Inconclusive,
    }
}

fn tail(subseq: &[f64]) -> &[f64] {
    let len = (subseq.len() / 4).max(4).min(subseq.len());
    &subseq[subseq.len() - len..]
}

/// Limit of a subsequence judged from the mean of its last quarter (at least
/// four terms).
pub fn classify_limit(subseq: &[f64], candidates: &[f64], tol: f64) -> LimitReport {
    let t = tail(subseq);
    if t.is_empty() {
        return LimitReport {
            class: LimitClass::Inconclusive,
            tail_mean: f64::NAN,
            tail_width: f64::NAN,
        };
    }
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    let (lo, hi) = t
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let width = hi - lo;
    let class = if verify_monotone_to_zero(t, tol) == MonotoneVerdict::Verified {
        LimitClass::Zero
    } else if width > tol {
        LimitClass::Inconclusive
    } else {
        candidates
            .iter()
            .copied()
            .filter(|c| (mean - c).abs() <= tol)
            .min_by(|a, b| (mean - a).abs().total_cmp(&(mean - b).abs()))
            .map_or(LimitClass::Inconclusive, |c| {
                if c == 0.0 {
                    LimitClass::Zero
                } else {
                    LimitClass::FixedPoint(c)
                }
            })
    };
    LimitReport {
        class,
        tail_mean: mean,
        tail_width: width,
    }
}

pub(crate) fn verdict_for(chain: &ChainVerdict, monotone: MonotoneVerdict) -> Verdict {
    match (chain, monotone) {
        (ChainVerdict::Violated { j, index, .. }, _) => Verdict::Violated {
            reason: format!("inequality chain fails at j = {j} (index {index})"),
        },
        (_, MonotoneVerdict::Violation { j }) => Verdict::Violated {
            reason: format!("subsequence not strictly decreasing at j = {j}"),
        },
        (_, MonotoneVerdict::Verified) => Verdict::ConvergingToZero,
        (_, MonotoneVerdict::Inconclusive) => Verdict::Inconclusive,
    }
}

/// Limit classification of every residue class mod `stride`, each started at
/// its first computed term at or after `first`.
pub(crate) fn class_limits(
    terms: &[f64],
    first: usize,
    stride: usize,
    candidates: &[f64],
    tol: &Tolerances,
) -> Vec<ClassLimit> {
    (0..stride)
        .filter_map(|r| {
            let start = (first..first + stride).find(|n| n % stride == r)?;
            let sub = extract_subsequence(terms, start, stride).ok()?;
            Some(ClassLimit {
                residue_class: r,
                start,
                stride,
                monotone: verify_monotone_to_zero(&sub, tol.zero),
                limit: classify_limit(&sub, candidates, tol.limit),
            })
        })
        .collect()
}

/// Predictions with their chains, monotonicity verdicts and per-class limits.
pub fn build_report(
    eq: &EquationSpec,
    bound: &BoundingFunction,
    traj: &Trajectory,
    tol: &Tolerances,
) -> Result<ConvergenceReport> {
    let mut report = predict_subsequence_convergence(eq, bound, traj)?;
    let k = report.stride;
    for p in &mut report.predictions {
        let sub = extract_subsequence(&traj.terms, p.n0, k)?;
        p.verdict = verdict_for(&p.chain, verify_monotone_to_zero(&sub, tol.zero));
    }
    let mut candidates = vec![0.0];
    candidates.extend_from_slice(bound.limit_candidates());
    report.limits = class_limits(&traj.terms, eq.order(), k, &candidates, tol);
    Ok(report)
}
