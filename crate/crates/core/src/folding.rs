//! Planar systems `x_{n+1} = f_n(x_n, y_n)`, `y_{n+1} = g_n(x_n, y_n)` on the
//! quadrant, and their folding into second-order scalar equations.
//!
//! When `f_n(u, .)` can be inverted, `y_n = σ_n(x_n, x_{n+1})` and the
//! x-component satisfies
//! `x_n = f_{n-1}(x_{n-1}, g_{n-2}(x_{n-2}, σ_{n-2}(x_{n-2}, x_{n-1})))`
//! with initial values `x_0` and `x_1 = f_0(x_0, y_0)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    class_limits, classify_limit, detect_crossing, verdict_for, verify_monotone_to_zero,
    ClassLimit, ConvergenceReport, Prediction, Tolerances,
};
use crate::criteria::{
    check_inequality_chain, solve_threshold, BoundingFunction, DominanceClaim, ScalarFn,
    Threshold, ThresholdWindow, DEFAULT_TOLERANCE,
};
use crate::descriptor::ModelDescriptor;
use crate::equation::{Domain, EquationSpec, Halt, Interval};
use crate::error::{Error, Result};

pub type PlaneMap = Arc<dyn Fn(usize, f64, f64) -> f64 + Send + Sync>;
pub type StepScalar = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;
pub type SigmaFn = Arc<dyn Fn(usize, f64, f64) -> Option<f64> + Send + Sync>;

/// Relative tolerance for `f_n(u, σ_n(u, w)) = w`.
pub const SIGMA_CHECK_TOL: f64 = 1e-9;
pub const DEFAULT_ENVELOPE_GRID: usize = 200;
pub const DEFAULT_SEARCH_HI: f64 = 10.0;
const MONOTONE_GRID: usize = 10_000;

/// How `f_n(u, v) = w` is solved for `v`.
#[derive(Clone)]
pub enum SigmaForm {
    /// `f_n(u, v) = ρ_n(u) φ_n(v)`, so `v = φ_n⁻¹(w / ρ_n(u))`.
    Multiplicative { rho: PlaneScalar, phi_inv: StepScalar },
    /// `f_n(u, v) = ρ_n(u) + φ_n(v)`, so `v = φ_n⁻¹(w - ρ_n(u))`.
    Additive { rho: PlaneScalar, phi_inv: StepScalar },
    /// Any explicit inverse; `None` when `w` is out of range.
    Custom(SigmaFn),
    None,
}

/// `(n, u) -> ρ_n(u)`.
pub type PlaneScalar = StepScalar;

#[derive(Clone)]
pub struct H5Envelopes {
    /// `f_n(u_1, u_2) <= f̄(u_2)`.
    pub f_bar: ScalarFn,
    /// `g_n(u_1, u_2) <= ḡ(u_1)`.
    pub g_bar: ScalarFn,
}

#[derive(Clone)]
pub struct PlanarSystem {
    name: String,
    f: PlaneMap,
    g: PlaneMap,
    sigma: SigmaForm,
    h5: Option<H5Envelopes>,
    h6: Option<ScalarFn>,
    sample_span: usize,
    descriptor: Option<ModelDescriptor>,
    folded_descriptor: Option<ModelDescriptor>,
}

impl fmt::Debug for PlanarSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlanarSystem")
            .field("name", &self.name)
            .field("has_sigma", &!matches!(self.sigma, SigmaForm::None))
            .field("h5", &self.h5.is_some())
            .field("h6", &self.h6.is_some())
            .field("sample_span", &self.sample_span)
            .finish_non_exhaustive()
    }
}

impl PlanarSystem {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(usize, f64, f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(usize, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            g: Arc::new(g),
            sigma: SigmaForm::None,
            h5: None,
            h6: None,
            sample_span: 1,
            descriptor: None,
            folded_descriptor: None,
        }
    }

    pub fn with_sigma(mut self, sigma: SigmaForm) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_h5(
        mut self,
        f_bar: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_bar: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.h5 = Some(H5Envelopes {
            f_bar: Arc::new(f_bar),
            g_bar: Arc::new(g_bar),
        });
        self
    }

    pub fn with_h6(mut self, f_bar: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.h6 = Some(Arc::new(f_bar));
        self
    }

    /// Steps `n = 0..span` over which envelope checks sample `f_n`, `g_n`.
    pub fn with_sample_span(mut self, span: usize) -> Self {
        self.sample_span = span.max(1);
        self
    }

    pub fn with_descriptor(mut self, d: ModelDescriptor) -> Self {
        self.descriptor = Some(d);
        self
    }

    pub fn with_folded_descriptor(mut self, d: ModelDescriptor) -> Self {
        self.folded_descriptor = Some(d);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn descriptor(&self) -> Option<&ModelDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn has_sigma(&self) -> bool {
        !matches!(self.sigma, SigmaForm::None)
    }

    pub fn h5(&self) -> Option<&H5Envelopes> {
        self.h5.as_ref()
    }

    pub fn h6(&self) -> Option<&ScalarFn> {
        self.h6.as_ref()
    }

    pub fn f(&self, n: usize, u: f64, v: f64) -> f64 {
        (self.f)(n, u, v)
    }

    pub fn g(&self, n: usize, u: f64, v: f64) -> f64 {
        (self.g)(n, u, v)
    }

    pub fn step(&self, n: usize, (x, y): (f64, f64)) -> (f64, f64) {
        (self.f(n, x, y), self.g(n, x, y))
    }

    /// `f_n(0,0) = g_n(0,0) = 0` over the sample span.
    pub fn check_origin(&self) -> Result<()> {
        for n in 0..self.sample_span {
            let (a, b) = self.step(n, (0.0, 0.0));
            if a != 0.0 || b != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{}: origin is not fixed at step {n}: ({a}, {b})",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Scalar bound for the folded equation implied by the envelopes:
    /// `f̄ ∘ ḡ` with lag 2 under H5, `f̄` with lag 1 under H6.
    pub fn folded_bound(&self) -> Result<Option<BoundingFunction>> {
        if let Some(env) = &self.h5 {
            let (fb, gb) = (env.f_bar.clone(), env.g_bar.clone());
            return BoundingFunction::new(
                format!("{} envelope composition", self.name),
                move |u| fb(gb(u)),
                Interval::NON_NEGATIVE,
                2,
                DEFAULT_SEARCH_HI,
                DominanceClaim::Analytic,
            )
            .map(Some);
        }
        if let Some(fb) = &self.h6 {
            let fb = fb.clone();
            return BoundingFunction::new(
                format!("{} envelope", self.name),
                move |u| fb(u),
                Interval::NON_NEGATIVE,
                1,
                DEFAULT_SEARCH_HI,
                DominanceClaim::Analytic,
            )
            .map(Some);
        }
        Ok(None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub system: String,
    pub initial: (f64, f64),
    pub points: Vec<(f64, f64)>,
    pub halt: Option<Halt>,
}

impl Orbit {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `n,x,y`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x,y\n");
        for (n, (x, y)) in self.points.iter().enumerate() {
            out.push_str(&format!("{n},{x},{y}\n"));
        }
        out
    }
}

pub fn iterate_system(sys: &PlanarSystem, initial: (f64, f64), steps: usize) -> Result<Orbit> {
    let quadrant = Interval::NON_NEGATIVE;
    if !quadrant.contains(initial.0) || !quadrant.contains(initial.1) {
        let value = if quadrant.contains(initial.0) {
            initial.1
        } else {
            initial.0
        };
        return Err(Error::DomainExit { index: 0, value });
    }
    let mut points = Vec::with_capacity(steps + 1);
    points.push(initial);
    let mut halt = None;
    for n in 0..steps {
        let (x, y) = sys.step(n, points[n]);
        if !x.is_finite() || !y.is_finite() {
            halt = Some(Halt {
                index: n + 1,
                reason: "non-finite value".into(),
            });
            break;
        }
        if x < 0.0 || y < 0.0 {
            let value = if x < 0.0 { x } else { y };
            return Err(Error::DomainExit {
                index: n + 1,
                value,
            });
        }
        points.push((x, y));
    }
    Ok(Orbit {
        system: sys.name.clone(),
        initial,
        points,
        halt,
    })
}

/// Relative difference, measured against the smallest normal float so that
/// subnormal values compare on an absolute scale.
fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }
}

/// `v >= 0` with `f_n(u, v) = w`.
pub fn solve_sigma(sys: &PlanarSystem, n: usize, u: f64, w: f64) -> Result<f64> {
    let out_of_range = || Error::SigmaRange { n, u, w };
    let v = match &sys.sigma {
        SigmaForm::None => return Err(Error::NoSolvabilityForm),
        SigmaForm::Multiplicative { rho, phi_inv } => {
            let r = rho(n, u);
            if !(r > 0.0) {
                return Err(out_of_range());
            }
            phi_inv(n, w / r)
        }
        SigmaForm::Additive { rho, phi_inv } => phi_inv(n, w - rho(n, u)),
        SigmaForm::Custom(s) => s(n, u, w).ok_or_else(out_of_range)?,
    };
    if !(v.is_finite() && v >= 0.0) {
        return Err(out_of_range());
    }
    if relative_gap(sys.f(n, u, v), w) > SIGMA_CHECK_TOL {
        return Err(out_of_range());
    }
    Ok(v)
}

/// Order-2 equation `F_n(u_1, u_2) = f_{n-1}(u_1, g_{n-2}(u_2, σ_{n-2}(u_2, u_1)))`.
pub fn fold_planar(sys: &PlanarSystem) -> Result<EquationSpec> {
    if !sys.has_sigma() {
        return Err(Error::NoSolvabilityForm);
    }
    let s = sys.clone();
    let lag = if sys.h6.is_some() && sys.h5.is_none() { 1 } else { 2 };
    let eq = EquationSpec::new(
        format!("{} (folded)", sys.name),
        2,
        lag,
        Domain::uniform(2, Interval::NON_NEGATIVE),
        move |n, u| match solve_sigma(&s, n - 2, u[1], u[0]) {
            Ok(v) => s.f(n - 1, u[0], s.g(n - 2, u[1], v)),
            Err(_) => f64::NAN,
        },
    )?;
    let descriptor = sys
        .folded_descriptor
        .clone()
        .or_else(|| {
            sys.descriptor.clone().map(|d| ModelDescriptor::Folded {
                system: Box::new(d),
            })
        })
        .unwrap_or_else(|| ModelDescriptor::Opaque {
            name: eq.name().to_string(),
        });
    Ok(eq.with_descriptor(descriptor))
}

/// Initial values `(x_0, x_1)` of the folded equation.
pub fn fold_initial(sys: &PlanarSystem, (x0, y0): (f64, f64)) -> [f64; 2] {
    [x0, sys.f(0, x0, y0)]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldConsistency {
    pub steps: usize,
    pub compared: usize,
    pub max_rel_deviation: f64,
    pub first_divergent_index: Option<usize>,
    pub y_checked: usize,
    pub y_skipped: usize,
    pub y_max_rel_deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

impl FoldConsistency {
    pub(crate) fn compare(direct: &[f64], folded: &[f64], steps: usize, tol: f64) -> Self {
        let mut max_dev: f64 = 0.0;
        let mut first = None;
        let compared = direct.len().min(folded.len());
        for n in 0..compared {
            let d = relative_gap(direct[n], folded[n]);
            if d > tol && first.is_none() {
                first = Some(n);
            }
            max_dev = max_dev.max(d);
        }
        Self {
            steps,
            compared,
            max_rel_deviation: max_dev,
            first_divergent_index: first,
            y_checked: 0,
            y_skipped: 0,
            y_max_rel_deviation: 0.0,
            tol,
            passed: first.is_none() && compared == direct.len(),
        }
    }
}

/// Runs the system directly and through its fold, comparing x-coordinates,
/// then recovers `y_n = σ_n(x_n, x_{n+1})` from the folded trajectory.
/// Indices where `x_n` or `x_{n+1}` is zero or subnormal do not determine
/// `y_n` to working precision and are skipped.
pub fn check_fold_consistency(
    sys: &PlanarSystem,
    initial: (f64, f64),
    steps: usize,
    tol: f64,
) -> Result<FoldConsistency> {
    let orbit = iterate_system(sys, initial, steps)?;
    let eq = fold_planar(sys)?;
    let direct = orbit.xs();
    let folded = if steps == 0 {
        vec![initial.0]
    } else {
        eq.iterate(&fold_initial(sys, initial), steps - 1)?.terms
    };
    let mut report = FoldConsistency::compare(&direct, &folded, steps, tol);
    let ys = orbit.ys();
    for n in 0..steps.min(folded.len().saturating_sub(1)).min(ys.len()) {
        if !folded[n].is_normal() || !folded[n + 1].is_normal() {
            report.y_skipped += 1;
            continue;
        }
        match solve_sigma(sys, n, folded[n], folded[n + 1]) {
            Ok(y) => {
                report.y_checked += 1;
                report.y_max_rel_deviation = report.y_max_rel_deviation.max(relative_gap(y, ys[n]));
            }
            Err(_) => report.y_skipped += 1,
        }
    }
    report.passed &= report.y_max_rel_deviation <= tol;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    H5,
    H6,
}

impl Hypothesis {
    fn label(self) -> &'static str {
        match self {
            Hypothesis::H5 => "H5",
            Hypothesis::H6 => "H6",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum HypothesisCheck {
    Applicable {
        hypothesis: Hypothesis,
        threshold: Threshold,
    },
    Fails {
        hypothesis: Hypothesis,
        reason: String,
    },
}

impl HypothesisCheck {
    pub fn is_applicable(&self) -> bool {
        matches!(self, HypothesisCheck::Applicable { .. })
    }

    pub fn threshold(&self) -> Option<Threshold> {
        match self {
            HypothesisCheck::Applicable { threshold, .. } => Some(*threshold),
            HypothesisCheck::Fails { .. } => None,
        }
    }
}

fn grid_point(search_hi: f64, grid: usize, i: usize) -> f64 {
    search_hi * i as f64 / grid as f64
}

/// Reports whether `f_n` varies with the argument at position `arg`
/// (0 for `u_1`, 1 for `u_2`) somewhere on the grid.
fn f_depends_on(sys: &PlanarSystem, arg: usize, grid: usize, search_hi: f64) -> Option<String> {
    let coarse = grid.min(40);
    for n in 0..sys.sample_span {
        for i in 0..=coarse {
            let fixed = grid_point(search_hi, coarse, i);
            let value_at = |moving: f64| {
                if arg == 0 {
                    sys.f(n, moving, fixed)
                } else {
                    sys.f(n, fixed, moving)
                }
            };
            let base = value_at(0.0);
            for j in 1..=coarse {
                let moving = grid_point(search_hi, coarse, j);
                if value_at(moving) != base {
                    let name = if arg == 0 { "u_1" } else { "u_2" };
                    return Some(format!(
                        "f_{n} depends on {name} (other argument fixed at {fixed}, {name} = {moving})"
                    ));
                }
            }
        }
    }
    None
}

fn missing_role(
    sys: &PlanarSystem,
    hypothesis: Hypothesis,
    grid: usize,
    search_hi: f64,
) -> Result<HypothesisCheck> {
    if sys.h5.is_none() && sys.h6.is_none() {
        return Err(Error::MissingEnvelope);
    }
    // H5 needs an envelope in u_2 alone, H6 one in u_1 alone.
    let other = if hypothesis == Hypothesis::H5 { 0 } else { 1 };
    let reason = match f_depends_on(sys, other, grid, search_hi) {
        Some(dep) => format!("{dep}; no envelope of the required form is available"),
        None => "no envelope of the required form is available".to_string(),
    };
    Ok(HypothesisCheck::Fails { hypothesis, reason })
}

fn envelope_threshold(
    hypothesis: Hypothesis,
    env: impl Fn(f64) -> f64,
    search_hi: f64,
) -> Result<HypothesisCheck> {
    match solve_threshold(env, search_hi, DEFAULT_TOLERANCE) {
        Ok(threshold) => Ok(HypothesisCheck::Applicable {
            hypothesis,
            threshold,
        }),
        Err(Error::NotSublinear { u }) => Ok(HypothesisCheck::Fails {
            hypothesis,
            reason: format!("envelope is not below the diagonal near 0 (u = {u:e})"),
        }),
        Err(e) => Err(e),
    }
}

/// Grid check of `f_n(u_1,u_2) <= f̄(u_2)`, `g_n(u_1,u_2) <= ḡ(u_1)`,
/// monotonicity of `f̄`, then α from `f̄ ∘ ḡ`.
pub fn check_h5(sys: &PlanarSystem, grid: usize, search_hi: f64) -> Result<HypothesisCheck> {
    let Some(env) = &sys.h5 else {
        return missing_role(sys, Hypothesis::H5, grid, search_hi);
    };
    let fails = |reason: String| {
        Ok(HypothesisCheck::Fails {
            hypothesis: Hypothesis::H5,
            reason,
        })
    };
    for n in 0..sys.sample_span {
        for i in 0..=grid {
            let u1 = grid_point(search_hi, grid, i);
            let gb = (env.g_bar)(u1);
            for j in 0..=grid {
                let u2 = grid_point(search_hi, grid, j);
                let f = sys.f(n, u1, u2);
                let fb = (env.f_bar)(u2);
                if !(f <= fb) {
                    return fails(format!("f_{n}({u1}, {u2}) = {f} exceeds f̄({u2}) = {fb}"));
                }
                let g = sys.g(n, u1, u2);
                if !(g <= gb) {
                    return fails(format!("g_{n}({u1}, {u2}) = {g} exceeds ḡ({u1}) = {gb}"));
                }
            }
        }
    }
    let mut prev = (env.f_bar)(0.0);
    for i in 1..=MONOTONE_GRID {
        let u = grid_point(search_hi, MONOTONE_GRID, i);
        let v = (env.f_bar)(u);
        if v < prev {
            return fails(format!("f̄ decreases at u = {u}"));
        }
        prev = v;
    }
    let (fb, gb) = (env.f_bar.clone(), env.g_bar.clone());
    envelope_threshold(Hypothesis::H5, move |u| fb(gb(u)), search_hi)
}

/// Grid check of `f_n(u_1,u_2) <= f̄(u_1)`, then α from `f̄`.
pub fn check_h6(sys: &PlanarSystem, grid: usize, search_hi: f64) -> Result<HypothesisCheck> {
    let Some(fb) = &sys.h6 else {
        return missing_role(sys, Hypothesis::H6, grid, search_hi);
    };
    for n in 0..sys.sample_span {
        for i in 0..=grid {
            let u1 = grid_point(search_hi, grid, i);
            let bound = fb(u1);
            for j in 0..=grid {
                let u2 = grid_point(search_hi, grid, j);
                let f = sys.f(n, u1, u2);
                if !(f <= bound) {
                    return Ok(HypothesisCheck::Fails {
                        hypothesis: Hypothesis::H6,
                        reason: format!("f_{n}({u1}, {u2}) = {f} exceeds f̄({u1}) = {bound}"),
                    });
                }
            }
        }
    }
    let fb = fb.clone();
    envelope_threshold(Hypothesis::H6, move |u| fb(u), search_hi)
}

fn require(
    check: &HypothesisCheck,
    wanted: Hypothesis,
) -> Result<Threshold> {
    match check {
        HypothesisCheck::Applicable {
            hypothesis,
            threshold,
        } if *hypothesis == wanted => Ok(*threshold),
        _ => Err(Error::HypothesisNotEstablished(wanted.label())),
    }
}

/// `y_n` from `σ_n(x_n, x_{n+1})` where it is determined, else from the
/// orbit directly.
fn recovered_ys(sys: &PlanarSystem, orbit: &Orbit) -> Vec<f64> {
    let xs = orbit.xs();
    orbit
        .points
        .iter()
        .enumerate()
        .map(|(n, &(x, y))| match xs.get(n + 1) {
            Some(&next) if x > 0.0 && next > 0.0 => solve_sigma(sys, n, x, next).unwrap_or(y),
            _ => y,
        })
        .collect()
}

fn system_report(
    sys: &PlanarSystem,
    orbit: &Orbit,
    threshold: Threshold,
    stride: usize,
    h: impl Fn(f64) -> f64,
    tol: &Tolerances,
) -> ConvergenceReport {
    let xs = orbit.xs();
    let window = ThresholdWindow::symmetric(threshold, Interval::NON_NEGATIVE);
    let mut covered = vec![false; stride];
    let mut predictions = Vec::new();
    for (n0, &x) in xs.iter().enumerate() {
        if covered[n0 % stride] || !window.contains(x) {
            continue;
        }
        covered[n0 % stride] = true;
        let chain = check_inequality_chain(&xs, n0, stride, &h);
        let sub: Vec<f64> = xs[n0..].iter().step_by(stride).copied().collect();
        let verdict = verdict_for(&chain, verify_monotone_to_zero(&sub, tol.zero));
        predictions.push(Prediction::new(&xs, n0, stride, &window, chain, verdict));
    }

    // y_n is read off from (x_n, x_{n+1}): an x-class p controls the y-class
    // p - 1 (mod stride).
    let ys = recovered_ys(sys, orbit);
    let y_limits: Vec<ClassLimit> = predictions
        .iter()
        .filter_map(|p| {
            let start = p.n0.checked_sub(1).unwrap_or(p.n0 + stride - 1);
            let sub: Vec<f64> = ys.get(start..)?.iter().step_by(stride).copied().collect();
            if sub.is_empty() {
                return None;
            }
            Some(ClassLimit {
                residue_class: start % stride,
                start,
                stride,
                monotone: verify_monotone_to_zero(&sub, tol.zero),
                limit: classify_limit(&sub, &[0.0], tol.limit),
            })
        })
        .collect();

    let chain_verified = predictions.iter().all(|p| p.chain.holds());
    ConvergenceReport {
        equation: sys.name.clone(),
        bound: match stride {
            1 => "f̄".to_string(),
            _ => "f̄ ∘ ḡ".to_string(),
        },
        claim: DominanceClaim::Analytic,
        threshold,
        crossing_index: detect_crossing(&xs, &window, 0),
        stride,
        window,
        offset: 0.0,
        full_convergence_from: if stride == 1 {
            predictions.first().map(|p| p.n0)
        } else {
            None
        },
        predictions,
        chain_verified,
        limits: class_limits(&xs, 0, stride, &[0.0], tol),
        y_limits,
    }
}

/// Under H5, each parity class of `x_n` entering `[0, α)` decreases to 0;
/// the y-class read off from it follows.
pub fn apply_corollary_syst(
    sys: &PlanarSystem,
    orbit: &Orbit,
    check: &HypothesisCheck,
    tol: &Tolerances,
) -> Result<ConvergenceReport> {
    let threshold = require(check, Hypothesis::H5)?;
    let env = sys.h5.as_ref().ok_or(Error::MissingEnvelope)?;
    let (fb, gb) = (env.f_bar.clone(), env.g_bar.clone());
    Ok(system_report(sys, orbit, threshold, 2, move |u| fb(gb(u)), tol))
}

/// Under H6, the whole x-tail from the first term in `[0, α)` decreases to 0.
pub fn apply_corollary_syst0(
    sys: &PlanarSystem,
    orbit: &Orbit,
    check: &HypothesisCheck,
    tol: &Tolerances,
) -> Result<ConvergenceReport> {
    let threshold = require(check, Hypothesis::H6)?;
    let fb = sys.h6.clone().ok_or(Error::MissingEnvelope)?;
    Ok(system_report(sys, orbit, threshold, 1, move |u| fb(u), tol))
}
