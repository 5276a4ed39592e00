//! Generalized Ricker equations
//! `x_n = x_{n-k}^λ exp(a_n - b_{1,n} x_{n-1} - ... - b_{m,n} x_{n-m})`
//! with the bound `g(u) = u^λ exp(a - b u)`, `a = sup a_n`, `b = inf b_{k,n}`.
//!
//! The exponent is accumulated as `((a_n - b_1 u_1) - b_2 u_2) - ...` and
//! the bound as `a - b u`, so the floating-point value of `F_n` never exceeds
//! `g(u_k)`.

use serde::{Deserialize, Serialize};

use crate::criteria::{bisect, BoundingFunction, DominanceClaim};
use crate::descriptor::ModelDescriptor;
use crate::equation::{Domain, EquationSpec, Interval};
use crate::error::{Error, Result};
use crate::sequence::ParameterSequence;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RickerFamilySpec {
    pub lambda: f64,
    pub k: usize,
    pub m: usize,
    pub a: ParameterSequence,
    /// `b[i]` multiplies `x_{n-1-i}`.
    pub b: Vec<ParameterSequence>,
    /// When false, `inf b_{k,n} = 0` is accepted and the bound loses its
    /// decay factor.
    #[serde(default = "default_true")]
    pub require_positive_decay: bool,
}

impl RickerFamilySpec {
    pub fn new(
        lambda: f64,
        k: usize,
        a: impl Into<ParameterSequence>,
        b: Vec<ParameterSequence>,
    ) -> Self {
        Self {
            lambda,
            k,
            m: b.len(),
            a: a.into(),
            b,
            require_positive_decay: true,
        }
    }

    pub fn a_sup(&self) -> f64 {
        self.a.sup()
    }

    pub fn b_inf(&self) -> f64 {
        self.b[self.k - 1].inf()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must exceed 1, got {}",
                self.lambda
            )));
        }
        if self.m == 0 || self.k == 0 || self.k > self.m {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= k <= m, got k = {}, m = {}",
                self.k, self.m
            )));
        }
        if self.b.len() != self.m {
            return Err(Error::InvalidParameter(format!(
                "expected {} decay sequences, got {}",
                self.m,
                self.b.len()
            )));
        }
        if !self.a_sup().is_finite() {
            return Err(Error::InvalidParameter("sup a_n must be finite".into()));
        }
        if let Some(i) = self.b.iter().position(|b| !(b.inf() >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "b_{} must be non-negative",
                i + 1
            )));
        }
        if self.require_positive_decay && !(self.b_inf() > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inf b_{} must be positive",
                self.k
            )));
        }
        Ok(())
    }

    pub fn search_hi(&self) -> f64 {
        let b = self.b_inf();
        if b > 0.0 {
            (4.0 * (self.lambda - 1.0) / b).max(10.0)
        } else {
            10.0
        }
    }
}

/// Equation on `[0, ∞)^m` and its analytic bound.
pub fn make_generalized_ricker(spec: &RickerFamilySpec) -> Result<(EquationSpec, BoundingFunction)> {
    spec.validate()?;
    let (lambda, k, m) = (spec.lambda, spec.k, spec.m);
    let a = spec.a.clone();
    let b = spec.b.clone();
    let eq = EquationSpec::new(
        format!("ricker(lambda={lambda}, k={k}, m={m})"),
        m,
        k,
        Domain::uniform(m, Interval::NON_NEGATIVE),
        move |n, u| {
            let mut e = a.value(n);
            for (bi, ui) in b.iter().zip(u) {
                e -= bi.value(n) * ui;
            }
            u[k - 1].powf(lambda) * e.exp()
        },
    )?
    .with_descriptor(ModelDescriptor::Ricker(spec.clone()));
    Ok((eq, ricker_bound(spec)?))
}

/// `u^λ exp(a_sup - b_inf u)` with its fixed points as limit candidates.
pub fn ricker_bound(spec: &RickerFamilySpec) -> Result<BoundingFunction> {
    let (lambda, a, b) = (spec.lambda, spec.a_sup(), spec.b_inf());
    let bound = BoundingFunction::new(
        format!("u^{lambda} exp({a} - {b} u)"),
        move |u: f64| u.powf(lambda) * (a - b * u).exp(),
        Interval::NON_NEGATIVE,
        spec.k,
        spec.search_hi(),
        DominanceClaim::Analytic,
    )?;
    let candidates = if b > 0.0 {
        ricker_fixed_points(lambda, a, b)?.roots()
    } else {
        Vec::new()
    };
    Ok(bound.with_limit_candidates(candidates))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LamCondition {
    pub holds: bool,
    pub rhs: f64,
    /// `a` equals the right-hand side to rounding: the roots coincide.
    pub equality: bool,
}

fn check_ricker_params(lambda: f64, b: f64) -> Result<()> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must exceed 1, got {lambda}")));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidParameter(format!("b must be positive, got {b}")));
    }
    Ok(())
}

fn equality_tolerance(rhs: f64) -> f64 {
    1e-12 * rhs.abs().max(1.0)
}

/// `a >= (λ-1)(1 + ln b - ln(λ-1))`: `g` reaches the diagonal.
pub fn check_lam_condition(lambda: f64, a: f64, b: f64) -> Result<LamCondition> {
    check_ricker_params(lambda, b)?;
    let rhs = (lambda - 1.0) * (1.0 + b.ln() - (lambda - 1.0).ln());
    let equality = (a - rhs).abs() <= equality_tolerance(rhs);
    Ok(LamCondition {
        holds: a >= rhs || equality,
        rhs,
        equality,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FixedPoints {
    None,
    Tangent { u: f64 },
    Pair { u_star: f64, u_bar: f64 },
}

impl FixedPoints {
    pub fn roots(&self) -> Vec<f64> {
        match *self {
            FixedPoints::None => Vec::new(),
            FixedPoints::Tangent { u } => vec![u],
            FixedPoints::Pair { u_star, u_bar } => vec![u_star, u_bar],
        }
    }
}

/// Positive roots of `u^λ e^{a - b u} = u`, found on
/// `φ(u) = (λ-1) ln u - b u + a`, which is concave with its peak at
/// `(λ-1)/b`.
pub fn ricker_fixed_points(lambda: f64, a: f64, b: f64) -> Result<FixedPoints> {
    let cond = check_lam_condition(lambda, a, b)?;
    let peak = (lambda - 1.0) / b;
    if cond.equality {
        return Ok(FixedPoints::Tangent { u: peak });
    }
    if !cond.holds {
        return Ok(FixedPoints::None);
    }
    let phi = move |u: f64| (lambda - 1.0) * u.ln() - b * u + a;

    // The small root can sit far below 1, so bisect it in ln u.
    let psi = move |t: f64| phi(t.exp());
    let mut lo = peak.ln();
    while psi(lo) >= 0.0 {
        lo -= 1.0 + lo.abs();
    }
    let u_star = bisect(psi, lo, peak.ln(), 0.0).exp();

    let mut hi = peak;
    while phi(hi) >= 0.0 {
        hi *= 2.0;
    }
    let u_bar = bisect(|u| -phi(u), peak, hi, 0.0);
    Ok(FixedPoints::Pair { u_star, u_bar })
}

/// The third-order example with lag `k` and the bounds drawn for it.
#[derive(Debug, Clone)]
pub struct Sp3Model {
    pub equation: EquationSpec,
    /// Reference bound with the tightest decay; only heuristic for `k = 1`.
    pub figure_bound: BoundingFunction,
    /// Bound derived from the closed form.
    pub rigorous_bound: BoundingFunction,
}

pub fn sp3_spec(k: usize) -> Result<RickerFamilySpec> {
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!("sp3 lag must be 1, 2 or 3, got {k}")));
    }
    let mut spec = RickerFamilySpec::new(
        1.5,
        k,
        1.5,
        vec![0.0.into(), 0.7.into(), 0.9.into()],
    );
    spec.require_positive_decay = k != 1;
    Ok(spec)
}

/// `x_n = x_{n-k}^{3/2} exp(1.5 - 0.7 x_{n-2} - 0.9 x_{n-3})`.
pub fn make_sp3(k: usize) -> Result<Sp3Model> {
    let spec = sp3_spec(k)?;
    let (eq, rigorous) = make_generalized_ricker(&spec)?;
    let equation = EquationSpec::from_shared(
        format!("sp3(k={k})"),
        3,
        k,
        eq.domain().clone(),
        eq.map().clone(),
    )?
    .with_descriptor(ModelDescriptor::Sp3 { k });
    let figure_bound = if k == 1 {
        BoundingFunction::new(
            "u^1.5 exp(1.5 - 1.6 u)",
            |u: f64| u.powf(1.5) * (1.5 - 1.6 * u).exp(),
            Interval::NON_NEGATIVE,
            1,
            10.0,
            DominanceClaim::Informal,
        )?
    } else {
        rigorous.clone()
    };
    Ok(Sp3Model {
        equation,
        figure_bound,
        rigorous_bound: rigorous,
    })
}
