//! Sigmoid Beverton–Holt equation with delays,
//! `x_n = a_n (x_{n-k} - b)^p / (1 + c_n x_{n-l}^{q_n}) + b`,
//! which fixes `b`. Moving `b` to the origin gives
//! `y_n = a_n y_{n-k}^p / (1 + c_n (y_{n-l} + b)^{q_n})`, bounded by
//! `a |u|^p` with threshold `a^{-1/(p-1)}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::criteria::{BoundingFunction, DominanceClaim, Threshold, ThresholdWindow};
use crate::descriptor::ModelDescriptor;
use crate::equation::{Domain, EquationSpec, Interval};
use crate::error::{Error, Result};
use crate::sequence::ParameterSequence;

/// Relative tolerance for accepting a fixed value before translation.
pub const FIXED_POINT_TOL: f64 = 1e-9;

/// `num / den` in lowest terms. Admissible when `den` is odd, so that
/// negative bases have a real power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ExponentRepr", into = "ExponentRepr")]
pub struct RationalExponent {
    num: u32,
    den: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Integer(u32),
    Text(String),
}

impl TryFrom<ExponentRepr> for RationalExponent {
    type Error = Error;

    fn try_from(r: ExponentRepr) -> Result<Self> {
        match r {
            ExponentRepr::Integer(n) => Self::new(n, 1),
            ExponentRepr::Text(s) => s.parse(),
        }
    }
}

impl From<RationalExponent> for ExponentRepr {
    fn from(p: RationalExponent) -> Self {
        if p.den == 1 {
            ExponentRepr::Integer(p.num)
        } else {
            ExponentRepr::Text(p.to_string())
        }
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RationalExponent {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidParameter(format!(
                "exponent {num}/{den} must be positive"
            )));
        }
        let d = gcd(num, den);
        let p = Self {
            num: num / d,
            den: den / d,
        };
        if p.den.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "exponent {p} has an even denominator; negative bases have no real power"
            )));
        }
        Ok(p)
    }

    pub fn integer(n: u32) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn num(&self) -> u32 {
        self.num
    }

    pub fn den(&self) -> u32 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Real branch of `x^{num/den}`: `|x|^p` with sign `sign(x)^num`.
    pub fn pow(&self, x: f64) -> f64 {
        let mag = if self.den == 1 {
            x.abs().powi(self.num as i32)
        } else {
            x.abs().powf(self.value())
        };
        if x < 0.0 && self.num % 2 == 1 {
            -mag
        } else {
            mag
        }
    }
}

impl fmt::Display for RationalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl std::str::FromStr for RationalExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse exponent {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => Self::new(
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            ),
            None => Self::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmoidBHSpec {
    pub a: ParameterSequence,
    pub c: ParameterSequence,
    pub q: ParameterSequence,
    pub p: RationalExponent,
    pub b: f64,
    pub k: usize,
    pub l: usize,
}

impl SigmoidBHSpec {
    pub fn order(&self) -> usize {
        self.k.max(self.l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.l == 0 {
            return Err(Error::InvalidParameter("lags k and l must be positive".into()));
        }
        if !(self.a.inf() > 0.0 && self.a.sup().is_finite()) {
            return Err(Error::InvalidParameter("a_n must be positive and bounded".into()));
        }
        if !(self.c.inf() >= 0.0) {
            return Err(Error::InvalidParameter("c_n must be non-negative".into()));
        }
        if !(self.q.inf() > 0.0) {
            return Err(Error::InvalidParameter("q_n must be positive".into()));
        }
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "b must be finite and non-negative, got {}",
                self.b
            )));
        }
        Ok(())
    }
}

/// The equation in its original coordinates on `[0, ∞)^m`.
pub fn make_sigmoid_bh(spec: &SigmoidBHSpec) -> Result<EquationSpec> {
    spec.validate()?;
    let m = spec.order();
    let s = spec.clone();
    Ok(EquationSpec::new(
        format!("sigmoid-bh(p={}, b={}, k={}, l={})", spec.p, spec.b, spec.k, spec.l),
        m,
        spec.k,
        Domain::uniform(m, Interval::NON_NEGATIVE),
        move |n, u| {
            let num = s.a.value(n) * s.p.pow(u[s.k - 1] - s.b);
            num / (1.0 + s.c.value(n) * u[s.l - 1].powf(s.q.value(n))) + s.b
        },
    )?
    .with_descriptor(ModelDescriptor::SigmoidBh(spec.clone())))
}

/// The equation translated so `b` sits at the origin, with the bound
/// `a_sup |u|^p` on `[-b, ∞)`.
pub fn sigmoid_bh_translated(spec: &SigmoidBHSpec) -> Result<(EquationSpec, BoundingFunction)> {
    spec.validate()?;
    let p = spec.p;
    let a = spec.a.sup();
    let pv = p.value();
    if pv < 1.0 {
        // a |u|^p >= |u| for all |u| <= a^{1/(1-p)}.
        return Err(Error::NotSublinear {
            u: 0.5 * a.powf(1.0 / (1.0 - pv)).min(1.0),
        });
    }
    if pv == 1.0 && a >= 1.0 {
        return Err(Error::NotSublinear { u: 0.5 });
    }
    let m = spec.order();
    let s = spec.clone();
    let eq = EquationSpec::new(
        format!("sigmoid-bh(p={p}, b={}) about b", spec.b),
        m,
        spec.k,
        Domain::uniform(m, Interval::new(-spec.b, f64::INFINITY)),
        move |n, v| {
            let num = s.a.value(n) * s.p.pow(v[s.k - 1]);
            num / (1.0 + s.c.value(n) * (v[s.l - 1] + s.b).powf(s.q.value(n)))
        },
    )?
    .with_descriptor(ModelDescriptor::Translated {
        base: Box::new(ModelDescriptor::SigmoidBh(spec.clone())),
        shift: spec.b,
    });
    let threshold = if pv == 1.0 {
        Threshold::unbounded()
    } else {
        Threshold::crossing(a.powf(-1.0 / (pv - 1.0)))
    };
    let bound = BoundingFunction::with_threshold(
        format!("{a} |u|^{p}"),
        move |u: f64| a * p.pow(u).abs(),
        Interval::new(-spec.b, f64::INFINITY),
        spec.k,
        threshold,
        DominanceClaim::Analytic,
    )?
    .with_limit_candidates(vec![0.0]);
    Ok((eq, bound))
}

/// `(max{0, b - α}, b + α)` with `α = a^{-1/(p-1)}`.
pub fn sigmoid_bh_window(a_sup: f64, p: f64, b: f64) -> Result<ThresholdWindow> {
    if !(a_sup > 0.0) {
        return Err(Error::InvalidParameter(format!("a must be positive, got {a_sup}")));
    }
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("p must exceed 1, got {p}")));
    }
    let alpha = a_sup.powf(-1.0 / (p - 1.0));
    Ok(ThresholdWindow::open((b - alpha).max(0.0), b + alpha))
}

/// `F̃_n(v) = F_n(v + b) - b` on the translated domain. `b` must be fixed
/// by `F_n` over the first few steps.
pub fn translate_to_origin(eq: &EquationSpec, b: f64) -> Result<EquationSpec> {
    if b == 0.0 {
        return Ok(eq.clone());
    }
    let m = eq.order();
    let fixed = vec![b; m];
    for n in m..m + 8 {
        let residual = match eq.evaluate(n, &fixed) {
            Ok(x) => x - b,
            Err(_) => f64::NAN,
        };
        if !(residual.abs() <= FIXED_POINT_TOL * b.abs().max(1.0)) {
            return Err(Error::NotAFixedPoint { b, residual });
        }
    }
    let map = eq.map().clone();
    let mut out = EquationSpec::new(
        format!("{} about {b}", eq.name()),
        m,
        eq.dominant_lag(),
        eq.domain().shifted(-b),
        move |n, v| {
            let shifted: Vec<f64> = v.iter().map(|x| x + b).collect();
            map(n, &shifted) - b
        },
    )?;
    if let Some(d) = eq.descriptor() {
        out = out.with_descriptor(ModelDescriptor::Translated {
            base: Box::new(d.clone()),
            shift: b,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(a: f64, p: u32, b: f64, c: f64) -> SigmoidBHSpec {
        SigmoidBHSpec {
            a: a.into(),
            c: c.into(),
            q: 1.0.into(),
            p: RationalExponent::integer(p).unwrap(),
            b,
            k: 1,
            l: 1,
        }
    }

    #[test]
    fn exponent_forms() {
        assert!(RationalExponent::new(4, 3).is_ok());
        assert!(RationalExponent::new(3, 2).is_err());
        assert!(RationalExponent::new(6, 4).unwrap_err().to_string().contains("3/2"));
        assert_eq!(RationalExponent::new(6, 3).unwrap(), RationalExponent::integer(2).unwrap());
        let p: RationalExponent = "2/3".parse().unwrap();
        assert!((p.pow(-8.0) - 4.0).abs() < 1e-12);
        let p = RationalExponent::integer(3).unwrap();
        assert_eq!(p.pow(-2.0), -8.0);
        let json = serde_json::to_string(&RationalExponent::new(4, 3).unwrap()).unwrap();
        assert_eq!(json, "\"4/3\"");
        let back: RationalExponent = serde_json::from_str("3").unwrap();
        assert_eq!(back.value(), 3.0);
    }

    #[test]
    fn direct_arithmetic() {
        let eq = make_sigmoid_bh(&spec(2.0, 3, 1.0, 0.0)).unwrap();
        assert!((eq.evaluate(1, &[1.1]).unwrap() - 1.002).abs() < 1e-12);
        assert_eq!(eq.evaluate(1, &[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn translation_examples() {
        let eq = make_sigmoid_bh(&spec(2.0, 3, 1.0, 0.0)).unwrap();
        let t = translate_to_origin(&eq, 1.0).unwrap();
        assert_eq!(t.evaluate(1, &[0.0]).unwrap(), 0.0);
        assert!((t.evaluate(1, &[0.1]).unwrap() - 0.002).abs() < 1e-12);
        let same = translate_to_origin(&eq, 0.0).unwrap();
        assert_eq!(same.evaluate(3, &[0.7]).unwrap(), eq.evaluate(3, &[0.7]).unwrap());
        assert!(matches!(
            translate_to_origin(&eq, 0.5),
            Err(Error::NotAFixedPoint { .. })
        ));
    }

    #[test]
    fn reduces_to_beverton_holt_at_zero_shift() {
        let s = SigmoidBHSpec {
            q: 2.0.into(),
            ..spec(3.0, 2, 0.0, 0.5)
        };
        let eq = make_sigmoid_bh(&s).unwrap();
        for x in [0.1, 0.7, 2.5] {
            let bh = 3.0 * x * x / (1.0 + 0.5 * x * x);
            assert!((eq.evaluate(1, &[x]).unwrap() - bh).abs() < 1e-14);
        }
    }

    #[test]
    fn window_examples() {
        let w = sigmoid_bh_window(2.0, 3.0, 1.0).unwrap();
        assert!((w.lo - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert!((w.hi - (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
        let w = sigmoid_bh_window(1.0, 2.0, 0.0).unwrap();
        assert_eq!((w.lo, w.hi), (0.0, 1.0));
        let w = sigmoid_bh_window(4.0, 3.0, 0.1).unwrap();
        assert_eq!(w.lo, 0.0);
        assert!((w.hi - 0.6).abs() < 1e-15);
        assert!(sigmoid_bh_window(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn translated_threshold_matches_numeric_root() {
        let (_, bound) = sigmoid_bh_translated(&spec(2.0, 3, 1.0, 0.0)).unwrap();
        let numeric =
            crate::criteria::solve_threshold(|u| 2.0 * u.powi(3), 10.0, 1e-14).unwrap();
        assert!((bound.alpha() - numeric.alpha).abs() < 1e-12);
        bound.validate(10_000).unwrap();
    }

    #[test]
    fn linear_and_sublinear_exponents() {
        assert!(matches!(
            sigmoid_bh_translated(&spec(2.0, 1, 1.0, 0.0)),
            Err(Error::NotSublinear { .. })
        ));
        let (_, bound) = sigmoid_bh_translated(&spec(0.5, 1, 1.0, 0.0)).unwrap();
        assert!(bound.threshold().is_unbounded());
    }
}
