//! Two-stage population systems on the quadrant.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::criteria::{
    solve_threshold, BoundingFunction, DominanceClaim, Threshold, DEFAULT_TOLERANCE,
};
use crate::descriptor::ModelDescriptor;
use crate::equation::{Domain, EquationSpec, Interval};
use crate::error::{Error, Result};
use crate::folding::{PlanarSystem, SigmaForm};
use crate::models::ricker::ricker_fixed_points;
use crate::sequence::ParameterSequence;

/// Adults `x' = s_n y`, juveniles `y' = x^λ exp(r_n - x - t_n y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdultJuvenileParams {
    pub s: ParameterSequence,
    pub t: ParameterSequence,
    pub r: ParameterSequence,
    pub lambda: f64,
}

impl AdultJuvenileParams {
    pub fn constant(s: f64, t: f64, r: f64, lambda: f64) -> Self {
        Self {
            s: s.into(),
            t: t.into(),
            r: r.into(),
            lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (s_lo, s_hi) = self.s.bounds();
        if !(s_lo > 0.0 && s_hi <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "s_n must lie in (0, 1], got range [{s_lo}, {s_hi}]"
            )));
        }
        if !(self.t.inf() > 0.0) {
            return Err(Error::InvalidParameter("t_n must be positive".into()));
        }
        if !self.r.sup().is_finite() || !self.r.inf().is_finite() {
            return Err(Error::InvalidParameter("r_n must be bounded".into()));
        }
        if !(self.lambda > 1.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must exceed 1, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    fn sample_span(&self) -> usize {
        [&self.s, &self.t, &self.r]
            .iter()
            .map(|q| q.sample_span())
            .max()
            .unwrap_or(1)
    }
}

pub fn make_adult_juvenile(params: &AdultJuvenileParams) -> Result<PlanarSystem> {
    params.validate()?;
    let lambda = params.lambda;
    let (s, t, r) = (params.s.clone(), params.t.clone(), params.r.clone());
    let s_rho = params.s.clone();
    let r_sup = params.r.sup();
    let sys = PlanarSystem::new(
        "adult-juvenile",
        move |n, _x, y| s.value(n) * y,
        move |n, x, y| x.powf(lambda) * ((r.value(n) - x) - t.value(n) * y).exp(),
    )
    .with_sigma(SigmaForm::Multiplicative {
        rho: Arc::new(move |n, _u| s_rho.value(n)),
        phi_inv: Arc::new(|_, w| w),
    })
    .with_h5(|u| u, move |u: f64| u.powf(lambda) * (r_sup - u).exp())
    .with_sample_span(params.sample_span())
    .with_descriptor(ModelDescriptor::AdultJuvenile(params.clone()))
    .with_folded_descriptor(ModelDescriptor::AdultJuvenileFold(params.clone()));
    sys.check_origin()?;
    Ok(sys)
}

/// The fold in closed form,
/// `x_n = x_{n-2}^λ exp(r_{n-2} + ln s_{n-1} - (t_{n-2}/s_{n-2}) x_{n-1} - x_{n-2})`,
/// with the Ricker bound `u^λ exp(sup(r + ln s) - u)`.
pub fn make_adult_juvenile_fold(
    params: &AdultJuvenileParams,
) -> Result<(EquationSpec, BoundingFunction)> {
    params.validate()?;
    let lambda = params.lambda;
    let (s, t, r) = (params.s.clone(), params.t.clone(), params.r.clone());
    let eq = EquationSpec::new(
        "adult-juvenile fold",
        2,
        2,
        Domain::uniform(2, Interval::NON_NEGATIVE),
        move |n, u| {
            let a = r.value(n - 2) + s.value(n - 1).ln();
            let b1 = t.value(n - 2) / s.value(n - 2);
            u[1].powf(lambda) * ((a - b1 * u[0]) - u[1]).exp()
        },
    )?
    .with_descriptor(ModelDescriptor::AdultJuvenileFold(params.clone()));
    let a_sup = params.r.sup() + params.s.sup().ln();
    let bound = BoundingFunction::new(
        format!("u^{lambda} exp({a_sup} - u)"),
        move |u: f64| u.powf(lambda) * (a_sup - u).exp(),
        Interval::NON_NEGATIVE,
        2,
        (4.0 * (lambda - 1.0)).max(10.0),
        DominanceClaim::Analytic,
    )?
    .with_limit_candidates(ricker_fixed_points(lambda, a_sup, 1.0)?.roots());
    Ok((eq, bound))
}

/// Competition between two stages,
/// `x' = r1 x^δ1 / (a1 + x^δ1 + b1 y^δ3)`, `y' = r2 y^δ2 / (a2 + y^δ2 + b2 x^δ4)`.
/// In the swapped variant the roles of `x` and `y` on the right are exchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetitionParams {
    pub r1: ParameterSequence,
    pub a1: ParameterSequence,
    pub b1: ParameterSequence,
    pub r2: ParameterSequence,
    pub a2: ParameterSequence,
    pub b2: ParameterSequence,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
}

impl CompetitionParams {
    #[allow(clippy::too_many_arguments)]
    pub fn constant(
        r1: f64,
        a1: f64,
        b1: f64,
        r2: f64,
        a2: f64,
        b2: f64,
        deltas: [f64; 4],
    ) -> Self {
        Self {
            r1: r1.into(),
            a1: a1.into(),
            b1: b1.into(),
            r2: r2.into(),
            a2: a2.into(),
            b2: b2.into(),
            delta1: deltas[0],
            delta2: deltas[1],
            delta3: deltas[2],
            delta4: deltas[3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, q) in [("b1", &self.b1), ("b2", &self.b2)] {
            if !(q.inf() >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative")));
            }
        }
        for (name, q) in [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("r1", &self.r1),
            ("r2", &self.r2),
        ] {
            if !(q.inf() > 0.0 && q.sup().is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and bounded"
                )));
            }
        }
        if !(self.delta3 > 0.0 && self.delta4 > 0.0) {
            return Err(Error::InvalidParameter("delta3 and delta4 must be positive".into()));
        }
        if !(self.delta1 > 1.0 && self.delta2 > 1.0) {
            return Err(Error::InvalidParameter("delta1 and delta2 must exceed 1".into()));
        }
        Ok(())
    }

    fn sample_span(&self) -> usize {
        [&self.r1, &self.a1, &self.b1, &self.r2, &self.a2, &self.b2]
            .iter()
            .map(|q| q.sample_span())
            .max()
            .unwrap_or(1)
    }
}

/// `r / (1 + (a + extra) / z^δ)`, which equals `r z^δ / (a + z^δ + extra)`
/// and is monotone in each argument under rounding. Zero at `z = 0`.
fn saturating(r: f64, a: f64, extra: f64, z: f64, delta: f64) -> f64 {
    let p = z.powf(delta);
    if p == 0.0 {
        0.0
    } else {
        r / (1.0 + (a + extra) / p)
    }
}

/// `v >= 0` with `r / (1 + (a + b v^d3) / p) = w` for fixed `p = u^δ1 > 0`.
fn invert_competitor(r: f64, a: f64, b: f64, d3: f64, p: f64, w: f64) -> Option<f64> {
    if !(w > 0.0 && w < r) {
        return None;
    }
    let inner = (p * (r / w - 1.0) - a) / b;
    let slack = 1e-12 * (a / b).max(1.0);
    if inner >= 0.0 {
        Some(inner.powf(1.0 / d3))
    } else if inner > -slack {
        Some(0.0)
    } else {
        None
    }
}

pub fn make_competition(params: &CompetitionParams, swapped: bool) -> Result<PlanarSystem> {
    params.validate()?;
    let p = params.clone();
    let (d1, d2, d3, d4) = (p.delta1, p.delta2, p.delta3, p.delta4);
    let r1_sup = p.r1.sup();
    let a1_inf = p.a1.inf();
    let r2_sup = p.r2.sup();
    let a2_inf = p.a2.inf();
    let b1_vanishes = p.b1.sup() == 0.0;

    let (pf, pg, ps) = (p.clone(), p.clone(), p.clone());
    let sys = if !swapped {
        let sys = PlanarSystem::new(
            "competition",
            move |n, x, y| saturating(pf.r1.value(n), pf.a1.value(n), pf.b1.value(n) * y.powf(d3), x, d1),
            move |n, x, y| saturating(pg.r2.value(n), pg.a2.value(n), pg.b2.value(n) * x.powf(d4), y, d2),
        )
        .with_h6(move |u| saturating(r1_sup, a1_inf, 0.0, u, d1))
        .with_descriptor(ModelDescriptor::Competition(params.clone()));
        if b1_vanishes {
            sys
        } else {
            sys.with_sigma(SigmaForm::Custom(Arc::new(move |n, u, w| {
                if w == 0.0 {
                    return (u == 0.0).then_some(0.0);
                }
                let b = ps.b1.value(n);
                if u == 0.0 || b == 0.0 {
                    return None;
                }
                invert_competitor(ps.r1.value(n), ps.a1.value(n), b, d3, u.powf(d1), w)
            })))
        }
    } else {
        PlanarSystem::new(
            "competition-swapped",
            move |n, x, y| saturating(pf.r1.value(n), pf.a1.value(n), pf.b1.value(n) * x.powf(d3), y, d1),
            move |n, x, y| saturating(pg.r2.value(n), pg.a2.value(n), pg.b2.value(n) * y.powf(d4), x, d2),
        )
        .with_h5(
            move |v| saturating(r1_sup, a1_inf, 0.0, v, d1),
            move |u| saturating(r2_sup, a2_inf, 0.0, u, d2),
        )
        .with_sigma(SigmaForm::Custom(Arc::new(move |n, u, w| {
            if w == 0.0 {
                return Some(0.0);
            }
            let r = ps.r1.value(n);
            if !(w < r) {
                return None;
            }
            let a = ps.a1.value(n) + ps.b1.value(n) * u.powf(d3);
            Some((a / (r / w - 1.0)).powf(1.0 / d1))
        })))
        .with_descriptor(ModelDescriptor::CompetitionSwapped(params.clone()))
    };
    let sys = sys.with_sample_span(params.sample_span());
    sys.check_origin()?;
    Ok(sys)
}

/// Threshold of `f̄(u) = r u^δ / (a + u^δ)`: the smallest positive root of
/// `u^δ - r u^{δ-1} + a`, or +∞ when the polynomial stays positive.
pub fn competition_threshold(r1: f64, a1: f64, delta1: f64) -> Result<Threshold> {
    if !(r1 > 0.0 && a1 > 0.0 && delta1 > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need r1 > 0, a1 > 0, delta1 > 1; got ({r1}, {a1}, {delta1})"
        )));
    }
    if delta1 == 2.0 {
        let disc = r1 * r1 - 4.0 * a1;
        return Ok(if disc < 0.0 {
            Threshold::unbounded()
        } else if disc == 0.0 {
            Threshold::tangent(r1 / 2.0)
        } else {
            Threshold::crossing((r1 - disc.sqrt()) / 2.0)
        });
    }
    let poly = move |u: f64| u.powf(delta1) - r1 * u.powf(delta1 - 1.0) + a1;
    let peak = r1 * (delta1 - 1.0) / delta1;
    let min = poly(peak);
    if min > 1e-12 * a1.max(1.0) {
        return Ok(Threshold::unbounded());
    }
    if min >= -1e-12 * a1.max(1.0) {
        return Ok(Threshold::tangent(peak));
    }
    let f_bar = move |u: f64| saturating(r1, a1, 0.0, u, delta1);
    solve_threshold(f_bar, 2.0 * peak.max(1.0), DEFAULT_TOLERANCE)
}
