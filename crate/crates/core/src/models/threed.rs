//! Three-stage system
//! `x' = exp(a_n - b x - c y - d z)`, `y' = p_n x + q z - r ln z`, `z' = s x`,
//! and its fold into the third-order Ricker equation
//! `x_n = x_{n-3}^{cr} exp(a_{n-1} + cr ln s - b x_{n-1} - (c p_{n-2} + d s) x_{n-2} - c q s x_{n-3})`.

use serde::{Deserialize, Serialize};

use crate::criteria::BoundingFunction;
use crate::descriptor::ModelDescriptor;
use crate::equation::{Domain, EquationSpec, Halt, Interval};
use crate::error::{Error, Result};
use crate::folding::FoldConsistency;
use crate::models::ricker::{make_generalized_ricker, RickerFamilySpec};
use crate::sequence::ParameterSequence;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeDParams {
    pub a: ParameterSequence,
    pub p: ParameterSequence,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
}

impl ThreeDParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.d >= 0.0) {
            return Err(Error::InvalidParameter("b and d must be non-negative".into()));
        }
        for (name, v) in [("c", self.c), ("q", self.q), ("r", self.r), ("s", self.s)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.a.sup().is_finite() && self.p.sup().is_finite() && self.p.inf().is_finite()) {
            return Err(Error::InvalidParameter("a_n and p_n must be bounded".into()));
        }
        Ok(())
    }

    /// Exponent `λ = c r` of the folded equation.
    pub fn lambda(&self) -> f64 {
        self.c * self.r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialOrbit {
    pub initial: [f64; 3],
    pub points: Vec<[f64; 3]>,
    pub halt: Option<Halt>,
}

impl SpatialOrbit {
    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p[0]).collect()
    }

    /// CSV with header `n,x,y,z`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x,y,z\n");
        for (n, [x, y, z]) in self.points.iter().enumerate() {
            out.push_str(&format!("{n},{x},{y},{z}\n"));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SpatialSystem {
    params: ThreeDParams,
}

impl SpatialSystem {
    pub fn new(params: ThreeDParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn params(&self) -> &ThreeDParams {
        &self.params
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        ModelDescriptor::Threed(self.params.clone())
    }

    /// One step from `(x_n, y_n, z_n)`.
    pub fn step(&self, n: usize, [x, y, z]: [f64; 3]) -> Result<[f64; 3]> {
        if !(z > 0.0) {
            return Err(Error::NonPositiveLog { index: n, value: z });
        }
        let p = &self.params;
        let e = ((p.a.value(n) - p.b * x) - p.c * y) - p.d * z;
        Ok([e.exp(), p.p.value(n) * x + p.q * z - p.r * z.ln(), p.s * x])
    }

    /// Stops with a [`Halt`] once `z` underflows to 0 or a value overflows.
    pub fn iterate(&self, initial: [f64; 3], steps: usize) -> Result<SpatialOrbit> {
        if !(initial[0] > 0.0 && initial[2] > 0.0) {
            return Err(Error::InvalidParameter(
                "x_0 and z_0 must be positive".into(),
            ));
        }
        let mut points = Vec::with_capacity(steps + 1);
        points.push(initial);
        let mut halt = None;
        for n in 0..steps {
            if !(points[n][2] > 0.0) {
                halt = Some(Halt {
                    index: n,
                    reason: "z reached 0".into(),
                });
                break;
            }
            let next = self.step(n, points[n])?;
            if next.iter().any(|v| !v.is_finite()) {
                halt = Some(Halt {
                    index: n + 1,
                    reason: "non-finite value".into(),
                });
                break;
            }
            points.push(next);
        }
        Ok(SpatialOrbit {
            initial,
            points,
            halt,
        })
    }

    /// The folded order-3 equation, valid from `n = 3` with `x_0, x_1, x_2`
    /// taken from the direct orbit.
    pub fn folded(&self) -> Result<EquationSpec> {
        let p = self.params.clone();
        let lambda = p.lambda();
        let log_s = p.s.ln();
        let cqs = p.c * p.q * p.s;
        Ok(EquationSpec::new(
            "threed fold",
            3,
            3,
            Domain::uniform(3, Interval::NON_NEGATIVE),
            move |n, u| {
                let mut e = p.a.value(n - 1) + lambda * log_s;
                e -= p.b * u[0];
                e -= (p.c * p.p.value(n - 2) + p.d * p.s) * u[1];
                e -= cqs * u[2];
                u[2].powf(lambda) * e.exp()
            },
        )?
        .with_descriptor(ModelDescriptor::ThreedFold(self.params.clone())))
    }

    /// `x_0, x_1, x_2` of the direct orbit.
    pub fn fold_initial(&self, initial: [f64; 3]) -> Result<[f64; 3]> {
        let o = self.iterate(initial, 2)?;
        if o.points.len() < 3 {
            return Err(Error::NonFinite { n: o.points.len() });
        }
        Ok([o.points[0][0], o.points[1][0], o.points[2][0]])
    }

    /// The folded equation as a generalized Ricker specification, with
    /// `a'_n = a_{n-1} + cr ln s`, `b_1 = b`, `b_{2,n} = c p_{n-2} + d s`,
    /// `b_3 = c q s`.
    pub fn as_ricker_spec(&self) -> Result<RickerFamilySpec> {
        let p = &self.params;
        let shift = p.lambda() * p.s.ln();
        let (c, ds) = (p.c, p.d * p.s);
        let a = p.a.shifted(1).map_monotone(|v| v + shift)?;
        let b2 = p.p.shifted(2).map_monotone(|v| c * v + ds)?;
        let spec = RickerFamilySpec::new(
            p.lambda(),
            3,
            a,
            vec![p.b.into(), b2, (p.c * p.q * p.s).into()],
        );
        spec.validate()?;
        Ok(spec)
    }

    /// Folded equation with its Ricker bound, when `cr > 1`.
    pub fn folded_with_bound(&self) -> Result<(EquationSpec, BoundingFunction)> {
        let (_, bound) = make_generalized_ricker(&self.as_ricker_spec()?)?;
        Ok((self.folded()?, bound))
    }

    pub fn check_fold_consistency(
        &self,
        initial: [f64; 3],
        steps: usize,
        tol: f64,
    ) -> Result<FoldConsistency> {
        let direct = self.iterate(initial, steps)?.xs();
        let folded = if steps < 3 {
            direct.clone()
        } else {
            self.folded()?
                .iterate(&self.fold_initial(initial)?, steps - 2)?
                .terms
        };
        Ok(FoldConsistency::compare(&direct, &folded, steps, tol))
    }
}

/// Direct system and its folded equation.
pub fn make_3d_example(params: ThreeDParams) -> Result<(SpatialSystem, EquationSpec)> {
    let sys = SpatialSystem::new(params)?;
    let eq = sys.folded()?;
    Ok((sys, eq))
}
