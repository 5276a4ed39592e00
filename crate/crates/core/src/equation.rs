//! Higher-order non-autonomous recurrences `x_n = F_n(x_{n-1}, ..., x_{n-m})`.
//!
//! Histories are passed most recent first: `history[0] = x_{n-1}`,
//! `history[m-1] = x_{n-m}`. Trajectories are indexed from 0 and the `m`
//! initial values occupy indices `0..m`, so the first computed term is `x_m`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::descriptor::ModelDescriptor;
use crate::error::{Error, Result};

pub type StepMap = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;

/// Closed interval, possibly unbounded on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const NON_NEGATIVE: Interval = Interval::new(0.0, f64::INFINITY);
    pub const REAL: Interval = Interval::new(f64::NEG_INFINITY, f64::INFINITY);

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self::new(self.lo + by, self.hi + by)
    }
}

/// Product of per-coordinate intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    coords: Vec<Interval>,
}

impl Domain {
    pub fn uniform(order: usize, interval: Interval) -> Self {
        Self {
            coords: vec![interval; order],
        }
    }

    pub fn from_intervals(coords: Vec<Interval>) -> Self {
        Self { coords }
    }

    pub fn coordinate(&self, i: usize) -> Interval {
        self.coords[i]
    }

    /// Projection onto the `k`-th axis (1-based, matching the lag).
    pub fn projection(&self, k: usize) -> Interval {
        self.coords[k - 1]
    }

    /// The interval every term of a trajectory must lie in. Terms cycle
    /// through every coordinate slot, so this is the intersection.
    pub fn term_interval(&self) -> Interval {
        self.coords.iter().fold(Interval::REAL, |acc, c| {
            Interval::new(acc.lo.max(c.lo), acc.hi.min(c.hi))
        })
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c.shifted(by)).collect(),
        }
    }

    fn first_violation(&self, history: &[f64]) -> Option<(usize, f64)> {
        history
            .iter()
            .zip(&self.coords)
            .position(|(&x, c)| !c.contains(x))
            .map(|i| (i + 1, history[i]))
    }
}

#[derive(Clone)]
pub struct EquationSpec {
    name: String,
    order: usize,
    dominant_lag: usize,
    domain: Domain,
    map: StepMap,
    descriptor: Option<ModelDescriptor>,
}

impl fmt::Debug for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EquationSpec")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("dominant_lag", &self.dominant_lag)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl EquationSpec {
    pub fn new(
        name: impl Into<String>,
        order: usize,
        dominant_lag: usize,
        domain: Domain,
        map: impl Fn(usize, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::from_shared(name, order, dominant_lag, domain, Arc::new(map))
    }

    pub fn from_shared(
        name: impl Into<String>,
        order: usize,
        dominant_lag: usize,
        domain: Domain,
        map: StepMap,
    ) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("order must be positive".into()));
        }
        if !(1..=order).contains(&dominant_lag) {
            return Err(Error::InvalidParameter(format!(
                "dominant lag {dominant_lag} outside 1..={order}"
            )));
        }
        if domain.coords.len() != order {
            return Err(Error::InvalidParameter(format!(
                "domain has {} coordinates, order is {order}",
                domain.coords.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            order,
            dominant_lag,
            domain,
            map,
            descriptor: None,
        })
    }

    pub fn with_descriptor(mut self, descriptor: ModelDescriptor) -> Self {
        self.descriptor = Some(descriptor);
        self
    }

    /// Same map, different lag for the bounding function.
    pub fn with_dominant_lag(mut self, k: usize) -> Result<Self> {
        if !(1..=self.order).contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "dominant lag {k} outside 1..={}",
                self.order
            )));
        }
        self.dominant_lag = k;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dominant_lag(&self) -> usize {
        self.dominant_lag
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn descriptor(&self) -> Option<&ModelDescriptor> {
        self.descriptor.as_ref()
    }

    pub(crate) fn map(&self) -> &StepMap {
        &self.map
    }

    /// `F_n(history)` with `history[0] = x_{n-1}`.
    pub fn evaluate(&self, n: usize, history: &[f64]) -> Result<f64> {
        if history.len() != self.order {
            return Err(Error::HistoryLength {
                expected: self.order,
                got: history.len(),
            });
        }
        if let Some((coordinate, value)) = self.domain.first_violation(history) {
            return Err(Error::DomainViolation {
                n,
                coordinate,
                value,
            });
        }
        let x = (self.map)(n, history);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::NonFinite { n })
        }
    }

    /// Forward orbit of `steps` new terms after the `m` initial values.
    ///
    /// A non-finite term stops the iteration and is recorded in
    /// [`Trajectory::halt`]; a term outside the domain is an error.
    pub fn iterate(&self, initial: &[f64], steps: usize) -> Result<Trajectory> {
        let m = self.order;
        if initial.len() != m {
            return Err(Error::HistoryLength {
                expected: m,
                got: initial.len(),
            });
        }
        let term_domain = self.domain.term_interval();
        if let Some(index) = initial.iter().position(|&x| !term_domain.contains(x)) {
            return Err(Error::DomainViolation {
                n: index,
                coordinate: m - index,
                value: initial[index],
            });
        }
        let mut terms = Vec::with_capacity(m + steps);
        terms.extend_from_slice(initial);
        let mut history = vec![0.0; m];
        let mut halt = None;
        for n in m..m + steps {
            for (i, h) in history.iter_mut().enumerate() {
                *h = terms[n - 1 - i];
            }
            match self.evaluate(n, &history) {
                Ok(x) if term_domain.contains(x) => terms.push(x),
                Ok(x) => return Err(Error::DomainExit { index: n, value: x }),
                Err(Error::NonFinite { n }) => {
                    halt = Some(Halt {
                        index: n,
                        reason: "non-finite value".into(),
                    });
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Trajectory {
            equation: self.name.clone(),
            descriptor: self.descriptor.clone(),
            order: m,
            terms,
            halt,
        })
    }
}

/// Why an iteration stopped early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Halt {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub equation: String,
    pub descriptor: Option<ModelDescriptor>,
    pub order: usize,
    pub terms: Vec<f64>,
    pub halt: Option<Halt>,
}

impl Trajectory {
    pub fn initial(&self) -> &[f64] {
        &self.terms[..self.order.min(self.terms.len())]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn subsequence(&self, start: usize, stride: usize) -> Result<Vec<f64>> {
        extract_subsequence(&self.terms, start, stride)
    }

    /// CSV with header `n,x`, one row per term.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,x\n");
        for (n, x) in self.terms.iter().enumerate() {
            out.push_str(&format!("{n},{x}\n"));
        }
        out
    }

    pub fn record(&self) -> TrajectoryRecord {
        TrajectoryRecord {
            equation: self
                .descriptor
                .clone()
                .unwrap_or_else(|| ModelDescriptor::Opaque {
                    name: self.equation.clone(),
                }),
            initial: self.initial().to_vec(),
            terms: self.terms.clone(),
        }
    }
}

/// JSON export form of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub equation: ModelDescriptor,
    pub initial: Vec<f64>,
    pub terms: Vec<f64>,
}

/// Terms at `start, start + stride, start + 2 stride, ...` within range.
pub fn extract_subsequence(terms: &[f64], start: usize, stride: usize) -> Result<Vec<f64>> {
    if stride == 0 {
        return Err(Error::ZeroStride);
    }
    if start >= terms.len() {
        return Err(Error::IndexOutOfRange {
            index: start,
            len: terms.len(),
        });
    }
    Ok(terms[start..].iter().step_by(stride).copied().collect())
}
