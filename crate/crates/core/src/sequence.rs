//! Bounded parameter sequences driving the non-autonomous maps.
//!
//! A sequence is stored in one of three finite representations. The declared
//! infimum and supremum are checked against every stored value when the
//! sequence is built, so every value it can emit lies inside them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceKind {
    Constant(f64),
    /// `values[n % len]`.
    Periodic(Vec<f64>),
    /// `values[n]` inside the table, `fallback` past its end.
    Tabulated { values: Vec<f64>, fallback: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SequenceRepr", into = "SequenceRepr")]
pub struct ParameterSequence {
    kind: SequenceKind,
    declared_inf: f64,
    declared_sup: f64,
}

impl ParameterSequence {
    pub fn constant(value: f64) -> Self {
        Self {
            kind: SequenceKind::Constant(value),
            declared_inf: value,
            declared_sup: value,
        }
    }

    pub fn periodic(values: Vec<f64>, declared_inf: f64, declared_sup: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        let seq = Self {
            kind: SequenceKind::Periodic(values),
            declared_inf,
            declared_sup,
        };
        seq.check_declared()?;
        Ok(seq)
    }

    /// Periodic sequence whose declared bounds are the exact min/max of `values`.
    pub fn periodic_exact(values: Vec<f64>) -> Result<Self> {
        let (lo, hi) = min_max(&values).ok_or(Error::EmptySequence)?;
        Self::periodic(values, lo, hi)
    }

    pub fn tabulated(
        values: Vec<f64>,
        fallback: f64,
        declared_inf: f64,
        declared_sup: f64,
    ) -> Result<Self> {
        let seq = Self {
            kind: SequenceKind::Tabulated { values, fallback },
            declared_inf,
            declared_sup,
        };
        seq.check_declared()?;
        Ok(seq)
    }

    fn check_declared(&self) -> Result<()> {
        if !(self.declared_inf <= self.declared_sup) {
            return Err(Error::InvalidParameter(format!(
                "declared bounds [{}, {}] are empty",
                self.declared_inf, self.declared_sup
            )));
        }
        for (index, value) in self.stored().enumerate() {
            if !value.is_finite() || value < self.declared_inf || value > self.declared_sup {
                return Err(Error::SequenceBound {
                    index,
                    value,
                    inf: self.declared_inf,
                    sup: self.declared_sup,
                });
            }
        }
        Ok(())
    }

    /// Stored values in index order; the tabulated fallback comes last.
    fn stored(&self) -> impl Iterator<Item = f64> + '_ {
        let (head, tail): (&[f64], Option<f64>) = match &self.kind {
            SequenceKind::Constant(v) => (&[], Some(*v)),
            SequenceKind::Periodic(values) => (values, None),
            SequenceKind::Tabulated { values, fallback } => (values, Some(*fallback)),
        };
        head.iter().copied().chain(tail)
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn value(&self, n: usize) -> f64 {
        match &self.kind {
            SequenceKind::Constant(v) => *v,
            SequenceKind::Periodic(values) => values[n % values.len()],
            SequenceKind::Tabulated { values, fallback } => {
                values.get(n).copied().unwrap_or(*fallback)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, SequenceKind::Constant(_))
    }

    pub fn declared(&self) -> (f64, f64) {
        (self.declared_inf, self.declared_sup)
    }

    /// Infimum and supremum of the sequence. Finite representations are
    /// tightened to the exact min/max of their stored values.
    pub fn bounds(&self) -> (f64, f64) {
        let (lo, hi) = min_max_iter(self.stored()).expect("non-empty by construction");
        (lo.max(self.declared_inf), hi.min(self.declared_sup))
    }

    pub fn inf(&self) -> f64 {
        self.bounds().0
    }

    pub fn sup(&self) -> f64 {
        self.bounds().1
    }

    /// Number of leading indices that cover every distinct value: one for a
    /// constant, the period for a periodic sequence, the table length plus
    /// one fallback index for a tabulated sequence.
    pub fn sample_span(&self) -> usize {
        match &self.kind {
            SequenceKind::Constant(_) => 1,
            SequenceKind::Periodic(values) => values.len(),
            SequenceKind::Tabulated { values, .. } => values.len() + 1,
        }
    }

    /// Sequence `n -> self(n - offset)`. Indices below `offset` repeat the
    /// first value.
    pub fn shifted(&self, offset: usize) -> Self {
        let kind = match &self.kind {
            SequenceKind::Constant(v) => SequenceKind::Constant(*v),
            SequenceKind::Periodic(values) => {
                let len = values.len();
                SequenceKind::Periodic(
                    (0..len)
                        .map(|n| values[(n + len - offset % len) % len])
                        .collect(),
                )
            }
            SequenceKind::Tabulated { values, fallback } => {
                let first = values.first().copied().unwrap_or(*fallback);
                let mut shifted = vec![first; offset];
                shifted.extend_from_slice(values);
                SequenceKind::Tabulated {
                    values: shifted,
                    fallback: *fallback,
                }
            }
        };
        Self {
            kind,
            declared_inf: self.declared_inf,
            declared_sup: self.declared_sup,
        }
    }

    /// Pointwise image under a non-decreasing map; the declared bounds are
    /// mapped the same way.
    pub fn map_monotone(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let kind = match &self.kind {
            SequenceKind::Constant(v) => SequenceKind::Constant(f(*v)),
            SequenceKind::Periodic(values) => {
                SequenceKind::Periodic(values.iter().map(|&v| f(v)).collect())
            }
            SequenceKind::Tabulated { values, fallback } => SequenceKind::Tabulated {
                values: values.iter().map(|&v| f(v)).collect(),
                fallback: f(*fallback),
            },
        };
        let seq = Self {
            kind,
            declared_inf: f(self.declared_inf),
            declared_sup: f(self.declared_sup),
        };
        seq.check_declared()?;
        Ok(seq)
    }
}

impl From<f64> for ParameterSequence {
    fn from(value: f64) -> Self {
        Self::constant(value)
    }
}

fn min_max(values: &[f64]) -> Option<(f64, f64)> {
    min_max_iter(values.iter().copied())
}

fn min_max_iter(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Wire form: a bare number is a constant sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum SequenceRepr {
    Constant(f64),
    Full(FullRepr),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FullRepr {
    Constant {
        value: f64,
    },
    Periodic {
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inf: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup: Option<f64>,
    },
    Tabulated {
        values: Vec<f64>,
        fallback: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inf: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup: Option<f64>,
    },
}

impl TryFrom<SequenceRepr> for ParameterSequence {
    type Error = Error;

    fn try_from(repr: SequenceRepr) -> Result<Self> {
        match repr {
            SequenceRepr::Constant(value) | SequenceRepr::Full(FullRepr::Constant { value }) => {
                Ok(Self::constant(value))
            }
            SequenceRepr::Full(FullRepr::Periodic { values, inf, sup }) => {
                let (lo, hi) = min_max(&values).ok_or(Error::EmptySequence)?;
                Self::periodic(values, inf.unwrap_or(lo), sup.unwrap_or(hi))
            }
            SequenceRepr::Full(FullRepr::Tabulated {
                values,
                fallback,
                inf,
                sup,
            }) => {
                let (lo, hi) = min_max_iter(values.iter().copied().chain([fallback]))
                    .expect("fallback present");
                Self::tabulated(values, fallback, inf.unwrap_or(lo), sup.unwrap_or(hi))
            }
        }
    }
}

impl From<ParameterSequence> for SequenceRepr {
    fn from(seq: ParameterSequence) -> Self {
        let (inf, sup) = (Some(seq.declared_inf), Some(seq.declared_sup));
        match seq.kind {
            SequenceKind::Constant(value) => SequenceRepr::Constant(value),
            SequenceKind::Periodic(values) => {
                SequenceRepr::Full(FullRepr::Periodic { values, inf, sup })
            }
            SequenceKind::Tabulated { values, fallback } => {
                SequenceRepr::Full(FullRepr::Tabulated {
                    values,
                    fallback,
                    inf,
                    sup,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_bounds() {
        assert_eq!(ParameterSequence::constant(1.5).bounds(), (1.5, 1.5));
    }

    #[test]
    fn periodic_tightens_to_stored_values() {
        let seq = ParameterSequence::periodic(vec![0.5, 0.9, 0.7], 0.0, 1.0).unwrap();
        assert_eq!(seq.bounds(), (0.5, 0.9));
        assert_eq!(seq.declared(), (0.0, 1.0));
        assert_eq!(seq.value(4), 0.9);
    }

    #[test]
    fn tabulated_uses_fallback_past_table() {
        let seq = ParameterSequence::tabulated(vec![2.0, 3.0], 2.5, 2.0, 3.0).unwrap();
        assert_eq!(seq.bounds(), (2.0, 3.0));
        assert_eq!(seq.value(1), 3.0);
        assert_eq!(seq.value(7), 2.5);
    }

    #[test]
    fn violation_reports_index() {
        let err = ParameterSequence::periodic(vec![0.5, 1.2, 0.7], 0.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::SequenceBound { index: 1, .. }));
        let err = ParameterSequence::tabulated(vec![2.0], 4.0, 2.0, 3.0).unwrap_err();
        assert!(matches!(err, Error::SequenceBound { index: 1, .. }));
    }

    #[test]
    fn empty_periodic_rejected() {
        assert_eq!(
            ParameterSequence::periodic(vec![], 0.0, 1.0),
            Err(Error::EmptySequence)
        );
    }

    #[test]
    fn shift_periodic_and_tabulated() {
        let seq = ParameterSequence::periodic_exact(vec![1.0, 2.0, 3.0]).unwrap();
        let s = seq.shifted(1);
        for n in 1..10 {
            assert_eq!(s.value(n), seq.value(n - 1));
        }
        let seq = ParameterSequence::tabulated(vec![1.0, 2.0], 5.0, 1.0, 5.0).unwrap();
        let s = seq.shifted(2);
        for n in 2..10 {
            assert_eq!(s.value(n), seq.value(n - 2));
        }
    }

    #[test]
    fn serde_forms() {
        let c: ParameterSequence = serde_json::from_str("1.5").unwrap();
        assert_eq!(c, ParameterSequence::constant(1.5));
        let p: ParameterSequence =
            serde_json::from_str(r#"{"kind":"periodic","values":[0.5,0.9],"inf":0,"sup":1}"#)
                .unwrap();
        assert_eq!(p.declared(), (0.0, 1.0));
        let bad = serde_json::from_str::<ParameterSequence>(
            r#"{"kind":"periodic","values":[0.5,1.9],"inf":0,"sup":1}"#,
        );
        assert!(bad.is_err());
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<ParameterSequence>(&text).unwrap(), p);
    }
}
