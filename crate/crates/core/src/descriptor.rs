//! Serializable model descriptors. Every built-in equation and system carries
//! one, so trajectories and folded equations can be exported as JSON and
//! rebuilt later.

use serde::{Deserialize, Serialize};

use crate::criteria::BoundingFunction;
use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::folding::{fold_planar, PlanarSystem};
use crate::models::{
    make_adult_juvenile, make_adult_juvenile_fold, make_competition, make_generalized_ricker,
    make_sigmoid_bh, make_sp3, sigmoid_bh_translated, translate_to_origin, AdultJuvenileParams,
    CompetitionParams, RickerFamilySpec, SigmoidBHSpec, SpatialSystem, ThreeDParams,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelDescriptor {
    Ricker(RickerFamilySpec),
    Sp3 {
        k: usize,
    },
    SigmoidBh(SigmoidBHSpec),
    /// `base` moved so that `shift` sits at the origin.
    Translated {
        base: Box<ModelDescriptor>,
        shift: f64,
    },
    AdultJuvenile(AdultJuvenileParams),
    AdultJuvenileFold(AdultJuvenileParams),
    Competition(CompetitionParams),
    CompetitionSwapped(CompetitionParams),
    Threed(ThreeDParams),
    ThreedFold(ThreeDParams),
    /// Second-order fold of a planar system.
    Folded {
        system: Box<ModelDescriptor>,
    },
    /// An equation built in code; it can be exported but not rebuilt.
    Opaque {
        name: String,
    },
}

/// A scalar equation with the bounds known for it.
#[derive(Debug, Clone)]
pub struct ScalarModel {
    pub equation: EquationSpec,
    pub bound: Option<BoundingFunction>,
    /// Second bound for the same lag, e.g. the rigorous one when `bound` is
    /// heuristic.
    pub alternate_bound: Option<BoundingFunction>,
    /// The equation about a nonzero fixed point, where the bound applies.
    pub translated: Option<TranslatedModel>,
}

#[derive(Debug, Clone)]
pub struct TranslatedModel {
    pub equation: EquationSpec,
    pub bound: BoundingFunction,
    pub offset: f64,
}

impl ScalarModel {
    fn plain(equation: EquationSpec, bound: Option<BoundingFunction>) -> Self {
        Self {
            equation,
            bound,
            alternate_bound: None,
            translated: None,
        }
    }
}

/// Built once per run, so the variant size difference is immaterial.
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone)]
pub enum Model {
    Scalar(ScalarModel),
    Planar(PlanarSystem),
    Spatial(SpatialSystem),
}

impl ModelDescriptor {
    pub fn family(&self) -> &'static str {
        match self {
            ModelDescriptor::Ricker(_) => "ricker",
            ModelDescriptor::Sp3 { .. } => "sp3",
            ModelDescriptor::SigmoidBh(_) => "sigmoid-bh",
            ModelDescriptor::Translated { .. } => "translated",
            ModelDescriptor::AdultJuvenile(_) => "adult-juvenile",
            ModelDescriptor::AdultJuvenileFold(_) => "adult-juvenile-fold",
            ModelDescriptor::Competition(_) => "competition",
            ModelDescriptor::CompetitionSwapped(_) => "competition-swapped",
            ModelDescriptor::Threed(_) => "threed",
            ModelDescriptor::ThreedFold(_) => "threed-fold",
            ModelDescriptor::Folded { .. } => "folded",
            ModelDescriptor::Opaque { .. } => "opaque",
        }
    }

    pub fn build(&self) -> Result<Model> {
        Ok(match self {
            ModelDescriptor::Ricker(spec) => {
                let (eq, bound) = make_generalized_ricker(spec)?;
                Model::Scalar(ScalarModel::plain(eq, Some(bound)))
            }
            ModelDescriptor::Sp3 { k } => {
                let m = make_sp3(*k)?;
                Model::Scalar(ScalarModel {
                    equation: m.equation,
                    alternate_bound: (*k == 1).then(|| m.rigorous_bound.clone()),
                    bound: Some(m.figure_bound),
                    translated: None,
                })
            }
            ModelDescriptor::SigmoidBh(spec) => {
                let translated = match sigmoid_bh_translated(spec) {
                    Ok((equation, bound)) => Some(TranslatedModel {
                        equation,
                        bound,
                        offset: spec.b,
                    }),
                    Err(Error::NotSublinear { .. }) => None,
                    Err(e) => return Err(e),
                };
                Model::Scalar(ScalarModel {
                    equation: make_sigmoid_bh(spec)?,
                    bound: None,
                    alternate_bound: None,
                    translated,
                })
            }
            ModelDescriptor::Translated { base, shift } => {
                if let ModelDescriptor::SigmoidBh(spec) = base.as_ref() {
                    if spec.b == *shift {
                        let (eq, bound) = sigmoid_bh_translated(spec)?;
                        return Ok(Model::Scalar(ScalarModel::plain(eq, Some(bound))));
                    }
                }
                let eq = match base.build()? {
                    Model::Scalar(m) => m.equation,
                    _ => {
                        return Err(Error::Descriptor(
                            "only scalar equations can be translated".into(),
                        ))
                    }
                };
                Model::Scalar(ScalarModel::plain(translate_to_origin(&eq, *shift)?, None))
            }
            ModelDescriptor::AdultJuvenile(p) => Model::Planar(make_adult_juvenile(p)?),
            ModelDescriptor::AdultJuvenileFold(p) => {
                let (eq, bound) = make_adult_juvenile_fold(p)?;
                Model::Scalar(ScalarModel::plain(eq, Some(bound)))
            }
            ModelDescriptor::Competition(p) => Model::Planar(make_competition(p, false)?),
            ModelDescriptor::CompetitionSwapped(p) => Model::Planar(make_competition(p, true)?),
            ModelDescriptor::Threed(p) => Model::Spatial(SpatialSystem::new(p.clone())?),
            ModelDescriptor::ThreedFold(p) => spatial_fold(&SpatialSystem::new(p.clone())?)?,
            ModelDescriptor::Folded { system } => match system.build()? {
                Model::Planar(sys) => {
                    let eq = fold_planar(&sys)?;
                    Model::Scalar(ScalarModel::plain(eq, sys.folded_bound()?))
                }
                Model::Spatial(sys) => spatial_fold(&sys)?,
                Model::Scalar(_) => {
                    return Err(Error::Descriptor("a scalar equation cannot be folded".into()))
                }
            },
            ModelDescriptor::Opaque { name } => {
                return Err(Error::Descriptor(format!(
                    "equation {name:?} was built in code and has no rebuildable form"
                )))
            }
        })
    }
}

fn spatial_fold(sys: &SpatialSystem) -> Result<Model> {
    let bound = sys.folded_with_bound().ok().map(|(_, b)| b);
    Ok(Model::Scalar(ScalarModel::plain(sys.folded()?, bound)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub summary: &'static str,
}

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "ricker",
            kind: "scalar",
            summary: "x_n = x_{n-k}^λ exp(a_n - Σ b_{i,n} x_{n-i})",
        },
        CatalogEntry {
            name: "sp3",
            kind: "scalar",
            summary: "x_n = x_{n-k}^{3/2} exp(1.5 - 0.7 x_{n-2} - 0.9 x_{n-3}), k in 1..=3",
        },
        CatalogEntry {
            name: "sigmoid-bh",
            kind: "scalar",
            summary: "x_n = a_n (x_{n-k} - b)^p / (1 + c_n x_{n-l}^{q_n}) + b",
        },
        CatalogEntry {
            name: "adult-juvenile",
            kind: "planar",
            summary: "x' = s y, y' = x^λ exp(r - x - t y)",
        },
        CatalogEntry {
            name: "competition",
            kind: "planar",
            summary: "x' = r1 x^δ1 / (a1 + x^δ1 + b1 y^δ3), y' = r2 y^δ2 / (a2 + y^δ2 + b2 x^δ4)",
        },
        CatalogEntry {
            name: "competition-swapped",
            kind: "planar",
            summary: "competition with x and y exchanged on the right-hand sides",
        },
        CatalogEntry {
            name: "threed",
            kind: "spatial",
            summary: "x' = exp(a - b x - c y - d z), y' = p x + q z - r ln z, z' = s x",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tagged_json_round_trip() {
        let d = ModelDescriptor::AdultJuvenile(AdultJuvenileParams::constant(0.8, 1.0, 2.0, 2.0));
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"family\":\"adult-juvenile\""));
        let back: ModelDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = r#"{"family":"adult-juvenile","s":0.8,"t":1,"r":2,"lambda":2,"extra":1}"#;
        assert!(serde_json::from_str::<ModelDescriptor>(bad).is_err());
        let good = r#"{"family":"adult-juvenile","s":0.8,"t":1,"r":2,"lambda":2}"#;
        assert!(serde_json::from_str::<ModelDescriptor>(good).is_ok());
    }

    #[test]
    fn sp3_descriptor_builds_with_both_bounds() {
        let Model::Scalar(m) = ModelDescriptor::Sp3 { k: 1 }.build().unwrap() else {
            panic!("expected a scalar model");
        };
        assert!(m.bound.is_some() && m.alternate_bound.is_some());
    }

    #[test]
    fn opaque_cannot_be_built() {
        let d = ModelDescriptor::Opaque { name: "x".into() };
        assert!(matches!(d.build(), Err(Error::Descriptor(_))));
    }

    #[test]
    fn catalog_names() {
        let names: Vec<_> = catalog().iter().map(|e| e.name).collect();
        assert_eq!(
            names,
            [
                "ricker",
                "sp3",
                "sigmoid-bh",
                "adult-juvenile",
                "competition",
                "competition-swapped",
                "threed"
            ]
        );
    }
}
