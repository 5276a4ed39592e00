//! Experiment configs, simulation records and model flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use subconv::equation::Halt;
use subconv::models::{
    AdultJuvenileParams, CompetitionParams, RationalExponent, RickerFamilySpec, SigmoidBHSpec,
    ThreeDParams,
};
use subconv::{ModelDescriptor, ParameterSequence, Tolerances, TrajectoryRecord};

use crate::args::{BoundChoice, Format, ModelArgs};
use crate::failure::{Failure, Outcome};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_STEPS: usize = 100;

/// A complete experiment read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub model: ModelDescriptor,
    pub initial: Vec<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub bound: BoundChoice,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub fold_tol: Option<f64>,
}

fn default_steps() -> usize {
    DEFAULT_STEPS
}

/// Output of `simulate --format json`; it can be fed back as a config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationRecord {
    pub schema: u32,
    pub model: ModelDescriptor,
    pub initial: Vec<f64>,
    pub steps: usize,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halt: Option<Halt>,
}

/// What a run needs, wherever it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub model: ModelDescriptor,
    pub initial: Option<Vec<f64>>,
    pub steps: usize,
    pub format: Option<Format>,
    pub bound: Option<BoundChoice>,
    pub tolerances: Option<Tolerances>,
    pub fold_tol: Option<f64>,
}

impl From<ExperimentConfig> for Experiment {
    fn from(c: ExperimentConfig) -> Self {
        Self {
            model: c.model,
            initial: Some(c.initial),
            steps: c.steps,
            format: Some(c.format),
            bound: Some(c.bound),
            tolerances: c.tolerances,
            fold_tol: c.fold_tol,
        }
    }
}

impl From<SimulationRecord> for Experiment {
    fn from(r: SimulationRecord) -> Self {
        Self {
            model: r.model,
            initial: Some(r.initial),
            steps: r.steps,
            format: None,
            bound: None,
            tolerances: None,
            fold_tol: None,
        }
    }
}

impl From<TrajectoryRecord> for Experiment {
    fn from(r: TrajectoryRecord) -> Self {
        Self {
            steps: r.terms.len().saturating_sub(r.initial.len()),
            model: r.equation,
            initial: Some(r.initial),
            format: None,
            bound: None,
            tolerances: None,
            fold_tol: None,
        }
    }
}

/// Parses an experiment config, a simulation record or a library trajectory
/// record, told apart by their keys.
pub fn parse_config(text: &str) -> Outcome<Experiment> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Failure::config("config must be a JSON object"))?;
    if obj.contains_key("terms") {
        let rec: TrajectoryRecord = serde_json::from_value(value)?;
        return Ok(rec.into());
    }
    let schema = obj.get("schema").and_then(|v| v.as_u64());
    if schema != Some(SCHEMA_VERSION as u64) {
        return Err(Failure::config(format!(
            "unsupported or missing schema version {schema:?}, expected {SCHEMA_VERSION}"
        )));
    }
    if obj.contains_key("x") {
        let rec: SimulationRecord = serde_json::from_value(value)?;
        Ok(rec.into())
    } else {
        let cfg: ExperimentConfig = serde_json::from_value(value)?;
        Ok(cfg.into())
    }
}

pub fn load_config(path: &Path) -> Outcome<Experiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|f| Failure {
        kind: f.kind,
        error: f.error.context(format!("in config {}", path.display())),
    })
}

/// `v` or `v1:v2:...`.
pub fn parse_sequence(flag: &str, raw: &str) -> Outcome<ParameterSequence> {
    let values = raw
        .split(':')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure::config(format!("--{flag}: cannot parse {raw:?}")))?;
    if values.len() == 1 {
        Ok(ParameterSequence::constant(values[0]))
    } else {
        Ok(ParameterSequence::periodic_exact(values)?)
    }
}

fn parse_scalar(flag: &str, raw: &str) -> Outcome<f64> {
    raw.trim()
        .parse()
        .map_err(|_| Failure::config(format!("--{flag}: cannot parse {raw:?}")))
}

fn missing(flag: &str, model: &str) -> Failure {
    Failure::config(format!("model {model} needs --{flag}"))
}

impl ModelArgs {
    fn seq(&self, flag: &str, raw: &Option<String>, model: &str) -> Outcome<ParameterSequence> {
        let raw = raw.as_deref().ok_or_else(|| missing(flag, model))?;
        parse_sequence(flag, raw)
    }

    fn seq_or(&self, flag: &str, raw: &Option<String>, default: f64) -> Outcome<ParameterSequence> {
        match raw {
            Some(r) => parse_sequence(flag, r),
            None => Ok(default.into()),
        }
    }

    fn scalar(&self, flag: &str, raw: &Option<String>, model: &str) -> Outcome<f64> {
        parse_scalar(flag, raw.as_deref().ok_or_else(|| missing(flag, model))?)
    }

    fn lambda(&self, model: &str) -> Outcome<f64> {
        self.lambda.ok_or_else(|| missing("lambda", model))
    }

    pub fn name(&self) -> Outcome<&str> {
        self.model
            .as_deref()
            .ok_or_else(|| Failure::config("no model given; use --model or --config"))
    }

    pub fn descriptor(&self) -> Outcome<ModelDescriptor> {
        let name = self.name()?;
        Ok(match name {
            "ricker" => ModelDescriptor::Ricker(self.ricker_spec()?),
            "sp3" => ModelDescriptor::Sp3 {
                k: self.k.unwrap_or(3),
            },
            "sigmoid-bh" => ModelDescriptor::SigmoidBh(SigmoidBHSpec {
                a: self.seq("a", &self.a, name)?,
                c: self.seq_or("c", &self.c, 0.0)?,
                q: self.seq_or("q", &self.q, 1.0)?,
                p: self
                    .p
                    .as_deref()
                    .ok_or_else(|| missing("p", name))?
                    .parse::<RationalExponent>()?,
                b: self.scalar("b", &self.b, name)?,
                k: self.k.unwrap_or(1),
                l: self.l.unwrap_or(1),
            }),
            "adult-juvenile" => ModelDescriptor::AdultJuvenile(AdultJuvenileParams {
                s: self.seq("s", &self.s, name)?,
                t: self.seq("t", &self.t, name)?,
                r: self.seq("r", &self.r, name)?,
                lambda: self.lambda(name)?,
            }),
            "competition" => ModelDescriptor::Competition(self.competition(name)?),
            "competition-swapped" => ModelDescriptor::CompetitionSwapped(self.competition(name)?),
            "threed" => ModelDescriptor::Threed(ThreeDParams {
                a: self.seq("a", &self.a, name)?,
                p: self.seq("p", &self.p, name)?,
                b: self.b.as_deref().map(|v| parse_scalar("b", v)).transpose()?.unwrap_or(0.0),
                c: self.scalar("c", &self.c, name)?,
                d: self.d.unwrap_or(0.0),
                q: self.scalar("q", &self.q, name)?,
                r: self.scalar("r", &self.r, name)?,
                s: self.scalar("s", &self.s, name)?,
            }),
            other => {
                return Err(Failure::config(format!(
                    "unknown model {other:?}; see `subconv models`"
                )))
            }
        })
    }

    pub fn ricker_spec(&self) -> Outcome<RickerFamilySpec> {
        let name = "ricker";
        let b = self
            .b
            .as_deref()
            .ok_or_else(|| missing("b", name))?
            .split(',')
            .map(|v| parse_sequence("b", v))
            .collect::<Outcome<Vec<_>>>()?;
        Ok(RickerFamilySpec::new(
            self.lambda(name)?,
            self.k.unwrap_or(1),
            self.seq("a", &self.a, name)?,
            b,
        ))
    }

    fn competition(&self, name: &str) -> Outcome<CompetitionParams> {
        let delta1 = self.delta1.ok_or_else(|| missing("delta1", name))?;
        Ok(CompetitionParams {
            r1: self.seq("r1", &self.r1, name)?,
            a1: self.seq("a1", &self.a1, name)?,
            b1: self.seq_or("b1", &self.b1, 0.0)?,
            r2: self.seq("r2", &self.r2, name)?,
            a2: self.seq("a2", &self.a2, name)?,
            b2: self.seq_or("b2", &self.b2, 0.0)?,
            delta1,
            delta2: self.delta2.unwrap_or(delta1),
            delta3: self.delta3.unwrap_or(1.0),
            delta4: self.delta4.unwrap_or(1.0),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags(model: &str) -> ModelArgs {
        ModelArgs {
            model: Some(model.into()),
            ..Default::default()
        }
    }

    #[test]
    fn sequences_from_flags() {
        assert_eq!(parse_sequence("a", "1.5").unwrap(), ParameterSequence::constant(1.5));
        let p = parse_sequence("s", "0.8:0.6").unwrap();
        assert_eq!((p.value(0), p.value(1), p.value(2)), (0.8, 0.6, 0.8));
        assert_eq!(parse_sequence("s", "0.8:x").unwrap_err().code(), 2);
    }

    #[test]
    fn ricker_flags() {
        let mut f = flags("ricker");
        f.lambda = Some(1.5);
        f.a = Some("1.5".into());
        f.b = Some("0,0.7,0.9".into());
        f.k = Some(3);
        let ModelDescriptor::Ricker(spec) = f.descriptor().unwrap() else {
            panic!("expected ricker");
        };
        assert_eq!((spec.m, spec.k), (3, 3));
    }

    #[test]
    fn missing_flag_is_config_error() {
        let f = flags("adult-juvenile");
        let err = f.descriptor().unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.error.to_string().contains("--s"));
        assert_eq!(flags("nope").descriptor().unwrap_err().code(), 2);
    }

    #[test]
    fn config_kinds_are_distinguished() {
        let cfg = r#"{"schema":1,"model":{"family":"sp3","k":2},"initial":[1,1,1],"steps":5}"#;
        let e = parse_config(cfg).unwrap();
        assert_eq!(e.model, ModelDescriptor::Sp3 { k: 2 });
        assert_eq!(e.steps, 5);
        let bad = r#"{"schema":1,"model":{"family":"sp3","k":2},"initial":[1],"colour":"red"}"#;
        assert!(parse_config(bad).is_err());
        let old = r#"{"schema":7,"model":{"family":"sp3","k":2},"initial":[1]}"#;
        assert!(parse_config(old).is_err());
    }
}
