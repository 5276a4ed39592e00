use std::fmt;

use subconv::Error;

/// Process exit statuses. These values are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config = 2,
    BlowUp = 3,
    Violated = 4,
    Bound = 5,
    Fold = 6,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(kind: Kind, error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind,
            error: error.into(),
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        Self::new(Kind::Config, anyhow::anyhow!("{msg}"))
    }

    pub fn code(&self) -> u8 {
        self.kind as u8
    }
}

fn classify(e: &Error) -> Kind {
    match e {
        Error::NonFinite { .. } | Error::DomainExit { .. } | Error::NonPositiveLog { .. } => {
            Kind::BlowUp
        }
        Error::NotSublinear { .. }
        | Error::NonFiniteBound { .. }
        | Error::LagMismatch { .. }
        | Error::BoundValidation(_)
        | Error::MissingEnvelope
        | Error::HypothesisNotEstablished(_) => Kind::Bound,
        _ => Kind::Config,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::new(classify(&e), e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::new(Kind::Config, e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::new(Kind::Config, e)
    }
}

pub type Outcome<T = ()> = std::result::Result<T, Failure>;
