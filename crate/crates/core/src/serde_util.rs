//! JSON has no infinities; unbounded thresholds and windows are written as
//! the strings `"inf"` / `"-inf"`.

use serde::{Deserialize, Deserializer, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum Wire {
    Num(f64),
    Text(String),
}

fn decode<E: serde::de::Error>(wire: Wire) -> Result<f64, E> {
    match wire {
        Wire::Num(v) => Ok(v),
        Wire::Text(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => Err(E::custom(format!("expected a number or \"inf\", got {other:?}"))),
        },
    }
}

pub mod extended {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        decode(Wire::deserialize(d)?)
    }
}

pub mod extended_pair {
    use super::*;
    use serde::ser::SerializeTuple;

    pub fn serialize<S: Serializer>(v: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
        struct One(f64);
        impl serde::Serialize for One {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                super::extended::serialize(&self.0, s)
            }
        }
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&One(v[0]))?;
        t.serialize_element(&One(v[1]))?;
        t.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 2], D::Error> {
        let [a, b] = <[Wire; 2]>::deserialize(d)?;
        Ok([decode(a)?, decode(b)?])
    }
}
