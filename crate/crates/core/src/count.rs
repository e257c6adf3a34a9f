use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A natural number or ω.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cardinal {
    Finite(BigUint),
    Omega,
}

impl Cardinal {
    pub fn zero() -> Self {
        Cardinal::Finite(BigUint::zero())
    }

    pub fn from_u64(n: u64) -> Self {
        Cardinal::Finite(BigUint::from(n))
    }

    pub fn is_omega(&self) -> bool {
        matches!(self, Cardinal::Omega)
    }

    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            Cardinal::Finite(n) => Some(n),
            Cardinal::Omega => None,
        }
    }

    pub fn add(&self, other: &Cardinal) -> Cardinal {
        match (self, other) {
            (Cardinal::Finite(a), Cardinal::Finite(b)) => Cardinal::Finite(a + b),
            _ => Cardinal::Omega,
        }
    }
}

impl Default for Cardinal {
    fn default() -> Self {
        Cardinal::zero()
    }
}

impl From<u64> for Cardinal {
    fn from(n: u64) -> Self {
        Cardinal::from_u64(n)
    }
}

impl From<BigUint> for Cardinal {
    fn from(n: BigUint) -> Self {
        Cardinal::Finite(n)
    }
}

impl fmt::Display for Cardinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinal::Finite(n) => write!(f, "{n}"),
            Cardinal::Omega => write!(f, "omega"),
        }
    }
}

impl Serialize for Cardinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Cardinal::Omega => s.serialize_str("omega"),
            Cardinal::Finite(n) => serialize_big(n, s),
        }
    }
}

impl<'de> Deserialize<'de> for Cardinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::String(s) if s == "omega" => Ok(Cardinal::Omega),
            _ => big_from_value(&v)
                .map(Cardinal::Finite)
                .ok_or_else(|| serde::de::Error::custom("expected a natural number or \"omega\"")),
        }
    }
}

/// Naturals that fit in u64 are written as JSON numbers, larger ones as strings.
pub fn serialize_big<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    match n.to_u64() {
        Some(v) => s.serialize_u64(v),
        None => s.serialize_str(&n.to_string()),
    }
}

pub(crate) fn big_to_value(n: &BigUint) -> serde_json::Value {
    match n.to_u64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(n.to_string()),
    }
}

pub(crate) fn big_from_value(v: &serde_json::Value) -> Option<BigUint> {
    match v {
        serde_json::Value::Number(x) => x.as_u64().map(BigUint::from),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}
