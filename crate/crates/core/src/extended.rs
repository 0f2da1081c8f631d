//! Extended reals. Infinities only ever appear as limit results.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// Addition; `(+∞) + (−∞)` is an error.
    pub fn checked_add(self, other: Self) -> Result<Self> {
        use ExtendedReal::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::Undefined("(+inf) + (-inf)")),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Finite(a), Finite(b)) => Ok(Finite(a + b)),
        }
    }

    pub fn add_real(self, c: f64) -> Self {
        match self {
            Self::Finite(v) => Self::Finite(v + c),
            other => other,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Self::NegInf => f64::NEG_INFINITY,
            Self::Finite(v) => v,
            Self::PosInf => f64::INFINITY,
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v == f64::INFINITY {
            Self::PosInf
        } else if v == f64::NEG_INFINITY {
            Self::NegInf
        } else {
            Self::Finite(v)
        }
    }
}

impl Neg for ExtendedReal {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            Self::NegInf => Self::PosInf,
            Self::Finite(v) => Self::Finite(-v),
            Self::PosInf => Self::NegInf,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.as_f64().partial_cmp(&other.as_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegInf => f.write_str("-inf"),
            Self::PosInf => f.write_str("+inf"),
            Self::Finite(v) => match f.precision() {
                Some(p) => write!(f, "{v:.p$}"),
                None => write!(f, "{v}"),
            },
        }
    }
}

// Infinities travel as the strings "+inf" / "-inf" since JSON has no encoding for them.
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => serializer.serialize_f64(*v),
            Self::PosInf => serializer.serialize_str("+inf"),
            Self::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(Self::Finite(v)),
            Raw::Text(t) => match t.as_str() {
                "+inf" | "inf" => Ok(Self::PosInf),
                "-inf" => Ok(Self::NegInf),
                other => Err(serde::de::Error::custom(format!("not an extended real: {other}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::ExtendedReal::*;
    use super::*;

    #[test]
    fn order_places_infinities_at_the_ends() {
        assert!(NegInf < Finite(-1e300));
        assert!(Finite(1e300) < PosInf);
        assert!(Finite(1.0) < Finite(2.0));
    }

    #[test]
    fn addition_rules() {
        assert_eq!(PosInf.checked_add(Finite(3.0)).unwrap(), PosInf);
        assert_eq!(NegInf.checked_add(Finite(3.0)).unwrap(), NegInf);
        assert_eq!(Finite(1.0).checked_add(Finite(2.0)).unwrap(), Finite(3.0));
        assert!(PosInf.checked_add(NegInf).is_err());
        assert!(NegInf.checked_add(PosInf).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let vals = vec![NegInf, Finite(0.25), PosInf];
        let text = serde_json::to_string(&vals).unwrap();
        assert_eq!(text, r#"["-inf",0.25,"+inf"]"#);
        let back: Vec<ExtendedReal> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vals);
    }
}
