//! JSON encodings of exact values.
//!
//! A rational is a `[numerator, denominator]` pair of integers; integers
//! that do not fit in 64 bits are written as decimal strings. An
//! exponential polynomial is a list of `[coeff, power, rate]` terms. Decimal
//! fractions are rejected everywhere.

use std::fmt;
use std::str::FromStr;

use expseries_core::ring::{ExpPoly, Rational, Term};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision integer: a JSON integer or a string of digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Int(pub BigInt);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

struct IntVisitor;

impl Visitor<'_> for IntVisitor {
    type Value = Int;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a string of decimal digits")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Int, E> {
        Ok(Int(v.into()))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Int, E> {
        Ok(Int(v.into()))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Int, E> {
        Err(E::custom(format_args!("{v} is not an integer; write rationals as [numerator, denominator]")))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Int, E> {
        let digits = v.strip_prefix('-').unwrap_or(v);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(E::custom(format_args!("\"{v}\" is not an integer")));
        }
        BigInt::from_str(v).map(Int).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
        d.deserialize_any(IntVisitor)
    }
}

/// Exact rational as `[numerator, denominator]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&Int(self.0.numer().clone()))?;
        t.serialize_element(&Int(self.0.denom().clone()))?;
        t.end()
    }
}

struct QVisitor;

impl<'de> Visitor<'de> for QVisitor {
    type Value = Q;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a [numerator, denominator] integer pair")
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Q, A::Error> {
        let n: Int = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let d: Int = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<de::IgnoredAny>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        if d.0.is_zero() {
            return Err(de::Error::custom("zero denominator"));
        }
        Ok(Q(Rational::new(n.0, d.0)))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        d.deserialize_seq(QVisitor)
    }
}

pub fn q3(v: &[Rational; 3]) -> [Q; 3] {
    v.clone().map(Q)
}

pub fn rationals(v: [Q; 3]) -> [Rational; 3] {
    v.map(|q| q.0)
}

/// Exponential polynomial as a list of `[coeff, power, rate]` terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub ExpPoly);

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<(Q, u32, Q)> = self
            .0
            .terms()
            .iter()
            .map(|t| (Q(t.coeff.clone()), t.power, Q(t.rate.clone())))
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Poly, D::Error> {
        let terms = Vec::<(Q, u32, Q)>::deserialize(d)?;
        Ok(Poly(ExpPoly::from_terms(terms.into_iter().map(|(c, power, a)| Term {
            coeff: c.0,
            power,
            rate: a.0,
        }))))
    }
}

pub fn polys3(v: &[ExpPoly; 3]) -> [Poly; 3] {
    v.clone().map(Poly)
}

pub fn exppolys(v: [Poly; 3]) -> [ExpPoly; 3] {
    v.map(|p| p.0)
}

/// Parses `n`, `n/d` or `-n/d` for command-line flags.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let int = |p: &str| {
        let digits = p.strip_prefix('-').unwrap_or(p);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("\"{s}\" is not a rational of the form n or n/d"));
        }
        BigInt::from_str(p).map_err(|e| e.to_string())
    };
    let (n, d) = match s.trim().split_once('/') {
        Some((n, d)) => (int(n.trim())?, int(d.trim())?),
        None => (int(s.trim())?, BigInt::from(1)),
    };
    if d.is_zero() {
        return Err(format!("\"{s}\" has a zero denominator"));
    }
    Ok(Rational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use expseries_core::ring::{int, rat};

    #[test]
    fn rationals_round_trip() {
        let big = Rational::new(BigInt::from(10).pow(30), BigInt::from(7));
        for q in [rat(-3, 4), int(0), big] {
            let s = serde_json::to_string(&Q(q.clone())).unwrap();
            assert_eq!(serde_json::from_str::<Q>(&s).unwrap().0, q);
        }
        assert_eq!(serde_json::to_string(&Q(rat(2, -4))).unwrap(), "[-1,2]");
        let s = serde_json::to_string(&Q(Rational::from_integer(BigInt::from(2).pow(70)))).unwrap();
        assert_eq!(s, "[\"1180591620717411303424\",1]");
    }

    #[test]
    fn malformed_rationals_are_rejected() {
        for bad in ["0.5", "[0.5, 1]", "[\"0.5\", 1]", "[1, 0]", "[1]", "[1, 2, 3]", "\"1/2\""] {
            assert!(serde_json::from_str::<Q>(bad).is_err(), "{bad}");
        }
        assert_eq!(serde_json::from_str::<Q>("[\"-12\", 8]").unwrap().0, rat(-3, 2));
    }

    #[test]
    fn exppoly_round_trip() {
        let f = &ExpPoly::term(rat(1, 3), 2, int(-1)) + &ExpPoly::constant(int(5));
        let s = serde_json::to_string(&Poly(f.clone())).unwrap();
        assert_eq!(s, "[[[5,1],0,[0,1]],[[1,3],2,[-1,1]]]");
        assert_eq!(serde_json::from_str::<Poly>(&s).unwrap().0, f);
        // like terms in input are merged
        let merged: Poly = serde_json::from_str("[[[1,2],0,[0,1]],[[1,2],0,[0,1]]]").unwrap();
        assert_eq!(merged.0, ExpPoly::one());
    }

    #[test]
    fn flag_rationals() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
