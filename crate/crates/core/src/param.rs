//! Parameterization of primitive points: every primitive solution of
//! Y²Z = X³ + dZ³ with Y, Z ≥ 1 is uniquely
//!
//! ```text
//! d = b₀²d₁,  X = b₀b₁x₁,  Y = b₀y₁,  Z = b₁³,  with  y₁² = b₀x₁³ + d₁b₁⁶.
//! ```

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Deserializer;
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::curve::{parse_raw_int, raw_int, MordellCurve, PrimitiveTriple};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decomposition {
    pub b0: BigInt,
    pub b1: BigInt,
    pub d1: BigInt,
    pub x1: BigInt,
    pub y1: BigInt,
}

impl Decomposition {
    pub fn new(
        b0: impl Into<BigInt>,
        b1: impl Into<BigInt>,
        d1: impl Into<BigInt>,
        x1: impl Into<BigInt>,
        y1: impl Into<BigInt>,
    ) -> Self {
        Self {
            b0: b0.into(),
            b1: b1.into(),
            d1: d1.into(),
            x1: x1.into(),
            y1: y1.into(),
        }
    }

    /// y₁² − b₀x₁³ − d₁b₁⁶; zero exactly when the defining equation holds.
    pub fn residual(&self) -> BigInt {
        &self.y1 * &self.y1 - &self.b0 * self.x1.pow(3) - &self.d1 * self.b1.pow(6)
    }

    /// max(|b₀x₁³|, y₁²): the unreduced size searched by point enumeration.
    pub fn box_value(&self) -> BigInt {
        (&self.b0 * self.x1.pow(3)).abs().max(&self.y1 * &self.y1)
    }

    pub fn d(&self) -> BigInt {
        &self.b0 * &self.b0 * &self.d1
    }

    /// Sign conditions, the defining equation and the three coprimality
    /// conditions.
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::Invariant(format!("decomposition {self:?}: {what}")));
        if !self.b0.is_positive() || !self.b1.is_positive() || !self.y1.is_positive() {
            return fail("b0, b1, y1 must be positive");
        }
        if self.d1.is_zero() {
            return fail("d1 must be nonzero");
        }
        if !self.residual().is_zero() {
            return fail("y1^2 != b0*x1^3 + d1*b1^6");
        }
        if !self.b1.gcd(&self.x1).is_one() {
            return fail("gcd(b1, x1) != 1");
        }
        if !self.b0.gcd(&self.b1).is_one() {
            return fail("gcd(b0, b1) != 1");
        }
        if !(&self.b1 * &self.x1).gcd(&self.y1).is_one() {
            return fail("gcd(b1*x1, y1) != 1");
        }
        Ok(())
    }
}

impl Serialize for Decomposition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Decomposition", 5)?;
        st.serialize_field("b0", &raw_int(&self.b0))?;
        st.serialize_field("b1", &raw_int(&self.b1))?;
        st.serialize_field("d1", &raw_int(&self.d1))?;
        st.serialize_field("x1", &raw_int(&self.x1))?;
        st.serialize_field("y1", &raw_int(&self.y1))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Decomposition {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            b0: Box<RawValue>,
            b1: Box<RawValue>,
            d1: Box<RawValue>,
            x1: Box<RawValue>,
            y1: Box<RawValue>,
        }
        let r = Raw::deserialize(de)?;
        Ok(Decomposition {
            b0: parse_raw_int(&r.b0)?,
            b1: parse_raw_int(&r.b1)?,
            d1: parse_raw_int(&r.d1)?,
            x1: parse_raw_int(&r.x1)?,
            y1: parse_raw_int(&r.y1)?,
        })
    }
}

/// Splits a primitive triple step by step: b₀ = gcd(X, Y), y₁ = Y/b₀,
/// x₀ = X/b₀, d₁ = d/b₀², b₁ = gcd(x₀, Z), x₁ = x₀/b₁, and Z/b₁³ must be 1.
pub fn decompose(curve: &MordellCurve, t: &PrimitiveTriple) -> Result<Decomposition> {
    let d = BigInt::from(curve.d());
    t.validate(curve.d())?;

    let b0 = t.x.gcd(&t.y);
    let y1 = &t.y / &b0;
    let x0 = &t.x / &b0;
    let b0_sq = &b0 * &b0;
    if !d.is_multiple_of(&b0_sq) {
        return Err(Error::Invariant(format!(
            "b0^2 = {b0_sq} does not divide d = {d}"
        )));
    }
    let d1 = &d / &b0_sq;
    let b1 = x0.gcd(&t.z);
    let x1 = &x0 / &b1;
    let b1_cubed = b1.pow(3);
    if !t.z.is_multiple_of(&b1_cubed) {
        return Err(Error::Invariant(format!(
            "b1^3 = {b1_cubed} does not divide Z = {}",
            t.z
        )));
    }
    let u = &t.z / &b1_cubed;
    if !u.is_one() {
        return Err(Error::Invariant(format!("Z / b1^3 = {u}, expected 1")));
    }
    let dec = Decomposition { b0, b1, d1, x1, y1 };
    dec.validate()?;
    Ok(dec)
}

/// Inverse of [`decompose`]: returns d = b₀²d₁ and (b₀b₁x₁, b₀y₁, b₁³).
pub fn recompose(dec: &Decomposition) -> Result<(i64, PrimitiveTriple)> {
    dec.validate()?;
    let d = dec.d().to_i64().ok_or(Error::Overflow("d = b0^2 d1"))?;
    let t = PrimitiveTriple {
        x: &dec.b0 * &dec.b1 * &dec.x1,
        y: &dec.b0 * &dec.y1,
        z: dec.b1.pow(3),
    };
    t.validate(d)?;
    Ok((d, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decompose_examples() {
        let c2 = MordellCurve::new(2).unwrap();
        assert_eq!(
            decompose(&c2, &PrimitiveTriple::new(-1, 1, 1)).unwrap(),
            Decomposition::new(1, 1, 2, -1, 1)
        );
        assert_eq!(
            decompose(&c2, &PrimitiveTriple::new(34, 71, 8)).unwrap(),
            Decomposition::new(1, 2, 2, 17, 71)
        );
        let c4 = MordellCurve::new(4).unwrap();
        assert_eq!(
            decompose(&c4, &PrimitiveTriple::new(0, 2, 1)).unwrap(),
            Decomposition::new(2, 1, 1, 0, 1)
        );
    }

    #[test]
    fn recompose_examples() {
        let cases = [
            (
                Decomposition::new(1, 1, 2, -1, 1),
                2,
                PrimitiveTriple::new(-1, 1, 1),
            ),
            (
                Decomposition::new(1, 2, 2, 17, 71),
                2,
                PrimitiveTriple::new(34, 71, 8),
            ),
            (
                Decomposition::new(2, 1, 1, 0, 1),
                4,
                PrimitiveTriple::new(0, 2, 1),
            ),
        ];
        for (dec, d, t) in cases {
            assert_eq!(recompose(&dec).unwrap(), (d, t));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let c2 = MordellCurve::new(2).unwrap();
        assert!(decompose(&c2, &PrimitiveTriple::new(-1, -1, 1)).is_err());
        assert!(decompose(&c2, &PrimitiveTriple::new(-2, 2, 2)).is_err());
        assert!(decompose(&c2, &PrimitiveTriple::new(1, 1, 1)).is_err());
        assert!(recompose(&Decomposition::new(1, 1, 2, -1, 2)).is_err());
        assert!(recompose(&Decomposition::new(1, 2, 2, 2, 1)).is_err());
    }

    #[test]
    fn json_shape() {
        let dec = Decomposition::new(1, 2, 2, 17, 71);
        let s = serde_json::to_string(&dec).unwrap();
        assert_eq!(s, r#"{"b0":1,"b1":2,"d1":2,"x1":17,"y1":71}"#);
        assert_eq!(serde_json::from_str::<Decomposition>(&s).unwrap(), dec);
    }

    proptest! {
        // Multiples of a known point give primitive triples with growing Z;
        // decompose must succeed on all of them and round-trip exactly.
        #[test]
        fn round_trip_on_multiples(idx in 0usize..5, n in 1i64..7) {
            let base = [(2, -1, 1), (-2, 3, 5), (17, -2, 3), (-11, 3, 4), (-26, 3, 1)];
            let (d, x, y) = base[idx];
            let c = MordellCurve::new(d).unwrap();
            let p = c.int_point(x, y).unwrap();
            let q = c.multiply(n, &p).unwrap();
            let t = c.to_primitive_triple(&q).unwrap();
            let dec = decompose(&c, &t).unwrap();
            prop_assert!(dec.residual().is_zero());
            prop_assert_eq!(recompose(&dec).unwrap(), (d, t.clone()));
            prop_assert_eq!(decompose(&c, &t).unwrap(), dec);
        }
    }
}
