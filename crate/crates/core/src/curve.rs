//! Mordell curves y² = x³ + d over ℚ: exact chord-tangent group law,
//! primitive integral triples, and the rational torsion subgroup.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::integer_lab::{exact_cbrt, exact_sqrt, is_sixth_power_free};

/// The curve y² = x³ + d with d nonzero and sixth-power free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MordellCurve {
    d: i64,
}

impl MordellCurve {
    pub fn new(d: i64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Zero);
        }
        if !is_sixth_power_free(d)? {
            return Err(Error::NotSixthPowerFree(d));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    fn d_big(&self) -> BigInt {
        BigInt::from(self.d)
    }

    /// Builds an affine point, rejecting it unless it lies on the curve.
    pub fn point(&self, x: BigRational, y: BigRational) -> Result<CurvePoint> {
        let p = CurvePoint::Affine { x, y };
        self.check(&p)?;
        Ok(p)
    }

    /// Integer-coordinate convenience wrapper around [`MordellCurve::point`].
    pub fn int_point(&self, x: i64, y: i64) -> Result<CurvePoint> {
        self.point(
            BigRational::from_integer(x.into()),
            BigRational::from_integer(y.into()),
        )
    }

    pub fn contains(&self, p: &CurvePoint) -> bool {
        match p {
            CurvePoint::Identity => true,
            CurvePoint::Affine { x, y } => {
                y * y == x * x * x + BigRational::from_integer(self.d_big())
            }
        }
    }

    fn check(&self, p: &CurvePoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::OffCurve { d: self.d })
        }
    }

    pub fn negate(&self, p: &CurvePoint) -> CurvePoint {
        match p {
            CurvePoint::Identity => CurvePoint::Identity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine {
                x: x.clone(),
                y: -y,
            },
        }
    }

    pub fn add(&self, p: &CurvePoint, q: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add_unchecked(p, q))
    }

    pub(crate) fn add_unchecked(&self, p: &CurvePoint, q: &CurvePoint) -> CurvePoint {
        let (x1, y1, x2, y2) = match (p, q) {
            (CurvePoint::Identity, _) => return q.clone(),
            (_, CurvePoint::Identity) => return p.clone(),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let slope = if x1 == x2 {
            if y1 != y2 || y1.is_zero() {
                return CurvePoint::Identity;
            }
            // tangent: 3x² / 2y
            let three = BigRational::from_integer(3.into());
            let two = BigRational::from_integer(2.into());
            three * x1 * x1 / (two * y1)
        } else {
            (y2 - y1) / (x2 - x1)
        };
        let x3 = &slope * &slope - x1 - x2;
        let y3 = slope * (x1 - &x3) - y1;
        CurvePoint::Affine { x: x3, y: y3 }
    }

    pub fn double(&self, p: &CurvePoint) -> Result<CurvePoint> {
        self.add(p, p)
    }

    /// n·P by double-and-add.
    pub fn multiply(&self, n: i64, p: &CurvePoint) -> Result<CurvePoint> {
        self.check(p)?;
        Ok(self.multiply_unchecked(n, p))
    }

    pub(crate) fn multiply_unchecked(&self, n: i64, p: &CurvePoint) -> CurvePoint {
        let mut acc = CurvePoint::Identity;
        let mut base = if n < 0 { self.negate(p) } else { p.clone() };
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_unchecked(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.add_unchecked(&base, &base);
            }
        }
        acc
    }

    /// Exact order of P if it is at most `max`.
    pub fn order(&self, p: &CurvePoint, max: u32) -> Result<Option<u32>> {
        self.check(p)?;
        let mut acc = p.clone();
        for k in 1..=max {
            if acc.is_identity() {
                return Ok(Some(k));
            }
            acc = self.add_unchecked(&acc, p);
        }
        Ok(None)
    }

    /// Torsion orders on Mordell curves divide 6, so P is torsion iff 6P = O.
    pub fn is_torsion(&self, p: &CurvePoint) -> Result<bool> {
        self.check(p)?;
        Ok(self.multiply_unchecked(6, p).is_identity())
    }

    /// Classical torsion table, with every generator re-verified by
    /// explicit multiplication.
    pub fn torsion_subgroup(&self) -> Result<TorsionClass> {
        let d = self.d;
        let (structure, generator) = if d == 1 {
            (TorsionStructure::Z6, Some(self.int_point(2, 3)?))
        } else if let Some(r) = (d > 0).then(|| exact_sqrt(d as i128)).flatten() {
            (TorsionStructure::Z3, Some(self.int_point(0, r as i64)?))
        } else if d == -432 {
            (TorsionStructure::Z3, Some(self.int_point(12, 36)?))
        } else if let Some(c) = exact_cbrt(d) {
            (TorsionStructure::Z2, Some(self.int_point(-c, 0)?))
        } else {
            (TorsionStructure::Trivial, None)
        };
        let generators: Vec<CurvePoint> = generator.into_iter().collect();
        for g in &generators {
            let ord = self.order(g, 12)?;
            if ord != Some(structure.order()) {
                return Err(Error::Invariant(format!(
                    "torsion generator {g} on d = {d} has order {ord:?}, expected {}",
                    structure.order()
                )));
            }
        }
        Ok(TorsionClass {
            structure,
            generators,
        })
    }

    /// Every rational torsion point, identity first.
    pub fn torsion_points(&self) -> Result<Vec<CurvePoint>> {
        let class = self.torsion_subgroup()?;
        let mut out = vec![CurvePoint::Identity];
        if let Some(g) = class.generators.first() {
            let mut acc = g.clone();
            while !acc.is_identity() {
                out.push(acc.clone());
                acc = self.add_unchecked(&acc, g);
            }
        }
        Ok(out)
    }

    /// Clears denominators: (a/e², b/e³) ↦ (a·e, |b|, e³). A point with
    /// y < 0 is replaced by its negative first.
    pub fn to_primitive_triple(&self, p: &CurvePoint) -> Result<PrimitiveTriple> {
        self.check(p)?;
        let (x, y) = match p {
            CurvePoint::Identity => return Err(Error::Domain("the identity".into())),
            CurvePoint::Affine { x, y } => (x, y),
        };
        if y.is_zero() {
            return Err(Error::Domain("a point with y = 0".into()));
        }
        let e = p
            .weight_denominator()
            .ok_or_else(|| Error::Invariant(format!("denominators of {p} are not e², e³")))?;
        let triple = PrimitiveTriple {
            x: x.numer() * &e,
            y: y.numer().abs(),
            z: e.pow(3),
        };
        triple.validate(self.d)?;
        Ok(triple)
    }

    pub fn from_primitive_triple(&self, t: &PrimitiveTriple) -> Result<CurvePoint> {
        t.validate(self.d)?;
        let z = BigRational::from_integer(t.z.clone());
        Ok(CurvePoint::Affine {
            x: BigRational::from_integer(t.x.clone()) / &z,
            y: BigRational::from_integer(t.y.clone()) / z,
        })
    }
}

/// A rational point: the identity O or an affine (x, y).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Identity,
    Affine { x: BigRational, y: BigRational },
}

impl CurvePoint {
    pub fn is_identity(&self) -> bool {
        matches!(self, CurvePoint::Identity)
    }

    pub fn x(&self) -> Option<&BigRational> {
        match self {
            CurvePoint::Identity => None,
            CurvePoint::Affine { x, .. } => Some(x),
        }
    }

    pub fn y(&self) -> Option<&BigRational> {
        match self {
            CurvePoint::Identity => None,
            CurvePoint::Affine { y, .. } => Some(y),
        }
    }

    /// The e with x = a/e², y = b/e³ in lowest terms, if the denominators
    /// have that shape. Always `Some` for points on a Mordell curve.
    pub fn weight_denominator(&self) -> Option<BigInt> {
        let (x, y) = (self.x()?, self.y()?);
        let e = x.denom().sqrt();
        (&e * &e == *x.denom() && e.pow(3) == *y.denom()).then_some(e)
    }

    /// Negation-invariant representative: y ≥ 0.
    pub fn abs_y(&self) -> CurvePoint {
        match self {
            CurvePoint::Affine { x, y } if y.is_negative() => CurvePoint::Affine {
                x: x.clone(),
                y: -y,
            },
            _ => self.clone(),
        }
    }

    /// Total order used to sort point lists deterministically: identity
    /// first, then by x, then by y.
    pub fn sort_key(&self) -> (bool, Option<(&BigRational, &BigRational)>) {
        match self {
            CurvePoint::Identity => (false, None),
            CurvePoint::Affine { x, y } => (true, Some((x, y))),
        }
    }
}

impl fmt::Display for CurvePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurvePoint::Identity => write!(f, "O"),
            CurvePoint::Affine { x, y } => write!(f, "({x}, {y})"),
        }
    }
}

/// Formats a rational as "num/den", always with an explicit denominator.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses "a" or "a/b".
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Parses "x,y" (each "a" or "a/b") or "O".
pub fn parse_point(s: &str) -> Result<CurvePoint> {
    let s = s.trim();
    if s == "O" {
        return Ok(CurvePoint::Identity);
    }
    let (x, y) = s
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected x,y: {s:?}")))?;
    Ok(CurvePoint::Affine {
        x: parse_rational(x)?,
        y: parse_rational(y)?,
    })
}

impl Serialize for CurvePoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CurvePoint::Identity => s.serialize_str("O"),
            CurvePoint::Affine { x, y } => {
                let mut m = s.serialize_map(Some(2))?;
                m.serialize_entry("x", &format_rational(x))?;
                m.serialize_entry("y", &format_rational(y))?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for CurvePoint {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Identity(String),
            Affine { x: String, y: String },
        }
        match Repr::deserialize(de)? {
            Repr::Identity(s) if s == "O" => Ok(CurvePoint::Identity),
            Repr::Identity(s) => Err(de::Error::custom(format!("unknown point {s:?}"))),
            Repr::Affine { x, y } => Ok(CurvePoint::Affine {
                x: parse_rational(&x).map_err(de::Error::custom)?,
                y: parse_rational(&y).map_err(de::Error::custom)?,
            }),
        }
    }
}

/// A primitive integral solution of Y²Z = X³ + dZ³ with Y, Z ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveTriple {
    pub x: BigInt,
    pub y: BigInt,
    pub z: BigInt,
}

impl PrimitiveTriple {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>, z: impl Into<BigInt>) -> Self {
        Self {
            x: x.into(),
            y: y.into(),
            z: z.into(),
        }
    }

    pub fn gcd(&self) -> BigInt {
        self.x.gcd(&self.y).gcd(&self.z)
    }

    pub fn satisfies(&self, d: i64) -> bool {
        let z3 = self.z.pow(3);
        &self.y * &self.y * &self.z == self.x.pow(3) + BigInt::from(d) * z3
    }

    /// Checks Y ≥ 1, Z ≥ 1, gcd = 1 and the curve equation.
    pub fn validate(&self, d: i64) -> Result<()> {
        if !self.y.is_positive() || !self.z.is_positive() {
            return Err(Error::Domain(format!(
                "triple with Y = {}, Z = {}",
                self.y, self.z
            )));
        }
        if !self.satisfies(d) {
            return Err(Error::TripleOffCurve {
                d,
                x: self.x.to_string(),
                y: self.y.to_string(),
                z: self.z.to_string(),
            });
        }
        let g = self.gcd();
        if !g.is_one() {
            return Err(Error::NotPrimitive(g.to_string()));
        }
        Ok(())
    }

    pub fn to_i64s(&self) -> Option<(i64, i64, i64)> {
        Some((self.x.to_i64()?, self.y.to_i64()?, self.z.to_i64()?))
    }
}

/// Parses "X,Y,Z", optionally wrapped in parentheses. Only the syntax is
/// checked; use [`PrimitiveTriple::validate`] for the curve conditions.
impl FromStr for PrimitiveTriple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected X,Y,Z: {s:?}"));
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: Vec<BigInt> = inner
            .split(',')
            .map(|p| BigInt::from_str(p.trim()).map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match <[BigInt; 3]>::try_from(parts) {
            Ok([x, y, z]) => Ok(PrimitiveTriple { x, y, z }),
            Err(_) => Err(bad()),
        }
    }
}

impl fmt::Display for PrimitiveTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Serializes a big integer as a bare JSON number of any length.
pub(crate) fn raw_int(n: &BigInt) -> Box<RawValue> {
    RawValue::from_string(n.to_string()).expect("decimal integer is valid JSON")
}

pub(crate) fn parse_raw_int<E: de::Error>(raw: &RawValue) -> std::result::Result<BigInt, E> {
    BigInt::from_str(raw.get().trim_matches('"'))
        .map_err(|_| E::custom(format!("not an integer: {}", raw.get())))
}

impl Serialize for PrimitiveTriple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(3))?;
        for v in [&self.x, &self.y, &self.z] {
            seq.serialize_element(&raw_int(v))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PrimitiveTriple {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<Box<RawValue>> = Vec::deserialize(de)?;
        if raw.len() != 3 {
            return Err(de::Error::invalid_length(raw.len(), &"three integers"));
        }
        Ok(PrimitiveTriple {
            x: parse_raw_int(&raw[0])?,
            y: parse_raw_int(&raw[1])?,
            z: parse_raw_int(&raw[2])?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TorsionStructure {
    #[serde(rename = "trivial")]
    Trivial,
    Z2,
    Z3,
    Z6,
}

impl TorsionStructure {
    pub fn order(self) -> u32 {
        match self {
            TorsionStructure::Trivial => 1,
            TorsionStructure::Z2 => 2,
            TorsionStructure::Z3 => 3,
            TorsionStructure::Z6 => 6,
        }
    }

    pub fn from_order(n: usize) -> Option<Self> {
        match n {
            1 => Some(TorsionStructure::Trivial),
            2 => Some(TorsionStructure::Z2),
            3 => Some(TorsionStructure::Z3),
            6 => Some(TorsionStructure::Z6),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorsionClass {
    pub structure: TorsionStructure,
    pub generators: Vec<CurvePoint>,
}
