//! Bounded point search through the parameterization, a brute-force
//! projective scan used as an independent oracle, and ζ_d witnesses.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::curve::{CurvePoint, MordellCurve, PrimitiveTriple};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::heights::{canonical_height, height_f};
use crate::integer_lab::{exact_sqrt, factor, gcd_i128, iroot, isqrt};
use crate::param::{recompose, Decomposition};

/// Bound B on max(|b₀x₁³|, y₁²).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SearchBound(u64);

impl SearchBound {
    pub fn new(b: u64) -> Result<Self> {
        if b == 0 {
            return Err(Error::InvalidParameter(
                "search height must be at least 1".into(),
            ));
        }
        Ok(Self(b))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

/// A point found by [`enumerate_found`], with the data that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FoundPoint {
    pub point: CurvePoint,
    pub triple: PrimitiveTriple,
    pub decomposition: Decomposition,
}

/// All (b₀, b₁, d₁, x₁, y₁) with y₁ ≥ 1 and box value ≤ B, recomposed into
/// points. One representative per ± pair (the one with y > 0); points with
/// y = 0 are 2-torsion and are not produced.
pub fn enumerate_found(curve: &MordellCurve, bound: SearchBound) -> Vec<FoundPoint> {
    let d = curve.d() as i128;
    let b = bound.get() as i128;
    let mut out = Vec::new();
    let max_b0 = isqrt(d.unsigned_abs()) as i128;
    for b0 in (1..=max_b0).filter(|b0| d % (b0 * b0) == 0) {
        let d1 = d / (b0 * b0);
        let x_max = iroot((b / b0) as u128, 3) as i128;
        // |d₁|b₁⁶ = |y₁² − b₀x₁³| ≤ 2B
        let b1_max = iroot((2 * b / d1.abs()) as u128, 6) as i128;
        for b1 in 1..=b1_max {
            if gcd_i128(b0, b1) != 1 {
                continue;
            }
            let shift = d1 * b1.pow(6);
            for x1 in -x_max..=x_max {
                if gcd_i128(b1, x1) != 1 {
                    continue;
                }
                let rhs = b0 * x1.pow(3) + shift;
                if rhs < 1 || rhs > b {
                    continue;
                }
                let Some(y1) = exact_sqrt(rhs) else { continue };
                if gcd_i128(b1 * x1, y1) != 1 {
                    continue;
                }
                let dec = Decomposition::new(b0 as i64, b1 as i64, d1 as i64, x1 as i64, y1 as i64);
                let (_, triple) = recompose(&dec).expect("coprimality checked above");
                let z = BigRational::from_integer(triple.z.clone());
                let point = CurvePoint::Affine {
                    x: BigRational::from_integer(triple.x.clone()) / &z,
                    y: BigRational::from_integer(triple.y.clone()) / z,
                };
                out.push(FoundPoint {
                    point,
                    triple,
                    decomposition: dec,
                });
            }
        }
    }
    out.sort_by(|a, b| a.point.sort_key().cmp(&b.point.sort_key()));
    out
}

/// Every rational point (up to sign) whose decomposition has
/// max(|b₀x₁³|, y₁²) ≤ B.
pub fn enumerate_points(curve: &MordellCurve, bound: SearchBound) -> Vec<CurvePoint> {
    enumerate_found(curve, bound)
        .into_iter()
        .map(|f| f.point)
        .collect()
}

/// Smallest r with z | r³, i.e. ∏ p^⌈e/3⌉ over z = ∏ p^e.
fn cube_divisor_step(z: u64) -> i128 {
    factor(z)
        .iter()
        .map(|&(p, e)| (p as i128).pow(e.div_ceil(3)))
        .product()
}

/// Brute-force scan of Y²Z = X³ + dZ³ over |X| ≤ x_bound, y_min ≤ Y ≤ y_bound,
/// 1 ≤ Z ≤ z_bound with gcd(X, Y, Z) = 1. Y is solved for rather than
/// looped over, and X runs only over values with Z | X³, which the
/// equation forces. Returned as affine points with y ≥ 0, sorted.
pub fn brute_force_affine(
    curve: &MordellCurve,
    x_bound: u64,
    y_min: u64,
    y_bound: u64,
    z_bound: u64,
    exec: Exec,
) -> Vec<CurvePoint> {
    let d = curve.d() as i128;
    let per_z = exec.map_range(1..=z_bound as i64, |z| {
        let z = z as i128;
        let step = cube_divisor_step(z as u64);
        let x_max = (x_bound as i128 / step) * step;
        let mut found = Vec::new();
        let mut x = -x_max;
        while x <= x_max {
            let rhs = x.pow(3) + d * z.pow(3);
            if rhs >= 0 && rhs % z == 0 {
                if let Some(y) = exact_sqrt(rhs / z) {
                    if y >= y_min as i128
                        && y <= y_bound as i128
                        && gcd_i128(gcd_i128(x, y), z) == 1
                    {
                        let zq = BigRational::from_integer(z.into());
                        found.push(CurvePoint::Affine {
                            x: BigRational::from_integer(x.into()) / &zq,
                            y: BigRational::from_integer(y.into()) / zq,
                        });
                    }
                }
            }
            x += step;
        }
        found
    });
    let mut out: Vec<CurvePoint> = per_z.into_iter().flatten().collect();
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    out
}

/// All primitive triples with |X| ≤ c, 1 ≤ Y ≤ c, 1 ≤ Z ≤ c.
pub fn brute_force_triples(
    curve: &MordellCurve,
    x_bound: u64,
    y_bound: u64,
    z_bound: u64,
    exec: Exec,
) -> Vec<PrimitiveTriple> {
    brute_force_affine(curve, x_bound, 1, y_bound, z_bound, exec)
        .iter()
        .map(|p| {
            curve
                .to_primitive_triple(p)
                .expect("scan yields primitive points")
        })
        .collect()
}

/// Points of all primitive triples with every coordinate bounded by
/// `coord_bound` (Y ≥ 1).
pub fn brute_force_points(curve: &MordellCurve, coord_bound: u64) -> Vec<CurvePoint> {
    brute_force_affine(
        curve,
        coord_bound,
        1,
        coord_bound,
        coord_bound,
        Exec::Sequential,
    )
}

/// A non-torsion point with its heights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPoint {
    pub point: CurvePoint,
    pub hhat: f64,
    pub h_f: f64,
    /// max(|b₀x₁³|, y₁²) of the point's decomposition.
    pub box_value: u64,
}

/// Everything the search learned about one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveScan {
    pub torsion_found: usize,
    pub nontorsion: Vec<ScoredPoint>,
}

/// Enumerates, separates torsion (6P = O) from non-torsion points, and
/// computes heights of the latter.
pub fn scan(curve: &MordellCurve, bound: SearchBound, tol: f64) -> Result<CurveScan> {
    let mut torsion_found = 0;
    let mut nontorsion = Vec::new();
    for found in enumerate_found(curve, bound) {
        let p = found.point;
        if curve.is_torsion(&p)? {
            torsion_found += 1;
            continue;
        }
        let hhat = canonical_height(curve, &p, tol)?.value;
        if hhat <= tol {
            return Err(Error::Invariant(format!(
                "non-torsion point {p} on d = {} has canonical height {hhat}",
                curve.d()
            )));
        }
        let box_value = found
            .decomposition
            .box_value()
            .to_u64()
            .expect("box value is at most B");
        nontorsion.push(ScoredPoint {
            h_f: height_f(&p).value,
            point: p,
            hhat,
            box_value,
        });
    }
    Ok(CurveScan {
        torsion_found,
        nontorsion,
    })
}

/// Bounded-search surrogate for log ζ_d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ZetaResult {
    /// Minimal ĥ among non-torsion points found, and a point attaining it.
    Found { value: f64, witness: CurvePoint },
    /// No non-torsion point lies inside the search box. Says nothing about
    /// the rank.
    NoneFound { bound: SearchBound },
}

impl ZetaResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            ZetaResult::Found { value, .. } => Some(*value),
            ZetaResult::NoneFound { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&CurvePoint> {
        match self {
            ZetaResult::Found { witness, .. } => Some(witness),
            ZetaResult::NoneFound { .. } => None,
        }
    }

    pub fn from_scan(scan: &CurveScan, bound: SearchBound) -> Self {
        // Ties keep the earliest point in sorted order.
        let best = scan
            .nontorsion
            .iter()
            .fold(None::<&ScoredPoint>, |best, p| match best {
                Some(b) if b.hhat <= p.hhat => Some(b),
                _ => Some(p),
            });
        match best {
            Some(p) => ZetaResult::Found {
                value: p.hhat,
                witness: p.point.clone(),
            },
            None => ZetaResult::NoneFound { bound },
        }
    }
}

pub fn zeta(curve: &MordellCurve, bound: SearchBound, tol: f64) -> Result<ZetaResult> {
    Ok(ZetaResult::from_scan(&scan(curve, bound, tol)?, bound))
}

/// Box value of a point's decomposition, for comparisons against B.
pub fn box_value_of(curve: &MordellCurve, p: &CurvePoint) -> Result<BigInt> {
    let t = curve.to_primitive_triple(p)?;
    Ok(crate::param::decompose(curve, &t)?.box_value())
}
