//! Naive heights, the degree-6 height attached to f = x³/y², and the
//! canonical height.
//!
//! Normalization: ĥ(P) = lim 4⁻ⁿ·h_x(2ⁿP)/2, so that 6ĥ = h_f + O(1).
//!
//! # Computing ĥ
//!
//! Write x(2ⁿP) = Aₙ/Bₙ in lowest terms and Hₙ = log max(|Aₙ|, |Bₙ|). The
//! duplication map on x is the pair of quartic forms
//!
//! ```text
//! φ₁(A, B) = A⁴ − 8dAB³,    φ₂(A, B) = 4B(A³ + dB³),
//! ```
//!
//! so (Aₙ₊₁, Bₙ₊₁) = (φ₁, φ₂)(Aₙ, Bₙ) / gₙ with gₙ = gcd(φ₁, φ₂). Splitting
//! off the size of (Aₙ, Bₙ) gives the exact recursion
//!
//! ```text
//! Hₙ₊₁ = 4Hₙ + rₙ − log gₙ,    rₙ = log max(|φ₁(u)|, |φ₂(u)|),
//! ```
//!
//! where u is (Aₙ, Bₙ) scaled to max-norm 1. rₙ is computed in floating
//! point by iterating the real duplication map on u. gₙ divides
//! Res(φ₁, φ₂) = ±2⁸·3⁶·d⁴, so only primes dividing 6d contribute, and for
//! each such p the valuation v_p(gₙ) is read off (Aₙ : Bₙ) tracked modulo a
//! large enough power of p. Then
//!
//! ```text
//! ĥ(P) = ½·(H₀ + Σₙ 4⁻⁽ⁿ⁺¹⁾·(rₙ − log gₙ)),
//! ```
//!
//! which is the doubling limit itself with no big-integer growth.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::curve::{CurvePoint, MordellCurve};
use crate::error::{Error, Result};
use crate::integer_lab::factor;

/// A height on the natural-log scale with the accuracy it was computed to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeightValue {
    pub value: f64,
    pub tolerance: f64,
}

impl HeightValue {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            tolerance: 0.0,
        }
    }
}

/// Natural log of |n| for n ≠ 0, accurate for integers of any size.
pub fn big_ln(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// |n| as a mantissa in [1, 2^64) and a power-of-two exponent.
fn split_f64(n: &BigInt) -> (f64, i64) {
    let bits = n.bits();
    let shift = bits.saturating_sub(64);
    let m = (n.abs() >> shift).to_f64().expect("64-bit value");
    let m = if n.sign() == Sign::Minus { -m } else { m };
    (m, shift as i64)
}

/// n/m as f64, without overflow for huge operands.
fn ratio_f64(n: &BigInt, m: &BigInt) -> f64 {
    let (a, ea) = split_f64(n);
    let (b, eb) = split_f64(m);
    let e = (ea - eb).clamp(-2000, 2000) as i32;
    (a / b) * 2f64.powi(e)
}

/// max(|a|, |b|) for the x-coordinate a/b in lowest terms; 1 at the identity.
pub fn naive_height_x_arg(p: &CurvePoint) -> BigInt {
    match p.x() {
        None => BigInt::one(),
        Some(x) => x.numer().abs().max(x.denom().abs()),
    }
}

/// Weil height of x(P): log max(|a|, |b|). Exact (tolerance 0).
pub fn naive_height_x(p: &CurvePoint) -> HeightValue {
    HeightValue::exact(big_ln(&naive_height_x_arg(p)))
}

/// max(|p|, |q|) for x³/y² = p/q in lowest terms. The identity maps to
/// [1:1] and points with y = 0 to [1:0]; both give 1.
pub fn height_f_arg(p: &CurvePoint) -> BigInt {
    let (x, y) = match p {
        CurvePoint::Identity => return BigInt::one(),
        CurvePoint::Affine { x, y } => (x, y),
    };
    if y.is_zero() {
        return BigInt::one();
    }
    let f = x * x * x / (y * y);
    f.numer().abs().max(f.denom().abs())
}

/// h_f(P) = log max(|p|, |q|) where x³/y² = p/q. Exact (tolerance 0).
pub fn height_f(p: &CurvePoint) -> HeightValue {
    HeightValue::exact(big_ln(&height_f_arg(p)))
}

/// v_p(Res(φ₁, φ₂)) with Res = ±2⁸·3⁶·d⁴.
fn resultant_valuation(p: u64, d_valuation: u32) -> u32 {
    let base = match p {
        2 => 8,
        3 => 6,
        _ => 0,
    };
    base + 4 * d_valuation
}

/// ln |Res(φ₁, φ₂)|.
fn resultant_ln(d: i64) -> f64 {
    8.0 * std::f64::consts::LN_2 + 6.0 * 3f64.ln() + 4.0 * (d.unsigned_abs() as f64).ln()
}

/// Tracks the projective point (A : B) in ℤ_p modulo p^k.
struct PadicTrack {
    p: BigInt,
    ln_p: f64,
    max_valuation: u32,
    precision: u32,
    modulus: BigInt,
    a: BigInt,
    b: BigInt,
}

impl PadicTrack {
    fn new(p: u64, max_valuation: u32, steps: u32, a: &BigInt, b: &BigInt) -> Self {
        let precision = (steps + 2) * max_valuation + 2;
        let pb = BigInt::from(p);
        let modulus = pb.pow(precision);
        Self {
            a: a.mod_floor(&modulus),
            b: b.mod_floor(&modulus),
            p: pb,
            ln_p: (p as f64).ln(),
            max_valuation,
            precision,
            modulus,
        }
    }

    fn valuation(&self, r: &BigInt) -> u32 {
        if r.is_zero() {
            return self.precision;
        }
        let mut v = 0;
        let mut r = r.clone();
        while v < self.precision && r.is_multiple_of(&self.p) {
            r /= &self.p;
            v += 1;
        }
        v
    }

    /// Applies one duplication step and returns v_p(gₙ).
    fn step(&mut self, d: &BigInt) -> Result<u32> {
        let m = &self.modulus;
        let a2 = (&self.a * &self.a) % m;
        let a3 = (&a2 * &self.a) % m;
        let b2 = (&self.b * &self.b) % m;
        let b3 = (&b2 * &self.b) % m;
        let phi1 = (&a3 * &self.a - BigInt::from(8) * d * &self.a % m * &b3).mod_floor(m);
        let phi2 = (BigInt::from(4) * &self.b * ((&a3 + d * &b3) % m)).mod_floor(m);
        let v = self.valuation(&phi1).min(self.valuation(&phi2));
        if v > self.max_valuation {
            return Err(Error::Invariant(format!(
                "v_{}(gcd) = {v} exceeds the resultant bound {}",
                self.p, self.max_valuation
            )));
        }
        let pv = self.p.pow(v);
        self.precision -= v;
        self.modulus = &self.modulus / &pv;
        self.a = (phi1 / &pv).mod_floor(&self.modulus);
        self.b = (phi2 / &pv).mod_floor(&self.modulus);
        Ok(v)
    }
}

/// Number of duplication steps needed for the truncated series to be
/// within `tol` of the limit.
fn steps_for(d: i64, tol: f64) -> u32 {
    // Each term is bounded by ln|Res| plus the archimedean size of φ on the
    // unit box, with generous slack for the lower side of rₙ.
    let c = 2.0 * resultant_ln(d) + ((8 * d.unsigned_abs() + 4) as f64).ln() + 10.0;
    let n = ((c / (3.0 * tol)).ln() / 4f64.ln()).ceil() as i64 + 1;
    n.clamp(8, 60) as u32
}

/// The per-step quantities of the duplication series for a non-torsion
/// point: H₀ and the pairs (rₙ, log gₙ).
#[derive(Debug, Clone)]
pub struct DuplicationSeries {
    pub h0: f64,
    pub archimedean: Vec<f64>,
    pub gcd_logs: Vec<f64>,
}

impl DuplicationSeries {
    /// Predicted Hₙ for n = 0..=steps.
    pub fn partial_heights(&self) -> Vec<f64> {
        let mut out = vec![self.h0];
        let mut h = self.h0;
        for (r, g) in self.archimedean.iter().zip(&self.gcd_logs) {
            h = 4.0 * h + r - g;
            out.push(h);
        }
        out
    }

    pub fn limit(&self) -> f64 {
        let mut sum = 0.0;
        let mut w = 1.0;
        for (r, g) in self.archimedean.iter().zip(&self.gcd_logs) {
            w /= 4.0;
            sum += w * (r - g);
        }
        0.5 * (self.h0 + sum)
    }
}

/// Runs `steps` duplication steps of the series for an affine point.
pub fn duplication_series(
    curve: &MordellCurve,
    p: &CurvePoint,
    steps: u32,
) -> Result<DuplicationSeries> {
    let x = p.x().ok_or_else(|| Error::Domain("the identity".into()))?;
    if !curve.contains(p) {
        return Err(Error::OffCurve { d: curve.d() });
    }
    let (a0, b0) = (x.numer().clone(), x.denom().clone());
    let h0 = big_ln(&a0.abs().max(b0.clone()));

    let d = curve.d();
    let df = d as f64;
    let (mut ua, mut ub) = if a0.abs() >= b0 {
        (
            if a0.is_negative() { -1.0 } else { 1.0 },
            ratio_f64(&b0, &a0.abs()),
        )
    } else {
        (ratio_f64(&a0, &b0), 1.0)
    };
    let mut archimedean = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let (a2, b3) = (ua * ua, ub * ub * ub);
        let p1 = ua * (a2 * ua - 8.0 * df * b3);
        let p2 = 4.0 * ub * (a2 * ua + df * b3);
        let m = p1.abs().max(p2.abs());
        archimedean.push(m.ln());
        ua = p1 / m;
        ub = p2 / m;
    }

    let mut bad: Vec<(u64, u32)> = factor(d.unsigned_abs());
    for q in [2u64, 3] {
        if !bad.iter().any(|&(p, _)| p == q) {
            bad.push((q, 0));
        }
    }
    let dbig = BigInt::from(d);
    let mut gcd_logs = vec![0.0; steps as usize];
    for (prime, e) in bad {
        let mut track = PadicTrack::new(prime, resultant_valuation(prime, e), steps, &a0, &b0);
        for g in gcd_logs.iter_mut() {
            let v = track.step(&dbig)?;
            *g += v as f64 * track.ln_p;
        }
    }
    Ok(DuplicationSeries {
        h0,
        archimedean,
        gcd_logs,
    })
}

/// ĥ(P) to within `tol`. Torsion points (6P = O) get exactly 0.
pub fn canonical_height(curve: &MordellCurve, p: &CurvePoint, tol: f64) -> Result<HeightValue> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if curve.is_torsion(p)? {
        return Ok(HeightValue {
            value: 0.0,
            tolerance: tol,
        });
    }
    let series = duplication_series(curve, p, steps_for(curve.d(), tol))?;
    Ok(HeightValue {
        value: series.limit(),
        tolerance: tol,
    })
}

/// 6·ĥ(P) − h_f(P).
pub fn height_gap(curve: &MordellCurve, p: &CurvePoint, tol: f64) -> Result<f64> {
    if p.is_identity() {
        return Err(Error::Domain("the identity".into()));
    }
    let hhat = canonical_height(curve, p, tol)?;
    Ok(6.0 * hhat.value - height_f(p).value)
}
