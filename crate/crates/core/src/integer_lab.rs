//! Integer utilities: gcds, exact roots, square parts, and the
//! sixth-power-free sieve.
//!
//! Everything here works on machine integers. The magnitudes involved
//! (|d| up to about 10^12, search boxes up to 10^18) stay well inside
//! `i128`, so no big-integer arithmetic is needed on these paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// gcd with the convention gcd(0, n) = |n|.
pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    gcd_i128(a as i128, b as i128) as i64
}

/// ⌊√n⌋ for n ≥ 0.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    // f64 seed, then correct by at most a few steps either way.
    let mut r = (n as f64).sqrt() as u128;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Exact square root if `n` is a perfect square.
pub fn exact_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    // Squares mod 64 take only 12 values; reject the rest cheaply.
    if (0x0202_0212_0203_0213u64 >> (n & 63)) & 1 == 0 {
        return None;
    }
    let r = isqrt(n as u128);
    (r * r == n as u128).then_some(r as i128)
}

/// ⌊n^(1/k)⌋ for n ≥ 0 and k ≥ 1.
pub fn iroot(n: u128, k: u32) -> u128 {
    if k == 1 || n < 2 {
        return n;
    }
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u128;
    let pow_le = |r: u128| r.checked_pow(k).is_some_and(|p| p <= n);
    while r > 0 && !pow_le(r) {
        r -= 1;
    }
    while pow_le(r + 1) {
        r += 1;
    }
    r
}

/// Exact (signed) cube root if `n` is a perfect cube.
pub fn exact_cbrt(n: i64) -> Option<i64> {
    let r = iroot(n.unsigned_abs() as u128, 3) as i64;
    (r.pow(3) == n.abs()).then_some(if n < 0 { -r } else { r })
}

/// Prime factorization of |n| by trial division, as (prime, exponent)
/// pairs in increasing order. `factor(1)` is empty.
pub fn factor(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            let mut e = 0;
            while m.is_multiple_of(p) {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Sign, square part and square-free part: d = sign · square_part² · squarefree_part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDecomposition {
    pub sign: i8,
    pub square_part: u64,
    pub squarefree_part: u64,
}

impl SquareDecomposition {
    pub fn reconstruct(&self) -> i128 {
        self.sign as i128 * (self.square_part as i128).pow(2) * self.squarefree_part as i128
    }
}

/// Splits d into sign, largest square divisor root, and square-free part.
pub fn square_part(d: i64) -> Result<SquareDecomposition> {
    if d == 0 {
        return Err(Error::Zero);
    }
    let mut square = 1u64;
    let mut free = 1u64;
    for (p, e) in factor(d.unsigned_abs()) {
        square *= p.pow(e / 2);
        if e % 2 == 1 {
            free *= p;
        }
    }
    Ok(SquareDecomposition {
        sign: d.signum() as i8,
        square_part: square,
        squarefree_part: free,
    })
}

/// True iff no prime p has p⁶ | d.
pub fn is_sixth_power_free(d: i64) -> Result<bool> {
    if d == 0 {
        return Err(Error::Zero);
    }
    let n = d.unsigned_abs();
    let mut p = 2u64;
    while let Some(p6) = p.checked_pow(6).filter(|&q| q <= n) {
        if n.is_multiple_of(p6) {
            return Ok(false);
        }
        p += 1;
    }
    Ok(true)
}

/// Primes ≤ n by the sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// The nonzero sixth-power-free integers in [−X, X], sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SixthPowerFreeSet {
    pub bound: u64,
    pub members: Vec<i64>,
}

impl SixthPowerFreeSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, d: i64) -> bool {
        self.members.binary_search(&d).is_ok()
    }

    /// Members with |d| ≤ x (x may be below the sieve bound).
    pub fn restrict(&self, x: u64) -> SixthPowerFreeSet {
        let members = self
            .members
            .iter()
            .copied()
            .filter(|d| d.unsigned_abs() <= x)
            .collect();
        SixthPowerFreeSet {
            bound: x.min(self.bound),
            members,
        }
    }
}

/// Sieves out multiples of p⁶ in [1, X] and mirrors the survivors.
pub fn sixth_power_free_sieve(x: u64) -> Result<SixthPowerFreeSet> {
    if x < 1 {
        return Err(Error::InvalidParameter(
            "sieve bound must be at least 1".into(),
        ));
    }
    let len = usize::try_from(x).map_err(|_| Error::Overflow("sieve bound"))?;
    let mut excluded = vec![false; len + 1];
    for p in primes_up_to(iroot(x as u128, 6) as u64) {
        let p6 = p.pow(6) as usize;
        for m in (p6..=len).step_by(p6) {
            excluded[m] = true;
        }
    }
    let positive: Vec<i64> = (1..=len)
        .filter(|&n| !excluded[n])
        .map(|n| n as i64)
        .collect();
    let mut members: Vec<i64> = positive.iter().rev().map(|&n| -n).collect();
    members.extend_from_slice(&positive);
    Ok(SixthPowerFreeSet { bound: x, members })
}
