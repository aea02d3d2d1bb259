//! Integer points on ternary forms in boxes |xᵢ| ≤ Bᵢ: exact brute-force
//! counts, the monomial size T, the homogenized parameterization conic,
//! nonsingularity of quadratics, and log-log exponent fits.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: i64,
    pub exps: [u32; 3],
}

/// A homogeneous form in three variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSpec {
    degree: u32,
    monomials: Vec<Monomial>,
}

impl FormSpec {
    pub fn new(monomials: Vec<Monomial>) -> Result<Self> {
        let first = monomials
            .first()
            .ok_or_else(|| Error::InvalidParameter("form has no monomials".into()))?;
        let degree: u32 = first.exps.iter().sum();
        if degree == 0 {
            return Err(Error::InvalidParameter(
                "form must have positive degree".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for m in &monomials {
            if m.coeff == 0 {
                return Err(Error::InvalidParameter("zero coefficient".into()));
            }
            if m.exps.iter().sum::<u32>() != degree {
                return Err(Error::InvalidParameter(format!(
                    "monomial {:?} is not of degree {degree}",
                    m.exps
                )));
            }
            if !seen.insert(m.exps) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate monomial {:?}",
                    m.exps
                )));
            }
        }
        Ok(Self { degree, monomials })
    }

    pub fn from_terms(terms: &[(i64, [u32; 3])]) -> Result<Self> {
        Self::new(
            terms
                .iter()
                .map(|&(coeff, exps)| Monomial { coeff, exps })
                .collect(),
        )
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn coefficient(&self, exps: [u32; 3]) -> i64 {
        self.monomials
            .iter()
            .find(|m| m.exps == exps)
            .map_or(0, |m| m.coeff)
    }

    /// F(x) in i128. Callers must have ruled out overflow (see
    /// [`FormSpec::magnitude_bound`]).
    pub fn eval(&self, x: [i64; 3]) -> i128 {
        self.monomials
            .iter()
            .map(|m| {
                m.coeff as i128
                    * (x[0] as i128).pow(m.exps[0])
                    * (x[1] as i128).pow(m.exps[1])
                    * (x[2] as i128).pow(m.exps[2])
            })
            .sum()
    }

    /// Σ |c|·∏ Bᵢ^fᵢ, an upper bound for |F| on the box, if it fits in i128.
    pub fn magnitude_bound(&self, b: &BoxSpec) -> Option<i128> {
        let sides = b.sides();
        self.monomials.iter().try_fold(0i128, |acc, m| {
            let mut term = (m.coeff as i128).checked_abs()?;
            for (side, e) in sides.iter().zip(m.exps) {
                term = term.checked_mul((*side as i128).checked_pow(e)?)?;
            }
            acc.checked_add(term)
        })
    }
}

impl fmt::Display for FormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .monomials
            .iter()
            .map(|m| format!("{}:{},{},{}", m.coeff, m.exps[0], m.exps[1], m.exps[2]))
            .collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Parses "coeff:e1,e2,e3;coeff:e1,e2,e3;...".
impl FromStr for FormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |t: &str| Error::Parse(format!("bad monomial {t:?}, expected coeff:e1,e2,e3"));
        let mut monomials = Vec::new();
        for term in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (c, e) = term.split_once(':').ok_or_else(|| bad(term))?;
            let coeff = c.trim().parse::<i64>().map_err(|_| bad(term))?;
            let exps: Vec<u32> = e
                .split(',')
                .map(|v| v.trim().parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(term))?;
            let exps: [u32; 3] = exps.try_into().map_err(|_| bad(term))?;
            monomials.push(Monomial { coeff, exps });
        }
        FormSpec::new(monomials)
    }
}

/// The box |x₁| ≤ B₁, |x₂| ≤ B₂, |x₃| ≤ B₃.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub b1: u64,
    pub b2: u64,
    pub b3: u64,
}

impl BoxSpec {
    pub fn new(b1: u64, b2: u64, b3: u64) -> Result<Self> {
        if b1 == 0 || b2 == 0 || b3 == 0 {
            return Err(Error::InvalidParameter(
                "box sides must be at least 1".into(),
            ));
        }
        Ok(Self { b1, b2, b3 })
    }

    pub fn cube(b: u64) -> Result<Self> {
        Self::new(b, b, b)
    }

    pub fn sides(&self) -> [u64; 3] {
        [self.b1, self.b2, self.b3]
    }

    /// V = B₁B₂B₃.
    pub fn volume(&self) -> u128 {
        self.b1 as u128 * self.b2 as u128 * self.b3 as u128
    }
}

/// Number of (x₁, x₂, x₃) in the box with F = 0, the zero triple and
/// non-primitive solutions included.
pub fn count_points(form: &FormSpec, b: &BoxSpec, exec: Exec) -> Result<u64> {
    form.magnitude_bound(b)
        .ok_or(Error::Overflow("form evaluation on box"))?;
    let [b1, b2, b3] = b.sides().map(|s| s as i64);
    Ok(exec.sum_range(-b1..=b1, |x1| {
        let mut n = 0;
        for x2 in -b2..=b2 {
            for x3 in -b3..=b3 {
                if form.eval([x1, x2, x3]) == 0 {
                    n += 1;
                }
            }
        }
        n
    }))
}

/// All solutions in the box, in lexicographic order.
pub fn solutions(form: &FormSpec, b: &BoxSpec) -> Result<Vec<[i64; 3]>> {
    form.magnitude_bound(b)
        .ok_or(Error::Overflow("form evaluation on box"))?;
    let [b1, b2, b3] = b.sides().map(|s| s as i64);
    let mut out = Vec::new();
    for x1 in -b1..=b1 {
        for x2 in -b2..=b2 {
            for x3 in -b3..=b3 {
                if form.eval([x1, x2, x3]) == 0 {
                    out.push([x1, x2, x3]);
                }
            }
        }
    }
    Ok(out)
}

/// T = max over monomials of B₁^f₁·B₂^f₂·B₃^f₃.
pub fn compute_t(form: &FormSpec, b: &BoxSpec) -> Result<u128> {
    let sides = b.sides();
    form.monomials
        .iter()
        .map(|m| {
            sides.iter().zip(m.exps).try_fold(1u128, |acc, (s, e)| {
                acc.checked_mul((*s as u128).checked_pow(e)?)
            })
        })
        .try_fold(1u128, |best, t| Some(best.max(t?)))
        .ok_or(Error::Overflow("monomial size T"))
}

/// y₁² − v²·b₀x₁³ − v·d₁·b₁⁶ as a quadratic form in (d₁, y₁, v).
pub fn homogenize_param_equation(b0: i64, b1: i64, x1: i64) -> Result<FormSpec> {
    if b0 < 1 || b1 < 1 {
        return Err(Error::InvalidParameter(
            "b0 and b1 must be at least 1".into(),
        ));
    }
    let v2 = b0
        .checked_mul(x1.checked_pow(3).ok_or(Error::Overflow("x1^3"))?)
        .ok_or(Error::Overflow("b0 x1^3"))?;
    let dv = b1.checked_pow(6).ok_or(Error::Overflow("b1^6"))?;
    let mut terms = vec![(1, [0, 2, 0])];
    if v2 != 0 {
        terms.push((-v2, [0, 0, 2]));
    }
    terms.push((-dv, [1, 0, 1]));
    FormSpec::from_terms(&terms)
}

/// Determinant of the symmetric Gram matrix of a quadratic form.
pub fn gram_determinant(form: &FormSpec) -> Result<BigRational> {
    if form.degree != 2 {
        return Err(Error::InvalidParameter(format!(
            "Gram matrix needs a quadratic form, got degree {}",
            form.degree
        )));
    }
    // Work with 2M, which is integral: diagonal 2·c(xᵢ²), off-diagonal c(xᵢxⱼ).
    let mut m = [
        [BigInt::zero(), BigInt::zero(), BigInt::zero()],
        [BigInt::zero(), BigInt::zero(), BigInt::zero()],
        [BigInt::zero(), BigInt::zero(), BigInt::zero()],
    ];
    for mono in &form.monomials {
        let c = BigInt::from(mono.coeff);
        let vars: Vec<usize> = (0..3)
            .flat_map(|i| std::iter::repeat_n(i, mono.exps[i] as usize))
            .collect();
        let (i, j) = (vars[0], vars[1]);
        if i == j {
            m[i][i] += 2 * c;
        } else {
            m[i][j] += &c;
            m[j][i] += c;
        }
    }
    let det2 = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
    Ok(BigRational::new(det2, BigInt::from(8)))
}

pub fn is_nonsingular_quadratic(form: &FormSpec) -> Result<bool> {
    Ok(!gram_determinant(form)?.is_zero())
}

/// Ordinary least squares y = slope·x + intercept.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two points to fit".into(),
        ));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
    pub v: u128,
    pub t: u128,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// 2/(3·degree), the nonsingular exponent the slope is compared with.
    pub reference_exponent: f64,
    pub points: Vec<FitPoint>,
    /// Boxes left out of the regression because their count was zero.
    pub excluded_zero_count: Vec<BoxSpec>,
}

/// Fits log N against log V (natural logs) over the given boxes.
pub fn exponent_fit(form: &FormSpec, boxes: &[BoxSpec], exec: Exec) -> Result<ExponentFit> {
    if form.degree < 2 {
        return Err(Error::InvalidParameter(
            "exponent fits need degree at least 2".into(),
        ));
    }
    if boxes.windows(2).any(|w| w[0].volume() >= w[1].volume()) {
        return Err(Error::InvalidParameter(
            "box volumes must be strictly increasing".into(),
        ));
    }
    let mut points = Vec::new();
    let mut excluded_zero_count = Vec::new();
    for b in boxes {
        let n = count_points(form, b, exec)?;
        if n == 0 {
            excluded_zero_count.push(*b);
        } else {
            points.push(FitPoint {
                bounds: *b,
                v: b.volume(),
                t: compute_t(form, b)?,
                n,
            });
        }
    }
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "only {} boxes with nonzero count, need 3",
            points.len()
        )));
    }
    let xy: Vec<(f64, f64)> = points
        .iter()
        .map(|p| ((p.v as f64).ln(), (p.n as f64).ln()))
        .collect();
    let (slope, intercept) = least_squares(&xy)?;
    Ok(ExponentFit {
        slope,
        intercept,
        reference_exponent: 2.0 / (3.0 * form.degree as f64),
        points,
        excluded_zero_count,
    })
}

/// `start`, then every side doubled, `steps` times.
pub fn dyadic_ladder(start: BoxSpec, steps: u32) -> Vec<BoxSpec> {
    (0..=steps)
        .map(|k| BoxSpec {
            b1: start.b1 << k,
            b2: start.b2 << k,
            b3: start.b3 << k,
        })
        .collect()
}

/// Cubes (B, B, B) with B doubling from ⌈v_min^⅓⌉ while B³ ≤ v_max, closed
/// off by ⌊v_max^⅓⌋.
pub fn cube_ladder(v_min: u64, v_max: u64) -> Result<Vec<BoxSpec>> {
    let lo = crate::integer_lab::iroot(v_min as u128 - 1, 3) as u64 + 1;
    let hi = crate::integer_lab::iroot(v_max as u128, 3) as u64;
    if lo == 0 || lo > hi {
        return Err(Error::InvalidParameter("empty volume range".into()));
    }
    let mut sides = Vec::new();
    let mut b = lo;
    while b <= hi {
        sides.push(b);
        b *= 2;
    }
    if sides.last() != Some(&hi) {
        sides.push(hi);
    }
    sides.into_iter().map(BoxSpec::cube).collect()
}

/// The two bounds attached to a box: the general T^(−d²)·V^(1/d) and the
/// nonsingular V^(2/(3d)), with the ε′ terms dropped. Reported, never
/// asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundTerms {
    pub general: f64,
    pub nonsingular: f64,
}

pub fn bound_terms(form: &FormSpec, b: &BoxSpec) -> Result<BoundTerms> {
    let d = form.degree as f64;
    let t = compute_t(form, b)? as f64;
    let v = b.volume() as f64;
    Ok(BoundTerms {
        general: (-d * d * t.ln() + v.ln() / d).exp(),
        nonsingular: (2.0 * v.ln() / (3.0 * d)).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(a: u64, b: u64, c: u64) -> BoxSpec {
        BoxSpec::new(a, b, c).unwrap()
    }

    fn conic() -> FormSpec {
        homogenize_param_equation(1, 1, 1).unwrap()
    }

    #[test]
    fn form_validation_and_parsing() {
        let f: FormSpec = "1:0,2,0;-1:0,0,2;-1:1,0,1".parse().unwrap();
        assert_eq!(f, conic());
        assert_eq!(f.to_string().parse::<FormSpec>().unwrap(), f);
        assert!("1:1,1,0;2:1,1,0".parse::<FormSpec>().is_err());
        assert!("1:2,0,0;1:1,0,0".parse::<FormSpec>().is_err());
        assert!("0:2,0,0".parse::<FormSpec>().is_err());
        assert!("".parse::<FormSpec>().is_err());
        assert!("1:2,0".parse::<FormSpec>().is_err());
        assert!(BoxSpec::new(0, 1, 1).is_err());
    }

    #[test]
    fn count_examples() {
        let sum_sq =
            FormSpec::from_terms(&[(1, [2, 0, 0]), (1, [0, 2, 0]), (1, [0, 0, 2])]).unwrap();
        assert_eq!(
            count_points(&sum_sq, &bx(1, 1, 1), Exec::Sequential).unwrap(),
            1
        );
        assert_eq!(
            count_points(&conic(), &bx(10, 10, 1), Exec::Sequential).unwrap(),
            35
        );
        let xyz = FormSpec::from_terms(&[(1, [1, 1, 1])]).unwrap();
        // Oracle: 5³ triples minus the 4³ with every coordinate nonzero.
        let oracle = (-2..=2i64)
            .flat_map(|a| (-2..=2i64).flat_map(move |b| (-2..=2i64).map(move |c| a * b * c)))
            .filter(|&p| p == 0)
            .count() as u64;
        assert_eq!(oracle, 125 - 64);
        assert_eq!(
            count_points(&xyz, &bx(2, 2, 2), Exec::Sequential).unwrap(),
            oracle
        );
    }

    #[test]
    fn conic_count_by_slice() {
        let sols = solutions(&conic(), &bx(10, 10, 1)).unwrap();
        assert_eq!(sols.iter().filter(|s| s[2] == 0).count(), 21);
        assert_eq!(sols.iter().filter(|s| s[2] == 1).count(), 7);
        assert_eq!(sols.iter().filter(|s| s[2] == -1).count(), 7);
    }

    #[test]
    fn t_examples() {
        assert_eq!(compute_t(&conic(), &bx(10, 10, 1)).unwrap(), 100);
        assert_eq!(compute_t(&conic(), &bx(1, 1, 1)).unwrap(), 1);
        let cube = FormSpec::from_terms(&[(1, [3, 0, 0])]).unwrap();
        assert_eq!(compute_t(&cube, &bx(2, 5, 7)).unwrap(), 8);
    }

    #[test]
    fn homogenize_examples() {
        let f = homogenize_param_equation(1, 1, 1).unwrap();
        assert_eq!(f.coefficient([0, 2, 0]), 1);
        assert_eq!(f.coefficient([0, 0, 2]), -1);
        assert_eq!(f.coefficient([1, 0, 1]), -1);
        let f = homogenize_param_equation(2, 1, 3).unwrap();
        assert_eq!(f.coefficient([0, 0, 2]), -54);
        assert_eq!(f.coefficient([1, 0, 1]), -1);
        let f = homogenize_param_equation(1, 2, 1).unwrap();
        assert_eq!(f.coefficient([0, 0, 2]), -1);
        assert_eq!(f.coefficient([1, 0, 1]), -64);
        assert!(homogenize_param_equation(0, 1, 1).is_err());
    }

    #[test]
    fn gram_examples() {
        assert_eq!(
            gram_determinant(&conic()).unwrap(),
            BigRational::new((-1).into(), 4.into())
        );
        assert!(is_nonsingular_quadratic(&conic()).unwrap());
        let x1sq = FormSpec::from_terms(&[(1, [2, 0, 0])]).unwrap();
        assert!(!is_nonsingular_quadratic(&x1sq).unwrap());
        let cubic = FormSpec::from_terms(&[(1, [3, 0, 0])]).unwrap();
        assert!(is_nonsingular_quadratic(&cubic).is_err());
    }

    #[test]
    fn fit_examples() {
        let sum_sq =
            FormSpec::from_terms(&[(1, [2, 0, 0]), (1, [0, 2, 0]), (1, [0, 0, 2])]).unwrap();
        let fit = exponent_fit(&sum_sq, &dyadic_ladder(bx(2, 2, 2), 3), Exec::Sequential).unwrap();
        assert_eq!(fit.slope, 0.0);
        let linear = FormSpec::from_terms(&[(1, [1, 0, 0]), (-1, [0, 1, 0])]).unwrap();
        assert!(exponent_fit(&linear, &dyadic_ladder(bx(2, 2, 2), 3), Exec::Sequential).is_err());
        let two = dyadic_ladder(bx(2, 2, 2), 1);
        assert!(exponent_fit(&conic(), &two, Exec::Sequential).is_err());
        let unsorted = vec![bx(4, 4, 4), bx(2, 2, 2), bx(8, 8, 8)];
        assert!(exponent_fit(&conic(), &unsorted, Exec::Sequential).is_err());
        let (s, i) = least_squares(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && (i - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ladders() {
        let l = cube_ladder(1000, 10_000_000).unwrap();
        assert_eq!(l.first().unwrap().b1, 10);
        assert_eq!(l.last().unwrap().b1, 215);
        assert!(l.windows(2).all(|w| w[0].volume() < w[1].volume()));
        assert_eq!(
            dyadic_ladder(bx(1, 2, 3), 2).last().unwrap().sides(),
            [4, 8, 12]
        );
    }

    #[test]
    fn strategies_agree_on_counts() {
        let b = bx(40, 40, 40);
        assert_eq!(
            count_points(&conic(), &b, Exec::Sequential).unwrap(),
            count_points(&conic(), &b, Exec::Parallel).unwrap()
        );
    }

    proptest! {
        #[test]
        fn setting_v_to_one_gives_the_residual(b0 in 1i64..20, b1 in 1i64..4, x1 in -30i64..30,
                                                d1 in -1000i64..1000, y1 in -1000i64..1000) {
            let f = homogenize_param_equation(b0, b1, x1).unwrap();
            let residual = (y1 as i128).pow(2) - b0 as i128 * (x1 as i128).pow(3)
                - d1 as i128 * (b1 as i128).pow(6);
            prop_assert_eq!(f.eval([d1, y1, 1]), residual);
        }

        #[test]
        fn homogenized_forms_are_nonsingular(b0 in 1i64..50, b1 in 1i64..6, x1 in -100i64..100) {
            let f = homogenize_param_equation(b0, b1, x1).unwrap();
            let det = gram_determinant(&f).unwrap();
            prop_assert_eq!(det, BigRational::new(-BigInt::from(b1).pow(12), 4.into()));
        }

        #[test]
        fn negation_preserves_solution_set(b0 in 1i64..4, b1 in 1i64..3, x1 in -3i64..3,
                                           s1 in 1u64..8, s2 in 1u64..8, s3 in 1u64..4) {
            let f = homogenize_param_equation(b0, b1, x1).unwrap();
            let sols = solutions(&f, &bx(s1, s2, s3)).unwrap();
            let mut neg: Vec<[i64; 3]> = sols.iter().map(|s| s.map(|v| -v)).collect();
            neg.sort();
            prop_assert!(neg.iter().all(|s| f.eval(*s) == 0));
            prop_assert_eq!(neg, sols);
        }

        #[test]
        fn t_monotone(s in prop::array::uniform3(1u64..50), k in 0usize..3) {
            let f = conic();
            let b = bx(s[0], s[1], s[2]);
            let mut bigger = s;
            bigger[k] += 1;
            let t = compute_t(&f, &b).unwrap();
            prop_assert!(t >= 1);
            prop_assert!(t <= b.volume().pow(f.degree()));
            prop_assert!(compute_t(&f, &bx(bigger[0], bigger[1], bigger[2])).unwrap() >= t);
        }
    }
}
