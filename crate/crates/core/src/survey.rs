//! Surveys over d ∈ S₆(X): per-curve ζ_d searches, the counting quantities
//! N_α, N_{α,ε}, N*_α, N*_{α,ε}, density ladders, and an NDJSON record cache.
//!
//! Conventions:
//! * ζ_d < |d|^α is tested as min ĥ < α·log|d|.
//! * Curves with no non-torsion point inside the search box count as
//!   non-violators.
//! * N*_{α,ε} counts points with h_f < 6α·log|d| + log C with implied
//!   constant C = 1.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::curve::MordellCurve;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::heights::{canonical_height, height_f};
use crate::integer_lab::{sixth_power_free_sieve, square_part};
use crate::search::{box_value_of, scan, CurveScan, ScoredPoint, SearchBound, ZetaResult};

/// Implied constant used in the N*_{α,ε} height condition.
pub const IMPLIED_CONSTANT: f64 = 1.0;

pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyParams {
    pub max_x: u64,
    pub alpha: f64,
    pub epsilon: f64,
    pub bound: SearchBound,
    pub tol: f64,
}

impl SurveyParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_x < 1 {
            return Err(Error::InvalidParameter("X must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {} not in (0, 1)",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon = {} not in (0, 1)",
                self.epsilon
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        Ok(())
    }
}

/// What the search found for one d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    pub d: i64,
    pub square_part: u64,
    pub zeta_outcome: ZetaResult,
    pub hhat_min: Option<f64>,
    pub h_f_min: Option<f64>,
    pub search_bound: SearchBound,
    pub tol: f64,
    /// Every non-torsion point found (y > 0 representatives).
    pub points: Vec<ScoredPoint>,
}

impl SurveyRecord {
    pub fn compute(d: i64, bound: SearchBound, tol: f64) -> Result<Self> {
        let curve = MordellCurve::new(d)?;
        let scan = scan(&curve, bound, tol)?;
        let zeta = ZetaResult::from_scan(&scan, bound);
        Self::assemble(d, bound, tol, zeta, scan.nontorsion)
    }

    fn assemble(
        d: i64,
        bound: SearchBound,
        tol: f64,
        zeta_outcome: ZetaResult,
        points: Vec<ScoredPoint>,
    ) -> Result<Self> {
        let h_f_min = points.iter().map(|p| p.h_f).reduce(f64::min);
        Ok(Self {
            d,
            square_part: square_part(d)?.square_part,
            hhat_min: zeta_outcome.value(),
            zeta_outcome,
            h_f_min,
            search_bound: bound,
            tol,
            points,
        })
    }

    /// The record a smaller search would have produced.
    pub fn restrict(&self, bound: SearchBound) -> Result<Self> {
        if bound > self.search_bound {
            return Err(Error::InvalidParameter(
                "cannot widen a finished search".into(),
            ));
        }
        let points: Vec<ScoredPoint> = self
            .points
            .iter()
            .filter(|p| p.box_value <= bound.get())
            .cloned()
            .collect();
        let scan = CurveScan {
            torsion_found: 0,
            nontorsion: points,
        };
        let zeta = ZetaResult::from_scan(&scan, bound);
        let points = scan.nontorsion;
        Self::assemble(self.d, bound, self.tol, zeta, points)
    }

    /// Re-derives everything that can be checked cheaply: square part, curve
    /// membership, non-torsion, box values, the witness height and the
    /// Found/hhat_min correspondence.
    pub fn verify(&self) -> Result<()> {
        let bad = |what: String| {
            Err(Error::Invariant(format!(
                "record for d = {}: {what}",
                self.d
            )))
        };
        let curve = MordellCurve::new(self.d)?;
        if square_part(self.d)?.square_part != self.square_part {
            return bad("square part mismatch".into());
        }
        if self.hhat_min != self.zeta_outcome.value() {
            return bad("hhat_min disagrees with the outcome".into());
        }
        for p in &self.points {
            if !curve.contains(&p.point) {
                return bad(format!("{} is not on the curve", p.point));
            }
            if curve.is_torsion(&p.point)? {
                return bad(format!("{} is torsion", p.point));
            }
            let bv = box_value_of(&curve, &p.point)?;
            if bv != BigInt::from(p.box_value) || p.box_value > self.search_bound.get() {
                return bad(format!("{} has box value {bv}", p.point));
            }
            if height_f(&p.point).value != p.h_f {
                return bad(format!("{} has wrong h_f", p.point));
            }
        }
        match &self.zeta_outcome {
            ZetaResult::Found { value, witness } => {
                let Some(w) = self.points.iter().find(|p| &p.point == witness) else {
                    return bad("witness is not among the points".into());
                };
                let h = canonical_height(&curve, witness, self.tol)?.value;
                if (h - value).abs() > 10.0 * self.tol || w.hhat != *value {
                    return bad(format!("witness height {value} does not recompute ({h})"));
                }
                if self.points.iter().any(|p| p.hhat < *value) {
                    return bad("witness is not minimal".into());
                }
            }
            ZetaResult::NoneFound { bound } => {
                if !self.points.is_empty() || *bound != self.search_bound {
                    return bad("NoneFound record carries points".into());
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SurveyCounts {
    /// #{d : ζ_d < |d|^α}
    pub n_alpha: u64,
    /// #{d : □(d) < |d|^ε, ζ_d < |d|^α}
    pub n_alpha_eps: u64,
    /// Σ_d #{P : ĥ(P) < α log|d|}
    pub n_star_alpha: u64,
    /// Σ_{d : □(d) < X^ε} #{P : h_f(P) < 6α log|d| + log C}
    pub n_star_alpha_eps: u64,
    /// #S₆(X)
    pub s6_size: u64,
    /// #{d : □(d) ≥ X^ε}
    pub square_part_tail: u64,
}

/// How the curves counted by N_{α,ε} compare with the h_f condition of
/// N*_{α,ε}. The correspondence between the two holds only up to the
/// implied constant, so this is reported rather than enforced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpliedConstantCheck {
    /// Curves counted by N_{α,ε} with no found point satisfying
    /// h_f < 6α log|d| + log C.
    pub shortfall: u64,
    /// Smallest log C for which there would be no shortfall (0 if none).
    pub min_log_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyTable {
    pub x: u64,
    pub alpha: f64,
    pub epsilon: f64,
    pub bound: SearchBound,
    pub tol: f64,
    pub implied_constant: f64,
    /// Counting conventions, carried with the numbers.
    pub notes: Vec<String>,
    pub counts: SurveyCounts,
    pub implied_constant_check: ImpliedConstantCheck,
    pub records: Vec<SurveyRecord>,
}

impl SurveyTable {
    /// Counts over the records with |d| ≤ x. Records must all come from the
    /// same search bound and tolerance.
    pub fn from_records(
        x: u64,
        alpha: f64,
        epsilon: f64,
        records: &[SurveyRecord],
    ) -> Result<Self> {
        let first = records.first();
        let bound = first.map_or(SearchBound::new(1)?, |r| r.search_bound);
        let tol = first.map_or(f64::NAN, |r| r.tol);
        if records
            .iter()
            .any(|r| r.search_bound != bound || r.tol != tol)
        {
            return Err(Error::InvalidParameter(
                "records mix search parameters".into(),
            ));
        }
        let mut records: Vec<SurveyRecord> = records
            .iter()
            .filter(|r| r.d.unsigned_abs() <= x)
            .cloned()
            .collect();
        records.sort_by_key(|r| r.d);
        records.dedup_by_key(|r| r.d);

        let x_eps = (x as f64).powf(epsilon);
        let log_c = IMPLIED_CONSTANT.ln();
        let mut c = SurveyCounts {
            s6_size: records.len() as u64,
            ..Default::default()
        };
        let mut check = ImpliedConstantCheck {
            shortfall: 0,
            min_log_constant: 0.0,
        };
        for r in &records {
            let log_d = (r.d.unsigned_abs() as f64).ln();
            let small_square = (r.square_part as f64) < (r.d.unsigned_abs() as f64).powf(epsilon);
            if let Some(h) = r.hhat_min {
                if h < alpha * log_d {
                    c.n_alpha += 1;
                    if small_square {
                        c.n_alpha_eps += 1;
                        let excess = r.h_f_min.unwrap_or(f64::INFINITY) - 6.0 * alpha * log_d;
                        if excess >= log_c {
                            check.shortfall += 1;
                        }
                        check.min_log_constant = check.min_log_constant.max(excess);
                    }
                }
            }
            c.n_star_alpha += r.points.iter().filter(|p| p.hhat < alpha * log_d).count() as u64;
            if (r.square_part as f64) < x_eps {
                c.n_star_alpha_eps += r
                    .points
                    .iter()
                    .filter(|p| p.h_f < 6.0 * alpha * log_d + log_c)
                    .count() as u64;
            } else {
                c.square_part_tail += 1;
            }
        }
        Ok(Self {
            x,
            alpha,
            epsilon,
            bound,
            tol,
            implied_constant: IMPLIED_CONSTANT,
            notes: vec![
                "none_found records count as non-violators".into(),
                "zeta_d < |d|^alpha is tested as hhat_min < alpha*ln|d|".into(),
                format!("N*_alpha_eps uses h_f < 6*alpha*ln|d| + ln C with C = {IMPLIED_CONSTANT}"),
            ],
            counts: c,
            implied_constant_check: check,
            records,
        })
    }

    /// N_α ≤ #S₆, N_α ≤ N*_α, N_{α,ε} ≤ N_α, and hhat_min present exactly
    /// for Found records. A failure is an [`Error::Invariant`].
    pub fn check_invariants(&self) -> Result<()> {
        let c = &self.counts;
        let fail = |what: &str| Err(Error::Invariant(format!("survey X = {}: {what}", self.x)));
        if c.n_alpha > c.s6_size {
            return fail("N_alpha > #S6");
        }
        if c.n_alpha > c.n_star_alpha {
            return fail("N_alpha > N*_alpha");
        }
        if c.n_alpha_eps > c.n_alpha {
            return fail("N_alpha_eps > N_alpha");
        }
        for r in &self.records {
            if r.hhat_min.is_some() != matches!(r.zeta_outcome, ZetaResult::Found { .. }) {
                return fail("hhat_min present without a Found outcome");
            }
        }
        Ok(())
    }

    pub fn violator_fraction(&self) -> f64 {
        ratio(self.counts.n_alpha, self.counts.s6_size)
    }

    pub fn square_part_tail_fraction(&self) -> f64 {
        ratio(self.counts.square_part_tail, self.counts.s6_size)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Record store backed by an optional newline-delimited JSON file. One
/// record per d is kept; when two records for the same d meet, the one with
/// the larger search bound wins.
#[derive(Debug, Default)]
pub struct SurveyCache {
    path: Option<PathBuf>,
    records: BTreeMap<i64, SurveyRecord>,
}

impl SurveyCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or prepares to create) a cache file. Every stored record is
    /// re-verified; a record that fails is an invariant error, not skipped.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut cache = Self {
            path: Some(path.clone()),
            records: BTreeMap::new(),
        };
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: SurveyRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("{}:{}: {e}", path.display(), i + 1)))?;
                rec.verify()?;
                cache.merge(rec);
            }
        }
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn merge(&mut self, rec: SurveyRecord) {
        match self.records.get(&rec.d) {
            Some(old) if old.search_bound > rec.search_bound => {}
            _ => {
                self.records.insert(rec.d, rec);
            }
        }
    }

    /// A record for (d, bound, tol), cut down from a larger search if needed.
    pub fn lookup(&self, d: i64, bound: SearchBound, tol: f64) -> Option<SurveyRecord> {
        let rec = self.records.get(&d)?;
        if rec.tol != tol || rec.search_bound < bound {
            return None;
        }
        if rec.search_bound == bound {
            Some(rec.clone())
        } else {
            rec.restrict(bound).ok()
        }
    }

    /// Adds freshly computed records, appending them to the file in order.
    pub fn insert_all(&mut self, recs: &[SurveyRecord]) -> Result<()> {
        if let Some(path) = &self.path {
            let mut f = OpenOptions::new().create(true).append(true).open(path)?;
            for r in recs {
                let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(f, "{line}")?;
            }
        }
        for r in recs {
            self.merge(r.clone());
        }
        Ok(())
    }
}

/// Searches every d ∈ S₆(X), reusing cached records, and assembles the
/// table. Deterministic in (X, α, ε, bound, tol).
pub fn run_survey(
    params: &SurveyParams,
    cache: Option<&mut SurveyCache>,
    exec: Exec,
) -> Result<SurveyTable> {
    params.validate()?;
    let members = sixth_power_free_sieve(params.max_x)?.members;
    let mut scratch = SurveyCache::in_memory();
    let cache = cache.unwrap_or(&mut scratch);

    let mut records = Vec::with_capacity(members.len());
    let mut missing = Vec::new();
    for &d in &members {
        match cache.lookup(d, params.bound, params.tol) {
            Some(r) => records.push(r),
            None => missing.push(d),
        }
    }
    let fresh = exec
        .map(&missing, |&d| {
            SurveyRecord::compute(d, params.bound, params.tol)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    cache.insert_all(&fresh)?;
    records.extend(fresh);

    let table = SurveyTable::from_records(params.max_x, params.alpha, params.epsilon, &records)?;
    // Tolerance is part of the table even when every record came from cache.
    let table = SurveyTable {
        bound: params.bound,
        tol: params.tol,
        ..table
    };
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub x: u64,
    pub violator_fraction: f64,
    pub square_part_tail_fraction: f64,
}

/// One row per table, ordered by X.
pub fn density_report(tables: &[SurveyTable]) -> Result<Vec<DensityRow>> {
    if let Some(first) = tables.first() {
        for t in tables {
            if t.alpha != first.alpha
                || t.epsilon != first.epsilon
                || t.bound != first.bound
                || t.tol != first.tol
            {
                return Err(Error::InvalidParameter(
                    "tables differ in alpha, epsilon, bound or tol".into(),
                ));
            }
        }
    }
    let mut rows: Vec<DensityRow> = tables
        .iter()
        .map(|t| DensityRow {
            x: t.x,
            violator_fraction: t.violator_fraction(),
            square_part_tail_fraction: t.square_part_tail_fraction(),
        })
        .collect();
    rows.sort_by_key(|r| r.x);
    Ok(rows)
}
