//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use mordell_core::curve::{CurvePoint, MordellCurve, PrimitiveTriple, TorsionStructure};
use mordell_core::exec::Exec;
use mordell_core::forms::{
    count_points, cube_ladder, exponent_fit, homogenize_param_equation, is_nonsingular_quadratic,
    BoxSpec,
};
use mordell_core::heights::{canonical_height, height_f};
use mordell_core::integer_lab::sixth_power_free_sieve;
use mordell_core::param::{decompose, recompose, Decomposition};
use mordell_core::search::{
    box_value_of, brute_force_affine, brute_force_triples, enumerate_points, SearchBound,
};
use mordell_core::survey::{density_report, run_survey, SurveyCache, SurveyParams, SurveyTable};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-5;
const SURVEY_BOUND: u64 = 1_000_000;

/// max |6ĥ − h_f| over the ζ_d witnesses for d ∈ S₆(200) at bound 10⁶,
/// tol 10⁻⁵, as first measured (2.46453), rounded up past the tolerance.
const FROZEN_WITNESS_GAP: f64 = 2.4646;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn s6(x: u64) -> Vec<i64> {
    sixth_power_free_sieve(x).unwrap().members
}

fn survey_cache() -> &'static Mutex<SurveyCache> {
    static CACHE: OnceLock<Mutex<SurveyCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(SurveyCache::in_memory()))
}

fn survey(x: u64, alpha: f64) -> SurveyTable {
    let params = SurveyParams {
        max_x: x,
        alpha,
        epsilon: 0.05,
        bound: SearchBound::new(SURVEY_BOUND).unwrap(),
        tol: TOL,
    };
    let mut cache = survey_cache().lock().unwrap();
    let table = run_survey(&params, Some(&mut cache), Exec::Parallel).unwrap();
    table.check_invariants().unwrap();
    table
}

fn criterion_1_group_law() -> Outcome {
    let start = Instant::now();
    let bound = SearchBound::new(10_000).unwrap();
    let pools: Vec<(MordellCurve, Vec<CurvePoint>)> = s6(50)
        .into_iter()
        .map(|d| {
            let c = MordellCurve::new(d).unwrap();
            let mut pts = c.torsion_points().unwrap();
            for p in enumerate_points(&c, bound) {
                pts.push(c.negate(&p));
                pts.push(p);
            }
            (c, pts)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f7264656c6c);
    let mut failures = 0;
    for _ in 0..1000 {
        let (c, pts) = &pools[rng.random_range(0..pools.len())];
        let pick = |r: &mut ChaCha8Rng| pts[r.random_range(0..pts.len())].clone();
        let (p, q, r) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let pq = c.add(&p, &q).unwrap();
        let ok = c.add(&pq, &r).unwrap() == c.add(&p, &c.add(&q, &r).unwrap()).unwrap()
            && pq == c.add(&q, &p).unwrap()
            && c.add(&p, &CurvePoint::Identity).unwrap() == p
            && c.add(&p, &c.negate(&p)).unwrap().is_identity()
            && c.contains(&pq);
        if !ok {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(
        failures == 0 && elapsed < Duration::from_secs(30),
        format!("1000 samples, {failures} failures, {elapsed:.2?}"),
    )
}

/// The ζ_d witness and, when present, a second independent point.
fn witnesses(count: usize) -> Vec<(MordellCurve, CurvePoint, CurvePoint)> {
    let table = survey(200, 2.0 / 9.0);
    let mut out = Vec::new();
    for r in &table.records {
        let Some(w) = r.zeta_outcome.witness() else {
            continue;
        };
        let c = MordellCurve::new(r.d).unwrap();
        let other = r
            .points
            .iter()
            .map(|p| p.point.clone())
            .find(|p| p != w)
            .unwrap_or_else(|| c.multiply(2, w).unwrap());
        out.push((c, w.clone(), other));
        if out.len() == count {
            break;
        }
    }
    out
}

fn criterion_2_quadraticity() -> Outcome {
    let ws = witnesses(50);
    let (mut quad, mut para) = (0.0f64, 0.0f64);
    for (c, p, q) in &ws {
        let h = |pt: &CurvePoint| canonical_height(c, pt, TOL).unwrap().value;
        let hp = h(p);
        quad = quad.max((h(&c.double(p).unwrap()) - 4.0 * hp).abs());
        let sum = h(&c.add(p, q).unwrap()) + h(&c.add(p, &c.negate(q)).unwrap());
        para = para.max((sum - 2.0 * hp - 2.0 * h(q)).abs());
    }
    ensure(
        ws.len() == 50 && quad < 1e-4 && para < 1e-3,
        format!(
            "{} witnesses, max |h(2P)-4h(P)| = {quad:.2e}, max parallelogram defect = {para:.2e}",
            ws.len()
        ),
    )
}

fn max_witness_gap(table: &SurveyTable) -> f64 {
    table
        .records
        .iter()
        .filter_map(|r| {
            let w = r.zeta_outcome.witness()?;
            let p = r.points.iter().find(|p| &p.point == w)?;
            Some((6.0 * p.hhat - p.h_f).abs())
        })
        .fold(0.0, f64::max)
}

fn criterion_3_gap() -> Outcome {
    let g100 = max_witness_gap(&survey(100, 2.0 / 9.0));
    let g200 = max_witness_gap(&survey(200, 2.0 / 9.0));
    let rel = (g200 - g100).abs() / g100.max(g200);
    ensure(
        rel <= 0.25 && g100 <= FROZEN_WITNESS_GAP && g200 <= FROZEN_WITNESS_GAP,
        format!(
            "max gap S6(100) = {g100:.5}, S6(200) = {g200:.5}, relative difference {rel:.3}, frozen bound {FROZEN_WITNESS_GAP}"
        ),
    )
}

fn criterion_4_round_trip() -> Outcome {
    let start = Instant::now();
    let ds = s6(100);
    let per_d = Exec::Parallel.map(&ds, |&d| {
        let c = MordellCurve::new(d).unwrap();
        let triples = brute_force_triples(&c, 10_000, 10_000, 1_000, Exec::Sequential);
        let bad = triples
            .iter()
            .filter(|t| {
                let Ok(dec) = decompose(&c, t) else {
                    return true;
                };
                !dec.residual().is_zero() || recompose(&dec).ok() != Some((d, (*t).clone()))
            })
            .count();
        (triples.len(), bad)
    });
    let total: usize = per_d.iter().map(|p| p.0).sum();
    let bad: usize = per_d.iter().map(|p| p.1).sum();
    let elapsed = start.elapsed();
    ensure(
        bad == 0 && total > 0 && elapsed < Duration::from_secs(120),
        format!(
            "{total} triples over {} curves, {bad} failures, {elapsed:.2?}",
            ds.len()
        ),
    )
}

fn criterion_5_search_completeness() -> Outcome {
    let bound = SearchBound::new(SURVEY_BOUND).unwrap();
    let c_box = 1_000u64;
    let in_box = |t: &PrimitiveTriple| {
        let (x, y, z) = t.to_i64s().unwrap_or((i64::MAX, i64::MAX, i64::MAX));
        x.unsigned_abs() <= c_box && y.unsigned_abs() <= c_box && z.unsigned_abs() <= c_box
    };
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for d in s6(50) {
        let c = MordellCurve::new(d).unwrap();
        let brute: BTreeSet<String> =
            brute_force_affine(&c, c_box, 1, c_box, c_box, Exec::Sequential)
                .into_iter()
                .filter(|p| box_value_of(&c, p).unwrap() <= SURVEY_BOUND.into())
                .map(|p| p.to_string())
                .collect();
        let found: Vec<CurvePoint> = enumerate_points(&c, bound);
        let found_set: BTreeSet<String> = found.iter().map(|p| p.to_string()).collect();
        let found_in_box: BTreeSet<String> = found
            .iter()
            .filter(|p| in_box(&c.to_primitive_triple(p).unwrap()))
            .map(|p| p.to_string())
            .collect();
        compared += brute.len();
        if !brute.is_subset(&found_set) || brute != found_in_box {
            mismatched.push(d);
        }
    }
    ensure(
        mismatched.is_empty(),
        format!("{compared} brute-force points matched; mismatched d: {mismatched:?}"),
    )
}

fn criterion_6_torsion() -> Outcome {
    let ds = s6(500);
    let results = Exec::Parallel.map(&ds, |&d| {
        let c = MordellCurve::new(d).unwrap();
        let small = brute_force_affine(&c, 1_000, 0, 1_000, 100, Exec::Sequential);
        let mut oracle: BTreeSet<String> = BTreeSet::from(["O".to_string()]);
        for p in &small {
            if c.order(p, 12).unwrap().is_some() {
                oracle.insert(p.to_string());
                oracle.insert(c.negate(p).to_string());
            }
        }
        let class = c.torsion_subgroup().unwrap();
        let points = c.torsion_points().unwrap();
        let listed: BTreeSet<String> = points.iter().map(|p| p.to_string()).collect();
        let max_h = points
            .iter()
            .map(|p| canonical_height(&c, p, TOL).unwrap().value)
            .fold(0.0, f64::max);
        let agrees =
            TorsionStructure::from_order(oracle.len()) == Some(class.structure) && listed == oracle;
        (d, agrees, max_h)
    });
    let wrong: Vec<i64> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    let max_h = results.iter().map(|r| r.2).fold(0.0, f64::max);
    ensure(
        wrong.is_empty() && max_h < 1e-5,
        format!(
            "{} curves, disagreements {wrong:?}, max torsion height {max_h:e}",
            ds.len()
        ),
    )
}

fn criterion_7_sieve_density() -> Outcome {
    let n = s6(100_000).len();
    let density = n as f64 / 200_000.0;
    let target = 945.0 / std::f64::consts::PI.powi(6);
    let small = s6(100).len();
    ensure(
        (density - target).abs() < 0.01 && small == 198,
        format!("density {density:.6} vs {target:.6}, #S6(100) = {small}"),
    )
}

fn criterion_8_survey_trend() -> Outcome {
    let start = Instant::now();
    let ladder = [1_000u64, 3_000, 10_000];
    let mut rows = Vec::new();
    let mut tables = Vec::new();
    for &x in ladder.iter().rev() {
        let main = survey(x, 2.0 / 9.0);
        let trivial = survey(x, 1.0 / 6.0 - 0.01);
        rows.push((x, main.violator_fraction(), trivial.violator_fraction()));
        tables.push(main);
    }
    rows.reverse();
    let trend = rows.windows(2).all(|w| w[1].1 <= w[0].1 * 1.2);
    let ordered = rows.iter().all(|r| r.2 <= r.1);
    let report = density_report(&tables).unwrap();
    let tails: Vec<f64> = report.iter().map(|r| r.square_part_tail_fraction).collect();
    let tail_ok = tails[0] > 0.0 && tails.windows(2).all(|w| w[1] < w[0]);
    let elapsed = start.elapsed();
    let detail = rows
        .iter()
        .map(|(x, f, t)| format!("X={x}: {f:.4} (trivial exponent {t:.4})"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(
        trend && ordered && tail_ok && elapsed < Duration::from_secs(1800),
        format!("{detail}; square-part tail {tails:.4?}; {elapsed:.2?}"),
    )
}

fn criterion_9_form_exponent() -> Outcome {
    let start = Instant::now();
    let form = homogenize_param_equation(1, 1, 1).unwrap();
    let boxes = cube_ladder(1_000, 10_000_000).unwrap();
    let fit = exponent_fit(&form, &boxes, Exec::Parallel).unwrap();
    let n35 = count_points(&form, &BoxSpec::new(10, 10, 1).unwrap(), Exec::Parallel).unwrap();
    let elapsed = start.elapsed();
    ensure(
        fit.slope <= 1.0 / 3.0 + 0.15 && n35 == 35 && elapsed < Duration::from_secs(300),
        format!(
            "slope {:.4} over {} boxes (V {}..{}), N(10,10,1) = {n35}, {elapsed:.2?}",
            fit.slope,
            fit.points.len(),
            fit.points.first().map_or(0, |p| p.v),
            fit.points.last().map_or(0, |p| p.v),
        ),
    )
}

fn criterion_10_regressions() -> Outcome {
    let c = MordellCurve::new(2).unwrap();
    let dec = decompose(&c, &PrimitiveTriple::new(34, 71, 8)).unwrap();
    let dec_ok = dec == Decomposition::new(1, 2, 2, 17, 71);
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let doubled = c.double(&c.int_point(-1, 1).unwrap()).unwrap();
    let dbl_ok = doubled
        == CurvePoint::Affine {
            x: q(17, 4),
            y: q(-71, 8),
        };
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut singular = Vec::new();
    for _ in 0..500 {
        let b0 = rng.random_range(1..=50i64);
        let b1 = rng.random_range(1..=20i64);
        let x1 = rng.random_range(-50..=50i64);
        let f = homogenize_param_equation(b0, b1, x1).unwrap();
        if !is_nonsingular_quadratic(&f).unwrap() {
            singular.push((b0, b1, x1));
        }
    }
    ensure(
        dec_ok && dbl_ok && singular.is_empty(),
        format!(
            "decompose {dec_ok}, doubling {dbl_ok}, singular samples {singular:?}, h_f(2P) = {:.6}",
            height_f(&doubled).value
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("group law", criterion_1_group_law),
        ("canonical height quadraticity", criterion_2_quadraticity),
        ("height gap boundedness", criterion_3_gap),
        ("parameterization round trip", criterion_4_round_trip),
        ("search completeness", criterion_5_search_completeness),
        ("torsion classification", criterion_6_torsion),
        ("sixth-power-free density", criterion_7_sieve_density),
        ("survey density trend", criterion_8_survey_trend),
        ("nonsingular conic exponent", criterion_9_form_exponent),
        ("fixed regressions", criterion_10_regressions),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
