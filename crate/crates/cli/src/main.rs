//! `mordell`: command-line access to the mordell-core experiments.
//!
//! Exit status: 0 on success, 1 on usage or input errors, 2 when an internal
//! invariant fails.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mordell_core::curve::{format_rational, parse_point, MordellCurve, PrimitiveTriple};
use mordell_core::exec::{with_jobs, Exec};
use mordell_core::forms::{
    compute_t, count_points, dyadic_ladder, exponent_fit, BoxSpec, FormSpec,
};
use mordell_core::heights::{
    canonical_height, height_f, height_f_arg, naive_height_x, naive_height_x_arg,
};
use mordell_core::integer_lab::sixth_power_free_sieve;
use mordell_core::param::decompose;
use mordell_core::search::{scan, SearchBound, ZetaResult};
use mordell_core::survey::{run_survey, SurveyCache, SurveyParams, SurveyTable, DEFAULT_EPSILON};
use mordell_core::{CurvePoint, Error};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "mordell",
    version,
    about = "Heights, point search and surveys on y^2 = x^3 + d"
)]
struct Cli {
    /// Output format. Defaults to plain lines for `sieve` and JSON elsewhere.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for `survey` and `count-form` (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for sampled utilities. Every current subcommand is exhaustive and
    /// ignores it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// S6(X): the sixth-power-free d with 0 < |d| <= X, in increasing order.
    Sieve {
        #[arg(long)]
        max_x: u64,
    },
    /// Naive height h_x, the height h_f of f = x^3/y^2, and the canonical height of a point.
    Height {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// "x,y" with rational coordinates ("a" or "a/b"), or "O".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// The parameterization (b0, b1, d1, x1, y1) of a primitive solution of Y^2 Z = X^3 + d Z^3.
    Decompose {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        /// "X,Y,Z".
        #[arg(long, allow_hyphen_values = true)]
        triple: String,
    },
    /// All non-torsion points with max(|b0 x1^3|, y1^2) <= bound, and the zeta_d witness.
    Search {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// log zeta_d: the least canonical height of a non-torsion point inside the search box.
    Zeta {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// N_alpha(X), N_{alpha,eps}(X), N*_alpha(X), N*_{alpha,eps}(X) and per-d zeta_d over S6(X).
    Survey {
        #[arg(long)]
        max_x: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        /// NDJSON record cache, reused and extended across runs.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Output format for this table; overrides --format.
        #[arg(long, value_enum)]
        out: Option<Format>,
    },
    /// N(F; B1, B2, B3): integer zeros of a ternary form in a box, with T and V = B1 B2 B3.
    CountForm {
        /// Terms "coeff:e1,e2,e3" joined by ';', e.g. "1:0,2,0;-1:0,0,2;-1:1,0,1".
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        #[arg(long = "box", num_args = 3, value_names = ["B1", "B2", "B3"])]
        bounds: Vec<u64>,
        /// Fit log N against log V over the dyadic ladder starting at --box.
        #[arg(long)]
        fit: bool,
        /// Ladder length for --fit.
        #[arg(long, default_value_t = 6)]
        steps: u32,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_invariant() { 2 } else { 1 })
        }
    }
}

fn exec_for(jobs: usize) -> Exec {
    if jobs == 1 {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn json_line(v: &Value) -> String {
    format!("{v}\n")
}

fn run(cli: &Cli) -> Result<String, Error> {
    let fmt = cli.format;
    let json_out = fmt != Some(Format::Csv);
    match &cli.command {
        Command::Sieve { max_x } => {
            let set = sixth_power_free_sieve(*max_x)?;
            let mut out = String::new();
            match fmt {
                Some(Format::Json) => {
                    out = json_line(
                        &json!({ "max_x": max_x, "count": set.len(), "members": set.members }),
                    );
                }
                Some(Format::Csv) => {
                    out.push_str("d\n");
                    for d in &set.members {
                        let _ = writeln!(out, "{d}");
                    }
                }
                None => {
                    for d in &set.members {
                        let _ = writeln!(out, "{d}");
                    }
                }
            }
            Ok(out)
        }
        Command::Height { d, point, tol } => {
            let curve = MordellCurve::new(*d)?;
            let p = parse_point(point)?;
            if !curve.contains(&p) {
                return Err(Error::OffCurve { d: *d });
            }
            let naive = naive_height_x(&p);
            let hf = height_f(&p);
            let hhat = canonical_height(&curve, &p, *tol)?;
            if json_out {
                Ok(json_line(&json!({
                    "d": d,
                    "point": p,
                    "naive": { "exp_arg": naive_height_x_arg(&p).to_string(), "value": naive.value, "tol": naive.tolerance },
                    "h_f": { "exp_arg": height_f_arg(&p).to_string(), "value": hf.value, "tol": hf.tolerance },
                    "canonical": { "value": hhat.value, "tol": hhat.tolerance },
                })))
            } else {
                Ok(format!(
                    "quantity,exp_arg,value,tol\nnaive,{},{},{}\nh_f,{},{},{}\ncanonical,,{},{}\n",
                    naive_height_x_arg(&p),
                    naive.value,
                    naive.tolerance,
                    height_f_arg(&p),
                    hf.value,
                    hf.tolerance,
                    hhat.value,
                    hhat.tolerance
                ))
            }
        }
        Command::Decompose { d, triple } => {
            let curve = MordellCurve::new(*d)?;
            let t: PrimitiveTriple = triple.parse()?;
            let dec = decompose(&curve, &t)?;
            if json_out {
                Ok(json_line(
                    &serde_json::to_value(&dec).map_err(|e| Error::Io(e.to_string()))?,
                ))
            } else {
                Ok(format!(
                    "b0,b1,d1,x1,y1\n{},{},{},{},{}\n",
                    dec.b0, dec.b1, dec.d1, dec.x1, dec.y1
                ))
            }
        }
        Command::Search { d, bound, tol } | Command::Zeta { d, bound, tol } => {
            let with_points = matches!(cli.command, Command::Search { .. });
            let curve = MordellCurve::new(*d)?;
            let bound = SearchBound::new(*bound)?;
            let sc = scan(&curve, bound, *tol)?;
            let zeta = ZetaResult::from_scan(&sc, bound);
            let witness_hf = zeta
                .witness()
                .and_then(|w| sc.nontorsion.iter().find(|p| &p.point == w))
                .map(|p| p.h_f);
            let outcome = match zeta {
                ZetaResult::Found { .. } => "found",
                ZetaResult::NoneFound { .. } => "none_found",
            };
            if json_out {
                let mut v = json!({
                    "d": d,
                    "outcome": outcome,
                    "witness": zeta.witness(),
                    "hhat": zeta.value(),
                    "h_f": witness_hf,
                    "bound": bound.get(),
                    "tol": tol,
                });
                if with_points {
                    v["torsion_found"] = json!(sc.torsion_found);
                    v["points"] = serde_json::to_value(&sc.nontorsion)
                        .map_err(|e| Error::Io(e.to_string()))?;
                }
                Ok(json_line(&v))
            } else if with_points {
                let mut out = String::from("x,y,hhat,h_f,box_value\n");
                for p in &sc.nontorsion {
                    let (x, y) = coords(&p.point);
                    let _ = writeln!(out, "{x},{y},{},{},{}", p.hhat, p.h_f, p.box_value);
                }
                Ok(out)
            } else {
                let (x, y) = zeta.witness().map(coords).unwrap_or_default();
                Ok(format!(
                    "d,outcome,witness_x,witness_y,hhat,h_f,bound,tol\n{d},{outcome},{x},{y},{},{},{},{tol}\n",
                    opt(zeta.value()),
                    opt(witness_hf),
                    bound.get()
                ))
            }
        }
        Command::Survey {
            max_x,
            alpha,
            epsilon,
            bound,
            tol,
            cache,
            out,
        } => {
            let params = SurveyParams {
                max_x: *max_x,
                alpha: *alpha,
                epsilon: *epsilon,
                bound: SearchBound::new(*bound)?,
                tol: *tol,
            };
            let exec = exec_for(cli.jobs);
            let mut cache = cache.as_ref().map(SurveyCache::open).transpose()?;
            let table = with_jobs(cli.jobs, || run_survey(&params, cache.as_mut(), exec))?;
            table.check_invariants()?;
            let format = out.or(fmt).unwrap_or(Format::Json);
            match format {
                Format::Json => Ok(json_line(
                    &serde_json::to_value(&table).map_err(|e| Error::Io(e.to_string()))?,
                )),
                Format::Csv => Ok(survey_csv(&table)),
            }
        }
        Command::CountForm {
            form,
            bounds,
            fit,
            steps,
        } => {
            let form: FormSpec = form.parse()?;
            let b = BoxSpec::new(bounds[0], bounds[1], bounds[2])?;
            let exec = exec_for(cli.jobs);
            if *fit {
                let ladder = dyadic_ladder(b, *steps);
                let result = with_jobs(cli.jobs, || exponent_fit(&form, &ladder, exec))?;
                if fmt == Some(Format::Json) {
                    Ok(json_line(
                        &serde_json::to_value(&result).map_err(|e| Error::Io(e.to_string()))?,
                    ))
                } else {
                    Ok(format!(
                        "slope,intercept\n{},{}\n",
                        result.slope, result.intercept
                    ))
                }
            } else {
                let n = with_jobs(cli.jobs, || count_points(&form, &b, exec))?;
                let t = compute_t(&form, &b)?;
                let v = b.volume();
                if json_out {
                    Ok(format!("{{\"N\":{n},\"T\":{t},\"V\":{v}}}\n"))
                } else {
                    Ok(format!("N,T,V\n{n},{t},{v}\n"))
                }
            }
        }
    }
}

fn coords(p: &CurvePoint) -> (String, String) {
    match p {
        CurvePoint::Identity => ("O".into(), "O".into()),
        CurvePoint::Affine { x, y } => (format_rational(x), format_rational(y)),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn survey_csv(table: &SurveyTable) -> String {
    let mut out = String::from("d,square_part,outcome,hhat_min,h_f_min,witness_x,witness_y\n");
    for r in &table.records {
        let outcome = match r.zeta_outcome {
            ZetaResult::Found { .. } => "found",
            ZetaResult::NoneFound { .. } => "none_found",
        };
        let (x, y) = r.zeta_outcome.witness().map(coords).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{outcome},{},{},{x},{y}",
            r.d,
            r.square_part,
            opt(r.hhat_min),
            opt(r.h_f_min)
        );
    }
    out
}
