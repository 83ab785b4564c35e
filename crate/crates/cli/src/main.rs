//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure (or a
//! failed self-test), 3 domain error.

mod input;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use trace_laplace::divdiff::{divdiff_exp_opitz, divdiff_hermite_quadrature, divided_difference, FunctionSpec, NodeList};
use trace_laplace::exactnum::{format_rational, parse_rational, ExactRational, RealValue, MIN_PRECISION};
use trace_laplace::formulations::{m_positive_check, poly_coefficients, poly_coefficients_oracle, positive_type_check, MPositiveProbe};
use trace_laplace::linalg::to_eigenframe;
use trace_laplace::loops::{bmv_example, loop_bound, loop_min_search, parse_family, triple_integrand, IntegrandPoint, Variant};
use trace_laplace::search::{resume, run_search, RunOptions, SearchConfig};
use trace_laplace::traceder::{
    complete_monotonicity_report, digits_for, shift_frame, trace_derivative, trace_derivative_any, trace_derivative_fd, Caps,
};
use trace_laplace::{Error, Result};

#[derive(Parser)]
#[command(name = "trace-laplace", version, about = "Derivatives of matrix trace functions and BMV checks")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = "TRACE_LAPLACE_PRECISION", default_value_t = 256)]
    precision: usize,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Skip exact arithmetic even when the inputs allow it.
    #[arg(long, global = true)]
    float: bool,
    /// Suppress text output; the exit code still reports the outcome.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Recursion,
    Opitz,
    Hermite,
}

#[derive(Args)]
struct Pair {
    /// Matrix A: inline JSON, a JSON file, or rows like "1,0;0,2".
    #[arg(long = "A", alias = "a", allow_hyphen_values = true)]
    a: String,
    /// Matrix B, same formats as A.
    #[arg(long = "B", alias = "b", allow_hyphen_values = true)]
    b: String,
}

#[derive(Subcommand)]
enum Command {
    /// Divided difference of a function over a node list.
    Divdiff {
        /// exp:σ, resolvent:c, monotone:β;c1,w1;c2,w2 or scaled:t:<function>; plain exp means σ = 1.
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        /// Comma-separated nodes; entries may be rationals, decimals or multiples of ln2.
        #[arg(long, allow_hyphen_values = true)]
        nodes: String,
        #[arg(long, value_enum, default_value = "recursion")]
        method: Method,
        /// Gauss-Legendre points per axis for the hermite method.
        #[arg(long, default_value_t = 64)]
        quad_points: usize,
    },
    /// p-th derivative of t -> tr f(A + tB) at t0.
    TraceDeriv {
        #[command(flatten)]
        pair: Pair,
        /// Function, same syntax as for divdiff.
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        /// Derivative order.
        #[arg(long)]
        p: usize,
        /// Point of evaluation, t0 >= 0.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t0: String,
        /// Also run the finite-difference oracle.
        #[arg(long)]
        fd: bool,
    },
    /// Signs of (-1)^p f^(p) on a grid of t values.
    CmCheck {
        #[command(flatten)]
        pair: Pair,
        /// Function, same syntax as for divdiff.
        #[arg(long, allow_hyphen_values = true)]
        func: String,
        #[arg(long, default_value_t = 5)]
        max_order: usize,
        /// Comma-separated grid of t values.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        grid: String,
    },
    /// Coefficients of tr (A + tB)^p.
    PolyCoeff {
        #[command(flatten)]
        pair: Pair,
        /// Power of A + tB.
        #[arg(long)]
        p: usize,
        /// Enumerate words instead of multiplying polynomial matrices.
        #[arg(long)]
        oracle: bool,
    },
    /// Gram matrix of tr exp(A + itB) on sample points.
    PositiveType {
        #[command(flatten)]
        pair: Pair,
        /// Comma-separated sample points t_j.
        #[arg(long, allow_hyphen_values = true)]
        samples: String,
    },
    /// Sampled m-positivity of tr exp(A + tB).
    MPositive {
        #[command(flatten)]
        pair: Pair,
        /// Spectral half-width of the probes; defaults to 1/(2 max|B_ij| k).
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Probe size.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Number of probes.
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// -cos^p(pi/p).
    LoopBound {
        #[arg(long)]
        p: usize,
    },
    /// Numerical minimization of the canonical loop over unit vectors.
    LoopSearch {
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Third-derivative integrand at one simplex point.
    Integrand {
        /// {"vectors": [[...]]} inline or as a file.
        #[arg(long)]
        family: String,
        /// Exponents as multiples of ln 2, e.g. "69,33,0".
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        /// Simplex point "t1,t2,t3" with 0 <= t3 <= t2 <= t1 <= 1.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Exact integrand value of the three-vector example family.
    BmvExample {
        /// original or modified.
        #[arg(long, default_value = "original")]
        variant: String,
    },
    /// Search for negative integrand values.
    Search {
        /// JSON search configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Checkpoint to continue from.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Reference checks; exit 0 iff all pass.
    Selftest,
}

struct Out {
    json: bool,
    quiet: bool,
}

impl Out {
    fn emit(&self, value: Value, text: impl FnOnce() -> String) {
        if self.quiet {
            return;
        }
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        } else {
            println!("{}", text());
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Pole(_) => 3,
        Error::Numerical(_) | Error::Range(_) | Error::Inexact(_) | Error::Cap(_) => 2,
        Error::Parse(_) | Error::Invalid(_) | Error::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let ok = matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion);
            return ExitCode::from(if ok { 0 } else { 1 });
        }
    };
    if cli.precision < MIN_PRECISION {
        eprintln!("error: --precision must be at least {MIN_PRECISION}");
        return ExitCode::from(1);
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn value_json(v: &RealValue, prec: usize) -> Value {
    json!({"value": v.to_text(digits_for(prec)), "mode": v.mode()})
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let prec = cli.precision;
    let digits = digits_for(prec);
    let out = Out { json: cli.json, quiet: cli.quiet };
    match &cli.command {
        Command::Divdiff { func, nodes, method, quad_points } => {
            let f = FunctionSpec::from_str(func)?;
            let mut list = NodeList::parse(nodes, prec)?;
            if cli.float {
                list = NodeList::Float(list.to_hp(prec));
            }
            let (value, name) = match method {
                Method::Recursion => (divided_difference(&f, &list, prec)?, "recursion"),
                Method::Opitz => {
                    let scale = f.exp_scale().ok_or_else(|| Error::Invalid("the Opitz method needs an exp function".into()))?;
                    (RealValue::Float(divdiff_exp_opitz(&list.to_hp(prec), &scale, prec)?), "opitz")
                }
                Method::Hermite => (RealValue::Float(divdiff_hermite_quadrature(&f, &list.to_hp(prec), *quad_points)?), "hermite"),
            };
            let mut j = value_json(&value, prec);
            j["method"] = json!(name);
            j["func"] = json!(f.to_string());
            out.emit(j, || value.to_text(digits));
        }
        Command::TraceDeriv { pair, func, p, t0, fd } => {
            let (a, b) = (input::matrix(&pair.a, prec)?, input::matrix(&pair.b, prec)?);
            let f = FunctionSpec::from_str(func)?;
            Caps::default().check(a.n(), *p)?;
            let t0 = parse_rational(t0)?;
            let frame = to_eigenframe(&a, &b, prec)?;
            let value = if num_is_zero(&t0) && !cli.float {
                trace_derivative_any(&frame, &f, *p, prec)?
            } else {
                RealValue::Float(trace_derivative(&shift_frame(&frame.to_float(prec), &t0, prec)?, &f, *p)?)
            };
            let mut j = value_json(&value, prec);
            j["p"] = json!(p);
            j["t0"] = json!(format_rational(&t0));
            j["func"] = json!(f.to_string());
            let mut text = value.to_text(digits);
            if *fd {
                let oracle = trace_derivative_fd(&a, &b, &f, *p, &t0, prec)?;
                let gap = (value.to_hp(prec) - oracle.clone()).abs();
                j["fd_value"] = json!(oracle.to_sci(digits));
                j["fd_gap"] = json!(gap.to_sci(6));
                text = format!("{text}\nfinite differences: {}\ngap: {}", oracle.to_sci(digits), gap.to_sci(6));
            }
            out.emit(j, || text);
        }
        Command::CmCheck { pair, func, max_order, grid } => {
            let (a, b) = (input::matrix(&pair.a, prec)?, input::matrix(&pair.b, prec)?);
            let f = FunctionSpec::from_str(func)?;
            let grid = input::rationals(grid)?;
            let report = complete_monotonicity_report(&a, &b, &f, *max_order, &grid, &Caps::default(), prec)?;
            let mut j = serde_json::to_value(&report)?;
            j["alternates"] = json!(report.alternates());
            out.emit(j, || {
                let mut lines: Vec<String> = report
                    .entries
                    .iter()
                    .map(|e| format!("t0={} p={} {} {} ({})", format_rational(&e.t0), e.p, sign_text(e), e.value, e.mode))
                    .collect();
                lines.push(format!("alternating signs: {}", report.alternates()));
                lines.join("\n")
            });
        }
        Command::PolyCoeff { pair, p, oracle } => {
            let (a, b) = (input::matrix(&pair.a, prec)?, input::matrix(&pair.b, prec)?);
            let c = if *oracle { poly_coefficients_oracle(&a, &b, *p)? } else { poly_coefficients(&a, &b, *p)? };
            let mut j = serde_json::to_value(&c)?;
            j["all_nonnegative"] = json!(c.all_nonnegative());
            j["mode"] = json!("exact");
            j["method"] = json!(if *oracle { "words" } else { "recurrence" });
            out.emit(j, || c.coeffs.iter().map(format_rational).collect::<Vec<_>>().join(" "));
        }
        Command::PositiveType { pair, samples } => {
            let (a, b) = (input::matrix(&pair.a, prec)?, input::matrix(&pair.b, prec)?);
            let r = positive_type_check(&a, &b, &input::rationals(samples)?, prec)?;
            out.emit(serde_json::to_value(&r)?, || {
                format!("min eigenvalue {} (tolerance {}): {}", r.min_eigenvalue, r.tolerance, verdict(r.pass))
            });
        }
        Command::MPositive { pair, alpha, k, count, seed } => {
            let (a, b) = (input::matrix(&pair.a, prec)?, input::matrix(&pair.b, prec)?);
            let alpha = alpha.as_deref().map(parse_rational).transpose()?;
            let probe = MPositiveProbe { alpha, k: *k, sample_count: *count, seed: *seed };
            let r = m_positive_check(&a, &b, &probe, prec)?;
            out.emit(serde_json::to_value(&r)?, || {
                format!("alpha {} min entry {} at sample {}: {}", r.alpha, r.min_entry, r.argmin_sample, verdict(r.pass))
            });
        }
        Command::LoopBound { p } => {
            let v = loop_bound(*p, prec)?;
            out.emit(json!({"p": p, "value": v.to_sci(digits), "mode": "float"}), || v.to_sci(digits));
        }
        Command::LoopSearch { p, dim, restarts, seed } => {
            let r = loop_min_search(*p, *dim, *restarts, *seed, prec)?;
            let mut j = serde_json::to_value(&r)?;
            j["mode"] = json!("float");
            out.emit(j, || format!("best loop {} (bound {}) from restart {}", r.value, r.bound, r.best_restart));
        }
        Command::Integrand { family, lambda, point } => {
            let fam = parse_family(&input::json(family)?)?;
            let lambda = input::log2_multiples(lambda)?;
            let point = IntegrandPoint::parse(point)?;
            let mut v = triple_integrand(&fam, &lambda, &point, prec)?;
            if cli.float {
                v = RealValue::Float(v.to_hp(prec));
            }
            out.emit(value_json(&v, prec), || v.to_text(digits));
        }
        Command::BmvExample { variant } => {
            let variant = Variant::from_str(variant)?;
            let s = format_rational(&bmv_example(variant)?);
            let j = json!({
                "variant": variant,
                "value": s,
                "expected": variant.expected(),
                "matches": s == variant.expected(),
                "mode": "exact",
            });
            out.emit(j, || s.clone());
        }
        Command::Search { config, resume: ckpt, workers } => {
            let opts = RunOptions { workers: *workers, stop_after: None };
            let summary = match (ckpt, config) {
                (Some(path), _) => resume(path, &opts)?,
                (None, Some(path)) => run_search(&SearchConfig::from_json(&std::fs::read_to_string(path)?)?, &opts)?,
                (None, None) => return Err(Error::Invalid("search needs --config or --resume".into())),
            };
            out.emit(serde_json::to_value(&summary)?, || {
                format!(
                    "evaluations {} negatives {} minimum {} at {}",
                    summary.evaluations,
                    summary.negatives_found,
                    summary.min_value.as_deref().unwrap_or("-"),
                    summary.argmin.map_or("-".into(), |a| a.to_string())
                )
            });
        }
        Command::Selftest => {
            let checks = selftest::run(&selftest::Expectations::default(), prec);
            let all = checks.iter().all(|c| c.pass);
            let j = json!({"pass": all, "checks": checks.iter().map(selftest::Check::to_json).collect::<Vec<_>>()});
            out.emit(j, || {
                checks
                    .iter()
                    .map(|c| {
                        if c.pass {
                            format!("pass {}", c.name)
                        } else {
                            format!("FAIL {}\n  expected {}\n  got      {}", c.name, c.expected, c.got)
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            return Ok(if all { 0 } else { 2 });
        }
    }
    Ok(0)
}

fn num_is_zero(q: &ExactRational) -> bool {
    q.numer() == &0.into()
}

fn sign_text(e: &trace_laplace::traceder::ReportEntry) -> &'static str {
    match e.sign {
        trace_laplace::traceder::Sign::Positive => "+",
        trace_laplace::traceder::Sign::Negative => "-",
        trace_laplace::traceder::Sign::Zero => "0",
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}
