//! `pchaos`: transforms, measure constructions, norms and experiments on the
//! p-adic Vilenkin group.
//!
//! Exit status is 0 when every computed residual is within tolerance, 1 when
//! a check fails and 2 for usage errors or unreadable input.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use pchaos::experiments::{
    growth_study, random_ensemble_study, verify_suite, BaselineSet, CheckStatus, Ensemble,
    ExperimentConfig, ExperimentReport, Fault, VerifyConfig,
};
use pchaos::format::{ArrayFile, ArrayKind, PolyFile, FORMAT_VERSION};
use pchaos::measures::{exponent_selector, order_selector, riesz_measure, selector_system};
use pchaos::padic::{nonzero_digits, paley_decode, MAX_CELLS};
use pchaos::poly::{
    decomposition_residual, l1_ratio, linf_norm, lq_norm, max_coeff_diff, project_exponents,
    project_exponents_by_convolution, project_order, project_order_by_convolution, sidon_ratio,
    ChaosPolynomial,
};
use pchaos::tol::Tolerances;
use pchaos::transform::{forward, inverse};
use pchaos::Error;

#[derive(Parser)]
#[command(
    name = "pchaos",
    version,
    about = "Generalized Rademacher chaos toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Global {
    /// Override a tolerance, e.g. `--tol transform=1e-9`. Repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest number of cells any single array may have.
    #[arg(long, global = true, default_value_t = MAX_CELLS)]
    max_cells: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Forward transform of a cell file, or inverse transform of a Paley file.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Riesz product measure with coefficients `a` and exponents `J`.
    Riesz {
        #[arg(long)]
        p: usize,
        /// Complex coefficients `re` or `re:im`, one per level.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        a: Vec<String>,
        #[arg(long = "J", value_delimiter = ',')]
        j: Vec<usize>,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure selecting order-d indices whose exponents follow `J`.
    Lemma1 {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        d: usize,
        #[arg(long = "J", value_delimiter = ',')]
        j: Vec<usize>,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure selecting order `s` among orders `1..=d`.
    Lemma2 {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        s: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sup norm, coefficient norms and Sidon ratios of a polynomial.
    Norms {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Projects a polynomial onto an exponent sequence or a chaos order.
    Project {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long = "J", value_delimiter = ',', conflicts_with = "order")]
        j: Option<Vec<usize>>,
        #[arg(long, required_unless_present = "j")]
        order: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reassembles a pure-order polynomial from all its exponent projections.
    Decompose {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random ensemble study of Sidon ratios.
    Ensemble(StudyArgs),
    /// Ensemble study with the growth verdict across `N`.
    Growth(StudyArgs),
    /// Runs every identity check on a parameter grid.
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 5])]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
        d: Vec<usize>,
        #[arg(long = "N", default_value_t = 6)]
        n: usize,
        /// Corrupt a construction on purpose to exercise failure reporting.
        #[arg(long, value_parser = ["corrupt-selector"])]
        inject_fault: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    p: usize,
    #[arg(long)]
    d: usize,
    #[arg(long = "N", value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// `real-signs` or `unimodular-complex`.
    #[arg(long, default_value = "real-signs")]
    ensemble: String,
    /// JSON summary path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV path, one row per (p, d, N, statistic).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Baseline file to check drift against.
    #[arg(long)]
    baseline: Option<PathBuf>,
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Pass,
    Fail(String),
}

enum CliError {
    Usage(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn tolerances(global: &Global) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    for item in &global.tol {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("--tol expects NAME=VALUE, got `{item}`")))?;
        let value: f64 = value
            .parse()
            .map_err(|_| usage(format!("--tol {name}: `{value}` is not a number")))?;
        if !(value >= 0.0) {
            return Err(usage(format!("--tol {name}: must be non-negative")));
        }
        if !tol.set(name, value) {
            return Err(usage(format!(
                "unknown tolerance `{name}`; expected one of {}",
                Tolerances::NAMES.join(", ")
            )));
        }
    }
    Ok(tol)
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_poly(path: &Path) -> CliResult<ChaosPolynomial> {
    let text = read(path)?;
    PolyFile::parse(&text)
        .and_then(|f| f.to_poly())
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Writes `text` to `path` through a temporary file in the same directory,
/// or to stdout when no path is given.
fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    let Some(path) = path else {
        println!("{text}");
        return Ok(());
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| usage(format!("{}: {e}", path.display()));
    // Devices and pipes are written in place; renaming over them would replace them.
    if path.metadata().is_ok_and(|m| !m.is_file()) {
        return std::fs::write(path, format!("{text}\n")).map_err(io);
    }
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.write_all(b"\n").map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn to_json(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json values always serialize")
}

fn parse_complex(s: &str) -> CliResult<Complex64> {
    let bad = || usage(format!("coefficient `{s}` is not `re` or `re:im`"));
    let (re, im) = match s.split_once(':') {
        Some((re, im)) => (
            re.trim().parse().map_err(|_| bad())?,
            im.trim().parse().map_err(|_| bad())?,
        ),
        None => (s.trim().parse().map_err(|_| bad())?, 0.0),
    };
    Ok(Complex64::new(re, im))
}

fn check_cells(p: usize, level: usize, global: &Global) -> CliResult<()> {
    pchaos::padic::cell_count_with_limit(p, level, global.max_cells)?;
    Ok(())
}

fn verdict(failures: Vec<String>) -> Outcome {
    if failures.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail(failures.join("; "))
    }
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let global = cli.global;
    let tol = tolerances(&global)?;
    let echo = |command: Value| {
        json!({
            "command": command,
            "seed": global.seed,
            "max_cells": global.max_cells,
            "tolerances": tol,
        })
    };

    match cli.command {
        Command::Transform { input, out } => {
            let text = read(&input)?;
            let file =
                ArrayFile::parse(&text).map_err(|e| usage(format!("{}: {e}", input.display())))?;
            check_cells(file.p, file.level, &global)?;
            let (result, direction) = match file.kind {
                ArrayKind::Cells => (
                    ArrayFile::from_spectrum(&forward(&file.to_step_function()?)),
                    "forward",
                ),
                ArrayKind::Paley => (
                    ArrayFile::from_step_function(&inverse(&file.to_spectrum()?)),
                    "inverse",
                ),
            };
            let summary = json!({
                "config": echo(json!({ "name": "transform", "input": input, "direction": direction })),
            });
            emit(out.as_deref(), &result.with_summary(summary).to_json())?;
            Ok(Outcome::Pass)
        }

        Command::Riesz {
            p,
            a,
            j,
            level,
            out,
        } => {
            check_cells(p, level, &global)?;
            let a = a
                .iter()
                .map(|s| parse_complex(s))
                .collect::<CliResult<Vec<_>>>()?;
            let mu = riesz_measure(p, level, &a, &j)?;
            let density = mu.density();
            let min = density
                .values()
                .iter()
                .map(|v| v.re)
                .fold(f64::INFINITY, f64::min);
            let mass_error = (density.integral() - 1.0)
                .norm()
                .max((mu.variation - 1.0).abs());
            let negativity = (-min).max(0.0);
            let summary = json!({
                "config": echo(json!({ "name": "riesz", "p": p, "a": a, "J": j, "level": level })),
                "min_density": min,
                "mass_error": mass_error,
                "variation": mu.variation,
            });
            emit(
                out.as_deref(),
                &ArrayFile::from_measure(&mu).with_summary(summary).to_json(),
            )?;
            let mut failures = Vec::new();
            if mass_error > tol.riesz_mass || negativity > tol.riesz_mass {
                failures.push(format!(
                    "riesz-mass: mass error {mass_error}, negativity {negativity}"
                ));
            }
            Ok(verdict(failures))
        }

        Command::Lemma1 { p, d, j, n, out } => {
            let level = n + 1;
            check_cells(p, level, &global)?;
            let system = selector_system(d)?;
            let nu = exponent_selector(p, d, &j, level)?;
            let (mut matched, mut mismatched, mut count) = (0.0f64, 0.0f64, 0usize);
            for (m, v) in nu.spectrum.coeffs().iter().enumerate() {
                if nonzero_digits(m, p) != d {
                    continue;
                }
                count += 1;
                if paley_decode(m, p)?.matches(&j) {
                    matched = matched.max((v - 1.0).norm());
                } else {
                    mismatched = mismatched.max(v.norm());
                }
            }
            let summary = json!({
                "config": echo(json!({ "name": "lemma1", "p": p, "d": d, "J": j, "N": n })),
                "indices_checked": count,
                "max_matched_error": matched,
                "max_mismatched_modulus": mismatched,
                "tolerance": tol.selector_pattern,
                "solve_residual": system.residual,
                "coefficient_l1": system.l1_norm(),
                "variation": nu.variation,
            });
            emit(
                out.as_deref(),
                &ArrayFile::from_measure(&nu).with_summary(summary).to_json(),
            )?;
            let worst = matched.max(mismatched);
            let mut failures = Vec::new();
            if worst > tol.selector_pattern {
                failures.push(format!(
                    "lemma1-pattern: residual {worst} > {}",
                    tol.selector_pattern
                ));
            }
            Ok(verdict(failures))
        }

        Command::Lemma2 { p, d, s, n, out } => {
            let level = n + 1;
            check_cells(p, level, &global)?;
            let nu = order_selector(p, d, s, level)?;
            let mut worst = 0.0f64;
            for (m, v) in nu.spectrum.coeffs().iter().enumerate() {
                let order = nonzero_digits(m, p);
                if (1..=d).contains(&order) {
                    worst = worst.max((v - if order == s { 1.0 } else { 0.0 }).norm());
                }
            }
            let summary = json!({
                "config": echo(json!({ "name": "lemma2", "p": p, "d": d, "s": s, "N": n })),
                "max_pattern_error": worst,
                "tolerance": tol.construction,
                "variation": nu.variation,
            });
            emit(
                out.as_deref(),
                &ArrayFile::from_measure(&nu).with_summary(summary).to_json(),
            )?;
            let mut failures = Vec::new();
            if worst > tol.construction {
                failures.push(format!(
                    "lemma2-pattern: residual {worst} > {}",
                    tol.construction
                ));
            }
            Ok(verdict(failures))
        }

        Command::Norms { poly, out } => {
            let q = read_poly(&poly)?;
            check_cells(q.base(), q.level(), &global)?;
            let (sup, at) = linf_norm(&q)?;
            let mut report = json!({
                "format_version": FORMAT_VERSION,
                "config": echo(json!({ "name": "norms", "poly": poly })),
                "sup": sup,
                "argmax_cell": at.index,
                "l1": lq_norm(q.coefficients(), 1.0)?,
                "l2": lq_norm(q.coefficients(), 2.0)?,
                "terms": q.len(),
                "orders": q.orders(),
            });
            if let Some(exp) = q.sidon_exponent() {
                report["sidon_exponent"] = json!(exp);
                report["lq"] = json!(lq_norm(q.coefficients(), exp)?);
                report["sidon_ratio"] = json!(sidon_ratio(&q)?);
                report["l1_ratio"] = json!(l1_ratio(&q)?);
            }
            emit(out.as_deref(), &to_json(&report))?;
            Ok(Outcome::Pass)
        }

        Command::Project {
            poly,
            j,
            order,
            out,
        } => {
            let q = read_poly(&poly)?;
            check_cells(q.base(), q.level(), &global)?;
            let (selected, convolved, name) = match (j, order) {
                (Some(j), _) => (
                    project_exponents(&q, &j)?,
                    project_exponents_by_convolution(&q, &j)?,
                    "projection-dual",
                ),
                (None, Some(s)) => (
                    project_order(&q, s)?,
                    project_order_by_convolution(&q, s)?,
                    "order-projection-agreement",
                ),
                (None, None) => return Err(usage("one of --J or --order is required")),
            };
            let agreement = max_coeff_diff(&selected, &convolved);
            emit(out.as_deref(), &PolyFile::from_poly(&selected).to_json())?;
            eprintln!(
                "{}",
                json!({ "config": echo(json!({ "name": "project", "poly": poly })), "agreement": agreement })
            );
            let mut failures = Vec::new();
            if agreement > tol.construction {
                failures.push(format!("{name}: {agreement} > {}", tol.construction));
            }
            Ok(verdict(failures))
        }

        Command::Decompose { poly, out } => {
            let q = read_poly(&poly)?;
            check_cells(q.base(), q.level(), &global)?;
            let residual = decomposition_residual(&q)?;
            let report = json!({
                "format_version": FORMAT_VERSION,
                "config": echo(json!({ "name": "decompose", "poly": poly })),
                "residual": residual,
                "tolerance": tol.decomposition,
            });
            emit(out.as_deref(), &to_json(&report))?;
            let mut failures = Vec::new();
            if residual > tol.decomposition {
                failures.push(format!("decomposition: {residual} > {}", tol.decomposition));
            }
            Ok(verdict(failures))
        }

        Command::Ensemble(args) => study(args, false, &global, &tol),
        Command::Growth(args) => study(args, true, &global, &tol),

        Command::Verify {
            p,
            d,
            n,
            inject_fault,
            out,
        } => {
            let mut cfg = VerifyConfig::new(p, d, n, global.seed);
            cfg.tolerances = tol;
            cfg.max_cells = global.max_cells;
            cfg.fault = inject_fault.map(|_| Fault::CorruptSelector);
            let report = verify_suite(&cfg)?;
            for e in &report.entries {
                let status = match e.status {
                    CheckStatus::Pass => "pass",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skip => "skip",
                };
                let d = e.d.map(|d| format!(" d={d}")).unwrap_or_default();
                eprintln!(
                    "{status:4} {:<32} p={}{d} N={} residual={:.3e} tol={:.1e}",
                    e.name, e.p, e.n, e.max_residual, e.tolerance
                );
            }
            let text = serde_json::to_string_pretty(&report).expect("reports always serialize");
            emit(out.as_deref(), &text)?;
            Ok(verdict(
                report
                    .failures()
                    .map(|e| match e.d {
                        Some(d) => format!("{} (p={}, d={d})", e.name, e.p),
                        None => format!("{} (p={})", e.name, e.p),
                    })
                    .collect(),
            ))
        }
    }
}

fn study(args: StudyArgs, growth: bool, global: &Global, tol: &Tolerances) -> CliResult<Outcome> {
    let ensemble: Ensemble = args.ensemble.parse()?;
    let mut cfg = ExperimentConfig::new(args.p, args.d, args.n, args.trials, global.seed)
        .with_ensemble(ensemble);
    cfg.max_cells = global.max_cells;
    let report: ExperimentReport = if growth {
        growth_study(&cfg)?
    } else {
        random_ensemble_study(&cfg)?
    };

    let mut failures = Vec::new();
    if let Some(g) = &report.growth {
        failures.extend(g.failures.iter().cloned());
    }
    if let Some(path) = &args.baseline {
        let text = read(path)?;
        let set: BaselineSet =
            serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        failures.extend(set.check(&report));
    }

    let mut summary = serde_json::to_value(&report).expect("reports always serialize");
    summary["tolerances"] = json!(tol);
    summary["failures"] = json!(failures);
    emit(args.out.as_deref(), &to_json(&summary))?;

    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for rec in report.csv_records() {
            w.serialize(rec).map_err(|e| usage(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| usage(e.to_string()))?;
        let text = String::from_utf8(bytes).expect("csv output is utf-8");
        emit(Some(path), text.trim_end())?;
    }
    Ok(verdict(failures))
}
