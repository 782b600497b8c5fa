use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use burnside_core::chains::{
    binary_strings_table, build_matrix, continuous_step, generic_twisted_matrix, lumped_kernel,
    lumped_step, ChainSpec,
};
use burnside_core::export::{
    float_trajectory_to_csv, format_float, histogram_to_csv, matrix_to_csv, matrix_to_json,
    report_to_json, table_to_csv, trajectory_to_csv, Metadata,
};
use burnside_core::orthopoly::{chebyshev_table, HahnFamilyParams, PolyTable};
use burnside_core::rational::{int, parse_rational, to_f64, Rational};
use burnside_core::spectral::{
    eigenvalue_closed_form, numeric_eigenvalues, sandwich_check, transformation_identity_check,
    tv_distance, chi_square_distance, verify_eigenpairs,
};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{One, Zero};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Relative `--out` paths are resolved against this directory when set.
const OUT_DIR_ENV: &str = "BURNSIDE_OUT_DIR";

/// Number of independent sampling streams. Fixed so output does not depend
/// on the machine.
const SHARDS: u64 = 8;

/// Largest n for the brute-force lumping cross-check (S_n on 2^n strings).
const ENGINE_MAX_N: usize = 5;

#[derive(Debug, Parser)]
#[command(name = "burnside", version, about = "Exact kernels, spectra and samplers for the lumped Burnside process")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of coordinates; the lumped chain lives on 0..=n.
    #[arg(long = "n", global = true)]
    n: Option<usize>,

    /// Twist parameter as "p/q", an integer, or a decimal.
    #[arg(long, global = true, default_value = "1")]
    theta: String,

    /// Largest number of steps for distance curves and bounds.
    #[arg(long = "l-max", global = true, default_value_t = 12)]
    l_max: usize,

    /// Steps per sampled path.
    #[arg(long, global = true, default_value_t = 1)]
    steps: usize,

    /// Number of sampled paths.
    #[arg(long, global = true, default_value_t = 1)]
    samples: usize,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Output file (default: standard output).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Starting state: a count in 0..=n, or a point in [0, 1] for `continuous`.
    #[arg(long, global = true)]
    start: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Exact transition kernel.
    Matrix,
    /// Closed-form eigenvalues with exact and numeric cross-checks.
    Spectrum,
    /// Run the exact verification suite; exit 1 if any check fails.
    Verify,
    /// Sample the lumped chain: one path, or a histogram of end states.
    Sample,
    /// Exact total variation and chi-square distance by step.
    TvCurve,
    /// Sample the continuous chain on [0, 1].
    Continuous,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Matrix => "matrix",
            Command::Spectrum => "spectrum",
            Command::Verify => "verify",
            Command::Sample => "sample",
            Command::TvCurve => "tv-curve",
            Command::Continuous => "continuous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Usage(String),
    Check,
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

struct Run {
    cli: Cli,
    theta: Rational,
}

impl Run {
    fn new(cli: Cli) -> Outcome<Self> {
        let theta = match parse_rational(&cli.theta) {
            Ok((value, decimal)) => {
                if decimal {
                    eprintln!(
                        "warning: decimal theta {} converted to the exact rational {value}",
                        cli.theta
                    );
                }
                value
            }
            Err(e) => return usage(format!("invalid --theta: {e}")),
        };
        if theta <= Rational::zero() {
            return usage(format!("--theta must be positive, got {theta}"));
        }
        if cli.command != Command::Continuous {
            match cli.n {
                None => return usage("--n is required"),
                Some(0) => return usage("--n must be at least 1"),
                Some(_) => {}
            }
        }
        Ok(Self { cli, theta })
    }

    fn n(&self) -> usize {
        self.cli.n.expect("validated")
    }

    fn spec(&self) -> Outcome<ChainSpec> {
        ChainSpec::new(self.n(), self.theta.clone()).map_err(|e| Failure::Usage(e.to_string()))
    }

    fn metadata(&self) -> Metadata {
        let c = &self.cli;
        let config = json!({
            "n": c.n,
            "theta": self.theta.to_string(),
            "l_max": c.l_max,
            "steps": c.steps,
            "samples": c.samples,
            "seed": c.seed,
            "format": match c.format { Format::Csv => "csv", Format::Json => "json" },
            "out": c.out.as_ref().map(|p| p.display().to_string()),
            "start": c.start,
        });
        Metadata::new(c.command.name(), config, Some(c.seed))
    }

    fn lumped_start(&self) -> Outcome<usize> {
        let n = self.n();
        match &self.cli.start {
            None => Ok(n),
            Some(s) => match s.parse::<usize>() {
                Ok(v) if v <= n => Ok(v),
                _ => usage(format!("--start must be an integer in 0..={n}, got {s}")),
            },
        }
    }

    fn continuous_start(&self) -> Outcome<f64> {
        match &self.cli.start {
            None => Ok(0.5),
            Some(s) => match s.parse::<f64>() {
                Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
                _ => usage(format!("--start must lie in [0, 1], got {s}")),
            },
        }
    }

    fn emit(&self, text: String) -> Outcome<()> {
        match &self.cli.out {
            None => {
                std::io::stdout()
                    .write_all(text.as_bytes())
                    .context("writing to standard output")?;
            }
            Some(path) => {
                let path = match std::env::var_os(OUT_DIR_ENV) {
                    Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
                    _ => path.clone(),
                };
                std::fs::write(&path, text).map_err(|e| {
                    Failure::Usage(format!("cannot write {}: {e}", path.display()))
                })?;
            }
        }
        Ok(())
    }

    fn emit_json(&self, doc: &Value) -> Outcome<()> {
        let mut text = serde_json::to_string_pretty(doc).context("serializing report")?;
        text.push('\n');
        self.emit(text)
    }
}

fn cmd_matrix(run: &Run) -> Outcome<bool> {
    let p = build_matrix(&run.spec()?);
    let meta = run.metadata();
    match run.cli.format {
        Format::Csv => run.emit(matrix_to_csv(&p, &meta))?,
        Format::Json => run.emit_json(&matrix_to_json(&p, &meta))?,
    }
    Ok(true)
}

fn hahn_table(n: usize, theta: &Rational) -> anyhow::Result<PolyTable> {
    Ok(if theta.is_one() {
        chebyshev_table(n)?
    } else {
        PolyTable::hahn(HahnFamilyParams::symmetric(n, theta.clone())?)?
    })
}

fn cmd_spectrum(run: &Run) -> Outcome<bool> {
    let spec = run.spec()?;
    let p = build_matrix(&spec);
    let report = verify_eigenpairs(&p, &hahn_table(spec.n(), &run.theta)?).context("eigenpairs")?;
    let numeric = numeric_eigenvalues(&p, &spec.stationary()).context("eigen-solver")?;
    let mut sorted: Vec<&Rational> = report.eigenvalues.iter().collect();
    sorted.sort_by(|a, b| b.cmp(a));
    let meta = run.metadata();
    match run.cli.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .eigenvalues
                .iter()
                .zip(&report.residuals)
                .enumerate()
                .map(|(d, (e, r))| {
                    vec![d.to_string(), e.to_string(), format_float(to_f64(e)), r.to_string()]
                })
                .collect();
            run.emit(table_to_csv(&["degree", "eigenvalue", "value", "residual"], &rows, &meta))?;
        }
        Format::Json => {
            let mut body = report.to_json();
            body["numeric_sorted"] = json!(numeric);
            body["exact_sorted"] = json!(sorted.iter().map(|v| to_f64(v)).collect::<Vec<_>>());
            run.emit_json(&report_to_json(body, &meta))?;
        }
    }
    Ok(report.passes())
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: Value,
}

fn cmd_verify(run: &Run) -> Outcome<bool> {
    let spec = run.spec()?;
    let n = spec.n();
    let theta = &run.theta;
    let p = build_matrix(&spec);
    let pi = spec.stationary();
    let mut checks = Vec::new();

    let stationary = p.left_apply(&pi).context("stationarity")? == pi;
    let balance = p.detailed_balance_defect(&pi).context("detailed balance")?;
    checks.push(Check {
        name: "stationary and reversible",
        pass: stationary && balance.is_zero(),
        detail: json!({ "stationary": stationary, "detailed_balance_defect": balance.to_string() }),
    });

    let report = verify_eigenpairs(&p, &hahn_table(n, theta)?).context("eigenpairs")?;
    checks.push(Check {
        name: "hahn eigenpairs",
        pass: report.passes(),
        detail: report.to_json(),
    });

    let lambda1 = eigenvalue_closed_form(theta, 1).context("eigenvalue")?;
    let rate = Rational::one() / (int(2) * (int(1) + theta));
    checks.push(Check {
        name: "second eigenvalue equals 1/(2(1+theta))",
        pass: lambda1 == rate,
        detail: json!({ "lambda_1": lambda1.to_string(), "rate": rate.to_string() }),
    });

    let identity: Vec<(usize, Rational)> = (1..=3)
        .map(|k| transformation_identity_check(theta, k).map(|r| (k, r)))
        .collect::<Result<_, _>>()
        .context("transformation identity")?;
    checks.push(Check {
        name: "hypergeometric transformation identity",
        pass: identity.iter().all(|(_, r)| r.is_zero()),
        detail: json!(identity.iter().map(|(k, r)| json!({"k": k, "residual": r.to_string()})).collect::<Vec<_>>()),
    });

    let m = n.min(ENGINE_MAX_N);
    let table = binary_strings_table(m, theta).context("group action")?;
    let lumped = lumped_kernel(&generic_twisted_matrix(&table), &table.orbits()).context("lumping")?;
    let direct = build_matrix(&ChainSpec::new(m, theta.clone()).context("chain")?);
    checks.push(Check {
        name: "brute-force engine lumps to the kernel",
        pass: lumped == direct,
        detail: json!({ "n": m, "states": table.state_count() }),
    });

    if theta.is_one() && n >= 2 && run.cli.l_max >= 1 {
        let rows = sandwich_check(n, run.cli.l_max).context("sandwich")?;
        checks.push(Check {
            name: "total variation sandwich from the all-ones state",
            pass: rows.iter().all(|r| r.pass),
            detail: json!(rows
                .iter()
                .map(|r| json!({
                    "l": r.l,
                    "tv": format_float(to_f64(&r.tv)),
                    "lower": r.lower.to_string(),
                    "upper": r.upper.to_string(),
                    "eigenfunction_lower": format_float(to_f64(&r.eigenfunction_lower)),
                    "pass": r.pass,
                }))
                .collect::<Vec<_>>()),
        });
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let meta = run.metadata();
    match run.cli.format {
        Format::Json => {
            let body = json!({
                "pass": all_pass,
                "checks": checks
                    .iter()
                    .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
                    .collect::<Vec<_>>(),
            });
            run.emit_json(&report_to_json(body, &meta))?;
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|c| vec![c.name.to_string(), if c.pass { "pass" } else { "fail" }.to_string()])
                .collect();
            run.emit(table_to_csv(&["check", "result"], &rows, &meta))?;
        }
    }
    Ok(all_pass)
}

/// Splits `samples` into contiguous shards, each driven by its own ChaCha
/// stream of the base seed, and returns per-shard results in shard order.
fn sharded<T, F>(seed: u64, samples: usize, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let shards = SHARDS as usize;
    let sizes: Vec<usize> = (0..shards)
        .map(|i| samples / shards + usize::from(i < samples % shards))
        .collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .enumerate()
            .map(|(i, &size)| {
                let work = &work;
                scope.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    work(&mut rng, size)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampling thread panicked")).collect()
    })
}

fn cmd_sample(run: &Run) -> Outcome<bool> {
    let spec = run.spec()?;
    let start = run.lumped_start()?;
    let steps = run.cli.steps;
    let meta = run.metadata();
    if run.cli.samples <= 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(run.cli.seed);
        let mut states = vec![start];
        for _ in 0..steps {
            let next = lumped_step(*states.last().unwrap(), &spec, &mut rng).context("step")?;
            states.push(next);
        }
        match run.cli.format {
            Format::Csv => run.emit(trajectory_to_csv(&states, &meta))?,
            Format::Json => run.emit_json(&json!({ "metadata": meta, "start": start, "states": &states[1..] }))?,
        }
        return Ok(true);
    }
    let shard_counts = sharded(run.cli.seed, run.cli.samples, |rng, size| {
        let mut counts = vec![0u64; spec.n() + 1];
        for _ in 0..size {
            let mut x = start;
            for _ in 0..steps {
                x = lumped_step(x, &spec, rng).expect("state stays in range");
            }
            counts[x] += 1;
        }
        counts
    });
    let mut counts = vec![0u64; spec.n() + 1];
    for shard in shard_counts {
        for (c, s) in counts.iter_mut().zip(shard) {
            *c += s;
        }
    }
    match run.cli.format {
        Format::Csv => run.emit(histogram_to_csv(&counts, &meta))?,
        Format::Json => run.emit_json(&json!({ "metadata": meta, "start": start, "counts": counts }))?,
    }
    Ok(true)
}

fn cmd_tv_curve(run: &Run) -> Outcome<bool> {
    let spec = run.spec()?;
    let start = run.lumped_start()?;
    let pi = spec.stationary();
    let laws = build_matrix(&spec)
        .distributions_from(start, run.cli.l_max)
        .context("matrix powers")?;
    let mut rows = Vec::with_capacity(laws.len());
    for (l, law) in laws.iter().enumerate() {
        let tv = tv_distance(law, &pi).context("tv")?;
        let chi = chi_square_distance(law, &pi).context("chi-square")?;
        rows.push((l, tv, chi));
    }
    let meta = run.metadata();
    match run.cli.format {
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|(l, tv, chi)| vec![l.to_string(), format_float(to_f64(tv)), format_float(to_f64(chi))])
                .collect();
            run.emit(table_to_csv(&["l", "tv", "chi_square"], &table, &meta))?;
        }
        Format::Json => {
            let body = json!({
                "start": start,
                "rows": rows
                    .iter()
                    .map(|(l, tv, chi)| json!({ "l": l, "tv": tv.to_string(), "chi_square": chi.to_string() }))
                    .collect::<Vec<_>>(),
            });
            run.emit_json(&report_to_json(body, &meta))?;
        }
    }
    Ok(true)
}

fn cmd_continuous(run: &Run) -> Outcome<bool> {
    let theta = to_f64(&run.theta);
    let start = run.continuous_start()?;
    let steps = run.cli.steps;
    let meta = run.metadata();
    if run.cli.samples <= 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(run.cli.seed);
        let mut states = vec![start];
        for _ in 0..steps {
            let next = continuous_step(*states.last().unwrap(), theta, &mut rng).context("step")?;
            states.push(next);
        }
        match run.cli.format {
            Format::Csv => run.emit(float_trajectory_to_csv(&states, &meta))?,
            Format::Json => run.emit_json(&json!({ "metadata": meta, "start": start, "states": &states[1..] }))?,
        }
        return Ok(true);
    }
    let ends: Vec<f64> = sharded(run.cli.seed, run.cli.samples, |rng, size| {
        (0..size)
            .map(|_| (0..steps).fold(start, |x, _| continuous_step(x, theta, rng).expect("valid input")))
            .collect::<Vec<f64>>()
    })
    .into_iter()
    .flatten()
    .collect();
    match run.cli.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = ends
                .iter()
                .enumerate()
                .map(|(i, &y)| vec![i.to_string(), format_float(y)])
                .collect();
            run.emit(table_to_csv(&["sample", "value"], &rows, &meta))?;
        }
        Format::Json => run.emit_json(&json!({ "metadata": meta, "start": start, "values": ends }))?,
    }
    Ok(true)
}

fn dispatch(cli: Cli) -> Outcome<bool> {
    let run = Run::new(cli)?;
    match run.cli.command {
        Command::Matrix => cmd_matrix(&run),
        Command::Spectrum => cmd_spectrum(&run),
        Command::Verify => cmd_verify(&run),
        Command::Sample => cmd_sample(&run),
        Command::TvCurve => cmd_tv_curve(&run),
        Command::Continuous => cmd_continuous(&run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli).and_then(|pass| if pass { Ok(()) } else { Err(Failure::Check) }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => {
            eprintln!("burnside: check failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("burnside: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("burnside: {e:#}");
            ExitCode::from(1)
        }
    }
}
