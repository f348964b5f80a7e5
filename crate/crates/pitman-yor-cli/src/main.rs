//! Command-line front end: draw weight sequences and random measures,
//! evaluate stable and Mittag-Leffler functions, evaluate rate functions,
//! and run the verification suites.
//!
//! Exit codes: 0 success (for `verify`: every check passed); 1 a verify
//! check failed or a suite aborted; 2 usage errors (unknown flags, bad
//! operand values, non-monotone prefixes for the ordered-simplex rates,
//! malformed plan files); 3 a sampler stop rule hit its budget before the
//! truncation target; 4 a numerics failure (quadrature non-convergence,
//! series divergence, precision loss, refinement depth exhausted).
//!
//! Output is a pure function of the argument vector, the seed, and the
//! build: rerunning the same invocation reproduces it byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pitman_yor::experiments::{ExperimentError, ExperimentPlan, Suite, TestReport, DEFAULT_SEED};
use pitman_yor::quad::QuadratureConfig;
use pitman_yor::rates::{
    rate_i1, rate_i2, rate_in, rate_j1, rate_j2, rate_j_rho, rate_jn, rate_measure,
    sup_partition_rate, MixtureMeasure, PartitionGrid, RateError, Tail, TailedSequence,
};
use pitman_yor::sampler::{
    sample_gem, sample_pd0_subordinator, sample_py_measure, LadderStop, PYParams, SamplerError,
    StickStop,
};
use pitman_yor::stable::{
    mittag_leffler_moment, mittag_leffler_pdf, stable_cdf, stable_log_sf_lower,
    stable_log_sf_upper, stable_pdf, StableError, StableIndex,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SEED_ENV: &str = "PYSIM_SEED";
const SAMPLE_MAX_STICKS: usize = 1_000_000;
const SAMPLE_MAX_RUNGS: usize = 2_000_000;

#[derive(Parser)]
#[command(
    name = "pysim",
    version,
    about = "Pitman-Yor sampling, distribution evaluation, rate functions, \
             and verification suites"
)]
struct Cli {
    /// RNG seed; overrides the PYSIM_SEED environment variable.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output format (sample, density, rates default to csv; verify
    /// defaults to text and accepts text or json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Draw weight sequences, random measures, or cell masses.
    Sample(SampleArgs),
    /// Evaluate distribution functions of the stable and Mittag-Leffler
    /// laws, their moments, and their tail estimates.
    Density(DensityArgs),
    /// Evaluate rate functions on sequences, grids, and mixture measures.
    Rates(RateArgs),
    /// Run verification suites and report per-check pass/fail results.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SampleArgs {
    /// Discount parameter, in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Concentration parameter; requires theta + alpha > 0.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,

    /// Number of independent draws.
    #[arg(long, default_value_t = 1)]
    n_draws: usize,

    /// Truncation target: stick-based draws stop when the leftover mass
    /// falls below this, ladder draws when the certified relative tail
    /// bound does. Exit code 3 if the internal budget runs out first.
    #[arg(long, default_value_t = 1e-4)]
    truncation_eps: f64,

    /// Representation to draw: stick weights in size-biased order, ranked
    /// ladder weights (theta = 0 only), a measure with atom locations, or
    /// cell masses over a partition grid.
    #[arg(long, value_enum, default_value_t = Repr::Stick)]
    representation: Repr,

    /// Interior cut points in (0,1) for the cells representation, comma
    /// separated.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Repr {
    Stick,
    Ladder,
    Measure,
    Cells,
}

impl Repr {
    fn name(self) -> &'static str {
        match self {
            Repr::Stick => "stick",
            Repr::Ladder => "ladder",
            Repr::Measure => "measure",
            Repr::Cells => "cells",
        }
    }
}

#[derive(Args)]
struct DensityArgs {
    /// Stable index, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Function to evaluate: cdf or pdf of the normalized stable variable,
    /// ml-pdf or ml-moment of the Mittag-Leffler variable, or the
    /// tail-lower / tail-upper log-probability estimates.
    #[arg(long, value_enum)]
    which: Which,

    /// Evaluation point, or a comma-separated grid of points.
    #[arg(long)]
    at: String,

    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,

    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Which {
    Cdf,
    Pdf,
    MlPdf,
    MlMoment,
    TailLower,
    TailUpper,
}

impl Which {
    fn name(self) -> &'static str {
        match self {
            Which::Cdf => "cdf",
            Which::Pdf => "pdf",
            Which::MlPdf => "ml-pdf",
            Which::MlMoment => "ml-moment",
            Which::TailLower => "tail-lower",
            Which::TailUpper => "tail-upper",
        }
    }

    fn is_tail(self) -> bool {
        matches!(self, Which::TailLower | Which::TailUpper)
    }
}

#[derive(Args)]
struct RateArgs {
    /// Rate function: j1/j2 on ratio sequences, i1/i2 on ordered-simplex
    /// sequences, j on the scalar largest-weight ratio, jn on finite ratio
    /// vectors, in on grid cell masses, measure on a mixture measure, sup
    /// for the partition supremum of a mixture measure.
    #[arg(long, value_enum)]
    rate: RateKind,

    /// Sequence prefix for j1, j2, i1, i2, comma separated.
    #[arg(long, value_delimiter = ',')]
    prefix: Option<Vec<f64>>,

    /// Tail rule beyond the prefix: `zeros` or `constant:<c>` with c in
    /// (0, 1].
    #[arg(long, default_value = "zeros")]
    tail: String,

    /// Evaluation point for the scalar rate j; accepts `inf`.
    #[arg(long)]
    at: Option<f64>,

    /// Ratio coordinates for jn, comma separated.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,

    /// Cell masses for in, comma separated, one per grid cell.
    #[arg(long, value_delimiter = ',')]
    masses: Option<Vec<f64>>,

    /// Interior grid cuts in (0,1) for in, comma separated.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,

    /// Atoms for measure and sup as `location:mass` pairs, comma
    /// separated; the leftover mass is uniform on [0,1].
    #[arg(long)]
    atoms: Option<String>,

    /// Maximum refinement depth for sup.
    #[arg(long, default_value_t = 12)]
    depth: u32,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum RateKind {
    J1,
    J2,
    I1,
    I2,
    J,
    Jn,
    In,
    Measure,
    Sup,
}

impl RateKind {
    fn name(self) -> &'static str {
        match self {
            RateKind::J1 => "j1",
            RateKind::J2 => "j2",
            RateKind::I1 => "i1",
            RateKind::I2 => "i2",
            RateKind::J => "j",
            RateKind::Jn => "jn",
            RateKind::In => "in",
            RateKind::Measure => "measure",
            RateKind::Sup => "sup",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite to run, or `all` for every suite in order.
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,

    /// Plan file with `key = value` overrides applied on top of each
    /// suite's stock plan.
    #[arg(long, value_name = "PATH")]
    plan: Option<PathBuf>,

    /// Write per-replica raw series to this CSV file.
    #[arg(long, value_name = "PATH")]
    raw_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SuiteArg {
    Lln0,
    Lln1,
    Slopes,
    Mgf,
    Equiv,
    Fluct,
    Coalesce,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Lln0 => vec![Suite::LlnAlpha0],
            SuiteArg::Lln1 => vec![Suite::LlnAlpha1],
            SuiteArg::Slopes => vec![Suite::Slopes],
            SuiteArg::Mgf => vec![Suite::Mgf],
            SuiteArg::Equiv => vec![Suite::Equivalence],
            SuiteArg::Fluct => vec![Suite::Fluctuation],
            SuiteArg::Coalesce => vec![Suite::Coalescence],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

struct CmdOut {
    content: String,
    exit: i32,
}

fn main() {
    let cli = Cli::parse();
    let output = cli.output.clone();
    match run(cli) {
        Ok(out) => {
            if let Some(path) = output {
                if let Err(e) = fs::write(&path, &out.content) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    process::exit(2);
                }
            } else {
                let mut stdout = io::stdout().lock();
                match stdout
                    .write_all(out.content.as_bytes())
                    .and_then(|()| stdout.flush())
                {
                    Ok(()) => {}
                    Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                    Err(e) => {
                        eprintln!("error: cannot write to stdout: {e}");
                        process::exit(2);
                    }
                }
            }
            process::exit(out.exit);
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            process::exit(f.code);
        }
    }
}

fn run(cli: Cli) -> Result<CmdOut, Failure> {
    let seed = resolve_seed(cli.seed)?;
    let format = cli.format.unwrap_or(Format::Csv);
    match cli.command {
        Command::Sample(args) => cmd_sample(&args, seed.unwrap_or(DEFAULT_SEED), format),
        Command::Density(args) => cmd_density(&args, seed.unwrap_or(DEFAULT_SEED), format),
        Command::Rates(args) => cmd_rates(&args, seed.unwrap_or(DEFAULT_SEED), format),
        Command::Verify(args) => {
            let format = match cli.format {
                None => Format::Text,
                Some(Format::Csv) => {
                    return Err(usage(
                        "verify reports are text or json; per-replica data goes to --raw-csv",
                    ))
                }
                Some(f) => f,
            };
            cmd_verify(&args, seed, format)
        }
    }
}

/// Seed precedence: `--seed` flag, then the environment variable, then the
/// caller's default.
fn resolve_seed(flag: Option<u64>) -> Result<Option<u64>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|e| usage(format!("{SEED_ENV} must be an unsigned integer: {e}"))),
        Err(_) => Ok(None),
    }
}

fn sample_failure(e: SamplerError) -> Failure {
    let code = match e {
        SamplerError::StickBudget { .. }
        | SamplerError::RankedBudget { .. }
        | SamplerError::LadderBudget { .. }
        | SamplerError::MeasureBudget { .. } => 3,
        _ => 2,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn stable_failure(e: StableError) -> Failure {
    let code = match e {
        StableError::BadIndex { .. } | StableError::BadArgument { .. } => 2,
        _ => 4,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn cmd_sample(args: &SampleArgs, seed: u64, format: Format) -> Result<CmdOut, Failure> {
    let params = PYParams::new(args.alpha, args.theta).map_err(sample_failure)?;
    if !(args.truncation_eps > 0.0 && args.truncation_eps < 1.0) {
        return Err(usage(format!(
            "--truncation-eps must lie in (0,1), got {}",
            args.truncation_eps
        )));
    }
    if args.n_draws == 0 {
        return Err(usage("--n-draws must be at least 1"));
    }
    let stick_stop = StickStop {
        max_sticks: SAMPLE_MAX_STICKS,
        residual_eps: args.truncation_eps,
    };
    let ladder_stop = LadderStop {
        max_terms: SAMPLE_MAX_RUNGS,
        weight_eps: args.truncation_eps,
    };

    let full_grid = if args.representation == Repr::Cells {
        let mut g = vec![0.0];
        g.extend_from_slice(&args.grid);
        g.push(1.0);
        g
    } else if args.grid.is_empty() {
        Vec::new()
    } else {
        return Err(usage("--grid applies only to the cells representation"));
    };

    // One weight row per rank; `locations` is filled for the measure
    // representation only.
    struct Draw {
        weights: Vec<f64>,
        locations: Option<Vec<f64>>,
    }

    let mut draws = Vec::with_capacity(args.n_draws);
    for draw_id in 0..args.n_draws {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw_id as u64);
        let draw = match args.representation {
            Repr::Stick => {
                let s = sample_gem(params, &mut rng, &stick_stop).map_err(sample_failure)?;
                Draw {
                    weights: s.sticks,
                    locations: None,
                }
            }
            Repr::Ladder => {
                if args.theta != 0.0 {
                    return Err(usage(format!(
                        "the ladder representation requires theta = 0, got {}",
                        args.theta
                    )));
                }
                let alpha = StableIndex::new(args.alpha).map_err(stable_failure)?;
                let (w, _) = sample_pd0_subordinator(alpha, &mut rng, &ladder_stop)
                    .map_err(sample_failure)?;
                Draw {
                    weights: w.weights,
                    locations: None,
                }
            }
            Repr::Measure => {
                let m = sample_py_measure(params, &mut rng, &stick_stop).map_err(sample_failure)?;
                let (locations, weights) = m.atoms.iter().copied().unzip();
                Draw {
                    weights,
                    locations: Some(locations),
                }
            }
            Repr::Cells => {
                let m = sample_py_measure(params, &mut rng, &stick_stop).map_err(sample_failure)?;
                Draw {
                    weights: m.cell_masses(&full_grid).map_err(sample_failure)?,
                    locations: None,
                }
            }
        };
        draws.push(draw);
    }

    let content = match format {
        Format::Csv => {
            let mut out = format!("# seed={seed}\n");
            if args.representation == Repr::Measure {
                out.push_str("draw_id,rank,weight,location\n");
            } else {
                out.push_str("draw_id,rank,weight\n");
            }
            for (draw_id, d) in draws.iter().enumerate() {
                for (i, &w) in d.weights.iter().enumerate() {
                    match &d.locations {
                        Some(locs) => {
                            let _ = writeln!(out, "{draw_id},{},{w},{}", i + 1, locs[i]);
                        }
                        None => {
                            let _ = writeln!(out, "{draw_id},{},{w}", i + 1);
                        }
                    }
                }
            }
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = draws
                .iter()
                .enumerate()
                .map(|(draw_id, d)| {
                    let mut obj = json!({
                        "draw_id": draw_id,
                        "weights": d.weights,
                    });
                    if let Some(locs) = &d.locations {
                        obj["locations"] = json!(locs);
                    }
                    obj
                })
                .collect();
            let mut top = json!({
                "seed": seed,
                "representation": args.representation.name(),
                "alpha": args.alpha,
                "theta": args.theta,
                "draws": rows,
            });
            if args.representation == Repr::Cells {
                top["grid"] = json!(full_grid);
            }
            pretty(&top)
        }
        Format::Text => {
            let mut out = format!(
                "# seed={seed}\n# representation={} alpha={} theta={}\n",
                args.representation.name(),
                args.alpha,
                args.theta
            );
            for (draw_id, d) in draws.iter().enumerate() {
                let _ = write!(out, "draw {draw_id}:");
                for (i, &w) in d.weights.iter().enumerate() {
                    match &d.locations {
                        Some(locs) => {
                            let _ = write!(out, " {w}@{}", locs[i]);
                        }
                        None => {
                            let _ = write!(out, " {w}");
                        }
                    }
                }
                out.push('\n');
            }
            out
        }
    };
    Ok(CmdOut { content, exit: 0 })
}

fn cmd_density(args: &DensityArgs, seed: u64, format: Format) -> Result<CmdOut, Failure> {
    let alpha = StableIndex::new(args.alpha).map_err(stable_failure)?;
    let xs = parse_f64_list(&args.at).map_err(|e| usage(format!("--at: {e}")))?;
    let cfg = QuadratureConfig {
        abs_tol: args.abs_tol,
        rel_tol: args.rel_tol,
        ..QuadratureConfig::default()
    };

    // Rows are `(x, value, optional log value)`; tail estimates carry the
    // log-domain probability alongside its (possibly underflowing) exp.
    let mut rows: Vec<(f64, f64, Option<f64>)> = Vec::with_capacity(xs.len());
    for &x in &xs {
        let row = match args.which {
            Which::Cdf => (x, stable_cdf(alpha, x, &cfg).map_err(stable_failure)?, None),
            Which::Pdf => (x, stable_pdf(alpha, x, &cfg).map_err(stable_failure)?, None),
            Which::MlPdf => (
                x,
                mittag_leffler_pdf(alpha, x).map_err(stable_failure)?,
                None,
            ),
            Which::MlMoment => (
                x,
                mittag_leffler_moment(alpha, x).map_err(stable_failure)?,
                None,
            ),
            Which::TailLower => {
                let t = stable_log_sf_lower(alpha, x, &cfg).map_err(stable_failure)?;
                (x, t.log_prob.exp(), Some(t.log_prob))
            }
            Which::TailUpper => {
                let t = stable_log_sf_upper(alpha, x, &cfg).map_err(stable_failure)?;
                (x, t.log_prob.exp(), Some(t.log_prob))
            }
        };
        rows.push(row);
    }

    let content = match format {
        Format::Csv => {
            let mut out = format!("# seed={seed}\n");
            if args.which.is_tail() {
                out.push_str("x,value,log_value\n");
                for &(x, v, lv) in &rows {
                    let _ = writeln!(out, "{x},{v},{}", lv.expect("tail rows carry logs"));
                }
            } else {
                out.push_str("x,value\n");
                for &(x, v, _) in &rows {
                    let _ = writeln!(out, "{x},{v}");
                }
            }
            out
        }
        Format::Json => {
            let json_rows: Vec<serde_json::Value> = rows
                .iter()
                .map(|&(x, v, lv)| {
                    let mut obj = json!({"x": x, "value": v});
                    if let Some(lv) = lv {
                        obj["log_value"] = json!(lv);
                    }
                    obj
                })
                .collect();
            pretty(&json!({
                "seed": seed,
                "which": args.which.name(),
                "alpha": args.alpha,
                "rows": json_rows,
            }))
        }
        Format::Text => {
            let mut out = format!("# seed={seed}\n");
            for &(x, v, lv) in &rows {
                match lv {
                    Some(lv) => {
                        let _ = writeln!(
                            out,
                            "{}({x}; alpha={}) = {v} (log {lv})",
                            args.which.name(),
                            args.alpha
                        );
                    }
                    None => {
                        let _ = writeln!(
                            out,
                            "{}({x}; alpha={}) = {v}",
                            args.which.name(),
                            args.alpha
                        );
                    }
                }
            }
            out
        }
    };
    Ok(CmdOut { content, exit: 0 })
}

/// Rate-function values are either exact counts or extended reals; the
/// distinction survives into JSON, where infinity has no number form.
enum RateValue {
    Count(usize),
    Extended(f64),
}

impl RateValue {
    fn display(&self) -> String {
        match self {
            RateValue::Count(n) => n.to_string(),
            RateValue::Extended(x) => x.to_string(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            RateValue::Count(n) => json!(n),
            RateValue::Extended(x) if x.is_finite() => json!(x),
            RateValue::Extended(x) if *x > 0.0 => json!("inf"),
            RateValue::Extended(_) => json!("-inf"),
        }
    }
}

fn rate_failure(e: RateError) -> Failure {
    match e {
        RateError::DepthInsufficient { .. } => Failure {
            code: 4,
            message: e.to_string(),
        },
        _ => usage(e.to_string()),
    }
}

fn cmd_rates(args: &RateArgs, seed: u64, format: Format) -> Result<CmdOut, Failure> {
    let sequence = |args: &RateArgs| -> Result<TailedSequence, Failure> {
        let prefix = args.prefix.clone().unwrap_or_default();
        let tail = parse_tail(&args.tail)?;
        TailedSequence::new(prefix, tail).map_err(rate_failure)
    };
    let ordered_sequence = |args: &RateArgs| -> Result<TailedSequence, Failure> {
        let x = sequence(args)?;
        if !x.in_nabla() {
            return Err(usage(
                "the ordered-simplex rates need a nonincreasing prefix with the tail \
                 value no larger than its last entry",
            ));
        }
        Ok(x)
    };
    let mixture = |args: &RateArgs| -> Result<MixtureMeasure, Failure> {
        let atoms = match &args.atoms {
            Some(raw) => parse_atoms(raw)?,
            None => Vec::new(),
        };
        let uniform_mass = 1.0 - atoms.iter().map(|a| a.1).sum::<f64>();
        MixtureMeasure::new(atoms, uniform_mass).map_err(rate_failure)
    };

    let value = match args.rate {
        RateKind::J1 => RateValue::Extended(rate_j1(&sequence(args)?)),
        RateKind::J2 => RateValue::Extended(rate_j2(&sequence(args)?)),
        RateKind::I1 => RateValue::Extended(rate_i1(&ordered_sequence(args)?)),
        RateKind::I2 => RateValue::Extended(rate_i2(&ordered_sequence(args)?)),
        RateKind::J => {
            let x = args.at.ok_or_else(|| usage("rate j needs --at"))?;
            RateValue::Extended(rate_j_rho(x))
        }
        RateKind::Jn => {
            let u = args
                .ratios
                .as_deref()
                .ok_or_else(|| usage("rate jn needs --ratios"))?;
            RateValue::Count(rate_jn(u).map_err(rate_failure)?)
        }
        RateKind::In => {
            let y = args
                .masses
                .as_deref()
                .ok_or_else(|| usage("rate in needs --masses"))?;
            let cuts = args
                .grid
                .clone()
                .ok_or_else(|| usage("rate in needs --grid"))?;
            let grid = PartitionGrid::new(cuts).map_err(rate_failure)?;
            RateValue::Count(rate_in(y, &grid).map_err(rate_failure)?)
        }
        RateKind::Measure => RateValue::Count(rate_measure(&mixture(args)?)),
        RateKind::Sup => {
            RateValue::Count(sup_partition_rate(&mixture(args)?, args.depth).map_err(rate_failure)?)
        }
    };

    let content = match format {
        Format::Csv => format!(
            "# seed={seed}\nrate,value\n{},{}\n",
            args.rate.name(),
            value.display()
        ),
        Format::Json => pretty(&json!({
            "seed": seed,
            "rate": args.rate.name(),
            "value": value.to_json(),
        })),
        Format::Text => format!(
            "# seed={seed}\n{} = {}\n",
            args.rate.name(),
            value.display()
        ),
    };
    Ok(CmdOut { content, exit: 0 })
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Plan(_) | ExperimentError::Parse { .. } => usage(e.to_string()),
        other => Failure {
            code: 1,
            message: other.to_string(),
        },
    }
}

fn cmd_verify(args: &VerifyArgs, seed: Option<u64>, format: Format) -> Result<CmdOut, Failure> {
    let plan_text = match &args.plan {
        Some(path) => Some(
            fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read plan file {}: {e}", path.display())))?,
        ),
        None => None,
    };

    let suites = args.suite.suites();
    let mut reports: Vec<TestReport> = Vec::with_capacity(suites.len());
    for suite in &suites {
        let mut plan = ExperimentPlan::default_for(*suite);
        if let Some(text) = &plan_text {
            plan = plan.apply_text(text).map_err(experiment_failure)?;
        }
        if let Some(s) = seed {
            plan.seed = s;
        }
        let report =
            pitman_yor::experiments::run_suite(*suite, &plan).map_err(experiment_failure)?;
        reports.push(report);
    }

    if let Some(path) = &args.raw_csv {
        let mut raw = String::new();
        raw.push_str("series,replica,value\n");
        for report in &reports {
            for series in &report.raw {
                for (i, v) in series.values.iter().enumerate() {
                    let _ = writeln!(raw, "{},{i},{v}", series.label);
                }
            }
        }
        fs::write(path, raw).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }

    let all_pass = reports.iter().all(|r| r.all_pass());
    let content = match format {
        Format::Text => {
            let mut out = String::new();
            for report in &reports {
                out.push_str(&report.render_text());
            }
            out
        }
        Format::Json => {
            if args.suite == SuiteArg::All {
                serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"
            } else {
                reports[0].to_json() + "\n"
            }
        }
        Format::Csv => unreachable!("rejected in run()"),
    };
    Ok(CmdOut {
        content,
        exit: if all_pass { 0 } else { 1 },
    })
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

fn parse_f64_list(raw: &str) -> Result<Vec<f64>, String> {
    let xs: Result<Vec<f64>, _> = raw
        .split(',')
        .map(|tok| tok.trim().parse::<f64>())
        .collect();
    let xs = xs.map_err(|e| e.to_string())?;
    if xs.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(xs)
}

fn parse_tail(raw: &str) -> Result<Tail, Failure> {
    if raw == "zeros" {
        return Ok(Tail::Zeros);
    }
    if let Some(rest) = raw.strip_prefix("constant:") {
        let c: f64 = rest
            .trim()
            .parse()
            .map_err(|e| usage(format!("--tail constant value: {e}")))?;
        return Ok(Tail::Constant(c));
    }
    Err(usage(format!(
        "--tail must be `zeros` or `constant:<c>`, got `{raw}`"
    )))
}

fn parse_atoms(raw: &str) -> Result<Vec<(f64, f64)>, Failure> {
    raw.split(',')
        .map(|pair| {
            let (loc, mass) = pair
                .split_once(':')
                .ok_or_else(|| usage(format!("--atoms entry `{pair}` is not `location:mass`")))?;
            let loc: f64 = loc
                .trim()
                .parse()
                .map_err(|e| usage(format!("--atoms location `{loc}`: {e}")))?;
            let mass: f64 = mass
                .trim()
                .parse()
                .map_err(|e| usage(format!("--atoms mass `{mass}`: {e}")))?;
            Ok((loc, mass))
        })
        .collect()
}
