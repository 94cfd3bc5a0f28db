//! Batch front end for the gap statistics library. Every subcommand is a
//! reproducible run: output goes to `--out` (or stdout) as CSV, JSON, or a
//! bare number, and a manifest sidecar records the command, its parameters,
//! the library version, wall time, and a checksum of the output bytes.
//! Identical parameters produce byte-identical output.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use gaplab::sieve;
use gaplab::singular::{self, Tuple};
use gaplab::stats::{self, ElementSet};
use gaplab::survivors::{self, SurvivorConfig, SurvivorMode};
use gaplab::thresholds::{iter_log, ThresholdFamily, ThresholdSpec};

/// Largest accepted value for range-like parameters unless GAPLAB_MAX_X
/// overrides it; guards against accidental multi-hour runs.
const DEFAULT_MAX_X: u64 = 10_000_000_000;

#[derive(Parser)]
#[command(
    name = "gaplab",
    version,
    about = "Prime and sifted-set gap statistics as reproducible batch runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count primes up to x.
    Pi(PiArgs),
    /// Stream successor gap records for primes up to x as CSV.
    Gaps(GapsArgs),
    /// Reciprocal sum of elements whose successor gap is below threshold.
    Recipsum(RecipsumArgs),
    /// Empirical share of qualifying gaps against the exponential law.
    Cdf(CdfArgs),
    /// Histogram of prime counts in sliding windows (n, n+h].
    Gallagher(GallagherArgs),
    /// Singular series of one offset tuple, as a JSON record.
    Sing(SingArgs),
    /// First-moment sums of pair or triple singular series values.
    Singsum(SingsumArgs),
    /// Count, list, or pair/triple-count integers with no small prime factor.
    Survivors(SurvivorsArgs),
    /// Tuple occurrence count among primes against its series prediction.
    Hl(HlArgs),
    /// Dyadic-block gap report over a survivor set.
    ReportDyadic(ReportDyadicArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Output file; stdout when omitted. The manifest sidecar lands at
    /// <out>.manifest.json, or on stderr for stdout runs.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PiArgs {
    #[arg(long)]
    x: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GapsArgs {
    #[arg(long)]
    x: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SetKind {
    Primes,
    Survivors,
}

#[derive(Args)]
struct SetArgs {
    /// Element stream the sweep runs over.
    #[arg(long, value_enum, default_value_t = SetKind::Primes)]
    set: SetKind,
    /// Fixed sifting cutoff z (survivors keep spf(m) >= z).
    #[arg(long, conflicts_with = "delta")]
    z: Option<u64>,
    /// Variable sifting exponent, written like 1/10 (spf(m) >= m^delta).
    #[arg(long, value_parser = parse_delta)]
    delta: Option<u64>,
}

impl SetArgs {
    fn element_set(&self) -> Result<ElementSet, CliError> {
        match self.set {
            SetKind::Primes => {
                if self.z.is_some() || self.delta.is_some() {
                    return Err(usage("--z and --delta require --set survivors"));
                }
                Ok(ElementSet::Primes)
            }
            SetKind::Survivors => Ok(ElementSet::Survivors(self.mode())),
        }
    }

    fn mode(&self) -> SurvivorMode {
        match (self.z, self.delta) {
            (Some(z), _) => SurvivorMode::FixedZ { z },
            (None, Some(d_inv)) => SurvivorMode::VariableDelta { d_inv },
            (None, None) => SurvivorMode::VariableDelta {
                d_inv: survivors::DEFAULT_D_INV,
            },
        }
    }

    fn describe(&self) -> String {
        match self.set {
            SetKind::Primes => "primes".into(),
            SetKind::Survivors => match self.mode() {
                SurvivorMode::FixedZ { z } => format!("survivors:z={z}"),
                SurvivorMode::VariableDelta { d_inv } => format!("survivors:delta=1/{d_inv}"),
            },
        }
    }
}

#[derive(Args)]
struct RecipsumArgs {
    #[arg(long)]
    x: u64,
    /// Threshold family: fixed:0.5, logk:2, logk-eps:2,0.5, or adaptive:2.
    #[arg(long, value_parser = ThresholdSpec::from_str)]
    family: ThresholdSpec,
    #[command(flatten)]
    set: SetArgs,
    /// Snapshot points: an ascending list like 10000,100000 or
    /// geometric:<ratio> for powers of the ratio up to x.
    #[arg(long, value_parser = parse_checkpoints)]
    checkpoints: Option<CheckpointArg>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CdfArgs {
    #[arg(long)]
    x: u64,
    #[arg(long, value_parser = ThresholdSpec::from_str)]
    family: ThresholdSpec,
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("window").required(true).multiple(false))]
struct GallagherArgs {
    #[arg(long)]
    x: u64,
    /// Window length as a multiple of ln x.
    #[arg(long, group = "window")]
    lambda: Option<f64>,
    /// Window length directly.
    #[arg(long, group = "window")]
    h: Option<f64>,
    /// Largest histogram bin; fuller windows go to the overflow row.
    #[arg(long, default_value_t = 16)]
    kmax: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SingArgs {
    /// Offset tuple, comma separated: 0,2,6.
    #[arg(long, value_parser = parse_tuple)]
    tuple: Tuple,
    /// Relative truncation error target in (0, 0.1].
    #[arg(long, default_value_t = 1e-5)]
    rel_err: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SumOrder {
    Pair,
    Triple,
    TripleUnordered,
}

#[derive(Args)]
struct SingsumArgs {
    /// Distance bound the sum runs to.
    #[arg(long)]
    h: u64,
    #[arg(long, value_enum, default_value_t = SumOrder::Pair)]
    order: SumOrder,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SurvivorsArgs {
    #[arg(long)]
    x: u64,
    #[arg(long, conflicts_with = "delta")]
    z: Option<u64>,
    #[arg(long, value_parser = parse_delta)]
    delta: Option<u64>,
    /// List members as CSV instead of counting.
    #[arg(long, conflicts_with_all = ["pair", "triple"])]
    list: bool,
    /// Count pairs (m, m + d) that are both members.
    #[arg(long, value_name = "D", conflicts_with = "triple")]
    pair: Option<u64>,
    /// Count triples (m, m + d1, m + d2); pass d1,d2.
    #[arg(long, value_name = "D1,D2", value_parser = parse_pair_of_distances)]
    triple: Option<(u64, u64)>,
    /// Route pair/triple counts through the exact residue-class oracle.
    #[arg(long, requires = "z")]
    crt: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct HlArgs {
    #[arg(long)]
    x: u64,
    #[arg(long, value_parser = parse_tuple)]
    tuple: Tuple,
    #[arg(long, default_value_t = 1e-5)]
    rel_err: f64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ReportDyadicArgs {
    #[arg(long)]
    x: u64,
    #[arg(long, value_parser = ThresholdSpec::from_str)]
    family: ThresholdSpec,
    #[arg(long, conflicts_with = "delta")]
    z: Option<u64>,
    #[arg(long, value_parser = parse_delta)]
    delta: Option<u64>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    out: OutArgs,
}

enum CliError {
    Usage(String),
    Runtime(anyhow::Error),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<gaplab::Error> for CliError {
    fn from(e: gaplab::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

fn parse_tuple(s: &str) -> Result<Tuple, String> {
    let offsets = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| format!("tuple offset {part:?} is not a nonnegative integer"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Tuple::new(offsets).map_err(|e| e.to_string())
}

fn parse_delta(s: &str) -> Result<u64, String> {
    let rest = s
        .strip_prefix("1/")
        .ok_or_else(|| format!("delta must be a unit fraction like 1/10, got {s:?}"))?;
    let d_inv: u64 = rest
        .parse()
        .map_err(|_| format!("delta denominator {rest:?} is not an integer"))?;
    if d_inv < 2 {
        return Err("delta must be at most 1/2".into());
    }
    Ok(d_inv)
}

fn parse_pair_of_distances(s: &str) -> Result<(u64, u64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two distances d1,d2, got {s:?}"));
    }
    let d1 = parts[0]
        .trim()
        .parse::<u64>()
        .map_err(|_| format!("distance {:?} is not an integer", parts[0]))?;
    let d2 = parts[1]
        .trim()
        .parse::<u64>()
        .map_err(|_| format!("distance {:?} is not an integer", parts[1]))?;
    Ok((d1, d2))
}

#[derive(Clone, Debug)]
enum CheckpointArg {
    Geometric(u64),
    List(Vec<u64>),
}

fn parse_checkpoints(s: &str) -> Result<CheckpointArg, String> {
    if let Some(rest) = s.strip_prefix("geometric:") {
        let ratio: u64 = rest
            .parse()
            .map_err(|_| format!("geometric ratio {rest:?} is not an integer"))?;
        if ratio < 2 {
            return Err("geometric ratio must be at least 2".into());
        }
        return Ok(CheckpointArg::Geometric(ratio));
    }
    let list = s
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| format!("checkpoint {part:?} is not an integer"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CheckpointArg::List(list))
}

impl CheckpointArg {
    /// Concrete ascending checkpoint list for a sweep to `x`.
    fn resolve(&self, x: u64) -> Vec<u64> {
        match self {
            CheckpointArg::List(list) => list.clone(),
            CheckpointArg::Geometric(ratio) => {
                let mut points = Vec::new();
                let mut c = *ratio;
                while c < x {
                    points.push(c);
                    c = match c.checked_mul(*ratio) {
                        Some(next) => next,
                        None => break,
                    };
                }
                points.push(x);
                points.dedup();
                points
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            CheckpointArg::Geometric(r) => format!("geometric:{r}"),
            CheckpointArg::List(list) => list
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

fn max_x_cap() -> Result<u64, CliError> {
    match std::env::var("GAPLAB_MAX_X") {
        Ok(raw) => raw
            .parse::<u64>()
            .map_err(|_| usage(format!("GAPLAB_MAX_X is not an integer: {raw:?}"))),
        Err(_) => Ok(DEFAULT_MAX_X),
    }
}

fn check_cap(name: &str, value: u64) -> Result<(), CliError> {
    let cap = max_x_cap()?;
    if value > cap {
        return Err(usage(format!(
            "{name} = {value} exceeds the range cap {cap}; raise GAPLAB_MAX_X to allow it"
        )));
    }
    Ok(())
}

fn check_threads(threads: usize) -> Result<(), CliError> {
    if threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    Ok(())
}

/// Minimal CSV quoting: values holding a comma or quote are wrapped and
/// inner quotes doubled.
fn csv_cell(value: &str) -> String {
    if value.contains(',') || value.contains('"') {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_owned()
    }
}

/// Comparator column value: the (k+1)-fold iterated log at `x`, which the
/// depth-k reciprocal sums are expected to track. Empty when undefined or
/// for the fixed family.
fn comparator_cell(k: Option<u32>, x: u64) -> String {
    match k {
        Some(k) => iter_log(k + 1, x as f64)
            .map(|v| v.to_string())
            .unwrap_or_default(),
        None => String::new(),
    }
}

fn cmd_pi(args: &PiArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    check_threads(args.threads)?;
    let count = sieve::prime_count(args.x, args.threads)?;
    writeln!(out, "{count}")?;
    Ok(json!({"x": args.x, "threads": args.threads}))
}

fn cmd_gaps(args: &GapsArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    writeln!(out, "p,p_next,gap")?;
    let mut sink = Ok(());
    sieve::for_each_prime_gap(args.x, |record| {
        if sink.is_ok() {
            sink = writeln!(out, "{},{},{}", record.p, record.p_next, record.gap);
        }
    })?;
    sink?;
    Ok(json!({"x": args.x}))
}

fn cmd_recipsum(args: &RecipsumArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    check_threads(args.threads)?;
    let set = args.set.element_set()?;
    if matches!(args.family.family(), ThresholdFamily::Adaptive { .. }) && args.threads != 1 {
        return Err(usage(
            "the adaptive family is sequential by contract; rerun with --threads 1",
        ));
    }
    let checkpoints = args
        .checkpoints
        .as_ref()
        .map(|c| c.resolve(args.x))
        .unwrap_or_default();
    let report = stats::reciprocal_sum(args.x, &args.family, set, &checkpoints, args.threads)?;

    let family = csv_cell(&args.family.to_string());
    let eps_cell = match args.family.family() {
        ThresholdFamily::Convergent { eps, .. } => eps.to_string(),
        _ => String::new(),
    };
    let final_k = match args.family.family() {
        ThresholdFamily::Fixed { .. } => None,
        ThresholdFamily::Divergent { k } | ThresholdFamily::Convergent { k, .. } => Some(k),
        ThresholdFamily::Adaptive { k0 } => Some(
            report
                .switch_points
                .last()
                .map(|s| s.new_k)
                .unwrap_or(k0),
        ),
    };

    writeln!(out, "x,family,k,eps,sum,count,comparator_log_k_plus_1_x")?;
    let write_row =
        |out: &mut Vec<u8>, x: u64, sum: f64, count: u64, k: Option<u32>| -> io::Result<()> {
            let k_cell = k.map(|k| k.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{x},{family},{k_cell},{eps_cell},{sum},{count},{}",
                comparator_cell(k, x)
            )
        };
    for cp in &report.checkpoints {
        write_row(out, cp.x, cp.sum, cp.count, cp.k)?;
    }
    if report.checkpoints.last().map(|cp| cp.x) != Some(args.x) {
        write_row(out, args.x, report.sum, report.count, final_k)?;
    }
    Ok(json!({
        "x": args.x,
        "family": family,
        "set": args.set.describe(),
        "checkpoints": args.checkpoints.as_ref().map(|c| c.describe()),
        "threads": args.threads,
    }))
}

fn cmd_cdf(args: &CdfArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    check_threads(args.threads)?;
    let set = args.set.element_set()?;
    if matches!(args.family.family(), ThresholdFamily::Adaptive { .. }) && args.threads != 1 {
        return Err(usage(
            "the adaptive family is sequential by contract; rerun with --threads 1",
        ));
    }
    let report = stats::gap_cdf(args.x, &args.family, set, args.threads)?;
    writeln!(out, "x,family,lambda_at_x,empirical,predicted,ratio")?;
    writeln!(
        out,
        "{},{},{},{},{},{}",
        report.x,
        csv_cell(&args.family.to_string()),
        report.lambda_at_x,
        report.empirical,
        report.predicted,
        report.empirical / report.predicted
    )?;
    Ok(json!({
        "x": args.x,
        "family": args.family.to_string(),
        "set": args.set.describe(),
        "threads": args.threads,
    }))
}

fn cmd_gallagher(args: &GallagherArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    check_threads(args.threads)?;
    let hist = match (args.lambda, args.h) {
        (Some(lambda0), None) => stats::gallagher_histogram(args.x, lambda0, args.kmax, args.threads)?,
        (None, Some(h)) => stats::gallagher_histogram_h(args.x, h, args.kmax, args.threads)?,
        _ => unreachable!("clap enforces exactly one of --lambda/--h"),
    };
    writeln!(out, "x,lambda,h,k,P_k,poisson_prediction,ratio")?;
    for (k, &count) in hist.counts.iter().enumerate() {
        let predicted = hist.x as f64 * hist.poisson_prediction(k);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            hist.x,
            hist.lambda0,
            hist.h,
            k,
            count,
            predicted,
            count as f64 / predicted
        )?;
    }
    writeln!(
        out,
        "{},{},{},overflow,{},,",
        hist.x, hist.lambda0, hist.h, hist.overflow
    )?;
    Ok(json!({
        "x": args.x,
        "lambda": args.lambda,
        "h": args.h,
        "kmax": args.kmax,
        "threads": args.threads,
    }))
}

fn cmd_sing(args: &SingArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    let series = singular::singular_series(&args.tuple, args.rel_err)?;
    let record = json!({
        "tuple": args.tuple.offsets(),
        "value": series.value,
        "truncation_prime": series.truncation_prime,
        "tail_bound": series.tail_bound,
        "admissible": series.admissible,
    });
    writeln!(out, "{record}")?;
    Ok(json!({
        "tuple": args.tuple.offsets(),
        "rel_err": args.rel_err,
    }))
}

fn cmd_singsum(args: &SingsumArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--h", args.h)?;
    check_threads(args.threads)?;
    let (order, sum, normalized) = match args.order {
        SumOrder::Pair => {
            let sum = singular::pair_sum(args.h, args.threads)?;
            ("pair", sum, sum / args.h as f64)
        }
        SumOrder::Triple => {
            let sum = singular::triple_sum(args.h, args.threads)?;
            ("triple", sum, sum / (args.h as f64 * args.h as f64))
        }
        SumOrder::TripleUnordered => {
            let sum = singular::triple_sum_unordered(args.h, args.threads)?;
            ("triple-unordered", sum, sum / (args.h as f64 * args.h as f64))
        }
    };
    writeln!(out, "h,order,sum,normalized")?;
    writeln!(out, "{},{},{},{}", args.h, order, sum, normalized)?;
    Ok(json!({
        "h": args.h,
        "order": order,
        "threads": args.threads,
    }))
}

fn cmd_survivors(args: &SurvivorsArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    check_threads(args.threads)?;
    let mode = match (args.z, args.delta) {
        (Some(z), _) => SurvivorMode::FixedZ { z },
        (None, Some(d_inv)) => SurvivorMode::VariableDelta { d_inv },
        (None, None) => SurvivorMode::VariableDelta {
            d_inv: survivors::DEFAULT_D_INV,
        },
    };
    let config = SurvivorConfig::new(mode, args.x)?;
    let mode_desc = match mode {
        SurvivorMode::FixedZ { z } => format!("z={z}"),
        SurvivorMode::VariableDelta { d_inv } => format!("delta=1/{d_inv}"),
    };

    let operation;
    if args.list {
        operation = "list";
        writeln!(out, "m")?;
        let mut sink = Ok(());
        survivors::for_each_survivor(&config, |m| {
            if sink.is_ok() {
                sink = writeln!(out, "{m}");
            }
        })?;
        sink?;
    } else if let Some(d) = args.pair {
        let count = if args.crt {
            let z = args.z.expect("clap requires --z with --crt");
            survivors::crt_pair_oracle(args.x, z, d)?
        } else {
            survivors::pair_count(&config, d, args.threads)?
        };
        operation = "pair";
        writeln!(out, "{count}")?;
    } else if let Some((d1, d2)) = args.triple {
        let count = if args.crt {
            let z = args.z.expect("clap requires --z with --crt");
            survivors::crt_triple_oracle(args.x, z, d1, d2)?
        } else {
            survivors::triple_count(&config, d1, d2, args.threads)?
        };
        operation = "triple";
        writeln!(out, "{count}")?;
    } else {
        operation = "count";
        writeln!(out, "{}", survivors::survivor_count(&config, args.threads)?)?;
    }
    Ok(json!({
        "x": args.x,
        "mode": mode_desc,
        "operation": operation,
        "pair": args.pair,
        "triple": args.triple.map(|(d1, d2)| vec![d1, d2]),
        "crt": args.crt,
        "threads": args.threads,
    }))
}

fn cmd_hl(args: &HlArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    check_threads(args.threads)?;
    let cmp = singular::tuple_compare(args.x, &args.tuple, args.rel_err, args.threads)?;
    let tuple_text = args
        .tuple
        .offsets()
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    writeln!(
        out,
        "x,tuple,count,predicted,ratio,series_value,truncation_prime"
    )?;
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        cmp.x,
        csv_cell(&tuple_text),
        cmp.count,
        cmp.predicted,
        cmp.ratio,
        cmp.series.value,
        cmp.series.truncation_prime
    )?;
    Ok(json!({
        "x": args.x,
        "tuple": args.tuple.offsets(),
        "rel_err": args.rel_err,
        "threads": args.threads,
    }))
}

fn cmd_report_dyadic(args: &ReportDyadicArgs, out: &mut Vec<u8>) -> Result<Value, CliError> {
    check_cap("--x", args.x)?;
    check_threads(args.threads)?;
    if matches!(args.family.family(), ThresholdFamily::Adaptive { .. }) {
        return Err(usage(
            "dyadic reports freeze the threshold per block; pick a non-adaptive family",
        ));
    }
    let mode = match (args.z, args.delta) {
        (Some(z), _) => SurvivorMode::FixedZ { z },
        (None, Some(d_inv)) => SurvivorMode::VariableDelta { d_inv },
        (None, None) => SurvivorMode::VariableDelta {
            d_inv: survivors::DEFAULT_D_INV,
        },
    };
    let report = stats::survivor_gap_report(mode, &args.family, args.x, args.threads)?;
    writeln!(
        out,
        "M,2M,population,qualifying_frozen,qualifying_exact,comparator"
    )?;
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.lo, row.hi, row.population, row.qualifying_frozen, row.qualifying_exact, row.comparator
        )?;
    }
    writeln!(
        out,
        "aggregate,,{},{},{},{}",
        report.population, report.qualifying_frozen, report.qualifying_exact, report.comparator
    )?;
    let mode_desc = match mode {
        SurvivorMode::FixedZ { z } => format!("z={z}"),
        SurvivorMode::VariableDelta { d_inv } => format!("delta=1/{d_inv}"),
    };
    Ok(json!({
        "x": args.x,
        "family": args.family.to_string(),
        "mode": mode_desc,
        "threads": args.threads,
    }))
}

fn dispatch(command: &Command, out: &mut Vec<u8>) -> Result<(&'static str, Value), CliError> {
    match command {
        Command::Pi(a) => Ok(("pi", cmd_pi(a, out)?)),
        Command::Gaps(a) => Ok(("gaps", cmd_gaps(a, out)?)),
        Command::Recipsum(a) => Ok(("recipsum", cmd_recipsum(a, out)?)),
        Command::Cdf(a) => Ok(("cdf", cmd_cdf(a, out)?)),
        Command::Gallagher(a) => Ok(("gallagher", cmd_gallagher(a, out)?)),
        Command::Sing(a) => Ok(("sing", cmd_sing(a, out)?)),
        Command::Singsum(a) => Ok(("singsum", cmd_singsum(a, out)?)),
        Command::Survivors(a) => Ok(("survivors", cmd_survivors(a, out)?)),
        Command::Hl(a) => Ok(("hl", cmd_hl(a, out)?)),
        Command::ReportDyadic(a) => Ok(("report-dyadic", cmd_report_dyadic(a, out)?)),
    }
}

fn out_path(command: &Command) -> Option<&PathBuf> {
    let out = match command {
        Command::Pi(a) => &a.out,
        Command::Gaps(a) => &a.out,
        Command::Recipsum(a) => &a.out,
        Command::Cdf(a) => &a.out,
        Command::Gallagher(a) => &a.out,
        Command::Sing(a) => &a.out,
        Command::Singsum(a) => &a.out,
        Command::Survivors(a) => &a.out,
        Command::Hl(a) => &a.out,
        Command::ReportDyadic(a) => &a.out,
    };
    out.out.as_ref()
}

fn deliver(command: &Command, bytes: &[u8], manifest: &Value) -> Result<(), CliError> {
    match out_path(command) {
        Some(path) => {
            fs::write(path, bytes)?;
            let mut sidecar = path.as_os_str().to_owned();
            sidecar.push(".manifest.json");
            fs::write(PathBuf::from(sidecar), format!("{manifest}\n"))?;
        }
        None => {
            io::stdout().write_all(bytes)?;
            eprintln!("{manifest}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let mut bytes = Vec::new();
    let (name, params) = match dispatch(&cli.command, &mut bytes) {
        Ok(done) => done,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let digest = Sha256::digest(&bytes);
    let mut checksum = String::with_capacity(64);
    for byte in digest {
        checksum.push_str(&format!("{byte:02x}"));
    }
    let manifest = json!({
        "command": name,
        "params": params,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_ms": started.elapsed().as_millis() as u64,
        "output_sha256": checksum,
    });
    match deliver(&cli.command, &bytes, &manifest) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
