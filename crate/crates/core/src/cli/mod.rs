//! Command-line front end. [`run`] parses arguments, dispatches to a
//! command and writes JSON or CSV.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a closed form disagreed with its
//! reference computation.

mod commands;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::limits::LimitFamily;
use crate::numerics::{bigfloat, ScalarMode};
use crate::weights::{Model, UrnSpec, WeightSequence};

pub use output::{emit_plot_data, Cell, Format, Report, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DISCREPANCY: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "urnlab", version, about = "Exact laws, moments and limits of weighted two-color and multicolor urns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Scalar mode: exact, bigfloat or float. Defaults to exact for rational
    /// weights.
    #[arg(long, global = true)]
    pub mode: Option<ScalarMode>,
    /// Big-float precision in bits (at least 64).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(64..=1 << 20))]
    pub precision_bits: Option<u64>,
    /// Fixed-point decimal digits for CSV numbers.
    #[arg(long, global = true)]
    pub decimals: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Two-color absorption law from a closed form or the recurrence.
    Pmf(PmfArgs),
    /// Joint absorption law of an r-color urn.
    PmfMulti(PmfMultiArgs),
    /// Moments of the sampling urn (closed form) or of any urn (summation).
    Moments(MomentsArgs),
    /// OK-Corral moments, the M_s polynomials and their expectations.
    OkcMoments(OkcMomentsArgs),
    /// Limit laws Y_m, Z_n and W.
    Limit(LimitArgs),
    /// Jacobi theta function against its triple product.
    Theta(ThetaArgs),
    /// Model I with (A, B) against model II with reciprocal weights.
    DualityCheck(SpecArgs),
    /// Ground-truth law by recurrence or path enumeration.
    Oracle(OracleArgs),
    /// Monte Carlo absorption counts and a chi-square test.
    Simulate(SimulateArgs),
    /// Closed forms, recurrence and simulation side by side.
    Compare(CompareArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pmf(_) => "pmf",
            Command::PmfMulti(_) => "pmf-multi",
            Command::Moments(_) => "moments",
            Command::OkcMoments(_) => "okc-moments",
            Command::Limit(_) => "limit",
            Command::Theta(_) => "theta",
            Command::DualityCheck(_) => "duality-check",
            Command::Oracle(_) => "oracle",
            Command::Simulate(_) => "simulate",
            Command::Compare(_) => "compare",
        }
    }
}

/// An urn given either as `--A/--B/--n/--m` or as `--weights/--counts`.
#[derive(Args, Debug, Clone, Serialize)]
pub struct SpecArgs {
    #[arg(long, default_value = "I")]
    pub model: Model,
    /// White weights.
    #[arg(long = "A", id = "A", conflicts_with = "weights")]
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<WeightSequence>,
    /// Black weights.
    #[arg(long = "B", id = "B", conflicts_with = "weights")]
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<WeightSequence>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// One weight sequence per color; the last color is the absorbing one.
    #[arg(long, num_args = 2.., conflicts_with_all = ["n", "m"])]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<WeightSequence>,
    /// Initial counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<u64>,
}

impl SpecArgs {
    pub fn is_empty(&self) -> bool {
        self.a.is_none() && self.b.is_none() && self.weights.is_empty()
    }

    pub fn spec(&self) -> Result<UrnSpec> {
        if !self.weights.is_empty() {
            if self.counts.len() != self.weights.len() {
                return Err(Error::InvalidArgument(format!(
                    "--counts: expected {} values, one per --weights entry, got {}",
                    self.weights.len(),
                    self.counts.len()
                )));
            }
            return UrnSpec::new(self.model, self.weights.clone(), self.counts.clone());
        }
        let need = |flag: &str| Error::InvalidArgument(format!("{flag} is required"));
        let a = self.a.clone().ok_or_else(|| need("--A"))?;
        let b = self.b.clone().ok_or_else(|| need("--B"))?;
        let (n, m) = match (self.n, self.m, self.counts.as_slice()) {
            (Some(n), Some(m), []) => (n, m),
            (None, None, [n, m]) => (*n, *m),
            (None, _, []) => return Err(need("--n")),
            (_, None, []) => return Err(need("--m")),
            _ => return Err(Error::InvalidArgument("give either --n/--m or two --counts".into())),
        };
        UrnSpec::new(self.model, vec![a, b], vec![n, m])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfMethod {
    Closed,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Alpha,
    Beta,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PmfArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = PmfMethod::Closed)]
    pub method: PmfMethod,
    /// Which partial-fraction sum the closed form uses.
    #[arg(long, value_enum, default_value_t = Representation::Alpha)]
    pub representation: Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossTermArg {
    Corrected,
    Literal,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PmfMultiArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = PmfMethod::Closed)]
    pub method: PmfMethod,
    /// Cross term of the model II closed form; `literal` is checked against
    /// the recurrence and reported.
    #[arg(long, value_enum, default_value_t = CrossTermArg::Corrected)]
    pub cross_term: CrossTermArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MomentsArgs {
    /// Sampling urn with weights `a*j` (white) ...
    #[arg(long, requires = "d")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    /// ... and `d*j` (black).
    #[arg(long, requires = "a")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    /// Factors `a_j` of an r-color sampling urn, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["a", "d"])]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub avec: Vec<u64>,
    /// Orders `s_j` of the mixed factorial moment, comma separated.
    #[arg(long, value_delimiter = ',', requires = "avec")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub orders: Vec<u64>,
    /// Highest order.
    #[arg(long, default_value_t = 4)]
    pub s: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OkcMomentsArgs {
    /// Black weights `b*j`.
    #[arg(long)]
    pub b: u64,
    /// White weights `c*j`.
    #[arg(long)]
    pub c: u64,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: u64,
    /// Highest order.
    #[arg(long, default_value_t = 3)]
    pub s: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// Moments of Y_m.
    Ym,
    /// Density of Y_m.
    YmDensity,
    /// Law of Z_n.
    Zn,
    /// Moments of Z_n.
    ZnMoment,
    /// Moments of W.
    W,
    /// Distribution function of W.
    WCdf,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LimitArgs {
    #[arg(long, value_enum)]
    pub law: Law,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u64>,
    /// Evaluation point, as a decimal or `p/q`.
    #[arg(long, conflicts_with = "grid_step")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    /// Evaluate on `0, step, 2 step, ..., 1` instead of a single point.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<String>,
    #[arg(long, default_value = "square")]
    pub family: LimitFamily,
    /// Use the series for P{Z_n = 0}, stopped at this tolerance.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series_tol: Option<f64>,
    /// Relative width of the moment-product bracket for `--law w`.
    #[arg(long, default_value_t = 1e-6)]
    pub product_tol: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ThetaArgs {
    /// Argument in [0, 1), as a decimal or `p/q`.
    #[arg(long)]
    pub q: String,
    /// Stop once the next series term is below this.
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    Recurrence,
    Enumerate,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OracleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = OracleMethod::Recurrence)]
    pub method: OracleMethod,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub workers: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub spec: SpecArgs,
    /// JSON manifest of specs to compare instead of a single spec.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    /// Simulation trials per spec; 0 skips simulation.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    #[serde(skip)]
    pub workers: usize,
}

/// Everything needed to replay a run, echoed in JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct RunRequest {
    #[serde(flatten)]
    pub command: Command,
    pub format: Format,
    pub mode: ScalarMode,
    pub precision_bits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decimals: Option<usize>,
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Results go to `out`, one-line diagnostics to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("error: invalid arguments");
            let _ = writeln!(err, "{line}");
            return EXIT_INVALID;
        }
    };
    match execute(&cli) {
        Ok((text, discrepancy)) => {
            let _ = out.write_all(text.as_bytes());
            if discrepancy {
                EXIT_DISCREPANCY
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn execute(cli: &Cli) -> Result<(String, bool)> {
    let opts = &cli.output;
    if opts.decimals.is_some() && opts.format != Format::Csv {
        return Err(Error::InvalidArgument("--decimals only applies with --format csv".into()));
    }
    if let Some(bits) = opts.precision_bits {
        bigfloat::set_default_precision(bits as usize);
    }
    let (report, mode) = commands::dispatch(&cli.command, opts.mode)?;
    let request = RunRequest {
        command: cli.command.clone(),
        format: opts.format,
        mode,
        precision_bits: bigfloat::default_precision(),
        decimals: opts.decimals,
    };
    let text = match opts.format {
        Format::Json => {
            let mut fields = report.fields.clone();
            fields.insert("request".into(), serde_json::to_value(&request).expect("request serializes"));
            fields.insert("status".into(), report.status().into());
            let mut s = serde_json::to_string(&fields).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => report.table.to_csv(opts.decimals),
    };
    Ok((text, report.discrepancy))
}
