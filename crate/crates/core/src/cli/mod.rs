//! The `bch-factor` command line.
//!
//! ```text
//! bch-factor factorize squeeze --r 0.8 --phi 1.0471975512 --t 1 --ode-check
//! bch-factor factorize oscillator --t 0.7853981633974483
//! bch-factor evolve --initial coherent:x0=2 --op time:t=6.283185307179586,substeps=8 --out psi.csv
//! bch-factor verify all
//! bch-factor density --x0 2 --s 1.5 --sign -1 --t-max 3.141592653589793 --format json
//! ```
//!
//! Tables and reports go to `--out` or standard output; summaries and
//! warnings go to standard error. Exit status is 0 on success, 1 when a
//! check or tolerance fails or a computation is singular, 2 on bad usage.

pub mod config;
pub mod spec;
pub mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};

use clap::{Parser, Subcommand};
use log::warn;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::algebra::{
    integrate_wei_norman, squeeze_factorization, time_displacement_factorization, AlgebraError,
    FactorizationCoefficients, GeneratorCoefficients, SqueezeParameter,
};
use crate::analytic::{self, normalized_density, rho_spm, EvenOddSpec, Parity};
use crate::factors::{apply_operator, substeps_for, FactorError, FactoredOperator};
use crate::io::{self, format_number, Format, IoError, Table};

pub use config::{RunConfig, Tolerances};
pub use spec::{OperatorSpec, SpecError, StateSpec};
pub use verify::{Check, Suite};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// How a command that ran to completion came out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// A check failed or a tolerance was exceeded; the output was still written.
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::Failed => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bch-factor", version, about = "Ordered-product factorizations of squeeze and oscillator propagators")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the coefficients (δ, α, β, γ) of the ordered product
    Factorize {
        #[command(subcommand)]
        family: Family,
    },
    /// Apply operators to a state on the grid and write the result
    Evolve(EvolveArgs),
    /// Run self-checks and report each as pass or fail
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Tabulate even/odd state densities against grid evolution over t
    Density(DensityArgs),
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Family {
    /// exp[t (z a†² - z* a²)/2] with z = r e^{iφ}
    Squeeze {
        #[arg(long)]
        r: f64,
        /// Squeeze angle in radians
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t: f64,
        /// Also integrate the coefficient ODEs and report the deviation
        #[arg(long)]
        ode_check: bool,
    },
    /// exp[-i (a†a + 1/2) t]
    Oscillator {
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        ode_check: bool,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct EvolveArgs {
    /// ground | coherent:x0=,p0= | squeezed:x0=,p0=,r=,phi= | evenodd:x0=,s=,sign=
    #[arg(long, default_value = "ground")]
    pub initial: StateSpec,
    /// squeeze:r=,phi= | displace:x0=,p0= | time:t=[,substeps=]; repeat to chain, first acts first
    #[arg(long = "op")]
    pub ops: Vec<OperatorSpec>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct DensityArgs {
    /// Half-separation of the two Gaussians
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub x0: f64,
    /// Width of each Gaussian
    #[arg(long, default_value_t = 1.5)]
    pub s: f64,
    /// 1 for the even state, -1 for the odd one
    #[arg(long, default_value_t = 1, allow_hyphen_values = true, value_parser = parse_sign)]
    pub sign: i32,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
    pub t_max: f64,
    /// Number of intervals; t_j = t_min + j (t_max - t_min) / t_steps for j = 0..=t_steps
    #[arg(long, default_value_t = 64)]
    pub t_steps: usize,
    /// Emit every k-th grid point
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub x_stride: u32,
}

fn parse_sign(s: &str) -> Result<i32, String> {
    match s.trim() {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        other => Err(format!("sign must be 1 or -1, got {other:?}")),
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Usage errors are rendered to `stderr` and give exit code 2.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    match run(&cli, stdout, stderr) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Status, CliError> {
    let config = &cli.config;
    config.validate()?;
    match &cli.command {
        Command::Factorize { family } => factorize(*family, config, stdout, stderr),
        Command::Evolve(args) => evolve(args, config, stdout, stderr),
        Command::Verify { suite } => run_verify(*suite, config, stdout, stderr),
        Command::Density(args) => density(args, config, stdout, stderr),
    }
}

/// Sends output to `--out` when given, otherwise to `stdout`.
fn emit(
    config: &RunConfig,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match &config.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path).map_err(IoError::from)?);
            write(&mut file)?;
            file.flush()?;
        }
        None => {
            write(stdout)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// A report cell: text, or a number already formatted to its precision.
#[derive(Debug, Clone)]
enum Cell {
    Text(String),
    Number { text: String, finite: bool },
    Bool(bool),
}

impl Cell {
    fn number(v: f64, digits: usize) -> Self {
        // Adding zero turns -0 into +0.
        let v = v + 0.0;
        Cell::Number { text: format!("{v:.prec$e}", prec = digits - 1), finite: v.is_finite() }
    }

    fn csv_text(&self) -> String {
        match self {
            Cell::Text(t) | Cell::Number { text: t, .. } => t.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

/// An ordered set of named cells, written as a CSV row or a JSON object.
#[derive(Debug, Clone, Default)]
struct Record(Vec<(&'static str, Cell)>);

impl Record {
    fn push(&mut self, key: &'static str, cell: Cell) {
        self.0.push((key, cell));
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (key, cell) in &self.0 {
            match cell {
                Cell::Text(t) => map.serialize_entry(key, t)?,
                Cell::Bool(b) => map.serialize_entry(key, b)?,
                Cell::Number { finite: false, .. } => map.serialize_entry(key, &())?,
                Cell::Number { text, .. } => {
                    let raw = RawValue::from_string(text.clone()).map_err(serde::ser::Error::custom)?;
                    map.serialize_entry(key, &raw)?
                }
            }
        }
        map.end()
    }
}

/// CSV with one header taken from the first record, or JSON lines.
fn write_records(records: &[Record], format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                writer.write_record(first.0.iter().map(|(k, _)| *k)).map_err(IoError::from)?;
            }
            for record in records {
                writer.write_record(record.0.iter().map(|(_, c)| c.csv_text())).map_err(IoError::from)?;
            }
            writer.flush()?;
        }
        Format::Json => {
            for record in records {
                serde_json::to_writer(&mut *out, record).map_err(IoError::from)?;
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

/// Significant digits for printed coefficients.
const COEFFICIENT_DIGITS: usize = 15;

fn factorize(
    family: Family,
    config: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Status, CliError> {
    let mut record = Record::default();
    let (coefficients, generator, t, ode_check) = match family {
        Family::Squeeze { r, phi, t, ode_check } => {
            let z = SqueezeParameter::new(r, phi)?;
            record.push("family", Cell::Text("squeeze".into()));
            record.push("r", Cell::number(r, COEFFICIENT_DIGITS));
            record.push("phi", Cell::number(phi, COEFFICIENT_DIGITS));
            (squeeze_factorization(&z, t)?, GeneratorCoefficients::squeeze(&z), t, ode_check)
        }
        Family::Oscillator { t, ode_check } => {
            record.push("family", Cell::Text("oscillator".into()));
            (time_displacement_factorization(t)?, GeneratorCoefficients::oscillator(), t, ode_check)
        }
    };
    record.push("t", Cell::number(t, COEFFICIENT_DIGITS));
    push_coefficients(&mut record, &coefficients);

    let mut status = Status::Success;
    if ode_check {
        let deviation = integrate_wei_norman(&generator, t, config.ode_steps)
            .map(|traj| traj.terminal().max_abs_diff(&coefficients))
            .unwrap_or_else(|e| {
                warn!("coefficient integration failed: {e}");
                f64::INFINITY
            });
        record.push("ode_steps", Cell::Text(config.ode_steps.to_string()));
        record.push("ode_deviation", Cell::number(deviation, 3));
        if !(deviation <= config.tol.ode) {
            writeln!(stderr, "ODE deviation {deviation:.3e} exceeds --tol-ode {:.1e}", config.tol.ode)?;
            status = Status::Failed;
        }
    }
    emit(config, stdout, |out| write_records(&[record], config.format, out))?;
    Ok(status)
}

fn push_coefficients(record: &mut Record, c: &FactorizationCoefficients) {
    let names = [("delta_re", "delta_im"), ("alpha_re", "alpha_im"), ("beta_re", "beta_im"), ("gamma_re", "gamma_im")];
    for ((re, im), value) in names.into_iter().zip(c.as_array()) {
        record.push(re, Cell::number(value.re, COEFFICIENT_DIGITS));
        record.push(im, Cell::number(value.im, COEFFICIENT_DIGITS));
    }
}

/// Stored under `config` in JSON output of `evolve`.
#[derive(Serialize)]
struct EvolveMeta<'a> {
    command: &'static str,
    run: &'a RunConfig,
    initial: String,
    operators: Vec<String>,
    initial_norm: f64,
    final_norm: f64,
    max_norm_drift: f64,
}

fn evolve(
    args: &EvolveArgs,
    config: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Status, CliError> {
    let grid = config.grid()?;
    let initial = args.initial.sample(grid);
    if !initial.is_supported() {
        warn!(
            "{} is not negligible at the grid edge (density {:.1e}); results will wrap around",
            args.initial,
            initial.edge_density()
        );
    }
    let mut state = initial.clone();
    let mut max_drift: f64 = 0.0;
    for op in &args.ops {
        let next = apply_operator(&state, &op.to_operator())?;
        max_drift = max_drift.max((next.norm() - state.norm()).abs());
        if !next.is_supported() {
            warn!("after {op} the state reaches the grid edge (density {:.1e})", next.edge_density());
        }
        state = next;
    }

    let meta = EvolveMeta {
        command: "evolve",
        run: config,
        initial: args.initial.to_string(),
        operators: args.ops.iter().map(ToString::to_string).collect(),
        initial_norm: initial.norm(),
        final_norm: state.norm(),
        max_norm_drift: max_drift,
    };
    let table = io::wavefunction_table(&state);
    emit(config, stdout, |out| Ok(io::write_table(&table, &meta, config.format, out)?))?;

    writeln!(stderr, "initial norm {}", format_number(meta.initial_norm))?;
    writeln!(stderr, "final norm {}", format_number(meta.final_norm))?;
    writeln!(stderr, "max norm drift per operator {:.3e} (tol {:.1e})", max_drift, config.tol.norm_drift)?;
    if max_drift > config.tol.norm_drift {
        writeln!(stderr, "norm drift exceeds --tol")?;
        return Ok(Status::Failed);
    }
    Ok(Status::Success)
}

fn run_verify(
    suite: Suite,
    config: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Status, CliError> {
    let checks = verify::run_suite(suite, config);
    let records: Vec<Record> = checks
        .iter()
        .map(|c| {
            let mut r = Record::default();
            r.push("suite", Cell::Text(c.suite.into()));
            r.push("check", Cell::Text(c.check.clone()));
            r.push("measured", Cell::number(c.measured, 4));
            r.push("tolerance", Cell::number(c.tolerance, 2));
            r.push("pass", Cell::Bool(c.pass));
            r
        })
        .collect();
    emit(config, stdout, |out| write_records(&records, config.format, out))?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    writeln!(stderr, "{} checks, {} failed", checks.len(), failed)?;
    Ok(if failed == 0 { Status::Success } else { Status::Failed })
}

pub const DENSITY_COLUMNS: [&str; 7] = ["t", "x", "rho_raw", "rho_analytic", "rho_grid", "abs_diff", "raw_integral"];

/// Stored under `config` in JSON output of `density`.
#[derive(Serialize)]
struct DensityMeta<'a> {
    command: &'static str,
    run: &'a RunConfig,
    x0: f64,
    s: f64,
    sign: i32,
    t_min: f64,
    t_max: f64,
    t_steps: usize,
    max_abs_diff: f64,
}

/// Rows `(t, x, ρ as printed, ρ renormalized, grid density, |Δ|, ∫ρ as printed)`.
///
/// The grid density comes from evolving the `t = 0` state with steps no
/// longer than π/4, so caustic times need no special handling there; the
/// closed form is evaluated in a form that stays finite at `cos t = 0`.
pub fn density_table(args: &DensityArgs, config: &RunConfig) -> Result<(Table, f64), CliError> {
    let parity = Parity::from_sign(args.sign).ok_or_else(|| CliError::Config("--sign must be 1 or -1".into()))?;
    let spec = EvenOddSpec::new(args.x0, args.s, parity)
        .ok_or_else(|| CliError::Config("--x0 must be finite and --s positive".into()))?;
    if parity == Parity::Odd && args.x0 == 0.0 {
        return Err(CliError::Config("the odd state needs --x0 != 0".into()));
    }
    if !(args.t_min.is_finite() && args.t_max.is_finite()) {
        return Err(CliError::Config("--t-min and --t-max must be finite".into()));
    }
    let grid = config.grid()?;
    let initial = analytic::normalized_samples(grid, |x| spec.initial(x));
    if !initial.is_supported() {
        warn!("the initial state is not negligible at the grid edge (density {:.1e})", initial.edge_density());
    }

    let steps = args.t_steps.max(1);
    let mut table = Table::new(DENSITY_COLUMNS);
    let mut worst: f64 = 0.0;
    for j in 0..=args.t_steps {
        let t = args.t_min + j as f64 * (args.t_max - args.t_min) / steps as f64;
        let printed: Vec<f64> = grid.points().map(|x| rho_spm(x, t, &spec)).collect();
        let raw_integral = printed.iter().sum::<f64>() * grid.dx();
        let analytic = normalized_density(&grid, |x| rho_spm(x, t, &spec));
        let evolved = apply_operator(&initial, &FactoredOperator::TimeDisplacement { t, substeps: substeps_for(t) })?;
        let total = evolved.norm().powi(2);
        for (i, x) in grid.points().enumerate().step_by(args.x_stride as usize) {
            let on_grid = evolved.samples()[i].norm_sqr() / total;
            let diff = (analytic[i] - on_grid).abs();
            worst = worst.max(diff);
            table.push(vec![t, x, printed[i], analytic[i], on_grid, diff, raw_integral]);
        }
    }
    Ok((table, worst))
}

fn density(
    args: &DensityArgs,
    config: &RunConfig,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<Status, CliError> {
    let (table, worst) = density_table(args, config)?;
    let meta = DensityMeta {
        command: "density",
        run: config,
        x0: args.x0,
        s: args.s,
        sign: args.sign,
        t_min: args.t_min,
        t_max: args.t_max,
        t_steps: args.t_steps,
        max_abs_diff: worst,
    };
    emit(config, stdout, |out| Ok(io::write_table(&table, &meta, config.format, out)?))?;
    writeln!(stderr, "max |analytic - grid| over all t: {worst:.3e}")?;
    Ok(Status::Success)
}
