//! `qnd`: order, compatibility, degrading and bound queries on JSON device files.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use qnd_core::bounds::dksw_lower_bound;
use qnd_core::channels::{validate_channel, ChannelData};
use qnd_core::degrading::{degrade, DegradingOptions};
use qnd_core::dilations::least_disturbing_channel;
use qnd_core::instruments::{validate_instrument, InstrumentData};
use qnd_core::io::{parse_device, parse_device_file, Device, DeviceError, DeviceKind};
use qnd_core::numerics::KernelCompletion;
use qnd_core::observables::{validate_observable, ObservableData};
use qnd_core::ordering::TracePoint;
use qnd_core::qubit::{compose_weights, lueders_decomposition, qubit_observable, solve_intermediate_weight};
use qnd_core::{chan_leq, is_a_channel, obs_leq, Error, FeasibilityOutcome, FeasibilityStatus, SolverOptions};
use serde::Serialize;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(
    name = "qnd",
    version,
    about = "Post-processing orders on quantum observables and channels"
)]
struct Cli {
    /// Feasibility tolerance for the LP and projection solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed for randomized kernel completions in `degrade`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Iteration budget of the projection solver.
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    /// Include the solver trace in the report.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a device file and list every violated constraint.
    Validate { path: PathBuf },
    /// Decide `first ⪯ second` (observables) or `first ≾ second` (channels).
    Order {
        kind: OrderKind,
        first: PathBuf,
        second: PathBuf,
    },
    /// Decide whether a channel arises together with an observable from one instrument.
    Compatible { channel: PathBuf, observable: PathBuf },
    /// Write the least-disturbing channel of an observable.
    LeastDisturbing {
        observable: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Build the degrading channel of an instrument's total channel.
    Degrade {
        instrument: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Observable the instrument is claimed to implement.
        #[arg(long)]
        observable: Option<PathBuf>,
    },
    /// Closed-form lower bound on the disturbance of any compatible channel.
    Bound { observable: PathBuf },
    /// Binary qubit observables and weighted unitary mixtures.
    Qubit {
        #[command(subcommand)]
        command: QubitCommand,
    },
}

#[derive(Subcommand)]
enum QubitCommand {
    /// Emit the observable `½(I ± v·σ)` as a device file.
    Observable {
        #[arg(allow_negative_numbers = true)]
        v: Vec<f64>,
    },
    /// Weight and axis of the Lüders channel of `v`, with its disturbance bound.
    Decompose {
        #[arg(allow_negative_numbers = true)]
        v: Vec<f64>,
    },
    /// Solve for the weight `λ'` with `compose(λ, λ') = μ`.
    Solve { lambda: f64, mu: f64 },
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderKind {
    Obs,
    Chan,
}

#[derive(Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Feasible,
    Infeasible,
    Undecided,
    Error,
}

impl Status {
    fn exit_code(self) -> u8 {
        match self {
            Status::Ok | Status::Feasible => 0,
            Status::Infeasible => 1,
            Status::Undecided => 2,
            Status::Error => 3,
        }
    }
}

impl From<FeasibilityStatus> for Status {
    fn from(s: FeasibilityStatus) -> Self {
        match s {
            FeasibilityStatus::Feasible => Status::Feasible,
            FeasibilityStatus::Infeasible => Status::Infeasible,
            FeasibilityStatus::Undecided => Status::Undecided,
        }
    }
}

#[derive(Serialize)]
struct Report {
    command: Vec<String>,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Value>,
    residuals: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<Vec<TracePoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    timing_ms: f64,
}

impl Report {
    fn new(status: Status) -> Self {
        Report {
            command: Vec::new(),
            status,
            witness: None,
            residuals: Map::new(),
            result: None,
            trace: None,
            error: None,
            timing_ms: 0.0,
        }
    }

    fn failure(status: Status, message: String) -> Self {
        Report {
            error: Some(message),
            ..Report::new(status)
        }
    }

    fn residual(mut self, name: &str, value: f64) -> Self {
        self.residuals.insert(name.into(), json!(value));
        self
    }

    fn outcome<W>(opts: &SolverOptions, out: FeasibilityOutcome<W>, witness: impl FnOnce(W) -> Value) -> Self {
        let mut r = Report::new(out.status.into()).residual("residual", out.residual);
        r.residuals.insert("iterations".into(), json!(out.iterations));
        r.witness = out.witness.map(witness);
        if opts.record_trace {
            r.trace = Some(out.trace);
        }
        r
    }
}

/// Command failure carrying the exit status it maps to.
struct Failure(Status, String);

impl From<DeviceError> for Failure {
    fn from(e: DeviceError) -> Self {
        Failure(Status::Error, e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotCompatible { .. } => Status::Infeasible,
            Error::Undecided => Status::Undecided,
            _ => Status::Error,
        };
        Failure(status, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(Status::Error, e.to_string())
    }
}

type Outcome = Result<Report, Failure>;

/// Reads a file, or stdin for `-`.
fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure(Status::Error, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Device, Failure> {
    parse_device(&read_input(path)?).map_err(|e| Failure(Status::Error, format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialise")
}

fn write_device(device: Device, out: Option<&Path>) -> Result<Option<Value>, Failure> {
    match out {
        Some(p) => {
            fs::write(p, device.to_json() + "\n")?;
            Ok(None)
        }
        None => Ok(Some(to_value(&device.to_file()))),
    }
}

fn bloch(v: &[f64]) -> Result<[f64; 3], Failure> {
    v.try_into()
        .map_err(|_| Failure(Status::Error, format!("expected 3 Bloch components, got {}", v.len())))
}

fn solver_options(cli: &Cli) -> SolverOptions {
    let mut opts = SolverOptions {
        record_trace: cli.verbose,
        ..SolverOptions::default()
    };
    if let Some(t) = cli.tol {
        opts.lp_tol = t;
        opts.feas_tol = t;
    }
    if let Some(n) = cli.max_iters {
        opts.max_iters = n;
    }
    opts
}

fn validate(path: &Path) -> Outcome {
    let file = parse_device_file(&read_input(path)?)?;
    let bad = |e: serde_json::Error| Failure(Status::Error, format!("{}: {e}", path.display()));
    let report = match file.kind {
        DeviceKind::Observable => {
            let d: ObservableData = serde_json::from_value(file.payload).map_err(bad)?;
            validate_observable(d.dim, &d.effects)
        }
        DeviceKind::Channel => {
            let d: ChannelData = serde_json::from_value(file.payload).map_err(bad)?;
            validate_channel(d.dim_in, d.dim_out, &d.kraus)
        }
        DeviceKind::Instrument => {
            let d: InstrumentData = serde_json::from_value(file.payload).map_err(bad)?;
            validate_instrument(d.dim_in, d.dim_out, &d.branches)
        }
    };
    let mut r = Report::new(if report.is_ok() { Status::Ok } else { Status::Infeasible });
    r.result = Some(json!({ "kind": file.kind, "violations": report.violations }));
    Ok(r)
}

fn run(cli: &Cli) -> Outcome {
    let opts = solver_options(cli);
    match &cli.command {
        Command::Validate { path } => validate(path),
        Command::Order { kind, first, second } => match kind {
            OrderKind::Obs => {
                let a = load(first)?.into_observable()?;
                let b = load(second)?.into_observable()?;
                let out = obs_leq(&a, &b, &opts)?;
                Ok(Report::outcome(&opts, out, |m| to_value(&m)))
            }
            OrderKind::Chan => {
                let l1 = load(first)?.into_channel()?;
                let l2 = load(second)?.into_channel()?;
                let out = chan_leq(&l1, &l2, &opts)?;
                Ok(Report::outcome(&opts, out, |e| to_value(&Device::from(e).to_file())))
            }
        },
        Command::Compatible { channel, observable } => {
            let lambda = load(channel)?.into_channel()?;
            let a = load(observable)?.into_observable()?;
            let out = is_a_channel(&lambda, &a, &opts)?;
            Ok(Report::outcome(&opts, out, |w| to_value(&w)))
        }
        Command::LeastDisturbing { observable, out } => {
            let a = load(observable)?.into_observable()?;
            let la = least_disturbing_channel(&a);
            let mut r = Report::new(Status::Ok);
            r.result = Some(json!({ "dim_in": la.dim_in(), "dim_out": la.dim_out(), "kraus_count": la.kraus().len() }));
            r.witness = write_device(la.into(), out.as_deref())?;
            Ok(r)
        }
        Command::Degrade {
            instrument,
            out,
            observable,
        } => {
            let inst = load(instrument)?.into_instrument()?;
            let claimed = observable
                .as_deref()
                .map(load)
                .transpose()?
                .map(Device::into_observable)
                .transpose()?;
            let dopts = DegradingOptions {
                anchor: None,
                completion: cli
                    .seed
                    .map_or(KernelCompletion::StandardBasis, KernelCompletion::Randomized),
            };
            let cert = degrade(&inst, claimed.as_ref(), &dopts)?;
            let mut r = Report::new(Status::Ok).residual("residual", cert.residual);
            r.result = Some(json!({ "env_dim": cert.env_dim, "observable": cert.observable }));
            r.witness = write_device(cert.epsilon.into(), out.as_deref())?;
            Ok(r)
        }
        Command::Bound { observable } => {
            let a = load(observable)?.into_observable()?;
            let mut r = Report::new(Status::Ok);
            r.result = Some(to_value(&dksw_lower_bound(&a)?));
            Ok(r)
        }
        Command::Qubit { command } => qubit(command),
    }
}

fn qubit(command: &QubitCommand) -> Outcome {
    let mut r = Report::new(Status::Ok);
    match command {
        QubitCommand::Observable { v } => {
            r.witness = Some(to_value(&Device::from(qubit_observable(bloch(v)?)?).to_file()));
        }
        QubitCommand::Decompose { v } => {
            let v = bloch(v)?;
            let bound = dksw_lower_bound(&qubit_observable(v)?)?;
            let mix = match lueders_decomposition(v) {
                Ok(m) => Some(m),
                Err(Error::DegenerateAxis) => None,
                Err(e) => return Err(e.into()),
            };
            r.result = Some(json!({
                "lambda": mix.map_or(1.0, |m| m.lambda),
                "axis": mix.map(|m| m.axis),
                "bound": bound.bound,
            }));
        }
        QubitCommand::Solve { lambda, mu } => {
            let lp = solve_intermediate_weight(*lambda, *mu).map_err(|e| match e {
                Error::NoSolution { .. } | Error::SingularSharpness { .. } => {
                    Failure(Status::Infeasible, e.to_string())
                }
                e => e.into(),
            })?;
            let back = compose_weights(*lambda, lp)?;
            r = r.residual("composition", (back - mu).abs());
            r.result = Some(json!({ "lambda_prime": lp }));
        }
    }
    Ok(r)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = run(&cli).unwrap_or_else(|Failure(status, msg)| Report::failure(status, msg));
    report.command = std::env::args().skip(1).collect();
    report.timing_ms = start.elapsed().as_secs_f64() * 1e3;
    if let Some(e) = &report.error {
        eprintln!("qnd: {e}");
    }
    // A closed stdout (e.g. piping into `head`) is not an error.
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&report).expect("reports serialise")
    );
    ExitCode::from(report.status.exit_code())
}
