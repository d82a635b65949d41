use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qdsys::cavity::{self, Channel, LambdaParams, TrajectoryRecord};
use qdsys::embedding::{fixture, qutrit_to_two_qubits};
use qdsys::io::{read_params, read_state, StateFile};
use qdsys::slocc::{
    classify_three_qubit, concurrence, orbit_measure, sl_normal_form, three_tangle, NORMAL_FORM_MAX_ITER,
    NORMAL_FORM_TOL,
};
use qdsys::variance::{total_variance_with_tol, DEFAULT_CE_TOL};
use qdsys::{ce_check, find_ce, CeSearch, Error, FindCeOptions, ObservableSet, StateVector};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SHAPE: u8 = 3;
const EXIT_NOT_FOUND: u8 = 4;
const EXIT_OVERFLOW: u8 = 5;

const CLASSIFY_TOL: f64 = 1e-9;

/// Total-variance entanglement analysis and Λ-atom cavity simulation.
///
/// STATE arguments are either a path to a JSON state file or a built-in
/// fixture name (spin1:0, bell:phi+, ghz, w, ket:010, ...).
#[derive(Parser, Debug)]
#[command(name = "qdsys", version)]
struct Cli {
    /// Observable set: pauli:<n>, spin1, su3 or pair:<a><b>.
    #[arg(long, global = true)]
    obs: Option<String>,
    /// Numerical tolerance (command-specific default).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Random seed for searches and simulations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Write the resulting state (or jump table for `simulate`) to this path.
    #[arg(long, global = true)]
    export: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-observable variances, total variance and CE status.
    Variance { state: String },
    /// Checks whether every observable mean vanishes.
    CeCheck { state: String },
    /// Multi-start search for a completely entangled state.
    FindCe {
        #[arg(long, default_value_t = 32)]
        starts: usize,
        #[arg(long, default_value_t = 5000)]
        max_iter: usize,
    },
    /// Scalar entanglement measures.
    Measure {
        state: String,
        #[arg(long, value_enum)]
        kind: Kind,
    },
    /// SLOCC class of a three-qubit state.
    Classify { state: String },
    /// Maps a spin-1 qutrit into the symmetric two-qubit subspace.
    Embed { state: String },
    /// Local-filtering normal form of a multi-qubit state.
    NormalForm { state: String },
    /// Runs Monte-Carlo trajectories of two Λ-atoms in a cavity.
    Simulate {
        /// Flat `key = value` parameter file; missing keys take defaults.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trajectories: usize,
        /// One Stokes channel per atom instead of the collective channel.
        #[arg(long)]
        individual_jumps: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Concurrence,
    Tangle,
    Orbit,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidParams(_) | Error::NotNormalized(_) => EXIT_PARSE,
            Error::InvalidShape(_)
            | Error::DimensionMismatch { .. }
            | Error::SiteOutOfRange { .. }
            | Error::InvalidLevelPair(..) => EXIT_SHAPE,
            Error::CutoffOverflow { .. } => EXIT_OVERFLOW,
            _ => EXIT_FAILURE,
        };
        Failure { code, message: e.to_string() }
    }
}

/// A report plus the exit code it should be delivered with.
struct Outcome {
    json: Value,
    text: String,
    code: u8,
}

impl Outcome {
    fn ok(json: Value, text: String) -> Self {
        Outcome { json, text, code: 0 }
    }
}

type CmdResult = std::result::Result<Outcome, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("json values serialize"));
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Variance { state } => cmd_variance(cli, state),
        Command::CeCheck { state } => cmd_ce_check(cli, state),
        Command::FindCe { starts, max_iter } => cmd_find_ce(cli, *starts, *max_iter),
        Command::Measure { state, kind } => cmd_measure(state, *kind),
        Command::Classify { state } => cmd_classify(cli, state),
        Command::Embed { state } => cmd_embed(cli, state),
        Command::NormalForm { state } => cmd_normal_form(cli, state),
        Command::Simulate { params, trajectories, individual_jumps } => {
            cmd_simulate(cli, params.as_deref(), *trajectories, *individual_jumps)
        }
    }
}

fn load_state(arg: &str) -> Result<StateVector, Failure> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(read_state(path)?);
    }
    fixture(arg).map_err(|_| Failure {
        code: EXIT_PARSE,
        message: format!("'{arg}' is neither a state file nor a known fixture"),
    })
}

fn observable_set(cli: &Cli) -> Result<ObservableSet, Failure> {
    let id = cli.obs.as_deref().ok_or_else(|| Failure {
        code: EXIT_PARSE,
        message: "--obs is required for this command".into(),
    })?;
    Ok(ObservableSet::from_id(id)?)
}

fn export_state(cli: &Cli, psi: &StateVector, label: Option<String>) -> Result<(), Failure> {
    if let Some(path) = &cli.export {
        qdsys::io::write_state(path, psi, label)?;
    }
    Ok(())
}

/// Plain notation for ordinary magnitudes, scientific for tiny ones.
fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn state_json(psi: &StateVector) -> Value {
    serde_json::to_value(StateFile::from_state(psi, None)).expect("state file serializes")
}

fn cmd_variance(cli: &Cli, state: &str) -> CmdResult {
    let set = observable_set(cli)?;
    let psi = load_state(state)?;
    let report = total_variance_with_tol(&set, &psi, cli.tol.unwrap_or(DEFAULT_CE_TOL))?;
    let mut text = String::new();
    for o in &report.per_observable {
        writeln!(text, "{:<8} mean {:+.12e}  variance {:.12}", o.label, o.mean, o.variance).unwrap();
    }
    writeln!(text, "total: {}", report.total).unwrap();
    match report.casimir {
        Some(c) => writeln!(text, "casimir: {c}").unwrap(),
        None => writeln!(text, "casimir: none").unwrap(),
    }
    writeln!(text, "residual: {}", num(report.residual)).unwrap();
    writeln!(text, "is_ce: {}", report.is_ce).unwrap();
    let mut json = serde_json::to_value(&report).expect("report serializes");
    json["observables"] = json!(set.name());
    Ok(Outcome::ok(json, text))
}

fn cmd_ce_check(cli: &Cli, state: &str) -> CmdResult {
    let set = observable_set(cli)?;
    let psi = load_state(state)?;
    let check = ce_check(&set, &psi, cli.tol.unwrap_or(DEFAULT_CE_TOL))?;
    let text = format!(
        "is_ce: {}\nresidual: {}\nmax_abs_mean: {}\n",
        check.is_ce,
        num(check.residual),
        num(check.max_abs_mean)
    );
    Ok(Outcome::ok(serde_json::to_value(check).expect("report serializes"), text))
}

fn cmd_find_ce(cli: &Cli, starts: usize, max_iter: usize) -> CmdResult {
    let set = observable_set(cli)?;
    let opts = FindCeOptions {
        n_starts: starts,
        tol: cli.tol.unwrap_or(DEFAULT_CE_TOL),
        max_iter,
        seed: cli.seed.unwrap_or(0),
    };
    match find_ce(&set, &opts) {
        CeSearch::Found { state, residual, start } => {
            export_state(cli, &state, Some(format!("find-ce {} seed {}", set.name(), opts.seed)))?;
            let json = json!({
                "found": true,
                "observables": set.name(),
                "residual": residual,
                "start": start,
                "state": state_json(&state),
            });
            let text = format!("found: true\nresidual: {}\nstart: {start}\n", num(residual));
            Ok(Outcome::ok(json, text))
        }
        CeSearch::NotFound { best_residual, .. } => {
            let json = json!({ "found": false, "observables": set.name(), "best_residual": best_residual });
            let text = format!("found: false\nbest_residual: {}\n", num(best_residual));
            Ok(Outcome { json, text, code: EXIT_NOT_FOUND })
        }
    }
}

fn cmd_measure(state: &str, kind: Kind) -> CmdResult {
    let psi = load_state(state)?;
    let (name, value) = match kind {
        Kind::Concurrence => ("concurrence", concurrence(&psi)?),
        Kind::Tangle => ("tangle", three_tangle(&psi)?),
        Kind::Orbit => ("orbit", orbit_measure(&psi)?),
    };
    Ok(Outcome::ok(json!({ "kind": name, "value": value }), format!("{value}\n")))
}

fn cmd_classify(cli: &Cli, state: &str) -> CmdResult {
    let psi = load_state(state)?;
    let class = classify_three_qubit(&psi, cli.tol.unwrap_or(CLASSIFY_TOL))?;
    let mut json = serde_json::to_value(class).expect("class serializes");
    json["label"] = json!(class.to_string());
    Ok(Outcome::ok(json, format!("{class}\n")))
}

fn cmd_embed(cli: &Cli, state: &str) -> CmdResult {
    let psi = load_state(state)?;
    let report = qutrit_to_two_qubits(&psi)?;
    export_state(cli, &report.output, Some(format!("embed {state}")))?;
    let mut text = String::from("amplitudes:\n");
    for (k, a) in report.output.amplitudes().iter().enumerate() {
        writeln!(text, "  |{:02b}> {:+.15} {:+.15}i", k, a.re, a.im).unwrap();
    }
    writeln!(text, "concurrence: {}", report.concurrence_of_image).unwrap();
    let json = json!({
        "state": state_json(&report.output),
        "concurrence": report.concurrence_of_image,
    });
    Ok(Outcome::ok(json, text))
}

fn cmd_normal_form(cli: &Cli, state: &str) -> CmdResult {
    let psi = load_state(state)?;
    let nf = sl_normal_form(&psi, NORMAL_FORM_MAX_ITER, cli.tol.unwrap_or(NORMAL_FORM_TOL))?;
    export_state(cli, &nf.state, Some(format!("normal-form {state}")))?;
    let measure = if nf.converged { nf.norm_sq } else { 0.0 };
    let json = json!({
        "norm_sq": nf.norm_sq,
        "converged": nf.converged,
        "iterations": nf.iterations,
        "orbit_measure": measure,
        "state": state_json(&nf.state),
    });
    let text = format!(
        "norm_sq: {}\nconverged: {}\niterations: {}\norbit_measure: {measure}\n",
        nf.norm_sq, nf.converged, nf.iterations
    );
    Ok(Outcome::ok(json, text))
}

fn jump_table(records: &[TrajectoryRecord]) -> String {
    let mut out = String::from("trajectory,time,channel,atom\n");
    for (k, rec) in records.iter().enumerate() {
        for j in &rec.jumps {
            let channel = match j.channel {
                Channel::Stokes => "stokes",
                Channel::Cavity => "cavity",
            };
            let atom = j.atom.map(|a| a.to_string()).unwrap_or_default();
            writeln!(out, "{k},{},{channel},{atom}", j.time).unwrap();
        }
    }
    out
}

fn cmd_simulate(cli: &Cli, params: Option<&Path>, trajectories: usize, individual: bool) -> CmdResult {
    let mut p = match params {
        Some(path) => read_params(path)?,
        None => LambdaParams::default(),
    };
    if let Some(seed) = cli.seed {
        p.seed = seed;
    }
    p.individual_jumps |= individual;
    p.validate()?;
    let records = cavity::run_ensemble(&p, &cavity::default_initial(&p), trajectories)?;
    let (summary, _) = cavity::summarize(&p, &records)?;
    if let Some(path) = &cli.export {
        std::fs::write(path, jump_table(&records)).map_err(|e| Failure {
            code: EXIT_FAILURE,
            message: format!("{}: {e}", path.display()),
        })?;
    }
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| x.to_string());
    let text = format!(
        "trajectories: {}\nwith_stokes: {}\ncavity_jumps: {}\nmean_first_stokes_time: {}\nmean_fidelity: {}\nce_pass_rate: {}\nmean_total_variance: {}\n",
        summary.trajectories,
        summary.with_stokes,
        summary.cavity_jumps,
        fmt(summary.mean_first_stokes_time),
        fmt(summary.mean_fidelity),
        fmt(summary.ce_pass_rate),
        fmt(summary.mean_total_variance),
    );
    let mut json = serde_json::to_value(&summary).expect("summary serializes");
    json["params"] = serde_json::to_value(&p).expect("params serialize");
    Ok(Outcome::ok(json, text))
}
