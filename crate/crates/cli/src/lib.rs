//! Command-line driver for the `polarized` simulator.
//!
//! Every subcommand prints one JSON [`RunReport`] on stdout; human-readable
//! diagnostics go to stderr. See [`run`] for exit codes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use polarized::bv::{
    build_bv_circuit_with, classical_baseline, detector_intensities, f_reference,
    find_hidden_string, read_bits, xor_fold, HiddenOracle,
};
use polarized::jones::{
    qhq_compose, qhq_synthesize, reduce_axis_angle, JonesMatrix, EXACT_TOL, SYNTH_TOL,
};
use polarized::network::{detector_readings, energy_audit, propagate};
use polarized::qref::{
    apply_factored_oracle, apply_phase_oracle, phase_kickback_check, purity_per_qubit,
    quantum_bv, quantum_bv_phase_form, StateVector,
};
use polarized::{dsl, BitString, Error};
use serde::Serialize;
use serde_json::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Largest `n` accepted by the exhaustive `qref check` suite.
pub const MAX_CHECK_QUBITS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "polarized", version, about = "Polarization-optics Bernstein-Vazirani laboratory")]
pub struct Cli {
    /// Record wall time in the report (otherwise null, keeping reports byte-stable).
    #[arg(long, global = true)]
    pub timing: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optical Bernstein-Vazirani experiments.
    #[command(subcommand)]
    Bv(BvCommand),
    /// Parse, validate and propagate a `.onl` netlist.
    Run { file: PathBuf },
    /// Ideal quantum-circuit reference.
    #[command(subcommand)]
    Qref(QrefCommand),
    /// Classical recovery, one query per bit.
    Baseline {
        #[arg(long)]
        a: BitString,
    },
    /// Quarter-half-quarter waveplate angles for an SU(2) matrix.
    Synth(SynthArgs),
}

#[derive(Debug, Subcommand)]
pub enum BvCommand {
    /// Recover the hidden string with a single optical pass.
    Find {
        #[arg(long)]
        a: BitString,
        /// Write the generated circuit as a `.onl` file.
        #[arg(long)]
        emit_circuit: Option<PathBuf>,
    },
    /// Evaluate f(x) = a·x mod 2 optically.
    Eval {
        #[arg(long)]
        a: BitString,
        #[arg(long)]
        x: BitString,
    },
}

#[derive(Debug, Subcommand)]
pub enum QrefCommand {
    /// Run the state-vector pipeline for one hidden string.
    Bv {
        #[arg(long)]
        a: BitString,
        /// Use the ancilla-free phase-oracle form.
        #[arg(long)]
        phase_form: bool,
    },
    /// Oracle equivalence, phase kickback and separability checks.
    Check {
        #[arg(long)]
        n: usize,
        /// Check one hidden string instead of all 2^n.
        #[arg(long)]
        a: Option<BitString>,
    },
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Row-major entries as re/im pairs: re00 im00 re01 im01 re10 im10 re11 im11.
    #[arg(long, num_args = 8, allow_negative_numbers = true, required = true)]
    pub matrix: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorReading {
    pub name: String,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
}

/// The report printed by every subcommand. Field order is part of the schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub detectors: Vec<DetectorReading>,
    pub bits: Option<String>,
    pub recovered: Option<String>,
    pub f_value: Option<bool>,
    /// Command-specific numbers (angles, energies, query counts, ...).
    pub values: BTreeMap<String, Value>,
    pub checks: Vec<CheckResult>,
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            detectors: Vec::new(),
            bits: None,
            recovered: None,
            f_value: None,
            values: BTreeMap::new(),
            checks: Vec::new(),
            wall_time_ms: None,
        }
    }

    fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }

    fn value(&mut self, key: &str, value: impl Into<Value>) {
        self.values.insert(key.to_string(), value.into());
    }

    fn check(&mut self, name: impl Into<String>, passed: bool) {
        self.checks.push(CheckResult { name: name.into(), passed });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Why a command stopped before producing a report.
#[derive(Debug)]
enum Failure {
    /// Bad arguments; exit 3.
    Usage(String),
    /// Unreadable, unparsable or invalid input; exit 2. One line per diagnostic.
    Input(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(diags) => Failure::Input(diags.iter().map(|d| d.to_string()).collect()),
            Error::Structural(diags) => {
                Failure::Input(diags.iter().map(|d| d.to_string()).collect())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn same_length(a: &BitString, x: &BitString) -> Result<(), Failure> {
    if a.len() == x.len() {
        Ok(())
    } else {
        Err(Failure::Usage(format!(
            "--a has {} bits but --x has {}",
            a.len(),
            x.len()
        )))
    }
}

fn readings(names: &[String], intensities: &[f64]) -> Vec<DetectorReading> {
    names
        .iter()
        .zip(intensities)
        .map(|(name, &intensity)| DetectorReading { name: name.clone(), intensity })
        .collect()
}

fn bv_find(a: &BitString, emit: Option<&Path>) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("bv find");
    report.param("a", a.to_string());
    if let Some(path) = emit {
        report.param("emit_circuit", path.display().to_string());
    }

    let oracle = HiddenOracle::new(a.clone());
    let circuit = build_bv_circuit_with(&oracle, &BitString::ones(a.len())?)?;
    let recovered = read_bits(&circuit)?;
    report.detectors = readings(&circuit.detector_names, &detector_intensities(&circuit)?);
    report.bits = Some(recovered.to_string());
    report.recovered = Some(recovered.to_string());
    report.value("optical_passes", oracle.optical_passes());
    report.value("oracle_stages", circuit.oracle_stages.len());
    report.value("elements", circuit.net.len());

    if let Some(path) = emit {
        let text = dsl::serialize(&circuit.net)?;
        std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }

    report.check("recovered_matches_hidden", recovered == *a);
    report.check("single_optical_pass", oracle.optical_passes() == 1);
    report.check("one_oracle_stage_per_beam", circuit.oracle_stages.len() == a.len());
    Ok(report)
}

fn bv_eval(a: &BitString, x: &BitString) -> Result<RunReport, Failure> {
    same_length(a, x)?;
    let mut report = RunReport::new("bv eval");
    report.param("a", a.to_string());
    report.param("x", x.to_string());

    let oracle = HiddenOracle::new(a.clone());
    let circuit = build_bv_circuit_with(&oracle, x)?;
    let bits = read_bits(&circuit)?;
    let optical = xor_fold(bits.bits())?;
    let reference = f_reference(a, x)?;
    report.detectors = readings(&circuit.detector_names, &detector_intensities(&circuit)?);
    report.bits = Some(bits.to_string());
    report.f_value = Some(optical);
    report.value("f_reference", reference);
    report.check("optical_matches_reference", optical == reference);
    Ok(report)
}

fn run_file(path: &Path, stderr: &mut dyn Write) -> Result<RunReport, Failure> {
    let bytes = std::fs::read(path)
        .map_err(|e| Failure::Input(vec![format!("cannot read {}: {e}", path.display())]))?;
    let located = |lines: Vec<String>| {
        Failure::Input(lines.into_iter().map(|l| format!("{}:{l}", path.display())).collect())
    };
    let doc = match std::str::from_utf8(&bytes) {
        Ok(text) => dsl::parse_document(text)
            .map_err(|diags| located(diags.iter().map(|d| d.to_string()).collect()))?,
        Err(_) => {
            return Err(match dsl::parse_bytes(&bytes) {
                Err(Error::Parse(diags)) => located(diags.iter().map(|d| d.to_string()).collect()),
                _ => located(vec!["file is not valid UTF-8".to_string()]),
            })
        }
    };
    for warning in &doc.warnings {
        // a broken stderr must not turn a good run into a failure
        let _ = writeln!(stderr, "{}:{warning}", path.display());
    }

    let net = &doc.netlist;
    let amps = propagate(net)?;
    let mut report = RunReport::new("run");
    report.param("file", path.display().to_string());
    report.detectors = detector_readings(&amps, net)
        .into_iter()
        .map(|(name, intensity)| DetectorReading { name, intensity })
        .collect();
    let (input, terminal) = energy_audit(&amps, net);
    report.value("elements", net.len());
    report.value("input_intensity", input);
    report.value("terminal_intensity", terminal);
    report.check("energy_conserved", (input - terminal).abs() <= EXACT_TOL * input.max(1.0));
    Ok(report)
}

fn qref_bv(a: &BitString, phase_form: bool) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("qref bv");
    report.param("a", a.to_string());
    report.param("phase_form", phase_form);
    let run = if phase_form { quantum_bv_phase_form(a)? } else { quantum_bv(a)? };
    report.recovered = Some(run.outcome.to_string());
    report.value("probability", run.probability);
    report.value("qubits", run.final_state().num_qubits());
    report.check("outcome_matches_hidden", run.outcome == *a);
    report.check("probability_one", (run.probability - 1.0).abs() <= EXACT_TOL);
    Ok(report)
}

/// Phase ≡ factored oracle on every basis state.
fn oracles_agree(a: &BitString) -> Result<bool, Failure> {
    for x in BitString::all(a.len()) {
        let basis = StateVector::from_bits(&x)?;
        let d = apply_phase_oracle(a, &basis)?.distance(&apply_factored_oracle(a, &basis)?);
        if d >= EXACT_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

fn kickback_holds(a: &BitString) -> Result<bool, Failure> {
    for x in BitString::all(a.len()) {
        if !phase_kickback_check(a, &x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn separable_throughout(a: &BitString) -> Result<bool, Failure> {
    Ok(quantum_bv_phase_form(a)?
        .stages
        .iter()
        .flat_map(purity_per_qubit)
        .all(|p| (p - 1.0).abs() <= EXACT_TOL))
}

fn qref_check(n: usize, a: Option<&BitString>) -> Result<RunReport, Failure> {
    if n == 0 || n > MAX_CHECK_QUBITS {
        return Err(Failure::Usage(format!("--n must be between 1 and {MAX_CHECK_QUBITS}")));
    }
    let mut report = RunReport::new("qref check");
    report.param("n", n);
    let targets: Vec<BitString> = match a {
        Some(a) if a.len() != n => {
            return Err(Failure::Usage(format!("--a has {} bits but --n is {n}", a.len())))
        }
        Some(a) => {
            report.param("a", a.to_string());
            vec![a.clone()]
        }
        None => BitString::all(n).collect(),
    };
    for a in &targets {
        report.check(format!("{a}/oracle_equivalence"), oracles_agree(a)?);
        report.check(format!("{a}/phase_kickback"), kickback_holds(a)?);
        report.check(format!("{a}/separability"), separable_throughout(a)?);
    }
    report.value("hidden_strings", targets.len());
    Ok(report)
}

fn baseline(a: &BitString) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("baseline");
    report.param("a", a.to_string());
    let oracle = HiddenOracle::new(a.clone());
    let outcome = classical_baseline(|x| oracle.query(x), a.len())?;
    let optical = find_hidden_string(&HiddenOracle::new(a.clone()))?;
    report.recovered = Some(outcome.recovered.to_string());
    report.value("queries", outcome.queries);
    report.check("recovered_matches_hidden", outcome.recovered == *a);
    report.check("agrees_with_optical", outcome.recovered == optical);
    report.check("n_queries", oracle.query_count() == a.len());
    Ok(report)
}

fn synth(m: &[f64]) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("synth");
    report.param("matrix", m.to_vec());
    let c = |k: usize| Complex64::new(m[2 * k], m[2 * k + 1]);
    let target = JonesMatrix::new(c(0), c(1), c(2), c(3));
    let angles = qhq_synthesize(&target)?;
    let residual = qhq_compose(&angles).phase_aligned_distance(&target);
    report.value("phi_q1", reduce_axis_angle(angles.phi_q1));
    report.value("phi_h", reduce_axis_angle(angles.phi_h));
    report.value("phi_q2", reduce_axis_angle(angles.phi_q2));
    report.value("residual", residual);
    report.check("residual_within_tolerance", residual <= SYNTH_TOL);
    Ok(report)
}

fn execute(cli: &Cli, stderr: &mut dyn Write) -> Result<RunReport, Failure> {
    match &cli.command {
        Command::Bv(BvCommand::Find { a, emit_circuit }) => bv_find(a, emit_circuit.as_deref()),
        Command::Bv(BvCommand::Eval { a, x }) => bv_eval(a, x),
        Command::Run { file } => run_file(file, stderr),
        Command::Qref(QrefCommand::Bv { a, phase_form }) => qref_bv(a, *phase_form),
        Command::Qref(QrefCommand::Check { n, a }) => qref_check(*n, a.as_ref()),
        Command::Baseline { a } => baseline(a),
        Command::Synth(args) => synth(&args.matrix),
    }
}

/// Parse `args` (including the program name), run the command and write the
/// report. Returns the process exit code:
///
/// * 0 — success, every check passed
/// * 1 — a verification check failed
/// * 2 — the input file could not be read, parsed or validated
/// * 3 — invalid arguments
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{text}");
            return code;
        }
    };

    let start = Instant::now();
    let mut report = match execute(&cli, stderr) {
        Ok(report) => report,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(Failure::Input(lines)) => {
            for line in lines {
                let _ = writeln!(stderr, "{line}");
            }
            return EXIT_INPUT;
        }
    };
    if cli.timing {
        report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }

    let text = serde_json::to_string_pretty(&report).expect("report is always serializable");
    if writeln!(stdout, "{text}").is_err() {
        return EXIT_USAGE;
    }
    for failed in report.checks.iter().filter(|c| !c.passed) {
        let _ = writeln!(stderr, "check failed: {}", failed.name);
    }
    if report.all_passed() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn invoke(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let argv = std::iter::once("polarized").chain(args.iter().copied());
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn report(args: &[&str]) -> Value {
        let (code, out, err) = invoke(args);
        assert_eq!(code, 0, "{err}");
        serde_json::from_str(&out).unwrap()
    }

    #[test]
    fn find_recovers_and_reports_every_detector() {
        let r = report(&["bv", "find", "--a", "10110"]);
        assert_eq!(r["recovered"], "10110");
        let lit: Vec<f64> =
            r["detectors"].as_array().unwrap().iter().map(|d| d["intensity"].as_f64().unwrap()).collect();
        assert_eq!(lit.len(), 5);
        assert_eq!(r["detectors"][0]["name"], "D1");
        assert!(lit.iter().all(|&i| i.abs() < 1e-12 || (i - 1.0).abs() < 1e-12));
    }

    #[test]
    fn eval_matches_reference() {
        let r = report(&["bv", "eval", "--a", "1011", "--x", "1110"]);
        assert_eq!(r["bits"], "1010");
        assert_eq!(r["f_value"], false);
        assert_eq!(r["values"]["f_reference"], false);
    }

    #[test]
    fn qref_check_covers_every_hidden_string() {
        let r = report(&["qref", "check", "--n", "3"]);
        assert_eq!(r["checks"].as_array().unwrap().len(), 24);
    }

    #[test]
    fn baseline_spends_n_queries() {
        let r = report(&["baseline", "--a", "0110"]);
        assert_eq!(r["recovered"], "0110");
        assert_eq!(r["values"]["queries"], 4);
    }

    #[test]
    fn synth_accepts_negative_entries() {
        // iσ_y = [[0, 1], [-1, 0]]
        let r = report(&["synth", "--matrix", "0", "0", "1", "0", "-1", "0", "0", "0"]);
        assert!(r["values"]["residual"].as_f64().unwrap() <= 1e-10);
    }

    #[test]
    fn argument_errors_exit_3() {
        assert_eq!(invoke(&["bv", "find", "--a", "10a"]).0, EXIT_USAGE);
        assert_eq!(invoke(&["bv", "eval", "--a", "10", "--x", "1"]).0, EXIT_USAGE);
        assert_eq!(invoke(&["qref", "check", "--n", "0"]).0, EXIT_USAGE);
        assert_eq!(invoke(&["synth", "--matrix", "1", "2"]).0, EXIT_USAGE);
        assert_eq!(invoke(&["nonsense"]).0, EXIT_USAGE);
        // not unitary
        assert_eq!(invoke(&["synth", "--matrix", "2", "0", "0", "0", "0", "0", "2", "0"]).0, EXIT_USAGE);
    }

    #[test]
    fn help_exits_0_on_stdout() {
        let (code, out, err) = invoke(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("Usage"));
        assert!(err.is_empty());
    }

    #[test]
    fn wall_time_is_opt_in() {
        assert!(report(&["baseline", "--a", "1"])["wall_time_ms"].is_null());
        assert!(report(&["--timing", "baseline", "--a", "1"])["wall_time_ms"].is_f64());
    }
}
