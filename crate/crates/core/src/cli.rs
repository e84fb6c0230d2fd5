//! `fdqc` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning                                                    |
//! |------|------------------------------------------------------------|
//! | 0    | success                                                    |
//! | 1    | bad arguments, unreadable program file, parse error        |
//! | 2    | protocol error while running a program                     |
//! | 3    | verification mismatch, or attack result contradicts mode   |
//!
//! Reports go to stdout as pretty-printed JSON; diagnostics go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blindness::{hdqc_attack, Recovered};
use crate::gateset::{direct_eval, parse_program, CircuitProgram};
use crate::pauli_otp::{self, KeyRules, PauliKey, StandardRules};
use crate::protocol::{run, Mode, RunOptions, RunOutcome};
use crate::qsim::{equal_up_to_global_phase, GateKind, GateOp, Statevector, TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_PROTOCOL: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

const INPUT_STREAM: u64 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "fdqc",
    about = "Delegated private quantum computation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Delegate a program and print the decrypted result.
    Run(CommonArgs),
    /// Check delegated execution against direct evaluation.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Exhaustive key-update sweep instead of (or as well as) a program.
        #[arg(long, value_enum)]
        sweep: Option<SweepArg>,
    },
    /// Run the key-recovery attack on a session transcript.
    Attack(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    program: Option<PathBuf>,
    /// Basis index, or `random` for a Haar-random state drawn from the seed.
    #[arg(long, default_value = "0")]
    input: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Fdqc)]
    mode: ModeArg,
    /// Record payload snapshots in the transcript.
    #[arg(long)]
    snapshots: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Fdqc,
    Hdqc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepArg {
    Toffoli,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSpec {
    Basis(usize),
    Random,
}

impl InputSpec {
    fn parse(text: &str) -> Option<Self> {
        if text == "random" {
            return Some(InputSpec::Random);
        }
        text.parse().ok().map(InputSpec::Basis)
    }

    fn label(&self) -> String {
        match self {
            InputSpec::Basis(i) => i.to_string(),
            InputSpec::Random => "random".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub program_path: Option<PathBuf>,
    pub input_spec: InputSpec,
    pub seed: u64,
    pub mode: Mode,
    pub snapshots: bool,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    fn from_args(args: CommonArgs) -> Result<Self, String> {
        let input_spec = InputSpec::parse(&args.input).ok_or_else(|| {
            format!(
                "--input must be a basis index or `random`, got `{}`",
                args.input
            )
        })?;
        Ok(Self {
            program_path: args.program,
            input_spec,
            seed: args.seed,
            mode: match args.mode {
                ModeArg::Fdqc => Mode::Fdqc,
                ModeArg::Hdqc => Mode::Hdqc,
            },
            snapshots: args.snapshots,
            output_path: args.out,
        })
    }
}

/// Streams for report and diagnostics.
pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    main_with_rules(args, &StandardRules, io)
}

/// Same as [`main_with_args`] with an injectable key-update rule set.
pub fn main_with_rules<I, T, R>(args: I, rules: &R, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    R: KeyRules + Sync,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(io.out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_PARSE,
            };
            let _ = write!(io.err, "{e}");
            return code;
        }
    };
    let (common, sweep, command) = match cli.command {
        Command::Run(c) => (c, None, "run"),
        Command::Verify { common, sweep } => (common, sweep, "verify"),
        Command::Attack(c) => (c, None, "attack"),
    };
    let config = match RunConfig::from_args(common) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(io.err, "error: {msg}");
            return EXIT_PARSE;
        }
    };
    match command {
        "run" => cmd_run(&config, rules, io),
        "verify" => cmd_verify(&config, sweep, rules, io),
        _ => cmd_attack(&config, rules, io),
    }
}

fn load_program(config: &RunConfig, io: &mut Io<'_>) -> Result<CircuitProgram, i32> {
    let Some(path) = &config.program_path else {
        let _ = writeln!(io.err, "error: --program is required");
        return Err(EXIT_PARSE);
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        let _ = writeln!(io.err, "error: cannot read {}: {e}", path.display());
        EXIT_PARSE
    })?;
    parse_program(&text).map_err(|e| {
        let _ = writeln!(io.err, "error: {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn build_input(config: &RunConfig, n_qubits: usize, io: &mut Io<'_>) -> Result<Statevector, i32> {
    let state = match config.input_spec {
        InputSpec::Basis(i) => Statevector::basis_state(n_qubits, i),
        InputSpec::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(INPUT_STREAM);
            Statevector::random_haar(n_qubits, &mut rng)
        }
    };
    state.map_err(|e| {
        let _ = writeln!(io.err, "error: input: {e}");
        EXIT_PARSE
    })
}

fn execute<R: KeyRules>(
    config: &RunConfig,
    program: &CircuitProgram,
    input: &Statevector,
    rules: &R,
    io: &mut Io<'_>,
) -> Result<RunOutcome, i32> {
    let options = RunOptions {
        snapshots: config.snapshots,
        ..RunOptions::default()
    };
    run(config.mode, program, input, config.seed, &options, rules).map_err(|e| {
        let _ = writeln!(io.err, "error: protocol: {e}");
        EXIT_PROTOCOL
    })
}

fn write_file(path: &Path, text: &str, io: &mut Io<'_>) -> Result<(), i32> {
    std::fs::write(path, text).map_err(|e| {
        let _ = writeln!(io.err, "error: cannot write {}: {e}", path.display());
        EXIT_PARSE
    })
}

fn emit<T: Serialize>(report: &T, io: &mut Io<'_>) {
    let _ = writeln!(
        io.out,
        "{}",
        serde_json::to_string_pretty(report).expect("report serializes")
    );
}

fn clean(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn amplitude_pairs(state: &Statevector) -> Vec<[f64; 2]> {
    state
        .phase_normalized()
        .amplitudes()
        .iter()
        .map(|a| [clean(a.re), clean(a.im)])
        .collect()
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    mode: Mode,
    seed: u64,
    n_qubits: usize,
    gates: usize,
    input: String,
    rounds: usize,
    corrections: usize,
    /// Global phase fixed so the largest amplitude is real and positive.
    amplitudes: Vec<[f64; 2]>,
    summary: String,
}

pub fn cmd_run<R: KeyRules>(config: &RunConfig, rules: &R, io: &mut Io<'_>) -> i32 {
    let outcome = match (|| {
        let program = load_program(config, io)?;
        let input = build_input(config, program.n_qubits(), io)?;
        let outcome = execute(config, &program, &input, rules, io)?;
        Ok::<_, i32>((program, outcome))
    })() {
        Ok(v) => v,
        Err(code) => return code,
    };
    let (program, outcome) = outcome;
    if let Some(path) = &config.output_path {
        if let Err(code) = write_file(path, &outcome.transcript.to_json(), io) {
            return code;
        }
    }
    emit(
        &RunReport {
            command: "run",
            mode: config.mode,
            seed: config.seed,
            n_qubits: program.n_qubits(),
            gates: program.len(),
            input: config.input_spec.label(),
            rounds: outcome.rounds(),
            corrections: outcome.correction_rounds,
            amplitudes: amplitude_pairs(&outcome.output),
            summary: format!(
                "{} round(s), {} correction round(s)",
                outcome.rounds(),
                outcome.correction_rounds
            ),
        },
        io,
    );
    EXIT_OK
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepResult {
    pub gate: String,
    pub cases: usize,
    pub failures: usize,
}

/// Checks `decrypt(corrections(G(encrypt(ψ, k))), new_keys) = G(ψ)` for every
/// key assignment and basis input of `kind`, using `rules`.
pub fn homomorphic_sweep<R: KeyRules>(kind: GateKind, rules: &R) -> SweepResult {
    let arity = kind.arity();
    let wires: Vec<usize> = (0..arity).collect();
    let gate = GateOp::new(kind, wires.clone()).expect("canonical targets");
    let mut cases = 0;
    let mut failures = 0;
    for code in 0..1usize << (2 * arity) {
        let keys: Vec<PauliKey> = (0..arity)
            .map(|j| PauliKey::from_index(code >> (2 * j) & 3))
            .collect();
        for basis in 0..1usize << arity {
            cases += 1;
            let ok = (|| {
                let psi = Statevector::basis_state(arity, basis).ok()?;
                let update = rules.key_update(kind, &keys).ok()?;
                let cipher = pauli_otp::encrypt(&psi, &keys, &wires)
                    .ok()?
                    .apply(&gate)
                    .ok()?;
                let corrected = cipher
                    .apply_all(&update.corrections_on(&wires).ok()?)
                    .ok()?;
                let plain = pauli_otp::decrypt(&corrected, &update.new_keys, &wires).ok()?;
                equal_up_to_global_phase(&plain, &psi.apply(&gate).ok()?, TOL).ok()
            })();
            if ok != Some(true) {
                failures += 1;
            }
        }
    }
    SweepResult {
        gate: kind.mnemonic().to_string(),
        cases,
        failures,
    }
}

/// Optimized and SWAP-routed Toffoli decryption agree on every key setting
/// and basis input.
pub fn toffoli_equivalence_sweep() -> SweepResult {
    let wires = [0, 1, 2];
    let t = GateOp::toffoli(0, 1, 2);
    let mut cases = 0;
    let mut failures = 0;
    for code in 0..64usize {
        let keys = [0, 1, 2].map(|j| PauliKey::from_index(code >> (2 * j) & 3));
        for basis in 0..8 {
            cases += 1;
            let ok = (|| {
                let psi = Statevector::basis_state(3, basis).ok()?;
                let cipher = pauli_otp::encrypt(&psi, &keys, &wires)
                    .ok()?
                    .apply(&t)
                    .ok()?;
                let opt = pauli_otp::toffoli_decrypt_optimized(&cipher, &keys, &wires).ok()?;
                let unopt = pauli_otp::toffoli_decrypt_unoptimized(&cipher, &keys, &wires).ok()?;
                equal_up_to_global_phase(&opt, &unopt, TOL).ok()
            })();
            if ok != Some(true) {
                failures += 1;
            }
        }
    }
    SweepResult {
        gate: "T (SWAP-routed vs optimized)".to_string(),
        cases,
        failures,
    }
}

#[derive(Serialize)]
struct ProgramCheck {
    mode: Mode,
    seed: u64,
    input: String,
    rounds: usize,
    corrections: usize,
    fidelity: f64,
    equal: bool,
    tolerance: f64,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    program: Option<ProgramCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepArg>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    sweep_results: Vec<SweepResult>,
    passed: bool,
}

pub fn cmd_verify<R: KeyRules + Sync>(
    config: &RunConfig,
    sweep: Option<SweepArg>,
    rules: &R,
    io: &mut Io<'_>,
) -> i32 {
    if config.program_path.is_none() && sweep.is_none() {
        let _ = writeln!(io.err, "error: verify needs --program, --sweep, or both");
        return EXIT_PARSE;
    }
    let mut passed = true;

    let program_check = match &config.program_path {
        None => None,
        Some(_) => {
            let checked = (|| {
                let program = load_program(config, io)?;
                let input = build_input(config, program.n_qubits(), io)?;
                let outcome = execute(config, &program, &input, rules, io)?;
                let expected = direct_eval(&program, &input).map_err(|e| {
                    let _ = writeln!(io.err, "error: {e}");
                    EXIT_PROTOCOL
                })?;
                Ok::<_, i32>((outcome, expected))
            })();
            let (outcome, expected) = match checked {
                Ok(v) => v,
                Err(code) => return code,
            };
            let fidelity = outcome.output.fidelity(&expected).unwrap_or(0.0);
            let equal = equal_up_to_global_phase(&outcome.output, &expected, TOL).unwrap_or(false);
            if !equal {
                passed = false;
                let _ = writeln!(
                    io.err,
                    "mismatch: delegated output differs from direct evaluation"
                );
                let _ = writeln!(
                    io.err,
                    "  delegated: {:?}",
                    amplitude_pairs(&outcome.output)
                );
                let _ = writeln!(io.err, "  direct:    {:?}", amplitude_pairs(&expected));
            }
            if let Some(path) = &config.output_path {
                if let Err(code) = write_file(path, &outcome.transcript.to_json(), io) {
                    return code;
                }
            }
            Some(ProgramCheck {
                mode: config.mode,
                seed: config.seed,
                input: config.input_spec.label(),
                rounds: outcome.rounds(),
                corrections: outcome.correction_rounds,
                fidelity: clean(fidelity),
                equal,
                tolerance: TOL,
            })
        }
    };

    let sweep_results = match sweep {
        None => Vec::new(),
        Some(SweepArg::Toffoli) => vec![
            homomorphic_sweep(GateKind::Toffoli, rules),
            toffoli_equivalence_sweep(),
        ],
        Some(SweepArg::All) => {
            let kinds = [
                GateKind::H,
                GateKind::P,
                GateKind::Cz,
                GateKind::Cnot,
                GateKind::Toffoli,
            ];
            let mut results: Vec<SweepResult> = std::thread::scope(|s| {
                let handles: Vec<_> = kinds
                    .iter()
                    .map(|&k| s.spawn(move || homomorphic_sweep(k, rules)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sweep worker"))
                    .collect()
            });
            results.push(toffoli_equivalence_sweep());
            results
        }
    };
    for r in &sweep_results {
        if r.failures > 0 {
            passed = false;
            let _ = writeln!(
                io.err,
                "mismatch: {} sweep failed {}/{} case(s)",
                r.gate, r.failures, r.cases
            );
        }
    }

    emit(
        &VerifyReport {
            command: "verify",
            program: program_check,
            sweep,
            sweep_results,
            passed,
        },
        io,
    );
    if passed {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

pub fn cmd_attack<R: KeyRules>(config: &RunConfig, rules: &R, io: &mut Io<'_>) -> i32 {
    let outcome = match (|| {
        let program = load_program(config, io)?;
        let input = build_input(config, program.n_qubits(), io)?;
        execute(config, &program, &input, rules, io)
    })() {
        Ok(o) => o,
        Err(code) => return code,
    };
    let report = hdqc_attack(&outcome.transcript, &outcome.toffoli_keys);
    let consistent = match config.mode {
        Mode::Hdqc => report.recovered_bits.iter().all(|(name, r)| {
            let truth = report.ground_truth[name];
            matches!((r, truth), (Recovered::Zero, 0) | (Recovered::One, 1))
        }),
        Mode::Fdqc => report.all_unknown(),
    };
    let json = report.to_json();
    if let Some(path) = &config.output_path {
        if let Err(code) = write_file(path, &json, io) {
            return code;
        }
    }
    let _ = writeln!(io.out, "{json}");
    if consistent {
        EXIT_OK
    } else {
        let _ = writeln!(io.err, "attack result contradicts {} mode", config.mode);
        EXIT_MISMATCH
    }
}
