//! Client and server engines for delegated computation.
//!
//! In full-blind mode every round is a 9-wire sequence split into five slots,
//! one per op of the fixed tuple `(H, P, CZ, CNOT, T)`:
//!
//! | slot   | wires   |
//! |--------|---------|
//! | S_H    | 0       |
//! | S_P    | 1       |
//! | S_CZ   | 2, 3    |
//! | S_CNOT | 4, 5    |
//! | S_T    | 6, 7, 8 |
//!
//! The client places the encrypted operands of one delegated gate in the
//! matching slot and fills the rest with random single-qubit decoys. The
//! server runs the whole tuple, so it cannot tell which slot mattered. Toffoli
//! corrections are delegated the same way in later rounds.
//!
//! Half-blind mode announces each gate (and flags corrections as such) and
//! sends only its operands; it exists to show what that announcement leaks.

mod client;
mod server;
mod transcript;

pub use client::{Client, ClientResult, ToffoliKeys};
pub use server::{fixed_round_ops, Server};
pub use transcript::{keys_digest, AnnouncedRole, Mode, RoundRecord, Snapshot, Transcript};

use thiserror::Error;

use crate::gateset::{CircuitProgram, ProgramError};
use crate::pauli_otp::{KeyRules, OtpError, PauliKey, StandardRules};
use crate::qsim::{GateKind, GateOp, QsimError, Statevector};

/// Width of a full-blind round.
pub const ROUND_WIRES: usize = 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("program exhausted and no corrections pending")]
    Exhausted,
    #[error("a round is already in flight")]
    RoundInFlight,
    #[error("no round in flight")]
    NoRoundInFlight,
    #[error("reply does not match the prepared round: {0}")]
    LayoutMismatch(String),
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("run stopped with work remaining")]
    Unfinished,
    #[error("expected {expected} initial key(s), got {got}")]
    KeyCount { expected: usize, got: usize },
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error(transparent)]
    Otp(#[from] OtpError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// The five subsequences of a full-blind round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    H,
    P,
    Cz,
    Cnot,
    T,
}

impl Slot {
    pub const ALL: [Slot; 5] = [Slot::H, Slot::P, Slot::Cz, Slot::Cnot, Slot::T];

    pub fn wires(self) -> &'static [usize] {
        match self {
            Slot::H => &[0],
            Slot::P => &[1],
            Slot::Cz => &[2, 3],
            Slot::Cnot => &[4, 5],
            Slot::T => &[6, 7, 8],
        }
    }

    pub fn for_kind(kind: GateKind) -> Option<Slot> {
        match kind {
            GateKind::H => Some(Slot::H),
            GateKind::P => Some(Slot::P),
            GateKind::Cz => Some(Slot::Cz),
            GateKind::Cnot => Some(Slot::Cnot),
            GateKind::Toffoli => Some(Slot::T),
            GateKind::X | GateKind::Z => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Slot::H => "S_H",
            Slot::P => "S_P",
            Slot::Cz => "S_CZ",
            Slot::Cnot => "S_CNOT",
            Slot::T => "S_T",
        }
    }
}

/// Where the delegated gate's operands sit in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundLayout {
    pub mode: Mode,
    pub message_slot: Slot,
    /// `(logical qubit, channel wire)` in gate-target order.
    pub message_map: Vec<(usize, usize)>,
}

impl RoundLayout {
    pub fn slot_of(slot: Slot) -> &'static [usize] {
        slot.wires()
    }

    pub fn channel_wires(&self) -> usize {
        match self.mode {
            Mode::Fdqc => ROUND_WIRES,
            Mode::Hdqc => self.message_map.len(),
        }
    }

    pub fn message_wires(&self) -> Vec<usize> {
        self.message_map.iter().map(|&(_, w)| w).collect()
    }

    pub fn ancilla_wires(&self) -> Vec<usize> {
        let message = self.message_wires();
        (0..self.channel_wires())
            .filter(|w| !message.contains(w))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ClientToServer,
    ServerToClient,
}

/// Gate announced to a half-blind server, on logical wires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Announcement {
    pub gate: GateOp,
    pub role: AnnouncedRole,
}

/// One trip over the simulated quantum channel.
///
/// `payload` wires `0..channel_wires` are what travels. Logical qubits the
/// client keeps back may be entangled with the travelling ones, so they ride
/// along as trailing wires the server never touches.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMessage {
    pub direction: Direction,
    pub round_index: u64,
    pub channel_wires: usize,
    pub payload: Statevector,
    pub announcement: Option<Announcement>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Record the payload before and after each server step.
    pub snapshots: bool,
    /// Start from these keys instead of drawing them from the seed.
    pub initial_keys: Option<Vec<PauliKey>>,
    /// Re-pad touched qubits with fresh keys before each round.
    pub rerandomize_keys: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// Decrypted result.
    pub output: Statevector,
    pub transcript: Transcript,
    pub correction_rounds: usize,
    pub terminal_keys: Vec<PauliKey>,
    /// Client-side record of the keys each Toffoli saw.
    pub toffoli_keys: Vec<ToffoliKeys>,
}

impl RunOutcome {
    pub fn rounds(&self) -> usize {
        self.transcript.round_count()
    }
}

pub fn run_fdqc(
    program: &CircuitProgram,
    input: &Statevector,
    seed: u64,
) -> Result<RunOutcome, ProtocolError> {
    run(
        Mode::Fdqc,
        program,
        input,
        seed,
        &RunOptions::default(),
        &StandardRules,
    )
}

pub fn run_hdqc(
    program: &CircuitProgram,
    input: &Statevector,
    seed: u64,
) -> Result<RunOutcome, ProtocolError> {
    run(
        Mode::Hdqc,
        program,
        input,
        seed,
        &RunOptions::default(),
        &StandardRules,
    )
}

/// Drives a client and a server to completion over a lossless channel.
pub fn run<R: KeyRules>(
    mode: Mode,
    program: &CircuitProgram,
    input: &Statevector,
    seed: u64,
    options: &RunOptions,
    rules: &R,
) -> Result<RunOutcome, ProtocolError> {
    let mut client = Client::new(mode, program.clone(), input, seed, options, rules)?;
    let mut server = Server::new(mode, options.snapshots);
    while client.has_work() {
        let (msg, layout) = client.prepare_round()?;
        let reply = server.execute_round(msg)?;
        client.absorb_round(reply, &layout)?;
    }
    let result = client.finish()?;
    let transcript = Transcript {
        mode,
        seed,
        rounds: server.into_records(),
        terminal_keys_digest: keys_digest(&result.terminal_keys),
    };
    Ok(RunOutcome {
        output: result.output,
        transcript,
        correction_rounds: result.correction_rounds,
        terminal_keys: result.terminal_keys,
        toffoli_keys: result.toffoli_keys,
    })
}
