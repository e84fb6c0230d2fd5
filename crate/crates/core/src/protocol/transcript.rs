//! Server-side record of a protocol run and its JSON document form.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::pauli_otp::PauliKey;
use crate::qsim::{QsimError, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full-blind: every round runs the same fixed op tuple on 9 wires.
    Fdqc,
    /// Half-blind: the client announces each gate.
    Hdqc,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Fdqc => "fdqc",
            Mode::Hdqc => "hdqc",
        })
    }
}

/// Why an announced gate was requested. Only present in half-blind runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnouncedRole {
    Program,
    Correction,
}

/// Channel payload as amplitudes. The first `channel_wires` wires are what
/// travelled; any further wires are the client's retained qubits, kept only
/// so the simulation stays pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub channel_wires: usize,
    pub n_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

impl Snapshot {
    pub fn of(state: &Statevector, channel_wires: usize) -> Self {
        Self {
            channel_wires,
            n_qubits: state.n_qubits(),
            amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn to_statevector(&self) -> Result<Statevector, QsimError> {
        Statevector::from_amplitudes(
            self.amplitudes
                .iter()
                .map(|&[re, im]| C64::new(re, im))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: u64,
    /// Ops the server applied, on channel wires, e.g. `"CZ 2 3"`.
    pub server_ops: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub announced_gate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub announced_role: Option<AnnouncedRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_before: Option<Snapshot>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payload_after: Option<Snapshot>,
}

impl RoundRecord {
    pub fn without_snapshots(&self) -> Self {
        Self {
            payload_before: None,
            payload_after: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub mode: Mode,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    /// SHA-256 of the client's terminal keys. Client-side audit value; not
    /// part of what the server observes.
    pub terminal_keys_digest: String,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn without_snapshots(&self) -> Self {
        Self {
            rounds: self
                .rounds
                .iter()
                .map(RoundRecord::without_snapshots)
                .collect(),
            ..self.clone()
        }
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }
}

pub fn keys_digest(keys: &[PauliKey]) -> String {
    let text = keys
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    hex::encode(Sha256::digest(text.as_bytes()))
}
