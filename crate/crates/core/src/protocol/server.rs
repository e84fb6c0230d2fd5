//! Honest-but-curious server engine.

use crate::qsim::{GateOp, Statevector};

use super::transcript::{Mode, RoundRecord, Snapshot};
use super::{Direction, ProtocolError, RoundMessage, ROUND_WIRES};

/// The op tuple run in every full-blind round: H(0), P(1), CZ(2,3),
/// CNOT(4,5), T(6,7,8).
pub fn fixed_round_ops() -> [GateOp; 5] {
    [
        GateOp::h(0),
        GateOp::p(1),
        GateOp::cz(2, 3),
        GateOp::cnot(4, 5),
        GateOp::toffoli(6, 7, 8),
    ]
}

/// Executes rounds and logs everything it observes.
#[derive(Debug, Clone)]
pub struct Server {
    mode: Mode,
    snapshots: bool,
    records: Vec<RoundRecord>,
}

impl Server {
    pub fn new(mode: Mode, snapshots: bool) -> Self {
        Self {
            mode,
            snapshots,
            records: Vec::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<RoundRecord> {
        self.records
    }

    fn ops_for(&self, msg: &RoundMessage) -> Result<Vec<GateOp>, ProtocolError> {
        match (self.mode, &msg.announcement) {
            (Mode::Fdqc, None) => {
                if msg.channel_wires != ROUND_WIRES {
                    return Err(ProtocolError::Malformed(format!(
                        "full-blind rounds carry {ROUND_WIRES} wires, got {}",
                        msg.channel_wires
                    )));
                }
                Ok(fixed_round_ops().to_vec())
            }
            (Mode::Hdqc, Some(a)) => {
                let arity = a.gate.kind().arity();
                if msg.channel_wires != arity {
                    return Err(ProtocolError::Malformed(format!(
                        "announced {} needs {arity} channel wire(s), got {}",
                        a.gate.kind(),
                        msg.channel_wires
                    )));
                }
                Ok(vec![GateOp::new(a.gate.kind(), (0..arity).collect())?])
            }
            (Mode::Fdqc, Some(_)) => Err(ProtocolError::Malformed(
                "full-blind rounds carry no announcement".into(),
            )),
            (Mode::Hdqc, None) => Err(ProtocolError::Malformed(
                "half-blind rounds must announce their gate".into(),
            )),
        }
    }

    pub fn execute_round(&mut self, msg: RoundMessage) -> Result<RoundMessage, ProtocolError> {
        if msg.direction != Direction::ClientToServer {
            return Err(ProtocolError::Malformed(
                "server received a server-to-client message".into(),
            ));
        }
        if msg.payload.n_qubits() < msg.channel_wires {
            return Err(ProtocolError::Malformed(format!(
                "payload has {} qubit(s) but claims {} channel wire(s)",
                msg.payload.n_qubits(),
                msg.channel_wires
            )));
        }
        if let Some(last) = self.records.last() {
            if msg.round_index <= last.round_index {
                return Err(ProtocolError::Malformed(format!(
                    "round index {} does not follow {}",
                    msg.round_index, last.round_index
                )));
            }
        }
        let ops = self.ops_for(&msg)?;
        let before = self
            .snapshots
            .then(|| Snapshot::of(&msg.payload, msg.channel_wires));
        let payload: Statevector = msg.payload.apply_all(&ops)?;
        let after = self
            .snapshots
            .then(|| Snapshot::of(&payload, msg.channel_wires));
        self.records.push(RoundRecord {
            round_index: msg.round_index,
            server_ops: ops.iter().map(|op| op.to_string()).collect(),
            announced_gate: msg.announcement.as_ref().map(|a| a.gate.to_string()),
            announced_role: msg.announcement.as_ref().map(|a| a.role),
            payload_before: before,
            payload_after: after,
        });
        Ok(RoundMessage {
            direction: Direction::ServerToClient,
            payload,
            ..msg
        })
    }
}
