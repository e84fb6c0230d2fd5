use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gateset::{CircuitProgram, ProgramError};
use crate::pauli_otp::{self, KeyRules, PauliKey};
use crate::qsim::{GateKind, GateOp, Statevector};

use super::transcript::{AnnouncedRole, Mode};
use super::{
    Announcement, Direction, ProtocolError, RoundLayout, RoundMessage, RunOptions, Slot,
    ROUND_WIRES,
};

const KEY_STREAM: u64 = 0;
const ANCILLA_STREAM: u64 = 1;

/// Keys a Toffoli saw when it was delegated. Ground truth for attack scoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToffoliKeys {
    pub round_index: u64,
    /// Logical `(control1, control2, target)`.
    pub wires: [usize; 3],
    pub keys: [PauliKey; 3],
}

impl ToffoliKeys {
    /// X-bit of control 1; triggers CNOT(control2 → target).
    pub fn a(&self) -> bool {
        self.keys[0].x
    }

    /// X-bit of control 2; triggers CNOT(control1 → target).
    pub fn c(&self) -> bool {
        self.keys[1].x
    }

    /// Z-bit of the target; triggers CZ(control1, control2).
    pub fn f(&self) -> bool {
        self.keys[2].z
    }

    pub fn expected_corrections(&self) -> usize {
        [self.a(), self.c(), self.f()]
            .iter()
            .filter(|&&b| b)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientResult {
    pub output: Statevector,
    pub terminal_keys: Vec<PauliKey>,
    pub correction_rounds: usize,
    pub toffoli_keys: Vec<ToffoliKeys>,
}

#[derive(Debug, Clone)]
struct InFlight {
    op: GateOp,
    from_program: bool,
    layout: RoundLayout,
    round_index: u64,
    /// `dest[q]` is where source qubit `q` of the pre-permutation register went.
    dest: Vec<usize>,
    ancillas: usize,
}

/// Client state machine. Holds the logical register encrypted between rounds
/// and tracks one Pauli key per logical qubit.
#[derive(Debug)]
pub struct Client<'r, R: KeyRules> {
    mode: Mode,
    program: CircuitProgram,
    pc: usize,
    keys: Vec<PauliKey>,
    pending: VecDeque<GateOp>,
    logical: Option<Statevector>,
    rng_seed: u64,
    key_rng: ChaCha8Rng,
    ancilla_rng: ChaCha8Rng,
    rerandomize: bool,
    rules: &'r R,
    next_round: u64,
    in_flight: Option<InFlight>,
    correction_rounds: usize,
    toffoli_keys: Vec<ToffoliKeys>,
}

impl<'r, R: KeyRules> Client<'r, R> {
    pub fn new(
        mode: Mode,
        program: CircuitProgram,
        input: &Statevector,
        seed: u64,
        options: &RunOptions,
        rules: &'r R,
    ) -> Result<Self, ProtocolError> {
        let n = program.n_qubits();
        if input.n_qubits() != n {
            return Err(ProgramError::WidthMismatch {
                expected: n,
                got: input.n_qubits(),
            }
            .into());
        }
        let mut key_rng = ChaCha8Rng::seed_from_u64(seed);
        key_rng.set_stream(KEY_STREAM);
        let mut ancilla_rng = ChaCha8Rng::seed_from_u64(seed);
        ancilla_rng.set_stream(ANCILLA_STREAM);

        let keys = match &options.initial_keys {
            Some(k) if k.len() != n => {
                return Err(ProtocolError::KeyCount {
                    expected: n,
                    got: k.len(),
                })
            }
            Some(k) => k.clone(),
            None => (0..n).map(|_| PauliKey::random(&mut key_rng)).collect(),
        };
        let wires: Vec<usize> = (0..n).collect();
        let logical = pauli_otp::encrypt(input, &keys, &wires)?;
        Ok(Self {
            mode,
            program,
            pc: 0,
            keys,
            pending: VecDeque::new(),
            logical: Some(logical),
            rng_seed: seed,
            key_rng,
            ancilla_rng,
            rerandomize: options.rerandomize_keys,
            rules,
            next_round: 0,
            in_flight: None,
            correction_rounds: 0,
            toffoli_keys: Vec::new(),
        })
    }

    pub fn keys(&self) -> &[PauliKey] {
        &self.keys
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn pending_corrections(&self) -> impl Iterator<Item = &GateOp> {
        self.pending.iter()
    }

    /// Next delegated op; pending corrections drain before the program resumes.
    pub fn next_op(&self) -> Option<(&GateOp, bool)> {
        if let Some(op) = self.pending.front() {
            return Some((op, false));
        }
        self.program.ops().get(self.pc).map(|op| (op, true))
    }

    pub fn has_work(&self) -> bool {
        self.in_flight.is_some() || self.next_op().is_some()
    }

    fn layout_for(&self, op: &GateOp) -> RoundLayout {
        let slot = Slot::for_kind(op.kind()).expect("delegatable kind");
        let wires: Vec<usize> = match self.mode {
            Mode::Fdqc => slot.wires().to_vec(),
            Mode::Hdqc => (0..op.targets().len()).collect(),
        };
        RoundLayout {
            mode: self.mode,
            message_slot: slot,
            message_map: op.targets().iter().copied().zip(wires).collect(),
        }
    }

    pub fn prepare_round(&mut self) -> Result<(RoundMessage, RoundLayout), ProtocolError> {
        if self.in_flight.is_some() {
            return Err(ProtocolError::RoundInFlight);
        }
        let (op, from_program) = self
            .next_op()
            .map(|(op, p)| (op.clone(), p))
            .ok_or(ProtocolError::Exhausted)?;
        let mut logical = self.logical.take().expect("register held between rounds");

        if self.rerandomize {
            for &q in op.targets() {
                let fresh = PauliKey::random(&mut self.key_rng);
                logical = pauli_otp::encrypt(&logical, &[fresh], &[q])?;
                self.keys[q] = PauliKey::new(self.keys[q].x ^ fresh.x, self.keys[q].z ^ fresh.z);
            }
        }

        let layout = self.layout_for(&op);
        let channel_wires = layout.channel_wires();
        let ancilla_wires = layout.ancilla_wires();

        // Source register: decoys in wire order, then the logical qubits.
        let mut register: Option<Statevector> = None;
        for _ in &ancilla_wires {
            let decoy = Statevector::random_haar(1, &mut self.ancilla_rng)?;
            register = Some(match register {
                Some(r) => r.tensor(&decoy),
                None => decoy,
            });
        }
        let register = match register {
            Some(r) => r.tensor(&logical),
            None => logical,
        };

        let mut dest: Vec<usize> = ancilla_wires.clone();
        let mut retained = channel_wires;
        for q in 0..self.program.n_qubits() {
            match layout.message_map.iter().find(|&&(lq, _)| lq == q) {
                Some(&(_, wire)) => dest.push(wire),
                None => {
                    dest.push(retained);
                    retained += 1;
                }
            }
        }
        let payload = register.permute_qubits(&dest)?;

        let round_index = self.next_round;
        self.next_round += 1;
        let announcement = (self.mode == Mode::Hdqc).then(|| Announcement {
            gate: op.clone(),
            role: if from_program {
                AnnouncedRole::Program
            } else {
                AnnouncedRole::Correction
            },
        });
        let msg = RoundMessage {
            direction: Direction::ClientToServer,
            round_index,
            channel_wires,
            payload,
            announcement,
        };
        self.in_flight = Some(InFlight {
            op,
            from_program,
            layout: layout.clone(),
            round_index,
            dest,
            ancillas: ancilla_wires.len(),
        });
        debug_assert!(self.mode != Mode::Fdqc || channel_wires == ROUND_WIRES);
        Ok((msg, layout))
    }

    pub fn absorb_round(
        &mut self,
        reply: RoundMessage,
        layout: &RoundLayout,
    ) -> Result<(), ProtocolError> {
        let flight = self
            .in_flight
            .take()
            .ok_or(ProtocolError::NoRoundInFlight)?;
        let mismatch = if reply.direction != Direction::ServerToClient {
            Some("reply travels the wrong way".to_string())
        } else if reply.round_index != flight.round_index {
            Some(format!(
                "round {} expected, got {}",
                flight.round_index, reply.round_index
            ))
        } else if *layout != flight.layout {
            Some("layout differs from the prepared one".to_string())
        } else if reply.payload.n_qubits() != flight.dest.len() {
            Some(format!(
                "payload has {} qubit(s), expected {}",
                reply.payload.n_qubits(),
                flight.dest.len()
            ))
        } else {
            None
        };
        if let Some(why) = mismatch {
            self.in_flight = Some(flight);
            return Err(ProtocolError::LayoutMismatch(why));
        }

        let mut inverse = vec![0; flight.dest.len()];
        for (q, &d) in flight.dest.iter().enumerate() {
            inverse[d] = q;
        }
        let register = reply.payload.permute_qubits(&inverse)?;
        let logical = if flight.ancillas == 0 {
            register
        } else {
            register.split_product(flight.ancillas)?.1
        };
        self.logical = Some(logical);

        let targets = flight.op.targets().to_vec();
        let before: Vec<PauliKey> = targets.iter().map(|&q| self.keys[q]).collect();
        if flight.op.kind() == GateKind::Toffoli {
            self.toffoli_keys.push(ToffoliKeys {
                round_index: flight.round_index,
                wires: [targets[0], targets[1], targets[2]],
                keys: [before[0], before[1], before[2]],
            });
        }
        let update = self.rules.key_update(flight.op.kind(), &before)?;

        // Corrections still have to run, so hold the keys of the frame before
        // them; each correction round then moves the keys forward normally.
        let mut frame = update.new_keys.clone();
        for corr in update.corrections.iter().rev() {
            let local: Vec<PauliKey> = corr.targets().iter().map(|&t| frame[t]).collect();
            let back = self.rules.key_update(corr.kind(), &local)?;
            for (&t, k) in corr.targets().iter().zip(back.new_keys) {
                frame[t] = k;
            }
        }
        for (&q, k) in targets.iter().zip(frame) {
            self.keys[q] = k;
        }
        for corr in update.corrections_on(&targets)? {
            self.pending.push_back(corr);
        }

        if flight.from_program {
            self.pc += 1;
        } else {
            self.pending.pop_front();
            self.correction_rounds += 1;
        }
        Ok(())
    }

    /// Decrypts the register with the terminal keys.
    pub fn finish(self) -> Result<ClientResult, ProtocolError> {
        if self.has_work() {
            return Err(ProtocolError::Unfinished);
        }
        let logical = self.logical.expect("register held after last round");
        let wires: Vec<usize> = (0..self.program.n_qubits()).collect();
        let output = pauli_otp::decrypt(&logical, &self.keys, &wires)?;
        Ok(ClientResult {
            output,
            terminal_keys: self.keys,
            correction_rounds: self.correction_rounds,
            toffoli_keys: self.toffoli_keys,
        })
    }
}
