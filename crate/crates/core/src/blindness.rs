//! Computable forms of the blindness claims: what the server's view looks
//! like, whether two transcripts can be told apart, and a key-recovery attack
//! on half-blind transcripts.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateset::CircuitProgram;
use crate::pauli_otp::{self, PauliKey, StandardRules};
use crate::protocol::{
    AnnouncedRole, Client, Mode, ProtocolError, RoundRecord, RunOptions, Server, Slot, ToffoliKeys,
    Transcript,
};
use crate::qsim::{DensityMatrix, GateOp, QsimError, Statevector, TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlindnessError {
    #[error("cannot compare a {0} transcript with a {1} transcript")]
    MixedModes(Mode, Mode),
    #[error("expected full-blind transcripts")]
    NotFdqc,
    #[error("expected a normalized single-qubit state")]
    BadPlaintext,
    #[error("encrypted view deviates from I/2 by {0:e}")]
    NotMaximallyMixed(f64),
    #[error("round {0} has no payload snapshot")]
    MissingSnapshot(u64),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Mixture of `encrypt(ψ, k)` over the four equiprobable keys. Fails unless
/// the result is `I/2` within tolerance.
pub fn encrypted_view(plaintext: &Statevector) -> Result<DensityMatrix, BlindnessError> {
    if plaintext.n_qubits() != 1 || (plaintext.norm() - 1.0).abs() > TOL {
        return Err(BlindnessError::BadPlaintext);
    }
    let states = (0..4)
        .map(|i| pauli_otp::encrypt(plaintext, &[PauliKey::from_index(i)], &[0]))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| BlindnessError::BadPlaintext)?;
    let view = DensityMatrix::mix(&states, &[0.25; 4])?;
    let dev = view.max_abs_diff(&DensityMatrix::maximally_mixed(1)?)?;
    if dev > TOL {
        return Err(BlindnessError::NotMaximallyMixed(dev));
    }
    Ok(view)
}

/// True iff both full-blind transcripts have the same number of rounds and
/// identical server-visible records once snapshots are dropped.
///
/// Round count is visible, so programs of different length (or with
/// different numbers of Toffoli corrections) are distinguishable.
pub fn transcripts_indistinguishable(
    t1: &Transcript,
    t2: &Transcript,
) -> Result<bool, BlindnessError> {
    if t1.mode != t2.mode {
        return Err(BlindnessError::MixedModes(t1.mode, t2.mode));
    }
    if t1.mode != Mode::Fdqc {
        return Err(BlindnessError::NotFdqc);
    }
    if t1.rounds.len() != t2.rounds.len() {
        return Ok(false);
    }
    Ok(t1
        .rounds
        .iter()
        .zip(&t2.rounds)
        .all(|(a, b)| a.without_snapshots() == b.without_snapshots()))
}

/// Per-round reduced states of the channel wires as the server received them.
#[derive(Debug, Clone)]
pub struct ServerView {
    pub rounds: Vec<DensityMatrix>,
    pub visible_ops: Vec<Vec<String>>,
}

impl ServerView {
    /// Needs a transcript recorded with snapshots.
    pub fn from_transcript(t: &Transcript) -> Result<Self, BlindnessError> {
        let mut rounds = Vec::with_capacity(t.rounds.len());
        for r in &t.rounds {
            let snap = r
                .payload_before
                .as_ref()
                .ok_or(BlindnessError::MissingSnapshot(r.round_index))?;
            let state = snap.to_statevector()?;
            let channel: Vec<usize> = (0..snap.channel_wires).collect();
            rounds.push(state.reduced_density(&channel)?);
        }
        Ok(Self {
            rounds,
            visible_ops: t.rounds.iter().map(|r| r.server_ops.clone()).collect(),
        })
    }
}

/// Key-averaged view of the message wires in one live round.
#[derive(Debug, Clone)]
pub struct MessageView {
    pub round_index: u64,
    pub slot: Slot,
    /// `(channel wire, reduced state averaged over that wire's 4 keys)`.
    pub per_wire: Vec<(usize, DensityMatrix)>,
    /// Whole message slot averaged over all keys of its wires.
    pub slot_view: DensityMatrix,
}

fn rekey(
    payload: &Statevector,
    wires: &[usize],
    deltas: &[PauliKey],
) -> Result<Statevector, QsimError> {
    let mut out = payload.clone();
    for (&w, d) in wires.iter().zip(deltas) {
        if d.z {
            out.apply_in_place(&GateOp::z(w))?;
        }
        if d.x {
            out.apply_in_place(&GateOp::x(w))?;
        }
    }
    Ok(out)
}

/// Runs a full-blind session and, for every round, averages the server's view
/// of the message wires over their current keys. A different current key only
/// changes the payload by a Pauli on that wire, so each average is computed
/// from the live payload with everything else held fixed.
pub fn message_views(
    program: &CircuitProgram,
    input: &Statevector,
    seed: u64,
) -> Result<Vec<MessageView>, BlindnessError> {
    let rules = StandardRules;
    let mut client = Client::new(
        Mode::Fdqc,
        program.clone(),
        input,
        seed,
        &RunOptions::default(),
        &rules,
    )?;
    let mut server = Server::new(Mode::Fdqc, false);
    let mut views = Vec::new();
    while client.has_work() {
        let (msg, layout) = client.prepare_round()?;
        let wires = layout.message_wires();
        let mut per_wire = Vec::with_capacity(wires.len());
        for &w in &wires {
            let mats = (0..4)
                .map(|i| {
                    rekey(&msg.payload, &[w], &[PauliKey::from_index(i)])?.reduced_density(&[w])
                })
                .collect::<Result<Vec<_>, _>>()?;
            per_wire.push((w, DensityMatrix::average(&mats)?));
        }
        let slot_mats = (0..1usize << (2 * wires.len()))
            .map(|code| {
                let deltas: Vec<PauliKey> = (0..wires.len())
                    .map(|j| PauliKey::from_index(code >> (2 * j) & 3))
                    .collect();
                rekey(&msg.payload, &wires, &deltas)?.reduced_density(&wires)
            })
            .collect::<Result<Vec<_>, _>>()?;
        views.push(MessageView {
            round_index: msg.round_index,
            slot: layout.message_slot,
            per_wire,
            slot_view: DensityMatrix::average(&slot_mats)?,
        });
        let reply = server.execute_round(msg)?;
        client.absorb_round(reply, &layout)?;
    }
    Ok(views)
}

/// An attacker's verdict on one key bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Recovered {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "unknown")]
    Unknown,
}

impl From<bool> for Recovered {
    fn from(b: bool) -> Self {
        if b {
            Recovered::One
        } else {
            Recovered::Zero
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub mode: Mode,
    /// Whether the transcript announced gates at all.
    pub gates_announced: bool,
    /// Program gates the server learned from announcements.
    pub recovered_program: Vec<String>,
    /// Keyed `t<i>.<bit>` for the i-th Toffoli, bit one of `a`, `c`, `f`.
    pub recovered_bits: BTreeMap<String, Recovered>,
    pub ground_truth: BTreeMap<String, u8>,
    /// Fraction of ground-truth bits recovered correctly; `None` with no bits.
    pub success_rate: Option<f64>,
    /// Unknown bits were filled with coin flips.
    pub guessed: bool,
    pub note: String,
}

impl AttackReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn rescore(&mut self) {
        let total = self.ground_truth.len();
        let correct = self
            .ground_truth
            .iter()
            .filter(|(name, &truth)| {
                matches!(
                    (self.recovered_bits.get(*name), truth),
                    (Some(Recovered::Zero), 0) | (Some(Recovered::One), 1)
                )
            })
            .count();
        self.success_rate = (total > 0).then(|| correct as f64 / total as f64);
    }

    pub fn all_unknown(&self) -> bool {
        self.recovered_bits
            .values()
            .all(|r| *r == Recovered::Unknown)
    }
}

#[derive(Debug, Default)]
struct ToffoliFinding {
    wires: [usize; 3],
    a: bool,
    c: bool,
    f: bool,
}

fn parse_gate(text: &str) -> Option<(String, Vec<usize>)> {
    let mut words = text.split_whitespace();
    let name = words.next()?.to_string();
    let targets = words
        .map(|w| w.parse().ok())
        .collect::<Option<Vec<usize>>>()?;
    Some((name, targets))
}

fn ground_truth_bits(ground_truth: &[ToffoliKeys]) -> BTreeMap<String, u8> {
    let mut bits = BTreeMap::new();
    for (i, g) in ground_truth.iter().enumerate() {
        bits.insert(format!("t{i}.a"), g.a() as u8);
        bits.insert(format!("t{i}.c"), g.c() as u8);
        bits.insert(format!("t{i}.f"), g.f() as u8);
    }
    bits
}

/// Reads key bits off announced correction rounds.
///
/// After an announced `T c1 c2 t`, the client's corrections follow in a fixed
/// order: `CZ c1 c2` means f=1, `CNOT c2 t` means a=1, `CNOT c1 t` means c=1.
/// A missing correction means the bit is 0. Full-blind transcripts announce
/// nothing, so every bit stays unknown.
pub fn hdqc_attack(t: &Transcript, ground_truth: &[ToffoliKeys]) -> AttackReport {
    let announced: Vec<&RoundRecord> = t
        .rounds
        .iter()
        .filter(|r| r.announced_gate.is_some())
        .collect();
    let mut findings: Vec<ToffoliFinding> = Vec::new();
    let mut recovered_program = Vec::new();
    for r in &announced {
        let text = r.announced_gate.as_deref().unwrap_or_default();
        let Some((name, targets)) = parse_gate(text) else {
            continue;
        };
        match r.announced_role {
            Some(AnnouncedRole::Program) => {
                recovered_program.push(text.to_string());
                if name == "T" && targets.len() == 3 {
                    findings.push(ToffoliFinding {
                        wires: [targets[0], targets[1], targets[2]],
                        ..ToffoliFinding::default()
                    });
                }
            }
            Some(AnnouncedRole::Correction) => {
                let Some(last) = findings.last_mut() else {
                    continue;
                };
                let [c1, c2, tg] = last.wires;
                match (name.as_str(), targets.as_slice()) {
                    ("CZ", [x, y]) if (*x, *y) == (c1, c2) => last.f = true,
                    ("CNOT", [x, y]) if (*x, *y) == (c2, tg) => last.a = true,
                    ("CNOT", [x, y]) if (*x, *y) == (c1, tg) => last.c = true,
                    _ => {}
                }
            }
            None => {}
        }
    }

    let ground = ground_truth_bits(ground_truth);
    let mut recovered_bits = BTreeMap::new();
    for i in 0..ground_truth.len() {
        let found = findings.get(i);
        for (bit, value) in [
            ("a", found.map(|f| f.a)),
            ("c", found.map(|f| f.c)),
            ("f", found.map(|f| f.f)),
        ] {
            recovered_bits.insert(
                format!("t{i}.{bit}"),
                value.map_or(Recovered::Unknown, Recovered::from),
            );
        }
    }
    let gates_announced = !announced.is_empty();
    let note = match (gates_announced, ground_truth.is_empty()) {
        (true, true) => {
            "gates were announced (half-blind computation); no Toffoli key bits to recover"
        }
        (true, false) => "gates were announced; Toffoli key bits read from announced corrections",
        (false, true) => "no announcements and no Toffoli gates",
        (false, false) => "no announcements; every round ran the same fixed op tuple",
    };
    let mut report = AttackReport {
        mode: t.mode,
        gates_announced,
        recovered_program,
        recovered_bits,
        ground_truth: ground,
        success_rate: None,
        guessed: false,
        note: note.to_string(),
    };
    report.rescore();
    report
}

/// Replaces every unknown bit with a fair coin flip and rescores.
pub fn forced_guess<R: Rng + ?Sized>(report: &AttackReport, rng: &mut R) -> AttackReport {
    let mut out = report.clone();
    for v in out.recovered_bits.values_mut() {
        if *v == Recovered::Unknown {
            *v = Recovered::from(rng.random::<bool>());
        }
    }
    out.guessed = true;
    out.rescore();
    out
}
