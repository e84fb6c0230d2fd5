//! Delegatable circuit programs and their text format.
//!
//! ```text
//! # comments run to end of line
//! qubits 3
//! H 0
//! P 0
//! CZ 0 1
//! CNOT 0 2        # control target
//! T 0 1 2         # control1 control2 target
//! ```

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::qsim::{GateKind, GateOp, QsimError, Statevector};

/// Gate kinds a client may delegate.
pub const DELEGATABLE: [GateKind; 5] = [
    GateKind::H,
    GateKind::P,
    GateKind::Cz,
    GateKind::Cnot,
    GateKind::Toffoli,
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProgramError {
    #[error("a program needs at least one qubit")]
    NoQubits,
    #[error("gate {0} cannot be delegated")]
    NotDelegatable(GateKind),
    #[error("op {op} targets wire {wire} but the program has {n_qubits} qubit(s)")]
    TargetOutOfRange {
        op: String,
        wire: usize,
        n_qubits: usize,
    },
    #[error("input has {got} qubit(s), program expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("{n_qubits} qubit(s) is too few for {kind}")]
    PoolTooWide { kind: GateKind, n_qubits: usize },
    #[error("empty gate pool")]
    EmptyPool,
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// An ordered list of delegatable gates on `n_qubits` logical wires.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitProgram {
    n_qubits: usize,
    ops: Vec<GateOp>,
}

impl CircuitProgram {
    pub fn new(n_qubits: usize, ops: Vec<GateOp>) -> Result<Self, ProgramError> {
        if n_qubits == 0 {
            return Err(ProgramError::NoQubits);
        }
        for op in &ops {
            if !DELEGATABLE.contains(&op.kind()) {
                return Err(ProgramError::NotDelegatable(op.kind()));
            }
            if let Some(&wire) = op.targets().iter().find(|&&t| t >= n_qubits) {
                return Err(ProgramError::TargetOutOfRange {
                    op: op.to_string(),
                    wire,
                    n_qubits,
                });
            }
        }
        Ok(Self { n_qubits, ops })
    }

    pub fn empty(n_qubits: usize) -> Result<Self, ProgramError> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn toffoli_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| op.kind() == GateKind::Toffoli)
            .count()
    }

    /// Reversed program; P becomes P·P·P, every other gate is self-inverse.
    pub fn inverse(&self) -> Self {
        let mut ops = Vec::with_capacity(self.ops.len());
        for op in self.ops.iter().rev() {
            let copies = if op.kind() == GateKind::P { 3 } else { 1 };
            ops.extend(std::iter::repeat_n(op.clone(), copies));
        }
        Self {
            n_qubits: self.n_qubits,
            ops,
        }
    }

    /// Program text that [`parse_program`] reads back to `self`.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CircuitProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "qubits {}", self.n_qubits)?;
        for op in &self.ops {
            writeln!(f, "{op}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `qubits <N>` header")]
    MissingHeader,
    #[error("malformed header `{0}`")]
    MalformedHeader(String),
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate {gate} is not allowed by the parser options")]
    Disallowed { gate: String },
    #[error("{gate} takes {expected} target(s), got {got}")]
    Arity {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("bad qubit index `{0}`")]
    BadIndex(String),
    #[error("repeated target {0}")]
    RepeatedTarget(usize),
    #[error("qubit {index} out of range for {n_qubits} declared qubit(s)")]
    OutOfRange { index: usize, n_qubits: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept `CZ` lines. When false only {H, P, CNOT, T} parse.
    pub allow_cz: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { allow_cz: true }
    }
}

pub fn parse_program(text: &str) -> Result<CircuitProgram, ParseError> {
    parse_program_with(text, ParseOptions::default())
}

pub fn parse_program_with(text: &str, options: ParseOptions) -> Result<CircuitProgram, ParseError> {
    let mut n_qubits: Option<usize> = None;
    let mut ops = Vec::new();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |kind| ParseError { line, kind };
        let mut words = content.split_whitespace();
        let head = words.next().expect("non-empty line");
        let args: Vec<&str> = words.collect();

        let Some(width) = n_qubits else {
            if head != "qubits" || args.len() != 1 {
                return Err(err(ParseErrorKind::MalformedHeader(content.to_string())));
            }
            match args[0].parse::<usize>() {
                Ok(n) if n >= 1 => n_qubits = Some(n),
                _ => return Err(err(ParseErrorKind::MalformedHeader(content.to_string()))),
            }
            continue;
        };

        let kind = GateKind::from_mnemonic(head)
            .filter(|k| crate::gateset::DELEGATABLE.contains(k))
            .ok_or_else(|| err(ParseErrorKind::UnknownGate(head.to_string())))?;
        if kind == GateKind::Cz && !options.allow_cz {
            return Err(err(ParseErrorKind::Disallowed {
                gate: head.to_string(),
            }));
        }
        if args.len() != kind.arity() {
            return Err(err(ParseErrorKind::Arity {
                gate: head.to_string(),
                expected: kind.arity(),
                got: args.len(),
            }));
        }
        let mut targets = Vec::with_capacity(args.len());
        for a in &args {
            let index: usize = a
                .parse()
                .map_err(|_| err(ParseErrorKind::BadIndex(a.to_string())))?;
            if index >= width {
                return Err(err(ParseErrorKind::OutOfRange {
                    index,
                    n_qubits: width,
                }));
            }
            if targets.contains(&index) {
                return Err(err(ParseErrorKind::RepeatedTarget(index)));
            }
            targets.push(index);
        }
        ops.push(GateOp::new(kind, targets).expect("arity and distinctness checked"));
    }
    let n_qubits = n_qubits.ok_or(ParseError {
        line: last_line.max(1),
        kind: ParseErrorKind::MissingHeader,
    })?;
    Ok(CircuitProgram::new(n_qubits, ops).expect("ops validated while parsing"))
}

/// Applies the program directly, without delegation.
pub fn direct_eval(
    program: &CircuitProgram,
    input: &Statevector,
) -> Result<Statevector, ProgramError> {
    if input.n_qubits() != program.n_qubits {
        return Err(ProgramError::WidthMismatch {
            expected: program.n_qubits,
            got: input.n_qubits(),
        });
    }
    Ok(input.apply_all(&program.ops)?)
}

/// Every `(kind, ordered targets)` combination on `n_qubits` wires.
fn placements(kind: GateKind, n_qubits: usize) -> Vec<GateOp> {
    fn extend(prefix: &mut Vec<usize>, arity: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == arity {
            out.push(prefix.clone());
            return;
        }
        for q in 0..n {
            if !prefix.contains(&q) {
                prefix.push(q);
                extend(prefix, arity, n, out);
                prefix.pop();
            }
        }
    }
    let mut all = Vec::new();
    extend(&mut Vec::new(), kind.arity(), n_qubits, &mut all);
    all.into_iter()
        .map(|t| GateOp::new(kind, t).expect("distinct targets"))
        .collect()
}

/// Seeded random program drawing uniformly over every valid placement of
/// every delegatable kind that fits in `n_qubits`.
pub fn random_program(
    n_qubits: usize,
    length: usize,
    seed: u64,
) -> Result<CircuitProgram, ProgramError> {
    let pool: Vec<GateKind> = DELEGATABLE
        .into_iter()
        .filter(|k| k.arity() <= n_qubits)
        .collect();
    random_program_from_pool(n_qubits, length, seed, &pool)
}

/// Like [`random_program`] with an explicit gate pool.
pub fn random_program_from_pool(
    n_qubits: usize,
    length: usize,
    seed: u64,
    pool: &[GateKind],
) -> Result<CircuitProgram, ProgramError> {
    if n_qubits == 0 {
        return Err(ProgramError::NoQubits);
    }
    if pool.is_empty() {
        return Err(ProgramError::EmptyPool);
    }
    let mut choices = Vec::new();
    for &kind in pool {
        if !DELEGATABLE.contains(&kind) {
            return Err(ProgramError::NotDelegatable(kind));
        }
        if kind.arity() > n_qubits {
            return Err(ProgramError::PoolTooWide { kind, n_qubits });
        }
        choices.extend(placements(kind, n_qubits));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ops = (0..length)
        .map(|_| choices[rng.random_range(0..choices.len())].clone())
        .collect();
    CircuitProgram::new(n_qubits, ops)
}
