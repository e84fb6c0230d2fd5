//! Dense statevector and density-matrix simulation.
//!
//! Wire 0 is the most significant bit of a basis index, so `|q0 q1 ... q(n-1)>`
//! reads left to right like the wires of a circuit diagram, top to bottom.

use std::fmt;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Tolerance used for every amplitude and density-matrix comparison.
pub const TOL: f64 = 1e-10;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("basis index {index} out of range for {n_qubits} qubit(s)")]
    IndexOutOfRange { n_qubits: usize, index: usize },
    #[error("a state needs at least one qubit")]
    NoQubits,
    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("{kind} takes {expected} target(s), got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("duplicate target wire {0}")]
    DuplicateTarget(usize),
    #[error("wire {wire} out of range for {n_qubits} qubit(s)")]
    WireOutOfRange { wire: usize, n_qubits: usize },
    #[error("dimension mismatch: {0} vs {1} qubit(s)")]
    DimensionMismatch(usize, usize),
    #[error("weights must be non-negative and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("expected {expected} weight(s), got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("empty state list")]
    NoStates,
    #[error("invalid keep set {0:?}")]
    InvalidKeep(Vec<usize>),
    #[error("invalid qubit permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("state does not factor as a product over the first {0} qubit(s)")]
    NotProduct(usize),
}

/// The closed set of gates the simulator knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    X,
    Z,
    H,
    P,
    Cz,
    Cnot,
    Toffoli,
}

impl GateKind {
    pub const ALL: [GateKind; 7] = [
        GateKind::X,
        GateKind::Z,
        GateKind::H,
        GateKind::P,
        GateKind::Cz,
        GateKind::Cnot,
        GateKind::Toffoli,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::X | GateKind::Z | GateKind::H | GateKind::P => 1,
            GateKind::Cz | GateKind::Cnot => 2,
            GateKind::Toffoli => 3,
        }
    }

    /// Mnemonic used in program text and transcripts.
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::P => "P",
            GateKind::Cz => "CZ",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "T",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        GateKind::ALL.into_iter().find(|k| k.mnemonic() == s)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

/// A gate together with the wires it acts on.
///
/// CNOT targets are `(control, target)`; Toffoli targets are
/// `(control1, control2, target)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GateOp {
    kind: GateKind,
    targets: Vec<usize>,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self, QsimError> {
        if targets.len() != kind.arity() {
            return Err(QsimError::Arity {
                kind,
                expected: kind.arity(),
                got: targets.len(),
            });
        }
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(QsimError::DuplicateTarget(*t));
            }
        }
        Ok(Self { kind, targets })
    }

    pub fn x(q: usize) -> Self {
        Self {
            kind: GateKind::X,
            targets: vec![q],
        }
    }

    pub fn z(q: usize) -> Self {
        Self {
            kind: GateKind::Z,
            targets: vec![q],
        }
    }

    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::H,
            targets: vec![q],
        }
    }

    pub fn p(q: usize) -> Self {
        Self {
            kind: GateKind::P,
            targets: vec![q],
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, vec![a, b]).expect("CZ on distinct wires")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cnot, vec![control, target]).expect("CNOT on distinct wires")
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Self::new(GateKind::Toffoli, vec![c1, c2, target]).expect("Toffoli on distinct wires")
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// The same gate with every target `t` replaced by `map[t]`.
    pub fn remap(&self, map: &[usize]) -> Result<Self, QsimError> {
        let targets = self
            .targets
            .iter()
            .map(|&t| {
                map.get(t).copied().ok_or(QsimError::WireOutOfRange {
                    wire: t,
                    n_qubits: map.len(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(self.kind, targets)
    }

    fn check_width(&self, n_qubits: usize) -> Result<(), QsimError> {
        match self.targets.iter().find(|&&t| t >= n_qubits) {
            Some(&wire) => Err(QsimError::WireOutOfRange { wire, n_qubits }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.mnemonic())?;
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

fn check_qubits(n_qubits: usize) -> Result<(), QsimError> {
    if n_qubits == 0 {
        Err(QsimError::NoQubits)
    } else {
        Ok(())
    }
}

/// A pure state on `n_qubits` wires stored as `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self, QsimError> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(QsimError::IndexOutOfRange { n_qubits, index });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// `|0...0>` on `n_qubits` wires.
    pub fn zero(n_qubits: usize) -> Result<Self, QsimError> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self, QsimError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QsimError::NotPowerOfTwo(len));
        }
        let norm_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sqr - 1.0).abs() > TOL {
            return Err(QsimError::NotNormalized(norm_sqr));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Normalizes `Σ c_k |ψ_k>`.
    pub fn superpose(terms: &[(C64, &Statevector)]) -> Result<Self, QsimError> {
        let first = terms.first().ok_or(QsimError::NoStates)?.1;
        let mut amps = vec![C64::new(0.0, 0.0); first.amps.len()];
        for (c, s) in terms {
            if s.n_qubits != first.n_qubits {
                return Err(QsimError::DimensionMismatch(first.n_qubits, s.n_qubits));
            }
            for (acc, a) in amps.iter_mut().zip(&s.amps) {
                *acc += c * a;
            }
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < TOL {
            return Err(QsimError::NotNormalized(0.0));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(amps)
    }

    /// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
    pub fn random_haar<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Result<Self, QsimError> {
        check_qubits(n_qubits)?;
        let mut amps: Vec<C64> = (0..1usize << n_qubits)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Result<C64, QsimError> {
        if self.n_qubits != other.n_qubits {
            return Err(QsimError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64, QsimError> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// Copy with the global phase fixed so the largest amplitude (first on
    /// ties) is real and positive.
    pub fn phase_normalized(&self) -> Self {
        let mut best = 0;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() > self.amps[best].norm() + 1e-12 {
                best = i;
            }
        }
        let pivot = self.amps[best];
        self.scaled(pivot.conj() / pivot.norm())
    }

    pub fn apply(&self, op: &GateOp) -> Result<Self, QsimError> {
        let mut out = self.clone();
        out.apply_in_place(op)?;
        Ok(out)
    }

    pub fn apply_all<'a, I>(&self, ops: I) -> Result<Self, QsimError>
    where
        I: IntoIterator<Item = &'a GateOp>,
    {
        let mut out = self.clone();
        for op in ops {
            out.apply_in_place(op)?;
        }
        Ok(out)
    }

    pub fn apply_in_place(&mut self, op: &GateOp) -> Result<(), QsimError> {
        op.check_width(self.n_qubits)?;
        let mask = |w: usize| 1usize << (self.n_qubits - 1 - w);
        let t = &op.targets;
        match op.kind {
            GateKind::X => {
                let m = mask(t[0]);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        self.amps.swap(i, i | m);
                    }
                }
            }
            GateKind::Z => {
                let m = mask(t[0]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            GateKind::P => {
                let m = mask(t[0]);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a *= C64::i();
                    }
                }
            }
            GateKind::H => {
                let m = mask(t[0]);
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a0, a1) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a0 + a1) * FRAC_1_SQRT_2;
                        self.amps[i | m] = (a0 - a1) * FRAC_1_SQRT_2;
                    }
                }
            }
            GateKind::Cz => {
                let (m0, m1) = (mask(t[0]), mask(t[1]));
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m0 != 0 && i & m1 != 0 {
                        *a = -*a;
                    }
                }
            }
            GateKind::Cnot => {
                let (mc, mt) = (mask(t[0]), mask(t[1]));
                for i in 0..self.amps.len() {
                    if i & mc != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
            GateKind::Toffoli => {
                let (m0, m1, mt) = (mask(t[0]), mask(t[1]), mask(t[2]));
                for i in 0..self.amps.len() {
                    if i & m0 != 0 && i & m1 != 0 && i & mt == 0 {
                        self.amps.swap(i, i | mt);
                    }
                }
            }
        }
        Ok(())
    }

    /// `self ⊗ other`; `other` occupies the trailing wires.
    pub fn tensor(&self, other: &Statevector) -> Self {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            amps,
        }
    }

    /// Moves qubit `q` to wire `dest[q]`.
    pub fn permute_qubits(&self, dest: &[usize]) -> Result<Self, QsimError> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if dest.len() != n
            || dest
                .iter()
                .any(|&d| d >= n || std::mem::replace(&mut seen[d], true))
        {
            return Err(QsimError::InvalidPermutation(dest.to_vec()));
        }
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for (q, &d) in dest.iter().enumerate() {
                if i >> (n - 1 - q) & 1 == 1 {
                    j |= 1 << (n - 1 - d);
                }
            }
            amps[j] = *a;
        }
        Ok(Self { n_qubits: n, amps })
    }

    /// Splits a product state `a ⊗ b` where `a` holds the first `k` wires.
    /// Each factor is returned with an arbitrary global phase.
    pub fn split_product(&self, k: usize) -> Result<(Self, Self), QsimError> {
        if k == 0 || k >= self.n_qubits {
            return Err(QsimError::InvalidKeep((0..k).collect()));
        }
        let rest = self.n_qubits - k;
        let cols = 1usize << rest;
        let row = |r: usize| &self.amps[r * cols..(r + 1) * cols];
        let pivot_row = (0..1usize << k)
            .max_by(|&x, &y| {
                let nx: f64 = row(x).iter().map(|a| a.norm_sqr()).sum();
                let ny: f64 = row(y).iter().map(|a| a.norm_sqr()).sum();
                nx.total_cmp(&ny)
            })
            .expect("non-empty");
        let trailing = normalized(row(pivot_row).to_vec());
        let leading: Vec<C64> = (0..1usize << k)
            .map(|r| {
                row(r)
                    .iter()
                    .zip(&trailing)
                    .map(|(a, b)| b.conj() * a)
                    .sum()
            })
            .collect();
        let leading = normalized(leading);
        let (lead, trail) = (
            Self {
                n_qubits: k,
                amps: leading,
            },
            Self {
                n_qubits: rest,
                amps: trailing,
            },
        );
        if !equal_up_to_global_phase(&lead.tensor(&trail), self, TOL)? {
            return Err(QsimError::NotProduct(k));
        }
        Ok((lead, trail))
    }

    /// Reduced density matrix on `keep` (in the given order) of this pure state.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<DensityMatrix, QsimError> {
        let n = self.n_qubits;
        check_keep(keep, n)?;
        let env: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let dk = 1usize << k;
        let index = |sub: usize, e: usize| {
            let mut full = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                if sub >> (k - 1 - pos) & 1 == 1 {
                    full |= 1 << (n - 1 - q);
                }
            }
            for (pos, &q) in env.iter().enumerate() {
                if e >> (env.len() - 1 - pos) & 1 == 1 {
                    full |= 1 << (n - 1 - q);
                }
            }
            full
        };
        let mut entries = vec![C64::new(0.0, 0.0); dk * dk];
        for e in 0..1usize << env.len() {
            let column: Vec<C64> = (0..dk).map(|s| self.amps[index(s, e)]).collect();
            for i in 0..dk {
                if column[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..dk {
                    entries[i * dk + j] += column[i] * column[j].conj();
                }
            }
        }
        Ok(DensityMatrix {
            n_qubits: k,
            entries,
        })
    }
}

fn normalized(mut amps: Vec<C64>) -> Vec<C64> {
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    amps
}

fn check_keep(keep: &[usize], n_qubits: usize) -> Result<(), QsimError> {
    let bad = keep.is_empty()
        || keep.iter().any(|&q| q >= n_qubits)
        || keep.iter().enumerate().any(|(i, q)| keep[..i].contains(q));
    if bad {
        Err(QsimError::InvalidKeep(keep.to_vec()))
    } else {
        Ok(())
    }
}

/// True iff `s1 = c·s2` for some unit-modulus `c`, judged by `|<s1|s2>| ≥ 1 − tol`.
pub fn equal_up_to_global_phase(
    s1: &Statevector,
    s2: &Statevector,
    tol: f64,
) -> Result<bool, QsimError> {
    Ok(s1.inner(s2)?.norm() >= 1.0 - tol)
}

/// A density operator stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &Statevector) -> Self {
        let dim = state.amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in &state.amps {
            for b in &state.amps {
                entries.push(a * b.conj());
            }
        }
        Self {
            n_qubits: state.n_qubits,
            entries,
        }
    }

    /// `I / 2^n`.
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self, QsimError> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n_qubits, entries })
    }

    /// `Σ w_k |ψ_k><ψ_k|`.
    pub fn mix(states: &[Statevector], weights: &[f64]) -> Result<Self, QsimError> {
        let first = states.first().ok_or(QsimError::NoStates)?;
        if weights.len() != states.len() {
            return Err(QsimError::WeightCount {
                expected: states.len(),
                got: weights.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|&w| w < 0.0) || (sum - 1.0).abs() > TOL {
            return Err(QsimError::BadWeights(sum));
        }
        let dim = first.amps.len();
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for (s, &w) in states.iter().zip(weights) {
            if s.n_qubits != first.n_qubits {
                return Err(QsimError::DimensionMismatch(first.n_qubits, s.n_qubits));
            }
            for (i, a) in s.amps.iter().enumerate() {
                for (j, b) in s.amps.iter().enumerate() {
                    entries[i * dim + j] += w * a * b.conj();
                }
            }
        }
        Ok(Self {
            n_qubits: first.n_qubits,
            entries,
        })
    }

    /// Uniform average of several density matrices of equal width.
    pub fn average(mats: &[DensityMatrix]) -> Result<Self, QsimError> {
        let first = mats.first().ok_or(QsimError::NoStates)?;
        let mut entries = vec![C64::new(0.0, 0.0); first.entries.len()];
        for m in mats {
            if m.n_qubits != first.n_qubits {
                return Err(QsimError::DimensionMismatch(first.n_qubits, m.n_qubits));
            }
            for (acc, e) in entries.iter_mut().zip(&m.entries) {
                *acc += e;
            }
        }
        let scale = 1.0 / mats.len() as f64;
        entries.iter_mut().for_each(|e| *e *= scale);
        Ok(Self {
            n_qubits: first.n_qubits,
            entries,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> Result<f64, QsimError> {
        if self.n_qubits != other.n_qubits {
            return Err(QsimError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }

    /// Hermitian, unit trace, and no eigenvalue below `-tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                if (self.get(i, j) - self.get(j, i).conj()).norm() > tol {
                    return false;
                }
            }
        }
        if (self.trace() - C64::new(1.0, 0.0)).norm() > tol {
            return false;
        }
        let m = nalgebra::DMatrix::from_fn(dim, dim, |i, j| self.get(i, j));
        m.symmetric_eigenvalues().iter().all(|&ev| ev >= -tol)
    }

    /// Reduced state on `keep` (output wires follow the order of `keep`).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix, QsimError> {
        let n = self.n_qubits;
        check_keep(keep, n)?;
        let env: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let k = keep.len();
        let dk = 1usize << k;
        let embed = |sub: usize, e: usize| {
            let mut full = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                if sub >> (k - 1 - pos) & 1 == 1 {
                    full |= 1 << (n - 1 - q);
                }
            }
            for (pos, &q) in env.iter().enumerate() {
                if e >> (env.len() - 1 - pos) & 1 == 1 {
                    full |= 1 << (n - 1 - q);
                }
            }
            full
        };
        let mut entries = vec![C64::new(0.0, 0.0); dk * dk];
        for i in 0..dk {
            for j in 0..dk {
                entries[i * dk + j] = (0..1usize << env.len())
                    .map(|e| self.get(embed(i, e), embed(j, e)))
                    .sum();
            }
        }
        Ok(DensityMatrix {
            n_qubits: k,
            entries,
        })
    }
}

/// Dense `2^n × 2^n` matrix of a gate sequence, built column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n_qubits: usize,
    columns: Vec<Statevector>,
}

impl Operator {
    pub fn of_circuit(n_qubits: usize, ops: &[GateOp]) -> Result<Self, QsimError> {
        check_qubits(n_qubits)?;
        let columns = (0..1usize << n_qubits)
            .map(|i| Statevector::basis_state(n_qubits, i)?.apply_all(ops))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { n_qubits, columns })
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.columns[col].amps[row]
    }

    /// True iff `self = c·other` for one unit-modulus `c` shared by every entry.
    pub fn equal_up_to_global_phase(&self, other: &Operator, tol: f64) -> Result<bool, QsimError> {
        if self.n_qubits != other.n_qubits {
            return Err(QsimError::DimensionMismatch(self.n_qubits, other.n_qubits));
        }
        let dim = (1usize << self.n_qubits) as f64;
        let overlap: C64 = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.inner(b))
            .sum::<Result<C64, _>>()?;
        Ok(overlap.norm() >= dim * (1.0 - tol))
    }
}
