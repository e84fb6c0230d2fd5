//! Brute-force reference oracles shared by the integration tests.
//!
//! Everything here is built from dense matrices written out from the gate
//! definitions, so it shares no code path with the simulator under test.

#![allow(dead_code)]

use fdqc::pauli_otp::PauliKey;
use fdqc::qsim::{GateKind, Statevector};
use num_complex::Complex64 as C64;

pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    pub dim: usize,
    pub data: Vec<C64>,
}

impl Mat {
    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        Self { dim, data }
    }

    pub fn at(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let dim = self.dim;
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for k in 0..dim {
                let a = self.at(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..dim {
                    data[r * dim + c] += a * other.at(k, c);
                }
            }
        }
        Mat { dim, data }
    }

    /// Product of `ms` read left to right as matrices (so the last one acts first).
    pub fn product(n_qubits: usize, ms: &[Mat]) -> Mat {
        ms.iter().fold(Mat::identity(n_qubits), |acc, m| acc.mul(m))
    }

    pub fn apply(&self, amps: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.at(r, c) * amps[c]).sum())
            .collect()
    }

    pub fn eq_up_to_phase(&self, other: &Mat, tol: f64) -> bool {
        let Some(pivot) =
            (0..self.data.len()).find(|&i| other.data[i].norm() > 0.5 / self.dim as f64)
        else {
            return false;
        };
        let phase = self.data[pivot] / other.data[pivot];
        if (phase.norm() - 1.0).abs() > tol {
            return false;
        }
        self.data
            .iter()
            .zip(&other.data)
            .all(|(a, b)| (a - phase * b).norm() <= tol)
    }
}

fn bit(n: usize, index: usize, q: usize) -> usize {
    (index >> (n - 1 - q)) & 1
}

fn flip(n: usize, index: usize, q: usize) -> usize {
    index ^ (1 << (n - 1 - q))
}

/// Dense matrix of a gate on an `n`-qubit register; wire 0 is the most
/// significant bit.
pub fn gate(n: usize, kind: GateKind, t: &[usize]) -> Mat {
    let dim = 1 << n;
    let mut m = Mat {
        dim,
        data: vec![ZERO; dim * dim],
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        let mut put = |out: usize, amp: C64| m.data[out * dim + j] += amp;
        match kind {
            GateKind::X => put(flip(n, j, t[0]), ONE),
            GateKind::Z => put(j, if bit(n, j, t[0]) == 1 { -ONE } else { ONE }),
            GateKind::H => {
                let b = bit(n, j, t[0]);
                let j0 = j & !(1 << (n - 1 - t[0]));
                let j1 = j0 | (1 << (n - 1 - t[0]));
                put(j0, C64::new(s, 0.0));
                put(j1, C64::new(if b == 1 { -s } else { s }, 0.0));
            }
            GateKind::P => put(j, if bit(n, j, t[0]) == 1 { I } else { ONE }),
            GateKind::Cz => put(
                j,
                if bit(n, j, t[0]) & bit(n, j, t[1]) == 1 {
                    -ONE
                } else {
                    ONE
                },
            ),
            GateKind::Cnot => put(
                if bit(n, j, t[0]) == 1 {
                    flip(n, j, t[1])
                } else {
                    j
                },
                ONE,
            ),
            GateKind::Toffoli => put(
                if bit(n, j, t[0]) & bit(n, j, t[1]) == 1 {
                    flip(n, j, t[2])
                } else {
                    j
                },
                ONE,
            ),
        }
    }
    m
}

/// `X^x Z^z` on wire `q` when the flags are set.
pub fn pad1(n: usize, q: usize, k: PauliKey) -> Mat {
    let mut m = Mat::identity(n);
    if k.x {
        m = m.mul(&gate(n, GateKind::X, &[q]));
    }
    if k.z {
        m = m.mul(&gate(n, GateKind::Z, &[q]));
    }
    m
}

/// `⊗_q X^{x_q} Z^{z_q}` on wires `0..keys.len()`.
pub fn pad(n: usize, keys: &[PauliKey]) -> Mat {
    keys.iter()
        .enumerate()
        .fold(Mat::identity(n), |acc, (q, &k)| acc.mul(&pad1(n, q, k)))
}

pub fn keys_from_code(arity: usize, code: usize) -> Vec<PauliKey> {
    (0..arity)
        .map(|j| PauliKey::from_index(code >> (2 * j) & 3))
        .collect()
}

/// A correction-free or corrected key update found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleUpdate {
    pub new_keys: Vec<PauliKey>,
    /// `(kind, targets)` chosen from the candidate correction set.
    pub corrections: Vec<(GateKind, Vec<usize>)>,
}

fn toffoli_candidates() -> Vec<(GateKind, Vec<usize>)> {
    vec![
        (GateKind::Cz, vec![0, 1]),
        (GateKind::Cnot, vec![1, 2]),
        (GateKind::Cnot, vec![0, 2]),
    ]
}

/// All `(C, k')` with `C · G · E(k) ∝ E(k') · G`, where `C` ranges over
/// subsets of the candidate corrections (only the empty set for gates other
/// than Toffoli). Solutions are listed smallest correction set first.
pub fn oracle_key_updates(kind: GateKind, keys: &[PauliKey]) -> Vec<OracleUpdate> {
    let n = kind.arity();
    let targets: Vec<usize> = (0..n).collect();
    let g = gate(n, kind, &targets);
    let lhs_core = g.mul(&pad(n, keys));
    let candidates = if kind == GateKind::Toffoli {
        toffoli_candidates()
    } else {
        Vec::new()
    };
    let mut subsets: Vec<usize> = (0..1usize << candidates.len()).collect();
    subsets.sort_by_key(|m| m.count_ones());
    let mut found = Vec::new();
    for mask in subsets {
        let chosen: Vec<(GateKind, Vec<usize>)> = candidates
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, c)| c.clone())
            .collect();
        let c = chosen
            .iter()
            .fold(Mat::identity(n), |acc, (k, t)| acc.mul(&gate(n, *k, t)));
        let lhs = c.mul(&lhs_core);
        for code in 0..1usize << (2 * n) {
            let nk = keys_from_code(n, code);
            if lhs.eq_up_to_phase(&pad(n, &nk).mul(&g), 1e-10) {
                found.push(OracleUpdate {
                    new_keys: nk,
                    corrections: chosen.clone(),
                });
            }
        }
    }
    found
}

pub fn state_of(amps: Vec<C64>) -> Statevector {
    Statevector::from_amplitudes(amps).expect("normalized")
}
