//! Simulator for full-blind delegated private quantum computation.
//!
//! A client holding Pauli-padded qubits delegates gates from
//! {H, P, CZ, CNOT, Toffoli} to a server. In full-blind mode every round sends
//! nine wires through the same fixed op tuple, hiding which gate was wanted;
//! the half-blind mode announces gates and leaks Toffoli key bits through its
//! corrections.
//!
//! - [`qsim`]: dense statevector/density-matrix simulation.
//! - [`pauli_otp`]: the pad, key updates, Toffoli corrections.
//! - [`gateset`]: programs, their text format, direct evaluation.
//! - [`protocol`]: client/server engines and transcripts.
//! - [`blindness`]: server-view checks and the key-recovery attack.
//! - [`cli`]: the `fdqc` command-line front end.

pub mod blindness;
pub mod cli;
pub mod gateset;
pub mod pauli_otp;
pub mod protocol;
pub mod qsim;
