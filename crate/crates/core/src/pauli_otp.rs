//! Pauli one-time pad: encryption `X^a Z^b`, decryption, and the key updates
//! that let a client decrypt after a server applies a gate to ciphertext.
//!
//! Key updates come from conjugating the pad through each gate. Clifford
//! gates map Paulis to Paulis, so only the keys change. A Toffoli maps some
//! Paulis to Cliffords; those leftovers are returned as CZ/CNOT corrections
//! that must run on the ciphertext after the gate:
//!
//! ```text
//! T (XaZb ⊗ XcZd ⊗ XeZf) = CNOT13^c · CNOT23^a · CZ12^f · P' · T   (up to phase)
//! ```
//!
//! where `P'` is the Pauli with keys `(a, b⊕cf), (c, d⊕af), (e⊕ac, f)`.

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::qsim::{GateKind, GateOp, QsimError, Statevector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OtpError {
    #[error("expected {expected} key(s), got {got}")]
    KeyCount { expected: usize, got: usize },
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

/// One qubit's pad `X^x Z^z`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliKey {
    /// Exponent of X (the `a` bit).
    pub x: bool,
    /// Exponent of Z (the `b` bit).
    pub z: bool,
}

impl PauliKey {
    pub const ZERO: PauliKey = PauliKey { x: false, z: false };

    pub const fn new(x: bool, z: bool) -> Self {
        Self { x, z }
    }

    /// Key from an index in `0..4`; bit 1 is `x`, bit 0 is `z`.
    pub fn from_index(i: usize) -> Self {
        Self::new(i & 2 != 0, i & 1 != 0)
    }

    pub fn index(self) -> usize {
        (self.x as usize) << 1 | self.z as usize
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::new(rng.random(), rng.random())
    }

    pub fn is_zero(self) -> bool {
        !self.x && !self.z
    }
}

impl fmt::Display for PauliKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.x as u8, self.z as u8)
    }
}

/// Keys after a gate plus the corrections that must follow it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyUpdate {
    /// One key per gate target, in target order.
    pub new_keys: Vec<PauliKey>,
    /// Gates on target positions (0 = first target), applied in order after
    /// the gate. Only a Toffoli produces any.
    pub corrections: Vec<GateOp>,
}

impl KeyUpdate {
    /// Corrections with target positions replaced by the gate's actual wires.
    pub fn corrections_on(&self, wires: &[usize]) -> Result<Vec<GateOp>, QsimError> {
        self.corrections.iter().map(|c| c.remap(wires)).collect()
    }
}

/// Source of key-update rules. The protocol engines are generic over it so a
/// broken rule set can be injected in tests.
pub trait KeyRules {
    fn key_update(&self, kind: GateKind, keys: &[PauliKey]) -> Result<KeyUpdate, OtpError>;
}

/// The correct rules, see [`key_update`].
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardRules;

impl KeyRules for StandardRules {
    fn key_update(&self, kind: GateKind, keys: &[PauliKey]) -> Result<KeyUpdate, OtpError> {
        key_update(kind, keys)
    }
}

fn check_keys(keys: &[PauliKey], wires: &[usize]) -> Result<(), OtpError> {
    if keys.len() != wires.len() {
        return Err(OtpError::KeyCount {
            expected: wires.len(),
            got: keys.len(),
        });
    }
    for (i, w) in wires.iter().enumerate() {
        if wires[..i].contains(w) {
            return Err(QsimError::DuplicateTarget(*w).into());
        }
    }
    Ok(())
}

/// Applies `X^x Z^z` to each wire (Z first).
pub fn encrypt(
    state: &Statevector,
    keys: &[PauliKey],
    wires: &[usize],
) -> Result<Statevector, OtpError> {
    check_keys(keys, wires)?;
    let mut out = state.clone();
    for (k, &w) in keys.iter().zip(wires) {
        if k.z {
            out.apply_in_place(&GateOp::z(w))?;
        }
        if k.x {
            out.apply_in_place(&GateOp::x(w))?;
        }
    }
    Ok(out)
}

/// Applies X then Z per wire, undoing [`encrypt`] up to a `(-1)^{xz}` phase.
pub fn decrypt(
    state: &Statevector,
    keys: &[PauliKey],
    wires: &[usize],
) -> Result<Statevector, OtpError> {
    check_keys(keys, wires)?;
    let mut out = state.clone();
    for (k, &w) in keys.iter().zip(wires) {
        if k.x {
            out.apply_in_place(&GateOp::x(w))?;
        }
        if k.z {
            out.apply_in_place(&GateOp::z(w))?;
        }
    }
    Ok(out)
}

/// Keys valid after `kind` acts on ciphertext padded with `keys`, and the
/// corrections needed to reach them.
///
/// For every state `ψ`:
/// `decrypt(corrections(G(encrypt(ψ, keys))), new_keys) = G(ψ)` up to phase.
pub fn key_update(kind: GateKind, keys: &[PauliKey]) -> Result<KeyUpdate, OtpError> {
    if keys.len() != kind.arity() {
        return Err(OtpError::KeyCount {
            expected: kind.arity(),
            got: keys.len(),
        });
    }
    let plain = |new_keys: Vec<PauliKey>| KeyUpdate {
        new_keys,
        corrections: Vec::new(),
    };
    Ok(match kind {
        GateKind::X | GateKind::Z => plain(keys.to_vec()),
        // HX = ZH
        GateKind::H => plain(vec![PauliKey::new(keys[0].z, keys[0].x)]),
        // PX = iXZP
        GateKind::P => plain(vec![PauliKey::new(keys[0].x, keys[0].z ^ keys[0].x)]),
        GateKind::Cz => {
            let (k1, k2) = (keys[0], keys[1]);
            plain(vec![
                PauliKey::new(k1.x, k1.z ^ k2.x),
                PauliKey::new(k2.x, k2.z ^ k1.x),
            ])
        }
        GateKind::Cnot => {
            let (c, t) = (keys[0], keys[1]);
            plain(vec![
                PauliKey::new(c.x, c.z ^ t.z),
                PauliKey::new(t.x ^ c.x, t.z),
            ])
        }
        GateKind::Toffoli => toffoli_update(keys[0], keys[1], keys[2]),
    })
}

fn toffoli_update(k1: PauliKey, k2: PauliKey, k3: PauliKey) -> KeyUpdate {
    let (a, b, c, d, e, f) = (k1.x, k1.z, k2.x, k2.z, k3.x, k3.z);
    let mut corrections = Vec::new();
    if f {
        corrections.push(GateOp::cz(0, 1));
    }
    if a {
        corrections.push(GateOp::cnot(1, 2));
    }
    if c {
        corrections.push(GateOp::cnot(0, 2));
    }
    KeyUpdate {
        new_keys: vec![
            PauliKey::new(a, b ^ (c & f)),
            PauliKey::new(c, d ^ (a & f)),
            PauliKey::new(e ^ (a & c), f),
        ],
        corrections,
    }
}

/// Optimized Toffoli decryption: CZ/CNOT corrections, then the Pauli layer.
///
/// `state` is the ciphertext after the server's Toffoli on `wires`.
pub fn toffoli_decrypt_optimized(
    state: &Statevector,
    keys: &[PauliKey; 3],
    wires: &[usize; 3],
) -> Result<Statevector, OtpError> {
    let update = toffoli_update(keys[0], keys[1], keys[2]);
    let corrected = state.apply_all(&update.corrections_on(wires)?)?;
    decrypt(&corrected, &update.new_keys, wires)
}

/// Correction network of the earlier SWAP-based Toffoli decryption, on target
/// positions: the `CNOT13` correction is routed through the second wire as
/// `SWAP12 · CNOT23 · SWAP12`, each SWAP spelled as three CNOTs.
pub fn toffoli_corrections_unoptimized(keys: &[PauliKey; 3]) -> Vec<GateOp> {
    let [k1, k2, k3] = *keys;
    let swap12 = [GateOp::cnot(0, 1), GateOp::cnot(1, 0), GateOp::cnot(0, 1)];
    let mut ops = Vec::new();
    if k3.z {
        ops.push(GateOp::cz(0, 1));
    }
    if k1.x {
        ops.push(GateOp::cnot(1, 2));
    }
    if k2.x {
        ops.extend(swap12.iter().cloned());
        ops.push(GateOp::cnot(1, 2));
        ops.extend(swap12.iter().cloned());
    }
    ops
}

/// Unoptimized Toffoli decryption with SWAP-routed corrections. Same contract
/// as [`toffoli_decrypt_optimized`].
pub fn toffoli_decrypt_unoptimized(
    state: &Statevector,
    keys: &[PauliKey; 3],
    wires: &[usize; 3],
) -> Result<Statevector, OtpError> {
    let ops = toffoli_corrections_unoptimized(keys)
        .iter()
        .map(|op| op.remap(wires))
        .collect::<Result<Vec<_>, _>>()?;
    let corrected = state.apply_all(&ops)?;
    let update = toffoli_update(keys[0], keys[1], keys[2]);
    decrypt(&corrected, &update.new_keys, wires)
}
