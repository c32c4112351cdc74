//! Single-qubit operators and their embedding into multi-qubit registers.
//!
//! Basis convention: `|0>` is the +1 eigenstate of sigma-z and plays the
//! role of the excited state. The lowering operator is `sigma- = |1><0|`,
//! so amplitude damping drives each qubit to the sigma-z = -1 state `|1>`.
//! Site 0 is the leftmost kron factor (most significant index bit).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::matrix::{kron_all, ComplexMatrix, I, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
    /// Raising operator `|0><1|`.
    Plus,
    /// Lowering operator `|1><0|`.
    Minus,
}

impl Axis {
    pub fn matrix(self) -> ComplexMatrix {
        let entries = match self {
            Axis::X => [ZERO, ONE, ONE, ZERO],
            Axis::Y => [ZERO, -I, I, ZERO],
            Axis::Z => [ONE, ZERO, ZERO, -ONE],
            Axis::Plus => [ZERO, ONE, ZERO, ZERO],
            Axis::Minus => [ZERO, ZERO, ONE, ZERO],
        };
        ComplexMatrix::from_vec(2, 2, entries.to_vec()).expect("2x2")
    }

    pub fn is_hermitian(self) -> bool {
        matches!(self, Axis::X | Axis::Y | Axis::Z)
    }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` at `site` in an `n_qubits` register.
pub fn embed_site(op: &ComplexMatrix, site: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    if site >= n_qubits {
        return Err(Error::InvalidArgument(format!(
            "site {site} out of range for {n_qubits} qubits"
        )));
    }
    let id = ComplexMatrix::identity(2);
    Ok(kron_all((0..n_qubits).map(|q| if q == site { op } else { &id })))
}

pub fn pauli_site(axis: Axis, site: usize, n_qubits: usize) -> Result<ComplexMatrix> {
    embed_site(&axis.matrix(), site, n_qubits)
}

/// The two-qubit SWAP gate in the computational basis.
pub fn swap_gate() -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}
