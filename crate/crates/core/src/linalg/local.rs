//! Applying few-qubit operators to register-sized matrices without
//! materializing the full `2^n x 2^n` embedding.

use crate::error::{Error, Result};

use super::matrix::{ComplexMatrix, ZERO};

/// Index layout of a `k`-qubit operator inside an `n`-qubit register.
#[derive(Clone, Debug)]
pub struct LocalSupport {
    /// Register indices whose target bits are all zero.
    bases: Vec<usize>,
    /// Offset of local basis state `l` relative to a base index.
    offsets: Vec<usize>,
}

impl LocalSupport {
    /// `qubits[0]` is the most significant bit of the local index, matching
    /// the kron order `op(q0 ⊗ q1 ⊗ …)`.
    pub fn new(qubits: &[usize], n_qubits: usize) -> Result<Self> {
        if qubits.is_empty() {
            return Err(Error::InvalidArgument("local operator needs at least one qubit".into()));
        }
        let mut seen = 0usize;
        for &q in qubits {
            if q >= n_qubits {
                return Err(Error::InvalidArgument(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            let bit = 1 << (n_qubits - 1 - q);
            if seen & bit != 0 {
                return Err(Error::InvalidArgument(format!("qubit {q} repeated")));
            }
            seen |= bit;
        }
        let k = qubits.len();
        let offsets = (0..1usize << k)
            .map(|l| {
                qubits.iter().enumerate().fold(0, |acc, (t, &q)| {
                    if (l >> (k - 1 - t)) & 1 == 1 {
                        acc | 1 << (n_qubits - 1 - q)
                    } else {
                        acc
                    }
                })
            })
            .collect();
        let bases = (0..1usize << n_qubits).filter(|i| i & seen == 0).collect();
        Ok(Self { bases, offsets })
    }

    pub fn local_dim(&self) -> usize {
        self.offsets.len()
    }

    /// Computes `op · m · op^dagger`.
    pub fn conjugate(&self, m: &ComplexMatrix, op: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.left_multiply(m, op);
        self.right_multiply_adjoint(&mut out, op);
        out
    }

    fn left_multiply(&self, m: &ComplexMatrix, op: &ComplexMatrix) -> ComplexMatrix {
        let ld = self.local_dim();
        assert_eq!(op.rows(), ld);
        let cols = m.cols();
        let mut out = ComplexMatrix::zeros(m.rows(), cols);
        let src = m.as_slice();
        let dst = out.as_mut_slice();
        let opd = op.as_slice();
        for &base in &self.bases {
            for l in 0..ld {
                let row_out = (base + self.offsets[l]) * cols;
                for (mi, &off) in self.offsets.iter().enumerate() {
                    let coeff = opd[l * ld + mi];
                    if coeff == ZERO {
                        continue;
                    }
                    let row_in = (base + off) * cols;
                    for c in 0..cols {
                        dst[row_out + c] += coeff * src[row_in + c];
                    }
                }
            }
        }
        out
    }

    fn right_multiply_adjoint(&self, m: &mut ComplexMatrix, op: &ComplexMatrix) {
        let ld = self.local_dim();
        let cols = m.cols();
        let opd = op.as_slice();
        let mut gathered = vec![ZERO; ld];
        let data = m.as_mut_slice();
        for row in data.chunks_exact_mut(cols) {
            for &base in &self.bases {
                for (l, g) in gathered.iter_mut().enumerate() {
                    *g = row[base + self.offsets[l]];
                }
                for l in 0..ld {
                    let mut acc = ZERO;
                    for (mi, g) in gathered.iter().enumerate() {
                        acc += g * opd[l * ld + mi].conj();
                    }
                    row[base + self.offsets[l]] = acc;
                }
            }
        }
    }
}

/// `op · m · op^dagger` with `op` acting on `qubits` of an `n_qubits` register.
pub fn conjugate_local(
    m: &ComplexMatrix,
    op: &ComplexMatrix,
    qubits: &[usize],
    n_qubits: usize,
) -> Result<ComplexMatrix> {
    if m.rows() != 1 << n_qubits || !m.is_square() {
        return Err(Error::Dimension(format!("{}x{} matrix on {n_qubits} qubits", m.rows(), m.cols())));
    }
    let support = LocalSupport::new(qubits, n_qubits)?;
    if op.rows() != support.local_dim() || !op.is_square() {
        return Err(Error::Dimension(format!("{}x{} operator on {} qubits", op.rows(), op.cols(), qubits.len())));
    }
    Ok(support.conjugate(m, op))
}

/// Applies the Kraus channel `sum_m K_m · rho · K_m^dagger` locally.
pub fn apply_local_kraus(m: &ComplexMatrix, kraus: &[ComplexMatrix], support: &LocalSupport) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for k in kraus {
        out += &support.conjugate(m, k);
    }
    out
}
