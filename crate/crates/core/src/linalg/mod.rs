//! Dense complex linear algebra for qubit registers.

pub mod expm;
pub mod local;
pub mod matrix;
pub mod pauli;
pub mod state;

pub use expm::matrix_exp;
pub use local::{conjugate_local, LocalSupport};
pub use matrix::{kron, kron_all, ComplexMatrix, C64};
pub use pauli::{embed_site, pauli_site, swap_gate, Axis};
pub use state::{
    devectorize, partial_trace, random_orthogonal_pair, random_pure_vector, vectorize, DensityMatrix,
    VectorizedState,
};
