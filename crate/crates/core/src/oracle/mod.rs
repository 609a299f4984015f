//! Exact-diagonalization references for the Gaussian pipeline.

pub mod ed;
pub mod negativity;
pub mod pauli;
pub mod sparse;

pub use ed::{
    covariance_of, fermion_ed_ground, oracle_context, rdm_spectrum, reduced_density_matrix, shannon, spin_ed_ground,
    DenseState, EdGround, SectorGround, ORACLE_DIGITS,
};
pub use negativity::{dense_negativity, gaussian_density_matrix};
pub use pauli::PauliString;
pub use sparse::CVector;
