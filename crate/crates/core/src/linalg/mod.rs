//! Arbitrary-precision dense linear algebra.

mod dilog;
mod eigen;
mod funcs;
mod golub_kahan;
mod inverse;
mod matrix;
mod schur;
mod svd;

pub use dilog::dilog;
pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use golub_kahan::{bidiagonal_svd, golub_kahan_svd, Svd};
pub use funcs::{log_fn, matrix_function, sqrt_fn};
pub use inverse::{invert, invert_complex};
pub use matrix::{CMatrix, Matrix, SkewMatrix};
pub use schur::{skew_schur, skew_schur_with, SchurForm};
pub use svd::{one_sided_jacobi, JacobiSvd};
