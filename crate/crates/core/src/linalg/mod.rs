//! Dense and sparse linear algebra kernels.

pub mod arnoldi;
pub mod dense;
pub mod eigen;
pub mod sparse;

pub use arnoldi::{max_real_part, rightmost_eigenvalue, ArnoldiOptions, RightmostEstimate};
pub use dense::{dense_factor_solve, qr_factor, DenseMatrix, LuFactors};
pub use eigen::{dense_spectrum, DENSE_SPECTRUM_CAP};
pub use sparse::{factorization_count, sparse_solve, SparseLu, SparseMatrix};
