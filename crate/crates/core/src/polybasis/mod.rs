//! Least-orthogonal-interpolation polynomial bases over tensor Chebyshev
//! polynomials.

pub mod chebyshev;
pub mod loi;

pub use chebyshev::{
    block_offset, block_size, chebyshev_1d, chebyshev_tensor_eval, gauss_chebyshev,
    indices_of_degree, indices_up_to, BoundingBox, MultiIndex, TensorTable, MAX_DEGREE,
};
pub use loi::{loi_construct, loi_interpolate, BasisValues, LoiBasis, LoiFunction};
