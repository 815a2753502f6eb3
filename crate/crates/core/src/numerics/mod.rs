//! Numerical kernels shared by the signal model, sampler and receiver.

mod linalg;
mod optimize;
mod special;

pub mod seed;

pub use linalg::{solve_ls, LeastSquaresSolution, Matrix, DEFAULT_COND_CAP};
pub use optimize::golden_section_max;
pub use special::q_function;
