//! Dense complex block-matrix kernel.

mod block;
mod dense;
mod spectral;

pub use block::{BlockMatrix, BlockProfile};
pub use dense::{CMatrix, C64, ONE, ZERO};
pub use spectral::{
    default_hermitian_tol, frac_power, hermitian_eig, jacobi_eigh, jacobi_svd, nearest_unitary, op_norm,
    polar, schatten_norm, schatten_quasi_norm, singular_values, support_projection, unitarity_defect,
    BlockEigen, Polar, Svd, HERMITIAN_ABS_TOL, HERMITIAN_REL_TOL, SUPPORT_REL_CUTOFF,
};
pub(crate) use spectral::eig_unchecked;
