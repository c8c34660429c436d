//! Dense linear algebra used by the sparse-basis pipeline.

mod eig;
mod matrix;
mod norms;
mod qr;
mod svd;

pub use eig::{
    asymmetry, symmetric_eig, symmetric_eig_leading, EigOptions, LeadingEigOptions,
    SymmetricEigen,
};
pub use matrix::{DenseMatrix, WeightVector};
pub use norms::{frobenius_norm, frobenius_norm_w, l01_count, l11_norm, l11_norm_w};
pub use qr::{qr_orthonormalize, qr_orthonormalize_w, QrOptions};
pub use svd::{
    matrix_2norm, polar_orthonormal, polar_orthonormal_with, svd_small, Svd, SvdOptions,
    SVD_SMALL_MAX,
};
