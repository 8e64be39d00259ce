//! Transformed bilateral tensor low-rank representation (TBTLRR) for
//! subspace clustering.
//!
//! The crate is layered bottom-up:
//!
//! - [`tensor`], [`transform`], [`algebra`], [`tsvd`]: dense third-order
//!   tensors and the transform-domain algebra (T-product, transformed t-SVD,
//!   transformed tensor nuclear norm, data-adaptive transform learning).
//! - [`prox`]: closed-form proximal operators (singular value thresholding,
//!   half-thresholding, soft-thresholding, Frobenius shrinkage).
//! - [`solver`]: the ADMM solver for the bilateral model with its dictionary
//!   construction and optional robust-PCA denoising.
//! - [`cluster`]: affinity fusion, spectral clustering, ACC/NMI and noise
//!   injection.
//! - [`harness`]: synthetic data, end-to-end pipeline, grid search and noise
//!   sweeps with CSV reporting.
//! - [`io`]: the `T3B` binary tensor format and label CSVs.

pub mod algebra;
pub mod cluster;
pub mod error;
pub mod harness;
pub mod io;
pub mod prox;
pub mod random;
pub mod solver;
pub mod tensor;
pub mod transform;
pub mod tsvd;

pub use error::{Error, Result};
pub use tensor::{norms, Norms, Tensor3};
pub use transform::{apply_transform, inverse_transform, learn_transform, OrthoTransform, TransformKind};
