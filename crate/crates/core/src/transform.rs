//! Real orthogonal transforms along the third mode.
//!
//! A transform `T` (an `n3 x n3` orthogonal matrix) acts on every tube of a
//! tensor: the transformed tube at `(i, j)` is `T * b(i, j, :)`. Since the
//! tensor buffer is the column-major `(n1 n2) x n3` matrix `M` of tubes
//! (one row per tube), the forward transform is `M * T^T` and the inverse is
//! `M * T`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Max-abs deviation of `T T^T` from the identity accepted as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Where a transform came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    /// Data-adaptive: left singular vectors of the mode-3 unfolding.
    Learned,
    /// Orthonormal DCT-II.
    Dct,
    Identity,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::Learned => "learned",
            TransformKind::Dct => "dct",
            TransformKind::Identity => "identity",
        })
    }
}

impl FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "learned" => Ok(TransformKind::Learned),
            "dct" => Ok(TransformKind::Dct),
            "identity" => Ok(TransformKind::Identity),
            other => Err(Error::InvalidArgument(format!(
                "unknown transform `{other}` (expected learned, dct or identity)"
            ))),
        }
    }
}

/// An `n3 x n3` real orthogonal matrix together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoTransform {
    matrix: DMatrix<f64>,
    kind: TransformKind,
}

impl OrthoTransform {
    /// Wraps `matrix`, checking that it is square and orthogonal.
    pub fn new(matrix: DMatrix<f64>, kind: TransformKind) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "transform must be a non-empty square matrix, got {:?}",
                matrix.shape()
            )));
        }
        let dev = orthogonality_defect(&matrix);
        if !(dev <= ORTHOGONALITY_TOL) {
            return Err(Error::NotOrthogonal(dev));
        }
        Ok(Self { matrix, kind })
    }

    pub fn identity(n3: usize) -> Self {
        Self {
            matrix: DMatrix::identity(n3, n3),
            kind: TransformKind::Identity,
        }
    }

    /// Orthonormal DCT-II: `T[k, n] = c_k cos(pi (2n + 1) k / (2 n3))`.
    pub fn dct(n3: usize) -> Self {
        let n = n3 as f64;
        let matrix = DMatrix::from_fn(n3, n3, |k, j| {
            let c = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            c * (PI * (2 * j + 1) as f64 * k as f64 / (2.0 * n)).cos()
        });
        Self {
            matrix,
            kind: TransformKind::Dct,
        }
    }

    /// Builds a transform of the requested kind for data `x`.
    pub fn for_data(kind: TransformKind, x: &Tensor3) -> Result<Self> {
        match kind {
            TransformKind::Learned => learn_transform(x),
            TransformKind::Dct => Ok(Self::dct(x.dims().2)),
            TransformKind::Identity => Ok(Self::identity(x.dims().2)),
        }
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    #[inline]
    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    #[inline]
    pub fn n3(&self) -> usize {
        self.matrix.nrows()
    }

    fn check(&self, b: &Tensor3) -> Result<()> {
        if b.dims().2 != self.n3() {
            return Err(Error::Dimension(format!(
                "transform is {n}x{n} but tensor has n3 = {}",
                b.dims().2,
                n = self.n3()
            )));
        }
        Ok(())
    }

    /// Moves `b` into the transform domain.
    pub fn forward(&self, b: &Tensor3) -> Result<Tensor3> {
        self.check(b)?;
        Ok(self.apply_right(b, &self.matrix.transpose()))
    }

    /// Moves `b_bar` back out of the transform domain.
    pub fn inverse(&self, b_bar: &Tensor3) -> Result<Tensor3> {
        self.check(b_bar)?;
        Ok(self.apply_right(b_bar, &self.matrix))
    }

    fn apply_right(&self, b: &Tensor3, right: &DMatrix<f64>) -> Tensor3 {
        if self.kind == TransformKind::Identity {
            return b.clone();
        }
        let out = b.tube_matrix() * right;
        Tensor3::new(b.dims(), out.as_slice().to_vec())
            .expect("orthogonal transform of a finite tensor is finite")
    }
}

/// Max-abs entry of `T T^T - I`.
pub fn orthogonality_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let g = m * m.transpose();
    (g - DMatrix::<f64>::identity(n, n)).amax()
}

/// Applies `t` to every tube of `b`.
pub fn apply_transform(t: &OrthoTransform, b: &Tensor3) -> Result<Tensor3> {
    t.forward(b)
}

/// Applies `t^T` to every tube of `b_bar`.
pub fn inverse_transform(t: &OrthoTransform, b_bar: &Tensor3) -> Result<Tensor3> {
    t.inverse(b_bar)
}

/// Data-adaptive transform: `T = U^T` where `U S V^T` is the SVD of the mode-3
/// unfolding of `x` (row `k` = vectorized frontal slice `k`).
///
/// Left singular vectors are taken from the eigendecomposition of the
/// `n3 x n3` Gram matrix of the unfolding, which yields a full orthogonal
/// basis even when `n3 > n1 n2`. Rows are ordered by decreasing singular
/// value and each row is signed so that its largest-magnitude entry is
/// positive (first such entry on ties, up to 1e-9).
pub fn learn_transform(x: &Tensor3) -> Result<OrthoTransform> {
    if x.max_abs() == 0.0 {
        return Err(Error::Degenerate(
            "cannot learn a transform from an all-zero tensor".into(),
        ));
    }
    let n3 = x.dims().2;
    let tubes = x.tube_matrix();
    let gram = tubes.transpose() * tubes;
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigen("mode-3 Gram matrix".into()))?;

    let mut order: Vec<usize> = (0..n3).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut t = DMatrix::zeros(n3, n3);
    for (row, &col) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(col);
        let mut pivot = 0;
        for idx in 1..n3 {
            // Magnitudes within rounding of each other count as a tie.
            if v[idx].abs() > v[pivot].abs() + 1e-9 {
                pivot = idx;
            }
        }
        let sign = if v[pivot] < 0.0 { -1.0 } else { 1.0 };
        for c in 0..n3 {
            t[(row, c)] = sign * v[c];
        }
    }
    OrthoTransform::new(t, TransformKind::Learned)
}
