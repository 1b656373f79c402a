//! Matrix-free linear operators.
//!
//! Everything the solvers touch — dense matrices, the structurally random
//! sensing operator, transform bases, composites `A = Phi * Psi`, and
//! support-masked `A * W_S` — implements [`LinearOperator`]: an `M x N` map
//! exposing forward and adjoint application plus an analytic bound on the
//! auxiliary storage one application needs. Operators are immutable after
//! construction and safe to share across threads.

mod srm;

pub use srm::{SrmConfig, SrmOperator, SrmSpec, TransformKind};

use crate::dense::DenseMatrix;
use crate::transforms::{DctPlan, TransformError};
use thiserror::Error;

/// Errors raised while constructing operators and support sets.
#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("operator must have at least one row and one column")]
    EmptyOperator,
    #[error("inner dimensions do not match: left has {left_cols} columns, right has {right_rows} rows")]
    InnerDimensionMismatch { left_cols: usize, right_rows: usize },
    #[error("support has ambient dimension {support_n} but the operator has {cols} columns")]
    SupportMismatch { support_n: usize, cols: usize },
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("index {0} already present in support")]
    DuplicateIndex(usize),
    #[error("measurement count {m} must satisfy 1 <= M <= N = {n}")]
    BadMeasurementCount { m: usize, n: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// An `M x N` real linear map applied matrix-free.
///
/// Implementations must be linear, map zero to zero exactly, and satisfy the
/// adjoint identity `<forward(x), y> = <x, adjoint(y)>` for all `x`, `y`.
pub trait LinearOperator: Send + Sync {
    /// Output dimension M.
    fn rows(&self) -> usize;

    /// Input dimension N.
    fn cols(&self) -> usize;

    /// Applies the operator; `x` must have length N. Panics on mismatch.
    fn forward(&self, x: &[f64]) -> Vec<f64>;

    /// Applies the transpose; `y` must have length M. Panics on mismatch.
    fn adjoint(&self, y: &[f64]) -> Vec<f64>;

    /// Analytic upper bound (bytes) on auxiliary storage one application
    /// needs, including operator-owned tables and per-call scratch.
    fn workspace_bytes(&self) -> usize;

    /// Applies the support-weighted normal-equation map
    /// `W_S Aᵀ A W_S` to `x`, writing a full-length result that is zero off
    /// the support. Implementations may exploit structure but must agree
    /// with the default mask-forward-adjoint-mask composition up to
    /// floating-point rounding.
    fn masked_normal_apply(&self, s: &SupportSet, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(s.ambient_len(), self.cols());
        let masked = s.mask(x);
        let fwd = self.forward(&masked);
        let adj = self.adjoint(&fwd);
        s.mask_into(&adj, out);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (**self).forward(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        (**self).adjoint(y)
    }
    fn workspace_bytes(&self) -> usize {
        (**self).workspace_bytes()
    }
    fn masked_normal_apply(&self, s: &SupportSet, x: &[f64], out: &mut [f64]) {
        (**self).masked_normal_apply(s, x, out)
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Box<T> {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (**self).forward(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        (**self).adjoint(y)
    }
    fn workspace_bytes(&self) -> usize {
        (**self).workspace_bytes()
    }
    fn masked_normal_apply(&self, s: &SupportSet, x: &[f64], out: &mut [f64]) {
        (**self).masked_normal_apply(s, x, out)
    }
}

/// An ordered set of distinct indices in `[0, N)` together with its induced
/// 0/1 diagonal weight mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<usize>,
    member: Vec<bool>,
}

impl SupportSet {
    /// Builds a support from `indices` over ambient dimension `n`.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self, OperatorError> {
        let mut s = Self::empty(n);
        for j in indices {
            s.insert(j)?;
        }
        Ok(s)
    }

    pub fn empty(n: usize) -> Self {
        Self {
            indices: Vec::new(),
            member: vec![false; n],
        }
    }

    /// The full support `{0, .., n-1}` (mask `W = I`).
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            member: vec![true; n],
        }
    }

    /// Ambient dimension N.
    pub fn ambient_len(&self) -> usize {
        self.member.len()
    }

    /// Number of selected indices.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Selected indices in insertion order.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, j: usize) -> bool {
        j < self.member.len() && self.member[j]
    }

    /// Appends an index; duplicates and out-of-range indices are errors.
    pub fn insert(&mut self, j: usize) -> Result<(), OperatorError> {
        if j >= self.member.len() {
            return Err(OperatorError::IndexOutOfRange {
                index: j,
                n: self.member.len(),
            });
        }
        if self.member[j] {
            return Err(OperatorError::DuplicateIndex(j));
        }
        self.member[j] = true;
        self.indices.push(j);
        Ok(())
    }

    /// The diagonal of `W_S`: 1 on the support, 0 elsewhere.
    pub fn weights(&self) -> Vec<f64> {
        self.member.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
    }

    /// `W_S x`: keeps entries on the support, zeroes the rest.
    pub fn mask(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.mask_into(x, &mut out);
        out
    }

    /// Writes `W_S x` into `out` (fully overwritten).
    pub fn mask_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.member.len(), "mask length mismatch");
        assert_eq!(out.len(), self.member.len(), "mask output length mismatch");
        out.fill(0.0);
        for &j in &self.indices {
            out[j] = x[j];
        }
    }

    /// Zeroes the off-support entries of `x` in place.
    pub fn mask_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.member.len(), "mask length mismatch");
        for (v, &keep) in x.iter_mut().zip(&self.member) {
            if !keep {
                *v = 0.0;
            }
        }
    }
}

/// A dense row-major matrix applied as an operator. The baseline for all
/// matrix-based comparisons; costs the full `8*M*N` bytes it stores.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DenseMatrix,
}

impl DenseOperator {
    pub fn new(matrix: DenseMatrix) -> Self {
        Self { matrix }
    }

    /// Builds from rows; rejects empty or ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, OperatorError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(OperatorError::EmptyOperator);
        }
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        let matrix = DenseMatrix::new(rows.len(), cols, data).expect("validated above");
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

/// Wraps a dense matrix as a [`LinearOperator`].
pub fn dense_operator(matrix: DenseMatrix) -> DenseOperator {
    DenseOperator::new(matrix)
}

impl LinearOperator for DenseOperator {
    fn rows(&self) -> usize {
        self.matrix.rows()
    }
    fn cols(&self) -> usize {
        self.matrix.cols()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.matrix.matvec_transpose(y)
    }
    fn workspace_bytes(&self) -> usize {
        8 * self.matrix.rows() * self.matrix.cols()
    }
}

/// The identity map on `R^n`.
#[derive(Debug, Clone)]
pub struct IdentityOperator {
    n: usize,
}

impl IdentityOperator {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl LinearOperator for IdentityOperator {
    fn rows(&self) -> usize {
        self.n
    }
    fn cols(&self) -> usize {
        self.n
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "identity length mismatch");
        x.to_vec()
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n, "identity length mismatch");
        y.to_vec()
    }
    fn workspace_bytes(&self) -> usize {
        0
    }
}

/// Which way a [`DctOperator`] maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DctDirection {
    /// forward = DCT-II (signal to coefficients)
    Analysis,
    /// forward = DCT-III (coefficients to signal); the usual dictionary `Psi`
    Synthesis,
}

/// The orthonormal DCT basis as an `N x N` operator.
pub struct DctOperator {
    plan: DctPlan,
    direction: DctDirection,
}

impl DctOperator {
    pub fn analysis(n: usize) -> Result<Self, OperatorError> {
        Ok(Self {
            plan: DctPlan::new(n)?,
            direction: DctDirection::Analysis,
        })
    }

    pub fn synthesis(n: usize) -> Result<Self, OperatorError> {
        Ok(Self {
            plan: DctPlan::new(n)?,
            direction: DctDirection::Synthesis,
        })
    }
}

impl LinearOperator for DctOperator {
    fn rows(&self) -> usize {
        self.plan.len()
    }
    fn cols(&self) -> usize {
        self.plan.len()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        match self.direction {
            DctDirection::Analysis => self.plan.forward(x),
            DctDirection::Synthesis => self.plan.inverse(x),
        }
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        // orthonormal: adjoint = inverse
        match self.direction {
            DctDirection::Analysis => self.plan.inverse(y),
            DctDirection::Synthesis => self.plan.forward(y),
        }
    }
    fn workspace_bytes(&self) -> usize {
        self.plan.workspace_bytes() + 16 * self.plan.len()
    }
}

/// Composite `Phi . Psi`; see [`compose`].
pub struct ComposedOperator<P, Q> {
    outer: P,
    inner: Q,
}

/// Composes two operators into `phi . psi` (apply `psi` first).
pub fn compose<P: LinearOperator, Q: LinearOperator>(
    phi: P,
    psi: Q,
) -> Result<ComposedOperator<P, Q>, OperatorError> {
    if phi.cols() != psi.rows() {
        return Err(OperatorError::InnerDimensionMismatch {
            left_cols: phi.cols(),
            right_rows: psi.rows(),
        });
    }
    Ok(ComposedOperator {
        outer: phi,
        inner: psi,
    })
}

impl<P: LinearOperator, Q: LinearOperator> LinearOperator for ComposedOperator<P, Q> {
    fn rows(&self) -> usize {
        self.outer.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.outer.forward(&self.inner.forward(x))
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.inner.adjoint(&self.outer.adjoint(y))
    }
    fn workspace_bytes(&self) -> usize {
        self.outer.workspace_bytes() + self.inner.workspace_bytes() + 8 * self.inner.rows()
    }
}

/// `A . W_S`: masks the input before `A`, masks after `Aᵀ`; see
/// [`weighted_operator`].
pub struct WeightedOperator<'a> {
    inner: &'a dyn LinearOperator,
    support: &'a SupportSet,
}

/// Builds the support-weighted operator `A W_S` whose least-squares problem
/// matches the classical one on the submatrix `A_S`.
pub fn weighted_operator<'a>(
    a: &'a dyn LinearOperator,
    s: &'a SupportSet,
) -> Result<WeightedOperator<'a>, OperatorError> {
    if s.ambient_len() != a.cols() {
        return Err(OperatorError::SupportMismatch {
            support_n: s.ambient_len(),
            cols: a.cols(),
        });
    }
    Ok(WeightedOperator {
        inner: a,
        support: s,
    })
}

impl LinearOperator for WeightedOperator<'_> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }
    fn cols(&self) -> usize {
        self.inner.cols()
    }
    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.inner.forward(&self.support.mask(x))
    }
    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut adj = self.inner.adjoint(y);
        self.support.mask_in_place(&mut adj);
        adj
    }
    fn workspace_bytes(&self) -> usize {
        self.inner.workspace_bytes() + 8 * self.inner.cols()
    }
}

#[cfg(test)]
mod tests;
