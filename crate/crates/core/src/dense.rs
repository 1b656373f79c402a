//! Small-scale ground-truth machinery: dense materialization of operators,
//! a QR least-squares solver, and a brute-force sparse recovery oracle.
//! Everything here exists to check the matrix-free path; none of it is on a
//! performance budget.

use itertools::Itertools;
use nalgebra::DMatrix;
use thiserror::Error;

use crate::operators::LinearOperator;

#[derive(Debug, Error)]
pub enum DenseError {
    #[error("matrix must have at least one row and one column")]
    ZeroDimension,
    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("dense storage of {needed} bytes exceeds the budget of {budget} bytes")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("matrix is rank deficient (pivot {pivot} of magnitude {magnitude:.3e})")]
    RankDeficient { pivot: usize, magnitude: f64 },
    #[error("enumeration guard: N = {n}, k = {k} exceeds N <= {max_n}, k <= {max_k}")]
    EnumerationGuard {
        n: usize,
        k: usize,
        max_n: usize,
        max_k: usize,
    },
    #[error("data length {got} does not match {rows} x {cols}")]
    DataLength { rows: usize, cols: usize, got: usize },
}

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, DenseError> {
        if rows == 0 || cols == 0 {
            return Err(DenseError::ZeroDimension);
        }
        if data.len() != rows * cols {
            return Err(DenseError::DataLength {
                rows,
                cols,
                got: data.len(),
            });
        }
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(DenseError::NonFiniteEntry {
                    row: i / cols,
                    col: i % cols,
                });
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, DenseError> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n).expect("n > 0 expected");
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copies column `c` out (row-major storage makes this strided).
    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// Assembles a matrix from equal-length columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, DenseError> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(DenseError::ZeroDimension);
        }
        let rows = columns[0].len();
        let mut m = Self::zeros(rows, columns.len())?;
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "ragged columns");
            for (r, &v) in col.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        Ok(m)
    }

    /// Keeps the named columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, indices.len()).expect("nonempty selection");
        for (c, &j) in indices.iter().enumerate() {
            for r in 0..self.rows {
                out.set(r, c, self.get(r, j));
            }
        }
        out
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        self.data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `x = Aᵀ y`.
    pub fn matvec_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "matvec_transpose length mismatch");
        let mut out = vec![0.0; self.cols];
        for (row, &yi) in self.data.chunks_exact(self.cols).zip(y) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }

    /// `C = A B`.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = DenseMatrix::zeros(self.rows, other.cols).expect("nonzero dims");
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// Default byte budget for dense materialization (256 MB).
pub const DEFAULT_MATERIALIZE_BUDGET: usize = 256 << 20;

/// Builds the dense matrix of any operator column by column via `forward(e_j)`.
pub fn materialize(a: &dyn LinearOperator, budget_bytes: usize) -> Result<DenseMatrix, DenseError> {
    let (m, n) = (a.rows(), a.cols());
    let needed = 8usize.saturating_mul(m).saturating_mul(n);
    if needed > budget_bytes {
        return Err(DenseError::BudgetExceeded {
            needed,
            budget: budget_bytes,
        });
    }
    let mut out = DenseMatrix::zeros(m, n)?;
    let mut basis = vec![0.0; n];
    for j in 0..n {
        basis[j] = 1.0;
        let col = a.forward(&basis);
        basis[j] = 0.0;
        for (r, &v) in col.iter().enumerate() {
            out.set(r, j, v);
        }
    }
    Ok(out)
}

/// Relative pivot threshold below which a QR factor is declared rank
/// deficient.
const RANK_TOL: f64 = 1e-12;

/// Least squares `min ||y - A x||` by Householder QR. Errors on rank
/// deficiency instead of returning a minimum-norm solution.
pub fn lstsq(a: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>, DenseError> {
    assert_eq!(y.len(), a.rows(), "lstsq length mismatch");
    assert!(
        a.rows() >= a.cols(),
        "lstsq expects a tall system (M >= |S|)"
    );
    let na = DMatrix::from_row_slice(a.rows(), a.cols(), a.data());
    let qr = na.qr();
    let r = qr.r();
    let max_pivot = (0..a.cols())
        .map(|i| r[(i, i)].abs())
        .fold(0.0f64, f64::max);
    for i in 0..a.cols() {
        let p = r[(i, i)].abs();
        if p <= RANK_TOL * max_pivot || max_pivot == 0.0 {
            return Err(DenseError::RankDeficient {
                pivot: i,
                magnitude: p,
            });
        }
    }
    let rhs = qr.q().transpose() * DMatrix::from_column_slice(y.len(), 1, y);
    let sol = r
        .solve_upper_triangular(&rhs)
        .expect("pivots checked above");
    Ok(sol.column(0).iter().copied().collect())
}

/// Result of the exhaustive `l0` search.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    /// Lexicographically first support among residual minimizers.
    pub support: Vec<usize>,
    /// Least-squares coefficients on that support.
    pub coefficients: Vec<f64>,
    /// Residual two-norm `||y - A_S x_S||`.
    pub residual_norm: f64,
}

/// Guards keeping the subset enumeration around a second.
pub const BRUTE_FORCE_MAX_N: usize = 24;
pub const BRUTE_FORCE_MAX_K: usize = 4;

/// Exhaustive sparse recovery: tries every k-subset of columns, solves least
/// squares on each, and returns the minimal-residual subset (ties broken
/// lexicographically). The oracle against which greedy pursuits are judged.
pub fn brute_force_sparsest(
    a: &DenseMatrix,
    y: &[f64],
    k: usize,
) -> Result<BruteForceResult, DenseError> {
    assert_eq!(y.len(), a.rows(), "brute force length mismatch");
    if a.cols() > BRUTE_FORCE_MAX_N || k > BRUTE_FORCE_MAX_K {
        return Err(DenseError::EnumerationGuard {
            n: a.cols(),
            k,
            max_n: BRUTE_FORCE_MAX_N,
            max_k: BRUTE_FORCE_MAX_K,
        });
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if k == 0 {
        return Ok(BruteForceResult {
            support: vec![],
            coefficients: vec![],
            residual_norm: norm(y),
        });
    }
    let mut best: Option<BruteForceResult> = None;
    for subset in (0..a.cols()).combinations(k) {
        let sub = a.select_columns(&subset);
        // Rank-deficient subsets cannot beat their rank-`r` sub-subsets,
        // which the enumeration also visits; skip them.
        let Ok(coeffs) = lstsq(&sub, y) else { continue };
        let fitted = sub.matvec(&coeffs);
        let res: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let r = norm(&res);
        let better = match &best {
            None => true,
            Some(b) => r < b.residual_norm && (b.residual_norm - r) > 1e-15 * norm(y),
        };
        if better {
            best = Some(BruteForceResult {
                support: subset,
                coefficients: coeffs,
                residual_norm: r,
            });
        }
    }
    best.ok_or(DenseError::RankDeficient {
        pivot: 0,
        magnitude: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{compose, dense_operator, IdentityOperator, SrmSpec, TransformKind};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::new(
            rows,
            cols,
            (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn materialize_identity() {
        let op = IdentityOperator::new(3);
        let m = materialize(&op, usize::MAX).unwrap();
        assert_eq!(m, DenseMatrix::identity(3));
    }

    #[test]
    fn materialize_respects_budget() {
        let op = IdentityOperator::new(100);
        let err = materialize(&op, 100).unwrap_err();
        assert!(matches!(err, DenseError::BudgetExceeded { .. }));
    }

    #[test]
    fn materialized_operator_matches_forward() {
        let spec = SrmSpec::new(16, 8, 2, TransformKind::Dct, false).unwrap();
        let op = spec.operator();
        let m = materialize(&op, usize::MAX).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let dense = m.matvec(&x);
            let fast = op.forward(&x);
            for (a, b) in dense.iter().zip(&fast) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn composition_materializes_to_product() {
        let phi = dense_operator(random_matrix(4, 6, 1));
        let psi = dense_operator(random_matrix(6, 6, 2));
        let product = phi.matrix().matmul(psi.matrix());
        let composite = compose(&phi, &psi).unwrap();
        let m = materialize(&composite, usize::MAX).unwrap();
        for r in 0..4 {
            for c in 0..6 {
                assert!((m.get(r, c) - product.get(r, c)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lstsq_identity_block() {
        let a = DenseMatrix::new(4, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let x = lstsq(&a, &[7.0, 9.0, 0.0, 0.0]).unwrap();
        assert!((x[0] - 7.0).abs() < 1e-12);
        assert!((x[1] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_residual_orthogonal_to_columns() {
        let a = random_matrix(8, 3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let y: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = lstsq(&a, &y).unwrap();
        let fitted = a.matvec(&x);
        let res: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
        let corr = a.matvec_transpose(&res);
        for c in corr {
            assert!(c.abs() <= 1e-10, "normal equations violated: {c}");
        }
    }

    #[test]
    fn lstsq_detects_duplicate_column() {
        let col = vec![1.0, 2.0, 3.0, 4.0];
        let a = DenseMatrix::from_columns(&[col.clone(), col]).unwrap();
        assert!(matches!(
            lstsq(&a, &[1.0, 0.0, 0.0, 0.0]),
            Err(DenseError::RankDeficient { .. })
        ));
    }

    #[test]
    fn brute_force_identity_case() {
        let a = DenseMatrix::identity(4);
        let r = brute_force_sparsest(&a, &[0.0, 5.0, 0.0, -3.0], 2).unwrap();
        assert_eq!(r.support, vec![1, 3]);
        assert!(r.residual_norm < 1e-12);
    }

    #[test]
    fn brute_force_recovers_planted_support() {
        let a = random_matrix(6, 10, 8);
        let mut y = vec![0.0; 6];
        let truth = [(2usize, 1.5), (7usize, -0.75)];
        for (j, v) in truth {
            for r in 0..6 {
                y[r] += a.get(r, j) * v;
            }
        }
        let res = brute_force_sparsest(&a, &y, 2).unwrap();
        assert_eq!(res.support, vec![2, 7]);
        assert!(res.residual_norm <= 1e-10);
    }

    #[test]
    fn brute_force_k_zero() {
        let a = DenseMatrix::identity(3);
        let y = [3.0, 4.0, 0.0];
        let r = brute_force_sparsest(&a, &y, 0).unwrap();
        assert!(r.support.is_empty());
        assert!((r.residual_norm - 5.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_guard() {
        let a = DenseMatrix::zeros(4, 30).unwrap();
        assert!(matches!(
            brute_force_sparsest(&a, &[0.0; 4], 2),
            Err(DenseError::EnumerationGuard { .. })
        ));
    }
}
