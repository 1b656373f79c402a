//! Fast orthonormal transform kernels and index-space primitives.
//!
//! Provides the building blocks of the structurally random sensing operator:
//! an orthonormal DCT-II/DCT-III pair computed through a real FFT in
//! O(N log N), plus O(N) permutation and subsample/scatter operations.

mod dct;

pub use dct::{dct_forward, dct_inverse, DctPlan};
pub(crate) use dct::{makhoul_position, DctScratch};

use thiserror::Error;

/// Errors raised by transform construction and validation.
#[derive(Debug, Error)]
pub enum TransformError {
    #[error("transform length must be at least 1")]
    EmptyInput,
    #[error("permutation of length {0} is not a bijection on [0, {0})")]
    NotABijection(usize),
    #[error("row index {index} out of range for signal length {n}")]
    RowOutOfRange { index: u32, n: usize },
    #[error("duplicate row index {0}")]
    DuplicateRow(u32),
}

/// A bijection on `[0, N)` stored together with its inverse.
///
/// `apply` computes `y[i] = x[perm[i]]`; `apply_inverse` is both the inverse
/// and the adjoint, since permutation matrices are orthogonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    fwd: Vec<u32>,
    inv: Vec<u32>,
}

impl Permutation {
    /// The identity permutation on `[0, n)`.
    pub fn identity(n: usize) -> Self {
        let fwd: Vec<u32> = (0..n as u32).collect();
        Self { inv: fwd.clone(), fwd }
    }

    /// A uniformly random permutation drawn from `rng` (Fisher-Yates).
    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        use rand::seq::SliceRandom;
        let mut fwd: Vec<u32> = (0..n as u32).collect();
        fwd.shuffle(rng);
        Self::from_vec(fwd).expect("shuffled identity is a bijection")
    }

    /// Validates that `fwd` is a bijection on `[0, len)` and builds the inverse.
    pub fn from_vec(fwd: Vec<u32>) -> Result<Self, TransformError> {
        let n = fwd.len();
        let mut inv = vec![u32::MAX; n];
        for (i, &j) in fwd.iter().enumerate() {
            if (j as usize) >= n || inv[j as usize] != u32::MAX {
                return Err(TransformError::NotABijection(n));
            }
            inv[j as usize] = i as u32;
        }
        Ok(Self { fwd, inv })
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    /// `y[i] = x[perm[i]]`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.fwd.len(), "permutation length mismatch");
        self.fwd.iter().map(|&j| x[j as usize]).collect()
    }

    /// Inverse (equivalently adjoint) application: recovers `x` from `apply(x)`.
    pub fn apply_inverse(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.inv.len(), "permutation length mismatch");
        self.inv.iter().map(|&j| y[j as usize]).collect()
    }

    /// Forward index table: `apply(x)[i] = x[table[i]]`.
    pub fn forward_indices(&self) -> &[u32] {
        &self.fwd
    }

    /// Inverse index table.
    pub fn inverse_indices(&self) -> &[u32] {
        &self.inv
    }
}

/// Applies a permutation given as an index table; see [`Permutation::apply`].
pub fn permute(x: &[f64], perm: &Permutation) -> Vec<f64> {
    perm.apply(x)
}

/// Inverse of [`permute`].
pub fn permute_inverse(y: &[f64], perm: &Permutation) -> Vec<f64> {
    perm.apply_inverse(y)
}

/// Checks that `rows` are distinct indices into `[0, n)`.
pub fn validate_rows(rows: &[u32], n: usize) -> Result<(), TransformError> {
    let mut seen = vec![false; n];
    for &r in rows {
        if (r as usize) >= n {
            return Err(TransformError::RowOutOfRange { index: r, n });
        }
        if seen[r as usize] {
            return Err(TransformError::DuplicateRow(r));
        }
        seen[r as usize] = true;
    }
    Ok(())
}

/// Picks the entries of `x` at `rows`: the downsampling operator `D`.
///
/// `rows` must be distinct and in range ([`validate_rows`]); out-of-range
/// indices panic.
pub fn subsample(x: &[f64], rows: &[u32]) -> Vec<f64> {
    rows.iter().map(|&r| x[r as usize]).collect()
}

/// Adjoint of [`subsample`]: places `y` back at `rows`, zero elsewhere.
pub fn scatter(y: &[f64], rows: &[u32], n: usize) -> Vec<f64> {
    assert_eq!(y.len(), rows.len(), "scatter length mismatch");
    debug_assert!(validate_rows(rows, n).is_ok());
    let mut out = vec![0.0; n];
    for (&r, &v) in rows.iter().zip(y) {
        out[r as usize] = v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_permutation_is_noop() {
        let p = Permutation::identity(5);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(p.apply(&x), x.to_vec());
        assert_eq!(p.apply_inverse(&x), x.to_vec());
    }

    #[test]
    fn three_cycle() {
        // perm = (2,0,1) on (a,b,c) -> (c,a,b)
        let p = Permutation::from_vec(vec![2, 0, 1]).unwrap();
        let x = [10.0, 20.0, 30.0];
        let y = p.apply(&x);
        assert_eq!(y, vec![30.0, 10.0, 20.0]);
        assert_eq!(p.apply_inverse(&y), x.to_vec());
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(Permutation::from_vec(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_vec(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn random_permutation_matches_dense_matrix_oracle() {
        let n = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = Permutation::random(n, &mut rng);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();

        // Dense oracle: P[i][perm[i]] = 1, y = P x.
        let mut dense = vec![vec![0.0; n]; n];
        for (i, &j) in p.forward_indices().iter().enumerate() {
            dense[i][j as usize] = 1.0;
        }
        let oracle: Vec<f64> = dense
            .iter()
            .map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum())
            .collect();

        assert_eq!(p.apply(&x), oracle);
        assert_eq!(p.apply_inverse(&p.apply(&x)), x);
    }

    #[test]
    fn subsample_trivial_cases() {
        let x = [9.0, 8.0, 7.0, 6.0];
        assert_eq!(subsample(&x, &[0, 1, 2, 3]), x.to_vec());
        assert_eq!(subsample(&x, &[3]), vec![6.0]);
        assert_eq!(scatter(&[6.0], &[3], 4), vec![0.0, 0.0, 0.0, 6.0]);
    }

    #[test]
    fn scatter_is_adjoint_of_subsample() {
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<u32> = rand::seq::index::sample(&mut rng, n, 17)
            .iter()
            .map(|i| i as u32)
            .collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).cos()).collect();
        let y: Vec<f64> = (0..rows.len()).map(|i| (i as f64) - 5.0).collect();
        let lhs: f64 = subsample(&x, &rows).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(scatter(&y, &rows, n)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-14);
    }

    #[test]
    fn scatter_then_subsample_is_identity_and_projector() {
        let n = 32;
        let rows: Vec<u32> = vec![1, 4, 9, 16, 25];
        let y = [0.5, -1.5, 2.5, -3.5, 4.5];
        assert_eq!(subsample(&scatter(&y, &rows, n), &rows), y.to_vec());

        // scatter . subsample projects onto the selected coordinates
        let x: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let proj = scatter(&subsample(&x, &rows), &rows, n);
        for i in 0..n {
            let expect = if rows.contains(&(i as u32)) { x[i] } else { 0.0 };
            assert_eq!(proj[i], expect);
        }
        // idempotent
        assert_eq!(scatter(&subsample(&proj, &rows), &rows, n), proj);
    }

    #[test]
    fn validate_rows_rejects_bad_input() {
        assert!(matches!(
            validate_rows(&[0, 5], 4),
            Err(TransformError::RowOutOfRange { .. })
        ));
        assert!(matches!(
            validate_rows(&[1, 1], 4),
            Err(TransformError::DuplicateRow(1))
        ));
        assert!(validate_rows(&[3, 1, 0], 4).is_ok());
    }

    #[test]
    #[should_panic]
    fn subsample_out_of_range_panics() {
        subsample(&[1.0, 2.0], &[5]);
    }
}
