//! The structurally random sensing operator `Phi = D F R`.
//!
//! `R` randomly permutes the signal (optionally flipping signs), `F` is an
//! orthonormal fast transform, and `D` keeps M of the N outputs. Forward and
//! adjoint cost O(N log N) time and O(N) storage; the M x N matrix is never
//! materialized.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{LinearOperator, OperatorError, SupportSet};
use crate::transforms::{makhoul_position, validate_rows, DctPlan, Permutation};

/// The orthonormal transform `F` of the sensing operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Dct,
    Identity,
}

/// Seedable description of a structurally random operator.
///
/// Row selection and permutation are deterministic functions of `seed`; only
/// `{n, m, seed, transform, scaled}` travel through config files (see
/// [`SrmConfig`]).
#[derive(Debug, Clone)]
pub struct SrmSpec {
    n: usize,
    m: usize,
    seed: u64,
    transform: TransformKind,
    scaled: bool,
    row_selection: Vec<u32>,
    permutation: Permutation,
    /// `+-1` per input index when sign flipping is enabled.
    signs: Option<Vec<f64>>,
}

impl SrmSpec {
    /// Draws row selection and permutation from `seed`.
    ///
    /// Rows are M indices sampled uniformly without replacement and stored
    /// sorted (the measurement ordering is immaterial; sorted access is
    /// cache-friendly at large N).
    pub fn new(
        n: usize,
        m: usize,
        seed: u64,
        transform: TransformKind,
        scaled: bool,
    ) -> Result<Self, OperatorError> {
        Self::with_options(n, m, seed, transform, scaled, false)
    }

    /// As [`SrmSpec::new`] with the optional random sign-flip randomizer.
    pub fn with_options(
        n: usize,
        m: usize,
        seed: u64,
        transform: TransformKind,
        scaled: bool,
        sign_flip: bool,
    ) -> Result<Self, OperatorError> {
        if n == 0 || m == 0 || m > n {
            return Err(OperatorError::BadMeasurementCount { m, n });
        }
        assert!(n <= u32::MAX as usize, "signal length exceeds u32 indexing");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut row_selection: Vec<u32> = rand::seq::index::sample(&mut rng, n, m)
            .iter()
            .map(|i| i as u32)
            .collect();
        row_selection.sort_unstable();
        let permutation = Permutation::random(n, &mut rng);
        let signs = sign_flip.then(|| {
            (0..n)
                .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
                .collect()
        });
        Ok(Self {
            n,
            m,
            seed,
            transform,
            scaled,
            row_selection,
            permutation,
            signs,
        })
    }

    /// Builds a spec from explicit parts instead of a seed. Specs built this
    /// way do not round-trip through [`SrmConfig`].
    pub fn from_parts(
        n: usize,
        row_selection: Vec<u32>,
        permutation: Permutation,
        transform: TransformKind,
        scaled: bool,
    ) -> Result<Self, OperatorError> {
        let m = row_selection.len();
        if n == 0 || m == 0 || m > n {
            return Err(OperatorError::BadMeasurementCount { m, n });
        }
        if permutation.len() != n {
            return Err(OperatorError::InnerDimensionMismatch {
                left_cols: n,
                right_rows: permutation.len(),
            });
        }
        validate_rows(&row_selection, n)?;
        Ok(Self {
            n,
            m,
            seed: 0,
            transform,
            scaled,
            row_selection,
            permutation,
            signs: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn transform(&self) -> TransformKind {
        self.transform
    }

    pub fn scaled(&self) -> bool {
        self.scaled
    }

    pub fn row_selection(&self) -> &[u32] {
        &self.row_selection
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    /// Plans the transform and returns the applicable operator.
    pub fn operator(self) -> SrmOperator {
        SrmOperator::new(self)
    }
}

/// The serialized form of an [`SrmSpec`]: structure is regenerated from the
/// seed, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SrmConfig {
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub transform: TransformKind,
    pub scaled: bool,
}

impl From<&SrmSpec> for SrmConfig {
    fn from(spec: &SrmSpec) -> Self {
        Self {
            n: spec.n,
            m: spec.m,
            seed: spec.seed,
            transform: spec.transform,
            scaled: spec.scaled,
        }
    }
}

impl TryFrom<SrmConfig> for SrmSpec {
    type Error = OperatorError;

    fn try_from(c: SrmConfig) -> Result<Self, OperatorError> {
        SrmSpec::new(c.n, c.m, c.seed, c.transform, c.scaled)
    }
}

/// Matrix-free application of `Phi = D F R` (and its transpose).
pub struct SrmOperator {
    spec: SrmSpec,
    dct: Option<DctPlan>,
    /// Multiplies forward and adjoint outputs; `sqrt(N/M)` when scaled.
    scale: f64,
    /// Membership bitmap of `row_selection` over `[0, N)`.
    row_member: Vec<bool>,
}

impl SrmOperator {
    pub fn new(spec: SrmSpec) -> Self {
        let dct = match spec.transform {
            TransformKind::Dct => {
                Some(DctPlan::new(spec.n).expect("spec guarantees n >= 1"))
            }
            TransformKind::Identity => None,
        };
        let scale = if spec.scaled {
            (spec.n as f64 / spec.m as f64).sqrt()
        } else {
            1.0
        };
        let mut row_member = vec![false; spec.n];
        for &r in &spec.row_selection {
            row_member[r as usize] = true;
        }
        Self {
            spec,
            dct,
            scale,
            row_member,
        }
    }

    pub fn spec(&self) -> &SrmSpec {
        &self.spec
    }

    /// Randomize `x`: permute and apply the optional sign flips.
    fn randomize(&self, x: &[f64]) -> Vec<f64> {
        let fwd = self.spec.permutation.forward_indices();
        match &self.spec.signs {
            None => fwd.iter().map(|&j| x[j as usize]).collect(),
            Some(s) => fwd
                .iter()
                .map(|&j| s[j as usize] * x[j as usize])
                .collect(),
        }
    }

    /// Adjoint of [`SrmOperator::randomize`].
    fn derandomize(&self, v: &[f64]) -> Vec<f64> {
        let inv = self.spec.permutation.inverse_indices();
        match &self.spec.signs {
            None => inv.iter().map(|&i| v[i as usize]).collect(),
            Some(s) => inv
                .iter()
                .enumerate()
                .map(|(j, &i)| s[j] * v[i as usize])
                .collect(),
        }
    }

    fn input_sign(&self, j: usize) -> f64 {
        match &self.spec.signs {
            None => 1.0,
            Some(s) => s[j],
        }
    }
}

impl LinearOperator for SrmOperator {
    fn rows(&self) -> usize {
        self.spec.m
    }

    fn cols(&self) -> usize {
        self.spec.n
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.spec.n, "SRM forward length mismatch");
        let transformed = match &self.dct {
            Some(plan) => plan.forward(&self.randomize(x)),
            None => self.randomize(x),
        };
        let mut y: Vec<f64> = self
            .spec
            .row_selection
            .iter()
            .map(|&r| transformed[r as usize])
            .collect();
        if self.spec.scaled {
            for v in &mut y {
                *v *= self.scale;
            }
        }
        y
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.spec.m, "SRM adjoint length mismatch");
        let mut padded = vec![0.0; self.spec.n];
        for (&r, &v) in self.spec.row_selection.iter().zip(y) {
            padded[r as usize] = v;
        }
        let back = match &self.dct {
            Some(plan) => plan.inverse(&padded),
            None => padded,
        };
        let mut x = self.derandomize(&back);
        if self.spec.scaled {
            for v in &mut x {
                *v *= self.scale;
            }
        }
        x
    }

    fn workspace_bytes(&self) -> usize {
        let n = self.spec.n;
        let m = self.spec.m;
        let tables = 8 * n                                  // permutation + inverse (u32 each)
            + 4 * m                                         // row selection
            + n                                             // row membership bitmap
            + self.spec.signs.as_ref().map_or(0, |_| 8 * n);
        let plan = self.dct.as_ref().map_or(0, |p| p.workspace_bytes());
        // per-call temporaries: randomized copy, transform output, result
        tables + plan + 8 * (2 * n + m)
    }

    /// `W_S Phiᵀ Phi W_S x` exploiting structure: the support entries are
    /// scattered straight into the transform's reordered input line, the
    /// row selection becomes a bin mask between the two FFT passes, and only
    /// support entries are gathered back out. Identical (up to rounding) to
    /// the default mask-forward-adjoint-mask composition.
    fn masked_normal_apply(&self, s: &SupportSet, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(s.ambient_len(), self.spec.n);
        let plan = match &self.dct {
            Some(plan) => plan,
            None => {
                // Identity transform: Phiᵀ Phi is the 0/1 projection onto
                // indices whose randomized position is a selected row.
                let s2 = self.scale * self.scale;
                out.fill(0.0);
                let inv = self.spec.permutation.inverse_indices();
                for &j in s.indices() {
                    if self.row_member[inv[j] as usize] {
                        out[j] = s2 * x[j];
                    }
                }
                return;
            }
        };
        let n = self.spec.n;
        let half = n / 2;
        let s2 = self.scale * self.scale;
        let inv = self.spec.permutation.inverse_indices();
        plan.with_scratch(|scr| {
            scr.real.fill(0.0);
            for &j in s.indices() {
                let v = self.input_sign(j) * x[j];
                scr.real[makhoul_position(inv[j] as usize, n)] = v;
            }
            plan.run_r2c(scr);
            // One pass builds the row-masked inverse spectrum in place,
            // working with un-normalized DCT bins: the orthonormal scaling
            // of F cancels against its inverse either side of the mask.
            let tw = &plan.twiddle;
            let keep = &self.row_member;
            {
                let spec = &mut scr.spectrum;
                let dc = if keep[0] { spec[0].re } else { 0.0 };
                spec[0] = Complex::new(dc, 0.0);
                let upper = if n % 2 == 0 { half - 1 } else { half };
                for k in 1..=upper {
                    let v = spec[k];
                    let t = tw[k];
                    let low = if keep[k] { t.re * v.re + t.im * v.im } else { 0.0 };
                    let high = if keep[n - k] {
                        t.im * v.re - t.re * v.im
                    } else {
                        0.0
                    };
                    // W[k] = low - i*high, rotated by e^{+i pi k / 2N}
                    spec[k] = Complex::new(
                        t.re * low + t.im * high,
                        t.re * -high + t.im * low,
                    );
                }
                if n % 2 == 0 {
                    let v = spec[half];
                    let t = tw[half];
                    let nyq = if keep[half] { t.re * v.re + t.im * v.im } else { 0.0 };
                    spec[half] = Complex::new(std::f64::consts::SQRT_2 * nyq, 0.0);
                }
            }
            out.fill(0.0);
            plan.run_c2r(scr);
            let norm = s2 / n as f64;
            for &j in s.indices() {
                let v = scr.real[makhoul_position(inv[j] as usize, n)];
                out[j] = self.input_sign(j) * v * norm;
            }
        });
    }
}
