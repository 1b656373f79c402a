//! Orthonormal DCT-II / DCT-III through a single real FFT of the same length.
//!
//! The forward transform is the orthonormal DCT-II
//!
//! ```text
//! X[k] = c_k * sqrt(2/N) * sum_n x[n] * cos(pi*(2n+1)*k / (2N)),   c_0 = 1/sqrt(2), c_k = 1 otherwise
//! ```
//!
//! computed by the even-odd reordering method: permute the input into
//! `v = [x[0], x[2], ..., x[3], x[1]]`, take an N-point real FFT, and rotate
//! each bin by `exp(-i*pi*k/(2N))`. The inverse (DCT-III, equal to the
//! adjoint) runs the same steps backward. Both directions cost O(N log N)
//! for any N >= 1, not just powers of two.

use std::sync::{Arc, Mutex};

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex;

use super::TransformError;

/// Position in the even-odd reordered sequence where input index `i` lands.
#[inline]
pub(crate) fn makhoul_position(i: usize, n: usize) -> usize {
    if i % 2 == 0 {
        i / 2
    } else {
        n - 1 - (i - 1) / 2
    }
}

/// Reusable working buffers for one transform application.
pub(crate) struct DctScratch {
    pub(crate) real: Vec<f64>,
    pub(crate) spectrum: Vec<Complex<f64>>,
    pub(crate) fft: Vec<Complex<f64>>,
}

/// A planned orthonormal DCT of fixed length, reusable and shareable across
/// threads. Plans hold one set of scratch buffers that sequential calls
/// reuse; concurrent calls fall back to a private allocation.
pub struct DctPlan {
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    /// `(cos, sin)` of `pi*k/(2N)` for `k = 0..=N/2`.
    pub(crate) twiddle: Vec<Complex<f64>>,
    scale0: f64,
    scale: f64,
    scratch: Mutex<DctScratch>,
    scratch_bytes: usize,
}

impl std::fmt::Debug for DctPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DctPlan").field("n", &self.n).finish()
    }
}

impl DctPlan {
    pub fn new(n: usize) -> Result<Self, TransformError> {
        if n == 0 {
            return Err(TransformError::EmptyInput);
        }
        let mut planner = RealFftPlanner::<f64>::new();
        let r2c = planner.plan_fft_forward(n);
        let c2r = planner.plan_fft_inverse(n);
        let half = n / 2;
        let twiddle: Vec<Complex<f64>> = (0..=half)
            .map(|k| {
                let theta = std::f64::consts::PI * k as f64 / (2.0 * n as f64);
                Complex::new(theta.cos(), theta.sin())
            })
            .collect();
        let fft_scratch = r2c
            .get_scratch_len()
            .max(c2r.get_scratch_len());
        let scratch = DctScratch {
            real: vec![0.0; n],
            spectrum: vec![Complex::default(); half + 1],
            fft: vec![Complex::default(); fft_scratch],
        };
        let scratch_bytes = 8 * n + 16 * (half + 1) + 16 * fft_scratch;
        Ok(Self {
            n,
            r2c,
            c2r,
            twiddle,
            scale0: (1.0 / n as f64).sqrt(),
            scale: (2.0 / n as f64).sqrt(),
            scratch: Mutex::new(scratch),
            scratch_bytes,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Auxiliary bytes one application needs: twiddle table plus working
    /// buffers (real line, half spectrum, FFT scratch).
    pub fn workspace_bytes(&self) -> usize {
        16 * self.twiddle.len() + self.scratch_bytes
    }

    pub(crate) fn with_scratch<R>(&self, f: impl FnOnce(&mut DctScratch) -> R) -> R {
        match self.scratch.try_lock() {
            Ok(mut guard) => f(&mut guard),
            // Another thread is using the plan's buffers; stay confined.
            Err(_) => {
                let half = self.n / 2;
                let mut own = DctScratch {
                    real: vec![0.0; self.n],
                    spectrum: vec![Complex::default(); half + 1],
                    fft: vec![
                        Complex::default();
                        self.r2c.get_scratch_len().max(self.c2r.get_scratch_len())
                    ],
                };
                f(&mut own)
            }
        }
    }

    /// Orthonormal DCT-II of `x`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.forward_into(x, &mut out);
        out
    }

    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n, "DCT input length mismatch");
        assert_eq!(out.len(), self.n, "DCT output length mismatch");
        if self.n == 1 {
            out[0] = x[0];
            return;
        }
        self.with_scratch(|s| {
            let n = self.n;
            let half_up = n.div_ceil(2);
            for i in 0..half_up {
                s.real[i] = x[2 * i];
            }
            for i in 0..n / 2 {
                s.real[n - 1 - i] = x[2 * i + 1];
            }
            self.r2c
                .process_with_scratch(&mut s.real, &mut s.spectrum, &mut s.fft)
                .expect("r2c lengths are planned");
            self.spectrum_to_dct(&s.spectrum, out);
        });
    }

    /// Writes the orthonormal DCT-II values given the FFT of the reordered
    /// input. `out[k] = scale_k * Re(exp(-i*pi*k/2N) * V[k])` with the upper
    /// half of `V` reconstructed from conjugate symmetry.
    pub(crate) fn spectrum_to_dct(&self, spectrum: &[Complex<f64>], out: &mut [f64]) {
        let n = self.n;
        let half = n / 2;
        for k in 0..=half {
            let v = spectrum[k];
            let t = self.twiddle[k];
            out[k] = t.re * v.re + t.im * v.im;
        }
        for k in half + 1..n {
            // V[k] = conj(V[n-k]); cos/sin at k mirror to sin/cos at n-k.
            let v = spectrum[n - k];
            let t = self.twiddle[n - k];
            out[k] = t.im * v.re - t.re * v.im;
        }
        out[0] *= self.scale0;
        for o in out[1..].iter_mut() {
            *o *= self.scale;
        }
    }

    /// Inverse (DCT-III); exact adjoint of [`DctPlan::forward`].
    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.inverse_into(x, &mut out);
        out
    }

    pub fn inverse_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n, "DCT input length mismatch");
        assert_eq!(out.len(), self.n, "DCT output length mismatch");
        if self.n == 1 {
            out[0] = x[0];
            return;
        }
        self.with_scratch(|s| {
            self.dct_to_spectrum(|k| x[k], &mut s.spectrum);
            self.spectrum_to_signal(s, out);
        });
    }

    /// Builds the half spectrum `V[k] = exp(+i*pi*k/2N) * (Xu[k] - i*Xu[N-k])`
    /// from un-normalizing the orthonormal coefficients supplied by `coeff`.
    pub(crate) fn dct_to_spectrum(
        &self,
        coeff: impl Fn(usize) -> f64,
        spectrum: &mut [Complex<f64>],
    ) {
        let n = self.n;
        let half = n / 2;
        let inv0 = 1.0 / self.scale0;
        let inv = 1.0 / self.scale;
        spectrum[0] = Complex::new(coeff(0) * inv0, 0.0);
        for k in 1..=half {
            let wr = coeff(k) * inv;
            let wi = -coeff(n - k) * inv;
            let t = self.twiddle[k];
            spectrum[k] = Complex::new(t.re * wr - t.im * wi, t.re * wi + t.im * wr);
        }
        if n % 2 == 0 {
            // Nyquist bin of a real signal must be purely real; the rotated
            // value is real analytically, so drop rounding residue.
            spectrum[half].im = 0.0;
        }
    }

    /// Finishes an inverse transform: c2r FFT of the spectrum held in `s`,
    /// then undo the even-odd reordering into `out`.
    pub(crate) fn spectrum_to_signal(&self, s: &mut DctScratch, out: &mut [f64]) {
        let n = self.n;
        self.c2r
            .process_with_scratch(&mut s.spectrum, &mut s.real, &mut s.fft)
            .expect("c2r lengths are planned");
        let norm = 1.0 / n as f64;
        let half_up = n.div_ceil(2);
        for i in 0..half_up {
            out[2 * i] = s.real[i] * norm;
        }
        for i in 0..n / 2 {
            out[2 * i + 1] = s.real[n - 1 - i] * norm;
        }
    }

    pub(crate) fn run_r2c(&self, s: &mut DctScratch) {
        self.r2c
            .process_with_scratch(&mut s.real, &mut s.spectrum, &mut s.fft)
            .expect("r2c lengths are planned");
    }

    pub(crate) fn run_c2r(&self, s: &mut DctScratch) {
        self.c2r
            .process_with_scratch(&mut s.spectrum, &mut s.real, &mut s.fft)
            .expect("c2r lengths are planned");
    }

    pub(crate) fn make_scratch(&self) -> DctScratch {
        DctScratch {
            real: vec![0.0; self.n],
            spectrum: vec![Complex::default(); self.n / 2 + 1],
            fft: vec![
                Complex::default();
                self.r2c.get_scratch_len().max(self.c2r.get_scratch_len())
            ],
        }
    }
}

/// One-shot orthonormal DCT-II. Plans internally; prefer [`DctPlan`] for
/// repeated transforms of the same length.
pub fn dct_forward(x: &[f64]) -> Vec<f64> {
    DctPlan::new(x.len())
        .expect("dct_forward requires a nonempty input")
        .forward(x)
}

/// One-shot orthonormal DCT-III (inverse of [`dct_forward`]).
pub fn dct_inverse(x: &[f64]) -> Vec<f64> {
    DctPlan::new(x.len())
        .expect("dct_inverse requires a nonempty input")
        .inverse(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct O(N^2) evaluation of the orthonormal DCT-II.
    fn naive_dct_forward(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let ck = if k == 0 { (0.5f64).sqrt() } else { 1.0 };
                let sum: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        v * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64
                            / (2.0 * n as f64))
                            .cos()
                    })
                    .sum();
                ck * (2.0 / n as f64).sqrt() * sum
            })
            .collect()
    }

    /// Direct O(N^2) evaluation of the inverse (transpose of the forward).
    fn naive_dct_inverse(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let ck = if k == 0 { (0.5f64).sqrt() } else { 1.0 };
                        x[k] * ck
                            * (2.0 / n as f64).sqrt()
                            * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64
                                / (2.0 * n as f64))
                                .cos()
                    })
                    .sum()
            })
            .collect()
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn constant_vector_concentrates_in_bin_zero() {
        let x = [1.0, 1.0, 1.0, 1.0];
        let y = dct_forward(&x);
        assert!((y[0] - 2.0).abs() < 1e-14);
        for &v in &y[1..] {
            assert!(v.abs() < 1e-14);
        }
        let back = dct_inverse(&[2.0, 0.0, 0.0, 0.0]);
        for &v in &back {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn basis_vector_round_trip() {
        let e0 = [1.0, 0.0, 0.0, 0.0];
        let back = dct_inverse(&dct_forward(&e0));
        for (a, b) in back.iter().zip(&e0) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_naive_oracle_for_small_sizes() {
        for n in 1..=64 {
            let x = random_vec(n, 100 + n as u64);
            let fast = dct_forward(&x);
            let slow = naive_dct_forward(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "forward mismatch at n={n}: {a} vs {b}");
            }
            let fast_inv = dct_inverse(&x);
            let slow_inv = naive_dct_inverse(&x);
            for (a, b) in fast_inv.iter().zip(&slow_inv) {
                assert!((a - b).abs() < 1e-12, "inverse mismatch at n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn round_trip_and_isometry_over_size_sweep() {
        for &n in &[1usize, 2, 3, 4, 8, 15, 16, 64, 1024] {
            let plan = DctPlan::new(n).unwrap();
            let x = random_vec(n, n as u64);
            let y = plan.forward(&x);
            let back = plan.inverse(&y);
            let norm_x: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let norm_y: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err: f64 = back
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-12 * norm_x.max(1.0), "round trip failed at n={n}");
            assert!(
                (norm_x - norm_y).abs() <= 1e-12 * norm_x.max(1.0),
                "energy not preserved at n={n}"
            );
        }
    }

    #[test]
    fn forward_preserves_inner_products() {
        let n = 33;
        let plan = DctPlan::new(n).unwrap();
        for seed in 0..10 {
            let x = random_vec(n, seed);
            let z = random_vec(n, seed + 999);
            let fx = plan.forward(&x);
            let fz = plan.forward(&z);
            let lhs: f64 = fx.iter().zip(&fz).map(|(a, b)| a * b).sum();
            let rhs: f64 = x.iter().zip(&z).map(|(a, b)| a * b).sum();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty_input() {
        assert!(DctPlan::new(0).is_err());
    }

    #[test]
    fn plan_is_shareable_across_threads() {
        let plan = std::sync::Arc::new(DctPlan::new(256).unwrap());
        let x = random_vec(256, 5);
        let expect = plan.forward(&x);
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let plan = plan.clone();
                let x = x.clone();
                let expect = expect.clone();
                std::thread::spawn(move || {
                    for _ in 0..50 {
                        assert_eq!(plan.forward(&x), expect);
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }
}
