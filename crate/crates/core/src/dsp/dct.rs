use std::f64::consts::PI;

use super::N_MEL_FILTERS;
use crate::{Error, Result, Scalar};

/// Orthonormal DCT-II as an explicit `n×n` matrix:
/// `y[k] = s(k)·Σ_n x[n]·cos(π(2n+1)k / 2N)`, `s(0) = √(1/N)`, `s(k>0) = √(2/N)`.
#[derive(Clone, Debug)]
pub struct Dct2<T> {
    n: usize,
    matrix: Vec<T>,
}

impl<T: Scalar> Dct2<T> {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "DCT length must be positive");
        let nf = n as f64;
        let mut matrix = Vec::with_capacity(n * n);
        for k in 0..n {
            let s = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for i in 0..n {
                matrix.push(T::lit(s * (PI * (2 * i + 1) as f64 * k as f64 / (2.0 * nf)).cos()));
            }
        }
        Self { n, matrix }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row-major `n×n` matrix `D` with `y = D·x`.
    pub fn matrix(&self) -> &[T] {
        &self.matrix
    }

    /// First `keep` coefficients.
    pub fn apply_truncated(&self, x: &[T], keep: usize) -> Result<Vec<T>> {
        if x.len() != self.n {
            return Err(Error::dim(format!("DCT of length {} given {} values", self.n, x.len())));
        }
        Ok(self
            .matrix
            .chunks(self.n)
            .take(keep)
            .map(|row| row.iter().zip(x).map(|(&d, &v)| d * v).sum())
            .collect())
    }

    pub fn apply(&self, x: &[T]) -> Result<Vec<T>> {
        self.apply_truncated(x, self.n)
    }
}

/// Orthonormal DCT-II of an 80-vector (one value per mel filter).
pub fn dct2_ortho<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    if x.len() != N_MEL_FILTERS {
        return Err(Error::dim(format!("dct2_ortho expects {N_MEL_FILTERS} values, got {}", x.len())));
    }
    Dct2::new(N_MEL_FILTERS).apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_maps_to_dc() {
        let y = dct2_ortho(&[2.5f64; 80]).unwrap();
        assert!((y[0] - 2.5 * 80f64.sqrt()).abs() < 1e-12);
        assert!(y[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn matrix_is_orthonormal() {
        let d = Dct2::<f64>::new(80);
        let m = d.matrix();
        let mut worst = 0.0f64;
        for i in 0..80 {
            for j in 0..80 {
                let dot: f64 = (0..80).map(|k| m[k * 80 + i] * m[k * 80 + j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let x: Vec<f64> = (0..80).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let y = dct2_ortho(&x).unwrap();
            let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((nx - ny).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(dct2_ortho(&[0.0f64; 79]), Err(Error::Dimension(_))));
    }
}
