use std::f64::consts::PI;

use num_complex::Complex;

use super::FFT_LEN;
use crate::{Error, Result, Scalar};

/// Iterative decimation-in-time radix-2 FFT with precomputed twiddles.
#[derive(Clone, Debug)]
pub struct Radix2Fft<T> {
    n: usize,
    twiddles: Vec<Complex<T>>,
    bitrev: Vec<usize>,
}

impl<T: Scalar> Radix2Fft<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::Parameter(format!("FFT length {n} is not a power of two")));
        }
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                Complex::new(T::lit(a.cos()), T::lit(a.sin()))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        Ok(Self { n, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place forward transform, `X[k] = Σ x[n]·e^{−2πikn/N}`.
    pub fn transform(&self, buf: &mut [Complex<T>]) -> Result<()> {
        if buf.len() != self.n {
            return Err(Error::dim(format!("FFT of length {} given {} samples", self.n, buf.len())));
        }
        for i in 0..self.n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.n {
            let half = size / 2;
            let step = self.n / size;
            for start in (0..self.n).step_by(size) {
                for k in 0..half {
                    let w = self.twiddles[k * step];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
        Ok(())
    }

    /// Bins `0..=N/2` of a real frame.
    pub fn forward_real(&self, frame: &[T]) -> Result<Vec<Complex<T>>> {
        if frame.len() != self.n {
            return Err(Error::dim(format!("FFT of length {} given {} samples", self.n, frame.len())));
        }
        let mut buf: Vec<Complex<T>> = frame.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.transform(&mut buf)?;
        buf.truncate(self.n / 2 + 1);
        Ok(buf)
    }
}

/// One-sided spectrum (513 bins) of a 1024-sample frame.
pub fn fft_1024<T: Scalar>(frame: &[T]) -> Result<Vec<Complex<T>>> {
    Radix2Fft::new(FFT_LEN)?.forward_real(frame)
}

/// O(N²) DFT of a real sequence, all N bins; the reference for the FFT.
pub fn dft_direct<T: Scalar>(x: &[T]) -> Vec<Complex<T>> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for (t, &v) in x.iter().enumerate() {
                // reduce k·t mod n before scaling to keep the angle exact
                let a = -2.0 * PI * ((k * t) % n) as f64 / n as f64;
                re += v.as_f64() * a.cos();
                im += v.as_f64() * a.sin();
            }
            Complex::new(T::lit(re), T::lit(im))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![0.0f64; 1024];
        x[0] = 1.0;
        let y = fft_1024(&x).unwrap();
        assert_eq!(y.len(), 513);
        assert!(y.iter().all(|c| (c.re - 1.0).abs() < 1e-12 && c.im.abs() < 1e-12));
    }

    #[test]
    fn constant_concentrates_in_dc() {
        let y = fft_1024(&vec![1.0f64; 1024]).unwrap();
        assert!((y[0].re - 1024.0).abs() < 1e-9);
        assert!(y[1..].iter().all(|c| c.norm() < 1e-9));
    }

    #[test]
    fn matches_direct_dft_on_random_frames() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fft = Radix2Fft::<f64>::new(1024).unwrap();
        for _ in 0..5 {
            let x: Vec<f64> = (0..1024).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fast = fft.forward_real(&x).unwrap();
            let slow = dft_direct(&x);
            let diff = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-6, "{diff}");
        }
    }

    #[test]
    fn small_sizes() {
        for n in [1usize, 2, 4, 8] {
            let fft = Radix2Fft::<f64>::new(n).unwrap();
            let x: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
            let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
            fft.transform(&mut buf).unwrap();
            for (a, b) in buf.iter().zip(dft_direct(&x)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(matches!(fft_1024(&[0.0f64; 1000]), Err(Error::Dimension(_))));
        assert!(Radix2Fft::<f64>::new(1000).is_err());
    }
}
