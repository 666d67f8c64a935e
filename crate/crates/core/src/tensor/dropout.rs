use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    Train,
    #[default]
    Eval,
}

/// Inverted-dropout multiplier mask: each entry is `0` with probability
/// `rate`, else `1 / (1 − rate)`. `None` in eval mode or at rate 0.
pub fn dropout_mask<T: Scalar>(
    shape: &[usize],
    rate: f64,
    mode: Mode,
    seed: u64,
) -> Result<Option<Tensor<T>>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::Parameter(format!("dropout rate {rate} outside [0, 1)")));
    }
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(None);
    }
    let keep = T::lit(1.0 / (1.0 - rate));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| if rng.gen::<f64>() < rate { T::zero() } else { keep })
        .collect();
    Tensor::new(shape.to_vec(), data).map(Some)
}

pub fn dropout<T: Scalar>(x: &Tensor<T>, rate: f64, mode: Mode, seed: u64) -> Result<Tensor<T>> {
    match dropout_mask(x.shape(), rate, mode, seed)? {
        None => Ok(x.clone()),
        Some(mask) => x.zip_map(&mask, |a, m| a * m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_zero_and_eval_are_identity() {
        let x = Tensor::from_vec(vec![1.0, -2.0, 3.5]);
        assert!(dropout(&x, 0.0, Mode::Train, 1).unwrap().bitwise_eq(&x));
        assert!(dropout(&x, 0.9, Mode::Eval, 1).unwrap().bitwise_eq(&x));
    }

    #[test]
    fn rate_one_rejected() {
        let x = Tensor::from_vec(vec![1.0]);
        assert!(matches!(dropout(&x, 1.0, Mode::Train, 0), Err(Error::Parameter(_))));
        assert!(dropout(&x, -0.1, Mode::Eval, 0).is_err());
    }

    #[test]
    fn zero_fraction_concentrates() {
        let x = Tensor::full(&[100_000], 1.0f64);
        let y = dropout(&x, 0.5, Mode::Train, 42).unwrap();
        let zeros = y.data().iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
        assert!((zeros - 0.5).abs() < 0.01, "{zeros}");
        assert!(y.data().iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn expectation_preserved() {
        // 10^5 independent trials of dropout on the scalar 1.
        let total: f64 = (0..100_000u64)
            .map(|seed| dropout(&Tensor::scalar(1.0), 0.5, Mode::Train, seed).unwrap().data()[0])
            .sum();
        let mean = total / 1e5;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn deterministic_per_seed() {
        let x = Tensor::full(&[64], 1.0f64);
        let a = dropout(&x, 0.3, Mode::Train, 9).unwrap();
        let b = dropout(&x, 0.3, Mode::Train, 9).unwrap();
        assert!(a.bitwise_eq(&b));
    }
}
