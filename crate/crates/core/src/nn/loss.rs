//! Binary cross-entropy over batches of class-probability pairs:
//! `L = −(1/N) Σ_batch [y₁·ln p₁ + y₂·ln p₂]`.

use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossValue<T> {
    pub value: T,
    pub batch_size: usize,
}

/// One-hot pair for class `label ∈ {0, 1}`.
pub fn one_hot<T: Scalar>(label: usize) -> [T; 2] {
    if label == 0 {
        [T::one(), T::zero()]
    } else {
        [T::zero(), T::one()]
    }
}

fn validate<T: Scalar>(p: &[[T; 2]], y: &[[T; 2]]) -> Result<()> {
    if p.is_empty() || p.len() != y.len() {
        return Err(Error::dim(format!(
            "bce: {} predictions vs {} labels",
            p.len(),
            y.len()
        )));
    }
    for (i, (pi, yi)) in p.iter().zip(y).enumerate() {
        if let Some(v) = pi.iter().find(|&&v| !(v > T::zero() && v < T::one())) {
            return Err(Error::Domain(format!("bce: probability {v} at sample {i} outside (0, 1)")));
        }
        let one_hot = (yi[0] == T::one() && yi[1] == T::zero()) || (yi[0] == T::zero() && yi[1] == T::one());
        if !one_hot {
            return Err(Error::Domain(format!("bce: label {yi:?} at sample {i} is not one-hot")));
        }
    }
    Ok(())
}

pub fn bce_loss<T: Scalar>(p: &[[T; 2]], y: &[[T; 2]]) -> Result<LossValue<T>> {
    validate(p, y)?;
    let n = T::from_usize_lossy(p.len());
    let total: T = p
        .iter()
        .zip(y)
        .map(|(pi, yi)| yi[0] * pi[0].ln() + yi[1] * pi[1].ln())
        .sum();
    Ok(LossValue {
        value: -total / n,
        batch_size: p.len(),
    })
}

/// `∂L/∂p_i = −(1/N)·y_i / p_i`.
pub fn bce_backward<T: Scalar>(p: &[[T; 2]], y: &[[T; 2]]) -> Result<Vec<[T; 2]>> {
    validate(p, y)?;
    let n = T::from_usize_lossy(p.len());
    Ok(p.iter()
        .zip(y)
        .map(|(pi, yi)| [-yi[0] / (pi[0] * n), -yi[1] / (pi[1] * n)])
        .collect())
}

/// Per-output binary cross-entropy,
/// `−(1/N) Σ_batch Σ_i [y_i·ln p_i + (1 − y_i)·ln(1 − p_i)]`.
///
/// For a pair that sums to 1 (softmax) this is exactly twice [`bce_loss`].
/// Unlike [`bce_loss`] it also penalises the off-class entry, which
/// independent sigmoid outputs need: without that term both entries can be
/// driven to 1 at zero loss.
pub fn elementwise_bce_loss<T: Scalar>(p: &[[T; 2]], y: &[[T; 2]]) -> Result<LossValue<T>> {
    validate(p, y)?;
    let n = T::from_usize_lossy(p.len());
    let one = T::one();
    let total: T = p
        .iter()
        .zip(y)
        .flat_map(|(pi, yi)| (0..2).map(move |k| yi[k] * pi[k].ln() + (one - yi[k]) * (one - pi[k]).ln()))
        .sum();
    Ok(LossValue {
        value: -total / n,
        batch_size: p.len(),
    })
}

/// `∂L/∂p_i = −(1/N)·[y_i/p_i − (1 − y_i)/(1 − p_i)]`.
pub fn elementwise_bce_backward<T: Scalar>(p: &[[T; 2]], y: &[[T; 2]]) -> Result<Vec<[T; 2]>> {
    validate(p, y)?;
    let n = T::from_usize_lossy(p.len());
    let one = T::one();
    Ok(p.iter()
        .zip(y)
        .map(|(pi, yi)| {
            let g = |k: usize| -(yi[k] / pi[k] - (one - yi[k]) / (one - pi[k])) / n;
            [g(0), g(1)]
        })
        .collect())
}
