use super::config::Regularization;
use crate::nn::{ModelParams, ParamKind};
use crate::tensor::Tensor;
use crate::{Error, Result, Scalar};

/// Penalty over weight tensors (biases excluded) and its gradient, one
/// tensor per parameter (zeros for biases).
///
/// L1 uses the subgradient `λ·sign(w)` with `sign(0) = 0`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
pub fn reg_penalty<T: Scalar>(params: &ModelParams<T>, kind: Regularization, lambda: f64) -> Result<(T, Vec<Tensor<T>>)> {
    if !(lambda >= 0.0) {
        return Err(Error::Config(format!("lambda {lambda} must be >= 0")));
    }
    let lam = T::lit(lambda);
    let two = T::lit(2.0);
    let mut penalty = T::zero();
    let mut grads = Vec::with_capacity(params.len());
    for p in params.iter() {
        if p.kind == ParamKind::Bias || kind == Regularization::None || lambda == 0.0 {
            grads.push(Tensor::zeros(p.value.shape()));
            continue;
        }
        let g = match kind {
            Regularization::L1 => {
                penalty += lam * p.value.data().iter().map(|w| w.abs()).sum::<T>();
                p.value.map(|w| if w == T::zero() { T::zero() } else { lam * w.signum() })
            }
            Regularization::L2 => {
                penalty += lam * p.value.sum_of_squares();
                p.value.map(|w| two * lam * w)
            }
            Regularization::None => unreachable!(),
        };
        grads.push(g);
    }
    Ok((penalty, grads))
}

/// Adds the penalty gradient into each parameter's gradient slot and
/// returns the penalty.
pub fn apply_regularization<T: Scalar>(params: &mut ModelParams<T>, kind: Regularization, lambda: f64) -> Result<T> {
    let (penalty, grads) = reg_penalty(params, kind, lambda)?;
    if kind != Regularization::None && lambda > 0.0 {
        for (p, g) in params.iter_mut().zip(&grads) {
            p.grad.add_assign(g)?;
        }
    }
    Ok(penalty)
}

/// Fraction of weight entries (biases excluded) with `|w| < threshold`.
pub fn near_zero_fraction<T: Scalar>(params: &ModelParams<T>, threshold: f64) -> f64 {
    let (mut small, mut total) = (0usize, 0usize);
    for p in params.iter().filter(|p| p.kind == ParamKind::Weight) {
        total += p.value.len();
        small += p.value.data().iter().filter(|w| w.as_f64().abs() < threshold).count();
    }
    if total == 0 {
        0.0
    } else {
        small as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(w: Vec<f64>, b: Vec<f64>) -> ModelParams<f64> {
        let mut p = ModelParams::new();
        p.push("w", ParamKind::Weight, Tensor::from_vec(w));
        p.push("b", ParamKind::Bias, Tensor::from_vec(b));
        p
    }

    #[test]
    fn zero_lambda() {
        let p = model(vec![1.0, -2.0], vec![5.0]);
        for kind in [Regularization::L1, Regularization::L2] {
            let (pen, g) = reg_penalty(&p, kind, 0.0).unwrap();
            assert_eq!(pen, 0.0);
            assert!(g.iter().all(|t| t.data().iter().all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn single_weight_hand_values() {
        let lam = 0.01;
        let p = model(vec![3.0], vec![7.0]);
        let (pen, g) = reg_penalty(&p, Regularization::L1, lam).unwrap();
        assert!((pen - 3.0 * lam).abs() < 1e-15);
        assert_eq!(g[0].data()[0], lam);
        assert_eq!(g[1].data()[0], 0.0);
        let (pen, g) = reg_penalty(&p, Regularization::L2, lam).unwrap();
        assert!((pen - 9.0 * lam).abs() < 1e-15);
        assert!((g[0].data()[0] - 6.0 * lam).abs() < 1e-15);
    }

    #[test]
    fn l1_subgradient_zero_at_zero() {
        let p = model(vec![0.0, -0.5], vec![0.0]);
        let (_, g) = reg_penalty(&p, Regularization::L1, 0.1).unwrap();
        assert_eq!(g[0].data(), &[0.0, -0.1]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let w = vec![0.8, -1.3, 0.25, 2.0];
        let lam = 0.3;
        for kind in [Regularization::L1, Regularization::L2] {
            let p = model(w.clone(), vec![0.0]);
            let (_, g) = reg_penalty(&p, kind, lam).unwrap();
            for i in 0..w.len() {
                let h = 1e-6;
                let mut wp = w.clone();
                wp[i] += h;
                let mut wm = w.clone();
                wm[i] -= h;
                let fp = reg_penalty(&model(wp, vec![0.0]), kind, lam).unwrap().0;
                let fm = reg_penalty(&model(wm, vec![0.0]), kind, lam).unwrap().0;
                let num = (fp - fm) / (2.0 * h);
                let a = g[0].data()[i];
                assert!((a - num).abs() / a.abs() < 1e-6, "{kind:?} {i}: {a} vs {num}");
            }
        }
    }

    #[test]
    fn near_zero_ignores_biases() {
        let p = model(vec![0.0, 1e-5, 0.5, -2.0], vec![0.0, 0.0]);
        assert_eq!(near_zero_fraction(&p, 1e-4), 0.5);
    }
}
