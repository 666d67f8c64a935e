use super::config::AdamConfig;
use crate::nn::ModelParams;
use crate::tensor::Tensor;
use crate::{Error, Result, Scalar};

/// First and second moment estimates, one pair per parameter tensor.
#[derive(Clone, Debug)]
pub struct AdamState<T> {
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub step: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        let zeros: Vec<Tensor<T>> = params.iter().map(|p| Tensor::zeros(p.value.shape())).collect();
        Self { m: zeros.clone(), v: zeros, step: 0 }
    }
}

/// One bias-corrected Adam update from the gradients stored in `params`.
///
/// Gradients are validated before anything is written, so a non-finite
/// gradient leaves both `params` and `state` untouched.
pub fn adam_step<T: Scalar>(params: &mut ModelParams<T>, state: &mut AdamState<T>, cfg: &AdamConfig) -> Result<()> {
    if state.m.len() != params.len() {
        return Err(Error::dim(format!(
            "adam state holds {} tensors, model has {}",
            state.m.len(),
            params.len()
        )));
    }
    for (p, m) in params.iter().zip(&state.m) {
        p.grad.expect_same_shape(m)?;
        if let Some(i) = p.grad.data().iter().position(|g| !g.is_finite()) {
            return Err(Error::Training(format!("non-finite gradient in {}[{i}]", p.name)));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
    let (one, lr, eps) = (T::one(), T::lit(cfg.learning_rate), T::lit(cfg.epsilon));
    let c1 = one - b1.powi(t);
    let c2 = one - b2.powi(t);
    for ((p, m), v) in params.iter_mut().zip(&mut state.m).zip(&mut state.v) {
        let g = p.grad.data();
        for (i, th) in p.value.data_mut().iter_mut().enumerate() {
            let mi = &mut m.data_mut()[i];
            *mi = b1 * *mi + (one - b1) * g[i];
            let vi = &mut v.data_mut()[i];
            *vi = b2 * *vi + (one - b2) * g[i] * g[i];
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *th -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ParamKind;

    fn scalar_model(theta: f64) -> ModelParams<f64> {
        let mut p = ModelParams::new();
        p.push("theta", ParamKind::Weight, Tensor::from_vec(vec![theta]));
        p
    }

    fn set_grad(p: &mut ModelParams<f64>, g: f64) {
        p.iter_mut().next().unwrap().grad.data_mut()[0] = g;
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = scalar_model(0.7);
        let mut s = AdamState::new(&p);
        adam_step(&mut p, &mut s, &AdamConfig::default()).unwrap();
        assert_eq!(p.values()[0].data()[0], 0.7);
        assert_eq!(s.m[0].data()[0], 0.0);
        assert_eq!(s.v[0].data()[0], 0.0);
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let cfg = AdamConfig::default();
        for g in [1e-3, -0.5, 3.0, -1e4] {
            let mut p = scalar_model(0.0);
            let mut s = AdamState::new(&p);
            set_grad(&mut p, g);
            adam_step(&mut p, &mut s, &cfg).unwrap();
            let delta = p.values()[0].data()[0];
            // closed form: m̂ = g, v̂ = g², Δ = −lr·g/(|g| + ε)
            assert!((delta + cfg.learning_rate * g / (g.abs() + cfg.epsilon)).abs() < 1e-15);
            assert!((delta + cfg.learning_rate * g.signum()).abs() < 1e-6);
        }
    }

    fn steps_to_reach(mut step: impl FnMut(f64) -> f64, mut th: f64) -> usize {
        let mut n = 0;
        while th.abs() >= 0.01 {
            th = step(th);
            n += 1;
            assert!(n < 10_000, "diverged");
        }
        n
    }

    #[test]
    fn minimises_a_parabola() {
        let cfg = AdamConfig::default();
        let mut p = scalar_model(1.0);
        let mut s = AdamState::new(&p);
        let ours = steps_to_reach(
            |th| {
                set_grad(&mut p, 2.0 * th);
                adam_step(&mut p, &mut s, &cfg).unwrap();
                p.values()[0].data()[0]
            },
            1.0,
        );
        // plain scalar recurrence as reference
        let (mut m, mut v, mut t) = (0.0f64, 0.0f64, 0);
        let reference = steps_to_reach(
            |th| {
                let g = 2.0 * th;
                t += 1;
                m = 0.9 * m + 0.1 * g;
                v = 0.999 * v + 0.001 * g * g;
                let mh = m / (1.0 - 0.9f64.powi(t));
                let vh = v / (1.0 - 0.999f64.powi(t));
                th - 1e-3 * mh / (vh.sqrt() + 1e-8)
            },
            1.0,
        );
        assert_eq!(ours, reference);
        // steps are ~lr in size, so at least 990 are needed from theta = 1
        assert!((990..2500).contains(&ours), "{ours}");
    }

    #[test]
    fn scale_equivariant_direction() {
        let cfg = AdamConfig { epsilon: 1e-12, ..Default::default() };
        let grads = [0.3, -1.2, 0.05, 2.0];
        let run = |c: f64| {
            let mut p = ModelParams::new();
            p.push("w", ParamKind::Weight, Tensor::zeros(&[4]));
            p.iter_mut().next().unwrap().grad = Tensor::from_vec(grads.iter().map(|g| g * c).collect());
            let mut s = AdamState::new(&p);
            adam_step(&mut p, &mut s, &cfg).unwrap();
            p.values()[0].data().to_vec()
        };
        let base = run(1.0);
        for c in [10.0, 0.1] {
            let d = run(c);
            let dot: f64 = base.iter().zip(&d).map(|(a, b)| a * b).sum();
            let na: f64 = base.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nb: f64 = d.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!((dot / (na * nb) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn non_finite_gradient_names_tensor() {
        let mut p = scalar_model(1.0);
        let mut s = AdamState::new(&p);
        set_grad(&mut p, f64::NAN);
        let err = adam_step(&mut p, &mut s, &AdamConfig::default()).unwrap_err();
        assert!(err.to_string().contains("theta[0]"), "{err}");
        assert_eq!(p.values()[0].data()[0], 1.0);
        assert_eq!(s.step, 0);
    }
}
