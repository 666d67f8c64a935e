//! Central finite-difference verification of analytic gradients.
//!
//! Relative error per entry is `|a − n| / max(|a|, |n|, floor)` where `a` is
//! the analytic and `n` the numerical derivative. The floor keeps entries
//! whose true gradient is ~0 from being judged on finite-difference noise.

use rand::distributions::{Distribution, Uniform};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GradTape, Tensor};
use crate::nn::{ForwardCtx, ParamKind, Sequential};
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckOptions {
    pub step: f64,
    pub tolerance: f64,
    pub floor: f64,
    /// Check at most this many entries per tensor (seeded sample); `None`
    /// checks every entry.
    pub max_entries_per_tensor: Option<usize>,
    pub seed: u64,
    pub check_input: bool,
    /// Forward mode; a train-mode context fixes the dropout masks through
    /// its seed, so the objective stays deterministic.
    pub ctx: ForwardCtx,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            step: 1e-5,
            tolerance: 1e-5,
            floor: 1e-6,
            max_entries_per_tensor: None,
            seed: 0,
            check_input: true,
            ctx: ForwardCtx::eval(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorCheck {
    pub name: String,
    pub max_rel_err: f64,
    pub checked: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub tensors: Vec<TensorCheck>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.tensors.iter().map(|t| t.max_rel_err).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_rel_err() < self.tolerance
    }

    /// Fixed-width table, one row per tensor.
    pub fn table(&self) -> String {
        let mut out = format!("{:<32} {:>8} {:>8} {:>12}\n", "tensor", "checked", "total", "max_rel_err");
        for t in &self.tensors {
            out.push_str(&format!("{:<32} {:>8} {:>8} {:>12.3e}\n", t.name, t.checked, t.total, t.max_rel_err));
        }
        out
    }
}

/// Compares `analytic[i]` with central differences of `objective` around
/// `values`, for every named tensor.
pub fn check_gradients<T, F>(
    names: &[String],
    values: &[Tensor<T>],
    analytic: &[Tensor<T>],
    objective: F,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport>
where
    T: Scalar,
    F: Fn(&[Tensor<T>]) -> Result<T>,
{
    if names.len() != values.len() || values.len() != analytic.len() {
        return Err(Error::dim("gradient check: names/values/analytic length mismatch"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut work: Vec<Tensor<T>> = values.to_vec();
    let h = T::lit(opts.step);
    let mut report = GradCheckReport { tensors: Vec::new(), tolerance: opts.tolerance };
    for (k, name) in names.iter().enumerate() {
        analytic[k].expect_same_shape(&values[k])?;
        analytic[k].check_finite(&format!("analytic gradient of {name}"))?;
        let total = values[k].len();
        let indices: Vec<usize> = match opts.max_entries_per_tensor {
            Some(cap) if cap < total => {
                let mut v = sample(&mut rng, total, cap).into_vec();
                v.sort_unstable();
                v
            }
            _ => (0..total).collect(),
        };
        let mut worst = 0.0f64;
        for &i in &indices {
            let orig = work[k].data()[i];
            work[k].data_mut()[i] = orig + h;
            let plus = objective(&work)?;
            work[k].data_mut()[i] = orig - h;
            let minus = objective(&work)?;
            work[k].data_mut()[i] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::GradCheck(format!("non-finite objective perturbing {name}[{i}]")));
            }
            let numeric = ((plus - minus) / (h + h)).as_f64();
            let a = analytic[k].data()[i].as_f64();
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(opts.floor);
            worst = worst.max(rel);
        }
        report.tensors.push(TensorCheck { name: name.clone(), max_rel_err: worst, checked: indices.len(), total });
    }
    Ok(report)
}

/// Replaces every bias with a draw from `U(−scale, scale)`.
///
/// Freshly built networks have zero biases, which puts some ReLU inputs at
/// exactly 0 (e.g. a pixel whose whole receptive field was rectified away).
/// A central difference straddles that kink and returns the mean of the two
/// one-sided slopes, so checks should run on jittered parameters.
pub fn jitter_biases<T: Scalar>(net: &mut Sequential<T>, scale: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-scale, scale);
    for p in net.params.iter_mut().filter(|p| p.kind == ParamKind::Bias) {
        p.value.data_mut().iter_mut().for_each(|b| *b = T::lit(dist.sample(&mut rng)));
    }
}

/// Gradient check of a whole layer stack against the scalar objective
/// `Σ r ⊙ net(x)`, with `r` drawn uniformly from `(−1, 1)`.
pub fn gradient_check<T: Scalar>(
    net: &Sequential<T>,
    input: &Tensor<T>,
    opts: &GradCheckOptions,
) -> Result<GradCheckReport> {
    let ctx = opts.ctx;
    let y = net.forward(input, ctx)?;
    y.check_finite("forward output")?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5EED);
    let dist = Uniform::new(-1.0, 1.0);
    let r = Tensor::new(y.shape().to_vec(), (0..y.len()).map(|_| T::lit(dist.sample(&mut rng))).collect())?;

    let mut work = net.clone();
    work.params.zero_grads();
    let mut tape = GradTape::new();
    work.forward_taped(input, ctx, &mut tape)?;
    let grad_input = work.backward(&mut tape, &r)?;

    let mut names = work.params.names();
    let mut values = work.params.values();
    let mut analytic = work.params.grads();
    if opts.check_input {
        names.push("input".into());
        values.push(input.clone());
        analytic.push(grad_input);
    }
    let n_params = work.params.len();
    let scratch = net.params.clone();
    let objective = |vals: &[Tensor<T>]| -> Result<T> {
        let mut p = scratch.clone();
        p.set_values(&vals[..n_params])?;
        let x = if opts.check_input { &vals[n_params] } else { input };
        let y = net.forward_with(&p, x, ctx)?;
        Ok(y.data().iter().zip(r.data()).map(|(&a, &b)| a * b).sum())
    };
    check_gradients(&names, &values, &analytic, objective, opts)
}
