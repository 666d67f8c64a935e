use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState};
use super::config::{Objective, TrainConfig};
use super::metrics::{fmt_metric, MetricsReport};
use super::regularization::apply_regularization;
use crate::nn::fusion::PROB_FLOOR;
use crate::nn::{
    bce_backward, bce_loss, elementwise_bce_backward, elementwise_bce_loss, one_hot, ForwardCtx, Layer, LossValue,
    Sequential,
};
use crate::tensor::{Activation, GradTape, Tensor};
use crate::{Error, Result, Scalar};

/// A network-ready input and its class (1 = positive).
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub input: Tensor<T>,
    pub label: usize,
}

impl<T> Sample<T> {
    pub fn new(input: Tensor<T>, label: usize) -> Self {
        Self { input, label }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Sample-weighted mean of batch loss plus penalty.
    pub train_loss: f64,
    pub val: Option<MetricsReport>,
    /// Output entries pulled into `[PROB_FLOOR, 1 − PROB_FLOOR]` before the loss.
    pub clamped: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
}

impl TrainLog {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.train_loss).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,train_loss,val_accuracy,val_precision,val_recall\n");
        for e in &self.epochs {
            let (a, p, r) = e.val.map_or((None, None, None), |m| (m.accuracy, m.precision, m.recall));
            let _ = writeln!(s, "{},{:e},{},{},{}", e.epoch, e.train_loss, fmt_metric(a), fmt_metric(p), fmt_metric(r));
        }
        s
    }
}

fn clamp_probs<T: Scalar>(y: &Tensor<T>, clamped: &mut usize) -> Result<[T; 2]> {
    y.expect_shape(&[2], "network output")?;
    let lo = T::lit(PROB_FLOOR);
    let hi = T::one() - lo;
    let mut p = [y.data()[0], y.data()[1]];
    for v in &mut p {
        if *v < lo || *v > hi {
            *clamped += 1;
            *v = v.max(lo).min(hi);
        }
    }
    Ok(p)
}

type LossFns<T> = (
    fn(&[[T; 2]], &[[T; 2]]) -> Result<LossValue<T>>,
    fn(&[[T; 2]], &[[T; 2]]) -> Result<Vec<[T; 2]>>,
);

/// Resolves [`Objective::Auto`] from the network's final activation.
pub fn resolve_objective<T: Scalar>(net: &Sequential<T>, objective: Objective) -> Objective {
    match objective {
        Objective::Auto => match net.layers().last() {
            Some(Layer::Activation(Activation::Sigmoid)) => Objective::Elementwise,
            _ => Objective::ClassSum,
        },
        other => other,
    }
}

fn loss_fns<T: Scalar>(objective: Objective) -> LossFns<T> {
    match objective {
        Objective::Elementwise => (elementwise_bce_loss, elementwise_bce_backward),
        _ => (bce_loss, bce_backward),
    }
}

/// Mini-batch Adam on the cross-entropy of a 2-output network (see
/// [`resolve_objective`] for which form).
///
/// Every epoch reshuffles with a stream seeded from `cfg.seed`, which also
/// supplies one dropout seed per sample, so a run is a pure function of
/// `(net, data, cfg)`. The last partial batch is kept and averaged over its
/// own size. Gradients through clamped outputs pass unchanged.
pub fn train<T: Scalar>(
    net: &mut Sequential<T>,
    train: &[Sample<T>],
    val: &[Sample<T>],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    train_observed(net, train, val, cfg, |_| {})
}

/// [`train`] that hands each finished epoch to `on_epoch` as it completes.
pub fn train_observed<T: Scalar>(
    net: &mut Sequential<T>,
    train: &[Sample<T>],
    val: &[Sample<T>],
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainLog> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    // stream 0 of the same seed is used for weight initialisation
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut state = AdamState::new(&net.params);
    let (loss_fn, grad_fn) = loss_fns::<T>(resolve_objective(net, cfg.objective));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainLog::default();
    net.params.zero_grads();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut clamped = 0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let mut tapes = Vec::with_capacity(batch.len());
            let mut probs = Vec::with_capacity(batch.len());
            let mut labels = Vec::with_capacity(batch.len());
            for &i in batch {
                let mut tape = GradTape::new();
                let y = net.forward_taped(&train[i].input, ForwardCtx::train(rng.gen()), &mut tape)?;
                if !y.all_finite() {
                    return Err(Error::Training(format!("non-finite output at epoch {epoch} batch {b}")));
                }
                probs.push(clamp_probs(&y, &mut clamped)?);
                labels.push(one_hot::<T>(train[i].label));
                tapes.push(tape);
            }
            let loss = loss_fn(&probs, &labels)?.value;
            let grads = grad_fn(&probs, &labels)?;
            for (tape, g) in tapes.iter_mut().zip(&grads) {
                net.backward(tape, &Tensor::from_vec(g.to_vec()))?;
            }
            let penalty = apply_regularization(&mut net.params, cfg.regularization, cfg.lambda)?;
            let total = (loss + penalty).as_f64();
            if !total.is_finite() {
                return Err(Error::Training(format!("non-finite loss at epoch {epoch} batch {b}")));
            }
            adam_step(&mut net.params, &mut state, &cfg.adam)
                .map_err(|e| Error::Training(format!("epoch {epoch} batch {b}: {e}")))?;
            net.params.zero_grads();
            loss_sum += total * batch.len() as f64;
        }
        let val_report = if val.is_empty() { None } else { Some(evaluate(net, val)?) };
        let entry = EpochLog { epoch, train_loss: loss_sum / train.len() as f64, val: val_report, clamped };
        on_epoch(&entry);
        log.epochs.push(entry);
    }
    Ok(log)
}

/// Eval-mode argmax predictions (ties to class 0).
pub fn predict<T: Scalar>(net: &Sequential<T>, samples: &[Sample<T>]) -> Result<Vec<usize>> {
    samples
        .iter()
        .map(|s| {
            let y = net.forward(&s.input, ForwardCtx::eval())?;
            y.expect_shape(&[2], "network output")?;
            Ok(usize::from(y.data()[1] > y.data()[0]))
        })
        .collect()
}

pub fn evaluate<T: Scalar>(net: &Sequential<T>, samples: &[Sample<T>]) -> Result<MetricsReport> {
    let predicted = predict(net, samples)?;
    let actual: Vec<usize> = samples.iter().map(|s| s.label).collect();
    Ok(MetricsReport::from_predictions(&predicted, &actual))
}
