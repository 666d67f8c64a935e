//! Decision-level fusion: `[y_v ; y_a]` through a small dense head.

use super::audio::AudioNet;
use super::params::Initializer;
use super::sequential::{ForwardCtx, Layer, Sequential};
use super::video::VideoNet;
use crate::tensor::{Activation, Tensor};
use crate::{Error, Result, Scalar};

/// Class-probability pair emitted by one classifier; entries in `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModalityOutput<T> {
    probs: [T; 2],
}

/// Network outputs are pulled into `[PROB_FLOOR, 1 − PROB_FLOOR]` so a
/// saturated softmax or sigmoid still yields a valid probability pair.
pub const PROB_FLOOR: f64 = 1e-12;

impl<T: Scalar> ModalityOutput<T> {
    pub fn new(probs: [T; 2]) -> Result<Self> {
        if probs.iter().all(|&p| p > T::zero() && p < T::one()) {
            Ok(Self { probs })
        } else {
            Err(Error::Domain(format!("modality output {probs:?} outside (0, 1)")))
        }
    }

    /// From a 2-element network output, clamped by [`PROB_FLOOR`].
    pub fn from_network(y: &Tensor<T>) -> Result<Self> {
        y.expect_shape(&[2], "modality output")?;
        y.check_finite("modality output")?;
        let lo = T::lit(PROB_FLOOR);
        let hi = T::one() - lo;
        Self::new([y.data()[0].max(lo).min(hi), y.data()[1].max(lo).min(hi)])
    }

    pub fn probs(&self) -> [T; 2] {
        self.probs
    }

    /// Index of the larger entry; ties go to class 0.
    pub fn predicted_class(&self) -> usize {
        usize::from(self.probs[1] > self.probs[0])
    }
}

/// `[video₀, video₁, audio₀, audio₁]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusedVector<T> {
    pub values: [T; 4],
}

impl<T: Scalar> FusedVector<T> {
    pub fn to_tensor(&self) -> Tensor<T> {
        Tensor::from_vec(self.values.to_vec())
    }
}

pub fn concat_outputs<T: Scalar>(video: &ModalityOutput<T>, audio: &ModalityOutput<T>) -> FusedVector<T> {
    let [v0, v1] = video.probs;
    let [a0, a1] = audio.probs;
    FusedVector { values: [v0, v1, a0, a1] }
}

pub const FUSION_HIDDEN: usize = 16;

#[derive(Clone, Debug)]
pub struct FusionHead<T> {
    pub net: Sequential<T>,
}

impl<T: Scalar> FusionHead<T> {
    /// dense(4→16) → ReLU → dense(16→2) → softmax.
    pub fn build(seed: u64) -> Self {
        let mut init = Initializer::new(seed);
        let mut net = Sequential::new();
        net.push_dense(4, FUSION_HIDDEN, &mut init)
            .push(Layer::Activation(Activation::Relu))
            .push_dense(FUSION_HIDDEN, 2, &mut init)
            .push(Layer::Activation(Activation::SoftmaxLastDim));
        Self { net }
    }

    pub fn forward_raw(&self, fused: &FusedVector<T>) -> Result<Tensor<T>> {
        self.net.forward(&fused.to_tensor(), ForwardCtx::eval())
    }

    pub fn forward(&self, fused: &FusedVector<T>) -> Result<ModalityOutput<T>> {
        ModalityOutput::from_network(&self.forward_raw(fused)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FusedPrediction<T> {
    pub video: ModalityOutput<T>,
    pub audio: ModalityOutput<T>,
    pub fused: ModalityOutput<T>,
}

/// Runs both unimodal classifiers (eval mode, parameters untouched), joins
/// their outputs video-first and applies the head.
pub fn fused_predict<T: Scalar>(
    video: &VideoNet<T>,
    audio: &AudioNet<T>,
    head: &FusionHead<T>,
    clip: &Tensor<T>,
    mfcc: &Tensor<T>,
) -> Result<FusedPrediction<T>> {
    let y_v = video.forward(clip)?;
    let y_a = audio.forward(mfcc, ForwardCtx::eval())?;
    let fused = head.forward(&concat_outputs(&y_v, &y_a))?;
    Ok(FusedPrediction { video: y_v, audio: y_a, fused })
}

pub fn fused_forward<T: Scalar>(
    video: &VideoNet<T>,
    audio: &AudioNet<T>,
    head: &FusionHead<T>,
    clip: &Tensor<T>,
    mfcc: &Tensor<T>,
) -> Result<ModalityOutput<T>> {
    fused_predict(video, audio, head, clip, mfcc).map(|p| p.fused)
}
