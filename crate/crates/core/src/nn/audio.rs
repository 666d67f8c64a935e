//! MFCC classifier: two 3×3 convolutions, flatten, dropout, two dense
//! layers, elementwise sigmoid output `y_a`.

use super::fusion::ModalityOutput;
use super::params::Initializer;
use super::sequential::{ForwardCtx, Layer, Sequential};
use crate::tensor::{Activation, ConvSpec, Padding, Tensor};
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct AudioNetConfig {
    /// MFCC frames (rows) consumed.
    pub input_frames: usize,
    pub coefficients: usize,
    pub filters: usize,
    pub kernel: usize,
    pub dropout: f64,
    pub dense_width: usize,
    pub outputs: usize,
}

impl AudioNetConfig {
    /// Full-size input `(778, 13, 1)`.
    pub fn standard() -> Self {
        Self {
            input_frames: 778,
            coefficients: 13,
            filters: 16,
            kernel: 3,
            dropout: 0.5,
            dense_width: 64,
            outputs: 2,
        }
    }

    /// Same layers on the first 16 MFCC frames.
    pub fn tiny() -> Self {
        Self {
            input_frames: 16,
            ..Self::standard()
        }
    }

    /// Width after two valid convolutions and flattening.
    pub fn flatten_width(&self) -> Result<usize> {
        let shrink = 2 * (self.kernel - 1);
        if self.input_frames <= shrink || self.coefficients <= shrink {
            return Err(Error::Config(format!(
                "audio net: input {}x{} too small for two valid {}x{} convolutions",
                self.input_frames, self.coefficients, self.kernel, self.kernel
            )));
        }
        Ok((self.input_frames - shrink) * (self.coefficients - shrink) * self.filters)
    }

    fn validate(&self) -> Result<()> {
        if self.filters == 0 || self.kernel == 0 || self.dense_width == 0 || self.outputs != 2 {
            return Err(Error::Config(format!("audio net: invalid config {self:?}")));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("audio net: dropout {} outside [0, 1)", self.dropout)));
        }
        self.flatten_width().map(|_| ())
    }

    /// Network input shape `(1, frames, coefficients)`.
    pub fn input_shape(&self) -> [usize; 3] {
        [1, self.input_frames, self.coefficients]
    }
}

#[derive(Clone, Debug)]
pub struct AudioNet<T> {
    pub config: AudioNetConfig,
    pub net: Sequential<T>,
}

impl<T: Scalar> AudioNet<T> {
    pub fn build(config: AudioNetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let k = config.kernel;
        let mut init = Initializer::new(seed);
        let mut net = Sequential::new();
        net.push_conv2d(ConvSpec::new(1, config.filters, (k, k), 1, Padding::Valid), &mut init)
            .push(Layer::Activation(Activation::Relu))
            .push_conv2d(ConvSpec::new(config.filters, config.filters, (k, k), 1, Padding::Valid), &mut init)
            .push(Layer::Activation(Activation::Relu))
            .push(Layer::Flatten)
            .push(Layer::Dropout { rate: config.dropout })
            .push_dense(config.flatten_width()?, config.dense_width, &mut init)
            .push(Layer::Activation(Activation::Relu))
            .push_dense(config.dense_width, config.outputs, &mut init)
            .push(Layer::Activation(Activation::Sigmoid));
        Ok(Self { config, net })
    }

    /// Accepts `(frames, coefficients, 1)` (the MFCC layout) or the network
    /// layout `(1, frames, coefficients)`; both hold the same row-major data.
    pub fn prepare_input(&self, mfcc: &Tensor<T>) -> Result<Tensor<T>> {
        let c = &self.config;
        if mfcc.shape() == [c.input_frames, c.coefficients, 1] || mfcc.shape() == c.input_shape() {
            mfcc.clone().reshape(&c.input_shape())
        } else {
            Err(Error::dim(format!(
                "audio net expects MFCC ({}, {}, 1), got {:?}",
                c.input_frames,
                c.coefficients,
                mfcc.shape()
            )))
        }
    }

    pub fn forward_raw(&self, mfcc: &Tensor<T>, ctx: ForwardCtx) -> Result<Tensor<T>> {
        self.net.forward(&self.prepare_input(mfcc)?, ctx)
    }

    pub fn forward(&self, mfcc: &Tensor<T>, ctx: ForwardCtx) -> Result<ModalityOutput<T>> {
        ModalityOutput::from_network(&self.forward_raw(mfcc, ctx)?)
    }
}
