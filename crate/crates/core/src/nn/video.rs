//! Residual (2+1)D video classifier emitting a softmax pair `y_v`.

use super::factorized::{Conv2Plus1DSpec, ProjectionSpec};
use super::fusion::ModalityOutput;
use super::params::Initializer;
use super::sequential::{CountMode, ForwardCtx, Layer, Sequential};
use crate::tensor::{Activation, Tensor};
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VideoNetConfig {
    pub channels: usize,
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    pub stem_channels: usize,
    /// Output channels of each stage; every stage after the first starts
    /// with a block strided by 2 in space and time.
    pub stage_channels: Vec<usize>,
    pub blocks_per_stage: usize,
    pub num_classes: usize,
}

/// One step of the construction plan shared by [`VideoNet::build`] and the
/// allocation-free weight counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanStep {
    Stem(Conv2Plus1DSpec),
    Block {
        conv_a: Conv2Plus1DSpec,
        conv_b: Conv2Plus1DSpec,
        projection: Option<ProjectionSpec>,
    },
    Head { inputs: usize, outputs: usize },
}

impl VideoNetConfig {
    /// RGB, 16 frames of 112×112, ResNet-18 channel plan.
    pub fn full() -> Self {
        Self {
            channels: 3,
            frames: 16,
            height: 112,
            width: 112,
            stem_channels: 64,
            stage_channels: vec![64, 128, 256, 512],
            blocks_per_stage: 2,
            num_classes: 2,
        }
    }

    pub fn tiny() -> Self {
        Self {
            channels: 1,
            frames: 4,
            height: 16,
            width: 16,
            stem_channels: 8,
            stage_channels: vec![8, 16],
            blocks_per_stage: 1,
            num_classes: 2,
        }
    }

    pub fn input_shape(&self) -> [usize; 4] {
        [self.channels, self.frames, self.height, self.width]
    }

    /// Validates the geometry stage by stage and returns the layer plan.
    pub fn plan(&self) -> Result<Vec<PlanStep>> {
        let fields = [
            ("channels", self.channels),
            ("frames", self.frames),
            ("height", self.height),
            ("width", self.width),
            ("stem_channels", self.stem_channels),
            ("blocks_per_stage", self.blocks_per_stage),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("video net: {name} must be at least 1")));
        }
        if self.num_classes != 2 {
            return Err(Error::Config(format!("video net: num_classes must be 2, got {}", self.num_classes)));
        }
        if self.stage_channels.is_empty() || self.stage_channels.contains(&0) {
            return Err(Error::Config(format!(
                "video net: stage channels {:?} must be nonempty and positive",
                self.stage_channels
            )));
        }

        let stage_err = |stage: &str, e: Error| Error::Config(format!("video net {stage}: {e}"));
        let mut plan = Vec::new();
        let stem = Conv2Plus1DSpec::new(self.channels, self.stem_channels, 1, 1);
        let mut shape = stem.output_shape(self.input_shape()).map_err(|e| stage_err("stem", e))?;
        plan.push(PlanStep::Stem(stem));
        let mut in_c = self.stem_channels;
        for (s, &out_c) in self.stage_channels.iter().enumerate() {
            for b in 0..self.blocks_per_stage {
                let stride = if s > 0 && b == 0 { 2 } else { 1 };
                let conv_a = Conv2Plus1DSpec::new(in_c, out_c, stride, stride);
                let conv_b = Conv2Plus1DSpec::new(out_c, out_c, 1, 1);
                let projection = (stride > 1 || in_c != out_c).then_some(ProjectionSpec {
                    in_channels: in_c,
                    out_channels: out_c,
                    spatial_stride: stride,
                    temporal_stride: stride,
                });
                let stage = format!("stage {} block {}", s + 1, b + 1);
                shape = conv_a.output_shape(shape).map_err(|e| stage_err(&stage, e))?;
                shape = conv_b.output_shape(shape).map_err(|e| stage_err(&stage, e))?;
                if shape.contains(&0) {
                    return Err(Error::Config(format!("video net {stage}: dimension below 1 ({shape:?})")));
                }
                plan.push(PlanStep::Block { conv_a, conv_b, projection });
                in_c = out_c;
            }
        }
        plan.push(PlanStep::Head { inputs: in_c, outputs: self.num_classes });
        Ok(plan)
    }

    /// Weight count (biases excluded) without allocating any parameters.
    pub fn weight_count(&self, mode: CountMode) -> Result<usize> {
        let conv = |s: &Conv2Plus1DSpec| match mode {
            CountMode::Factored => s.weight_count(),
            CountMode::Full3dEquivalent => s.full3d_weight_count(),
        };
        Ok(self
            .plan()?
            .iter()
            .map(|step| match step {
                PlanStep::Stem(s) => conv(s),
                PlanStep::Block { conv_a, conv_b, projection } => {
                    conv(conv_a) + conv(conv_b) + projection.map_or(0, |p| p.weight_count())
                }
                PlanStep::Head { inputs, outputs } => inputs * outputs,
            })
            .sum())
    }
}

#[derive(Clone, Debug)]
pub struct VideoNet<T> {
    pub config: VideoNetConfig,
    pub net: Sequential<T>,
}

impl<T: Scalar> VideoNet<T> {
    /// Stem + residual stages + global average pool + dense + softmax.
    /// Weights He-uniform from `seed`, biases zero.
    pub fn build(config: VideoNetConfig, seed: u64) -> Result<Self> {
        let plan = config.plan()?;
        let mut init = Initializer::new(seed);
        let mut net = Sequential::new();
        for step in plan {
            match step {
                PlanStep::Stem(spec) => {
                    net.push_conv2plus1d(spec, &mut init);
                    net.push(Layer::Activation(Activation::Relu));
                }
                PlanStep::Block { conv_a, .. } => {
                    net.push_residual(
                        conv_a.in_channels,
                        conv_a.out_channels,
                        conv_a.spatial_stride,
                        conv_a.temporal_stride,
                        &mut init,
                    );
                }
                PlanStep::Head { inputs, outputs } => {
                    net.push(Layer::GlobalAvgPool);
                    net.push_dense(inputs, outputs, &mut init);
                    net.push(Layer::Activation(Activation::SoftmaxLastDim));
                }
            }
        }
        Ok(Self { config, net })
    }

    pub fn param_count(&self, mode: CountMode) -> usize {
        self.net.weight_count(mode)
    }

    pub fn check_input(&self, clip: &Tensor<T>) -> Result<()> {
        clip.expect_shape(&self.config.input_shape(), "video clip")
    }

    /// Raw 2-way softmax output.
    pub fn forward_raw(&self, clip: &Tensor<T>) -> Result<Tensor<T>> {
        self.check_input(clip)?;
        self.net.forward(clip, ForwardCtx::eval())
    }

    pub fn forward(&self, clip: &Tensor<T>) -> Result<ModalityOutput<T>> {
        ModalityOutput::from_network(&self.forward_raw(clip)?)
    }

    /// One clip at a time; equal bitwise to calling [`Self::forward`] per clip.
    pub fn forward_batch(&self, clips: &[Tensor<T>]) -> Result<Vec<ModalityOutput<T>>> {
        clips.iter().map(|c| self.forward(c)).collect()
    }
}
