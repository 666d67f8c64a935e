//! Layer stack with a hand-written backward pass per layer kind.

use super::factorized::{
    self, conv2plus1d_backward, projection_backward, projection_forward, Conv2Plus1DParams, Conv2Plus1DSpec,
    ProjectionSpec,
};
use super::params::{Initializer, ModelParams, ParamId, ParamKind};
use crate::tensor::{
    activation, activation_backward, conv2d, conv2d_backward, dropout_mask, global_avg_pool,
    global_avg_pool_backward, Activation, ConvSpec, GradTape, Mode, Tensor,
};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorizedIds {
    pub spec: Conv2Plus1DSpec,
    pub spatial_weight: ParamId,
    pub spatial_bias: ParamId,
    pub temporal_weight: ParamId,
    pub temporal_bias: ParamId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionIds {
    pub spec: ProjectionSpec,
    pub weight: ParamId,
    pub bias: ParamId,
}

/// `relu(conv_b(relu(conv_a(x))) + shortcut(x))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResidualIds {
    pub conv_a: FactorizedIds,
    pub conv_b: FactorizedIds,
    pub projection: Option<ProjectionIds>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Conv2d { spec: ConvSpec, weight: ParamId, bias: ParamId },
    Conv2Plus1D(FactorizedIds),
    Residual(ResidualIds),
    /// `y = W·vec(x) + b`, `W: outputs×inputs`.
    Dense { inputs: usize, outputs: usize, weight: ParamId, bias: ParamId },
    Activation(Activation),
    Flatten,
    Dropout { rate: f64 },
    GlobalAvgPool,
}

impl Layer {
    pub fn name(&self) -> String {
        match self {
            Layer::Conv2d { spec, .. } => format!(
                "conv2d {}->{} {}x{} stride {}x{} {:?}",
                spec.in_channels, spec.out_channels, spec.kernel_h, spec.kernel_w, spec.stride_h, spec.stride_w, spec.padding
            ),
            Layer::Conv2Plus1D(f) => format!(
                "conv2plus1d {}->{} stride s{} t{}",
                f.spec.in_channels, f.spec.out_channels, f.spec.spatial_stride, f.spec.temporal_stride
            ),
            Layer::Residual(r) => format!(
                "residual {}->{} stride s{} t{}{}",
                r.conv_a.spec.in_channels,
                r.conv_a.spec.out_channels,
                r.conv_a.spec.spatial_stride,
                r.conv_a.spec.temporal_stride,
                if r.projection.is_some() { " projection" } else { "" }
            ),
            Layer::Dense { inputs, outputs, .. } => format!("dense {inputs}->{outputs}"),
            Layer::Activation(a) => format!("{a:?}").to_lowercase(),
            Layer::Flatten => "flatten".into(),
            Layer::Dropout { rate } => format!("dropout {rate}"),
            Layer::GlobalAvgPool => "global_avg_pool".into(),
        }
    }
}

/// Mode and dropout seed for one forward pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ForwardCtx {
    pub mode: Mode,
    pub seed: u64,
}

impl ForwardCtx {
    pub fn eval() -> Self {
        Self { mode: Mode::Eval, seed: 0 }
    }

    pub fn train(seed: u64) -> Self {
        Self { mode: Mode::Train, seed }
    }

    fn layer_seed(&self, layer: usize) -> u64 {
        self.seed ^ (layer as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Ordered layers plus the parameters they reference.
#[derive(Clone, Debug)]
pub struct Sequential<T> {
    layers: Vec<Layer>,
    pub params: ModelParams<T>,
}

/// Architecture-level weight count mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// Weights actually stored.
    Factored,
    /// Every (2+1)D pair replaced by a full 3-D convolution of the same
    /// channel plan.
    Full3dEquivalent,
}

impl<T: Scalar> Sequential<T> {
    pub fn new() -> Self {
        Self {
            layers: Vec::new(),
            params: ModelParams::new(),
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_names(&self) -> Vec<String> {
        self.layers.iter().map(Layer::name).collect()
    }

    fn prefix(&self) -> String {
        format!("l{:02}", self.layers.len())
    }

    pub fn push(&mut self, layer: Layer) -> &mut Self {
        self.layers.push(layer);
        self
    }

    pub fn push_conv2d(&mut self, spec: ConvSpec, init: &mut Initializer) -> &mut Self {
        let p = self.prefix();
        let fan_in = spec.in_channels * spec.kernel_h * spec.kernel_w;
        let weight = self.params.push(
            format!("{p}.conv.weight"),
            ParamKind::Weight,
            init.he_uniform(&spec.weight_shape(), fan_in),
        );
        let bias = self.params.push(format!("{p}.conv.bias"), ParamKind::Bias, Tensor::zeros(&[spec.out_channels]));
        self.push(Layer::Conv2d { spec, weight, bias })
    }

    pub fn push_dense(&mut self, inputs: usize, outputs: usize, init: &mut Initializer) -> &mut Self {
        let p = self.prefix();
        let weight = self.params.push(
            format!("{p}.dense.weight"),
            ParamKind::Weight,
            init.he_uniform(&[outputs, inputs], inputs),
        );
        let bias = self.params.push(format!("{p}.dense.bias"), ParamKind::Bias, Tensor::zeros(&[outputs]));
        self.push(Layer::Dense { inputs, outputs, weight, bias })
    }

    fn add_factorized(&mut self, tag: &str, spec: Conv2Plus1DSpec, init: &mut Initializer) -> FactorizedIds {
        let (kh, kw) = spec.spatial_kernel;
        let kt = spec.temporal_kernel;
        let spatial_weight = self.params.push(
            format!("{tag}.spatial.weight"),
            ParamKind::Weight,
            init.he_uniform(&[spec.mid_channels, spec.in_channels, kh, kw], spec.in_channels * kh * kw),
        );
        let spatial_bias =
            self.params.push(format!("{tag}.spatial.bias"), ParamKind::Bias, Tensor::zeros(&[spec.mid_channels]));
        let temporal_weight = self.params.push(
            format!("{tag}.temporal.weight"),
            ParamKind::Weight,
            init.he_uniform(&[spec.out_channels, spec.mid_channels, kt, 1], spec.mid_channels * kt),
        );
        let temporal_bias =
            self.params.push(format!("{tag}.temporal.bias"), ParamKind::Bias, Tensor::zeros(&[spec.out_channels]));
        FactorizedIds { spec, spatial_weight, spatial_bias, temporal_weight, temporal_bias }
    }

    pub fn push_conv2plus1d(&mut self, spec: Conv2Plus1DSpec, init: &mut Initializer) -> &mut Self {
        let tag = format!("{}.c2p1", self.prefix());
        let ids = self.add_factorized(&tag, spec, init);
        self.push(Layer::Conv2Plus1D(ids))
    }

    /// Residual block; a projection shortcut is added exactly when a stride
    /// exceeds 1 or the channel count changes.
    pub fn push_residual(
        &mut self,
        in_channels: usize,
        out_channels: usize,
        spatial_stride: usize,
        temporal_stride: usize,
        init: &mut Initializer,
    ) -> &mut Self {
        let p = self.prefix();
        let conv_a = self.add_factorized(
            &format!("{p}.res.a"),
            Conv2Plus1DSpec::new(in_channels, out_channels, spatial_stride, temporal_stride),
            init,
        );
        let conv_b = self.add_factorized(&format!("{p}.res.b"), Conv2Plus1DSpec::new(out_channels, out_channels, 1, 1), init);
        let projection = (spatial_stride > 1 || temporal_stride > 1 || in_channels != out_channels).then(|| {
            let spec = ProjectionSpec { in_channels, out_channels, spatial_stride, temporal_stride };
            let weight = self.params.push(
                format!("{p}.res.proj.weight"),
                ParamKind::Weight,
                init.he_uniform(&[out_channels, in_channels, 1, 1], in_channels),
            );
            let bias = self.params.push(format!("{p}.res.proj.bias"), ParamKind::Bias, Tensor::zeros(&[out_channels]));
            ProjectionIds { spec, weight, bias }
        });
        self.push(Layer::Residual(ResidualIds { conv_a, conv_b, projection }))
    }

    /// Weight count (biases excluded) under `mode`.
    pub fn weight_count(&self, mode: CountMode) -> usize {
        let factorized = |f: &FactorizedIds| match mode {
            CountMode::Factored => f.spec.weight_count(),
            CountMode::Full3dEquivalent => f.spec.full3d_weight_count(),
        };
        self.layers
            .iter()
            .map(|l| match l {
                Layer::Conv2d { spec, .. } => spec.weight_count(),
                Layer::Conv2Plus1D(f) => factorized(f),
                Layer::Residual(r) => {
                    factorized(&r.conv_a)
                        + factorized(&r.conv_b)
                        + r.projection.map_or(0, |p| p.spec.weight_count())
                }
                Layer::Dense { inputs, outputs, .. } => inputs * outputs,
                _ => 0,
            })
            .sum()
    }

    pub fn forward(&self, x: &Tensor<T>, ctx: ForwardCtx) -> Result<Tensor<T>> {
        self.run_forward(&self.params, x, ctx, None)
    }

    /// Forward pass that records what each layer's backward needs.
    pub fn forward_taped(&self, x: &Tensor<T>, ctx: ForwardCtx, tape: &mut GradTape<T>) -> Result<Tensor<T>> {
        self.run_forward(&self.params, x, ctx, Some(tape))
    }

    /// Forward pass with externally supplied parameter values of the same
    /// layout (used by finite-difference checks).
    pub fn forward_with(&self, params: &ModelParams<T>, x: &Tensor<T>, ctx: ForwardCtx) -> Result<Tensor<T>> {
        self.run_forward(params, x, ctx, None)
    }

    fn run_forward(
        &self,
        params: &ModelParams<T>,
        x: &Tensor<T>,
        ctx: ForwardCtx,
        mut tape: Option<&mut GradTape<T>>,
    ) -> Result<Tensor<T>> {
        let mut cur = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let (next, saved) = forward_layer(params, layer, &cur, ctx, i)?;
            if let Some(tape) = tape.as_deref_mut() {
                tape.push(i, cur.shape(), saved);
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Replays `tape` in reverse, accumulating parameter gradients into
    /// `self.params`, and returns the gradient with respect to the input.
    pub fn backward(&mut self, tape: &mut GradTape<T>, grad_out: &Tensor<T>) -> Result<Tensor<T>> {
        let mut g = grad_out.clone();
        let mut expected = self.layers.len();
        while let Some(rec) = tape.pop() {
            if expected == 0 || rec.layer != expected - 1 {
                return Err(Error::Training(format!(
                    "tape out of order: got layer {}, expected {}",
                    rec.layer,
                    expected.wrapping_sub(1)
                )));
            }
            expected -= 1;
            g = backward_layer(&mut self.params, &self.layers[rec.layer], &rec.input_shape, &rec.saved, &g)?;
        }
        if expected != 0 {
            return Err(Error::Training(format!("tape ended early at layer {expected}")));
        }
        Ok(g)
    }
}

impl<T: Scalar> Default for Sequential<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn factorized_params<'a, T: Scalar>(params: &'a ModelParams<T>, f: &FactorizedIds) -> Conv2Plus1DParams<'a, T> {
    Conv2Plus1DParams {
        spatial_weight: params.value(f.spatial_weight),
        spatial_bias: params.value(f.spatial_bias),
        temporal_weight: params.value(f.temporal_weight),
        temporal_bias: params.value(f.temporal_bias),
    }
}

fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    activation(x, Activation::Relu)
}

fn forward_layer<T: Scalar>(
    params: &ModelParams<T>,
    layer: &Layer,
    x: &Tensor<T>,
    ctx: ForwardCtx,
    index: usize,
) -> Result<(Tensor<T>, Vec<Tensor<T>>)> {
    Ok(match layer {
        Layer::Conv2d { spec, weight, bias } => {
            let y = conv2d(x, params.value(*weight), params.value(*bias), spec)?;
            (y, vec![x.clone()])
        }
        Layer::Conv2Plus1D(f) => {
            let (y, pre) = factorized::forward_cached(x, &f.spec, &factorized_params(params, f))?;
            (y, vec![x.clone(), pre])
        }
        Layer::Residual(r) => {
            let (o_a, s_a) = factorized::forward_cached(x, &r.conv_a.spec, &factorized_params(params, &r.conv_a))?;
            let h = relu(&o_a);
            let (o_b, s_b) = factorized::forward_cached(&h, &r.conv_b.spec, &factorized_params(params, &r.conv_b))?;
            let shortcut = match &r.projection {
                Some(p) => projection_forward(x, &p.spec, params.value(p.weight), params.value(p.bias))?,
                None => x.clone(),
            };
            let mut z = o_b;
            z.add_assign(&shortcut)?;
            (relu(&z), vec![x.clone(), s_a, o_a, s_b, z])
        }
        Layer::Dense { inputs, outputs, weight, bias } => {
            if x.len() != *inputs {
                return Err(Error::dim(format!(
                    "dense layer expects {inputs} inputs, got shape {:?}",
                    x.shape()
                )));
            }
            let w = params.value(*weight).data();
            let mut y = params.value(*bias).data().to_vec();
            for (o, yo) in y.iter_mut().enumerate() {
                let row = &w[o * inputs..(o + 1) * inputs];
                *yo += row.iter().zip(x.data()).map(|(&a, &b)| a * b).sum::<T>();
            }
            (Tensor::new(vec![*outputs], y)?, vec![x.clone()])
        }
        Layer::Activation(kind) => {
            let y = activation(x, *kind);
            let saved = match kind {
                Activation::Relu => x.clone(),
                _ => y.clone(),
            };
            (y, vec![saved])
        }
        Layer::Flatten => {
            let y = x.clone().reshape(&[x.len()])?;
            (y, Vec::new())
        }
        Layer::Dropout { rate } => match dropout_mask::<T>(x.shape(), *rate, ctx.mode, ctx.layer_seed(index))? {
            None => (x.clone(), Vec::new()),
            Some(mask) => (x.zip_map(&mask, |a, m| a * m)?, vec![mask]),
        },
        Layer::GlobalAvgPool => (global_avg_pool(x)?, Vec::new()),
    })
}

fn backward_layer<T: Scalar>(
    params: &mut ModelParams<T>,
    layer: &Layer,
    input_shape: &[usize],
    saved: &[Tensor<T>],
    g: &Tensor<T>,
) -> Result<Tensor<T>> {
    Ok(match layer {
        Layer::Conv2d { spec, weight, bias } => {
            let grads = conv2d_backward(g, &saved[0], params.value(*weight), spec)?;
            params.accumulate(*weight, &grads.weights)?;
            params.accumulate(*bias, &grads.bias)?;
            grads.input
        }
        Layer::Conv2Plus1D(f) => factorized_backward(params, f, g, &saved[0], &saved[1])?,
        Layer::Residual(r) => {
            let (x, s_a, o_a, s_b, z) = (&saved[0], &saved[1], &saved[2], &saved[3], &saved[4]);
            let g_z = activation_backward(g, z, z, Activation::Relu)?;
            let h = relu(o_a);
            let g_h = factorized_backward(params, &r.conv_b, &g_z, &h, s_b)?;
            let g_oa = activation_backward(&g_h, o_a, o_a, Activation::Relu)?;
            let mut g_x = factorized_backward(params, &r.conv_a, &g_oa, x, s_a)?;
            match &r.projection {
                Some(p) => {
                    let (gx, gw, gb) = projection_backward(&g_z, x, &p.spec, params.value(p.weight))?;
                    params.accumulate(p.weight, &gw)?;
                    params.accumulate(p.bias, &gb)?;
                    g_x.add_assign(&gx)?;
                }
                None => g_x.add_assign(&g_z)?,
            }
            g_x
        }
        Layer::Dense { inputs, outputs, weight, bias } => {
            let x = &saved[0];
            let w = params.value(*weight).data().to_vec();
            let mut gw = vec![T::zero(); inputs * outputs];
            let mut gx = vec![T::zero(); *inputs];
            for (o, &go) in g.data().iter().enumerate() {
                let row = &w[o * inputs..(o + 1) * inputs];
                for ((gwi, gxi), (&xi, &wi)) in gw[o * inputs..(o + 1) * inputs]
                    .iter_mut()
                    .zip(gx.iter_mut())
                    .zip(x.data().iter().zip(row))
                {
                    *gwi = go * xi;
                    *gxi += go * wi;
                }
            }
            params.accumulate(*weight, &Tensor::new(vec![*outputs, *inputs], gw)?)?;
            params.accumulate(*bias, g)?;
            Tensor::new(x.shape().to_vec(), gx)?
        }
        Layer::Activation(kind) => activation_backward(g, &saved[0], &saved[0], *kind)?,
        Layer::Flatten => g.clone().reshape(input_shape)?,
        Layer::Dropout { .. } => match saved.first() {
            None => g.clone(),
            Some(mask) => g.zip_map(mask, |a, m| a * m)?,
        },
        Layer::GlobalAvgPool => global_avg_pool_backward(g, input_shape)?,
    })
}

fn factorized_backward<T: Scalar>(
    params: &mut ModelParams<T>,
    f: &FactorizedIds,
    g: &Tensor<T>,
    x: &Tensor<T>,
    pre: &Tensor<T>,
) -> Result<Tensor<T>> {
    let grads = conv2plus1d_backward(g, x, pre, &f.spec, &factorized_params(params, f))?;
    params.accumulate(f.spatial_weight, &grads.spatial_weight)?;
    params.accumulate(f.spatial_bias, &grads.spatial_bias)?;
    params.accumulate(f.temporal_weight, &grads.temporal_weight)?;
    params.accumulate(f.temporal_bias, &grads.temporal_bias)?;
    Ok(grads.input)
}
