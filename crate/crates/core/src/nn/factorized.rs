//! (2+1)D factorized convolution over `C×T×H×W` clips.
//!
//! A 3×3×3 kernel is split into a per-frame 3×3 spatial convolution
//! (`in → mid` channels) followed by a per-pixel length-3 temporal
//! convolution (`mid → out`), with a ReLU in between. Both steps are plain
//! [`conv2d`] calls: the spatial one on each frame, the temporal one on the
//! `mid×T×(H·W)` view of the intermediate, which is already contiguous.

use crate::tensor::{
    activation, activation_backward, conv2d, conv2d_backward, Activation, ConvSpec, Padding, Tensor,
};
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conv2Plus1DSpec {
    pub in_channels: usize,
    pub mid_channels: usize,
    pub out_channels: usize,
    pub spatial_kernel: (usize, usize),
    pub temporal_kernel: usize,
    pub spatial_stride: usize,
    pub temporal_stride: usize,
}

impl Conv2Plus1DSpec {
    /// 3×3 spatial, length-3 temporal, `mid == out`.
    pub fn new(in_channels: usize, out_channels: usize, spatial_stride: usize, temporal_stride: usize) -> Self {
        Self {
            in_channels,
            mid_channels: out_channels,
            out_channels,
            spatial_kernel: (3, 3),
            temporal_kernel: 3,
            spatial_stride,
            temporal_stride,
        }
    }

    pub fn spatial_conv(&self) -> ConvSpec {
        ConvSpec::new(
            self.in_channels,
            self.mid_channels,
            self.spatial_kernel,
            self.spatial_stride,
            Padding::Same,
        )
    }

    pub fn temporal_conv(&self) -> ConvSpec {
        ConvSpec::new(
            self.mid_channels,
            self.out_channels,
            (self.temporal_kernel, 1),
            1,
            Padding::Same,
        )
        .with_strides(self.temporal_stride, 1)
    }

    /// Stored weights of the factorized pair (biases excluded).
    pub fn weight_count(&self) -> usize {
        let (kh, kw) = self.spatial_kernel;
        kh * kw * self.in_channels * self.mid_channels
            + self.temporal_kernel * self.mid_channels * self.out_channels
    }

    /// Weights of a full `kt×kh×kw` 3-D convolution with the same channels.
    pub fn full3d_weight_count(&self) -> usize {
        let (kh, kw) = self.spatial_kernel;
        self.temporal_kernel * kh * kw * self.in_channels * self.out_channels
    }

    /// `(C, T, H, W)` after this block, or a dimension error.
    pub fn output_shape(&self, input: [usize; 4]) -> Result<[usize; 4]> {
        let [c, t, h, w] = input;
        if c != self.in_channels {
            return Err(Error::dim(format!(
                "conv2plus1d: input has {c} channels, spec expects {}",
                self.in_channels
            )));
        }
        let (oh, ow) = self.spatial_conv().output_size(h, w)?;
        let (ot, _) = self.temporal_conv().output_size(t, oh * ow)?;
        Ok([self.out_channels, ot, oh, ow])
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Conv2Plus1DParams<'a, T> {
    pub spatial_weight: &'a Tensor<T>,
    pub spatial_bias: &'a Tensor<T>,
    pub temporal_weight: &'a Tensor<T>,
    pub temporal_bias: &'a Tensor<T>,
}

#[derive(Clone, Debug)]
pub struct Conv2Plus1DGrads<T> {
    pub input: Tensor<T>,
    pub spatial_weight: Tensor<T>,
    pub spatial_bias: Tensor<T>,
    pub temporal_weight: Tensor<T>,
    pub temporal_bias: Tensor<T>,
}

fn dims4<T: Scalar>(x: &Tensor<T>, what: &str) -> Result<[usize; 4]> {
    x.expect_rank(4, what)?;
    let s = x.shape();
    Ok([s[0], s[1], s[2], s[3]])
}

/// Copies frame `t` of a `C×T×H×W` tensor into a `C×H×W` tensor.
pub(crate) fn frame<T: Scalar>(x: &Tensor<T>, t: usize) -> Tensor<T> {
    let [c, tt, h, w] = [x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]];
    let plane = h * w;
    let mut data = Vec::with_capacity(c * plane);
    for ch in 0..c {
        let start = (ch * tt + t) * plane;
        data.extend_from_slice(&x.data()[start..start + plane]);
    }
    Tensor::new(vec![c, h, w], data).expect("frame shape")
}

/// Adds a `C×H×W` frame into slot `t` of a `C×T×H×W` buffer.
pub(crate) fn add_frame<T: Scalar>(dst: &mut Tensor<T>, t: usize, src: &Tensor<T>) {
    let [c, tt, h, w] = [dst.shape()[0], dst.shape()[1], dst.shape()[2], dst.shape()[3]];
    let plane = h * w;
    let dst = dst.data_mut();
    for ch in 0..c {
        let start = (ch * tt + t) * plane;
        for (d, &s) in dst[start..start + plane].iter_mut().zip(&src.data()[ch * plane..(ch + 1) * plane]) {
            *d += s;
        }
    }
}

/// Forward pass returning `(output, spatial_pre_activation)`.
pub(crate) fn forward_cached<T: Scalar>(
    x: &Tensor<T>,
    spec: &Conv2Plus1DSpec,
    p: &Conv2Plus1DParams<'_, T>,
) -> Result<(Tensor<T>, Tensor<T>)> {
    let [_, t, _, _] = dims4(x, "conv2plus1d input")?;
    let [_, ot, oh, ow] = spec.output_shape(dims4(x, "conv2plus1d input")?)?;
    let sconv = spec.spatial_conv();
    let mut spatial = Tensor::zeros(&[spec.mid_channels, t, oh, ow]);
    for ti in 0..t {
        let y = conv2d(&frame(x, ti), p.spatial_weight, p.spatial_bias, &sconv)?;
        add_frame(&mut spatial, ti, &y);
    }
    let hidden = activation(&spatial, Activation::Relu).reshape(&[spec.mid_channels, t, oh * ow])?;
    let out = conv2d(&hidden, p.temporal_weight, p.temporal_bias, &spec.temporal_conv())?;
    Ok((out.reshape(&[spec.out_channels, ot, oh, ow])?, spatial))
}

/// Spatial-then-temporal factorized convolution with a ReLU between steps.
pub fn conv2plus1d<T: Scalar>(
    x: &Tensor<T>,
    spec: &Conv2Plus1DSpec,
    params: &Conv2Plus1DParams<'_, T>,
) -> Result<Tensor<T>> {
    forward_cached(x, spec, params).map(|(y, _)| y)
}

pub fn conv2plus1d_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    x: &Tensor<T>,
    spatial_pre: &Tensor<T>,
    spec: &Conv2Plus1DSpec,
    p: &Conv2Plus1DParams<'_, T>,
) -> Result<Conv2Plus1DGrads<T>> {
    let in_dims = dims4(x, "conv2plus1d input")?;
    let [oc, ot, oh, ow] = spec.output_shape(in_dims)?;
    grad_out.expect_shape(&[oc, ot, oh, ow], "conv2plus1d grad_out")?;
    let t = in_dims[1];
    let mid = spec.mid_channels;

    let hidden = activation(spatial_pre, Activation::Relu).reshape(&[mid, t, oh * ow])?;
    let g_out = grad_out.clone().reshape(&[oc, ot, oh * ow])?;
    let tg = conv2d_backward(&g_out, &hidden, p.temporal_weight, &spec.temporal_conv())?;
    let g_hidden = tg.input.reshape(&[mid, t, oh, ow])?;
    let g_spatial = activation_backward(&g_hidden, spatial_pre, spatial_pre, Activation::Relu)?;

    let sconv = spec.spatial_conv();
    let mut g_x = Tensor::zeros(x.shape());
    let mut g_sw = Tensor::zeros(p.spatial_weight.shape());
    let mut g_sb = Tensor::zeros(p.spatial_bias.shape());
    for ti in 0..t {
        let sg = conv2d_backward(&frame(&g_spatial, ti), &frame(x, ti), p.spatial_weight, &sconv)?;
        add_frame(&mut g_x, ti, &sg.input);
        g_sw.add_assign(&sg.weights)?;
        g_sb.add_assign(&sg.bias)?;
    }
    Ok(Conv2Plus1DGrads {
        input: g_x,
        spatial_weight: g_sw,
        spatial_bias: g_sb,
        temporal_weight: tg.weights,
        temporal_bias: tg.bias,
    })
}

/// 1×1×1 strided projection used on residual shortcuts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProjectionSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub spatial_stride: usize,
    pub temporal_stride: usize,
}

impl ProjectionSpec {
    fn conv(&self) -> ConvSpec {
        ConvSpec::new(self.in_channels, self.out_channels, (1, 1), self.spatial_stride, Padding::Valid)
    }

    pub fn weight_count(&self) -> usize {
        self.in_channels * self.out_channels
    }

    pub fn output_shape(&self, input: [usize; 4]) -> Result<[usize; 4]> {
        let [c, t, h, w] = input;
        if c != self.in_channels {
            return Err(Error::dim(format!(
                "projection: input has {c} channels, spec expects {}",
                self.in_channels
            )));
        }
        let (oh, ow) = self.conv().output_size(h, w)?;
        Ok([self.out_channels, (t - 1) / self.temporal_stride + 1, oh, ow])
    }
}

pub(crate) fn projection_forward<T: Scalar>(
    x: &Tensor<T>,
    spec: &ProjectionSpec,
    weight: &Tensor<T>,
    bias: &Tensor<T>,
) -> Result<Tensor<T>> {
    let [oc, ot, oh, ow] = spec.output_shape(dims4(x, "projection input")?)?;
    let mut out = Tensor::zeros(&[oc, ot, oh, ow]);
    for to in 0..ot {
        let y = conv2d(&frame(x, to * spec.temporal_stride), weight, bias, &spec.conv())?;
        add_frame(&mut out, to, &y);
    }
    Ok(out)
}

/// Returns `(grad_input, grad_weight, grad_bias)`.
pub(crate) fn projection_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    x: &Tensor<T>,
    spec: &ProjectionSpec,
    weight: &Tensor<T>,
) -> Result<(Tensor<T>, Tensor<T>, Tensor<T>)> {
    let out_shape = spec.output_shape(dims4(x, "projection input")?)?;
    grad_out.expect_shape(&out_shape, "projection grad_out")?;
    let mut g_x = Tensor::zeros(x.shape());
    let mut g_w = Tensor::zeros(weight.shape());
    let mut g_b = Tensor::zeros(&[spec.out_channels]);
    for to in 0..out_shape[1] {
        let ti = to * spec.temporal_stride;
        let g = conv2d_backward(&frame(grad_out, to), &frame(x, ti), weight, &spec.conv())?;
        add_frame(&mut g_x, ti, &g.input);
        g_w.add_assign(&g.weights)?;
        g_b.add_assign(&g.bias)?;
    }
    Ok((g_x, g_w, g_b))
}
