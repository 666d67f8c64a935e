//! 2-D cross-correlation over `C×H×W` inputs.
//!
//! The fast path lowers the convolution to a matrix product via im2col; the
//! nested-loop [`conv2d_direct`] is kept alongside as the reference.

use super::matmul::{gemm, gemm_a_bt, gemm_at_b};
use super::Tensor;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Padding {
    /// No padding.
    Valid,
    /// `kernel − 1` zeros per axis, split evenly with the odd one on the
    /// bottom/right. Stride 1 preserves the spatial size; stride `s` gives
    /// `ceil(n / s)`.
    Same,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_h: usize,
    pub kernel_w: usize,
    pub stride_h: usize,
    pub stride_w: usize,
    pub padding: Padding,
}

impl ConvSpec {
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: (usize, usize),
        stride: usize,
        padding: Padding,
    ) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel_h: kernel.0,
            kernel_w: kernel.1,
            stride_h: stride,
            stride_w: stride,
            padding,
        }
    }

    pub fn with_strides(mut self, stride_h: usize, stride_w: usize) -> Self {
        self.stride_h = stride_h;
        self.stride_w = stride_w;
        self
    }

    pub fn weight_shape(&self) -> [usize; 4] {
        [self.out_channels, self.in_channels, self.kernel_h, self.kernel_w]
    }

    pub fn weight_count(&self) -> usize {
        self.weight_shape().iter().product()
    }

    /// `(top, bottom, left, right)` zero padding.
    pub fn pads(&self) -> (usize, usize, usize, usize) {
        match self.padding {
            Padding::Valid => (0, 0, 0, 0),
            Padding::Same => {
                let th = self.kernel_h - 1;
                let tw = self.kernel_w - 1;
                (th / 2, th - th / 2, tw / 2, tw - tw / 2)
            }
        }
    }

    /// `floor((in + pad_total − kernel) / stride) + 1` per axis.
    pub fn output_size(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        self.validate()?;
        let (t, b, l, r) = self.pads();
        let (ph, pw) = (h + t + b, w + l + r);
        if ph < self.kernel_h || pw < self.kernel_w {
            return Err(Error::dim(format!(
                "conv2d: kernel {}x{} larger than padded input {ph}x{pw}",
                self.kernel_h, self.kernel_w
            )));
        }
        Ok((
            (ph - self.kernel_h) / self.stride_h + 1,
            (pw - self.kernel_w) / self.stride_w + 1,
        ))
    }

    fn validate(&self) -> Result<()> {
        if [
            self.in_channels,
            self.out_channels,
            self.kernel_h,
            self.kernel_w,
            self.stride_h,
            self.stride_w,
        ]
        .contains(&0)
        {
            return Err(Error::Parameter(format!("conv spec has a zero field: {self:?}")));
        }
        Ok(())
    }

    fn check_operands<T: Scalar>(&self, input: &Tensor<T>, weights: &Tensor<T>) -> Result<(usize, usize)> {
        input.expect_rank(3, "conv2d input")?;
        if input.shape()[0] != self.in_channels {
            return Err(Error::dim(format!(
                "conv2d: input {:?} has {} channels, spec expects {}",
                input.shape(),
                input.shape()[0],
                self.in_channels
            )));
        }
        weights.expect_shape(&self.weight_shape(), "conv2d weights")?;
        self.output_size(input.shape()[1], input.shape()[2])
    }
}

#[derive(Clone, Debug)]
pub struct Conv2dGrads<T> {
    pub input: Tensor<T>,
    pub weights: Tensor<T>,
    pub bias: Tensor<T>,
}

struct Geometry {
    c: usize,
    h: usize,
    w: usize,
    oh: usize,
    ow: usize,
    kh: usize,
    kw: usize,
    sh: usize,
    sw: usize,
    top: isize,
    left: isize,
}

impl Geometry {
    fn new(spec: &ConvSpec, h: usize, w: usize, oh: usize, ow: usize) -> Self {
        let (top, _, left, _) = spec.pads();
        Self {
            c: spec.in_channels,
            h,
            w,
            oh,
            ow,
            kh: spec.kernel_h,
            kw: spec.kernel_w,
            sh: spec.stride_h,
            sw: spec.stride_w,
            top: top as isize,
            left: left as isize,
        }
    }

    fn rows(&self) -> usize {
        self.c * self.kh * self.kw
    }

    fn cols(&self) -> usize {
        self.oh * self.ow
    }

    /// Source pixel of patch element `(ki, kj)` for output `(oy, ox)`, or
    /// `None` when it lands in the zero padding.
    #[inline]
    fn source(&self, oy: usize, ox: usize, ki: usize, kj: usize) -> Option<(usize, usize)> {
        let y = (oy * self.sh + ki) as isize - self.top;
        let x = (ox * self.sw + kj) as isize - self.left;
        if y < 0 || x < 0 || y >= self.h as isize || x >= self.w as isize {
            None
        } else {
            Some((y as usize, x as usize))
        }
    }
}

fn im2col<T: Scalar>(g: &Geometry, x: &[T]) -> Vec<T> {
    let p = g.cols();
    let mut cols = vec![T::zero(); g.rows() * p];
    for c in 0..g.c {
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let row = (c * g.kh + ki) * g.kw + kj;
                let dst = &mut cols[row * p..(row + 1) * p];
                for oy in 0..g.oh {
                    for ox in 0..g.ow {
                        if let Some((y, xx)) = g.source(oy, ox, ki, kj) {
                            dst[oy * g.ow + ox] = x[(c * g.h + y) * g.w + xx];
                        }
                    }
                }
            }
        }
    }
    cols
}

fn col2im<T: Scalar>(g: &Geometry, cols: &[T]) -> Vec<T> {
    let p = g.cols();
    let mut x = vec![T::zero(); g.c * g.h * g.w];
    for c in 0..g.c {
        for ki in 0..g.kh {
            for kj in 0..g.kw {
                let row = (c * g.kh + ki) * g.kw + kj;
                let src = &cols[row * p..(row + 1) * p];
                for oy in 0..g.oh {
                    for ox in 0..g.ow {
                        if let Some((y, xx)) = g.source(oy, ox, ki, kj) {
                            x[(c * g.h + y) * g.w + xx] += src[oy * g.ow + ox];
                        }
                    }
                }
            }
        }
    }
    x
}

/// Cross-correlation (no kernel flip) of `input: C_in×H×W` with
/// `weights: C_out×C_in×kh×kw`, plus a per-channel bias.
pub fn conv2d<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
    spec: &ConvSpec,
) -> Result<Tensor<T>> {
    let (oh, ow) = spec.check_operands(input, weights)?;
    bias.expect_shape(&[spec.out_channels], "conv2d bias")?;
    let (h, w) = (input.shape()[1], input.shape()[2]);
    let g = Geometry::new(spec, h, w, oh, ow);
    let cols = im2col(&g, input.data());
    let p = g.cols();
    let mut out = vec![T::zero(); spec.out_channels * p];
    for (o, row) in out.chunks_mut(p).enumerate() {
        row.fill(bias.data()[o]);
    }
    gemm(spec.out_channels, g.rows(), p, weights.data(), &cols, &mut out);
    Tensor::new(vec![spec.out_channels, oh, ow], out)
}

/// Nested-loop reference for [`conv2d`].
pub fn conv2d_direct<T: Scalar>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    bias: &Tensor<T>,
    spec: &ConvSpec,
) -> Result<Tensor<T>> {
    let (oh, ow) = spec.check_operands(input, weights)?;
    bias.expect_shape(&[spec.out_channels], "conv2d bias")?;
    let (h, w) = (input.shape()[1], input.shape()[2]);
    let g = Geometry::new(spec, h, w, oh, ow);
    let mut out = Tensor::zeros(&[spec.out_channels, oh, ow]);
    for o in 0..spec.out_channels {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = bias.data()[o];
                for c in 0..g.c {
                    for ki in 0..g.kh {
                        for kj in 0..g.kw {
                            if let Some((y, x)) = g.source(oy, ox, ki, kj) {
                                acc += weights.at(&[o, c, ki, kj]) * input.at(&[c, y, x]);
                            }
                        }
                    }
                }
                out.set(&[o, oy, ox], acc);
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv2d`] with respect to its input, weights and bias.
pub fn conv2d_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    saved_input: &Tensor<T>,
    weights: &Tensor<T>,
    spec: &ConvSpec,
) -> Result<Conv2dGrads<T>> {
    let (oh, ow) = spec.check_operands(saved_input, weights)?;
    grad_out.expect_shape(&[spec.out_channels, oh, ow], "conv2d grad_out")?;
    let (h, w) = (saved_input.shape()[1], saved_input.shape()[2]);
    let g = Geometry::new(spec, h, w, oh, ow);
    let (k, p, o) = (g.rows(), g.cols(), spec.out_channels);

    let cols = im2col(&g, saved_input.data());
    let mut gw = vec![T::zero(); o * k];
    gemm_a_bt(o, p, k, grad_out.data(), &cols, &mut gw);
    let gb: Vec<T> = grad_out.data().chunks(p).map(|r| r.iter().copied().sum()).collect();
    let mut gcols = vec![T::zero(); k * p];
    gemm_at_b(k, o, p, weights.data(), grad_out.data(), &mut gcols);
    let gx = col2im(&g, &gcols);

    Ok(Conv2dGrads {
        input: Tensor::new(saved_input.shape().to_vec(), gx)?,
        weights: Tensor::new(weights.shape().to_vec(), gw)?,
        bias: Tensor::new(vec![o], gb)?,
    })
}
