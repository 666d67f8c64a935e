use super::Tensor;
use crate::{Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    /// Softmax over the last axis; a rank-0 tensor is treated as length 1.
    SoftmaxLastDim,
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

fn last_dim<T: Scalar>(x: &Tensor<T>) -> usize {
    x.shape().last().copied().unwrap_or(1)
}

pub fn activation<T: Scalar>(x: &Tensor<T>, kind: Activation) -> Tensor<T> {
    match kind {
        Activation::Relu => x.map(|v| if v > T::zero() { v } else { T::zero() }),
        Activation::Sigmoid => x.map(sigmoid),
        Activation::SoftmaxLastDim => {
            let mut y = x.clone();
            for row in y.data_mut().chunks_mut(last_dim(x)) {
                let max = row.iter().copied().fold(T::neg_infinity(), T::max);
                let mut total = T::zero();
                for v in row.iter_mut() {
                    *v = (*v - max).exp();
                    total += *v;
                }
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
            y
        }
    }
}

/// Backward of [`activation`]. ReLU reads the forward `input`; sigmoid and
/// softmax read the forward `output`.
pub fn activation_backward<T: Scalar>(
    grad_out: &Tensor<T>,
    input: &Tensor<T>,
    output: &Tensor<T>,
    kind: Activation,
) -> Result<Tensor<T>> {
    match kind {
        Activation::Relu => grad_out.zip_map(input, |g, x| if x > T::zero() { g } else { T::zero() }),
        Activation::Sigmoid => grad_out.zip_map(output, |g, y| g * y * (T::one() - y)),
        Activation::SoftmaxLastDim => {
            grad_out.expect_same_shape(output)?;
            let n = last_dim(output);
            let mut gx = grad_out.clone();
            for (g_row, y_row) in gx.data_mut().chunks_mut(n).zip(output.data().chunks(n)) {
                let dot: T = g_row.iter().zip(y_row).map(|(&g, &y)| g * y).sum();
                for (g, &y) in g_row.iter_mut().zip(y_row) {
                    *g = y * (*g - dot);
                }
            }
            Ok(gx)
        }
    }
}
