use super::Tensor;
use crate::{Result, Scalar};

/// Per-channel (axis 0) mean over every remaining axis.
pub fn global_avg_pool<T: Scalar>(x: &Tensor<T>) -> Result<Tensor<T>> {
    if x.rank() == 0 {
        return Ok(Tensor::from_vec(vec![x.data()[0]]));
    }
    let c = x.shape()[0];
    let per = x.len() / c;
    let inv = T::one() / T::from_usize_lossy(per);
    let means = x
        .data()
        .chunks(per)
        .map(|chunk| chunk.iter().copied().sum::<T>() * inv)
        .collect();
    Tensor::new(vec![c], means)
}

pub fn global_avg_pool_backward<T: Scalar>(grad_out: &Tensor<T>, input_shape: &[usize]) -> Result<Tensor<T>> {
    let c = input_shape.first().copied().unwrap_or(1);
    grad_out.expect_shape(&[c], "global_avg_pool grad_out")?;
    let per: usize = input_shape.iter().skip(1).product();
    let inv = T::one() / T::from_usize_lossy(per);
    let data = grad_out
        .data()
        .iter()
        .flat_map(|&g| std::iter::repeat_n(g * inv, per))
        .collect();
    Tensor::new(input_shape.to_vec(), data)
}
