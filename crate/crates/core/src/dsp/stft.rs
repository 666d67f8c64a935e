use std::f64::consts::PI;

use super::fft::Radix2Fft;
use super::{FFT_LEN, HOP_LEN, WINDOW_LEN};
use crate::tensor::Tensor;
use crate::{Error, Result, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StftSpec {
    pub window_len: usize,
    pub hop: usize,
    pub fft_len: usize,
}

impl Default for StftSpec {
    fn default() -> Self {
        Self { window_len: WINDOW_LEN, hop: HOP_LEN, fft_len: FFT_LEN }
    }
}

/// `w[n] = 0.5·(1 − cos(2πn/N))`, `n ∈ [0, N)`.
pub fn hann_periodic<T: Scalar>(n: usize) -> Vec<T> {
    (0..n)
        .map(|i| T::lit(0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos())))
        .collect()
}

/// `floor((len − window) / hop) + 1`, or `None` if shorter than a window.
pub fn frame_count(len: usize, spec: &StftSpec) -> Option<usize> {
    (len >= spec.window_len).then(|| (len - spec.window_len) / spec.hop + 1)
}

/// Windowed frames, one per row: frame `t` covers `[t·hop, t·hop + window)`.
pub fn frame_and_window<T: Scalar>(samples: &[T], spec: &StftSpec) -> Result<Tensor<T>> {
    if spec.window_len == 0 || spec.hop == 0 {
        return Err(Error::Parameter(format!("invalid STFT spec {spec:?}")));
    }
    let n_frames = frame_count(samples.len(), spec)
        .ok_or(Error::InputTooShort { needed: spec.window_len, got: samples.len() })?;
    let window = hann_periodic::<T>(spec.window_len);
    let mut data = Vec::with_capacity(n_frames * spec.window_len);
    for t in 0..n_frames {
        let start = t * spec.hop;
        data.extend(samples[start..start + spec.window_len].iter().zip(&window).map(|(&s, &w)| s * w));
    }
    Tensor::new(vec![n_frames, spec.window_len], data)
}

/// `|X[k]|²` for bins `0..=fft_len/2` of every frame.
pub fn power_spectrogram<T: Scalar>(frames: &Tensor<T>, fft: &Radix2Fft<T>) -> Result<Tensor<T>> {
    frames.expect_rank(2, "power_spectrogram frames")?;
    let n = frames.shape()[1];
    if n != fft.len() {
        return Err(Error::dim(format!("frames of length {n} for an FFT of length {}", fft.len())));
    }
    let bins = n / 2 + 1;
    let mut out = Vec::with_capacity(frames.shape()[0] * bins);
    for frame in frames.data().chunks(n) {
        out.extend(fft.forward_real(frame)?.iter().map(|c| c.norm_sqr()));
    }
    Tensor::new(vec![frames.shape()[0], bins], out)
}
