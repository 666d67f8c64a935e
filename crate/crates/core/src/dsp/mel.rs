use super::{FFT_LEN, MEL_F_MAX_HZ, MEL_F_MIN_HZ, N_MEL_FILTERS, SAMPLE_RATE_HZ};
use crate::tensor::Tensor;
use crate::{Error, Result, Scalar};

/// HTK mel scale, `2595·log10(1 + f/700)`.
pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular filters, peak value 1, sampled at FFT bin centre frequencies.
#[derive(Clone, Debug)]
pub struct MelBank<T> {
    /// `n_filters × (fft_len/2 + 1)`.
    pub matrix: Tensor<T>,
    /// `n_filters + 2` mel-equidistant edges in Hz; filter `i` spans
    /// `edges[i]..edges[i+2]` and peaks at `edges[i+1]`.
    pub edges_hz: Vec<f64>,
    pub bin_hz: f64,
}

impl<T: Scalar> MelBank<T> {
    pub fn new(n_filters: usize, fft_len: usize, sample_rate_hz: u32, f_min: f64, f_max: f64) -> Result<Self> {
        if n_filters == 0 || fft_len < 2 || !(f_min >= 0.0 && f_min < f_max) {
            return Err(Error::Parameter(format!(
                "mel bank: {n_filters} filters, fft {fft_len}, range {f_min}..{f_max}"
            )));
        }
        let (m_lo, m_hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
        let n_edges = n_filters + 2;
        let edges_hz: Vec<f64> = (0..n_edges)
            .map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n_edges - 1) as f64))
            .collect();
        let n_bins = fft_len / 2 + 1;
        let bin_hz = f64::from(sample_rate_hz) / fft_len as f64;
        let mut data = Vec::with_capacity(n_filters * n_bins);
        for i in 0..n_filters {
            let (lo, peak, hi) = (edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]);
            data.extend((0..n_bins).map(|k| {
                let f = k as f64 * bin_hz;
                let w = if f <= lo || f >= hi {
                    0.0
                } else if f <= peak {
                    (f - lo) / (peak - lo)
                } else {
                    (hi - f) / (hi - peak)
                };
                T::lit(w)
            }));
        }
        Ok(Self { matrix: Tensor::new(vec![n_filters, n_bins], data)?, edges_hz, bin_hz })
    }

    pub fn n_filters(&self) -> usize {
        self.matrix.shape()[0]
    }

    pub fn n_bins(&self) -> usize {
        self.matrix.shape()[1]
    }

    /// Centre frequency (Hz) of filter `i`.
    pub fn center_hz(&self, i: usize) -> f64 {
        self.edges_hz[i + 1]
    }

    /// `power: frames × bins` → `frames × n_filters`.
    pub fn apply(&self, power: &Tensor<T>) -> Result<Tensor<T>> {
        power.expect_rank(2, "mel input")?;
        if power.shape()[1] != self.n_bins() {
            return Err(Error::dim(format!(
                "mel bank over {} bins given spectrogram {:?}",
                self.n_bins(),
                power.shape()
            )));
        }
        let (frames, bins, nf) = (power.shape()[0], self.n_bins(), self.n_filters());
        let mut out = vec![T::zero(); frames * nf];
        crate::tensor::gemm_a_bt(frames, bins, nf, power.data(), self.matrix.data(), &mut out);
        Tensor::new(vec![frames, nf], out)
    }
}

/// 80 filters over 0–8000 Hz for 1024-point frames at 16 kHz.
pub fn build_mel_bank<T: Scalar>() -> MelBank<T> {
    MelBank::new(N_MEL_FILTERS, FFT_LEN, SAMPLE_RATE_HZ, MEL_F_MIN_HZ, MEL_F_MAX_HZ).expect("default mel bank")
}
