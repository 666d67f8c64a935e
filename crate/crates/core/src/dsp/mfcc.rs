use super::dct::Dct2;
use super::fft::Radix2Fft;
use super::mel::{build_mel_bank, MelBank};
use super::stft::{frame_and_window, power_spectrogram, StftSpec};
use super::{AudioClip, LOG_FLOOR, N_MEL_FILTERS, N_MFCC, REFERENCE_FRAMES, SAMPLE_RATE_HZ};
use crate::tensor::Tensor;
use crate::{Error, Result, Scalar};

/// Per-clip cepstral features, shape `(778, 13, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MfccMatrix<T> {
    values: Tensor<T>,
}

impl<T: Scalar> MfccMatrix<T> {
    pub fn new(values: Tensor<T>) -> Result<Self> {
        values.expect_shape(&[REFERENCE_FRAMES, N_MFCC, 1], "MFCC matrix")?;
        values.check_finite("MFCC matrix")?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &Tensor<T> {
        &self.values
    }

    pub fn into_tensor(self) -> Tensor<T> {
        self.values
    }

    /// First `n` frames as an `(n, 13, 1)` tensor.
    pub fn leading_frames(&self, n: usize) -> Result<Tensor<T>> {
        if n == 0 || n > REFERENCE_FRAMES {
            return Err(Error::dim(format!("cannot take {n} of {REFERENCE_FRAMES} frames")));
        }
        Tensor::new(vec![n, N_MFCC, 1], self.values.data()[..n * N_MFCC].to_vec())
    }
}

/// Precomputed FFT plan, mel bank and DCT shared across clips.
#[derive(Clone, Debug)]
pub struct MfccExtractor<T> {
    spec: StftSpec,
    fft: Radix2Fft<T>,
    bank: MelBank<T>,
    dct: Dct2<T>,
}

impl<T: Scalar> Default for MfccExtractor<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> MfccExtractor<T> {
    pub fn new() -> Self {
        let spec = StftSpec::default();
        Self {
            fft: Radix2Fft::new(spec.fft_len).expect("power-of-two FFT"),
            bank: build_mel_bank(),
            dct: Dct2::new(N_MEL_FILTERS),
            spec,
        }
    }

    pub fn mel_bank(&self) -> &MelBank<T> {
        &self.bank
    }

    /// MFCCs of every frame of an arbitrary-length clip: `(frames, 13, 1)`.
    pub fn extract_frames(&self, clip: &AudioClip<T>) -> Result<Tensor<T>> {
        if clip.sample_rate_hz != SAMPLE_RATE_HZ {
            return Err(Error::Input(format!(
                "MFCC expects {SAMPLE_RATE_HZ} Hz audio, got {} Hz",
                clip.sample_rate_hz
            )));
        }
        let frames = frame_and_window(&clip.samples, &self.spec)?;
        let power = power_spectrogram(&frames, &self.fft)?;
        let mel = self.bank.apply(&power)?;
        let floor = T::lit(LOG_FLOOR);
        let n_frames = mel.shape()[0];
        let mut out = Vec::with_capacity(n_frames * N_MFCC);
        for row in mel.data().chunks(N_MEL_FILTERS) {
            let logs: Vec<T> = row.iter().map(|&e| (e + floor).ln()).collect();
            out.extend(self.dct.apply_truncated(&logs, N_MFCC)?);
        }
        Tensor::new(vec![n_frames, N_MFCC, 1], out)
    }

    /// Reference-length clip (199 936 samples) to a `(778, 13, 1)` matrix.
    pub fn extract(&self, clip: &AudioClip<T>) -> Result<MfccMatrix<T>> {
        MfccMatrix::new(self.extract_frames(clip)?)
    }
}

pub fn mfcc<T: Scalar>(clip: &AudioClip<T>) -> Result<MfccMatrix<T>> {
    MfccExtractor::new().extract(clip)
}
