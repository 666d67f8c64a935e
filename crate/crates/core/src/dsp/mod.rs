//! MFCC front-end for 16 kHz mono speech.
//!
//! Pipeline: 1024-sample periodic-Hann frames every 256 samples → radix-2
//! FFT → power spectrum (513 bins) → 80 triangular mel filters → `ln(x + ε)`
//! → orthonormal DCT-II → first 13 coefficients.

mod dct;
mod fft;
mod mel;
mod mfcc;
mod stft;
mod wav;

pub use dct::{dct2_ortho, Dct2};
pub use fft::{dft_direct, fft_1024, Radix2Fft};
pub use mel::{build_mel_bank, hz_to_mel, mel_to_hz, MelBank};
pub use mfcc::{mfcc, MfccExtractor, MfccMatrix};
pub use stft::{frame_and_window, frame_count, hann_periodic, power_spectrogram, StftSpec};
pub use wav::{decode_wav, encode_wav, load_wav, save_wav, AudioClip};

pub const SAMPLE_RATE_HZ: u32 = 16_000;
/// 64 ms at 16 kHz.
pub const WINDOW_LEN: usize = 1024;
/// 75 % overlap.
pub const HOP_LEN: usize = WINDOW_LEN / 4;
pub const FFT_LEN: usize = 1024;
pub const N_BINS: usize = FFT_LEN / 2 + 1;
pub const N_MEL_FILTERS: usize = 80;
pub const N_MFCC: usize = 13;
pub const MEL_F_MIN_HZ: f64 = 0.0;
pub const MEL_F_MAX_HZ: f64 = 8000.0;
pub const LOG_FLOOR: f64 = 1e-10;
pub const REFERENCE_FRAMES: usize = 778;
/// `(778 − 1)·256 + 1024`.
pub const REFERENCE_SAMPLES: usize = (REFERENCE_FRAMES - 1) * HOP_LEN + WINDOW_LEN;
