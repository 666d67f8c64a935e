//! Seeded stand-in datasets.
//!
//! Audio clips last one second (padded later to the reference length):
//! class 0 carries a 440 Hz tone, class 1 an 880 Hz tone, both over light
//! noise. Video clips are `1×8×32×32`: a Gaussian blob that stays put for
//! class 0 and slides horizontally for class 1.
//!
//! In the complementary set every sample has exactly one modality replaced
//! by heavy noise with no class signal, chosen by a fair coin.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::container::write_container;
use super::manifest::{Manifest, ManifestRow};
use crate::dsp::{save_wav, AudioClip, SAMPLE_RATE_HZ};
use crate::tensor::Tensor;
use crate::{Error, Result};

pub const SYNTH_CLIP_SAMPLES: usize = SAMPLE_RATE_HZ as usize;
pub const SYNTH_VIDEO_SHAPE: [usize; 4] = [1, 8, 32, 32];
pub const CLASS_TONES_HZ: [f64; 2] = [440.0, 880.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    Separable,
    Complementary,
}

impl SynthKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthKind::Separable => "separable",
            SynthKind::Complementary => "complementary",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "separable" => Ok(SynthKind::Separable),
            "complementary" => Ok(SynthKind::Complementary),
            other => Err(Error::Config(format!("unknown dataset kind '{other}' (separable, complementary)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Corrupted {
    None,
    Video,
    Audio,
}

/// One generated sample before it is written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthSample {
    pub video: Tensor<f64>,
    pub audio: AudioClip<f64>,
    pub label: usize,
    pub corrupted: Corrupted,
}

pub fn synth_audio(label: usize, rng: &mut impl Rng) -> AudioClip<f64> {
    let f = CLASS_TONES_HZ[label];
    let amp = rng.gen_range(0.3..0.6);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let sr = f64::from(SAMPLE_RATE_HZ);
    let samples = (0..SYNTH_CLIP_SAMPLES)
        .map(|n| amp * (2.0 * PI * f * n as f64 / sr + phase).sin() + rng.gen_range(-0.05..0.05))
        .collect();
    AudioClip::new(samples)
}

pub fn noise_audio(rng: &mut impl Rng) -> AudioClip<f64> {
    AudioClip::new((0..SYNTH_CLIP_SAMPLES).map(|_| rng.gen_range(-0.9..0.9)).collect())
}

pub fn synth_video(label: usize, rng: &mut impl Rng) -> Tensor<f64> {
    let [_, t, h, w] = SYNTH_VIDEO_SHAPE;
    let sigma2 = 2.0 * 2.5f64.powi(2);
    let cy = rng.gen_range(8.0..24.0);
    let (x0, dx) = if label == 0 {
        (rng.gen_range(8.0..24.0), 0.0)
    } else if rng.gen_bool(0.5) {
        (rng.gen_range(4.0..7.0), 3.0)
    } else {
        (rng.gen_range(25.0..28.0), -3.0)
    };
    let mut data = Vec::with_capacity(t * h * w);
    for f in 0..t {
        let cx = x0 + dx * f as f64;
        for y in 0..h {
            for x in 0..w {
                let d2 = (y as f64 - cy).powi(2) + (x as f64 - cx).powi(2);
                data.push((0.8 * (-d2 / sigma2).exp() + rng.gen_range(0.0..0.1)).min(1.0));
            }
        }
    }
    Tensor::new(SYNTH_VIDEO_SHAPE.to_vec(), data).expect("synthetic video shape")
}

pub fn noise_video(rng: &mut impl Rng) -> Tensor<f64> {
    let n: usize = SYNTH_VIDEO_SHAPE.iter().product();
    Tensor::new(SYNTH_VIDEO_SHAPE.to_vec(), (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
        .expect("synthetic video shape")
}

/// Sample `index` of a set; labels alternate `0, 1, 0, …` and every sample
/// draws from its own stream of `seed`, so samples are independent of order.
pub fn synth_sample(kind: SynthKind, seed: u64, index: usize) -> SynthSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let label = index % 2;
    let corrupted = match kind {
        SynthKind::Separable => Corrupted::None,
        SynthKind::Complementary if rng.gen_bool(0.5) => Corrupted::Video,
        SynthKind::Complementary => Corrupted::Audio,
    };
    let video = if corrupted == Corrupted::Video { noise_video(&mut rng) } else { synth_video(label, &mut rng) };
    let audio = if corrupted == Corrupted::Audio { noise_audio(&mut rng) } else { synth_audio(label, &mut rng) };
    SynthSample { video, audio, label, corrupted }
}

/// Writes `2·n_per_class` samples (`video_NNNN.ntc`, `audio_NNNN.wav`) and
/// `manifest.csv` into `out_dir`.
pub fn synth_dataset(out_dir: impl AsRef<Path>, n_per_class: usize, kind: SynthKind, seed: u64) -> Result<Manifest> {
    if n_per_class == 0 {
        return Err(Error::Config("synthetic set needs at least one sample per class".into()));
    }
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::with_capacity(2 * n_per_class);
    for i in 0..2 * n_per_class {
        let s = synth_sample(kind, seed, i);
        let video = dir.join(format!("video_{i:04}.ntc"));
        let audio = dir.join(format!("audio_{i:04}.wav"));
        write_container(&video, &s.video)?;
        save_wav(&audio, &s.audio)?;
        rows.push(ManifestRow { video, audio, label: s.label });
    }
    let manifest = Manifest::new(rows)?;
    manifest.write(dir.join("manifest.csv"))?;
    Ok(manifest)
}
