use std::thread;

use super::container::read_container;
use super::manifest::{Manifest, ManifestRow};
use super::preprocess::{preprocess_audio, preprocess_video};
use crate::dsp::{load_wav, MfccExtractor};
use crate::tensor::Tensor;
use crate::Result;

/// Network-ready inputs for one manifest row.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    /// `C×T×H×W`, values in `[0, 1]`.
    pub video: Tensor<f64>,
    /// Leading MFCC frames, `(frames, 13, 1)`.
    pub mfcc: Tensor<f64>,
    pub label: usize,
}

/// Target shapes the networks consume.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureSpec {
    pub video_shape: [usize; 4],
    pub mfcc_frames: usize,
}

pub fn load_video(path: &std::path::Path, target: [usize; 4]) -> Result<Tensor<f64>> {
    preprocess_video(&read_container::<f64>(path)?, target)
}

pub fn load_mfcc(path: &std::path::Path, frames: usize, extractor: &MfccExtractor<f64>) -> Result<Tensor<f64>> {
    let clip = preprocess_audio(&load_wav::<f64>(path)?)?;
    extractor.extract(&clip)?.leading_frames(frames)
}

pub fn load_example(row: &ManifestRow, spec: FeatureSpec, extractor: &MfccExtractor<f64>) -> Result<Example> {
    Ok(Example {
        video: load_video(&row.video, spec.video_shape)?,
        mfcc: load_mfcc(&row.audio, spec.mfcc_frames, extractor)?,
        label: row.label,
    })
}

/// Loads every row, spreading rows over the available cores; the result is
/// in manifest order regardless of scheduling.
pub fn load_examples(manifest: &Manifest, spec: FeatureSpec) -> Result<Vec<Example>> {
    let extractor = MfccExtractor::new();
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(manifest.len());
    let chunk = manifest.len().div_ceil(workers);
    let parts: Vec<Result<Vec<Example>>> = thread::scope(|s| {
        let handles: Vec<_> = manifest
            .rows
            .chunks(chunk)
            .map(|rows| {
                let extractor = &extractor;
                s.spawn(move || rows.iter().map(|r| load_example(r, spec, extractor)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("loader thread panicked")).collect()
    });
    let mut out = Vec::with_capacity(manifest.len());
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synth::{synth_dataset, SynthKind};

    #[test]
    fn loads_synthetic_rows_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let m = synth_dataset(dir.path(), 3, SynthKind::Separable, 2).unwrap();
        let spec = FeatureSpec { video_shape: [1, 4, 16, 16], mfcc_frames: 16 };
        let ex = load_examples(&m, spec).unwrap();
        assert_eq!(ex.len(), 6);
        let one = load_example(&m.rows[4], spec, &MfccExtractor::new()).unwrap();
        assert_eq!(ex[4], one);
        assert_eq!(ex[4].video.shape(), &[1, 4, 16, 16]);
        assert_eq!(ex[4].mfcc.shape(), &[16, 13, 1]);
        assert_eq!(ex.iter().map(|e| e.label).collect::<Vec<_>>(), m.labels());
    }
}
