//! Composition of data loading, the three networks and the trainer, as used
//! by the command-line tool.

use crate::data::{Example, FeatureSpec};
use crate::nn::audio::{AudioNet, AudioNetConfig};
use crate::nn::fusion::{concat_outputs, FusedPrediction, FusionHead};
use crate::nn::video::{VideoNet, VideoNetConfig};
use crate::nn::ForwardCtx;
use crate::train::{evaluate, train, MetricsReport, Sample, TrainConfig, TrainLog};
use crate::Result;

pub fn feature_spec(video: &VideoNetConfig, audio: &AudioNetConfig) -> FeatureSpec {
    FeatureSpec { video_shape: video.input_shape(), mfcc_frames: audio.input_frames }
}

fn pick<'a>(examples: &'a [Example], indices: &'a [usize]) -> impl Iterator<Item = &'a Example> {
    indices.iter().map(move |&i| &examples[i])
}

pub fn video_samples(net: &VideoNet<f64>, examples: &[Example], indices: &[usize]) -> Result<Vec<Sample<f64>>> {
    pick(examples, indices)
        .map(|e| {
            net.check_input(&e.video)?;
            Ok(Sample::new(e.video.clone(), e.label))
        })
        .collect()
}

pub fn audio_samples(net: &AudioNet<f64>, examples: &[Example], indices: &[usize]) -> Result<Vec<Sample<f64>>> {
    pick(examples, indices).map(|e| Ok(Sample::new(net.prepare_input(&e.mfcc)?, e.label))).collect()
}

/// Fused 4-vectors from the frozen unimodal networks (eval mode).
pub fn fusion_samples(
    video: &VideoNet<f64>,
    audio: &AudioNet<f64>,
    examples: &[Example],
    indices: &[usize],
) -> Result<Vec<Sample<f64>>> {
    pick(examples, indices)
        .map(|e| {
            let y_v = video.forward(&e.video)?;
            let y_a = audio.forward(&e.mfcc, ForwardCtx::eval())?;
            Ok(Sample::new(concat_outputs(&y_v, &y_a).to_tensor(), e.label))
        })
        .collect()
}

/// Builds from `cfg.seed` and trains on `train_idx`, validating on `val_idx`.
pub fn train_video(
    config: VideoNetConfig,
    examples: &[Example],
    train_idx: &[usize],
    val_idx: &[usize],
    cfg: &TrainConfig,
) -> Result<(VideoNet<f64>, TrainLog)> {
    let mut net = VideoNet::build(config, cfg.seed)?;
    let tr = video_samples(&net, examples, train_idx)?;
    let va = video_samples(&net, examples, val_idx)?;
    let log = train(&mut net.net, &tr, &va, cfg)?;
    Ok((net, log))
}

pub fn train_audio(
    config: AudioNetConfig,
    examples: &[Example],
    train_idx: &[usize],
    val_idx: &[usize],
    cfg: &TrainConfig,
) -> Result<(AudioNet<f64>, TrainLog)> {
    let mut net = AudioNet::build(config, cfg.seed)?;
    let tr = audio_samples(&net, examples, train_idx)?;
    let va = audio_samples(&net, examples, val_idx)?;
    let log = train(&mut net.net, &tr, &va, cfg)?;
    Ok((net, log))
}

/// Trains only the head; `video` and `audio` are borrowed immutably.
pub fn train_fusion(
    video: &VideoNet<f64>,
    audio: &AudioNet<f64>,
    examples: &[Example],
    train_idx: &[usize],
    val_idx: &[usize],
    cfg: &TrainConfig,
) -> Result<(FusionHead<f64>, TrainLog)> {
    let mut head = FusionHead::build(cfg.seed);
    let tr = fusion_samples(video, audio, examples, train_idx)?;
    let va = fusion_samples(video, audio, examples, val_idx)?;
    let log = train(&mut head.net, &tr, &va, cfg)?;
    Ok((head, log))
}

pub fn evaluate_video(net: &VideoNet<f64>, examples: &[Example], indices: &[usize]) -> Result<MetricsReport> {
    evaluate(&net.net, &video_samples(net, examples, indices)?)
}

pub fn evaluate_audio(net: &AudioNet<f64>, examples: &[Example], indices: &[usize]) -> Result<MetricsReport> {
    evaluate(&net.net, &audio_samples(net, examples, indices)?)
}

pub fn evaluate_fusion(
    video: &VideoNet<f64>,
    audio: &AudioNet<f64>,
    head: &FusionHead<f64>,
    examples: &[Example],
    indices: &[usize],
) -> Result<MetricsReport> {
    evaluate(&head.net, &fusion_samples(video, audio, examples, indices)?)
}

pub fn predict_example(
    video: &VideoNet<f64>,
    audio: &AudioNet<f64>,
    head: &FusionHead<f64>,
    example: &Example,
) -> Result<FusedPrediction<f64>> {
    crate::nn::fusion::fused_predict(video, audio, head, &example.video, &example.mfcc)
}
