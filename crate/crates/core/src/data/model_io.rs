//! Model directories: `model.txt` (key=value manifest with the kind, the
//! architecture config and the ordered layer and parameter names) plus one
//! container file per parameter under `params/`.
//!
//! A fusion bundle holds `video/`, `audio/` and `head/` model directories and
//! `bundle.txt`, which records the concatenation order and a SHA-256 of each
//! sub-model.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::container::{read_container, write_container};
use super::kv::KvMap;
use crate::nn::audio::{AudioNet, AudioNetConfig};
use crate::nn::fusion::FusionHead;
use crate::nn::video::{VideoNet, VideoNetConfig};
use crate::nn::{ParamKind, Sequential};
use crate::train::ModelKind;
use crate::{Error, Result};

pub const MODEL_FORMAT: &str = "mdnn-model/1";
pub const BUNDLE_FORMAT: &str = "mdnn-fusion/1";
pub const CONCAT_ORDER: &str = "video,audio";

#[derive(Clone, Debug)]
pub enum SavedModel {
    Video(VideoNet<f64>),
    Audio(AudioNet<f64>),
    Head(FusionHead<f64>),
}

impl SavedModel {
    pub fn net(&self) -> &Sequential<f64> {
        match self {
            SavedModel::Video(v) => &v.net,
            SavedModel::Audio(a) => &a.net,
            SavedModel::Head(h) => &h.net,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SavedModel::Video(_) => "video",
            SavedModel::Audio(_) => "audio",
            SavedModel::Head(_) => "fusion_head",
        }
    }
}

fn video_config_lines(c: &VideoNetConfig) -> String {
    let stages: Vec<String> = c.stage_channels.iter().map(ToString::to_string).collect();
    format!(
        "channels={}\nframes={}\nheight={}\nwidth={}\nstem_channels={}\nstage_channels={}\nblocks_per_stage={}\nnum_classes={}\n",
        c.channels,
        c.frames,
        c.height,
        c.width,
        c.stem_channels,
        stages.join(","),
        c.blocks_per_stage,
        c.num_classes
    )
}

fn audio_config_lines(c: &AudioNetConfig) -> String {
    format!(
        "input_frames={}\ncoefficients={}\nfilters={}\nkernel={}\ndropout={}\ndense_width={}\noutputs={}\n",
        c.input_frames, c.coefficients, c.filters, c.kernel, c.dropout, c.dense_width, c.outputs
    )
}

pub fn video_config_from(kv: &KvMap) -> Result<VideoNetConfig> {
    let stages = kv
        .require("stage_channels")?
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Format(format!("bad stage_channels entry '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(VideoNetConfig {
        channels: kv.parse_value("channels")?,
        frames: kv.parse_value("frames")?,
        height: kv.parse_value("height")?,
        width: kv.parse_value("width")?,
        stem_channels: kv.parse_value("stem_channels")?,
        stage_channels: stages,
        blocks_per_stage: kv.parse_value("blocks_per_stage")?,
        num_classes: kv.parse_value("num_classes")?,
    })
}

pub fn audio_config_from(kv: &KvMap) -> Result<AudioNetConfig> {
    Ok(AudioNetConfig {
        input_frames: kv.parse_value("input_frames")?,
        coefficients: kv.parse_value("coefficients")?,
        filters: kv.parse_value("filters")?,
        kernel: kv.parse_value("kernel")?,
        dropout: kv.parse_value("dropout")?,
        dense_width: kv.parse_value("dense_width")?,
        outputs: kv.parse_value("outputs")?,
    })
}

fn param_file(dir: &Path, i: usize) -> PathBuf {
    dir.join("params").join(format!("{i:03}.ntc"))
}

fn save_net(dir: &Path, kind: &str, config: &str, net: &Sequential<f64>) -> Result<()> {
    std::fs::create_dir_all(dir.join("params"))?;
    let mut text = format!("format={MODEL_FORMAT}\nkind={kind}\n{config}");
    let names = net.layer_names();
    let _ = writeln!(text, "layers={}", names.len());
    for (i, n) in names.iter().enumerate() {
        let _ = writeln!(text, "layer.{i:02}={n}");
    }
    let _ = writeln!(text, "params={}", net.params.len());
    for (i, p) in net.params.iter().enumerate() {
        let shape: Vec<String> = p.value.shape().iter().map(ToString::to_string).collect();
        let _ = writeln!(text, "param.{i:03}={} {} {}", p.name, shape.join("x"), p.kind.as_str());
        write_container(param_file(dir, i), &p.value)?;
    }
    std::fs::write(dir.join("model.txt"), text)?;
    Ok(())
}

pub fn save_model(dir: impl AsRef<Path>, model: &SavedModel) -> Result<()> {
    let dir = dir.as_ref();
    match model {
        SavedModel::Video(v) => save_net(dir, "video", &video_config_lines(&v.config), &v.net),
        SavedModel::Audio(a) => save_net(dir, "audio", &audio_config_lines(&a.config), &a.net),
        SavedModel::Head(h) => save_net(dir, "fusion_head", "", &h.net),
    }
}

fn restore_params(dir: &Path, kv: &KvMap, net: &mut Sequential<f64>) -> Result<()> {
    let names = net.layer_names();
    if kv.parse_value::<usize>("layers")? != names.len() {
        return Err(Error::Format(format!("{}: layer count differs from architecture", dir.display())));
    }
    for (i, n) in names.iter().enumerate() {
        let stored = kv.require(&format!("layer.{i:02}"))?;
        if stored != n {
            return Err(Error::Format(format!("layer {i}: manifest has '{stored}', architecture has '{n}'")));
        }
    }
    if kv.parse_value::<usize>("params")? != net.params.len() {
        return Err(Error::Format(format!("{}: parameter count differs from architecture", dir.display())));
    }
    let mut values = Vec::with_capacity(net.params.len());
    for (i, p) in net.params.iter().enumerate() {
        let line = kv.require(&format!("param.{i:03}"))?;
        let name = line.split_whitespace().next().unwrap_or("");
        if name != p.name {
            return Err(Error::Format(format!("param {i}: manifest has '{name}', architecture has '{}'", p.name)));
        }
        let t = read_container::<f64>(param_file(dir, i))?;
        if t.shape() != p.value.shape() {
            return Err(Error::Format(format!("param {}: stored shape {:?}, expected {:?}", p.name, t.shape(), p.value.shape())));
        }
        values.push(t);
    }
    net.params.set_values(&values)
}

pub fn load_model(dir: impl AsRef<Path>) -> Result<SavedModel> {
    let dir = dir.as_ref();
    let kv = KvMap::parse(&std::fs::read_to_string(dir.join("model.txt"))?)?;
    if kv.require("format")? != MODEL_FORMAT {
        return Err(Error::Format(format!("{}: unknown model format '{}'", dir.display(), kv.require("format")?)));
    }
    let mut model = match kv.require("kind")? {
        "video" => SavedModel::Video(VideoNet::build(video_config_from(&kv)?, 0)?),
        "audio" => SavedModel::Audio(AudioNet::build(audio_config_from(&kv)?, 0)?),
        "fusion_head" => SavedModel::Head(FusionHead::build(0)),
        other => return Err(Error::Format(format!("unknown model kind '{other}'"))),
    };
    let net = match &mut model {
        SavedModel::Video(v) => &mut v.net,
        SavedModel::Audio(a) => &mut a.net,
        SavedModel::Head(h) => &mut h.net,
    };
    restore_params(dir, &kv, net)?;
    Ok(model)
}

/// SHA-256 over `model.txt` followed by every parameter file in order.
pub fn model_hash(dir: impl AsRef<Path>) -> Result<String> {
    let dir = dir.as_ref();
    let text = std::fs::read(dir.join("model.txt"))?;
    let kv = KvMap::parse(&String::from_utf8_lossy(&text))?;
    let mut h = Sha256::new();
    h.update(&text);
    for i in 0..kv.parse_value::<usize>("params")? {
        h.update(std::fs::read(param_file(dir, i))?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug)]
pub struct FusionBundle {
    pub video: VideoNet<f64>,
    pub audio: AudioNet<f64>,
    pub head: FusionHead<f64>,
}

pub fn save_bundle(dir: impl AsRef<Path>, bundle: &FusionBundle) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    save_model(dir.join("video"), &SavedModel::Video(bundle.video.clone()))?;
    save_model(dir.join("audio"), &SavedModel::Audio(bundle.audio.clone()))?;
    save_model(dir.join("head"), &SavedModel::Head(bundle.head.clone()))?;
    let mut text = format!("format={BUNDLE_FORMAT}\nconcat_order={CONCAT_ORDER}\n");
    for sub in ["video", "audio", "head"] {
        let _ = writeln!(text, "{sub}_sha256={}", model_hash(dir.join(sub))?);
    }
    std::fs::write(dir.join("bundle.txt"), text)?;
    Ok(())
}

pub fn load_bundle(dir: impl AsRef<Path>) -> Result<FusionBundle> {
    let dir = dir.as_ref();
    let kv = KvMap::parse(&std::fs::read_to_string(dir.join("bundle.txt"))?)?;
    if kv.require("format")? != BUNDLE_FORMAT {
        return Err(Error::Format(format!("unknown bundle format '{}'", kv.require("format")?)));
    }
    if kv.require("concat_order")? != CONCAT_ORDER {
        return Err(Error::Format(format!("unsupported concat_order '{}'", kv.require("concat_order")?)));
    }
    for sub in ["video", "audio", "head"] {
        let actual = model_hash(dir.join(sub))?;
        let recorded = kv.require(&format!("{sub}_sha256"))?;
        if actual != recorded {
            return Err(Error::Format(format!("{sub} sub-model hash mismatch: recorded {recorded}, found {actual}")));
        }
    }
    let (video, audio, head) = match (
        load_model(dir.join("video"))?,
        load_model(dir.join("audio"))?,
        load_model(dir.join("head"))?,
    ) {
        (SavedModel::Video(v), SavedModel::Audio(a), SavedModel::Head(h)) => (v, a, h),
        _ => return Err(Error::Format("bundle sub-models have the wrong kinds".into())),
    };
    Ok(FusionBundle { video, audio, head })
}

/// What a model directory contains, decided from its manifest file.
pub fn detect_kind(dir: impl AsRef<Path>) -> Result<ModelKind> {
    let dir = dir.as_ref();
    if dir.join("bundle.txt").is_file() {
        return Ok(ModelKind::Fusion);
    }
    let kv = KvMap::parse(&std::fs::read_to_string(dir.join("model.txt"))?)?;
    match kv.require("kind")? {
        "video" => Ok(ModelKind::Video),
        "audio" => Ok(ModelKind::Audio),
        other => Err(Error::Format(format!("{}: '{other}' is not a standalone model", dir.display()))),
    }
}

/// Weight tensors only, in order; used by the regularisation tests.
pub fn weight_values(net: &Sequential<f64>) -> Vec<f64> {
    net.params
        .iter()
        .filter(|p| p.kind == ParamKind::Weight)
        .flat_map(|p| p.value.data().iter().copied())
        .collect()
}
