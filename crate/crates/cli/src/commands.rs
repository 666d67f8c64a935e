use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mdnn::data::kv::KvMap;
use mdnn::data::{
    detect_kind, load_bundle, load_examples, load_mfcc, load_model, load_video, preprocess_audio, read_container,
    save_bundle, save_model, synth_dataset, write_container, FusionBundle, Manifest, SavedModel, SynthKind,
};
use mdnn::dsp::{load_wav, mfcc, MfccExtractor, REFERENCE_SAMPLES};
use mdnn::nn::audio::{AudioNet, AudioNetConfig};
use mdnn::nn::fusion::{fused_predict, FusionHead};
use mdnn::nn::video::VideoNet;
use mdnn::nn::CountMode;
use mdnn::pipeline::{
    audio_samples, evaluate_audio, evaluate_fusion, evaluate_video, feature_spec, fusion_samples, video_samples,
};
use mdnn::tensor::{gradient_check, jitter_biases, GradCheckOptions, Tensor};
use mdnn::train::{
    fmt_metric, split_dataset, train_observed, EpochLog, ModelKind, SplitPart, SplitSpec,
};

use crate::error::{CliError, CliResult};
use crate::settings::{net_config, read_kv, Size, TrainSettings};

const RUN_CONFIG: &str = "train_config.txt";
const RUN_LOG: &str = "train_log.csv";

fn shape_str(shape: &[usize]) -> String {
    let dims: Vec<String> = shape.iter().map(ToString::to_string).collect();
    format!("({})", dims.join(", "))
}

pub fn mfcc_extract(input: &Path, out: &Path) -> CliResult<()> {
    let clip = load_wav::<f64>(input)?;
    let n = clip.len();
    let fixed = preprocess_audio(&clip)?;
    if n < REFERENCE_SAMPLES {
        eprintln!("note: {n} samples zero-padded to {REFERENCE_SAMPLES}");
    } else if n > REFERENCE_SAMPLES {
        eprintln!("note: {n} samples truncated to {REFERENCE_SAMPLES}");
    }
    let m = mfcc(&fixed)?;
    write_container(out, m.values())?;
    println!("wrote MFCC {} to {}", shape_str(m.values().shape()), out.display());
    Ok(())
}

pub fn mfcc_inspect(input: &Path) -> CliResult<()> {
    let t = read_container::<f64>(input)?;
    let finite: Vec<f64> = t.data().iter().copied().filter(|v| v.is_finite()).collect();
    println!("shape {}", shape_str(t.shape()));
    println!("values {}", t.len());
    if finite.is_empty() {
        println!("no finite values");
    } else {
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let max = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("min {min:.6}");
        println!("max {max:.6}");
        println!("mean {:.6}", finite.iter().sum::<f64>() / finite.len() as f64);
    }
    println!("non_finite {}", t.len() - finite.len());
    Ok(())
}

pub fn param_count(config: Option<&Path>) -> CliResult<()> {
    let (size, video) = net_config(&read_kv(config)?)?;
    let factored = video.weight_count(CountMode::Factored)?;
    let full = video.weight_count(CountMode::Full3dEquivalent)?;
    let audio = AudioNet::<f64>::build(size.audio(), 0)?;
    let head = FusionHead::<f64>::build(0);
    println!("size {}", size.as_str());
    println!("video stage_channels {:?} blocks_per_stage {}", video.stage_channels, video.blocks_per_stage);
    println!("video factored_weights {factored}");
    println!("video full3d_weights {full}");
    println!("video ratio {:.6}", factored as f64 / full as f64);
    println!("audio weights {}", audio.net.params.weight_count());
    println!("fusion_head weights {}", head.net.params.weight_count());
    Ok(())
}

pub fn synth(kind: SynthKind, n: usize, seed: u64, out: &Path) -> CliResult<()> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let manifest = synth_dataset(out, n, kind, seed)?;
    println!(
        "wrote {} rows ({n} per class, {}) to {}",
        manifest.len(),
        kind.as_str(),
        out.join("manifest.csv").display()
    );
    Ok(())
}

fn print_epoch(total: usize) -> impl FnMut(&EpochLog) {
    move |e: &EpochLog| {
        let (a, p, r) = e.val.map_or((None, None, None), |m| (m.accuracy, m.precision, m.recall));
        println!(
            "epoch {:>3}/{total} train_loss {:.6} val_accuracy {} val_precision {} val_recall {} clamped {}",
            e.epoch,
            e.train_loss,
            fmt_metric(a),
            fmt_metric(p),
            fmt_metric(r),
            e.clamped
        );
    }
}

fn expect_video(dir: &Path) -> CliResult<VideoNet<f64>> {
    match load_model(dir)? {
        SavedModel::Video(v) => Ok(v),
        other => Err(mdnn::Error::Format(format!("{}: expected a video model, found {}", dir.display(), other.kind_name())).into()),
    }
}

fn expect_audio(dir: &Path) -> CliResult<AudioNet<f64>> {
    match load_model(dir)? {
        SavedModel::Audio(a) => Ok(a),
        other => Err(mdnn::Error::Format(format!("{}: expected an audio model, found {}", dir.display(), other.kind_name())).into()),
    }
}

pub fn train(model: ModelKind, data: &Path, config: Option<&Path>, seed: Option<u64>, out: &Path) -> CliResult<()> {
    let base = config.and_then(Path::parent).unwrap_or(Path::new("."));
    let s = TrainSettings::resolve(model, &read_kv(config)?, seed, base)?;
    let resolved = s.to_kv();
    println!("# model {}", model.as_str());
    for line in resolved.lines() {
        println!("# {line}");
    }
    let manifest = Manifest::read(data)?;
    let split = split_dataset(manifest.len(), SplitSpec::new(s.split_seed))?;
    let fit_idx = s.subset.select(&split.train);
    println!(
        "# rows {} train {} fit {} val {} test {}",
        manifest.len(),
        split.train.len(),
        fit_idx.len(),
        split.val.len(),
        split.test.len()
    );
    let cfg = &s.train;
    let log = match model {
        ModelKind::Video => {
            let video = s.size.video();
            let examples = load_examples(&manifest, feature_spec(&video, &AudioNetConfig::tiny()))?;
            let mut net = VideoNet::build(video, cfg.seed)?;
            let tr = video_samples(&net, &examples, fit_idx)?;
            let va = video_samples(&net, &examples, &split.val)?;
            let log = train_observed(&mut net.net, &tr, &va, cfg, print_epoch(cfg.epochs))?;
            save_model(out, &SavedModel::Video(net))?;
            log
        }
        ModelKind::Audio => {
            let audio = s.size.audio();
            let examples = load_examples(&manifest, feature_spec(&Size::Tiny.video(), &audio))?;
            let mut net = AudioNet::build(audio, cfg.seed)?;
            let tr = audio_samples(&net, &examples, fit_idx)?;
            let va = audio_samples(&net, &examples, &split.val)?;
            let log = train_observed(&mut net.net, &tr, &va, cfg, print_epoch(cfg.epochs))?;
            save_model(out, &SavedModel::Audio(net))?;
            log
        }
        ModelKind::Fusion => {
            let video = expect_video(s.video_model.as_deref().expect("checked in resolve"))?;
            let audio = expect_audio(s.audio_model.as_deref().expect("checked in resolve"))?;
            let examples = load_examples(&manifest, feature_spec(&video.config, &audio.config))?;
            let mut head = FusionHead::build(cfg.seed);
            let tr = fusion_samples(&video, &audio, &examples, fit_idx)?;
            let va = fusion_samples(&video, &audio, &examples, &split.val)?;
            let log = train_observed(&mut head.net, &tr, &va, cfg, print_epoch(cfg.epochs))?;
            save_bundle(out, &FusionBundle { video, audio, head })?;
            log
        }
    };
    std::fs::write(out.join(RUN_LOG), log.to_csv())?;
    std::fs::write(out.join(RUN_CONFIG), resolved)?;
    println!("wrote {} model to {}", model.as_str(), out.display());
    Ok(())
}

fn recorded_split_seed(model_dir: &Path) -> CliResult<Option<u64>> {
    let path = model_dir.join(RUN_CONFIG);
    if !path.is_file() {
        return Ok(None);
    }
    let kv = KvMap::parse(&std::fs::read_to_string(path)?)?;
    Ok(Some(kv.parse_value("split_seed")?))
}

pub fn eval(model_dir: &Path, data: &Path, part: SplitPart, split_seed: Option<u64>) -> CliResult<()> {
    let split_seed = match split_seed {
        Some(s) => s,
        None => recorded_split_seed(model_dir)?.ok_or_else(|| {
            CliError::Usage(format!("{} has no {RUN_CONFIG}; pass --split-seed", model_dir.display()))
        })?,
    };
    let kind = detect_kind(model_dir)?;
    let manifest = Manifest::read(data)?;
    let split = split_dataset(manifest.len(), SplitSpec::new(split_seed))?;
    let idx = split.part(part);
    println!("model {}", kind.as_str());
    println!("split {} n={} split_seed={split_seed}", part_name(part), idx.len());
    match kind {
        ModelKind::Video => {
            let net = expect_video(model_dir)?;
            let examples = load_examples(&manifest, feature_spec(&net.config, &AudioNetConfig::tiny()))?;
            println!("video {}", evaluate_video(&net, &examples, idx)?);
        }
        ModelKind::Audio => {
            let net = expect_audio(model_dir)?;
            let examples = load_examples(&manifest, feature_spec(&Size::Tiny.video(), &net.config))?;
            println!("audio {}", evaluate_audio(&net, &examples, idx)?);
        }
        ModelKind::Fusion => {
            let b = load_bundle(model_dir)?;
            let examples = load_examples(&manifest, feature_spec(&b.video.config, &b.audio.config))?;
            println!("video {}", evaluate_video(&b.video, &examples, idx)?);
            println!("audio {}", evaluate_audio(&b.audio, &examples, idx)?);
            println!("fused {}", evaluate_fusion(&b.video, &b.audio, &b.head, &examples, idx)?);
        }
    }
    Ok(())
}

fn part_name(part: SplitPart) -> &'static str {
    match part {
        SplitPart::Train => "train",
        SplitPart::Val => "val",
        SplitPart::Test => "test",
    }
}

pub fn predict(model_dir: &Path, video: &Path, audio: &Path) -> CliResult<()> {
    if detect_kind(model_dir)? != ModelKind::Fusion {
        return Err(mdnn::Error::Format(format!("{} is not a fusion bundle", model_dir.display())).into());
    }
    let b = load_bundle(model_dir)?;
    let spec = feature_spec(&b.video.config, &b.audio.config);
    let clip = load_video(video, spec.video_shape)?;
    let mfcc = load_mfcc(audio, spec.mfcc_frames, &MfccExtractor::new())?;
    let p = fused_predict(&b.video, &b.audio, &b.head, &clip, &mfcc)?;
    let pair = |v: [f64; 2]| format!("{:.6} {:.6}", v[0], v[1]);
    println!("label {}", p.fused.predicted_class());
    println!("y_v {}", pair(p.video.probs()));
    println!("y_a {}", pair(p.audio.probs()));
    println!("fused {}", pair(p.fused.probs()));
    Ok(())
}

pub fn gradcheck(model: ModelKind, tiny: bool, seed: u64, entries: usize) -> CliResult<()> {
    let size = if tiny { Size::Tiny } else { Size::Full };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = |shape: &[usize], lo: f64, hi: f64| {
        let n = shape.iter().product();
        Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(lo..hi)).collect())
    };
    let (mut net, input) = match model {
        ModelKind::Video => {
            let v = VideoNet::<f64>::build(size.video(), seed)?;
            let x = uniform(&v.config.input_shape(), 0.0, 1.0)?;
            (v.net, x)
        }
        ModelKind::Audio => {
            let a = AudioNet::<f64>::build(size.audio(), seed)?;
            let x = uniform(&a.config.input_shape(), -1.0, 1.0)?;
            (a.net, x)
        }
        ModelKind::Fusion => {
            let p = uniform(&[2], 0.05, 0.95)?;
            let (v, a) = (p.data()[0], p.data()[1]);
            (FusionHead::<f64>::build(seed).net, Tensor::from_vec(vec![v, 1.0 - v, a, 1.0 - a]))
        }
    };
    jitter_biases(&mut net, 0.1, seed);
    let opts = GradCheckOptions { tolerance: 1e-4, max_entries_per_tensor: Some(entries), seed, ..Default::default() };
    println!("# gradcheck {} size {} seed {seed} entries_per_tensor {entries}", model.as_str(), size.as_str());
    let report = gradient_check(&net, &input, &opts)?;
    print!("{}", report.table());
    println!("max_rel_err {:.3e} tolerance {:.0e}", report.max_rel_err(), report.tolerance);
    if report.passed() {
        Ok(())
    } else {
        Err(mdnn::Error::GradCheck(format!("max relative error {:.3e} exceeds {:.0e}", report.max_rel_err(), report.tolerance)).into())
    }
}
