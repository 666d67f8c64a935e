//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the criteria execute in
//! order and their timings are reported against each budget.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mdnn::data::{decode_container, encode_container, load_examples, read_container, synth_dataset, write_container, Example, SynthKind};
use mdnn::dsp::{dft_direct, load_wav, mfcc, AudioClip, Dct2, Radix2Fft, REFERENCE_SAMPLES};
use mdnn::nn::audio::{AudioNet, AudioNetConfig};
use mdnn::nn::fusion::FusionHead;
use mdnn::nn::video::{VideoNet, VideoNetConfig};
use mdnn::nn::{bce_loss, one_hot, Conv2Plus1DSpec, CountMode, ForwardCtx, Initializer, Layer, Sequential};
use mdnn::pipeline::{
    evaluate_audio, evaluate_fusion, evaluate_video, feature_spec, train_audio, train_fusion, train_video,
};
use mdnn::tensor::{gradient_check, jitter_biases, Activation, ConvSpec, GradCheckOptions, Padding, Tensor};
use mdnn::train::{
    near_zero_fraction, split_dataset, Confusion, MetricsReport, Regularization, SplitSpec, TrainConfig,
};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn separable_examples(dir: &Path, seed: u64) -> std::result::Result<Vec<Example>, String> {
    let manifest = synth_dataset(dir, 64, SynthKind::Separable, seed).map_err(e2s)?;
    load_examples(&manifest, feature_spec(&VideoNetConfig::tiny(), &AudioNetConfig::tiny())).map_err(e2s)
}

// Criterion 1

/// Independent enumeration of the video net's weights from its config.
fn enumerate_weights(cfg: &VideoNetConfig) -> (usize, usize) {
    let conv = |i: usize, o: usize| (9 * i * o + 3 * o * o, 27 * i * o);
    let mut layers = vec![conv(cfg.channels, cfg.stem_channels)];
    let mut prev = cfg.stem_channels;
    for (s, &ch) in cfg.stage_channels.iter().enumerate() {
        for b in 0..cfg.blocks_per_stage {
            let downsample = s > 0 && b == 0;
            layers.push(conv(prev, ch));
            layers.push(conv(ch, ch));
            if downsample || prev != ch {
                layers.push((prev * ch, prev * ch));
            }
            prev = ch;
        }
    }
    layers.push((prev * cfg.num_classes, prev * cfg.num_classes));
    layers.iter().fold((0, 0), |(a, b), &(f, g)| (a + f, b + g))
}

fn criterion_1() -> Check {
    for c in [1usize, 8, 64] {
        let spec = Conv2Plus1DSpec::new(c, c, 1, 1);
        let (stored, full) = (spec.weight_count(), spec.full3d_weight_count());
        ensure(stored == 12 * c * c, || format!("c={c}: stored {stored} != 12c^2"))?;
        ensure(full == 27 * c * c, || format!("c={c}: full {full} != 27c^2"))?;
        ensure((stored as f64) < 0.5 * full as f64, || format!("c={c}: {stored} not below half of {full}"))?;
        let mut net = Sequential::<f64>::new();
        net.push_conv2plus1d(spec, &mut Initializer::new(0));
        let allocated = net.params.weight_count();
        ensure(allocated == stored, || format!("c={c}: allocated {allocated} != {stored}"))?;
    }
    let full_cfg = VideoNetConfig::full();
    let (fact, full3d) = enumerate_weights(&full_cfg);
    let counted = (
        full_cfg.weight_count(CountMode::Factored).map_err(e2s)?,
        full_cfg.weight_count(CountMode::Full3dEquivalent).map_err(e2s)?,
    );
    ensure(counted == (fact, full3d), || format!("full network {counted:?} vs enumeration {:?}", (fact, full3d)))?;
    let tiny = VideoNet::<f64>::build(VideoNetConfig::tiny(), 0).map_err(e2s)?;
    let (tiny_fact, _) = enumerate_weights(&tiny.config);
    let allocated = tiny.net.params.weight_count();
    ensure(allocated == tiny_fact, || format!("tiny net allocated {allocated} vs enumeration {tiny_fact}"))?;
    Ok(format!("12c^2 < 13.5c^2 for c in 1,8,64; full net {fact} stored vs {full3d} full-3d; tiny net {allocated}"))
}

// Criterion 2

fn grad_opts(cap: Option<usize>, ctx: ForwardCtx) -> GradCheckOptions {
    GradCheckOptions { tolerance: 1e-4, max_entries_per_tensor: cap, seed: 17, ctx, ..Default::default() }
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases: Vec<(&str, Sequential<f64>, Tensor<f64>, GradCheckOptions)> = Vec::new();
    let all = grad_opts(None, ForwardCtx::eval());
    let mut init = Initializer::new(5);

    let mut net = Sequential::new();
    net.push_conv2d(ConvSpec::new(2, 3, (3, 3), 1, Padding::Same), &mut init);
    cases.push(("conv2d same", net, random_tensor(&mut rng, &[2, 5, 6]), all.clone()));
    let mut net = Sequential::new();
    net.push_conv2d(ConvSpec::new(2, 3, (3, 2), 1, Padding::Valid).with_strides(2, 1), &mut init);
    cases.push(("conv2d valid strided", net, random_tensor(&mut rng, &[2, 7, 5]), all.clone()));
    let mut net = Sequential::new();
    net.push_conv2plus1d(Conv2Plus1DSpec::new(2, 3, 2, 2), &mut init);
    cases.push(("conv2plus1d", net, random_tensor(&mut rng, &[2, 4, 5, 5]), all.clone()));
    let mut net = Sequential::new();
    net.push_residual(3, 3, 1, 1, &mut init);
    cases.push(("residual identity", net, random_tensor(&mut rng, &[3, 3, 4, 4]), all.clone()));
    let mut net = Sequential::new();
    net.push_residual(2, 3, 2, 2, &mut init);
    cases.push(("residual projection", net, random_tensor(&mut rng, &[2, 4, 6, 6]), all.clone()));
    for act in [Activation::Relu, Activation::Sigmoid, Activation::SoftmaxLastDim] {
        let mut net = Sequential::new();
        net.push_dense(6, 4, &mut init).push(Layer::Activation(act));
        let name = match act {
            Activation::Relu => "dense+relu",
            Activation::Sigmoid => "dense+sigmoid",
            Activation::SoftmaxLastDim => "dense+softmax",
        };
        cases.push((name, net, random_tensor(&mut rng, &[6]), all.clone()));
    }
    let mut net = Sequential::new();
    net.push(Layer::Flatten).push_dense(12, 3, &mut init);
    cases.push(("flatten", net, random_tensor(&mut rng, &[2, 3, 2]), all.clone()));
    let mut net = Sequential::new();
    net.push(Layer::Dropout { rate: 0.5 }).push_dense(10, 3, &mut init);
    cases.push(("dropout train", net, random_tensor(&mut rng, &[10]), grad_opts(None, ForwardCtx::train(99))));
    let mut net = Sequential::new();
    net.push(Layer::GlobalAvgPool).push_dense(3, 2, &mut init);
    cases.push(("global_avg_pool", net, random_tensor(&mut rng, &[3, 2, 3, 3]), all.clone()));

    let audio = AudioNet::<f64>::build(AudioNetConfig::tiny(), 3).map_err(e2s)?;
    let audio_in = random_tensor(&mut rng, &audio.config.input_shape());
    cases.push(("tiny audio net", audio.net.clone(), audio_in.clone(), grad_opts(Some(40), ForwardCtx::eval())));
    cases.push(("tiny audio net train", audio.net, audio_in, grad_opts(Some(40), ForwardCtx::train(4))));
    let video = VideoNet::<f64>::build(VideoNetConfig::tiny(), 3).map_err(e2s)?;
    let video_in = random_tensor(&mut rng, &video.config.input_shape()).map(|v| v.abs());
    cases.push(("tiny video net", video.net, video_in, grad_opts(Some(40), ForwardCtx::eval())));
    let head = FusionHead::<f64>::build(3);
    cases.push(("fusion head", head.net, Tensor::from_vec(vec![0.7, 0.3, 0.2, 0.8]), all));

    // zero biases can leave ReLU inputs exactly on the kink
    for (i, (_, net, _, _)) in cases.iter_mut().enumerate() {
        jitter_biases(net, 0.1, i as u64);
    }
    let mut worst = 0.0f64;
    for (name, net, x, opts) in &cases {
        let report = gradient_check(net, x, opts).map_err(|e| format!("{name}: {e}"))?;
        ensure(report.passed(), || format!("{name}: max rel err {:.3e}\n{}", report.max_rel_err(), report.table()))?;
        worst = worst.max(report.max_rel_err());
    }
    Ok(format!("{} networks, worst rel err {worst:.2e}", cases.len()))
}

// Criterion 3

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fft = Radix2Fft::<f64>::new(1024).map_err(e2s)?;
    let mut fft_err = 0.0f64;
    for _ in 0..100 {
        let frame: Vec<f64> = (0..1024).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = fft.forward_real(&frame).map_err(e2s)?;
        let slow = dft_direct(&frame);
        for (a, b) in fast.iter().zip(&slow) {
            fft_err = fft_err.max((a - b).norm());
        }
    }
    ensure(fft_err < 1e-6, || format!("FFT vs DFT max diff {fft_err:e}"))?;

    let dct = Dct2::<f64>::new(80);
    let d = dct.matrix();
    let mut ortho_err = 0.0f64;
    for i in 0..80 {
        for j in 0..80 {
            let dot: f64 = (0..80).map(|k| d[k * 80 + i] * d[k * 80 + j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            ortho_err = ortho_err.max((dot - want).abs());
        }
    }
    ensure(ortho_err < 1e-12, || format!("DCT orthonormality error {ortho_err:e}"))?;

    ensure(REFERENCE_SAMPLES == 199_936, || format!("reference length {REFERENCE_SAMPLES}"))?;
    let noise = AudioClip::new((0..REFERENCE_SAMPLES).map(|_| rng.gen_range(-0.5..0.5)).collect::<Vec<f64>>());
    let m = mfcc(&noise).map_err(e2s)?;
    ensure(m.values().shape() == [778, 13, 1], || format!("shape {:?}", m.values().shape()))?;

    let silence = mfcc(&AudioClip::new(vec![0.0f64; REFERENCE_SAMPLES])).map_err(e2s)?;
    let v = silence.values();
    ensure(v.all_finite(), || "silence produced non-finite MFCCs".into())?;
    let first = &v.data()[..13];
    ensure(v.data().chunks(13).all(|row| row == first), || "silence frames differ".into())?;
    Ok(format!("fft err {fft_err:.1e}, dct err {ortho_err:.1e}, shape (778, 13, 1), silence c0 {:.4}", first[0]))
}

// Criterion 4

fn criterion_4() -> Check {
    let l = bce_loss(&[[0.5, 0.5]], &[[1.0, 0.0]]).map_err(e2s)?.value;
    ensure((l - std::f64::consts::LN_2).abs() <= 1e-12, || format!("uniform loss {l}"))?;
    let perfect = bce_loss(&[[1.0 - 1e-12, 1e-12], [1e-12, 1.0 - 1e-12]], &[one_hot(0), one_hot(1)]).map_err(e2s)?.value;
    ensure((0.0..1e-11).contains(&perfect), || format!("perfect loss {perfect:e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=32);
        let p: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(1e-6..1.0), rng.gen_range(1e-6..1.0)]).collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
        let y: Vec<[f64; 2]> = labels.iter().map(|&c| one_hot(c)).collect();
        let got = bce_loss(&p, &y).map_err(e2s)?.value;
        let want = -p.iter().zip(&labels).map(|(pi, &c)| pi[c].ln()).sum::<f64>() / n as f64;
        worst = worst.max((got - want).abs());
    }
    ensure(worst <= 1e-12, || format!("one-hot identity error {worst:e}"))?;
    Ok(format!("ln2 exact to {:.1e}, perfect {perfect:.1e}, identity err {worst:.1e}", (l - std::f64::consts::LN_2).abs()))
}

// Criterion 5

fn criterion_5() -> Check {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let examples = separable_examples(dir.path(), 5)?;
    let split = split_dataset(examples.len(), SplitSpec::new(5)).map_err(e2s)?;
    let cfg = TrainConfig { seed: 5, ..Default::default() };
    ensure(cfg.batch_size == 8 && cfg.epochs <= 50 && cfg.adam.learning_rate == 1e-3, || format!("{cfg:?}"))?;
    let (a, log_a) = train_audio(AudioNetConfig::tiny(), &examples, &split.train, &split.val, &cfg).map_err(e2s)?;
    let (b, log_b) = train_audio(AudioNetConfig::tiny(), &examples, &split.train, &split.val, &cfg).map_err(e2s)?;
    let (la, lb) = (log_a.losses(), log_b.losses());
    let identical = la.len() == lb.len() && la.iter().zip(&lb).all(|(x, y)| x.to_bits() == y.to_bits());
    ensure(identical, || "loss trajectories differ between same-seed runs".into())?;
    ensure(a.net.params.bitwise_eq(&b.net.params), || "final parameters differ between same-seed runs".into())?;
    let acc = evaluate_audio(&a, &examples, &split.train).map_err(e2s)?.accuracy.unwrap_or(0.0);
    ensure(acc >= 0.95, || format!("train accuracy {acc:.4}"))?;
    Ok(format!(
        "train accuracy {acc:.4} after {} epochs, loss {:.4} -> {:.4}, trajectories bitwise equal",
        la.len(),
        la[0],
        la[la.len() - 1]
    ))
}

// Criterion 6

fn criterion_6() -> Check {
    const SEED: u64 = 7;
    let dir = tempfile::tempdir().map_err(e2s)?;
    let manifest = synth_dataset(dir.path(), 64, SynthKind::Complementary, SEED).map_err(e2s)?;
    let examples =
        load_examples(&manifest, feature_spec(&VideoNetConfig::tiny(), &AudioNetConfig::tiny())).map_err(e2s)?;
    let split = split_dataset(examples.len(), SplitSpec::new(SEED)).map_err(e2s)?;
    // unimodal nets and the head see disjoint halves of the training split
    let (uni, head_part) = split.train.split_at(split.train.len() / 2);
    let cfg = TrainConfig { seed: SEED, ..Default::default() };
    let (audio, _) = train_audio(AudioNetConfig::tiny(), &examples, uni, &split.val, &cfg).map_err(e2s)?;
    let (video, _) = train_video(VideoNetConfig::tiny(), &examples, uni, &split.val, &cfg).map_err(e2s)?;
    let (head, _) = train_fusion(&video, &audio, &examples, head_part, &split.val, &cfg).map_err(e2s)?;
    let acc = |r: MetricsReport| r.accuracy.unwrap_or(0.0);
    let a = acc(evaluate_audio(&audio, &examples, &split.test).map_err(e2s)?);
    let v = acc(evaluate_video(&video, &examples, &split.test).map_err(e2s)?);
    let f = acc(evaluate_fusion(&video, &audio, &head, &examples, &split.test).map_err(e2s)?);
    let summary = format!("test accuracy fused {f:.4}, video {v:.4}, audio {a:.4} (n={})", split.test.len());
    ensure(f >= v.max(a), || format!("fused below a unimodal net: {summary}"))?;
    ensure(f >= 0.9, || format!("fused below 0.9: {summary}"))?;
    ensure(v <= 0.8 && a <= 0.8, || format!("unimodal above 0.8: {summary}"))?;
    Ok(summary)
}

// Criterion 7

fn criterion_7() -> Check {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let examples = separable_examples(dir.path(), 9)?;
    let split = split_dataset(examples.len(), SplitSpec::new(9)).map_err(e2s)?;
    let run = |regularization, lambda| {
        let cfg = TrainConfig { seed: 9, regularization, lambda, ..Default::default() };
        train_audio(AudioNetConfig::tiny(), &examples, &split.train, &split.val, &cfg).map(|(net, _)| net).map_err(e2s)
    };
    let plain = run(Regularization::None, 0.0)?;
    let l2 = run(Regularization::L2, 0.1)?;
    let l1 = run(Regularization::L1, 0.01)?;
    let (sq_plain, sq_l2) = (plain.net.params.weight_sum_of_squares(), l2.net.params.weight_sum_of_squares());
    let (nz_plain, nz_l1) = (near_zero_fraction(&plain.net.params, 1e-4), near_zero_fraction(&l1.net.params, 1e-4));
    let summary = format!("sum w^2 {sq_l2:.3} (L2) vs {sq_plain:.3}; |w|<1e-4 fraction {nz_l1:.4} (L1) vs {nz_plain:.4}");
    ensure(sq_l2 < sq_plain, || format!("L2 did not shrink weights: {summary}"))?;
    ensure(nz_l1 > nz_plain, || format!("L1 did not sparsify weights: {summary}"))?;
    Ok(summary)
}

// Criterion 8

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10_000 {
        let max = if i % 4 == 0 { 3 } else { 1_000_000 };
        let c = Confusion {
            tp: rng.gen_range(0..max),
            fp: rng.gen_range(0..max),
            fn_: rng.gen_range(0..max),
            tn: rng.gen_range(0..max),
        };
        let r = MetricsReport::from_confusion(c);
        let total = c.tp + c.fp + c.fn_ + c.tn;
        let close = |x: Option<f64>, num: u64, den: u64| match x {
            None => den == 0,
            Some(v) => den > 0 && (v * den as f64 - num as f64).abs() <= 1e-9 * den as f64 && (0.0..=1.0).contains(&v),
        };
        ensure(close(r.accuracy, c.tp + c.tn, total), || format!("accuracy {c:?} -> {r:?}"))?;
        ensure(close(r.precision, c.tp, c.tp + c.fp), || format!("precision {c:?} -> {r:?}"))?;
        ensure(close(r.recall, c.tp, c.tp + c.fn_), || format!("recall {c:?} -> {r:?}"))?;
        if max == 3 {
            let mut pairs = Vec::new();
            for (n, pair) in [(c.tp, (1, 1)), (c.fp, (1, 0)), (c.fn_, (0, 1)), (c.tn, (0, 0))] {
                pairs.extend(std::iter::repeat_n(pair, n as usize));
            }
            let (pred, actual): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            ensure(MetricsReport::from_predictions(&pred, &actual) == r, || format!("from_predictions {c:?}"))?;
        }
    }
    let hand = MetricsReport::from_confusion(Confusion { tp: 97, fn_: 3, fp: 12, tn: 88 });
    ensure(hand.recall == Some(0.97), || format!("hand recall {:?}", hand.recall))?;
    ensure(hand.accuracy == Some(0.925), || format!("hand accuracy {:?}", hand.accuracy))?;
    ensure(hand.precision == Some(97.0 / 109.0), || format!("hand precision {:?}", hand.precision))?;
    Ok("10000 random confusions; hand case recall 0.97, accuracy 0.925".into())
}

// Criterion 9

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let specials = [0.0, -0.0, f64::MIN_POSITIVE / 4.0, f64::MAX, -1e-300, f64::EPSILON];
    let mut tensors = vec![Tensor::scalar(-2.5f64), Tensor::from_vec(specials.to_vec())];
    for shape in [vec![3, 4], vec![1, 4, 16, 16], vec![778, 13, 1]] {
        tensors.push(random_tensor(&mut rng, &shape));
    }
    let dir = tempfile::tempdir().map_err(e2s)?;
    for (i, t) in tensors.iter().enumerate() {
        let bytes = encode_container(t).map_err(e2s)?;
        let back: Tensor<f64> = decode_container(&bytes).map_err(e2s)?;
        ensure(back.bitwise_eq(t), || format!("in-memory round trip {i} differs"))?;
        let path = dir.path().join(format!("t{i}.ntc"));
        write_container(&path, t).map_err(e2s)?;
        let back: Tensor<f64> = read_container(&path).map_err(e2s)?;
        ensure(back.bitwise_eq(t), || format!("file round trip {i} differs"))?;
        ensure(encode_container(&back).map_err(e2s)? == bytes, || format!("re-encoding {i} differs"))?;
    }

    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/eight_samples.wav");
    let clip: AudioClip<f64> = load_wav(&fixture).map_err(e2s)?;
    let want = [0.0, 0.5, -0.5, 0.999969482421875, -1.0, 0.000030517578125, -0.000030517578125, 0.25];
    ensure(clip.sample_rate_hz == 16_000, || format!("rate {}", clip.sample_rate_hz))?;
    ensure(clip.samples == want, || format!("decoded {:?}", clip.samples))?;

    let split = split_dataset(634, SplitSpec::new(0)).map_err(e2s)?;
    let sizes = (split.train.len(), split.val.len(), split.test.len());
    ensure(sizes == (507, 63, 64), || format!("split sizes {sizes:?}"))?;
    let mut all: Vec<usize> = split.train.iter().chain(&split.val).chain(&split.test).copied().collect();
    all.sort_unstable();
    ensure(all == (0..634).collect::<Vec<_>>(), || "split is not a partition".into())?;
    Ok(format!("{} containers bitwise, WAV fixture exact, split(634) = {sizes:?}", tensors.len()))
}

type Criterion = (&'static str, Duration, fn() -> Check);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("parameter counts", Duration::from_secs(1), criterion_1),
        ("gradient integrity", Duration::from_secs(120), criterion_2),
        ("dsp correctness", Duration::from_secs(30), criterion_3),
        ("loss semantics", Duration::from_secs(5), criterion_4),
        ("training reference run", Duration::from_secs(300), criterion_5),
        ("fusion superiority", Duration::from_secs(600), criterion_6),
        ("regularization effects", Duration::from_secs(600), criterion_7),
        ("metrics identities", Duration::from_secs(5), criterion_8),
        ("format stability", Duration::from_secs(60), criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *budget => Err(format!("{detail}; over budget of {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS [{:.2}s] {name}: {detail}", i + 1, took.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL [{:.2}s] {name}: {why}", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
