//! Run settings read from flat `key=value` files, with flags taking
//! precedence. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mdnn::data::kv::KvMap;
use mdnn::nn::audio::AudioNetConfig;
use mdnn::nn::video::VideoNetConfig;
use mdnn::train::{AdamConfig, ModelKind, Objective, Regularization, TrainConfig};

use crate::error::{CliError, CliResult};

pub const TRAIN_KEYS: &[&str] = &[
    "size",
    "epochs",
    "batch_size",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "regularization",
    "lambda",
    "objective",
    "seed",
    "split_seed",
    "train_subset",
    "video_model",
    "audio_model",
];

pub const NET_KEYS: &[&str] =
    &["size", "channels", "frames", "height", "width", "stem_channels", "stage_channels", "blocks_per_stage"];

pub fn read_kv(path: Option<&Path>) -> CliResult<KvMap> {
    match path {
        None => Ok(KvMap::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Lib(mdnn::Error::Input(format!("{}: {e}", p.display()))))?;
            Ok(KvMap::parse(&text)?)
        }
    }
}

fn reject_unknown(kv: &KvMap, allowed: &[&str]) -> CliResult<()> {
    match kv.pairs().iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
        Some((k, _)) => Err(CliError::Usage(format!("unknown config key '{k}' (allowed: {})", allowed.join(", ")))),
        None => Ok(()),
    }
}

fn value<V: FromStr>(kv: &KvMap, key: &str, default: V) -> CliResult<V> {
    match kv.get(key) {
        None => Ok(default),
        Some(raw) => raw.parse().map_err(|_| CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))),
    }
}

/// Architecture preset: `full` is the reference size, `tiny` the reduced one
/// used for quick runs and tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Size {
    Full,
    Tiny,
}

impl Size {
    pub fn as_str(self) -> &'static str {
        match self {
            Size::Full => "full",
            Size::Tiny => "tiny",
        }
    }

    pub fn video(self) -> VideoNetConfig {
        match self {
            Size::Full => VideoNetConfig::full(),
            Size::Tiny => VideoNetConfig::tiny(),
        }
    }

    pub fn audio(self) -> AudioNetConfig {
        match self {
            Size::Full => AudioNetConfig::standard(),
            Size::Tiny => AudioNetConfig::tiny(),
        }
    }
}

impl FromStr for Size {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "full" => Ok(Size::Full),
            "tiny" => Ok(Size::Tiny),
            _ => Err(()),
        }
    }
}

/// Which part of the training split a run fits on. Training the unimodal
/// networks on one half and the fusion head on the other keeps the head from
/// learning on outputs the unimodal networks have memorised.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subset {
    All,
    FirstHalf,
    SecondHalf,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::FirstHalf => "first_half",
            Subset::SecondHalf => "second_half",
        }
    }

    pub fn select(self, indices: &[usize]) -> &[usize] {
        let half = indices.len() / 2;
        match self {
            Subset::All => indices,
            Subset::FirstHalf => &indices[..half],
            Subset::SecondHalf => &indices[half..],
        }
    }
}

impl FromStr for Subset {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "all" => Ok(Subset::All),
            "first_half" => Ok(Subset::FirstHalf),
            "second_half" => Ok(Subset::SecondHalf),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSettings {
    pub size: Size,
    pub train: TrainConfig,
    pub split_seed: u64,
    pub subset: Subset,
    pub video_model: Option<PathBuf>,
    pub audio_model: Option<PathBuf>,
}

impl TrainSettings {
    /// Relative model paths in the file are taken relative to `base`, the
    /// directory holding the config file.
    pub fn resolve(model: ModelKind, kv: &KvMap, seed_flag: Option<u64>, base: &Path) -> CliResult<Self> {
        reject_unknown(kv, TRAIN_KEYS)?;
        let defaults = TrainConfig::default();
        let seed = match seed_flag {
            Some(s) => s,
            None => value(kv, "seed", defaults.seed)?,
        };
        let regularization = Regularization::parse(kv.get("regularization").unwrap_or("none"))?;
        let objective = Objective::parse(kv.get("objective").unwrap_or("auto"))?;
        let train = TrainConfig {
            batch_size: value(kv, "batch_size", defaults.batch_size)?,
            epochs: value(kv, "epochs", defaults.epochs)?,
            adam: AdamConfig {
                learning_rate: value(kv, "learning_rate", defaults.adam.learning_rate)?,
                beta1: value(kv, "beta1", defaults.adam.beta1)?,
                beta2: value(kv, "beta2", defaults.adam.beta2)?,
                epsilon: value(kv, "epsilon", defaults.adam.epsilon)?,
            },
            regularization,
            lambda: value(kv, "lambda", defaults.lambda)?,
            objective,
            seed,
        };
        train.validate()?;
        let size = value(kv, "size", Size::Full)
            .map_err(|_| CliError::Usage("config key 'size' must be 'full' or 'tiny'".into()))?;
        let subset = value(kv, "train_subset", Subset::All).map_err(|_| {
            CliError::Usage("config key 'train_subset' must be 'all', 'first_half' or 'second_half'".into())
        })?;
        let path = |key: &str| kv.get(key).map(|p| base.join(p));
        let (video_model, audio_model) = (path("video_model"), path("audio_model"));
        match model {
            ModelKind::Fusion if video_model.is_none() || audio_model.is_none() => {
                return Err(CliError::Usage("fusion training needs 'video_model' and 'audio_model' in the config".into()))
            }
            ModelKind::Video | ModelKind::Audio if video_model.is_some() || audio_model.is_some() => {
                return Err(CliError::Usage("'video_model' and 'audio_model' apply only to --model fusion".into()))
            }
            _ => {}
        }
        Ok(Self {
            size,
            train,
            split_seed: value(kv, "split_seed", seed)?,
            subset,
            video_model,
            audio_model,
        })
    }

    /// Every setting as `key=value` lines; the output parses back to the
    /// same settings.
    pub fn to_kv(&self) -> String {
        let t = &self.train;
        let mut s = String::new();
        let _ = writeln!(s, "size={}", self.size.as_str());
        let _ = writeln!(s, "epochs={}", t.epochs);
        let _ = writeln!(s, "batch_size={}", t.batch_size);
        let _ = writeln!(s, "learning_rate={}", t.adam.learning_rate);
        let _ = writeln!(s, "beta1={}", t.adam.beta1);
        let _ = writeln!(s, "beta2={}", t.adam.beta2);
        let _ = writeln!(s, "epsilon={}", t.adam.epsilon);
        let _ = writeln!(s, "regularization={}", t.regularization.as_str());
        let _ = writeln!(s, "lambda={}", t.lambda);
        let _ = writeln!(s, "objective={}", t.objective.as_str());
        let _ = writeln!(s, "seed={}", t.seed);
        let _ = writeln!(s, "split_seed={}", self.split_seed);
        let _ = writeln!(s, "train_subset={}", self.subset.as_str());
        for (key, p) in [("video_model", &self.video_model), ("audio_model", &self.audio_model)] {
            if let Some(p) = p {
                let _ = writeln!(s, "{key}={}", p.display());
            }
        }
        s
    }
}

/// Video architecture for `net param-count`: a preset with optional
/// per-field overrides.
pub fn net_config(kv: &KvMap) -> CliResult<(Size, VideoNetConfig)> {
    reject_unknown(kv, NET_KEYS)?;
    let size =
        value(kv, "size", Size::Full).map_err(|_| CliError::Usage("config key 'size' must be 'full' or 'tiny'".into()))?;
    let mut c = size.video();
    c.channels = value(kv, "channels", c.channels)?;
    c.frames = value(kv, "frames", c.frames)?;
    c.height = value(kv, "height", c.height)?;
    c.width = value(kv, "width", c.width)?;
    c.stem_channels = value(kv, "stem_channels", c.stem_channels)?;
    c.blocks_per_stage = value(kv, "blocks_per_stage", c.blocks_per_stage)?;
    if let Some(raw) = kv.get("stage_channels") {
        c.stage_channels = raw
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("config key 'stage_channels': cannot parse '{raw}'")))?;
    }
    Ok((size, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(text: &str) -> KvMap {
        KvMap::parse(text).unwrap()
    }

    #[test]
    fn defaults_follow_train_config() {
        let s = TrainSettings::resolve(ModelKind::Audio, &kv(""), None, Path::new(".")).unwrap();
        assert_eq!(s.train, TrainConfig::default());
        assert_eq!((s.size, s.subset, s.split_seed), (Size::Full, Subset::All, 0));
    }

    #[test]
    fn flag_seed_wins_and_drives_split_seed() {
        let s = TrainSettings::resolve(ModelKind::Audio, &kv("seed=4"), Some(9), Path::new(".")).unwrap();
        assert_eq!((s.train.seed, s.split_seed), (9, 9));
        let s = TrainSettings::resolve(ModelKind::Audio, &kv("seed=4\nsplit_seed=2"), None, Path::new(".")).unwrap();
        assert_eq!((s.train.seed, s.split_seed), (4, 2));
    }

    #[test]
    fn unknown_and_misplaced_keys() {
        let err = TrainSettings::resolve(ModelKind::Audio, &kv("learning_rat=0.1"), None, Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("learning_rat"));
        let err = TrainSettings::resolve(ModelKind::Audio, &kv("video_model=v"), None, Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = TrainSettings::resolve(ModelKind::Fusion, &kv("video_model=v"), None, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("audio_model"));
        let err = TrainSettings::resolve(ModelKind::Audio, &kv("batch_size=0"), None, Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn resolved_text_round_trips() {
        let text = "size=tiny\nepochs=3\nregularization=l1\nlambda=0.01\ntrain_subset=second_half\nvideo_model=v\naudio_model=a";
        let s = TrainSettings::resolve(ModelKind::Fusion, &kv(text), Some(5), Path::new("/base")).unwrap();
        assert_eq!(s.video_model.as_deref(), Some(Path::new("/base/v")));
        let again = TrainSettings::resolve(ModelKind::Fusion, &kv(&s.to_kv()), None, Path::new("/elsewhere")).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn subsets_split_at_the_midpoint() {
        let idx = [5, 1, 4, 2, 3];
        assert_eq!(Subset::All.select(&idx), &idx);
        assert_eq!(Subset::FirstHalf.select(&idx), &[5, 1]);
        assert_eq!(Subset::SecondHalf.select(&idx), &[4, 2, 3]);
    }

    #[test]
    fn net_overrides() {
        let (size, c) = net_config(&kv("size=tiny\nstage_channels=4,8,16")).unwrap();
        assert_eq!(size, Size::Tiny);
        assert_eq!(c.stage_channels, vec![4, 8, 16]);
        assert!(net_config(&kv("dropout=0.1")).is_err());
    }
}
