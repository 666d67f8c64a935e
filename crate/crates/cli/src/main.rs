//! `mdnn` command-line tool. Results go to stdout, diagnostics to stderr.
//! Exit codes: 0 success, 1 usage, 2 data or format, 3 numeric failure.

mod commands;
mod error;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mdnn::data::SynthKind;
use mdnn::train::{ModelKind, SplitPart};

use error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "mdnn", version, about = "Late-fusion audio/video classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// MFCC front-end.
    Mfcc {
        #[command(subcommand)]
        action: MfccAction,
    },
    /// Network architecture queries.
    Net {
        #[command(subcommand)]
        action: NetAction,
    },
    /// Write a synthetic dataset and its manifest.
    Synth {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Clips per class.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one network and save it.
    Train {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Manifest CSV.
        #[arg(long)]
        data: PathBuf,
        /// key=value settings file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `seed` from the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metrics of a saved model on one split of a manifest.
    Eval {
        #[arg(long)]
        model_dir: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: SplitArg,
        /// Defaults to the seed recorded when the model was trained.
        #[arg(long)]
        split_seed: Option<u64>,
    },
    /// Classify one clip pair with a fusion bundle.
    Predict {
        #[arg(long)]
        model_dir: PathBuf,
        /// Frames in the tensor container format.
        #[arg(long)]
        video: PathBuf,
        /// 16 kHz mono PCM WAV.
        #[arg(long)]
        audio: PathBuf,
    },
    /// Finite-difference check of a freshly built network.
    Gradcheck {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Use the reduced architecture.
        #[arg(long)]
        tiny: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Entries sampled per parameter tensor.
        #[arg(long, default_value_t = 24)]
        entries: usize,
    },
}

#[derive(Subcommand, Debug)]
enum MfccAction {
    /// WAV to a (778, 13, 1) MFCC container.
    Extract {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Shape and value range of a container.
    Inspect {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum NetAction {
    /// Factored against full 3-D weight counts.
    ParamCount {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Video,
    Audio,
    Fusion,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Video => ModelKind::Video,
            ModelArg::Audio => ModelKind::Audio,
            ModelArg::Fusion => ModelKind::Fusion,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Separable,
    Complementary,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SplitArg {
    Train,
    Val,
    Test,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Mfcc { action: MfccAction::Extract { input, out } } => commands::mfcc_extract(&input, &out),
        Command::Mfcc { action: MfccAction::Inspect { input } } => commands::mfcc_inspect(&input),
        Command::Net { action: NetAction::ParamCount { config } } => commands::param_count(config.as_deref()),
        Command::Synth { kind, n, seed, out } => {
            let kind = match kind {
                KindArg::Separable => SynthKind::Separable,
                KindArg::Complementary => SynthKind::Complementary,
            };
            commands::synth(kind, n, seed, &out)
        }
        Command::Train { model, data, config, seed, out } => {
            commands::train(model.into(), &data, config.as_deref(), seed, &out)
        }
        Command::Eval { model_dir, data, split, split_seed } => {
            let part = match split {
                SplitArg::Train => SplitPart::Train,
                SplitArg::Val => SplitPart::Val,
                SplitArg::Test => SplitPart::Test,
            };
            commands::eval(&model_dir, &data, part, split_seed)
        }
        Command::Predict { model_dir, video, audio } => commands::predict(&model_dir, &video, &audio),
        Command::Gradcheck { model, tiny, seed, entries } => commands::gradcheck(model.into(), tiny, seed, entries),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
