//! On-disk formats, preprocessing to fixed shapes, synthetic data and model
//! persistence.

mod container;
mod dataset;
pub mod kv;
mod manifest;
mod model_io;
mod preprocess;
pub mod synth;

pub use container::{decode_container, encode_container, read_container, write_container};
pub use dataset::{load_example, load_examples, load_mfcc, load_video, Example, FeatureSpec};
pub use manifest::{Manifest, ManifestRow, MANIFEST_HEADER};
pub use model_io::{
    audio_config_from, detect_kind, load_bundle, load_model, model_hash, save_bundle, save_model, video_config_from,
    weight_values, FusionBundle, SavedModel, CONCAT_ORDER,
};
pub use preprocess::{preprocess_audio, preprocess_video, resize_bilinear, uniform_frame_indices};
pub use synth::{synth_dataset, SynthKind};
