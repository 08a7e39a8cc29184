//! Test-pattern frames, interference injection, and labelled datasets.

mod colour;
mod dataset;
mod frame;
mod noise;

pub use colour::{flat_blue, render_colour_bars, render_colour_bars_with, rgb_to_ycbcr, ycbcr_to_rgb, BARS};
pub use dataset::{
    build_dataset, frame_stream_index, split_counts, DatasetConfig, DatasetManifest, ManifestEntry, Split,
    CLEAN_FILE, MANIFEST_FILE,
};
pub use frame::{Frame, Plane, Range, EMIF_HEADER_LEN, EMIF_MAGIC, EMIF_VERSION};
pub use noise::{inject_noise, AmplitudeRange, NoiseLevel, NoiseParams};
