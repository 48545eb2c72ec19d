//! Synthetic push-broom datasets with known ground truth for every
//! pipeline stage: per-pair shifts, clock offsets, tie points and the
//! boresight itself.

mod render;
mod texture;

pub use render::{
    render_pushbroom, DatasetManifest, PerturbationSpec, SegmentSpec, SimConfig, SynthDataset,
};
pub use texture::{generate_texture, sample_matern_field, SceneTexture, TextureKind, MIN_TEXTURE_DIM};
