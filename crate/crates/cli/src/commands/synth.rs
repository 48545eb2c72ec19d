//! `synth`: render a synthetic dataset from a TOML config.

use crate::config::SynthConfig;
use crate::CliResult;
use pushbroom_core::synth::{generate_texture, render_pushbroom};
use std::path::Path;

pub fn run(config_path: &Path, out: &Path) -> CliResult<()> {
    let config = SynthConfig::load(config_path)?;
    let kind = config.texture_kind()?;
    let mut texture = generate_texture(&kind, (config.scene.size, config.scene.size), config.seed)?;
    texture.gsd = config.scene.gsd_m;

    let sim = config.sim_config();
    let dataset = render_pushbroom(&texture, &sim)?;
    dataset.write_dir(out)?;

    println!(
        "dataset written to {}: {} lines x {} samples x {} bands, {} segment(s), {} tie set(s)",
        out.display(),
        dataset.cube.lines(),
        dataset.cube.samples_per_line(),
        dataset.cube.bands(),
        dataset.segments.len(),
        dataset.true_ties.len()
    );
    Ok(())
}
