//! Dataset directory conventions shared by the pipeline commands.
//!
//! A dataset directory accumulates files as the stages run:
//! `cube.*` + `trajectory.csv` (+ optional ground-truth files) from
//! `synth` or external preparation, then `shifts.csv`, `offsets.csv` and
//! `rectified.*` from `rectify`, `ties.csv` from `match`, and
//! `calibration_report.txt` from `calibrate`.

use crate::{CliError, CliResult};
use pushbroom_core::cube::HyperCube;
use pushbroom_core::synth::DatasetManifest;
use pushbroom_core::trajectory::Trajectory;
use std::path::{Path, PathBuf};

pub struct Dataset {
    pub dir: PathBuf,
}

impl Dataset {
    pub fn open(dir: &Path) -> CliResult<Self> {
        if !dir.is_dir() {
            return Err(CliError::usage(format!(
                "dataset directory {} does not exist",
                dir.display()
            )));
        }
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn cube_stem(&self) -> PathBuf {
        self.dir.join("cube")
    }

    pub fn rectified_stem(&self) -> PathBuf {
        self.dir.join("rectified")
    }

    pub fn mask_stem(&self) -> PathBuf {
        self.dir.join("rectified_mask")
    }

    pub fn trajectory_path(&self) -> PathBuf {
        self.dir.join("trajectory.csv")
    }

    pub fn shifts_path(&self) -> PathBuf {
        self.dir.join("shifts.csv")
    }

    pub fn offsets_path(&self) -> PathBuf {
        self.dir.join("offsets.csv")
    }

    pub fn ties_path(&self) -> PathBuf {
        self.dir.join("ties.csv")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.join("manifest.txt")
    }

    pub fn true_shifts_path(&self) -> PathBuf {
        self.dir.join("shifts_true.csv")
    }

    pub fn load_cube(&self) -> CliResult<HyperCube> {
        Ok(HyperCube::read(&self.cube_stem())?)
    }

    pub fn load_rectified(&self) -> CliResult<HyperCube> {
        Ok(HyperCube::read(&self.rectified_stem())?)
    }

    pub fn has_rectified(&self) -> bool {
        self.rectified_stem().with_extension("hdr").exists()
    }

    pub fn load_trajectory(&self, path_override: Option<&Path>) -> CliResult<Trajectory> {
        let path = path_override
            .map(Path::to_path_buf)
            .unwrap_or_else(|| self.trajectory_path());
        Ok(Trajectory::read(&path)?)
    }

    pub fn load_manifest(&self) -> Option<DatasetManifest> {
        DatasetManifest::read(&self.manifest_path()).ok()
    }

    /// Ground-truth tie file for a segment pair, when the generator wrote
    /// one.
    pub fn true_ties_path(&self, i: usize, j: usize) -> PathBuf {
        self.dir.join(format!("ties_true_{i}_{j}.csv"))
    }
}
