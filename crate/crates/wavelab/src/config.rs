//! Experiment configuration: a single JSON document per experiment, echoed
//! verbatim into the output manifest so a run can be reproduced from its
//! manifest alone.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::{Profile, ProfileKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentKind {
    #[serde(rename = "run-radial")]
    RunRadial,
    #[serde(rename = "run-penrose")]
    RunPenrose,
    #[serde(rename = "run-perturb")]
    RunPerturb,
    #[serde(rename = "check-compat")]
    CheckCompat,
    #[serde(rename = "diagnose")]
    Diagnose,
    #[serde(rename = "hardy-test")]
    HardyTest,
    #[serde(rename = "sweep")]
    Sweep,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// outer radius; defaults to data support + t_end + 1 (causal sizing)
    #[serde(default)]
    pub r_max: Option<f64>,
    /// grid spacing; mutually redundant with num_points (h wins)
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub num_points: Option<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            r_max: None,
            h: Some(0.01),
            num_points: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_end: f64,
    /// explicit step; when absent, cfl_fraction × (stability ceiling)
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl_fraction: f64,
}

fn default_cfl() -> f64 {
    0.45
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub profile: String,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "default_center")]
    pub center: f64,
    #[serde(default = "one")]
    pub width: f64,
}

fn one() -> f64 {
    1.0
}
fn default_center() -> f64 {
    2.0
}

impl ProfileSpec {
    pub fn build(&self) -> Result<Profile> {
        Profile::new(
            ProfileKind::from_name(&self.profile)?,
            self.amplitude,
            self.center,
            self.width,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub u0: ProfileSpec,
    #[serde(default)]
    pub u1: Option<ProfileSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub params: ParamsSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub time: Option<TimeSpec>,
    #[serde(default)]
    pub data: Option<DataSpec>,
    pub output_dir: String,
    #[serde(default)]
    pub seed: u64,

    // experiment-specific knobs
    /// Lipschitz truncation level for run-radial (None = full power)
    #[serde(default)]
    pub truncation: Option<f64>,
    /// gluing margin for the compact energies (default 0.2)
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub num_alpha: Option<usize>,
    /// enable the radial/compact dual-representation comparison
    #[serde(default)]
    pub dual_oracle: Option<bool>,
    #[serde(default)]
    pub oracle_tolerance: Option<f64>,
    /// relative energy-drift assertion for run-radial
    #[serde(default)]
    pub energy_tolerance: Option<f64>,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    #[serde(default)]
    pub ell: Option<usize>,
    /// "linearized" | "axisym" | "both"
    #[serde(default)]
    pub sweep_mode: Option<String>,
    #[serde(default)]
    pub perturbation: Option<ProfileSpec>,
    #[serde(default)]
    pub compat_order: Option<usize>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub pairs: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub n_theta: Option<usize>,
    /// steps between logged/dumped snapshots
    #[serde(default)]
    pub snapshot_stride: Option<usize>,
    /// dump full field snapshots along radial runs
    #[serde(default)]
    pub dump_snapshots: Option<bool>,
    /// tail radius for the weighted data norm
    #[serde(default)]
    pub m_radius: Option<f64>,
    #[serde(default)]
    pub blowup_threshold: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> Result<crate::fields::Params> {
        crate::fields::Params::new(self.params.n, self.params.p, self.params.label.clone())
    }

    /// Resolve the output directory against WAVELAB_OUT (or a given root).
    pub fn resolved_output_dir(&self, root: Option<&Path>) -> PathBuf {
        let dir = PathBuf::from(&self.output_dir);
        if dir.is_absolute() {
            return dir;
        }
        match root {
            Some(r) => r.join(dir),
            None => match std::env::var_os("WAVELAB_OUT") {
                Some(r) => PathBuf::from(r).join(dir),
                None => dir,
            },
        }
    }
}

/// Run manifest: the config echo plus provenance, sufficient to re-run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}
