//! TOML run configuration.
//!
//! ```toml
//! modes = 1
//! epsilon = [0.5, 0.0, 0.0, 0.5]   # row-major 2s x 2s
//! beta = [1.0, 0.0, 0.0, 0.25]
//! k_matrix = [1.0, 0.0, 0.0, 1.0]  # optional, default identity
//! energy = 2.0                     # or an [energy_sweep] table
//! samples = 100000
//! seed = 0
//! log_base = "2"                   # "2" or "e"
//! optimizer = "auto"               # see `capacity::optimizer_names`
//!
//! [energy_sweep]
//! start = 0.5
//! stop = 4.0
//! steps = 8
//! ```

use std::path::Path;

use serde::Deserialize;

use crate::capacity::{EnergyConstraint, LogBase};
use crate::channel::GaussianMeasurement;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::symplectic::{CovarianceMatrix, SymplecticSpace};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl EnergySweep {
    pub fn grid(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + span * i as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub modes: usize,
    pub epsilon: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub k_matrix: Option<Vec<f64>>,
    #[serde(default)]
    pub energy: Option<f64>,
    #[serde(default)]
    pub energy_sweep: Option<EnergySweep>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_log_base")]
    pub log_base: String,
    #[serde(default = "default_optimizer")]
    pub optimizer: String,
}

fn default_samples() -> usize {
    100_000
}

fn default_log_base() -> String {
    "2".into()
}

fn default_optimizer() -> String {
    "auto".into()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.modes == 0 {
            return Err(Error::Config("modes must be at least 1".into()));
        }
        let want = 4 * self.modes * self.modes;
        let check = |name: &str, v: &[f64]| {
            if v.len() != want {
                Err(Error::InvalidInput(format!(
                    "{name} has {} entries, expected {want} for {} mode(s)",
                    v.len(),
                    self.modes
                )))
            } else {
                Ok(())
            }
        };
        check("epsilon", &self.epsilon)?;
        check("beta", &self.beta)?;
        if let Some(k) = &self.k_matrix {
            check("k_matrix", k)?;
        }
        if let Some(sw) = &self.energy_sweep {
            if !(sw.start < sw.stop) || sw.steps < 2 {
                return Err(Error::Config(
                    "energy_sweep needs start < stop and steps >= 2".into(),
                ));
            }
        }
        self.log_base()?;
        Ok(())
    }

    pub fn log_base(&self) -> Result<LogBase> {
        match self.log_base.as_str() {
            "2" => Ok(LogBase::Two),
            "e" => Ok(LogBase::E),
            other => Err(Error::Config(format!(
                "log_base must be \"2\" or \"e\", got {other:?}"
            ))),
        }
    }

    pub fn space(&self) -> Result<SymplecticSpace> {
        SymplecticSpace::new(self.modes)
    }

    fn dim(&self) -> usize {
        2 * self.modes
    }

    pub fn epsilon_matrix(&self) -> Result<Matrix> {
        linalg::from_row_major(self.dim(), self.dim(), &self.epsilon)
    }

    pub fn beta_covariance(&self) -> Result<CovarianceMatrix> {
        CovarianceMatrix::from_row_major(self.dim(), &self.beta)
    }

    pub fn k_matrix(&self) -> Result<Matrix> {
        match &self.k_matrix {
            Some(k) => linalg::from_row_major(self.dim(), self.dim(), k),
            None => Ok(Matrix::identity(self.dim(), self.dim())),
        }
    }

    pub fn measurement(&self, space: &SymplecticSpace) -> Result<GaussianMeasurement> {
        GaussianMeasurement::new(self.k_matrix()?, self.beta_covariance()?, space)
    }

    pub fn energy_constraint(&self) -> Result<EnergyConstraint> {
        let energy = self
            .energy
            .ok_or_else(|| Error::Config("this command needs `energy`".into()))?;
        EnergyConstraint::new(self.epsilon_matrix()?, energy)
    }
}
