//! JSON config file. Keys mirror the long flags in snake_case; a flag given
//! on the command line wins over the file, and the file over built-in
//! defaults.

use std::path::Path;

use serde::Deserialize;

use crate::args::{EnsembleFlags, MethodChoice};
use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub response: Option<String>,
    pub m_min: Option<usize>,
    pub m_max: Option<usize>,
    pub s: Option<usize>,
    pub psi_low: Option<f64>,
    pub psi_high: Option<f64>,
    pub prior_variance: Option<f64>,
    pub level: Option<f64>,
    pub scenario: Option<String>,
    pub method: Option<String>,
    pub replicates: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Fills unset flags from the file.
    pub fn merge_ensemble(&self, flags: &EnsembleFlags) -> EnsembleFlags {
        EnsembleFlags {
            m_min: flags.m_min.or(self.m_min),
            m_max: flags.m_max.or(self.m_max),
            s: flags.s.or(self.s),
            psi_low: flags.psi_low.or(self.psi_low),
            psi_high: flags.psi_high.or(self.psi_high),
            prior_variance: flags.prior_variance.or(self.prior_variance),
            level: flags.level.or(self.level),
        }
    }

    pub fn method(&self) -> Result<Option<MethodChoice>, CliError> {
        use clap::ValueEnum;
        self.method
            .as_deref()
            .map(|m| {
                MethodChoice::from_str(m, true)
                    .map_err(|_| CliError::Usage(format!("unknown method {m:?} in config")))
            })
            .transpose()
    }
}
