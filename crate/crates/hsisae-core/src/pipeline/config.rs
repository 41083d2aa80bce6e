//! Experiment configuration: one scheme, one data source, hyperparameters
//! with documented defaults. Every default is materialized before the run
//! so the report echoes a fully resolved configuration.

use serde::{Deserialize, Serialize};

use crate::autoenc::AeHyper;
use crate::deepstack::FinetuneHyper;
use crate::error::{Error, Result};
use crate::hsidata::SynthSpec;
use crate::linsvm::SvmHyper;
use crate::specspatial::PatchSpec;

/// The five classification schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "svm")]
    Svm,
    #[serde(rename = "pca-svm")]
    PcaSvm,
    #[serde(rename = "ae-svm")]
    AeSvm,
    #[serde(rename = "sae-lr")]
    SaeLr,
    #[serde(rename = "ssae-lr")]
    SsaeLr,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Svm => "svm",
            Scheme::PcaSvm => "pca-svm",
            Scheme::AeSvm => "ae-svm",
            Scheme::SaeLr => "sae-lr",
            Scheme::SsaeLr => "ssae-lr",
        }
    }
}

/// Where the scene comes from: files on disk or a generated scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Files { cube: String, gt: String },
    Synth(SynthSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.5,
            seed: 1,
        }
    }
}

/// A full experiment description. Omitted fields take the defaults shown
/// by `ExperimentConfig::default_for`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: Scheme,
    pub data: DataSource,
    #[serde(default)]
    pub split: SplitConfig,
    /// Hidden layer widths for the autoencoder schemes, input-to-output.
    #[serde(default = "default_hidden_sizes")]
    pub hidden_sizes: Vec<usize>,
    #[serde(default)]
    pub ae: AeHyper,
    #[serde(default)]
    pub finetune: FinetuneHyper,
    #[serde(default)]
    pub svm: SvmHyper,
    /// Components kept by PCA. Default: 3 for ssae-lr; for pca-svm, the
    /// smallest count explaining 99.9% of variance.
    #[serde(default)]
    pub pca_components: Option<usize>,
    #[serde(default)]
    pub patch: PatchSpec,
}

fn default_hidden_sizes() -> Vec<usize> {
    vec![100]
}

impl ExperimentConfig {
    pub fn new(scheme: Scheme, data: DataSource) -> ExperimentConfig {
        ExperimentConfig {
            scheme,
            data,
            split: SplitConfig::default(),
            hidden_sizes: default_hidden_sizes(),
            ae: AeHyper::default(),
            finetune: FinetuneHyper::default(),
            svm: SvmHyper::default(),
            pca_components: None,
            patch: PatchSpec::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.split.train_fraction.is_finite()
            && 0.0 < self.split.train_fraction
            && self.split.train_fraction < 1.0)
        {
            return fail(format!(
                "split.train_fraction must be in (0, 1), got {}",
                self.split.train_fraction
            ));
        }
        if let DataSource::Synth(spec) = &self.data {
            spec.validate().map_err(config_err)?;
        }
        match self.scheme {
            Scheme::Svm => {}
            Scheme::PcaSvm => {
                if self.pca_components == Some(0) {
                    return fail("pca_components must be positive".into());
                }
            }
            Scheme::AeSvm => {
                if self.hidden_sizes.len() != 1 {
                    return fail(format!(
                        "ae-svm uses exactly one hidden size, got {:?}",
                        self.hidden_sizes
                    ));
                }
                self.ae.validate().map_err(config_err)?;
            }
            Scheme::SaeLr | Scheme::SsaeLr => {
                if self.hidden_sizes.is_empty() {
                    return fail("hidden_sizes must list at least one width".into());
                }
                self.ae.validate().map_err(config_err)?;
                self.finetune.validate().map_err(config_err)?;
                if self.scheme == Scheme::SsaeLr {
                    self.patch.validate().map_err(config_err)?;
                    if self.pca_components == Some(0) {
                        return fail("pca_components must be positive".into());
                    }
                }
            }
        }
        if self.hidden_sizes.contains(&0) {
            return fail("hidden sizes must be positive".into());
        }
        match self.scheme {
            Scheme::Svm | Scheme::PcaSvm | Scheme::AeSvm => {
                self.svm.validate().map_err(config_err)?
            }
            _ => {}
        }
        Ok(())
    }
}

fn config_err(e: Error) -> Error {
    Error::Config(e.to_string())
}
