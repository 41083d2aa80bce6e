//! Hyperspectral image classification with autoencoder-learned features.
//!
//! The crate provides the full experiment stack: dense numerics
//! ([`numkit`]), cube and ground-truth handling ([`hsidata`]), tied-weight
//! autoencoders ([`autoenc`]), stacked autoencoders with a softmax head
//! ([`deepstack`]), a linear SVM baseline ([`linsvm`]), the PCA + patch
//! spectral-spatial front end ([`specspatial`]) and experiment
//! orchestration with metrics and map rendering ([`pipeline`]).
//!
//! Everything is deterministic given the seeds recorded in a run's
//! configuration; see the README for file formats and CLI usage.

pub mod autoenc;
pub mod deepstack;
pub mod error;
pub mod hsidata;
pub mod linsvm;
mod modelio;
pub mod numkit;
pub mod pipeline;
pub mod specspatial;

pub use autoenc::{AeHyper, AeParams, ForwardCache};
pub use deepstack::{FinetuneHyper, SaeModel, SoftmaxHead};
pub use error::{Error, Result};
pub use hsidata::{GroundTruth, HsiCube, SplitIndex, SynthSpec};
pub use linsvm::{LinearSvmModel, SvmHyper};
pub use numkit::{sigmoid, sigmoid_prime_from_f, sym_eig, Matrix, Rng};
pub use pipeline::{DataSource, ExperimentConfig, Report, RunOutput, Scheme};
pub use specspatial::{PatchSpec, PcaModel};
