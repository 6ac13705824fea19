//! Frequency-domain occlusion attribution for black-box time-series
//! classifiers, with the evaluation metrics used to compare attribution
//! methods (deletion AUC, infidelity, sensitivity, continuity and
//! class-similarity analysis).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel batch execution live in the `freqatt-cli` companion crate.

#![no_std]

extern crate alloc;

pub mod attribution;
pub mod data;
mod error;
mod fft;
pub mod metrics;
pub mod models;
pub mod signal;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use attribution::{
    combined_attribution, frequency_attribution, normalize, occlusion_attribution,
    optimize_signal, project_to_input_space, random_attribution, AttributionMap, Baseline,
    Domain, MaskPolicy, Method, OcclusionConfig,
};
pub use data::{generate_synthetic, subsample, Band, Dataset, Split, SyntheticSpec};
pub use error::{Error, Result};
pub use models::{
    make_bandpower_oracle, BandRule, ClassifierOracle, DenseLayer, Model, ModelParams, ModelSpec,
    ScoreMode,
};
pub use signal::{channelwise_fft, dft_forward, dft_inverse, Spectrum, TimeSeries};
