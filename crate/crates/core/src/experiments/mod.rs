//! Approximate-identity runs, convolution, and the experiment runner.

pub mod config;
pub mod convolve;
pub mod functions;
pub mod homspace;
pub mod identity;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentName};
pub use convolve::{convolve, ConvolutionPlan, ConvolveOptions, Extension, Interpolation};
pub use functions::{GridSpec, TestFunction};
pub use identity::{
    approx_identity_run, ErrorCurve, ErrorMode, ErrorPoint, IdentityFamily, IdentityOptions,
};
pub use runner::{run_experiment, Artifact, Assertion, RunReport, RunStatus};
