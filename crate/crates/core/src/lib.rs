//! Render-free estimation of the MSE a DIBR-synthesized virtual view suffers
//! when its two reference views (texture plus depth) are lossy-coded, with a
//! reference synthesizer and a validation harness to check the estimates.

pub mod dibr;
pub mod error;
pub mod geometry;
pub mod gradient;
pub mod harness;
pub mod media_io;
pub mod scalar;
pub mod vsde_blend;
pub mod vsde_ls;
pub mod vsde_ns;

pub use error::{Result, VsdeError};
pub use media_io::{CameraConfig, LumaFrame, ViewSide, VsdeReport};
pub use scalar::Scalar;

pub type VsdeReport64 = VsdeReport<f64>;
pub type VsdeReport32 = VsdeReport<f32>;
pub type EstimatorParams64 = harness::EstimatorParams<f64>;
pub type EstimatorParams32 = harness::EstimatorParams<f32>;
