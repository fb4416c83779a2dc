//! Synthetic scenes, simulated coding, the end-to-end estimator and oracle
//! validation.

pub mod noise;
pub mod pipeline;
pub mod scene;
pub mod validate;

pub use noise::{compress_views, simulate_compression, NoiseLaw, NoiseSpec};
pub use pipeline::{
    estimate_frame, estimate_frame_detailed, EstimatorParams, FrameEstimate, ViewDiagnostics,
};
pub use scene::{generate_scene, layer_shift, Layer, SceneSpec, StereoFrames, TextureKind};
pub use validate::{
    median, pearson, relative_error, render_validation_csv, run_case, summarize, validate_run, CaseManifest,
    CaseSpec, ValidationRun, ValidationSummary,
};
