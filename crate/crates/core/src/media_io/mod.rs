//! Raw planes, camera rigs and report files.

mod camera;
mod frame;
mod report;

pub use camera::{read_camera_config, CameraConfig, ViewSide};
pub use frame::{read_raw_frame, read_raw_frame_at, write_binary_plane, LumaFrame, PlaneLayout};
pub use report::{
    format_sig6, parse_csv, parse_json, render_csv, render_json, round_sig6, write_report, ReportFormat,
    VsdeReport, REPORT_COLUMNS,
};
