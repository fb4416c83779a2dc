//! Estimator-versus-oracle validation over a list of cases.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dibr::{mse, synthesize};
use crate::error::{Result, VsdeError};
use crate::media_io::{format_sig6, CameraConfig, VsdeReport, REPORT_COLUMNS};

use super::noise::{compress_views, NoiseSpec};
use super::pipeline::{estimate_frame, EstimatorParams};
use super::scene::{generate_scene, SceneSpec};

/// One validation case: a scene, how it is coded, and the camera rig.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub scene: SceneSpec,
    pub noise: NoiseSpec,
    pub camera: CameraConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseManifest {
    pub cases: Vec<CaseSpec>,
}

impl CaseManifest {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| VsdeError::Manifest(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| VsdeError::io(path, e))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    /// Pearson correlation of estimates and oracle values; NaN with fewer
    /// than two cases or a constant series.
    pub pcc: f64,
    pub rmse: f64,
    pub n_cases: usize,
    pub median_relative_error: f64,
}

/// `|estimate - oracle| / oracle`; zero when both vanish and infinite when
/// only the oracle does.
pub fn relative_error(estimate: f64, oracle: f64) -> f64 {
    let diff = (estimate - oracle).abs();
    if oracle > 0.0 {
        diff / oracle
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    if n < 2 || n != b.len() {
        return f64::NAN;
    }
    let nf = n as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / nf, b.iter().sum::<f64>() / nf);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return f64::NAN;
    }
    sab / (saa * sbb).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Summary statistics of paired estimates and oracle measurements.
pub fn summarize(estimates: &[f64], oracle: &[f64]) -> ValidationSummary {
    let n = estimates.len().min(oracle.len());
    let rmse = if n == 0 {
        f64::NAN
    } else {
        (estimates
            .iter()
            .zip(oracle)
            .map(|(e, o)| (e - o) * (e - o))
            .sum::<f64>()
            / n as f64)
            .sqrt()
    };
    let rel: Vec<f64> = estimates
        .iter()
        .zip(oracle)
        .map(|(&e, &o)| relative_error(e, o))
        .collect();
    ValidationSummary {
        pcc: pearson(&estimates[..n], &oracle[..n]),
        rmse,
        n_cases: n,
        median_relative_error: median(&rel),
    }
}

#[derive(Debug, Clone)]
pub struct ValidationRun {
    pub cases: Vec<CaseSpec>,
    /// One report per case, in case order, with `oracle_mse` filled in.
    pub reports: Vec<VsdeReport<f64>>,
    pub summary: ValidationSummary,
}

/// Estimate and oracle measurement of a single case.
pub fn run_case(case: &CaseSpec, params: &EstimatorParams<f64>) -> Result<VsdeReport<f64>> {
    let original = generate_scene(&case.scene, &case.camera)?;
    let coded = compress_views(&original, &case.noise)?;
    let mut report = estimate_frame(&original, &coded, &case.camera, params)?;
    let reference = synthesize(
        &original.tl,
        &original.dl,
        &original.tr,
        &original.dr,
        &case.camera,
    )?;
    let degraded = synthesize(&coded.tl, &coded.dl, &coded.tr, &coded.dr, &case.camera)?;
    report.oracle_mse = Some(mse(&reference.view, &degraded.view)?);
    Ok(report)
}

/// Runs every case (concurrently) and summarizes estimate-versus-oracle
/// agreement. Results are ordered by case index.
pub fn validate_run(cases: &[CaseSpec], params: &EstimatorParams<f64>) -> Result<ValidationRun> {
    let reports = cases
        .par_iter()
        .map(|c| run_case(c, params))
        .collect::<Result<Vec<_>>>()?;
    let est: Vec<f64> = reports.iter().map(|r| r.e_total).collect();
    let ora: Vec<f64> = reports.iter().map(|r| r.oracle_mse.unwrap_or(f64::NAN)).collect();
    Ok(ValidationRun {
        cases: cases.to_vec(),
        summary: summarize(&est, &ora),
        reports,
    })
}

const CASE_COLUMNS: [&str; 5] = ["case", "width", "height", "b_left", "b_right"];
const SUMMARY_COLUMNS: [&str; 5] = [
    "relative_error",
    "pcc",
    "rmse",
    "median_relative_error",
    "n_cases",
];

/// CSV with one row per case and a trailing `summary` row.
pub fn render_validation_csv(run: &ValidationRun) -> String {
    let mut out = String::new();
    let header: Vec<&str> = CASE_COLUMNS
        .iter()
        .chain(REPORT_COLUMNS.iter())
        .chain(SUMMARY_COLUMNS.iter())
        .copied()
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, (case, r)) in run.cases.iter().zip(&run.reports).enumerate() {
        let mut row = vec![
            i.to_string(),
            case.scene.width.to_string(),
            case.scene.height.to_string(),
            format_sig6(case.camera.b_left()),
            format_sig6(case.camera.b_right()),
        ];
        row.extend(r.values().iter().map(|v| v.map(format_sig6).unwrap_or_default()));
        row.push(format_sig6(relative_error(
            r.e_total,
            r.oracle_mse.unwrap_or(f64::NAN),
        )));
        row.extend(std::iter::repeat_n(String::new(), 4));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let blanks = CASE_COLUMNS.len() - 1 + REPORT_COLUMNS.len() + 1;
    let s = &run.summary;
    let _ = writeln!(
        out,
        "summary{},{},{},{},{}",
        ",".repeat(blanks),
        format_sig6(s.pcc),
        format_sig6(s.rmse),
        format_sig6(s.median_relative_error),
        s.n_cases
    );
    out
}
