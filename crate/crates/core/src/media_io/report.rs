use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Result, VsdeError};
use crate::scalar::Scalar;
use crate::vsde_blend::RegionProportions;

/// Per-frame breakdown of the distortion estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VsdeReport<T> {
    pub e_tex: T,
    pub e_ls_left: T,
    pub e_ls_right: T,
    pub e_ns_left: T,
    pub e_ns_right: T,
    /// Baseline distance indicator of the left view.
    pub bdi_left: T,
    pub bdi_right: T,
    pub proportions: RegionProportions<T>,
    pub nu2_local_left: T,
    pub nu2_local_right: T,
    pub e_dep: T,
    pub e_total: T,
    pub oracle_mse: Option<T>,
}

/// Serialized column order.
pub const REPORT_COLUMNS: [&str; 16] = [
    "e_tex",
    "e_ls_left",
    "e_ls_right",
    "e_ns_left",
    "e_ns_right",
    "bdi_left",
    "bdi_right",
    "p_overlap",
    "p_left",
    "p_right",
    "p_none",
    "nu2_local_left",
    "nu2_local_right",
    "e_dep",
    "e_total",
    "oracle_mse",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = VsdeError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(VsdeError::invalid(format!("unknown report format `{other}`"))),
        }
    }
}

impl<T: Scalar> VsdeReport<T> {
    /// Field values in [`REPORT_COLUMNS`] order.
    pub fn values(&self) -> [Option<f64>; 16] {
        let p = &self.proportions;
        [
            Some(self.e_tex.f64()),
            Some(self.e_ls_left.f64()),
            Some(self.e_ls_right.f64()),
            Some(self.e_ns_left.f64()),
            Some(self.e_ns_right.f64()),
            Some(self.bdi_left.f64()),
            Some(self.bdi_right.f64()),
            Some(p.p_overlap.f64()),
            Some(p.p_left.f64()),
            Some(p.p_right.f64()),
            Some(p.p_none.f64()),
            Some(self.nu2_local_left.f64()),
            Some(self.nu2_local_right.f64()),
            Some(self.e_dep.f64()),
            Some(self.e_total.f64()),
            self.oracle_mse.map(|v| v.f64()),
        ]
    }

    fn from_values(v: &[Option<f64>; 16]) -> Result<Self> {
        let req = |i: usize| -> Result<T> {
            v[i].map(T::of)
                .ok_or_else(|| VsdeError::invalid(format!("report field `{}` is missing", REPORT_COLUMNS[i])))
        };
        Ok(Self {
            e_tex: req(0)?,
            e_ls_left: req(1)?,
            e_ls_right: req(2)?,
            e_ns_left: req(3)?,
            e_ns_right: req(4)?,
            bdi_left: req(5)?,
            bdi_right: req(6)?,
            proportions: RegionProportions {
                p_overlap: req(7)?,
                p_left: req(8)?,
                p_right: req(9)?,
                p_none: req(10)?,
            },
            nu2_local_left: req(11)?,
            nu2_local_right: req(12)?,
            e_dep: req(13)?,
            e_total: req(14)?,
            oracle_mse: v[15].map(T::of),
        })
    }
}

/// Formats `v` with six significant digits, the precision used by every report.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v.is_infinite() {
            format!("{v}")
        } else {
            "0".into()
        };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        // Rounding can carry into a new leading digit (9.999995 -> 10.00000);
        // re-format through the exponent form in that case.
        let reparsed: f64 = s.parse().unwrap_or(v);
        let s = if reparsed.abs() >= 10f64.powi(exp + 1) {
            let decimals = (4 - exp).max(0) as usize;
            format!("{v:.decimals$}")
        } else {
            s
        };
        trim_zeros(s)
    } else {
        format!("{v:.5e}")
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        s
    }
}

/// Value after a round trip through [`format_sig6`].
pub fn round_sig6(v: f64) -> f64 {
    format_sig6(v).parse().unwrap_or(v)
}

pub fn render_csv<T: Scalar>(reports: &[VsdeReport<T>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_COLUMNS).expect("in-memory csv");
    for r in reports {
        let row: Vec<String> = r
            .values()
            .iter()
            .map(|v| v.map(format_sig6).unwrap_or_default())
            .collect();
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("ascii csv")
}

pub fn render_json<T: Scalar>(reports: &[VsdeReport<T>]) -> String {
    let arr: Vec<Value> = reports.iter().map(report_to_json).collect();
    let mut s = serde_json::to_string_pretty(&Value::Array(arr)).expect("json encodes");
    s.push('\n');
    s
}

fn report_to_json<T: Scalar>(r: &VsdeReport<T>) -> Value {
    let mut obj = Map::new();
    for (name, v) in REPORT_COLUMNS.iter().zip(r.values()) {
        let val = match v {
            Some(x) => serde_json::Number::from_f64(round_sig6(x))
                .map(Value::Number)
                .unwrap_or(Value::Null),
            None => Value::Null,
        };
        obj.insert((*name).to_string(), val);
    }
    Value::Object(obj)
}

pub fn parse_csv<T: Scalar>(text: &str) -> Result<Vec<VsdeReport<T>>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| VsdeError::invalid(format!("csv header: {e}")))?
        .clone();
    let index: Vec<usize> = REPORT_COLUMNS
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == *c)
                .ok_or_else(|| VsdeError::invalid(format!("csv lacks column `{c}`")))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| VsdeError::invalid(format!("csv row: {e}")))?;
        let mut vals = [None; 16];
        for (slot, &i) in vals.iter_mut().zip(&index) {
            let cell = rec.get(i).unwrap_or("").trim();
            *slot = if cell.is_empty() {
                None
            } else {
                Some(
                    cell.parse::<f64>()
                        .map_err(|_| VsdeError::invalid(format!("csv cell `{cell}` is not a number")))?,
                )
            };
        }
        out.push(VsdeReport::from_values(&vals)?);
    }
    Ok(out)
}

pub fn parse_json<T: Scalar>(text: &str) -> Result<Vec<VsdeReport<T>>> {
    let v: Value = serde_json::from_str(text).map_err(|e| VsdeError::invalid(format!("json: {e}")))?;
    let arr = v
        .as_array()
        .ok_or_else(|| VsdeError::invalid("json report must be an array"))?;
    arr.iter()
        .map(|obj| {
            let mut vals = [None; 16];
            for (slot, name) in vals.iter_mut().zip(REPORT_COLUMNS) {
                *slot = obj.get(name).and_then(Value::as_f64);
            }
            VsdeReport::from_values(&vals)
        })
        .collect()
}

pub fn write_report<T: Scalar>(
    reports: &[VsdeReport<T>],
    path: impl AsRef<Path>,
    format: ReportFormat,
) -> Result<()> {
    let path = path.as_ref();
    let body = match format {
        ReportFormat::Csv => render_csv(reports),
        ReportFormat::Json => render_json(reports),
    };
    fs::write(path, body).map_err(|e| VsdeError::io(path, e))
}
