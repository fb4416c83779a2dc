use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VsdeError};

/// Which reference camera a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewSide {
    Left,
    Right,
}

impl ViewSide {
    /// Horizontal direction in which this reference's pixels move toward a
    /// virtual view placed between the two references.
    pub fn warp_sign(self) -> isize {
        match self {
            ViewSide::Left => 1,
            ViewSide::Right => -1,
        }
    }
}

/// 1D parallel camera rig: two references and a virtual camera on the same axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    pub focal_px: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub x_virtual: f64,
    pub z_near: f64,
    pub z_far: f64,
}

const KEYS: [&str; 6] = ["focal_px", "x_left", "x_right", "x_virtual", "z_near", "z_far"];

impl CameraConfig {
    pub fn new(
        focal_px: f64,
        x_left: f64,
        x_right: f64,
        x_virtual: f64,
        z_near: f64,
        z_far: f64,
    ) -> Result<Self> {
        let cam = Self {
            focal_px,
            x_left,
            x_right,
            x_virtual,
            z_near,
            z_far,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("focal_px", self.focal_px),
            ("x_left", self.x_left),
            ("x_right", self.x_right),
            ("x_virtual", self.x_virtual),
            ("z_near", self.z_near),
            ("z_far", self.z_far),
        ] {
            if !v.is_finite() {
                return Err(VsdeError::config(key, "value must be finite"));
            }
        }
        if self.focal_px <= 0.0 {
            return Err(VsdeError::config("focal_px", "must be > 0"));
        }
        if self.z_near <= 0.0 {
            return Err(VsdeError::config("z_near", "must be > 0"));
        }
        if self.z_far <= self.z_near {
            return Err(VsdeError::config("z_far", "must exceed z_near"));
        }
        if self.x_right <= self.x_left {
            return Err(VsdeError::config("x_right", "must exceed x_left"));
        }
        if self.x_virtual < self.x_left || self.x_virtual > self.x_right {
            return Err(VsdeError::config(
                "x_virtual",
                "must lie between x_left and x_right",
            ));
        }
        Ok(())
    }

    /// Distance from the left reference to the virtual camera.
    pub fn b_left(&self) -> f64 {
        self.x_virtual - self.x_left
    }

    /// Distance from the virtual camera to the right reference.
    pub fn b_right(&self) -> f64 {
        self.x_right - self.x_virtual
    }

    /// Reference-to-reference baseline.
    pub fn baseline(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn side_baseline(&self, side: ViewSide) -> f64 {
        match side {
            ViewSide::Left => self.b_left(),
            ViewSide::Right => self.b_right(),
        }
    }

    /// Linear blending weight applied to the left view, `b_R / b`.
    pub fn alpha_blend(&self) -> f64 {
        self.b_right() / self.baseline()
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<&str, f64> = BTreeMap::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| VsdeError::config(line, "expected a `key = value` line"))?;
            let key = key.trim();
            let Some(&canonical) = KEYS.iter().find(|k| **k == key) else {
                return Err(VsdeError::config(key, "unknown key"));
            };
            let value = value.trim();
            let parsed: f64 = value
                .parse()
                .map_err(|_| VsdeError::config(key, format!("`{value}` is not a number")))?;
            values.insert(canonical, parsed);
        }
        let get = |key: &str| {
            values
                .get(key)
                .copied()
                .ok_or_else(|| VsdeError::config(key, "missing"))
        };
        Self::new(
            get("focal_px")?,
            get("x_left")?,
            get("x_right")?,
            get("x_virtual")?,
            get("z_near")?,
            get("z_far")?,
        )
    }

    pub fn to_config_string(&self) -> String {
        format!(
            "focal_px = {}\nx_left = {}\nx_right = {}\nx_virtual = {}\nz_near = {}\nz_far = {}\n",
            self.focal_px, self.x_left, self.x_right, self.x_virtual, self.z_near, self.z_far
        )
    }
}

pub fn read_camera_config(path: impl AsRef<Path>) -> Result<CameraConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| VsdeError::io(path, e))?;
    CameraConfig::parse(&text)
}
