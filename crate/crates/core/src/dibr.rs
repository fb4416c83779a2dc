//! Reference view synthesizer used as ground truth for the estimators.
//!
//! Forward warping with integer disparities and a z-buffer, linear blending
//! of the two warped references, and variance-based hole filling. The
//! estimation path never calls into this module; [`invocation_count`] lets
//! tests check that.

use std::cell::Cell;

use crate::error::{Result, VsdeError};
use crate::geometry::{disparity_model, DisparityModel};
use crate::media_io::{CameraConfig, LumaFrame, ViewSide};

thread_local! {
    static INVOCATIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of oracle entry-point calls made on the current thread.
pub fn invocation_count() -> u64 {
    INVOCATIONS.with(Cell::get)
}

fn note_invocation() {
    INVOCATIONS.with(|c| c.set(c.get() + 1));
}

/// Valid pixels on each side of a hole run used for variance-based filling.
pub const DEFAULT_HOLE_FILL_WINDOW: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    pub hole_fill_window: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            hole_fill_window: DEFAULT_HOLE_FILL_WINDOW,
        }
    }
}

/// One reference warped to the virtual viewpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpedView {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<u8>,
    pub valid: Vec<bool>,
    /// Depth level that won the z-buffer at each valid pixel.
    pub depth: Vec<u8>,
}

impl WarpedView {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionLabel {
    Overlap,
    LeftOnly,
    RightOnly,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionLabelMap {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<RegionLabel>,
}

impl RegionLabelMap {
    /// Measured `(overlap, left_only, right_only, none)` fractions.
    pub fn fractions(&self) -> [f64; 4] {
        let mut c = [0usize; 4];
        for l in &self.labels {
            c[match l {
                RegionLabel::Overlap => 0,
                RegionLabel::LeftOnly => 1,
                RegionLabel::RightOnly => 2,
                RegionLabel::None => 3,
            }] += 1;
        }
        let n = self.labels.len() as f64;
        c.map(|v| v as f64 / n)
    }

    /// Raw plane: overlap 0, left-only 85, right-only 170, none 255.
    pub fn to_plane(&self) -> LumaFrame {
        let samples = self
            .labels
            .iter()
            .map(|l| match l {
                RegionLabel::Overlap => 0,
                RegionLabel::LeftOnly => 85,
                RegionLabel::RightOnly => 170,
                RegionLabel::None => 255,
            })
            .collect();
        LumaFrame::new(self.width, self.height, samples).expect("label map dims are valid")
    }
}

/// Blended view before hole filling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoledView {
    pub frame: LumaFrame,
    pub hole: Vec<bool>,
    /// Nearest warped depth at each non-hole pixel.
    pub depth: Vec<u8>,
}

/// Integer target shift, rounding halves toward +∞.
#[inline]
fn shift_for(model: &DisparityModel<f64>, d: u8) -> isize {
    (model.disparity_unchecked(d as f64) + 0.5).floor() as isize * model.side.warp_sign()
}

/// Forward-warps one reference toward the virtual view. The left reference
/// moves right and the right reference moves left; on collisions the larger
/// depth level (nearer surface) wins.
pub fn forward_warp(
    texture: &LumaFrame,
    depth: &LumaFrame,
    model: &DisparityModel<f64>,
) -> Result<WarpedView> {
    note_invocation();
    texture.check_same_dims(depth, "forward warp")?;
    let (w, h) = (texture.width(), texture.height());
    let mut out = WarpedView {
        width: w,
        height: h,
        samples: vec![0; w * h],
        valid: vec![false; w * h],
        depth: vec![0; w * h],
    };
    let mut shifts = [0isize; 256];
    for (d, s) in shifts.iter_mut().enumerate() {
        *s = shift_for(model, d as u8);
    }
    let columns: Vec<usize> = match model.side {
        ViewSide::Left => (0..w).rev().collect(),
        ViewSide::Right => (0..w).collect(),
    };
    for y in 0..h {
        let row = y * w;
        for &xs in &columns {
            let d = depth.samples()[row + xs];
            let xt = xs as isize + shifts[d as usize];
            if xt < 0 || xt >= w as isize {
                continue;
            }
            let t = row + xt as usize;
            if !out.valid[t] || d > out.depth[t] {
                out.valid[t] = true;
                out.depth[t] = d;
                out.samples[t] = texture.samples()[row + xs];
            }
        }
    }
    Ok(out)
}

#[inline]
fn round_u8(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Linear blend `α·left + (1-α)·right` where both are valid; single-valid
/// pixels copy that view; the rest are holes.
pub fn blend_views(
    left: &WarpedView,
    right: &WarpedView,
    alpha_blend: f64,
) -> Result<(HoledView, RegionLabelMap)> {
    if left.width != right.width || left.height != right.height {
        return Err(VsdeError::invalid("blend: warped views differ in size"));
    }
    if !(0.0..=1.0).contains(&alpha_blend) {
        return Err(VsdeError::invalid(format!(
            "blend weight {alpha_blend} outside [0, 1]"
        )));
    }
    let n = left.width * left.height;
    let mut samples = vec![0u8; n];
    let mut hole = vec![false; n];
    let mut depth = vec![0u8; n];
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = match (left.valid[i], right.valid[i]) {
            (true, true) => {
                samples[i] = round_u8(
                    alpha_blend * left.samples[i] as f64 + (1.0 - alpha_blend) * right.samples[i] as f64,
                );
                depth[i] = left.depth[i].max(right.depth[i]);
                RegionLabel::Overlap
            }
            (true, false) => {
                samples[i] = left.samples[i];
                depth[i] = left.depth[i];
                RegionLabel::LeftOnly
            }
            (false, true) => {
                samples[i] = right.samples[i];
                depth[i] = right.depth[i];
                RegionLabel::RightOnly
            }
            (false, false) => {
                hole[i] = true;
                RegionLabel::None
            }
        };
        labels.push(label);
    }
    let frame = LumaFrame::new(left.width, left.height, samples)?;
    Ok((
        HoledView { frame, hole, depth },
        RegionLabelMap {
            width: left.width,
            height: left.height,
            labels,
        },
    ))
}

struct Side {
    mean: f64,
    var: f64,
    depth: f64,
}

fn neighborhood(
    frame: &LumaFrame,
    hole: &[bool],
    depth: &[u8],
    y: usize,
    xs: impl Iterator<Item = usize>,
    window: usize,
) -> Option<Side> {
    let w = frame.width();
    let mut n = 0usize;
    let (mut s, mut s2, mut sd) = (0.0, 0.0, 0.0);
    for x in xs {
        let i = y * w + x;
        if hole[i] {
            continue;
        }
        let v = frame.samples()[i] as f64;
        s += v;
        s2 += v * v;
        sd += depth[i] as f64;
        n += 1;
        if n == window {
            break;
        }
    }
    (n > 0).then(|| {
        let nf = n as f64;
        let mean = s / nf;
        Side {
            mean,
            var: (s2 / nf - mean * mean).max(0.0),
            depth: sd / nf,
        }
    })
}

/// Fills every hole from the flatter of its two horizontal neighborhoods.
///
/// Each horizontal run of holes takes the mean of up to `window` originally
/// valid pixels on the side with lower variance; equal variances prefer the
/// farther (smaller depth level) side, then the left. Rows with no valid
/// pixel are copied from the nearest completed row, above first.
pub fn hole_fill(view: &HoledView, config: &OracleConfig) -> Result<LumaFrame> {
    note_invocation();
    let (w, h) = (view.frame.width(), view.frame.height());
    if view.hole.iter().all(|&b| b) {
        return Err(VsdeError::CannotFill("no valid pixel in the frame".into()));
    }
    let window = config.hole_fill_window.max(1);
    let mut out = view.frame.clone();
    let mut row_done = vec![true; h];
    for (y, done) in row_done.iter_mut().enumerate() {
        let mut x = 0;
        while x < w {
            if !view.hole[y * w + x] {
                x += 1;
                continue;
            }
            let start = x;
            while x < w && view.hole[y * w + x] {
                x += 1;
            }
            let end = x;
            let left = neighborhood(&view.frame, &view.hole, &view.depth, y, (0..start).rev(), window);
            let right = neighborhood(&view.frame, &view.hole, &view.depth, y, end..w, window);
            let pick = match (left, right) {
                (None, None) => {
                    *done = false;
                    break;
                }
                (Some(l), None) => l.mean,
                (None, Some(r)) => r.mean,
                (Some(l), Some(r)) => {
                    if (l.var - r.var).abs() <= 1e-9 {
                        if r.depth < l.depth {
                            r.mean
                        } else {
                            l.mean
                        }
                    } else if l.var < r.var {
                        l.mean
                    } else {
                        r.mean
                    }
                }
            };
            let v = round_u8(pick);
            for xf in start..end {
                out.set(xf, y, v);
            }
        }
    }
    while row_done.iter().any(|d| !d) {
        let snapshot = row_done.clone();
        for y in 0..h {
            if snapshot[y] {
                continue;
            }
            let src = (0..y)
                .rev()
                .find(|&r| snapshot[r])
                .or_else(|| (y + 1..h).find(|&r| snapshot[r]));
            if let Some(src) = src {
                for x in 0..w {
                    let v = out.get(x, src);
                    out.set(x, y, v);
                }
                row_done[y] = true;
            }
        }
    }
    Ok(out)
}

/// Synthesized virtual view and the region each pixel came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synthesis {
    pub view: LumaFrame,
    pub labels: RegionLabelMap,
}

pub fn synthesize(
    tl: &LumaFrame,
    dl: &LumaFrame,
    tr: &LumaFrame,
    dr: &LumaFrame,
    cam: &CameraConfig,
) -> Result<Synthesis> {
    synthesize_with(tl, dl, tr, dr, cam, &OracleConfig::default())
}

pub fn synthesize_with(
    tl: &LumaFrame,
    dl: &LumaFrame,
    tr: &LumaFrame,
    dr: &LumaFrame,
    cam: &CameraConfig,
    config: &OracleConfig,
) -> Result<Synthesis> {
    note_invocation();
    cam.validate()?;
    tl.check_same_dims(tr, "synthesize")?;
    let left = forward_warp(tl, dl, &disparity_model(cam, ViewSide::Left))?;
    let right = forward_warp(tr, dr, &disparity_model(cam, ViewSide::Right))?;
    let (holed, labels) = blend_views(&left, &right, cam.alpha_blend())?;
    let view = hole_fill(&holed, config)?;
    Ok(Synthesis { view, labels })
}

/// Mean squared sample difference.
pub fn mse(a: &LumaFrame, b: &LumaFrame) -> Result<f64> {
    a.check_same_dims(b, "mse")?;
    let sum: u64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(&x, &y)| {
            let d = x as i64 - y as i64;
            (d * d) as u64
        })
        .sum();
    Ok(sum as f64 / a.len() as f64)
}
