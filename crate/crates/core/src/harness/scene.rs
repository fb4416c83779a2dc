//! Layered synthetic scenes rendered consistently into both reference views.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VsdeError};
use crate::geometry::disparity_model;
use crate::media_io::{CameraConfig, LumaFrame, ViewSide};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TextureKind {
    Flat {
        level: f64,
    },
    Ramp {
        start: f64,
        slope_x: f64,
        #[serde(default)]
        slope_y: f64,
    },
    Sine {
        /// Cycles per pixel along x.
        freq_x: f64,
        #[serde(default)]
        freq_y: f64,
        amplitude: f64,
        mean: f64,
    },
    FilteredNoise {
        /// Pass-band radius as a fraction of the Nyquist frequency.
        cutoff: f64,
        /// Standard deviation after filtering.
        amplitude: f64,
        mean: f64,
    },
    Checker {
        period: usize,
        low: f64,
        high: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// 8-bit inverse-depth level; larger is nearer.
    pub depth: u8,
    pub x_start: usize,
    /// Exclusive end column.
    pub x_end: usize,
    pub texture: TextureKind,
}

/// A scene of full-height layers listed back to front. The first layer is
/// the backdrop and must span the whole frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub layers: Vec<Layer>,
    pub seed: u64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width < 3 || self.height < 3 {
            return Err(VsdeError::invalid(format!(
                "scene must be at least 3x3, got {}x{}",
                self.width, self.height
            )));
        }
        let Some(backdrop) = self.layers.first() else {
            return Err(VsdeError::invalid("scene has no layers"));
        };
        if backdrop.x_start != 0 || backdrop.x_end != self.width {
            return Err(VsdeError::invalid("the first layer must span the whole frame"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.x_start >= l.x_end || l.x_end > self.width {
                return Err(VsdeError::invalid(format!(
                    "layer {i} extent {}..{} does not fit a frame of width {}",
                    l.x_start, l.x_end, self.width
                )));
            }
            if i > 0 && l.depth < self.layers[i - 1].depth {
                return Err(VsdeError::invalid(format!(
                    "layer {i} lies behind layer {}",
                    i - 1
                )));
            }
            match l.texture {
                TextureKind::FilteredNoise { cutoff, .. } if !(cutoff > 0.0 && cutoff <= 1.0) => {
                    return Err(VsdeError::invalid(format!(
                        "layer {i}: cutoff must lie in (0, 1]"
                    )));
                }
                TextureKind::Checker { period: 0, .. } => {
                    return Err(VsdeError::invalid(format!(
                        "layer {i}: checker period must be positive"
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Original texture and depth of both references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StereoFrames {
    pub tl: LumaFrame,
    pub dl: LumaFrame,
    pub tr: LumaFrame,
    pub dr: LumaFrame,
}

/// A layer texture sampled over `[-pad, width + pad)` columns.
struct TexturePlane {
    pad: usize,
    stride: usize,
    values: Vec<u8>,
}

impl TexturePlane {
    fn at(&self, x: isize, y: usize) -> u8 {
        let xi = (x + self.pad as isize).clamp(0, self.stride as isize - 1) as usize;
        self.values[y * self.stride + xi]
    }
}

fn quantize(v: f64) -> u8 {
    (v + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn low_pass_noise(
    stride: usize,
    height: usize,
    cutoff: f64,
    amplitude: f64,
    mean: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = (0..stride * height)
        .map(|_| Complex::new(StandardNormal.sample(rng), 0.0))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let (row_fwd, row_inv) = (planner.plan_fft_forward(stride), planner.plan_fft_inverse(stride));
    let (col_fwd, col_inv) = (planner.plan_fft_forward(height), planner.plan_fft_inverse(height));
    let transpose = |src: &[Complex<f64>], w: usize, h: usize| {
        let mut out = vec![Complex::new(0.0, 0.0); w * h];
        for y in 0..h {
            for x in 0..w {
                out[x * h + y] = src[y * w + x];
            }
        }
        out
    };
    row_fwd.process(&mut buf);
    let mut cols = transpose(&buf, stride, height);
    col_fwd.process(&mut cols);
    let freq = |i: usize, n: usize| {
        let i = if 2 * i >= n { i as f64 - n as f64 } else { i as f64 };
        2.0 * i / n as f64
    };
    for x in 0..stride {
        for y in 0..height {
            let (fx, fy) = (freq(x, stride), freq(y, height));
            if fx * fx + fy * fy > cutoff * cutoff {
                cols[x * height + y] = Complex::new(0.0, 0.0);
            }
        }
    }
    col_inv.process(&mut cols);
    let mut rows = transpose(&cols, height, stride);
    row_inv.process(&mut rows);
    let field: Vec<f64> = rows.iter().map(|c| c.re).collect();
    let n = field.len() as f64;
    let mu = field.iter().sum::<f64>() / n;
    let sd = (field.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n).sqrt();
    let gain = if sd > 0.0 { amplitude / sd } else { 0.0 };
    field.iter().map(|v| mean + (v - mu) * gain).collect()
}

fn render_texture(
    kind: &TextureKind,
    width: usize,
    height: usize,
    pad: usize,
    rng: &mut ChaCha8Rng,
) -> TexturePlane {
    let stride = width + 2 * pad;
    let analytic = |f: &dyn Fn(f64, f64) -> f64| {
        let mut values = Vec::with_capacity(stride * height);
        for y in 0..height {
            for xi in 0..stride {
                values.push(quantize(f(xi as f64 - pad as f64, y as f64)));
            }
        }
        values
    };
    let tau = std::f64::consts::TAU;
    let values = match *kind {
        TextureKind::Flat { level } => analytic(&|_, _| level),
        TextureKind::Ramp {
            start,
            slope_x,
            slope_y,
        } => analytic(&|x, y| start + slope_x * x + slope_y * y),
        TextureKind::Sine {
            freq_x,
            freq_y,
            amplitude,
            mean,
        } => analytic(&|x, y| mean + amplitude * (tau * (freq_x * x + freq_y * y)).sin()),
        TextureKind::Checker { period, low, high } => analytic(&|x, y| {
            let cx = (x / period as f64).floor() as i64;
            let cy = (y / period as f64).floor() as i64;
            if (cx + cy).rem_euclid(2) == 0 {
                low
            } else {
                high
            }
        }),
        TextureKind::FilteredNoise {
            cutoff,
            amplitude,
            mean,
        } => low_pass_noise(stride, height, cutoff, amplitude, mean, rng)
            .into_iter()
            .map(quantize)
            .collect(),
    };
    TexturePlane { pad, stride, values }
}

/// Integer column shift between the left and right view for a depth level:
/// the sum of the rounded warps of both references, so that both land a
/// layer pixel on the same virtual column.
pub fn layer_shift(cam: &CameraConfig, depth: u8) -> usize {
    [ViewSide::Left, ViewSide::Right]
        .into_iter()
        .map(|side| {
            let m = disparity_model::<f64>(cam, side);
            (m.disparity_unchecked(depth as f64) + 0.5).floor().max(0.0) as usize
        })
        .sum()
}

/// Renders the left view directly and the right view with each layer moved
/// right by [`layer_shift`]. Deterministic in the seed.
pub fn generate_scene(spec: &SceneSpec, cam: &CameraConfig) -> Result<StereoFrames> {
    spec.validate()?;
    cam.validate()?;
    let (w, h) = (spec.width, spec.height);
    let shifts: Vec<usize> = spec.layers.iter().map(|l| layer_shift(cam, l.depth)).collect();
    let pad = shifts.iter().copied().max().unwrap_or(0) + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let planes: Vec<TexturePlane> = spec
        .layers
        .iter()
        .map(|l| render_texture(&l.texture, w, h, pad, &mut rng))
        .collect();

    let render = |shift_of: &dyn Fn(usize) -> usize| -> Result<(LumaFrame, LumaFrame)> {
        let mut tex = vec![0u8; w * h];
        let mut depth = vec![0u8; w * h];
        for x in 0..w {
            // Front-most layer covering this column, with its source column.
            let (li, src) = spec
                .layers
                .iter()
                .enumerate()
                .rev()
                .find_map(|(i, l)| {
                    let src = x as isize - shift_of(i) as isize;
                    (i == 0 || (src >= l.x_start as isize && src < l.x_end as isize)).then_some((i, src))
                })
                .expect("backdrop covers every column");
            for y in 0..h {
                tex[y * w + x] = planes[li].at(src, y);
                depth[y * w + x] = spec.layers[li].depth;
            }
        }
        Ok((LumaFrame::new(w, h, tex)?, LumaFrame::new(w, h, depth)?))
    };
    let (tl, dl) = render(&|_| 0)?;
    let (tr, dr) = render(&|i| shifts[i])?;
    Ok(StereoFrames { tl, dl, tr, dr })
}
