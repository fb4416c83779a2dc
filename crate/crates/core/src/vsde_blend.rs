//! Texture-coding distortion, per-view combination of the LS/NS estimates,
//! region proportions from depth-edge geometry, and the blended estimate.

use serde::{Deserialize, Serialize};

use crate::dibr::mse;
use crate::error::{Result, VsdeError};
use crate::geometry::{depth_to_metric, DisparityModel};
use crate::gradient::{normalize_map, otsu_threshold, sobel_gradients};
use crate::media_io::{CameraConfig, LumaFrame, ViewSide};
use crate::scalar::Scalar;

/// Fractions of the virtual view by which references cover each pixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionProportions<T> {
    pub p_overlap: T,
    pub p_left: T,
    pub p_right: T,
    pub p_none: T,
}

impl<T: Scalar> RegionProportions<T> {
    pub fn all_overlap() -> Self {
        Self {
            p_overlap: T::one(),
            p_left: T::zero(),
            p_right: T::zero(),
            p_none: T::zero(),
        }
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.p_overlap, self.p_left, self.p_right, self.p_none]
    }

    pub fn is_valid(&self) -> bool {
        let a = self.as_array();
        a.iter().all(|&p| p >= T::zero() && p <= T::one())
            && (a.iter().copied().sum::<T>() - T::one()).abs() <= T::epsilon() * T::of(8.0)
    }
}

/// Proportions together with whether the simplex had to be restored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProportionsEstimate<T> {
    pub proportions: RegionProportions<T>,
    /// Set when disocclusion areas summed past 1 and were rescaled.
    pub renormalized: bool,
}

/// `α² mse_L + (1-α)² mse_R` for independently coded textures.
pub fn texture_vsd<T: Scalar>(
    tl: &LumaFrame,
    tl_hat: &LumaFrame,
    tr: &LumaFrame,
    tr_hat: &LumaFrame,
    alpha_blend: T,
) -> Result<T> {
    if !(alpha_blend >= T::zero() && alpha_blend <= T::one()) {
        return Err(VsdeError::invalid(format!(
            "blend weight {alpha_blend} outside [0, 1]"
        )));
    }
    tl.check_same_dims(tr, "texture distortion")?;
    let ml = T::of(mse(tl, tl_hat)?);
    let mr = T::of(mse(tr, tr_hat)?);
    let beta = T::one() - alpha_blend;
    Ok(alpha_blend * alpha_blend * ml + beta * beta * mr)
}

/// Pixel-count weighted combination of the LS and NS estimates of one view.
pub fn single_view_depth_vsd<T: Scalar>(e_ls: T, e_ns: T, ls_count: usize, ns_count: usize) -> T {
    let n = ls_count + ns_count;
    if n == 0 {
        return T::zero();
    }
    let n = T::of_usize(n);
    T::of_usize(ls_count) / n * e_ls + T::of_usize(ns_count) / n * e_ns
}

/// A depth discontinuity between horizontally adjacent pixels `(x, y)` and
/// `(x + 1, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthEdge<T> {
    pub x: usize,
    pub y: usize,
    pub z_fg: T,
    pub z_bg: T,
    /// Sign of `D(x+1) - D(x)`: +1 when depth level rises to the right.
    pub grad_sign: i8,
    /// Parallax between the two surfaces, in pixels.
    pub w_disocc: T,
    pub d_fg: u8,
    pub d_bg: u8,
}

impl<T: Scalar> DepthEdge<T> {
    /// Whether warping toward the virtual view opens a hole at this edge.
    pub fn opens_hole(&self, side: ViewSide) -> bool {
        match side {
            ViewSide::Left => self.grad_sign > 0,
            ViewSide::Right => self.grad_sign < 0,
        }
    }

    /// Virtual-view column of the boundary, carried by the foreground.
    pub fn projected_x(&self, model: &DisparityModel<T>) -> T {
        let d = model.disparity_unchecked(T::of(self.d_fg as f64));
        T::of(self.x as f64 + 0.5) + T::of(model.side.warp_sign() as f64) * d
    }
}

/// Depth edges of one reference: Otsu on the normalized Sobel magnitude of
/// the depth map, restricted to pixels whose right neighbor differs.
pub fn detect_depth_edges<T: Scalar>(
    depth: &LumaFrame,
    model: &DisparityModel<T>,
    cam: &CameraConfig,
) -> Result<Vec<DepthEdge<T>>> {
    let grads = sobel_gradients::<T>(depth)?;
    let mag = normalize_map(&grads.magnitude);
    let threshold = otsu_threshold(&mag);
    let (w, h) = (depth.width(), depth.height());
    let (zn, zf) = (T::of(cam.z_near), T::of(cam.z_far));
    let fb = T::of(cam.focal_px) * model.baseline;
    let mut edges = Vec::new();
    for y in 0..h {
        let row = depth.row(y);
        for x in 0..w - 1 {
            let (a, b) = (row[x], row[x + 1]);
            if a == b || mag[y * w + x] <= threshold || mag[y * w + x].is_nan() {
                continue;
            }
            let (d_fg, d_bg) = (a.max(b), a.min(b));
            let z_fg = depth_to_metric(T::of(d_fg as f64), zn, zf);
            let z_bg = depth_to_metric(T::of(d_bg as f64), zn, zf);
            edges.push(DepthEdge {
                x,
                y,
                z_fg,
                z_bg,
                grad_sign: if b > a { 1 } else { -1 },
                w_disocc: fb * (z_fg.recip() - z_bg.recip()).abs(),
                d_fg,
                d_bg,
            });
        }
    }
    Ok(edges)
}

/// Summed hole-opening parallax of `side`'s edges over the frame area,
/// clamped to 1.
pub fn disocclusion_from_edges<T: Scalar>(
    edges: &[DepthEdge<T>],
    side: ViewSide,
    width: usize,
    height: usize,
) -> T {
    let total: T = edges
        .iter()
        .filter(|e| e.opens_hole(side))
        .map(|e| e.w_disocc)
        .sum();
    (total / T::of_usize(width * height)).min(T::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    pub tau_spatial: f64,
    pub tau_vertical: usize,
}

impl Default for MatchParams {
    fn default() -> Self {
        Self {
            tau_spatial: 2.0,
            tau_vertical: 1,
        }
    }
}

/// Greedy nearest matching of left and right edges by projected virtual
/// column. Returns `(left index, right index)` pairs sorted by left index.
pub fn match_edges<T: Scalar>(
    edges_l: &[DepthEdge<T>],
    edges_r: &[DepthEdge<T>],
    model_l: &DisparityModel<T>,
    model_r: &DisparityModel<T>,
    params: &MatchParams,
) -> Vec<(usize, usize)> {
    if edges_l.is_empty() || edges_r.is_empty() {
        return Vec::new();
    }
    let max_y = edges_l.iter().chain(edges_r).map(|e| e.y).max().unwrap_or(0);
    let mut by_row: Vec<Vec<usize>> = vec![Vec::new(); max_y + 1];
    for (j, e) in edges_r.iter().enumerate() {
        by_row[e.y].push(j);
    }
    let xr: Vec<f64> = edges_r.iter().map(|e| e.projected_x(model_r).f64()).collect();
    let mut candidates = Vec::new();
    for (i, el) in edges_l.iter().enumerate() {
        let xl = el.projected_x(model_l).f64();
        let lo = el.y.saturating_sub(params.tau_vertical);
        let hi = (el.y + params.tau_vertical).min(max_y);
        for row in &by_row[lo..=hi] {
            for &j in row {
                let dx = (xl - xr[j]).abs();
                if dx <= params.tau_spatial {
                    let er = &edges_r[j];
                    candidates.push((dx, el.y.abs_diff(er.y), (el.y, el.x), (er.y, er.x), i, j));
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    let mut used_l = vec![false; edges_l.len()];
    let mut used_r = vec![false; edges_r.len()];
    let mut pairs = Vec::new();
    for (.., i, j) in candidates {
        if !used_l[i] && !used_r[j] {
            used_l[i] = true;
            used_r[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Geometric region proportions. The left-only share is the right view's
/// disocclusion area and vice versa; matched edge pairs whose holes open in
/// both views contribute the smaller width to the mutual-disocclusion share.
pub fn region_proportions<T: Scalar>(
    edges_l: &[DepthEdge<T>],
    edges_r: &[DepthEdge<T>],
    matches: &[(usize, usize)],
    width: usize,
    height: usize,
    o_disocc_l: T,
    o_disocc_r: T,
) -> ProportionsEstimate<T> {
    let area = T::of_usize(width * height);
    let p_none: T = matches
        .iter()
        .map(|&(i, j)| (&edges_l[i], &edges_r[j]))
        .filter(|(el, er)| el.opens_hole(ViewSide::Left) && er.opens_hole(ViewSide::Right))
        .map(|(el, er)| el.w_disocc.min(er.w_disocc))
        .sum::<T>()
        / area;
    let p_none = p_none.min(T::one());
    let (p_left, p_right) = (o_disocc_r, o_disocc_l);
    let p_overlap = T::one() - p_left - p_right - p_none;
    if p_overlap >= T::zero() {
        return ProportionsEstimate {
            proportions: RegionProportions {
                p_overlap,
                p_left,
                p_right,
                p_none,
            },
            renormalized: false,
        };
    }
    let s = p_left + p_right + p_none;
    let (p_left, p_right) = (p_left / s, p_right / s);
    let p_none = T::one() - p_left - p_right;
    ProportionsEstimate {
        proportions: RegionProportions {
            p_overlap: T::zero(),
            p_left,
            p_right,
            p_none: p_none.max(T::zero()),
        },
        renormalized: true,
    }
}

/// Radius of the texture window used around each depth edge.
pub const DEFAULT_LOCAL_VARIANCE_RADIUS: usize = 3;

/// Mean population variance of the texture in a square window around each
/// edge pixel, clipped at the frame borders.
pub fn local_variance_near_edges<T: Scalar>(texture: &LumaFrame, edges: &[DepthEdge<T>], radius: usize) -> T {
    if edges.is_empty() {
        return T::zero();
    }
    let (w, h) = (texture.width(), texture.height());
    let total: f64 = edges
        .iter()
        .map(|e| {
            let (x0, x1) = (e.x.saturating_sub(radius), (e.x + radius).min(w - 1));
            let (y0, y1) = (e.y.saturating_sub(radius), (e.y + radius).min(h - 1));
            let (mut n, mut s, mut s2) = (0u64, 0u64, 0u64);
            for y in y0..=y1 {
                for &v in &texture.row(y)[x0..=x1] {
                    n += 1;
                    s += v as u64;
                    s2 += (v as u64) * (v as u64);
                }
            }
            let nf = n as f64;
            let mean = s as f64 / nf;
            (s2 as f64 / nf - mean * mean).max(0.0)
        })
        .sum();
    T::of(total / edges.len() as f64)
}

/// Region-weighted blend of the per-view depth distortions, with the
/// mutual-disocclusion share charged at the mean local texture variance.
pub fn blended_depth_vsd<T: Scalar>(
    e_dep_l: T,
    e_dep_r: T,
    props: &RegionProportions<T>,
    alpha_blend: T,
    nu2_local_l: T,
    nu2_local_r: T,
) -> T {
    let beta = T::one() - alpha_blend;
    props.p_overlap * (alpha_blend * alpha_blend * e_dep_l + beta * beta * e_dep_r)
        + props.p_left * e_dep_l
        + props.p_right * e_dep_r
        + props.p_none * (nu2_local_l + nu2_local_r) * T::of(0.5)
}

pub fn total_vsd<T: Scalar>(e_tex: T, e_dep: T) -> T {
    e_tex + e_dep
}
