//! Sobel gradients, the joint texture-depth edge map, Otsu thresholding and
//! LS/NS region masks.

use serde::{Deserialize, Serialize};

use crate::error::{Result, VsdeError};
use crate::media_io::LumaFrame;
use crate::scalar::Scalar;

/// Horizontal slope gain of the 3x3 Sobel kernel: a unit ramp yields 8.
pub const SOBEL_SLOPE_GAIN: f64 = 8.0;

/// Number of histogram bins used by [`otsu_threshold`].
pub const OTSU_BINS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientMaps<T> {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<T>,
    pub gy: Vec<T>,
    pub magnitude: Vec<T>,
}

impl<T: Scalar> GradientMaps<T> {
    /// Horizontal gradient rescaled to a per-pixel derivative.
    pub fn unit_gx(&self, idx: usize) -> T {
        self.gx[idx] / T::of(SOBEL_SLOPE_GAIN)
    }
}

/// Applies the 3x3 Sobel kernels with replicate borders.
pub fn sobel_gradients<T: Scalar>(frame: &LumaFrame) -> Result<GradientMaps<T>> {
    let (w, h) = (frame.width(), frame.height());
    if w < 3 || h < 3 {
        return Err(VsdeError::invalid(format!(
            "Sobel needs a frame of at least 3x3, got {w}x{h}"
        )));
    }
    let mut gx = Vec::with_capacity(w * h);
    let mut gy = Vec::with_capacity(w * h);
    let mut magnitude = Vec::with_capacity(w * h);
    for y in 0..h {
        let ym = y.saturating_sub(1);
        let yp = (y + 1).min(h - 1);
        let (ra, rb, rc) = (frame.row(ym), frame.row(y), frame.row(yp));
        for x in 0..w {
            let xm = x.saturating_sub(1);
            let xp = (x + 1).min(w - 1);
            let p = |r: &[u8], i: usize| r[i] as i32;
            let sx = (p(ra, xp) + 2 * p(rb, xp) + p(rc, xp)) - (p(ra, xm) + 2 * p(rb, xm) + p(rc, xm));
            let sy = (p(rc, xm) + 2 * p(rc, x) + p(rc, xp)) - (p(ra, xm) + 2 * p(ra, x) + p(ra, xp));
            let (fx, fy) = (T::of(sx as f64), T::of(sy as f64));
            gx.push(fx);
            gy.push(fy);
            magnitude.push((fx * fx + fy * fy).sqrt());
        }
    }
    Ok(GradientMaps {
        width: w,
        height: h,
        gx,
        gy,
        magnitude,
    })
}

/// Min-max normalization to `[0, 1]`; a flat map becomes all zeros.
pub fn normalize_map<T: Scalar>(map: &[T]) -> Vec<T> {
    let (lo, hi) = map
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if map.is_empty() || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return vec![T::zero(); map.len()];
    }
    let span = hi - lo;
    map.iter().map(|&v| (v - lo) / span).collect()
}

/// Weights of the joint edge map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JemWeights<T> {
    pub depth: T,
    pub texture: T,
}

impl<T: Scalar> Default for JemWeights<T> {
    fn default() -> Self {
        Self {
            depth: T::one(),
            texture: T::of(0.5),
        }
    }
}

/// `w_d * G_D + w_t * G_T * (1 - G_D)` per pixel.
pub fn joint_edge_map<T: Scalar>(gt_norm: &[T], gd_norm: &[T], weights: JemWeights<T>) -> Result<Vec<T>> {
    if gt_norm.len() != gd_norm.len() {
        return Err(VsdeError::invalid(format!(
            "joint edge map: texture map has {} pixels, depth map {}",
            gt_norm.len(),
            gd_norm.len()
        )));
    }
    Ok(gt_norm
        .iter()
        .zip(gd_norm)
        .map(|(&t, &d)| weights.depth * d + weights.texture * t * (T::one() - d))
        .collect())
}

#[inline]
fn otsu_bin<T: Scalar>(v: T) -> usize {
    let b = (v.f64() * OTSU_BINS as f64).floor();
    if b.is_nan() || b < 0.0 {
        0
    } else {
        (b as usize).min(OTSU_BINS - 1)
    }
}

/// Between-class variance score of splitting a histogram after bin `t`, up to
/// a positive factor common to every split. Inputs are exact integer sums.
#[inline]
pub(crate) fn split_score(n0: u64, s0: u64, n: u64, s: u64) -> f64 {
    let n0f = n0 as f64;
    let n1f = (n - n0) as f64;
    let diff = n as f64 * s0 as f64 - n0f * s as f64;
    diff * diff / (n0f * n1f)
}

/// Otsu threshold over a 256-bin histogram of `[0, 1]` values.
///
/// The returned value sits halfway between the largest value of the lower
/// class and the smallest value of the upper class, so a strict "above
/// threshold" test reproduces the Otsu partition exactly. A map occupying a
/// single bin returns its largest value (everything falls in the lower class).
pub fn otsu_threshold<T: Scalar>(map: &[T]) -> T {
    if map.is_empty() {
        return T::zero();
    }
    let mut counts = [0u64; OTSU_BINS];
    let mut bin_min = [T::infinity(); OTSU_BINS];
    let mut bin_max = [T::neg_infinity(); OTSU_BINS];
    for &v in map {
        let b = otsu_bin(v);
        counts[b] += 1;
        bin_min[b] = bin_min[b].min(v);
        bin_max[b] = bin_max[b].max(v);
    }
    let n: u64 = counts.iter().sum();
    let s: u64 = counts.iter().enumerate().map(|(i, &c)| i as u64 * c).sum();

    let mut best: Option<(usize, f64)> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (t, &c) in counts.iter().enumerate().take(OTSU_BINS - 1) {
        n0 += c;
        s0 += t as u64 * c;
        if n0 == 0 || n0 == n {
            continue;
        }
        let score = split_score(n0, s0, n, s);
        // Splits within a relative 1e-12 of the best are treated as ties; the
        // lowest split wins.
        if best.is_none_or(|(_, b)| score > b * (1.0 + 1e-12)) {
            best = Some((t, score));
        }
    }
    match best {
        None => bin_max.iter().copied().fold(T::neg_infinity(), T::max),
        Some((t, _)) => {
            let lower = bin_max[..=t].iter().copied().fold(T::neg_infinity(), T::max);
            let upper = bin_min[t + 1..].iter().copied().fold(T::infinity(), T::min);
            (lower + upper) * T::of(0.5)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Locally stationary.
    Ls,
    /// Non-stationary.
    Ns,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<Region>,
    pub ls_count: usize,
    pub ns_count: usize,
}

impl RegionMask {
    pub fn uniform(width: usize, height: usize, region: Region) -> Self {
        let n = width * height;
        let (ls_count, ns_count) = match region {
            Region::Ls => (n, 0),
            Region::Ns => (0, n),
        };
        Self {
            width,
            height,
            labels: vec![region; n],
            ls_count,
            ns_count,
        }
    }

    pub fn from_labels(width: usize, height: usize, labels: Vec<Region>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(VsdeError::invalid("mask label count does not match dimensions"));
        }
        let ns_count = labels.iter().filter(|&&r| r == Region::Ns).count();
        Ok(Self {
            width,
            height,
            ls_count: labels.len() - ns_count,
            ns_count,
            labels,
        })
    }

    pub fn is_ns(&self, idx: usize) -> bool {
        self.labels[idx] == Region::Ns
    }

    pub fn ns_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &r)| r == Region::Ns)
            .map(|(i, _)| i)
    }

    pub fn ns_fraction(&self) -> f64 {
        self.ns_count as f64 / self.labels.len().max(1) as f64
    }
}

/// Strictly-above-threshold pixels are NS; ties fall to LS.
pub fn classify_ls_ns<T: Scalar>(jem: &[T], width: usize, height: usize, threshold: T) -> Result<RegionMask> {
    let labels = jem
        .iter()
        .map(|&v| if v > threshold { Region::Ns } else { Region::Ls })
        .collect();
    RegionMask::from_labels(width, height, labels)
}

/// Everything produced by classifying one reference view.
#[derive(Debug, Clone)]
pub struct Classification<T> {
    pub texture_grads: GradientMaps<T>,
    pub depth_grads: GradientMaps<T>,
    pub jem: Vec<T>,
    pub threshold: T,
    pub mask: RegionMask,
}

/// Joint texture-depth LS/NS classification of one reference view.
pub fn classify_view<T: Scalar>(
    texture: &LumaFrame,
    depth: &LumaFrame,
    weights: JemWeights<T>,
) -> Result<Classification<T>> {
    texture.check_same_dims(depth, "classification")?;
    let texture_grads = sobel_gradients::<T>(texture)?;
    let depth_grads = sobel_gradients::<T>(depth)?;
    let gt = normalize_map(&texture_grads.magnitude);
    let gd = normalize_map(&depth_grads.magnitude);
    let jem = joint_edge_map(&gt, &gd, weights)?;
    let threshold = otsu_threshold(&jem);
    let mask = classify_ls_ns(&jem, texture.width(), texture.height(), threshold)?;
    Ok(Classification {
        texture_grads,
        depth_grads,
        jem,
        threshold,
        mask,
    })
}

/// Horizontal curvature of NS pixels, in raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct NsCurvature<T> {
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

/// `T(x+1,y) - 2T(x,y) + T(x-1,y)` at NS pixels, replicate borders.
pub fn second_derivative_x<T: Scalar>(frame: &LumaFrame, mask: &RegionMask) -> Result<NsCurvature<T>> {
    if frame.width() != mask.width || frame.height() != mask.height {
        return Err(VsdeError::invalid("curvature: mask does not match frame"));
    }
    let w = frame.width();
    let mut indices = Vec::with_capacity(mask.ns_count);
    let mut values = Vec::with_capacity(mask.ns_count);
    for idx in mask.ns_indices() {
        let (x, y) = ((idx % w) as isize, (idx / w) as isize);
        let c = frame.get_clamped(x, y) as i32;
        let l = frame.get_clamped(x - 1, y) as i32;
        let r = frame.get_clamped(x + 1, y) as i32;
        indices.push(idx);
        values.push(T::of((r - 2 * c + l) as f64));
    }
    Ok(NsCurvature { indices, values })
}

/// Raw 8-bit rendering of a mask: 0 = LS, 255 = NS.
pub fn mask_plane(mask: &RegionMask) -> LumaFrame {
    let samples = mask
        .labels
        .iter()
        .map(|&r| if r == Region::Ns { 255 } else { 0 })
        .collect();
    LumaFrame::new(mask.width, mask.height, samples).expect("mask dims are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Textbook between-class variance, recomputed from scratch for every split.
    pub(crate) fn otsu_exhaustive(map: &[f64]) -> f64 {
        let mut hist = [0usize; OTSU_BINS];
        let bins: Vec<usize> = map.iter().map(|&v| otsu_bin(v)).collect();
        for &b in &bins {
            hist[b] += 1;
        }
        let n = map.len() as f64;
        let mut best_t = None;
        let mut best = f64::NEG_INFINITY;
        for t in 0..OTSU_BINS - 1 {
            let c0: usize = hist[..=t].iter().sum();
            let c1: usize = hist[t + 1..].iter().sum();
            if c0 == 0 || c1 == 0 {
                continue;
            }
            let m0 = hist[..=t]
                .iter()
                .enumerate()
                .map(|(i, &c)| i as f64 * c as f64)
                .sum::<f64>()
                / c0 as f64;
            let m1 = hist[t + 1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| (i + t + 1) as f64 * c as f64)
                .sum::<f64>()
                / c1 as f64;
            let var = (c0 as f64 / n) * (c1 as f64 / n) * (m0 - m1) * (m0 - m1);
            if var > best * (1.0 + 1e-12) {
                best = var;
                best_t = Some(t);
            }
        }
        match best_t {
            None => map.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Some(t) => {
                let lo = map
                    .iter()
                    .zip(&bins)
                    .filter(|(_, &b)| b <= t)
                    .map(|(v, _)| *v)
                    .fold(f64::NEG_INFINITY, f64::max);
                let hi = map
                    .iter()
                    .zip(&bins)
                    .filter(|(_, &b)| b > t)
                    .map(|(v, _)| *v)
                    .fold(f64::INFINITY, f64::min);
                0.5 * (lo + hi)
            }
        }
    }

    fn frame(w: usize, h: usize, f: impl Fn(usize, usize) -> u8) -> LumaFrame {
        LumaFrame::from_fn(w, h, f).unwrap()
    }

    #[test]
    fn constant_frame_has_zero_gradient() {
        let g = sobel_gradients::<f64>(&frame(8, 8, |_, _| 77)).unwrap();
        assert!(g.gx.iter().chain(&g.gy).chain(&g.magnitude).all(|&v| v == 0.0));
    }

    #[test]
    fn vertical_step_hand_convolved() {
        let f = frame(8, 8, |x, _| if x < 4 { 0 } else { 255 });
        let g = sobel_gradients::<f64>(&f).unwrap();
        for y in 1..7 {
            assert_eq!(g.gx[y * 8 + 3], 1020.0);
            assert_eq!(g.gx[y * 8 + 4], 1020.0);
            assert_eq!(g.gx[y * 8 + 2], 0.0);
            assert!(g.gy[y * 8..(y + 1) * 8].iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn ramp_interior_gradient_is_eight() {
        let f = frame(10, 6, |x, _| x as u8);
        let g = sobel_gradients::<f32>(&f).unwrap();
        for y in 0..6 {
            for x in 1..9 {
                assert_eq!(g.gx[y * 10 + x], 8.0);
                assert_eq!(g.unit_gx(y * 10 + x), 1.0);
            }
            // replicate border halves the central difference
            assert_eq!(g.gx[y * 10], 4.0);
        }
    }

    #[test]
    fn sobel_rejects_tiny_frames() {
        assert!(sobel_gradients::<f64>(&frame(2, 5, |_, _| 0)).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_map(&[2.0, 2.0, 2.0]), vec![0.0; 3]);
        assert_eq!(normalize_map(&[0.0, 5.0, 10.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn jem_examples() {
        let w = JemWeights::default();
        let j = joint_edge_map(&[0.3, 1.0, 0.8], &[1.0, 0.0, 0.5], w).unwrap();
        assert_eq!(j[0], 1.0);
        assert_eq!(j[1], 0.5);
        assert_abs_diff_eq!(j[2], 0.70, epsilon = 1e-15);
        assert!(joint_edge_map(&[0.0], &[0.0, 1.0], w).is_err());
    }

    #[test]
    fn otsu_two_clusters() {
        let mut map = vec![0.1; 50];
        map.extend(vec![0.9; 50]);
        let t = otsu_threshold(&map);
        assert!(t > 0.1 && t < 0.9);
        assert_eq!(t, otsu_exhaustive(&map));
        let mask = classify_ls_ns(&map, 10, 10, t).unwrap();
        assert_eq!((mask.ls_count, mask.ns_count), (50, 50));
    }

    #[test]
    fn otsu_flat_map() {
        let map = vec![0.37; 64];
        let t = otsu_threshold(&map);
        assert_eq!(t, 0.37);
        let mask = classify_ls_ns(&map, 8, 8, t).unwrap();
        assert_eq!(mask.ls_count, 64);
    }

    #[test]
    fn otsu_bimodal_matches_exhaustive() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let map: Vec<f64> = (0..400)
                .map(|_| {
                    if rng.random_bool(0.7) {
                        rng.random_range(0.0..0.35)
                    } else {
                        rng.random_range(0.55..1.0)
                    }
                })
                .collect();
            assert_eq!(otsu_threshold(&map), otsu_exhaustive(&map));
        }
    }

    #[test]
    fn classify_examples() {
        let m = classify_ls_ns(&[0.0; 4], 2, 2, 0.0).unwrap();
        assert_eq!(m.ls_count, 4);
        let m = classify_ls_ns(&[0.1, 0.9], 2, 1, 0.5).unwrap();
        assert_eq!((m.ls_count, m.ns_count), (1, 1));
        assert_eq!(m.labels, vec![Region::Ls, Region::Ns]);
    }

    #[test]
    fn depth_edge_under_smooth_texture_is_ns() {
        // Flat texture, a sharp depth step at x = 16: texture alone would call it LS.
        let tex = frame(32, 16, |_, _| 120);
        let depth = frame(32, 16, |x, _| if x < 16 { 40 } else { 200 });
        let c = classify_view::<f64>(&tex, &depth, JemWeights::default()).unwrap();
        for y in 0..16 {
            assert!(c.mask.is_ns(y * 32 + 15));
            assert!(c.mask.is_ns(y * 32 + 16));
            assert!(!c.mask.is_ns(y * 32 + 5));
        }
        assert!(c.texture_grads.magnitude.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn curvature_examples() {
        let all_ns = |w, h| RegionMask::uniform(w, h, Region::Ns);
        let ramp = frame(9, 3, |x, _| 3 * x as u8);
        let c = second_derivative_x::<f64>(&ramp, &all_ns(9, 3)).unwrap();
        for (&i, &v) in c.indices.iter().zip(&c.values) {
            let x = i % 9;
            if x > 0 && x < 8 {
                assert_eq!(v, 0.0);
            }
        }
        let quad = frame(12, 3, |x, _| (x * x) as u8);
        let c = second_derivative_x::<f64>(&quad, &all_ns(12, 3)).unwrap();
        for (&i, &v) in c.indices.iter().zip(&c.values) {
            let x = i % 12;
            if x > 0 && x < 11 {
                assert_eq!(v, 2.0);
            }
        }
        let spike = frame(3, 3, |x, _| if x == 1 { 255 } else { 0 });
        let c = second_derivative_x::<f64>(&spike, &all_ns(3, 3)).unwrap();
        assert_eq!(c.values[1], -510.0);
    }

    #[test]
    fn curvature_only_at_ns() {
        let f = frame(4, 4, |x, y| (x * y) as u8);
        let mut labels = vec![Region::Ls; 16];
        labels[5] = Region::Ns;
        labels[10] = Region::Ns;
        let mask = RegionMask::from_labels(4, 4, labels).unwrap();
        let c = second_derivative_x::<f64>(&f, &mask).unwrap();
        assert_eq!(c.indices, vec![5, 10]);
    }

    proptest! {
        #[test]
        fn normalize_bounds_and_order(v in proptest::collection::vec(0.0f64..1e4, 2..64)) {
            let n = normalize_map(&v);
            let distinct = v.iter().any(|&a| a != v[0]);
            if distinct {
                prop_assert_eq!(n.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
                prop_assert_eq!(n.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
            }
            for i in 0..v.len() {
                for j in 0..v.len() {
                    if v[i] < v[j] { prop_assert!(n[i] <= n[j]); }
                }
            }
        }

        #[test]
        fn otsu_equals_exhaustive(v in proptest::collection::vec(0.0f64..=1.0, 1..300)) {
            prop_assert_eq!(otsu_threshold(&v), otsu_exhaustive(&v));
        }

        #[test]
        fn jem_monotone_in_depth(gt in 0.0f64..=1.0, d0 in 0.0f64..=1.0, d1 in 0.0f64..=1.0) {
            let w = JemWeights::default();
            let (lo, hi) = if d0 <= d1 { (d0, d1) } else { (d1, d0) };
            let a = joint_edge_map(&[gt], &[lo], w).unwrap()[0];
            let b = joint_edge_map(&[gt], &[hi], w).unwrap()[0];
            prop_assert!(a <= b + 1e-15);
        }

        #[test]
        fn classification_invariant_under_gradient_scaling(seed in any::<u64>()) {
            let tex = frame(16, 16, |x, y| ((seed >> (x % 13)) as usize).wrapping_mul(7).wrapping_add(x * y) as u8);
            let depth = frame(16, 16, |x, _| if x < (seed % 10) as usize + 3 { 30 } else { 180 });
            let c = classify_view::<f64>(&tex, &depth, JemWeights::default()).unwrap();
            let scaled_t: Vec<f64> = c.texture_grads.magnitude.iter().map(|v| v * 10.0).collect();
            let scaled_d: Vec<f64> = c.depth_grads.magnitude.iter().map(|v| v * 10.0).collect();
            let gt = normalize_map(&scaled_t);
            let gd = normalize_map(&scaled_d);
            let base_t = normalize_map(&c.texture_grads.magnitude);
            let base_d = normalize_map(&c.depth_grads.magnitude);
            for (a, b) in gt.iter().zip(&base_t) { prop_assert!((a - b).abs() < 1e-12); }
            for (a, b) in gd.iter().zip(&base_d) { prop_assert!((a - b).abs() < 1e-12); }
            let jem = joint_edge_map(&gt, &gd, JemWeights::default()).unwrap();
            if jem == c.jem {
                let m = classify_ls_ns(&jem, 16, 16, otsu_threshold(&jem)).unwrap();
                prop_assert_eq!(m, c.mask.clone());
            }
        }
    }
}
