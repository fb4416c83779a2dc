//! Spectral distortion model for locally stationary regions, the baseline
//! distance indicator and its sigmoid compensation.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VsdeError};
use crate::geometry::DisparityModel;
use crate::gradient::{GradientMaps, Region, RegionMask};
use crate::media_io::{CameraConfig, LumaFrame};
use crate::scalar::Scalar;
use crate::vsde_blend::{detect_depth_edges, disocclusion_from_edges};

/// How the periodogram is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMode {
    /// Full 2D periodogram.
    #[default]
    Full2d,
    /// Row periodograms averaged over rows; exact for the horizontal-only
    /// attenuation but without the vertical frequency axis.
    RowAverage,
}

/// Periodogram `|DFT|^2 / (MN)` on the DFT grid, row-major with the
/// horizontal frequency index fastest. In [`SpectrumMode::RowAverage`] the
/// grid has a single row whose bins already include the vertical sum.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum<T> {
    pub width: usize,
    pub height: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> PowerSpectrum<T> {
    /// Mean power over all bins, equal to the spatial power of the analyzed
    /// signal.
    pub fn mean_power(&self) -> T {
        self.values.iter().copied().sum::<T>() / T::of_usize(self.values.len())
    }
}

/// Mean-removed signal with NS pixels replaced by the LS mean.
fn ls_signal<T: Scalar>(texture_hat: &LumaFrame, mask: &RegionMask) -> Result<Vec<T>> {
    if texture_hat.width() != mask.width || texture_hat.height() != mask.height {
        return Err(VsdeError::invalid("power spectrum: mask does not match frame"));
    }
    if mask.ls_count == 0 {
        return Err(VsdeError::DegenerateMask("no LS pixels to analyze".into()));
    }
    let ls_sum: u64 = texture_hat
        .samples()
        .iter()
        .zip(&mask.labels)
        .filter(|(_, &r)| r == Region::Ls)
        .map(|(&v, _)| v as u64)
        .sum();
    let ls_mean = ls_sum as f64 / mask.ls_count as f64;
    // After mean filling, the frame mean equals the LS mean.
    Ok(texture_hat
        .samples()
        .iter()
        .zip(&mask.labels)
        .map(|(&v, &r)| match r {
            Region::Ls => T::of(v as f64 - ls_mean),
            Region::Ns => T::zero(),
        })
        .collect())
}

pub fn ls_power_spectrum<T: Scalar>(texture_hat: &LumaFrame, mask: &RegionMask) -> Result<PowerSpectrum<T>> {
    ls_power_spectrum_with(texture_hat, mask, SpectrumMode::Full2d)
}

pub fn ls_power_spectrum_with<T: Scalar>(
    texture_hat: &LumaFrame,
    mask: &RegionMask,
    mode: SpectrumMode,
) -> Result<PowerSpectrum<T>> {
    let signal = ls_signal::<T>(texture_hat, mask)?;
    let (w, h) = (texture_hat.width(), texture_hat.height());
    let mut planner = FftPlanner::<T>::new();
    let mut buf: Vec<Complex<T>> = signal.into_iter().map(|v| Complex::new(v, T::zero())).collect();
    planner.plan_fft_forward(w).process(&mut buf);
    let norm = T::of_usize(w * h).recip();
    match mode {
        SpectrumMode::RowAverage => {
            let mut values = vec![T::zero(); w];
            for row in buf.chunks_exact(w) {
                for (acc, c) in values.iter_mut().zip(row) {
                    *acc = *acc + c.norm_sqr();
                }
            }
            // Summing row periodograms equals summing the 2D bins over the
            // vertical frequency, up to the factor `h` that `norm` absorbs.
            Ok(PowerSpectrum {
                width: w,
                height: 1,
                values: values.into_iter().map(|v| v * norm).collect(),
            })
        }
        SpectrumMode::Full2d => {
            let mut cols = vec![Complex::new(T::zero(), T::zero()); w * h];
            for y in 0..h {
                for x in 0..w {
                    cols[x * h + y] = buf[y * w + x];
                }
            }
            planner.plan_fft_forward(h).process(&mut cols);
            let mut values = vec![T::zero(); w * h];
            for x in 0..w {
                for y in 0..h {
                    values[y * w + x] = cols[x * h + y].norm_sqr() * norm;
                }
            }
            Ok(PowerSpectrum {
                width: w,
                height: h,
                values,
            })
        }
    }
}

/// Mean over bins of `2 (1 - Re P(ω1)) Φ(ω1, ω2)`.
pub fn ls_base_distortion<T: Scalar>(spectrum: &PowerSpectrum<T>, char_fn: &[Complex<T>]) -> Result<T> {
    if char_fn.len() != spectrum.width {
        return Err(VsdeError::invalid(format!(
            "characteristic function has {} samples, spectrum has {} horizontal bins",
            char_fn.len(),
            spectrum.width
        )));
    }
    let two = T::of(2.0);
    let gain: Vec<T> = char_fn.iter().map(|p| two * (T::one() - p.re)).collect();
    let total: T = spectrum
        .values
        .chunks_exact(spectrum.width)
        .map(|row| row.iter().zip(&gain).map(|(&phi, &g)| g * phi).sum::<T>())
        .sum();
    Ok((total / T::of_usize(spectrum.values.len())).max(T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdiWeights<T> {
    pub physical: T,
    pub disocclusion: T,
    pub max_disparity: T,
    pub texture: T,
}

impl<T: Scalar> Default for BdiWeights<T> {
    fn default() -> Self {
        Self {
            physical: T::of(0.3),
            disocclusion: T::of(0.4),
            max_disparity: T::of(0.2),
            texture: T::of(0.1),
        }
    }
}

impl<T: Scalar> BdiWeights<T> {
    pub fn validate(&self) -> Result<()> {
        let w = [self.physical, self.disocclusion, self.max_disparity, self.texture];
        if w.iter().any(|&v| v.is_nan() || v < T::zero()) {
            return Err(VsdeError::config("bdi_weights", "weights must be nonnegative"));
        }
        let s: T = w.iter().copied().sum();
        if (s - T::one()).abs() > T::of(1e-6) {
            return Err(VsdeError::config(
                "bdi_weights",
                format!("weights sum to {s}, expected 1"),
            ));
        }
        Ok(())
    }
}

/// The four normalized severity factors of one reference view.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BdiFactors<T> {
    pub d_phys: T,
    pub o_disocc: T,
    pub d_maxdisp: T,
    pub t_comp: T,
    pub weights: BdiWeights<T>,
}

/// Sum of the hole-opening parallax over depth edges, per frame pixel.
pub fn estimate_disocclusion_area<T: Scalar>(
    depth: &LumaFrame,
    model: &DisparityModel<T>,
    cam: &CameraConfig,
) -> Result<T> {
    let edges = detect_depth_edges(depth, model, cam)?;
    Ok(disocclusion_from_edges(
        &edges,
        model.side,
        depth.width(),
        depth.height(),
    ))
}

/// Nearest-rank 90th percentile.
fn percentile90<T: Scalar>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let mut v = values.to_vec();
    let rank = ((values.len() as f64 * 0.9).ceil() as usize).clamp(1, values.len()) - 1;
    let (_, nth, _) =
        v.select_nth_unstable_by(rank, |a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    *nth
}

/// Mean gradient magnitude over its 90th percentile, clamped to `[0, 1]`;
/// a gradient-free texture scores 0.
pub fn texture_complexity<T: Scalar>(texture_grads: &GradientMaps<T>) -> T {
    let mag = &texture_grads.magnitude;
    if mag.is_empty() {
        return T::zero();
    }
    let mean = mag.iter().copied().sum::<T>() / T::of_usize(mag.len());
    let p90 = percentile90(mag);
    if p90 > T::zero() {
        (mean / p90).min(T::one())
    } else {
        T::zero()
    }
}

/// Factors from a precomputed disocclusion area.
pub fn bdi_factors_from_parts<T: Scalar>(
    width: usize,
    model: &DisparityModel<T>,
    cam: &CameraConfig,
    o_disocc: T,
    texture_grads: &GradientMaps<T>,
    weights: BdiWeights<T>,
) -> BdiFactors<T> {
    let clamp01 = |v: T| v.max(T::zero()).min(T::one());
    BdiFactors {
        d_phys: clamp01(model.baseline / T::of(cam.z_near)),
        o_disocc: clamp01(o_disocc),
        d_maxdisp: clamp01(model.max_disparity() / T::of_usize(width)),
        t_comp: texture_complexity(texture_grads),
        weights,
    }
}

pub fn bdi_factors<T: Scalar>(
    texture: &LumaFrame,
    depth: &LumaFrame,
    model: &DisparityModel<T>,
    cam: &CameraConfig,
    texture_grads: &GradientMaps<T>,
    weights: BdiWeights<T>,
) -> Result<BdiFactors<T>> {
    texture.check_same_dims(depth, "BDI factors")?;
    if texture_grads.width != texture.width() || texture_grads.height != texture.height() {
        return Err(VsdeError::invalid(
            "BDI factors: gradient maps do not match frame",
        ));
    }
    let o = estimate_disocclusion_area(depth, model, cam)?;
    Ok(bdi_factors_from_parts(
        texture.width(),
        model,
        cam,
        o,
        texture_grads,
        weights,
    ))
}

/// Baseline distance indicator: weighted sum of the factors.
pub fn bdi<T: Scalar>(f: &BdiFactors<T>) -> T {
    let w = &f.weights;
    w.physical * f.d_phys + w.disocclusion * f.o_disocc + w.max_disparity * f.d_maxdisp + w.texture * f.t_comp
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensationParams<T> {
    /// Largest extra multiplicative gain.
    pub alpha_comp: T,
    /// Steepness of the transition.
    pub beta: T,
    pub xi_thresh: T,
}

impl<T: Scalar> Default for CompensationParams<T> {
    fn default() -> Self {
        Self {
            alpha_comp: T::of(1.5),
            beta: T::of(10.0),
            xi_thresh: T::of(0.4),
        }
    }
}

impl<T: Scalar> CompensationParams<T> {
    /// Parameters that leave the LS estimate unscaled.
    pub fn disabled() -> Self {
        Self {
            alpha_comp: T::zero(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_comp.is_nan() || self.alpha_comp < T::zero() {
            return Err(VsdeError::config("alpha_comp", "must be nonnegative"));
        }
        if self.beta.is_nan() || self.beta <= T::zero() {
            return Err(VsdeError::config("beta", "must be positive"));
        }
        if !(self.xi_thresh >= T::zero() && self.xi_thresh <= T::one()) {
            return Err(VsdeError::config("xi_thresh", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// `1 + alpha_comp * logistic(beta * (xi - xi_thresh))`.
pub fn sigmoid_scale<T: Scalar>(xi: T, params: &CompensationParams<T>) -> T {
    let z = params.beta * (xi - params.xi_thresh);
    // Evaluated on the side that cannot overflow.
    let logistic = if z >= T::zero() {
        (T::one() + (-z).exp()).recip()
    } else {
        let e = z.exp();
        e / (T::one() + e)
    };
    T::one() + params.alpha_comp * logistic
}

pub fn ls_distortion<T: Scalar>(base: T, xi: T, params: &CompensationParams<T>) -> T {
    base * sigmoid_scale(xi, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{disparity_model, sample_char_fn, DepthErrorStats, DEPTH_ERROR_LEVELS};
    use crate::gradient::sobel_gradients;
    use crate::media_io::ViewSide;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_ls(w: usize, h: usize) -> RegionMask {
        RegionMask::uniform(w, h, Region::Ls)
    }

    fn white(w: usize, h: usize, seed: u64) -> LumaFrame {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LumaFrame::from_fn(w, h, |_, _| rng.random_range(28..=228)).unwrap()
    }

    fn sample_var(f: &LumaFrame) -> f64 {
        let n = f.len() as f64;
        let m = f.samples().iter().map(|&v| v as f64).sum::<f64>() / n;
        f.samples().iter().map(|&v| (v as f64 - m).powi(2)).sum::<f64>() / n
    }

    /// Degenerate stats with `P(ΔD = d) = p` on the given support and `k = 1`.
    fn law(support: &[(i32, f64)]) -> (DepthErrorStats<f64>, DisparityModel<f64>) {
        let mut histogram = vec![0.0; DEPTH_ERROR_LEVELS];
        for &(d, p) in support {
            histogram[(d + 255) as usize] += p;
        }
        let var = support.iter().map(|&(d, p)| p * (d * d) as f64).sum();
        let stats = DepthErrorStats {
            histogram,
            mean: 0.0,
            variance: var,
            disparity_variance: var,
            fourth_moment: 0.0,
            count: 1,
        };
        let model = DisparityModel {
            k: 1.0,
            c: 0.0,
            baseline: 1.0,
            side: ViewSide::Left,
        };
        (stats, model)
    }

    #[test]
    fn constant_frame_has_zero_spectrum() {
        let f = LumaFrame::filled(16, 8, 90).unwrap();
        let s = ls_power_spectrum::<f64>(&f, &all_ls(16, 8)).unwrap();
        assert!(s.values.iter().all(|&v| v.abs() < 1e-18));
    }

    #[test]
    fn cosine_concentrates_in_conjugate_bins() {
        let (w, h, a) = (32, 8, 50.0);
        let f = LumaFrame::from_fn(w, h, |x, _| {
            (128.0 + a * (2.0 * std::f64::consts::PI * 4.0 * x as f64 / w as f64).cos()).round() as u8
        })
        .unwrap();
        let s = ls_power_spectrum::<f64>(&f, &all_ls(w, h)).unwrap();
        let total: f64 = s.values.iter().sum::<f64>() / (w * h) as f64;
        let peaks = (s.values[4] + s.values[w - 4]) / (w * h) as f64;
        assert!(peaks / total > 0.99);
        assert_relative_eq!(total, a * a / 2.0, max_relative = 0.01);
    }

    #[test]
    fn white_noise_parseval() {
        let f = white(256, 256, 1);
        let s = ls_power_spectrum::<f64>(&f, &all_ls(256, 256)).unwrap();
        assert_relative_eq!(s.mean_power(), sample_var(&f), max_relative = 0.02);
        assert!(s.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn row_average_gives_same_distortion() {
        let f = white(64, 32, 2);
        let m = all_ls(64, 32);
        let (stats, model) = law(&[(-1, 0.25), (1, 0.25), (0, 0.5)]);
        let p = sample_char_fn(&stats, &model, 64);
        let full = ls_base_distortion(&ls_power_spectrum::<f64>(&f, &m).unwrap(), &p).unwrap();
        let rows = ls_power_spectrum_with::<f64>(&f, &m, SpectrumMode::RowAverage).unwrap();
        assert_relative_eq!(full, ls_base_distortion(&rows, &p).unwrap(), max_relative = 1e-10);
    }

    #[test]
    fn ns_pixels_are_mean_filled() {
        let mut labels = vec![Region::Ls; 64];
        labels[10] = Region::Ns;
        let mask = RegionMask::from_labels(8, 8, labels).unwrap();
        let mut f = LumaFrame::filled(8, 8, 40).unwrap();
        f.set(2, 1, 255);
        let s = ls_power_spectrum::<f64>(&f, &mask).unwrap();
        assert!(s.mean_power() < 1e-18);
        let none = RegionMask::uniform(8, 8, Region::Ns);
        assert!(matches!(
            ls_power_spectrum::<f64>(&f, &none),
            Err(VsdeError::DegenerateMask(_))
        ));
    }

    #[test]
    fn no_depth_error_gives_zero() {
        let f = white(32, 32, 3);
        let s = ls_power_spectrum::<f64>(&f, &all_ls(32, 32)).unwrap();
        let ones = vec![Complex::new(1.0, 0.0); 32];
        assert_eq!(ls_base_distortion(&s, &ones).unwrap(), 0.0);
        assert!(ls_base_distortion(&s, &ones[..31]).is_err());
    }

    fn brute_shift_mse(f: &LumaFrame, support: &[(i32, f64)]) -> f64 {
        let w = f.width() as i32;
        let mut acc = 0.0;
        for &(d, p) in support {
            let mut s = 0.0;
            for y in 0..f.height() {
                for x in 0..w {
                    let xs = (x + d).rem_euclid(w);
                    let e = f.get(xs as usize, y) as f64 - f.get(x as usize, y) as f64;
                    s += e * e;
                }
            }
            acc += p * s / f.len() as f64;
        }
        acc
    }

    #[test]
    fn white_texture_unit_shift_is_twice_variance() {
        let f = white(128, 128, 4);
        let support = [(-1, 0.5), (1, 0.5)];
        let (stats, model) = law(&support);
        let s = ls_power_spectrum::<f64>(&f, &all_ls(128, 128)).unwrap();
        let e = ls_base_distortion(&s, &sample_char_fn(&stats, &model, 128)).unwrap();
        let var = sample_var(&f);
        assert_relative_eq!(e, 2.0 * var, max_relative = 0.05);
        // Circular shifts make the periodogram identity exact.
        assert_relative_eq!(e, brute_shift_mse(&f, &support), max_relative = 1e-9);
    }

    #[test]
    fn smooth_texture_distorts_less_than_white() {
        let f = white(64, 64, 5);
        let smooth = LumaFrame::from_fn(64, 64, |x, y| {
            (128.0
                + 60.0 * (2.0 * std::f64::consts::PI * x as f64 / 64.0).sin()
                + 10.0 * (2.0 * std::f64::consts::PI * y as f64 / 32.0).cos()) as u8
        })
        .unwrap();
        let (stats, model) = law(&[(-1, 0.5), (1, 0.5)]);
        let p = sample_char_fn(&stats, &model, 64);
        let m = all_ls(64, 64);
        let ew = ls_base_distortion(&ls_power_spectrum::<f64>(&f, &m).unwrap(), &p).unwrap() / sample_var(&f);
        let es = ls_base_distortion(&ls_power_spectrum::<f64>(&smooth, &m).unwrap(), &p).unwrap()
            / sample_var(&smooth);
        assert!(es < ew);
    }

    #[test]
    fn disocclusion_of_single_step() {
        let cam = CameraConfig::new(20.0, 0.0, 6.0, 3.0, 10.0, 1000.0).unwrap();
        let m = disparity_model::<f64>(&cam, ViewSide::Left);
        let (w, h) = (64, 16);
        let d = LumaFrame::from_fn(w, h, |x, _| if x > 30 { 220 } else { 30 }).unwrap();
        let zf = crate::geometry::depth_to_metric(220.0, 10.0, 1000.0);
        let zb = crate::geometry::depth_to_metric(30.0, 10.0, 1000.0);
        let expect = h as f64 * 20.0 * 3.0 * (1.0 / zf - 1.0 / zb) / (w * h) as f64;
        let o = estimate_disocclusion_area(&d, &m, &cam).unwrap();
        assert_abs_diff_eq!(o, expect, epsilon = 1e-12);
        let flat = LumaFrame::filled(w, h, 30).unwrap();
        assert_eq!(estimate_disocclusion_area(&flat, &m, &cam).unwrap(), 0.0);
        // Doubling the baseline doubles the area.
        let cam2 = CameraConfig::new(20.0, 0.0, 12.0, 6.0, 10.0, 1000.0).unwrap();
        let m2 = disparity_model::<f64>(&cam2, ViewSide::Left);
        assert_relative_eq!(
            estimate_disocclusion_area(&d, &m2, &cam2).unwrap(),
            2.0 * o,
            max_relative = 1e-12
        );
        // The hole the oracle opens agrees within 15%.
        let t = white(w, h, 6);
        let wv = crate::dibr::forward_warp(&t, &d, &m).unwrap();
        let shift0 = (m.disparity_unchecked(30.0) + 0.5).floor() as usize;
        let holes = (0..w * h).filter(|&i| !wv.valid[i] && i % w >= shift0).count();
        assert_relative_eq!(holes as f64 / (w * h) as f64, o, max_relative = 0.15);
    }

    #[test]
    fn zero_baseline_factors() {
        let cam = CameraConfig::new(200.0, 0.0, 6.0, 0.0, 10.0, 1000.0).unwrap();
        let m = disparity_model::<f64>(&cam, ViewSide::Left);
        let t = white(16, 16, 7);
        let d = LumaFrame::from_fn(16, 16, |x, _| if x > 8 { 200 } else { 10 }).unwrap();
        let g = sobel_gradients::<f64>(&t).unwrap();
        let f = bdi_factors(&t, &d, &m, &cam, &g, BdiWeights::default()).unwrap();
        assert_eq!((f.d_phys, f.d_maxdisp, f.o_disocc), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_texture_has_zero_complexity() {
        let g = sobel_gradients::<f64>(&LumaFrame::filled(16, 16, 3).unwrap()).unwrap();
        assert_eq!(texture_complexity(&g), 0.0);
    }

    fn factors(a: f64, b: f64, c: f64, d: f64) -> BdiFactors<f64> {
        BdiFactors {
            d_phys: a,
            o_disocc: b,
            d_maxdisp: c,
            t_comp: d,
            weights: BdiWeights::default(),
        }
    }

    #[test]
    fn bdi_examples() {
        assert_eq!(bdi(&factors(0.0, 0.0, 0.0, 0.0)), 0.0);
        assert_abs_diff_eq!(bdi(&factors(1.0, 1.0, 1.0, 1.0)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bdi(&factors(0.5, 0.5, 0.5, 0.5)), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(bdi(&factors(0.2, 0.5, 0.1, 0.3)), 0.31, epsilon = 1e-12);
        BdiWeights::<f64>::default().validate().unwrap();
        let bad = BdiWeights {
            physical: 0.5,
            ..BdiWeights::<f64>::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sigmoid_examples() {
        let p = CompensationParams::<f64>::default();
        assert_abs_diff_eq!(sigmoid_scale(0.4, &p), 1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(sigmoid_scale(-1e6, &p), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sigmoid_scale(1e6, &p), 2.5, epsilon = 1e-12);
        assert_eq!(ls_distortion(0.0, 0.9, &p), 0.0);
        assert_abs_diff_eq!(ls_distortion(10.0, 0.4, &p), 17.5, epsilon = 1e-12);
        assert_eq!(sigmoid_scale(0.9, &CompensationParams::disabled()), 1.0);
        assert!(CompensationParams { beta: 0.0, ..p }.validate().is_err());
    }

    proptest! {
        #[test]
        fn sigmoid_bounded_and_monotone(a in -10.0f64..10.0, b in -10.0f64..10.0, alpha in 0.0f64..5.0) {
            let p = CompensationParams { alpha_comp: alpha, ..CompensationParams::default() };
            let (sa, sb) = (sigmoid_scale(a, &p), sigmoid_scale(b, &p));
            prop_assert!(sa >= 1.0 && sa <= 1.0 + alpha);
            if a < b { prop_assert!(sa <= sb); }
        }

        #[test]
        fn bdi_in_unit_interval(f in prop::array::uniform4(0.0f64..=1.0)) {
            let x = bdi(&factors(f[0], f[1], f[2], f[3]));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&x));
        }

        #[test]
        fn base_bounded_by_four_times_power(seed in 0u64..1000, p1 in 0.0f64..0.5, p2 in 0.0f64..0.5) {
            let f = white(16, 16, seed);
            let s = ls_power_spectrum::<f64>(&f, &all_ls(16, 16)).unwrap();
            let (stats, model) = law(&[(-2, p1), (3, p2), (0, 1.0 - p1 - p2)]);
            let e = ls_base_distortion(&s, &sample_char_fn(&stats, &model, 16)).unwrap();
            prop_assert!(e >= 0.0 && e <= 4.0 * s.mean_power() + 1e-9);
        }
    }
}
