//! Disparity under the 1D parallel camera model, metric depth conversion and
//! depth-error statistics.

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VsdeError};
use crate::gradient::{Region, RegionMask};
use crate::media_io::{CameraConfig, LumaFrame, ViewSide};
use crate::scalar::Scalar;

/// Number of distinct depth-error values, `-255..=255`.
pub const DEPTH_ERROR_LEVELS: usize = 511;

/// Linear map from an 8-bit depth level to a horizontal disparity, `k * d + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisparityModel<T> {
    /// Pixels per depth level.
    pub k: T,
    /// Disparity of the farthest plane, in pixels.
    pub c: T,
    /// Reference-to-virtual distance used to derive `k` and `c`.
    pub baseline: T,
    pub side: ViewSide,
}

pub fn disparity_model<T: Scalar>(cam: &CameraConfig, side: ViewSide) -> DisparityModel<T> {
    let b = cam.side_baseline(side);
    let fb = cam.focal_px * b;
    DisparityModel {
        k: T::of(fb / 255.0 * (1.0 / cam.z_near - 1.0 / cam.z_far)),
        c: T::of(fb / cam.z_far),
        baseline: T::of(b),
        side,
    }
}

impl<T: Scalar> DisparityModel<T> {
    /// Disparity with no range check; `d` may be fractional.
    #[inline]
    pub fn disparity_unchecked(&self, d: T) -> T {
        self.k * d + self.c
    }

    /// Largest disparity any depth level can produce.
    pub fn max_disparity(&self) -> T {
        self.disparity_unchecked(T::of(255.0))
    }
}

pub fn disparity<T: Scalar>(model: &DisparityModel<T>, d: T) -> Result<T> {
    if !(d >= T::zero() && d <= T::of(255.0)) {
        return Err(VsdeError::invalid(format!("depth level {d} outside [0, 255]")));
    }
    Ok(model.disparity_unchecked(d))
}

/// Metric depth of an 8-bit inverse-depth level.
pub fn depth_to_metric<T: Scalar>(d: T, z_near: T, z_far: T) -> T {
    let inv = d / T::of(255.0) * (z_near.recip() - z_far.recip()) + z_far.recip();
    inv.recip()
}

/// Inverse of [`depth_to_metric`], unquantized.
pub fn metric_to_depth<T: Scalar>(z: T, z_near: T, z_far: T) -> T {
    T::of(255.0) * (z.recip() - z_far.recip()) / (z_near.recip() - z_far.recip())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthErrorStats<T> {
    /// Probability mass of `ΔD = d_hat - d`, index `ΔD + 255`.
    pub histogram: Vec<T>,
    pub mean: T,
    /// Mean-removed variance of `ΔD`, in depth levels squared.
    pub variance: T,
    /// `k^2 * variance`, in pixels squared.
    pub disparity_variance: T,
    /// Empirical fourth central moment of `ΔD`.
    pub fourth_moment: T,
    pub count: usize,
}

impl<T: Scalar> DepthErrorStats<T> {
    pub fn is_error_free(&self) -> bool {
        self.count == 0 || self.histogram[255] == T::one()
    }

    /// Iterator over `(ΔD, probability)` pairs with nonzero mass.
    pub fn support(&self) -> impl Iterator<Item = (i32, T)> + '_ {
        self.histogram
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > T::zero())
            .map(|(i, &p)| (i as i32 - 255, p))
    }
}

/// Statistics of the depth coding error over the whole frame or over one
/// class of `restrict`.
pub fn depth_error_stats<T: Scalar>(
    d_orig: &LumaFrame,
    d_hat: &LumaFrame,
    model: &DisparityModel<T>,
    restrict: Option<(&RegionMask, Region)>,
) -> Result<DepthErrorStats<T>> {
    d_orig.check_same_dims(d_hat, "depth error statistics")?;
    if let Some((mask, _)) = restrict {
        if mask.width != d_orig.width() || mask.height != d_orig.height() {
            return Err(VsdeError::invalid(
                "depth error statistics: mask dimension mismatch",
            ));
        }
    }
    let mut counts = [0u64; DEPTH_ERROR_LEVELS];
    for (i, (&a, &b)) in d_orig.samples().iter().zip(d_hat.samples()).enumerate() {
        if let Some((mask, region)) = restrict {
            if mask.labels[i] != region {
                continue;
            }
        }
        counts[(b as i32 - a as i32 + 255) as usize] += 1;
    }
    let n: u64 = counts.iter().sum();
    let mut histogram = vec![T::zero(); DEPTH_ERROR_LEVELS];
    if n == 0 {
        histogram[255] = T::one();
        return Ok(DepthErrorStats {
            histogram,
            mean: T::zero(),
            variance: T::zero(),
            disparity_variance: T::zero(),
            fourth_moment: T::zero(),
            count: 0,
        });
    }
    let nf = n as f64;
    let mean = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (i as f64 - 255.0) * c as f64)
        .sum::<f64>()
        / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let dv = i as f64 - 255.0 - mean;
        let d2 = dv * dv;
        m2 += d2 * c as f64;
        m4 += d2 * d2 * c as f64;
        histogram[i] = T::of(c as f64 / nf);
    }
    let variance = m2 / nf;
    let k = model.k.f64();
    Ok(DepthErrorStats {
        histogram,
        mean: T::of(mean),
        variance: T::of(variance),
        disparity_variance: T::of(k * k * variance),
        fourth_moment: T::of(m4 / nf),
        count: n as usize,
    })
}

/// Characteristic function of the disparity error `k * ΔD` at `omega`.
pub fn disparity_error_char_fn<T: Scalar>(
    stats: &DepthErrorStats<T>,
    model: &DisparityModel<T>,
    omega: T,
) -> Complex<T> {
    stats
        .support()
        .map(|(dd, p)| {
            let phase = -omega * model.k * T::of(dd as f64);
            Complex::new(p * phase.cos(), p * phase.sin())
        })
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

/// Angular frequency of DFT bin `u` of an `n`-point transform, in `[-π, π)`.
pub fn dft_omega<T: Scalar>(u: usize, n: usize) -> T {
    let u = if 2 * u >= n { u as f64 - n as f64 } else { u as f64 };
    T::of(2.0 * std::f64::consts::PI * u / n as f64)
}

/// The characteristic function sampled on the horizontal DFT grid of width `n`.
pub fn sample_char_fn<T: Scalar>(
    stats: &DepthErrorStats<T>,
    model: &DisparityModel<T>,
    n: usize,
) -> Vec<Complex<T>> {
    (0..n)
        .map(|u| disparity_error_char_fn(stats, model, dft_omega(u, n)))
        .collect()
}

/// How depth errors are turned into horizontal warping errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftModel {
    /// `k * ΔD`, a continuous scaling of the depth error.
    Continuous,
    /// Difference of the rounded target columns a renderer with integer
    /// disparities actually uses: `round(k D_hat + c) - round(k D + c)`.
    #[default]
    IntegerPel,
}

/// Probability law of the horizontal warping error, in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityErrorLaw<T> {
    /// `(Δx, probability)` pairs with nonzero mass, ascending in `Δx`.
    pub support: Vec<(T, T)>,
    pub mean: T,
    /// Mean-removed variance in pixels squared.
    pub variance: T,
}

impl<T: Scalar> DisparityErrorLaw<T> {
    /// The law of `k * ΔD` induced by depth-error statistics.
    pub fn from_depth_stats(stats: &DepthErrorStats<T>, model: &DisparityModel<T>) -> Self {
        let support: Vec<(T, T)> = stats
            .support()
            .map(|(dd, p)| (model.k * T::of(dd as f64), p))
            .collect();
        Self {
            support,
            mean: model.k * stats.mean,
            variance: stats.disparity_variance,
        }
    }

    /// The law of integer target-column errors, measured per pixel.
    pub fn integer_pel(
        d_orig: &LumaFrame,
        d_hat: &LumaFrame,
        model: &DisparityModel<T>,
        restrict: Option<(&RegionMask, Region)>,
    ) -> Result<Self> {
        d_orig.check_same_dims(d_hat, "disparity error law")?;
        let mut shift = [0i64; 256];
        for (d, s) in shift.iter_mut().enumerate() {
            *s = (model.disparity_unchecked(T::of(d as f64)).f64() + 0.5).floor() as i64;
        }
        let span = (shift[255] - shift[0]).unsigned_abs() as usize;
        let mut counts = vec![0u64; 2 * span + 1];
        for (i, (&a, &b)) in d_orig.samples().iter().zip(d_hat.samples()).enumerate() {
            if let Some((mask, region)) = restrict {
                if mask.labels[i] != region {
                    continue;
                }
            }
            counts[(shift[b as usize] - shift[a as usize] + span as i64) as usize] += 1;
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Ok(Self::exact());
        }
        let nf = n as f64;
        let at = |i: usize| i as f64 - span as f64;
        let mean = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| at(i) * c as f64)
            .sum::<f64>()
            / nf;
        let variance = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| (at(i) - mean).powi(2) * c as f64)
            .sum::<f64>()
            / nf;
        let support = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (T::of(at(i)), T::of(c as f64 / nf)))
            .collect();
        Ok(Self {
            support,
            mean: T::of(mean),
            variance: T::of(variance),
        })
    }

    /// A law with all its mass at zero.
    pub fn exact() -> Self {
        Self {
            support: vec![(T::zero(), T::one())],
            mean: T::zero(),
            variance: T::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.support.iter().all(|&(dx, _)| dx == T::zero())
    }

    pub fn char_fn(&self, omega: T) -> Complex<T> {
        self.support
            .iter()
            .map(|&(dx, p)| {
                let phase = -omega * dx;
                Complex::new(p * phase.cos(), p * phase.sin())
            })
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn sample_char_fn(&self, n: usize) -> Vec<Complex<T>> {
        (0..n).map(|u| self.char_fn(dft_omega(u, n))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn cam(b_left: f64) -> CameraConfig {
        CameraConfig::new(100.0, 0.0, 2.0 * b_left.max(1.0), b_left, 4.0, 100.0).unwrap()
    }

    fn unit_model(k: f64) -> DisparityModel<f64> {
        DisparityModel {
            k,
            c: 0.0,
            baseline: 1.0,
            side: ViewSide::Left,
        }
    }

    #[test]
    fn hand_evaluated_model() {
        let m: DisparityModel<f64> = disparity_model(&cam(5.0), ViewSide::Left);
        assert_relative_eq!(m.k, 500.0 / 255.0 * 0.24, max_relative = 1e-12);
        assert_relative_eq!(m.k, 0.470588, max_relative = 1e-6);
        assert_relative_eq!(m.c, 5.0, max_relative = 1e-12);
        assert_relative_eq!(disparity(&m, 255.0).unwrap(), 125.0, max_relative = 1e-12);
        assert_eq!(disparity(&m, 0.0).unwrap(), m.c);
        assert!(disparity(&m, 256.0).is_err());
        assert!(disparity(&m, -1.0).is_err());
    }

    #[test]
    fn zero_baseline_and_linearity() {
        let c = CameraConfig::new(100.0, 0.0, 8.0, 0.0, 4.0, 100.0).unwrap();
        let m: DisparityModel<f64> = disparity_model(&c, ViewSide::Left);
        assert_eq!((m.k, m.c), (0.0, 0.0));
        let m1: DisparityModel<f64> = disparity_model(&cam(2.0), ViewSide::Left);
        let m2: DisparityModel<f64> = disparity_model(&cam(4.0), ViewSide::Left);
        assert_relative_eq!(m2.k, 2.0 * m1.k, max_relative = 1e-12);
        assert_relative_eq!(m2.c, 2.0 * m1.c, max_relative = 1e-12);
    }

    #[test]
    fn metric_depth_examples() {
        assert_relative_eq!(depth_to_metric(255.0, 4.0, 100.0), 4.0, max_relative = 1e-12);
        assert_relative_eq!(depth_to_metric(0.0, 4.0, 100.0), 100.0, max_relative = 1e-12);
        assert_relative_eq!(
            depth_to_metric(127.5, 4.0, 100.0),
            1.0 / 0.13,
            max_relative = 1e-12
        );
        assert_relative_eq!(depth_to_metric(127.5f32, 4.0, 100.0), 7.6923, max_relative = 1e-4);
    }

    #[test]
    fn metric_depth_roundtrip_and_monotone() {
        let mut prev = f64::INFINITY;
        for d in 0..=255 {
            let z = depth_to_metric(d as f64, 4.0, 100.0);
            assert!(z < prev);
            prev = z;
            let back = metric_to_depth(z, 4.0, 100.0);
            assert!((back.round() - d as f64).abs() <= 0.5);
        }
    }

    fn depth_pair(pairs: &[(u8, u8)]) -> (LumaFrame, LumaFrame) {
        let n = pairs.len();
        let a = LumaFrame::new(n, 1, pairs.iter().map(|p| p.0).collect()).unwrap();
        let b = LumaFrame::new(n, 1, pairs.iter().map(|p| p.1).collect()).unwrap();
        (a, b)
    }

    #[test]
    fn exact_depth_has_no_error() {
        let (a, _) = depth_pair(&[(10, 10), (50, 50), (200, 200)]);
        let s = depth_error_stats(&a, &a, &unit_model(0.3), None).unwrap();
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.histogram[255], 1.0);
        assert!(s.is_error_free());
    }

    #[test]
    fn symmetric_two_point_error() {
        let (a, b) = depth_pair(&[(10, 11), (50, 49), (20, 21), (30, 29)]);
        let s = depth_error_stats(&a, &b, &unit_model(0.3), None).unwrap();
        assert_eq!(s.variance, 1.0);
        assert_abs_diff_eq!(s.disparity_variance, 0.09, epsilon = 1e-15);
        assert_eq!(s.histogram[254], 0.5);
        assert_eq!(s.histogram[256], 0.5);
    }

    #[test]
    fn restricted_stats() {
        let (a, b) = depth_pair(&[(10, 12), (50, 50)]);
        let mask = RegionMask::from_labels(2, 1, vec![Region::Ns, Region::Ls]).unwrap();
        let s = depth_error_stats(&a, &b, &unit_model(1.0), Some((&mask, Region::Ls))).unwrap();
        assert_eq!(s.count, 1);
        assert!(s.is_error_free());
        let s = depth_error_stats(&a, &b, &unit_model(1.0), Some((&mask, Region::Ns))).unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let a = LumaFrame::filled(4, 4, 0).unwrap();
        let b = LumaFrame::filled(4, 5, 0).unwrap();
        assert!(depth_error_stats(&a, &b, &unit_model(1.0), None).is_err());
    }

    #[test]
    fn char_fn_examples() {
        let (a, _) = depth_pair(&[(10, 10); 4]);
        let s = depth_error_stats(&a, &a, &unit_model(1.0), None).unwrap();
        for w in [-3.0, -1.0, 0.0, 0.5, 3.1] {
            let p = disparity_error_char_fn(&s, &unit_model(1.0), w);
            assert_abs_diff_eq!(p.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-15);
        }
        let (a, b) = depth_pair(&[(10, 11), (10, 9)]);
        let s = depth_error_stats(&a, &b, &unit_model(1.0), None).unwrap();
        for w in [-3.0f64, -1.0, 0.0, 0.5, 3.1] {
            let p = disparity_error_char_fn(&s, &unit_model(1.0), w);
            assert_abs_diff_eq!(p.re, w.cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn integer_pel_law_follows_rounded_columns() {
        // k = 0.3, c = 0: levels 10, 11, 12 map to columns 3, 3, 4.
        let m = unit_model(0.3);
        let (a, b) = depth_pair(&[(10, 11), (10, 12), (11, 10), (10, 10)]);
        let law = DisparityErrorLaw::<f64>::integer_pel(&a, &b, &m, None).unwrap();
        assert_eq!(law.support, vec![(0.0, 0.75), (1.0, 0.25)]);
        assert_abs_diff_eq!(law.mean, 0.25);
        assert_abs_diff_eq!(law.variance, 0.1875);
        let (a, _) = depth_pair(&[(10, 10); 3]);
        assert!(DisparityErrorLaw::<f64>::integer_pel(&a, &a, &m, None)
            .unwrap()
            .is_exact());
    }

    #[test]
    fn continuous_law_matches_depth_stats() {
        let m = unit_model(0.5);
        let (a, b) = depth_pair(&[(10, 12), (10, 8), (10, 10), (10, 10)]);
        let s = depth_error_stats(&a, &b, &m, None).unwrap();
        let law = DisparityErrorLaw::from_depth_stats(&s, &m);
        assert_abs_diff_eq!(law.variance, 0.25 * s.variance);
        for w in [-2.0, 0.3, 1.7] {
            let (p, q) = (law.char_fn(w), disparity_error_char_fn(&s, &m, w));
            assert_abs_diff_eq!(p.re, q.re, epsilon = 1e-14);
            assert_abs_diff_eq!(p.im, q.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn dft_grid_is_symmetric() {
        assert_eq!(dft_omega::<f64>(0, 8), 0.0);
        assert_abs_diff_eq!(dft_omega::<f64>(4, 8), -std::f64::consts::PI);
        assert_abs_diff_eq!(dft_omega::<f64>(7, 8), -std::f64::consts::PI / 4.0);
    }

    proptest! {
        #[test]
        fn disparity_difference_is_linear(f in 10.0f64..2000.0, b in 0.1f64..10.0, zn in 0.5f64..50.0, dz in 1.0f64..500.0, d0 in 0u8..=255, d1 in 0u8..=255) {
            let c = CameraConfig::new(f, 0.0, b, b, zn, zn + dz).unwrap();
            let m: DisparityModel<f64> = disparity_model(&c, ViewSide::Left);
            let lhs = disparity(&m, d0 as f64).unwrap() - disparity(&m, d1 as f64).unwrap();
            let rhs = m.k * (d0 as f64 - d1 as f64);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + m.max_disparity()));
        }

        #[test]
        fn char_fn_axioms(errs in proptest::collection::vec(-6i32..=6, 1..80), k in 0.05f64..3.0, w in -std::f64::consts::PI..std::f64::consts::PI) {
            let base: Vec<u8> = errs.iter().map(|_| 100).collect();
            let hat: Vec<u8> = errs.iter().map(|e| (100 + e) as u8).collect();
            let a = LumaFrame::new(base.len(), 1, base).unwrap();
            let b = LumaFrame::new(hat.len(), 1, hat).unwrap();
            let s = depth_error_stats(&a, &b, &unit_model(k), None).unwrap();
            let m = unit_model(k);
            let p0 = disparity_error_char_fn(&s, &m, 0.0);
            prop_assert!((p0.re - 1.0).abs() < 1e-12 && p0.im.abs() < 1e-12);
            let p = disparity_error_char_fn(&s, &m, w);
            prop_assert!(p.norm() <= 1.0 + 1e-12);
            let pm = disparity_error_char_fn(&s, &m, -w);
            prop_assert!((p.re - pm.re).abs() < 1e-12);
            let att = 2.0 * (1.0 - p.re);
            prop_assert!((-1e-12..=4.0 + 1e-12).contains(&att));
        }
    }
}
