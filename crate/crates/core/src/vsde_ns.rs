//! Second-order Taylor model of warping distortion in non-stationary regions.

use crate::error::{Result, VsdeError};
use crate::gradient::{GradientMaps, NsCurvature, RegionMask};
use crate::scalar::Scalar;

/// Ratio of the fourth moment to the squared variance for a Laplace law,
/// halved by the `(Δx²/2)²` Taylor coefficient: `6 / 4`.
pub const LAPLACE_CURVATURE_COEFF: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsEstimate<T> {
    /// Mean modeled MSE over NS pixels.
    pub value: T,
    pub ns_count: usize,
    /// Fraction of `value` contributed by the gradient term.
    pub first_order_share: T,
    /// Mean of the gradient term alone.
    pub first_order: T,
    /// Mean of the curvature term alone.
    pub second_order: T,
}

impl<T: Scalar> NsEstimate<T> {
    pub fn empty() -> Self {
        Self {
            value: T::zero(),
            ns_count: 0,
            first_order_share: T::zero(),
            first_order: T::zero(),
            second_order: T::zero(),
        }
    }
}

/// Mean over NS pixels of `Gx² ν² + 1.5 (∂²T/∂x²)² ν⁴`, where `Gx` is the
/// Sobel horizontal response divided by its slope gain and `ν²` the
/// disparity-error variance.
pub fn ns_distortion<T: Scalar>(
    mask: &RegionMask,
    grads: &GradientMaps<T>,
    curvature: &NsCurvature<T>,
    disparity_variance: T,
) -> Result<NsEstimate<T>> {
    if disparity_variance.is_nan() || disparity_variance < T::zero() {
        return Err(VsdeError::invalid(format!(
            "disparity variance {disparity_variance} is negative"
        )));
    }
    if grads.width != mask.width || grads.height != mask.height {
        return Err(VsdeError::invalid(
            "NS distortion: gradient maps do not match mask",
        ));
    }
    if curvature.indices.len() != mask.ns_count {
        return Err(VsdeError::invalid(
            "NS distortion: curvature does not cover the NS pixels",
        ));
    }
    if mask.ns_count == 0 {
        return Ok(NsEstimate::empty());
    }
    let nu2 = disparity_variance;
    let nu4 = nu2 * nu2;
    let coeff = T::of(LAPLACE_CURVATURE_COEFF);
    let (mut s1, mut s2) = (T::zero(), T::zero());
    for (&idx, &c) in curvature.indices.iter().zip(&curvature.values) {
        let g = grads.unit_gx(idx);
        s1 = s1 + g * g * nu2;
        s2 = s2 + coeff * c * c * nu4;
    }
    let n = T::of_usize(mask.ns_count);
    let total = s1 + s2;
    Ok(NsEstimate {
        value: total / n,
        ns_count: mask.ns_count,
        first_order_share: if total > T::zero() { s1 / total } else { T::zero() },
        first_order: s1 / n,
        second_order: s2 / n,
    })
}
