//! Full render-free estimate for one frame.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{
    depth_error_stats, disparity_model, DepthErrorStats, DisparityErrorLaw, DisparityModel, ShiftModel,
};
use crate::gradient::{classify_view, second_derivative_x, sobel_gradients, JemWeights, Region, RegionMask};
use crate::media_io::{CameraConfig, ViewSide, VsdeReport};
use crate::scalar::Scalar;
use crate::vsde_blend::{
    blended_depth_vsd, detect_depth_edges, disocclusion_from_edges, local_variance_near_edges, match_edges,
    region_proportions, single_view_depth_vsd, texture_vsd, total_vsd, DepthEdge, MatchParams,
    DEFAULT_LOCAL_VARIANCE_RADIUS,
};
use crate::vsde_ls::{
    bdi, bdi_factors_from_parts, ls_base_distortion, ls_distortion, ls_power_spectrum_with, BdiFactors,
    BdiWeights, CompensationParams, SpectrumMode,
};
use crate::vsde_ns::{ns_distortion, NsEstimate};

use super::scene::StereoFrames;

/// Every tunable of the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorParams<T> {
    pub jem: JemWeights<T>,
    pub bdi_weights: BdiWeights<T>,
    pub compensation: CompensationParams<T>,
    pub matching: MatchParams,
    pub spectrum_mode: SpectrumMode,
    pub shift_model: ShiftModel,
    pub local_variance_radius: usize,
}

impl<T: Scalar> Default for EstimatorParams<T> {
    fn default() -> Self {
        Self {
            jem: JemWeights::default(),
            bdi_weights: BdiWeights::default(),
            compensation: CompensationParams::default(),
            matching: MatchParams::default(),
            spectrum_mode: SpectrumMode::default(),
            shift_model: ShiftModel::default(),
            local_variance_radius: DEFAULT_LOCAL_VARIANCE_RADIUS,
        }
    }
}

impl<T: Scalar> EstimatorParams<T> {
    pub fn without_compensation() -> Self {
        Self {
            compensation: CompensationParams::disabled(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bdi_weights.validate()?;
        self.compensation.validate()
    }
}

/// Intermediate quantities of one reference view.
#[derive(Debug, Clone)]
pub struct ViewDiagnostics<T> {
    pub mask: RegionMask,
    pub ls_stats: DepthErrorStats<T>,
    pub ns_stats: DepthErrorStats<T>,
    pub ls_law: DisparityErrorLaw<T>,
    pub ns_law: DisparityErrorLaw<T>,
    /// LS estimate before compensation, per LS pixel.
    pub ls_base: T,
    pub factors: BdiFactors<T>,
    pub xi: T,
    pub e_ls: T,
    pub ns: NsEstimate<T>,
    pub e_dep: T,
    pub edges: Vec<DepthEdge<T>>,
    pub o_disocc: T,
    pub nu2_local: T,
}

#[derive(Debug, Clone)]
pub struct FrameEstimate<T> {
    pub report: VsdeReport<T>,
    pub left: ViewDiagnostics<T>,
    pub right: ViewDiagnostics<T>,
    pub matches: Vec<(usize, usize)>,
    pub proportions_renormalized: bool,
}

fn estimate_view<T: Scalar>(
    original: (&crate::LumaFrame, &crate::LumaFrame),
    coded: (&crate::LumaFrame, &crate::LumaFrame),
    model: &DisparityModel<T>,
    cam: &CameraConfig,
    params: &EstimatorParams<T>,
) -> Result<ViewDiagnostics<T>> {
    let (t, d) = original;
    let (t_hat, d_hat) = coded;
    t.check_same_dims(t_hat, "texture reconstruction")?;
    d.check_same_dims(d_hat, "depth reconstruction")?;
    let (w, h) = (t.width(), t.height());
    let cls = classify_view(t, d, params.jem)?;
    let mask = cls.mask;

    let law = |stats: &DepthErrorStats<T>, region| match params.shift_model {
        ShiftModel::Continuous => Ok(DisparityErrorLaw::from_depth_stats(stats, model)),
        ShiftModel::IntegerPel => DisparityErrorLaw::integer_pel(d, d_hat, model, Some((&mask, region))),
    };
    let ls_stats = depth_error_stats(d, d_hat, model, Some((&mask, Region::Ls)))?;
    let ls_law = law(&ls_stats, Region::Ls)?;
    let ls_base = if mask.ls_count == 0 || ls_law.is_exact() {
        T::zero()
    } else {
        let spectrum = ls_power_spectrum_with::<T>(t_hat, &mask, params.spectrum_mode)?;
        let p = ls_law.sample_char_fn(w);
        // The periodogram spreads LS power over the whole frame; rescale to
        // a per-LS-pixel figure before the pixel-count weighting.
        ls_base_distortion(&spectrum, &p)? * T::of_usize(w * h) / T::of_usize(mask.ls_count)
    };

    let edges = detect_depth_edges(d, model, cam)?;
    let o_disocc = disocclusion_from_edges(&edges, model.side, w, h);
    let factors = bdi_factors_from_parts(w, model, cam, o_disocc, &cls.texture_grads, params.bdi_weights);
    let xi = bdi(&factors);
    let e_ls = ls_distortion(ls_base, xi, &params.compensation);

    let ns_stats = depth_error_stats(d, d_hat, model, Some((&mask, Region::Ns)))?;
    let ns_law = law(&ns_stats, Region::Ns)?;
    let grads_hat = sobel_gradients::<T>(t_hat)?;
    let curvature = second_derivative_x::<T>(t_hat, &mask)?;
    let ns = ns_distortion(&mask, &grads_hat, &curvature, ns_law.variance)?;

    let e_dep = single_view_depth_vsd(e_ls, ns.value, mask.ls_count, mask.ns_count);
    let nu2_local = local_variance_near_edges(t_hat, &edges, params.local_variance_radius);
    Ok(ViewDiagnostics {
        mask,
        ls_stats,
        ns_stats,
        ls_law,
        ns_law,
        ls_base,
        factors,
        xi,
        e_ls,
        ns,
        e_dep,
        edges,
        o_disocc,
        nu2_local,
    })
}

/// Estimates the synthesized-view MSE from original and coded references
/// without rendering.
pub fn estimate_frame<T: Scalar>(
    original: &StereoFrames,
    coded: &StereoFrames,
    cam: &CameraConfig,
    params: &EstimatorParams<T>,
) -> Result<VsdeReport<T>> {
    Ok(estimate_frame_detailed(original, coded, cam, params)?.report)
}

pub fn estimate_frame_detailed<T: Scalar>(
    original: &StereoFrames,
    coded: &StereoFrames,
    cam: &CameraConfig,
    params: &EstimatorParams<T>,
) -> Result<FrameEstimate<T>> {
    cam.validate()?;
    params.validate()?;
    original.tl.check_same_dims(&original.tr, "reference views")?;
    let model_l = disparity_model::<T>(cam, ViewSide::Left);
    let model_r = disparity_model::<T>(cam, ViewSide::Right);
    let (left, right) = rayon::join(
        || {
            estimate_view(
                (&original.tl, &original.dl),
                (&coded.tl, &coded.dl),
                &model_l,
                cam,
                params,
            )
        },
        || {
            estimate_view(
                (&original.tr, &original.dr),
                (&coded.tr, &coded.dr),
                &model_r,
                cam,
                params,
            )
        },
    );
    let (left, right) = (left?, right?);
    let (w, h) = (original.tl.width(), original.tl.height());

    let alpha = T::of(cam.alpha_blend());
    let e_tex = texture_vsd(&original.tl, &coded.tl, &original.tr, &coded.tr, alpha)?;

    let matches = match_edges(&left.edges, &right.edges, &model_l, &model_r, &params.matching);
    let props = region_proportions(
        &left.edges,
        &right.edges,
        &matches,
        w,
        h,
        left.o_disocc,
        right.o_disocc,
    );
    // Mutually disoccluded pixels are inpainted identically from both
    // original and coded references unless depth coding moved them.
    let depth_coded = !(left.ls_stats.is_error_free() && left.ns_stats.is_error_free())
        || !(right.ls_stats.is_error_free() && right.ns_stats.is_error_free());
    let (nu_l, nu_r) = if depth_coded {
        (left.nu2_local, right.nu2_local)
    } else {
        (T::zero(), T::zero())
    };
    let e_dep = blended_depth_vsd(left.e_dep, right.e_dep, &props.proportions, alpha, nu_l, nu_r);
    let report = VsdeReport {
        e_tex,
        e_ls_left: left.e_ls,
        e_ls_right: right.e_ls,
        e_ns_left: left.ns.value,
        e_ns_right: right.ns.value,
        bdi_left: left.xi,
        bdi_right: right.xi,
        proportions: props.proportions,
        nu2_local_left: nu_l,
        nu2_local_right: nu_r,
        e_dep,
        e_total: total_vsd(e_tex, e_dep),
        oracle_mse: None,
    };
    Ok(FrameEstimate {
        report,
        left,
        right,
        matches,
        proportions_renormalized: props.renormalized,
    })
}
