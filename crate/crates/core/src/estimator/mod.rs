//! Estimates over random loops: moment curves, averaged areas, exponent
//! fits, exact enumeration and distribution tests.

pub mod curve;
pub mod enumerate;
pub mod experiments;
pub mod stats;

pub use curve::{exponent_fit, Curve, CurvePoint, ExponentFit};
pub use enumerate::{
    enumerate_loops, ratio_limit_check, shift_invariance_exact, ExactShiftReport, LoopEnumeration,
    RatioSeries, DEFAULT_ENUMERATION_BUDGET,
};
pub use experiments::{
    avg_area_curve, central_moment_curve, moment_curve, sample_index, shift_invariance_sampled,
    AreaEvaluator, AreaFn, SampledCurve, SampledShiftReport, SamplingPlan,
};
pub use stats::{chi_square_p, ks_two_sample, KsResult, Moments};
