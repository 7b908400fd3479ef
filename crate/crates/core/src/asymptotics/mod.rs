//! K-functionals, interpolation constants, the BBM limit, rescaled-bump
//! sharpness traces and perturbation stability.

mod bbm;
mod kfunctional;
mod sharpness;
mod stability;

pub use bbm::{
    angular_constant, bbm_limit, empirical_ball_constant, BbmEntry, BbmSweep, DEFAULT_COUPLING,
};
pub use kfunctional::{
    ball_average, interpolation_inequality_report, k_functional, InterpolationReport,
    KFunctionalCurve, KPoint, Smoothing,
};
pub use sharpness::{sharpness_trace, SharpnessRow, SharpnessTrace};
pub use stability::{stability_test, StabilityReport, StabilityRow};
