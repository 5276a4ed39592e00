//! Built-in equation families and systems.

pub mod planar;
pub mod ricker;
pub mod sigmoid;
pub mod threed;

pub use planar::{
    competition_threshold, make_adult_juvenile, make_adult_juvenile_fold, make_competition,
    AdultJuvenileParams, CompetitionParams,
};
pub use ricker::{
    check_lam_condition, make_generalized_ricker, make_sp3, ricker_bound, ricker_fixed_points,
    sp3_spec, FixedPoints, LamCondition, RickerFamilySpec, Sp3Model,
};
pub use sigmoid::{
    make_sigmoid_bh, sigmoid_bh_translated, sigmoid_bh_window, translate_to_origin,
    RationalExponent, SigmoidBHSpec,
};
pub use threed::{make_3d_example, SpatialOrbit, SpatialSystem, ThreeDParams};
