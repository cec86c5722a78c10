//! Composition operators `C_J: L^p(M₁) → L^q(M₂)` and the tools used to
//! analyse them: norm estimation, bounded changes of weights, recovery of
//! module maps, and the characteristic-function classifier.

mod classify;
mod module;
mod norm;
mod superop;
mod weights;

pub use classify::{classify_characteristic_preserving, classify_with, Classification, ClassifyOptions, Verdict};
pub use module::{recover_left_multiplier, recover_right_multiplier, trace_functional_density, Multiplier};
pub use norm::{ball_maximizer, hs_operator_norm, operator_norm, operator_norm_with, NormEstimate, NormOptions};
pub use superop::{build_composition, SuperOperator};
pub use weights::{
    change_of_weights, change_of_weights_scale, contraction_inclusion, exponent_ratio, splitting_inequality_check,
    ChangeOfWeights, ContractionInclusion, ScaleEntry, ScaleReport, SplittingReport,
};
