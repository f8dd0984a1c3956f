//! Ensemble and cost-sensitive learners built on the weighted tree and the
//! samplers.

mod bagging;
mod boost;
mod cost;
mod model;
mod spe;

pub use bagging::{fit_balanced_bagging, fit_easy_ensemble, BaggingKind, BaggingParams, EasyParams};
pub use boost::{
    adacost_beta_minus, adacost_beta_plus, fit_boost, fit_cost_boost, fit_resample_boost, samme_alpha,
    staged_training_error, Algorithm, BoostFit, BoostParams, CostBoostKind, ResampleBoostKind, RoundTrace,
};
pub use cost::{fit_cost_sensitive_tree, CostVector};
pub use model::{Combiner, Ensemble, Estimator, Member, TrainedModel, FORMAT_VERSION, MAGIC};
pub use spe::{
    cascade_pool_target, fit_balance_cascade, fit_self_paced_ensemble, hardness_bins, self_paced_alpha,
    CascadeParams, SpeParams,
};
