//! Dataset representation, class statistics, preprocessing and stratified
//! splitting.

pub mod dataset;
pub mod matrix;
pub mod preprocess;
pub mod split;

pub use dataset::{class_distribution, ClassDistribution, Dataset, FeatureKind};
pub use matrix::Matrix;
pub use preprocess::{PreprocessModel, Schema};
pub use split::{stratified_kfold, FoldPlan};
