//! Base learners shared by every method: weighted CART, exact kNN, k-means
//! and a linear SVM.

pub mod kmeans;
pub mod knn;
pub mod svm;
pub mod tree;

pub use kmeans::{fit_kmeans, KMeans};
pub use knn::KnnIndex;
pub use svm::{fit_linear_svm, LinearSvm};
pub use tree::{argmax, fit_tree, DecisionTree, TreeParams};
