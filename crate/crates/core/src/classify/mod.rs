//! Linear softmax classifier and the 1-nearest-neighbour baseline.

mod knn;
mod linear;
mod trainset;

pub use knn::{knn_predict, knn_predict_parallel};
pub use linear::{train_linear, ClassifierConfig, LinearClassifier, Standardizer, LINEAR_MAGIC};
pub use trainset::{Provenance, TrainSetForClassifier};
