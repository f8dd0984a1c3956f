pub mod bench;
pub mod data;
pub mod ensembles;
pub mod error;
pub mod ingest;
pub mod learners;
pub mod methods;
pub mod metrics;
pub mod perturb;
pub mod rng;
pub mod samplers;
pub mod synthetic;
pub mod tune;
pub mod util;

pub use error::{Error, Result};
