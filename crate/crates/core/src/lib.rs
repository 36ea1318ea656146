pub mod btgm;
pub mod dataset;
pub mod dendrogram;
pub mod embed;
pub mod error;
pub mod harness;
pub mod linkage;
pub mod metrics;
pub mod rng;

pub use dataset::{Dataset, LevelLabels, Matrix};
pub use dendrogram::{Dendrogram, Merge};
pub use error::{Error, Result};
pub use rng::SeedStream;
