pub mod error;
pub mod linalg;
pub mod sim;

pub use error::{Error, Result};
pub mod density;
pub mod feature_map;
pub mod qmc;
pub mod datasets;
pub mod experiment;
pub mod metrics;
