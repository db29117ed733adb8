pub mod commands;
pub mod error;
pub mod hexfloat;
pub mod model_file;
pub mod table;

pub use error::{CliError, Result, EXIT_INPUT, EXIT_NUMERICAL};
pub use model_file::{load_model, save_model, ModelFile};
