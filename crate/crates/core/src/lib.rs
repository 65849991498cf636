pub mod critics;
pub mod envs;
pub mod error;
pub mod estimators;
pub mod joint;
pub mod numerics;
pub mod oracle;
pub mod presets;
pub mod trainer;

pub use error::{Error, Result};
