//! Banner relighting: shade alignment, differential probing of a
//! relighting backbone, light-gradient mixing, soft shadows and
//! compositing, plus region metrics.

pub mod backbone;
pub mod error;
pub mod imgcore;
pub mod metrics;
pub mod probe;
pub mod relight;
pub mod shading;

pub use error::{Error, Result};
