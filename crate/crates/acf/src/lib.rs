//! Numerical ACF functionals on Carnot groups with a closed-form fundamental
//! solution (Euclidean space and the Heisenberg groups), plus the file
//! formats and command line of the toolkit.
//!
//! All estimators are seeded and reproducible: results depend on the seed
//! and sample count but not on the number of worker threads.

pub mod acf;
pub mod cli;
pub mod error;
pub mod eval;
pub mod fit;
pub mod formats;
pub mod gauge;
pub mod integrate;
pub mod probe;
pub mod sampling;

pub use error::{AcfError, Result};
pub use gauge::{gauge_for, GaugeKind, GaugeSpec};
pub use integrate::SampleConfig;
pub use sampling::Estimate;
