//! Numerical laboratory for rotationally symmetric area-minimizing
//! hypersurfaces in conformally flat, asymptotically flat manifolds.

pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod foliation;
pub mod geometry;
pub mod jet;
pub mod metric;
pub mod output;
pub mod perturbation;
pub mod plateau;
pub mod profile;
pub mod quadrature;
pub mod report;
pub mod suites;

pub use error::{Error, Result};
pub use metric::{AmbientMetric, Family};
pub use report::CheckReport;
