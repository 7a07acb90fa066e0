//! Numerical toolkit for free probability.
//!
//! The crate covers four areas: distribution families with power /
//! symmetrization / scale-mixture pushforwards (`measures`), Cauchy
//! transforms with analytic continuation across the support and into the
//! lower half-plane (`cauchy`), contour tracing with winding-number
//! certificates and domain scans (`contour`), and moment / free-cumulant
//! sequences with Hankel sign diagnostics (`cumulants`).

pub mod cauchy;
pub mod contour;
pub mod cumulants;
pub mod dd;
pub mod error;
pub mod gamma;
pub mod measures;
pub mod quad;

pub use error::{Error, Result};
pub use measures::{DistributionSpec, Kind, SupportInfo, Transform};

pub use num_complex::Complex64;
