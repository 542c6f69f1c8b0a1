//! Log-skew-normal approximation of sums of independent lognormals.
//!
//! [`lsknfit::fit_lskn`] picks the LSKN whose mean and variance equal those of
//! the sum and whose lower tail on the lognormal probability scale has the
//! sum's limiting slope. The remaining modules supply the distributions,
//! Monte Carlo reference, comparison metrics and a cellular outage model
//! built on the fit.

pub mod dists;
pub mod error;
pub mod lsknfit;
pub mod mcengine;
pub mod outage;
pub mod presets;
pub mod probscale;
pub mod roots;
pub mod slnmodel;
pub mod specfun;

pub use error::{Error, Result};
