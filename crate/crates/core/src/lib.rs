pub mod cli;
pub mod error;
pub mod problems;
pub mod regularization;
pub mod weights;
pub mod wgkb;
pub mod wlsqr;
pub mod wsvd;

pub use error::{Error, Result};
