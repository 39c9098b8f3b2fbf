pub mod belldiag;
pub mod chain;
pub mod error;
pub mod lossmodel;
pub mod oracle;
pub mod purify;
pub mod schedule;
pub mod sweep;
pub mod timing;

pub use error::{Error, Result};
