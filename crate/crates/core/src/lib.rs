#![forbid(unsafe_code)]

pub mod channels;
pub mod chanthermo;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod sdp;
pub mod statediv;

pub use error::{Error, Result};
