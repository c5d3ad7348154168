//! Query complexity of Boolean functions under quantum supermaps.

pub mod boolean;
pub mod certify;
pub mod error;
pub mod linalg;
pub mod polymethod;
pub mod process;
pub mod sdp;
pub mod spaces;

pub use error::{Error, Result};
