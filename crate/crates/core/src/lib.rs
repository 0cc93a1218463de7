pub mod error;
pub mod geometry;
pub mod funcspace;
pub mod numerics;
pub mod star;
pub mod wick;
pub mod deform;
pub mod experiments;
pub mod cli;

pub use error::{Error, Result};
