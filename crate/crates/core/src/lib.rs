pub mod cascade;
pub mod cli;
pub mod cycles;
pub mod error;
pub mod filterlib;
pub mod lpoly;
pub mod peripheral;
pub mod transfer;

pub use error::{Error, Result};
