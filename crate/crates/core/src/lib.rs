pub mod alphabet;
pub mod cli;
pub mod cellular;
pub mod error;
pub mod imaging;
pub mod inversion;
pub mod modlin;
pub mod subshift;
pub mod universe;

pub use error::{Result, ShiftError};
