pub mod dbar;
pub mod dunau;
pub mod error;
pub mod measures;
pub mod quadrature;
pub mod rng;
pub mod simulate;
pub mod spec_file;
pub mod spectrum;
pub mod transforms;
pub mod tree;

pub use error::{Error, Result};
