pub mod error;
pub mod analysis;
pub mod asymptotics;
pub mod cli;
pub mod energy;
pub mod ext;
pub mod geometry;
pub mod polarization;
pub mod riesz;

pub use error::{Error, Result};
pub use ext::ExtReal;
