pub mod error;
pub mod force;
pub mod model;
pub mod numerics;
pub mod paramp;
pub mod params;
pub mod quad;
pub mod runner;
pub mod scattering;
pub mod sideband;
pub mod spectral;

pub use error::{Error, Result};
pub use params::{Model, SystemParams};
