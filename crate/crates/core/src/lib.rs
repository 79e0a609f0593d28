//! Band structure and impurity spectra of a chain of rings threaded by a
//! magnetic flux, with delta couplings at the touching vertices.

pub mod asymptotics;
pub mod band;
pub mod dispersion;
pub mod error;
pub mod exec;
pub mod fit;
pub mod impurity;
pub mod params;
pub mod roots;
pub mod transfer;

pub use error::{Error, Result};
pub use exec::Exec;
pub use params::{ChainParams, EnergyPoint, FluxRegime, PerturbationPattern};
