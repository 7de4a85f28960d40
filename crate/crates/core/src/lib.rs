//! Transfer-matrix engine for one-dimensional layered heterostructures with
//! a squeezed prewell.
//!
//! Energies are carried in nm⁻² with `ħ²/2m* = 1`; see [`units`].

pub mod bilayer;
pub mod bound_states;
pub mod checks;
pub mod error;
pub mod oracle;
pub mod potential;
pub mod scattering;
pub mod transfer;
pub mod units;

pub use error::{Error, Result};
pub use potential::{
    BilayerSpec, Ordering, PotentialProfile, Segment, SqueezeExponent, SqueezeSpec,
};
pub use transfer::TransferMatrix;
pub use units::{Energy, UnitSystem};
