//! Unit handling.
//!
//! Everything inside the engine is expressed in the system where
//! `ħ²/2m* = 1`: lengths in nm, wave numbers in nm⁻¹ and energies in nm⁻².
//! Electron-volts only appear at the I/O boundary.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default conversion for an effective mass of `0.1 mₑ`.
pub const DEFAULT_EV_TO_INV_NM2: f64 = 2.62464;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSystem {
    /// nm⁻² per eV.
    pub ev_to_inv_nm2: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            ev_to_inv_nm2: DEFAULT_EV_TO_INV_NM2,
        }
    }
}

impl UnitSystem {
    pub fn new(ev_to_inv_nm2: f64) -> Result<Self> {
        let units = Self { ev_to_inv_nm2 };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ev_to_inv_nm2.is_finite() && self.ev_to_inv_nm2 > 0.0) {
            return Err(invalid(
                "units.ev_to_inv_nm2",
                format!("must be finite and > 0, got {}", self.ev_to_inv_nm2),
            ));
        }
        Ok(())
    }

    /// eV → nm⁻².
    pub fn to_internal(&self, e_ev: f64) -> Energy {
        Energy(e_ev * self.ev_to_inv_nm2)
    }

    /// nm⁻² → eV.
    pub fn to_ev(&self, energy: Energy) -> f64 {
        energy.0 / self.ev_to_inv_nm2
    }
}

/// Energy in nm⁻². Positive for scattering, `-κ²` for bound states.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Energy(pub f64);

impl Energy {
    pub fn new(inv_nm2: f64) -> Self {
        Self(inv_nm2)
    }

    /// The energy `-κ²` of a bound level with decay rate `κ`.
    pub fn bound(kappa: f64) -> Self {
        Self(-kappa * kappa)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `k = √E` above zero, `κ = √(-E)` below.
    pub fn wave_number(self) -> WaveNumber {
        if self.0 >= 0.0 {
            WaveNumber::Propagating(self.0.sqrt())
        } else {
            WaveNumber::Decaying((-self.0).sqrt())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveNumber {
    /// `k` of a scattering state, nm⁻¹.
    Propagating(f64),
    /// `κ` of a bound state, nm⁻¹.
    Decaying(f64),
}

impl WaveNumber {
    pub fn magnitude(self) -> f64 {
        match self {
            WaveNumber::Propagating(k) | WaveNumber::Decaying(k) => k,
        }
    }
}
