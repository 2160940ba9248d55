//! Physical constants and the internal unit system.
//!
//! Lengths are in Ångström and energies in Kelvin (energy / k_B). A
//! [`UnitSystem`] may rescale the energy unit by a constant factor; every
//! energy the physics modules produce then scales by exactly that factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// CODATA 2018 values. `BOLTZMANN`, `ELEMENTARY_CHARGE` are exact by definition.
pub mod codata {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J / K.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Elementary charge, C (= J / eV).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Atomic mass constant, kg.
    pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
    /// Bohr radius, Å.
    pub const BOHR_ANGSTROM: f64 = 0.529_177_210_903;
}

/// Atomic masses in unified atomic mass units (AME2016).
pub mod masses {
    pub const RB87: f64 = 86.909_180_527;
}

/// Atomic species whose mass enters `ħ²/m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Species {
    Rb87,
    /// Any other species, specified by mass in atomic mass units.
    Custom { name: String, mass_amu: f64 },
}

impl Species {
    /// Resolves a species name, falling back to an explicit mass.
    pub fn resolve(name: &str, mass_override: Option<f64>) -> Result<Self> {
        let canonical = name.trim().to_ascii_lowercase();
        match (canonical.as_str(), mass_override) {
            (_, Some(m)) => {
                if !(m > 0.0 && m.is_finite()) {
                    return Err(Error::InvalidParameter(format!("mass {m} amu")));
                }
                Ok(Species::Custom { name: name.to_string(), mass_amu: m })
            }
            ("rb87" | "87rb" | "rb-87" | "rubidium-87", None) => Ok(Species::Rb87),
            _ => Err(Error::UnknownSpecies(name.to_string())),
        }
    }

    pub fn mass_amu(&self) -> f64 {
        match self {
            Species::Rb87 => masses::RB87,
            Species::Custom { mass_amu, .. } => *mass_amu,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Species::Rb87 => "Rb87",
            Species::Custom { name, .. } => name,
        }
    }
}

/// Internal unit system: Å for length, K (times `energy_scale`) for energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem<T> {
    /// `ħ²/m` in energy·Å².
    pub hbar2_over_m: T,
    /// Length of one Bohr radius in Å.
    pub bohr: T,
    /// One eV expressed in the internal energy unit.
    pub electron_volt: T,
    /// One Kelvin expressed in the internal energy unit.
    pub kelvin: T,
    pub mass_amu: f64,
}

/// Builds the unit system for `species`.
pub fn make_units<T: Real>(species: &Species) -> UnitSystem<T> {
    let mass = species.mass_amu() * codata::ATOMIC_MASS;
    // J m² -> K Å²
    let hbar2_over_m = codata::HBAR * codata::HBAR / mass / codata::BOLTZMANN * 1e20;
    UnitSystem {
        hbar2_over_m: T::lit(hbar2_over_m),
        bohr: T::lit(codata::BOHR_ANGSTROM),
        electron_volt: T::lit(codata::ELEMENTARY_CHARGE / codata::BOLTZMANN),
        kelvin: T::one(),
        mass_amu: species.mass_amu(),
    }
}

impl<T: Real> UnitSystem<T> {
    /// Same system with the energy unit divided by `factor`, so every energy
    /// value is multiplied by `factor`.
    pub fn with_energy_scale(&self, factor: T) -> Self {
        UnitSystem {
            hbar2_over_m: self.hbar2_over_m * factor,
            electron_volt: self.electron_volt * factor,
            kelvin: self.kelvin * factor,
            ..*self
        }
    }

    pub fn bohr_to_length(&self, a0: T) -> T {
        a0 * self.bohr
    }

    pub fn length_to_bohr(&self, len: T) -> T {
        len / self.bohr
    }

    pub fn ev_to_energy(&self, ev: T) -> T {
        ev * self.electron_volt
    }

    pub fn energy_to_ev(&self, e: T) -> T {
        e / self.electron_volt
    }

    pub fn kelvin_to_energy(&self, k: T) -> T {
        k * self.kelvin
    }

    pub fn energy_to_kelvin(&self, e: T) -> T {
        e / self.kelvin
    }

    /// Converts a C6 coefficient given in eV·Å⁶.
    pub fn c6_from_ev(&self, c6_ev: T) -> T {
        self.ev_to_energy(c6_ev)
    }

    /// van der Waals length `(m C6 / ħ²)^{1/4}`.
    pub fn vdw_length(&self, c6: T) -> T {
        (c6 / self.hbar2_over_m).sqrt().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Independent route: ħc, u c² and k_B in eV units.
    const HBAR_C_EV_ANGSTROM: f64 = 1_973.269_804;
    const AMU_C2_EV: f64 = 931.494_102_42e6;
    const BOLTZMANN_EV: f64 = 8.617_333_262e-5;

    #[test]
    fn rb87_hbar2_over_m_dual_source() {
        let units: UnitSystem<f64> = make_units(&Species::Rb87);
        let mc2 = masses::RB87 * AMU_C2_EV;
        let alt = HBAR_C_EV_ANGSTROM * HBAR_C_EV_ANGSTROM / mc2 / BOLTZMANN_EV;
        assert!((units.hbar2_over_m - alt).abs() / alt < 1e-6, "{} vs {alt}", units.hbar2_over_m);
        assert!(units.hbar2_over_m > 0.0);
    }

    #[test]
    fn bohr_conversion() {
        let units: UnitSystem<f64> = make_units(&Species::Rb87);
        assert!((units.bohr_to_length(100.0) - 52.9177).abs() < 1e-4);
        assert_eq!(units.length_to_bohr(units.bohr_to_length(1.0) / units.bohr), 1.0 / units.bohr);
    }

    #[test]
    fn round_trips() {
        let units: UnitSystem<f64> = make_units(&Species::Rb87);
        for x in [1e-3, 1.0, 15.18, 2803.0, 1e7] {
            let a = units.length_to_bohr(units.bohr_to_length(x));
            assert!((a - x).abs() / x <= 1e-12);
            let e = units.energy_to_ev(units.ev_to_energy(x));
            assert!((e - x).abs() / x <= 1e-12);
        }
    }

    #[test]
    fn species_resolution() {
        assert_eq!(Species::resolve("Rb87", None).unwrap(), Species::Rb87);
        assert!(matches!(Species::resolve("He4", None), Err(Error::UnknownSpecies(_))));
        let he = Species::resolve("He4", Some(4.002_603)).unwrap();
        assert_eq!(he.mass_amu(), 4.002_603);
        assert!(Species::resolve("X", Some(-1.0)).is_err());
    }

    #[test]
    fn energy_rescaling() {
        let base: UnitSystem<f64> = make_units(&Species::Rb87);
        let scaled = base.with_energy_scale(1000.0);
        assert!((scaled.ev_to_energy(1.0) / base.ev_to_energy(1.0) - 1000.0).abs() < 1e-9);
        // vdW length is a length, independent of the energy unit
        let c6 = base.c6_from_ev(2803.0);
        let c6s = scaled.c6_from_ev(2803.0);
        assert!((base.vdw_length(c6) - scaled.vdw_length(c6s)).abs() < 1e-9);
    }
}
