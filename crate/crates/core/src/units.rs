//! Conversion between spectroscopic units (cm⁻¹, Å, amu) and the internal
//! atomic-style unit system with ħ = 1.
//!
//! Internally energies are hartree, lengths bohr and masses electron masses.
//! Every public file format speaks spectroscopic units; only the library API
//! works in internal units.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// 1 amu in electron masses.
pub const AMU_IN_ELECTRON_MASSES: f64 = 1822.888486;
/// 1 Å in bohr.
pub const ANGSTROM_IN_BOHR: f64 = 1.8897259886;
/// 1 hartree in cm⁻¹.
pub const HARTREE_IN_CM1: f64 = 219474.6313632;

/// The constants table behind every conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub amu: f64,
    pub angstrom: f64,
    pub hartree_cm1: f64,
}

impl UnitSystem {
    pub const STANDARD: UnitSystem = UnitSystem {
        amu: AMU_IN_ELECTRON_MASSES,
        angstrom: ANGSTROM_IN_BOHR,
        hartree_cm1: HARTREE_IN_CM1,
    };

    fn factor(&self, unit: Unit) -> f64 {
        match unit {
            Unit::EnergyCm1 => 1.0 / self.hartree_cm1,
            Unit::LengthAngstrom => self.angstrom,
            Unit::MassAmu => self.amu,
        }
    }

    pub fn to_internal(&self, value: f64, unit: Unit) -> f64 {
        value * self.factor(unit)
    }

    pub fn from_internal(&self, value: f64, unit: Unit) -> f64 {
        value / self.factor(unit)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::STANDARD
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    EnergyCm1,
    LengthAngstrom,
    MassAmu,
}

impl Unit {
    pub fn tag(self) -> &'static str {
        match self {
            Unit::EnergyCm1 => "energy_cm1",
            Unit::LengthAngstrom => "length_angstrom",
            Unit::MassAmu => "mass_amu",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown unit tag `{0}` (expected energy_cm1, length_angstrom or mass_amu)")]
pub struct UnknownUnit(pub String);

impl FromStr for Unit {
    type Err = UnknownUnit;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "energy_cm1" => Ok(Unit::EnergyCm1),
            "length_angstrom" => Ok(Unit::LengthAngstrom),
            "mass_amu" => Ok(Unit::MassAmu),
            other => Err(UnknownUnit(other.to_string())),
        }
    }
}

pub fn to_internal(value: f64, unit: Unit) -> f64 {
    UnitSystem::STANDARD.to_internal(value, unit)
}

pub fn from_internal(value: f64, unit: Unit) -> f64 {
    UnitSystem::STANDARD.from_internal(value, unit)
}

/// Tag-based conversion, for callers holding unit names as strings.
pub fn to_internal_tagged(value: f64, tag: &str) -> Result<f64, UnknownUnit> {
    Ok(to_internal(value, tag.parse()?))
}

pub fn from_internal_tagged(value: f64, tag: &str) -> Result<f64, UnknownUnit> {
    Ok(from_internal(value, tag.parse()?))
}

pub fn cm1(value: f64) -> f64 {
    to_internal(value, Unit::EnergyCm1)
}

pub fn angstrom(value: f64) -> f64 {
    to_internal(value, Unit::LengthAngstrom)
}

pub fn amu(value: f64) -> f64 {
    to_internal(value, Unit::MassAmu)
}

pub fn to_cm1(value: f64) -> f64 {
    from_internal(value, Unit::EnergyCm1)
}

pub fn to_angstrom(value: f64) -> f64 {
    from_internal(value, Unit::LengthAngstrom)
}
