//! Length and copper-thickness units.
//!
//! Everything inside the library works in millimetres (geometry), micrometres
//! (copper thickness), amperes, volts and degrees Celsius. Board documents and
//! CLI flags may speak mils or ounces of copper; this module owns those
//! conversions so the factors live in exactly one place.
//!
//! Copper weight is a thickness in disguise: one ounce of copper per square
//! foot rolls out to 1.378 mil. All conversions go through a single linear
//! factor per unit, so chained conversions compose exactly and round-trips are
//! lossless to floating-point precision.

use std::fmt;
use std::str::FromStr;

/// Millimetres per mil (1 mil = 1/1000 inch).
pub const MM_PER_MIL: f64 = 0.0254;

/// Copper foil thickness in mils for one ounce per square foot.
pub const MIL_PER_OZ: f64 = 1.378;

/// Resistivity of annealed copper at 20 °C, in ohm-metres.
pub const COPPER_RESISTIVITY_OHM_M: f64 = 1.724e-8;

/// A length (or copper-thickness) unit accepted at the API boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    /// Millimetre, the canonical internal unit.
    Mm,
    /// Micrometre; copper thicknesses are usually quoted in these.
    Um,
    /// Mil, 1/1000 inch.
    Mil,
    /// Ounce of copper per square foot, expressed as the equivalent foil
    /// thickness (1 oz = 1.378 mil).
    Oz,
}

impl Unit {
    /// Conversion factor from this unit to millimetres.
    fn to_mm(self) -> f64 {
        match self {
            Unit::Mm => 1.0,
            Unit::Um => 1e-3,
            Unit::Mil => MM_PER_MIL,
            Unit::Oz => MIL_PER_OZ * MM_PER_MIL,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Unit::Mm => "mm",
            Unit::Um => "um",
            Unit::Mil => "mil",
            Unit::Oz => "oz",
        };
        f.write_str(name)
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mm" => Ok(Unit::Mm),
            "um" | "µm" | "micron" => Ok(Unit::Um),
            "mil" | "mils" => Ok(Unit::Mil),
            "oz" => Ok(Unit::Oz),
            other => Err(UnitError::UnknownUnit(other.to_string())),
        }
    }
}

/// Errors from unit parsing or conversion.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("unknown unit `{0}` (expected mm, um, mil, or oz)")]
    UnknownUnit(String),
    #[error("cannot convert non-finite value {0}")]
    NonFinite(f64),
}

/// Convert `value` from one unit to another.
///
/// All conversions route through millimetres with one multiplicative factor
/// per unit, so `convert_length(convert_length(x, a, b)?, b, c)` equals
/// `convert_length(x, a, c)` up to floating-point rounding.
///
/// ```
/// use pib::units::{convert_length, Unit};
/// let mm = convert_length(1000.0, Unit::Mil, Unit::Mm).unwrap();
/// assert_eq!(mm, 25.4);
/// ```
pub fn convert_length(value: f64, from: Unit, to: Unit) -> Result<f64, UnitError> {
    if !value.is_finite() {
        return Err(UnitError::NonFinite(value));
    }
    Ok(value * from.to_mm() / to.to_mm())
}

/// Copper weight in ounces to foil thickness in micrometres.
pub fn oz_to_um(oz: f64) -> f64 {
    oz * MIL_PER_OZ * MM_PER_MIL * 1e3
}

/// Copper weight in ounces to foil thickness in mils.
pub fn oz_to_mil(oz: f64) -> f64 {
    oz * MIL_PER_OZ
}

/// Millimetres to mils.
pub fn mm_to_mil(mm: f64) -> f64 {
    mm / MM_PER_MIL
}

/// Mils to millimetres.
pub fn mil_to_mm(mil: f64) -> f64 {
    mil * MM_PER_MIL
}
