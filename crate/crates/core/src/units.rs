//! Physical constants and unit conversions.
//!
//! Everything inside the crate is Gaussian-CGS. SI units only show up at the
//! I/O boundary (config files, CSV headers), and are mapped onto Gaussian
//! base dimensions here. Volts are treated as a scaled statvolt.

use std::fmt;
use std::ops::{Div, Mul};

use crate::error::{Error, Result};

/// Speed of light, cm/s.
pub const C: f64 = 2.997_924_58e10;
/// Reduced Planck constant, erg s.
pub const HBAR: f64 = 1.054_571_817e-27;
/// Volts per statvolt.
pub const VOLTS_PER_STATVOLT: f64 = 299.792_458;
pub const ERG_PER_JOULE: f64 = 1.0e7;
pub const ERG_PER_EV: f64 = 1.602_176_634e-12;

/// Exponents of (gram, centimeter, second), stored in halves so that
/// Gaussian charge `g^1/2 cm^3/2 s^-1` is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dimension {
    half_mass: i32,
    half_length: i32,
    half_time: i32,
}

impl Dimension {
    pub const NONE: Dimension = Dimension::halves(0, 0, 0);
    pub const LENGTH: Dimension = Dimension::halves(0, 2, 0);
    pub const TIME: Dimension = Dimension::halves(0, 0, 2);
    pub const MASS: Dimension = Dimension::halves(2, 0, 0);
    pub const ENERGY: Dimension = Dimension::halves(2, 4, -4);
    pub const FORCE: Dimension = Dimension::halves(2, 2, -4);
    /// statvolt = g^1/2 cm^1/2 s^-1
    pub const POTENTIAL: Dimension = Dimension::halves(1, 1, -2);

    pub const fn halves(half_mass: i32, half_length: i32, half_time: i32) -> Self {
        Dimension {
            half_mass,
            half_length,
            half_time,
        }
    }

    pub const fn whole(mass: i32, length: i32, time: i32) -> Self {
        Dimension::halves(2 * mass, 2 * length, 2 * time)
    }

    pub fn is_dimensionless(&self) -> bool {
        *self == Dimension::NONE
    }

    pub fn powi(self, n: i32) -> Self {
        Dimension::halves(self.half_mass * n, self.half_length * n, self.half_time * n)
    }

    pub fn recip(self) -> Self {
        self.powi(-1)
    }

    /// Square root, defined only when every exponent stays a half-integer.
    pub fn sqrt(self) -> Option<Self> {
        let even = |v: i32| v % 2 == 0;
        (even(self.half_mass) && even(self.half_length) && even(self.half_time))
            .then(|| Dimension::halves(self.half_mass / 2, self.half_length / 2, self.half_time / 2))
    }
}

impl Mul for Dimension {
    type Output = Dimension;
    fn mul(self, rhs: Dimension) -> Dimension {
        Dimension::halves(
            self.half_mass + rhs.half_mass,
            self.half_length + rhs.half_length,
            self.half_time + rhs.half_time,
        )
    }
}

impl Div for Dimension {
    type Output = Dimension;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Dimension) -> Dimension {
        self * rhs.recip()
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("1");
        }
        let mut parts = Vec::new();
        for (sym, half) in [("g", self.half_mass), ("cm", self.half_length), ("s", self.half_time)] {
            match half {
                0 => {}
                h if h % 2 == 0 => parts.push(format!("{sym}^{}", h / 2)),
                h => parts.push(format!("{sym}^{h}/2")),
            }
        }
        f.write_str(&parts.join(" "))
    }
}

/// A Gaussian-CGS value tagged with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dimension,
}

impl Quantity {
    pub const fn new(value: f64, dim: Dimension) -> Self {
        Quantity { value, dim }
    }

    pub const fn scalar(value: f64) -> Self {
        Quantity::new(value, Dimension::NONE)
    }

    pub fn speed_of_light() -> Self {
        Quantity::new(C, Dimension::LENGTH / Dimension::TIME)
    }

    pub fn hbar() -> Self {
        Quantity::new(HBAR, Dimension::ENERGY * Dimension::TIME)
    }

    /// Bare value of a dimensionless quantity.
    pub fn dimensionless(&self) -> Result<f64> {
        if self.dim.is_dimensionless() {
            Ok(self.value)
        } else {
            Err(Error::IncompatibleDimensions {
                from: self.dim.to_string(),
                to: Dimension::NONE.to_string(),
            })
        }
    }

    pub fn checked_add(self, rhs: Quantity) -> Result<Quantity> {
        self.same_dim(&rhs)?;
        Ok(Quantity::new(self.value + rhs.value, self.dim))
    }

    pub fn checked_sub(self, rhs: Quantity) -> Result<Quantity> {
        self.same_dim(&rhs)?;
        Ok(Quantity::new(self.value - rhs.value, self.dim))
    }

    pub fn powi(self, n: i32) -> Quantity {
        Quantity::new(self.value.powi(n), self.dim.powi(n))
    }

    pub fn sqrt(self) -> Result<Quantity> {
        let dim = self.dim.sqrt().ok_or_else(|| Error::IncompatibleDimensions {
            from: self.dim.to_string(),
            to: "square-rootable dimension".into(),
        })?;
        Ok(Quantity::new(self.value.sqrt(), dim))
    }

    fn same_dim(&self, rhs: &Quantity) -> Result<()> {
        if self.dim == rhs.dim {
            Ok(())
        } else {
            Err(Error::IncompatibleDimensions {
                from: self.dim.to_string(),
                to: rhs.dim.to_string(),
            })
        }
    }
}

impl Mul for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.value * rhs.value, self.dim * rhs.dim)
    }
}

impl Div for Quantity {
    type Output = Quantity;
    fn div(self, rhs: Quantity) -> Quantity {
        Quantity::new(self.value / rhs.value, self.dim / rhs.dim)
    }
}

impl Mul<f64> for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: f64) -> Quantity {
        Quantity::new(self.value * rhs, self.dim)
    }
}

/// Size of a unit in Gaussian base units, kept as `mul / div` so that
/// defining constants such as 299.792458 V/statvolt divide exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub mul: f64,
    pub div: f64,
}

impl Scale {
    const fn times(mul: f64) -> Self {
        Scale { mul, div: 1.0 }
    }

    const fn per(div: f64) -> Self {
        Scale { mul: 1.0, div }
    }

    pub fn recip(self) -> Self {
        Scale {
            mul: self.div,
            div: self.mul,
        }
    }

    /// Expresses `value` of this unit in Gaussian base units.
    pub fn to_base(self, value: f64) -> f64 {
        value * self.mul / self.div
    }

    /// Expresses a Gaussian base value in this unit.
    pub fn from_base(self, value: f64) -> f64 {
        value * self.div / self.mul
    }
}

/// Registered unit names.
pub const REGISTRY: &[(&str, Scale, Dimension)] = &[
    ("statvolt", Scale::times(1.0), Dimension::POTENTIAL),
    ("V", Scale::per(VOLTS_PER_STATVOLT), Dimension::POTENTIAL),
    ("mV", Scale::per(VOLTS_PER_STATVOLT * 1.0e3), Dimension::POTENTIAL),
    ("cm", Scale::times(1.0), Dimension::LENGTH),
    ("m", Scale::times(1.0e2), Dimension::LENGTH),
    ("um", Scale::per(1.0e4), Dimension::LENGTH),
    ("nm", Scale::per(1.0e7), Dimension::LENGTH),
    ("s", Scale::times(1.0), Dimension::TIME),
    ("fs", Scale::per(1.0e15), Dimension::TIME),
    ("erg", Scale::times(1.0), Dimension::ENERGY),
    ("J", Scale::times(ERG_PER_JOULE), Dimension::ENERGY),
    ("eV", Scale::times(ERG_PER_EV), Dimension::ENERGY),
];

/// Resolves a unit expression to its scale and dimension.
///
/// Accepts a registered name or its reciprocal written `1/<name>`.
pub fn lookup(unit: &str) -> Result<(Scale, Dimension)> {
    let unit = unit.trim();
    if let Some(inner) = unit.strip_prefix("1/") {
        let (scale, dim) = lookup_name(inner.trim())?;
        return Ok((scale.recip(), dim.recip()));
    }
    lookup_name(unit)
}

fn lookup_name(name: &str) -> Result<(Scale, Dimension)> {
    REGISTRY
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|&(_, scale, dim)| (scale, dim))
        .ok_or_else(|| Error::UnknownUnit(name.to_string()))
}

/// Converts `value` expressed in `from_unit` to `to_unit`.
pub fn convert(value: f64, from_unit: &str, to_unit: &str) -> Result<f64> {
    let (from_scale, from_dim) = lookup(from_unit)?;
    let (to_scale, to_dim) = lookup(to_unit)?;
    if from_dim != to_dim {
        return Err(Error::IncompatibleDimensions {
            from: format!("{from_unit} [{from_dim}]"),
            to: format!("{to_unit} [{to_dim}]"),
        });
    }
    if from_scale == to_scale {
        return Ok(value);
    }
    Ok(to_scale.from_base(from_scale.to_base(value)))
}

/// Value in `unit` converted to a Gaussian quantity.
pub fn quantity(value: f64, unit: &str) -> Result<Quantity> {
    let (scale, dim) = lookup(unit)?;
    Ok(Quantity::new(scale.to_base(value), dim))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statvolt_definition() {
        assert_eq!(convert(299.792458, "V", "statvolt").unwrap(), 1.0);
        assert_eq!(convert(1.0, "statvolt", "V").unwrap(), 299.792458);
    }

    #[test]
    fn metric_prefix() {
        let v = convert(100.0, "nm", "cm").unwrap();
        assert!((v - 1.0e-5).abs() < 1e-20);
    }

    #[test]
    fn forty_millivolts() {
        let v = convert(0.040, "V", "statvolt").unwrap();
        assert!((v - 1.334_256_380_792_608_2e-4).abs() < 1e-18);
    }

    #[test]
    fn errors() {
        assert!(matches!(convert(1.0, "furlong", "cm"), Err(Error::UnknownUnit(_))));
        assert!(matches!(
            convert(1.0, "V", "cm"),
            Err(Error::IncompatibleDimensions { .. })
        ));
    }

    #[test]
    fn reciprocal_units() {
        let v = convert(1.0, "1/nm", "1/cm").unwrap();
        assert!((v - 1.0e7).abs() < 1e-6);
        assert!(convert(1.0, "1/nm", "cm").is_err());
    }

    #[test]
    fn energy_units() {
        assert_eq!(convert(1.0, "J", "erg").unwrap(), 1.0e7);
        assert!((convert(1.0, "eV", "J").unwrap() - 1.602176634e-19).abs() < 1e-33);
    }

    #[test]
    fn round_trip_every_pair() {
        for &(a, _, da) in REGISTRY {
            for &(b, _, db) in REGISTRY {
                if da != db {
                    continue;
                }
                for x in [1.0, -3.7, 1.0e-12, 6.02e23] {
                    let back = convert(convert(x, a, b).unwrap(), b, a).unwrap();
                    assert!(((back - x) / x).abs() <= 4.0 * f64::EPSILON, "{a}->{b}");
                }
            }
        }
    }

    #[test]
    fn dimension_algebra() {
        for &(a, _, da) in REGISTRY {
            for &(b, _, db) in REGISTRY {
                let qa = quantity(2.0, a).unwrap();
                let qb = quantity(3.0, b).unwrap();
                assert_eq!((qa * qb).dim, da * db);
                assert_eq!((qa / qb).dim, da / db);
            }
        }
        let charge = Dimension::POTENTIAL * Dimension::LENGTH;
        assert_eq!(charge.to_string(), "g^1/2 cm^3/2 s^-1");
    }

    #[test]
    fn mismatched_arithmetic_rejected() {
        let l = quantity(1.0, "cm").unwrap();
        let t = quantity(1.0, "s").unwrap();
        assert!(l.checked_add(t).is_err());
        assert!(l.checked_add(l).is_ok());
        assert!(l.dimensionless().is_err());
        assert_eq!((l / l).dimensionless().unwrap(), 1.0);
    }

    #[test]
    fn omega_tilde_is_dimensionless_in_natural_units() {
        // Omega-tilde carries statvolt^2 cm^2 = erg cm, the same as hbar c.
        let v = quantity(0.04, "V").unwrap();
        let ell = quantity(100.0, "nm").unwrap();
        let omega_tilde = v * v * ell * ell;
        assert_eq!(omega_tilde.dim, Dimension::ENERGY * Dimension::LENGTH);
        let ratio = omega_tilde / (Quantity::hbar() * Quantity::speed_of_light());
        assert!(ratio.dimensionless().is_ok());
    }

    #[test]
    fn sqrt_of_half_exponent_rejected() {
        let v = Quantity::new(4.0, Dimension::POTENTIAL);
        assert!(v.sqrt().is_err());
        let v2 = v * v;
        assert_eq!(v2.sqrt().unwrap().dim, Dimension::POTENTIAL);
    }
}
