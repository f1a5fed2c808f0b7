//! Unit-annotated scalars for config files, e.g. `"58.5 us"` or `"0.8 mK"`.
//!
//! Every quantity is stored in SI. Bare numbers are rejected.

use std::f64::consts::PI;
use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use tweezer_sta::model::BOLTZMANN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
    Speed,
    Temperature,
    /// Energy, also accepted in temperature units through k_B.
    Energy,
    /// Cyclic frequency in, angular frequency out.
    Frequency,
    Angle,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[("m", 1.0), ("mm", 1e-3), ("um", 1e-6), ("μm", 1e-6), ("nm", 1e-9)],
            Dimension::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("μs", 1e-6), ("ns", 1e-9)],
            Dimension::Speed => &[("m/s", 1.0), ("mm/s", 1e-3), ("um/us", 1.0), ("μm/μs", 1.0)],
            Dimension::Temperature => &[("K", 1.0), ("mK", 1e-3), ("uK", 1e-6), ("μK", 1e-6), ("nK", 1e-9)],
            Dimension::Energy => &[
                ("J", 1.0),
                ("K", BOLTZMANN),
                ("mK", 1e-3 * BOLTZMANN),
                ("uK", 1e-6 * BOLTZMANN),
                ("μK", 1e-6 * BOLTZMANN),
            ],
            Dimension::Frequency => &[
                ("rad/s", 1.0),
                ("Hz", 2.0 * PI),
                ("kHz", 2e3 * PI),
                ("MHz", 2e6 * PI),
            ],
            Dimension::Angle => &[("rad", 1.0), ("deg", PI / 180.0), ("°", PI / 180.0)],
        }
    }

    /// Unit used when writing a value back out.
    pub fn si(self) -> &'static str {
        self.units()[0].0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::Time => "time",
            Dimension::Speed => "speed",
            Dimension::Temperature => "temperature",
            Dimension::Energy => "energy",
            Dimension::Frequency => "frequency",
            Dimension::Angle => "angle",
        };
        f.write_str(name)
    }
}

/// Parses `"<number> <unit>"`; whitespace between the two is optional.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || matches!(c, '.' | '+' | '-') || (matches!(c, 'e' | 'E') && i > 0)))
        .map_or(text.len(), |(i, _)| i);
    let (number, unit) = text.split_at(split);
    let unit = unit.trim();
    if unit.is_empty() {
        return Err(format!("`{text}` has no unit; expected a {dim} such as `1.5 {}`", dim.si()));
    }
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("`{text}`: cannot read `{}` as a number", number.trim()))?;
    let scale = dim
        .units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let known: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
            format!("`{unit}` is not a {dim} unit (known: {})", known.join(", "))
        })?;
    let si = value * scale;
    if !si.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(si)
}

macro_rules! quantity {
    ($(#[$doc:meta])* $name:ident, $dim:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl $name {
            pub const DIMENSION: Dimension = $dim;

            pub fn si(self) -> f64 {
                self.0
            }

            pub fn parse(text: &str) -> Result<Self, String> {
                parse_quantity(text, $dim).map($name)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl de::Visitor<'_> for V {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        write!(f, "a {} with unit, e.g. \"1 {}\"", $dim, $dim.si())
                    }
                    fn visit_str<E: de::Error>(self, s: &str) -> Result<$name, E> {
                        $name::parse(s).map_err(E::custom)
                    }
                }
                d.deserialize_str(V)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(&format_args!("{:e} {}", self.0, $dim.si()))
            }
        }
    };
}

quantity!(Length, Dimension::Length);
quantity!(Time, Dimension::Time);
quantity!(Speed, Dimension::Speed);
quantity!(Temperature, Dimension::Temperature);
quantity!(
    /// Stored in joules.
    Energy,
    Dimension::Energy
);
quantity!(
    /// Stored as angular frequency in rad/s.
    Frequency,
    Dimension::Frequency
);
quantity!(Angle, Dimension::Angle);
