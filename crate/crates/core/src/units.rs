//! Physical quantities with mandatory unit suffixes.
//!
//! Config files spell every physical value with its unit (`20MHz`, `4.7uH`,
//! `8pF`, `2kOhm`). A bare number is rejected so that a missing prefix can
//! never silently shift a value by six orders of magnitude.

use std::fmt;

use serde::{Deserialize, Deserializer};
use thiserror::Error;

/// The physical dimension carried by a [`Quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Frequency,
    Inductance,
    Capacitance,
    Resistance,
    Voltage,
    Time,
    Length,
    Decibel,
    VoltsPerDecibel,
}

impl Dimension {
    pub fn symbol(self) -> &'static str {
        match self {
            Dimension::Frequency => "Hz",
            Dimension::Inductance => "H",
            Dimension::Capacitance => "F",
            Dimension::Resistance => "Ohm",
            Dimension::Voltage => "V",
            Dimension::Time => "s",
            Dimension::Length => "m",
            Dimension::Decibel => "dB",
            Dimension::VoltsPerDecibel => "V/dB",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("`{0}` has no unit suffix; physical values must be written like `20MHz`, `4.7uH` or `8pF`")]
    Unitless(String),
    #[error("`{0}` is not a number with a unit")]
    Malformed(String),
    #[error("unknown unit in `{0}`")]
    UnknownUnit(String),
    #[error("`{input}` is a {found} value, expected {expected}")]
    WrongDimension {
        input: String,
        expected: Dimension,
        found: Dimension,
    },
}

/// A value in SI base units together with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub dim: Dimension,
}

// Longest symbols first so that `V/dB` wins over `dB`, and `Ohm` over `m`.
const UNITS: &[(&str, Dimension)] = &[
    ("V/dB", Dimension::VoltsPerDecibel),
    ("Ohm", Dimension::Resistance),
    ("ohm", Dimension::Resistance),
    ("Ω", Dimension::Resistance),
    ("Hz", Dimension::Frequency),
    ("dB", Dimension::Decibel),
    ("H", Dimension::Inductance),
    ("F", Dimension::Capacitance),
    ("V", Dimension::Voltage),
    ("s", Dimension::Time),
    ("m", Dimension::Length),
];

fn prefix_scale(prefix: &str) -> Option<f64> {
    Some(match prefix {
        "" => 1.0,
        "f" => 1e-15,
        "p" => 1e-12,
        "n" => 1e-9,
        "u" | "µ" | "μ" => 1e-6,
        "c" => 1e-2,
        "m" => 1e-3,
        "k" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        _ => return None,
    })
}

/// Splits `s` into its leading floating-point literal and the remainder.
fn split_number(s: &str) -> Option<(f64, &str)> {
    let bytes = s.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let digits_start = i;
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    if i == digits_start {
        return None;
    }
    // Exponent, but only when followed by digits (so `2e` is not eaten).
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_digits = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_digits {
            i = j;
        }
    }
    let value: f64 = s[..i].parse().ok()?;
    Some((value, &s[i..]))
}

/// Parses a quantity such as `4.7uH`, `20 MHz`, `-3dB` or `2.0kOhm`.
pub fn parse_quantity(input: &str) -> Result<Quantity, UnitError> {
    let s = input.trim();
    let (number, rest) = split_number(s).ok_or_else(|| UnitError::Malformed(input.to_string()))?;
    let rest = rest.trim_start();
    if rest.is_empty() {
        return Err(UnitError::Unitless(input.to_string()));
    }
    for (symbol, dim) in UNITS {
        if let Some(prefix) = rest.strip_suffix(symbol) {
            if *dim == Dimension::Decibel && !prefix.is_empty() {
                continue;
            }
            if let Some(scale) = prefix_scale(prefix) {
                let value = number * scale;
                if !value.is_finite() {
                    return Err(UnitError::Malformed(input.to_string()));
                }
                return Ok(Quantity { value, dim: *dim });
            }
        }
    }
    Err(UnitError::UnknownUnit(input.to_string()))
}

/// Parses a quantity and checks that it carries the expected dimension.
pub fn parse_as(input: &str, expected: Dimension) -> Result<f64, UnitError> {
    let q = parse_quantity(input)?;
    if q.dim != expected {
        return Err(UnitError::WrongDimension {
            input: input.to_string(),
            expected,
            found: q.dim,
        });
    }
    Ok(q.value)
}

/// Formats a value with an engineering prefix, e.g. `1.33e-6, H` → `1.33uH`.
pub fn format_si(value: f64, unit: &str) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{value}{unit}");
    }
    const PREFIXES: &[(f64, &str)] = &[
        (1e9, "G"),
        (1e6, "M"),
        (1e3, "k"),
        (1.0, ""),
        (1e-3, "m"),
        (1e-6, "u"),
        (1e-9, "n"),
        (1e-12, "p"),
        (1e-15, "f"),
    ];
    let magnitude = value.abs();
    let (scale, prefix) = PREFIXES
        .iter()
        .copied()
        .find(|(scale, _)| magnitude >= *scale * 0.999_999_5)
        .unwrap_or((1e-15, "f"));
    let scaled = value / scale;
    let text = format!("{scaled:.4}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    format!("{text}{prefix}{unit}")
}

macro_rules! quantity_newtype {
    ($(#[$meta:meta])* $name:ident, $dim:expr) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let text = String::deserialize(deserializer)?;
                parse_as(&text, $dim).map($name).map_err(serde::de::Error::custom)
            }
        }
    };
}

quantity_newtype!(
    /// Frequency in hertz, deserialized from strings like `"20MHz"`.
    Hertz,
    Dimension::Frequency
);
quantity_newtype!(
    /// Inductance in henries.
    Henries,
    Dimension::Inductance
);
quantity_newtype!(
    /// Capacitance in farads.
    Farads,
    Dimension::Capacitance
);
quantity_newtype!(
    /// Resistance in ohms.
    Ohms,
    Dimension::Resistance
);
quantity_newtype!(
    /// Voltage in volts.
    Volts,
    Dimension::Voltage
);
quantity_newtype!(
    /// Time in seconds.
    Seconds,
    Dimension::Time
);
quantity_newtype!(
    /// Length in metres.
    Metres,
    Dimension::Length
);
quantity_newtype!(
    /// A level or ratio in decibels.
    Decibels,
    Dimension::Decibel
);
quantity_newtype!(
    /// Detector slope in volts per decibel.
    VoltsPerDb,
    Dimension::VoltsPerDecibel
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_prefixed_values() {
        let cases = [
            ("20MHz", 20e6, Dimension::Frequency),
            ("4.7uH", 4.7e-6, Dimension::Inductance),
            ("8pF", 8e-12, Dimension::Capacitance),
            ("2.0kOhm", 2000.0, Dimension::Resistance),
            ("10 Ohm", 10.0, Dimension::Resistance),
            ("44mV/dB", 0.044, Dimension::VoltsPerDecibel),
            ("6dB", 6.0, Dimension::Decibel),
            ("0.4m", 0.4, Dimension::Length),
            ("10ns", 10e-9, Dimension::Time),
            ("1e-3V", 1e-3, Dimension::Voltage),
            ("47µH", 47e-6, Dimension::Inductance),
        ];
        for (text, value, dim) in cases {
            let q = parse_quantity(text).unwrap();
            assert!((q.value - value).abs() <= 1e-12 * value.abs(), "{text}");
            assert_eq!(q.dim, dim, "{text}");
        }
    }

    #[test]
    fn rejects_unitless_numbers() {
        assert!(matches!(parse_quantity("4.7"), Err(UnitError::Unitless(_))));
        assert!(matches!(parse_quantity(" 12 "), Err(UnitError::Unitless(_))));
    }

    #[test]
    fn rejects_wrong_dimension_and_garbage() {
        assert!(matches!(
            parse_as("8pF", Dimension::Inductance),
            Err(UnitError::WrongDimension { .. })
        ));
        assert!(matches!(parse_quantity("uH"), Err(UnitError::Malformed(_))));
        assert!(matches!(parse_quantity("3furlongs"), Err(UnitError::UnknownUnit(_))));
        assert!(matches!(parse_quantity("3kdB"), Err(UnitError::UnknownUnit(_))));
    }

    #[test]
    fn formats_engineering_notation() {
        assert_eq!(format_si(1.33e-6, "H"), "1.33uH");
        assert_eq!(format_si(53.6e-12, "F"), "53.6pF");
        assert_eq!(format_si(20e6, "Hz"), "20MHz");
    }
}
