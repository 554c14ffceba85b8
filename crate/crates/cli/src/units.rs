//! Unit-tagged scalar quantities for the configuration file.
//!
//! A quantity is written as `"<number> <unit>"`; a bare number is rejected.
//! The original spelling is kept so serialization reproduces the input.

use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub trait Dimension {
    const NAME: &'static str;
    const EXAMPLE: &'static str;
    /// Conversion from `unit` to SI, or `None` if the unit is not accepted.
    fn scale(unit: &str) -> Option<Scale>;
    fn units() -> &'static [&'static str];
}

/// Conversion to SI as `value * mul / div`; sub-units divide by an exact
/// power of ten so that e.g. "10 us" is the correctly rounded 1e-5.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    mul: f64,
    div: f64,
}

impl Scale {
    const fn times(mul: f64) -> Self {
        Self { mul, div: 1.0 }
    }

    const fn per(div: f64) -> Self {
        Self { mul: 1.0, div }
    }

    fn apply(self, value: f64) -> f64 {
        value * self.mul / self.div
    }
}

macro_rules! dimension {
    ($ty:ident, $name:literal, $example:literal, [$(($unit:literal, $scale:expr)),+ $(,)?]) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $ty;
        impl Dimension for $ty {
            const NAME: &'static str = $name;
            const EXAMPLE: &'static str = $example;
            fn scale(unit: &str) -> Option<Scale> {
                match unit {
                    $($unit => Some($scale),)+
                    _ => None,
                }
            }
            fn units() -> &'static [&'static str] {
                &[$($unit),+]
            }
        }
    };
}

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const SI: Scale = Scale::times(1.0);

dimension!(
    Length,
    "length",
    "1 cm",
    [
        ("m", SI),
        ("cm", Scale::per(1e2)),
        ("mm", Scale::per(1e3)),
        ("um", Scale::per(1e6)),
        ("µm", Scale::per(1e6)),
        ("nm", Scale::per(1e9))
    ]
);
dimension!(
    Time,
    "time",
    "28 ms",
    [
        ("s", SI),
        ("ms", Scale::per(1e3)),
        ("us", Scale::per(1e6)),
        ("µs", Scale::per(1e6)),
        ("ns", Scale::per(1e9))
    ]
);
dimension!(
    Velocity,
    "velocity",
    "10 mm/s",
    [
        ("m/s", SI),
        ("cm/s", Scale::per(1e2)),
        ("mm/s", Scale::per(1e3))
    ]
);
dimension!(
    Gradient,
    "field gradient",
    "25 G/cm",
    [
        ("T/m", SI),
        ("G/cm", Scale::per(1e2)),
        ("mT/m", Scale::per(1e3))
    ]
);
dimension!(
    Field,
    "magnetic field",
    "0.5 G",
    [
        ("T", SI),
        ("mT", Scale::per(1e3)),
        ("G", Scale::per(1e4)),
        ("mG", Scale::per(1e7))
    ]
);
dimension!(
    Current,
    "current",
    "5 A",
    [("A", SI), ("mA", Scale::per(1e3))]
);
dimension!(
    AngularFrequency,
    "frequency",
    "6834.682 MHz",
    [
        ("rad/s", SI),
        ("Hz", Scale::times(TWO_PI)),
        ("kHz", Scale::times(TWO_PI * 1e3)),
        ("MHz", Scale::times(TWO_PI * 1e6)),
        ("GHz", Scale::times(TWO_PI * 1e9)),
    ]
);

pub struct Quantity<D> {
    value: f64,
    unit: String,
    si: f64,
    _dim: PhantomData<D>,
}

impl<D: Dimension> Quantity<D> {
    /// Value in SI units.
    pub fn si(&self) -> f64 {
        self.si
    }
}

impl<D> Clone for Quantity<D> {
    fn clone(&self) -> Self {
        Self {
            value: self.value,
            unit: self.unit.clone(),
            si: self.si,
            _dim: PhantomData,
        }
    }
}

impl<D> PartialEq for Quantity<D> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.unit == other.unit
    }
}

impl<D> fmt::Debug for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl<D> fmt::Display for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl<D: Dimension> FromStr for Quantity<D> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let split = s.find(|c: char| c.is_whitespace()).ok_or_else(|| {
            format!(
                "{} `{s}` has no unit tag; write e.g. \"{}\"",
                D::NAME,
                D::EXAMPLE
            )
        })?;
        let (number, unit) = (&s[..split], s[split..].trim());
        let value: f64 = number
            .parse()
            .map_err(|_| format!("cannot read `{number}` as a number in {} `{s}`", D::NAME))?;
        if !value.is_finite() {
            return Err(format!("{} `{s}` is not finite", D::NAME));
        }
        let scale = D::scale(unit).ok_or_else(|| {
            format!(
                "unknown {} unit `{unit}`; accepted: {}",
                D::NAME,
                D::units().join(", ")
            )
        })?;
        Ok(Self {
            value,
            unit: unit.to_owned(),
            si: scale.apply(value),
            _dim: PhantomData,
        })
    }
}

impl<D> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

struct QuantityVisitor<D>(PhantomData<D>);

impl<D: Dimension> QuantityVisitor<D> {
    fn untagged<E: de::Error>(value: impl fmt::Display) -> E {
        E::custom(format!(
            "{} {value} has no unit tag; write it as a string such as \"{}\"",
            D::NAME,
            D::EXAMPLE
        ))
    }
}

impl<D: Dimension> Visitor<'_> for QuantityVisitor<D> {
    type Value = Quantity<D>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "a {} with a unit tag, e.g. \"{}\"", D::NAME, D::EXAMPLE)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
        Err(Self::untagged(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
        Err(Self::untagged(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
        Err(Self::untagged(v))
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(deserializer: De) -> Result<Self, De::Error> {
        deserializer.deserialize_any(QuantityVisitor(PhantomData))
    }
}
