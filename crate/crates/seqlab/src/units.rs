//! Quantities with units, as written in sequence and config files.
//!
//! Frequencies are ordinary frequencies and become angular on the way in
//! (`12.5MHz` is `2 pi x 12.5e6 rad/s`). Rates are plain `s^-1`:
//! `0.1MHz` is `1e5 s^-1`. Angles are multiples of pi.
//!
//! Printing uses MHz, ns and pi. A value that no decimal in those units
//! reproduces exactly is printed in SI instead (`rad/s`, `/s`, `s`, `rad`).

use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Angular frequency, rad/s.
    Frequency,
    /// Rate, s^-1.
    Rate,
    /// Time, s.
    Time,
    /// Angle in units of pi, rad.
    Angle,
}

impl Kind {
    pub fn describe(self) -> &'static str {
        match self {
            Kind::Frequency => "a frequency such as `12.5MHz`",
            Kind::Rate => "a rate such as `0.1MHz` or `1e5` (s^-1)",
            Kind::Time => "a time such as `20ns`",
            Kind::Angle => "an angle such as `0.5pi`",
        }
    }

    fn units(self) -> &'static [(&'static str, Scale)] {
        match self {
            Kind::Frequency => &[
                ("GHz", Scale::Mul(1e9 * TAU)),
                ("MHz", Scale::Mul(1e6 * TAU)),
                ("kHz", Scale::Mul(1e3 * TAU)),
                ("Hz", Scale::Mul(TAU)),
                ("rad/s", Scale::Mul(1.0)),
            ],
            Kind::Rate => &[
                ("GHz", Scale::Mul(1e9)),
                ("MHz", Scale::Mul(1e6)),
                ("kHz", Scale::Mul(1e3)),
                ("Hz", Scale::Mul(1.0)),
                ("/s", Scale::Mul(1.0)),
                ("", Scale::Mul(1.0)),
            ],
            Kind::Time => &[
                ("ps", Scale::Div(1e12)),
                ("ns", Scale::Div(1e9)),
                ("us", Scale::Div(1e6)),
                ("µs", Scale::Div(1e6)),
                ("ms", Scale::Div(1e3)),
                ("s", Scale::Mul(1.0)),
            ],
            Kind::Angle => &[("pi", Scale::Mul(PI)), ("rad", Scale::Mul(1.0))],
        }
    }

    /// SI spelling, used when the canonical unit has no exact decimal.
    fn si(self) -> &'static str {
        match self {
            Kind::Frequency => "rad/s",
            Kind::Rate => "/s",
            Kind::Time => "s",
            Kind::Angle => "rad",
        }
    }

    /// The unit used when printing.
    fn canonical(self) -> (&'static str, Scale) {
        match self {
            Kind::Frequency => ("MHz", Scale::Mul(1e6 * TAU)),
            Kind::Rate => ("MHz", Scale::Mul(1e6)),
            Kind::Time => ("ns", Scale::Div(1e9)),
            Kind::Angle => ("pi", Scale::Mul(PI)),
        }
    }
}

/// Division by an exact power of ten keeps `20ns` equal to `20e-9`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Scale {
    Mul(f64),
    Div(f64),
}

impl Scale {
    fn apply(self, v: f64) -> f64 {
        match self {
            Scale::Mul(s) => v * s,
            Scale::Div(s) => v / s,
        }
    }

    fn invert(self, x: f64) -> f64 {
        match self {
            Scale::Mul(s) => x / s,
            Scale::Div(s) => x * s,
        }
    }
}

/// Parses `<number><unit>` into SI. Returns `None` for malformed input.
pub fn parse(text: &str, kind: Kind) -> Option<f64> {
    for &(unit, scale) in kind.units() {
        let Some(number) = text.strip_suffix(unit) else { continue };
        let value = match number {
            "" if kind == Kind::Angle => 1.0,
            "-" if kind == Kind::Angle => -1.0,
            _ => match number.parse::<f64>() {
                Ok(v) if v.is_finite() && number.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) => v,
                _ => continue,
            },
        };
        return Some(scale.apply(value));
    }
    None
}

/// Prints `x` such that [`parse`] returns exactly `x` again: in the
/// canonical unit of `kind` when some decimal scales to `x`, in SI otherwise.
pub fn format(x: f64, kind: Kind) -> String {
    let (unit, scale) = kind.canonical();
    match exact_inverse(x, scale) {
        Some(v) => format!("{v}{unit}"),
        None => format!("{x}{}", kind.si()),
    }
}

fn exact_inverse(x: f64, scale: Scale) -> Option<f64> {
    let guess = scale.invert(x);
    if x == 0.0 {
        return Some(0.0);
    }
    if !guess.is_finite() {
        return None;
    }
    let bits = guess.to_bits();
    (0..=16u64)
        .flat_map(|k| [bits.wrapping_add(k), bits.wrapping_sub(k)])
        .map(f64::from_bits)
        .find(|&c| c.is_finite() && scale.apply(c) == x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units() {
        assert_eq!(parse("20ns", Kind::Time), Some(20e-9));
        assert_eq!(parse("1.5us", Kind::Time), Some(1.5e-6));
        assert_eq!(parse("12.5MHz", Kind::Frequency), Some(12.5 * 1e6 * TAU));
        assert_eq!(parse("0.1MHz", Kind::Rate), Some(0.1 * 1e6));
        assert_eq!(parse("1e5", Kind::Rate), Some(1e5));
        assert_eq!(parse("0.5pi", Kind::Angle), Some(0.5 * PI));
        assert_eq!(parse("pi", Kind::Angle), Some(PI));
        assert_eq!(parse("-pi", Kind::Angle), Some(-PI));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["20", "ns", "20 ns", "20nss", "infns", "NaNns", "1e400ns", "0x10ns"] {
            assert_eq!(parse(bad, Kind::Time), None, "{bad}");
        }
        assert_eq!(parse("12.5", Kind::Frequency), None);
        assert_eq!(parse("0.5", Kind::Angle), None);
    }

    #[test]
    fn printing_round_trips() {
        for x in [0.0, 20e-9, 1.0 / 3.0 * 1e-7, 123.456e-9, 7e-12] {
            assert_eq!(parse(&format(x, Kind::Time), Kind::Time), Some(x));
        }
        for x in [PI / (2.0 * 20e-9), 2.0 * PI * 12.5e6, -1.234567e7, 1e-3] {
            assert_eq!(parse(&format(x, Kind::Frequency), Kind::Frequency), Some(x));
        }
        for x in [0.5 * PI, -1.0, 3.0] {
            assert_eq!(parse(&format(x, Kind::Angle), Kind::Angle), Some(x));
        }
        assert_eq!(format(20e-9, Kind::Time), "20ns");
        assert_eq!(format(12.5 * 1e6 * TAU, Kind::Frequency), "12.5MHz");
    }

    #[test]
    fn unreachable_values_fall_back_to_si() {
        // No double scales by 2 pi x 1e6 onto this one.
        let x = 476801968.30823225;
        let text = format(x, Kind::Frequency);
        assert_eq!(text, "476801968.30823225rad/s");
        assert_eq!(parse(&text, Kind::Frequency), Some(x));
        assert_eq!(parse("1.5rad", Kind::Angle), Some(1.5));
    }
}
