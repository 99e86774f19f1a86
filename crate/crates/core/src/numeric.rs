//! Scalar type, numeric modes and the textual encoding of rationals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Every value stored in a model is an exact rational. Float inputs are
/// converted through their shortest decimal representation.
pub type Rational = BigRational;

/// Default feasibility / duality tolerance used in float mode.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// How linear programs are solved and how results are compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[derive(Default)]
pub enum NumericMode {
    /// Exact arithmetic; all comparisons are equalities.
    #[default]
    Rational,
    /// IEEE doubles with an absolute tolerance.
    Float { tolerance: f64 },
}


impl NumericMode {
    pub fn float() -> Self {
        NumericMode::Float {
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NumericMode::Rational)
    }

    pub fn tolerance(&self) -> f64 {
        match self {
            NumericMode::Rational => 0.0,
            NumericMode::Float { tolerance } => *tolerance,
        }
    }

    /// `a == b` exactly, or within `tol * (1 + max(|a|, |b|))` in float mode.
    pub fn approx_eq(&self, a: &Rational, b: &Rational) -> bool {
        match self {
            NumericMode::Rational => a == b,
            NumericMode::Float { tolerance } => {
                let (x, y) = (to_f64(a), to_f64(b));
                (x - y).abs() <= tolerance * (1.0 + x.abs().max(y.abs()))
            }
        }
    }

    pub fn is_zero(&self, a: &Rational) -> bool {
        self.approx_eq(a, &Rational::zero())
    }

    /// `a <= b` up to tolerance.
    pub fn le(&self, a: &Rational, b: &Rational) -> bool {
        a <= b || self.approx_eq(a, b)
    }

    /// Strictly positive beyond tolerance.
    pub fn is_positive(&self, a: &Rational) -> bool {
        a.is_positive() && !self.is_zero(a)
    }
}

impl fmt::Display for NumericMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NumericMode::Rational => write!(f, "rational"),
            NumericMode::Float { .. } => write!(f, "float"),
        }
    }
}

impl FromStr for NumericMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" => Ok(NumericMode::Rational),
            "float" => Ok(NumericMode::float()),
            other => Err(format!("unknown numeric mode `{other}`")),
        }
    }
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Very large numerators/denominators: divide in the log domain.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact rational value of a double. Non-finite inputs are rejected.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Parses `"p/q"`, integers and decimal literals (`"-1.25"`, `"4e-3"`) exactly.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| format!("bad numerator in `{s}`: {e}"))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| format!("bad denominator in `{s}`: {e}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational, String> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..]
                .parse()
                .map_err(|e| format!("bad exponent in `{s}`: {e}"))?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("not a number: `{s}`"));
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(format!("not a number: `{s}`"));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
        .map_err(|e| format!("bad number `{s}`: {e}"))?;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    if magnitude.abs() >= 15 {
        return format!("{:.11e}", x);
    }
    let s = format!("{:.*}", decimals, x);
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Formats a value according to the output mode.
pub fn format_value(r: &Rational, mode: NumericMode) -> String {
    match mode {
        NumericMode::Rational => format_rational(r),
        NumericMode::Float { .. } => format_float(to_f64(r)),
    }
}

/// Serde helpers that encode rationals as `"p/q"` strings and accept
/// strings or JSON numbers on input.
pub mod serde_rational {
    use super::*;
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl<'de> Visitor<'de> for RationalVisitor {
        type Value = Rational;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a rational as \"p/q\", a decimal string, or a number")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
            parse_rational(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
            Ok(int(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
            Ok(Rational::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
            if !v.is_finite() {
                return Err(E::custom("non-finite number"));
            }
            // The shortest round-trip decimal is what the author wrote.
            parse_rational(&format!("{v:?}")).map_err(E::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("4.4").unwrap(), ratio(22, 5));
        assert_eq!(parse_rational("0.0824").unwrap(), ratio(824, 10000));
        assert_eq!(parse_rational("12").unwrap(), int(12));
        assert_eq!(parse_rational("1e-3").unwrap(), ratio(1, 1000));
        assert_eq!(parse_rational("-.5").unwrap(), ratio(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats_twelve_significant_digits() {
        assert_eq!(format_float(0.08247422680412371), "0.0824742268041");
        assert_eq!(format_float(3.75), "3.75");
        assert_eq!(format_float(-1.25), "-1.25");
        assert_eq!(format_float(1234.5678901234567), "1234.56789012");
        assert_eq!(format_rational(&ratio(15, 4)), "15/4");
        assert_eq!(format_rational(&int(-3)), "-3");
    }

    #[test]
    fn float_mode_tolerance() {
        let mode = NumericMode::float();
        assert!(mode.approx_eq(&ratio(1, 3), &from_f64(1.0 / 3.0).unwrap()));
        assert!(!NumericMode::Rational.approx_eq(&ratio(1, 3), &from_f64(1.0 / 3.0).unwrap()));
        assert!(mode.le(&ratio(1, 1), &ratio(1, 1)));
    }
}
