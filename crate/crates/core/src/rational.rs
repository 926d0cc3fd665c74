//! Exact rational arithmetic used for every feasibility decision.
//!
//! Rates, capacities and densities are kept as reduced fractions so that
//! thresholds like `k <= c / lambda` never depend on float rounding. The
//! backing integer is `i128`, which is wide enough for the densities and
//! capacity ratios handled here (vector entries stay below a few hundred).

use num_traits::{Signed, Zero};
use std::fmt;

/// Reduced fraction over `i128`.
pub type Rational = num_rational::Ratio<i128>;

/// Shorthand constructor, reduces on creation.
pub fn rat(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

/// `ceil(r)` for a nonnegative rational, as an integer.
pub fn ceil_rational(r: Rational) -> i128 {
    r.ceil().to_integer()
}

/// `floor(r)` for a nonnegative rational, as an integer.
pub fn floor_rational(r: Rational) -> i128 {
    r.floor().to_integer()
}

/// Renders a rational as `num/den` (or just `num` when integral).
pub fn display_ratio(r: Rational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with up to `digits` fractional digits, exact when the
/// denominator divides a power of ten, rounded half-up otherwise.
pub fn decimal_string(r: Rational, digits: u32) -> String {
    let sign = if r.is_negative() { "-" } else { "" };
    let r = r.abs();
    let scale = 10i128.pow(digits);
    let scaled = r * Rational::from_integer(scale);
    // round half-up
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let int_part = rounded / scale;
    let frac_part = rounded % scale;
    if digits == 0 {
        return format!("{sign}{int_part}");
    }
    let mut frac = format!("{:0width$}", frac_part, width = digits as usize);
    while frac.ends_with('0') && frac.len() > 1 {
        frac.pop();
    }
    if frac == "0" {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac}")
    }
}

/// Parses a decimal literal (`-12`, `4.5`, `7.37e1`) into an exact rational.
///
/// This is used for JSON numbers so that inputs like `4.5` Mbps survive
/// without a detour through binary floating point.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = text[pos + 1..].parse().ok()?;
            (&text[..pos], exp)
        }
        None => (text, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1i128, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let mut num: i128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        num = num.checked_mul(10)?.checked_add(c.to_digit(10)? as i128)?;
    }
    let mut value = Rational::from_integer(sign * num);
    let shift = exp - frac_part.len() as i32;
    if shift > 0 {
        value *= Rational::from_integer(10i128.checked_pow(shift as u32)?);
    } else if shift < 0 {
        value /= Rational::from_integer(10i128.checked_pow((-shift) as u32)?);
    }
    Some(value)
}

/// Wrapper that serializes a rational as an exact `{num, den}` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RatioRepr {
    pub num: i128,
    pub den: i128,
}

impl From<Rational> for RatioRepr {
    fn from(r: Rational) -> Self {
        RatioRepr { num: *r.numer(), den: *r.denom() }
    }
}

impl From<RatioRepr> for Rational {
    fn from(r: RatioRepr) -> Self {
        Rational::new(r.num, r.den)
    }
}

impl fmt::Display for RatioRepr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

pub fn is_zero(r: Rational) -> bool {
    r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_inverses_is_one() {
        let a = rat(43, 45);
        assert_eq!(a * a.recip(), Rational::from_integer(1));
    }

    #[test]
    fn parse_decimal_exact() {
        assert_eq!(parse_decimal("4.5"), Some(rat(9, 2)));
        assert_eq!(parse_decimal("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_decimal("18"), Some(rat(18, 1)));
        assert_eq!(parse_decimal("7.37e1"), Some(rat(737, 10)));
        assert_eq!(parse_decimal("2.5e8"), Some(rat(250_000_000, 1)));
        assert_eq!(parse_decimal(""), None);
        assert_eq!(parse_decimal("x"), None);
    }

    #[test]
    fn decimal_string_rounding() {
        assert_eq!(decimal_string(rat(43, 45), 6), "0.955556");
        assert_eq!(decimal_string(rat(9, 2), 6), "4.5");
        assert_eq!(decimal_string(rat(5, 1), 6), "5");
    }
}
