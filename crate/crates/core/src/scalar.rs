//! Exact rational scalars and their text form.
//!
//! Every probability and value in the crate is a [`Rational`]. The text form is
//! `"num/den"` in lowest terms, or a bare integer when the denominator is 1.

use std::str::FromStr;

pub use malachite::num::arithmetic::traits::{Abs, DivExact, Pow, Sign};
pub use malachite::num::basic::traits::{One, Zero};
use malachite::num::logic::traits::SignificantBits;
pub use malachite::{Integer, Natural, Rational};

use crate::error::{Error, Result};

/// Builds `num/den` from machine integers.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::from_signeds(num, den)
}

pub fn int(n: i64) -> Rational {
    Rational::from(n)
}

/// Parses the canonical text form. Non-reduced fractions, signs on the
/// denominator, decimals and zero denominators are all rejected.
pub fn parse(s: &str) -> Result<Rational> {
    let t = s.trim();
    let r = Rational::from_str(t).map_err(|_| Error::Parse(format!("not a rational: {s:?}")))?;
    if r.to_string() != t {
        return Err(Error::Parse(format!("rational not in lowest terms: {s:?}")));
    }
    Ok(r)
}

pub fn format(r: &Rational) -> String {
    r.to_string()
}

/// Bit length of a rational: the larger of its numerator and denominator sizes.
pub fn bits(r: &Rational) -> u64 {
    r.numerator_ref()
        .significant_bits()
        .max(r.denominator_ref().significant_bits())
}

pub fn is_zero(r: &Rational) -> bool {
    *r == Rational::ZERO
}

pub fn is_positive(r: &Rational) -> bool {
    *r > Rational::ZERO
}

pub fn half() -> Rational {
    q(1, 2)
}

pub fn max_of<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    xs.into_iter().max().cloned()
}

pub fn min_of<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    xs.into_iter().min().cloned()
}

/// `base^exp` for a possibly negative exponent.
pub fn powi(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        base.clone().pow(exp as u64)
    } else {
        Rational::ONE / base.clone().pow(exp.unsigned_abs())
    }
}

/// `floor(r)` as an integer.
pub fn floor(r: &Rational) -> Integer {
    let (n, d) = r.numerator_and_denominator_ref();
    let n = Integer::from(n.clone());
    let n = if *r < Rational::ZERO { -n } else { n };
    let d = Integer::from(d.clone());
    let quo = &n / &d;
    if &quo * &d != n && n < Integer::ZERO {
        quo - Integer::ONE
    } else {
        quo
    }
}

pub fn ceil(r: &Rational) -> Integer {
    -floor(&-r.clone())
}

/// Serde adapter writing a rational as its canonical string.
pub mod serde_q {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        super::parse(&s).map_err(serde::de::Error::custom)
    }
}
