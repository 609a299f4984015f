use rug::float::Round;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Lowest supported working precision in decimal digits.
pub const MIN_DIGITS: u32 = 30;

/// Extra binary digits carried beyond the requested decimal precision.
pub const GUARD_BITS: u32 = 16;

/// Working precision shared by every numerical routine.
///
/// Tolerances are stored as decimal exponents: `purity_tol = 10^-purity_exp`
/// and `convergence_tol = 10^-convergence_exp`. The default pair is
/// `(digits - 10, digits - 5)`, so the purity tolerance is the looser one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    digits: u32,
    bits: u32,
    purity_exp: u32,
    convergence_exp: u32,
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        if digits < MIN_DIGITS {
            return Err(Error::PrecisionTooLow { got: digits, min: MIN_DIGITS });
        }
        Ok(Self {
            digits,
            bits: bits_for_digits(digits),
            purity_exp: digits - 10,
            convergence_exp: digits - 5,
        })
    }

    /// Context for a chain of `n_sites` at `ratio` digits per site, never below
    /// [`MIN_DIGITS`].
    pub fn for_chain(n_sites: usize, ratio: f64) -> Result<Self> {
        let digits = (ratio * n_sites as f64).ceil().max(MIN_DIGITS as f64) as u32;
        Self::new(digits)
    }

    pub fn with_tolerances(mut self, purity_exp: u32, convergence_exp: u32) -> Self {
        self.purity_exp = purity_exp;
        self.convergence_exp = convergence_exp;
        self
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn purity_tol(&self) -> Float {
        self.pow10(-(self.purity_exp as i32))
    }

    pub fn convergence_tol(&self) -> Float {
        self.pow10(-(self.convergence_exp as i32))
    }

    /// Unit roundoff of the working precision.
    pub fn epsilon(&self) -> Float {
        Float::with_val(self.bits, 1) >> (self.bits - 1)
    }

    pub fn zero(&self) -> Float {
        Float::new(self.bits)
    }

    pub fn one(&self) -> Float {
        Float::with_val(self.bits, 1)
    }

    pub fn float(&self, x: f64) -> Float {
        Float::with_val(self.bits, x)
    }

    pub fn int(&self, x: i64) -> Float {
        Float::with_val(self.bits, x)
    }

    /// `num / den` rounded once at working precision.
    pub fn ratio(&self, num: i64, den: i64) -> Float {
        Float::with_val(self.bits, num) / den
    }

    pub fn pow10(&self, exp: i32) -> Float {
        Float::with_val(self.bits, 10).pow(exp)
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits, rug::float::Constant::Pi)
    }

    pub fn ln2(&self) -> Float {
        Float::with_val(self.bits, rug::float::Constant::Log2)
    }

    /// Parses a decimal literal at working precision.
    pub fn parse(&self, text: &str) -> Result<Float> {
        let parsed = Float::parse(text.trim()).map_err(|_| Error::Domain {
            function: "decimal parse",
            value: text.to_string(),
        })?;
        Ok(Float::with_val(self.bits, parsed))
    }

    /// Decimal digits needed for a binary value at this precision to round-trip.
    pub fn roundtrip_digits(&self) -> usize {
        (self.bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1
    }

    /// Scientific decimal rendering that parses back to the same binary value.
    pub fn to_decimal(&self, x: &Float) -> String {
        to_decimal(x, self.roundtrip_digits())
    }

    /// Same context with `extra` more decimal digits and unchanged relative
    /// tolerances.
    pub fn widened(&self, extra: u32) -> Self {
        let mut ctx = Self::new(self.digits + extra).expect("widening keeps digits above minimum");
        ctx.purity_exp = self.purity_exp + extra;
        ctx.convergence_exp = self.convergence_exp + extra;
        ctx
    }
}

pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + GUARD_BITS
}

/// Scientific notation with `sig` significant digits, e.g. `-1.2500e-3`.
/// Infinities render as `inf`/`-inf`.
pub fn to_decimal(x: &Float, sig: usize) -> String {
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_zero() {
        return "0".into();
    }
    let (negative, digits, exp) = x.to_sign_string_exp_round(10, Some(sig), Round::Nearest);
    let exp = exp.expect("finite nonzero value has an exponent") - 1;
    let digits = digits.trim_end_matches('0');
    let (head, tail) = digits.split_at(1);
    let sign = if negative { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(matches!(PrecisionContext::new(29), Err(Error::PrecisionTooLow { .. })));
    }

    #[test]
    fn bits_cover_requested_digits() {
        let ctx = PrecisionContext::new(50).unwrap();
        assert_eq!(ctx.bits(), 167 + GUARD_BITS);
        assert!(ctx.purity_tol() > ctx.convergence_tol());
    }

    #[test]
    fn chain_precision_scales_with_sites() {
        assert_eq!(PrecisionContext::for_chain(64, 1.5).unwrap().digits(), 96);
        assert_eq!(PrecisionContext::for_chain(8, 1.5).unwrap().digits(), MIN_DIGITS);
    }

    #[test]
    fn decimal_roundtrip() {
        let ctx = PrecisionContext::new(40).unwrap();
        let third = ctx.ratio(1, 3);
        let text = ctx.to_decimal(&third);
        assert_eq!(ctx.parse(&text).unwrap(), third);
        assert_eq!(to_decimal(&ctx.float(-0.00125), 10), "-1.25e-3");
        assert_eq!(to_decimal(&ctx.float(2.0), 5), "2e0");
    }
}
