use rug::{Assign, Float};

use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

/// Real dilogarithm `Li2(x) = sum_k x^k / k^2` on `[-1, 1]`.
///
/// The series is summed directly for `|x| <= 1/2`. For `x > 1/2` the
/// reflection `Li2(x) = pi^2/6 - ln x ln(1-x) - Li2(1-x)` is used, and for
/// `x < -1/2` the Landen identity `Li2(x) = -Li2(x/(x-1)) - ln(1-x)^2 / 2`.
pub fn dilog(x: &Float, ctx: &PrecisionContext) -> Result<Float> {
    let prec = ctx.bits();
    let x = Float::with_val(prec, x);
    if !(x >= -1i32 && x <= 1u32) {
        return Err(Error::Domain { function: "dilog", value: ctx.to_decimal(&x) });
    }
    let half = Float::with_val(prec, 0.5);
    if Float::with_val(prec, &*x.as_abs()) <= half {
        return Ok(series(&x, ctx));
    }
    if x > 0u32 {
        let pi2_6 = ctx.pi().square() / 6u32;
        if x == 1u32 {
            return Ok(pi2_6);
        }
        let one_minus = Float::with_val(prec, 1u32 - &x);
        let lnx = x.clone().ln();
        let ln1m = one_minus.clone().ln();
        return Ok(pi2_6 - lnx * ln1m - series(&one_minus, ctx));
    }
    let one_minus = Float::with_val(prec, 1u32 - &x);
    let y = Float::with_val(prec, &x / Float::with_val(prec, &x - 1u32));
    let l = one_minus.ln();
    Ok(-series(&y, ctx) - l.square() / 2u32)
}

fn series(x: &Float, ctx: &PrecisionContext) -> Float {
    let prec = ctx.bits();
    let mut sum = Float::new(prec);
    let mut power = Float::with_val(prec, x);
    let mut term = Float::new(prec);
    let eps = ctx.epsilon();
    let mut k: u64 = 1;
    loop {
        term.assign(&power / (k * k));
        sum += &term;
        if term.is_zero() || Float::with_val(prec, &*term.as_abs()) <= Float::with_val(prec, &*sum.as_abs() * &eps) {
            break;
        }
        power *= x;
        k += 1;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn special_values() {
        let c = PrecisionContext::new(60).unwrap();
        let tol = c.convergence_tol();
        let pi2 = c.pi().square();
        let check = |x: f64, expect: Float| {
            let got = dilog(&c.float(x), &c).unwrap();
            assert!(Float::with_val(c.bits(), &got - &expect).abs() < tol, "Li2({x})");
        };
        check(1.0, Float::with_val(c.bits(), &pi2 / 6u32));
        check(-1.0, Float::with_val(c.bits(), -(pi2.clone() / 12u32)));
        check(0.0, c.zero());
        let ln2sq = c.ln2().square();
        check(0.5, Float::with_val(c.bits(), &pi2 / 12u32) - ln2sq / 2u32);
        assert!(dilog(&c.float(1.5), &c).is_err());
    }

    #[test]
    fn continuous_across_branch_points() {
        let c = PrecisionContext::new(40).unwrap();
        for x in [0.5, -0.5] {
            let step = c.pow10(-30);
            let below = dilog(&Float::with_val(c.bits(), c.float(x) - &step), &c).unwrap();
            let above = dilog(&Float::with_val(c.bits(), c.float(x) + &step), &c).unwrap();
            assert!((below - above).abs() < c.pow10(-28));
        }
    }
}
