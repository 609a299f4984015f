//! Entanglement measures of Gaussian states: von Neumann and Rényi entropies,
//! the fermionic logarithmic negativity and the Uhlmann fidelity.

use rug::Float;

use crate::error::{Error, Result};
use crate::gaussian::single_particle_spectrum;
use crate::linalg::{hermitian_eigenvalues, invert_complex, skew_schur, CMatrix, SchurForm, SkewMatrix};
use crate::precision::PrecisionContext;

/// Splits a block of `L` modes into the first `left` modes and the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BipartitionSpec {
    pub left: usize,
}

impl BipartitionSpec {
    pub fn new(left: usize) -> Self {
        Self { left }
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        if self.left == 0 || self.left >= modes {
            return Err(Error::InvalidSubsystem(format!("cut {} must satisfy 0 < cut < {modes}", self.left)));
        }
        Ok(())
    }
}

/// `p = (1 + nu)/2` and `q = (1 - nu)/2` for each mode.
fn occupations(gamma: &SkewMatrix, ctx: &PrecisionContext) -> Result<Vec<(Float, Float)>> {
    let sp = single_particle_spectrum(gamma, ctx)?;
    let prec = ctx.bits();
    Ok(sp
        .nu
        .iter()
        .map(|nu| (Float::with_val(prec, 1u32 + nu) / 2u32, Float::with_val(prec, 1u32 - nu) / 2u32))
        .collect())
}

fn xlogx(x: &Float) -> Float {
    if x.is_zero() {
        Float::new(x.prec())
    } else {
        Float::with_val(x.prec(), x * x.clone().ln())
    }
}

/// von Neumann entropy in nats.
pub fn entropy(gamma: &SkewMatrix, ctx: &PrecisionContext) -> Result<Float> {
    let mut s = ctx.zero();
    for (p, q) in occupations(gamma, ctx)? {
        s -= xlogx(&p);
        s -= xlogx(&q);
    }
    Ok(s)
}

/// Rényi entropy `S_alpha` in nats for `alpha > 0`, `alpha != 1`.
pub fn renyi_entropy(gamma: &SkewMatrix, alpha: f64, ctx: &PrecisionContext) -> Result<Float> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::Domain { function: "renyi_entropy", value: format!("alpha = {alpha}") });
    }
    let prec = ctx.bits();
    let a = Float::with_val(prec, alpha);
    let mut s = ctx.zero();
    for (p, q) in occupations(gamma, ctx)? {
        let pa = if p.is_zero() { ctx.zero() } else { Float::with_val(prec, rug::ops::Pow::pow(&p, &a)) };
        let qa = if q.is_zero() { ctx.zero() } else { Float::with_val(prec, rug::ops::Pow::pow(&q, &a)) };
        s += Float::with_val(prec, pa + qa).ln();
    }
    Ok(s / Float::with_val(prec, 1u32 - a))
}

/// Logarithmic negativity with its raw (unclipped) value.
#[derive(Clone, Debug)]
pub struct Negativity {
    /// `max(raw, 0)`.
    pub value: Float,
    pub raw: Float,
}

/// `ln Tr|rho^R|` for the partial time-reversal of the first `cut.left` modes.
///
/// With `G = i Gamma` split into blocks by the cut,
/// `G_+- = [[-G11, +-i G12], [+-i G21, G22]]` and
/// `G_x = 1 - (1 - G_-)(1 + G_+ G_-)^-1 (1 - G_+)` is `i X` with `X` real
/// antisymmetric. With `xi` the Schur values of `X` and `nu` those of `Gamma`,
/// `E = sum ln[sqrt((1+xi)/2) + sqrt((1-xi)/2)] + 1/2 sum ln[((1+nu)/2)^2 + ((1-nu)/2)^2]`.
pub fn log_negativity(gamma: &SkewMatrix, cut: BipartitionSpec, ctx: &PrecisionContext) -> Result<Negativity> {
    let dim = gamma.dim();
    cut.validate(dim / 2)?;
    let prec = ctx.bits();
    let split = 2 * cut.left;
    let g = gamma.as_matrix().with_prec(prec);
    // G_+ = [[-i Gamma11, -Gamma12], [-Gamma21, i Gamma22]]; G_- flips the off-diagonal sign.
    let mut plus = CMatrix::zeros(dim, dim, prec);
    let mut minus = CMatrix::zeros(dim, dim, prec);
    for j in 0..dim {
        for i in 0..dim {
            let v = g.get(i, j);
            if v.is_zero() {
                continue;
            }
            match (i < split, j < split) {
                (true, true) => {
                    plus.im.set(i, j, Float::with_val(prec, -v));
                    minus.im.set(i, j, Float::with_val(prec, -v));
                }
                (false, false) => {
                    plus.im.set(i, j, v);
                    minus.im.set(i, j, v);
                }
                _ => {
                    plus.re.set(i, j, Float::with_val(prec, -v));
                    minus.re.set(i, j, v);
                }
            }
        }
    }
    let one = CMatrix::identity(dim, prec);
    let inner = one.add(&plus.matmul(&minus)?)?;
    let inv = invert_complex(&inner, ctx).map_err(|e| match e {
        Error::Singular { pivot, magnitude } => Error::PrecisionEscalation {
            reason: format!("1 + G_+ G_- is singular at pivot {pivot} (magnitude {magnitude})"),
        },
        other => other,
    })?;
    let cross = one.sub(&one.sub(&minus)?.matmul(&inv)?.matmul(&one.sub(&plus)?)?)?;
    let x = SkewMatrix::antisymmetrize(&cross.im)?;
    let xi = skew_schur(&x, ctx)?.block_values;
    let nu = skew_schur(&gamma.with_prec(prec), ctx)?.block_values;

    let mut raw = ctx.zero();
    for v in &xi {
        let v = v.clone().min(&ctx.one());
        let a = Float::with_val(prec, 1u32 + &v) / 2u32;
        let b = Float::with_val(prec, 1u32 - &v) / 2u32;
        raw += Float::with_val(prec, a.sqrt() + b.sqrt()).ln();
    }
    for v in &nu {
        let a = Float::with_val(prec, 1u32 + v) / 2u32;
        let b = Float::with_val(prec, 1u32 - v) / 2u32;
        raw += Float::with_val(prec, a.square() + b.square()).ln() / 2u32;
    }
    let value = if raw.is_sign_negative() { ctx.zero() } else { raw.clone() };
    Ok(Negativity { value, raw })
}

/// Uhlmann fidelity `Tr sqrt(sqrt(rho_1) rho_2 sqrt(rho_1))` with its
/// complement computed without cancellation.
#[derive(Clone, Debug)]
pub struct Fidelity {
    pub value: Float,
    /// `1 - value`.
    pub infidelity: Float,
    /// Working digits used internally.
    pub internal_digits: u32,
}

/// Fidelity of two Gaussian states of equal dimension.
///
/// With `M_i = (1 + G_i)/(1 - G_i)` and `lambda` the eigenvalues of
/// `sqrt(M_1) M_2 sqrt(M_1)`, which pair as `lambda, 1/lambda`,
/// `ln F = sum_{lambda >= 1} ln 2cosh(ln(lambda)/4) - 1/2 sum_{i,k} ln 2cosh(eps_ik/2)`.
/// Modes with `1 - nu < 10^-(digits-8)` are pulled back to that distance.
/// `M_i` span `exp(+-eps_max)`, so the product is formed with enough extra
/// digits to resolve its unit-size eigenvalues.
pub fn fidelity(gamma_1: &SkewMatrix, gamma_2: &SkewMatrix, ctx: &PrecisionContext) -> Result<Fidelity> {
    let dim = gamma_1.dim();
    if gamma_2.dim() != dim {
        return Err(Error::Dimension(format!("fidelity of {dim}- and {}-dimensional states", gamma_2.dim())));
    }
    let guard = ctx.pow10(-(ctx.digits() as i32 - 8));
    let nu_max = Float::with_val(ctx.bits(), 1u32 - &guard);
    let eps_cap = Float::with_val(ctx.bits(), 1u32 + &nu_max) / Float::with_val(ctx.bits(), &guard);
    let eps_cap = eps_cap.ln().to_f64();

    // First pass at working precision only sizes the internal precision.
    let coarse = |g: &SkewMatrix| -> Result<f64> {
        let s = skew_schur(g, ctx)?;
        Ok(s.block_values.first().map_or(0.0, |nu| {
            let nu = nu.clone().min(&nu_max);
            let e = (Float::with_val(ctx.bits(), 1u32 + &nu) / Float::with_val(ctx.bits(), 1u32 - &nu)).ln();
            e.to_f64().min(eps_cap)
        }))
    };
    let spread = (coarse(gamma_1)? + coarse(gamma_2)?) * std::f64::consts::LOG10_E;
    let extra = spread.ceil() as u32 + 10;
    let inner = ctx.widened(extra);
    let prec = inner.bits();
    let nu_max = Float::with_val(prec, &nu_max);

    let decompose = |g: &SkewMatrix| -> Result<(SchurForm, Vec<Float>)> {
        let s = skew_schur(&g.with_prec(prec), &inner)?;
        let eps = s
            .block_values
            .iter()
            .map(|nu| {
                let nu = nu.clone().min(&nu_max);
                (Float::with_val(prec, 1u32 + &nu) / Float::with_val(prec, 1u32 - &nu)).ln()
            })
            .collect();
        Ok((s, eps))
    };
    let (s1, e1) = decompose(gamma_1)?;
    let (s2, e2) = decompose(gamma_2)?;

    // exp(t i B) = cosh t + i sinh t B in each Schur block.
    let exp_form = |s: &SchurForm, t: &[Float]| -> CMatrix {
        let ch: Vec<Float> = t.iter().map(|x| x.clone().cosh()).collect();
        let sh: Vec<Float> = t.iter().map(|x| x.clone().sinh()).collect();
        CMatrix { re: s.assemble_symmetric(&ch), im: s.assemble(&sh).into_matrix() }
    };
    let half1: Vec<Float> = e1.iter().map(|x| Float::with_val(prec, x / 2u32)).collect();
    let root1 = exp_form(&s1, &half1);
    let m2 = exp_form(&s2, &e2);
    let x = root1.matmul(&m2)?.matmul(&root1)?.hermitian_part();
    let mut lambda = hermitian_eigenvalues(&x, &inner)?;
    lambda.reverse();

    let mut log_f = Float::new(prec);
    for l in lambda.iter().take(dim / 2) {
        if !l.is_sign_positive() || l.is_zero() {
            return Err(Error::PrecisionEscalation { reason: "non-positive eigenvalue in the fidelity product".into() });
        }
        let theta = Float::with_val(prec, l.ln_ref()) / 4u32;
        log_f += (theta.cosh() * 2u32).ln();
    }
    for e in e1.iter().chain(&e2) {
        let c = Float::with_val(prec, e / 2u32).cosh() * 2u32;
        log_f -= c.ln() / 2u32;
    }
    let value = Float::with_val(ctx.bits(), log_f.exp_ref());
    let infidelity = Float::with_val(ctx.bits(), -log_f.exp_m1());
    Ok(Fidelity { value, infidelity, internal_digits: inner.digits() })
}
