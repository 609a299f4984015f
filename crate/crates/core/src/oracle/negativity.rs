//! Dense Fock-space density matrices of Gaussian states and the fermionic
//! partial time-reversal, evaluated literally through Majorana monomials.

use rug::Float;

use super::pauli::{phase_value, PauliString};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, SkewMatrix};
use crate::precision::PrecisionContext;

pub const MAX_DENSE_MODES: usize = 6;

/// `gamma_{i1} ... gamma_{ik}` for the set bits of `mask`, ascending.
fn monomial(mask: u32) -> PauliString {
    let mut p = PauliString::IDENTITY;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        p = p.mul(PauliString::majorana(i));
        m &= m - 1;
    }
    p
}

/// Pfaffian by expansion along the first row (small orders only).
fn pfaffian(a: &[Vec<Float>], idx: &[usize], prec: u32) -> Float {
    if idx.is_empty() {
        return Float::with_val(prec, 1);
    }
    let first = idx[0];
    let mut total = Float::new(prec);
    for (pos, &j) in idx.iter().enumerate().skip(1) {
        let rest: Vec<usize> = idx.iter().copied().filter(|&k| k != first && k != j).collect();
        let term = Float::with_val(prec, &a[first][j] * pfaffian(a, &rest, prec));
        if pos % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

/// `rho = 2^-n sum_mu conj(<M_mu>) M_mu` with Wick's theorem for `<M_mu>`.
pub fn gaussian_density_matrix(gamma: &SkewMatrix, ctx: &PrecisionContext) -> Result<CMatrix> {
    let dim = gamma.dim();
    let n = dim / 2;
    if n > MAX_DENSE_MODES {
        return Err(Error::OracleRange { what: "dense modes", max: MAX_DENSE_MODES, got: n });
    }
    let prec = ctx.bits();
    let a: Vec<Vec<Float>> = (0..dim).map(|i| (0..dim).map(|j| Float::with_val(prec, gamma.get(i, j))).collect()).collect();
    let size = 1usize << n;
    let mut rho = CMatrix::zeros(size, size, prec);
    let norm = Float::with_val(prec, size).recip();
    for mask in 0u32..(1 << dim) {
        let k = mask.count_ones() as usize;
        if k % 2 == 1 {
            continue;
        }
        let idx: Vec<usize> = (0..dim).filter(|i| mask >> i & 1 == 1).collect();
        // <M> = Pf(i Gamma_mu) = i^{k/2} Pf(Gamma_mu); conj gives (-i)^{k/2}.
        let pf = pfaffian(&a, &idx, prec) * &norm;
        if pf.is_zero() {
            continue;
        }
        let (wr, wi) = phase_value(((4 - (k / 2) % 4) % 4) as u8);
        add_monomial(&mut rho, monomial(mask), &Float::with_val(prec, &pf * wr), &Float::with_val(prec, &pf * wi));
    }
    Ok(rho)
}

/// `target += (cr + i ci) M`.
fn add_monomial(target: &mut CMatrix, m: PauliString, cr: &Float, ci: &Float) {
    let prec = cr.prec();
    for s in 0..target.rows() {
        let (phase, t) = m.apply(s as u64);
        let (pr, pi) = phase_value(phase);
        let t = t as usize;
        *target.re.get_mut(t, s) += Float::with_val(prec, cr * pr) - Float::with_val(prec, ci * pi);
        *target.im.get_mut(t, s) += Float::with_val(prec, cr * pi) + Float::with_val(prec, ci * pr);
    }
}

/// `Tr(M^dagger rho)`.
fn overlap(rho: &CMatrix, m: PauliString) -> (Float, Float) {
    let prec = rho.prec();
    let mut re = Float::new(prec);
    let mut im = Float::new(prec);
    for s in 0..rho.rows() {
        let (phase, t) = m.apply(s as u64);
        let (pr, pi) = phase_value(phase);
        let (xr, xi) = (rho.re.get(t as usize, s), rho.im.get(t as usize, s));
        // conj(i^phase) * rho[t][s]
        re += Float::with_val(prec, xr * pr) + Float::with_val(prec, xi * pi);
        im += Float::with_val(prec, xi * pr) - Float::with_val(prec, xr * pi);
    }
    (re, im)
}

/// `ln Tr|rho^R|` where the partial time-reversal on the first `left_modes`
/// modes maps `c_A^kappa c_B^tau` to `i^|kappa| c_A^kappa c_B^tau`.
pub fn dense_negativity(rho: &CMatrix, left_modes: usize, ctx: &PrecisionContext) -> Result<Float> {
    let size = rho.rows();
    let n = size.trailing_zeros() as usize;
    if n > MAX_DENSE_MODES {
        return Err(Error::OracleRange { what: "dense modes", max: MAX_DENSE_MODES, got: n });
    }
    if left_modes == 0 || left_modes >= n {
        return Err(Error::InvalidSubsystem(format!("cut {left_modes} must lie strictly inside {n} modes")));
    }
    let prec = ctx.bits();
    let left_mask = (1u32 << (2 * left_modes)) - 1;
    let norm = Float::with_val(prec, size).recip();
    let mut out = CMatrix::zeros(size, size, prec);
    for mask in 0u32..(1 << (2 * n)) {
        let m = monomial(mask);
        let (wr, wi) = overlap(rho, m);
        if wr.is_zero() && wi.is_zero() {
            continue;
        }
        let (wr, wi) = (wr * &norm, wi * &norm);
        let (pr, pi) = phase_value(((mask & left_mask).count_ones() % 4) as u8);
        let cr = Float::with_val(prec, &wr * pr) - Float::with_val(prec, &wi * pi);
        let ci = Float::with_val(prec, &wr * pi) + Float::with_val(prec, &wi * pr);
        add_monomial(&mut out, m, &cr, &ci);
    }
    let gram = out.matmul(&out.adjoint())?.hermitian_part();
    let mut norm1 = Float::new(prec);
    for v in hermitian_eigenvalues(&gram, ctx)? {
        if v.is_sign_positive() {
            norm1 += v.sqrt();
        }
    }
    Ok(norm1.ln())
}
