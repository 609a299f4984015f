//! Sparse Hermitian operators on symmetry sectors and a Lanczos ground-state
//! solver with full reorthogonalization.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Assign, Float};

use super::pauli::{phase_value, PauliString};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, Matrix};
use crate::precision::PrecisionContext;

/// `coefficient * string`, with a complex coefficient.
#[derive(Clone, Debug)]
pub struct PauliTerm {
    pub re: Float,
    pub im: Float,
    pub string: PauliString,
}

/// Complex vector as separate real and imaginary parts.
#[derive(Clone, Debug)]
pub struct CVector {
    pub re: Vec<Float>,
    pub im: Vec<Float>,
}

impl CVector {
    pub fn zeros(n: usize, prec: u32) -> Self {
        Self { re: vec![Float::new(prec); n], im: vec![Float::new(prec); n] }
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    /// `<self, other>` (conjugate-linear in `self`).
    pub fn inner(&self, other: &CVector) -> (Float, Float) {
        let prec = self.re.first().map_or(64, |x| x.prec());
        let mut re = Float::new(prec);
        let mut im = Float::new(prec);
        let mut t = Float::new(prec);
        for i in 0..self.len() {
            let (a, b) = (&self.re[i], &self.im[i]);
            let (c, d) = (&other.re[i], &other.im[i]);
            t.assign(a * c);
            re += &t;
            t.assign(b * d);
            re += &t;
            t.assign(a * d);
            im += &t;
            t.assign(b * c);
            im -= &t;
        }
        (re, im)
    }

    pub fn norm(&self) -> Float {
        self.inner(self).0.sqrt()
    }

    /// `self -= (cr + i ci) * other`.
    pub fn sub_scaled(&mut self, cr: &Float, ci: &Float, other: &CVector) {
        let prec = cr.prec();
        let mut t = Float::new(prec);
        for i in 0..self.len() {
            let (a, b) = (&other.re[i], &other.im[i]);
            t.assign(cr * a);
            self.re[i] -= &t;
            t.assign(ci * b);
            self.re[i] += &t;
            t.assign(cr * b);
            self.im[i] -= &t;
            t.assign(ci * a);
            self.im[i] -= &t;
        }
    }

    pub fn scale_real(&mut self, s: &Float) {
        for x in self.re.iter_mut().chain(self.im.iter_mut()) {
            *x *= s;
        }
    }
}

/// Hermitian operator restricted to a list of basis states, stored by rows.
pub struct SectorOperator {
    pub states: Vec<u64>,
    rows: Vec<Vec<(usize, Float, Float)>>,
}

impl SectorOperator {
    /// Restricts `sum_terms` to `states`; terms must map the sector to itself.
    pub fn new(terms: &[PauliTerm], states: Vec<u64>, prec: u32) -> Result<Self> {
        let index: BTreeMap<u64, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let mut rows: Vec<BTreeMap<usize, (Float, Float)>> = vec![BTreeMap::new(); states.len()];
        for (col, &s) in states.iter().enumerate() {
            for term in terms {
                let (phase, t) = term.string.apply(s);
                let Some(&row) = index.get(&t) else {
                    return Err(Error::Dimension(format!("term {:?} leaves the sector", term.string)));
                };
                let (pr, pi) = phase_value(phase);
                // (re + i im)(pr + i pi)
                let vr = Float::with_val(prec, &term.re * pr) - Float::with_val(prec, &term.im * pi);
                let vi = Float::with_val(prec, &term.re * pi) + Float::with_val(prec, &term.im * pr);
                let entry = rows[row].entry(col).or_insert_with(|| (Float::new(prec), Float::new(prec)));
                entry.0 += vr;
                entry.1 += vi;
            }
        }
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().filter(|(_, (a, b))| !(a.is_zero() && b.is_zero())).map(|(c, (a, b))| (c, a, b)).collect())
            .collect();
        Ok(Self { states, rows })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let prec = v.re.first().map_or(64, |x| x.prec());
        let mut out = CVector::zeros(self.dim(), prec);
        let mut t = Float::new(prec);
        for (row, entries) in self.rows.iter().enumerate() {
            for (col, hr, hi) in entries {
                let (a, b) = (&v.re[*col], &v.im[*col]);
                t.assign(hr * a);
                out.re[row] += &t;
                t.assign(hi * b);
                out.re[row] -= &t;
                t.assign(hr * b);
                out.im[row] += &t;
                t.assign(hi * a);
                out.im[row] += &t;
            }
        }
        out
    }

    fn dense(&self, prec: u32) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n, prec);
        for (row, entries) in self.rows.iter().enumerate() {
            for (col, hr, hi) in entries {
                m.re.set(row, *col, hr);
                m.im.set(row, *col, hi);
            }
        }
        m
    }
}

/// Lowest eigenpair of a sector operator.
pub struct GroundPair {
    pub energy: Float,
    pub vector: CVector,
    /// Second-lowest Ritz value, when available.
    pub next_energy: Option<Float>,
    /// `|H v - E v|`.
    pub residual: Float,
}

/// Below this dimension the sector is diagonalized densely.
const DENSE_LIMIT: usize = 48;

pub fn ground_pair(op: &SectorOperator, ctx: &PrecisionContext) -> Result<GroundPair> {
    let prec = ctx.bits();
    let n = op.dim();
    if n <= DENSE_LIMIT {
        let eig = hermitian_eigen(&op.dense(prec), ctx)?;
        let vector = CVector { re: eig.vectors.re.col(0).to_vec(), im: eig.vectors.im.col(0).to_vec() };
        let residual = residual(op, &vector, &eig.values[0]);
        return Ok(GroundPair { energy: eig.values[0].clone(), vector, next_energy: eig.values.get(1).cloned(), residual });
    }
    lanczos(op, ctx)
}

fn residual(op: &SectorOperator, v: &CVector, e: &Float) -> Float {
    let mut hv = op.apply(v);
    hv.sub_scaled(e, &Float::new(e.prec()), v);
    hv.norm()
}

fn lanczos(op: &SectorOperator, ctx: &PrecisionContext) -> Result<GroundPair> {
    let prec = ctx.bits();
    let n = op.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q0 = CVector::zeros(n, prec);
    for i in 0..n {
        q0.re[i].assign(rng.gen_range(-1.0..1.0));
        q0.im[i].assign(rng.gen_range(-1.0..1.0));
    }
    let nrm = q0.norm();
    q0.scale_real(&nrm.recip());

    let tol = ctx.pow10(-(ctx.digits() as i32 - 10));
    let mut basis = vec![q0];
    let mut alpha: Vec<Float> = Vec::new();
    let mut beta: Vec<Float> = Vec::new();
    let zero = Float::new(prec);
    loop {
        let j = basis.len() - 1;
        let mut w = op.apply(&basis[j]);
        let (a, _) = basis[j].inner(&w);
        w.sub_scaled(&a, &zero, &basis[j]);
        if j > 0 {
            w.sub_scaled(&beta[j - 1], &zero, &basis[j - 1]);
        }
        for _ in 0..2 {
            for q in &basis {
                let (cr, ci) = q.inner(&w);
                w.sub_scaled(&cr, &ci, q);
            }
        }
        alpha.push(a);
        let b = w.norm();
        let exhausted = basis.len() == n || b < tol;
        let m = alpha.len();
        if exhausted || m % 8 == 0 {
            let (theta, y) = lowest_tridiagonal(&alpha, &beta, ctx);
            let estimate = Float::with_val(prec, &b * &*y[m - 1].as_abs());
            if exhausted || estimate < tol {
                let mut v = CVector::zeros(n, prec);
                for (yi, q) in y.iter().zip(&basis) {
                    let neg = Float::with_val(prec, -yi);
                    v.sub_scaled(&neg, &zero, q);
                }
                let nrm = v.norm();
                v.scale_real(&nrm.recip());
                let res = residual(op, &v, &theta);
                let next = (m > 1).then(|| kth_tridiagonal(&alpha, &beta, 1, ctx));
                return Ok(GroundPair { energy: theta, vector: v, next_energy: next, residual: res });
            }
        }
        if basis.len() >= n.min(2000) {
            return Err(Error::NonConvergence { routine: "Lanczos", sweeps: basis.len(), residual: ctx.to_decimal(&b) });
        }
        w.scale_real(&b.clone().recip());
        beta.push(b);
        basis.push(w);
    }
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` below `x`.
fn sturm_count(alpha: &[Float], beta: &[Float], x: &Float, tiny: &Float) -> usize {
    let prec = x.prec();
    let mut count = 0;
    let mut d = Float::with_val(prec, &alpha[0] - x);
    for i in 0..alpha.len() {
        if i > 0 {
            let b2 = Float::with_val(prec, beta[i - 1].clone().square());
            d = Float::with_val(prec, &alpha[i] - x) - b2 / &d;
        }
        if d.is_zero() {
            d.assign(tiny);
        }
        if d.is_sign_negative() {
            count += 1;
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) by bisection.
fn kth_tridiagonal(alpha: &[Float], beta: &[Float], k: usize, ctx: &PrecisionContext) -> Float {
    let prec = ctx.bits();
    let m = alpha.len();
    let mut lo = Float::with_val(prec, rug::float::Special::Infinity);
    let mut hi = Float::with_val(prec, rug::float::Special::NegInfinity);
    for i in 0..m {
        let mut r = Float::new(prec);
        if i > 0 {
            r += &*beta[i - 1].as_abs();
        }
        if i + 1 < m {
            r += &*beta[i].as_abs();
        }
        let l = Float::with_val(prec, &alpha[i] - &r);
        let h = Float::with_val(prec, &alpha[i] + &r);
        if l < lo {
            lo = l;
        }
        if h > hi {
            hi = h;
        }
    }
    let tiny = ctx.epsilon() * ctx.epsilon();
    let width = Float::with_val(prec, &hi - &lo);
    let stop = Float::with_val(prec, &width * ctx.epsilon()) * 4u32;
    while Float::with_val(prec, &hi - &lo) > stop {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(alpha, beta, &mid, &tiny) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Float::with_val(prec, &lo + &hi) / 2u32
}

/// Lowest eigenpair of the tridiagonal: bisection, then inverse iteration
/// with a shift just below the eigenvalue so the factorization stays
/// positive definite.
fn lowest_tridiagonal(alpha: &[Float], beta: &[Float], ctx: &PrecisionContext) -> (Float, Vec<Float>) {
    let prec = ctx.bits();
    let m = alpha.len();
    let theta = kth_tridiagonal(alpha, beta, 0, ctx);
    if m == 1 {
        return (theta, vec![ctx.one()]);
    }
    let scale = alpha.iter().chain(beta.iter()).fold(ctx.one(), |acc, x| if *x.as_abs() > acc { x.clone().abs() } else { acc });
    let shift = Float::with_val(prec, &theta - scale * ctx.pow10(-(ctx.digits() as i32 / 2)));
    let mut y = vec![ctx.one(); m];
    for _ in 0..4 {
        // Solve (T - shift) z = y with LDL^T.
        let mut d = vec![Float::new(prec); m];
        let mut l = vec![Float::new(prec); m];
        d[0] = Float::with_val(prec, &alpha[0] - &shift);
        for i in 1..m {
            l[i] = Float::with_val(prec, &beta[i - 1] / &d[i - 1]);
            d[i] = Float::with_val(prec, &alpha[i] - &shift) - Float::with_val(prec, &l[i] * &beta[i - 1]);
        }
        let mut z = y.clone();
        for i in 1..m {
            let t = Float::with_val(prec, &l[i] * &z[i - 1]);
            z[i] -= t;
        }
        for i in 0..m {
            z[i] /= &d[i];
        }
        for i in (0..m - 1).rev() {
            let t = Float::with_val(prec, &l[i + 1] * &z[i + 1]);
            z[i] -= t;
        }
        let nrm = z.iter().fold(Float::new(prec), |acc, x| acc + x.clone().square()).sqrt();
        y = z.into_iter().map(|x| x / &nrm).collect();
    }
    (theta, y)
}

/// Dense matrix of a Pauli sum on the full `2^n` space (small `n` only).
pub fn dense_operator(terms: &[PauliTerm], n_sites: usize, prec: u32) -> CMatrix {
    let dim = 1usize << n_sites;
    let mut re = Matrix::zeros(dim, dim, prec);
    let mut im = Matrix::zeros(dim, dim, prec);
    for s in 0..dim as u64 {
        for term in terms {
            let (phase, t) = term.string.apply(s);
            let (pr, pi) = phase_value(phase);
            let vr = Float::with_val(prec, &term.re * pr) - Float::with_val(prec, &term.im * pi);
            let vi = Float::with_val(prec, &term.re * pi) + Float::with_val(prec, &term.im * pr);
            *re.get_mut(t as usize, s as usize) += vr;
            *im.get_mut(t as usize, s as usize) += vi;
        }
    }
    CMatrix { re, im }
}
