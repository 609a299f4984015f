use rug::{Assign, Float};

use super::eigen::hermitian_eigen;
use super::matrix::{CMatrix, Matrix};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

/// `V diag(f(lambda)) V^dagger` for Hermitian `h`. `f` returns `None` outside
/// its domain, which is reported with the offending eigenvalue.
pub fn matrix_function(
    h: &CMatrix,
    f: impl Fn(&Float) -> Option<Float>,
    name: &'static str,
    ctx: &PrecisionContext,
) -> Result<CMatrix> {
    let eig = hermitian_eigen(h, ctx)?;
    let n = eig.values.len();
    let prec = ctx.bits();
    let mut fv = Vec::with_capacity(n);
    for v in &eig.values {
        fv.push(f(v).ok_or_else(|| Error::Domain { function: name, value: ctx.to_decimal(v) })?);
    }
    let vr = &eig.vectors.re;
    let vi = &eig.vectors.im;
    let mut re = Matrix::zeros(n, n, prec);
    let mut im = Matrix::zeros(n, n, prec);
    let mut tmp = Float::new(prec);
    let mut acc_re = Float::new(prec);
    let mut acc_im = Float::new(prec);
    // (V D V^dagger)_ij = sum_k f_k V_ik conj(V_jk)
    for j in 0..n {
        for i in 0..=j {
            acc_re.assign(0);
            acc_im.assign(0);
            for k in 0..n {
                let (a, b) = (vr.get(i, k), vi.get(i, k));
                let (c, d) = (vr.get(j, k), vi.get(j, k));
                let mut pr = Float::with_val(prec, a * c);
                tmp.assign(b * d);
                pr += &tmp;
                let mut pi = Float::with_val(prec, b * c);
                tmp.assign(a * d);
                pi -= &tmp;
                pr *= &fv[k];
                pi *= &fv[k];
                acc_re += &pr;
                acc_im += &pi;
            }
            re.set(i, j, &acc_re);
            re.set(j, i, &acc_re);
            im.set(i, j, &acc_im);
            im.set(j, i, Float::with_val(prec, -&acc_im));
        }
    }
    Ok(CMatrix { re, im })
}

/// Natural logarithm, defined for positive arguments.
pub fn log_fn(x: &Float) -> Option<Float> {
    (*x > 0u32).then(|| x.clone().ln())
}

pub fn sqrt_fn(x: &Float) -> Option<Float> {
    (!x.is_sign_negative() || x.is_zero()).then(|| x.clone().abs().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ctx_matrix;

    #[test]
    fn log_of_exp_diagonal() {
        let c = PrecisionContext::new(40).unwrap();
        let h = CMatrix::from_real(ctx_matrix(&c, 2, 2, |i, j| [[2.0, 1.0], [1.0, 2.0]][i][j]));
        // Eigenvalues 1 and 3, eigenvectors (1, -1) and (1, 1).
        let l = matrix_function(&h, log_fn, "log", &c).unwrap();
        let ln3 = Float::with_val(c.bits(), 3).ln();
        let half = Float::with_val(c.bits(), &ln3 / 2u32);
        assert!(Float::with_val(c.bits(), l.re.get(0, 0) - &half).abs() < c.convergence_tol());
        assert!(Float::with_val(c.bits(), l.re.get(0, 1) - &half).abs() < c.convergence_tol());
    }

    #[test]
    fn log_rejects_negative_eigenvalue() {
        let c = PrecisionContext::new(40).unwrap();
        let h = CMatrix::from_real(ctx_matrix(&c, 2, 2, |i, j| if i == j { -1.0 } else { 0.0 }));
        assert!(matches!(matrix_function(&h, log_fn, "log", &c), Err(Error::Domain { .. })));
    }
}
