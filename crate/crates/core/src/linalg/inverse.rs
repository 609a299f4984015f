use rug::{Assign, Float};

use super::matrix::{CMatrix, Matrix};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

/// Gauss-Jordan inversion with full pivoting. Fails with the pivot step if the
/// largest remaining entry falls below `10^-(digits-5)` times the largest
/// entry of the input.
pub fn invert(m: &Matrix, ctx: &PrecisionContext) -> Result<Matrix> {
    let n = m.rows();
    if !m.is_square() {
        return Err(Error::Dimension("invert needs a square matrix".into()));
    }
    let prec = ctx.bits();
    let mut a = m.with_prec(prec);
    let mut inv = Matrix::identity(n, prec);
    let scale = {
        let s = a.max_abs();
        if s.is_zero() { ctx.one() } else { s }
    };
    let threshold = Float::with_val(prec, &scale * ctx.convergence_tol());
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut tmp = Float::new(prec);

    for step in 0..n {
        let (mut pi, mut pj) = (step, step);
        let mut best = Float::new(prec);
        for j in step..n {
            for i in step..n {
                let v = a.get(i, j);
                if v.clone().abs() > best {
                    best.assign(&*v.as_abs());
                    pi = i;
                    pj = j;
                }
            }
        }
        if best <= threshold {
            return Err(Error::Singular { pivot: step, magnitude: ctx.to_decimal(&best) });
        }
        swap_rows(&mut a, step, pi);
        swap_rows(&mut inv, step, pi);
        swap_cols(&mut a, step, pj);
        col_perm.swap(step, pj);

        let pivot = a.get(step, step).clone();
        for j in 0..n {
            a.get_mut(step, j).div_assign_ref(&pivot);
            inv.get_mut(step, j).div_assign_ref(&pivot);
        }
        for i in 0..n {
            if i == step {
                continue;
            }
            let f = a.get(i, step).clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                tmp.assign(&f * a.get(step, j));
                *a.get_mut(i, j) -= &tmp;
                tmp.assign(&f * inv.get(step, j));
                *inv.get_mut(i, j) -= &tmp;
            }
        }
    }
    // A P is reduced to I, so A^-1 = P (row-permuted result).
    let mut out = Matrix::zeros(n, n, prec);
    for (k, &orig) in col_perm.iter().enumerate() {
        for j in 0..n {
            out.set(orig, j, inv.get(k, j));
        }
    }
    Ok(out)
}

/// Complex inverse through the real embedding `[[A, -B], [B, A]]`.
pub fn invert_complex(m: &CMatrix, ctx: &PrecisionContext) -> Result<CMatrix> {
    Ok(CMatrix::from_real_embedding(&invert(&m.real_embedding(), ctx)?))
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols() {
        let x = std::mem::replace(m.get_mut(a, j), Float::new(2));
        let y = std::mem::replace(m.get_mut(b, j), x);
        *m.get_mut(a, j) = y;
    }
}

fn swap_cols(m: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let (x, y) = m.col_pair_mut(lo, hi);
    x.swap_with_slice(y);
}

trait DivRef {
    fn div_assign_ref(&mut self, d: &Float);
}

impl DivRef for Float {
    fn div_assign_ref(&mut self, d: &Float) {
        *self /= d;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ctx_matrix;

    #[test]
    fn inverse_times_matrix_is_identity() {
        let c = PrecisionContext::new(50).unwrap();
        let m = ctx_matrix(&c, 5, 5, |i, j| 1.0 / (i + j + 1) as f64);
        let inv = invert(&m, &c).unwrap();
        let id = Matrix::identity(5, c.bits());
        assert!(m.with_prec(c.bits()).matmul(&inv).unwrap().max_abs_diff(&id) < c.purity_tol());
    }

    #[test]
    fn singular_matrix_names_pivot() {
        let c = PrecisionContext::new(40).unwrap();
        let m = ctx_matrix(&c, 3, 3, |i, j| (i + 1) as f64 * (j + 1) as f64);
        match invert(&m, &c) {
            Err(Error::Singular { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn complex_inverse() {
        let c = PrecisionContext::new(40).unwrap();
        let z = CMatrix::new(
            ctx_matrix(&c, 3, 3, |i, j| if i == j { 2.0 } else { 0.3 }),
            ctx_matrix(&c, 3, 3, |i, j| (i as f64) - (j as f64)),
        )
        .unwrap();
        let inv = invert_complex(&z, &c).unwrap();
        let id = CMatrix::identity(3, c.bits());
        assert!(z.matmul(&inv).unwrap().sub(&id).unwrap().max_abs() < c.purity_tol());
    }
}
