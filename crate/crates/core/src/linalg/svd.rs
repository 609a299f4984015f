use rug::{Assign, Float};

use super::matrix::{dot_into, Matrix};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

pub const MAX_SWEEPS: usize = 30;

/// Result of one-sided Jacobi: `A V = W` with mutually orthogonal columns of
/// `W`, sorted by decreasing norm. `sigma[j] = |W[:, j]|`.
pub struct JacobiSvd {
    pub w: Matrix,
    pub v: Matrix,
    pub sigma: Vec<Float>,
}

/// Hestenes one-sided Jacobi on the columns of `a`.
///
/// If `warm_start` is set the right factor is first seeded from a double
/// precision SVD and re-orthonormalized at working precision, which cuts the
/// number of high-precision sweeps roughly in half.
pub fn one_sided_jacobi(a: &Matrix, ctx: &PrecisionContext, warm_start: bool) -> Result<JacobiSvd> {
    let prec = ctx.bits();
    let n = a.cols();
    let (mut w, mut v) = if warm_start && n > 2 {
        let v0 = warm_right_factor(a, prec);
        (a.with_prec(prec).matmul(&v0)?, v0)
    } else {
        (a.with_prec(prec), Matrix::identity(n, prec))
    };

    let tol = Float::with_val(prec, ctx.epsilon() * (4 * n.max(1)) as u32);
    let mut norms: Vec<Float> = vec![Float::new(prec); n];
    let mut gamma = Float::new(prec);
    let mut tmp = Float::new(prec);
    let mut bound = Float::new(prec);
    let mut sweeps = 0;
    loop {
        for j in 0..n {
            dot_into(&mut norms[j], w.col(j), w.col(j), &mut tmp);
        }
        let mut rotated = false;
        let mut worst = Float::new(prec);
        for p in 0..n {
            for q in p + 1..n {
                if norms[p].is_zero() || norms[q].is_zero() {
                    continue;
                }
                dot_into(&mut gamma, w.col(p), w.col(q), &mut tmp);
                bound.assign(&norms[p] * &norms[q]);
                bound.sqrt_mut();
                let rel = Float::with_val(prec, &*gamma.as_abs()) / &bound;
                if rel > worst {
                    worst = rel.clone();
                }
                if rel <= tol {
                    continue;
                }
                rotated = true;
                let (c, s, t) = rotation(&norms[p], &norms[q], &gamma, prec);
                rotate_cols(&mut w, p, q, &c, &s, &mut tmp);
                rotate_cols(&mut v, p, q, &c, &s, &mut tmp);
                tmp.assign(&t * &gamma);
                norms[p] -= &tmp;
                norms[q] += &tmp;
            }
        }
        if !rotated {
            break;
        }
        sweeps += 1;
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence {
                routine: "one-sided Jacobi",
                sweeps,
                residual: ctx.to_decimal(&worst),
            });
        }
    }

    let sigma: Vec<Float> = (0..n).map(|j| super::matrix::norm(w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).expect("finite norms").then(i.cmp(&j)));
    let w = Matrix::from_fn(w.rows(), n, prec, |i, j| w.get(i, order[j]).clone());
    let v = Matrix::from_fn(n, n, prec, |i, j| v.get(i, order[j]).clone());
    let sigma = order.iter().map(|&j| sigma[j].clone()).collect();
    Ok(JacobiSvd { w, v, sigma })
}

/// Rotation that orthogonalizes two columns with Gram entries `alpha`, `beta`,
/// `gamma`. Returns `(c, s, t)` with `t = s / c`.
fn rotation(alpha: &Float, beta: &Float, gamma: &Float, prec: u32) -> (Float, Float, Float) {
    let zeta = Float::with_val(prec, beta - alpha) / Float::with_val(prec, gamma * 2u32);
    let root = Float::with_val(prec, zeta.clone().square() + 1u32).sqrt();
    let mut t = (Float::with_val(prec, &*zeta.as_abs()) + root).recip();
    if zeta.is_sign_negative() {
        t = -t;
    }
    let c = Float::with_val(prec, t.clone().square() + 1u32).sqrt().recip();
    let s = Float::with_val(prec, &t * &c);
    (c, s, t)
}

/// `col_p <- c col_p - s col_q`, `col_q <- s col_p + c col_q`.
fn rotate_cols(m: &mut Matrix, p: usize, q: usize, c: &Float, s: &Float, tmp: &mut Float) {
    let (cp, cq) = m.col_pair_mut(p, q);
    let prec = tmp.prec();
    let mut x = Float::new(prec);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        if a.is_zero() && b.is_zero() {
            continue;
        }
        x.assign(&*a);
        a.assign(c * &x);
        tmp.assign(s * &*b);
        *a -= &*tmp;
        *b *= c;
        tmp.assign(s * &x);
        *b += &*tmp;
    }
}

/// Right singular vectors from a double-precision SVD, orthonormalized at
/// working precision by two passes of modified Gram-Schmidt.
fn warm_right_factor(a: &Matrix, prec: u32) -> Matrix {
    let a64 = a.to_nalgebra();
    let n = a.cols();
    let svd = nalgebra::linalg::SVD::new(a64.clone(), false, true);
    let vt = match svd.v_t {
        Some(vt) if vt.nrows() == n && vt.iter().all(|x| x.is_finite()) => vt,
        _ => return Matrix::identity(n, prec),
    };
    let mut v = Matrix::from_f64(n, n, prec, |i, j| vt[(j, i)]);
    orthonormalize_columns(&mut v);
    v
}

/// Two passes of modified Gram-Schmidt over the columns, in order.
pub(crate) fn orthonormalize_columns(v: &mut Matrix) {
    let prec = v.prec();
    let n = v.cols();
    let mut d = Float::new(prec);
    let mut tmp = Float::new(prec);
    for _pass in 0..2 {
        for j in 0..n {
            for k in 0..j {
                let (ck, cj) = v.col_pair_mut(k, j);
                dot_into(&mut d, ck, cj, &mut tmp);
                super::matrix::axpy_neg(cj, &d, ck, &mut tmp);
            }
            let nrm = super::matrix::norm(v.col(j));
            for x in v.col_mut(j) {
                *x /= &nrm;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ctx_matrix;

    #[test]
    fn singular_values_of_known_matrix() {
        let c = PrecisionContext::new(40).unwrap();
        // [[3, 0], [4, 5]] has singular values sqrt(45) and sqrt(5).
        let a = ctx_matrix(&c, 2, 2, |i, j| [[3.0, 0.0], [4.0, 5.0]][i][j]);
        for warm in [false, true] {
            let r = one_sided_jacobi(&a, &c, warm).unwrap();
            let s0 = Float::with_val(c.bits(), 45).sqrt();
            let s1 = Float::with_val(c.bits(), 5).sqrt();
            assert!((r.sigma[0].clone() - s0).abs() < c.convergence_tol());
            assert!((r.sigma[1].clone() - s1).abs() < c.convergence_tol());
            let av = a.matmul(&r.v).unwrap();
            assert!(av.max_abs_diff(&r.w) < c.convergence_tol());
        }
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let c = PrecisionContext::new(60).unwrap();
        let a = ctx_matrix(&c, 6, 6, |i, j| ((i * 5 + j * 11) as f64).cos() + if i == j { 1.0 } else { 0.0 });
        let cold = one_sided_jacobi(&a, &c, false).unwrap();
        let warm = one_sided_jacobi(&a, &c, true).unwrap();
        for (x, y) in cold.sigma.iter().zip(&warm.sigma) {
            assert!(Float::with_val(c.bits(), x - y).abs() < c.convergence_tol());
        }
    }
}
