use rug::{Assign, Float};

use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

const MAX_ITERATIONS: usize = 100;

/// Singular value decomposition `A = U diag(sigma) V^T` of a square matrix by
/// Householder bidiagonalization and implicitly shifted QR. Singular values
/// are non-negative and sorted in decreasing order; `U` and `V` are
/// orthogonal even where `sigma` vanishes.
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<Float>,
    pub v: Matrix,
}

pub fn golub_kahan_svd(a: &Matrix, ctx: &PrecisionContext) -> Result<Svd> {
    if !a.is_square() {
        return Err(Error::Dimension("golub_kahan_svd needs a square matrix".into()));
    }
    let prec = ctx.bits();
    let n = a.rows();
    let mut u = a.with_prec(prec);
    let mut w = vec![Float::new(prec); n];
    let mut rv1 = vec![Float::new(prec); n];
    let mut v = Matrix::zeros(n, n, prec);
    bidiagonalize(&mut u, &mut w, &mut rv1, &mut v);
    bidiagonal_qr(&mut w, &mut rv1, &mut u, &mut v, ctx)?;
    Ok(sorted(u, w, v))
}

/// SVD of the upper bidiagonal matrix with diagonal `d` and superdiagonal
/// `e` (`e[i]` couples columns `i-1` and `i`, `e[0]` unused).
pub fn bidiagonal_svd(d: &[Float], e: &[Float], ctx: &PrecisionContext) -> Result<Svd> {
    let prec = ctx.bits();
    let n = d.len();
    let mut w: Vec<Float> = d.iter().map(|x| Float::with_val(prec, x)).collect();
    let mut rv1: Vec<Float> = e.iter().map(|x| Float::with_val(prec, x)).collect();
    rv1[0].assign(0);
    let mut u = Matrix::identity(n, prec);
    let mut v = Matrix::identity(n, prec);
    bidiagonal_qr(&mut w, &mut rv1, &mut u, &mut v, ctx)?;
    Ok(sorted(u, w, v))
}

fn sorted(u: Matrix, w: Vec<Float>, v: Matrix) -> Svd {
    let n = w.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[j].partial_cmp(&w[i]).expect("finite singular values").then(i.cmp(&j)));
    let prec = u.prec();
    Svd {
        u: Matrix::from_fn(u.rows(), n, prec, |i, j| u.get(i, order[j]).clone()),
        sigma: order.iter().map(|&j| w[j].clone()).collect(),
        v: Matrix::from_fn(n, n, prec, |i, j| v.get(i, order[j]).clone()),
    }
}

fn with_sign(magnitude: &Float, sign_of: &Float) -> Float {
    let m = magnitude.clone().abs();
    if sign_of.is_sign_negative() { -m } else { m }
}

/// Householder reduction `A = U B V^T` with `B` upper bidiagonal. On return
/// `a` holds `U`, `w` the diagonal and `rv1` the superdiagonal of `B`.
fn bidiagonalize(a: &mut Matrix, w: &mut [Float], rv1: &mut [Float], v: &mut Matrix) {
    let n = a.rows();
    let prec = a.prec();
    let mut g = Float::new(prec);
    let mut scale = Float::new(prec);
    let mut s = Float::new(prec);
    let mut tmp = Float::new(prec);
    let mut l = 0;
    for i in 0..n {
        l = i + 1;
        rv1[i].assign(&scale * &g);
        g.assign(0);
        s.assign(0);
        scale.assign(0);
        for k in i..n {
            scale += &*a.get(k, i).as_abs();
        }
        if !scale.is_zero() {
            for k in i..n {
                *a.get_mut(k, i) /= &scale;
                tmp.assign(a.get(k, i).clone().square());
                s += &tmp;
            }
            let f = a.get(i, i).clone();
            g = -with_sign(&Float::with_val(prec, s.sqrt_ref()), &f);
            let h = Float::with_val(prec, &f * &g) - &s;
            a.set(i, i, Float::with_val(prec, &f - &g));
            for j in l..n {
                s.assign(0);
                for k in i..n {
                    tmp.assign(a.get(k, i) * a.get(k, j));
                    s += &tmp;
                }
                let f = Float::with_val(prec, &s / &h);
                for k in i..n {
                    tmp.assign(&f * a.get(k, i));
                    *a.get_mut(k, j) += &tmp;
                }
            }
            for k in i..n {
                *a.get_mut(k, i) *= &scale;
            }
        }
        w[i].assign(&scale * &g);
        g.assign(0);
        s.assign(0);
        scale.assign(0);
        if i + 1 != n {
            for k in l..n {
                scale += &*a.get(i, k).as_abs();
            }
            if !scale.is_zero() {
                for k in l..n {
                    *a.get_mut(i, k) /= &scale;
                    tmp.assign(a.get(i, k).clone().square());
                    s += &tmp;
                }
                let f = a.get(i, l).clone();
                g = -with_sign(&Float::with_val(prec, s.sqrt_ref()), &f);
                let h = Float::with_val(prec, &f * &g) - &s;
                a.set(i, l, Float::with_val(prec, &f - &g));
                for k in l..n {
                    rv1[k].assign(a.get(i, k) / &h);
                }
                for j in l..n {
                    s.assign(0);
                    for k in l..n {
                        tmp.assign(a.get(j, k) * a.get(i, k));
                        s += &tmp;
                    }
                    for k in l..n {
                        tmp.assign(&s * &rv1[k]);
                        *a.get_mut(j, k) += &tmp;
                    }
                }
                for k in l..n {
                    *a.get_mut(i, k) *= &scale;
                }
            }
        }
    }
    // Right-hand transformations.
    for i in (0..n).rev() {
        if i + 1 < n {
            if !g.is_zero() {
                for j in l..n {
                    let val = Float::with_val(prec, a.get(i, j) / a.get(i, l)) / &g;
                    v.set(j, i, val);
                }
                for j in l..n {
                    s.assign(0);
                    for k in l..n {
                        tmp.assign(a.get(i, k) * v.get(k, j));
                        s += &tmp;
                    }
                    for k in l..n {
                        tmp.assign(&s * v.get(k, i));
                        *v.get_mut(k, j) += &tmp;
                    }
                }
            }
            for j in l..n {
                v.set(i, j, 0);
                v.set(j, i, 0);
            }
        }
        v.set(i, i, 1);
        g.assign(&rv1[i]);
        l = i;
    }
    // Left-hand transformations.
    for i in (0..n).rev() {
        let l = i + 1;
        g.assign(&w[i]);
        for j in l..n {
            a.set(i, j, 0);
        }
        if !g.is_zero() {
            g.recip_mut();
            for j in l..n {
                s.assign(0);
                for k in l..n {
                    tmp.assign(a.get(k, i) * a.get(k, j));
                    s += &tmp;
                }
                let f = Float::with_val(prec, &s / a.get(i, i)) * &g;
                for k in i..n {
                    tmp.assign(&f * a.get(k, i));
                    *a.get_mut(k, j) += &tmp;
                }
            }
            for j in i..n {
                *a.get_mut(j, i) *= &g;
            }
        } else {
            for j in i..n {
                a.set(j, i, 0);
            }
        }
        *a.get_mut(i, i) += 1u32;
    }
}

/// Rotates columns `p` and `q`: `(x, z) <- (x c + z s, z c - x s)`.
fn rotate(m: &mut Matrix, p: usize, q: usize, c: &Float, s: &Float, tmp: &mut Float) {
    let (lo, hi, swap) = if p < q { (p, q, false) } else { (q, p, true) };
    let (cl, ch) = m.col_pair_mut(lo, hi);
    let (cp, cq) = if swap { (ch, cl) } else { (cl, ch) };
    let mut x = Float::new(tmp.prec());
    for (xp, zq) in cp.iter_mut().zip(cq.iter_mut()) {
        if xp.is_zero() && zq.is_zero() {
            continue;
        }
        x.assign(&*xp);
        xp.assign(&x * c);
        tmp.assign(&*zq * s);
        *xp += &*tmp;
        *zq *= c;
        tmp.assign(&x * s);
        *zq -= &*tmp;
    }
}

/// Implicit-shift QR on the bidiagonal `(w, rv1)`, accumulating left
/// rotations into `u` and right rotations into `v`.
fn bidiagonal_qr(w: &mut [Float], rv1: &mut [Float], u: &mut Matrix, v: &mut Matrix, ctx: &PrecisionContext) -> Result<()> {
    let n = w.len();
    let prec = ctx.bits();
    let mut anorm = Float::new(prec);
    for i in 0..n {
        let t = Float::with_val(prec, &*w[i].as_abs()) + &*rv1[i].as_abs();
        if t > anorm {
            anorm = t;
        }
    }
    let small = Float::with_val(prec, &anorm * ctx.epsilon());
    let mut tmp = Float::new(prec);
    for k in (0..n).rev() {
        let mut its = 0;
        loop {
            // Find l such that rv1[l] is negligible (split) or w[l-1] is.
            let mut flag = true;
            let mut l = k;
            loop {
                if l == 0 || *rv1[l].as_abs() <= small {
                    flag = false;
                    break;
                }
                if *w[l - 1].as_abs() <= small {
                    break;
                }
                l -= 1;
            }
            if flag {
                // w[l-1] is negligible: chase rv1[l] out with left rotations.
                let nm = l - 1;
                let mut c = Float::new(prec);
                let mut s = Float::with_val(prec, 1);
                for i in l..=k {
                    let f = Float::with_val(prec, &s * &rv1[i]);
                    rv1[i] *= &c;
                    if *f.as_abs() <= small {
                        break;
                    }
                    let g = w[i].clone();
                    let h = Float::with_val(prec, f.hypot_ref(&g));
                    w[i].assign(&h);
                    let hinv = h.recip();
                    c = Float::with_val(prec, &g * &hinv);
                    s = -(f * &hinv);
                    rotate(u, nm, i, &c, &s, &mut tmp);
                }
            }
            let z = w[k].clone();
            if l == k {
                if z.is_sign_negative() && !z.is_zero() {
                    w[k] = -z;
                    for x in v.col_mut(k) {
                        *x = -x.clone();
                    }
                }
                break;
            }
            its += 1;
            if its == MAX_ITERATIONS {
                return Err(Error::NonConvergence {
                    routine: "bidiagonal QR",
                    sweeps: its,
                    residual: ctx.to_decimal(&rv1[k]),
                });
            }
            // Wilkinson-type shift from the trailing 2x2 block.
            let mut x = w[l].clone();
            let nm = k - 1;
            let mut y = w[nm].clone();
            let mut g = rv1[nm].clone();
            let mut h = rv1[k].clone();
            let mut f = {
                let a = Float::with_val(prec, &y - &z) * Float::with_val(prec, &y + &z);
                let b = Float::with_val(prec, &g - &h) * Float::with_val(prec, &g + &h);
                (a + b) / (Float::with_val(prec, &h * &y) * 2u32)
            };
            g = Float::with_val(prec, f.hypot_ref(&Float::with_val(prec, 1)));
            f = {
                let a = Float::with_val(prec, &x - &z) * Float::with_val(prec, &x + &z);
                let denom = Float::with_val(prec, &f + &with_sign(&g, &f));
                let b = Float::with_val(prec, &y / &denom) - &h;
                (a + Float::with_val(prec, &h * &b)) / &x
            };
            let mut c = Float::with_val(prec, 1);
            let mut s = Float::with_val(prec, 1);
            for j in l..=nm {
                let i = j + 1;
                g = rv1[i].clone();
                y = w[i].clone();
                h = Float::with_val(prec, &s * &g);
                g *= &c;
                let mut zz = Float::with_val(prec, f.hypot_ref(&h));
                rv1[j].assign(&zz);
                c = Float::with_val(prec, &f / &zz);
                s = Float::with_val(prec, &h / &zz);
                f = Float::with_val(prec, &x * &c) + Float::with_val(prec, &g * &s);
                g = Float::with_val(prec, &g * &c) - Float::with_val(prec, &x * &s);
                h = Float::with_val(prec, &y * &s);
                y *= &c;
                rotate(v, j, i, &c, &s, &mut tmp);
                zz = Float::with_val(prec, f.hypot_ref(&h));
                w[j].assign(&zz);
                if !zz.is_zero() {
                    zz.recip_mut();
                    c = Float::with_val(prec, &f * &zz);
                    s = Float::with_val(prec, &h * &zz);
                }
                f = Float::with_val(prec, &c * &g) + Float::with_val(prec, &s * &y);
                x = Float::with_val(prec, &c * &y) - Float::with_val(prec, &s * &g);
                rotate(u, j, i, &c, &s, &mut tmp);
            }
            rv1[l].assign(0);
            rv1[k].assign(&f);
            w[k].assign(&x);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ctx_matrix;

    fn check(a: &Matrix, svd: &Svd, ctx: &PrecisionContext) {
        let n = a.rows();
        let mut d = Matrix::zeros(n, n, ctx.bits());
        for i in 0..n {
            d.set(i, i, &svd.sigma[i]);
        }
        let rec = svd.u.matmul(&d).unwrap().matmul(&svd.v.transpose()).unwrap();
        assert!(rec.max_abs_diff(a) < ctx.convergence_tol());
        let id = Matrix::identity(n, ctx.bits());
        assert!(svd.u.transpose().matmul(&svd.u).unwrap().max_abs_diff(&id) < ctx.convergence_tol());
        assert!(svd.v.transpose().matmul(&svd.v).unwrap().max_abs_diff(&id) < ctx.convergence_tol());
        for w in svd.sigma.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn dense_matrix() {
        let c = PrecisionContext::new(60).unwrap();
        let a = ctx_matrix(&c, 7, 7, |i, j| ((i * 7 + j * 3) as f64).sin());
        let svd = golub_kahan_svd(&a, &c).unwrap();
        check(&a, &svd, &c);
        let jac = crate::linalg::one_sided_jacobi(&a, &c, false).unwrap();
        for (x, y) in svd.sigma.iter().zip(&jac.sigma) {
            assert!(Float::with_val(c.bits(), x - y).abs() < c.convergence_tol());
        }
    }

    #[test]
    fn rank_deficient_matrix() {
        let c = PrecisionContext::new(40).unwrap();
        let a = ctx_matrix(&c, 5, 5, |i, j| ((i + 1) * (j + 2)) as f64);
        let svd = golub_kahan_svd(&a, &c).unwrap();
        check(&a, &svd, &c);
        assert!(svd.sigma[1].clone().abs() < c.convergence_tol());
    }

    #[test]
    fn clustered_singular_values() {
        // Values 1 - 10^-k: one-sided Jacobi converges only linearly here.
        let c = PrecisionContext::new(120).unwrap();
        let n = 6;
        let mut q = ctx_matrix(&c, n, n, |i, j| ((i * 5 + j * 11) as f64).cos() + if i == j { 2.0 } else { 0.0 });
        crate::linalg::svd::orthonormalize_columns(&mut q);
        let mut d = Matrix::zeros(n, n, c.bits());
        for i in 0..n {
            d.set(i, i, c.one() - c.pow10(-(20 * i as i32 + 10)));
        }
        let a = q.matmul(&d).unwrap().matmul(&q.transpose()).unwrap();
        let svd = golub_kahan_svd(&a, &c).unwrap();
        check(&a, &svd, &c);
        for i in 0..n {
            let gap = Float::with_val(c.bits(), 1u32 - &svd.sigma[n - 1 - i]);
            let expect = c.pow10(-(20 * i as i32 + 10));
            let rel = (gap / &expect - 1u32).abs();
            assert!(rel < c.pow10(-(115 - 20 * i as i32 - 10)), "level {i}");
        }
    }

    #[test]
    fn bidiagonal_input() {
        let c = PrecisionContext::new(40).unwrap();
        let d: Vec<Float> = [3.0, 2.0, 0.0, 1.0].iter().map(|&x| c.float(x)).collect();
        let e: Vec<Float> = [0.0, 0.5, 0.25, 0.125].iter().map(|&x| c.float(x)).collect();
        let svd = bidiagonal_svd(&d, &e, &c).unwrap();
        let b = Matrix::from_fn(4, 4, c.bits(), |i, j| {
            if i == j { d[i].clone() } else if j == i + 1 { e[j].clone() } else { c.zero() }
        });
        check(&b, &svd, &c);
    }
}
