use rug::{Assign, Float};

use super::golub_kahan::{bidiagonal_svd, golub_kahan_svd, Svd};
use super::matrix::{Matrix, SkewMatrix};
use crate::error::Result;
use crate::precision::PrecisionContext;

/// Real Schur form of an antisymmetric matrix:
/// `S = U (+)_k [[0, -e_k], [e_k, 0]] U^T`.
///
/// Column `2k` of `U` is `a_k`, column `2k + 1` is `b_k`, with `S a_k = e_k b_k`
/// and `S b_k = -e_k a_k`. Block values are non-negative and sorted in
/// decreasing order. Each block is rotated within its plane so that at the
/// first coordinate it touches, `a_k` is positive and `b_k` is zero.
#[derive(Clone, Debug)]
pub struct SchurForm {
    pub rotation: Matrix,
    pub block_values: Vec<Float>,
}

impl SchurForm {
    pub fn blocks(&self) -> usize {
        self.block_values.len()
    }

    pub fn a(&self, k: usize) -> &[Float] {
        self.rotation.col(2 * k)
    }

    pub fn b(&self, k: usize) -> &[Float] {
        self.rotation.col(2 * k + 1)
    }

    /// `sum_k w_k (b_k a_k^T - a_k b_k^T)`; with `w = block_values` this
    /// reconstructs the decomposed matrix.
    pub fn assemble(&self, weights: &[Float]) -> SkewMatrix {
        assert_eq!(weights.len(), self.blocks());
        let n = self.rotation.rows();
        let prec = self.rotation.prec();
        let mut out = SkewMatrix::zeros(n, prec).expect("schur rotation has even dimension");
        // P has columns w_k b_k and -w_k a_k, so that out = P U^T.
        let mut p = Matrix::zeros(n, n, prec);
        for (k, w) in weights.iter().enumerate() {
            for i in 0..n {
                p.set(i, 2 * k, Float::with_val(prec, self.b(k)[i].clone() * w));
                p.set(i, 2 * k + 1, Float::with_val(prec, -(self.a(k)[i].clone() * w)));
            }
        }
        let mut acc = Float::new(prec);
        let mut tmp = Float::new(prec);
        for j in 0..n {
            for i in j + 1..n {
                acc.assign(0);
                for c in 0..n {
                    let x = p.get(i, c);
                    if x.is_zero() {
                        continue;
                    }
                    let y = self.rotation.get(j, c);
                    if y.is_zero() {
                        continue;
                    }
                    tmp.assign(x * y);
                    acc += &tmp;
                }
                out.set(i, j, &acc);
            }
        }
        out
    }

    /// `sum_k w_k (a_k a_k^T + b_k b_k^T)`.
    pub fn assemble_symmetric(&self, weights: &[Float]) -> Matrix {
        assert_eq!(weights.len(), self.blocks());
        let n = self.rotation.rows();
        let prec = self.rotation.prec();
        let scaled = Matrix::from_fn(n, n, prec, |i, c| Float::with_val(prec, self.rotation.get(i, c) * &weights[c / 2]));
        let mut out = Matrix::zeros(n, n, prec);
        let mut tmp = Float::new(prec);
        for j in 0..n {
            for i in j..n {
                let mut acc = Float::new(prec);
                for c in 0..n {
                    tmp.assign(scaled.get(i, c) * self.rotation.get(j, c));
                    acc += &tmp;
                }
                out.set(j, i, &acc);
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn reconstruct(&self) -> SkewMatrix {
        self.assemble(&self.block_values)
    }

    /// Flips the orientation of block `k` by swapping `a_k` and `b_k`. This
    /// negates the block's contribution and the determinant of `U`.
    pub fn swap_block(&mut self, k: usize) {
        let n = self.rotation.rows();
        for i in 0..n {
            let a = self.rotation.get(i, 2 * k).clone();
            let b = self.rotation.get(i, 2 * k + 1).clone();
            self.rotation.set(i, 2 * k, b);
            self.rotation.set(i, 2 * k + 1, a);
        }
    }

    /// Sign of `det U`, evaluated in double precision (exact for an orthogonal
    /// matrix accurate far beyond double precision).
    pub fn det_sign(&self) -> i32 {
        let d = self.rotation.to_nalgebra().determinant();
        if d >= 0.0 { 1 } else { -1 }
    }
}

/// Decomposes an antisymmetric matrix into real Schur form.
///
/// When the graph of exact nonzeros of `S` is bipartite with balanced colour
/// classes, `S` is a permutation of `[[0, B], [-B^T, 0]]` and the SVD of `B`
/// gives the blocks directly. Otherwise `S` is first reduced to
/// skew-tridiagonal form by Householder reflections, whose even/odd
/// interleaving is again of that shape with `B` bidiagonal. Both routes use
/// implicitly shifted QR, which stays quadratically convergent when block
/// values cluster near each other.
pub fn skew_schur(s: &SkewMatrix, ctx: &PrecisionContext) -> Result<SchurForm> {
    skew_schur_with(s, ctx, true)
}

/// As [`skew_schur`]; `allow_bipartite = false` forces the tridiagonal path.
pub fn skew_schur_with(s: &SkewMatrix, ctx: &PrecisionContext, allow_bipartite: bool) -> Result<SchurForm> {
    let s = s.with_prec(ctx.bits());
    let mut form = match allow_bipartite.then(|| bipartition(&s)).flatten() {
        Some((even, odd)) => bipartite_schur(&s, &even, &odd, ctx)?,
        None => tridiagonal_schur(&s, ctx)?,
    };
    orient(&mut form, ctx);
    Ok(form)
}

/// Colour classes of the graph of exact nonzeros, if it is 2-colourable with
/// equal class sizes.
fn bipartition(s: &SkewMatrix) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = s.dim();
    let mut colour: Vec<Option<u8>> = vec![None; n];
    let mut sizes = [0usize; 2];
    for start in 0..n {
        if colour[start].is_some() {
            continue;
        }
        let isolated = (0..n).all(|j| s.get(start, j).is_zero());
        let c0 = if isolated && sizes[1] < sizes[0] { 1 } else { 0 };
        colour[start] = Some(c0);
        sizes[c0 as usize] += 1;
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let ci = colour[i].unwrap();
            for j in 0..n {
                if j == i || s.get(i, j).is_zero() {
                    continue;
                }
                match colour[j] {
                    Some(cj) if cj == ci => return None,
                    Some(_) => {}
                    None => {
                        colour[j] = Some(1 - ci);
                        sizes[1 - ci as usize] += 1;
                        stack.push(j);
                    }
                }
            }
        }
    }
    if sizes[0] != sizes[1] {
        return None;
    }
    let even = (0..n).filter(|&i| colour[i] == Some(0)).collect();
    let odd = (0..n).filter(|&i| colour[i] == Some(1)).collect();
    Some((even, odd))
}

/// Blocks from `B = X diag(sigma) Y^T`: `a = (0, y)`, `b = (x, 0)` in the
/// `(even, odd)` split, so that `S a = sigma b`.
fn blocks_from_svd(n: usize, even: &[usize], odd: &[usize], svd: &Svd, prec: u32) -> SchurForm {
    let p = even.len();
    let mut rotation = Matrix::zeros(n, n, prec);
    for k in 0..p {
        for (r, &i) in odd.iter().enumerate() {
            rotation.set(i, 2 * k, svd.v.get(r, k));
        }
        for (r, &i) in even.iter().enumerate() {
            rotation.set(i, 2 * k + 1, svd.u.get(r, k));
        }
    }
    SchurForm { rotation, block_values: svd.sigma.clone() }
}

fn bipartite_schur(s: &SkewMatrix, even: &[usize], odd: &[usize], ctx: &PrecisionContext) -> Result<SchurForm> {
    let b = s.as_matrix().submatrix(even, odd);
    let svd = golub_kahan_svd(&b, ctx)?;
    Ok(blocks_from_svd(s.dim(), even, odd, &svd, ctx.bits()))
}

fn tridiagonal_schur(s: &SkewMatrix, ctx: &PrecisionContext) -> Result<SchurForm> {
    let prec = ctx.bits();
    let n = s.dim();
    let (q, sub) = skew_tridiagonalize(s.as_matrix());
    // T[k+1][k] = sub[k]. In the (even, odd) split T[E, O] is lower
    // bidiagonal with B[i][i] = -sub[2i] and B[i][i-1] = sub[2i-1]; its
    // transpose is the upper bidiagonal handed to the QR iteration.
    let p = n / 2;
    let d: Vec<Float> = (0..p).map(|i| -sub[2 * i].clone()).collect();
    let e: Vec<Float> = (0..p).map(|i| if i == 0 { Float::new(prec) } else { sub[2 * i - 1].clone() }).collect();
    let svd_t = bidiagonal_svd(&d, &e, ctx)?;
    // B^T = U' S V'^T, so B = V' S U'^T.
    let svd = Svd { u: svd_t.v, sigma: svd_t.sigma, v: svd_t.u };
    let even: Vec<usize> = (0..p).map(|i| 2 * i).collect();
    let odd: Vec<usize> = (0..p).map(|i| 2 * i + 1).collect();
    let local = blocks_from_svd(n, &even, &odd, &svd, prec);
    Ok(SchurForm { rotation: q.matmul(&local.rotation)?, block_values: local.block_values })
}

/// Householder reduction `S = Q T Q^T` with `T` skew-tridiagonal. Returns `Q`
/// and the subdiagonal `T[k+1][k]`.
///
/// With `H = I - tau v v^T` and `w = tau S v`, antisymmetry gives
/// `H S H = S + v w^T - w v^T`.
fn skew_tridiagonalize(s: &Matrix) -> (Matrix, Vec<Float>) {
    let n = s.rows();
    let prec = s.prec();
    let mut a = s.clone();
    let mut q = Matrix::identity(n, prec);
    let mut sub = vec![Float::new(prec); n.saturating_sub(1)];
    let mut tmp = Float::new(prec);
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        // x = A[k+1.., k]
        let x: Vec<Float> = (k + 1..n).map(|i| a.get(i, k).clone()).collect();
        let mut sigma2 = Float::new(prec);
        for xi in &x[1..] {
            sigma2 += xi.clone().square();
        }
        if sigma2.is_zero() {
            sub[k].assign(&x[0]);
            continue;
        }
        let alpha = {
            let nrm = Float::with_val(prec, &sigma2 + x[0].clone().square()).sqrt();
            // Reflect onto -sign(x0) |x| e1 to avoid cancellation.
            if x[0].is_sign_negative() { nrm } else { -nrm }
        };
        let mut v = x;
        v[0] -= &alpha;
        let vtv = Float::with_val(prec, &sigma2 + v[0].clone().square());
        let tau = Float::with_val(prec, 2u32) / vtv;
        // w = tau * A[k+1.., k+1..] v
        let mut w = vec![Float::new(prec); m];
        for (c, vc) in v.iter().enumerate() {
            if vc.is_zero() {
                continue;
            }
            let col = a.col(k + 1 + c);
            for (r, wr) in w.iter_mut().enumerate() {
                tmp.assign(&col[k + 1 + r] * vc);
                *wr += &tmp;
            }
        }
        for wr in w.iter_mut() {
            *wr *= &tau;
        }
        // A <- A + v w^T - w v^T on the trailing block (kept exactly skew).
        for c in 0..m {
            for r in c + 1..m {
                let mut val = a.get(k + 1 + r, k + 1 + c).clone();
                tmp.assign(&v[r] * &w[c]);
                val += &tmp;
                tmp.assign(&w[r] * &v[c]);
                val -= &tmp;
                a.set(k + 1 + r, k + 1 + c, &val);
                a.set(k + 1 + c, k + 1 + r, -val);
            }
        }
        a.set(k + 1, k, &alpha);
        a.set(k, k + 1, Float::with_val(prec, -&alpha));
        for r in k + 2..n {
            a.set(r, k, 0);
            a.set(k, r, 0);
        }
        sub[k].assign(&alpha);
        // Q <- Q H = Q - tau (Q v) v^T
        for r in 0..n {
            let mut qv = Float::new(prec);
            for (c, vc) in v.iter().enumerate() {
                tmp.assign(q.get(r, k + 1 + c) * vc);
                qv += &tmp;
            }
            qv *= &tau;
            for (c, vc) in v.iter().enumerate() {
                tmp.assign(&qv * vc);
                *q.get_mut(r, k + 1 + c) -= &tmp;
            }
        }
    }
    if n >= 2 {
        sub[n - 2].assign(a.get(n - 1, n - 2));
    }
    (q, sub)
}

/// Rotates each block within its plane so that, at the first coordinate
/// where the plane has weight above `sqrt(eps)`, `a_k` is positive and `b_k`
/// vanishes. In-plane rotations preserve `S a = e b` and `det U`.
fn orient(form: &mut SchurForm, ctx: &PrecisionContext) {
    let prec = ctx.bits();
    let thr = ctx.epsilon().sqrt();
    let n = form.rotation.rows();
    let mut tmp = Float::new(prec);
    for k in 0..form.blocks() {
        let found = (0..n).find_map(|i| {
            let r = Float::with_val(prec, form.rotation.get(i, 2 * k).hypot_ref(form.rotation.get(i, 2 * k + 1)));
            (r > thr).then_some((i, r))
        });
        let Some((i, r)) = found else { continue };
        let c = Float::with_val(prec, form.rotation.get(i, 2 * k) / &r);
        let s = Float::with_val(prec, form.rotation.get(i, 2 * k + 1) / &r);
        let (ca, cb) = form.rotation.col_pair_mut(2 * k, 2 * k + 1);
        for (a, b) in ca.iter_mut().zip(cb.iter_mut()) {
            let a0 = a.clone();
            // a' = c a + s b, b' = c b - s a
            a.assign(&c * &a0);
            tmp.assign(&s * &*b);
            *a += &tmp;
            *b *= &c;
            tmp.assign(&s * &a0);
            *b -= &tmp;
        }
        form.rotation.set(i, 2 * k + 1, 0);
    }
}
