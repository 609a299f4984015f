use rug::{Assign, Float};

use super::matrix::{CMatrix, Matrix};
use crate::error::{Error, Result};
use crate::precision::PrecisionContext;

/// Clustered spectra (`nu` near +-1) converge only linearly for ~30 sweeps
/// before the quadratic phase sets in.
pub const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `H = V diag(values) V^dagger` with values ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<Float>,
    pub vectors: CMatrix,
}

/// Cyclic two-sided Jacobi for a Hermitian matrix `re + i im` (`re` symmetric,
/// `im` antisymmetric). Purely real input runs a real-arithmetic path.
pub fn hermitian_eigen(h: &CMatrix, ctx: &PrecisionContext) -> Result<HermitianEigen> {
    let n = h.rows();
    if h.cols() != n {
        return Err(Error::Dimension("hermitian_eigen needs a square matrix".into()));
    }
    let prec = ctx.bits();
    let mut a = Work {
        n,
        re: h.re.with_prec(prec),
        im: h.im.with_prec(prec),
        v_re: Matrix::identity(n, prec),
        v_im: Matrix::zeros(n, n, prec),
        real: h.im.is_zero(),
    };
    // Hermitize so rounding in the input cannot bias the rotations.
    a.symmetrize();

    let scale = Float::with_val(prec, a.re.frobenius().hypot(&a.im.frobenius()));
    let tol = Float::with_val(prec, &scale * ctx.epsilon()) * (n.max(1) as u32);
    let mut off = a.off_norm();
    let mut sweeps = 0;
    while off > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NonConvergence {
                routine: "hermitian_eigen",
                sweeps,
                residual: ctx.to_decimal(&off),
            });
        }
        let skip = Float::with_val(prec, &tol / (n as u32));
        for p in 0..n {
            for q in p + 1..n {
                a.rotate(p, q, &skip);
            }
        }
        off = a.off_norm();
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.re.get(i, i).partial_cmp(a.re.get(j, j)).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a.re.get(i, i).clone()).collect();
    let vectors = CMatrix {
        re: Matrix::from_fn(n, n, prec, |i, j| a.v_re.get(i, order[j]).clone()),
        im: Matrix::from_fn(n, n, prec, |i, j| a.v_im.get(i, order[j]).clone()),
    };
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(h: &CMatrix, ctx: &PrecisionContext) -> Result<Vec<Float>> {
    Ok(hermitian_eigen(h, ctx)?.values)
}

struct Work {
    n: usize,
    re: Matrix,
    im: Matrix,
    v_re: Matrix,
    v_im: Matrix,
    real: bool,
}

impl Work {
    fn symmetrize(&mut self) {
        for j in 0..self.n {
            self.im.get_mut(j, j).assign(0);
            for i in j + 1..self.n {
                let r = Float::with_val(self.re.prec(), self.re.get(i, j) + self.re.get(j, i)) / 2u32;
                let m = Float::with_val(self.re.prec(), self.im.get(i, j) - self.im.get(j, i)) / 2u32;
                self.re.set(i, j, &r);
                self.re.set(j, i, &r);
                self.im.set(i, j, &m);
                self.im.set(j, i, -m);
            }
        }
    }

    fn off_norm(&self) -> Float {
        let mut acc = Float::new(self.re.prec());
        for j in 0..self.n {
            for i in j + 1..self.n {
                acc += self.re.get(i, j).clone().square();
                if !self.real {
                    acc += self.im.get(i, j).clone().square();
                }
            }
        }
        (acc * 2u32).sqrt()
    }

    /// Annihilates entry `(p, q)` with `G = diag(1, conj(w)) R(c, s)` where
    /// `w = a_pq / |a_pq|`.
    fn rotate(&mut self, p: usize, q: usize, skip: &Float) {
        let prec = self.re.prec();
        let apq_re = self.re.get(p, q).clone();
        let apq_im = if self.real { Float::new(prec) } else { self.im.get(p, q).clone() };
        let mag = Float::with_val(prec, apq_re.hypot_ref(&apq_im));
        if mag <= *skip {
            return;
        }
        let w_re = Float::with_val(prec, &apq_re / &mag);
        let w_im = Float::with_val(prec, &apq_im / &mag);
        let app = self.re.get(p, p).clone();
        let aqq = self.re.get(q, q).clone();
        let tau = Float::with_val(prec, &aqq - &app) / Float::with_val(prec, &mag * 2u32);
        let t = {
            let root = Float::with_val(prec, tau.clone().square() + 1u32).sqrt();
            let denom = Float::with_val(prec, &*tau.as_abs()) + root;
            let t = Float::with_val(prec, 1u32) / denom;
            if tau.is_sign_negative() { -t } else { t }
        };
        let c = Float::with_val(prec, t.clone().square() + 1u32).sqrt().recip();
        let s = Float::with_val(prec, &t * &c);

        let mut scratch = Scratch::new(prec);
        for k in 0..self.n {
            if k == p || k == q {
                continue;
            }
            scratch.rotate_entry(&mut self.re, &mut self.im, self.real, k, p, q, &c, &s, &w_re, &w_im);
            // Rows follow from Hermiticity.
            let (pr, pi) = (self.re.get(k, p).clone(), self.im.get(k, p).clone());
            let (qr, qi) = (self.re.get(k, q).clone(), self.im.get(k, q).clone());
            self.re.set(p, k, pr);
            self.re.set(q, k, qr);
            if !self.real {
                self.im.set(p, k, -pi);
                self.im.set(q, k, -qi);
            }
        }
        let tm = Float::with_val(prec, &t * &mag);
        self.re.set(p, p, Float::with_val(prec, &app - &tm));
        self.re.set(q, q, Float::with_val(prec, &aqq + &tm));
        self.re.set(p, q, 0);
        self.re.set(q, p, 0);
        if !self.real {
            self.im.set(p, q, 0);
            self.im.set(q, p, 0);
        }
        for k in 0..self.n {
            scratch.rotate_entry(&mut self.v_re, &mut self.v_im, self.real, k, p, q, &c, &s, &w_re, &w_im);
        }
    }
}

struct Scratch {
    x_re: Float,
    x_im: Float,
    y_re: Float,
    y_im: Float,
    tmp: Float,
}

impl Scratch {
    fn new(prec: u32) -> Self {
        Self {
            x_re: Float::new(prec),
            x_im: Float::new(prec),
            y_re: Float::new(prec),
            y_im: Float::new(prec),
            tmp: Float::new(prec),
        }
    }

    /// Column update on row `k`: `new_p = c x - s w' y`, `new_q = s x + c w' y`
    /// where `x = M_kp`, `y = M_kq` and `w' = conj(w)`.
    #[allow(clippy::too_many_arguments)]
    fn rotate_entry(
        &mut self,
        re: &mut Matrix,
        im: &mut Matrix,
        real: bool,
        k: usize,
        p: usize,
        q: usize,
        c: &Float,
        s: &Float,
        w_re: &Float,
        w_im: &Float,
    ) {
        self.x_re.assign(re.get(k, p));
        if real {
            // w is +-1 here.
            self.y_re.assign(re.get(k, q) * w_re);
            let np = re.get_mut(k, p);
            np.assign(c * &self.x_re);
            self.tmp.assign(s * &self.y_re);
            *np -= &self.tmp;
            let nq = re.get_mut(k, q);
            nq.assign(s * &self.x_re);
            self.tmp.assign(c * &self.y_re);
            *nq += &self.tmp;
            return;
        }
        self.x_im.assign(im.get(k, p));
        // y = conj(w) * M_kq
        let (mr, mi) = (re.get(k, q), im.get(k, q));
        self.y_re.assign(w_re * mr);
        self.tmp.assign(w_im * mi);
        self.y_re += &self.tmp;
        self.y_im.assign(w_re * mi);
        self.tmp.assign(w_im * mr);
        self.y_im -= &self.tmp;

        let np = re.get_mut(k, p);
        np.assign(c * &self.x_re);
        self.tmp.assign(s * &self.y_re);
        *np -= &self.tmp;
        let np = im.get_mut(k, p);
        np.assign(c * &self.x_im);
        self.tmp.assign(s * &self.y_im);
        *np -= &self.tmp;
        let nq = re.get_mut(k, q);
        nq.assign(s * &self.x_re);
        self.tmp.assign(c * &self.y_re);
        *nq += &self.tmp;
        let nq = im.get_mut(k, q);
        nq.assign(s * &self.x_im);
        self.tmp.assign(c * &self.y_im);
        *nq += &self.tmp;
    }
}
