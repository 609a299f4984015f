use std::fmt;

use rug::{Assign, Float};

use crate::error::{Error, Result};

/// Dense real matrix stored column-major. All entries share one precision.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<Float>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} @{} bits", self.rows, self.cols, self.prec)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> =
                (0..self.cols.min(8)).map(|j| format!("{:.6e}", self.get(i, j).to_f64())).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Self { rows, cols, prec, data: vec![Float::new(prec); rows * cols] }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Self::zeros(n, n, prec);
        for i in 0..n {
            m.get_mut(i, i).assign(1);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, prec: u32, mut f: impl FnMut(usize, usize) -> Float) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(Float::with_val(prec, f(i, j)));
            }
        }
        Self { rows, cols, prec, data }
    }

    pub fn from_f64(rows: usize, cols: usize, prec: u32, f: impl Fn(usize, usize) -> f64) -> Self {
        Self::from_fn(rows, cols, prec, |i, j| Float::with_val(prec, f(i, j)))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &Float {
        &self.data[j * self.rows + i]
    }

    #[inline]
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Float {
        &mut self.data[j * self.rows + i]
    }

    pub fn set<T>(&mut self, i: usize, j: usize, value: T)
    where
        Float: Assign<T>,
    {
        self.get_mut(i, j).assign(value);
    }

    pub fn col(&self, j: usize) -> &[Float] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Float] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Mutable access to two distinct columns at once.
    pub fn col_pair_mut(&mut self, p: usize, q: usize) -> (&mut [Float], &mut [Float]) {
        assert!(p < q, "col_pair_mut requires p < q");
        let r = self.rows;
        let (left, right) = self.data.split_at_mut(q * r);
        (&mut left[p * r..(p + 1) * r], &mut right[..r])
    }

    /// Copy at a different precision, rounding to nearest.
    pub fn with_prec(&self, prec: u32) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            prec,
            data: self.data.iter().map(|x| Float::with_val(prec, x)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.prec, |i, j| self.get(j, i).clone())
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), self.prec, |i, j| self.get(rows[i], cols[j]).clone())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols, self.prec);
        let mut tmp = Float::new(self.prec);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other.get(k, j);
                if b.is_zero() {
                    continue;
                }
                let a_col = self.col(k);
                let out_col = out.col_mut(j);
                for (o, a) in out_col.iter_mut().zip(a_col) {
                    if a.is_zero() {
                        continue;
                    }
                    tmp.assign(a * b);
                    *o += &tmp;
                }
            }
        }
        Ok(out)
    }

    /// `self * v` for a column vector.
    pub fn matvec(&self, v: &[Float]) -> Vec<Float> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Float::new(self.prec); self.rows];
        let mut tmp = Float::new(self.prec);
        for (k, b) in v.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.col(k)) {
                tmp.assign(a * b);
                *o += &tmp;
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| Float::with_val(a.prec(), a + b))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| Float::with_val(a.prec(), a - b))
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(&Float, &Float) -> Float) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} differs from {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, prec: self.prec, data })
    }

    pub fn scale(&self, s: &Float) -> Matrix {
        let data = self.data.iter().map(|a| Float::with_val(self.prec, a * s)).collect();
        Matrix { rows: self.rows, cols: self.cols, prec: self.prec, data }
    }

    pub fn neg(&self) -> Matrix {
        let data = self.data.iter().map(|a| Float::with_val(self.prec, -a)).collect();
        Matrix { rows: self.rows, cols: self.cols, prec: self.prec, data }
    }

    pub fn max_abs(&self) -> Float {
        let mut best = Float::new(self.prec);
        for x in &self.data {
            if *x.as_abs() > best {
                best.assign(&*x.as_abs());
            }
        }
        best
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> Float {
        self.sub(other).expect("max_abs_diff needs equal shapes").max_abs()
    }

    pub fn frobenius(&self) -> Float {
        let mut acc = Float::new(self.prec);
        for x in &self.data {
            acc += x.clone().square();
        }
        acc.sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64())
    }

    pub fn from_nalgebra(m: &nalgebra::DMatrix<f64>, prec: u32) -> Matrix {
        Matrix::from_f64(m.nrows(), m.ncols(), prec, |i, j| m[(i, j)])
    }

    /// Largest deviation from symmetry, `max |A - A^T|`.
    pub fn asymmetry(&self) -> Float {
        let mut worst = Float::new(self.prec);
        for i in 0..self.rows {
            for j in 0..i {
                let d = Float::with_val(self.prec, self.get(i, j) - self.get(j, i)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Dot product accumulated at the precision of `acc`.
pub(crate) fn dot_into(acc: &mut Float, a: &[Float], b: &[Float], tmp: &mut Float) {
    acc.assign(0);
    for (x, y) in a.iter().zip(b) {
        tmp.assign(x * y);
        *acc += &*tmp;
    }
}

pub(crate) fn dot(a: &[Float], b: &[Float]) -> Float {
    let prec = a.first().map_or(64, |x| x.prec());
    let mut acc = Float::new(prec);
    let mut tmp = Float::new(prec);
    dot_into(&mut acc, a, b, &mut tmp);
    acc
}

/// `y -= s * x`.
pub(crate) fn axpy_neg(y: &mut [Float], s: &Float, x: &[Float], tmp: &mut Float) {
    for (yi, xi) in y.iter_mut().zip(x) {
        tmp.assign(s * xi);
        *yi -= &*tmp;
    }
}

pub(crate) fn norm(a: &[Float]) -> Float {
    dot(a, a).sqrt()
}

/// Complex matrix as a pair of real matrices, `re + i im`.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub re: Matrix,
    pub im: Matrix,
}

impl CMatrix {
    pub fn new(re: Matrix, im: Matrix) -> Result<Self> {
        if re.rows() != im.rows() || re.cols() != im.cols() {
            return Err(Error::Dimension("real and imaginary parts differ in shape".into()));
        }
        Ok(Self { re, im })
    }

    pub fn from_real(re: Matrix) -> Self {
        let im = Matrix::zeros(re.rows(), re.cols(), re.prec());
        Self { re, im }
    }

    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Self { re: Matrix::zeros(rows, cols, prec), im: Matrix::zeros(rows, cols, prec) }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        Self::from_real(Matrix::identity(n, prec))
    }

    pub fn rows(&self) -> usize {
        self.re.rows()
    }

    pub fn cols(&self) -> usize {
        self.re.cols()
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        let rr = self.re.matmul(&other.re)?;
        let ii = self.im.matmul(&other.im)?;
        let ri = self.re.matmul(&other.im)?;
        let ir = self.im.matmul(&other.re)?;
        Ok(CMatrix { re: rr.sub(&ii)?, im: ri.add(&ir)? })
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix> {
        Ok(CMatrix { re: self.re.add(&other.re)?, im: self.im.add(&other.im)? })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix> {
        Ok(CMatrix { re: self.re.sub(&other.re)?, im: self.im.sub(&other.im)? })
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix { re: self.re.transpose(), im: self.im.transpose().neg() }
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        let adj = self.adjoint();
        let half = Float::with_val(self.prec(), 0.5);
        CMatrix {
            re: self.re.add(&adj.re).unwrap().scale(&half),
            im: self.im.add(&adj.im).unwrap().scale(&half),
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> Float {
        let mut best = Float::new(self.prec());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let m = Float::with_val(self.prec(), self.re.get(i, j).hypot_ref(self.im.get(i, j)));
                if m > best {
                    best = m;
                }
            }
        }
        best
    }

    /// Real embedding `[[re, -im], [im, re]]`.
    pub fn real_embedding(&self) -> Matrix {
        let (r, c) = (self.rows(), self.cols());
        Matrix::from_fn(2 * r, 2 * c, self.prec(), |i, j| {
            let (bi, ii) = (i / r, i % r);
            let (bj, jj) = (j / c, j % c);
            match (bi, bj) {
                (0, 0) | (1, 1) => self.re.get(ii, jj).clone(),
                (0, 1) => -self.im.get(ii, jj).clone(),
                _ => self.im.get(ii, jj).clone(),
            }
        })
    }

    /// Inverse of [`CMatrix::real_embedding`], reading the first block column.
    pub fn from_real_embedding(m: &Matrix) -> CMatrix {
        let r = m.rows() / 2;
        let c = m.cols() / 2;
        CMatrix {
            re: Matrix::from_fn(r, c, m.prec(), |i, j| m.get(i, j).clone()),
            im: Matrix::from_fn(r, c, m.prec(), |i, j| m.get(i + r, j).clone()),
        }
    }
}

/// Real antisymmetric matrix of even dimension. Antisymmetry holds exactly:
/// every write goes to both `(m, n)` and `(n, m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    inner: Matrix,
}

impl SkewMatrix {
    pub fn zeros(dim: usize, prec: u32) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::Dimension(format!("skew matrix dimension must be even and positive, got {dim}")));
        }
        Ok(Self { inner: Matrix::zeros(dim, dim, prec) })
    }

    /// Builds from the strictly lower triangle of `m`; the diagonal and the
    /// upper triangle are ignored.
    pub fn from_lower(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("skew matrix must be square".into()));
        }
        let mut s = Self::zeros(m.rows(), m.prec())?;
        for j in 0..m.cols() {
            for i in j + 1..m.rows() {
                s.set(i, j, m.get(i, j));
            }
        }
        Ok(s)
    }

    /// `(m - m^T) / 2`.
    pub fn antisymmetrize(m: &Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("skew matrix must be square".into()));
        }
        let mut s = Self::zeros(m.rows(), m.prec())?;
        for j in 0..m.cols() {
            for i in j + 1..m.rows() {
                let v = Float::with_val(m.prec(), m.get(i, j) - m.get(j, i)) / 2u32;
                s.set(i, j, &v);
            }
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    pub fn prec(&self) -> u32 {
        self.inner.prec()
    }

    pub fn get(&self, i: usize, j: usize) -> &Float {
        self.inner.get(i, j)
    }

    /// Sets `S[i][j] = value` and `S[j][i] = -value`. Diagonal writes must be zero.
    pub fn set<T>(&mut self, i: usize, j: usize, value: T)
    where
        Float: Assign<T>,
    {
        self.inner.get_mut(i, j).assign(value);
        if i == j {
            assert!(self.inner.get(i, i).is_zero(), "skew matrix diagonal must be zero");
            return;
        }
        let v: Float = -self.inner.get(i, j).clone();
        *self.inner.get_mut(j, i) = v;
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.inner
    }

    pub fn into_matrix(self) -> Matrix {
        self.inner
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Self { inner: self.inner.with_prec(prec) }
    }

    /// Principal submatrix on the given (ordered) index list.
    pub fn restrict(&self, idx: &[usize]) -> Result<Self> {
        let sub = self.inner.submatrix(idx, idx);
        if idx.len() % 2 != 0 || idx.is_empty() {
            return Err(Error::Dimension("restriction must keep an even, nonzero index count".into()));
        }
        Ok(Self { inner: sub })
    }

    /// `i * S` as a Hermitian matrix.
    pub fn times_i(&self) -> CMatrix {
        CMatrix { re: Matrix::zeros(self.dim(), self.dim(), self.prec()), im: self.inner.clone() }
    }
}

#[cfg(test)]
pub fn ctx_matrix(ctx: &crate::precision::PrecisionContext, rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Matrix {
    Matrix::from_f64(rows, cols, ctx.bits(), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precision::PrecisionContext;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(40).unwrap()
    }

    #[test]
    fn matmul_matches_f64() {
        let c = ctx();
        let a = ctx_matrix(&c, 3, 2, |i, j| (i * 2 + j) as f64 + 0.5);
        let b = ctx_matrix(&c, 2, 4, |i, j| i as f64 - j as f64);
        let p = a.matmul(&b).unwrap().to_nalgebra();
        let q = a.to_nalgebra() * b.to_nalgebra();
        assert!((p - q).abs().max() < 1e-14);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn skew_set_is_antisymmetric() {
        let c = ctx();
        let mut s = SkewMatrix::zeros(4, c.bits()).unwrap();
        s.set(3, 1, 2.5);
        assert_eq!(s.get(1, 3).to_f64(), -2.5);
        assert!(SkewMatrix::zeros(3, c.bits()).is_err());
    }

    #[test]
    fn complex_embedding_roundtrip() {
        let c = ctx();
        let z = CMatrix::new(ctx_matrix(&c, 2, 2, |i, j| (i + j) as f64), ctx_matrix(&c, 2, 2, |i, j| i as f64 - j as f64)).unwrap();
        assert_eq!(CMatrix::from_real_embedding(&z.real_embedding()), z);
    }
}
