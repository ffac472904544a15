//! Dense complex matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{Complex, Real};

/// Column block of the matrix product.
const BLOCK: usize = 256;
/// Rows of the product computed together, reusing each loaded row of the
/// right factor.
const ROW_TILE: usize = 4;

fn split_planes<T: Real>(data: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    (data.iter().map(|c| c.re).collect(), data.iter().map(|c| c.im).collect())
}

/// Largest dimension for which `op_norm` uses the full SVD.
pub const SVD_OP_NORM_MAX_DIM: usize = 64;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

/// Nested row-major `[re, im]` pairs, the on-disk matrix format.
pub type MatrixPairs = Vec<Vec<[f64; 2]>>;

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![czero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("ragged rows"));
        }
        Self::from_vec(r, c, rows.into_iter().flatten().collect())
    }

    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * n + i] = e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(invalid(format!("expected a square matrix, got {}x{}", self.rows, self.cols)))
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows {
            Err(Error::DimensionMismatch { left: self.rows, right: other.rows })
        } else if self.cols != other.cols {
            Err(Error::DimensionMismatch { left: self.cols, right: other.cols })
        } else {
            Ok(())
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Matrix product. Rows are computed in parallel; every entry sums its
    /// terms in increasing inner index, so the result does not depend on the
    /// thread count.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch { left: self.cols, right: rhs.rows });
        }
        let (n, m, p) = (self.rows, self.cols, rhs.cols);
        if n == 0 || p == 0 {
            return Self::from_vec(n, p, vec![czero(); n * p]);
        }
        let (br, bi) = split_planes(&rhs.data);
        let mut out = vec![czero::<T>(); n * p];
        out.par_chunks_mut(p * ROW_TILE).enumerate().for_each(|(tile, dst)| {
            let first = tile * ROW_TILE;
            let nrows = dst.len() / p;
            let mut cr = vec![T::zero(); nrows * p];
            let mut ci = vec![T::zero(); nrows * p];
            for jb in (0..p).step_by(BLOCK) {
                let je = (jb + BLOCK).min(p);
                for k in 0..m {
                    let (bre, bim) = (&br[k * p + jb..k * p + je], &bi[k * p + jb..k * p + je]);
                    for r in 0..nrows {
                        let a = self.data[(first + r) * m + k];
                        let (ar, ai) = (a.re, a.im);
                        let row_r = &mut cr[r * p + jb..r * p + je];
                        let row_i = &mut ci[r * p + jb..r * p + je];
                        for (((x, y), &b_r), &b_i) in row_r.iter_mut().zip(row_i.iter_mut()).zip(bre).zip(bim) {
                            *x += ar * b_r - ai * b_i;
                            *y += ar * b_i + ai * b_r;
                        }
                    }
                }
            }
            for (d, (&x, &y)) in dst.iter_mut().zip(cr.iter().zip(&ci)) {
                *d = Complex::new(x, y);
            }
        });
        Self::from_vec(n, p, out)
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { left: self.cols, right: v.len() });
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(&a, &b)| a * b).fold(czero(), |s, x| s + x)).collect())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.same_shape(rhs)?;
        Ok(Self { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect() })
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * c).collect() }
    }

    pub fn trace(&self) -> Result<Complex<T>> {
        self.require_square()?;
        Ok((0..self.rows).fold(czero(), |s, i| s + self.get(i, i)))
    }

    /// `(1/N)·trace`.
    pub fn normalized_trace(&self) -> Result<Complex<T>> {
        let t = self.trace()?;
        Ok(t / T::from_usize(self.rows.max(1)).unwrap())
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> Result<T> {
        self.same_shape(rhs)?;
        Ok(self.data.iter().zip(&rhs.data).map(|(&a, &b)| (a - b).norm()).fold(T::zero(), T::max))
    }

    /// Block-diagonal `self ⊕ rhs`.
    pub fn direct_sum(&self, rhs: &Self) -> Self {
        let mut m = Self::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.get(i, j));
            }
        }
        for i in 0..rhs.rows {
            for j in 0..rhs.cols {
                m.set(self.rows + i, self.cols + j, rhs.get(i, j));
            }
        }
        m
    }

    /// Singular values in decreasing order.
    pub fn singular_values(&self) -> Vec<T> {
        jacobi_svd(self).0
    }

    /// Largest singular value: exact SVD up to [`SVD_OP_NORM_MAX_DIM`],
    /// power iteration on `A*A` beyond (a lower bound that converges from
    /// below; slow when the top singular values nearly coincide).
    pub fn op_norm(&self) -> T {
        if self.rows.min(self.cols) == 0 {
            return T::zero();
        }
        if self.rows.max(self.cols) <= SVD_OP_NORM_MAX_DIM {
            return self.singular_values()[0];
        }
        power_op_norm(self)
    }

    /// Orthonormal basis of `{x : Ax = 0}`, using singular values at most
    /// `tol · max(1, σ_max)` as zero.
    pub fn null_space(&self, tol: T) -> Vec<Vec<Complex<T>>> {
        let (sv, v) = jacobi_svd(self);
        let scale = sv.first().copied().unwrap_or(T::zero()).max(T::one());
        let n = self.cols;
        sv.iter()
            .enumerate()
            .filter(|(_, &s)| s <= tol * scale)
            .map(|(k, _)| (0..n).map(|i| v.get(i, k)).collect())
            .collect()
    }

    /// LU with partial pivoting.
    pub fn determinant(&self) -> Result<Complex<T>> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Complex::new(T::one(), T::zero());
        for k in 0..n {
            let piv = (k..n).max_by(|&x, &y| a[x * n + k].norm().partial_cmp(&a[y * n + k].norm()).unwrap()).unwrap();
            if a[piv * n + k].norm() == T::zero() {
                return Ok(czero());
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[k * n + k];
            det *= d;
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                for j in k..n {
                    let t = a[k * n + j];
                    a[i * n + j] -= f * t;
                }
            }
        }
        Ok(det)
    }

    pub fn to_pairs(&self) -> MatrixPairs {
        (0..self.rows).map(|i| self.row(i).iter().map(|c| [c.re.as_f64(), c.im.as_f64()]).collect()).collect()
    }

    pub fn from_pairs(pairs: &MatrixPairs) -> Result<Self> {
        Self::from_rows(pairs.iter().map(|r| r.iter().map(|p| Complex::new(T::lit(p[0]), T::lit(p[1]))).collect()).collect())
    }

    /// Lossless precision change.
    pub fn cast<S: Real>(&self) -> CMatrix<S> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|c| Complex::new(S::lit(c.re.as_f64()), S::lit(c.im.as_f64()))).collect(),
        }
    }
}

/// Serialized as nested row-major `[re, im]` pairs.
impl<T: Real> Serialize for CMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_pairs().serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for CMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = MatrixPairs::deserialize(d)?;
        Self::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// `(Σ conj(v)·a)` over split planes, with four interleaved partial sums
/// combined in a fixed order.
fn dotc<T: Real>(vr: &[T], vi: &[T], ar: &[T], ai: &[T]) -> (T, T) {
    const LANES: usize = 4;
    let mut sr = [T::zero(); LANES];
    let mut si = [T::zero(); LANES];
    let full = vr.len() / LANES * LANES;
    for (((xr, xi), yr), yi) in
        vr[..full].chunks_exact(LANES).zip(vi[..full].chunks_exact(LANES)).zip(ar[..full].chunks_exact(LANES)).zip(ai[..full].chunks_exact(LANES))
    {
        for l in 0..LANES {
            sr[l] += xr[l] * yr[l] + xi[l] * yi[l];
            si[l] += xr[l] * yi[l] - xi[l] * yr[l];
        }
    }
    let (mut tr, mut ti) = ((sr[0] + sr[1]) + (sr[2] + sr[3]), (si[0] + si[1]) + (si[2] + si[3]));
    for t in full..vr.len() {
        tr += vr[t] * ar[t] + vi[t] * ai[t];
        ti += vr[t] * ai[t] - vi[t] * ar[t];
    }
    (tr, ti)
}

/// `a ← a − 2 v (v^H a)` on one column segment.
fn reflect<T: Real>(vr: &[T], vi: &[T], ar: &mut [T], ai: &mut [T]) {
    let (wr, wi) = dotc(vr, vi, ar, ai);
    let two = T::lit(2.0);
    let (ur, ui) = (two * wr, two * wi);
    for (((x, y), &pr), &pi) in ar.iter_mut().zip(ai.iter_mut()).zip(vr).zip(vi) {
        *x -= pr * ur - pi * ui;
        *y -= pr * ui + pi * ur;
    }
}

/// Applies the reflector to columns `from..` of column-major planes.
fn reflect_columns<T: Real>(re: &mut [T], im: &mut [T], n: usize, k: usize, from: usize, vr: &[T], vi: &[T]) {
    re[from * n..].par_chunks_mut(n).zip(im[from * n..].par_chunks_mut(n)).for_each(|(cr, ci)| {
        reflect(vr, vi, &mut cr[k..], &mut ci[k..]);
    });
}

/// Householder QR of a square matrix. Returns `Q` and the diagonal of `R`.
pub fn householder_qr<T: Real>(a: &CMatrix<T>) -> Result<(CMatrix<T>, Vec<Complex<T>>)> {
    a.require_square()?;
    let n = a.rows;
    // Column-major planes: column j is `[j*n..(j+1)*n]`.
    let mut re = vec![T::zero(); n * n];
    let mut im = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let c = a.get(i, j);
            re[j * n + i] = c.re;
            im[j * n + i] = c.im;
        }
    }
    let mut reflectors: Vec<(Vec<T>, Vec<T>)> = Vec::with_capacity(n);
    let mut rdiag = Vec::with_capacity(n);
    for k in 0..n {
        let (xr, xi) = (&re[k * n + k..(k + 1) * n], &im[k * n + k..(k + 1) * n]);
        let norm = xr.iter().zip(xi).map(|(&r, &i)| r * r + i * i).sum::<T>().sqrt();
        let x0 = Complex::new(xr[0], xi[0]);
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::new(T::one(), T::zero()) };
        let alpha = -phase * norm;
        let (mut vr, mut vi) = (xr.to_vec(), xi.to_vec());
        vr[0] -= alpha.re;
        vi[0] -= alpha.im;
        let vnorm = vr.iter().zip(&vi).map(|(&r, &i)| r * r + i * i).sum::<T>().sqrt();
        if vnorm > T::zero() {
            vr.iter_mut().chain(vi.iter_mut()).for_each(|x| *x /= vnorm);
        }
        rdiag.push(if norm > T::zero() { alpha } else { czero() });
        reflect_columns(&mut re, &mut im, n, k, k + 1, &vr, &vi);
        reflectors.push((vr, vi));
    }
    // Q = H_0 H_1 ⋯ H_{n−1}, accumulated from the right end.
    re.iter_mut().for_each(|x| *x = T::zero());
    im.iter_mut().for_each(|x| *x = T::zero());
    for j in 0..n {
        re[j * n + j] = T::one();
    }
    for k in (0..n).rev() {
        let (vr, vi) = &reflectors[k];
        reflect_columns(&mut re, &mut im, n, k, k, vr, vi);
    }
    let qm = CMatrix::from_fn(n, n, |i, j| Complex::new(re[j * n + i], im[j * n + i]));
    Ok((qm, rdiag))
}

/// One-sided complex Jacobi SVD. Returns the singular values in decreasing
/// order and the matching right singular vectors as columns of `V`.
fn jacobi_svd<T: Real>(a: &CMatrix<T>) -> (Vec<T>, CMatrix<T>) {
    let n = a.cols;
    let m = a.rows.max(n);
    // Column-major, padded with zero rows up to at least `n`.
    let mut u = vec![czero::<T>(); n * m];
    for i in 0..a.rows {
        for j in 0..n {
            u[j * m + i] = a.get(i, j);
        }
    }
    let mut v = vec![czero::<T>(); n * n];
    for j in 0..n {
        v[j * n + j] = Complex::new(T::one(), T::zero());
    }
    let eps = T::epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (cp, cq) = (&u[p * m..(p + 1) * m], &u[q * m..(q + 1) * m]);
                let alpha: T = cp.iter().map(|c| c.norm_sqr()).sum();
                let beta: T = cq.iter().map(|c| c.norm_sqr()).sum();
                let gamma = cp.iter().zip(cq).fold(czero::<T>(), |s, (&x, &y)| s + x.conj() * y);
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph = (gamma / g).conj();
                let zeta = (beta - alpha) / (T::lit(2.0) * g);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut u, m, p, q, ph, c, s);
                rotate(&mut v, n, p, q, ph, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(T, usize)> =
        (0..n).map(|j| (u[j * m..(j + 1) * m].iter().map(|c| c.norm_sqr()).sum::<T>().sqrt(), j)).collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    let vm = CMatrix::from_fn(n, n, |i, k| v[order[k].1 * n + i]);
    (order.into_iter().map(|x| x.0).collect(), vm)
}

/// Column `q` is multiplied by `ph`, then `(p, q)` rotated by `[[c, s], [−s, c]]`.
fn rotate<T: Real>(buf: &mut [Complex<T>], stride: usize, p: usize, q: usize, ph: Complex<T>, c: T, s: T) {
    let (lo, hi) = buf.split_at_mut(q * stride);
    let cp = &mut lo[p * stride..(p + 1) * stride];
    let cq = &mut hi[..stride];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yq = *y * ph;
        let xp = *x;
        *x = xp * c - yq * s;
        *y = xp * s + yq * c;
    }
}

fn power_op_norm<T: Real>(a: &CMatrix<T>) -> T {
    let n = a.cols;
    let ah = a.adjoint();
    // Fixed, generic start vector.
    let mut x: Vec<Complex<T>> =
        (0..n).map(|i| Complex::new(T::one() + T::lit(i as f64).sin() * T::lit(0.5), T::lit(i as f64 * 0.7).cos() * T::lit(0.25))).collect();
    let mut sigma = T::zero();
    for _ in 0..5000 {
        let nx = x.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        if nx == T::zero() {
            return T::zero();
        }
        for c in x.iter_mut() {
            *c /= nx;
        }
        let y = a.mul_vec(&x).expect("shape");
        let next = y.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
        x = ah.mul_vec(&y).expect("shape");
        if (next - sigma).abs() <= T::epsilon() * next {
            return next;
        }
        sigma = next;
    }
    sigma
}
