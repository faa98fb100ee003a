//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is a thin layer over `nalgebra`'s SVD and QR. Rank
//! decisions always threshold singular values against
//! `tol * max(1, largest singular value)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn cutoff(svals: &[f64], tol: f64) -> f64 {
    let top = svals.iter().cloned().fold(0.0_f64, f64::max);
    tol * top.max(1.0)
}

/// Largest singular value. Empty matrices have norm zero.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max)
}

pub fn rank(m: &CMat, tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv: Vec<f64> = m.clone().singular_values().iter().cloned().collect();
    let cut = cutoff(&sv, tol);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis of the column space of `m`.
pub fn range_basis(m: &CMat, tol: f64) -> CMat {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let cut = cutoff(&sv, tol);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > cut).collect();
    let mut out = zeros(rows, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &u.column(i));
    }
    out
}

/// Orthonormal basis of the null space of `m`.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let cols = m.ncols();
    if cols == 0 {
        return zeros(0, 0);
    }
    if m.nrows() == 0 {
        return identity(cols);
    }
    // Pad so that the SVD returns a full V.
    let padded = if m.nrows() < cols {
        let mut p = zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^t");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let cut = cutoff(&sv, tol);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cut).collect();
    let mut out = zeros(cols, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        let row = v_t.row(i);
        for r in 0..cols {
            out[(r, j)] = row[r].conj();
        }
    }
    out
}

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff.
pub fn pinv(m: &CMat, tol: f64) -> CMat {
    let (r, c_) = m.shape();
    if r == 0 || c_ == 0 {
        return zeros(c_, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("U");
    let v_t = svd.v_t.expect("V^t");
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let cut = cutoff(&sv, tol);
    let mut out = zeros(c_, r);
    for (i, &s) in sv.iter().enumerate() {
        if s > cut {
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui) * C64::new(1.0 / s, 0.0);
        }
    }
    out
}

/// Column-major flattening.
pub fn vec_of(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v)
}

/// Norm of the component of `m`'s columns orthogonal to the orthonormal
/// columns of `basis`.
pub fn outside_residual(basis: &CMat, m: &CMat) -> f64 {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0.0;
    }
    if basis.ncols() == 0 {
        return op_norm(m);
    }
    let proj = basis * (basis.adjoint() * m);
    op_norm(&(m - proj))
}

/// Two orthonormal bases span the same subspace.
pub fn same_span(a: &CMat, b: &CMat, tol: f64) -> (bool, f64) {
    let res = outside_residual(a, b).max(outside_residual(b, a));
    (a.ncols() == b.ncols() && res <= tol, res)
}

/// Incrementally accumulates an orthonormal basis of the span of many
/// column blocks without materializing them side by side.
#[derive(Debug, Clone)]
pub struct SpanBuilder {
    dim: usize,
    tol: f64,
    basis: Vec<CVec>,
}

impl SpanBuilder {
    pub fn new(dim: usize, tol: f64) -> Self {
        SpanBuilder {
            dim,
            tol,
            basis: Vec::new(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() >= self.dim
    }

    pub fn push_block(&mut self, block: &CMat) {
        if self.is_full() || block.ncols() == 0 || self.dim == 0 {
            return;
        }
        let scale = op_norm(block).max(1.0);
        let mut resid = block.clone();
        // two passes of classical Gram-Schmidt against the current basis
        for _ in 0..2 {
            for q in &self.basis {
                let coeffs = q.adjoint() * &resid;
                resid -= q * coeffs;
            }
        }
        if op_norm(&resid) <= self.tol * scale {
            return;
        }
        let svd = resid.svd(true, false);
        let u = svd.u.expect("U");
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > self.tol * scale && !self.is_full() {
                let mut v: CVec = u.column(i).into_owned();
                for q in &self.basis {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
                let n = v.norm();
                if n > 0.5 {
                    self.basis.push(v / C64::new(n, 0.0));
                }
            }
        }
    }

    pub fn push_vector(&mut self, v: &CVec) {
        let m = CMat::from_column_slice(v.len(), 1, v.as_slice());
        self.push_block(&m);
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn finish(self) -> CMat {
        let mut out = zeros(self.dim, self.basis.len());
        for (j, q) in self.basis.iter().enumerate() {
            out.set_column(j, q);
        }
        out
    }
}

/// Maintains a compressed upper-triangular factor of a tall stack of rows,
/// so that null spaces of very tall systems can be computed in bounded memory.
#[derive(Debug, Clone)]
pub struct RowCompressor {
    cols: usize,
    r: CMat,
}

impl RowCompressor {
    pub fn new(cols: usize) -> Self {
        RowCompressor {
            cols,
            r: zeros(0, cols),
        }
    }

    pub fn push_rows(&mut self, rows: &CMat) {
        assert_eq!(rows.ncols(), self.cols, "row width mismatch");
        if rows.nrows() == 0 {
            return;
        }
        let stacked = {
            let mut s = zeros(self.r.nrows() + rows.nrows(), self.cols);
            s.view_mut((0, 0), (self.r.nrows(), self.cols))
                .copy_from(&self.r);
            s.view_mut((self.r.nrows(), 0), (rows.nrows(), self.cols))
                .copy_from(rows);
            s
        };
        if stacked.nrows() <= self.cols {
            self.r = stacked;
        } else {
            self.r = stacked.qr().r();
        }
    }

    pub fn null_space(&self, tol: f64) -> CMat {
        null_space(&self.r, tol)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Matrix unit `E_ij` of size `n`.
pub fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn diag(values: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let m = CMat::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!(max_abs(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn pinv_inverts_invertible() {
        let m = CMat::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), ZERO, c(3.0, 0.0)]);
        let p = pinv(&m, 1e-12);
        assert!(max_abs(&(&m * &p - identity(2))) < 1e-12);
    }

    #[test]
    fn span_builder_detects_dependence() {
        let mut sb = SpanBuilder::new(3, 1e-10);
        sb.push_block(&unit(3, 0, 0));
        sb.push_block(&(unit(3, 0, 0) * c(2.0, 0.0)));
        assert_eq!(sb.rank(), 1);
        sb.push_block(&identity(3));
        assert_eq!(sb.rank(), 3);
    }

    #[test]
    fn kron_matches_vec_identity() {
        // vec(A X B) = (B^T ⊗ A) vec(X)
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64 + 1.0, j as f64));
        let x = CMat::from_fn(2, 2, |i, j| c(j as f64, 1.0 - i as f64));
        let b = CMat::from_fn(2, 2, |i, j| c((i * j) as f64 + 0.5, 0.0));
        let lhs = vec_of(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vec_of(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn op_norm_of_diag() {
        let d = diag(&[c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0)]);
        assert!((op_norm(&d) - 3.0).abs() < 1e-12);
    }
}
