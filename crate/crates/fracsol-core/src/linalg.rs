//! Dense and tridiagonal linear algebra.
//!
//! Row-major matrices over `f64` and `Complex<f64>`, an implicit-shift QL
//! eigensolver for symmetric tridiagonal matrices, a Householder reduction
//! for general Hermitian matrices, modified Gram-Schmidt, and a small
//! Cholesky solver. Eigenvector sets are stored with one eigenvector per
//! *row* so the hot loops (QL rotations, frame propagation) run on
//! contiguous memory.

use crate::error::{Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

/// Complex double-precision scalar.
pub type C64 = num_complex::Complex<f64>;

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    /// Zero matrix of the given shape.
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Identity matrix.
    #[must_use]
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from an element function.
    #[must_use]
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Number of rows.
    #[must_use]
    pub const fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    #[must_use]
    pub const fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    #[must_use]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row `i` as a mutable slice.
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable borrows of the adjacent rows `i` and `i + 1`.
    pub fn adjacent_rows_mut(&mut self, i: usize) -> (&mut [f64], &mut [f64]) {
        let c = self.cols;
        let (a, b) = self.data.split_at_mut((i + 1) * c);
        (&mut a[i * c..], &mut b[..c])
    }

    /// Swaps rows `i` and `j`.
    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        let c = self.cols;
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let (a, b) = self.data.split_at_mut(hi * c);
        a[lo * c..(lo + 1) * c].swap_with_slice(&mut b[..c]);
    }

    /// Matrix product `self * other`.
    #[must_use]
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += aik * s;
                }
            }
        }
        out
    }

    /// Transpose.
    #[must_use]
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }
}

impl core::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    /// Zero matrix of the given shape.
    #[must_use]
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    /// Builds from an element function.
    #[must_use]
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Number of rows.
    #[must_use]
    pub const fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    #[must_use]
    pub const fn cols(&self) -> usize {
        self.cols
    }

    /// Row `i` as a slice.
    #[must_use]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row `i` as a mutable slice.
    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix product `self * other`.
    #[must_use]
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                let src = other.row(k);
                let dst = out.row_mut(i);
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += aik * s;
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    #[must_use]
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Largest entry magnitude.
    #[must_use]
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric tridiagonal matrix: `diag` of length `n`, `offdiag` of length
/// `n - 1` with `offdiag[i]` coupling sites `i` and `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    /// Main diagonal.
    pub diag: Vec<f64>,
    /// Sub/superdiagonal.
    pub offdiag: Vec<f64>,
}

impl SymTridiag {
    /// Dimension.
    #[must_use]
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Full eigensystem, eigenvalues ascending.
    ///
    /// # Errors
    ///
    /// [`Error::NoConvergence`] if the QL iteration stalls (more than 50
    /// sweeps on one eigenvalue), [`Error::ShapeMismatch`] on inconsistent
    /// lengths.
    pub fn eigh(&self) -> Result<EigSym> {
        let n = self.n();
        if self.offdiag.len() + 1 != n {
            return Err(Error::ShapeMismatch(format!(
                "tridiagonal sizes: diag {} offdiag {}",
                n,
                self.offdiag.len()
            )));
        }
        let mut d = self.diag.clone();
        let mut e = vec![0.0; n];
        e[..n - 1].copy_from_slice(&self.offdiag);
        let mut zt = Mat::identity(n);
        ql_implicit(&mut d, &mut e, Some(&mut zt))?;
        sort_ascending(&mut d, &mut zt);
        fix_real_signs(&mut zt);
        Ok(EigSym { values: d, vectors_t: zt })
    }

    /// Eigenvalues only, ascending.
    ///
    /// # Errors
    ///
    /// Same conditions as [`SymTridiag::eigh`].
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if self.offdiag.len() + 1 != n {
            return Err(Error::ShapeMismatch(format!(
                "tridiagonal sizes: diag {} offdiag {}",
                n,
                self.offdiag.len()
            )));
        }
        let mut d = self.diag.clone();
        let mut e = vec![0.0; n];
        e[..n - 1].copy_from_slice(&self.offdiag);
        ql_implicit(&mut d, &mut e, None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }
}

/// Eigensystem of a real symmetric matrix. Row `nu` of `vectors_t` is the
/// eigenvector for `values[nu]`; values ascend; each vector's
/// largest-magnitude component is positive.
#[derive(Debug, Clone)]
pub struct EigSym {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors, one per row.
    pub vectors_t: Mat,
}

/// Eigensystem of a Hermitian matrix. Row `nu` of `vectors_t` is the
/// eigenvector for `values[nu]`; values ascend; the phase of each vector is
/// fixed so its first component of significant magnitude is real positive.
#[derive(Debug, Clone)]
pub struct EigHerm {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors, one per row.
    pub vectors_t: CMat,
}

fn sign_mag(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Implicit-shift QL on a symmetric tridiagonal matrix. `d` holds the
/// diagonal, `e` the subdiagonal in `e[0..n-1]` with `e[n-1]` scratch.
/// When `zt` is given it must start as the identity (or any orthogonal
/// basis); rotations act on its rows, so on exit row `i` is the eigenvector
/// for `d[i]`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Mat>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::NoConvergence(format!(
                    "QL sweep limit at eigenvalue {l} of {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + sign_mag(r, g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = zt.as_deref_mut() {
                    let (zi, zi1) = z.adjacent_rows_mut(i);
                    for (a, b2) in zi.iter_mut().zip(zi1.iter_mut()) {
                        f = *b2;
                        *b2 = s * *a + c * f;
                        *a = c * *a - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn sort_ascending(d: &mut [f64], zt: &mut Mat) {
    let n = d.len();
    for i in 0..n {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            zt.swap_rows(i, k);
        }
    }
}

/// Largest-magnitude component of each row made positive. Ties resolve to
/// the earliest index.
fn fix_real_signs(zt: &mut Mat) {
    for i in 0..zt.rows() {
        let row = zt.row_mut(i);
        let mut best = 0;
        for (j, v) in row.iter().enumerate() {
            if v.abs() > row[best].abs() {
                best = j;
            }
        }
        if row[best] < 0.0 {
            for v in row.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// Full eigensystem of a Hermitian matrix by Householder reduction to real
/// symmetric tridiagonal form followed by implicit-shift QL.
///
/// # Errors
///
/// [`Error::ShapeMismatch`] for non-square input, [`Error::NoConvergence`]
/// from the QL stage.
pub fn eigh_hermitian(a: &CMat) -> Result<EigHerm> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::ShapeMismatch(format!(
            "eigh_hermitian needs a square matrix, got {}x{}",
            n,
            a.cols()
        )));
    }
    if n == 0 {
        return Ok(EigHerm { values: Vec::new(), vectors_t: CMat::zeros(0, 0) });
    }

    let mut w = a.clone();
    // Householder vectors (offset k acts on components k+1..n) and their
    // half squared norms.
    let mut hh: Vec<(Vec<C64>, f64)> = Vec::new();
    let mut sub = vec![C64::new(0.0, 0.0); n.saturating_sub(1)];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut u: Vec<C64> = (0..m).map(|i| w[(k + 1 + i, k)]).collect();
        let sigma = libm::sqrt(u.iter().map(|z| z.norm_sqr()).sum());
        if sigma == 0.0 {
            sub[k] = C64::new(0.0, 0.0);
            hh.push((Vec::new(), 0.0));
            continue;
        }
        let phase = if u[0].norm() > 0.0 { u[0] / u[0].norm() } else { C64::new(1.0, 0.0) };
        let alpha = -phase * sigma;
        u[0] -= alpha;
        let h = u.iter().map(|z| z.norm_sqr()).sum::<f64>() * 0.5;
        sub[k] = alpha;

        // p = A' u / h over the trailing block, then the Hermitian rank-2
        // update A' -= q u^dag + u q^dag with q = p - (u^dag p / 2h) u.
        let mut p = vec![C64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = C64::new(0.0, 0.0);
            for (j, uj) in u.iter().enumerate() {
                acc += w[(k + 1 + i, k + 1 + j)] * uj;
            }
            p[i] = acc / h;
        }
        let kappa = {
            let mut acc = C64::new(0.0, 0.0);
            for (ui, pi) in u.iter().zip(&p) {
                acc += ui.conj() * pi;
            }
            acc / (2.0 * h)
        };
        let q: Vec<C64> = p.iter().zip(&u).map(|(pi, ui)| pi - kappa * ui).collect();
        for i in 0..m {
            for j in 0..m {
                let delta = q[i] * u[j].conj() + u[i] * q[j].conj();
                let t = w[(k + 1 + i, k + 1 + j)] - delta;
                w[(k + 1 + i, k + 1 + j)] = t;
            }
        }
        hh.push((u, h));
    }
    if n >= 2 {
        sub[n - 2] = w[(n - 1, n - 2)];
    }

    let mut d: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    let mut e = vec![0.0; n];
    let mut phases = vec![C64::new(1.0, 0.0); n];
    for k in 0..n - 1 {
        let mag = sub[k].norm();
        e[k] = mag;
        phases[k + 1] =
            if mag > 0.0 { phases[k] * (sub[k] / mag) } else { phases[k] };
    }

    let mut zt = Mat::identity(n);
    ql_implicit(&mut d, &mut e, Some(&mut zt))?;
    sort_ascending(&mut d, &mut zt);

    // Eigenvectors of A are H_0 .. H_{n-3} D z; rows of vt hold z scaled by
    // the phase diagonal, then the Householder reflectors apply in reverse.
    let mut vt = CMat::from_fn(n, n, |nu, j| phases[j] * zt[(nu, j)]);
    for nu in 0..n {
        let row = vt.row_mut(nu);
        for k in (0..n.saturating_sub(2)).rev() {
            let (u, h) = &hh[k];
            if u.is_empty() {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for (j, uj) in u.iter().enumerate() {
                acc += uj.conj() * row[k + 1 + j];
            }
            acc /= *h;
            for (j, uj) in u.iter().enumerate() {
                row[k + 1 + j] -= uj * acc;
            }
        }
    }
    fix_phases(&mut vt);
    Ok(EigHerm { values: d, vectors_t: vt })
}

/// Rotates each row's global phase so its first component with magnitude
/// above `1e-12` times the row maximum is real positive.
pub(crate) fn fix_phases(vt: &mut CMat) {
    for nu in 0..vt.rows() {
        let row = vt.row_mut(nu);
        let maxmag = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if maxmag == 0.0 {
            continue;
        }
        let lead = row.iter().find(|z| z.norm() > 1e-12 * maxmag);
        if let Some(&z0) = lead {
            let phase = z0 / z0.norm();
            let rot = phase.conj();
            for z in row.iter_mut() {
                *z *= rot;
            }
        }
    }
}

/// Modified Gram-Schmidt on the rows of `v`, in place. Rows come out
/// orthonormal; their span is preserved.
///
/// # Errors
///
/// [`Error::NoConvergence`] if a row is linearly dependent on its
/// predecessors (norm collapses below `1e-100`).
pub fn mgs_orthonormalize_rows(v: &mut CMat) -> Result<()> {
    let rows = v.rows();
    let cols = v.cols();
    for i in 0..rows {
        for j in 0..i {
            let mut dot = C64::new(0.0, 0.0);
            {
                let (a, b) = v.split_rows(j, i);
                for (x, y) in a.iter().zip(b.iter()) {
                    dot += x.conj() * *y;
                }
            }
            let (a, b) = v.split_rows(j, i);
            for (x, y) in a.iter().zip(b.iter_mut()) {
                *y -= dot * x;
            }
        }
        let norm = libm::sqrt(v.row(i).iter().map(|z| z.norm_sqr()).sum());
        if norm < 1e-100 {
            return Err(Error::NoConvergence(format!(
                "rank deficiency at row {i} of {rows} during re-orthonormalization"
            )));
        }
        let inv = 1.0 / norm;
        for z in v.row_mut(i) {
            *z *= inv;
        }
        let _ = cols;
    }
    Ok(())
}

impl CMat {
    /// Borrows rows `i` (shared) and `j` (mutable), `i < j`.
    fn split_rows(&mut self, i: usize, j: usize) -> (&[C64], &mut [C64]) {
        debug_assert!(i < j);
        let c = self.cols;
        let (a, b) = self.data.split_at_mut(j * c);
        (&a[i * c..(i + 1) * c], &mut b[..c])
    }
}

/// Solves `a x = b` for symmetric positive definite `a` by Cholesky
/// factorization; `a` is destroyed and `b` overwritten with the solution.
///
/// # Errors
///
/// [`Error::NoConvergence`] if a pivot is not strictly positive.
pub fn cholesky_solve(a: &mut Mat, b: &mut [f64]) -> Result<()> {
    let n = a.rows();
    assert_eq!(a.cols(), n, "cholesky needs a square matrix");
    assert_eq!(b.len(), n, "cholesky rhs length");
    for j in 0..n {
        let mut s = a[(j, j)];
        for k in 0..j {
            s -= a[(j, k)] * a[(j, k)];
        }
        if s <= 0.0 {
            return Err(Error::NoConvergence(format!(
                "non-positive pivot {s:e} at column {j} in Cholesky"
            )));
        }
        let ljj = libm::sqrt(s);
        a[(j, j)] = ljj;
        for i in j + 1..n {
            let mut t = a[(i, j)];
            for k in 0..j {
                t -= a[(i, k)] * a[(j, k)];
            }
            a[(i, j)] = t / ljj;
        }
    }
    for i in 0..n {
        let mut t = b[i];
        for k in 0..i {
            t -= a[(i, k)] * b[k];
        }
        b[i] = t / a[(i, i)];
    }
    for i in (0..n).rev() {
        let mut t = b[i];
        for k in i + 1..n {
            t -= a[(k, i)] * b[k];
        }
        b[i] = t / a[(i, i)];
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    /// Cyclic Jacobi eigensolver, kept here as an oracle with no code shared
    /// with the QL/Householder production path.
    fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
        let n = a.len();
        for _sweep in 0..60 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[i][j] * a[i][j];
                }
            }
            if off < 1e-28 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    if a[p][q].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                    let t = sign_mag(1.0, theta) / (theta.abs() + libm::hypot(theta, 1.0));
                    let c = 1.0 / libm::hypot(t, 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = CMat::from_fn(n, n, |_, _| C64::new(uniform(&mut rng), uniform(&mut rng)));
        let mut a = m.dagger();
        for i in 0..n {
            for j in 0..n {
                let t = a[(i, j)] + m[(i, j)];
                a[(i, j)] = t * 0.5;
            }
        }
        a
    }

    #[test]
    fn tridiagonal_toeplitz_matches_closed_form() {
        // diag delta, offdiag t: eigenvalues delta + 2 t cos(k pi / (n+1)).
        let n = 50;
        let (delta, t) = (0.7, -1.3);
        let tri = SymTridiag { diag: vec![delta; n], offdiag: vec![t; n - 1] };
        let eig = tri.eigh().unwrap();
        let mut exact: Vec<f64> = (1..=n)
            .map(|k| delta + 2.0 * t * libm::cos(k as f64 * core::f64::consts::PI / (n + 1) as f64))
            .collect();
        exact.sort_by(f64::total_cmp);
        for (got, want) in eig.values.iter().zip(&exact) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn tridiagonal_eigh_residual_and_orthonormality() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tri = SymTridiag {
            diag: (0..n).map(|_| 3.0 * uniform(&mut rng)).collect(),
            offdiag: (0..n - 1).map(|_| 2.0 * uniform(&mut rng)).collect(),
        };
        let eig = tri.eigh().unwrap();
        for nu in 0..n {
            let v = eig.vectors_t.row(nu);
            for i in 0..n {
                let mut av = tri.diag[i] * v[i];
                if i > 0 {
                    av += tri.offdiag[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    av += tri.offdiag[i] * v[i + 1];
                }
                assert_abs_diff_eq!(av, eig.values[nu] * v[i], epsilon = 1e-11);
            }
        }
        for a in 0..n {
            for b in a..n {
                let dot: f64 =
                    eig.vectors_t.row(a).iter().zip(eig.vectors_t.row(b)).map(|(x, y)| x * y).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, want, epsilon = 1e-12);
            }
        }
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn tridiagonal_eigenvalues_agree_with_jacobi_oracle() {
        let n = 12;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let diag: Vec<f64> = (0..n).map(|_| uniform(&mut rng)).collect();
        let off: Vec<f64> = (0..n - 1).map(|_| uniform(&mut rng)).collect();
        let mut full = vec![vec![0.0; n]; n];
        for i in 0..n {
            full[i][i] = diag[i];
            if i + 1 < n {
                full[i][i + 1] = off[i];
                full[i + 1][i] = off[i];
            }
        }
        let tri = SymTridiag { diag, offdiag: off };
        let got = tri.eigenvalues().unwrap();
        let want = jacobi_eigenvalues(full);
        for (g, w) in got.iter().zip(&want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn tridiagonal_sign_convention_largest_component_positive() {
        let tri = SymTridiag { diag: vec![0.0, 1.0, 5.0], offdiag: vec![0.3, 0.2] };
        let eig = tri.eigh().unwrap();
        for nu in 0..3 {
            let row = eig.vectors_t.row(nu);
            let best = row.iter().fold(0.0_f64, |m, v| if v.abs() > m.abs() { *v } else { m });
            assert!(best > 0.0);
        }
    }

    #[test]
    fn hermitian_two_by_two_closed_form() {
        let (a, b, c, d) = (0.4, -1.1, 0.9, 2.2);
        let m = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(a, 0.0),
            (1, 1) => C64::new(d, 0.0),
            (0, 1) => C64::new(b, -c),
            _ => C64::new(b, c),
        });
        let eig = eigh_hermitian(&m).unwrap();
        let mid = 0.5 * (a + d);
        let rad = libm::sqrt(0.25 * (a - d) * (a - d) + b * b + c * c);
        assert_abs_diff_eq!(eig.values[0], mid - rad, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], mid + rad, epsilon = 1e-14);
    }

    #[test]
    fn hermitian_residual_orthonormality_invariants() {
        let n = 24;
        let a = random_hermitian(n, 3);
        let eig = eigh_hermitian(&a).unwrap();
        let scale = a.max_norm();

        let mut trace = 0.0;
        let mut frob = 0.0;
        for i in 0..n {
            trace += a[(i, i)].re;
            for j in 0..n {
                frob += a[(i, j)].norm_sqr();
            }
        }
        assert_abs_diff_eq!(eig.values.iter().sum::<f64>(), trace, epsilon = 1e-11 * scale * n as f64);
        assert_abs_diff_eq!(
            eig.values.iter().map(|l| l * l).sum::<f64>(),
            frob,
            epsilon = 1e-10 * frob
        );

        for nu in 0..n {
            let v = eig.vectors_t.row(nu);
            for i in 0..n {
                let mut av = C64::new(0.0, 0.0);
                for j in 0..n {
                    av += a[(i, j)] * v[j];
                }
                let r = av - eig.values[nu] * v[i];
                assert!(r.norm() < 1e-11 * scale.max(1.0), "residual {}", r.norm());
            }
        }
        for p in 0..n {
            for q in p..n {
                let mut dot = C64::new(0.0, 0.0);
                for (x, y) in eig.vectors_t.row(p).iter().zip(eig.vectors_t.row(q)) {
                    dot += x.conj() * *y;
                }
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((dot - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hermitian_spectrum_matches_doubled_real_embedding() {
        // [[Re, -Im], [Im, Re]] is real symmetric with each eigenvalue of the
        // Hermitian matrix doubled; the embedding goes to the Jacobi oracle.
        let n = 8;
        let a = random_hermitian(n, 17);
        let mut emb = vec![vec![0.0; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                emb[i][j] = a[(i, j)].re;
                emb[n + i][n + j] = a[(i, j)].re;
                emb[i][n + j] = -a[(i, j)].im;
                emb[n + i][j] = a[(i, j)].im;
            }
        }
        let doubled = jacobi_eigenvalues(emb);
        let eig = eigh_hermitian(&a).unwrap();
        for (k, lambda) in eig.values.iter().enumerate() {
            assert_abs_diff_eq!(doubled[2 * k], *lambda, epsilon = 1e-11);
            assert_abs_diff_eq!(doubled[2 * k + 1], *lambda, epsilon = 1e-11);
        }
    }

    #[test]
    fn hermitian_phase_convention_first_significant_component_real_positive() {
        let a = random_hermitian(9, 23);
        let eig = eigh_hermitian(&a).unwrap();
        for nu in 0..9 {
            let row = eig.vectors_t.row(nu);
            let maxmag = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let lead = row.iter().find(|z| z.norm() > 1e-12 * maxmag).unwrap();
            assert!(lead.im.abs() < 1e-12 && lead.re > 0.0);
        }
    }

    #[test]
    fn hermitian_handles_real_symmetric_input() {
        let n = 10;
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut full = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = uniform(&mut rng);
                full[i][j] = v;
                full[j][i] = v;
            }
        }
        let a = CMat::from_fn(n, n, |i, j| C64::new(full[i][j], 0.0));
        let got = eigh_hermitian(&a).unwrap();
        let want = jacobi_eigenvalues(full);
        for (g, w) in got.values.iter().zip(&want) {
            assert_abs_diff_eq!(g, w, epsilon = 1e-11);
        }
    }

    #[test]
    fn mgs_orthonormalizes_and_preserves_span() {
        let (rows, cols) = (6, 15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let orig = CMat::from_fn(rows, cols, |_, _| C64::new(uniform(&mut rng), uniform(&mut rng)));
        let mut v = orig.clone();
        mgs_orthonormalize_rows(&mut v).unwrap();
        for p in 0..rows {
            for q in p..rows {
                let mut dot = C64::new(0.0, 0.0);
                for (x, y) in v.row(p).iter().zip(v.row(q)) {
                    dot += x.conj() * *y;
                }
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((dot - want).norm() < 1e-13);
            }
        }
        // Every original row must lie in the span of the output rows.
        for p in 0..rows {
            let mut residual: Vec<C64> = orig.row(p).to_vec();
            for q in 0..rows {
                let mut dot = C64::new(0.0, 0.0);
                for (x, y) in v.row(q).iter().zip(orig.row(p)) {
                    dot += x.conj() * *y;
                }
                for (r, x) in residual.iter_mut().zip(v.row(q)) {
                    *r -= dot * x;
                }
            }
            let norm: f64 = residual.iter().map(|z| z.norm_sqr()).sum::<f64>();
            assert!(norm < 1e-24);
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let n = 5;
        let m = Mat::from_fn(n, n, |_, _| uniform(&mut rng));
        // m^T m + I is symmetric positive definite.
        let mut a = m.transpose().matmul(&m);
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += a[(i, j)] * x_true[j];
            }
        }
        cholesky_solve(&mut a.clone(), &mut b).unwrap();
        for (got, want) in b.iter().zip(&x_true) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn matmul_agrees_with_naive_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = Mat::from_fn(7, 4, |_, _| uniform(&mut rng));
        let b = Mat::from_fn(4, 6, |_, _| uniform(&mut rng));
        let c = a.matmul(&b);
        for i in 0..7 {
            for j in 0..6 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += a[(i, k)] * b[(k, j)];
                }
                assert_abs_diff_eq!(c[(i, j)], s, epsilon = 1e-14);
            }
        }
    }
}
