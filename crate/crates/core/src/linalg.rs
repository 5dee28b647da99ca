//! Dense complex matrix utilities and the tolerance policy.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, creal, czero, lit, to_f64, Real};

pub type CMat<R> = DMatrix<Complex<R>>;
pub type CVec<R> = DVector<Complex<R>>;

/// Thresholds used by every equality and positivity check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances<R> {
    /// Relative Frobenius equality threshold.
    pub eq_rel: R,
    /// Eigenvalue floor relative to the spectral norm.
    pub psd_floor: R,
    /// Largest condition number allowed for generated similarities.
    pub cond_max: R,
}

impl<R: Real> Default for Tolerances<R> {
    fn default() -> Self {
        Self {
            eq_rel: lit(1e-10),
            psd_floor: lit(1e-9),
            cond_max: lit(1e3),
        }
    }
}

impl<R: Real> Tolerances<R> {
    pub fn new(eq_rel: R, psd_floor: R, cond_max: R) -> Result<Self> {
        for (name, v) in [("eq_rel", eq_rel), ("psd_floor", psd_floor), ("cond_max", cond_max)] {
            if !(v > R::zero()) || !v.is_finite() {
                return Err(Error::InvalidTolerance(format!("{name} must be positive, got {}", to_f64(v))));
            }
        }
        Ok(Self { eq_rel, psd_floor, cond_max })
    }

    /// Floor magnitude for a matrix of spectral norm `norm`.
    pub fn psd_threshold(&self, norm: R) -> R {
        self.psd_floor * norm.max(R::one())
    }
}

pub fn identity<R: Real>(n: usize) -> CMat<R> {
    CMat::identity(n, n)
}

pub fn zeros<R: Real>(rows: usize, cols: usize) -> CMat<R> {
    CMat::zeros(rows, cols)
}

/// Matrix with a single one at `(i, j)`.
pub fn matrix_unit<R: Real>(rows: usize, cols: usize, i: usize, j: usize) -> CMat<R> {
    let mut m = zeros(rows, cols);
    m[(i, j)] = cone();
    m
}

/// Real-valued matrix from row-major data.
pub fn cmat_real<R: Real>(rows: usize, cols: usize, data: &[f64]) -> CMat<R> {
    assert_eq!(data.len(), rows * cols, "cmat_real: data length");
    CMat::from_fn(rows, cols, |i, j| creal(lit(data[i * cols + j])))
}

/// Complex matrix from row-major `(re, im)` pairs.
pub fn cmat_complex<R: Real>(rows: usize, cols: usize, data: &[(f64, f64)]) -> CMat<R> {
    assert_eq!(data.len(), rows * cols, "cmat_complex: data length");
    CMat::from_fn(rows, cols, |i, j| {
        let (re, im) = data[i * cols + j];
        Complex::new(lit(re), lit(im))
    })
}

/// Block (i, j) of the result is `a[(i, j)] * b`.
pub fn kron<R: Real>(a: &CMat<R>, b: &CMat<R>) -> CMat<R> {
    a.kronecker(b)
}

pub fn ensure_square<R: Real>(m: &CMat<R>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

pub fn ensure_finite<R: Real>(m: &CMat<R>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `(m + m*) / 2`.
pub fn hermitian_part<R: Real>(m: &CMat<R>) -> CMat<R> {
    (m + m.adjoint()) * creal(lit::<R>(0.5))
}

/// Relative deviation from hermiticity, `‖m − m*‖_F / max(1, ‖m‖_F)`.
pub fn hermitian_violation<R: Real>(m: &CMat<R>) -> R {
    rel_diff(m, &m.adjoint())
}

/// `‖a − b‖_F / max(1, ‖a‖_F, ‖b‖_F)`.
pub fn rel_diff<R: Real>(a: &CMat<R>, b: &CMat<R>) -> R {
    let scale = R::one().max(a.norm()).max(b.norm());
    (a - b).norm() / scale
}

/// Eigen-decomposition of the hermitian part, eigenvalues ascending.
pub fn hermitian_eigen<R: Real>(m: &CMat<R>) -> Result<(Vec<R>, CMat<R>)> {
    ensure_square(m)?;
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), zeros(0, 0)));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// Smallest eigenvalue of `(m + m*) / 2`. An empty matrix reports `+inf`.
pub fn min_eig_hermitian<R: Real>(m: &CMat<R>) -> Result<R> {
    let (vals, _) = hermitian_eigen(m)?;
    Ok(vals.first().copied().unwrap_or_else(|| lit(f64::INFINITY)))
}

/// Largest singular value.
pub fn spectral_norm<R: Real>(m: &CMat<R>) -> R {
    if m.nrows() == 0 || m.ncols() == 0 {
        return R::zero();
    }
    singular_values(m).first().copied().unwrap_or_else(R::zero)
}

/// PSD test against the floor `−psd_floor·max(1, ‖m‖₂)`.
///
/// Returns the minimum eigenvalue and the floor it was compared with.
pub fn psd_check<R: Real>(m: &CMat<R>, tol: &Tolerances<R>) -> Result<(bool, R, R)> {
    let (vals, _) = hermitian_eigen(m)?;
    let norm = vals.iter().fold(R::zero(), |a, v| a.max(v.abs()));
    let floor = tol.psd_threshold(norm);
    let min = vals.first().copied().unwrap_or_else(R::zero);
    Ok((min >= -floor, min, floor))
}

/// Factor `m ≈ F F*` from the eigen-decomposition, clipping eigenvalues at the floor.
///
/// Columns of `F` follow descending eigenvalue; the column count is the number of
/// eigenvalues above the floor.
pub fn psd_factor<R: Real>(m: &CMat<R>, tol: &Tolerances<R>) -> Result<CMat<R>> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let norm = vals.iter().fold(R::zero(), |a, v| a.max(v.abs()));
    let floor = tol.psd_threshold(norm);
    if let Some(&min) = vals.first() {
        if min < -floor {
            return Err(Error::NotPsd { eigenvalue: to_f64(min), floor: to_f64(-floor) });
        }
    }
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > floor).collect();
    let n = m.nrows();
    Ok(CMat::from_fn(n, keep.len(), |r, c| {
        let i = keep[c];
        vecs[(r, i)] * creal(vals[i].sqrt())
    }))
}

/// Spectral function of a hermitian matrix with nonnegative spectrum.
fn hermitian_fn<R: Real>(m: &CMat<R>, f: impl Fn(R) -> R) -> Result<CMat<R>> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let n = m.nrows();
    let d = CMat::from_fn(n, n, |i, j| if i == j { creal(f(vals[i])) } else { czero() });
    Ok(&vecs * d * vecs.adjoint())
}

/// Principal square root of a PSD matrix (negative rounding clipped to zero).
pub fn psd_sqrt<R: Real>(m: &CMat<R>) -> Result<CMat<R>> {
    hermitian_fn(m, |x| x.max(R::zero()).sqrt())
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt<R: Real>(m: &CMat<R>) -> Result<CMat<R>> {
    let (vals, _) = hermitian_eigen(m)?;
    if let Some(&min) = vals.first() {
        if !(min > R::zero()) {
            return Err(Error::GramNotPositive { min_eig: to_f64(min) });
        }
    }
    hermitian_fn(m, |x| R::one() / x.sqrt())
}

/// Inverse of a square matrix.
pub fn inverse<R: Real>(m: &CMat<R>) -> Result<CMat<R>> {
    ensure_square(m)?;
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::DimMismatch("matrix is singular".into()))
}

/// Singular values, descending.
pub fn singular_values<R: Real>(m: &CMat<R>) -> Vec<R> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    thin_svd(m).1
}

/// Numerical rank: singular values above `rel·σ_max`.
pub fn rank<R: Real>(m: &CMat<R>, rel: R) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or_else(R::zero);
    s.iter().filter(|&&x| x > rel * top && x > R::zero()).count()
}

/// Minimum-norm least-squares solution of `a x = b` via the pseudo-inverse.
///
/// Singular values at or below `rel·σ_max` are treated as zero.
pub fn pinv_solve<R: Real>(a: &CMat<R>, b: &CMat<R>, rel: R) -> Result<CMat<R>> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimMismatch(format!(
            "system has {} rows but right side has {}",
            a.nrows(),
            b.nrows()
        )));
    }
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(zeros(a.ncols(), b.ncols()));
    }
    let (u, sv, v) = thin_svd(a);
    let top = sv.iter().fold(R::zero(), |acc, &s| acc.max(s));
    let mut scaled = u.adjoint() * b;
    for (i, &s) in sv.iter().enumerate() {
        let inv = if s > rel * top && s > R::zero() { R::one() / s } else { R::zero() };
        for c in 0..scaled.ncols() {
            scaled[(i, c)] *= creal(inv);
        }
    }
    Ok(v * scaled)
}

/// Thin SVD `a = U diag(s) V*` with `s` descending, by one-sided Jacobi.
///
/// nalgebra's complex SVD can return singular vectors that fail to reconstruct
/// rank-deficient inputs, so this routine is used everywhere instead. Left
/// vectors for zero singular values are returned as zero columns.
pub fn thin_svd<R: Real>(a: &CMat<R>) -> (CMat<R>, Vec<R>, CMat<R>) {
    if a.nrows() < a.ncols() {
        let (u, s, v) = thin_svd(&a.adjoint());
        return (v, s, u);
    }
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v: CMat<R> = identity(n);
    let eps: R = lit(f64::EPSILON);
    let two: R = lit(2.0);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let data = w.as_slice();
                    let (cp, cq) = (&data[p * m..(p + 1) * m], &data[q * m..(q + 1) * m]);
                    let mut acc = (R::zero(), R::zero(), czero::<R>());
                    for (x, y) in cp.iter().zip(cq) {
                        acc.0 += x.norm_sqr();
                        acc.1 += y.norm_sqr();
                        acc.2 += x.conj() * y;
                    }
                    acc
                };
                let g = nalgebra::ComplexField::modulus(gamma);
                if !(g > eps * (alpha * beta).sqrt()) || g == R::zero() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / creal(g)).conj();
                let zeta = (beta - alpha) / (two * g);
                let sign = if zeta >= R::zero() { R::one() } else { -R::one() };
                let t = sign / (zeta.abs() + (R::one() + zeta * zeta).sqrt());
                let c = R::one() / (R::one() + t * t).sqrt();
                let sn = c * t;
                // Unit phase on column q makes the inner product real, then a real rotation.
                for (mat, rows) in [(&mut w, m), (&mut v, n)] {
                    let (head, tail) = mat.as_mut_slice().split_at_mut(q * rows);
                    let cp = &mut head[p * rows..(p + 1) * rows];
                    let cq = &mut tail[..rows];
                    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
                        let a0 = *xp;
                        let b0 = *xq * phase;
                        *xp = a0.scale(c) - b0.scale(sn);
                        *xq = a0.scale(sn) + b0.scale(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<R> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
    let s: Vec<R> = order.iter().map(|&i| norms[i]).collect();
    let u = CMat::from_fn(m, n, |r, c| {
        let j = order[c];
        if norms[j] > R::zero() {
            w[(r, j)] / creal(norms[j])
        } else {
            czero()
        }
    });
    let v = CMat::from_fn(n, n, |r, c| v[(r, order[c])]);
    (u, s, v)
}

/// Pseudo-inverse.
pub fn pinv<R: Real>(a: &CMat<R>, rel: R) -> Result<CMat<R>> {
    pinv_solve(a, &identity(a.nrows()), rel)
}

/// Orthonormal basis of the column span (columns above `rel·σ_max`).
pub fn column_basis<R: Real>(a: &CMat<R>, rel: R) -> CMat<R> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return zeros(a.nrows(), 0);
    }
    let (u, sv, _) = thin_svd(a);
    let top = sv.iter().fold(R::zero(), |acc, &s| acc.max(s));
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > rel * top && sv[i] > R::zero()).collect();
    CMat::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Block-diagonal assembly of possibly rectangular blocks.
pub fn block_diag<R: Real>(blocks: &[CMat<R>]) -> CMat<R> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Horizontal concatenation; all blocks share the row count `rows`.
pub fn hstack<R: Real>(rows: usize, blocks: &[CMat<R>]) -> CMat<R> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Vertical concatenation; all blocks share the column count `cols`.
pub fn vstack<R: Real>(cols: usize, blocks: &[CMat<R>]) -> CMat<R> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// Row-major vectorization as a column.
pub fn vec_row<R: Real>(m: &CMat<R>) -> CMat<R> {
    let (r, c) = m.shape();
    CMat::from_fn(r * c, 1, |i, _| m[(i / c, i % c)])
}

/// Inverse of [`vec_row`].
pub fn unvec_row<R: Real>(v: &CMat<R>, rows: usize, cols: usize) -> CMat<R> {
    CMat::from_fn(rows, cols, |i, j| v[(i * cols + j, 0)])
}

/// Block `(i, j)` of size `bh × bw`.
pub fn block<R: Real>(m: &CMat<R>, i: usize, j: usize, bh: usize, bw: usize) -> CMat<R> {
    m.view((i * bh, j * bw), (bh, bw)).into_owned()
}

/// Column `j` as an `n × 1` matrix.
pub fn column<R: Real>(m: &CMat<R>, j: usize) -> CMat<R> {
    CMat::from_fn(m.nrows(), 1, |i, _| m[(i, j)])
}

/// Hermitian inner product `⟨x, y⟩ = y* x` of column matrices.
pub fn inner<R: Real>(x: &CMat<R>, y: &CMat<R>) -> Complex<R> {
    x.iter().zip(y.iter()).fold(czero(), |acc, (a, b)| acc + a * b.conj())
}
