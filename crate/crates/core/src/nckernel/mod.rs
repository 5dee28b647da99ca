//! Nc kernels `K(Z, W)(P)` in moment, Kolmogorov and Gram-basis form.
//!
//! For points of sizes `n` and `m` and `P ∈ 𝒜^{n×m}` the value is an
//! `(n·y) × (m·y)` matrix in `ℒ(𝒴^m, 𝒴^n)`.

mod cert;
mod tools;

use std::collections::BTreeMap;
use std::rc::Rc;

pub use cert::{
    check_kernel_axioms, cp_certificate, cp_certificate_similarity_reduced, CertConfig, CpCertificate, DirectSumSample,
    IntertwinerSample, KernelSamples,
};
pub use tools::{cb_norm_report, kolmogorov_at_sample, CbNormReport, EnvelopeKernel, KolmogorovSample};

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_violation, hstack, identity, kron, min_eig_hermitian, pinv_solve, rank, rel_diff, singular_values, vec_row,
    zeros, CMat, Tolerances,
};
use crate::ncfun::{nilpotency_order, NcSeries};
use crate::scalar::{creal, to_f64, Real};
use crate::tuple::MatrixTuple;
use crate::word::{count_words_up_to, Word};

/// A two-variable kernel on matrix tuples with values in `ℒ(𝒜, ℒ(𝒴))`.
pub trait NcKernel<R: Real> {
    fn d(&self) -> usize;
    fn y_dim(&self) -> usize;
    /// Size `k` of the coefficient algebra `ℂ^{k×k}`.
    fn algebra_k(&self) -> usize;
    /// `K(Z, W)(P)` for `P` of shape `(n·k) × (m·k)`.
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>>;
    /// True when the kernel is only defined on jointly nilpotent points.
    fn needs_nilpotent(&self) -> bool {
        false
    }
}

pub(crate) fn check_args<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    z: &MatrixTuple<R>,
    w: &MatrixTuple<R>,
    p: &CMat<R>,
) -> Result<()> {
    if z.d() != k.d() || w.d() != k.d() {
        return Err(Error::DimMismatch(format!(
            "kernel has d = {} but points have d = {} and {}",
            k.d(),
            z.d(),
            w.d()
        )));
    }
    let a = k.algebra_k();
    if p.shape() != (z.n() * a, w.n() * a) {
        return Err(Error::DimMismatch(format!(
            "argument is {}x{}, expected {}x{}",
            p.nrows(),
            p.ncols(),
            z.n() * a,
            w.n() * a
        )));
    }
    Ok(())
}

/// Moment kernel `K(Z, W)(P) = Σ Z^a P (W^b)* ⊗ K_{a,b}` over the scalar algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentForm<R: Real> {
    d: usize,
    y_dim: usize,
    max_len: usize,
    moments: BTreeMap<(Word, Word), CMat<R>>,
    allow_truncation: bool,
}

impl<R: Real> MomentForm<R> {
    pub fn new(d: usize, y_dim: usize, max_len: usize, moments: Vec<((Word, Word), CMat<R>)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimMismatch("a kernel needs d >= 1".into()));
        }
        let mut table = BTreeMap::new();
        for ((a, b), c) in moments {
            a.check(d)?;
            b.check(d)?;
            if a.len() > max_len || b.len() > max_len {
                return Err(Error::DimMismatch(format!("moment ({a}, {b}) is longer than max_len {max_len}")));
            }
            if c.shape() != (y_dim, y_dim) {
                return Err(Error::ShapeMismatch(format!(
                    "moment ({a}, {b}) is {}x{}, expected {y_dim}x{y_dim}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            crate::linalg::ensure_finite(&c)?;
            if table.insert((a.clone(), b.clone()), c).is_some() {
                return Err(Error::Duplicate(format!("moment ({a}, {b}) appears twice")));
            }
        }
        Ok(Self { d, y_dim, max_len, moments: table, allow_truncation: false })
    }

    /// The Szegő kernel: `K_{a,b} = δ_{a,b} I_y` for all words up to `max_len`.
    pub fn szego(d: usize, y_dim: usize, max_len: usize) -> Self {
        let moments = crate::word::words_up_to(d, max_len)
            .into_iter()
            .map(|w| ((w.clone(), w), identity(y_dim)))
            .collect();
        Self::new(d, y_dim, max_len, moments).expect("well-formed szego table")
    }

    /// Moments `K_{a,b} = H_a H_b*` of a series `H`, up to `max_len`.
    pub fn from_factor(h: &NcSeries<R>, max_len: usize) -> Self {
        let words = crate::word::words_up_to(h.d(), max_len);
        let mut moments = Vec::new();
        for a in &words {
            for b in &words {
                if let (Some(ha), Some(hb)) = (h.coeff(a), h.coeff(b)) {
                    moments.push(((a.clone(), b.clone()), ha * hb.adjoint()));
                }
            }
        }
        Self::new(h.d(), h.out_dim(), max_len, moments).expect("well-formed factor table")
    }

    /// Allows evaluation at points whose nilpotency order exceeds `max_len + 1`.
    pub fn with_truncation(mut self, allow: bool) -> Self {
        self.allow_truncation = allow;
        self
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn allows_truncation(&self) -> bool {
        self.allow_truncation
    }

    pub fn moments(&self) -> &BTreeMap<(Word, Word), CMat<R>> {
        &self.moments
    }

    pub fn moment_or_zero(&self, a: &Word, b: &Word) -> CMat<R> {
        self.moments
            .get(&(a.clone(), b.clone()))
            .cloned()
            .unwrap_or_else(|| zeros(self.y_dim, self.y_dim))
    }

    /// Scales every moment by a real factor.
    pub fn scaled(&self, c: R) -> Self {
        Self {
            moments: self.moments.iter().map(|(k, v)| (k.clone(), v * creal(c))).collect(),
            ..self.clone()
        }
    }

    fn check_order(&self, z: &MatrixTuple<R>, tol: &Tolerances<R>) -> Result<()> {
        if self.allow_truncation {
            return Ok(());
        }
        let order = match nilpotency_order(z, tol) {
            Ok(o) => o,
            Err(Error::NotNilpotent) => {
                return Err(Error::TruncationRefused { max_len: self.max_len, order: z.n() + 1 })
            }
            Err(e) => return Err(e),
        };
        if order > self.max_len + 1 {
            return Err(Error::TruncationRefused { max_len: self.max_len, order });
        }
        Ok(())
    }
}

impl<R: Real> NcKernel<R> for MomentForm<R> {
    fn d(&self) -> usize {
        self.d
    }
    fn y_dim(&self) -> usize {
        self.y_dim
    }
    fn algebra_k(&self) -> usize {
        1
    }
    fn needs_nilpotent(&self) -> bool {
        true
    }
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>> {
        check_args(self, z, w, p)?;
        let tol = Tolerances::default();
        self.check_order(z, &tol)?;
        self.check_order(w, &tol)?;
        let mz = z.monomials_up_to(self.max_len);
        let mw: Vec<CMat<R>> = w.monomials_up_to(self.max_len).iter().map(|m| m.adjoint()).collect();
        let mut out = zeros(z.n() * self.y_dim, w.n() * self.y_dim);
        for ((a, b), c) in &self.moments {
            let inner = &mz[a.index(self.d)] * p * &mw[b.index(self.d)];
            out += kron(&inner, c);
        }
        Ok(out)
    }
}

/// Kernel `K(Z, W)(P) = H(Z) (P ⊗ I_r) H(W)*` with `H` valued in `ℒ(ℂ^{k·r}, 𝒴)`.
#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovForm<R: Real> {
    algebra: AlgebraSpec,
    h: NcSeries<R>,
}

impl<R: Real> KolmogorovForm<R> {
    pub fn new(algebra: AlgebraSpec, h: NcSeries<R>) -> Result<Self> {
        if h.in_dim() != algebra.rep_dim() {
            return Err(Error::ShapeMismatch(format!(
                "factor has {} columns but the representation space has dimension {}",
                h.in_dim(),
                algebra.rep_dim()
            )));
        }
        Ok(Self { algebra, h })
    }

    pub fn algebra(&self) -> AlgebraSpec {
        self.algebra
    }

    pub fn h(&self) -> &NcSeries<R> {
        &self.h
    }
}

impl<R: Real> NcKernel<R> for KolmogorovForm<R> {
    fn d(&self) -> usize {
        self.h.d()
    }
    fn y_dim(&self) -> usize {
        self.h.out_dim()
    }
    fn algebra_k(&self) -> usize {
        self.algebra.k()
    }
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>> {
        check_args(self, z, w, p)?;
        let hz = self.h.eval(z)?;
        let hw = self.h.eval(w)?;
        Ok(hz * self.algebra.sigma(p) * hw.adjoint())
    }
}

/// Kernel of a finite-dimensional space spanned by `f_1, …, f_S` with gramian `G_{ij} = ⟨f_j, f_i⟩`.
///
/// Each `f_i` is a series with `y × k²` coefficients acting on row-major
/// vectorized columns over `𝒜`: `f(W)(u) = f(W) · vec_row(u)` for `u ∈ 𝒜^m`.
/// The span must be closed under `(σ(a) f)(W)(u) = f(W)(u a)`, which acts on
/// coefficients by `c ↦ c (I_k ⊗ aᵀ)`, and the induced action must be a
/// *-representation for `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBasisForm<R: Real> {
    algebra: AlgebraSpec,
    d: usize,
    y_dim: usize,
    basis: Vec<NcSeries<R>>,
    gram: CMat<R>,
    gram_inv: CMat<R>,
    sigma_units: Vec<CMat<R>>,
    degree: usize,
}

impl<R: Real> GramBasisForm<R> {
    pub fn new(
        algebra: AlgebraSpec,
        d: usize,
        y_dim: usize,
        basis: Vec<NcSeries<R>>,
        gram: CMat<R>,
        tol: &Tolerances<R>,
    ) -> Result<Self> {
        let k = algebra.k();
        let s = basis.len();
        for (i, f) in basis.iter().enumerate() {
            if f.d() != d || f.out_dim() != y_dim || f.in_dim() != k * k {
                return Err(Error::ShapeMismatch(format!(
                    "basis function {} has d = {}, shape {}x{}; expected d = {d}, {y_dim}x{}",
                    i + 1,
                    f.d(),
                    f.out_dim(),
                    f.in_dim(),
                    k * k
                )));
            }
        }
        if gram.shape() != (s, s) {
            return Err(Error::ShapeMismatch(format!("gram is {}x{} for {s} basis functions", gram.nrows(), gram.ncols())));
        }
        crate::linalg::ensure_finite(&gram)?;
        let hv = hermitian_violation(&gram);
        if !(hv <= tol.eq_rel) {
            return Err(Error::NotHermitian { violation: to_f64(hv) });
        }
        let gram = crate::linalg::hermitian_part(&gram);
        let sv = singular_values(&gram);
        let top = sv.first().copied().unwrap_or_else(R::one);
        if s > 0 {
            let min = min_eig_hermitian(&gram)?;
            if !(min > tol.psd_threshold(top)) {
                return Err(Error::GramNotPositive { min_eig: to_f64(min) });
            }
        }
        let cond = if s > 0 { top / *sv.last().expect("nonempty") } else { R::one() };
        let gram_inv = crate::linalg::inverse(&gram).unwrap_or_else(|_| zeros(0, 0));
        let degree = basis.iter().filter_map(|f| f.degree()).max().unwrap_or(0);

        let coeffs = hstack(
            count_words_up_to(d, degree) * y_dim * k * k,
            &basis.iter().map(|f| f.coefficient_vector(degree)).collect::<Vec<_>>(),
        );
        let rk = rank(&coeffs, tol.psd_floor);
        if rk < s {
            return Err(Error::LinearlyDependent { rank: rk, size: s });
        }

        let threshold = tol.eq_rel * cond.max(R::one());
        let mut sigma_units = Vec::with_capacity(k * k);
        for a in algebra.generators::<R>() {
            let right = kron(&identity(k), &a.transpose());
            let moved: Vec<CMat<R>> = basis
                .iter()
                .map(|f| {
                    f.map_coeffs(y_dim, k * k, |c| c * &right)
                        .expect("shape preserved")
                        .coefficient_vector(degree)
                })
                .collect();
            let target = hstack(coeffs.nrows(), &moved);
            let x = pinv_solve(&coeffs, &target, tol.psd_floor)?;
            let residual = rel_diff(&(&coeffs * &x), &target);
            if !(residual <= threshold) {
                return Err(Error::NotSigmaClosed { residual: to_f64(residual) });
            }
            sigma_units.push(x);
        }
        let model = Self { algebra, d, y_dim, basis, gram, gram_inv, sigma_units, degree };
        if s > 0 {
            for p in 0..k {
                for q in 0..k {
                    let x = &model.sigma_units[p * k + q];
                    let adj = &model.gram_inv * x.adjoint() * &model.gram;
                    let v = rel_diff(&adj, &model.sigma_units[q * k + p]);
                    if !(v <= threshold) {
                        return Err(Error::NotStarRepresentation { violation: to_f64(v) });
                    }
                }
            }
        }
        Ok(model)
    }

    pub fn algebra(&self) -> AlgebraSpec {
        self.algebra
    }

    pub fn basis(&self) -> &[NcSeries<R>] {
        &self.basis
    }

    pub fn gram(&self) -> &CMat<R> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &CMat<R> {
        &self.gram_inv
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Largest word length among the basis supports.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficient matrices of `σ(e_pq)`, row-major in `(p, q)`.
    pub fn sigma_units(&self) -> &[CMat<R>] {
        &self.sigma_units
    }

    /// `Φ_i(Z) = f_i(Z) (I_n ⊗ E)` where `E` places `ℂ^{n·k}` into the first column of `𝒜^n`.
    pub(crate) fn column_values(&self, z: &MatrixTuple<R>) -> Result<Vec<CMat<R>>> {
        let k = self.algebra.k();
        let mut e = zeros(k * k, k);
        for a in 0..k {
            e[(a * k, a)] = creal(R::one());
        }
        let embed = kron(&identity(z.n()), &e);
        self.basis.iter().map(|f| Ok(f.eval(z)? * &embed)).collect()
    }
}

impl<R: Real> NcKernel<R> for GramBasisForm<R> {
    fn d(&self) -> usize {
        self.d
    }
    fn y_dim(&self) -> usize {
        self.y_dim
    }
    fn algebra_k(&self) -> usize {
        self.algebra.k()
    }
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>> {
        check_args(self, z, w, p)?;
        let phi_z = self.column_values(z)?;
        let phi_w = self.column_values(w)?;
        let mut out = zeros(z.n() * self.y_dim, w.n() * self.y_dim);
        for (b, fw) in phi_w.iter().enumerate() {
            let mut left = zeros(z.n() * self.y_dim, z.n() * self.algebra.k());
            for (a, fz) in phi_z.iter().enumerate() {
                left += fz * self.gram_inv[(a, b)];
            }
            out += left * p * fw.adjoint();
        }
        Ok(out)
    }
}

/// A kernel in one of the three stored forms.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelRep<R: Real> {
    Moment(MomentForm<R>),
    Kolmogorov(KolmogorovForm<R>),
    GramBasis(GramBasisForm<R>),
}

impl<R: Real> KernelRep<R> {
    fn inner(&self) -> &dyn NcKernel<R> {
        match self {
            KernelRep::Moment(k) => k,
            KernelRep::Kolmogorov(k) => k,
            KernelRep::GramBasis(k) => k,
        }
    }
}

impl<R: Real> NcKernel<R> for KernelRep<R> {
    fn d(&self) -> usize {
        self.inner().d()
    }
    fn y_dim(&self) -> usize {
        self.inner().y_dim()
    }
    fn algebra_k(&self) -> usize {
        self.inner().algebra_k()
    }
    fn needs_nilpotent(&self) -> bool {
        self.inner().needs_nilpotent()
    }
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>> {
        self.inner().eval(z, w, p)
    }
}

impl<R: Real> From<MomentForm<R>> for KernelRep<R> {
    fn from(k: MomentForm<R>) -> Self {
        KernelRep::Moment(k)
    }
}

impl<R: Real> From<KolmogorovForm<R>> for KernelRep<R> {
    fn from(k: KolmogorovForm<R>) -> Self {
        KernelRep::Kolmogorov(k)
    }
}

impl<R: Real> From<GramBasisForm<R>> for KernelRep<R> {
    fn from(k: GramBasisForm<R>) -> Self {
        KernelRep::GramBasis(k)
    }
}

pub type SharedKernel<R> = Rc<dyn NcKernel<R>>;

/// `c · K` for a real `c`.
pub struct Scaled<R: Real> {
    pub kernel: SharedKernel<R>,
    pub factor: R,
}

impl<R: Real> NcKernel<R> for Scaled<R> {
    fn d(&self) -> usize {
        self.kernel.d()
    }
    fn y_dim(&self) -> usize {
        self.kernel.y_dim()
    }
    fn algebra_k(&self) -> usize {
        self.kernel.algebra_k()
    }
    fn needs_nilpotent(&self) -> bool {
        self.kernel.needs_nilpotent()
    }
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>> {
        Ok(self.kernel.eval(z, w, p)? * creal(self.factor))
    }
}

/// `K − K′`.
pub struct Difference<R: Real> {
    pub left: SharedKernel<R>,
    pub right: SharedKernel<R>,
}

impl<R: Real> Difference<R> {
    pub fn new(left: SharedKernel<R>, right: SharedKernel<R>) -> Result<Self> {
        if left.d() != right.d() || left.y_dim() != right.y_dim() || left.algebra_k() != right.algebra_k() {
            return Err(Error::DimMismatch("kernels differ in d, y_dim or algebra".into()));
        }
        Ok(Self { left, right })
    }
}

impl<R: Real> NcKernel<R> for Difference<R> {
    fn d(&self) -> usize {
        self.left.d()
    }
    fn y_dim(&self) -> usize {
        self.left.y_dim()
    }
    fn algebra_k(&self) -> usize {
        self.left.algebra_k()
    }
    fn needs_nilpotent(&self) -> bool {
        self.left.needs_nilpotent() || self.right.needs_nilpotent()
    }
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>> {
        Ok(self.left.eval(z, w, p)? - self.right.eval(z, w, p)?)
    }
}

/// A kernel element `K_{W,v,y}`: point `W` of size `m`, row `v` over `𝒜` of shape
/// `k × (m·k)`, and `y ∈ 𝒴^m` as an `(m·y) × 1` column.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelElement<R: Real> {
    pub w: MatrixTuple<R>,
    pub v: CMat<R>,
    pub y: CMat<R>,
}

/// `K_{W,v,y}(Z) u = K(Z, W)(u v) y` for a column `u` over `𝒜` of shape `(n·k) × k`.
pub fn kernel_element_eval<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    e: &KernelElement<R>,
    z: &MatrixTuple<R>,
    u: &CMat<R>,
) -> Result<CMat<R>> {
    let a = k.algebra_k();
    if u.shape() != (z.n() * a, a) || e.v.shape() != (a, e.w.n() * a) || e.y.shape() != (e.w.n() * k.y_dim(), 1) {
        return Err(Error::DimMismatch("kernel element shapes".into()));
    }
    Ok(k.eval(z, &e.w, &(u * &e.v))? * &e.y)
}

/// Shorthand for `vec_row` of a column over `𝒜`, the argument layout of basis functions.
pub fn algebra_column_vector<R: Real>(u: &CMat<R>) -> CMat<R> {
    vec_row(u)
}

pub fn eval_kernel<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    z: &MatrixTuple<R>,
    w: &MatrixTuple<R>,
    p: &CMat<R>,
) -> Result<CMat<R>> {
    k.eval(z, w, p)
}

#[cfg(test)]
mod tests;
