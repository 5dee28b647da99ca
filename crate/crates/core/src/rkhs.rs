//! Finite-dimensional nc reproducing kernel Hilbert spaces.
//!
//! A model is a basis `f_1, …, f_S` with gramian `G_{ij} = ⟨f_j, f_i⟩`. Elements
//! are coefficient columns `c` standing for `Σ c_i f_i`, and `⟨a, b⟩ = b* G a`.

use num_complex::Complex;
use rand::Rng;

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigen, identity, kron, pinv_solve, rel_diff, singular_values, spectral_norm, vec_row, zeros, CMat,
    Tolerances,
};
use crate::ncfun::{AxiomReport, NcSeries, Witness};
use crate::nckernel::{GramBasisForm, KernelElement, KolmogorovForm, NcKernel};
use crate::sampler::{random_pd, random_series};
use crate::scalar::{creal, czero, lit, to_f64, Real};
use crate::tuple::MatrixTuple;

/// Coefficients of `Σ c_i f_i` as an `S × 1` column.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceElement<R: Real> {
    pub coeffs: CMat<R>,
}

impl<R: Real> SpaceElement<R> {
    pub fn new(coeffs: CMat<R>) -> Self {
        Self { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        Self { coeffs: zeros(dim, 1) }
    }

    pub fn basis_vector(dim: usize, i: usize) -> Self {
        let mut coeffs = zeros(dim, 1);
        coeffs[(i, 0)] = creal(R::one());
        Self { coeffs }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { coeffs: &self.coeffs + &other.coeffs }
    }

    pub fn scale(&self, c: Complex<R>) -> Self {
        Self { coeffs: &self.coeffs * c }
    }
}

/// Gram-basis model of `ℋ(K)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RkhsModel<R: Real> {
    kernel: GramBasisForm<R>,
}

impl<R: Real> RkhsModel<R> {
    pub fn new(
        algebra: AlgebraSpec,
        d: usize,
        y_dim: usize,
        basis: Vec<NcSeries<R>>,
        gram: CMat<R>,
        tol: &Tolerances<R>,
    ) -> Result<Self> {
        Ok(Self { kernel: GramBasisForm::new(algebra, d, y_dim, basis, gram, tol)? })
    }

    pub fn from_kernel(kernel: GramBasisForm<R>) -> Self {
        Self { kernel }
    }

    pub fn kernel(&self) -> &GramBasisForm<R> {
        &self.kernel
    }

    pub fn into_kernel(self) -> GramBasisForm<R> {
        self.kernel
    }

    pub fn algebra(&self) -> AlgebraSpec {
        self.kernel.algebra()
    }

    pub fn d(&self) -> usize {
        self.kernel.d()
    }

    pub fn y_dim(&self) -> usize {
        self.kernel.y_dim()
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn basis(&self) -> &[NcSeries<R>] {
        self.kernel.basis()
    }

    pub fn gram(&self) -> &CMat<R> {
        self.kernel.gram()
    }

    fn check(&self, a: &SpaceElement<R>) -> Result<()> {
        if a.coeffs.shape() != (self.dim(), 1) {
            return Err(Error::DimMismatch(format!(
                "element has {}x{} coefficients in a space of dimension {}",
                a.coeffs.nrows(),
                a.coeffs.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `⟨a, b⟩ = b* G a`.
    pub fn inner_product(&self, a: &SpaceElement<R>, b: &SpaceElement<R>) -> Result<Complex<R>> {
        self.check(a)?;
        self.check(b)?;
        Ok((b.coeffs.adjoint() * self.gram() * &a.coeffs)[(0, 0)])
    }

    pub fn norm(&self, a: &SpaceElement<R>) -> Result<R> {
        Ok(self.inner_product(a, a)?.re.max(R::zero()).sqrt())
    }

    /// `Σ c_i f_i(W)`, an `(m·y) × (m·k²)` matrix acting on `vec_row(u)`.
    pub fn evaluate_element(&self, a: &SpaceElement<R>, w: &MatrixTuple<R>) -> Result<CMat<R>> {
        self.check(a)?;
        let k = self.algebra().k();
        let mut out = zeros(w.n() * self.y_dim(), w.n() * k * k);
        for (i, f) in self.basis().iter().enumerate() {
            out += f.eval(w)? * a.coeffs[(i, 0)];
        }
        Ok(out)
    }

    /// `f(W)(u)` for a column `u` over `𝒜` of shape `(m·k) × k`.
    pub fn evaluate_at(&self, a: &SpaceElement<R>, w: &MatrixTuple<R>, u: &CMat<R>) -> Result<CMat<R>> {
        let k = self.algebra().k();
        if u.shape() != (w.n() * k, k) {
            return Err(Error::DimMismatch(format!("column over the algebra must be {}x{k}", w.n() * k)));
        }
        Ok(self.evaluate_element(a, w)? * vec_row(u))
    }

    /// Point evaluation `f ↦ f(W)u` as an `(m·y) × S` matrix.
    pub fn point_evaluation(&self, w: &MatrixTuple<R>, u: &CMat<R>) -> Result<CMat<R>> {
        let s = self.dim();
        let cols: Vec<CMat<R>> = (0..s)
            .map(|i| self.evaluate_at(&SpaceElement::basis_vector(s, i), w, u))
            .collect::<Result<_>>()?;
        Ok(crate::linalg::hstack(w.n() * self.y_dim(), &cols))
    }

    /// Adjoint of [`Self::point_evaluation`] for the gramian: `y ↦ G⁻¹ E* y`.
    pub fn point_evaluation_adjoint(&self, w: &MatrixTuple<R>, u: &CMat<R>, y: &CMat<R>) -> Result<SpaceElement<R>> {
        let e = self.point_evaluation(w, u)?;
        if y.shape() != (e.nrows(), 1) {
            return Err(Error::DimMismatch(format!("vector must be {}x1", e.nrows())));
        }
        Ok(SpaceElement::new(self.kernel.gram_inv() * e.adjoint() * y))
    }

    /// Coefficients of the kernel element `K_{W,v,y}`: `G⁻¹ γ` with `γ_i = (f_i(W)(v*))* y`.
    pub fn kernel_element(&self, e: &KernelElement<R>) -> Result<SpaceElement<R>> {
        let k = self.algebra().k();
        if e.v.shape() != (k, e.w.n() * k) {
            return Err(Error::DimMismatch(format!("row over the algebra must be {k}x{}", e.w.n() * k)));
        }
        self.point_evaluation_adjoint(&e.w, &e.v.adjoint(), &e.y)
    }

    /// Checks `⟨f(W)(v*), y⟩ = ⟨f, K_{W,v,y}⟩`.
    pub fn reproducing_check(&self, a: &SpaceElement<R>, e: &KernelElement<R>, tol: &Tolerances<R>) -> Result<AxiomReport<R>> {
        let lhs = (e.y.adjoint() * self.evaluate_at(a, &e.w, &e.v.adjoint())?)[(0, 0)];
        let rhs = self.inner_product(a, &self.kernel_element(e)?)?;
        let scale = lhs.norm_sqr().sqrt().max(rhs.norm_sqr().sqrt()).max(R::one());
        let violation = (lhs - rhs).norm_sqr().sqrt() / scale;
        let mut report = AxiomReport::new(tol.eq_rel);
        report.record(violation, || Witness {
            sample: 0,
            check: "reproducing identity".into(),
            points: vec![e.w.clone()],
            matrices: vec![a.coeffs.clone(), e.v.clone(), e.y.clone()],
        });
        Ok(report)
    }

    /// Coefficient matrix of `σ(a)` for `a ∈ ℂ^{k×k}`.
    pub fn sigma_matrix(&self, a: &CMat<R>) -> Result<CMat<R>> {
        let k = self.algebra().k();
        if a.shape() != (k, k) {
            return Err(Error::DimMismatch(format!("algebra element must be {k}x{k}")));
        }
        let mut out = zeros(self.dim(), self.dim());
        for p in 0..k {
            for q in 0..k {
                out += &self.kernel.sigma_units()[p * k + q] * a[(p, q)];
            }
        }
        Ok(out)
    }

    /// `σ(a) f`, with `(σ(a) f)(W)(u) = f(W)(u a)`.
    pub fn sigma_action(&self, a: &CMat<R>, f: &SpaceElement<R>) -> Result<SpaceElement<R>> {
        self.check(f)?;
        Ok(SpaceElement::new(self.sigma_matrix(a)? * &f.coeffs))
    }

    /// The same space with an orthonormal basis `g = f L^{-*}` where `G = L L*`.
    pub fn orthonormalized(&self, tol: &Tolerances<R>) -> Result<Self> {
        let s = self.dim();
        let chol = self
            .gram()
            .clone()
            .cholesky()
            .ok_or(Error::GramNotPositive { min_eig: f64::NAN })?;
        let t = chol
            .l()
            .adjoint()
            .try_inverse()
            .ok_or(Error::GramNotPositive { min_eig: 0.0 })?;
        let mut basis = Vec::with_capacity(s);
        for j in 0..s {
            let mut g = NcSeries::zero(self.d(), self.y_dim(), self.algebra().k().pow(2));
            for (i, f) in self.basis().iter().enumerate() {
                g = g.add(&f.scale(t[(i, j)]))?;
            }
            basis.push(g);
        }
        Self::new(self.algebra(), self.d(), self.y_dim(), basis, identity(s), tol)
    }

    /// Kernel `Σ_i f_i(Z) P f_i(W)*` of an orthonormal basis.
    pub fn bergman_kernel(&self, tol: &Tolerances<R>) -> Result<GramBasisForm<R>> {
        Ok(self.orthonormalized(tol)?.kernel)
    }
}

/// One sampled target value `f(Z)u` for the lifted norm.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedSample<R: Real> {
    pub z: MatrixTuple<R>,
    /// Column over `𝒜`, shape `(n·k) × k`.
    pub u: CMat<R>,
    /// Target value in `𝒴^n`, shape `(n·y) × 1`.
    pub value: CMat<R>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftedNorm<R: Real> {
    pub norm: R,
    /// Minimum-norm state vector `h ∈ 𝒳`.
    pub state: CMat<R>,
    pub residual: R,
}

/// Minimum of `‖h‖` over `h` with `H(Z_i)(u_i ⊗ I_r) h = f(Z_i)u_i` on every sample.
pub fn lifted_norm<R: Real>(
    h_rep: &KolmogorovForm<R>,
    samples: &[LiftedSample<R>],
    tol: &Tolerances<R>,
) -> Result<LiftedNorm<R>> {
    let (a, b) = lifted_system(h_rep, samples)?;
    let x = pinv_solve(&a, &b, tol.psd_floor)?;
    let residual = rel_diff(&(&a * &x), &b);
    let sv = singular_values(&a);
    let top = sv.first().copied().unwrap_or_else(R::one);
    let kept = sv.iter().copied().filter(|&s| s > tol.psd_floor * top).fold(top, |m, s| m.min(s));
    let cond = if kept > R::zero() { top / kept } else { R::one() };
    if !(residual <= tol.eq_rel * cond.max(R::one())) {
        return Err(Error::Infeasible { residual: to_f64(residual) });
    }
    Ok(LiftedNorm { norm: x.norm(), state: x, residual })
}

/// Stacked linear system `A h = b` of [`lifted_norm`].
pub fn lifted_system<R: Real>(h_rep: &KolmogorovForm<R>, samples: &[LiftedSample<R>]) -> Result<(CMat<R>, CMat<R>)> {
    let alg = h_rep.algebra();
    let (k, r) = (alg.k(), alg.r());
    let y = h_rep.y_dim();
    let mut blocks = Vec::new();
    let mut rhs = Vec::new();
    for s in samples {
        let n = s.z.n();
        if s.u.shape() != (n * k, k) || s.value.shape() != (n * y, 1) || s.z.d() != h_rep.d() {
            return Err(Error::DimMismatch("lifted-norm sample shapes".into()));
        }
        blocks.push(h_rep.h().eval(&s.z)? * kron(&s.u, &identity(r)));
        rhs.push(s.value.clone());
    }
    Ok((crate::linalg::vstack(k * r, &blocks), crate::linalg::vstack(1, &rhs)))
}

/// Random σ-closed model: basis `f_{j,p}(W)(u) = h_j(W) u e_p` with gramian `G_h ⊗ I_k`.
///
/// With `k = 1` this is a random polynomial basis with a random positive gramian.
pub fn random_model<R: Real>(
    rng: &mut impl Rng,
    algebra: AlgebraSpec,
    d: usize,
    y_dim: usize,
    t: usize,
    max_len: usize,
    tol: &Tolerances<R>,
) -> Result<RkhsModel<R>> {
    let k = algebra.k();
    let gh: CMat<R> = random_pd(rng, t, lit(10.0));
    let hs: Vec<NcSeries<R>> = (0..t).map(|_| random_series(rng, d, y_dim, k, max_len, 1.0)).collect();
    let (basis, gram) = slice_basis(&hs, &gh, k)?;
    RkhsModel::new(algebra, d, y_dim, basis, gram, tol)
}

/// Coordinate slices `h_j ⊗ e_pᵀ` of `y × k` series and the gramian `G_h ⊗ I_k`.
pub fn slice_basis<R: Real>(hs: &[NcSeries<R>], gh: &CMat<R>, k: usize) -> Result<(Vec<NcSeries<R>>, CMat<R>)> {
    let mut basis = Vec::with_capacity(hs.len() * k);
    for h in hs {
        for p in 0..k {
            let mut e = zeros(1, k);
            e[(0, p)] = creal(R::one());
            basis.push(h.map_coeffs(h.out_dim(), k * k, |c| kron(c, &e))?);
        }
    }
    Ok((basis, kron(gh, &identity(k))))
}

/// Kolmogorov factor of the kernel of [`slice_basis`]: `H = Σ_j (G_h^{-1/2})_{jρ} h_j` in slot `ρ`.
pub fn slice_kolmogorov<R: Real>(hs: &[NcSeries<R>], gh: &CMat<R>, algebra: AlgebraSpec) -> Result<KolmogorovForm<R>> {
    let t = hs.len();
    let k = algebra.k();
    let m = crate::linalg::pd_inv_sqrt(gh)?;
    let d = hs.first().map(|h| h.d()).unwrap_or(1);
    let y = hs.first().map(|h| h.out_dim()).unwrap_or(1);
    let mut out = NcSeries::zero(d, y, k * t);
    for rho in 0..t {
        let mut slot = zeros(1, t);
        slot[(0, rho)] = creal(R::one());
        let place = kron(&identity(k), &slot);
        for (j, h) in hs.iter().enumerate() {
            let c = m[(j, rho)];
            if c == czero() {
                continue;
            }
            out = out.add(&h.map_coeffs(y, k * t, |x| x * &place * c)?)?;
        }
    }
    KolmogorovForm::new(AlgebraSpec::full_matrix(k, t)?, out)
}

/// `‖f(W)(u)‖ ≤ ‖f‖ ‖K(W, W)(1)‖^{1/2} ‖u‖` with the operator norm on `u`.
pub fn evaluation_bound<R: Real>(model: &RkhsModel<R>, a: &SpaceElement<R>, w: &MatrixTuple<R>, u: &CMat<R>) -> Result<(R, R)> {
    let value = model.evaluate_at(a, w, u)?.norm();
    let k = model.algebra().k();
    let kw = model.kernel().eval(w, w, &identity(w.n() * k))?;
    let (vals, _) = hermitian_eigen(&kw)?;
    let top = vals.last().copied().unwrap_or_else(R::zero).max(R::zero());
    Ok((value, model.norm(a)? * top.sqrt() * spectral_norm(u)))
}
