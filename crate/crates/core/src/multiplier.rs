//! Multipliers between nc reproducing kernel spaces, the de Branges–Rovnyak
//! kernel `K_S = K − S K′ S*`, and Brangesian complements at finite dimension.
//!
//! Contractivity is certified on samples only: a failure is a disproof with a
//! witness, a pass is evidence.

use std::rc::Rc;

use crate::error::{Error, Result};
use crate::formal::convolve;
use crate::linalg::{
    hermitian_eigen, hstack, inverse, pd_inv_sqrt, pinv_solve, psd_sqrt, rel_diff, singular_values, spectral_norm, zeros,
    CMat, Tolerances,
};
use crate::ncfun::NcSeries;
use crate::nckernel::{cp_certificate, CertConfig, CpCertificate, Difference, KernelElement, KernelRep, NcKernel};
use crate::algebra::AlgebraSpec;
use crate::rkhs::{random_model, RkhsModel, SpaceElement};
use crate::sampler::{random_pd, random_series, random_unitary};
use crate::scalar::{creal, lit, to_f64, Real};
use crate::tuple::MatrixTuple;

/// `S` with `y × u` coefficients from `ℋ(K′)` (values in `𝒰`) to `ℋ(K)` (values in `𝒴`).
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplier<R: Real> {
    s: NcSeries<R>,
    source: KernelRep<R>,
    target: KernelRep<R>,
}

impl<R: Real> Multiplier<R> {
    pub fn new(s: NcSeries<R>, source: KernelRep<R>, target: KernelRep<R>) -> Result<Self> {
        if s.d() != source.d() || s.d() != target.d() {
            return Err(Error::DimMismatch("multiplier and kernels differ in d".into()));
        }
        if source.algebra_k() != target.algebra_k() {
            return Err(Error::DimMismatch("source and target kernels use different algebras".into()));
        }
        if s.out_dim() != target.y_dim() || s.in_dim() != source.y_dim() {
            return Err(Error::ShapeMismatch(format!(
                "multiplier is {}x{} but kernels have y = {} (target) and {} (source)",
                s.out_dim(),
                s.in_dim(),
                target.y_dim(),
                source.y_dim()
            )));
        }
        Ok(Self { s, source, target })
    }

    pub fn s(&self) -> &NcSeries<R> {
        &self.s
    }

    pub fn source(&self) -> &KernelRep<R> {
        &self.source
    }

    pub fn target(&self) -> &KernelRep<R> {
        &self.target
    }

    pub fn dbr_kernel(&self) -> DbrKernel<R> {
        DbrKernel { s: self.s.clone(), source: self.source.clone(), target: self.target.clone() }
    }
}

/// `K_S(Z, W)(P) = K(Z, W)(P) − S(Z) K′(Z, W)(P) S(W)*`.
#[derive(Clone, Debug, PartialEq)]
pub struct DbrKernel<R: Real> {
    s: NcSeries<R>,
    source: KernelRep<R>,
    target: KernelRep<R>,
}

impl<R: Real> NcKernel<R> for DbrKernel<R> {
    fn d(&self) -> usize {
        self.target.d()
    }
    fn y_dim(&self) -> usize {
        self.target.y_dim()
    }
    fn algebra_k(&self) -> usize {
        self.target.algebra_k()
    }
    fn needs_nilpotent(&self) -> bool {
        self.target.needs_nilpotent() || self.source.needs_nilpotent()
    }
    fn eval(&self, z: &MatrixTuple<R>, w: &MatrixTuple<R>, p: &CMat<R>) -> Result<CMat<R>> {
        let k = self.target.eval(z, w, p)?;
        let kp = self.source.eval(z, w, p)?;
        Ok(k - self.s.eval(z)? * kp * self.s.eval(w)?.adjoint())
    }
}

/// Sampled cp test of `K_S`.
pub fn contractivity_certificate<R: Real>(
    mult: &Multiplier<R>,
    config: &CertConfig,
    tol: &Tolerances<R>,
) -> Result<CpCertificate<R>> {
    cp_certificate(&mult.dbr_kernel(), config, tol)
}

/// `M_S f` as a series: `(M_S f)(W) = S(W) f(W)`.
pub fn apply_multiplier<R: Real>(s: &NcSeries<R>, source: &RkhsModel<R>, f: &SpaceElement<R>) -> Result<NcSeries<R>> {
    if f.dim() != source.dim() {
        return Err(Error::DimMismatch("element does not belong to the source model".into()));
    }
    let k2 = source.algebra().k().pow(2);
    let mut acc = NcSeries::zero(s.d(), s.out_dim(), k2);
    for (i, b) in source.basis().iter().enumerate() {
        acc = acc.add(&convolve(s, b, None)?.series.scale(f.coeffs[(i, 0)]))?;
    }
    Ok(acc)
}

/// Least-squares coordinates of `g` in the basis of `target`; `NotInTarget` past the tolerance.
pub fn represent_in<R: Real>(target: &RkhsModel<R>, g: &NcSeries<R>, tol: &Tolerances<R>) -> Result<(SpaceElement<R>, R)> {
    let k2 = target.algebra().k().pow(2);
    if g.d() != target.d() || g.out_dim() != target.y_dim() || g.in_dim() != k2 {
        return Err(Error::ShapeMismatch("function does not match the target model".into()));
    }
    let degree = target.kernel().degree().max(g.degree().unwrap_or(0));
    let rows = crate::word::count_words_up_to(target.d(), degree) * target.y_dim() * k2;
    let basis: Vec<CMat<R>> = target.basis().iter().map(|f| f.coefficient_vector(degree)).collect();
    let c = hstack(rows, &basis);
    let rhs = g.coefficient_vector(degree);
    let x = pinv_solve(&c, &rhs, tol.psd_floor)?;
    let residual = rel_diff(&(&c * &x), &rhs);
    let sv = singular_values(&c);
    let cond = match (sv.first(), sv.last()) {
        (Some(&a), Some(&b)) if b > R::zero() => a / b,
        _ => R::one(),
    };
    if !(residual <= tol.eq_rel * cond.max(R::one())) {
        return Err(Error::NotInTarget { residual: to_f64(residual) });
    }
    Ok((SpaceElement::new(x), residual))
}

/// Matrix of `M_S` from the source coefficient basis to the target one.
pub fn multiplier_matrix<R: Real>(
    s: &NcSeries<R>,
    source: &RkhsModel<R>,
    target: &RkhsModel<R>,
    tol: &Tolerances<R>,
) -> Result<CMat<R>> {
    let n = source.dim();
    let cols: Vec<CMat<R>> = (0..n)
        .map(|i| {
            let g = apply_multiplier(s, source, &SpaceElement::basis_vector(n, i))?;
            Ok(represent_in(target, &g, tol)?.0.coeffs)
        })
        .collect::<Result<_>>()?;
    Ok(hstack(target.dim(), &cols))
}

/// Hilbert-space adjoint `G_s⁻¹ A* G_t` of a coefficient matrix `A`.
pub fn gram_adjoint<R: Real>(a: &CMat<R>, gram_source: &CMat<R>, gram_target: &CMat<R>) -> Result<CMat<R>> {
    Ok(inverse(gram_source)? * a.adjoint() * gram_target)
}

/// `M_S*: K_{W,v,y} ↦ K′_{W,v,S(W)* y}`.
pub fn adjoint_on_kernel_element<R: Real>(s: &NcSeries<R>, e: &KernelElement<R>) -> Result<KernelElement<R>> {
    let sw = s.eval(&e.w)?;
    if sw.nrows() != e.y.nrows() {
        return Err(Error::DimMismatch("kernel element does not match the multiplier".into()));
    }
    Ok(KernelElement { w: e.w.clone(), v: e.v.clone(), y: sw.adjoint() * &e.y })
}

/// Tests `ℋ(K′) ⊂ ℋ(K)` contractively through cp of `K − K′`, returning the difference kernel.
pub fn contractive_containment<R: Real>(
    k_prime: &KernelRep<R>,
    k: &KernelRep<R>,
    config: &CertConfig,
    tol: &Tolerances<R>,
) -> Result<(CpCertificate<R>, Difference<R>)> {
    let diff = Difference::new(Rc::new(k.clone()), Rc::new(k_prime.clone()))?;
    let cert = cp_certificate(&diff, config, tol)?;
    Ok((cert, diff))
}

/// A subspace given by basis columns (in ambient coefficients) and the pullback gramian on them.
#[derive(Clone, Debug, PartialEq)]
pub struct PullbackSpace<R: Real> {
    pub basis: CMat<R>,
    pub gram: CMat<R>,
}

impl<R: Real> PullbackSpace<R> {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn coords(&self, h: &CMat<R>, tol: &Tolerances<R>) -> Result<CMat<R>> {
        let x = pinv_solve(&self.basis, h, tol.psd_floor)?;
        let residual = (&self.basis * &x - h).norm() / h.norm().max(R::one());
        if !(residual <= tol.eq_rel.sqrt()) {
            return Err(Error::NotInTarget { residual: to_f64(residual) });
        }
        Ok(x)
    }

    /// Squared pullback norm of an ambient vector lying in the span.
    pub fn norm_sq(&self, h: &CMat<R>, tol: &Tolerances<R>) -> Result<R> {
        if self.dim() == 0 {
            return if h.norm() <= tol.eq_rel.sqrt() { Ok(R::zero()) } else { Err(Error::NotInTarget { residual: to_f64(h.norm()) }) };
        }
        let x = self.coords(h, tol)?;
        Ok((x.adjoint() * &self.gram * &x)[(0, 0)].re)
    }
}

/// `ℳ_A = Ran A` and `ℋ_A = Ran (I − AA*)^{1/2}` inside the target, with their pullback norms.
///
/// Norms are realized through `Â = G_t^{1/2} A G_s^{-1/2}` and the eigenvectors `U` of
/// `ÂÂ* = U diag(σ²) U*`: `ℳ_A` has basis `G_t^{-1/2} U_{σ²>floor}` with gramian
/// `diag(σ⁻²)`, `ℋ_A` has basis `G_t^{-1/2} U_{1−σ²>floor}` with gramian `diag((1−σ²)⁻¹)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BrangesianDecomposition<R: Real> {
    pub a: CMat<R>,
    pub gram_source: CMat<R>,
    pub gram_target: CMat<R>,
    /// Eigenvalues `σ²` of `ÂÂ*`, ascending.
    pub sigma_sq: Vec<R>,
    pub range: PullbackSpace<R>,
    pub complement: PullbackSpace<R>,
    /// Basis of `ℳ_A ∩ ℋ_A` in target coefficients.
    pub overlap: CMat<R>,
    adjoint: CMat<R>,
    floor: R,
}

impl<R: Real> BrangesianDecomposition<R> {
    pub fn new(a: &CMat<R>, gram_source: &CMat<R>, gram_target: &CMat<R>, tol: &Tolerances<R>) -> Result<Self> {
        let (t, s) = a.shape();
        if gram_source.shape() != (s, s) || gram_target.shape() != (t, t) {
            return Err(Error::ShapeMismatch("gramians do not match the operator".into()));
        }
        let gt_half = psd_sqrt(gram_target)?;
        let gt_inv_half = pd_inv_sqrt(gram_target)?;
        let gs_inv_half = if s > 0 { pd_inv_sqrt(gram_source)? } else { zeros(0, 0) };
        let hat = &gt_half * a * &gs_inv_half;
        let norm = spectral_norm(&hat);
        if !(norm <= R::one() + tol.psd_floor) {
            return Err(Error::NotContraction { norm: to_f64(norm) });
        }
        let (vals, u) = hermitian_eigen(&(&hat * hat.adjoint()))?;
        let floor = tol.psd_floor;
        let pick = |keep: &dyn Fn(R) -> bool, weight: &dyn Fn(R) -> R| {
            let idx: Vec<usize> = (0..t).filter(|&i| keep(vals[i])).collect();
            let basis = CMat::from_fn(t, idx.len(), |r, c| (&gt_inv_half * crate::linalg::column(&u, idx[c]))[(r, 0)]);
            let gram = CMat::from_fn(idx.len(), idx.len(), |i, j| if i == j { creal(weight(vals[idx[i]])) } else { creal(R::zero()) });
            PullbackSpace { basis, gram }
        };
        let range = pick(&|v| v > floor, &|v| R::one() / v);
        let complement = pick(&|v| R::one() - v > floor, &|v| R::one() / (R::one() - v));
        let overlap = pick(&|v| v > floor && R::one() - v > floor, &|_| R::one()).basis;
        let adjoint = if s > 0 { gram_adjoint(a, gram_source, gram_target)? } else { zeros(0, t) };
        Ok(Self {
            a: a.clone(),
            gram_source: gram_source.clone(),
            gram_target: gram_target.clone(),
            sigma_sq: vals,
            range,
            complement,
            overlap,
            adjoint,
            floor,
        })
    }

    /// Canonical split `h = AA†h + (I − AA†)h`.
    pub fn decompose(&self, h: &CMat<R>) -> (CMat<R>, CMat<R>) {
        let k = &self.a * (&self.adjoint * h);
        let rest = h - &k;
        (k, rest)
    }

    /// `‖k‖²_{ℳ_A} + ‖k′‖²_{ℋ_A}` for a split `h = k + k′`.
    pub fn split_norm_sq(&self, k: &CMat<R>, k_rest: &CMat<R>, tol: &Tolerances<R>) -> Result<R> {
        Ok(self.range.norm_sq(k, tol)? + self.complement.norm_sq(k_rest, tol)?)
    }

    /// Target norm `h* G_t h`.
    pub fn target_norm_sq(&self, h: &CMat<R>) -> R {
        (h.adjoint() * &self.gram_target * h)[(0, 0)].re
    }

    /// Inclusion of `ℋ_A` into the target, as operator and source gramian.
    pub fn complement_inclusion(&self) -> (CMat<R>, CMat<R>) {
        (self.complement.basis.clone(), self.complement.gram.clone())
    }

    pub fn floor(&self) -> R {
        self.floor
    }
}

pub fn brangesian_complement<R: Real>(
    a: &CMat<R>,
    gram_source: &CMat<R>,
    gram_target: &CMat<R>,
    tol: &Tolerances<R>,
) -> Result<BrangesianDecomposition<R>> {
    BrangesianDecomposition::new(a, gram_source, gram_target, tol)
}

/// A multiplier `S` of degree one with a source model and a target model containing `S · source`.
///
/// The source is a random slice model over `alg` with `d = 2`, `y = 2`. The
/// target basis holds the images `S h_j` plus one extra slice, under a random
/// slice gramian, so `M_S` is representable but not isometric.
pub fn random_chain<R: Real>(
    rng: &mut crate::sampler::Rng64,
    alg: AlgebraSpec,
    tol: &Tolerances<R>,
) -> Result<(NcSeries<R>, RkhsModel<R>, RkhsModel<R>)> {
    let k = alg.k();
    let src = random_model::<R>(rng, alg, 2, 2, 2, 1, tol)?;
    let s: NcSeries<R> = random_series(rng, 2, 2, 2, 1, 1.0);
    let mut hs: Vec<NcSeries<R>> = Vec::new();
    for j in 0..src.dim() / k {
        // The generating y × k series h_j sits in the first slice.
        let f = &src.basis()[j * k];
        let h = f.map_coeffs(2, k, |c| CMat::from_fn(2, k, |r, a| c[(r, a * k)]))?;
        hs.push(convolve(&s, &h, None)?.series);
    }
    hs.push(random_series(rng, 2, 2, k, 2, 1.0));
    let gh: CMat<R> = random_pd(rng, hs.len(), lit(5.0));
    let (basis, gram) = crate::rkhs::slice_basis(&hs, &gh, k)?;
    let tgt = RkhsModel::new(alg, 2, 2, basis, gram, tol)?;
    Ok((s, src, tgt))
}

/// `A = G_t^{-1/2} U D V* G_s^{1/2}` with singular values `sv` in `D`, and random gramians.
///
/// Returns `(A, G_s, G_t)`; the normalized operator `Â` has exactly the singular values `sv`.
pub fn random_contraction<R: Real>(
    rng: &mut crate::sampler::Rng64,
    t: usize,
    s: usize,
    sv: &[f64],
) -> Result<(CMat<R>, CMat<R>, CMat<R>)> {
    if sv.len() > t.min(s) {
        return Err(Error::DimMismatch("more singular values than the operator has room for".into()));
    }
    let (u, v): (CMat<R>, CMat<R>) = (random_unitary(rng, t), random_unitary(rng, s));
    let mut d: CMat<R> = zeros(t, s);
    for (i, &x) in sv.iter().enumerate() {
        d[(i, i)] = creal(lit(x));
    }
    let gs: CMat<R> = random_pd(rng, s, lit(3.0));
    let gt: CMat<R> = random_pd(rng, t, lit(3.0));
    let a = pd_inv_sqrt(&gt)? * u * d * v.adjoint() * psd_sqrt(&gs)?;
    Ok((a, gs, gt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cmat_real, identity, kron};
    use crate::nckernel::{KolmogorovForm, MomentForm};
    use crate::sampler::{gaussian_matrix, random_pd, random_series, random_unitary, rng_from_seed, PointSampler};
    use crate::word::Word;

    type M = CMat<f64>;
    type S = NcSeries<f64>;
    type T = MatrixTuple<f64>;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn szego() -> KernelRep<f64> {
        MomentForm::szego(1, 1, 3).into()
    }

    fn constant(c: f64) -> S {
        S::constant(1, cmat_real(1, 1, &[c]))
    }

    fn config(seed: u64) -> CertConfig {
        CertConfig::new(PointSampler::Nilpotent, 4, vec![1, 2, 3], 2, seed)
    }

    #[test]
    fn dbr_kernel_cases() {
        let mut rng = rng_from_seed(1);
        let z: T = PointSampler::Nilpotent.sample(&mut rng, 1, 3);
        let w: T = PointSampler::Nilpotent.sample(&mut rng, 1, 2);
        let p: M = gaussian_matrix(&mut rng, 3, 2);
        let k = szego().eval(&z, &w, &p).unwrap();
        let zero = Multiplier::new(constant(0.0), szego(), szego()).unwrap().dbr_kernel();
        assert!(rel_diff(&zero.eval(&z, &w, &p).unwrap(), &k) < 1e-15);
        let one = Multiplier::new(constant(1.0), szego(), szego()).unwrap().dbr_kernel();
        assert!(one.eval(&z, &w, &p).unwrap().norm() < 1e-14);
        let half = Multiplier::new(constant(0.5), szego(), szego()).unwrap().dbr_kernel();
        assert!(rel_diff(&half.eval(&z, &w, &p).unwrap(), &(&k * creal(0.75))) < 1e-14);
    }

    #[test]
    fn constant_multiplier_dichotomy() {
        for seed in 0..3 {
            let pass = Multiplier::new(constant(0.5), szego(), szego()).unwrap();
            assert!(contractivity_certificate(&pass, &config(seed), &tol()).unwrap().passed);
            let id = Multiplier::new(constant(1.0), szego(), szego()).unwrap();
            assert!(contractivity_certificate(&id, &config(seed), &tol()).unwrap().passed);
        }
        let fail = Multiplier::new(constant(2.0), szego(), szego()).unwrap();
        let single = CertConfig::new(PointSampler::Nilpotent, 1, vec![1], 1, 0);
        let c = contractivity_certificate(&fail, &single, &tol()).unwrap();
        assert!(!c.passed);
        assert!((c.min_eig + 3.0).abs() < 1e-12);
        assert!(c.min_eig <= -3.0 * c.floor);
        assert!(c.witness.is_some());
    }

    #[test]
    fn apply_multiplier_cases() {
        let mut rng = rng_from_seed(2);
        let src = random_model::<f64>(&mut rng, AlgebraSpec::SCALAR, 2, 2, 3, 1, &tol()).unwrap();
        let f = SpaceElement::new(gaussian_matrix(&mut rng, 3, 1));
        let g = src.evaluate_element(&f, &T::zero(2, 1)).unwrap();
        let id = S::constant(2, identity(2));
        let z: T = PointSampler::Gaussian.sample(&mut rng, 2, 2);
        let out = apply_multiplier(&id, &src, &f).unwrap();
        assert!(rel_diff(&out.eval(&z).unwrap(), &src.evaluate_element(&f, &z).unwrap()) < 1e-14);
        let zero = apply_multiplier(&S::zero(2, 2, 2), &src, &f).unwrap();
        assert!(zero.eval(&z).unwrap().norm() == 0.0);
        // S = z_1 c against a constant f.
        let c: M = gaussian_matrix(&mut rng, 2, 2);
        let s = S::from_terms(2, 2, 2, vec![(Word::letter(1), c.clone())]).unwrap();
        let konst = crate::rkhs::RkhsModel::new(AlgebraSpec::SCALAR, 2, 2, vec![S::constant(2, cmat_real(2, 1, &[1.0, -1.0]))], identity(1), &tol()).unwrap();
        let one = SpaceElement::basis_vector(1, 0);
        let out = apply_multiplier(&s, &konst, &one).unwrap().eval(&z).unwrap();
        let expect = kron(z.coord(1), &c) * konst.evaluate_element(&one, &z).unwrap();
        assert!(rel_diff(&out, &expect) < 1e-14);
        assert!(g.norm() > 0.0);
        // Raising the degree leaves the span of the source basis.
        let shift = S::from_terms(2, 2, 2, vec![(Word::letter(1), identity(2))]).unwrap();
        let moved = apply_multiplier(&shift, &src, &f).unwrap();
        assert!(matches!(represent_in(&src, &moved, &tol()), Err(Error::NotInTarget { .. })));
        let fixed = apply_multiplier(&id, &src, &f).unwrap();
        let (back, _) = represent_in(&src, &fixed, &tol()).unwrap();
        assert!(rel_diff(&back.coeffs, &f.coeffs) < 1e-10);
    }

    #[test]
    fn adjoint_formula_on_models() {
        let mut rng = rng_from_seed(3);
        for trial in 0..10 {
            let alg = if trial % 2 == 0 { AlgebraSpec::SCALAR } else { AlgebraSpec::full_matrix(2, 1).unwrap() };
            let k = alg.k();
            let (s, src, tgt) = random_chain(&mut rng, alg, &tol()).unwrap();
            let m = multiplier_matrix(&s, &src, &tgt, &tol()).unwrap();
            let n = 1 + trial % 2;
            let w: T = PointSampler::Gaussian.sample(&mut rng, 2, n);
            let e = KernelElement { w, v: gaussian_matrix(&mut rng, k, n * k), y: gaussian_matrix(&mut rng, 2 * n, 1) };
            let f = SpaceElement::new(gaussian_matrix(&mut rng, src.dim(), 1));
            let mf = SpaceElement::new(&m * &f.coeffs);
            let lhs = tgt.inner_product(&mf, &tgt.kernel_element(&e).unwrap()).unwrap();
            let e2 = adjoint_on_kernel_element(&s, &e).unwrap();
            let rhs = src.inner_product(&f, &src.kernel_element(&e2).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * lhs.norm().max(1.0), "trial {trial}");
            let adj = gram_adjoint(&m, src.gram(), tgt.gram()).unwrap();
            let via = &adj * tgt.kernel_element(&e).unwrap().coeffs;
            assert!(rel_diff(&via, &src.kernel_element(&e2).unwrap().coeffs) < 1e-9);
            // Intertwining with the σ-actions.
            let a: M = gaussian_matrix(&mut rng, k, k);
            let left = tgt.sigma_matrix(&a).unwrap() * &m;
            let right = &m * src.sigma_matrix(&a).unwrap();
            assert!(rel_diff(&left, &right) < 1e-10);
        }
        let e = KernelElement { w: T::zero(1, 1), v: identity(1), y: cmat_real(1, 1, &[2.0]) };
        assert_eq!(adjoint_on_kernel_element(&constant(1.0), &e).unwrap(), e);
        assert_eq!(adjoint_on_kernel_element(&constant(0.0), &e).unwrap().y, zeros(1, 1));
    }

    #[test]
    fn brangesian_cases() {
        let mut rng = rng_from_seed(4);
        let g: M = random_pd(&mut rng, 3, 4.0);
        let zero = brangesian_complement(&zeros(3, 2), &identity(2), &g, &tol()).unwrap();
        assert_eq!(zero.range.dim(), 0);
        assert_eq!(zero.complement.dim(), 3);
        let h: M = gaussian_matrix(&mut rng, 3, 1);
        assert!((zero.complement.norm_sq(&h, &tol()).unwrap() - zero.target_norm_sq(&h)).abs() < 1e-10);
        // A unitary for the gramians: A = G_t^{-1/2} U G_s^{1/2}.
        let gs: M = random_pd(&mut rng, 3, 4.0);
        let u: M = random_unitary(&mut rng, 3);
        let a = pd_inv_sqrt(&g).unwrap() * u * psd_sqrt(&gs).unwrap();
        let unit = brangesian_complement(&a, &gs, &g, &tol()).unwrap();
        assert_eq!(unit.complement.dim(), 0);
        assert_eq!(unit.range.dim(), 3);
        let x: M = gaussian_matrix(&mut rng, 3, 1);
        let ax = &a * &x;
        let src_norm = (x.adjoint() * &gs * &x)[(0, 0)].re;
        assert!((unit.range.norm_sq(&ax, &tol()).unwrap() - src_norm).abs() < 1e-9 * src_norm);
        let big = &a * creal(2.0);
        assert!(matches!(brangesian_complement(&big, &gs, &g, &tol()), Err(Error::NotContraction { .. })));
    }

    #[test]
    fn brangesian_minimality_and_double_complement() {
        let mut rng = rng_from_seed(5);
        let (a, gs, gt) = random_contraction(&mut rng, 5, 5, &[0.9, 0.4]).unwrap();
        let b = brangesian_complement(&a, &gs, &gt, &tol()).unwrap();
        assert_eq!(b.range.dim(), 2);
        assert_eq!(b.overlap.ncols(), 2);
        for _ in 0..10 {
            let h: M = gaussian_matrix(&mut rng, 5, 1);
            let (k, rest) = b.decompose(&h);
            assert!(rel_diff(&(&k + &rest), &h) < 1e-14);
            let canonical = b.split_norm_sq(&k, &rest, &tol()).unwrap();
            assert!((canonical - b.target_norm_sq(&h)).abs() < 1e-9 * canonical.max(1.0));
            for _ in 0..50 {
                let delta = &b.overlap * gaussian_matrix::<f64>(&mut rng, 2, 1);
                let alt = b.split_norm_sq(&(&k + &delta), &(&rest - &delta), &tol()).unwrap();
                assert!(alt - canonical >= -1e-9);
            }
        }
        let (inc, gamma) = b.complement_inclusion();
        let back = brangesian_complement(&inc, &gamma, &gt, &tol()).unwrap();
        for _ in 0..20 {
            let h = &b.range.basis * gaussian_matrix::<f64>(&mut rng, 2, 1);
            let n1 = b.range.norm_sq(&h, &tol()).unwrap();
            let n2 = back.complement.norm_sq(&h, &tol()).unwrap();
            assert!((n1 - n2).abs() < 1e-9 * n1.max(1.0));
        }
    }

    #[test]
    fn ks_space_norm_matches_dbr_kernel() {
        let mut rng = rng_from_seed(6);
        let alg = AlgebraSpec::SCALAR;
        let (s, src, tgt) = random_chain(&mut rng, alg, &tol()).unwrap();
        // Scale S until M_S is a strict contraction.
        let m0 = multiplier_matrix(&s, &src, &tgt, &tol()).unwrap();
        let hat = psd_sqrt(tgt.gram()).unwrap() * &m0 * pd_inv_sqrt(src.gram()).unwrap();
        let c = 0.8 / spectral_norm(&hat);
        let s = s.scale(creal(c));
        let m = &m0 * creal(c);
        let b = brangesian_complement(&m, src.gram(), tgt.gram(), &tol()).unwrap();
        let mult = Multiplier::new(s.clone(), src.kernel().clone().into(), tgt.kernel().clone().into()).unwrap();
        let ks = mult.dbr_kernel();
        for _ in 0..5 {
            let w: T = PointSampler::Gaussian.sample(&mut rng, 2, 2);
            let e = KernelElement { w: w.clone(), v: gaussian_matrix(&mut rng, 1, 2), y: gaussian_matrix(&mut rng, 4, 1) };
            let g = tgt.kernel_element(&e).unwrap().coeffs;
            let (_, rest) = b.decompose(&g);
            let lhs = b.complement.norm_sq(&rest, &tol()).unwrap();
            let kww = ks.eval(&w, &w, &(e.v.adjoint() * &e.v)).unwrap();
            let rhs = (e.y.adjoint() * kww * &e.y)[(0, 0)].re;
            assert!((lhs - rhs).abs() < 1e-8 * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn containment_cases() {
        let k: KernelRep<f64> = szego();
        let half: KernelRep<f64> = MomentForm::szego(1, 1, 3).scaled(0.5).into();
        let double: KernelRep<f64> = MomentForm::szego(1, 1, 3).scaled(2.0).into();
        let (c, diff) = contractive_containment(&half, &k, &config(1), &tol()).unwrap();
        assert!(c.passed);
        let z: T = T::zero(1, 1);
        assert!((diff.eval(&z, &z, &identity(1)).unwrap()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!(!contractive_containment(&double, &k, &config(1), &tol()).unwrap().0.passed);
        let mut rng = rng_from_seed(7);
        let h1: S = random_series(&mut rng, 2, 2, 2, 2, 1.0);
        let h2: S = random_series(&mut rng, 2, 2, 1, 2, 1.0);
        let stacked = S::from_terms(
            2,
            2,
            3,
            crate::word::words_up_to(2, 2)
                .into_iter()
                .map(|w| {
                    let c = hstack(2, &[h1.coeff_or_zero(&w), h2.coeff_or_zero(&w)]);
                    (w, c)
                })
                .collect(),
        )
        .unwrap();
        let kp: KernelRep<f64> = KolmogorovForm::new(AlgebraSpec::full_matrix(1, 2).unwrap(), h1).unwrap().into();
        let kk: KernelRep<f64> = KolmogorovForm::new(AlgebraSpec::full_matrix(1, 3).unwrap(), stacked).unwrap().into();
        let gauss = CertConfig::new(PointSampler::Gaussian, 4, vec![1, 2], 2, 3);
        assert!(contractive_containment(&kp, &kk, &gauss, &tol()).unwrap().0.passed);
    }
}
