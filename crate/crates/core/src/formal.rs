//! Formal nc power series: convolution, formal kernels, truncated moment
//! positivity and factorization, and the passage to functions on nilpotent points.
//!
//! Truncated checks are necessary conditions only. They are complete for
//! kernels whose moments all fit inside the truncation, and every result
//! reports whether moments beyond it were ignored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, identity, psd_factor, rel_diff, zeros, CMat, Tolerances};
use crate::ncfun::{eval_on_nilpotent, NcEvaluator, NcSeries};
use crate::nckernel::{CpCertificate, CertConfig, MomentForm, NcKernel};
use crate::sampler::{rng_from_seed, PointSampler};
use crate::scalar::{creal, lit, to_f64, Real};
use crate::tuple::{free_shift, MatrixTuple};
use crate::word::{count_words_up_to, words_up_to, Word};

/// Result of [`convolve`]: the product and whether terms past `max_len` were dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct Convolution<R: Real> {
    pub series: NcSeries<R>,
    pub truncated: bool,
}

/// `(F·f)_γ = Σ_{γ = ab} F_a f_b`.
pub fn convolve<R: Real>(big: &NcSeries<R>, f: &NcSeries<R>, max_len: Option<usize>) -> Result<Convolution<R>> {
    if big.d() != f.d() {
        return Err(Error::DimMismatch(format!("series have d = {} and {}", big.d(), f.d())));
    }
    if big.in_dim() != f.out_dim() {
        return Err(Error::ShapeMismatch(format!(
            "cannot compose {}x{} coefficients with {}x{}",
            big.out_dim(),
            big.in_dim(),
            f.out_dim(),
            f.in_dim()
        )));
    }
    let mut acc: BTreeMap<Word, CMat<R>> = BTreeMap::new();
    let mut truncated = false;
    for (a, fa) in big.terms() {
        for (b, fb) in f.terms() {
            let w = a.concat(b);
            if max_len.is_some_and(|l| w.len() > l) {
                truncated = true;
                continue;
            }
            let term = fa * fb;
            acc.entry(w).and_modify(|c| *c += &term).or_insert(term);
        }
    }
    let series = NcSeries::from_terms(big.d(), big.out_dim(), f.in_dim(), acc.into_iter().collect())?;
    Ok(Convolution { series, truncated })
}

/// A formal kernel `Σ K_{a,b} z^a w̄^{bᵀ}` with moments up to `max_len`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalKernel<R: Real> {
    inner: MomentForm<R>,
}

impl<R: Real> FormalKernel<R> {
    /// Validates letters, shapes, duplicates and `K_{a,b} = K_{b,a}*`.
    pub fn new(
        d: usize,
        y_dim: usize,
        max_len: usize,
        moments: Vec<((Word, Word), CMat<R>)>,
        tol: &Tolerances<R>,
    ) -> Result<Self> {
        Self::from_moment_form(MomentForm::new(d, y_dim, max_len, moments)?, tol)
    }

    pub fn from_moment_form(inner: MomentForm<R>, tol: &Tolerances<R>) -> Result<Self> {
        let mut worst = R::zero();
        for ((a, b), c) in inner.moments() {
            let mirror = inner.moment_or_zero(b, a).adjoint();
            worst = worst.max(rel_diff(c, &mirror));
        }
        if !(worst <= tol.eq_rel) {
            return Err(Error::NotHermitian { violation: to_f64(worst) });
        }
        Ok(Self { inner })
    }

    pub fn szego(d: usize, y_dim: usize, max_len: usize) -> Self {
        Self { inner: MomentForm::szego(d, y_dim, max_len) }
    }

    /// `K_{a,b} = H_a H_b*`.
    pub fn from_factor(h: &NcSeries<R>, max_len: usize) -> Self {
        Self { inner: MomentForm::from_factor(h, max_len) }
    }

    pub fn d(&self) -> usize {
        self.inner.d()
    }

    pub fn y_dim(&self) -> usize {
        self.inner.y_dim()
    }

    pub fn max_len(&self) -> usize {
        self.inner.max_len()
    }

    pub fn moments(&self) -> &BTreeMap<(Word, Word), CMat<R>> {
        self.inner.moments()
    }

    pub fn moment_or_zero(&self, a: &Word, b: &Word) -> CMat<R> {
        self.inner.moment_or_zero(a, b)
    }

    /// Longest word carrying a nonzero moment.
    pub fn support_len(&self) -> usize {
        self.moments()
            .iter()
            .filter(|(_, c)| c.iter().any(|x| *x != creal(R::zero())))
            .map(|((a, b), _)| a.len().max(b.len()))
            .max()
            .unwrap_or(0)
    }

    pub fn as_moment_form(&self) -> &MomentForm<R> {
        &self.inner
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len > self.max_len() {
            return Err(Error::TruncationTooShort { order: len, limit: self.max_len() });
        }
        Ok(())
    }
}

/// Block matrix with block `(a, b) = K_{a,b}` over words of length at most `len`, graded-lex order.
pub fn moment_matrix<R: Real>(k: &FormalKernel<R>, len: usize) -> Result<CMat<R>> {
    k.check_len(len)?;
    let words = words_up_to(k.d(), len);
    let y = k.y_dim();
    let mut out = zeros(words.len() * y, words.len() * y);
    for ((a, b), c) in k.moments() {
        if a.len() <= len && b.len() <= len {
            out.view_mut((a.index(k.d()) * y, b.index(k.d()) * y), (y, y)).copy_from(c);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentPositivity<R: Real> {
    pub passed: bool,
    pub min_eig: R,
    pub floor: R,
    pub len: usize,
    /// Some moment lies beyond `len`, so a pass is only a necessary condition.
    pub truncated: bool,
    pub witness: Option<CMat<R>>,
}

/// Eigencheck of [`moment_matrix`] against the PSD floor.
pub fn moment_positivity<R: Real>(k: &FormalKernel<R>, len: usize, tol: &Tolerances<R>) -> Result<MomentPositivity<R>> {
    let m = moment_matrix(k, len)?;
    let (vals, vecs) = hermitian_eigen(&m)?;
    let norm = vals.iter().fold(R::zero(), |a, v| a.max(v.abs()));
    let floor = tol.psd_threshold(norm);
    let min_eig = vals.first().copied().unwrap_or_else(R::zero);
    let passed = min_eig >= -floor;
    Ok(MomentPositivity {
        passed,
        min_eig,
        floor,
        len,
        truncated: k.support_len() > len,
        witness: (!passed).then(|| crate::linalg::column(&vecs, 0)),
    })
}

pub fn is_formal_positive_truncated<R: Real>(k: &FormalKernel<R>, len: usize, tol: &Tolerances<R>) -> Result<bool> {
    Ok(moment_positivity(k, len, tol)?.passed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FormalFactor<R: Real> {
    /// `H` with `y × rank` coefficients on words of length at most `len`.
    pub h: NcSeries<R>,
    pub rank: usize,
    pub len: usize,
    pub truncated: bool,
}

/// Factors the truncated moment matrix as `F F*`; the row block of word `a` is `H_a`.
pub fn formal_kolmogorov_truncated<R: Real>(k: &FormalKernel<R>, len: usize, tol: &Tolerances<R>) -> Result<FormalFactor<R>> {
    let m = moment_matrix(k, len)?;
    let f = psd_factor(&m, tol)?;
    let y = k.y_dim();
    let rank = f.ncols();
    let terms: Vec<(Word, CMat<R>)> = words_up_to(k.d(), len)
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w, f.rows(i * y, y).into_owned()))
        .filter(|(_, c)| c.iter().any(|x| *x != creal(R::zero())))
        .collect();
    Ok(FormalFactor {
        h: NcSeries::from_terms(k.d(), y, rank, terms)?,
        rank,
        len,
        truncated: k.support_len() > len,
    })
}

/// The moment kernel with the same coefficients.
pub fn functional_from_formal<R: Real>(k: &FormalKernel<R>) -> MomentForm<R> {
    k.inner.clone()
}

/// `Z ↦ Σ Z^a ⊗ f_a`, defined on jointly nilpotent points only.
#[derive(Clone, Debug, PartialEq)]
pub struct NilpotentSeries<R: Real> {
    pub series: NcSeries<R>,
    pub tol: Tolerances<R>,
}

impl<R: Real> NcEvaluator<R> for NilpotentSeries<R> {
    fn d(&self) -> usize {
        self.series.d()
    }
    fn out_dim(&self) -> usize {
        self.series.out_dim()
    }
    fn in_dim(&self) -> usize {
        self.series.in_dim()
    }
    fn evaluate(&self, z: &MatrixTuple<R>) -> Result<CMat<R>> {
        eval_on_nilpotent(&self.series, z, &self.tol)
    }
}

pub fn functional_from_series<R: Real>(f: &NcSeries<R>, tol: &Tolerances<R>) -> NilpotentSeries<R> {
    NilpotentSeries { series: f.clone(), tol: *tol }
}

/// Scales applied to the word shift in [`nilpotent_positivity_check`].
pub const SHIFT_SCALES: [f64; 3] = [1.0, 8.0, 64.0];

/// Eigenchecks `K(Z, Z)(I_n)` on sampled nilpotent points and on scaled word shifts.
///
/// For the shift `T` on words up to `max_len`, `K(λT, λT)(I)` is normalized by
/// the congruence `D⁻¹ · D⁻¹` with `D = diag(λ^{|u|}) ⊗ I_y`, which tends to the
/// moment matrix as `λ` grows. The certificate's points list the random points
/// followed by the scaled shifts.
pub fn nilpotent_positivity_check<R: Real>(
    k: &FormalKernel<R>,
    config: &CertConfig,
    tol: &Tolerances<R>,
) -> Result<CpCertificate<R>> {
    if config.sampler != PointSampler::Nilpotent {
        return Err(Error::SamplerUnavailable(format!(
            "formal kernels are checked on nilpotent points, not the {} sampler",
            config.sampler.name()
        )));
    }
    let limit = k.max_len() + 1;
    if let Some(&n) = config.sizes.iter().find(|&&n| n > limit) {
        return Err(Error::TruncationTooShort { order: n, limit });
    }
    if config.sizes.is_empty() || config.sizes.contains(&0) {
        return Err(Error::DimMismatch("certificate needs positive sizes".into()));
    }
    let kernel = functional_from_formal(k);
    let y = k.y_dim();
    let d = k.d();
    let mut rng = rng_from_seed(config.seed);
    let mut points: Vec<MatrixTuple<R>> = (0..config.n_points)
        .map(|i| config.sampler.sample(&mut rng, d, config.sizes[i % config.sizes.len()]))
        .collect();
    let mut blocks: Vec<CMat<R>> = points
        .iter()
        .map(|z| kernel.eval(z, z, &identity(z.n())))
        .collect::<Result<_>>()?;
    let shift = free_shift::<R>(d, k.max_len());
    let lens: Vec<usize> = words_up_to(d, k.max_len()).iter().map(|w| w.len()).collect();
    for &lambda in &SHIFT_SCALES {
        let lambda: R = lit(lambda);
        let t = shift.scaled(lambda);
        let v = kernel.eval(&t, &t, &identity(t.n()))?;
        let dinv: Vec<R> = lens.iter().map(|&l| R::one() / lambda.powi(l as i32)).collect();
        let normalized = CMat::from_fn(v.nrows(), v.ncols(), |i, j| v[(i, j)] * creal(dinv[i / y] * dinv[j / y]));
        blocks.push(normalized);
        points.push(t);
    }
    let mut min_eig = lit::<R>(f64::INFINITY);
    let mut norm = R::zero();
    let mut witness = None;
    for b in &blocks {
        let (vals, vecs) = hermitian_eigen(&crate::linalg::hermitian_part(b))?;
        norm = vals.iter().fold(norm, |a, v| a.max(v.abs()));
        if let Some(&low) = vals.first() {
            if low < min_eig {
                min_eig = low;
                witness = Some(crate::linalg::column(&vecs, 0));
            }
        }
    }
    let scale = norm.max(R::one());
    let floor = tol.psd_floor * scale;
    let passed = min_eig >= -floor;
    let gram_dim = blocks.iter().map(|b| b.nrows()).sum();
    Ok(CpCertificate {
        passed,
        min_eig,
        scale,
        floor,
        seed: config.seed,
        sampler: config.sampler,
        points,
        rows: Vec::new(),
        gram_dim,
        witness: if passed { None } else { witness },
        axiom_violation: None,
    })
}

/// Number of rows of the moment matrix at `len`.
pub fn moment_matrix_dim<R: Real>(k: &FormalKernel<R>, len: usize) -> usize {
    count_words_up_to(k.d(), len) * k.y_dim()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cmat_real;
    use crate::ncfun::extract_taylor_coefficients;
    use crate::sampler::{gaussian_matrix, random_series};

    type S = NcSeries<f64>;
    type M = CMat<f64>;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn w(l: &[usize]) -> Word {
        Word::new(l.to_vec())
    }

    fn scalar(terms: &[(&[usize], f64)]) -> S {
        S::from_terms(2, 1, 1, terms.iter().map(|(l, c)| (w(l), cmat_real(1, 1, &[*c]))).collect()).unwrap()
    }

    #[test]
    fn convolution_pinned() {
        let a = scalar(&[(&[], 1.0), (&[1], 1.0)]);
        let b = scalar(&[(&[], 1.0), (&[2], 1.0)]);
        let c = convolve(&a, &b, None).unwrap();
        assert!(!c.truncated);
        let expect = scalar(&[(&[], 1.0), (&[1], 1.0), (&[2], 1.0), (&[1, 2], 1.0)]);
        assert_eq!(c.series, expect);
        let t = convolve(&a, &b, Some(1)).unwrap();
        assert!(t.truncated);
        assert_eq!(t.series.coeff(&w(&[1, 2])), None);
        assert_eq!(convolve(&scalar(&[(&[], 1.0)]), &b, None).unwrap().series, b);
        assert!(convolve(&S::zero(2, 1, 1), &b, None).unwrap().series.terms().is_empty());
        assert!(convolve(&S::zero(2, 1, 2), &b, None).is_err());
    }

    #[test]
    fn moment_matrix_cases() {
        let k = FormalKernel::<f64>::szego(2, 1, 2);
        let m = moment_matrix(&k, 2).unwrap();
        assert_eq!(m, identity(7));
        assert!(moment_positivity(&k, 2, &tol()).unwrap().passed);
        assert!(moment_matrix(&k, 3).is_err());
        let neg = FormalKernel::new(1, 1, 1, vec![((w(&[]), w(&[])), cmat_real(1, 1, &[-1.0]))], &tol()).unwrap();
        let r = moment_positivity(&neg, 1, &tol()).unwrap();
        assert!(!r.passed && (r.min_eig + 1.0).abs() < 1e-15);
        let bad = FormalKernel::new(1, 1, 1, vec![((w(&[]), w(&[1])), cmat_real(1, 1, &[1.0]))], &tol());
        assert!(matches!(bad, Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn factor_cases() {
        let k = FormalKernel::<f64>::szego(1, 1, 2);
        let f = formal_kolmogorov_truncated(&k, 2, &tol()).unwrap();
        assert_eq!(f.rank, 3);
        // Row selectors up to a unitary of the state space.
        let words = words_up_to(1, 2);
        for a in &words {
            for b in &words {
                let g = (f.h.coeff_or_zero(a) * f.h.coeff_or_zero(b).adjoint())[(0, 0)];
                assert!((g - creal(if a == b { 1.0 } else { 0.0 })).norm() < 1e-12);
            }
        }
        // Rank one moments c_a c̄_b.
        let c = S::from_terms(1, 1, 1, vec![(w(&[]), cmat_real(1, 1, &[2.0])), (w(&[1]), cmat_real(1, 1, &[-1.0]))]).unwrap();
        let k = FormalKernel::from_factor(&c, 1);
        let f = formal_kolmogorov_truncated(&k, 1, &tol()).unwrap();
        assert_eq!(f.rank, 1);
        let mut rng = crate::sampler::rng_from_seed(2);
        let h: S = random_series(&mut rng, 2, 2, 3, 2, 0.9);
        let k = FormalKernel::from_factor(&h, 2);
        let f = formal_kolmogorov_truncated(&k, 2, &tol()).unwrap();
        for a in words_up_to(2, 2) {
            for b in words_up_to(2, 2) {
                let back = f.h.coeff_or_zero(&a) * f.h.coeff_or_zero(&b).adjoint();
                assert!((back - k.moment_or_zero(&a, &b)).norm() < 1e-10 * k.moment_or_zero(&a, &b).norm().max(1.0));
            }
        }
        let neg = FormalKernel::new(1, 1, 0, vec![((w(&[]), w(&[])), cmat_real(1, 1, &[-1.0]))], &tol()).unwrap();
        assert!(matches!(formal_kolmogorov_truncated(&neg, 0, &tol()), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn series_round_trip_on_nilpotent_points() {
        let mut rng = crate::sampler::rng_from_seed(3);
        let f: S = random_series(&mut rng, 2, 2, 1, 4, 0.6);
        let g = functional_from_series(&f, &tol());
        let back = extract_taylor_coefficients(&g, 2, 4, 2, 1, &tol()).unwrap();
        for a in words_up_to(2, 4) {
            assert!((back.coeff_or_zero(&a) - f.coeff_or_zero(&a)).norm() <= 1e-12);
        }
        let zero = functional_from_series(&S::zero(2, 2, 1), &tol());
        let z: MatrixTuple<f64> = PointSampler::Nilpotent.sample(&mut rng, 2, 3);
        assert_eq!(zero.evaluate(&z).unwrap(), zeros(6, 3));
        let dense = MatrixTuple::new(vec![cmat_real(1, 1, &[0.5]), cmat_real(1, 1, &[0.0])]).unwrap();
        assert!(g.evaluate(&dense).is_err());
    }

    /// `F F* − c v v*` spread back into moments.
    fn perturbed(rng: &mut crate::sampler::Rng64, d: usize, y: usize, len: usize, c: f64) -> FormalKernel<f64> {
        let n = count_words_up_to(d, len) * y;
        let f: M = gaussian_matrix(rng, n, 2);
        let v: M = gaussian_matrix(rng, n, 1);
        let v = &v * creal(1.0 / v.norm());
        let m = &f * f.adjoint() - &v * v.adjoint() * creal(c);
        let words = words_up_to(d, len);
        let mut moments = Vec::new();
        for a in &words {
            for b in &words {
                let blk = m.view((a.index(d) * y, b.index(d) * y), (y, y)).into_owned();
                moments.push(((a.clone(), b.clone()), blk));
            }
        }
        FormalKernel::new(d, y, len, moments, &tol()).unwrap()
    }

    #[test]
    fn nilpotent_route_agrees_with_moment_route() {
        let mut rng = crate::sampler::rng_from_seed(4);
        let config = CertConfig::new(PointSampler::Nilpotent, 6, vec![1, 2, 3], 1, 5);
        let szego = FormalKernel::<f64>::szego(2, 1, 2);
        assert!(nilpotent_positivity_check(&szego, &config, &tol()).unwrap().passed);
        let zero = FormalKernel::<f64>::new(2, 1, 2, vec![], &tol()).unwrap();
        assert!(nilpotent_positivity_check(&zero, &config, &tol()).unwrap().passed);
        for (trial, c) in [0.0, 0.5, 3.0, 10.0].iter().enumerate() {
            let k = perturbed(&mut rng, 2, 1 + trial % 2, 2, *c);
            let moment = moment_positivity(&k, 2, &tol()).unwrap();
            let nilp = nilpotent_positivity_check(&k, &config, &tol()).unwrap();
            assert_eq!(moment.passed, nilp.passed, "trial {trial}");
            assert_eq!(nilp.passed, *c == 0.0);
        }
        let long = CertConfig::new(PointSampler::Nilpotent, 2, vec![4], 1, 5);
        assert!(matches!(nilpotent_positivity_check(&szego, &long, &tol()), Err(Error::TruncationTooShort { .. })));
        let gauss = CertConfig::new(PointSampler::Gaussian, 2, vec![2], 1, 5);
        assert!(nilpotent_positivity_check(&szego, &gauss, &tol()).is_err());
    }

    #[test]
    fn moment_positivity_is_monotone() {
        let mut rng = crate::sampler::rng_from_seed(6);
        for _ in 0..10 {
            let k = perturbed(&mut rng, 2, 1, 3, 5.0);
            let flags: Vec<bool> = (0..=3).map(|l| moment_positivity(&k, l, &tol()).unwrap().passed).collect();
            for l in 0..3 {
                assert!(flags[l] || !flags[l + 1]);
            }
        }
    }
}
