//! Axiom checks and sampled complete-positivity certificates.
//!
//! Certificates are randomized but seeded. A pass is evidence, not proof,
//! except for moment kernels on nilpotent points where the truncated sum is
//! exact at the sampled sizes.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, identity, kron, rel_diff, zeros, CMat, Tolerances};
use crate::ncfun::{AxiomReport, Witness};
use crate::sampler::{gaussian_matrix, random_similarity, rng_from_seed, PointSampler};
use crate::scalar::{creal, Real};
use crate::tuple::{direct_sum, MatrixTuple};

use super::NcKernel;

/// Sampling plan for a certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct CertConfig {
    pub sampler: PointSampler,
    pub n_points: usize,
    /// Point sizes, cycled over the points.
    pub sizes: Vec<usize>,
    /// Row count `N` of each `P_i ∈ 𝒜^{N × n_i}`.
    pub n_rows: usize,
    pub seed: u64,
}

impl CertConfig {
    pub fn new(sampler: PointSampler, n_points: usize, sizes: Vec<usize>, n_rows: usize, seed: u64) -> Self {
        Self { sampler, n_points, sizes, n_rows, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.n_points == 0 || self.sizes.is_empty() || self.sizes.contains(&0) || self.n_rows == 0 {
            return Err(Error::DimMismatch("certificate needs points, positive sizes and rows".into()));
        }
        Ok(())
    }
}

/// Outcome of a sampled positivity test. `passed ⇔ min_eig ≥ −psd_floor·scale`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpCertificate<R: Real> {
    pub passed: bool,
    pub min_eig: R,
    pub scale: R,
    pub floor: R,
    pub seed: u64,
    pub sampler: PointSampler,
    pub points: Vec<MatrixTuple<R>>,
    pub rows: Vec<CMat<R>>,
    pub gram_dim: usize,
    /// Eigenvector of the most negative eigenvalue, when failed.
    pub witness: Option<CMat<R>>,
    /// Worst axiom violation, for the similarity-reduced test.
    pub axiom_violation: Option<R>,
}

fn sample_points<R: Real>(
    d: usize,
    config: &CertConfig,
    rng: &mut crate::sampler::Rng64,
) -> Vec<MatrixTuple<R>> {
    (0..config.n_points)
        .map(|i| config.sampler.sample(rng, d, config.sizes[i % config.sizes.len()]))
        .collect()
}

fn check_sampler<R: Real, K: NcKernel<R> + ?Sized>(k: &K, sampler: PointSampler) -> Result<()> {
    if k.needs_nilpotent() && sampler != PointSampler::Nilpotent {
        return Err(Error::SamplerUnavailable(format!(
            "kernel is only exact on nilpotent points; the {} sampler does not apply",
            sampler.name()
        )));
    }
    Ok(())
}

/// Assembles `M_ij = K(Z_i, Z_j)(P_i* P_j)` over sampled points and rows and eigenchecks it.
pub fn cp_certificate<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    config: &CertConfig,
    tol: &Tolerances<R>,
) -> Result<CpCertificate<R>> {
    config.validate()?;
    check_sampler(k, config.sampler)?;
    let mut rng = rng_from_seed(config.seed);
    let a = k.algebra_k();
    let y = k.y_dim();
    let points: Vec<MatrixTuple<R>> = sample_points(k.d(), config, &mut rng);
    let rows: Vec<CMat<R>> = points
        .iter()
        .map(|z| {
            let p: CMat<R> = gaussian_matrix(&mut rng, config.n_rows * a, z.n() * a);
            let norm = p.norm();
            p * creal(R::one() / norm)
        })
        .collect();
    let offsets: Vec<usize> = points.iter().scan(0, |acc, z| {
        let o = *acc;
        *acc += z.n() * y;
        Some(o)
    }).collect();
    let dim: usize = points.iter().map(|z| z.n() * y).sum();
    let mut m = zeros(dim, dim);
    for i in 0..points.len() {
        for j in i..points.len() {
            let arg = rows[i].adjoint() * &rows[j];
            let v = k.eval(&points[i], &points[j], &arg)?;
            m.view_mut((offsets[i], offsets[j]), v.shape()).copy_from(&v);
            if i != j {
                m.view_mut((offsets[j], offsets[i]), (v.ncols(), v.nrows())).copy_from(&v.adjoint());
            }
        }
    }
    let (vals, vecs) = hermitian_eigen(&m)?;
    let norm = vals.iter().fold(R::zero(), |acc, v| acc.max(v.abs()));
    let scale = norm.max(R::one());
    let floor = tol.psd_floor * scale;
    let min_eig = vals.first().copied().unwrap_or_else(R::zero);
    let passed = min_eig >= -floor;
    let witness = (!passed).then(|| crate::linalg::column(&vecs, 0));
    Ok(CpCertificate {
        passed,
        min_eig,
        scale,
        floor,
        seed: config.seed,
        sampler: config.sampler,
        points,
        rows,
        gram_dim: dim,
        witness,
        axiom_violation: None,
    })
}

/// Checks only `K(Z, Z)(I) ⪰ 0` on sampled points, plus the kernel axioms on the same points.
///
/// On a similarity-invariant domain a kernel meeting the axioms is cp as soon
/// as these diagonal values are positive, so this carries the same force as
/// the full test on the sampled set.
pub fn cp_certificate_similarity_reduced<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    config: &CertConfig,
    tol: &Tolerances<R>,
) -> Result<CpCertificate<R>> {
    config.validate()?;
    if !config.sampler.is_similarity_invariant() {
        return Err(Error::SamplerUnavailable(format!(
            "the {} sampler is not similarity invariant",
            config.sampler.name()
        )));
    }
    check_sampler(k, config.sampler)?;
    let mut rng = rng_from_seed(config.seed);
    let a = k.algebra_k();
    let points: Vec<MatrixTuple<R>> = sample_points(k.d(), config, &mut rng);
    let mut worst: Option<(R, R, R, CMat<R>)> = None;
    for z in &points {
        let v = k.eval(z, z, &identity(z.n() * a))?;
        let (vals, vecs) = hermitian_eigen(&v)?;
        let scale = vals.iter().fold(R::zero(), |acc, x| acc.max(x.abs())).max(R::one());
        let min = vals.first().copied().unwrap_or_else(R::zero);
        let ratio = min / scale;
        if worst.as_ref().is_none_or(|(r, ..)| ratio < *r) {
            worst = Some((ratio, min, scale, crate::linalg::column(&vecs, 0)));
        }
    }
    let samples = KernelSamples::from_points(k, &points, tol.cond_max, &mut rng);
    let axioms = check_kernel_axioms(k, &samples, tol)?;
    let (_, min_eig, scale, vec) = worst.expect("at least one point");
    let floor = tol.psd_floor * scale;
    let passed = min_eig >= -floor && axioms.passed;
    Ok(CpCertificate {
        passed,
        min_eig,
        scale,
        floor,
        seed: config.seed,
        sampler: config.sampler,
        gram_dim: points.iter().map(|z| z.n() * k.y_dim()).max().unwrap_or(0),
        points,
        rows: Vec::new(),
        witness: (min_eig < -floor).then_some(vec),
        axiom_violation: Some(axioms.max_violation),
    })
}

/// Two point pairs and an argument on the direct sums.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectSumSample<R: Real> {
    pub z: [MatrixTuple<R>; 2],
    pub w: [MatrixTuple<R>; 2],
    pub p: CMat<R>,
}

/// `α Z = Z̃ α` and `β W = W̃ β` with an argument `P` on `(Z, W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntertwinerSample<R: Real> {
    pub z: MatrixTuple<R>,
    pub zt: MatrixTuple<R>,
    pub alpha: CMat<R>,
    pub w: MatrixTuple<R>,
    pub wt: MatrixTuple<R>,
    pub beta: CMat<R>,
    pub p: CMat<R>,
}

/// Inputs for [`check_kernel_axioms`].
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSamples<R: Real> {
    pub direct_sums: Vec<DirectSumSample<R>>,
    pub intertwiners: Vec<IntertwinerSample<R>>,
    pub hermitian: Vec<(MatrixTuple<R>, MatrixTuple<R>, CMat<R>)>,
}

impl<R: Real> KernelSamples<R> {
    /// Builds samples from given points: consecutive pairs for direct sums,
    /// random similarities and block embeddings for intertwinings.
    pub fn from_points<K: NcKernel<R> + ?Sized>(
        k: &K,
        points: &[MatrixTuple<R>],
        cond_max: R,
        rng: &mut crate::sampler::Rng64,
    ) -> Self {
        let a = k.algebra_k();
        let mut out = Self { direct_sums: Vec::new(), intertwiners: Vec::new(), hermitian: Vec::new() };
        let n = points.len();
        for i in 0..n {
            let z = &points[i];
            let w = &points[(i + 1) % n];
            let arg = |rng: &mut crate::sampler::Rng64, r: usize, c: usize| -> CMat<R> { gaussian_matrix(rng, r * a, c * a) };

            let p = arg(rng, z.n() + w.n(), w.n() + z.n());
            out.direct_sums.push(DirectSumSample { z: [z.clone(), w.clone()], w: [w.clone(), z.clone()], p });

            let (s, s_inv) = random_similarity::<R>(rng, z.n(), cond_max);
            let (t, t_inv) = random_similarity::<R>(rng, w.n(), cond_max);
            let zt = z.similarity(&s, &s_inv).expect("sizes agree");
            let wt = w.similarity(&t, &t_inv).expect("sizes agree");
            let p = arg(rng, z.n(), w.n());
            out.intertwiners.push(IntertwinerSample { z: z.clone(), zt, alpha: s, w: w.clone(), wt, beta: t, p });

            // Column embedding of Z into Z ⊕ W.
            let zw = direct_sum(&[z.clone(), w.clone()]).expect("shared d");
            let mut emb = zeros(z.n() + w.n(), z.n());
            emb.view_mut((0, 0), (z.n(), z.n())).copy_from(&identity(z.n()));
            let p = arg(rng, z.n(), w.n());
            out.intertwiners.push(IntertwinerSample {
                z: z.clone(),
                zt: zw,
                alpha: emb,
                w: w.clone(),
                wt: w.clone(),
                beta: identity(w.n()),
                p,
            });

            let p = arg(rng, z.n(), w.n());
            out.hermitian.push((z.clone(), w.clone(), p));
        }
        out
    }
}

/// Direct sums, intertwinings `(α⊗I) K(Z,W)(P) (β⊗I)* = K(Z̃,W̃)((α⊗I) P (β⊗I)*)`,
/// and hermitian symmetry `K(Z,W)(P)* = K(W,Z)(P*)`.
pub fn check_kernel_axioms<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    samples: &KernelSamples<R>,
    tol: &Tolerances<R>,
) -> Result<AxiomReport<R>> {
    let a = k.algebra_k();
    let y = k.y_dim();
    let mut report = AxiomReport::new(tol.eq_rel);
    for (i, s) in samples.direct_sums.iter().enumerate() {
        let zs = direct_sum(&[s.z[0].clone(), s.z[1].clone()])?;
        let ws = direct_sum(&[s.w[0].clone(), s.w[1].clone()])?;
        let lhs = k.eval(&zs, &ws, &s.p)?;
        let mut rhs = zeros(lhs.nrows(), lhs.ncols());
        let (mut r0, mut a0) = (0, 0);
        for zi in &s.z {
            let (mut c0, mut b0) = (0, 0);
            for wj in &s.w {
                let sub = s.p.view((a0, b0), (zi.n() * a, wj.n() * a)).into_owned();
                let v = k.eval(zi, wj, &sub)?;
                rhs.view_mut((r0, c0), v.shape()).copy_from(&v);
                c0 += wj.n() * y;
                b0 += wj.n() * a;
            }
            r0 += zi.n() * y;
            a0 += zi.n() * a;
        }
        let v = rel_diff(&lhs, &rhs);
        report.record(v, || Witness {
            sample: i,
            check: "direct_sum".into(),
            points: vec![s.z[0].clone(), s.z[1].clone(), s.w[0].clone(), s.w[1].clone()],
            matrices: vec![s.p.clone(), lhs.clone(), rhs.clone()],
        });
    }
    for (i, s) in samples.intertwiners.iter().enumerate() {
        for (from, to, m) in [(&s.z, &s.zt, &s.alpha), (&s.w, &s.wt, &s.beta)] {
            let pre = from.intertwining_violation(to, m)?;
            if !(pre <= tol.eq_rel) {
                return Err(Error::BadIntertwiner { violation: crate::scalar::to_f64(pre) });
            }
        }
        let ay = kron(&s.alpha, &identity(y));
        let by = kron(&s.beta, &identity(y));
        let aa = kron(&s.alpha, &identity(a));
        let ba = kron(&s.beta, &identity(a));
        let lhs = &ay * k.eval(&s.z, &s.w, &s.p)? * by.adjoint();
        let rhs = k.eval(&s.zt, &s.wt, &(&aa * &s.p * ba.adjoint()))?;
        let v = rel_diff(&lhs, &rhs);
        report.record(v, || Witness {
            sample: i,
            check: "intertwining".into(),
            points: vec![s.z.clone(), s.zt.clone(), s.w.clone(), s.wt.clone()],
            matrices: vec![s.alpha.clone(), s.beta.clone(), s.p.clone()],
        });
    }
    for (i, (z, w, p)) in samples.hermitian.iter().enumerate() {
        let lhs = k.eval(z, w, p)?.adjoint();
        let rhs = k.eval(w, z, &p.adjoint())?;
        let v = rel_diff(&lhs, &rhs);
        report.record(v, || Witness {
            sample: i,
            check: "hermitian".into(),
            points: vec![z.clone(), w.clone()],
            matrices: vec![p.clone(), lhs.clone(), rhs.clone()],
        });
    }
    Ok(report)
}

