//! Seeded random generation of points, similarities and test data.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{identity, inverse, singular_values, spectral_norm, CMat};
use crate::ncfun::NcSeries;
use crate::scalar::{creal, lit, Real};
use crate::tuple::MatrixTuple;
use crate::word::{words_up_to, Word};

pub type Rng64 = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian scalar, `E|z|² = 1`.
pub fn complex_normal<R: Real>(rng: &mut impl Rng) -> Complex<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(lit(re * s), lit(im * s))
}

pub fn gaussian_matrix<R: Real>(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat<R> {
    let mut m = CMat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Strictly upper-triangular Gaussian tuple, jointly nilpotent of order at most `n`.
pub fn nilpotent_tuple<R: Real>(rng: &mut impl Rng, d: usize, n: usize) -> MatrixTuple<R> {
    let coords = (0..d)
        .map(|_| {
            let mut m = CMat::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    m[(i, j)] = complex_normal(rng);
                }
            }
            m
        })
        .collect();
    MatrixTuple::new(coords).expect("square coordinates")
}

/// Dense Gaussian tuple with every coordinate scaled to spectral norm `radius`.
pub fn gaussian_tuple<R: Real>(rng: &mut impl Rng, d: usize, n: usize, radius: R) -> MatrixTuple<R> {
    let coords = (0..d)
        .map(|_| {
            let m: CMat<R> = gaussian_matrix(rng, n, n);
            let s = spectral_norm(&m);
            if s > R::zero() {
                m * creal(radius / s)
            } else {
                m
            }
        })
        .collect();
    MatrixTuple::new(coords).expect("square coordinates")
}

/// Random invertible `S` and its inverse with condition number at most `cond_max`.
///
/// Built as `U diag(s) V*` from Gaussian unitary factors with singular
/// values spread over `[1, cond_max^(1/2)]`.
pub fn random_similarity<R: Real>(rng: &mut impl Rng, n: usize, cond_max: R) -> (CMat<R>, CMat<R>) {
    let top = cond_max.max(R::one()).sqrt();
    let u = random_unitary::<R>(rng, n);
    let v = random_unitary::<R>(rng, n);
    let mut d = identity::<R>(n);
    for i in 0..n {
        let t: f64 = rng.random();
        d[(i, i)] = creal(R::one() + (top - R::one()) * lit(t));
    }
    let s = &u * d * v.adjoint();
    let s_inv = inverse(&s).expect("invertible by construction");
    (s, s_inv)
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Real>(rng: &mut impl Rng, n: usize) -> CMat<R> {
    if n == 0 {
        return identity(0);
    }
    let g: CMat<R> = gaussian_matrix(rng, n, n);
    g.qr().q()
}

/// Random PSD matrix `G G*` with `G` of size `n × rank`.
pub fn random_psd<R: Real>(rng: &mut impl Rng, n: usize, rank: usize) -> CMat<R> {
    let g: CMat<R> = gaussian_matrix(rng, n, rank);
    &g * g.adjoint()
}

/// Random positive definite matrix with condition number at most about `cond`.
pub fn random_pd<R: Real>(rng: &mut impl Rng, n: usize, cond: R) -> CMat<R> {
    let (s, _) = random_similarity::<R>(rng, n, cond);
    let m = &s * s.adjoint();
    let sv = singular_values(&m);
    let top = sv.first().copied().unwrap_or_else(R::one);
    m * creal(R::one() / top.max(lit(1e-300)))
}

/// Random series with each word of length at most `max_len` present with probability `density`.
pub fn random_series<R: Real>(
    rng: &mut impl Rng,
    d: usize,
    p: usize,
    q: usize,
    max_len: usize,
    density: f64,
) -> NcSeries<R> {
    let terms: Vec<(Word, CMat<R>)> = words_up_to(d, max_len)
        .into_iter()
        .filter_map(|w| {
            let keep: f64 = rng.random();
            let c = gaussian_matrix(rng, p, q);
            (keep < density).then_some((w, c))
        })
        .collect();
    NcSeries::from_terms(d, p, q, terms).expect("well-formed random terms")
}

/// Domain from which certificate points are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSampler {
    /// Strictly upper-triangular Gaussian tuples.
    Nilpotent,
    /// Dense Gaussian tuples with each `‖Z_j‖₂ = 0.5`.
    Gaussian,
}

impl PointSampler {
    pub fn sample<R: Real>(&self, rng: &mut impl Rng, d: usize, n: usize) -> MatrixTuple<R> {
        match self {
            PointSampler::Nilpotent => nilpotent_tuple(rng, d, n),
            PointSampler::Gaussian => gaussian_tuple(rng, d, n, lit(0.5)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PointSampler::Nilpotent => "nilpotent",
            PointSampler::Gaussian => "gaussian",
        }
    }

    /// Whether the sampled domain is closed under similarity.
    pub fn is_similarity_invariant(&self) -> bool {
        matches!(self, PointSampler::Nilpotent)
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "nilpotent" => Some(PointSampler::Nilpotent),
            "gaussian" => Some(PointSampler::Gaussian),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rel_diff, Tolerances};
    use crate::ncfun::nilpotency_order;

    #[test]
    fn seeded_is_deterministic() {
        let a: CMat<f64> = gaussian_matrix(&mut rng_from_seed(3), 3, 3);
        let b: CMat<f64> = gaussian_matrix(&mut rng_from_seed(3), 3, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn similarity_is_well_conditioned() {
        let mut rng = rng_from_seed(11);
        for n in 1..6 {
            let (s, si): (CMat<f64>, CMat<f64>) = random_similarity(&mut rng, n, 1e3);
            assert!(rel_diff(&(&s * &si), &identity(n)) < 1e-12);
            let sv = singular_values(&s);
            assert!(sv[0] / sv[n - 1] <= 1e3 * (1.0 + 1e-9));
        }
    }

    #[test]
    fn samplers_respect_domain() {
        let mut rng = rng_from_seed(5);
        let z: MatrixTuple<f64> = PointSampler::Nilpotent.sample(&mut rng, 2, 4);
        assert!(nilpotency_order(&z, &Tolerances::default()).unwrap() <= 4);
        let g: MatrixTuple<f64> = PointSampler::Gaussian.sample(&mut rng, 2, 4);
        for c in g.coords() {
            assert!((spectral_norm(c) - 0.5).abs() < 1e-12);
        }
    }
}
