//! Completely positive maps `φ: ℂ^{k×k} → ℂ^{m×m}` as kernels on a single point.

use rand::Rng;

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, identity, matrix_unit, psd_factor, rel_diff, spectral_norm, zeros, CMat, Tolerances};
use crate::ncfun::NcSeries;
use crate::rkhs::RkhsModel;
use crate::sampler::{gaussian_matrix, rng_from_seed};
use crate::scalar::{creal, lit, to_f64, Real};

/// A linear map given by its values `φ(e_pq)` on matrix units, row-major in `(p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CpMap<R: Real> {
    k: usize,
    m: usize,
    units: Vec<CMat<R>>,
}

impl<R: Real> CpMap<R> {
    pub fn new(k: usize, m: usize, units: Vec<CMat<R>>) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::DimMismatch("map sizes must be positive".into()));
        }
        if units.len() != k * k {
            return Err(Error::ShapeMismatch(format!("expected {} unit values, got {}", k * k, units.len())));
        }
        for (i, u) in units.iter().enumerate() {
            if u.shape() != (m, m) {
                return Err(Error::ShapeMismatch(format!(
                    "value on e_{}{} is {}x{}, expected {m}x{m}",
                    i / k + 1,
                    i % k + 1,
                    u.nrows(),
                    u.ncols()
                )));
            }
            crate::linalg::ensure_finite(u)?;
        }
        Ok(Self { k, m, units })
    }

    /// `a ↦ Σ_i V_i a V_i*` for Kraus operators `V_i` of shape `m × k`.
    pub fn from_kraus(kraus: &[CMat<R>]) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::DimMismatch("no Kraus operators".into()))?;
        let (m, k) = first.shape();
        if kraus.iter().any(|v| v.shape() != (m, k)) {
            return Err(Error::ShapeMismatch("Kraus operators differ in shape".into()));
        }
        let units = (0..k * k)
            .map(|i| {
                let e = matrix_unit(k, k, i / k, i % k);
                kraus.iter().fold(zeros(m, m), |acc, v| acc + v * &e * v.adjoint())
            })
            .collect();
        Self::new(k, m, units)
    }

    pub fn identity(k: usize) -> Self {
        let units = (0..k * k).map(|i| matrix_unit(k, k, i / k, i % k)).collect();
        Self { k, m: k, units }
    }

    /// `a ↦ tr(a) I_m`.
    pub fn trace(k: usize, m: usize) -> Self {
        let units = (0..k * k)
            .map(|i| if i / k == i % k { identity(m) } else { zeros(m, m) })
            .collect();
        Self { k, m, units }
    }

    pub fn zero(k: usize, m: usize) -> Self {
        Self { k, m, units: vec![zeros(m, m); k * k] }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn units(&self) -> &[CMat<R>] {
        &self.units
    }

    pub fn unit(&self, p: usize, q: usize) -> &CMat<R> {
        &self.units[p * self.k + q]
    }

    pub fn scaled(&self, c: R) -> Self {
        Self { units: self.units.iter().map(|u| u * creal(c)).collect(), ..self.clone() }
    }

    pub fn apply(&self, a: &CMat<R>) -> Result<CMat<R>> {
        if a.shape() != (self.k, self.k) {
            return Err(Error::DimMismatch(format!("argument must be {}x{}", self.k, self.k)));
        }
        let mut out = zeros(self.m, self.m);
        for p in 0..self.k {
            for q in 0..self.k {
                out += self.unit(p, q) * a[(p, q)];
            }
        }
        Ok(out)
    }

    /// `(id_N ⊗ φ)(P)` for `P ∈ M_N(ℂ^{k×k})`, applied blockwise.
    pub fn amplify(&self, p: &CMat<R>, n: usize) -> Result<CMat<R>> {
        if p.shape() != (n * self.k, n * self.k) {
            return Err(Error::DimMismatch(format!("amplified argument must be {0}x{0}", n * self.k)));
        }
        let mut out = zeros(n * self.m, n * self.m);
        for i in 0..n {
            for j in 0..n {
                let b = p.view((i * self.k, j * self.k), (self.k, self.k)).into_owned();
                out.view_mut((i * self.m, j * self.m), (self.m, self.m)).copy_from(&self.apply(&b)?);
            }
        }
        Ok(out)
    }

    /// `max ‖φ(e_pq)* − φ(e_qp)‖` relative; zero for *-preserving maps.
    pub fn hermiticity_violation(&self) -> R {
        let mut worst = R::zero();
        for p in 0..self.k {
            for q in 0..self.k {
                worst = worst.max(rel_diff(&self.unit(p, q).adjoint(), self.unit(q, p)));
            }
        }
        worst
    }
}

/// Block matrix with block `(p, q) = φ(e_pq)`, of size `km × km`.
pub fn choi<R: Real>(phi: &CpMap<R>) -> CMat<R> {
    let (k, m) = (phi.k, phi.m);
    let mut out = zeros(k * m, k * m);
    for p in 0..k {
        for q in 0..k {
            out.view_mut((p * m, q * m), (m, m)).copy_from(phi.unit(p, q));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CpCheck<R: Real> {
    pub passed: bool,
    pub min_eig: R,
    pub floor: R,
    pub hermiticity_violation: R,
    /// Eigenvector of the most negative Choi eigenvalue, when failed.
    pub witness: Option<CMat<R>>,
}

pub fn is_cp<R: Real>(phi: &CpMap<R>, tol: &Tolerances<R>) -> Result<CpCheck<R>> {
    let c = choi(phi);
    let hv = phi.hermiticity_violation();
    let (vals, vecs) = hermitian_eigen(&c)?;
    let norm = vals.iter().fold(R::zero(), |a, v| a.max(v.abs()));
    let floor = tol.psd_threshold(norm);
    let min_eig = vals.first().copied().unwrap_or_else(R::zero);
    let passed = min_eig >= -floor && hv <= tol.eq_rel;
    Ok(CpCheck {
        passed,
        min_eig,
        floor,
        hermiticity_violation: hv,
        witness: (!passed).then(|| crate::linalg::column(&vecs, 0)),
    })
}

fn require_cp<R: Real>(phi: &CpMap<R>, tol: &Tolerances<R>) -> Result<()> {
    let check = is_cp(phi, tol)?;
    if !check.passed {
        return Err(Error::NotCp { eigenvalue: to_f64(check.min_eig) });
    }
    Ok(())
}

/// `φ(a) = H (a ⊗ I_r) H*` with `H: ℂ^k ⊗ ℂ^r → ℂ^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stinespring<R: Real> {
    pub algebra: AlgebraSpec,
    pub h: CMat<R>,
    pub choi_rank: usize,
    /// Worst relative error of `H σ(e_pq) H*` against `φ(e_pq)`.
    pub reconstruction: R,
}

/// Dilation from the Choi factor `C = F F*`: `H[i, α·r + ρ] = F[α·m + i, ρ]` with `r = rank C`.
pub fn stinespring<R: Real>(phi: &CpMap<R>, tol: &Tolerances<R>) -> Result<Stinespring<R>> {
    require_cp(phi, tol)?;
    let (k, m) = (phi.k, phi.m);
    let f = psd_factor(&choi(phi), tol)?;
    let rank = f.ncols();
    let r = rank.max(1);
    let mut h = zeros(m, k * r);
    for alpha in 0..k {
        for rho in 0..rank {
            for i in 0..m {
                h[(i, alpha * r + rho)] = f[(alpha * m + i, rho)];
            }
        }
    }
    let algebra = AlgebraSpec::full_matrix(k, r)?;
    let mut worst = R::zero();
    for p in 0..k {
        for q in 0..k {
            let back = &h * algebra.sigma(&matrix_unit::<R>(k, k, p, q)) * h.adjoint();
            worst = worst.max(rel_diff(&back, phi.unit(p, q)));
        }
    }
    Ok(Stinespring { algebra, h, choi_rank: rank, reconstruction: worst })
}

/// `‖φ‖_cb = ‖φ(1)‖` for cp maps.
pub fn cb_norm_cp<R: Real>(phi: &CpMap<R>, tol: &Tolerances<R>) -> Result<R> {
    require_cp(phi, tol)?;
    Ok(spectral_norm(&phi.apply(&identity(phi.k))?))
}

/// `‖(id_N ⊗ φ)(P)‖ / ‖P‖` for one argument.
pub fn amplification_ratio<R: Real>(phi: &CpMap<R>, p: &CMat<R>, n: usize) -> Result<R> {
    let top = spectral_norm(p);
    if top == R::zero() {
        return Ok(R::zero());
    }
    Ok(spectral_norm(&phi.amplify(p, n)?) / top)
}

/// Largest sampled amplification ratio over Gaussian `P` with `N ≤ n_max`.
pub fn sampled_amplification<R: Real>(phi: &CpMap<R>, n_max: usize, samples: usize, seed: u64) -> Result<R> {
    let mut rng = rng_from_seed(seed);
    let mut best = R::zero();
    for s in 0..samples {
        let n = 1 + s % n_max.max(1);
        let p: CMat<R> = gaussian_matrix(&mut rng, n * phi.k, n * phi.k);
        best = best.max(amplification_ratio(phi, &p, n)?);
    }
    Ok(best)
}

/// Sampled `max (Σ‖φ(x_i) y‖² / ‖Σ x_i* x_i‖)^{1/2}` over unit `y` and finite sequences `x_i`.
///
/// The column map `u_y(a) = φ(a) y` is completely bounded by `‖φ‖_cb`, so the
/// result is a lower bound. The unit `x_1 = 1` with `y` a top eigenvector of
/// `φ(1)` is always among the samples.
pub fn effros_ruan_lower_bound<R: Real>(phi: &CpMap<R>, samples: usize, seed: u64) -> Result<R> {
    let (k, m) = (phi.k, phi.m);
    let ratio = |xs: &[CMat<R>], y: &CMat<R>| -> Result<R> {
        let mut num = R::zero();
        let mut den = zeros(k, k);
        for x in xs {
            num += (phi.apply(x)? * y).norm_squared();
            den += x.adjoint() * x;
        }
        let d = spectral_norm(&den);
        Ok(if d > R::zero() { (num / d).sqrt() } else { R::zero() })
    };
    let one = phi.apply(&identity(k))?;
    let (_, vecs) = hermitian_eigen(&one)?;
    let top = crate::linalg::column(&vecs, m - 1);
    let mut best = ratio(&[identity(k)], &top)?;
    let mut rng = rng_from_seed(seed);
    for _ in 0..samples {
        let len = rng.random_range(1..=4);
        let xs: Vec<CMat<R>> = (0..len).map(|_| gaussian_matrix(&mut rng, k, k)).collect();
        let y: CMat<R> = gaussian_matrix(&mut rng, m, 1);
        let y = &y * creal(R::one() / y.norm());
        best = best.max(ratio(&xs, &y)?);
    }
    Ok(best)
}

/// Random cp map with `rank` Gaussian Kraus operators.
pub fn random_kraus_map<R: Real>(rng: &mut impl Rng, k: usize, m: usize, rank: usize) -> Result<CpMap<R>> {
    let kraus: Vec<CMat<R>> = (0..rank)
        .map(|_| gaussian_matrix::<R>(rng, m, k) * creal(lit::<R>(1.0 / (rank as f64).sqrt())))
        .collect();
    CpMap::from_kraus(&kraus)
}

/// The space `ℋ(φ)` at the single point `0 ∈ ℂ^{1×1}` with kernel `K(0, 0)(a) = φ(a)`.
///
/// Spanned by `K_{e_ab, e_i}(u) = φ(u e_ab) e_i`, whose coefficient columns are
/// `δ_{s a} φ(e_pb) e_i` at `(p, s)`, with pairings `δ_{a′a} φ(e_{b′b})_{i′i}`.
/// The span is orthonormalized through the eigenvectors of that gramian.
pub fn rkhs_of_cp_map<R: Real>(phi: &CpMap<R>, tol: &Tolerances<R>) -> Result<RkhsModel<R>> {
    require_cp(phi, tol)?;
    let (k, m) = (phi.k, phi.m);
    let idx: Vec<(usize, usize, usize)> = (0..k)
        .flat_map(|a| (0..k).flat_map(move |b| (0..m).map(move |i| (a, b, i))))
        .collect();
    let n = idx.len();
    let coeff = |&(a, b, i): &(usize, usize, usize)| -> CMat<R> {
        let mut c = zeros(m, k * k);
        for p in 0..k {
            let col = phi.unit(p, b).column(i).into_owned();
            c.view_mut((0, p * k + a), (m, 1)).copy_from(&col);
        }
        c
    };
    let spanning: Vec<CMat<R>> = idx.iter().map(coeff).collect();
    let gamma = CMat::from_fn(n, n, |s2, s1| {
        let (a2, b2, i2) = idx[s2];
        let (a1, b1, i1) = idx[s1];
        if a1 == a2 {
            phi.unit(b2, b1)[(i2, i1)]
        } else {
            creal(R::zero())
        }
    });
    let (vals, vecs) = hermitian_eigen(&gamma)?;
    let norm = vals.iter().fold(R::zero(), |a, v| a.max(v.abs()));
    let floor = tol.psd_threshold(norm);
    let mut basis = Vec::new();
    for (j, &v) in vals.iter().enumerate().rev() {
        if v <= floor {
            continue;
        }
        let mut c = zeros(m, k * k);
        for s in 0..n {
            c += &spanning[s] * vecs[(s, j)];
        }
        c *= creal(R::one() / v.sqrt());
        basis.push(NcSeries::constant(1, c));
    }
    let dim = basis.len();
    RkhsModel::new(AlgebraSpec::full_matrix(k, 1)?, 1, m, basis, identity(dim), tol)
}
