//! Finite-sample Kolmogorov factors, the envelope extension and cb-norm reports.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{kron, identity, matrix_unit, psd_factor, spectral_norm, zeros, CMat, Tolerances};
use crate::sampler::{gaussian_matrix, rng_from_seed};
use crate::scalar::{creal, Real};
use crate::tuple::MatrixTuple;

use super::NcKernel;

/// Factor values `Ĥ(Z_i)` reproducing a kernel on a finite sample.
#[derive(Clone, Debug, PartialEq)]
pub struct KolmogorovSample<R: Real> {
    /// Dimension of the finite state space `ℂ^rank`.
    pub rank: usize,
    pub algebra_k: usize,
    /// `Ĥ(Z_i)` of shape `(n_i·y) × (n_i·k·rank)`.
    pub factors: Vec<CMat<R>>,
}

impl<R: Real> KolmogorovSample<R> {
    /// `Ĥ(Z_i) (P ⊗ I_rank) Ĥ(Z_j)*`.
    pub fn reconstruct(&self, i: usize, j: usize, p: &CMat<R>) -> CMat<R> {
        &self.factors[i] * kron(p, &identity(self.rank)) * self.factors[j].adjoint()
    }
}

/// Factors the sampled gram `G[(i,r,t),(j,s,u)] = [K(Z_i, Z_j)(e_t e_u*)]_{r,s}`.
///
/// Indices run lexicographically over the point `i`, the output block row
/// `r < n_i` and the argument row `t < n_i·k`.
pub fn kolmogorov_at_sample<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    points: &[MatrixTuple<R>],
    tol: &Tolerances<R>,
) -> Result<KolmogorovSample<R>> {
    let a = k.algebra_k();
    let y = k.y_dim();
    let widths: Vec<usize> = points.iter().map(|z| z.n() * z.n() * a * y).collect();
    let offsets: Vec<usize> = widths
        .iter()
        .scan(0, |acc, w| {
            let o = *acc;
            *acc += w;
            Some(o)
        })
        .collect();
    let dim: usize = widths.iter().sum();
    let mut g = zeros(dim, dim);
    for (i, zi) in points.iter().enumerate() {
        let ti = zi.n() * a;
        for (j, zj) in points.iter().enumerate() {
            let tj = zj.n() * a;
            for t in 0..ti {
                for u in 0..tj {
                    let v = k.eval(zi, zj, &matrix_unit(ti, tj, t, u))?;
                    for r in 0..zi.n() {
                        for s in 0..zj.n() {
                            let row = offsets[i] + (r * ti + t) * y;
                            let col = offsets[j] + (s * tj + u) * y;
                            g.view_mut((row, col), (y, y)).copy_from(&v.view((r * y, s * y), (y, y)));
                        }
                    }
                }
            }
        }
    }
    let f = psd_factor(&g, tol)?;
    let rank = f.ncols();
    let factors = points
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let ti = z.n() * a;
            let mut h = zeros(z.n() * y, ti * rank);
            for r in 0..z.n() {
                for t in 0..ti {
                    let row = offsets[i] + (r * ti + t) * y;
                    h.view_mut((r * y, t * rank), (y, rank)).copy_from(&f.view((row, 0), (y, rank)));
                }
            }
            h
        })
        .collect();
    Ok(KolmogorovSample { rank, algebra_k: a, factors })
}

/// Global kernel on direct sums of generator points, from values on matrix units.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeKernel<R: Real> {
    algebra_k: usize,
    y_dim: usize,
    sizes: Vec<usize>,
    /// `values[(i, j)][t·(n_j·k) + u] = K(Z_i, Z_j)(e_t e_u*)`.
    values: BTreeMap<(usize, usize), Vec<CMat<R>>>,
}

impl<R: Real> EnvelopeKernel<R> {
    pub fn new(algebra_k: usize, y_dim: usize, sizes: Vec<usize>) -> Self {
        Self { algebra_k, y_dim, sizes, values: BTreeMap::new() }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Supplies the unit values for the generator pair `(i, j)`.
    pub fn insert_pair(&mut self, i: usize, j: usize, values: Vec<CMat<R>>) -> Result<()> {
        let (ni, nj) = (
            *self.sizes.get(i).ok_or_else(|| Error::DimMismatch(format!("no generator {i}")))?,
            *self.sizes.get(j).ok_or_else(|| Error::DimMismatch(format!("no generator {j}")))?,
        );
        let units = ni * nj * self.algebra_k * self.algebra_k;
        if values.len() != units || values.iter().any(|v| v.shape() != (ni * self.y_dim, nj * self.y_dim)) {
            return Err(Error::ShapeMismatch(format!("pair ({i}, {j}) needs {units} values of shape {}x{}", ni * self.y_dim, nj * self.y_dim)));
        }
        self.values.insert((i, j), values);
        Ok(())
    }

    /// Records all pairs of a kernel restricted to `points`.
    pub fn from_kernel<K: NcKernel<R> + ?Sized>(k: &K, points: &[MatrixTuple<R>]) -> Result<Self> {
        let a = k.algebra_k();
        let mut env = Self::new(a, k.y_dim(), points.iter().map(MatrixTuple::n).collect());
        for (i, zi) in points.iter().enumerate() {
            for (j, zj) in points.iter().enumerate() {
                let (ti, tj) = (zi.n() * a, zj.n() * a);
                let vals = (0..ti * tj)
                    .map(|idx| k.eval(zi, zj, &matrix_unit(ti, tj, idx / tj, idx % tj)))
                    .collect::<Result<Vec<_>>>()?;
                env.insert_pair(i, j, vals)?;
            }
        }
        Ok(env)
    }

    /// `K̃(⊕ Z_{left}, ⊕ Z_{right})([a_ij]) = [K(Z_{left_i}, Z_{right_j})(a_ij)]`.
    pub fn eval(&self, left: &[usize], right: &[usize], p: &CMat<R>) -> Result<CMat<R>> {
        let (a, y) = (self.algebra_k, self.y_dim);
        let size = |i: usize| self.sizes.get(i).copied().ok_or_else(|| Error::DimMismatch(format!("no generator {i}")));
        let lrows: Vec<usize> = left.iter().map(|&i| size(i)).collect::<Result<_>>()?;
        let rcols: Vec<usize> = right.iter().map(|&j| size(j)).collect::<Result<_>>()?;
        let (nl, nr): (usize, usize) = (lrows.iter().sum(), rcols.iter().sum());
        if p.shape() != (nl * a, nr * a) {
            return Err(Error::DimMismatch(format!("argument is {}x{}, expected {}x{}", p.nrows(), p.ncols(), nl * a, nr * a)));
        }
        let mut out = zeros(nl * y, nr * y);
        let mut r0 = 0;
        for (bi, &i) in left.iter().enumerate() {
            let mut c0 = 0;
            for (bj, &j) in right.iter().enumerate() {
                let vals = self.values.get(&(i, j)).ok_or(Error::MissingPair(i, j))?;
                let (ti, tj) = (lrows[bi] * a, rcols[bj] * a);
                let mut blk = zeros(lrows[bi] * y, rcols[bj] * y);
                for t in 0..ti {
                    for u in 0..tj {
                        let c = p[(r0 * a + t, c0 * a + u)];
                        if c.re != R::zero() || c.im != R::zero() {
                            blk += &vals[t * tj + u] * c;
                        }
                    }
                }
                out.view_mut((r0 * y, c0 * y), blk.shape()).copy_from(&blk);
                c0 += rcols[bj];
            }
            r0 += lrows[bi];
        }
        Ok(out)
    }
}

/// Norm of `K(Z, Z)` at the unit against sampled PSD arguments of norm one.
#[derive(Clone, Debug, PartialEq)]
pub struct CbNormReport<R: Real> {
    pub norm_at_identity: R,
    pub max_sampled_ratio: R,
}

pub fn cb_norm_report<R: Real, K: NcKernel<R> + ?Sized>(
    k: &K,
    z: &MatrixTuple<R>,
    n_samples: usize,
    seed: u64,
) -> Result<CbNormReport<R>> {
    let size = z.n() * k.algebra_k();
    let norm_at_identity = spectral_norm(&k.eval(z, z, &identity(size))?);
    let mut rng = rng_from_seed(seed);
    let mut max_sampled_ratio = R::zero();
    for _ in 0..n_samples {
        let g: CMat<R> = gaussian_matrix(&mut rng, size, size);
        let p = &g * g.adjoint();
        let p = &p * creal(R::one() / spectral_norm(&p));
        max_sampled_ratio = max_sampled_ratio.max(spectral_norm(&k.eval(z, z, &p)?));
    }
    Ok(CbNormReport { norm_at_identity, max_sampled_ratio })
}
