//! The coefficient algebra: `ℂ` or a full matrix algebra `ℂ^{k×k}`.
//!
//! An element of `𝒜^{n×m}` is stored as an `(n·k) × (m·k)` matrix of `k × k`
//! blocks. The representation `σ(a) = a ⊗ I_r` acts on `ℂ^k ⊗ ℂ^r`, so its
//! amplification sends `P` to `P ⊗ I_r`.

use crate::error::{Error, Result};
use crate::linalg::{identity, kron, matrix_unit, CMat};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlgebraSpec {
    k: usize,
    r: usize,
}

impl AlgebraSpec {
    pub const SCALAR: AlgebraSpec = AlgebraSpec { k: 1, r: 1 };

    pub fn full_matrix(k: usize, r: usize) -> Result<Self> {
        if k == 0 || r == 0 {
            return Err(Error::DimMismatch(format!("algebra needs k, r >= 1 (got k = {k}, r = {r})")));
        }
        Ok(Self { k, r })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn is_scalar(&self) -> bool {
        self.k == 1
    }

    /// Dimension `k·r` of the representation space.
    pub fn rep_dim(&self) -> usize {
        self.k * self.r
    }

    /// Amplified representation `(id ⊗ σ)(P) = P ⊗ I_r`.
    pub fn sigma<R: Real>(&self, p: &CMat<R>) -> CMat<R> {
        if self.r == 1 {
            p.clone()
        } else {
            kron(p, &identity(self.r))
        }
    }

    /// Unit of `𝒜^{n×n}`.
    pub fn unit<R: Real>(&self, n: usize) -> CMat<R> {
        identity(n * self.k)
    }

    /// Matrix units `e_pq` in row-major order.
    pub fn generators<R: Real>(&self) -> Vec<CMat<R>> {
        let k = self.k;
        (0..k * k).map(|i| matrix_unit(k, k, i / k, i % k)).collect()
    }
}

impl Default for AlgebraSpec {
    fn default() -> Self {
        Self::SCALAR
    }
}
