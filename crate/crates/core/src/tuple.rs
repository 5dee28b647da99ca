//! Points of the nc universe: d-tuples of square matrices of a common size.

use crate::error::{Error, Result};
use crate::linalg::{block_diag, ensure_finite, identity, zeros, CMat};
use crate::scalar::{cone, Real};
use crate::word::{count_words_up_to, words_up_to, Word};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple<R: Real> {
    coords: Vec<CMat<R>>,
    n: usize,
}

impl<R: Real> MatrixTuple<R> {
    pub fn new(coords: Vec<CMat<R>>) -> Result<Self> {
        let first = coords
            .first()
            .ok_or_else(|| Error::DimMismatch("a matrix tuple needs d >= 1".into()))?;
        let n = first.nrows();
        for (j, c) in coords.iter().enumerate() {
            if c.nrows() != c.ncols() {
                return Err(Error::NonSquare { rows: c.nrows(), cols: c.ncols() });
            }
            if c.nrows() != n {
                return Err(Error::DimMismatch(format!(
                    "coordinate {} has size {} but coordinate 1 has size {n}",
                    j + 1,
                    c.nrows()
                )));
            }
            ensure_finite(c)?;
        }
        Ok(Self { coords, n })
    }

    pub fn zero(d: usize, n: usize) -> Self {
        Self { coords: vec![zeros(n, n); d.max(1)], n }
    }

    pub fn d(&self) -> usize {
        self.coords.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[CMat<R>] {
        &self.coords
    }

    /// Coordinate `j`, 1-based.
    pub fn coord(&self, j: usize) -> &CMat<R> {
        &self.coords[j - 1]
    }

    /// The monomial `Z^w`; the empty word gives the identity.
    pub fn monomial(&self, w: &Word) -> Result<CMat<R>> {
        w.check(self.d())?;
        let mut acc = identity(self.n);
        for &l in w.letters() {
            acc *= &self.coords[l - 1];
        }
        Ok(acc)
    }

    /// All monomials for words of length at most `max_len`, graded lexicographic.
    ///
    /// Built by right multiplication so each product costs one matrix product.
    pub fn monomials_up_to(&self, max_len: usize) -> Vec<CMat<R>> {
        let d = self.d();
        let mut out: Vec<CMat<R>> = Vec::with_capacity(count_words_up_to(d, max_len));
        out.push(identity(self.n));
        let mut start = 0;
        for _ in 0..max_len {
            let end = out.len();
            for i in start..end {
                for j in 0..d {
                    let next = &out[i] * &self.coords[j];
                    out.push(next);
                }
            }
            start = end;
        }
        out
    }

    /// `S Z S⁻¹` coordinate-wise.
    pub fn similarity(&self, s: &CMat<R>, s_inv: &CMat<R>) -> Result<Self> {
        if s.nrows() != self.n || s.ncols() != self.n {
            return Err(Error::DimMismatch("similarity size".into()));
        }
        Self::new(self.coords.iter().map(|c| s * c * s_inv).collect())
    }

    /// Coordinate-wise scaling by a real factor.
    pub fn scaled(&self, lambda: R) -> Self {
        Self {
            coords: self.coords.iter().map(|c| c * crate::scalar::creal(lambda)).collect(),
            n: self.n,
        }
    }

    /// Maximum over `j` of `‖α Z_j − Z̃_j α‖_F / max(1, ‖α Z_j‖_F, ‖Z̃_j α‖_F)`.
    pub fn intertwining_violation(&self, target: &Self, alpha: &CMat<R>) -> Result<R> {
        if self.d() != target.d() {
            return Err(Error::DimMismatch("intertwined tuples differ in d".into()));
        }
        if alpha.nrows() != target.n || alpha.ncols() != self.n {
            return Err(Error::DimMismatch(format!(
                "intertwiner is {}x{} but tuples have sizes {} and {}",
                alpha.nrows(),
                alpha.ncols(),
                self.n,
                target.n
            )));
        }
        let mut worst = R::zero();
        for (z, zt) in self.coords.iter().zip(target.coords.iter()) {
            worst = worst.max(crate::linalg::rel_diff(&(alpha * z), &(zt * alpha)));
        }
        Ok(worst)
    }
}

/// `Z^w` for a word in product order.
pub fn word_eval<R: Real>(w: &Word, z: &MatrixTuple<R>) -> Result<CMat<R>> {
    z.monomial(w)
}

/// Coordinate-wise block-diagonal sum.
pub fn direct_sum<R: Real>(zs: &[MatrixTuple<R>]) -> Result<MatrixTuple<R>> {
    let first = zs
        .first()
        .ok_or_else(|| Error::DimMismatch("direct sum of no tuples".into()))?;
    let d = first.d();
    if let Some(bad) = zs.iter().find(|z| z.d() != d) {
        return Err(Error::DimMismatch(format!("direct sum mixes d = {d} and d = {}", bad.d())));
    }
    let coords = (0..d)
        .map(|j| block_diag(&zs.iter().map(|z| z.coords[j].clone()).collect::<Vec<_>>()))
        .collect();
    MatrixTuple::new(coords)
}

/// Truncated free shift on the span of words of length at most `max_len`.
///
/// Coordinate `j` sends the basis vector of `w` to that of `j·w`, or to zero
/// when `j·w` is too long. Hence `T^a e_∅ = e_a` for `|a| ≤ max_len`.
pub fn free_shift<R: Real>(d: usize, max_len: usize) -> MatrixTuple<R> {
    let dim = count_words_up_to(d, max_len);
    let words = words_up_to(d, max_len);
    let coords = (1..=d)
        .map(|j| {
            let mut m = zeros(dim, dim);
            for w in words.iter().filter(|w| w.len() < max_len) {
                m[(w.prepend(j).index(d), w.index(d))] = cone();
            }
            m
        })
        .collect();
    MatrixTuple { coords, n: dim }
}
