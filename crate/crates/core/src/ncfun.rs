//! Noncommutative series with matrix coefficients and their evaluation on matrix tuples.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{block, block_diag, identity, kron, rel_diff, zeros, CMat, Tolerances};
use crate::scalar::{creal, Real};
use crate::tuple::{direct_sum, free_shift, MatrixTuple};
use crate::word::{count_words_up_to, words_up_to, Word};

/// Finitely supported series `f(z) = Σ f_a z^a` with `p × q` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct NcSeries<R: Real> {
    d: usize,
    out_dim: usize,
    in_dim: usize,
    terms: BTreeMap<Word, CMat<R>>,
}

impl<R: Real> NcSeries<R> {
    /// The zero series.
    pub fn zero(d: usize, out_dim: usize, in_dim: usize) -> Self {
        Self { d, out_dim, in_dim, terms: BTreeMap::new() }
    }

    /// Builds a series from distinct words; repeated words are rejected.
    pub fn from_terms(d: usize, out_dim: usize, in_dim: usize, terms: Vec<(Word, CMat<R>)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimMismatch("a series needs d >= 1".into()));
        }
        let mut s = Self::zero(d, out_dim, in_dim);
        for (w, c) in terms {
            s.check_term(&w, &c)?;
            if s.terms.contains_key(&w) {
                return Err(Error::Duplicate(format!("word {w} appears twice")));
            }
            s.terms.insert(w, c);
        }
        Ok(s)
    }

    /// Series with a single constant term.
    pub fn constant(d: usize, c: CMat<R>) -> Self {
        let (p, q) = c.shape();
        let mut s = Self::zero(d, p, q);
        s.terms.insert(Word::empty(), c);
        s
    }

    fn check_term(&self, w: &Word, c: &CMat<R>) -> Result<()> {
        w.check(self.d)?;
        if c.shape() != (self.out_dim, self.in_dim) {
            return Err(Error::ShapeMismatch(format!(
                "coefficient of {w} is {}x{}, expected {}x{}",
                c.nrows(),
                c.ncols(),
                self.out_dim,
                self.in_dim
            )));
        }
        crate::linalg::ensure_finite(c)
    }

    /// Adds `c` to the coefficient of `w`.
    pub fn add_term(&mut self, w: Word, c: CMat<R>) -> Result<()> {
        self.check_term(&w, &c)?;
        match self.terms.get_mut(&w) {
            Some(existing) => *existing += c,
            None => {
                self.terms.insert(w, c);
            }
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Row count `p` of each coefficient.
    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    /// Column count `q` of each coefficient.
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn terms(&self) -> &BTreeMap<Word, CMat<R>> {
        &self.terms
    }

    pub fn coeff(&self, w: &Word) -> Option<&CMat<R>> {
        self.terms.get(w)
    }

    /// Coefficient of `w`, zero when absent.
    pub fn coeff_or_zero(&self, w: &Word) -> CMat<R> {
        self.terms.get(w).cloned().unwrap_or_else(|| zeros(self.out_dim, self.in_dim))
    }

    /// Longest word in the support; `None` for the empty series.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Word::len).max()
    }

    /// Keeps only words of length at most `max_len`.
    pub fn truncate(&self, max_len: usize) -> Self {
        Self {
            terms: self.terms.iter().filter(|(w, _)| w.len() <= max_len).map(|(w, c)| (w.clone(), c.clone())).collect(),
            ..Self::zero(self.d, self.out_dim, self.in_dim)
        }
    }

    /// Applies `g` to every coefficient. All images must share one shape.
    pub fn map_coeffs(&self, out_dim: usize, in_dim: usize, g: impl Fn(&CMat<R>) -> CMat<R>) -> Result<Self> {
        let terms = self.terms.iter().map(|(w, c)| (w.clone(), g(c))).collect();
        Self::from_terms(self.d, out_dim, in_dim, terms)
    }

    pub fn scale(&self, c: num_complex::Complex<R>) -> Self {
        Self {
            terms: self.terms.iter().map(|(w, m)| (w.clone(), m * c)).collect(),
            ..Self::zero(self.d, self.out_dim, self.in_dim)
        }
    }

    /// Termwise sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.d, self.out_dim, self.in_dim) != (other.d, other.out_dim, other.in_dim) {
            return Err(Error::ShapeMismatch("added series differ in shape".into()));
        }
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone())?;
        }
        Ok(out)
    }

    /// Coefficients stacked in graded-lex order up to `max_len`, as one column.
    pub fn coefficient_vector(&self, max_len: usize) -> CMat<R> {
        let words = words_up_to(self.d, max_len);
        let blocks: Vec<CMat<R>> = words.iter().map(|w| crate::linalg::vec_row(&self.coeff_or_zero(w))).collect();
        crate::linalg::vstack(1, &blocks)
    }

    /// `Σ Z^a ⊗ f_a`, an `(n·p) × (n·q)` matrix with the point index outermost.
    pub fn eval(&self, z: &MatrixTuple<R>) -> Result<CMat<R>> {
        if z.d() != self.d {
            return Err(Error::DimMismatch(format!("series has d = {} but point has d = {}", self.d, z.d())));
        }
        let n = z.n();
        let mut out = zeros(n * self.out_dim, n * self.in_dim);
        let deg = self.degree().unwrap_or(0);
        // Dense supports are cheaper through the shared monomial table.
        if self.terms.len() * 2 > count_words_up_to(self.d, deg) {
            let monos = z.monomials_up_to(deg);
            for (w, c) in &self.terms {
                out += kron(&monos[w.index(self.d)], c);
            }
        } else {
            for (w, c) in &self.terms {
                out += kron(&z.monomial(w)?, c);
            }
        }
        Ok(out)
    }
}

/// Anything that evaluates like an nc function on matrix tuples.
pub trait NcEvaluator<R: Real> {
    fn d(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn in_dim(&self) -> usize;
    fn evaluate(&self, z: &MatrixTuple<R>) -> Result<CMat<R>>;
}

impl<R: Real> NcEvaluator<R> for NcSeries<R> {
    fn d(&self) -> usize {
        self.d
    }
    fn out_dim(&self) -> usize {
        self.out_dim
    }
    fn in_dim(&self) -> usize {
        self.in_dim
    }
    fn evaluate(&self, z: &MatrixTuple<R>) -> Result<CMat<R>> {
        self.eval(z)
    }
}

pub fn eval<R: Real>(f: &NcSeries<R>, z: &MatrixTuple<R>) -> Result<CMat<R>> {
    f.eval(z)
}

/// Inputs that produced the worst violation in an axiom check.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness<R: Real> {
    pub sample: usize,
    pub check: String,
    pub points: Vec<MatrixTuple<R>>,
    pub matrices: Vec<CMat<R>>,
}

/// Outcome of an executable axiom check.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomReport<R: Real> {
    pub passed: bool,
    pub max_violation: R,
    pub threshold: R,
    pub witness: Option<Witness<R>>,
}

impl<R: Real> AxiomReport<R> {
    pub fn new(threshold: R) -> Self {
        Self { passed: true, max_violation: R::zero(), threshold, witness: None }
    }

    /// Records one measured violation, keeping the worst offender as witness.
    pub fn record(&mut self, violation: R, witness: impl FnOnce() -> Witness<R>) {
        let bad = !(violation <= self.threshold);
        if violation > self.max_violation || (bad && self.passed) {
            self.max_violation = violation;
            if bad {
                self.witness = Some(witness());
            }
        }
        if bad {
            self.passed = false;
        }
    }

    /// Folds a report into this one.
    pub fn merge(&mut self, other: AxiomReport<R>) {
        if other.max_violation > self.max_violation {
            self.max_violation = other.max_violation;
        }
        if !other.passed {
            if self.passed {
                self.witness = other.witness;
            }
            self.passed = false;
        }
    }
}

/// Checks `f(Z ⊕ W) = f(Z) ⊕ f(W)` on each pair.
pub fn check_respects_direct_sums<R: Real, F: NcEvaluator<R> + ?Sized>(
    f: &F,
    samples: &[(MatrixTuple<R>, MatrixTuple<R>)],
    tol: &Tolerances<R>,
) -> Result<AxiomReport<R>> {
    let mut report = AxiomReport::new(tol.eq_rel);
    for (i, (z, w)) in samples.iter().enumerate() {
        let sum = direct_sum(&[z.clone(), w.clone()])?;
        let lhs = f.evaluate(&sum)?;
        let rhs = block_diag(&[f.evaluate(z)?, f.evaluate(w)?]);
        let v = rel_diff(&lhs, &rhs);
        report.record(v, || Witness {
            sample: i,
            check: "direct_sum".into(),
            points: vec![z.clone(), w.clone()],
            matrices: vec![lhs.clone(), rhs.clone()],
        });
    }
    Ok(report)
}

/// Checks `(α ⊗ I_p) f(Z) = f(Z̃) (α ⊗ I_q)` for each triple `(Z, Z̃, α)` with `α Z = Z̃ α`.
pub fn check_respects_intertwinings<R: Real, F: NcEvaluator<R> + ?Sized>(
    f: &F,
    triples: &[(MatrixTuple<R>, MatrixTuple<R>, CMat<R>)],
    tol: &Tolerances<R>,
) -> Result<AxiomReport<R>> {
    let mut report = AxiomReport::new(tol.eq_rel);
    let (p, q) = (f.out_dim(), f.in_dim());
    for (i, (z, zt, alpha)) in triples.iter().enumerate() {
        let pre = z.intertwining_violation(zt, alpha)?;
        if !(pre <= tol.eq_rel) {
            return Err(Error::BadIntertwiner { violation: crate::scalar::to_f64(pre) });
        }
        let lhs = kron(alpha, &identity(p)) * f.evaluate(z)?;
        let rhs = f.evaluate(zt)? * kron(alpha, &identity(q));
        let v = rel_diff(&lhs, &rhs);
        report.record(v, || Witness {
            sample: i,
            check: "intertwining".into(),
            points: vec![z.clone(), zt.clone()],
            matrices: vec![alpha.clone(), lhs.clone(), rhs.clone()],
        });
    }
    Ok(report)
}

/// Smallest `L` with every product of `L` coordinates zero.
///
/// Uses `G_ℓ = Σ_{|w|=ℓ} Z^w (Z^w)*`, which obeys `G_{ℓ+1} = Σ_j Z_j G_ℓ Z_j*`.
/// The products of length `ℓ` are treated as zero once `‖G_ℓ‖₂^{1/2}` falls
/// below `eq_rel · max(1, Σ_j ‖Z_j‖₂)^ℓ`.
pub fn nilpotency_order<R: Real>(z: &MatrixTuple<R>, tol: &Tolerances<R>) -> Result<usize> {
    let n = z.n();
    if n == 0 {
        return Ok(1);
    }
    let norm = z.coords().iter().map(crate::linalg::spectral_norm).fold(R::zero(), |a, b| a + b).max(R::one());
    // C carries a factor with C C* = Σ_{|w|=len} Z^w (Z^w)*, compressed by SVD.
    let mut c: CMat<R> = identity(n);
    let mut bound = R::one();
    for len in 1..=n {
        bound *= norm;
        let images: Vec<CMat<R>> = z.coords().iter().map(|x| x * &c).collect();
        let stacked = crate::linalg::hstack(n, &images);
        let (u, sv, _) = crate::linalg::thin_svd(&stacked);
        let floor = tol.eq_rel * bound;
        let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > floor).collect();
        if keep.is_empty() {
            return Ok(len);
        }
        c = CMat::from_fn(n, keep.len(), |r, j| u[(r, keep[j])] * creal(sv[keep[j]]));
    }
    Err(Error::NotNilpotent)
}

/// Evaluation that sums only words shorter than the nilpotency order of `z`.
pub fn eval_on_nilpotent<R: Real>(f: &NcSeries<R>, z: &MatrixTuple<R>, tol: &Tolerances<R>) -> Result<CMat<R>> {
    let order = nilpotency_order(z, tol)?;
    f.truncate(order - 1).eval(z)
}

/// Recovers `f_a` for `|a| ≤ max_len` by probing with truncated free shifts.
///
/// Block (row `a`, column `∅`) of `f(T)` equals `f_a` for the shift `T` on words of
/// length at most `L`, for any `L ≥ |a|`. The probes at `max_len` and `max_len + 1`
/// must agree; otherwise the evaluator is not an nc function.
pub fn extract_taylor_coefficients<R: Real, F: NcEvaluator<R> + ?Sized>(
    f: &F,
    d: usize,
    max_len: usize,
    p: usize,
    q: usize,
    tol: &Tolerances<R>,
) -> Result<NcSeries<R>> {
    let read = |len: usize| -> Result<Vec<CMat<R>>> {
        let t = free_shift::<R>(d, len);
        let v = f.evaluate(&t)?;
        if v.shape() != (t.n() * p, t.n() * q) {
            return Err(Error::ShapeMismatch(format!(
                "evaluator returned {}x{} at probe size {}",
                v.nrows(),
                v.ncols(),
                t.n()
            )));
        }
        Ok((0..count_words_up_to(d, max_len)).map(|i| block(&v, i, 0, p, q)).collect())
    };
    let low = read(max_len)?;
    let high = read(max_len + 1)?;
    let deviation = low.iter().zip(high.iter()).map(|(a, b)| rel_diff(a, b)).fold(R::zero(), |a, b| a.max(b));
    if !(deviation <= tol.eq_rel) {
        return Err(Error::InconsistentEvaluator { deviation: crate::scalar::to_f64(deviation) });
    }
    let terms = words_up_to(d, max_len)
        .into_iter()
        .zip(low)
        .filter(|(_, c)| c.iter().any(|x| x.re != R::zero() || x.im != R::zero()))
        .collect();
    NcSeries::from_terms(d, p, q, terms)
}
