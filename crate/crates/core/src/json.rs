//! JSON file formats and a stable float printer.
//!
//! Complex scalars are `[re, im]`; matrices are `{"rows", "cols", "data"}` with
//! row-major `data`. Floats are written with 17 significant digits so that a
//! document round-trips bit for bit.

use std::io;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::algebra::AlgebraSpec;
use crate::cpmaps::CpMap;
use crate::error::{Error, Result};
use crate::formal::FormalKernel;
use crate::linalg::{CMat, Tolerances};
use crate::ncfun::NcSeries;
use crate::nckernel::{GramBasisForm, KernelRep, KolmogorovForm, MomentForm, NcKernel};
use crate::rkhs::RkhsModel;
use crate::scalar::{cplx, to_f64, Real};
use crate::tuple::MatrixTuple;
use crate::word::Word;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixJson {
    pub fn from_mat<R: Real>(m: &CMat<R>) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([to_f64(z.re), to_f64(z.im)]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_mat<R: Real>(&self) -> Result<CMat<R>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Parse(format!(
                "matrix declares {}x{} but carries {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Parse("matrix entries must be finite".into()));
        }
        Ok(CMat::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            cplx(re, im)
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleJson {
    pub d: usize,
    pub n: usize,
    pub coords: Vec<MatrixJson>,
}

impl TupleJson {
    pub fn from_tuple<R: Real>(z: &MatrixTuple<R>) -> Self {
        Self { d: z.d(), n: z.n(), coords: z.coords().iter().map(MatrixJson::from_mat).collect() }
    }

    pub fn to_tuple<R: Real>(&self) -> Result<MatrixTuple<R>> {
        if self.coords.len() != self.d {
            return Err(Error::Parse(format!("tuple declares d = {} but has {} coordinates", self.d, self.coords.len())));
        }
        let coords = self.coords.iter().map(|c| c.to_mat()).collect::<Result<Vec<_>>>()?;
        if coords.iter().any(|c| c.shape() != (self.n, self.n)) {
            return Err(Error::Parse(format!("every coordinate must be {0}x{0}", self.n)));
        }
        MatrixTuple::new(coords)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub word: Vec<usize>,
    pub coeff: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesJson {
    pub d: usize,
    pub p: usize,
    pub q: usize,
    pub terms: Vec<TermJson>,
}

impl SeriesJson {
    pub fn from_series<R: Real>(f: &NcSeries<R>) -> Self {
        Self {
            d: f.d(),
            p: f.out_dim(),
            q: f.in_dim(),
            terms: f
                .terms()
                .iter()
                .map(|(w, c)| TermJson { word: w.letters().to_vec(), coeff: MatrixJson::from_mat(c) })
                .collect(),
        }
    }

    pub fn to_series<R: Real>(&self) -> Result<NcSeries<R>> {
        let terms = self
            .terms
            .iter()
            .map(|t| Ok((Word::new(t.word.clone()), t.coeff.to_mat()?)))
            .collect::<Result<Vec<_>>>()?;
        NcSeries::from_terms(self.d, self.p, self.q, terms)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    Scalar,
    FullMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraJson {
    pub kind: AlgebraKind,
    #[serde(default = "one")]
    pub k: usize,
    #[serde(default = "one")]
    pub r: usize,
}

fn one() -> usize {
    1
}

impl AlgebraJson {
    pub fn from_spec(a: AlgebraSpec) -> Self {
        let kind = if a.is_scalar() { AlgebraKind::Scalar } else { AlgebraKind::FullMatrix };
        Self { kind, k: a.k(), r: a.r() }
    }

    pub fn to_spec(&self) -> Result<AlgebraSpec> {
        match self.kind {
            AlgebraKind::Scalar if self.k != 1 => Err(Error::Parse("a scalar algebra has k = 1".into())),
            _ => AlgebraSpec::full_matrix(self.k, self.r),
        }
    }
}

impl Default for AlgebraJson {
    fn default() -> Self {
        Self { kind: AlgebraKind::Scalar, k: 1, r: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentJson {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub coeff: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    #[serde(default)]
    pub algebra: AlgebraJson,
    pub d: usize,
    pub y: usize,
    pub basis: Vec<SeriesJson>,
    pub gram: MatrixJson,
}

impl ModelJson {
    pub fn from_form<R: Real>(k: &GramBasisForm<R>) -> Self {
        Self {
            algebra: AlgebraJson::from_spec(k.algebra()),
            d: k.d(),
            y: k.y_dim(),
            basis: k.basis().iter().map(SeriesJson::from_series).collect(),
            gram: MatrixJson::from_mat(k.gram()),
        }
    }

    pub fn to_form<R: Real>(&self, tol: &Tolerances<R>) -> Result<GramBasisForm<R>> {
        let basis = self.basis.iter().map(|b| b.to_series()).collect::<Result<Vec<_>>>()?;
        GramBasisForm::new(self.algebra.to_spec()?, self.d, self.y, basis, self.gram.to_mat()?, tol)
    }

    pub fn to_model<R: Real>(&self, tol: &Tolerances<R>) -> Result<RkhsModel<R>> {
        Ok(RkhsModel::from_kernel(self.to_form(tol)?))
    }
}

/// Kernel files, tagged by `"form"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum KernelJson {
    Moment {
        d: usize,
        y: usize,
        max_len: usize,
        moments: Vec<MomentJson>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        formal: bool,
    },
    Kolmogorov {
        #[serde(default)]
        algebra: AlgebraJson,
        h: SeriesJson,
    },
    GramBasis(ModelJson),
}

impl KernelJson {
    pub fn from_kernel<R: Real>(k: &KernelRep<R>) -> Self {
        match k {
            KernelRep::Moment(m) => Self::from_moment(m, false),
            KernelRep::Kolmogorov(h) => {
                KernelJson::Kolmogorov { algebra: AlgebraJson::from_spec(h.algebra()), h: SeriesJson::from_series(h.h()) }
            }
            KernelRep::GramBasis(g) => KernelJson::GramBasis(ModelJson::from_form(g)),
        }
    }

    pub fn from_moment<R: Real>(m: &MomentForm<R>, formal: bool) -> Self {
        KernelJson::Moment {
            d: m.d(),
            y: m.y_dim(),
            max_len: m.max_len(),
            moments: m
                .moments()
                .iter()
                .map(|((a, b), c)| MomentJson {
                    a: a.letters().to_vec(),
                    b: b.letters().to_vec(),
                    coeff: MatrixJson::from_mat(c),
                })
                .collect(),
            formal,
        }
    }

    pub fn from_formal<R: Real>(k: &FormalKernel<R>) -> Self {
        Self::from_moment(k.as_moment_form(), true)
    }

    pub fn to_kernel<R: Real>(&self, tol: &Tolerances<R>) -> Result<KernelRep<R>> {
        match self {
            KernelJson::Moment { d, y, max_len, moments, .. } => {
                let table = moments
                    .iter()
                    .map(|m| Ok(((Word::new(m.a.clone()), Word::new(m.b.clone())), m.coeff.to_mat()?)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(MomentForm::new(*d, *y, *max_len, table)?.into())
            }
            KernelJson::Kolmogorov { algebra, h } => Ok(KolmogorovForm::new(algebra.to_spec()?, h.to_series()?)?.into()),
            KernelJson::GramBasis(m) => Ok(m.to_form(tol)?.into()),
        }
    }

    /// Formal kernels are moment files; the `formal` marker is optional on input.
    pub fn to_formal<R: Real>(&self, tol: &Tolerances<R>) -> Result<FormalKernel<R>> {
        match self.to_kernel(tol)? {
            KernelRep::Moment(m) => FormalKernel::from_moment_form(m, tol),
            _ => Err(Error::Parse("a formal kernel must use the moment form".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CpMapJson {
    pub k: usize,
    pub m: usize,
    pub units: Vec<Vec<MatrixJson>>,
}

impl CpMapJson {
    pub fn from_map<R: Real>(phi: &CpMap<R>) -> Self {
        let k = phi.k();
        Self {
            k,
            m: phi.m(),
            units: (0..k).map(|p| (0..k).map(|q| MatrixJson::from_mat(phi.unit(p, q))).collect()).collect(),
        }
    }

    pub fn to_map<R: Real>(&self) -> Result<CpMap<R>> {
        if self.units.len() != self.k || self.units.iter().any(|row| row.len() != self.k) {
            return Err(Error::Parse(format!("units must be a {0}x{0} array of matrices", self.k)));
        }
        let units = self.units.iter().flatten().map(|u| u.to_mat()).collect::<Result<Vec<_>>>()?;
        CpMap::new(self.k, self.m, units)
    }
}

/// Parses a document, reporting the line and column of syntax or schema errors.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn matrix_value<R: Real>(m: &CMat<R>) -> Value {
    to_value(&MatrixJson::from_mat(m))
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("plain data serializes")
}

/// Compact float formatter: `{:.16e}` for finite values, `null` otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct StableFormatter;

impl Formatter for StableFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_stable_string<T: Serialize>(t: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, StableFormatter);
    t.serialize(&mut ser).expect("plain data serializes");
    String::from_utf8(out).expect("serde_json writes utf-8")
}
