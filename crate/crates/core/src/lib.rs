//! Free noncommutative functions and completely positive nc kernels at finite matrix scale.
//!
//! Everything is generic over a real scalar `R` (`f32` or `f64`) with complex
//! entries; the aliases at the crate root fix `R = f64`.
//!
//! Words are stored in product order: the letters `(l1, ..., lN)` stand for
//! `Z_{l1} ⋯ Z_{lN}`. Series evaluate as `Σ Z^a ⊗ f_a` with the point factor
//! on the left.

// Negated comparisons make NaN fail every threshold.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod cpmaps;
pub mod error;
pub mod formal;
pub mod linalg;
pub mod multiplier;
pub mod json;
pub mod ncfun;
pub mod nckernel;
pub mod rkhs;
pub mod sampler;
pub mod scalar;
pub mod tuple;
pub mod word;

pub use algebra::AlgebraSpec;
pub use error::{Error, Result};
pub use linalg::{kron, min_eig_hermitian, psd_factor, CMat, CVec, Tolerances};
pub use ncfun::{AxiomReport, NcEvaluator};
pub use nckernel::{NcKernel, KernelElement};
pub use sampler::PointSampler;
pub use scalar::Real;
pub use tuple::{direct_sum, word_eval};
pub use word::{word_transpose, Word};

pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix = CMat<f64>;
pub type Tol = Tolerances<f64>;
pub type Tuple = tuple::MatrixTuple<f64>;
pub type Series = ncfun::NcSeries<f64>;
pub type Kernel = nckernel::KernelRep<f64>;
pub type MomentKernel = nckernel::MomentForm<f64>;
pub type KolmogorovKernel = nckernel::KolmogorovForm<f64>;
pub type GramKernel = nckernel::GramBasisForm<f64>;
pub type Certificate = nckernel::CpCertificate<f64>;
pub type Model = rkhs::RkhsModel<f64>;
pub type Element = rkhs::SpaceElement<f64>;
pub type Formal = formal::FormalKernel<f64>;
pub type Brangesian = multiplier::BrangesianDecomposition<f64>;
pub type Map = cpmaps::CpMap<f64>;
