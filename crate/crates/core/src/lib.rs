// `!(x < y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embeddings;
pub mod error;
pub mod logspace;
pub mod lorentz;
pub mod qanorm;
pub mod shapes;
pub mod stepfn;
pub mod testkit;
pub mod witness;

pub use error::{Error, Result};
pub use lorentz::{fact_bound, fundamental, lorentz_norm, LorentzNorm};
pub use qanorm::{piece_cost, qa_bounds, qa_lower, qa_upper, Decomposition, NormBounds};
pub use shapes::{DomainKind, Family, ShapeFunction};
pub use stepfn::{NestedForm, StepFunction};
pub use witness::{build_witness, WitnessFunction, WitnessSpec};
