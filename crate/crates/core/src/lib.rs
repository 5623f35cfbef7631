// NaN inputs are rejected through negated comparisons on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circle;
pub mod coreset;
pub mod error;
pub mod legendre;
pub mod measure;
pub mod moments;
pub mod obstacle;
pub mod oracle;
mod par;
pub mod quad;
pub mod radial;
pub mod seqspace;
pub mod series;
pub mod transforms;
pub mod weight;
pub mod wizard;

pub use error::{Error, Result};
