//! Coherence quantifiers, optimal channels and discrimination games computed
//! with small dense semidefinite programs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod games;
pub mod channels;
pub mod linalg;
pub mod measures;
pub mod oneshot;
pub mod par;
pub mod report;
pub mod sdp;
pub mod tol;

pub use error::{Error, Result};
