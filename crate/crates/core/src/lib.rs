//! Locally divergent torus orbits on SL_n over S-arithmetic quotients,
//! computed over exact number-field arithmetic.
//!
//! The crate provides:
//!
//! * exact arithmetic in a number field with certified embeddings and
//!   normalized valuations ([`numfield`]);
//! * S-unit groups, logarithmic reduction and the classification of
//!   projected unit closures ([`sunits`]);
//! * type-A Weyl and parabolic combinatorics ([`weylcomb`]);
//! * exact Bruhat and block big-cell factorizations ([`exactlin`]);
//! * the two-place stratification of orbit closures by admissible
//!   parabolic pairs ([`strata`]);
//! * homogeneous-closure and density prediction for more than two places
//!   with a numerical dynamics harness ([`multiplace`]);
//! * decomposable forms at S-integral points ([`forms`]);
//! * a batch CLI front end ([`cli`]).

pub mod cli;
pub mod dyadic;
pub mod error;
pub mod exactlin;
pub mod forms;
pub mod multiplace;
pub mod numfield;
pub mod poly;
pub mod strata;
pub mod sunits;
pub mod weylcomb;

pub use error::{Alarm, Error, Result};
