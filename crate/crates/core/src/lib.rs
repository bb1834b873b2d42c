//! Exact verification of symmetric-function relations built from complete
//! Bell polynomials of power sums.
//!
//! The crate is layered bottom-up: exact rationals and formal series
//! ([`exactnum`]), sparse multivariate polynomials ([`polyring`]), partition
//! bookkeeping ([`partitions`]), power sums and Bell polynomials
//! ([`symmfunc`]), the polynomial families ([`families`]), the two relations
//! and their coefficient extraction ([`relations`]) and the linear solves on
//! top of them ([`solver`]).

pub mod exactnum;
pub mod families;
pub mod partitions;
pub mod polyring;
pub mod relations;
pub mod solver;
pub mod symmfunc;

pub use exactnum::{ExactRational, FormalSeries};
pub use partitions::{exponent_vectors, partition_count, ExponentVector};
pub use polyring::{Monomial, MultiPoly, PolyError, RationalFunction, VarId, VarKind, DEFAULT_TERM_CAP};
pub use solver::linalg::ExactMatrix;
pub use symmfunc::{complete_bell, power_sum, power_sum_product, to_power_sum_basis, PowerSumExpansion};
