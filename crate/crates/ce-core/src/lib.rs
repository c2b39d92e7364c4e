//! Numerical certification kernels for completely positive projections.
//!
//! Given a linear map on M_n that is completely positive, contractive and
//! idempotent, its range carries a C*-algebra structure under the induced
//! product `x ∘ y = phi(x y)`. This crate certifies the hypotheses and
//! mechanically executes the construction behind that fact, emitting a
//! numerical certificate for each step:
//!
//! - [`linalg`] / [`subspace`]: complex matrix arithmetic, Hilbert-Schmidt
//!   geometry, PSD certification and operator-subspace spans.
//! - [`cpmap`]: Choi/Kraus representations, hypothesis certificates and
//!   the Kadison-Schwarz estimate.
//! - [`builders`]: certified instance generators (pinchings, group
//!   averages, conjugated pinchings, Cesaro fixed-point projections).
//! - [`construct`]: the kernel ideal and its identity with the kernel,
//!   word-defect membership, the induced product with certified axioms,
//!   block decomposition, and the quotient isomorphism with complete
//!   order checks.
//!
//! All values are immutable after construction and every operation is a
//! pure function of its inputs (randomized ones take explicit seeds), so
//! everything here is safe to drive from multiple threads.

pub mod builders;
pub mod cpmap;
pub mod error;
pub mod linalg;
pub mod sampling;
pub mod subspace;

pub mod construct;

pub use cpmap::{CpMap, KsCheck, ProjectionCertificate};
pub use error::{Error, Result};
pub use linalg::{CMatrix, PsdReport, Tolerances};
pub use subspace::{Membership, OperatorSubspace, SubspaceMatch};
