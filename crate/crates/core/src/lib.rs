//! Normal forms and entanglement monotones for multipartite states.
//!
//! The crate brings pure tensors and density operators into two canonical
//! forms and evaluates a family of polynomial entanglement monotones:
//!
//! - [`slocc`]: the iterative determinant-1 local-filtering normal form —
//!   every single-party reduced operator is driven towards a multiple of the
//!   identity, with the trace decreasing at each step. States in the W class
//!   flow to zero; the accumulated filters can optionally be made hermitian
//!   to pin the remaining local-unitary freedom.
//! - [`lu`]: a local-unitary normal form (a weak multilinear generalization
//!   of the SVD) that enforces a fixed pattern of zero entries plus reality
//!   conditions, with an equivalence probe built on top.
//! - [`monotones`]: SLOCC-invariant monotones written as Levi-Civita
//!   contractions of state copies (concurrence, 3-tangle and friends), with
//!   invariance and monotonicity property checks.
//!
//! [`tensor`] holds the dense storage (row-major, party 1 slowest) and
//! [`states`] the canonical fixtures. Everything is double precision and
//! intended for desk-scale systems (total dimension up to ~10⁴).

pub mod error;
pub mod json;
pub mod linalg;
pub mod lu;
pub mod monotones;
pub mod random;
pub mod slocc;
pub mod states;
pub mod tensor;

pub use error::{MpnfError, Result};
pub use tensor::{
    apply_local, pure_to_density, DensityOperator, LocalOperatorSet, MultiTensor, OpFlavor, State,
};

/// Default numeric tolerances. Structure validation uses the τ_* values;
/// generic floating-point comparisons use `REL`.
pub mod tol {
    /// τ_herm: hermiticity of density operators, relative to trace.
    pub const HERMITIAN: f64 = 1e-9;
    /// τ_unit: ‖A†A − I‖ for operators flagged unitary.
    pub const UNITARY: f64 = 1e-9;
    /// τ_det: |det A − 1| for operators flagged special-linear.
    pub const DETERMINANT: f64 = 1e-9;
    /// τ_psd: admissible negative eigenvalue, relative to trace.
    pub const PSD: f64 = 1e-9;
    /// Generic relative comparison tolerance.
    pub const REL: f64 = 1e-12;
    /// Eigenvalue ratio below which a reduced operator counts as rank
    /// deficient.
    pub const RANK: f64 = 1e-12;
}
