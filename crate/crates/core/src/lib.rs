//! Spreads of the Hermitian unital in PG(2,q²).
//!
//! The crate is layered bottom-up:
//!
//! - [`field`]: GF(q²) in discrete-log form with the norm and conjugation maps.
//! - [`geometry`]: the plane, the unital, its polarity and the secant tables.
//! - [`group`]: the automorphism group PΓU(3,q) acting on secants, with orbit,
//!   set-stabilizer and transporter machinery.
//! - [`constructions`]: regular, cyclic and André spreads.
//! - [`search`]: starter configurations with orbit-based isomorph rejection and
//!   the exact-cover backtrack.
//! - [`classify`]: invariants, reduction to isomorphism classes and labelling.

pub mod field;
pub mod geometry;
pub mod perm;
pub mod group;
pub mod constructions;
pub mod search;
pub mod classify;

pub use classify::{Classifier, Kind, SpreadInvariants};
pub use constructions::Spread;
pub use field::{FieldElement, FieldError, FieldSpec, FieldTable};
pub use geometry::{LineKind, PointId, SecantId, UnitalGeometry};
pub use group::{PermGroup, UnitaryGroup};
pub use perm::Perm;
