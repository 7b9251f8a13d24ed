//! Lower bounds on Chvátal-Sankoff constants.
//!
//! The Chvátal-Sankoff constant `γ_{σ,d}` is the limit of `E[LCS]/n` for `d`
//! uniformly random length-`n` strings over a `σ`-symbol alphabet. This crate
//! computes certified lower bounds on these constants by iterating a monotone,
//! translation-invariant vector update until it witnesses a feasible triplet
//! `(u, r, ε)`, which certifies `γ_{σ,d} ≥ d·(r − ε)`.
//!
//! Two engines are provided:
//!
//! * [`general`] — works for any alphabet size `σ ≥ 2` and string count
//!   `d ≥ 2`, holding vectors of length `σ^{d·ℓ}` in RAM.
//! * [`binary`] — a heavily specialized `σ = 2, d = 2` engine using
//!   bit-interleaved pair indices, complement-symmetry halving, and an
//!   out-of-core sequential-I/O mode for vectors larger than RAM.
//!
//! The [`oracle`] module supplies independent ground truth (exact LCS dynamic
//! programming and Monte-Carlo estimation of the constants) used to
//! cross-validate that computed bounds really are lower bounds, and
//! [`verify`] bundles the golden-value suite behind the `verify` CLI command.

pub mod binary;
pub mod codec;
pub mod error;
pub mod general;
pub mod oracle;
pub mod store;
pub mod triplet;
pub mod verify;

pub use codec::{PairIndex, Params, TupleIndex};
pub use error::{Error, Result};
pub use triplet::{IterationControl, TripletResult};
