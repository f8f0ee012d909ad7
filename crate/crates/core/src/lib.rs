//! Feedback Turing computation on Cantor space.
//!
//! * [`coding`]: pairing, string enumeration, eventually periodic points of `2^ω`.
//! * [`machine`]: the base register machine with oracle and halting-query instructions.
//! * [`feedback`]: the budgeted evaluator for feedback machines.
//! * [`borel`]: Borel codes, tree and flat, with realization and rank.
//! * [`compile`]: machine-to-Borel-code compilation.
//! * [`ordinal`]: Cantor normal form notations below `ε₀` and well-order presentations.
//! * [`ittm`]: `(α, β)`-infinite time Turing machines.
//! * [`structenc`]: structure encodings and presentation-independence harnesses.

pub mod asm;
pub mod borel;
pub mod coding;
pub mod compile;
pub mod exec;
pub mod feedback;
pub mod ittm;
pub mod machine;
pub mod ordinal;
pub mod structenc;

pub use exec::Exec;
