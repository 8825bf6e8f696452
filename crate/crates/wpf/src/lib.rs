//! A workbench for weak pseudo-freeness experiments over black-box
//! algebras.
//!
//! The crate provides, bottom up:
//!
//! - [`algebra`]: finite Ω-algebras given by operation tables, terms,
//!   identities, and varieties with decidable free-algebra normal forms.
//! - [`slp`]: straight-line programs — the representation used for encoded
//!   relations — with evaluation, free-algebra semantics, canonical power
//!   and identity programs, and breadth-first shortest-program search.
//! - [`blackbox`]: query-counted oracles hiding a finite algebra behind a
//!   seeded bit-string relabeling, reducts, the marked-padding embedding,
//!   and the verifier for encoded nontrivial relations.
//! - [`qsim`]: a small statevector simulator with permutation-unitary
//!   oracles, the multiply-pair oracle conversions, and toy
//!   phase-estimation order finding.
//! - [`attacks`]: relation-finding adversaries built from pluggable order
//!   and constructive-membership oracles.
//! - [`games`]: indexed families of algebras, the average-case and
//!   worst-case games, the expanded-group demo pipeline, and JSON/CSV
//!   reporting.
//!
//! Each major capability has a runnable example under `examples/`; the thin
//! `wpf` binary exposes the same functionality as subcommands.

pub mod algebra;
pub mod attacks;
pub mod blackbox;
pub mod games;
pub mod qsim;
pub mod slp;

pub use algebra::{FiniteAlgebra, OmegaAlgebra, Signature, Term, VarietySpec};
pub use blackbox::{BlackBoxAlgebra, Bits, RelationPair, Strictness};
pub use slp::Slp;
