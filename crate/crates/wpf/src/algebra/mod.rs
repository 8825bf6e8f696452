//! Finite Ω-algebras: signatures, terms, identities, varieties with
//! decidable free-algebra normal forms, and term evaluation.

pub mod finite;
pub mod free;
pub mod signature;
pub mod term;
pub mod text;
pub mod variety;

pub use finite::{subalgebra_closure, AlgebraError, FiniteAlgebra};
pub use free::{eval_free, free_equal, normalize, FreeElement, FreeError, Letter};
pub use signature::{Signature, SignatureError, SymbolDef, SymbolId};
pub use term::{
    check_identity_in_algebra, check_identity_with_budget, eval_term, Term, TermError,
};
pub use variety::{algebra_in_variety, Exponent, VarietySpec, VarietyError};

/// Anything whose fundamental operations can be applied: table algebras
/// evaluate directly, black-box algebras route through a query-counted
/// oracle. Elements expose a dense integer `label` (carrier index or bit
/// pattern) so searches can deduplicate without hashing.
pub trait OmegaAlgebra {
    type Elem: Clone + Eq + std::fmt::Debug;

    fn signature(&self) -> &Signature;

    /// Exclusive upper bound on `label` values.
    fn label_space(&self) -> usize;

    fn label(&self, elem: &Self::Elem) -> usize;

    fn apply(&self, symbol: &str, args: &[Self::Elem]) -> Result<Self::Elem, AlgebraError>;

    fn apply_id(&self, sym: SymbolId, args: &[Self::Elem]) -> Result<Self::Elem, AlgebraError> {
        self.apply(self.signature().name(sym), args)
    }
}
