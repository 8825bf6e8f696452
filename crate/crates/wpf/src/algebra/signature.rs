//! Operation signatures: finitary symbols with arities.

use std::fmt;

use thiserror::Error;

/// Index of a symbol within a [`Signature`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolDef {
    pub name: String,
    pub arity: usize,
}

/// A finite set of operation symbols, each with a fixed arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<SymbolDef>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("duplicate symbol name `{0}`")]
    DuplicateName(String),
    #[error("symbol name must be a nonempty token, got `{0}`")]
    BadName(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: Vec<(S, usize)>) -> Result<Self, SignatureError> {
        let symbols: Vec<SymbolDef> = symbols
            .into_iter()
            .map(|(name, arity)| SymbolDef { name: name.into(), arity })
            .collect();
        for (i, s) in symbols.iter().enumerate() {
            if s.name.is_empty() || s.name.chars().any(|c| c.is_whitespace() || "(),/#:".contains(c)) {
                return Err(SignatureError::BadName(s.name.clone()));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(SignatureError::DuplicateName(s.name.clone()));
            }
        }
        Ok(Signature { symbols })
    }

    /// The group signature: `mul/2`, `inv/1`, `one/0`.
    pub fn group() -> Self {
        Signature::new(vec![("mul", 2), ("inv", 1), ("one", 0)]).unwrap()
    }

    /// The ring signature: `add/2`, `neg/1`, `zero/0`, `mul/2`.
    /// Its additive symbols form a group signature inside the ring.
    pub fn ring() -> Self {
        Signature::new(vec![("add", 2), ("neg", 1), ("zero", 0), ("mul", 2)]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> impl Iterator<Item = (SymbolId, &SymbolDef)> {
        self.symbols.iter().enumerate().map(|(i, s)| (SymbolId(i), s))
    }

    pub fn id_of(&self, name: &str) -> Option<SymbolId> {
        self.symbols.iter().position(|s| s.name == name).map(SymbolId)
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.0].name
    }

    pub fn arity(&self, id: SymbolId) -> usize {
        self.symbols[id.0].arity
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.id_of(name).map(|id| self.arity(id))
    }

    pub fn has_nullary(&self) -> bool {
        self.symbols.iter().any(|s| s.arity == 0)
    }

    /// Keep only the named symbols, preserving their original order.
    pub fn restrict(&self, names: &[&str]) -> Result<Signature, SignatureError> {
        for n in names {
            if self.id_of(n).is_none() {
                return Err(SignatureError::UnknownSymbol((*n).to_string()));
            }
        }
        let symbols = self
            .symbols
            .iter()
            .filter(|s| names.contains(&s.name.as_str()))
            .cloned()
            .collect();
        Ok(Signature { symbols })
    }

    /// Bijectively rename symbols; pairs are `(old, new)`.
    pub fn renamed(&self, mapping: &[(&str, &str)]) -> Result<Signature, SignatureError> {
        let mut symbols = self.symbols.clone();
        for (old, new) in mapping {
            match symbols.iter_mut().find(|s| s.name == *old) {
                Some(s) => s.name = (*new).to_string(),
                None => return Err(SignatureError::UnknownSymbol((*old).to_string())),
            }
        }
        Signature::new(symbols.into_iter().map(|s| (s.name, s.arity)).collect())
    }

    /// True iff this is exactly the canonical group signature.
    pub fn is_group(&self) -> bool {
        *self == Signature::group()
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .symbols
            .iter()
            .map(|s| format!("{}/{}", s.name, s.arity))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_signature_contents() {
        let g = Signature::group();
        assert_eq!(g.arity_of("mul"), Some(2));
        assert_eq!(g.arity_of("inv"), Some(1));
        assert_eq!(g.arity_of("one"), Some(0));
        assert!(g.is_group());
    }

    #[test]
    fn rejects_duplicates() {
        assert_eq!(
            Signature::new(vec![("f", 2), ("f", 1)]),
            Err(SignatureError::DuplicateName("f".into()))
        );
    }

    #[test]
    fn restrict_keeps_order() {
        let r = Signature::ring().restrict(&["zero", "add", "neg"]).unwrap();
        let names: Vec<&str> = r.symbols().map(|(_, s)| s.name.as_str()).collect();
        assert_eq!(names, vec!["add", "neg", "zero"]);
    }

    #[test]
    fn rename_to_group_names() {
        let r = Signature::ring().restrict(&["add", "neg", "zero"]).unwrap();
        let g = r
            .renamed(&[("add", "mul"), ("neg", "inv"), ("zero", "one")])
            .unwrap();
        assert!(g.is_group());
    }
}
