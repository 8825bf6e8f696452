//! Variety specifications with decidable free-algebra normal forms.

use std::fmt;

use thiserror::Error;

use super::finite::{is_prime, FiniteAlgebra};
use super::signature::Signature;
use super::term::{check_identity_with_budget, Term, TermError};

/// The equational classes this crate can decide equality in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VarietySpec {
    /// All Ω-algebras over the given signature (term algebra is free).
    AllAlgebras(Signature),
    /// All groups over the group signature.
    AllGroups,
    /// All abelian groups.
    AbelianGroups,
    /// Abelian groups satisfying z^e = 1.
    AbelianGroupsExp(u64),
    /// Elementary abelian p-groups (p prime).
    ElementaryAbelian(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Finite(u64),
    Infinite,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VarietyError {
    #[error("exponent must be >= 1, got {0}")]
    BadExponent(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unknown variety `{0}`")]
    Unknown(String),
}

impl VarietySpec {
    pub fn elementary_abelian(p: u64) -> Result<Self, VarietyError> {
        if !is_prime(p) {
            return Err(VarietyError::NotPrime(p));
        }
        Ok(VarietySpec::ElementaryAbelian(p))
    }

    pub fn abelian_groups_exp(e: u64) -> Result<Self, VarietyError> {
        if e == 0 {
            return Err(VarietyError::BadExponent(e));
        }
        Ok(VarietySpec::AbelianGroupsExp(e))
    }

    pub fn validate(&self) -> Result<(), VarietyError> {
        match self {
            VarietySpec::AbelianGroupsExp(e) if *e == 0 => Err(VarietyError::BadExponent(*e)),
            VarietySpec::ElementaryAbelian(p) if !is_prime(*p) => Err(VarietyError::NotPrime(*p)),
            _ => Ok(()),
        }
    }

    pub fn signature(&self) -> Signature {
        match self {
            VarietySpec::AllAlgebras(sig) => sig.clone(),
            _ => Signature::group(),
        }
    }

    pub fn is_group_kind(&self) -> bool {
        !matches!(self, VarietySpec::AllAlgebras(_))
    }

    /// Least e with z^e = 1 holding throughout, or `Infinite`.
    pub fn exponent(&self) -> Exponent {
        match self {
            VarietySpec::AllAlgebras(_) | VarietySpec::AllGroups | VarietySpec::AbelianGroups => {
                Exponent::Infinite
            }
            VarietySpec::AbelianGroupsExp(e) => Exponent::Finite(*e),
            VarietySpec::ElementaryAbelian(p) => Exponent::Finite(*p),
        }
    }

    /// Defining identities over the variety's signature. Empty for
    /// `AllAlgebras`.
    pub fn defining_identities(&self) -> Vec<(Term, Term)> {
        let mul = |a: Term, b: Term| Term::apply("mul", vec![a, b]);
        let inv = |a: Term| Term::apply("inv", vec![a]);
        let one = Term::apply("one", vec![]);
        let z1 = Term::var(1);
        let z2 = Term::var(2);
        let z3 = Term::var(3);
        let mut ids = Vec::new();
        if let VarietySpec::AllAlgebras(_) = self {
            return ids;
        }
        ids.push((
            mul(mul(z1.clone(), z2.clone()), z3.clone()),
            mul(z1.clone(), mul(z2.clone(), z3.clone())),
        ));
        ids.push((mul(one.clone(), z1.clone()), z1.clone()));
        ids.push((mul(z1.clone(), one.clone()), z1.clone()));
        ids.push((mul(inv(z1.clone()), z1.clone()), one.clone()));
        ids.push((mul(z1.clone(), inv(z1.clone())), one.clone()));
        if !matches!(self, VarietySpec::AllGroups) {
            ids.push((mul(z1.clone(), z2.clone()), mul(z2.clone(), z1.clone())));
        }
        if let Exponent::Finite(e) = self.exponent() {
            let mut pow = z1.clone();
            for _ in 1..e {
                pow = mul(pow, z1.clone());
            }
            ids.push((pow, one));
        }
        ids
    }
}

/// Exhaustively audit that `alg` satisfies every defining identity of `v`.
/// Intended for small carriers; the identity checker's budget applies.
pub fn algebra_in_variety(
    alg: &FiniteAlgebra,
    v: &VarietySpec,
    budget: u128,
) -> Result<bool, TermError> {
    for (lhs, rhs) in v.defining_identities() {
        if !check_identity_with_budget(&lhs, &rhs, alg, budget)? {
            return Ok(false);
        }
    }
    Ok(true)
}

impl fmt::Display for VarietySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarietySpec::AllAlgebras(sig) => write!(f, "all-algebras:{sig}"),
            VarietySpec::AllGroups => write!(f, "all-groups"),
            VarietySpec::AbelianGroups => write!(f, "abelian-groups"),
            VarietySpec::AbelianGroupsExp(e) => write!(f, "abelian-exp:{e}"),
            VarietySpec::ElementaryAbelian(p) => write!(f, "elementary-abelian:{p}"),
        }
    }
}

impl std::str::FromStr for VarietySpec {
    type Err = VarietyError;

    fn from_str(s: &str) -> Result<Self, VarietyError> {
        if s == "all-groups" {
            return Ok(VarietySpec::AllGroups);
        }
        if s == "abelian-groups" {
            return Ok(VarietySpec::AbelianGroups);
        }
        if let Some(e) = s.strip_prefix("abelian-exp:") {
            let e: u64 = e.parse().map_err(|_| VarietyError::Unknown(s.to_string()))?;
            return VarietySpec::abelian_groups_exp(e);
        }
        if let Some(p) = s.strip_prefix("elementary-abelian:") {
            let p: u64 = p.parse().map_err(|_| VarietyError::Unknown(s.to_string()))?;
            return VarietySpec::elementary_abelian(p);
        }
        Err(VarietyError::Unknown(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        assert_eq!(VarietySpec::AllGroups.exponent(), Exponent::Infinite);
        assert_eq!(VarietySpec::AbelianGroups.exponent(), Exponent::Infinite);
        assert_eq!(VarietySpec::AbelianGroupsExp(4).exponent(), Exponent::Finite(4));
        assert_eq!(VarietySpec::ElementaryAbelian(3).exponent(), Exponent::Finite(3));
        assert_eq!(
            VarietySpec::AllAlgebras(Signature::ring()).exponent(),
            Exponent::Infinite
        );
    }

    #[test]
    fn membership_audit() {
        let z6 = FiniteAlgebra::zn_add(6);
        assert!(algebra_in_variety(&z6, &VarietySpec::AbelianGroups, 1 << 20).unwrap());
        assert!(algebra_in_variety(&z6, &VarietySpec::AbelianGroupsExp(6), 1 << 20).unwrap());
        assert!(!algebra_in_variety(&z6, &VarietySpec::AbelianGroupsExp(4), 1 << 20).unwrap());
        let d4 = FiniteAlgebra::dihedral(4);
        assert!(algebra_in_variety(&d4, &VarietySpec::AllGroups, 1 << 20).unwrap());
        assert!(!algebra_in_variety(&d4, &VarietySpec::AbelianGroups, 1 << 20).unwrap());
        let v8 = FiniteAlgebra::elem_abelian(2, 3).unwrap();
        assert!(algebra_in_variety(&v8, &VarietySpec::ElementaryAbelian(2), 1 << 20).unwrap());
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["all-groups", "abelian-groups", "abelian-exp:4", "elementary-abelian:3"] {
            let v: VarietySpec = s.parse().unwrap();
            assert_eq!(v.to_string(), s);
        }
        assert!("elementary-abelian:4".parse::<VarietySpec>().is_err());
    }
}
