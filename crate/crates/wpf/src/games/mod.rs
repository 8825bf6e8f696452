//! Indexed families of algebras, game configuration, the average-case and
//! worst-case weak-pseudo-freeness games, and the expanded-group demo
//! pipeline.

pub mod demo;
pub mod report;
pub mod run;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::algebra::{AlgebraError, FiniteAlgebra, VarietySpec};
use crate::attacks::AttackError;
use crate::blackbox::{BlackBoxError, RelationError};

pub use demo::{run_reduct_demo, DemoOracle};
pub use report::{wilson_interval, QueryStats, TrialReport};
pub use run::{estimate_negligibility_curve, run_average_game, run_worstcase_game};

#[derive(Debug, Error)]
pub enum GameError {
    #[error("unknown family spec `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` has no index `{index}`")]
    UnknownIndex { family: String, index: String },
    #[error("family `{0}` has no group variety supported by the relation verifier")]
    UnsupportedVariety(String),
    #[error("family `{0}` contains a trivial algebra; encoded nontrivial relations cannot exist")]
    TrivialFamily(String),
    #[error("`{0}` does not name a group structure in this family")]
    UnknownGamma(String),
    #[error("bad polynomial `{0}`")]
    BadPolynomial(String),
    #[error("tuple length pi(k) must be >= 1")]
    EmptyTuple,
    #[error("unknown adversary spec `{0}`")]
    UnknownAdversary(String),
    #[error("the qpe oracle only backs order finding")]
    QpeIsOrderOnly,
    #[error("qpe oracle needs encoding width <= {max}, family uses {got}")]
    QpeWidth { max: usize, got: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    BlackBox(#[from] BlackBoxError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error(transparent)]
    Relation(#[from] RelationError),
}

/// Monomial-plus-constant polynomials `coeff * k^degree + offset`, enough
/// for tuple-length schedules like `1`, `k+1`, or `2k^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Polynomial {
    pub coeff: u64,
    pub degree: u32,
    pub offset: u64,
}

impl Polynomial {
    pub fn constant(c: u64) -> Polynomial {
        Polynomial { coeff: 0, degree: 0, offset: c }
    }

    pub fn eval(&self, k: u64) -> u64 {
        self.coeff
            .saturating_mul(k.saturating_pow(self.degree))
            .saturating_add(self.offset)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff == 0 {
            return write!(f, "{}", self.offset);
        }
        if self.coeff != 1 {
            write!(f, "{}", self.coeff)?;
        }
        write!(f, "k")?;
        if self.degree != 1 {
            write!(f, "^{}", self.degree)?;
        }
        if self.offset != 0 {
            write!(f, "+{}", self.offset)?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        let bad = || GameError::BadPolynomial(s.to_string());
        let t = s.trim().replace(' ', "");
        let (term, offset) = match t.split_once('+') {
            Some((a, b)) => (a.to_string(), b.parse::<u64>().map_err(|_| bad())?),
            None => (t.clone(), 0),
        };
        if let Ok(c) = term.parse::<u64>() {
            if offset != 0 {
                return Err(bad());
            }
            return Ok(Polynomial::constant(c));
        }
        let (coeff_s, rest) = term.split_once('k').ok_or_else(bad)?;
        let coeff = if coeff_s.is_empty() { 1 } else { coeff_s.parse().map_err(|_| bad())? };
        let degree = if rest.is_empty() {
            1
        } else {
            rest.strip_prefix('^').ok_or_else(bad)?.parse().map_err(|_| bad())?
        };
        Ok(Polynomial { coeff, degree, offset })
    }
}

/// A named, enumerable family of finite algebras with per-index encoding
/// widths and uniform index/element distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySpec {
    spec: String,
    kind: FamilyKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum FamilyKind {
    ZnAdd { ns: Vec<u64> },
    ZnStar { ns: Vec<u64> },
    ElemAbelianVec { p: u64, dims: Vec<u32> },
    RingZn { ns: Vec<u64> },
    DirectPower { exponent: u32, base: Box<FamilySpec> },
}

fn parse_u64_list(s: &str) -> Option<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.parse().ok()?;
        let b: u64 = b.parse().ok()?;
        if a > b {
            return None;
        }
        return Some((a..=b).collect());
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        out.push(part.trim().parse().ok()?);
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

impl FamilySpec {
    /// Parse specs like `zn-star:15,21,33` / `ring-zn:6..30` /
    /// `elem-abelian-vec:2,3` / `elem-abelian-vec:2,2..4` /
    /// `direct-power:3:zn-add:2`.
    pub fn parse(spec: &str) -> Result<FamilySpec, GameError> {
        let bad = || GameError::UnknownFamily(spec.to_string());
        let kind = if let Some(rest) = spec.strip_prefix("zn-add:") {
            FamilyKind::ZnAdd { ns: parse_u64_list(rest).ok_or_else(bad)? }
        } else if let Some(rest) = spec.strip_prefix("zn-star:") {
            let ns = parse_u64_list(rest).ok_or_else(bad)?;
            if ns.iter().any(|&n| n < 2) {
                return Err(bad());
            }
            FamilyKind::ZnStar { ns }
        } else if let Some(rest) = spec.strip_prefix("elem-abelian-vec:") {
            let (p, dims) = rest.split_once(',').ok_or_else(bad)?;
            let p: u64 = p.parse().map_err(|_| bad())?;
            let dims: Vec<u32> = parse_u64_list(dims)
                .ok_or_else(bad)?
                .into_iter()
                .map(|d| d as u32)
                .collect();
            VarietySpec::elementary_abelian(p).map_err(|_| bad())?;
            FamilyKind::ElemAbelianVec { p, dims }
        } else if let Some(rest) = spec.strip_prefix("ring-zn:") {
            FamilyKind::RingZn { ns: parse_u64_list(rest).ok_or_else(bad)? }
        } else if let Some(rest) = spec.strip_prefix("direct-power:") {
            let (e, base) = rest.split_once(':').ok_or_else(bad)?;
            let exponent: u32 = e.parse().map_err(|_| bad())?;
            if exponent == 0 {
                return Err(bad());
            }
            FamilyKind::DirectPower { exponent, base: Box::new(FamilySpec::parse(base)?) }
        } else {
            return Err(bad());
        };
        Ok(FamilySpec { spec: spec.to_string(), kind })
    }

    pub fn name(&self) -> &str {
        &self.spec
    }

    /// The index set D, as strings.
    pub fn indices(&self) -> Vec<String> {
        match &self.kind {
            FamilyKind::ZnAdd { ns } | FamilyKind::ZnStar { ns } | FamilyKind::RingZn { ns } => {
                ns.iter().map(u64::to_string).collect()
            }
            FamilyKind::ElemAbelianVec { dims, .. } => dims.iter().map(u32::to_string).collect(),
            FamilyKind::DirectPower { base, .. } => base.indices(),
        }
    }

    /// The level set D_k. At desk scale every level carries the whole
    /// index set; theta(k) is the constant bound below.
    pub fn level_indices(&self, _k: u64) -> Vec<String> {
        self.indices()
    }

    /// Length bound on indices in D_k (constant in k here).
    pub fn theta(&self, _k: u64) -> usize {
        self.indices().iter().map(String::len).max().unwrap_or(1)
    }

    /// Polynomial bound on encoding widths in terms of index length.
    pub fn eta(&self, index_len: usize) -> usize {
        8 * index_len + 8
    }

    pub fn algebra_at(&self, d: &str) -> Result<FiniteAlgebra, GameError> {
        let unknown = || GameError::UnknownIndex {
            family: self.spec.clone(),
            index: d.to_string(),
        };
        if !self.indices().iter().any(|i| i == d) {
            return Err(unknown());
        }
        match &self.kind {
            FamilyKind::ZnAdd { .. } => Ok(FiniteAlgebra::zn_add(d.parse().map_err(|_| unknown())?)),
            FamilyKind::ZnStar { .. } => {
                Ok(FiniteAlgebra::zn_units(d.parse().map_err(|_| unknown())?)?)
            }
            FamilyKind::ElemAbelianVec { p, .. } => {
                Ok(FiniteAlgebra::elem_abelian(*p, d.parse().map_err(|_| unknown())?)?)
            }
            FamilyKind::RingZn { .. } => Ok(FiniteAlgebra::ring_zn(d.parse().map_err(|_| unknown())?)),
            FamilyKind::DirectPower { exponent, base } => {
                Ok(FiniteAlgebra::direct_power(&base.algebra_at(d)?, *exponent)?)
            }
        }
    }

    /// Encoding width xi(d): one spare bit beyond the minimum, so carriers
    /// never fill the whole label space.
    pub fn encoding_width(&self, d: &str) -> Result<usize, GameError> {
        let len = self.algebra_at(d)?.carrier_len();
        Ok(width_for(len))
    }

    /// The variety the relation verifier runs in for this family's
    /// algebras, when they are groups as given.
    pub fn variety(&self) -> Result<VarietySpec, GameError> {
        match &self.kind {
            FamilyKind::ZnAdd { .. } | FamilyKind::ZnStar { .. } => Ok(VarietySpec::AbelianGroups),
            FamilyKind::ElemAbelianVec { p, .. } => Ok(VarietySpec::ElementaryAbelian(*p)),
            FamilyKind::RingZn { .. } => Err(GameError::UnsupportedVariety(self.spec.clone())),
            FamilyKind::DirectPower { base, .. } => base.variety(),
        }
    }

    /// Group structure selected by `gamma`: the symbols to keep, the
    /// renaming onto the canonical group signature, and the variety the
    /// reduct verifier runs in.
    #[allow(clippy::type_complexity)]
    pub fn group_structure(
        &self,
        gamma: &str,
    ) -> Result<(Vec<&'static str>, Vec<(&'static str, &'static str)>, VarietySpec), GameError>
    {
        match (&self.kind, gamma) {
            (FamilyKind::RingZn { .. }, "additive") => Ok((
                vec!["add", "neg", "zero"],
                vec![("add", "mul"), ("neg", "inv"), ("zero", "one")],
                VarietySpec::AbelianGroups,
            )),
            (_, "group" | "full") => {
                let v = self.variety()?;
                Ok((vec!["mul", "inv", "one"], vec![], v))
            }
            _ => Err(GameError::UnknownGamma(gamma.to_string())),
        }
    }
}

/// Smallest width with one spare bit: 2^(width-1) >= len.
pub fn width_for(len: usize) -> usize {
    let needed = usize::BITS - len.saturating_sub(1).leading_zeros();
    needed as usize + 1
}

/// Adversary configuration, parsed from a stable string form (echoed into
/// reports).
#[derive(Debug, Clone, PartialEq)]
pub enum AdversarySpec {
    OrderAttack(OrderOracleSpec),
    DependencyAttack(MembershipOracleSpec),
    AlwaysFail,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderOracleSpec {
    Exact,
    Epsilon(f64),
    Qpe { counting_qubits: u32, shots: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MembershipOracleSpec {
    BfsExact,
    Epsilon(f64),
}

impl AdversarySpec {
    /// True when repeated runs on one instance cannot differ.
    pub fn is_deterministic(&self) -> bool {
        match self {
            AdversarySpec::OrderAttack(OrderOracleSpec::Exact) => true,
            AdversarySpec::OrderAttack(OrderOracleSpec::Qpe { .. }) => false,
            AdversarySpec::OrderAttack(OrderOracleSpec::Epsilon(_)) => false,
            AdversarySpec::DependencyAttack(MembershipOracleSpec::BfsExact) => true,
            AdversarySpec::DependencyAttack(MembershipOracleSpec::Epsilon(_)) => false,
            AdversarySpec::AlwaysFail => true,
        }
    }
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdversarySpec::OrderAttack(OrderOracleSpec::Exact) => write!(f, "attack-inf:exact"),
            AdversarySpec::OrderAttack(OrderOracleSpec::Epsilon(p)) => {
                write!(f, "attack-inf:epsilon={p}")
            }
            AdversarySpec::OrderAttack(OrderOracleSpec::Qpe { counting_qubits, shots }) => {
                write!(f, "attack-inf:qpe:qubits={counting_qubits},shots={shots}")
            }
            AdversarySpec::DependencyAttack(MembershipOracleSpec::BfsExact) => {
                write!(f, "attack-fin:bfs")
            }
            AdversarySpec::DependencyAttack(MembershipOracleSpec::Epsilon(p)) => {
                write!(f, "attack-fin:epsilon={p}")
            }
            AdversarySpec::AlwaysFail => write!(f, "fail"),
        }
    }
}

impl FromStr for AdversarySpec {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        let bad = || GameError::UnknownAdversary(s.to_string());
        if s == "fail" {
            return Ok(AdversarySpec::AlwaysFail);
        }
        if let Some(rest) = s.strip_prefix("attack-inf:") {
            if rest == "exact" {
                return Ok(AdversarySpec::OrderAttack(OrderOracleSpec::Exact));
            }
            if let Some(p) = rest.strip_prefix("epsilon=") {
                let p: f64 = p.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad());
                }
                return Ok(AdversarySpec::OrderAttack(OrderOracleSpec::Epsilon(p)));
            }
            if let Some(args) = rest.strip_prefix("qpe:") {
                let mut qubits = None;
                let mut shots = None;
                for part in args.split(',') {
                    if let Some(q) = part.strip_prefix("qubits=") {
                        qubits = q.parse().ok();
                    } else if let Some(sh) = part.strip_prefix("shots=") {
                        shots = sh.parse().ok();
                    } else {
                        return Err(bad());
                    }
                }
                return Ok(AdversarySpec::OrderAttack(OrderOracleSpec::Qpe {
                    counting_qubits: qubits.ok_or_else(bad)?,
                    shots: shots.ok_or_else(bad)?,
                }));
            }
            return Err(bad());
        }
        if let Some(rest) = s.strip_prefix("attack-fin:") {
            if rest == "bfs" {
                return Ok(AdversarySpec::DependencyAttack(MembershipOracleSpec::BfsExact));
            }
            if let Some(p) = rest.strip_prefix("epsilon=") {
                let p: f64 = p.parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad());
                }
                return Ok(AdversarySpec::DependencyAttack(MembershipOracleSpec::Epsilon(p)));
            }
            return Err(bad());
        }
        Err(bad())
    }
}

/// Everything a game run needs besides the family.
#[derive(Debug, Clone)]
pub struct GameConfig {
    pub k: u64,
    /// Tuple length schedule pi(k).
    pub pi: Polynomial,
    /// Auxiliary random-tuple length tau(k).
    pub tau: Polynomial,
    pub trials: u32,
    pub master_seed: u64,
    pub adversary: AdversarySpec,
}

impl GameConfig {
    pub fn new(k: u64, pi: Polynomial, adversary: AdversarySpec) -> GameConfig {
        GameConfig {
            k,
            pi,
            tau: Polynomial::constant(0),
            trials: 1,
            master_seed: 0,
            adversary,
        }
    }

    pub fn with_tau(mut self, tau: Polynomial) -> GameConfig {
        self.tau = tau;
        self
    }

    pub fn with_trials(mut self, trials: u32) -> GameConfig {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> GameConfig {
        self.master_seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_parse_eval_display() {
        let cases = [
            ("1", 5, 1),
            ("k", 5, 5),
            ("k+1", 5, 6),
            ("2k", 5, 10),
            ("k^2", 5, 25),
            ("3k^2+4", 2, 16),
        ];
        for (s, k, want) in cases {
            let p: Polynomial = s.parse().unwrap();
            assert_eq!(p.eval(k), want, "{s}");
            let back: Polynomial = p.to_string().parse().unwrap();
            assert_eq!(back, p);
        }
        assert!("k*2".parse::<Polynomial>().is_err());
        assert!("2+3".parse::<Polynomial>().is_err());
    }

    #[test]
    fn family_parsing_and_indices() {
        let f = FamilySpec::parse("zn-star:15,21,33,35").unwrap();
        assert_eq!(f.indices(), vec!["15", "21", "33", "35"]);
        let alg = f.algebra_at("15").unwrap();
        assert_eq!(alg.carrier_len(), 8);

        let r = FamilySpec::parse("ring-zn:6..9").unwrap();
        assert_eq!(r.indices(), vec!["6", "7", "8", "9"]);

        let e = FamilySpec::parse("elem-abelian-vec:2,2..4").unwrap();
        assert_eq!(e.indices(), vec!["2", "3", "4"]);
        assert_eq!(e.algebra_at("3").unwrap().carrier_len(), 8);

        let dp = FamilySpec::parse("direct-power:2:zn-add:3").unwrap();
        assert_eq!(dp.algebra_at("3").unwrap().carrier_len(), 9);

        assert!(FamilySpec::parse("nope:1").is_err());
        assert!(FamilySpec::parse("elem-abelian-vec:4,2").is_err()); // 4 not prime
        assert!(f.algebra_at("16").is_err());
    }

    #[test]
    fn index_length_and_width_bounds_hold() {
        for spec in ["zn-star:15,21,33,35,77,91", "ring-zn:6..30", "elem-abelian-vec:2,2..4"] {
            let f = FamilySpec::parse(spec).unwrap();
            let theta = f.theta(1);
            for d in f.level_indices(1) {
                assert!(d.len() <= theta);
                let xi = f.encoding_width(&d).unwrap();
                assert!(xi <= f.eta(d.len()), "{spec} {d}");
                let alg = f.algebra_at(&d).unwrap();
                assert!(1usize << xi >= alg.carrier_len());
            }
        }
    }

    #[test]
    fn adversary_spec_round_trip() {
        for s in [
            "attack-inf:exact",
            "attack-inf:epsilon=0.5",
            "attack-inf:qpe:qubits=8,shots=4",
            "attack-fin:bfs",
            "attack-fin:epsilon=0.25",
            "fail",
        ] {
            let a: AdversarySpec = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        assert!("attack-inf:lucky".parse::<AdversarySpec>().is_err());
    }

    #[test]
    fn width_for_examples() {
        assert_eq!(width_for(1), 1);
        assert_eq!(width_for(2), 2);
        assert_eq!(width_for(6), 4);
        assert_eq!(width_for(8), 4);
        assert_eq!(width_for(9), 5);
    }
}
