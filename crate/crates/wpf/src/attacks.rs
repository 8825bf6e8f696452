//! Relation-finding adversaries over black-box groups, parameterized by
//! pluggable order-finding and constructive-membership oracles.

use std::cell::RefCell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::algebra::OmegaAlgebra;
use crate::blackbox::{BlackBoxAlgebra, Bits, RelationPair};
use crate::qsim::{find_order_qpe, OracleError};
use crate::slp::{identity_program, input_program, power_program, search, Slp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("the black box does not expose a group signature")]
    NotAGroup,
    #[error(transparent)]
    Qsim(#[from] OracleError),
}

/// Order-finding oracle: any returned s satisfies g^s = identity (the
/// oracle verifies before answering). Failure is a legitimate outcome.
pub struct OrderOracle {
    kind: OrderKind,
    /// Cap on classical walk length (and the "budget exhausted" failure
    /// threshold).
    budget: u64,
}

enum OrderKind {
    Exact,
    Epsilon { success_prob: f64, rng: RefCell<ChaCha12Rng> },
    Qpe { counting_qubits: usize, shots: usize, seed: u64 },
}

impl OrderOracle {
    pub fn exact(budget: u64) -> OrderOracle {
        OrderOracle { kind: OrderKind::Exact, budget }
    }

    /// Wraps the exact oracle behind an independent Bernoulli coin: answers
    /// with probability `success_prob`, fails otherwise.
    pub fn epsilon(success_prob: f64, seed: u64, budget: u64) -> OrderOracle {
        assert!((0.0..=1.0).contains(&success_prob));
        OrderOracle {
            kind: OrderKind::Epsilon {
                success_prob,
                rng: RefCell::new(ChaCha12Rng::seed_from_u64(seed)),
            },
            budget,
        }
    }

    pub fn qpe(counting_qubits: usize, shots: usize, seed: u64, budget: u64) -> OrderOracle {
        OrderOracle { kind: OrderKind::Qpe { counting_qubits, shots, seed }, budget }
    }

    /// Find some s >= 1 with g^s = identity, or fail.
    pub fn find_order(&self, bb: &BlackBoxAlgebra, g: Bits) -> Result<Option<u64>, AttackError> {
        match &self.kind {
            OrderKind::Exact => self.exact_order(bb, g),
            OrderKind::Epsilon { success_prob, rng } => {
                let s = self.exact_order(bb, g)?;
                let coin: f64 = rng.borrow_mut().gen();
                Ok(if coin < *success_prob { s } else { None })
            }
            OrderKind::Qpe { counting_qubits, shots, seed } => {
                let report = find_order_qpe(bb, g, *counting_qubits, *shots, *seed)?;
                Ok(report.result)
            }
        }
    }

    /// Multiplicative walk g, g^2, ... until the identity; the returned
    /// value is the exact order.
    fn exact_order(&self, bb: &BlackBoxAlgebra, g: Bits) -> Result<Option<u64>, AttackError> {
        let identity = bb.query("one", &[]).map_err(|_| AttackError::NotAGroup)?;
        let mut cur = g;
        let mut s = 1u64;
        while cur != identity {
            if s >= self.budget {
                return Ok(None); // budget exhausted: failure, not an error
            }
            cur = bb.query("mul", &[cur, g]).map_err(|_| AttackError::NotAGroup)?;
            s += 1;
        }
        Ok(Some(s))
    }
}

/// Constructive-membership oracle: any returned program validates and
/// computes the target from the given tuple.
pub struct MembershipOracle {
    kind: MembershipKind,
    budget: usize,
}

enum MembershipKind {
    BfsExact,
    Epsilon { success_prob: f64, rng: RefCell<ChaCha12Rng> },
}

impl MembershipOracle {
    pub fn bfs_exact(budget: usize) -> MembershipOracle {
        MembershipOracle { kind: MembershipKind::BfsExact, budget }
    }

    pub fn epsilon(success_prob: f64, seed: u64, budget: usize) -> MembershipOracle {
        assert!((0.0..=1.0).contains(&success_prob));
        MembershipOracle {
            kind: MembershipKind::Epsilon {
                success_prob,
                rng: RefCell::new(ChaCha12Rng::seed_from_u64(seed)),
            },
            budget,
        }
    }

    /// A program computing `target` from `gens`, or failure (non-member,
    /// budget exhausted, or an unlucky coin).
    pub fn find_program(
        &self,
        bb: &BlackBoxAlgebra,
        gens: &[Bits],
        target: Bits,
    ) -> Option<Slp> {
        let found = match search::shortest_slp(bb, gens, &target, self.budget) {
            Ok(search::SearchOutcome::Found(slp)) => {
                debug_assert_eq!(slp.run(bb, gens).ok().as_ref(), Some(&target));
                Some(slp)
            }
            Ok(search::SearchOutcome::NotMember) => None,
            Err(search::SearchError::BudgetExhausted { .. }) => None,
        };
        match &self.kind {
            MembershipKind::BfsExact => found,
            MembershipKind::Epsilon { success_prob, rng } => {
                let coin: f64 = rng.borrow_mut().gen();
                if coin < *success_prob {
                    found
                } else {
                    None
                }
            }
        }
    }
}

/// What an attack produced, with its query accounting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackOutcome {
    pub relation: Option<RelationPair>,
    /// Oracle invocations (order or membership calls).
    pub oracle_calls: u64,
    /// Black-box queries spent during the attack, oracle-internal queries
    /// included.
    pub bb_queries: u64,
}

impl AttackOutcome {
    pub fn succeeded(&self) -> bool {
        self.relation.is_some()
    }
}

/// Order-based relation finder for varieties of infinite exponent: ask the
/// oracle for s with g^s = 1 and return the pair (a_1^s, 1), which is
/// free-nontrivial because no power law holds.
pub fn order_attack(
    bb: &BlackBoxAlgebra,
    g: Bits,
    oracle: &OrderOracle,
) -> Result<AttackOutcome, AttackError> {
    let before = bb.query_count();
    let relation = oracle.find_order(bb, g)?.map(|s| RelationPair {
        left: power_program(s),
        right: identity_program(),
    });
    Ok(AttackOutcome { relation, oracle_calls: 1, bb_queries: bb.query_count() - before })
}

/// Dependency-based relation finder: sweep i ascending and ask the
/// membership oracle whether g_i is computable from its predecessors; the
/// first hit yields the pair (u, input i). A single pass, no retries.
pub fn dependency_attack(
    bb: &BlackBoxAlgebra,
    g: &[Bits],
    oracle: &MembershipOracle,
) -> Result<AttackOutcome, AttackError> {
    let before = bb.query_count();
    let mut oracle_calls = 0u64;
    let mut relation = None;
    for i in 1..=g.len() {
        oracle_calls += 1;
        if let Some(u) = oracle.find_program(bb, &g[..i - 1], g[i - 1]) {
            relation = Some(RelationPair { left: u, right: input_program(i) });
            break;
        }
    }
    Ok(AttackOutcome {
        relation,
        oracle_calls,
        bb_queries: bb.query_count() - before,
    })
}

/// Ground-truth helper (not black-box): the smallest j with g_j in the
/// subalgebra generated by its predecessors, via incremental closure.
pub fn first_dependent_index<A: OmegaAlgebra>(alg: &A, g: &[A::Elem]) -> Option<usize> {
    let mut member = vec![false; alg.label_space()];
    let mut known: Vec<A::Elem> = Vec::new();
    // close over the nullary constants first
    close(alg, &mut member, &mut known, 0);
    for (j, elem) in g.iter().enumerate() {
        if member[alg.label(elem)] {
            return Some(j + 1);
        }
        let start = known.len();
        member[alg.label(elem)] = true;
        known.push(elem.clone());
        close(alg, &mut member, &mut known, start);
    }
    None
}

/// Extend `known` to closure under all operations, treating entries from
/// `fresh_start` on as the new frontier.
fn close<A: OmegaAlgebra>(
    alg: &A,
    member: &mut [bool],
    known: &mut Vec<A::Elem>,
    fresh_start: usize,
) {
    let sig = alg.signature().clone();
    if fresh_start == 0 && known.is_empty() {
        for (id, sym) in sig.symbols() {
            if sym.arity == 0 {
                if let Ok(v) = alg.apply_id(id, &[]) {
                    if !member[alg.label(&v)] {
                        member[alg.label(&v)] = true;
                        known.push(v);
                    }
                }
            }
        }
    }
    let mut frontier_start = fresh_start;
    while frontier_start < known.len() {
        let snapshot = known.len();
        for (id, sym) in sig.symbols() {
            if sym.arity == 0 {
                continue;
            }
            let mut idxs = vec![0usize; sym.arity];
            let mut args: Vec<A::Elem> = Vec::with_capacity(sym.arity);
            loop {
                if idxs.iter().any(|&i| i >= frontier_start) {
                    args.clear();
                    args.extend(idxs.iter().map(|&i| known[i].clone()));
                    if let Ok(v) = alg.apply_id(id, &args) {
                        if !member[alg.label(&v)] {
                            member[alg.label(&v)] = true;
                            known.push(v);
                        }
                    }
                }
                let mut pos = sym.arity;
                let mut done = false;
                loop {
                    if pos == 0 {
                        done = true;
                        break;
                    }
                    pos -= 1;
                    idxs[pos] += 1;
                    if idxs[pos] < snapshot {
                        break;
                    }
                    idxs[pos] = 0;
                }
                if done {
                    break;
                }
            }
        }
        frontier_start = snapshot;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FiniteAlgebra, VarietySpec};
    use crate::blackbox::{is_nontrivial_relation, Strictness};

    fn bb_units_15(seed: u64) -> (FiniteAlgebra, BlackBoxAlgebra) {
        let u15 = FiniteAlgebra::zn_units(15).unwrap();
        let bb = BlackBoxAlgebra::wrap(&u15, 4, seed, Strictness::Strict).unwrap();
        (u15, bb)
    }

    #[test]
    fn order_attack_on_units_mod_15() {
        let (u15, bb) = bb_units_15(42);
        let g = bb.encode(u15.index_of("2").unwrap());
        let oracle = OrderOracle::exact(1 << 16);
        let out = order_attack(&bb, g, &oracle).unwrap();
        let pair = out.relation.expect("exact oracle always succeeds");
        // brute force: ord(2) mod 15 is 4
        assert_eq!(pair.left, power_program(4));
        assert!(is_nontrivial_relation(&VarietySpec::AbelianGroups, 1, &bb, &[g], &pair)
            .unwrap());
        assert!(out.bb_queries > 0);
    }

    #[test]
    fn order_attack_on_identity() {
        let (u15, bb) = bb_units_15(43);
        let g = bb.encode(u15.index_of("1").unwrap());
        let out = order_attack(&bb, g, &OrderOracle::exact(1 << 16)).unwrap();
        let pair = out.relation.unwrap();
        assert_eq!(pair.left, power_program(1));
        // a_1 is not the identity of the free abelian group, so the pair
        // verifies
        assert!(is_nontrivial_relation(&VarietySpec::AbelianGroups, 1, &bb, &[g], &pair)
            .unwrap());
    }

    #[test]
    fn order_attack_budget_means_failure() {
        let (u15, bb) = bb_units_15(44);
        let g = bb.encode(u15.index_of("2").unwrap());
        let out = order_attack(&bb, g, &OrderOracle::exact(2)).unwrap();
        assert!(out.relation.is_none());
    }

    #[test]
    fn epsilon_oracle_hits_close_to_rate() {
        let (u15, bb) = bb_units_15(45);
        let g = bb.encode(u15.index_of("2").unwrap());
        let oracle = OrderOracle::epsilon(0.5, 7, 1 << 16);
        let mut hits = 0;
        let trials = 1000;
        for _ in 0..trials {
            let out = order_attack(&bb, g, &oracle).unwrap();
            if let Some(pair) = out.relation {
                hits += 1;
                assert!(is_nontrivial_relation(
                    &VarietySpec::AbelianGroups,
                    1,
                    &bb,
                    &[g],
                    &pair
                )
                .unwrap());
            }
        }
        let rate = hits as f64 / trials as f64;
        assert!((0.45..=0.55).contains(&rate), "rate {rate}");
    }

    #[test]
    fn dependency_attack_succeeds_past_log_size() {
        // Z_2^3, m = 4 > log2 8 = 3: pigeonhole forces a dependency
        let v8 = FiniteAlgebra::elem_abelian(2, 3).unwrap();
        let bb = BlackBoxAlgebra::wrap(&v8, 4, 5, Strictness::Strict).unwrap();
        let g: Vec<Bits> = [1usize, 2, 4, 7].iter().map(|&i| bb.encode(i)).collect();
        let oracle = MembershipOracle::bfs_exact(1 << 16);
        let out = dependency_attack(&bb, &g, &oracle).unwrap();
        let pair = out.relation.expect("m > log2 |G| guarantees success");
        let v = VarietySpec::elementary_abelian(2).unwrap();
        assert!(is_nontrivial_relation(&v, 4, &bb, &g, &pair).unwrap());
        // stop index matches the ground truth
        let j = first_dependent_index(&bb, &g).unwrap();
        match &pair.right.instrs()[0] {
            crate::slp::Instr::Input(i) => assert_eq!(*i, j),
            other => panic!("right side should be an input, got {other:?}"),
        }
    }

    #[test]
    fn dependency_attack_fails_on_independent_basis() {
        let v4 = FiniteAlgebra::elem_abelian(2, 2).unwrap();
        let bb = BlackBoxAlgebra::wrap(&v4, 3, 6, Strictness::Strict).unwrap();
        // names are "0,0","0,1","1,0","1,1": indices 1 and 2 are e2, e1
        let g = vec![bb.encode(1), bb.encode(2)];
        let out = dependency_attack(&bb, &g, &MembershipOracle::bfs_exact(1 << 16)).unwrap();
        assert!(out.relation.is_none());
        assert_eq!(first_dependent_index(&bb, &g), None);
    }

    #[test]
    fn dependency_attack_identity_first() {
        let v4 = FiniteAlgebra::elem_abelian(2, 2).unwrap();
        let bb = BlackBoxAlgebra::wrap(&v4, 3, 8, Strictness::Strict).unwrap();
        let g = vec![bb.encode(0), bb.encode(1)]; // identity first
        let out = dependency_attack(&bb, &g, &MembershipOracle::bfs_exact(1 << 16)).unwrap();
        let pair = out.relation.unwrap();
        assert_eq!(pair.left, identity_program());
        assert_eq!(pair.right, input_program(1));
    }

    #[test]
    fn first_dependent_index_examples() {
        let v4 = FiniteAlgebra::elem_abelian(2, 2).unwrap();
        // e1, e2, e1+e2: dependency appears exactly at j = 3 (span check)
        let e1 = v4.index_of("1,0").unwrap();
        let e2 = v4.index_of("0,1").unwrap();
        let e12 = v4.index_of("1,1").unwrap();
        assert_eq!(first_dependent_index(&v4, &[e1, e2, e12]), Some(3));
        assert_eq!(first_dependent_index(&v4, &[e1, e2]), None);
        assert_eq!(first_dependent_index(&v4, &[e1, e1]), Some(2));
    }

    #[test]
    fn qpe_backed_oracle_verifies() {
        let (u15, bb) = bb_units_15(46);
        let g = bb.encode(u15.index_of("2").unwrap());
        let oracle = OrderOracle::qpe(8, 16, 3, 1 << 16);
        let out = order_attack(&bb, g, &oracle).unwrap();
        let pair = out.relation.expect("qpe with 16 shots finds ord(2) = 4");
        assert!(is_nontrivial_relation(&VarietySpec::AbelianGroups, 1, &bb, &[g], &pair)
            .unwrap());
    }
}
