//! Minimal statevector simulation: permutation-unitary oracles over
//! equal-width registers, oracle/multiply-pair conversions, and toy
//! phase-estimation order finding.

pub mod oracle;
pub mod order;
pub mod state;

pub use oracle::{
    build_quantum_oracle, cnot_registers, conversion_round_trip, derive_multiply_pair,
    oracle_from_multiply_pair, pair_as_permutations, ConversionReport, DerivedOracle,
    MultiplyPair, OracleError, PermUnitary, RegisterMachine, StagedCircuit,
};
pub use order::{find_order_qpe, OrderSearchReport, OrderShot, MAX_ENCODING_WIDTH};
pub use state::{hadamard, inverse_qft, StateError, StateVec};
