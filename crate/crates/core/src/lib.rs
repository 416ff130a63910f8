//! Exact solver and verifier for the mint problem with `W` weighings.
//!
//! Each of `M` mints either produces nominal coins or coins sharing one
//! unknown excess weight. A [`CoinMatrix`] says how many coins of each mint
//! go on the scale in each weighing; it is a solution when every one of the
//! `2^M` fault patterns produces a different [`Signature`]. The objective is
//! the number of coins drawn, `Σ_m max_w C_{w,m}`.
//!
//! - [`model`]: exact types and signatures.
//! - [`verifier`]: decision tables and validity reports.
//! - [`search`]: budget-ordered exhaustive search and a brute-force oracle.
//! - [`corpus`]: published matrices and the known value table.
//! - [`format`]: the matrix text format and result records.

pub mod corpus;
pub mod error;
pub mod format;
pub mod model;
pub mod search;
pub mod verifier;

pub use error::{Error, Result};
pub use model::{
    projective_signature, ratio_signature, weight_vector, CoinMatrix, Criterion, FaultPattern,
    RatioValue, Signature, Solution, Status, WeightVector,
};
pub use search::{
    enumerate_budgets, extend_search, extend_search_with, lower_bound, oracle_solve, solve_min,
    BudgetVector, ExtendOptions, SearchConfig, SearchOutcome,
};
pub use verifier::{decision_table, is_valid, DecisionTable, ValidityReport, Verifier};
