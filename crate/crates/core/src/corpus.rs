//! Published plans and the table of known minima.
//!
//! The plans live as matrix files under `fixtures/` and are embedded at
//! compile time, so the same files work as command-line inputs.

use crate::format::parse_matrix;
use crate::model::CoinMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownSolution {
    pub weighings: usize,
    pub mints: usize,
    pub matrix: CoinMatrix,
    pub claimed_total: u64,
    /// Fixture name, also the file stem under `fixtures/`.
    pub source_tag: &'static str,
}

macro_rules! fixture {
    ($name:literal, $total:expr) => {
        (
            $name,
            include_str!(concat!("../fixtures/", $name, ".txt")),
            $total,
        )
    };
}

const FIXTURES: &[(&str, &str, u64)] = &[
    fixture!("example_w3_m4", 5),
    fixture!("w2_m6_a", 28),
    fixture!("w2_m6_b", 28),
    fixture!("w3_m4", 5),
    fixture!("w3_m5", 7),
    fixture!("w3_m6", 11),
    fixture!("w3_m7", 16),
    fixture!("w3_m8", 24),
    fixture!("w4_m5", 5),
    fixture!("w4_m6", 7),
    fixture!("w4_m7", 10),
    fixture!("w4_m8", 12),
    fixture!("w5_m6", 6),
    fixture!("w5_m7", 7),
    fixture!("w5_m8", 9),
    fixture!("w5_m9", 12),
    fixture!("w5_m10", 14),
    fixture!("w6_m9", 9),
    fixture!("w7_m10", 10),
];

/// All 19 embedded plans, in a fixed order: the decision-table example, the
/// two 2×6 variants, then the optimal plans by (W, M).
pub fn published_solutions() -> Vec<KnownSolution> {
    FIXTURES
        .iter()
        .map(|&(tag, text, claimed_total)| {
            let matrix = parse_matrix(text).unwrap_or_else(|e| panic!("fixture {tag}: {e}"));
            KnownSolution {
                weighings: matrix.weighings(),
                mints: matrix.mints(),
                matrix,
                claimed_total,
                source_tag: tag,
            }
        })
        .collect()
}

pub fn find_solution(weighings: usize, mints: usize) -> Option<KnownSolution> {
    published_solutions()
        .into_iter()
        .find(|s| s.weighings == weighings && s.mints == mints && s.source_tag != "example_w3_m4")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnownKind {
    Exact(u64),
    UpperBound(u64),
    /// `lower_exclusive < C ≤ upper_inclusive`.
    Range {
        lower_exclusive: u64,
        upper_inclusive: u64,
    },
}

impl KnownKind {
    /// Whether a total achieved by some valid plan is consistent with this
    /// entry.
    pub fn admits_achieved(&self, total: u64) -> bool {
        match *self {
            Self::Exact(v) => total >= v,
            Self::UpperBound(_) => true,
            Self::Range {
                lower_exclusive, ..
            } => total > lower_exclusive,
        }
    }

    pub fn exact(&self) -> Option<u64> {
        match *self {
            Self::Exact(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KnownValue {
    pub weighings: usize,
    pub mints: usize,
    pub kind: KnownKind,
}

/// Rows W = 2..=7, columns M = 1..=10 as published; cells with W > M are
/// left out (see [`known_value`] for the diagonal rule).
pub fn known_values() -> Vec<KnownValue> {
    use KnownKind::*;
    let rows: [(usize, usize, &[KnownKind]); 6] = [
        (
            2,
            1,
            &[
                Exact(1),
                Exact(2),
                Exact(4),
                Exact(8),
                Exact(15),
                Exact(28),
                Exact(51),
                Exact(90),
            ],
        ),
        (
            3,
            3,
            &[
                Exact(3),
                Exact(5),
                Exact(7),
                Exact(11),
                Exact(16),
                Exact(24),
                UpperBound(37),
                UpperBound(59),
            ],
        ),
        (
            4,
            4,
            &[
                Exact(4),
                Exact(5),
                Exact(7),
                Exact(10),
                Exact(12),
                Range {
                    lower_exclusive: 15,
                    upper_inclusive: 18,
                },
                UpperBound(28),
            ],
        ),
        (
            5,
            5,
            &[Exact(5), Exact(6), Exact(7), Exact(9), Exact(12), Exact(14)],
        ),
        (6, 6, &[Exact(6), Exact(7), Exact(8), Exact(9)]),
        (7, 7, &[Exact(7), Exact(8), Exact(9), Exact(10)]),
    ];
    rows.iter()
        .flat_map(|&(w, first_m, kinds)| {
            kinds.iter().enumerate().map(move |(i, &kind)| KnownValue {
                weighings: w,
                mints: first_m + i,
                kind,
            })
        })
        .collect()
}

/// Table lookup with the diagonal rule `C(W, M) = M` for `W ≥ M`.
pub fn known_value(weighings: usize, mints: usize) -> Option<KnownKind> {
    if weighings >= mints {
        return Some(KnownKind::Exact(mints as u64));
    }
    known_values()
        .into_iter()
        .find(|v| v.weighings == weighings && v.mints == mints)
        .map(|v| v.kind)
}
