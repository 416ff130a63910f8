//! Exhaustive distinguishability check over all 2^M fault patterns, and
//! decision-table rendering.

use std::collections::hash_map::Entry;
use std::fmt::Write as _;

use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{weight_vector, CoinMatrix, Criterion, FaultPattern, Signature, WeightVector};

pub const DEFAULT_MINT_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecisionRow {
    pub pattern: FaultPattern,
    pub weights: WeightVector,
    pub signature: Signature,
}

/// All 2^M patterns in ascending index order (`d_M` least significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    pub rows: Vec<DecisionRow>,
    pub criterion: Criterion,
    pub weighings: usize,
    pub mints: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityReport {
    pub valid: bool,
    /// The lexicographically first pair of distinct patterns that share a
    /// signature. Present iff `valid` is false.
    pub conflict: Option<(FaultPattern, FaultPattern)>,
}

/// Validity checks bounded by a mint cap.
#[derive(Debug, Clone, Copy)]
pub struct Verifier {
    pub mint_cap: usize,
}

impl Default for Verifier {
    fn default() -> Self {
        Self {
            mint_cap: DEFAULT_MINT_CAP,
        }
    }
}

impl Verifier {
    pub fn with_cap(mint_cap: usize) -> Self {
        Self { mint_cap }
    }

    fn check(&self, matrix: &CoinMatrix, criterion: Criterion) -> Result<()> {
        if matrix.mints() > self.mint_cap {
            return Err(Error::MintCap {
                mints: matrix.mints(),
                cap: self.mint_cap,
            });
        }
        if !criterion.supports(matrix.weighings()) {
            return Err(Error::NoRatios(matrix.weighings()));
        }
        Ok(())
    }

    pub fn decision_table(
        &self,
        matrix: &CoinMatrix,
        criterion: Criterion,
    ) -> Result<DecisionTable> {
        self.check(matrix, criterion)?;
        let m = matrix.mints();
        let rows = (0..1u64 << m)
            .map(|index| {
                let pattern = FaultPattern::new(index, m)?;
                let weights = weight_vector(matrix, pattern)?;
                let signature = criterion.signature(&weights)?;
                Ok(DecisionRow {
                    pattern,
                    weights,
                    signature,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DecisionTable {
            rows,
            criterion,
            weighings: matrix.weighings(),
            mints: m,
        })
    }

    pub fn is_valid(&self, matrix: &CoinMatrix, criterion: Criterion) -> Result<ValidityReport> {
        let table = self.decision_table(matrix, criterion)?;
        Ok(first_conflict(&table, |row| row.signature.clone()))
    }

    /// Every criterion the matrix satisfies, in [`Criterion::ALL`] order.
    /// Ratio is skipped for a single weighing.
    pub fn valid_under(&self, matrix: &CoinMatrix) -> Result<Vec<Criterion>> {
        let mut out = Vec::new();
        for c in Criterion::ALL {
            if c.supports(matrix.weighings()) && self.is_valid(matrix, c)?.valid {
                out.push(c);
            }
        }
        Ok(out)
    }
}

pub fn decision_table(matrix: &CoinMatrix, criterion: Criterion) -> Result<DecisionTable> {
    Verifier::default().decision_table(matrix, criterion)
}

pub fn is_valid(matrix: &CoinMatrix, criterion: Criterion) -> Result<ValidityReport> {
    Verifier::default().is_valid(matrix, criterion)
}

/// Finds the lexicographically smallest colliding pair of rows under an
/// arbitrary classification of rows.
pub fn first_conflict<K, F>(table: &DecisionTable, key: F) -> ValidityReport
where
    K: std::hash::Hash + Eq,
    F: Fn(&DecisionRow) -> K,
{
    // key -> (first index, second index if any)
    let mut seen: FxHashMap<K, (usize, Option<usize>)> = FxHashMap::default();
    let mut best: Option<(usize, usize)> = None;
    for (j, row) in table.rows.iter().enumerate() {
        match seen.entry(key(row)) {
            Entry::Vacant(v) => {
                v.insert((j, None));
            }
            Entry::Occupied(mut o) => {
                let (i, second) = o.get_mut();
                if second.is_none() {
                    *second = Some(j);
                    if best.is_none_or(|(bi, _)| *i < bi) {
                        best = Some((*i, j));
                    }
                }
            }
        }
    }
    ValidityReport {
        valid: best.is_none(),
        conflict: best.map(|(i, j)| (table.rows[i].pattern, table.rows[j].pattern)),
    }
}

impl DecisionTable {
    /// Aligned plain-text rendering: `d` columns, weight columns, then
    /// signature columns (`X` ratios, or `P` projective components).
    pub fn render_plain(&self) -> String {
        let mut header: Vec<String> = (1..=self.mints).map(|m| format!("d{m}")).collect();
        let d_cols = header.len();
        header.extend((1..=self.weighings).map(|w| format!("s{w}")));
        let sig_label = match self.criterion {
            Criterion::Ratio => "X",
            Criterion::Collinear => "P",
        };
        let sig_count = match self.criterion {
            Criterion::Ratio => self.weighings - 1,
            Criterion::Collinear => self.weighings,
        };
        header.extend((1..=sig_count).map(|i| format!("{sig_label}{i}")));

        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                let mut cells: Vec<String> = row.pattern.bits().iter().map(u8::to_string).collect();
                cells.extend(row.weights.components().iter().map(u64::to_string));
                match &row.signature {
                    Signature::Ratio(values) => cells.extend(values.iter().map(|v| v.to_string())),
                    Signature::Projective(v) => cells.extend(v.iter().map(u64::to_string)),
                }
                cells
            })
            .collect();

        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                cells
                    .iter()
                    .map(|r| r[c].len())
                    .chain(std::iter::once(header[c].len()))
                    .max()
                    .unwrap_or(1)
            })
            .collect();

        let fmt_line = |items: &[String]| {
            let mut line = String::new();
            for (c, item) in items.iter().enumerate() {
                if c == d_cols || c == d_cols + self.weighings {
                    line.push_str(" |");
                }
                if c > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{item:>width$}", width = widths[c]);
            }
            line.push('\n');
            line
        };

        let mut out = fmt_line(&header);
        let rule_len = out.len() - 1;
        out.push_str(&"-".repeat(rule_len));
        out.push('\n');
        for row in &cells {
            out.push_str(&fmt_line(row));
        }
        out
    }

    /// One JSON object per line, one line per pattern.
    pub fn render_structured(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            index: u64,
            pattern: Vec<u8>,
            weights: &'a WeightVector,
            criterion: Criterion,
            signature: &'a Signature,
        }
        let mut out = String::new();
        for row in &self.rows {
            let rec = Record {
                index: row.pattern.index(),
                pattern: row.pattern.bits(),
                weights: &row.weights,
                criterion: self.criterion,
                signature: &row.signature,
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

impl Serialize for FaultPattern {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        self.bits().serialize(serializer)
    }
}
