//! Matrix text files and machine-readable result records.
//!
//! A matrix file is a header line `W M` followed by `W` lines of `M`
//! whitespace-separated nonnegative integers. Blank lines and lines whose
//! first non-blank character is `#` are ignored.
//!
//! ```text
//! # plan: 3 weighings, 4 mints
//! 3 4
//! 1 1 0 0
//! 0 1 1 0
//! 0 0 1 2
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CoinMatrix, Criterion};
use crate::search::SearchOutcome;
use crate::verifier::Verifier;

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{tok}` is not a nonnegative integer"),
            })
        })
        .collect()
}

pub fn parse_matrix(text: &str) -> Result<CoinMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: text.lines().count().max(1),
        message: "missing `W M` header".into(),
    })?;
    let dims = parse_numbers(header, hline)?;
    let [w, m] = dims[..] else {
        return Err(Error::Parse {
            line: hline,
            message: format!("header needs exactly two numbers, found {}", dims.len()),
        });
    };
    if w == 0 || m == 0 {
        return Err(Error::Parse {
            line: hline,
            message: "weighings and mints must be positive".into(),
        });
    }
    let (w, m) = (w as usize, m as usize);

    let mut rows = Vec::with_capacity(w);
    for (lineno, line) in lines {
        if rows.len() == w {
            return Err(Error::Parse {
                line: lineno,
                message: format!("more than {w} matrix rows"),
            });
        }
        let row = parse_numbers(line, lineno)?;
        if row.len() != m {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {m} entries, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != w {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: format!("expected {w} matrix rows, found {}", rows.len()),
        });
    }
    CoinMatrix::new(rows).map_err(|e| Error::Parse {
        line: hline,
        message: e.to_string(),
    })
}

pub fn serialize_matrix(matrix: &CoinMatrix) -> String {
    format!("{} {}\n{matrix}", matrix.weighings(), matrix.mints())
}

/// Output record shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub weighings: usize,
    pub mints: usize,
    pub criterion: String,
    pub total: Option<u64>,
    /// `optimal`, `upper_bound`, `infeasible`, `valid` or `invalid`.
    pub status: String,
    pub matrix: Option<Vec<Vec<u64>>>,
    /// Two fault patterns with equal signatures, for invalid plans.
    pub conflict: Option<[Vec<u8>; 2]>,
    pub proven_lower_bound: Option<u64>,
    /// Criteria under which `matrix` is valid.
    pub valid_under: Option<Vec<String>>,
    pub elapsed_ms: u64,
}

impl ResultRecord {
    pub fn from_outcome(
        command: &str,
        weighings: usize,
        mints: usize,
        criterion: Criterion,
        outcome: &SearchOutcome,
    ) -> Self {
        let solution = outcome.solution.as_ref();
        Self {
            command: command.into(),
            weighings,
            mints,
            criterion: criterion.to_string(),
            total: solution.map(|s| s.total),
            status: outcome.status().to_string(),
            matrix: solution.map(|s| s.matrix.to_rows()),
            conflict: None,
            proven_lower_bound: Some(outcome.proven_lower_bound),
            valid_under: solution.map(|s| {
                Verifier::with_cap(usize::MAX)
                    .valid_under(&s.matrix)
                    .expect("solution fits the verifier")
                    .iter()
                    .map(ToString::to_string)
                    .collect()
            }),
            elapsed_ms: outcome.elapsed.as_millis() as u64,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    /// The record with its timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            elapsed_ms: 0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments() {
        let text = "# plan\n3 4\n1 1 0 0\n  # mid comment\n0 1 1 0\n\n0 0 1 2\n";
        let m = parse_matrix(text).unwrap();
        assert_eq!(
            m.to_rows(),
            vec![vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 1, 2]]
        );
        assert_eq!(serialize_matrix(&m), "3 4\n1 1 0 0\n0 1 1 0\n0 0 1 2\n");
    }

    #[test]
    fn reports_line_numbers() {
        let err = |t: &str| match parse_matrix(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(err("2 2\n1 0\n0 x\n"), 3);
        assert_eq!(err("2 2\n1 0 3\n0 1\n"), 2);
        assert_eq!(err("2\n1 0\n"), 1);
        assert_eq!(err("# only\n2 2\n1 0\n"), 3);
        assert_eq!(err("1 2\n1 0\n1 1\n"), 3);
        assert_eq!(err(""), 1);
        assert_eq!(err("0 2\n"), 1);
        assert_eq!(err("1 1\n-1\n"), 2);
    }

    #[test]
    fn record_json_shape() {
        let r = ResultRecord {
            command: "solve".into(),
            weighings: 3,
            mints: 4,
            criterion: "ratio".into(),
            total: Some(5),
            status: "optimal".into(),
            matrix: Some(vec![vec![1]]),
            conflict: None,
            proven_lower_bound: Some(5),
            valid_under: Some(vec!["ratio".into(), "collinear".into()]),
            elapsed_ms: 12,
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["status"], "optimal");
        assert_eq!(v["proven_lower_bound"], 5);
        let back: ResultRecord = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
