//! Exact domain types: coin matrices, fault patterns, weight vectors and
//! the two signature families used to tell fault patterns apart.
//!
//! Nothing in here touches floating point. Entries are `u64` and every sum
//! is computed with checked arithmetic.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A W×M plan: entry `(w, m)` is the number of coins of mint `m` placed on
/// the tray for weighing `w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoinMatrix {
    weighings: usize,
    mints: usize,
    // row-major
    entries: Vec<u64>,
}

impl CoinMatrix {
    /// Builds a matrix from rows. Rows must be non-empty and rectangular, and
    /// every row sum must fit in a `u64`.
    pub fn new(rows: Vec<Vec<u64>>) -> Result<Self> {
        let weighings = rows.len();
        let mints = rows.first().map_or(0, Vec::len);
        if weighings == 0 || mints == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut entries = Vec::with_capacity(weighings * mints);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != mints {
                return Err(Error::RaggedRows {
                    row,
                    expected: mints,
                    found: r.len(),
                });
            }
            entries.extend(r);
        }
        Self::from_row_major(weighings, mints, entries)
    }

    pub fn from_row_major(weighings: usize, mints: usize, entries: Vec<u64>) -> Result<Self> {
        if weighings == 0 || mints == 0 {
            return Err(Error::EmptyMatrix);
        }
        let expected = weighings
            .checked_mul(mints)
            .ok_or(Error::Overflow("matrix size"))?;
        if entries.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: entries.len(),
            });
        }
        let matrix = Self {
            weighings,
            mints,
            entries,
        };
        for w in 0..weighings {
            matrix
                .row(w)
                .iter()
                .try_fold(0u64, |acc, &x| acc.checked_add(x))
                .ok_or(Error::Overflow("row sum"))?;
        }
        matrix.checked_total()?;
        Ok(matrix)
    }

    /// The W×W identity-like plan `δ_{w,m}` with one coin per mint.
    pub fn diagonal(size: usize) -> Result<Self> {
        let mut entries = vec![0; size * size];
        for i in 0..size {
            entries[i * size + i] = 1;
        }
        Self::from_row_major(size, size, entries)
    }

    /// The all-zero plan.
    pub fn zeros(weighings: usize, mints: usize) -> Result<Self> {
        Self::from_row_major(weighings, mints, vec![0; weighings * mints])
    }

    /// Builds a matrix from its columns (each of length W).
    pub fn from_columns(weighings: usize, columns: &[Vec<u64>]) -> Result<Self> {
        let mints = columns.len();
        let mut entries = vec![0; weighings * mints];
        for (m, col) in columns.iter().enumerate() {
            if col.len() != weighings {
                return Err(Error::DimensionMismatch {
                    expected: weighings,
                    found: col.len(),
                });
            }
            for (w, &x) in col.iter().enumerate() {
                entries[w * mints + m] = x;
            }
        }
        Self::from_row_major(weighings, mints, entries)
    }

    pub fn weighings(&self) -> usize {
        self.weighings
    }

    pub fn mints(&self) -> usize {
        self.mints
    }

    pub fn get(&self, weighing: usize, mint: usize) -> u64 {
        self.entries[weighing * self.mints + mint]
    }

    pub fn row(&self, weighing: usize) -> &[u64] {
        &self.entries[weighing * self.mints..(weighing + 1) * self.mints]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.entries.chunks(self.mints)
    }

    pub fn column(&self, mint: usize) -> Vec<u64> {
        (0..self.weighings).map(|w| self.get(w, mint)).collect()
    }

    pub fn row_major(&self) -> &[u64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.rows().map(<[u64]>::to_vec).collect()
    }

    /// `C_m`, the largest entry of column `m`.
    pub fn column_max(&self, mint: usize) -> u64 {
        (0..self.weighings)
            .map(|w| self.get(w, mint))
            .max()
            .unwrap_or(0)
    }

    pub fn column_maxima(&self) -> Vec<u64> {
        (0..self.mints).map(|m| self.column_max(m)).collect()
    }

    pub fn has_zero_column(&self) -> bool {
        (0..self.mints).any(|m| self.column_max(m) == 0)
    }

    fn checked_total(&self) -> Result<u64> {
        (0..self.mints)
            .try_fold(0u64, |acc, m| acc.checked_add(self.column_max(m)))
            .ok_or(Error::Overflow("total coins"))
    }

    /// Σ_m max_w C_{w,m}: the number of coins that must be drawn.
    pub fn total_coins(&self) -> u64 {
        // Cannot overflow: checked at construction.
        self.checked_total().expect("total checked at construction")
    }

    /// Permutes mints: column `m` of the result is column `order[m]` of self.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.mints {
            return Err(Error::DimensionMismatch {
                expected: self.mints,
                found: order.len(),
            });
        }
        let cols: Vec<_> = order.iter().map(|&m| self.column(m)).collect();
        Self::from_columns(self.weighings, &cols)
    }

    /// Permutes weighings: row `w` of the result is row `order[w]` of self.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.weighings {
            return Err(Error::DimensionMismatch {
                expected: self.weighings,
                found: order.len(),
            });
        }
        Self::new(order.iter().map(|&w| self.row(w).to_vec()).collect())
    }

    pub fn delete_column(&self, mint: usize) -> Result<Self> {
        let cols: Vec<_> = (0..self.mints)
            .filter(|&m| m != mint)
            .map(|m| self.column(m))
            .collect();
        Self::from_columns(self.weighings, &cols)
    }

    pub fn with_row_appended(&self, row: Vec<u64>) -> Result<Self> {
        let mut rows = self.to_rows();
        rows.push(row);
        Self::new(rows)
    }

    pub fn with_row_scaled(&self, weighing: usize, factor: u64) -> Result<Self> {
        let mut rows = self.to_rows();
        for x in &mut rows[weighing] {
            *x = x
                .checked_mul(factor)
                .ok_or(Error::Overflow("row scaling"))?;
        }
        Self::new(rows)
    }
}

impl fmt::Display for CoinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Which mints are faulty. `d_1` is the most significant bit of `index`, so
/// ascending indices list patterns in the same order as a printed decision
/// table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaultPattern {
    index: u64,
    len: usize,
}

impl FaultPattern {
    pub fn new(index: u64, len: usize) -> Result<Self> {
        if len > 63 || index >> len != 0 {
            return Err(Error::PatternOutOfRange { index, mints: len });
        }
        Ok(Self { index, len })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut index = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(Error::PatternOutOfRange {
                    index: u64::from(b),
                    mints: bits.len(),
                });
            }
            index = index.checked_mul(2).ok_or(Error::PatternOutOfRange {
                index,
                mints: bits.len(),
            })? | u64::from(b);
        }
        Self::new(index, bits.len())
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `d_m` for 0-based mint `m`.
    pub fn bit(&self, mint: usize) -> bool {
        (self.index >> (self.len - 1 - mint)) & 1 == 1
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|m| u8::from(self.bit(m))).collect()
    }
}

/// Reduced excess weights `s_w = Σ_m C_{w,m} d_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(pub Vec<u64>);

impl WeightVector {
    pub fn components(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }
}

pub fn weight_vector(matrix: &CoinMatrix, pattern: FaultPattern) -> Result<WeightVector> {
    if pattern.len() != matrix.mints() {
        return Err(Error::DimensionMismatch {
            expected: matrix.mints(),
            found: pattern.len(),
        });
    }
    let mut out = Vec::with_capacity(matrix.weighings());
    for row in matrix.rows() {
        let mut sum = 0u64;
        for (m, &c) in row.iter().enumerate() {
            if pattern.bit(m) {
                sum = sum.checked_add(c).ok_or(Error::Overflow("weight sum"))?;
            }
        }
        out.push(sum);
    }
    Ok(WeightVector(out))
}

/// One measured excess ratio `s_{w+1}/s_w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatioValue {
    /// Reduced fraction; `den >= 1` and `gcd(num, den) == 1`.
    Finite { num: u64, den: u64 },
    /// Zero denominator, positive numerator.
    Infinity,
    /// Zero denominator and zero numerator. Equal to itself.
    ZeroOverZero,
}

impl RatioValue {
    pub fn of(numerator: u64, denominator: u64) -> Self {
        match (numerator, denominator) {
            (0, 0) => Self::ZeroOverZero,
            (_, 0) => Self::Infinity,
            (n, d) => {
                let g = n.gcd(&d);
                Self::Finite {
                    num: n / g,
                    den: d / g,
                }
            }
        }
    }
}

impl fmt::Display for RatioValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Finite { num, den: 1 } => write!(f, "{num}"),
            Self::Finite { num, den } => write!(f, "{num}/{den}"),
            Self::Infinity => f.write_str("inf"),
            Self::ZeroOverZero => f.write_str("0/0"),
        }
    }
}

/// How two weight vectors are told apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// Consecutive ratios `s_{w+1}/s_w` with distinct `inf` and `0/0` symbols.
    #[default]
    Ratio,
    /// Weight vectors on the same ray through the origin are indistinguishable.
    Collinear,
}

impl Criterion {
    pub const ALL: [Criterion; 2] = [Criterion::Ratio, Criterion::Collinear];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ratio => "ratio",
            Self::Collinear => "collinear",
        }
    }

    pub fn signature(&self, s: &WeightVector) -> Result<Signature> {
        match self {
            Self::Ratio => ratio_signature(s),
            Self::Collinear => Ok(projective_signature(s)),
        }
    }

    /// Whether the criterion is defined for plans with this many weighings.
    pub fn supports(&self, weighings: usize) -> bool {
        match self {
            Self::Ratio => weighings >= 2,
            Self::Collinear => weighings >= 1,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ratio" => Ok(Self::Ratio),
            "collinear" | "projective" => Ok(Self::Collinear),
            other => Err(format!(
                "unknown criterion `{other}` (expected ratio or collinear)"
            )),
        }
    }
}

/// Distinguishability fingerprint of a weight vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    Ratio(Vec<RatioValue>),
    Projective(Vec<u64>),
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match self {
            Self::Ratio(values) => values.iter().map(RatioValue::to_string).collect(),
            Self::Projective(v) => v.iter().map(u64::to_string).collect(),
        };
        write!(f, "({})", parts.join(", "))
    }
}

pub fn ratio_signature(s: &WeightVector) -> Result<Signature> {
    let c = s.components();
    if c.len() < 2 {
        return Err(Error::NoRatios(c.len()));
    }
    Ok(Signature::Ratio(
        c.windows(2).map(|p| RatioValue::of(p[1], p[0])).collect(),
    ))
}

pub fn projective_signature(s: &WeightVector) -> Signature {
    let mut v = s.0.clone();
    divide_by_gcd(&mut v);
    Signature::Projective(v)
}

fn divide_by_gcd(v: &mut [u64]) {
    let g = v.iter().fold(0u64, |g, &x| g.gcd(&x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

/// Rewrites `s` in place into a canonical integer form whose equality
/// matches signature equality under `criterion`.
///
/// Collinear: the whole vector divided by its gcd. Ratio: every maximal run
/// of nonzero entries divided by its own gcd, zeros left in place. The ratio
/// form is only meaningful for `s.len() >= 2`.
pub fn canonicalize(criterion: Criterion, s: &mut [u64]) {
    match criterion {
        Criterion::Collinear => divide_by_gcd(s),
        Criterion::Ratio => {
            let mut start = 0;
            while start < s.len() {
                if s[start] == 0 {
                    start += 1;
                    continue;
                }
                let end = s[start..]
                    .iter()
                    .position(|&x| x == 0)
                    .map_or(s.len(), |p| start + p);
                divide_by_gcd(&mut s[start..end]);
                start = end;
            }
        }
    }
}

/// Whether a solution's total is proven minimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    UpperBound,
    Infeasible,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::UpperBound => "upper_bound",
            Self::Infeasible => "infeasible",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub matrix: CoinMatrix,
    pub total: u64,
    pub status: Status,
    pub criterion: Criterion,
}

impl Solution {
    pub fn new(matrix: CoinMatrix, status: Status, criterion: Criterion) -> Self {
        let total = matrix.total_coins();
        Self {
            matrix,
            total,
            status,
            criterion,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_matrix() -> CoinMatrix {
        CoinMatrix::new(vec![vec![1, 1, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 1, 2]]).unwrap()
    }

    fn pat(bits: &[u8]) -> FaultPattern {
        FaultPattern::from_bits(bits).unwrap()
    }

    fn wv(v: &[u64]) -> WeightVector {
        WeightVector(v.to_vec())
    }

    fn fin(num: u64, den: u64) -> RatioValue {
        RatioValue::Finite { num, den }
    }

    #[test]
    fn weight_vectors_from_decision_table() {
        let c = example_matrix();
        assert_eq!(
            weight_vector(&c, pat(&[0, 1, 1, 0])).unwrap(),
            wv(&[1, 2, 1])
        );
        assert_eq!(
            weight_vector(&c, pat(&[0, 0, 0, 0])).unwrap(),
            wv(&[0, 0, 0])
        );
        assert_eq!(
            weight_vector(&c, pat(&[1, 1, 1, 1])).unwrap(),
            wv(&[2, 2, 3])
        );
    }

    #[test]
    fn weight_vector_rejects_wrong_length() {
        let c = example_matrix();
        assert!(matches!(
            weight_vector(&c, pat(&[1, 0, 1])),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
    }

    #[test]
    fn pattern_msb_is_first_mint() {
        let p = pat(&[1, 0, 0, 1]);
        assert_eq!(p.index(), 9);
        assert!(p.bit(0) && p.bit(3) && !p.bit(1));
        assert_eq!(p.bits(), vec![1, 0, 0, 1]);
        assert!(FaultPattern::new(16, 4).is_err());
    }

    #[test]
    fn ratio_signature_symbols() {
        assert_eq!(
            ratio_signature(&wv(&[1, 2, 1])).unwrap(),
            Signature::Ratio(vec![fin(2, 1), fin(1, 2)])
        );
        assert_eq!(
            ratio_signature(&wv(&[1, 0, 0])).unwrap(),
            Signature::Ratio(vec![fin(0, 1), RatioValue::ZeroOverZero])
        );
        assert_eq!(
            ratio_signature(&wv(&[0, 0, 2])).unwrap(),
            Signature::Ratio(vec![RatioValue::ZeroOverZero, RatioValue::Infinity])
        );
        assert_eq!(ratio_signature(&wv(&[3])), Err(Error::NoRatios(1)));
    }

    #[test]
    fn ratio_values_reduce_and_stay_distinct() {
        assert_eq!(RatioValue::of(6, 4), fin(3, 2));
        assert_eq!(RatioValue::of(0, 7), fin(0, 1));
        assert_ne!(RatioValue::Infinity, RatioValue::ZeroOverZero);
        assert_eq!(RatioValue::ZeroOverZero, RatioValue::ZeroOverZero);
        assert_ne!(RatioValue::of(0, 1), RatioValue::ZeroOverZero);
        assert_eq!(RatioValue::of(3, 2).to_string(), "3/2");
        assert_eq!(RatioValue::of(4, 2).to_string(), "2");
        assert_eq!(RatioValue::Infinity.to_string(), "inf");
        assert_eq!(RatioValue::ZeroOverZero.to_string(), "0/0");
    }

    #[test]
    fn projective_signature_examples() {
        assert_eq!(
            projective_signature(&wv(&[0, 2, 4])),
            Signature::Projective(vec![0, 1, 2])
        );
        assert_eq!(
            projective_signature(&wv(&[0, 0, 0])),
            Signature::Projective(vec![0, 0, 0])
        );
        assert_eq!(
            projective_signature(&wv(&[1, 2, 3])),
            Signature::Projective(vec![1, 2, 3])
        );
    }

    #[test]
    fn equal_ratios_without_proportionality() {
        let a = wv(&[1, 0, 2]);
        let b = wv(&[1, 0, 3]);
        assert_eq!(ratio_signature(&a).unwrap(), ratio_signature(&b).unwrap());
        assert_eq!(
            ratio_signature(&a).unwrap(),
            Signature::Ratio(vec![fin(0, 1), RatioValue::Infinity])
        );
        assert_ne!(projective_signature(&a), projective_signature(&b));
    }

    #[test]
    fn total_coins_examples() {
        assert_eq!(example_matrix().total_coins(), 5);
        assert_eq!(example_matrix().column_maxima(), vec![1, 1, 1, 2]);
        assert_eq!(CoinMatrix::zeros(2, 3).unwrap().total_coins(), 0);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(CoinMatrix::new(vec![]), Err(Error::EmptyMatrix));
        assert!(matches!(
            CoinMatrix::new(vec![vec![1, 2], vec![1]]),
            Err(Error::RaggedRows { row: 1, .. })
        ));
        assert_eq!(
            CoinMatrix::new(vec![vec![u64::MAX, 1]]),
            Err(Error::Overflow("row sum"))
        );
        assert_eq!(
            CoinMatrix::new(vec![vec![u64::MAX], vec![0]])
                .unwrap()
                .total_coins(),
            u64::MAX
        );
        assert_eq!(
            CoinMatrix::new(vec![vec![u64::MAX, 0], vec![0, 1]]),
            Err(Error::Overflow("total coins"))
        );
    }

    #[test]
    fn canonical_form_examples() {
        let mut s = [2, 4, 0, 3, 6, 9];
        canonicalize(Criterion::Ratio, &mut s);
        assert_eq!(s, [1, 2, 0, 1, 2, 3]);
        let mut s = [2, 4, 0, 3, 6, 9];
        canonicalize(Criterion::Collinear, &mut s);
        assert_eq!(s, [2, 4, 0, 3, 6, 9]);
        let mut s = [0, 0, 0];
        canonicalize(Criterion::Ratio, &mut s);
        assert_eq!(s, [0, 0, 0]);
    }

    #[test]
    fn criterion_parsing() {
        assert_eq!("ratio".parse::<Criterion>(), Ok(Criterion::Ratio));
        assert_eq!("Collinear".parse::<Criterion>(), Ok(Criterion::Collinear));
        assert!("nope".parse::<Criterion>().is_err());
    }
}
