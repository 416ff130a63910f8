//! Minimum-total search.
//!
//! Totals are tried in ascending order starting from a proven lower bound.
//! For each total every non-decreasing budget vector is expanded by a
//! depth-first search that places one column per mint and keeps the
//! canonical signatures of every subset sum of the columns placed so far.
//! A repeated signature kills the branch: the two colliding subsets are
//! fault patterns of the finished matrix (with zeros on unplaced mints), so
//! no completion can separate them.
//!
//! Symmetry handling:
//! - budgets are non-decreasing across mints;
//! - inside a run of equal budgets, columns are strictly increasing in
//!   lexicographic order (equal columns always collide anyway);
//! - under [`Criterion::Collinear`] only, rows may additionally be kept in
//!   non-decreasing lexicographic order. Combined with the column rules this
//!   is the usual double-lex break, and every matrix has a representative:
//!   each out-of-order adjacent swap lowers (column maxima, row-major
//!   entries) lexicographically.
//!
//! Work is split into one task per (budget, first column) and reduced with
//! an order-preserving `find_map_first`, so the reported matrix is the
//! first one in enumeration order regardless of the worker count.

use std::ops::Range;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::FxHashSet;

use crate::error::{Error, Result};
use crate::model::{canonicalize, CoinMatrix, Criterion, Solution, Status};
use crate::verifier::{Verifier, DEFAULT_MINT_CAP};

/// Column maxima `C_1 ≤ C_2 ≤ … ≤ C_M`, each at least 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BudgetVector(Vec<u64>);

impl BudgetVector {
    pub fn new(budgets: Vec<u64>) -> Result<Self> {
        if budgets.is_empty() {
            return Err(Error::InvalidArgument("budget vector is empty".into()));
        }
        if budgets.contains(&0) {
            return Err(Error::InvalidArgument(
                "every budget must be at least 1".into(),
            ));
        }
        if budgets.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::InvalidArgument(
                "budgets must be non-decreasing".into(),
            ));
        }
        budgets
            .iter()
            .try_fold(0u64, |a, &c| a.checked_add(c))
            .ok_or(Error::Overflow("budget sum"))?;
        Ok(Self(budgets))
    }

    pub fn budgets(&self) -> &[u64] {
        &self.0
    }

    pub fn mints(&self) -> usize {
        self.0.len()
    }

    pub fn sum(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Non-decreasing compositions of a total into a fixed number of positive
/// parts, in lexicographic order.
#[derive(Debug, Clone)]
pub struct Budgets {
    total: u64,
    current: Option<Vec<u64>>,
}

impl Iterator for Budgets {
    type Item = BudgetVector;

    fn next(&mut self) -> Option<BudgetVector> {
        let out = self.current.clone()?;
        self.current = successor(&out, self.total);
        Some(BudgetVector(out))
    }
}

fn successor(parts: &[u64], total: u64) -> Option<Vec<u64>> {
    let m = parts.len();
    let mut prefix: u64 = parts.iter().sum::<u64>() - parts[m - 1];
    for i in (0..m.saturating_sub(1)).rev() {
        prefix -= parts[i];
        let bumped = parts[i] + 1;
        let remaining = total - prefix;
        let count = (m - i) as u64;
        if count * bumped <= remaining {
            let mut next = parts[..i].to_vec();
            next.extend(std::iter::repeat_n(bumped, m - i - 1));
            next.push(remaining - (count - 1) * bumped);
            return Some(next);
        }
    }
    None
}

pub fn enumerate_budgets(mints: usize, total: u64) -> Budgets {
    let current = (mints > 0 && total >= mints as u64).then(|| {
        let mut v = vec![1u64; mints];
        v[mints - 1] = total - (mints as u64 - 1);
        v
    });
    Budgets { total, current }
}

/// Every mint needs at least one coin.
pub fn lower_bound(_weighings: usize, mints: usize) -> u64 {
    mints as u64
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub criterion: Criterion,
    /// Largest total to try.
    pub max_total: Option<u64>,
    pub time_budget: Option<Duration>,
    pub worker_count: usize,
    pub mint_cap: usize,
    /// Keep rows in lexicographic order. Only sound for Collinear; ignored
    /// under Ratio.
    pub row_symmetry: bool,
    /// A caller-proven lower bound (e.g. from monotonicity over solved
    /// neighbours). The search starts at `max(M, start_bound)`.
    pub start_bound: Option<u64>,
    /// A known valid matrix reported as an upper bound if the search stops
    /// early.
    pub incumbent: Option<CoinMatrix>,
}

impl SearchConfig {
    pub fn new(criterion: Criterion) -> Self {
        Self {
            criterion,
            max_total: None,
            time_budget: None,
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            mint_cap: DEFAULT_MINT_CAP,
            row_symmetry: criterion == Criterion::Collinear,
            start_bound: None,
            incumbent: None,
        }
    }

    pub fn workers(mut self, n: usize) -> Self {
        self.worker_count = n;
        self
    }

    pub fn max_total(mut self, t: u64) -> Self {
        self.max_total = Some(t);
        self
    }

    pub fn time_budget(mut self, d: Duration) -> Self {
        self.time_budget = Some(d);
        self
    }

    pub fn start_bound(mut self, t: u64) -> Self {
        self.start_bound = Some(t);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub solution: Option<Solution>,
    /// Totals proven to admit no valid matrix, contiguous from the start.
    pub explored_totals: Range<u64>,
    /// Every total below this is infeasible.
    pub proven_lower_bound: u64,
    /// Whether the time budget cut the search short.
    pub timed_out: bool,
    pub elapsed: Duration,
}

impl SearchOutcome {
    pub fn status(&self) -> Status {
        self.solution
            .as_ref()
            .map_or(Status::Infeasible, |s| s.status)
    }
}

/// Knobs for a single budget expansion.
#[derive(Debug, Clone, Copy)]
pub struct ExtendOptions {
    pub criterion: Criterion,
    /// Reject a branch as soon as two subset sums share a signature.
    /// Without it every full assignment is built and checked by the
    /// verifier at the leaf.
    pub prune: bool,
    /// Lexicographic order inside equal-budget runs.
    pub column_symmetry: bool,
    pub row_symmetry: bool,
}

impl ExtendOptions {
    pub fn new(criterion: Criterion) -> Self {
        Self {
            criterion,
            prune: true,
            column_symmetry: true,
            row_symmetry: criterion == Criterion::Collinear,
        }
    }

    pub fn exhaustive(criterion: Criterion) -> Self {
        Self {
            criterion,
            prune: false,
            column_symmetry: false,
            row_symmetry: false,
        }
    }
}

/// Looks for a valid matrix with exactly the given column maxima. Returns
/// the first one in enumeration order.
pub fn extend_search(
    budget: &BudgetVector,
    weighings: usize,
    criterion: Criterion,
) -> Option<CoinMatrix> {
    extend_search_with(budget, weighings, ExtendOptions::new(criterion))
}

pub fn extend_search_with(
    budget: &BudgetVector,
    weighings: usize,
    options: ExtendOptions,
) -> Option<CoinMatrix> {
    if weighings == 0 || !options.criterion.supports(weighings) {
        return None;
    }
    let table = ColumnTable::new(
        weighings,
        budget.budgets().iter().copied().max().unwrap_or(0),
    );
    let never = AtomicBool::new(false);
    let codes = options
        .prune
        .then(|| CanonTable::build(weighings, budget.sum(), options.criterion))
        .flatten();
    let ctx = Ctx {
        weighings,
        options,
        columns: &table,
        codes: codes.as_ref(),
        abort: &never,
        deadline: None,
        limit: budget.sum(),
    };
    let first_choices = table.first_choices(budget.budgets()[0], &options);
    for first in first_choices {
        match ctx.run(budget.budgets(), first) {
            TaskResult::Found(m) => {
                let report = Verifier::with_cap(usize::MAX).is_valid(&m, options.criterion);
                assert!(
                    report.is_ok_and(|r| r.valid),
                    "search produced an invalid matrix:\n{m}"
                );
                return Some(m);
            }
            TaskResult::Exhausted => {}
            TaskResult::Aborted => return None,
        }
    }
    None
}

pub fn solve_min(weighings: usize, mints: usize, config: &SearchConfig) -> Result<SearchOutcome> {
    let started = Instant::now();
    if weighings == 0 || mints == 0 {
        return Err(Error::InvalidArgument(
            "need at least one weighing and one mint".into(),
        ));
    }
    if mints > config.mint_cap {
        return Err(Error::MintCap {
            mints,
            cap: config.mint_cap,
        });
    }
    if !config.criterion.supports(weighings) {
        return Err(Error::NoRatios(weighings));
    }
    if config.worker_count == 0 {
        return Err(Error::InvalidArgument(
            "worker count must be positive".into(),
        ));
    }
    let verifier = Verifier::with_cap(config.mint_cap);
    let incumbent = match &config.incumbent {
        Some(m) => {
            if m.weighings() != weighings || m.mints() != mints {
                return Err(Error::InvalidArgument(
                    "incumbent has the wrong shape".into(),
                ));
            }
            if !verifier.is_valid(m, config.criterion)?.valid {
                return Err(Error::InvalidArgument(
                    "incumbent is not a valid plan".into(),
                ));
            }
            Some(m.clone())
        }
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let deadline = config.time_budget.map(|d| started + d);
    let abort = AtomicBool::new(false);
    let options = ExtendOptions {
        criterion: config.criterion,
        prune: true,
        column_symmetry: true,
        row_symmetry: config.row_symmetry && config.criterion == Criterion::Collinear,
    };

    let start = lower_bound(weighings, mints).max(config.start_bound.unwrap_or(0));
    let mut ceiling = config.max_total.unwrap_or(u64::MAX);
    if let Some(m) = &incumbent {
        ceiling = ceiling.min(m.total_coins());
    }

    let mut total = start;
    let mut found = None;
    let mut timed_out = false;
    while total <= ceiling {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            timed_out = true;
            break;
        }
        let table = ColumnTable::new(weighings, total - (mints as u64 - 1));
        let codes = CanonTable::build(weighings, total, options.criterion);
        let ctx = Ctx {
            weighings,
            options,
            columns: &table,
            codes: codes.as_ref(),
            abort: &abort,
            deadline,
            limit: total,
        };
        let tasks: Vec<(Vec<u64>, usize)> = enumerate_budgets(mints, total)
            .flat_map(|b| {
                table
                    .first_choices(b.budgets()[0], &options)
                    .into_iter()
                    .map(move |first| (b.0.clone(), first))
            })
            .collect();
        let hit = pool.install(|| {
            tasks
                .par_iter()
                .find_map_first(|(budgets, first)| match ctx.run(budgets, *first) {
                    TaskResult::Exhausted => None,
                    other => Some(other),
                })
        });
        match hit {
            None => total += 1,
            Some(TaskResult::Found(m)) => {
                found = Some(m);
                break;
            }
            Some(TaskResult::Aborted) => {
                timed_out = true;
                break;
            }
            Some(TaskResult::Exhausted) => unreachable!(),
        }
    }

    let solution = match (found, incumbent) {
        (Some(m), _) => {
            let report = verifier.is_valid(&m, config.criterion)?;
            assert!(report.valid, "search produced an invalid matrix:\n{m}");
            Some(Solution::new(m, Status::Optimal, config.criterion))
        }
        (None, Some(m)) => {
            let status = if m.total_coins() <= total && !timed_out {
                Status::Optimal
            } else {
                Status::UpperBound
            };
            Some(Solution::new(m, status, config.criterion))
        }
        (None, None) => None,
    };
    Ok(SearchOutcome {
        solution,
        explored_totals: start..total,
        proven_lower_bound: total,
        timed_out,
        elapsed: started.elapsed(),
    })
}

/// Brute force over every matrix with entries in `[0, max_total]`.
/// Independent of the pruning and symmetry code above.
pub fn oracle_solve(
    weighings: usize,
    mints: usize,
    max_total: u64,
    criterion: Criterion,
) -> Result<Option<Solution>> {
    const CAP: u128 = 100_000_000;
    if weighings == 0 || mints == 0 {
        return Err(Error::InvalidArgument(
            "need at least one weighing and one mint".into(),
        ));
    }
    if !criterion.supports(weighings) {
        return Err(Error::NoRatios(weighings));
    }
    let cells = (weighings * mints) as u32;
    let fits = u128::from(max_total + 1)
        .checked_pow(cells)
        .is_some_and(|s| s <= CAP);
    if !fits {
        return Err(Error::OracleCap {
            size: u128::from(max_total + 1).saturating_pow(cells),
            cap: CAP,
        });
    }

    let verifier = Verifier::default();
    let mut entries = vec![0u64; weighings * mints];
    let mut best: Option<CoinMatrix> = None;
    let column_max =
        |e: &[u64], m: usize| (0..weighings).map(|w| e[w * mints + m]).max().unwrap_or(0);
    loop {
        let (total, zero_column) = (0..mints).fold((0, false), |(t, z), m| {
            let c = column_max(&entries, m);
            (t + c, z || c == 0)
        });
        if total <= max_total
            && !zero_column
            && best.as_ref().is_none_or(|b| total < b.total_coins())
        {
            let matrix = CoinMatrix::from_row_major(weighings, mints, entries.clone())?;
            if verifier.is_valid(&matrix, criterion)?.valid {
                best = Some(matrix);
            }
        }
        // odometer, last entry fastest: row-major lexicographic order
        let mut i = entries.len();
        loop {
            if i == 0 {
                return Ok(best.map(|m| Solution::new(m, Status::Optimal, criterion)));
            }
            i -= 1;
            if entries[i] < max_total {
                entries[i] += 1;
                break;
            }
            entries[i] = 0;
        }
    }
}

enum TaskResult {
    Found(CoinMatrix),
    Exhausted,
    Aborted,
}

/// All columns in `[0, c]^W` with maximum exactly `c`, lexicographic, for
/// every `c` up to a limit.
struct ColumnTable {
    weighings: usize,
    by_max: Vec<Vec<u64>>,
}

impl ColumnTable {
    fn new(weighings: usize, max_budget: u64) -> Self {
        let mut by_max = vec![Vec::new()];
        for c in 1..=max_budget {
            let mut flat = Vec::new();
            let mut v = vec![0u64; weighings];
            loop {
                if v.contains(&c) {
                    flat.extend_from_slice(&v);
                }
                let mut i = weighings;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if v[i] < c {
                        v[i] += 1;
                        break;
                    }
                    v[i] = 0;
                }
                if v.iter().all(|&x| x == 0) {
                    break;
                }
            }
            by_max.push(flat);
        }
        Self { weighings, by_max }
    }

    fn count(&self, budget: u64) -> usize {
        self.by_max[budget as usize].len() / self.weighings
    }

    fn column(&self, budget: u64, index: usize) -> &[u64] {
        let w = self.weighings;
        &self.by_max[budget as usize][index * w..(index + 1) * w]
    }

    fn first_choices(&self, budget: u64, options: &ExtendOptions) -> Vec<usize> {
        (0..self.count(budget))
            .filter(|&i| {
                !options.row_symmetry || self.column(budget, i).windows(2).all(|p| p[0] <= p[1])
            })
            .collect()
    }
}

fn key_bits(total: u64) -> u32 {
    (64 - total.leading_zeros()).max(1)
}

/// Set of canonical weight vectors seen so far. Each implementation gets
/// vectors whose entries are at most `limit`.
trait SeenSet {
    fn new(weighings: usize, limit: u64) -> Self;
    /// False if already present.
    fn insert(&mut self, canonical: &[u64]) -> bool;
    fn remove(&mut self, canonical: &[u64]);
}

const BITSET_MAX_BITS: u64 = 1 << 28;

/// Dense bitmap over the mixed-radix index `Σ x_w (limit+1)^w`.
struct DenseSet {
    radix: u64,
    bits: Vec<u64>,
}

impl DenseSet {
    fn fits(weighings: usize, limit: u64) -> bool {
        (limit + 1)
            .checked_pow(weighings as u32)
            .is_some_and(|n| n <= BITSET_MAX_BITS)
    }

    #[inline]
    fn index(&self, canonical: &[u64]) -> usize {
        canonical.iter().fold(0u64, |acc, &x| acc * self.radix + x) as usize
    }
}

impl SeenSet for DenseSet {
    fn new(weighings: usize, limit: u64) -> Self {
        let size = (limit + 1).pow(weighings as u32) as usize;
        Self {
            radix: limit + 1,
            bits: vec![0; size.div_ceil(64)],
        }
    }

    #[inline]
    fn insert(&mut self, canonical: &[u64]) -> bool {
        let i = self.index(canonical);
        let (word, bit) = (i / 64, 1u64 << (i % 64));
        let fresh = self.bits[word] & bit == 0;
        self.bits[word] |= bit;
        fresh
    }

    #[inline]
    fn remove(&mut self, canonical: &[u64]) {
        let i = self.index(canonical);
        self.bits[i / 64] &= !(1u64 << (i % 64));
    }
}

/// Hash set of bit-packed vectors, for shapes too large for [`DenseSet`].
struct PackedSet {
    bits: u32,
    set: FxHashSet<u128>,
}

impl PackedSet {
    fn fits(weighings: usize, limit: u64) -> bool {
        weighings as u32 * key_bits(limit) <= 128
    }

    #[inline]
    fn pack(&self, canonical: &[u64]) -> u128 {
        canonical
            .iter()
            .fold(0u128, |acc, &x| (acc << self.bits) | u128::from(x))
    }
}

impl SeenSet for PackedSet {
    fn new(_weighings: usize, limit: u64) -> Self {
        Self {
            bits: key_bits(limit),
            set: FxHashSet::default(),
        }
    }

    fn insert(&mut self, canonical: &[u64]) -> bool {
        let k = self.pack(canonical);
        self.set.insert(k)
    }

    fn remove(&mut self, canonical: &[u64]) {
        let k = self.pack(canonical);
        self.set.remove(&k);
    }
}

impl SeenSet for FxHashSet<Box<[u64]>> {
    fn new(_weighings: usize, _limit: u64) -> Self {
        FxHashSet::default()
    }

    fn insert(&mut self, canonical: &[u64]) -> bool {
        FxHashSet::insert(self, canonical.into())
    }

    fn remove(&mut self, canonical: &[u64]) {
        FxHashSet::remove(self, canonical);
    }
}

/// Canonical code of every vector in `[0, limit]^W`, indexed by its
/// mixed-radix code `Σ x_w (limit+1)^(W-1-w)`. Adding two vectors whose sum
/// stays within the limit adds their codes, so subset sums can be carried
/// as plain integers.
struct CanonTable {
    radix: u64,
    canon: Vec<u32>,
}

const CANON_TABLE_MAX: u64 = 1 << 25;

impl CanonTable {
    fn build(weighings: usize, limit: u64, criterion: Criterion) -> Option<Self> {
        let radix = limit + 1;
        let size = radix
            .checked_pow(weighings as u32)
            .filter(|&n| n <= CANON_TABLE_MAX)?;
        let canon = (0..size)
            .into_par_iter()
            .map_init(
                || vec![0u64; weighings],
                |digits, mut code| {
                    for d in digits.iter_mut().rev() {
                        *d = code % radix;
                        code /= radix;
                    }
                    canonicalize(criterion, digits);
                    digits.iter().fold(0u64, |acc, &x| acc * radix + x) as u32
                },
            )
            .collect();
        Some(Self { radix, canon })
    }

    fn encode(&self, v: &[u64]) -> u32 {
        v.iter().fold(0u64, |acc, &x| acc * self.radix + x) as u32
    }
}

struct Ctx<'a> {
    weighings: usize,
    options: ExtendOptions,
    columns: &'a ColumnTable,
    codes: Option<&'a CanonTable>,
    abort: &'a AtomicBool,
    deadline: Option<Instant>,
    // upper bound on any weight-vector entry
    limit: u64,
}

impl Ctx<'_> {
    fn run(&self, budgets: &[u64], first: usize) -> TaskResult {
        let (w, limit, criterion) = (self.weighings, self.limit, self.options.criterion);
        if let Some(table) = self.codes {
            Dfs::new(self, budgets, CodedStore::new(table)).run(first)
        } else if DenseSet::fits(w, limit) {
            Dfs::new(
                self,
                budgets,
                VecStore::<DenseSet>::new(w, limit, criterion),
            )
            .run(first)
        } else if PackedSet::fits(w, limit) {
            Dfs::new(
                self,
                budgets,
                VecStore::<PackedSet>::new(w, limit, criterion),
            )
            .run(first)
        } else {
            Dfs::new(
                self,
                budgets,
                VecStore::<FxHashSet<Box<[u64]>>>::new(w, limit, criterion),
            )
            .run(first)
        }
    }
}

/// Subset sums of the placed columns plus the set of their signatures.
trait Store {
    /// Adds every subset sum that includes `col`. On a signature collision
    /// the store is left unchanged and false is returned.
    fn push(&mut self, col: &[u64]) -> bool;
    /// Undoes the last successful push.
    fn pop(&mut self);
}

struct CodedStore<'a> {
    table: &'a CanonTable,
    sums: Vec<u32>,
    canon: Vec<u32>,
    seen: Vec<u64>,
}

impl<'a> CodedStore<'a> {
    fn new(table: &'a CanonTable) -> Self {
        let mut seen = vec![0u64; table.canon.len().div_ceil(64)];
        seen[0] |= 1;
        Self {
            table,
            sums: vec![0],
            canon: vec![0],
            seen,
        }
    }
}

impl Store for CodedStore<'_> {
    #[inline]
    fn push(&mut self, col: &[u64]) -> bool {
        let code = self.table.encode(col);
        let n = self.sums.len();
        for i in 0..n {
            let raw = self.sums[i] + code;
            let c = self.table.canon[raw as usize];
            let (word, bit) = ((c / 64) as usize, 1u64 << (c % 64));
            if self.seen[word] & bit != 0 {
                for &old in &self.canon[n..] {
                    self.seen[(old / 64) as usize] &= !(1u64 << (old % 64));
                }
                self.sums.truncate(n);
                self.canon.truncate(n);
                return false;
            }
            self.seen[word] |= bit;
            self.sums.push(raw);
            self.canon.push(c);
        }
        true
    }

    fn pop(&mut self) {
        let n = self.sums.len() / 2;
        for &old in &self.canon[n..] {
            self.seen[(old / 64) as usize] &= !(1u64 << (old % 64));
        }
        self.sums.truncate(n);
        self.canon.truncate(n);
    }
}

struct VecStore<S> {
    weighings: usize,
    criterion: Criterion,
    // 2^depth vectors of length W
    sums: Vec<u64>,
    canon: Vec<u64>,
    seen: S,
}

impl<S: SeenSet> VecStore<S> {
    fn new(weighings: usize, limit: u64, criterion: Criterion) -> Self {
        let mut seen = S::new(weighings, limit);
        seen.insert(&vec![0; weighings]);
        Self {
            weighings,
            criterion,
            sums: vec![0; weighings],
            canon: vec![0; weighings],
            seen,
        }
    }
}

impl<S: SeenSet> Store for VecStore<S> {
    fn push(&mut self, col: &[u64]) -> bool {
        let w = self.weighings;
        let n = self.sums.len() / w;
        for i in 0..n {
            for (r, &c) in col.iter().enumerate() {
                let x = self.sums[i * w + r] + c;
                self.sums.push(x);
                self.canon.push(x);
            }
            let fresh = &mut self.canon[(n + i) * w..];
            canonicalize(self.criterion, fresh);
            if !self.seen.insert(fresh) {
                for j in n..n + i {
                    self.seen.remove(&self.canon[j * w..(j + 1) * w]);
                }
                self.sums.truncate(n * w);
                self.canon.truncate(n * w);
                return false;
            }
        }
        true
    }

    fn pop(&mut self) {
        let w = self.weighings;
        let n = self.sums.len() / w / 2;
        for j in n..2 * n {
            self.seen.remove(&self.canon[j * w..(j + 1) * w]);
        }
        self.sums.truncate(n * w);
        self.canon.truncate(n * w);
    }
}

struct Dfs<'a, S> {
    ctx: &'a Ctx<'a>,
    budgets: &'a [u64],
    store: S,
    chosen: Vec<usize>,
    // bit r set: rows r and r+1 agree on every placed column
    tied: Vec<u64>,
    // still_needed[d]: mints after d sharing mint d's budget
    still_needed: Vec<usize>,
    nodes: u64,
    aborted: bool,
}

impl<'a, S: Store> Dfs<'a, S> {
    fn new(ctx: &'a Ctx<'a>, budgets: &'a [u64], store: S) -> Self {
        let w = ctx.weighings;
        let m = budgets.len();
        let still_needed = (0..m)
            .map(|d| {
                budgets[d + 1..]
                    .iter()
                    .filter(|&&b| b == budgets[d])
                    .count()
            })
            .collect();
        Self {
            ctx,
            budgets,
            store,
            chosen: Vec::with_capacity(m),
            tied: vec![if w > 1 { (1u64 << (w - 1)) - 1 } else { 0 }],
            still_needed,
            nodes: 0,
            aborted: false,
        }
    }

    fn run(mut self, first: usize) -> TaskResult {
        let found = self.try_place(0, first) && self.descend(1);
        if found {
            TaskResult::Found(self.matrix())
        } else if self.aborted {
            TaskResult::Aborted
        } else {
            TaskResult::Exhausted
        }
    }

    fn matrix(&self) -> CoinMatrix {
        let cols: Vec<Vec<u64>> = self
            .chosen
            .iter()
            .zip(self.budgets)
            .map(|(&i, &b)| self.ctx.columns.column(b, i).to_vec())
            .collect();
        CoinMatrix::from_columns(self.ctx.weighings, &cols).expect("search columns form a matrix")
    }

    fn should_stop(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            if let Some(d) = self.ctx.deadline {
                if Instant::now() >= d {
                    self.ctx.abort.store(true, Ordering::Relaxed);
                }
            }
        }
        if self.ctx.abort.load(Ordering::Relaxed) {
            self.aborted = true;
        }
        self.aborted
    }

    fn descend(&mut self, depth: usize) -> bool {
        if depth == self.budgets.len() {
            return self.ctx.options.prune || self.leaf_is_valid();
        }
        let budget = self.budgets[depth];
        let count = self.ctx.columns.count(budget);
        let symmetric = self.ctx.options.column_symmetry;
        let start = if symmetric && self.budgets[depth - 1] == budget {
            self.chosen[depth - 1] + 1
        } else {
            0
        };
        // later mints of this budget take strictly later columns
        let end = if symmetric {
            count.saturating_sub(self.still_needed[depth])
        } else {
            count
        };
        for i in start..end {
            if self.should_stop() {
                return false;
            }
            if self.try_place(depth, i) {
                if self.descend(depth + 1) {
                    return true;
                }
                self.unplace();
            }
        }
        false
    }

    /// Pushes column `index` for mint `depth`, or leaves the state untouched
    /// and returns false if the column breaks an ordering rule or creates a
    /// collision.
    fn try_place(&mut self, depth: usize, index: usize) -> bool {
        let w = self.ctx.weighings;
        let col = self.ctx.columns.column(self.budgets[depth], index);

        let mut tied = *self.tied.last().expect("tie stack");
        if self.ctx.options.row_symmetry {
            for r in 0..w.saturating_sub(1) {
                if tied >> r & 1 == 1 {
                    if col[r] > col[r + 1] {
                        return false;
                    }
                    if col[r] < col[r + 1] {
                        tied &= !(1 << r);
                    }
                }
            }
        }
        if self.ctx.options.prune && !self.store.push(col) {
            return false;
        }
        self.tied.push(tied);
        self.chosen.push(index);
        true
    }

    fn unplace(&mut self) {
        if self.ctx.options.prune {
            self.store.pop();
        }
        self.tied.pop();
        self.chosen.pop();
    }

    fn leaf_is_valid(&self) -> bool {
        Verifier::with_cap(usize::MAX)
            .is_valid(&self.matrix(), self.ctx.options.criterion)
            .map(|r| r.valid)
            .unwrap_or(false)
    }
}
