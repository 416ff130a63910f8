//! `mint`: verify coin plans, print decision tables, search for minimal
//! plans and rebuild the table of minima.
//!
//! Exit codes: 0 valid/solved, 1 invalid plan or table mismatch, 2 usage or
//! parse error, 3 search stopped by a total or time cap.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use mint_core::corpus::{find_solution, known_value, KnownKind};
use mint_core::format::{parse_matrix, serialize_matrix, ResultRecord};
use mint_core::{
    is_valid, solve_min, CoinMatrix, Criterion, DecisionTable, SearchConfig, Status, Verifier,
};

const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAPPED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "mint",
    version,
    about = "Exact solver for the multi-weighing mint problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CriterionArg {
    Ratio,
    Collinear,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Ratio => Criterion::Ratio,
            CriterionArg::Collinear => Criterion::Collinear,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Plain,
    /// One JSON object per record.
    #[value(alias = "json")]
    Structured,
}

#[derive(clap::Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value_t = CriterionArg::Ratio)]
    criterion: CriterionArg,
    /// Give up after this total.
    #[arg(long)]
    max_total: Option<u64>,
    /// Wall-clock cap in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, env = "MINT_THREADS")]
    threads: Option<usize>,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, String> {
        let mut cfg = SearchConfig::new(self.criterion.into());
        cfg.max_total = self.max_total;
        if let Some(secs) = self.time_budget {
            cfg.time_budget =
                Some(Duration::try_from_secs_f64(secs).map_err(|e| format!("--time-budget: {e}"))?);
        }
        if let Some(n) = self.threads {
            if n == 0 {
                return Err("--threads must be at least 1".into());
            }
            cfg.worker_count = n;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check that every fault pattern of a plan has its own signature.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CriterionArg::Ratio)]
        criterion: CriterionArg,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Print the decision table of a plan.
    Decide {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = CriterionArg::Ratio)]
        criterion: CriterionArg,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Find a plan with the fewest coins for W weighings and M mints.
    Solve {
        weighings: usize,
        mints: usize,
        #[command(flatten)]
        search: SearchArgs,
        /// Do not seed the search with a published plan as upper bound.
        #[arg(long)]
        no_seed: bool,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
    /// Compute the table of minima over a grid and compare with known values.
    Table {
        /// Weighing range, e.g. `2..3` or `5`.
        #[arg(long, default_value = "2..3", value_parser = parse_range)]
        weighings: RangeInclusive<usize>,
        /// Mint range, e.g. `1..5`.
        #[arg(long, default_value = "1..5", value_parser = parse_range)]
        mints: RangeInclusive<usize>,
        /// Per-cell limits (the time budget applies to each cell).
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = Format::Plain)]
        format: Format,
    },
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("bad range `{s}`"));
    }
    Ok(lo..=hi)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify {
            file,
            criterion,
            format,
        } => cmd_verify(&file, criterion.into(), format),
        Command::Decide {
            file,
            criterion,
            format,
        } => cmd_decide(&file, criterion.into(), format),
        Command::Solve {
            weighings,
            mints,
            search,
            no_seed,
            format,
        } => cmd_solve(weighings, mints, &search, !no_seed, format),
        Command::Table {
            weighings,
            mints,
            search,
            format,
        } => cmd_table(weighings, mints, &search, format),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn load(path: &PathBuf) -> Result<CoinMatrix, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_matrix(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_verify(path: &PathBuf, criterion: Criterion, format: Format) -> Result<u8, String> {
    let started = Instant::now();
    let matrix = load(path)?;
    let report = is_valid(&matrix, criterion).map_err(|e| e.to_string())?;
    let valid_under = Verifier::default()
        .valid_under(&matrix)
        .map_err(|e| e.to_string())?;
    let record = ResultRecord {
        command: "verify".into(),
        weighings: matrix.weighings(),
        mints: matrix.mints(),
        criterion: criterion.to_string(),
        total: Some(matrix.total_coins()),
        status: if report.valid { "valid" } else { "invalid" }.into(),
        matrix: Some(matrix.to_rows()),
        conflict: report.conflict.map(|(a, b)| [a.bits(), b.bits()]),
        proven_lower_bound: None,
        valid_under: Some(valid_under.iter().map(ToString::to_string).collect()),
        elapsed_ms: started.elapsed().as_millis() as u64,
    };
    match format {
        Format::Structured => println!("{}", record.to_json()),
        Format::Plain => {
            println!("{}", record.status);
            println!("total: {}", matrix.total_coins());
            if let Some([a, b]) = &record.conflict {
                println!("conflict: {} = {}", bits(a), bits(b));
            }
        }
    }
    Ok(if report.valid { 0 } else { EXIT_INVALID })
}

fn bits(b: &[u8]) -> String {
    let parts: Vec<String> = b.iter().map(u8::to_string).collect();
    format!("({})", parts.join(","))
}

fn cmd_decide(path: &PathBuf, criterion: Criterion, format: Format) -> Result<u8, String> {
    let matrix = load(path)?;
    let table: DecisionTable = Verifier::default()
        .decision_table(&matrix, criterion)
        .map_err(|e| e.to_string())?;
    match format {
        Format::Plain => print!("{}", table.render_plain()),
        Format::Structured => print!("{}", table.render_structured()),
    }
    Ok(0)
}

fn cmd_solve(
    w: usize,
    m: usize,
    args: &SearchArgs,
    seed: bool,
    format: Format,
) -> Result<u8, String> {
    let mut cfg = args.config()?;
    if seed {
        cfg.incumbent = find_solution(w, m)
            .map(|s| s.matrix)
            .filter(|mat| is_valid(mat, cfg.criterion).is_ok_and(|r| r.valid));
    }
    let out = solve_min(w, m, &cfg).map_err(|e| e.to_string())?;
    let record = ResultRecord::from_outcome("solve", w, m, cfg.criterion, &out);
    match format {
        Format::Structured => println!("{}", record.to_json()),
        Format::Plain => {
            println!("# status: {}", out.status());
            if let Some(sol) = &out.solution {
                let maxima: Vec<String> = sol
                    .matrix
                    .column_maxima()
                    .iter()
                    .map(u64::to_string)
                    .collect();
                println!(
                    "# total: {} (column maxima {})",
                    sol.total,
                    maxima.join(" ")
                );
            }
            println!("# proven lower bound: {}", out.proven_lower_bound);
            if let Some(v) = &record.valid_under {
                println!("# valid under: {}", v.join(", "));
            }
            if out.timed_out {
                println!("# stopped by the time budget");
            }
            println!(
                "# criterion: {}, elapsed {} ms",
                cfg.criterion, record.elapsed_ms
            );
            if let Some(sol) = &out.solution {
                print!("{}", serialize_matrix(&sol.matrix));
            }
        }
    }
    Ok(if out.status() == Status::Optimal {
        0
    } else {
        EXIT_CAPPED
    })
}

#[derive(Clone, Copy)]
struct Cell {
    status: Status,
    total: Option<u64>,
    lower: u64,
}

fn cmd_table(
    ws: RangeInclusive<usize>,
    ms: RangeInclusive<usize>,
    args: &SearchArgs,
    format: Format,
) -> Result<u8, String> {
    let base = args.config()?;
    let criterion = base.criterion;
    if criterion == Criterion::Ratio && *ws.start() < 2 {
        return Err("the ratio criterion needs at least two weighings".into());
    }
    let mut cells = std::collections::BTreeMap::new();
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    let mut capped = false;

    for w in ws.clone().rev() {
        for m in ms.clone() {
            // below the diagonal C(W, M) = M; only the first row shows it
            if w > m && w != *ws.start() {
                continue;
            }
            let exact = |c: Option<&Cell>| {
                c.filter(|c| c.status == Status::Optimal)
                    .and_then(|c| c.total)
            };
            let hint = [exact(cells.get(&(w, m - 1))), exact(cells.get(&(w + 1, m)))]
                .into_iter()
                .flatten()
                .max();
            let mut cfg = base.clone();
            cfg.start_bound = hint;
            let out = solve_min(w, m, &cfg).map_err(|e| e.to_string())?;
            let cell = Cell {
                status: out.status(),
                total: out.solution.as_ref().map(|s| s.total),
                lower: out.proven_lower_bound,
            };
            capped |= cell.status != Status::Optimal;
            let record = ResultRecord::from_outcome("table", w, m, criterion, &out);
            if format == Format::Structured {
                println!("{}", record.to_json());
            }
            if let Some(v) = record
                .valid_under
                .filter(|v| v.len() < Criterion::ALL.len())
            {
                if w >= 2 {
                    notes.push(format!(
                        "C({w},{m}): the plan found is valid only under {}",
                        v.join(", ")
                    ));
                }
            }
            if let Some(known) = known_value(w, m) {
                check_cell(w, m, criterion, cell, known, &mut problems, &mut notes);
            }
            cells.insert((w, m), cell);
        }
    }

    if format == Format::Plain {
        print!("{}", render_table(&ws, &ms, &cells));
    }
    for n in &notes {
        eprintln!("note: {n}");
    }
    for p in &problems {
        eprintln!("mismatch: {p}");
    }
    Ok(if !problems.is_empty() {
        EXIT_INVALID
    } else if capped {
        EXIT_CAPPED
    } else {
        0
    })
}

fn check_cell(
    w: usize,
    m: usize,
    criterion: Criterion,
    cell: Cell,
    known: KnownKind,
    problems: &mut Vec<String>,
    notes: &mut Vec<String>,
) {
    let label = format!("C({w},{m})");
    if let Some(total) = cell.total {
        if criterion == Criterion::Ratio && !known.admits_achieved(total) {
            problems.push(format!(
                "{label}: found a plan with {total} coins, known value {known:?}"
            ));
        }
    }
    let Some(v) = known.exact() else { return };
    match (criterion, cell.status, cell.total) {
        (Criterion::Ratio, Status::Optimal, Some(t)) if t != v => {
            problems.push(format!("{label}: computed {t}, known {v}"))
        }
        (Criterion::Ratio, _, _) if cell.lower > v => problems.push(format!(
            "{label}: proven lower bound {} exceeds known {v}",
            cell.lower
        )),
        (Criterion::Collinear, _, Some(t)) if t > v && cell.status == Status::Optimal => problems
            .push(format!(
                "{label}: collinear minimum {t} exceeds ratio value {v}"
            )),
        (Criterion::Collinear, Status::Optimal, Some(t)) if t < v => notes.push(format!(
            "{label}: collinear minimum {t} is below the ratio value {v}"
        )),
        _ => {}
    }
}

fn render_table(
    ws: &RangeInclusive<usize>,
    ms: &RangeInclusive<usize>,
    cells: &std::collections::BTreeMap<(usize, usize), Cell>,
) -> String {
    let text = |c: &Cell| match (c.status, c.total) {
        (Status::Optimal, Some(t)) => t.to_string(),
        (_, Some(t)) if c.lower > 0 => format!(">{},<={t}", c.lower - 1),
        (_, Some(t)) => format!("<={t}"),
        (_, None) => format!(">{}", c.lower - 1),
    };
    let width = cells
        .values()
        .map(|c| text(c).len())
        .max()
        .unwrap_or(1)
        .max(2);
    let mut out = String::new();
    let _ = write!(out, "W\\M |");
    for m in ms.clone() {
        let _ = write!(out, " {m:>width$}");
    }
    out.push('\n');
    let _ = writeln!(out, "----+{}", "-".repeat((width + 1) * ms.clone().count()));
    for w in ws.clone() {
        let _ = write!(out, "{w:>3} |");
        for m in ms.clone() {
            let s = cells.get(&(w, m)).map(text).unwrap_or_default();
            let _ = write!(out, " {s:>width$}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..7"), Ok(2..=7));
        assert_eq!(parse_range("2..=7"), Ok(2..=7));
        assert_eq!(parse_range("5"), Ok(5..=5));
        assert!(parse_range("0..3").is_err());
        assert!(parse_range("4..3").is_err());
        assert!(parse_range("a..3").is_err());
    }

    fn check(
        criterion: Criterion,
        status: Status,
        total: Option<u64>,
        lower: u64,
        known: KnownKind,
    ) -> (usize, usize) {
        let (mut problems, mut notes) = (Vec::new(), Vec::new());
        let cell = Cell {
            status,
            total,
            lower,
        };
        check_cell(3, 5, criterion, cell, known, &mut problems, &mut notes);
        (problems.len(), notes.len())
    }

    #[test]
    fn cell_checks() {
        use Criterion::*;
        let exact = KnownKind::Exact(7);
        assert_eq!(check(Ratio, Status::Optimal, Some(7), 7, exact), (0, 0));
        assert_eq!(check(Ratio, Status::Optimal, Some(8), 8, exact), (1, 0));
        assert_eq!(check(Ratio, Status::UpperBound, Some(6), 5, exact), (1, 0));
        assert_eq!(check(Ratio, Status::Infeasible, None, 8, exact), (1, 0));
        assert_eq!(check(Ratio, Status::Infeasible, None, 7, exact), (0, 0));
        assert_eq!(check(Collinear, Status::Optimal, Some(6), 6, exact), (0, 1));
        assert_eq!(check(Collinear, Status::Optimal, Some(8), 8, exact), (1, 0));
        let open = KnownKind::Range {
            lower_exclusive: 15,
            upper_inclusive: 18,
        };
        assert_eq!(check(Ratio, Status::UpperBound, Some(15), 10, open), (1, 0));
        assert_eq!(check(Ratio, Status::UpperBound, Some(17), 10, open), (0, 0));
    }
}
