use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use collatz_octave_core::analysis::{
    audit_start, detect_episodes, RangeError, RangeSummary, StartRecord,
};
use collatz_octave_core::codebook::{
    diff_codebooks, generate_derived_codebook, Codebook, MismatchClass, DEFAULT_SAMPLE_BOUND,
};
use collatz_octave_core::kernel::{run_trajectory, Iterate, DEFAULT_STEP_CAP};
use collatz_octave_core::paths::{
    build_return_subgraph, collect_return_paths, compute_budget, cycle_weight_audit,
    visit_return_paths, GraphMode, PathDiffBuilder, ReturnSubgraph,
};
use rayon::prelude::*;

use crate::fixtures::{self, FixtureSource};
use crate::report::{self, AuditJson, SummaryLine, TrajectoryJson};
use crate::sink::Sink;
use crate::tables::{self, GridDiff};
use crate::{CliError, CommandResult};

#[derive(Debug, Parser)]
#[command(
    name = "collatz-octave",
    version,
    about = "Exact base-octave Collatz tables, paths and audits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recompute a reference table and diff it against its transcription
    Reproduce {
        #[arg(value_enum)]
        table: TableName,
        /// Start values LO..HI (table1, table2, figure2)
        #[arg(long, value_parser = parse_range)]
        range: Option<(u64, u64)>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate the derived codebook or diff it against Table A1
    Codebook {
        #[arg(value_enum)]
        action: CodebookAction,
        /// Largest octave index sampled per state
        #[arg(long, default_value_t = DEFAULT_SAMPLE_BOUND)]
        sample_bound: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Enumerate return paths, diff them against Table A2, or audit cycle weights
    Paths {
        #[arg(value_enum)]
        action: PathsAction,
        #[arg(long, alias = "graph-mode", value_enum, default_value_t = Mode::Paper)]
        mode: Mode,
        #[command(flatten)]
        common: Common,
    },
    /// Audit every start value in a range
    Audit {
        #[arg(long, value_parser = parse_range)]
        range: (u64, u64),
        /// Worker threads (default: all cores)
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Emit full trajectories with base and octave coordinates as JSON lines
    Trajectory {
        #[arg(long, value_parser = parse_range)]
        range: (u64, u64),
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
    /// Export the eight-vertex base transition graph
    GraphExport {
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Directory holding the table CSVs (default: bundled copies)
    #[arg(long)]
    pub fixture_dir: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STEP_CAP)]
    pub step_cap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableName {
    Table1,
    Table2,
    #[value(name = "tableB1", alias = "table-b1", alias = "tableb1")]
    TableB1,
    Figure2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodebookAction {
    Generate,
    Diff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathsAction {
    Enumerate,
    Diff,
    Cycles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Paper,
    Derived,
}

impl From<Mode> for GraphMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Paper => GraphMode::Paper,
            Mode::Derived => GraphMode::Derived,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
    Dot,
}

/// `LO..HI` (inclusive), `LO..=HI`, or a single value.
pub fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let bad = |e: std::num::ParseIntError| format!("`{s}`: {e}");
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s, s),
    };
    Ok((
        lo.trim().parse().map_err(bad)?,
        hi.trim().parse().map_err(bad)?,
    ))
}

fn check_range((lo, hi): (u64, u64)) -> Result<std::ops::RangeInclusive<u64>, CliError> {
    if lo == 0 || lo > hi {
        return Err(RangeError::Invalid { lo, hi }.into());
    }
    Ok(lo..=hi)
}

fn expect_format(got: Format, allowed: &[Format], command: &str) -> Result<(), CliError> {
    if allowed.contains(&got) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{command} does not support --format {}",
            got.to_possible_value()
                .expect("no skipped variants")
                .get_name()
        )))
    }
}

/// Writes through an atomic sink and records the artifact.
fn emit<T>(
    path: Option<&Path>,
    result: &mut CommandResult,
    f: impl FnOnce(&mut Sink) -> Result<T, CliError>,
) -> Result<T, CliError> {
    let io = |source| CliError::Io {
        path: path.map(Path::to_path_buf),
        source,
    };
    let mut sink = Sink::open(path).map_err(io)?;
    let value = f(&mut sink)?;
    if let Some(p) = sink.commit().map_err(io)? {
        result.artifacts.push(p);
    }
    Ok(value)
}

/// `out.csv` -> `out.diff.csv`.
fn diff_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map_or("out".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.diff.csv"))
}

/// Diff rows go next to the table when it is written to a file, otherwise to
/// stderr.
fn emit_grid_diff(
    name: &str,
    diff: &GridDiff,
    out: Option<&Path>,
    result: &mut CommandResult,
) -> Result<(), CliError> {
    result.notes.push(format!(
        "{name}: {} cells compared, {} blank in transcription, {} mismatches",
        diff.compared,
        diff.skipped,
        diff.cells.len()
    ));
    match out {
        Some(out) => {
            let path = diff_path(out);
            emit(Some(&path), result, |s| Ok(tables::write_diff(diff, s)?))?;
        }
        None if !diff.cells.is_empty() => tables::write_diff(diff, std::io::stderr())?,
        None => {}
    }
    result.finding(!diff.cells.is_empty());
    Ok(())
}

pub fn run(cli: Cli) -> Result<CommandResult, CliError> {
    let mut result = CommandResult::default();
    match cli.command {
        Command::Reproduce {
            table,
            range,
            common,
        } => reproduce(table, range, &common, &mut result)?,
        Command::Codebook {
            action,
            sample_bound,
            common,
        } => codebook(action, sample_bound, &common, &mut result)?,
        Command::Paths {
            action,
            mode,
            common,
        } => paths(action, mode.into(), &common, &mut result)?,
        Command::Audit {
            range,
            jobs,
            format,
            common,
        } => audit(range, jobs, format, &common, &mut result)?,
        Command::Trajectory {
            range,
            format,
            common,
        } => {
            expect_format(format, &[Format::Jsonl], "trajectory")?;
            trajectory(range, &common, &mut result)?
        }
        Command::GraphExport { format, common } => {
            expect_format(format, &[Format::Dot], "graph-export")?;
            emit(common.out.as_deref(), &mut result, |s| {
                Ok(report::write_dot(s)?)
            })?;
            result
                .notes
                .push("graph-export: 8 vertices, 16 edges".into());
        }
    }
    Ok(result)
}

fn fixture_source(common: &Common) -> Result<FixtureSource, CliError> {
    match &common.fixture_dir {
        None => Ok(FixtureSource::Bundled),
        Some(dir) if dir.is_dir() => Ok(FixtureSource::Dir(dir.clone())),
        Some(dir) => Err(CliError::Usage(format!(
            "fixture directory {} does not exist",
            dir.display()
        ))),
    }
}

fn reproduce(
    table: TableName,
    range: Option<(u64, u64)>,
    common: &Common,
    result: &mut CommandResult,
) -> Result<(), CliError> {
    let out = common.out.as_deref();
    let cap = common.step_cap;
    let src = fixture_source(common)?;
    match table {
        TableName::Table1 => {
            let starts: Vec<u64> = check_range(range.unwrap_or((1, 19)))?.collect();
            let grid = tables::table1(&starts, cap)?;
            emit(out, result, |s| Ok(fixtures::write_grid(&grid, s)?))?;
            let diff = tables::diff_grid(&grid, &src.table1()?, 1);
            emit_grid_diff("table1", &diff, out, result)?;
        }
        TableName::Table2 => {
            let hs = check_range(range.unwrap_or((1, 16)))?;
            let rows = tables::table2(hs.clone())?;
            emit(out, result, |s| Ok(fixtures::write_table2(&rows, s)?))?;
            let paper: Vec<_> = src
                .table2()?
                .into_iter()
                .filter(|r| hs.contains(&r.h))
                .collect();
            let diff = tables::diff_table2(&paper)?;
            emit_grid_diff("table2", &diff, out, result)?;
        }
        TableName::TableB1 => {
            if range.is_some() {
                return Err(CliError::Usage(
                    "tableB1 has a fixed layout; --range is not accepted".into(),
                ));
            }
            let grid = tables::table_b1(16, 10, cap)?;
            emit(out, result, |s| Ok(fixtures::write_grid(&grid, s)?))?;
            let diff = tables::diff_grid(&grid, &src.table_b1()?, 2);
            emit_grid_diff("tableB1", &diff, out, result)?;
        }
        TableName::Figure2 => {
            let starts = check_range(range.unwrap_or((1639, 1639)))?;
            emit(out, result, |s| tables::write_figure2(starts, cap, s))?;
        }
    }
    Ok(())
}

fn codebook(
    action: CodebookAction,
    sample_bound: u64,
    common: &Common,
    result: &mut CommandResult,
) -> Result<(), CliError> {
    let derived = generate_derived_codebook(sample_bound);
    let out = common.out.as_deref();
    match action {
        CodebookAction::Generate => {
            emit(out, result, |s| Ok(fixtures::write_codebook(&derived, s)?))?;
            result.notes.push(format!(
                "codebook: {} rows, {} warnings",
                derived.len(),
                derived.warnings().len()
            ));
            for w in derived.warnings() {
                result.notes.push(format!("warning: {w:?}"));
            }
            result.finding(!derived.warnings().is_empty());
        }
        CodebookAction::Diff => {
            let paper = fixture_source(common)?.codebook()?;
            let diff = diff_codebooks(&derived, &paper);
            emit(out, result, |s| Ok(report::write_codebook_diff(&diff, s)?))?;
            result.notes.push(format!(
                "codebook diff: {} structural, {} successor-bit, {} budget mismatches; {} unmatched rows",
                diff.count(MismatchClass::Structural),
                diff.count(MismatchClass::SuccessorBit),
                diff.count(MismatchClass::Budget),
                diff.unmatched_derived.len() + diff.unmatched_paper.len(),
            ));
            result.finding(!diff.is_empty());
        }
    }
    Ok(())
}

pub fn load_graph(mode: GraphMode, src: &FixtureSource) -> Result<ReturnSubgraph, CliError> {
    let book: Codebook = match mode {
        GraphMode::Paper => src.codebook()?,
        GraphMode::Derived => generate_derived_codebook(DEFAULT_SAMPLE_BOUND),
    };
    Ok(build_return_subgraph(&book, mode)?)
}

fn paths(
    action: PathsAction,
    mode: GraphMode,
    common: &Common,
    result: &mut CommandResult,
) -> Result<(), CliError> {
    let src = fixture_source(common)?;
    let g = load_graph(mode, &src)?;
    let out = common.out.as_deref();
    let label = mode.label();
    match action {
        PathsAction::Enumerate => {
            let (arena, log) = collect_return_paths(&g);
            let positive = emit(out, result, |s| Ok(report::write_paths(&g, &arena, s)?))?;
            result.notes.push(format!(
                "paths ({label}): {} simple return paths, {positive} with positive net budget, {} revisit prunes",
                arena.len(),
                log.prunes
            ));
            result.finding(positive > 0);
        }
        PathsAction::Diff => {
            let rows = fixtures::table_rows(&src.table_a2()?)?;
            let n_rows = rows.len();
            let mut builder = PathDiffBuilder::new(rows, true);
            visit_return_paths(&g, &mut |p: &[u8]| {
                builder.observe(g.base_sequence(p), &compute_budget(&g, p));
            });
            let diff = builder.finish();
            let findings = emit(out, result, |s| {
                Ok(report::write_path_diff(&diff, mode, s)?)
            })?;
            result.notes.push(format!(
                "paths diff ({label}): {} of {n_rows} table rows matched, {} enumerated paths, {} extra sequences, {} positive nets, {findings} findings",
                diff.matched.len(),
                diff.summary.paths,
                diff.extra_sequences.len(),
                diff.summary.positive(),
            ));
            result.finding(findings > 0);
        }
        PathsAction::Cycles => {
            let audit = cycle_weight_audit(&g);
            emit(out, result, |s| Ok(report::write_cycles(&g, &audit, s)?))?;
            let positive = audit.positive().count();
            let nonzero_one_two = audit.one_two().filter(|c| c.weight != 0).count();
            let nonzero_eight = audit.eight_loops().filter(|c| c.weight != 0).count();
            result.notes.push(format!(
                "cycles ({label}): {} elementary cycles, {positive} positive, {nonzero_one_two} nonzero 1<->2, {nonzero_eight} nonzero 8->8",
                audit.cycles.len()
            ));
            result.finding(positive + nonzero_one_two + nonzero_eight > 0);
        }
    }
    Ok(())
}

const AUDIT_CHUNK: u64 = 4096;

fn audit(
    range: (u64, u64),
    jobs: Option<usize>,
    format: Format,
    common: &Common,
    result: &mut CommandResult,
) -> Result<(), CliError> {
    expect_format(format, &[Format::Jsonl, Format::Csv], "audit")?;
    let range = check_range(range)?;
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()?;
    let cap = common.step_cap;
    let summary = emit(common.out.as_deref(), result, |sink| match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(report::AUDIT_CSV_HEADER)?;
            let summary = audit_chunks(&range, &pool, cap, |records| {
                for r in records {
                    w.write_record(report::audit_csv_row(r))?;
                }
                Ok(())
            })?;
            w.flush()?;
            Ok(summary)
        }
        _ => {
            let summary = audit_chunks(&range, &pool, cap, |records| {
                for r in records {
                    serde_json::to_writer(&mut *sink, &AuditJson::from(r))?;
                    sink.write_all(b"\n")?;
                }
                Ok(())
            })?;
            serde_json::to_writer(
                &mut *sink,
                &SummaryLine {
                    summary: (&summary).into(),
                },
            )?;
            sink.write_all(b"\n")?;
            Ok(summary)
        }
    })?;
    result.notes.push(format!(
        "audit {}..{}: {} starts, {} terminated, {} cap-exhausted, {} episodes (max t = {}), {} guaranteed-property failures, {} of {} valuation checks fail",
        range.start(),
        range.end(),
        summary.starts,
        summary.terminated,
        summary.cap_exhausted.len(),
        summary.episodes,
        summary.max_episode_length,
        summary.failures() - summary.cap_exhausted.len() as u64,
        summary.valuation_violations,
        summary.valuation_checks,
    ));
    result.finding(summary.failures() > 0);
    Ok(())
}

/// Audits the range in fixed-size chunks on `pool`, handing each chunk's
/// records to `write` in start order.
fn audit_chunks(
    range: &std::ops::RangeInclusive<u64>,
    pool: &rayon::ThreadPool,
    cap: usize,
    mut write: impl FnMut(&[StartRecord]) -> Result<(), CliError>,
) -> Result<RangeSummary, CliError> {
    let mut summary = RangeSummary::default();
    let (mut start, hi) = (*range.start(), *range.end());
    loop {
        let end = hi.min(start.saturating_add(AUDIT_CHUNK - 1));
        let records = pool.install(|| {
            (start..=end)
                .into_par_iter()
                .map(|h| audit_start(&Iterate::from_u64(h)?, cap))
                .collect::<Result<Vec<_>, _>>()
        })?;
        let part = pool.install(|| {
            records
                .par_iter()
                .map(RangeSummary::from_record)
                .reduce(RangeSummary::default, RangeSummary::merge)
        });
        summary = summary.merge(part);
        write(&records)?;
        if end == hi {
            return Ok(summary);
        }
        start = end + 1;
    }
}

fn trajectory(
    range: (u64, u64),
    common: &Common,
    result: &mut CommandResult,
) -> Result<(), CliError> {
    let range = check_range(range)?;
    let cap = common.step_cap;
    let unfinished = emit(common.out.as_deref(), result, |sink| {
        let mut unfinished = 0u64;
        for h in range {
            let traj = run_trajectory(&Iterate::from_u64(h)?, cap)?;
            unfinished += !traj.terminated() as u64;
            let mut line =
                serde_json::to_vec(&TrajectoryJson::new(&traj, &detect_episodes(&traj)))?;
            line.push(b'\n');
            sink.write_all(&line)?;
        }
        Ok(unfinished)
    })?;
    if unfinished > 0 {
        result.notes.push(format!(
            "trajectory: {unfinished} start values hit the step cap"
        ));
    }
    result.finding(unfinished > 0);
    Ok(())
}
