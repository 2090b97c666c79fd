//! CSV fixtures: the reference tables transcribed verbatim, their parsers and
//! the matching writers.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use collatz_octave_core::codebook::{
    Codebook, CodebookRow, DriftType, Flags, MaxPersist, Provenance,
};
use collatz_octave_core::octave::V2Class;
use collatz_octave_core::paths::{Budget, TableRow};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TABLE_A1: &str = "table_a1.csv";
pub const TABLE_A2: &str = "table_a2.csv";
pub const TABLE_1: &str = "table1.csv";
pub const TABLE_2: &str = "table2.csv";
pub const TABLE_B1: &str = "table_b1.csv";

const BUNDLED: [(&str, &str); 5] = [
    (TABLE_A1, include_str!("../fixtures/table_a1.csv")),
    (TABLE_A2, include_str!("../fixtures/table_a2.csv")),
    (TABLE_1, include_str!("../fixtures/table1.csv")),
    (TABLE_2, include_str!("../fixtures/table2.csv")),
    (TABLE_B1, include_str!("../fixtures/table_b1.csv")),
];

pub const A1_HEADER: [&str; 22] = [
    "StateID_128",
    "B",
    "s_b",
    "s_c",
    "s_a",
    "s_q",
    "s_r",
    "OutcomeID",
    "v2_class",
    "max_persist",
    "drift_type",
    "NextB",
    "next_sb",
    "next_sc",
    "next_sa",
    "next_sq",
    "next_sr",
    "IsS7persist",
    "IsEntry67",
    "IsExit73",
    "v2_consumed",
    "v2_possible_gain",
];

pub const A2_HEADER: [&str; 11] = [
    "Path",
    "Sequence",
    "Type",
    "Length",
    "Even_Steps",
    "Odd_Steps",
    "v2_Consumed",
    "v2_Max_Gain",
    "Entry_Cost",
    "Net_Budget",
    "Verdict",
];

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        source: std::io::Error,
    },
    #[error("{file}: {source}")]
    Csv { file: String, source: csv::Error },
    #[error("{file}: header mismatch, expected `{expected}`, found `{found}`")]
    Header {
        file: String,
        expected: String,
        found: String,
    },
    #[error("{file}: row {row}, column {column}: {message}")]
    Cell {
        file: String,
        row: usize,
        column: String,
        message: String,
    },
}

impl FixtureError {
    fn cell(file: &str, row: usize, column: &str, message: impl Into<String>) -> Self {
        FixtureError::Cell {
            file: file.into(),
            row,
            column: column.into(),
            message: message.into(),
        }
    }

    fn csv(file: &str, source: csv::Error) -> Self {
        FixtureError::Csv {
            file: file.into(),
            source,
        }
    }
}

/// Where fixtures come from: the copies compiled into the binary, or a
/// directory given on the command line.
#[derive(Debug, Clone, Default)]
pub enum FixtureSource {
    #[default]
    Bundled,
    Dir(PathBuf),
}

impl FixtureSource {
    pub fn read(&self, name: &str) -> Result<String, FixtureError> {
        match self {
            FixtureSource::Bundled => Ok(BUNDLED
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, text)| (*text).to_string())
                .expect("bundled fixture names are fixed")),
            FixtureSource::Dir(dir) => {
                let path = dir.join(name);
                fs::read_to_string(&path).map_err(|source| FixtureError::Io {
                    file: path.display().to_string(),
                    source,
                })
            }
        }
    }

    pub fn codebook(&self) -> Result<Codebook, FixtureError> {
        parse_codebook(
            self.read(TABLE_A1)?.as_bytes(),
            TABLE_A1,
            Provenance::PaperFixture,
        )
    }

    pub fn table_a2(&self) -> Result<Vec<A2Row>, FixtureError> {
        parse_table_a2(self.read(TABLE_A2)?.as_bytes())
    }

    pub fn table1(&self) -> Result<Grid, FixtureError> {
        parse_grid(self.read(TABLE_1)?.as_bytes(), TABLE_1)
    }

    pub fn table2(&self) -> Result<Vec<Table2Row>, FixtureError> {
        parse_table2(self.read(TABLE_2)?.as_bytes())
    }

    pub fn table_b1(&self) -> Result<Grid, FixtureError> {
        parse_grid(self.read(TABLE_B1)?.as_bytes(), TABLE_B1)
    }
}

fn check_header<R: Read>(
    rdr: &mut csv::Reader<R>,
    expected: &[&str],
    file: &str,
) -> Result<(), FixtureError> {
    let found = rdr.headers().map_err(|e| FixtureError::csv(file, e))?;
    if found.iter().ne(expected.iter().copied()) {
        return Err(FixtureError::Header {
            file: file.into(),
            expected: expected.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    Ok(())
}

/// One Table A1 line as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct A1Record {
    #[serde(rename = "StateID_128")]
    pub state_id: String,
    #[serde(rename = "B")]
    pub b: u8,
    pub s_b: u8,
    pub s_c: u8,
    pub s_a: u8,
    pub s_q: u8,
    pub s_r: u8,
    #[serde(rename = "OutcomeID")]
    pub outcome_id: u8,
    pub v2_class: String,
    pub max_persist: String,
    pub drift_type: String,
    #[serde(rename = "NextB")]
    pub next_b: u8,
    pub next_sb: u8,
    pub next_sc: u8,
    pub next_sa: u8,
    pub next_sq: u8,
    pub next_sr: u8,
    #[serde(rename = "IsS7persist")]
    pub is_s7_persist: String,
    #[serde(rename = "IsEntry67")]
    pub is_entry67: String,
    #[serde(rename = "IsExit73")]
    pub is_exit73: String,
    pub v2_consumed: u8,
    pub v2_possible_gain: u8,
}

const FLAG_PERSIST: &str = "YES";
const FLAG_ENTRY: &str = "ENTRY";
const FLAG_EXIT: &str = "EXIT";

fn parse_flag(
    cell: &str,
    marker: &str,
    row: usize,
    column: &str,
    file: &str,
) -> Result<bool, FixtureError> {
    match cell.trim() {
        "" => Ok(false),
        c if c == marker => Ok(true),
        other => Err(FixtureError::cell(
            file,
            row,
            column,
            format!("expected `{marker}` or empty, found `{other}`"),
        )),
    }
}

impl A1Record {
    pub fn from_row(r: &CodebookRow) -> Self {
        let flag = |on: bool, marker: &str| {
            if on {
                marker.to_string()
            } else {
                String::new()
            }
        };
        A1Record {
            state_id: r.state_id.clone(),
            b: r.b,
            s_b: r.s_b,
            s_c: r.s_c,
            s_a: r.s_a,
            s_q: r.s_q,
            s_r: r.s_r,
            outcome_id: r.outcome_id,
            v2_class: r.v2_class.label().into(),
            max_persist: r.max_persist.label(),
            drift_type: r.drift.label().into(),
            next_b: r.next_b,
            next_sb: r.next_sb,
            next_sc: r.next_sc,
            next_sa: r.next_sa,
            next_sq: r.next_sq,
            next_sr: r.next_sr,
            is_s7_persist: flag(r.flags.persist, FLAG_PERSIST),
            is_entry67: flag(r.flags.entry67, FLAG_ENTRY),
            is_exit73: flag(r.flags.exit73, FLAG_EXIT),
            v2_consumed: r.v2_consumed,
            v2_possible_gain: r.v2_possible_gain,
        }
    }

    pub fn into_row(self, row: usize, file: &str) -> Result<CodebookRow, FixtureError> {
        let v2_class = V2Class::parse(&self.v2_class).ok_or_else(|| {
            FixtureError::cell(
                file,
                row,
                "v2_class",
                format!("unknown class `{}`", self.v2_class),
            )
        })?;
        let max_persist = MaxPersist::parse(&self.max_persist).ok_or_else(|| {
            FixtureError::cell(
                file,
                row,
                "max_persist",
                format!("unknown value `{}`", self.max_persist),
            )
        })?;
        let drift = DriftType::parse(&self.drift_type).ok_or_else(|| {
            FixtureError::cell(
                file,
                row,
                "drift_type",
                format!("unknown drift `{}`", self.drift_type),
            )
        })?;
        let flags = Flags {
            persist: parse_flag(&self.is_s7_persist, FLAG_PERSIST, row, "IsS7persist", file)?,
            entry67: parse_flag(&self.is_entry67, FLAG_ENTRY, row, "IsEntry67", file)?,
            exit73: parse_flag(&self.is_exit73, FLAG_EXIT, row, "IsExit73", file)?,
        };
        Ok(CodebookRow {
            state_id: self.state_id,
            b: self.b,
            s_b: self.s_b,
            s_c: self.s_c,
            s_a: self.s_a,
            s_q: self.s_q,
            s_r: self.s_r,
            outcome_id: self.outcome_id,
            v2_class,
            max_persist,
            drift,
            next_b: self.next_b,
            next_sb: self.next_sb,
            next_sc: self.next_sc,
            next_sa: self.next_sa,
            next_sq: self.next_sq,
            next_sr: self.next_sr,
            flags,
            v2_consumed: self.v2_consumed,
            v2_possible_gain: self.v2_possible_gain,
        })
    }
}

pub fn parse_codebook<R: Read>(
    input: R,
    file: &str,
    provenance: Provenance,
) -> Result<Codebook, FixtureError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &A1_HEADER, file)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<A1Record>().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| FixtureError::csv(file, e))?;
        rows.push(rec.into_row(row, file)?);
    }
    Codebook::from_rows(rows, provenance).map_err(|e| match e {
        collatz_octave_core::codebook::CodebookError::NotABit { row, column, value } => {
            FixtureError::cell(file, row, column, format!("expected 0 or 1, found {value}"))
        }
        collatz_octave_core::codebook::CodebookError::State { row, source } => {
            FixtureError::cell(file, row, "B", source.to_string())
        }
    })
}

pub fn write_codebook<W: Write>(book: &Codebook, out: W) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(A1_HEADER)?;
    for r in book.rows() {
        w.serialize(A1Record::from_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// One Table A2 line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct A2Row {
    #[serde(rename = "Path")]
    pub path: u32,
    #[serde(rename = "Sequence")]
    pub sequence: String,
    #[serde(rename = "Type")]
    pub kind: String,
    #[serde(rename = "Length")]
    pub length: u32,
    #[serde(rename = "Even_Steps")]
    pub even_steps: u32,
    #[serde(rename = "Odd_Steps")]
    pub odd_steps: u32,
    #[serde(rename = "v2_Consumed")]
    pub v2_consumed: u32,
    #[serde(rename = "v2_Max_Gain")]
    pub v2_max_gain: u32,
    #[serde(rename = "Entry_Cost")]
    pub entry_cost: u32,
    #[serde(rename = "Net_Budget")]
    pub net_budget: i64,
    #[serde(rename = "Verdict")]
    pub verdict: String,
}

/// Parses `7→3→1→6 (note)` into `[7, 3, 1, 6, 7]`; the re-entry 7 is
/// implied by the table.
pub fn parse_sequence(s: &str) -> Option<Vec<u8>> {
    let body = s.split('(').next()?.trim();
    let mut seq = body
        .split(['→', '>'])
        .map(|t| t.trim().trim_end_matches('-').trim())
        .map(|t| t.parse::<u8>().ok().filter(|b| (1..=8).contains(b)))
        .collect::<Option<Vec<u8>>>()?;
    if seq.len() < 2 {
        return None;
    }
    seq.push(7);
    Some(seq)
}

/// `[7, 3, 1, 6, 7]` back to `7→3→1→6`.
pub fn format_sequence(seq: &[u8]) -> String {
    let body = if seq.last() == Some(&7) && seq.len() > 1 {
        &seq[..seq.len() - 1]
    } else {
        seq
    };
    body.iter()
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join("→")
}

impl A2Row {
    pub fn to_table_row(&self, row: usize) -> Result<TableRow, FixtureError> {
        let base_sequence = parse_sequence(&self.sequence).ok_or_else(|| {
            FixtureError::cell(
                TABLE_A2,
                row,
                "Sequence",
                format!("cannot parse `{}`", self.sequence),
            )
        })?;
        Ok(TableRow {
            id: self.path,
            base_sequence,
            budget: Budget {
                length: self.length,
                even_steps: self.even_steps,
                odd_steps: self.odd_steps,
                v2_consumed: self.v2_consumed,
                v2_max_gain: self.v2_max_gain,
                entry_cost: self.entry_cost,
                net_budget: self.net_budget,
            },
        })
    }
}

pub fn parse_table_a2<R: Read>(input: R) -> Result<Vec<A2Row>, FixtureError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &A2_HEADER, TABLE_A2)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize::<A2Row>().enumerate() {
        let rec: A2Row = rec.map_err(|e| FixtureError::csv(TABLE_A2, e))?;
        rec.to_table_row(i + 1)?;
        rows.push(rec);
    }
    Ok(rows)
}

pub fn table_rows(rows: &[A2Row]) -> Result<Vec<TableRow>, FixtureError> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| r.to_table_row(i + 1))
        .collect()
}

/// A labelled grid of cells, as in Tables 1 and B1. The first `key_columns`
/// columns label each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Placeholder for values after the first 1.
pub const DASH: &str = "—";

pub fn parse_grid<R: Read>(input: R, file: &str) -> Result<Grid, FixtureError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| FixtureError::csv(file, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| FixtureError::csv(file, e))?;
        rows.push(rec.iter().map(|c| c.trim().to_string()).collect());
    }
    Ok(Grid { header, rows })
}

pub fn write_grid<W: Write>(grid: &Grid, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&grid.header)?;
    for r in &grid.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const TABLE2_HEADER: [&str; 13] = [
    "A",
    "s_a",
    "h",
    "B",
    "k_b",
    "s_b",
    "parity_change",
    "h_next",
    "B_next",
    "k_b_next",
    "s_b_next",
    "A_next",
    "s_a_next",
];

/// One Table 2 line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Row {
    #[serde(rename = "A")]
    pub a: u64,
    pub s_a: u8,
    pub h: u64,
    #[serde(rename = "B")]
    pub b: u8,
    pub k_b: u8,
    pub s_b: u8,
    pub parity_change: String,
    pub h_next: u64,
    #[serde(rename = "B_next")]
    pub b_next: u8,
    pub k_b_next: u64,
    pub s_b_next: u8,
    #[serde(rename = "A_next")]
    pub a_next: u64,
    pub s_a_next: u8,
}

pub fn parse_table2<R: Read>(input: R) -> Result<Vec<Table2Row>, FixtureError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &TABLE2_HEADER, TABLE_2)?;
    rdr.deserialize()
        .map(|r| r.map_err(|e| FixtureError::csv(TABLE_2, e)))
        .collect()
}

pub fn write_table2<W: Write>(rows: &[Table2Row], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Checks that a fixture directory holds every file the commands may need.
pub fn missing_files(dir: &Path) -> Vec<&'static str> {
    [TABLE_A1, TABLE_A2, TABLE_1, TABLE_2, TABLE_B1]
        .into_iter()
        .filter(|f| !dir.join(f).is_file())
        .collect()
}
