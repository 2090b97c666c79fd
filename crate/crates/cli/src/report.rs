//! Record types and writers for paths, cycles, codebook diffs, audits and
//! the base graph.

use std::io::{self, Read, Write};
use std::str::FromStr;

use collatz_octave_core::analysis::{Episode, RangeSummary, StartRecord};
use collatz_octave_core::codebook::CodebookDiff;
use collatz_octave_core::kernel::Trajectory;
use collatz_octave_core::octave::to_base_octave;
use collatz_octave_core::paths::{
    compute_budget, CycleAudit, GraphMode, PathArena, PathDiff, ReturnSubgraph,
};
use collatz_octave_core::rules::selection_rules;
use serde::{Deserialize, Serialize};
use serde_json::Number;

use crate::fixtures::format_sequence;

/// Exact integer as a JSON number of any size.
fn num(x: impl ToString) -> Number {
    Number::from_str(&x.to_string()).expect("integers are valid JSON numbers")
}

pub fn verdict(net: i64) -> &'static str {
    if net <= 0 {
        "contracts"
    } else {
        "expands"
    }
}

/// Short vertex name: `B s_a s_q s_r`, plus `:ID` for row vertices.
pub fn vertex_name(g: &ReturnSubgraph, v: u8) -> String {
    let vx = g.vertex(v);
    let s = vx.state;
    let mut name = format!("{}{}{}{}", s.b(), s.s_a(), s.s_q(), s.s_r());
    if g.mode() == GraphMode::Paper {
        if let Some(id) = vx
            .label
            .rsplit("_ID")
            .next()
            .filter(|_| vx.label.contains("_ID"))
        {
            name.push(':');
            name.push_str(id);
        }
    }
    name
}

pub const PATH_HEADER: [&str; 14] = [
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
    "Mode",
    "Net_Include_Exit",
    "Vertices",
];

/// One enumerated return path: the Table A2 columns plus provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    #[serde(rename = "Path")]
    pub path: u64,
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
    #[serde(rename = "Mode")]
    pub mode: String,
    #[serde(rename = "Net_Include_Exit")]
    pub net_include_exit: i64,
    #[serde(rename = "Vertices")]
    pub vertices: String,
}

/// Writes every stored path in deterministic order. Returns the number of
/// paths with a positive net budget.
pub fn write_paths<W: Write>(
    g: &ReturnSubgraph,
    arena: &PathArena,
    out: W,
) -> Result<u64, csv::Error> {
    use std::fmt::Write as _;

    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(PATH_HEADER)?;
    let names: Vec<String> = (0..g.vertices().len() as u8)
        .map(|v| vertex_name(g, v))
        .collect();
    let mode = g.mode().label();
    let (mut seq, mut verts) = (String::new(), String::new());
    let mut positive = 0;
    for (n, i) in arena.sorted_order(g).into_iter().enumerate() {
        let path = arena.get(i);
        let b = compute_budget(g, path);
        let t = b.table;
        positive += (t.net_budget > 0) as u64;
        seq.clear();
        verts.clear();
        for (k, &v) in path.iter().enumerate() {
            if k > 0 {
                seq.push('→');
                verts.push(' ');
            }
            write!(seq, "{}", g.base(v)).expect("writing to a String");
            verts.push_str(&names[v as usize]);
        }
        w.write_record([
            (n + 1).to_string().as_str(),
            &seq,
            "simple",
            &t.length.to_string(),
            &t.even_steps.to_string(),
            &t.odd_steps.to_string(),
            &t.v2_consumed.to_string(),
            &t.v2_max_gain.to_string(),
            &t.entry_cost.to_string(),
            &t.net_budget.to_string(),
            verdict(t.net_budget),
            mode,
            &b.include_exit.net_budget.to_string(),
            &verts,
        ])?;
    }
    w.flush()?;
    Ok(positive)
}

pub fn read_paths<R: Read>(input: R) -> Result<Vec<PathRecord>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_path_diff<W: Write>(
    diff: &PathDiff,
    mode: GraphMode,
    out: W,
) -> Result<usize, csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "kind", "row", "sequence", "column", "expected", "table", "paths", "mode",
    ])?;
    let mut findings = 0;
    let mut row = |w: &mut csv::Writer<W>, fields: [String; 7]| -> Result<(), csv::Error> {
        findings += 1;
        w.write_record(fields.iter().map(String::as_str).chain([mode.label()]))
    };
    for id in &diff.unmatched {
        row(
            &mut w,
            [
                "unmatched-row".into(),
                id.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "0".into(),
            ],
        )?;
    }
    for id in &diff.identity_failures {
        row(
            &mut w,
            [
                "row-identity".into(),
                id.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ],
        )?;
    }
    for d in &diff.discrepancies {
        row(
            &mut w,
            [
                "column".into(),
                d.row.to_string(),
                String::new(),
                d.column.into(),
                d.expected.to_string(),
                d.table.to_string(),
                String::new(),
            ],
        )?;
    }
    for (seq, count) in &diff.extra_sequences {
        row(
            &mut w,
            [
                "extra-sequence".into(),
                String::new(),
                format_sequence(seq),
                String::new(),
                String::new(),
                String::new(),
                count.to_string(),
            ],
        )?;
    }
    if diff.extra_sequences.is_empty() && diff.extra_paths > 0 {
        row(
            &mut w,
            [
                "extra-paths".into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                diff.extra_paths.to_string(),
            ],
        )?;
    }
    for (net, count) in diff.summary.net_histogram.range(1..) {
        row(
            &mut w,
            [
                "positive-net".into(),
                String::new(),
                String::new(),
                "Net_Budget".into(),
                "<=0".into(),
                net.to_string(),
                count.to_string(),
            ],
        )?;
    }
    w.flush()?;
    Ok(findings)
}

pub const CYCLE_HEADER: [&str; 6] = [
    "Cycle", "Sequence", "Length", "Weight", "Verdict", "Vertices",
];

pub fn write_cycles<W: Write>(
    g: &ReturnSubgraph,
    audit: &CycleAudit,
    out: W,
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CYCLE_HEADER)?;
    for (i, c) in audit.cycles.iter().enumerate() {
        let seq = c
            .base_sequence
            .iter()
            .chain(c.base_sequence.first())
            .map(u8::to_string)
            .collect::<Vec<_>>()
            .join("→");
        w.write_record([
            (i + 1).to_string(),
            seq,
            c.vertices.len().to_string(),
            c.weight.to_string(),
            if c.weight <= 0 {
                "non-positive"
            } else {
                "positive"
            }
            .to_string(),
            c.vertices
                .iter()
                .map(|&v| vertex_name(g, v))
                .collect::<Vec<_>>()
                .join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_codebook_diff<W: Write>(diff: &CodebookDiff, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "class",
        "column",
        "derived_row",
        "paper_row",
        "match_rule",
        "derived",
        "paper",
    ])?;
    for m in &diff.mismatches {
        let rule = diff
            .pairings
            .iter()
            .find(|p| p.derived_id == m.derived_id && p.paper_id == m.paper_id)
            .map_or("", |p| p.rule.label());
        w.write_record([
            m.class.label(),
            m.column,
            &m.derived_id,
            &m.paper_id,
            rule,
            &m.derived,
            &m.paper,
        ])?;
    }
    for id in &diff.unmatched_derived {
        w.write_record(["structural", "row", id, "", "", "present", "missing"])?;
    }
    for id in &diff.unmatched_paper {
        w.write_record(["structural", "row", "", id, "", "missing", "present"])?;
    }
    w.flush()?;
    Ok(())
}

/// The base graph in DOT, one edge per selection rule.
pub fn write_dot<W: Write>(mut out: W) -> io::Result<()> {
    writeln!(out, "digraph base_transitions {{")?;
    for b in 1..=8 {
        writeln!(out, "  B{b} [label=\"{b}\"];")?;
    }
    for r in selection_rules() {
        let sign = if r.affine.c < 0 { '-' } else { '+' };
        writeln!(
            out,
            "  B{} -> B{} [parity=\"{}\", s_a={}, update=\"A' = ({}A {} {})/{}\"];",
            r.from.get(),
            r.to.get(),
            r.parity_label(),
            r.s_a,
            r.affine.m,
            sign,
            r.affine.c.unsigned_abs(),
            1u32 << r.affine.r,
        )?;
    }
    writeln!(out, "}}")
}

#[derive(Debug, Serialize)]
pub struct EpisodeJson {
    pub start_index: usize,
    pub entry_value: Number,
    #[serde(rename = "entry_A")]
    pub entry_a: Number,
    pub v2: u64,
    pub t: u64,
    pub exit_index: Option<usize>,
    pub exit_value: Option<Number>,
}

impl From<&Episode> for EpisodeJson {
    fn from(e: &Episode) -> Self {
        EpisodeJson {
            start_index: e.start_index,
            entry_value: num(&e.entry_value),
            entry_a: num(&e.entry_a),
            v2: e.entry_v2,
            t: e.length,
            exit_index: e.exit_index,
            exit_value: e.exit_value.as_ref().map(num),
        }
    }
}

/// A full trajectory with its coordinates. Key order is fixed by field order.
#[derive(Debug, Serialize)]
pub struct TrajectoryJson {
    pub h1: Number,
    pub steps: Vec<Number>,
    pub bases: Vec<u8>,
    pub octaves: Vec<Number>,
    pub episodes: Vec<EpisodeJson>,
}

impl TrajectoryJson {
    pub fn new(traj: &Trajectory, episodes: &[Episode]) -> Self {
        let coords: Vec<_> = traj.values().iter().map(to_base_octave).collect();
        TrajectoryJson {
            h1: num(traj.start()),
            steps: traj.values().iter().map(num).collect(),
            bases: coords.iter().map(|c| c.base().get()).collect(),
            octaves: coords.iter().map(|c| num(c.a())).collect(),
            episodes: episodes.iter().map(EpisodeJson::from).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FailureCounts {
    pub rule_violations: u64,
    pub identity_failures: u64,
    pub odd_run_failures: u64,
    pub persistence_failures: u64,
    pub provenance_failures: u64,
    pub halving_failures: u64,
}

#[derive(Debug, Serialize)]
pub struct ValuationJson {
    pub episode: usize,
    pub entry_v2: u64,
    pub next_entry_v2: u64,
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct DriftJson {
    pub episode: usize,
    #[serde(rename = "A_entry")]
    pub a_entry: Number,
    #[serde(rename = "A_next_entry")]
    pub a_next_entry: Number,
    /// Exact ratio `p/q` in lowest terms.
    pub ratio: String,
    pub sign: i8,
}

/// One line of the audit report.
#[derive(Debug, Serialize)]
pub struct AuditJson {
    pub h1: Number,
    pub terminated: bool,
    pub steps: u64,
    pub peak: Number,
    pub episodes: Vec<EpisodeJson>,
    pub failures: FailureCounts,
    pub valuation: Vec<ValuationJson>,
    pub drift: Vec<DriftJson>,
}

impl From<&StartRecord> for AuditJson {
    fn from(r: &StartRecord) -> Self {
        AuditJson {
            h1: num(&r.h1),
            terminated: r.terminated,
            steps: r.steps,
            peak: num(&r.peak),
            episodes: r.episodes.iter().map(EpisodeJson::from).collect(),
            failures: FailureCounts {
                rule_violations: r.rule_violations,
                identity_failures: r.identity_failures,
                odd_run_failures: r.odd_run_failures,
                persistence_failures: r.persistence_failures,
                provenance_failures: r.provenance_failures,
                halving_failures: r.halving_failures,
            },
            valuation: r
                .valuation
                .checks
                .iter()
                .map(|c| ValuationJson {
                    episode: c.episode_index,
                    entry_v2: c.entry_v2,
                    next_entry_v2: c.next_entry_v2,
                    holds: c.holds,
                })
                .collect(),
            drift: r
                .drift
                .iter()
                .map(|d| DriftJson {
                    episode: d.episode_index,
                    a_entry: num(&d.a_entry),
                    a_next_entry: num(&d.a_next_entry),
                    ratio: d.ratio.to_string(),
                    sign: d.sign as i8,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SummaryJson {
    pub starts: u64,
    pub terminated: u64,
    pub cap_exhausted: Vec<Number>,
    pub max_steps: Option<(u64, Number)>,
    pub max_peak: Option<(Number, Number)>,
    pub episodes: u64,
    pub max_episode_length: u64,
    pub rule_violations: u64,
    pub identity_failures: u64,
    pub odd_run_failures: u64,
    pub persistence_failures: u64,
    pub provenance_failures: u64,
    pub halving_failures: u64,
    pub valuation_checks: u64,
    pub valuation_violations: u64,
    pub drift_records: u64,
    pub drift_increasing: u64,
    pub drift_flat: u64,
    pub drift_decreasing: u64,
}

impl From<&RangeSummary> for SummaryJson {
    fn from(s: &RangeSummary) -> Self {
        SummaryJson {
            starts: s.starts,
            terminated: s.terminated,
            cap_exhausted: s.cap_exhausted.iter().map(num).collect(),
            max_steps: s.max_steps.as_ref().map(|(n, h)| (*n, num(h))),
            max_peak: s.max_peak.as_ref().map(|(p, h)| (num(p), num(h))),
            episodes: s.episodes,
            max_episode_length: s.max_episode_length,
            rule_violations: s.rule_violations,
            identity_failures: s.identity_failures,
            odd_run_failures: s.odd_run_failures,
            persistence_failures: s.persistence_failures,
            provenance_failures: s.provenance_failures,
            halving_failures: s.halving_failures,
            valuation_checks: s.valuation_checks,
            valuation_violations: s.valuation_violations,
            drift_records: s.drift_records,
            drift_increasing: s.drift_increasing,
            drift_flat: s.drift_flat,
            drift_decreasing: s.drift_decreasing,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SummaryLine {
    pub summary: SummaryJson,
}

pub const AUDIT_CSV_HEADER: [&str; 15] = [
    "h1",
    "terminated",
    "steps",
    "peak",
    "episodes",
    "max_t",
    "rule_violations",
    "identity_failures",
    "odd_run_failures",
    "persistence_failures",
    "provenance_failures",
    "halving_failures",
    "valuation_checks",
    "valuation_violations",
    "drift_records",
];

pub fn audit_csv_row(r: &StartRecord) -> [String; 15] {
    [
        r.h1.to_string(),
        (r.terminated as u8).to_string(),
        r.steps.to_string(),
        r.peak.to_string(),
        r.episodes.len().to_string(),
        r.max_episode_length().to_string(),
        r.rule_violations.to_string(),
        r.identity_failures.to_string(),
        r.odd_run_failures.to_string(),
        r.persistence_failures.to_string(),
        r.provenance_failures.to_string(),
        r.halving_failures.to_string(),
        r.valuation.checks.len().to_string(),
        r.valuation.violation_count().to_string(),
        r.drift.len().to_string(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use collatz_octave_core::analysis::audit_start;
    use collatz_octave_core::kernel::{run_trajectory, Iterate};

    #[test]
    fn trajectory_record_keys_in_order() {
        let t = run_trajectory(&Iterate::from_u64(20).unwrap(), 100).unwrap();
        let json = serde_json::to_string(&TrajectoryJson::new(&t, &[])).unwrap();
        assert_eq!(
            json,
            r#"{"h1":20,"steps":[20,10,5,8,4,2,1],"bases":[4,2,5,8,4,2,1],"octaves":[3,2,1,1,1,1,1],"episodes":[]}"#
        );
    }

    #[test]
    fn audit_record_for_1639() {
        let r = audit_start(&Iterate::from_u64(1639).unwrap(), 1000).unwrap();
        let v: serde_json::Value = serde_json::to_value(AuditJson::from(&r)).unwrap();
        let e = v["episodes"]
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["entry_value"] == 1663)
            .unwrap();
        assert_eq!(e["entry_A"], 208);
        assert_eq!(e["t"], 4);
    }

    #[test]
    fn big_numbers_stay_exact() {
        let n = num("123456789012345678901234567890");
        assert_eq!(
            serde_json::to_string(&n).unwrap(),
            "123456789012345678901234567890"
        );
    }

    #[test]
    fn dot_has_sixteen_edges() {
        let mut buf = Vec::new();
        write_dot(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches(" -> ").count(), 16);
        assert!(text.contains("B7 -> B7 [parity=\"even\""));
        assert!(text.contains("B8 -> B8 [parity=\"even\""));
    }
}
