//! The 128-row extended-state codebook: generation from exact arithmetic,
//! row attributes, and a cell-level comparison between two books.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use thiserror::Error;

use crate::kernel::step;
use crate::octave::{
    from_base_octave, to_base_octave, v2, Base, BaseOctave, ExtendedState, OctaveError, V2Class,
};

/// Default witness bound used for generation.
pub const DEFAULT_SAMPLE_BOUND: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodebookError {
    #[error("row {row}: {source}")]
    State { row: usize, source: OctaveError },
    #[error("row {row}: column {column} must be a bit, got {value}")]
    NotABit {
        row: usize,
        column: &'static str,
        value: u8,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DriftType {
    Decay,
    Mixed,
    Grow,
}

impl DriftType {
    pub fn label(self) -> &'static str {
        match self {
            DriftType::Decay => "DECAY(-1)",
            DriftType::Mixed => "MIXED",
            DriftType::Grow => "GROW(+0.585)",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "DECAY(-1)" | "DECAY" => Some(DriftType::Decay),
            "MIXED" => Some(DriftType::Mixed),
            "GROW(+0.585)" | "GROW" => Some(DriftType::Grow),
            _ => None,
        }
    }
}

/// Maximum persistence length implied by the octave bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MaxPersist {
    Exactly(u8),
    ThreeOrMore,
}

impl MaxPersist {
    pub fn from_class(c: V2Class) -> Self {
        match c {
            V2Class::Zero => MaxPersist::Exactly(0),
            V2Class::One => MaxPersist::Exactly(1),
            V2Class::Two => MaxPersist::Exactly(2),
            V2Class::AtLeastThree => MaxPersist::ThreeOrMore,
        }
    }

    pub fn label(self) -> String {
        match self {
            MaxPersist::Exactly(n) => n.to_string(),
            MaxPersist::ThreeOrMore => "3+".into(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "0" => Some(MaxPersist::Exactly(0)),
            "1" => Some(MaxPersist::Exactly(1)),
            "2" => Some(MaxPersist::Exactly(2)),
            "3+" => Some(MaxPersist::ThreeOrMore),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Flags {
    pub persist: bool,
    pub entry67: bool,
    pub exit73: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RowAttributes {
    pub v2_class: V2Class,
    pub max_persist: MaxPersist,
    pub drift: DriftType,
    pub flags: Flags,
}

pub fn classify_row_attributes(source: ExtendedState) -> RowAttributes {
    let b = source.b();
    let even_octave = source.s_a() == 0;
    let drift = if b == 7 && even_octave {
        DriftType::Grow
    } else if b.is_multiple_of(2) {
        DriftType::Decay
    } else {
        DriftType::Mixed
    };
    let v2_class = source.v2_class();
    RowAttributes {
        v2_class,
        max_persist: MaxPersist::from_class(v2_class),
        drift,
        flags: Flags {
            persist: b == 7 && even_octave,
            entry67: b == 6 && even_octave,
            exit73: b == 7 && !even_octave,
        },
    }
}

/// `1` in even octaves, where the update halves `A`.
pub fn derived_v2_consumed(source: ExtendedState) -> u8 {
    1 - source.s_a()
}

/// Table-derived gain rule: odd octave, and either an odd base or the carry
/// outcome.
pub fn derived_v2_possible_gain(source: ExtendedState, outcome_id: u8) -> u8 {
    (source.s_a() == 1 && (source.b() % 2 == 1 || outcome_id == 1)) as u8
}

/// One codebook row. Every column is kept as stored so that a fixture can be
/// compared cell by cell; [`CodebookRow::source`] and [`CodebookRow::next`]
/// give the typed views.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodebookRow {
    pub state_id: String,
    pub b: u8,
    pub s_b: u8,
    pub s_c: u8,
    pub s_a: u8,
    pub s_q: u8,
    pub s_r: u8,
    pub outcome_id: u8,
    pub v2_class: V2Class,
    pub max_persist: MaxPersist,
    pub drift: DriftType,
    pub next_b: u8,
    pub next_sb: u8,
    pub next_sc: u8,
    pub next_sa: u8,
    pub next_sq: u8,
    pub next_sr: u8,
    pub flags: Flags,
    pub v2_consumed: u8,
    pub v2_possible_gain: u8,
}

impl CodebookRow {
    pub fn state_key(source: ExtendedState, outcome_id: u8) -> String {
        format!("{source}_ID{outcome_id}")
    }

    /// Builds a derived row from a source tuple, its outcome label and the
    /// realized successor.
    pub fn derived(source: ExtendedState, outcome_id: u8, next: ExtendedState) -> Self {
        let attrs = classify_row_attributes(source);
        CodebookRow {
            state_id: Self::state_key(source, outcome_id),
            b: source.b(),
            s_b: source.s_b(),
            s_c: source.s_c(),
            s_a: source.s_a(),
            s_q: source.s_q(),
            s_r: source.s_r(),
            outcome_id,
            v2_class: attrs.v2_class,
            max_persist: attrs.max_persist,
            drift: attrs.drift,
            next_b: next.b(),
            next_sb: next.s_b(),
            next_sc: next.s_c(),
            next_sa: next.s_a(),
            next_sq: next.s_q(),
            next_sr: next.s_r(),
            flags: attrs.flags,
            v2_consumed: derived_v2_consumed(source),
            v2_possible_gain: derived_v2_possible_gain(source, outcome_id),
        }
    }

    /// Checks ranges of every column; `row` is used only for error locations.
    pub fn validate(&self, row: usize) -> Result<(), CodebookError> {
        let bits: [(&'static str, u8); 13] = [
            ("s_b", self.s_b),
            ("s_c", self.s_c),
            ("s_a", self.s_a),
            ("s_q", self.s_q),
            ("s_r", self.s_r),
            ("OutcomeID", self.outcome_id),
            ("next_sb", self.next_sb),
            ("next_sc", self.next_sc),
            ("next_sa", self.next_sa),
            ("next_sq", self.next_sq),
            ("next_sr", self.next_sr),
            ("v2_consumed", self.v2_consumed),
            ("v2_possible_gain", self.v2_possible_gain),
        ];
        for (column, value) in bits {
            if value > 1 {
                return Err(CodebookError::NotABit { row, column, value });
            }
        }
        for b in [self.b, self.next_b] {
            Base::new(b as u64).map_err(|source| CodebookError::State { row, source })?;
        }
        Ok(())
    }

    pub fn source(&self) -> ExtendedState {
        ExtendedState::new(self.b as u64, self.s_a, self.s_q, self.s_r).expect("validated row")
    }

    pub fn next(&self) -> ExtendedState {
        ExtendedState::new(self.next_b as u64, self.next_sa, self.next_sq, self.next_sr)
            .expect("validated row")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    PaperFixture,
    Derived,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodebookWarning {
    /// More than two distinct successors were observed.
    Multiplicity {
        source: ExtendedState,
        outcomes: usize,
    },
    /// Fewer than two distinct successors were observed.
    SingleOutcome { source: ExtendedState },
    /// No witness `A <= sample_bound` carries these bits.
    Unsampled { source: ExtendedState },
    /// Witnesses of one successor disagree on the outcome label.
    MixedLabel {
        source: ExtendedState,
        next: ExtendedState,
    },
}

/// Per-row evidence collected while generating a derived book.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessStats {
    pub count: u64,
    pub first_witness: u64,
    /// Range of `v2(A') - v2(A)` over all witnesses.
    pub v2_delta_min: i64,
    pub v2_delta_max: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codebook {
    rows: Vec<CodebookRow>,
    provenance: Provenance,
    warnings: Vec<CodebookWarning>,
    witnesses: BTreeMap<String, WitnessStats>,
}

impl Codebook {
    /// Wraps loaded rows after range-checking each one.
    pub fn from_rows(
        rows: Vec<CodebookRow>,
        provenance: Provenance,
    ) -> Result<Self, CodebookError> {
        for (i, r) in rows.iter().enumerate() {
            r.validate(i + 1)?;
        }
        Ok(Codebook {
            rows,
            provenance,
            warnings: Vec::new(),
            witnesses: BTreeMap::new(),
        })
    }

    pub fn rows(&self) -> &[CodebookRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn warnings(&self) -> &[CodebookWarning] {
        &self.warnings
    }

    pub fn witness_stats(&self, state_id: &str) -> Option<&WitnessStats> {
        self.witnesses.get(state_id)
    }

    pub fn rows_for(&self, source: ExtendedState) -> impl Iterator<Item = &CodebookRow> {
        self.rows.iter().filter(move |r| r.source() == source)
    }

    pub fn row(&self, source: ExtendedState, outcome_id: u8) -> Option<&CodebookRow> {
        self.rows_for(source).find(|r| r.outcome_id == outcome_id)
    }

    /// `true` when all 64 tuples appear with exactly two rows each.
    pub fn is_complete(&self) -> bool {
        let mut counts = [0usize; ExtendedState::COUNT];
        for r in &self.rows {
            counts[r.source().index()] += 1;
        }
        self.rows.len() == 2 * ExtendedState::COUNT && counts.iter().all(|&c| c == 2)
    }
}

struct Outcome {
    next: ExtendedState,
    label: u8,
    stats: WitnessStats,
}

/// Generates the codebook by exhaustive witness sampling: every `A` up to
/// `sample_bound` whose low three bits match the source tuple.
///
/// Outcomes are labelled by bit 3 of the witness, which is the bit that
/// selects between the two successors.
pub fn generate_derived_codebook(sample_bound: u64) -> Codebook {
    let mut rows = Vec::with_capacity(128);
    let mut warnings = Vec::new();
    let mut witnesses = BTreeMap::new();
    for source in ExtendedState::all() {
        let mut outcomes: Vec<Outcome> = Vec::new();
        let mut a = source.min_witness();
        while a <= sample_bound {
            let big_a = BigUint::from(a);
            let bo = BaseOctave::new(source.base(), big_a.clone()).expect("A >= 1");
            let next_bo = to_base_octave(&step(&from_base_octave(&bo)));
            let next = next_bo.state();
            let label = ((a >> 3) & 1) as u8;
            let delta = v2(next_bo.a()) as i64 - v2(&big_a) as i64;
            match outcomes.iter_mut().find(|o| o.next == next) {
                Some(o) => {
                    if o.label != label
                        && !warnings.contains(&CodebookWarning::MixedLabel { source, next })
                    {
                        warnings.push(CodebookWarning::MixedLabel { source, next });
                    }
                    o.stats.count += 1;
                    o.stats.v2_delta_min = o.stats.v2_delta_min.min(delta);
                    o.stats.v2_delta_max = o.stats.v2_delta_max.max(delta);
                }
                None => outcomes.push(Outcome {
                    next,
                    label,
                    stats: WitnessStats {
                        count: 1,
                        first_witness: a,
                        v2_delta_min: delta,
                        v2_delta_max: delta,
                    },
                }),
            }
            a += 8;
        }
        match outcomes.len() {
            0 => warnings.push(CodebookWarning::Unsampled { source }),
            1 => warnings.push(CodebookWarning::SingleOutcome { source }),
            2 => {}
            n => warnings.push(CodebookWarning::Multiplicity {
                source,
                outcomes: n,
            }),
        }
        outcomes.sort_by_key(|o| (o.label, o.next));
        for o in outcomes {
            let row = CodebookRow::derived(source, o.label, o.next);
            witnesses.insert(row.state_id.clone(), o.stats);
            rows.push(row);
        }
    }
    Codebook {
        rows,
        provenance: Provenance::Derived,
        warnings,
        witnesses,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MismatchClass {
    Structural,
    SuccessorBit,
    Budget,
}

impl MismatchClass {
    pub fn label(self) -> &'static str {
        match self {
            MismatchClass::Structural => "structural",
            MismatchClass::SuccessorBit => "successor-bit",
            MismatchClass::Budget => "budget",
        }
    }
}

impl fmt::Display for MismatchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// How a derived row was paired with a reference row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchRule {
    ExactSuccessor,
    NextSa,
    OutcomeId,
    /// Last resort: the rows share only their source tuple.
    SourceOnly,
}

impl MatchRule {
    pub fn label(self) -> &'static str {
        match self {
            MatchRule::ExactSuccessor => "exact-successor",
            MatchRule::NextSa => "next_sa",
            MatchRule::OutcomeId => "outcome_id",
            MatchRule::SourceOnly => "source",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellMismatch {
    pub derived_id: String,
    pub paper_id: String,
    pub column: &'static str,
    pub class: MismatchClass,
    pub derived: String,
    pub paper: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPairing {
    pub derived_id: String,
    pub paper_id: String,
    pub rule: MatchRule,
    pub v2_delta: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CodebookDiff {
    pub pairings: Vec<RowPairing>,
    pub mismatches: Vec<CellMismatch>,
    pub unmatched_derived: Vec<String>,
    pub unmatched_paper: Vec<String>,
}

impl CodebookDiff {
    pub fn is_empty(&self) -> bool {
        self.mismatches.is_empty()
            && self.unmatched_derived.is_empty()
            && self.unmatched_paper.is_empty()
    }

    pub fn count(&self, class: MismatchClass) -> usize {
        self.mismatches.iter().filter(|m| m.class == class).count()
    }

    pub fn of_class(&self, class: MismatchClass) -> impl Iterator<Item = &CellMismatch> {
        self.mismatches.iter().filter(move |m| m.class == class)
    }
}

fn flag(b: bool) -> u8 {
    b as u8
}

fn compared_cells(r: &CodebookRow) -> [(&'static str, MismatchClass, String); 18] {
    use MismatchClass::*;
    [
        ("B", Structural, r.b.to_string()),
        ("s_b", Structural, r.s_b.to_string()),
        ("s_c", Structural, r.s_c.to_string()),
        ("v2_class", Structural, r.v2_class.label().into()),
        ("max_persist", Structural, r.max_persist.label()),
        ("drift_type", Structural, r.drift.label().into()),
        ("NextB", Structural, r.next_b.to_string()),
        ("next_sb", Structural, r.next_sb.to_string()),
        ("next_sc", Structural, r.next_sc.to_string()),
        ("IsS7persist", Structural, flag(r.flags.persist).to_string()),
        ("IsEntry67", Structural, flag(r.flags.entry67).to_string()),
        ("IsExit73", Structural, flag(r.flags.exit73).to_string()),
        ("OutcomeID", SuccessorBit, r.outcome_id.to_string()),
        ("next_sa", SuccessorBit, r.next_sa.to_string()),
        ("next_sq", SuccessorBit, r.next_sq.to_string()),
        ("next_sr", SuccessorBit, r.next_sr.to_string()),
        ("v2_consumed", Budget, r.v2_consumed.to_string()),
        ("v2_possible_gain", Budget, r.v2_possible_gain.to_string()),
    ]
}

type Pair<'a> = (&'a CodebookRow, &'a CodebookRow, MatchRule);

fn take<'a>(
    pairs: &mut Vec<Pair<'a>>,
    ds: &mut Vec<&'a CodebookRow>,
    ps: &mut Vec<&'a CodebookRow>,
    rule: MatchRule,
    ok: &dyn Fn(&CodebookRow, &CodebookRow) -> bool,
) {
    let mut i = 0;
    while i < ds.len() {
        if let Some(j) = ps.iter().position(|p| ok(ds[i], p)) {
            pairs.push((ds.remove(i), ps.remove(j), rule));
        } else {
            i += 1;
        }
    }
}

/// Pairs rows per source tuple (exact successor first, then realized
/// `next_sa`, then outcome label, then whatever is left) and compares every
/// cell of each pair.
pub fn diff_codebooks(derived: &Codebook, paper: &Codebook) -> CodebookDiff {
    let mut diff = CodebookDiff::default();
    for source in ExtendedState::all() {
        let mut ds: Vec<&CodebookRow> = derived.rows_for(source).collect();
        let mut ps: Vec<&CodebookRow> = paper.rows_for(source).collect();
        let mut pairs: Vec<Pair> = Vec::new();

        take(
            &mut pairs,
            &mut ds,
            &mut ps,
            MatchRule::ExactSuccessor,
            &|d, p| d.next() == p.next() && d.outcome_id == p.outcome_id,
        );
        take(
            &mut pairs,
            &mut ds,
            &mut ps,
            MatchRule::ExactSuccessor,
            &|d, p| d.next() == p.next(),
        );
        take(&mut pairs, &mut ds, &mut ps, MatchRule::NextSa, &|d, p| {
            d.next_sa == p.next_sa && d.outcome_id == p.outcome_id
        });
        take(&mut pairs, &mut ds, &mut ps, MatchRule::NextSa, &|d, p| {
            d.next_sa == p.next_sa
        });
        take(
            &mut pairs,
            &mut ds,
            &mut ps,
            MatchRule::OutcomeId,
            &|d, p| d.outcome_id == p.outcome_id,
        );
        take(
            &mut pairs,
            &mut ds,
            &mut ps,
            MatchRule::SourceOnly,
            &|_, _| true,
        );

        pairs.sort_by(|a, b| a.1.state_id.cmp(&b.1.state_id));
        for (d, p, rule) in pairs {
            let dc = compared_cells(d);
            let pc = compared_cells(p);
            for ((column, class, dv), (_, _, pv)) in dc.into_iter().zip(pc) {
                if dv != pv {
                    diff.mismatches.push(CellMismatch {
                        derived_id: d.state_id.clone(),
                        paper_id: p.state_id.clone(),
                        column,
                        class,
                        derived: dv,
                        paper: pv,
                    });
                }
            }
            diff.pairings.push(RowPairing {
                derived_id: d.state_id.clone(),
                paper_id: p.state_id.clone(),
                rule,
                v2_delta: derived
                    .witness_stats(&d.state_id)
                    .map(|s| (s.v2_delta_min, s.v2_delta_max)),
            });
        }
        diff.unmatched_derived
            .extend(ds.into_iter().map(|r| r.state_id.clone()));
        diff.unmatched_paper
            .extend(ps.into_iter().map(|r| r.state_id.clone()));
    }
    diff
}
