//! Return paths from the forced exit `7 -> 3` to the re-entry `6 -> 7`,
//! their 2-adic budgets, and the cycle-weight audit.
//!
//! Two graph granularities are supported. In [`GraphMode::Paper`] every
//! codebook row is a vertex and row `r` points at every row whose source tuple
//! is `r`'s successor tuple. In [`GraphMode::Derived`] the 64 source tuples
//! are the vertices and each codebook row is an outcome-labelled edge.
//!
//! Budget accounting per counted edge: one factor consumed when the source
//! base is even, and the edge row's `v2_possible_gain` as the gain. The exit
//! edge is not counted; the entry edge is.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use thiserror::Error;

use crate::codebook::Codebook;
use crate::octave::{Base, ExtendedState};
use crate::rules::next_base;

/// Vertex sets are `u128` bitsets.
pub const MAX_VERTICES: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("graph has {0} vertices; at most 128 are supported")]
    TooManyVertices(usize),
    #[error("codebook has no exit-set state (B = 7, s_a = 1)")]
    NoExit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphMode {
    Paper,
    Derived,
}

impl GraphMode {
    pub fn label(self) -> &'static str {
        match self {
            GraphMode::Paper => "paper",
            GraphMode::Derived => "derived",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub to: u8,
    /// Index of the codebook row realizing the transition.
    pub row: u16,
    pub consumed: u8,
    pub gain: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub label: String,
    pub state: ExtendedState,
    /// Budget of the transition leaving this vertex toward base 7, used when
    /// the vertex ends a return path. `None` when it has no such edge.
    pub entry_gain: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
struct Bits(u128);

impl Bits {
    fn has(self, v: u8) -> bool {
        self.0 >> v & 1 == 1
    }

    fn set(&mut self, v: u8) {
        self.0 |= 1u128 << v;
    }

    fn clear(&mut self, v: u8) {
        self.0 &= !(1u128 << v);
    }

    fn count(self) -> u32 {
        self.0.count_ones()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnSubgraph {
    mode: GraphMode,
    vertices: Vec<Vertex>,
    adj: Vec<Vec<Edge>>,
    exits: Vec<u8>,
    entries: Bits,
    base7: Bits,
    /// Vertices lying on some exit-to-entry route (exits included).
    members: Bits,
}

fn is_exit(s: ExtendedState) -> bool {
    s.b() == 7 && s.s_a() == 1
}

fn is_entry(s: ExtendedState) -> bool {
    s.b() == 6 && s.s_a() == 0
}

fn consumed(s: ExtendedState) -> u8 {
    s.b().is_multiple_of(2) as u8
}

pub fn build_return_subgraph(
    book: &Codebook,
    mode: GraphMode,
) -> Result<ReturnSubgraph, PathError> {
    let rows = book.rows();
    let mut vertices = Vec::new();
    let mut adj: Vec<Vec<Edge>> = Vec::new();
    match mode {
        GraphMode::Paper => {
            if rows.len() > MAX_VERTICES {
                return Err(PathError::TooManyVertices(rows.len()));
            }
            for (i, r) in rows.iter().enumerate() {
                let source = r.source();
                let next = r.next();
                let entry_gain = (next.b() == 7).then_some(r.v2_possible_gain);
                vertices.push(Vertex {
                    label: r.state_id.clone(),
                    state: source,
                    entry_gain,
                });
                let edges = rows
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.source() == next)
                    .map(|(j, _)| Edge {
                        to: j as u8,
                        row: i as u16,
                        consumed: consumed(source),
                        gain: r.v2_possible_gain,
                    })
                    .collect();
                adj.push(edges);
            }
        }
        GraphMode::Derived => {
            for state in ExtendedState::all() {
                let out: Vec<(usize, &crate::codebook::CodebookRow)> = rows
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.source() == state)
                    .collect();
                let entry_gain = out
                    .iter()
                    .filter(|(_, r)| r.next_b == 7)
                    .map(|(_, r)| r.v2_possible_gain)
                    .max();
                vertices.push(Vertex {
                    label: alloc::format!("{state}"),
                    state,
                    entry_gain,
                });
                adj.push(
                    out.into_iter()
                        .map(|(i, r)| Edge {
                            to: r.next().index() as u8,
                            row: i as u16,
                            consumed: consumed(state),
                            gain: r.v2_possible_gain,
                        })
                        .collect(),
                );
            }
        }
    }
    for edges in &mut adj {
        edges.sort_by_key(|e| (e.to, e.row));
        edges.dedup_by_key(|e| e.to);
    }

    let mut exits = Vec::new();
    let mut entries = Bits::default();
    let mut base7 = Bits::default();
    for (i, v) in vertices.iter().enumerate() {
        let i = i as u8;
        if is_exit(v.state) {
            exits.push(i);
        }
        if is_entry(v.state) && v.entry_gain.is_some() {
            entries.set(i);
        }
        if v.state.b() == 7 {
            base7.set(i);
        }
    }
    if exits.is_empty() {
        return Err(PathError::NoExit);
    }

    // forward from the exits' successors, backward from the entries, never
    // passing through a base-7 vertex
    let n = vertices.len();
    let mut forward = Bits::default();
    let mut stack: Vec<u8> = Vec::new();
    for &x in &exits {
        for e in &adj[x as usize] {
            if !base7.has(e.to) && !forward.has(e.to) {
                forward.set(e.to);
                stack.push(e.to);
            }
        }
    }
    while let Some(v) = stack.pop() {
        if entries.has(v) {
            continue;
        }
        for e in &adj[v as usize] {
            if !base7.has(e.to) && !forward.has(e.to) {
                forward.set(e.to);
                stack.push(e.to);
            }
        }
    }
    let mut reverse: Vec<Vec<u8>> = vec![Vec::new(); n];
    for (v, edges) in adj.iter().enumerate() {
        for e in edges {
            reverse[e.to as usize].push(v as u8);
        }
    }
    let mut backward = entries;
    stack.extend((0..n as u8).filter(|&v| entries.has(v)));
    while let Some(v) = stack.pop() {
        for &u in &reverse[v as usize] {
            if !base7.has(u) && !backward.has(u) && !entries.has(u) {
                backward.set(u);
                stack.push(u);
            }
        }
    }
    let mut members = Bits(forward.0 & backward.0);
    for &x in &exits {
        members.set(x);
    }

    Ok(ReturnSubgraph {
        mode,
        vertices,
        adj,
        exits,
        entries,
        base7,
        members,
    })
}

impl ReturnSubgraph {
    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: u8) -> &Vertex {
        &self.vertices[v as usize]
    }

    pub fn edges(&self, v: u8) -> &[Edge] {
        &self.adj[v as usize]
    }

    pub fn edge(&self, from: u8, to: u8) -> Option<&Edge> {
        self.adj[from as usize].iter().find(|e| e.to == to)
    }

    pub fn exits(&self) -> &[u8] {
        &self.exits
    }

    pub fn is_entry(&self, v: u8) -> bool {
        self.entries.has(v)
    }

    pub fn is_member(&self, v: u8) -> bool {
        self.members.has(v)
    }

    pub fn member_count(&self) -> usize {
        self.members.count() as usize
    }

    /// Vertices where a return path may continue: members other than base 7.
    fn interior(&self, v: u8) -> bool {
        self.members.has(v) && !self.base7.has(v)
    }

    pub fn base(&self, v: u8) -> u8 {
        self.vertices[v as usize].state.b()
    }

    /// Base projection of a vertex path, with the re-entry 7 appended.
    pub fn base_sequence(&self, path: &[u8]) -> Vec<u8> {
        let mut seq: Vec<u8> = path.iter().map(|&v| self.base(v)).collect();
        seq.push(7);
        seq
    }

    /// Compares two vertex paths by base sequence, then length, then vertices.
    pub fn path_order(&self, a: &[u8], b: &[u8]) -> Ordering {
        self.base_sequence(a)
            .cmp(&self.base_sequence(b))
            .then(a.len().cmp(&b.len()))
            .then_with(|| a.cmp(b))
    }
}

/// Edge counts and net budget of a return path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Budget {
    pub length: u32,
    pub even_steps: u32,
    pub odd_steps: u32,
    pub v2_consumed: u32,
    pub v2_max_gain: u32,
    pub entry_cost: u32,
    pub net_budget: i64,
}

impl Budget {
    fn finish(mut self) -> Self {
        self.entry_cost = 1;
        self.v2_consumed = self.even_steps;
        self.net_budget =
            self.v2_max_gain as i64 - self.v2_consumed as i64 - self.entry_cost as i64;
        self
    }

    fn count(&mut self, consumed: u8, gain: u8) {
        self.length += 1;
        if consumed == 1 {
            self.even_steps += 1;
        } else {
            self.odd_steps += 1;
        }
        self.v2_max_gain += gain as u32;
    }
}

/// Budgets of a vertex path under both edge conventions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PathBudgets {
    /// Exit edge excluded, entry edge included (the table convention).
    pub table: Budget,
    /// Exit edge included as well.
    pub include_exit: Budget,
}

/// Budget of the vertex path `path` (exit vertex first, entry vertex last).
pub fn compute_budget(g: &ReturnSubgraph, path: &[u8]) -> PathBudgets {
    let mut b = Budget::default();
    for w in path[1..].windows(2) {
        let e = g.edge(w[0], w[1]).expect("path follows graph edges");
        b.count(e.consumed, e.gain);
    }
    let last = *path.last().expect("non-empty path");
    b.count(
        consumed(g.vertex(last).state),
        g.vertex(last).entry_gain.unwrap_or(0),
    );
    let mut with_exit = b;
    if path.len() >= 2 {
        let e = g.edge(path[0], path[1]).expect("path follows graph edges");
        with_exit.count(e.consumed, e.gain);
    }
    PathBudgets {
        table: b.finish(),
        include_exit: with_exit.finish(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReturnPath {
    pub vertices: Vec<u8>,
    pub base_sequence: Vec<u8>,
    pub budget: Budget,
    pub include_exit: Budget,
}

impl ReturnPath {
    pub fn new(g: &ReturnSubgraph, vertices: &[u8]) -> Self {
        let b = compute_budget(g, vertices);
        ReturnPath {
            vertices: vertices.to_vec(),
            base_sequence: g.base_sequence(vertices),
            budget: b.table,
            include_exit: b.include_exit,
        }
    }
}

/// Revisit prunes seen during a search: each is a witness of a cycle.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PruneLog {
    pub prunes: u64,
    /// Distinct `(from, to)` edges that closed a cycle.
    pub back_edges: BTreeSet<(u8, u8)>,
}

impl PruneLog {
    pub fn merge(&mut self, other: PruneLog) {
        self.prunes += other.prunes;
        self.back_edges.extend(other.back_edges);
    }
}

/// Depth-first search of all simple return paths starting at `exit`. The
/// visitor receives each path as vertex indices, exit first.
pub fn visit_return_paths_from<F: FnMut(&[u8])>(
    g: &ReturnSubgraph,
    exit: u8,
    visit: &mut F,
) -> PruneLog {
    let mut log = PruneLog::default();
    let mut path = vec![exit];
    let mut on_path = Bits::default();
    on_path.set(exit);
    // one frame per vertex on the path: next edge index to try
    let mut frames: Vec<usize> = vec![0];
    while let Some(top) = frames.last_mut() {
        let v = *path.last().expect("frame per vertex");
        let edges = &g.adj[v as usize];
        if *top >= edges.len() {
            frames.pop();
            on_path.clear(v);
            path.pop();
            continue;
        }
        let to = edges[*top].to;
        *top += 1;
        if !g.interior(to) {
            continue;
        }
        if on_path.has(to) {
            log.prunes += 1;
            log.back_edges.insert((v, to));
            continue;
        }
        path.push(to);
        if g.entries.has(to) {
            visit(&path);
            path.pop();
            continue;
        }
        on_path.set(to);
        frames.push(0);
    }
    log
}

pub fn visit_return_paths<F: FnMut(&[u8])>(g: &ReturnSubgraph, visit: &mut F) -> PruneLog {
    let mut log = PruneLog::default();
    for &x in &g.exits {
        log.merge(visit_return_paths_from(g, x, visit));
    }
    log
}

/// Flat storage for many vertex paths.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathArena {
    data: Vec<u8>,
    ends: Vec<usize>,
}

impl PathArena {
    pub fn push(&mut self, path: &[u8]) {
        self.data.extend_from_slice(path);
        self.ends.push(self.data.len());
    }

    pub fn len(&self) -> usize {
        self.ends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u8] {
        let start = if i == 0 { 0 } else { self.ends[i - 1] };
        &self.data[start..self.ends[i]]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn append(&mut self, other: &PathArena) {
        for p in other.iter() {
            self.push(p);
        }
    }

    /// Indices of the stored paths in deterministic output order.
    pub fn sorted_order(&self, g: &ReturnSubgraph) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let key = |p: &[u8]| -> Vec<u8> { p.iter().map(|&v| g.base(v)).chain([7]).collect() };
        let keys: Vec<Vec<u8>> = self.iter().map(key).collect();
        idx.sort_by(|&a, &b| {
            keys[a]
                .cmp(&keys[b])
                .then(self.get(a).len().cmp(&self.get(b).len()))
                .then_with(|| self.get(a).cmp(self.get(b)))
        });
        idx
    }
}

pub fn collect_return_paths(g: &ReturnSubgraph) -> (PathArena, PruneLog) {
    let mut arena = PathArena::default();
    let log = visit_return_paths(g, &mut |p: &[u8]| arena.push(p));
    (arena, log)
}

/// All simple return paths, ordered by base sequence, then length.
pub fn enumerate_return_paths(g: &ReturnSubgraph) -> Vec<ReturnPath> {
    let (arena, _) = collect_return_paths(g);
    arena
        .sorted_order(g)
        .into_iter()
        .map(|i| ReturnPath::new(g, arena.get(i)))
        .collect()
}

/// Aggregate statistics over a (possibly very large) path set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathSummary {
    pub paths: u64,
    pub net_histogram: BTreeMap<i64, u64>,
    pub include_exit_histogram: BTreeMap<i64, u64>,
    pub max_length: u32,
    pub distinct_sequences: Option<u64>,
}

impl PathSummary {
    pub fn positive(&self) -> u64 {
        self.net_histogram.range(1..).map(|(_, c)| c).sum()
    }

    pub fn max_net(&self) -> Option<i64> {
        self.net_histogram.keys().next_back().copied()
    }

    pub fn observe(&mut self, b: &PathBudgets) {
        self.paths += 1;
        *self.net_histogram.entry(b.table.net_budget).or_default() += 1;
        *self
            .include_exit_histogram
            .entry(b.include_exit.net_budget)
            .or_default() += 1;
        self.max_length = self.max_length.max(b.table.length);
    }

    pub fn merge(&mut self, other: &PathSummary) {
        self.paths += other.paths;
        for (k, v) in &other.net_histogram {
            *self.net_histogram.entry(*k).or_default() += v;
        }
        for (k, v) in &other.include_exit_histogram {
            *self.include_exit_histogram.entry(*k).or_default() += v;
        }
        self.max_length = self.max_length.max(other.max_length);
    }
}

/// Packs a base sequence four bits per base.
pub fn pack_sequence(seq: &[u8]) -> Vec<u8> {
    seq.chunks(2)
        .map(|c| c[0] << 4 | c.get(1).copied().unwrap_or(0))
        .collect()
}

/// Streams all paths and summarizes them; distinct base sequences are
/// counted when `count_distinct` is set.
pub fn summarize_return_paths(g: &ReturnSubgraph, count_distinct: bool) -> (PathSummary, PruneLog) {
    let mut summary = PathSummary::default();
    let mut seen: BTreeSet<Vec<u8>> = BTreeSet::new();
    let log = visit_return_paths(g, &mut |p: &[u8]| {
        summary.observe(&compute_budget(g, p));
        if count_distinct {
            seen.insert(pack_sequence(&g.base_sequence(p)));
        }
    });
    if count_distinct {
        summary.distinct_sequences = Some(seen.len() as u64);
    }
    (summary, log)
}

/// Base-level budget of a base sequence `7, 3, ..., 6, 7`.
///
/// Each transition `B -> B'` fixes the octave parity of its source, since the
/// two rules out of a base have different destinations. Gain is the upper
/// bound "one per counted edge leaving an odd octave".
pub fn budget_from_base_sequence(seq: &[u8]) -> Option<Budget> {
    if seq.len() < 3 || seq[0] != 7 || seq[1] != 3 || *seq.last()? != 7 {
        return None;
    }
    let mut b = Budget::default();
    for w in seq[1..].windows(2) {
        let from = Base::new(w[0] as u64).ok()?;
        let s_a = [1u8, 0]
            .into_iter()
            .find(|&s| next_base(from, s).get() == w[1])?;
        b.count((w[0] % 2 == 0) as u8, s_a);
    }
    Some(b.finish())
}

/// One elementary cycle of the return subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    /// Vertices in order, starting from the smallest index.
    pub vertices: Vec<u8>,
    pub base_sequence: Vec<u8>,
    /// Sum over the cycle's edges of gain minus consumed.
    pub weight: i64,
}

impl CycleRecord {
    fn bases_only(&self, allowed: &[u8]) -> bool {
        self.base_sequence.iter().all(|b| allowed.contains(b))
    }

    /// A cycle alternating between bases 1 and 2.
    pub fn is_one_two(&self) -> bool {
        self.base_sequence.len() == 2
            && self.bases_only(&[1, 2])
            && self.base_sequence[0] != self.base_sequence[1]
    }

    /// A cycle staying in base 8.
    pub fn is_eight_loop(&self) -> bool {
        self.bases_only(&[8])
    }

    pub fn uses_transition(&self, from: u8, to: u8) -> bool {
        let n = self.base_sequence.len();
        (0..n).any(|i| self.base_sequence[i] == from && self.base_sequence[(i + 1) % n] == to)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CycleAudit {
    pub cycles: Vec<CycleRecord>,
}

impl CycleAudit {
    pub fn positive(&self) -> impl Iterator<Item = &CycleRecord> {
        self.cycles.iter().filter(|c| c.weight > 0)
    }

    pub fn all_non_positive(&self) -> bool {
        self.positive().next().is_none()
    }

    pub fn one_two(&self) -> impl Iterator<Item = &CycleRecord> {
        self.cycles.iter().filter(|c| c.is_one_two())
    }

    pub fn eight_loops(&self) -> impl Iterator<Item = &CycleRecord> {
        self.cycles.iter().filter(|c| c.is_eight_loop())
    }

    pub fn through(&self, from: u8, to: u8) -> impl Iterator<Item = &CycleRecord> {
        self.cycles
            .iter()
            .filter(move |c| c.uses_transition(from, to))
    }
}

struct Johnson<'a> {
    g: &'a ReturnSubgraph,
    allowed: Bits,
    blocked: Bits,
    block_map: Vec<Bits>,
    stack: Vec<u8>,
    out: Vec<CycleRecord>,
}

impl Johnson<'_> {
    fn unblock(&mut self, u: u8) {
        let mut work = vec![u];
        while let Some(u) = work.pop() {
            if !self.blocked.has(u) {
                continue;
            }
            self.blocked.clear(u);
            let waiting = core::mem::take(&mut self.block_map[u as usize]);
            for w in 0..MAX_VERTICES as u8 {
                if waiting.has(w) {
                    work.push(w);
                }
            }
        }
    }

    fn record(&mut self) {
        let vertices = self.stack.clone();
        let n = vertices.len();
        let weight = (0..n)
            .map(|i| {
                let e = self
                    .g
                    .edge(vertices[i], vertices[(i + 1) % n])
                    .expect("cycle follows edges");
                e.gain as i64 - e.consumed as i64
            })
            .sum();
        let base_sequence = vertices.iter().map(|&v| self.g.base(v)).collect();
        self.out.push(CycleRecord {
            vertices,
            base_sequence,
            weight,
        });
    }

    fn circuit(&mut self, v: u8, s: u8) -> bool {
        let mut found = false;
        self.stack.push(v);
        self.blocked.set(v);
        let succ: Vec<u8> = self.g.adj[v as usize]
            .iter()
            .map(|e| e.to)
            .filter(|&w| self.allowed.has(w))
            .collect();
        for &w in &succ {
            if w == s {
                self.record();
                found = true;
            } else if !self.blocked.has(w) && self.circuit(w, s) {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &succ {
                self.block_map[w as usize].set(v);
            }
        }
        self.stack.pop();
        found
    }
}

/// Strongly connected component of `s` within `allowed`.
fn component(g: &ReturnSubgraph, allowed: Bits, s: u8) -> Bits {
    let reach = |forward: bool| {
        let mut seen = Bits::default();
        seen.set(s);
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for u in 0..g.vertices.len() as u8 {
                if !allowed.has(u) || seen.has(u) {
                    continue;
                }
                let linked = if forward {
                    g.edge(v, u).is_some()
                } else {
                    g.edge(u, v).is_some()
                };
                if linked {
                    seen.set(u);
                    stack.push(u);
                }
            }
        }
        seen
    };
    Bits(reach(true).0 & reach(false).0)
}

/// Enumerates every elementary cycle among the interior vertices of the
/// return subgraph and records its budget weight.
pub fn cycle_weight_audit(g: &ReturnSubgraph) -> CycleAudit {
    let n = g.vertices.len() as u8;
    let mut cycles = Vec::new();
    for s in 0..n {
        if !g.interior(s) {
            continue;
        }
        let mut allowed = Bits::default();
        for v in s..n {
            if g.interior(v) {
                allowed.set(v);
            }
        }
        let scc = component(g, allowed, s);
        let mut j = Johnson {
            g,
            allowed: scc,
            blocked: Bits::default(),
            block_map: vec![Bits::default(); n as usize],
            stack: Vec::new(),
            out: Vec::new(),
        };
        j.circuit(s, s);
        cycles.append(&mut j.out);
    }
    cycles.sort_by(|a, b| {
        a.base_sequence
            .cmp(&b.base_sequence)
            .then_with(|| a.vertices.cmp(&b.vertices))
    });
    CycleAudit { cycles }
}

/// One Table A2 row as needed for comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub id: u32,
    /// `7, 3, ..., 6, 7`.
    pub base_sequence: Vec<u8>,
    pub budget: Budget,
}

impl TableRow {
    /// `even + odd = length` and `net = gain - consumed - entry`.
    pub fn internal_identities_hold(&self) -> (bool, bool) {
        let b = &self.budget;
        (
            b.even_steps + b.odd_steps == b.length,
            b.net_budget == b.v2_max_gain as i64 - b.v2_consumed as i64 - b.entry_cost as i64,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDiscrepancy {
    pub row: u32,
    pub column: &'static str,
    pub expected: i64,
    pub table: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowMatch {
    pub row: u32,
    /// Enumerated paths with the row's base sequence.
    pub paths: u64,
    /// Range of enumerated net budgets for the sequence.
    pub net_range: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathDiff {
    pub matched: Vec<RowMatch>,
    pub unmatched: Vec<u32>,
    /// Enumerated base sequences absent from the table, with path counts.
    pub extra_sequences: BTreeMap<Vec<u8>, u64>,
    pub extra_paths: u64,
    pub discrepancies: Vec<ColumnDiscrepancy>,
    /// Rows whose own columns break `even + odd = length` or the net formula.
    pub identity_failures: Vec<u32>,
    pub summary: PathSummary,
}

impl PathDiff {
    pub fn distinct_table_sequences(rows: &[TableRow]) -> usize {
        rows.iter()
            .map(|r| &r.base_sequence)
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn is_clean(&self) -> bool {
        self.unmatched.is_empty()
            && self.extra_sequences.is_empty()
            && self.discrepancies.is_empty()
            && self.identity_failures.is_empty()
            && self.summary.positive() == 0
    }
}

/// Streams paths and compares them with table rows. Rows are matched by base
/// sequence; rows sharing a sequence are matched independently. Column
/// discrepancies are reported against the base-level budget of the row's own
/// sequence.
#[derive(Debug, Clone)]
pub struct PathDiffBuilder {
    rows: Vec<TableRow>,
    per_sequence: BTreeMap<Vec<u8>, (u64, i64, i64)>,
    track_extra: bool,
    diff: PathDiff,
}

impl PathDiffBuilder {
    pub fn new(rows: Vec<TableRow>, track_extra: bool) -> Self {
        let per_sequence = rows
            .iter()
            .map(|r| (r.base_sequence.clone(), (0, i64::MAX, i64::MIN)))
            .collect();
        PathDiffBuilder {
            rows,
            per_sequence,
            track_extra,
            diff: PathDiff::default(),
        }
    }

    pub fn observe(&mut self, base_sequence: Vec<u8>, budgets: &PathBudgets) {
        self.diff.summary.observe(budgets);
        let net = budgets.table.net_budget;
        match self.per_sequence.get_mut(&base_sequence) {
            Some((count, lo, hi)) => {
                *count += 1;
                *lo = (*lo).min(net);
                *hi = (*hi).max(net);
            }
            None => {
                self.diff.extra_paths += 1;
                if self.track_extra {
                    *self.diff.extra_sequences.entry(base_sequence).or_default() += 1;
                }
            }
        }
    }

    pub fn finish(mut self) -> PathDiff {
        for row in &self.rows {
            let (count, lo, hi) = self.per_sequence[&row.base_sequence];
            if count == 0 {
                self.diff.unmatched.push(row.id);
            } else {
                self.diff.matched.push(RowMatch {
                    row: row.id,
                    paths: count,
                    net_range: Some((lo, hi)),
                });
            }
            let (lengths, net) = row.internal_identities_hold();
            if !(lengths && net) {
                self.diff.identity_failures.push(row.id);
            }
            if let Some(expected) = budget_from_base_sequence(&row.base_sequence) {
                let t = &row.budget;
                let cols: [(&'static str, i64, i64); 7] = [
                    ("Length", expected.length as i64, t.length as i64),
                    (
                        "Even_Steps",
                        expected.even_steps as i64,
                        t.even_steps as i64,
                    ),
                    ("Odd_Steps", expected.odd_steps as i64, t.odd_steps as i64),
                    (
                        "v2_Consumed",
                        expected.v2_consumed as i64,
                        t.v2_consumed as i64,
                    ),
                    (
                        "v2_Max_Gain",
                        expected.v2_max_gain as i64,
                        t.v2_max_gain as i64,
                    ),
                    (
                        "Entry_Cost",
                        expected.entry_cost as i64,
                        t.entry_cost as i64,
                    ),
                    ("Net_Budget", expected.net_budget, t.net_budget),
                ];
                for (column, e, v) in cols {
                    if e != v {
                        self.diff.discrepancies.push(ColumnDiscrepancy {
                            row: row.id,
                            column,
                            expected: e,
                            table: v,
                        });
                    }
                }
            } else {
                self.diff.discrepancies.push(ColumnDiscrepancy {
                    row: row.id,
                    column: "Sequence",
                    expected: 0,
                    table: 1,
                });
            }
        }
        self.diff
    }
}

pub fn diff_against_table(g: &ReturnSubgraph, rows: &[TableRow]) -> PathDiff {
    let mut builder = PathDiffBuilder::new(rows.to_vec(), true);
    visit_return_paths(g, &mut |p: &[u8]| {
        builder.observe(g.base_sequence(p), &compute_budget(g, p));
    });
    builder.finish()
}
