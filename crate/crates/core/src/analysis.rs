//! Persistence episodes, odd-run identities, return drift and range audits.
//!
//! Every check here is decided with integer or rational arithmetic.

use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow};

use crate::kernel::{
    check_convergence_identity, net_change, run_trajectory, step, Iterate, KernelError, Trajectory,
};
use crate::octave::{to_base_octave, v2, BaseOctave};
use crate::rules::validate_itinerary;

/// A maximal run of indices whose values have `B = 7` and `A` even.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Episode {
    /// Index τ of the first value of the run.
    pub start_index: usize,
    pub entry_value: Iterate,
    pub entry_a: BigUint,
    pub entry_v2: u64,
    /// Number of consecutive `7 -> 7` steps.
    pub length: u64,
    /// Index of the first value after the run; `None` when the trajectory
    /// stops inside the run.
    pub exit_index: Option<usize>,
    /// The value at `exit_index`.
    pub exit_value: Option<Iterate>,
}

fn coords(traj: &Trajectory) -> Vec<BaseOctave> {
    traj.values().iter().map(to_base_octave).collect()
}

fn in_persistence(bo: &BaseOctave) -> bool {
    bo.base().get() == 7 && bo.s_a() == 0
}

pub fn detect_episodes(traj: &Trajectory) -> Vec<Episode> {
    episodes_from(traj, &coords(traj))
}

fn episodes_from(traj: &Trajectory, coords: &[BaseOctave]) -> Vec<Episode> {
    let values = traj.values();
    let mut out = Vec::new();
    let mut i = 0;
    while i < coords.len() {
        if !in_persistence(&coords[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < coords.len() && in_persistence(&coords[i]) {
            i += 1;
        }
        let exit_index = (i < coords.len()).then_some(i);
        out.push(Episode {
            start_index: start,
            entry_value: values[start].clone(),
            entry_a: coords[start].a().clone(),
            entry_v2: v2(coords[start].a()),
            length: (i - start) as u64,
            exit_index,
            exit_value: exit_index.map(|j| values[j].clone()),
        });
    }
    out
}

/// `(t <= v2(A_entry), t == v2(A_entry))`.
pub fn check_persistence_bound(e: &Episode) -> (bool, bool) {
    (e.length <= e.entry_v2, e.length == e.entry_v2)
}

/// `(h_end + 1) 2^t == 3^t (h_start + 1)`.
pub fn odd_run_identity_holds(h_start: &BigUint, h_end: &BigUint, t: u32) -> bool {
    let lhs = (h_end + 1u32) << t;
    let rhs = BigUint::from(3u8).pow(t) * (h_start + 1u32);
    lhs == rhs
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OddRun {
    pub start_index: usize,
    /// Number of odd values in the run.
    pub length: u32,
    /// Whether the identity holds for every prefix `t = 1..=length`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OddRunReport {
    pub runs: Vec<OddRun>,
}

impl OddRunReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| !r.holds).count()
    }
}

/// Checks the odd-run identity on every maximal run of odd values that has a
/// successor in the trajectory, for each prefix length of the run.
pub fn check_odd_run_identity(traj: &Trajectory) -> OddRunReport {
    let values = traj.values();
    let mut report = OddRunReport::default();
    let mut i = 0;
    while i < values.len() {
        if !values[i].is_odd() {
            i += 1;
            continue;
        }
        let start = i;
        while i < values.len() && values[i].is_odd() {
            i += 1;
        }
        if i == values.len() {
            break;
        }
        let length = (i - start) as u32;
        let holds = (1..=length).all(|t| {
            odd_run_identity_holds(values[start].value(), values[start + t as usize].value(), t)
        });
        report.runs.push(OddRun {
            start_index: start,
            length,
            holds,
        });
    }
    report
}

/// Exact form of the logarithmic growth bound over one episode:
/// `(h_exit + 1) 2^t = 3^t (h_entry + 1)` together with `t <= v2(A_entry)`.
///
/// Returns `None` when the episode has no exit value to compare with.
pub fn log_gain_bound(e: &Episode) -> Option<bool> {
    if e.length == 0 {
        return Some(true);
    }
    let exit = e.exit_value.as_ref()?;
    let t = u32::try_from(e.length).ok()?;
    Some(e.length <= e.entry_v2 && odd_run_identity_holds(e.entry_value.value(), exit.value(), t))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftRecord {
    pub episode_index: usize,
    pub a_entry: BigUint,
    pub a_next_entry: BigUint,
    /// `A_{τ(k+1)} / A_{τ(k)}` in lowest terms.
    pub ratio: BigRational,
    /// Comparison of the ratio with 1.
    pub sign: Ordering,
}

fn drift_from(episodes: &[Episode]) -> Vec<DriftRecord> {
    episodes
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let ratio = BigRational::new(
                BigInt::from(w[1].entry_a.clone()),
                BigInt::from(w[0].entry_a.clone()),
            );
            let sign = ratio.cmp(&BigRational::one());
            DriftRecord {
                episode_index: k,
                a_entry: w[0].entry_a.clone(),
                a_next_entry: w[1].entry_a.clone(),
                ratio,
                sign,
            }
        })
        .collect()
}

pub fn return_drift(traj: &Trajectory) -> Vec<DriftRecord> {
    drift_from(&detect_episodes(traj))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValuationCheck {
    pub episode_index: usize,
    pub entry_v2: u64,
    pub next_entry_v2: u64,
    /// `v2(A_next) <= v2(A_entry) - 1`.
    pub holds: bool,
}

impl ValuationCheck {
    pub fn evaluate(episode_index: usize, entry_v2: u64, next_entry_v2: u64) -> Self {
        ValuationCheck {
            episode_index,
            entry_v2,
            next_entry_v2,
            holds: next_entry_v2 < entry_v2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValuationAudit {
    pub checks: Vec<ValuationCheck>,
}

impl ValuationAudit {
    pub fn violations(&self) -> impl Iterator<Item = &ValuationCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn violation_count(&self) -> usize {
        self.violations().count()
    }
}

fn valuation_from(episodes: &[Episode]) -> ValuationAudit {
    ValuationAudit {
        checks: episodes
            .windows(2)
            .enumerate()
            .map(|(k, w)| ValuationCheck::evaluate(k, w[0].entry_v2, w[1].entry_v2))
            .collect(),
    }
}

pub fn episode_valuation_audit(traj: &Trajectory) -> ValuationAudit {
    valuation_from(&detect_episodes(traj))
}

/// Everything the range audit records about one start value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartRecord {
    pub h1: Iterate,
    pub terminated: bool,
    /// Number of steps taken (`m - 1`).
    pub steps: u64,
    pub peak: Iterate,
    pub episodes: Vec<Episode>,
    pub rule_violations: u64,
    /// Telescoping or convergence-identity failures.
    pub identity_failures: u64,
    pub odd_run_failures: u64,
    /// Complete episodes with `t != v2(A_entry)`.
    pub persistence_failures: u64,
    /// Episodes not preceded by a `6 -> 7` step (other than at index 0).
    pub provenance_failures: u64,
    /// Consecutive episodes with no even-base step between them.
    pub halving_failures: u64,
    pub valuation: ValuationAudit,
    pub drift: Vec<DriftRecord>,
}

impl StartRecord {
    pub fn max_episode_length(&self) -> u64 {
        self.episodes.iter().map(|e| e.length).max().unwrap_or(0)
    }

    /// Failures of properties that exact arithmetic guarantees.
    pub fn failures(&self) -> u64 {
        self.rule_violations
            + self.identity_failures
            + self.odd_run_failures
            + self.persistence_failures
            + self.provenance_failures
            + self.halving_failures
    }
}

pub fn audit_trajectory(traj: &Trajectory) -> StartRecord {
    let co = coords(traj);
    let episodes = episodes_from(traj, &co);

    let mut identity_failures = 0;
    let report = net_change(traj);
    let telescoped =
        BigInt::from(traj.last().value().clone()) - BigInt::from(traj.start().value().clone());
    if report.delta_all != telescoped || report.delta_all != &report.delta_even + &report.delta_odd
    {
        identity_failures += 1;
    }
    match check_convergence_identity(traj) {
        Ok(c) if !c.holds => identity_failures += 1,
        _ => {}
    }

    let persistence_failures = episodes
        .iter()
        .filter(|e| e.exit_index.is_some() && !check_persistence_bound(e).1)
        .count() as u64;
    let provenance_failures = episodes
        .iter()
        .filter(|e| {
            e.start_index > 0 && {
                let prev = &co[e.start_index - 1];
                !(prev.base().get() == 6 && prev.s_a() == 0)
            }
        })
        .count() as u64;
    let halving_failures = episodes
        .windows(2)
        .filter(|w| {
            let from = w[0].exit_index.unwrap_or(w[0].start_index);
            !co[from..w[1].start_index]
                .iter()
                .any(|bo| !bo.base().is_odd())
        })
        .count() as u64;

    StartRecord {
        h1: traj.start().clone(),
        terminated: traj.terminated(),
        steps: (traj.len() - 1) as u64,
        peak: traj.peak().clone(),
        rule_violations: validate_itinerary(traj).violations.len() as u64,
        identity_failures,
        odd_run_failures: check_odd_run_identity(traj).failures() as u64,
        persistence_failures,
        provenance_failures,
        halving_failures,
        valuation: valuation_from(&episodes),
        drift: drift_from(&episodes),
        episodes,
    }
}

pub fn audit_start(h1: &Iterate, step_cap: usize) -> Result<StartRecord, KernelError> {
    Ok(audit_trajectory(&run_trajectory(h1, step_cap)?))
}

/// Aggregates of a range audit. [`RangeSummary::merge`] is associative and
/// commutative on everything except the order of `cap_exhausted`, which is
/// kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RangeSummary {
    pub starts: u64,
    pub terminated: u64,
    pub cap_exhausted: Vec<Iterate>,
    pub max_steps: Option<(u64, Iterate)>,
    pub max_peak: Option<(Iterate, Iterate)>,
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

fn max_by_key<K: Ord, V: Ord + Clone>(a: Option<(K, V)>, b: Option<(K, V)>) -> Option<(K, V)> {
    // ties go to the smaller start value so the result is order-independent
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => match x.0.cmp(&y.0) {
            Ordering::Greater => Some(x),
            Ordering::Less => Some(y),
            Ordering::Equal => Some(if x.1 <= y.1 { x } else { y }),
        },
    }
}

impl RangeSummary {
    pub fn from_record(r: &StartRecord) -> Self {
        let mut s = RangeSummary {
            starts: 1,
            terminated: r.terminated as u64,
            cap_exhausted: Vec::new(),
            max_steps: Some((r.steps, r.h1.clone())),
            max_peak: Some((r.peak.clone(), r.h1.clone())),
            episodes: r.episodes.len() as u64,
            max_episode_length: r.max_episode_length(),
            rule_violations: r.rule_violations,
            identity_failures: r.identity_failures,
            odd_run_failures: r.odd_run_failures,
            persistence_failures: r.persistence_failures,
            provenance_failures: r.provenance_failures,
            halving_failures: r.halving_failures,
            valuation_checks: r.valuation.checks.len() as u64,
            valuation_violations: r.valuation.violation_count() as u64,
            drift_records: r.drift.len() as u64,
            ..RangeSummary::default()
        };
        if !r.terminated {
            s.cap_exhausted.push(r.h1.clone());
        }
        for d in &r.drift {
            match d.sign {
                Ordering::Greater => s.drift_increasing += 1,
                Ordering::Equal => s.drift_flat += 1,
                Ordering::Less => s.drift_decreasing += 1,
            }
        }
        s
    }

    pub fn merge(mut self, other: RangeSummary) -> Self {
        self.starts += other.starts;
        self.terminated += other.terminated;
        self.cap_exhausted.extend(other.cap_exhausted);
        self.cap_exhausted.sort();
        self.max_steps = max_by_key(self.max_steps, other.max_steps);
        self.max_peak = max_by_key(self.max_peak, other.max_peak);
        self.episodes += other.episodes;
        self.max_episode_length = self.max_episode_length.max(other.max_episode_length);
        self.rule_violations += other.rule_violations;
        self.identity_failures += other.identity_failures;
        self.odd_run_failures += other.odd_run_failures;
        self.persistence_failures += other.persistence_failures;
        self.provenance_failures += other.provenance_failures;
        self.halving_failures += other.halving_failures;
        self.valuation_checks += other.valuation_checks;
        self.valuation_violations += other.valuation_violations;
        self.drift_records += other.drift_records;
        self.drift_increasing += other.drift_increasing;
        self.drift_flat += other.drift_flat;
        self.drift_decreasing += other.drift_decreasing;
        self
    }

    /// Failures of guaranteed properties, plus non-terminating starts.
    pub fn failures(&self) -> u64 {
        self.rule_violations
            + self.identity_failures
            + self.odd_run_failures
            + self.persistence_failures
            + self.provenance_failures
            + self.halving_failures
            + self.cap_exhausted.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RangeAuditReport {
    pub records: Vec<StartRecord>,
    pub summary: RangeSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RangeError {
    #[error("range must satisfy 1 <= lo <= hi, got {lo}..{hi}")]
    Invalid { lo: u64, hi: u64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Sequential range audit over `lo..=hi`.
pub fn range_audit(lo: u64, hi: u64, step_cap: usize) -> Result<RangeAuditReport, RangeError> {
    if lo == 0 || lo > hi {
        return Err(RangeError::Invalid { lo, hi });
    }
    let mut report = RangeAuditReport::default();
    for h in lo..=hi {
        let record = audit_start(&Iterate::from_u64(h)?, step_cap)?;
        report.summary =
            core::mem::take(&mut report.summary).merge(RangeSummary::from_record(&record));
        report.records.push(record);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentTag {
    Growth,
    Decay,
}

impl SegmentTag {
    pub fn label(self) -> &'static str {
        match self {
            SegmentTag::Growth => "growth",
            SegmentTag::Decay => "decay",
        }
    }

    fn of_step_from(h: &Iterate) -> Self {
        if h.is_odd() {
            SegmentTag::Growth
        } else {
            SegmentTag::Decay
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileRow {
    pub index: usize,
    pub h: Iterate,
    pub base: u8,
    pub a: BigUint,
    /// Kind of the step into this value; for index 0, of the step out of it.
    pub tag: SegmentTag,
    /// The second difference of `log2(h + 1)` is nonzero here.
    pub kink: bool,
    /// The tag differs from the previous row's tag.
    pub turning: bool,
}

/// Per-step rows for plotting `log2(h + 1)`. Kinks are decided exactly:
/// index `i + 1` is a kink when `(h_{i+2}+1)(h_i+1) != (h_{i+1}+1)^2`.
pub fn figure2_profile(h1: &Iterate, step_cap: usize) -> Result<Vec<ProfileRow>, KernelError> {
    let traj = run_trajectory(h1, step_cap)?;
    let values = traj.values();
    let plus_one: Vec<BigUint> = values.iter().map(|v| v.value() + 1u32).collect();
    let mut rows: Vec<ProfileRow> = Vec::with_capacity(values.len());
    for (i, h) in values.iter().enumerate() {
        let bo = to_base_octave(h);
        let tag = if i == 0 {
            SegmentTag::of_step_from(h)
        } else {
            SegmentTag::of_step_from(&values[i - 1])
        };
        let kink = i >= 1
            && i + 1 < values.len()
            && &plus_one[i + 1] * &plus_one[i - 1] != &plus_one[i] * &plus_one[i];
        let turning = i > 0 && rows[i - 1].tag != tag;
        rows.push(ProfileRow {
            index: i,
            h: h.clone(),
            base: bo.base().get(),
            a: bo.a().clone(),
            tag,
            kink,
            turning,
        });
    }
    Ok(rows)
}

/// Checks that an iterate sequence restarted at `e.entry_value` reproduces
/// the episode length; used by tests to cross-check detection.
pub fn replay_episode_length(e: &Episode) -> u64 {
    let mut h = e.entry_value.clone();
    let mut t = 0;
    loop {
        let bo = to_base_octave(&h);
        if !in_persistence(&bo) || h.is_one() {
            return t;
        }
        t += 1;
        h = step(&h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::DEFAULT_STEP_CAP;
    use alloc::vec;

    fn it(v: u64) -> Iterate {
        Iterate::from_u64(v).unwrap()
    }

    fn traj(h: u64) -> Trajectory {
        run_trajectory(&it(h), DEFAULT_STEP_CAP).unwrap()
    }

    fn u(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn episode_examples() {
        let eps = detect_episodes(&traj(1639));
        let e = eps
            .iter()
            .find(|e| e.entry_value == it(1663))
            .expect("1663 episode");
        assert_eq!((e.entry_a.clone(), e.entry_v2, e.length), (u(208), 4, 4));
        assert_eq!(e.exit_value, Some(it(8423)));
        // 2767 and 3503 (A = 346, 438) are one-step episodes before 1663
        let entries: Vec<u64> = eps
            .iter()
            .map(|e| e.entry_value.to_u64().unwrap())
            .collect();
        assert_eq!(entries, vec![2767, 3503, 1663]);
        assert_eq!(eps.iter().filter(|e| e.entry_value == it(1663)).count(), 1);

        let eps = detect_episodes(&traj(31));
        assert_eq!(eps[0].start_index, 0);
        assert_eq!((eps[0].entry_a.clone(), eps[0].length), (u(4), 2));
        let t = traj(31);
        assert_eq!(&t.values()[..3], &[it(31), it(47), it(71)]);
        let summary: Vec<(u64, u64)> = eps
            .iter()
            .map(|e| (e.entry_a.to_u64_digits()[0], e.length))
            .collect();
        assert_eq!(summary, vec![(4, 2), (22, 1), (40, 3), (114, 1)]);

        assert!(detect_episodes(&traj(20)).is_empty());
    }

    #[test]
    fn persistence_examples() {
        for h in [1639u64, 31, 15] {
            for e in detect_episodes(&traj(h)) {
                assert_eq!(check_persistence_bound(&e), (true, true));
                assert_eq!(replay_episode_length(&e), e.length);
            }
        }
        let e = &detect_episodes(&traj(15))[0];
        assert_eq!((e.entry_a.clone(), e.length), (u(2), 1));
    }

    #[test]
    fn odd_run_examples() {
        assert!(odd_run_identity_holds(&u(7), &u(17), 2));
        assert_eq!((17 + 1) * 4, 9 * (7 + 1));
        assert!(odd_run_identity_holds(&u(5), &u(8), 1));
        assert!(!odd_run_identity_holds(&u(5), &u(9), 1));

        let r = check_odd_run_identity(&traj(7));
        assert_eq!(r.failures(), 0);
        assert_eq!((r.runs[0].start_index, r.runs[0].length), (0, 3));

        let r = check_odd_run_identity(&traj(1639));
        assert_eq!(r.failures(), 0);
        assert!(r.runs.iter().any(|run| run.length >= 4));
    }

    #[test]
    fn log_gain_examples() {
        let e = detect_episodes(&traj(1639)).remove(0);
        assert_eq!(log_gain_bound(&e), Some(true));
        assert_eq!(8424u64 * 16, 81 * 1664);
        let e = detect_episodes(&traj(31)).remove(0);
        assert_eq!(log_gain_bound(&e), Some(true));
        let mut vacuous = e.clone();
        vacuous.length = 0;
        assert_eq!(log_gain_bound(&vacuous), Some(true));
    }

    #[test]
    fn drift_examples() {
        assert!(return_drift(&traj(20)).is_empty());
        // 103 (A = 13) is an odd-octave visit, but the trajectory has three
        // later episodes, so 31 yields three drift records
        let t = traj(31);
        let later = t.values().iter().position(|v| *v == it(103)).unwrap();
        assert!(!in_persistence(&to_base_octave(&t.values()[later])));
        let drift = return_drift(&t);
        let ratios: Vec<BigRational> = drift.iter().map(|d| d.ratio.clone()).collect();
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(ratios, vec![q(11, 2), q(20, 11), q(57, 20)]);
        assert!(drift.iter().all(|d| d.sign == Ordering::Greater));

        let eps = detect_episodes(&traj(27));
        let drift = return_drift(&traj(27));
        assert_eq!(drift.len(), eps.len().saturating_sub(1));
        for d in &drift {
            assert_eq!(
                d.ratio,
                BigRational::new(d.a_next_entry.clone().into(), d.a_entry.clone().into())
            );
            assert_eq!(d.sign, d.a_next_entry.cmp(&d.a_entry));
        }
    }

    #[test]
    fn valuation_reporting() {
        assert!(episode_valuation_audit(&traj(7)).checks.is_empty());
        let audit = episode_valuation_audit(&traj(31));
        let pairs: Vec<(u64, u64, bool)> = audit
            .checks
            .iter()
            .map(|c| (c.entry_v2, c.next_entry_v2, c.holds))
            .collect();
        assert_eq!(pairs, vec![(2, 1, true), (1, 3, false), (3, 1, true)]);
        let c = ValuationCheck::evaluate(0, 2, 3);
        assert!(!c.holds);
        let audit = ValuationAudit {
            checks: vec![c.clone(), ValuationCheck::evaluate(1, 4, 1)],
        };
        assert_eq!(audit.violation_count(), 1);
        assert_eq!(audit.violations().next(), Some(&c));
    }

    #[test]
    fn range_examples() {
        let r = range_audit(1, 16, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(r.summary.starts, 16);
        assert_eq!(r.summary.terminated, 16);
        assert_eq!(r.summary.failures(), 0);

        let r = range_audit(27, 27, DEFAULT_STEP_CAP).unwrap();
        let rec = &r.records[0];
        assert!(rec.terminated);
        assert_eq!(rec.steps, 70);
        assert_eq!(rec.peak, it(4616));

        assert_eq!(
            range_audit(0, 5, 10),
            Err(RangeError::Invalid { lo: 0, hi: 5 })
        );
        assert!(range_audit(6, 5, 10).is_err());
    }

    #[test]
    fn cap_exhaustion_is_listed() {
        let r = range_audit(27, 27, 10).unwrap();
        assert_eq!(r.summary.cap_exhausted, vec![it(27)]);
        assert_eq!(r.summary.failures(), 1);
    }

    #[test]
    fn merge_is_order_independent() {
        let parts: Vec<RangeSummary> = (1..=40u64)
            .map(|h| RangeSummary::from_record(&audit_start(&it(h), DEFAULT_STEP_CAP).unwrap()))
            .collect();
        let forward = parts
            .iter()
            .cloned()
            .fold(RangeSummary::default(), RangeSummary::merge);
        let backward = parts
            .iter()
            .rev()
            .cloned()
            .fold(RangeSummary::default(), RangeSummary::merge);
        let (left, right) = parts.split_at(17);
        let split = left
            .iter()
            .cloned()
            .fold(RangeSummary::default(), RangeSummary::merge)
            .merge(
                right
                    .iter()
                    .cloned()
                    .fold(RangeSummary::default(), RangeSummary::merge),
            );
        assert_eq!(forward, backward);
        assert_eq!(forward, split);
    }

    #[test]
    fn profile_examples() {
        let rows = figure2_profile(&it(8), 100).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.tag == SegmentTag::Decay));

        let rows = figure2_profile(&it(1), 100).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(!rows[0].kink);

        let rows = figure2_profile(&it(1639), DEFAULT_STEP_CAP).unwrap();
        let at = rows.iter().position(|r| r.h == it(1663)).unwrap();
        for r in &rows[at + 1..=at + 4] {
            assert_eq!(r.tag, SegmentTag::Growth);
            assert_eq!(r.base, 7);
        }
        // inside an odd run (h+1) grows by exactly 3/2 per step
        for r in &rows[at + 1..at + 4] {
            assert!(!r.kink, "index {}", r.index);
        }
    }
}
