//! The sixteen base selection rules, exact `(B, A)` updates and the 8-vertex
//! base transition graph.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::kernel::{step, Iterate, Trajectory};
use crate::octave::{from_base_octave, to_base_octave, Base, BaseOctave};

const ODD_OCTAVE: [u8; 8] = [2, 1, 5, 2, 8, 3, 3, 4];
const EVEN_OCTAVE: [u8; 8] = [6, 5, 1, 6, 4, 7, 7, 8];

/// Destination base for `B` in an octave of parity `s_a` (1 = odd octave).
pub fn next_base(b: Base, s_a: u8) -> Base {
    let table = if s_a & 1 == 1 {
        &ODD_OCTAVE
    } else {
        &EVEN_OCTAVE
    };
    Base::new(table[b.get() as usize - 1] as u64).expect("table entries are bases")
}

/// `A' = (m A + c) / 2^r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffineUpdate {
    pub m: u8,
    pub c: i8,
    pub r: u8,
}

impl AffineUpdate {
    /// Octave update for a source `(B, A)` with `A ≡ s_a (mod 2)`.
    pub fn for_case(b: Base, s_a: u8) -> Self {
        let odd_a = s_a & 1 == 1;
        let (m, c) = match (b.is_odd(), odd_a) {
            (false, true) => (1, 1),
            (false, false) => (1, 0),
            (true, true) if b.get() == 7 => (3, 1),
            (true, true) => (3, -1),
            (true, false) if b.get() == 1 => (3, -2),
            (true, false) => (3, 0),
        };
        AffineUpdate { m, c, r: 1 }
    }

    /// Applies the update; `None` when `A` has the wrong parity for this case
    /// or the result would not be a positive integer.
    pub fn apply(&self, a: &BigUint) -> Option<BigUint> {
        let scaled = a * self.m as u32;
        let shifted = if self.c >= 0 {
            scaled + self.c as u32
        } else {
            let sub = self.c.unsigned_abs() as u32;
            if scaled <= BigUint::from(sub) {
                return None;
            }
            scaled - sub
        };
        let mask = (BigUint::from(1u8) << self.r as u32) - 1u32;
        if (&shifted & &mask) != BigUint::from(0u8) {
            return None;
        }
        Some(shifted >> self.r as u32)
    }
}

/// One of the sixteen selection rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseTransition {
    pub from: Base,
    pub s_a: u8,
    pub to: Base,
    pub affine: AffineUpdate,
}

impl BaseTransition {
    pub fn parity_label(&self) -> &'static str {
        if self.s_a == 1 {
            "odd"
        } else {
            "even"
        }
    }

    pub fn is_self_loop(&self) -> bool {
        self.from == self.to
    }
}

pub fn selection_rules() -> Vec<BaseTransition> {
    let mut rules = Vec::with_capacity(16);
    for from in Base::ALL {
        for s_a in [1u8, 0] {
            rules.push(BaseTransition {
                from,
                s_a,
                to: next_base(from, s_a),
                affine: AffineUpdate::for_case(from, s_a),
            });
        }
    }
    rules
}

/// Exact one-step update in base–octave coordinates.
pub fn step_base_octave(bo: &BaseOctave) -> BaseOctave {
    to_base_octave(&step(&from_base_octave(bo)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateSource {
    /// One of the explicit closed forms.
    ClosedForm,
    /// No closed form is stated for this base; computed exactly instead.
    Delegated,
}

fn half_up(a: &BigUint) -> BigUint {
    (a + 1u32) >> 1u32
}

fn half(a: &BigUint) -> BigUint {
    a >> 1u32
}

/// `(B', A')` from the lemma-level closed forms for `B ∈ {1, 2, 4, 6, 7, 8}`.
/// Bases 3 and 5 go through [`step_base_octave`].
pub fn closed_form_update(bo: &BaseOctave) -> (BaseOctave, UpdateSource) {
    let a = bo.a();
    let odd = bo.s_a() == 1;
    let b = bo.base().get();
    let (b_next, a_next) = match (b, odd) {
        // h' = 12A - 10
        (1, true) => (2, (a * 3u32 - 1u32) >> 1u32),
        (1, false) => (6, (a * 3u32 - 2u32) >> 1u32),
        // h' = 12A - 1
        (7, true) => (3, (a * 3u32 + 1u32) >> 1u32),
        (7, false) => (7, (a * 3u32) >> 1u32),
        // h' = 4A - 3, 4A - 2, 4A - 1, 4A for B = 2, 4, 6, 8
        (2, true) => (1, half_up(a)),
        (2, false) => (5, half(a)),
        (4, true) => (2, half_up(a)),
        (4, false) => (6, half(a)),
        (6, true) => (3, half_up(a)),
        (6, false) => (7, half(a)),
        (8, true) => (4, half_up(a)),
        (8, false) => (8, half(a)),
        _ => return (step_base_octave(bo), UpdateSource::Delegated),
    };
    let next = BaseOctave::new(Base::new(b_next).expect("base"), a_next)
        .expect("closed forms keep A' >= 1");
    (next, UpdateSource::ClosedForm)
}

/// The 8-vertex graph of selection rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    edges: Vec<BaseTransition>,
}

impl BaseGraph {
    pub fn vertices(&self) -> [Base; 8] {
        Base::ALL
    }

    pub fn edges(&self) -> &[BaseTransition] {
        &self.edges
    }

    pub fn out_edges(&self, b: Base) -> impl Iterator<Item = &BaseTransition> {
        self.edges.iter().filter(move |e| e.from == b)
    }

    pub fn self_loops(&self) -> impl Iterator<Item = &BaseTransition> {
        self.edges.iter().filter(|e| e.is_self_loop())
    }
}

pub fn build_base_graph() -> BaseGraph {
    BaseGraph {
        edges: selection_rules(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// The realized base differs from the selection rule.
    Base { expected: Base, found: Base },
    /// The realized octave index differs from the affine update.
    Octave {
        expected: Option<BigUint>,
        found: BigUint,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItineraryViolation {
    /// Index of the source value of the offending pair.
    pub index: usize,
    pub from: Iterate,
    pub to: Iterate,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ItineraryReport {
    pub itinerary: Vec<Base>,
    pub violations: Vec<ItineraryViolation>,
}

impl ItineraryReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn itinerary_u8(&self) -> Vec<u8> {
        self.itinerary.iter().map(|b| b.get()).collect()
    }
}

/// Checks each consecutive pair of `values` against the selection rules and
/// the octave update. The values need not come from the step map.
pub fn validate_values(values: &[Iterate]) -> ItineraryReport {
    let coords: Vec<BaseOctave> = values.iter().map(to_base_octave).collect();
    let mut report = ItineraryReport {
        itinerary: coords.iter().map(BaseOctave::base).collect(),
        violations: Vec::new(),
    };
    for (i, pair) in coords.windows(2).enumerate() {
        let (src, dst) = (&pair[0], &pair[1]);
        let expected = next_base(src.base(), src.s_a());
        if dst.base() != expected {
            report.violations.push(ItineraryViolation {
                index: i,
                from: values[i].clone(),
                to: values[i + 1].clone(),
                kind: ViolationKind::Base {
                    expected,
                    found: dst.base(),
                },
            });
            continue;
        }
        let expected_a = AffineUpdate::for_case(src.base(), src.s_a()).apply(src.a());
        if expected_a.as_ref() != Some(dst.a()) {
            report.violations.push(ItineraryViolation {
                index: i,
                from: values[i].clone(),
                to: values[i + 1].clone(),
                kind: ViolationKind::Octave {
                    expected: expected_a,
                    found: dst.a().clone(),
                },
            });
        }
    }
    report
}

pub fn validate_itinerary(traj: &Trajectory) -> ItineraryReport {
    validate_values(traj.values())
}

/// Fast `u64` form of the base check used by sweeps.
pub fn realized_rule_holds(h: u64) -> Option<bool> {
    let next = crate::kernel::checked_step(h).ok()?;
    let b = ((h - 1) % 8 + 1) as u8;
    let s_a = (((h - 1) / 8 + 1) & 1) as u8;
    let b_next = ((next - 1) % 8 + 1) as u8;
    let expected = next_base(Base::new(b as u64).ok()?, s_a);
    Some(expected.get() == b_next)
}

/// Octave index as `u64`, for display.
pub fn a_u64(bo: &BaseOctave) -> Option<u64> {
    bo.a().to_u64()
}
