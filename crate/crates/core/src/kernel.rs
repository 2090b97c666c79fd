//! The parity-controlled step map, trajectories and net-change bookkeeping.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

/// Default bound on the number of values a trajectory may emit.
pub const DEFAULT_STEP_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("iterates are positive integers; 0 is not allowed")]
    Zero,
    #[error("step cap must be at least 1")]
    EmptyCap,
    #[error("trajectory from {start} was cut off by the step cap before reaching 1")]
    NotTerminated { start: Iterate },
    #[error("fixed-width step overflowed u64 at h = {h}")]
    Overflow { h: u64 },
}

/// A trajectory value: an unbounded natural number `h >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iterate(BigUint);

impl Iterate {
    pub fn new(value: BigUint) -> Result<Self, KernelError> {
        if value.is_zero() {
            Err(KernelError::Zero)
        } else {
            Ok(Iterate(value))
        }
    }

    pub fn from_u64(value: u64) -> Result<Self, KernelError> {
        Self::new(BigUint::from(value))
    }

    pub fn one() -> Self {
        Iterate(BigUint::one())
    }

    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_odd(&self) -> bool {
        self.0.bit(0)
    }

    /// The value as `u64` when it fits.
    pub fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0).ok()
    }
}

impl fmt::Display for Iterate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl TryFrom<u64> for Iterate {
    type Error = KernelError;

    fn try_from(value: u64) -> Result<Self, Self::Error> {
        Iterate::from_u64(value)
    }
}

/// `h = 2k + s` with `s` the parity bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepDecomposition {
    pub h: Iterate,
    pub k: BigUint,
    pub s: u8,
}

impl StepDecomposition {
    pub fn reconstruct(&self) -> BigUint {
        (&self.k << 1u32) + BigUint::from(self.s)
    }
}

pub fn decompose_parity(h: &Iterate) -> StepDecomposition {
    let (k, s) = h.0.div_rem(&BigUint::from(2u8));
    StepDecomposition {
        h: h.clone(),
        k,
        s: if s.is_zero() { 0 } else { 1 },
    }
}

/// One application of the accelerated map.
pub fn step(h: &Iterate) -> Iterate {
    if h.is_odd() {
        // (3h + 1) / 2 is exact for odd h and never zero
        Iterate((&h.0 * 3u32 + 1u32) >> 1u32)
    } else {
        Iterate(&h.0 >> 1u32)
    }
}

/// The single-formula form `((2s+1)(2k+s)+s)/2` of the same map.
pub fn step_unified(h: &Iterate) -> Iterate {
    let d = decompose_parity(h);
    let s = BigUint::from(d.s);
    let numerator = (&s * 2u32 + 1u32) * ((&d.k << 1u32) + &s) + &s;
    Iterate(numerator >> 1u32)
}

/// Fixed-width fast path; reports overflow instead of wrapping.
pub fn checked_step(h: u64) -> Result<u64, KernelError> {
    if h == 0 {
        return Err(KernelError::Zero);
    }
    if h & 1 == 0 {
        return Ok(h >> 1);
    }
    // (3h+1)/2 = h + (h+1)/2, which avoids forming 3h
    h.checked_add((h >> 1) + 1)
        .ok_or(KernelError::Overflow { h })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrajectoryStatus {
    /// The last value is the first occurrence of 1.
    Terminated,
    /// The cap was reached before any value equal to 1.
    CapExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    values: Vec<Iterate>,
    status: TrajectoryStatus,
}

impl Trajectory {
    /// Builds a trajectory from explicit values, checking that consecutive
    /// entries are related by [`step`] and that no 1 appears before the end.
    pub fn from_values(values: Vec<Iterate>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let consistent = values.windows(2).all(|w| step(&w[0]) == w[1]);
        let early_one = values[..values.len() - 1].iter().any(Iterate::is_one);
        if !consistent || early_one {
            return None;
        }
        let status = if values.last().is_some_and(Iterate::is_one) {
            TrajectoryStatus::Terminated
        } else {
            TrajectoryStatus::CapExhausted
        };
        Some(Trajectory { values, status })
    }

    pub fn start(&self) -> &Iterate {
        &self.values[0]
    }

    pub fn values(&self) -> &[Iterate] {
        &self.values
    }

    pub fn status(&self) -> TrajectoryStatus {
        self.status
    }

    pub fn terminated(&self) -> bool {
        self.status == TrajectoryStatus::Terminated
    }

    /// Number of values `m`, including the start.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last(&self) -> &Iterate {
        &self.values[self.values.len() - 1]
    }

    pub fn peak(&self) -> &Iterate {
        self.values.iter().max().unwrap_or(&self.values[0])
    }
}

/// Iterates [`step`] from `h1` until the first 1 (inclusive) or until
/// `step_cap` values have been emitted.
pub fn run_trajectory(h1: &Iterate, step_cap: usize) -> Result<Trajectory, KernelError> {
    if step_cap == 0 {
        return Err(KernelError::EmptyCap);
    }
    let mut values = Vec::new();
    let mut current = h1.clone();
    loop {
        let done = current.is_one();
        values.push(current.clone());
        if done {
            return Ok(Trajectory {
                values,
                status: TrajectoryStatus::Terminated,
            });
        }
        if values.len() >= step_cap {
            return Ok(Trajectory {
                values,
                status: TrajectoryStatus::CapExhausted,
            });
        }
        current = step(&current);
    }
}

/// Sums over the `m - 1` operational steps of a trajectory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetChangeReport {
    pub delta_even: BigInt,
    pub delta_odd: BigInt,
    pub delta_all: BigInt,
    pub sum_k: BigUint,
    pub sum_hs: BigUint,
}

pub fn net_change(traj: &Trajectory) -> NetChangeReport {
    let mut delta_even = BigInt::zero();
    let mut delta_odd = BigInt::zero();
    let mut sum_k = BigUint::zero();
    let mut sum_hs = BigUint::zero();
    let steps = traj.len() - 1;
    for h in &traj.values[..steps] {
        let d = decompose_parity(h);
        if d.s == 1 {
            delta_odd += BigInt::from(&d.k + 1u32);
            sum_hs += h.value();
        } else {
            delta_even -= BigInt::from(d.k.clone());
        }
        sum_k += d.k;
    }
    let delta_all = &delta_even + &delta_odd;
    NetChangeReport {
        delta_even,
        delta_odd,
        delta_all,
        sum_k,
        sum_hs,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceCheck {
    pub holds: bool,
    /// `(h1 - 1) - (sum_k - sum_hs)`.
    pub residual: BigInt,
}

/// Checks `h1 - 1 = sum k_i - sum h_i s_i` on a terminated trajectory.
pub fn check_convergence_identity(traj: &Trajectory) -> Result<ConvergenceCheck, KernelError> {
    if !traj.terminated() {
        return Err(KernelError::NotTerminated {
            start: traj.start().clone(),
        });
    }
    let report = net_change(traj);
    let lhs: BigInt = BigInt::from(traj.start().value().clone()) - 1;
    let rhs = BigInt::from(report.sum_k) - BigInt::from(report.sum_hs);
    let residual = lhs - rhs;
    Ok(ConvergenceCheck {
        holds: residual.is_zero(),
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn it(v: u64) -> Iterate {
        Iterate::from_u64(v).unwrap()
    }

    fn values(t: &Trajectory) -> Vec<u64> {
        t.values().iter().map(|v| v.to_u64().unwrap()).collect()
    }

    // two classical steps per odd value equal one accelerated step
    fn classical(h: u64) -> u64 {
        if h.is_multiple_of(2) {
            h / 2
        } else {
            3 * h + 1
        }
    }

    #[test]
    fn step_examples() {
        assert_eq!(step(&it(20)), it(10));
        assert_eq!(step(&it(1)), it(2));
        assert_eq!(step(&it(27)), it(41));
        assert_eq!(step(&it(2)), it(1));
    }

    #[test]
    fn step_matches_classical_and_unified() {
        for h in 1..=1_000_000u64 {
            let expected = if h % 2 == 0 {
                classical(h)
            } else {
                classical(classical(h))
            };
            let accelerated = step(&it(h));
            assert_eq!(accelerated.to_u64(), Some(expected), "h = {h}");
            if h <= 100_000 {
                assert_eq!(step_unified(&it(h)), accelerated);
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let d = decompose_parity(&it(20));
        assert_eq!((d.k, d.s), (BigUint::from(10u8), 0));
        let d = decompose_parity(&it(5));
        assert_eq!((d.k.clone(), d.s), (BigUint::from(2u8), 1));
        assert_eq!(d.reconstruct(), BigUint::from(5u8));
        let d = decompose_parity(&it(1));
        assert_eq!((d.k, d.s), (BigUint::zero(), 1));
    }

    #[test]
    fn zero_rejected() {
        assert_eq!(Iterate::from_u64(0), Err(KernelError::Zero));
        assert_eq!(checked_step(0), Err(KernelError::Zero));
    }

    #[test]
    fn trajectories() {
        let t = run_trajectory(&it(20), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(values(&t), vec![20, 10, 5, 8, 4, 2, 1]);
        assert!(t.terminated());
        assert_eq!(t.len(), 7);

        let t = run_trajectory(&it(7), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(values(&t), vec![7, 11, 17, 26, 13, 20, 10, 5, 8, 4, 2, 1]);

        let t = run_trajectory(&it(1), DEFAULT_STEP_CAP).unwrap();
        assert_eq!(values(&t), vec![1]);
        assert!(t.terminated());
    }

    #[test]
    fn cap_exhaustion_is_a_status() {
        let t = run_trajectory(&it(27), 5).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.status(), TrajectoryStatus::CapExhausted);
        assert!(matches!(
            check_convergence_identity(&t),
            Err(KernelError::NotTerminated { .. })
        ));
        assert_eq!(run_trajectory(&it(27), 0), Err(KernelError::EmptyCap));
    }

    #[test]
    fn net_change_examples() {
        let t = run_trajectory(&it(1), 10).unwrap();
        let r = net_change(&t);
        assert!(r.delta_all.is_zero() && r.sum_k.is_zero() && r.sum_hs.is_zero());
        assert!(r.delta_even.is_zero() && r.delta_odd.is_zero());

        let t = run_trajectory(&it(20), 100).unwrap();
        let r = net_change(&t);
        assert_eq!(r.sum_k, BigUint::from(24u8));
        assert_eq!(r.sum_hs, BigUint::from(5u8));
        assert_eq!(r.delta_all, BigInt::from(-19));

        let t = Trajectory::from_values(vec![it(5), it(8)]).unwrap();
        let r = net_change(&t);
        assert_eq!(r.delta_odd, BigInt::from(3));
        assert_eq!(r.delta_even, BigInt::zero());
        assert_eq!(r.delta_all, BigInt::from(3));
    }

    #[test]
    fn convergence_identity_examples() {
        for h in [20u64, 1, 7] {
            let t = run_trajectory(&it(h), 1000).unwrap();
            let c = check_convergence_identity(&t).unwrap();
            assert!(c.holds, "h = {h}");
            assert!(c.residual.is_zero());
        }
    }

    #[test]
    fn from_values_rejects_inconsistent_sequences() {
        assert!(Trajectory::from_values(vec![it(7), it(12)]).is_none());
        assert!(Trajectory::from_values(vec![it(1), it(2), it(1)]).is_none());
        assert!(Trajectory::from_values(vec![]).is_none());
    }

    #[test]
    fn checked_step_reports_overflow() {
        assert_eq!(checked_step(27), Ok(41));
        assert_eq!(checked_step(u64::MAX - 1), Ok(u64::MAX / 2));
        assert!(matches!(
            checked_step(u64::MAX),
            Err(KernelError::Overflow { .. })
        ));
        let h = (u64::MAX / 3) | 1;
        assert!(checked_step(h).is_ok());
        assert_eq!(
            BigUint::from(checked_step(h).unwrap()),
            step(&it(h)).into_inner()
        );
    }

    #[test]
    fn big_values_stay_exact() {
        let big = Iterate::new(BigUint::from(u64::MAX) * 3u32 + 2u32).unwrap();
        let t = run_trajectory(&big, DEFAULT_STEP_CAP).unwrap();
        assert!(t.terminated());
        let r = net_change(&t);
        assert_eq!(
            r.delta_all,
            BigInt::from(1) - BigInt::from(big.value().clone())
        );
        assert!(check_convergence_identity(&t).unwrap().holds);
    }
}
