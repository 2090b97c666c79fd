//! Exact arithmetic for the parity-controlled (accelerated) Collatz map
//! `h -> h/2` (h even), `h -> (3h+1)/2` (h odd), organised around the
//! base-octave decomposition `h = B + 8(A - 1)`.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. It covers:
//!
//! * [`kernel`]: the step map, trajectories and the net-change identities,
//! * [`octave`]: base-octave coordinates, parity bits and 2-adic valuation,
//! * [`rules`]: the 16 base selection rules, closed-form octave updates and
//!   the 8-vertex base graph,
//! * [`codebook`]: the 128-row extended-state transition codebook, derived
//!   from exact arithmetic, plus a cell-level diff against a reference book,
//! * [`paths`]: return-path enumeration with 2-adic budget accounting and
//!   the cycle-weight audit,
//! * [`analysis`]: persistence episodes, log-linear identities, return drift
//!   and range audits.
//!
//! Every assertion made by the audits is decided with integer or rational
//! arithmetic; floating point only appears in display helpers.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod codebook;
pub mod kernel;
pub mod octave;
pub mod paths;
pub mod rules;

pub use kernel::{Iterate, Trajectory, TrajectoryStatus};
pub use octave::{Base, BaseOctave, ExtendedState};
