//! Base–octave coordinates `h = B + 8(A - 1)` and the parity bits derived
//! from them.

use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::kernel::Iterate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OctaveError {
    #[error("base must lie in 1..=8, got {0}")]
    BaseOutOfRange(u64),
    #[error("octave index must be at least 1")]
    ZeroOctave,
    #[error("parity bit must be 0 or 1, got {0}")]
    NotABit(u8),
}

/// Residue representative `B` in `1..=8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Base(u8);

impl Base {
    pub const ALL: [Base; 8] = [
        Base(1),
        Base(2),
        Base(3),
        Base(4),
        Base(5),
        Base(6),
        Base(7),
        Base(8),
    ];

    pub fn new(b: u64) -> Result<Self, OctaveError> {
        if (1..=8).contains(&b) {
            Ok(Base(b as u8))
        } else {
            Err(OctaveError::BaseOutOfRange(b))
        }
    }

    pub const fn get(self) -> u8 {
        self.0
    }

    pub const fn is_odd(self) -> bool {
        self.0 & 1 == 1
    }

    pub const fn bits(self) -> BaseBits {
        BaseBits {
            s_b: self.0 & 1,
            k_b: self.0 >> 1,
            s_c: (self.0 >> 1) & 1,
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `B = 2 k_b + s_b`, `s_c = k_b mod 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BaseBits {
    pub s_b: u8,
    pub k_b: u8,
    pub s_c: u8,
}

/// The low three bits of the octave index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OctaveBits {
    pub s_a: u8,
    pub s_q: u8,
    pub s_r: u8,
}

impl OctaveBits {
    pub fn of(a: &BigUint) -> Self {
        OctaveBits {
            s_a: a.bit(0) as u8,
            s_q: a.bit(1) as u8,
            s_r: a.bit(2) as u8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BaseOctave {
    base: Base,
    a: BigUint,
}

impl BaseOctave {
    pub fn new(base: Base, a: BigUint) -> Result<Self, OctaveError> {
        if a.is_zero() {
            return Err(OctaveError::ZeroOctave);
        }
        Ok(BaseOctave { base, a })
    }

    pub fn from_u64(b: u64, a: u64) -> Result<Self, OctaveError> {
        Self::new(Base::new(b)?, BigUint::from(a))
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn a(&self) -> &BigUint {
        &self.a
    }

    pub fn octave_bits(&self) -> OctaveBits {
        OctaveBits::of(&self.a)
    }

    pub fn s_a(&self) -> u8 {
        self.a.bit(0) as u8
    }

    pub fn state(&self) -> ExtendedState {
        ExtendedState::from_parts(self.base, self.octave_bits())
    }
}

pub fn to_base_octave(h: &Iterate) -> BaseOctave {
    let v = h.value() - 1u32;
    let low = (&v & BigUint::from(7u8)).to_u8().unwrap_or(0);
    BaseOctave {
        base: Base(low + 1),
        a: (v >> 3u32) + 1u32,
    }
}

pub fn from_base_octave(bo: &BaseOctave) -> Iterate {
    let h = ((&bo.a - 1u32) << 3u32) + bo.base.get();
    Iterate::new(h).expect("B >= 1 keeps the reconstruction positive")
}

/// Validating variant of [`from_base_octave`] for raw inputs.
pub fn from_raw(b: u64, a: &BigUint) -> Result<Iterate, OctaveError> {
    let bo = BaseOctave::new(Base::new(b)?, a.clone())?;
    Ok(from_base_octave(&bo))
}

/// The finite descriptor `(B, s_b, s_c, s_a, s_q, s_r)`.
///
/// `s_b` and `s_c` are functions of `B`, so only `B` and the octave bits are
/// stored; there are exactly 64 values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtendedState {
    base: Base,
    octave: OctaveBits,
}

impl ExtendedState {
    pub const COUNT: usize = 64;

    pub const fn from_parts(base: Base, octave: OctaveBits) -> Self {
        ExtendedState { base, octave }
    }

    pub fn new(b: u64, s_a: u8, s_q: u8, s_r: u8) -> Result<Self, OctaveError> {
        for bit in [s_a, s_q, s_r] {
            if bit > 1 {
                return Err(OctaveError::NotABit(bit));
            }
        }
        Ok(ExtendedState {
            base: Base::new(b)?,
            octave: OctaveBits { s_a, s_q, s_r },
        })
    }

    /// All 64 tuples, ordered by `(B, s_a, s_q, s_r)`.
    pub fn all() -> impl Iterator<Item = ExtendedState> {
        (0..Self::COUNT).map(Self::from_index)
    }

    pub fn from_index(i: usize) -> Self {
        let i = i % Self::COUNT;
        ExtendedState {
            base: Base((i / 8) as u8 + 1),
            octave: OctaveBits {
                s_a: ((i >> 2) & 1) as u8,
                s_q: ((i >> 1) & 1) as u8,
                s_r: (i & 1) as u8,
            },
        }
    }

    pub fn index(&self) -> usize {
        (self.base.get() as usize - 1) * 8
            + ((self.octave.s_a as usize) << 2)
            + ((self.octave.s_q as usize) << 1)
            + self.octave.s_r as usize
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn b(&self) -> u8 {
        self.base.get()
    }

    pub fn s_b(&self) -> u8 {
        self.base.bits().s_b
    }

    pub fn s_c(&self) -> u8 {
        self.base.bits().s_c
    }

    pub fn s_a(&self) -> u8 {
        self.octave.s_a
    }

    pub fn s_q(&self) -> u8 {
        self.octave.s_q
    }

    pub fn s_r(&self) -> u8 {
        self.octave.s_r
    }

    pub fn octave_bits(&self) -> OctaveBits {
        self.octave
    }

    /// Smallest octave index carrying these bits.
    pub fn min_witness(&self) -> u64 {
        let low = (self.s_r() as u64) << 2 | (self.s_q() as u64) << 1 | self.s_a() as u64;
        if low == 0 {
            8
        } else {
            low
        }
    }

    pub fn v2_class(&self) -> V2Class {
        V2Class::from_bits(self.octave)
    }
}

impl fmt::Display for ExtendedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "B{}_sb{}_sc{}_sa{}_sq{}_sr{}",
            self.b(),
            self.s_b(),
            self.s_c(),
            self.s_a(),
            self.s_q(),
            self.s_r()
        )
    }
}

pub fn extract_state(h: &Iterate) -> ExtendedState {
    to_base_octave(h).state()
}

/// 2-adic valuation of `a >= 1`.
pub fn v2(a: &BigUint) -> u64 {
    a.trailing_zeros().unwrap_or(0)
}

/// `v2` thresholded at 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum V2Class {
    Zero,
    One,
    Two,
    AtLeastThree,
}

impl V2Class {
    pub fn from_bits(bits: OctaveBits) -> Self {
        match (bits.s_a, bits.s_q, bits.s_r) {
            (1, _, _) => V2Class::Zero,
            (0, 1, _) => V2Class::One,
            (0, 0, 1) => V2Class::Two,
            _ => V2Class::AtLeastThree,
        }
    }

    pub fn of(a: &BigUint) -> Self {
        Self::from_bits(OctaveBits::of(a))
    }

    pub fn from_valuation(v: u64) -> Self {
        match v {
            0 => V2Class::Zero,
            1 => V2Class::One,
            2 => V2Class::Two,
            _ => V2Class::AtLeastThree,
        }
    }

    /// Fixture spelling: `v2=0`, `v2=1`, `v2=2`, `v2>=3`.
    pub fn label(self) -> &'static str {
        match self {
            V2Class::Zero => "v2=0",
            V2Class::One => "v2=1",
            V2Class::Two => "v2=2",
            V2Class::AtLeastThree => "v2>=3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "v2=0" | "v₂=0" => Some(V2Class::Zero),
            "v2=1" | "v₂=1" => Some(V2Class::One),
            "v2=2" | "v₂=2" => Some(V2Class::Two),
            "v2>=3" | "v₂≥3" | "v2≥3" => Some(V2Class::AtLeastThree),
            _ => None,
        }
    }
}

pub fn v2_class(a: &BigUint) -> V2Class {
    V2Class::of(a)
}

/// The base residue shift contributed by the octave term: 0 in odd octaves,
/// 4 in even ones.
pub fn mod8_shift(s_a: u8) -> u8 {
    4 * (1 - (s_a & 1))
}

/// `(1 - s_a, 1 - 2 s_b)`: the even-octave indicator and the base-parity sign.
pub fn parity_factors(s_a: u8, s_b: u8) -> (u8, i8) {
    (1 - (s_a & 1), 1 - 2 * (s_b & 1) as i8)
}

/// One step computed from `(B, A)` by splitting the update into a base part
/// and an octave part.
pub fn step_split(bo: &BaseOctave) -> Iterate {
    let bits = bo.base.bits();
    let mult = 2 * bits.s_b as u32 + 1;
    let base_part = (mult * bo.base.get() as u32 + bits.s_b as u32) / 2;
    let octave_part = (&bo.a - BigUint::one()) * (4 * mult);
    Iterate::new(octave_part + base_part).expect("base part is at least 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::step;

    fn it(v: u64) -> Iterate {
        Iterate::from_u64(v).unwrap()
    }

    fn bo(h: u64) -> (u8, u64) {
        let d = to_base_octave(&it(h));
        (d.base().get(), d.a().to_u64().unwrap())
    }

    #[test]
    fn decomposition_examples() {
        assert_eq!(bo(1663), (7, 208));
        assert_eq!(bo(15), (7, 2));
        assert_eq!(bo(8), (8, 1));
        assert_eq!(bo(1), (1, 1));
        assert_eq!(bo(9), (1, 2));
    }

    #[test]
    fn reconstruction_examples() {
        let h = |b, a| from_base_octave(&BaseOctave::from_u64(b, a).unwrap()).to_u64();
        assert_eq!(h(7, 208), Some(1663));
        assert_eq!(h(1, 1), Some(1));
        assert_eq!(h(3, 2), Some(11));
        assert_eq!(Base::new(9), Err(OctaveError::BaseOutOfRange(9)));
        assert_eq!(Base::new(0), Err(OctaveError::BaseOutOfRange(0)));
        assert_eq!(BaseOctave::from_u64(3, 0), Err(OctaveError::ZeroOctave));
    }

    #[test]
    fn round_trip_and_parity_isolation() {
        for h in 1..=1_000_000u64 {
            let d = to_base_octave(&it(h));
            assert_eq!(from_base_octave(&d).to_u64(), Some(h));
            assert_eq!(h % 2 == 1, d.base().is_odd());
        }
    }

    #[test]
    fn state_examples() {
        let s = extract_state(&it(1663));
        assert_eq!(
            (s.b(), s.s_b(), s.s_c(), s.s_a(), s.s_q(), s.s_r()),
            (7, 1, 1, 0, 0, 0)
        );
        let s = extract_state(&it(7));
        assert_eq!((s.s_a(), s.s_q(), s.s_r()), (1, 0, 0));
        let s = extract_state(&it(31));
        assert_eq!((s.b(), s.s_a(), s.s_q(), s.s_r()), (7, 0, 0, 1));
        assert_eq!(s.to_string(), "B7_sb1_sc1_sa0_sq0_sr1");
    }

    #[test]
    fn base_bits_reconstruct() {
        for b in Base::ALL {
            let bits = b.bits();
            assert_eq!(2 * bits.k_b + bits.s_b, b.get());
            assert_eq!(bits.s_c, bits.k_b % 2);
        }
    }

    #[test]
    fn sixty_four_states() {
        let all: alloc::vec::Vec<_> = ExtendedState::all().collect();
        assert_eq!(all.len(), 64);
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.index(), i);
            assert_eq!(
                ExtendedState::new(s.b() as u64, s.s_a(), s.s_q(), s.s_r()).unwrap(),
                *s
            );
            let w = BigUint::from(s.min_witness());
            assert_eq!(OctaveBits::of(&w), s.octave_bits());
        }
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 64);
        assert_eq!(ExtendedState::new(1, 2, 0, 0), Err(OctaveError::NotABit(2)));
    }

    #[test]
    fn valuation_examples() {
        let v = |a: u64| v2(&BigUint::from(a));
        assert_eq!(v(208), 4);
        assert_eq!(v(1), 0);
        assert_eq!(v(6), 1);
        let c = |a: u64| v2_class(&BigUint::from(a));
        assert_eq!(c(5), V2Class::Zero);
        assert_eq!(c(12), V2Class::Two);
        assert_eq!(c(16), V2Class::AtLeastThree);
    }

    #[test]
    fn v2_class_matches_threshold() {
        for a in 1..=1_000_000u64 {
            let big = BigUint::from(a);
            assert_eq!(
                v2_class(&big),
                V2Class::from_valuation(a.trailing_zeros() as u64)
            );
        }
    }

    #[test]
    fn v2_class_labels_round_trip() {
        for c in [
            V2Class::Zero,
            V2Class::One,
            V2Class::Two,
            V2Class::AtLeastThree,
        ] {
            assert_eq!(V2Class::parse(c.label()), Some(c));
        }
        assert_eq!(V2Class::parse("v₂≥3"), Some(V2Class::AtLeastThree));
        assert_eq!(V2Class::parse("v2=4"), None);
    }

    #[test]
    fn shift_and_factors() {
        assert_eq!(mod8_shift(1), 0);
        assert_eq!(mod8_shift(0), 4);
        assert_eq!((2 * mod8_shift(0)) % 8, 0);
        assert_eq!(parity_factors(0, 0), (1, 1));
        assert_eq!(parity_factors(1, 1), (0, -1));
        assert_eq!(parity_factors(0, 1), (1, -1));
    }

    #[test]
    fn split_step_agrees() {
        for h in 1..=100_000u64 {
            let d = to_base_octave(&it(h));
            assert_eq!(step_split(&d), step(&it(h)), "h = {h}");
        }
    }

    #[test]
    fn octave_term_shift_mod8() {
        // 4(2 s_b + 1)(A - 1) mod 8 depends only on s_a
        for a in 1..200u64 {
            for s_b in 0..2u64 {
                let term = 4 * (2 * s_b + 1) * (a - 1);
                assert_eq!((term % 8) as u8, mod8_shift((a % 2) as u8));
            }
        }
    }
}
