use collatz_octave_core::analysis::{
    audit_start, check_odd_run_identity, detect_episodes, RangeSummary,
};
use collatz_octave_core::kernel::{
    check_convergence_identity, net_change, run_trajectory, step, step_unified, Iterate,
};
use collatz_octave_core::octave::{
    from_base_octave, step_split, to_base_octave, v2, v2_class, BaseOctave, V2Class,
};
use collatz_octave_core::rules::{closed_form_update, next_base, step_base_octave, AffineUpdate};
use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn big() -> impl Strategy<Value = BigUint> {
    prop::collection::vec(any::<u32>(), 1..8).prop_map(|digits| BigUint::new(digits) + 1u32)
}

fn iterate() -> impl Strategy<Value = Iterate> {
    big().prop_map(|v| Iterate::new(v).unwrap())
}

proptest! {
    #[test]
    fn step_is_the_accelerated_map(h in iterate()) {
        let v = h.value();
        let expected = if v.is_even() { v / 2u32 } else { (v * 3u32 + 1u32) / 2u32 };
        let next = step(&h);
        prop_assert_eq!(next.value(), &expected);
        prop_assert_eq!(step_unified(&h), step(&h));
    }

    #[test]
    fn base_octave_round_trip(h in iterate()) {
        let bo = to_base_octave(&h);
        prop_assert_eq!(from_base_octave(&bo), h.clone());
        prop_assert_eq!(h.is_odd(), bo.base().is_odd());
        prop_assert!(!bo.a().is_zero());
    }

    #[test]
    fn split_form_matches_step(h in iterate()) {
        prop_assert_eq!(step_split(&to_base_octave(&h)), step(&h));
    }

    #[test]
    fn realized_base_follows_selection_rule(h in iterate()) {
        let bo = to_base_octave(&h);
        let next = step_base_octave(&bo);
        prop_assert_eq!(next.base(), next_base(bo.base(), bo.s_a()));
        let affine = AffineUpdate::for_case(bo.base(), bo.s_a());
        let applied = affine.apply(bo.a());
        prop_assert_eq!(applied.as_ref(), Some(next.a()));
    }

    #[test]
    fn closed_forms_agree_with_exact_update(b in 1u64..=8, a in 1u64..=10_000) {
        let bo = BaseOctave::from_u64(b, a).unwrap();
        prop_assert_eq!(closed_form_update(&bo).0, step_base_octave(&bo));
    }

    #[test]
    fn v2_class_thresholds_valuation(a in big()) {
        let expected = match v2(&a) {
            0 => V2Class::Zero,
            1 => V2Class::One,
            2 => V2Class::Two,
            _ => V2Class::AtLeastThree,
        };
        prop_assert_eq!(v2_class(&a), expected);
    }

    #[test]
    fn valuation_divides_exactly(a in big()) {
        let k = v2(&a);
        let pow = BigUint::one() << k;
        prop_assert!((&a % &pow).is_zero());
        prop_assert!((&a / &pow).is_odd());
    }

    #[test]
    fn gateway_bases_reach_even_base(h in iterate()) {
        let bo = to_base_octave(&h);
        match bo.base().get() {
            5 => prop_assert!(!step_base_octave(&bo).base().is_odd()),
            3 => {
                let once = step_base_octave(&bo);
                let even = !once.base().is_odd() || !step_base_octave(&once).base().is_odd();
                prop_assert!(even);
            }
            _ => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn trajectory_identities(h1 in 1u64..=100_000) {
        let t = run_trajectory(&Iterate::from_u64(h1).unwrap(), 1_000_000).unwrap();
        prop_assert!(t.terminated());
        prop_assert!(t.values()[..t.len() - 1].iter().all(|v| !v.is_one()));
        for w in t.values().windows(2) {
            prop_assert_eq!(&step(&w[0]), &w[1]);
        }
        let r = net_change(&t);
        let telescoped = num_bigint::BigInt::from(t.last().value().clone())
            - num_bigint::BigInt::from(t.start().value().clone());
        prop_assert_eq!(&r.delta_all, &telescoped);
        prop_assert_eq!(&r.delta_all, &(&r.delta_even + &r.delta_odd));
        let c = check_convergence_identity(&t).unwrap();
        prop_assert!(c.holds);
        prop_assert!(c.residual.is_zero());
    }

    #[test]
    fn episode_and_odd_run_invariants(h1 in 1u64..=100_000) {
        let record = audit_start(&Iterate::from_u64(h1).unwrap(), 1_000_000).unwrap();
        prop_assert_eq!(record.failures(), 0);
        for e in &record.episodes {
            if e.exit_index.is_some() {
                prop_assert_eq!(e.length, e.entry_v2);
            }
        }
        let t = run_trajectory(&Iterate::from_u64(h1).unwrap(), 1_000_000).unwrap();
        prop_assert_eq!(check_odd_run_identity(&t).failures(), 0);
        prop_assert_eq!(detect_episodes(&t), record.episodes.clone());
    }

    #[test]
    fn range_merge_is_associative(h1 in 1u64..=50_000, split in 1usize..6, len in 2usize..12) {
        let parts: Vec<RangeSummary> = (h1..h1 + len as u64)
            .map(|h| RangeSummary::from_record(&audit_start(&Iterate::from_u64(h).unwrap(), 1_000_000).unwrap()))
            .collect();
        let split = split.min(parts.len() - 1);
        let left_first = parts
            .iter()
            .cloned()
            .fold(RangeSummary::default(), RangeSummary::merge);
        let (a, b) = parts.split_at(split);
        let fold = |xs: &[RangeSummary]| xs.iter().cloned().fold(RangeSummary::default(), RangeSummary::merge);
        prop_assert_eq!(fold(a).merge(fold(b)), left_first.clone());
        prop_assert_eq!(fold(b).merge(fold(a)), left_first);
    }
}

#[test]
fn gateway_transience_up_to_a_million() {
    for h in 1..=1_000_000u64 {
        let b = base_of(h);
        if b == 5 {
            assert_eq!(base_of(step_u64(h)) % 2, 0, "h = {h}");
        } else if b == 3 {
            let (h1, h2) = (step_u64(h), step_u64(step_u64(h)));
            assert!(
                base_of(h1).is_multiple_of(2) || base_of(h2).is_multiple_of(2),
                "h = {h}"
            );
        }
    }
}

fn base_of(h: u64) -> u64 {
    (h - 1) % 8 + 1
}

fn step_u64(h: u64) -> u64 {
    collatz_octave_core::kernel::checked_step(h).unwrap()
}
