//! Property-based checks of the algebraic invariants the crate leans on:
//! translation invariance of residue counts, saturation past the span,
//! compensated-sum merge accuracy, iterated-log composition, threshold
//! family ordering, and segmentation invariance of the sieve.

mod common;

use proptest::prelude::*;
use std::collections::BTreeSet;

use gaplab::kahan::KahanSum;
use gaplab::sieve::{self, SegmentSpec};
use gaplab::singular::{pair_value, Tuple};
use gaplab::survivors::{is_survivor, SurvivorMode};
use gaplab::thresholds::{iter_log, ThresholdFamily, ThresholdSpec};

fn tuple_from_set(set: &BTreeSet<u64>) -> Tuple {
    Tuple::new(set.iter().copied().collect()).unwrap()
}

proptest! {
    #[test]
    fn residue_count_is_translation_invariant(
        offsets in prop::collection::btree_set(0u64..300, 1..6),
        shift in 0u64..500,
        p in prop_oneof![Just(2u64), Just(3), Just(5), Just(7), Just(11), Just(13), Just(97)],
    ) {
        let base = tuple_from_set(&offsets);
        let shifted = Tuple::new(offsets.iter().map(|&h| h + shift).collect()).unwrap();
        prop_assert_eq!(base.residue_count(p), shifted.residue_count(p));
    }

    #[test]
    fn admissibility_is_translation_invariant(
        offsets in prop::collection::btree_set(0u64..300, 1..6),
        shift in 0u64..500,
    ) {
        let base = tuple_from_set(&offsets);
        let shifted = Tuple::new(offsets.iter().map(|&h| h + shift).collect()).unwrap();
        prop_assert_eq!(base.is_admissible(), shifted.is_admissible());
    }

    #[test]
    fn residue_count_saturates_past_span(
        offsets in prop::collection::btree_set(0u64..1000, 1..6),
        extra in 0u64..50,
    ) {
        let tuple = tuple_from_set(&offsets);
        let mut p = sieve::next_prime_after(tuple.span() + extra).unwrap();
        if p <= tuple.span() {
            p = sieve::next_prime_after(tuple.span()).unwrap();
        }
        prop_assert_eq!(tuple.residue_count(p), tuple.len() as u64);
    }

    #[test]
    fn kahan_merge_tracks_single_pass(
        values in prop::collection::vec(-1.0e6f64..1.0e6, 0..200),
        split in 0usize..200,
    ) {
        let split = split.min(values.len());
        let mut whole = KahanSum::new();
        for &v in &values {
            whole.add(v);
        }
        let mut left = KahanSum::new();
        for &v in &values[..split] {
            left.add(v);
        }
        let mut right = KahanSum::new();
        for &v in &values[split..] {
            right.add(v);
        }
        left.merge(right);
        let scale = values.iter().map(|v| v.abs()).sum::<f64>() + 1.0;
        prop_assert!((whole.value() - left.value()).abs() <= 1e-10 * scale);
    }

    #[test]
    fn iter_log_composes_exactly(t in 100.0f64..1.0e15, k in 1u32..4) {
        // peeling one log off either end walks the same operation chain
        if let Ok(outer) = iter_log(k + 1, t) {
            prop_assert_eq!(outer, iter_log(k, t).unwrap().ln());
            prop_assert_eq!(outer, iter_log(k, t.ln()).unwrap());
        }
    }

    #[test]
    fn divergent_scale_shrinks(
        t1 in 16.0f64..1.0e12,
        ratio in 1.001f64..1.0e3,
    ) {
        let spec = ThresholdSpec::new(ThresholdFamily::Divergent { k: 2 }).unwrap();
        let t2 = t1 * ratio;
        prop_assert!(spec.lambda(t1).unwrap() >= spec.lambda(t2).unwrap());
    }

    #[test]
    fn convergent_sits_below_divergent(
        t in 16.0f64..1.0e15,
        eps in 0.01f64..3.0,
    ) {
        let div = ThresholdSpec::new(ThresholdFamily::Divergent { k: 2 }).unwrap();
        let conv = ThresholdSpec::new(ThresholdFamily::Convergent { k: 2, eps }).unwrap();
        // log_2 t > 1 past e^e, so the extra factor genuinely shrinks
        prop_assert!(conv.lambda(t).unwrap() < div.lambda(t).unwrap());
    }

    #[test]
    fn pair_value_vanishes_exactly_on_odd_distances(d in 1u64..5000) {
        let v = pair_value(d).unwrap();
        if d % 2 == 1 {
            prop_assert_eq!(v, 0.0);
        } else {
            prop_assert!(v > 0.0);
        }
    }

    #[test]
    fn survivor_membership_matches_trial_division(
        m in 2u64..10_000,
        z in prop_oneof![Just(3u64), Just(5), Just(7), Just(11), Just(23)],
    ) {
        let got = is_survivor(SurvivorMode::FixedZ { z }, m).unwrap();
        prop_assert_eq!(got, common::trial_spf(m) >= z);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prime_count_is_segment_invariant(
        x in 1_000u64..40_000,
        segment_len in 64u64..4096,
    ) {
        let spec = SegmentSpec::with_segment_len(2, x + 1, segment_len).unwrap();
        prop_assert_eq!(
            sieve::prime_count_in(&spec, 1).unwrap(),
            sieve::prime_count(x, 1).unwrap()
        );
    }

    #[test]
    fn sieve_matches_trial_division_on_random_windows(
        lo in 2u64..1_000_000,
        len in 1u64..400,
    ) {
        let spec = SegmentSpec::new(lo, lo + len).unwrap();
        let got = sieve::primes_in_range(&spec).unwrap();
        prop_assert_eq!(got, common::trial_primes(lo, lo + len));
    }
}
