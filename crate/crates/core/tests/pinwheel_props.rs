//! Cross-checks between the constructive schedulers and the brute-force
//! oracle, plus the schedulability invariants fuzzed over random vectors.

use backhaul_core::pinwheel::{
    brute_force_schedulable, density, is_regularize, is_reinsert, is_schedule, round_robin,
    sxy_feasible, sxy_schedule, verify_schedule, BruteForceOutcome, IsSolver, KVector,
};
use backhaul_core::rational::{rat, Rational};
use proptest::prelude::*;

const ORACLE_CAP: usize = 4_000_000;

/// Nondecreasing multisets of length `m` over `[2, k_max]`.
fn multisets(m: usize, k_max: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![2u64; m];
    loop {
        out.push(cur.clone());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < k_max {
                let v = cur[i] + 1;
                for item in cur.iter_mut().skip(i) {
                    *item = v;
                }
                break;
            }
        }
    }
}

#[test]
fn oracle_agreement_small_grid() {
    // quick slice of the exhaustive grid; the acceptance suite runs M <= 4
    for m in 1..=3usize {
        for values in multisets(m, 8) {
            let k = KVector::from_finite(&values);
            let oracle = brute_force_schedulable(&k, ORACLE_CAP);
            let is = is_schedule(&k);
            if let Some((pi, _)) = &is {
                assert!(verify_schedule(pi, &k).is_valid(), "IS soundness on {values:?}");
                assert!(
                    oracle.is_schedulable(),
                    "IS scheduled {values:?} which the oracle rejects"
                );
            }
            if sxy_schedule(&k).is_some() {
                assert!(is.is_some(), "Sxy success must imply IS success on {values:?}");
            }
        }
    }
}

#[test]
fn low_density_vectors_always_schedule() {
    // sanity sample of the 5/6-conjecture corpus; the full run lives in the
    // acceptance suite
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut next = move || {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    let mut tested = 0;
    while tested < 400 {
        let m = 4 + (next() % 9) as usize; // M in [4, 12]
        let hi = 3 * m as u64 - 1;
        let values: Vec<u64> = (0..m).map(|_| 2 + next() % (hi - 1)).collect();
        let k = KVector::from_finite(&values);
        let rho = density(&k);
        if rho <= rat(7, 10) || rho > rat(83, 100) {
            continue;
        }
        tested += 1;
        assert!(
            is_schedule(&k).is_some(),
            "IS failed on density {} vector {:?}",
            rho,
            values
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Soundness fuzz: whatever IS returns must verify; density must allow it.
    #[test]
    fn is_output_always_verifies(values in prop::collection::vec(1u64..20, 1..8)) {
        let k = KVector::from_finite(&values);
        if let Some((pi, trace)) = is_schedule(&k) {
            prop_assert!(verify_schedule(&pi, &k).is_valid());
            prop_assert!(density(&k) <= Rational::from_integer(1));
            if let Some(w) = &trace.witness {
                prop_assert!(w.condition_holds());
            }
        }
    }

    /// Verifier monotonicity: a valid schedule stays valid when every entry
    /// is relaxed.
    #[test]
    fn verifier_monotone(values in prop::collection::vec(2u64..12, 1..6),
                         slack in prop::collection::vec(0u64..5, 6)) {
        let k = KVector::from_finite(&values);
        if let Some((pi, _)) = is_schedule(&k) {
            let relaxed: Vec<u64> =
                values.iter().zip(&slack).map(|(&v, &s)| v + s).collect();
            let k2 = KVector::from_finite(&relaxed);
            prop_assert!(verify_schedule(&pi, &k2).is_valid());
        }
    }

    /// Regularize/reinsert round trip: chains of depth r unwind to schedules
    /// valid for the original vector.
    #[test]
    fn lemma_round_trip(values in prop::collection::vec(3u64..24, 3..7), depth in 1usize..3) {
        let mut sorted = values.clone();
        sorted.sort_unstable();
        let original = KVector::from_finite(&sorted);
        let mut current = original.clone();
        let mut removed = Vec::new();
        let mut ok = true;
        for j in 0..depth.min(sorted.len().saturating_sub(2)) {
            let pivot = match current.get(j) { Some(p) => p, None => { ok = false; break } };
            match is_regularize(&current, j) {
                Ok(next) if density(&next) <= Rational::from_integer(1) => {
                    removed.push((j, pivot));
                    current = next;
                }
                _ => { ok = false; break }
            }
        }
        if ok {
            if let Some((mut pi, _)) = is_schedule(&current) {
                for &(task, kv) in removed.iter().rev() {
                    pi = match is_reinsert(&pi, task, kv) {
                        Ok(p) => p,
                        Err(_) => { ok = false; break }
                    };
                }
                if ok {
                    prop_assert!(verify_schedule(&pi, &original).is_valid(),
                        "round trip failed for {:?} at depth {}", sorted, depth);
                }
            }
        }
    }

    /// Witness arithmetic: every returned witness satisfies the exact
    /// two-base inequality and specializes downward, under both search
    /// breadths; the classic search never succeeds where the exhaustive
    /// one fails.
    #[test]
    fn witness_condition_exact(values in prop::collection::vec(2u64..30, 1..8)) {
        use backhaul_core::pinwheel::{sxy_feasible_with, SxySearch};
        let k = KVector::from_finite(&values);
        for search in [SxySearch::Classic, SxySearch::Exhaustive] {
            if let Some(w) = sxy_feasible_with(&k, search) {
                prop_assert!(w.condition_holds());
                for a in &w.assignments {
                    prop_assert!(a.specialized <= k.get(a.task).unwrap());
                    let base = match a.group {
                        backhaul_core::pinwheel::SxyGroup::X => w.x,
                        backhaul_core::pinwheel::SxyGroup::Y => w.y,
                    };
                    prop_assert_eq!(a.specialized, base << a.exponent);
                }
            }
        }
        if sxy_feasible_with(&k, SxySearch::Classic).is_some() {
            prop_assert!(sxy_feasible_with(&k, SxySearch::Exhaustive).is_some());
        }
    }
}

#[test]
fn round_robin_matches_oracle_shape() {
    for m in 1..=6usize {
        let tasks: Vec<usize> = (0..m).collect();
        let pi = round_robin(&tasks);
        let k = KVector::from_finite(&vec![m as u64; m]);
        assert!(verify_schedule(&pi, &k).is_valid());
    }
}

#[test]
fn solver_cache_is_shared_across_permutations() {
    let solver = IsSolver::new();
    solver.is_schedule(&KVector::from_finite(&[5, 3, 9, 5, 9]));
    let before = solver.cache_len();
    solver.is_schedule(&KVector::from_finite(&[3, 5, 5, 9, 9]));
    assert_eq!(solver.cache_len(), before);
}
