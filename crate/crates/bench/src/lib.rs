//! Fixtures shared by the benchmarks.

use thermoshift::random::{random_case, rng};
use thermoshift::{build_example, FiniteShift, MarkovPotential, RenewalExample};

/// The `neg_x0` renewal truncation at `k` states.
pub fn renewal_neg_x0(k: usize) -> MarkovPotential {
    build_example(RenewalExample::NegX0, k).expect("k >= 2").1
}

/// The `x0_minus_x1` renewal truncation at `k` states.
pub fn renewal_x0_minus_x1(k: usize) -> MarkovPotential {
    build_example(RenewalExample::X0MinusX1, k).expect("k >= 2").1
}

/// Seeded random transitive shifts with at most `max_states` states.
pub fn random_cases(seed: u64, count: usize, max_states: usize) -> Vec<(FiniteShift, MarkovPotential)> {
    let mut r = rng(seed);
    (0..count).map(|_| random_case(&mut r, max_states)).collect()
}
