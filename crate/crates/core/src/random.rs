//! Seeded random transitive shifts and potentials for property suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::potential::MarkovPotential;
use crate::shift::FiniteShift;

/// A random Hamiltonian cycle plus each remaining edge with probability
/// `density`; strongly connected by construction.
pub fn random_transitive_shift<R: Rng>(rng: &mut R, n: usize, density: f64) -> FiniteShift {
    assert!(n >= 1, "need at least one state");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (0..n).map(|k| (order[k], order[(k + 1) % n])).collect();
    for a in 0..n {
        for b in 0..n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    FiniteShift::new(n, &edges).expect("cycle covers every row and column")
}

/// Edge values drawn uniformly from `[lo, hi)`.
pub fn random_potential<R: Rng>(rng: &mut R, shift: &FiniteShift, lo: f64, hi: f64) -> MarkovPotential {
    let values = (0..shift.n_edges()).map(|_| rng.gen_range(lo..hi)).collect();
    MarkovPotential::from_edge_values(shift, values).expect("one value per edge")
}

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A shift on `2..=max_states` states with a potential in `[-2, 0)`.
pub fn random_case<R: Rng>(rng: &mut R, max_states: usize) -> (FiniteShift, MarkovPotential) {
    let n = rng.gen_range(2..=max_states.max(2));
    let shift = random_transitive_shift(rng, n, 0.5);
    let pot = random_potential(rng, &shift, -2.0, 0.0);
    (shift, pot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts_are_transitive_and_seeded() {
        let mut r = rng(3);
        for _ in 0..50 {
            let (s, p) = random_case(&mut r, 6);
            assert!(s.is_topologically_transitive());
            assert!(p.values().iter().all(|v| (-2.0..0.0).contains(v)));
        }
        let a = random_case(&mut rng(9), 6).1;
        let b = random_case(&mut rng(9), 6).1;
        assert_eq!(a, b);
    }
}
