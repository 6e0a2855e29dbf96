//! The equilibrium state as a stationary Markov chain.
//!
//! `p(a,b) = r(b) exp(t phi(a,b) - P) / r(a)` with `r` the right eigenvector
//! (successor sums), and `pi(a) = l(a) r(a)`. Both are evaluated in the
//! balanced coordinates of [`RpfData`], where the gauge cancels.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::potential::MarkovPotential;
use crate::shift::{FiniteShift, Path};
use crate::transfer::{RpfData, TransferMatrix};

/// Stationary Markov measure with log-domain marginal and transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryMarkovMeasure {
    shift: Arc<FiniteShift>,
    pub t: f64,
    pub log_pressure: f64,
    /// `log pi(a)`.
    pub log_pi: Vec<f64>,
    /// `log p(a,b)`, edge aligned.
    pub log_p: Vec<f64>,
}

/// Builds the chain from eigendata of `m`.
pub fn equilibrium_state(m: &TransferMatrix, rpf: &RpfData) -> StationaryMarkovMeasure {
    let shift = m.shift();
    let g = &rpf.gauge;
    let n = shift.n_states();
    let mut log_p: Vec<f64> = shift
        .edges()
        .enumerate()
        .map(|(e, (a, b))| g.balanced[e] + g.x_right[b] - g.x_right[a] - g.g)
        .collect();
    // Remove the last ulps of row-sum error.
    for a in 0..n {
        let range = shift.out_edges(a);
        let norm = log_sum_exp(log_p[range.clone()].iter().copied());
        for e in range {
            log_p[e] -= norm;
        }
    }
    let mut log_pi: Vec<f64> = (0..n).map(|a| g.x_left[a] + g.x_right[a]).collect();
    let norm = log_sum_exp(log_pi.iter().copied());
    for x in log_pi.iter_mut() {
        *x -= norm;
    }
    StationaryMarkovMeasure {
        shift: Arc::new(shift.clone()),
        t: m.t(),
        log_pressure: rpf.log_pressure,
        log_pi,
        log_p,
    }
}

/// Sizes of the departures from the defining invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    /// `|sum pi - 1|`.
    pub mass_error: f64,
    /// Largest `|sum_b p(a,b) - 1|`.
    pub row_error: f64,
    /// Largest `|sum_a pi(a) p(a,b) - pi(b)|`.
    pub stationarity_error: f64,
    /// Smallest `log pi(a)`.
    pub min_log_pi: f64,
}

impl InvariantReport {
    pub fn holds(&self) -> bool {
        self.mass_error <= 1e-12
            && self.row_error <= 1e-12
            && self.stationarity_error <= 1e-10
            && self.min_log_pi > f64::NEG_INFINITY
    }
}

impl StationaryMarkovMeasure {
    pub fn shift(&self) -> &FiniteShift {
        &self.shift
    }

    pub fn pi(&self, a: usize) -> f64 {
        self.log_pi[a].exp()
    }

    pub fn p(&self, a: usize, b: usize) -> Option<f64> {
        self.shift.edge_id(a, b).map(|e| self.log_p[e].exp())
    }

    pub fn log_p_edge(&self, a: usize, b: usize) -> Option<f64> {
        self.shift.edge_id(a, b).map(|e| self.log_p[e])
    }

    /// `pi(b) / pi(a)`.
    pub fn mass_ratio(&self, a: usize, b: usize) -> f64 {
        (self.log_pi[b] - self.log_pi[a]).exp()
    }

    pub fn check_invariants(&self) -> InvariantReport {
        let n = self.shift.n_states();
        let mass_error = (log_sum_exp(self.log_pi.iter().copied()).exp() - 1.0).abs();
        let row_error = (0..n)
            .map(|a| {
                let s = log_sum_exp(self.log_p[self.shift.out_edges(a)].iter().copied());
                s.exp_m1().abs()
            })
            .fold(0.0, f64::max);
        let stationarity_error = (0..n)
            .map(|b| {
                let inflow = log_sum_exp(
                    self.shift
                        .in_edges(b)
                        .iter()
                        .map(|&e| self.log_pi[self.shift.edge(e).0] + self.log_p[e]),
                );
                (inflow.exp() - self.log_pi[b].exp()).abs()
            })
            .fold(0.0, f64::max);
        let min_log_pi = self.log_pi.iter().copied().fold(f64::INFINITY, f64::min);
        InvariantReport {
            mass_error,
            row_error,
            stationarity_error,
            min_log_pi,
        }
    }

    /// `log mu([x_0 .. x_n])`.
    pub fn cylinder_measure(&self, word: &Path) -> Result<f64> {
        self.shift.check_word(word)?;
        let mut s = self.log_pi[word.first()];
        for (a, b) in word.transitions() {
            s += self.log_p[self.shift.edge_id(a, b).unwrap()];
        }
        Ok(s)
    }

    /// Kolmogorov-Sinai entropy `-sum pi(a) p(a,b) log p(a,b)`.
    pub fn entropy(&self) -> f64 {
        let h: f64 = self
            .shift
            .edges()
            .enumerate()
            .map(|(e, (a, _))| {
                let lp = self.log_p[e];
                if lp == 0.0 || lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    -(self.log_pi[a] + lp).exp() * lp
                }
            })
            .sum();
        h.max(0.0)
    }

    /// Edge expectation `sum pi(a) p(a,b) f(a,b)` of edge-aligned values.
    pub fn edge_expectation(&self, values: &[f64]) -> f64 {
        self.shift
            .edges()
            .enumerate()
            .map(|(e, (a, _))| (self.log_pi[a] + self.log_p[e]).exp() * values[e])
            .sum()
    }

    /// `mu(phi)`.
    pub fn mean_potential(&self, pot: &MarkovPotential) -> f64 {
        self.edge_expectation(pot.values())
    }

    /// `h(mu) + mu(t phi)`.
    pub fn metric_pressure(&self, m: &TransferMatrix) -> f64 {
        self.entropy() + self.edge_expectation(m.log_weights())
    }

    /// `|log mu(loop) - log pi(x_0) - (t phi(loop) - n P)|`.
    pub fn loop_identity_residual(&self, lp: &Path, m: &TransferMatrix) -> Result<f64> {
        if !lp.is_loop() {
            return Err(Error::NotALoop);
        }
        let lhs = self.cylinder_measure(lp)? - self.log_pi[lp.first()];
        let w: f64 = lp
            .transitions()
            .map(|(a, b)| m.log_weight(a, b).unwrap())
            .sum();
        let rhs = w - lp.len() as f64 * self.log_pressure;
        Ok((lhs - rhs).abs())
    }
}

/// Total-variation distance between the symbol marginals of two measures.
pub fn marginal_tv_distance(x: &StationaryMarkovMeasure, y: &StationaryMarkovMeasure) -> f64 {
    0.5 * x
        .log_pi
        .iter()
        .zip(&y.log_pi)
        .map(|(a, b)| (a.exp() - b.exp()).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{FamilyRule, RuleKind};
    use crate::shift::{full, renewal};
    use crate::transfer::rpf_eigendata;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn measure(pot: &MarkovPotential, t: f64) -> (TransferMatrix, StationaryMarkovMeasure) {
        let m = TransferMatrix::new(pot, t).unwrap();
        let rpf = rpf_eigendata(&m).unwrap();
        let mu = equilibrium_state(&m, &rpf);
        (m, mu)
    }

    fn rule(k: usize, kind: RuleKind) -> MarkovPotential {
        MarkovPotential::from_rule(&renewal(k).unwrap(), FamilyRule::new(kind)).unwrap()
    }

    fn parry2() -> (TransferMatrix, StationaryMarkovMeasure) {
        let f = full(2).unwrap();
        measure(&MarkovPotential::from_edge_values(&f, vec![0.0; 4]).unwrap(), 1.0)
    }

    #[test]
    fn parry_measure() {
        let (m, mu) = parry2();
        assert!(mu.check_invariants().holds());
        assert_abs_diff_eq!(mu.pi(0), 0.5, epsilon = 1e-15);
        for (a, b) in mu.shift().edges() {
            assert_abs_diff_eq!(mu.p(a, b).unwrap(), 0.5, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(mu.entropy(), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(mu.metric_pressure(&m), LN_2, epsilon = 1e-15);
        let aba = Path::new(vec![0, 1, 0]);
        assert_abs_diff_eq!(mu.cylinder_measure(&aba).unwrap(), (0.125f64).ln(), epsilon = 1e-14);
        assert!(mu.loop_identity_residual(&Path::new(vec![0, 0]), &m).unwrap() < 1e-15);
        assert_eq!(mu.loop_identity_residual(&Path::new(vec![0, 1]), &m), Err(Error::NotALoop));
    }

    #[test]
    fn x0_minus_x1_geometric_chain() {
        let pot = rule(25, RuleKind::X0MinusX1);
        for t in [1.0, 2.0, 4.0] {
            let (m, mu) = measure(&pot, t);
            assert!(mu.check_invariants().holds());
            for b in 1..=12 {
                assert_abs_diff_eq!(mu.p(0, b - 1).unwrap(), 0.5f64.powi(b as i32), epsilon = 1e-7);
                // truncation at K shifts the marginal by O(K 2^-K)
                assert_abs_diff_eq!(mu.pi(b - 1), 0.5f64.powi(b as i32), epsilon = 1e-6);
                let w = Path::new(vec![b - 1]);
                assert_abs_diff_eq!(mu.cylinder_measure(&w).unwrap().exp(), 0.5f64.powi(b as i32), epsilon = 1e-6);
            }
            assert_abs_diff_eq!(mu.entropy(), LN_2, epsilon = 1e-6);
            assert!(mu.mean_potential(&pot).abs() < 1e-6);
            assert_abs_diff_eq!(mu.metric_pressure(&m), mu.log_pressure, epsilon = 1e-9);
            // loop 1 -> 4 -> 3 -> 2 -> 1
            let lp = Path::new(vec![0, 3, 2, 1, 0]);
            assert!(mu.loop_identity_residual(&lp, &m).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn neg_x0_concentrates() {
        let (_, mu) = measure(&rule(10, RuleKind::NegX0), 4.0);
        assert!(mu.pi(0) >= 0.98);
    }

    #[test]
    fn inadmissible_word() {
        let (_, mu) = measure(&rule(4, RuleKind::NegX0), 1.0);
        // 2 -> 3 is not an edge of the renewal shift
        assert_eq!(
            mu.cylinder_measure(&Path::new(vec![1, 2])),
            Err(Error::InadmissibleWord(2, 3))
        );
    }

    #[test]
    fn deterministic_cycle_has_zero_entropy() {
        let c = crate::shift::build_finite_shift(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let pot = MarkovPotential::from_edge_values(&c, vec![0.5, -0.25, 1.0]).unwrap();
        let (m, mu) = measure(&pot, 3.0);
        assert_eq!(mu.entropy(), 0.0);
        assert_abs_diff_eq!(mu.metric_pressure(&m), mu.log_pressure, epsilon = 1e-12);
        assert_abs_diff_eq!(mu.pi(1), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn normalization_does_not_move_the_measure() {
        let pot = rule(9, RuleKind::NegX0);
        let (_, a) = measure(&pot, 3.0);
        let (_, b) = measure(&pot.normalize(-1.0), 3.0);
        for k in 0..9 {
            assert_abs_diff_eq!(a.pi(k), b.pi(k), epsilon = 1e-12);
        }
        for (x, y) in a.log_p.iter().zip(&b.log_p) {
            assert_abs_diff_eq!(x.exp(), y.exp(), epsilon = 1e-12);
        }
        assert!(marginal_tv_distance(&a, &b) < 1e-12);
    }
}
