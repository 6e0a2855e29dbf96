//! Built-in renewal-shift models with closed-form facts and their checks.
//!
//! Two potentials on the renewal truncation with labels `1..=K`:
//! `neg_x0` (`phi(a, b) = -a`, freezing on the fixed point at 1) and
//! `x0_minus_x1` (`phi(a, b) = a - b`, a coboundary with `P = log 2`).

use std::f64::consts::LN_2;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equilibrium::equilibrium_state;
use crate::ergodic_opt::max_ergodic_average;
use crate::error::{Error, Result};
use crate::potential::{FamilyRule, MarkovPotential, RuleKind};
use crate::shift::{renewal, FiniteShift, Path};
use crate::transfer::{gurevich_pressure_zn, log_power_rows, rpf_eigendata, TransferMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewalExample {
    NegX0,
    X0MinusX1,
}

impl RenewalExample {
    pub fn name(&self) -> &'static str {
        match self {
            RenewalExample::NegX0 => "neg_x0",
            RenewalExample::X0MinusX1 => "x0_minus_x1",
        }
    }

    pub fn rule(&self) -> RuleKind {
        match self {
            RenewalExample::NegX0 => RuleKind::NegX0,
            RenewalExample::X0MinusX1 => RuleKind::X0MinusX1,
        }
    }
}

impl FromStr for RenewalExample {
    type Err = Error;
    /// Accepts `neg_x0`, `x0_minus_x1`, optionally prefixed by `renewal:`.
    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("renewal:").unwrap_or(s) {
            "neg_x0" => Ok(RenewalExample::NegX0),
            "x0_minus_x1" => Ok(RenewalExample::X0MinusX1),
            other => Err(Error::InvalidInput(format!("unknown renewal model {other:?}"))),
        }
    }
}

/// Closed-form facts about the countable model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactFacts {
    /// Maximal ergodic average.
    pub alpha: f64,
    /// Entropy of the zero-temperature limit.
    pub limit_entropy: f64,
    /// Pressure at every `t`, when it is known in closed form.
    pub log_pressure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenewalModel {
    pub which: RenewalExample,
    pub k: usize,
    pub exact: ExactFacts,
}

impl RenewalModel {
    /// Limit mass `mu_inf([a])` for label `a`.
    pub fn limit_mass(&self, a: usize) -> f64 {
        match self.which {
            RenewalExample::NegX0 => (a == 1) as u8 as f64,
            RenewalExample::X0MinusX1 => 0.5f64.powi(a as i32),
        }
    }

    /// Labels where per-symbol checks are free of truncation effects.
    pub fn clean_labels(&self) -> std::ops::RangeInclusive<usize> {
        match self.which {
            RenewalExample::NegX0 => 1..=self.k.saturating_sub(3).max(1),
            RenewalExample::X0MinusX1 => 1..=(self.k / 2).max(1),
        }
    }
}

/// Renewal truncation at `k` with the model's potential.
pub fn build_example(which: RenewalExample, k: usize) -> Result<(FiniteShift, MarkovPotential, RenewalModel)> {
    if k < 2 {
        return Err(Error::Precondition(format!("truncation K = {k} must be at least 2")));
    }
    let shift = renewal(k)?;
    let pot = MarkovPotential::from_rule(&shift, FamilyRule::new(which.rule()))?;
    let exact = match which {
        RenewalExample::NegX0 => ExactFacts {
            alpha: -1.0,
            limit_entropy: 0.0,
            log_pressure: None,
        },
        RenewalExample::X0MinusX1 => ExactFacts {
            alpha: 0.0,
            limit_entropy: LN_2,
            log_pressure: Some(LN_2),
        },
    };
    Ok((shift, pot, RenewalModel { which, k, exact }))
}

fn require(model: RenewalExample, expected: RenewalExample) -> Result<()> {
    if model != expected {
        return Err(Error::Precondition(format!(
            "check applies to {} only, got {}",
            expected.name(),
            model.name()
        )));
    }
    Ok(())
}

fn require_t(t: f64) -> Result<()> {
    if !(t >= 1.0) {
        return Err(Error::Precondition(format!("t = {t} must be at least 1")));
    }
    Ok(())
}

/// Residuals of `nu([a]) = exp(-a t - P) nu([a - 1])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NuRecursionReport {
    /// `(a, |log nu(a) - log nu(a-1) + a t + P|)` for `a = 2..K-1`.
    pub residuals: Vec<(usize, f64)>,
    pub max_residual: f64,
    /// Labels left out (the truncation edge).
    pub excluded: Vec<usize>,
}

/// Checks the recursion on the conformal measure, which on symbols is the
/// right eigenvector `r` (`M r = lambda r`), as a log-ratio residual.
pub fn verify_nu_recursion(which: RenewalExample, t: f64, k: usize) -> Result<NuRecursionReport> {
    require(which, RenewalExample::NegX0)?;
    let (_, pot, _) = build_example(which, k)?;
    let m = TransferMatrix::new(&pot, t)?;
    let rpf = rpf_eigendata(&m)?;
    let r = &rpf.log_right;
    let residuals: Vec<(usize, f64)> = (2..k)
        .map(|a| {
            let predicted = r[a - 2] - a as f64 * t - rpf.log_pressure;
            (a, (r[a - 1] - predicted).abs())
        })
        .collect();
    let max_residual = residuals.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(NuRecursionReport {
        residuals,
        max_residual,
        excluded: vec![k],
    })
}

/// One row of the mass-bound check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassBoundRow {
    pub a: usize,
    pub log_mass: f64,
    /// `-(a + 2)(a - 1) t`.
    pub log_bound: f64,
    /// `log_bound - log_mass`; negative means violated.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassBoundReport {
    pub t: f64,
    pub rows: Vec<MassBoundRow>,
    pub holds: bool,
}

/// Checks `mu_t([a]) <= exp(-(a + 2)(a - 1) t)` for `a = 2..K-1`.
pub fn verify_mass_bound(which: RenewalExample, t: f64, k: usize) -> Result<MassBoundReport> {
    require(which, RenewalExample::NegX0)?;
    require_t(t)?;
    let (_, pot, _) = build_example(which, k)?;
    let m = TransferMatrix::new(&pot, t)?;
    let mu = equilibrium_state(&m, &rpf_eigendata(&m)?);
    let rows: Vec<MassBoundRow> = (2..k)
        .map(|a| {
            let log_mass = mu.log_pi[a - 1];
            let log_bound = -(((a + 2) * (a - 1)) as f64) * t;
            MassBoundRow {
                a,
                log_mass,
                log_bound,
                margin: log_bound - log_mass,
            }
        })
        .collect();
    let holds = rows.iter().all(|r| r.margin >= 0.0);
    Ok(MassBoundReport { t, rows, holds })
}

/// Deviations from the closed forms of the `x0_minus_x1` model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactReport {
    pub t: f64,
    pub k: usize,
    pub pressure_error: f64,
    /// `10 * 2^-K`.
    pub pressure_tol: f64,
    /// Largest `|pi(a) - 2^-a|` over the clean labels.
    pub max_mass_error: f64,
    pub entropy_error: f64,
    /// Largest `|pi_t(a) - pi_1(a)|` over all labels.
    pub t_independence_error: f64,
    pub alpha: f64,
    /// Truncation error exceeds the mass tolerance: results are advisory.
    pub truncation_dominated: bool,
    pub passes: bool,
}

pub const MASS_TOL: f64 = 1e-6;
pub const ENTROPY_TOL: f64 = 1e-6;
pub const T_INDEPENDENCE_TOL: f64 = 1e-9;

pub fn verify_exact_x0_minus_x1(which: RenewalExample, t: f64, k: usize) -> Result<ExactReport> {
    require(which, RenewalExample::X0MinusX1)?;
    require_t(t)?;
    let (_, pot, model) = build_example(which, k)?;
    let state = |t: f64| -> Result<_> {
        let m = TransferMatrix::new(&pot, t)?;
        let rpf = rpf_eigendata(&m)?;
        Ok((rpf.log_pressure, equilibrium_state(&m, &rpf)))
    };
    let (p, mu) = state(t)?;
    let (_, mu1) = state(1.0)?;
    let pressure_tol = 10.0 * 0.5f64.powi(k as i32);
    let pressure_error = (p - LN_2).abs();
    let max_mass_error = model
        .clean_labels()
        .map(|a| (mu.pi(a - 1) - model.limit_mass(a)).abs())
        .fold(0.0, f64::max);
    let entropy_error = (mu.entropy() - LN_2).abs();
    let t_independence_error = (0..k)
        .map(|s| (mu.pi(s) - mu1.pi(s)).abs())
        .fold(0.0, f64::max);
    let alpha = max_ergodic_average(&pot)?;
    let truncation_dominated = pressure_tol > MASS_TOL;
    let passes = pressure_error <= pressure_tol
        && max_mass_error <= MASS_TOL
        && entropy_error <= ENTROPY_TOL
        && t_independence_error <= T_INDEPENDENCE_TOL
        && alpha == 0.0;
    Ok(ExactReport {
        t,
        k,
        pressure_error,
        pressure_tol,
        max_mass_error,
        entropy_error,
        t_independence_error,
        alpha,
        truncation_dominated,
        passes,
    })
}

/// `mu_t([1^m])`, the mass of the word of `m` ones.
pub fn ones_word_mass(pot: &MarkovPotential, t: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::InvalidInput("word length must be positive".into()));
    }
    let tm = TransferMatrix::new(pot, t)?;
    let mu = equilibrium_state(&tm, &rpf_eigendata(&tm)?);
    let one = pot.shift().index_of_checked(1)?;
    Ok(mu.cylinder_measure(&Path::new(vec![one; m]))?.exp())
}

/// Largest `log Z_n - n P` over `n = 1..=n_max` at label 1; nonpositive
/// when `Z_n <= exp(n P)` holds.
pub fn periodic_point_excess(pot: &MarkovPotential, t: f64, n_max: usize) -> Result<f64> {
    let m = TransferMatrix::new(pot, t)?;
    let p = rpf_eigendata(&m)?.log_pressure;
    let one = pot.shift().index_of_checked(1)?;
    Ok(gurevich_pressure_zn(&m, one, n_max)?
        .iter()
        .map(|z| z.log_zn - z.n as f64 * p)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// One comparison `(L^n 1_[1])(x) <= C Z_{n+a-1}` for `x` in `[a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopComparisonRow {
    pub n: usize,
    pub a: usize,
    /// `log (M^n)_{1a}`.
    pub log_lhs: f64,
    /// `log Z_{n+a-1} = log (M^{n+a-1})_{11}`.
    pub log_z: f64,
    /// `(a - 1)(a + 2) t / 2`, the weight lost closing the path `a -> 1`.
    pub closing_cost: f64,
}

impl LoopComparisonRow {
    /// With `C = exp(-closing_cost)`.
    pub fn holds_stated(&self) -> bool {
        self.log_lhs <= self.log_z - self.closing_cost + 1e-12 * self.log_z.abs().max(1.0)
    }

    /// With `C = exp(+closing_cost)`.
    pub fn holds_corrected(&self) -> bool {
        self.log_lhs <= self.log_z + self.closing_cost + 1e-12 * self.log_z.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopComparisonReport {
    pub t: f64,
    pub rows: Vec<LoopComparisonRow>,
    pub stated_holds: bool,
    pub corrected_holds: bool,
}

/// Compares level-`n` preimage sums of `1_[1]` with loops at 1 on the
/// `neg_x0` model, for `n <= n_max` and labels `a <= a_max`.
pub fn verify_loop_comparison(t: f64, k: usize, n_max: usize, a_max: usize) -> Result<LoopComparisonReport> {
    require_t(t)?;
    if a_max > k {
        return Err(Error::Precondition(format!("a_max = {a_max} exceeds K = {k}")));
    }
    let (_, pot, _) = build_example(RenewalExample::NegX0, k)?;
    let m = TransferMatrix::new(&pot, t)?;
    let rows_1 = log_power_rows(&m, 0, n_max + a_max)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        for a in 1..=a_max {
            rows.push(LoopComparisonRow {
                n,
                a,
                log_lhs: rows_1[n][a - 1],
                log_z: rows_1[n + a - 1][0],
                closing_cost: ((a - 1) * (a + 2)) as f64 * t / 2.0,
            });
        }
    }
    Ok(LoopComparisonReport {
        t,
        stated_holds: rows.iter().all(|r| r.holds_stated()),
        corrected_holds: rows.iter().all(|r| r.holds_corrected()),
        rows,
    })
}
