//! Annealing `t -> infinity`: equilibrium states along a schedule, the
//! monotonicity laws, limit detection and the finite-subshift comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::equilibrium_state;
use crate::error::{Error, Result};
use crate::first_passage::{excursion_gap, restrict_matrix, MainPathWeights, TabooSystem};
use crate::potential::MarkovPotential;
use crate::shift::Subshift;
use crate::transfer::{rpf_eigendata, TransferMatrix};

/// Largest inverse temperature accepted.
pub const T_MAX: f64 = 1000.0;

/// Strictly increasing inverse temperatures in `[1, T_MAX]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AnnealSchedule {
    t_values: Vec<f64>,
}

impl AnnealSchedule {
    pub fn new(t_values: Vec<f64>) -> Result<Self> {
        if t_values.is_empty() {
            return Err(Error::InvalidInput("empty schedule".into()));
        }
        if let Some(&t) = t_values.iter().find(|t| !(**t >= 1.0 && **t <= T_MAX)) {
            return Err(Error::InvalidInput(format!("t = {t} outside [1, {T_MAX}]")));
        }
        if let Some(w) = t_values.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "schedule not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(AnnealSchedule { t_values })
    }

    /// `t0 ratio^k` for `k = 0..steps`, capped at `T_MAX`.
    pub fn geometric(t0: f64, ratio: f64, steps: usize) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::InvalidInput(format!("ratio {ratio} must exceed 1")));
        }
        let mut t_values = Vec::with_capacity(steps);
        let mut t = t0;
        for _ in 0..steps {
            t_values.push(t.min(T_MAX));
            if t >= T_MAX {
                break;
            }
            t *= ratio;
        }
        Self::new(t_values)
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.t_values.last().unwrap()
    }
}

impl Default for AnnealSchedule {
    /// `2^k` for `k = 0..=6`.
    fn default() -> Self {
        Self::geometric(1.0, 2.0, 7).unwrap()
    }
}

impl TryFrom<Vec<f64>> for AnnealSchedule {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AnnealSchedule> for Vec<f64> {
    fn from(s: AnnealSchedule) -> Self {
        s.t_values
    }
}

/// Summary of `mu_t` at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealRecord {
    pub t: f64,
    pub log_pressure: f64,
    pub entropy: f64,
    pub mean_phi: f64,
    /// `|P - h - t mu(phi)|`.
    pub resid_vp: f64,
    /// `(label, log mu([a]))` for the watched symbols.
    pub watched: Vec<(usize, f64)>,
    /// `((a, b), mu([b]) / mu([a]))` with `a` the first watched symbol.
    pub ratios: Vec<((usize, usize), f64)>,
    /// Relative gap between `(1 - p_aa)/(1 - p_bb)` and the direct ratio,
    /// for the first watched pair; `None` when it could not be formed.
    pub taboo_ratio_residual: Option<f64>,
}

/// One schedule point: a record, or the error that stopped it.
#[derive(Debug, Clone, PartialEq)]
pub enum AnnealOutcome {
    Ok(AnnealRecord),
    Failed { t: f64, error: Error },
}

impl AnnealOutcome {
    pub fn record(&self) -> Option<&AnnealRecord> {
        match self {
            AnnealOutcome::Ok(r) => Some(r),
            AnnealOutcome::Failed { .. } => None,
        }
    }

    pub fn t(&self) -> f64 {
        match self {
            AnnealOutcome::Ok(r) => r.t,
            AnnealOutcome::Failed { t, .. } => *t,
        }
    }
}

/// Computes one record at inverse temperature `t`.
pub fn anneal_point(pot: &MarkovPotential, t: f64, watch: &[usize]) -> Result<AnnealRecord> {
    let shift = pot.shift();
    let idx: Vec<usize> = watch
        .iter()
        .map(|&l| shift.index_of_checked(l))
        .collect::<Result<_>>()?;
    let m = TransferMatrix::new(pot, t)?;
    let rpf = rpf_eigendata(&m)?;
    let mu = equilibrium_state(&m, &rpf);
    let entropy = mu.entropy();
    let mean_phi = mu.mean_potential(pot);
    let resid_vp = (rpf.log_pressure - entropy - t * mean_phi).abs();
    let watched = watch.iter().zip(&idx).map(|(&l, &i)| (l, mu.log_pi[i])).collect();
    let mut ratios = Vec::new();
    let mut taboo_ratio_residual = None;
    if let Some((&a, rest)) = idx.split_first() {
        for &b in rest {
            ratios.push(((shift.label(a), shift.label(b)), mu.mass_ratio(a, b)));
        }
        if let Some(&b) = rest.first() {
            taboo_ratio_residual = MainPathWeights::new(&m, rpf.log_pressure, a, b)
                .ok()
                .map(|w| {
                    let direct = mu.mass_ratio(a, b);
                    (w.mu_ratio() - direct).abs() / direct
                });
        }
    }
    Ok(AnnealRecord {
        t,
        log_pressure: rpf.log_pressure,
        entropy,
        mean_phi,
        resid_vp,
        watched,
        ratios,
        taboo_ratio_residual,
    })
}

/// Records along a schedule, in schedule order; `watch` holds labels.
/// Points are independent and computed in parallel.
pub fn anneal(pot: &MarkovPotential, schedule: &AnnealSchedule, watch: &[usize]) -> Result<Vec<AnnealOutcome>> {
    let shift = pot.shift();
    if !shift.is_topologically_transitive() {
        return Err(Error::NotTransitive);
    }
    for &l in watch {
        shift.index_of_checked(l)?;
    }
    Ok(schedule
        .t_values()
        .par_iter()
        .map(|&t| match anneal_point(pot, t, watch) {
            Ok(r) => AnnealOutcome::Ok(r),
            Err(error) => {
                log::warn!("anneal point t = {t} failed: {error}");
                AnnealOutcome::Failed { t, error }
            }
        })
        .collect())
}

/// Records only, failing on the first failed point.
pub fn anneal_records(pot: &MarkovPotential, schedule: &AnnealSchedule, watch: &[usize]) -> Result<Vec<AnnealRecord>> {
    anneal(pot, schedule, watch)?
        .into_iter()
        .map(|o| match o {
            AnnealOutcome::Ok(r) => Ok(r),
            AnnealOutcome::Failed { error, .. } => Err(error),
        })
        .collect()
}

/// Outcome of the monotonicity checks; violations are listed, not thrown.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub entropy_nonincreasing: bool,
    /// Every step lowers the entropy.
    pub entropy_strictly_decreasing: bool,
    pub mean_phi_nondecreasing: bool,
    /// `P_t - t alpha` nonincreasing.
    pub excess_nonincreasing: bool,
    /// Only checked for normalized input.
    pub pressure_nonnegative: Option<bool>,
    pub pressure_nonincreasing: Option<bool>,
    /// `P_t / t - alpha` per record.
    pub slope_gaps: Vec<f64>,
    pub violations: Vec<String>,
}

impl MonotonicityReport {
    /// All non-strict laws hold.
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn final_slope_gap(&self) -> f64 {
        *self.slope_gaps.last().unwrap_or(&f64::NAN)
    }
}

const MONO_SLACK: f64 = 1e-10;

pub fn check_monotonicity(records: &[AnnealRecord], alpha: f64, normalized: bool) -> Result<MonotonicityReport> {
    if records.len() < 2 {
        return Err(Error::InvalidInput("need at least two records".into()));
    }
    let mut violations = Vec::new();
    let mut check = |name: &str, ok: bool, w: &[AnnealRecord]| {
        if !ok {
            violations.push(format!("{name} between t = {} and t = {}", w[0].t, w[1].t));
        }
        ok
    };
    let mut entropy_nonincreasing = true;
    let mut entropy_strictly_decreasing = true;
    let mut mean_phi_nondecreasing = true;
    let mut excess_nonincreasing = true;
    let mut pressure_nonincreasing = true;
    for w in records.windows(2) {
        let (x, y) = (&w[0], &w[1]);
        entropy_nonincreasing &= check("entropy increases", y.entropy <= x.entropy + MONO_SLACK, w);
        entropy_strictly_decreasing &= y.entropy < x.entropy;
        mean_phi_nondecreasing &= check("mean potential decreases", y.mean_phi >= x.mean_phi - MONO_SLACK, w);
        let ex = x.log_pressure - x.t * alpha;
        let ey = y.log_pressure - y.t * alpha;
        excess_nonincreasing &= check(
            "P - t alpha increases",
            ey <= ex + MONO_SLACK * ex.abs().max(1.0),
            w,
        );
        if normalized {
            pressure_nonincreasing &= check(
                "pressure increases",
                y.log_pressure <= x.log_pressure + MONO_SLACK * x.log_pressure.abs().max(1.0),
                w,
            );
        }
    }
    let pressure_nonnegative = records.iter().all(|r| r.log_pressure >= -MONO_SLACK);
    if normalized && !pressure_nonnegative {
        violations.push("negative pressure".into());
    }
    Ok(MonotonicityReport {
        entropy_nonincreasing,
        entropy_strictly_decreasing,
        mean_phi_nondecreasing,
        excess_nonincreasing,
        pressure_nonnegative: normalized.then_some(pressure_nonnegative),
        pressure_nonincreasing: normalized.then_some(pressure_nonincreasing),
        slope_gaps: records.iter().map(|r| r.log_pressure / r.t - alpha).collect(),
        violations,
    })
}

/// Estimated zero-temperature limit on the watched symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitEstimate {
    /// `(label, mu([a]))` from the last record.
    pub masses: Vec<(usize, f64)>,
    pub mean_phi: f64,
    pub is_maximizing: bool,
    /// Sup-distance of the watched masses between the last two records.
    pub last_step: f64,
}

/// Fails with [`Error::NotConverged`] unless the watched masses of the last
/// two records agree within `tol`.
pub fn detect_limit(records: &[AnnealRecord], tol: f64, alpha: f64) -> Result<LimitEstimate> {
    let [.., x, y] = records else {
        return Err(Error::InvalidInput("need at least two records".into()));
    };
    let last_step = x
        .watched
        .iter()
        .zip(&y.watched)
        .map(|(a, b)| (a.1.exp() - b.1.exp()).abs())
        .fold(0.0, f64::max);
    if !(last_step <= tol) {
        return Err(Error::NotConverged(last_step));
    }
    Ok(LimitEstimate {
        masses: y.watched.iter().map(|&(l, lm)| (l, lm.exp())).collect(),
        mean_phi: y.mean_phi,
        is_maximizing: (y.mean_phi - alpha).abs() <= 10.0 * tol,
        last_step,
    })
}

/// One row of the comparison between the ambient shift and a subshift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubshiftComparison {
    pub t: f64,
    pub log_pressure: f64,
    pub log_pressure_sub: f64,
    /// `(1 - p_aa) / (1 - p_bb)`.
    pub mu_ratio: f64,
    /// `(1 - q_aa) / (1 - q_bb)`.
    pub theta_ratio: f64,
    /// `(1 - r_aa) / (1 - r_bb)`.
    pub r_ratio: f64,
    /// `(1 - p_aa) / (1 - q_aa)`.
    pub p_over_q: f64,
    /// `(1 - p_aa) / (1 - r_aa)`.
    pub p_over_r: f64,
    /// `mu_ratio / theta_ratio`.
    pub ratio_quotient: f64,
    /// `p_aa - r_aa`, summed over the excursions directly.
    pub gap: f64,
}

/// `a`, `b` are ambient indices that must lie in `sub`.
pub fn compare_with_subshift(
    pot: &MarkovPotential,
    sub: &Subshift,
    schedule: &AnnealSchedule,
    a: usize,
    b: usize,
) -> Result<Vec<SubshiftComparison>> {
    let shift = pot.shift();
    let local = |s: usize| {
        sub.local(s).ok_or(Error::InvalidSubshiftSymbols(
            if s < shift.n_states() { shift.label(s) } else { s },
        ))
    };
    let (la, lb) = (local(a)?, local(b)?);
    schedule
        .t_values()
        .par_iter()
        .map(|&t| {
            let m = TransferMatrix::new(pot, t)?;
            let p = rpf_eigendata(&m)?.log_pressure;
            let ms = restrict_matrix(&m, sub)?;
            let q = rpf_eigendata(&ms)?.log_pressure;
            let pw = MainPathWeights::new(&m, p, a, b)?;
            let qw = MainPathWeights::new(&ms, q, la, lb)?;
            // r: subshift paths at the ambient pressure; 1 - r = (1 - p) + (p - r)
            TabooSystem::new(&ms, p, &[la, lb])?;
            let gap_a = excursion_gap(&m, sub, p, a, a, &[a, b])?;
            let gap_b = excursion_gap(&m, sub, p, b, b, &[a, b])?;
            let one_minus_ra = pw.one_minus_aa + gap_a;
            let one_minus_rb = pw.one_minus_bb + gap_b;
            Ok(SubshiftComparison {
                t,
                log_pressure: p,
                log_pressure_sub: q,
                mu_ratio: pw.mu_ratio(),
                theta_ratio: qw.mu_ratio(),
                r_ratio: one_minus_ra / one_minus_rb,
                p_over_q: pw.one_minus_aa / qw.one_minus_aa,
                p_over_r: pw.one_minus_aa / one_minus_ra,
                ratio_quotient: pw.mu_ratio() / qw.mu_ratio(),
                gap: gap_a,
            })
        })
        .collect()
}
