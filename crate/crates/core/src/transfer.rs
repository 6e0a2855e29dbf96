//! Transfer matrices `M(a,b) = exp(t phi(a,b))` and their leading eigendata.
//!
//! Everything is computed in log-domain. Before iterating, the matrix is
//! balanced with its max-plus eigen-gauge: with `beta = t alpha(phi)` and
//! `v` the max-plus eigenvector, `W''(a,b) = W(a,b) + v(b) - v(a) - beta`
//! has every row maximum equal to zero. The power method then runs on
//! entries of order one whatever `t` is, and the pressure excess
//! `g = P - beta` is obtained without cancellation.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ergodic_opt::max_plus_gauge;
use crate::logspace::log_sum_exp;
use crate::potential::MarkovPotential;
use crate::shift::{FiniteShift, ShiftFamily};

/// Log-weights `t phi(a,b)` on the edges of a shift.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    shift: Arc<FiniteShift>,
    t: f64,
    log_weights: Vec<f64>,
}

impl TransferMatrix {
    pub fn new(pot: &MarkovPotential, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidInput(format!("inverse temperature {t} must be finite and >= 0")));
        }
        Ok(TransferMatrix {
            shift: Arc::new(pot.shift().clone()),
            t,
            log_weights: pot.values().iter().map(|v| t * v).collect(),
        })
    }

    pub fn from_log_weights(shift: &FiniteShift, t: f64, log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.len() != shift.n_edges() || log_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("log-weights must be finite, one per edge".into()));
        }
        Ok(TransferMatrix {
            shift: Arc::new(shift.clone()),
            t,
            log_weights,
        })
    }

    pub fn shift(&self) -> &FiniteShift {
        &self.shift
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn log_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.shift.edge_id(a, b).map(|e| self.log_weights[e])
    }
}

/// Starting vector for the power method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartVector {
    Uniform,
    /// Log-entries drawn uniformly from `[-1, 0]`.
    Seeded(u64),
}

/// Power-iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    pub start: StartVector,
    /// Stop when successive log-vectors differ by at most `tol * max(1, |x|)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration {
            start: StartVector::Uniform,
            tol: 1e-13,
            max_iter: 100_000,
        }
    }
}

/// Leading eigen-triple of a transfer matrix, stored in log-domain.
///
/// `log_right` solves `M r = lambda r` (successor sums), `log_left` solves
/// `l M = lambda l`; they are scaled so that `sum_a l(a) r(a) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RpfData {
    pub log_pressure: f64,
    pub log_right: Vec<f64>,
    pub log_left: Vec<f64>,
    pub residual_right: f64,
    pub residual_left: f64,
    pub iterations: usize,
    /// Whether the iteration ran on `M'' + I`.
    pub shifted: bool,
    pub(crate) gauge: Gauge,
}

/// Balanced-coordinate pieces reused by the equilibrium and taboo code.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Gauge {
    pub beta: f64,
    pub v: Vec<f64>,
    /// Balanced log-weights `W''`, edge aligned.
    pub balanced: Vec<f64>,
    /// Right eigenvector of `W''`, max entry 0.
    pub x_right: Vec<f64>,
    /// Left eigenvector of `W''`, normalized with `x_right`.
    pub x_left: Vec<f64>,
    /// `log_pressure - beta`.
    pub g: f64,
}

impl RpfData {
    /// `exp(P)`; underflows to zero for very negative pressures.
    pub fn lambda(&self) -> f64 {
        self.log_pressure.exp()
    }

    /// `P - t alpha`: the pressure excess over the max-plus eigenvalue.
    pub fn pressure_excess(&self) -> f64 {
        self.gauge.g
    }
}

/// Leading eigendata from the uniform start.
pub fn rpf_eigendata(m: &TransferMatrix) -> Result<RpfData> {
    rpf_eigendata_with(m, &PowerIteration::default())
}

pub fn rpf_eigendata_with(m: &TransferMatrix, opts: &PowerIteration) -> Result<RpfData> {
    let shift = m.shift();
    if !shift.is_topologically_transitive() {
        return Err(Error::NotTransitive);
    }
    let n = shift.n_states();
    let mp = max_plus_gauge(shift, &m.log_weights)?;
    let balanced: Vec<f64> = shift
        .edges()
        .enumerate()
        .map(|(e, (a, b))| (m.log_weights[e] + mp.v[b] - mp.v[a] - mp.beta).min(0.0))
        .collect();
    // Critical graph without a self-loop (this includes every periodic
    // shift): iterate on M'' + I, which has the same eigenvectors.
    let scale = 1e-9 * (1.0 + mp.beta.abs());
    let shifted = !shift
        .edges()
        .enumerate()
        .any(|(e, (a, b))| a == b && balanced[e] >= -scale);

    let start = |seed_offset: u64| -> Vec<f64> {
        match opts.start {
            StartVector::Uniform => vec![0.0; n],
            StartVector::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(seed_offset));
                (0..n).map(|_| -rng.gen::<f64>()).collect()
            }
        }
    };

    let right = power_iterate(shift, &balanced, start(0), shifted, Side::Right, opts)?;
    let left = power_iterate(shift, &balanced, start(1), shifted, Side::Left, opts)?;
    let g = right.growth;
    let x_right = right.x;
    let mut x_left = left.x;
    let norm = log_sum_exp((0..n).map(|a| x_left[a] + x_right[a]));
    for x in x_left.iter_mut() {
        *x -= norm;
    }

    let log_pressure = mp.beta + g;
    let log_right: Vec<f64> = (0..n).map(|a| mp.v[a] + x_right[a]).collect();
    let log_left: Vec<f64> = (0..n).map(|a| x_left[a] - mp.v[a]).collect();
    let residual_right = eigen_residual(shift, &m.log_weights, &log_right, log_pressure, Side::Right);
    let residual_left = eigen_residual(shift, &m.log_weights, &log_left, log_pressure, Side::Left);
    Ok(RpfData {
        log_pressure,
        log_right,
        log_left,
        residual_right,
        residual_left,
        iterations: right.iterations.max(left.iterations),
        shifted,
        gauge: Gauge {
            beta: mp.beta,
            v: mp.v,
            balanced,
            x_right,
            x_left,
            g,
        },
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Right,
    Left,
}

struct Iterate {
    x: Vec<f64>,
    growth: f64,
    iterations: usize,
}

/// One application of `M''` (or its transpose) in log-domain, optionally
/// with the identity added.
fn apply(shift: &FiniteShift, w: &[f64], x: &[f64], add_identity: bool, side: Side) -> Vec<f64> {
    let n = shift.n_states();
    (0..n)
        .map(|a| {
            let extra = if add_identity { Some(x[a]) } else { None };
            match side {
                Side::Right => {
                    let terms = shift.out_edges(a).map(|e| w[e] + x[shift.edge(e).1]);
                    log_sum_exp(terms.chain(extra))
                }
                Side::Left => {
                    let terms = shift.in_edges(a).iter().map(|&e| w[e] + x[shift.edge(e).0]);
                    log_sum_exp(terms.chain(extra))
                }
            }
        })
        .collect()
}

fn normalize_max(x: &mut [f64]) -> (f64, usize) {
    let (arg, max) = x
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    for v in x.iter_mut() {
        *v -= max;
    }
    (max, arg)
}

fn power_iterate(
    shift: &FiniteShift,
    w: &[f64],
    mut x: Vec<f64>,
    shifted: bool,
    side: Side,
    opts: &PowerIteration,
) -> Result<Iterate> {
    normalize_max(&mut x);
    let mut converged_at = None;
    for it in 1..=opts.max_iter {
        let mut next = apply(shift, w, &x, shifted, side);
        normalize_max(&mut next);
        let close = next
            .iter()
            .zip(&x)
            .all(|(a, b)| (a - b).abs() <= opts.tol * b.abs().max(1.0));
        x = next;
        if close {
            converged_at = Some(it);
            break;
        }
    }
    let Some(iterations) = converged_at else {
        return Err(Error::NoConvergence(opts.max_iter));
    };
    // Growth of the unshifted matrix, averaged over ten further steps,
    // read at the largest entry (where the log1p reduction is sharpest).
    let mut total = 0.0;
    for _ in 0..10 {
        let plain = apply(shift, w, &x, false, side);
        let (_, arg) = normalize_max(&mut x.clone());
        total += plain[arg] - x[arg];
        let mut next = if shifted { apply(shift, w, &x, true, side) } else { plain };
        normalize_max(&mut next);
        x = next;
    }
    Ok(Iterate {
        x,
        growth: total / 10.0,
        iterations: iterations + 10,
    })
}

/// `||M r - lambda r||_inf / (lambda ||r||_inf)` (or the left analogue).
fn eigen_residual(shift: &FiniteShift, w: &[f64], log_vec: &[f64], log_pressure: f64, side: Side) -> f64 {
    let m = log_vec.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let image = apply(shift, w, log_vec, false, side);
    image
        .iter()
        .zip(log_vec)
        .map(|(&mx, &x)| ((mx - log_pressure - m).exp() - (x - m).exp()).abs())
        .fold(0.0, f64::max)
}

/// One term of the periodic-point sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZnTerm {
    pub n: usize,
    /// `log Z_n = log (M^n)_{aa}`.
    pub log_zn: f64,
    /// `(1/n) log Z_n`.
    pub rate: f64,
}

/// `(M^n)_{aa}` for `n = 1..=n_max`, by row propagation in log-domain.
pub fn gurevich_pressure_zn(m: &TransferMatrix, a: usize, n_max: usize) -> Result<Vec<ZnTerm>> {
    let shift = m.shift();
    if a >= shift.n_states() {
        return Err(Error::InvalidSymbol(a));
    }
    let mut u = vec![f64::NEG_INFINITY; shift.n_states()];
    u[a] = 0.0;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        u = apply(shift, &m.log_weights, &u, false, Side::Left);
        out.push(ZnTerm {
            n,
            log_zn: u[a],
            rate: u[a] / n as f64,
        });
    }
    Ok(out)
}

/// Rows `log (M^n)_{a,.}` for `n = 0..=n_max`.
pub fn log_power_rows(m: &TransferMatrix, a: usize, n_max: usize) -> Result<Vec<Vec<f64>>> {
    let shift = m.shift();
    if a >= shift.n_states() {
        return Err(Error::InvalidSymbol(a));
    }
    let mut u = vec![f64::NEG_INFINITY; shift.n_states()];
    u[a] = 0.0;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(u.clone());
    for _ in 0..n_max {
        u = apply(shift, &m.log_weights, &u, false, Side::Left);
        out.push(u.clone());
    }
    Ok(out)
}

/// Pressures of successive truncations of a family.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSequence {
    pub values: Vec<(usize, f64)>,
    pub nondecreasing: bool,
    /// Difference of the last two pressures, when there are two.
    pub final_gap: Option<f64>,
}

pub fn pressure_truncation_sequence(
    family: &ShiftFamily,
    pot: &MarkovPotential,
    t: f64,
    k_list: &[usize],
) -> Result<TruncationSequence> {
    let mut values = Vec::with_capacity(k_list.len());
    for &k in k_list {
        let shift = family.truncate(k)?;
        let p = pot.extend_to(&shift)?;
        let rpf = rpf_eigendata(&TransferMatrix::new(&p, t)?)?;
        values.push((k, rpf.log_pressure));
    }
    let nondecreasing = values
        .windows(2)
        .all(|w| w[1].1 >= w[0].1 - 1e-12 * w[0].1.abs().max(1.0));
    let final_gap = (values.len() >= 2).then(|| values[values.len() - 1].1 - values[values.len() - 2].1);
    Ok(TruncationSequence {
        values,
        nondecreasing,
        final_gap,
    })
}

/// First-return sums at a symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    /// `sum_n exp(-nP) Z*_n`.
    pub return_sum: f64,
    /// `sum_n n exp(-nP) Z*_n`.
    pub weighted_return_sum: f64,
    /// Terms `exp(-nP) Z*_n` for `n = 1..=n_max`.
    pub terms: Vec<f64>,
    /// Weight of paths from `a` that have not returned after `n_max` steps.
    pub survival: f64,
    /// Survival below 1e-12 (and more than one term).
    pub complete: bool,
}

/// First-return loop sums, via a dynamic program over paths avoiding `a`.
///
/// Loop weights are invariant under the diagonal change of variables by the
/// right eigenvector, so the program runs on `exp(W - P) r(b) / r(a)`,
/// which is stochastic when `P` is the pressure.
pub fn recurrence_diagnostic(
    m: &TransferMatrix,
    a: usize,
    log_pressure: f64,
    n_max: usize,
) -> Result<RecurrenceReport> {
    let shift = m.shift();
    if a >= shift.n_states() {
        return Err(Error::InvalidSymbol(a));
    }
    let rpf = rpf_eigendata(m)?;
    let q: Vec<f64> = shift
        .edges()
        .enumerate()
        .map(|(e, (x, y))| (m.log_weights[e] - log_pressure + rpf.log_right[y] - rpf.log_right[x]).exp())
        .collect();
    let n = shift.n_states();
    let mut mass = vec![0.0; n];
    let mut terms = Vec::with_capacity(n_max);
    for e in shift.out_edges(a) {
        let y = shift.edge(e).1;
        if y == a {
            terms.push(q[e]);
        } else {
            mass[y] += q[e];
        }
    }
    if terms.is_empty() {
        terms.push(0.0);
    }
    for _ in 2..=n_max {
        let mut next = vec![0.0; n];
        let mut ret = 0.0;
        for x in (0..n).filter(|&x| x != a && mass[x] > 0.0) {
            for e in shift.out_edges(x) {
                let y = shift.edge(e).1;
                if y == a {
                    ret += mass[x] * q[e];
                } else {
                    next[y] += mass[x] * q[e];
                }
            }
        }
        terms.push(ret);
        mass = next;
    }
    let survival: f64 = mass.iter().sum();
    let return_sum = terms.iter().sum();
    let weighted_return_sum = terms.iter().enumerate().map(|(k, t)| (k + 1) as f64 * t).sum();
    Ok(RecurrenceReport {
        return_sum,
        weighted_return_sum,
        terms,
        survival,
        complete: n_max > 1 && survival <= 1e-12,
    })
}

/// Largest `|l(M f) - lambda l(f)| / (lambda ||f||_inf l(1))` over
/// `n_tests` random vectors `f` with entries in `[-1, 1]`.
pub fn conformal_residual(m: &TransferMatrix, rpf: &RpfData, n_tests: usize, seed: u64) -> f64 {
    let shift = m.shift();
    let n = shift.n_states();
    // log of (l M)(b), and log of the normalizer lambda * sum_a l(a)
    let lm = apply(shift, &m.log_weights, &rpf.log_left, false, Side::Left);
    let scale = rpf.log_pressure + log_sum_exp(rpf.log_left.iter().copied());
    let coeff: Vec<f64> = (0..n)
        .map(|b| (lm[b] - scale).exp() - (rpf.log_pressure + rpf.log_left[b] - scale).exp())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_tests {
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let sup = f.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if sup == 0.0 {
            continue;
        }
        let r: f64 = coeff.iter().zip(&f).map(|(c, v)| c * v).sum();
        worst = worst.max(r.abs() / sup);
    }
    worst
}
