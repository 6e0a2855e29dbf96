//! Taboo path sums between marked symbols.
//!
//! For a taboo set `T` and symbols `i, j` in `T`, the sum runs over paths
//! `i -> j` whose interior avoids `T`, each weighted by
//! `exp(t phi(path) - n P)`. With `w(x,y) = exp(W(x,y) - P)` and `Q` its
//! restriction to the free states `F`, it equals
//! `w(i,j) + w(i,F) (I - Q)^{-1} w(F,j)`.
//!
//! The sums are computed on the h-transform `w'(x,y) = w(x,y) r(y) / r(x)`
//! by the right eigenvector `r`, whose rows add up to `exp(P* - P)` with
//! `P*` the pressure of the matrix. Free states are eliminated one at a
//! time (Schur complements); each pivot `1 - w'(k,k)` is formed from the
//! row's outflow and its deficit `1 - exp(P* - P)`, never by subtraction.
//! This keeps `1 - p_ii` accurate when the loop sum is within rounding of
//! one, and when the restricted system is close to critical.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ergodic_opt::max_plus_gauge;
use crate::shift::{FiniteShift, Subshift};
use crate::transfer::{rpf_eigendata, TransferMatrix};

/// Pivots at or below this signal a restricted spectral radius of one.
const PIVOT_MIN: f64 = 1e-12;

/// How a taboo sum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabooMethod {
    LinearSolve,
    Enumeration,
}

/// One taboo sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabooWeights {
    pub i: usize,
    pub j: usize,
    /// Linear value; may over- or underflow when `i != j` at extreme `t`.
    pub value: f64,
    pub log_value: f64,
    pub method: TabooMethod,
}

/// Dense substochastic kernel with per-row deficit (mass that leaves).
struct Kernel {
    n: usize,
    a: Vec<f64>,
    deficit: Vec<f64>,
}

impl Kernel {
    fn new(n: usize, deficit: f64) -> Self {
        Kernel {
            n,
            a: vec![0.0; n * n],
            deficit: vec![deficit; n],
        }
    }

    fn add(&mut self, x: usize, y: usize, w: f64) {
        self.a[x * self.n + y] += w;
    }

    fn get(&self, x: usize, y: usize) -> f64 {
        self.a[x * self.n + y]
    }

    /// Eliminates `order` in turn; kept nodes end up with the total weight
    /// of paths whose interior lies in the eliminated set.
    fn eliminate(&mut self, order: &[usize]) -> Result<()> {
        let n = self.n;
        let mut alive = vec![true; n];
        for &k in order {
            alive[k] = false;
            let succ: Vec<(usize, f64)> = (0..n)
                .filter(|&y| alive[y] && self.a[k * n + y] > 0.0)
                .map(|y| (y, self.a[k * n + y]))
                .collect();
            let pivot = self.deficit[k] + succ.iter().map(|s| s.1).sum::<f64>();
            if !(pivot > PIVOT_MIN) {
                return Err(Error::SeriesDiverges);
            }
            let dk = self.deficit[k];
            for x in (0..n).filter(|&x| alive[x]) {
                let axk = self.a[x * n + k];
                if axk == 0.0 {
                    continue;
                }
                let f = axk / pivot;
                for &(y, v) in &succ {
                    self.a[x * n + y] += f * v;
                }
                self.deficit[x] += f * dk;
                self.a[x * n + k] = 0.0;
            }
        }
        Ok(())
    }
}

/// The restricted resolvent for one taboo set at one pressure.
#[derive(Debug, Clone)]
pub struct TabooSystem {
    shift: Arc<FiniteShift>,
    log_pressure: f64,
    /// `log r`, the right eigenvector of the matrix.
    lr: Vec<f64>,
    /// `1 - exp(P* - P)`.
    deficit: f64,
    /// h-transformed weights, edge aligned.
    w: Vec<f64>,
    taboo: Vec<usize>,
    pos: Vec<usize>,
    free: Vec<usize>,
    local: Vec<usize>,
    /// `eff[k * |T| + l]`: transformed sum from `taboo[k]` to `taboo[l]`.
    eff: Vec<f64>,
    /// Effective deficit at each taboo source.
    eff_deficit: Vec<f64>,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    /// `(I - Q')^{-1} 1`.
    y: DVector<f64>,
}

impl TabooSystem {
    /// Fails with [`Error::SeriesDiverges`] unless the restricted matrix is
    /// certified to have spectral radius below `1 - 1e-12`.
    pub fn new(m: &TransferMatrix, log_pressure: f64, taboo: &[usize]) -> Result<Self> {
        let shift = m.shift();
        let n = shift.n_states();
        let mut pos = vec![usize::MAX; n];
        let mut list = Vec::new();
        for &s in taboo {
            if s >= n {
                return Err(Error::InvalidSymbol(s));
            }
            if pos[s] == usize::MAX {
                pos[s] = list.len();
                list.push(s);
            }
        }
        if list.is_empty() {
            return Err(Error::InvalidInput("empty taboo set".into()));
        }
        let rpf = rpf_eigendata(m)?;
        let lr = rpf.log_right.clone();
        let deficit = -(rpf.log_pressure - log_pressure).exp_m1();
        let w: Vec<f64> = shift
            .edges()
            .enumerate()
            .map(|(e, (x, y))| (m.log_weights()[e] - log_pressure + lr[y] - lr[x]).exp())
            .collect();
        let free: Vec<usize> = (0..n).filter(|&s| pos[s] == usize::MAX).collect();
        let mut local = vec![usize::MAX; n];
        for (k, &s) in free.iter().enumerate() {
            local[s] = k;
        }

        // Nodes: states (taboo ones act as sources), then one target per
        // taboo state receiving every edge into it.
        let nt = list.len();
        let mut ker = Kernel::new(n + nt, deficit);
        for (e, (x, y)) in shift.edges().enumerate() {
            let col = if pos[y] != usize::MAX { n + pos[y] } else { y };
            ker.add(x, col, w[e]);
        }
        ker.eliminate(&free)?;
        let mut eff = vec![0.0; nt * nt];
        for (k, &i) in list.iter().enumerate() {
            for l in 0..nt {
                eff[k * nt + l] = ker.get(i, n + l);
            }
        }
        let eff_deficit = list.iter().map(|&i| ker.deficit[i]).collect();

        let f = free.len();
        let (lu, y) = if f == 0 {
            (None, DVector::zeros(0))
        } else {
            let mut sys = DMatrix::<f64>::identity(f, f);
            for (e, (x, y)) in shift.edges().enumerate() {
                if local[x] != usize::MAX && local[y] != usize::MAX {
                    sys[(local[x], local[y])] -= w[e];
                }
            }
            let lu = sys.lu();
            let y = lu.solve(&DVector::from_element(f, 1.0)).ok_or(Error::SeriesDiverges)?;
            // (I - Q)^{-1} = sum Q^k >= I, so y >= 1 when the series converges;
            // conversely Q y <= (1 - 1/max y) y bounds the spectral radius.
            let ymax = y.max();
            if y.iter().any(|&v| !(v >= 1.0 - 1e-9)) || !(ymax < 1e12) {
                return Err(Error::SeriesDiverges);
            }
            (Some(lu), y)
        };
        Ok(TabooSystem {
            shift: Arc::new(shift.clone()),
            log_pressure,
            lr,
            deficit,
            w,
            taboo: list,
            pos,
            free,
            local,
            eff,
            eff_deficit,
            lu,
            y,
        })
    }

    pub fn log_pressure(&self) -> f64 {
        self.log_pressure
    }

    pub fn taboo(&self) -> &[usize] {
        &self.taboo
    }

    /// Upper bound `1 - 1/max y` on the spectral radius of the restriction.
    pub fn spectral_radius_bound(&self) -> f64 {
        if self.free.is_empty() {
            0.0
        } else {
            1.0 - 1.0 / self.y.max()
        }
    }

    fn position(&self, s: usize) -> Result<usize> {
        match self.pos.get(s) {
            None => Err(Error::InvalidSymbol(s)),
            Some(&usize::MAX) => Err(Error::InvalidInput(format!("symbol {s} is not in the taboo set"))),
            Some(&k) => Ok(k),
        }
    }

    /// `p_ij` for `i, j` in the taboo set.
    pub fn sum(&self, i: usize, j: usize) -> Result<TabooWeights> {
        let (k, l) = (self.position(i)?, self.position(j)?);
        let nt = self.taboo.len();
        let log_value = self.eff[k * nt + l].ln() + self.lr[i] - self.lr[j];
        Ok(TabooWeights {
            i,
            j,
            value: log_value.exp(),
            log_value,
            method: TabooMethod::LinearSolve,
        })
    }

    /// `1 - p_ii`, as the deficit plus the weight of main paths from `i`
    /// to the other taboo symbols.
    pub fn one_minus_loop(&self, i: usize) -> Result<f64> {
        let k = self.position(i)?;
        let nt = self.taboo.len();
        let others: f64 = (0..nt).filter(|&l| l != k).map(|l| self.eff[k * nt + l]).sum();
        Ok(self.eff_deficit[k] + others)
    }

    fn column_into_free(&self, j: usize) -> DVector<f64> {
        let mut rhs = DVector::zeros(self.free.len());
        for &e in self.shift.in_edges(j) {
            let x = self.shift.edge(e).0;
            if self.local[x] != usize::MAX {
                rhs[self.local[x]] = self.w[e];
            }
        }
        rhs
    }

    fn row_from(&self, i: usize) -> Vec<(usize, f64)> {
        self.shift
            .out_edges(i)
            .filter_map(|e| {
                let y = self.shift.edge(e).1;
                (self.local[y] != usize::MAX).then(|| (self.local[y], self.w[e]))
            })
            .collect()
    }

    /// Rigorous bound (up to rounding) on the weight of the paths longer
    /// than `len`.
    pub fn tail_bound(&self, i: usize, j: usize, len: usize) -> f64 {
        if len == 0 {
            return f64::INFINITY;
        }
        let Some(lu) = &self.lu else {
            return 0.0;
        };
        // Paths of length n > len pass through n - 1 >= len free states:
        // remainder = w(i,F) Q^{len-1} X with X <= (max X/y) y and Q y <= rho y.
        let x = lu.solve(&self.column_into_free(j)).expect("LU was checked at construction");
        let ratio = x
            .iter()
            .zip(self.y.iter())
            .map(|(a, b)| a / b)
            .fold(0.0, f64::max);
        let wy: f64 = self.row_from(i).iter().map(|&(u, wu)| wu * self.y[u]).sum();
        let rho = self.spectral_radius_bound();
        rho.powi(len as i32 - 1) * ratio * wy * (self.lr[i] - self.lr[j]).exp()
    }

    /// Main-path weight `i -> j` split into paths that stay in `keep` and
    /// paths that visit a state outside it, both transformed.
    fn split_by(&self, keep: &[bool], i: usize, j: usize) -> Result<(f64, f64)> {
        self.position(i)?;
        let l = self.position(j)?;
        let n = self.shift.n_states();
        let nt = self.taboo.len();
        // Nodes: free states with flag "left keep" in {0, 1}, then the
        // source, then targets per (taboo state, flag).
        let node = |s: usize, f: bool| s + if f { n } else { 0 };
        let src = 2 * n;
        let target = |t: usize, f: bool| 2 * n + 1 + 2 * t + f as usize;
        let mut ker = Kernel::new(2 * n + 1 + 2 * nt, self.deficit);
        let start_flag = !keep[i];
        for (e, (x, y)) in self.shift.edges().enumerate() {
            let w = self.w[e];
            let dest = |f: bool| {
                let f = f || !keep[y];
                if self.pos[y] != usize::MAX {
                    target(self.pos[y], f)
                } else {
                    node(y, f)
                }
            };
            if x == i {
                ker.add(src, dest(start_flag), w);
            }
            if self.pos[x] == usize::MAX {
                ker.add(node(x, false), dest(false), w);
                ker.add(node(x, true), dest(true), w);
            }
        }
        let order: Vec<usize> = self
            .free
            .iter()
            .flat_map(|&s| [node(s, false), node(s, true)])
            .collect();
        ker.eliminate(&order)?;
        Ok((ker.get(src, target(l, false)), ker.get(src, target(l, true))))
    }
}

/// Taboo sum by a direct linear solve.
pub fn taboo_sum(
    m: &TransferMatrix,
    log_pressure: f64,
    i: usize,
    j: usize,
    taboo: &[usize],
) -> Result<TabooWeights> {
    TabooSystem::new(m, log_pressure, taboo)?.sum(i, j)
}

/// Partial sums over main paths of length `1..=max_len`, by length.
pub fn taboo_partial_sums(
    m: &TransferMatrix,
    log_pressure: f64,
    i: usize,
    j: usize,
    taboo: &[usize],
    max_len: usize,
) -> Result<Vec<f64>> {
    let shift = m.shift();
    let n = shift.n_states();
    if i >= n || j >= n {
        return Err(Error::InvalidSymbol(i.max(j)));
    }
    let gauge = max_plus_gauge(shift, m.log_weights())?;
    let v = gauge.v;
    let w: Vec<f64> = shift
        .edges()
        .enumerate()
        .map(|(e, (x, y))| (m.log_weights()[e] - log_pressure + v[y] - v[x]).exp())
        .collect();
    let mut is_taboo = vec![false; n];
    for &s in taboo {
        if s >= n {
            return Err(Error::InvalidSymbol(s));
        }
        is_taboo[s] = true;
    }
    let scale = (v[i] - v[j]).exp();
    let mut mass = vec![0.0; n];
    let mut out = Vec::with_capacity(max_len);
    let mut acc = 0.0;
    for e in shift.out_edges(i) {
        let y = shift.edge(e).1;
        if y == j {
            acc += w[e];
        }
        if !is_taboo[y] {
            mass[y] += w[e];
        }
    }
    if max_len >= 1 {
        out.push(acc * scale);
    }
    for _ in 2..=max_len {
        let mut next = vec![0.0; n];
        for x in (0..n).filter(|&x| mass[x] > 0.0) {
            for e in shift.out_edges(x) {
                let y = shift.edge(e).1;
                let flow = mass[x] * w[e];
                if y == j {
                    acc += flow;
                }
                if !is_taboo[y] {
                    next[y] += flow;
                }
            }
        }
        mass = next;
        out.push(acc * scale);
    }
    Ok(out)
}

/// Enumerated lower bound for the taboo sum, up to paths of `max_len`.
pub fn taboo_sum_enumerated(
    m: &TransferMatrix,
    log_pressure: f64,
    i: usize,
    j: usize,
    taboo: &[usize],
    max_len: usize,
) -> Result<TabooWeights> {
    let sums = taboo_partial_sums(m, log_pressure, i, j, taboo, max_len)?;
    let value = sums.last().copied().unwrap_or(0.0);
    Ok(TabooWeights {
        i,
        j,
        value,
        log_value: value.ln(),
        method: TabooMethod::Enumeration,
    })
}

/// The four main-path sums for a pair `a != b`, with the complements
/// `1 - p_aa` and `1 - p_bb` formed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainPathWeights {
    pub a: usize,
    pub b: usize,
    pub p_aa: f64,
    pub p_bb: f64,
    pub log_p_ab: f64,
    pub log_p_ba: f64,
    pub one_minus_aa: f64,
    pub one_minus_bb: f64,
}

impl MainPathWeights {
    pub fn new(m: &TransferMatrix, log_pressure: f64, a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidInput("main paths need two distinct symbols".into()));
        }
        let sys = TabooSystem::new(m, log_pressure, &[a, b])?;
        Self::from_system(&sys, a, b)
    }

    pub fn from_system(sys: &TabooSystem, a: usize, b: usize) -> Result<Self> {
        Ok(MainPathWeights {
            a,
            b,
            p_aa: sys.sum(a, a)?.value,
            p_bb: sys.sum(b, b)?.value,
            log_p_ab: sys.sum(a, b)?.log_value,
            log_p_ba: sys.sum(b, a)?.log_value,
            one_minus_aa: sys.one_minus_loop(a)?,
            one_minus_bb: sys.one_minus_loop(b)?,
        })
    }

    /// `|p_aa + p_ab p_ba / (1 - p_bb) - 1|` with the accurate `1 - p_bb`.
    pub fn return_decomposition_residual(&self) -> f64 {
        (self.p_aa + (self.log_p_ab + self.log_p_ba).exp() / self.one_minus_bb - 1.0).abs()
    }

    pub fn p_ab(&self) -> f64 {
        self.log_p_ab.exp()
    }

    pub fn p_ba(&self) -> f64 {
        self.log_p_ba.exp()
    }

    /// `mu([b]) / mu([a]) = (1 - p_aa) / (1 - p_bb)`.
    pub fn mu_ratio(&self) -> f64 {
        self.one_minus_aa / self.one_minus_bb
    }

    /// `p_ab p_ba / (1 - p_bb)^2`.
    pub fn visit_ratio(&self) -> f64 {
        (self.log_p_ab + self.log_p_ba).exp() / (self.one_minus_bb * self.one_minus_bb)
    }
}

/// `|p_aa + p_ab p_ba / (1 - p_bb) - 1|`.
pub fn return_decomposition_residual(p_aa: f64, p_ab: f64, p_ba: f64, p_bb: f64) -> Result<f64> {
    if !(p_bb < 1.0) {
        return Err(Error::Precondition(format!("p_bb = {p_bb} must be below 1")));
    }
    Ok((p_aa + p_ab * p_ba / (1.0 - p_bb) - 1.0).abs())
}

/// `(1 - p_aa) / (1 - p_bb)`.
pub fn cylinder_ratio_from_taboo(p_aa: f64, p_bb: f64) -> Result<f64> {
    if !(p_bb < 1.0) {
        return Err(Error::Precondition(format!("p_bb = {p_bb} must be below 1")));
    }
    Ok((1.0 - p_aa) / (1.0 - p_bb))
}

/// Expected visits to `b` between returns to `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitCountRatio {
    /// `p_ab p_ba / (1 - p_bb)^2`.
    pub closed_form: f64,
    /// `sum_{m=1}^{m_max} m p_ab p_bb^{m-1} p_ba`.
    pub partial_sum: f64,
}

pub fn visit_count_ratio(
    m: &TransferMatrix,
    log_pressure: f64,
    a: usize,
    b: usize,
    m_max: usize,
) -> Result<VisitCountRatio> {
    let w = MainPathWeights::new(m, log_pressure, a, b)?;
    if !(w.p_bb < 1.0) {
        return Err(Error::Precondition(format!("p_bb = {} must be below 1", w.p_bb)));
    }
    let cross = (w.log_p_ab + w.log_p_ba).exp();
    let partial_sum = (1..=m_max)
        .map(|k| k as f64 * cross * w.p_bb.powi(k as i32 - 1))
        .sum();
    Ok(VisitCountRatio {
        closed_form: w.visit_ratio(),
        partial_sum,
    })
}

/// Sums on a subshift with its own pressure (`q`) and with the ambient
/// pressure (`r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubshiftSums {
    pub q: TabooWeights,
    pub r: TabooWeights,
}

/// `q_ij` and `r_ij` for symbols `i, j` of the ambient shift, both in
/// the subshift `sub`; the taboo set is given in ambient indices.
pub fn q_sum_and_r_sum(
    m_ambient: &TransferMatrix,
    sub: &Subshift,
    log_pressure_sub: f64,
    log_pressure_ambient: f64,
    i: usize,
    j: usize,
    taboo: &[usize],
) -> Result<SubshiftSums> {
    let shift = m_ambient.shift();
    let to_local = |s: usize| {
        sub.local(s)
            .ok_or(Error::InvalidSubshiftSymbols(if s < shift.n_states() { shift.label(s) } else { s }))
    };
    let li = to_local(i)?;
    let lj = to_local(j)?;
    let taboo_local: Vec<usize> = taboo.iter().filter_map(|&s| sub.local(s)).collect();
    let m_sub = restrict_matrix(m_ambient, sub)?;
    let q = TabooSystem::new(&m_sub, log_pressure_sub, &taboo_local)?.sum(li, lj)?;
    let r = TabooSystem::new(&m_sub, log_pressure_ambient, &taboo_local)?.sum(li, lj)?;
    let relabel = |w: TabooWeights| TabooWeights { i, j, ..w };
    Ok(SubshiftSums {
        q: relabel(q),
        r: relabel(r),
    })
}

/// The transfer matrix restricted to a subshift.
pub fn restrict_matrix(m: &TransferMatrix, sub: &Subshift) -> Result<TransferMatrix> {
    let lw = sub
        .shift
        .edges()
        .map(|(a, b)| m.log_weight(sub.embedding[a], sub.embedding[b]).unwrap())
        .collect();
    TransferMatrix::from_log_weights(&sub.shift, m.t(), lw)
}

/// `p_ij - r_ij`: main paths of the ambient shift that leave the subshift,
/// summed directly (no subtraction).
pub fn excursion_gap(
    m: &TransferMatrix,
    sub: &Subshift,
    log_pressure: f64,
    i: usize,
    j: usize,
    taboo: &[usize],
) -> Result<f64> {
    let sys = TabooSystem::new(m, log_pressure, taboo)?;
    let mut keep = vec![false; m.shift().n_states()];
    for &s in &sub.embedding {
        keep[s] = true;
    }
    let (_, outside) = sys.split_by(&keep, i, j)?;
    Ok(outside * (sys.lr[i] - sys.lr[j]).exp())
}

/// Splitting of `p_aa` by the number of interior symbols from `support`.
///
/// Returns `p_aa(0..=n_cap)` over main loops at `a` (taboo `{a, b}`) of
/// length at most `len_cap`.
pub fn paa_by_marked_count(
    m: &TransferMatrix,
    log_pressure: f64,
    a: usize,
    b: usize,
    support: &[usize],
    n_cap: usize,
    len_cap: usize,
) -> Result<Vec<f64>> {
    let shift = m.shift();
    let n = shift.n_states();
    if a >= n || b >= n {
        return Err(Error::InvalidSymbol(a.max(b)));
    }
    let gauge = max_plus_gauge(shift, m.log_weights())?;
    let v = gauge.v;
    let w: Vec<f64> = shift
        .edges()
        .enumerate()
        .map(|(e, (x, y))| (m.log_weights()[e] - log_pressure + v[y] - v[x]).exp())
        .collect();
    let mut marked = vec![false; n];
    for &s in support {
        if s < n {
            marked[s] = true;
        }
    }
    let blocked = |s: usize| s == a || s == b;
    let mut out = vec![0.0; n_cap + 1];
    // mass[x][c]: weight of main-path prefixes ending at free x with c marks
    let mut mass = vec![vec![0.0; n_cap + 1]; n];
    for e in shift.out_edges(a) {
        let y = shift.edge(e).1;
        if y == a {
            out[0] += w[e];
        } else if !blocked(y) {
            let c = marked[y] as usize;
            if c <= n_cap {
                mass[y][c] += w[e];
            }
        }
    }
    for _ in 2..=len_cap {
        let mut next = vec![vec![0.0; n_cap + 1]; n];
        let mut any = false;
        for x in 0..n {
            for c in 0..=n_cap {
                let mx = mass[x][c];
                if mx == 0.0 {
                    continue;
                }
                for e in shift.out_edges(x) {
                    let y = shift.edge(e).1;
                    let flow = mx * w[e];
                    if y == a {
                        out[c] += flow;
                    } else if !blocked(y) {
                        let c2 = c + marked[y] as usize;
                        if c2 <= n_cap {
                            next[y][c2] += flow;
                            any = true;
                        }
                    }
                }
            }
        }
        mass = next;
        if !any {
            break;
        }
    }
    Ok(out)
}

/// Bound on `p_aa(n)`: `(1 - exp(-C t - N P))^r` with `r = floor(n / |I|)`.
pub fn marked_count_bound(big_c: f64, big_n: usize, log_pressure: f64, t: f64, support_size: usize, n: usize) -> f64 {
    let r = n / support_size.max(1);
    let base = -(-big_c * t - big_n as f64 * log_pressure).exp_m1();
    base.powi(r as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{FamilyRule, MarkovPotential, RuleKind};
    use crate::shift::{enumerate_paths, full, renewal};
    use crate::transfer::rpf_eigendata;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    fn zero_full(k: usize) -> TransferMatrix {
        let f = full(k).unwrap();
        TransferMatrix::new(&MarkovPotential::from_edge_values(&f, vec![0.0; k * k]).unwrap(), 1.0).unwrap()
    }

    fn rule_matrix(k: usize, kind: RuleKind, t: f64) -> TransferMatrix {
        let p = MarkovPotential::from_rule(&renewal(k).unwrap(), FamilyRule::new(kind)).unwrap();
        TransferMatrix::new(&p, t).unwrap()
    }

    #[test]
    fn full_two_shift_single_term() {
        let m = zero_full(2);
        let p = taboo_sum(&m, LN_2, 0, 0, &[0, 1]).unwrap();
        assert_abs_diff_eq!(p.value, 0.5, epsilon = 1e-15);
        for (i, j) in [(0, 1), (1, 0), (1, 1)] {
            assert_abs_diff_eq!(taboo_sum(&m, LN_2, i, j, &[0, 1]).unwrap().value, 0.5, epsilon = 1e-15);
        }
        let e = taboo_sum_enumerated(&m, LN_2, 0, 0, &[0, 1], 1).unwrap();
        assert_eq!(e.value, 0.5);
        assert_eq!(e.method, TabooMethod::Enumeration);
    }

    #[test]
    fn renewal_x0_minus_x1_main_paths() {
        let m = rule_matrix(25, RuleKind::X0MinusX1, 1.0);
        let p11 = taboo_sum(&m, LN_2, 0, 0, &[0, 1]).unwrap();
        let p22 = taboo_sum(&m, LN_2, 1, 1, &[0, 1]).unwrap();
        assert_abs_diff_eq!(p11.value, 0.5, epsilon = 1e-15);
        assert_eq!(p22.value, 0.0);
        let e = taboo_sum_enumerated(&m, LN_2, 0, 0, &[0, 1], 10).unwrap();
        assert_abs_diff_eq!(e.value, 0.5, epsilon = 1e-15);
        let short = taboo_sum_enumerated(&m, LN_2, 1, 0, &[0, 1], 0).unwrap();
        assert_eq!(short.value, 0.0);
    }

    #[test]
    fn divergence_is_detected() {
        let m = zero_full(2);
        // free state {b} with self-weight e^{0.75}/2 > 1
        assert!(matches!(
            taboo_sum(&m, LN_2 - 0.75, 0, 0, &[0]),
            Err(Error::SeriesDiverges)
        ));
        // P = 0 puts the free self-loop at weight 1
        assert!(matches!(taboo_sum(&m, 0.0, 0, 0, &[0]), Err(Error::SeriesDiverges)));
        assert!(taboo_sum(&m, LN_2, 0, 0, &[0]).is_ok());
    }

    #[test]
    fn dp_matches_explicit_enumeration() {
        let m = rule_matrix(5, RuleKind::NegX0, 0.7);
        let p = rpf_eigendata(&m).unwrap().log_pressure;
        let shift = m.shift();
        for (i, j) in [(0, 0), (0, 2), (2, 0)] {
            let sums = taboo_partial_sums(&m, p, i, j, &[0, 2], 9).unwrap();
            let paths = enumerate_paths(shift, i, j, 9, &[0, 2]);
            let direct: f64 = paths
                .iter()
                .map(|pa| {
                    let w: f64 = pa.transitions().map(|(x, y)| m.log_weight(x, y).unwrap()).sum();
                    (w - pa.len() as f64 * p).exp()
                })
                .sum();
            assert_abs_diff_eq!(sums[8], direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn decomposition_and_ratios_on_parry() {
        assert_eq!(return_decomposition_residual(0.5, 0.5, 0.5, 0.5).unwrap(), 0.0);
        assert_eq!(cylinder_ratio_from_taboo(0.5, 0.5).unwrap(), 1.0);
        assert!(return_decomposition_residual(0.5, 0.5, 0.5, 1.0).is_err());
        let v = visit_count_ratio(&zero_full(2), LN_2, 0, 1, 1).unwrap();
        assert_abs_diff_eq!(v.closed_form, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.partial_sum, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn ratios_on_geometric_chain() {
        let m = rule_matrix(25, RuleKind::X0MinusX1, 1.0);
        let p = rpf_eigendata(&m).unwrap().log_pressure;
        let w = MainPathWeights::new(&m, p, 0, 1).unwrap();
        let r = return_decomposition_residual(w.p_aa, w.p_ab(), w.p_ba(), w.p_bb).unwrap();
        assert!(r <= 1e-9);
        assert_abs_diff_eq!(w.mu_ratio(), 0.5, epsilon = 1e-7);
        let v = visit_count_ratio(&m, p, 0, 1, 50).unwrap();
        assert_abs_diff_eq!(v.closed_form, 0.5, epsilon = 1e-7);
        assert!(v.partial_sum <= v.closed_form + 1e-15);
    }

    #[test]
    fn enumeration_converges_below_solve_within_tail_bound() {
        let m = zero_full(3);
        let p = (3.0f64).ln();
        let sys = TabooSystem::new(&m, p, &[0, 1]).unwrap();
        let exact = sys.sum(0, 1).unwrap().value;
        let sums = taboo_partial_sums(&m, p, 0, 1, &[0, 1], 40).unwrap();
        for (k, s) in sums.iter().enumerate() {
            assert!(*s <= exact + 1e-15);
            if k > 0 {
                assert!(*s >= sums[k - 1]);
            }
            let gap = exact - s;
            assert!(gap <= sys.tail_bound(0, 1, k + 1) * (1.0 + 1e-9) + 4.0 * f64::EPSILON * exact, "len {}", k + 1);
        }
    }

    #[test]
    fn subshift_sums_and_gap() {
        let m = rule_matrix(20, RuleKind::NegX0, 6.0);
        let p = rpf_eigendata(&m).unwrap().log_pressure;
        let sub = m.shift().induced(&[0, 1, 2, 3, 4]).unwrap();
        let ms = restrict_matrix(&m, &sub).unwrap();
        let q_p = rpf_eigendata(&ms).unwrap().log_pressure;
        let s = q_sum_and_r_sum(&m, &sub, q_p, p, 0, 0, &[0, 1]).unwrap();
        let p11 = taboo_sum(&m, p, 0, 0, &[0, 1]).unwrap().value;
        assert!(s.r.value <= p11 + 1e-12);
        assert!(s.r.value <= s.q.value + 1e-12);
        let gap = excursion_gap(&m, &sub, p, 0, 0, &[0, 1]).unwrap();
        assert!((p11 - s.r.value - gap).abs() < 1e-12);
        // same shift: q = r = p
        let whole = m.shift().induced(&(0..20).collect::<Vec<_>>()).unwrap();
        let s = q_sum_and_r_sum(&m, &whole, p, p, 0, 0, &[0, 1]).unwrap();
        assert_abs_diff_eq!(s.q.value, p11, epsilon = 1e-15);
        assert_abs_diff_eq!(s.r.value, p11, epsilon = 1e-15);
        assert_eq!(
            q_sum_and_r_sum(&m, &sub, q_p, p, 7, 0, &[0, 7]).unwrap_err(),
            Error::InvalidSubshiftSymbols(8)
        );
    }

    #[test]
    fn excursion_gap_counts_paths_outside() {
        // full 3-shift, subshift {0, 1}, taboo {0}: loops 0 -> ... -> 0 that touch 2
        let m = zero_full(3);
        let p = (3.0f64).ln();
        let sub = m.shift().induced(&[0, 1]).unwrap();
        let gap = excursion_gap(&m, &sub, p, 0, 0, &[0]).unwrap();
        let all = taboo_sum(&m, p, 0, 0, &[0]).unwrap().value;
        let ms = restrict_matrix(&m, &sub).unwrap();
        let inside = taboo_sum(&ms, p, 0, 0, &[0]).unwrap().value;
        assert_abs_diff_eq!(gap, all - inside, epsilon = 1e-14);
        assert!(gap > 0.0);
    }

    #[test]
    fn marked_count_split() {
        // renewal, I = {1}, a = 1: no interior 1 on main loops
        let m = rule_matrix(10, RuleKind::NegX0, 2.0);
        let p = rpf_eigendata(&m).unwrap().log_pressure;
        let split = paa_by_marked_count(&m, p, 0, 1, &[0], 4, 50).unwrap();
        let p11 = taboo_sum(&m, p, 0, 0, &[0, 1]).unwrap().value;
        assert_abs_diff_eq!(split[0], p11, epsilon = 1e-15);
        assert!(split[1..].iter().all(|&x| x == 0.0));

        // full 3-shift with I = {0, 1}, a = 0, b = 2 so 1 may appear inside
        let m = zero_full(3);
        let p = (3.0f64).ln();
        let split = paa_by_marked_count(&m, p, 0, 2, &[0, 1], 10, 12).unwrap();
        let mut brute = [0.0; 11];
        for path in enumerate_paths(m.shift(), 0, 0, 12, &[0, 2]) {
            let c = path.interior().iter().filter(|&&s| s == 1).count();
            if c <= 10 {
                brute[c] += (-(path.len() as f64) * p).exp();
            }
        }
        for c in 0..=10 {
            assert_abs_diff_eq!(split[c], brute[c], epsilon = 1e-15);
        }
    }

    #[test]
    fn bound_formula() {
        assert_eq!(marked_count_bound(1.0, 2, 0.0, 1.0, 2, 1), 1.0);
        let b = marked_count_bound(1.0, 2, 0.0, 1.0, 2, 5);
        assert_abs_diff_eq!(b, (1.0 - (-1.0f64).exp()).powi(2), epsilon = 1e-15);
    }
}
