//! Maximizing value and maximizing periodic orbits.
//!
//! `alpha(phi)` on a finite transitive shift is the maximum mean weight of a
//! cycle, computed by Karp's algorithm. The max-plus eigenvector built from
//! it also serves as a diagonal gauge for the transfer matrix.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::potential::MarkovPotential;
use crate::shift::{enumerate_simple_cycles, FiniteShift, Path, ShiftFamily};

/// Result of Karp's recursion on arbitrary edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct KarpResult {
    pub alpha: f64,
    /// A cycle attaining `alpha`, closed.
    pub cycle: Path,
}

/// Maximum mean cycle of `weights` (aligned with `shift.edges()`).
pub fn karp(shift: &FiniteShift, weights: &[f64]) -> Result<KarpResult> {
    if !shift.is_topologically_transitive() {
        return Err(Error::NotTransitive);
    }
    let n = shift.n_states();
    debug_assert_eq!(weights.len(), shift.n_edges());
    // d[k][v]: heaviest walk of exactly k edges from state 0 to v.
    let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    let mut parent = vec![vec![usize::MAX; n]; n + 1];
    d[0][0] = 0.0;
    for k in 1..=n {
        let (prev, cur) = d.split_at_mut(k);
        let prev = &prev[k - 1];
        let cur = &mut cur[0];
        for (e, (a, b)) in shift.edges().enumerate() {
            if prev[a] == f64::NEG_INFINITY {
                continue;
            }
            let cand = prev[a] + weights[e];
            if cand > cur[b] {
                cur[b] = cand;
                parent[k][b] = a;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut best_v = usize::MAX;
    for v in 0..n {
        if d[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for k in 0..n {
            if d[k][v] == f64::NEG_INFINITY {
                continue;
            }
            worst = worst.min((d[n][v] - d[k][v]) / (n - k) as f64);
        }
        if worst > best {
            best = worst;
            best_v = v;
        }
    }
    // Walk the length-n optimal walk backwards; a repeated state closes a cycle.
    let mut walk = vec![best_v];
    let mut cur = best_v;
    for k in (1..=n).rev() {
        cur = parent[k][cur];
        walk.push(cur);
    }
    walk.reverse();
    let mut last_seen = vec![usize::MAX; n];
    let mut cycle = None;
    let mut best_mean = f64::NEG_INFINITY;
    for (pos, &s) in walk.iter().enumerate() {
        if last_seen[s] != usize::MAX {
            let c: Vec<usize> = walk[last_seen[s]..=pos].to_vec();
            let p = Path::new(c);
            let m = mean_weight(shift, weights, &p);
            if m > best_mean {
                best_mean = m;
                cycle = Some(p);
            }
        }
        last_seen[s] = pos;
    }
    let cycle = canonical_rotation(&cycle.expect("a walk of n edges on n states repeats a state"));
    // Report the mean of the cycle itself: it agrees with `best` up to
    // rounding and is reproducible by summing the same edges.
    let alpha = mean_weight(shift, weights, &cycle);
    debug_assert!((alpha - best).abs() <= 1e-9 * best.abs().max(1.0));
    Ok(KarpResult { alpha, cycle })
}

/// Rotation of a closed simple cycle starting at its least state.
fn canonical_rotation(cycle: &Path) -> Path {
    let body = &cycle.symbols[..cycle.symbols.len() - 1];
    let k = (0..body.len()).min_by_key(|&i| body[i]).unwrap();
    let mut symbols: Vec<usize> = body[k..].iter().chain(&body[..k]).copied().collect();
    symbols.push(symbols[0]);
    Path::new(symbols)
}

fn mean_weight(shift: &FiniteShift, weights: &[f64], cycle: &Path) -> f64 {
    let sum: f64 = cycle
        .transitions()
        .map(|(a, b)| weights[shift.edge_id(a, b).unwrap()])
        .sum();
    sum / cycle.len() as f64
}

/// `alpha(phi)`: the largest ergodic average, attained on a periodic orbit.
pub fn max_ergodic_average(pot: &MarkovPotential) -> Result<f64> {
    karp(pot.shift(), pot.values()).map(|k| k.alpha)
}

/// Oracle: best mean over simple cycles of length at most `max_len`.
pub fn max_mean_cycle_bruteforce(pot: &MarkovPotential, max_len: usize) -> f64 {
    let shift = pot.shift();
    enumerate_simple_cycles(shift, max_len)
        .iter()
        .map(|c| mean_weight(shift, pot.values(), c))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Max-plus eigen-gauge of edge weights.
///
/// `v(a)` is the heaviest path value from `a` to the critical state under
/// `w - beta`, so `w(a,b) - beta + v(b) - v(a) <= 0` on every edge, with
/// equality exactly on the edges of optimal cycles (up to rounding).
#[derive(Debug, Clone, PartialEq)]
pub struct MaxPlusGauge {
    pub beta: f64,
    pub v: Vec<f64>,
    pub critical: usize,
    pub cycle: Path,
}

pub fn max_plus_gauge(shift: &FiniteShift, weights: &[f64]) -> Result<MaxPlusGauge> {
    let k = karp(shift, weights)?;
    let n = shift.n_states();
    let c = k.cycle.first();
    let mut v = vec![f64::NEG_INFINITY; n];
    v[c] = 0.0;
    for _ in 0..n.saturating_sub(1) {
        let mut changed = false;
        for a in 0..n {
            if a == c {
                continue;
            }
            let mut best = v[a];
            for e in shift.out_edges(a) {
                let b = shift.edge(e).1;
                if v[b] == f64::NEG_INFINITY {
                    continue;
                }
                let cand = weights[e] - k.alpha + v[b];
                if cand > best {
                    best = cand;
                }
            }
            if best > v[a] {
                v[a] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(MaxPlusGauge {
        beta: k.alpha,
        v,
        critical: c,
        cycle: k.cycle,
    })
}

/// Adjacency of edges whose reduced weight is zero within `tol`.
fn tight_graph(shift: &FiniteShift, weights: &[f64], g: &MaxPlusGauge) -> Vec<Vec<usize>> {
    let scale = weights.iter().fold(1.0f64, |m, w| m.max(w.abs()))
        + g.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-9 * scale;
    let mut adj = vec![Vec::new(); shift.n_states()];
    for (e, (a, b)) in shift.edges().enumerate() {
        let reduced = weights[e] - g.beta + g.v[b] - g.v[a];
        if reduced >= -tol {
            adj[a].push(b);
        }
    }
    adj
}

/// Shortest loop at `s` in `adj` using only states `>= s`, lexicographically least.
fn least_loop_from(adj: &[Vec<usize>], s: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    // reverse BFS distances to s over states > s
    let mut radj = vec![Vec::new(); n];
    for (a, succ) in adj.iter().enumerate() {
        for &b in succ {
            radj[b].push(a);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        for &u in &radj[x] {
            if u > s && dist[u] == usize::MAX {
                dist[u] = dist[x] + 1;
                queue.push_back(u);
            }
        }
    }
    let step = |v: usize| if v == s { Some(0) } else if v > s { (dist[v] != usize::MAX).then_some(dist[v]) } else { None };
    let first = adj[s].iter().filter_map(|&v| step(v)).min()?;
    let mut word = vec![s];
    let mut remaining = first;
    loop {
        let cur = *word.last().unwrap();
        let next = *adj[cur]
            .iter()
            .find(|&&v| step(v) == Some(remaining) && (v != s || remaining == 0))
            .unwrap();
        word.push(next);
        if next == s {
            break;
        }
        remaining -= 1;
    }
    Some(word)
}

/// An optimal cycle and its periodic measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximizingCycle {
    /// Closed cycle, starting at its least state.
    pub cycle: Path,
    pub mean: f64,
    /// Periodic measure on symbols: `(state, frequency)` in state order.
    pub measure: Vec<(usize, f64)>,
}

impl MaximizingCycle {
    /// The orbit word without the closing repeat.
    pub fn orbit(&self) -> &[usize] {
        &self.cycle.symbols[..self.cycle.symbols.len() - 1]
    }
}

/// An optimal cycle; the shortest one, then the lexicographically least.
pub fn maximizing_cycle(pot: &MarkovPotential) -> Result<MaximizingCycle> {
    let shift = pot.shift();
    let g = max_plus_gauge(shift, pot.values())?;
    let adj = tight_graph(shift, pot.values(), &g);
    let mut best: Option<Vec<usize>> = None;
    for s in 0..shift.n_states() {
        if let Some(w) = least_loop_from(&adj, s) {
            if best.as_ref().is_none_or(|b| w.len() < b.len()) {
                best = Some(w);
            }
        }
    }
    let symbols = best.unwrap_or_else(|| g.cycle.symbols.clone());
    let cycle = Path::new(symbols);
    let mean = mean_weight(shift, pot.values(), &cycle);
    let mut counts = vec![0usize; shift.n_states()];
    for &s in &cycle.symbols[1..] {
        counts[s] += 1;
    }
    let len = cycle.len() as f64;
    let measure = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| (s, c as f64 / len))
        .collect();
    Ok(MaximizingCycle {
        cycle,
        mean,
        measure,
    })
}

/// States lying on some optimal cycle of `pot`'s shift.
pub fn optimal_cycle_states(pot: &MarkovPotential) -> Result<Vec<usize>> {
    let shift = pot.shift();
    let g = max_plus_gauge(shift, pot.values())?;
    let adj = tight_graph(shift, pot.values(), &g);
    Ok((0..shift.n_states())
        .filter(|&s| least_loop_from_any(&adj, s))
        .collect())
}

/// Whether `s` lies on a cycle of `adj`.
fn least_loop_from_any(adj: &[Vec<usize>], s: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<usize> = adj[s].clone();
    while let Some(x) = stack.pop() {
        if x == s {
            return true;
        }
        if !seen[x] {
            seen[x] = true;
            stack.extend(adj[x].iter().copied());
        }
    }
    false
}

/// Support set I: labels of symbols on optimal cycles of the truncation at
/// `k_probe`, required to agree with the truncation at `2 k_probe`.
pub fn support_set_i(
    family: &ShiftFamily,
    pot: &MarkovPotential,
    k_probe: usize,
) -> Result<Vec<usize>> {
    let labels_at = |k: usize| -> Result<Vec<usize>> {
        let shift = family.truncate(k)?;
        let p = pot.extend_to(&shift)?;
        Ok(optimal_cycle_states(&p)?
            .into_iter()
            .map(|s| shift.label(s))
            .collect())
    };
    let small = labels_at(k_probe)?;
    let large = match family {
        ShiftFamily::Explicit(s) if 2 * k_probe > s.n_states() => return Ok(small),
        _ => labels_at(2 * k_probe)?,
    };
    if small != large {
        return Err(Error::UnstableSupport(k_probe, 2 * k_probe));
    }
    Ok(small)
}
