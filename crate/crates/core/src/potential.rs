//! Markov potentials `phi(x) = phi(x_0 x_1)` stored as edge weights.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shift::{FiniteShift, Path, ShiftFamily, Subshift};

/// Closed forms for the built-in family potentials, in terms of labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    /// `phi(a, b) = -a`
    NegX0,
    /// `phi(a, b) = a - b`
    X0MinusX1,
    /// `phi(a, b) = kappa`
    Constant(f64),
}

/// A closed-form rule plus an additive offset (from normalization).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyRule {
    pub kind: RuleKind,
    pub offset: f64,
}

impl FamilyRule {
    pub fn new(kind: RuleKind) -> Self {
        FamilyRule { kind, offset: 0.0 }
    }

    pub fn eval(&self, a: usize, b: usize) -> f64 {
        let base = match self.kind {
            RuleKind::NegX0 => -(a as f64),
            RuleKind::X0MinusX1 => a as f64 - b as f64,
            RuleKind::Constant(k) => k,
        };
        base + self.offset
    }

    /// `sup phi|[i]` on the countable family, for labels past the first few.
    /// Returns `None` for finite families, where no tail exists.
    fn tail_sup(&self, family: &ShiftFamily, i: usize) -> Option<f64> {
        let base = match (family, self.kind) {
            (ShiftFamily::Explicit(_), _) => return None,
            (_, RuleKind::Constant(k)) => k,
            (_, RuleKind::NegX0) => -(i as f64),
            // renewal: the only successor of i > 1 is i - 1
            (ShiftFamily::Renewal, RuleKind::X0MinusX1) => 1.0,
            // full shift: the least successor label is 0
            (ShiftFamily::Full, RuleKind::X0MinusX1) => i as f64,
        };
        Some(base + self.offset)
    }

    /// Eventual slope of `i -> sup phi|[i]`.
    fn tail_slope(&self, family: &ShiftFamily) -> f64 {
        match (family, self.kind) {
            (_, RuleKind::Constant(_)) => 0.0,
            (_, RuleKind::NegX0) => -1.0,
            (ShiftFamily::Renewal, RuleKind::X0MinusX1) => 0.0,
            (_, RuleKind::X0MinusX1) => 1.0,
        }
    }
}

/// Edge-indexed potential on a fixed shift.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovPotential {
    shift: Arc<FiniteShift>,
    values: Vec<f64>,
    rule: Option<FamilyRule>,
}

impl MarkovPotential {
    /// Values aligned with `shift.edges()`.
    pub fn from_edge_values(shift: &FiniteShift, values: Vec<f64>) -> Result<Self> {
        if values.len() != shift.n_edges() {
            return Err(Error::InvalidInput(format!(
                "expected {} edge values, got {}",
                shift.n_edges(),
                values.len()
            )));
        }
        if let Some(e) = values.iter().position(|v| !v.is_finite()) {
            let (a, b) = shift.edge(e);
            return Err(Error::InvalidInput(format!(
                "potential value on edge ({}, {}) is not finite",
                shift.label(a),
                shift.label(b)
            )));
        }
        Ok(MarkovPotential {
            shift: Arc::new(shift.clone()),
            values,
            rule: None,
        })
    }

    /// Evaluates `f(label_a, label_b)` on every edge.
    pub fn from_fn<F>(shift: &FiniteShift, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64,
    {
        let values = shift
            .edges()
            .map(|(a, b)| f(shift.label(a), shift.label(b)))
            .collect();
        Self::from_edge_values(shift, values)
    }

    pub fn from_rule(shift: &FiniteShift, rule: FamilyRule) -> Result<Self> {
        let mut pot = Self::from_fn(shift, |a, b| rule.eval(a, b))?;
        pot.rule = Some(rule);
        Ok(pot)
    }

    /// Table keyed by label pairs; must cover exactly the edge set.
    pub fn from_table(shift: &FiniteShift, table: &BTreeMap<(usize, usize), f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(shift.n_edges());
        for (a, b) in shift.edges() {
            let key = (shift.label(a), shift.label(b));
            match table.get(&key) {
                Some(&v) => values.push(v),
                None => {
                    return Err(Error::InvalidInput(format!(
                        "potential table has no value for edge ({}, {})",
                        key.0, key.1
                    )))
                }
            }
        }
        if table.len() != shift.n_edges() {
            let extra = table
                .keys()
                .find(|(a, b)| match (shift.index_of(*a), shift.index_of(*b)) {
                    (Some(x), Some(y)) => !shift.has_edge(x, y),
                    _ => true,
                })
                .copied()
                .unwrap_or((0, 0));
            return Err(Error::InvalidInput(format!(
                "potential table has a value for non-edge ({}, {})",
                extra.0, extra.1
            )));
        }
        Self::from_edge_values(shift, values)
    }

    pub fn shift(&self) -> &FiniteShift {
        &self.shift
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rule(&self) -> Option<FamilyRule> {
        self.rule
    }

    pub fn on_edge(&self, e: usize) -> f64 {
        self.values[e]
    }

    /// `phi(a, b)` for internal indices, `None` off the edge set.
    pub fn value(&self, a: usize, b: usize) -> Option<f64> {
        self.shift.edge_id(a, b).map(|e| self.values[e])
    }

    /// Same rule on another shift (another truncation of the family), or the
    /// same values when the shift is unchanged.
    pub fn extend_to(&self, shift: &FiniteShift) -> Result<Self> {
        match self.rule {
            Some(rule) => Self::from_rule(shift, rule),
            None if shift == self.shift.as_ref() => Ok(self.clone()),
            None => Err(Error::InvalidInput(
                "a table potential cannot be moved to another shift".into(),
            )),
        }
    }

    /// Restriction to a subshift.
    pub fn restrict(&self, sub: &Subshift) -> Self {
        let values = sub
            .shift
            .edges()
            .map(|(a, b)| self.value(sub.embedding[a], sub.embedding[b]).unwrap())
            .collect();
        MarkovPotential {
            shift: Arc::new(sub.shift.clone()),
            values,
            rule: self.rule,
        }
    }

    /// `sum_k phi(x_k, x_{k+1})` along an admissible word.
    pub fn path_sum(&self, path: &Path) -> Result<f64> {
        let mut s = 0.0;
        for (a, b) in path.transitions() {
            let e = self
                .shift
                .edge_id(a, b)
                .ok_or(Error::InadmissibleWord(self.shift.label(a), self.shift.label(b)))?;
            s += self.values[e];
        }
        Ok(s)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// The n = 1 variation: largest spread of `phi(a, .)` over a row.
    pub fn var1(&self) -> f64 {
        (0..self.shift.n_states())
            .map(|a| {
                let row = &self.values[self.shift.out_edges(a)];
                let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }

    /// `max_b phi(i, b)`.
    pub fn sup_on_cylinder(&self, i: usize) -> f64 {
        self.values[self.shift.out_edges(i)]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Convergence of `sum_i exp(sup phi|[i])` over the countable family.
    pub fn is_summable(&self, family: &ShiftFamily, tol: f64) -> Result<bool> {
        self.summability(family, tol).map(|r| r.summable)
    }

    pub fn summability(&self, family: &ShiftFamily, tol: f64) -> Result<SummabilityReport> {
        let rule = self.rule.ok_or(Error::NoTailRule)?;
        let n = self.shift.n_states();
        let head: f64 = (0..n).map(|i| self.sup_on_cylinder(i).exp()).sum();
        let first_tail_label = self.shift.label(n - 1) + 1;
        let Some(_) = rule.tail_sup(family, first_tail_label) else {
            // finite family: the head is the whole series
            return Ok(SummabilityReport {
                summable: true,
                partial_sum: head,
                tail_bound: 0.0,
                terms: n,
            });
        };
        let slope = rule.tail_slope(family);
        if slope >= 0.0 {
            return Ok(SummabilityReport {
                summable: false,
                partial_sum: head,
                tail_bound: f64::INFINITY,
                terms: n,
            });
        }
        // geometric tail: sum_{i >= m} e^{s_m + (i - m) slope} = e^{s_m} / (1 - e^{slope})
        let ratio = slope.exp();
        let mut sum = head;
        let mut label = first_tail_label;
        let mut terms = n;
        loop {
            let term = rule.tail_sup(family, label).unwrap().exp();
            let bound = term / (1.0 - ratio);
            if bound <= tol {
                return Ok(SummabilityReport {
                    summable: true,
                    partial_sum: sum,
                    tail_bound: bound,
                    terms,
                });
            }
            sum += term;
            label += 1;
            terms += 1;
        }
    }

    /// `phi - alpha`, edgewise.
    pub fn normalize(&self, alpha: f64) -> Self {
        MarkovPotential {
            shift: self.shift.clone(),
            values: self.values.iter().map(|v| v - alpha).collect(),
            rule: self.rule.map(|r| FamilyRule {
                kind: r.kind,
                offset: r.offset - alpha,
            }),
        }
    }

    /// `phi + kappa`, edgewise.
    pub fn shifted(&self, kappa: f64) -> Self {
        self.normalize(-kappa)
    }

    /// Constants of the finite-subshift construction for a support set
    /// `support` (internal indices).
    pub fn coercivity_data(&self, support: &[usize]) -> Result<CoercivityData> {
        let shift = self.shift.as_ref();
        let n = shift.n_states();
        let mut in_support = vec![false; n];
        for &s in support {
            if s >= n {
                return Err(Error::InvalidSymbol(s));
            }
            in_support[s] = true;
        }
        let mut support: Vec<usize> = (0..n).filter(|&s| in_support[s]).collect();
        support.dedup();
        if support.is_empty() {
            return Err(Error::InvalidInput("support set I is empty".into()));
        }
        let mut gap = f64::INFINITY;
        for i in (0..n).filter(|&i| !in_support[i]) {
            let sup = self.sup_on_cylinder(i);
            if sup >= 0.0 {
                return Err(Error::NotCoercive(Some(shift.label(i))));
            }
            gap = gap.min(-sup);
        }
        if !gap.is_finite() {
            return Err(Error::NotCoercive(None));
        }
        let d = 0.99 * gap;

        let mut loops = Vec::new();
        for &a in &support {
            for &b in &support {
                let Some(ab) = shift.shortest_path_avoiding(a, b, |_| true) else {
                    continue;
                };
                if a == b {
                    loops.push(ab);
                    continue;
                }
                let Some(ba) = shift.shortest_path_avoiding(b, a, |_| true) else {
                    continue;
                };
                let mut symbols = ab.symbols.clone();
                symbols.extend_from_slice(&ba.symbols[1..]);
                loops.push(Path::new(symbols));
            }
        }

        let subsets = avoid_sets(&support);
        let mut avoiding = Vec::new();
        for j_set in &subsets {
            let mut blocked = vec![false; n];
            for &s in j_set {
                blocked[s] = true;
            }
            for &a in &support {
                for &b in &support {
                    if let Some(p) = shift.shortest_path_avoiding(a, b, |s| !blocked[s]) {
                        avoiding.push(p);
                    }
                }
            }
        }
        avoiding.sort();
        avoiding.dedup();

        let mut big_n = 0usize;
        let mut big_c = f64::NEG_INFINITY;
        for p in loops.iter().chain(avoiding.iter()) {
            big_n = big_n.max(p.len());
            big_c = big_c.max(-self.path_sum(p)?);
        }
        let c = big_c + 2.0 * d / 7.0;
        Ok(CoercivityData {
            support,
            d,
            n: big_n,
            big_c,
            c,
            loops,
            avoiding,
        })
    }

    /// [`sigma_c`] on this potential's own shift.
    pub fn sigma_c(&self, c: f64) -> Result<Subshift> {
        sigma_c_on(self, c)
    }
}

/// Sets `J` to avoid: every proper subset of `support` when it is small,
/// otherwise only the empty set, singletons and pairs.
fn avoid_sets(support: &[usize]) -> Vec<Vec<usize>> {
    let m = support.len();
    if m <= 12 {
        (0u32..(1u32 << m) - 1)
            .map(|mask| {
                (0..m)
                    .filter(|k| mask & (1 << k) != 0)
                    .map(|k| support[k])
                    .collect()
            })
            .collect()
    } else {
        log::warn!(
            "support set has {m} symbols; avoiding sets limited to singletons and pairs"
        );
        let mut out = vec![Vec::new()];
        for x in 0..m {
            out.push(vec![support[x]]);
            for y in x + 1..m {
                out.push(vec![support[x], support[y]]);
            }
        }
        out
    }
}

/// Constants `d, N, C, c` with the path sets they are computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityData {
    /// Support set I (internal indices, sorted).
    pub support: Vec<usize>,
    /// Gap below zero of `sup phi|[i]` off the support, with a 0.99 margin.
    pub d: f64,
    /// Longest path in the two path sets.
    pub n: usize,
    /// Largest `-phi(path)` over the two path sets.
    pub big_c: f64,
    /// `C + 2d/7`.
    pub c: f64,
    /// Loops through each pair of support symbols.
    pub loops: Vec<Path>,
    /// Shortest support-to-support paths avoiding proper subsets of I.
    pub avoiding: Vec<Path>,
}

/// Diagnostics from [`MarkovPotential::summability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummabilityReport {
    pub summable: bool,
    pub partial_sum: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Smallest transitive subshift of the truncation at `k_cap` containing the
/// symbols with `sup phi|[i] >= c`.
///
/// Starting from the threshold set, the interior of the lexicographically
/// least shortest path between the first pair of component representatives
/// that cannot reach each other inside the set is added, until the induced
/// subshift is strongly connected.
pub fn sigma_c(
    family: &ShiftFamily,
    pot: &MarkovPotential,
    c: f64,
    k_cap: usize,
) -> Result<Subshift> {
    let shift = family.truncate(k_cap)?;
    let pot = pot.extend_to(&shift)?;
    sigma_c_on(&pot, c).map_err(|e| match e {
        Error::CapTooSmall(c, _) => Error::CapTooSmall(c, k_cap),
        e => e,
    })
}

fn sigma_c_on(pot: &MarkovPotential, c: f64) -> Result<Subshift> {
    let shift = pot.shift();
    let n = shift.n_states();
    let mut member: Vec<bool> = (0..n).map(|i| pot.sup_on_cylinder(i) >= c).collect();
    if !member.iter().any(|&m| m) {
        return Err(Error::CapTooSmall(c, n));
    }
    loop {
        let keep: Vec<usize> = (0..n).filter(|&s| member[s]).collect();
        let (u, v) = match first_unreachable_pair(shift, &member) {
            None => {
                let sub = shift.induced(&keep)?;
                debug_assert!(sub.shift.is_topologically_transitive());
                return Ok(sub);
            }
            Some(pair) => pair,
        };
        let path = shift
            .shortest_path_avoiding(u, v, |_| true)
            .ok_or(Error::NotTransitive)?;
        for &s in path.interior() {
            member[s] = true;
        }
    }
}

/// First pair (lexicographic) of component representatives `(u, v)` with
/// no path of length at least one from `u` to `v` inside `member`.
fn first_unreachable_pair(shift: &FiniteShift, member: &[bool]) -> Option<(usize, usize)> {
    let n = shift.n_states();
    let keep: Vec<usize> = (0..n).filter(|&s| member[s]).collect();
    // reach[k] = states reachable from keep[k] in >= 1 step inside the set
    let reach: Vec<Vec<bool>> = keep
        .iter()
        .map(|&u| {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = shift
                .successors(u)
                .iter()
                .copied()
                .filter(|&v| member[v])
                .collect();
            for &v in &stack {
                seen[v] = true;
            }
            while let Some(x) = stack.pop() {
                for &y in shift.successors(x) {
                    if member[y] && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            seen
        })
        .collect();
    // representatives: least member of each mutual-reachability class
    let mut reps = Vec::new();
    for (k, &u) in keep.iter().enumerate() {
        let represented = reps.iter().any(|&(kr, r): &(usize, usize)| {
            r == u || (reach[kr][u] && reach[k][r])
        });
        if !represented {
            reps.push((k, u));
        }
    }
    for &(ku, u) in &reps {
        for &(_, v) in &reps {
            if !reach[ku][v] {
                return Some((u, v));
            }
        }
    }
    None
}

/// Potential description shared with the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(rename = "type")]
    pub kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Table,
    NegX0,
    X0MinusX1,
    Constant,
}

impl PotentialSpec {
    pub fn build(&self, shift: &FiniteShift) -> Result<MarkovPotential> {
        match self.kind {
            PotentialKind::NegX0 => MarkovPotential::from_rule(shift, FamilyRule::new(RuleKind::NegX0)),
            PotentialKind::X0MinusX1 => {
                MarkovPotential::from_rule(shift, FamilyRule::new(RuleKind::X0MinusX1))
            }
            PotentialKind::Constant => {
                let k = self.kappa.ok_or_else(|| {
                    Error::InvalidInput("a constant potential requires \"kappa\"".into())
                })?;
                MarkovPotential::from_rule(shift, FamilyRule::new(RuleKind::Constant(k)))
            }
            PotentialKind::Table => {
                let raw = self.values.as_ref().ok_or_else(|| {
                    Error::InvalidInput("a table potential requires \"values\"".into())
                })?;
                let mut table = BTreeMap::new();
                for (key, &v) in raw {
                    table.insert(parse_edge_key(key)?, v);
                }
                MarkovPotential::from_table(shift, &table)
            }
        }
    }
}

fn parse_edge_key(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("edge key {key:?} is not of the form \"a,b\""));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shift::{full, renewal};

    fn neg_x0(k: usize) -> MarkovPotential {
        MarkovPotential::from_rule(&renewal(k).unwrap(), FamilyRule::new(RuleKind::NegX0)).unwrap()
    }

    fn x0_minus_x1(k: usize) -> MarkovPotential {
        MarkovPotential::from_rule(&renewal(k).unwrap(), FamilyRule::new(RuleKind::X0MinusX1))
            .unwrap()
    }

    #[test]
    fn var1_examples() {
        assert_eq!(neg_x0(5).var1(), 0.0);
        assert_eq!(x0_minus_x1(5).var1(), 4.0);
        let c = MarkovPotential::from_rule(&full(3).unwrap(), FamilyRule::new(RuleKind::Constant(2.5)))
            .unwrap();
        assert_eq!(c.var1(), 0.0);
    }

    #[test]
    fn sup_on_cylinder_examples() {
        let p = neg_x0(6);
        let i3 = p.shift().index_of(3).unwrap();
        assert_eq!(p.sup_on_cylinder(i3), -3.0);
        assert_eq!(x0_minus_x1(6).sup_on_cylinder(0), 0.0);
        let z = MarkovPotential::from_rule(&full(2).unwrap(), FamilyRule::new(RuleKind::Constant(0.0)))
            .unwrap();
        assert_eq!(z.sup_on_cylinder(1), 0.0);
    }

    #[test]
    fn summability_examples() {
        let fam = ShiftFamily::Renewal;
        assert!(neg_x0(5).is_summable(&fam, 1e-12).unwrap());
        let rep = neg_x0(5).summability(&fam, 1e-12).unwrap();
        // sum_{i>=1} e^{-i} = 1/(e - 1)
        assert!((rep.partial_sum - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-11);
        assert!(!x0_minus_x1(5).is_summable(&fam, 1e-12).unwrap());
        let zero = MarkovPotential::from_rule(&renewal(5).unwrap(), FamilyRule::new(RuleKind::Constant(0.0)))
            .unwrap();
        assert!(!zero.is_summable(&fam, 1e-12).unwrap());
        let table = MarkovPotential::from_edge_values(&full(2).unwrap(), vec![0.0; 4]).unwrap();
        assert_eq!(table.is_summable(&ShiftFamily::Full, 1e-12), Err(Error::NoTailRule));
    }

    #[test]
    fn normalize_examples() {
        let p = neg_x0(5).normalize(-1.0);
        for (e, (a, _)) in p.shift().edges().enumerate() {
            assert_eq!(p.on_edge(e), 1.0 - p.shift().label(a) as f64);
        }
        assert_eq!(x0_minus_x1(5).normalize(0.0), x0_minus_x1(5));
        let c = MarkovPotential::from_rule(&full(2).unwrap(), FamilyRule::new(RuleKind::Constant(3.0)))
            .unwrap()
            .normalize(3.0);
        assert!(c.values().iter().all(|&v| v == 0.0));
        // the rule follows the normalization
        let e = p.extend_to(&renewal(8).unwrap()).unwrap();
        assert_eq!(e.value(7, 6), Some(-7.0));
    }

    #[test]
    fn coercivity_example_single_support() {
        let p = neg_x0(10).normalize(-1.0);
        let cd = p.coercivity_data(&[0]).unwrap();
        assert!((cd.d - 0.99).abs() < 1e-15);
        assert_eq!(cd.loops, vec![Path::new(vec![0, 0])]);
        assert_eq!(cd.n, 1);
        assert_eq!(cd.big_c, 0.0);
        assert!((cd.c - 2.0 * 0.99 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn coercivity_example_pair_support() {
        let p = neg_x0(20).normalize(-1.0);
        let cd = p.coercivity_data(&[0, 1]).unwrap();
        assert!((cd.d - 1.98).abs() < 1e-14);
        assert_eq!(cd.n, 2);
        assert_eq!(cd.big_c, 1.0);
        // every constructed path obeys the claimed bounds
        for g in cd.loops.iter().chain(cd.avoiding.iter()) {
            assert!(p.path_sum(g).unwrap() >= -cd.big_c);
            assert!(g.len() <= cd.n);
        }
        let sub = p.sigma_c(-7.0 * cd.c).unwrap();
        assert_eq!(sub.shift.labels(), &(1..=11).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn coercivity_errors() {
        let p = x0_minus_x1(10);
        assert!(matches!(p.coercivity_data(&[0]), Err(Error::NotCoercive(Some(_)))));
        let q = neg_x0(4).normalize(-1.0);
        assert_eq!(q.coercivity_data(&[0, 1, 2, 3]), Err(Error::NotCoercive(None)));
    }

    #[test]
    fn sigma_c_examples() {
        let p = neg_x0(10).normalize(-1.0);
        let fam = ShiftFamily::Renewal;
        let s = sigma_c(&fam, &p, -3.0, 10).unwrap();
        assert_eq!(s.shift.labels(), &[1, 2, 3, 4]);
        assert_eq!(sigma_c(&fam, &p, 0.5, 10).unwrap_err(), Error::CapTooSmall(0.5, 10));
        assert_eq!(sigma_c(&fam, &p, 0.0, 10).unwrap().shift.labels(), &[1]);
        let f = MarkovPotential::from_rule(&full(4).unwrap(), FamilyRule::new(RuleKind::NegX0)).unwrap();
        assert_eq!(sigma_c(&ShiftFamily::Full, &f, -10.0, 4).unwrap().shift.n_states(), 4);
    }

    #[test]
    fn sigma_c_augments_with_connecting_path() {
        // 0 -> 1 -> 2 -> 0 with a chord 0 -> 0; core {0, 2} needs 1 to connect
        let s = crate::shift::build_finite_shift(3, &[(0, 0), (0, 1), (1, 2), (2, 0)]).unwrap();
        let p = MarkovPotential::from_edge_values(&s, vec![0.0, -5.0, -5.0, 0.0]).unwrap();
        // sup phi|[0] = 0, sup phi|[1] = -5, sup phi|[2] = 0
        let sub = p.sigma_c(-1.0).unwrap();
        assert_eq!(sub.embedding, vec![0, 1, 2]);
        let sub = p.sigma_c(-0.0).unwrap();
        assert_eq!(sub.embedding, vec![0, 1, 2]);
    }

    #[test]
    fn table_spec() {
        let shift = full(2).unwrap();
        let spec: PotentialSpec = serde_json::from_str(
            r#"{"type":"table","values":{"0,0":1.0,"0,1":0.0,"1,0":0.0,"1,1":0.0}}"#,
        )
        .unwrap();
        let p = spec.build(&shift).unwrap();
        assert_eq!(p.value(0, 0), Some(1.0));
        let missing: PotentialSpec =
            serde_json::from_str(r#"{"type":"table","values":{"0,0":1.0}}"#).unwrap();
        assert!(missing.build(&shift).is_err());
        let extra: PotentialSpec = serde_json::from_str(
            r#"{"type":"table","values":{"0,0":1.0,"0,1":0.0,"1,0":0.0,"1,1":0.0,"2,2":1.0}}"#,
        )
        .unwrap();
        assert!(extra.build(&shift).is_err());
        let k: PotentialSpec = serde_json::from_str(r#"{"type":"constant","kappa":-2}"#).unwrap();
        assert_eq!(k.build(&shift).unwrap().max_value(), -2.0);
        assert!(serde_json::from_str::<PotentialSpec>(r#"{"type":"neg_x0","bogus":1}"#).is_err());
    }
}
