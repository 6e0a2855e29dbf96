//! Finite Markov shifts, countable families and their truncations.
//!
//! States are stored as contiguous 0-based indices. Each shift also carries
//! a label per state (renewal truncations are labelled `1..=K`, induced
//! subshifts keep the labels of their parent) which is what users see.

use std::collections::VecDeque;
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Internal state index of a shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub usize);

/// Finite word `x_0 .. x_n` of internal indices.
///
/// A single symbol is a valid word (it names a 1-cylinder); a path in the
/// graph sense has at least two symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path {
    pub symbols: Vec<usize>,
}

impl Path {
    pub fn new(symbols: Vec<usize>) -> Self {
        assert!(!symbols.is_empty(), "a word has at least one symbol");
        Path { symbols }
    }

    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.symbols.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.len() < 2
    }

    pub fn first(&self) -> usize {
        self.symbols[0]
    }

    pub fn last(&self) -> usize {
        *self.symbols.last().unwrap()
    }

    pub fn is_loop(&self) -> bool {
        self.symbols.len() >= 2 && self.first() == self.last()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.symbols.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn interior(&self) -> &[usize] {
        if self.symbols.len() <= 2 {
            &[]
        } else {
            &self.symbols[1..self.symbols.len() - 1]
        }
    }
}

/// A finite Markov shift given by its 0/1 transition matrix.
///
/// Edges are kept in compressed row form with targets sorted, so an edge has
/// a stable id and per-edge data (potential values, log-weights) can live in
/// plain vectors aligned with [`FiniteShift::edges`].
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteShift {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    sources: Vec<usize>,
    pred_offsets: Vec<usize>,
    pred_edges: Vec<usize>,
    labels: Vec<usize>,
}

impl FiniteShift {
    /// Validates and builds a shift on `0..n_states` with labels equal to indices.
    pub fn new(n_states: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..n_states).collect();
        Self::with_labels(n_states, edges, labels)
    }

    pub(crate) fn with_labels(
        n_states: usize,
        edges: &[(usize, usize)],
        labels: Vec<usize>,
    ) -> Result<Self> {
        if n_states == 0 {
            return Err(Error::InvalidInput("a shift needs at least one state".into()));
        }
        debug_assert_eq!(labels.len(), n_states);
        debug_assert!(labels.windows(2).all(|w| w[0] < w[1]));
        for &(a, b) in edges {
            if a >= n_states || b >= n_states {
                return Err(Error::EdgeOutOfRange(a, b, n_states));
            }
        }
        let mut sorted = edges.to_vec();
        sorted.sort_unstable();
        sorted.dedup();

        let mut out_deg = vec![0usize; n_states];
        let mut in_deg = vec![0usize; n_states];
        for &(a, b) in &sorted {
            out_deg[a] += 1;
            in_deg[b] += 1;
        }
        if let Some(s) = (0..n_states).find(|&s| out_deg[s] == 0 || in_deg[s] == 0) {
            return Err(Error::EmptyRowOrColumn(labels[s]));
        }

        let mut offsets = Vec::with_capacity(n_states + 1);
        offsets.push(0);
        for s in 0..n_states {
            offsets.push(offsets[s] + out_deg[s]);
        }
        let targets: Vec<usize> = sorted.iter().map(|e| e.1).collect();
        let sources: Vec<usize> = sorted.iter().map(|e| e.0).collect();

        let mut pred_offsets = Vec::with_capacity(n_states + 1);
        pred_offsets.push(0);
        for s in 0..n_states {
            pred_offsets.push(pred_offsets[s] + in_deg[s]);
        }
        let mut fill = pred_offsets.clone();
        let mut pred_edges = vec![0; sorted.len()];
        for (e, &(_, b)) in sorted.iter().enumerate() {
            pred_edges[fill[b]] = e;
            fill[b] += 1;
        }

        Ok(FiniteShift {
            n: n_states,
            offsets,
            targets,
            sources,
            pred_offsets,
            pred_edges,
            labels,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.targets.len()
    }

    /// Edges `(a, b)` in id order (lexicographic).
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sources.iter().copied().zip(self.targets.iter().copied())
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.sources[e], self.targets[e])
    }

    pub fn successors(&self, a: usize) -> &[usize] {
        &self.targets[self.offsets[a]..self.offsets[a + 1]]
    }

    /// Ids of the out-edges of `a`.
    pub fn out_edges(&self, a: usize) -> std::ops::Range<usize> {
        self.offsets[a]..self.offsets[a + 1]
    }

    /// Ids of the in-edges of `b`, ordered by source.
    pub fn in_edges(&self, b: usize) -> &[usize] {
        &self.pred_edges[self.pred_offsets[b]..self.pred_offsets[b + 1]]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        if a >= self.n {
            return None;
        }
        self.successors(a)
            .binary_search(&b)
            .ok()
            .map(|k| self.offsets[a] + k)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_id(a, b).is_some()
    }

    pub fn label(&self, s: usize) -> usize {
        self.labels[s]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Internal index of a user-facing label.
    pub fn index_of(&self, label: usize) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn index_of_checked(&self, label: usize) -> Result<usize> {
        self.index_of(label).ok_or(Error::InvalidSymbol(label))
    }

    /// Checks every transition of `word`.
    pub fn check_word(&self, word: &Path) -> Result<()> {
        for &s in &word.symbols {
            if s >= self.n {
                return Err(Error::InvalidSymbol(s));
            }
        }
        for (a, b) in word.transitions() {
            if !self.has_edge(a, b) {
                return Err(Error::InadmissibleWord(self.label(a), self.label(b)));
            }
        }
        Ok(())
    }

    /// Word rendered through labels; digits are concatenated when every
    /// label is a single digit, otherwise joined by `-`.
    pub fn format_word(&self, symbols: &[usize]) -> String {
        let labels: Vec<usize> = symbols.iter().map(|&s| self.label(s)).collect();
        if labels.iter().all(|&l| l < 10) {
            labels.iter().map(|l| l.to_string()).collect()
        } else {
            labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join("-")
        }
    }

    fn reachable(&self, start: usize, forward: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            let next: Vec<usize> = if forward {
                self.successors(u).to_vec()
            } else {
                self.in_edges(u).iter().map(|&e| self.sources[e]).collect()
            };
            for v in next {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Strong connectivity of the edge digraph.
    pub fn is_topologically_transitive(&self) -> bool {
        self.reachable(0, true).into_iter().all(|x| x) && self.reachable(0, false).into_iter().all(|x| x)
    }

    /// Gcd of cycle lengths, or `None` when the shift is not transitive.
    pub fn period(&self) -> Option<usize> {
        if !self.is_topologically_transitive() {
            return None;
        }
        // BFS levels from state 0; every edge (u,v) contributes level(u)+1-level(v).
        let mut level = vec![usize::MAX; self.n];
        level[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &v in self.successors(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for (a, b) in self.edges() {
            let diff = (level[a] as i64 + 1 - level[b] as i64).unsigned_abs() as usize;
            g = gcd(g, diff);
        }
        Some(g)
    }

    /// Transitive with period 1.
    pub fn is_topologically_mixing(&self) -> bool {
        self.period() == Some(1)
    }

    /// The big-images-and-preimages property. A finite alphabet is its own
    /// witness set, so this always holds; family-level answers live on
    /// [`ShiftFamily::satisfies_bip`].
    pub fn satisfies_bip(&self) -> bool {
        true
    }

    /// Strongly connected components, each sorted, ordered by least member.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.n, self.n_edges());
        let nodes: Vec<_> = (0..self.n).map(|_| g.add_node(())).collect();
        for (a, b) in self.edges() {
            g.add_edge(nodes[a], nodes[b], ());
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                c.sort_unstable();
                c
            })
            .collect();
        comps.sort();
        comps
    }

    /// Subshift induced on `keep` (internal indices of `self`).
    pub fn induced(&self, keep: &[usize]) -> Result<Subshift> {
        let mut embedding = keep.to_vec();
        embedding.sort_unstable();
        embedding.dedup();
        let mut local = vec![usize::MAX; self.n];
        for (k, &s) in embedding.iter().enumerate() {
            if s >= self.n {
                return Err(Error::InvalidSymbol(s));
            }
            local[s] = k;
        }
        let edges: Vec<(usize, usize)> = self
            .edges()
            .filter(|&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
            .map(|(a, b)| (local[a], local[b]))
            .collect();
        let labels = embedding.iter().map(|&s| self.label(s)).collect();
        let shift = FiniteShift::with_labels(embedding.len(), &edges, labels)?;
        Ok(Subshift { shift, embedding })
    }

    /// Lexicographically least among the shortest paths from `i` to `j`
    /// (at least one transition) whose interior symbols satisfy `allowed`.
    pub fn shortest_path_avoiding<F>(&self, i: usize, j: usize, allowed: F) -> Option<Path>
    where
        F: Fn(usize) -> bool,
    {
        // dist[u] = length of the shortest u -> j path with allowed interior,
        // for u an interior candidate (u != j) or u = j itself (0).
        let mut dist = vec![usize::MAX; self.n];
        dist[j] = 0;
        let mut queue = VecDeque::from([j]);
        while let Some(v) = queue.pop_front() {
            for &e in self.in_edges(v) {
                let u = self.sources[e];
                if dist[u] == usize::MAX && u != j && allowed(u) {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
        let first = self
            .successors(i)
            .iter()
            .filter(|&&v| v == j || dist[v] != usize::MAX)
            .map(|&v| if v == j { 0 } else { dist[v] })
            .min()?;
        let mut path = vec![i];
        let mut remaining = first;
        let mut cur = *self
            .successors(i)
            .iter()
            .find(|&&v| if v == j { remaining == 0 } else { dist[v] == remaining })
            .unwrap();
        path.push(cur);
        while cur != j || remaining != 0 {
            remaining -= 1;
            cur = *self
                .successors(cur)
                .iter()
                .find(|&&v| if v == j { remaining == 0 } else { dist[v] == remaining })
                .unwrap();
            path.push(cur);
        }
        Some(Path::new(path))
    }
}

impl fmt::Display for FiniteShift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteShift({} states, {} edges)", self.n, self.n_edges())
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A subshift together with its embedding into the parent alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Subshift {
    pub shift: FiniteShift,
    /// `embedding[k]` is the parent index of local state `k`.
    pub embedding: Vec<usize>,
}

impl Subshift {
    /// Local index of a parent state.
    pub fn local(&self, parent: usize) -> Option<usize> {
        self.embedding.binary_search(&parent).ok()
    }
}

/// Validated constructor.
pub fn build_finite_shift(n_states: usize, edges: &[(usize, usize)]) -> Result<FiniteShift> {
    FiniteShift::new(n_states, edges)
}

/// Generator for a countable (or finite) family of shifts.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftFamily {
    /// Edges `(1,1)`, `(1,i)` and `(i,i-1)`; labels start at 1.
    Renewal,
    /// Complete graph; labels start at 0.
    Full,
    /// A fixed finite shift truncated to its first `K` states.
    Explicit(FiniteShift),
}

impl ShiftFamily {
    /// Family-level answer: the countable renewal shift fails BIP, the
    /// others (finite or full) satisfy it.
    pub fn satisfies_bip(&self) -> bool {
        !matches!(self, ShiftFamily::Renewal)
    }

    pub fn truncate(&self, k: usize) -> Result<FiniteShift> {
        truncate(self, k)
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShiftFamily::Renewal => "renewal",
            ShiftFamily::Full => "full",
            ShiftFamily::Explicit(_) => "explicit",
        }
    }
}

/// Renewal truncation on labels `1..=k`.
pub fn renewal(k: usize) -> Result<FiniteShift> {
    truncate(&ShiftFamily::Renewal, k)
}

/// Complete graph on `0..k`.
pub fn full(k: usize) -> Result<FiniteShift> {
    truncate(&ShiftFamily::Full, k)
}

/// Finite truncation of a family to `k` states.
pub fn truncate(family: &ShiftFamily, k: usize) -> Result<FiniteShift> {
    if k == 0 {
        return Err(Error::InvalidInput("truncation size K must be at least 1".into()));
    }
    match family {
        ShiftFamily::Renewal => {
            let mut edges = Vec::with_capacity(2 * k);
            for i in 0..k {
                edges.push((0, i));
                if i > 0 {
                    edges.push((i, i - 1));
                }
            }
            FiniteShift::with_labels(k, &edges, (1..=k).collect())
        }
        ShiftFamily::Full => {
            let edges: Vec<_> = (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).collect();
            FiniteShift::new(k, &edges)
        }
        ShiftFamily::Explicit(shift) => {
            if k > shift.n_states() {
                return Err(Error::InvalidInput(format!(
                    "K = {k} exceeds the {} states of the explicit shift",
                    shift.n_states()
                )));
            }
            let keep: Vec<usize> = (0..k).collect();
            let sub = shift
                .induced(&keep)
                .map_err(|_| Error::DisconnectedTruncation(k))?;
            if !sub.shift.is_topologically_transitive() {
                return Err(Error::DisconnectedTruncation(k));
            }
            Ok(sub.shift)
        }
    }
}

/// All paths `i -> j` of length `1..=max_len` whose interior avoids
/// `forbidden_interior`, in lexicographic order.
pub fn enumerate_paths(
    shift: &FiniteShift,
    i: usize,
    j: usize,
    max_len: usize,
    forbidden_interior: &[usize],
) -> Vec<Path> {
    let mut forbidden = vec![false; shift.n_states()];
    for &s in forbidden_interior {
        if s < forbidden.len() {
            forbidden[s] = true;
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![i];
    fn dfs(
        shift: &FiniteShift,
        j: usize,
        max_len: usize,
        forbidden: &[bool],
        stack: &mut Vec<usize>,
        out: &mut Vec<Path>,
    ) {
        let u = *stack.last().unwrap();
        for &v in shift.successors(u) {
            stack.push(v);
            if v == j {
                out.push(Path::new(stack.clone()));
            }
            if stack.len() <= max_len && !forbidden[v] {
                dfs(shift, j, max_len, forbidden, stack, out);
            }
            stack.pop();
        }
    }
    if max_len >= 1 {
        dfs(shift, j, max_len, &forbidden, &mut stack, &mut out);
    }
    out
}

/// Primitive cycles of length `1..=max_len`, one per rotation class, each
/// written from its lexicographically least rotation and closed (first
/// symbol repeated at the end). Sorted by length, then lexicographically.
pub fn enumerate_cycles(shift: &FiniteShift, max_len: usize) -> Vec<Path> {
    let mut out = Vec::new();
    for s in 0..shift.n_states() {
        let mut stack = vec![s];
        closed_walks_from_min(shift, s, max_len, &mut stack, &mut out);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.symbols.cmp(&b.symbols)));
    out
}

fn closed_walks_from_min(
    shift: &FiniteShift,
    s: usize,
    max_len: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Path>,
) {
    let u = *stack.last().unwrap();
    for &v in shift.successors(u) {
        if v < s {
            continue;
        }
        if v == s {
            let word = &stack[..];
            if is_canonical_primitive(word) {
                let mut closed = word.to_vec();
                closed.push(s);
                out.push(Path::new(closed));
            }
        } else if stack.len() < max_len {
            stack.push(v);
            closed_walks_from_min(shift, s, max_len, stack, out);
            stack.pop();
        }
    }
}

/// `word` is strictly below each of its nontrivial rotations.
fn is_canonical_primitive(word: &[usize]) -> bool {
    let n = word.len();
    (1..n).all(|r| {
        let rotated = word[r..].iter().chain(word[..r].iter());
        word.iter().lt(rotated)
    })
}

/// Simple cycles (no repeated state) of length `1..=max_len`, each closed
/// and starting at its least state.
pub fn enumerate_simple_cycles(shift: &FiniteShift, max_len: usize) -> Vec<Path> {
    let mut out = Vec::new();
    let mut on_stack = vec![false; shift.n_states()];
    for s in 0..shift.n_states() {
        let mut stack = vec![s];
        on_stack[s] = true;
        simple_from(shift, s, max_len, &mut stack, &mut on_stack, &mut out);
        on_stack[s] = false;
    }
    out
}

fn simple_from(
    shift: &FiniteShift,
    s: usize,
    max_len: usize,
    stack: &mut Vec<usize>,
    on_stack: &mut [bool],
    out: &mut Vec<Path>,
) {
    let u = *stack.last().unwrap();
    for &v in shift.successors(u) {
        if v == s {
            let mut closed = stack.clone();
            closed.push(s);
            out.push(Path::new(closed));
        } else if v > s && !on_stack[v] && stack.len() < max_len {
            on_stack[v] = true;
            stack.push(v);
            simple_from(shift, s, max_len, stack, on_stack, out);
            stack.pop();
            on_stack[v] = false;
        }
    }
}

/// Shift description shared with the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftSpec {
    pub kind: ShiftKind,
    pub n_states: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftKind {
    Renewal,
    Full,
    Explicit,
}

impl ShiftSpec {
    pub fn family(&self) -> Result<ShiftFamily> {
        match self.kind {
            ShiftKind::Renewal => Ok(ShiftFamily::Renewal),
            ShiftKind::Full => Ok(ShiftFamily::Full),
            ShiftKind::Explicit => {
                let edges = self.edges.as_ref().ok_or_else(|| {
                    Error::InvalidInput("an explicit shift requires \"edges\"".into())
                })?;
                let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e[0], e[1])).collect();
                Ok(ShiftFamily::Explicit(FiniteShift::new(self.n_states, &pairs)?))
            }
        }
    }

    /// The truncation this description names, at `n_states` states.
    pub fn build(&self) -> Result<FiniteShift> {
        self.family()?.truncate(self.n_states)
    }
}
