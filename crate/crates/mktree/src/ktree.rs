//! k-trees: construction from creation orders, validation, induced acyclic
//! orientations, clique enumeration, backbone predicates, tree decomposition,
//! and exhaustive enumeration at desk scale.
//!
//! A k-tree starts as a k-clique; every further vertex is attached to an
//! existing k-clique, forming a (k+1)-clique. The inductive recipe is the
//! creation order; a k-tree usually admits many of them.

use crate::error::{MkError, Result};
use crate::tables::VariableId;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashSet};

/// Undirected edge with endpoints ordered ascending.
pub type Edge = (u16, u16);

pub fn edge(u: u16, v: u16) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Number of edges of any k-tree on n vertices (n >= k).
pub fn ktree_edge_count(n: usize, k: usize) -> usize {
    k * (k - 1) / 2 + k * (n - k)
}

/// The inductive recipe defining a k-tree: a base k-clique, then for each new
/// vertex the k-clique it attaches to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreationOrder {
    k: usize,
    base: Vec<VariableId>,
    steps: Vec<(Vec<VariableId>, VariableId)>,
}

impl CreationOrder {
    /// Validates the recipe by building the k-tree it describes.
    pub fn new(
        k: usize,
        base: Vec<VariableId>,
        steps: Vec<(Vec<VariableId>, VariableId)>,
    ) -> Result<Self> {
        let order = Self { k, base, steps };
        build_from_order(&order)?;
        Ok(order)
    }

    pub(crate) fn new_unchecked(
        k: usize,
        base: Vec<VariableId>,
        steps: Vec<(Vec<VariableId>, VariableId)>,
    ) -> Self {
        Self { k, base, steps }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.k + self.steps.len()
    }

    /// Base clique, sorted ascending.
    pub fn base(&self) -> &[VariableId] {
        &self.base
    }

    pub fn steps(&self) -> &[(Vec<VariableId>, VariableId)] {
        &self.steps
    }
}

/// A graph satisfying the k-tree property, with its (k+1)-cliques cached in
/// attachment order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KTree {
    n: usize,
    k: usize,
    edges: BTreeSet<Edge>,
    cliques: Vec<Vec<VariableId>>,
}

impl KTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, u: u16, v: u16) -> bool {
        self.edges.contains(&edge(u, v))
    }

    /// The (k+1)-cliques, one per creation step; empty when n == k.
    pub fn cliques(&self) -> &[Vec<VariableId>] {
        &self.cliques
    }

    /// Lexicographically sorted edge list: the canonical identity of a k-tree.
    pub fn canonical_edges(&self) -> Vec<Edge> {
        self.edges.iter().copied().collect()
    }

    /// DOT rendering; backbone edges are drawn bold.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph ktree {\n  node [shape=circle];\n");
        for v in 1..=self.n as u16 {
            out.push_str(&format!("  X{v};\n"));
        }
        for &(u, v) in &self.edges {
            if v == u + 1 {
                out.push_str(&format!("  X{u} -- X{v} [style=bold];\n"));
            } else {
                out.push_str(&format!("  X{u} -- X{v};\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Acyclic orientation induced by a creation order: `parents[v-1]` is the
/// parent set of variable v.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    parents: Vec<Vec<VariableId>>,
}

impl Orientation {
    pub fn parents(&self, v: VariableId) -> &[VariableId] {
        &self.parents[v.idx()]
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    /// The unique vertex with an empty parent set.
    pub fn root(&self) -> VariableId {
        let i = self
            .parents
            .iter()
            .position(|p| p.is_empty())
            .expect("an induced orientation has a root");
        VariableId(i as u16 + 1)
    }
}

/// Rooted tree over the (k+1)-cliques of a k-tree; the inference DP runs on it.
#[derive(Debug, Clone)]
pub struct CliqueTree {
    cliques: Vec<Vec<VariableId>>,
    step_vertex: Vec<VariableId>,
    parent: Vec<Option<usize>>,
}

impl CliqueTree {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn clique(&self, i: usize) -> &[VariableId] {
        &self.cliques[i]
    }

    /// The vertex whose attachment created clique i.
    pub fn step_vertex(&self, i: usize) -> VariableId {
        self.step_vertex[i]
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Children grouped by parent, in clique order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.cliques.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(i);
            }
        }
        ch
    }

    /// Separator between clique i and its parent.
    pub fn separator(&self, i: usize) -> Vec<VariableId> {
        match self.parent[i] {
            None => Vec::new(),
            Some(p) => self.cliques[i]
                .iter()
                .filter(|v| self.cliques[p].contains(v))
                .copied()
                .collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cliquetree {\n  node [shape=box];\n");
        for (i, c) in self.cliques.iter().enumerate() {
            let label: Vec<String> = c.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("  c{i} [label=\"{{{}}}\"];\n", label.join(",")));
        }
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                out.push_str(&format!("  c{i} -> c{p};\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the k-tree described by a creation order, verifying every step.
pub fn build_from_order(order: &CreationOrder) -> Result<KTree> {
    let k = order.k;
    if k < 1 {
        return Err(MkError::InvalidOrder("k must be >= 1".into()));
    }
    if order.base.len() != k {
        return Err(MkError::InvalidOrder(format!(
            "base has {} vertices, expected k = {k}",
            order.base.len()
        )));
    }
    let n = order.n();
    let mut present: BTreeSet<VariableId> = order.base.iter().copied().collect();
    if present.len() != k {
        return Err(MkError::InvalidOrder("base vertices repeat".into()));
    }
    let mut sorted_base = order.base.to_vec();
    sorted_base.sort_unstable();
    if sorted_base != order.base {
        return Err(MkError::InvalidOrder("base must be sorted ascending".into()));
    }
    let mut edges: BTreeSet<Edge> = BTreeSet::new();
    for (i, &u) in order.base.iter().enumerate() {
        for &v in &order.base[i + 1..] {
            edges.insert(edge(u.0, v.0));
        }
    }
    let mut cliques = Vec::with_capacity(order.steps.len());
    for (clique, x) in &order.steps {
        if present.contains(x) {
            return Err(MkError::InvalidOrder(format!("{x} attached twice")));
        }
        if clique.len() != k {
            return Err(MkError::InvalidOrder(format!(
                "attachment clique for {x} has {} vertices, expected {k}",
                clique.len()
            )));
        }
        for &c in clique {
            if !present.contains(&c) {
                return Err(MkError::InvalidOrder(format!(
                    "attachment clique for {x} references absent vertex {c}"
                )));
            }
        }
        for (i, &u) in clique.iter().enumerate() {
            for &v in &clique[i + 1..] {
                if !edges.contains(&edge(u.0, v.0)) {
                    return Err(MkError::InvalidOrder(format!(
                        "attachment set for {x} is not a clique: {u}-{v} missing"
                    )));
                }
            }
        }
        for &c in clique {
            edges.insert(edge(c.0, x.0));
        }
        let mut full: Vec<VariableId> = clique.clone();
        full.push(*x);
        full.sort_unstable();
        cliques.push(full);
        present.insert(*x);
    }
    // Vertices must be exactly 1..n for the backbone ordering to make sense.
    let expect: BTreeSet<VariableId> = (1..=n as u16).map(VariableId).collect();
    if present != expect {
        return Err(MkError::InvalidOrder(format!(
            "vertex labels must be exactly 1..{n}"
        )));
    }
    debug_assert_eq!(edges.len(), ktree_edge_count(n, k));
    Ok(KTree { n, k, edges, cliques })
}

/// Orientation induced by a creation order: base edges point low-to-high
/// index, step edges point from the attachment clique into the new vertex.
pub fn orient(order: &CreationOrder) -> Orientation {
    let n = order.n();
    let mut parents = vec![Vec::new(); n];
    for (i, &v) in order.base.iter().enumerate() {
        parents[v.idx()] = order.base[..i].to_vec();
    }
    for (clique, x) in &order.steps {
        let mut p = clique.clone();
        p.sort_unstable();
        parents[x.idx()] = p;
    }
    Orientation { parents }
}

/// Recovers a creation order from an edge set, or reports why none exists.
///
/// Peels the lowest-indexed vertex of degree k whose neighborhood is a clique;
/// reversing the peel gives the order, so the result is deterministic.
pub fn validate_ktree(edges: &BTreeSet<Edge>, n: usize, k: usize) -> Result<CreationOrder> {
    validate_ktree_by(edges, n, k, |eligible| eligible[0])
}

/// Like [`validate_ktree`] but breaking ties among eligible simplicial
/// vertices at random; distinct seeds explore distinct creation orders of the
/// same k-tree.
pub fn validate_ktree_seeded<R: Rng>(
    edges: &BTreeSet<Edge>,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<CreationOrder> {
    validate_ktree_by(edges, n, k, |eligible| {
        eligible[rng.gen_range(0..eligible.len())]
    })
}

fn validate_ktree_by<F>(edges: &BTreeSet<Edge>, n: usize, k: usize, mut pick: F) -> Result<CreationOrder>
where
    F: FnMut(&[u16]) -> u16,
{
    if k < 1 || n < k {
        return Err(MkError::NotAKTree(format!("n = {n} < k"), k));
    }
    for &(u, v) in edges {
        if u == v || u < 1 || v as usize > n {
            return Err(MkError::NotAKTree(format!("bad edge ({u},{v})"), k));
        }
    }
    if edges.len() != ktree_edge_count(n, k) {
        return Err(MkError::NotAKTree(
            format!(
                "edge count {} differs from k(k-1)/2 + k(n-k) = {}",
                edges.len(),
                ktree_edge_count(n, k)
            ),
            k,
        ));
    }
    let mut adj: Vec<BTreeSet<u16>> = vec![BTreeSet::new(); n + 1];
    for &(u, v) in edges {
        adj[u as usize].insert(v);
        adj[v as usize].insert(u);
    }
    let mut alive: BTreeSet<u16> = (1..=n as u16).collect();
    let mut removed: Vec<(Vec<VariableId>, VariableId)> = Vec::new();
    while alive.len() > k {
        let eligible: Vec<u16> = alive
            .iter()
            .copied()
            .filter(|&v| {
                let nb = &adj[v as usize];
                nb.len() == k
                    && nb.iter().all(|&a| {
                        nb.iter()
                            .all(|&b| a >= b || edges.contains(&edge(a, b)))
                    })
            })
            .collect();
        if eligible.is_empty() {
            return Err(MkError::NotAKTree(
                "no simplicial vertex of degree k remains".into(),
                k,
            ));
        }
        let v = pick(&eligible);
        let clique: Vec<VariableId> = adj[v as usize].iter().map(|&u| VariableId(u)).collect();
        removed.push((clique, VariableId(v)));
        let nb: Vec<u16> = adj[v as usize].iter().copied().collect();
        for u in nb {
            adj[u as usize].remove(&v);
        }
        adj[v as usize].clear();
        alive.remove(&v);
    }
    // The survivors must be the base clique.
    let base: Vec<VariableId> = alive.iter().map(|&v| VariableId(v)).collect();
    for (i, &u) in base.iter().enumerate() {
        for &v in &base[i + 1..] {
            if !edges.contains(&edge(u.0, v.0)) {
                return Err(MkError::NotAKTree("residual base is not a clique".into(), k));
            }
        }
    }
    removed.reverse();
    let order = CreationOrder::new_unchecked(k, base, removed);
    debug_assert_eq!(build_from_order(&order)?.edges, *edges);
    Ok(order)
}

/// Clique tree per the prefix relation of the creation order: each clique
/// points to the latest earlier clique containing its attachment k-clique.
pub fn tree_decomposition(order: &CreationOrder) -> Result<CliqueTree> {
    if order.steps.is_empty() {
        return Err(MkError::Infeasible(format!(
            "n = k = {} admits no (k+1)-clique",
            order.k
        )));
    }
    let tree = build_from_order(order)?;
    let cliques = tree.cliques.clone();
    let step_vertex: Vec<VariableId> = order.steps.iter().map(|(_, x)| *x).collect();
    let mut parent = vec![None; cliques.len()];
    for i in 1..cliques.len() {
        let attach = &order.steps[i].0;
        let j = (0..i)
            .rev()
            .find(|&j| attach.iter().all(|c| cliques[j].contains(c)))
            .ok_or_else(|| {
                MkError::InvalidOrder(format!(
                    "attachment clique of step {i} is in no earlier (k+1)-clique"
                ))
            })?;
        parent[i] = Some(j);
    }
    Ok(CliqueTree {
        cliques,
        step_vertex,
        parent,
    })
}

/// True iff the tree contains every backbone edge (i, i+1).
pub fn is_backbone_ktree(t: &KTree) -> bool {
    (1..t.n as u16).all(|i| t.has_edge(i, i + 1))
}

/// Backbone edges of [n].
pub fn backbone_edges(n: usize) -> Vec<Edge> {
    (1..n as u16).map(|i| (i, i + 1)).collect()
}

/// The k-tree of a k-th order Markov chain: vertex i attaches to the k
/// vertices immediately before it.
pub fn markov_chain_ktree(n: usize, k: usize) -> Result<KTree> {
    if n < k {
        return Err(MkError::Infeasible(format!("n = {n} < k = {k}")));
    }
    let order = markov_chain_order(n, k);
    build_from_order(&order)
}

/// Creation order of the k-th order Markov chain k-tree.
pub fn markov_chain_order(n: usize, k: usize) -> CreationOrder {
    let base: Vec<VariableId> = (1..=k as u16).map(VariableId).collect();
    let steps = (k as u16 + 1..=n as u16)
        .map(|i| ((i - k as u16..i).map(VariableId).collect(), VariableId(i)))
        .collect();
    CreationOrder::new_unchecked(k, base, steps)
}

/// Default cap on exhaustive enumeration.
pub const DEFAULT_ORACLE_CAP: usize = 9;

/// Every distinct labeled k-tree on 1..n whose edge set contains
/// `must_contain`, each exactly once, sorted by canonical edge list.
///
/// Walks creation orders but deduplicates *intermediate* graphs: two orders
/// reaching the same partial k-tree reach the same completions, so each
/// partial graph is expanded once.
pub fn enumerate_all_ktrees(
    n: usize,
    k: usize,
    must_contain: &[Edge],
    cap: usize,
) -> Result<Vec<KTree>> {
    if n > cap || n > 16 {
        return Err(MkError::OracleCap { n, cap: cap.min(16) });
    }
    if n < k {
        return Err(MkError::Infeasible(format!("n = {n} < k = {k}")));
    }
    let pair_idx = |u: u16, v: u16| -> u32 {
        let (u, v) = (u as u32 - 1, v as u32 - 1);
        debug_assert!(u < v);
        v * (v - 1) / 2 + u
    };
    let constraint: Vec<Edge> = must_contain.iter().map(|&(u, v)| edge(u, v)).collect();
    let mut stack: Vec<(u32, u128)> = Vec::new();
    let mut visited: HashSet<(u32, u128)> = HashSet::new();
    // All base k-cliques.
    for base in k_subsets(n as u16, k) {
        let mut added = 0u32;
        let mut edges = 0u128;
        for &v in &base {
            added |= 1 << (v - 1);
        }
        for (i, &u) in base.iter().enumerate() {
            for &v in &base[i + 1..] {
                edges |= 1u128 << pair_idx(u, v);
            }
        }
        if visited.insert((added, edges)) {
            stack.push((added, edges));
        }
    }
    let mut finals: BTreeSet<Vec<Edge>> = BTreeSet::new();
    let full_mask = (1u32 << n) - 1;
    while let Some((added, edges)) = stack.pop() {
        // Dead if some required edge joins two added vertices but is absent.
        let dead = constraint.iter().any(|&(u, v)| {
            added & (1 << (u - 1)) != 0
                && added & (1 << (v - 1)) != 0
                && edges & (1u128 << pair_idx(u, v)) == 0
        });
        if dead {
            continue;
        }
        if added == full_mask {
            let list: Vec<Edge> = (1..=n as u16)
                .flat_map(|u| (u + 1..=n as u16).map(move |v| (u, v)))
                .filter(|&(u, v)| edges & (1u128 << pair_idx(u, v)) != 0)
                .collect();
            finals.insert(list);
            continue;
        }
        let present: Vec<u16> = (1..=n as u16).filter(|v| added & (1 << (v - 1)) != 0).collect();
        for clique in k_subsets_of(&present, k) {
            let is_clique = clique.iter().enumerate().all(|(i, &u)| {
                clique[i + 1..]
                    .iter()
                    .all(|&v| edges & (1u128 << pair_idx(u, v)) != 0)
            });
            if !is_clique {
                continue;
            }
            for x in 1..=n as u16 {
                if added & (1 << (x - 1)) != 0 {
                    continue;
                }
                let mut new_edges = edges;
                for &c in &clique {
                    new_edges |= 1u128 << pair_idx(c.min(x), c.max(x));
                }
                let state = (added | 1 << (x - 1), new_edges);
                if visited.insert(state) {
                    stack.push(state);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(finals.len());
    for list in finals {
        let set: BTreeSet<Edge> = list.into_iter().collect();
        let order = validate_ktree(&set, n, k)?;
        out.push(build_from_order(&order)?);
    }
    Ok(out)
}

/// All k-element subsets of 1..=n, ascending.
pub(crate) fn k_subsets(n: u16, k: usize) -> Vec<Vec<u16>> {
    k_subsets_of(&(1..=n).collect::<Vec<_>>(), k)
}

pub(crate) fn k_subsets_of(items: &[u16], k: usize) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[u16], k: usize, start: usize, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}
