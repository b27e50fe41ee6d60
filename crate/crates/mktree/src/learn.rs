//! Topology learners: the Chow-Liu maximum spanning tree (k = 1), an
//! exhaustive maximum-spanning-k-tree oracle for desk-scale instances, and the
//! backbone-constrained dynamic program that makes the k > 1 case tractable.
//!
//! All three maximize the same objective: the sum of `f(X, parents(X))` over
//! the acyclic orientation induced by a creation order of the output tree.
//! With `f` the vertex-parent-set mutual information this is the delta score,
//! so the winner is the minimum-divergence topology.

use crate::error::{MkError, Result};
use crate::infotheory::mutual_information;
use crate::ktree::{
    build_from_order, enumerate_all_ktrees, orient, validate_ktree, CreationOrder, Edge, KTree,
    Orientation,
};
use crate::model::{fit, DataSource, MarkovKTree};
use crate::tables::VariableId;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// A vertex-parent-set score. `parents` is always passed sorted ascending and
/// never contains `x`; implementations must be pure.
pub trait Score {
    fn eval(&self, x: VariableId, parents: &[VariableId]) -> f64;
}

/// Mutual-information score f(x, S) = I(x; S), memoized per (x, S).
pub struct MiScore<'a> {
    dist: DataSource<'a>,
    cache: Mutex<HashMap<(u16, Vec<u16>), f64>>,
}

impl<'a> MiScore<'a> {
    pub fn new(dist: DataSource<'a>) -> Self {
        Self {
            dist,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl Score for MiScore<'_> {
    fn eval(&self, x: VariableId, parents: &[VariableId]) -> f64 {
        if parents.is_empty() {
            return 0.0;
        }
        let key = (x.0, parents.iter().map(|p| p.0).collect::<Vec<_>>());
        if let Some(&v) = self.cache.lock().unwrap().get(&key) {
            return v;
        }
        let mut scope: Vec<VariableId> = parents.to_vec();
        scope.push(x);
        scope.sort_unstable();
        let value = self
            .dist
            .marginal(&scope)
            .and_then(|m| mutual_information(&m, x, parents))
            .map(|b| b.value())
            .expect("MI score query outside the data's variables");
        self.cache.lock().unwrap().insert(key, value);
        value
    }
}

/// Score backed by an explicit lookup table; entries absent from the table
/// score zero.
#[derive(Debug, Clone, Default)]
pub struct TableScore {
    entries: HashMap<(u16, Vec<u16>), f64>,
}

impl TableScore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: u16, mut parents: Vec<u16>, f: f64) {
        parents.sort_unstable();
        self.entries.insert((x, parents), f);
    }

    pub fn from_json(json: &ScoreTableJson) -> Result<Self> {
        let mut table = Self::new();
        for e in &json.entries {
            if e.x == 0 || e.x as usize > json.n {
                return Err(MkError::UnknownVariable(e.x));
            }
            if e.parents.iter().any(|&p| p == 0 || p as usize > json.n) || e.parents.contains(&e.x)
            {
                return Err(MkError::Parse(format!(
                    "bad parent set {:?} for x = {}",
                    e.parents, e.x
                )));
            }
            table.insert(e.x, e.parents.clone(), e.f);
        }
        Ok(table)
    }
}

impl Score for TableScore {
    fn eval(&self, x: VariableId, parents: &[VariableId]) -> f64 {
        let key = (x.0, parents.iter().map(|p| p.0).collect::<Vec<_>>());
        self.entries.get(&key).copied().unwrap_or(0.0)
    }
}

/// Score-table file format for reproducible oracle/DP comparisons.
#[derive(Debug, Serialize, Deserialize)]
pub struct ScoreTableJson {
    pub n: usize,
    pub k: usize,
    pub entries: Vec<ScoreEntryJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoreEntryJson {
    pub x: u16,
    pub parents: Vec<u16>,
    pub f: f64,
}

/// Additive edge-weight score f(x, S) = sum of w(x, s) over s in S.
#[derive(Debug, Clone)]
pub struct EdgeWeightScore {
    w: Vec<Vec<f64>>,
}

impl EdgeWeightScore {
    /// `w` must be a symmetric square matrix with zero diagonal.
    pub fn new(w: Vec<Vec<f64>>) -> Result<Self> {
        let n = w.len();
        for (i, row) in w.iter().enumerate() {
            if row.len() != n {
                return Err(MkError::Parse("weight matrix is not square".into()));
            }
            if row[i] != 0.0 {
                return Err(MkError::Parse("weight matrix diagonal must be zero".into()));
            }
            for j in 0..n {
                if (w[i][j] - w[j][i]).abs() > 1e-12 {
                    return Err(MkError::Parse("weight matrix is not symmetric".into()));
                }
            }
        }
        Ok(Self { w })
    }
}

impl Score for EdgeWeightScore {
    fn eval(&self, x: VariableId, parents: &[VariableId]) -> f64 {
        parents.iter().map(|p| self.w[x.idx()][p.idx()]).sum()
    }
}

/// A score function with a closure evaluator; handy for tests.
pub struct FnScore<F: Fn(VariableId, &[VariableId]) -> f64>(pub F);

impl<F: Fn(VariableId, &[VariableId]) -> f64> Score for FnScore<F> {
    fn eval(&self, x: VariableId, parents: &[VariableId]) -> f64 {
        (self.0)(x, parents)
    }
}

/// The MI score over a data source, per the learner's contract.
pub fn mi_score_adapter<'a>(dist: DataSource<'a>) -> MiScore<'a> {
    MiScore::new(dist)
}

/// Search statistics of a learner run.
#[derive(Debug, Clone, Copy)]
pub struct LearnStats {
    pub states_expanded: usize,
    pub wall: Duration,
}

/// A learned topology: the tree, a creation order achieving the score, and
/// the score itself.
#[derive(Debug, Clone)]
pub struct LearnResult {
    pub tree: KTree,
    pub order: CreationOrder,
    pub score: f64,
    pub stats: LearnStats,
}

/// Total score of an orientation: sum of f(v, parents(v)) over vertices with
/// nonempty parent sets.
pub fn orientation_score(o: &Orientation, f: &dyn Score) -> f64 {
    let mut total = 0.0;
    for i in 1..=o.n() as u16 {
        let v = VariableId(i);
        let parents = o.parents(v);
        if !parents.is_empty() {
            total += f.eval(v, parents);
        }
    }
    total
}

/// Maximum-weight spanning tree over pairwise mutual information: the k = 1
/// learner. `pairwise_mi` is a symmetric matrix with zero diagonal, indexed
/// from zero (entry [i][j] scores the edge between X_{i+1} and X_{j+1}).
pub fn chow_liu(pairwise_mi: &[Vec<f64>]) -> Result<LearnResult> {
    let start = Instant::now();
    let n = pairwise_mi.len();
    if n < 2 {
        return Err(MkError::Infeasible("need at least 2 variables".into()));
    }
    let weights = EdgeWeightScore::new(pairwise_mi.to_vec())?;
    let mut candidates: Vec<(f64, u16, u16)> = Vec::new();
    for u in 0..n as u16 {
        for v in u + 1..n as u16 {
            candidates.push((pairwise_mi[u as usize][v as usize], u + 1, v + 1));
        }
    }
    // Heaviest first; ties resolved toward the lexicographically smallest
    // edge so the output is reproducible.
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut uf: Vec<u16> = (0..n as u16).collect();
    fn find(uf: &mut Vec<u16>, mut a: u16) -> u16 {
        while uf[a as usize] != a {
            uf[a as usize] = uf[uf[a as usize] as usize];
            a = uf[a as usize];
        }
        a
    }
    let mut edges = std::collections::BTreeSet::new();
    let mut score = 0.0;
    for (w, u, v) in candidates {
        let (ra, rb) = (find(&mut uf, u - 1), find(&mut uf, v - 1));
        if ra != rb {
            uf[ra as usize] = rb;
            edges.insert((u, v));
            score += w;
        }
    }
    let order = validate_ktree(&edges, n, 1)?;
    let tree = build_from_order(&order)?;
    debug_assert!((orientation_score(&orient(&order), &weights) - score).abs() < 1e-9);
    Ok(LearnResult {
        tree,
        order,
        score,
        stats: LearnStats {
            states_expanded: n * (n - 1) / 2,
            wall: start.elapsed(),
        },
    })
}

/// Exact maximizer of the score over every spanning k-tree containing
/// `retain`, by exhaustive enumeration; the golden oracle for the dynamic
/// program. Ties break toward the lexicographically smallest canonical edge
/// list.
pub fn brute_force_mskt(
    n: usize,
    k: usize,
    f: &dyn Score,
    retain: &[Edge],
    cap: usize,
) -> Result<LearnResult> {
    let start = Instant::now();
    let trees = enumerate_all_ktrees(n, k, retain, cap)?;
    if trees.is_empty() {
        return Err(MkError::Infeasible(format!(
            "no {k}-tree on {n} vertices contains the required edges"
        )));
    }
    let mut best: Option<(f64, KTree, CreationOrder)> = None;
    let mut states = 0usize;
    for t in trees {
        let (score, order) = best_orientation(&t, f, &mut states);
        if best.as_ref().map_or(true, |(s, _, _)| score > *s) {
            best = Some((score, t, order));
        }
    }
    let (score, tree, order) = best.unwrap();
    Ok(LearnResult {
        tree,
        order,
        score,
        stats: LearnStats {
            states_expanded: states,
            wall: start.elapsed(),
        },
    })
}

/// Best score of a single k-tree over all of its creation orders, with one
/// order achieving it. Dynamic program over subsets: peel a simplicial vertex
/// at a time, collecting f(v, neighbors) per peel and the base-clique prefix
/// terms at the bottom.
fn best_orientation(t: &KTree, f: &dyn Score, states: &mut usize) -> (f64, CreationOrder) {
    let n = t.n();
    let k = t.k();
    assert!(n <= 16, "orientation DP is for oracle-scale trees");
    let mut adj = vec![0u32; n];
    for &(u, v) in t.edges() {
        adj[(u - 1) as usize] |= 1 << (v - 1);
        adj[(v - 1) as usize] |= 1 << (u - 1);
    }
    // memo: subset of still-present vertices -> (best score, peeled vertex).
    let mut memo: HashMap<u32, (f64, i8)> = HashMap::new();
    fn go(
        s: u32,
        k: usize,
        adj: &[u32],
        f: &dyn Score,
        memo: &mut HashMap<u32, (f64, i8)>,
        states: &mut usize,
    ) -> f64 {
        if let Some(&(v, _)) = memo.get(&s) {
            return v;
        }
        *states += 1;
        let mut best = f64::NEG_INFINITY;
        let mut pick: i8 = -1;
        if s.count_ones() as usize == k {
            // Base clique: orient by index, score the sorted prefixes.
            let members: Vec<VariableId> = (0..adj.len())
                .filter(|i| s >> i & 1 == 1)
                .map(|i| VariableId(i as u16 + 1))
                .collect();
            best = (1..members.len())
                .map(|i| f.eval(members[i], &members[..i]))
                .sum();
        } else {
            for v in 0..adj.len() {
                if s >> v & 1 == 0 {
                    continue;
                }
                let nb = adj[v] & s;
                if nb.count_ones() as usize != k || !is_clique(nb, adj) {
                    continue;
                }
                let parents: Vec<VariableId> = (0..adj.len())
                    .filter(|i| nb >> i & 1 == 1)
                    .map(|i| VariableId(i as u16 + 1))
                    .collect();
                let val =
                    go(s & !(1 << v), k, adj, f, memo, states) + f.eval(VariableId(v as u16 + 1), &parents);
                if val > best {
                    best = val;
                    pick = v as i8;
                }
            }
        }
        memo.insert(s, (best, pick));
        best
    }
    fn is_clique(nb: u32, adj: &[u32]) -> bool {
        (0..adj.len()).all(|u| nb >> u & 1 == 0 || adj[u] & nb == nb & !(1 << u))
    }
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let score = go(full, k, &adj, f, &mut memo, states);
    // Replay the memoized picks to recover the creation order.
    let mut s = full;
    let mut peeled: Vec<(Vec<VariableId>, VariableId)> = Vec::new();
    while s.count_ones() as usize > k {
        let (_, pick) = memo[&s];
        let v = pick as usize;
        let nb = adj[v] & s;
        let clique: Vec<VariableId> = (0..n)
            .filter(|i| nb >> i & 1 == 1)
            .map(|i| VariableId(i as u16 + 1))
            .collect();
        peeled.push((clique, VariableId(v as u16 + 1)));
        s &= !(1 << v);
    }
    let base: Vec<VariableId> = (0..n)
        .filter(|i| s >> i & 1 == 1)
        .map(|i| VariableId(i as u16 + 1))
        .collect();
    peeled.reverse();
    let order = CreationOrder::new(k, base, peeled).expect("peel order rebuilds the tree");
    (score, order)
}

const CHOICE_P_BITS: u32 = 3;
const CHOICE_Y_BITS: u32 = 3;
const CHOICE_T_BITS: u32 = 7;

/// The backbone-constrained dynamic program.
///
/// A state is a (k+1)-clique `kappa` together with a bit per interval that
/// `kappa` cuts the backbone 1..n into; set bits mark the intervals whose
/// vertices this subproblem must still place. A state expands by choosing a
/// permitted interval, a vertex `x` inside it, and a clique vertex `y` that is
/// not a boundary of that interval: `x` joins with parent set `kappa \ {y}`,
/// the two remainders of the interval pass to the swapped clique
/// `kappa' = kappa + x - y`, any other permitted interval not bounded by `y`
/// may pass along with them, and everything else stays behind with `kappa`.
pub fn backbone_dp(n: usize, k: usize, f: &dyn Score) -> Result<LearnResult> {
    let start = Instant::now();
    if k == 0 || n <= k {
        return Err(MkError::Infeasible(format!(
            "no ({}+1)-clique exists for n = {n}, k = {k}",
            k
        )));
    }
    if k + 2 > CHOICE_T_BITS as usize {
        return Err(MkError::Infeasible(format!("k = {k} exceeds the supported range")));
    }
    let mut dp = BackboneDp::new(n, k, f);
    let mut best: Option<(f64, Vec<u16>, u16, u32)> = None;
    let mut kappa: Vec<u16> = (1..=k as u16 + 1).collect();
    loop {
        let mask = dp.full_mask(&kappa);
        let m = dp.solve(&kappa, dp.rank(&kappa), mask);
        if m > f64::NEG_INFINITY {
            // Anchor: pick which clique vertex is the first step vertex; the
            // other k form the base clique, scored by sorted prefix.
            for (i, &x) in kappa.iter().enumerate() {
                let base: Vec<VariableId> = kappa
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &v)| VariableId(v))
                    .collect();
                let mut anchor = f.eval(VariableId(x), &base);
                for j in 1..base.len() {
                    anchor += f.eval(base[j], &base[..j]);
                }
                let total = anchor + m;
                if best.as_ref().map_or(true, |(s, _, _, _)| total > *s) {
                    best = Some((total, kappa.clone(), x, mask));
                }
            }
        }
        if !next_subset(&mut kappa, n) {
            break;
        }
    }
    let (score, kappa, anchor_x, mask) = best.ok_or_else(|| MkError::NoRetainingKTree { k })?;
    let base: Vec<VariableId> = kappa
        .iter()
        .filter(|&&v| v != anchor_x)
        .map(|&v| VariableId(v))
        .collect();
    let mut steps = vec![(base.clone(), VariableId(anchor_x))];
    dp.emit(&kappa, mask, &mut steps);
    let order = CreationOrder::new(k, base, steps)?;
    let tree = build_from_order(&order)?;
    Ok(LearnResult {
        tree,
        order,
        score,
        stats: LearnStats {
            states_expanded: dp.states,
            wall: start.elapsed(),
        },
    })
}

/// Advances a sorted subset of 1..=n to its lexicographic successor.
fn next_subset(s: &mut [u16], n: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if (s[i] as usize) < n - (k - 1 - i) {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One expansion's derived geometry, shared by the solver and the
/// reconstruction pass.
struct Expansion {
    /// kappa' = kappa + x - y, sorted.
    swapped: Vec<u16>,
    /// Parent set kappa \ {y}, sorted.
    parents: Vec<u16>,
    /// Bits of kappa'-intervals forced to the swapped side (the interval
    /// remainders around x).
    beta_forced: u32,
    /// alpha-bits eligible to move to the swapped side.
    eligible: u32,
    /// kappa'-interval bit for each eligible kappa-interval bit.
    map_bit: [u8; CHOICE_T_BITS as usize],
    /// alpha minus the chosen interval's bit.
    gamma_base: u32,
}

struct BackboneDp {
    n: usize,
    k: usize,
    mask_width: usize,
    binom: Vec<Vec<usize>>,
    /// NaN = not yet computed; -inf = no complete derivation exists.
    value: Vec<f64>,
    choice: Vec<u32>,
    /// Flat cache of f(x, S) over all k-subsets S and x outside S.
    score_cache: Vec<f64>,
    ck: usize,
    states: usize,
}

impl BackboneDp {
    fn new(n: usize, k: usize, f: &dyn Score) -> Self {
        let mut binom = vec![vec![0usize; k + 3]; n + 2];
        for i in 0..=n + 1 {
            binom[i][0] = 1;
            for j in 1..=(k + 2).min(i) {
                binom[i][j] = binom[i - 1][j - 1] + binom[i - 1][j];
            }
        }
        let states = binom[n][k + 1];
        let mask_width = 1 << (k + 2);
        let ck = binom[n][k];
        let mut score_cache = vec![0.0; n * ck];
        let mut subset: Vec<u16> = (1..=k as u16).collect();
        let mut vars = [VariableId(0); 8];
        loop {
            let r = subset
                .iter()
                .enumerate()
                .map(|(i, &v)| binom[v as usize - 1][i + 1])
                .sum::<usize>();
            for (i, &v) in subset.iter().enumerate() {
                vars[i] = VariableId(v);
            }
            for x in 1..=n as u16 {
                if !subset.contains(&x) {
                    score_cache[(x as usize - 1) * ck + r] = f.eval(VariableId(x), &vars[..k]);
                }
            }
            if !next_subset(&mut subset, n) {
                break;
            }
        }
        Self {
            n,
            k,
            mask_width,
            binom,
            value: vec![f64::NAN; states * mask_width],
            choice: vec![0; states * mask_width],
            score_cache,
            ck,
            states: 0,
        }
    }

    fn rank(&self, clique: &[u16]) -> usize {
        clique
            .iter()
            .enumerate()
            .map(|(i, &v)| self.binom[v as usize - 1][i + 1])
            .sum()
    }

    fn rank_k(&self, set: &[u16]) -> usize {
        set.iter()
            .enumerate()
            .map(|(i, &v)| self.binom[v as usize - 1][i + 1])
            .sum()
    }

    fn cached_score(&self, x: u16, parents: &[u16]) -> f64 {
        self.score_cache[(x as usize - 1) * self.ck + self.rank_k(parents)]
    }

    /// Interval r of `clique`: the backbone vertices strictly between
    /// consecutive clique members (with virtual boundaries 0 and n+1).
    fn interval(&self, clique: &[u16], r: usize) -> (u16, u16) {
        let lo = if r == 0 { 1 } else { clique[r - 1] + 1 };
        let hi = if r == self.k + 1 {
            self.n as u16
        } else {
            clique[r] - 1
        };
        (lo, hi)
    }

    fn full_mask(&self, clique: &[u16]) -> u32 {
        let mut mask = 0;
        for r in 0..=self.k + 1 {
            let (lo, hi) = self.interval(clique, r);
            if lo <= hi {
                mask |= 1 << r;
            }
        }
        mask
    }

    fn expansion(&self, clique: &[u16], alpha: u32, p: usize, x: u16, y_pos: usize) -> Expansion {
        let y = clique[y_pos];
        let mut parents: Vec<u16> = Vec::with_capacity(self.k);
        parents.extend(clique.iter().copied().filter(|&v| v != y));
        let mut swapped = parents.clone();
        let at = swapped.partition_point(|&v| v < x);
        swapped.insert(at, x);
        let (lo, hi) = self.interval(clique, p);
        let run_of = |upper: u16| swapped.partition_point(|&v| v < upper) as u32;
        let mut beta_forced = 0u32;
        if x > lo {
            beta_forced |= 1 << run_of(x);
        }
        if x < hi {
            beta_forced |= 1 << run_of(hi + 1);
        }
        let eligible =
            alpha & !(1 << p) & !(1 << y_pos) & !(1 << (y_pos + 1)) & ((1 << (self.k + 2)) - 1);
        let mut map_bit = [0u8; CHOICE_T_BITS as usize];
        for q in 0..=self.k + 1 {
            if eligible >> q & 1 == 1 {
                let upper = if q == self.k + 1 {
                    self.n as u16 + 1
                } else {
                    clique[q]
                };
                map_bit[q] = run_of(upper) as u8;
            }
        }
        Expansion {
            swapped,
            parents,
            beta_forced,
            eligible,
            map_bit,
            gamma_base: alpha & !(1 << p),
        }
    }

    fn solve(&mut self, clique: &[u16], rank: usize, alpha: u32) -> f64 {
        if alpha == 0 {
            return 0.0;
        }
        let idx = rank * self.mask_width + alpha as usize;
        let cached = self.value[idx];
        if !cached.is_nan() {
            return cached;
        }
        self.states += 1;
        // Claim the slot first: the recursion never revisits (clique, alpha)
        // with fewer unplaced vertices, so -inf here can only be read by a
        // cycle-free path and is overwritten before anyone else reads it.
        self.value[idx] = f64::NEG_INFINITY;
        let mut best = f64::NEG_INFINITY;
        let mut best_choice = 0u32;
        for p in 0..=self.k + 1 {
            if alpha >> p & 1 == 0 {
                continue;
            }
            let (lo, hi) = self.interval(clique, p);
            for x in lo..=hi {
                for y_pos in 0..=self.k {
                    // y may not be a boundary of the chosen interval.
                    if (p > 0 && y_pos == p - 1) || y_pos == p {
                        continue;
                    }
                    let e = self.expansion(clique, alpha, p, x, y_pos);
                    let fterm = self.cached_score(x, &e.parents);
                    let swapped_rank = self.rank(&e.swapped);
                    // Every subset of the eligible intervals may ride along
                    // to the swapped clique.
                    let mut t = e.eligible;
                    loop {
                        let mut beta = e.beta_forced;
                        let mut q_bits = t;
                        while q_bits != 0 {
                            let q = q_bits.trailing_zeros() as usize;
                            beta |= 1 << e.map_bit[q];
                            q_bits &= q_bits - 1;
                        }
                        let gamma = e.gamma_base & !t;
                        let val = fterm
                            + self.solve(&e.swapped, swapped_rank, beta)
                            + self.solve(clique, rank, gamma);
                        if val > best {
                            best = val;
                            best_choice = (p as u32)
                                | ((y_pos as u32) << CHOICE_P_BITS)
                                | (t << (CHOICE_P_BITS + CHOICE_Y_BITS))
                                | ((x as u32) << (CHOICE_P_BITS + CHOICE_Y_BITS + CHOICE_T_BITS));
                        }
                        if t == 0 {
                            break;
                        }
                        t = (t - 1) & e.eligible;
                    }
                }
            }
        }
        self.value[idx] = best;
        self.choice[idx] = best_choice;
        best
    }

    /// Replays the recorded choices, appending (parent clique, x) steps in an
    /// order where every parent is already placed.
    fn emit(&self, clique: &[u16], alpha: u32, steps: &mut Vec<(Vec<VariableId>, VariableId)>) {
        if alpha == 0 {
            return;
        }
        let idx = self.rank(clique) * self.mask_width + alpha as usize;
        let c = self.choice[idx];
        let p = (c & ((1 << CHOICE_P_BITS) - 1)) as usize;
        let y_pos = (c >> CHOICE_P_BITS & ((1 << CHOICE_Y_BITS) - 1)) as usize;
        let t = c >> (CHOICE_P_BITS + CHOICE_Y_BITS) & ((1 << CHOICE_T_BITS) - 1);
        let x = (c >> (CHOICE_P_BITS + CHOICE_Y_BITS + CHOICE_T_BITS)) as u16;
        let e = self.expansion(clique, alpha, p, x, y_pos);
        let mut beta = e.beta_forced;
        let mut q_bits = t;
        while q_bits != 0 {
            let q = q_bits.trailing_zeros() as usize;
            beta |= 1 << e.map_bit[q];
            q_bits &= q_bits - 1;
        }
        steps.push((e.parents.iter().map(|&v| VariableId(v)).collect(), VariableId(x)));
        self.emit(&e.swapped, beta, steps);
        self.emit(clique, e.gamma_base & !t, steps);
    }
}

/// End-to-end learner: backbone DP under the MI score, then a model fit on
/// the winning topology.
pub fn learn_markov_backbone_ktree(
    dist: &DataSource,
    k: usize,
) -> Result<(MarkovKTree, LearnResult)> {
    let f = mi_score_adapter(*dist);
    let result = backbone_dp(dist.n_vars(), k, &f)?;
    let model = fit(&result.tree, &result.order, dist)?;
    Ok((model, result))
}
