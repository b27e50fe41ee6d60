//! Exact inference on a fitted Markov k-tree: conditional marginals, evidence
//! probabilities, and most-probable explanations.
//!
//! All queries run message passing over the clique tree of the model's
//! creation order. Each factor P(X | parents(X)) lives in the unique clique
//! made of X and its attachment clique; the base-clique factors live in the
//! root clique. Sum-product messages are kept in linear space with a running
//! log2 scale so long chains cannot underflow; max-product works in log2
//! space directly.

use crate::error::{MkError, Result};
use crate::ktree::{tree_decomposition, CliqueTree};
use crate::model::{joint_probability, MarkovKTree};
use crate::tables::{decode, JointTable, VariableId};
use std::collections::BTreeMap;

/// A partial assignment of observed variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    fixed: BTreeMap<VariableId, u32>,
}

impl Evidence {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VariableId, u32)>) -> Result<Self> {
        let mut fixed = BTreeMap::new();
        for (v, s) in pairs {
            if fixed.insert(v, s).is_some() {
                return Err(MkError::DuplicateVariable(v.0));
            }
        }
        Ok(Self { fixed })
    }

    pub fn fix(&mut self, v: VariableId, state: u32) {
        self.fixed.insert(v, state);
    }

    pub fn get(&self, v: VariableId) -> Option<u32> {
        self.fixed.get(&v).copied()
    }

    pub fn is_fixed(&self, v: VariableId) -> bool {
        self.fixed.contains_key(&v)
    }

    pub fn len(&self) -> usize {
        self.fixed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixed.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VariableId, u32)> + '_ {
        self.fixed.iter().map(|(&v, &s)| (v, s))
    }

    fn validate(&self, m: &MarkovKTree) -> Result<()> {
        for (v, s) in self.iter() {
            let card = m.cardinalities().card(v)?;
            if s >= card {
                return Err(MkError::ScopeMismatch(format!(
                    "evidence state {s} out of range for {v} (cardinality {card})"
                )));
            }
        }
        Ok(())
    }
}

/// A dense nonnegative table over a sorted scope, with an explicit log2 scale
/// factored out (vals are meaningful up to `2^log2_scale`).
struct LinTable {
    scope: Vec<VariableId>,
    cards: Vec<u32>,
    vals: Vec<f64>,
    log2_scale: f64,
}

impl LinTable {
    fn flat_of(&self, assignment_by_var: &[u32]) -> usize {
        let mut flat = 0usize;
        for (v, &c) in self.scope.iter().zip(&self.cards) {
            flat = flat * c as usize + assignment_by_var[v.idx()] as usize;
        }
        flat
    }
}

/// The per-query engine: clique tree plus one evidence-masked factor table
/// per clique.
struct Engine<'m> {
    m: &'m MarkovKTree,
    ct: CliqueTree,
    neighbors: Vec<Vec<usize>>,
    tables: Vec<LinTable>,
    messages_sent: usize,
}

impl<'m> Engine<'m> {
    fn new(m: &'m MarkovKTree, evidence: &Evidence) -> Result<Self> {
        evidence.validate(m)?;
        let ct = tree_decomposition(m.order())?;
        let mut neighbors = vec![Vec::new(); ct.len()];
        for i in 1..ct.len() {
            let p = ct.parent(i).expect("non-root clique has a parent");
            neighbors[i].push(p);
            neighbors[p].push(i);
        }
        // CPTs whose factor lives in clique i: the step vertex of clique i,
        // plus every base-clique member at the root.
        let mut owners: Vec<Vec<VariableId>> = vec![Vec::new(); ct.len()];
        for i in 0..ct.len() {
            owners[i].push(ct.step_vertex(i));
        }
        for &v in ct.clique(ct.root()) {
            if v != ct.step_vertex(ct.root()) {
                owners[ct.root()].push(v);
            }
        }
        let mut tables = Vec::with_capacity(ct.len());
        let mut state = vec![0u32; m.n()];
        for i in 0..ct.len() {
            let scope: Vec<VariableId> = ct.clique(i).to_vec();
            let cards: Vec<u32> = scope
                .iter()
                .map(|&v| m.cardinalities().card(v))
                .collect::<Result<_>>()?;
            let size: usize = cards.iter().map(|&c| c as usize).product();
            let mut vals = vec![0.0; size];
            let mut local = vec![0u32; scope.len()];
            for (flat, slot) in vals.iter_mut().enumerate() {
                decode(flat, &cards, &mut local);
                for (v, &s) in scope.iter().zip(&local) {
                    state[v.idx()] = s;
                }
                if scope
                    .iter()
                    .any(|&v| evidence.get(v).is_some_and(|s| s != state[v.idx()]))
                {
                    continue;
                }
                let mut p = 1.0;
                for &owner in &owners[i] {
                    let cpt = m.cpt(owner);
                    let given: Vec<u32> = cpt.given.iter().map(|g| state[g.idx()]).collect();
                    p *= cpt.prob(state[owner.idx()], &given);
                }
                *slot = p;
            }
            tables.push(LinTable {
                scope,
                cards,
                vals,
                log2_scale: 0.0,
            });
        }
        Ok(Self {
            m,
            ct,
            neighbors,
            tables,
            messages_sent: 0,
        })
    }

    /// Sum-product message from clique `from` toward clique `to`: the belief
    /// of `from` (its table times all other incoming messages) summed down to
    /// the shared scope, max-normalized.
    fn sum_message(&mut self, from: usize, to: usize) -> LinTable {
        let incoming: Vec<LinTable> = self.neighbors[from]
            .clone()
            .into_iter()
            .filter(|&w| w != to)
            .map(|w| self.sum_message(w, from))
            .collect();
        let shared: Vec<VariableId> = self.ct.clique(from)
            .iter()
            .filter(|v| self.ct.clique(to).contains(v))
            .copied()
            .collect();
        let refs: Vec<&LinTable> = incoming.iter().collect();
        let mut out = self.project(from, &refs, &shared, false);
        let mx = out.vals.iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            out.vals.iter_mut().for_each(|v| *v /= mx);
            out.log2_scale += mx.log2();
        }
        self.messages_sent += 1;
        out
    }

    /// Belief at `pivot` after collecting from the whole tree, summed (or
    /// maxed) down to `keep` (a subset of the pivot's scope).
    fn collect(&mut self, pivot: usize, keep: &[VariableId], maximize: bool) -> LinTable {
        let incoming: Vec<LinTable> = self.neighbors[pivot]
            .clone()
            .into_iter()
            .map(|w| {
                if maximize {
                    self.max_message(w, pivot)
                } else {
                    self.sum_message(w, pivot)
                }
            })
            .collect();
        let refs: Vec<&LinTable> = incoming.iter().collect();
        self.project(pivot, &refs, keep, maximize)
    }

    /// table(clique) × incoming messages, reduced to `keep` by sum or max.
    fn project(
        &self,
        clique: usize,
        incoming: &[&LinTable],
        keep: &[VariableId],
        maximize: bool,
    ) -> LinTable {
        let t = &self.tables[clique];
        let keep_cards: Vec<u32> = keep
            .iter()
            .map(|&v| t.cards[t.scope.iter().position(|&u| u == v).expect("keep ⊆ scope")])
            .collect();
        let out_size: usize = keep_cards.iter().map(|&c| c as usize).product();
        let mut out = vec![0.0f64; out_size];
        let mut local = vec![0u32; t.scope.len()];
        let mut by_var = vec![0u32; self.m.n()];
        let mut scale = t.log2_scale;
        for msg in incoming {
            scale += msg.log2_scale;
        }
        for (flat, &base) in t.vals.iter().enumerate() {
            if base == 0.0 {
                continue;
            }
            decode(flat, &t.cards, &mut local);
            for (v, &s) in t.scope.iter().zip(&local) {
                by_var[v.idx()] = s;
            }
            let mut p = base;
            for msg in incoming {
                p *= msg.vals[msg.flat_of(&by_var)];
            }
            let mut kf = 0usize;
            for (v, &c) in keep.iter().zip(&keep_cards) {
                kf = kf * c as usize + by_var[v.idx()] as usize;
            }
            if maximize {
                if p > out[kf] {
                    out[kf] = p;
                }
            } else {
                out[kf] += p;
            }
        }
        LinTable {
            scope: keep.to_vec(),
            cards: keep_cards,
            vals: out,
            log2_scale: scale,
        }
    }

    /// Max-product message: like sum_message with max in place of sum.
    fn max_message(&mut self, from: usize, to: usize) -> LinTable {
        let incoming: Vec<LinTable> = self.neighbors[from]
            .clone()
            .into_iter()
            .filter(|&w| w != to)
            .map(|w| self.max_message(w, from))
            .collect();
        let shared: Vec<VariableId> = self.ct.clique(from)
            .iter()
            .filter(|v| self.ct.clique(to).contains(v))
            .copied()
            .collect();
        let refs: Vec<&LinTable> = incoming.iter().collect();
        let mut out = self.project(from, &refs, &shared, true);
        let mx = out.vals.iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            out.vals.iter_mut().for_each(|v| *v /= mx);
            out.log2_scale += mx.log2();
        }
        self.messages_sent += 1;
        out
    }
}

/// P(x | evidence) as a one-variable table.
pub fn marginal(m: &MarkovKTree, x: VariableId, evidence: &Evidence) -> Result<JointTable> {
    if evidence.is_fixed(x) {
        return Err(MkError::ScopeMismatch(format!("{x} is fixed by the evidence")));
    }
    m.cardinalities().card(x)?;
    let mut engine = Engine::new(m, evidence)?;
    let pivot = (0..engine.ct.len())
        .find(|&i| engine.ct.clique(i).contains(&x))
        .ok_or(MkError::UnknownVariable(x.0))?;
    let belief = engine.collect(pivot, &[x], false);
    let total: f64 = belief.vals.iter().sum();
    if total <= 0.0 {
        return Err(MkError::ZeroProbabilityEvidence);
    }
    let probs: Vec<f64> = belief.vals.iter().map(|v| v / total).collect();
    JointTable::new(vec![x], belief.cards, probs)
}

/// log2 P(evidence); 0.0 for empty evidence, -inf if the evidence has
/// probability zero under the model.
pub fn evidence_probability(m: &MarkovKTree, evidence: &Evidence) -> Result<f64> {
    let mut engine = Engine::new(m, evidence)?;
    let root = engine.ct.root();
    let belief = engine.collect(root, &[], false);
    let total = belief.vals[0];
    if total <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(total.log2() + belief.log2_scale)
}

/// Most probable explanation: the maximum-probability completion of the
/// evidence and its log2 probability. Ties break toward smaller states along
/// the message schedule, so results are deterministic.
pub fn mpe(m: &MarkovKTree, evidence: &Evidence) -> Result<(Vec<u32>, f64)> {
    let engine = Engine::new(m, evidence)?;
    let ct = engine.ct.len();
    // Upward pass: clique i sends a max-message to its parent. Processing by
    // descending index works because parents always precede children.
    let mut up: Vec<Option<LinTable>> = (0..ct).map(|_| None).collect();
    let children = engine.ct.children();
    for i in (1..ct).rev() {
        let incoming: Vec<&LinTable> =
            children[i].iter().map(|&c| up[c].as_ref().unwrap()).collect();
        let p = engine.ct.parent(i).unwrap();
        let shared: Vec<VariableId> = engine.ct.clique(i)
            .iter()
            .filter(|v| engine.ct.clique(p).contains(v))
            .copied()
            .collect();
        let mut msg = engine.project(i, &incoming, &shared, true);
        let mx = msg.vals.iter().cloned().fold(0.0, f64::max);
        if mx > 0.0 {
            msg.vals.iter_mut().for_each(|v| *v /= mx);
            msg.log2_scale += mx.log2();
        }
        up[i] = Some(msg);
    }
    let root = engine.ct.root();
    let root_in: Vec<&LinTable> =
        children[root].iter().map(|&c| up[c].as_ref().unwrap()).collect();
    let keep: Vec<VariableId> = engine.ct.clique(root).to_vec();
    let root_belief = engine.project(root, &root_in, &keep, true);
    // Root decision: first maximum in ascending mixed-radix order.
    let (mut best_flat, mut best_val) = (usize::MAX, 0.0f64);
    for (flat, &v) in root_belief.vals.iter().enumerate() {
        if v > best_val {
            best_val = v;
            best_flat = flat;
        }
    }
    if best_flat == usize::MAX {
        return Err(MkError::ZeroProbabilityEvidence);
    }
    let mut assignment = vec![0u32; m.n()];
    let mut fixed = vec![false; m.n()];
    let mut local = vec![0u32; keep.len()];
    decode(best_flat, &root_belief.cards, &mut local);
    for (v, &s) in keep.iter().zip(&local) {
        assignment[v.idx()] = s;
        fixed[v.idx()] = true;
    }
    // Downward pass: each clique fixes its step vertex given the separator,
    // again preferring the smallest maximizing state.
    for i in 1..ct {
        let step = engine.ct.step_vertex(i);
        let t = &engine.tables[i];
        let incoming: Vec<&LinTable> = children[i]
            .iter()
            .map(|&c| up[c].as_ref().expect("child message retained"))
            .collect();
        let card = m.cardinalities().card(step)?;
        let (mut best_s, mut best_p) = (0u32, -1.0f64);
        for s in 0..card {
            assignment[step.idx()] = s;
            let flat = t.flat_of(&assignment);
            let mut p = t.vals[flat];
            for msg in &incoming {
                p *= msg.vals[msg.flat_of(&assignment)];
            }
            if p > best_p {
                best_p = p;
                best_s = s;
            }
        }
        assignment[step.idx()] = best_s;
        fixed[step.idx()] = true;
    }
    debug_assert!(fixed.iter().all(|&b| b));
    let (p, log2p) = joint_probability(m, &assignment)?;
    if p == 0.0 {
        return Err(MkError::ZeroProbabilityEvidence);
    }
    Ok((assignment, log2p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ktree::{build_from_order, markov_chain_order, CreationOrder};
    use crate::model::{fit, model_joint, DataSource};
    use crate::tables::{uniform_joint, Cardinalities};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(i: u16) -> VariableId {
        VariableId(i)
    }

    fn xor_model() -> MarkovKTree {
        let mut probs = vec![0.0; 8];
        for x in 0..2usize {
            for y in 0..2usize {
                probs[(x << 2) | (y << 1) | (x ^ y)] = 0.25;
            }
        }
        let joint = JointTable::new(vec![v(1), v(2), v(3)], vec![2, 2, 2], probs).unwrap();
        let ds = DataSource::exact(&joint).unwrap();
        let order =
            CreationOrder::new(2, vec![v(1), v(2)], vec![(vec![v(1), v(2)], v(3))]).unwrap();
        let tree = build_from_order(&order).unwrap();
        fit(&tree, &order, &ds).unwrap()
    }

    /// A random k-tree creation order over n vertices with random labels.
    fn random_order(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CreationOrder {
        let mut labels: Vec<u16> = (1..=n as u16).collect();
        for i in (1..labels.len()).rev() {
            labels.swap(i, rng.gen_range(0..=i));
        }
        let mut base: Vec<VariableId> = labels[..k].iter().map(|&l| v(l)).collect();
        base.sort_unstable();
        let mut cliques: Vec<Vec<VariableId>> = vec![{
            let mut b = base.clone();
            b.sort_unstable();
            b
        }];
        let mut steps = Vec::new();
        for &l in &labels[k..] {
            let c = cliques[rng.gen_range(0..cliques.len())].clone();
            steps.push((c.clone(), v(l)));
            for drop in 0..k {
                let mut next: Vec<VariableId> =
                    c.iter().enumerate().filter(|&(j, _)| j != drop).map(|(_, &u)| u).collect();
                next.push(v(l));
                next.sort_unstable();
                cliques.push(next);
            }
        }
        CreationOrder::new(k, base, steps).unwrap()
    }

    fn random_model(rng: &mut ChaCha8Rng, n: usize, k: usize) -> MarkovKTree {
        let mut probs: Vec<f64> = (0..1usize << n).map(|_| rng.gen_range(0.01..1.0)).collect();
        let z: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= z);
        let joint =
            JointTable::new((1..=n as u16).map(v).collect(), vec![2; n], probs).unwrap();
        let ds = DataSource::exact(&joint).unwrap();
        let order = random_order(rng, n, k);
        let tree = build_from_order(&order).unwrap();
        fit(&tree, &order, &ds).unwrap()
    }

    #[test]
    fn uniform_model_marginal_is_uniform() {
        let joint =
            uniform_joint(&Cardinalities::binary(4), &(1..=4).map(v).collect::<Vec<_>>()).unwrap();
        let ds = DataSource::exact(&joint).unwrap();
        let order = markov_chain_order(4, 2);
        let tree = build_from_order(&order).unwrap();
        let m = fit(&tree, &order, &ds).unwrap();
        for i in 1..=4u16 {
            let marg = marginal(&m, v(i), &Evidence::empty()).unwrap();
            assert_eq!(marg.probs(), &[0.5, 0.5]);
        }
    }

    #[test]
    fn xor_marginal_under_full_parent_evidence() {
        let m = xor_model();
        let e = Evidence::from_pairs([(v(1), 1), (v(2), 1)]).unwrap();
        let marg = marginal(&m, v(3), &e).unwrap();
        assert!((marg.probs()[0] - 1.0).abs() < 1e-12);
        assert!(marg.probs()[1].abs() < 1e-12);
    }

    #[test]
    fn xor_evidence_probability() {
        let m = xor_model();
        assert_eq!(evidence_probability(&m, &Evidence::empty()).unwrap(), 0.0);
        let e = Evidence::from_pairs([(v(1), 1)]).unwrap();
        assert!((evidence_probability(&m, &e).unwrap() + 1.0).abs() < 1e-12);
        let full = Evidence::from_pairs([(v(1), 1), (v(2), 0), (v(3), 1)]).unwrap();
        assert!((evidence_probability(&m, &full).unwrap() + 2.0).abs() < 1e-12);
        let zero = Evidence::from_pairs([(v(1), 1), (v(2), 0), (v(3), 0)]).unwrap();
        assert_eq!(evidence_probability(&m, &zero).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn xor_mpe_under_output_evidence() {
        let m = xor_model();
        let e = Evidence::from_pairs([(v(3), 1)]).unwrap();
        let (a, log2p) = mpe(&m, &e).unwrap();
        assert!((log2p + 2.0).abs() < 1e-12);
        assert_eq!(a[2], 1);
        assert_eq!(a[0] ^ a[1], 1);
        // Smallest-state tie-break: (X1, X2) = (0, 1).
        assert_eq!(a, vec![0, 1, 1]);
    }

    #[test]
    fn mpe_rejects_impossible_evidence() {
        let m = xor_model();
        let e = Evidence::from_pairs([(v(1), 1), (v(2), 0), (v(3), 0)]).unwrap();
        assert!(matches!(mpe(&m, &e), Err(MkError::ZeroProbabilityEvidence)));
        let bad = Evidence::from_pairs([(v(1), 5)]).unwrap();
        assert!(marginal(&m, v(2), &bad).is_err());
    }

    #[test]
    fn marginals_match_enumeration_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..15 {
            let n = rng.gen_range(4..=8usize);
            let m = random_model(&mut rng, n, 2);
            let joint = model_joint(&m).unwrap();
            // Random evidence over a strict subset of the variables.
            let mut e = Evidence::empty();
            for i in 1..=n as u16 {
                if rng.gen_bool(0.3) && e.len() + 1 < n {
                    e.fix(v(i), rng.gen_range(0..2));
                }
            }
            let mut mask = joint.probs().to_vec();
            let cards = vec![2u32; n];
            let mut st = vec![0u32; n];
            for (flat, p) in mask.iter_mut().enumerate() {
                decode(flat, &cards, &mut st);
                if e.iter().any(|(var, s)| st[var.idx()] != s) {
                    *p = 0.0;
                }
            }
            let pe: f64 = mask.iter().sum();
            for i in 1..=n as u16 {
                if e.is_fixed(v(i)) {
                    continue;
                }
                let marg = marginal(&m, v(i), &e).unwrap();
                let mut expect = [0.0f64; 2];
                for (flat, &p) in mask.iter().enumerate() {
                    decode(flat, &cards, &mut st);
                    expect[st[(i - 1) as usize] as usize] += p;
                }
                for s in 0..2 {
                    assert!(
                        (marg.probs()[s] - expect[s] / pe).abs() < 1e-9,
                        "trial {trial} var {i} state {s}"
                    );
                }
            }
            let lp = evidence_probability(&m, &e).unwrap();
            assert!((lp - pe.log2()).abs() < 1e-9, "trial {trial} evidence prob");
        }
    }

    #[test]
    fn mpe_matches_enumeration_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for trial in 0..15 {
            let n = rng.gen_range(4..=10usize);
            let m = random_model(&mut rng, n, 2);
            let joint = model_joint(&m).unwrap();
            let mut e = Evidence::empty();
            for i in 1..=n as u16 {
                if rng.gen_bool(0.25) {
                    e.fix(v(i), rng.gen_range(0..2));
                }
            }
            let cards = vec![2u32; n];
            let mut st = vec![0u32; n];
            let mut best = 0.0f64;
            for (flat, &p) in joint.probs().iter().enumerate() {
                decode(flat, &cards, &mut st);
                if e.iter().all(|(var, s)| st[var.idx()] == s) && p > best {
                    best = p;
                }
            }
            let (a, log2p) = mpe(&m, &e).unwrap();
            assert!(
                (log2p - best.log2()).abs() < 1e-12,
                "trial {trial}: mpe {log2p} vs oracle {}",
                best.log2()
            );
            let (_, check) = joint_probability(&m, &a).unwrap();
            assert!((check - log2p).abs() < 1e-12, "trial {trial} self-consistency");
            for (var, s) in e.iter() {
                assert_eq!(a[var.idx()], s, "trial {trial} evidence respected");
            }
        }
    }

    #[test]
    fn mpe_dominates_model_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let m = random_model(&mut rng, 8, 2);
        let (_, best) = mpe(&m, &Evidence::empty()).unwrap();
        // Ancestral sampling down the creation order.
        for _ in 0..1000 {
            let mut a = vec![0u32; 8];
            for i in 1..=8u16 {
                let cpt = m.cpt(v(i));
                let given: Vec<u32> = cpt.given.iter().map(|g| a[g.idx()]).collect();
                let r: f64 = rng.gen();
                let mut acc = 0.0;
                let mut s = 0;
                for t in 0..2u32 {
                    acc += cpt.prob(t, &given);
                    if r < acc {
                        s = t;
                        break;
                    }
                    s = t;
                }
                a[i as usize - 1] = s;
            }
            let (_, lp) = joint_probability(&m, &a).unwrap();
            assert!(best >= lp - 1e-12);
        }
    }

    #[test]
    fn message_count_is_cliques_minus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let m = random_model(&mut rng, 9, 2);
        let mut engine = Engine::new(&m, &Evidence::empty()).unwrap();
        let root = engine.ct.root();
        let _ = engine.collect(root, &[], false);
        // n - k cliques, so n - k - 1 messages in one direction.
        assert_eq!(engine.ct.len(), 9 - 2);
        assert_eq!(engine.messages_sent, engine.ct.len() - 1);
    }

    #[test]
    fn deterministic_chain_is_forced() {
        // X1 uniform; each later CPT copies its left neighbor.
        let n = 5;
        let mut probs = vec![0.0; 1 << n];
        probs[0] = 0.5;
        probs[(1 << n) - 1] = 0.5;
        let joint =
            JointTable::new((1..=n as u16).map(v).collect(), vec![2; n], probs).unwrap();
        let ds = DataSource::exact(&joint).unwrap();
        let order = markov_chain_order(n, 1);
        let tree = build_from_order(&order).unwrap();
        let m = fit(&tree, &order, &ds).unwrap();
        let e = Evidence::from_pairs([(v(1), 1)]).unwrap();
        let (a, log2p) = mpe(&m, &e).unwrap();
        assert_eq!(a, vec![1; n]);
        assert!((log2p + 1.0).abs() < 1e-12);
    }
}
