//! Discrete sample ingestion and dense joint / marginal / conditional
//! probability tables.
//!
//! Tables are dense arrays over the mixed-radix assignment space of their
//! scope; the last scope variable varies fastest. All values are `f64`
//! probabilities; products over many factors are taken in log space by
//! callers.

use crate::error::{MkError, Result};
use serde::{Deserialize, Serialize};

/// One discrete random variable, identified by its 1-based index.
///
/// The index order is the backbone order used by the learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VariableId(pub u16);

impl VariableId {
    /// Zero-based position of this variable.
    pub fn idx(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl std::fmt::Display for VariableId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "X{}", self.0)
    }
}

/// Number of discrete states per variable, for variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cardinalities {
    sizes: Vec<u32>,
}

impl Cardinalities {
    pub fn new(sizes: Vec<u32>) -> Result<Self> {
        if sizes.iter().any(|&c| c < 2) {
            return Err(MkError::Parse("every cardinality must be >= 2".into()));
        }
        Ok(Self { sizes })
    }

    /// All variables binary; the common desk-scale case.
    pub fn binary(n: usize) -> Self {
        Self { sizes: vec![2; n] }
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn card(&self, v: VariableId) -> Result<u32> {
        self.sizes
            .get(v.idx())
            .copied()
            .ok_or(MkError::UnknownVariable(v.0))
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// All variables of the model, in backbone order.
    pub fn all_vars(&self) -> Vec<VariableId> {
        (1..=self.n() as u16).map(VariableId).collect()
    }
}

/// Fully observed rows: `rows[r][v]` is the state of variable `v+1` in row `r`.
#[derive(Debug, Clone)]
pub struct SampleSet {
    rows: Vec<Vec<u32>>,
    n: usize,
}

impl SampleSet {
    pub fn new(n: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        for row in &rows {
            if row.len() != n {
                return Err(MkError::Parse(format!(
                    "sample row has {} entries, expected {}",
                    row.len(),
                    n
                )));
            }
        }
        Ok(Self { rows, n })
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    /// Checks every row against the cardinalities.
    pub fn validate(&self, cards: &Cardinalities) -> Result<()> {
        if cards.n() != self.n {
            return Err(MkError::ScopeMismatch(format!(
                "samples over {} variables, cardinalities over {}",
                self.n,
                cards.n()
            )));
        }
        for row in &self.rows {
            for (i, &s) in row.iter().enumerate() {
                if s >= cards.sizes[i] {
                    return Err(MkError::Parse(format!(
                        "state {} out of range for X{} (cardinality {})",
                        s,
                        i + 1,
                        cards.sizes[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Scope size cap for dense tables. The learners only ever build tables over
/// at most `k+1` variables; the full-joint path is desk-scale validation only.
pub const DEFAULT_TABLE_CAP: usize = 20;

/// Dense probability table over an ordered variable scope.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    scope: Vec<VariableId>,
    cards: Vec<u32>,
    probs: Vec<f64>,
}

impl JointTable {
    /// Builds a table from raw probabilities. Entries must be nonnegative and
    /// sum to 1 within 1e-9.
    pub fn new(scope: Vec<VariableId>, cards: Vec<u32>, probs: Vec<f64>) -> Result<Self> {
        if scope.is_empty() {
            return Err(MkError::EmptyScope);
        }
        if scope.len() > DEFAULT_TABLE_CAP {
            return Err(MkError::TableCap {
                vars: scope.len(),
                cap: DEFAULT_TABLE_CAP,
            });
        }
        let mut seen = scope.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(MkError::DuplicateVariable(w[0].0));
        }
        if cards.len() != scope.len() {
            return Err(MkError::ScopeMismatch("cards/scope length differ".into()));
        }
        let size: usize = cards.iter().map(|&c| c as usize).product();
        if probs.len() != size {
            return Err(MkError::ScopeMismatch(format!(
                "table has {} entries, scope admits {}",
                probs.len(),
                size
            )));
        }
        if probs.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(MkError::Parse("probabilities must be finite and >= 0".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(MkError::Parse(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { scope, cards, probs })
    }

    pub fn scope(&self) -> &[VariableId] {
        &self.scope
    }

    pub fn cards(&self) -> &[u32] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Flat index of an assignment given in scope order.
    pub fn index_of(&self, assignment: &[u32]) -> usize {
        debug_assert_eq!(assignment.len(), self.scope.len());
        let mut idx = 0usize;
        for (a, &c) in assignment.iter().zip(&self.cards) {
            idx = idx * c as usize + *a as usize;
        }
        idx
    }

    pub fn prob(&self, assignment: &[u32]) -> f64 {
        self.probs[self.index_of(assignment)]
    }

    /// Iterates `(assignment, probability)` in flat-index order.
    pub fn iter_assignments(&self) -> AssignmentIter<'_> {
        AssignmentIter {
            table: self,
            next: 0,
            current: vec![0; self.scope.len()],
        }
    }

    /// Position of `v` within the scope.
    fn pos(&self, v: VariableId) -> Result<usize> {
        self.scope
            .iter()
            .position(|&s| s == v)
            .ok_or(MkError::UnknownVariable(v.0))
    }

    /// Sums out every variable not in `keep`. The result scope is `keep`
    /// reordered to match this table's scope order.
    pub fn marginalize(&self, keep: &[VariableId]) -> Result<JointTable> {
        for &v in keep {
            self.pos(v)?;
        }
        let kept: Vec<usize> = (0..self.scope.len())
            .filter(|&i| keep.contains(&self.scope[i]))
            .collect();
        if kept.is_empty() {
            return Err(MkError::EmptyScope);
        }
        let out_scope: Vec<VariableId> = kept.iter().map(|&i| self.scope[i]).collect();
        let out_cards: Vec<u32> = kept.iter().map(|&i| self.cards[i]).collect();
        let out_size: usize = out_cards.iter().map(|&c| c as usize).product();
        let mut out = vec![0.0; out_size];
        let mut assignment = vec![0u32; self.scope.len()];
        for (flat, &p) in self.probs.iter().enumerate() {
            decode(flat, &self.cards, &mut assignment);
            let mut idx = 0usize;
            for &i in &kept {
                idx = idx * self.cards[i] as usize + assignment[i] as usize;
            }
            out[idx] += p;
        }
        Ok(JointTable {
            scope: out_scope,
            cards: out_cards,
            probs: out,
        })
    }

    /// Conditional table P(target | given), computed from this joint.
    ///
    /// Slices conditioned on a measure-zero assignment are uniform; this keeps
    /// factor products well-defined on assignments the joint never visits.
    pub fn conditional(&self, target: VariableId, given: &[VariableId]) -> Result<ConditionalTable> {
        if given.contains(&target) {
            return Err(MkError::ScopeMismatch(format!(
                "target {target} also appears in the conditioning set"
            )));
        }
        let mut scope = vec![target];
        scope.extend_from_slice(given);
        // Joint over {target} ∪ given with target fastest: reorder below.
        let sub = self.marginalize(&scope)?;
        let t_pos = sub.pos(target)?;
        let t_card = sub.cards[t_pos] as usize;
        let g_positions: Vec<usize> = (0..sub.scope.len()).filter(|&i| i != t_pos).collect();
        let g_scope: Vec<VariableId> = g_positions.iter().map(|&i| sub.scope[i]).collect();
        let g_cards: Vec<u32> = g_positions.iter().map(|&i| sub.cards[i]).collect();
        let g_size: usize = g_cards.iter().map(|&c| c as usize).product();
        let mut probs = vec![0.0; g_size * t_card];
        let mut assignment = vec![0u32; sub.scope.len()];
        for (flat, &p) in sub.probs.iter().enumerate() {
            decode(flat, &sub.cards, &mut assignment);
            let mut g_idx = 0usize;
            for &i in &g_positions {
                g_idx = g_idx * sub.cards[i] as usize + assignment[i] as usize;
            }
            probs[g_idx * t_card + assignment[t_pos] as usize] += p;
        }
        for slice in probs.chunks_mut(t_card) {
            let z: f64 = slice.iter().sum();
            if z > 0.0 {
                for p in slice.iter_mut() {
                    *p /= z;
                }
            } else {
                for p in slice.iter_mut() {
                    *p = 1.0 / t_card as f64;
                }
            }
        }
        Ok(ConditionalTable {
            target,
            target_card: t_card as u32,
            given: g_scope,
            given_cards: g_cards,
            probs,
        })
    }
}

/// P(target | given): for each assignment of `given`, a normalized slice over
/// the target states. Indexed given-major, target fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    pub target: VariableId,
    pub target_card: u32,
    pub given: Vec<VariableId>,
    pub given_cards: Vec<u32>,
    pub probs: Vec<f64>,
}

impl ConditionalTable {
    /// P(target = t | given assignment), with states given in `self.given` order.
    pub fn prob(&self, t: u32, given_states: &[u32]) -> f64 {
        debug_assert_eq!(given_states.len(), self.given.len());
        let mut g_idx = 0usize;
        for (s, &c) in given_states.iter().zip(&self.given_cards) {
            g_idx = g_idx * c as usize + *s as usize;
        }
        self.probs[g_idx * self.target_card as usize + t as usize]
    }
}

/// Decodes a flat mixed-radix index into `out` (last variable fastest); the
/// inverse of [`JointTable::index_of`] for a table's own scope.
pub fn decode_assignment(mut flat: usize, cards: &[u32], out: &mut [u32]) {
    for i in (0..cards.len()).rev() {
        let c = cards[i] as usize;
        out[i] = (flat % c) as u32;
        flat /= c;
    }
}

pub(crate) use decode_assignment as decode;

pub struct AssignmentIter<'a> {
    table: &'a JointTable,
    next: usize,
    current: Vec<u32>,
}

impl<'a> Iterator for AssignmentIter<'a> {
    type Item = (Vec<u32>, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.table.probs.len() {
            return None;
        }
        decode(self.next, &self.table.cards, &mut self.current);
        let item = (self.current.clone(), self.table.probs[self.next]);
        self.next += 1;
        Some(item)
    }
}

/// Empirical joint over `scope`, with additive smoothing.
///
/// `probs[a] = (count(a) + pseudocount) / (N + pseudocount * |states|)`.
pub fn empirical_joint(
    samples: &SampleSet,
    cards: &Cardinalities,
    scope: &[VariableId],
    pseudocount: f64,
) -> Result<JointTable> {
    if scope.is_empty() {
        return Err(MkError::EmptyScope);
    }
    if pseudocount < 0.0 {
        return Err(MkError::Parse("pseudocount must be >= 0".into()));
    }
    if samples.is_empty() && pseudocount == 0.0 {
        return Err(MkError::NoSamples);
    }
    let mut scope_cards = Vec::with_capacity(scope.len());
    for &v in scope {
        scope_cards.push(cards.card(v)?);
        if v.idx() >= samples.n_vars() {
            return Err(MkError::UnknownVariable(v.0));
        }
    }
    let size: usize = scope_cards.iter().map(|&c| c as usize).product();
    let mut counts = vec![0f64; size];
    for row in samples.rows() {
        let mut idx = 0usize;
        for (&v, &c) in scope.iter().zip(&scope_cards) {
            idx = idx * c as usize + row[v.idx()] as usize;
        }
        counts[idx] += 1.0;
    }
    let denom = samples.len() as f64 + pseudocount * size as f64;
    let probs: Vec<f64> = counts.iter().map(|c| (c + pseudocount) / denom).collect();
    JointTable::new(scope.to_vec(), scope_cards, probs)
}

/// Uniform product table over `scope` (used by tests and fixtures).
pub fn uniform_joint(cards: &Cardinalities, scope: &[VariableId]) -> Result<JointTable> {
    let mut scope_cards = Vec::with_capacity(scope.len());
    for &v in scope {
        scope_cards.push(cards.card(v)?);
    }
    let size: usize = scope_cards.iter().map(|&c| c as usize).product();
    JointTable::new(scope.to_vec(), scope_cards, vec![1.0 / size as f64; size])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u16) -> VariableId {
        VariableId(i)
    }

    /// XOR distribution over (X1, X2, X3): X3 = X1 ^ X2, X1 and X2 iid uniform.
    pub(crate) fn xor_joint() -> JointTable {
        let mut probs = vec![0.0; 8];
        for x in 0..2usize {
            for y in 0..2usize {
                let z = x ^ y;
                probs[(x << 2) | (y << 1) | z] = 0.25;
            }
        }
        JointTable::new(vec![v(1), v(2), v(3)], vec![2, 2, 2], probs).unwrap()
    }

    #[test]
    fn empirical_two_state_symmetric() {
        let cards = Cardinalities::binary(1);
        let samples = SampleSet::new(1, vec![vec![0], vec![0], vec![1], vec![1]]).unwrap();
        let t = empirical_joint(&samples, &cards, &[v(1)], 0.0).unwrap();
        assert_eq!(t.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn empirical_smoothing_formula() {
        // 2 samples of state 0, pseudocount 1 -> [(2+1)/4, (0+1)/4].
        let cards = Cardinalities::binary(1);
        let samples = SampleSet::new(1, vec![vec![0], vec![0]]).unwrap();
        let t = empirical_joint(&samples, &cards, &[v(1)], 1.0).unwrap();
        assert_eq!(t.probs(), &[0.75, 0.25]);
    }

    #[test]
    fn empirical_three_binary_normalizes() {
        let cards = Cardinalities::binary(3);
        let rows = vec![vec![0, 1, 0], vec![1, 1, 1], vec![0, 0, 0], vec![1, 0, 1]];
        let samples = SampleSet::new(3, rows).unwrap();
        let t = empirical_joint(&samples, &cards, &[v(1), v(2), v(3)], 0.0).unwrap();
        assert_eq!(t.len(), 8);
        assert!((t.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_rejects_zero_samples_zero_pseudocount() {
        let cards = Cardinalities::binary(1);
        let samples = SampleSet::new(1, vec![]).unwrap();
        assert!(matches!(
            empirical_joint(&samples, &cards, &[v(1)], 0.0),
            Err(MkError::NoSamples)
        ));
        assert!(matches!(
            empirical_joint(&samples, &cards, &[], 1.0),
            Err(MkError::EmptyScope)
        ));
    }

    #[test]
    fn exhaustive_samples_give_uniform() {
        let cards = Cardinalities::binary(2);
        let rows = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let samples = SampleSet::new(2, rows).unwrap();
        let t = empirical_joint(&samples, &cards, &[v(1), v(2)], 0.0).unwrap();
        assert_eq!(t.probs(), &[0.25; 4]);
    }

    #[test]
    fn marginal_of_uniform_pair() {
        let cards = Cardinalities::binary(2);
        let t = uniform_joint(&cards, &[v(1), v(2)]).unwrap();
        let m = t.marginalize(&[v(1)]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_full_scope_is_identity() {
        let t = xor_joint();
        let m = t.marginalize(&[v(1), v(2), v(3)]).unwrap();
        assert_eq!(m.probs(), t.probs());
    }

    #[test]
    fn xor_marginal_is_uniform() {
        let t = xor_joint();
        let m = t.marginalize(&[v(3)]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
        assert!(matches!(
            t.marginalize(&[v(4)]),
            Err(MkError::UnknownVariable(4))
        ));
    }

    #[test]
    fn conditional_of_independent_uniform() {
        let cards = Cardinalities::binary(2);
        let t = uniform_joint(&cards, &[v(1), v(2)]).unwrap();
        let c = t.conditional(v(1), &[v(2)]).unwrap();
        assert_eq!(c.probs, vec![0.5; 4]);
    }

    #[test]
    fn conditional_of_xor_is_deterministic() {
        let t = xor_joint();
        let c = t.conditional(v(3), &[v(1), v(2)]).unwrap();
        for x in 0..2u32 {
            for y in 0..2u32 {
                let z = x ^ y;
                assert_eq!(c.prob(z, &[x, y]), 1.0);
                assert_eq!(c.prob(1 - z, &[x, y]), 0.0);
            }
        }
    }

    #[test]
    fn conditional_on_empty_set_is_marginal() {
        let t = xor_joint();
        let c = t.conditional(v(1), &[]).unwrap();
        assert_eq!(c.probs, vec![0.5, 0.5]);
        assert!(t.conditional(v(1), &[v(1)]).is_err());
    }

    #[test]
    fn marginalize_composes() {
        let t = xor_joint();
        let a = t.marginalize(&[v(1), v(3)]).unwrap();
        let b = a.marginalize(&[v(3)]).unwrap();
        let direct = t.marginalize(&[v(3)]).unwrap();
        for (x, y) in b.probs().iter().zip(direct.probs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_reconstructs_marginal() {
        let t = xor_joint();
        let c = t.conditional(v(3), &[v(1), v(2)]).unwrap();
        let g = t.marginalize(&[v(1), v(2)]).unwrap();
        for z in 0..2u32 {
            let mut total = 0.0;
            for (ga, gp) in g.iter_assignments() {
                total += gp * c.prob(z, &ga);
            }
            assert!((total - 0.5).abs() < 1e-12);
        }
    }
}
