//! The Markov k-tree probabilistic model: a k-tree topology plus one
//! conditional table per vertex under an induced acyclic orientation.
//!
//! The model joint is the product of the per-vertex conditionals; it does not
//! depend on which creation order produced the orientation, and its divergence
//! from a reference joint decomposes as
//! `KL = -delta + sum_i H(X_i) - H(X)` with `delta = sum_i I(X_i; parents)`.

use crate::error::{MkError, Result};
use crate::infotheory::{entropy, kl_divergence, mutual_information, Bits};
use crate::ktree::{
    build_from_order, edge, orient, validate_ktree_seeded, CreationOrder, Edge, KTree, Orientation,
};
use crate::tables::{
    decode, empirical_joint, Cardinalities, ConditionalTable, JointTable, SampleSet, VariableId,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Where probabilities come from: an exact full joint over X1..Xn, or
/// empirical estimation from samples with optional smoothing.
#[derive(Clone, Copy)]
pub enum DataSource<'a> {
    Exact(&'a JointTable),
    Empirical {
        samples: &'a SampleSet,
        cards: &'a Cardinalities,
        pseudocount: f64,
    },
}

impl<'a> DataSource<'a> {
    /// Wraps a full joint; its scope must be exactly X1..Xn in order.
    pub fn exact(joint: &'a JointTable) -> Result<Self> {
        let n = joint.scope().len();
        let expect: Vec<VariableId> = (1..=n as u16).map(VariableId).collect();
        if joint.scope() != expect.as_slice() {
            return Err(MkError::ScopeMismatch(
                "exact data source needs the full joint over X1..Xn in order".into(),
            ));
        }
        Ok(DataSource::Exact(joint))
    }

    pub fn empirical(samples: &'a SampleSet, cards: &'a Cardinalities, pseudocount: f64) -> Result<Self> {
        samples.validate(cards)?;
        Ok(DataSource::Empirical {
            samples,
            cards,
            pseudocount,
        })
    }

    pub fn n_vars(&self) -> usize {
        match self {
            DataSource::Exact(j) => j.scope().len(),
            DataSource::Empirical { cards, .. } => cards.n(),
        }
    }

    pub fn cardinalities(&self) -> Cardinalities {
        match self {
            DataSource::Exact(j) => Cardinalities::new(j.cards().to_vec()).expect("valid table"),
            DataSource::Empirical { cards, .. } => (*cards).clone(),
        }
    }

    /// Joint over `scope` (ascending variable order recommended).
    pub fn marginal(&self, scope: &[VariableId]) -> Result<JointTable> {
        match self {
            DataSource::Exact(j) => j.marginalize(scope),
            DataSource::Empirical {
                samples,
                cards,
                pseudocount,
            } => empirical_joint(samples, cards, scope, *pseudocount),
        }
    }
}

/// A fitted Markov k-tree: topology, orientation, and per-vertex CPTs.
#[derive(Debug, Clone)]
pub struct MarkovKTree {
    tree: KTree,
    order: CreationOrder,
    orientation: Orientation,
    cards: Cardinalities,
    cpts: Vec<ConditionalTable>,
}

impl MarkovKTree {
    pub fn tree(&self) -> &KTree {
        &self.tree
    }

    pub fn order(&self) -> &CreationOrder {
        &self.order
    }

    pub fn orientation(&self) -> &Orientation {
        &self.orientation
    }

    pub fn cardinalities(&self) -> &Cardinalities {
        &self.cards
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn k(&self) -> usize {
        self.tree.k()
    }

    /// CPT of variable v, P(v | parents(v)).
    pub fn cpt(&self, v: VariableId) -> &ConditionalTable {
        &self.cpts[v.idx()]
    }
}

/// Estimates every factor P(X | parents(X)) of the factorization from data.
pub fn fit(tree: &KTree, order: &CreationOrder, dist: &DataSource) -> Result<MarkovKTree> {
    if order.n() != tree.n() || order.k() != tree.k() {
        return Err(MkError::ScopeMismatch("order does not match the tree".into()));
    }
    if dist.n_vars() != tree.n() {
        return Err(MkError::ScopeMismatch(format!(
            "data covers {} variables, tree has {}",
            dist.n_vars(),
            tree.n()
        )));
    }
    let orientation = orient(order);
    let mut cpts = Vec::with_capacity(tree.n());
    for i in 1..=tree.n() as u16 {
        let x = VariableId(i);
        let parents = orientation.parents(x);
        let mut scope: Vec<VariableId> = parents.to_vec();
        scope.push(x);
        scope.sort_unstable();
        let marg = dist.marginal(&scope)?;
        cpts.push(marg.conditional(x, parents)?);
    }
    Ok(MarkovKTree {
        tree: tree.clone(),
        order: order.clone(),
        orientation,
        cards: dist.cardinalities(),
        cpts,
    })
}

/// Probability and log2-probability of a full assignment, computed in log
/// space.
pub fn joint_probability(m: &MarkovKTree, assignment: &[u32]) -> Result<(f64, f64)> {
    if assignment.len() != m.n() {
        return Err(MkError::ScopeMismatch(format!(
            "assignment covers {} variables, model has {}",
            assignment.len(),
            m.n()
        )));
    }
    let mut log2p = 0.0f64;
    for i in 1..=m.n() as u16 {
        let x = VariableId(i);
        let cpt = m.cpt(x);
        let parent_states: Vec<u32> = cpt.given.iter().map(|p| assignment[p.idx()]).collect();
        let p = cpt.prob(assignment[x.idx()], &parent_states);
        if p == 0.0 {
            return Ok((0.0, f64::NEG_INFINITY));
        }
        log2p += p.log2();
    }
    Ok((log2p.exp2(), log2p))
}

/// The model's full joint as a dense table (desk scale only).
pub fn model_joint(m: &MarkovKTree) -> Result<JointTable> {
    let scope = m.cards.all_vars();
    let cards = m.cards.sizes().to_vec();
    let size: usize = cards.iter().map(|&c| c as usize).product();
    let mut probs = vec![0.0; size];
    let mut assignment = vec![0u32; m.n()];
    for (flat, slot) in probs.iter_mut().enumerate() {
        decode(flat, &cards, &mut assignment);
        *slot = joint_probability(m, &assignment)?.0;
    }
    JointTable::new(scope, cards, probs)
}

/// Delta score: the sum of vertex-parent-set mutual information terms. The
/// orientation root contributes nothing.
pub fn delta_score(orientation: &Orientation, dist: &DataSource) -> Result<Bits> {
    Ok(Bits(per_vertex_mi(orientation, dist)?.iter().sum()))
}

/// The individual I(X_i; parents(X_i)) terms, indexed by variable.
pub fn per_vertex_mi(orientation: &Orientation, dist: &DataSource) -> Result<Vec<f64>> {
    let mut terms = Vec::with_capacity(orientation.n());
    for i in 1..=orientation.n() as u16 {
        let x = VariableId(i);
        let parents = orientation.parents(x);
        if parents.is_empty() {
            terms.push(0.0);
            continue;
        }
        let mut scope: Vec<VariableId> = parents.to_vec();
        scope.push(x);
        scope.sort_unstable();
        let marg = dist.marginal(&scope)?;
        terms.push(mutual_information(&marg, x, parents)?.value());
    }
    Ok(terms)
}

/// All four quantities of the KL decomposition, for a full reference joint.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub kl: f64,
    pub kl_finite: bool,
    pub delta: f64,
    pub sum_marginal_entropy: f64,
    pub joint_entropy: f64,
}

impl DivergenceReport {
    /// `kl - (-delta + sum_i H(X_i) - H(X))`; zero up to rounding when the
    /// KL divergence is finite.
    pub fn residual(&self) -> f64 {
        if !self.kl_finite {
            return f64::INFINITY;
        }
        self.kl - (-self.delta + self.sum_marginal_entropy - self.joint_entropy)
    }
}

/// Evaluates KL(dist || model), the delta score, and both entropy terms of
/// the decomposition identity against an exact reference joint.
pub fn divergence_report(dist: &JointTable, m: &MarkovKTree) -> Result<DivergenceReport> {
    let source = DataSource::exact(dist)?;
    if dist.scope().len() != m.n() {
        return Err(MkError::ScopeMismatch(
            "reference joint does not cover the model's variables".into(),
        ));
    }
    let pg = model_joint(m)?;
    let kl = kl_divergence(dist, &pg)?;
    let delta = delta_score(m.orientation(), &source)?.value();
    let mut sum_h = 0.0;
    for v in m.cards.all_vars() {
        sum_h += entropy(&dist.marginalize(&[v])?).value();
    }
    Ok(DivergenceReport {
        kl: kl.bits,
        kl_finite: kl.finite,
        delta,
        sum_marginal_entropy: sum_h,
        joint_entropy: entropy(dist).value(),
    })
}

/// Fits the same k-tree under several distinct creation orders and checks the
/// fitted joints agree pointwise: exact-zero pattern equal, log2-probabilities
/// within 1e-9 where positive, probabilities within 1e-12 everywhere.
pub fn order_invariance_check(
    tree: &KTree,
    dist: &DataSource,
    trials: usize,
    seed: u64,
) -> Result<bool> {
    if trials < 2 {
        return Err(MkError::Infeasible("need at least 2 trials".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut orders: Vec<CreationOrder> = vec![crate::ktree::validate_ktree(tree.edges(), tree.n(), tree.k())?];
    let mut attempts = 0;
    while orders.len() < trials && attempts < trials * 20 {
        attempts += 1;
        let candidate = validate_ktree_seeded(tree.edges(), tree.n(), tree.k(), &mut rng)?;
        if !orders.contains(&candidate) {
            orders.push(candidate);
        }
    }
    let models: Vec<MarkovKTree> = orders
        .iter()
        .map(|o| fit(tree, o, dist))
        .collect::<Result<_>>()?;
    let reference = &models[0];
    let cards = reference.cards.sizes().to_vec();
    let size: usize = cards.iter().map(|&c| c as usize).product();
    let mut assignment = vec![0u32; tree.n()];
    for flat in 0..size {
        decode(flat, &cards, &mut assignment);
        let (p0, l0) = joint_probability(reference, &assignment)?;
        for m in &models[1..] {
            let (p1, l1) = joint_probability(m, &assignment)?;
            let zero_match = (p0 == 0.0) == (p1 == 0.0);
            let log_match = p0 == 0.0 || (l0 - l1).abs() <= 1e-9;
            if !zero_match || !log_match || (p0 - p1).abs() > 1e-12 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// An edge subset of a k-tree; models of tree width strictly below k are the
/// k-tree with some edges dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amendment {
    kept: BTreeSet<Edge>,
}

impl Amendment {
    pub fn new(tree: &KTree, kept: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let kept: BTreeSet<Edge> = kept.into_iter().map(|(u, v)| edge(u, v)).collect();
        for &(u, v) in &kept {
            if !tree.has_edge(u, v) {
                return Err(MkError::ScopeMismatch(format!(
                    "amendment edge ({u},{v}) is not in the k-tree"
                )));
            }
        }
        Ok(Self { kept })
    }

    pub fn all_edges(tree: &KTree) -> Self {
        Self {
            kept: tree.edges().clone(),
        }
    }

    pub fn kept(&self) -> &BTreeSet<Edge> {
        &self.kept
    }

    /// Parent set of x restricted to kept edges.
    pub fn parents(&self, orientation: &Orientation, x: VariableId) -> Vec<VariableId> {
        orientation
            .parents(x)
            .iter()
            .copied()
            .filter(|p| self.kept.contains(&edge(p.0, x.0)))
            .collect()
    }
}

/// Delta score of the amended graph, minus `lambda` per kept edge.
pub fn amended_delta(
    orientation: &Orientation,
    amendment: &Amendment,
    dist: &DataSource,
    lambda: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for i in 1..=orientation.n() as u16 {
        let x = VariableId(i);
        let parents = amendment.parents(orientation, x);
        if parents.is_empty() {
            continue;
        }
        let mut scope = parents.clone();
        scope.push(x);
        scope.sort_unstable();
        let marg = dist.marginal(&scope)?;
        total += mutual_information(&marg, x, &parents)?.value();
    }
    Ok(total - lambda * amendment.kept.len() as f64)
}

/// Serialized model: cardinalities, creation order, and flattened CPTs.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelJson {
    pub k: usize,
    pub n: usize,
    pub cards: Vec<u32>,
    pub order: CreationOrder,
    pub cpts: Vec<CptJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CptJson {
    pub var: u16,
    pub parents: Vec<u16>,
    /// Given-major, target state fastest.
    pub table: Vec<f64>,
}

pub fn to_model_json(m: &MarkovKTree) -> ModelJson {
    ModelJson {
        k: m.k(),
        n: m.n(),
        cards: m.cards.sizes().to_vec(),
        order: m.order.clone(),
        cpts: m
            .cpts
            .iter()
            .map(|c| CptJson {
                var: c.target.0,
                parents: c.given.iter().map(|p| p.0).collect(),
                table: c.probs.clone(),
            })
            .collect(),
    }
}

pub fn from_model_json(json: &ModelJson) -> Result<MarkovKTree> {
    let tree = build_from_order(&json.order)?;
    if tree.n() != json.n || tree.k() != json.k {
        return Err(MkError::Parse("model JSON n/k disagree with the order".into()));
    }
    let cards = Cardinalities::new(json.cards.clone())?;
    if cards.n() != json.n {
        return Err(MkError::Parse("model JSON cardinalities have wrong length".into()));
    }
    let orientation = orient(&json.order);
    let mut cpts: Vec<Option<ConditionalTable>> = vec![None; json.n];
    for c in &json.cpts {
        let x = VariableId(c.var);
        if x.idx() >= json.n {
            return Err(MkError::UnknownVariable(c.var));
        }
        let expect: Vec<VariableId> = orientation.parents(x).to_vec();
        let got: Vec<VariableId> = c.parents.iter().map(|&p| VariableId(p)).collect();
        if got != expect {
            return Err(MkError::Parse(format!(
                "CPT parents of X{} disagree with the orientation",
                c.var
            )));
        }
        let target_card = cards.card(x)?;
        let given_cards: Vec<u32> = expect
            .iter()
            .map(|&p| cards.card(p))
            .collect::<Result<_>>()?;
        let g_size: usize = given_cards.iter().map(|&c| c as usize).product();
        if c.table.len() != g_size * target_card as usize {
            return Err(MkError::Parse(format!("CPT of X{} has wrong length", c.var)));
        }
        for slice in c.table.chunks(target_card as usize) {
            let z: f64 = slice.iter().sum();
            if (z - 1.0).abs() > 1e-9 || slice.iter().any(|&p| p < 0.0) {
                return Err(MkError::Parse(format!(
                    "CPT slice of X{} is not a distribution",
                    c.var
                )));
            }
        }
        cpts[x.idx()] = Some(ConditionalTable {
            target: x,
            target_card,
            given: expect,
            given_cards,
            probs: c.table.clone(),
        });
    }
    let cpts: Vec<ConditionalTable> = cpts
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or(MkError::Parse(format!("missing CPT for X{}", i + 1))))
        .collect::<std::result::Result<_, _>>()?;
    Ok(MarkovKTree {
        order: json.order.clone(),
        orientation,
        tree,
        cards,
        cpts,
    })
}
