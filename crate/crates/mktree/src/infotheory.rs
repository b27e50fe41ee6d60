//! Entropy, Kullback-Leibler divergence, and set-valued mutual information.
//!
//! Everything is measured in bits (log base 2), with the conventions
//! `0 * log 0 = 0` and `p * log(p/0) = +inf`; the infinite case carries an
//! explicit flag rather than poisoning arithmetic silently.

use crate::error::{MkError, Result};
use crate::tables::{JointTable, VariableId};

/// A quantity of information in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Bits(pub f64);

impl Bits {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// KL divergence result; `finite == false` means p puts mass where q has none
/// and `bits` is `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlDivergence {
    pub bits: f64,
    pub finite: bool,
}

/// Shannon entropy of the table, in bits.
pub fn entropy(table: &JointTable) -> Bits {
    let mut h = 0.0;
    for &p in table.probs() {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    // -0.0 from rounding of a point mass.
    Bits(if h == 0.0 { 0.0 } else { h })
}

/// KL divergence D(p || q) in bits. Scopes must match exactly.
pub fn kl_divergence(p: &JointTable, q: &JointTable) -> Result<KlDivergence> {
    if p.scope() != q.scope() || p.cards() != q.cards() {
        return Err(MkError::ScopeMismatch(
            "KL divergence needs identical scopes".into(),
        ));
    }
    let mut d = 0.0;
    for (&pp, &qq) in p.probs().iter().zip(q.probs()) {
        if pp > 0.0 {
            if qq == 0.0 {
                return Ok(KlDivergence {
                    bits: f64::INFINITY,
                    finite: false,
                });
            }
            d += pp * (pp / qq).log2();
        }
    }
    Ok(KlDivergence {
        bits: if d <= 0.0 { 0.0 } else { d },
        finite: true,
    })
}

/// Set-valued mutual information I(x; c) = D( P(x,c) || P(x) P(c) ),
/// computed from marginals of `joint`. I(x; {}) = 0 by convention; the
/// orientation root contributes nothing to a delta score.
pub fn mutual_information(joint: &JointTable, x: VariableId, c: &[VariableId]) -> Result<Bits> {
    if c.contains(&x) {
        return Err(MkError::ScopeMismatch(format!(
            "{x} cannot appear in its own conditioning set"
        )));
    }
    if c.is_empty() {
        return Ok(Bits(0.0));
    }
    let mut scope = vec![x];
    scope.extend_from_slice(c);
    let pxc = joint.marginalize(&scope)?;
    let px = pxc.marginalize(&[x])?;
    let pc = pxc.marginalize(c)?;
    let x_pos = pxc.scope().iter().position(|&s| s == x).expect("x in scope");
    let mut mi = 0.0;
    for (assignment, p) in pxc.iter_assignments() {
        if p <= 0.0 {
            continue;
        }
        let mut c_states = assignment.clone();
        c_states.remove(x_pos);
        let q = px.probs()[assignment[x_pos] as usize] * pc.prob(&c_states);
        // q == 0 cannot happen when p > 0: marginals dominate the joint.
        mi += p * (p / q).log2();
    }
    Ok(Bits(if mi <= 0.0 { 0.0 } else { mi }))
}
