//! Exact inference on per-sentence factor graphs.

mod bp;
mod brute;
mod graph;

pub use bp::{max_product, sum_product, InferenceResult, MessageSet};
pub use brute::{brute_force, MAX_ASSIGNMENTS};
pub use graph::{BinaryFactor, FactorGraph};

use crate::error::{Error, Result};
use crate::model::{EdgeKey, ModelParams, UnaryConstraint};
use crate::treebank::{DepSentence, TagDomainTable, UnknownSubtagPolicy};

/// Builds the factor graph of a sentence: one unary factor per token from
/// `constraints` and one binary factor per dependency edge, enumerated over
/// the two endpoint domains. The root has no factor toward ROOT.
pub fn build_instance(
    sentence: &DepSentence,
    domains: &TagDomainTable,
    params: &ModelParams,
    constraints: &[UnaryConstraint],
    policy: UnknownSubtagPolicy,
) -> Result<FactorGraph> {
    let n = sentence.len();
    if domains.len() != n || constraints.len() != n {
        return Err(Error::Data(format!(
            "sentence {} has {} tokens but {} domains and {} constraints",
            sentence.id(),
            n,
            domains.len(),
            constraints.len()
        )));
    }
    let mut unary = Vec::with_capacity(n);
    for (i, c) in constraints.iter().enumerate() {
        if let UnaryConstraint::Clamp(tag) = c {
            if domains.index_of(i, tag).is_none() {
                return Err(Error::Constraint {
                    position: i + 1,
                    message: format!("clamped tag {} is not in the domain", tag),
                });
            }
        }
        unary.push(domains.domain(i).iter().map(|m| c.log_phi(m)).collect());
    }

    let tokens = sentence.tokens();
    let mut factors = Vec::with_capacity(n.saturating_sub(1));
    for e in sentence.edges() {
        let key = EdgeKey::new(&tokens[e.child].pos, &tokens[e.head].pos, e.label);
        let table = params.log_psi_table(&key, domains.domain(e.child), domains.domain(e.head), policy)?;
        factors.push(BinaryFactor {
            dependent: e.child,
            head: e.head,
            table: table.into(),
        });
    }
    FactorGraph::new(unary, factors)
}
