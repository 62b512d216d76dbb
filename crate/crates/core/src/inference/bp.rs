//! Two-pass belief propagation on a tree, in log space.
//!
//! The upward pass sends each variable's subtree message to its head through
//! the connecting factor; the downward pass sends the complementary message
//! back. Messages are shifted by their maximum after every step; upward
//! shifts are accumulated into `log Z`.
//!
//! The unary factor sends `phi_i` itself to its variable. Multiplying by the
//! variable's own incoming message there would count the rest of the tree
//! twice in the belief.

use serde::Serialize;

use super::graph::{log_sum_exp, FactorGraph};
use crate::error::{Error, Result};

/// Factor-to-variable messages per binary factor, in log space and
/// max-normalized.
#[derive(Clone, Debug, Default, Serialize)]
pub struct MessageSet {
    /// Dependent to head, over the head's domain.
    pub upward: Vec<Vec<f64>>,
    /// Head to dependent, over the dependent's domain.
    pub downward: Vec<Vec<f64>>,
    /// Sum of the shifts removed from upward messages.
    pub log_normalizer: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InferenceResult {
    /// Natural log of the partition function.
    pub log_z: f64,
    pub node_marginals: Vec<Vec<f64>>,
    /// Per binary factor, row-major joint over (dependent, head).
    pub edge_marginals: Vec<Vec<f64>>,
    /// Highest-scoring assignment, when computed.
    pub argmax: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub messages: Option<MessageSet>,
}

impl InferenceResult {
    /// Structured-text dump for inspection.
    pub fn debug_dump(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

fn shift(m: &mut [f64]) -> f64 {
    let max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max > f64::NEG_INFINITY {
        m.iter_mut().for_each(|x| *x -= max);
    }
    max
}

/// Messages entering `v` from every factor except the one to child `skip`,
/// plus `v`'s own unary and downward message.
fn exclusive(
    graph: &FactorGraph,
    v: usize,
    downward: &[f64],
    upward: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    let kids = graph.child_factors(v);
    let d = graph.unary()[v].len();
    // prefix[i] = sum of messages from kids[..i], suffix[i] = from kids[i..]
    let mut prefix = vec![vec![0.0; d]; kids.len() + 1];
    for (i, &f) in kids.iter().enumerate() {
        for x in 0..d {
            prefix[i + 1][x] = prefix[i][x] + upward[f][x];
        }
    }
    let mut suffix = vec![vec![0.0; d]; kids.len() + 1];
    for (i, &f) in kids.iter().enumerate().rev() {
        for x in 0..d {
            suffix[i][x] = suffix[i + 1][x] + upward[f][x];
        }
    }
    (0..kids.len())
        .map(|i| {
            (0..d)
                .map(|x| graph.unary()[v][x] + downward[x] + prefix[i][x] + suffix[i + 1][x])
                .collect()
        })
        .collect()
}

/// Computes `log Z`, node marginals and edge marginals.
pub fn sum_product(graph: &FactorGraph) -> Result<InferenceResult> {
    let n = graph.num_variables();
    let sizes = graph.domain_sizes();
    let factors = graph.factors();

    // inside[v]: unary plus all messages from v's dependents
    let mut inside: Vec<Vec<f64>> = graph.unary().to_vec();
    let mut upward: Vec<Vec<f64>> = vec![Vec::new(); factors.len()];
    let mut log_normalizer = 0.0;

    for &v in graph.preorder().iter().rev() {
        let Some(f) = graph.parent_factor(v) else { continue };
        let h = factors[f].head;
        let (dv, dh) = (sizes[v], sizes[h]);
        let table = &factors[f].table;
        let mut msg: Vec<f64> = (0..dh)
            .map(|xh| log_sum_exp((0..dv).map(|xv| table[xv * dh + xh] + inside[v][xv])))
            .collect();
        let s = shift(&mut msg);
        if s == f64::NEG_INFINITY {
            return Err(Error::Inconsistent(v));
        }
        log_normalizer += s;
        for xh in 0..dh {
            inside[h][xh] += msg[xh];
        }
        upward[f] = msg;
    }

    let mut log_z = log_normalizer;
    for v in (0..n).filter(|&v| graph.parent_factor(v).is_none()) {
        let s = log_sum_exp(inside[v].iter().copied());
        if s == f64::NEG_INFINITY {
            return Err(Error::Inconsistent(v));
        }
        log_z += s;
    }

    let mut downward: Vec<Vec<f64>> = vec![Vec::new(); factors.len()];
    let mut node_marginals = vec![Vec::new(); n];
    let mut edge_marginals = vec![Vec::new(); factors.len()];

    for &v in graph.preorder() {
        let down_v = match graph.parent_factor(v) {
            Some(f) => downward[f].clone(),
            None => vec![0.0; sizes[v]],
        };
        let belief: Vec<f64> = inside[v].iter().zip(&down_v).map(|(a, b)| a + b).collect();
        let norm = log_sum_exp(belief.iter().copied());
        if norm == f64::NEG_INFINITY {
            return Err(Error::Inconsistent(v));
        }
        node_marginals[v] = belief.iter().map(|b| (b - norm).exp()).collect();

        let excl = exclusive(graph, v, &down_v, &upward);
        for (&f, out) in graph.child_factors(v).iter().zip(excl) {
            let c = factors[f].dependent;
            let (dc, dv) = (sizes[c], sizes[v]);
            let table = &factors[f].table;
            let mut msg: Vec<f64> = (0..dc)
                .map(|xc| log_sum_exp((0..dv).map(|xv| table[xc * dv + xv] + out[xv])))
                .collect();
            shift(&mut msg);
            downward[f] = msg;

            let joint: Vec<f64> = (0..dc)
                .flat_map(|xc| {
                    let inside_c = inside[c][xc];
                    let out = &out;
                    (0..dv).map(move |xv| inside_c + table[xc * dv + xv] + out[xv])
                })
                .collect();
            let jn = log_sum_exp(joint.iter().copied());
            if jn == f64::NEG_INFINITY {
                return Err(Error::Inconsistent(c));
            }
            edge_marginals[f] = joint.iter().map(|j| (j - jn).exp()).collect();
        }
    }

    Ok(InferenceResult {
        log_z,
        node_marginals,
        edge_marginals,
        argmax: None,
        messages: Some(MessageSet {
            upward,
            downward,
            log_normalizer,
        }),
    })
}

/// Exact highest-scoring assignment. Ties go to the lowest domain index,
/// deciding variables in [`FactorGraph::preorder`] order.
pub fn max_product(graph: &FactorGraph) -> Result<Vec<usize>> {
    let n = graph.num_variables();
    let sizes = graph.domain_sizes();
    let factors = graph.factors();

    let mut best: Vec<Vec<f64>> = graph.unary().to_vec();
    // back[v][x_head] = best x_v given the head value
    let mut back: Vec<Vec<usize>> = vec![Vec::new(); n];

    for &v in graph.preorder().iter().rev() {
        let Some(f) = graph.parent_factor(v) else { continue };
        let h = factors[f].head;
        let (dv, dh) = (sizes[v], sizes[h]);
        let table = &factors[f].table;
        let mut pointers = Vec::with_capacity(dh);
        for xh in 0..dh {
            let mut arg = 0;
            let mut val = f64::NEG_INFINITY;
            for xv in 0..dv {
                let s = table[xv * dh + xh] + best[v][xv];
                if s > val {
                    val = s;
                    arg = xv;
                }
            }
            best[h][xh] += val;
            pointers.push(arg);
        }
        back[v] = pointers;
    }

    let mut assignment = vec![0; n];
    for &v in graph.preorder() {
        match graph.parent_factor(v) {
            Some(f) => assignment[v] = back[v][assignment[factors[f].head]],
            None => {
                let mut arg = 0;
                let mut val = f64::NEG_INFINITY;
                for (x, &s) in best[v].iter().enumerate() {
                    if s > val {
                        val = s;
                        arg = x;
                    }
                }
                if val == f64::NEG_INFINITY {
                    return Err(Error::Inconsistent(v));
                }
                assignment[v] = arg;
            }
        }
    }
    Ok(assignment)
}
