//! Exhaustive enumeration, used as an oracle for belief propagation.

use super::bp::InferenceResult;
use super::graph::FactorGraph;
use crate::error::{Error, Result};

/// Largest assignment space [`brute_force`] will enumerate.
pub const MAX_ASSIGNMENTS: u128 = 1_000_000;

/// Enumerates every assignment. Assignments are visited in lexicographic
/// order over [`FactorGraph::preorder`], and only a strictly better score
/// replaces the incumbent, so ties resolve the same way as in
/// [`max_product`](super::max_product).
pub fn brute_force(graph: &FactorGraph) -> Result<InferenceResult> {
    let sizes = graph.domain_sizes();
    let space = sizes
        .iter()
        .fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
    if space > MAX_ASSIGNMENTS {
        return Err(Error::SpaceTooLarge(space));
    }
    let order = graph.preorder().to_vec();
    let n = sizes.len();

    let mut scores = Vec::with_capacity(space as usize);
    let mut assignments = Vec::with_capacity(space as usize);
    let mut current = vec![0usize; n];
    'outer: loop {
        scores.push(graph.log_score(&current));
        assignments.push(current.clone());
        // odometer: the last variable in preorder turns fastest
        for &v in order.iter().rev() {
            current[v] += 1;
            if current[v] < sizes[v] {
                continue 'outer;
            }
            current[v] = 0;
        }
        break;
    }

    let mut best = f64::NEG_INFINITY;
    let mut argmax = None;
    for (i, &s) in scores.iter().enumerate() {
        if s > best {
            best = s;
            argmax = Some(i);
        }
    }
    let Some(argmax) = argmax else {
        return Err(Error::Inconsistent(order.first().copied().unwrap_or(0)));
    };

    let mut total = 0.0;
    let mut node = sizes.iter().map(|&d| vec![0.0; d]).collect::<Vec<_>>();
    let mut edge = graph
        .factors()
        .iter()
        .map(|f| vec![0.0; sizes[f.dependent] * sizes[f.head]])
        .collect::<Vec<_>>();
    for (a, &s) in assignments.iter().zip(&scores) {
        let w = (s - best).exp();
        total += w;
        for (v, &x) in a.iter().enumerate() {
            node[v][x] += w;
        }
        for (f, factor) in graph.factors().iter().enumerate() {
            edge[f][a[factor.dependent] * sizes[factor.head] + a[factor.head]] += w;
        }
    }
    for p in node.iter_mut().chain(edge.iter_mut()) {
        p.iter_mut().for_each(|x| *x /= total);
    }

    Ok(InferenceResult {
        log_z: best + total.ln(),
        node_marginals: node,
        edge_marginals: edge,
        argmax: Some(assignments[argmax].clone()),
        messages: None,
    })
}
