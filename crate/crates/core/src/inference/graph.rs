use std::sync::Arc;

use crate::error::{Error, Result};

/// A pairwise factor between a dependent variable and its head, stored as
/// `log psi` in row-major order (rows: dependent domain, columns: head domain).
#[derive(Clone, Debug)]
pub struct BinaryFactor {
    pub dependent: usize,
    pub head: usize,
    pub table: Arc<[f64]>,
}

/// Tree-shaped factor graph in log space: one unary factor per variable and
/// one binary factor per dependency edge.
#[derive(Clone, Debug)]
pub struct FactorGraph {
    unary: Vec<Vec<f64>>,
    factors: Vec<BinaryFactor>,
    /// Per variable, the factor linking it to its head.
    parent: Vec<Option<usize>>,
    /// Per variable, factors whose head is this variable, in factor order.
    children: Vec<Vec<usize>>,
    preorder: Vec<usize>,
}

fn bad_value(x: f64) -> bool {
    x.is_nan() || x == f64::INFINITY
}

impl FactorGraph {
    /// Checks shapes and values and that the factors form a forest in which
    /// every variable has at most one head.
    pub fn new(unary: Vec<Vec<f64>>, factors: Vec<BinaryFactor>) -> Result<Self> {
        let n = unary.len();
        for (v, u) in unary.iter().enumerate() {
            if u.is_empty() {
                return Err(Error::Data(format!("variable {} has an empty domain", v)));
            }
            if u.iter().copied().any(bad_value) {
                return Err(Error::NonFinite(format!("unary factor of variable {}", v)));
            }
            if u.iter().all(|&x| x == f64::NEG_INFINITY) {
                return Err(Error::Constraint {
                    position: v,
                    message: "every value is forbidden".into(),
                });
            }
        }
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        for (f, factor) in factors.iter().enumerate() {
            let (d, h) = (factor.dependent, factor.head);
            if d >= n || h >= n || d == h {
                return Err(Error::Data(format!("factor {} links {} and {}", f, d, h)));
            }
            if parent[d].is_some() {
                return Err(Error::Data(format!("variable {} has two heads", d)));
            }
            if factor.table.len() != unary[d].len() * unary[h].len() {
                return Err(Error::Data(format!(
                    "factor {} has {} entries, expected {}x{}",
                    f,
                    factor.table.len(),
                    unary[d].len(),
                    unary[h].len()
                )));
            }
            if factor.table.iter().copied().any(bad_value) {
                return Err(Error::NonFinite(format!("binary factor {}", f)));
            }
            parent[d] = Some(f);
            children[h].push(f);
        }

        let mut preorder = Vec::with_capacity(n);
        let mut stack: Vec<usize> = (0..n).filter(|&v| parent[v].is_none()).rev().collect();
        while let Some(v) = stack.pop() {
            preorder.push(v);
            for &f in children[v].iter().rev() {
                stack.push(factors[f].dependent);
            }
        }
        if preorder.len() != n {
            return Err(Error::Data("factor graph contains a cycle".into()));
        }
        Ok(FactorGraph {
            unary,
            factors,
            parent,
            children,
            preorder,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.unary.len()
    }

    pub fn domain_sizes(&self) -> Vec<usize> {
        self.unary.iter().map(Vec::len).collect()
    }

    pub fn unary(&self) -> &[Vec<f64>] {
        &self.unary
    }

    pub fn factors(&self) -> &[BinaryFactor] {
        &self.factors
    }

    pub(crate) fn parent_factor(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub(crate) fn child_factors(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Roots first; each variable precedes its dependents, which are visited
    /// in factor order. This is also the significance order of tie-breaking.
    pub fn preorder(&self) -> &[usize] {
        &self.preorder
    }

    /// Unnormalized log score of a full assignment (domain indices).
    pub fn log_score(&self, assignment: &[usize]) -> f64 {
        let mut s: f64 = self
            .unary
            .iter()
            .zip(assignment)
            .map(|(u, &x)| u[x])
            .sum();
        for f in &self.factors {
            let cols = self.unary[f.head].len();
            s += f.table[assignment[f.dependent] * cols + assignment[f.head]];
        }
        s
    }

    /// Adds `log c` to every entry of one binary factor.
    pub fn scale_factor(&mut self, factor: usize, log_c: f64) {
        let t: Vec<f64> = self.factors[factor].table.iter().map(|x| x + log_c).collect();
        self.factors[factor].table = t.into();
    }

    /// Adds `log c` to every entry of one unary factor.
    pub fn scale_unary(&mut self, variable: usize, log_c: f64) {
        self.unary[variable].iter_mut().for_each(|x| *x += log_c);
    }

    /// Replaces one unary factor.
    pub fn set_unary(&mut self, variable: usize, values: Vec<f64>) -> Result<()> {
        if values.len() != self.unary[variable].len() {
            return Err(Error::Data("unary factor shape changed".into()));
        }
        self.unary[variable] = values;
        Ok(())
    }
}

pub(crate) fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.into_iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}
