//! Per-node update rules: the plain linear consensus update (LCP), the
//! ARC-P extreme-value filter with deterministic tie-breaking, weight
//! policies for both time modes, and the continuous-time functional form
//! (sort, weighted zero-selective reduce, and their composition).
//!
//! All functions here are pure and reentrant. Within one synchronous
//! round every node reads the same immutable previous state, never
//! partially updated values. Updates are computed in offset form
//! `x_i + sum w_ij (x_j - x_i)`, which is algebraically identical to the
//! row-sum-zero forward-difference form and keeps a node whose kept
//! neighbors all equal its own value bit-exactly stationary.

use std::collections::BTreeMap;

use crate::digraph::{Digraph, NodeId};
use crate::error::{Error, Result};

/// Bounds and rule for the update weights.
///
/// Discrete mode: kept-neighbor weights are at least `alpha` and the
/// (implied) self-weight is at least `alpha - 1`, with each weight row
/// summing to zero. Continuous mode: kept-neighbor weights lie in
/// `[alpha, beta]` and the self-weight is the negated neighbor sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPolicy {
    pub alpha: f64,
    pub beta: f64,
    pub rule: WeightRule,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightRule {
    /// Discrete: `1/(1 + d_i - |R_i|)` per kept neighbor. Continuous:
    /// unit weight per kept neighbor.
    UniformSimple,
    /// Explicit per-edge table keyed by `(i, j)`: the weight node `i`
    /// assigns to neighbor `j`. Self-weights are always derived.
    Custom(BTreeMap<(u32, u32), f64>),
}

impl WeightPolicy {
    /// Uniform policy for a discrete-time run on a graph of `n` nodes.
    /// `alpha = 1/n` is a valid lower bound for every in-degree (capped
    /// at 1/2 so tiny graphs keep alpha strictly below 1).
    pub fn uniform_discrete(n: usize) -> Self {
        WeightPolicy {
            alpha: (1.0 / n.max(1) as f64).min(0.5),
            beta: 1.0,
            rule: WeightRule::UniformSimple,
        }
    }

    /// Unit-weight policy for continuous-time runs.
    pub fn uniform_continuous() -> Self {
        WeightPolicy {
            alpha: 1.0,
            beta: 1.0,
            rule: WeightRule::UniformSimple,
        }
    }

    pub fn custom(alpha: f64, beta: f64, table: BTreeMap<(u32, u32), f64>) -> Self {
        WeightPolicy {
            alpha,
            beta,
            rule: WeightRule::Custom(table),
        }
    }

    /// Weight node `i` assigns to kept neighbor `j` in continuous mode.
    pub fn continuous_weight(&self, i: NodeId, j: NodeId) -> Result<f64> {
        match &self.rule {
            WeightRule::UniformSimple => Ok(1.0),
            WeightRule::Custom(table) => table.get(&(i.0, j.0)).copied().ok_or_else(|| {
                Error::Config(format!("weight table has no entry for edge ({j}, {i})"))
            }),
        }
    }

    /// Checks the discrete-mode weight conditions against a graph.
    pub fn validate_discrete(&self, g: &Digraph) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "discrete mode needs 0 < alpha < 1, got {}",
                self.alpha
            )));
        }
        match &self.rule {
            WeightRule::UniformSimple => {
                let d_max = g
                    .nodes()
                    .map(|i| g.in_degree(i).expect("valid node"))
                    .max()
                    .unwrap_or(0);
                if self.alpha > 1.0 / (1.0 + d_max as f64) {
                    return Err(Error::Config(format!(
                        "alpha {} exceeds the uniform weight 1/(1+{d_max})",
                        self.alpha
                    )));
                }
            }
            WeightRule::Custom(table) => {
                for i in g.nodes() {
                    let mut row = 0.0;
                    for &j in g.in_neighbors(i)? {
                        let w = self.continuous_weight(i, j)?;
                        if w < self.alpha {
                            return Err(Error::Config(format!(
                                "weight {w} for edge ({j}, {i}) is below alpha {}",
                                self.alpha
                            )));
                        }
                        row += w;
                    }
                    // self-weight -row must stay at or above alpha - 1 for
                    // every kept subset; the full row is the worst case
                    if row > 1.0 - self.alpha {
                        return Err(Error::Config(format!(
                            "weights into node {i} sum to {row}, forcing a self-weight below alpha - 1"
                        )));
                    }
                }
                for &(i, j) in table.keys() {
                    if !g.has_edge(NodeId(j), NodeId(i)) {
                        return Err(Error::Config(format!(
                            "weight table entry ({j}, {i}) is not an edge"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Checks the continuous-mode weight conditions against a graph.
    pub fn validate_continuous(&self, g: &Digraph) -> Result<()> {
        if self.alpha <= 0.0 {
            return Err(Error::Config("alpha must be positive".into()));
        }
        if self.beta < self.alpha {
            return Err(Error::Config(format!(
                "beta {} must be at least alpha {}",
                self.beta, self.alpha
            )));
        }
        match &self.rule {
            WeightRule::UniformSimple => {
                if self.alpha > 1.0 || self.beta < 1.0 {
                    return Err(Error::Config(
                        "uniform continuous weights are 1, so alpha <= 1 <= beta is required"
                            .into(),
                    ));
                }
                Ok(())
            }
            WeightRule::Custom(_) => {
                for i in g.nodes() {
                    for &j in g.in_neighbors(i)? {
                        let w = self.continuous_weight(i, j)?;
                        if w < self.alpha || w > self.beta {
                            return Err(Error::Config(format!(
                                "weight {w} for edge ({j}, {i}) is outside [{}, {}]",
                                self.alpha, self.beta
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// Which neighbor values a node discards in one round, and which it keeps.
/// The kept set always contains the node itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterOutcome {
    pub node: NodeId,
    /// Removed neighbor ids, sorted ascending.
    pub removed: Vec<NodeId>,
    /// Kept ids (neighbors plus self), sorted ascending.
    pub kept: Vec<NodeId>,
}

/// The extreme-value filter: with parameter `f`, discard the values
/// strictly larger than one's own (all of them if there are fewer than
/// `f`, otherwise exactly the `f` largest), and symmetrically below.
/// Ties among equal values are broken deterministically by removing the
/// larger node id, so smaller ids are kept.
pub fn arcp_filter(
    self_id: NodeId,
    self_value: f64,
    neighbor_values: &[(NodeId, f64)],
    f: u32,
) -> Result<FilterOutcome> {
    let mut seen = std::collections::BTreeSet::new();
    for &(id, _) in neighbor_values {
        if id == self_id {
            return Err(Error::Input(format!(
                "neighbor list for node {self_id} contains the node itself"
            )));
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateNeighbor(id.0));
        }
    }
    let f = f as usize;

    let mut larger: Vec<(NodeId, f64)> = neighbor_values
        .iter()
        .copied()
        .filter(|&(_, v)| v > self_value)
        .collect();
    let mut smaller: Vec<(NodeId, f64)> = neighbor_values
        .iter()
        .copied()
        .filter(|&(_, v)| v < self_value)
        .collect();

    let mut removed: Vec<NodeId> = Vec::new();
    if larger.len() <= f {
        removed.extend(larger.iter().map(|&(id, _)| id));
    } else {
        // largest values first; among equals the larger id goes first
        larger.sort_by(|a, b| b.1.total_cmp(&a.1).then(b.0.cmp(&a.0)));
        removed.extend(larger[..f].iter().map(|&(id, _)| id));
    }
    if smaller.len() <= f {
        removed.extend(smaller.iter().map(|&(id, _)| id));
    } else {
        // smallest values first; among equals the larger id goes first
        smaller.sort_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        removed.extend(smaller[..f].iter().map(|&(id, _)| id));
    }
    removed.sort_unstable();

    let mut kept: Vec<NodeId> = neighbor_values
        .iter()
        .map(|&(id, _)| id)
        .filter(|id| removed.binary_search(id).is_err())
        .collect();
    kept.push(self_id);
    kept.sort_unstable();

    Ok(FilterOutcome {
        node: self_id,
        removed,
        kept,
    })
}

/// Discrete-mode weights for a filter outcome, keyed by node id and
/// including the self-weight. Uniform rule: each kept neighbor gets
/// `1/(1 + d_i - |R_i|)` and self gets `(|R_i| - d_i)/(1 + d_i - |R_i|)`.
pub fn discrete_weights(
    outcome: &FilterOutcome,
    policy: &WeightPolicy,
    d_i: usize,
) -> Result<BTreeMap<NodeId, f64>> {
    if outcome.kept.is_empty() || !outcome.kept.contains(&outcome.node) {
        return Err(Error::Input("kept set must contain the node itself".into()));
    }
    let kept_neighbors = outcome.kept.len() - 1;
    let removed = outcome.removed.len();
    if kept_neighbors + removed != d_i {
        return Err(Error::Input(format!(
            "kept ({kept_neighbors}) plus removed ({removed}) neighbors do not match d_i = {d_i}"
        )));
    }
    let mut weights = BTreeMap::new();
    match &policy.rule {
        WeightRule::UniformSimple => {
            let denom = 1.0 + (d_i - removed) as f64;
            for &j in &outcome.kept {
                if j != outcome.node {
                    weights.insert(j, 1.0 / denom);
                }
            }
            weights.insert(outcome.node, (removed as f64 - d_i as f64) / denom);
        }
        WeightRule::Custom(_) => {
            let mut row = 0.0;
            for &j in &outcome.kept {
                if j != outcome.node {
                    let w = policy.continuous_weight(outcome.node, j)?;
                    if w < policy.alpha {
                        return Err(Error::Config(format!(
                            "weight {w} for kept neighbor {j} is below alpha {}",
                            policy.alpha
                        )));
                    }
                    weights.insert(j, w);
                    row += w;
                }
            }
            if -row < policy.alpha - 1.0 {
                return Err(Error::Config(format!(
                    "self-weight {} falls below alpha - 1",
                    -row
                )));
            }
            weights.insert(outcome.node, -row);
        }
    }
    Ok(weights)
}

/// One discrete update: `x_i + sum over kept of w_ij (x_j - x_i)`, a
/// convex combination of the kept values and the node's own. The self
/// entry, if present in `kept_values`, contributes exactly zero.
pub fn discrete_step_value(
    self_value: f64,
    kept_values: &[(NodeId, f64)],
    weights: &BTreeMap<NodeId, f64>,
) -> Result<f64> {
    let mut delta = 0.0;
    for &(id, value) in kept_values {
        let w = weights
            .get(&id)
            .ok_or_else(|| Error::Config(format!("no weight for kept node {id}")))?;
        delta += w * (value - self_value);
    }
    Ok(self_value + delta)
}

/// Ascending stable sort: equal values keep their input order, so pairing
/// weights to neighbors stays deterministic.
pub fn sort_ascending(z: &[f64]) -> Vec<f64> {
    let mut out = z.to_vec();
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

/// Stable ascending sort returning the permutation: `out[l] = z[perm[l]]`.
fn sort_with_permutation(z: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..z.len()).collect();
    idx.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    let sorted = idx.iter().map(|&i| z[i]).collect();
    (sorted, idx)
}

/// The weighted zero-selective reduce on an ascending vector `z` of `k`
/// entries: clamps the `f` smallest entries through `max(z, 0)`-style
/// selection and the `f` largest through `min(z, 0)`, keeps the middle
/// verbatim, and collapses to zero when `k <= f`.
pub fn reduce_zero_selective(z: &[f64], w: &[f64], f: u32) -> Result<f64> {
    if z.len() != w.len() {
        return Err(Error::Input(format!(
            "value vector (len {}) and weight vector (len {}) must match",
            z.len(),
            w.len()
        )));
    }
    if z.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::Input("z must be sorted ascending".into()));
    }
    let k = z.len();
    let f = f as usize;
    if k <= f {
        return Ok(0.0);
    }
    let keep_nonneg = |v: f64| if v >= 0.0 { v } else { 0.0 };
    let keep_nonpos = |v: f64| if v <= 0.0 { v } else { 0.0 };
    let mut acc = 0.0;
    if k > 2 * f {
        for l in 0..k {
            if l < f {
                acc += w[l] * keep_nonneg(z[l]);
            } else if l < k - f {
                acc += w[l] * z[l];
            } else {
                acc += w[l] * keep_nonpos(z[l]);
            }
        }
    } else {
        // f < k <= 2f: low block clamped nonnegative, high block clamped
        // nonpositive, anything strictly between the blocks dropped
        for l in 0..k {
            if l < k - f {
                acc += w[l] * keep_nonneg(z[l]);
            } else if l >= f {
                acc += w[l] * keep_nonpos(z[l]);
            }
        }
    }
    Ok(acc)
}

/// Composition of sort and reduce. `w[l]` is paired with `z[l]` by input
/// position (neighbor id order) and follows its entry through the sort.
pub fn phi(z: &[f64], w: &[f64], f: u32) -> Result<f64> {
    if z.len() != w.len() {
        return Err(Error::Input(format!(
            "phi needs matching lengths, got {} values and {} weights",
            z.len(),
            w.len()
        )));
    }
    let (sorted, perm) = sort_with_permutation(z);
    let w_sorted: Vec<f64> = perm.iter().map(|&i| w[i]).collect();
    reduce_zero_selective(&sorted, &w_sorted, f)
}

/// Continuous-time ARC-P rate of node `i`: the filter composition applied
/// to the offset vector `x_j - x_i` over its in-neighbors.
pub fn continuous_rate(
    i: NodeId,
    x: &[f64],
    g: &Digraph,
    f: u32,
    policy: &WeightPolicy,
) -> Result<f64> {
    let xi = x[i.index()];
    let neighbors = g.in_neighbors(i)?;
    let mut z = Vec::with_capacity(neighbors.len());
    let mut w = Vec::with_capacity(neighbors.len());
    for &j in neighbors {
        z.push(x[j.index()] - xi);
        w.push(policy.continuous_weight(i, j)?);
    }
    phi(&z, &w, f)
}

/// Unfiltered linear consensus rate: `sum over in-neighbors of
/// w_ij (x_j - x_i)`.
pub fn lcp_rate(i: NodeId, x: &[f64], g: &Digraph, policy: &WeightPolicy) -> Result<f64> {
    let xi = x[i.index()];
    let mut acc = 0.0;
    for &j in g.in_neighbors(i)? {
        acc += policy.continuous_weight(i, j)? * (x[j.index()] - xi);
    }
    Ok(acc)
}

/// One unfiltered discrete update with the policy's weights over the full
/// inclusive neighborhood.
pub fn lcp_step(i: NodeId, x: &[f64], g: &Digraph, policy: &WeightPolicy) -> Result<f64> {
    let xi = x[i.index()];
    let neighbors = g.in_neighbors(i)?;
    let mut acc = 0.0;
    match &policy.rule {
        WeightRule::UniformSimple => {
            let w = 1.0 / (1.0 + neighbors.len() as f64);
            for &j in neighbors {
                acc += w * (x[j.index()] - xi);
            }
        }
        WeightRule::Custom(_) => {
            for &j in neighbors {
                acc += policy.continuous_weight(i, j)? * (x[j.index()] - xi);
            }
        }
    }
    Ok(xi + acc)
}
