//! Exact decision procedures for r-reachability, (r,s)-reachability,
//! r-robustness and (r,s)-robustness, maximal-robustness reporting, and a
//! degree-guaranteed growth construction.
//!
//! Robustness of a digraph is decided by scanning every pair of nonempty,
//! disjoint node subsets S1, S2 and checking that either every node of one
//! set has at least `r` in-neighbors outside its set, or the two sets
//! together contain at least `s` such nodes. The scan is exponential
//! (on the order of `3^n` pairs), so graphs above an enumeration limit are
//! rejected with a capacity error instead of silently running forever.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digraph::{Digraph, NodeId};
use crate::error::{Error, Result};

/// Default node-count limit for the subset-pair scan. Overridable through
/// the `*_with_limit` variants.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 15;

/// Outcome of a robustness query. A `false` verdict always carries a
/// witness pair on which all three conditions of the definition fail;
/// a `true` verdict never does.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustnessCertificate {
    pub verdict: bool,
    pub witness: Option<Witness>,
}

/// A failing subset pair together with its reach counts: `reach1` nodes of
/// `s1` (and `reach2` of `s2`) have at least `r` in-neighbors outside
/// their set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub s1: Vec<NodeId>,
    pub s2: Vec<NodeId>,
    pub reach1: usize,
    pub reach2: usize,
}

/// Number of nodes in `subset` with at least `r` in-neighbors outside
/// `subset`; equivalently the maximal `s` for which the subset is
/// (r,s)-reachable.
pub fn reach_count(g: &Digraph, subset: &[NodeId], r: u32) -> Result<usize> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let members: BTreeSet<NodeId> = subset.iter().copied().collect();
    if members.len() != subset.len() {
        return Err(Error::Input("subset contains duplicate nodes".into()));
    }
    let mut count = 0;
    for &i in &members {
        let outside = g
            .in_neighbors(i)?
            .iter()
            .filter(|j| !members.contains(j))
            .count();
        if outside >= r as usize {
            count += 1;
        }
    }
    Ok(count)
}

/// True when some node of `subset` has at least `r` in-neighbors outside it.
pub fn is_r_reachable(g: &Digraph, subset: &[NodeId], r: u32) -> Result<bool> {
    Ok(reach_count(g, subset, r)? >= 1)
}

/// Decides (r,s)-robustness with the default enumeration limit.
pub fn is_rs_robust(g: &Digraph, r: u32, s: u32) -> Result<RobustnessCertificate> {
    is_rs_robust_with_limit(g, r, s, DEFAULT_ENUMERATION_LIMIT)
}

/// Decides (r,s)-robustness, scanning every unordered pair of nonempty,
/// disjoint subsets exactly once (the lowest-id node of the union is
/// pinned to S1). Conventions for degenerate graphs: the empty graph is
/// only (0,1)-robust; the trivial graph is (0,1)- and (1,1)-robust.
pub fn is_rs_robust_with_limit(
    g: &Digraph,
    r: u32,
    s: u32,
    limit: usize,
) -> Result<RobustnessCertificate> {
    let n = g.node_count();
    if s == 0 {
        return Err(Error::Input(
            "s = 0 is not allowed in (r,s)-robustness".into(),
        ));
    }
    if n <= 1 {
        let verdict = (r == 0 || (n == 1 && r == 1)) && s == 1;
        return Ok(RobustnessCertificate {
            verdict,
            witness: None,
        });
    }
    if s as usize > n {
        return Err(Error::Input(format!(
            "s = {s} exceeds the node count {n}; only 1 <= s <= n is meaningful"
        )));
    }
    if n > limit {
        return Err(Error::EnumerationCap { n, limit });
    }

    let masks = in_neighbor_masks(g);
    match scan_for_failing_pair(&masks, n, r, s) {
        None => Ok(RobustnessCertificate {
            verdict: true,
            witness: None,
        }),
        Some((m1, m2, reach1, reach2)) => Ok(RobustnessCertificate {
            verdict: false,
            witness: Some(Witness {
                s1: mask_to_nodes(m1),
                s2: mask_to_nodes(m2),
                reach1,
                reach2,
            }),
        }),
    }
}

/// r-robustness is (r,1)-robustness.
pub fn is_r_robust(g: &Digraph, r: u32) -> Result<RobustnessCertificate> {
    is_rs_robust(g, r, 1)
}

pub fn is_r_robust_with_limit(g: &Digraph, r: u32, limit: usize) -> Result<RobustnessCertificate> {
    is_rs_robust_with_limit(g, r, 1, limit)
}

/// The maximal robustness pair `(r*, s*)`: the largest `r` for which the
/// graph is r-robust, then the largest `s` in `[1, n]` at that `r`.
/// Both searches are binary, using monotonicity of robustness in `r` and
/// `s`. When conditions (i)/(ii) of the definition carry every subset
/// pair, `s*` comes out as `n`.
pub fn maximal_robustness(g: &Digraph) -> Result<(u32, u32)> {
    maximal_robustness_with_limit(g, DEFAULT_ENUMERATION_LIMIT)
}

pub fn maximal_robustness_with_limit(g: &Digraph, limit: usize) -> Result<(u32, u32)> {
    let n = g.node_count();
    if n == 0 {
        return Ok((0, 1));
    }
    if n == 1 {
        return Ok((1, 1));
    }
    // Largest r with is_r_robust true. Every digraph on n >= 2 nodes is
    // 0-robust, and none is r-robust beyond r = n - 1.
    let mut lo = 0u32; // known robust
    let mut hi = n as u32; // known not robust (in-degrees cap at n - 1)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if is_r_robust_with_limit(g, mid, limit)?.verdict {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r_star = lo;
    // Largest s in [1, n] with (r*, s)-robust; s = 1 is known true.
    let mut s_lo = 1u32;
    let mut s_hi = n as u32 + 1; // first known-false candidate
    while s_hi - s_lo > 1 {
        let mid = s_lo + (s_hi - s_lo) / 2;
        if is_rs_robust_with_limit(g, r_star, mid, limit)?.verdict {
            s_lo = mid;
        } else {
            s_hi = mid;
        }
    }
    Ok((r_star, s_lo))
}

/// Minimum in-degree over all nodes (0 for the empty graph).
pub fn min_in_degree(g: &Digraph) -> usize {
    g.nodes()
        .map(|i| g.in_degree(i).expect("node from iterator is valid"))
        .min()
        .unwrap_or(0)
}

/// Result of a growth step: the grown graph plus whether the seed's
/// robustness was actually checked (seeds above the enumeration limit are
/// trusted and recorded as uncertified).
#[derive(Debug, Clone)]
pub struct Grown {
    pub graph: Digraph,
    pub seed_certified: bool,
}

/// Attaches one new node to `targets` (edges in both directions). With at
/// least `r + s - 1` attachment targets, growing an (r,s)-robust seed
/// yields an (r,s)-robust graph, so repeated growth never needs
/// re-checking. The seed itself is checked when it fits under `limit`.
pub fn grow(g: &Digraph, r: u32, s: u32, targets: &[NodeId]) -> Result<Grown> {
    grow_with_limit(g, r, s, targets, DEFAULT_ENUMERATION_LIMIT)
}

pub fn grow_with_limit(
    g: &Digraph,
    r: u32,
    s: u32,
    targets: &[NodeId],
    limit: usize,
) -> Result<Grown> {
    let need = (r + s).saturating_sub(1) as usize;
    if targets.len() < need {
        return Err(Error::Input(format!(
            "growth to preserve ({r},{s})-robustness needs at least {need} \
             attachment targets, got {}",
            targets.len()
        )));
    }
    let seed_certified = if g.node_count() <= limit {
        let cert = is_rs_robust_with_limit(g, r, s, limit)?;
        if !cert.verdict {
            return Err(Error::Input(format!(
                "seed graph is not ({r},{s})-robust; growth gives no guarantee"
            )));
        }
        true
    } else {
        false
    };
    Ok(Grown {
        graph: g.with_new_node(targets)?,
        seed_certified,
    })
}

/// Samples `k` distinct existing nodes with probability proportional to
/// their current total degree (in plus out). Deterministic for a given
/// seed. Nodes of degree zero are only drawn once every positive-degree
/// node is taken, in ascending id order.
pub fn preferential_targets(g: &Digraph, k: usize, rng_seed: u64) -> Result<Vec<NodeId>> {
    let n = g.node_count();
    if k > n {
        return Err(Error::Input(format!(
            "cannot sample {k} distinct nodes from a graph on {n} nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut weights: Vec<(NodeId, u64)> = g
        .nodes()
        .map(|i| (i, g.total_degree(i).expect("valid node") as u64))
        .collect();
    let mut picked = Vec::with_capacity(k);
    for _ in 0..k {
        let total: u64 = weights.iter().map(|&(_, w)| w).sum();
        let idx = if total == 0 {
            0 // all remaining tie at zero degree: ascending id
        } else {
            let mut ticket = rng.gen_range(0..total);
            let mut chosen = weights.len() - 1;
            for (pos, &(_, w)) in weights.iter().enumerate() {
                if ticket < w {
                    chosen = pos;
                    break;
                }
                ticket -= w;
            }
            chosen
        };
        picked.push(weights.remove(idx).0);
    }
    Ok(picked)
}

/// One step of a preferential growth run.
#[derive(Debug, Clone)]
pub struct GrowthStep {
    pub new_node: NodeId,
    pub targets: Vec<NodeId>,
}

#[derive(Debug, Clone)]
pub struct GrowthRun {
    pub graph: Digraph,
    pub steps: Vec<GrowthStep>,
    pub seed_certified: bool,
}

/// Grows `count` nodes from `seed`, each wired to `degree` existing nodes
/// chosen preferentially by degree. `degree` must be at least `r + s - 1`
/// so the robustness guarantee carries through the whole run.
pub fn grow_preferential(
    seed: &Digraph,
    r: u32,
    s: u32,
    count: usize,
    degree: usize,
    rng_seed: u64,
) -> Result<GrowthRun> {
    grow_preferential_with_limit(
        seed,
        r,
        s,
        count,
        degree,
        rng_seed,
        DEFAULT_ENUMERATION_LIMIT,
    )
}

pub fn grow_preferential_with_limit(
    seed: &Digraph,
    r: u32,
    s: u32,
    count: usize,
    degree: usize,
    rng_seed: u64,
    limit: usize,
) -> Result<GrowthRun> {
    let need = (r + s).saturating_sub(1) as usize;
    if degree < need {
        return Err(Error::Input(format!(
            "attachment degree {degree} is below the required {need} for ({r},{s})-robust growth"
        )));
    }
    let mut graph = seed.clone();
    let mut steps = Vec::with_capacity(count);
    let mut seed_certified = false;
    for step in 0..count {
        // Sub-seed keyed by step so one run seed fixes the whole sequence.
        let targets = preferential_targets(&graph, degree, rng_seed.wrapping_add(step as u64))?;
        let grown = if step == 0 {
            let g = grow_with_limit(&graph, r, s, &targets, limit)?;
            seed_certified = g.seed_certified;
            g.graph
        } else {
            // Robustness of intermediate graphs holds by the growth
            // guarantee; only attach.
            graph.with_new_node(&targets)?
        };
        steps.push(GrowthStep {
            new_node: NodeId(graph.node_count() as u32),
            targets,
        });
        graph = grown;
    }
    if count == 0 && seed.node_count() <= limit {
        seed_certified = is_rs_robust_with_limit(seed, r, s, limit)?.verdict;
    }
    Ok(GrowthRun {
        graph,
        steps,
        seed_certified,
    })
}

/// Among all failing subset pairs for `(r, s)`, returns the one with the
/// fewest reaching nodes (`reach1 + reach2`), ties broken by scan order.
/// `None` when the graph is (r,s)-robust. Unlike the certificate scan
/// this always visits every pair.
pub fn cheapest_failing_pair(g: &Digraph, r: u32, s: u32, limit: usize) -> Result<Option<Witness>> {
    let n = g.node_count();
    if s == 0 {
        return Err(Error::Input(
            "s = 0 is not allowed in (r,s)-robustness".into(),
        ));
    }
    if n <= 1 {
        return Ok(None);
    }
    if n > limit {
        return Err(Error::EnumerationCap { n, limit });
    }
    let masks = in_neighbor_masks(g);
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut best: Option<(usize, u64, u64, usize, usize)> = None;
    let mut union = 1u64;
    while union <= full {
        if union.count_ones() >= 2 {
            let low = union & union.wrapping_neg();
            let rest = union ^ low;
            let mut t = rest;
            loop {
                t = (t.wrapping_sub(1)) & rest;
                let s1 = low | t;
                let s2 = union ^ s1;
                let reach1 = reach_of_mask(&masks, s1, r);
                if reach1 != s1.count_ones() as usize {
                    let reach2 = reach_of_mask(&masks, s2, r);
                    if reach2 != s2.count_ones() as usize && reach1 + reach2 < s as usize {
                        let cost = reach1 + reach2;
                        if best.as_ref().is_none_or(|&(c, ..)| cost < c) {
                            best = Some((cost, s1, s2, reach1, reach2));
                        }
                    }
                }
                if t == 0 {
                    break;
                }
            }
        }
        union += 1;
    }
    Ok(best.map(|(_, m1, m2, reach1, reach2)| Witness {
        s1: mask_to_nodes(m1),
        s2: mask_to_nodes(m2),
        reach1,
        reach2,
    }))
}

fn in_neighbor_masks(g: &Digraph) -> Vec<u64> {
    g.nodes()
        .map(|i| {
            g.in_neighbors(i)
                .expect("valid node")
                .iter()
                .fold(0u64, |m, j| m | (1u64 << j.0))
        })
        .collect()
}

fn mask_to_nodes(mask: u64) -> Vec<NodeId> {
    (0..64)
        .filter(|b| mask & (1u64 << b) != 0)
        .map(|b| NodeId(b as u32))
        .collect()
}

fn reach_of_mask(masks: &[u64], subset: u64, r: u32) -> usize {
    let mut count = 0;
    let mut rest = subset;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if (masks[i] & !subset).count_ones() >= r {
            count += 1;
        }
    }
    count
}

/// Scans unions ascending, and within each union the submasks containing
/// the union's lowest-id node, returning the first pair on which all
/// three robustness conditions fail. The order is fixed, so the reported
/// witness is deterministic.
fn scan_for_failing_pair(
    masks: &[u64],
    n: usize,
    r: u32,
    s: u32,
) -> Option<(u64, u64, usize, usize)> {
    let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut union = 1u64;
    while union <= full {
        if union.count_ones() >= 2 {
            let low = union & union.wrapping_neg();
            let rest = union ^ low;
            // S1 ranges over {low | t : t proper submask of rest}.
            let mut t = rest;
            loop {
                t = (t.wrapping_sub(1)) & rest;
                let s1 = low | t;
                let s2 = union ^ s1;
                let reach1 = reach_of_mask(masks, s1, r);
                let cond1 = reach1 == s1.count_ones() as usize;
                if !cond1 {
                    let reach2 = reach_of_mask(masks, s2, r);
                    let cond2 = reach2 == s2.count_ones() as usize;
                    let cond3 = reach1 + reach2 >= s as usize;
                    if !cond2 && !cond3 {
                        return Some((s1, s2, reach1, reach2));
                    }
                }
                if t == 0 {
                    break;
                }
            }
        }
        union += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{complete, two_clique};
    use proptest::prelude::*;
    use rand::Rng;

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    fn random_digraph(n: usize, p: f64, seed: u64) -> Digraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for a in 0..n as u32 {
            for b in 0..n as u32 {
                if a != b && rng.gen_bool(p) {
                    edges.push((a, b));
                }
            }
        }
        Digraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn reach_count_zero_r_counts_everything() {
        let g = random_digraph(6, 0.3, 7);
        assert_eq!(reach_count(&g, &ids(&[0, 2, 4]), 0).unwrap(), 3);
    }

    #[test]
    fn reach_count_k5_pair() {
        let g = complete(5);
        assert_eq!(reach_count(&g, &ids(&[0, 1]), 3).unwrap(), 2);
    }

    #[test]
    fn reach_count_rejects_empty_and_duplicates() {
        let g = complete(3);
        assert!(reach_count(&g, &[], 1).is_err());
        assert!(reach_count(&g, &ids(&[0, 0]), 1).is_err());
    }

    #[test]
    fn singleton_in_k5_is_4_reachable() {
        let g = complete(5);
        assert!(is_r_reachable(&g, &ids(&[2]), 4).unwrap());
        assert!(!is_r_reachable(&g, &ids(&[2]), 5).unwrap());
    }

    #[test]
    fn two_clique_sides_are_2_but_not_3_reachable() {
        let g = two_clique(4, 5, 2).unwrap();
        let x = ids(&[0, 1, 2, 3]);
        assert!(is_r_reachable(&g, &x, 2).unwrap());
        assert!(!is_r_reachable(&g, &x, 3).unwrap());
    }

    #[test]
    fn two_clique_counterexample_robustness() {
        let g = two_clique(4, 5, 2).unwrap();
        assert!(is_r_robust(&g, 2).unwrap().verdict);
        let cert = is_r_robust(&g, 3).unwrap();
        assert!(!cert.verdict);
        let w = cert.witness.unwrap();
        assert_eq!(w.s1, ids(&[0, 1, 2, 3]));
        assert_eq!(w.s2, ids(&[4, 5, 6, 7, 8]));
    }

    #[test]
    fn k5_is_the_strongest_five_node_graph() {
        let g = complete(5);
        assert!(is_rs_robust(&g, 3, 2).unwrap().verdict);
        assert!(is_rs_robust(&g, 3, 3).unwrap().verdict);
        assert!(!is_rs_robust(&g, 4, 1).unwrap().verdict);
    }

    #[test]
    fn trivial_and_empty_conventions() {
        let trivial = Digraph::from_edges(1, &[]).unwrap();
        assert!(is_rs_robust(&trivial, 0, 1).unwrap().verdict);
        assert!(is_rs_robust(&trivial, 1, 1).unwrap().verdict);
        assert!(!is_rs_robust(&trivial, 2, 1).unwrap().verdict);
        assert_eq!(maximal_robustness(&trivial).unwrap(), (1, 1));

        let empty = Digraph::from_edges(0, &[]).unwrap();
        assert!(is_rs_robust(&empty, 0, 1).unwrap().verdict);
        assert!(!is_rs_robust(&empty, 1, 1).unwrap().verdict);
    }

    #[test]
    fn isolated_nodes_are_not_1_robust() {
        let g = Digraph::from_edges(3, &[]).unwrap();
        let cert = is_r_robust(&g, 1).unwrap();
        assert!(!cert.verdict);
        let w = cert.witness.unwrap();
        assert_eq!(reach_count(&g, &w.s1, 1).unwrap(), w.reach1);
        assert_eq!(w.reach1, 0);
    }

    #[test]
    fn s_zero_is_rejected() {
        assert!(is_rs_robust(&complete(3), 1, 0).is_err());
    }

    #[test]
    fn capacity_error_above_limit() {
        let g = complete(6);
        match is_rs_robust_with_limit(&g, 2, 2, 5) {
            Err(Error::EnumerationCap { n: 6, limit: 5 }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn min_in_degree_examples() {
        assert_eq!(min_in_degree(&complete(5)), 4);
        assert_eq!(min_in_degree(&two_clique(4, 5, 2).unwrap()), 5);
    }

    #[test]
    fn grow_minimal_case_path_of_three() {
        let k2 = complete(2);
        let grown = grow(&k2, 1, 1, &ids(&[1])).unwrap();
        assert!(grown.seed_certified);
        assert_eq!(grown.graph.node_count(), 3);
        assert!(is_rs_robust(&grown.graph, 1, 1).unwrap().verdict);
    }

    #[test]
    fn grow_requires_enough_targets() {
        let k5 = complete(5);
        assert!(grow(&k5, 3, 2, &ids(&[0, 1, 2])).is_err());
        assert!(grow(&k5, 3, 2, &ids(&[0, 1, 2, 3])).is_ok());
    }

    #[test]
    fn grow_rejects_non_robust_seed() {
        let g = Digraph::from_edges(3, &[]).unwrap();
        assert!(grow(&g, 1, 1, &ids(&[0])).is_err());
    }

    #[test]
    fn preferential_sampling_is_deterministic() {
        let g = complete(6);
        let a = preferential_targets(&g, 3, 99).unwrap();
        let b = preferential_targets(&g, 3, 99).unwrap();
        assert_eq!(a, b);
        let all = preferential_targets(&g, 6, 5).unwrap();
        assert_eq!(all.len(), 6);
        let set: BTreeSet<NodeId> = all.into_iter().collect();
        assert_eq!(set.len(), 6);
    }

    #[test]
    fn star_center_dominates_preferential_draws() {
        // Star on 5 nodes: center 0 holds half the total degree. Draw one
        // target for 10^4 distinct seeds and compare frequencies against
        // the degree-proportional law with a chi-squared test at the 1%
        // level (critical value 13.2767 for 4 degrees of freedom).
        let g = Digraph::from_undirected(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let mut counts = [0usize; 5];
        for seed in 0..10_000u64 {
            let t = preferential_targets(&g, 1, seed).unwrap();
            counts[t[0].index()] += 1;
        }
        let expected = [5000.0, 1250.0, 1250.0, 1250.0, 1250.0];
        let chi2: f64 = counts
            .iter()
            .zip(expected.iter())
            .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
            .sum();
        assert!(
            chi2 < 13.2767,
            "chi-squared {chi2} rejects degree-proportional sampling"
        );
        assert!(counts[0] > counts[1]);
    }

    /// Straight-line restatement of the definition used as an oracle:
    /// enumerate subset pairs with sets, not bitmasks, and evaluate the
    /// three conditions through the public reach_count.
    fn oracle_rs_robust(g: &Digraph, r: u32, s: u32) -> bool {
        let n = g.node_count();
        if n <= 1 {
            return (r == 0 || (n == 1 && r == 1)) && s == 1;
        }
        for union in 1u32..(1 << n) {
            if union.count_ones() < 2 {
                continue;
            }
            for s1m in 1u32..(1 << n) {
                if s1m & union != s1m || s1m == union {
                    continue;
                }
                let s2m = union ^ s1m;
                if s2m == 0 {
                    continue;
                }
                let s1: Vec<NodeId> = (0..n as u32)
                    .filter(|b| s1m >> b & 1 == 1)
                    .map(NodeId)
                    .collect();
                let s2: Vec<NodeId> = (0..n as u32)
                    .filter(|b| s2m >> b & 1 == 1)
                    .map(NodeId)
                    .collect();
                let r1 = reach_count(g, &s1, r).unwrap();
                let r2 = reach_count(g, &s2, r).unwrap();
                if r1 != s1.len() && r2 != s2.len() && r1 + r2 < s as usize {
                    return false;
                }
            }
        }
        true
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_definition_oracle(n in 2usize..6, p in 0.1f64..0.9, seed in 0u64..10_000) {
            let g = random_digraph(n, p, seed);
            for r in 0..=n as u32 {
                for s in 1..=n as u32 {
                    let cert = is_rs_robust(&g, r, s).unwrap();
                    prop_assert_eq!(cert.verdict, oracle_rs_robust(&g, r, s));
                }
            }
        }

        #[test]
        fn monotone_in_r_and_s(n in 2usize..8, p in 0.2f64..0.9, seed in 0u64..10_000) {
            let g = random_digraph(n, p, seed);
            let table: Vec<Vec<bool>> = (0..=n as u32)
                .map(|r| (1..=n as u32).map(|s| is_rs_robust(&g, r, s).unwrap().verdict).collect())
                .collect();
            for r in 0..=n {
                for s in 1..=n {
                    if table[r][s - 1] {
                        for rp in 0..=r {
                            for sp in 1..=s {
                                prop_assert!(table[rp][sp - 1],
                                    "({},{}) robust but ({},{}) not", r, s, rp, sp);
                            }
                        }
                    }
                }
            }
        }

        #[test]
        fn r_robust_equals_rs_with_s1(n in 2usize..7, p in 0.1f64..0.9, seed in 0u64..10_000) {
            let g = random_digraph(n, p, seed);
            for r in 0..=n as u32 {
                prop_assert_eq!(
                    is_r_robust(&g, r).unwrap().verdict,
                    is_rs_robust(&g, r, 1).unwrap().verdict
                );
            }
        }

        #[test]
        fn adding_an_edge_preserves_true_verdicts(
            n in 3usize..7, p in 0.2f64..0.7, seed in 0u64..10_000
        ) {
            let g = random_digraph(n, p, seed);
            // find one absent edge deterministically
            let mut missing = None;
            'outer: for a in 0..n as u32 {
                for b in 0..n as u32 {
                    if a != b && !g.has_edge(NodeId(a), NodeId(b)) {
                        missing = Some((a, b));
                        break 'outer;
                    }
                }
            }
            if let Some((a, b)) = missing {
                let mut edges: Vec<(u32, u32)> =
                    g.edges().into_iter().map(|(x, y)| (x.0, y.0)).collect();
                edges.push((a, b));
                let bigger = Digraph::from_edges(n, &edges).unwrap();
                for r in 0..=(n as u32) {
                    for s in 1..=(n as u32) {
                        if is_rs_robust(&g, r, s).unwrap().verdict {
                            prop_assert!(is_rs_robust(&bigger, r, s).unwrap().verdict);
                        }
                    }
                }
            }
        }

        #[test]
        fn false_witness_revalidates(n in 2usize..7, p in 0.05f64..0.6, seed in 0u64..10_000) {
            let g = random_digraph(n, p, seed);
            for r in 0..=n as u32 {
                for s in 1..=n as u32 {
                    let cert = is_rs_robust(&g, r, s).unwrap();
                    if let Some(w) = cert.witness {
                        prop_assert!(!cert.verdict);
                        let r1 = reach_count(&g, &w.s1, r).unwrap();
                        let r2 = reach_count(&g, &w.s2, r).unwrap();
                        prop_assert_eq!(r1, w.reach1);
                        prop_assert_eq!(r2, w.reach2);
                        prop_assert!(r1 != w.s1.len());
                        prop_assert!(r2 != w.s2.len());
                        prop_assert!(r1 + r2 < s as usize);
                        let joint: BTreeSet<NodeId> =
                            w.s1.iter().chain(w.s2.iter()).copied().collect();
                        prop_assert_eq!(joint.len(), w.s1.len() + w.s2.len());
                    } else {
                        prop_assert!(cert.verdict);
                    }
                }
            }
        }

        #[test]
        fn robust_graphs_meet_the_singleton_degree_bound(
            n in 3usize..7, p in 0.4f64..0.95, seed in 0u64..10_000, r in 2u32..4
        ) {
            // for r >= 2 the pair ({v}, V \ {v}) forces d_v >= r: no node
            // of the complement can have r neighbors inside a singleton
            let g = random_digraph(n, p, seed);
            if is_r_robust(&g, r).unwrap().verdict {
                prop_assert!(min_in_degree(&g) >= r as usize);
            }
        }
    }

    #[test]
    fn asymmetric_graphs_can_be_22_robust_below_degree_3() {
        // The in-degree of a (2F+1)-guaranteed graph is often quoted as
        // 2F+1, but the bound does not bind for general digraphs: here
        // nodes 1 and 5 have in-degree 2 while the graph is (2,2)-robust.
        // The only reach-deficient 2-sets are {1,5}, {1,3}, {2,5}, and no
        // disjoint combination defeats all three conditions.
        let g = Digraph::from_edges(
            6,
            &[
                (1, 0),
                (2, 0),
                (3, 0),
                (5, 0),
                (3, 1),
                (5, 1),
                (0, 2),
                (1, 2),
                (3, 2),
                (4, 2),
                (1, 3),
                (2, 3),
                (4, 3),
                (0, 4),
                (1, 4),
                (2, 4),
                (5, 4),
                (1, 5),
                (2, 5),
            ],
        )
        .unwrap();
        assert!(is_rs_robust(&g, 2, 2).unwrap().verdict);
        assert_eq!(min_in_degree(&g), 2);
    }

    #[test]
    fn near_complete_graphs_dodge_the_folklore_degree_floor() {
        // K6 minus one edge is still (3,3)-robust: singletons and 2-sets
        // reach fully, and in any disjoint 3-set pair at least four nodes
        // keep three neighbors outside their set. Its minimum degree is 4,
        // which sits below the often-quoted 2F+1 = 5 floor for F = 2.
        let mut edges = Vec::new();
        for a in 0..6u32 {
            for b in (a + 1)..6u32 {
                if (a, b) != (0, 1) {
                    edges.push((a, b));
                }
            }
        }
        let g = Digraph::from_undirected(6, &edges).unwrap();
        assert!(is_rs_robust(&g, 3, 3).unwrap().verdict);
        assert_eq!(min_in_degree(&g), 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
    }
}
