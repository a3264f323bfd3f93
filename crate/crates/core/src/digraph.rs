//! Finite simple directed graphs with totally ordered node identifiers,
//! plus time-varying topology via a piecewise-constant switching schedule.
//!
//! An edge `(j, i)` means node `j` influences node `i`: `j` is an
//! in-neighbor of `i`. All graphs are immutable after construction and can
//! be shared freely across threads.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Identifier of a node. Ids are dense `0..n-1` within one graph and their
/// natural order is used wherever the protocol needs deterministic
/// tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(id: u32) -> Self {
        NodeId(id)
    }
}

/// A finite simple digraph: no self-loops, no duplicate edges, every
/// endpoint below `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    /// In-neighbors per node, each list sorted ascending.
    in_adj: Vec<Vec<NodeId>>,
    /// Out-degree per node (used by degree-proportional sampling).
    out_deg: Vec<u32>,
}

impl Digraph {
    /// Builds a digraph on `n` nodes from directed `(from, to)` pairs.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut in_adj = vec![Vec::new(); n];
        let mut out_deg = vec![0u32; n];
        for &(from, to) in edges {
            if from as usize >= n {
                return Err(Error::InvalidNode { id: from, n });
            }
            if to as usize >= n {
                return Err(Error::InvalidNode { id: to, n });
            }
            if from == to {
                return Err(Error::SelfLoop(from));
            }
            if !seen.insert((from, to)) {
                return Err(Error::DuplicateEdge { from, to });
            }
            in_adj[to as usize].push(NodeId(from));
            out_deg[from as usize] += 1;
        }
        for list in &mut in_adj {
            list.sort_unstable();
        }
        Ok(Digraph { n, in_adj, out_deg })
    }

    /// Builds a symmetric digraph from an undirected edge list: each pair
    /// `{a, b}` becomes both `(a, b)` and `(b, a)`.
    pub fn from_undirected(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut directed = Vec::with_capacity(edges.len() * 2);
        for &(a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            directed.push((a, b));
            directed.push((b, a));
        }
        Self::from_edges(n, &directed).map_err(|e| match e {
            // report the undirected pair, not the derived reverse arc
            Error::DuplicateEdge { from, to } => Error::DuplicateEdge {
                from: from.min(to),
                to: from.max(to),
            },
            other => other,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n as u32).map(NodeId)
    }

    pub fn edge_count(&self) -> usize {
        self.in_adj.iter().map(Vec::len).sum()
    }

    /// All directed edges as `(from, to)` pairs, sorted by `(to, from)`.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (to, list) in self.in_adj.iter().enumerate() {
            for &from in list {
                out.push((from, NodeId(to as u32)));
            }
        }
        out
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId) -> bool {
        to.index() < self.n && self.in_adj[to.index()].binary_search(&from).is_ok()
    }

    /// The set of in-neighbors of `i`: every `j` with an edge `(j, i)`.
    pub fn in_neighbors(&self, i: NodeId) -> Result<&[NodeId]> {
        self.check_node(i)?;
        Ok(&self.in_adj[i.index()])
    }

    /// In-neighbors of `i` plus `i` itself.
    pub fn inclusive_neighbors(&self, i: NodeId) -> Result<Vec<NodeId>> {
        let mut v = self.in_neighbors(i)?.to_vec();
        match v.binary_search(&i) {
            Ok(_) => unreachable!("simple digraph has no self-loop"),
            Err(pos) => v.insert(pos, i),
        }
        Ok(v)
    }

    /// In-degree of `i`; this is the `d_i` used by the weight formulas.
    pub fn in_degree(&self, i: NodeId) -> Result<usize> {
        self.check_node(i)?;
        Ok(self.in_adj[i.index()].len())
    }

    /// Total degree (in + out), the edge count used by degree-proportional
    /// attachment.
    pub fn total_degree(&self, i: NodeId) -> Result<usize> {
        self.check_node(i)?;
        Ok(self.in_adj[i.index()].len() + self.out_deg[i.index()] as usize)
    }

    /// True when every edge has its reverse.
    pub fn is_symmetric(&self) -> bool {
        self.edges()
            .iter()
            .all(|&(from, to)| self.has_edge(to, from))
    }

    /// Returns a copy with one extra node attached symmetrically to
    /// `targets` (edges in both directions).
    pub fn with_new_node(&self, targets: &[NodeId]) -> Result<Self> {
        let new = self.n as u32;
        let mut edges: Vec<(u32, u32)> =
            self.edges().into_iter().map(|(a, b)| (a.0, b.0)).collect();
        let mut seen = BTreeSet::new();
        for &t in targets {
            self.check_node(t)?;
            if !seen.insert(t) {
                return Err(Error::DuplicateEdge { from: t.0, to: new });
            }
            edges.push((t.0, new));
            edges.push((new, t.0));
        }
        Self::from_edges(self.n + 1, &edges)
    }

    /// Relabels nodes: node `i` becomes `perm[i]`. `perm` must be a
    /// permutation of `0..n`.
    pub fn relabeled(&self, perm: &[u32]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::Input(format!(
                "permutation length {} does not match node count {}",
                perm.len(),
                self.n
            )));
        }
        let mut check: Vec<u32> = perm.to_vec();
        check.sort_unstable();
        if check.iter().enumerate().any(|(i, &p)| p != i as u32) {
            return Err(Error::Input("not a permutation of 0..n".into()));
        }
        let edges: Vec<(u32, u32)> = self
            .edges()
            .into_iter()
            .map(|(a, b)| (perm[a.index()], perm[b.index()]))
            .collect();
        Self::from_edges(self.n, &edges)
    }

    fn check_node(&self, i: NodeId) -> Result<()> {
        if i.index() >= self.n {
            return Err(Error::InvalidNode { id: i.0, n: self.n });
        }
        Ok(())
    }

    /// Parses the edge-list text format: one `u v` pair per line for an
    /// undirected edge, `u -> v` for a directed one; `#` starts a comment.
    /// The node count is the largest endpoint plus one.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut directed: Vec<(u32, u32)> = Vec::new();
        let mut undirected_seen: BTreeSet<(u32, u32)> = BTreeSet::new();
        let mut max_id: Option<u32> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let toks: Vec<&str> = content.split_whitespace().collect();
            let parse_id = |s: &str| -> Result<u32> {
                s.parse::<u32>().map_err(|_| Error::EdgeListParse {
                    line,
                    msg: format!("expected node id, got '{s}'"),
                })
            };
            match toks.as_slice() {
                [a, "->", b] => {
                    let (a, b) = (parse_id(a)?, parse_id(b)?);
                    directed.push((a, b));
                    max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
                }
                [a, b] => {
                    let (a, b) = (parse_id(a)?, parse_id(b)?);
                    if a == b {
                        return Err(Error::EdgeListParse {
                            line,
                            msg: format!("self-loop on node {a}"),
                        });
                    }
                    if !undirected_seen.insert((a.min(b), a.max(b))) {
                        return Err(Error::EdgeListParse {
                            line,
                            msg: format!("duplicate undirected edge {a} {b}"),
                        });
                    }
                    directed.push((a, b));
                    directed.push((b, a));
                    max_id = Some(max_id.map_or(a.max(b), |m| m.max(a).max(b)));
                }
                _ => {
                    return Err(Error::EdgeListParse {
                        line,
                        msg: format!("expected 'u v' or 'u -> v', got '{content}'"),
                    })
                }
            }
        }
        let n = max_id.map_or(0, |m| m as usize + 1);
        Self::from_edges(n, &directed)
    }

    /// Writes the edge-list text format. Symmetric graphs are emitted as
    /// undirected `u v` lines with `u < v`; anything else uses `u -> v`.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        if self.is_symmetric() {
            for (from, to) in self.edges() {
                if from < to {
                    let _ = writeln!(out, "{} {}", from, to);
                }
            }
        } else {
            for (from, to) in self.edges() {
                let _ = writeln!(out, "{} -> {}", from, to);
            }
        }
        out
    }

    /// DOT export for visualization. Symmetric graphs render as an
    /// undirected `graph`, others as a `digraph`.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        if self.is_symmetric() {
            let _ = writeln!(out, "graph {{");
            for i in 0..self.n {
                let _ = writeln!(out, "  {i};");
            }
            for (from, to) in self.edges() {
                if from < to {
                    let _ = writeln!(out, "  {} -- {};", from, to);
                }
            }
        } else {
            let _ = writeln!(out, "digraph {{");
            for i in 0..self.n {
                let _ = writeln!(out, "  {i};");
            }
            for (from, to) in self.edges() {
                let _ = writeln!(out, "  {} -> {};", from, to);
            }
        }
        let _ = writeln!(out, "}}");
        out
    }
}

/// Complete symmetric digraph on `n` nodes.
pub fn complete(n: usize) -> Digraph {
    let mut edges = Vec::new();
    for a in 0..n as u32 {
        for b in (a + 1)..n as u32 {
            edges.push((a, b));
        }
    }
    Digraph::from_undirected(n, &edges).expect("complete graph edges are valid")
}

/// Two cliques `X = K_{n1}` (nodes `0..n1`) and `Y = K_{n2}` joined by
/// cross edges: every X node gets exactly `cross` neighbors in Y and the
/// Y-side quotas are as even as possible (never above `cross`).
///
/// With `(4, 5, 2)` this realizes the classic counterexample in which an
/// extreme-value filter with parameter 2 freezes both cliques: every node
/// sees exactly 2 opposite-clique values and discards them all.
pub fn two_clique(n1: usize, n2: usize, cross: usize) -> Result<Digraph> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Input("both cliques need at least one node".into()));
    }
    if cross > n2 {
        return Err(Error::Input(format!(
            "cross degree {cross} exceeds the {n2} available targets"
        )));
    }
    let n = n1 + n2;
    let mut edges = Vec::new();
    for a in 0..n1 as u32 {
        for b in (a + 1)..n1 as u32 {
            edges.push((a, b));
        }
    }
    for a in n1 as u32..n as u32 {
        for b in (a + 1)..n as u32 {
            edges.push((a, b));
        }
    }
    let total = n1 * cross;
    let base = total / n2;
    let rem = total % n2;
    if base > cross || (base == cross && rem > 0) {
        return Err(Error::Input(format!(
            "no assignment gives every Y node at most {cross} cross edges"
        )));
    }
    let mut quota: Vec<usize> = (0..n2)
        .map(|k| if k < rem { base + 1 } else { base })
        .collect();
    let mut cursor = 0usize;
    for x in 0..n1 {
        let mut picked = 0usize;
        let mut scanned = 0usize;
        while picked < cross {
            if scanned > 2 * n2 {
                return Err(Error::Input("cross-edge assignment failed".into()));
            }
            let y = cursor % n2;
            cursor += 1;
            scanned += 1;
            if quota[y] == 0 {
                continue;
            }
            quota[y] -= 1;
            edges.push((x as u32, (n1 + y) as u32));
            picked += 1;
        }
    }
    Digraph::from_undirected(n, &edges)
}

/// Piecewise-constant switching schedule: an ordered sequence of
/// `(start_time, graph)` segments, the first starting at 0. A switch
/// instant belongs to the new segment.
#[derive(Debug, Clone)]
pub struct SwitchingSchedule {
    segments: Vec<(f64, Digraph)>,
    dwell: Option<f64>,
}

impl SwitchingSchedule {
    /// Single-segment schedule: the topology never changes.
    pub fn fixed(graph: Digraph) -> Self {
        SwitchingSchedule {
            segments: vec![(0.0, graph)],
            dwell: None,
        }
    }

    /// Multi-segment schedule. Start times must be strictly increasing
    /// with the first at 0; all graphs must share the node count. When
    /// `dwell` is given it must be positive and every inter-switch gap
    /// must be at least `dwell`.
    pub fn new(segments: Vec<(f64, Digraph)>, dwell: Option<f64>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidSchedule("no segments".into()));
        }
        if segments[0].0 != 0.0 {
            return Err(Error::InvalidSchedule(format!(
                "first segment must start at 0, got {}",
                segments[0].0
            )));
        }
        let n = segments[0].1.node_count();
        for w in segments.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidSchedule(format!(
                    "start times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if segments.iter().any(|(_, g)| g.node_count() != n) {
            return Err(Error::InvalidSchedule(
                "all segment graphs must share the same node set".into(),
            ));
        }
        if let Some(d) = dwell {
            if d <= 0.0 {
                return Err(Error::InvalidSchedule("dwell must be positive".into()));
            }
            for w in segments.windows(2) {
                let gap = w[1].0 - w[0].0;
                if gap < d {
                    return Err(Error::InvalidSchedule(format!(
                        "segment at {} lasts {gap}, below the dwell {d}",
                        w[0].0
                    )));
                }
            }
        }
        Ok(SwitchingSchedule { segments, dwell })
    }

    pub fn node_count(&self) -> usize {
        self.segments[0].1.node_count()
    }

    pub fn segments(&self) -> &[(f64, Digraph)] {
        &self.segments
    }

    pub fn is_static(&self) -> bool {
        self.segments.len() == 1
    }

    /// Minimum time between switches; infinite for a static schedule.
    /// When a dwell was declared at construction it is returned as-is.
    pub fn dwell(&self) -> f64 {
        if let Some(d) = self.dwell {
            return d;
        }
        self.segments
            .windows(2)
            .map(|w| w[1].0 - w[0].0)
            .fold(f64::INFINITY, f64::min)
    }

    /// The graph active at time `t`: the last segment whose start time is
    /// at most `t` (right-continuous in `t`).
    pub fn graph_at(&self, t: f64) -> Result<&Digraph> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::NegativeTime(t));
        }
        let idx = self
            .segments
            .partition_point(|(start, _)| *start <= t)
            .saturating_sub(1);
        Ok(&self.segments[idx].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn complete_k3_neighbors() {
        let g = complete(3);
        assert_eq!(g.in_neighbors(NodeId(0)).unwrap(), &[NodeId(1), NodeId(2)]);
    }

    #[test]
    fn empty_graph_has_no_neighbors() {
        let g = Digraph::from_edges(3, &[]).unwrap();
        assert!(g.in_neighbors(NodeId(0)).unwrap().is_empty());
    }

    #[test]
    fn invalid_node_is_an_error() {
        let g = complete(3);
        assert!(g.in_neighbors(NodeId(3)).is_err());
    }

    #[test]
    fn two_clique_counterexample_degrees() {
        // X nodes: 3 clique peers plus exactly 2 cross neighbors.
        let g = two_clique(4, 5, 2).unwrap();
        assert_eq!(g.node_count(), 9);
        for x in 0..4u32 {
            let nbrs = g.in_neighbors(NodeId(x)).unwrap();
            assert_eq!(nbrs.len(), 5);
            let cross = nbrs.iter().filter(|v| v.0 >= 4).count();
            assert_eq!(cross, 2);
        }
        // Y quotas: three nodes with 2 cross edges, two with 1.
        let mut quotas: Vec<usize> = (4..9u32)
            .map(|y| {
                g.in_neighbors(NodeId(y))
                    .unwrap()
                    .iter()
                    .filter(|v| v.0 < 4)
                    .count()
            })
            .collect();
        quotas.sort_unstable();
        assert_eq!(quotas, vec![1, 1, 2, 2, 2]);
    }

    #[test]
    fn from_undirected_symmetry() {
        let g = Digraph::from_undirected(2, &[(0, 1)]).unwrap();
        assert!(g.has_edge(NodeId(0), NodeId(1)));
        assert!(g.has_edge(NodeId(1), NodeId(0)));
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn k4_has_twelve_directed_edges() {
        assert_eq!(complete(4).edge_count(), 12);
    }

    #[test]
    fn rejects_self_loop_and_duplicate() {
        assert!(Digraph::from_undirected(2, &[(1, 1)]).is_err());
        assert!(Digraph::from_undirected(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Digraph::from_edges(2, &[(0, 1), (0, 1)]).is_err());
    }

    #[test]
    fn schedule_boundary_belongs_to_new_segment() {
        let s = SwitchingSchedule::new(
            vec![
                (0.0, complete(3)),
                (10.0, Digraph::from_edges(3, &[]).unwrap()),
            ],
            None,
        )
        .unwrap();
        assert_eq!(s.graph_at(5.0).unwrap().edge_count(), 6);
        assert_eq!(s.graph_at(9.999).unwrap().edge_count(), 6);
        assert_eq!(s.graph_at(10.0).unwrap().edge_count(), 0);
        assert!(s.graph_at(-0.1).is_err());
    }

    #[test]
    fn static_schedule_always_returns_its_graph() {
        let s = SwitchingSchedule::fixed(complete(3));
        assert_eq!(s.graph_at(0.0).unwrap().edge_count(), 6);
        assert_eq!(s.graph_at(5.0).unwrap().edge_count(), 6);
        assert!(s.dwell().is_infinite());
    }

    #[test]
    fn schedule_validates_dwell() {
        let g = complete(2);
        assert!(
            SwitchingSchedule::new(vec![(0.0, g.clone()), (0.5, g.clone())], Some(1.0)).is_err()
        );
        assert!(SwitchingSchedule::new(vec![(0.0, g.clone()), (1.5, g)], Some(1.0)).is_ok());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = two_clique(4, 5, 2).unwrap();
        let text = g.to_edge_list();
        let back = Digraph::parse_edge_list(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn dot_export_matches_symmetry() {
        let undirected = complete(3).to_dot();
        assert!(undirected.starts_with("graph {"));
        assert!(undirected.contains("0 -- 1;"));
        let directed = Digraph::from_edges(2, &[(0, 1)]).unwrap().to_dot();
        assert!(directed.starts_with("digraph {"));
        assert!(directed.contains("0 -> 1;"));
    }

    #[test]
    fn edge_list_parses_directed_and_comments() {
        let g = Digraph::parse_edge_list("# header\n0 -> 1\n1 -> 2 # tail\n\n2 -> 0\n").unwrap();
        assert_eq!(g.node_count(), 3);
        assert!(g.has_edge(NodeId(0), NodeId(1)));
        assert!(!g.has_edge(NodeId(1), NodeId(0)));
    }

    #[test]
    fn edge_list_reports_line_numbers() {
        let err = Digraph::parse_edge_list("0 1\n2 2\n").unwrap_err();
        match err {
            Error::EdgeListParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn node_not_its_own_neighbor(n in 1usize..8, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for a in 0..n as u32 {
                for b in 0..n as u32 {
                    if a != b && rng.gen_bool(0.4) {
                        edges.push((a, b));
                    }
                }
            }
            let g = Digraph::from_edges(n, &edges).unwrap();
            for i in g.nodes() {
                let nbrs = g.in_neighbors(i).unwrap();
                prop_assert!(!nbrs.contains(&i));
                prop_assert!(g.inclusive_neighbors(i).unwrap().contains(&i));
                prop_assert_eq!(nbrs.len(), g.in_degree(i).unwrap());
            }
        }
    }
}
