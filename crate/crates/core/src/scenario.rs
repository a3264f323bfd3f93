//! Plain-text scenario files, ready-made presets, and batch execution.
//!
//! A scenario is a line-oriented `key value` description of one
//! experiment: the graph (or switching segments), the protocol and its
//! weights, the adversaries with their strategies, the threat scope,
//! initial values, and the run horizon. The format is deliberately
//! dependency-free and diff-friendly; the full grammar is documented in
//! the repository README.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::adversaries::{AdversaryStrategy, ThreatScope};
use crate::digraph::{complete, two_clique, Digraph, NodeId, SwitchingSchedule};
use crate::engine::{run, Mode, Protocol, RunConfig, RunTrace};
use crate::error::{Error, Result};
use crate::protocols::WeightPolicy;
use crate::robustness::grow_preferential;

/// Seven-node demo topology used by the `fig2-local` preset.
///
/// Constructed by exhaustive search to satisfy, with zero-based ids, a
/// precise bundle of robustness facts: 3-robust, (2,2)-robust, maximal robustness
/// (3,1), not (3,2)-robust with the specific failing pair
/// S1 = {0,2,4,5,6} / S2 = {1,3} (only node 1 keeps three in-neighbors
/// outside its set), and `{0, 3}` is a valid 1-local adversary set.
pub fn demo_seven_node() -> Digraph {
    Digraph::from_undirected(
        7,
        &[
            (0, 3),
            (0, 4),
            (0, 5),
            (0, 6),
            (1, 3),
            (1, 4),
            (1, 5),
            (1, 6),
            (2, 3),
            (2, 4),
            (2, 5),
            (2, 6),
            (4, 5),
            (4, 6),
        ],
    )
    .expect("frozen edge list is valid")
}

/// Variant seven-node topology realizing a second witness pattern:
/// same 3-robust / not (3,2) structure as [`demo_seven_node`] (same
/// failing pair S1 = {0,2,4,5,6} / S2 = {1,3}), and additionally not
/// (2,5)-robust via the pair S1 = {0,4,5} / S2 = {1,2,3}. No 7-node
/// symmetric digraph satisfies that witness together with the 1-local
/// property of `{0, 3}`, so the two demos are split.
pub fn demo_seven_node_variant() -> Digraph {
    Digraph::from_undirected(
        7,
        &[
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (0, 5),
            (0, 6),
            (1, 3),
            (1, 4),
            (1, 5),
            (1, 6),
            (2, 3),
            (2, 4),
            (2, 6),
            (4, 5),
        ],
    )
    .expect("frozen edge list is valid")
}

/// Fifteen-node (2,2)-robust network with a dominant hub at id 14,
/// used by the `sec6-hub` preset.
///
/// Grown from the complete graph on five nodes by degree-proportional
/// attachment (three incoming links per new node, which preserves
/// (2,2)-robustness), then relabeled so the highest-degree node is 14
/// (degree 11; the runner-up has 8). Certified (2,2)-robust by the
/// exhaustive checker.
pub fn demo_hub_network() -> Digraph {
    Digraph::from_undirected(
        15,
        &[
            (0, 1),
            (0, 3),
            (1, 3),
            (0, 4),
            (1, 4),
            (3, 4),
            (0, 5),
            (2, 5),
            (3, 5),
            (0, 6),
            (1, 6),
            (3, 6),
            (4, 7),
            (5, 7),
            (0, 8),
            (4, 8),
            (0, 9),
            (1, 9),
            (7, 9),
            (1, 10),
            (8, 10),
            (3, 11),
            (8, 11),
            (1, 12),
            (6, 12),
            (2, 13),
            (3, 13),
            (4, 13),
            (7, 13),
            (0, 14),
            (1, 14),
            (2, 14),
            (3, 14),
            (4, 14),
            (5, 14),
            (7, 14),
            (8, 14),
            (10, 14),
            (11, 14),
            (12, 14),
        ],
    )
    .expect("frozen edge list is valid")
}

/// How a scenario names its graph.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSpec {
    File(String),
    Complete(usize),
    TwoClique {
        n1: usize,
        n2: usize,
        cross: usize,
    },
    GrowComplete {
        seed_n: usize,
        r: u32,
        s: u32,
        count: usize,
        degree: usize,
        rng: u64,
    },
    Inline {
        n: usize,
        edges: Vec<EdgeSpec>,
    },
    DemoSevenNode,
    DemoHubNetwork,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSpec {
    Undirected(u32, u32),
    Directed(u32, u32),
}

impl GraphSpec {
    /// Node count known without touching the filesystem.
    fn structural_node_count(&self) -> Option<usize> {
        match self {
            GraphSpec::File(_) => None,
            GraphSpec::Complete(n) => Some(*n),
            GraphSpec::TwoClique { n1, n2, .. } => Some(n1 + n2),
            GraphSpec::GrowComplete { seed_n, count, .. } => Some(seed_n + count),
            GraphSpec::Inline { n, .. } => Some(*n),
            GraphSpec::DemoSevenNode => Some(7),
            GraphSpec::DemoHubNetwork => Some(15),
        }
    }

    /// Builds the digraph. `base` anchors relative `file` paths.
    pub fn resolve(&self, base: Option<&Path>) -> Result<Digraph> {
        match self {
            GraphSpec::File(path) => {
                let joined = match base {
                    Some(dir) => dir.join(path),
                    None => Path::new(path).to_path_buf(),
                };
                Digraph::parse_edge_list(&std::fs::read_to_string(joined)?)
            }
            GraphSpec::Complete(n) => Ok(complete(*n)),
            GraphSpec::TwoClique { n1, n2, cross } => two_clique(*n1, *n2, *cross),
            GraphSpec::GrowComplete {
                seed_n,
                r,
                s,
                count,
                degree,
                rng,
            } => Ok(grow_preferential(&complete(*seed_n), *r, *s, *count, *degree, *rng)?.graph),
            GraphSpec::Inline { n, edges } => {
                let mut directed = Vec::new();
                for e in edges {
                    match *e {
                        EdgeSpec::Undirected(a, b) => {
                            directed.push((a, b));
                            directed.push((b, a));
                        }
                        EdgeSpec::Directed(a, b) => directed.push((a, b)),
                    }
                }
                Digraph::from_edges(*n, &directed)
            }
            GraphSpec::DemoSevenNode => Ok(demo_seven_node()),
            GraphSpec::DemoHubNetwork => Ok(demo_hub_network()),
        }
    }

    fn write_lines(&self, out: &mut String, prefix: &str) {
        match self {
            GraphSpec::File(p) => {
                let _ = writeln!(out, "{prefix} file {p}");
            }
            GraphSpec::Complete(n) => {
                let _ = writeln!(out, "{prefix} complete {n}");
            }
            GraphSpec::TwoClique { n1, n2, cross } => {
                let _ = writeln!(out, "{prefix} two-clique {n1} {n2} {cross}");
            }
            GraphSpec::GrowComplete {
                seed_n,
                r,
                s,
                count,
                degree,
                rng,
            } => {
                let _ = writeln!(
                    out,
                    "{prefix} grow-complete {seed_n} {r} {s} {count} {degree} {rng}"
                );
            }
            GraphSpec::Inline { n, edges } => {
                let _ = writeln!(out, "{prefix} inline {n}");
                for e in edges {
                    match *e {
                        EdgeSpec::Undirected(a, b) => {
                            let _ = writeln!(out, "edge {a} {b}");
                        }
                        EdgeSpec::Directed(a, b) => {
                            let _ = writeln!(out, "edge {a} -> {b}");
                        }
                    }
                }
            }
            GraphSpec::DemoSevenNode => {
                let _ = writeln!(out, "{prefix} demo-seven-node");
            }
            GraphSpec::DemoHubNetwork => {
                let _ = writeln!(out, "{prefix} demo-hub-network");
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioMode {
    Discrete {
        rounds: usize,
    },
    Continuous {
        horizon: f64,
        step: Option<f64>,
        dwell: Option<f64>,
    },
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mode: ScenarioMode,
    /// `(start_time, graph)` segments; a single segment at 0 is a static
    /// topology.
    pub segments: Vec<(f64, GraphSpec)>,
    pub protocol: Protocol,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub scope: ThreatScope,
    pub adversaries: Vec<(u32, AdversaryStrategy)>,
    pub init: Vec<f64>,
    pub consensus_tol: Option<f64>,
    pub stall_window: Option<usize>,
    pub rng_seed: u64,
    pub output: Option<String>,
}

/// One parse or validation problem, with its 1-based source line.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseIssue {
    pub line: usize,
    pub msg: String,
}

impl std::fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

fn parse_graph_spec(toks: &[&str]) -> std::result::Result<GraphSpec, String> {
    let usize_of = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| format!("expected integer, got '{t}'"))
    };
    let u32_of = |t: &str| {
        t.parse::<u32>()
            .map_err(|_| format!("expected integer, got '{t}'"))
    };
    let u64_of = |t: &str| {
        t.parse::<u64>()
            .map_err(|_| format!("expected integer, got '{t}'"))
    };
    match toks {
        ["file", path] => Ok(GraphSpec::File((*path).to_string())),
        ["complete", n] => Ok(GraphSpec::Complete(usize_of(n)?)),
        ["two-clique", n1, n2, cross] => Ok(GraphSpec::TwoClique {
            n1: usize_of(n1)?,
            n2: usize_of(n2)?,
            cross: usize_of(cross)?,
        }),
        ["grow-complete", n, r, s, count, degree, rng] => Ok(GraphSpec::GrowComplete {
            seed_n: usize_of(n)?,
            r: u32_of(r)?,
            s: u32_of(s)?,
            count: usize_of(count)?,
            degree: usize_of(degree)?,
            rng: u64_of(rng)?,
        }),
        ["inline", n] => Ok(GraphSpec::Inline {
            n: usize_of(n)?,
            edges: Vec::new(),
        }),
        ["demo-seven-node"] => Ok(GraphSpec::DemoSevenNode),
        ["demo-hub-network"] => Ok(GraphSpec::DemoHubNetwork),
        _ => Err(format!("unknown graph spec '{}'", toks.join(" "))),
    }
}

/// Parses a scenario file into a fully validated config, or a list of
/// problems with their line numbers.
pub fn parse_scenario(text: &str) -> std::result::Result<ScenarioConfig, Vec<ParseIssue>> {
    let mut issues: Vec<ParseIssue> = Vec::new();
    let mut mode_kind: Option<(usize, String)> = None;
    let mut horizon: Option<(usize, f64)> = None;
    let mut step: Option<f64> = None;
    let mut dwell: Option<f64> = None;
    let mut consensus_tol: Option<f64> = None;
    let mut stall_window: Option<usize> = None;
    let mut rng_seed: u64 = 0;
    let mut output: Option<String> = None;
    let mut segments: Vec<(f64, GraphSpec)> = Vec::new();
    let mut saw_static_graph = false;
    let mut protocol: Option<Protocol> = None;
    let mut alpha: Option<f64> = None;
    let mut beta: Option<f64> = None;
    let mut scope: Option<ThreatScope> = None;
    let mut adversaries: Vec<(usize, u32, AdversaryStrategy)> = Vec::new();
    let mut linspace: Option<(f64, f64)> = None;
    let mut init_overrides: Vec<(usize, u32, f64)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let mut fail = |msg: String| issues.push(ParseIssue { line, msg });
        let f64_of = |t: &str| {
            t.parse::<f64>()
                .map_err(|_| format!("expected number, got '{t}'"))
        };
        match toks[0] {
            "mode" => match toks.get(1) {
                Some(&"discrete") | Some(&"continuous") => {
                    mode_kind = Some((line, toks[1].to_string()));
                }
                _ => fail("mode must be 'discrete' or 'continuous'".into()),
            },
            "horizon" => match toks.get(1).map(|t| f64_of(t)) {
                Some(Ok(h)) if h > 0.0 => horizon = Some((line, h)),
                Some(Ok(_)) => fail("horizon must be positive".into()),
                _ => fail("horizon needs a number".into()),
            },
            "step" => match toks.get(1).map(|t| f64_of(t)) {
                Some(Ok(h)) if h > 0.0 => step = Some(h),
                _ => fail("step needs a positive number".into()),
            },
            "dwell" => match toks.get(1).map(|t| f64_of(t)) {
                Some(Ok(d)) if d > 0.0 => dwell = Some(d),
                _ => fail("dwell needs a positive number".into()),
            },
            "consensus-tol" => match toks.get(1).map(|t| f64_of(t)) {
                Some(Ok(t)) if t > 0.0 => consensus_tol = Some(t),
                _ => fail("consensus-tol needs a positive number".into()),
            },
            "stall-window" => match toks.get(1).map(|t| t.parse::<usize>()) {
                Some(Ok(w)) if w > 0 => stall_window = Some(w),
                _ => fail("stall-window needs a positive integer".into()),
            },
            "rng" => match toks.get(1).map(|t| t.parse::<u64>()) {
                Some(Ok(s)) => rng_seed = s,
                _ => fail("rng needs an integer seed".into()),
            },
            "output" => match toks.get(1) {
                Some(p) => output = Some((*p).to_string()),
                None => fail("output needs a path prefix".into()),
            },
            "graph" => {
                if saw_static_graph || !segments.is_empty() {
                    fail("only one 'graph' line (or 'segment' lines) allowed".into());
                } else {
                    match parse_graph_spec(&toks[1..]) {
                        Ok(spec) => {
                            segments.push((0.0, spec));
                            saw_static_graph = true;
                        }
                        Err(msg) => fail(msg),
                    }
                }
            }
            "segment" => {
                if saw_static_graph {
                    fail("cannot mix 'graph' and 'segment' lines".into());
                } else {
                    match toks.get(1).map(|t| f64_of(t)) {
                        Some(Ok(t0)) => match parse_graph_spec(&toks[2..]) {
                            Ok(spec) => {
                                if let Some((prev, _)) = segments.last() {
                                    if t0 <= *prev {
                                        fail(format!(
                                            "segment start {t0} must exceed the previous start {prev}"
                                        ));
                                        continue;
                                    }
                                } else if t0 != 0.0 {
                                    fail("first segment must start at 0".into());
                                    continue;
                                }
                                segments.push((t0, spec));
                            }
                            Err(msg) => fail(msg),
                        },
                        _ => fail("segment needs a start time".into()),
                    }
                }
            }
            "edge" => {
                let parsed = match toks.as_slice() {
                    ["edge", a, "->", b] => a
                        .parse::<u32>()
                        .and_then(|a| b.parse::<u32>().map(|b| EdgeSpec::Directed(a, b)))
                        .map_err(|_| "edge endpoints must be integers".to_string()),
                    ["edge", a, b] => a
                        .parse::<u32>()
                        .and_then(|a| b.parse::<u32>().map(|b| EdgeSpec::Undirected(a, b)))
                        .map_err(|_| "edge endpoints must be integers".to_string()),
                    _ => Err("edge needs 'edge U V' or 'edge U -> V'".into()),
                };
                match parsed {
                    Ok(e) => match segments.last_mut() {
                        Some((_, GraphSpec::Inline { edges, .. })) => edges.push(e),
                        _ => fail("edge lines only follow 'graph inline N'".into()),
                    },
                    Err(msg) => fail(msg),
                }
            }
            "protocol" => match toks.get(1) {
                Some(&"lcp") => protocol = Some(Protocol::Lcp),
                Some(&"arcp") => match toks.get(2).map(|t| t.parse::<u32>()) {
                    Some(Ok(f)) => protocol = Some(Protocol::Arcp { f }),
                    _ => fail("protocol arcp needs its parameter, e.g. 'protocol arcp 1'".into()),
                },
                _ => fail("protocol must be 'lcp' or 'arcp F'".into()),
            },
            "alpha" => match toks.get(1).map(|t| f64_of(t)) {
                Some(Ok(a)) if a > 0.0 => alpha = Some(a),
                _ => fail("alpha needs a positive number".into()),
            },
            "beta" => match toks.get(1).map(|t| f64_of(t)) {
                Some(Ok(b)) if b > 0.0 => beta = Some(b),
                _ => fail("beta needs a positive number".into()),
            },
            "weights" => match toks.get(1) {
                Some(&"uniform") => {}
                _ => fail("only 'weights uniform' is supported in scenario files".into()),
            },
            "scope" => match (toks.get(1), toks.get(2).map(|t| t.parse::<u32>())) {
                (Some(&"total"), Some(Ok(f))) => scope = Some(ThreatScope::total(f)),
                (Some(&"local"), Some(Ok(f))) => scope = Some(ThreatScope::local(f)),
                _ => fail("scope must be 'total F' or 'local F'".into()),
            },
            "adversary" => match toks.get(1).map(|t| t.parse::<u32>()) {
                Some(Ok(id)) => match toks[2..].join(" ").parse::<AdversaryStrategy>() {
                    Ok(strategy) => adversaries.push((line, id, strategy)),
                    Err(e) => fail(e.to_string()),
                },
                _ => fail("adversary needs a node id".into()),
            },
            "init" => match (
                toks.get(1).map(|t| t.parse::<u32>()),
                toks.get(2).map(|t| f64_of(t)),
            ) {
                (Some(Ok(id)), Some(Ok(v))) => init_overrides.push((line, id, v)),
                _ => fail("init needs 'init ID VALUE'".into()),
            },
            "init-linspace" => match (
                toks.get(1).map(|t| f64_of(t)),
                toks.get(2).map(|t| f64_of(t)),
            ) {
                (Some(Ok(a)), Some(Ok(b))) => linspace = Some((a, b)),
                _ => fail("init-linspace needs 'init-linspace A B'".into()),
            },
            other => fail(format!("unknown key '{other}'")),
        }
    }

    // cross-field validation
    let mode = match (&mode_kind, horizon) {
        (Some((_, kind)), Some((hline, h))) => {
            if kind == "discrete" {
                if h.fract() != 0.0 {
                    issues.push(ParseIssue {
                        line: hline,
                        msg: "discrete horizon must be a whole number of rounds".into(),
                    });
                    None
                } else {
                    Some(ScenarioMode::Discrete { rounds: h as usize })
                }
            } else {
                Some(ScenarioMode::Continuous {
                    horizon: h,
                    step,
                    dwell,
                })
            }
        }
        _ => {
            if mode_kind.is_none() {
                issues.push(ParseIssue {
                    line: 0,
                    msg: "missing required key 'mode'".into(),
                });
            }
            if horizon.is_none() {
                issues.push(ParseIssue {
                    line: 0,
                    msg: "missing required key 'horizon'".into(),
                });
            }
            None
        }
    };
    if segments.is_empty() {
        issues.push(ParseIssue {
            line: 0,
            msg: "missing required key 'graph' (or 'segment' lines)".into(),
        });
    }
    if protocol.is_none() {
        issues.push(ParseIssue {
            line: 0,
            msg: "missing required key 'protocol'".into(),
        });
    }

    let n = segments
        .first()
        .and_then(|(_, s)| s.structural_node_count());
    if let Some(n) = n {
        for (_, spec) in &segments {
            if spec.structural_node_count().is_some_and(|m| m != n) {
                issues.push(ParseIssue {
                    line: 0,
                    msg: "all segments must share one node count".into(),
                });
            }
        }
        for &(line, id, _) in &adversaries {
            if id as usize >= n {
                issues.push(ParseIssue {
                    line,
                    msg: format!("adversary id {id} is out of range for {n} nodes"),
                });
            }
        }
        for &(line, id, _) in &init_overrides {
            if id as usize >= n {
                issues.push(ParseIssue {
                    line,
                    msg: format!("init id {id} is out of range for {n} nodes"),
                });
            }
        }
    }
    let mut seen_adv = std::collections::BTreeSet::new();
    for &(line, id, _) in &adversaries {
        if !seen_adv.insert(id) {
            issues.push(ParseIssue {
                line,
                msg: format!("adversary {id} listed twice"),
            });
        }
    }

    // assemble the initial vector
    let init: Vec<f64> = if let Some(n) = n {
        let mut v = match linspace {
            Some((a, b)) if n > 1 => (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
            Some((a, _)) => vec![a; n],
            None => vec![f64::NAN; n],
        };
        for &(_, id, value) in &init_overrides {
            if (id as usize) < n {
                v[id as usize] = value;
            }
        }
        if let Some(bad) = v.iter().position(|x| x.is_nan()) {
            issues.push(ParseIssue {
                line: 0,
                msg: format!(
                    "node {bad} has no initial value; use 'init {bad} V' or 'init-linspace A B'"
                ),
            });
        }
        v
    } else {
        // file-backed graphs: keep explicit inits, defer range checks
        init_overrides.iter().map(|&(_, _, v)| v).collect()
    };

    if !issues.is_empty() {
        return Err(issues);
    }
    Ok(ScenarioConfig {
        mode: mode.expect("validated above"),
        segments,
        protocol: protocol.expect("validated above"),
        alpha,
        beta,
        scope: scope.unwrap_or(ThreatScope::total(0)),
        adversaries: {
            let mut a: Vec<(u32, AdversaryStrategy)> =
                adversaries.into_iter().map(|(_, id, s)| (id, s)).collect();
            a.sort_by_key(|&(id, _)| id);
            a
        },
        init,
        consensus_tol,
        stall_window,
        rng_seed,
        output,
    })
}

/// Canonical text form; parsing it back yields an equal config.
pub fn serialize_scenario(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    match &cfg.mode {
        ScenarioMode::Discrete { rounds } => {
            let _ = writeln!(out, "mode discrete");
            let _ = writeln!(out, "horizon {rounds}");
        }
        ScenarioMode::Continuous {
            horizon,
            step,
            dwell,
        } => {
            let _ = writeln!(out, "mode continuous");
            let _ = writeln!(out, "horizon {horizon}");
            if let Some(h) = step {
                let _ = writeln!(out, "step {h}");
            }
            if let Some(d) = dwell {
                let _ = writeln!(out, "dwell {d}");
            }
        }
    }
    if let Some(t) = cfg.consensus_tol {
        let _ = writeln!(out, "consensus-tol {t}");
    }
    if let Some(w) = cfg.stall_window {
        let _ = writeln!(out, "stall-window {w}");
    }
    if cfg.rng_seed != 0 {
        let _ = writeln!(out, "rng {}", cfg.rng_seed);
    }
    if let Some(o) = &cfg.output {
        let _ = writeln!(out, "output {o}");
    }
    if cfg.segments.len() == 1 {
        cfg.segments[0].1.write_lines(&mut out, "graph");
    } else {
        for (t0, spec) in &cfg.segments {
            spec.write_lines(&mut out, &format!("segment {t0}"));
        }
    }
    let _ = writeln!(out, "protocol {}", cfg.protocol);
    if let Some(a) = cfg.alpha {
        let _ = writeln!(out, "alpha {a}");
    }
    if let Some(b) = cfg.beta {
        let _ = writeln!(out, "beta {b}");
    }
    let _ = writeln!(out, "scope {}", cfg.scope);
    for (id, strategy) in &cfg.adversaries {
        let _ = writeln!(out, "adversary {id} {strategy}");
    }
    for (id, v) in cfg.init.iter().enumerate() {
        let _ = writeln!(out, "init {id} {v}");
    }
    out
}

/// A scenario resolved against the filesystem and ready to execute.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub schedule: SwitchingSchedule,
    pub protocol: Protocol,
    pub policy: WeightPolicy,
    pub adversaries: BTreeMap<NodeId, AdversaryStrategy>,
    pub scope: ThreatScope,
    pub init: Vec<f64>,
    pub run_config: RunConfig,
}

impl ScenarioConfig {
    pub fn prepare(&self, base: Option<&Path>) -> Result<PreparedScenario> {
        let mut resolved: Vec<(f64, Digraph)> = Vec::new();
        for (t0, spec) in &self.segments {
            resolved.push((*t0, spec.resolve(base)?));
        }
        let n = resolved[0].1.node_count();
        if self.init.len() != n {
            return Err(Error::Config(format!(
                "{} initial values for a graph on {n} nodes",
                self.init.len()
            )));
        }
        let (schedule, mode) = match self.mode {
            ScenarioMode::Discrete { rounds } => (
                SwitchingSchedule::new(resolved, None)?,
                Mode::Discrete { rounds },
            ),
            ScenarioMode::Continuous {
                horizon,
                step,
                dwell,
            } => (
                SwitchingSchedule::new(resolved, dwell)?,
                Mode::Continuous { horizon, step },
            ),
        };
        let mut policy = match self.mode {
            ScenarioMode::Discrete { .. } => WeightPolicy::uniform_discrete(n),
            ScenarioMode::Continuous { .. } => WeightPolicy::uniform_continuous(),
        };
        if let Some(a) = self.alpha {
            policy.alpha = a;
        }
        if let Some(b) = self.beta {
            policy.beta = b;
        }
        let mut adversaries = BTreeMap::new();
        for &(id, strategy) in &self.adversaries {
            if id as usize >= n {
                return Err(Error::InvalidNode { id, n });
            }
            adversaries.insert(NodeId(id), strategy);
        }
        let mut run_config = RunConfig {
            mode,
            consensus_tol_rel: self.consensus_tol.unwrap_or(1e-6),
            stall_window: self.stall_window.unwrap_or(100),
            force_scope: false,
        };
        if run_config.stall_window == 0 {
            run_config.stall_window = 100;
        }
        Ok(PreparedScenario {
            schedule,
            protocol: self.protocol,
            policy,
            adversaries,
            scope: self.scope,
            init: self.init.clone(),
            run_config,
        })
    }
}

impl PreparedScenario {
    pub fn execute(&self) -> Result<RunTrace> {
        run(
            &self.schedule,
            self.protocol,
            &self.policy,
            &self.adversaries,
            self.scope,
            &self.init,
            &self.run_config,
        )
    }
}

/// Parses, resolves, and runs a scenario in one call.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    base: Option<&Path>,
    force_scope: bool,
) -> Result<RunTrace> {
    let mut prepared = cfg.prepare(base)?;
    prepared.run_config.force_scope = force_scope;
    prepared.execute()
}

pub const PRESET_NAMES: [&str; 4] = ["prop1-two-clique", "fig2-local", "grow-k5", "sec6-hub"];

/// Ready-to-run experiment presets.
///
/// - `prop1-two-clique`: two joined cliques whose extreme-value filters
///   discard the whole opposite side; the run freezes with the gap stuck
///   at its initial value even though no node misbehaves.
/// - `fig2-local`: the seven-node demo graph with two compromised nodes
///   that form a valid 1-local set; filtering with parameter 1 still
///   reaches consensus.
/// - `grow-k5`: a ten-node (3,2)-robust graph grown from the complete
///   five-node seed with four preferential attachments per new node, run
///   against one constant adversary.
/// - `sec6-hub`: the fifteen-node hub network whose highest-degree node
///   (id 14) broadcasts a constant 2, aiming to drag everyone to 2;
///   filtering holds the group inside [0, 1]. Run it with `--protocol
///   lcp` to watch the unfiltered update get captured.
pub fn preset(name: &str) -> Result<ScenarioConfig> {
    match name {
        "prop1-two-clique" => Ok(ScenarioConfig {
            mode: ScenarioMode::Discrete { rounds: 1000 },
            segments: vec![(
                0.0,
                GraphSpec::TwoClique {
                    n1: 4,
                    n2: 5,
                    cross: 2,
                },
            )],
            protocol: Protocol::Arcp { f: 2 },
            alpha: None,
            beta: None,
            scope: ThreatScope::total(2),
            adversaries: Vec::new(),
            init: (0..9).map(|i| if i < 4 { 0.0 } else { 1.0 }).collect(),
            consensus_tol: None,
            stall_window: None,
            rng_seed: 0,
            output: None,
        }),
        "fig2-local" => Ok(ScenarioConfig {
            mode: ScenarioMode::Discrete { rounds: 2000 },
            segments: vec![(0.0, GraphSpec::DemoSevenNode)],
            protocol: Protocol::Arcp { f: 1 },
            alpha: None,
            beta: None,
            scope: ThreatScope::local(1),
            adversaries: vec![
                (
                    0,
                    AdversaryStrategy::Pull {
                        target: 2.0,
                        rate: 0.1,
                    },
                ),
                (3, AdversaryStrategy::Constant { value: 2.0 }),
            ],
            init: (0..7).map(|i| i as f64 / 6.0).collect(),
            consensus_tol: None,
            stall_window: None,
            rng_seed: 0,
            output: None,
        }),
        "grow-k5" => Ok(ScenarioConfig {
            mode: ScenarioMode::Discrete { rounds: 5000 },
            segments: vec![(
                0.0,
                GraphSpec::GrowComplete {
                    seed_n: 5,
                    r: 3,
                    s: 2,
                    count: 5,
                    degree: 4,
                    rng: 7,
                },
            )],
            protocol: Protocol::Arcp { f: 1 },
            alpha: None,
            beta: None,
            scope: ThreatScope::total(1),
            adversaries: vec![(9, AdversaryStrategy::Constant { value: 2.0 })],
            init: (0..10).map(|i| i as f64 / 9.0).collect(),
            consensus_tol: None,
            stall_window: None,
            rng_seed: 7,
            output: None,
        }),
        "sec6-hub" => Ok(ScenarioConfig {
            mode: ScenarioMode::Continuous {
                horizon: 40.0,
                step: None,
                dwell: None,
            },
            segments: vec![(0.0, GraphSpec::DemoHubNetwork)],
            protocol: Protocol::Arcp { f: 1 },
            alpha: None,
            beta: None,
            scope: ThreatScope::total(1),
            adversaries: vec![(14, AdversaryStrategy::Constant { value: 2.0 })],
            init: (0..15)
                .map(|i| if i < 14 { i as f64 / 13.0 } else { 2.0 })
                .collect(),
            consensus_tol: None,
            stall_window: None,
            rng_seed: 0,
            output: None,
        }),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// One line of a batch summary. A pure function of the trace: rebuilding
/// the row from a stored trace reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub verdict: String,
    pub final_psi: f64,
    /// Midpoint of the final normal range (the consensus value when the
    /// verdict is consensus).
    pub final_mid: f64,
    /// Rounds (discrete) or time units (continuous) actually executed.
    pub duration: f64,
}

pub fn summarize(name: &str, trace: &RunTrace) -> SummaryRow {
    let k = trace.times.len() - 1;
    SummaryRow {
        name: name.to_string(),
        verdict: trace.verdict.to_string(),
        final_psi: trace.psi[k],
        final_mid: (trace.min_normal[k] + trace.max_normal[k]) / 2.0,
        duration: trace.times[k],
    }
}

pub fn format_summary_table(rows: &[std::result::Result<SummaryRow, String>]) -> String {
    let mut out = String::from("name,verdict,final_psi,L,duration\n");
    for row in rows {
        match row {
            Ok(r) => {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.name, r.verdict, r.final_psi, r.final_mid, r.duration
                );
            }
            Err(msg) => {
                let _ = writeln!(out, "error,{},,,", msg.replace(',', ";"));
            }
        }
    }
    out
}

/// Stable 64-bit FNV-1a over the canonical serialization; names batch
/// output files so distinct configs never collide.
pub fn scenario_hash(cfg: &ScenarioConfig) -> u64 {
    let text = serialize_scenario(cfg);
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Summary plus full trace of one batched run.
#[derive(Debug, Clone)]
pub struct BatchResult {
    pub summary: SummaryRow,
    pub trace: RunTrace,
}

/// Runs a set of scenarios, optionally in parallel, preserving input
/// order in the output. Per-run failures become error rows; the batch
/// keeps going.
pub fn run_batch(
    items: &[(String, ScenarioConfig)],
    parallelism: usize,
    base: Option<&Path>,
) -> Vec<std::result::Result<BatchResult, String>> {
    let one = |name: &str, cfg: &ScenarioConfig| {
        run_scenario(cfg, base, false)
            .map(|trace| BatchResult {
                summary: summarize(name, &trace),
                trace,
            })
            .map_err(|e| format!("{name}: {e}"))
    };
    let jobs = parallelism.max(1);
    if jobs == 1 || items.len() <= 1 {
        return items.iter().map(|(name, cfg)| one(name, cfg)).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots: Vec<std::sync::Mutex<Option<std::result::Result<BatchResult, String>>>> = (0..items
        .len())
        .map(|_| std::sync::Mutex::new(None))
        .collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(items.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let (name, cfg) = &items[i];
                *slots[i].lock().expect("result slot") = Some(one(name, cfg));
            });
        }
    });
    slots
        .into_iter()
        .map(|cell| {
            cell.into_inner()
                .expect("result slot")
                .expect("slot filled")
        })
        .collect()
}

/// Writes the trace CSV, the removed-set log, and a gnuplot script next
/// to them. Returns the paths written.
pub fn write_outputs(dir: &Path, stem: &str, trace: &RunTrace) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, trace.to_csv())?;
    let removed_path = dir.join(format!("{stem}-removed.csv"));
    std::fs::write(&removed_path, trace.removed_log_csv())?;
    let plot_path = dir.join(format!("{stem}.gnuplot"));
    std::fs::write(
        &plot_path,
        gnuplot_script(&format!("{stem}.csv"), trace.node_count()),
    )?;
    Ok(vec![csv_path, removed_path, plot_path])
}

fn gnuplot_script(csv_name: &str, n: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set key outside right");
    let _ = writeln!(out, "set xlabel 't'");
    let _ = writeln!(out, "set ylabel 'value'");
    let _ = writeln!(
        out,
        "plot for [i=2:{}] '{csv_name}' using 1:i with lines title columnheader(i)",
        n + 1
    );
    let _ = writeln!(out, "pause -1");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::validate_scope;
    use crate::engine::Verdict;
    use crate::robustness::{
        is_r_robust, is_rs_robust, is_rs_robust_with_limit, maximal_robustness, reach_count,
    };

    fn ids(v: &[u32]) -> Vec<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn minimal_scenario_gets_defaults() {
        let cfg = parse_scenario(
            "mode discrete\nhorizon 100\ngraph complete 3\nprotocol lcp\ninit-linspace 0 1\n",
        )
        .unwrap();
        assert_eq!(cfg.scope, ThreatScope::total(0));
        assert_eq!(cfg.rng_seed, 0);
        assert_eq!(cfg.init, vec![0.0, 0.5, 1.0]);
        assert!(cfg.adversaries.is_empty());
    }

    #[test]
    fn out_of_range_node_reports_its_line() {
        let err = parse_scenario(
            "mode discrete\nhorizon 100\ngraph complete 10\nprotocol lcp\n\
             init-linspace 0 1\nadversary 99 constant 2.0\n",
        )
        .unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].line, 6);
        assert!(err[0].msg.contains("99"));
    }

    #[test]
    fn unknown_key_and_missing_required_are_reported() {
        let err = parse_scenario("frobnicate 3\n").unwrap_err();
        let msgs: Vec<String> = err.iter().map(|i| i.msg.clone()).collect();
        assert!(msgs.iter().any(|m| m.contains("unknown key 'frobnicate'")));
        assert!(msgs.iter().any(|m| m.contains("'mode'")));
        assert!(msgs.iter().any(|m| m.contains("'graph'")));
        assert!(msgs.iter().any(|m| m.contains("'protocol'")));
    }

    #[test]
    fn presets_parse_back_to_themselves() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let text = serialize_scenario(&cfg);
            let reparsed =
                parse_scenario(&text).unwrap_or_else(|e| panic!("{name} did not reparse: {e:?}"));
            assert_eq!(cfg, reparsed, "round trip failed for {name}");
            // and once more: serialize of the reparse is a fixed point
            assert_eq!(text, serialize_scenario(&reparsed));
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn inline_graphs_round_trip() {
        let text = "mode discrete\nhorizon 10\ngraph inline 3\nedge 0 1\nedge 1 -> 2\n\
                    protocol arcp 1\ninit-linspace 0 1\n";
        let cfg = parse_scenario(text).unwrap();
        let g = cfg.segments[0].1.resolve(None).unwrap();
        assert!(g.has_edge(NodeId(0), NodeId(1)));
        assert!(g.has_edge(NodeId(1), NodeId(0)));
        assert!(g.has_edge(NodeId(1), NodeId(2)));
        assert!(!g.has_edge(NodeId(2), NodeId(1)));
        let reparsed = parse_scenario(&serialize_scenario(&cfg)).unwrap();
        assert_eq!(cfg, reparsed);
    }

    #[test]
    fn segments_must_share_node_count() {
        let err = parse_scenario(
            "mode discrete\nhorizon 10\nsegment 0 complete 3\nsegment 5 complete 4\n\
             protocol lcp\ninit-linspace 0 1\n",
        )
        .unwrap_err();
        assert!(err.iter().any(|i| i.msg.contains("share one node count")));
    }

    #[test]
    fn every_preset_passes_scope_validation() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            let prepared = cfg.prepare(None).unwrap();
            let advs = prepared.adversaries.keys().copied().collect();
            let report = validate_scope(&prepared.schedule, &advs, prepared.scope);
            assert!(
                report.ok,
                "{name} violates its own scope: {:?}",
                report.violations
            );
        }
    }

    #[test]
    fn demo_seven_node_has_the_advertised_robustness() {
        let g = demo_seven_node();
        assert!(is_r_robust(&g, 3).unwrap().verdict);
        assert!(is_rs_robust(&g, 2, 2).unwrap().verdict);
        assert_eq!(maximal_robustness(&g).unwrap(), (3, 1));
        let cert = is_rs_robust(&g, 3, 2).unwrap();
        assert!(!cert.verdict);
        // the advertised failing pair, re-validated from scratch
        let s1 = ids(&[0, 2, 4, 5, 6]);
        let s2 = ids(&[1, 3]);
        let r1 = reach_count(&g, &s1, 3).unwrap();
        let r2 = reach_count(&g, &s2, 3).unwrap();
        assert_eq!((r1, r2), (0, 1));
        assert!(reach_count(&g, &ids(&[1]), 3).unwrap() == 1);
        assert!(g.in_neighbors(NodeId(3)).unwrap().len() == 3);
    }

    #[test]
    fn demo_variant_realizes_the_2_5_witness() {
        let g = demo_seven_node_variant();
        assert!(is_r_robust(&g, 3).unwrap().verdict);
        assert!(!is_rs_robust(&g, 3, 2).unwrap().verdict);
        let cert = is_rs_robust(&g, 2, 5).unwrap();
        assert!(!cert.verdict);
        let s1 = ids(&[0, 4, 5]);
        let s2 = ids(&[1, 2, 3]);
        let r1 = reach_count(&g, &s1, 2).unwrap();
        let r2 = reach_count(&g, &s2, 2).unwrap();
        assert!(r1 < 3 && r2 < 3 && r1 + r2 < 5, "r1={r1} r2={r2}");
    }

    #[test]
    fn preset_graphs_carry_their_robustness_claims() {
        // two-clique: 2-robust but not 3-robust (that is the point)
        let g = preset("prop1-two-clique").unwrap().segments[0]
            .1
            .resolve(None)
            .unwrap();
        assert!(is_r_robust(&g, 2).unwrap().verdict);
        assert!(!is_r_robust(&g, 3).unwrap().verdict);
        // grow-k5: (3,2)-robust by construction, re-checked
        let g = preset("grow-k5").unwrap().segments[0]
            .1
            .resolve(None)
            .unwrap();
        assert_eq!(g.node_count(), 10);
        assert!(is_rs_robust(&g, 3, 2).unwrap().verdict);
        // hub network: (2,2)-robust at the enumeration cap
        let g = preset("sec6-hub").unwrap().segments[0]
            .1
            .resolve(None)
            .unwrap();
        assert_eq!(g.node_count(), 15);
        assert!(is_rs_robust_with_limit(&g, 2, 2, 15).unwrap().verdict);
        let hub_degree = g.in_neighbors(NodeId(14)).unwrap().len();
        for i in 0..14u32 {
            assert!(g.in_neighbors(NodeId(i)).unwrap().len() < hub_degree);
        }
    }

    #[test]
    fn summary_is_a_pure_function_of_the_trace() {
        let cfg = preset("prop1-two-clique").unwrap();
        let trace = run_scenario(&cfg, None, false).unwrap();
        let a = summarize("x", &trace);
        let b = summarize("x", &trace);
        assert_eq!(a, b);
        assert_eq!(a.final_psi, 1.0);
        assert_eq!(a.verdict, "stalled");
    }

    #[test]
    fn batch_preserves_order_and_survives_failures() {
        let good = preset("prop1-two-clique").unwrap();
        let mut bad = good.clone();
        bad.init.pop(); // wrong length, fails at prepare
        let items = vec![("b-bad".to_string(), bad), ("a-good".to_string(), good)];
        let rows = run_batch(&items, 2, None);
        assert_eq!(rows.len(), 2);
        assert!(rows[0].is_err());
        let ok = rows[1].as_ref().unwrap();
        assert_eq!(ok.summary.name, "a-good");
        assert_eq!(ok.summary, summarize("a-good", &ok.trace));
        let summaries: Vec<_> = rows
            .iter()
            .map(|r| r.as_ref().map(|b| b.summary.clone()).map_err(|e| e.clone()))
            .collect();
        let table = format_summary_table(&summaries);
        assert!(table.starts_with("name,verdict,final_psi,L,duration"));
        assert_eq!(table.lines().count(), 3);
        assert!(format_summary_table(&[]).lines().count() == 1);
    }

    #[test]
    fn scenario_hash_distinguishes_configs() {
        let a = preset("prop1-two-clique").unwrap();
        let mut b = a.clone();
        b.rng_seed = 1;
        assert_ne!(scenario_hash(&a), scenario_hash(&b));
        assert_eq!(scenario_hash(&a), scenario_hash(&a.clone()));
    }

    #[test]
    fn outputs_land_on_disk() {
        let dir = std::env::temp_dir().join(format!("arcp-scenario-test-{}", std::process::id()));
        let cfg = preset("prop1-two-clique").unwrap();
        let trace = run_scenario(&cfg, None, false).unwrap();
        let paths = write_outputs(&dir, "demo", &trace).unwrap();
        assert_eq!(paths.len(), 3);
        for p in &paths {
            assert!(p.exists());
        }
        let csv = std::fs::read_to_string(&paths[0]).unwrap();
        assert!(csv.starts_with("t,node_0"));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn hub_batch_shows_capture_versus_containment() {
        let arcp = preset("sec6-hub").unwrap();
        let mut lcp = arcp.clone();
        lcp.protocol = Protocol::Lcp;
        let items = vec![
            ("sec6-hub-lcp".to_string(), lcp),
            ("sec6-hub-arcp".to_string(), arcp),
        ];
        let rows = run_batch(&items, 2, None);
        let lcp_row = rows[0].as_ref().unwrap();
        assert!(
            (lcp_row.summary.final_mid - 2.0).abs() < 1e-3,
            "unfiltered run should be captured at 2, got {}",
            lcp_row.summary.final_mid
        );
        let arcp_row = rows[1].as_ref().unwrap();
        assert!(arcp_row.summary.verdict.starts_with("consensus"));
        assert!((0.0..=1.0).contains(&arcp_row.summary.final_mid));
    }

    #[test]
    fn fig2_preset_reaches_consensus_despite_two_adversaries() {
        let cfg = preset("fig2-local").unwrap();
        let trace = run_scenario(&cfg, None, false).unwrap();
        match trace.verdict {
            Verdict::Consensus { value } => {
                // normal ids are 1,2,4,5,6 with initial values in [1/6, 1]
                assert!(value >= 1.0 / 6.0 && value <= 1.0);
            }
            other => panic!("expected consensus, got {other}"),
        }
    }
}
