//! Deterministic synchronous execution: a discrete-time stepper and a
//! fixed-step explicit-Euler integrator over a switching schedule, with
//! instrumentation of the normal-value extremes, the gap `psi = M - m`,
//! safety violations, and per-round removed-set logs.
//!
//! Every run is single-threaded and bit-reproducible: identical inputs
//! give identical traces. Within a round all normal nodes read the same
//! snapshot of the previous state.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use crate::adversaries::{validate_scope, AdversaryStrategy, ThreatScope};
use crate::digraph::{NodeId, SwitchingSchedule};
use crate::error::{Error, Result};
use crate::protocols::{
    arcp_filter, continuous_rate, discrete_step_value, discrete_weights, lcp_rate, lcp_step,
    WeightPolicy,
};

/// Which update rule the normal nodes run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Unfiltered linear consensus.
    Lcp,
    /// Extreme-value filtering with parameter `f`.
    Arcp { f: u32 },
}

impl Protocol {
    pub fn filter_parameter(&self) -> u32 {
        match *self {
            Protocol::Lcp => 0,
            Protocol::Arcp { f } => f,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Protocol::Lcp => write!(out, "lcp"),
            Protocol::Arcp { f } => write!(out, "arcp {f}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Discrete {
        rounds: usize,
    },
    Continuous {
        horizon: f64,
        /// Integration step; `None` picks the default rule.
        step: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    /// Consensus is declared when `psi` falls to this fraction of `psi[0]`.
    pub consensus_tol_rel: f64,
    /// A run stalls when `psi` drops by less than 1e-12 across this many
    /// recorded steps while still above the consensus tolerance.
    pub stall_window: usize,
    /// Run even when the adversary set violates the declared scope.
    pub force_scope: bool,
}

impl RunConfig {
    pub fn discrete(rounds: usize) -> Self {
        RunConfig {
            mode: Mode::Discrete { rounds },
            consensus_tol_rel: 1e-6,
            stall_window: 100,
            force_scope: false,
        }
    }

    pub fn continuous(horizon: f64, step: Option<f64>) -> Self {
        RunConfig {
            mode: Mode::Continuous { horizon, step },
            consensus_tol_rel: 1e-6,
            stall_window: 100,
            force_scope: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// The normal values agree up to tolerance; carries the midpoint of
    /// their final range.
    Consensus { value: f64 },
    /// The gap stopped shrinking (or the horizon ran out) above tolerance.
    Stalled,
    /// A normal value left the initial interval. Should be unreachable
    /// for in-scope adversaries; reported instead of panicking so batch
    /// runs can surface it.
    SafetyViolated { node: NodeId, time: f64 },
}

impl Verdict {
    /// Process exit code convention: 0 consensus, 2 stalled, 3 safety.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Consensus { .. } => 0,
            Verdict::Stalled => 2,
            Verdict::SafetyViolated { .. } => 3,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Consensus { value } => write!(out, "consensus {value}"),
            Verdict::Stalled => write!(out, "stalled"),
            Verdict::SafetyViolated { node, time } => {
                write!(out, "safety-violated node {node} at t={time}")
            }
        }
    }
}

/// Full record of one run: time-indexed values of all nodes, the normal
/// extremes and their gap, removed-set logs, and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub times: Vec<f64>,
    /// `values[k][i]` is node `i` at `times[k]` (adversaries included).
    pub values: Vec<Vec<f64>>,
    /// Gap `max - min` over normal nodes per recorded step.
    pub psi: Vec<f64>,
    pub min_normal: Vec<f64>,
    pub max_normal: Vec<f64>,
    /// Nonempty removed sets per recorded step: `(node, removed ids)`.
    pub removed_log: Vec<Vec<(NodeId, Vec<NodeId>)>>,
    /// `[m[0], M[0]]` over the normal nodes.
    pub safety_interval: (f64, f64),
    pub adversaries: Vec<NodeId>,
    pub verdict: Verdict,
}

impl RunTrace {
    pub fn node_count(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_normal(&self, i: NodeId) -> bool {
        self.adversaries.binary_search(&i).is_err()
    }

    pub fn final_psi(&self) -> f64 {
        *self
            .psi
            .last()
            .expect("trace has at least the initial step")
    }

    /// CSV with header `t,node_0,...,node_{n-1},psi,m,M`.
    pub fn to_csv(&self) -> String {
        let n = self.node_count();
        let mut out = String::new();
        out.push('t');
        for i in 0..n {
            let _ = write!(out, ",node_{i}");
        }
        out.push_str(",psi,m,M\n");
        for k in 0..self.times.len() {
            let _ = write!(out, "{}", self.times[k]);
            for i in 0..n {
                let _ = write!(out, ",{}", self.values[k][i]);
            }
            let _ = writeln!(
                out,
                ",{},{},{}",
                self.psi[k], self.min_normal[k], self.max_normal[k]
            );
        }
        out
    }

    /// CSV with header `t,node,removed_ids`; one row per node per step
    /// with a nonempty removed set, ids joined by `;`.
    pub fn removed_log_csv(&self) -> String {
        let mut out = String::from("t,node,removed_ids\n");
        for (k, entries) in self.removed_log.iter().enumerate() {
            for (node, removed) in entries {
                let ids: Vec<String> = removed.iter().map(|r| r.to_string()).collect();
                let _ = writeln!(out, "{},{},{}", self.times[k], node, ids.join(";"));
            }
        }
        out
    }
}

struct Recorder {
    trace: RunTrace,
    normals: Vec<NodeId>,
    tol_abs: f64,
    stall_window: usize,
    safety_slack: f64,
    first_violation: Option<(NodeId, f64)>,
}

impl Recorder {
    fn new(
        x0: &[f64],
        adversaries: Vec<NodeId>,
        consensus_tol_rel: f64,
        stall_window: usize,
        continuous: bool,
    ) -> Self {
        let normals: Vec<NodeId> = (0..x0.len() as u32)
            .map(NodeId)
            .filter(|i| adversaries.binary_search(i).is_err())
            .collect();
        let (m0, max0) = extremes(x0, &normals);
        let psi0 = max0 - m0;
        let trace = RunTrace {
            times: vec![0.0],
            values: vec![x0.to_vec()],
            psi: vec![psi0],
            min_normal: vec![m0],
            max_normal: vec![max0],
            removed_log: vec![Vec::new()],
            safety_interval: (m0, max0),
            adversaries,
            verdict: Verdict::Stalled,
        };
        Recorder {
            trace,
            normals,
            tol_abs: consensus_tol_rel * psi0,
            stall_window,
            safety_slack: if continuous { 1e-9 * psi0 } else { 0.0 },
            first_violation: None,
        }
    }

    /// Records one step. Returns a verdict when the run should stop early.
    /// A safety violation never stops the run: once it happens the
    /// monotonicity guarantees behind early stopping are void, so the
    /// engine records the first offender and plays out the full horizon.
    fn record(
        &mut self,
        t: f64,
        x: &[f64],
        removed: Vec<(NodeId, Vec<NodeId>)>,
    ) -> Option<Verdict> {
        let (m, max) = extremes(x, &self.normals);
        self.trace.times.push(t);
        self.trace.values.push(x.to_vec());
        self.trace.psi.push(max - m);
        self.trace.min_normal.push(m);
        self.trace.max_normal.push(max);
        self.trace.removed_log.push(removed);
        let (lo, hi) = self.trace.safety_interval;
        if self.first_violation.is_none() {
            for &i in &self.normals {
                let v = x[i.index()];
                if v < lo - self.safety_slack || v > hi + self.safety_slack {
                    self.first_violation = Some((i, t));
                    break;
                }
            }
        }
        if self.first_violation.is_some() {
            return None;
        }
        self.check_gap()
    }

    fn check_gap(&self) -> Option<Verdict> {
        let psi = &self.trace.psi;
        let last = *psi.last().expect("nonempty");
        if last <= self.tol_abs {
            let k = psi.len() - 1;
            let mid = (self.trace.min_normal[k] + self.trace.max_normal[k]) / 2.0;
            return Some(Verdict::Consensus { value: mid });
        }
        if psi.len() > self.stall_window {
            let before = psi[psi.len() - 1 - self.stall_window];
            if before - last < 1e-12 {
                return Some(Verdict::Stalled);
            }
        }
        None
    }

    fn finish(mut self, verdict: Option<Verdict>) -> RunTrace {
        self.trace.verdict = if let Some((node, time)) = self.first_violation {
            Verdict::SafetyViolated { node, time }
        } else {
            // horizon exhausted: classify by the final gap
            verdict.unwrap_or_else(|| self.check_gap().unwrap_or(Verdict::Stalled))
        };
        self.trace
    }
}

fn extremes(x: &[f64], normals: &[NodeId]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in normals {
        lo = lo.min(x[i.index()]);
        hi = hi.max(x[i.index()]);
    }
    if normals.is_empty() {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

fn prepare(
    schedule: &SwitchingSchedule,
    adversaries: &BTreeMap<NodeId, AdversaryStrategy>,
    scope: ThreatScope,
    init: &[f64],
    force_scope: bool,
) -> Result<(Vec<NodeId>, Vec<f64>)> {
    let n = schedule.node_count();
    if init.len() != n {
        return Err(Error::Config(format!(
            "initial vector has {} entries for a graph on {n} nodes",
            init.len()
        )));
    }
    for &id in adversaries.keys() {
        if id.index() >= n {
            return Err(Error::InvalidNode { id: id.0, n });
        }
    }
    let adv_set = adversaries.keys().copied().collect();
    if !force_scope {
        validate_scope(schedule, &adv_set, scope).into_error()?;
    }
    let mut x0 = init.to_vec();
    for (&id, strategy) in adversaries {
        x0[id.index()] = strategy.initial(init[id.index()]);
    }
    Ok((adversaries.keys().copied().collect(), x0))
}

/// Synchronous discrete-time run: every normal node reads the round-`t`
/// state, filters (under ARC-P), and applies its weighted update;
/// adversaries emit their strategy values.
pub fn run_discrete(
    schedule: &SwitchingSchedule,
    protocol: Protocol,
    policy: &WeightPolicy,
    adversaries: &BTreeMap<NodeId, AdversaryStrategy>,
    scope: ThreatScope,
    init: &[f64],
    cfg: &RunConfig,
) -> Result<RunTrace> {
    let rounds = match cfg.mode {
        Mode::Discrete { rounds } => rounds,
        Mode::Continuous { .. } => {
            return Err(Error::Config(
                "run_discrete needs a discrete-mode config".into(),
            ))
        }
    };
    for (_, g) in schedule.segments() {
        policy.validate_discrete(g)?;
    }
    let (adv_ids, x0) = prepare(schedule, adversaries, scope, init, cfg.force_scope)?;
    let mut recorder = Recorder::new(&x0, adv_ids, cfg.consensus_tol_rel, cfg.stall_window, false);
    if let Some(v) = recorder.check_gap() {
        return Ok(recorder.finish(Some(v)));
    }

    let mut x = x0;
    let mut outcome = None;
    for t in 0..rounds {
        let graph = schedule.graph_at(t as f64)?;
        let mut next = x.clone();
        let mut removed_entries = Vec::new();
        for i in graph.nodes() {
            if let Some(strategy) = adversaries.get(&i) {
                next[i.index()] = strategy.emit((t + 1) as f64, x[i.index()], 1.0);
                continue;
            }
            match protocol {
                Protocol::Lcp => {
                    next[i.index()] = lcp_step(i, &x, graph, policy)?;
                }
                Protocol::Arcp { f } => {
                    let neighbor_values: Vec<(NodeId, f64)> = graph
                        .in_neighbors(i)?
                        .iter()
                        .map(|&j| (j, x[j.index()]))
                        .collect();
                    let filtered = arcp_filter(i, x[i.index()], &neighbor_values, f)?;
                    let weights = discrete_weights(&filtered, policy, neighbor_values.len())?;
                    let kept_values: Vec<(NodeId, f64)> = neighbor_values
                        .iter()
                        .copied()
                        .filter(|(id, _)| filtered.kept.binary_search(id).is_ok())
                        .collect();
                    next[i.index()] = discrete_step_value(x[i.index()], &kept_values, &weights)?;
                    if !filtered.removed.is_empty() {
                        removed_entries.push((i, filtered.removed));
                    }
                }
            }
        }
        x = next;
        if let Some(v) = recorder.record((t + 1) as f64, &x, removed_entries) {
            outcome = Some(v);
            break;
        }
    }
    Ok(recorder.finish(outcome))
}

/// Default integration step for a continuous run: small against the
/// horizon, the dwell time, and the fastest possible contraction rate
/// (`beta * (n - 1)`), which keeps the explicit Euler update a convex
/// combination and therefore inside the safety interval.
pub fn default_step(schedule: &SwitchingSchedule, policy: &WeightPolicy, horizon: f64) -> f64 {
    let n = schedule.node_count();
    let mut h = horizon / 1e4;
    let dwell = schedule.dwell();
    if dwell.is_finite() {
        h = h.min(1e-3 * dwell);
    }
    let rate_cap = policy.beta * n.saturating_sub(1) as f64;
    if rate_cap > 0.0 {
        h = h.min(0.5 / rate_cap);
    }
    h
}

/// Fixed-step explicit-Euler run of the continuous dynamics. Adversary
/// trajectories are evaluated analytically on the step grid; topology
/// switches take effect at the first grid point inside the new segment.
pub fn run_continuous(
    schedule: &SwitchingSchedule,
    protocol: Protocol,
    policy: &WeightPolicy,
    adversaries: &BTreeMap<NodeId, AdversaryStrategy>,
    scope: ThreatScope,
    init: &[f64],
    cfg: &RunConfig,
) -> Result<RunTrace> {
    let (horizon, step) = match cfg.mode {
        Mode::Continuous { horizon, step } => (horizon, step),
        Mode::Discrete { .. } => {
            return Err(Error::Config(
                "run_continuous needs a continuous-mode config".into(),
            ))
        }
    };
    if horizon <= 0.0 {
        return Err(Error::Config("horizon must be positive".into()));
    }
    for (_, g) in schedule.segments() {
        policy.validate_continuous(g)?;
    }
    let h = step.unwrap_or_else(|| default_step(schedule, policy, horizon));
    if !(h > 0.0) {
        return Err(Error::Config(format!("step must be positive, got {h}")));
    }
    let dwell = schedule.dwell();
    if dwell.is_finite() && h > dwell / 10.0 {
        return Err(Error::Config(format!(
            "step {h} exceeds one tenth of the dwell time {dwell}"
        )));
    }

    let (adv_ids, x0) = prepare(schedule, adversaries, scope, init, cfg.force_scope)?;
    let mut recorder = Recorder::new(&x0, adv_ids, cfg.consensus_tol_rel, cfg.stall_window, true);
    if let Some(v) = recorder.check_gap() {
        return Ok(recorder.finish(Some(v)));
    }

    let steps = (horizon / h).floor() as usize;
    let mut x = x0;
    let mut outcome = None;
    for k in 0..steps {
        let t = k as f64 * h;
        let t_next = (k + 1) as f64 * h;
        let graph = schedule.graph_at(t)?;
        let mut next = x.clone();
        let mut removed_entries = Vec::new();
        for i in graph.nodes() {
            if let Some(strategy) = adversaries.get(&i) {
                next[i.index()] = strategy.emit(t_next, x[i.index()], h);
                continue;
            }
            let rate = match protocol {
                Protocol::Lcp => lcp_rate(i, &x, graph, policy)?,
                Protocol::Arcp { f } => {
                    // filter evaluated on the step grid, no event detection
                    let rate = continuous_rate(i, &x, graph, f, policy)?;
                    let neighbor_values: Vec<(NodeId, f64)> = graph
                        .in_neighbors(i)?
                        .iter()
                        .map(|&j| (j, x[j.index()]))
                        .collect();
                    let filtered = arcp_filter(i, x[i.index()], &neighbor_values, f)?;
                    if !filtered.removed.is_empty() {
                        removed_entries.push((i, filtered.removed));
                    }
                    rate
                }
            };
            next[i.index()] = x[i.index()] + h * rate;
        }
        x = next;
        if let Some(v) = recorder.record(t_next, &x, removed_entries) {
            outcome = Some(v);
            break;
        }
    }
    Ok(recorder.finish(outcome))
}

/// Dispatches on the config's mode.
pub fn run(
    schedule: &SwitchingSchedule,
    protocol: Protocol,
    policy: &WeightPolicy,
    adversaries: &BTreeMap<NodeId, AdversaryStrategy>,
    scope: ThreatScope,
    init: &[f64],
    cfg: &RunConfig,
) -> Result<RunTrace> {
    match cfg.mode {
        Mode::Discrete { .. } => {
            run_discrete(schedule, protocol, policy, adversaries, scope, init, cfg)
        }
        Mode::Continuous { .. } => {
            run_continuous(schedule, protocol, policy, adversaries, scope, init, cfg)
        }
    }
}

/// Per-window contraction ratios of a discrete trace. On an
/// (F+1,F+1)-robust topology under an F-total adversary every ratio
/// `psi[t0 + N - 1] / psi[t0]` stays at or below
/// `c = 1 - alpha^(N-1) / 2`, `N` the normal-node count.
#[derive(Debug, Clone)]
pub struct ContractionReport {
    pub c: f64,
    pub window: usize,
    /// `(t0, psi[t0 + window] / psi[t0])` for every window with
    /// `psi[t0] > 0`; windows that already converged are skipped.
    pub ratios: Vec<(usize, f64)>,
}

impl ContractionReport {
    pub fn violations(&self) -> Vec<(usize, f64)> {
        self.ratios
            .iter()
            .copied()
            .filter(|&(_, ratio)| ratio > self.c)
            .collect()
    }
}

pub fn measure_contraction(
    trace: &RunTrace,
    n_normal: usize,
    alpha: f64,
) -> Result<ContractionReport> {
    if n_normal < 2 {
        return Err(Error::Input(
            "contraction windows need at least two normal nodes".into(),
        ));
    }
    let window = n_normal - 1;
    let c = 1.0 - alpha.powi(window as i32) / 2.0;
    let mut ratios = Vec::new();
    if trace.psi.len() > window {
        for t0 in 0..trace.psi.len() - window {
            if trace.psi[t0] > 0.0 {
                ratios.push((t0, trace.psi[t0 + window] / trace.psi[t0]));
            }
        }
    }
    Ok(ContractionReport { c, window, ratios })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateViolation {
    pub time: f64,
    pub node: NodeId,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Re-derives every normal node's rate from a continuous trace and checks
/// it against the envelope `B (m - x_i) <= rate <= B (M - x_i)` with
/// `B = beta * (n - f - 1)`. Meaningful when each normal node has at most
/// `f` adversarial in-neighbors throughout the run.
pub fn check_rate_bounds(
    trace: &RunTrace,
    schedule: &SwitchingSchedule,
    policy: &WeightPolicy,
    f: u32,
    beta: f64,
) -> Result<Vec<RateViolation>> {
    let n = trace.node_count();
    let cap = beta * (n as f64 - f as f64 - 1.0);
    let slack = 1e-12 * trace.psi.first().copied().unwrap_or(0.0).max(1.0);
    let mut violations = Vec::new();
    for k in 0..trace.times.len() {
        let t = trace.times[k];
        let graph = schedule.graph_at(t)?;
        let x = &trace.values[k];
        for i in graph.nodes() {
            if !trace.is_normal(i) {
                continue;
            }
            let rate = continuous_rate(i, x, graph, f, policy)?;
            let lower = cap * (trace.min_normal[k] - x[i.index()]);
            let upper = cap * (trace.max_normal[k] - x[i.index()]);
            if rate < lower - slack || rate > upper + slack {
                violations.push(RateViolation {
                    time: t,
                    node: i,
                    rate,
                    lower,
                    upper,
                });
            }
        }
    }
    Ok(violations)
}
