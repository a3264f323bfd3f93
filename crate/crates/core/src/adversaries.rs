//! Malicious-node behavior strategies, threat-scope validation, and the
//! attack construction that defeats consensus on insufficiently robust
//! topologies.
//!
//! A malicious node broadcasts one common value to all out-neighbors per
//! time step (the engine stores a single value per node, so this holds
//! structurally) and, in continuous time, follows a uniformly continuous
//! trajectory. The canned strategies below are deterministic pure
//! functions of time and the node's own previous value; arbitrary custom
//! behavior can be plugged in wherever an `AdversaryStrategy` is accepted.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::digraph::{NodeId, SwitchingSchedule};
use crate::error::{Error, Result};
use crate::robustness::{cheapest_failing_pair, Witness, DEFAULT_ENUMERATION_LIMIT};

/// Upper bound on compromised nodes: network-wide (`FTotal`) or per
/// in-neighborhood at every time (`FLocal`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThreatScope {
    pub kind: ScopeKind,
    pub f: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScopeKind {
    FTotal,
    FLocal,
}

impl ThreatScope {
    pub fn total(f: u32) -> Self {
        ThreatScope {
            kind: ScopeKind::FTotal,
            f,
        }
    }

    pub fn local(f: u32) -> Self {
        ThreatScope {
            kind: ScopeKind::FLocal,
            f,
        }
    }
}

impl fmt::Display for ThreatScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScopeKind::FTotal => write!(f, "total {}", self.f),
            ScopeKind::FLocal => write!(f, "local {}", self.f),
        }
    }
}

/// One scope violation: which normal node sees too many adversaries on
/// which schedule segment (segment 0 covers the F-total cardinality check).
#[derive(Debug, Clone, PartialEq)]
pub struct ScopeViolation {
    pub segment_start: f64,
    pub node: Option<NodeId>,
    pub count: usize,
}

impl fmt::Display for ScopeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(node) => write!(
                f,
                "segment at t={}: node {node} has {} adversarial in-neighbors",
                self.segment_start, self.count
            ),
            None => write!(f, "{} adversaries in the network", self.count),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScopeReport {
    pub ok: bool,
    pub violations: Vec<ScopeViolation>,
}

impl ScopeReport {
    pub fn into_error(self) -> Result<()> {
        if self.ok {
            Ok(())
        } else {
            Err(Error::ScopeViolation {
                count: self.violations.len(),
                first: self.violations[0].to_string(),
            })
        }
    }
}

/// Checks the scope invariant over every segment of the schedule.
/// F-total is time-independent cardinality; F-local bounds the
/// adversarial in-neighbors of every normal node on every segment.
pub fn validate_scope(
    schedule: &SwitchingSchedule,
    adversaries: &BTreeSet<NodeId>,
    scope: ThreatScope,
) -> ScopeReport {
    let mut violations = Vec::new();
    match scope.kind {
        ScopeKind::FTotal => {
            if adversaries.len() > scope.f as usize {
                violations.push(ScopeViolation {
                    segment_start: 0.0,
                    node: None,
                    count: adversaries.len(),
                });
            }
        }
        ScopeKind::FLocal => {
            for (start, graph) in schedule.segments() {
                for i in graph.nodes() {
                    if adversaries.contains(&i) {
                        continue;
                    }
                    let count = graph
                        .in_neighbors(i)
                        .expect("node from iterator is valid")
                        .iter()
                        .filter(|j| adversaries.contains(j))
                        .count();
                    if count > scope.f as usize {
                        violations.push(ScopeViolation {
                            segment_start: *start,
                            node: Some(i),
                            count,
                        });
                    }
                }
            }
        }
    }
    ScopeReport {
        ok: violations.is_empty(),
        violations,
    }
}

/// Canned misbehavior strategies. All are uniformly continuous in time,
/// so they stay inside the continuous-mode threat model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AdversaryStrategy {
    /// Emit `value` forever.
    Constant { value: f64 },
    /// Linear drift from `start` with `slope` per time unit, saturating
    /// at `clamp`.
    Ramp { start: f64, slope: f64, clamp: f64 },
    /// `center + amplitude * sin(2 pi t / period)`.
    Sine {
        center: f64,
        amplitude: f64,
        period: f64,
    },
    /// Move the previous emitted value toward `target` at `rate` per time
    /// unit (per round in discrete mode).
    Pull { target: f64, rate: f64 },
}

impl AdversaryStrategy {
    /// Value emitted at time `t`. `prev` is the value emitted at the
    /// previous step and `dt` the elapsed time since (0 at the first
    /// step, where `prev` is the configured initial value).
    pub fn emit(&self, t: f64, prev: f64, dt: f64) -> f64 {
        match *self {
            AdversaryStrategy::Constant { value } => value,
            AdversaryStrategy::Ramp {
                start,
                slope,
                clamp,
            } => {
                let raw = start + slope * t;
                let lo = start.min(clamp);
                let hi = start.max(clamp);
                raw.clamp(lo, hi)
            }
            AdversaryStrategy::Sine {
                center,
                amplitude,
                period,
            } => center + amplitude * (2.0 * std::f64::consts::PI * t / period).sin(),
            AdversaryStrategy::Pull { target, rate } => {
                let gap = target - prev;
                let step = (rate * dt).min(gap.abs());
                prev + step.copysign(gap)
            }
        }
    }

    /// Initial emitted value given the configured initial state.
    pub fn initial(&self, configured: f64) -> f64 {
        self.emit(0.0, configured, 0.0)
    }
}

impl fmt::Display for AdversaryStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AdversaryStrategy::Constant { value } => write!(f, "constant {value}"),
            AdversaryStrategy::Ramp {
                start,
                slope,
                clamp,
            } => {
                write!(f, "ramp {start} {slope} clamp {clamp}")
            }
            AdversaryStrategy::Sine {
                center,
                amplitude,
                period,
            } => write!(f, "sine {center} {amplitude} {period}"),
            AdversaryStrategy::Pull { target, rate } => write!(f, "pull {target} rate {rate}"),
        }
    }
}

impl FromStr for AdversaryStrategy {
    type Err = Error;

    /// Parses the scenario-file spelling, e.g. `constant 2.0`,
    /// `ramp 0 0.1 clamp 2`, `sine 1 0.5 10`, `pull 2.0 rate 0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let num = |tok: &str| -> Result<f64> {
            tok.parse::<f64>()
                .map_err(|_| Error::Input(format!("expected a number, got '{tok}'")))
        };
        match toks.as_slice() {
            ["constant", v] => Ok(AdversaryStrategy::Constant { value: num(v)? }),
            ["ramp", v0, slope, "clamp", c] => Ok(AdversaryStrategy::Ramp {
                start: num(v0)?,
                slope: num(slope)?,
                clamp: num(c)?,
            }),
            ["sine", center, amp, period] => {
                let period = num(period)?;
                if period <= 0.0 {
                    return Err(Error::Input("sine period must be positive".into()));
                }
                Ok(AdversaryStrategy::Sine {
                    center: num(center)?,
                    amplitude: num(amp)?,
                    period,
                })
            }
            ["pull", target, "rate", rate] => {
                let rate = num(rate)?;
                if rate < 0.0 {
                    return Err(Error::Input("pull rate must be nonnegative".into()));
                }
                Ok(AdversaryStrategy::Pull {
                    target: num(target)?,
                    rate,
                })
            }
            _ => Err(Error::Input(format!(
                "unknown adversary strategy '{s}' \
                 (expected constant/ramp/sine/pull forms)"
            ))),
        }
    }
}

/// A ready-to-run attack against a graph that is not (F+1,F+1)-robust:
/// the two witness sets pinned to constant values `a < b`, with exactly
/// the nodes that reach outside their set turned malicious.
#[derive(Debug, Clone)]
pub struct NecessityAttack {
    pub witness: Witness,
    pub adversaries: Vec<(NodeId, AdversaryStrategy)>,
    pub initial_values: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

/// Builds the attack when `g` is not (f+1, f+1)-robust, and returns
/// nothing when it is (no such attack can exist then). Nodes of the
/// witness pair start at `a = 0` and `b = 1`, everyone else at `0.5`;
/// the nodes with at least `f + 1` neighbors outside their witness set
/// (at most `f` in total) hold their values constant. Every normal node
/// inside the witness sets then discards all outside information and
/// never moves.
pub fn necessity_attack(g: &crate::digraph::Digraph, f: u32) -> Result<Option<NecessityAttack>> {
    necessity_attack_with_limit(g, f, DEFAULT_ENUMERATION_LIMIT)
}

pub fn necessity_attack_with_limit(
    g: &crate::digraph::Digraph,
    f: u32,
    limit: usize,
) -> Result<Option<NecessityAttack>> {
    // prefer the witness pair with the fewest reaching nodes: fewer
    // adversaries are needed to pin it
    let Some(witness) = cheapest_failing_pair(g, f + 1, f + 1, limit)? else {
        return Ok(None);
    };
    let (a, b) = (0.0, 1.0);
    let mut initial_values = vec![0.5; g.node_count()];
    for &i in &witness.s1 {
        initial_values[i.index()] = a;
    }
    for &i in &witness.s2 {
        initial_values[i.index()] = b;
    }
    let mut adversaries = Vec::new();
    for (set, value) in [(&witness.s1, a), (&witness.s2, b)] {
        let members: BTreeSet<NodeId> = set.iter().copied().collect();
        for &i in set.iter() {
            let outside = g
                .in_neighbors(i)?
                .iter()
                .filter(|j| !members.contains(j))
                .count();
            if outside >= (f + 1) as usize {
                adversaries.push((i, AdversaryStrategy::Constant { value }));
            }
        }
    }
    debug_assert!(adversaries.len() <= f as usize);
    Ok(Some(NecessityAttack {
        witness,
        adversaries,
        initial_values,
        a,
        b,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{complete, two_clique, Digraph};

    fn node_set(v: &[u32]) -> BTreeSet<NodeId> {
        v.iter().copied().map(NodeId).collect()
    }

    #[test]
    fn total_scope_is_a_cardinality_check() {
        let s = SwitchingSchedule::fixed(complete(4));
        assert!(validate_scope(&s, &node_set(&[0]), ThreatScope::total(1)).ok);
        let report = validate_scope(&s, &node_set(&[0, 1]), ThreatScope::total(1));
        assert!(!report.ok);
        assert!(report.into_error().is_err());
    }

    #[test]
    fn single_adversary_is_always_1_local() {
        let s = SwitchingSchedule::fixed(complete(4));
        assert!(validate_scope(&s, &node_set(&[0]), ThreatScope::local(1)).ok);
    }

    #[test]
    fn local_scope_checks_every_segment() {
        // second segment wires both adversaries into node 2's neighborhood
        let g1 = Digraph::from_undirected(4, &[(0, 2), (1, 3), (2, 3)]).unwrap();
        let g2 = Digraph::from_undirected(4, &[(0, 2), (1, 2), (2, 3)]).unwrap();
        let advs = node_set(&[0, 1]);
        let ok = SwitchingSchedule::new(vec![(0.0, g1.clone())], None).unwrap();
        assert!(validate_scope(&ok, &advs, ThreatScope::local(1)).ok);
        let bad = SwitchingSchedule::new(vec![(0.0, g1), (5.0, g2)], None).unwrap();
        let report = validate_scope(&bad, &advs, ThreatScope::local(1));
        assert!(!report.ok);
        assert_eq!(report.violations[0].segment_start, 5.0);
        assert_eq!(report.violations[0].node, Some(NodeId(2)));
        assert_eq!(report.violations[0].count, 2);
    }

    #[test]
    fn constant_strategy_ignores_time() {
        let s = AdversaryStrategy::Constant { value: 2.0 };
        assert_eq!(s.emit(0.0, 7.0, 0.0), 2.0);
        assert_eq!(s.emit(123.0, 7.0, 1.0), 2.0);
    }

    #[test]
    fn ramp_evaluates_linearly_then_saturates() {
        let s = AdversaryStrategy::Ramp {
            start: 0.0,
            slope: 0.1,
            clamp: 2.0,
        };
        assert!((s.emit(5.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(s.emit(100.0, 0.0, 1.0), 2.0);
    }

    #[test]
    fn sine_modulus_of_continuity() {
        let s = AdversaryStrategy::Sine {
            center: 1.0,
            amplitude: 0.5,
            period: 10.0,
        };
        let bound = 0.5 * 2.0 * std::f64::consts::PI / 10.0;
        let mut t = 0.0;
        while t < 30.0 {
            let dt = 0.01;
            let diff = (s.emit(t + dt, 0.0, dt) - s.emit(t, 0.0, dt)).abs();
            assert!(diff <= bound * dt + 1e-12);
            t += dt;
        }
    }

    #[test]
    fn pull_moves_toward_target_and_stops() {
        let s = AdversaryStrategy::Pull {
            target: 2.0,
            rate: 0.5,
        };
        let mut v = 0.0;
        for step in 0..10 {
            v = s.emit(step as f64, v, 1.0);
        }
        assert_eq!(v, 2.0);
        assert_eq!(s.emit(11.0, 2.0, 1.0), 2.0);
    }

    #[test]
    fn strategy_strings_round_trip() {
        for text in [
            "constant 2",
            "ramp 0 0.1 clamp 2",
            "sine 1 0.5 10",
            "pull 2 rate 0.5",
        ] {
            let s: AdversaryStrategy = text.parse().unwrap();
            let back: AdversaryStrategy = s.to_string().parse().unwrap();
            assert_eq!(s, back);
        }
        assert!("wander 1 2".parse::<AdversaryStrategy>().is_err());
    }

    #[test]
    fn two_clique_attack_needs_no_adversaries() {
        let g = two_clique(4, 5, 2).unwrap();
        let attack = necessity_attack(&g, 2).unwrap().expect("not (3,3)-robust");
        assert!(attack.adversaries.is_empty());
        assert_eq!(attack.witness.s1, (0..4).map(NodeId).collect::<Vec<_>>());
        assert_eq!(attack.witness.s2, (4..9).map(NodeId).collect::<Vec<_>>());
        assert_eq!(attack.initial_values[0], 0.0);
        assert_eq!(attack.initial_values[8], 1.0);
    }

    #[test]
    fn robust_graphs_admit_no_attack() {
        // K5 is (2,2)-robust, so no F=1 attack exists
        assert!(necessity_attack(&complete(5), 1).unwrap().is_none());
    }

    #[test]
    fn attack_adversary_count_stays_under_f() {
        let g =
            Digraph::from_undirected(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 2)])
                .unwrap();
        if let Some(attack) = necessity_attack(&g, 1).unwrap() {
            assert!(attack.adversaries.len() <= 1);
            for (id, strategy) in &attack.adversaries {
                let in_s1 = attack.witness.s1.contains(id);
                let expect = if in_s1 { attack.a } else { attack.b };
                assert_eq!(*strategy, AdversaryStrategy::Constant { value: expect });
            }
        } else {
            panic!("sparse ring should not be (2,2)-robust");
        }
    }
}
