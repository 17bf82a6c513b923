use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use petgraph::algo::toposort;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};

use crate::engine::{run_asynch, run_ssynch, segment_records_with, MegaRule, Scheduler, SegViolation, Trace};
use crate::model::{ColorView, Configuration, ControlColor, RobotSet, Stay};
use crate::protocols::{ControlProtocol, ProtocolKind};
use crate::schedulers::{ActivationSequence, ScriptedAdversary};

use super::{
    all_colorings, explore_asynch, explore_ssynch, liveness, monitor, Budget, Choice, ControlRule, Counterexample,
    Diagram, DiagramId, Failure, LabeledDiagram, Lasso, MonitorStart, StateGraph, VerifierError,
};

fn explore(
    rule: &dyn ControlRule,
    scheduler: Scheduler,
    n: usize,
    starts: &[Vec<ControlColor>],
    budget: &Budget,
) -> Result<StateGraph, VerifierError> {
    match scheduler {
        Scheduler::Ssynch => explore_ssynch(rule, n, starts, budget),
        Scheduler::Asynch => explore_asynch(rule, n, starts, budget),
    }
}

/// Finite path from a start state, used to exhibit an unexpected edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathWitness {
    pub start: Vec<ControlColor>,
    pub choices: Vec<Choice>,
    pub states: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub diagram: String,
    pub kind: ProtocolKind,
    pub n: usize,
    pub pass: bool,
    /// Both directions are required, not just reachable ⊆ expected.
    pub exact: bool,
    pub reachable_nodes: usize,
    pub reachable_edges: usize,
    pub unexpected_nodes: Vec<String>,
    pub unexpected_edges: Vec<String>,
    /// Expected edges the exploration did not realize.
    pub unrealized_edges: Vec<String>,
    pub counterexample: Option<PathWitness>,
}

/// Edge of the cycle-start graph of a two-robot run.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CsEdge {
    pub from: (ControlColor, ControlColor),
    /// Robots that ran P in between, sorted, repeats kept.
    pub label: Vec<usize>,
    pub to: (ControlColor, ControlColor),
}

impl CsEdge {
    fn render(&self) -> String {
        let (a, b) = self.from;
        let (c, d) = self.to;
        let label: Vec<String> = self.label.iter().map(|r| r.to_string()).collect();
        format!("({a},{b}) -[{}]-> ({c},{d})", label.join(","))
    }
}

/// Per-robot execution counts are capped here when walking between
/// cycle-start instants; a walk needing more is reported as an edge with the
/// capped label and cannot match any expected edge.
const CS_LABEL_CAP: u8 = 4;

/// Transitions between consecutive cycle-start instants of a two-robot
/// graph, labeled by the executions in between. Edges that keep both colors
/// and execute nothing are dropped.
pub fn cs_graph(graph: &StateGraph) -> Result<BTreeSet<CsEdge>, VerifierError> {
    if graph.n != 2 {
        return Err(VerifierError::Unsupported { kind: graph.kind, why: "cycle-start graphs need two robots" });
    }
    let pair = |v: u32| (graph.colors[v as usize][0], graph.colors[v as usize][1]);
    let mut out = BTreeSet::new();
    for u in 0..graph.node_count() as u32 {
        if !graph.cycle_start[u as usize] {
            continue;
        }
        let mut seen: HashSet<(u32, [u8; 2])> = HashSet::new();
        let mut q = VecDeque::new();
        let push_from = |v: u32, counts: [u8; 2], q: &mut VecDeque<(u32, [u8; 2])>| {
            for e in &graph.edges[v as usize] {
                let mut c = counts;
                for r in e.execs.iter() {
                    c[r] = (c[r] + 1).min(CS_LABEL_CAP);
                }
                q.push_back((e.to, c));
            }
        };
        push_from(u, [0, 0], &mut q);
        while let Some((v, counts)) = q.pop_front() {
            if !seen.insert((v, counts)) {
                continue;
            }
            if graph.cycle_start[v as usize] {
                let mut label = Vec::new();
                for (r, &c) in counts.iter().enumerate() {
                    label.extend(std::iter::repeat(r).take(c as usize));
                }
                if pair(u) != pair(v) || !label.is_empty() {
                    out.insert(CsEdge { from: pair(u), label, to: pair(v) });
                }
                continue;
            }
            push_from(v, counts, &mut q);
        }
    }
    Ok(out)
}

fn path_witness(graph: &StateGraph, u: u32, edge: usize) -> PathWitness {
    let mut path = graph.path_to(&graph.starts, u).expect("reachable");
    path.push((u, edge));
    let lasso = graph.lasso(&path, &[]);
    let mut states = lasso.states;
    states.push(graph.labels[graph.edges[u as usize][edge].to as usize].clone());
    PathWitness { start: lasso.start, choices: lasso.prefix, states }
}

/// Compares a reachable graph against an expected diagram. Support diagrams
/// are checked in the subset direction; the two-robot cycle-start diagram is
/// checked for equality.
pub fn check_conformance(graph: &StateGraph, id: DiagramId) -> Result<ConformanceReport, VerifierError> {
    match id {
        DiagramId::Fig3 | DiagramId::Fig5 => {
            let expected = Diagram::builtin(id)?;
            let sg = graph.support_graph();
            let unexpected_nodes: Vec<String> =
                sg.nodes.iter().filter(|n| !expected.nodes.contains(n)).map(|n| n.to_string()).collect();
            let unexpected: Vec<_> = sg.edges.keys().filter(|e| !expected.edges.contains(e)).copied().collect();
            let unrealized_edges = expected
                .edges
                .iter()
                .filter(|e| !sg.edges.contains_key(e))
                .map(|(a, b)| format!("{a} -> {b}"))
                .collect();
            // Witness for the first unexpected edge, else the first unexpected node.
            let mut counterexample = None;
            'find: for (u, out) in graph.edges.iter().enumerate() {
                for (i, e) in out.iter().enumerate() {
                    let key = (graph.supports[u], graph.supports[e.to as usize]);
                    let bad_edge = key.0 != key.1 && !expected.edges.contains(&key);
                    let bad_node = !expected.nodes.contains(&key.1);
                    if bad_edge || (unexpected.is_empty() && bad_node) {
                        counterexample = Some(path_witness(graph, u as u32, i));
                        break 'find;
                    }
                }
            }
            Ok(ConformanceReport {
                diagram: id.name().into(),
                kind: graph.kind,
                n: graph.n,
                pass: unexpected.is_empty() && unexpected_nodes.is_empty(),
                exact: false,
                reachable_nodes: sg.nodes.len(),
                reachable_edges: sg.edges.len(),
                unexpected_nodes,
                unexpected_edges: unexpected.iter().map(|(a, b)| format!("{a} -> {b}")).collect(),
                unrealized_edges,
                counterexample,
            })
        }
        DiagramId::Fig7b => {
            let expected = LabeledDiagram::builtin(id)?;
            let got = cs_graph(graph)?;
            let nodes: BTreeSet<_> = got.iter().flat_map(|e| [e.from, e.to]).collect();
            let unexpected_nodes: Vec<String> =
                nodes.iter().filter(|n| !expected.nodes.contains(n)).map(|(a, b)| format!("({a},{b})")).collect();
            let unexpected: Vec<&CsEdge> = got
                .iter()
                .filter(|e| !expected.edges.contains(&(e.from, e.label.clone(), e.to)))
                .collect();
            let unrealized: Vec<String> = expected
                .edges
                .iter()
                .filter(|(f, l, t)| !got.contains(&CsEdge { from: *f, label: l.clone(), to: *t }))
                .map(|(f, l, t)| CsEdge { from: *f, label: l.clone(), to: *t }.render())
                .collect();
            let counterexample = unexpected.first().and_then(|bad| cs_witness(graph, bad));
            Ok(ConformanceReport {
                diagram: id.name().into(),
                kind: graph.kind,
                n: graph.n,
                pass: unexpected.is_empty() && unexpected_nodes.is_empty() && unrealized.is_empty(),
                exact: true,
                reachable_nodes: nodes.len(),
                reachable_edges: got.len(),
                unexpected_nodes,
                unexpected_edges: unexpected.iter().map(|e| e.render()).collect(),
                unrealized_edges: unrealized,
                counterexample,
            })
        }
    }
}

/// Path realizing a cycle-start edge: a start, a cycle-start state with the
/// edge's source colors, then events up to the next cycle-start state.
fn cs_witness(graph: &StateGraph, target: &CsEdge) -> Option<PathWitness> {
    let pair = |v: u32| (graph.colors[v as usize][0], graph.colors[v as usize][1]);
    for u in 0..graph.node_count() as u32 {
        if !graph.cycle_start[u as usize] || pair(u) != target.from {
            continue;
        }
        // BFS with parents over (node, counts).
        let mut parent: std::collections::HashMap<(u32, [u8; 2]), ((u32, [u8; 2]), usize)> = Default::default();
        let mut q = VecDeque::from([(u, [0u8, 0u8])]);
        while let Some((v, counts)) = q.pop_front() {
            for (i, e) in graph.edges[v as usize].iter().enumerate() {
                let mut c = counts;
                for r in e.execs.iter() {
                    c[r] = (c[r] + 1).min(CS_LABEL_CAP);
                }
                let key = (e.to, c);
                if parent.contains_key(&key) || key == (u, [0, 0]) {
                    continue;
                }
                parent.insert(key, ((v, counts), i));
                if graph.cycle_start[e.to as usize] {
                    let mut label = Vec::new();
                    for (r, &k) in c.iter().enumerate() {
                        label.extend(std::iter::repeat(r).take(k as usize));
                    }
                    if pair(e.to) == target.to && label == target.label {
                        let mut steps = Vec::new();
                        let mut cur = key;
                        while cur != (u, [0, 0]) {
                            let (p, i) = parent[&cur];
                            steps.push((p.0, i));
                            cur = p;
                        }
                        steps.reverse();
                        let mut path = graph.path_to(&graph.starts, u).expect("reachable");
                        path.extend(steps);
                        let lasso = graph.lasso(&path, &[]);
                        let mut states = lasso.states;
                        states.push(graph.labels[e.to as usize].clone());
                        return Some(PathWitness { start: lasso.start, choices: lasso.prefix, states });
                    }
                    continue;
                }
                q.push_back(key);
            }
        }
    }
    None
}

/// One property checked over every fair behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// The induced activation sequence is restricted-repetition.
    Rsynch,
    /// Every mega-cycle runs each robot exactly once.
    OneFair,
    /// The fully synchronous phase never returns after a disjoint one.
    PhaseOrder,
    /// Every fair cycle runs P on every robot.
    Liveness,
}

impl Property {
    pub const ALL: [Property; 4] = [Property::Rsynch, Property::OneFair, Property::PhaseOrder, Property::Liveness];

    pub fn name(self) -> &'static str {
        match self {
            Property::Rsynch => "rsynch",
            Property::OneFair => "one-fair",
            Property::PhaseOrder => "phase-order",
            Property::Liveness => "liveness",
        }
    }

    /// Monitor violations that break this property.
    pub fn covers(self, v: &SegViolation) -> bool {
        match self {
            Property::Rsynch => matches!(v, SegViolation::Rsynch(_)),
            Property::OneFair => matches!(
                v,
                SegViolation::DoubleExecution(_) | SegViolation::MegaIncomplete(_) | SegViolation::ExecOutsideMegaCycle(_)
            ),
            Property::PhaseOrder => matches!(v, SegViolation::FsynchRecurred),
            Property::Liveness => false,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub property: Property,
    pub pass: bool,
    pub counterexample: Option<Counterexample>,
}

impl PropertyResult {
    fn from(property: Property, counterexample: Option<Counterexample>) -> PropertyResult {
        PropertyResult { property, pass: counterexample.is_none(), counterexample }
    }
}

/// Checks each property over `graph` from `starts`.
fn check_properties(
    graph: &StateGraph,
    mode: MonitorStart,
    mega_rule: MegaRule,
    budget: &Budget,
) -> Result<(Vec<PropertyResult>, usize), VerifierError> {
    let mut out = Vec::new();
    let mut product_states = 0;
    for p in Property::ALL {
        let cx = if p == Property::Liveness {
            liveness(graph, &graph.starts, &|_| true)
        } else {
            let m = monitor(graph, &graph.starts, mode, mega_rule, &|v| p.covers(v), budget)?;
            product_states = product_states.max(m.product_states);
            m.counterexample
        };
        out.push(PropertyResult::from(p, cx));
    }
    Ok((out, product_states))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsynchConformanceReport {
    pub kind: ProtocolKind,
    pub n: usize,
    pub scheduler: Scheduler,
    pub rule: MegaRule,
    pub states: usize,
    pub edges: usize,
    pub product_states: usize,
    pub pass: bool,
    pub properties: Vec<PropertyResult>,
}

impl RsynchConformanceReport {
    pub fn property(&self, p: Property) -> &PropertyResult {
        self.properties.iter().find(|r| r.property == p).expect("every property is checked")
    }

    /// Counterexample of the first failing property.
    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.properties.iter().find_map(|r| r.counterexample.as_ref())
    }
}

/// Checks every fair behavior from `start`: each induced activation sequence
/// must satisfy RSYNCH, every mega-cycle must run each robot exactly once,
/// the synchronous phase must not come back, and every fair cycle must run P
/// on every robot.
pub fn check_rsynch_conformance(
    rule: &dyn ControlRule,
    scheduler: Scheduler,
    n: usize,
    start: &[ControlColor],
    mega_rule: MegaRule,
    budget: &Budget,
) -> Result<RsynchConformanceReport, VerifierError> {
    let graph = explore(rule, scheduler, n, &[start.to_vec()], budget)?;
    let (properties, product_states) = check_properties(&graph, MonitorStart::Strict, mega_rule, budget)?;
    Ok(RsynchConformanceReport {
        kind: rule.kind(),
        n,
        scheduler,
        rule: mega_rule,
        states: graph.node_count(),
        edges: graph.edge_count(),
        product_states,
        pass: properties.iter().all(|p| p.pass),
        properties,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelfStabReport {
    pub kind: ProtocolKind,
    pub n: usize,
    pub scheduler: Scheduler,
    pub rule: MegaRule,
    pub starts: usize,
    pub states: usize,
    pub legal_supports: usize,
    pub illegal_states: usize,
    /// Every fair behavior reaches a legal support.
    pub converges: bool,
    /// Start colorings from which some fair behavior never does.
    pub non_converging_starts: Vec<Vec<ControlColor>>,
    /// Longest run of transitions through illegal states before a legal
    /// support, when no adversary can stall there; `None` when some illegal
    /// cycle exists, even an unfair one.
    pub max_convergence: Option<usize>,
    /// No transition leaves the legal supports once entered.
    pub legal_closed: bool,
    /// Fair cycle confined to illegal supports, if any.
    pub convergence_counterexample: Option<Counterexample>,
    /// Properties after the first mega-cycle start. Only `rsynch` and
    /// `liveness` count toward `pass`.
    pub properties: Vec<PropertyResult>,
    pub pass: bool,
}

impl SelfStabReport {
    pub fn property(&self, p: Property) -> &PropertyResult {
        self.properties.iter().find(|r| r.property == p).expect("every property is checked")
    }

    /// The convergence failure, else the first failing counted property.
    pub fn counterexample(&self) -> Option<&Counterexample> {
        self.convergence_counterexample.as_ref().or_else(|| {
            self.properties
                .iter()
                .filter(|r| SELF_STAB_COUNTED.contains(&r.property))
                .find_map(|r| r.counterexample.as_ref())
        })
    }
}

/// Post-convergence properties a self-stabilization check must pass.
pub const SELF_STAB_COUNTED: [Property; 2] = [Property::Rsynch, Property::Liveness];

/// Explores from every coloring. Legal supports are those reachable from
/// all-T. Fails on a fair cycle confined to illegal supports, on a
/// restricted-repetition violation after the first mega-cycle start, or on a
/// fair cycle that starves some robot of P.
pub fn check_self_stabilization(
    rule: &dyn ControlRule,
    scheduler: Scheduler,
    n: usize,
    mega_rule: MegaRule,
    budget: &Budget,
) -> Result<SelfStabReport, VerifierError> {
    let kind = rule.kind();
    if let Some(fixed) = kind.fixed_n() {
        if n != fixed {
            return Err(VerifierError::Unsupported { kind, why: "fixed team size" });
        }
    }
    let legal_graph = explore(rule, scheduler, n, &[vec![ControlColor::T; n]], budget)?;
    let legal: BTreeSet<_> = legal_graph.supports.iter().copied().collect();
    let starts = all_colorings(kind.colors(), n);
    let graph = explore(rule, scheduler, n, &starts, budget)?;
    let is_illegal: Vec<bool> = graph.supports.iter().map(|s| !legal.contains(s)).collect();
    let illegal = |v: u32| is_illegal[v as usize];
    let legal_closed = graph
        .edges
        .iter()
        .enumerate()
        .all(|(u, out)| is_illegal[u] || out.iter().all(|e| !is_illegal[e.to as usize]));

    let stuck = graph.fair_components(&illegal, &|_| true, None);
    let mut in_stuck = vec![false; graph.node_count()];
    for &v in stuck.iter().flatten() {
        in_stuck[v as usize] = true;
    }
    let doomed = graph.can_reach(&in_stuck);
    let non_converging_starts =
        graph.starts.iter().filter(|&&s| doomed[s as usize]).map(|&s| graph.colors[s as usize].clone()).collect();
    let convergence_counterexample = graph.fair_cycle(&illegal, &|_| true, None).map(|c| Counterexample {
        failure: Failure::NoConvergence,
        lasso: graph.lasso_to_cycle(&c, &graph.starts),
        syncing: false,
        rule: mega_rule,
    });
    let converges = convergence_counterexample.is_none();
    let max_convergence = longest_illegal_run(&graph, &is_illegal);
    let (properties, _) = check_properties(&graph, MonitorStart::Syncing, mega_rule, budget)?;
    let pass = converges
        && properties.iter().filter(|r| SELF_STAB_COUNTED.contains(&r.property)).all(|r| r.pass);
    Ok(SelfStabReport {
        kind,
        n,
        scheduler,
        rule: mega_rule,
        starts: starts.len(),
        states: graph.node_count(),
        legal_supports: legal.len(),
        illegal_states: is_illegal.iter().filter(|&&b| b).count(),
        converges,
        non_converging_starts,
        max_convergence,
        legal_closed,
        convergence_counterexample,
        properties,
        pass,
    })
}

/// Longest path counted in transitions from an illegal state to the first
/// legal one, or `None` when illegal states contain a cycle.
fn longest_illegal_run(graph: &StateGraph, is_illegal: &[bool]) -> Option<usize> {
    let mut g: DiGraph<(), ()> = DiGraph::new();
    for _ in 0..graph.node_count() {
        g.add_node(());
    }
    for (u, out) in graph.edges.iter().enumerate() {
        if !is_illegal[u] {
            continue;
        }
        for e in out {
            if is_illegal[e.to as usize] {
                if e.to as usize == u {
                    return None;
                }
                g.add_edge(NodeIndex::new(u), NodeIndex::new(e.to as usize), ());
            }
        }
    }
    let order = toposort(&g, None).ok()?;
    // dist[v]: transitions from v until a legal state, worst case.
    let mut dist = vec![0usize; graph.node_count()];
    let mut best = 0;
    for v in order.into_iter().rev() {
        let u = v.index();
        if !is_illegal[u] {
            continue;
        }
        dist[u] = graph.edges[u]
            .iter()
            .map(|e| if is_illegal[e.to as usize] { dist[e.to as usize] + 1 } else { 1 })
            .max()
            .unwrap_or(0);
        best = best.max(dist[u]);
    }
    Some(best)
}

/// Runs scheduler choices through the engine with a P that never moves.
/// `None` when a choice does not fit the scheduler.
fn run_choices(
    protocol: ControlProtocol,
    scheduler: Scheduler,
    start: &[ControlColor],
    choices: &[Choice],
) -> Result<Option<Trace>, VerifierError> {
    let init = Configuration::from_controls(start)?;
    let trace = match scheduler {
        Scheduler::Ssynch => {
            let mut rounds = Vec::with_capacity(choices.len());
            for c in choices {
                match c {
                    Choice::Round(s) => rounds.push(*s),
                    Choice::Event(_) => return Ok(None),
                }
            }
            let len = rounds.len();
            run_ssynch(protocol, &Stay, &init, &ActivationSequence::finite(rounds), len)?
        }
        Scheduler::Asynch => {
            let mut events = Vec::with_capacity(choices.len());
            for c in choices {
                match c {
                    Choice::Event(e) => events.push(*e),
                    Choice::Round(_) => return Ok(None),
                }
            }
            let len = events.len();
            run_asynch(protocol, &Stay, &init, &mut ScriptedAdversary::new(events), len)?
        }
    };
    Ok(Some(trace))
}

/// Replays a conformance witness and returns the support transition made by
/// its last step.
pub fn replay_path_witness(
    protocol: ControlProtocol,
    scheduler: Scheduler,
    w: &PathWitness,
) -> Result<Option<(ColorView, ColorView)>, VerifierError> {
    let Some(trace) = run_choices(protocol, scheduler, &w.start, &w.choices)? else { return Ok(None) };
    if trace.records.len() != w.choices.len() + 1 || w.choices.is_empty() {
        return Ok(None);
    }
    let k = trace.configs.len();
    Ok(Some((trace.configs[k - 2].support(), trace.configs[k - 1].support())))
}

/// Number of cycle repetitions used when replaying a lasso.
const REPLAY_LOOPS: usize = 3;

/// Replays a counterexample through the engine and checks that the same
/// failure shows up in the concrete trace.
pub fn replay_counterexample(
    protocol: ControlProtocol,
    scheduler: Scheduler,
    cx: &Counterexample,
) -> Result<bool, VerifierError> {
    let lasso: &Lasso = &cx.lasso;
    let n = lasso.start.len();
    let mut choices = lasso.prefix.clone();
    for _ in 0..REPLAY_LOOPS {
        choices.extend(lasso.cycle.iter().copied());
    }
    let Some(trace) = run_choices(protocol, scheduler, &lasso.start, &choices)? else { return Ok(false) };
    if trace.records.len() != choices.len() + 1 {
        return Ok(false);
    }
    match cx.failure {
        Failure::Segment(v) => {
            let d = segment_records_with(&trace.records, protocol, cx.syncing, cx.rule)?;
            Ok(d.violations.iter().any(|&(_, w)| w == v))
        }
        Failure::NoConvergence => {
            // The colors must come back after each loop, so the run stays in
            // the cycle's supports forever.
            let k = lasso.cycle.len();
            let at = |loops: usize| trace.configs[lasso.prefix.len() + loops * k].controls();
            let cycle = &trace.records[lasso.prefix.len() + 1..];
            let actors = cycle.iter().fold(RobotSet::EMPTY, |a, r| a.union(RobotSet::from_ids(r.actors.iter().copied())));
            Ok(k > 0 && actors == RobotSet::full(n) && (1..=REPLAY_LOOPS).all(|l| at(l) == at(0)))
        }
        Failure::NoProgress | Failure::InducedUnfair(_) => {
            let cycle = &trace.records[lasso.prefix.len() + 1..];
            let mut actors = RobotSet::EMPTY;
            let mut execs = RobotSet::EMPTY;
            for r in cycle {
                actors = actors.union(RobotSet::from_ids(r.actors.iter().copied()));
                for d in r.decisions.iter().filter(|d| d.exec_p) {
                    execs.insert(d.robot);
                }
            }
            let fair = actors == RobotSet::full(n) && !lasso.cycle.is_empty();
            Ok(fair
                && match cx.failure {
                    Failure::NoProgress => execs.is_empty(),
                    Failure::InducedUnfair(r) => !execs.contains(r),
                    _ => unreachable!(),
                })
        }
    }
}
