//! Exhaustive verification over abstract configuration graphs.
//!
//! Positions are abstracted away: every guard reads colors only, so the
//! color dynamics of a run do not depend on what P computes.

mod asynch;
mod checks;
mod diagrams;
mod export;
mod ssynch;

use std::collections::{HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, MegaRule, Scheduler, SegStyle, SegViolation, Segmenter};
use crate::model::{ColorView, ControlColor, ModelError, RobotSet};
use crate::protocols::{ControlProtocol, ControlStep, ProtocolError, ProtocolKind};
use crate::schedulers::AsynchEvent;

pub use asynch::{explore_asynch, AsynchSemantics, Phase, RobotAbstract};
pub use checks::{
    check_conformance, check_rsynch_conformance, check_self_stabilization, cs_graph, replay_counterexample,
    replay_path_witness,
    ConformanceReport, CsEdge, PathWitness, Property, PropertyResult, RsynchConformanceReport, SelfStabReport,
    SELF_STAB_COUNTED,
};
pub use diagrams::{Diagram, DiagramId, LabeledDiagram};
pub use export::{graph_to_dot, jsonl_line, support_graph_to_dot};
pub use ssynch::{explore_ssynch, SsynchSemantics};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifierError {
    #[error("n = {n} exceeds the exploration cap of {cap} robots for {scheduler:?}")]
    TooManyRobots { n: usize, cap: usize, scheduler: Scheduler },
    #[error("need at least 2 robots, got {0}")]
    TooFewRobots(usize),
    #[error("exploration exceeded the budget of {0} states")]
    BudgetExceeded(usize),
    #[error("{kind} cannot be checked this way: {why}")]
    Unsupported { kind: ProtocolKind, why: &'static str },
    #[error("unknown diagram id {0:?}")]
    UnknownDiagram(String),
    #[error("start configuration has {got} robots, expected {expected}")]
    StartSize { expected: usize, got: usize },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Exploration caps. `ROBOSYNC_BUDGET` overrides them, either as a bare state
/// count or as `states=N,ssynch_n=N,asynch_n=N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_states: usize,
    pub max_ssynch_n: usize,
    pub max_asynch_n: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_states: 20_000_000, max_ssynch_n: 6, max_asynch_n: 3 }
    }
}

impl Budget {
    pub fn from_env() -> Budget {
        std::env::var("ROBOSYNC_BUDGET").ok().and_then(|v| Budget::parse(&v)).unwrap_or_default()
    }

    pub fn parse(s: &str) -> Option<Budget> {
        let mut b = Budget::default();
        let s = s.trim();
        if let Ok(states) = s.parse() {
            b.max_states = states;
            return Some(b);
        }
        for part in s.split(',') {
            let (k, v) = part.split_once('=')?;
            let v: usize = v.trim().parse().ok()?;
            match k.trim() {
                "states" => b.max_states = v,
                "ssynch_n" => b.max_ssynch_n = v,
                "asynch_n" => b.max_asynch_n = v,
                _ => return None,
            }
        }
        Some(b)
    }

    pub(crate) fn check_n(&self, n: usize, scheduler: Scheduler) -> Result<(), VerifierError> {
        if n < 2 {
            return Err(VerifierError::TooFewRobots(n));
        }
        let cap = match scheduler {
            Scheduler::Ssynch => self.max_ssynch_n,
            Scheduler::Asynch => self.max_asynch_n,
        };
        if n > cap {
            return Err(VerifierError::TooManyRobots { n, cap, scheduler });
        }
        Ok(())
    }
}

/// A color-only step function. Implemented by [`ControlProtocol`]; tests
/// implement it to inject corrupted tables.
pub trait ControlRule: Sync {
    fn kind(&self) -> ProtocolKind;
    fn step(&self, my: ControlColor, view: ColorView) -> Result<ControlStep, ProtocolError>;
}

impl ControlRule for ControlProtocol {
    fn kind(&self) -> ProtocolKind {
        self.kind
    }

    fn step(&self, my: ControlColor, view: ColorView) -> Result<ControlStep, ProtocolError> {
        ControlProtocol::step(self, my, view)
    }
}

/// Scheduler choice labeling an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Choice {
    Round(RobotSet),
    Event(AsynchEvent),
}

impl fmt::Display for Choice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Choice::Round(s) => write!(f, "{s}"),
            Choice::Event(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub choice: Choice,
    /// Robots that performed an operation.
    pub actors: RobotSet,
    /// Robots that ran P, visited in ascending order.
    pub execs: RobotSet,
    pub to: u64,
}

impl Serialize for Choice {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Choice {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if let Some(inner) = s.strip_prefix('{').and_then(|x| x.strip_suffix('}')) {
            let ids: Result<Vec<usize>, _> =
                inner.split(',').filter(|x| !x.trim().is_empty()).map(|x| x.trim().parse()).collect();
            return ids.map(|ids| Choice::Round(RobotSet::from_ids(ids))).map_err(serde::de::Error::custom);
        }
        AsynchEvent::parse(&s).map(Choice::Event).map_err(serde::de::Error::custom)
    }
}

/// Transition semantics over packed abstract states.
pub trait Semantics: Sync {
    fn n(&self) -> usize;
    fn kind(&self) -> ProtocolKind;
    fn scheduler(&self) -> Scheduler;
    fn successors(&self, s: u64, out: &mut Vec<Transition>) -> Result<(), VerifierError>;
    fn colors(&self, s: u64) -> Vec<ControlColor>;
    fn support(&self, s: u64) -> ColorView {
        let mut v = ColorView::EMPTY;
        for c in self.colors(s) {
            v.insert(c);
        }
        v
    }
    /// Every robot's next effective operation is a Look.
    fn cycle_start(&self, s: u64) -> bool;
    fn describe(&self, s: u64) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub to: u32,
    pub choice: Choice,
    pub actors: RobotSet,
    pub execs: RobotSet,
}

/// Explicit reachable graph. Node ids follow BFS discovery order, so they are
/// deterministic for fixed inputs.
#[derive(Debug, Clone)]
pub struct StateGraph {
    pub n: usize,
    pub kind: ProtocolKind,
    pub scheduler: Scheduler,
    pub states: Vec<u64>,
    pub index: HashMap<u64, u32>,
    pub edges: Vec<Vec<Edge>>,
    pub starts: Vec<u32>,
    pub supports: Vec<ColorView>,
    pub colors: Vec<Vec<ControlColor>>,
    pub cycle_start: Vec<bool>,
    pub labels: Vec<String>,
}

impl StateGraph {
    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Support quotient: supports of reachable states and edges between
    /// distinct supports, flagged when some underlying edge runs P.
    pub fn support_graph(&self) -> SupportGraph {
        let mut g = SupportGraph::default();
        for (u, out) in self.edges.iter().enumerate() {
            let su = self.supports[u];
            g.nodes.insert(su);
            for e in out {
                let sv = self.supports[e.to as usize];
                if su != sv {
                    *g.edges.entry((su, sv)).or_insert(false) |= !e.execs.is_empty();
                }
            }
        }
        for &s in &self.starts {
            g.starts.insert(self.supports[s as usize]);
        }
        g
    }

    /// BFS parents from the start nodes.
    fn bfs_parents(&self, from: &[u32]) -> Vec<Option<(u32, usize)>> {
        let mut parent = vec![None; self.node_count()];
        let mut seen = vec![false; self.node_count()];
        let mut q = VecDeque::new();
        for &s in from {
            if !seen[s as usize] {
                seen[s as usize] = true;
                q.push_back(s);
            }
        }
        while let Some(u) = q.pop_front() {
            for (i, e) in self.edges[u as usize].iter().enumerate() {
                if !seen[e.to as usize] {
                    seen[e.to as usize] = true;
                    parent[e.to as usize] = Some((u, i));
                    q.push_back(e.to);
                }
            }
        }
        parent
    }

    /// Shortest edge path from any node in `from` to `to`, as (node, edge
    /// index) pairs.
    fn path_to(&self, from: &[u32], to: u32) -> Option<Vec<(u32, usize)>> {
        if from.contains(&to) {
            return Some(Vec::new());
        }
        let parent = self.bfs_parents(from);
        let mut path = Vec::new();
        let mut cur = to;
        while let Some((p, i)) = parent[cur as usize] {
            path.push((p, i));
            cur = p;
            if from.contains(&cur) {
                path.reverse();
                return Some(path);
            }
        }
        None
    }

    /// Shortest path from `from` to `to` using only edges accepted by `keep`
    /// whose both ends satisfy `inside`.
    fn path_within(
        &self,
        from: u32,
        to: u32,
        inside: &dyn Fn(u32) -> bool,
        keep: &dyn Fn(&Edge) -> bool,
    ) -> Option<Vec<(u32, usize)>> {
        if from == to {
            return Some(Vec::new());
        }
        let mut parent: HashMap<u32, (u32, usize)> = HashMap::new();
        let mut q = VecDeque::from([from]);
        while let Some(u) = q.pop_front() {
            for (i, e) in self.edges[u as usize].iter().enumerate() {
                if !keep(e) || !inside(e.to) || e.to == from || parent.contains_key(&e.to) {
                    continue;
                }
                parent.insert(e.to, (u, i));
                if e.to == to {
                    let mut path = Vec::new();
                    let mut cur = to;
                    while cur != from {
                        let (p, i) = parent[&cur];
                        path.push((p, i));
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                q.push_back(e.to);
            }
        }
        None
    }

    /// Finds a strongly connected set of nodes, restricted to edges accepted
    /// by `keep` and nodes accepted by `inside`, whose internal edges let
    /// every robot act; returns a closed walk through it where every robot
    /// acts. SCCs are scanned in order of their smallest node id.
    pub fn fair_cycle(
        &self,
        inside: &dyn Fn(u32) -> bool,
        keep: &dyn Fn(&Edge) -> bool,
        reachable_from: Option<&[u32]>,
    ) -> Option<Vec<(u32, usize)>> {
        let comp = self.fair_components(inside, keep, reachable_from).into_iter().next()?;
        let mut member = vec![false; self.node_count()];
        for &m in &comp {
            member[m as usize] = true;
        }
        // One internal edge per robot, picked in (node, edge) order.
        let mut chosen: Vec<(u32, usize)> = Vec::new();
        let mut covered = RobotSet::EMPTY;
        for &u in &comp {
            for (i, e) in self.edges[u as usize].iter().enumerate() {
                if keep(e) && member[e.to as usize] && !e.actors.is_subset(covered) {
                    covered = covered.union(e.actors);
                    chosen.push((u, i));
                }
            }
        }
        let inside_comp = |v: u32| member[v as usize];
        let mut walk = Vec::new();
        let start = chosen[0].0;
        let mut at = start;
        for &(u, i) in &chosen {
            walk.extend(self.path_within(at, u, &inside_comp, keep).expect("strongly connected"));
            walk.push((u, i));
            at = self.edges[u as usize][i].to;
        }
        walk.extend(self.path_within(at, start, &inside_comp, keep).expect("strongly connected"));
        Some(walk)
    }

    /// Strongly connected components, restricted to `inside` nodes and
    /// `keep` edges, whose internal edges activate every robot. Sorted by
    /// smallest member; members sorted.
    pub fn fair_components(
        &self,
        inside: &dyn Fn(u32) -> bool,
        keep: &dyn Fn(&Edge) -> bool,
        reachable_from: Option<&[u32]>,
    ) -> Vec<Vec<u32>> {
        let reach: Option<Vec<bool>> = reachable_from.map(|from| {
            let parent = self.bfs_parents(from);
            (0..self.node_count()).map(|v| from.contains(&(v as u32)) || parent[v].is_some()).collect()
        });
        let ok = |v: u32| inside(v) && reach.as_ref().map_or(true, |r| r[v as usize]);
        let mut g: DiGraph<(), ()> = DiGraph::with_capacity(self.node_count(), 0);
        for _ in 0..self.node_count() {
            g.add_node(());
        }
        for (u, out) in self.edges.iter().enumerate() {
            if !ok(u as u32) {
                continue;
            }
            for e in out {
                if keep(e) && ok(e.to) {
                    g.add_edge(NodeIndex::new(u), NodeIndex::new(e.to as usize), ());
                }
            }
        }
        let full = RobotSet::full(self.n);
        let mut member = vec![usize::MAX; self.node_count()];
        let mut out = Vec::new();
        for comp in tarjan_scc(&g) {
            let mut members: Vec<u32> = comp.iter().map(|x| x.index() as u32).collect();
            members.sort_unstable();
            if !ok(members[0]) {
                continue;
            }
            for &m in &members {
                member[m as usize] = out.len();
            }
            let id = out.len();
            let mut covered = RobotSet::EMPTY;
            for &u in &members {
                for e in &self.edges[u as usize] {
                    if keep(e) && member[e.to as usize] == id {
                        covered = covered.union(e.actors);
                    }
                }
            }
            out.push((covered == full, members));
        }
        let mut fair: Vec<Vec<u32>> = out.into_iter().filter(|(f, _)| *f).map(|(_, m)| m).collect();
        fair.sort_by_key(|c| c[0]);
        fair
    }

    /// Nodes from which some node in `targets` is reachable.
    pub fn can_reach(&self, targets: &[bool]) -> Vec<bool> {
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); self.node_count()];
        for (u, out) in self.edges.iter().enumerate() {
            for e in out {
                rev[e.to as usize].push(u as u32);
            }
        }
        let mut seen = targets.to_vec();
        let mut q: VecDeque<u32> = (0..self.node_count() as u32).filter(|&v| targets[v as usize]).collect();
        while let Some(v) = q.pop_front() {
            for &u in &rev[v as usize] {
                if !seen[u as usize] {
                    seen[u as usize] = true;
                    q.push_back(u);
                }
            }
        }
        seen
    }

    fn choices(&self, path: &[(u32, usize)]) -> Vec<Choice> {
        path.iter().map(|&(u, i)| self.edges[u as usize][i].choice).collect()
    }

    /// Lasso reaching `cycle` from the start nodes.
    fn lasso_to_cycle(&self, cycle: &[(u32, usize)], from: &[u32]) -> Lasso {
        let entry = cycle.first().map(|c| c.0).unwrap_or(from[0]);
        let prefix = self.path_to(from, entry).expect("cycle is reachable");
        self.lasso(&prefix, cycle)
    }

    fn lasso(&self, prefix: &[(u32, usize)], cycle: &[(u32, usize)]) -> Lasso {
        let start = prefix.first().or(cycle.first()).map(|c| c.0).unwrap_or(self.starts[0]);
        Lasso {
            start: self.colors[start as usize].clone(),
            prefix: self.choices(prefix),
            cycle: self.choices(cycle),
            states: prefix.iter().chain(cycle.iter()).map(|&(u, _)| self.labels[u as usize].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportGraph {
    pub nodes: std::collections::BTreeSet<ColorView>,
    /// Value: some underlying transition executes P.
    pub edges: std::collections::BTreeMap<(ColorView, ColorView), bool>,
    pub starts: std::collections::BTreeSet<ColorView>,
}

/// Infinite scheduler behavior `prefix · cycle^ω` from a start coloring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lasso {
    pub start: Vec<ControlColor>,
    pub prefix: Vec<Choice>,
    pub cycle: Vec<Choice>,
    /// Abstract states visited, for reports.
    pub states: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Failure {
    Segment(SegViolation),
    /// Fair cycle in which this robot never runs P.
    InducedUnfair(usize),
    /// Fair cycle with no P execution at all.
    NoProgress,
    /// Fair cycle that never reaches a legal support.
    NoConvergence,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Segment(v) => write!(f, "{v}"),
            Failure::InducedUnfair(r) => write!(f, "induced-unfair:{r}"),
            Failure::NoProgress => write!(f, "no-progress"),
            Failure::NoConvergence => write!(f, "no-convergence"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub failure: Failure,
    pub lasso: Lasso,
    /// The monitor ignored everything before the first mega-cycle start.
    pub syncing: bool,
    /// Mega-cycle rule the monitor used.
    #[serde(default)]
    pub rule: MegaRule,
}

/// How the segment monitor starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorStart {
    /// From a legal initial configuration.
    Strict,
    /// Waiting for the first mega-cycle start.
    Syncing,
}

#[derive(Debug, Clone)]
pub struct MonitorOutcome {
    pub product_states: usize,
    pub counterexample: Option<Counterexample>,
}

/// Runs the stage / mega-cycle monitor over every path of `graph` from
/// `starts`, exploring the product of graph nodes and monitor states. Every
/// reachable product node extends to a fair lasso, so the first violating
/// edge found yields a fair counterexample. Violations `wanted` rejects are
/// ignored.
pub fn monitor(
    graph: &StateGraph,
    starts: &[u32],
    mode: MonitorStart,
    rule: MegaRule,
    wanted: &dyn Fn(&SegViolation) -> bool,
    budget: &Budget,
) -> Result<MonitorOutcome, VerifierError> {
    let style = SegStyle::of(graph.kind);
    let mut ids: HashMap<(u32, Segmenter), u32> = HashMap::new();
    let mut nodes: Vec<(u32, Segmenter)> = Vec::new();
    let mut parent: Vec<Option<(u32, usize)>> = Vec::new();
    let mut q = VecDeque::new();
    for &s in starts {
        let seg = match mode {
            MonitorStart::Strict => {
                Segmenter::new(style, rule, graph.n, graph.supports[s as usize], graph.cycle_start[s as usize])
            }
            MonitorStart::Syncing => {
                let mut seg = Segmenter::syncing(style, rule, graph.n);
                seg.instant(graph.supports[s as usize], graph.cycle_start[s as usize]);
                seg
            }
        };
        if !ids.contains_key(&(s, seg)) {
            ids.insert((s, seg), nodes.len() as u32);
            nodes.push((s, seg));
            parent.push(None);
            q.push_back(nodes.len() as u32 - 1);
        }
    }
    while let Some(pid) = q.pop_front() {
        let (u, seg) = nodes[pid as usize];
        for (i, e) in graph.edges[u as usize].iter().enumerate() {
            let mut next = seg;
            let mut viol = None;
            for r in e.execs.iter() {
                let (_, v) = next.exec(r);
                viol = viol.or(v.filter(wanted));
            }
            let (_, v) = next.instant(graph.supports[e.to as usize], graph.cycle_start[e.to as usize]);
            viol = viol.or(v.filter(wanted));
            if let Some(v) = viol {
                let mut path = vec![(u, i)];
                let mut cur = pid;
                while let Some((p, pi)) = parent[cur as usize] {
                    path.push((nodes[p as usize].0, pi));
                    cur = p;
                }
                path.reverse();
                let tail = graph
                    .fair_cycle(&|_| true, &|_| true, Some(&[e.to]))
                    .expect("finite graphs with a full activation always admit a fair cycle");
                let mut prefix = path;
                prefix.extend(graph.path_within(e.to, tail[0].0, &|_| true, &|_| true).expect("reachable"));
                let mut lasso = graph.lasso(&prefix, &tail);
                lasso.start = graph.colors[nodes[cur as usize].0 as usize].clone();

                return Ok(MonitorOutcome {
                    product_states: nodes.len(),
                    counterexample: Some(Counterexample {
                        failure: Failure::Segment(v),
                        lasso,
                        syncing: mode == MonitorStart::Syncing,
                        rule,
                    }),
                });
            }
            if !ids.contains_key(&(e.to, next)) {
                if nodes.len() >= budget.max_states {
                    return Err(VerifierError::BudgetExceeded(budget.max_states));
                }
                ids.insert((e.to, next), nodes.len() as u32);
                nodes.push((e.to, next));
                parent.push(Some((pid, i)));
                q.push_back(nodes.len() as u32 - 1);
            }
        }
    }
    Ok(MonitorOutcome { product_states: nodes.len(), counterexample: None })
}

/// Looks for a fair cycle, reachable from `from` and inside `inside`, in
/// which no robot runs P, or in which some robot never runs P.
pub fn liveness(graph: &StateGraph, from: &[u32], inside: &dyn Fn(u32) -> bool) -> Option<Counterexample> {
    if let Some(c) = graph.fair_cycle(inside, &|e| e.execs.is_empty(), Some(from)) {
        return Some(Counterexample { failure: Failure::NoProgress, lasso: graph.lasso_to_cycle(&c, from), syncing: false, rule: MegaRule::default() });
    }
    for r in 0..graph.n {
        if let Some(c) = graph.fair_cycle(inside, &|e| !e.execs.contains(r), Some(from)) {
            return Some(Counterexample {
                failure: Failure::InducedUnfair(r),
                lasso: graph.lasso_to_cycle(&c, from),
                syncing: false,
                rule: MegaRule::default(),
            });
        }
    }
    None
}

/// Generic breadth-first exploration from packed start states.
pub fn explore<S: Semantics>(sem: &S, starts: &[u64], budget: &Budget) -> Result<StateGraph, VerifierError> {
    let mut g = StateGraph {
        n: sem.n(),
        kind: sem.kind(),
        scheduler: sem.scheduler(),
        states: Vec::new(),
        index: HashMap::new(),
        edges: Vec::new(),
        starts: Vec::new(),
        supports: Vec::new(),
        colors: Vec::new(),
        cycle_start: Vec::new(),
        labels: Vec::new(),
    };
    let mut q = VecDeque::new();
    let add = |g: &mut StateGraph, s: u64, q: &mut VecDeque<u32>| -> Result<u32, VerifierError> {
        if let Some(&id) = g.index.get(&s) {
            return Ok(id);
        }
        if g.states.len() >= budget.max_states {
            return Err(VerifierError::BudgetExceeded(budget.max_states));
        }
        let id = g.states.len() as u32;
        g.index.insert(s, id);
        g.states.push(s);
        g.edges.push(Vec::new());
        g.supports.push(sem.support(s));
        g.colors.push(sem.colors(s));
        g.cycle_start.push(sem.cycle_start(s));
        g.labels.push(sem.describe(s));
        q.push_back(id);
        Ok(id)
    };
    for &s in starts {
        let id = add(&mut g, s, &mut q)?;
        if !g.starts.contains(&id) {
            g.starts.push(id);
        }
    }
    let mut buf = Vec::new();
    while let Some(u) = q.pop_front() {
        buf.clear();
        sem.successors(g.states[u as usize], &mut buf)?;
        let mut out = Vec::with_capacity(buf.len());
        for t in &buf {
            let to = add(&mut g, t.to, &mut q)?;
            out.push(Edge { to, choice: t.choice, actors: t.actors, execs: t.execs });
        }
        g.edges[u as usize] = out;
    }
    Ok(g)
}

/// All colorings of `n` robots over `colors`, in lexicographic order.
pub fn all_colorings(colors: &[ControlColor], n: usize) -> Vec<Vec<ControlColor>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                colors.iter().map(move |&c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}
