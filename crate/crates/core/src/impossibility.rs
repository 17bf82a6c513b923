//! Exhaustive refutation of every two-color simulator for two robots.
//!
//! A candidate reads only its own color and the other robot's color, so its
//! color dynamics do not depend on the simulated protocol. The refuter walks
//! the product of color pairs with the online restricted-repetition summary
//! under every SSYNCH choice {a}, {b}, {a,b} and looks for a fair lasso whose
//! induced sequence is invalid or fails to serve both robots.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ControlColor, RobotSet};
use crate::protocols::{ControlProtocol, ControlStep, ProtocolError};
use crate::schedulers::{validate_rsynch, ActivationSequence, RsynchReason, RsynchSummary, SchedulerError};

#[derive(Debug, Error)]
pub enum ImpossibilityError {
    #[error("table id {0} out of range (0..256)")]
    TableId(u32),
    #[error("cannot parse table encoding {0:?}")]
    Encoding(String),
    #[error("witness does not replay: {0}")]
    Replay(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
}

const N: usize = 2;

/// Action of one table entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Noop,
    ExecP,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Entry {
    pub action: Action,
    pub next: ControlColor,
}

/// A two-color candidate: one entry per (own color, other color), in the
/// order XX, XY, YX, YY.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TwoColorProtocolTable {
    pub entries: [Entry; 4],
}

fn two_color_index(c: ControlColor) -> usize {
    match c {
        ControlColor::X => 0,
        ControlColor::Y => 1,
        other => panic!("{other} is not a two-color light"),
    }
}

const XY: [ControlColor; 2] = [ControlColor::X, ControlColor::Y];

impl TwoColorProtocolTable {
    /// Entry `i` takes bits `2i` (next is Y) and `2i+1` (executes P) of `id`.
    pub fn from_id(id: u32) -> Result<Self, ImpossibilityError> {
        if id >= 256 {
            return Err(ImpossibilityError::TableId(id));
        }
        let entries = std::array::from_fn(|i| {
            let bits = id >> (2 * i) & 0b11;
            Entry {
                action: if bits & 0b10 != 0 { Action::ExecP } else { Action::Noop },
                next: XY[(bits & 1) as usize],
            }
        });
        Ok(TwoColorProtocolTable { entries })
    }

    pub fn id(&self) -> u32 {
        self.entries.iter().enumerate().fold(0, |acc, (i, e)| {
            let bits = u32::from(e.action == Action::ExecP) << 1 | two_color_index(e.next) as u32;
            acc | bits << (2 * i)
        })
    }

    pub fn entry(&self, my: ControlColor, other: ControlColor) -> Entry {
        self.entries[2 * two_color_index(my) + two_color_index(other)]
    }

    pub fn step(&self, my: ControlColor, other: ControlColor) -> ControlStep {
        let e = self.entry(my, other);
        ControlStep { execute_p: e.action == Action::ExecP, next: e.next }
    }

    pub fn never_executes(&self) -> bool {
        self.entries.iter().all(|e| e.action == Action::Noop)
    }

    /// Text form such as `XX:P>Y XY:->X YX:->X YY:->X`, where `P` runs the
    /// simulated protocol and `-` does nothing.
    pub fn encoding(&self) -> String {
        let mut parts = Vec::with_capacity(4);
        for my in XY {
            for other in XY {
                let e = self.entry(my, other);
                let act = if e.action == Action::ExecP { 'P' } else { '-' };
                parts.push(format!("{my}{other}:{act}>{}", e.next));
            }
        }
        parts.join(" ")
    }

    pub fn parse(s: &str) -> Result<Self, ImpossibilityError> {
        let bad = || ImpossibilityError::Encoding(s.to_string());
        let mut entries = [Entry { action: Action::Noop, next: ControlColor::X }; 4];
        let mut seen = [false; 4];
        for part in s.split_whitespace() {
            let (key, val) = part.split_once(':').ok_or_else(bad)?;
            let (act, next) = val.split_once('>').ok_or_else(bad)?;
            let mut key = key.chars().map(|c| c.to_string().parse::<ControlColor>());
            let (Some(Ok(my)), Some(Ok(other)), None) = (key.next(), key.next(), key.next()) else {
                return Err(bad());
            };
            let next: ControlColor = next.parse().map_err(|_| bad())?;
            if ![my, other, next].iter().all(|c| XY.contains(c)) {
                return Err(bad());
            }
            let action = match act {
                "P" => Action::ExecP,
                "-" => Action::Noop,
                _ => return Err(bad()),
            };
            let i = 2 * two_color_index(my) + two_color_index(other);
            entries[i] = Entry { action, next };
            seen[i] = true;
        }
        if !seen.iter().all(|&x| x) {
            return Err(bad());
        }
        Ok(TwoColorProtocolTable { entries })
    }
}

impl fmt::Display for TwoColorProtocolTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encoding())
    }
}

/// All 256 tables ordered by id.
pub fn enumerate_tables() -> Vec<TwoColorProtocolTable> {
    (0..256).map(|id| TwoColorProtocolTable::from_id(id).expect("id in range")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Violation {
    /// The induced sequence breaks the restricted-repetition condition at
    /// 1-based `index`.
    RsynchInvalid { index: usize, reason: RsynchReason },
    /// `robot` never executes in the cycle while the other one does.
    InducedUnfair { robot: usize },
    /// Nobody executes in the cycle.
    NoProgress,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RsynchInvalid { index, reason } => write!(f, "RsynchInvalid({index}, {reason})"),
            Violation::InducedUnfair { robot } => write!(f, "InducedUnfair(r{robot})"),
            Violation::NoProgress => f.write_str("NoProgress"),
        }
    }
}

/// A fair SSYNCH lasso over robots 0 (a) and 1 (b).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefutationWitness {
    pub violation: Violation,
    pub prefix: Vec<RobotSet>,
    pub cycle: Vec<RobotSet>,
}

impl RefutationWitness {
    pub fn schedule(&self) -> ActivationSequence {
        ActivationSequence::lasso(self.prefix.clone(), self.cycle.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Node {
    colors: [ControlColor; N],
    summary: RsynchSummary,
}

struct Product {
    nodes: Vec<Node>,
    /// Per node, in choice order: (activated set, executors, target).
    edges: Vec<Vec<(RobotSet, RobotSet, usize)>>,
    /// BFS parent: (node, choice).
    parent: Vec<Option<(usize, RobotSet)>>,
    /// First violating transition in BFS order: (node, choice, index, reason).
    rsynch: Option<(usize, RobotSet, usize, RsynchReason)>,
}

fn choices() -> [RobotSet; 3] {
    [RobotSet::single(0), RobotSet::single(1), RobotSet::full(N)]
}

fn round(step: &dyn Fn(ControlColor, ControlColor) -> ControlStep, colors: [ControlColor; N], set: RobotSet) -> ([ControlColor; N], RobotSet) {
    let mut next = colors;
    let mut execs = RobotSet::EMPTY;
    for r in set.iter() {
        let st = step(colors[r], colors[1 - r]);
        next[r] = st.next;
        if st.execute_p {
            execs.insert(r);
        }
    }
    (next, execs)
}

fn build(step: &dyn Fn(ControlColor, ControlColor) -> ControlStep, start: [ControlColor; N]) -> Product {
    let full = RobotSet::full(N);
    let root = Node { colors: start, summary: RsynchSummary::default() };
    let mut p = Product { nodes: vec![root], edges: vec![Vec::new()], parent: vec![None], rsynch: None };
    let mut depth = vec![0usize];
    // Induced-sequence length reached at each node, for violation indices.
    let mut induced = vec![0usize];
    let mut index: HashMap<Node, usize> = HashMap::from([(root, 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let node = p.nodes[u];
        for set in choices() {
            let (colors, execs) = round(step, node.colors, set);
            let mut summary = node.summary;
            if !execs.is_empty() {
                if let Some(reason) = summary.push(execs, full) {
                    if p.rsynch.is_none() {
                        let at = match reason {
                            RsynchReason::OverlapConsecutive => induced[u],
                            _ => induced[u] + 1,
                        };
                        p.rsynch = Some((u, set, at, reason));
                    }
                    continue;
                }
            }
            let to = Node { colors, summary };
            let v = *index.entry(to).or_insert_with(|| {
                p.nodes.push(to);
                p.edges.push(Vec::new());
                p.parent.push(Some((u, set)));
                depth.push(depth[u] + 1);
                induced.push(induced[u] + usize::from(!execs.is_empty()));
                queue.push_back(p.nodes.len() - 1);
                p.nodes.len() - 1
            });
            p.edges[u].push((set, execs, v));
        }
    }
    p
}

impl Product {
    fn path_to(&self, mut v: usize) -> Vec<RobotSet> {
        let mut out = Vec::new();
        while let Some((u, set)) = self.parent[v] {
            out.push(set);
            v = u;
        }
        out.reverse();
        out
    }

    /// Shortest cycle from `s` back to `s` over edges whose executors pass
    /// `keep`, ending with all robots activated and `done(executors seen)`.
    fn shortest_cycle(&self, s: usize, keep: &dyn Fn(RobotSet) -> bool, done: &dyn Fn(RobotSet) -> bool) -> Option<Vec<RobotSet>> {
        let full = RobotSet::full(N);
        type Key = (usize, RobotSet, RobotSet);
        let mut parent: HashMap<Key, (Key, RobotSet)> = HashMap::new();
        let start: Key = (s, RobotSet::EMPTY, RobotSet::EMPTY);
        let mut queue = VecDeque::from([start]);
        while let Some(k @ (u, act, ex)) = queue.pop_front() {
            for &(set, execs, v) in &self.edges[u] {
                if !keep(execs) {
                    continue;
                }
                let nk: Key = (v, act.union(set), ex.union(execs));
                if nk == start || parent.contains_key(&nk) {
                    continue;
                }
                parent.insert(nk, (k, set));
                if v == s && nk.1 == full && done(nk.2) {
                    let mut out = Vec::new();
                    let mut cur = nk;
                    while cur != start {
                        let (prev, set) = parent[&cur];
                        out.push(set);
                        cur = prev;
                    }
                    out.reverse();
                    return Some(out);
                }
                queue.push_back(nk);
            }
        }
        None
    }

    /// Best cyclic witness of one kind: shortest prefix, then shortest cycle.
    fn cycle_witness(
        &self,
        violation: Violation,
        keep: &dyn Fn(RobotSet) -> bool,
        done: &dyn Fn(RobotSet) -> bool,
    ) -> Option<RefutationWitness> {
        let mut best: Option<RefutationWitness> = None;
        for s in 0..self.nodes.len() {
            if let Some(cycle) = self.shortest_cycle(s, keep, done) {
                let w = RefutationWitness { violation, prefix: self.path_to(s), cycle };
                if best.as_ref().map_or(true, |b| witness_key(&w) < witness_key(b)) {
                    best = Some(w);
                }
            }
        }
        best
    }
}

fn witness_key(w: &RefutationWitness) -> (usize, usize) {
    (w.prefix.len(), w.cycle.len())
}

/// Searches for a fair lasso refuting `step` from `start`. The witness with
/// the shortest prefix, then the shortest cycle, wins; ties go to an
/// RSYNCH violation, then no progress, then starvation of robot 0, then 1.
pub fn refute_with(step: &dyn Fn(ControlColor, ControlColor) -> ControlStep, start: [ControlColor; N]) -> Option<RefutationWitness> {
    let p = build(step, start);
    let mut candidates = Vec::new();
    if let Some((u, set, index, reason)) = p.rsynch {
        let mut prefix = p.path_to(u);
        prefix.push(set);
        // Any fair continuation keeps the violation.
        candidates.push(RefutationWitness {
            violation: Violation::RsynchInvalid { index, reason },
            prefix,
            cycle: vec![RobotSet::full(N)],
        });
    }
    candidates.extend(p.cycle_witness(Violation::NoProgress, &|e| e.is_empty(), &|_| true));
    for robot in 0..N {
        candidates.extend(p.cycle_witness(
            Violation::InducedUnfair { robot },
            &|e| !e.contains(robot),
            &|seen| !seen.is_empty(),
        ));
    }
    // min_by_key keeps the first of equal keys, which gives the tie order.
    candidates.into_iter().min_by_key(witness_key)
}

/// Refutes a two-color table started with both robots on X. Both-Y starts
/// are covered by the table with X and Y swapped.
pub fn refute(table: &TwoColorProtocolTable) -> Option<RefutationWitness> {
    refute_with(&|my, other| table.step(my, other), [ControlColor::X; N])
}

/// Same search for a two-robot control protocol from `start`.
pub fn refute_protocol(
    protocol: ControlProtocol,
    start: [ControlColor; N],
) -> Result<Option<RefutationWitness>, ImpossibilityError> {
    for &c in &start {
        protocol.kind.check_color(c)?;
    }
    for &my in protocol.kind.colors() {
        for &other in protocol.kind.colors() {
            protocol.step_pair(my, other)?;
        }
    }
    Ok(refute_with(&|my, other| protocol.step_pair(my, other).expect("colors checked above"), start))
}

/// Replays a witness round by round and reports the violation it exhibits.
/// For cyclic violations the cycle must bring the colors back to where it
/// started, so that it repeats forever.
pub fn replay_witness(
    step: &dyn Fn(ControlColor, ControlColor) -> ControlStep,
    start: [ControlColor; N],
    w: &RefutationWitness,
) -> Result<Option<Violation>, ImpossibilityError> {
    let full = RobotSet::full(N);
    if w.cycle.is_empty() || w.prefix.iter().chain(&w.cycle).any(|s| s.is_empty() || !s.is_subset(full)) {
        return Err(ImpossibilityError::Replay("bad activation set".into()));
    }
    if w.cycle.iter().fold(RobotSet::EMPTY, |a, &s| a.union(s)) != full {
        return Err(ImpossibilityError::Replay("cycle is not fair".into()));
    }
    let mut colors = start;
    let mut induced_prefix = Vec::new();
    for &set in &w.prefix {
        let (next, execs) = round(step, colors, set);
        colors = next;
        if !execs.is_empty() {
            induced_prefix.push(execs);
        }
    }
    let entry = colors;
    let mut induced_cycle = Vec::new();
    let mut cycle_execs = RobotSet::EMPTY;
    for &set in &w.cycle {
        let (next, execs) = round(step, colors, set);
        colors = next;
        if !execs.is_empty() {
            induced_cycle.push(execs);
            cycle_execs = cycle_execs.union(execs);
        }
    }
    let periodic = colors == entry;
    // Unroll the cycle as a plain schedule when it is not periodic in colors;
    // only violations inside the replayed prefix count then.
    let verdict = if periodic && !induced_cycle.is_empty() {
        validate_rsynch(&ActivationSequence::lasso(induced_prefix, induced_cycle), N)?
    } else {
        induced_prefix.extend(induced_cycle);
        validate_rsynch(&ActivationSequence::finite(induced_prefix), N)?
    };
    if let Some(v) = verdict.violation {
        return Ok(Some(Violation::RsynchInvalid { index: v.index, reason: v.reason }));
    }
    if !periodic {
        return Ok(None);
    }
    if cycle_execs.is_empty() {
        return Ok(Some(Violation::NoProgress));
    }
    Ok((0..N).find(|&r| !cycle_execs.contains(r)).map(|robot| Violation::InducedUnfair { robot }))
}

/// One line of the enumeration report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRefutation {
    pub table_id: u32,
    pub encoding: String,
    /// Absent when the table survived every fair lasso.
    pub violation: Option<Violation>,
    pub prefix: Vec<RobotSet>,
    pub cycle: Vec<RobotSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImpossibilityReport {
    pub tables: Vec<TableRefutation>,
    pub refuted: usize,
    pub pass: bool,
}

impl ImpossibilityReport {
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for t in &self.tables {
            out.push_str(&serde_json::to_string(t).expect("report serializes"));
            out.push('\n');
        }
        out
    }

    pub fn survivors(&self) -> impl Iterator<Item = &TableRefutation> {
        self.tables.iter().filter(|t| t.violation.is_none())
    }
}

/// Refutes the given tables; passes iff none survives.
pub fn check_tables(tables: &[TwoColorProtocolTable]) -> ImpossibilityReport {
    let rows: Vec<TableRefutation> = tables
        .par_iter()
        .map(|t| {
            let w = refute(t);
            TableRefutation {
                table_id: t.id(),
                encoding: t.encoding(),
                violation: w.as_ref().map(|w| w.violation),
                prefix: w.as_ref().map(|w| w.prefix.clone()).unwrap_or_default(),
                cycle: w.map(|w| w.cycle).unwrap_or_default(),
            }
        })
        .collect();
    let refuted = rows.iter().filter(|r| r.violation.is_some()).count();
    ImpossibilityReport { pass: refuted == rows.len(), refuted, tables: rows }
}

/// Refutes all 256 two-color tables.
pub fn check_theorem10() -> ImpossibilityReport {
    check_tables(&enumerate_tables())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ControlColor::{X, Y};

    fn set(ids: &[usize]) -> RobotSet {
        RobotSet::from_ids(ids.iter().copied())
    }

    #[test]
    fn ids_round_trip_and_are_distinct() {
        let tables = enumerate_tables();
        assert_eq!(tables.len(), 256);
        for (i, t) in tables.iter().enumerate() {
            assert_eq!(t.id(), i as u32);
            assert_eq!(TwoColorProtocolTable::parse(&t.encoding()).unwrap(), *t);
        }
        let distinct: std::collections::HashSet<_> = tables.iter().collect();
        assert_eq!(distinct.len(), 256);
    }

    #[test]
    fn table_zero_is_all_noop_to_x() {
        let t = TwoColorProtocolTable::from_id(0).unwrap();
        assert!(t.entries.iter().all(|e| *e == Entry { action: Action::Noop, next: X }));
    }

    #[test]
    fn bad_ids_and_encodings() {
        assert!(TwoColorProtocolTable::from_id(256).is_err());
        assert!(TwoColorProtocolTable::parse("XX:P>Y").is_err());
        assert!(TwoColorProtocolTable::parse("XX:P>T XY:->X YX:->X YY:->X").is_err());
        assert!(TwoColorProtocolTable::parse("XX:Q>Y XY:->X YX:->X YY:->X").is_err());
    }

    #[test]
    fn sample_table_executes_twice_in_a_row() {
        let t = TwoColorProtocolTable::parse("XX:P>Y XY:->X YX:->X YY:->X").unwrap();
        // a alone: X,X -> Y,X (exec) -> X,X -> Y,X (exec again).
        let w = refute(&t).unwrap();
        assert!(matches!(w.violation, Violation::RsynchInvalid { .. }));
        let step = |m, o| t.step(m, o);
        assert_eq!(replay_witness(&step, [X, X], &w).unwrap(), Some(w.violation));
    }

    #[test]
    fn all_noop_makes_no_progress() {
        let w = refute(&TwoColorProtocolTable::from_id(0).unwrap()).unwrap();
        assert_eq!(w.violation, Violation::NoProgress);
        assert!(w.prefix.is_empty());
        assert_eq!(w.cycle, vec![set(&[0, 1])]);
    }

    #[test]
    fn exec_on_xx_overlaps() {
        let t = TwoColorProtocolTable::parse("XX:P>X XY:->X YX:->X YY:->X").unwrap();
        let w = refute(&t).unwrap();
        assert_eq!(w.violation, Violation::RsynchInvalid { index: 1, reason: RsynchReason::OverlapConsecutive });
        assert_eq!(w.prefix, vec![set(&[0]), set(&[0])]);
    }

    #[test]
    fn replay_rejects_unfair_cycle() {
        let t = TwoColorProtocolTable::from_id(0).unwrap();
        let w = RefutationWitness { violation: Violation::NoProgress, prefix: vec![], cycle: vec![set(&[0])] };
        assert!(replay_witness(&|m, o| t.step(m, o), [X, Y], &w).is_err());
    }
}
