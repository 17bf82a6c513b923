//! Runs a control protocol wrapped around a simulated protocol under an
//! SSYNCH schedule or an ASYNCH adversary, and cuts the resulting trace into
//! mega-cycles and stages.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ActivityPhase, ColorView, Configuration, ControlColor, Decision, LookRecord, PSnapshot, Point, RobotSet,
    SimulatedProtocol,
};
use crate::protocols::{ControlProtocol, ProtocolError, ProtocolKind};
use crate::schedulers::{ActivationSequence, AsynchAdversary, AsynchEvent, AsynchOp, RsynchReason, RsynchSummary};

use ControlColor::{SPrime, M, S, T};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("schedule has {available} rounds but {needed} were requested")]
    ScheduleTooShort { needed: usize, available: usize },
    #[error("robot {robot} has color {color}, which {kind} does not use")]
    ColorMismatch { robot: usize, color: ControlColor, kind: ProtocolKind },
    #[error("robot {robot} has sim color {sim} but P only has {k} colors")]
    SimColorOutOfRange { robot: usize, sim: u32, k: u32 },
    #[error("{kind} runs with exactly {expected} robots, got {got}")]
    WrongTeamSize { kind: ProtocolKind, expected: usize, got: usize },
    #[error("round {round} activates an empty set")]
    EmptyActivation { round: usize },
    #[error("round {round} activates robot outside [0, {n})")]
    RobotOutOfRange { round: usize, n: usize },
    #[error("event {event} is not enabled; robot {robot} would perform {expected}")]
    NotEnabled { event: AsynchEvent, robot: usize, expected: AsynchOp },
    #[error("event {event} names a robot outside [0, {n})")]
    EventRobotOutOfRange { event: AsynchEvent, n: usize },
    #[error("robot {0} does not start Idle")]
    NotIdle(usize),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheduler {
    Ssynch,
    Asynch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Init,
    Round,
    Event,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub robot: usize,
    pub exec_p: bool,
    pub from: ControlColor,
    pub to: ControlColor,
}

/// One trace line. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub kind: RecordKind,
    pub actors: Vec<usize>,
    pub op: String,
    pub decisions: Vec<DecisionRecord>,
    #[serde(with = "support_names")]
    pub support: ColorView,
    pub version: u64,
}

mod support_names {
    use super::ColorView;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &ColorView, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.names())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ColorView, D::Error> {
        let s = String::deserialize(d)?;
        ColorView::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub protocol: ControlProtocol,
    pub scheduler: Scheduler,
    pub initial: Configuration,
    /// `records[0]` describes the initial configuration.
    pub records: Vec<TraceRecord>,
    /// Configuration after each record; `configs[0]` equals `initial`.
    pub configs: Vec<Configuration>,
}

impl Trace {
    pub fn n(&self) -> usize {
        self.initial.n()
    }

    pub fn final_config(&self) -> &Configuration {
        self.configs.last().expect("trace always has the initial configuration")
    }

    /// Robots that executed P, in record order, with the record index.
    pub fn executions(&self) -> Vec<(usize, usize)> {
        executions(&self.records)
    }

    pub fn to_jsonl(&self) -> String {
        records_to_jsonl(&self.records)
    }
}

pub fn records_to_jsonl(records: &[TraceRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("trace records serialize"));
        out.push('\n');
    }
    out
}

pub fn records_from_jsonl(text: &str) -> Result<Vec<TraceRecord>, EngineError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| EngineError::MalformedTrace(format!("line {}: {e}", i + 1)))
        })
        .collect()
}

fn executions(records: &[TraceRecord]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, r) in records.iter().enumerate() {
        for d in &r.decisions {
            if d.exec_p && r.kind != RecordKind::Init {
                out.push((i, d.robot));
            }
        }
    }
    out
}

fn validate_init(protocol: ControlProtocol, p: &dyn SimulatedProtocol, init: &Configuration) -> Result<(), EngineError> {
    let kind = protocol.kind;
    if let Some(expected) = kind.fixed_n() {
        if init.n() != expected {
            return Err(EngineError::WrongTeamSize { kind, expected, got: init.n() });
        }
    }
    let k = p.sim_colors();
    for (i, r) in init.robots.iter().enumerate() {
        if kind.check_color(r.light.control).is_err() {
            return Err(EngineError::ColorMismatch { robot: i, color: r.light.control, kind });
        }
        if r.light.sim >= k {
            return Err(EngineError::SimColorOutOfRange { robot: i, sim: r.light.sim, k });
        }
        if r.phase != ActivityPhase::Idle {
            return Err(EngineError::NotIdle(i));
        }
    }
    Ok(())
}

fn init_record(config: &Configuration) -> TraceRecord {
    TraceRecord {
        step: 0,
        kind: RecordKind::Init,
        actors: (0..config.n()).collect(),
        op: "init".into(),
        decisions: config
            .robots
            .iter()
            .enumerate()
            .map(|(i, r)| DecisionRecord { robot: i, exec_p: false, from: r.light.control, to: r.light.control })
            .collect(),
        support: config.support(),
        version: config.version,
    }
}

/// Snapshot for P as seen by robot `me`, positions relative to its own.
fn p_snapshot(config: &Configuration, me: usize, observed_at: impl Fn(usize) -> Point) -> PSnapshot {
    let own = config.robots[me].position;
    PSnapshot {
        own_sim: config.robots[me].light.sim,
        observed: (0..config.n()).map(|j| (observed_at(j).sub(own), config.robots[j].light.sim)).collect(),
    }
}

fn decide(
    protocol: ControlProtocol,
    p: &dyn SimulatedProtocol,
    config: &Configuration,
    me: usize,
    view: ColorView,
    snapshot: &PSnapshot,
) -> Result<Decision, EngineError> {
    let robot = &config.robots[me];
    let step = protocol.step(robot.light.control, view)?;
    let (destination, next_sim) = if step.execute_p {
        let out = p.compute(snapshot);
        (robot.position.add(out.destination), out.sim)
    } else {
        (robot.position, robot.light.sim)
    };
    Ok(Decision { execute_p: step.execute_p, from: robot.light.control, next_control: step.next, destination, next_sim })
}

/// Runs `rounds` SSYNCH rounds. In each round every activated robot sees the
/// pre-round configuration and all writes and moves land together.
pub fn run_ssynch(
    protocol: impl Into<ControlProtocol>,
    p: &dyn SimulatedProtocol,
    init: &Configuration,
    schedule: &ActivationSequence,
    rounds: usize,
) -> Result<Trace, EngineError> {
    let protocol = protocol.into();
    validate_init(protocol, p, init)?;
    if let Some(available) = schedule.finite_len() {
        if available < rounds {
            return Err(EngineError::ScheduleTooShort { needed: rounds, available });
        }
    }
    let n = init.n();
    let full = RobotSet::full(n);
    let mut config = init.clone();
    let mut records = vec![init_record(init)];
    let mut configs = vec![init.clone()];
    for round in 0..rounds {
        let set = schedule.get(round).expect("length checked above");
        if set.is_empty() {
            return Err(EngineError::EmptyActivation { round: round + 1 });
        }
        if !set.is_subset(full) {
            return Err(EngineError::RobotOutOfRange { round: round + 1, n });
        }
        let view = config.support();
        let mut decisions = Vec::with_capacity(set.len());
        for r in set.iter() {
            let snap = p_snapshot(&config, r, |j| config.robots[j].position);
            decisions.push((r, decide(protocol, p, &config, r, view, &snap)?));
        }
        let mut next = config.clone();
        for (r, d) in &decisions {
            let robot = &mut next.robots[*r];
            if robot.light.control != d.next_control || robot.light.sim != d.next_sim {
                robot.light.control = d.next_control;
                robot.light.sim = d.next_sim;
                next.version += 1;
            }
            if robot.position != d.destination {
                robot.position = d.destination;
                next.version += 2;
            }
        }
        records.push(TraceRecord {
            step: round + 1,
            kind: RecordKind::Round,
            actors: set.iter().collect(),
            op: "cycle".into(),
            decisions: decisions
                .iter()
                .map(|(r, d)| DecisionRecord { robot: *r, exec_p: d.execute_p, from: d.from, to: d.next_control })
                .collect(),
            support: next.support(),
            version: next.version,
        });
        configs.push(next.clone());
        config = next;
    }
    Ok(Trace { protocol, scheduler: Scheduler::Ssynch, initial: init.clone(), records, configs })
}

fn next_op(phase: &ActivityPhase) -> AsynchOp {
    match phase {
        ActivityPhase::Idle => AsynchOp::Look,
        ActivityPhase::Looked(_) => AsynchOp::Compute,
        ActivityPhase::Computed(_) => AsynchOp::MoveBegin,
        ActivityPhase::Moving(_) => AsynchOp::MoveEnd,
    }
}

fn moving_nontrivially(config: &Configuration, j: usize) -> Option<Decision> {
    match &config.robots[j].phase {
        ActivityPhase::Moving(d) if d.destination != config.robots[j].position => Some(*d),
        _ => None,
    }
}

/// Runs at most `max_events` adversary-chosen events.
pub fn run_asynch(
    protocol: impl Into<ControlProtocol>,
    p: &dyn SimulatedProtocol,
    init: &Configuration,
    adversary: &mut dyn AsynchAdversary,
    max_events: usize,
) -> Result<Trace, EngineError> {
    let protocol = protocol.into();
    validate_init(protocol, p, init)?;
    let n = init.n();
    let mut config = init.clone();
    let mut records = vec![init_record(init)];
    let mut configs = vec![init.clone()];
    for step in 1..=max_events {
        let enabled: Vec<AsynchOp> = config.robots.iter().map(|r| next_op(&r.phase)).collect();
        let Some(event) = adversary.next_event(&enabled) else { break };
        if event.robot >= n {
            return Err(EngineError::EventRobotOutOfRange { event, n });
        }
        let me = event.robot;
        if enabled[me] != event.op {
            return Err(EngineError::NotEnabled { event, robot: me, expected: enabled[me] });
        }
        let mut decisions = Vec::new();
        match event.op {
            AsynchOp::Look => {
                let mut seen = Vec::with_capacity(n);
                for j in 0..n {
                    let pos = config.robots[j].position;
                    seen.push(match moving_nontrivially(&config, j) {
                        Some(d) => pos.lerp(d.destination, adversary.observe_fraction(me, j)),
                        None => pos,
                    });
                }
                let look = LookRecord {
                    view: config.support(),
                    p_snapshot: p_snapshot(&config, me, |j| seen[j]),
                    version: config.version,
                    settled: (0..n).all(|j| moving_nontrivially(&config, j).is_none()),
                };
                config.robots[me].phase = ActivityPhase::Looked(look);
            }
            AsynchOp::Compute => {
                let ActivityPhase::Looked(look) = config.robots[me].phase.clone() else { unreachable!() };
                let d = decide(protocol, p, &config, me, look.view, &look.p_snapshot)?;
                let robot = &mut config.robots[me];
                if robot.light.control != d.next_control || robot.light.sim != d.next_sim {
                    robot.light.control = d.next_control;
                    robot.light.sim = d.next_sim;
                    config.version += 1;
                }
                robot.phase = ActivityPhase::Computed(d);
                decisions.push(DecisionRecord { robot: me, exec_p: d.execute_p, from: d.from, to: d.next_control });
            }
            AsynchOp::MoveBegin => {
                let ActivityPhase::Computed(d) = config.robots[me].phase.clone() else { unreachable!() };
                if d.destination != config.robots[me].position {
                    config.version += 1;
                }
                config.robots[me].phase = ActivityPhase::Moving(d);
            }
            AsynchOp::MoveEnd => {
                let ActivityPhase::Moving(d) = config.robots[me].phase.clone() else { unreachable!() };
                if d.destination != config.robots[me].position {
                    config.robots[me].position = d.destination;
                    config.version += 1;
                }
                config.robots[me].phase = ActivityPhase::Idle;
            }
        }
        records.push(TraceRecord {
            step,
            kind: RecordKind::Event,
            actors: vec![me],
            op: event.op.name().into(),
            decisions,
            support: config.support(),
            version: config.version,
        });
        configs.push(config.clone());
    }
    Ok(Trace { protocol, scheduler: Scheduler::Asynch, initial: init.clone(), records, configs })
}

/// Robot ids that never perform an event in the trace.
pub fn starved_robots(trace: &Trace) -> Vec<usize> {
    let mut seen = RobotSet::EMPTY;
    for r in trace.records.iter().skip(1) {
        for &a in &r.actors {
            seen.insert(a);
        }
    }
    (0..trace.n()).filter(|&r| !seen.contains(r)).collect()
}

/// How stage and mega-cycle boundaries are recognised for a protocol kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegStyle {
    /// Stage boundaries at supports within {T,S,S'}; mega-cycles start at
    /// supports within {T,S'} and end at supports within {S,S'}.
    SupportSsynch,
    /// As above, with support {M} also closing both.
    SupportAsynch,
    /// Two-robot protocol: stage boundaries at cycle-start instants, a stage
    /// also closes when one of its executors runs P again, and a mega-cycle
    /// closes as soon as every robot has executed.
    CycleStart,
}

impl SegStyle {
    pub fn of(kind: ProtocolKind) -> SegStyle {
        match kind {
            ProtocolKind::SimRsS | ProtocolKind::SsSimRsS => SegStyle::SupportSsynch,
            ProtocolKind::SimRsA | ProtocolKind::SsSimRsA => SegStyle::SupportAsynch,
            ProtocolKind::Sim2RsA => SegStyle::CycleStart,
        }
    }

    fn stage_boundary(self, support: ColorView, cycle_start: bool) -> bool {
        let tss = ColorView::of(&[T, S, SPrime]);
        match self {
            SegStyle::SupportSsynch => support.is_subset(tss),
            SegStyle::SupportAsynch => support.is_subset(tss) || support == ColorView::of(&[M]),
            SegStyle::CycleStart => cycle_start,
        }
    }

    fn mega_start(self, support: ColorView, cycle_start: bool) -> bool {
        match self {
            SegStyle::CycleStart => cycle_start,
            _ => support.is_subset(ColorView::of(&[T, SPrime])),
        }
    }

    fn mega_end(self, support: ColorView) -> bool {
        match self {
            SegStyle::SupportSsynch => support.is_subset(ColorView::of(&[S, SPrime])),
            SegStyle::SupportAsynch => {
                support.is_subset(ColorView::of(&[S, SPrime])) || support == ColorView::of(&[M])
            }
            SegStyle::CycleStart => false,
        }
    }
}

/// How mega-cycles are delimited.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MegaRule {
    /// A mega-cycle closes at the first stage boundary where every robot has
    /// executed, and the next one opens right away.
    #[default]
    Covering,
    /// Mega-cycles open and close at the support conditions of the style.
    /// Executions between a close and the next open are flagged.
    Support,
}

impl fmt::Display for MegaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MegaRule::Covering => "covering",
            MegaRule::Support => "support",
        })
    }
}

impl FromStr for MegaRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "covering" => Ok(MegaRule::Covering),
            "support" => Ok(MegaRule::Support),
            _ => Err(format!("unknown mega-cycle rule {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegViolation {
    /// A closed stage broke the restricted-repetition condition.
    Rsynch(RsynchReason),
    /// A robot executed P twice within one mega-cycle.
    DoubleExecution(usize),
    /// A mega-cycle closed before every robot executed; the payload is the
    /// set of robots that did not.
    MegaIncomplete(RobotSet),
    /// P ran while no mega-cycle was open.
    ExecOutsideMegaCycle(usize),
    /// A fully synchronous mega-cycle followed a disjoint one.
    FsynchRecurred,
}

impl fmt::Display for SegViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegViolation::Rsynch(r) => write!(f, "rsynch:{r}"),
            SegViolation::DoubleExecution(r) => write!(f, "double-execution:{r}"),
            SegViolation::MegaIncomplete(s) => write!(f, "mega-incomplete:{s}"),
            SegViolation::ExecOutsideMegaCycle(r) => write!(f, "exec-outside-mega-cycle:{r}"),
            SegViolation::FsynchRecurred => write!(f, "fsynch-recurred"),
        }
    }
}

/// What one segmenter step closed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Closed {
    pub stage: Option<RobotSet>,
    /// Union of the closed mega-cycle's stages.
    pub mega: Option<RobotSet>,
}

/// Incremental stage / mega-cycle bookkeeping. Small and hashable so the
/// verifier can carry it inside explored states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segmenter {
    pub style: SegStyle,
    pub rule: MegaRule,
    pub full: RobotSet,
    pub stage: RobotSet,
    pub mega: RobotSet,
    pub mega_open: bool,
    /// The open mega-cycle already has more than one stage.
    pub mega_multi: bool,
    pub disjoint_seen: bool,
    pub rsynch: RsynchSummary,
    /// Ignore everything until the first mega-cycle start.
    pub syncing: bool,
}

impl Segmenter {
    /// Segmenter for a run that starts in a legal initial configuration.
    pub fn new(style: SegStyle, rule: MegaRule, n: usize, support: ColorView, cycle_start: bool) -> Segmenter {
        let mut s = Segmenter::syncing(style, rule, n);
        s.syncing = false;
        s.mega_open = s.covering() || style.mega_start(support, cycle_start);
        s
    }

    fn covering(&self) -> bool {
        self.rule == MegaRule::Covering || self.style == SegStyle::CycleStart
    }

    /// Segmenter that waits for a mega-cycle start before tracking anything.
    pub fn syncing(style: SegStyle, rule: MegaRule, n: usize) -> Segmenter {
        Segmenter {
            style,
            rule,
            full: RobotSet::full(n),
            stage: RobotSet::EMPTY,
            mega: RobotSet::EMPTY,
            mega_open: false,
            mega_multi: false,
            disjoint_seen: false,
            rsynch: RsynchSummary::default(),
            syncing: true,
        }
    }

    fn close_stage(&mut self, out: &mut Closed, viol: &mut Option<SegViolation>) {
        let e = self.stage;
        self.stage = RobotSet::EMPTY;
        if let Some(reason) = self.rsynch.push(e, self.full) {
            viol.get_or_insert(SegViolation::Rsynch(reason));
            // Keep going as if the set had been accepted.
            self.rsynch.last = e;
            self.rsynch.nonfull_seen |= e != self.full;
        }
        if !self.mega.is_empty() {
            self.mega_multi = true;
        }
        self.mega = self.mega.union(e);
        out.stage = Some(e);
        if self.covering() && self.mega == self.full {
            self.close_mega(out, viol);
        }
    }

    fn close_mega(&mut self, out: &mut Closed, viol: &mut Option<SegViolation>) {
        let union = self.mega;
        if union != self.full {
            viol.get_or_insert(SegViolation::MegaIncomplete(RobotSet(self.full.0 & !union.0)));
        }
        let fsynch = !self.mega_multi && union == self.full;
        if fsynch && self.disjoint_seen {
            viol.get_or_insert(SegViolation::FsynchRecurred);
        }
        if !fsynch {
            self.disjoint_seen = true;
        }
        self.mega = RobotSet::EMPTY;
        self.mega_multi = false;
        self.mega_open = self.covering();
        out.mega = Some(union);
    }

    /// Robot `robot` ran P.
    pub fn exec(&mut self, robot: usize) -> (Closed, Option<SegViolation>) {
        let mut out = Closed::default();
        let mut viol = None;
        if self.syncing {
            return (out, viol);
        }
        if self.style == SegStyle::CycleStart && self.stage.contains(robot) {
            self.close_stage(&mut out, &mut viol);
        }
        if !self.mega_open {
            viol.get_or_insert(SegViolation::ExecOutsideMegaCycle(robot));
        }
        if self.mega.contains(robot) || self.stage.contains(robot) {
            viol.get_or_insert(SegViolation::DoubleExecution(robot));
        }
        self.stage.insert(robot);
        (out, viol)
    }

    /// The configuration reached an instant with the given support;
    /// `cycle_start` tells whether it is a cycle-start instant.
    pub fn instant(&mut self, support: ColorView, cycle_start: bool) -> (Closed, Option<SegViolation>) {
        let mut out = Closed::default();
        let mut viol = None;
        if self.syncing {
            // Leftover operations from before could still change colors
            // unless every robot is at a cycle start.
            if cycle_start && self.style.mega_start(support, cycle_start) {
                *self = Segmenter::new(self.style, self.rule, self.full.len(), support, cycle_start);
            }
            return (out, viol);
        }
        if self.style.stage_boundary(support, cycle_start) && !self.stage.is_empty() {
            self.close_stage(&mut out, &mut viol);
        }
        if !self.covering() {
            if self.mega_open && self.style.mega_end(support) {
                self.close_mega(&mut out, &mut viol);
            }
            if !self.mega_open && self.style.mega_start(support, cycle_start) {
                self.mega_open = true;
            }
        }
        (out, viol)
    }
}

/// Replays trace records to recover per-robot phase information that the
/// records do not state directly.
#[derive(Debug, Clone)]
pub struct RecordReplayer {
    protocol: ControlProtocol,
    pub colors: Vec<ControlColor>,
    pub ops: Vec<Option<AsynchOp>>,
    pub look_view: Vec<ColorView>,
    pub look_version: Vec<u64>,
    pub look_settled: Vec<bool>,
    pub pending_exec: Vec<bool>,
    pub moving: Vec<bool>,
    /// Nothing has changed since the robot's pending Look.
    pub look_fresh: Vec<bool>,
    version: u64,
}

impl RecordReplayer {
    pub fn new(protocol: ControlProtocol, init: &TraceRecord) -> Result<RecordReplayer, EngineError> {
        if init.kind != RecordKind::Init {
            return Err(EngineError::MalformedTrace("first record must be the init record".into()));
        }
        let n = init.actors.len();
        let mut colors = vec![T; n];
        for d in &init.decisions {
            if d.robot >= n {
                return Err(EngineError::MalformedTrace(format!("init names robot {}", d.robot)));
            }
            colors[d.robot] = d.to;
        }
        Ok(RecordReplayer {
            protocol,
            colors,
            ops: vec![None; n],
            look_view: vec![ColorView::EMPTY; n],
            look_version: vec![0; n],
            look_settled: vec![true; n],
            pending_exec: vec![false; n],
            moving: vec![false; n],
            look_fresh: vec![false; n],
            version: init.version,
        })
    }

    pub fn n(&self) -> usize {
        self.colors.len()
    }

    pub fn apply(&mut self, rec: &TraceRecord) -> Result<(), EngineError> {
        let n = self.n();
        for d in &rec.decisions {
            if d.robot >= n {
                return Err(EngineError::MalformedTrace(format!("step {} names robot {}", rec.step, d.robot)));
            }
            self.colors[d.robot] = d.to;
        }
        if rec.kind == RecordKind::Event {
            let &[me] = rec.actors.as_slice() else {
                return Err(EngineError::MalformedTrace(format!("step {} needs exactly one actor", rec.step)));
            };
            if me >= n {
                return Err(EngineError::MalformedTrace(format!("step {} names robot {me}", rec.step)));
            }
            let op = AsynchOp::parse(&rec.op).map_err(|e| EngineError::MalformedTrace(e.to_string()))?;
            match op {
                AsynchOp::Look => {
                    self.look_view[me] = rec.support;
                    self.look_version[me] = rec.version;
                    self.look_settled[me] = !self.moving.iter().any(|&m| m);
                    // P moves count as moves even when they have zero length.
                    let exec_moving = (0..n).any(|j| j != me && self.pending_exec[j] && self.ops[j] == Some(AsynchOp::MoveBegin));
                    self.look_fresh[me] = !exec_moving;
                }
                AsynchOp::Compute => {
                    self.pending_exec[me] = rec.decisions.iter().any(|d| d.exec_p);
                    if rec.decisions.iter().any(|d| d.from != d.to) {
                        self.invalidate_looks(me);
                    }
                }
                AsynchOp::MoveBegin => {
                    self.moving[me] = rec.version > self.version;
                    if self.pending_exec[me] {
                        self.invalidate_looks(me);
                    }
                }
                AsynchOp::MoveEnd => {
                    if self.pending_exec[me] {
                        self.invalidate_looks(me);
                    }
                    self.moving[me] = false;
                    self.pending_exec[me] = false;
                }
            }
            self.ops[me] = Some(op);
        }
        self.version = rec.version;
        Ok(())
    }

    fn invalidate_looks(&mut self, me: usize) {
        for (j, f) in self.look_fresh.iter_mut().enumerate() {
            if j != me {
                *f = false;
            }
        }
    }

    /// True when every robot's next operation is a Look, up to pending
    /// operations that change neither color nor position and Looks whose
    /// snapshot is still current.
    pub fn is_cycle_start(&self) -> bool {
        (0..self.n()).all(|r| match self.ops[r] {
            None | Some(AsynchOp::MoveEnd) => true,
            Some(AsynchOp::Look) if self.look_fresh[r] => true,
            Some(AsynchOp::Look) => self
                .protocol
                .step(self.colors[r], self.look_view[r])
                .map(|s| s.is_null(self.colors[r]))
                .unwrap_or(false),
            Some(AsynchOp::Compute) | Some(AsynchOp::MoveBegin) => !self.pending_exec[r],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    /// Record index where the stage opened.
    pub start: usize,
    /// Record index where it closed.
    pub end: usize,
    pub executors: RobotSet,
    /// Record indices of the executions, in order.
    pub exec_records: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MegaCycle {
    pub start: usize,
    pub end: usize,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MegaCycleDecomposition {
    pub mega_cycles: Vec<MegaCycle>,
    /// Stages closed inside the final, unfinished mega-cycle.
    pub open_stages: Vec<Stage>,
    /// Problems found while segmenting, with the record index.
    pub violations: Vec<(usize, SegViolation)>,
}

impl MegaCycleDecomposition {
    pub fn stages(&self) -> impl Iterator<Item = &Stage> {
        self.mega_cycles.iter().flat_map(|m| m.stages.iter()).chain(self.open_stages.iter())
    }
}

/// Segments a trace produced for `kind` with the covering mega-cycle rule.
pub fn segment_trace(trace: &Trace, kind: ProtocolKind) -> MegaCycleDecomposition {
    segment_trace_with(trace, kind, MegaRule::Covering)
}

pub fn segment_trace_with(trace: &Trace, kind: ProtocolKind, rule: MegaRule) -> MegaCycleDecomposition {
    let protocol = if trace.protocol.kind == kind { trace.protocol } else { kind.into() };
    segment_records_with(&trace.records, protocol, false, rule).unwrap_or_default()
}

/// Segments raw records, e.g. ones read back from a trace file.
pub fn segment_records(
    records: &[TraceRecord],
    protocol: ControlProtocol,
) -> Result<MegaCycleDecomposition, EngineError> {
    segment_records_with(records, protocol, false, MegaRule::Covering)
}

/// Like [`segment_records`]; with `syncing` set, nothing is tracked before
/// the first mega-cycle start, as for runs from arbitrary colorings.
pub fn segment_records_from(
    records: &[TraceRecord],
    protocol: ControlProtocol,
    syncing: bool,
) -> Result<MegaCycleDecomposition, EngineError> {
    segment_records_with(records, protocol, syncing, MegaRule::Covering)
}

pub fn segment_records_with(
    records: &[TraceRecord],
    protocol: ControlProtocol,
    syncing: bool,
    rule: MegaRule,
) -> Result<MegaCycleDecomposition, EngineError> {
    let Some(first) = records.first() else { return Ok(MegaCycleDecomposition::default()) };
    let mut replay = RecordReplayer::new(protocol, first)?;
    let n = replay.n();
    let style = SegStyle::of(protocol.kind);
    let mut seg = if syncing {
        let mut s = Segmenter::syncing(style, rule, n);
        s.instant(first.support, true);
        s
    } else {
        Segmenter::new(style, rule, n, first.support, true)
    };
    let mut out = MegaCycleDecomposition::default();
    let mut stages: Vec<Stage> = Vec::new();
    let mut stage_start = 0usize;
    let mut stage_execs: Vec<usize> = Vec::new();
    let mut mega_start = 0usize;

    let absorb = |i: usize,
                      closed: Closed,
                      viol: Option<SegViolation>,
                      stages: &mut Vec<Stage>,
                      stage_start: &mut usize,
                      stage_execs: &mut Vec<usize>,
                      mega_start: &mut usize,
                      out: &mut MegaCycleDecomposition| {
        if let Some(v) = viol {
            out.violations.push((i, v));
        }
        if let Some(e) = closed.stage {
            let split_execs = std::mem::take(stage_execs);
            stages.push(Stage { start: *stage_start, end: i, executors: e, exec_records: split_execs });
            *stage_start = i;
        }
        if closed.mega.is_some() {
            out.mega_cycles.push(MegaCycle { start: *mega_start, end: i, stages: std::mem::take(stages) });
            *mega_start = i;
        }
    };

    for (i, rec) in records.iter().enumerate().skip(1) {
        replay.apply(rec)?;
        for d in rec.decisions.iter().filter(|d| d.exec_p) {
            let (closed, viol) = seg.exec(d.robot);
            absorb(i, closed, viol, &mut stages, &mut stage_start, &mut stage_execs, &mut mega_start, &mut out);
            stage_execs.push(i);
        }
        let was_open = seg.mega_open;
        let (closed, viol) = seg.instant(rec.support, replay.is_cycle_start());
        absorb(i, closed, viol, &mut stages, &mut stage_start, &mut stage_execs, &mut mega_start, &mut out);
        if !was_open && seg.mega_open {
            mega_start = i;
        }
        if seg.stage.is_empty() && closed.stage.is_none() && style.stage_boundary(rec.support, replay.is_cycle_start()) {
            stage_start = i;
        }
    }
    out.open_stages = stages;
    Ok(out)
}

/// Concatenation of all stage executor sets, in order.
pub fn induced_sequence(decomp: &MegaCycleDecomposition) -> ActivationSequence {
    ActivationSequence::finite(decomp.stages().map(|s| s.executors).collect())
}

/// One flag per stage of `decomp`, in the order of `decomp.stages()`: true
/// when all executors looked at the same configuration version and no robot
/// was in the middle of a nontrivial move at any of those Looks.
pub fn stage_snapshot_consistency(trace: &Trace, decomp: &MegaCycleDecomposition) -> Vec<bool> {
    if trace.scheduler == Scheduler::Ssynch {
        return decomp.stages().map(|_| true).collect();
    }
    let Ok(mut replay) = RecordReplayer::new(trace.protocol, &trace.records[0]) else {
        return decomp.stages().map(|_| false).collect();
    };
    // Look version and settledness in force at each Compute record.
    let mut at_compute = std::collections::HashMap::new();
    for (i, rec) in trace.records.iter().enumerate().skip(1) {
        if replay.apply(rec).is_err() {
            return decomp.stages().map(|_| false).collect();
        }
        if rec.op == AsynchOp::Compute.name() {
            let me = rec.actors[0];
            at_compute.insert(i, (replay.look_version[me], replay.look_settled[me]));
        }
    }
    decomp
        .stages()
        .map(|s| {
            let looks: Vec<(u64, bool)> =
                s.exec_records.iter().map(|i| at_compute.get(i).copied().unwrap_or((u64::MAX, false))).collect();
            looks.iter().all(|&(v, settled)| settled && v == looks[0].0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_p;
    use crate::schedulers::ScriptedAdversary;

    fn rs(ids: &[usize]) -> RobotSet {
        RobotSet::from_ids(ids.iter().copied())
    }

    #[test]
    fn ssynch_full_round_executes_both() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let sched = ActivationSequence::finite(vec![rs(&[0, 1])]);
        let tr = run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &init, &sched, 1).unwrap();
        assert_eq!(tr.final_config().controls(), vec![M, M]);
        assert_eq!(tr.executions(), vec![(1, 0), (1, 1)]);
    }

    #[test]
    fn ssynch_single_robot_round() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let sched = ActivationSequence::finite(vec![rs(&[0])]);
        let tr = run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &init, &sched, 1).unwrap();
        assert_eq!(tr.final_config().controls(), vec![M, T]);
        assert_eq!(tr.executions(), vec![(1, 0)]);
    }

    #[test]
    fn sim2_fully_synchronous_loop() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let sched = ActivationSequence::finite(vec![rs(&[0, 1]); 3]);
        let tr = run_ssynch(ProtocolKind::Sim2RsA, p.as_ref(), &init, &sched, 3).unwrap();
        let seen: Vec<Vec<ControlColor>> = tr.configs[1..].iter().map(|c| c.controls()).collect();
        assert_eq!(seen, vec![vec![M, M], vec![S, S], vec![T, T]]);
    }

    #[test]
    fn ssynch_errors() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let sched = ActivationSequence::finite(vec![rs(&[0])]);
        assert!(matches!(
            run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &init, &sched, 2),
            Err(EngineError::ScheduleTooShort { needed: 2, available: 1 })
        ));
        let bad = Configuration::from_controls(&[T, ControlColor::W]).unwrap();
        assert!(matches!(
            run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &bad, &sched, 1),
            Err(EngineError::ColorMismatch { robot: 1, .. })
        ));
    }

    #[test]
    fn asynch_observer_after_compute_sees_m() {
        use AsynchOp::*;
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let events = vec![
            AsynchEvent::new(0, Look),
            AsynchEvent::new(0, Compute),
            AsynchEvent::new(1, Look),
            AsynchEvent::new(1, Compute),
        ];
        let mut adv = ScriptedAdversary::new(events);
        let tr = run_asynch(ProtocolKind::Sim2RsA, p.as_ref(), &init, &mut adv, 10).unwrap();
        assert_eq!(tr.executions(), vec![(2, 0)]);
        assert_eq!(tr.final_config().controls(), vec![M, T]);
    }

    #[test]
    fn asynch_rejects_disabled_event() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let mut adv = ScriptedAdversary::new(vec![AsynchEvent::new(0, AsynchOp::Compute)]);
        assert!(matches!(
            run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut adv, 10),
            Err(EngineError::NotEnabled { .. })
        ));
    }

    #[test]
    fn jsonl_round_trip_and_field_order() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let sched = ActivationSequence::finite(vec![rs(&[0])]);
        let tr = run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &init, &sched, 1).unwrap();
        let text = tr.to_jsonl();
        let second = text.lines().nth(1).unwrap();
        assert_eq!(
            second,
            r#"{"step":1,"kind":"round","actors":[0],"op":"cycle","decisions":[{"robot":0,"exec_p":true,"from":"T","to":"M"}],"support":"T,M","version":1}"#
        );
        assert_eq!(records_from_jsonl(&text).unwrap(), tr.records);
    }

    #[test]
    fn segmenting_alternating_schedule() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let pattern = [rs(&[0]), rs(&[0]), rs(&[1]), rs(&[1]), rs(&[0]), rs(&[1])];
        let sched = ActivationSequence::lasso(vec![], pattern.to_vec());
        let tr = run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &init, &sched, 60).unwrap();
        let d = segment_trace(&tr, ProtocolKind::SimRsS);
        assert!(d.violations.is_empty(), "{:?}", d.violations);
        assert!(d.mega_cycles.len() >= 3);
        for m in &d.mega_cycles {
            assert_eq!(m.stages.len(), 2);
            assert!(m.stages.iter().all(|s| s.executors.len() == 1));
        }
    }

    #[test]
    fn segmenting_full_rounds() {
        let p = builtin_p("stay").unwrap();
        let init = Configuration::from_controls(&[T, T]).unwrap();
        let sched = ActivationSequence::lasso(vec![], vec![rs(&[0, 1])]);
        let tr = run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &init, &sched, 9).unwrap();
        let d = segment_trace(&tr, ProtocolKind::SimRsS);
        assert_eq!(d.mega_cycles.len(), 3);
        assert!(d.mega_cycles.iter().all(|m| m.stages.len() == 1 && m.stages[0].executors == rs(&[0, 1])));
        let seq = induced_sequence(&d);
        assert_eq!(seq.prefix, vec![rs(&[0, 1]); 3]);
    }

    #[test]
    fn induced_sequence_of_empty_decomposition() {
        assert!(induced_sequence(&MegaCycleDecomposition::default()).prefix.is_empty());
    }
}
