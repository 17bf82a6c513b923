use crate::engine::Scheduler;
use crate::model::{ColorView, ControlColor, RobotSet};
use crate::protocols::ProtocolKind;
use crate::schedulers::{AsynchEvent, AsynchOp};

use super::{explore, Budget, Choice, ControlRule, Semantics, StateGraph, Transition, VerifierError};

const BITS: usize = 14;
const MASK: u64 = (1 << BITS) - 1;

/// Abstract LCM phase of one robot. Positions are dropped; a Looked robot
/// keeps its color view, whether some robot was mid-move when it looked, and
/// whether nothing has changed since.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Idle,
    Looked { view: ColorView, stale: bool, fresh: bool },
    Computed { exec: bool },
    Moving { exec: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RobotAbstract {
    pub color: ControlColor,
    pub phase: Phase,
}

impl RobotAbstract {
    pub fn idle(color: ControlColor) -> Self {
        RobotAbstract { color, phase: Phase::Idle }
    }

    // Layout: color (3 bits) | phase (2) | flag (1) | view (7) | fresh (1).
    fn pack(self) -> u64 {
        let (tag, flag, view, fresh) = match self.phase {
            Phase::Idle => (0, false, 0, false),
            Phase::Looked { view, stale, fresh } => (1, stale, view.0, fresh),
            Phase::Computed { exec } => (2, exec, 0, false),
            Phase::Moving { exec } => (3, exec, 0, false),
        };
        self.color.index() as u64 | tag << 3 | u64::from(flag) << 5 | u64::from(view) << 6 | u64::from(fresh) << 13
    }

    fn unpack(bits: u64) -> Self {
        let color = ControlColor::from_index((bits & 0b111) as usize).expect("packed color");
        let flag = bits >> 5 & 1 == 1;
        let phase = match bits >> 3 & 0b11 {
            0 => Phase::Idle,
            1 => Phase::Looked { view: ColorView((bits >> 6) as u8 & 0x7f), stale: flag, fresh: bits >> 13 & 1 == 1 },
            2 => Phase::Computed { exec: flag },
            _ => Phase::Moving { exec: flag },
        };
        RobotAbstract { color, phase }
    }
}

/// ASYNCH events over packed per-robot abstract states.
pub struct AsynchSemantics<'a> {
    pub rule: &'a dyn ControlRule,
    pub n: usize,
}

impl<'a> AsynchSemantics<'a> {
    pub fn new(rule: &'a dyn ControlRule, n: usize) -> Self {
        AsynchSemantics { rule, n }
    }

    pub fn pack(robots: &[RobotAbstract]) -> u64 {
        robots.iter().enumerate().fold(0, |acc, (i, r)| acc | r.pack() << (BITS * i))
    }

    pub fn unpack(&self, s: u64) -> Vec<RobotAbstract> {
        (0..self.n).map(|i| RobotAbstract::unpack(s >> (BITS * i) & MASK)).collect()
    }
}

impl Semantics for AsynchSemantics<'_> {
    fn n(&self) -> usize {
        self.n
    }

    fn kind(&self) -> ProtocolKind {
        self.rule.kind()
    }

    fn scheduler(&self) -> Scheduler {
        Scheduler::Asynch
    }

    fn successors(&self, s: u64, out: &mut Vec<Transition>) -> Result<(), VerifierError> {
        let robots = self.unpack(s);
        let support = self.support(s);
        for (me, r) in robots.iter().enumerate() {
            let mut next = robots.clone();
            let mut execs = RobotSet::EMPTY;
            let op = match r.phase {
                Phase::Idle => {
                    let stale = robots
                        .iter()
                        .enumerate()
                        .any(|(j, o)| j != me && matches!(o.phase, Phase::Moving { exec: true }));
                    next[me].phase = Phase::Looked { view: support, stale, fresh: !stale };
                    AsynchOp::Look
                }
                Phase::Looked { view, .. } => {
                    let st = self.rule.step(r.color, view)?;
                    next[me] = RobotAbstract { color: st.next, phase: Phase::Computed { exec: st.execute_p } };
                    if st.execute_p {
                        execs.insert(me);
                    }
                    if st.next != r.color {
                        invalidate_looks(&mut next, me);
                    }
                    AsynchOp::Compute
                }
                Phase::Computed { exec } => {
                    next[me].phase = Phase::Moving { exec };
                    if exec {
                        invalidate_looks(&mut next, me);
                    }
                    AsynchOp::MoveBegin
                }
                Phase::Moving { exec } => {
                    next[me].phase = Phase::Idle;
                    if exec {
                        invalidate_looks(&mut next, me);
                    }
                    AsynchOp::MoveEnd
                }
            };
            out.push(Transition {
                choice: Choice::Event(AsynchEvent::new(me, op)),
                actors: RobotSet::single(me),
                execs,
                to: Self::pack(&next),
            });
        }
        Ok(())
    }

    fn colors(&self, s: u64) -> Vec<ControlColor> {
        self.unpack(s).iter().map(|r| r.color).collect()
    }

    fn cycle_start(&self, s: u64) -> bool {
        self.unpack(s).iter().all(|r| match r.phase {
            Phase::Idle => true,
            // A Look whose snapshot is still current may be taken as made
            // right after this instant.
            Phase::Looked { fresh: true, .. } => true,
            Phase::Looked { view, .. } => self.rule.step(r.color, view).map(|st| st.is_null(r.color)).unwrap_or(false),
            Phase::Computed { exec } | Phase::Moving { exec } => !exec,
        })
    }

    fn describe(&self, s: u64) -> String {
        let parts: Vec<String> = self
            .unpack(s)
            .iter()
            .map(|r| match r.phase {
                Phase::Idle => r.color.name().to_string(),
                Phase::Looked { view, stale, fresh } => {
                    format!("{}:L{}{}{}", r.color.name(), view, if stale { "~" } else { "" }, if fresh { "" } else { "'" })
                }
                Phase::Computed { exec } => format!("{}:C{}", r.color.name(), if exec { "+" } else { "" }),
                Phase::Moving { exec } => format!("{}:M{}", r.color.name(), if exec { "+" } else { "" }),
            })
            .collect();
        format!("({})", parts.join(","))
    }
}

/// A color change or a move by robot `me` makes every other pending Look out
/// of date.
fn invalidate_looks(robots: &mut [RobotAbstract], me: usize) {
    for (j, r) in robots.iter_mut().enumerate() {
        if let Phase::Looked { fresh, .. } = &mut r.phase {
            if j != me {
                *fresh = false;
            }
        }
    }
}

/// Explores every enabled-event interleaving from each start coloring, all
/// robots initially Idle.
pub fn explore_asynch(
    rule: &dyn ControlRule,
    n: usize,
    starts: &[Vec<ControlColor>],
    budget: &Budget,
) -> Result<StateGraph, VerifierError> {
    budget.check_n(n, Scheduler::Asynch)?;
    let kind = rule.kind();
    if let Some(fixed) = kind.fixed_n() {
        if n != fixed {
            return Err(VerifierError::Unsupported { kind, why: "fixed team size" });
        }
    }
    let mut packed = Vec::with_capacity(starts.len());
    for s in starts {
        if s.len() != n {
            return Err(VerifierError::StartSize { expected: n, got: s.len() });
        }
        for &c in s {
            kind.check_color(c)?;
        }
        let robots: Vec<RobotAbstract> = s.iter().map(|&c| RobotAbstract::idle(c)).collect();
        packed.push(AsynchSemantics::pack(&robots));
    }
    explore(&AsynchSemantics::new(rule, n), &packed, budget)
}
