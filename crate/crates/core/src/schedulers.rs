//! Activation sequences, the restricted-repetition predicate, and the
//! SSYNCH / ASYNCH adversaries used by the engine.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::RobotSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("activation set {set} at position {index} names a robot outside [0, {n})")]
    RobotOutOfRange { index: usize, set: RobotSet, n: usize },
    #[error("unknown asynchronous operation `{0}`")]
    UnknownOp(String),
}

/// `⟨e_1, e_2, …⟩`, either finite (`cycle` empty) or a lasso repeating
/// `cycle` forever after `prefix`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivationSequence {
    pub prefix: Vec<RobotSet>,
    pub cycle: Vec<RobotSet>,
}

impl ActivationSequence {
    pub fn finite(rounds: Vec<RobotSet>) -> Self {
        ActivationSequence { prefix: rounds, cycle: Vec::new() }
    }

    pub fn lasso(prefix: Vec<RobotSet>, cycle: Vec<RobotSet>) -> Self {
        ActivationSequence { prefix, cycle }
    }

    pub fn is_lasso(&self) -> bool {
        !self.cycle.is_empty()
    }

    /// Round `i` (0-based) of the unrolled sequence, if it exists.
    pub fn get(&self, i: usize) -> Option<RobotSet> {
        if i < self.prefix.len() {
            Some(self.prefix[i])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(i - self.prefix.len()) % self.cycle.len()])
        }
    }

    /// Number of rounds available; `None` for an infinite lasso.
    pub fn finite_len(&self) -> Option<usize> {
        if self.cycle.is_empty() {
            Some(self.prefix.len())
        } else {
            None
        }
    }

    /// The first `len` rounds (fewer if the sequence is finite and shorter).
    pub fn unroll(&self, len: usize) -> Vec<RobotSet> {
        (0..len).map_while(|i| self.get(i)).collect()
    }
}

impl fmt::Display for ActivationSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[RobotSet]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
        write!(f, "⟨{}⟩", join(&self.prefix))?;
        if !self.cycle.is_empty() {
            write!(f, "(⟨{}⟩)^ω", join(&self.cycle))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RsynchReason {
    EmptySet,
    FullSetAfterPrefix,
    OverlapConsecutive,
}

impl fmt::Display for RsynchReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RsynchReason::EmptySet => "EmptySet",
            RsynchReason::FullSetAfterPrefix => "FullSetAfterPrefix",
            RsynchReason::OverlapConsecutive => "OverlapConsecutive",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RsynchViolation {
    /// 1-based position in the unrolled sequence. For an overlap this is the
    /// first set of the overlapping pair.
    pub index: usize,
    pub reason: RsynchReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RsynchVerdict {
    pub valid: bool,
    pub violation: Option<RsynchViolation>,
}

impl RsynchVerdict {
    fn from(violation: Option<RsynchViolation>) -> Self {
        RsynchVerdict { valid: violation.is_none(), violation }
    }
}

/// Online form of the restricted-repetition predicate. The state is whether
/// a non-full set has been seen and the last set pushed, which is all the
/// predicate ever needs to look back at.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RsynchSummary {
    pub nonfull_seen: bool,
    pub last: RobotSet,
}

impl RsynchSummary {
    pub fn push(&mut self, e: RobotSet, full: RobotSet) -> Option<RsynchReason> {
        if e.is_empty() {
            return Some(RsynchReason::EmptySet);
        }
        if e == full {
            if self.nonfull_seen {
                return Some(RsynchReason::FullSetAfterPrefix);
            }
        } else {
            if self.nonfull_seen && self.last.intersects(e) {
                return Some(RsynchReason::OverlapConsecutive);
            }
            self.nonfull_seen = true;
        }
        self.last = e;
        None
    }
}

fn check_range(sets: &[RobotSet], offset: usize, n: usize) -> Result<(), SchedulerError> {
    let full = RobotSet::full(n);
    for (i, &s) in sets.iter().enumerate() {
        if !s.is_subset(full) {
            return Err(SchedulerError::RobotOutOfRange { index: offset + i + 1, set: s, n });
        }
    }
    Ok(())
}

/// Decides the restricted-repetition condition. A finite sequence is valid
/// when no violation has occurred yet; a lasso is judged on its infinite
/// unrolling, so both the prefix/cycle junction and the cycle wrap-around
/// are checked.
pub fn validate_rsynch(seq: &ActivationSequence, n: usize) -> Result<RsynchVerdict, SchedulerError> {
    check_range(&seq.prefix, 0, n)?;
    check_range(&seq.cycle, seq.prefix.len(), n)?;
    let full = RobotSet::full(n);
    // Two passes over the cycle expose every adjacent pair, including the
    // wrap-around, and any full set that follows a non-full one.
    let len = seq.prefix.len() + 2 * seq.cycle.len();
    let mut summary = RsynchSummary::default();
    for i in 0..len {
        let e = seq.get(i).expect("index within unrolled length");
        if let Some(reason) = summary.push(e, full) {
            let index = match reason {
                RsynchReason::OverlapConsecutive => i,
                _ => i + 1,
            };
            return Ok(RsynchVerdict::from(Some(RsynchViolation { index, reason })));
        }
    }
    Ok(RsynchVerdict::from(None))
}

/// True iff every robot is activated somewhere in the repeating part.
pub fn is_fair_lasso(_prefix: &ActivationSequence, cycle: &ActivationSequence, n: usize) -> bool {
    let mut sets = cycle.prefix.iter().chain(&cycle.cycle).peekable();
    if sets.peek().is_none() {
        return false;
    }
    let seen = sets.fold(RobotSet::EMPTY, |a, &s| a.union(s));
    RobotSet::full(n).is_subset(seen)
}

/// All `2^n − 1` nonempty robot sets, ordered by bit mask.
pub fn ssynch_choices(n: usize) -> Vec<RobotSet> {
    (1..=RobotSet::full(n).0).map(RobotSet).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AsynchOp {
    Look,
    Compute,
    MoveBegin,
    MoveEnd,
}

impl AsynchOp {
    pub fn name(self) -> &'static str {
        match self {
            AsynchOp::Look => "look",
            AsynchOp::Compute => "compute",
            AsynchOp::MoveBegin => "move-begin",
            AsynchOp::MoveEnd => "move-end",
        }
    }

    pub fn parse(s: &str) -> Result<AsynchOp, SchedulerError> {
        match s {
            "look" | "L" => Ok(AsynchOp::Look),
            "compute" | "C" => Ok(AsynchOp::Compute),
            "move-begin" | "MB" => Ok(AsynchOp::MoveBegin),
            "move-end" | "ME" => Ok(AsynchOp::MoveEnd),
            other => Err(SchedulerError::UnknownOp(other.to_string())),
        }
    }

    /// The op that follows this one in a robot's cycle.
    pub fn next(self) -> AsynchOp {
        match self {
            AsynchOp::Look => AsynchOp::Compute,
            AsynchOp::Compute => AsynchOp::MoveBegin,
            AsynchOp::MoveBegin => AsynchOp::MoveEnd,
            AsynchOp::MoveEnd => AsynchOp::Look,
        }
    }
}

impl fmt::Display for AsynchOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AsynchEvent {
    pub robot: usize,
    pub op: AsynchOp,
}

impl AsynchEvent {
    pub fn new(robot: usize, op: AsynchOp) -> Self {
        AsynchEvent { robot, op }
    }

    /// Parses `robot.op`, e.g. `0.look` or `1.C`.
    pub fn parse(s: &str) -> Result<AsynchEvent, SchedulerError> {
        let (r, op) = s
            .trim()
            .split_once('.')
            .ok_or_else(|| SchedulerError::UnknownOp(s.to_string()))?;
        let robot = r.parse().map_err(|_| SchedulerError::UnknownOp(s.to_string()))?;
        Ok(AsynchEvent { robot, op: AsynchOp::parse(op)? })
    }
}

impl fmt::Display for AsynchEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.robot, self.op)
    }
}

/// Chooses the next event of an asynchronous run. `enabled[r]` is the op
/// robot `r` would perform next.
pub trait AsynchAdversary {
    fn next_event(&mut self, enabled: &[AsynchOp]) -> Option<AsynchEvent>;

    /// Where on its segment a moving robot appears to `observer`: 0 is the
    /// origin, 1 the destination.
    fn observe_fraction(&mut self, _observer: usize, _moving: usize) -> f64 {
        0.0
    }
}

/// Replays a fixed list of events.
#[derive(Debug, Clone)]
pub struct ScriptedAdversary {
    events: Vec<AsynchEvent>,
    pos: usize,
}

impl ScriptedAdversary {
    pub fn new(events: Vec<AsynchEvent>) -> Self {
        ScriptedAdversary { events, pos: 0 }
    }
}

impl AsynchAdversary for ScriptedAdversary {
    fn next_event(&mut self, _enabled: &[AsynchOp]) -> Option<AsynchEvent> {
        let e = self.events.get(self.pos).copied();
        self.pos += 1;
        e
    }
}

/// Serializes whole cycles: each chosen robot runs Look, Compute, MoveBegin
/// and MoveEnd back to back, robots taken in the given order, repeating.
#[derive(Debug, Clone)]
pub struct SerialAdversary {
    order: Vec<usize>,
    step: usize,
}

impl SerialAdversary {
    pub fn new(order: Vec<usize>) -> Self {
        SerialAdversary { order, step: 0 }
    }
}

impl AsynchAdversary for SerialAdversary {
    fn next_event(&mut self, enabled: &[AsynchOp]) -> Option<AsynchEvent> {
        if self.order.is_empty() {
            return None;
        }
        let robot = self.order[(self.step / 4) % self.order.len()];
        self.step += 1;
        Some(AsynchEvent::new(robot, *enabled.get(robot)?))
    }
}

/// Seeded random interleaving. Any robot idle for `window` events is forced
/// next, so every run is fair by construction.
#[derive(Debug, Clone)]
pub struct RandomAsynchAdversary {
    rng: ChaCha8Rng,
    window: usize,
    since: Vec<usize>,
}

impl RandomAsynchAdversary {
    /// Uses the default fairness window of `4n` events.
    pub fn new(n: usize, seed: u64) -> Self {
        Self::with_window(n, seed, 4 * n)
    }

    pub fn with_window(n: usize, seed: u64, window: usize) -> Self {
        RandomAsynchAdversary { rng: ChaCha8Rng::seed_from_u64(seed), window: window.max(1), since: vec![0; n] }
    }
}

impl AsynchAdversary for RandomAsynchAdversary {
    fn next_event(&mut self, enabled: &[AsynchOp]) -> Option<AsynchEvent> {
        let n = enabled.len();
        let forced = (0..n).filter(|&r| self.since[r] + n >= self.window).max_by_key(|&r| self.since[r]);
        let robot = forced.unwrap_or_else(|| self.rng.gen_range(0..n));
        for (r, s) in self.since.iter_mut().enumerate() {
            *s = if r == robot { 0 } else { *s + 1 };
        }
        Some(AsynchEvent::new(robot, enabled[robot]))
    }

    fn observe_fraction(&mut self, _observer: usize, _moving: usize) -> f64 {
        self.rng.gen_range(0.0..=1.0)
    }
}

/// Seeded random SSYNCH schedule of `rounds` nonempty sets. Robots left out
/// for `window` consecutive rounds are added to the next set.
pub fn random_ssynch_schedule(n: usize, seed: u64, rounds: usize, window: usize) -> ActivationSequence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = RobotSet::full(n).0;
    let mut since = vec![0usize; n];
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let mut set = RobotSet(rng.gen_range(1..=full));
        for (r, s) in since.iter().enumerate() {
            if s + 1 >= window.max(1) {
                set.insert(r);
            }
        }
        for (r, s) in since.iter_mut().enumerate() {
            *s = if set.contains(r) { 0 } else { *s + 1 };
        }
        out.push(set);
    }
    ActivationSequence::finite(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(ids: &[usize]) -> RobotSet {
        RobotSet::from_ids(ids.iter().copied())
    }

    fn finite(sets: &[&[usize]]) -> ActivationSequence {
        ActivationSequence::finite(sets.iter().map(|x| s(x)).collect())
    }

    #[test]
    fn validate_examples() {
        let all_r = ActivationSequence::lasso(vec![], vec![s(&[0, 1])]);
        assert!(validate_rsynch(&all_r, 2).unwrap().valid);

        let alt = ActivationSequence::lasso(vec![s(&[0, 1]), s(&[0]), s(&[1])], vec![s(&[0]), s(&[1])]);
        assert!(validate_rsynch(&alt, 2).unwrap().valid);

        let v = validate_rsynch(&finite(&[&[0], &[0]]), 2).unwrap();
        assert_eq!(v.violation, Some(RsynchViolation { index: 1, reason: RsynchReason::OverlapConsecutive }));

        let v = validate_rsynch(&finite(&[&[0, 1], &[1, 2]]), 3).unwrap();
        assert_eq!(v.violation.unwrap().reason, RsynchReason::OverlapConsecutive);

        let v = validate_rsynch(&finite(&[&[0], &[0, 1]]), 2).unwrap();
        assert_eq!(v.violation, Some(RsynchViolation { index: 2, reason: RsynchReason::FullSetAfterPrefix }));
    }

    #[test]
    fn lasso_wrap_around_is_checked() {
        let seq = ActivationSequence::lasso(vec![s(&[1])], vec![s(&[0]), s(&[1]), s(&[0])]);
        let v = validate_rsynch(&seq, 2).unwrap();
        assert_eq!(v.violation, Some(RsynchViolation { index: 4, reason: RsynchReason::OverlapConsecutive }));
        let junction = ActivationSequence::lasso(vec![s(&[0])], vec![s(&[0]), s(&[1])]);
        assert_eq!(validate_rsynch(&junction, 2).unwrap().violation.unwrap().index, 1);
    }

    #[test]
    fn empty_and_out_of_range() {
        let v = validate_rsynch(&finite(&[&[0], &[]]), 2).unwrap();
        assert_eq!(v.violation.unwrap().reason, RsynchReason::EmptySet);
        assert!(matches!(
            validate_rsynch(&finite(&[&[0], &[2]]), 2),
            Err(SchedulerError::RobotOutOfRange { index: 2, .. })
        ));
    }

    #[test]
    fn fair_lasso_examples() {
        let none = ActivationSequence::default();
        assert!(is_fair_lasso(&none, &ActivationSequence::finite(vec![s(&[0]), s(&[1])]), 2));
        assert!(!is_fair_lasso(&none, &ActivationSequence::finite(vec![s(&[0])]), 2));
        assert!(is_fair_lasso(&none, &ActivationSequence::finite(vec![s(&[0, 1]), s(&[2])]), 3));
    }

    #[test]
    fn choices_in_canonical_order() {
        assert_eq!(ssynch_choices(1), vec![s(&[0])]);
        assert_eq!(ssynch_choices(2), vec![s(&[0]), s(&[1]), s(&[0, 1])]);
        assert_eq!(ssynch_choices(3).len(), 7);
    }

    #[test]
    fn random_adversary_is_fair_within_window() {
        let n = 3;
        let mut adv = RandomAsynchAdversary::new(n, 11);
        let mut last = vec![0usize; n];
        let enabled = vec![AsynchOp::Look; n];
        for step in 1..=2000 {
            let e = adv.next_event(&enabled).unwrap();
            last[e.robot] = step;
            for &l in &last {
                assert!(step - l < 4 * n, "robot starved past the window");
            }
        }
    }

    #[test]
    fn random_ssynch_schedule_is_deterministic_and_fair() {
        let a = random_ssynch_schedule(3, 7, 200, 12);
        assert_eq!(a, random_ssynch_schedule(3, 7, 200, 12));
        for w in a.prefix.windows(12) {
            assert_eq!(w.iter().fold(RobotSet::EMPTY, |x, &y| x.union(y)), RobotSet::full(3));
        }
    }

    #[test]
    fn event_parsing() {
        assert_eq!(AsynchEvent::parse("1.look").unwrap(), AsynchEvent::new(1, AsynchOp::Look));
        assert_eq!(AsynchEvent::parse("0.ME").unwrap(), AsynchEvent::new(0, AsynchOp::MoveEnd));
        assert!(AsynchEvent::parse("0.jump").is_err());
    }
}
