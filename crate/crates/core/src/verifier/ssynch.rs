use crate::engine::Scheduler;
use crate::model::{ColorView, ControlColor, RobotSet};
use crate::protocols::ProtocolKind;
use crate::schedulers::ssynch_choices;

use super::{explore, Budget, Choice, ControlRule, Semantics, StateGraph, Transition, VerifierError};

const BITS: usize = 3;

/// SSYNCH rounds over per-robot color vectors, 3 bits per robot.
pub struct SsynchSemantics<'a> {
    pub rule: &'a dyn ControlRule,
    pub n: usize,
    choices: Vec<RobotSet>,
}

impl<'a> SsynchSemantics<'a> {
    pub fn new(rule: &'a dyn ControlRule, n: usize) -> Self {
        SsynchSemantics { rule, n, choices: ssynch_choices(n) }
    }

    pub fn pack(colors: &[ControlColor]) -> u64 {
        colors.iter().enumerate().fold(0, |acc, (i, c)| acc | (c.index() as u64) << (BITS * i))
    }

    fn color(&self, s: u64, r: usize) -> ControlColor {
        ControlColor::from_index(((s >> (BITS * r)) & 0b111) as usize).expect("packed color")
    }
}

impl Semantics for SsynchSemantics<'_> {
    fn n(&self) -> usize {
        self.n
    }

    fn kind(&self) -> ProtocolKind {
        self.rule.kind()
    }

    fn scheduler(&self) -> Scheduler {
        Scheduler::Ssynch
    }

    fn successors(&self, s: u64, out: &mut Vec<Transition>) -> Result<(), VerifierError> {
        let view = self.support(s);
        let mut steps = Vec::with_capacity(self.n);
        for r in 0..self.n {
            steps.push(self.rule.step(self.color(s, r), view)?);
        }
        for &set in &self.choices {
            let mut to = s;
            let mut execs = RobotSet::EMPTY;
            for r in set.iter() {
                let st = steps[r];
                to = (to & !(0b111 << (BITS * r))) | (st.next.index() as u64) << (BITS * r);
                if st.execute_p {
                    execs.insert(r);
                }
            }
            out.push(Transition { choice: Choice::Round(set), actors: set, execs, to });
        }
        Ok(())
    }

    fn colors(&self, s: u64) -> Vec<ControlColor> {
        (0..self.n).map(|r| self.color(s, r)).collect()
    }

    fn support(&self, s: u64) -> ColorView {
        let mut v = ColorView::EMPTY;
        for r in 0..self.n {
            v.insert(self.color(s, r));
        }
        v
    }

    fn cycle_start(&self, _s: u64) -> bool {
        true
    }

    fn describe(&self, s: u64) -> String {
        let names: Vec<&str> = (0..self.n).map(|r| self.color(s, r).name()).collect();
        format!("({})", names.join(","))
    }
}

/// Explores every SSYNCH activation choice from each start coloring.
pub fn explore_ssynch(
    rule: &dyn ControlRule,
    n: usize,
    starts: &[Vec<ControlColor>],
    budget: &Budget,
) -> Result<StateGraph, VerifierError> {
    budget.check_n(n, Scheduler::Ssynch)?;
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
        packed.push(SsynchSemantics::pack(s));
    }
    explore(&SsynchSemantics::new(rule, n), &packed, budget)
}
