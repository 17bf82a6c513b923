//! The five control protocols as pure step functions.
//!
//! Each step reads the robot's own control color and the color view of its
//! snapshot (or, for the two-robot protocol, the other robot's color) and
//! returns whether P runs plus the next control color. Guards inside one
//! color branch are evaluated top to bottom and a later match overwrites an
//! earlier one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ColorView, ControlColor};

use ControlColor::{SPrime, M, S, T, W};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("color {color} is not used by {kind}")]
    ColorOutsidePalette { kind: ProtocolKind, color: ControlColor },
    #[error("view {view} does not contain the robot's own color {own}")]
    OwnColorMissing { own: ControlColor, view: ColorView },
    #[error("{kind} needs exactly two robots; view {view} has too many colors")]
    NotTwoRobots { kind: ProtocolKind, view: ColorView },
    #[error("unknown protocol kind `{0}`")]
    UnknownKind(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("rule {rule} does not belong to {kind}")]
    RuleNotInKind { kind: ProtocolKind, rule: Rule },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolKind {
    SimRsS,
    SsSimRsS,
    SimRsA,
    SsSimRsA,
    Sim2RsA,
}

const FOUR: [ControlColor; 4] = [T, M, S, SPrime];
const FIVE: [ControlColor; 5] = [T, M, S, SPrime, W];
const THREE: [ControlColor; 3] = [T, M, S];

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::SimRsS,
        ProtocolKind::SsSimRsS,
        ProtocolKind::SimRsA,
        ProtocolKind::SsSimRsA,
        ProtocolKind::Sim2RsA,
    ];

    pub fn colors(self) -> &'static [ControlColor] {
        match self {
            ProtocolKind::SimRsS | ProtocolKind::SsSimRsS => &FOUR,
            ProtocolKind::SimRsA | ProtocolKind::SsSimRsA => &FIVE,
            ProtocolKind::Sim2RsA => &THREE,
        }
    }

    pub fn palette(self) -> ColorView {
        ColorView::of(self.colors())
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::SimRsS => "sim-rs-s",
            ProtocolKind::SsSimRsS => "ss-sim-rs-s",
            ProtocolKind::SimRsA => "sim-rs-a",
            ProtocolKind::SsSimRsA => "ss-sim-rs-a",
            ProtocolKind::Sim2RsA => "sim2-rs-a",
        }
    }

    /// True for the protocols designed for the asynchronous scheduler.
    pub fn targets_asynch(self) -> bool {
        matches!(self, ProtocolKind::SimRsA | ProtocolKind::SsSimRsA | ProtocolKind::Sim2RsA)
    }

    pub fn is_self_stabilizing_variant(self) -> bool {
        matches!(self, ProtocolKind::SsSimRsS | ProtocolKind::SsSimRsA | ProtocolKind::Sim2RsA)
    }

    /// Fixed team size, if the protocol only works for one.
    pub fn fixed_n(self) -> Option<usize> {
        match self {
            ProtocolKind::Sim2RsA => Some(2),
            _ => None,
        }
    }

    pub fn rules(self) -> &'static [Rule] {
        use Rule::*;
        match self {
            ProtocolKind::SimRsS | ProtocolKind::SsSimRsS => &[TExec, MToS, MToSPrime, SToT, SPrimeToT],
            ProtocolKind::SimRsA => &[TExec, TToW, MToW, MToS, MToSPrime, SToT, SPrimeToT, WToT],
            ProtocolKind::SsSimRsA => {
                &[TExec, TToW, MToW, MToS, MToSPrime, SToT, SToW, SPrimeToT, SPrimeToW, WToT]
            }
            ProtocolKind::Sim2RsA => &[TExec, MToS, SToT],
        }
    }

    pub fn check_color(self, c: ControlColor) -> Result<(), ProtocolError> {
        if self.palette().contains(c) {
            Ok(())
        } else {
            Err(ProtocolError::ColorOutsidePalette { kind: self, color: c })
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ProtocolError::UnknownKind(s.to_string()))
    }
}

impl Serialize for ProtocolKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ProtocolKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// One guarded assignment of a protocol. Used to switch individual rules off
/// for mutation testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    TExec,
    TToW,
    MToW,
    MToS,
    MToSPrime,
    SToT,
    SToW,
    SPrimeToT,
    SPrimeToW,
    WToT,
}

impl Rule {
    pub const ALL: [Rule; 10] = [
        Rule::TExec,
        Rule::TToW,
        Rule::MToW,
        Rule::MToS,
        Rule::MToSPrime,
        Rule::SToT,
        Rule::SToW,
        Rule::SPrimeToT,
        Rule::SPrimeToW,
        Rule::WToT,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::TExec => "T-exec",
            Rule::TToW => "T->W",
            Rule::MToW => "M->W",
            Rule::MToS => "M->S",
            Rule::MToSPrime => "M->S'",
            Rule::SToT => "S->T",
            Rule::SToW => "S->W",
            Rule::SPrimeToT => "S'->T",
            Rule::SPrimeToW => "S'->W",
            Rule::WToT => "W->T",
        }
    }

    fn bit(self) -> u16 {
        1 << (self as u16)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| ProtocolError::UnknownRule(s.to_string()))
    }
}

/// Result of one Compute as far as the control layer is concerned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControlStep {
    pub execute_p: bool,
    pub next: ControlColor,
}

impl ControlStep {
    fn keep(c: ControlColor) -> Self {
        ControlStep { execute_p: false, next: c }
    }

    /// True when the step neither runs P nor changes the color.
    pub fn is_null(&self, own: ControlColor) -> bool {
        !self.execute_p && self.next == own
    }
}

/// A protocol kind with an optional set of rules switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ControlProtocol {
    pub kind: ProtocolKind,
    disabled: u16,
}

impl From<ProtocolKind> for ControlProtocol {
    fn from(kind: ProtocolKind) -> Self {
        ControlProtocol { kind, disabled: 0 }
    }
}

impl fmt::Display for ControlProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for r in self.disabled_rules() {
            write!(f, " -{}", r)?;
        }
        Ok(())
    }
}

impl ControlProtocol {
    pub fn new(kind: ProtocolKind) -> Self {
        kind.into()
    }

    /// Same protocol with `rule` removed.
    pub fn without(self, rule: Rule) -> Result<Self, ProtocolError> {
        if !self.kind.rules().contains(&rule) {
            return Err(ProtocolError::RuleNotInKind { kind: self.kind, rule });
        }
        Ok(ControlProtocol { kind: self.kind, disabled: self.disabled | rule.bit() })
    }

    pub fn disabled_rules(&self) -> impl Iterator<Item = Rule> + '_ {
        Rule::ALL.into_iter().filter(|r| self.disabled & r.bit() != 0)
    }

    pub fn is_mutant(&self) -> bool {
        self.disabled != 0
    }

    fn on(&self, r: Rule) -> bool {
        self.disabled & r.bit() == 0
    }

    /// One Compute step from the robot's own color and its color view.
    pub fn step(&self, my: ControlColor, c: ColorView) -> Result<ControlStep, ProtocolError> {
        self.kind.check_color(my)?;
        for col in c.iter() {
            self.kind.check_color(col)?;
        }
        if !c.contains(my) {
            return Err(ProtocolError::OwnColorMissing { own: my, view: c });
        }
        Ok(match self.kind {
            ProtocolKind::SimRsS => self.alg_sim_rs_s(my, c),
            ProtocolKind::SsSimRsS => self.alg_ss_sim_rs_s(my, c),
            ProtocolKind::SimRsA => self.alg_sim_rs_a(my, c),
            ProtocolKind::SsSimRsA => self.alg_ss_sim_rs_a(my, c),
            ProtocolKind::Sim2RsA => {
                let other = match c.len() {
                    1 => my,
                    2 => c.iter().find(|&x| x != my).expect("two colors"),
                    _ => return Err(ProtocolError::NotTwoRobots { kind: self.kind, view: c }),
                };
                self.alg_sim2_rs_a(my, other)
            }
        })
    }

    /// Two-robot step reading the other robot's color directly.
    pub fn step_pair(&self, my: ControlColor, other: ControlColor) -> Result<ControlStep, ProtocolError> {
        if self.kind != ProtocolKind::Sim2RsA {
            return self.step(my, ColorView::of(&[my, other]));
        }
        self.kind.check_color(my)?;
        self.kind.check_color(other)?;
        Ok(self.alg_sim2_rs_a(my, other))
    }

    /// Number of M-branch guards of the synchronous protocols that hold for
    /// view `c`; other kinds report 0.
    pub fn m_guards_fired(&self, c: ColorView) -> usize {
        let has = |x| c.contains(x);
        match self.kind {
            ProtocolKind::SimRsS => {
                let to_s = !has(SPrime) && has(T);
                let to_sp = (!has(T) && !has(SPrime)) || (!has(T) && has(S));
                usize::from(to_s) + usize::from(to_sp)
            }
            ProtocolKind::SsSimRsS => {
                let to_s = !has(SPrime) && has(T);
                let to_sp = (!has(T) && !has(SPrime)) || (has(T) && c.len() > 1 && has(S));
                usize::from(to_s) + usize::from(to_sp)
            }
            _ => 0,
        }
    }

    fn exec_guard(c: ColorView) -> bool {
        c == ColorView::of(&[T]) || c == ColorView::of(&[T, S]) || c == ColorView::of(&[T, SPrime])
    }

    fn alg_sim_rs_s(&self, my: ControlColor, c: ColorView) -> ControlStep {
        let has = |x| c.contains(x);
        let mut out = ControlStep::keep(my);
        match my {
            T => {
                if self.on(Rule::TExec) && Self::exec_guard(c) {
                    out = ControlStep { execute_p: true, next: M };
                }
            }
            M => {
                if self.on(Rule::MToS) && !has(SPrime) && has(T) {
                    out.next = S;
                }
                if self.on(Rule::MToSPrime) && ((!has(T) && !has(SPrime)) || (!has(T) && has(S))) {
                    out.next = SPrime;
                }
            }
            S => {
                if self.on(Rule::SToT) && !has(M) && has(SPrime) {
                    out.next = T;
                }
            }
            SPrime => {
                if self.on(Rule::SPrimeToT) && ((!has(S) && !has(T)) || (!has(S) && has(M))) {
                    out.next = T;
                }
            }
            _ => {}
        }
        out
    }

    fn alg_ss_sim_rs_s(&self, my: ControlColor, c: ColorView) -> ControlStep {
        let has = |x| c.contains(x);
        let mut out = ControlStep::keep(my);
        match my {
            T => {
                if self.on(Rule::TExec) && Self::exec_guard(c) {
                    out = ControlStep { execute_p: true, next: M };
                }
            }
            M => {
                if self.on(Rule::MToS) && !has(SPrime) && has(T) {
                    out.next = S;
                }
                // {T} is a proper subset of c: T present alongside another color.
                let t_proper = has(T) && c.len() > 1;
                if self.on(Rule::MToSPrime) && ((!has(T) && !has(SPrime)) || (t_proper && has(S))) {
                    out.next = SPrime;
                }
            }
            S => {
                let tm_sp = ColorView::of(&[T, M, SPrime]).is_subset(c);
                if self.on(Rule::SToT) && ((!has(M) && has(SPrime)) || c == ColorView::of(&[S]) || tm_sp) {
                    out.next = T;
                }
            }
            SPrime => {
                if self.on(Rule::SPrimeToT) && ((!has(S) && !has(T)) || (!has(S) && has(M))) {
                    out.next = T;
                }
            }
            _ => {}
        }
        out
    }

    fn alg_sim_rs_a(&self, my: ControlColor, c: ColorView) -> ControlStep {
        let has = |x| c.contains(x);
        let mut out = ControlStep::keep(my);
        match my {
            T => {
                if self.on(Rule::TExec) && Self::exec_guard(c) {
                    out = ControlStep { execute_p: true, next: M };
                }
                if self.on(Rule::TToW) && !has(SPrime) && has(M) {
                    out.next = W;
                }
            }
            M => {
                if self.on(Rule::MToW) && c == ColorView::of(&[M]) {
                    out.next = W;
                }
                if self.on(Rule::MToS) && !has(T) && !has(SPrime) && has(W) {
                    out.next = S;
                }
                if self.on(Rule::MToSPrime) && !has(T) && !has(W) && has(S) {
                    out.next = SPrime;
                }
            }
            S => {
                if self.on(Rule::SToT) && !has(W) && !has(M) && has(SPrime) {
                    out.next = T;
                }
            }
            SPrime => {
                if self.on(Rule::SPrimeToT) && !has(W) && !has(S) && has(M) {
                    out.next = T;
                }
            }
            W => {
                if self.on(Rule::WToT) && !has(M) && !has(SPrime) {
                    out.next = T;
                }
            }
            _ => {}
        }
        out
    }

    fn alg_ss_sim_rs_a(&self, my: ControlColor, c: ColorView) -> ControlStep {
        let has = |x| c.contains(x);
        let is = |cs: &[ControlColor]| c == ColorView::of(cs);
        let mut out = ControlStep::keep(my);
        match my {
            T => {
                if self.on(Rule::TExec) && Self::exec_guard(c) {
                    out = ControlStep { execute_p: true, next: M };
                }
                if self.on(Rule::TToW) && ((!has(SPrime) && has(M)) || is(&[T, SPrime, W])) {
                    out.next = W;
                }
            }
            M => {
                let tss = ColorView::of(&[T, S, SPrime]).is_subset(c);
                if self.on(Rule::MToW) && (is(&[M]) || is(&[M, SPrime, W]) || is(&[T, M, SPrime, W]) || tss) {
                    out.next = W;
                }
                if self.on(Rule::MToS) && !has(T) && !has(SPrime) && has(W) {
                    out.next = S;
                }
                if self.on(Rule::MToSPrime) && !has(T) && !has(W) && has(S) {
                    out.next = SPrime;
                }
            }
            S => {
                if self.on(Rule::SToT) && ((!has(W) && !has(M) && has(SPrime)) || is(&[S])) {
                    out.next = T;
                }
                if self.on(Rule::SToW) && ((!has(T) && has(SPrime) && has(W)) || is(&[T, S, SPrime, W])) {
                    out.next = W;
                }
            }
            SPrime => {
                if self.on(Rule::SPrimeToT) && !has(W) && !has(S) && has(M) {
                    out.next = T;
                }
                if self.on(Rule::SPrimeToW) && is(&[SPrime, W]) {
                    out.next = W;
                }
            }
            W => {
                if self.on(Rule::WToT) && !has(M) && !has(SPrime) {
                    out.next = T;
                }
            }
            _ => {}
        }
        out
    }

    fn alg_sim2_rs_a(&self, my: ControlColor, other: ControlColor) -> ControlStep {
        if my == T && matches!(other, T | S) {
            if self.on(Rule::TExec) {
                return ControlStep { execute_p: true, next: M };
            }
        } else if my == M && matches!(other, T | M) {
            if self.on(Rule::MToS) {
                return ControlStep { execute_p: false, next: S };
            }
        } else if my == S && matches!(other, M | S) && self.on(Rule::SToT) {
            return ControlStep { execute_p: false, next: T };
        }
        ControlStep::keep(my)
    }
}

pub fn step_sim_rs_s(my: ControlColor, c: ColorView) -> Result<ControlStep, ProtocolError> {
    ControlProtocol::new(ProtocolKind::SimRsS).step(my, c)
}

pub fn step_ss_sim_rs_s(my: ControlColor, c: ColorView) -> Result<ControlStep, ProtocolError> {
    ControlProtocol::new(ProtocolKind::SsSimRsS).step(my, c)
}

pub fn step_sim_rs_a(my: ControlColor, c: ColorView) -> Result<ControlStep, ProtocolError> {
    ControlProtocol::new(ProtocolKind::SimRsA).step(my, c)
}

pub fn step_ss_sim_rs_a(my: ControlColor, c: ColorView) -> Result<ControlStep, ProtocolError> {
    ControlProtocol::new(ProtocolKind::SsSimRsA).step(my, c)
}

pub fn step_sim2_rs_a(my: ControlColor, other: ControlColor) -> Result<ControlStep, ProtocolError> {
    ControlProtocol::new(ProtocolKind::Sim2RsA).step_pair(my, other)
}

/// Every nonempty view over the kind's palette that contains `my`.
pub fn views_containing(kind: ProtocolKind, my: ControlColor) -> Vec<ColorView> {
    let palette = kind.palette().0;
    let mut out = Vec::new();
    let mut sub = palette;
    loop {
        let v = ColorView(sub);
        if v.contains(my) {
            out.push(v);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & palette;
    }
    out.sort();
    out
}
