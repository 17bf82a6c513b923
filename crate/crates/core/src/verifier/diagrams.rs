//! Expected transition diagrams, shipped as data files.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::model::{ColorView, ControlColor};
use crate::protocols::ProtocolKind;

use super::VerifierError;

const SYNC_SUPPORT: &str = include_str!("../../data/sync_support.diagram");
const ASYNC_SUPPORT: &str = include_str!("../../data/async_support.diagram");
const TWO_ROBOT_CS: &str = include_str!("../../data/two_robot_cs.diagram");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagramId {
    /// Support diagram of the synchronous simulator.
    Fig3,
    /// Support diagram of the asynchronous simulator.
    Fig5,
    /// Cycle-start diagram of the two-robot simulator.
    Fig7b,
}

impl DiagramId {
    pub const ALL: [DiagramId; 3] = [DiagramId::Fig3, DiagramId::Fig5, DiagramId::Fig7b];

    pub fn name(self) -> &'static str {
        match self {
            DiagramId::Fig3 => "fig3",
            DiagramId::Fig5 => "fig5",
            DiagramId::Fig7b => "fig7b",
        }
    }

    /// Protocol the diagram describes.
    pub fn kind(self) -> ProtocolKind {
        match self {
            DiagramId::Fig3 => ProtocolKind::SimRsS,
            DiagramId::Fig5 => ProtocolKind::SimRsA,
            DiagramId::Fig7b => ProtocolKind::Sim2RsA,
        }
    }

    pub fn default_for(kind: ProtocolKind) -> DiagramId {
        match kind {
            ProtocolKind::SimRsS | ProtocolKind::SsSimRsS => DiagramId::Fig3,
            ProtocolKind::SimRsA | ProtocolKind::SsSimRsA => DiagramId::Fig5,
            ProtocolKind::Sim2RsA => DiagramId::Fig7b,
        }
    }
}

impl fmt::Display for DiagramId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiagramId {
    type Err = VerifierError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fig3" | "sync-support" => Ok(DiagramId::Fig3),
            "fig5" | "async-support" => Ok(DiagramId::Fig5),
            "fig7b" | "two-robot-cs" => Ok(DiagramId::Fig7b),
            _ => Err(VerifierError::UnknownDiagram(s.to_string())),
        }
    }
}

/// Support-level diagram.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagram {
    pub nodes: BTreeSet<ColorView>,
    pub edges: BTreeSet<(ColorView, ColorView)>,
}

impl Diagram {
    pub fn builtin(id: DiagramId) -> Result<Diagram, VerifierError> {
        match id {
            DiagramId::Fig3 => Diagram::parse(SYNC_SUPPORT),
            DiagramId::Fig5 => Diagram::parse(ASYNC_SUPPORT),
            DiagramId::Fig7b => Err(VerifierError::UnknownDiagram(format!("{id} is not a support diagram"))),
        }
    }

    /// Parses chain lines such as `{T} -> {M} (-> {M,S'}) -> {T,M}`. A
    /// parenthesized hop is optional: its neighbours are also joined directly.
    pub fn parse(text: &str) -> Result<Diagram, VerifierError> {
        let mut d = Diagram::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line: String = raw.split('#').next().unwrap_or("").chars().filter(|c| !c.is_whitespace()).collect();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| VerifierError::UnknownDiagram(format!("line {}: {what}", lineno + 1));
            let mut chain: Vec<(ColorView, bool)> = Vec::new();
            let mut rest = line.as_str();
            let mut optional = false;
            loop {
                let close = rest.find('}').ok_or_else(|| bad("unclosed node"))?;
                if !rest.starts_with('{') {
                    return Err(bad("expected node"));
                }
                let node = ColorView::parse(&rest[1..close]).map_err(|e| bad(&e.to_string()))?;
                chain.push((node, optional));
                rest = &rest[close + 1..];
                if optional {
                    rest = rest.strip_prefix(')').ok_or_else(|| bad("unclosed optional hop"))?;
                }
                if rest.is_empty() {
                    break;
                }
                if let Some(r) = rest.strip_prefix("(->") {
                    optional = true;
                    rest = r;
                } else if let Some(r) = rest.strip_prefix("->") {
                    optional = false;
                    rest = r;
                } else {
                    return Err(bad("expected ->"));
                }
            }
            for (i, &(u, _)) in chain.iter().enumerate() {
                d.nodes.insert(u);
                // Join to the next node and past any run of optional ones.
                for &(v, opt) in &chain[i + 1..] {
                    d.edges.insert((u, v));
                    if !opt {
                        break;
                    }
                }
            }
        }
        Ok(d)
    }
}

/// Diagram over two-robot color pairs, with executor labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledDiagram {
    pub nodes: BTreeSet<(ControlColor, ControlColor)>,
    /// (from, sorted executor multiset, to).
    pub edges: BTreeSet<((ControlColor, ControlColor), Vec<usize>, (ControlColor, ControlColor))>,
}

impl LabeledDiagram {
    pub fn builtin(id: DiagramId) -> Result<LabeledDiagram, VerifierError> {
        match id {
            DiagramId::Fig7b => LabeledDiagram::parse(TWO_ROBOT_CS),
            _ => Err(VerifierError::UnknownDiagram(format!("{id} is not a two-robot diagram"))),
        }
    }

    /// Parses lines `(a,b) -> (c,d)` or `(a,b) -[0,1]-> (c,d)`.
    pub fn parse(text: &str) -> Result<LabeledDiagram, VerifierError> {
        let mut d = LabeledDiagram::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line: String = raw.split('#').next().unwrap_or("").chars().filter(|c| !c.is_whitespace()).collect();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| VerifierError::UnknownDiagram(format!("line {}: {what}", lineno + 1));
            let pair = |s: &str| -> Result<(ControlColor, ControlColor), VerifierError> {
                let inner = s.strip_prefix('(').and_then(|s| s.strip_suffix(')')).ok_or_else(|| bad("expected (a,b)"))?;
                let (a, b) = inner.split_once(',').ok_or_else(|| bad("expected (a,b)"))?;
                let a = a.parse().map_err(|_| bad("unknown color"))?;
                let b = b.parse().map_err(|_| bad("unknown color"))?;
                Ok((a, b))
            };
            let (from, label, to) = if let Some((l, r)) = line.split_once("-[") {
                let (lab, to) = r.split_once("]->").ok_or_else(|| bad("expected ]->"))?;
                let mut label = Vec::new();
                for x in lab.split(',').filter(|x| !x.is_empty()) {
                    label.push(x.parse::<usize>().map_err(|_| bad("bad robot id"))?);
                }
                label.sort_unstable();
                (pair(l)?, label, pair(to)?)
            } else {
                let (l, r) = line.split_once("->").ok_or_else(|| bad("expected ->"))?;
                (pair(l)?, Vec::new(), pair(r)?)
            };
            d.nodes.insert(from);
            d.nodes.insert(to);
            d.edges.insert((from, label, to));
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ControlColor::*;

    #[test]
    fn optional_hop_expands_to_three_edges() {
        let d = Diagram::parse("{T} (-> {M}) -> {S'}").unwrap();
        let t = ColorView::of(&[T]);
        let m = ColorView::of(&[M]);
        let sp = ColorView::of(&[SPrime]);
        assert_eq!(d.edges, BTreeSet::from([(t, m), (m, sp), (t, sp)]));
    }

    #[test]
    fn consecutive_optional_hops() {
        let d = Diagram::parse("{T} (-> {M}) (-> {S}) -> {S'}").unwrap();
        assert_eq!(d.edges.len(), 6);
    }

    #[test]
    fn builtin_sync_support_has_thirteen_nodes() {
        let d = Diagram::builtin(DiagramId::Fig3).unwrap();
        assert_eq!(d.nodes.len(), 13);
        assert!(d.edges.contains(&(ColorView::of(&[T, SPrime]), ColorView::of(&[T, M, SPrime]))));
    }

    #[test]
    fn builtin_two_robot_nodes() {
        let d = LabeledDiagram::builtin(DiagramId::Fig7b).unwrap();
        assert_eq!(d.nodes.len(), 9);
        assert!(d.edges.contains(&((T, T), vec![0, 0, 1], (M, T))));
        assert!(d.edges.contains(&((M, T), vec![], (S, T))));
    }

    #[test]
    fn unknown_ids_and_bad_lines() {
        assert!(matches!("fig9".parse::<DiagramId>(), Err(VerifierError::UnknownDiagram(_))));
        assert!(Diagram::parse("{T} => {M}").is_err());
        assert!(LabeledDiagram::parse("(T,T) -[x]-> (M,M)").is_err());
    }
}
