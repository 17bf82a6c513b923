//! Worked examples for the engine, verifier and impossibility operations.

use std::collections::BTreeSet;

use robosync::engine::{
    induced_sequence, run_asynch, run_ssynch, segment_trace, stage_snapshot_consistency, starved_robots, MegaCycle,
    MegaCycleDecomposition, MegaRule, Scheduler, Stage,
};
use robosync::impossibility::{refute, refute_protocol, TwoColorProtocolTable, Violation};
use robosync::model::{builtin_p, ColorView, Configuration, ControlColor, RobotSet};
use robosync::protocols::{ControlProtocol, ControlStep, ProtocolError, ProtocolKind, Rule};
use robosync::schedulers::{AsynchEvent, AsynchOp, ScriptedAdversary, SerialAdversary};
use robosync::verifier::{
    all_colorings, check_conformance, check_rsynch_conformance, check_self_stabilization, cs_graph, explore_asynch,
    explore_ssynch, Budget, Choice, ControlRule, DiagramId,
};

use ControlColor::{SPrime, M, S, T};

fn rs(ids: &[usize]) -> RobotSet {
    RobotSet::from_ids(ids.iter().copied())
}

fn view(colors: &[ControlColor]) -> ColorView {
    ColorView::of(colors)
}

fn budget() -> Budget {
    Budget::default()
}

#[test]
fn sync_supports_from_all_t_stay_within_the_legal_set() {
    let legal: BTreeSet<ColorView> = [
        &[T][..],
        &[M],
        &[SPrime],
        &[T, M],
        &[T, S],
        &[T, SPrime],
        &[M, S],
        &[M, SPrime],
        &[S, SPrime],
        &[T, M, S],
        &[T, M, SPrime],
        &[M, S, SPrime],
    ]
    .iter()
    .map(|c| view(c))
    .collect();
    let g = explore_ssynch(&ControlProtocol::new(ProtocolKind::SimRsS), 2, &[vec![T, T]], &budget()).unwrap();
    let reached: BTreeSet<ColorView> = g.supports.iter().copied().collect();
    assert!(reached.is_subset(&legal), "{reached:?}");
}

#[test]
fn single_activation_from_all_t() {
    let g = explore_ssynch(&ControlProtocol::new(ProtocolKind::SimRsS), 2, &[vec![T, T]], &budget()).unwrap();
    let start = g.starts[0] as usize;
    let e = g.edges[start].iter().find(|e| e.choice == Choice::Round(rs(&[0]))).unwrap();
    assert_eq!(g.colors[e.to as usize], vec![M, T]);
    assert_eq!(e.execs, rs(&[0]));
}

#[test]
fn ss_sync_from_all_m_reaches_the_legal_cycle() {
    let g = explore_ssynch(&ControlProtocol::new(ProtocolKind::SsSimRsS), 2, &[vec![M, M]], &budget()).unwrap();
    assert!(g.supports.contains(&view(&[T])));
}

#[test]
fn exploration_counts_are_deterministic() {
    let protocol = ControlProtocol::new(ProtocolKind::SimRsA);
    let a = explore_asynch(&protocol, 2, &[vec![T, T]], &budget()).unwrap();
    let b = explore_asynch(&protocol, 2, &[vec![T, T]], &budget()).unwrap();
    assert_eq!((a.node_count(), a.edge_count()), (b.node_count(), b.edge_count()));
    assert_eq!(a.labels, b.labels);
}

#[test]
fn two_robot_cycle_start_pairs() {
    let g = explore_asynch(&ControlProtocol::new(ProtocolKind::Sim2RsA), 2, &[vec![T, T]], &budget()).unwrap();
    let edges = cs_graph(&g).unwrap();
    let allowed: BTreeSet<(ControlColor, ControlColor)> =
        [(T, T), (M, M), (S, S), (M, T), (T, M), (S, T), (T, S), (S, M), (M, S)].into_iter().collect();
    for e in &edges {
        assert!(allowed.contains(&e.from) && allowed.contains(&e.to), "{e:?}");
    }
    assert!(edges.iter().any(|e| e.from == (M, T) && e.to == (S, T) && e.label.is_empty()));
}

#[test]
fn serialized_async_run_follows_the_support_chain() {
    let p = builtin_p("stay").unwrap();
    let init = Configuration::from_controls(&[T, T]).unwrap();
    let mut adv = SerialAdversary::new(vec![0, 1]);
    let tr = run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut adv, 8).unwrap();
    let supports: Vec<ColorView> = tr.configs.iter().map(|c| c.support()).collect();
    assert_eq!(supports[0], view(&[T]));
    assert!(supports.contains(&view(&[T, M])));
}

#[test]
fn serialized_async_cycles_alternate_executors() {
    let p = builtin_p("stay").unwrap();
    let init = Configuration::from_controls(&[T, T]).unwrap();
    let mut adv = SerialAdversary::new(vec![0, 1]);
    let tr = run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut adv, 400).unwrap();
    let execs: Vec<usize> = tr.executions().into_iter().map(|(_, r)| r).collect();
    assert!(execs.len() >= 4, "{execs:?}");
    assert!(execs.windows(2).all(|w| w[0] != w[1]), "{execs:?}");
    let d = segment_trace(&tr, ProtocolKind::SimRsA);
    assert!(d.violations.is_empty(), "{:?}", d.violations);
}

#[test]
fn a_robot_never_scheduled_is_reported() {
    let p = builtin_p("stay").unwrap();
    let init = Configuration::from_controls(&[T, T]).unwrap();
    let mut adv = SerialAdversary::new(vec![0]);
    let tr = run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut adv, 40).unwrap();
    assert_eq!(starved_robots(&tr), vec![1]);
}

#[test]
fn async_mega_cycle_closes_at_all_m() {
    use AsynchOp::*;
    let p = builtin_p("stay").unwrap();
    let init = Configuration::from_controls(&[T, T]).unwrap();
    // Both look at {T}, then both compute: all M after the second Compute.
    let events = vec![
        AsynchEvent::new(0, Look),
        AsynchEvent::new(1, Look),
        AsynchEvent::new(0, Compute),
        AsynchEvent::new(1, Compute),
        AsynchEvent::new(0, MoveBegin),
        AsynchEvent::new(1, MoveBegin),
        AsynchEvent::new(0, MoveEnd),
        AsynchEvent::new(1, MoveEnd),
    ];
    let mut adv = ScriptedAdversary::new(events);
    let tr = run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut adv, 8).unwrap();
    assert_eq!(tr.configs[4].support(), view(&[M]));
    let d = segment_trace(&tr, ProtocolKind::SimRsA);
    assert_eq!(d.mega_cycles.len(), 1);
    assert_eq!(d.mega_cycles[0].stages[0].executors, rs(&[0, 1]));
    assert!(d.mega_cycles[0].end <= 8);
    assert!(stage_snapshot_consistency(&tr, &d)[0]);
}

#[test]
fn induced_sequence_concatenates_stages() {
    let stage = |e: &[usize]| Stage { start: 0, end: 0, executors: rs(e), exec_records: vec![] };
    let mega = |stages: Vec<Stage>| MegaCycle { start: 0, end: 0, stages };
    let d = MegaCycleDecomposition {
        mega_cycles: vec![mega(vec![stage(&[0]), stage(&[1])]), mega(vec![stage(&[0]), stage(&[1])])],
        ..Default::default()
    };
    assert_eq!(induced_sequence(&d).prefix, vec![rs(&[0]), rs(&[1]), rs(&[0]), rs(&[1])]);
}

#[test]
fn serialized_async_stages_are_consistent() {
    let p = builtin_p("midpoint").unwrap();
    let init = Configuration::from_controls(&[T, T, T]).unwrap();
    let mut adv = SerialAdversary::new(vec![0, 1, 2]);
    let tr = run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut adv, 600).unwrap();
    let d = segment_trace(&tr, ProtocolKind::SimRsA);
    let flags = stage_snapshot_consistency(&tr, &d);
    assert!(!flags.is_empty());
    assert!(flags.iter().all(|&f| f));
}

/// Record indices of every Compute in a trace, with the robot.
fn computes(tr: &robosync::engine::Trace) -> Vec<(usize, usize)> {
    tr.records.iter().enumerate().filter(|(_, r)| r.op == AsynchOp::Compute.name()).map(|(i, r)| (i, r.actors[0])).collect()
}

fn one_stage(executors: RobotSet, exec_records: Vec<usize>) -> MegaCycleDecomposition {
    MegaCycleDecomposition {
        open_stages: vec![Stage { start: 0, end: 0, executors, exec_records }],
        ..Default::default()
    }
}

#[test]
fn looks_split_by_a_color_write_are_inconsistent() {
    use AsynchOp::*;
    let p = builtin_p("stay").unwrap();
    let init = Configuration::from_controls(&[T, T]).unwrap();
    // Robot 0 writes M between the two Looks.
    let events = vec![
        AsynchEvent::new(0, Look),
        AsynchEvent::new(0, Compute),
        AsynchEvent::new(1, Look),
        AsynchEvent::new(1, Compute),
    ];
    let tr = run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut ScriptedAdversary::new(events), 4).unwrap();
    let c = computes(&tr);
    let d = one_stage(rs(&[0, 1]), vec![c[0].0, c[1].0]);
    assert_eq!(stage_snapshot_consistency(&tr, &d), vec![false]);
}

#[test]
fn looks_during_a_move_are_inconsistent() {
    use AsynchOp::*;
    let p = builtin_p("midpoint").unwrap();
    let init = Configuration::from_controls(&[T, T]).unwrap();
    // Robot 0 is mid-way through a real move when robot 1 looks.
    let events = vec![
        AsynchEvent::new(0, Look),
        AsynchEvent::new(0, Compute),
        AsynchEvent::new(0, MoveBegin),
        AsynchEvent::new(1, Look),
        AsynchEvent::new(1, Compute),
    ];
    let tr = run_asynch(ProtocolKind::SimRsA, p.as_ref(), &init, &mut ScriptedAdversary::new(events), 5).unwrap();
    assert_ne!(tr.configs[3].version, tr.configs[2].version);
    let c = computes(&tr);
    let d = one_stage(rs(&[1]), vec![c[1].0]);
    assert_eq!(stage_snapshot_consistency(&tr, &d), vec![false]);
}

#[test]
fn sync_simulator_conforms_for_three_robots() {
    let g = explore_ssynch(&ControlProtocol::new(ProtocolKind::SimRsS), 3, &[vec![T; 3]], &budget()).unwrap();
    let r = check_conformance(&g, DiagramId::Fig3).unwrap();
    assert!(r.pass, "{r:?}");
}

/// The synchronous simulator with an extra M to T rule whenever T is seen.
struct MBackToT(ControlProtocol);

impl ControlRule for MBackToT {
    fn kind(&self) -> ProtocolKind {
        self.0.kind
    }

    fn step(&self, my: ControlColor, c: ColorView) -> Result<ControlStep, ProtocolError> {
        if my == M && c.contains(T) {
            return Ok(ControlStep { execute_p: false, next: T });
        }
        self.0.step(my, c)
    }
}

#[test]
fn injected_m_to_t_rule_breaks_conformance() {
    let rule = MBackToT(ControlProtocol::new(ProtocolKind::SimRsS));
    let g = explore_ssynch(&rule, 2, &[vec![T, T]], &budget()).unwrap();
    let r = check_conformance(&g, DiagramId::Fig3).unwrap();
    assert!(!r.pass);
    assert!(r.unexpected_edges.contains(&"{T,M} -> {T}".to_string()), "{:?}", r.unexpected_edges);
    assert!(r.counterexample.is_some());
}

#[test]
fn two_robot_simulator_alternates_in_the_disjoint_phase() {
    let protocol = ControlProtocol::new(ProtocolKind::Sim2RsA);
    let r = check_rsynch_conformance(&protocol, Scheduler::Asynch, 2, &[T, T], MegaRule::Covering, &budget()).unwrap();
    assert!(r.pass, "{:?}", r.counterexample());
}

#[test]
fn two_robot_simulator_without_s_rule_starves() {
    let protocol = ControlProtocol::new(ProtocolKind::Sim2RsA).without(Rule::SToT).unwrap();
    let r = check_rsynch_conformance(&protocol, Scheduler::Asynch, 2, &[T, T], MegaRule::Covering, &budget()).unwrap();
    assert!(!r.pass);
}

#[test]
fn ss_sync_converges_for_two_robots() {
    let r = check_self_stabilization(
        &ControlProtocol::new(ProtocolKind::SsSimRsS),
        Scheduler::Ssynch,
        2,
        MegaRule::Covering,
        &budget(),
    )
    .unwrap();
    assert_eq!(r.starts, 16);
    assert!(r.converges && r.pass, "{r:?}");
}

#[test]
fn non_ss_sync_convergence_is_reported_not_claimed() {
    let r = check_self_stabilization(
        &ControlProtocol::new(ProtocolKind::SimRsS),
        Scheduler::Ssynch,
        3,
        MegaRule::Covering,
        &budget(),
    )
    .unwrap();
    assert_eq!(r.starts, 64);
    // Whatever the outcome, the stuck starts are consistent with it.
    assert_eq!(r.converges, r.non_converging_starts.is_empty());
}

#[test]
fn sync_m_guards_are_exclusive_in_reachable_states() {
    let protocol = ControlProtocol::new(ProtocolKind::SimRsS);
    for n in 2..=5 {
        let g = explore_ssynch(&protocol, n, &[vec![T; n]], &budget()).unwrap();
        for s in &g.supports {
            assert!(protocol.m_guards_fired(*s) <= 1, "n={n} support {s}");
        }
    }
}

#[test]
fn exploration_respects_the_robot_cap() {
    let protocol = ControlProtocol::new(ProtocolKind::SimRsS);
    assert!(explore_ssynch(&protocol, 7, &[vec![T; 7]], &budget()).is_err());
    let protocol = ControlProtocol::new(ProtocolKind::SimRsA);
    assert!(explore_asynch(&protocol, 4, &[vec![T; 4]], &budget()).is_err());
    assert_eq!(all_colorings(ProtocolKind::SsSimRsA.colors(), 2).len(), 25);
}

#[test]
fn sample_two_color_table_is_refuted() {
    let t = TwoColorProtocolTable::parse("XX:P>Y XY:->X YX:->X YY:->X").unwrap();
    assert!(refute(&t).is_some());
}

#[test]
fn tables_that_never_execute_make_no_progress() {
    let silent: Vec<_> = robosync::impossibility::enumerate_tables().into_iter().filter(|t| t.never_executes()).collect();
    assert_eq!(silent.len(), 16);
    for t in silent {
        assert_eq!(refute(&t).unwrap().violation, Violation::NoProgress, "{t}");
    }
}

#[test]
fn three_color_two_robot_simulator_has_no_witness() {
    let w = refute_protocol(ControlProtocol::new(ProtocolKind::Sim2RsA), [T, T]).unwrap();
    assert_eq!(w, None);
}

#[test]
fn sync_simulator_full_rounds_step_in_lockstep() {
    let p = builtin_p("stay").unwrap();
    let init = Configuration::from_controls(&[T, T]).unwrap();
    let sched = robosync::schedulers::ActivationSequence::lasso(vec![], vec![rs(&[0, 1])]);
    let tr = run_ssynch(ProtocolKind::SimRsS, p.as_ref(), &init, &sched, 3).unwrap();
    let seen: Vec<ColorView> = tr.configs.iter().map(|c| c.support()).collect();
    assert_eq!(seen, vec![view(&[T]), view(&[M]), view(&[SPrime]), view(&[T])]);
}
