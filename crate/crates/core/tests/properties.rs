//! Property tests for trace, schedule and segmentation invariants.

mod common;

use proptest::prelude::*;

use robosync::engine::{
    induced_sequence, records_from_jsonl, run_asynch, run_ssynch, segment_trace, SegViolation, Trace,
};
use robosync::impossibility::{enumerate_tables, TwoColorProtocolTable};
use robosync::model::{builtin_p, Configuration, ControlColor, RobotSet};
use robosync::protocols::{ProtocolKind, Rule};
use robosync::schedulers::{
    random_ssynch_schedule, validate_rsynch, ActivationSequence, AsynchOp, RandomAsynchAdversary,
};

const KINDS: [ProtocolKind; 5] =
    [ProtocolKind::SimRsS, ProtocolKind::SsSimRsS, ProtocolKind::SimRsA, ProtocolKind::SsSimRsA, ProtocolKind::Sim2RsA];

fn ssynch_run(kind: ProtocolKind, n: usize, seed: u64, rounds: usize) -> Trace {
    let p = builtin_p("midpoint").unwrap();
    let init = Configuration::from_controls(&vec![ControlColor::T; n]).unwrap();
    let sched = random_ssynch_schedule(n, seed, rounds, 2 * n);
    run_ssynch(kind, p.as_ref(), &init, &sched, rounds).unwrap()
}

fn asynch_run(kind: ProtocolKind, n: usize, seed: u64, events: usize) -> Trace {
    let p = builtin_p("midpoint").unwrap();
    let init = Configuration::from_controls(&vec![ControlColor::T; n]).unwrap();
    let mut adv = RandomAsynchAdversary::new(n, seed);
    run_asynch(kind, p.as_ref(), &init, &mut adv, events).unwrap()
}

fn kind_and_n() -> impl Strategy<Value = (ProtocolKind, usize)> {
    (0..KINDS.len(), 2usize..=4).prop_map(|(k, n)| {
        let kind = KINDS[k];
        (kind, kind.fixed_n().unwrap_or(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trips((kind, n) in kind_and_n(), seed in any::<u64>()) {
        let tr = if kind.targets_asynch() { asynch_run(kind, n, seed, 120) } else { ssynch_run(kind, n, seed, 30) };
        let back = records_from_jsonl(&tr.to_jsonl()).unwrap();
        prop_assert_eq!(back, tr.records);
    }

    #[test]
    fn runs_are_deterministic((kind, n) in kind_and_n(), seed in any::<u64>()) {
        let (a, b) = if kind.targets_asynch() {
            (asynch_run(kind, n, seed, 120), asynch_run(kind, n, seed, 120))
        } else {
            (ssynch_run(kind, n, seed, 30), ssynch_run(kind, n, seed, 30))
        };
        prop_assert_eq!(a.to_jsonl(), b.to_jsonl());
    }

    #[test]
    fn versions_never_decrease((kind, n) in kind_and_n(), seed in any::<u64>()) {
        let tr = if kind.targets_asynch() { asynch_run(kind, n, seed, 200) } else { ssynch_run(kind, n, seed, 40) };
        prop_assert!(tr.records.windows(2).all(|w| w[0].version <= w[1].version));
        prop_assert!(tr.configs.windows(2).all(|w| w[0].version <= w[1].version));
    }

    #[test]
    fn executions_are_exactly_t_to_m((kind, n) in kind_and_n(), seed in any::<u64>()) {
        let tr = if kind.targets_asynch() { asynch_run(kind, n, seed, 200) } else { ssynch_run(kind, n, seed, 40) };
        for rec in &tr.records {
            for d in &rec.decisions {
                let t_to_m = d.from == ControlColor::T && d.to == ControlColor::M;
                prop_assert_eq!(d.exec_p, t_to_m, "{:?}", rec);
            }
        }
    }

    #[test]
    fn asynch_ops_cycle_per_robot(n in 2usize..=3, seed in any::<u64>()) {
        let tr = asynch_run(ProtocolKind::SimRsA, n, seed, 300);
        let mut expect = vec![AsynchOp::Look; n];
        for rec in tr.records.iter().skip(1) {
            let r = rec.actors[0];
            let op = AsynchOp::parse(&rec.op).unwrap();
            prop_assert_eq!(op, expect[r]);
            expect[r] = op.next();
        }
    }

    #[test]
    fn random_schedules_are_nonempty(n in 1usize..=8, seed in any::<u64>(), window in 1usize..10) {
        let s = random_ssynch_schedule(n, seed, 50, window);
        prop_assert!(s.unroll(50).iter().all(|e| !e.is_empty() && e.is_subset(RobotSet::full(n))));
    }

    #[test]
    fn online_summary_agrees_with_literal_predicate(
        n in 1usize..=4,
        sets in prop::collection::vec(0u32..16, 0..10),
    ) {
        let full = RobotSet::full(n);
        let seq: Vec<RobotSet> = sets.iter().map(|&b| RobotSet(b & full.0)).collect();
        let verdict = validate_rsynch(&ActivationSequence::finite(seq.clone()), n).unwrap();
        prop_assert_eq!(verdict.valid, common::literal_valid(&seq, n));
        prop_assert_eq!(verdict.violation.map(|v| (v.index, v.reason)), common::literal_violation(&seq, n));
    }

    #[test]
    fn table_encodings_round_trip(id in 0u32..256) {
        let t = TwoColorProtocolTable::from_id(id).unwrap();
        prop_assert_eq!(TwoColorProtocolTable::parse(&t.encoding()).unwrap(), t);
        prop_assert_eq!(t.id(), id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Fair random SSYNCH runs of the synchronous simulator: each mega-cycle
    /// partitions the robots into stages and the induced sequence is valid.
    #[test]
    fn sync_simulator_mega_cycles_partition_the_robots(n in 2usize..=5, seed in any::<u64>()) {
        let tr = ssynch_run(ProtocolKind::SimRsS, n, seed, 60);
        let d = segment_trace(&tr, ProtocolKind::SimRsS);
        prop_assert!(d.violations.is_empty(), "n={} seed={} {:?}", n, seed, d.violations);
        for m in &d.mega_cycles {
            let mut seen = RobotSet::default();
            for s in &m.stages {
                prop_assert!(!s.executors.is_empty());
                prop_assert!(!seen.intersects(s.executors));
                seen = seen.union(s.executors);
            }
            prop_assert_eq!(seen, RobotSet::full(n));
        }
        prop_assert!(validate_rsynch(&induced_sequence(&d), n).unwrap().valid);
    }

    /// Whatever else goes wrong, mega-cycles never share a record and a robot
    /// never runs twice in one of them without being flagged.
    #[test]
    fn mega_cycles_are_disjoint((kind, n) in kind_and_n(), seed in any::<u64>()) {
        let tr = if kind.targets_asynch() { asynch_run(kind, n, seed, 300) } else { ssynch_run(kind, n, seed, 60) };
        let d = segment_trace(&tr, kind);
        prop_assert!(d.mega_cycles.windows(2).all(|w| w[0].end <= w[1].start));
        for m in &d.mega_cycles {
            let mut seen = RobotSet::default();
            for s in &m.stages {
                for r in s.executors.iter() {
                    let flagged = d.violations.iter().any(|(_, v)| *v == SegViolation::DoubleExecution(r));
                    prop_assert!(!seen.contains(r) || flagged);
                    seen.insert(r);
                }
            }
        }
    }
}

#[test]
fn names_round_trip() {
    for k in KINDS {
        assert_eq!(k.name().parse::<ProtocolKind>().unwrap(), k);
        let json = serde_json::to_string(&k).unwrap();
        assert_eq!(serde_json::from_str::<ProtocolKind>(&json).unwrap(), k);
    }
    for r in Rule::ALL {
        assert_eq!(r.name().parse::<Rule>().unwrap(), r);
    }
    for c in [ControlColor::T, ControlColor::M, ControlColor::S, ControlColor::SPrime, ControlColor::W] {
        assert_eq!(c.name().parse::<ControlColor>().unwrap(), c);
    }
    assert_eq!(enumerate_tables().len(), 256);
}
