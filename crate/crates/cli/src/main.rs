use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use robosync::engine::{
    induced_sequence, records_from_jsonl, run_asynch, run_ssynch, segment_records_with, MegaCycleDecomposition,
    MegaRule, Scheduler, TraceRecord,
};
use robosync::impossibility::{check_theorem10, refute_protocol};
use robosync::model::{builtin_p, Configuration, ControlColor, RobotSet};
use robosync::protocols::{ControlProtocol, ProtocolKind, Rule};
use robosync::schedulers::{
    random_ssynch_schedule, validate_rsynch, ActivationSequence, AsynchEvent, RandomAsynchAdversary,
    ScriptedAdversary,
};
use robosync::verifier::{
    all_colorings, check_conformance, check_rsynch_conformance, check_self_stabilization, explore_asynch,
    explore_ssynch, graph_to_dot, jsonl_line, replay_counterexample, support_graph_to_dot, Budget, Counterexample,
    DiagramId, StateGraph,
};

#[derive(Parser)]
#[command(name = "robosync", version, about = "Simulate and verify RSYNCH simulators for luminous robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its trace as JSON lines.
    Simulate(SimulateArgs),
    /// Explore the abstract configuration graph and export it.
    Explore(ExploreArgs),
    /// Compare the reachable graph with a built-in transition diagram.
    CheckConformance(ConformanceArgs),
    /// Check convergence from every start coloring.
    CheckSelfstab(CheckArgs),
    /// Check every fair behavior from one start coloring.
    CheckRsynch(RsynchArgs),
    /// Refute all 256 two-color simulators for two robots.
    CheckImpossibility(ImpossibilityArgs),
    /// Re-segment a trace file and re-check its induced sequence.
    ValidateTrace(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SimScheduler {
    SsynchRandom,
    SsynchScript,
    AsynchRandom,
    AsynchScript,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sched {
    Ssynch,
    Asynch,
}

impl From<Sched> for Scheduler {
    fn from(s: Sched) -> Scheduler {
        match s {
            Sched::Ssynch => Scheduler::Ssynch,
            Sched::Asynch => Scheduler::Asynch,
        }
    }
}

#[derive(Args)]
struct Target {
    #[arg(long)]
    kind: ProtocolKind,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Defaults to asynch for the asynchronous protocols.
    #[arg(long, value_enum)]
    scheduler: Option<Sched>,
    /// Rule to switch off, e.g. `M->S`; repeatable.
    #[arg(long = "without")]
    without: Vec<Rule>,
}

impl Target {
    fn protocol(&self) -> Result<ControlProtocol> {
        let mut p = ControlProtocol::new(self.kind);
        for &r in &self.without {
            p = p.without(r)?;
        }
        Ok(p)
    }

    fn scheduler(&self) -> Scheduler {
        match self.scheduler {
            Some(s) => s.into(),
            None if self.kind.targets_asynch() => Scheduler::Asynch,
            None => Scheduler::Ssynch,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    kind: ProtocolKind,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, value_enum, default_value = "ssynch-random")]
    scheduler: SimScheduler,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rounds to run under ssynch.
    #[arg(long, default_value_t = 100)]
    rounds: usize,
    /// Events to run under asynch.
    #[arg(long, default_value_t = 400)]
    events: usize,
    /// `all-T` or a comma-separated list such as `T,M,S'`.
    #[arg(long, default_value = "all-T")]
    init: String,
    /// Simulated protocol: `stay`, `midpoint` or `color_cycle(k)`.
    #[arg(long, default_value = "stay")]
    p: String,
    /// Scripted schedule: `0,1;0;1` for ssynch, `0.look 1.look 0.C ...` for
    /// asynch.
    #[arg(long)]
    script: Option<String>,
    /// Robots left out this long are forced in; defaults to 4n.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, default_value = "trace.jsonl")]
    out: PathBuf,
    #[arg(long, default_value = "covering")]
    mega_rule: MegaRule,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    target: Target,
    /// `all-T`, `all` for every coloring, or an explicit list.
    #[arg(long, default_value = "all-T")]
    init: String,
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    support_dot: Option<PathBuf>,
}

#[derive(Args)]
struct ConformanceArgs {
    #[command(flatten)]
    target: Target,
    /// Defaults to the diagram drawn for the protocol.
    #[arg(long)]
    diagram: Option<DiagramId>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value = "covering")]
    mega_rule: MegaRule,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RsynchArgs {
    #[command(flatten)]
    check: CheckArgs,
    #[arg(long, default_value = "all-T")]
    init: String,
}

#[derive(Args)]
struct ImpossibilityArgs {
    /// One JSON record per table.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Trace file, or `-` for stdin.
    path: PathBuf,
    #[arg(long)]
    kind: ProtocolKind,
    #[arg(long, default_value = "covering")]
    mega_rule: MegaRule,
    /// Ignore everything before the first mega-cycle start.
    #[arg(long)]
    syncing: bool,
}

/// Writes to stdout, turning a closed pipe into an error instead of a panic.
macro_rules! out {
    ($($t:tt)*) => { writeln!(io::stdout(), $($t)*)? };
}

macro_rules! out_raw {
    ($($t:tt)*) => { write!(io::stdout(), $($t)*)? };
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` means a check failed; errors are usage or configuration
/// problems.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Explore(a) => explore_cmd(a),
        Command::CheckConformance(a) => conformance(a),
        Command::CheckSelfstab(a) => selfstab(a),
        Command::CheckRsynch(a) => rsynch(a),
        Command::CheckImpossibility(a) => impossibility(a),
        Command::ValidateTrace(a) => validate(a),
    }
}

fn parse_init(s: &str, kind: ProtocolKind, n: usize) -> Result<Vec<Vec<ControlColor>>> {
    let out = match s {
        "all-T" => vec![vec![ControlColor::T; n]],
        "all" => all_colorings(kind.colors(), n),
        list => {
            let colors = list
                .split(',')
                .map(|c| c.parse::<ControlColor>())
                .collect::<Result<Vec<_>, _>>()
                .with_context(|| format!("bad coloring {list:?}"))?;
            vec![colors]
        }
    };
    for c in &out {
        if c.len() != n {
            bail!("coloring has {} robots, expected {n}", c.len());
        }
        for &x in c {
            kind.check_color(x)?;
        }
    }
    Ok(out)
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_report(path: Option<&PathBuf>, line: &str) -> Result<()> {
    match path {
        Some(p) => write_out(p, line),
        None => Ok(()),
    }
}

/// Verdict derived from trace records, printed by both `simulate` and
/// `validate-trace` so the two can be compared.
fn verdict(records: &[TraceRecord], protocol: ControlProtocol, syncing: bool, rule: MegaRule) -> Result<(bool, String)> {
    // The init record lists every robot.
    let n = records.first().map_or(0, |r| r.actors.len());
    let d: MegaCycleDecomposition = segment_records_with(records, protocol, syncing, rule)?;
    let induced = induced_sequence(&d);
    let v = validate_rsynch(&induced, n.max(1))?;
    let seg: Vec<String> = d.violations.iter().map(|(i, v)| format!("{i}:{v}")).collect();
    let ok = v.valid && seg.is_empty();
    let line = json!({
        "records": records.len(),
        "mega_cycles": d.mega_cycles.len(),
        "stages": d.stages().count(),
        "induced": induced.prefix,
        "rsynch_valid": v.valid,
        "rsynch_violation": v.violation,
        "segment_violations": seg,
        "pass": ok,
    });
    Ok((ok, line.to_string()))
}

fn simulate(a: SimulateArgs) -> Result<bool> {
    let protocol = ControlProtocol::new(a.kind);
    let init = parse_init(&a.init, a.kind, a.n)?.remove(0);
    let config = Configuration::from_controls(&init)?;
    let p = builtin_p(&a.p)?;
    let window = a.window.unwrap_or(4 * a.n);
    let trace = match a.scheduler {
        SimScheduler::SsynchRandom => {
            let schedule = random_ssynch_schedule(a.n, a.seed, a.rounds, window);
            run_ssynch(protocol, p.as_ref(), &config, &schedule, a.rounds)?
        }
        SimScheduler::SsynchScript => {
            let script = a.script.as_deref().context("--script is required for ssynch-script")?;
            let sets = script
                .split(';')
                .map(|s| {
                    let ids = s.split(',').map(|x| x.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>();
                    ids.map(RobotSet::from_ids).with_context(|| format!("bad activation set {s:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            let len = sets.len();
            run_ssynch(protocol, p.as_ref(), &config, &ActivationSequence::finite(sets), len)?
        }
        SimScheduler::AsynchRandom => {
            let mut adv = RandomAsynchAdversary::with_window(a.n, a.seed, window);
            run_asynch(protocol, p.as_ref(), &config, &mut adv, a.events)?
        }
        SimScheduler::AsynchScript => {
            let script = a.script.as_deref().context("--script is required for asynch-script")?;
            let events = script.split_whitespace().map(AsynchEvent::parse).collect::<Result<Vec<_>, _>>()?;
            let len = events.len();
            run_asynch(protocol, p.as_ref(), &config, &mut ScriptedAdversary::new(events), len)?
        }
    };
    write_out(&a.out, &trace.to_jsonl())?;
    let (_, line) = verdict(&trace.records, protocol, false, a.mega_rule)?;
    out!("{line}");
    Ok(true)
}

fn explore_graph(target: &Target, starts: &[Vec<ControlColor>], budget: &Budget) -> Result<StateGraph> {
    let protocol = target.protocol()?;
    Ok(match target.scheduler() {
        Scheduler::Ssynch => explore_ssynch(&protocol, target.n, starts, budget)?,
        Scheduler::Asynch => explore_asynch(&protocol, target.n, starts, budget)?,
    })
}

fn explore_cmd(a: ExploreArgs) -> Result<bool> {
    let starts = parse_init(&a.init, a.target.kind, a.target.n)?;
    let graph = explore_graph(&a.target, &starts, &Budget::from_env())?;
    let sg = graph.support_graph();
    if let Some(p) = &a.dot {
        write_out(p, &graph_to_dot(&graph))?;
    }
    if let Some(p) = &a.support_dot {
        write_out(p, &support_graph_to_dot(&sg))?;
    }
    let line = json!({
        "kind": a.target.kind,
        "n": a.target.n,
        "scheduler": a.target.scheduler(),
        "states": graph.node_count(),
        "edges": graph.edge_count(),
        "supports": sg.nodes.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    });
    out!("{line}");
    Ok(true)
}

fn conformance(a: ConformanceArgs) -> Result<bool> {
    let id = a.diagram.unwrap_or_else(|| DiagramId::default_for(a.target.kind));
    let starts = vec![vec![ControlColor::T; a.target.n]];
    let graph = explore_graph(&a.target, &starts, &Budget::from_env())?;
    let report = check_conformance(&graph, id)?;
    let line = jsonl_line(&report);
    out_raw!("{line}");
    write_report(a.report.as_ref(), &line)?;
    Ok(report.pass)
}

fn print_replay(protocol: ControlProtocol, scheduler: Scheduler, cx: Option<&Counterexample>) -> Result<()> {
    if let Some(cx) = cx {
        let ok = replay_counterexample(protocol, scheduler, cx)?;
        out!("{}", json!({ "counterexample": cx, "replays": ok }));
    }
    Ok(())
}

fn selfstab(a: CheckArgs) -> Result<bool> {
    let protocol = a.target.protocol()?;
    let scheduler = a.target.scheduler();
    let report = check_self_stabilization(&protocol, scheduler, a.target.n, a.mega_rule, &Budget::from_env())?;
    let line = jsonl_line(&report);
    out_raw!("{line}");
    write_report(a.report.as_ref(), &line)?;
    if !report.pass {
        print_replay(protocol, scheduler, report.counterexample())?;
    }
    Ok(report.pass)
}

fn rsynch(a: RsynchArgs) -> Result<bool> {
    let t = &a.check.target;
    let protocol = t.protocol()?;
    let scheduler = t.scheduler();
    let start = parse_init(&a.init, t.kind, t.n)?.remove(0);
    let report = check_rsynch_conformance(&protocol, scheduler, t.n, &start, a.check.mega_rule, &Budget::from_env())?;
    let line = jsonl_line(&report);
    out_raw!("{line}");
    write_report(a.check.report.as_ref(), &line)?;
    if !report.pass {
        print_replay(protocol, scheduler, report.counterexample())?;
    }
    Ok(report.pass)
}

fn impossibility(a: ImpossibilityArgs) -> Result<bool> {
    let report = check_theorem10();
    write_report(a.report.as_ref(), &report.to_jsonl())?;
    out!("{}/{} refuted", report.refuted, report.tables.len());
    for t in report.survivors() {
        out!("survivor: table {} ({})", t.table_id, t.encoding);
    }
    let sim2 = refute_protocol(ControlProtocol::new(ProtocolKind::Sim2RsA), [ControlColor::T; 2])?;
    match &sim2 {
        None => out!("sim2-rs-a: no witness"),
        Some(w) => out!("sim2-rs-a: witness {}", serde_json::to_string(w)?),
    }
    Ok(report.pass && sim2.is_none())
}

fn validate(a: ValidateArgs) -> Result<bool> {
    let mut text = String::new();
    if a.path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(&a.path).with_context(|| format!("cannot read {}", a.path.display()))?;
    }
    let records = records_from_jsonl(&text)?;
    let (ok, line) = verdict(&records, ControlProtocol::new(a.kind), a.syncing, a.mega_rule)?;
    out!("{line}");
    Ok(ok)
}
