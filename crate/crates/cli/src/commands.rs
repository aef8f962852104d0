use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use stabcon_core::algorithms::{from_id, DecisionFunction};
use stabcon_core::impossibility::{dll_attack, empty_kernel_demo, nonstabilization_run, verify_witness, AttackError};
use stabcon_core::model::{InputAssignment, LassoPattern, ProcessId};
use stabcon_core::simulator::{
    certification_horizon, random_fair_schedule, run_async, run_sync, ExecutionSpec, DEFAULT_WINDOW,
};
use stabcon_core::topology::{default_pair_horizon, prefix_order_with_witnesses, ExecutionSet, Metric};
use stabcon_core::universal::{family_horizon, properify, strong_reshuffle, LabelingContext};

use crate::docs::*;
use crate::{Cli, CliError, Command, Global};

type CmdResult = Result<String, CliError>;

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value = "minmax")]
    pub alg: String,
    /// `prefix:loop` literal, inline JSON pattern document, or `@file`.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "asynchronous", conflicts_with = "asynchronous")]
    pub pattern: Option<String>,
    /// Comma-separated input ranks, one per process.
    #[arg(long, value_delimiter = ',', required = true)]
    pub inputs: Vec<u32>,
    /// Rounds (events when asynchronous). Default: the certification
    /// horizon, or the whole schedule.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Run on a seeded random fair-lossy asynchronous schedule.
    #[arg(long = "async")]
    pub asynchronous: bool,
    #[arg(long, requires = "asynchronous")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: u32,
    #[arg(long, default_value_t = 0)]
    pub crashes: usize,
    /// Schedule length. Default: 60 events per process.
    #[arg(long)]
    pub events: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DistancesArgs {
    /// `LITERAL@i0,i1`; repeatable.
    #[arg(long = "exec", allow_hyphen_values = true, conflicts_with = "family")]
    pub execs: Vec<String>,
    /// JSON list of execution documents.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// `p:<id>`, `uniform` or `nonuniform`.
    #[arg(long, default_value = "nonuniform")]
    pub metric: String,
    #[arg(long)]
    pub rounds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PrefixOrderArgs {
    #[arg(long)]
    pub k: usize,
}

#[derive(Debug, Args)]
pub struct LabelCheckArgs {
    #[arg(long)]
    pub labeling: PathBuf,
    /// Output the labeling with misplaced boundary members moved.
    #[arg(long, conflicts_with = "reshuffle")]
    pub properify: bool,
    /// Output the labeling relabeled by component broadcasters.
    #[arg(long)]
    pub reshuffle: bool,
    #[arg(long)]
    pub rounds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct UniversalArgs {
    #[arg(long)]
    pub labeling: PathBuf,
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Query a single decision instead of checking the family.
    #[arg(long, requires_all = ["process", "round"])]
    pub member: Option<usize>,
    #[arg(long, requires = "member")]
    pub process: Option<u8>,
    #[arg(long, requires = "member")]
    pub round: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[arg(long, default_value = "minmax")]
    pub alg: String,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 8)]
    pub m_max: usize,
    /// Chain stages with these prefix lengths instead of a single attack.
    #[arg(long, value_delimiter = ',')]
    pub chain: Vec<usize>,
    /// Output changes the chained run must reach.
    #[arg(long, default_value_t = 0, requires = "chain")]
    pub flips: usize,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub pattern: String,
    /// Run the empty-kernel disagreement demo with these inputs.
    #[arg(long, value_delimiter = ',')]
    pub inputs: Vec<u32>,
    #[arg(long, default_value = "minmax")]
    pub alg: String,
    /// Demo horizon. Default: 64 rounds or the certification horizon.
    #[arg(long)]
    pub rounds: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
}

pub fn dispatch(cli: &Cli) -> CmdResult {
    let cap = cli.global.horizon_cap;
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Distances(a) => distances(a, cap),
        Command::PrefixOrder(a) => prefix_order(a),
        Command::LabelCheck(a) => label_check(a, cap),
        Command::Universal(a) => universal(a, cap),
        Command::Attack(a) => attack(a),
        Command::Kernel(a) => kernel(a),
        Command::VerifyWitness(a) => verify(a),
    }
}

/// Writes `text` to `--out` atomically, or to stdout.
pub fn emit(global: &Global, text: &str) -> Result<(), CliError> {
    let Some(path) = &global.out else {
        print!("{text}");
        return Ok(());
    };
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(text.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn failure_json(kind: &str, message: &str) -> String {
    json(&FailureDoc {
        error: kind.into(),
        message: message.into(),
    })
}

fn json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn algorithm(id: &str) -> Result<Box<dyn DecisionFunction>, CliError> {
    Ok(from_id(id)?)
}

fn pattern_arg(s: &str) -> Result<LassoPattern, CliError> {
    match s.strip_prefix('@') {
        Some(path) => PatternDoc::parse_arg(&read(Path::new(path))?),
        None => PatternDoc::parse_arg(s),
    }
}

fn run(a: &RunArgs) -> CmdResult {
    let alg = algorithm(&a.alg)?;
    let inputs = InputAssignment::of(&a.inputs);
    let trace = if a.asynchronous {
        let n = a.n.unwrap_or(a.inputs.len());
        let events = a.events.unwrap_or(60 * n);
        let schedule = random_fair_schedule(n, a.window, a.crashes, events, a.seed)?;
        run_async(&schedule, &inputs, alg.as_ref(), a.rounds.unwrap_or(events).min(events))?
    } else {
        let pattern = pattern_arg(a.pattern.as_deref().unwrap_or_default())?;
        let rounds = a.rounds.unwrap_or_else(|| certification_horizon(&pattern));
        run_sync(&pattern, &inputs, alg.as_ref(), rounds)?
    };
    Ok(json(&TraceDoc::from_trace(&trace)))
}

fn parse_exec(s: &str) -> Result<ExecutionSpec, CliError> {
    let (lit, inputs) = s
        .rsplit_once('@')
        .ok_or_else(|| CliError::Usage(format!("expected LITERAL@inputs, got {s:?}")))?;
    let ranks = inputs
        .split(',')
        .map(|x| x.trim().parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Usage(format!("inputs of {s:?}: {e}")))?;
    Ok(ExecutionSpec::sync(LassoPattern::parse(lit)?, InputAssignment::of(&ranks))?)
}

fn distances(a: &DistancesArgs, cap: usize) -> CmdResult {
    let metric = Metric::parse(&a.metric)?;
    let (ids, specs): (Vec<String>, Vec<ExecutionSpec>) = match &a.family {
        Some(path) => {
            let docs: Vec<ExecutionDoc> = parse_json(path)?;
            let specs = docs.iter().map(|d| d.to_spec()).collect::<Result<Vec<_>, _>>()?;
            ((0..specs.len()).map(|i| format!("e{i}")).collect(), specs)
        }
        None => {
            let specs = a.execs.iter().map(|s| parse_exec(s)).collect::<Result<Vec<_>, _>>()?;
            (a.execs.clone(), specs)
        }
    };
    let Some(first) = specs.first() else {
        return Err(CliError::Usage("no executions given".into()));
    };
    let horizon = match a.rounds {
        Some(h) => h,
        None => {
            let mut h = 0;
            for x in &specs {
                for y in &specs {
                    h = h.max(default_pair_horizon(x, y, cap)?);
                }
            }
            h
        }
    };
    let mut set = ExecutionSet::new(first.n());
    for s in &specs {
        set.add(s.clone(), horizon)?;
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(e.to_string());
    let mut header = vec!["execution".to_string()];
    header.extend(ids.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    for (i, id) in ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend((0..specs.len()).map(|j| set.distance(i, j, metric).to_string()));
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn prefix_order(a: &PrefixOrderArgs) -> CmdResult {
    let (order, witnesses) = prefix_order_with_witnesses(a.k)?;
    let prefixes = order
        .iter()
        .enumerate()
        .map(|(index, p)| PrefixEntry {
            index,
            prefix: links_literal(p),
            next_indistinguishable_to: witnesses.get(index).map(|q| q.0),
        })
        .collect();
    Ok(json(&PrefixOrderDoc { k: a.k, prefixes }))
}

fn load_labeling(path: &Path) -> Result<stabcon_core::universal::DecisionLabeling, CliError> {
    let doc: LabelingDoc = parse_json(path)?;
    Ok(doc.to_labeling()?)
}

fn context(path: &Path, rounds: Option<usize>, cap: usize) -> Result<LabelingContext, CliError> {
    let labeling = load_labeling(path)?;
    let specs: Vec<ExecutionSpec> = labeling.members.iter().map(|m| m.spec.clone()).collect();
    let horizon = rounds.unwrap_or_else(|| family_horizon(&specs, cap));
    LabelingContext::new(labeling, Some(horizon)).map_err(|e| CliError::violation("invalid-labeling", e.to_string()))
}

#[derive(Serialize)]
struct LabelCheckDoc {
    valid: bool,
    horizon: usize,
    members: usize,
    decision_sets: Vec<DecisionSetDoc>,
}

#[derive(Serialize)]
struct DecisionSetDoc {
    label: i64,
    members: Vec<usize>,
}

fn label_check(a: &LabelCheckArgs, cap: usize) -> CmdResult {
    let invalid = |e: stabcon_core::Error| CliError::violation("invalid-labeling", e.to_string());
    if a.properify || a.reshuffle {
        let labeling = load_labeling(&a.labeling)?;
        let out = if a.properify {
            properify(&labeling).map_err(invalid)?
        } else {
            let specs: Vec<ExecutionSpec> = labeling.members.iter().map(|m| m.spec.clone()).collect();
            let horizon = a.rounds.unwrap_or_else(|| family_horizon(&specs, cap));
            strong_reshuffle(&labeling, Some(horizon)).map_err(invalid)?
        };
        return Ok(json(&LabelingDoc::from_labeling(&out)));
    }
    let ctx = context(&a.labeling, a.rounds, cap)?;
    let l = ctx.labeling();
    let decision_sets = l
        .values
        .members()
        .map(|v| DecisionSetDoc {
            label: l.values.raw(v),
            members: l.decision_set(v),
        })
        .collect();
    Ok(json(&LabelCheckDoc {
        valid: true,
        horizon: ctx.horizon(),
        members: l.members.len(),
        decision_sets,
    }))
}

fn universal(a: &UniversalArgs, cap: usize) -> CmdResult {
    let ctx = context(&a.labeling, a.rounds, cap)?;
    if let (Some(member), Some(p), Some(t)) = (a.member, a.process, a.round) {
        let p = ProcessId(p);
        let candidates = ctx.candidate_set(member, p, t)?;
        let (value, case) = ctx.universal_decide(member, p, t)?;
        return Ok(json(&DecisionDoc {
            member,
            process: p.0,
            round: t,
            candidates,
            value: ctx.labeling().values.raw(value),
            case: format!("{case:?}").to_lowercase(),
        }));
    }
    let report = ctx.check_stabilizing();
    let doc = json(&UniversalDoc::new(ctx.labeling(), ctx.horizon(), &report));
    if report.passed() {
        Ok(doc)
    } else {
        let first = report.violations().next().expect("a violation");
        Err(CliError::Violation {
            kind: "not-stabilizing".into(),
            message: format!("member {}: {}", first.index, first.violation.as_deref().unwrap_or_default()),
            report: Some(doc),
        })
    }
}

fn attack_kind(e: &AttackError) -> &'static str {
    match e {
        AttackError::DomainMismatch { .. } => "domain-mismatch",
        AttackError::Validity { .. } => "validity",
        AttackError::Uncertified { .. } => "uncertified",
        AttackError::NoFlip { .. } => "no-flip",
        AttackError::NoConflict { .. } => "no-conflict",
        AttackError::Stage { source, .. } => attack_kind(source),
        AttackError::Model(_) => "precondition",
    }
}

fn attack(a: &AttackArgs) -> CmdResult {
    let alg = algorithm(&a.alg)?;
    let fail = |e: AttackError| CliError::violation(attack_kind(&e), e.to_string());
    if a.chain.is_empty() {
        let w = dll_attack(alg.as_ref(), a.k, a.m_max).map_err(fail)?;
        Ok(json(&WitnessDoc::from_witness(&w)))
    } else {
        let r = nonstabilization_run(alg.as_ref(), &a.chain, a.m_max, a.flips).map_err(fail)?;
        Ok(json(&ChainDoc::from_run(&r)))
    }
}

fn kernel(a: &KernelArgs) -> CmdResult {
    let pattern = pattern_arg(&a.pattern)?;
    let demo = if a.inputs.is_empty() {
        None
    } else {
        let alg = algorithm(&a.alg)?;
        let horizon = a.rounds.unwrap_or_else(|| certification_horizon(&pattern).max(64));
        let report = empty_kernel_demo(alg.as_ref(), &pattern, InputAssignment::of(&a.inputs), horizon)?;
        Some((&report).into())
    };
    Ok(json(&KernelDoc {
        pattern: PatternDoc::from_pattern(&pattern),
        kernel: pattern.kernel().iter().map(|p| p.0).collect(),
        demo,
    }))
}

#[derive(Serialize)]
struct VerifiedDoc {
    valid: bool,
    algorithm: String,
    k: usize,
    m: usize,
    conflict_round: usize,
}

fn verify(a: &VerifyArgs) -> CmdResult {
    let doc: WitnessDoc = parse_json(&a.file)?;
    let w = doc.to_witness()?;
    let alg = algorithm(&doc.algorithm)?;
    let bad = |msg: String| CliError::violation("invalid-witness", msg);
    if doc.conflict_round != w.conflict_round() {
        return Err(bad(format!("conflict_round {} is not k + m = {}", doc.conflict_round, w.conflict_round())));
    }
    verify_witness(&w, alg.as_ref()).map_err(bad)?;
    Ok(json(&VerifiedDoc {
        valid: true,
        algorithm: w.algorithm.clone(),
        k: w.k,
        m: w.m,
        conflict_round: w.conflict_round(),
    }))
}
