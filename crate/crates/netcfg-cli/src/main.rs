//! `netcfg`: drive the intent pipeline from a terminal.
//!
//! Subcommands mirror the pipeline's lifecycle: `run` one intent, `batch` a
//! dataset, `show` what the repository holds for an intent, `metrics` a
//! previously written metrics file, `topology` the network model, and
//! `validate-config` a configuration bundle without running the loop.
//!
//! Exit codes form a closed contract so scripts can branch on outcomes:
//! `0` approved (or the command completed), `1` usage or I/O failure, `2`
//! intent rejected as unsupported, `3` cycle budget exhausted (and failed
//! validation), `4` backend failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use netcfg_core::backend::{
    build_backend, rules::RulesBackend, split_config_bundle, Backend, BackendDescriptor,
    FaultSchedule, FaultSpec, ENV_URL,
};
use netcfg_core::clock::ClockMode;
use netcfg_core::intent::{load_dataset, Complexity, Intent};
use netcfg_core::model::{parse_config, NetworkModel, Severity, Stanza};
use netcfg_core::orchestrator::{
    BatchOutcome, OrchestrationResult, Orchestrator, OrchestratorConfig, RunStatus,
    DEFAULT_THRESHOLD,
};
use netcfg_core::repo::ConfigsRepo;

#[derive(Parser)]
#[command(name = "netcfg", version, about = "Closed-loop, intent-driven network configuration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one natural-language intent through the pipeline.
    Run(RunArgs),
    /// Run every intent in a JSONL dataset and write aggregate metrics.
    Batch(BatchArgs),
    /// Show the stored versions and audit trail of one intent.
    Show(ShowArgs),
    /// Summarise a metrics file written by `batch`.
    Metrics(MetricsArgs),
    /// Describe the network model: devices, links, hosts.
    Topology(TopologyArgs),
    /// Check a configuration bundle against the grammar and the model.
    #[command(name = "validate-config")]
    ValidateConfig(ValidateConfigArgs),
}

/// Which completion backend drives the loop.
#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    /// Deterministic built-in backend; works offline.
    Rules,
    /// Chat-completion endpoint configured through NETCFG_LLM_* variables.
    Http,
}

/// Where timestamps come from.
#[derive(Clone, Copy, ValueEnum)]
enum ClockChoice {
    /// Wall clock; timings are real latencies.
    System,
    /// Counter-based clock; repeated runs replay byte-for-byte.
    Logical,
}

impl From<ClockChoice> for ClockMode {
    fn from(choice: ClockChoice) -> Self {
        match choice {
            ClockChoice::System => ClockMode::System,
            ClockChoice::Logical => ClockMode::Logical,
        }
    }
}

/// When injected faults fire.
#[derive(Clone, Copy, ValueEnum)]
enum ScheduleChoice {
    /// Every cycle, so a faulted intent can never recover.
    Always,
    /// Only the first cycle, so refinement gets to repair the damage.
    FirstCycleOnly,
}

impl From<ScheduleChoice> for FaultSchedule {
    fn from(choice: ScheduleChoice) -> Self {
        match choice {
            ScheduleChoice::Always => FaultSchedule::Always,
            ScheduleChoice::FirstCycleOnly => FaultSchedule::FirstCycleOnly,
        }
    }
}

/// Flags shared by every command that runs the pipeline.
#[derive(Args)]
struct PipelineOpts {
    /// Network model file (topology JSON).
    #[arg(long)]
    topology: PathBuf,

    /// Completion backend.
    #[arg(long, value_enum, default_value_t = BackendChoice::Rules)]
    backend: BackendChoice,

    /// Generate–verify cycles before an intent is given up.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u32,

    /// Timestamp source; `logical` makes runs replay byte-for-byte.
    #[arg(long, value_enum, default_value_t = ClockChoice::System)]
    clock: ClockChoice,

    /// Inject faults into the rules backend: `kind:prob[,kind:prob]*` with
    /// kinds `class`, `json`, `syntax` and probabilities in [0,1].
    #[arg(long)]
    faults: Option<String>,

    /// When injected faults fire.
    #[arg(long, value_enum, default_value_t = ScheduleChoice::Always)]
    schedule: ScheduleChoice,

    /// Seed for picking which intents the faults hit.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl PipelineOpts {
    fn load_model(&self) -> Result<NetworkModel> {
        NetworkModel::from_file(&self.topology)
            .with_context(|| format!("cannot load topology {}", self.topology.display()))
    }

    /// Build the backend the options describe. Fault injection needs the ids
    /// of every intent in the run so the plan is resolved up front.
    fn build_backend(&self, intent_ids: &[String]) -> Result<Arc<dyn Backend>> {
        match self.backend {
            BackendChoice::Rules => {
                let backend = match &self.faults {
                    Some(spec) => {
                        let probabilities = FaultSpec::parse_probabilities(spec)?;
                        let spec = FaultSpec::new(probabilities, self.schedule.into(), self.seed);
                        RulesBackend::with_plan(spec.resolve(intent_ids))
                    }
                    None => RulesBackend::new(),
                };
                Ok(Arc::new(backend))
            }
            BackendChoice::Http => {
                if self.faults.is_some() {
                    bail!("--faults drives the rules backend; it cannot be combined with --backend http");
                }
                let descriptor = BackendDescriptor::http_from_env()
                    .ok_or_else(|| anyhow!("--backend http needs the {ENV_URL} environment variable"))?;
                Ok(build_backend(&descriptor)?)
            }
        }
    }

    fn config(&self) -> OrchestratorConfig {
        OrchestratorConfig {
            threshold: self.threshold,
            clock_mode: self.clock.into(),
            ..OrchestratorConfig::default()
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// The intent, in plain language.
    text: String,

    /// Identifier the result is stored under.
    #[arg(long, default_value = "cli-intent")]
    id: String,

    #[command(flatten)]
    pipeline: PipelineOpts,

    /// Repository directory for approved configurations and audit trails.
    #[arg(long, default_value = "./netcfg-repo")]
    out: PathBuf,

    /// Emit the full result as JSON instead of a summary line.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BatchArgs {
    /// JSONL dataset: one intent record per line.
    dataset: PathBuf,

    #[command(flatten)]
    pipeline: PipelineOpts,

    /// Repository directory for approved configurations and audit trails.
    #[arg(long, default_value = "./netcfg-repo")]
    out: PathBuf,

    /// Where the aggregate metrics JSON is written.
    #[arg(long, default_value = "./netcfg-metrics.json")]
    metrics_out: PathBuf,

    /// Worker threads running intents in parallel.
    #[arg(long, default_value_t = 1)]
    workers: usize,

    /// Emit results and metrics as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ShowArgs {
    /// Intent identifier to inspect.
    intent_id: String,

    /// Repository directory.
    #[arg(long, default_value = "./netcfg-repo")]
    out: PathBuf,

    /// Emit the stored state as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MetricsArgs {
    /// Metrics file written by `netcfg batch`.
    #[arg(long, default_value = "./netcfg-metrics.json")]
    file: PathBuf,

    /// Print the raw JSON instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TopologyArgs {
    /// Network model file (topology JSON).
    #[arg(long)]
    topology: PathBuf,

    /// Emit the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ValidateConfigArgs {
    /// Configuration bundle: a device-name line, its configuration, `~~~`
    /// between devices.
    path: PathBuf,

    /// Network model the device names are checked against.
    #[arg(long)]
    topology: PathBuf,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version arrive here too; keep their success exit
            // while folding real usage errors into exit code 1.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Batch(args) => cmd_batch(args),
        Command::Show(args) => cmd_show(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Topology(args) => cmd_topology(args),
        Command::ValidateConfig(args) => cmd_validate_config(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn status_exit(status: RunStatus) -> u8 {
    match status {
        RunStatus::Approved => 0,
        RunStatus::RejectedOther => 2,
        RunStatus::Exhausted => 3,
        RunStatus::BackendFailed => 4,
    }
}

fn cmd_run(args: RunArgs) -> Result<u8> {
    let model = args.pipeline.load_model()?;
    let intent = Intent {
        id: args.id,
        text: args.text,
        expected_class: None,
        complexity: Complexity::Simple,
    };
    let backend = args.pipeline.build_backend(std::slice::from_ref(&intent.id))?;
    let repo = ConfigsRepo::open(&args.out)?;
    let orchestrator = Orchestrator::new(backend, model, args.pipeline.config());
    let result = orchestrator.run_intent(&intent, Some(&repo))?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result)?);
    } else {
        println!("{}", describe_result(&result));
    }
    Ok(status_exit(result.status))
}

fn describe_result(result: &OrchestrationResult) -> String {
    let class = result.class.map_or("-", |c| c.name());
    let mut line = format!(
        "intent {}: {}, class={}, cycles={}",
        result.intent_id,
        result.status.name(),
        class,
        result.cycles
    );
    if let Some(version) = result.stored_version {
        line.push_str(&format!(", version=v{version}"));
    }
    if let Some(failure) = &result.failure {
        line.push_str(&format!(" — {failure}"));
    }
    line
}

fn cmd_batch(args: BatchArgs) -> Result<u8> {
    let model = args.pipeline.load_model()?;
    let intents = load_dataset(&args.dataset)
        .with_context(|| format!("cannot load dataset {}", args.dataset.display()))?;
    if intents.is_empty() {
        bail!("dataset {} holds no intents", args.dataset.display());
    }
    let ids: Vec<String> = intents.iter().map(|i| i.id.clone()).collect();
    let backend = args.pipeline.build_backend(&ids)?;
    let repo = ConfigsRepo::open(&args.out)?;
    let orchestrator = Orchestrator::new(backend, model, args.pipeline.config());
    let outcome = orchestrator.run_batch(&intents, Some(&repo), args.workers)?;

    let metrics_json = outcome.metrics.to_json();
    std::fs::write(&args.metrics_out, format!("{metrics_json}\n"))
        .with_context(|| format!("cannot write metrics to {}", args.metrics_out.display()))?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&outcome)?);
    } else {
        print_batch_table(&outcome);
        println!("metrics written to {}", args.metrics_out.display());
    }
    Ok(0)
}

fn print_batch_table(outcome: &BatchOutcome) {
    println!(
        "{:<12} {:<7} {:<9} {:<15} {:>6}  {}",
        "intent", "class", "expected", "status", "cycles", "stored"
    );
    for result in &outcome.results {
        let class = result.class.map_or("-", |c| c.name());
        let expected = result.expected_class.map_or("-", |c| c.name());
        let stored = result
            .stored_version
            .map_or_else(|| "-".to_string(), |v| format!("v{v}"));
        println!(
            "{:<12} {:<7} {:<9} {:<15} {:>6}  {}",
            result.intent_id,
            class,
            expected,
            result.status.name(),
            result.cycles,
            stored
        );
    }
    println!();

    let metrics = &outcome.metrics;
    println!(
        "{} intents: {} approved, {} rejected_other, {} exhausted, {} backend_failed",
        metrics.total,
        metrics.approved,
        metrics.rejected_other,
        metrics.exhausted,
        metrics.backend_failed
    );
    match metrics.classification_accuracy {
        Some(accuracy) => println!("classification accuracy {accuracy:.3}"),
        None => println!("classification accuracy n/a (no labelled intents)"),
    }
    println!("Other rate {:.3}", metrics.other_rate);

    let histogram = cycle_histogram(&outcome.results);
    let cells: Vec<String> = histogram
        .iter()
        .map(|(cycles, count)| format!("{cycles}:{count}"))
        .collect();
    println!("cycle histogram (cycles:intents) {}", cells.join(" "));
}

fn cycle_histogram(results: &[OrchestrationResult]) -> BTreeMap<u32, usize> {
    let mut histogram = BTreeMap::new();
    for result in results {
        *histogram.entry(result.cycles).or_insert(0) += 1;
    }
    histogram
}

fn cmd_show(args: ShowArgs) -> Result<u8> {
    let repo = ConfigsRepo::open(&args.out)?;
    let versions = repo.versions(&args.intent_id)?;
    let audit = repo.audit_trail(&args.intent_id)?;
    if versions.is_empty() && audit.is_empty() {
        bail!(
            "nothing stored for intent '{}' in {}",
            args.intent_id,
            args.out.display()
        );
    }

    if args.json {
        let mut stored = Vec::new();
        for v in &versions {
            let (bundle, meta) = repo.load(&args.intent_id, *v)?;
            let report = repo.load_report(&args.intent_id, *v)?;
            stored.push(serde_json::json!({
                "version": v,
                "class": meta.class.name(),
                "devices": meta.devices,
                "stored_at": meta.stored_at,
                "passed": report.passed,
                "sections": bundle.sections,
            }));
        }
        let cycles: Vec<_> = audit
            .iter()
            .map(|record| {
                serde_json::json!({
                    "cycle": record.cycle,
                    "passed": record.report.passed,
                    "codes": record.report.codes().iter().map(|c| c.name()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let document = serde_json::json!({
            "intent_id": args.intent_id,
            "versions": stored,
            "audit": cycles,
        });
        println!("{}", serde_json::to_string_pretty(&document)?);
        return Ok(0);
    }

    println!(
        "intent {}: {} stored version(s), {} audited cycle(s)",
        args.intent_id,
        versions.len(),
        audit.len()
    );
    for v in &versions {
        let (_, meta) = repo.load(&args.intent_id, *v)?;
        let report = repo.load_report(&args.intent_id, *v)?;
        println!(
            "  v{}: class={}, devices={}, stored {}, {}",
            v,
            meta.class.name(),
            meta.devices.join(","),
            meta.stored_at.format("%Y-%m-%dT%H:%M:%SZ"),
            if report.passed { "passed" } else { "failed" }
        );
    }
    for record in &audit {
        if record.report.passed {
            println!("  cycle {}: pass", record.cycle);
        } else {
            let codes: Vec<&str> = record.report.codes().iter().map(|c| c.name()).collect();
            println!("  cycle {}: fail [{}]", record.cycle, codes.join(", "));
        }
    }
    Ok(0)
}

fn cmd_metrics(args: MetricsArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&args.file)
        .with_context(|| format!("cannot read metrics file {}", args.file.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("metrics file {} is not valid JSON", args.file.display()))?;
    if args.json {
        print!("{text}");
        if !text.ends_with('\n') {
            println!();
        }
        return Ok(0);
    }

    let count = |key: &str| value.get(key).and_then(|v| v.as_u64()).unwrap_or(0);
    println!(
        "{} intents: {} approved, {} rejected_other, {} exhausted, {} backend_failed",
        count("total"),
        count("approved"),
        count("rejected_other"),
        count("exhausted"),
        count("backend_failed")
    );
    match value.get("classification_accuracy").and_then(|v| v.as_f64()) {
        Some(accuracy) => println!("classification accuracy {accuracy:.3}"),
        None => println!("classification accuracy n/a (no labelled intents)"),
    }
    if let Some(rate) = value.get("other_rate").and_then(|v| v.as_f64()) {
        println!("Other rate {rate:.3}");
    }
    if let Some(map) = value.get("mean_cycles_to_approval").and_then(|v| v.as_object()) {
        for (bucket, mean) in map {
            if let Some(mean) = mean.as_f64() {
                println!("mean cycles to approval ({bucket}) {mean:.2}");
            }
        }
    }
    if let Some(map) = value.get("timings_ms").and_then(|v| v.as_object()) {
        for (stage, stats) in map {
            let p50 = stats.get("p50").and_then(|v| v.as_u64()).unwrap_or(0);
            let mean = stats.get("mean").and_then(|v| v.as_f64()).unwrap_or(0.0);
            let max = stats.get("max").and_then(|v| v.as_u64()).unwrap_or(0);
            println!("stage {stage}: p50 {p50} ms, mean {mean:.1} ms, max {max} ms");
        }
    }
    if let Some(map) = value.get("confusion").and_then(|v| v.as_object()) {
        let cells: Vec<String> = map
            .iter()
            .filter_map(|(pair, n)| n.as_u64().map(|n| format!("{pair}:{n}")))
            .collect();
        if !cells.is_empty() {
            println!("confusion {}", cells.join(" "));
        }
    }
    Ok(0)
}

fn cmd_topology(args: TopologyArgs) -> Result<u8> {
    let model = NetworkModel::from_file(&args.topology)
        .with_context(|| format!("cannot load topology {}", args.topology.display()))?;

    if args.json {
        let devices: Vec<_> = model
            .devices
            .iter()
            .map(|(name, ast)| {
                let counts = stanza_counts(ast.stanzas.iter());
                serde_json::json!({
                    "name": name,
                    "interfaces": counts.interfaces,
                    "tunnels": counts.tunnels,
                    "acls": counts.acls,
                    "ospf_processes": counts.ospf,
                })
            })
            .collect();
        let links: Vec<_> = model
            .links
            .iter()
            .map(|l| serde_json::json!({ "a": l.endpoint_a(), "b": l.endpoint_b() }))
            .collect();
        let hosts: Vec<_> = model
            .hosts
            .iter()
            .map(|h| {
                serde_json::json!({
                    "name": h.name,
                    "attached": format!("{}:{}", h.device, h.iface),
                    "ip": h.ip.to_string(),
                })
            })
            .collect();
        let document = serde_json::json!({
            "devices": devices,
            "links": links,
            "hosts": hosts,
        });
        println!("{}", serde_json::to_string_pretty(&document)?);
        return Ok(0);
    }

    println!(
        "{} device(s), {} link(s), {} host(s)",
        model.devices.len(),
        model.links.len(),
        model.hosts.len()
    );
    for (name, ast) in &model.devices {
        let counts = stanza_counts(ast.stanzas.iter());
        println!(
            "  {name}: {} interface(s), {} tunnel(s), {} acl(s), {} ospf process(es)",
            counts.interfaces, counts.tunnels, counts.acls, counts.ospf
        );
    }
    for link in &model.links {
        println!("  {} <-> {}", link.endpoint_a(), link.endpoint_b());
    }
    for host in &model.hosts {
        println!("  host {} at {}:{} ({})", host.name, host.device, host.iface, host.ip);
    }
    Ok(0)
}

struct StanzaCounts {
    interfaces: usize,
    tunnels: usize,
    acls: usize,
    ospf: usize,
}

fn stanza_counts<'a>(stanzas: impl Iterator<Item = &'a Stanza>) -> StanzaCounts {
    let mut counts = StanzaCounts { interfaces: 0, tunnels: 0, acls: 0, ospf: 0 };
    for stanza in stanzas {
        match stanza {
            Stanza::Interface(_) => counts.interfaces += 1,
            Stanza::Tunnel(_) => counts.tunnels += 1,
            Stanza::Acl(_) => counts.acls += 1,
            Stanza::Ospf(_) => counts.ospf += 1,
        }
    }
    counts
}

fn cmd_validate_config(args: ValidateConfigArgs) -> Result<u8> {
    let model = NetworkModel::from_file(&args.topology)
        .with_context(|| format!("cannot load topology {}", args.topology.display()))?;
    let text = std::fs::read_to_string(&args.path)
        .with_context(|| format!("cannot read {}", args.path.display()))?;

    let bundle = match split_config_bundle(&text) {
        Ok(bundle) => bundle,
        Err(err) => {
            println!("malformed bundle: {err}");
            return Ok(3);
        }
    };

    let mut failed = false;
    for section in &bundle.sections {
        if model.device(&section.device).is_none() {
            println!(
                "{}: [UNKNOWN_DEVICE] device is not part of the network model",
                section.device
            );
            failed = true;
        }
        let outcome = parse_config(&section.device, &section.text);
        for issue in &outcome.issues {
            println!("{}: {issue}", section.device);
            if issue.severity == Severity::Error {
                failed = true;
            }
        }
    }

    if failed {
        Ok(3)
    } else {
        println!("ok: {} device section(s) parse cleanly", bundle.sections.len());
        Ok(0)
    }
}
