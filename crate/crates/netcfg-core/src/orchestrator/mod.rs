//! The closed loop: classify, translate, generate, verify, refine, store.
//!
//! [`Orchestrator::run_intent`] drives one intent through the pipeline.
//! Classification happens once; an intent filed under `Other` is rejected
//! immediately, before any translation or generation. Everything after that
//! runs inside a bounded cycle budget: each cycle produces (or refines) a
//! candidate, verifies it against the network model, and either stores an
//! approved version in the repository or feeds the verifier's errors and
//! suggestions back into the next cycle. Failed translations also cost a
//! cycle — a malformed low-level description is a failed attempt, not a free
//! retry.
//!
//! Backend failures are outcomes, not panics: a run that dies on transport
//! ends in [`RunStatus::BackendFailed`] with the error preserved, so a batch
//! never loses the rest of its intents to one flaky endpoint.

pub mod metrics;

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::backend::{
    extract_class, extract_lld, split_config_bundle, Backend, BackendError, DecodingParams,
};
use crate::clock::{Clock, ClockMode};
use crate::intent::{validate_lld, Complexity, Intent, IntentClass, LowLevelDescription};
use crate::model::{ApplyError, ConfigBundle, DeviceInventory, NetworkModel, NetworkStatusSnapshot};
use crate::prompt::{PromptBundle, PromptError, Prompts};
use crate::repo::{ConfigsRepo, RepoError};
use crate::verify::{check_syntax, verify, ErrorCode, VerificationError, VerificationReport};

pub use metrics::{BatchMetrics, StageStats};

/// Default number of generate–verify cycles before an intent is given up.
pub const DEFAULT_THRESHOLD: u32 = 5;

/// Tuning knobs for a run.
#[derive(Debug, Clone)]
pub struct OrchestratorConfig {
    /// Maximum generate–verify cycles per intent; values below 1 act as 1.
    pub threshold: u32,
    pub decoding: DecodingParams,
    /// `Logical` replays byte-for-byte; `System` records real latencies.
    pub clock_mode: ClockMode,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            decoding: DecodingParams::default(),
            clock_mode: ClockMode::System,
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// A candidate passed verification and was stored.
    Approved,
    /// Classification filed the intent under `Other`; nothing was attempted.
    RejectedOther,
    /// The cycle budget ran out without an approved candidate.
    Exhausted,
    /// The backend failed hard (transport, timeout, missing rule).
    BackendFailed,
}

impl RunStatus {
    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Approved => "approved",
            RunStatus::RejectedOther => "rejected_other",
            RunStatus::Exhausted => "exhausted",
            RunStatus::BackendFailed => "backend_failed",
        }
    }
}

/// One pipeline stage with its duration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub millis: u64,
}

/// Everything a run produced, whatever its ending.
#[derive(Debug, Clone, Serialize)]
pub struct OrchestrationResult {
    pub intent_id: String,
    pub status: RunStatus,
    /// The class the intent was filed under; absent when the backend died
    /// before classification finished.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<IntentClass>,
    /// Generate–verify cycles consumed (0 for rejected intents).
    pub cycles: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stored_version: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_report: Option<VerificationReport>,
    /// Backend error text when `status` is `BackendFailed`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub timings: Vec<StageTiming>,
    pub complexity: Complexity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_class: Option<IntentClass>,
}

/// A batch run: per-intent results in input order, plus aggregates.
#[derive(Debug, Clone, Serialize)]
pub struct BatchOutcome {
    pub results: Vec<OrchestrationResult>,
    pub metrics: BatchMetrics,
}

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("repository failure: {0}")]
    Repo(#[from] RepoError),
    #[error("prompt assembly failed: {0}")]
    Prompt(#[from] PromptError),
    #[error("batch needs at least one intent")]
    EmptyBatch,
    #[error("duplicate intent id '{0}' in the batch")]
    DuplicateIntent(String),
}

/// The pipeline driver. Holds the backend, the baseline network model, and
/// the prompt builders; each intent runs against a fresh clone of the
/// baseline, so runs never contaminate each other.
pub struct Orchestrator {
    backend: Arc<dyn Backend>,
    baseline: NetworkModel,
    prompts: Prompts,
    config: OrchestratorConfig,
}

impl Orchestrator {
    pub fn new(backend: Arc<dyn Backend>, baseline: NetworkModel, config: OrchestratorConfig) -> Self {
        Self { backend, baseline, prompts: Prompts::default(), config }
    }

    pub fn baseline(&self) -> &NetworkModel {
        &self.baseline
    }

    fn timed_complete(
        &self,
        clock: &dyn Clock,
        timings: &mut Vec<StageTiming>,
        stage: &'static str,
        prompt: &PromptBundle,
    ) -> Result<String, BackendError> {
        let started = clock.now();
        let answer = self.backend.complete(prompt, &self.config.decoding);
        let finished = clock.now();
        timings.push(StageTiming {
            stage,
            millis: (finished - started).num_milliseconds().max(0) as u64,
        });
        answer
    }

    /// Split, syntax-check, apply, and semantically verify one answer.
    /// Always returns a report; unsplittable answers and unknown devices are
    /// verification failures like any other, so the loop can refine on them.
    fn judge(
        &self,
        answer: &str,
        lld: &LowLevelDescription,
        clock: &dyn Clock,
    ) -> (ConfigBundle, VerificationReport) {
        let fallback_device =
            || lld.targets.first().cloned().unwrap_or_else(|| "-".to_string());
        let bundle = match split_config_bundle(answer) {
            Ok(bundle) => bundle,
            Err(e) => {
                let error = VerificationError {
                    code: ErrorCode::Syntax,
                    device: fallback_device(),
                    location: None,
                    message: format!("the answer is not a device-sectioned configuration: {e}"),
                };
                let report =
                    VerificationReport::new(&lld.intent_id, lld.class, vec![error], clock.now());
                return (ConfigBundle::default(), report);
            }
        };
        let syntax_errors = check_syntax(&bundle);
        if !syntax_errors.is_empty() {
            let report =
                VerificationReport::new(&lld.intent_id, lld.class, syntax_errors, clock.now());
            return (bundle, report);
        }
        let report = match self.baseline.apply_candidate(&bundle) {
            Ok(outcome) => {
                for warning in &outcome.warnings {
                    log::debug!("apply warning for {}: {warning}", lld.intent_id);
                }
                verify(&self.baseline, &outcome.model, lld, clock.now())
            }
            Err(ApplyError::UnknownDevice(device)) => {
                let error = VerificationError {
                    code: ErrorCode::UnknownDevice,
                    device: device.clone(),
                    location: None,
                    message: format!("the network has no device named '{device}'"),
                };
                VerificationReport::new(&lld.intent_id, lld.class, vec![error], clock.now())
            }
            // check_syntax ran first, so this arm is defensive.
            Err(ApplyError::Syntax { device, issues }) => {
                let errors = issues
                    .into_iter()
                    .map(|issue| VerificationError {
                        code: ErrorCode::Syntax,
                        device: device.clone(),
                        location: Some(format!("line {}", issue.line)),
                        message: issue.message,
                    })
                    .collect();
                VerificationReport::new(&lld.intent_id, lld.class, errors, clock.now())
            }
        };
        (bundle, report)
    }

    fn translation_failure_report(
        &self,
        intent: &Intent,
        class: IntentClass,
        at: DateTime<Utc>,
        message: String,
    ) -> VerificationReport {
        let error =
            VerificationError { code: ErrorCode::Syntax, device: "-".into(), location: None, message };
        VerificationReport::new(&intent.id, class, vec![error], at)
    }

    /// Drive one intent through the loop. `repo` receives the audit record
    /// of every cycle and the approved version, if any; pass `None` for a
    /// dry run that touches no disk.
    pub fn run_intent(
        &self,
        intent: &Intent,
        repo: Option<&ConfigsRepo>,
    ) -> Result<OrchestrationResult, OrchestratorError> {
        let clock = self.config.clock_mode.make();
        let threshold = self.config.threshold.max(1);
        let mut timings: Vec<StageTiming> = Vec::new();
        let mut result = OrchestrationResult {
            intent_id: intent.id.clone(),
            status: RunStatus::BackendFailed,
            class: None,
            cycles: 0,
            stored_version: None,
            final_report: None,
            failure: None,
            timings: Vec::new(),
            complexity: intent.complexity,
            expected_class: intent.expected_class,
        };

        // Stage 1: classification, once per intent.
        let prompt = self.prompts.classification(intent)?;
        let answer = match self.timed_complete(clock.as_ref(), &mut timings, "classify", &prompt) {
            Ok(answer) => answer,
            Err(e) => return Ok(backend_failed(result, timings, e)),
        };
        let class = extract_class(&answer);
        result.class = Some(class);
        if class == IntentClass::Other {
            log::info!("intent {} rejected as Other", intent.id);
            result.status = RunStatus::RejectedOther;
            result.timings = timings;
            return Ok(result);
        }

        let status = NetworkStatusSnapshot::capture(&self.baseline);
        let inventory = DeviceInventory::from_model(&self.baseline);
        let mut lld: Option<LowLevelDescription> = None;
        let mut previous: Option<(ConfigBundle, VerificationReport)> = None;
        let mut last_report: Option<VerificationReport> = None;

        while result.cycles < threshold {
            result.cycles += 1;

            // Stage 2: translation, repeated until a valid low-level
            // description exists. A failed translation consumes the cycle.
            if lld.is_none() {
                let prompt = self.prompts.translation(intent, class, &status)?;
                let answer =
                    match self.timed_complete(clock.as_ref(), &mut timings, "translate", &prompt) {
                        Ok(answer) => answer,
                        Err(e) => return Ok(backend_failed(result, timings, e)),
                    };
                let failure = match extract_lld(&answer, class) {
                    Ok(parsed) => {
                        let issues = validate_lld(&parsed, &self.baseline);
                        if issues.is_empty() {
                            lld = Some(parsed);
                            None
                        } else {
                            let joined = issues
                                .iter()
                                .map(|i| i.to_string())
                                .collect::<Vec<_>>()
                                .join("; ");
                            Some(format!("low-level description rejected: {joined}"))
                        }
                    }
                    Err(e) => Some(format!("low-level description: {e}")),
                };
                if let Some(message) = failure {
                    let report =
                        self.translation_failure_report(intent, class, clock.now(), message);
                    if let Some(repo) = repo {
                        repo.record_cycle(&intent.id, &answer, &report)?;
                    }
                    last_report = Some(report);
                    continue;
                }
            }
            let lld_ref = lld.as_ref().expect("translation succeeded");

            // Stage 3: generation, or refinement once a failed candidate
            // and its report exist to be quoted back.
            let (stage, prompt) = match &previous {
                Some((bundle, report)) => ("refine", self.prompts.refine(bundle, report, lld_ref)?),
                None => ("generate", self.prompts.generation(lld_ref, &inventory)?),
            };
            let answer = match self.timed_complete(clock.as_ref(), &mut timings, stage, &prompt) {
                Ok(answer) => answer,
                Err(e) => return Ok(backend_failed(result, timings, e)),
            };

            // Stage 4: the verdict.
            let started = clock.now();
            let (bundle, report) = self.judge(&answer, lld_ref, clock.as_ref());
            let finished = clock.now();
            timings.push(StageTiming {
                stage: "verify",
                millis: (finished - started).num_milliseconds().max(0) as u64,
            });

            if let Some(repo) = repo {
                repo.record_cycle(&intent.id, &answer, &report)?;
            }
            if report.passed {
                if let Some(repo) = repo {
                    let stored = repo.store_approved(&bundle, &report, clock.now())?;
                    result.stored_version = Some(stored.version);
                }
                log::info!(
                    "intent {} approved after {} cycle(s)",
                    intent.id,
                    result.cycles
                );
                result.status = RunStatus::Approved;
                result.final_report = Some(report);
                result.timings = timings;
                return Ok(result);
            }
            log::info!(
                "intent {} cycle {} failed verification: {}",
                intent.id,
                result.cycles,
                report.errors.iter().map(|e| e.code.name()).collect::<Vec<_>>().join(", ")
            );
            last_report = Some(report.clone());
            previous = Some((bundle, report));
        }

        result.status = RunStatus::Exhausted;
        result.final_report = last_report;
        result.timings = timings;
        Ok(result)
    }

    /// Run a batch of unique intents, optionally across worker threads.
    /// Results come back in input order whatever the interleaving, so a
    /// parallel batch serialises identically to a sequential one.
    pub fn run_batch(
        &self,
        intents: &[Intent],
        repo: Option<&ConfigsRepo>,
        workers: usize,
    ) -> Result<BatchOutcome, OrchestratorError> {
        if intents.is_empty() {
            return Err(OrchestratorError::EmptyBatch);
        }
        let mut seen = HashSet::new();
        for intent in intents {
            if !seen.insert(intent.id.as_str()) {
                return Err(OrchestratorError::DuplicateIntent(intent.id.clone()));
            }
        }
        let workers = workers.clamp(1, intents.len());

        let results = if workers == 1 {
            let mut results = Vec::with_capacity(intents.len());
            for intent in intents {
                results.push(self.run_intent(intent, repo)?);
            }
            results
        } else {
            let next = AtomicUsize::new(0);
            let slots: Mutex<Vec<Option<OrchestrationResult>>> =
                Mutex::new(vec![None; intents.len()]);
            let failure: Mutex<Option<OrchestratorError>> = Mutex::new(None);
            std::thread::scope(|scope| {
                for _ in 0..workers {
                    scope.spawn(|| loop {
                        let idx = next.fetch_add(1, Ordering::SeqCst);
                        if idx >= intents.len() {
                            break;
                        }
                        match self.run_intent(&intents[idx], repo) {
                            Ok(result) => {
                                slots.lock().expect("result slots")[idx] = Some(result);
                            }
                            Err(e) => {
                                *failure.lock().expect("failure slot") = Some(e);
                                break;
                            }
                        }
                    });
                }
            });
            if let Some(e) = failure.into_inner().expect("failure slot") {
                return Err(e);
            }
            slots
                .into_inner()
                .expect("result slots")
                .into_iter()
                .map(|slot| slot.expect("every slot filled"))
                .collect()
        };

        let metrics = BatchMetrics::from_results(&results);
        Ok(BatchOutcome { results, metrics })
    }
}

fn backend_failed(
    mut result: OrchestrationResult,
    timings: Vec<StageTiming>,
    error: BackendError,
) -> OrchestrationResult {
    result.status = RunStatus::BackendFailed;
    result.failure = Some(error.to_string());
    result.timings = timings;
    result
}
