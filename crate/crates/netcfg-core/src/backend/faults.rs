//! Deterministic fault injection for the rules backend.
//!
//! Faults simulate the characteristic failure modes of a live model — an
//! invented class, broken JSON, a configuration typo — so the recovery paths
//! can be exercised on purpose. Which intents are faulted is resolved ahead
//! of a batch from a seed: a probability `p` over `n` intents selects
//! exactly `round(p * n)` of them via a seeded shuffle, so a run's fault set
//! is a pure function of (dataset, spec, seed).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::prompt::PromptPurpose;

/// The failure mode to inject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FaultKind {
    /// Classification answers an invented class ("SNMP").
    Class,
    /// Translation answers unbalanced JSON.
    Json,
    /// Generation misspells a directive (`ip addres`).
    Syntax,
}

impl FaultKind {
    pub const ALL: [FaultKind; 3] = [FaultKind::Class, FaultKind::Json, FaultKind::Syntax];

    pub fn name(self) -> &'static str {
        match self {
            FaultKind::Class => "class",
            FaultKind::Json => "json",
            FaultKind::Syntax => "syntax",
        }
    }
}

impl fmt::Display for FaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for FaultKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "class" => Ok(FaultKind::Class),
            "json" => Ok(FaultKind::Json),
            "syntax" => Ok(FaultKind::Syntax),
            other => Err(format!("unknown fault kind '{other}' (expected class, json, or syntax)")),
        }
    }
}

/// When an injected fault fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FaultSchedule {
    /// Every affected completion, including refine attempts.
    #[default]
    Always,
    /// Only the first attempt; retries and refinements answer cleanly.
    /// This is what makes a faulted intent converge on the second cycle.
    FirstCycleOnly,
}

impl fmt::Display for FaultSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultSchedule::Always => write!(f, "always"),
            FaultSchedule::FirstCycleOnly => write!(f, "first-cycle-only"),
        }
    }
}

impl FromStr for FaultSchedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "always" => Ok(FaultSchedule::Always),
            "first-cycle-only" => Ok(FaultSchedule::FirstCycleOnly),
            other => Err(format!(
                "unknown fault schedule '{other}' (expected always or first-cycle-only)"
            )),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FaultParseError {
    #[error("malformed fault entry '{0}' (expected kind:probability)")]
    MalformedEntry(String),
    #[error("{0}")]
    UnknownKind(String),
    #[error("probability '{0}' is not in [0, 1]")]
    BadProbability(String),
}

/// Fault configuration: per-kind probabilities, a schedule, and the seed
/// that resolves probabilities into concrete intents.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultSpec {
    pub probabilities: BTreeMap<FaultKind, f64>,
    pub schedule: FaultSchedule,
    pub seed: u64,
}

impl FaultSpec {
    pub fn new(probabilities: BTreeMap<FaultKind, f64>, schedule: FaultSchedule, seed: u64) -> Self {
        Self { probabilities, schedule, seed }
    }

    /// Parse the CLI grammar `kind:prob[,kind:prob]*`.
    pub fn parse_probabilities(
        spec: &str,
    ) -> Result<BTreeMap<FaultKind, f64>, FaultParseError> {
        let mut probabilities = BTreeMap::new();
        for entry in spec.split(',') {
            let entry = entry.trim();
            if entry.is_empty() {
                continue;
            }
            let (kind, prob) = entry
                .split_once(':')
                .ok_or_else(|| FaultParseError::MalformedEntry(entry.to_string()))?;
            let kind = kind.trim().parse::<FaultKind>().map_err(FaultParseError::UnknownKind)?;
            let prob: f64 = prob
                .trim()
                .parse()
                .map_err(|_| FaultParseError::BadProbability(prob.trim().to_string()))?;
            if !(0.0..=1.0).contains(&prob) {
                return Err(FaultParseError::BadProbability(prob.to_string()));
            }
            probabilities.insert(kind, prob);
        }
        Ok(probabilities)
    }

    /// Resolve the probabilities against a concrete set of intent ids.
    /// For each kind, exactly `round(p * n)` ids are selected by shuffling
    /// the sorted id list with a kind-specific stream of the seed.
    pub fn resolve(&self, intent_ids: &[String]) -> FaultPlan {
        let mut sorted: Vec<String> = intent_ids.to_vec();
        sorted.sort();
        sorted.dedup();
        let mut faulted: BTreeMap<String, BTreeSet<FaultKind>> = BTreeMap::new();
        for (idx, kind) in FaultKind::ALL.iter().enumerate() {
            let Some(&p) = self.probabilities.get(kind) else {
                continue;
            };
            let count = ((p * sorted.len() as f64).round() as usize).min(sorted.len());
            if count == 0 {
                continue;
            }
            let stream_seed =
                self.seed.wrapping_add((idx as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed);
            let mut pool = sorted.clone();
            pool.shuffle(&mut rng);
            for id in pool.into_iter().take(count) {
                faulted.entry(id).or_default().insert(*kind);
            }
        }
        FaultPlan { schedule: self.schedule, faulted }
    }
}

/// A resolved fault plan: which intents fail in which way, and when.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FaultPlan {
    schedule: FaultSchedule,
    faulted: BTreeMap<String, BTreeSet<FaultKind>>,
}

impl FaultPlan {
    /// A plan that faults nothing.
    pub fn none() -> Self {
        Self::default()
    }

    /// Fault one specific intent (regardless of probabilities); test and
    /// scripted-scenario hook.
    pub fn with_target(mut self, intent_id: impl Into<String>, kind: FaultKind) -> Self {
        self.faulted.entry(intent_id.into()).or_default().insert(kind);
        self
    }

    pub fn with_schedule(mut self, schedule: FaultSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    /// Ids faulted with `kind`, sorted.
    pub fn faulted_ids(&self, kind: FaultKind) -> Vec<String> {
        self.faulted
            .iter()
            .filter(|(_, kinds)| kinds.contains(&kind))
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// Should this completion be sabotaged? Each kind targets the pipeline
    /// stage it corrupts. `attempt` is the 1-based count of completions the
    /// backend has produced for this intent at that stage (generation and
    /// refinement count as one stage); under `FirstCycleOnly` only the first
    /// attempt is sabotaged, so retries and refinements answer cleanly.
    pub fn is_active(
        &self,
        intent_id: &str,
        kind: FaultKind,
        purpose: PromptPurpose,
        attempt: u32,
    ) -> bool {
        if !self.faulted.get(intent_id).is_some_and(|kinds| kinds.contains(&kind)) {
            return false;
        }
        let stage_matches = match kind {
            FaultKind::Class => purpose == PromptPurpose::Classify,
            FaultKind::Json => purpose == PromptPurpose::Translate,
            FaultKind::Syntax => {
                purpose == PromptPurpose::Generate || purpose == PromptPurpose::Refine
            }
        };
        stage_matches
            && match self.schedule {
                FaultSchedule::Always => true,
                FaultSchedule::FirstCycleOnly => attempt <= 1,
            }
    }
}
