//! Aggregates over a batch of runs.
//!
//! Everything here is computed from [`OrchestrationResult`]s alone — the
//! results carry the intent labels and complexity buckets they were run
//! with — and serialises with sorted keys, so a replayed batch produces a
//! byte-identical metrics file.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{OrchestrationResult, RunStatus};
use crate::intent::IntentClass;

/// Latency distribution of one stage across a batch, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageStats {
    /// Lower median.
    pub p50: u64,
    pub mean: f64,
    pub max: u64,
}

/// Batch-level aggregates: outcome counts, classification quality, cycle
/// costs, and stage latencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchMetrics {
    pub total: usize,
    pub approved: usize,
    pub rejected_other: usize,
    pub exhausted: usize,
    pub backend_failed: usize,
    /// Fraction of labelled intents filed under their expected class; absent
    /// when the batch carries no labels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification_accuracy: Option<f64>,
    /// Fraction of all intents filed under `Other`.
    pub other_rate: f64,
    /// `expected->observed` counts for labelled intents.
    pub confusion: BTreeMap<String, usize>,
    /// Mean cycles needed by approved intents, bucketed by complexity.
    pub mean_cycles_to_approval: BTreeMap<String, f64>,
    /// Per-stage latency statistics.
    pub timings_ms: BTreeMap<String, StageStats>,
}

impl BatchMetrics {
    pub fn from_results(results: &[OrchestrationResult]) -> Self {
        let count = |status: RunStatus| results.iter().filter(|r| r.status == status).count();

        let mut labelled = 0usize;
        let mut correct = 0usize;
        let mut other = 0usize;
        let mut confusion: BTreeMap<String, usize> = BTreeMap::new();
        for result in results {
            if result.class == Some(IntentClass::Other) {
                other += 1;
            }
            if let (Some(expected), Some(observed)) = (result.expected_class, result.class) {
                labelled += 1;
                if expected == observed {
                    correct += 1;
                }
                let key = format!("{}->{}", expected.name(), observed.name());
                *confusion.entry(key).or_insert(0) += 1;
            }
        }

        let mut cycles_by_bucket: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for result in results.iter().filter(|r| r.status == RunStatus::Approved) {
            cycles_by_bucket
                .entry(result.complexity.name().to_string())
                .or_default()
                .push(result.cycles);
        }

        let mut samples: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        for result in results {
            for timing in &result.timings {
                samples.entry(timing.stage.to_string()).or_default().push(timing.millis);
            }
        }

        Self {
            total: results.len(),
            approved: count(RunStatus::Approved),
            rejected_other: count(RunStatus::RejectedOther),
            exhausted: count(RunStatus::Exhausted),
            backend_failed: count(RunStatus::BackendFailed),
            classification_accuracy: (labelled > 0)
                .then(|| correct as f64 / labelled as f64),
            other_rate: if results.is_empty() {
                0.0
            } else {
                other as f64 / results.len() as f64
            },
            confusion,
            mean_cycles_to_approval: cycles_by_bucket
                .into_iter()
                .map(|(bucket, cycles)| {
                    let mean = cycles.iter().sum::<u32>() as f64 / cycles.len() as f64;
                    (bucket, mean)
                })
                .collect(),
            timings_ms: samples
                .into_iter()
                .map(|(stage, mut millis)| {
                    millis.sort_unstable();
                    let stats = StageStats {
                        p50: millis[(millis.len() - 1) / 2],
                        mean: millis.iter().sum::<u64>() as f64 / millis.len() as f64,
                        max: *millis.last().expect("at least one sample"),
                    };
                    (stage, stats)
                })
                .collect(),
        }
    }

    /// Pretty JSON with sorted keys.
    pub fn to_json(&self) -> String {
        crate::json::canonical_pretty(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::Complexity;
    use crate::orchestrator::StageTiming;

    fn result(
        id: &str,
        status: RunStatus,
        class: Option<IntentClass>,
        expected: Option<IntentClass>,
        cycles: u32,
        complexity: Complexity,
        timings: Vec<(&'static str, u64)>,
    ) -> OrchestrationResult {
        OrchestrationResult {
            intent_id: id.into(),
            status,
            class,
            cycles,
            stored_version: None,
            final_report: None,
            failure: None,
            timings: timings
                .into_iter()
                .map(|(stage, millis)| StageTiming { stage, millis })
                .collect(),
            complexity,
            expected_class: expected,
        }
    }

    #[test]
    fn counts_accuracy_and_confusion() {
        let results = vec![
            result(
                "a",
                RunStatus::Approved,
                Some(IntentClass::Cp),
                Some(IntentClass::Cp),
                1,
                Complexity::Simple,
                vec![("classify", 2)],
            ),
            result(
                "b",
                RunStatus::Exhausted,
                Some(IntentClass::Acl),
                Some(IntentClass::Cp),
                5,
                Complexity::Simple,
                vec![("classify", 4)],
            ),
            result(
                "c",
                RunStatus::RejectedOther,
                Some(IntentClass::Other),
                None,
                0,
                Complexity::Simple,
                vec![("classify", 6)],
            ),
        ];
        let metrics = BatchMetrics::from_results(&results);
        assert_eq!(metrics.total, 3);
        assert_eq!(metrics.approved, 1);
        assert_eq!(metrics.exhausted, 1);
        assert_eq!(metrics.rejected_other, 1);
        assert_eq!(metrics.classification_accuracy, Some(0.5));
        assert!((metrics.other_rate - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(metrics.confusion.get("CP->CP"), Some(&1));
        assert_eq!(metrics.confusion.get("CP->ACL"), Some(&1));
        let classify = &metrics.timings_ms["classify"];
        assert_eq!((classify.p50, classify.max), (4, 6));
        assert!((classify.mean - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cycle_means_bucket_by_complexity_over_approved_runs() {
        let results = vec![
            result("a", RunStatus::Approved, Some(IntentClass::Cp), None, 1, Complexity::Simple, vec![]),
            result("b", RunStatus::Approved, Some(IntentClass::Cp), None, 3, Complexity::Simple, vec![]),
            result("c", RunStatus::Approved, Some(IntentClass::Tn), None, 4, Complexity::Complex, vec![]),
            result("d", RunStatus::Exhausted, Some(IntentClass::Tn), None, 5, Complexity::Complex, vec![]),
        ];
        let metrics = BatchMetrics::from_results(&results);
        assert_eq!(metrics.mean_cycles_to_approval["simple"], 2.0);
        assert_eq!(metrics.mean_cycles_to_approval["complex"], 4.0);
    }

    #[test]
    fn unlabelled_batches_have_no_accuracy() {
        let results =
            vec![result("a", RunStatus::Approved, Some(IntentClass::Cp), None, 1, Complexity::Simple, vec![])];
        let metrics = BatchMetrics::from_results(&results);
        assert_eq!(metrics.classification_accuracy, None);
        assert_eq!(metrics.other_rate, 0.0);
        let json = metrics.to_json();
        assert!(json.contains("\"approved\": 1"));
        assert!(!json.contains("classification_accuracy"));
    }
}
