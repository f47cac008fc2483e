//! End-to-end runs of the shipped baseline and datasets through the
//! deterministic rules backend.

use std::path::PathBuf;
use std::sync::Arc;

use netcfg_core::backend::rules::RulesBackend;
use netcfg_core::clock::ClockMode;
use netcfg_core::intent::{load_dataset, IntentClass};
use netcfg_core::model::NetworkModel;
use netcfg_core::orchestrator::{Orchestrator, OrchestratorConfig, RunStatus};
use netcfg_core::repo::ConfigsRepo;

fn workspace_path(relative: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(relative)
}

fn baseline() -> NetworkModel {
    NetworkModel::from_file(workspace_path("topology/topology.json")).expect("baseline loads")
}

fn deterministic_config() -> OrchestratorConfig {
    OrchestratorConfig { clock_mode: ClockMode::Logical, ..OrchestratorConfig::default() }
}

#[test]
fn shipped_baseline_loads_with_four_routers_and_two_hosts() {
    let model = baseline();
    let devices: Vec<&str> = model.device_names().collect();
    assert_eq!(devices, ["R1", "R2", "R3", "R4"]);
    assert_eq!(model.links.len(), 5);
    assert_eq!(model.hosts.len(), 2);
    // Partial mesh: R2 and R4 are not directly connected.
    assert!(model.link_between("R2", "R4").is_none());
    assert!(model.link_between("R1", "R3").is_some());
}

#[test]
fn every_dataset_intent_is_approved_on_the_first_cycle() {
    let intents = load_dataset(workspace_path("datasets/intents.jsonl")).expect("dataset loads");
    assert_eq!(intents.len(), 40);

    let dir = tempfile::tempdir().expect("tempdir");
    let repo = ConfigsRepo::open(dir.path().join("repo")).expect("repo opens");
    let orchestrator =
        Orchestrator::new(Arc::new(RulesBackend::new()), baseline(), deterministic_config());
    let outcome = orchestrator.run_batch(&intents, Some(&repo), 1).expect("batch runs");

    for result in &outcome.results {
        assert_eq!(
            result.status,
            RunStatus::Approved,
            "{} ended {:?}: {:?}",
            result.intent_id,
            result.status,
            result.final_report.as_ref().map(|r| &r.errors)
        );
        assert_eq!(result.cycles, 1, "{} needed {} cycles", result.intent_id, result.cycles);
        assert_eq!(result.class, result.expected_class, "{} misclassified", result.intent_id);
        assert_eq!(result.stored_version, Some(1));
    }
    assert_eq!(outcome.metrics.approved, 40);
    assert_eq!(outcome.metrics.classification_accuracy, Some(1.0));
    assert_eq!(outcome.metrics.other_rate, 0.0);
}

#[test]
fn unsupported_intents_are_rejected_before_any_configuration_work() {
    let intents =
        load_dataset(workspace_path("datasets/unsupported.jsonl")).expect("dataset loads");
    assert_eq!(intents.len(), 3);

    let orchestrator =
        Orchestrator::new(Arc::new(RulesBackend::new()), baseline(), deterministic_config());
    for intent in &intents {
        let result = orchestrator.run_intent(intent, None).expect("run completes");
        assert_eq!(result.status, RunStatus::RejectedOther, "{}", intent.id);
        assert_eq!(result.class, Some(IntentClass::Other));
        assert_eq!(result.cycles, 0);
        let stages: Vec<&str> = result.timings.iter().map(|t| t.stage).collect();
        assert_eq!(stages, ["classify"], "nothing beyond classification may run");
    }
}
