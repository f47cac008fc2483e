//! Versioned storage of approved configurations.
//!
//! One directory per intent, append-only:
//!
//! ```text
//! <root>/
//!   <intent_id>/
//!     audit/
//!       cycle-01/
//!         candidate.txt   raw backend answer for the cycle
//!         report.json     the verifier's verdict on it
//!     v1/
//!       R1.cfg            canonical configuration per device
//!       report.json       the approving report
//!       meta.json         version metadata
//!     v2/ ...
//! ```
//!
//! Only passing candidates become versions, and they are stored in canonical
//! form — parsed and re-rendered — so two equivalent spellings of the same
//! configuration produce identical files. Versions are written staged and
//! renamed into place: a crash cannot leave a half-written `vN` behind.
//! Every cycle, approved or not, can be recorded in the audit trail.

use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intent::IntentClass;
use crate::json;
use crate::model::{canonical_text, parse_config, ConfigBundle, DeviceSection};
use crate::verify::VerificationReport;

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("repository I/O failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("'{0}' cannot name a repository entry")]
    BadName(String),
    #[error("refusing to store a failing report for intent '{0}'")]
    NotApproved(String),
    #[error("bundle has two sections for device '{0}'")]
    DuplicateDevice(String),
    #[error("section for '{device}' does not parse cleanly: {message}")]
    UnparsableSection { device: String, message: String },
    #[error("intent '{intent_id}' has no stored version {version}")]
    MissingVersion { intent_id: String, version: u32 },
    #[error("unreadable repository entry {path}: {source}")]
    Corrupt { path: String, source: serde_json::Error },
}

/// Metadata stored beside every version.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionMeta {
    pub intent_id: String,
    pub version: u32,
    pub class: IntentClass,
    pub devices: Vec<String>,
    pub stored_at: DateTime<Utc>,
}

/// Where a freshly stored version ended up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredVersion {
    pub intent_id: String,
    pub version: u32,
    pub devices: Vec<String>,
    pub path: PathBuf,
}

/// One audit-trail entry: the candidate text of a cycle and its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle: u32,
    pub candidate: String,
    pub report: VerificationReport,
}

/// Directory-backed store of approved configurations and audit trails.
#[derive(Debug, Clone)]
pub struct ConfigsRepo {
    root: PathBuf,
}

/// Directory names must be plain identifiers: no separators, no dot-leading
/// names, nothing the filesystem would reinterpret.
fn check_name(name: &str) -> Result<(), RepoError> {
    let plain = !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if plain {
        Ok(())
    } else {
        Err(RepoError::BadName(name.to_string()))
    }
}

/// Parse a directory name of the form `<prefix><number>`.
fn indexed_dir(entry: &fs::DirEntry, prefix: &str) -> Option<u32> {
    let name = entry.file_name();
    let name = name.to_str()?;
    if !entry.file_type().ok()?.is_dir() {
        return None;
    }
    name.strip_prefix(prefix)?.parse().ok()
}

/// Numbered subdirectories of `dir`, ascending; an absent `dir` is empty.
fn indexed_dirs(dir: &Path, prefix: &str) -> Result<Vec<u32>, RepoError> {
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut indices: Vec<u32> = entries
        .filter_map(|entry| entry.ok().and_then(|e| indexed_dir(&e, prefix)))
        .collect();
    indices.sort_unstable();
    Ok(indices)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, RepoError> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|source| RepoError::Corrupt { path: path.display().to_string(), source })
}

impl ConfigsRepo {
    /// Open (creating if needed) a repository rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, RepoError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn intent_dir(&self, intent_id: &str) -> Result<PathBuf, RepoError> {
        check_name(intent_id)?;
        Ok(self.root.join(intent_id))
    }

    /// Store an approved bundle as the next version for its intent.
    ///
    /// The report must be passing and must belong to the bundle; each section
    /// is re-parsed and stored in canonical form. `stored_at` comes from the
    /// caller's clock so that replayed runs write identical metadata.
    pub fn store_approved(
        &self,
        bundle: &ConfigBundle,
        report: &VerificationReport,
        stored_at: DateTime<Utc>,
    ) -> Result<StoredVersion, RepoError> {
        if !report.passed {
            return Err(RepoError::NotApproved(report.intent_id.clone()));
        }
        let intent_dir = self.intent_dir(&report.intent_id)?;

        let mut devices: Vec<String> = Vec::new();
        let mut files: Vec<(String, String)> = Vec::new();
        for section in &bundle.sections {
            check_name(&section.device)?;
            if devices.contains(&section.device) {
                return Err(RepoError::DuplicateDevice(section.device.clone()));
            }
            let outcome = parse_config(&section.device, &section.text);
            if outcome.has_errors() {
                let message =
                    outcome.errors().map(|i| i.to_string()).collect::<Vec<_>>().join("; ");
                return Err(RepoError::UnparsableSection {
                    device: section.device.clone(),
                    message,
                });
            }
            devices.push(section.device.clone());
            files.push((format!("{}.cfg", section.device), canonical_text(&outcome.ast)));
        }

        fs::create_dir_all(&intent_dir)?;
        let version = self.latest_version(&report.intent_id)?.unwrap_or(0) + 1;
        let meta = VersionMeta {
            intent_id: report.intent_id.clone(),
            version,
            class: report.class,
            devices: devices.clone(),
            stored_at,
        };

        // Stage the whole version, then rename into place.
        let staging = intent_dir.join(format!(".staging-v{version}"));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        fs::create_dir_all(&staging)?;
        for (file, text) in &files {
            fs::write(staging.join(file), text)?;
        }
        fs::write(staging.join("report.json"), json::canonical_pretty(report))?;
        fs::write(staging.join("meta.json"), json::canonical_pretty(&meta))?;
        let final_dir = intent_dir.join(format!("v{version}"));
        fs::rename(&staging, &final_dir)?;

        Ok(StoredVersion {
            intent_id: report.intent_id.clone(),
            version,
            devices,
            path: final_dir,
        })
    }

    /// Intents that have at least one stored version, sorted.
    pub fn intent_ids(&self) -> Result<Vec<String>, RepoError> {
        let mut ids: Vec<String> = fs::read_dir(&self.root)?
            .filter_map(|entry| {
                let entry = entry.ok()?;
                if !entry.file_type().ok()?.is_dir() {
                    return None;
                }
                let name = entry.file_name().to_str()?.to_string();
                let has_version =
                    indexed_dirs(&entry.path(), "v").map(|v| !v.is_empty()).unwrap_or(false);
                has_version.then_some(name)
            })
            .collect();
        ids.sort();
        Ok(ids)
    }

    /// Stored version numbers for an intent, ascending.
    pub fn versions(&self, intent_id: &str) -> Result<Vec<u32>, RepoError> {
        indexed_dirs(&self.intent_dir(intent_id)?, "v")
    }

    pub fn latest_version(&self, intent_id: &str) -> Result<Option<u32>, RepoError> {
        Ok(self.versions(intent_id)?.into_iter().max())
    }

    fn version_dir(&self, intent_id: &str, version: u32) -> Result<PathBuf, RepoError> {
        let dir = self.intent_dir(intent_id)?.join(format!("v{version}"));
        if dir.is_dir() {
            Ok(dir)
        } else {
            Err(RepoError::MissingVersion { intent_id: intent_id.to_string(), version })
        }
    }

    /// Load one stored version: the canonical bundle plus its metadata.
    pub fn load(
        &self,
        intent_id: &str,
        version: u32,
    ) -> Result<(ConfigBundle, VersionMeta), RepoError> {
        let dir = self.version_dir(intent_id, version)?;
        let meta: VersionMeta = read_json(&dir.join("meta.json"))?;
        let mut sections = Vec::new();
        for device in &meta.devices {
            check_name(device)?;
            let text = fs::read_to_string(dir.join(format!("{device}.cfg")))?;
            sections.push(DeviceSection { device: device.clone(), text });
        }
        Ok((ConfigBundle::new(sections), meta))
    }

    /// The report that approved a stored version.
    pub fn load_report(
        &self,
        intent_id: &str,
        version: u32,
    ) -> Result<VerificationReport, RepoError> {
        let dir = self.version_dir(intent_id, version)?;
        read_json(&dir.join("report.json"))
    }

    /// Append one cycle to the intent's audit trail; returns the index the
    /// record was filed under. Indices keep growing across runs, so a rerun
    /// never overwrites history.
    pub fn record_cycle(
        &self,
        intent_id: &str,
        candidate: &str,
        report: &VerificationReport,
    ) -> Result<u32, RepoError> {
        let audit = self.intent_dir(intent_id)?.join("audit");
        let cycle = indexed_dirs(&audit, "cycle-")?.into_iter().max().unwrap_or(0) + 1;
        let dir = audit.join(format!("cycle-{cycle:02}"));
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("candidate.txt"), candidate)?;
        fs::write(dir.join("report.json"), json::canonical_pretty(report))?;
        Ok(cycle)
    }

    /// The full audit trail for an intent, in cycle order.
    pub fn audit_trail(&self, intent_id: &str) -> Result<Vec<CycleRecord>, RepoError> {
        let audit = self.intent_dir(intent_id)?.join("audit");
        let mut records = Vec::new();
        for cycle in indexed_dirs(&audit, "cycle-")? {
            let dir = audit.join(format!("cycle-{cycle:02}"));
            let candidate = fs::read_to_string(dir.join("candidate.txt"))?;
            let report = read_json(&dir.join("report.json"))?;
            records.push(CycleRecord { cycle, candidate, report });
        }
        Ok(records)
    }
}
