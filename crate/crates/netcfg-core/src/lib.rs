//! Closed-loop, intent-driven network configuration.
//!
//! The pipeline turns a natural-language requirement into verified device
//! configurations in five stages:
//!
//! 1. **Classify** the intent into one of the supported requirement classes
//!    (`CP` interface properties, `RP` routing, `ACL` packet filtering,
//!    `TN` tunnels) or reject it as `Other`.
//! 2. **Translate** the intent into a structured low-level description (JSON).
//! 3. **Generate** candidate per-device configurations through a pluggable
//!    text-generation backend.
//! 4. **Verify** the candidate syntactically and semantically against a
//!    network model, producing machine-readable errors and suggestions.
//! 5. **Refine** with verifier feedback and repeat until the candidate is
//!    approved or a retry threshold is exhausted; approved configurations are
//!    persisted in a versioned repository.
//!
//! The crate is organised around that loop:
//!
//! * [`intent`] — intent records, requirement classes, low-level descriptions.
//! * [`model`] — configuration grammar (parser, AST, canonical renderer) and
//!   the network model (topology, candidate application, status snapshots).
//! * [`prompt`] — prompt construction from versioned template files.
//! * [`backend`] — backend abstraction, HTTP chat-completion client,
//!   deterministic rules backend, answer extraction, fault injection.
//! * [`verify`] — syntax and semantic checks, ACL simulation, reports.
//! * [`repo`] — versioned storage of approved configurations and audit trails.
//! * [`orchestrator`] — the closed loop plus batch execution and metrics.
//! * [`clock`] — wall-clock vs. logical time, so batch runs can be replayed
//!   byte-for-byte.

pub mod backend;
pub mod clock;
pub mod intent;
pub(crate) mod json;
pub mod model;
pub mod orchestrator;
pub mod prompt;
pub mod repo;
pub mod verify;

pub use backend::{Backend, BackendDescriptor, BackendError, BackendKind, DecodingParams};
pub use intent::{Intent, IntentClass, LowLevelDescription};
pub use model::{ConfigBundle, DeviceConfigAst, NetworkModel};
pub use orchestrator::{Orchestrator, OrchestratorConfig, RunStatus};
pub use repo::ConfigsRepo;
pub use verify::{ErrorCode, VerificationReport};
