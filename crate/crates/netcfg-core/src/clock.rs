//! Time sources for the pipeline.
//!
//! Reports and repository entries carry timestamps, and batch metrics carry
//! stage durations. With the real [`SystemClock`] those values change between
//! runs; the [`LogicalClock`] instead advances a fixed amount on every
//! reading, which makes two runs over the same inputs byte-identical — the
//! property the deterministic backend relies on.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};

/// A source of timestamps for reports, repository entries, and timings.
pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

/// Wall-clock time.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Deterministic clock: starts at a fixed epoch and advances one millisecond
/// per reading.
#[derive(Debug)]
pub struct LogicalClock {
    epoch: DateTime<Utc>,
    ticks: AtomicU64,
}

/// Epoch used by [`LogicalClock::new`].
pub fn logical_epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

impl LogicalClock {
    pub fn new() -> Self {
        Self { epoch: logical_epoch(), ticks: AtomicU64::new(0) }
    }
}

impl Default for LogicalClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for LogicalClock {
    fn now(&self) -> DateTime<Utc> {
        let tick = self.ticks.fetch_add(1, Ordering::SeqCst);
        self.epoch + chrono::Duration::milliseconds(tick as i64)
    }
}

/// Which clock the orchestrator hands to each intent run.
///
/// `Logical` creates a fresh [`LogicalClock`] per intent, so timestamps do
/// not depend on how intents interleave across worker threads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockMode {
    #[default]
    System,
    Logical,
}

impl ClockMode {
    pub fn make(self) -> Arc<dyn Clock> {
        match self {
            ClockMode::System => Arc::new(SystemClock),
            ClockMode::Logical => Arc::new(LogicalClock::new()),
        }
    }
}
