//! Run reports. The serialized report is a pure function of the parsed
//! config (seed included): wall-clock time is carried on the struct for
//! console output but never serialized, so identical runs produce
//! byte-identical report files.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

/// Outcome of one experiment run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: String,
    pub library_version: String,
    pub seed: u64,
    /// Echo of the validated configuration.
    pub config: serde_json::Value,
    /// True iff every certification requested by the run passed.
    pub passed: bool,
    /// Command-specific verdicts and estimates.
    pub details: serde_json::Value,
    /// Names of the CSV files the run emits.
    pub outputs: Vec<String>,
    #[serde(skip)]
    pub wall_clock_ms: u128,
}

impl RunReport {
    pub fn new(
        command: &str,
        seed: u64,
        config: serde_json::Value,
        passed: bool,
        details: serde_json::Value,
        outputs: Vec<String>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            passed,
            details,
            outputs,
            wall_clock_ms: 0,
        }
    }

    /// Pretty JSON with a trailing newline; deterministic field order.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
