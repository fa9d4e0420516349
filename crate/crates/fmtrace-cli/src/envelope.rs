//! Versioned JSON report envelope.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Envelope<P: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub pass: bool,
    pub failures: Vec<String>,
    /// Full resolved configuration, flat dotted keys.
    pub config: BTreeMap<String, serde_json::Value>,
    pub results: P,
}

impl<P: Serialize> Envelope<P> {
    pub fn new(
        command: &str,
        seed: u64,
        failures: Vec<String>,
        config: BTreeMap<String, serde_json::Value>,
        results: P,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            seed,
            pass: failures.is_empty(),
            failures,
            config,
            results,
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Io(format!("serializing report: {e}")))?;
        std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}
