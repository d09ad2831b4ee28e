use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: &str = "1";

/// The JSON document every command prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub schema_version: String,
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub warnings: Vec<String>,
}

impl Envelope {
    pub fn new(command: impl Into<String>, inputs: Value) -> Self {
        Envelope {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.into(),
            inputs,
            results: Value::Null,
            warnings: Vec::new(),
        }
    }

    pub fn with_results(mut self, results: Value) -> Self {
        self.results = results;
        self
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }
}
