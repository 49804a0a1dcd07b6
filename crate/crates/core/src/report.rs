//! JSON envelope shared by every command.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const SCHEMA: &str = "yangkit-report/1";

/// `generated_at` is the only field that varies between identical runs.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub schema: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub generated_at: u64,
    pub passed: bool,
    pub body: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, seed: Option<u64>, passed: bool, body: T) -> Self {
        let generated_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self { schema: SCHEMA, command: command.to_string(), seed, generated_at, passed, body }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_apart_from_timestamp() {
        let a = Report::new("verify", Some(7), true, vec![1.5, 2.0]).to_json();
        let mut b = Report::new("verify", Some(7), true, vec![1.5, 2.0]).to_json();
        b["generated_at"] = a["generated_at"].clone();
        assert_eq!(a, b);
        assert_eq!(a["schema"], SCHEMA);
        assert_eq!(a["body"][1], 2.0);
    }
}
