//! Versioned report envelope shared by every subcommand.
//!
//! JSON reports are objects `{"schema", "command", "pass", "report"}`.
//! CSV files start with a `# schema: ...` comment line before the header,
//! and binary files get a `<file>.json` sidecar carrying the schema and
//! the layout.

use serde::Serialize;

use crate::error::Result;

pub const SCHEMA_VERSION: &str = "rudin-shapiro-report/1";

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub pass: bool,
    pub report: &'a T,
}

pub fn to_json<T: Serialize>(command: &str, pass: bool, report: &T) -> Result<String> {
    let env = Envelope {
        schema: SCHEMA_VERSION,
        command,
        pass,
        report,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(std::io::Error::other)?;
    s.push('\n');
    Ok(s)
}

pub fn csv_preamble(command: &str) -> String {
    format!("# schema: {SCHEMA_VERSION} command: {command}\n")
}

/// Layout description written next to a binary export.
#[derive(Debug, Serialize)]
pub struct BinaryLayout {
    pub schema: &'static str,
    pub command: String,
    /// `f64-le`, `complex-f64-le` (re, im pairs) or `bitset-lsb0`.
    pub encoding: &'static str,
    pub count: usize,
    pub description: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Demo {
        x: u32,
    }

    #[test]
    fn envelope_shape() {
        let s = to_json("demo", true, &Demo { x: 3 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], SCHEMA_VERSION);
        assert_eq!(v["command"], "demo");
        assert_eq!(v["pass"], true);
        assert_eq!(v["report"]["x"], 3);
        assert!(csv_preamble("demo").starts_with("# schema: "));
    }
}
