use std::process::ExitCode;

use serde_json::Value;
use symrel::polyring::PolyError;
use symrel::relations::{RelationError, Verdict};
use symrel::solver::SolverError;

use crate::args::Format;

/// Overall result of a command, mapped onto the exit code.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    ResourceLimited,
    Falsified,
}

impl Status {
    pub fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Verified => Status::Ok,
            Verdict::Falsified => Status::Falsified,
            Verdict::ResourceLimited => Status::ResourceLimited,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Falsified => 1,
            Status::ResourceLimited => 3,
        }
    }

    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

/// What a command produced: text lines, the equivalent JSON document and
/// the status.
pub struct Report {
    pub text: Vec<String>,
    pub json: Value,
    pub status: Status,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.iter().map(|l| format!("{l}\n")).collect(),
            Format::Json => render_json(&self.json),
        }
    }
}

/// Canonical JSON text: pretty-printed with object keys sorted, so parsing
/// and re-emitting a report reproduces it byte for byte.
pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Resource(String),
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Failed(_) => 1,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Resource(m) | CliError::Failed(m) => m,
        }
    }
}

impl From<RelationError> for CliError {
    fn from(e: RelationError) -> Self {
        let msg = e.to_string();
        match e {
            RelationError::Precondition(_) => CliError::Usage(msg),
            RelationError::Poly(PolyError::TermCapExceeded { .. }) => CliError::Resource(msg),
            RelationError::NotVerified {
                verdict: Verdict::ResourceLimited,
                ..
            } => CliError::Resource(msg),
            _ => CliError::Failed(msg),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Relation(r) => r.into(),
            SolverError::Precondition(m) => CliError::Usage(m),
            other => CliError::Failed(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts_map_to_exit_codes() {
        assert_eq!(Status::from_verdict(Verdict::Verified).code(), 0);
        assert_eq!(Status::from_verdict(Verdict::Falsified).code(), 1);
        assert_eq!(Status::from_verdict(Verdict::ResourceLimited).code(), 3);
        // A falsification outranks a resource cap when cases are combined.
        assert_eq!(Status::ResourceLimited.max(Status::Falsified), Status::Falsified);
    }

    #[test]
    fn errors_map_to_exit_codes() {
        let usage: CliError = RelationError::Precondition("n".into()).into();
        assert_eq!(usage.code(), 2);
        let cap: CliError = RelationError::Poly(PolyError::TermCapExceeded { cap: 5 }).into();
        assert_eq!(cap.code(), 3);
        let falsified: CliError = RelationError::NotVerified {
            verdict: Verdict::Falsified,
            detail: String::new(),
        }
        .into();
        assert_eq!(falsified.code(), 1);
        let limited: CliError = SolverError::Relation(RelationError::NotVerified {
            verdict: Verdict::ResourceLimited,
            detail: String::new(),
        })
        .into();
        assert_eq!(limited.code(), 3);
    }

    #[test]
    fn json_text_is_canonical() {
        let v: Value = serde_json::from_str(r#"{"b": [1, "2/3"], "a": null}"#).unwrap();
        let once = render_json(&v);
        let again = render_json(&serde_json::from_str(&once).unwrap());
        assert_eq!(once, again);
        assert!(once.find("\"a\"").unwrap() < once.find("\"b\"").unwrap());
    }
}
