//! Report model shared by the text and JSON renderers.  Rendering is
//! deterministic: ordered detail lists, sorted maps upstream, and exact
//! rational/polynomial display strings.

use serde_json::{json, Value};

/// Outcome of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandStatus {
    /// Verdict command whose outcome matched the expectation.
    Pass,
    /// Verdict command whose outcome did not match the expectation.
    Fail,
    /// Informational command; never affects the exit status.
    Info,
    /// The command could not run; verdict commands count as failed.
    Error(String),
}

#[derive(Clone, Debug)]
pub struct CommandReport {
    pub command: String,
    /// Ordered key/value detail lines.
    pub details: Vec<(String, String)>,
    pub status: CommandStatus,
}

impl CommandReport {
    pub fn new(command: &str) -> Self {
        CommandReport {
            command: command.to_string(),
            details: Vec::new(),
            status: CommandStatus::Info,
        }
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) {
        self.details.push((key.to_string(), value.into()));
    }

    /// Record a verdict: sets Pass/Fail from outcome vs expectation and adds
    /// the standard detail lines.
    pub fn verdict(&mut self, outcome: bool, expect: bool) {
        self.push("expected", yesno(expect));
        self.status = if outcome == expect {
            CommandStatus::Pass
        } else {
            CommandStatus::Fail
        };
    }
}

pub fn yesno(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub scenario: String,
    pub dim: usize,
    pub construction: String,
    pub notes: Vec<String>,
    /// Lower-triangular entries of the fiber-block `B`, as display strings.
    pub metric: Vec<(String, String)>,
    pub commands: Vec<CommandReport>,
    /// Set when the metric could not be constructed at all.
    pub construction_error: Option<String>,
}

impl Report {
    pub fn verdict_total(&self) -> usize {
        self.commands
            .iter()
            .filter(|c| !matches!(c.status, CommandStatus::Info))
            .count()
    }

    pub fn verdict_passed(&self) -> usize {
        self.commands
            .iter()
            .filter(|c| c.status == CommandStatus::Pass)
            .count()
    }

    /// Exit-status criterion: every verdict command passed and the metric
    /// was constructed.
    pub fn all_passed(&self) -> bool {
        self.construction_error.is_none() && self.verdict_passed() == self.verdict_total()
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("scenario: {}\n", self.scenario));
        out.push_str(&format!("dim: {}\n", self.dim));
        out.push_str(&format!("construction: {}\n", self.construction));
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        if let Some(err) = &self.construction_error {
            out.push_str(&format!("error: {err}\n"));
            out.push_str("summary: FAIL (metric construction failed)\n");
            return out;
        }
        for (name, value) in &self.metric {
            out.push_str(&format!("metric: {name} = {value}\n"));
        }
        for cmd in &self.commands {
            out.push('\n');
            out.push_str(&format!("command: {}\n", cmd.command));
            for (key, value) in &cmd.details {
                out.push_str(&format!("  {key}: {value}\n"));
            }
            let status = match &cmd.status {
                CommandStatus::Pass => "PASS".to_string(),
                CommandStatus::Fail => "FAIL".to_string(),
                CommandStatus::Info => "INFO".to_string(),
                CommandStatus::Error(msg) => format!("ERROR ({msg})"),
            };
            out.push_str(&format!("  verdict: {status}\n"));
        }
        out.push('\n');
        out.push_str(&format!(
            "summary: {} ({}/{} verdict commands passed)\n",
            if self.all_passed() { "PASS" } else { "FAIL" },
            self.verdict_passed(),
            self.verdict_total()
        ));
        out
    }

    pub fn render_json(&self) -> String {
        let commands: Vec<Value> = self
            .commands
            .iter()
            .map(|cmd| {
                let details: Vec<Value> =
                    cmd.details.iter().map(|(k, v)| json!([k, v])).collect();
                let (status, error) = match &cmd.status {
                    CommandStatus::Pass => ("pass", Value::Null),
                    CommandStatus::Fail => ("fail", Value::Null),
                    CommandStatus::Info => ("info", Value::Null),
                    CommandStatus::Error(msg) => ("error", Value::String(msg.clone())),
                };
                json!({
                    "command": cmd.command,
                    "details": details,
                    "status": status,
                    "error": error,
                })
            })
            .collect();
        let metric: Vec<Value> = self
            .metric
            .iter()
            .map(|(k, v)| json!([k, v]))
            .collect();
        let value = json!({
            "scenario": self.scenario,
            "dim": self.dim,
            "construction": self.construction,
            "notes": self.notes,
            "metric": metric,
            "construction_error": self.construction_error,
            "commands": commands,
            "summary": {
                "verdicts": self.verdict_total(),
                "passed": self.verdict_passed(),
                "ok": self.all_passed(),
            },
        });
        let mut text = serde_json::to_string_pretty(&value).expect("report serialization");
        text.push('\n');
        text
    }
}
