//! Batch commands. Each returns the process exit code and writes to the
//! given streams so they can be driven in-process.

use std::fs;
use std::io::Write;
use std::path::Path;

use advisor_core::consultation::{replay, ConsultError};
use advisor_core::diagnostics::ValidationReport;
use advisor_core::kb_admin::{load_snapshot, validate_all, AdminError, KbSnapshot};
use advisor_core::knowledge_model::{kb_stats, KnowledgeError};

use crate::views::DecisionBody;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_DENIED: i32 = 2;
pub const EXIT_UNDECIDED: i32 = 3;
pub const EXIT_BAD_ANSWERS: i32 = 4;
pub const EXIT_USAGE: i32 = 64;

pub fn print_report(err: &mut dyn Write, report: &ValidationReport) {
    for d in report.iter() {
        let _ = writeln!(err, "{d}");
    }
}

/// Loads a KB, mapping an unreadable directory to the usage exit code.
fn load(dir: &Path, err: &mut dyn Write) -> Result<KbSnapshot, i32> {
    if let Err(e) = fs::read_dir(dir) {
        let _ = writeln!(err, "cannot read {}: {e}", dir.display());
        return Err(EXIT_USAGE);
    }
    load_snapshot(dir, 1).map_err(|e| {
        match &e {
            AdminError::Invalid(report) => print_report(err, report),
            other => print_report(err, &other.report()),
        }
        EXIT_INVALID
    })
}

pub fn validate(dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match load(dir, err) {
        Ok(snap) => {
            let report = validate_all(&snap);
            print_report(err, &report);
            let _ = writeln!(out, "ok: {} rules in {} modules", snap.kb.rules.len(), snap.kb.modules.len());
            if report.is_empty() {
                EXIT_OK
            } else {
                EXIT_INVALID
            }
        }
        Err(code) => code,
    }
}

pub fn stats(dir: &Path, as_json: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let snap = match load(dir, err) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let stats = kb_stats(&snap.catalogue, &snap.kb);
    if as_json {
        let _ = writeln!(out, "{}", serde_json::to_string_pretty(&stats).unwrap_or_default());
        return EXIT_OK;
    }
    let width = stats.declared.keys().map(|n| n.chars().count()).max().unwrap_or(0).max("Regulation".len());
    let _ = writeln!(out, "{:<width$}  Rules", "Regulation");
    for (name, count) in &stats.declared {
        let _ = writeln!(out, "{name:<width$}  {count:>5}");
    }
    let _ = writeln!(out, "{:<width$}  {:>5}", "Total", stats.total_declared);
    EXIT_OK
}

/// Runs a whole consultation from a newline-separated answers file and
/// prints the decision as JSON.
pub fn consult(kb: &Path, topic: &str, answers_file: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let snap = match load(kb, err) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let text = match fs::read_to_string(answers_file) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "cannot read {}: {e}", answers_file.display());
            return EXIT_USAGE;
        }
    };
    let answers: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    match replay(&snap.catalogue, snap.kb.clone(), snap.version, topic, &answers) {
        Ok((_, decision)) => {
            let code = match decision.ok_code {
                1 => EXIT_OK,
                2 => EXIT_DENIED,
                _ => EXIT_UNDECIDED,
            };
            let body = DecisionBody::new(decision, &snap.catalogue);
            let _ = writeln!(out, "{}", serde_json::to_string(&body).unwrap_or_default());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                ConsultError::Incomplete(_) | ConsultError::TrailingAnswers(_) | ConsultError::BinaryViolation(_) => {
                    EXIT_BAD_ANSWERS
                }
                ConsultError::Knowledge(KnowledgeError::UnknownTopic(_)) => EXIT_USAGE,
                _ => EXIT_INVALID,
            }
        }
    }
}
