//! Knowledge-base administration: loading a KB directory into an immutable
//! versioned snapshot, publishing snapshots atomically, amending settings,
//! aggregate validation and module structure reports.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use arc_swap::ArcSwap;
use chrono::{DateTime, Utc};
use serde::Serialize;

use crate::diagnostics::{Diagnostic, Location, ValidationReport};
use crate::knowledge_model::{
    check_consistency, frames_from_json, Catalogue, ChangeSet, Frame, KnowledgeError, SettingsError,
    CATALOGUE_FILE, DECISION_CLASS, FRAMES_FILE,
};
use crate::rule_dsl::{digest, parse_kb_files, validate_ast, Action, KbAst, ParseError, MAIN_MODULE};

#[derive(Debug, thiserror::Error)]
pub enum AdminError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error("knowledge base failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error(transparent)]
    Settings(#[from] SettingsError),
}

impl AdminError {
    /// The error as diagnostics, for callers that report failures uniformly.
    pub fn report(&self) -> ValidationReport {
        match self {
            AdminError::Invalid(report) => report.clone(),
            AdminError::Parse(e) => {
                let def = e.expected.clone().unwrap_or_else(|| "source".into());
                let location = Location { def, file: Some(e.file.clone()), line: Some(e.line) };
                ValidationReport(vec![Diagnostic::error(location, format!("{}:{}: {}", e.line, e.col, e.message))])
            }
            AdminError::Io { path, .. } => {
                ValidationReport(vec![Diagnostic::error(Location::in_file("source", path.display().to_string()), self.to_string())])
            }
            AdminError::Knowledge(e) => ValidationReport(vec![Diagnostic::error(Location::new("catalogue"), e.to_string())]),
            AdminError::Settings(e) => {
                ValidationReport(vec![Diagnostic::error(Location::new(format!("setting {}", e.setting())), e.to_string())])
            }
        }
    }
}

/// An immutable, versioned bundle of rules, catalogue (including settings) and frames.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KbSnapshot {
    pub version: u64,
    pub kb: Arc<KbAst>,
    pub catalogue: Catalogue,
    pub frames: Vec<Frame>,
    pub loaded_at: DateTime<Utc>,
    pub rules_digest: String,
}

fn read(path: &Path) -> Result<String, AdminError> {
    fs::read_to_string(path).map_err(|source| AdminError::Io { path: path.to_path_buf(), source })
}

/// Parses and validates a KB directory: every `*.arl` file in lexicographic
/// filename order, plus `catalogue.json` and `frames.json`.
pub fn load_snapshot(dir: &Path, version: u64) -> Result<KbSnapshot, AdminError> {
    let entries = fs::read_dir(dir).map_err(|source| AdminError::Io { path: dir.to_path_buf(), source })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| AdminError::Io { path: dir.to_path_buf(), source })?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "arl") && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    let mut sources = Vec::with_capacity(paths.len());
    for path in &paths {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        sources.push((name, read(path)?));
    }
    let kb = parse_kb_files(&sources)?;
    let catalogue = Catalogue::from_json(&read(&dir.join(CATALOGUE_FILE))?)?;
    let frames = frames_from_json(&read(&dir.join(FRAMES_FILE))?)?;
    let snapshot = KbSnapshot {
        version,
        rules_digest: digest(&kb),
        kb: Arc::new(kb),
        catalogue,
        frames,
        loaded_at: Utc::now(),
    };
    let report = validate_all(&snapshot);
    if report.has_errors() {
        return Err(AdminError::Invalid(report));
    }
    Ok(snapshot)
}

/// Rule-language checks, then knowledge consistency, then topic reachability.
pub fn validate_all(snapshot: &KbSnapshot) -> ValidationReport {
    let mut report = validate_ast(&snapshot.kb, Some(&snapshot.catalogue));
    report.extend(check_consistency(&snapshot.catalogue, &snapshot.frames, &snapshot.kb));
    report.extend(check_reachability(&snapshot.catalogue, &snapshot.kb));
    report
}

/// Every topic must be able to create a decision instance from its entry module.
pub fn check_reachability(catalogue: &Catalogue, kb: &KbAst) -> ValidationReport {
    let mut report = ValidationReport::default();
    for topic in &catalogue.topics {
        if !kb.has_module(&topic.entry_module) {
            continue;
        }
        let closure = kb.module_closure(&topic.entry_module);
        let decides = kb.rules.iter().filter(|r| closure.contains(&r.module)).any(|r| {
            r.all_actions()
                .into_iter()
                .any(|a| matches!(a, Action::MakeInstance { class, .. } if class == DECISION_CLASS))
        });
        if !decides {
            report.push(Diagnostic::error(
                Location::in_file(format!("topic {}", topic.id), CATALOGUE_FILE),
                format!(
                    "no rule reachable from module {} creates a {DECISION_CLASS} instance",
                    topic.entry_module
                ),
            ));
        }
    }
    report
}

/// A copy of `snapshot` with amended settings and the next version number.
pub fn apply_settings(snapshot: &KbSnapshot, changes: &ChangeSet) -> Result<KbSnapshot, SettingsError> {
    let settings = snapshot.catalogue.settings.apply(changes)?;
    let mut next = snapshot.clone();
    next.catalogue.settings = settings;
    next.version = snapshot.version + 1;
    Ok(next)
}

/// Holds the published snapshot. Readers load it without locking; writers
/// are serialized and publish by a single pointer swap.
pub struct KbStore {
    current: ArcSwap<KbSnapshot>,
    writer: Mutex<()>,
}

impl KbStore {
    pub fn new(initial: KbSnapshot) -> Self {
        KbStore { current: ArcSwap::from_pointee(initial), writer: Mutex::new(()) }
    }

    /// Loads `dir` as version 1.
    pub fn open(dir: &Path) -> Result<Self, AdminError> {
        load_snapshot(dir, 1).map(KbStore::new)
    }

    pub fn current(&self) -> Arc<KbSnapshot> {
        self.current.load_full()
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, ()> {
        self.writer.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    /// Loads `dir` and publishes it as the next version. On error the
    /// published snapshot is untouched.
    pub fn reload_kb(&self, dir: &Path) -> Result<Arc<KbSnapshot>, AdminError> {
        let _guard = self.lock();
        let next = Arc::new(load_snapshot(dir, self.current.load().version + 1)?);
        self.current.store(Arc::clone(&next));
        Ok(next)
    }

    pub fn apply_settings(&self, changes: &ChangeSet) -> Result<Arc<KbSnapshot>, AdminError> {
        let _guard = self.lock();
        let next = Arc::new(apply_settings(&self.current.load(), changes)?);
        self.current.store(Arc::clone(&next));
        Ok(next)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Import,
    Focus,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ModuleEdge {
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModularityReport {
    pub modules: Vec<String>,
    pub edges: Vec<ModuleEdge>,
    /// Groups of modules that can focus one another in a loop.
    pub cycles: Vec<Vec<String>>,
}

pub fn modularity_report(kb: &KbAst) -> ModularityReport {
    let mut modules: Vec<String> = Vec::new();
    let uses_main = kb.rules.iter().any(|r| r.module == MAIN_MODULE) || kb.classes.iter().any(|c| c.module == MAIN_MODULE);
    if uses_main && kb.module(MAIN_MODULE).is_none() {
        modules.push(MAIN_MODULE.to_string());
    }
    modules.extend(kb.modules.iter().map(|m| m.name.clone()));

    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    let mut add = |from: &str, to: &str, kind: EdgeKind| {
        let edge = ModuleEdge { from: from.to_string(), to: to.to_string(), kind };
        if seen.insert(edge.clone()) {
            edges.push(edge);
        }
    };
    for m in &kb.modules {
        for import in &m.imports {
            add(&m.name, import, EdgeKind::Import);
        }
    }
    for rule in &kb.rules {
        for action in rule.all_actions() {
            if let Action::Focus(target) = action {
                add(&rule.module, target, EdgeKind::Focus);
            }
        }
    }

    let focus: Vec<(&str, &str)> =
        edges.iter().filter(|e| e.kind == EdgeKind::Focus).map(|e| (e.from.as_str(), e.to.as_str())).collect();
    let reaches = |from: &str| -> BTreeSet<&str> {
        let mut found = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(node) = stack.pop() {
            for &(a, b) in &focus {
                if a == node && found.insert(b) {
                    stack.push(b);
                }
            }
        }
        found
    };
    let mut cycles: Vec<Vec<String>> = Vec::new();
    let mut placed = BTreeSet::new();
    for m in &modules {
        if placed.contains(m.as_str()) {
            continue;
        }
        let from_m = reaches(m);
        if !from_m.contains(m.as_str()) {
            continue;
        }
        let component: Vec<String> =
            modules.iter().filter(|n| from_m.contains(n.as_str()) && reaches(n).contains(m.as_str())).cloned().collect();
        placed.extend(component.iter().cloned());
        cycles.push(component);
    }

    ModularityReport { modules, edges, cycles }
}
