#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use advisor_core::kb_admin::{load_snapshot, KbSnapshot};
use advisor_core::rule_dsl::{parse_kb_files, KbAst};

pub fn kb_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../kb")
}

pub fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

pub fn fig5_source() -> String {
    fixture("fig5.arl")
}

/// The figure's rules together with the list modules they focus on.
pub fn fig5_kb() -> Arc<KbAst> {
    let files = [("fig5.arl".to_string(), fig5_source()), ("list_modules.arl".to_string(), fixture("list_modules.arl"))];
    Arc::new(parse_kb_files(&files).unwrap())
}

pub fn shipped() -> KbSnapshot {
    load_snapshot(&kb_dir(), 1).unwrap_or_else(|e| panic!("{e}"))
}
