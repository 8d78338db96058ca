mod common;

use std::collections::BTreeSet;

use advisor_core::kb_admin::validate_all;
use advisor_core::knowledge_model::*;
use advisor_core::rule_dsl::{parse_kb, parse_kb_files, KbAst};
use proptest::prelude::*;

fn edge(from: &str, label: &str, to: &str) -> Edge {
    Edge { from: from.into(), label: label.into(), to: to.into() }
}

/// Table 1 enumerated by hand, independent of frames.json.
fn table1_oracle() -> (BTreeSet<String>, BTreeSet<Edge>) {
    let nodes = [
        "Student",
        "Behavior",
        "Certificate",
        "Job",
        "Personal interview",
        "Health status",
        "Affiliation",
        "The study in university",
        "OK",
        "Not",
        "Legal authority",
    ]
    .map(String::from)
    .into();
    let mut edges: BTreeSet<Edge> = [
        edge("Student", "Has A", "Behavior"),
        edge("Student", "Has A", "Certificate"),
        edge("Student", "Has A", "Job"),
        edge("Student", "Get", "Personal interview"),
        edge("Student", "Get", "Health status"),
        edge("Job", "Belongs to", "Affiliation"),
        edge("Affiliation", "Approve", "The study in university"),
        edge("OK", "Give the", "Legal authority"),
        edge("Not", "Give the", "Legal authority"),
    ]
    .into();
    for decided in ["Behavior", "Personal interview", "Health status", "The study in university"] {
        edges.insert(edge(decided, "Decision is", "Not"));
        edges.insert(edge(decided, "Decision is", "OK"));
    }
    (nodes, edges)
}

#[test]
fn table1_network_matches_hand_enumeration() {
    let snap = common::shipped();
    let net = build_network(&snap.frames);
    let (nodes, edges) = table1_oracle();
    assert_eq!(net.nodes, nodes);
    assert_eq!(net.edges, edges);
    assert_eq!((net.nodes.len(), net.edges.len()), (11, 17));
    assert!(net.edges.contains(&edge("Student", "Has A", "Behavior")));
    assert!(net.edges.contains(&edge("Job", "Belongs to", "Affiliation")));
    assert!(net.edges.iter().all(|e| e.from != "Legal authority"));
}

proptest! {
    #[test]
    fn network_ignores_frame_order(seed in any::<u64>()) {
        let mut frames = common::shipped().frames;
        let n = frames.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            frames.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert_eq!(build_network(&frames), build_network(&common::shipped().frames));
    }
}

#[test]
fn law_links_resolve_bijectively() {
    let snap = common::shipped();
    let cat = &snap.catalogue;
    let ids: BTreeSet<&str> = cat.articles.iter().map(|a| a.id.as_str()).collect();
    assert_eq!(ids.len(), cat.articles.len());
    for a in &cat.articles {
        assert_eq!(resolve_law_link(cat, &a.id).unwrap(), a);
    }
    assert_eq!(resolve_law_link(cat, "102-1-3").unwrap().regulation_id, "1");
    assert_eq!(cat.regulation("1").unwrap().declared_rule_count, 53);
    assert!(matches!(resolve_law_link(cat, ""), Err(KnowledgeError::UnknownLawLink(_))));
    assert!(matches!(resolve_law_link(cat, "999-9-9"), Err(KnowledgeError::UnknownLawLink(_))));
}

#[test]
fn citation_splitting() {
    assert_eq!(split_citations("|rule3| rule 4"), ["rule3", "rule 4"]);
    assert_eq!(split_citations("102-1-3|102-1-4"), ["102-1-3", "102-1-4"]);
    assert!(split_citations("").is_empty());
    assert!(split_citations(" | |").is_empty());
}

#[test]
fn shipped_stats() {
    let snap = common::shipped();
    let stats = kb_stats(&snap.catalogue, &snap.kb);
    let counts: Vec<u32> = stats.declared.values().copied().collect();
    assert_eq!(counts, [53, 52, 60, 41, 68, 106, 51, 51]);
    assert_eq!(stats.declared.get_index(0).map(|(_, v)| *v), Some(53));
    assert_eq!(stats.declared.get_index(5).map(|(_, v)| *v), Some(106));
    assert_eq!(stats.total_declared, 482);
    assert!(stats.implemented["student-acceptance"] > 0);
    assert!(stats.implemented["demonstrator-appointment"] > 0);
}

#[test]
fn empty_catalogue_stats() {
    let stats = kb_stats(&Catalogue::default(), &KbAst::default());
    assert_eq!(stats.total_declared, 0);
    assert!(stats.declared.is_empty());
}

proptest! {
    #[test]
    fn total_is_sum_of_declared(counts in prop::collection::vec(0u32..1000, 0..12)) {
        let catalogue = Catalogue {
            regulations: counts
                .iter()
                .enumerate()
                .map(|(i, c)| Regulation { id: i.to_string(), name: format!("reg {i}"), declared_rule_count: *c })
                .collect(),
            ..Catalogue::default()
        };
        let stats = kb_stats(&catalogue, &KbAst::default());
        prop_assert_eq!(stats.total_declared, counts.iter().map(|c| u64::from(*c)).sum::<u64>());
        prop_assert_eq!(stats.declared.len(), counts.len());
    }
}

#[test]
fn unknown_topic_is_error() {
    let snap = common::shipped();
    assert!(matches!(snap.catalogue.topic("nope"), Err(KnowledgeError::UnknownTopic(_))));
    assert_eq!(snap.catalogue.topic("student-acceptance").unwrap().queries.len(), 5);
}

#[test]
fn malformed_catalogue_names_file() {
    let err = Catalogue::from_json("{").unwrap_err();
    assert!(err.to_string().contains("catalogue.json"));
    let err = frames_from_json("[{]").unwrap_err();
    assert!(err.to_string().contains("frames.json"));
}

// ---- seeded faults against the shipped knowledge base ----

fn shipped_sources() -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(common::kb_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "arl"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(p).unwrap()))
        .collect()
}

#[test]
fn clean_kb_has_no_consistency_findings() {
    let snap = common::shipped();
    assert!(check_consistency(&snap.catalogue, &snap.frames, &snap.kb).is_empty());
    assert!(validate_all(&snap).is_empty());
}

#[test]
fn deleted_frame_is_reported() {
    let snap = common::shipped();
    let frames: Vec<Frame> = snap.frames.iter().filter(|f| f.name != "Affiliation").cloned().collect();
    let report = check_consistency(&snap.catalogue, &frames, &snap.kb);
    let d = report.errors().next().expect("dangling frame ref");
    assert_eq!(d.location.def, "frame Job");
    assert_eq!(d.location.file.as_deref(), Some(FRAMES_FILE));
    assert!(d.message.contains("Affiliation"));
}

#[test]
fn deleted_article_is_reported_at_citing_rule() {
    let snap = common::shipped();
    let mut catalogue = snap.catalogue.clone();
    catalogue.articles.retain(|a| a.id != "102-1-7");
    let report = check_consistency(&catalogue, &snap.frames, &snap.kb);
    let d = report.errors().next().expect("dangling law link");
    assert!(d.message.contains("102-1-7"));
    assert!(d.location.def.contains("Refuse_Health"));
    assert_eq!(d.location.file.as_deref(), Some("10_student_acceptance.arl"));
    assert!(d.location.line.is_some());
}

#[test]
fn deleted_topic_module_is_reported() {
    let snap = common::shipped();
    let sources: Vec<_> = shipped_sources().into_iter().filter(|(n, _)| !n.starts_with("20_")).collect();
    let kb = parse_kb_files(&sources).unwrap();
    let report = check_consistency(&snap.catalogue, &snap.frames, &kb);
    let d = report.errors().next().expect("missing entry module");
    assert_eq!(d.location.def, "topic demonstrator-appointment");
    assert_eq!(d.location.file.as_deref(), Some(CATALOGUE_FILE));
}

#[test]
fn dangling_rule_link_is_reported() {
    let snap = common::shipped();
    let kb = parse_kb(
        "(defglobal ?*Decision_Law_Link* = \"\")\n(defrule bad (x) => (bind ?*Decision_Law_Link* \"999-9-9\"))",
    )
    .unwrap();
    let report = check_consistency(&snap.catalogue, &snap.frames, &kb);
    let cited: Vec<_> = report.errors().filter(|d| d.location.def.starts_with("defrule")).collect();
    assert_eq!(cited.len(), 1);
    let d = cited[0];
    assert!(d.message.contains("999-9-9"));
    assert_eq!(d.location.line, Some(2));
}
