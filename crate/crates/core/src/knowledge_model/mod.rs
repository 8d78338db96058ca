//! Declarative knowledge around the rules: frames and the semantic network
//! they induce, the regulation catalogue with citable law articles,
//! consultation topics, and amendable settings.

mod settings;

use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use settings::{ChangeSet, SettingValue, Settings, SettingsError};

use crate::diagnostics::{Diagnostic, Location, ValidationReport};
use crate::rule_dsl::{def_key, Action, KbAst};

/// Class whose instance carries a consultation's final decision.
pub const DECISION_CLASS: &str = "Final_Decision";
pub const SLOT_DECISION_OK: &str = "Decision_OK";
pub const SLOT_CAUSES: &str = "Decision_Causes";
pub const SLOT_LAW_TEXT: &str = "Decision_Law_Text";
pub const SLOT_LAW_LINK: &str = "Decision_Law_Link";

pub const CATALOGUE_FILE: &str = "catalogue.json";
pub const FRAMES_FILE: &str = "frames.json";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "lowercase")]
pub enum SlotValue {
    Frame(String),
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSlot {
    pub relation: String,
    pub value: SlotValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub name: String,
    pub slots: Vec<FrameSlot>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub label: String,
    pub to: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticNetwork {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<Edge>,
}

/// Nodes are frame names plus every frame-ref target; each frame-ref slot
/// becomes one labeled edge. Literal slots add nothing.
pub fn build_network(frames: &[Frame]) -> SemanticNetwork {
    let mut net = SemanticNetwork::default();
    for frame in frames {
        net.nodes.insert(frame.name.clone());
        for slot in &frame.slots {
            if let SlotValue::Frame(target) = &slot.value {
                net.nodes.insert(target.clone());
                net.edges.insert(Edge { from: frame.name.clone(), label: slot.relation.clone(), to: target.clone() });
            }
        }
    }
    net
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regulation {
    pub id: String,
    pub name: String,
    pub declared_rule_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawArticle {
    pub id: String,
    pub regulation_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicDef {
    pub id: String,
    pub title: String,
    pub regulation_id: String,
    pub entry_module: String,
    /// Query id to question text, in presentation order.
    pub queries: IndexMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalogue {
    pub regulations: Vec<Regulation>,
    pub articles: Vec<LawArticle>,
    pub topics: Vec<TopicDef>,
    #[serde(default)]
    pub settings: Settings,
}

#[derive(Debug, thiserror::Error)]
pub enum KnowledgeError {
    #[error("unknown law article {0:?}")]
    UnknownLawLink(String),
    #[error("unknown topic {0:?}")]
    UnknownTopic(String),
    #[error("malformed {file}: {source}")]
    Json {
        file: &'static str,
        #[source]
        source: serde_json::Error,
    },
}

impl Catalogue {
    pub fn from_json(text: &str) -> Result<Catalogue, KnowledgeError> {
        serde_json::from_str(text).map_err(|source| KnowledgeError::Json { file: CATALOGUE_FILE, source })
    }

    pub fn topic(&self, id: &str) -> Result<&TopicDef, KnowledgeError> {
        self.topics.iter().find(|t| t.id == id).ok_or_else(|| KnowledgeError::UnknownTopic(id.to_string()))
    }

    pub fn regulation(&self, id: &str) -> Option<&Regulation> {
        self.regulations.iter().find(|r| r.id == id)
    }
}

pub fn frames_from_json(text: &str) -> Result<Vec<Frame>, KnowledgeError> {
    serde_json::from_str(text).map_err(|source| KnowledgeError::Json { file: FRAMES_FILE, source })
}

pub fn resolve_law_link<'a>(catalogue: &'a Catalogue, id: &str) -> Result<&'a LawArticle, KnowledgeError> {
    catalogue
        .articles
        .iter()
        .find(|a| a.id == id)
        .ok_or_else(|| KnowledgeError::UnknownLawLink(id.to_string()))
}

/// Splits a `|`-separated citation string, trimming and dropping empties.
pub fn split_citations(s: &str) -> Vec<String> {
    s.split('|').map(str::trim).filter(|p| !p.is_empty()).map(str::to_string).collect()
}

fn is_article_id(id: &str) -> bool {
    !id.is_empty() && id.split('-').all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_digit()))
}

/// Law-article ids a rule can write into the decision's law-link slot.
pub fn cited_law_links(action: &Action) -> Vec<String> {
    let exprs = match action {
        Action::Bind { global, value } if global == SLOT_LAW_LINK => vec![value],
        Action::MakeInstance { slots, .. } => {
            slots.iter().filter(|(slot, _)| slot == SLOT_LAW_LINK).map(|(_, e)| e).collect()
        }
        _ => Vec::new(),
    };
    exprs.into_iter().flat_map(|e| e.string_literals()).flat_map(split_citations).collect()
}

/// Cross-reference checks between frames, catalogue and rules.
pub fn check_consistency(catalogue: &Catalogue, frames: &[Frame], ast: &KbAst) -> ValidationReport {
    let mut report = ValidationReport::default();

    let frame_names: HashSet<&str> = frames.iter().map(|f| f.name.as_str()).collect();
    let mut seen_frames = HashSet::new();
    for frame in frames {
        let loc = Location::in_file(format!("frame {}", frame.name), FRAMES_FILE);
        if !seen_frames.insert(frame.name.as_str()) {
            report.push(Diagnostic::error(loc.clone(), "duplicate frame name"));
        }
        let mut pairs = HashSet::new();
        for slot in &frame.slots {
            if !pairs.insert((&slot.relation, &slot.value)) {
                report.push(Diagnostic::error(loc.clone(), format!("duplicate slot {} {:?}", slot.relation, slot.value)));
            }
            if let SlotValue::Frame(target) = &slot.value {
                if !frame_names.contains(target.as_str()) {
                    report.push(Diagnostic::error(
                        loc.clone(),
                        format!("slot \"{}\" refers to undeclared frame {target}", slot.relation),
                    ));
                }
            }
        }
    }

    let regulation_ids: HashSet<&str> = catalogue.regulations.iter().map(|r| r.id.as_str()).collect();
    if regulation_ids.len() != catalogue.regulations.len() {
        report.push(Diagnostic::error(Location::in_file("regulations", CATALOGUE_FILE), "duplicate regulation id"));
    }
    let mut article_ids = HashSet::new();
    for article in &catalogue.articles {
        let loc = Location::in_file(format!("article {}", article.id), CATALOGUE_FILE);
        if !is_article_id(&article.id) {
            report.push(Diagnostic::error(loc.clone(), "article id must look like 102-1-3"));
        }
        if !article_ids.insert(article.id.as_str()) {
            report.push(Diagnostic::error(loc.clone(), "duplicate article id"));
        }
        if !regulation_ids.contains(article.regulation_id.as_str()) {
            report.push(Diagnostic::error(loc, format!("unknown regulation {}", article.regulation_id)));
        }
    }

    for topic in &catalogue.topics {
        let loc = Location::in_file(format!("topic {}", topic.id), CATALOGUE_FILE);
        if !ast.has_module(&topic.entry_module) {
            report.push(Diagnostic::error(loc.clone(), format!("entry module {} is not declared", topic.entry_module)));
        }
        if !regulation_ids.contains(topic.regulation_id.as_str()) {
            report.push(Diagnostic::error(loc.clone(), format!("unknown regulation {}", topic.regulation_id)));
        }
        for (qid, text) in &topic.queries {
            if text.trim().is_empty() {
                report.push(Diagnostic::error(loc.clone(), format!("query {qid} has no text")));
            }
        }
    }

    for err in catalogue.settings.check() {
        report.push(Diagnostic::error(
            Location::in_file(format!("setting {}", err.setting()), CATALOGUE_FILE),
            err.to_string(),
        ));
    }

    for rule in &ast.rules {
        let loc = Location::of_def(ast, &def_key("defrule", &rule.qualified_name()));
        for action in rule.all_actions() {
            for link in cited_law_links(action) {
                if resolve_law_link(catalogue, &link).is_err() {
                    report.push(Diagnostic::error(
                        loc.clone(),
                        format!("rule {} cites unknown law article {link}", rule.qualified_name()),
                    ));
                }
            }
        }
        for pattern in &rule.patterns {
            for expr in pattern.guard.iter().flat_map(|g| g.exprs()) {
                for name in expr.settings() {
                    if catalogue.settings.get(name).is_none() {
                        report.push(Diagnostic::error(loc.clone(), format!("test refers to unknown setting {name}")));
                    }
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbStats {
    /// Regulation name to declared rule count, in catalogue order.
    pub declared: IndexMap<String, u32>,
    pub total_declared: u64,
    /// Topic id to number of rules in its module closure.
    pub implemented: IndexMap<String, usize>,
}

pub fn kb_stats(catalogue: &Catalogue, ast: &KbAst) -> KbStats {
    let declared: IndexMap<String, u32> =
        catalogue.regulations.iter().map(|r| (r.name.clone(), r.declared_rule_count)).collect();
    let total_declared = catalogue.regulations.iter().map(|r| u64::from(r.declared_rule_count)).sum();
    let implemented = catalogue
        .topics
        .iter()
        .map(|t| {
            let closure: BTreeSet<String> = ast.module_closure(&t.entry_module).into_iter().collect();
            (t.id.clone(), ast.rules.iter().filter(|r| closure.contains(&r.module)).count())
        })
        .collect();
    KbStats { declared, total_declared, implemented }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule_dsl::parse_kb;

    fn frame(name: &str, slots: &[(&str, SlotValue)]) -> Frame {
        Frame {
            name: name.into(),
            slots: slots.iter().map(|(r, v)| FrameSlot { relation: (*r).into(), value: v.clone() }).collect(),
        }
    }

    #[test]
    fn literal_only_frame() {
        let net = build_network(&[frame("Certificate", &[("Is", SlotValue::Literal("Up to date".into()))])]);
        assert_eq!(net.nodes.len(), 1);
        assert!(net.edges.is_empty());
    }

    #[test]
    fn dangling_targets_still_become_nodes() {
        let net = build_network(&[frame("Job", &[("Belongs to", SlotValue::Frame("Affiliation".into()))])]);
        assert_eq!(net.nodes.len(), 2);
        assert_eq!(net.edges.len(), 1);
    }

    #[test]
    fn frames_json_shape() {
        let frames = frames_from_json(
            r#"[{"name":"Job","slots":[{"relation":"Belongs to","value":{"kind":"frame","text":"Affiliation"}}]}]"#,
        )
        .unwrap();
        assert_eq!(frames[0].slots[0].value, SlotValue::Frame("Affiliation".into()));
    }

    #[test]
    fn citation_splitting() {
        assert_eq!(split_citations("|rule3| rule 4"), vec!["rule3", "rule 4"]);
        assert_eq!(split_citations("102-1-3|102-1-4"), vec!["102-1-3", "102-1-4"]);
        assert!(split_citations("").is_empty());
    }

    #[test]
    fn article_id_shape() {
        assert!(is_article_id("102-1-3"));
        assert!(is_article_id("7"));
        assert!(!is_article_id("102--3"));
        assert!(!is_article_id("a-1"));
        assert!(!is_article_id(""));
    }

    #[test]
    fn law_links_collected_from_bind_and_instance() {
        let ast = parse_kb(
            r#"(defrule r (x) =>
                 (bind ?*Decision_Law_Link* (str-cat "1-1|" "1-2"))
                 (make-instance I of Final_Decision (Decision_Law_Link "9-9")))"#,
        )
        .unwrap();
        let links: Vec<String> = ast.rules[0].actions.iter().flat_map(cited_law_links).collect();
        assert_eq!(links, vec!["1-1", "1-2", "9-9"]);
    }

    #[test]
    fn empty_catalogue_stats() {
        let stats = kb_stats(&Catalogue::default(), &KbAst::default());
        assert_eq!(stats.total_declared, 0);
        assert!(stats.declared.is_empty());
    }
}
