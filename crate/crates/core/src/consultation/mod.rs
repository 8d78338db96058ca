//! Yes/no consultations over a topic of the knowledge base.
//!
//! A session starts by asserting `(Topic <id>)` and running the engine.
//! Each `ask` suspends the run with a query; the answer is asserted as
//! `(Answer <query> yes|no)` and the run resumes. A session is decided once
//! the engine is quiescent and a `Final_Decision` instance exists.

use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::inference_engine::{Bindings, Engine, EngineError, EngineSnapshot, InstanceObj, RunOutcome};
use crate::knowledge_model::{
    resolve_law_link, split_citations, Catalogue, KnowledgeError, Settings, TopicDef, DECISION_CLASS,
    SLOT_CAUSES, SLOT_DECISION_OK, SLOT_LAW_LINK, SLOT_LAW_TEXT,
};
use crate::rule_dsl::{digest, Atom, KbAst};

pub const TOPIC_FACT: &str = "Topic";
pub const ANSWER_FACT: &str = "Answer";
pub const EXCEPTION_FACT: &str = "Exception";
pub const ANSWER_OPTIONS: [&str; 2] = ["yes", "no"];

#[derive(Debug, thiserror::Error)]
pub enum ConsultError {
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("answer must be \"yes\" or \"no\", got {0:?}")]
    BinaryViolation(String),
    #[error("session awaits query {expected}, not {got}")]
    StaleQuery { expected: String, got: String },
    #[error("session is already {0}")]
    SessionClosed(&'static str),
    #[error("rule asked query {0}, which the topic does not define")]
    UnknownQuery(String),
    #[error("no {DECISION_CLASS} instance exists")]
    NoDecision,
    #[error("decision code {0} is not 0, 1 or 2")]
    InvalidDecisionCode(i64),
    #[error("consultation incomplete: query {0} is unanswered")]
    Incomplete(String),
    #[error("consultation decided with {0} answer(s) left over")]
    TrailingAnswers(usize),
    #[error("session was recorded against a different rule set")]
    KbMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum SessionStatus {
    AwaitingAnswer { query_id: String },
    Decided,
    Abandoned,
}

impl SessionStatus {
    fn label(&self) -> &'static str {
        match self {
            SessionStatus::AwaitingAnswer { .. } => "awaiting an answer",
            SessionStatus::Decided => "decided",
            SessionStatus::Abandoned => "abandoned",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub query_id: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryPrompt {
    pub query_id: String,
    pub text: String,
    pub options: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub ok_code: i64,
    pub causes: String,
    pub law_texts: Vec<String>,
    pub law_links: Vec<String>,
    pub exceptions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Prompt(QueryPrompt),
    Decision(Decision),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationEntry {
    pub rule: String,
    pub module: String,
    pub salience: i32,
    pub bindings: Bindings,
    pub facts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub topic_id: String,
    pub kb_version: u64,
    pub engine: Engine,
    pub answer_log: Vec<AnswerRecord>,
    pub status: SessionStatus,
    pub created_at: DateTime<Utc>,
}

/// Serialized form of a session. The rule set is identified by digest and
/// settings are pinned so the session can be rebuilt after a restart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    pub topic_id: String,
    pub kb_version: u64,
    pub rules_digest: String,
    pub settings: Settings,
    pub answer_log: Vec<AnswerRecord>,
    pub status: SessionStatus,
    pub created_at: DateTime<Utc>,
    pub engine: EngineSnapshot,
}

fn prompt(topic: &TopicDef, query_id: &str) -> Result<QueryPrompt, ConsultError> {
    let text = topic.queries.get(query_id).ok_or_else(|| ConsultError::UnknownQuery(query_id.to_string()))?;
    Ok(QueryPrompt {
        query_id: query_id.to_string(),
        text: text.clone(),
        options: ANSWER_OPTIONS.iter().map(|s| s.to_string()).collect(),
    })
}

/// Runs `engine` and maps the outcome to the next step and status.
fn advance(engine: &mut Engine, topic: &TopicDef, catalogue: &Catalogue) -> Result<(Step, SessionStatus), ConsultError> {
    match engine.run()? {
        RunOutcome::Suspended(q) => {
            let p = prompt(topic, &q)?;
            Ok((Step::Prompt(p), SessionStatus::AwaitingAnswer { query_id: q }))
        }
        RunOutcome::Quiescent => {
            let decision = extract_decision(engine, Some(catalogue))?;
            Ok((Step::Decision(decision), SessionStatus::Decided))
        }
    }
}

pub fn start_session(
    catalogue: &Catalogue,
    kb: Arc<KbAst>,
    kb_version: u64,
    topic_id: &str,
) -> Result<(Session, Step), ConsultError> {
    let topic = catalogue.topic(topic_id)?;
    let mut engine = Engine::new(kb, catalogue.settings.clone())?;
    engine.assert_fact(TOPIC_FACT, vec![Atom::symbol(topic_id)])?;
    let (step, status) = advance(&mut engine, topic, catalogue)?;
    let session = Session {
        id: uuid::Uuid::new_v4().to_string(),
        topic_id: topic_id.to_string(),
        kb_version,
        engine,
        answer_log: Vec::new(),
        status,
        created_at: Utc::now(),
    };
    Ok((session, step))
}

/// Feeds one answer. On error the session is left unchanged.
pub fn submit_answer(
    session: &mut Session,
    catalogue: &Catalogue,
    query_id: &str,
    answer: &str,
) -> Result<Step, ConsultError> {
    let expected = match &session.status {
        SessionStatus::AwaitingAnswer { query_id } => query_id.clone(),
        closed => return Err(ConsultError::SessionClosed(closed.label())),
    };
    if !ANSWER_OPTIONS.contains(&answer) {
        return Err(ConsultError::BinaryViolation(answer.to_string()));
    }
    if expected != query_id {
        return Err(ConsultError::StaleQuery { expected, got: query_id.to_string() });
    }
    let topic = catalogue.topic(&session.topic_id)?;
    let mut engine = session.engine.clone();
    engine.assert_fact(ANSWER_FACT, vec![Atom::symbol(query_id), Atom::symbol(answer)])?;
    let (step, status) = advance(&mut engine, topic, catalogue)?;
    session.engine = engine;
    session.status = status;
    session.answer_log.push(AnswerRecord { query_id: query_id.to_string(), answer: answer.to_string() });
    Ok(step)
}

/// The step a session currently presents.
pub fn current_step(session: &Session, catalogue: &Catalogue) -> Result<Step, ConsultError> {
    match &session.status {
        SessionStatus::AwaitingAnswer { query_id } => Ok(Step::Prompt(prompt(catalogue.topic(&session.topic_id)?, query_id)?)),
        SessionStatus::Decided => Ok(Step::Decision(extract_decision(&session.engine, Some(catalogue))?)),
        SessionStatus::Abandoned => Err(ConsultError::SessionClosed("abandoned")),
    }
}

fn decision_instance(engine: &Engine) -> Option<&InstanceObj> {
    engine.instances().values().find(|i| i.class_name == DECISION_CLASS)
}

fn slot_text(instance: &InstanceObj, slot: &str) -> String {
    instance.slot_values.get(slot).map(Atom::text).unwrap_or_default()
}

/// Reads the decision instance (the first by name if several exist) and the
/// `(Exception ...)` facts in assertion order.
pub fn extract_decision(engine: &Engine, catalogue: Option<&Catalogue>) -> Result<Decision, ConsultError> {
    let instance = decision_instance(engine).ok_or(ConsultError::NoDecision)?;
    let ok_code = match instance.slot_values.get(SLOT_DECISION_OK) {
        None => 0,
        Some(Atom::Integer(n)) if (0..=2).contains(n) => *n,
        Some(Atom::Integer(n)) => return Err(ConsultError::InvalidDecisionCode(*n)),
        Some(other) => return Err(EngineError::Guard(format!("{SLOT_DECISION_OK} holds {other}")).into()),
    };
    let law_links = split_citations(&slot_text(instance, SLOT_LAW_LINK));
    if let Some(catalogue) = catalogue {
        for link in &law_links {
            resolve_law_link(catalogue, link)?;
        }
    }
    let exceptions = engine
        .facts()
        .filter(|f| f.head == EXCEPTION_FACT)
        .map(|f| f.args.iter().map(Atom::text).collect::<Vec<_>>().join(" "))
        .collect();
    Ok(Decision {
        ok_code,
        causes: slot_text(instance, SLOT_CAUSES),
        law_texts: split_citations(&slot_text(instance, SLOT_LAW_TEXT)),
        law_links,
        exceptions,
    })
}

pub fn explanation(session: &Session) -> Vec<ExplanationEntry> {
    trace(&session.engine)
}

pub fn trace(engine: &Engine) -> Vec<ExplanationEntry> {
    engine
        .fired_log()
        .iter()
        .map(|record| {
            let rule = engine.kb().rule(&record.rule);
            ExplanationEntry {
                rule: record.rule.clone(),
                module: rule.map(|r| r.module.clone()).unwrap_or_default(),
                salience: rule.map_or(0, |r| r.salience),
                bindings: record.bindings.clone(),
                facts: record.facts.clone(),
            }
        })
        .collect()
}

/// Runs a whole consultation from a list of answers given in query order.
pub fn replay(
    catalogue: &Catalogue,
    kb: Arc<KbAst>,
    kb_version: u64,
    topic_id: &str,
    answers: &[&str],
) -> Result<(Session, Decision), ConsultError> {
    let (mut session, mut step) = start_session(catalogue, kb, kb_version, topic_id)?;
    let mut remaining = answers.iter();
    loop {
        match step {
            Step::Decision(d) => {
                let left = remaining.count();
                return if left == 0 { Ok((session, d)) } else { Err(ConsultError::TrailingAnswers(left)) };
            }
            Step::Prompt(p) => {
                let answer = remaining.next().ok_or_else(|| ConsultError::Incomplete(p.query_id.clone()))?;
                step = submit_answer(&mut session, catalogue, &p.query_id, answer)?;
            }
        }
    }
}

impl Session {
    pub fn to_record(&self) -> SessionRecord {
        SessionRecord {
            id: self.id.clone(),
            topic_id: self.topic_id.clone(),
            kb_version: self.kb_version,
            rules_digest: digest(self.engine.kb()),
            settings: self.engine.settings().clone(),
            answer_log: self.answer_log.clone(),
            status: self.status.clone(),
            created_at: self.created_at,
            engine: self.engine.snapshot(),
        }
    }

    /// Rebuilds a session against `kb`, which must be the rule set it was recorded with.
    pub fn from_record(record: SessionRecord, kb: Arc<KbAst>) -> Result<Session, ConsultError> {
        if digest(&kb) != record.rules_digest {
            return Err(ConsultError::KbMismatch);
        }
        let engine = Engine::restore(kb, record.settings, record.engine)?;
        Ok(Session {
            id: record.id,
            topic_id: record.topic_id,
            kb_version: record.kb_version,
            engine,
            answer_log: record.answer_log,
            status: record.status,
            created_at: record.created_at,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule_dsl::parse_kb;

    const KB: &str = r#"
(defglobal ?*ok* = 0)
(defclass Final_Decision (is-a USER)
  (slot Decision_OK (type INTEGER)) (slot Decision_Causes (type STRING))
  (slot Decision_Law_Text (type STRING)) (slot Decision_Law_Link (type STRING)))
(defrule ask1 (Topic t) => (ask q1))
(defrule yes ?a <- (Answer q1 yes) => (assert (Exception "check the council")) (bind ?*ok* 1) (assert (Done)))
(defrule no (Answer q1 no) => (bind ?*ok* 2) (assert (Done)))
(defrule fin (Done) => (make-instance D of Final_Decision (Decision_OK ?*ok*) (Decision_Law_Link "1-1| 1-2 |")))
(defrule instant (Topic now) => (make-instance D of Final_Decision (Decision_OK 0)))
"#;

    fn catalogue() -> Catalogue {
        Catalogue::from_json(
            r#"{"regulations":[{"id":"1","name":"R","declared_rule_count":3}],
                "articles":[{"id":"1-1","regulation_id":"1","text":"a"},{"id":"1-2","regulation_id":"1","text":"b"}],
                "topics":[{"id":"t","title":"T","regulation_id":"1","entry_module":"MAIN","queries":{"q1":"Go?"}},
                          {"id":"now","title":"N","regulation_id":"1","entry_module":"MAIN","queries":{}}]}"#,
        )
        .unwrap()
    }

    fn kb() -> Arc<KbAst> {
        Arc::new(parse_kb(KB).unwrap())
    }

    #[test]
    fn prompt_then_decision() {
        let cat = catalogue();
        let (mut s, step) = start_session(&cat, kb(), 1, "t").unwrap();
        let Step::Prompt(p) = step else { panic!("expected prompt") };
        assert_eq!(p.text, "Go?");
        assert_eq!(p.options, ["yes", "no"]);
        let Step::Decision(d) = submit_answer(&mut s, &cat, "q1", "yes").unwrap() else { panic!("expected decision") };
        assert_eq!(d.ok_code, 1);
        assert_eq!(d.law_links, ["1-1", "1-2"]);
        assert_eq!(d.exceptions, ["check the council"]);
        assert_eq!(s.status, SessionStatus::Decided);
        assert!(matches!(submit_answer(&mut s, &cat, "q1", "no"), Err(ConsultError::SessionClosed(_))));
    }

    #[test]
    fn zero_query_topic() {
        let (s, step) = start_session(&catalogue(), kb(), 1, "now").unwrap();
        assert!(s.answer_log.is_empty());
        assert_eq!(
            step,
            Step::Decision(Decision { ok_code: 0, causes: "".into(), law_texts: vec![], law_links: vec![], exceptions: vec![] })
        );
    }

    #[test]
    fn errors_leave_session_unchanged() {
        let cat = catalogue();
        let (mut s, _) = start_session(&cat, kb(), 1, "t").unwrap();
        let before = s.clone();
        assert!(matches!(submit_answer(&mut s, &cat, "q1", "maybe"), Err(ConsultError::BinaryViolation(_))));
        assert!(matches!(submit_answer(&mut s, &cat, "q9", "yes"), Err(ConsultError::StaleQuery { .. })));
        assert_eq!(s, before);
        assert!(matches!(start_session(&cat, kb(), 1, "x"), Err(ConsultError::Knowledge(_))));
    }

    #[test]
    fn replay_counts_answers() {
        let cat = catalogue();
        assert!(matches!(replay(&cat, kb(), 1, "t", &[]), Err(ConsultError::Incomplete(q)) if q == "q1"));
        assert!(matches!(replay(&cat, kb(), 1, "t", &["no", "no"]), Err(ConsultError::TrailingAnswers(1))));
        assert_eq!(replay(&cat, kb(), 1, "t", &["no"]).unwrap().1.ok_code, 2);
    }

    #[test]
    fn record_round_trip() {
        let cat = catalogue();
        let (s, _) = start_session(&cat, kb(), 1, "t").unwrap();
        let json = serde_json::to_string(&s.to_record()).unwrap();
        let back = Session::from_record(serde_json::from_str(&json).unwrap(), kb()).unwrap();
        assert_eq!(back, s);
        let other = Arc::new(parse_kb("(defrule r (x) =>)").unwrap());
        assert!(matches!(Session::from_record(s.to_record(), other), Err(ConsultError::KbMismatch)));
    }

    #[test]
    fn explanation_follows_fired_log() {
        let cat = catalogue();
        let (s, _) = replay(&cat, kb(), 1, "t", &["yes"]).unwrap();
        let trace = explanation(&s);
        assert_eq!(trace.len(), s.engine.fired_log().len());
        let rules: Vec<_> = trace.iter().map(|e| e.rule.as_str()).collect();
        assert_eq!(rules, ["MAIN::ask1", "MAIN::yes", "MAIN::fin"]);
        assert_eq!(trace[1].facts, ["(Answer q1 yes)"]);
    }
}
