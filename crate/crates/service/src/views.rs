//! JSON bodies shared by the HTTP API and the batch CLI.

use advisor_core::consultation::{AnswerRecord, Decision, QueryPrompt, Session, SessionStatus, Step};
use advisor_core::knowledge_model::{resolve_law_link, Catalogue};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub id: String,
    pub regulation_id: String,
    pub text: String,
}

/// A decision plus its law links resolved against the catalogue.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionBody {
    #[serde(flatten)]
    pub decision: Decision,
    pub citations: Vec<Citation>,
}

impl DecisionBody {
    pub fn new(decision: Decision, catalogue: &Catalogue) -> Self {
        let citations = decision
            .law_links
            .iter()
            .filter_map(|id| resolve_law_link(catalogue, id).ok())
            .map(|a| Citation { id: a.id.clone(), regulation_id: a.regulation_id.clone(), text: a.text.clone() })
            .collect();
        DecisionBody { decision, citations }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepView {
    Prompt(QueryPrompt),
    Decision(DecisionBody),
}

impl StepView {
    pub fn new(step: Step, catalogue: &Catalogue) -> Self {
        match step {
            Step::Prompt(p) => StepView::Prompt(p),
            Step::Decision(d) => StepView::Decision(DecisionBody::new(d, catalogue)),
        }
    }
}

/// Response to creating a session or answering a prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepBody {
    pub session_id: String,
    pub kb_version: u64,
    pub status: SessionStatus,
    #[serde(flatten)]
    pub step: StepView,
}

impl StepBody {
    pub fn new(session: &Session, step: Step, catalogue: &Catalogue) -> Self {
        StepBody {
            session_id: session.id.clone(),
            kb_version: session.kb_version,
            status: session.status.clone(),
            step: StepView::new(step, catalogue),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionBody {
    pub session_id: String,
    pub topic_id: String,
    pub kb_version: u64,
    pub status: SessionStatus,
    pub answers: Vec<AnswerRecord>,
    pub created_at: DateTime<Utc>,
    #[serde(flatten)]
    pub step: StepView,
}
