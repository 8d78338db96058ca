//! Core of the legal advisory system: the rule language, the declarative
//! knowledge model, the forward-chaining engine, consultations and
//! knowledge-base administration.

pub mod consultation;
pub mod diagnostics;
pub mod inference_engine;
pub mod kb_admin;
pub mod knowledge_model;
pub mod rule_dsl;
