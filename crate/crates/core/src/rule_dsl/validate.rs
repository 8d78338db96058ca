//! Static checks over a parsed knowledge base.

use std::collections::{BTreeSet, HashSet};

use super::ast::*;
use crate::diagnostics::{Diagnostic, Location, ValidationReport};
use crate::knowledge_model::Catalogue;

/// Checks references and binding discipline. When a catalogue is given,
/// `ask` query ids are also checked against the topics' query tables.
pub fn validate_ast(ast: &KbAst, catalogue: Option<&Catalogue>) -> ValidationReport {
    let mut report = ValidationReport::default();

    for m in &ast.modules {
        let loc = Location::of_def(ast, &def_key("defmodule", &m.name));
        for import in &m.imports {
            if !ast.has_module(import) {
                report.push(Diagnostic::error(loc.clone(), format!("imports undeclared module {import}")));
            }
        }
    }

    for c in &ast.classes {
        if !ast.has_module(&c.module) {
            let loc = Location::of_def(ast, &def_key("defclass", &c.name));
            report.push(Diagnostic::error(loc, format!("class declared in undeclared module {}", c.module)));
        }
    }

    for rule in &ast.rules {
        check_rule(ast, rule, catalogue, &mut report);
    }
    report
}

fn allowed_queries<'a>(ast: &KbAst, catalogue: &'a Catalogue, module: &str) -> BTreeSet<&'a str> {
    let mut scoped = BTreeSet::new();
    let mut in_any_topic = false;
    for topic in &catalogue.topics {
        if ast.module_closure(&topic.entry_module).iter().any(|m| m == module) {
            in_any_topic = true;
            scoped.extend(topic.queries.keys().map(String::as_str));
        }
    }
    if in_any_topic {
        scoped
    } else {
        catalogue.topics.iter().flat_map(|t| t.queries.keys().map(String::as_str)).collect()
    }
}

fn check_rule(ast: &KbAst, rule: &RuleDef, catalogue: Option<&Catalogue>, report: &mut ValidationReport) {
    let qname = rule.qualified_name();
    let loc = Location::of_def(ast, &def_key("defrule", &qname));
    let mut err = |msg: String| report.push(Diagnostic::error(loc.clone(), msg));

    if !ast.has_module(&rule.module) {
        err(format!("rule belongs to undeclared module {}", rule.module));
    }

    let mut fact_vars = HashSet::new();
    let mut bound: HashSet<&str> = HashSet::new();
    for pattern in &rule.patterns {
        if let Some(f) = &pattern.fact_var {
            if !fact_vars.insert(f.as_str()) {
                err(format!("fact variable ?{f} bound twice"));
            }
        }
        for arg in &pattern.args {
            if let PatternArg::Variable(v) = arg {
                bound.insert(v);
            }
        }
        if let Some(guard) = &pattern.guard {
            for e in guard.exprs() {
                for v in e.variables() {
                    if !bound.contains(v) {
                        err(format!("test uses ?{v} before any pattern binds it"));
                    }
                }
                for g in e.globals() {
                    if ast.global(g).is_none() {
                        err(format!("reference to undeclared global ?*{g}*"));
                    }
                }
            }
        }
    }
    for f in &fact_vars {
        if bound.contains(f) {
            err(format!("?{f} is used both as a fact variable and a value variable"));
        }
    }

    let all = rule.all_actions();
    for action in &all {
        for e in action.exprs() {
            for v in e.variables() {
                if !bound.contains(v) {
                    err(format!("action uses unbound variable ?{v}"));
                }
            }
            for g in e.globals() {
                if ast.global(g).is_none() {
                    err(format!("reference to undeclared global ?*{g}*"));
                }
            }
            if !e.settings().is_empty() {
                err("settings may only be referenced inside test guards".to_string());
            }
        }
        match action {
            Action::Focus(target) => {
                if !ast.has_module(target) {
                    err(format!("focus on undeclared module {target}"));
                }
            }
            Action::Switch { cases, .. } => {
                let mut seen = HashSet::new();
                for case in cases {
                    if !seen.insert(&case.value) {
                        err(format!("switch has duplicate case {}", case.value));
                    }
                }
            }
            Action::Retract(v) => {
                if !fact_vars.contains(v.as_str()) {
                    err(format!("retract of ?{v}, which is not bound to a fact"));
                }
            }
            Action::Bind { global, .. } => {
                if ast.global(global).is_none() {
                    err(format!("bind to undeclared global ?*{global}*"));
                }
            }
            Action::MakeInstance { class, slots, .. } => match ast.class(class) {
                None => err(format!("make-instance of undeclared class {class}")),
                Some(def) => {
                    let mut seen = HashSet::new();
                    for (slot, value) in slots {
                        if !seen.insert(slot) {
                            err(format!("slot {slot} assigned twice"));
                        }
                        match def.slot(slot) {
                            None => err(format!("class {class} has no slot {slot}")),
                            Some(sd) => {
                                if let Expr::Literal(a) = value {
                                    if !sd.kind.admits(a) {
                                        err(format!("literal {a} does not fit slot {slot} of class {class}"));
                                    }
                                }
                            }
                        }
                    }
                }
            },
            Action::Assert { .. } | Action::Ask(_) => {}
        }
    }

    let asks: Vec<&str> = all
        .iter()
        .filter_map(|a| match a {
            Action::Ask(q) => Some(q.as_str()),
            _ => None,
        })
        .collect();
    if asks.len() > 1 {
        err("a rule may ask at most one query".to_string());
    }
    let final_ask = usize::from(matches!(rule.actions.last(), Some(Action::Ask(_))));
    if asks.len() > final_ask {
        err("ask must be the final action of the rule".to_string());
    }
    if let Some(catalogue) = catalogue {
        let allowed = allowed_queries(ast, catalogue, &rule.module);
        for q in asks {
            if !allowed.contains(q) {
                err(format!("query {q} is not declared in the topic's query table"));
            }
        }
    }
}
