//! Forward-chaining interpreter for a parsed knowledge base.
//!
//! Working memory holds ordered facts. Asserting a fact creates one
//! activation per new rule instantiation it completes; an activation fires
//! at most once for a given set of supporting facts (refraction). Only
//! activations of the module on top of the focus stack may fire, chosen by
//! salience, then recency of the newest supporting fact, then creation
//! order (later first). A module whose agenda is empty is popped.

mod eval;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use eval::{eval_expr, eval_test, Bindings};

use crate::diagnostics::ValidationReport;
use crate::knowledge_model::Settings;
use crate::rule_dsl::{validate_ast, Action, Atom, KbAst, PatternArg, RuleDef, MAIN_MODULE};

pub const DEFAULT_STEP_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fact {
    pub id: u64,
    pub head: String,
    pub args: Vec<Atom>,
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.head)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceObj {
    pub name: String,
    pub class_name: String,
    pub slot_values: BTreeMap<String, Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activation {
    /// Index into the knowledge base's rule list.
    pub rule: usize,
    pub bindings: Bindings,
    /// One fact id per pattern, in pattern order.
    pub support: Vec<u64>,
    pub salience: i32,
    pub recency: u64,
    pub seq: u64,
}

impl Activation {
    fn priority(&self) -> (i32, u64, u64) {
        (self.salience, self.recency, self.seq)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiredRecord {
    pub rule: String,
    pub bindings: Bindings,
    pub support: Vec<u64>,
    /// Supporting facts as they read when the rule fired.
    pub facts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunOutcome {
    Quiescent,
    Suspended(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("knowledge base has errors:\n{0}")]
    InvalidKb(ValidationReport),
    #[error("no fact with id {0}")]
    UnknownFact(u64),
    #[error("activation of {0} is no longer supported by working memory")]
    StaleActivation(String),
    #[error("focus on unknown module {0}")]
    UnknownModule(String),
    #[error("rule {rule}: unknown class {class}")]
    UnknownClass { rule: String, class: String },
    #[error("rule {rule}: slot {slot} of {class} does not accept {value}")]
    SlotKind { rule: String, class: String, slot: String, value: Atom },
    #[error("undeclared global ?*{0}*")]
    UndeclaredGlobal(String),
    #[error("unbound variable ?{0}")]
    Unbound(String),
    #[error("test failed to evaluate: {0}")]
    Guard(String),
    #[error("step budget of {0} firings exhausted; the knowledge base does not terminate")]
    Runaway(usize),
    #[error("snapshot does not fit the knowledge base: {0}")]
    Snapshot(String),
}

/// Serialized engine state. Field order is fixed; facts are sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineSnapshot {
    pub facts: Vec<Fact>,
    pub globals: BTreeMap<String, Atom>,
    pub instances: BTreeMap<String, InstanceObj>,
    pub focus_stack: Vec<String>,
    pub fired_log: Vec<FiredRecord>,
    pub next_fact_id: u64,
}

#[derive(Debug, Clone)]
pub struct Engine {
    kb: Arc<KbAst>,
    settings: Settings,
    facts: BTreeMap<u64, Fact>,
    next_fact_id: u64,
    instances: BTreeMap<String, InstanceObj>,
    globals: BTreeMap<String, Atom>,
    agenda: Vec<Activation>,
    focus_stack: Vec<String>,
    fired_log: Vec<FiredRecord>,
    refraction: HashSet<(usize, Vec<u64>)>,
    next_seq: u64,
    step_budget: usize,
}

/// Engines compare by observable state; activation sequence numbers are
/// compared only through the agenda order they induce.
impl PartialEq for Engine {
    fn eq(&self, other: &Self) -> bool {
        fn ordered(e: &Engine) -> Vec<(usize, &Vec<u64>, &Bindings)> {
            let mut acts: Vec<&Activation> = e.agenda.iter().collect();
            acts.sort_by_key(|a| a.seq);
            acts.into_iter().map(|a| (a.rule, &a.support, &a.bindings)).collect()
        }
        *self.kb == *other.kb
            && self.settings == other.settings
            && self.snapshot() == other.snapshot()
            && ordered(self) == ordered(other)
    }
}

/// Validates `kb` and returns a fresh engine with globals at their initial values.
pub fn init_engine(kb: Arc<KbAst>) -> Result<Engine, EngineError> {
    Engine::new(kb, Settings::default())
}

impl Engine {
    pub fn new(kb: Arc<KbAst>, settings: Settings) -> Result<Engine, EngineError> {
        let report = validate_ast(&kb, None);
        if report.has_errors() {
            return Err(EngineError::InvalidKb(report));
        }
        let globals = kb.globals.iter().map(|g| (g.name.clone(), g.init.clone())).collect();
        Ok(Engine {
            kb,
            settings,
            facts: BTreeMap::new(),
            next_fact_id: 1,
            instances: BTreeMap::new(),
            globals,
            agenda: Vec::new(),
            focus_stack: vec![MAIN_MODULE.to_string()],
            fired_log: Vec::new(),
            refraction: HashSet::new(),
            next_seq: 0,
            step_budget: DEFAULT_STEP_BUDGET,
        })
    }

    pub fn set_step_budget(&mut self, budget: usize) {
        self.step_budget = budget;
    }

    pub fn kb(&self) -> &Arc<KbAst> {
        &self.kb
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.values()
    }

    pub fn fact(&self, id: u64) -> Option<&Fact> {
        self.facts.get(&id)
    }

    pub fn globals(&self) -> &BTreeMap<String, Atom> {
        &self.globals
    }

    pub fn instances(&self) -> &BTreeMap<String, InstanceObj> {
        &self.instances
    }

    pub fn focus_stack(&self) -> &[String] {
        &self.focus_stack
    }

    pub fn fired_log(&self) -> &[FiredRecord] {
        &self.fired_log
    }

    /// Pending activations in creation order.
    pub fn agenda(&self) -> &[Activation] {
        &self.agenda
    }

    pub fn rule_def(&self, index: usize) -> &RuleDef {
        &self.kb.rules[index]
    }

    /// Adds a fact and every activation it completes.
    pub fn assert_fact(&mut self, head: impl Into<String>, args: Vec<Atom>) -> Result<u64, EngineError> {
        let id = self.next_fact_id;
        self.next_fact_id += 1;
        self.facts.insert(id, Fact { id, head: head.into(), args });
        self.activate_for(id)
            .inspect_err(|_| {
                self.facts.remove(&id);
            })
            .map(|_| id)
    }

    /// Removes a fact and every activation it supports.
    pub fn retract_fact(&mut self, id: u64) -> Result<Fact, EngineError> {
        let fact = self.facts.remove(&id).ok_or(EngineError::UnknownFact(id))?;
        self.agenda.retain(|a| !a.support.contains(&id));
        Ok(fact)
    }

    fn activate_for(&mut self, newest: u64) -> Result<(), EngineError> {
        let kb = Arc::clone(&self.kb);
        let head = &self.facts[&newest].head;
        let arity = self.facts[&newest].args.len();
        let mut fresh = Vec::new();
        for (index, rule) in kb.rules.iter().enumerate() {
            if !rule.patterns.iter().any(|p| p.head == *head && p.args.len() == arity) {
                continue;
            }
            let mut found = Vec::new();
            self.join(rule, 0, newest, &mut Bindings::new(), &mut Vec::new(), &mut found)?;
            for (bindings, support) in found {
                if self.refraction.contains(&(index, support.clone())) {
                    continue;
                }
                fresh.push((index, rule.salience, bindings, support));
            }
        }
        for (rule, salience, bindings, support) in fresh {
            let seq = self.next_seq;
            self.next_seq += 1;
            self.agenda.push(Activation { rule, bindings, support, salience, recency: newest, seq });
        }
        Ok(())
    }

    /// Nested-loop join over facts with id <= `newest`, in id order,
    /// keeping tuples that include `newest`.
    fn join(
        &self,
        rule: &RuleDef,
        depth: usize,
        newest: u64,
        bindings: &mut Bindings,
        support: &mut Vec<u64>,
        out: &mut Vec<(Bindings, Vec<u64>)>,
    ) -> Result<(), EngineError> {
        let Some(pattern) = rule.patterns.get(depth) else {
            if support.contains(&newest) {
                out.push((bindings.clone(), support.clone()));
            }
            return Ok(());
        };
        for fact in self.facts.range(..=newest).map(|(_, f)| f) {
            if fact.head != pattern.head || fact.args.len() != pattern.args.len() {
                continue;
            }
            let mut added = Vec::new();
            let mut ok = true;
            for (arg, value) in pattern.args.iter().zip(&fact.args) {
                match arg {
                    PatternArg::Wildcard => {}
                    PatternArg::Literal(lit) => ok = lit == value,
                    PatternArg::Variable(v) => match bindings.get(v) {
                        Some(bound) => ok = bound == value,
                        None => {
                            bindings.insert(v.clone(), value.clone());
                            added.push(v.clone());
                        }
                    },
                }
                if !ok {
                    break;
                }
            }
            if ok {
                if let Some(guard) = &pattern.guard {
                    ok = eval_test(guard, bindings, &self.globals, &self.settings)?;
                }
            }
            if ok {
                support.push(fact.id);
                self.join(rule, depth + 1, newest, bindings, support, out)?;
                support.pop();
            }
            for v in added {
                bindings.remove(&v);
            }
        }
        Ok(())
    }

    /// Best activation of the focused module, popping exhausted modules.
    pub fn select_next(&mut self) -> Option<Activation> {
        while let Some(top) = self.focus_stack.last() {
            let best = self
                .agenda
                .iter()
                .filter(|a| self.kb.rules[a.rule].module == *top)
                .max_by_key(|a| a.priority());
            match best {
                Some(a) => return Some(a.clone()),
                None => {
                    self.focus_stack.pop();
                }
            }
        }
        None
    }

    /// Fires one activation. Returns the query id when the rule ends in `ask`.
    pub fn fire(&mut self, activation: &Activation) -> Result<Option<String>, EngineError> {
        let rule = &self.kb.rules[activation.rule];
        let qname = rule.qualified_name();
        let facts = activation
            .support
            .iter()
            .map(|id| self.facts.get(id).map(ToString::to_string))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| EngineError::StaleActivation(qname.clone()))?;

        self.agenda.retain(|a| !(a.rule == activation.rule && a.support == activation.support));
        self.refraction.insert((activation.rule, activation.support.clone()));
        self.fired_log.push(FiredRecord {
            rule: qname,
            bindings: activation.bindings.clone(),
            support: activation.support.clone(),
            facts,
        });

        let kb = Arc::clone(&self.kb);
        self.execute(&kb.rules[activation.rule], activation, &kb.rules[activation.rule].actions)
    }

    fn execute(&mut self, rule: &RuleDef, act: &Activation, actions: &[Action]) -> Result<Option<String>, EngineError> {
        for action in actions {
            match action {
                Action::Focus(module) => {
                    if !self.kb.has_module(module) {
                        return Err(EngineError::UnknownModule(module.clone()));
                    }
                    if self.focus_stack.last() != Some(module) {
                        self.focus_stack.push(module.clone());
                    }
                }
                Action::Switch { scrutinee, cases, default } => {
                    let value = eval_expr(scrutinee, &act.bindings, &self.globals)?;
                    let branch = cases.iter().find(|c| c.value == value).map(|c| &c.actions).or(default.as_ref());
                    if let Some(branch) = branch {
                        if let Some(q) = self.execute(rule, act, branch)? {
                            return Ok(Some(q));
                        }
                    }
                }
                Action::Assert { head, args } => {
                    let args = args
                        .iter()
                        .map(|e| eval_expr(e, &act.bindings, &self.globals))
                        .collect::<Result<Vec<_>, _>>()?;
                    self.assert_fact(head.clone(), args)?;
                }
                Action::Retract(var) => {
                    let index = rule
                        .patterns
                        .iter()
                        .position(|p| p.fact_var.as_deref() == Some(var))
                        .ok_or_else(|| EngineError::Unbound(var.clone()))?;
                    self.retract_fact(act.support[index])?;
                }
                Action::Bind { global, value } => {
                    let value = eval_expr(value, &act.bindings, &self.globals)?;
                    match self.globals.get_mut(global) {
                        Some(slot) => *slot = value,
                        None => return Err(EngineError::UndeclaredGlobal(global.clone())),
                    }
                }
                Action::MakeInstance { name, class, slots } => {
                    let def = self.kb.class(class).ok_or_else(|| EngineError::UnknownClass {
                        rule: rule.qualified_name(),
                        class: class.clone(),
                    })?;
                    let mut values = BTreeMap::new();
                    for (slot, expr) in slots {
                        let value = eval_expr(expr, &act.bindings, &self.globals)?;
                        if !def.slot(slot).is_some_and(|s| s.kind.admits(&value)) {
                            return Err(EngineError::SlotKind {
                                rule: rule.qualified_name(),
                                class: class.clone(),
                                slot: slot.clone(),
                                value,
                            });
                        }
                        values.insert(slot.clone(), value);
                    }
                    self.instances.insert(
                        name.clone(),
                        InstanceObj { name: name.clone(), class_name: class.clone(), slot_values: values },
                    );
                }
                Action::Ask(query) => return Ok(Some(query.clone())),
            }
        }
        Ok(None)
    }

    /// Fires until the agenda is exhausted or a rule asks a query.
    pub fn run(&mut self) -> Result<RunOutcome, EngineError> {
        if self.focus_stack.is_empty() {
            self.focus_stack.push(MAIN_MODULE.to_string());
        }
        let mut fired = 0;
        while let Some(activation) = self.select_next() {
            if fired == self.step_budget {
                return Err(EngineError::Runaway(self.step_budget));
            }
            fired += 1;
            if let Some(query) = self.fire(&activation)? {
                return Ok(RunOutcome::Suspended(query));
            }
        }
        Ok(RunOutcome::Quiescent)
    }

    pub fn snapshot(&self) -> EngineSnapshot {
        EngineSnapshot {
            facts: self.facts.values().cloned().collect(),
            globals: self.globals.clone(),
            instances: self.instances.clone(),
            focus_stack: self.focus_stack.clone(),
            fired_log: self.fired_log.clone(),
            next_fact_id: self.next_fact_id,
        }
    }

    /// Rebuilds an engine from a snapshot. Refraction is recovered from the
    /// fired log; the agenda is recomputed fact by fact in id order, which
    /// reproduces the original creation order.
    pub fn restore(kb: Arc<KbAst>, settings: Settings, snapshot: EngineSnapshot) -> Result<Engine, EngineError> {
        let mut engine = Engine::new(kb, settings)?;
        for (name, value) in &snapshot.globals {
            if !engine.globals.contains_key(name) {
                return Err(EngineError::Snapshot(format!("unknown global {name}")));
            }
            engine.globals.insert(name.clone(), value.clone());
        }
        for record in &snapshot.fired_log {
            let index = engine
                .kb
                .rules
                .iter()
                .position(|r| r.qualified_name() == record.rule)
                .ok_or_else(|| EngineError::Snapshot(format!("unknown rule {}", record.rule)))?;
            engine.refraction.insert((index, record.support.clone()));
        }
        let mut last = 0;
        for fact in &snapshot.facts {
            if fact.id <= last || fact.id >= snapshot.next_fact_id {
                return Err(EngineError::Snapshot("fact ids out of order".into()));
            }
            last = fact.id;
            engine.facts.insert(fact.id, fact.clone());
            engine.activate_for(fact.id)?;
        }
        engine.next_fact_id = snapshot.next_fact_id;
        engine.instances = snapshot.instances;
        engine.focus_stack = snapshot.focus_stack;
        engine.fired_log = snapshot.fired_log;
        Ok(engine)
    }
}
