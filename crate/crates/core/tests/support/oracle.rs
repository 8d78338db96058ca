//! Random knowledge bases and a brute-force reference interpreter used as an
//! oracle for the inference engine. Shared by the engine and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use advisor_core::inference_engine::{init_engine, EngineError, RunOutcome};
use advisor_core::rule_dsl::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const BUDGET: usize = 60;


pub const HEADS: [&str; 3] = ["p", "q", "r"];
pub const VARS: [&str; 3] = ["x", "y", "z"];
pub const MODULES: [&str; 3] = ["MAIN", "A", "B"];

pub fn random_kb(rng: &mut StdRng) -> String {
    let mut src = String::from(
        "(defmodule MAIN (export ?ALL)) (defmodule A (import MAIN ?ALL)) (defmodule B (import MAIN ?ALL))\n\
         (defglobal ?*g* = 0 ?*s* = \"\")\n\
         (defclass MAIN::Out (is-a USER) (slot v (type INTEGER)))\n",
    );
    let arity = |head: &str| HEADS.iter().position(|h| *h == head).unwrap();
    for r in 0..rng.gen_range(1..=6) {
        let module = MODULES[rng.gen_range(0..3)];
        let salience = rng.gen_range(-1..=1);
        src.push_str(&format!("(defrule {module}::r{r} (declare (salience {salience}))\n"));
        let mut bound: Vec<&str> = Vec::new();
        let mut fact_vars = Vec::new();
        for p in 0..rng.gen_range(1..=3) {
            let head = HEADS[rng.gen_range(0..3)];
            if rng.gen_bool(0.3) {
                src.push_str(&format!("  ?f{p} <- "));
                fact_vars.push(format!("f{p}"));
            }
            src.push_str(&format!("({head}"));
            for _ in 0..arity(head) {
                match rng.gen_range(0..3) {
                    0 => src.push_str(&format!(" {}", rng.gen_range(0..3))),
                    1 => src.push_str(" ?"),
                    _ => {
                        let v = VARS[rng.gen_range(0..3)];
                        if !bound.contains(&v) {
                            bound.push(v);
                        }
                        src.push_str(&format!(" ?{v}"));
                    }
                }
            }
            src.push_str(")\n");
            if !bound.is_empty() && rng.gen_bool(0.3) {
                let v = bound[rng.gen_range(0..bound.len())];
                let guard = match rng.gen_range(0..5) {
                    0 => format!("(eq ?{v} {})", rng.gen_range(0..3)),
                    1 => format!("(neq ?{v} {})", rng.gen_range(0..3)),
                    2 => format!("(member ?{v} 0 2)"),
                    3 => format!("(gte ?{v} {})", rng.gen_range(0..3)),
                    _ => format!("(lte ?{v} ?{})", bound[rng.gen_range(0..bound.len())]),
                };
                src.push_str(&format!("  (test {guard})\n"));
            }
        }
        src.push_str("  =>\n");
        let value = |rng: &mut StdRng| -> String {
            if !bound.is_empty() && rng.gen_bool(0.6) {
                format!("?{}", bound[rng.gen_range(0..bound.len())])
            } else {
                rng.gen_range(0..3).to_string()
            }
        };
        let simple = |rng: &mut StdRng| -> String {
            match rng.gen_range(0..4) {
                0 => {
                    let head = HEADS[rng.gen_range(0..3)];
                    let args: Vec<String> = (0..arity(head)).map(|_| value(rng)).collect();
                    format!("(assert ({head} {}))", args.join(" "))
                }
                1 => format!("(bind ?*g* {})", value(rng)),
                2 => format!("(bind ?*s* (str-cat ?*s* {}))", value(rng)),
                _ => format!("(make-instance o{} of Out (v {}))", rng.gen_range(0..2), value(rng)),
            }
        };
        for _ in 0..rng.gen_range(0..=3) {
            let action = match rng.gen_range(0..6) {
                0 => format!("(focus {})", MODULES[rng.gen_range(0..3)]),
                1 => {
                    let scrutinee = value(rng);
                    format!("(switch {scrutinee} (case 0 then {}) (case 1 then {}) (default {}))", simple(rng), simple(rng), simple(rng))
                }
                _ => simple(rng),
            };
            src.push_str(&format!("  {action}\n"));
        }
        if let Some(f) = fact_vars.first() {
            if rng.gen_bool(0.5) {
                src.push_str(&format!("  (retract ?{f})\n"));
            }
        }
        src.push_str(")\n");
    }
    src
}

pub fn random_facts(rng: &mut StdRng) -> Vec<(String, Vec<Atom>)> {
    (0..rng.gen_range(0..=8))
        .map(|_| {
            let h = rng.gen_range(0..3);
            (HEADS[h].to_string(), (0..h).map(|_| Atom::Integer(rng.gen_range(0..3))).collect())
        })
        .collect()
}

/// Straightforward interpreter: every cycle it re-matches every rule against
/// every tuple of current facts and picks the best unfired instantiation.
pub struct Reference<'a> {
    kb: &'a KbAst,
    pub facts: BTreeMap<u64, (String, Vec<Atom>)>,
    next_id: u64,
    pub globals: BTreeMap<String, Atom>,
    pub instances: BTreeMap<String, BTreeMap<String, Atom>>,
    focus: Vec<String>,
    pub fired: Vec<(usize, Vec<u64>)>,
}

#[derive(Debug, PartialEq)]
pub enum RefOutcome {
    Quiescent,
    Runaway,
}

impl<'a> Reference<'a> {
    pub fn new(kb: &'a KbAst) -> Self {
        Reference {
            kb,
            facts: BTreeMap::new(),
            next_id: 1,
            globals: kb.globals.iter().map(|g| (g.name.clone(), g.init.clone())).collect(),
            instances: BTreeMap::new(),
            focus: vec!["MAIN".into()],
            fired: Vec::new(),
        }
    }

    pub fn assert(&mut self, head: String, args: Vec<Atom>) {
        self.facts.insert(self.next_id, (head, args));
        self.next_id += 1;
    }

    fn eval(e: &Expr, b: &BTreeMap<String, Atom>, g: &BTreeMap<String, Atom>) -> Atom {
        match e {
            Expr::Literal(a) => a.clone(),
            Expr::Variable(v) => b[v].clone(),
            Expr::Global(n) => g[n].clone(),
            Expr::StrCat(parts) => Atom::String(
                parts
                    .iter()
                    .map(|p| match Self::eval(p, b, g) {
                        Atom::Integer(n) => n.to_string(),
                        Atom::String(s) | Atom::Symbol(s) => s,
                    })
                    .collect(),
            ),
            Expr::Setting(_) => unreachable!(),
        }
    }

    fn guard(t: &Test, b: &BTreeMap<String, Atom>) -> bool {
        let g = BTreeMap::new();
        let lhs = Self::eval(&t.lhs, b, &g);
        let int = |a: &Atom| match a {
            Atom::Integer(n) => *n,
            other => panic!("non-integer {other:?}"),
        };
        match (&t.op, &t.rhs) {
            (TestOp::Member, TestRhs::Atoms(alts)) => alts.contains(&lhs),
            (op, TestRhs::Expr(r)) => {
                let rhs = Self::eval(r, b, &g);
                match op {
                    TestOp::Eq => lhs == rhs,
                    TestOp::Neq => lhs != rhs,
                    TestOp::Gte => int(&lhs) >= int(&rhs),
                    TestOp::Lte => int(&lhs) <= int(&rhs),
                    TestOp::Member => lhs == rhs,
                }
            }
            _ => unreachable!(),
        }
    }

    fn matches(&self, rule: &RuleDef) -> Vec<(BTreeMap<String, Atom>, Vec<u64>)> {
        let mut out = Vec::new();
        let mut tuples: Vec<Vec<u64>> = vec![vec![]];
        for _ in &rule.patterns {
            tuples = tuples
                .into_iter()
                .flat_map(|t| self.facts.keys().map(move |id| [t.clone(), vec![*id]].concat()))
                .collect();
        }
        'tuple: for tuple in tuples {
            let mut b = BTreeMap::new();
            for (p, id) in rule.patterns.iter().zip(&tuple) {
                let (head, args) = &self.facts[id];
                if *head != p.head || args.len() != p.args.len() {
                    continue 'tuple;
                }
                for (pa, a) in p.args.iter().zip(args) {
                    match pa {
                        PatternArg::Wildcard => {}
                        PatternArg::Literal(l) if l == a => {}
                        PatternArg::Literal(_) => continue 'tuple,
                        PatternArg::Variable(v) => match b.get(v) {
                            Some(x) if x != a => continue 'tuple,
                            Some(_) => {}
                            None => {
                                b.insert(v.clone(), a.clone());
                            }
                        },
                    }
                }
                if let Some(t) = &p.guard {
                    if !Self::guard(t, &b) {
                        continue 'tuple;
                    }
                }
            }
            out.push((b, tuple));
        }
        out
    }

    fn exec(&mut self, rule: &RuleDef, support: &[u64], b: &BTreeMap<String, Atom>, actions: &[Action]) {
        for a in actions {
            match a {
                Action::Focus(m) => {
                    if self.focus.last() != Some(m) {
                        self.focus.push(m.clone());
                    }
                }
                Action::Switch { scrutinee, cases, default } => {
                    let v = Self::eval(scrutinee, b, &self.globals);
                    if let Some(c) = cases.iter().find(|c| c.value == v) {
                        self.exec(rule, support, b, &c.actions);
                    } else if let Some(d) = default {
                        self.exec(rule, support, b, d);
                    }
                }
                Action::Assert { head, args } => {
                    let args = args.iter().map(|e| Self::eval(e, b, &self.globals)).collect();
                    self.assert(head.clone(), args);
                }
                Action::Retract(f) => {
                    let i = rule.patterns.iter().position(|p| p.fact_var.as_deref() == Some(f)).unwrap();
                    self.facts.remove(&support[i]);
                }
                Action::Bind { global, value } => {
                    let v = Self::eval(value, b, &self.globals);
                    self.globals.insert(global.clone(), v);
                }
                Action::MakeInstance { name, slots, .. } => {
                    let values = slots.iter().map(|(s, e)| (s.clone(), Self::eval(e, b, &self.globals))).collect();
                    self.instances.insert(name.clone(), values);
                }
                Action::Ask(_) => unreachable!(),
            }
        }
    }

    pub fn run(&mut self, budget: usize) -> RefOutcome {
        let mut steps = 0;
        loop {
            let Some(top) = self.focus.last().cloned() else { return RefOutcome::Quiescent };
            let mut best: Option<(i32, u64, usize, Vec<u64>, BTreeMap<String, Atom>)> = None;
            for (i, rule) in self.kb.rules.iter().enumerate() {
                if rule.module != top {
                    continue;
                }
                for (b, support) in self.matches(rule) {
                    if self.fired.iter().any(|(r, s)| *r == i && *s == support) {
                        continue;
                    }
                    let recency = *support.iter().max().unwrap();
                    let key = (rule.salience, recency, i, support.clone(), b);
                    if best.as_ref().is_none_or(|cur| (key.0, key.1, key.2, &key.3) > (cur.0, cur.1, cur.2, &cur.3)) {
                        best = Some(key);
                    }
                }
            }
            let Some((_, _, i, support, b)) = best else {
                self.focus.pop();
                continue;
            };
            if steps == budget {
                return RefOutcome::Runaway;
            }
            steps += 1;
            self.fired.push((i, support.clone()));
            let rule = &self.kb.rules[i];
            self.exec(rule, &support, &b, &rule.actions);
        }
    }
}


pub struct SuiteResult {
    pub cases: usize,
    pub quiescent: usize,
    pub engine_time: Duration,
}

/// Runs `cases` random KBs through the engine and the reference interpreter.
/// Returns the first disagreement as an error.
pub fn run_suite(seed: u64, cases: usize) -> Result<SuiteResult, String> {
    let mut engine_time = Duration::ZERO;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut quiescent = 0;
    for case in 0..cases {
        let src = random_kb(&mut rng);
        let facts = random_facts(&mut rng);
        let kb = Arc::new(parse_kb(&src).map_err(|e| format!("case {case}: {e}\n{src}"))?);

        let started = Instant::now();
        let mut engine = init_engine(Arc::clone(&kb)).map_err(|e| format!("case {case}: {e}\n{src}"))?;
        engine.set_step_budget(BUDGET);
        for (head, args) in &facts {
            engine.assert_fact(head.clone(), args.clone()).map_err(|e| e.to_string())?;
        }
        let result = engine.run();
        engine_time += started.elapsed();
        let outcome = match result {
            Ok(RunOutcome::Quiescent) => RefOutcome::Quiescent,
            Err(EngineError::Runaway(_)) => RefOutcome::Runaway,
            other => return Err(format!("case {case}: unexpected {other:?}\n{src}")),
        };

        let mut reference = Reference::new(&kb);
        for (head, args) in &facts {
            reference.assert(head.clone(), args.clone());
        }
        let expected = reference.run(BUDGET);
        let mismatch = |what: &str| format!("case {case}: {what} differs\n{src}");
        if outcome != expected {
            return Err(mismatch("outcome"));
        }
        quiescent += usize::from(outcome == RefOutcome::Quiescent);

        let engine_fired: Vec<(String, Vec<u64>)> =
            engine.fired_log().iter().map(|r| (r.rule.clone(), r.support.clone())).collect();
        let reference_fired: Vec<(String, Vec<u64>)> =
            reference.fired.iter().map(|(i, s)| (kb.rules[*i].qualified_name(), s.clone())).collect();
        if engine_fired != reference_fired {
            return Err(mismatch("fired sequence"));
        }
        let engine_facts: BTreeMap<u64, (String, Vec<Atom>)> =
            engine.facts().map(|f| (f.id, (f.head.clone(), f.args.clone()))).collect();
        if engine_facts != reference.facts {
            return Err(mismatch("working memory"));
        }
        if engine.globals() != &reference.globals {
            return Err(mismatch("globals"));
        }
        let engine_instances: BTreeMap<String, BTreeMap<String, Atom>> =
            engine.instances().iter().map(|(k, v)| (k.clone(), v.slot_values.clone())).collect();
        if engine_instances != reference.instances {
            return Err(mismatch("instances"));
        }
    }
    Ok(SuiteResult { cases, quiescent, engine_time })
}
