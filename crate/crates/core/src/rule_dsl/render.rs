//! Canonical pretty-printer. `parse_kb(&render(&ast))` equals `ast`.

use std::fmt::Write;

use sha2::{Digest, Sha256};

use super::ast::*;

/// SHA-256 of the canonical rendering, hex encoded. Identifies a rule set
/// independently of formatting and comments.
pub fn digest(ast: &KbAst) -> String {
    hex::encode(Sha256::digest(render(ast).as_bytes()))
}

pub fn render(ast: &KbAst) -> String {
    let mut out = String::new();
    for m in &ast.modules {
        out.push_str(&render_module(m));
        out.push('\n');
    }
    for g in &ast.globals {
        out.push_str(&render_global(g));
        out.push('\n');
    }
    for c in &ast.classes {
        out.push_str(&render_class(c));
        out.push('\n');
    }
    for r in &ast.rules {
        out.push_str(&render_rule(r));
        out.push('\n');
    }
    out
}

pub fn render_module(m: &ModuleDef) -> String {
    let mut s = format!("(defmodule {}", m.name);
    for import in &m.imports {
        write!(s, " (import {import} ?ALL)").unwrap();
    }
    if m.exports_all {
        s.push_str(" (export ?ALL)");
    }
    s.push(')');
    s
}

pub fn render_global(g: &GlobalDef) -> String {
    format!("(defglobal ?*{}* = {})", g.name, g.init)
}

pub fn render_class(c: &ClassDef) -> String {
    let mut s = format!("(defclass {}::{} (is-a USER)", c.module, c.name);
    if c.concrete {
        s.push_str("\n  (role concrete)");
    }
    if c.reactive {
        s.push_str("\n  (pattern-match reactive)");
    }
    for slot in &c.slots {
        let kind = match slot.kind {
            ValueKind::Integer => "INTEGER",
            ValueKind::String => "STRING",
        };
        write!(s, "\n  (slot {} (create-accessor read-write) (type {kind}))", slot.name).unwrap();
    }
    s.push(')');
    s
}

pub fn render_rule(r: &RuleDef) -> String {
    let mut s = format!("(defrule {}", r.qualified_name());
    if r.salience != 0 {
        write!(s, " (declare (salience {}))", r.salience).unwrap();
    }
    for p in &r.patterns {
        s.push_str("\n  ");
        if let Some(f) = &p.fact_var {
            write!(s, "?{f} <- ").unwrap();
        }
        s.push_str(&render_pattern(p));
        if let Some(guard) = &p.guard {
            write!(s, "\n  (test {})", render_test(guard)).unwrap();
        }
    }
    s.push_str("\n  =>");
    for a in &r.actions {
        render_action(a, 1, &mut s);
    }
    s.push(')');
    s
}

pub fn render_pattern(p: &Pattern) -> String {
    let mut s = format!("({}", p.head);
    for arg in &p.args {
        s.push(' ');
        match arg {
            PatternArg::Literal(a) => write!(s, "{a}").unwrap(),
            PatternArg::Variable(v) => write!(s, "?{v}").unwrap(),
            PatternArg::Wildcard => s.push('?'),
        }
    }
    s.push(')');
    s
}

pub fn render_test(t: &Test) -> String {
    let mut s = format!("({} {}", t.op.keyword(), render_expr(&t.lhs));
    match &t.rhs {
        TestRhs::Expr(e) => write!(s, " {}", render_expr(e)).unwrap(),
        TestRhs::Atoms(atoms) => {
            for a in atoms {
                write!(s, " {a}").unwrap();
            }
        }
    }
    s.push(')');
    s
}

pub fn render_expr(e: &Expr) -> String {
    match e {
        Expr::Literal(a) => a.to_string(),
        Expr::Variable(v) => format!("?{v}"),
        Expr::Global(g) => format!("?*{g}*"),
        Expr::Setting(name) => format!("(setting {name})"),
        Expr::StrCat(parts) => {
            let mut s = String::from("(str-cat");
            for p in parts {
                s.push(' ');
                s.push_str(&render_expr(p));
            }
            s.push(')');
            s
        }
    }
}

fn render_action(a: &Action, depth: usize, out: &mut String) {
    let indent = "  ".repeat(depth);
    out.push('\n');
    out.push_str(&indent);
    match a {
        Action::Focus(m) => write!(out, "(focus {m})").unwrap(),
        Action::Retract(v) => write!(out, "(retract ?{v})").unwrap(),
        Action::Ask(q) => write!(out, "(ask {q})").unwrap(),
        Action::Bind { global, value } => write!(out, "(bind ?*{global}* {})", render_expr(value)).unwrap(),
        Action::Assert { head, args } => {
            write!(out, "(assert ({head}").unwrap();
            for arg in args {
                write!(out, " {}", render_expr(arg)).unwrap();
            }
            out.push_str("))");
        }
        Action::MakeInstance { name, class, slots } => {
            write!(out, "(make-instance {name} of {class}").unwrap();
            for (slot, value) in slots {
                write!(out, "\n{indent}  ({slot} {})", render_expr(value)).unwrap();
            }
            out.push(')');
        }
        Action::Switch { scrutinee, cases, default } => {
            write!(out, "(switch {}", render_expr(scrutinee)).unwrap();
            for case in cases {
                write!(out, "\n{indent}  (case {} then", case.value).unwrap();
                for inner in &case.actions {
                    render_action(inner, depth + 2, out);
                }
                out.push(')');
            }
            if let Some(default) = default {
                write!(out, "\n{indent}  (default").unwrap();
                for inner in default {
                    render_action(inner, depth + 2, out);
                }
                out.push(')');
            }
            out.push(')');
        }
    }
}
