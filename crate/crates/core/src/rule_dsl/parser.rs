//! Parser from rule-language source to [`KbAst`].
//!
//! Parsing runs in two steps: tokens are first grouped into a tree of
//! parenthesized lists, then each top-level list is read as one definition.

use std::fmt;

use super::ast::*;
use super::lexer::{tokenize, LexError, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lex,
    Syntax,
    UnknownForm,
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub file: String,
    pub line: u32,
    pub col: u32,
    /// Name of the form being read when the error occurred.
    pub expected: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.file, self.line, self.col, self.message)?;
        if let Some(expected) = &self.expected {
            write!(f, " (in {expected})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Sexp {
    List { items: Vec<Sexp>, line: u32, col: u32 },
    Atom(Token),
}

impl Sexp {
    fn pos(&self) -> (u32, u32) {
        match self {
            Sexp::List { line, col, .. } => (*line, *col),
            Sexp::Atom(t) => (t.line, t.col),
        }
    }

    fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Atom(t) if t.kind == TokenKind::Symbol => Some(&t.text),
            _ => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            _ => None,
        }
    }

    /// Items of a list whose first element is the given keyword.
    fn keyword_list(&self, keyword: &str) -> Option<&[Sexp]> {
        let items = self.list()?;
        (items.first()?.symbol()? == keyword).then_some(&items[1..])
    }

    fn describe(&self) -> String {
        match self {
            Sexp::List { .. } => "a list".into(),
            Sexp::Atom(t) => format!("{} `{}`", t.kind, t.text),
        }
    }
}

fn read_tree(tokens: Vec<Token>) -> Result<Vec<Sexp>, (u32, u32, String)> {
    let mut stack: Vec<(Vec<Sexp>, u32, u32)> = Vec::new();
    let mut top = Vec::new();
    for tok in tokens {
        match tok.kind {
            TokenKind::LParen => stack.push((Vec::new(), tok.line, tok.col)),
            TokenKind::RParen => {
                let (items, line, col) =
                    stack.pop().ok_or((tok.line, tok.col, "unbalanced ')'".to_string()))?;
                let list = Sexp::List { items, line, col };
                match stack.last_mut() {
                    Some((parent, _, _)) => parent.push(list),
                    None => top.push(list),
                }
            }
            _ => match stack.last_mut() {
                Some((parent, _, _)) => parent.push(Sexp::Atom(tok)),
                None => top.push(Sexp::Atom(tok)),
            },
        }
    }
    if let Some((_, line, col)) = stack.pop() {
        return Err((line, col, "unclosed '('".to_string()));
    }
    Ok(top)
}

/// Parses a single source text.
pub fn parse_kb(source: &str) -> Result<KbAst, ParseError> {
    parse_kb_files(&[("<input>".to_string(), source.to_string())])
}

/// Parses several files into one knowledge base, in the order given.
/// Each file starts in module `MAIN`.
pub fn parse_kb_files(files: &[(String, String)]) -> Result<KbAst, ParseError> {
    let mut parser = Parser { file: String::new(), current_module: MAIN_MODULE.to_string(), ast: KbAst::default() };
    for (name, source) in files {
        parser.file = name.clone();
        parser.current_module = MAIN_MODULE.to_string();
        parser.parse_file(source)?;
    }
    Ok(parser.ast)
}

struct Parser {
    file: String,
    current_module: String,
    ast: KbAst,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn err(&self, at: (u32, u32), kind: ParseErrorKind, expected: Option<&str>, message: impl Into<String>) -> ParseError {
        ParseError {
            kind,
            file: self.file.clone(),
            line: at.0,
            col: at.1,
            expected: expected.map(str::to_string),
            message: message.into(),
        }
    }

    fn syntax(&self, at: &Sexp, expected: &str, message: impl Into<String>) -> ParseError {
        self.err(at.pos(), ParseErrorKind::Syntax, Some(expected), message)
    }

    fn record(&mut self, key: String, line: u32, at: (u32, u32)) -> PResult<()> {
        if self.ast.source_map.contains_key(&key) {
            return Err(self.err(at, ParseErrorKind::Duplicate, None, format!("duplicate definition: {key}")));
        }
        self.ast.source_map.insert(key, SourcePos { file: self.file.clone(), line });
        Ok(())
    }

    fn parse_file(&mut self, source: &str) -> PResult<()> {
        let tokens = tokenize(source).map_err(|e: LexError| ParseError {
            kind: ParseErrorKind::Lex,
            file: self.file.clone(),
            line: e.line,
            col: e.col,
            expected: None,
            message: e.message,
        })?;
        let forms = read_tree(tokens)
            .map_err(|(line, col, msg)| self.err((line, col), ParseErrorKind::Syntax, None, msg))?;
        for form in &forms {
            self.parse_top(form)?;
        }
        Ok(())
    }

    fn parse_top(&mut self, form: &Sexp) -> PResult<()> {
        let Some(items) = form.list() else {
            return Err(self.syntax(form, "top-level definition", format!("expected a definition, found {}", form.describe())));
        };
        let Some(head) = items.first().and_then(Sexp::symbol) else {
            return Err(self.syntax(form, "top-level definition", "definition must start with a keyword"));
        };
        match head {
            "defmodule" => self.parse_defmodule(form, &items[1..]),
            "defglobal" => self.parse_defglobal(form, &items[1..]),
            "defclass" => self.parse_defclass(form, &items[1..]),
            "defrule" => self.parse_defrule(form, &items[1..]),
            other => Err(self.err(form.pos(), ParseErrorKind::UnknownForm, None, format!("unknown top-level form `{other}`"))),
        }
    }

    fn parse_defmodule(&mut self, form: &Sexp, items: &[Sexp]) -> PResult<()> {
        const FORM: &str = "defmodule";
        let name = items
            .first()
            .and_then(Sexp::symbol)
            .filter(|n| !n.contains("::"))
            .ok_or_else(|| self.syntax(form, FORM, "expected module name"))?
            .to_string();
        let mut module = ModuleDef { name: name.clone(), exports_all: false, imports: Vec::new() };
        for opt in &items[1..] {
            if let Some(rest) = opt.keyword_list("export") {
                if !matches!(rest, [Sexp::Atom(t)] if t.kind == TokenKind::Variable && t.ident() == "ALL") {
                    return Err(self.syntax(opt, FORM, "only (export ?ALL) is supported"));
                }
                module.exports_all = true;
            } else if let Some(rest) = opt.keyword_list("import") {
                match rest {
                    [from, Sexp::Atom(t)] if t.kind == TokenKind::Variable && t.ident() == "ALL" => {
                        let from = from.symbol().ok_or_else(|| self.syntax(from, FORM, "expected imported module name"))?;
                        module.imports.push(from.to_string());
                    }
                    _ => return Err(self.syntax(opt, FORM, "only (import <module> ?ALL) is supported")),
                }
            } else {
                return Err(self.syntax(opt, FORM, format!("unexpected module option {}", opt.describe())));
            }
        }
        self.record(def_key("defmodule", &name), form.pos().0, form.pos())?;
        self.current_module = name;
        self.ast.modules.push(module);
        Ok(())
    }

    fn parse_defglobal(&mut self, form: &Sexp, items: &[Sexp]) -> PResult<()> {
        const FORM: &str = "defglobal";
        if items.is_empty() {
            return Err(self.syntax(form, FORM, "expected ?*name* = value"));
        }
        for chunk in items.chunks(3) {
            let [var, eq, value] = chunk else {
                return Err(self.syntax(&chunk[0], FORM, "expected ?*name* = value"));
            };
            let name = match var {
                Sexp::Atom(t) if t.kind == TokenKind::GlobalRef => t.ident().to_string(),
                other => return Err(self.syntax(other, FORM, format!("expected global reference, found {}", other.describe()))),
            };
            if eq.symbol() != Some("=") {
                return Err(self.syntax(eq, FORM, "expected `=`"));
            }
            let init = self
                .literal(value)
                .ok_or_else(|| self.syntax(value, FORM, "global initializer must be a literal"))?;
            let pos = var.pos();
            self.record(def_key("defglobal", &name), pos.0, pos)?;
            self.ast.globals.push(GlobalDef { name, init });
        }
        Ok(())
    }

    fn parse_defclass(&mut self, form: &Sexp, items: &[Sexp]) -> PResult<()> {
        const FORM: &str = "defclass";
        let full = items.first().and_then(Sexp::symbol).ok_or_else(|| self.syntax(form, FORM, "expected class name"))?;
        let (module, name) = self.split_qualified(full);
        let mut class = ClassDef { module, name: name.clone(), slots: Vec::new(), concrete: false, reactive: false };
        let mut saw_is_a = false;
        for opt in &items[1..] {
            if let Some(rest) = opt.keyword_list("is-a") {
                if !matches!(rest, [s] if s.symbol() == Some("USER")) {
                    return Err(self.syntax(opt, FORM, "only (is-a USER) is supported"));
                }
                saw_is_a = true;
            } else if let Some(rest) = opt.keyword_list("role") {
                class.concrete = match rest.first().and_then(Sexp::symbol) {
                    Some("concrete") if rest.len() == 1 => true,
                    Some("abstract") if rest.len() == 1 => false,
                    _ => return Err(self.syntax(opt, FORM, "expected (role concrete|abstract)")),
                };
            } else if let Some(rest) = opt.keyword_list("pattern-match") {
                class.reactive = match rest.first().and_then(Sexp::symbol) {
                    Some("reactive") if rest.len() == 1 => true,
                    Some("non-reactive") if rest.len() == 1 => false,
                    _ => return Err(self.syntax(opt, FORM, "expected (pattern-match reactive|non-reactive)")),
                };
            } else if let Some(rest) = opt.keyword_list("slot") {
                let slot = self.parse_slot(opt, rest)?;
                if class.slot(&slot.name).is_some() {
                    return Err(self.err(opt.pos(), ParseErrorKind::Duplicate, Some(FORM), format!("duplicate slot {}", slot.name)));
                }
                class.slots.push(slot);
            } else {
                return Err(self.syntax(opt, FORM, format!("unexpected class option {}", opt.describe())));
            }
        }
        if !saw_is_a {
            return Err(self.syntax(form, FORM, "missing (is-a USER)"));
        }
        self.record(def_key("defclass", &name), form.pos().0, form.pos())?;
        self.ast.classes.push(class);
        Ok(())
    }

    fn parse_slot(&self, at: &Sexp, rest: &[Sexp]) -> PResult<SlotDef> {
        const FORM: &str = "slot";
        let name = rest.first().and_then(Sexp::symbol).ok_or_else(|| self.syntax(at, FORM, "expected slot name"))?;
        let mut kind = None;
        for facet in &rest[1..] {
            if let Some(r) = facet.keyword_list("type") {
                kind = Some(match r.first().and_then(Sexp::symbol) {
                    Some("INTEGER") if r.len() == 1 => ValueKind::Integer,
                    Some("STRING") if r.len() == 1 => ValueKind::String,
                    _ => return Err(self.syntax(facet, FORM, "expected (type INTEGER|STRING)")),
                });
            } else if let Some(r) = facet.keyword_list("create-accessor") {
                if !matches!(r, [s] if matches!(s.symbol(), Some("read" | "write" | "read-write"))) {
                    return Err(self.syntax(facet, FORM, "expected (create-accessor read|write|read-write)"));
                }
            } else {
                return Err(self.syntax(facet, FORM, format!("unexpected slot facet {}", facet.describe())));
            }
        }
        let kind = kind.ok_or_else(|| self.syntax(at, FORM, "slot requires (type INTEGER|STRING)"))?;
        Ok(SlotDef { name: name.to_string(), kind })
    }

    fn split_qualified(&self, full: &str) -> (String, String) {
        match full.split_once("::") {
            Some((m, n)) => (m.to_string(), n.to_string()),
            None => (self.current_module.clone(), full.to_string()),
        }
    }

    fn parse_defrule(&mut self, form: &Sexp, items: &[Sexp]) -> PResult<()> {
        const FORM: &str = "defrule";
        let full = items.first().and_then(Sexp::symbol).ok_or_else(|| self.syntax(form, FORM, "expected rule name"))?;
        let (module, name) = self.split_qualified(full);
        if module.is_empty() || name.is_empty() {
            return Err(self.syntax(&items[0], FORM, "malformed qualified rule name"));
        }
        let mut rest = &items[1..];

        if let Some(Sexp::Atom(t)) = rest.first() {
            if t.kind == TokenKind::String {
                rest = &rest[1..];
            }
        }

        let mut salience = 0;
        if let Some(decl) = rest.first().and_then(|s| s.keyword_list("declare")) {
            salience = match decl {
                [prop] => match prop.keyword_list("salience") {
                    Some([Sexp::Atom(t)]) if t.kind == TokenKind::Integer => i32::try_from(t.integer_value())
                        .map_err(|_| self.syntax(prop, FORM, "salience out of range"))?,
                    _ => return Err(self.syntax(prop, FORM, "expected (salience <integer>)")),
                },
                _ => return Err(self.syntax(&rest[0], FORM, "expected (declare (salience <integer>))")),
            };
            rest = &rest[1..];
        }

        let arrow = rest
            .iter()
            .position(|s| s.symbol() == Some("=>"))
            .ok_or_else(|| self.syntax(form, FORM, "missing `=>`"))?;
        let patterns = self.parse_lhs(form, &rest[..arrow])?;
        let actions = rest[arrow + 1..].iter().map(|a| self.parse_action(a)).collect::<PResult<Vec<_>>>()?;

        let rule = RuleDef { module, name, salience, patterns, actions };
        self.record(def_key("defrule", &rule.qualified_name()), form.pos().0, form.pos())?;
        self.ast.rules.push(rule);
        Ok(())
    }

    fn parse_lhs(&self, form: &Sexp, items: &[Sexp]) -> PResult<Vec<Pattern>> {
        const FORM: &str = "rule condition";
        let mut patterns: Vec<Pattern> = Vec::new();
        let mut i = 0;
        while i < items.len() {
            let item = &items[i];
            if let Sexp::Atom(t) = item {
                if t.kind == TokenKind::Variable && items.get(i + 1).and_then(Sexp::symbol) == Some("<-") {
                    let target = items.get(i + 2).ok_or_else(|| self.syntax(item, FORM, "expected pattern after `<-`"))?;
                    let mut pattern = self.parse_pattern(target)?;
                    pattern.fact_var = Some(t.ident().to_string());
                    patterns.push(pattern);
                    i += 3;
                    continue;
                }
                return Err(self.syntax(item, FORM, format!("expected pattern, found {}", item.describe())));
            }
            if let Some(test) = item.keyword_list("test") {
                let [inner] = test else {
                    return Err(self.syntax(item, "test", "expected (test (<op> ...))"));
                };
                let last = patterns
                    .last_mut()
                    .ok_or_else(|| self.syntax(item, "test", "test must follow a pattern"))?;
                if last.guard.is_some() {
                    return Err(self.syntax(item, "test", "pattern already has a test"));
                }
                last.guard = Some(self.parse_test(inner)?);
            } else {
                patterns.push(self.parse_pattern(item)?);
            }
            i += 1;
        }
        if patterns.is_empty() {
            return Err(self.syntax(form, "defrule", "rule needs at least one pattern"));
        }
        Ok(patterns)
    }

    fn parse_pattern(&self, item: &Sexp) -> PResult<Pattern> {
        const FORM: &str = "pattern";
        let items = item.list().ok_or_else(|| self.syntax(item, FORM, format!("expected pattern, found {}", item.describe())))?;
        let head = items.first().and_then(Sexp::symbol).ok_or_else(|| self.syntax(item, FORM, "pattern head must be a symbol"))?;
        if matches!(head, "test" | "declare" | "=>") {
            return Err(self.syntax(item, FORM, format!("`{head}` cannot be a pattern head")));
        }
        let args = items[1..]
            .iter()
            .map(|a| match a {
                Sexp::Atom(t) => match t.kind {
                    TokenKind::Variable => Ok(PatternArg::Variable(t.ident().to_string())),
                    TokenKind::Wildcard => Ok(PatternArg::Wildcard),
                    _ => self.literal(a).map(PatternArg::Literal).ok_or_else(|| {
                        self.syntax(a, FORM, format!("unexpected {} in pattern", a.describe()))
                    }),
                },
                _ => Err(self.syntax(a, FORM, "nested lists are not allowed in patterns")),
            })
            .collect::<PResult<Vec<_>>>()?;
        Ok(Pattern { fact_var: None, head: head.to_string(), args, guard: None })
    }

    fn parse_test(&self, item: &Sexp) -> PResult<Test> {
        const FORM: &str = "test";
        let items = item.list().ok_or_else(|| self.syntax(item, FORM, "expected (<op> ...)"))?;
        let op_name = items.first().and_then(Sexp::symbol).ok_or_else(|| self.syntax(item, FORM, "expected test operator"))?;
        let op = TestOp::from_keyword(op_name)
            .ok_or_else(|| self.syntax(item, FORM, format!("unknown test operator `{op_name}`")))?;
        let operands = &items[1..];
        if op == TestOp::Member {
            let [lhs, alternatives @ ..] = operands else {
                return Err(self.syntax(item, FORM, "member needs a value and alternatives"));
            };
            if alternatives.is_empty() {
                return Err(self.syntax(item, FORM, "member needs at least one alternative"));
            }
            let lhs = self.parse_expr(lhs)?;
            let rhs = match alternatives {
                [single] if self.literal(single).is_none() => TestRhs::Expr(self.parse_expr(single)?),
                _ => TestRhs::Atoms(
                    alternatives
                        .iter()
                        .map(|a| self.literal(a).ok_or_else(|| self.syntax(a, FORM, "member alternatives must be literals")))
                        .collect::<PResult<_>>()?,
                ),
            };
            return Ok(Test { op, lhs, rhs });
        }
        let [lhs, rhs] = operands else {
            return Err(self.syntax(item, FORM, format!("`{op_name}` takes exactly two operands")));
        };
        Ok(Test { op, lhs: self.parse_expr(lhs)?, rhs: TestRhs::Expr(self.parse_expr(rhs)?) })
    }

    fn literal(&self, s: &Sexp) -> Option<Atom> {
        match s {
            Sexp::Atom(t) => match t.kind {
                TokenKind::Integer => Some(Atom::Integer(t.integer_value())),
                TokenKind::String => Some(Atom::String(t.string_value())),
                TokenKind::Symbol => Some(Atom::Symbol(t.text.clone())),
                _ => None,
            },
            _ => None,
        }
    }

    fn parse_expr(&self, s: &Sexp) -> PResult<Expr> {
        const FORM: &str = "expression";
        match s {
            Sexp::Atom(t) => match t.kind {
                TokenKind::Variable => Ok(Expr::Variable(t.ident().to_string())),
                TokenKind::GlobalRef => Ok(Expr::Global(t.ident().to_string())),
                TokenKind::Wildcard => Err(self.syntax(s, FORM, "wildcard is not an expression")),
                _ => Ok(Expr::Literal(self.literal(s).expect("literal token"))),
            },
            Sexp::List { items, .. } => match items.first().and_then(Sexp::symbol) {
                Some("str-cat") => Ok(Expr::StrCat(items[1..].iter().map(|e| self.parse_expr(e)).collect::<PResult<_>>()?)),
                Some("setting") => match &items[1..] {
                    [name] => Ok(Expr::Setting(
                        name.symbol().ok_or_else(|| self.syntax(name, FORM, "setting name must be a symbol"))?.to_string(),
                    )),
                    _ => Err(self.syntax(s, FORM, "expected (setting <name>)")),
                },
                Some(other) => Err(self.syntax(s, FORM, format!("unknown function `{other}`"))),
                None => Err(self.syntax(s, FORM, "expected function call")),
            },
        }
    }

    fn parse_action(&self, s: &Sexp) -> PResult<Action> {
        let items = s.list().ok_or_else(|| self.syntax(s, "action", format!("expected action, found {}", s.describe())))?;
        let head = items.first().and_then(Sexp::symbol).ok_or_else(|| self.syntax(s, "action", "action must start with a keyword"))?;
        let args = &items[1..];
        match head {
            "focus" => match args {
                [m] => Ok(Action::Focus(
                    m.symbol().ok_or_else(|| self.syntax(m, "focus", "expected module name"))?.to_string(),
                )),
                _ => Err(self.syntax(s, "focus", "expected (focus <module>)")),
            },
            "switch" => self.parse_switch(s, args),
            "assert" => {
                let [fact] = args else {
                    return Err(self.syntax(s, "assert", "expected exactly one fact, e.g. (assert (Head ...))"));
                };
                let parts = fact.list().ok_or_else(|| self.syntax(fact, "assert", "expected (Head ...)"))?;
                let fact_head =
                    parts.first().and_then(Sexp::symbol).ok_or_else(|| self.syntax(fact, "assert", "fact head must be a symbol"))?;
                let args = parts[1..].iter().map(|e| self.parse_expr(e)).collect::<PResult<_>>()?;
                Ok(Action::Assert { head: fact_head.to_string(), args })
            }
            "retract" => match args {
                [Sexp::Atom(t)] if t.kind == TokenKind::Variable => Ok(Action::Retract(t.ident().to_string())),
                _ => Err(self.syntax(s, "retract", "expected (retract ?fact)")),
            },
            "bind" => match args {
                [Sexp::Atom(t), value] if t.kind == TokenKind::GlobalRef => {
                    Ok(Action::Bind { global: t.ident().to_string(), value: self.parse_expr(value)? })
                }
                _ => Err(self.syntax(s, "bind", "expected (bind ?*global* <expression>)")),
            },
            "make-instance" => {
                let [name, of, class, slots @ ..] = args else {
                    return Err(self.syntax(s, "make-instance", "expected (make-instance <name> of <class> ...)"));
                };
                let name = name.symbol().ok_or_else(|| self.syntax(name, "make-instance", "expected instance name"))?;
                if of.symbol() != Some("of") {
                    return Err(self.syntax(of, "make-instance", "expected `of`"));
                }
                let class = class.symbol().ok_or_else(|| self.syntax(class, "make-instance", "expected class name"))?;
                let class = class.split_once("::").map_or(class, |(_, c)| c);
                let slots = slots
                    .iter()
                    .map(|slot| match slot.list() {
                        Some([n, value]) if n.symbol().is_some() => {
                            Ok((n.symbol().unwrap().to_string(), self.parse_expr(value)?))
                        }
                        _ => Err(self.syntax(slot, "make-instance", "expected (<slot> <expression>)")),
                    })
                    .collect::<PResult<_>>()?;
                Ok(Action::MakeInstance { name: name.to_string(), class: class.to_string(), slots })
            }
            "ask" => match args {
                [q] => Ok(Action::Ask(q.symbol().ok_or_else(|| self.syntax(q, "ask", "expected query id"))?.to_string())),
                _ => Err(self.syntax(s, "ask", "expected (ask <query-id>)")),
            },
            other => Err(self.syntax(s, "action", format!("unknown action `{other}`"))),
        }
    }

    fn parse_switch(&self, s: &Sexp, args: &[Sexp]) -> PResult<Action> {
        const FORM: &str = "switch";
        let [scrutinee, clauses @ ..] = args else {
            return Err(self.syntax(s, FORM, "expected (switch <expression> (case ...) ...)"));
        };
        let scrutinee = self.parse_expr(scrutinee)?;
        let mut cases = Vec::new();
        let mut default = None;
        for clause in clauses {
            if default.is_some() {
                return Err(self.syntax(clause, FORM, "default must be the last clause"));
            }
            if let Some(rest) = clause.keyword_list("case") {
                let [value, then, actions @ ..] = rest else {
                    return Err(self.syntax(clause, FORM, "expected (case <literal> then <action>...)"));
                };
                let value = self.literal(value).ok_or_else(|| self.syntax(value, FORM, "case value must be a literal"))?;
                if then.symbol() != Some("then") {
                    return Err(self.syntax(then, FORM, "expected `then`"));
                }
                let actions = actions.iter().map(|a| self.parse_action(a)).collect::<PResult<_>>()?;
                cases.push(SwitchCase { value, actions });
            } else if let Some(rest) = clause.keyword_list("default") {
                default = Some(rest.iter().map(|a| self.parse_action(a)).collect::<PResult<_>>()?);
            } else {
                return Err(self.syntax(clause, FORM, "expected (case ...) or (default ...)"));
            }
        }
        Ok(Action::Switch { scrutinee, cases, default })
    }
}
