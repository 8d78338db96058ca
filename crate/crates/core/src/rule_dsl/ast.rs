//! Syntax tree of a parsed knowledge base.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of the module that always exists, declared or not.
pub const MAIN_MODULE: &str = "MAIN";

/// Scalar value: literal in rules, argument of a fact, value of a global.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Atom {
    Integer(i64),
    String(String),
    Symbol(String),
}

impl Atom {
    pub fn symbol(s: impl Into<String>) -> Self {
        Atom::Symbol(s.into())
    }

    pub fn string(s: impl Into<String>) -> Self {
        Atom::String(s.into())
    }

    /// Text used when the atom is concatenated: strings unquoted, integers
    /// in decimal.
    pub fn text(&self) -> String {
        match self {
            Atom::Integer(n) => n.to_string(),
            Atom::String(s) | Atom::Symbol(s) => s.clone(),
        }
    }
}

/// Renders the atom as rule-language source.
impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Integer(n) => write!(f, "{n}"),
            Atom::Symbol(s) => f.write_str(s),
            Atom::String(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    if c == '"' || c == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourcePos {
    pub file: String,
    pub line: u32,
}

/// A parsed knowledge base.
///
/// Equality is structural: `source_map` is ignored so that a re-rendered
/// and re-parsed tree compares equal to the original.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct KbAst {
    pub modules: Vec<ModuleDef>,
    pub globals: Vec<GlobalDef>,
    pub classes: Vec<ClassDef>,
    pub rules: Vec<RuleDef>,
    /// Definition key (see [`def_key`]) to where it was defined.
    pub source_map: BTreeMap<String, SourcePos>,
}

impl PartialEq for KbAst {
    fn eq(&self, other: &Self) -> bool {
        self.modules == other.modules
            && self.globals == other.globals
            && self.classes == other.classes
            && self.rules == other.rules
    }
}

impl Eq for KbAst {}

/// Key under which a definition is recorded in [`KbAst::source_map`].
pub fn def_key(kind: &str, name: &str) -> String {
    format!("{kind} {name}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleDef {
    pub name: String,
    pub exports_all: bool,
    pub imports: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalDef {
    /// Bare name, without the `?*...*` decoration.
    pub name: String,
    pub init: Atom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Integer,
    String,
}

impl ValueKind {
    pub fn admits(self, atom: &Atom) -> bool {
        matches!((self, atom), (ValueKind::Integer, Atom::Integer(_)) | (ValueKind::String, Atom::String(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotDef {
    pub name: String,
    pub kind: ValueKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDef {
    pub module: String,
    pub name: String,
    pub slots: Vec<SlotDef>,
    pub concrete: bool,
    pub reactive: bool,
}

impl ClassDef {
    pub fn slot(&self, name: &str) -> Option<&SlotDef> {
        self.slots.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDef {
    pub module: String,
    pub name: String,
    pub salience: i32,
    pub patterns: Vec<Pattern>,
    pub actions: Vec<Action>,
}

impl RuleDef {
    pub fn qualified_name(&self) -> String {
        format!("{}::{}", self.module, self.name)
    }

    /// Variables bound by the rule's patterns (fact-address variables excluded).
    pub fn bound_variables(&self) -> BTreeSet<&str> {
        self.patterns
            .iter()
            .flat_map(|p| p.args.iter())
            .filter_map(|a| match a {
                PatternArg::Variable(v) => Some(v.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Every action, including those nested inside `switch`.
    pub fn all_actions(&self) -> Vec<&Action> {
        fn walk<'a>(actions: &'a [Action], out: &mut Vec<&'a Action>) {
            for action in actions {
                out.push(action);
                if let Action::Switch { cases, default, .. } = action {
                    for case in cases {
                        walk(&case.actions, out);
                    }
                    if let Some(default) = default {
                        walk(default, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.actions, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    /// `?f <- (...)` binds the matched fact for `retract`.
    pub fact_var: Option<String>,
    pub head: String,
    pub args: Vec<PatternArg>,
    /// `(test ...)` written right after the pattern.
    pub guard: Option<Test>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternArg {
    Literal(Atom),
    Variable(String),
    Wildcard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestOp {
    Eq,
    Neq,
    Member,
    Gte,
    Lte,
}

impl TestOp {
    pub fn keyword(self) -> &'static str {
        match self {
            TestOp::Eq => "eq",
            TestOp::Neq => "neq",
            TestOp::Member => "member",
            TestOp::Gte => "gte",
            TestOp::Lte => "lte",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "eq" => TestOp::Eq,
            "neq" => TestOp::Neq,
            "member" => TestOp::Member,
            "gte" => TestOp::Gte,
            "lte" => TestOp::Lte,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Test {
    pub op: TestOp,
    pub lhs: Expr,
    pub rhs: TestRhs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestRhs {
    Expr(Expr),
    /// Literal alternatives of `member`.
    Atoms(Vec<Atom>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Literal(Atom),
    Variable(String),
    Global(String),
    StrCat(Vec<Expr>),
    /// Named settings parameter; only meaningful inside a test guard.
    Setting(String),
}

impl Expr {
    pub fn variables(&self) -> Vec<&str> {
        match self {
            Expr::Variable(v) => vec![v],
            Expr::StrCat(parts) => parts.iter().flat_map(Expr::variables).collect(),
            _ => Vec::new(),
        }
    }

    pub fn globals(&self) -> Vec<&str> {
        match self {
            Expr::Global(g) => vec![g],
            Expr::StrCat(parts) => parts.iter().flat_map(Expr::globals).collect(),
            _ => Vec::new(),
        }
    }

    pub fn settings(&self) -> Vec<&str> {
        match self {
            Expr::Setting(s) => vec![s],
            Expr::StrCat(parts) => parts.iter().flat_map(Expr::settings).collect(),
            _ => Vec::new(),
        }
    }

    /// String literals appearing anywhere in the expression.
    pub fn string_literals(&self) -> Vec<&str> {
        match self {
            Expr::Literal(Atom::String(s)) => vec![s],
            Expr::StrCat(parts) => parts.iter().flat_map(Expr::string_literals).collect(),
            _ => Vec::new(),
        }
    }
}

impl Test {
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.rhs {
            TestRhs::Expr(rhs) => vec![&self.lhs, rhs],
            TestRhs::Atoms(_) => vec![&self.lhs],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchCase {
    pub value: Atom,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Action {
    Focus(String),
    Switch {
        scrutinee: Expr,
        cases: Vec<SwitchCase>,
        default: Option<Vec<Action>>,
    },
    Assert {
        head: String,
        args: Vec<Expr>,
    },
    /// Retracts the fact bound to this fact-address variable.
    Retract(String),
    Bind {
        global: String,
        value: Expr,
    },
    MakeInstance {
        name: String,
        class: String,
        slots: Vec<(String, Expr)>,
    },
    Ask(String),
}

impl Action {
    /// Expressions evaluated directly by this action (not by nested ones).
    pub fn exprs(&self) -> Vec<&Expr> {
        match self {
            Action::Switch { scrutinee, .. } => vec![scrutinee],
            Action::Assert { args, .. } => args.iter().collect(),
            Action::Bind { value, .. } => vec![value],
            Action::MakeInstance { slots, .. } => slots.iter().map(|(_, e)| e).collect(),
            Action::Focus(_) | Action::Retract(_) | Action::Ask(_) => Vec::new(),
        }
    }
}

impl KbAst {
    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules.iter().find(|m| m.name == name)
    }

    /// Declared, or the implicit `MAIN`.
    pub fn has_module(&self, name: &str) -> bool {
        name == MAIN_MODULE || self.module(name).is_some()
    }

    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn global(&self, name: &str) -> Option<&GlobalDef> {
        self.globals.iter().find(|g| g.name == name)
    }

    pub fn rule(&self, qualified: &str) -> Option<&RuleDef> {
        self.rules.iter().find(|r| r.qualified_name() == qualified)
    }

    /// Modules reachable from `entry` through `focus` actions, `entry` first.
    pub fn module_closure(&self, entry: &str) -> Vec<String> {
        let mut seen = vec![entry.to_string()];
        let mut i = 0;
        while i < seen.len() {
            let current = seen[i].clone();
            for rule in self.rules.iter().filter(|r| r.module == current) {
                for action in rule.all_actions() {
                    if let Action::Focus(target) = action {
                        if !seen.contains(target) {
                            seen.push(target.clone());
                        }
                    }
                }
            }
            i += 1;
        }
        seen
    }

    pub fn location(&self, key: &str) -> Option<&SourcePos> {
        self.source_map.get(key)
    }
}
