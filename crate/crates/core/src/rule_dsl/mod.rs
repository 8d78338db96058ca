//! The advisory rule language: a parenthesized production-rule syntax with
//! modules, globals, classes, salience, `switch`/`focus` control and
//! decision-instance creation.

mod ast;
mod lexer;
mod parser;
mod render;
mod validate;

pub use ast::*;
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse_kb, parse_kb_files, ParseError, ParseErrorKind};
pub use render::{digest, render, render_class, render_expr, render_global, render_module, render_pattern, render_rule, render_test};
pub use validate::validate_ast;
