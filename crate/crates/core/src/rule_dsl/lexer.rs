//! Tokenizer for the advisory rule language.
//!
//! Comments run from `;` to end of line and produce no tokens. Every other
//! non-whitespace character belongs to exactly one token.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    LParen,
    RParen,
    Symbol,
    /// `?name`
    Variable,
    /// `?*name*`
    GlobalRef,
    /// bare `?`
    Wildcard,
    Integer,
    String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    /// Source lexeme, quotes and escapes included for strings.
    pub text: String,
    pub line: u32,
    pub col: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    /// Identifier of a variable or global-ref token, without decoration.
    pub fn ident(&self) -> &str {
        match self.kind {
            TokenKind::Variable => &self.text[1..],
            TokenKind::GlobalRef => &self.text[2..self.text.len() - 1],
            _ => &self.text,
        }
    }

    /// Decoded contents of a string token.
    pub fn string_value(&self) -> String {
        let inner = &self.text[1..self.text.len() - 1];
        let mut out = String::with_capacity(inner.len());
        let mut chars = inner.chars();
        while let Some(c) = chars.next() {
            if c == '\\' {
                if let Some(next) = chars.next() {
                    out.push(next);
                }
            } else {
                out.push(c);
            }
        }
        out
    }

    /// Value of an integer token. Leading zeros are accepted (`01` is 1).
    pub fn integer_value(&self) -> i64 {
        self.text.parse().expect("integer token validated by lexer")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

fn is_illegal(c: char) -> bool {
    (c.is_control() && !c.is_whitespace()) || matches!(c, '&' | '|' | '~' | '[' | ']' | '{' | '}')
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

pub(crate) fn is_integer_text(text: &str) -> bool {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, line: u32, col: u32, message: impl Into<String>) -> LexError {
        LexError { line, col, message: message.into() }
    }
}

/// Splits `source` into tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor { src: source, pos: 0, line: 1, col: 1 };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == ';' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }

        let (start, line, col) = (cur.pos, cur.line, cur.col);
        let kind = match c {
            '(' => {
                cur.bump();
                TokenKind::LParen
            }
            ')' => {
                cur.bump();
                TokenKind::RParen
            }
            '"' => {
                cur.bump();
                loop {
                    match cur.bump() {
                        None => return Err(cur.error(line, col, "unterminated string literal")),
                        Some('\\') => {
                            if cur.bump().is_none() {
                                return Err(cur.error(line, col, "unterminated string literal"));
                            }
                        }
                        Some('"') => break,
                        Some(_) => {}
                    }
                }
                TokenKind::String
            }
            '?' => lex_question(&mut cur, line, col)?,
            c if is_illegal(c) => {
                return Err(cur.error(line, col, format!("illegal character {c:?}")));
            }
            _ => {
                while let Some(c) = cur.peek() {
                    if is_delimiter(c) {
                        break;
                    }
                    if is_illegal(c) {
                        return Err(cur.error(cur.line, cur.col, format!("illegal character {c:?}")));
                    }
                    cur.bump();
                }
                let text = &source[start..cur.pos];
                if is_integer_text(text) {
                    if text.parse::<i64>().is_err() {
                        return Err(cur.error(line, col, format!("integer literal {text} out of range")));
                    }
                    TokenKind::Integer
                } else {
                    TokenKind::Symbol
                }
            }
        };
        tokens.push(Token { kind, text: source[start..cur.pos].to_string(), line, col, offset: start });
    }
    Ok(tokens)
}

fn lex_question(cur: &mut Cursor<'_>, line: u32, col: u32) -> Result<TokenKind, LexError> {
    cur.bump();
    match cur.peek() {
        None => return Ok(TokenKind::Wildcard),
        Some(c) if is_delimiter(c) => return Ok(TokenKind::Wildcard),
        _ => {}
    }

    if cur.peek() == Some('*') && cur.peek_nth(1).is_some_and(is_ident_char) {
        cur.bump();
        while cur.peek().is_some_and(is_ident_char) {
            cur.bump();
        }
        if cur.peek() != Some('*') {
            return Err(cur.error(line, col, "global reference must end with '*'"));
        }
        cur.bump();
        return match cur.peek() {
            None => Ok(TokenKind::GlobalRef),
            Some(c) if is_delimiter(c) => Ok(TokenKind::GlobalRef),
            Some(c) => Err(cur.error(cur.line, cur.col, format!("unexpected {c:?} after global reference"))),
        };
    }

    while cur.peek().is_some_and(is_ident_char) {
        cur.bump();
    }
    match cur.peek() {
        None => Ok(TokenKind::Variable),
        Some(c) if is_delimiter(c) => Ok(TokenKind::Variable),
        Some(c) => Err(cur.error(cur.line, cur.col, format!("malformed variable: unexpected {c:?}"))),
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TokenKind::LParen => "'('",
            TokenKind::RParen => "')'",
            TokenKind::Symbol => "symbol",
            TokenKind::Variable => "variable",
            TokenKind::GlobalRef => "global reference",
            TokenKind::Wildcard => "wildcard",
            TokenKind::Integer => "integer",
            TokenKind::String => "string",
        };
        f.write_str(name)
    }
}
