use std::fmt;

use num_bigint::BigUint;

use super::Span;
use crate::diagnostics::{Diagnostic, DiagnosticKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(BigUint),
    // keywords
    Z,
    Succ,
    Rec,
    With,
    Fun,
    Nat,
    Def,
    Chan,
    Proc,
    System,
    New,
    In,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Eq,
    LeftArrow,
    Arrow,
    Bar,
    Plus,
    Dot,
    Bang,
    Question,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Num(n) => return write!(f, "numeral `{n}`"),
            Tok::Z => "`z`",
            Tok::Succ => "`succ`",
            Tok::Rec => "`rec`",
            Tok::With => "`with`",
            Tok::Fun => "`fun`",
            Tok::Nat => "`nat`",
            Tok::Def => "`def`",
            Tok::Chan => "`chan`",
            Tok::Proc => "`proc`",
            Tok::System => "`system`",
            Tok::New => "`new`",
            Tok::In => "`in`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Colon => "`:`",
            Tok::Eq => "`=`",
            Tok::LeftArrow => "`<=`",
            Tok::Arrow => "`->`",
            Tok::Bar => "`|`",
            Tok::Plus => "`+`",
            Tok::Dot => "`.`",
            Tok::Bang => "`!`",
            Tok::Question => "`?`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "z" => Tok::Z,
        "succ" => Tok::Succ,
        "rec" => Tok::Rec,
        "with" => Tok::With,
        "fun" => Tok::Fun,
        "nat" => Tok::Nat,
        "def" => Tok::Def,
        "chan" => Tok::Chan,
        "proc" => Tok::Proc,
        "system" => Tok::System,
        "new" => Tok::New,
        "in" => Tok::In,
        _ => return None,
    })
}

pub(crate) fn is_keyword(word: &str) -> bool {
    keyword(word).is_some()
}

/// Tokenizes the whole input. Lexical errors are collected and the
/// offending character skipped, so one pass reports all of them.
pub fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut errors = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'-' && bytes.get(i + 1) == Some(&b'-') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &src[start..i];
            let tok = keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()));
            tokens.push(Token {
                tok,
                span: Span::new(start, i),
            });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse::<BigUint>().expect("digits parse");
            tokens.push(Token {
                tok: Tok::Num(n),
                span: Span::new(start, i),
            });
            continue;
        }
        let two = |next: u8| bytes.get(i + 1) == Some(&next);
        let (tok, width) = match c {
            b'(' => (Tok::LParen, 1),
            b')' => (Tok::RParen, 1),
            b'[' => (Tok::LBracket, 1),
            b']' => (Tok::RBracket, 1),
            b'{' => (Tok::LBrace, 1),
            b'}' => (Tok::RBrace, 1),
            b',' => (Tok::Comma, 1),
            b':' => (Tok::Colon, 1),
            b'=' => (Tok::Eq, 1),
            b'|' => (Tok::Bar, 1),
            b'+' => (Tok::Plus, 1),
            b'.' => (Tok::Dot, 1),
            b'!' => (Tok::Bang, 1),
            b'?' => (Tok::Question, 1),
            b'<' if two(b'=') => (Tok::LeftArrow, 2),
            b'-' if two(b'>') => (Tok::Arrow, 2),
            _ => {
                let ch = src[i..].chars().next().expect("in bounds");
                let end = i + ch.len_utf8();
                errors.push(Diagnostic::error(
                    DiagnosticKind::Lexical,
                    Span::new(start, end),
                    format!("unexpected character `{}`", ch.escape_debug()),
                ));
                i = end;
                continue;
            }
        };
        i += width;
        tokens.push(Token {
            tok,
            span: Span::new(start, i),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: Span::new(src.len(), src.len()),
    });
    (tokens, errors)
}
