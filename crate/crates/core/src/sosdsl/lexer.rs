use std::fmt;

use super::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Identifier, possibly primed (`x1'`).
    Ident(String),
    /// Unsigned decimal integer literal.
    Int(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Slash,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    /// `->`
    Arrow,
    /// `-/->`
    NoArrow,
    /// `=>`
    FatArrow,
    /// `---` (three or more dashes)
    Rule,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Int(s) => return write!(f, "`{s}`"),
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::Comma => "`,`",
            Tok::Slash => "`/`",
            Tok::Eq => "`=`",
            Tok::Ne => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Arrow => "`->`",
            Tok::NoArrow => "`-/->`",
            Tok::FatArrow => "`=>`",
            Tok::Rule => "`---`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let starts_with = |i: usize, pat: &str| pat.chars().enumerate().all(|(k, c)| chars.get(i + k) == Some(&c));

    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let mut width = 1;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                while j < chars.len() && chars[j] == '\'' {
                    j += 1;
                }
                width = j - start;
                Some(Tok::Ident(chars[start..j].iter().collect()))
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                width = j - start;
                Some(Tok::Int(chars[start..j].iter().collect()))
            }
            '-' if starts_with(i, "---") => {
                let mut j = i;
                while j < chars.len() && chars[j] == '-' {
                    j += 1;
                }
                width = j - i;
                Some(Tok::Rule)
            }
            '-' if starts_with(i, "-/->") => {
                width = 4;
                Some(Tok::NoArrow)
            }
            '-' if starts_with(i, "->") => {
                width = 2;
                Some(Tok::Arrow)
            }
            '-' => Some(Tok::Minus),
            '=' if starts_with(i, "=>") => {
                width = 2;
                Some(Tok::FatArrow)
            }
            '=' => Some(Tok::Eq),
            '!' if starts_with(i, "!=") => {
                width = 2;
                Some(Tok::Ne)
            }
            '<' if starts_with(i, "<=") => {
                width = 2;
                Some(Tok::Le)
            }
            '>' if starts_with(i, ">=") => {
                width = 2;
                Some(Tok::Ge)
            }
            '<' => Some(Tok::Lt),
            '>' => Some(Tok::Gt),
            '≤' => Some(Tok::Le),
            '≥' => Some(Tok::Ge),
            '≠' => Some(Tok::Ne),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            ',' => Some(Tok::Comma),
            '/' => Some(Tok::Slash),
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            other => {
                errors.push(Diagnostic::new(span, format!("unexpected character `{other}`")));
                None
            }
        };
        if let Some(tok) = tok {
            out.push(Token { tok, span });
        }
        i += width;
        col += width;
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}
