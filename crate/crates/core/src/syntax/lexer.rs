use std::fmt;

use super::{ParseError, Pos};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Var(String),
    Num(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Arrow,
    Strict,
    Defeasible,
    Defeater,
    Tilde,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Var(s) => write!(f, "`?{s}`"),
            Tok::Num(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Eof => f.write_str("end of input"),
            other => write!(f, "`{}`", other.text()),
        }
    }
}

impl Tok {
    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Arrow => "->",
            Tok::Strict => ":-",
            Tok::Defeasible => ":=",
            Tok::Defeater => ":~",
            Tok::Tilde => "~",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            _ => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let peek = chars.get(i + 1).copied();
        let tok = if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                bump!();
            }
            out.push(Spanned { tok: Tok::Ident(chars[start..i].iter().collect()), pos });
            continue;
        } else if c == '?' {
            bump!();
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                bump!();
            }
            if start == i {
                return Err(ParseError::syntax(pos, "`?`", &["variable name"]));
            }
            out.push(Spanned { tok: Tok::Var(chars[start..i].iter().collect()), pos });
            continue;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            // A dot only continues the number when a digit follows; otherwise
            // it terminates the statement (`ttl_limit(3).` vs `x(0.5)`).
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            out.push(Spanned { tok: Tok::Num(chars[start..i].iter().collect()), pos });
            continue;
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(ParseError::syntax(pos, "unterminated string", &["`\"`"]))
                    }
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') if matches!(chars.get(i + 1), Some('"') | Some('\\')) => {
                        bump!();
                        s.push(chars[i]);
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            out.push(Spanned { tok: Tok::Str(s), pos });
            continue;
        } else {
            match (c, peek) {
                (':', Some('-')) => (Tok::Strict, 2),
                (':', Some('=')) => (Tok::Defeasible, 2),
                (':', Some('~')) => (Tok::Defeater, 2),
                (':', _) => (Tok::Colon, 1),
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('-', _) => (Tok::Minus, 1),
                ('<', Some('=')) => (Tok::Le, 2),
                ('<', _) => (Tok::Lt, 1),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('>', _) => (Tok::Gt, 1),
                ('!', Some('=')) => (Tok::Ne, 2),
                ('=', _) => (Tok::Eq, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (',', _) => (Tok::Comma, 1),
                ('.', _) => (Tok::Dot, 1),
                ('~', _) => (Tok::Tilde, 1),
                ('+', _) => (Tok::Plus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('|', _) => {
                    return Err(ParseError::Unsupported { pos, what: "`|`".into() });
                }
                _ => {
                    return Err(ParseError::syntax(pos, &format!("`{c}`"), &["token"]));
                }
            }
        };
        let (tok, width) = tok;
        for _ in 0..width {
            bump!();
        }
        out.push(Spanned { tok, pos });
    }
    out.push(Spanned { tok: Tok::Eof, pos: Pos { line, col } });
    Ok(out)
}
