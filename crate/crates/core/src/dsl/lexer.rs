use std::fmt;

use super::{ParseError, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Str(String),
    /// Numeric literal; the source text is kept so integer positions can
    /// reject fractional input.
    Num(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    DotDot,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Le,
    EqEq,
    Ge,
    Gt,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::Num(s) => write!(f, "number {s}"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LBracket => f.write_str("`[`"),
            Tok::RBracket => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::Ge => f.write_str("`>=`"),
            Tok::Gt => f.write_str("`>`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(text: &str, file: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    let span = |line, column| SourceSpan { file: file.to_string(), line, column };

    while let Some(&c) = chars.peek() {
        let start = span(line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }
        let tok = if is_ident_start(c) {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !is_ident_char(c) {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            Tok::Ident(s)
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                bump(&mut chars);
            }
            // `2..` is an integer followed by a range marker.
            let mut look = chars.clone();
            look.next();
            if chars.peek() == Some(&'.') && look.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push('.');
                bump(&mut chars);
                while let Some(&c) = chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    s.push(c);
                    bump(&mut chars);
                }
            }
            if matches!(chars.peek(), Some('e' | 'E')) {
                let mut look = chars.clone();
                look.next();
                let mut exp = String::from("e");
                if let Some(&sign @ ('+' | '-')) = look.peek() {
                    exp.push(sign);
                    look.next();
                }
                if look.peek().is_some_and(|c| c.is_ascii_digit()) {
                    for _ in 0..exp.len() {
                        bump(&mut chars);
                    }
                    s.push_str(&exp);
                    while let Some(&c) = chars.peek() {
                        if !c.is_ascii_digit() {
                            break;
                        }
                        s.push(c);
                        bump(&mut chars);
                    }
                }
            }
            Tok::Num(s)
        } else if c == '"' {
            bump(&mut chars);
            let mut s = String::new();
            loop {
                match bump(&mut chars) {
                    None => return Err(ParseError::new(start, "unterminated string literal", &["`\"`"])),
                    Some('"') => break,
                    Some('\\') => match bump(&mut chars) {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        Some('t') => s.push('\t'),
                        Some('{') => s.push('{'),
                        Some('}') => s.push('}'),
                        other => {
                            return Err(ParseError::new(
                                span(line, col),
                                format!("invalid escape `\\{}`", other.map(String::from).unwrap_or_default()),
                                &["`\\\"`", "`\\\\`", "`\\n`", "`\\t`"],
                            ))
                        }
                    },
                    Some(c) => s.push(c),
                }
            }
            Tok::Str(s)
        } else {
            bump(&mut chars);
            let next = chars.peek().copied();
            let two = |chars: &mut std::iter::Peekable<std::str::Chars>, col: &mut u32, t: Tok| {
                chars.next();
                *col += 1;
                t
            };
            match (c, next) {
                ('.', Some('.')) => two(&mut chars, &mut col, Tok::DotDot),
                ('<', Some('=')) => two(&mut chars, &mut col, Tok::Le),
                ('>', Some('=')) => two(&mut chars, &mut col, Tok::Ge),
                ('=', Some('=')) => two(&mut chars, &mut col, Tok::EqEq),
                ('{', _) => Tok::LBrace,
                ('}', _) => Tok::RBrace,
                ('[', _) => Tok::LBracket,
                (']', _) => Tok::RBracket,
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (';', _) => Tok::Semi,
                (':', _) => Tok::Colon,
                (',', _) => Tok::Comma,
                ('+', _) => Tok::Plus,
                ('-', _) => Tok::Minus,
                ('*', _) => Tok::Star,
                ('/', _) => Tok::Slash,
                ('<', _) => Tok::Lt,
                ('>', _) => Tok::Gt,
                _ => return Err(ParseError::new(start, format!("unexpected character {c:?}"), &[])),
            }
        };
        out.push(Token { tok, span: start });
    }
    out.push(Token { tok: Tok::Eof, span: span(line, col) });
    Ok(out)
}
