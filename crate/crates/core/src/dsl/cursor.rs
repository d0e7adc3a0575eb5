use super::lexer::{Tok, Token};
use super::{ParseError, SourceSpan};

/// Nesting limit for recursive constructs; deeper input is rejected rather
/// than risking the stack. Also keeps a parsed model within serde_json's
/// recursion limit when a grid is exported.
pub const MAX_DEPTH: usize = 50;

pub struct Cursor<'t> {
    toks: &'t [Token],
    pos: usize,
    pub depth: usize,
}

impl<'t> Cursor<'t> {
    pub fn new(toks: &'t [Token]) -> Self {
        debug_assert!(matches!(toks.last(), Some(Token { tok: Tok::Eof, .. })));
        Self { toks, pos: 0, depth: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }


    pub fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    pub fn next(&mut self) -> &Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    pub fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError::new(self.span(), message, expected)
    }

    pub fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error(format!("unexpected {}", self.peek()), expected)
    }

    pub fn expect(&mut self, tok: Tok) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.next().span.clone())
        } else {
            Err(self.unexpected(&[&tok.to_string()]))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> Result<SourceSpan, ParseError> {
        if self.is_kw(kw) {
            Ok(self.next().span.clone())
        } else {
            Err(self.unexpected(&[&format!("`{kw}`")]))
        }
    }

    pub fn string(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected(&["string"])),
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    /// An unsigned integer literal that fits in `u32`.
    pub fn integer(&mut self) -> Result<u32, ParseError> {
        match self.peek() {
            Tok::Num(s) => match s.parse::<u32>() {
                Ok(n) => {
                    self.next();
                    Ok(n)
                }
                Err(_) => Err(self.error(format!("expected an integer, found {s}"), &["integer"])),
            },
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    pub fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Tok::Num(s) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    self.next();
                    Ok(v)
                }
                _ => Err(self.error(format!("number {s} is out of range"), &["finite number"])),
            },
            _ => Err(self.unexpected(&["number"])),
        }
    }

    pub fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(self.error("nesting too deep", &[]));
        }
        Ok(())
    }

    pub fn leave(&mut self) {
        self.depth -= 1;
    }
}
