use crate::vars::is_valid_ident;
use crate::{Expression, SymbolicError, VarTable};

/// Parses infix notation over the names in `table`.
///
/// Grammar: `+ - * /` with standard precedence, `^` for nonnegative integer
/// powers (the exponent must be an integer literal), `sin(...)` and
/// `cos(...)`, decimal literals with optional exponent part, parentheses,
/// and unary minus. Unknown identifiers are errors.
pub fn parse_expression(src: &str, table: &VarTable) -> Result<Expression, SymbolicError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        table,
    };
    let e = p.expr()?;
    match p.peek() {
        Some(t) => Err(err(t.pos, format!("unexpected `{}`", t.text()))),
        None => Ok(e),
    }
}

fn err(pos: usize, msg: impl Into<String>) -> SymbolicError {
    SymbolicError::Parse {
        pos,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
    len: usize,
    raw: String,
}

impl Token {
    fn text(&self) -> &str {
        &self.raw
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>, SymbolicError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Token {
                tok,
                pos: i,
                len: 1,
                raw: c.to_string(),
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
            }
            if start == i || (i - start == 1 && bytes[start] == b'.') {
                return Err(err(start, "malformed number"));
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                let digits = j;
                while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    j += 1;
                }
                if j > digits {
                    i = j;
                }
                // otherwise the 'e' belongs to a following identifier
            }
            let text = &src[start..i];
            let v: f64 = text
                .parse()
                .map_err(|_| err(start, format!("malformed number `{text}`")))?;
            if !v.is_finite() {
                return Err(err(start, format!("literal `{text}` overflows f64")));
            }
            out.push(Token {
                tok: Tok::Num(v),
                pos: start,
                len: i - start,
                raw: text.to_string(),
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len()
                && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
            {
                i += 1;
            }
            let name = &src[start..i];
            out.push(Token {
                tok: Tok::Ident(name.to_string()),
                pos: start,
                len: i - start,
                raw: name.to_string(),
            });
            continue;
        }
        return Err(err(i, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    table: &'a VarTable,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn end_pos(&self) -> usize {
        self.tokens
            .last()
            .map(|t| t.pos + t.len)
            .unwrap_or(0)
    }

    fn expr(&mut self) -> Result<Expression, SymbolicError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Plus => {
                    self.next();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.next();
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expression, SymbolicError> {
        let mut acc = self.unary()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Star => {
                    self.next();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    self.next();
                    acc = acc.div(&self.unary()?)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expression, SymbolicError> {
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Minus) => {
                self.next();
                Ok(self.unary()?.neg())
            }
            Some(Tok::Plus) => {
                self.next();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expression, SymbolicError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek().map(|t| t.tok.clone()) {
            self.next();
            let t = self
                .next()
                .ok_or_else(|| err(self.end_pos(), "expected exponent after `^`"))?;
            let k = match t.tok {
                Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => v as u32,
                _ => {
                    return Err(err(
                        t.pos,
                        "exponent must be a nonnegative integer literal",
                    ))
                }
            };
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression, SymbolicError> {
        let t = self
            .next()
            .ok_or_else(|| err(self.end_pos(), "unexpected end of input"))?;
        match t.tok {
            Tok::Num(v) => Expression::constant(v),
            Tok::LParen => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token {
                        tok: Tok::RParen, ..
                    }) => Ok(e),
                    Some(u) => Err(err(u.pos, format!("expected `)`, found `{}`", u.text()))),
                    None => Err(err(self.end_pos(), "missing closing `)`")),
                }
            }
            Tok::Ident(name) if name == "sin" || name == "cos" => {
                match self.next() {
                    Some(Token {
                        tok: Tok::LParen, ..
                    }) => {}
                    _ => return Err(err(t.pos, format!("expected `(` after `{name}`"))),
                }
                let arg = self.expr()?;
                match self.next() {
                    Some(Token {
                        tok: Tok::RParen, ..
                    }) => {}
                    _ => return Err(err(t.pos, format!("missing `)` after `{name}(...`"))),
                }
                Ok(if name == "sin" { arg.sin() } else { arg.cos() })
            }
            Tok::Ident(name) => {
                debug_assert!(is_valid_ident(&name));
                match self.table.index_of(&name) {
                    Some(i) => Ok(Expression::var(i)),
                    None => Err(err(t.pos, format!("unknown variable `{name}`"))),
                }
            }
            _ => Err(err(t.pos, format!("unexpected `{}`", t.text()))),
        }
    }
}
