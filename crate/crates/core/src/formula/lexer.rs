use crate::a1::{self, Area, SheetArea};

use super::ast::CellRef;
use super::value::ErrorCode;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    Number(f64),
    Text(String),
    Error(ErrorCode),
    Cell(CellRef),
    Range(SheetArea),
    /// Bare identifier: function name, boolean, or named range.
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Amp,
    Percent,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LParen,
    RParen,
    Comma,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.' || c == '$'
}

/// Tokenize formula text. `base` is the byte offset of `src` within the full source.
pub(crate) fn tokenize(src: &str, base: usize) -> Result<Vec<(Token, usize)>, SyntaxError> {
    let mut lx = Lexer { src, pos: 0, base };
    let mut out = Vec::new();
    while let Some((tok, at)) = lx.next_token()? {
        out.push((tok, base + at));
    }
    Ok(out)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    base: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, at: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            offset: self.base + at,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn word_at(&self, at: usize) -> &'a str {
        let s = &self.src[at..];
        let end = s.find(|c: char| !is_word_char(c)).unwrap_or(s.len());
        &s[..end]
    }

    fn next_token(&mut self) -> Result<Option<(Token, usize)>, SyntaxError> {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let simple = match c {
            '+' => Some(Token::Plus),
            '-' => Some(Token::Minus),
            '*' => Some(Token::Star),
            '/' => Some(Token::Slash),
            '^' => Some(Token::Caret),
            '&' => Some(Token::Amp),
            '%' => Some(Token::Percent),
            '(' => Some(Token::LParen),
            ')' => Some(Token::RParen),
            ',' => Some(Token::Comma),
            '=' => Some(Token::Eq),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok(Some((tok, start)));
        }
        let tok = match c {
            '<' => {
                let r = self.rest();
                if r.starts_with("<=") {
                    self.pos += 2;
                    Token::Le
                } else if r.starts_with("<>") {
                    self.pos += 2;
                    Token::Ne
                } else {
                    self.pos += 1;
                    Token::Lt
                }
            }
            '>' => {
                if self.rest().starts_with(">=") {
                    self.pos += 2;
                    Token::Ge
                } else {
                    self.pos += 1;
                    Token::Gt
                }
            }
            '"' => self.string()?,
            '#' => self.error_literal()?,
            '\'' => {
                let (sheet, body) = a1::split_sheet_prefix(self.rest())
                    .map_err(|_| self.err(start, "unterminated or malformed sheet name"))?;
                let body_at = self.src.len() - body.len();
                self.pos = body_at;
                self.reference(sheet, start)?
                    .ok_or_else(|| self.err(body_at, "expected a reference after sheet name"))?
            }
            c if c.is_ascii_digit() || c == '.' || c == '$' || is_word_char(c) => {
                self.word(start)?
            }
            other => return Err(self.err(start, format!("unexpected character `{other}`"))),
        };
        Ok(Some((tok, start)))
    }

    fn string(&mut self) -> Result<Token, SyntaxError> {
        let start = self.pos;
        let mut out = String::new();
        let mut chars = self.src[start + 1..].char_indices();
        while let Some((i, c)) = chars.next() {
            if c == '"' {
                if self.src[start + 1 + i + 1..].starts_with('"') {
                    chars.next();
                    out.push('"');
                    continue;
                }
                self.pos = start + 1 + i + 1;
                return Ok(Token::Text(out));
            }
            out.push(c);
        }
        Err(self.err(start, "unterminated string literal"))
    }

    fn error_literal(&mut self) -> Result<Token, SyntaxError> {
        let rest = self.rest();
        for code in ErrorCode::ALL {
            let s = code.as_str();
            if rest.len() >= s.len()
                && rest.is_char_boundary(s.len())
                && rest[..s.len()].eq_ignore_ascii_case(s)
            {
                self.pos += s.len();
                return Ok(Token::Error(code));
            }
        }
        Err(self.err(self.pos, "unknown error literal"))
    }

    fn number(&mut self) -> Result<Token, SyntaxError> {
        let start = self.pos;
        let b = self.src.as_bytes();
        let mut i = start;
        let digits = |i: &mut usize| {
            let s = *i;
            while *i < b.len() && b[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - s
        };
        let mut n = digits(&mut i);
        if i < b.len() && b[i] == b'.' {
            i += 1;
            n += digits(&mut i);
        }
        if n == 0 {
            return Err(self.err(start, "malformed number"));
        }
        if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) > 0 {
                i = j;
            }
        }
        if i < b.len() && is_word_char(self.src[i..].chars().next().unwrap_or(' ')) {
            return Err(self.err(start, "malformed number"));
        }
        let value: f64 = self.src[start..i]
            .parse()
            .map_err(|_| self.err(start, "malformed number"))?;
        self.pos = i;
        Ok(Token::Number(value))
    }

    fn word(&mut self, start: usize) -> Result<Token, SyntaxError> {
        let word = self.word_at(start);
        let after = start + word.len();

        if self.src[after..].starts_with('!') && !word.is_empty() {
            if word.contains('$') {
                return Err(self.err(start, "malformed sheet name"));
            }
            self.pos = after + 1;
            return self
                .reference(Some(word.to_string()), start)?
                .ok_or_else(|| self.err(after + 1, "expected a reference after sheet name"));
        }

        let next_is_paren = self.src[after..].trim_start().starts_with('(');
        let identifier_like = word
            .chars()
            .next()
            .is_some_and(|c| c.is_alphabetic() || c == '_')
            && !word.contains('$');
        if next_is_paren && identifier_like {
            self.pos = after;
            return Ok(Token::Ident(word.to_string()));
        }

        if let Some(tok) = self.reference(None, start)? {
            return Ok(tok);
        }
        if word.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            return self.number();
        }
        if identifier_like {
            self.pos = after;
            return Ok(Token::Ident(word.to_string()));
        }
        Err(self.err(start, format!("unexpected token `{word}`")))
    }

    /// Try to read a reference body at `self.pos`. Returns `Ok(None)` (position
    /// unchanged) when the text is not reference-shaped.
    fn reference(
        &mut self,
        sheet: Option<String>,
        start: usize,
    ) -> Result<Option<Token>, SyntaxError> {
        let at = self.pos;
        let w1 = self.word_at(at);
        let after1 = at + w1.len();
        let (w2, end) = if self.src[after1..].starts_with(':') {
            let w2 = self.word_at(after1 + 1);
            (Some(w2), after1 + 1 + w2.len())
        } else {
            (None, after1)
        };
        let oob = |s: &str| self.err(start, format!("reference `{s}` is outside the grid"));

        let token = match w2 {
            None if a1::looks_like_cell(w1) => {
                let t = a1::parse_cell_token(w1).map_err(|_| oob(w1))?;
                Token::Cell(CellRef {
                    sheet,
                    addr: t.addr,
                    abs_col: t.abs_col,
                    abs_row: t.abs_row,
                })
            }
            Some(w2) if a1::looks_like_cell(w1) && a1::looks_like_cell(w2) => {
                let a = a1::parse_cell_token(w1).map_err(|_| oob(w1))?;
                let b = a1::parse_cell_token(w2).map_err(|_| oob(w2))?;
                Token::Range(SheetArea {
                    sheet,
                    area: Area::cells(a.addr, b.addr),
                })
            }
            Some(w2) if is_column_word(w1) && is_column_word(w2) => {
                match (a1::parse_column_token(w1), a1::parse_column_token(w2)) {
                    (Some(a), Some(b)) => Token::Range(SheetArea {
                        sheet,
                        area: Area::columns(a, b),
                    }),
                    _ => return Err(oob(&self.src[at..end])),
                }
            }
            Some(w2) if is_row_word(w1) && is_row_word(w2) => {
                match (a1::parse_row_token(w1), a1::parse_row_token(w2)) {
                    (Some(a), Some(b)) => Token::Range(SheetArea {
                        sheet,
                        area: Area::rows(a, b),
                    }),
                    _ => return Err(oob(&self.src[at..end])),
                }
            }
            _ => return Ok(None),
        };
        self.pos = end;
        Ok(Some(token))
    }
}

fn is_column_word(s: &str) -> bool {
    let s = s.strip_prefix('$').unwrap_or(s);
    !s.is_empty() && s.len() <= 3 && s.bytes().all(|b| b.is_ascii_alphabetic())
}

fn is_row_word(s: &str) -> bool {
    let s = s.strip_prefix('$').unwrap_or(s);
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}
