use super::ast::{BinaryOp, Expr, UnaryOp};
use super::lexer::{tokenize, Token};
use super::SyntaxError;

/// Parse formula source beginning with `=` into an AST.
pub fn parse_formula(source: &str) -> Result<Expr, SyntaxError> {
    let lead = source.len() - source.trim_start().len();
    let body = source[lead..].strip_prefix('=').ok_or(SyntaxError {
        offset: lead,
        message: "formula must begin with `=`".into(),
    })?;
    let base = lead + 1;
    let tokens = tokenize(body, base)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: source.len(),
    };
    if p.tokens.is_empty() {
        return Err(SyntaxError {
            offset: base,
            message: "empty formula".into(),
        });
    }
    let expr = p.comparison()?;
    if let Some((_, at)) = p.tokens.get(p.pos) {
        return Err(SyntaxError {
            offset: *at,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, at)| *at)
    }

    fn err(&self, message: &str) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn binary_level(
        &mut self,
        next: fn(&mut Self) -> Result<Expr, SyntaxError>,
        ops: &[(Token, BinaryOp)],
    ) -> Result<Expr, SyntaxError> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (tok, op) in ops {
                if self.eat(tok) {
                    let rhs = next(self)?;
                    lhs = Expr::binary(*op, lhs, rhs);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn comparison(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(
            Self::concat,
            &[
                (Token::Eq, BinaryOp::Eq),
                (Token::Ne, BinaryOp::Ne),
                (Token::Le, BinaryOp::Le),
                (Token::Ge, BinaryOp::Ge),
                (Token::Lt, BinaryOp::Lt),
                (Token::Gt, BinaryOp::Gt),
            ],
        )
    }

    fn concat(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(Self::additive, &[(Token::Amp, BinaryOp::Concat)])
    }

    fn additive(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(
            Self::multiplicative,
            &[(Token::Plus, BinaryOp::Add), (Token::Minus, BinaryOp::Sub)],
        )
    }

    fn multiplicative(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(
            Self::power,
            &[(Token::Star, BinaryOp::Mul), (Token::Slash, BinaryOp::Div)],
        )
    }

    fn power(&mut self) -> Result<Expr, SyntaxError> {
        self.binary_level(Self::postfix, &[(Token::Caret, BinaryOp::Pow)])
    }

    fn postfix(&mut self) -> Result<Expr, SyntaxError> {
        let mut e = self.prefix()?;
        while self.eat(&Token::Percent) {
            e = Expr::unary(UnaryOp::Percent, e);
        }
        Ok(e)
    }

    fn prefix(&mut self) -> Result<Expr, SyntaxError> {
        if self.eat(&Token::Minus) {
            return Ok(Expr::unary(UnaryOp::Neg, self.prefix()?));
        }
        if self.eat(&Token::Plus) {
            return Ok(Expr::unary(UnaryOp::Plus, self.prefix()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, SyntaxError> {
        let at = self.offset();
        let Some(tok) = self.bump() else {
            return Err(SyntaxError {
                offset: at,
                message: "unexpected end of formula".into(),
            });
        };
        match tok {
            Token::Number(n) => Ok(Expr::Number(n)),
            Token::Text(s) => Ok(Expr::Text(s)),
            Token::Error(e) => Ok(Expr::Error(e)),
            Token::Cell(c) => Ok(Expr::Cell(c)),
            Token::Range(r) => Ok(Expr::Range(r)),
            Token::LParen => {
                let e = self.comparison()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Token::Ident(name) => {
                if self.eat(&Token::LParen) {
                    let args = self.arguments()?;
                    return Ok(Expr::call(&name, args));
                }
                match name.to_ascii_uppercase().as_str() {
                    "TRUE" => Ok(Expr::Bool(true)),
                    "FALSE" => Ok(Expr::Bool(false)),
                    _ => Ok(Expr::Name(name)),
                }
            }
            _ => Err(SyntaxError {
                offset: at,
                message: "unexpected token".into(),
            }),
        }
    }

    fn arguments(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        let mut args = Vec::new();
        if self.eat(&Token::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.comparison()?);
            if self.eat(&Token::Comma) {
                continue;
            }
            if self.eat(&Token::RParen) {
                return Ok(args);
            }
            return Err(self.err("expected `,` or `)`"));
        }
    }
}
