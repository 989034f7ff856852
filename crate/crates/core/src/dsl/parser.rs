use std::collections::HashSet;

use num_traits::Zero;

use super::ast::{Distribution, Expr, Init, InitValue, Program, Statement, SupportHint};
use super::lexer::{tokenize, Token, TokenKind};
use super::DslError;
use crate::poly::{parse_rational, Rational};

/// Parses loop source text into a [`Program`].
pub fn parse_program(source: &str) -> Result<Program, DslError> {
    let tokens = tokenize(source)?;
    Parser { tokens, pos: 0 }.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

const DISTRIBUTIONS: [&str; 3] = ["Normal", "Uniform", "Bernoulli"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, DslError> {
        let t = self.peek();
        Err(DslError::Syntax {
            line: t.line,
            column: t.column,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.kind.describe(),
        })
    }

    fn expect(&mut self, kind: TokenKind, label: &str) -> Result<Token, DslError> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            self.error(&[label])
        }
    }

    fn is_keyword(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == word)
    }

    fn keyword(&mut self, word: &str) -> Result<(), DslError> {
        if self.is_keyword(word) {
            self.advance();
            Ok(())
        } else {
            self.error(&[&format!("`{}`", word)])
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize), DslError> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Ident(name) => {
                self.advance();
                Ok((name, t.line, t.column))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn skip_separators(&mut self) {
        while self.peek().kind == TokenKind::Semi {
            self.advance();
        }
    }

    fn program(&mut self) -> Result<Program, DslError> {
        let mut binary = Vec::new();
        let mut supports = Vec::new();
        while self.peek().kind == TokenKind::At {
            self.advance();
            let (pragma, _, _) = self.ident()?;
            match pragma.as_str() {
                "binary" => binary.push(self.ident()?.0),
                "support" => {
                    let var = self.ident()?.0;
                    let lo = self.constant()?;
                    let hi = self.constant()?;
                    supports.push(SupportHint { var, lo, hi });
                }
                _ => {
                    self.pos -= 1;
                    return self.error(&["`binary`", "`support`"]);
                }
            }
            self.skip_separators();
        }

        let mut inits = Vec::new();
        let mut defined: HashSet<String> = HashSet::new();
        while !self.is_keyword("while") {
            if !matches!(self.peek().kind, TokenKind::Ident(_)) {
                return self.error(&["identifier", "`while`"]);
            }
            let (target, line, column) = self.ident()?;
            self.expect(TokenKind::Assign, "`:=`")?;
            let value = if self.at_distribution() {
                InitValue::Dist(self.distribution()?)
            } else {
                InitValue::Number(self.constant()?)
            };
            if !defined.insert(target.clone()) {
                return Err(DslError::DuplicateInit {
                    name: target,
                    line,
                    column,
                });
            }
            inits.push(Init { target, value });
            self.skip_separators();
        }

        self.keyword("while")?;
        self.keyword("true")?;
        self.expect(TokenKind::LBrace, "`{`")?;
        let mut body = Vec::new();
        self.skip_separators();
        while self.peek().kind != TokenKind::RBrace {
            let stmt = self.statement(&defined)?;
            for t in stmt.targets() {
                defined.insert(t.to_string());
            }
            body.push(stmt);
            self.skip_separators();
        }
        self.expect(TokenKind::RBrace, "`}`")?;
        self.skip_separators();
        if self.peek().kind != TokenKind::Eof {
            return self.error(&["end of input"]);
        }
        Ok(Program {
            binary,
            supports,
            inits,
            body,
        })
    }

    fn at_distribution(&self) -> bool {
        matches!(self.peek_at(0), TokenKind::Ident(s) if DISTRIBUTIONS.contains(&s.as_str()))
            && *self.peek_at(1) == TokenKind::LParen
    }

    fn distribution(&mut self) -> Result<Distribution, DslError> {
        let (name, _, _) = self.ident()?;
        self.expect(TokenKind::LParen, "`(`")?;
        let first = self.constant()?;
        let dist = if name == "Bernoulli" {
            Distribution::Bernoulli { p: first }
        } else {
            self.expect(TokenKind::Comma, "`,`")?;
            let second = self.constant()?;
            if name == "Normal" {
                Distribution::Normal {
                    mean: first,
                    variance: second,
                }
            } else {
                Distribution::Uniform {
                    lo: first,
                    hi: second,
                }
            }
        };
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(dist)
    }

    /// A literal, possibly signed or written as a fraction of literals.
    fn constant(&mut self) -> Result<Rational, DslError> {
        let start = self.pos;
        let expr = self.unary()?;
        let expr = if self.peek().kind == TokenKind::Slash {
            self.advance();
            let rhs = self.unary()?;
            self.fold_div(expr, rhs)?
        } else {
            expr
        };
        match expr {
            Expr::Num(r) => Ok(r),
            _ => {
                self.pos = start;
                self.error(&["number"])
            }
        }
    }

    fn statement(&mut self, defined: &HashSet<String>) -> Result<Statement, DslError> {
        if self.is_keyword("if") {
            self.advance();
            let (var, line, column) = self.ident()?;
            if !defined.contains(&var) {
                return Err(DslError::UndefinedVariable {
                    name: var,
                    line,
                    column,
                });
            }
            self.expect(TokenKind::Eq, "`=`")?;
            let value = match &self.peek().kind {
                TokenKind::Number(s) if s == "0" => 0,
                TokenKind::Number(s) if s == "1" => 1,
                _ => return self.error(&["`0`", "`1`"]),
            };
            self.advance();
            self.expect(TokenKind::LBrace, "`{`")?;
            let then = self.statement(defined)?;
            self.skip_separators();
            self.expect(TokenKind::RBrace, "`}`")?;
            self.keyword("else")?;
            self.expect(TokenKind::LBrace, "`{`")?;
            let otherwise = self.statement(defined)?;
            self.skip_separators();
            self.expect(TokenKind::RBrace, "`}`")?;
            return Ok(Statement::Guard {
                var,
                value,
                then: Box::new(then),
                otherwise: Box::new(otherwise),
            });
        }

        let (target, _, _) = self.ident()?;
        self.expect(TokenKind::Assign, "`:=`")?;
        if self.at_distribution() {
            let dist = self.distribution()?;
            return Ok(Statement::Draw { target, dist });
        }
        let then = self.expr(defined)?;
        if self.peek().kind == TokenKind::LBracket {
            self.advance();
            let prob = self.constant()?;
            self.expect(TokenKind::RBracket, "`]`")?;
            let otherwise = self.expr(defined)?;
            return Ok(Statement::Choice {
                target,
                then,
                prob,
                otherwise,
            });
        }
        Ok(Statement::Assign { target, expr: then })
    }

    fn expr(&mut self, defined: &HashSet<String>) -> Result<Expr, DslError> {
        let start = self.pos;
        let e = self.sum()?;
        self.check_defined(start, defined)?;
        Ok(e)
    }

    fn check_defined(&self, start: usize, defined: &HashSet<String>) -> Result<(), DslError> {
        for t in &self.tokens[start..self.pos] {
            if let TokenKind::Ident(name) = &t.kind {
                if !defined.contains(name) {
                    return Err(DslError::UndefinedVariable {
                        name: name.clone(),
                        line: t.line,
                        column: t.column,
                    });
                }
            }
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.product()?;
        loop {
            match self.peek().kind {
                TokenKind::Plus => {
                    self.advance();
                    let rhs = self.product()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                TokenKind::Minus => {
                    self.advance();
                    let rhs = self.product()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek().kind {
                TokenKind::Star => {
                    self.advance();
                    let rhs = self.unary()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                TokenKind::Slash => {
                    self.advance();
                    let rhs = self.unary()?;
                    lhs = self.fold_div(lhs, rhs)?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn fold_div(&mut self, lhs: Expr, rhs: Expr) -> Result<Expr, DslError> {
        if let Expr::Num(d) = &rhs {
            if d.is_zero() {
                self.pos -= 1;
                return self.error(&["nonzero divisor"]);
            }
            if let Expr::Num(n) = &lhs {
                return Ok(Expr::Num(n / d));
            }
        }
        Ok(Expr::Div(Box::new(lhs), Box::new(rhs)))
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        match self.peek().kind {
            TokenKind::Minus => {
                self.advance();
                Ok(match self.unary()? {
                    Expr::Num(r) => Expr::Num(-r),
                    e => Expr::Neg(Box::new(e)),
                })
            }
            TokenKind::Plus => {
                self.advance();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.atom()?;
        if self.peek().kind != TokenKind::Caret {
            return Ok(base);
        }
        self.advance();
        let exp = match &self.peek().kind {
            TokenKind::Number(s) => s.parse::<u32>().ok(),
            _ => None,
        };
        match exp {
            Some(e) => {
                self.advance();
                Ok(Expr::Pow(Box::new(base), e))
            }
            None => self.error(&["non-negative integer exponent"]),
        }
    }

    fn atom(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Number(text) => match parse_rational(&text) {
                Some(r) => {
                    self.advance();
                    Ok(Expr::Num(r))
                }
                None => self.error(&["number"]),
            },
            TokenKind::Ident(name) if !DISTRIBUTIONS.contains(&name.as_str()) => {
                self.advance();
                Ok(Expr::Var(name))
            }
            TokenKind::LParen => {
                self.advance();
                let e = self.sum()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.error(&["number", "identifier", "`(`"]),
        }
    }
}
