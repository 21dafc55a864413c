//! Recursive-descent parser. Errors stop the parse; nothing is executed
//! from a program that failed to parse.

use crate::arith::Rational;
use crate::checks::Sign;

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::{Diagnostic, Span, MAX_EXPONENT, MAX_MODEL_DEGREE, MAX_RANK, MAX_UNIVERSAL_DEGREE};

type PResult<T> = Result<T, Diagnostic>;

pub fn parse(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let tokens = tokenize(source).map_err(|d| vec![d])?;
    let mut parser = Parser { tokens, pos: 0 };
    let mut statements = Vec::new();
    while !parser.at(&TokenKind::Eof) {
        statements.push(parser.statement().map_err(|d| vec![d])?);
    }
    Ok(Program { statements })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &TokenKind {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn at_word(&self, word: &str) -> bool {
        matches!(&self.peek().kind, TokenKind::Ident(s) if s == word)
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        let t = self.peek();
        Diagnostic::error(format!("expected {wanted}, found {}", t.kind.describe()), t.span)
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Token> {
        if self.at(&kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&kind.describe()))
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<Span> {
        if self.at_word(word) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    fn eat_word(&mut self, word: &str) -> bool {
        let hit = self.at_word(word);
        if hit {
            self.bump();
        }
        hit
    }

    fn ident(&mut self) -> PResult<Ident> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let name = name.clone();
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn uint(&mut self) -> PResult<(u32, Span)> {
        match &self.peek().kind {
            TokenKind::Int(digits) => {
                let span = self.peek().span;
                let v = digits
                    .parse::<u32>()
                    .map_err(|_| Diagnostic::error(format!("integer {digits} is too large"), span))?;
                self.bump();
                Ok((v, span))
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn sint(&mut self) -> PResult<i64> {
        let negative = if self.at(&TokenKind::Minus) {
            self.bump();
            true
        } else {
            false
        };
        let (v, _) = self.uint()?;
        Ok(if negative { -(v as i64) } else { v as i64 })
    }

    /// `word = int`, as in `d=4`.
    fn keyed_uint(&mut self, word: &str) -> PResult<u32> {
        self.expect_word(word)?;
        self.expect(TokenKind::Assign)?;
        Ok(self.uint()?.0)
    }

    fn end(&mut self) -> PResult<()> {
        self.expect(TokenKind::Semi).map(|_| ())
    }

    fn statement(&mut self) -> PResult<Statement> {
        let span = self.peek().span;
        let word = match &self.peek().kind {
            TokenKind::Ident(w) => w.clone(),
            _ => return Err(self.unexpected("a statement")),
        };
        let kind = match word.as_str() {
            "model" => {
                self.bump();
                StatementKind::Model(self.model()?)
            }
            "line" => {
                self.bump();
                StatementKind::Line(self.line()?)
            }
            "bundle" => {
                self.bump();
                StatementKind::Bundle(self.bundle()?)
            }
            "let" => {
                self.bump();
                let name = self.ident()?;
                self.expect(TokenKind::Assign)?;
                let value = self.expr()?;
                StatementKind::Let { name, value }
            }
            _ => StatementKind::Query(self.query()?),
        };
        self.end()?;
        Ok(Statement { kind, span })
    }

    fn model(&mut self) -> PResult<ModelSpec> {
        let kw = self.ident()?;
        let args = |p: &mut Parser, count: usize| -> PResult<Vec<(u32, Span)>> {
            p.expect(TokenKind::LParen)?;
            let mut out = vec![p.uint()?];
            while out.len() < count {
                p.expect(TokenKind::Comma)?;
                out.push(p.uint()?);
            }
            p.expect(TokenKind::RParen)?;
            Ok(out)
        };
        let positive = |(v, span): (u32, Span), what: &str| -> PResult<u32> {
            if v == 0 {
                Err(Diagnostic::error(format!("{what} must be positive"), span))
            } else {
                Ok(v)
            }
        };
        let too_big = |v: u64, limit: u32, what: &str, span: Span| -> PResult<()> {
            if v > limit as u64 {
                Err(Diagnostic::error(format!("model {what} {v} exceeds the limit of {limit}"), span))
            } else {
                Ok(())
            }
        };
        match kw.name.as_str() {
            "P" => {
                let a = args(self, 1)?;
                let n = positive(a[0], "dimension")?;
                too_big(n as u64, MAX_MODEL_DEGREE, "dimension", kw.span)?;
                Ok(ModelSpec::Projective(n))
            }
            "PxP" => {
                let a = args(self, 2)?;
                let (m, n) = (positive(a[0], "dimension")?, positive(a[1], "dimension")?);
                too_big(m as u64 + n as u64, MAX_MODEL_DEGREE, "dimension", kw.span)?;
                Ok(ModelSpec::ProjectiveProduct(m, n))
            }
            "G" => {
                let a = args(self, 2)?;
                let (k, n) = (positive(a[0], "k")?, a[1].0);
                if k >= n {
                    return Err(Diagnostic::error("G(k, n) needs 0 < k < n", a[1].1));
                }
                too_big(k as u64 * (n - k) as u64, MAX_MODEL_DEGREE, "dimension", kw.span)?;
                Ok(ModelSpec::Grassmannian(k, n))
            }
            "universal" => {
                let a = args(self, 1)?;
                let d = positive(a[0], "degree")?;
                too_big(d as u64, MAX_UNIVERSAL_DEGREE, "degree", a[0].1)?;
                Ok(ModelSpec::Universal(d))
            }
            other => Err(Diagnostic::error(
                format!("unknown model `{other}`; expected P, PxP, G or universal"),
                kw.span,
            )),
        }
    }

    fn line(&mut self) -> PResult<LineDecl> {
        let name = self.ident()?;
        let gg = self.eat_word("gg");
        let c1 = if self.eat_word("c1") {
            self.expect(TokenKind::Assign)?;
            Some(self.expr()?)
        } else {
            None
        };
        Ok(LineDecl { name, gg, c1 })
    }

    fn bundle(&mut self) -> PResult<BundleDecl> {
        let name = self.ident()?;
        self.expect_word("rank")?;
        let (rank, span) = self.uint()?;
        if rank == 0 {
            return Err(Diagnostic::error("rank must be positive", span));
        }
        if rank > MAX_RANK {
            return Err(Diagnostic::error(format!("rank {rank} exceeds the limit of {MAX_RANK}"), span));
        }
        let gg = self.eat_word("gg");
        let gg_twist = self.eat_word("gg_twist");
        let on = if self.eat_word("on") { Some(self.ident()?) } else { None };
        let chern = if self.eat_word("chern") {
            self.expect(TokenKind::Assign)?;
            self.expect(TokenKind::LBracket)?;
            let mut list = vec![self.expr()?];
            while self.at(&TokenKind::Comma) {
                self.bump();
                list.push(self.expr()?);
            }
            let close = self.expect(TokenKind::RBracket)?;
            if list.len() > rank as usize {
                return Err(Diagnostic::error(
                    format!("{} Chern classes given for a bundle of rank {rank}", list.len()),
                    close.span,
                ));
            }
            Some(list)
        } else {
            None
        };
        Ok(BundleDecl { name, rank, gg, gg_twist, on, chern })
    }

    fn query(&mut self) -> PResult<Query> {
        let kw = self.ident()?;
        Ok(match kw.name.as_str() {
            "certify_top" => Query::CertifyTop { bundle: self.ident()?, line: self.ident()? },
            "certify_xi" => Query::CertifyXi {
                bundle: self.ident()?,
                line: self.ident()?,
                index: self.uint()?.0,
            },
            "ch" => {
                let bundle = self.ident()?;
                self.expect_word("upto")?;
                Query::Ch { bundle, upto: self.uint()?.0 }
            }
            "expand" => Query::Expand(self.expr()?),
            "oracle" => {
                let lhs = self.expr()?;
                self.expect(TokenKind::EqEq)?;
                Query::Oracle(lhs, self.expr()?)
            }
            "kleiman" => {
                let d = self.keyed_uint("d")?;
                let i = self.keyed_uint("i")?;
                Query::Kleiman { d, i }
            }
            "syzygy" => Query::Syzygy(self.syzygy()?),
            "express" => {
                let target = self.expr()?;
                self.expect_word("in")?;
                self.expect(TokenKind::LBracket)?;
                let mut generators = vec![self.ident()?];
                while self.at(&TokenKind::Comma) {
                    self.bump();
                    generators.push(self.ident()?);
                }
                self.expect(TokenKind::RBracket)?;
                Query::Express { target, generators }
            }
            other => {
                return Err(Diagnostic::error(format!("unknown statement `{other}`"), kw.span));
            }
        })
    }

    fn syzygy(&mut self) -> PResult<SyzygyQuery> {
        let bundle = self.ident()?;
        let (p, p_span) = {
            self.expect_word("p")?;
            self.expect(TokenKind::Assign)?;
            self.uint()?
        };
        if p == 0 {
            return Err(Diagnostic::error("p must be positive", p_span));
        }
        self.expect_word("n")?;
        self.expect(TokenKind::Assign)?;
        let n = self.sint()?;
        self.expect_word("sign")?;
        self.expect(TokenKind::Assign)?;
        let sign = match self.peek().kind {
            TokenKind::Plus => Sign::Plus,
            TokenKind::Minus => Sign::Minus,
            _ => return Err(self.unexpected("`+` or `-`")),
        };
        self.bump();
        self.expect_word("z")?;
        self.expect(TokenKind::Assign)?;
        let z = self.expr()?;
        let hyperplane = if self.eat_word("h") {
            self.expect(TokenKind::Assign)?;
            Some(self.expr()?)
        } else {
            None
        };
        Ok(SyzygyQuery { bundle, p, n, sign, z, hyperplane })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.product()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.unary()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), span };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.at(&TokenKind::Minus) {
            let span = self.bump().span;
            return Ok(Expr::Neg(Box::new(self.unary()?), span));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.atom()?;
        if self.at(&TokenKind::Caret) {
            let span = self.bump().span;
            let (e, e_span) = self.uint()?;
            if e > MAX_EXPONENT {
                return Err(Diagnostic::error(format!("exponent {e} exceeds the limit of {MAX_EXPONENT}"), e_span));
            }
            return Ok(Expr::Pow(Box::new(base), e, span));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.peek().span;
        match self.peek().kind.clone() {
            TokenKind::Int(digits) => {
                self.bump();
                let v: num_bigint::BigInt = digits.parse().expect("lexer yields digits");
                Ok(Expr::Num(Rational::from(v), span))
            }
            TokenKind::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(e)
            }
            TokenKind::Ident(name) => {
                if name == "s" && *self.peek_at(1) == TokenKind::LBracket {
                    self.bump();
                    self.bump();
                    let mut partition = Vec::new();
                    if !self.at(&TokenKind::RBracket) {
                        partition.push(self.uint()?.0);
                        while self.at(&TokenKind::Comma) {
                            self.bump();
                            partition.push(self.uint()?.0);
                        }
                    }
                    self.expect(TokenKind::RBracket)?;
                    return Ok(Expr::Schubert { partition, span });
                }
                if let Some(k) = chern_index(&name) {
                    if *self.peek_at(1) == TokenKind::LParen {
                        self.bump();
                        self.bump();
                        let bundle = self.bundle_sum()?;
                        self.expect(TokenKind::RParen)?;
                        return Ok(Expr::Chern { k, bundle, span });
                    }
                }
                Ok(Expr::Var(self.ident()?))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn bundle_sum(&mut self) -> PResult<BundleRef> {
        let mut lhs = self.bundle_term()?;
        while self.at(&TokenKind::Plus) {
            self.bump();
            let rhs = self.bundle_term()?;
            lhs = BundleRef::Sum(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn bundle_term(&mut self) -> PResult<BundleRef> {
        let mut base = self.bundle_atom()?;
        while self.at(&TokenKind::Star) {
            self.bump();
            let line = self.ident()?;
            let power = if self.at(&TokenKind::Caret) {
                self.bump();
                self.sint()?
            } else {
                1
            };
            base = BundleRef::Twist(Box::new(base), line, power);
        }
        Ok(base)
    }

    fn bundle_atom(&mut self) -> PResult<BundleRef> {
        if self.at(&TokenKind::LParen) {
            self.bump();
            let b = self.bundle_sum()?;
            self.expect(TokenKind::RParen)?;
            return Ok(b);
        }
        if self.at_word("dual") && *self.peek_at(1) == TokenKind::LParen {
            self.bump();
            self.bump();
            let b = self.bundle_sum()?;
            self.expect(TokenKind::RParen)?;
            return Ok(BundleRef::Dual(Box::new(b)));
        }
        Ok(BundleRef::Name(self.ident()?))
    }
}

/// `c3` → 3.
fn chern_index(name: &str) -> Option<u32> {
    let digits = name.strip_prefix('c')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}
