//! Lexer and precedence-climbing parser shared by the propositional and the
//! first-order language.
//!
//! Precedence, loosest first: quantifier scope, `<->` (left), `->` (right),
//! `|` (left), `&` (left), unary `~ <> []`. A quantifier body extends as far
//! to the right as possible.

use std::fmt;

use super::fo::{FoFormula, Signature, Term};
use super::prop::PropFormula;
use super::FormulaError;

/// A syntax error with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at offset {}: expected {}, found {}", self.offset, self.expected.join(" or "), self.found)
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    LParen,
    RParen,
    Comma,
    Dot,
    Tilde,
    Diamond,
    Box,
    And,
    Or,
    Arrow,
    DoubleArrow,
    Equals,
    Ident(String),
    Param(String),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::Comma => f.write_str("','"),
            Tok::Dot => f.write_str("'.'"),
            Tok::Tilde => f.write_str("'~'"),
            Tok::Diamond => f.write_str("'<>'"),
            Tok::Box => f.write_str("'[]'"),
            Tok::And => f.write_str("'&'"),
            Tok::Or => f.write_str("'|'"),
            Tok::Arrow => f.write_str("'->'"),
            Tok::DoubleArrow => f.write_str("'<->'"),
            Tok::Equals => f.write_str("'='"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Param(s) => write!(f, "'#{s}'"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let ident_char = |c: u8| c.is_ascii_alphanumeric() || c == b'_';
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &src[i..];
        let tok = if rest.starts_with("<->") {
            i += 3;
            Tok::DoubleArrow
        } else if rest.starts_with("<>") {
            i += 2;
            Tok::Diamond
        } else if rest.starts_with("[]") {
            i += 2;
            Tok::Box
        } else if rest.starts_with("->") {
            i += 2;
            Tok::Arrow
        } else if c == b'#' {
            i += 1;
            let s = i;
            while i < bytes.len() && ident_char(bytes[i]) {
                i += 1;
            }
            if s == i {
                return Err(SyntaxError {
                    offset: s,
                    expected: vec!["parameter name".into()],
                    found: found_at(src, s),
                });
            }
            Tok::Param(src[s..i].to_string())
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && ident_char(bytes[i]) {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else {
            i += 1;
            match c {
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                b'.' => Tok::Dot,
                b'~' => Tok::Tilde,
                b'&' => Tok::And,
                b'|' => Tok::Or,
                b'=' => Tok::Equals,
                _ => {
                    return Err(SyntaxError {
                        offset: start,
                        expected: vec!["a token".into()],
                        found: found_at(src, start),
                    })
                }
            }
        };
        out.push((tok, start));
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

fn found_at(src: &str, offset: usize) -> String {
    match src[offset..].chars().next() {
        Some(c) => format!("'{c}'"),
        None => "end of input".into(),
    }
}

/// Constructors the grammar needs from a target AST.
trait Node: Sized {
    fn top() -> Self;
    fn bot() -> Self;
    fn not(p: Self) -> Self;
    fn and(p: Self, q: Self) -> Self;
    fn or(p: Self, q: Self) -> Self;
    fn implies(p: Self, q: Self) -> Self;
    fn iff(p: Self, q: Self) -> Self;
    fn diamond(p: Self) -> Self;
    fn boxed(p: Self) -> Self;
}

macro_rules! impl_node {
    ($t:ty) => {
        impl Node for $t {
            fn top() -> Self {
                <$t>::Top
            }
            fn bot() -> Self {
                <$t>::Bot
            }
            fn not(p: Self) -> Self {
                <$t>::not(p)
            }
            fn and(p: Self, q: Self) -> Self {
                <$t>::and(p, q)
            }
            fn or(p: Self, q: Self) -> Self {
                <$t>::or(p, q)
            }
            fn implies(p: Self, q: Self) -> Self {
                <$t>::implies(p, q)
            }
            fn iff(p: Self, q: Self) -> Self {
                <$t>::iff(p, q)
            }
            fn diamond(p: Self) -> Self {
                <$t>::diamond(p)
            }
            fn boxed(p: Self) -> Self {
                <$t>::boxed(p)
            }
        }
    };
}

impl_node!(PropFormula);
impl_node!(FoFormula);

/// Language-specific leaves: atoms and (for first-order) quantifiers.
trait Leaves<N> {
    fn quantifier(&mut self, p: &mut Parser) -> Result<Option<N>, FormulaError>;
    fn atom(&mut self, p: &mut Parser) -> Result<N, FormulaError>;
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Self, SyntaxError> {
        Ok(Parser { toks: lex(src)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn formula<N: Node>(&mut self, leaves: &mut dyn Leaves<N>) -> Result<N, FormulaError> {
        let mut lhs = self.implication(leaves)?;
        while *self.peek() == Tok::DoubleArrow {
            self.bump();
            let rhs = self.implication(leaves)?;
            lhs = N::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication<N: Node>(&mut self, leaves: &mut dyn Leaves<N>) -> Result<N, FormulaError> {
        let lhs = self.disjunction(leaves)?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication(leaves)?;
            return Ok(N::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction<N: Node>(&mut self, leaves: &mut dyn Leaves<N>) -> Result<N, FormulaError> {
        let mut lhs = self.conjunction(leaves)?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction(leaves)?;
            lhs = N::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction<N: Node>(&mut self, leaves: &mut dyn Leaves<N>) -> Result<N, FormulaError> {
        let mut lhs = self.unary(leaves)?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary(leaves)?;
            lhs = N::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary<N: Node>(&mut self, leaves: &mut dyn Leaves<N>) -> Result<N, FormulaError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(N::not(self.unary(leaves)?))
            }
            Tok::Diamond => {
                self.bump();
                Ok(N::diamond(self.unary(leaves)?))
            }
            Tok::Box => {
                self.bump();
                Ok(N::boxed(self.unary(leaves)?))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula(leaves)?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(N::top())
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(N::bot())
            }
            _ => {
                if let Some(q) = leaves.quantifier(self)? {
                    return Ok(q);
                }
                leaves.atom(self)
            }
        }
    }

    fn finish(&mut self) -> Result<(), SyntaxError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            Err(self.error(&["a binary connective", "end of input"]))
        }
    }
}

struct PropLeaves;

impl Leaves<PropFormula> for PropLeaves {
    fn quantifier(&mut self, _: &mut Parser) -> Result<Option<PropFormula>, FormulaError> {
        Ok(None)
    }

    fn atom(&mut self, p: &mut Parser) -> Result<PropFormula, FormulaError> {
        if let Tok::Ident(s) = p.peek() {
            if let Some(digits) = s.strip_prefix('p') {
                if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                    if let Ok(i) = digits.parse::<u32>() {
                        p.bump();
                        return Ok(PropFormula::Var(i));
                    }
                }
            }
        }
        Err(p.error(&["a variable p<n>", "'true'", "'false'", "'('", "a unary operator"]).into())
    }
}

struct FoLeaves<'s> {
    sig: &'s Signature,
}

impl FoLeaves<'_> {
    fn term(&self, p: &mut Parser) -> Result<Term, SyntaxError> {
        match p.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                p.bump();
                Ok(Term::Var(s))
            }
            Tok::Param(s) => {
                p.bump();
                Ok(Term::Param(s))
            }
            _ => Err(p.error(&["a variable", "a parameter #id"])),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(s, "exists" | "forall" | "true" | "false")
}

impl Leaves<FoFormula> for FoLeaves<'_> {
    fn quantifier(&mut self, p: &mut Parser) -> Result<Option<FoFormula>, FormulaError> {
        let universal = match p.peek() {
            Tok::Ident(s) if s == "exists" => false,
            Tok::Ident(s) if s == "forall" => true,
            _ => return Ok(None),
        };
        p.bump();
        let var = match p.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                p.bump();
                s
            }
            _ => return Err(p.error(&["a variable name"]).into()),
        };
        p.expect(Tok::Dot, "'.'")?;
        let body = p.formula(self)?;
        Ok(Some(if universal {
            FoFormula::forall(var, body)
        } else {
            FoFormula::exists(var, body)
        }))
    }

    fn atom(&mut self, p: &mut Parser) -> Result<FoFormula, FormulaError> {
        let is_relation = matches!(
            (p.peek(), p.toks.get(p.pos + 1).map(|t| &t.0)),
            (Tok::Ident(s), Some(Tok::LParen)) if !is_keyword(s)
        );
        if is_relation {
            let Tok::Ident(rel) = p.bump() else { unreachable!() };
            p.bump();
            let mut args = vec![self.term(p)?];
            while *p.peek() == Tok::Comma {
                p.bump();
                args.push(self.term(p)?);
            }
            p.expect(Tok::RParen, "')'")?;
            return match self.sig.arity(&rel) {
                None => Err(FormulaError::UnknownRelation(rel)),
                Some(a) if a != args.len() => Err(FormulaError::ArityMismatch {
                    relation: rel,
                    expected: a,
                    found: args.len(),
                }),
                Some(_) => Ok(FoFormula::Atom(rel, args)),
            };
        }
        let lhs = self
            .term(p)
            .map_err(|_| p.error(&["an atom", "a quantifier", "'('", "a unary operator"]))?;
        p.expect(Tok::Equals, "'='")?;
        let rhs = self.term(p)?;
        Ok(FoFormula::Eq(lhs, rhs))
    }
}

/// Parses a propositional modal formula.
pub fn parse_prop(text: &str) -> Result<PropFormula, FormulaError> {
    let mut p = Parser::new(text)?;
    let f = p.formula(&mut PropLeaves)?;
    p.finish()?;
    Ok(f)
}

/// Parses a first-order modal formula over `sig`. Open formulas are accepted.
pub fn parse_fo(text: &str, sig: &Signature) -> Result<FoFormula, FormulaError> {
    let mut p = Parser::new(text)?;
    let f = p.formula(&mut FoLeaves { sig })?;
    p.finish()?;
    Ok(f)
}
