//! First-order modal formulas with parameters.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::FormulaError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
}

/// The relation symbols available to atomic formulas.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub relations: Vec<RelationSymbol>,
}

impl Signature {
    pub fn new(relations: impl IntoIterator<Item = (impl Into<String>, usize)>) -> Result<Self, FormulaError> {
        let mut sig = Signature::default();
        for (name, arity) in relations {
            let name = name.into();
            if arity == 0 {
                return Err(FormulaError::ZeroArity(name));
            }
            if sig.arity(&name).is_some() {
                return Err(FormulaError::DuplicateRelation(name));
            }
            sig.relations.push(RelationSymbol { name, arity });
        }
        Ok(sig)
    }

    /// The signature of set theory: one binary relation `mem`.
    pub fn membership() -> Self {
        Signature {
            relations: vec![RelationSymbol { name: "mem".into(), arity: 2 }],
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.relations.iter().find(|r| r.name == name).map(|r| r.arity)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn validate(&self) -> Result<(), FormulaError> {
        for (i, r) in self.relations.iter().enumerate() {
            if r.arity == 0 {
                return Err(FormulaError::ZeroArity(r.name.clone()));
            }
            if self.relations[..i].iter().any(|s| s.name == r.name) {
                return Err(FormulaError::DuplicateRelation(r.name.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// A named individual of the current world, written `#id`.
    Param(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Param(p) => write!(f, "#{p}"),
        }
    }
}

/// A formula of the first-order modal language.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FoFormula {
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Top,
    Bot,
    Not(Box<FoFormula>),
    And(Box<FoFormula>, Box<FoFormula>),
    Or(Box<FoFormula>, Box<FoFormula>),
    Implies(Box<FoFormula>, Box<FoFormula>),
    Iff(Box<FoFormula>, Box<FoFormula>),
    Exists(String, Box<FoFormula>),
    Forall(String, Box<FoFormula>),
    Diamond(Box<FoFormula>),
    Box(Box<FoFormula>),
}

use FoFormula as F;

impl FoFormula {
    pub fn atom(rel: impl Into<String>, args: Vec<Term>) -> Self {
        F::Atom(rel.into(), args)
    }

    /// Binary atom over two variable names.
    pub fn atom2(rel: &str, a: &str, b: &str) -> Self {
        F::Atom(rel.into(), vec![Term::Var(a.into()), Term::Var(b.into())])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Self) -> Self {
        F::Not(Box::new(p))
    }

    pub fn and(p: Self, q: Self) -> Self {
        F::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Self, q: Self) -> Self {
        F::Or(Box::new(p), Box::new(q))
    }

    pub fn implies(p: Self, q: Self) -> Self {
        F::Implies(Box::new(p), Box::new(q))
    }

    pub fn iff(p: Self, q: Self) -> Self {
        F::Iff(Box::new(p), Box::new(q))
    }

    pub fn exists(v: impl Into<String>, p: Self) -> Self {
        F::Exists(v.into(), Box::new(p))
    }

    pub fn forall(v: impl Into<String>, p: Self) -> Self {
        F::Forall(v.into(), Box::new(p))
    }

    pub fn diamond(p: Self) -> Self {
        F::Diamond(Box::new(p))
    }

    pub fn boxed(p: Self) -> Self {
        F::Box(Box::new(p))
    }

    /// Left-folded conjunction; empty is `Top`.
    pub fn conjunction(items: impl IntoIterator<Item = FoFormula>) -> Self {
        items.into_iter().reduce(Self::and).unwrap_or(F::Top)
    }

    /// Left-folded disjunction; empty is `Bot`.
    pub fn disjunction(items: impl IntoIterator<Item = FoFormula>) -> Self {
        items.into_iter().reduce(Self::or).unwrap_or(F::Bot)
    }

    pub fn children(&self) -> Vec<&FoFormula> {
        match self {
            F::Atom(..) | F::Eq(..) | F::Top | F::Bot => vec![],
            F::Not(p) | F::Diamond(p) | F::Box(p) | F::Exists(_, p) | F::Forall(_, p) => vec![p],
            F::And(p, q) | F::Or(p, q) | F::Implies(p, q) | F::Iff(p, q) => vec![p, q],
        }
    }

    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut visit_term = |t: &Term, bound: &Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
        };
        match self {
            F::Atom(_, args) => args.iter().for_each(|t| visit_term(t, bound)),
            F::Eq(a, b) => {
                visit_term(a, bound);
                visit_term(b, bound);
            }
            F::Exists(v, p) | F::Forall(v, p) => {
                bound.push(v.clone());
                p.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_variables().is_empty()
    }

    /// Parameter ids occurring anywhere in the formula.
    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        let terms: Vec<&Term> = match self {
            F::Atom(_, args) => args.iter().collect(),
            F::Eq(a, b) => vec![a, b],
            _ => vec![],
        };
        for t in terms {
            if let Term::Param(p) = t {
                out.insert(p.clone());
            }
        }
        for c in self.children() {
            c.collect_params(out);
        }
    }

    pub fn is_modal(&self) -> bool {
        matches!(self, F::Diamond(_) | F::Box(_)) || self.children().iter().any(|c| c.is_modal())
    }

    pub fn quantifier_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.quantifier_depth()).max().unwrap_or(0);
        match self {
            F::Exists(..) | F::Forall(..) => inner + 1,
            _ => inner,
        }
    }

    pub fn quantifier_count(&self) -> usize {
        let own = usize::from(matches!(self, F::Exists(..) | F::Forall(..)));
        own + self.children().iter().map(|c| c.quantifier_count()).sum::<usize>()
    }

    pub fn modal_count(&self) -> usize {
        let own = usize::from(matches!(self, F::Diamond(_) | F::Box(_)));
        own + self.children().iter().map(|c| c.modal_count()).sum::<usize>()
    }

    /// Checks relation names and arities against `sig`.
    pub fn check_signature(&self, sig: &Signature) -> Result<(), FormulaError> {
        if let F::Atom(rel, args) = self {
            match sig.arity(rel) {
                None => return Err(FormulaError::UnknownRelation(rel.clone())),
                Some(a) if a != args.len() => {
                    return Err(FormulaError::ArityMismatch {
                        relation: rel.clone(),
                        expected: a,
                        found: args.len(),
                    })
                }
                Some(_) => {}
            }
        }
        self.children().iter().try_for_each(|c| c.check_signature(sig))
    }

    /// Replaces every `exists x` by `<> exists x` and every `forall x` by
    /// `[] forall x`, leaving everything else untouched.
    pub fn potentialist_translation(&self) -> Result<FoFormula, FormulaError> {
        if self.is_modal() {
            return Err(FormulaError::AlreadyModal);
        }
        Ok(self.translate_unchecked())
    }

    fn translate_unchecked(&self) -> FoFormula {
        match self {
            F::Atom(..) | F::Eq(..) | F::Top | F::Bot => self.clone(),
            F::Not(p) => F::not(p.translate_unchecked()),
            F::And(p, q) => F::and(p.translate_unchecked(), q.translate_unchecked()),
            F::Or(p, q) => F::or(p.translate_unchecked(), q.translate_unchecked()),
            F::Implies(p, q) => F::implies(p.translate_unchecked(), q.translate_unchecked()),
            F::Iff(p, q) => F::iff(p.translate_unchecked(), q.translate_unchecked()),
            F::Exists(v, p) => F::diamond(F::exists(v.clone(), p.translate_unchecked())),
            F::Forall(v, p) => F::boxed(F::forall(v.clone(), p.translate_unchecked())),
            F::Diamond(_) | F::Box(_) => unreachable!("checked nonmodal"),
        }
    }

    /// Replaces free occurrences of variable `var` by the parameter `param`.
    pub fn instantiate(&self, var: &str, param: &str) -> FoFormula {
        let sub = |t: &Term| match t {
            Term::Var(v) if v == var => Term::Param(param.to_string()),
            other => other.clone(),
        };
        match self {
            F::Atom(r, args) => F::Atom(r.clone(), args.iter().map(sub).collect()),
            F::Eq(a, b) => F::Eq(sub(a), sub(b)),
            F::Top | F::Bot => self.clone(),
            F::Exists(v, _) | F::Forall(v, _) if v == var => self.clone(),
            F::Exists(v, p) => F::exists(v.clone(), p.instantiate(var, param)),
            F::Forall(v, p) => F::forall(v.clone(), p.instantiate(var, param)),
            F::Not(p) => F::not(p.instantiate(var, param)),
            F::Diamond(p) => F::diamond(p.instantiate(var, param)),
            F::Box(p) => F::boxed(p.instantiate(var, param)),
            F::And(p, q) => F::and(p.instantiate(var, param), q.instantiate(var, param)),
            F::Or(p, q) => F::or(p.instantiate(var, param), q.instantiate(var, param)),
            F::Implies(p, q) => F::implies(p.instantiate(var, param), q.instantiate(var, param)),
            F::Iff(p, q) => F::iff(p.instantiate(var, param), q.instantiate(var, param)),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            F::Exists(..) | F::Forall(..) => 0,
            F::Iff(..) => 1,
            F::Implies(..) => 2,
            F::Or(..) => 3,
            F::And(..) => 4,
            F::Not(_) | F::Diamond(_) | F::Box(_) => 5,
            F::Atom(..) | F::Eq(..) | F::Top | F::Bot => 6,
        }
    }

    /// True when the printed form ends in a bare quantifier scope, so any
    /// following binary operator would be swallowed by it.
    fn open_right(&self) -> bool {
        match self {
            F::Exists(..) | F::Forall(..) => true,
            F::Not(p) | F::Diamond(p) | F::Box(p) => p.open_right(),
            F::And(_, q) | F::Or(_, q) | F::Implies(_, q) | F::Iff(_, q) => {
                self.right_bare(q) && q.open_right()
            }
            _ => false,
        }
    }

    fn right_bare(&self, q: &FoFormula) -> bool {
        let prec = self.precedence();
        let right_assoc = matches!(self, F::Implies(..));
        matches!(q, F::Exists(..) | F::Forall(..))
            || q.precedence() > prec
            || (q.precedence() == prec && right_assoc)
    }

    fn left_bare(&self, p: &FoFormula) -> bool {
        let prec = self.precedence();
        let left_assoc = !matches!(self, F::Implies(..));
        !p.open_right() && (p.precedence() > prec || (p.precedence() == prec && left_assoc))
    }
}

impl fmt::Display for FoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            F::Atom(rel, args) => {
                write!(f, "{rel}(")?;
                for (i, t) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
            F::Eq(a, b) => write!(f, "{a} = {b}"),
            F::Top => f.write_str("true"),
            F::Bot => f.write_str("false"),
            F::Not(p) => unary(f, "~", p),
            F::Diamond(p) => unary(f, "<>", p),
            F::Box(p) => unary(f, "[]", p),
            F::Exists(v, p) => write!(f, "exists {v} . {p}"),
            F::Forall(v, p) => write!(f, "forall {v} . {p}"),
            F::And(p, q) => self.binary(f, "&", p, q),
            F::Or(p, q) => self.binary(f, "|", p, q),
            F::Implies(p, q) => self.binary(f, "->", p, q),
            F::Iff(p, q) => self.binary(f, "<->", p, q),
        }
    }
}

impl FoFormula {
    fn binary(&self, f: &mut fmt::Formatter<'_>, op: &str, p: &FoFormula, q: &FoFormula) -> fmt::Result {
        if self.left_bare(p) {
            write!(f, "{p}")?;
        } else {
            write!(f, "({p})")?;
        }
        write!(f, " {op} ")?;
        if self.right_bare(q) {
            write!(f, "{q}")
        } else {
            write!(f, "({q})")
        }
    }
}

fn unary(f: &mut fmt::Formatter<'_>, op: &str, p: &FoFormula) -> fmt::Result {
    if p.precedence() >= 5 || p.precedence() == 0 {
        write!(f, "{op} {p}")
    } else {
        write!(f, "{op} ({p})")
    }
}
