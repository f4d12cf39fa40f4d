//! Propositional modal formulas over indexed variables `p0, p1, ...`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

/// A propositional modal formula.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropFormula {
    Var(u32),
    Top,
    Bot,
    Not(Box<PropFormula>),
    And(Box<PropFormula>, Box<PropFormula>),
    Or(Box<PropFormula>, Box<PropFormula>),
    Implies(Box<PropFormula>, Box<PropFormula>),
    Iff(Box<PropFormula>, Box<PropFormula>),
    Diamond(Box<PropFormula>),
    Box(Box<PropFormula>),
}

use PropFormula as P;

impl PropFormula {
    pub fn var(i: u32) -> Self {
        P::Var(i)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(p: Self) -> Self {
        P::Not(Box::new(p))
    }

    pub fn and(p: Self, q: Self) -> Self {
        P::And(Box::new(p), Box::new(q))
    }

    pub fn or(p: Self, q: Self) -> Self {
        P::Or(Box::new(p), Box::new(q))
    }

    pub fn implies(p: Self, q: Self) -> Self {
        P::Implies(Box::new(p), Box::new(q))
    }

    pub fn iff(p: Self, q: Self) -> Self {
        P::Iff(Box::new(p), Box::new(q))
    }

    pub fn diamond(p: Self) -> Self {
        P::Diamond(Box::new(p))
    }

    pub fn boxed(p: Self) -> Self {
        P::Box(std::boxed::Box::new(p))
    }

    /// Immediate children, left to right.
    pub fn children(&self) -> Vec<&PropFormula> {
        match self {
            P::Var(_) | P::Top | P::Bot => vec![],
            P::Not(p) | P::Diamond(p) | P::Box(p) => vec![p],
            P::And(p, q) | P::Or(p, q) | P::Implies(p, q) | P::Iff(p, q) => vec![p, q],
        }
    }

    /// Variable indices occurring in the formula, ascending.
    pub fn variables(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        if let P::Var(i) = self {
            out.insert(*i);
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Number of nested modal operators on the deepest branch.
    pub fn modal_depth(&self) -> usize {
        let inner = self.children().iter().map(|c| c.modal_depth()).max().unwrap_or(0);
        match self {
            P::Diamond(_) | P::Box(_) => inner + 1,
            _ => inner,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// All distinct subformulas in postorder (children before parents, first
    /// occurrence wins). The formula itself is last.
    pub fn subformulas(&self) -> Vec<PropFormula> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        self.postorder(&mut seen, &mut out);
        out
    }

    fn postorder(&self, seen: &mut HashSet<PropFormula>, out: &mut Vec<PropFormula>) {
        for c in self.children() {
            c.postorder(seen, out);
        }
        if seen.insert(self.clone()) {
            out.push(self.clone());
        }
    }

    /// Conjunction of a list, folded to the left; empty list is `Top`.
    pub fn conjunction(items: impl IntoIterator<Item = PropFormula>) -> Self {
        items.into_iter().reduce(Self::and).unwrap_or(P::Top)
    }

    /// Disjunction of a list, folded to the left; empty list is `Bot`.
    pub fn disjunction(items: impl IntoIterator<Item = PropFormula>) -> Self {
        items.into_iter().reduce(Self::or).unwrap_or(P::Bot)
    }

    pub(crate) fn precedence(&self) -> u8 {
        match self {
            P::Iff(..) => 1,
            P::Implies(..) => 2,
            P::Or(..) => 3,
            P::And(..) => 4,
            P::Not(_) | P::Diamond(_) | P::Box(_) => 5,
            P::Var(_) | P::Top | P::Bot => 6,
        }
    }
}

impl fmt::Display for PropFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            P::Var(i) => write!(f, "p{i}"),
            P::Top => f.write_str("true"),
            P::Bot => f.write_str("false"),
            P::Not(p) => write_unary(f, "~", p),
            P::Diamond(p) => write_unary(f, "<>", p),
            P::Box(p) => write_unary(f, "[]", p),
            P::And(p, q) => write_binary(f, self.precedence(), "&", p, q, Assoc::Left),
            P::Or(p, q) => write_binary(f, self.precedence(), "|", p, q, Assoc::Left),
            P::Implies(p, q) => write_binary(f, self.precedence(), "->", p, q, Assoc::Right),
            P::Iff(p, q) => write_binary(f, self.precedence(), "<->", p, q, Assoc::Left),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Assoc {
    Left,
    Right,
}

fn write_unary(f: &mut fmt::Formatter<'_>, op: &str, p: &PropFormula) -> fmt::Result {
    if p.precedence() >= 5 {
        write!(f, "{op} {p}")
    } else {
        write!(f, "{op} ({p})")
    }
}

fn write_binary(
    f: &mut fmt::Formatter<'_>,
    prec: u8,
    op: &str,
    p: &PropFormula,
    q: &PropFormula,
    assoc: Assoc,
) -> fmt::Result {
    let left_bare = p.precedence() > prec || (p.precedence() == prec && assoc == Assoc::Left);
    let right_bare = q.precedence() > prec || (q.precedence() == prec && assoc == Assoc::Right);
    if left_bare {
        write!(f, "{p}")?;
    } else {
        write!(f, "({p})")?;
    }
    write!(f, " {op} ")?;
    if right_bare {
        write!(f, "{q}")
    } else {
        write!(f, "({q})")
    }
}
