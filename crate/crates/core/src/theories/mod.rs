//! S4, S4.2, S4.3 and S5: axioms, bounded decision by countermodel search
//! over each theory's frame class, and a small formula corpus.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{parse_prop, PropFormula};
use crate::kripke::{
    eval_prop, first_failure, frame_properties, generate_frame, preorders, sampled_preorders, Frame, FrameClass, KripkeError,
    KripkeModel,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoryError {
    #[error("unknown theory `{0}`")]
    UnknownTheory(String),
    #[error("unknown axiom `{0}`")]
    UnknownAxiom(String),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error("countermodel failed re-verification")]
    Unverified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Theory {
    S4,
    S42,
    S43,
    S5,
}

impl Theory {
    pub const ALL: [Theory; 4] = [Theory::S4, Theory::S42, Theory::S43, Theory::S5];

    pub fn name(self) -> &'static str {
        match self {
            Theory::S4 => "S4",
            Theory::S42 => "S4.2",
            Theory::S43 => "S4.3",
            Theory::S5 => "S5",
        }
    }

    /// Axiom names beyond K.
    pub fn axioms(self) -> &'static [&'static str] {
        match self {
            Theory::S4 => &["T", "4"],
            Theory::S42 => &["T", "4", ".2"],
            Theory::S43 => &["T", "4", ".3"],
            Theory::S5 => &["T", "4", "5"],
        }
    }

    /// Whether a frame belongs to the theory's class of finite frames.
    pub fn admits(self, f: &Frame) -> bool {
        let p = frame_properties(f);
        let base = p.reflexive && p.transitive;
        base && match self {
            Theory::S4 => true,
            Theory::S42 => p.convergent,
            Theory::S43 => p.linear_preorder,
            Theory::S5 => p.complete,
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theory {
    type Err = TheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S4" => Ok(Theory::S4),
            "S4.2" | "S42" => Ok(Theory::S42),
            "S4.3" | "S43" => Ok(Theory::S43),
            "S5" => Ok(Theory::S5),
            _ => Err(TheoryError::UnknownTheory(s.into())),
        }
    }
}

/// `K, T, 4, .2, .3, 5` over `p0, p1`; 5 in the form ◇□p → p.
pub fn axiom(name: &str) -> Result<PropFormula, TheoryError> {
    let text = match name {
        "K" => "[](p0 -> p1) -> ([]p0 -> []p1)",
        "T" => "[]p0 -> p0",
        "4" => "[]p0 -> [][]p0",
        ".2" => "<>[]p0 -> []<>p0",
        ".3" => "(<>p0 & <>p1) -> <>((p0 & <>p1) | (p1 & <>p0))",
        "5" => "<>[]p0 -> p0",
        _ => return Err(TheoryError::UnknownAxiom(name.into())),
    };
    Ok(parse_prop(text).expect("axiom text parses"))
}

/// ¬[no button pushed ∧ ◇(only p pushed) ∧ ◇(only q pushed) ∧ ◇(only r pushed)]
/// with buttons `p0, p1, p2`.
pub fn three_button_formula() -> PropFormula {
    let b = |i: u32| PropFormula::boxed(PropFormula::var(i));
    let only = |i: u32| PropFormula::conjunction((0..3).map(|j| if j == i { b(j) } else { PropFormula::not(b(j)) }));
    let none = PropFormula::conjunction((0..3).map(|j| PropFormula::not(b(j))));
    PropFormula::not(PropFormula::conjunction([none, PropFormula::diamond(only(0)), PropFormula::diamond(only(1)), PropFormula::diamond(only(2))]))
}

/// A model refuting a formula at a world, with the frame shape it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Countermodel {
    pub model: KripkeModel,
    pub world: usize,
    /// `None` for a general preorder.
    pub class: Option<FrameClass>,
    pub tag: String,
}

/// Canonical frames of the theory with exactly `n` worlds, in search order.
pub fn frames_of_size(theory: Theory, n: usize) -> Vec<(Option<FrameClass>, String, Frame)> {
    let canonical = |classes: Vec<FrameClass>| {
        classes
            .into_iter()
            .map(|c| (Some(c), c.tag(), generate_frame(c).expect("nonzero shape")))
            .collect::<Vec<_>>()
    };
    match theory {
        Theory::S5 => canonical(vec![FrameClass::Complete(n)]),
        Theory::S43 => canonical((1..=n).filter(|c| n.is_multiple_of(*c)).map(|c| FrameClass::Linear { clusters: c, size: n / c }).collect()),
        Theory::S42 => canonical(
            (0..usize::BITS as usize)
                .take_while(|&a| 1usize << a <= n)
                .filter(|&a| n.is_multiple_of(1 << a))
                .map(|a| FrameClass::PreBoolean { atoms: a, size: n >> a })
                .collect(),
        ),
        Theory::S4 => {
            let frames = if n <= 5 { preorders(n) } else { sampled_preorders(n, 64, n as u64) };
            frames.into_iter().enumerate().map(|(i, f)| (None, format!("preorder({n})#{i}"), f)).collect()
        }
    }
}

/// The first countermodel in search order: by world count, then by the
/// shape parameters (clusters or atoms, then cluster size).
pub fn find_countermodel(phi: &PropFormula, theory: Theory, max_worlds: usize) -> Result<Option<Countermodel>, TheoryError> {
    for n in 1..=max_worlds {
        for (class, tag, frame) in frames_of_size(theory, n) {
            if let Some(fail) = first_failure(&frame, phi)? {
                let cm = Countermodel { model: fail.model, world: fail.world, class, tag };
                if !reverify(phi, theory, &cm)? {
                    return Err(TheoryError::Unverified);
                }
                return Ok(Some(cm));
            }
        }
    }
    Ok(None)
}

/// Recomputes the countermodel's falsity with the direct evaluator and
/// checks the frame against the theory's class.
pub fn reverify(phi: &PropFormula, theory: Theory, cm: &Countermodel) -> Result<bool, TheoryError> {
    Ok(theory.admits(&cm.model.frame) && !eval_prop(&cm.model, cm.world, phi)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    /// No countermodel with at most `bound` worlds.
    Theorem { bound: usize },
    Nontheorem(Countermodel),
}

impl Decision {
    pub fn is_theorem(&self) -> bool {
        matches!(self, Decision::Theorem { .. })
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Theorem { bound } => write!(f, "THEOREM(bound={bound})"),
            Decision::Nontheorem(cm) => write!(f, "NONTHEOREM worlds={} class={}", cm.model.len(), cm.tag),
        }
    }
}

pub fn decide(phi: &PropFormula, theory: Theory, bound: usize) -> Result<Decision, TheoryError> {
    Ok(match find_countermodel(phi, theory, bound)? {
        Some(cm) => Decision::Nontheorem(cm),
        None => Decision::Theorem { bound },
    })
}

/// The decision in each theory, weakest first.
pub fn classify(phi: &PropFormula, bound: usize) -> Result<Vec<(Theory, Decision)>, TheoryError> {
    Theory::ALL.iter().map(|&t| Ok((t, decide(phi, t, bound)?))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub formula: PropFormula,
    /// Expected theoremhood in S4, S4.2, S4.3, S5.
    pub expected: [bool; 4],
}

impl CorpusEntry {
    pub fn expected_in(&self, t: Theory) -> bool {
        self.expected[Theory::ALL.iter().position(|&u| u == t).unwrap()]
    }
}

pub fn corpus() -> Vec<CorpusEntry> {
    let entry = |name, text: &str, expected| CorpusEntry { name, formula: parse_prop(text).expect("corpus parses"), expected };
    let mut out = vec![];
    for (name, expected) in [
        ("K", [true; 4]),
        ("T", [true; 4]),
        ("4", [true; 4]),
        (".2", [false, true, true, true]),
        (".3", [false, false, true, true]),
        ("5", [false, false, false, true]),
    ] {
        out.push(CorpusEntry { name, formula: axiom(name).unwrap(), expected });
    }
    out.extend([
        entry("D", "[]p0 -> <>p0", [true; 4]),
        entry("T-dual", "p0 -> <>p0", [true; 4]),
        entry("4-dual", "<><>p0 -> <>p0", [true; 4]),
        entry("B", "p0 -> []<>p0", [false, false, false, true]),
        entry("5-dual", "<>p0 -> []<>p0", [false, false, false, true]),
        entry("5-box", "<>[]p0 -> []p0", [false, false, false, true]),
        entry(".3-box", "[]([]p0 -> p1) | []([]p1 -> p0)", [false, false, true, true]),
        entry(".1", "[]<>p0 -> <>[]p0", [false; 4]),
        entry("atom", "p0", [false; 4]),
        entry("box-excluded-middle", "[]p0 | ~[]p0", [true; 4]),
    ]);
    out.push(CorpusEntry { name: "three-button", formula: three_button_formula(), expected: [false, false, true, true] });
    out
}
