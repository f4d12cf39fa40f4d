//! From a finite countermodel and verified control families to a
//! substitution instance that fails in a potentialist system.

mod shape;

use serde::Serialize;
use thiserror::Error;

use crate::control::{pattern_labels, shrink_dial, volume_exactly, Checker, Companion, ControlCertificate, ControlError, ControlKind, Rounds};
use crate::formula::{substitute, FoFormula, FormulaError, PropFormula, Substitution};
use crate::kripke::{eval_prop, FrameClass, KripkeError};
use crate::potentialist::{refute_validity, Evaluator, PotentialistError, PotentialistSystem, Verdict};
use crate::theories::{Theory, TheoryError};

pub use crate::theories::{find_countermodel, Countermodel};
pub use shape::{permute_bottom, rooted, uniformize};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("certificate has not been verified")]
    Unverified,
    #[error("{theory} needs a {expected} certificate, got {got}")]
    WrongCertificate { theory: Theory, expected: &'static str, got: &'static str },
    #[error("countermodel shape `{0}` has no simulation")]
    UnsupportedShape(String),
    #[error("need {needed} {what}, certificate has {have}")]
    TooFewControls { what: &'static str, needed: usize, have: usize },
    #[error("button {0} is not pure; purify it first")]
    NotPure(usize),
    #[error("a button is already pushed at the base")]
    BasePushed,
    #[error("the base world satisfies {0} companion labels, expected one")]
    BaseSetting(usize),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    System(#[from] PotentialistError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// A shaped countermodel with one label sentence per world and the induced
/// substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simulation {
    pub countermodel: Countermodel,
    pub labels: Vec<FoFormula>,
    pub sigma: Substitution,
}

/// Conjunction that drops ⊤ conjuncts.
fn conj(items: impl IntoIterator<Item = FoFormula>) -> FoFormula {
    FoFormula::conjunction(items.into_iter().filter(|f| *f != FoFormula::Top))
}

fn sigma_of(cm: &Countermodel, labels: &[FoFormula], vars: impl IntoIterator<Item = u32>) -> Result<Substitution, SynthesisError> {
    let pairs = vars.into_iter().map(|p| {
        let on = (0..cm.model.len()).filter(|&w| cm.model.holds(w, p)).map(|w| labels[w].clone());
        (p, FoFormula::disjunction(on))
    });
    Ok(Substitution::from_pairs(pairs)?)
}

/// The index of the single label true at `w`.
fn setting_at(ev: &mut Evaluator<'_>, w: usize, labels: &[FoFormula]) -> Result<usize, SynthesisError> {
    let mut on = vec![];
    for (j, l) in labels.iter().enumerate() {
        if ev.holds(l, w)? {
            on.push(j);
        }
    }
    match on[..] {
        [j] => Ok(j),
        _ => Err(SynthesisError::BaseSetting(on.len())),
    }
}

/// Labels for `needed` settings from a companion: a shrunk dial, or the
/// pattern sentences of the first `⌈log2 needed⌉` switches.
fn companion_labels(c: &Companion, needed: usize) -> Result<Vec<FoFormula>, SynthesisError> {
    match c {
        Companion::Dial(d) => {
            if d.len() < needed {
                return Err(SynthesisError::TooFewControls { what: "dial values", needed, have: d.len() });
            }
            Ok(shrink_dial(d, needed)?)
        }
        Companion::Switches(s) => {
            let m = needed.next_power_of_two().trailing_zeros() as usize;
            if s.len() < m {
                return Err(SynthesisError::TooFewControls { what: "switches", needed: m, have: s.len() });
            }
            Ok(pattern_labels(&s[..m]))
        }
    }
}

fn cluster_size(cm: &Countermodel) -> usize {
    match cm.class {
        Some(FrameClass::Complete(k)) => k,
        Some(FrameClass::Linear { size, .. } | FrameClass::PreBoolean { size, .. }) => size,
        None => 0,
    }
}

/// Roots, pads clusters to the label count and moves the failing world to
/// the base's setting.
fn shape(cm: &Countermodel, labels: usize, base_setting: usize) -> Result<Countermodel, SynthesisError> {
    let cm = uniformize(&rooted(cm)?, labels)?;
    Ok(permute_bottom(&cm, base_setting))
}

/// S5: complete frames simulated by switches (pattern sentences) or a dial.
pub fn simulate_s5(
    sys: &PotentialistSystem,
    base: usize,
    controls: &Companion,
    cm: &Countermodel,
    phi: &PropFormula,
) -> Result<Simulation, SynthesisError> {
    let k = cluster_size(&rooted(cm)?);
    let labels = companion_labels(controls, k)?;
    let mut ev = Evaluator::new(sys);
    let at_base = setting_at(&mut ev, base, &labels)?;
    let shaped = shape(cm, labels.len(), at_base)?;
    let sigma = sigma_of(&shaped, &labels, phi.variables())?;
    Ok(Simulation { countermodel: shaped, labels, sigma })
}

/// S4.3: a chain of clusters simulated by a ratchet (volume) and its
/// companion (position within the cluster).
pub fn simulate_s43(
    sys: &PotentialistSystem,
    base: usize,
    ratchet: &[FoFormula],
    companion: &Companion,
    cm: &Countermodel,
    phi: &PropFormula,
) -> Result<Simulation, SynthesisError> {
    let root = rooted(cm)?;
    let Some(FrameClass::Linear { clusters, size }) = root.class else {
        return Err(SynthesisError::UnsupportedShape(cm.tag.clone()));
    };
    if clusters - 1 > ratchet.len() {
        return Err(SynthesisError::TooFewControls { what: "ratchet sentences", needed: clusters - 1, have: ratchet.len() });
    }
    let r = &ratchet[..clusters - 1];
    let settings = companion_labels(companion, size)?;
    let mut ev = Evaluator::new(sys);
    let at_base = setting_at(&mut ev, base, &settings)?;
    let shaped = shape(cm, settings.len(), at_base)?;
    let m = settings.len();
    let labels = (0..shaped.model.len()).map(|w| conj([volume_exactly(r, w / m), settings[w % m].clone()])).collect::<Vec<_>>();
    let sigma = sigma_of(&shaped, &labels, phi.variables())?;
    Ok(Simulation { countermodel: shaped, labels, sigma })
}

/// S4.2: a pre-Boolean algebra of clusters simulated by pure buttons (which
/// atoms are pushed) and a companion.
pub fn simulate_s42(
    sys: &PotentialistSystem,
    base: usize,
    buttons: &[FoFormula],
    companion: &Companion,
    cm: &Countermodel,
    phi: &PropFormula,
) -> Result<Simulation, SynthesisError> {
    let root = rooted(cm)?;
    let Some(FrameClass::PreBoolean { atoms, size }) = root.class else {
        return Err(SynthesisError::UnsupportedShape(cm.tag.clone()));
    };
    if atoms > buttons.len() {
        return Err(SynthesisError::TooFewControls { what: "buttons", needed: atoms, have: buttons.len() });
    }
    let b = &buttons[..atoms];
    let mut checker = Checker::new(sys, Rounds::default());
    for (i, bi) in b.iter().enumerate() {
        if !checker.verify_pure_button(base, bi)? {
            return Err(SynthesisError::NotPure(i));
        }
        if checker.pushed(base, bi)? {
            return Err(SynthesisError::BasePushed);
        }
    }
    let settings = companion_labels(companion, size)?;
    let at_base = setting_at(checker.evaluator(), base, &settings)?;
    let shaped = shape(cm, settings.len(), at_base)?;
    let m = settings.len();
    let labels = (0..shaped.model.len())
        .map(|w| {
            let set = w / m;
            let lits = (0..atoms).map(|i| if set >> i & 1 == 1 { b[i].clone() } else { FoFormula::not(b[i].clone()) });
            conj(lits.chain([settings[w % m].clone()]))
        })
        .collect::<Vec<_>>();
    let sigma = sigma_of(&shaped, &labels, phi.variables())?;
    Ok(Simulation { countermodel: shaped, labels, sigma })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub world: String,
    pub subformula: String,
    pub system: bool,
    pub model: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BisimulationReport {
    /// Every subformula agrees at every reachable world.
    pub holds: bool,
    /// Agreement where the truth of φ at the base depends on it: subformulas
    /// under a modality at every reachable world, the rest at the base.
    pub holds_where_needed: bool,
    pub checked: usize,
    pub mismatch: Option<Mismatch>,
}

fn under_modality(phi: &PropFormula) -> Vec<PropFormula> {
    fn walk(p: &PropFormula, inside: bool, out: &mut Vec<PropFormula>) {
        if inside && !out.contains(p) {
            out.push(p.clone());
        }
        let deeper = inside || matches!(p, PropFormula::Box(_) | PropFormula::Diamond(_));
        for c in p.children() {
            walk(c, deeper, out);
        }
    }
    let mut out = vec![];
    walk(phi, false, &mut out);
    out
}

/// Maps each world reachable from `base` to the unique model world whose
/// label it satisfies, and compares every subformula χ of φ: `U ⊨ χ(σ)` iff
/// `M, f(U) ⊨ χ`.
pub fn verify_bisimulation(sys: &PotentialistSystem, base: usize, sim: &Simulation, phi: &PropFormula) -> Result<BisimulationReport, SynthesisError> {
    let mut ev = Evaluator::new(sys);
    let cone = sys.reachable(base);
    let mut image = Vec::with_capacity(cone.len());
    for &u in &cone {
        let mut hits = vec![];
        for (w, l) in sim.labels.iter().enumerate() {
            if ev.holds(l, u)? {
                hits.push(w);
            }
        }
        if hits.len() != 1 {
            let mismatch = Mismatch { world: sys.world_id(u).into(), subformula: format!("{} labels hold", hits.len()), system: true, model: false };
            return Ok(BisimulationReport { holds: false, holds_where_needed: false, checked: 0, mismatch: Some(mismatch) });
        }
        image.push(hits[0]);
    }
    let needed_everywhere = under_modality(phi);
    let m = &sim.countermodel.model;
    let mut report = BisimulationReport { holds: true, holds_where_needed: true, checked: 0, mismatch: None };
    for chi in phi.subformulas() {
        let compiled = ev.compile(&substitute(&chi, &sim.sigma)?)?;
        for (&u, &w) in cone.iter().zip(&image) {
            let here = ev.eval(&compiled, u, &[])?;
            let there = eval_prop(m, w, &chi)?;
            report.checked += 1;
            if here != there {
                report.holds = false;
                if u == base || needed_everywhere.contains(&chi) {
                    report.holds_where_needed = false;
                }
                if report.mismatch.is_none() {
                    report.mismatch = Some(Mismatch { world: sys.world_id(u).into(), subformula: chi.to_string(), system: here, model: there });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisReport {
    pub theory: Theory,
    pub base: usize,
    pub simulation: Simulation,
    pub instance: FoFormula,
    pub bisimulation: BisimulationReport,
    pub refutation: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SynthesisOutcome {
    /// φ has no countermodel in the class within the bound.
    NoCountermodel { bound: usize },
    Refuted(Box<SynthesisReport>),
}

fn expected_kind(theory: Theory) -> &'static str {
    match theory {
        Theory::S5 => "switches or dial",
        Theory::S43 => "ratchet",
        Theory::S42 => "buttons",
        Theory::S4 => "(none)",
    }
}

/// Finds a countermodel of φ in the theory's class, simulates it with the
/// certificate's controls at its base, and checks the resulting instance.
pub fn synthesize(
    sys: &PotentialistSystem,
    cert: &ControlCertificate,
    phi: &PropFormula,
    theory: Theory,
    max_worlds: usize,
) -> Result<SynthesisOutcome, SynthesisError> {
    if !cert.is_verified() {
        return Err(SynthesisError::Unverified);
    }
    let wrong = || SynthesisError::WrongCertificate { theory, expected: expected_kind(theory), got: cert.kind.name() };
    let Some(cm) = find_countermodel(phi, theory, max_worlds)? else {
        return Ok(SynthesisOutcome::NoCountermodel { bound: max_worlds });
    };
    let base = cert.base;
    let simulation = match (&cert.kind, theory) {
        (ControlKind::Switches(s), Theory::S5) => simulate_s5(sys, base, &Companion::Switches(s.clone()), &cm, phi)?,
        (ControlKind::Dial(d), Theory::S5) => simulate_s5(sys, base, &Companion::Dial(d.clone()), &cm, phi)?,
        (ControlKind::Ratchet { ratchet, companion }, Theory::S43) => simulate_s43(sys, base, ratchet, companion, &cm, phi)?,
        (ControlKind::Buttons { buttons, companion }, Theory::S42) => simulate_s42(sys, base, buttons, companion, &cm, phi)?,
        _ => return Err(wrong()),
    };
    let bisimulation = verify_bisimulation(sys, base, &simulation, phi)?;
    let refutation = refute_validity(sys, base, phi, &simulation.sigma)?;
    let instance = substitute(phi, &simulation.sigma)?;
    Ok(SynthesisOutcome::Refuted(Box::new(SynthesisReport { theory, base, simulation, instance, bisimulation, refutation })))
}
