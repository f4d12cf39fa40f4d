use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{enumerate_formulas, Access, EnumerationLimits, Evaluator, PotentialistError, PotentialistSystem, Structure, WorldData};
use crate::formula::{substitute, FoFormula, FormulaError, PropFormula, Signature, Substitution};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CoherenceFailure {
    Disagreement { first: String, second: String, relation: String, tuple: Vec<String> },
    Unaccommodated { world: String, element: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceReport {
    pub coherent: bool,
    pub limit: Option<Structure>,
    pub witness: Option<CoherenceFailure>,
}

fn subset(a: &[u32], sys: &PotentialistSystem, b: usize) -> bool {
    a.iter().all(|&e| sys.in_domain(b, e))
}

fn union_world(sys: &PotentialistSystem) -> WorldData {
    let mut domain = BTreeSet::new();
    let mut relations = vec![BTreeSet::new(); sys.signature().relations.len()];
    for w in 0..sys.world_count() {
        domain.extend(sys.domain(w).iter().copied());
        for (r, set) in sys.world(w).rels.iter().enumerate() {
            relations[r].extend(set.iter().map(|t| t.to_vec()));
        }
    }
    WorldData {
        id: "limit".into(),
        domain: domain.into_iter().collect(),
        relations: relations.into_iter().map(|s| s.into_iter().collect()).collect(),
    }
}

/// Atomic agreement on shared elements, and every world extendable (by
/// domain inclusion) to any element of the union. The limit is the union.
pub fn coherence(sys: &PotentialistSystem) -> CoherenceReport {
    let n = sys.world_count();
    let name = |e: u32| sys.element_name(e).to_string();
    for a in 0..n {
        for b in 0..n {
            if a == b {
                continue;
            }
            for (r, sym) in sys.signature().relations.iter().enumerate() {
                let wb = sys.world(b);
                let bad = sys.world(a).rels[r].iter().find(|t| t.iter().all(|&e| wb.contains(e)) && !wb.rels[r].contains(*t));
                if let Some(t) = bad {
                    return CoherenceReport {
                        coherent: false,
                        limit: None,
                        witness: Some(CoherenceFailure::Disagreement {
                            first: sys.world_id(a).into(),
                            second: sys.world_id(b).into(),
                            relation: sym.name.clone(),
                            tuple: t.iter().map(|&e| name(e)).collect(),
                        }),
                    };
                }
            }
        }
    }
    if let Some(w) = unaccommodated(sys, |a, b| subset(sys.domain(a), sys, b)) {
        return CoherenceReport { coherent: false, limit: None, witness: Some(w) };
    }
    let limit = PotentialistSystem::new(sys.signature().clone(), sys.elements().to_vec(), vec![union_world(sys)], Access::Substructure)
        .map(|s| s.structure(0))
        .ok();
    CoherenceReport { coherent: true, limit, witness: None }
}

fn unaccommodated(sys: &PotentialistSystem, extends: impl Fn(usize, usize) -> bool) -> Option<CoherenceFailure> {
    let n = sys.world_count();
    let all: BTreeSet<u32> = (0..n).flat_map(|w| sys.domain(w).iter().copied()).collect();
    for w in 0..n {
        let ext: Vec<usize> = (0..n).filter(|&u| extends(w, u)).collect();
        for &e in &all {
            if !ext.iter().any(|&u| sys.in_domain(u, e)) {
                return Some(CoherenceFailure::Unaccommodated {
                    world: sys.world_id(w).into(),
                    element: sys.element_name(e).into(),
                });
            }
        }
    }
    None
}

/// For a nonmodal sentence ψ with parameters: the limit satisfies ψ iff every
/// world containing the parameters satisfies ψ^◇. Requires coherence, with
/// extensions taken along the system's own accessibility.
pub fn check_translation(sys: &PotentialistSystem, psi: &FoFormula) -> Result<bool, PotentialistError> {
    if psi.is_modal() {
        return Err(FormulaError::AlreadyModal.into());
    }
    let report = coherence(sys);
    if !report.coherent || unaccommodated(sys, |a, b| sys.frame().accesses(a, b)).is_some() {
        return Err(PotentialistError::Incoherent);
    }
    let limit = PotentialistSystem::new(sys.signature().clone(), sys.elements().to_vec(), vec![union_world(sys)], Access::Substructure)?;
    let mut lim = Evaluator::new(&limit);
    let mut ev = Evaluator::new(sys);
    translation_agrees(&mut lim, &mut ev, psi)
}

/// The per-sentence check behind [`check_translation`], for callers that
/// reuse evaluators over many sentences.
pub(crate) fn translation_agrees(
    limit: &mut Evaluator<'_>,
    ev: &mut Evaluator<'_>,
    psi: &FoFormula,
) -> Result<bool, PotentialistError> {
    let sys = ev.system();
    let truth = limit.holds(psi, 0)?;
    let translated = ev.compile(&psi.potentialist_translation()?)?;
    let params: Vec<u32> = psi
        .parameters()
        .iter()
        .map(|p| sys.element_index(p).ok_or_else(|| PotentialistError::UnknownElement(p.clone())))
        .collect::<Result<_, _>>()?;
    for w in 0..sys.world_count() {
        if params.iter().all(|&p| sys.in_domain(w, p)) && ev.eval(&translated, w, &[])? != truth {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive translation check over many sentences with shared caches;
/// returns the first sentence that fails, if any.
pub fn check_translation_all<'f>(
    sys: &PotentialistSystem,
    sentences: impl IntoIterator<Item = &'f FoFormula>,
) -> Result<Option<FoFormula>, PotentialistError> {
    let report = coherence(sys);
    if !report.coherent || unaccommodated(sys, |a, b| sys.frame().accesses(a, b)).is_some() {
        return Err(PotentialistError::Incoherent);
    }
    let limit = PotentialistSystem::new(sys.signature().clone(), sys.elements().to_vec(), vec![union_world(sys)], Access::Substructure)?;
    let mut lim = Evaluator::new(&limit);
    let mut ev = Evaluator::new(sys);
    for psi in sentences {
        if !translation_agrees(&mut lim, &mut ev, psi)? {
            return Ok(Some(psi.clone()));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
}

/// Evaluates the substitution instance φ(σ) at `w`; `Fails` certifies that φ
/// is not valid at `w`.
pub fn refute_validity(
    sys: &PotentialistSystem,
    w: usize,
    phi: &PropFormula,
    sigma: &Substitution,
) -> Result<Verdict, PotentialistError> {
    let instance = substitute(phi, sigma)?;
    let mut ev = Evaluator::new(sys);
    Ok(if ev.holds(&instance, w)? { Verdict::Holds } else { Verdict::Fails })
}

/// A propositional scheme, or the converse Barcan scheme □∀x ψ → ∀x □ψ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schema {
    Prop(PropFormula),
    ConverseBarcan,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeFailure {
    pub trial: usize,
    pub world: String,
    pub instance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeReport {
    pub trials: usize,
    pub instances: usize,
    pub failures: usize,
    /// The first few failures.
    pub witnesses: Vec<SchemeFailure>,
}

fn instantiate_free(f: &FoFormula, keep: Option<&str>, domain: &[u32], sys: &PotentialistSystem, rng: &mut ChaCha8Rng) -> Option<FoFormula> {
    let mut out = f.clone();
    for v in f.free_variables() {
        if Some(v.as_str()) == keep {
            continue;
        }
        let &e = domain.choose(rng)?;
        out = out.instantiate(&v, sys.element_name(e));
    }
    Some(out)
}

/// Tests the schema under `trials` random substitutions from `pool` at every
/// world. Open pool formulas get random parameters from the world's domain.
pub fn scheme_check(
    sys: &PotentialistSystem,
    schema: &Schema,
    pool: &[FoFormula],
    trials: usize,
    seed: u64,
) -> Result<SchemeReport, PotentialistError> {
    let mut ev = Evaluator::new(sys);
    let mut report = SchemeReport { trials, instances: 0, failures: 0, witnesses: Vec::new() };
    if pool.is_empty() {
        return Ok(report);
    }
    let vars: Vec<u32> = match schema {
        Schema::Prop(phi) => phi.variables().into_iter().collect(),
        Schema::ConverseBarcan => vec![],
    };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        for w in 0..sys.world_count() {
            let domain = sys.domain(w);
            let instance = match schema {
                Schema::Prop(phi) => {
                    let mut pairs = Vec::new();
                    for &i in &vars {
                        let f = loop {
                            let f = &pool[rng.gen_range(0..pool.len())];
                            if let Some(g) = instantiate_free(f, None, domain, sys, &mut rng) {
                                break g;
                            }
                        };
                        pairs.push((i, f));
                    }
                    substitute(phi, &Substitution::from_pairs(pairs)?)?
                }
                Schema::ConverseBarcan => {
                    let f = &pool[rng.gen_range(0..pool.len())];
                    let x = f.free_variables().into_iter().next().unwrap_or_else(|| "x".to_string());
                    let Some(g) = instantiate_free(f, Some(&x), domain, sys, &mut rng) else {
                        continue;
                    };
                    FoFormula::implies(
                        FoFormula::boxed(FoFormula::forall(x.clone(), g.clone())),
                        FoFormula::forall(x, FoFormula::boxed(g)),
                    )
                }
            };
            report.instances += 1;
            if !ev.holds(&instance, w)? {
                report.failures += 1;
                if report.witnesses.len() < 5 {
                    report.witnesses.push(SchemeFailure { trial, world: sys.world_id(w).into(), instance: instance.to_string() });
                }
            }
        }
    }
    Ok(report)
}

/// Small sentences and one-variable formulas over the signature, followed by
/// `extra`.
pub fn default_pool(sig: &Signature, extra: &[FoFormula]) -> Vec<FoFormula> {
    let limits = EnumerationLimits { max_scope: 2, max_connectives: 1, equality: true };
    let mut pool = enumerate_formulas(sig, 0, limits);
    pool.extend(enumerate_formulas(sig, 1, limits));
    pool.extend(extra.iter().cloned());
    pool
}
