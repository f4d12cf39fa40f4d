//! Potentialist systems: finite first-order structures under an inflationary
//! reflexive-transitive accessibility relation.

mod enumerate;
mod eval;
mod semantics;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{FormulaError, Signature};
use crate::kripke::Frame;

pub use enumerate::{enumerate_formulas, EnumerationLimits};
pub use eval::{eval_fo, Compiled, Evaluator};
pub use semantics::{
    check_translation, check_translation_all, coherence, default_pool, refute_validity, scheme_check, CoherenceFailure, CoherenceReport,
    Schema, SchemeFailure, SchemeReport, Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PotentialistError {
    #[error("world `{0}` does not access itself")]
    NotReflexive(String),
    #[error("access not transitive: `{0}` -> `{1}` -> `{2}`")]
    NotTransitive(String, String, String),
    #[error("domain shrinks from `{from}` to `{to}`: element `{element}` lost")]
    ShrinkingDomain { from: String, to: String, element: String },
    #[error("worlds `{from}` and `{to}` disagree on {relation}({tuple})")]
    AtomicDisagreement { from: String, to: String, relation: String, tuple: String },
    #[error("duplicate world id `{0}`")]
    DuplicateWorld(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("tuple {relation}({tuple}) in world `{world}` leaves its domain")]
    TupleOutsideDomain { world: String, relation: String, tuple: String },
    #[error("parameter #{param} is not in the domain of world `{world}`")]
    ParameterNotInDomain { param: String, world: String },
    #[error("free variable `{0}` has no value")]
    FreeVariable(String),
    #[error("system is not coherent")]
    Incoherent,
    #[error("system has no worlds")]
    Empty,
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("malformed system: {0}")]
    Format(String),
}

/// How accessibility is determined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Access {
    /// Exactly the substructure relation.
    Substructure,
    /// Given pairs of world indices; must already be reflexive and transitive.
    Pairs(Vec<(usize, usize)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Explicit,
    Substructure,
}

/// A world given by interned element indices. `relations[r]` holds the
/// tuples of the r-th relation of the signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorldData {
    pub id: String,
    pub domain: Vec<u32>,
    pub relations: Vec<Vec<Vec<u32>>>,
}

/// Text form of a world: element ids and tuples as strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub id: String,
    pub domain: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AccessSpec {
    Mode(String),
    Pairs(Vec<(String, String)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemFile {
    pub signature: Signature,
    pub worlds: Vec<Structure>,
    pub access: AccessSpec,
}

pub(crate) struct World {
    pub(crate) id: String,
    pub(crate) domain: Vec<u32>,
    member: Vec<u64>,
    pub(crate) rels: Vec<HashSet<Box<[u32]>>>,
    /// `index[r][pos]` maps the other arguments of a tuple to the values at `pos`.
    pub(crate) index: Vec<Vec<HashMap<Box<[u32]>, Vec<u32>>>>,
}

impl World {
    pub(crate) fn contains(&self, e: u32) -> bool {
        self.member.get(e as usize / 64).is_some_and(|w| (w >> (e % 64)) & 1 == 1)
    }
}

pub struct PotentialistSystem {
    signature: Signature,
    elements: Vec<String>,
    element_index: HashMap<String, u32>,
    worlds: Vec<World>,
    world_index: HashMap<String, usize>,
    frame: Frame,
    mode: Mode,
}

impl std::fmt::Debug for PotentialistSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialistSystem")
            .field("worlds", &self.worlds.iter().map(|w| &w.id).collect::<Vec<_>>())
            .field("elements", &self.elements.len())
            .field("mode", &self.mode)
            .finish()
    }
}

fn tuple_text(sys_elements: &[String], t: &[u32]) -> String {
    t.iter().map(|&e| sys_elements[e as usize].as_str()).collect::<Vec<_>>().join(", ")
}

impl PotentialistSystem {
    /// Validates and builds a system. Each violated clause has its own error.
    pub fn new(
        signature: Signature,
        elements: Vec<String>,
        worlds: Vec<WorldData>,
        access: Access,
    ) -> Result<Self, PotentialistError> {
        signature.validate()?;
        if worlds.is_empty() {
            return Err(PotentialistError::Empty);
        }
        let mut element_index = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            if element_index.insert(e.clone(), i as u32).is_some() {
                return Err(PotentialistError::Format(format!("duplicate element `{e}`")));
            }
        }
        let mut world_index = HashMap::new();
        let mut built = Vec::with_capacity(worlds.len());
        for (i, w) in worlds.into_iter().enumerate() {
            if world_index.insert(w.id.clone(), i).is_some() {
                return Err(PotentialistError::DuplicateWorld(w.id));
            }
            built.push(Self::build_world(&signature, &elements, w)?);
        }
        let n = built.len();
        let mut sys = PotentialistSystem {
            signature,
            elements,
            element_index,
            worlds: built,
            world_index,
            frame: Frame::new(n).map_err(|_| PotentialistError::Empty)?,
            mode: Mode::Explicit,
        };
        match access {
            Access::Substructure => {
                sys.mode = Mode::Substructure;
                for a in 0..n {
                    for b in 0..n {
                        let sub = sys.inflation_error(a, b).is_none();
                        sys.frame.set(a, b, sub);
                    }
                }
            }
            Access::Pairs(pairs) => {
                for (a, b) in pairs {
                    if a >= n || b >= n {
                        return Err(PotentialistError::UnknownWorld(a.max(b).to_string()));
                    }
                    sys.frame.set(a, b, true);
                }
                sys.check_access()?;
            }
        }
        Ok(sys)
    }

    fn build_world(sig: &Signature, elements: &[String], w: WorldData) -> Result<World, PotentialistError> {
        let mut domain = w.domain;
        domain.sort_unstable();
        domain.dedup();
        if let Some(&bad) = domain.iter().find(|&&e| e as usize >= elements.len()) {
            return Err(PotentialistError::UnknownElement(bad.to_string()));
        }
        let mut member = vec![0u64; elements.len().div_ceil(64)];
        for &e in &domain {
            member[e as usize / 64] |= 1 << (e % 64);
        }
        if w.relations.len() > sig.relations.len() {
            return Err(PotentialistError::Format(format!("world `{}` has too many relations", w.id)));
        }
        let mut rels = Vec::new();
        let mut index = Vec::new();
        for (r, sym) in sig.relations.iter().enumerate() {
            let tuples = w.relations.get(r).cloned().unwrap_or_default();
            let mut set = HashSet::with_capacity(tuples.len());
            let mut idx: Vec<HashMap<Box<[u32]>, Vec<u32>>> = vec![HashMap::new(); sym.arity];
            for t in tuples {
                if t.len() != sym.arity {
                    return Err(FormulaError::ArityMismatch {
                        relation: sym.name.clone(),
                        expected: sym.arity,
                        found: t.len(),
                    }
                    .into());
                }
                let inside = t.iter().all(|&e| (e as usize) < elements.len() && (member[e as usize / 64] >> (e % 64)) & 1 == 1);
                if !inside {
                    let text = t
                        .iter()
                        .map(|&e| elements.get(e as usize).cloned().unwrap_or_else(|| e.to_string()))
                        .collect::<Vec<_>>()
                        .join(", ");
                    return Err(PotentialistError::TupleOutsideDomain { world: w.id, relation: sym.name.clone(), tuple: text });
                }
                let t: Box<[u32]> = t.into();
                if set.contains(&t) {
                    continue;
                }
                for (pos, slot) in idx.iter_mut().enumerate() {
                    let key: Box<[u32]> = t.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &e)| e).collect();
                    slot.entry(key).or_default().push(t[pos]);
                }
                set.insert(t);
            }
            rels.push(set);
            index.push(idx);
        }
        Ok(World { id: w.id, domain, member, rels, index })
    }

    /// Why `b` is not an inflationary extension of `a`, if it is not.
    fn inflation_error(&self, a: usize, b: usize) -> Option<PotentialistError> {
        let (wa, wb) = (&self.worlds[a], &self.worlds[b]);
        if let Some(&e) = wa.domain.iter().find(|&&e| !wb.contains(e)) {
            return Some(PotentialistError::ShrinkingDomain {
                from: wa.id.clone(),
                to: wb.id.clone(),
                element: self.elements[e as usize].clone(),
            });
        }
        for (r, sym) in self.signature.relations.iter().enumerate() {
            let missing = wa.rels[r].iter().find(|t| !wb.rels[r].contains(*t));
            let extra = || wb.rels[r].iter().find(|t| t.iter().all(|&e| wa.contains(e)) && !wa.rels[r].contains(*t));
            if let Some(t) = missing.or_else(extra) {
                return Some(PotentialistError::AtomicDisagreement {
                    from: wa.id.clone(),
                    to: wb.id.clone(),
                    relation: sym.name.clone(),
                    tuple: tuple_text(&self.elements, t),
                });
            }
        }
        None
    }

    fn check_access(&self) -> Result<(), PotentialistError> {
        let n = self.worlds.len();
        for a in 0..n {
            if !self.frame.accesses(a, a) {
                return Err(PotentialistError::NotReflexive(self.worlds[a].id.clone()));
            }
        }
        for a in 0..n {
            for b in self.frame.successors(a) {
                for c in self.frame.successors(b) {
                    if !self.frame.accesses(a, c) {
                        return Err(PotentialistError::NotTransitive(
                            self.worlds[a].id.clone(),
                            self.worlds[b].id.clone(),
                            self.worlds[c].id.clone(),
                        ));
                    }
                }
            }
        }
        for a in 0..n {
            for b in self.frame.successors(a) {
                if let Some(e) = self.inflation_error(a, b) {
                    return Err(e);
                }
            }
        }
        Ok(())
    }

    pub fn from_structures(signature: Signature, worlds: Vec<Structure>, access: AccessSpec) -> Result<Self, PotentialistError> {
        signature.validate()?;
        let mut elements: Vec<String> = Vec::new();
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut intern = |s: &str, elements: &mut Vec<String>| -> u32 {
            *index.entry(s.to_string()).or_insert_with(|| {
                elements.push(s.to_string());
                elements.len() as u32 - 1
            })
        };
        let mut data = Vec::new();
        for w in &worlds {
            let domain: Vec<u32> = w.domain.iter().map(|e| intern(e, &mut elements)).collect();
            let mut relations = vec![Vec::new(); signature.relations.len()];
            for (name, tuples) in &w.relations {
                let r = signature.index_of(name).ok_or_else(|| FormulaError::UnknownRelation(name.clone()))?;
                for t in tuples {
                    relations[r].push(t.iter().map(|e| intern(e, &mut elements)).collect());
                }
            }
            data.push(WorldData { id: w.id.clone(), domain, relations });
        }
        let access = match access {
            AccessSpec::Mode(m) if m == "substructure" => Access::Substructure,
            AccessSpec::Mode(m) => return Err(PotentialistError::Format(format!("unknown access mode `{m}`"))),
            AccessSpec::Pairs(pairs) => {
                let pos = |id: &String| {
                    worlds.iter().position(|w| &w.id == id).ok_or_else(|| PotentialistError::UnknownWorld(id.clone()))
                };
                Access::Pairs(pairs.iter().map(|(a, b)| Ok((pos(a)?, pos(b)?))).collect::<Result<_, PotentialistError>>()?)
            }
        };
        PotentialistSystem::new(signature, elements, data, access)
    }

    pub fn from_file(file: SystemFile) -> Result<Self, PotentialistError> {
        Self::from_structures(file.signature, file.worlds, file.access)
    }

    pub fn to_file(&self) -> SystemFile {
        let worlds = (0..self.worlds.len()).map(|w| self.structure(w)).collect();
        let access = match self.mode {
            Mode::Substructure => AccessSpec::Mode("substructure".into()),
            Mode::Explicit => AccessSpec::Pairs(
                self.frame
                    .pairs()
                    .into_iter()
                    .map(|(a, b)| (self.worlds[a].id.clone(), self.worlds[b].id.clone()))
                    .collect(),
            ),
        };
        SystemFile { signature: self.signature.clone(), worlds, access }
    }

    pub fn structure(&self, w: usize) -> Structure {
        let world = &self.worlds[w];
        let name = |e: &u32| self.elements[*e as usize].clone();
        let mut relations = BTreeMap::new();
        for (r, sym) in self.signature.relations.iter().enumerate() {
            let mut tuples: Vec<Vec<u32>> = world.rels[r].iter().map(|t| t.to_vec()).collect();
            tuples.sort();
            relations.insert(sym.name.clone(), tuples.iter().map(|t| t.iter().map(name).collect()).collect());
        }
        Structure { id: world.id.clone(), domain: world.domain.iter().map(name).collect(), relations }
    }

    /// The same worlds restricted to those listed, with induced access.
    pub fn subsystem(&self, worlds: &[usize]) -> Result<Self, PotentialistError> {
        let data = worlds.iter().map(|&w| self.world_data(w)).collect();
        let mut pairs = Vec::new();
        for (i, &a) in worlds.iter().enumerate() {
            for (j, &b) in worlds.iter().enumerate() {
                if self.frame.accesses(a, b) {
                    pairs.push((i, j));
                }
            }
        }
        let access = match self.mode {
            Mode::Substructure => Access::Substructure,
            Mode::Explicit => Access::Pairs(pairs),
        };
        Self::new(self.signature.clone(), self.elements.clone(), data, access)
    }

    pub fn world_data(&self, w: usize) -> WorldData {
        let world = &self.worlds[w];
        WorldData {
            id: world.id.clone(),
            domain: world.domain.clone(),
            relations: world.rels.iter().map(|s| {
                let mut v: Vec<Vec<u32>> = s.iter().map(|t| t.to_vec()).collect();
                v.sort();
                v
            }).collect(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn world_id(&self, w: usize) -> &str {
        &self.worlds[w].id
    }

    pub fn world_index(&self, id: &str) -> Option<usize> {
        self.world_index.get(id).copied()
    }

    pub fn domain(&self, w: usize) -> &[u32] {
        &self.worlds[w].domain
    }

    pub fn in_domain(&self, w: usize, e: u32) -> bool {
        self.worlds[w].contains(e)
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element_name(&self, e: u32) -> &str {
        &self.elements[e as usize]
    }

    pub fn element_index(&self, name: &str) -> Option<u32> {
        self.element_index.get(name).copied()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn holds_atom(&self, w: usize, relation: usize, tuple: &[u32]) -> bool {
        self.worlds[w].rels[relation].contains(tuple)
    }

    pub(crate) fn world(&self, w: usize) -> &World {
        &self.worlds[w]
    }

    /// Worlds reachable from `w`, ascending.
    pub fn reachable(&self, w: usize) -> Vec<usize> {
        self.frame.successors(w).collect()
    }
}
