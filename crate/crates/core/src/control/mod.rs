//! Switches, dials, buttons and ratchets: verification by exhaustion over the
//! worlds reachable from a base world, and the conversions between them.
//!
//! Safety clauses (exactly-one, implications, ◇□b, purity) are checked at
//! every reachable world. Steering clauses ("from every reachable world some
//! accessible world realizes X") cannot hold at maximal worlds of a finite
//! system, so they are checked through approximants: `D_0` is the cone of the
//! base, `D_{k+1}` the worlds of the cone all of whose demands have a target
//! in `D_k`; a family verifies with [`Rounds::Bounded(k)`] iff the base lies
//! in `D_k`. [`Rounds::Unbounded`] asks for the greatest fixpoint.

mod convert;
mod file;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{FoFormula, FormulaError};
use crate::potentialist::{Compiled, Evaluator, PotentialistError, PotentialistSystem};

pub use convert::{
    dial_to_switches, long_ratchet_extract, pattern_label, pattern_labels, purify, shrink_dial, switch_family_from_dial,
    switches_to_dial, volume_exactly, Extracted,
};
pub use file::{CertificateFile, CompanionFile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ControlError {
    #[error(transparent)]
    System(#[from] PotentialistError),
    #[error("certificate has not been verified")]
    Unverified,
    #[error("expected a {expected} certificate")]
    WrongKind { expected: &'static str },
    #[error("need 2^{m} <= {n} dial values")]
    Bound { m: usize, n: usize },
    #[error("family must be nonempty")]
    Empty,
    #[error("certificate refers to unknown world `{0}`")]
    UnknownWorld(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// How deep steering clauses are checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounds {
    Bounded(u32),
    Unbounded,
}

impl Default for Rounds {
    fn default() -> Self {
        Rounds::Bounded(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Companion {
    Dial(Vec<FoFormula>),
    Switches(Vec<FoFormula>),
}

impl Companion {
    /// Number of distinct settings.
    pub fn settings(&self) -> usize {
        match self {
            Companion::Dial(d) => d.len(),
            Companion::Switches(s) => 1 << s.len(),
        }
    }

    /// One sentence per setting, true exactly where that setting holds.
    pub fn labels(&self) -> Vec<FoFormula> {
        match self {
            Companion::Dial(d) => d.clone(),
            Companion::Switches(s) => pattern_labels(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ControlKind {
    Switches(Vec<FoFormula>),
    Dial(Vec<FoFormula>),
    Buttons { buttons: Vec<FoFormula>, companion: Companion },
    Ratchet { ratchet: Vec<FoFormula>, companion: Companion },
    /// `r_0 .. r_L`, with `r_0` true everywhere.
    LongRatchet(Vec<FoFormula>),
}

impl ControlKind {
    pub fn name(&self) -> &'static str {
        match self {
            ControlKind::Switches(_) => "switches",
            ControlKind::Dial(_) => "dial",
            ControlKind::Buttons { .. } => "buttons",
            ControlKind::Ratchet { .. } => "ratchet",
            ControlKind::LongRatchet(_) => "long_ratchet",
        }
    }
}

/// A control family attached to a base world. The verified flag is only set
/// by [`ControlCertificate::verify`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ControlCertificate {
    pub kind: ControlKind,
    pub base: usize,
    verified: Option<Rounds>,
}

impl ControlCertificate {
    pub fn new(kind: ControlKind, base: usize) -> Self {
        ControlCertificate { kind, base, verified: None }
    }

    pub fn is_verified(&self) -> bool {
        self.verified.is_some()
    }

    pub fn verified_rounds(&self) -> Option<Rounds> {
        self.verified
    }

    /// Runs the verifier for this kind; sets the flag on success.
    pub fn verify(&mut self, sys: &PotentialistSystem, rounds: Rounds) -> Result<bool, ControlError> {
        let mut c = Checker::new(sys, rounds);
        let ok = c.verify_kind(self.base, &self.kind)?;
        self.verified = ok.then_some(rounds);
        Ok(ok)
    }
}

/// A compiled sentence's truth at every world of the system (false outside
/// the evaluated cone).
#[derive(Clone, Debug)]
struct Table(Vec<bool>);

/// Verifier with a shared evaluator, so repeated checks reuse cached truth.
pub struct Checker<'a> {
    ev: Evaluator<'a>,
    rounds: Rounds,
}

impl<'a> Checker<'a> {
    pub fn new(sys: &'a PotentialistSystem, rounds: Rounds) -> Self {
        Checker { ev: Evaluator::new(sys), rounds }
    }

    pub fn system(&self) -> &'a PotentialistSystem {
        self.ev.system()
    }

    pub fn rounds(&self) -> Rounds {
        self.rounds
    }

    pub fn evaluator(&mut self) -> &mut Evaluator<'a> {
        &mut self.ev
    }

    fn cone(&self, base: usize) -> Vec<usize> {
        self.system().reachable(base)
    }

    fn table(&mut self, base: usize, f: &FoFormula) -> Result<Table, ControlError> {
        let c: Compiled = self.ev.compile(f)?;
        let mut t = vec![false; self.system().world_count()];
        for u in self.cone(base) {
            t[u] = self.ev.eval(&c, u, &[])?;
        }
        Ok(Table(t))
    }

    fn tables(&mut self, base: usize, fs: &[FoFormula]) -> Result<Vec<Table>, ControlError> {
        fs.iter().map(|f| self.table(base, f)).collect()
    }

    /// `□f` at each world of the cone.
    fn boxed(&self, base: usize, t: &Table) -> Table {
        let sys = self.system();
        let mut out = vec![false; sys.world_count()];
        for u in self.cone(base) {
            out[u] = sys.frame().successors(u).all(|v| t.0[v]);
        }
        Table(out)
    }

    /// Whether the base survives `rounds` rounds of pruning by the demands.
    fn steered<'d>(&self, base: usize, demands: &'d dyn Fn(usize) -> Vec<Box<dyn Fn(usize) -> bool + 'd>>) -> bool {
        let sys = self.system();
        let cone = self.cone(base);
        let mut inside = vec![false; sys.world_count()];
        for &u in &cone {
            inside[u] = true;
        }
        let demand_lists: Vec<(usize, Vec<Box<dyn Fn(usize) -> bool + 'd>>)> = cone.iter().map(|&u| (u, demands(u))).collect();
        let limit = match self.rounds {
            Rounds::Bounded(k) => k as usize,
            Rounds::Unbounded => usize::MAX,
        };
        let mut d = inside;
        for _ in 0..limit {
            let mut next = vec![false; sys.world_count()];
            for (u, list) in &demand_lists {
                next[*u] = d[*u] && list.iter().all(|pred| sys.frame().successors(*u).any(|v| d[v] && pred(v)));
            }
            if next == d {
                break;
            }
            d = next;
        }
        d[base]
    }

    pub fn verify_switch(&mut self, base: usize, s: &FoFormula) -> Result<bool, ControlError> {
        let t = self.table(base, s)?;
        Ok(self.steered(base, &|_| vec![Box::new(|v| t.0[v]), Box::new(|v| !t.0[v])]))
    }

    pub fn verify_independent_switches(&mut self, base: usize, family: &[FoFormula]) -> Result<bool, ControlError> {
        if family.is_empty() {
            return Err(ControlError::Empty);
        }
        let ts = self.tables(base, family)?;
        let pattern = |v: usize| ts.iter().enumerate().fold(0usize, |acc, (i, t)| acc | ((t.0[v] as usize) << i));
        let count = 1usize << family.len();
        Ok(self.steered(base, &|_| (0..count).map(|p| Box::new(move |v| pattern(v) == p) as Box<dyn Fn(usize) -> bool>).collect()))
    }

    /// Index of the single true dial sentence at each cone world, or `None`
    /// if exactly-one fails somewhere.
    fn dial_values(&mut self, base: usize, dial: &[FoFormula]) -> Result<Option<Vec<usize>>, ControlError> {
        let ts = self.tables(base, dial)?;
        let mut values = vec![usize::MAX; self.system().world_count()];
        for u in self.cone(base) {
            let on: Vec<usize> = (0..dial.len()).filter(|&j| ts[j].0[u]).collect();
            if on.len() != 1 {
                return Ok(None);
            }
            values[u] = on[0];
        }
        Ok(Some(values))
    }

    pub fn verify_dial(&mut self, base: usize, dial: &[FoFormula]) -> Result<bool, ControlError> {
        if dial.is_empty() {
            return Err(ControlError::Empty);
        }
        let Some(values) = self.dial_values(base, dial)? else {
            return Ok(false);
        };
        let values = &values;
        Ok(self.steered(base, &|_| (0..dial.len()).map(|j| Box::new(move |v| values[v] == j) as Box<dyn Fn(usize) -> bool>).collect()))
    }

    /// Companion setting at each cone world, or `None` if the companion fails
    /// to verify.
    fn companion_settings(&mut self, base: usize, c: &Companion) -> Result<Option<Vec<usize>>, ControlError> {
        match c {
            Companion::Dial(d) => {
                if !self.verify_dial(base, d)? {
                    return Ok(None);
                }
                self.dial_values(base, d)
            }
            Companion::Switches(s) => {
                if !self.verify_independent_switches(base, s)? {
                    return Ok(None);
                }
                let ts = self.tables(base, s)?;
                Ok(Some(
                    (0..self.system().world_count())
                        .map(|v| ts.iter().enumerate().fold(0usize, |acc, (i, t)| acc | ((t.0[v] as usize) << i)))
                        .collect(),
                ))
            }
        }
    }

    /// ◇□b at every reachable world.
    pub fn verify_button(&mut self, base: usize, b: &FoFormula) -> Result<bool, ControlError> {
        let t = self.table(base, b)?;
        Ok(self.is_button(base, &t))
    }

    fn is_button(&self, base: usize, t: &Table) -> bool {
        let bx = self.boxed(base, t);
        let sys = self.system();
        self.cone(base).into_iter().all(|u| sys.frame().successors(u).any(|v| bx.0[v]))
    }

    /// A button with b → □b at every reachable world.
    pub fn verify_pure_button(&mut self, base: usize, b: &FoFormula) -> Result<bool, ControlError> {
        let t = self.table(base, b)?;
        let bx = self.boxed(base, &t);
        Ok(self.is_button(base, &t) && self.cone(base).into_iter().all(|u| !t.0[u] || bx.0[u]))
    }

    /// □b at `u`.
    pub fn pushed(&mut self, u: usize, b: &FoFormula) -> Result<bool, ControlError> {
        let t = self.table(u, b)?;
        Ok(self.boxed(u, &t).0[u])
    }

    pub fn verify_independent_buttons(&mut self, base: usize, buttons: &[FoFormula], companion: &Companion) -> Result<bool, ControlError> {
        let Some(settings) = self.companion_settings(base, companion)? else {
            return Ok(false);
        };
        let mut pushed_tables = Vec::new();
        for b in buttons {
            let t = self.table(base, b)?;
            if !self.is_button(base, &t) {
                return Ok(false);
            }
            pushed_tables.push(self.boxed(base, &t));
        }
        let cone = self.cone(base);
        let pushed = |v: usize| pushed_tables.iter().enumerate().fold(0u64, |acc, (i, t)| acc | ((t.0[v] as u64) << i));
        if !cone.iter().any(|&u| pushed(u) == 0) {
            return Ok(false);
        }
        let n_settings = companion.settings();
        let settings = &settings;
        let pushed = &pushed;
        Ok(self.steered(base, &|u| {
            let now = pushed(u);
            let mut out: Vec<Box<dyn Fn(usize) -> bool>> = Vec::new();
            for i in (0..buttons.len()).filter(|i| now & (1 << i) == 0).map(Some).chain([None]) {
                let want = now | i.map_or(0, |i| 1 << i);
                for c in 0..n_settings {
                    out.push(Box::new(move |v| pushed(v) == want && settings[v] == c));
                }
            }
            out
        }))
    }

    /// Number of true ratchet sentences at each cone world, after checking
    /// that each implies its predecessors everywhere.
    fn volumes(&mut self, base: usize, tables: &[Table]) -> Option<Vec<usize>> {
        let mut vol = vec![0; self.system().world_count()];
        for u in self.cone(base) {
            let count = tables.iter().take_while(|t| t.0[u]).count();
            if tables[count..].iter().any(|t| t.0[u]) {
                return None;
            }
            vol[u] = count;
        }
        Some(vol)
    }

    pub fn verify_ratchet(&mut self, base: usize, ratchet: &[FoFormula], companion: &Companion) -> Result<bool, ControlError> {
        if ratchet.is_empty() {
            return Err(ControlError::Empty);
        }
        let Some(settings) = self.companion_settings(base, companion)? else {
            return Ok(false);
        };
        let tables = self.tables(base, ratchet)?;
        for t in &tables {
            if !self.is_button(base, t) || self.boxed(base, t).0[base] {
                return Ok(false);
            }
        }
        let Some(vol) = self.volumes(base, &tables) else {
            return Ok(false);
        };
        let n = ratchet.len();
        let n_settings = companion.settings();
        let (vol, settings) = (&vol, &settings);
        Ok(self.steered(base, &|u| {
            let mut out: Vec<Box<dyn Fn(usize) -> bool>> = Vec::new();
            // volume i is reachable exactly from below
            for i in vol[u] + 1..=n {
                out.push(Box::new(move |v| vol[v] == i));
            }
            for c in 0..n_settings {
                out.push(Box::new(move |v| vol[v] == vol[u] && settings[v] == c));
            }
            out
        }))
    }

    pub fn verify_long_ratchet(&mut self, base: usize, ratchet: &[FoFormula]) -> Result<bool, ControlError> {
        if ratchet.is_empty() {
            return Err(ControlError::Empty);
        }
        let tables = self.tables(base, ratchet)?;
        if !self.cone(base).into_iter().all(|u| tables[0].0[u]) {
            return Ok(false);
        }
        for t in &tables[1..] {
            if !self.is_button(base, t) {
                return Ok(false);
            }
        }
        let Some(vol) = self.volumes(base, &tables) else {
            return Ok(false);
        };
        let top = ratchet.len() - 1;
        let vol = &vol;
        Ok(self.steered(base, &|u| {
            (vol[u] + 1..=top + 1).map(|i| Box::new(move |v| vol[v] == i) as Box<dyn Fn(usize) -> bool>).collect()
        }))
    }

    pub fn verify_kind(&mut self, base: usize, kind: &ControlKind) -> Result<bool, ControlError> {
        match kind {
            ControlKind::Switches(s) => self.verify_independent_switches(base, s),
            ControlKind::Dial(d) => self.verify_dial(base, d),
            ControlKind::Buttons { buttons, companion } => self.verify_independent_buttons(base, buttons, companion),
            ControlKind::Ratchet { ratchet, companion } => self.verify_ratchet(base, ratchet, companion),
            ControlKind::LongRatchet(r) => self.verify_long_ratchet(base, r),
        }
    }

    /// Per reachable world, the set of companion settings (dial values or
    /// switch patterns) realized at its accessible worlds.
    pub fn reachable_settings(&mut self, base: usize, labels: &[FoFormula]) -> Result<Vec<(usize, Vec<usize>)>, ControlError> {
        let ts = self.tables(base, labels)?;
        let sys = self.system();
        Ok(self
            .cone(base)
            .into_iter()
            .map(|u| {
                let set = (0..labels.len()).filter(|&j| sys.frame().successors(u).any(|v| ts[j].0[v])).collect();
                (u, set)
            })
            .collect())
    }
}

pub fn verify_switch(sys: &PotentialistSystem, w: usize, s: &FoFormula) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_switch(w, s)
}

pub fn verify_independent_switches(sys: &PotentialistSystem, w: usize, family: &[FoFormula]) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_independent_switches(w, family)
}

pub fn verify_dial(sys: &PotentialistSystem, w: usize, dial: &[FoFormula]) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_dial(w, dial)
}

pub fn verify_button(sys: &PotentialistSystem, w: usize, b: &FoFormula) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_button(w, b)
}

pub fn verify_pure_button(sys: &PotentialistSystem, w: usize, b: &FoFormula) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_pure_button(w, b)
}

pub fn verify_independent_buttons(
    sys: &PotentialistSystem,
    w: usize,
    buttons: &[FoFormula],
    companion: &Companion,
) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_independent_buttons(w, buttons, companion)
}

pub fn verify_ratchet(sys: &PotentialistSystem, w: usize, ratchet: &[FoFormula], companion: &Companion) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_ratchet(w, ratchet, companion)
}

pub fn verify_long_ratchet(sys: &PotentialistSystem, w: usize, ratchet: &[FoFormula]) -> Result<bool, ControlError> {
    Checker::new(sys, Rounds::default()).verify_long_ratchet(w, ratchet)
}
