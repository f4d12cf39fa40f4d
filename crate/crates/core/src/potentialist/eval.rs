//! Compiled first-order modal evaluation with guarded quantifiers and a
//! per-world cache of closed subformulas.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use super::{PotentialistError, PotentialistSystem};
use crate::formula::{FoFormula, FormulaError, Term};

type NodeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum T {
    /// De Bruijn index: 0 is the innermost binder.
    Var(u32),
    Param(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Atom(u32, Box<[T]>),
    Eq(T, T),
    Top,
    Bot,
    Not(NodeId),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    Implies(NodeId, NodeId),
    Iff(NodeId, NodeId),
    Exists(NodeId),
    Forall(NodeId),
    Diamond(NodeId),
    Box(NodeId),
}

/// Where a bound variable's candidate values come from.
#[derive(Clone, Debug)]
enum Guard {
    /// Values at `pos` of tuples of `rel` whose other arguments match `args`.
    Atom { rel: u32, pos: usize, args: Box<[T]> },
    Eq(T),
}

struct Meta {
    /// Free de Bruijn indices, ascending.
    free: Box<[u32]>,
    params: Box<[u32]>,
    cached: bool,
    guard: Option<Guard>,
}

/// A formula compiled against an [`Evaluator`], with its free variable names
/// in binding order (outermost first).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compiled {
    root: NodeId,
    free: Vec<String>,
}

impl Compiled {
    pub fn free_variables(&self) -> &[String] {
        &self.free
    }
}

/// Hash-consed formula store and result cache for one system.
pub struct Evaluator<'a> {
    sys: &'a PotentialistSystem,
    nodes: Vec<Node>,
    meta: Vec<Meta>,
    intern: HashMap<Node, NodeId>,
    cache: RefCell<HashMap<Box<[u32]>, bool>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(sys: &'a PotentialistSystem) -> Self {
        Evaluator { sys, nodes: Vec::new(), meta: Vec::new(), intern: HashMap::new(), cache: RefCell::new(HashMap::new()) }
    }

    pub fn system(&self) -> &'a PotentialistSystem {
        self.sys
    }

    /// Compiles `phi`; its free variables become the listed names, which
    /// must cover all of them.
    pub fn compile_open(&mut self, phi: &FoFormula, free: &[String]) -> Result<Compiled, PotentialistError> {
        phi.check_signature(self.sys.signature())?;
        let mut scope: Vec<String> = free.to_vec();
        let root = self.compile_rec(phi, &mut scope)?;
        Ok(Compiled { root, free: free.to_vec() })
    }

    pub fn compile(&mut self, phi: &FoFormula) -> Result<Compiled, PotentialistError> {
        let free: Vec<String> = phi.free_variables().into_iter().collect();
        self.compile_open(phi, &free)
    }

    fn compile_rec(&mut self, phi: &FoFormula, scope: &mut Vec<String>) -> Result<NodeId, PotentialistError> {
        use FoFormula as F;
        let node = match phi {
            F::Atom(r, args) => {
                let rel = self.sys.signature().index_of(r).ok_or_else(|| FormulaError::UnknownRelation(r.clone()))?;
                let args = args.iter().map(|t| self.term(t, scope)).collect::<Result<_, _>>()?;
                Node::Atom(rel as u32, args)
            }
            F::Eq(a, b) => Node::Eq(self.term(a, scope)?, self.term(b, scope)?),
            F::Top => Node::Top,
            F::Bot => Node::Bot,
            F::Not(p) => Node::Not(self.compile_rec(p, scope)?),
            F::And(p, q) => Node::And(self.compile_rec(p, scope)?, self.compile_rec(q, scope)?),
            F::Or(p, q) => Node::Or(self.compile_rec(p, scope)?, self.compile_rec(q, scope)?),
            F::Implies(p, q) => Node::Implies(self.compile_rec(p, scope)?, self.compile_rec(q, scope)?),
            F::Iff(p, q) => Node::Iff(self.compile_rec(p, scope)?, self.compile_rec(q, scope)?),
            F::Diamond(p) => Node::Diamond(self.compile_rec(p, scope)?),
            F::Box(p) => Node::Box(self.compile_rec(p, scope)?),
            F::Exists(v, p) | F::Forall(v, p) => {
                scope.push(v.clone());
                let body = self.compile_rec(p, scope);
                scope.pop();
                if matches!(phi, F::Exists(..)) {
                    Node::Exists(body?)
                } else {
                    Node::Forall(body?)
                }
            }
        };
        Ok(self.intern(node))
    }

    fn term(&self, t: &Term, scope: &[String]) -> Result<T, PotentialistError> {
        match t {
            Term::Var(v) => scope
                .iter()
                .rev()
                .position(|s| s == v)
                .map(|i| T::Var(i as u32))
                .ok_or_else(|| PotentialistError::FreeVariable(v.clone())),
            Term::Param(p) => {
                self.sys.element_index(p).map(T::Param).ok_or_else(|| PotentialistError::UnknownElement(p.clone()))
            }
        }
    }

    fn intern(&mut self, node: Node) -> NodeId {
        if let Some(&id) = self.intern.get(&node) {
            return id;
        }
        let meta = self.make_meta(&node);
        let id = self.nodes.len() as NodeId;
        self.nodes.push(node.clone());
        self.meta.push(meta);
        self.intern.insert(node, id);
        id
    }

    fn make_meta(&self, node: &Node) -> Meta {
        let term_free = |t: &T| match t {
            T::Var(i) => Some(*i),
            T::Param(_) => None,
        };
        let term_param = |t: &T| match t {
            T::Param(e) => Some(*e),
            T::Var(_) => None,
        };
        let union = |ids: &[NodeId], shift: bool| -> (Vec<u32>, Vec<u32>) {
            let mut free: Vec<u32> = Vec::new();
            let mut params: Vec<u32> = Vec::new();
            for &c in ids {
                let m = &self.meta[c as usize];
                if shift {
                    free.extend(m.free.iter().filter(|&&i| i > 0).map(|i| i - 1));
                } else {
                    free.extend(m.free.iter());
                }
                params.extend(m.params.iter());
            }
            (free, params)
        };
        let (mut free, mut params, quantified_or_modal, guard) = match node {
            Node::Atom(_, args) => (
                args.iter().filter_map(term_free).collect(),
                args.iter().filter_map(term_param).collect(),
                false,
                None,
            ),
            Node::Eq(a, b) => (
                [a, b].into_iter().filter_map(term_free).collect(),
                [a, b].into_iter().filter_map(term_param).collect(),
                false,
                None,
            ),
            Node::Top | Node::Bot => (vec![], vec![], false, None),
            Node::Not(p) => {
                let (f, p) = union(&[*p], false);
                (f, p, false, None)
            }
            Node::And(p, q) | Node::Or(p, q) | Node::Implies(p, q) | Node::Iff(p, q) => {
                let (f, p) = union(&[*p, *q], false);
                (f, p, false, None)
            }
            Node::Diamond(p) | Node::Box(p) => {
                let (f, p) = union(&[*p], false);
                (f, p, true, None)
            }
            Node::Exists(b) => {
                let (f, p) = union(&[*b], true);
                let guard = self.conjuncts(*b).into_iter().find_map(|c| self.guard_of(c));
                (f, p, true, guard)
            }
            Node::Forall(b) => {
                let (f, p) = union(&[*b], true);
                (f, p, true, self.forall_guard(*b))
            }
        };
        free.sort_unstable();
        free.dedup();
        params.sort_unstable();
        params.dedup();
        let cached = quantified_or_modal && (free.is_empty() || matches!(node, Node::Diamond(_) | Node::Box(_)));
        Meta { free: free.into(), params: params.into(), cached, guard }
    }

    fn conjuncts(&self, id: NodeId) -> Vec<NodeId> {
        match self.nodes[id as usize] {
            Node::And(p, q) => {
                let mut v = self.conjuncts(p);
                v.extend(self.conjuncts(q));
                v
            }
            _ => vec![id],
        }
    }

    fn disjuncts(&self, id: NodeId) -> Vec<NodeId> {
        match self.nodes[id as usize] {
            Node::Or(p, q) => {
                let mut v = self.disjuncts(p);
                v.extend(self.disjuncts(q));
                v
            }
            _ => vec![id],
        }
    }

    /// A guard for the innermost bound variable from a positive literal.
    fn guard_of(&self, id: NodeId) -> Option<Guard> {
        match &self.nodes[id as usize] {
            Node::Atom(rel, args) => {
                let occurrences = args.iter().filter(|t| **t == T::Var(0)).count();
                if occurrences != 1 {
                    return None;
                }
                let pos = args.iter().position(|t| *t == T::Var(0))?;
                Some(Guard::Atom { rel: *rel, pos, args: args.clone() })
            }
            Node::Eq(a, b) => match (a, b) {
                (T::Var(0), T::Var(0)) => None,
                (T::Var(0), other) | (other, T::Var(0)) => Some(Guard::Eq(*other)),
                _ => None,
            },
            _ => None,
        }
    }

    /// `forall v . (A & ...) -> B`, `forall v . ~ A | B` and `forall v . ~ (A & ...)`
    /// are vacuous outside the tuples of `A`.
    fn forall_guard(&self, body: NodeId) -> Option<Guard> {
        match self.nodes[body as usize] {
            Node::Implies(a, _) => self.conjuncts(a).into_iter().find_map(|c| self.guard_of(c)),
            Node::Not(a) => self.conjuncts(a).into_iter().find_map(|c| self.guard_of(c)),
            Node::Or(..) => self.disjuncts(body).into_iter().find_map(|d| match self.nodes[d as usize] {
                Node::Not(a) => self.guard_of(a),
                _ => None,
            }),
            _ => None,
        }
    }

    /// Evaluates a compiled formula at world `w`, with `env` giving values for
    /// its free variables in the order of [`Compiled::free_variables`].
    pub fn eval(&self, c: &Compiled, w: usize, env: &[u32]) -> Result<bool, PotentialistError> {
        if env.len() != c.free.len() {
            return Err(PotentialistError::FreeVariable(c.free.get(env.len()).cloned().unwrap_or_default()));
        }
        let world = self.sys.world(w);
        for &p in self.meta[c.root as usize].params.iter() {
            if !world.contains(p) {
                return Err(PotentialistError::ParameterNotInDomain {
                    param: self.sys.element_name(p).to_string(),
                    world: world.id.clone(),
                });
            }
        }
        for (i, &e) in env.iter().enumerate() {
            if !world.contains(e) {
                return Err(PotentialistError::ParameterNotInDomain {
                    param: format!("{}={}", c.free[i], self.sys.element_name(e)),
                    world: world.id.clone(),
                });
            }
        }
        let mut stack = env.to_vec();
        Ok(self.eval_node(c.root, w, &mut stack))
    }

    /// Evaluates a sentence at `w`, compiling it first.
    pub fn holds(&mut self, phi: &FoFormula, w: usize) -> Result<bool, PotentialistError> {
        let c = self.compile(phi)?;
        self.eval(&c, w, &[])
    }

    fn value(t: T, env: &[u32]) -> u32 {
        match t {
            T::Var(i) => env[env.len() - 1 - i as usize],
            T::Param(e) => e,
        }
    }

    fn eval_node(&self, id: NodeId, w: usize, env: &mut Vec<u32>) -> bool {
        let meta = &self.meta[id as usize];
        if meta.cached {
            let mut key = Vec::with_capacity(2 + meta.free.len());
            key.push(id);
            key.push(w as u32);
            key.extend(meta.free.iter().map(|&i| env[env.len() - 1 - i as usize]));
            if let Some(&v) = self.cache.borrow().get(&key[..]) {
                return v;
            }
            let v = self.compute(id, w, env);
            self.cache.borrow_mut().insert(key.into(), v);
            v
        } else {
            self.compute(id, w, env)
        }
    }

    fn candidates(&self, guard: &Option<Guard>, w: usize, env: &[u32]) -> Option<Vec<u32>> {
        let world = self.sys.world(w);
        match guard.as_ref()? {
            Guard::Atom { rel, pos, args } => {
                // argument terms live in the body scope, where index 0 is the
                // variable being bound; shift everything else out by one
                let key: Vec<u32> = args
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != *pos)
                    .map(|(_, t)| match *t {
                        T::Var(k) => env[env.len() - k as usize],
                        T::Param(e) => e,
                    })
                    .collect();
                Some(world.index[*rel as usize][*pos].get(&key[..]).cloned().unwrap_or_default())
            }
            Guard::Eq(t) => {
                let v = match *t {
                    T::Var(k) => env[env.len() - k as usize],
                    T::Param(e) => e,
                };
                Some(if world.contains(v) { vec![v] } else { vec![] })
            }
        }
    }

    fn compute(&self, id: NodeId, w: usize, env: &mut Vec<u32>) -> bool {
        match &self.nodes[id as usize] {
            Node::Atom(rel, args) => {
                let tuple: Vec<u32> = args.iter().map(|&t| Self::value(t, env)).collect();
                self.sys.world(w).rels[*rel as usize].contains(&tuple[..])
            }
            Node::Eq(a, b) => Self::value(*a, env) == Self::value(*b, env),
            Node::Top => true,
            Node::Bot => false,
            Node::Not(p) => !self.eval_node(*p, w, env),
            Node::And(p, q) => self.eval_node(*p, w, env) && self.eval_node(*q, w, env),
            Node::Or(p, q) => self.eval_node(*p, w, env) || self.eval_node(*q, w, env),
            Node::Implies(p, q) => !self.eval_node(*p, w, env) || self.eval_node(*q, w, env),
            Node::Iff(p, q) => self.eval_node(*p, w, env) == self.eval_node(*q, w, env),
            Node::Diamond(p) => self.sys.frame().successors(w).any(|u| self.eval_node(*p, u, env)),
            Node::Box(p) => self.sys.frame().successors(w).all(|u| self.eval_node(*p, u, env)),
            Node::Exists(b) | Node::Forall(b) => {
                let exists = matches!(self.nodes[id as usize], Node::Exists(_));
                let guarded = self.candidates(&self.meta[id as usize].guard, w, env);
                let domain = self.sys.domain(w);
                let items: &[u32] = guarded.as_deref().unwrap_or(domain);
                for &e in items {
                    env.push(e);
                    let v = self.eval_node(*b, w, env);
                    env.pop();
                    if v == exists {
                        return exists;
                    }
                }
                !exists
            }
        }
    }

    /// Number of distinct compiled nodes.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn clear_cache(&self) {
        self.cache.borrow_mut().clear();
    }
}

/// One-shot evaluation with named free-variable values (element ids).
pub fn eval_fo(
    sys: &PotentialistSystem,
    w: usize,
    phi: &FoFormula,
    env: &BTreeMap<String, String>,
) -> Result<bool, PotentialistError> {
    if w >= sys.world_count() {
        return Err(PotentialistError::UnknownWorld(w.to_string()));
    }
    let mut ev = Evaluator::new(sys);
    let free: Vec<String> = phi.free_variables().into_iter().collect();
    let c = ev.compile_open(phi, &free)?;
    let values = free
        .iter()
        .map(|v| {
            let id = env.get(v).ok_or_else(|| PotentialistError::FreeVariable(v.clone()))?;
            sys.element_index(id).ok_or_else(|| PotentialistError::UnknownElement(id.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ev.eval(&c, w, &values)
}
