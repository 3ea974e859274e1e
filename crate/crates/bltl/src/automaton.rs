//! Explicit finite automaton for a formula over a finite pool of blocks.
//!
//! States are proper closures of formula sets; a transition on a block f
//! carries the X/WX obligations over and applies f to every constraint.
//! The construction is reachable-only: states are discovered from the
//! initial closures outward, never enumerated from the powerset of the
//! subformula closure. The pool is finite by design (the blocks of the
//! models under test); the full alphabet of Boolean functions is not
//! representable and not needed for the oracle role this module plays.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{BnnModel, BoolFn, VectorOrder};
use crate::formula::{proper_closures, Formula, FormulaSet};
use crate::term::{FixedFn, FnRef};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("the block pool is empty")]
    EmptyPool,
    #[error("formula must be in negation normal form")]
    NotNnf,
    #[error("formula contains a quantifier; expand it first")]
    Quantified,
    #[error("formula is not ground: variable {0} is free")]
    FreeVariable(String),
    #[error("formula mentions block variable @{0}; the explicit automaton handles concrete blocks only")]
    BlockVariable(usize),
}

pub type StateId = usize;

/// Nondeterministic automaton on finite block words.
#[derive(Debug, Clone)]
pub struct Automaton {
    pool: Vec<Arc<BoolFn>>,
    order: VectorOrder,
    states: Vec<FormulaSet>,
    initial: BTreeSet<StateId>,
    accepting: BTreeSet<StateId>,
    /// (state, pool index) to successor states. Absent key: the letter is
    /// not applicable in that state, or the state holds a contradiction.
    transitions: BTreeMap<(StateId, usize), BTreeSet<StateId>>,
}

impl Automaton {
    /// Build the reachable part of the automaton for `phi` over `pool`.
    /// `phi` must be ground, quantifier-free negation normal form.
    pub fn construct(
        phi: &Arc<Formula>,
        pool: &[Arc<BoolFn>],
        order: VectorOrder,
    ) -> Result<Automaton, AutomatonError> {
        if pool.is_empty() {
            return Err(AutomatonError::EmptyPool);
        }
        if phi.has_quantifier() {
            return Err(AutomatonError::Quantified);
        }
        if !phi.is_nnf() {
            return Err(AutomatonError::NotNnf);
        }
        for atom in phi.atoms() {
            for term in [&atom.lhs, &atom.rhs] {
                if let Some((name, _)) = term.free_var() {
                    return Err(AutomatonError::FreeVariable(name.to_string()));
                }
                if let Some(i) = term.block_indices().next() {
                    return Err(AutomatonError::BlockVariable(i));
                }
            }
        }

        // Equal tables are the same letter; dropping duplicates keeps the
        // applied constraints (named by pool index) from splitting states.
        let mut letters: Vec<Arc<BoolFn>> = Vec::new();
        for f in pool {
            if !letters.contains(f) {
                letters.push(f.clone());
            }
        }

        let mut builder = Builder {
            letters,
            order,
            states: Vec::new(),
            index: BTreeMap::new(),
            transitions: BTreeMap::new(),
        };
        let seed = FormulaSet::from([phi.clone()]);
        let mut queue = VecDeque::new();
        let mut initial = BTreeSet::new();
        for closure in proper_closures(&seed) {
            let id = builder.intern(closure, &mut queue);
            initial.insert(id);
        }
        while let Some(id) = queue.pop_front() {
            builder.expand(id, &mut queue);
        }

        let accepting = builder
            .states
            .iter()
            .enumerate()
            .filter(|(_, q)| is_accepting(q, order))
            .map(|(id, _)| id)
            .collect();
        Ok(Automaton {
            pool: builder.letters,
            order,
            states: builder.states,
            initial,
            accepting,
            transitions: builder.transitions,
        })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FormulaSet] {
        &self.states
    }

    pub fn pool(&self) -> &[Arc<BoolFn>] {
        &self.pool
    }

    pub fn order(&self) -> VectorOrder {
        self.order
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn is_accepting(&self, id: StateId) -> bool {
        self.accepting.contains(&id)
    }

    /// Successors of `id` on the letter equal to `f`, empty when the
    /// letter is outside the pool or not applicable.
    pub fn successors(&self, id: StateId, f: &BoolFn) -> BTreeSet<StateId> {
        match self.letter_index(f) {
            Some(li) => self
                .transitions
                .get(&(id, li))
                .cloned()
                .unwrap_or_default(),
            None => BTreeSet::new(),
        }
    }

    fn letter_index(&self, f: &BoolFn) -> Option<usize> {
        self.pool.iter().position(|g| g.as_ref() == f)
    }

    /// Whether some run over `word` ends in an accepting state. Letters
    /// outside the pool have no transitions, so any such word is rejected.
    pub fn accepts(&self, word: &[Arc<BoolFn>]) -> bool {
        let mut current = self.initial.clone();
        for f in word {
            let li = match self.letter_index(f) {
                Some(li) => li,
                None => return false,
            };
            let mut next = BTreeSet::new();
            for &q in &current {
                if let Some(succ) = self.transitions.get(&(q, li)) {
                    next.extend(succ.iter().copied());
                }
            }
            if next.is_empty() {
                return false;
            }
            current = next;
        }
        current.iter().any(|q| self.accepting.contains(q))
    }

    /// Run the model's block sequence as a word.
    pub fn accepts_model(&self, model: &BnnModel) -> bool {
        self.accepts(model.blocks())
    }

    /// Graphviz rendering of the state graph for debugging.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("digraph bltl_automaton {\n  rankdir=LR;\n");
        out.push_str("  node [shape=circle, fontsize=10];\n");
        for (id, q) in self.states.iter().enumerate() {
            let shape = if self.accepting.contains(&id) {
                "doublecircle"
            } else {
                "circle"
            };
            let label = if q.is_empty() {
                "{}".to_string()
            } else {
                q.iter()
                    .map(|f| f.to_string().replace('"', "\\\""))
                    .collect::<Vec<_>>()
                    .join("\\n")
            };
            let _ = writeln!(out, "  q{id} [shape={shape}, label=\"q{id}\\n{label}\"];");
        }
        for &id in &self.initial {
            let _ = writeln!(out, "  start{id} [shape=point];");
            let _ = writeln!(out, "  start{id} -> q{id};");
        }
        for ((from, li), tos) in &self.transitions {
            for to in tos {
                let _ = writeln!(out, "  q{from} -> q{to} [label=\"f{li}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}

struct Builder {
    letters: Vec<Arc<BoolFn>>,
    order: VectorOrder,
    states: Vec<FormulaSet>,
    index: BTreeMap<FormulaSet, StateId>,
    transitions: BTreeMap<(StateId, usize), BTreeSet<StateId>>,
}

impl Builder {
    fn intern(&mut self, q: FormulaSet, queue: &mut VecDeque<StateId>) -> StateId {
        if let Some(&id) = self.index.get(&q) {
            return id;
        }
        let id = self.states.len();
        self.states.push(q.clone());
        self.index.insert(q, id);
        queue.push_back(id);
        id
    }

    fn expand(&mut self, id: StateId, queue: &mut VecDeque<StateId>) {
        let q = self.states[id].clone();
        if q.contains(&Formula::ff()) {
            return;
        }
        for li in 0..self.letters.len() {
            let func = FnRef::Fixed(FixedFn::new(format!("f{li}"), self.letters[li].clone()));
            let Some(seed) = step_seed(&q, &func, self.order) else {
                continue;
            };
            let successors: Vec<StateId> = proper_closures(&seed)
                .into_iter()
                .map(|c| self.intern(c, queue))
                .collect();
            self.transitions
                .entry((id, li))
                .or_default()
                .extend(successors);
        }
    }
}

/// Seed of the successor state: X/WX obligations plus every constraint
/// with the block applied. Saturated constraints evaluate on the spot; a
/// failed evaluation (false, or incompatible collapse) contributes a
/// contradiction. `None` means the block is not applicable in `q`.
fn step_seed(q: &FormulaSet, func: &FnRef, order: VectorOrder) -> Option<FormulaSet> {
    let mut seed = FormulaSet::new();
    for member in q {
        match member.as_ref() {
            Formula::Next(g) | Formula::WeakNext(g) => {
                seed.insert(g.clone());
            }
            Formula::Atom(a) => {
                if a.is_saturated() {
                    if !matches!(a.eval_const(order), Ok(true)) {
                        seed.insert(Formula::ff());
                    }
                } else {
                    match a.apply(func) {
                        Ok(b) => {
                            seed.insert(Arc::new(Formula::Atom(b)));
                        }
                        Err(_) => return None,
                    }
                }
            }
            Formula::False => {
                seed.insert(Formula::ff());
            }
            // True contributes nothing; And/Or/Until/Release members are
            // already decomposed inside the closure, so their temporal
            // content travels through the X/WX members above.
            _ => {}
        }
    }
    Some(seed)
}

/// No strict-next obligation, no contradiction, and every constraint
/// collapses to a true comparison.
fn is_accepting(q: &FormulaSet, order: VectorOrder) -> bool {
    for member in q {
        match member.as_ref() {
            Formula::Next(_) | Formula::False => return false,
            Formula::Atom(a) => {
                if !matches!(a.eval_const(order), Ok(true)) {
                    return false;
                }
            }
            _ => {}
        }
    }
    true
}
