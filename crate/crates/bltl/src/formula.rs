//! Formula AST, negation normal form, quantifier expansion, subformula
//! closure, and proper closures of formula sets.
//!
//! Formulas are reference-counted and structurally ordered so sets of
//! formulas iterate deterministically. An atom carries its own negation
//! flag; under negation normal form that flag is the only remaining form
//! of negation, which keeps the elementwise reading of order relations
//! expressible (elementwise `<=` has no dual relation).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{BitVec, BitsError, Relation, VectorOrder};
use crate::term::{Term, TermError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("formula contains a quantifier; expand it before this operation")]
    QuantifierPresent,
    #[error("quantifier width {width} exceeds the expansion limit {limit}")]
    WidthLimit { width: usize, limit: usize },
    #[error("variable {0} is neither quantified nor declared")]
    UnboundVariable(String),
    #[error("term error during expansion: {0}")]
    Term(#[from] TermError),
    #[error("bit vector error during expansion: {0}")]
    Bits(#[from] BitsError),
}

/// An atomic constraint: two terms under a comparison relation, possibly
/// negated.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub lhs: Term,
    pub rel: Relation,
    pub rhs: Term,
    pub negated: bool,
}

impl Atom {
    pub fn new(lhs: Term, rel: Relation, rhs: Term) -> Atom {
        Atom {
            lhs,
            rel,
            rhs,
            negated: false,
        }
    }

    /// `max(len(lhs), len(rhs))`: how many block applications the atom
    /// still expects.
    pub fn len(&self) -> usize {
        self.lhs.len().max(self.rhs.len())
    }

    pub fn is_saturated(&self) -> bool {
        self.len() == 0
    }

    pub fn negate(&self) -> Atom {
        Atom {
            negated: !self.negated,
            ..self.clone()
        }
    }

    /// Evaluate a saturated, variable-free, block-free atom.
    pub fn eval_const(&self, order: VectorOrder) -> Result<bool, TermError> {
        let l = self.lhs.collapse_value()?;
        let r = self.rhs.collapse_value()?;
        let v = l.compare(self.rel, &r, order)?;
        Ok(v != self.negated)
    }

    /// Apply a block to both sides. Saturated sides pass through
    /// unchanged; an error means the block is not applicable to this
    /// atom at all.
    pub fn apply(&self, func: &crate::term::FnRef) -> Result<Atom, TermError> {
        Ok(Atom {
            lhs: self.lhs.apply(func)?,
            rhs: self.rhs.apply(func)?,
            rel: self.rel,
            negated: self.negated,
        })
    }

    /// Whether both sides collapse to concrete vectors (no symbolic
    /// blocks, no free variables), so `eval_const` after collapse would
    /// succeed or fail on widths alone.
    pub fn is_ground(&self) -> bool {
        !self.lhs.contains_block()
            && !self.rhs.contains_block()
            && self.lhs.free_var().is_none()
            && self.rhs.free_var().is_none()
    }

    pub fn shifted_repr(&self, shift: usize) -> String {
        let neg = if self.negated { "!" } else { "" };
        format!(
            "{neg}({} {} {})",
            self.lhs.shifted_repr(shift),
            self.rel.symbol(),
            self.rhs.shifted_repr(shift)
        )
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "!({} {} {})", self.lhs, self.rel, self.rhs)
        } else {
            write!(f, "{} {} {}", self.lhs, self.rel, self.rhs)
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Atom({self})")
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Next(Arc<Formula>),
    WeakNext(Arc<Formula>),
    Until(Arc<Formula>, Arc<Formula>),
    Release(Arc<Formula>, Arc<Formula>),
    Finally(Arc<Formula>),
    Globally(Arc<Formula>),
    Forall {
        var: Arc<str>,
        width: usize,
        body: Arc<Formula>,
    },
    Exists {
        var: Arc<str>,
        width: usize,
        body: Arc<Formula>,
    },
}

/// Deterministically ordered set of shared formulas.
pub type FormulaSet = BTreeSet<Arc<Formula>>;

impl Formula {
    pub fn atom(lhs: Term, rel: Relation, rhs: Term) -> Arc<Formula> {
        Arc::new(Formula::Atom(Atom::new(lhs, rel, rhs)))
    }

    pub fn not(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Not(f))
    }

    pub fn and(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::And(a, b))
    }

    pub fn or(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Or(a, b))
    }

    pub fn implies(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Implies(a, b))
    }

    pub fn next(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Next(f))
    }

    pub fn weak_next(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::WeakNext(f))
    }

    pub fn until(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Until(a, b))
    }

    pub fn release(a: Arc<Formula>, b: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Release(a, b))
    }

    pub fn finally(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Finally(f))
    }

    pub fn globally(f: Arc<Formula>) -> Arc<Formula> {
        Arc::new(Formula::Globally(f))
    }

    pub fn tt() -> Arc<Formula> {
        Arc::new(Formula::True)
    }

    pub fn ff() -> Arc<Formula> {
        Arc::new(Formula::False)
    }

    /// Conjunction of a sequence, `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Arc<Formula>>) -> Arc<Formula> {
        let mut iter = items.into_iter();
        let Some(first) = iter.next() else {
            return Formula::tt();
        };
        iter.fold(first, Formula::and)
    }

    /// Disjunction of a sequence, `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Arc<Formula>>) -> Arc<Formula> {
        let mut iter = items.into_iter();
        let Some(first) = iter.next() else {
            return Formula::ff();
        };
        iter.fold(first, Formula::or)
    }

    /// True when the formula is in negation normal form: no negation
    /// nodes, implications, derived temporal operators, or quantifiers.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(_)
            | Formula::Implies(..)
            | Formula::Finally(_)
            | Formula::Globally(_)
            | Formula::Forall { .. }
            | Formula::Exists { .. } => false,
            Formula::Next(f) | Formula::WeakNext(f) => f.is_nnf(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Forall { .. } | Formula::Exists { .. } => true,
            Formula::True | Formula::False | Formula::Atom(_) => false,
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Finally(f)
            | Formula::Globally(f) => f.has_quantifier(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => a.has_quantifier() || b.has_quantifier(),
        }
    }

    /// Occurrences of temporal operators (Next, weak Next, Until, Release,
    /// and the derived Finally/Globally before expansion).
    pub fn temporal_op_count(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(f) => f.temporal_op_count(),
            Formula::Next(f) | Formula::WeakNext(f) | Formula::Finally(f) | Formula::Globally(f) => {
                1 + f.temporal_op_count()
            }
            Formula::Until(a, b) | Formula::Release(a, b) => {
                1 + a.temporal_op_count() + b.temporal_op_count()
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.temporal_op_count() + b.temporal_op_count()
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => body.temporal_op_count(),
        }
    }

    /// The distinct atoms of the formula.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::True | Formula::False => {}
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Finally(f)
            | Formula::Globally(f) => f.collect_atoms(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::Forall { body, .. } | Formula::Exists { body, .. } => body.collect_atoms(out),
        }
    }

    /// Substitute `value` for free occurrences of variable `var`.
    pub fn substitute(self: &Arc<Formula>, var: &str, value: &BitVec) -> Arc<Formula> {
        match &**self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => Arc::new(Formula::Atom(Atom {
                lhs: a.lhs.substitute(var, value),
                rel: a.rel,
                rhs: a.rhs.substitute(var, value),
                negated: a.negated,
            })),
            Formula::Not(f) => Formula::not(f.substitute(var, value)),
            Formula::And(a, b) => Formula::and(a.substitute(var, value), b.substitute(var, value)),
            Formula::Or(a, b) => Formula::or(a.substitute(var, value), b.substitute(var, value)),
            Formula::Implies(a, b) => {
                Formula::implies(a.substitute(var, value), b.substitute(var, value))
            }
            Formula::Next(f) => Formula::next(f.substitute(var, value)),
            Formula::WeakNext(f) => Formula::weak_next(f.substitute(var, value)),
            Formula::Until(a, b) => {
                Formula::until(a.substitute(var, value), b.substitute(var, value))
            }
            Formula::Release(a, b) => {
                Formula::release(a.substitute(var, value), b.substitute(var, value))
            }
            Formula::Finally(f) => Formula::finally(f.substitute(var, value)),
            Formula::Globally(f) => Formula::globally(f.substitute(var, value)),
            Formula::Forall { var: v, width, body } => {
                if **v == *var {
                    // Shadowed; free occurrences end here.
                    self.clone()
                } else {
                    Arc::new(Formula::Forall {
                        var: v.clone(),
                        width: *width,
                        body: body.substitute(var, value),
                    })
                }
            }
            Formula::Exists { var: v, width, body } => {
                if **v == *var {
                    self.clone()
                } else {
                    Arc::new(Formula::Exists {
                        var: v.clone(),
                        width: *width,
                        body: body.substitute(var, value),
                    })
                }
            }
        }
    }

    /// Variables occurring free in terms of the formula.
    pub fn free_vars(&self) -> BTreeSet<(Arc<str>, usize)> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free_vars(
        &self,
        bound: &mut BTreeSet<Arc<str>>,
        out: &mut BTreeSet<(Arc<str>, usize)>,
    ) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => {
                for term in [&a.lhs, &a.rhs] {
                    if let Some((name, width)) = term.free_var() {
                        if !bound.iter().any(|b| **b == *name) {
                            out.insert((Arc::from(name), width));
                        }
                    }
                }
            }
            Formula::Not(f)
            | Formula::Next(f)
            | Formula::WeakNext(f)
            | Formula::Finally(f)
            | Formula::Globally(f) => f.collect_free_vars(bound, out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Release(a, b) => {
                a.collect_free_vars(bound, out);
                b.collect_free_vars(bound, out);
            }
            Formula::Forall { var, body, .. } | Formula::Exists { var, body, .. } => {
                let fresh = bound.insert(var.clone());
                body.collect_free_vars(bound, out);
                if fresh {
                    bound.remove(var);
                }
            }
        }
    }
}

/// The disjunction a live Until obligation unfolds into.
pub fn until_expansion(u: &Arc<Formula>) -> Arc<Formula> {
    match &**u {
        Formula::Until(a, b) => Formula::or(b.clone(), Formula::and(a.clone(), Formula::next(u.clone()))),
        _ => panic!("until_expansion on non-Until formula"),
    }
}

/// The conjunction a live Release obligation unfolds into.
pub fn release_expansion(r: &Arc<Formula>) -> Arc<Formula> {
    match &**r {
        Formula::Release(a, b) => Formula::and(
            b.clone(),
            Formula::or(a.clone(), Formula::weak_next(r.clone())),
        ),
        _ => panic!("release_expansion on non-Release formula"),
    }
}

/// Rewrite into negation normal form. The input must be quantifier-free;
/// implications, derived temporal operators, and negations are eliminated,
/// leaving negation only on atom flags.
pub fn to_nnf(f: &Arc<Formula>) -> Result<Arc<Formula>, FormulaError> {
    if f.has_quantifier() {
        return Err(FormulaError::QuantifierPresent);
    }
    Ok(nnf(f, false))
}

fn nnf(f: &Arc<Formula>, neg: bool) -> Arc<Formula> {
    match &**f {
        Formula::True => {
            if neg {
                Formula::ff()
            } else {
                Formula::tt()
            }
        }
        Formula::False => {
            if neg {
                Formula::tt()
            } else {
                Formula::ff()
            }
        }
        Formula::Atom(a) => Arc::new(Formula::Atom(if neg { a.negate() } else { a.clone() })),
        Formula::Not(g) => nnf(g, !neg),
        Formula::And(a, b) => {
            if neg {
                Formula::or(nnf(a, true), nnf(b, true))
            } else {
                Formula::and(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Or(a, b) => {
            if neg {
                Formula::and(nnf(a, true), nnf(b, true))
            } else {
                Formula::or(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Implies(a, b) => {
            // a -> b == !a | b
            if neg {
                Formula::and(nnf(a, false), nnf(b, true))
            } else {
                Formula::or(nnf(a, true), nnf(b, false))
            }
        }
        Formula::Next(g) => {
            if neg {
                Formula::weak_next(nnf(g, true))
            } else {
                Formula::next(nnf(g, false))
            }
        }
        Formula::WeakNext(g) => {
            if neg {
                Formula::next(nnf(g, true))
            } else {
                Formula::weak_next(nnf(g, false))
            }
        }
        Formula::Until(a, b) => {
            if neg {
                Formula::release(nnf(a, true), nnf(b, true))
            } else {
                Formula::until(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Release(a, b) => {
            if neg {
                Formula::until(nnf(a, true), nnf(b, true))
            } else {
                Formula::release(nnf(a, false), nnf(b, false))
            }
        }
        Formula::Finally(g) => {
            // F g == true U g; !F g == false R !g.
            if neg {
                Formula::release(Formula::ff(), nnf(g, true))
            } else {
                Formula::until(Formula::tt(), nnf(g, false))
            }
        }
        Formula::Globally(g) => {
            // G g == false R g; !G g == true U !g.
            if neg {
                Formula::until(Formula::tt(), nnf(g, true))
            } else {
                Formula::release(Formula::ff(), nnf(g, false))
            }
        }
        Formula::Forall { .. } | Formula::Exists { .. } => {
            unreachable!("to_nnf rejects quantified formulas up front")
        }
    }
}

/// Which vectors a quantifier of width `k` ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuantifierDomain {
    /// Every vector of the quantified width.
    #[default]
    Full,
    /// Only declared vector constants of the quantified width, following
    /// the definition of quantification over a signature.
    Declared,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionConfig {
    pub domain: QuantifierDomain,
    /// Quantifiers wider than this are refused under the full domain.
    pub max_quantifier_width: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            domain: QuantifierDomain::Full,
            max_quantifier_width: 8,
        }
    }
}

/// Declared names a formula may reference: vector constants (used as
/// quantifier domains under the declared-only reading) and free variables
/// that synthesis will solve for.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    pub constants: Vec<(Arc<str>, BitVec)>,
    pub variables: Vec<(Arc<str>, usize)>,
}

impl Signature {
    fn constants_of_width(&self, width: usize) -> Vec<BitVec> {
        let mut values: Vec<BitVec> = self
            .constants
            .iter()
            .filter(|(_, b)| b.width() == width)
            .map(|(_, b)| *b)
            .collect();
        values.sort();
        values.dedup();
        values
    }

    fn declares_var(&self, name: &str, width: usize) -> bool {
        self.variables
            .iter()
            .any(|(n, w)| **n == *name && *w == width)
    }
}

/// Expand derived constructs that need a signature: quantifiers unfold
/// into finite conjunctions or disjunctions, then the result is rewritten
/// to negation normal form. Free variables must be declared in `sig`.
pub fn expand_derived(
    f: &Arc<Formula>,
    sig: &Signature,
    cfg: &ExpansionConfig,
) -> Result<Arc<Formula>, FormulaError> {
    let expanded = expand_quantifiers(f, sig, cfg)?;
    for (name, width) in expanded.free_vars() {
        if !sig.declares_var(&name, width) {
            return Err(FormulaError::UnboundVariable(name.to_string()));
        }
    }
    to_nnf(&expanded)
}

fn quantifier_domain(
    width: usize,
    sig: &Signature,
    cfg: &ExpansionConfig,
) -> Result<Vec<BitVec>, FormulaError> {
    match cfg.domain {
        QuantifierDomain::Full => {
            if width > cfg.max_quantifier_width {
                return Err(FormulaError::WidthLimit {
                    width,
                    limit: cfg.max_quantifier_width,
                });
            }
            (0..1u64 << width)
                .map(|d| BitVec::bin(d, width).map_err(FormulaError::from))
                .collect()
        }
        QuantifierDomain::Declared => Ok(sig.constants_of_width(width)),
    }
}

fn expand_quantifiers(
    f: &Arc<Formula>,
    sig: &Signature,
    cfg: &ExpansionConfig,
) -> Result<Arc<Formula>, FormulaError> {
    Ok(match &**f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(g) => Formula::not(expand_quantifiers(g, sig, cfg)?),
        Formula::And(a, b) => Formula::and(
            expand_quantifiers(a, sig, cfg)?,
            expand_quantifiers(b, sig, cfg)?,
        ),
        Formula::Or(a, b) => Formula::or(
            expand_quantifiers(a, sig, cfg)?,
            expand_quantifiers(b, sig, cfg)?,
        ),
        Formula::Implies(a, b) => Formula::implies(
            expand_quantifiers(a, sig, cfg)?,
            expand_quantifiers(b, sig, cfg)?,
        ),
        Formula::Next(g) => Formula::next(expand_quantifiers(g, sig, cfg)?),
        Formula::WeakNext(g) => Formula::weak_next(expand_quantifiers(g, sig, cfg)?),
        Formula::Until(a, b) => Formula::until(
            expand_quantifiers(a, sig, cfg)?,
            expand_quantifiers(b, sig, cfg)?,
        ),
        Formula::Release(a, b) => Formula::release(
            expand_quantifiers(a, sig, cfg)?,
            expand_quantifiers(b, sig, cfg)?,
        ),
        Formula::Finally(g) => Formula::finally(expand_quantifiers(g, sig, cfg)?),
        Formula::Globally(g) => Formula::globally(expand_quantifiers(g, sig, cfg)?),
        Formula::Forall { var, width, body } => {
            let body = expand_quantifiers(body, sig, cfg)?;
            let domain = quantifier_domain(*width, sig, cfg)?;
            Formula::conj(domain.iter().map(|b| body.substitute(var, b)))
        }
        Formula::Exists { var, width, body } => {
            let body = expand_quantifiers(body, sig, cfg)?;
            let domain = quantifier_domain(*width, sig, cfg)?;
            Formula::disj(domain.iter().map(|b| body.substitute(var, b)))
        }
    })
}

/// The subformula closure of an NNF formula: all subformulas, plus the
/// unfolding of every Until and Release and the unfolding's components.
pub fn subformulas(f: &Arc<Formula>) -> FormulaSet {
    let mut out = FormulaSet::new();
    collect_sub(f, &mut out);
    out
}

fn collect_sub(f: &Arc<Formula>, out: &mut FormulaSet) {
    if !out.insert(f.clone()) {
        return;
    }
    match &**f {
        Formula::True | Formula::False | Formula::Atom(_) => {}
        Formula::Next(g) | Formula::WeakNext(g) => collect_sub(g, out),
        Formula::And(a, b) | Formula::Or(a, b) => {
            collect_sub(a, out);
            collect_sub(b, out);
        }
        Formula::Until(a, b) => {
            collect_sub(a, out);
            collect_sub(b, out);
            let exp = until_expansion(f);
            collect_sub(&exp, out);
        }
        Formula::Release(a, b) => {
            collect_sub(a, out);
            collect_sub(b, out);
            let exp = release_expansion(f);
            collect_sub(&exp, out);
        }
        Formula::Not(_)
        | Formula::Implies(..)
        | Formula::Finally(_)
        | Formula::Globally(_)
        | Formula::Forall { .. }
        | Formula::Exists { .. } => {
            panic!("subformulas expects negation normal form, got {f}")
        }
    }
}

/// All minimal proper closures of a set of NNF formulas.
///
/// A proper closure is a superset meeting the five conditions: conjuncts
/// split, disjuncts choose a side, Untils and Releases contain their
/// unfoldings. Non-minimal closures accept exactly when some minimal one
/// does, so only minimal ones are returned; results are deduplicated and
/// deterministically ordered.
pub fn proper_closures(gamma: &FormulaSet) -> Vec<FormulaSet> {
    let mut results: BTreeSet<FormulaSet> = BTreeSet::new();
    extend_closure(gamma.clone(), &mut results);
    let list: Vec<FormulaSet> = results.into_iter().collect();
    // Keep only minimal sets.
    let minimal: Vec<FormulaSet> = list
        .iter()
        .filter(|s| {
            !list
                .iter()
                .any(|t| t.len() < s.len() && t.is_subset(s))
        })
        .cloned()
        .collect();
    minimal
}

fn extend_closure(cur: FormulaSet, results: &mut BTreeSet<FormulaSet>) {
    // Find the first unmet obligation in deterministic order.
    for f in cur.iter() {
        match &**f {
            Formula::And(a, b) => {
                if !cur.contains(a) || !cur.contains(b) {
                    let mut next = cur.clone();
                    next.insert(a.clone());
                    next.insert(b.clone());
                    extend_closure(next, results);
                    return;
                }
            }
            Formula::Or(a, b) => {
                if !cur.contains(a) && !cur.contains(b) {
                    for side in [a, b] {
                        let mut next = cur.clone();
                        next.insert(side.clone());
                        extend_closure(next, results);
                    }
                    return;
                }
            }
            Formula::Until(..) => {
                let exp = until_expansion(f);
                if !cur.contains(&exp) {
                    let mut next = cur.clone();
                    next.insert(exp);
                    extend_closure(next, results);
                    return;
                }
            }
            Formula::Release(..) => {
                let exp = release_expansion(f);
                if !cur.contains(&exp) {
                    let mut next = cur.clone();
                    next.insert(exp);
                    extend_closure(next, results);
                    return;
                }
            }
            _ => {}
        }
    }
    results.insert(cur);
}

const PREC_IMPLIES: u8 = 0;
const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNTIL: u8 = 3;
const PREC_UNARY: u8 = 4;

impl Formula {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = match self {
            Formula::True | Formula::False | Formula::Atom(_) => PREC_UNARY,
            Formula::Not(_)
            | Formula::Next(_)
            | Formula::WeakNext(_)
            | Formula::Finally(_)
            | Formula::Globally(_) => PREC_UNARY,
            Formula::Until(..) | Formula::Release(..) => PREC_UNTIL,
            Formula::And(..) => PREC_AND,
            Formula::Or(..) => PREC_OR,
            Formula::Implies(..) | Formula::Forall { .. } | Formula::Exists { .. } => PREC_IMPLIES,
        };
        let parens = prec < parent;
        if parens {
            f.write_str("(")?;
        }
        match self {
            Formula::True => f.write_str("true")?,
            Formula::False => f.write_str("false")?,
            Formula::Atom(a) => write!(f, "{a}")?,
            Formula::Not(g) => {
                f.write_str("!")?;
                g.fmt_prec(f, PREC_UNARY)?;
            }
            Formula::Next(g) => {
                f.write_str("X ")?;
                g.fmt_prec(f, PREC_UNARY)?;
            }
            Formula::WeakNext(g) => {
                f.write_str("WX ")?;
                g.fmt_prec(f, PREC_UNARY)?;
            }
            Formula::Finally(g) => {
                f.write_str("F ")?;
                g.fmt_prec(f, PREC_UNARY)?;
            }
            Formula::Globally(g) => {
                f.write_str("G ")?;
                g.fmt_prec(f, PREC_UNARY)?;
            }
            Formula::And(a, b) => {
                a.fmt_prec(f, PREC_AND)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, PREC_AND + 1)?;
            }
            Formula::Or(a, b) => {
                a.fmt_prec(f, PREC_OR)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, PREC_OR + 1)?;
            }
            Formula::Implies(a, b) => {
                a.fmt_prec(f, PREC_IMPLIES + 1)?;
                f.write_str(" -> ")?;
                b.fmt_prec(f, PREC_IMPLIES)?;
            }
            Formula::Until(a, b) => {
                a.fmt_prec(f, PREC_UNTIL + 1)?;
                f.write_str(" U ")?;
                b.fmt_prec(f, PREC_UNTIL + 1)?;
            }
            Formula::Release(a, b) => {
                a.fmt_prec(f, PREC_UNTIL + 1)?;
                f.write_str(" R ")?;
                b.fmt_prec(f, PREC_UNTIL + 1)?;
            }
            Formula::Forall { var, width, body } => {
                write!(f, "forall {var}:{width} . ")?;
                body.fmt_prec(f, PREC_IMPLIES)?;
            }
            Formula::Exists { var, width, body } => {
                write!(f, "exists {var}:{width} . ")?;
                body.fmt_prec(f, PREC_IMPLIES)?;
            }
        }
        if parens {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Formula({self})")
    }
}
