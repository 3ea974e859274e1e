//! Terms: vectors transformed by fixed functions, symbolic blocks, and
//! deferred block applications.
//!
//! A term is a base (a vector constant or a named vector variable) under a
//! stack of links, each link a function preceded by some number of pending
//! placeholders; trailing placeholders sit in `outer`. A placeholder
//! stands for a network block that has not been applied yet: evaluated at
//! position `i`, a placeholder with `c` placeholders beneath it denotes
//! block `f_{ i + c }`, and blocks past the end of the network act as
//! identities.
//!
//! Terms are kept in canonical form: a fixed function applied directly to
//! a constant base folds into the base, and two adjacent fixed functions
//! with no placeholder between them compose into one. Under this
//! normalization, `apply` (instantiate the innermost placeholder) agrees
//! with the two case splits of the source construction, and
//! `len(t.apply(f)) == len(t) - 1` always holds.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{BitVec, BitsError, BnnModel, BoolFn};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("function {name} expects {want}-bit input, term has width {have}")]
    NotApplicable {
        name: String,
        want: usize,
        have: usize,
    },
    #[error("term is placeholder-free; nothing to instantiate")]
    NoPlaceholder,
    #[error("collapse requires adjacent widths to match: {0}")]
    IncompatibleWidths(BitsError),
    #[error("term contains symbolic block @{0} and cannot be evaluated")]
    SymbolicBlock(usize),
    #[error("term contains free variable {0} and cannot be evaluated")]
    FreeVariable(String),
    #[error("bit vector operation failed: {0}")]
    Bits(#[from] BitsError),
}

/// A named lookup-table function, shared by reference.
///
/// Equality and ordering consider the name and the table; two identically
/// named declarations of different tables compare unequal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FixedFn {
    name: Arc<str>,
    func: Arc<BoolFn>,
}

impl FixedFn {
    pub fn new(name: impl Into<Arc<str>>, func: Arc<BoolFn>) -> FixedFn {
        FixedFn {
            name: name.into(),
            func,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn func(&self) -> &Arc<BoolFn> {
        &self.func
    }

    /// `self ∘ inner` under a synthesized name.
    fn compose(&self, inner: &FixedFn) -> Result<FixedFn, BitsError> {
        let func = self.func.compose(&inner.func)?;
        Ok(FixedFn {
            name: format!("{}.{}", self.name, inner.name).into(),
            func: Arc::new(func),
        })
    }
}

impl fmt::Debug for FixedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}->{}", self.name, self.func.in_width(), self.func.out_width())
    }
}

/// A function position in a term: a fixed table or a symbolic block.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FnRef {
    Fixed(FixedFn),
    /// Block variable, identified by its network index.
    Block(usize),
}

impl FnRef {
    pub fn in_width(&self) -> Option<usize> {
        match self {
            FnRef::Fixed(ff) => Some(ff.func.in_width()),
            FnRef::Block(_) => None,
        }
    }

    pub fn out_width(&self) -> Option<usize> {
        match self {
            FnRef::Fixed(ff) => Some(ff.func.out_width()),
            FnRef::Block(_) => None,
        }
    }

    fn display_name(&self) -> String {
        match self {
            FnRef::Fixed(ff) => ff.name.to_string(),
            FnRef::Block(i) => format!("@{i}"),
        }
    }
}

/// The innermost part of a term.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TermBase {
    Const(BitVec),
    Var { name: Arc<str>, width: usize },
}

impl TermBase {
    pub fn width(&self) -> usize {
        match self {
            TermBase::Const(b) => b.width(),
            TermBase::Var { width, .. } => *width,
        }
    }
}

/// One function application, preceded by `pending` placeholders.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Link {
    pub pending: usize,
    pub func: FnRef,
}

/// A term in canonical form. See the module documentation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    base: TermBase,
    links: Vec<Link>,
    outer: usize,
}

impl Term {
    pub fn constant(b: BitVec) -> Term {
        Term {
            base: TermBase::Const(b),
            links: Vec::new(),
            outer: 0,
        }
    }

    pub fn var(name: impl Into<Arc<str>>, width: usize) -> Term {
        Term {
            base: TermBase::Var {
                name: name.into(),
                width,
            },
            links: Vec::new(),
            outer: 0,
        }
    }

    /// `▷^k self`: defer `k` more block applications on top.
    pub fn defer(mut self, k: usize) -> Term {
        self.outer += k;
        self
    }

    /// `f(self)`: apply a function on top of the whole term. Pending outer
    /// placeholders become the new link's gap. Errors if the function's
    /// input width is known not to match the term's top width.
    pub fn wrap(mut self, func: FnRef) -> Result<Term, TermError> {
        if let (Some(top), Some(want)) = (self.top_width(), func.in_width()) {
            if top != want {
                return Err(TermError::NotApplicable {
                    name: func.display_name(),
                    want,
                    have: top,
                });
            }
        }
        self.links.push(Link {
            pending: self.outer,
            func,
        });
        self.outer = 0;
        self.normalize()?;
        Ok(self)
    }

    pub fn base(&self) -> &TermBase {
        &self.base
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn outer(&self) -> usize {
        self.outer
    }

    /// Number of placeholders.
    pub fn len(&self) -> usize {
        self.links.iter().map(|l| l.pending).sum::<usize>() + self.outer
    }

    /// True when the term has no placeholders left.
    pub fn is_saturated(&self) -> bool {
        self.len() == 0
    }

    /// A saturated constant-only term is just a vector.
    pub fn as_const(&self) -> Option<&BitVec> {
        match (&self.base, self.links.is_empty(), self.outer) {
            (TermBase::Const(b), true, 0) => Some(b),
            _ => None,
        }
    }

    pub fn contains_block(&self) -> bool {
        self.links.iter().any(|l| matches!(l.func, FnRef::Block(_)))
    }

    pub fn block_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.links.iter().filter_map(|l| match l.func {
            FnRef::Block(i) => Some(i),
            FnRef::Fixed(_) => None,
        })
    }

    pub fn free_var(&self) -> Option<(&str, usize)> {
        match &self.base {
            TermBase::Var { name, width } => Some((name, *width)),
            TermBase::Const(_) => None,
        }
    }

    /// Replace a variable base named `name` with a constant.
    pub fn substitute(&self, name: &str, value: &BitVec) -> Term {
        match &self.base {
            TermBase::Var { name: n, .. } if **n == *name => Term {
                base: TermBase::Const(*value),
                links: self.links.clone(),
                outer: self.outer,
            }
            .normalized(),
            _ => self.clone(),
        }
    }

    /// Width at the top of the term, when statically known. A fixed
    /// function pins the width to its output regardless of what sits
    /// below; a symbolic block or a trailing placeholder leaves it open.
    pub fn top_width(&self) -> Option<usize> {
        let mut w = Some(self.base.width());
        for link in &self.links {
            w = match &link.func {
                FnRef::Fixed(ff) => Some(ff.func.out_width()),
                FnRef::Block(_) => None,
            };
        }
        if self.outer > 0 {
            w = None;
        }
        w
    }

    /// Width directly beneath link `idx` (or beneath the outer run when
    /// `idx == links.len()`), when statically known.
    fn width_below(&self, idx: usize) -> Option<usize> {
        let mut w = Some(self.base.width());
        for link in &self.links[..idx] {
            w = match &link.func {
                FnRef::Fixed(ff) => Some(ff.func.out_width()),
                FnRef::Block(_) => None,
            };
        }
        w
    }

    /// Instantiate the innermost placeholder with `func`. Placeholder-free
    /// terms are returned unchanged. Errors if a fixed `func` is known not
    /// to fit at the insertion point, or (via normalization) composes with
    /// an incompatible function above.
    pub fn apply(&self, func: &FnRef) -> Result<Term, TermError> {
        if self.len() == 0 {
            return Ok(self.clone());
        }
        let mut t = self.clone();
        let gap = t.links.iter().position(|l| l.pending > 0);
        let idx = gap.unwrap_or(t.links.len());
        if let (Some(have), Some(want)) = (t.width_below(idx), func.in_width()) {
            if have != want {
                return Err(TermError::NotApplicable {
                    name: func.display_name(),
                    want,
                    have,
                });
            }
        }
        match gap {
            Some(j) => {
                t.links[j].pending -= 1;
                t.links.insert(
                    j,
                    Link {
                        pending: 0,
                        func: func.clone(),
                    },
                );
            }
            None => {
                t.outer -= 1;
                t.links.push(Link {
                    pending: 0,
                    func: func.clone(),
                });
            }
        }
        t.normalize()?;
        Ok(t)
    }

    /// Split a saturated term into its outermost function and the term
    /// below it. `None` for a bare base, or while applications are still
    /// pending. The inner term of a normalized term is itself normalized.
    pub fn peel(&self) -> Option<(Term, &FnRef)> {
        if self.outer != 0 {
            return None;
        }
        let last = self.links.last()?;
        if last.pending != 0 {
            return None;
        }
        let inner = Term {
            base: self.base.clone(),
            links: self.links[..self.links.len() - 1].to_vec(),
            outer: 0,
        };
        Some((inner, &last.func))
    }

    /// Drop every placeholder (instantiate each with the identity) and
    /// renormalize. Errors when dropping a placeholder exposes a width
    /// mismatch between adjacent fixed functions.
    pub fn collapse(&self) -> Result<Term, TermError> {
        let mut t = self.clone();
        for link in &mut t.links {
            link.pending = 0;
        }
        t.outer = 0;
        // Check the now-adjacent widths where they are known.
        let mut w = Some(t.base.width());
        for link in &t.links {
            match &link.func {
                FnRef::Fixed(ff) => {
                    if let Some(have) = w {
                        if have != ff.func.in_width() {
                            return Err(TermError::IncompatibleWidths(BitsError::WidthMismatch(
                                have,
                                ff.func.in_width(),
                            )));
                        }
                    }
                    w = Some(ff.func.out_width());
                }
                FnRef::Block(_) => w = None,
            }
        }
        t.normalize()?;
        Ok(t)
    }

    /// Collapse and evaluate to a concrete vector. Errors when symbolic
    /// blocks or free variables remain.
    pub fn collapse_value(&self) -> Result<BitVec, TermError> {
        let t = self.collapse()?;
        match t.as_const() {
            Some(b) => Ok(*b),
            None => match (&t.base, t.links.iter().find(|l| matches!(l.func, FnRef::Block(_)))) {
                (_, Some(link)) => match link.func {
                    FnRef::Block(i) => Err(TermError::SymbolicBlock(i)),
                    FnRef::Fixed(_) => unreachable!(),
                },
                (TermBase::Var { name, .. }, _) => Err(TermError::FreeVariable(name.to_string())),
                _ => unreachable!("collapsed constant term must normalize to its value"),
            },
        }
    }

    /// Evaluate at position `pos` of `model`. A placeholder with `c`
    /// placeholders beneath it denotes block `pos + c`; blocks at or past
    /// the network length are identities. Errors on symbolic blocks and
    /// free variables.
    pub fn eval(&self, model: &BnnModel, pos: usize) -> Result<BitVec, TermError> {
        let mut cur = match &self.base {
            TermBase::Const(b) => *b,
            TermBase::Var { name, .. } => return Err(TermError::FreeVariable(name.to_string())),
        };
        let mut consumed = 0usize;
        for link in &self.links {
            for _ in 0..link.pending {
                cur = model.run_range(&cur, pos + consumed, pos + consumed + 1)?;
                consumed += 1;
            }
            match &link.func {
                FnRef::Fixed(ff) => cur = ff.func.apply(&cur)?,
                FnRef::Block(i) => return Err(TermError::SymbolicBlock(*i)),
            }
        }
        for _ in 0..self.outer {
            cur = model.run_range(&cur, pos + consumed, pos + consumed + 1)?;
            consumed += 1;
        }
        Ok(cur)
    }

    /// Render with block indices shifted down by `shift`, for comparing
    /// nodes up to a change of block variables.
    pub fn shifted_repr(&self, shift: usize) -> String {
        self.render(shift, true)
    }

    fn render(&self, shift: usize, var_widths: bool) -> String {
        let mut s = match &self.base {
            TermBase::Const(b) => format!("0b{b}"),
            TermBase::Var { name, width } => {
                if var_widths {
                    format!("{name}:{width}")
                } else {
                    name.to_string()
                }
            }
        };
        for link in &self.links {
            s = format!(
                "{}({}{s})",
                link_name_shifted(&link.func, shift),
                placeholder_prefix(link.pending)
            );
        }
        if self.outer > 0 {
            s = format!("{}{}", placeholder_prefix(self.outer), s);
        }
        s
    }

    fn normalized(mut self) -> Term {
        self.normalize()
            .expect("normalizing a substituted well-formed term cannot fail");
        self
    }

    /// Restore canonical form: fold fixed functions applied directly to a
    /// constant base, compose adjacent fixed functions with no gap.
    fn normalize(&mut self) -> Result<(), TermError> {
        loop {
            // Fold the bottom link into a constant base.
            if let TermBase::Const(b) = &self.base {
                if let Some(Link {
                    pending: 0,
                    func: FnRef::Fixed(ff),
                }) = self.links.first()
                {
                    if b.width() != ff.func.in_width() {
                        return Err(TermError::NotApplicable {
                            name: ff.name.to_string(),
                            want: ff.func.in_width(),
                            have: b.width(),
                        });
                    }
                    let folded = ff.func.apply(b)?;
                    self.base = TermBase::Const(folded);
                    self.links.remove(0);
                    continue;
                }
            }
            // Compose one adjacent fixed-fixed pair with no gap.
            let mut composed = None;
            for i in 1..self.links.len() {
                if self.links[i].pending == 0 {
                    if let (FnRef::Fixed(inner), FnRef::Fixed(upper)) =
                        (&self.links[i - 1].func, &self.links[i].func)
                    {
                        if upper.func.in_width() != inner.func.out_width() {
                            return Err(TermError::NotApplicable {
                                name: upper.name.to_string(),
                                want: upper.func.in_width(),
                                have: inner.func.out_width(),
                            });
                        }
                        composed = Some((i, upper.compose(inner)?));
                        break;
                    }
                }
            }
            match composed {
                Some((i, merged)) => {
                    self.links[i - 1].func = FnRef::Fixed(merged);
                    self.links.remove(i);
                }
                None => return Ok(()),
            }
        }
    }
}

fn placeholder_prefix(k: usize) -> String {
    match k {
        0 => String::new(),
        1 => ">> ".to_string(),
        _ => format!(">>^{k} "),
    }
}

fn link_name_shifted(func: &FnRef, shift: usize) -> String {
    match func {
        FnRef::Fixed(ff) => ff.name.to_string(),
        FnRef::Block(i) => format!("@{}", *i as i64 - shift as i64),
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(0, false))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Term({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVec;

    fn fixed(name: &str, f: BoolFn) -> FnRef {
        FnRef::Fixed(FixedFn::new(name, Arc::new(f)))
    }

    fn bv(s: &str) -> BitVec {
        BitVec::parse_bits(s).unwrap()
    }

    #[test]
    fn apply_decrements_deep_run() {
        // ▷²b with f: the innermost placeholder folds f(b) into the base.
        let f = fixed("f", BoolFn::new(2, 2, vec![3, 2, 1, 0]).unwrap());
        let t = Term::constant(bv("01")).defer(2);
        assert_eq!(t.len(), 2);
        let applied = t.apply(&f).unwrap();
        assert_eq!(applied.len(), 1);
        assert_eq!(applied.base(), &TermBase::Const(bv("10"))); // f(01) = 2
        assert!(applied.links().is_empty());
        assert_eq!(applied.outer(), 1);
    }

    #[test]
    fn apply_composes_through_single_gap() {
        // ▷¹g(▷¹b): applying f fills the inner gap, f(b) folds, then g
        // folds over the new constant, leaving ▷¹b'' with b'' = g(f(b)).
        let f = fixed("f", BoolFn::new(2, 2, vec![3, 2, 1, 0]).unwrap());
        let g = fixed("g", BoolFn::new(2, 2, vec![1, 2, 3, 0]).unwrap());
        let t = Term::constant(bv("01"))
            .defer(1)
            .wrap(g.clone())
            .unwrap()
            .defer(1);
        assert_eq!(t.len(), 2);
        let applied = t.apply(&f).unwrap();
        assert_eq!(applied.len(), 1);
        // f(01)=10, g(10)=11
        assert_eq!(applied.base(), &TermBase::Const(bv("11")));
        assert_eq!(applied.outer(), 1);
    }

    #[test]
    fn apply_keeps_symbolic_blocks() {
        let t = Term::constant(bv("01")).defer(2);
        let once = t.apply(&FnRef::Block(0)).unwrap();
        assert_eq!(once.len(), 1);
        assert_eq!(once.links().len(), 1);
        let twice = once.apply(&FnRef::Block(1)).unwrap();
        assert_eq!(twice.len(), 0);
        assert!(twice.is_saturated());
        assert_eq!(twice.block_indices().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn apply_on_saturated_term_is_identity() {
        let t = Term::constant(bv("01"));
        let f = fixed("f", BoolFn::new(2, 2, vec![0, 1, 2, 3]).unwrap());
        assert_eq!(t.apply(&f).unwrap(), t);
    }

    #[test]
    fn apply_rejects_domain_mismatch() {
        let f = fixed("f", BoolFn::new(3, 2, vec![0; 8]).unwrap());
        let t = Term::constant(bv("01")).defer(1);
        assert!(matches!(
            t.apply(&f),
            Err(TermError::NotApplicable { want: 3, have: 2, .. })
        ));
    }

    #[test]
    fn apply_rejects_range_mismatch_with_function_above() {
        // ▷¹g(▷¹b) where ran(f) != dom(g).
        let f = fixed("f", BoolFn::new(2, 3, vec![0; 4]).unwrap());
        let g = fixed("g", BoolFn::new(2, 2, vec![0, 1, 2, 3]).unwrap());
        let t = Term::constant(bv("01")).defer(1).wrap(g).unwrap().defer(1);
        assert!(t.apply(&f).is_err());
    }

    #[test]
    fn wrap_transfers_outer_to_gap() {
        let g = fixed("g", BoolFn::new(2, 2, vec![1, 2, 3, 0]).unwrap());
        let t = Term::constant(bv("01")).defer(2).wrap(g).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.outer(), 0);
        assert_eq!(t.links().len(), 1);
        assert_eq!(t.links()[0].pending, 2);
    }

    #[test]
    fn wrap_folds_constant_application() {
        let g = fixed("g", BoolFn::new(2, 2, vec![1, 2, 3, 0]).unwrap());
        let t = Term::constant(bv("01")).wrap(g).unwrap();
        assert_eq!(t.as_const(), Some(&bv("10")));
    }

    #[test]
    fn collapse_drops_placeholders() {
        let t = Term::constant(bv("01")).defer(2);
        assert_eq!(t.collapse_value().unwrap(), bv("01"));
        let g = fixed("g", BoolFn::new(2, 2, vec![1, 2, 3, 0]).unwrap());
        let t = Term::constant(bv("01")).defer(1).wrap(g).unwrap().defer(1);
        // Collapse: g(01) = 10.
        assert_eq!(t.collapse_value().unwrap(), bv("10"));
    }

    #[test]
    fn collapse_detects_width_mismatch() {
        // g expects 3 bits but the collapsed base has 2.
        let g = fixed("g", BoolFn::new(3, 2, vec![0; 8]).unwrap());
        let t = Term::constant(bv("01")).defer(1).wrap(g).unwrap();
        assert!(matches!(t.collapse(), Err(TermError::IncompatibleWidths(_))));
    }

    #[test]
    fn collapse_value_reports_symbolic_parts() {
        let t = Term::constant(bv("01")).defer(1);
        let t = t.apply(&FnRef::Block(0)).unwrap();
        assert_eq!(t.collapse_value(), Err(TermError::SymbolicBlock(0)));
        let v = Term::var("x", 2);
        assert!(matches!(
            v.collapse_value(),
            Err(TermError::FreeVariable(_))
        ));
    }

    #[test]
    fn eval_uses_consecutive_blocks_from_position() {
        // Model: f0 negates both bits, f1 rotates.
        let f0 = BoolFn::new(2, 2, vec![3, 2, 1, 0]).unwrap();
        let f1 = BoolFn::new(2, 2, vec![0, 2, 1, 3]).unwrap();
        let model = BnnModel::new(vec![f0, f1]).unwrap();
        let t = Term::constant(bv("01")).defer(2);
        // f1(f0(01)) = f1(10) = 01
        assert_eq!(t.eval(&model, 0).unwrap(), bv("01"));
        // At position 1 only f1 applies, then identity padding.
        assert_eq!(t.eval(&model, 1).unwrap().dec(), 2);
        // At position 2 both placeholders are identities.
        assert_eq!(t.eval(&model, 2).unwrap(), bv("01"));
    }

    #[test]
    fn eval_interleaved_function_keeps_block_sequence() {
        // ▷¹g(▷¹a) at position 0 must evaluate to f1(g(f0(a))): the outer
        // placeholder denotes the next unconsumed block, not a slot
        // shifted by the fixed function in between.
        let f0 = BoolFn::new(2, 2, vec![1, 0, 3, 2]).unwrap();
        let f1 = BoolFn::new(2, 2, vec![2, 3, 0, 1]).unwrap();
        let g = fixed("g", BoolFn::new(2, 2, vec![0, 2, 1, 3]).unwrap());
        let model = BnnModel::new(vec![f0.clone(), f1.clone()]).unwrap();
        let t = Term::constant(bv("01")).defer(1).wrap(g.clone()).unwrap().defer(1);
        let direct = t.eval(&model, 0).unwrap();
        let a = bv("01");
        let expect = f1.apply(
            &match &g {
                FnRef::Fixed(ff) => ff.func.apply(&f0.apply(&a).unwrap()).unwrap(),
                _ => unreachable!(),
            },
        )
        .unwrap();
        assert_eq!(direct, expect);
    }

    #[test]
    fn eval_agrees_with_apply_chain() {
        // Theorem-style exchange: eval(t, i) == eval(t.apply(block_i), i+1)
        // for every term here, including nested gaps.
        let f0 = BoolFn::new(2, 2, vec![1, 0, 3, 2]).unwrap();
        let f1 = BoolFn::new(2, 2, vec![2, 3, 0, 1]).unwrap();
        let g = fixed("g", BoolFn::new(2, 2, vec![0, 2, 1, 3]).unwrap());
        let model = BnnModel::new(vec![f0.clone(), f1]).unwrap();
        let terms = vec![
            Term::constant(bv("01")).defer(2),
            Term::constant(bv("10")).defer(1).wrap(g.clone()).unwrap().defer(1),
            Term::constant(bv("11")).defer(1).wrap(g).unwrap(),
        ];
        let block0 = fixed("f0", f0);
        for t in terms {
            let lhs = t.eval(&model, 0).unwrap();
            let rhs = t.apply(&block0).unwrap().eval(&model, 1).unwrap();
            assert_eq!(lhs, rhs, "term {t}");
        }
    }

    #[test]
    fn substitution_folds() {
        let g = fixed("g", BoolFn::new(2, 2, vec![1, 2, 3, 0]).unwrap());
        let t = Term::var("x", 2).wrap(g).unwrap();
        assert!(t.free_var().is_some());
        let s = t.substitute("x", &bv("01"));
        assert_eq!(s.as_const(), Some(&bv("10")));
        let unrelated = t.substitute("y", &bv("01"));
        assert_eq!(unrelated, t);
    }

    #[test]
    fn display_roundtrip_shapes() {
        let g = fixed("g", BoolFn::new(2, 2, vec![1, 2, 3, 0]).unwrap());
        let t = Term::var("x", 2).defer(1).wrap(g).unwrap().defer(2);
        assert_eq!(t.to_string(), ">>^2 g(>> x)");
        assert_eq!(t.shifted_repr(0), ">>^2 g(>> x:2)");
        let c = Term::constant(bv("011")).defer(1);
        assert_eq!(c.to_string(), ">> 0b011");
    }
}
