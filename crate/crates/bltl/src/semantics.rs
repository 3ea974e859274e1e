//! Direct satisfaction of formulas by a network, by structural recursion
//! on the formula and explicit enumeration of positions.
//!
//! This is the reference semantics the automaton and tableau are tested
//! against. Positions range over `0..=n` for a network of `n` blocks;
//! `X ψ` holds at `i` iff `i < n` and ψ holds at `i+1`, weak next holds
//! at `i` iff `i = n` or ψ holds at `i+1`, and Until/Release witnesses
//! range over `[i, n]`.

use std::sync::Arc;

use thiserror::Error;

use crate::bits::{BnnModel, BitsError, VectorOrder};
use crate::formula::{ExpansionConfig, Formula, FormulaError, Signature};
use crate::term::TermError;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("position {pos} is out of range for a {len}-block network")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Bits(#[from] BitsError),
}

/// Evaluation context: how orders are read and how quantifiers range.
#[derive(Debug, Clone, Default)]
pub struct EvalContext {
    pub order: VectorOrder,
    pub sig: Signature,
    pub expansion: ExpansionConfig,
}

impl EvalContext {
    pub fn with_order(order: VectorOrder) -> EvalContext {
        EvalContext {
            order,
            ..Default::default()
        }
    }
}

/// `N, pos ⊨ f` under integer order with full quantifier domains.
pub fn satisfies(
    model: &BnnModel,
    f: &Arc<Formula>,
    pos: usize,
) -> Result<bool, SemanticsError> {
    satisfies_with(model, f, pos, &EvalContext::default())
}

/// `N, pos ⊨ f` under an explicit evaluation context. Handles the full
/// surface syntax, including negation, implication, derived temporal
/// operators, and quantifiers.
pub fn satisfies_with(
    model: &BnnModel,
    f: &Arc<Formula>,
    pos: usize,
    ctx: &EvalContext,
) -> Result<bool, SemanticsError> {
    let n = model.len();
    if pos > n {
        return Err(SemanticsError::PositionOutOfRange { pos, len: n });
    }
    Ok(match &**f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => {
            let l = a.lhs.eval(model, pos)?;
            let r = a.rhs.eval(model, pos)?;
            l.compare(a.rel, &r, ctx.order)? != a.negated
        }
        Formula::Not(g) => !satisfies_with(model, g, pos, ctx)?,
        Formula::And(a, b) => {
            satisfies_with(model, a, pos, ctx)? && satisfies_with(model, b, pos, ctx)?
        }
        Formula::Or(a, b) => {
            satisfies_with(model, a, pos, ctx)? || satisfies_with(model, b, pos, ctx)?
        }
        Formula::Implies(a, b) => {
            !satisfies_with(model, a, pos, ctx)? || satisfies_with(model, b, pos, ctx)?
        }
        Formula::Next(g) => pos < n && satisfies_with(model, g, pos + 1, ctx)?,
        Formula::WeakNext(g) => pos == n || satisfies_with(model, g, pos + 1, ctx)?,
        Formula::Until(a, b) => {
            let mut holds = false;
            for j in pos..=n {
                if satisfies_with(model, b, j, ctx)? {
                    holds = true;
                    break;
                }
                if !satisfies_with(model, a, j, ctx)? {
                    break;
                }
            }
            holds
        }
        Formula::Release(a, b) => {
            let mut holds = true;
            for j in pos..=n {
                if !satisfies_with(model, b, j, ctx)? {
                    holds = false;
                    break;
                }
                if satisfies_with(model, a, j, ctx)? {
                    break;
                }
            }
            holds
        }
        Formula::Finally(g) => {
            let mut holds = false;
            for j in pos..=n {
                if satisfies_with(model, g, j, ctx)? {
                    holds = true;
                    break;
                }
            }
            holds
        }
        Formula::Globally(g) => {
            let mut holds = true;
            for j in pos..=n {
                if !satisfies_with(model, g, j, ctx)? {
                    holds = false;
                    break;
                }
            }
            holds
        }
        Formula::Forall { var, width, body } => {
            let domain = quantifier_values(*width, ctx)?;
            let mut holds = true;
            for b in domain {
                if !satisfies_with(model, &body.substitute(var, &b), pos, ctx)? {
                    holds = false;
                    break;
                }
            }
            holds
        }
        Formula::Exists { var, width, body } => {
            let domain = quantifier_values(*width, ctx)?;
            let mut holds = false;
            for b in domain {
                if satisfies_with(model, &body.substitute(var, &b), pos, ctx)? {
                    holds = true;
                    break;
                }
            }
            holds
        }
    })
}

fn quantifier_values(
    width: usize,
    ctx: &EvalContext,
) -> Result<Vec<crate::bits::BitVec>, SemanticsError> {
    use crate::formula::QuantifierDomain;
    match ctx.expansion.domain {
        QuantifierDomain::Full => {
            if width > ctx.expansion.max_quantifier_width {
                return Err(SemanticsError::Formula(FormulaError::WidthLimit {
                    width,
                    limit: ctx.expansion.max_quantifier_width,
                }));
            }
            (0..1u64 << width)
                .map(|d| crate::bits::BitVec::bin(d, width).map_err(SemanticsError::from))
                .collect()
        }
        QuantifierDomain::Declared => {
            let mut values: Vec<crate::bits::BitVec> = ctx
                .sig
                .constants
                .iter()
                .filter(|(_, b)| b.width() == width)
                .map(|(_, b)| *b)
                .collect();
            values.sort();
            values.dedup();
            Ok(values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{BitVec, BoolFn, Relation};
    use crate::formula::to_nnf;
    use crate::term::Term;

    fn bv(s: &str) -> BitVec {
        BitVec::parse_bits(s).unwrap()
    }

    fn two_block_model() -> BnnModel {
        // f0 swaps halves of the value order, f1 is a permutation.
        let f0 = BoolFn::new(2, 2, vec![2, 3, 0, 1]).unwrap();
        let f1 = BoolFn::new(2, 2, vec![1, 0, 3, 2]).unwrap();
        BnnModel::new(vec![f0, f1]).unwrap()
    }

    #[test]
    fn atom_with_placeholders() {
        let model = two_block_model();
        // >>^2 01 = f1(f0(01)) = f1(11) = 10
        let f = Formula::atom(
            Term::constant(bv("01")).defer(2),
            Relation::Eq,
            Term::constant(bv("10")),
        );
        assert!(satisfies(&model, &f, 0).unwrap());
        // At position 1, >>^2 means f1 then identity: f1(01) = 00.
        let g = Formula::atom(
            Term::constant(bv("01")).defer(2),
            Relation::Eq,
            Term::constant(bv("00")),
        );
        assert!(satisfies(&model, &g, 1).unwrap());
    }

    #[test]
    fn next_is_strict_weak_next_is_not() {
        let model = two_block_model(); // n = 2
        let t = Formula::tt();
        let x = Formula::next(t.clone());
        assert!(satisfies(&model, &x, 0).unwrap());
        assert!(satisfies(&model, &x, 1).unwrap());
        assert!(!satisfies(&model, &x, 2).unwrap());
        let wx = Formula::weak_next(Formula::ff());
        assert!(!satisfies(&model, &wx, 0).unwrap());
        assert!(satisfies(&model, &wx, 2).unwrap());
    }

    #[test]
    fn next_true_fails_on_empty_model() {
        let model = BnnModel::empty();
        let f = Formula::next(Formula::tt());
        assert!(!satisfies(&model, &f, 0).unwrap());
        let g = Formula::weak_next(Formula::ff());
        assert!(satisfies(&model, &g, 0).unwrap());
    }

    #[test]
    fn until_witness_may_sit_at_position_n() {
        let model = two_block_model();
        // >>^2 01 collapses to 01 at position 2 (identities), so the
        // witness for F(>>^2 01 = 01) is the final position.
        let atom = Formula::atom(
            Term::constant(bv("01")).defer(2),
            Relation::Eq,
            Term::constant(bv("01")),
        );
        // f1(f0(01)) = 10, f1(01) with padding = 00, so positions 0 and 1
        // fail and only position 2 witnesses.
        let f = Formula::finally(atom.clone());
        assert!(satisfies(&model, &f, 0).unwrap());
        assert!(!satisfies(&model, &atom, 0).unwrap());
        assert!(!satisfies(&model, &atom, 1).unwrap());
        assert!(satisfies(&model, &atom, 2).unwrap());
    }

    #[test]
    fn release_requires_psi2_throughout() {
        let model = two_block_model();
        let always = Formula::atom(
            Term::constant(bv("01")),
            Relation::Eq,
            Term::constant(bv("01")),
        );
        let never = Formula::atom(
            Term::constant(bv("01")),
            Relation::Eq,
            Term::constant(bv("10")),
        );
        assert!(satisfies(&model, &Formula::release(Formula::ff(), always.clone()), 0).unwrap());
        assert!(!satisfies(&model, &Formula::release(Formula::ff(), never.clone()), 0).unwrap());
        // Release stops once the left side fires.
        let r = Formula::release(always.clone(), always);
        assert!(satisfies(&model, &r, 0).unwrap());
    }

    #[test]
    fn nnf_preserves_satisfaction() {
        let model = two_block_model();
        let a = Formula::atom(
            Term::constant(bv("01")).defer(1),
            Relation::Le,
            Term::constant(bv("10")),
        );
        let raw = Formula::not(Formula::implies(
            Formula::finally(a.clone()),
            Formula::globally(a.clone()),
        ));
        let nnf = to_nnf(&raw).unwrap();
        for pos in 0..=2 {
            assert_eq!(
                satisfies(&model, &raw, pos).unwrap(),
                satisfies(&model, &nnf, pos).unwrap(),
                "position {pos}"
            );
        }
    }

    #[test]
    fn quantifier_direct_evaluation() {
        let model = two_block_model();
        // forall x:2 . >> x = >> x is trivially true.
        let x = Term::var("x", 2);
        let body = Formula::atom(x.clone().defer(1), Relation::Eq, x.defer(1));
        let f = Arc::new(Formula::Forall {
            var: "x".into(),
            width: 2,
            body,
        });
        assert!(satisfies(&model, &f, 0).unwrap());
        // exists x:2 . x = 11
        let e = Arc::new(Formula::Exists {
            var: "x".into(),
            width: 2,
            body: Formula::atom(Term::var("x", 2), Relation::Eq, Term::constant(bv("11"))),
        });
        assert!(satisfies(&model, &e, 0).unwrap());
    }

    #[test]
    fn position_out_of_range_is_an_error() {
        let model = two_block_model();
        let f = Formula::tt();
        assert!(satisfies(&model, &f, 3).is_err());
    }
}
