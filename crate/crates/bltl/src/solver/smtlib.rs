//! SMT-LIB2 (QF_IDL) rendering of a constraint problem, for cross-checking
//! against an external solver.

use std::fmt::Write as _;

use crate::solver::{Clause, ConstraintProblem, Cube, DiffAtom, TermRegistry};

fn literal(c: i64) -> String {
    if c < 0 {
        format!("(- {})", -c)
    } else {
        c.to_string()
    }
}

fn atom(a: &DiffAtom) -> String {
    format!("(<= (- v{} v{}) {})", a.x.0, a.y.0, literal(a.c))
}

fn cube(c: &Cube) -> String {
    match c.len() {
        0 => "true".to_string(),
        1 => atom(&c[0]),
        _ => format!(
            "(and {})",
            c.iter().map(atom).collect::<Vec<_>>().join(" ")
        ),
    }
}

fn clause(c: &Clause) -> String {
    match c.len() {
        0 => "false".to_string(),
        1 => cube(&c[0]),
        _ => format!(
            "(or {})",
            c.iter().map(cube).collect::<Vec<_>>().join(" ")
        ),
    }
}

/// Render the problem. Variables print as `v{i}`; the registry supplies a
/// comment naming the term behind each variable.
pub fn export_smtlib(problem: &ConstraintProblem, registry: &TermRegistry) -> String {
    let mut out = String::from("(set-logic QF_IDL)\n");
    if problem.num_vars <= 1 && problem.clauses.is_empty() {
        out.push_str("(check-sat)\n");
        return out;
    }
    for i in 0..problem.num_vars {
        let _ = writeln!(out, "; v{} is {}", i, registry.name(crate::solver::VarId(i)));
        let _ = writeln!(out, "(declare-fun v{i} () Int)");
    }
    for c in &problem.clauses {
        let _ = writeln!(out, "(assert {})", clause(c));
    }
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{BitVec, Relation};
    use crate::formula::Atom;
    use crate::solver::{encode, BlockShape, EncodeConfig, VarId};
    use crate::term::{FnRef, Term};

    #[test]
    fn empty_problem_is_header_and_check_sat() {
        let p = ConstraintProblem {
            num_vars: 1,
            zero: VarId(0),
            clauses: vec![],
        };
        let r = {
            let (_, r) = encode(&[], &EncodeConfig::default()).unwrap();
            r
        };
        assert_eq!(export_smtlib(&p, &r), "(set-logic QF_IDL)\n(check-sat)\n");
    }

    #[test]
    fn single_difference_atom_prints_directly() {
        let x = Term::var("x", 2);
        let y = Term::var("y", 2);
        let a = Atom::new(x, Relation::Lt, y);
        let (p, r) = encode(&[a], &EncodeConfig::default()).unwrap();
        let text = export_smtlib(&p, &r);
        assert!(text.contains("(assert (<= (- v1 v2) (- 1)))"));
        assert!(text.contains("(declare-fun v1 () Int)"));
        assert!(text.contains("; v1 is x"));
        assert!(text.ends_with("(check-sat)\n(get-model)\n"));
    }

    #[test]
    fn block_application_prints_disjunction_free_bounds() {
        let t = Term::constant(BitVec::parse_bits("10").unwrap())
            .defer(1)
            .apply(&FnRef::Block(0))
            .unwrap();
        let a = Atom::new(t, Relation::Ne, Term::constant(BitVec::parse_bits("00").unwrap()));
        let cfg = EncodeConfig {
            shapes: [(0, BlockShape { in_width: 2, out_width: 2 })]
                .into_iter()
                .collect(),
            ..Default::default()
        };
        let (p, r) = encode(&[a], &cfg).unwrap();
        let text = export_smtlib(&p, &r);
        // The disequality splits into two cubes.
        assert!(text.contains("(or "));
        // Bounds are a conjunction.
        assert!(text.contains("(and "));
        assert!(text.contains("; v2 is @0(0b10)"));
    }
}
