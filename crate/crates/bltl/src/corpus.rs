//! Seeded random generators shared by the test suites.
//!
//! Everything here is deterministic: the same seed yields the same
//! artifact. Generated formulas are ground, in negation normal form,
//! and use a single vector width matching the uniform-width models, so
//! semantic comparisons across the evaluator, the automaton, and the
//! tableau never trip over width errors. Difference-logic problems
//! come with a satisfiability oracle written independently of the
//! solver.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bits::{BitVec, BnnModel, BoolFn, Relation};
use crate::formula::{Atom, Formula};
use crate::solver::{ConstraintProblem, DiffAtom, SolverModel, VarId};
use crate::term::{FixedFn, FnRef, Term};

/// Seeded generator stream.
pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Random lookup table of the given widths.
pub fn random_boolfn(rng: &mut ChaCha12Rng, in_width: usize, out_width: usize) -> BoolFn {
    let table = (0..1u64 << in_width)
        .map(|_| rng.random_range(0..1u64 << out_width))
        .collect();
    BoolFn::new(in_width, out_width, table).expect("table is total and in range")
}

/// Random chain of `blocks` lookup tables, each `width`-bit in and out.
pub fn random_model(rng: &mut ChaCha12Rng, width: usize, blocks: usize) -> BnnModel {
    let funcs = (0..blocks)
        .map(|_| random_boolfn(rng, width, width))
        .collect();
    BnnModel::new(funcs).expect("uniform widths always chain")
}

/// Size caps for [`random_nnf`]: how many atoms and temporal operators
/// a formula may contain, and how many placeholders each side of an
/// atom may carry.
#[derive(Debug, Clone, Copy)]
pub struct NnfBudget {
    pub atoms: usize,
    pub temporal: usize,
    pub defers: usize,
}

impl Default for NnfBudget {
    fn default() -> NnfBudget {
        NnfBudget {
            atoms: 2,
            temporal: 2,
            defers: 2,
        }
    }
}

struct NnfGen {
    atoms: usize,
    temporal: usize,
    defers: usize,
    width: usize,
    next_fn: usize,
}

/// Random ground formula in negation normal form over `width`-bit
/// vectors. Atoms compare constants, possibly deferred and possibly
/// routed through a fresh random fixed function; a quarter of them are
/// negated.
pub fn random_nnf(rng: &mut ChaCha12Rng, width: usize, budget: NnfBudget) -> Arc<Formula> {
    let mut gen = NnfGen {
        atoms: budget.atoms,
        temporal: budget.temporal,
        defers: budget.defers,
        width,
        next_fn: 0,
    };
    build_nnf(rng, &mut gen, 0)
}

fn build_nnf(rng: &mut ChaCha12Rng, gen: &mut NnfGen, depth: usize) -> Arc<Formula> {
    if depth >= 3 {
        return nnf_leaf(rng, gen);
    }
    match rng.random_range(0u8..12) {
        0 => Formula::tt(),
        1 => Formula::ff(),
        2 | 3 if gen.temporal > 0 => {
            gen.temporal -= 1;
            Formula::next(build_nnf(rng, gen, depth + 1))
        }
        4 if gen.temporal > 0 => {
            gen.temporal -= 1;
            Formula::weak_next(build_nnf(rng, gen, depth + 1))
        }
        5 if gen.temporal > 0 => {
            gen.temporal -= 1;
            let lhs = build_nnf(rng, gen, depth + 1);
            Formula::until(lhs, build_nnf(rng, gen, depth + 1))
        }
        6 if gen.temporal > 0 => {
            gen.temporal -= 1;
            let lhs = build_nnf(rng, gen, depth + 1);
            Formula::release(lhs, build_nnf(rng, gen, depth + 1))
        }
        7 | 8 => {
            let lhs = build_nnf(rng, gen, depth + 1);
            Formula::and(lhs, build_nnf(rng, gen, depth + 1))
        }
        9 | 10 => {
            let lhs = build_nnf(rng, gen, depth + 1);
            Formula::or(lhs, build_nnf(rng, gen, depth + 1))
        }
        _ => nnf_leaf(rng, gen),
    }
}

fn nnf_leaf(rng: &mut ChaCha12Rng, gen: &mut NnfGen) -> Arc<Formula> {
    if gen.atoms == 0 {
        return if rng.random_bool(0.5) {
            Formula::tt()
        } else {
            Formula::ff()
        };
    }
    gen.atoms -= 1;
    let lhs = random_side(rng, gen);
    let rhs = random_side(rng, gen);
    let rels = [
        Relation::Le,
        Relation::Ge,
        Relation::Lt,
        Relation::Gt,
        Relation::Eq,
        Relation::Ne,
    ];
    let mut atom = Atom::new(lhs, rels[rng.random_range(0..rels.len())], rhs);
    if rng.random_bool(0.25) {
        atom = atom.negate();
    }
    Arc::new(Formula::Atom(atom))
}

fn random_side(rng: &mut ChaCha12Rng, gen: &mut NnfGen) -> Term {
    let w = gen.width;
    let value = rng.random_range(0..1u64 << w);
    let mut t = Term::constant(BitVec::bin(value, w).expect("value fits width"));
    let before = rng.random_range(0..=gen.defers);
    t = t.defer(before);
    if before > 0 && rng.random_bool(0.3) {
        // Wrapping a still-constant term would fold the function away.
        let func = Arc::new(random_boolfn(rng, w, w));
        let name = format!("g{}", gen.next_fn);
        gen.next_fn += 1;
        t = t
            .wrap(FnRef::Fixed(FixedFn::new(name, func)))
            .expect("function width matches term width");
    }
    t.defer(rng.random_range(0..=gen.defers - before))
}

/// A random hidden model together with a conjunction of ground atoms
/// that hold of it, for synthesis round trips: the formula is
/// satisfiable by construction and pins observable behaviour of the
/// hidden network.
pub fn hidden_model_spec(
    rng: &mut ChaCha12Rng,
    width: usize,
    max_blocks: usize,
) -> (BnnModel, Arc<Formula>) {
    let blocks = rng.random_range(1..=max_blocks);
    let model = random_model(rng, width, blocks);
    let atoms: Vec<_> = (0..rng.random_range(1..=3))
        .map(|_| {
            let input =
                BitVec::bin(rng.random_range(0..1u64 << width), width).expect("value fits width");
            let depth = rng.random_range(1..=blocks);
            let output = model
                .run_range(&input, 0, depth)
                .expect("uniform widths always chain");
            Formula::atom(
                Term::constant(input).defer(depth),
                Relation::Eq,
                Term::constant(output),
            )
        })
        .collect();
    (model, Formula::conj(atoms))
}

/// Formulas no network of any length satisfies: quick saturated
/// contradictions, constraint-level conflicts the solver must refute,
/// width clashes, and obligations that defer forever so the search has
/// to run into its depth bound.
pub fn unsat_formulas() -> Vec<Arc<Formula>> {
    let c = |s: &str| Term::constant(BitVec::parse_bits(s).expect("bit literal"));
    let eq = |l: Term, r: Term| Formula::atom(l, Relation::Eq, r);
    vec![
        eq(c("0"), c("1")),
        Formula::and(eq(c("01"), c("01")), eq(c("10"), c("01"))),
        Formula::and(eq(c("10").defer(1), c("01")), eq(c("10").defer(1), c("11"))),
        Formula::and(
            Formula::atom(c("10").defer(1), Relation::Lt, c("01")),
            Formula::atom(c("10").defer(1), Relation::Gt, c("01")),
        ),
        Formula::and(
            eq(c("10").defer(1), c("01")),
            eq(c("10").defer(1), c("010")),
        ),
        Formula::next(Formula::next(Formula::ff())),
        Formula::until(Formula::tt(), Formula::ff()),
        Formula::until(eq(c("10").defer(1), c("10")), Formula::ff()),
        Formula::release(Formula::ff(), eq(c("10").defer(1), c("01"))),
    ]
}

/// Random difference-logic problem: 2 to 10 variables, constants in
/// [-8, 8], up to four clauses of up to three cubes of up to two atoms
/// each. Half the problems are confined to few variables with
/// negative-leaning constants; without that skew negative cycles are
/// rare and almost every draw is satisfiable.
pub fn random_dl_problem(rng: &mut ChaCha12Rng) -> ConstraintProblem {
    let tight = rng.random_bool(0.5);
    let num_vars = if tight {
        rng.random_range(2..=4)
    } else {
        rng.random_range(2..=10)
    };
    let clauses = (0..rng.random_range(1..=4))
        .map(|_| {
            (0..rng.random_range(1..=3))
                .map(|_| {
                    (0..rng.random_range(1..=2))
                        .map(|_| random_diff_atom(rng, num_vars, tight))
                        .collect()
                })
                .collect()
        })
        .collect();
    ConstraintProblem {
        num_vars,
        zero: VarId(0),
        clauses,
    }
}

fn random_diff_atom(rng: &mut ChaCha12Rng, num_vars: usize, tight: bool) -> DiffAtom {
    let x = rng.random_range(0..num_vars);
    let mut y = rng.random_range(0..num_vars);
    while y == x {
        y = rng.random_range(0..num_vars);
    }
    let c = if tight {
        rng.random_range(-8..=0)
    } else {
        rng.random_range(-8..=8)
    };
    DiffAtom {
        x: VarId(x),
        y: VarId(y),
        c,
    }
}

/// Complete satisfiability oracle for difference-logic problems,
/// written independently of the solver: try every way of choosing one
/// cube per clause and run a from-scratch Bellman-Ford relaxation on
/// each resulting conjunction.
pub fn oracle_dl_sat(problem: &ConstraintProblem) -> bool {
    fn pick(problem: &ConstraintProblem, idx: usize, chosen: &mut Vec<DiffAtom>) -> bool {
        let Some(clause) = problem.clauses.get(idx) else {
            return relax_sat(problem.num_vars, chosen);
        };
        clause.iter().any(|cube| {
            let before = chosen.len();
            chosen.extend(cube.iter().copied());
            let ok = pick(problem, idx + 1, chosen);
            chosen.truncate(before);
            ok
        })
    }
    pick(problem, 0, &mut Vec::new())
}

/// A conjunction of `x - y <= c` atoms is satisfiable over the
/// integers iff the graph with an edge `y -> x` of weight `c` per atom
/// has no negative cycle. Distances start at zero, standing in for a
/// virtual source connected to every variable.
fn relax_sat(num_vars: usize, atoms: &[DiffAtom]) -> bool {
    let mut dist = vec![0i64; num_vars];
    for _ in 0..num_vars {
        let mut changed = false;
        for a in atoms {
            let cand = dist[a.y.0] + a.c;
            if cand < dist[a.x.0] {
                dist[a.x.0] = cand;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
    }
    atoms.iter().all(|a| dist[a.y.0] + a.c >= dist[a.x.0])
}

/// Literal brute force over `[-range, range]^num_vars`. Only sensible
/// for very small variable counts; solutions of problems with constants
/// in [-8, 8] and at most `range / 8` variables fit in the box, so for
/// those the search is complete.
pub fn brute_dl_sat(problem: &ConstraintProblem, range: i64) -> bool {
    fn assign(problem: &ConstraintProblem, values: &mut Vec<i64>, range: i64) -> bool {
        if values.len() == problem.num_vars {
            let model = SolverModel {
                values: values.clone(),
            };
            return crate::solver::verify(problem, &model);
        }
        (-range..=range).any(|v| {
            values.push(v);
            let ok = assign(problem, values, range);
            values.pop();
            ok
        })
    }
    assign(problem, &mut Vec::new(), range)
}
