//! Constraint encoding and solving over integer difference logic.
//!
//! A success-candidate path hands over its saturated atoms. Every
//! intermediate term gets an integer variable holding its decimal value;
//! relations between terms become difference atoms against the other
//! side, or against the distinguished zero variable for constants. Block
//! variables contribute range bounds and pairwise functional-consistency
//! implications; fixed functions contribute their lookup table as a
//! disjunction over the input domain, resolved statically whenever the
//! input value is already known.
//!
//! The Boolean structure is kept in a clause/cube normal form: a problem
//! is a conjunction of clauses, a clause a disjunction of cubes, a cube a
//! conjunction of difference atoms. The solver in [`dl`] branches on
//! cubes and lets the graph refute conjunctions.

pub mod dl;
pub mod smtlib;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{Relation, VectorOrder};
use crate::formula::Atom;
use crate::term::{FnRef, Term, TermBase};

pub use dl::{solve, verify, DiffGraph};
pub use smtlib::export_smtlib;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("constraint still expects {0} block applications; saturate it before encoding")]
    PendingApplications(usize),
    #[error("elementwise comparisons other than = and != cannot be encoded over integers")]
    ElementwiseOrder,
    #[error("elementwise comparison of terms with widths {0} and {1}")]
    ElementwiseWidth(usize, usize),
    #[error("fixed function {name} expands over {width}-bit inputs, beyond the cap of {cap} bits")]
    TableWidth {
        name: String,
        width: usize,
        cap: usize,
    },
    #[error("no shape declared for block @{0}")]
    MissingShape(usize),
    #[error("block @{block} expects {want}-bit input, got a {have}-bit term")]
    ShapeMismatch {
        block: usize,
        want: usize,
        have: usize,
    },
    #[error("model maps block @{block} input {input} to both {first} and {second}")]
    InconsistentModel {
        block: usize,
        input: u64,
        first: u64,
        second: u64,
    },
}

/// Index of an integer variable in a [`TermRegistry`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

/// `x - y <= c`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct DiffAtom {
    pub x: VarId,
    pub y: VarId,
    pub c: i64,
}

/// Conjunction of difference atoms.
pub type Cube = Vec<DiffAtom>;
/// Disjunction of cubes.
pub type Clause = Vec<Cube>;

/// Conjunction of clauses, plus the zero reference variable.
#[derive(Debug, Clone)]
pub struct ConstraintProblem {
    pub num_vars: usize,
    pub zero: VarId,
    pub clauses: Vec<Clause>,
}

/// Satisfying assignment, normalized so the zero variable is 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverModel {
    pub values: Vec<i64>,
}

impl SolverModel {
    pub fn value(&self, v: VarId) -> i64 {
        self.values[v.0]
    }
}

/// Input and output width of one block variable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct BlockShape {
    pub in_width: usize,
    pub out_width: usize,
}

#[derive(Clone, Debug)]
pub struct EncodeConfig {
    /// Shape of every block variable the atoms may mention.
    pub shapes: BTreeMap<usize, BlockShape>,
    /// Optional activation bounds per block, tightening the output range.
    pub bounds: BTreeMap<usize, (u64, u64)>,
    pub order: VectorOrder,
    /// Cap on the input width of fixed functions expanded as table
    /// disjunctions.
    pub max_table_width: usize,
}

impl Default for EncodeConfig {
    fn default() -> EncodeConfig {
        EncodeConfig {
            shapes: BTreeMap::new(),
            bounds: BTreeMap::new(),
            order: VectorOrder::Integer,
            max_table_width: 12,
        }
    }
}

/// One registered application of a block variable.
#[derive(Clone, Copy, Debug)]
pub struct Application {
    pub block: usize,
    pub arg: VarId,
    pub result: VarId,
}

/// Map from intermediate terms to integer variables. Variable 0 is the
/// zero reference; every subterm of a registered term is registered.
#[derive(Debug, Clone, Default)]
pub struct TermRegistry {
    names: Vec<String>,
    widths: Vec<Option<usize>>,
    pinned: Vec<Option<i64>>,
    by_term: BTreeMap<Term, VarId>,
    applications: Vec<Application>,
    shapes: BTreeMap<usize, BlockShape>,
}

impl TermRegistry {
    fn new(shapes: &BTreeMap<usize, BlockShape>) -> TermRegistry {
        let mut r = TermRegistry {
            shapes: shapes.clone(),
            ..TermRegistry::default()
        };
        r.names.push("zero".to_string());
        r.widths.push(None);
        r.pinned.push(Some(0));
        r
    }

    pub fn zero(&self) -> VarId {
        VarId(0)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.len() <= 1
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.names[v.0]
    }

    pub fn width(&self, v: VarId) -> Option<usize> {
        self.widths[v.0]
    }

    /// Value fixed at encode time, if any.
    pub fn pinned(&self, v: VarId) -> Option<i64> {
        self.pinned[v.0]
    }

    pub fn var_of(&self, t: &Term) -> Option<VarId> {
        self.by_term.get(t).copied()
    }

    pub fn applications(&self) -> &[Application] {
        &self.applications
    }

    fn fresh(&mut self, name: String, width: usize, pinned: Option<i64>) -> VarId {
        let id = VarId(self.names.len());
        self.names.push(name);
        self.widths.push(Some(width));
        self.pinned.push(pinned);
        id
    }
}

/// Pin a variable to an exact value.
fn pin_clause(v: VarId, zero: VarId, value: i64) -> Clause {
    vec![vec![
        DiffAtom { x: v, y: zero, c: value },
        DiffAtom {
            x: zero,
            y: v,
            c: -value,
        },
    ]]
}

/// Confine a variable to `lo..=hi`.
fn range_clause(v: VarId, zero: VarId, lo: i64, hi: i64) -> Clause {
    vec![vec![
        DiffAtom { x: v, y: zero, c: hi },
        DiffAtom {
            x: zero,
            y: v,
            c: -lo,
        },
    ]]
}

fn equal_cube(a: VarId, b: VarId) -> Cube {
    vec![
        DiffAtom { x: a, y: b, c: 0 },
        DiffAtom { x: b, y: a, c: 0 },
    ]
}

struct Encoder<'a> {
    cfg: &'a EncodeConfig,
    registry: TermRegistry,
    clauses: Vec<Clause>,
}

impl Encoder<'_> {
    /// Register `term` and all of its subterms, emitting the bound, table
    /// and pin constraints they carry. Returns the variable and width.
    fn register(&mut self, term: &Term) -> Result<(VarId, usize), SolverError> {
        if let Some(id) = self.registry.var_of(term) {
            let width = self.registry.width(id).expect("registered terms have widths");
            return Ok((id, width));
        }
        let zero = self.registry.zero();
        let (id, width) = match term.peel() {
            None => match term.base() {
                TermBase::Const(b) => {
                    let id = self
                        .registry
                        .fresh(format!("0b{b}"), b.width(), Some(b.dec() as i64));
                    self.clauses.push(pin_clause(id, zero, b.dec() as i64));
                    (id, b.width())
                }
                TermBase::Var { name, width } => {
                    let id = self.registry.fresh(name.to_string(), *width, None);
                    self.clauses
                        .push(range_clause(id, zero, 0, (1i64 << width) - 1));
                    (id, *width)
                }
            },
            Some((inner, func)) => {
                let func = func.clone();
                let (arg, arg_width) = self.register(&inner)?;
                match &func {
                    FnRef::Fixed(ff) => {
                        // A fixed function over a constant folds away
                        // during term normalization, so the argument here
                        // is always a genuine unknown and the lookup
                        // table expands in full.
                        let g = ff.func();
                        let out_width = g.out_width();
                        let name = format!("{}({})", ff.name(), self.registry.name(arg));
                        if g.in_width() > self.cfg.max_table_width {
                            return Err(SolverError::TableWidth {
                                name: ff.name().to_string(),
                                width: g.in_width(),
                                cap: self.cfg.max_table_width,
                            });
                        }
                        let id = self.registry.fresh(name, out_width, None);
                        let clause = (0..(1u64 << g.in_width()))
                            .map(|d| {
                                let out = g.apply_dec(d).expect("domain enumeration") as i64;
                                let mut cube = pin_clause(arg, zero, d as i64).remove(0);
                                cube.extend(pin_clause(id, zero, out).remove(0));
                                cube
                            })
                            .collect();
                        self.clauses.push(clause);
                        (id, out_width)
                    }
                    FnRef::Block(i) => {
                        let shape = *self
                            .cfg
                            .shapes
                            .get(i)
                            .ok_or(SolverError::MissingShape(*i))?;
                        if shape.in_width != arg_width {
                            return Err(SolverError::ShapeMismatch {
                                block: *i,
                                want: shape.in_width,
                                have: arg_width,
                            });
                        }
                        let name = format!("@{i}({})", self.registry.name(arg));
                        let id = self.registry.fresh(name, shape.out_width, None);
                        let full = (1i64 << shape.out_width) - 1;
                        let (lo, hi) = match self.cfg.bounds.get(i) {
                            Some(&(lo, hi)) => ((lo as i64).max(0), (hi as i64).min(full)),
                            None => (0, full),
                        };
                        self.clauses.push(range_clause(id, zero, lo, hi));
                        self.registry.applications.push(Application {
                            block: *i,
                            arg,
                            result: id,
                        });
                        (id, shape.out_width)
                    }
                }
            }
        };
        self.registry.by_term.insert(term.clone(), id);
        Ok((id, width))
    }

    /// The skeleton literal of one atom, with the negation flag folded
    /// into the relation.
    fn relation_clause(&mut self, atom: &Atom) -> Result<Clause, SolverError> {
        let (l, lw) = self.register(&atom.lhs)?;
        let (r, rw) = self.register(&atom.rhs)?;
        let rel = if atom.negated {
            atom.rel.negate()
        } else {
            atom.rel
        };
        if self.cfg.order == VectorOrder::Elementwise {
            // Bitwise order agrees with the integer one only on equality.
            if !matches!(rel, Relation::Eq | Relation::Ne) {
                return Err(SolverError::ElementwiseOrder);
            }
            if lw != rw {
                return Err(SolverError::ElementwiseWidth(lw, rw));
            }
        }
        Ok(match rel {
            Relation::Le => vec![vec![DiffAtom { x: l, y: r, c: 0 }]],
            Relation::Ge => vec![vec![DiffAtom { x: r, y: l, c: 0 }]],
            Relation::Lt => vec![vec![DiffAtom { x: l, y: r, c: -1 }]],
            Relation::Gt => vec![vec![DiffAtom { x: r, y: l, c: -1 }]],
            Relation::Eq => vec![equal_cube(l, r)],
            Relation::Ne => vec![
                vec![DiffAtom { x: l, y: r, c: -1 }],
                vec![DiffAtom { x: r, y: l, c: -1 }],
            ],
        })
    }

    /// Functional consistency: equal inputs to one block force equal
    /// outputs. Pairs whose inputs are both pinned resolve statically.
    fn ackermann(&mut self) {
        let apps = self.registry.applications.clone();
        let mut by_block: BTreeMap<usize, Vec<Application>> = BTreeMap::new();
        for app in apps {
            by_block.entry(app.block).or_default().push(app);
        }
        for apps in by_block.values() {
            for (i, a) in apps.iter().enumerate() {
                for b in &apps[i + 1..] {
                    if a.arg == b.arg {
                        // Same registered term, same result variable.
                        continue;
                    }
                    if let (Some(x), Some(y)) =
                        (self.registry.pinned(a.arg), self.registry.pinned(b.arg))
                    {
                        if x != y {
                            // Known-distinct inputs: the implication is
                            // vacuous, no clause at all.
                            continue;
                        }
                    }
                    self.clauses.push(vec![
                        vec![DiffAtom {
                            x: a.arg,
                            y: b.arg,
                            c: -1,
                        }],
                        vec![DiffAtom {
                            x: b.arg,
                            y: a.arg,
                            c: -1,
                        }],
                        equal_cube(a.result, b.result),
                    ]);
                }
            }
        }
    }
}

/// Encode a set of saturated path atoms into a difference-logic problem.
pub fn encode(
    atoms: &[Atom],
    cfg: &EncodeConfig,
) -> Result<(ConstraintProblem, TermRegistry), SolverError> {
    let mut enc = Encoder {
        cfg,
        registry: TermRegistry::new(&cfg.shapes),
        clauses: Vec::new(),
    };
    for atom in atoms {
        if atom.len() > 0 {
            return Err(SolverError::PendingApplications(atom.len()));
        }
        let clause = enc.relation_clause(atom)?;
        enc.clauses.push(clause);
    }
    enc.ackermann();
    let problem = ConstraintProblem {
        num_vars: enc.registry.len(),
        zero: enc.registry.zero(),
        clauses: enc.clauses,
    };
    Ok((problem, enc.registry))
}

/// Input/output pairs recovered for the blocks of a candidate network.
#[derive(Debug, Clone, Serialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct PartialMappings {
    pub length: usize,
    pub blocks: Vec<BlockMapping>,
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq, PartialOrd, Ord)]
pub struct BlockMapping {
    pub index: usize,
    pub in_width: usize,
    pub out_width: usize,
    pub mappings: Vec<(u64, u64)>,
}

/// Read the value of every block application off a verified model and
/// group the input/output pairs per block.
pub fn extract_mappings(
    model: &SolverModel,
    registry: &TermRegistry,
    length: usize,
) -> Result<PartialMappings, SolverError> {
    let mut grouped: BTreeMap<usize, BTreeMap<u64, u64>> = BTreeMap::new();
    for app in &registry.applications {
        let input = model.value(app.arg) as u64;
        let output = model.value(app.result) as u64;
        match grouped.entry(app.block).or_default().entry(input) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(output);
            }
            std::collections::btree_map::Entry::Occupied(e) => {
                if *e.get() != output {
                    return Err(SolverError::InconsistentModel {
                        block: app.block,
                        input,
                        first: *e.get(),
                        second: output,
                    });
                }
            }
        }
    }
    let mut blocks = Vec::new();
    for index in 0..length {
        let shape = registry
            .shapes
            .get(&index)
            .ok_or(SolverError::MissingShape(index))?;
        let mappings = grouped
            .remove(&index)
            .unwrap_or_default()
            .into_iter()
            .collect();
        blocks.push(BlockMapping {
            index,
            in_width: shape.in_width,
            out_width: shape.out_width,
            mappings,
        });
    }
    Ok(PartialMappings { length, blocks })
}
