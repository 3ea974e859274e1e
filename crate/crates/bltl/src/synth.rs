//! Synthesis of block networks from temporal specifications.
//!
//! [`synthesize`] drives the tableau search in synth mode and dresses
//! each successful path up as a [`SynthResult`]: a network length, one
//! shape per block, and the table entries the constraints pin down.
//! Everything the formula never observes stays open, so a result is a
//! family of networks rather than a single one. [`complete_blocks`]
//! picks a member by filling the unspecified entries under a
//! [`CompletionPolicy`], and [`evaluate_metric`] scores concrete models
//! against the quantitative fairness and robustness measures that the
//! generated specifications target.
//!
//! Free-length results are reported at the shortest network the
//! constraints actually reach: when a path ends deeper than the last
//! constrained block, the unconstrained tail is dropped if the
//! truncated network still passes a check, which keeps lengths in line
//! with the largest block index the formula mentions. Block widths
//! likewise shrink to the widest value a mapping stores at each
//! interface, except where a fixed function or an elementwise
//! comparison demands an exact width.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bits::{
    hamming_ball, min_width, BitVec, BitsError, BnnModel, BoolFn, VectorOrder, MAX_WIDTH,
};
use crate::formula::{Atom, Formula};
use crate::solver::{BlockMapping, BlockShape, PartialMappings};
use crate::tableau::{
    boundary_evidence, check_with, fill_boundaries, Mode, Outcome, Search, SearchConfig,
    SuccessPath, SynthSpec, TableauError,
};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error(transparent)]
    Tableau(#[from] TableauError),
    #[error(transparent)]
    Bits(#[from] BitsError),
    #[error("mapping {input} -> {output} for block @{block} does not fit a {in_width}->{out_width} bit table")]
    MappingShape {
        block: usize,
        input: u64,
        output: u64,
        in_width: usize,
        out_width: usize,
    },
    #[error("result describes {blocks} blocks for a length-{length} network")]
    LengthBlocks { length: usize, blocks: usize },
    #[error("a completed network failed its own formula; this is a bug")]
    Unsound,
}

/// What is fixed about the network being searched for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Architecture {
    /// Length and every block shape are given.
    Fixed(Vec<BlockShape>),
    /// Exact length, widths left to the search.
    FixedLength(usize),
    /// Length and widths both left to the search.
    Free,
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub arch: Architecture,
    /// Activation bounds per block index, tightening output ranges.
    pub bounds: BTreeMap<usize, (u64, u64)>,
    /// How many distinct results to enumerate; 0 is treated as 1.
    pub num_solutions: usize,
    pub search: SearchConfig,
}

impl Default for SynthConfig {
    fn default() -> SynthConfig {
        SynthConfig {
            arch: Architecture::Free,
            bounds: BTreeMap::new(),
            num_solutions: 1,
            search: SearchConfig::default(),
        }
    }
}

/// Search effort behind one result, cumulative since the run started.
#[derive(Debug, Clone, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub backtracks: u64,
    pub solver_calls: u64,
    /// Not serialized: identical runs must produce identical JSON.
    #[serde(skip)]
    pub wall: Duration,
}

/// A synthesized family of networks: every network with these shapes
/// whose tables extend the partial mappings satisfies the formula.
#[derive(Debug, Clone, Serialize)]
pub struct SynthResult {
    pub length: usize,
    pub shapes: Vec<BlockShape>,
    pub mappings: PartialMappings,
    pub stats: SearchStats,
}

/// Everything one synthesis run produced.
#[derive(Debug, Clone, Serialize)]
pub struct SynthRun {
    pub results: Vec<SynthResult>,
    /// The search space was exhausted before the requested count.
    pub exhausted: bool,
    /// The node budget ran out before the requested count.
    pub budget_hit: bool,
}

impl SynthRun {
    /// No network satisfies the formula under the given architecture.
    pub fn is_failure(&self) -> bool {
        self.results.is_empty() && self.exhausted
    }
}

/// How [`complete_blocks`] fills table entries the mappings leave open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompletionPolicy {
    /// Every open entry outputs zero.
    ConstantZero,
    /// Every open entry copies the output of the specified input nearest
    /// in Hamming distance, ties broken toward the lowest input value.
    /// Blocks with no specified entries fall back to zero.
    NearestSpecified,
    /// Open entries draw uniformly from the output range, deterministic
    /// in the seed, the block index, and the mappings.
    SeededRandom(u64),
}

/// Search for networks satisfying `phi`, enumerating up to
/// `cfg.num_solutions` distinct results. `phi` must be in negation
/// normal form with quantifiers expanded; free variables are treated
/// existentially and leave the result unverified.
pub fn synthesize(phi: &Arc<Formula>, cfg: &SynthConfig) -> Result<SynthRun, SynthError> {
    let spec = SynthSpec {
        shapes: match &cfg.arch {
            Architecture::Fixed(shapes) => Some(shapes.clone()),
            _ => None,
        },
        length: match &cfg.arch {
            Architecture::FixedLength(n) => Some(*n),
            _ => None,
        },
        bounds: cfg.bounds.clone(),
    };
    let started = Instant::now();
    let mut search = Search::new(phi, Mode::Synth(spec), cfg.search.clone())?;
    let ground = phi.free_vars().is_empty();
    let wanted = cfg.num_solutions.max(1);
    let mut results: Vec<SynthResult> = Vec::new();
    let mut seen: BTreeSet<(usize, Vec<BlockShape>, PartialMappings)> = BTreeSet::new();
    let (exhausted, budget_hit) = loop {
        match search.next_outcome()? {
            Outcome::Success(path) => {
                let result = finalize(phi, cfg, &path, &search, started, ground)?;
                let key = (result.length, result.shapes.clone(), result.mappings.clone());
                if seen.insert(key) {
                    results.push(result);
                    if results.len() >= wanted {
                        break (false, false);
                    }
                }
            }
            Outcome::Failure => break (true, false),
            Outcome::ResourceLimit => break (false, true),
        }
    };
    Ok(SynthRun {
        results,
        exhausted,
        budget_hit,
    })
}

/// Dress one successful path as a result: settle the length, fit the
/// shapes, and make sure the family it describes really satisfies the
/// formula.
fn finalize(
    phi: &Arc<Formula>,
    cfg: &SynthConfig,
    path: &SuccessPath,
    search: &Search,
    started: Instant,
    ground: bool,
) -> Result<SynthResult, SynthError> {
    let recorded = path.mappings.as_ref().ok_or(SynthError::Unsound)?;
    let stats = SearchStats {
        nodes: search.nodes_used(),
        backtracks: search.backtracks(),
        solver_calls: search.solver_calls(),
        wall: started.elapsed(),
    };
    let order = cfg.search.order;
    let result = match &cfg.arch {
        Architecture::Fixed(shapes) => SynthResult {
            length: path.depth,
            shapes: shapes.clone(),
            mappings: recorded.clone(),
            stats,
        },
        Architecture::FixedLength(_) => {
            let (shapes, mappings) = fit_shapes(&path.atoms, recorded, path.depth)?;
            SynthResult {
                length: path.depth,
                shapes,
                mappings,
                stats,
            }
        }
        Architecture::Free => {
            let constrained = last_constrained_block(&path.atoms).map_or(0, |i| i + 1);
            let mut chosen = None;
            if ground && constrained < path.depth {
                let head = truncate_mappings(recorded, constrained);
                let (shapes, mappings) = fit_shapes(&path.atoms, &head, constrained)?;
                let trimmed = SynthResult {
                    length: constrained,
                    shapes,
                    mappings,
                    stats: stats.clone(),
                };
                if family_holds(phi, &trimmed, order)? {
                    chosen = Some(trimmed);
                }
            }
            match chosen {
                Some(r) => r,
                None => {
                    let (shapes, mappings) = fit_shapes(&path.atoms, recorded, path.depth)?;
                    SynthResult {
                        length: path.depth,
                        shapes,
                        mappings,
                        stats,
                    }
                }
            }
        }
    };
    if ground && !family_holds(phi, &result, order)? {
        return Err(SynthError::Unsound);
    }
    Ok(result)
}

/// Highest block index any atom applies.
fn last_constrained_block(atoms: &[Atom]) -> Option<usize> {
    atoms
        .iter()
        .flat_map(|a| a.lhs.block_indices().chain(a.rhs.block_indices()))
        .max()
}

fn truncate_mappings(full: &PartialMappings, length: usize) -> PartialMappings {
    PartialMappings {
        length,
        blocks: full
            .blocks
            .iter()
            .filter(|b| b.index < length)
            .cloned()
            .collect(),
    }
}

/// Shrink block widths onto the values the mappings actually store.
/// Width evidence the formula observes (a known-width value feeding a
/// block, a fixed function reading one, a comparison endpoint) keeps
/// its exact width; everywhere else the widest mapped value at the
/// interface decides, then neighbours fill the gaps. The mappings are
/// rewritten to the fitted widths.
fn fit_shapes(
    atoms: &[Atom],
    recorded: &PartialMappings,
    length: usize,
) -> Result<(Vec<BlockShape>, PartialMappings), SynthError> {
    let evidence = boundary_evidence(atoms, length).ok_or(SynthError::Unsound)?;
    let mut value_widths: Vec<Option<usize>> = vec![None; length + 1];
    let note = |slot: &mut Option<usize>, w: usize| *slot = Some(slot.map_or(w, |v| v.max(w)));
    for block in &recorded.blocks {
        if block.index >= length {
            continue;
        }
        for &(input, output) in &block.mappings {
            note(&mut value_widths[block.index], min_width(input));
            note(&mut value_widths[block.index + 1], min_width(output));
        }
    }
    let widths = evidence
        .resolve(&value_widths)
        .ok_or(SynthError::Unsound)?;
    let widths = fill_boundaries(widths);
    let shapes: Vec<BlockShape> = (0..length)
        .map(|i| BlockShape {
            in_width: widths[i],
            out_width: widths[i + 1],
        })
        .collect();
    let mut blocks = Vec::with_capacity(length);
    for i in 0..length {
        let pairs = recorded
            .blocks
            .iter()
            .find(|b| b.index == i)
            .map(|b| b.mappings.clone())
            .unwrap_or_default();
        for &(input, output) in &pairs {
            if min_width(input) > shapes[i].in_width || min_width(output) > shapes[i].out_width {
                return Err(SynthError::Unsound);
            }
        }
        blocks.push(BlockMapping {
            index: i,
            in_width: shapes[i].in_width,
            out_width: shapes[i].out_width,
            mappings: pairs,
        });
    }
    Ok((
        shapes,
        PartialMappings {
            length,
            blocks,
        },
    ))
}

/// Whether every completion of the result satisfies the formula, probed
/// through one completion per policy.
fn family_holds(
    phi: &Arc<Formula>,
    result: &SynthResult,
    order: VectorOrder,
) -> Result<bool, SynthError> {
    for policy in [
        CompletionPolicy::ConstantZero,
        CompletionPolicy::NearestSpecified,
        CompletionPolicy::SeededRandom(0),
    ] {
        let model = complete_blocks(result, &policy)?;
        if !check_with(&model, phi, order)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Turn a result into a concrete network: specified entries are copied
/// verbatim, open entries are filled by the policy.
pub fn complete_blocks(
    result: &SynthResult,
    policy: &CompletionPolicy,
) -> Result<BnnModel, SynthError> {
    if result.shapes.len() != result.length || result.mappings.blocks.len() != result.length {
        return Err(SynthError::LengthBlocks {
            length: result.length,
            blocks: result.shapes.len().max(result.mappings.blocks.len()),
        });
    }
    let mut blocks = Vec::with_capacity(result.length);
    for (i, shape) in result.shapes.iter().enumerate() {
        if !(1..=MAX_WIDTH).contains(&shape.in_width) {
            return Err(SynthError::Bits(BitsError::BadWidth(shape.in_width)));
        }
        if !(1..=MAX_WIDTH).contains(&shape.out_width) {
            return Err(SynthError::Bits(BitsError::BadWidth(shape.out_width)));
        }
        let specified: BTreeMap<u64, u64> =
            result.mappings.blocks[i].mappings.iter().copied().collect();
        let size = 1u64 << shape.in_width;
        let out_range = 1u64 << shape.out_width;
        for (&input, &output) in &specified {
            if input >= size || output >= out_range {
                return Err(SynthError::MappingShape {
                    block: i,
                    input,
                    output,
                    in_width: shape.in_width,
                    out_width: shape.out_width,
                });
            }
        }
        let table = match policy {
            CompletionPolicy::ConstantZero => (0..size)
                .map(|d| specified.get(&d).copied().unwrap_or(0))
                .collect(),
            CompletionPolicy::NearestSpecified => (0..size)
                .map(|d| {
                    specified
                        .get(&d)
                        .copied()
                        .unwrap_or_else(|| nearest_output(d, &specified))
                })
                .collect(),
            CompletionPolicy::SeededRandom(seed) => {
                // One stream per block so a block's fill is independent
                // of how many entries earlier blocks drew.
                let mut rng = ChaCha12Rng::seed_from_u64(
                    seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
                );
                (0..size)
                    .map(|d| match specified.get(&d) {
                        Some(&out) => out,
                        None => rng.random_range(0..out_range),
                    })
                    .collect()
            }
        };
        blocks.push(BoolFn::new(shape.in_width, shape.out_width, table)?);
    }
    Ok(BnnModel::new(blocks)?)
}

/// Output of the specified input nearest to `d` in Hamming distance,
/// ties broken toward the lowest input. Zero when nothing is specified.
fn nearest_output(d: u64, specified: &BTreeMap<u64, u64>) -> u64 {
    specified
        .iter()
        .min_by_key(|(&input, _)| ((d ^ input).count_ones(), input))
        .map(|(_, &output)| output)
        .unwrap_or(0)
}

/// A quantitative score over a concrete network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Metric {
    /// Fraction of pairs mapped to equal outputs.
    Fairness { pairs: Vec<(BitVec, BitVec)> },
    /// Fraction of inputs within Hamming distance 1..=radius of `input`
    /// whose output differs from the output of `input` itself.
    Robustness { input: BitVec, radius: usize },
}

/// Score a model. Fairness of no pairs is 1; robustness over an empty
/// ball (radius 0) is 0.
pub fn evaluate_metric(model: &BnnModel, metric: &Metric) -> Result<f64, SynthError> {
    match metric {
        Metric::Fairness { pairs } => {
            if pairs.is_empty() {
                return Ok(1.0);
            }
            let mut equal = 0usize;
            for (a, b) in pairs {
                if model.run(a)? == model.run(b)? {
                    equal += 1;
                }
            }
            Ok(equal as f64 / pairs.len() as f64)
        }
        Metric::Robustness { input, radius } => {
            let base = model.run(input)?;
            let ball = hamming_ball(input, *radius);
            if ball.is_empty() {
                return Ok(0.0);
            }
            let mut changed = 0usize;
            for point in &ball {
                if model.run(point)? != base {
                    changed += 1;
                }
            }
            Ok(changed as f64 / ball.len() as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Relation;
    use crate::formula::to_nnf;
    use crate::semantics::satisfies;
    use crate::term::Term;

    fn cbits(s: &str) -> Term {
        Term::constant(BitVec::parse_bits(s).unwrap())
    }

    fn eq(l: Term, r: Term) -> Arc<Formula> {
        Formula::atom(l, Relation::Eq, r)
    }

    fn stats() -> SearchStats {
        SearchStats {
            nodes: 0,
            backtracks: 0,
            solver_calls: 0,
            wall: Duration::ZERO,
        }
    }

    fn result(
        shapes: Vec<(usize, usize)>,
        mappings: Vec<Vec<(u64, u64)>>,
    ) -> SynthResult {
        let length = shapes.len();
        let blocks = mappings
            .into_iter()
            .enumerate()
            .map(|(index, pairs)| BlockMapping {
                index,
                in_width: shapes[index].0,
                out_width: shapes[index].1,
                mappings: pairs,
            })
            .collect();
        SynthResult {
            length,
            shapes: shapes
                .into_iter()
                .map(|(in_width, out_width)| BlockShape {
                    in_width,
                    out_width,
                })
                .collect(),
            mappings: PartialMappings { length, blocks },
            stats: stats(),
        }
    }

    #[test]
    fn free_search_pins_one_entry() {
        // f0(10) = 01: one block, one pinned entry. The comparison
        // against a 2-bit constant pins the output width.
        let phi = eq(cbits("10").defer(1), cbits("01"));
        let run = synthesize(&phi, &SynthConfig::default()).unwrap();
        assert_eq!(run.results.len(), 1);
        let r = &run.results[0];
        assert_eq!(r.length, 1);
        assert_eq!(
            r.shapes,
            vec![BlockShape {
                in_width: 2,
                out_width: 2
            }]
        );
        assert_eq!(r.mappings.blocks[0].mappings, vec![(2, 1)]);
        assert_eq!(r.mappings.blocks[0].out_width, 2);
        assert!(r.stats.nodes > 0);
        assert!(r.stats.solver_calls > 0);
    }

    #[test]
    fn disjunction_enumerates_distinct_mapping_groups() {
        let phi = Formula::or(
            eq(cbits("10").defer(1), cbits("01")),
            eq(cbits("10").defer(1), cbits("11")),
        );
        let cfg = SynthConfig {
            num_solutions: 5,
            ..SynthConfig::default()
        };
        let run = synthesize(&phi, &cfg).unwrap();
        // A success backtracks into the parked disjunct, so exactly the
        // two groups come out even with room for five.
        assert_eq!(run.results.len(), 2);
        assert!(run.exhausted);
        assert_eq!(run.results[0].mappings.blocks[0].mappings, vec![(2, 1)]);
        assert_eq!(run.results[1].mappings.blocks[0].mappings, vec![(2, 3)]);
    }

    #[test]
    fn next_guards_keep_unconstrained_tail_blocks() {
        // The conjunct X X true forces length 2 even though only block 0
        // is constrained, so trimming must back off.
        let phi = Formula::and(
            eq(cbits("10").defer(1), cbits("01")),
            Formula::next(Formula::next(Formula::tt())),
        );
        let run = synthesize(&phi, &SynthConfig::default()).unwrap();
        let r = &run.results[0];
        assert_eq!(r.length, 2);
        // Block 1 is unconstrained; its widths copy the neighbouring
        // interface.
        assert_eq!(
            r.shapes,
            vec![
                BlockShape {
                    in_width: 2,
                    out_width: 2
                },
                BlockShape {
                    in_width: 2,
                    out_width: 2
                },
            ]
        );
        assert!(r.mappings.blocks[1].mappings.is_empty());
    }

    #[test]
    fn fixed_length_fits_widths_to_values() {
        let phi = eq(cbits("10").defer(2), cbits("1"));
        let cfg = SynthConfig {
            arch: Architecture::FixedLength(2),
            ..SynthConfig::default()
        };
        let run = synthesize(&phi, &cfg).unwrap();
        let r = &run.results[0];
        assert_eq!(r.length, 2);
        assert_eq!(r.shapes.len(), 2);
        assert_eq!(r.shapes[0].in_width, 2);
        assert_eq!(r.shapes[0].out_width, r.shapes[1].in_width);
    }

    #[test]
    fn fixed_shapes_are_kept_verbatim() {
        let shapes = vec![
            BlockShape {
                in_width: 2,
                out_width: 3,
            },
            BlockShape {
                in_width: 3,
                out_width: 3,
            },
        ];
        let phi = eq(cbits("10").defer(2), cbits("110"));
        let cfg = SynthConfig {
            arch: Architecture::Fixed(shapes.clone()),
            ..SynthConfig::default()
        };
        let run = synthesize(&phi, &cfg).unwrap();
        let r = &run.results[0];
        assert_eq!(r.length, 2);
        assert_eq!(r.shapes, shapes);
        assert_eq!(r.mappings.blocks[0].out_width, 3);
    }

    #[test]
    fn unsatisfiable_formula_exhausts() {
        let b = cbits("1");
        let phi = Arc::new(Formula::Atom(Atom::new(b.clone(), Relation::Ne, b)));
        let run = synthesize(&phi, &SynthConfig::default()).unwrap();
        assert!(run.results.is_empty());
        assert!(run.is_failure());
        assert!(!run.budget_hit);
    }

    #[test]
    fn completion_policies_honor_mappings() {
        // One 4->4 block with 3 -> 9 specified.
        let r = result(vec![(4, 4)], vec![vec![(3, 9)]]);
        let zero = complete_blocks(&r, &CompletionPolicy::ConstantZero).unwrap();
        let table = zero.block(0).unwrap().table().to_vec();
        let mut expect = vec![0u64; 16];
        expect[3] = 9;
        assert_eq!(table, expect);

        let near = complete_blocks(&r, &CompletionPolicy::NearestSpecified).unwrap();
        assert!(near.block(0).unwrap().table().iter().all(|&v| v == 9));

        let r1 = complete_blocks(&r, &CompletionPolicy::SeededRandom(7)).unwrap();
        let r2 = complete_blocks(&r, &CompletionPolicy::SeededRandom(7)).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.block(0).unwrap().table()[3], 9);
    }

    #[test]
    fn nearest_breaks_ties_toward_lower_inputs() {
        // 01 and 10 are one flip from both 00 and 11; the lower input 00
        // wins, so its output 1 spreads.
        let r = result(vec![(2, 2)], vec![vec![(0, 1), (3, 2)]]);
        let model = complete_blocks(&r, &CompletionPolicy::NearestSpecified).unwrap();
        assert_eq!(model.block(0).unwrap().table(), &[1, 1, 1, 2]);
    }

    #[test]
    fn mappings_outside_the_shape_are_rejected() {
        let r = result(vec![(2, 1)], vec![vec![(5, 0)]]);
        assert!(matches!(
            complete_blocks(&r, &CompletionPolicy::ConstantZero),
            Err(SynthError::MappingShape { block: 0, .. })
        ));
        let r = result(vec![(2, 1)], vec![vec![(1, 2)]]);
        assert!(matches!(
            complete_blocks(&r, &CompletionPolicy::ConstantZero),
            Err(SynthError::MappingShape { block: 0, .. })
        ));
    }

    #[test]
    fn fairness_counts_equal_output_pairs() {
        let constant = BnnModel::new(vec![BoolFn::new(2, 2, vec![0, 0, 0, 0]).unwrap()]).unwrap();
        let identity = BnnModel::new(vec![BoolFn::identity(2).unwrap()]).unwrap();
        let pairs = vec![
            (
                BitVec::parse_bits("00").unwrap(),
                BitVec::parse_bits("11").unwrap(),
            ),
            (
                BitVec::parse_bits("01").unwrap(),
                BitVec::parse_bits("10").unwrap(),
            ),
        ];
        let fair = Metric::Fairness {
            pairs: pairs.clone(),
        };
        assert_eq!(evaluate_metric(&constant, &fair).unwrap(), 1.0);
        assert_eq!(evaluate_metric(&identity, &fair).unwrap(), 0.0);
        let empty = Metric::Fairness { pairs: vec![] };
        assert_eq!(evaluate_metric(&identity, &empty).unwrap(), 1.0);
    }

    #[test]
    fn robustness_scores_the_punctured_ball() {
        // Identity on 2 bits: every 1-flip neighbour of 00 changes the
        // output.
        let identity = BnnModel::new(vec![BoolFn::identity(2).unwrap()]).unwrap();
        let u = BitVec::parse_bits("00").unwrap();
        let m = Metric::Robustness { input: u, radius: 1 };
        assert_eq!(evaluate_metric(&identity, &m).unwrap(), 1.0);

        let constant = BnnModel::new(vec![BoolFn::new(2, 2, vec![0, 0, 0, 0]).unwrap()]).unwrap();
        let m = Metric::Robustness { input: u, radius: 2 };
        assert_eq!(evaluate_metric(&constant, &m).unwrap(), 0.0);

        let m = Metric::Robustness { input: u, radius: 0 };
        assert_eq!(evaluate_metric(&identity, &m).unwrap(), 0.0);
    }

    #[test]
    fn hamming_ball_counts_points_once() {
        let u = BitVec::parse_bits("0000").unwrap();
        // 4 points at distance 1 plus 6 at distance 2.
        let ball = hamming_ball(&u, 2);
        assert_eq!(ball.len(), 10);
        let distinct: BTreeSet<BitVec> = ball.iter().copied().collect();
        assert_eq!(distinct.len(), 10);
        assert!(!distinct.contains(&u));
    }

    #[test]
    fn every_completion_of_a_result_satisfies_the_formula() {
        let phi = Formula::next(eq(cbits("1").defer(1), cbits("0")));
        let run = synthesize(&phi, &SynthConfig::default()).unwrap();
        let r = &run.results[0];
        assert_eq!(r.length, 2);
        for policy in [
            CompletionPolicy::ConstantZero,
            CompletionPolicy::NearestSpecified,
            CompletionPolicy::SeededRandom(41),
        ] {
            let model = complete_blocks(r, &policy).unwrap();
            assert!(crate::tableau::check(&model, &phi).unwrap());
            assert!(satisfies(&model, &phi, 0).unwrap());
        }
    }

    #[test]
    fn free_variables_are_filled_existentially() {
        // Block 0 must map some witness input to 11. The bare atom would
        // already hold on the empty network, where the deferral collapses
        // away, so a next-guard keeps the search from stopping early.
        let phi = Formula::and(
            eq(Term::var("x", 2).defer(1), cbits("11")),
            Formula::next(Formula::tt()),
        );
        let run = synthesize(&phi, &SynthConfig::default()).unwrap();
        let r = &run.results[0];
        assert_eq!(r.length, 1);
        assert_eq!(r.mappings.blocks[0].mappings.len(), 1);
        assert_eq!(r.mappings.blocks[0].mappings[0].1, 3);
    }

    #[test]
    fn until_formulas_synthesize_their_witness_depth() {
        // The empty network fails the eventuality (the deferral collapses
        // to an identity there), so the witness needs one real block.
        let phi = Formula::until(Formula::tt(), eq(cbits("1").defer(1), cbits("0")));
        let run = synthesize(&phi, &SynthConfig::default()).unwrap();
        assert!(!run.results.is_empty());
        let r = &run.results[0];
        assert_eq!(r.length, 1);
        assert_eq!(r.mappings.blocks[0].mappings, vec![(1, 0)]);
        let model = complete_blocks(r, &CompletionPolicy::ConstantZero).unwrap();
        let nnf = to_nnf(&phi).unwrap();
        assert!(satisfies(&model, &nnf, 0).unwrap());
    }
}
