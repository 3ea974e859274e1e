//! Difference-logic core: an incremental constraint graph with exact
//! backtracking, and a branching solver for the Boolean skeleton.
//!
//! An atom `x - y <= c` is the edge `y -> x` with weight `c`; a
//! conjunction of atoms is satisfiable iff its graph has no negative
//! cycle, and the (negated) shortest distances are then a satisfying
//! assignment. The graph keeps a feasible assignment at all times and
//! repairs it on each push, so a failed push costs only the repair it
//! rolled back.

use std::collections::VecDeque;

use crate::solver::{Clause, ConstraintProblem, Cube, DiffAtom, SolverModel};

/// Incremental difference-constraint graph with a push/pop discipline.
#[derive(Debug, Clone)]
pub struct DiffGraph {
    dist: Vec<i64>,
    adj: Vec<Vec<(usize, i64)>>,
    frames: Vec<Frame>,
}

#[derive(Debug, Clone)]
struct Frame {
    /// Adjacency entry to drop on pop; `None` when the push was a no-op.
    from: Option<usize>,
    /// Overwritten distances in push order; restored in reverse.
    saved: Vec<(usize, i64)>,
}

impl DiffGraph {
    pub fn new(num_vars: usize) -> DiffGraph {
        DiffGraph {
            dist: vec![0; num_vars],
            adj: vec![Vec::new(); num_vars],
            frames: Vec::new(),
        }
    }

    /// Current feasible assignment, valid for all pushed atoms.
    pub fn assignment(&self) -> &[i64] {
        &self.dist
    }

    /// Assert one atom. Returns false and leaves the graph unchanged when
    /// the atom closes a negative cycle; otherwise the push must later be
    /// matched by a `pop`.
    pub fn push(&mut self, atom: &DiffAtom) -> bool {
        let (u, v, w) = (atom.y.0, atom.x.0, atom.c);
        if u == v {
            if w < 0 {
                return false;
            }
            self.frames.push(Frame {
                from: None,
                saved: Vec::new(),
            });
            return true;
        }
        let mut saved = Vec::new();
        if self.dist[v] > self.dist[u] + w {
            // Repair by relaxation from v. The pre-push graph is feasible,
            // so any negative cycle must pass through the new edge: it is
            // detected the moment u itself would relax. The per-node
            // counter is a backstop with the same meaning.
            saved.push((v, self.dist[v]));
            self.dist[v] = self.dist[u] + w;
            let mut relax_count = vec![0u32; self.dist.len()];
            let mut queue = VecDeque::from([v]);
            while let Some(a) = queue.pop_front() {
                for &(b, c) in &self.adj[a] {
                    if self.dist[b] > self.dist[a] + c {
                        if b == u || relax_count[b] as usize > self.dist.len() {
                            for &(node, d) in saved.iter().rev() {
                                self.dist[node] = d;
                            }
                            return false;
                        }
                        relax_count[b] += 1;
                        saved.push((b, self.dist[b]));
                        self.dist[b] = self.dist[a] + c;
                        queue.push_back(b);
                    }
                }
            }
        }
        self.adj[u].push((v, w));
        self.frames.push(Frame {
            from: Some(u),
            saved,
        });
        true
    }

    /// Undo the most recent successful push exactly.
    pub fn pop(&mut self) {
        let frame = self.frames.pop().expect("pop without a matching push");
        if let Some(u) = frame.from {
            self.adj[u].pop();
        }
        for &(node, d) in frame.saved.iter().rev() {
            self.dist[node] = d;
        }
    }

    fn push_cube(&mut self, cube: &Cube) -> bool {
        for (i, atom) in cube.iter().enumerate() {
            if !self.push(atom) {
                for _ in 0..i {
                    self.pop();
                }
                return false;
            }
        }
        true
    }

    fn pop_cube(&mut self, cube: &Cube) {
        for _ in 0..cube.len() {
            self.pop();
        }
    }
}

/// Decide the problem. Unit clauses are asserted up front; the remaining
/// clauses are searched depth-first, shortest clause first, with the graph
/// carrying the theory state across branches. A returned model is always
/// run through `verify`.
pub fn solve(problem: &ConstraintProblem) -> Option<SolverModel> {
    let mut graph = DiffGraph::new(problem.num_vars);
    let mut branching: Vec<&Clause> = Vec::new();
    for clause in &problem.clauses {
        match clause.len() {
            0 => return None,
            1 => {
                if !graph.push_cube(&clause[0]) {
                    return None;
                }
            }
            _ => branching.push(clause),
        }
    }
    branching.sort_by_key(|clause| clause.len());
    if !dfs(&mut graph, &branching) {
        return None;
    }
    let zero = graph.dist[problem.zero.0];
    let values = graph.dist.iter().map(|d| d - zero).collect();
    let model = SolverModel { values };
    assert!(
        verify(problem, &model),
        "internal solver model failed verification"
    );
    Some(model)
}

fn dfs(graph: &mut DiffGraph, clauses: &[&Clause]) -> bool {
    let Some((first, rest)) = clauses.split_first() else {
        return true;
    };
    for cube in first.iter() {
        if graph.push_cube(cube) {
            if dfs(graph, rest) {
                return true;
            }
            graph.pop_cube(cube);
        }
    }
    false
}

/// Independent check that `model` satisfies every clause of `problem`.
pub fn verify(problem: &ConstraintProblem, model: &SolverModel) -> bool {
    if model.values.len() != problem.num_vars {
        return false;
    }
    problem.clauses.iter().all(|clause| {
        clause.iter().any(|cube| {
            cube.iter()
                .all(|a| model.value(a.x) - model.value(a.y) <= a.c)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::VarId;

    fn atom(x: usize, y: usize, c: i64) -> DiffAtom {
        DiffAtom {
            x: VarId(x),
            y: VarId(y),
            c,
        }
    }

    fn units(num_vars: usize, atoms: &[DiffAtom]) -> ConstraintProblem {
        ConstraintProblem {
            num_vars,
            zero: VarId(0),
            clauses: atoms.iter().map(|a| vec![vec![*a]]).collect(),
        }
    }

    #[test]
    fn negative_triangle_is_unsat() {
        let p = units(4, &[atom(1, 2, -1), atom(2, 3, -1), atom(3, 1, -1)]);
        assert!(solve(&p).is_none());
    }

    #[test]
    fn loose_pair_is_sat() {
        let p = units(3, &[atom(1, 2, 1), atom(2, 1, 1)]);
        let m = solve(&p).unwrap();
        assert!(verify(&p, &m));
        assert!((m.value(VarId(1)) - m.value(VarId(2))).abs() <= 1);
    }

    #[test]
    fn zero_cycle_is_sat() {
        // Equalities chain into a zero-weight cycle, which is fine.
        let p = units(
            3,
            &[atom(1, 2, 0), atom(2, 1, 0), atom(2, 0, 5), atom(0, 2, -5)],
        );
        let m = solve(&p).unwrap();
        assert_eq!(m.value(VarId(1)), 5);
        assert_eq!(m.value(VarId(2)), 5);
        assert_eq!(m.value(VarId(0)), 0);
    }

    #[test]
    fn pop_restores_distances_exactly() {
        let mut g = DiffGraph::new(4);
        assert!(g.push(&atom(1, 0, -3)));
        assert!(g.push(&atom(2, 1, -2)));
        let before = g.assignment().to_vec();
        assert!(g.push(&atom(3, 2, -4)));
        assert!(!g.push(&atom(0, 3, 8)));
        g.pop();
        assert_eq!(g.assignment(), &before[..]);
    }

    #[test]
    fn failed_push_leaves_graph_unchanged() {
        let mut g = DiffGraph::new(3);
        assert!(g.push(&atom(1, 2, -1)));
        let before = g.assignment().to_vec();
        assert!(!g.push(&atom(2, 1, 0)));
        assert_eq!(g.assignment(), &before[..]);
        // Still usable afterwards.
        assert!(g.push(&atom(2, 1, 1)));
    }

    #[test]
    fn reflexive_atoms() {
        let mut g = DiffGraph::new(2);
        assert!(g.push(&atom(1, 1, 0)));
        assert!(!g.push(&atom(1, 1, -1)));
        g.pop();
    }

    #[test]
    fn branching_exhausts_every_value() {
        // 0 <= x <= 3 and x != 0..=3: every branch closes a cycle.
        let bounds = vec![vec![atom(1, 0, 3), atom(0, 1, 0)]];
        let ne = |v: i64| vec![vec![atom(1, 0, v - 1)], vec![atom(0, 1, -v - 1)]];
        let mut clauses = vec![bounds];
        for v in 0..4 {
            clauses.push(ne(v));
        }
        let p = ConstraintProblem {
            num_vars: 2,
            zero: VarId(0),
            clauses: clauses.clone(),
        };
        assert!(solve(&p).is_none());
        // Dropping one exclusion leaves exactly that value.
        for keep in 0..4i64 {
            let sub: Vec<_> = clauses
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != (keep + 1) as usize)
                .map(|(_, c)| c.clone())
                .collect();
            let p = ConstraintProblem {
                num_vars: 2,
                zero: VarId(0),
                clauses: sub,
            };
            let m = solve(&p).unwrap();
            assert_eq!(m.value(VarId(1)), keep);
        }
    }

    #[test]
    fn empty_clause_is_unsat_empty_problem_is_sat() {
        let p = ConstraintProblem {
            num_vars: 1,
            zero: VarId(0),
            clauses: vec![vec![]],
        };
        assert!(solve(&p).is_none());
        let p = ConstraintProblem {
            num_vars: 1,
            zero: VarId(0),
            clauses: vec![],
        };
        assert!(solve(&p).is_some());
    }

    #[test]
    fn verifier_rejects_corrupt_model() {
        let p = units(2, &[atom(1, 0, -3)]);
        let good = solve(&p).unwrap();
        assert!(verify(&p, &good));
        let bad = SolverModel {
            values: vec![0, 0],
        };
        assert!(!verify(&p, &bad));
        let short = SolverModel { values: vec![0] };
        assert!(!verify(&p, &short));
    }
}
