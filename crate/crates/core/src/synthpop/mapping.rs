//! Sparsest feasible industry-to-property mapping.
//!
//! Every constraint of the program is a covering constraint ("at least one
//! of these cells is 1"), so it is solved as a minimum hitting-set problem
//! by depth-first branch-and-bound with a greedy warm start.
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingProblem {
    /// `a[i][k]`: industry `i` is present in zone `k`.
    pub a: Vec<Vec<bool>>,
    /// `b[j][k]`: property type `j` is present in zone `k`.
    pub b: Vec<Vec<bool>>,
    /// `(industry, property)` pairs that may never be mapped.
    pub forbidden: Vec<(usize, usize)>,
    /// Also require that every industry present in a zone maps to at least
    /// one property type present in that zone, so that every establishment
    /// can later be housed locally.
    pub zone_coverage: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingMatrix {
    /// `x[i][j]`.
    pub x: Vec<Vec<bool>>,
}

impl MappingMatrix {
    pub fn ones(&self) -> usize {
        self.x.iter().flatten().filter(|&&v| v).count()
    }

    pub fn allows(&self, industry: usize, property: usize) -> bool {
        self.x[industry][property]
    }
}

impl MappingProblem {
    fn dims(&self) -> Result<(usize, usize, usize)> {
        let ni = self.a.len();
        let nj = self.b.len();
        if ni == 0 || nj == 0 {
            return Err(Error::invalid("mapping needs at least one industry and one property type"));
        }
        let nk = self.a[0].len();
        if self.a.iter().any(|r| r.len() != nk) || self.b.iter().any(|r| r.len() != nk) {
            return Err(Error::invalid("presence tables disagree on zone count"));
        }
        if self.forbidden.iter().any(|&(i, j)| i >= ni || j >= nj) {
            return Err(Error::invalid("forbidden pair out of range"));
        }
        Ok((ni, nj, nk))
    }

    /// Covering constraints as lists of cell indices `i * nj + j`, each
    /// tagged with the row it lives in and, for column constraints, the
    /// column.
    fn constraints(&self) -> Result<Vec<Constraint>> {
        let (ni, nj, nk) = self.dims()?;
        let allowed = |i: usize, j: usize| !self.forbidden.contains(&(i, j));
        let mut out = Vec::new();
        for i in 0..ni {
            if self.a[i].iter().any(|&p| p) {
                let cells: Vec<usize> = (0..nj).filter(|&j| allowed(i, j)).map(|j| i * nj + j).collect();
                if cells.is_empty() {
                    return Err(Error::infeasible(format!("industry {i} has no permitted property type")));
                }
                out.push(Constraint { cells, row: Some(i), col: None });
            }
        }
        for j in 0..nj {
            if self.b[j].iter().any(|&p| p) {
                let cells: Vec<usize> = (0..ni).filter(|&i| allowed(i, j)).map(|i| i * nj + j).collect();
                if cells.is_empty() {
                    return Err(Error::infeasible(format!("property type {j} admits no industry")));
                }
                out.push(Constraint { cells, row: None, col: Some(j) });
            }
        }
        if self.zone_coverage {
            for i in 0..ni {
                for k in 0..nk {
                    if !self.a[i][k] {
                        continue;
                    }
                    let cells: Vec<usize> = (0..nj)
                        .filter(|&j| self.b[j][k] && allowed(i, j))
                        .map(|j| i * nj + j)
                        .collect();
                    if cells.is_empty() {
                        return Err(Error::infeasible(format!(
                            "industry {i} in zone {k} has no permitted property type there"
                        )));
                    }
                    out.push(Constraint { cells, row: Some(i), col: None });
                }
            }
        }
        Ok(out)
    }

    /// Checks a candidate matrix against every constraint.
    pub fn is_feasible(&self, x: &MappingMatrix) -> bool {
        let Ok(cons) = self.constraints() else {
            return false;
        };
        let nj = self.b.len();
        if self.forbidden.iter().any(|&(i, j)| x.x[i][j]) {
            return false;
        }
        cons.iter().all(|c| c.cells.iter().any(|&cell| x.x[cell / nj][cell % nj]))
    }
}

#[derive(Clone, Debug)]
struct Constraint {
    cells: Vec<usize>,
    row: Option<usize>,
    col: Option<usize>,
}

struct Search<'a> {
    cons: &'a [Constraint],
    /// Constraints touched by each cell.
    by_cell: Vec<Vec<usize>>,
    nj: usize,
    best: Vec<usize>,
    nodes: u64,
}

impl Search<'_> {
    fn lower_bound(&self, covered: &[u32]) -> usize {
        let mut rows = std::collections::BTreeSet::new();
        let mut cols = 0usize;
        for (c, cons) in self.cons.iter().enumerate() {
            if covered[c] > 0 {
                continue;
            }
            match (cons.row, cons.col) {
                (Some(r), _) => {
                    rows.insert(r);
                }
                (None, Some(_)) => cols += 1,
                _ => {}
            }
        }
        rows.len().max(cols)
    }

    fn recurse(&mut self, chosen: &mut Vec<usize>, covered: &mut Vec<u32>, banned: &mut Vec<bool>) {
        self.nodes += 1;
        if chosen.len() + self.lower_bound(covered) >= self.best.len() {
            return;
        }
        // Branch on the open constraint with the fewest usable cells.
        let mut pick: Option<(usize, usize)> = None;
        for (c, cons) in self.cons.iter().enumerate() {
            if covered[c] > 0 {
                continue;
            }
            let n = cons.cells.iter().filter(|&&cell| !banned[cell]).count();
            if pick.is_none_or(|(_, m)| n < m) {
                pick = Some((c, n));
            }
        }
        let Some((c, n)) = pick else {
            self.best = chosen.clone();
            return;
        };
        if n == 0 {
            return;
        }
        let mut cells: Vec<usize> = self.cons[c].cells.iter().copied().filter(|&cell| !banned[cell]).collect();
        // Cells that close more open constraints first.
        cells.sort_by_key(|&cell| {
            std::cmp::Reverse(self.by_cell[cell].iter().filter(|&&k| covered[k] == 0).count())
        });
        let mut newly_banned = Vec::new();
        for cell in cells {
            chosen.push(cell);
            for &k in &self.by_cell[cell] {
                covered[k] += 1;
            }
            self.recurse(chosen, covered, banned);
            for &k in &self.by_cell[cell] {
                covered[k] -= 1;
            }
            chosen.pop();
            // Later siblings never use this cell: those subtrees are covered.
            banned[cell] = true;
            newly_banned.push(cell);
        }
        for cell in newly_banned {
            banned[cell] = false;
        }
    }
}

fn greedy(cons: &[Constraint], by_cell: &[Vec<usize>], n_cells: usize) -> Vec<usize> {
    let mut covered = vec![false; cons.len()];
    let mut chosen = Vec::new();
    while covered.iter().any(|&c| !c) {
        let best = (0..n_cells)
            .max_by_key(|&cell| {
                (
                    by_cell[cell].iter().filter(|&&k| !covered[k]).count(),
                    std::cmp::Reverse(cell),
                )
            })
            .unwrap();
        for &k in &by_cell[best] {
            covered[k] = true;
        }
        chosen.push(best);
    }
    chosen
}

/// Minimum number of ones subject to the row, column and (optionally) zone
/// coverage constraints.
pub fn solve_mapping(problem: &MappingProblem) -> Result<MappingMatrix> {
    let (ni, nj, _) = problem.dims()?;
    let cons = problem.constraints()?;
    let n_cells = ni * nj;
    let mut by_cell = vec![Vec::new(); n_cells];
    for (c, con) in cons.iter().enumerate() {
        for &cell in &con.cells {
            by_cell[cell].push(c);
        }
    }
    let warm = greedy(&cons, &by_cell, n_cells);
    // `best` holds one more than the incumbent so an equal-size optimum is
    // still recorded on the first pass.
    let mut search = Search {
        cons: &cons,
        by_cell,
        nj,
        best: warm.clone(),
        nodes: 0,
    };
    search.best.push(usize::MAX);
    let mut chosen = Vec::new();
    let mut covered = vec![0u32; cons.len()];
    let mut banned = vec![false; n_cells];
    search.recurse(&mut chosen, &mut covered, &mut banned);
    let cells = if search.best.last() == Some(&usize::MAX) { warm } else { search.best.clone() };
    log::debug!("mapping search visited {} nodes, {} ones", search.nodes, cells.len());
    let mut x = vec![vec![false; nj]; ni];
    for cell in cells {
        x[cell / search.nj][cell % search.nj] = true;
    }
    Ok(MappingMatrix { x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn exhaustive(p: &MappingProblem) -> Option<usize> {
        let (ni, nj) = (p.a.len(), p.b.len());
        let n = ni * nj;
        (0u32..1 << n)
            .filter_map(|mask| {
                let x = MappingMatrix {
                    x: (0..ni).map(|i| (0..nj).map(|j| mask >> (i * nj + j) & 1 == 1).collect()).collect(),
                };
                p.is_feasible(&x).then(|| mask.count_ones() as usize)
            })
            .min()
    }

    #[test]
    fn forced_single_cell() {
        let p = MappingProblem {
            a: vec![vec![true]],
            b: vec![vec![true]],
            forbidden: vec![],
            zone_coverage: true,
        };
        assert_eq!(solve_mapping(&p).unwrap().x, vec![vec![true]]);
    }

    #[test]
    fn two_by_two_needs_a_matching() {
        let p = MappingProblem {
            a: vec![vec![true]; 2],
            b: vec![vec![true]; 2],
            forbidden: vec![],
            zone_coverage: false,
        };
        let x = solve_mapping(&p).unwrap();
        assert_eq!(x.ones(), 2);
        assert_eq!(exhaustive(&p), Some(2));
        assert!(p.is_feasible(&x));
    }

    #[test]
    fn forbidden_only_column_is_infeasible() {
        // Industry 0 (restaurant) can only go to property 0 (factory).
        let p = MappingProblem {
            a: vec![vec![true]],
            b: vec![vec![true]],
            forbidden: vec![(0, 0)],
            zone_coverage: false,
        };
        assert!(matches!(solve_mapping(&p), Err(Error::Infeasible(_))));
    }

    #[test]
    fn matches_exhaustive_search_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut solved = 0;
        while solved < 60 {
            let ni = rng.random_range(1..=4);
            let nj = rng.random_range(1..=4);
            let nk = rng.random_range(1..=3);
            let p = MappingProblem {
                a: (0..ni).map(|_| (0..nk).map(|_| rng.random_bool(0.5)).collect()).collect(),
                b: (0..nj).map(|_| (0..nk).map(|_| rng.random_bool(0.6)).collect()).collect(),
                forbidden: (0..rng.random_range(0..3))
                    .map(|_| (rng.random_range(0..ni), rng.random_range(0..nj)))
                    .collect(),
                zone_coverage: rng.random_bool(0.5),
            };
            match (solve_mapping(&p), exhaustive(&p)) {
                (Ok(x), Some(best)) => {
                    assert!(p.is_feasible(&x));
                    assert_eq!(x.ones(), best, "{p:?}");
                    solved += 1;
                }
                (Err(_), None) => {}
                (got, want) => panic!("solver {got:?} vs exhaustive {want:?} on {p:?}"),
            }
        }
    }
}
