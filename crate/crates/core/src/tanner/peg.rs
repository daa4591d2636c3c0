//! Progressive edge growth, one column at a time in index order.
//!
//! Because columns are grown left to right, the graph restricted to the
//! first `w` columns is exactly the graph PEG had built after step `w`, so
//! each prefix is a PEG code in its own right.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DegreeProfile, ParityMatrix};
use crate::error::{Error, Result};

/// Builds an `num_checks x num_vars` parity-check matrix by progressive edge
/// growth.
///
/// The first edge of each column goes to a check of minimum current degree.
/// Every further edge goes to a check the column cannot reach yet in the
/// Tanner graph, or, when every check is reachable, to one at the deepest BFS
/// level. Remaining ties are broken by minimum check degree and then by a
/// uniform draw from `seed`.
pub fn peg_construct(
    num_checks: usize,
    num_vars: usize,
    profile: &DegreeProfile,
    seed: u64,
) -> Result<ParityMatrix> {
    if num_checks == 0 {
        return Err(Error::invalid("number of checks must be positive"));
    }
    if num_vars <= num_checks {
        return Err(Error::invalid(format!(
            "{num_vars} variables with {num_checks} checks gives a non-positive rate"
        )));
    }
    if profile.len() != num_vars {
        return Err(Error::invalid(format!(
            "degree profile has {} entries, expected {num_vars}",
            profile.len()
        )));
    }
    profile.validate(num_checks)?;

    let mut peg = Peg::new(num_checks, num_vars, seed);
    for (j, &degree) in profile.degrees().iter().enumerate() {
        for _ in 0..degree {
            let c = peg.select_check(j);
            peg.add_edge(c, j);
        }
    }
    ParityMatrix::from_columns(num_checks, peg.columns)
}

struct Peg {
    columns: Vec<Vec<usize>>,
    check_adj: Vec<Vec<usize>>,
    rng: ChaCha8Rng,
    // BFS bookkeeping, stamped with `epoch` so nothing is cleared between runs
    epoch: u32,
    check_mark: Vec<u32>,
    var_mark: Vec<u32>,
    frontier: Vec<usize>,
    next_vars: Vec<usize>,
    next_checks: Vec<usize>,
    ties: Vec<usize>,
}

impl Peg {
    fn new(num_checks: usize, num_vars: usize, seed: u64) -> Self {
        Peg {
            columns: vec![Vec::new(); num_vars],
            check_adj: vec![Vec::new(); num_checks],
            rng: ChaCha8Rng::seed_from_u64(seed),
            epoch: 0,
            check_mark: vec![0; num_checks],
            var_mark: vec![0; num_vars],
            frontier: Vec::new(),
            next_vars: Vec::new(),
            next_checks: Vec::new(),
            ties: Vec::new(),
        }
    }

    fn add_edge(&mut self, check: usize, var: usize) {
        self.columns[var].push(check);
        self.check_adj[check].push(var);
    }

    fn select_check(&mut self, var: usize) -> usize {
        let m = self.check_adj.len();
        if self.columns[var].is_empty() {
            return self.pick_min_degree(0..m);
        }

        self.epoch += 1;
        let epoch = self.epoch;
        self.var_mark[var] = epoch;
        self.frontier.clear();
        for &c in &self.columns[var] {
            self.check_mark[c] = epoch;
            self.frontier.push(c);
        }
        let mut reached = self.frontier.len();

        loop {
            self.next_vars.clear();
            for &c in &self.frontier {
                for &v in &self.check_adj[c] {
                    if self.var_mark[v] != epoch {
                        self.var_mark[v] = epoch;
                        self.next_vars.push(v);
                    }
                }
            }
            self.next_checks.clear();
            for &v in &self.next_vars {
                for &c in &self.columns[v] {
                    if self.check_mark[c] != epoch {
                        self.check_mark[c] = epoch;
                        self.next_checks.push(c);
                    }
                }
            }

            if self.next_checks.is_empty() {
                // expansion stalled: some checks are unreachable
                let marks = std::mem::take(&mut self.check_mark);
                let pick = self.pick_min_degree((0..m).filter(|&c| marks[c] != epoch));
                self.check_mark = marks;
                return pick;
            }
            reached += self.next_checks.len();
            if reached == m {
                // everything reachable: choose among the deepest level
                let deepest = std::mem::take(&mut self.next_checks);
                let pick = self.pick_min_degree(deepest.iter().copied());
                self.next_checks = deepest;
                return pick;
            }
            std::mem::swap(&mut self.frontier, &mut self.next_checks);
        }
    }

    fn pick_min_degree(&mut self, candidates: impl Iterator<Item = usize>) -> usize {
        self.ties.clear();
        let mut best = usize::MAX;
        for c in candidates {
            let d = self.check_adj[c].len();
            if d < best {
                best = d;
                self.ties.clear();
            }
            if d == best {
                self.ties.push(c);
            }
        }
        debug_assert!(!self.ties.is_empty());
        self.ties[self.rng.random_range(0..self.ties.len())]
    }
}
