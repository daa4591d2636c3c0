//! Exact girth of Tanner-graph prefixes.
//!
//! For each column `j` we find the shortest cycle through `j` in the graph
//! restricted to columns `0..=j`. A shortest cycle of prefix `w` has some
//! largest column `j* < w`, and the search from `j*` sees it, so the girth of
//! prefix `w` is the minimum of these per-column values over `j < w`.

use rayon::prelude::*;

use super::{MatrixPrefix, ParityMatrix};
use crate::error::{Error, Result};

/// Length of the shortest cycle, or `Acyclic` for a forest. `Acyclic`
/// compares greater than every finite girth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Girth {
    Cycle(usize),
    Acyclic,
}

impl Girth {
    pub fn length(self) -> Option<usize> {
        match self {
            Girth::Cycle(g) => Some(g),
            Girth::Acyclic => None,
        }
    }
}

impl std::fmt::Display for Girth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Girth::Cycle(g) => write!(f, "{g}"),
            Girth::Acyclic => f.write_str("acyclic"),
        }
    }
}

pub fn girth_of_prefix(prefix: &MatrixPrefix<'_>) -> Girth {
    local_girths(prefix.matrix(), prefix.width())
        .into_iter()
        .min()
        .unwrap_or(Girth::Acyclic)
}

/// Girth of each requested prefix. `widths` must be strictly increasing and
/// lie in `(m, n]`.
pub fn girth_profile(matrix: &ParityMatrix, widths: &[usize]) -> Result<Vec<(usize, Girth)>> {
    if widths.is_empty() {
        return Err(Error::invalid("no widths given"));
    }
    if widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("widths must be strictly increasing"));
    }
    for &w in widths {
        MatrixPrefix::new(matrix, w)?;
    }
    let local = local_girths(matrix, *widths.last().unwrap());

    let mut out = Vec::with_capacity(widths.len());
    let mut running = Girth::Acyclic;
    let mut done = 0;
    for &w in widths {
        running = local[done..w].iter().copied().fold(running, Girth::min);
        done = w;
        out.push((w, running));
    }
    Ok(out)
}

/// Shortest cycle through column `j` using only columns `0..=j`, for every
/// `j < width`.
fn local_girths(matrix: &ParityMatrix, width: usize) -> Vec<Girth> {
    let rows = matrix.rows(width);
    (0..width)
        .into_par_iter()
        .map_init(
            || Bfs::new(matrix.num_checks(), width),
            |bfs, j| bfs.shortest_cycle_through(matrix.columns(), &rows, j),
        )
        .collect()
}

// Node ids: variables are `0..n`, check `c` is `n + c`.
struct Bfs {
    n: usize,
    epoch: u32,
    mark: Vec<u32>,
    dist: Vec<usize>,
    parent: Vec<usize>,
    level: Vec<usize>,
    next: Vec<usize>,
}

impl Bfs {
    fn new(num_checks: usize, num_vars: usize) -> Self {
        let total = num_checks + num_vars;
        Bfs {
            n: num_vars,
            epoch: 0,
            mark: vec![0; total],
            dist: vec![0; total],
            parent: vec![usize::MAX; total],
            level: Vec::new(),
            next: Vec::new(),
        }
    }

    fn shortest_cycle_through(
        &mut self,
        columns: &[Vec<usize>],
        rows: &[Vec<usize>],
        start: usize,
    ) -> Girth {
        self.epoch += 1;
        let epoch = self.epoch;
        let n = self.n;
        self.mark[start] = epoch;
        self.dist[start] = 0;
        self.parent[start] = usize::MAX;
        self.level.clear();
        self.level.push(start);

        let mut best = usize::MAX;
        let mut d = 0;
        while !self.level.is_empty() {
            self.next.clear();
            for i in 0..self.level.len() {
                let u = self.level[i];
                let parent = self.parent[u];
                let visit = |w: usize, this: &mut Self, best: &mut usize| {
                    if w == parent {
                        return;
                    }
                    if this.mark[w] == epoch {
                        *best = (*best).min(d + this.dist[w] + 1);
                    } else {
                        this.mark[w] = epoch;
                        this.dist[w] = d + 1;
                        this.parent[w] = u;
                        this.next.push(w);
                    }
                };
                if u < n {
                    for &c in &columns[u] {
                        visit(n + c, self, &mut best);
                    }
                } else {
                    for &v in &rows[u - n] {
                        if v > start {
                            break;
                        }
                        visit(v, self, &mut best);
                    }
                }
            }
            if best != usize::MAX {
                return Girth::Cycle(best);
            }
            std::mem::swap(&mut self.level, &mut self.next);
            d += 1;
        }
        Girth::Acyclic
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tanner::{peg_construct, DegreeProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent oracle: plain BFS from every node of the restricted graph,
    /// built from an explicit edge list.
    fn brute_girth(h: &ParityMatrix, width: usize) -> Girth {
        let n = width;
        let total = n + h.num_checks();
        let mut adj = vec![Vec::new(); total];
        for j in 0..width {
            for &c in h.column(j) {
                adj[j].push(n + c);
                adj[n + c].push(j);
            }
        }
        let mut best = usize::MAX;
        for s in 0..total {
            let mut dist = vec![usize::MAX; total];
            let mut par = vec![usize::MAX; total];
            let mut q = std::collections::VecDeque::new();
            dist[s] = 0;
            q.push_back(s);
            while let Some(u) = q.pop_front() {
                for &w in &adj[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        par[w] = u;
                        q.push_back(w);
                    } else if par[u] != w {
                        best = best.min(dist[u] + dist[w] + 1);
                    }
                }
            }
        }
        if best == usize::MAX {
            Girth::Acyclic
        } else {
            Girth::Cycle(best)
        }
    }

    fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ParityMatrix {
        let cols = (0..n)
            .map(|_| {
                let d = rng.random_range(1..=m.min(3));
                rand::seq::index::sample(rng, m, d).into_vec()
            })
            .collect();
        ParityMatrix::from_columns(m, cols).unwrap()
    }

    #[test]
    fn two_columns_sharing_two_checks() {
        let h = ParityMatrix::from_columns(2, vec![vec![0, 1], vec![0, 1], vec![0]]).unwrap();
        assert_eq!(girth_of_prefix(&h.prefix(3).unwrap()), Girth::Cycle(4));
    }

    #[test]
    fn forest_is_acyclic() {
        // path: v0 - c0 - v1 - c1 - v2 - c2
        let h = ParityMatrix::from_columns(3, vec![vec![0], vec![0, 1], vec![1, 2], vec![2]]).unwrap();
        assert_eq!(girth_of_prefix(&h.full().unwrap()), Girth::Acyclic);
    }

    #[test]
    fn six_cycle() {
        let h = ParityMatrix::from_columns(3, vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![0]])
            .unwrap();
        assert_eq!(girth_of_prefix(&h.full().unwrap()), Girth::Cycle(6));
        assert_eq!(girth_of_prefix(&h.prefix(4).unwrap()), Girth::Cycle(6));
    }

    #[test]
    fn matches_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let m = rng.random_range(2..7);
            let n = rng.random_range(m + 1..m + 10);
            let h = random_matrix(&mut rng, m, n);
            let widths: Vec<usize> = (m + 1..=n).collect();
            let prof = girth_profile(&h, &widths).unwrap();
            for (w, g) in prof {
                assert_eq!(g, brute_girth(&h, w), "m={m} n={n} w={w} {h:?}");
            }
        }
    }

    #[test]
    fn profile_is_non_increasing_and_even() {
        let h = peg_construct(50, 300, &DegreeProfile::interleaved_4_5(300), 9).unwrap();
        let widths: Vec<usize> = (60..=300).step_by(20).collect();
        let prof = girth_profile(&h, &widths).unwrap();
        for pair in prof.windows(2) {
            assert!(pair[0].1 >= pair[1].1);
        }
        for (_, g) in &prof {
            if let Some(len) = g.length() {
                assert_eq!(len % 2, 0);
            }
        }
    }

    #[test]
    fn profile_rejects_bad_widths() {
        let h = peg_construct(10, 40, &DegreeProfile::uniform(40, 3), 1).unwrap();
        assert!(girth_profile(&h, &[20, 20]).is_err());
        assert!(girth_profile(&h, &[30, 20]).is_err());
        assert!(girth_profile(&h, &[10]).is_err());
        assert!(girth_profile(&h, &[41]).is_err());
        assert!(girth_profile(&h, &[]).is_err());
    }
}
