//! Independent reference implementations used as test oracles: a walk on an
//! explicit adjacency list with every leaf materialized, and an exhaustive
//! enumerator over all growth and edge-choice branches.

#![allow(dead_code)]

use rand::Rng;

/// Tree stored as plain adjacency lists; vertex 0 is the root.
#[derive(Debug, Clone)]
pub struct RefTree {
    pub adj: Vec<Vec<usize>>,
    pub depth: Vec<u64>,
    pub root_loop: bool,
}

impl RefTree {
    pub fn single_with_loop() -> Self {
        Self { adj: vec![vec![]], depth: vec![0], root_loop: true }
    }

    pub fn star_with_loop(leaves: usize) -> Self {
        let mut t = Self::single_with_loop();
        for _ in 0..leaves {
            t.add_leaf(0);
        }
        t
    }

    pub fn path(len: usize, root_loop: bool) -> Self {
        let mut t = Self { adj: vec![vec![]], depth: vec![0], root_loop };
        for v in 0..len {
            t.add_leaf(v);
        }
        t
    }

    pub fn add_leaf(&mut self, v: usize) -> usize {
        let id = self.adj.len();
        self.adj.push(vec![v]);
        self.adj[v].push(id);
        self.depth.push(self.depth[v] + 1);
        id
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len() + usize::from(v == 0 && self.root_loop)
    }

    pub fn height(&self) -> u64 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Edge `slot` at `v`: neighbours in adjacency order, then the loop.
    pub fn follow(&self, v: usize, slot: usize) -> usize {
        self.adj[v].get(slot).copied().unwrap_or(v)
    }
}

/// Walk on a [`RefTree`], drawing growth counts from a finite pmf.
pub struct RefWalk {
    pub tree: RefTree,
    pub pos: usize,
    pub n: u64,
    pub s: u64,
    pub crossings: u64,
}

impl RefWalk {
    pub fn new(tree: RefTree, pos: usize, s: u64) -> Self {
        Self { tree, pos, n: 0, s, crossings: 0 }
    }

    pub fn step<R: Rng>(&mut self, xi: impl FnOnce(u64, &mut R) -> u64, rng: &mut R) {
        if self.n % self.s == 0 {
            for _ in 0..xi(self.n, rng) {
                self.tree.add_leaf(self.pos);
            }
        }
        let slot = rng.random_range(0..self.tree.degree(self.pos));
        let next = self.tree.follow(self.pos, slot);
        if next == self.pos {
            self.crossings += 1;
        }
        self.pos = next;
        self.n += 1;
    }

    pub fn depth(&self) -> u64 {
        self.tree.depth[self.pos]
    }
}

pub type Visit<'a> = dyn FnMut(&[(usize, u64)], f64) + 'a;

/// Calls `visit(history, probability)` for every branch of `horizon` steps.
/// `history[n]` is `(position, depth)` at time `n`. `pmf` lists the growth
/// counts with their probabilities; zero-probability entries are skipped.
pub fn enumerate(
    tree: RefTree,
    pos: usize,
    s: u64,
    pmf: &[(u64, f64)],
    horizon: u64,
    visit: &mut Visit,
) {
    let mut history = vec![(pos, tree.depth[pos])];
    recurse(tree, pos, 0, s, pmf, horizon, 1.0, &mut history, visit);
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: RefTree,
    pos: usize,
    n: u64,
    s: u64,
    pmf: &[(u64, f64)],
    horizon: u64,
    prob: f64,
    history: &mut Vec<(usize, u64)>,
    visit: &mut Visit,
) {
    if n == horizon {
        visit(history, prob);
        return;
    }
    let growth: Vec<(u64, f64)> =
        if n % s == 0 { pmf.iter().copied().filter(|&(_, p)| p > 0.0).collect() } else { vec![(0, 1.0)] };
    for (k, pk) in growth {
        let mut grown = tree.clone();
        for _ in 0..k {
            grown.add_leaf(pos);
        }
        let d = grown.degree(pos);
        for slot in 0..d {
            let next = grown.follow(pos, slot);
            history.push((next, grown.depth[next]));
            recurse(grown.clone(), next, n + 1, s, pmf, horizon, prob * pk / d as f64, history, visit);
            history.pop();
        }
    }
}
