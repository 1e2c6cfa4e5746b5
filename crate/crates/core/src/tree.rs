//! Growing rooted trees with compressed never-visited leaves.
//!
//! A leaf attached by a growth step and never stepped on is *pristine*: it
//! has no name, only a per-parent counter. Pristine leaves of one vertex are
//! exchangeable (none of them can grow before it is visited), so a uniform
//! choice among them only needs the count. When the walker steps onto a
//! pristine slot, exactly one leaf is materialized and gets a [`VertexId`].

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense index of a materialized vertex. The root is always `VertexId(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    pub const ROOT: VertexId = VertexId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for VertexId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "v{}", self.0)
    }
}

const NO_PARENT: u32 = u32::MAX;

/// Initial tree shapes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum TreeShape {
    /// A lone root carrying a self-loop.
    SingleVertexWithLoop,
    /// Root with a self-loop and `leaves` pristine leaves.
    StarWithLoop { leaves: u64 },
    /// Path `0 - 1 - ... - length` rooted at vertex 0.
    Path { length: u32, loop_at_root: bool },
    /// Arbitrary tree on vertices `0..=edges.len()`, rooted at 0.
    Explicit { edges: Vec<(u32, u32)>, root_self_loop: bool },
}

/// Result of one uniform edge choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "vertex", rename_all = "snake_case")]
pub enum MoveOutcome {
    ToParent,
    ToChild(VertexId),
    /// A pristine leaf was materialized by this move.
    ToFreshLeaf(VertexId),
    SelfLoop,
}

#[derive(Debug, Clone)]
pub struct GrowingTree {
    parent: Vec<u32>,
    children: Vec<Vec<VertexId>>,
    pristine: Vec<u64>,
    depth: Vec<u32>,
    birth: Vec<u64>,
    /// Materialized children that are currently leaves.
    bare_children: Vec<u32>,
    root_self_loop: bool,
    vertex_count: u64,
    height: u64,
}

impl GrowingTree {
    pub fn new(shape: &TreeShape) -> Result<Self> {
        match *shape {
            TreeShape::SingleVertexWithLoop => Ok(Self::with_root(true)),
            TreeShape::StarWithLoop { leaves } => {
                let mut t = Self::with_root(true);
                t.add_leaves(VertexId::ROOT, leaves);
                Ok(t)
            }
            TreeShape::Path { length, loop_at_root } => {
                let mut t = Self::with_root(loop_at_root);
                let mut tip = VertexId::ROOT;
                for _ in 0..length {
                    tip = t.attach_child(tip, 0);
                }
                Ok(t)
            }
            TreeShape::Explicit { ref edges, root_self_loop } => Self::from_edges(edges, root_self_loop),
        }
    }

    fn with_root(root_self_loop: bool) -> Self {
        Self {
            parent: vec![NO_PARENT],
            children: vec![Vec::new()],
            pristine: vec![0],
            depth: vec![0],
            birth: vec![0],
            bare_children: vec![0],
            root_self_loop,
            vertex_count: 1,
            height: 0,
        }
    }

    fn from_edges(edges: &[(u32, u32)], root_self_loop: bool) -> Result<Self> {
        let n = edges.len() + 1;
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::Construction(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::Construction(format!("edge ({a}, {b}) is a self-loop")));
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut parent = vec![NO_PARENT; n];
        let mut depth = vec![0u32; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        seen[0] = true;
        order.push(0u32);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in &adj[v as usize] {
                if w == parent[v as usize] {
                    continue;
                }
                if seen[w as usize] {
                    return Err(Error::Construction(format!("edge list contains a cycle through {w}")));
                }
                seen[w as usize] = true;
                parent[w as usize] = v;
                depth[w as usize] = depth[v as usize] + 1;
                order.push(w);
            }
        }
        if order.len() != n {
            return Err(Error::Construction(format!(
                "edge list is disconnected: {} of {n} vertices reachable from 0",
                order.len()
            )));
        }
        let mut children = vec![Vec::new(); n];
        for &(a, b) in edges {
            let (p, c) = if parent[b as usize] == a { (a, b) } else { (b, a) };
            children[p as usize].push(VertexId(c));
        }
        let bare_children = children
            .iter()
            .map(|cs| cs.iter().filter(|c| adj[c.index()].len() == 1).count() as u32)
            .collect();
        let height = depth.iter().copied().max().unwrap_or(0) as u64;
        Ok(Self {
            parent,
            children,
            pristine: vec![0; n],
            depth,
            birth: vec![0; n],
            bare_children,
            root_self_loop,
            vertex_count: n as u64,
            height,
        })
    }

    fn attach_child(&mut self, v: VertexId, at: u64) -> VertexId {
        let id = VertexId(u32::try_from(self.parent.len()).expect("materialized vertex limit exceeded"));
        let depth = self.depth[v.index()] + 1;
        if self.children[v.index()].is_empty() && self.pristine[v.index()] == 0 && v != VertexId::ROOT {
            let p = self.parent[v.index()] as usize;
            self.bare_children[p] -= 1;
        }
        self.parent.push(v.0);
        self.children.push(Vec::new());
        self.pristine.push(0);
        self.depth.push(depth);
        self.birth.push(at);
        self.bare_children.push(0);
        self.children[v.index()].push(id);
        self.bare_children[v.index()] += 1;
        self.vertex_count = self.vertex_count.saturating_add(1);
        self.height = self.height.max(u64::from(depth));
        id
    }

    /// Attach `count` pristine leaves to `v`.
    pub fn add_leaves(&mut self, v: VertexId, count: u64) {
        if count == 0 {
            return;
        }
        let i = v.index();
        if v != VertexId::ROOT && self.children[i].is_empty() && self.pristine[i] == 0 {
            self.bare_children[self.parent[i] as usize] -= 1;
        }
        self.pristine[i] = self.pristine[i].saturating_add(count);
        self.vertex_count = self.vertex_count.saturating_add(count);
        self.height = self.height.max(u64::from(self.depth[i]) + 1);
    }

    /// Choose one of the edges incident to `v` uniformly. A fresh leaf
    /// materialized by this move is stamped with birth time `at`.
    pub fn uniform_neighbor<R: Rng + ?Sized>(&mut self, v: VertexId, at: u64, rng: &mut R) -> MoveOutcome {
        let i = v.index();
        let degree = self.degree(v);
        let mut slot = if degree == 1 { 0 } else { rng.random_range(0..degree) };
        if self.parent[i] != NO_PARENT {
            if slot == 0 {
                return MoveOutcome::ToParent;
            }
            slot -= 1;
        }
        if i == 0 && self.root_self_loop {
            if slot == 0 {
                return MoveOutcome::SelfLoop;
            }
            slot -= 1;
        }
        let materialized = self.children[i].len() as u64;
        if slot < materialized {
            return MoveOutcome::ToChild(self.children[i][slot as usize]);
        }
        let id = self.attach_child(v, at);
        self.pristine[i] -= 1;
        // The pristine leaf was already counted in vertex_count.
        self.vertex_count -= 1;
        MoveOutcome::ToFreshLeaf(id)
    }

    /// Number of incident edges, the root self-loop counted once.
    #[inline]
    pub fn degree(&self, v: VertexId) -> u64 {
        let i = v.index();
        u64::from(self.parent[i] != NO_PARENT)
            + self.children[i].len() as u64
            + self.pristine[i]
            + u64::from(i == 0 && self.root_self_loop)
    }

    /// Number of neighbours of `v` that are leaves.
    pub fn leaf_count(&self, v: VertexId) -> u64 {
        let i = v.index();
        let parent_is_leaf = match self.parent(v) {
            Some(p) => self.degree(p) == 1,
            None => false,
        };
        self.pristine[i] + u64::from(self.bare_children[i]) + u64::from(parent_is_leaf)
    }

    /// At least one neighbouring leaf and exactly one non-leaf neighbour.
    pub fn is_quasi_star(&self, v: VertexId) -> bool {
        let leaves = self.leaf_count(v);
        leaves >= 1 && self.degree(v) == leaves + 1
    }

    #[inline]
    pub fn depth(&self, v: VertexId) -> u64 {
        u64::from(self.depth[v.index()])
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        match self.parent[v.index()] {
            NO_PARENT => None,
            p => Some(VertexId(p)),
        }
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.index()]
    }

    pub fn pristine_count(&self, v: VertexId) -> u64 {
        self.pristine[v.index()]
    }

    pub fn birth_time(&self, v: VertexId) -> u64 {
        self.birth[v.index()]
    }

    /// Graph distance via the lowest common ancestor.
    pub fn dist(&self, u: VertexId, v: VertexId) -> u64 {
        let (mut a, mut b) = (u, v);
        let mut steps = 0;
        while self.depth[a.index()] > self.depth[b.index()] {
            a = VertexId(self.parent[a.index()]);
            steps += 1;
        }
        while self.depth[b.index()] > self.depth[a.index()] {
            b = VertexId(self.parent[b.index()]);
            steps += 1;
        }
        while a != b {
            a = VertexId(self.parent[a.index()]);
            b = VertexId(self.parent[b.index()]);
            steps += 2;
        }
        steps
    }

    /// Whether `a` lies on the path from `v` to the root (`v` included).
    pub fn is_ancestor(&self, a: VertexId, v: VertexId) -> bool {
        if self.depth[a.index()] > self.depth[v.index()] {
            return false;
        }
        let mut cur = v;
        while self.depth[cur.index()] > self.depth[a.index()] {
            cur = VertexId(self.parent[cur.index()]);
        }
        cur == a
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index() < self.parent.len()
    }

    /// Maximum depth over materialized and pristine vertices.
    pub fn height(&self) -> u64 {
        self.height
    }

    /// All vertices, pristine leaves included.
    pub fn vertex_count(&self) -> u64 {
        self.vertex_count
    }

    pub fn materialized_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root_self_loop(&self) -> bool {
        self.root_self_loop
    }

    /// Count of vertices per degree, pristine leaves included.
    pub fn degree_histogram(&self) -> BTreeMap<u64, u64> {
        let mut hist = BTreeMap::new();
        let mut pristine = 0u64;
        for i in 0..self.parent.len() {
            *hist.entry(self.degree(VertexId(i as u32))).or_insert(0u64) += 1;
            pristine = pristine.saturating_add(self.pristine[i]);
        }
        if pristine > 0 {
            let e = hist.entry(1).or_insert(0u64);
            *e = e.saturating_add(pristine);
        }
        hist
    }

    pub fn snapshot(&self) -> TreeSnapshot {
        TreeSnapshot {
            vertices: (0..self.parent.len())
                .map(|i| VertexRecord {
                    id: VertexId(i as u32),
                    parent: self.parent(VertexId(i as u32)),
                    depth: u64::from(self.depth[i]),
                    birth_time: self.birth[i],
                    pristine: self.pristine[i],
                })
                .collect(),
            root_self_loop: self.root_self_loop,
        }
    }
}

/// JSON export of a tree for debugging and offline degree analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSnapshot {
    pub vertices: Vec<VertexRecord>,
    pub root_self_loop: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: VertexId,
    pub parent: Option<VertexId>,
    pub depth: u64,
    /// Time the vertex received its name: 0 for the initial tree, otherwise
    /// the time the walker first stepped onto it.
    pub birth_time: u64,
    pub pristine: u64,
}
