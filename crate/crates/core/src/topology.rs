//! Graph families used by the engines and baselines.
//!
//! A [`Topology`] is an immutable, undirected, simple graph on dense vertex
//! ids `0..vertex_count`, stored in compressed adjacency form so neighbor
//! iteration and degree lookup are O(1) per item.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Default cap on vertices for generated topologies (hypercube, welded tree).
pub const DEFAULT_VERTEX_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    Lollipop,
    Clique,
    Path,
    Grid,
    Hypercube,
    WeldedTree,
    General,
}

impl TopologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Lollipop => "lollipop",
            TopologyKind::Clique => "clique",
            TopologyKind::Path => "path",
            TopologyKind::Grid => "grid",
            TopologyKind::Hypercube => "hypercube",
            TopologyKind::WeldedTree => "welded_tree",
            TopologyKind::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

/// Grid neighborhood. `VonNeumann` is the default 4-neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridNeighborhood {
    #[default]
    VonNeumann,
    Moore,
}

/// Lollipop shape: clique on `0..clique_size`, path on
/// `clique_size..clique_size + path_length` in path order, bridge from
/// clique vertex 0 to the first path vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LollipopSpec {
    pub clique_size: usize,
    pub path_length: usize,
}

impl LollipopSpec {
    pub fn new(clique_size: usize, path_length: usize) -> Result<Self> {
        if clique_size == 0 {
            return Err(Error::invalid("lollipop clique_size must be at least 1"));
        }
        Ok(LollipopSpec {
            clique_size,
            path_length,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.clique_size + self.path_length
    }

    /// The bridge edge, absent when the path is empty.
    pub fn bridge(&self) -> Option<(usize, usize)> {
        (self.path_length > 0).then_some((0, self.clique_size))
    }

    pub fn is_clique_vertex(&self, v: usize) -> bool {
        v < self.clique_size
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeldedTreeSpec {
    pub height: usize,
    pub entrance: usize,
    pub exit: usize,
    /// `weld[i]` is the right-tree leaf joined to the i-th left-tree leaf
    /// (both in left-to-right heap order).
    pub weld: Vec<usize>,
}

/// Serialized form: edges as sorted `[u, v]` pairs with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyDocument {
    pub kind: TopologyKind,
    pub vertex_count: usize,
    pub edges: Vec<[usize; 2]>,
}

impl Topology {
    /// Build from an undirected edge list. Rejects self-loops, duplicate
    /// edges, and out-of-range endpoints.
    pub fn from_edges(kind: TopologyKind, vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::invalid("topology must have at least one vertex"));
        }
        let mut degree = vec![0usize; vertex_count];
        for &(u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {u}")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..vertex_count].to_vec();
        let mut targets = vec![0usize; offsets[vertex_count]];
        for &(u, v) in edges {
            targets[fill[u]] = v;
            fill[u] += 1;
            targets[fill[v]] = u;
            fill[v] += 1;
        }
        for v in 0..vertex_count {
            let nbrs = &mut targets[offsets[v]..offsets[v + 1]];
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(Topology { kind, offsets, targets })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.vertex_count())
            .flat_map(|u| self.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    /// Symmetry, no self-loops, no duplicates. Built-in constructors always
    /// satisfy this; it is exposed for tests and for deserialized graphs.
    pub fn check_invariants(&self) -> Result<()> {
        for v in 0..self.vertex_count() {
            let nbrs = self.neighbors(v);
            if nbrs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Contract(format!("neighbors of {v} not strictly sorted")));
            }
            for &u in nbrs {
                if u == v {
                    return Err(Error::Contract(format!("self-loop at {v}")));
                }
                if !self.has_edge(u, v) {
                    return Err(Error::Contract(format!("edge {v}->{u} has no reverse")));
                }
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == n
    }

    pub fn to_document(&self) -> TopologyDocument {
        TopologyDocument {
            kind: self.kind,
            vertex_count: self.vertex_count(),
            edges: self.edges().into_iter().map(|(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_document(doc: &TopologyDocument) -> Result<Self> {
        let edges: Vec<(usize, usize)> = doc.edges.iter().map(|e| (e[0], e[1])).collect();
        Topology::from_edges(doc.kind, doc.vertex_count, &edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("topology serializes")
    }
}

fn clique_edges(offset: usize, size: usize, edges: &mut Vec<(usize, usize)>) {
    for u in 0..size {
        for v in (u + 1)..size {
            edges.push((offset + u, offset + v));
        }
    }
}

pub fn build_lollipop(clique_size: usize, path_length: usize) -> Result<Topology> {
    let spec = LollipopSpec::new(clique_size, path_length)?;
    build_lollipop_from(&spec)
}

pub fn build_lollipop_from(spec: &LollipopSpec) -> Result<Topology> {
    let mut edges = Vec::with_capacity(spec.clique_size * spec.clique_size.saturating_sub(1) / 2 + spec.path_length);
    clique_edges(0, spec.clique_size, &mut edges);
    if let Some(bridge) = spec.bridge() {
        edges.push(bridge);
    }
    for i in 1..spec.path_length {
        let v = spec.clique_size + i;
        edges.push((v - 1, v));
    }
    Topology::from_edges(TopologyKind::Lollipop, spec.vertex_count(), &edges)
}

pub fn build_clique(size: usize) -> Result<Topology> {
    if size == 0 {
        return Err(Error::invalid("clique size must be at least 1"));
    }
    let mut edges = Vec::new();
    clique_edges(0, size, &mut edges);
    Topology::from_edges(TopologyKind::Clique, size, &edges)
}

/// Path on `length` vertices.
pub fn build_path(length: usize) -> Result<Topology> {
    if length == 0 {
        return Err(Error::invalid("path length must be at least 1"));
    }
    let edges: Vec<_> = (1..length).map(|v| (v - 1, v)).collect();
    Topology::from_edges(TopologyKind::Path, length, &edges)
}

pub fn build_grid(rows: usize, cols: usize) -> Result<Topology> {
    build_grid_with(rows, cols, GridNeighborhood::VonNeumann)
}

/// Non-toroidal grid, row-major vertex ids.
pub fn build_grid_with(rows: usize, cols: usize, neighborhood: GridNeighborhood) -> Result<Topology> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid dimensions must be positive"));
    }
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
            if neighborhood == GridNeighborhood::Moore && r + 1 < rows {
                if c + 1 < cols {
                    edges.push((id(r, c), id(r + 1, c + 1)));
                }
                if c > 0 {
                    edges.push((id(r, c), id(r + 1, c - 1)));
                }
            }
        }
    }
    Topology::from_edges(TopologyKind::Grid, rows * cols, &edges)
}

pub fn build_hypercube(n: usize) -> Result<Topology> {
    build_hypercube_capped(n, DEFAULT_VERTEX_CAP)
}

/// Vertex `s` is the integer whose binary digits are the label.
pub fn build_hypercube_capped(n: usize, vertex_cap: usize) -> Result<Topology> {
    if n == 0 {
        return Err(Error::invalid("hypercube dimension must be at least 1"));
    }
    if n >= usize::BITS as usize - 1 || (1usize << n) > vertex_cap {
        return Err(Error::TooLarge {
            what: "hypercube vertex count",
            requested: 1u128 << n.min(127),
            cap: vertex_cap as u128,
        });
    }
    let count = 1usize << n;
    let mut edges = Vec::with_capacity(count * n / 2);
    for s in 0..count {
        for bit in 0..n {
            let t = s ^ (1 << bit);
            if s < t {
                edges.push((s, t));
            }
        }
    }
    Topology::from_edges(TopologyKind::Hypercube, count, &edges)
}

pub fn build_welded_tree(height: usize, seed: u64) -> Result<(Topology, WeldedTreeSpec)> {
    build_welded_tree_capped(height, seed, DEFAULT_VERTEX_CAP)
}

/// Two complete binary trees of the given height, leaves joined by a
/// uniformly random bijection. Tree 1 occupies ids `0..half` in heap order
/// (root 0 is the entrance); tree 2 occupies `half..2*half` (root `half` is
/// the exit).
pub fn build_welded_tree_capped(height: usize, seed: u64, vertex_cap: usize) -> Result<(Topology, WeldedTreeSpec)> {
    if height == 0 {
        return Err(Error::invalid("welded tree height must be at least 1"));
    }
    if height >= 60 || 2 * ((1usize << (height + 1)) - 1) > vertex_cap {
        return Err(Error::TooLarge {
            what: "welded tree vertex count",
            requested: 2 * ((1u128 << (height + 1).min(126)) - 1),
            cap: vertex_cap as u128,
        });
    }
    let half = (1usize << (height + 1)) - 1;
    let leaves = 1usize << height;
    let first_leaf = leaves - 1;
    let mut edges = Vec::with_capacity(2 * (half - 1) + leaves);
    for tree in 0..2 {
        let base = tree * half;
        for child in 1..half {
            edges.push((base + (child - 1) / 2, base + child));
        }
    }
    let mut weld: Vec<usize> = (0..leaves).collect();
    weld.shuffle(&mut rng_from_seed(seed));
    for (i, &j) in weld.iter().enumerate() {
        edges.push((first_leaf + i, half + first_leaf + j));
    }
    let topo = Topology::from_edges(TopologyKind::WeldedTree, 2 * half, &edges)?;
    let spec = WeldedTreeSpec {
        height,
        entrance: 0,
        exit: half,
        weld,
    };
    Ok((topo, spec))
}
