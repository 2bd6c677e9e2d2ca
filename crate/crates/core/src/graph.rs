//! Immutable simple undirected graphs and the standard experiment topologies.

use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Dense zero-based vertex index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
#[repr(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub const fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    #[inline]
    fn from(v: usize) -> Self {
        VertexId(v as u32)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has an endpoint outside [0, {n})")]
    EndpointOutOfRange { u: usize, v: usize, n: usize },
    #[error("edge ({v}, {v}) is a self-loop")]
    SelfLoop { v: usize },
    #[error("graph must have at least one vertex, got n = {0}")]
    Empty(usize),
    #[error("vertex count {0} does not fit in a 32-bit vertex id")]
    TooLarge(usize),
    #[error("{kind} graph requires parameter `{param}`")]
    MissingParameter {
        kind: GraphKind,
        param: &'static str,
    },
    #[error("edge probability {0} is not in [0, 1]")]
    InvalidProbability(f64),
    #[error("adjacency is not symmetric at ({u}, {v})")]
    Asymmetric { u: usize, v: usize },
    #[error("adjacency list of vertex {0} is not strictly sorted")]
    Unsorted(usize),
}

/// Simple undirected graph in compressed adjacency form.
///
/// Neighbor lists are sorted and duplicate-free; the graph never changes
/// after construction, so a single instance can be shared by any number of
/// concurrent trials.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
    edge_count: usize,
    max_degree: usize,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("edge_count", &self.edge_count)
            .field("max_degree", &self.max_degree)
            .finish()
    }
}

impl Graph {
    /// Builds the symmetric closure of `pairs` on `n` vertices.
    ///
    /// Duplicate pairs (in either orientation) collapse to a single edge.
    pub fn from_edge_list(pairs: &[(usize, usize)], n: usize) -> Result<Self, GraphError> {
        if n > u32::MAX as usize {
            return Err(GraphError::TooLarge(n));
        }
        for &(u, v) in pairs {
            if u >= n || v >= n {
                return Err(GraphError::EndpointOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop { v });
            }
        }
        let mut lists: Vec<Vec<VertexId>> = (0..n).map(|_| Vec::new()).collect();
        for &(u, v) in pairs {
            lists[u].push(VertexId::from(v));
            lists[v].push(VertexId::from(u));
        }
        for l in &mut lists {
            l.sort_unstable();
            l.dedup();
        }
        Ok(Self::from_sorted_lists(lists))
    }

    fn from_sorted_lists(lists: Vec<Vec<VertexId>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let total: usize = lists.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        let mut max_degree = 0;
        offsets.push(0);
        for l in lists {
            max_degree = max_degree.max(l.len());
            targets.extend(l);
            offsets.push(targets.len());
        }
        Graph {
            offsets,
            targets,
            edge_count: total / 2,
            max_degree,
        }
    }

    /// Number of vertices.
    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Δ, the largest neighborhood size; 0 for an edgeless graph.
    #[inline]
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Sorted neighborhood of `v`. Panics if `v` is not a vertex.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let i = v.index();
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        let i = v.index();
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.n()).map(VertexId::from)
    }

    /// Every edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Re-checks the simple-graph invariants: sorted duplicate-free lists,
    /// no loops, symmetric adjacency.
    pub fn validate(&self) -> Result<(), GraphError> {
        for u in self.vertices() {
            let nb = self.neighbors(u);
            if nb.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GraphError::Unsorted(u.index()));
            }
            for &v in nb {
                if v == u {
                    return Err(GraphError::SelfLoop { v: u.index() });
                }
                if v.index() >= self.n() {
                    return Err(GraphError::EndpointOutOfRange {
                        u: u.index(),
                        v: v.index(),
                        n: self.n(),
                    });
                }
                if self.neighbors(v).binary_search(&u).is_err() {
                    return Err(GraphError::Asymmetric {
                        u: u.index(),
                        v: v.index(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Built-in topology families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Complete,
    Cycle,
    Path,
    /// Vertex 0 is the center, every other vertex a leaf.
    Star,
    /// G(n, p): each unordered pair is an edge independently with probability `p`.
    ErdosRenyi,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::Complete => "complete",
            GraphKind::Cycle => "cycle",
            GraphKind::Path => "path",
            GraphKind::Star => "star",
            GraphKind::ErdosRenyi => "erdos_renyi",
        })
    }
}

impl core::str::FromStr for GraphKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "complete" => Ok(GraphKind::Complete),
            "cycle" => Ok(GraphKind::Cycle),
            "path" => Ok(GraphKind::Path),
            "star" => Ok(GraphKind::Star),
            "erdos_renyi" | "erdos-renyi" | "gnp" => Ok(GraphKind::ErdosRenyi),
            _ => Err(()),
        }
    }
}

/// Generates a topology. Deterministic for fixed arguments.
///
/// `p` and `seed` are required for [`GraphKind::ErdosRenyi`] and ignored
/// otherwise. Small cycles degenerate gracefully: `cycle(1)` is a single
/// vertex and `cycle(2)` a single edge.
pub fn generate(
    kind: GraphKind,
    n: usize,
    p: Option<f64>,
    seed: Option<u64>,
) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::Empty(n));
    }
    let mut pairs = Vec::new();
    match kind {
        GraphKind::Complete => {
            for u in 0..n {
                for v in u + 1..n {
                    pairs.push((u, v));
                }
            }
        }
        GraphKind::Cycle => {
            for u in 0..n {
                let v = (u + 1) % n;
                if u != v {
                    pairs.push((u, v));
                }
            }
        }
        GraphKind::Path => pairs.extend((1..n).map(|v| (v - 1, v))),
        GraphKind::Star => pairs.extend((1..n).map(|v| (0, v))),
        GraphKind::ErdosRenyi => {
            let p = p.ok_or(GraphError::MissingParameter { kind, param: "p" })?;
            let seed = seed.ok_or(GraphError::MissingParameter {
                kind,
                param: "seed",
            })?;
            if !(0.0..=1.0).contains(&p) {
                return Err(GraphError::InvalidProbability(p));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen::<f64>() < p {
                        pairs.push((u, v));
                    }
                }
            }
        }
    }
    Graph::from_edge_list(&pairs, n)
}
