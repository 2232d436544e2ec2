//! Pathwise connectedness, finite spans and the Δ-component partition.
//!
//! Orientation is ignored throughout. Two edges are adjacent in the span
//! relation when they share an endpoint that is *not* flagged infinite; the
//! finite span of an edge is its closure under that relation, and the
//! Δ-components are the equivalence classes.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::union_find::UnionFind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Connectivity {
    /// BFS tree rooted at vertex 0: `tree[v] = Some((parent, edge))` for
    /// every non-root vertex.
    Connected { tree: Vec<Option<(usize, usize)>> },
    /// Vertices unreachable from vertex 0. No edge joins them to the rest.
    Disconnected { cut: BTreeSet<usize> },
}

impl Connectivity {
    pub fn is_connected(&self) -> bool {
        matches!(self, Connectivity::Connected { .. })
    }
}

pub fn pathwise_connected(g: &Graph) -> Result<Connectivity> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::NoVertices);
    }
    let mut tree = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for e in g.incident(v) {
            let w = g.edge(e).other(v);
            if !seen[w] {
                seen[w] = true;
                tree[w] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    let cut: BTreeSet<usize> = (0..n).filter(|&v| !seen[v]).collect();
    if cut.is_empty() {
        Ok(Connectivity::Connected { tree })
    } else {
        Ok(Connectivity::Disconnected { cut })
    }
}

/// S_fin(e): all edges reachable from `e` through unflagged vertices.
pub fn finite_span(g: &Graph, e: usize) -> BTreeSet<usize> {
    let mut span = BTreeSet::from([e]);
    let mut visited_vertex = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([e]);
    while let Some(cur) = queue.pop_front() {
        let edge = g.edge(cur);
        for v in [edge.tail, edge.head] {
            if g.is_flagged(v) || visited_vertex[v] {
                continue;
            }
            visited_vertex[v] = true;
            for next in g.incident(v) {
                if span.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    span
}

pub fn finite_span_by_id(g: &Graph, edge: &str) -> Result<BTreeSet<usize>> {
    Ok(finite_span(g, g.edge_idx(edge)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub edges: BTreeSet<usize>,
    /// Flagged vertices incident to the block's edges.
    pub boundary: BTreeSet<usize>,
}

/// Partition of E into distinct finite spans, ordered by smallest edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanPartition {
    pub blocks: Vec<Block>,
    pub block_of: Vec<usize>,
}

#[derive(Serialize)]
struct BlockJson {
    edges: Vec<String>,
    boundary: Vec<String>,
}

#[derive(Serialize)]
struct PartitionJson {
    blocks: Vec<BlockJson>,
    irreducible: bool,
}

impl SpanPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn to_json(&self, g: &Graph) -> String {
        let doc = PartitionJson {
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    edges: g.edge_ids(&b.edges),
                    boundary: g.vertex_ids(&b.boundary),
                })
                .collect(),
            irreducible: self.blocks.len() == 1,
        };
        serde_json::to_string(&doc).expect("partition is always serializable")
    }
}

pub fn delta_components(g: &Graph) -> SpanPartition {
    let mut uf = UnionFind::new(g.edge_count());
    for v in 0..g.vertex_count() {
        if g.is_flagged(v) {
            continue;
        }
        let inc = g.incident(v);
        for pair in inc.windows(2) {
            uf.union(pair[0], pair[1]);
        }
    }
    let mut block_of = vec![0; g.edge_count()];
    let blocks = uf
        .sets()
        .into_iter()
        .enumerate()
        .map(|(i, set)| {
            let mut boundary = BTreeSet::new();
            for &e in &set {
                block_of[e] = i;
                let edge = g.edge(e);
                boundary.extend([edge.tail, edge.head].into_iter().filter(|&v| g.is_flagged(v)));
            }
            Block {
                edges: set.into_iter().collect(),
                boundary,
            }
        })
        .collect();
    SpanPartition { blocks, block_of }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Irreducibility {
    Irreducible,
    /// Two edges from different Δ-components and the flagged vertices
    /// bounding the first one's component.
    Reducible {
        edge_a: usize,
        edge_b: usize,
        separator: BTreeSet<usize>,
        blocks: usize,
    },
}

impl Irreducibility {
    pub fn is_irreducible(&self) -> bool {
        matches!(self, Irreducibility::Irreducible)
    }
}

pub fn is_irreducible(g: &Graph) -> Result<Irreducibility> {
    if g.edge_count() == 0 {
        return Err(Error::Edgeless);
    }
    let p = delta_components(g);
    if p.len() == 1 {
        return Ok(Irreducibility::Irreducible);
    }
    let first = &p.blocks[0];
    Ok(Irreducibility::Reducible {
        edge_a: *first.edges.first().expect("blocks are nonempty"),
        edge_b: *p.blocks[1].edges.first().expect("blocks are nonempty"),
        separator: first.boundary.clone(),
        blocks: p.len(),
    })
}

/// Number of minimal nontrivial invariant ideals, i.e. of distinct finite spans.
pub fn count_invariant_ideals(g: &Graph) -> usize {
    delta_components(g).len()
}

/// Connected components of the subgraph induced by `vertices` (isolated
/// vertices count), by union-find.
pub(crate) fn component_count(g: &Graph, vertices: &BTreeSet<usize>) -> usize {
    let index: Vec<Option<usize>> = {
        let mut idx = vec![None; g.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            idx[v] = Some(i);
        }
        idx
    };
    let mut uf = UnionFind::new(vertices.len());
    for e in g.edges() {
        if let (Some(a), Some(b)) = (index[e.tail], index[e.head]) {
            uf.union(a, b);
        }
    }
    uf.count()
}
