//! Host-graph data model.
//!
//! A [`Graph`] is a finite oriented graph `(V, E, ∂)` in which every vertex
//! carries an `infinite` flag. The flag stands in for an infinite star at that
//! vertex: every Dirichlet-form computation in this crate treats a flagged
//! vertex as having infinite degree, whatever its stored arity.
//!
//! Vertices and edges are kept sorted by id (plain byte order), so every
//! matrix, partition and serialized output built from a graph is reproducible.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDecl {
    pub id: String,
    #[serde(default)]
    pub infinite: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDecl {
    pub id: String,
    pub tail: String,
    pub head: String,
}

/// Serialized form of a graph; this is the on-disk JSON schema.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<VertexDecl>,
    pub edges: Vec<EdgeDecl>,
}

impl GraphSpec {
    pub fn vertex(mut self, id: &str, infinite: bool) -> Self {
        self.vertices.push(VertexDecl {
            id: id.to_string(),
            infinite,
        });
        self
    }

    pub fn edge(mut self, id: &str, tail: &str, head: &str) -> Self {
        self.edges.push(EdgeDecl {
            id: id.to_string(),
            tail: tail.to_string(),
            head: head.to_string(),
        });
        self
    }

    pub fn build(self) -> Result<Graph> {
        Graph::build(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub infinite: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degree {
    pub inbound: usize,
    pub outbound: usize,
    pub total: usize,
    pub infinite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
    Both,
}

/// Immutable oriented graph with per-vertex infinite-degree flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    vertex_index: BTreeMap<String, usize>,
    edge_index: BTreeMap<String, usize>,
    // edge indices ending at / starting from each vertex, ascending
    inbound: Vec<Vec<usize>>,
    outbound: Vec<Vec<usize>>,
}

impl Graph {
    pub fn builder() -> GraphSpec {
        GraphSpec::default()
    }

    pub fn build(spec: GraphSpec) -> Result<Graph> {
        let mut vdecl = spec.vertices;
        let mut edecl = spec.edges;
        vdecl.sort_by(|a, b| a.id.cmp(&b.id));
        edecl.sort_by(|a, b| a.id.cmp(&b.id));

        let mut vertex_index = BTreeMap::new();
        for (i, v) in vdecl.iter().enumerate() {
            if vertex_index.insert(v.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(v.id.clone()));
            }
        }

        let mut edge_index = BTreeMap::new();
        let mut edges = Vec::with_capacity(edecl.len());
        let mut inbound = vec![Vec::new(); vdecl.len()];
        let mut outbound = vec![Vec::new(); vdecl.len()];
        for (i, e) in edecl.into_iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(e.id));
            }
            let lookup = |v: &str| {
                vertex_index
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::DanglingEndpoint {
                        edge: e.id.clone(),
                        vertex: v.to_string(),
                    })
            };
            let tail = lookup(&e.tail)?;
            let head = lookup(&e.head)?;
            if tail == head {
                return Err(Error::SelfLoop(e.id));
            }
            outbound[tail].push(i);
            inbound[head].push(i);
            edges.push(Edge {
                id: e.id,
                tail,
                head,
            });
        }

        let vertices = vdecl
            .into_iter()
            .map(|v| Vertex {
                id: v.id,
                infinite: v.infinite,
            })
            .collect();

        Ok(Graph {
            vertices,
            edges,
            vertex_index,
            edge_index,
            inbound,
            outbound,
        })
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let spec: GraphSpec = serde_json::from_str(text)?;
        Graph::build(spec)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDecl {
                    id: v.id.clone(),
                    infinite: v.infinite,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDecl {
                    id: e.id.clone(),
                    tail: self.vertices[e.tail].id.clone(),
                    head: self.vertices[e.head].id.clone(),
                })
                .collect(),
        }
    }

    /// Canonical compact JSON (id-sorted).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("graph spec is always serializable")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn is_flagged(&self, v: usize) -> bool {
        self.vertices[v].infinite
    }

    pub fn vertex_idx(&self, id: &str) -> Result<usize> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn edge_idx(&self, id: &str) -> Result<usize> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    /// Edges ending at `v` (Γ⁺(v)).
    pub fn inbound(&self, v: usize) -> &[usize] {
        &self.inbound[v]
    }

    /// Edges starting at `v` (Γ⁻(v)).
    pub fn outbound(&self, v: usize) -> &[usize] {
        &self.outbound[v]
    }

    /// All edges incident to `v`, ascending.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        let mut all: Vec<usize> = self.inbound[v]
            .iter()
            .chain(&self.outbound[v])
            .copied()
            .collect();
        all.sort_unstable();
        all
    }

    pub fn host_degree(&self, v: usize) -> usize {
        self.inbound[v].len() + self.outbound[v].len()
    }

    pub fn degree(&self, id: &str) -> Result<Degree> {
        let v = self.vertex_idx(id)?;
        let inbound = self.inbound[v].len();
        let outbound = self.outbound[v].len();
        Ok(Degree {
            inbound,
            outbound,
            total: inbound + outbound,
            infinite: self.vertices[v].infinite,
        })
    }

    /// Star centred at `id`: the centre, the opposite endpoints and the
    /// selected incident edges.
    pub fn star(&self, id: &str, direction: Direction) -> Result<Subgraph> {
        let v = self.vertex_idx(id)?;
        let edges: BTreeSet<usize> = match direction {
            Direction::In => self.inbound[v].iter().copied().collect(),
            Direction::Out => self.outbound[v].iter().copied().collect(),
            Direction::Both => self.incident(v).into_iter().collect(),
        };
        let mut vertices = BTreeSet::from([v]);
        vertices.extend(edges.iter().map(|&e| self.edges[e].other(v)));
        let boundary = self.boundary_of(&vertices);
        Ok(Subgraph {
            vertices,
            edges,
            boundary,
        })
    }

    pub fn induced_subgraph<'a, I>(&self, ids: I) -> Result<Subgraph>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let vs = ids
            .into_iter()
            .map(|id| self.vertex_idx(id))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(self.induced_by(vs))
    }

    /// Subgraph induced by a set of vertex indices: every edge with both
    /// endpoints inside, plus the boundary (inside vertices adjacent to an
    /// outside vertex).
    pub fn induced_by(&self, vertices: BTreeSet<usize>) -> Subgraph {
        debug_assert!(vertices.iter().all(|&v| v < self.vertices.len()));
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| vertices.contains(&e.tail) && vertices.contains(&e.head))
            .map(|(i, _)| i)
            .collect();
        let boundary = self.boundary_of(&vertices);
        Subgraph {
            vertices,
            edges,
            boundary,
        }
    }

    /// G_fin: the subgraph induced by the unflagged vertices.
    pub fn finite_part(&self) -> Subgraph {
        let vs = (0..self.vertices.len())
            .filter(|&v| !self.vertices[v].infinite)
            .collect();
        self.induced_by(vs)
    }

    fn boundary_of(&self, vertices: &BTreeSet<usize>) -> BTreeSet<usize> {
        vertices
            .iter()
            .copied()
            .filter(|&v| {
                self.inbound[v]
                    .iter()
                    .chain(&self.outbound[v])
                    .any(|&e| !vertices.contains(&self.edges[e].other(v)))
            })
            .collect()
    }

    pub fn flagged_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].infinite)
            .collect()
    }

    pub fn vertex_ids<'a>(&'a self, set: impl IntoIterator<Item = &'a usize>) -> Vec<String> {
        set.into_iter()
            .map(|&v| self.vertices[v].id.clone())
            .collect()
    }

    pub fn edge_ids<'a>(&'a self, set: impl IntoIterator<Item = &'a usize>) -> Vec<String> {
        set.into_iter().map(|&e| self.edges[e].id.clone()).collect()
    }
}

/// Vertex/edge selection of a parent graph. Indices refer to the graph the
/// subgraph was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgraph {
    pub vertices: BTreeSet<usize>,
    pub edges: BTreeSet<usize>,
    pub boundary: BTreeSet<usize>,
}

impl Subgraph {
    pub fn whole(g: &Graph) -> Subgraph {
        g.induced_by((0..g.vertex_count()).collect())
    }

    pub fn vertex_ids(&self, g: &Graph) -> Vec<String> {
        g.vertex_ids(&self.vertices)
    }

    pub fn edge_ids(&self, g: &Graph) -> Vec<String> {
        g.edge_ids(&self.edges)
    }

    pub fn boundary_ids(&self, g: &Graph) -> Vec<String> {
        g.vertex_ids(&self.boundary)
    }

    /// Boundary vertices that carry at least one edge of the subgraph.
    pub fn edge_boundary(&self, g: &Graph) -> BTreeSet<usize> {
        let touched: HashSet<usize> = self
            .edges
            .iter()
            .flat_map(|&e| [g.edge(e).tail, g.edge(e).head])
            .collect();
        self.boundary
            .iter()
            .copied()
            .filter(|v| touched.contains(v))
            .collect()
    }
}
