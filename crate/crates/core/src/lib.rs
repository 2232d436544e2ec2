//! Oriented networks with infinite-degree nodes: finite spans, invariant
//! ideals, heat flow and Laplacian spectra.
//!
//! A flagged vertex stands in for a node of infinite degree. The heat
//! semigroup sees such a node as a Dirichlet point, so heat released on one
//! side of it never reaches the other. The modules below compute the
//! resulting decomposition combinatorially ([`connectivity`]), check it
//! against the form domain ([`form`]), reproduce it by simulation ([`heat`])
//! and count it spectrally ([`spectral`]).

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod connectivity;
pub mod error;
pub mod fixtures;
pub mod form;
pub mod graph;
pub mod heat;
pub mod incidence;
pub mod spectral;
pub mod union_find;

pub use error::{Error, Result};
pub use graph::{Direction, Graph, GraphSpec, Subgraph};
