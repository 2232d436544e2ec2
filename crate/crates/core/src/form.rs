//! Piecewise-affine functions on the network and the form domain.
//!
//! An [`EdgeFunction`] stores, for every edge, samples on a uniform grid of
//! `[0, 1]`, with sample 0 sitting at the edge's tail and the last sample at
//! its head. A function belongs to the form domain when its endpoint values
//! agree at every vertex (a common vertex trace exists) and that trace
//! vanishes at every flagged vertex.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, Subgraph};
use crate::incidence::VertexVector;

/// Default continuity tolerance, relative to max |ψ|.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    samples: Vec<Vec<f64>>,
    trace: Option<VertexVector>,
}

impl EdgeFunction {
    pub fn new(samples: Vec<Vec<f64>>) -> Result<EdgeFunction> {
        if samples.iter().any(|s| s.len() < 2) {
            return Err(Error::param("samples", "every edge needs at least 2 samples"));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("edge function samples"));
        }
        Ok(EdgeFunction {
            samples,
            trace: None,
        })
    }

    pub fn zeros(g: &Graph, samples_per_edge: usize) -> Result<EdgeFunction> {
        EdgeFunction::new(vec![vec![0.0; samples_per_edge]; g.edge_count()])
    }

    pub fn constant(g: &Graph, value: f64, samples_per_edge: usize) -> Result<EdgeFunction> {
        EdgeFunction::new(vec![vec![value; samples_per_edge]; g.edge_count()])
    }

    /// Affine interpolation of vertex values along every edge. The result
    /// carries `values` as its trace.
    pub fn from_vertex_values(g: &Graph, values: &VertexVector, samples_per_edge: usize) -> Result<EdgeFunction> {
        if values.len() != g.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: g.vertex_count(),
                got: values.len(),
            });
        }
        if samples_per_edge < 2 {
            return Err(Error::param("samples_per_edge", "must be at least 2"));
        }
        let segs = (samples_per_edge - 1) as f64;
        let samples = g
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (values.0[e.tail], values.0[e.head]);
                (0..samples_per_edge)
                    .map(|i| {
                        let x = i as f64 / segs;
                        a * (1.0 - x) + b * x
                    })
                    .collect()
            })
            .collect();
        let mut f = EdgeFunction::new(samples)?;
        f.trace = Some(values.clone());
        Ok(f)
    }

    pub fn edge_count(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self, e: usize) -> &[f64] {
        &self.samples[e]
    }

    pub fn trace(&self) -> Option<&VertexVector> {
        self.trace.as_ref()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples
            .iter()
            .flatten()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.samples.len() != g.edge_count() {
            return Err(Error::DimensionMismatch {
                expected: g.edge_count(),
                got: self.samples.len(),
            });
        }
        Ok(())
    }

    /// CSV rows `edge_id,sample_index,x,value`.
    pub fn write_csv<W: Write>(&self, g: &Graph, out: W) -> Result<()> {
        self.check_graph(g)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["edge_id", "sample_index", "x", "value"])?;
        for (e, s) in self.samples.iter().enumerate() {
            let segs = (s.len() - 1) as f64;
            for (i, v) in s.iter().enumerate() {
                w.write_record([
                    g.edge(e).id.clone(),
                    i.to_string(),
                    (i as f64 / segs).to_string(),
                    v.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityViolation {
    pub vertex: usize,
    pub values: Vec<f64>,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Continuous(VertexVector),
    Discontinuous(Vec<ContinuityViolation>),
}

impl Trace {
    pub fn ok(self) -> Option<VertexVector> {
        match self {
            Trace::Continuous(d) => Some(d),
            Trace::Discontinuous(_) => None,
        }
    }
}

/// Endpoint values meeting at each vertex, in incident-edge order.
fn endpoint_values(g: &Graph, psi: &EdgeFunction) -> Vec<Vec<f64>> {
    let mut at = vec![Vec::new(); g.vertex_count()];
    for (v, vals) in at.iter_mut().enumerate() {
        for e in g.incident(v) {
            let s = psi.samples(e);
            let edge = g.edge(e);
            if edge.tail == v {
                vals.push(s[0]);
            }
            if edge.head == v {
                vals.push(s[s.len() - 1]);
            }
        }
    }
    at
}

/// The common vertex trace d^ψ, or the vertices where endpoint values
/// disagree by more than `tol · max|ψ|`. Isolated vertices get trace 0.
pub fn vertex_trace(g: &Graph, psi: &EdgeFunction, tol: f64) -> Result<Trace> {
    psi.check_graph(g)?;
    let threshold = tol * psi.max_abs();
    let mut trace = VertexVector::zeros(g.vertex_count());
    let mut violations = Vec::new();
    for (v, values) in endpoint_values(g, psi).into_iter().enumerate() {
        let Some(&first) = values.first() else {
            continue;
        };
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let spread = hi - lo;
        if spread > threshold {
            violations.push(ContinuityViolation {
                vertex: v,
                values,
                spread,
            });
        } else {
            trace.0[v] = first;
        }
    }
    if violations.is_empty() {
        Ok(Trace::Continuous(trace))
    } else {
        Ok(Trace::Discontinuous(violations))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainViolation {
    Discontinuous(ContinuityViolation),
    NonzeroFlaggedTrace { vertex: usize, value: f64 },
}

impl DomainViolation {
    pub fn describe(&self, g: &Graph) -> String {
        match self {
            DomainViolation::Discontinuous(c) => format!(
                "discontinuous at {} (values {:?})",
                g.vertex(c.vertex).id,
                c.values
            ),
            DomainViolation::NonzeroFlaggedTrace { vertex, value } => {
                format!("nonzero trace at flagged {} ({value})", g.vertex(*vertex).id)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainVerdict {
    pub violations: Vec<DomainViolation>,
}

impl DomainVerdict {
    pub fn in_domain(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for DomainVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.in_domain() {
            write!(f, "in form domain")
        } else {
            write!(f, "{} violation(s)", self.violations.len())
        }
    }
}

/// Membership in the form domain: continuity at every vertex and a
/// vanishing trace (`|value| ≤ tol · max|ψ|`) at every flagged vertex.
pub fn in_form_domain(g: &Graph, psi: &EdgeFunction, tol: f64) -> Result<DomainVerdict> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let mut violations = Vec::new();
    if let Trace::Discontinuous(cs) = vertex_trace(g, psi, tol)? {
        violations.extend(cs.into_iter().map(DomainViolation::Discontinuous));
    }
    let threshold = tol * psi.max_abs();
    for (v, values) in endpoint_values(g, psi).into_iter().enumerate() {
        if !g.is_flagged(v) {
            continue;
        }
        if let Some(&worst) = values
            .iter()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .filter(|x| x.abs() > threshold)
        {
            violations.push(DomainViolation::NonzeroFlaggedTrace { vertex: v, value: worst });
        }
    }
    Ok(DomainVerdict { violations })
}

/// The tent at an unflagged vertex: `lambda` there, 0 at every other vertex,
/// affine along each edge.
pub fn tent_function(g: &Graph, v: &str, lambda: f64, samples_per_edge: usize) -> Result<EdgeFunction> {
    let idx = g.vertex_idx(v)?;
    if g.is_flagged(idx) {
        return Err(Error::FlaggedVertex(v.to_string()));
    }
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::param("lambda", "must be finite and nonzero"));
    }
    let mut values = VertexVector::zeros(g.vertex_count());
    values.0[idx] = lambda;
    EdgeFunction::from_vertex_values(g, &values, samples_per_edge)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2_sq: f64,
    pub h1_semi_sq: f64,
    pub h1_sq: f64,
}

/// Exact L² and H¹ norms of the piecewise-affine interpolant; every edge
/// has length 1.
pub fn norms(psi: &EdgeFunction) -> Norms {
    let mut l2_sq = 0.0;
    let mut h1_semi_sq = 0.0;
    for s in &psi.samples {
        let h = 1.0 / (s.len() - 1) as f64;
        for w in s.windows(2) {
            let (a, b) = (w[0], w[1]);
            l2_sq += h * (a * a + a * b + b * b) / 3.0;
            h1_semi_sq += (b - a) * (b - a) / h;
        }
    }
    Norms {
        l2_sq,
        h1_semi_sq,
        h1_sq: l2_sq + h1_semi_sq,
    }
}

/// L² inner product of two piecewise-affine functions on the same grid.
pub fn l2_inner(f: &EdgeFunction, g: &EdgeFunction) -> Result<f64> {
    if f.samples.len() != g.samples.len() {
        return Err(Error::DimensionMismatch {
            expected: f.samples.len(),
            got: g.samples.len(),
        });
    }
    let mut total = 0.0;
    for (a, b) in f.samples.iter().zip(&g.samples) {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let h = 1.0 / (a.len() - 1) as f64;
        for i in 0..a.len() - 1 {
            let (a0, a1, b0, b1) = (a[i], a[i + 1], b[i], b[i + 1]);
            total += h * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1) / 6.0;
        }
    }
    Ok(total)
}

/// Orthogonal projection onto L²(sub): keeps the samples on `sub`'s edges
/// and zeroes the rest. The trace is recomputed and is absent when the
/// projection is discontinuous.
pub fn project_ideal(g: &Graph, psi: &EdgeFunction, sub: &Subgraph) -> Result<EdgeFunction> {
    psi.check_graph(g)?;
    let samples = psi
        .samples
        .iter()
        .enumerate()
        .map(|(e, s)| {
            if sub.edges.contains(&e) {
                s.clone()
            } else {
                vec![0.0; s.len()]
            }
        })
        .collect();
    let mut out = EdgeFunction::new(samples)?;
    out.trace = vertex_trace(g, &out, DEFAULT_TOL)?.ok();
    Ok(out)
}

/// A random element of the form domain: random trace (zero at flagged
/// vertices), affine extension, plus random interior bumps that vanish at
/// both endpoints.
pub fn random_form_function(g: &Graph, segments: usize, rng: &mut impl Rng) -> Result<EdgeFunction> {
    let trace = VertexVector(
        (0..g.vertex_count())
            .map(|v| if g.is_flagged(v) { 0.0 } else { rng.gen_range(-1.0..1.0) })
            .collect(),
    );
    let mut f = EdgeFunction::from_vertex_values(g, &trace, segments + 1)?;
    for s in f.samples.iter_mut() {
        let last = s.len() - 1;
        for v in &mut s[1..last] {
            *v += rng.gen_range(-0.5..0.5);
        }
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    /// Every boundary vertex carrying an edge of the subgraph is flagged.
    pub structural: bool,
    /// Boundary vertices that carry at least one edge of the subgraph.
    pub effective_boundary: BTreeSet<usize>,
    pub trials: usize,
    /// Trials where "Pψ stays in the form domain" disagreed with `structural`.
    pub disagreements: usize,
    /// Pψ and (1−P)φ never share an edge, so their form product vanishes.
    pub disjoint_supports: bool,
}

impl InvarianceReport {
    pub fn invariant(&self) -> bool {
        self.structural
    }

    pub fn consistent(&self) -> bool {
        self.disagreements == 0 && self.disjoint_supports
    }
}

/// Invariance of the ideal L²(sub) under the heat semigroup: structural
/// verdict from the subgraph boundary, corroborated by projecting `trials`
/// random form-domain functions.
///
/// Boundary vertices of `sub` with no edge in `sub` are ignored: the ideal
/// only sees edges, and projection leaves such vertices surrounded by zeros.
pub fn check_invariance(g: &Graph, sub: &Subgraph, trials: usize, seed: u64) -> Result<InvarianceReport> {
    let effective_boundary = sub.edge_boundary(g);
    let structural = effective_boundary.iter().all(|&v| g.is_flagged(v));

    let complement: BTreeSet<usize> = (0..g.edge_count()).filter(|e| !sub.edges.contains(e)).collect();
    let disjoint_supports = sub.edges.is_disjoint(&complement);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut disagreements = 0;
    for _ in 0..trials {
        let psi = random_form_function(g, 4, &mut rng)?;
        let projected = project_ideal(g, &psi, sub)?;
        if in_form_domain(g, &projected, DEFAULT_TOL)?.in_domain() != structural {
            disagreements += 1;
        }
    }
    Ok(InvarianceReport {
        structural,
        effective_boundary,
        trials,
        disagreements,
        disjoint_supports,
    })
}
