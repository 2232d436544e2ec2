//! Finite-element heat flow on the network.
//!
//! Every edge is a copy of `[0, 1]` split into `n` equal segments with
//! piecewise-linear hat functions. An unflagged vertex owns a single degree
//! of freedom shared by all incident edges, which builds continuity into the
//! numbering and leaves the natural (Kirchhoff) condition to the Galerkin
//! assembly. Flagged vertices own no degree of freedom: their value is
//! pinned to zero.
//!
//! Time stepping is implicit Euler, `(M + dt·K) u_{k+1} = M u_k`. With the
//! lumped mass matrix `M + dt·K` is a Stieltjes matrix, so its Cholesky
//! factor has nonpositive off-diagonal entries and both triangular solves
//! only ever add nonnegative terms: nonnegative data stays nonnegative in
//! floating point, not just in exact arithmetic.

use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::DVector;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};
use serde::Serialize;

use crate::connectivity::{delta_components, finite_span};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofOwner {
    Vertex(usize),
    Interior { edge: usize, index: usize },
}

#[derive(Debug, Clone)]
pub struct Mesh {
    graph: Graph,
    segments: usize,
    vertex_dof: Vec<Option<usize>>,
    owners: Vec<DofOwner>,
}

/// Numbers unflagged vertices first (id order), then edge interiors (edge id
/// order, then position along the edge).
pub fn build_mesh(g: &Graph, segments: usize) -> Result<Mesh> {
    if segments < 2 {
        return Err(Error::param("n", "need at least 2 segments per edge"));
    }
    let mut owners = Vec::new();
    let mut vertex_dof = vec![None; g.vertex_count()];
    for (v, slot) in vertex_dof.iter_mut().enumerate() {
        if !g.is_flagged(v) {
            *slot = Some(owners.len());
            owners.push(DofOwner::Vertex(v));
        }
    }
    for edge in 0..g.edge_count() {
        for index in 1..segments {
            owners.push(DofOwner::Interior { edge, index });
        }
    }
    Ok(Mesh {
        graph: g.clone(),
        segments,
        vertex_dof,
        owners,
    })
}

impl Mesh {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    pub fn h(&self) -> f64 {
        1.0 / self.segments as f64
    }

    pub fn dof_count(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, dof: usize) -> DofOwner {
        self.owners[dof]
    }

    pub fn vertex_dof(&self, v: usize) -> Option<usize> {
        self.vertex_dof[v]
    }

    /// DOF at grid point `index` (0..=n) of `edge`; `None` at flagged ends.
    pub fn edge_dof(&self, edge: usize, index: usize) -> Option<usize> {
        let e = self.graph.edge(edge);
        if index == 0 {
            self.vertex_dof[e.tail]
        } else if index == self.segments {
            self.vertex_dof[e.head]
        } else {
            let interior_base = self.vertex_dof.iter().flatten().count();
            Some(interior_base + edge * (self.segments - 1) + index - 1)
        }
    }

    /// Grid values on every edge (`n + 1` per edge), zero at flagged ends.
    pub fn edge_values(&self, u: &[f64]) -> Vec<Vec<f64>> {
        (0..self.graph.edge_count())
            .map(|e| {
                (0..=self.segments)
                    .map(|i| self.edge_dof(e, i).map_or(0.0, |d| u[d]))
                    .collect()
            })
            .collect()
    }

    /// Δ-component of every DOF. Interior DOFs follow their edge; a vertex
    /// DOF follows any incident edge; edgeless unflagged vertices get fresh
    /// component numbers after the edge blocks.
    pub fn dof_components(&self) -> Vec<usize> {
        let partition = delta_components(&self.graph);
        let mut next = partition.len();
        let mut isolated = vec![None; self.graph.vertex_count()];
        self.owners
            .iter()
            .map(|owner| match *owner {
                DofOwner::Interior { edge, .. } => partition.block_of[edge],
                DofOwner::Vertex(v) => match self.graph.incident(v).first() {
                    Some(&e) => partition.block_of[e],
                    None => *isolated[v].get_or_insert_with(|| {
                        next += 1;
                        next - 1
                    }),
                },
            })
            .collect()
    }

    /// DOF sets of the Δ-components that touch no flagged vertex (pure
    /// Neumann pieces, where heat is conserved).
    pub fn flag_free_components(&self) -> Vec<Vec<usize>> {
        let partition = delta_components(&self.graph);
        let comps = self.dof_components();
        let ncomp = comps.iter().copied().max().map_or(0, |m| m + 1);
        let mut sets = vec![Vec::new(); ncomp];
        for (dof, &c) in comps.iter().enumerate() {
            sets[c].push(dof);
        }
        sets.into_iter()
            .enumerate()
            .filter(|(c, _)| partition.blocks.get(*c).is_none_or(|b| b.boundary.is_empty()))
            .map(|(_, s)| s)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassMode {
    #[default]
    Lumped,
    Consistent,
}

#[derive(Debug, Clone)]
pub struct OperatorPair<'m> {
    pub mesh: &'m Mesh,
    pub stiffness: CsrMatrix<f64>,
    pub mass: CsrMatrix<f64>,
    pub mass_mode: MassMode,
}

pub fn assemble(mesh: &Mesh, mass_mode: MassMode) -> OperatorPair<'_> {
    let n = mesh.dof_count();
    let h = mesh.h();
    let mut k = CooMatrix::new(n, n);
    let mut m = CooMatrix::new(n, n);
    for e in 0..mesh.graph.edge_count() {
        for s in 0..mesh.segments {
            let nodes = [mesh.edge_dof(e, s), mesh.edge_dof(e, s + 1)];
            for (a, da) in nodes.iter().enumerate() {
                let Some(da) = *da else { continue };
                for (b, db) in nodes.iter().enumerate() {
                    let Some(db) = *db else { continue };
                    let same = a == b;
                    k.push(da, db, if same { 1.0 / h } else { -1.0 / h });
                    match mass_mode {
                        MassMode::Consistent => m.push(da, db, if same { h / 3.0 } else { h / 6.0 }),
                        MassMode::Lumped if same => m.push(da, db, h / 2.0),
                        MassMode::Lumped => {}
                    }
                }
            }
        }
    }
    OperatorPair {
        mesh,
        stiffness: CsrMatrix::from(&k),
        mass: CsrMatrix::from(&m),
        mass_mode,
    }
}

pub(crate) fn matvec(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    a.row_iter()
        .map(|row| {
            row.col_indices()
                .iter()
                .zip(row.values())
                .map(|(&c, &v)| v * x[c])
                .sum()
        })
        .collect()
}

impl OperatorPair<'_> {
    /// Entries `(i, j)` of K or M with `i`, `j` in different Δ-components.
    pub fn cross_component_entries(&self) -> usize {
        let comps = self.mesh.dof_components();
        [&self.stiffness, &self.mass]
            .iter()
            .flat_map(|m| m.triplet_iter())
            .filter(|&(i, j, &v)| v != 0.0 && comps[i] != comps[j])
            .count()
    }

    /// Total heat Σ(M u) over a DOF subset.
    pub fn heat(&self, u: &[f64], dofs: &[usize]) -> f64 {
        let mu = matvec(&self.mass, u);
        dofs.iter().map(|&d| mu[d]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct HeatState<'m> {
    pub mesh: &'m Mesh,
    pub t: f64,
    pub u: Vec<f64>,
}

impl HeatState<'_> {
    pub fn edge_values(&self) -> Vec<Vec<f64>> {
        self.mesh.edge_values(&self.u)
    }
}

/// Implicit Euler from `u0` with step `dt` until `t ≥ t_end`. The returned
/// trajectory starts with the initial state.
pub fn evolve<'m>(pair: &OperatorPair<'m>, u0: &[f64], dt: f64, t_end: f64) -> Result<Vec<HeatState<'m>>> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", "must be positive and finite"));
    }
    if !(t_end >= dt) || !t_end.is_finite() {
        return Err(Error::param("T", "must be finite and at least dt"));
    }
    let n = pair.mesh.dof_count();
    if u0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: u0.len() });
    }
    if u0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial state"));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut trajectory = Vec::with_capacity(steps + 1);
    trajectory.push(HeatState {
        mesh: pair.mesh,
        t: 0.0,
        u: u0.to_vec(),
    });
    if n == 0 {
        for k in 1..=steps {
            trajectory.push(HeatState { mesh: pair.mesh, t: k as f64 * dt, u: Vec::new() });
        }
        return Ok(trajectory);
    }
    let system: CsrMatrix<f64> = &pair.mass + &(&pair.stiffness * dt);
    let chol = CscCholesky::factor(&CscMatrix::from(&system)).map_err(|e| Error::SolverBreakdown {
        step: 0,
        reason: e.to_string(),
    })?;
    let mut u = u0.to_vec();
    for k in 1..=steps {
        let rhs = DVector::from_vec(matvec(&pair.mass, &u));
        let sol = chol.solve(&rhs);
        u = sol.column(0).iter().copied().collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverBreakdown {
                step: k,
                reason: "non-finite solution".into(),
            });
        }
        trajectory.push(HeatState {
            mesh: pair.mesh,
            t: k as f64 * dt,
            u: u.clone(),
        });
    }
    Ok(trajectory)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupportProfile {
    /// `(min, max)` of the grid values on each edge, endpoints included.
    pub extremes: Vec<(f64, f64)>,
    pub support: BTreeSet<usize>,
}

pub fn support_profile(state: &HeatState<'_>, theta: f64) -> Result<SupportProfile> {
    if !(theta >= 0.0) {
        return Err(Error::param("theta", "must be nonnegative"));
    }
    let extremes: Vec<(f64, f64)> = state
        .edge_values()
        .iter()
        .map(|vals| {
            vals.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        })
        .collect();
    let support = extremes
        .iter()
        .enumerate()
        .filter(|(_, &(_, hi))| hi > theta)
        .map(|(e, _)| e)
        .collect();
    Ok(SupportProfile { extremes, support })
}

/// Hat of height 1 centred at the midpoint of `edge`, zero at both ends.
pub fn edge_bump(mesh: &Mesh, edge: usize) -> Vec<f64> {
    let mut u = vec![0.0; mesh.dof_count()];
    let n = mesh.segments as f64;
    for i in 1..mesh.segments {
        let x = i as f64 / n;
        let d = mesh.edge_dof(edge, i).expect("interior points always have a DOF");
        u[d] = (1.0 - (2.0 * x - 1.0).abs()).max(0.0);
    }
    u
}

/// Writes `t,edge_id,sample_index,x,value` rows for every state.
pub fn write_trajectory_csv<W: Write>(trajectory: &[HeatState<'_>], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["t", "edge_id", "sample_index", "x", "value"])?;
    for state in trajectory {
        let g = state.mesh.graph();
        let n = state.mesh.segments as f64;
        for (e, vals) in state.edge_values().iter().enumerate() {
            for (i, v) in vals.iter().enumerate() {
                w.write_record([
                    state.t.to_string(),
                    g.edge(e).id.clone(),
                    i.to_string(),
                    (i as f64 / n).to_string(),
                    v.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleParams {
    pub edge: String,
    pub n: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub pass: bool,
    pub params: MaxPrincipleParams,
    pub steps: usize,
    pub span: Vec<String>,
    pub support: Vec<String>,
    /// Smallest interior grid value over the span's edges at t = T.
    pub min_span_interior: f64,
    /// Largest |u| on edges outside the span over all steps.
    pub max_outside: f64,
    pub block_threshold: f64,
    pub span_positive: bool,
    pub outside_blocked: bool,
    pub support_matches_span: bool,
}

/// Heat released from a bump on `edge` must become strictly positive on the
/// edge's finite span and stay at roundoff level everywhere else.
pub fn verify_strong_max_principle(
    g: &Graph,
    edge: &str,
    n: usize,
    dt: f64,
    t_end: f64,
    theta: f64,
) -> Result<MaxPrincipleReport> {
    let e0 = g.edge_idx(edge)?;
    if !(theta >= 0.0) {
        return Err(Error::param("theta", "must be nonnegative"));
    }
    let mesh = build_mesh(g, n)?;
    let pair = assemble(&mesh, MassMode::Lumped);
    let u0 = edge_bump(&mesh, e0);
    let u0_max = u0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let trajectory = evolve(&pair, &u0, dt, t_end)?;
    let span = finite_span(g, e0);
    let block_threshold = 1e-12 * u0_max;

    let mut max_outside = 0.0f64;
    for state in &trajectory {
        for (e, vals) in state.edge_values().iter().enumerate() {
            if !span.contains(&e) {
                max_outside = vals.iter().fold(max_outside, |m, v| m.max(v.abs()));
            }
        }
    }
    let last = trajectory.last().expect("trajectory holds the initial state");
    let values = last.edge_values();
    let min_span_interior = span
        .iter()
        .flat_map(|&e| values[e][1..n].iter().copied())
        .fold(f64::INFINITY, f64::min);
    let profile = support_profile(last, theta)?;

    let span_positive = min_span_interior > 0.0;
    let outside_blocked = max_outside <= block_threshold;
    let support_matches_span = profile.support == span;
    Ok(MaxPrincipleReport {
        pass: span_positive && outside_blocked && support_matches_span,
        params: MaxPrincipleParams {
            edge: edge.to_string(),
            n,
            dt,
            t_end,
            theta,
        },
        steps: trajectory.len() - 1,
        span: g.edge_ids(&span),
        support: g.edge_ids(&profile.support),
        min_span_interior,
        max_outside,
        block_threshold,
        span_positive,
        outside_blocked,
        support_matches_span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use nalgebra::DMatrix;

    fn dense(m: &CsrMatrix<f64>) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(m.nrows(), m.ncols());
        for (i, j, v) in m.triplet_iter() {
            d[(i, j)] += *v;
        }
        d
    }

    #[test]
    fn dof_counts() {
        assert_eq!(build_mesh(&fixtures::single(), 4).unwrap().dof_count(), 5);
        assert_eq!(build_mesh(&fixtures::single_dd(), 4).unwrap().dof_count(), 3);
        assert_eq!(build_mesh(&fixtures::star4_inf(), 2).unwrap().dof_count(), 8);
        assert!(build_mesh(&fixtures::single(), 1).is_err());
    }

    #[test]
    fn numbering_shares_vertex_dofs() {
        let g = fixtures::p3();
        let mesh = build_mesh(&g, 4).unwrap();
        assert_eq!(mesh.edge_dof(0, 4), mesh.edge_dof(1, 0));
        assert_eq!(mesh.edge_dof(0, 0), Some(0));
        assert_eq!(mesh.edge_dof(0, 1), Some(4));
        let s = fixtures::single_d();
        let mesh = build_mesh(&s, 4).unwrap();
        assert_eq!(mesh.edge_dof(0, 4), None);
    }

    #[test]
    fn single_edge_lumped_matrices() {
        let mesh = build_mesh(&fixtures::single(), 2).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        // DOF order is (v0, v1, midpoint); hand assembly with h = 1/2
        let k = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, -2.0, 0.0, 2.0, -2.0, -2.0, -2.0, 4.0]);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![0.25, 0.25, 0.5]));
        assert_eq!(dense(&pair.stiffness), k);
        assert_eq!(dense(&pair.mass), m);

        let consistent = assemble(&mesh, MassMode::Consistent);
        let mc = dense(&consistent.mass);
        assert!((mc[(2, 2)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((mc[(0, 2)] - 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(mc[(0, 1)], 0.0);
    }

    #[test]
    fn dirichlet_single_interior() {
        let mesh = build_mesh(&fixtures::single_dd(), 2).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        assert_eq!(dense(&pair.stiffness), DMatrix::from_element(1, 1, 4.0));
    }

    #[test]
    fn stiffness_kernel_and_symmetry() {
        for (name, g) in fixtures::gallery() {
            let mesh = build_mesh(&g, 5).unwrap();
            let pair = assemble(&mesh, MassMode::Consistent);
            let k = dense(&pair.stiffness);
            assert!((&k - k.transpose()).amax() <= 1e-14, "{name}");
            assert!(k.symmetric_eigenvalues().min() >= -1e-10, "{name}");
            for comp in mesh.flag_free_components() {
                let mut ind = vec![0.0; mesh.dof_count()];
                comp.iter().for_each(|&d| ind[d] = 1.0);
                let r = matvec(&pair.stiffness, &ind);
                assert!(r.iter().all(|v| v.abs() <= 1e-12), "{name}");
            }
            assert_eq!(pair.cross_component_entries(), 0, "{name}");
        }
    }

    #[test]
    fn zero_stays_zero() {
        let mesh = build_mesh(&fixtures::p3(), 8).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        let traj = evolve(&pair, &vec![0.0; mesh.dof_count()], 0.01, 0.1).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.iter().all(|s| s.u.iter().all(|&v| v == 0.0)));
        assert!((traj.last().unwrap().t - 0.1).abs() < 1e-12);
    }

    #[test]
    fn evolve_rejects_bad_input() {
        let mesh = build_mesh(&fixtures::p3(), 4).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        let u0 = vec![0.0; mesh.dof_count()];
        assert!(evolve(&pair, &u0, 0.0, 1.0).is_err());
        assert!(evolve(&pair, &u0, 0.1, 0.01).is_err());
        assert!(evolve(&pair, &u0[1..], 0.1, 1.0).is_err());
        let mut bad = u0.clone();
        bad[0] = f64::NAN;
        assert!(matches!(evolve(&pair, &bad, 0.1, 1.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn neumann_conservation() {
        let mesh = build_mesh(&fixtures::single(), 16).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        let u0: Vec<f64> = (0..mesh.dof_count()).map(|i| ((i * 7) % 5) as f64 - 1.5).collect();
        let all: Vec<usize> = (0..mesh.dof_count()).collect();
        let q0 = pair.heat(&u0, &all);
        for s in evolve(&pair, &u0, 1e-3, 0.05).unwrap() {
            assert!((pair.heat(&s.u, &all) - q0).abs() <= 1e-12 * q0.abs().max(1.0));
        }
    }

    #[test]
    fn dirichlet_decay() {
        let mesh = build_mesh(&fixtures::single_dd(), 16).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        let u0 = edge_bump(&mesh, 0);
        let traj = evolve(&pair, &u0, 0.01, 2.0).unwrap();
        let norms: Vec<f64> = traj
            .iter()
            .map(|s| s.u.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
        // late-time per-step ratio is 1 + dt·λ₁ with λ₁ ≈ π²
        let k = norms.len() - 1;
        let rate = (norms[k - 1] / norms[k] - 1.0) / 0.01;
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((rate - pi2).abs() / pi2 < 0.01, "rate {rate}");
    }

    #[test]
    fn support_profiles() {
        let g = fixtures::p3();
        let mesh = build_mesh(&g, 16).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        let zero = HeatState { mesh: &mesh, t: 0.0, u: vec![0.0; mesh.dof_count()] };
        assert!(support_profile(&zero, 0.0).unwrap().support.is_empty());

        let traj = evolve(&pair, &edge_bump(&mesh, 0), 1e-3, 0.1).unwrap();
        let p = support_profile(traj.last().unwrap(), 1e-10).unwrap();
        assert_eq!(p.support.len(), 3);

        let k = fixtures::k3pair_inf();
        let mesh = build_mesh(&k, 8).unwrap();
        let pair = assemble(&mesh, MassMode::Lumped);
        let a12 = k.edge_idx("a12").unwrap();
        for s in evolve(&pair, &edge_bump(&mesh, a12), 1e-2, 0.5).unwrap() {
            let p = support_profile(&s, 0.0).unwrap();
            assert!(p.support.is_subset(&finite_span(&k, a12)));
        }
    }

    #[test]
    fn max_principle_examples() {
        let r = verify_strong_max_principle(&fixtures::p3(), "e0", 32, 1e-3, 0.1, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.span.len(), 3);

        let r = verify_strong_max_principle(&fixtures::k3pair_inf(), "a12", 32, 1e-3, 0.1, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.max_outside, 0.0);

        let r = verify_strong_max_principle(&fixtures::star4_inf(), "e1", 32, 1e-3, 0.1, 1e-10).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.span, vec!["e1"]);

        assert!(verify_strong_max_principle(&fixtures::p3(), "zz", 32, 1e-3, 0.1, 1e-10).is_err());
    }

    #[test]
    fn one_step_is_strictly_positive_on_connected_meshes() {
        for g in [fixtures::p3(), fixtures::single(), fixtures::star_k(5)] {
            let mesh = build_mesh(&g, 8).unwrap();
            let pair = assemble(&mesh, MassMode::Lumped);
            let traj = evolve(&pair, &edge_bump(&mesh, 0), 1e-3, 1e-3).unwrap();
            assert!(traj[1].u.iter().all(|&v| v > 0.0));
        }
    }
}
