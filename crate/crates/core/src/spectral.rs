//! Combinatorial Laplacian Δ = Δ_fin ⊕ 0, its kernel, and eigenvalues of
//! the discretized network operator.

use std::collections::BTreeSet;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::connectivity::{component_count, delta_components};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::heat::OperatorPair;
use crate::union_find::UnionFind;

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Δ_fin = D − A on the unflagged vertices (orientation dropped, parallel
/// edges summed), plus a zero block over the flagged vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinatorialLaplacian {
    pub fin_vertices: Vec<usize>,
    pub inf_vertices: Vec<usize>,
    pub delta_fin: DMatrix<f64>,
}

pub fn combinatorial_laplacian(g: &Graph) -> CombinatorialLaplacian {
    let fin_vertices: Vec<usize> = (0..g.vertex_count()).filter(|&v| !g.is_flagged(v)).collect();
    let inf_vertices = g.flagged_vertices();
    let mut local = vec![None; g.vertex_count()];
    for (i, &v) in fin_vertices.iter().enumerate() {
        local[v] = Some(i);
    }
    let n = fin_vertices.len();
    let mut delta = DMatrix::zeros(n, n);
    for e in g.edges() {
        if let (Some(a), Some(b)) = (local[e.tail], local[e.head]) {
            delta[(a, b)] -= 1.0;
            delta[(b, a)] -= 1.0;
            delta[(a, a)] += 1.0;
            delta[(b, b)] += 1.0;
        }
    }
    CombinatorialLaplacian {
        fin_vertices,
        inf_vertices,
        delta_fin: delta,
    }
}

impl CombinatorialLaplacian {
    /// The full |V| × |V| matrix Δ_fin ⊕ 0 in graph vertex order.
    pub fn full(&self) -> DMatrix<f64> {
        let n = self.fin_vertices.len() + self.inf_vertices.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &vi) in self.fin_vertices.iter().enumerate() {
            for (j, &vj) in self.fin_vertices.iter().enumerate() {
                m[(vi, vj)] = self.delta_fin[(i, j)];
            }
        }
        m
    }

    /// Components of G_fin, read off the off-diagonal pattern of Δ_fin.
    pub fn exact_kernel_dim(&self) -> usize {
        let n = self.fin_vertices.len();
        let mut uf = UnionFind::new(n);
        for i in 0..n {
            for j in i + 1..n {
                if self.delta_fin[(i, j)] != 0.0 {
                    uf.union(i, j);
                }
            }
        }
        uf.count()
    }

    /// Eigenvalues of Δ_fin, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.delta_fin.is_empty() {
            return Vec::new();
        }
        let mut eig: Vec<f64> = SymmetricEigen::new(self.delta_fin.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    /// Kernel dimension from the eigensolve: eigenvalues at most
    /// `tol · ‖Δ_fin‖₂` in magnitude.
    pub fn numeric_kernel_dim(&self, tol: f64) -> (usize, f64, f64) {
        let eig = self.eigenvalues();
        let norm = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let threshold = tol * norm;
        let count = eig.iter().filter(|v| v.abs() <= threshold).count();
        let last_zero = eig[..count].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let first_nonzero = eig.get(count).copied().unwrap_or(f64::NAN);
        (count, last_zero, first_nonzero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiplicityMode {
    /// dim ker Δ_fin.
    #[default]
    FinOnly,
    /// dim ker (Δ_fin ⊕ 0) = dim ker Δ_fin + |V_∞|.
    WithZeroBlock,
}

/// Multiplicity of the eigenvalue 0, computed by union-find and by a
/// symmetric eigensolve; disagreement between the two is an error.
pub fn zero_multiplicity(l: &CombinatorialLaplacian, mode: MultiplicityMode, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let exact = l.exact_kernel_dim();
    let (numeric, last_zero, first_nonzero) = l.numeric_kernel_dim(tol);
    if exact != numeric {
        return Err(Error::KernelMismatch {
            exact,
            numeric,
            last_zero,
            first_nonzero,
        });
    }
    Ok(match mode {
        MultiplicityMode::FinOnly => exact,
        MultiplicityMode::WithZeroBlock => exact + l.inf_vertices.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyClass {
    /// Edge whose endpoints are both flagged: a span of its own, invisible
    /// to G_fin.
    EdgeBetweenTwoFlaggedVertices,
    /// Unflagged vertex without edges: a G_fin component without a span.
    IsolatedFiniteVertex,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Anomaly {
    pub class: AnomalyClass,
    pub ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub distinct_spans: usize,
    pub gfin_components: usize,
    pub kernel_dim: usize,
    pub pass: bool,
    pub anomalies: Vec<Anomaly>,
    pub warnings: Vec<String>,
}

impl TheoremReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

/// Compares the number of distinct finite spans, the number of components
/// of G_fin and dim ker Δ_fin. Graph features that make the first two
/// counts differ are reported as anomalies.
pub fn check_component_theorem(g: &Graph, tol: f64) -> Result<TheoremReport> {
    let spans = delta_components(g).len();
    let fin: BTreeSet<usize> = (0..g.vertex_count()).filter(|&v| !g.is_flagged(v)).collect();
    let components = component_count(g, &fin);
    let kernel = zero_multiplicity(&combinatorial_laplacian(g), MultiplicityMode::FinOnly, tol)?;

    let flagged_edges: Vec<String> = g
        .edges()
        .iter()
        .filter(|e| g.is_flagged(e.tail) && g.is_flagged(e.head))
        .map(|e| e.id.clone())
        .collect();
    let isolated: Vec<String> = fin
        .iter()
        .filter(|&&v| g.host_degree(v) == 0)
        .map(|&v| g.vertex(v).id.clone())
        .collect();
    let edgeless_flagged: Vec<String> = g
        .flagged_vertices()
        .into_iter()
        .filter(|&v| g.host_degree(v) == 0)
        .map(|v| g.vertex(v).id.clone())
        .collect();

    let mut warnings = Vec::new();
    if !flagged_edges.is_empty() {
        warnings.push(format!(
            "edges between two flagged vertices: {}",
            flagged_edges.join(", ")
        ));
    }
    if !isolated.is_empty() {
        warnings.push(format!("unflagged vertices without edges: {}", isolated.join(", ")));
    }
    if !edgeless_flagged.is_empty() {
        warnings.push(format!(
            "flagged vertices without edges (no span, no G_fin component): {}",
            edgeless_flagged.join(", ")
        ));
    }

    let pass = spans == components && components == kernel;
    let mut anomalies = Vec::new();
    if !pass {
        if !flagged_edges.is_empty() {
            anomalies.push(Anomaly {
                class: AnomalyClass::EdgeBetweenTwoFlaggedVertices,
                ids: flagged_edges,
            });
        }
        if !isolated.is_empty() {
            anomalies.push(Anomaly {
                class: AnomalyClass::IsolatedFiniteVertex,
                ids: isolated,
            });
        }
    }
    Ok(TheoremReport {
        distinct_spans: spans,
        gfin_components: components,
        kernel_dim: kernel,
        pass,
        anomalies,
        warnings,
    })
}

/// The `k` smallest eigenvalues of `K u = λ M u`, ascending.
pub fn network_spectrum(pair: &OperatorPair<'_>, k: usize, tol: f64) -> Result<Vec<f64>> {
    let n = pair.mesh.dof_count();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must be in 1..={n}")));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let to_dense = |m: &nalgebra_sparse::CsrMatrix<f64>| {
        let mut d = DMatrix::zeros(n, n);
        for (i, j, v) in m.triplet_iter() {
            d[(i, j)] += *v;
        }
        d
    };
    let stiffness = to_dense(&pair.stiffness);
    let chol = to_dense(&pair.mass)
        .cholesky()
        .ok_or_else(|| Error::param("mass", "mass matrix is not positive definite"))?;
    let l = chol.l();
    // C = L⁻¹ K L⁻ᵀ
    let y = l
        .solve_lower_triangular(&stiffness)
        .ok_or(Error::EigenNoConvergence)?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::EigenNoConvergence)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, tol.max(f64::EPSILON), 100_000).ok_or(Error::EigenNoConvergence)?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values.truncate(k);
    Ok(values)
}

pub fn write_spectrum_csv<W: Write>(eigenvalues: &[f64], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["index", "eigenvalue"])?;
    for (i, v) in eigenvalues.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
