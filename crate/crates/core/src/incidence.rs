//! Incidence matrices as linear maps ℓ²(E) → ℓ²(V).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Dense vector indexed by edge position.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeVector(pub Vec<f64>);

/// Dense vector indexed by vertex position.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexVector(pub Vec<f64>);

macro_rules! norms {
    ($t:ty) => {
        impl $t {
            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn norm_l1(&self) -> f64 {
                self.0.iter().map(|x| x.abs()).sum()
            }

            pub fn norm_l2(&self) -> f64 {
                self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
            }

            pub fn norm_linf(&self) -> f64 {
                self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
            }

            pub fn dot(&self, other: &Self) -> f64 {
                self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
            }
        }
    };
}

norms!(EdgeVector);
norms!(VertexVector);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncidenceKind {
    /// I⁺: ι⁺_{ve} = 1 iff e ends in v.
    Plus,
    /// I⁻: ι⁻_{ve} = 1 iff e starts in v.
    Minus,
    /// I = I⁺ − I⁻.
    Signed,
}

/// Vertex × edge incidence matrix in compressed-column form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseIncidence {
    kind: IncidenceKind,
    nrows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

pub fn incidence(g: &Graph, kind: IncidenceKind) -> SparseIncidence {
    let mut col_ptr = Vec::with_capacity(g.edge_count() + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for e in g.edges() {
        match kind {
            IncidenceKind::Plus => {
                row_idx.push(e.head);
                values.push(1.0);
            }
            IncidenceKind::Minus => {
                row_idx.push(e.tail);
                values.push(1.0);
            }
            IncidenceKind::Signed => {
                let mut entries = [(e.tail, -1.0), (e.head, 1.0)];
                entries.sort_by_key(|&(r, _)| r);
                for (r, v) in entries {
                    row_idx.push(r);
                    values.push(v);
                }
            }
        }
        col_ptr.push(row_idx.len());
    }
    SparseIncidence {
        kind,
        nrows: g.vertex_count(),
        col_ptr,
        row_idx,
        values,
    }
}

impl SparseIncidence {
    pub fn kind(&self) -> IncidenceKind {
        self.kind
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(row, value)` entries of column `e`.
    pub fn column(&self, e: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[e]..self.col_ptr[e + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// All entries as `(row, col, value)`, column-major.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.ncols())
            .flat_map(|e| self.column(e).map(move |(r, v)| (r, e, v)))
            .collect()
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols());
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn apply(&self, x: &EdgeVector) -> Result<VertexVector> {
        if x.len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.ncols(),
                got: x.len(),
            });
        }
        let mut out = VertexVector::zeros(self.nrows);
        for (e, &xe) in x.0.iter().enumerate() {
            for (r, v) in self.column(e) {
                out.0[r] += v * xe;
            }
        }
        Ok(out)
    }

    pub fn apply_transpose(&self, d: &VertexVector) -> Result<EdgeVector> {
        if d.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                got: d.len(),
            });
        }
        let out = (0..self.ncols())
            .map(|e| self.column(e).map(|(r, v)| v * d.0[r]).sum())
            .collect();
        Ok(EdgeVector(out))
    }

    /// ‖M‖₂→₂ by power iteration on MᵀM.
    ///
    /// Two deterministic starts are used: the normalized all-ones vector and
    /// an alternating ±1 vector (negative on odd indices); the larger estimate
    /// wins. Iteration stops once the Rayleigh quotient changes by at most
    /// `tol` relative.
    pub fn operator_norm(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::param("tol", "must be positive"));
        }
        let n = self.ncols();
        if n == 0 {
            return Ok(0.0);
        }
        let ones = EdgeVector(vec![1.0; n]);
        let alternating = EdgeVector(
            (0..n)
                .map(|i| if i % 2 == 1 { -1.0 } else { 1.0 })
                .collect(),
        );
        let a = self.power_iteration(ones, tol)?;
        let b = self.power_iteration(alternating, tol)?;
        Ok(a.max(b))
    }

    fn power_iteration(&self, start: EdgeVector, tol: f64) -> Result<f64> {
        const MAX_ITER: usize = 100_000;
        let mut x = start;
        let nx = x.norm_l2();
        x.0.iter_mut().for_each(|v| *v /= nx);
        let mut prev = 0.0;
        for _ in 0..MAX_ITER {
            let y = self.apply_transpose(&self.apply(&x)?)?;
            let rayleigh = x.dot(&y);
            let ny = y.norm_l2();
            if ny == 0.0 {
                return Ok(0.0);
            }
            x = EdgeVector(y.0.into_iter().map(|v| v / ny).collect());
            if (rayleigh - prev).abs() <= tol * rayleigh {
                return Ok(rayleigh.sqrt());
            }
            prev = rayleigh;
        }
        Ok(prev.sqrt())
    }
}

/// One row of an incidence verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub test: String,
    pub parameter: String,
    pub observed: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContractionReport {
    pub samples: usize,
    /// Largest observed ‖Mx‖∞ / ‖x‖₁.
    pub max_ratio: f64,
    /// Number of nonnegative samples on which ‖Mx‖₁ = ‖x‖₁ was checked.
    pub l1_checks: usize,
    pub counterexample: Option<EdgeVector>,
}

impl ContractionReport {
    pub fn pass(&self) -> bool {
        self.counterexample.is_none()
    }
}

// Dyadic rationals j/2^20 keep every partial sum exact in f64.
const DYADIC: i64 = 1 << 20;

fn dyadic(rng: &mut ChaCha8Rng, nonnegative: bool) -> f64 {
    let lo = if nonnegative { 0 } else { -DYADIC };
    rng.gen_range(lo..=DYADIC) as f64 / DYADIC as f64
}

/// Checks ‖Mx‖∞ ≤ ‖x‖₁ on `samples` seeded random vectors. For the 0/1
/// matrices I⁺ and I⁻ every sample is also checked in its nonnegative form,
/// where ‖Mx‖₁ = ‖x‖₁ must hold exactly.
pub fn verify_contraction_l1_linf(
    m: &SparseIncidence,
    samples: usize,
    seed: u64,
) -> Result<ContractionReport> {
    if samples == 0 {
        return Err(Error::param("samples", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.ncols();
    let unsigned = m.kind() != IncidenceKind::Signed;
    let mut report = ContractionReport {
        samples,
        max_ratio: 0.0,
        l1_checks: 0,
        counterexample: None,
    };
    for _ in 0..samples {
        let x = EdgeVector((0..n).map(|_| dyadic(&mut rng, false)).collect());
        let l1 = x.norm_l1();
        let image = m.apply(&x)?.norm_linf();
        if l1 > 0.0 {
            report.max_ratio = report.max_ratio.max(image / l1);
        }
        if image > l1 {
            report.counterexample.get_or_insert(x);
        }
        if unsigned {
            let pos = EdgeVector((0..n).map(|_| dyadic(&mut rng, true)).collect());
            report.l1_checks += 1;
            if m.apply(&pos)?.norm_l1() != pos.norm_l1() {
                report.counterexample.get_or_insert(pos);
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessRow {
    pub k: usize,
    pub x_norm: f64,
    pub image_norm: f64,
}

/// Truncation study at a flagged vertex: for each `k`, an inbound star with
/// `k` edges and the unit vector x = k^{-1/2}·1, reporting ‖I⁺x‖₂ (= √k).
pub fn unbounded_witness(g: &Graph, flagged_vertex: &str, k_list: &[usize]) -> Result<Vec<WitnessRow>> {
    let v = g.vertex_idx(flagged_vertex)?;
    if !g.is_flagged(v) {
        return Err(Error::NotFlagged(flagged_vertex.to_string()));
    }
    k_list
        .iter()
        .map(|&k| {
            if k == 0 {
                return Err(Error::param("k", "truncation size must be at least 1"));
            }
            let width = k.to_string().len();
            let mut spec = Graph::builder().vertex(flagged_vertex, true);
            for i in 0..k {
                let leaf = format!("{flagged_vertex}.leaf{i:0width$}");
                spec = spec
                    .vertex(&leaf, false)
                    .edge(&format!("{flagged_vertex}.in{i:0width$}"), &leaf, flagged_vertex);
            }
            let star = spec.build()?;
            let x = EdgeVector(vec![1.0 / (k as f64).sqrt(); k]);
            let image = incidence(&star, IncidenceKind::Plus).apply(&x)?;
            Ok(WitnessRow {
                k,
                x_norm: x.norm_l2(),
                image_norm: image.norm_l2(),
            })
        })
        .collect()
}

/// Runs the incidence property suite on a graph and returns report rows.
pub fn property_suite(g: &Graph, samples: usize, seed: u64, tol: f64) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    let max_in = (0..g.vertex_count()).map(|v| g.inbound(v).len()).max().unwrap_or(0);
    let max_out = (0..g.vertex_count()).map(|v| g.outbound(v).len()).max().unwrap_or(0);
    for (name, kind, max_deg) in [
        ("I+", IncidenceKind::Plus, max_in),
        ("I-", IncidenceKind::Minus, max_out),
    ] {
        let m = incidence(g, kind);
        let norm = m.operator_norm(tol)?;
        let bound = (max_deg as f64).sqrt();
        rows.push(ReportRow {
            test: "operator_norm".into(),
            parameter: name.into(),
            observed: norm,
            bound,
            pass: norm <= bound + 1e-6,
        });
        let c = verify_contraction_l1_linf(&m, samples, seed)?;
        rows.push(ReportRow {
            test: "contraction_l1_linf".into(),
            parameter: format!("{name} samples={samples} seed={seed}"),
            observed: c.max_ratio,
            bound: 1.0,
            pass: c.pass(),
        });
    }
    for v in g.flagged_vertices() {
        let id = &g.vertex(v).id;
        for row in unbounded_witness(g, id, &[4, 16, 64])? {
            let expected = (row.k as f64).sqrt();
            rows.push(ReportRow {
                test: "unbounded_witness".into(),
                parameter: format!("{id} k={}", row.k),
                observed: row.image_norm,
                bound: expected,
                pass: (row.image_norm - expected).abs() <= 1e-12 * expected,
            });
        }
    }
    Ok(rows)
}
