//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use netheat::connectivity::pathwise_connected;
use netheat::form::{check_invariance, norms, tent_function};
use netheat::heat::{assemble, build_mesh, evolve, verify_strong_max_principle, MassMode};
use netheat::incidence::{incidence, unbounded_witness, verify_contraction_l1_linf, IncidenceKind};
use netheat::spectral::{
    check_component_theorem, combinatorial_laplacian, network_spectrum, AnomalyClass, DEFAULT_RANK_TOL,
};
use netheat::{fixtures, Graph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_tent_norms() -> Outcome {
    let mut worst = 0.0f64;
    for k in [2, 4, 8] {
        let g = fixtures::star_k(k);
        for lambda in [1.0, 2.0] {
            let n = norms(&tent_function(&g, "c", lambda, 17).map_err(|e| e.to_string())?);
            let kl = k as f64 * lambda * lambda;
            for (got, want) in [(n.l2_sq, kl / 3.0), (n.h1_semi_sq, kl), (n.h1_sq, 4.0 * kl / 3.0)] {
                let err = rel_err(got, want);
                worst = worst.max(err);
                if err > 1e-12 {
                    return Err(format!("k={k} λ={lambda}: {got} vs {want}"));
                }
            }
        }
    }
    Ok(format!("max rel err {worst:.1e}"))
}

fn c2_contraction() -> Outcome {
    let mut checks = 0;
    for (name, g) in fixtures::gallery() {
        let m = incidence(&g, IncidenceKind::Plus);
        let r = verify_contraction_l1_linf(&m, 1000, 0).map_err(|e| e.to_string())?;
        if !r.pass() || r.l1_checks != 1000 {
            return Err(format!("{name}: counterexample {:?}", r.counterexample));
        }
        checks += r.samples + r.l1_checks;
    }
    Ok(format!("{checks} vectors checked"))
}

fn c3_norm_bound() -> Outcome {
    let mut inbound = Graph::builder().vertex("hub", true);
    for i in 0..5 {
        inbound = inbound.vertex(&format!("l{i}"), false).edge(&format!("e{i}"), &format!("l{i}"), "hub");
    }
    let inbound = inbound.build().map_err(|e| e.to_string())?;
    let mut graphs = fixtures::gallery();
    graphs.push(("inbound-star5", inbound));
    let stars = ["star4-inf", "star8", "inbound-star5"];
    for (name, g) in &graphs {
        let norm = incidence(g, IncidenceKind::Plus).operator_norm(1e-12).map_err(|e| e.to_string())?;
        let bound = (0..g.vertex_count()).map(|v| g.inbound(v).len()).max().unwrap_or(0) as f64;
        let bound = bound.sqrt();
        if norm > bound + 1e-6 {
            return Err(format!("{name}: ‖I⁺‖={norm} > {bound}"));
        }
        if stars.contains(name) && (norm - bound).abs() > 1e-6 {
            return Err(format!("{name}: ‖I⁺‖={norm} ≠ {bound}"));
        }
    }
    let star = fixtures::star4_inf();
    let rows = unbounded_witness(&star, "c", &[4, 16, 64]).map_err(|e| e.to_string())?;
    let got: Vec<f64> = rows.iter().map(|r| r.image_norm).collect();
    for (g, want) in got.iter().zip([2.0, 4.0, 8.0]) {
        if (g - want).abs() > 1e-12 {
            return Err(format!("witness norms {got:?}"));
        }
    }
    Ok(format!("{} graphs, witness {got:?}", graphs.len()))
}

fn c4_invariance() -> Outcome {
    let mut subgraphs = 0;
    for (name, g) in fixtures::gallery() {
        let n = g.vertex_count();
        for mask in 1u32..(1 << n) {
            if mask.count_ones() > 8 {
                continue;
            }
            let vs: BTreeSet<usize> = (0..n).filter(|v| mask >> v & 1 == 1).collect();
            let sub = g.induced_by(vs);
            let r = check_invariance(&g, &sub, 100, 0).map_err(|e| e.to_string())?;
            if !r.consistent() {
                return Err(format!("{name} {:?}: {} disagreements", sub.vertex_ids(&g), r.disagreements));
            }
            subgraphs += 1;
        }
    }
    Ok(format!("{subgraphs} induced subgraphs, 0 disagreements"))
}

fn c5_max_principle() -> Outcome {
    let mut runs = 0;
    for (name, g) in fixtures::gallery() {
        for e in g.edges().iter().map(|e| e.id.clone()).collect::<Vec<_>>() {
            let r = verify_strong_max_principle(&g, &e, 32, 1e-3, 0.1, 1e-10).map_err(|e| e.to_string())?;
            if !r.pass {
                return Err(format!("{name} edge {e}: {r:?}"));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} starting edges"))
}

fn c6_component_theorem() -> Outcome {
    let mut graphs = vec![fixtures::p3(), fixtures::k3pair_inf(), fixtures::star4_inf()];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    graphs.extend((0..50).map(|_| common::random_graph(&mut rng, 10, 15, 2, true)));
    for g in &graphs {
        let r = check_component_theorem(g, DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
        let l = combinatorial_laplacian(g);
        let (numeric, _, _) = l.numeric_kernel_dim(DEFAULT_RANK_TOL);
        let equal = r.distinct_spans == r.gfin_components && r.gfin_components == r.kernel_dim;
        if !r.pass || !equal || numeric != l.exact_kernel_dim() {
            return Err(format!("{}: {}", g.to_json(), r.to_json()));
        }
    }
    let ee = check_component_theorem(&fixtures::ee_inf(), DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
    if ee.pass || !ee.anomalies.iter().any(|a| a.class == AnomalyClass::EdgeBetweenTwoFlaggedVertices) {
        return Err(format!("EE∞ not flagged: {}", ee.to_json()));
    }
    Ok(format!("{} graphs equal, EE∞ FAIL as expected", graphs.len()))
}

fn lambda1(g: &Graph, n: usize) -> Result<f64, String> {
    let mesh = build_mesh(g, n).map_err(|e| e.to_string())?;
    let pair = assemble(&mesh, MassMode::Consistent);
    Ok(network_spectrum(&pair, 1, 1e-12).map_err(|e| e.to_string())?[0])
}

fn c7_discretization() -> Outcome {
    let exact = PI * PI;
    let e32 = rel_err(lambda1(&fixtures::single_dd(), 32)?, exact);
    let e64 = rel_err(lambda1(&fixtures::single_dd(), 64)?, exact);
    let ratio = e32 / e64;
    let half = lambda1(&fixtures::single_d(), 64)?;
    let quarter = PI * PI / 4.0;
    if e64 > 1e-3 || !(3.5..=4.5).contains(&ratio) || (half - quarter).abs() > 1e-3 {
        return Err(format!("e64={e64:.2e} ratio={ratio:.3} single-d={half}"));
    }
    Ok(format!("rel err {e64:.2e}, ratio {ratio:.3}, single-d err {:.1e}", (half - quarter).abs()))
}

fn c8_positivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut lowest = f64::INFINITY;
    let mut drift = 0.0f64;
    for (name, g) in fixtures::gallery() {
        let mesh = build_mesh(&g, 16).map_err(|e| e.to_string())?;
        let pair = assemble(&mesh, MassMode::Lumped);
        let u0: Vec<f64> = (0..mesh.dof_count())
            .map(|_| if rng.gen_bool(0.5) { 0.0 } else { rng.gen::<f64>() })
            .collect();
        let traj = evolve(&pair, &u0, 1e-3, 0.1).map_err(|e| e.to_string())?;
        if traj.len() != 101 {
            return Err(format!("{name}: {} states", traj.len()));
        }
        for state in &traj {
            lowest = state.u.iter().copied().fold(lowest, f64::min);
        }
        for comp in mesh.flag_free_components() {
            let h0 = pair.heat(&u0, &comp);
            for state in &traj {
                drift = drift.max(rel_err(pair.heat(&state.u, &comp), h0));
            }
        }
    }
    if lowest < -1e-14 || drift > 1e-12 {
        return Err(format!("min {lowest:.2e}, heat drift {drift:.2e}"));
    }
    Ok(format!("min {lowest:.2e}, heat drift {drift:.1e}"))
}

fn c9_connectivity() -> Outcome {
    let mut checked = 0;
    for (name, g) in fixtures::gallery() {
        if g.vertex_count() > 12 {
            continue;
        }
        let pathwise = pathwise_connected(&g).map_err(|e| e.to_string())?.is_connected();
        if pathwise != common::brute_force_connected(&g) {
            return Err(format!("{name}: pathwise {pathwise}"));
        }
        checked += 1;
    }
    Ok(format!("{checked} fixtures"))
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .map(|it| {
            it.map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect()
        })
        .unwrap_or_default()
}

fn c10_reproducibility() -> Outcome {
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (stem, g) in fixtures::gallery() {
        fs::write(work.path().join(format!("{stem}.json")), g.to_json()).map_err(|e| e.to_string())?;
    }
    let p = |stem: &str| work.path().join(format!("{stem}.json")).to_string_lossy().into_owned();
    let invocations: Vec<Vec<String>> = vec![
        vec!["components".into(), p("k3pair")],
        vec!["irreducible".into(), p("ee-inf")],
        vec!["ideals".into(), p("star4-inf")],
        vec!["spectrum".into(), p("single-dd"), "--n".into(), "32".into(), "--k".into(), "4".into()],
        vec!["laplacian".into(), p("k3pair"), "--mode".into(), "full".into()],
        vec!["check-theorem".into(), p("ee-inf")],
        vec!["simulate".into(), p("p3"), "--edge".into(), "e0".into(), "--n".into(), "16".into()],
        vec!["verify-incidence".into(), p("star8"), "--samples".into(), "200".into(), "--seed".into(), "7".into()],
        vec!["fixtures".into()],
    ];
    for (i, args) in invocations.iter().enumerate() {
        let mut runs = Vec::new();
        let out = work.path().join(format!("out{i}"));
        for _ in 0..2 {
            let o = Command::new(env!("CARGO_BIN_EXE_netheat"))
                .args(args)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            runs.push((o.status.code(), o.stdout, snapshot(&out)));
        }
        if runs[0].2.is_empty() || runs[0] != runs[1] {
            return Err(format!("{} differs between runs", args[0]));
        }
    }
    Ok(format!("{} commands byte-identical", invocations.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1 tent norms", c1_tent_norms),
        ("C2 incidence l1->linf contraction", c2_contraction),
        ("C3 incidence norm bound", c3_norm_bound),
        ("C4 invariance criterion", c4_invariance),
        ("C5 strong maximum principle on spans", c5_max_principle),
        ("C6 component count theorem", c6_component_theorem),
        ("C7 discretization fidelity", c7_discretization),
        ("C8 positivity and conservation", c8_positivity),
        ("C9 connectivity equivalence", c9_connectivity),
        ("C10 CLI reproducibility", c10_reproducibility),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = std::time::Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
