#![allow(dead_code)]

use std::collections::BTreeSet;

use netheat::Graph;
use rand::Rng;

/// Random graph with at most `max_v` vertices, `max_e` edges and `max_flags`
/// flagged vertices. Optionally rejects flagged-flagged edges and isolated
/// vertices.
pub fn random_graph(
    rng: &mut impl Rng,
    max_v: usize,
    max_e: usize,
    max_flags: usize,
    strict: bool,
) -> Graph {
    loop {
        let nv = rng.gen_range(2..=max_v);
        let ne = rng.gen_range(1..=max_e);
        let nflags = rng.gen_range(0..=max_flags.min(nv));
        let mut flagged = BTreeSet::new();
        while flagged.len() < nflags {
            flagged.insert(rng.gen_range(0..nv));
        }
        let mut spec = Graph::builder();
        for v in 0..nv {
            spec = spec.vertex(&format!("v{v:02}"), flagged.contains(&v));
        }
        let mut degree = vec![0; nv];
        let mut ok = true;
        for e in 0..ne {
            let mut tries = 0;
            let (a, b) = loop {
                let a = rng.gen_range(0..nv);
                let b = rng.gen_range(0..nv);
                tries += 1;
                if a != b && !(strict && flagged.contains(&a) && flagged.contains(&b)) {
                    break (a, b);
                }
                if tries > 100 {
                    ok = false;
                    break (0, 1);
                }
            };
            degree[a] += 1;
            degree[b] += 1;
            spec = spec.edge(&format!("e{e:02}"), &format!("v{a:02}"), &format!("v{b:02}"));
        }
        if !ok || (strict && degree.contains(&0)) {
            continue;
        }
        return spec.build().expect("generator produces valid graphs");
    }
}

/// Edges reachable from `start` by enumerating every simple edge path whose
/// intermediate (shared) vertices are unflagged.
pub fn brute_force_span(g: &Graph, start: usize) -> BTreeSet<usize> {
    fn walk(g: &Graph, path: &mut Vec<usize>, reached: &mut BTreeSet<usize>) {
        let cur = *path.last().unwrap();
        reached.insert(cur);
        let e = g.edge(cur);
        for v in [e.tail, e.head] {
            if g.is_flagged(v) {
                continue;
            }
            for next in 0..g.edge_count() {
                let n = g.edge(next);
                if path.contains(&next) || (n.tail != v && n.head != v) {
                    continue;
                }
                path.push(next);
                walk(g, path, reached);
                path.pop();
            }
        }
    }
    let mut reached = BTreeSet::new();
    walk(g, &mut vec![start], &mut reached);
    reached
}

/// Topological connectedness: every bipartition into nonempty parts has a
/// crossing edge. Enumerates all 2^|V| subsets.
pub fn brute_force_connected(g: &Graph) -> bool {
    let n = g.vertex_count();
    assert!(n <= 20);
    for mask in 1u32..(1 << n) - 1 {
        let inside = |v: usize| mask & (1 << v) != 0;
        let crossing = g.edges().iter().any(|e| inside(e.tail) != inside(e.head));
        if !crossing {
            return false;
        }
    }
    true
}
