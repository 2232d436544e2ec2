//! Built-in fixture gallery.

use crate::graph::Graph;

/// Path v0→v1→v2→v3.
pub fn p3() -> Graph {
    Graph::builder()
        .vertex("v0", false)
        .vertex("v1", false)
        .vertex("v2", false)
        .vertex("v3", false)
        .edge("e0", "v0", "v1")
        .edge("e1", "v1", "v2")
        .edge("e2", "v2", "v3")
        .build()
        .expect("valid fixture")
}

fn single_edge(tail_flag: bool, head_flag: bool) -> Graph {
    Graph::builder()
        .vertex("v0", tail_flag)
        .vertex("v1", head_flag)
        .edge("e0", "v0", "v1")
        .build()
        .expect("valid fixture")
}

/// One edge v0→v1, no flags.
pub fn single() -> Graph {
    single_edge(false, false)
}

/// One edge v0→v1 with the head flagged.
pub fn single_d() -> Graph {
    single_edge(false, true)
}

/// One edge v0→v1 with both endpoints flagged.
pub fn single_dd() -> Graph {
    single_edge(true, true)
}

/// Flagged centre `c` with four pendant out-edges c→l1..c→l4.
pub fn star4_inf() -> Graph {
    let mut spec = Graph::builder().vertex("c", true);
    for i in 1..=4 {
        let leaf = format!("l{i}");
        spec = spec.vertex(&leaf, false).edge(&format!("e{i}"), "c", &leaf);
    }
    spec.build().expect("valid fixture")
}

/// Unflagged centre `c` with `k` pendant out-edges. Ids are zero-padded so
/// id order matches leaf order.
pub fn star_k(k: usize) -> Graph {
    let width = k.to_string().len();
    let mut spec = Graph::builder().vertex("c", false);
    for i in 1..=k {
        let leaf = format!("l{i:0width$}");
        spec = spec
            .vertex(&leaf, false)
            .edge(&format!("e{i:0width$}"), "c", &leaf);
    }
    spec.build().expect("valid fixture")
}

/// Two triangles bridged through a flagged vertex `w` (a3→w→b3).
pub fn k3pair_inf() -> Graph {
    Graph::builder()
        .vertex("a1", false)
        .vertex("a2", false)
        .vertex("a3", false)
        .vertex("b1", false)
        .vertex("b2", false)
        .vertex("b3", false)
        .vertex("w", true)
        .edge("a12", "a1", "a2")
        .edge("a23", "a2", "a3")
        .edge("a31", "a3", "a1")
        .edge("b12", "b1", "b2")
        .edge("b23", "b2", "b3")
        .edge("b31", "b3", "b1")
        .edge("aw", "a3", "w")
        .edge("wb", "w", "b3")
        .build()
        .expect("valid fixture")
}

/// An edge u0→u1 between two flagged vertices, plus a disjoint copy of P3.
pub fn ee_inf() -> Graph {
    Graph::builder()
        .vertex("u0", true)
        .vertex("u1", true)
        .vertex("v0", false)
        .vertex("v1", false)
        .vertex("v2", false)
        .vertex("v3", false)
        .edge("f0", "u0", "u1")
        .edge("e0", "v0", "v1")
        .edge("e1", "v1", "v2")
        .edge("e2", "v2", "v3")
        .build()
        .expect("valid fixture")
}

/// The whole gallery as `(file stem, graph)` pairs.
pub fn gallery() -> Vec<(&'static str, Graph)> {
    vec![
        ("p3", p3()),
        ("single", single()),
        ("single-d", single_d()),
        ("single-dd", single_dd()),
        ("star4-inf", star4_inf()),
        ("star8", star_k(8)),
        ("k3pair", k3pair_inf()),
        ("ee-inf", ee_inf()),
    ]
}
