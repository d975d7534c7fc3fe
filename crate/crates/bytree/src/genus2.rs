//! Built-in fixtures: the 23 genus-2 reduction-type families with their
//! expected Tamagawa formulas, the 4-leaf star, and the large multi-orbit
//! example. The JSON fixture files shipped in `fixtures/` are generated
//! from these definitions and validated against them.

use std::collections::BTreeMap;

use crate::forest::{BYForest, ForestBuilder, LengthForm, Parity};

/// A named fixture with its expected Tamagawa formula (in the syntax of
/// the `formula` module).
pub struct Genus2Row {
    pub name: &'static str,
    pub forest: BYForest,
    pub expected: &'static str,
}

fn var(name: &str) -> LengthForm {
    LengthForm::variable(name, Parity::Unknown)
}

fn even_var(name: &str) -> LengthForm {
    LengthForm::variable(name, Parity::Even)
}

/// length 2*name with the variable's own parity unknown
fn doubled_var(name: &str) -> LengthForm {
    LengthForm {
        constant: 0,
        terms: BTreeMap::from([(name.to_string(), (2, Parity::Unknown))]),
    }
}

/// The 23 genus-2 rows. Types are named in ASCII: `x` is the blue-edge
/// chain link, `xt` the Frobenius-twisted chain link, `s` separates
/// F-swapped parameters (`Unns` is the type with two swapped n-arms).
pub fn genus2_rows() -> Vec<Genus2Row> {
    let mut rows = Vec::new();
    let mut push = |name: &'static str, forest: BYForest, expected: &'static str| {
        rows.push(Genus2Row { name, forest, expected });
    };

    // good reduction: a single blue vertex
    push("2", ForestBuilder::new().s_vertex("a").build(), "1");

    // two blue vertices joined by a blue edge (length r+s, necessarily even)
    push(
        "1x1",
        ForestBuilder::new().s_vertex("a").s_vertex("b").s_edge("e", "a", "b", even_var("t")).build(),
        "1",
    );

    // blue edge of length 2r with the two ends swapped by F
    push(
        "1xt1",
        ForestBuilder::new()
            .s_vertex("a")
            .s_vertex("b")
            .s_edge("e", "a", "b", doubled_var("r"))
            .maps(&[("a", "b"), ("b", "a")])
            .build(),
        "1",
    );

    // a single yellow edge between two blue vertices: split / non-split I_n
    for (name, sign, expected) in [("1n+", 1, "n"), ("1n-", -1, "hcf(n,2)")] {
        push(
            name,
            ForestBuilder::new()
                .s_vertex("a")
                .s_vertex("b")
                .edge("e", "a", "b", var("n"))
                .sign("e", sign)
                .build(),
            expected,
        );
    }

    // blue chain link then a yellow edge
    for (name, sign, expected) in [("1xIn+", 1, "n"), ("1xIn-", -1, "hcf(n,2)")] {
        push(
            name,
            ForestBuilder::new()
                .s_vertex("a")
                .s_vertex("b")
                .s_vertex("c")
                .s_edge("t", "a", "b", even_var("t"))
                .edge("e", "b", "c", var("n"))
                .sign("e", sign)
                .build(),
            expected,
        );
    }

    // two yellow edges sharing a blue center: I_{n,m}
    for (name, s1, s2, expected) in [
        ("Inm++", 1, 1, "n*m"),
        ("Inm+-", 1, -1, "n*hcf(m,2)"),
        ("Inm--", -1, -1, "hcf(n,2)*hcf(m,2)"),
    ] {
        push(
            name,
            ForestBuilder::new()
                .s_vertex("o")
                .s_vertex("p")
                .s_vertex("q")
                .edge("en", "o", "p", var("n"))
                .edge("em", "o", "q", var("m"))
                .sign("en", s1)
                .sign("em", s2)
                .build(),
            expected,
        );
    }

    // the same with the two arms (both of length n) swapped by F
    for (name, s1, s2, expected) in [("Inns+", 1, 1, "n"), ("Inns-", 1, -1, "hcf(n,2)")] {
        push(
            name,
            ForestBuilder::new()
                .s_vertex("o")
                .s_vertex("p")
                .s_vertex("q")
                .edge("e0", "o", "p", var("n"))
                .edge("e1", "o", "q", var("n"))
                .maps(&[("p", "q"), ("q", "p")])
                .sign("e0", s1)
                .sign("e1", s2)
                .build(),
            expected,
        );
    }

    // the 3-arm star U_{n,m,k}
    for (name, sign, expected) in [
        ("Unmk+", 1, "n*m+m*k+k*n"),
        ("Unmk-", -1, "max(1,hcf(n,2)*hcf(m,2)*hcf(k,2)/2)"),
    ] {
        push(
            name,
            ForestBuilder::new()
                .vertex("o")
                .s_vertex("p")
                .s_vertex("q")
                .s_vertex("r")
                .edge("en", "o", "p", var("n"))
                .edge("em", "o", "q", var("m"))
                .edge("ek", "o", "r", var("k"))
                .sign("en", sign)
                .build(),
            expected,
        );
    }

    // 3-arm star with two n-arms swapped by F
    for (name, sign, expected) in [("Unns_k+", 1, "n+2*k"), ("Unns_k-", -1, "n")] {
        push(
            name,
            ForestBuilder::new()
                .vertex("o")
                .s_vertex("p")
                .s_vertex("q")
                .s_vertex("r")
                .edge("e0", "o", "p", var("n"))
                .edge("e1", "o", "q", var("n"))
                .edge("ek", "o", "r", var("k"))
                .maps(&[("p", "q"), ("q", "p")])
                .sign("e0", sign)
                .build(),
            expected,
        );
    }

    // 3-arm star with all three n-arms cycled by F
    for (name, sign, expected) in [("Unnn+", 1, "3"), ("Unnn-", -1, "1")] {
        push(
            name,
            ForestBuilder::new()
                .vertex("o")
                .s_vertex("p")
                .s_vertex("q")
                .s_vertex("r")
                .edge("e0", "o", "p", var("n"))
                .edge("e1", "o", "q", var("n"))
                .edge("e2", "o", "r", var("n"))
                .maps(&[("p", "q"), ("q", "r"), ("r", "p")])
                .sign("e0", sign)
                .build(),
            expected,
        );
    }

    // two yellow edges joined by a blue chain link
    for (name, s1, s2, expected) in [
        ("In+xIm+", 1, 1, "n*m"),
        ("In+xIm-", 1, -1, "n*hcf(m,2)"),
        ("In-xIm-", -1, -1, "hcf(n,2)*hcf(m,2)"),
    ] {
        push(
            name,
            ForestBuilder::new()
                .s_vertex("a")
                .s_vertex("b")
                .s_vertex("c")
                .s_vertex("d")
                .edge("en", "a", "b", var("n"))
                .s_edge("t", "b", "c", even_var("t"))
                .edge("em", "c", "d", var("m"))
                .sign("en", s1)
                .sign("em", s2)
                .build(),
            expected,
        );
    }

    // two yellow n-edges joined by a blue chain link of length 2r, with F
    // swapping the two halves (inverting the blue edge)
    for (name, s1, s2, expected) in [("In+xtIn", 1, 1, "n"), ("In-xtIn", 1, -1, "hcf(n,2)")] {
        push(
            name,
            ForestBuilder::new()
                .s_vertex("a")
                .s_vertex("b")
                .s_vertex("c")
                .s_vertex("d")
                .edge("e0", "a", "b", var("n"))
                .s_edge("t", "b", "c", doubled_var("r"))
                .edge("e1", "c", "d", var("n"))
                .maps(&[("a", "d"), ("d", "a"), ("b", "c"), ("c", "b")])
                .sign("e0", s1)
                .sign("e1", s2)
                .build(),
            expected,
        );
    }

    assert_eq!(rows.len(), 23);
    rows
}

/// The 4-leaf star: two a-arms swapped by F, a b-arm and a c-arm; sign +.
/// Tamagawa number a*(b+c)+2*b*c.
pub fn star_fixture() -> BYForest {
    crate::forest::quad_fixture(var("a"), var("b"), var("c"), 1)
}

/// The large example: three yellow components (signs all -), a blue edge,
/// and edge orbits of sizes 2, 2, 2, 3 and 4. Expected Tamagawa number
/// y*(a*(b+c)+2*b*c)*hcf(z,2); the variables c, w, x are even.
pub fn comprehensive_fixture() -> BYForest {
    ForestBuilder::new()
        .vertex("l")
        .vertex("ur")
        .vertex("dr")
        .s_vertex("lw")
        .s_vertex("lnw")
        .s_vertex("lne")
        .s_vertex("le")
        .s_vertex("lse")
        .s_vertex("lsw")
        .s_vertex("urw")
        .s_vertex("urn")
        .s_vertex("ure")
        .s_vertex("ctr")
        .s_vertex("dre")
        .s_vertex("drs")
        .s_vertex("drw")
        .s_edge("w", "le", "ctr", even_var("w"))
        .edge("x", "l", "le", even_var("x"))
        .edge("y0", "l", "lnw", var("y"))
        .edge("y1", "l", "lne", var("y"))
        .edge("z0", "l", "lw", var("z"))
        .edge("z1", "l", "lsw", var("z"))
        .edge("z2", "l", "lse", var("z"))
        .edge("b0", "ur", "urw", var("b"))
        .edge("a0", "ur", "urn", var("a"))
        .edge("a1", "ur", "ure", var("a"))
        .edge("c0", "ur", "ctr", even_var("c"))
        .edge("c1", "dr", "ctr", even_var("c"))
        .edge("a2", "dr", "dre", var("a"))
        .edge("a3", "dr", "drs", var("a"))
        .edge("b1", "dr", "drw", var("b"))
        .maps(&[
            ("lnw", "lne"),
            ("lne", "lnw"),
            ("lw", "lsw"),
            ("lsw", "lse"),
            ("lse", "lw"),
            ("ur", "dr"),
            ("dr", "ur"),
            ("urw", "drw"),
            ("drw", "urw"),
            ("urn", "dre"),
            ("dre", "ure"),
            ("ure", "drs"),
            ("drs", "urn"),
        ])
        .sign("x", -1)
        .sign("c0", -1)
        .sign("c1", -1)
        .build()
}

/// The five-spoked wheel with unit lengths and the rotation as Frobenius:
/// a general (non-hyperelliptic) graph control. The involution slot is the
/// identity since the wheel is used only through the graph oracle.
pub fn wheel_fixture() -> crate::cover::HyperellipticGraph {
    use crate::cover::{GraphEdge, GraphMap, HyperellipticGraph, MetricGraph};
    use num_bigint::BigInt;
    use num_rational::BigRational;

    let mut graph = MetricGraph::default();
    graph.vertices.insert("h".into());
    let one = BigRational::from(BigInt::from(1));
    let mut rot = GraphMap::default();
    rot.vertex_map.insert("h".into(), "h".into());
    for i in 0..5usize {
        graph.vertices.insert(format!("r{i}"));
        graph.edges.insert(
            format!("s{i}"),
            GraphEdge { ends: ("h".into(), format!("r{i}")), length: one.clone() },
        );
        graph.edges.insert(
            format!("c{i}"),
            GraphEdge {
                ends: (format!("r{i}"), format!("r{}", (i + 1) % 5)),
                length: one.clone(),
            },
        );
        rot.vertex_map.insert(format!("r{i}"), format!("r{}", (i + 1) % 5));
        rot.edge_map.insert(format!("s{i}"), format!("s{}", (i + 1) % 5));
        rot.edge_map.insert(format!("c{i}"), format!("c{}", (i + 1) % 5));
    }
    let iota = GraphMap::identity(&graph);
    HyperellipticGraph { graph, iota, frob: rot }
}

pub const STAR_EXPECTED: &str = "a*(b+c)+2*b*c";
pub const COMPREHENSIVE_EXPECTED: &str = "y*(a*(b+c)+2*b*c)*hcf(z,2)";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_rows_are_valid_forests() {
        for row in genus2_rows() {
            assert!(row.forest.validate().is_empty(), "{}: {:?}", row.name, row.forest.validate());
            assert!(
                matches!(row.forest.check_parity_b(), Ok(None)),
                "{} violates parity (B)",
                row.name
            );
        }
        assert!(star_fixture().validate().is_empty());
        assert!(comprehensive_fixture().validate().is_empty());
        assert!(matches!(comprehensive_fixture().check_parity_b(), Ok(None)));
    }
}
