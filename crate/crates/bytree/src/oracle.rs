//! Brute-force computation of component groups straight from homology
//! lattices, used as ground truth for the combinatorial algorithms.
//!
//! The relative homology lattice of a BY forest is built by contracting
//! every connected component of S to a marked point and taking paths
//! between marked points as a basis; the pairing is the length-weighted
//! dot product on edge coordinates. The geometric component group is the
//! cokernel of the Gram matrix with the transpose-inverse action, and the
//! arithmetic one is its fixed subgroup.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::abelian::{FinGenAbGroup, GroupEndo, InvariantFactors};
use crate::cover::{to_double_cover, GraphMap, HyperellipticGraph, MetricGraph};
use crate::forest::{BYForest, CoreError, EdgeId, VertexId};
use crate::snf::{self, IMat};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("lengths must be concrete integers")]
    SymbolicLength,
    #[error("cycle pairing is not integral")]
    NonIntegralGram,
    #[error("core error: {0}")]
    Core(#[from] CoreError),
}

/// A lattice with a positive definite pairing and an isometric action:
/// relative homology of a BY forest or homology of a metric graph.
#[derive(Clone, Debug)]
pub struct RelHomLattice {
    /// Human-readable description of each basis vector.
    pub labels: Vec<String>,
    /// Edge ids indexing the coordinate rows of `basis`.
    pub edge_order: Vec<EdgeId>,
    /// Columns are basis cycles in oriented edge coordinates.
    pub basis: IMat,
    /// Length-weighted intersection pairing on the basis.
    pub gram: IMat,
    /// Matrix of the (signed) automorphism on the basis.
    pub action: IMat,
}

impl RelHomLattice {
    pub fn rank(&self) -> usize {
        self.gram.rows
    }

    pub fn discriminant(&self) -> BigInt {
        snf::det(&self.gram)
    }
}

/// Connected components of the subgraph S, as sorted vertex sets, ordered
/// by smallest vertex.
fn s_components(p: &BYForest) -> Vec<std::collections::BTreeSet<VertexId>> {
    let mut comp: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut comps: Vec<std::collections::BTreeSet<VertexId>> = Vec::new();
    for v in &p.s.vertices {
        if comp.contains_key(v) {
            continue;
        }
        let idx = comps.len();
        let mut stack = vec![v.clone()];
        let mut set = std::collections::BTreeSet::new();
        while let Some(u) = stack.pop() {
            if !set.insert(u.clone()) {
                continue;
            }
            comp.insert(u.clone(), idx);
            for eid in p.forest.incident_edges(&u) {
                if p.s.edges.contains(&eid) {
                    stack.push(p.forest.neighbor(&eid, &u));
                }
            }
        }
        comps.push(set);
    }
    comps
}

/// H₁(T, S, ℤ) with the length pairing and the εF action.
pub fn lattice_of(p: &BYForest) -> Result<RelHomLattice, OracleError> {
    p.require_valid()?;
    let yellow: Vec<EdgeId> = p
        .forest
        .edges
        .keys()
        .filter(|e| !p.s.edges.contains(*e))
        .cloned()
        .collect();
    let edge_index: BTreeMap<EdgeId, usize> =
        yellow.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
    let mut lengths: Vec<BigInt> = Vec::new();
    for e in &yellow {
        let l = p.forest.edges[e]
            .length
            .as_constant()
            .ok_or(OracleError::SymbolicLength)?;
        lengths.push(BigInt::from(l));
    }

    let comps = s_components(p);
    let rep_of: Vec<VertexId> = comps
        .iter()
        .map(|c| c.iter().next().unwrap().clone())
        .collect();

    // Basis: per tree of the forest, paths from the smallest marked
    // component to every other marked component.
    let mut labels = Vec::new();
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    for tree in p.forest.tree_components() {
        let mut reps: Vec<VertexId> = rep_of
            .iter()
            .filter(|r| tree.contains(*r))
            .cloned()
            .collect();
        reps.sort();
        if reps.len() < 2 {
            continue;
        }
        let base = reps[0].clone();
        for target in &reps[1..] {
            let path = p
                .forest
                .path_between(&base, target)
                .expect("marked components in one tree are connected");
            let mut col = vec![BigInt::zero(); yellow.len()];
            for (eid, orient) in path {
                if let Some(&i) = edge_index.get(&eid) {
                    col[i] += BigInt::from(orient);
                }
            }
            labels.push(format!("{base}->{target}"));
            cols.push(col);
        }
    }

    let n = cols.len();
    let mut basis = IMat::zero(yellow.len(), n);
    for (j, col) in cols.iter().enumerate() {
        for (i, c) in col.iter().enumerate() {
            basis[(i, j)] = c.clone();
        }
    }

    let gram = weighted_gram(&basis, &lengths);

    // εF on chains: an edge e in a signed yellow component C maps to
    // ε(C)·F(e), with the orientation of F on e.
    let emap = p.edge_map()?;
    let mut sign_of: BTreeMap<EdgeId, i8> = BTreeMap::new();
    for sc in p.signed_components()? {
        for e in &sc.component.edges {
            sign_of.insert(e.clone(), sc.sign);
        }
    }
    let mut action = IMat::zero(n, n);
    for j in 0..n {
        let mut img = vec![BigInt::zero(); yellow.len()];
        for (i, e) in yellow.iter().enumerate() {
            if basis[(i, j)].is_zero() {
                continue;
            }
            let (fe, orient) = &emap[e];
            let k = edge_index[fe];
            let s = BigInt::from(sign_of[e] * orient);
            img[k] += &basis[(i, j)] * s;
        }
        let a = snf::solve(&basis, &img).expect("εF image must lie in the basis span");
        for (i, c) in a.iter().enumerate() {
            action[(i, j)] = c.clone();
        }
    }

    let lat = RelHomLattice { labels, edge_order: yellow, basis, gram, action };
    check_lattice(&lat);
    Ok(lat)
}

fn weighted_gram(basis: &IMat, lengths: &[BigInt]) -> IMat {
    let n = basis.cols;
    let mut gram = IMat::zero(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = BigInt::zero();
            for (e, l) in lengths.iter().enumerate() {
                s += l * &basis[(e, i)] * &basis[(e, j)];
            }
            gram[(i, j)] = s.clone();
            gram[(j, i)] = s;
        }
    }
    gram
}

fn check_lattice(lat: &RelHomLattice) {
    assert!(
        snf::is_positive_definite(&lat.gram),
        "length pairing must be positive definite"
    );
    let g = lat.action.transpose().mul(&lat.gram).mul(&lat.action);
    assert_eq!(
        g.to_rows(),
        lat.gram.to_rows(),
        "automorphism must be a gram isometry"
    );
}

/// Homology lattice H₁(𝒢, ℤ) of a metric graph with an automorphism,
/// via fundamental cycles of a spanning forest. The pairing must come out
/// integral.
pub fn lattice_of_graph(
    graph: &MetricGraph,
    map: &GraphMap,
) -> Result<RelHomLattice, OracleError> {
    let edge_order: Vec<EdgeId> = graph.edges.keys().cloned().collect();
    let edge_index: BTreeMap<EdgeId, usize> =
        edge_order.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();

    // Spanning forest by BFS; chain_to[v] = oriented edge chain from the
    // component root to v.
    let mut chain_to: BTreeMap<VertexId, Vec<(usize, i8)>> = BTreeMap::new();
    let mut tree_edges: std::collections::BTreeSet<EdgeId> = Default::default();
    for v in &graph.vertices {
        if chain_to.contains_key(v) {
            continue;
        }
        chain_to.insert(v.clone(), Vec::new());
        let mut queue = std::collections::VecDeque::from([v.clone()]);
        while let Some(u) = queue.pop_front() {
            for eid in graph.incident_edges(&u) {
                let e = &graph.edges[&eid];
                let (w, orient) = if e.ends.0 == u {
                    (e.ends.1.clone(), 1i8)
                } else {
                    (e.ends.0.clone(), -1i8)
                };
                if chain_to.contains_key(&w) {
                    continue;
                }
                let mut c = chain_to[&u].clone();
                c.push((edge_index[&eid], orient));
                chain_to.insert(w.clone(), c);
                tree_edges.insert(eid.clone());
                queue.push_back(w);
            }
        }
    }

    // Fundamental cycles: non-tree edge u→v followed by the tree path back.
    let mut labels = Vec::new();
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    for eid in &edge_order {
        if tree_edges.contains(eid) {
            continue;
        }
        let e = &graph.edges[eid];
        let mut col = vec![BigInt::zero(); edge_order.len()];
        col[edge_index[eid]] += BigInt::one();
        for (i, o) in &chain_to[&e.ends.0] {
            col[*i] += BigInt::from(*o);
        }
        for (i, o) in &chain_to[&e.ends.1] {
            col[*i] -= BigInt::from(*o);
        }
        labels.push(format!("cycle({eid})"));
        cols.push(col);
    }
    let n = cols.len();
    let mut basis = IMat::zero(edge_order.len(), n);
    for (j, col) in cols.iter().enumerate() {
        for (i, c) in col.iter().enumerate() {
            basis[(i, j)] = c.clone();
        }
    }

    // Rational weighted pairing, required integral.
    let mut gram = IMat::zero(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = BigRational::zero();
            for (k, eid) in edge_order.iter().enumerate() {
                let prod = &basis[(k, i)] * &basis[(k, j)];
                s += &graph.edges[eid].length * BigRational::from(prod);
            }
            if !s.is_integer() {
                return Err(OracleError::NonIntegralGram);
            }
            gram[(i, j)] = s.to_integer();
            gram[(j, i)] = gram[(i, j)].clone();
        }
    }

    // Action of the automorphism on cycles.
    let mut action = IMat::zero(n, n);
    for j in 0..n {
        let mut img = vec![BigInt::zero(); edge_order.len()];
        for (i, eid) in edge_order.iter().enumerate() {
            if basis[(i, j)].is_zero() {
                continue;
            }
            let e = &graph.edges[eid];
            let fe = &map.edge_map[eid];
            let fends = &graph.edges[fe].ends;
            let mu = &map.vertex_map[&e.ends.0];
            let mv = &map.vertex_map[&e.ends.1];
            let orient = if (&fends.0, &fends.1) == (mu, mv) {
                1i8
            } else {
                debug_assert_eq!((&fends.0, &fends.1), (mv, mu));
                -1i8
            };
            img[edge_index[fe]] += &basis[(i, j)] * BigInt::from(orient);
        }
        let a = snf::solve(&basis, &img).expect("automorphism image must be a cycle");
        for (i, c) in a.iter().enumerate() {
            action[(i, j)] = c.clone();
        }
    }

    let lat = RelHomLattice { labels, edge_order, basis, gram, action };
    check_lattice(&lat);
    Ok(lat)
}

/// Φ̄ = Λ∨/Λ = coker(gram) with the induced action on dual coordinates
/// (the transpose-inverse of the lattice action, checked integral and
/// relation-preserving).
pub fn geometric_component_group(lat: &RelHomLattice) -> (FinGenAbGroup, GroupEndo) {
    let n = lat.rank();
    let relations = lat.gram.transpose().to_rows();
    let group = FinGenAbGroup::new(n, relations);
    let dual = snf::unimodular_inverse(&lat.action.transpose());
    let endo = GroupEndo::new(&group, dual.to_rows())
        .expect("dual action must preserve the gram relations");
    (group, endo)
}

/// #Φ_T: order of the fixed subgroup of the geometric component group.
pub fn tamagawa_oracle(p: &BYForest) -> Result<BigInt, OracleError> {
    let lat = lattice_of(p)?;
    let (group, endo) = geometric_component_group(&lat);
    let (fixed, _) = group.fixed_subgroup(&endo);
    Ok(fixed.order().expect("fixed subgroup of a finite group is finite"))
}

/// Invariant factors of Φ_T.
pub fn neron_oracle(p: &BYForest) -> Result<InvariantFactors, OracleError> {
    let lat = lattice_of(p)?;
    let (group, endo) = geometric_component_group(&lat);
    let (fixed, _) = group.fixed_subgroup(&endo);
    Ok(fixed.invariant_factors())
}

/// Result of comparing the relative homology of a forest with the homology
/// of its double cover through the explicit correspondence γ ↦ σγ − ισγ.
#[derive(Clone, Debug)]
pub struct CoverIsometryReport {
    pub rank: usize,
    pub gram_matches: bool,
    pub action_matches: bool,
    pub iota_negates: bool,
    pub discriminant: BigInt,
}

impl CoverIsometryReport {
    pub fn ok(&self) -> bool {
        self.gram_matches && self.action_matches && self.iota_negates
    }
}

/// Check the homology isometry between a BY forest and its double cover:
/// a downstairs path γ lifts to the cycle γ@0 − γ@1, and this map must
/// carry the length pairing and the Frobenius action across exactly, with
/// ι acting as −1 on the image.
pub fn check_cover_isometry(p: &BYForest) -> Result<CoverIsometryReport, OracleError> {
    let lat = lattice_of(p)?;
    let cover: HyperellipticGraph = to_double_cover(p)?;
    let glat = lattice_of_graph(&cover.graph, &cover.frob)?;
    let gidx: BTreeMap<EdgeId, usize> = glat
        .edge_order
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), i))
        .collect();

    let n = lat.rank();
    let mut x = IMat::zero(glat.rank(), n);
    for j in 0..n {
        let mut chain = vec![BigInt::zero(); glat.edge_order.len()];
        for (i, eid) in lat.edge_order.iter().enumerate() {
            let c = &lat.basis[(i, j)];
            if c.is_zero() {
                continue;
            }
            chain[gidx[&format!("{eid}@0")]] += c;
            chain[gidx[&format!("{eid}@1")]] -= c;
        }
        let a = snf::solve(&glat.basis, &chain).expect("lifted chain must be a cycle");
        for (i, c) in a.iter().enumerate() {
            x[(i, j)] = c.clone();
        }
    }

    let gram_matches = x.transpose().mul(&glat.gram).mul(&x).to_rows() == lat.gram.to_rows();
    let action_matches = glat.action.mul(&x).to_rows() == x.mul(&lat.action).to_rows();
    let iota = lattice_of_graph(&cover.graph, &cover.iota)?;
    let neg = iota.action.mul(&x);
    let iota_negates = (0..neg.rows)
        .all(|i| (0..neg.cols).all(|j| neg[(i, j)] == -&x[(i, j)]));

    Ok(CoverIsometryReport {
        rank: n,
        gram_matches,
        action_matches,
        iota_negates,
        discriminant: lat.discriminant(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::from_hyperelliptic_graph;
    use crate::cover::GraphEdge;
    use crate::forest::{quad_fixture_const, ForestBuilder, LengthForm};

    /// Four-armed star with leaf ids sorted so the basis is
    /// sw→nw, sw→ne, sw→se; arm lengths sw=3, nw=2, ne=1, se=1 and F
    /// swapping the two short arms.
    fn star_1_2_3(sign: i8) -> BYForest {
        ForestBuilder::new()
            .vertex("c")
            .s_vertex("a_sw")
            .s_vertex("b_nw")
            .s_vertex("c_ne")
            .s_vertex("d_se")
            .edge_const("esw", "a_sw", "c", 3)
            .edge_const("enw", "b_nw", "c", 2)
            .edge_const("ene", "c_ne", "c", 1)
            .edge_const("ese", "d_se", "c", 1)
            .maps(&[("c_ne", "d_se"), ("d_se", "c_ne")])
            .sign("ene", sign)
            .build()
    }

    #[test]
    fn star_gram_and_tamagawa() {
        let p = star_1_2_3(1);
        let lat = lattice_of(&p).unwrap();
        assert_eq!(
            lat.gram.to_rows(),
            IMat::from_i64(&[&[5, 3, 3], &[3, 4, 3], &[3, 3, 4]]).to_rows()
        );
        assert_eq!(lat.discriminant(), BigInt::from(17));
        let (group, _) = geometric_component_group(&lat);
        assert_eq!(group.invariant_factors().0, vec![BigInt::from(17)]);
        assert_eq!(tamagawa_oracle(&p).unwrap(), BigInt::from(17));
    }

    #[test]
    fn single_edge_in_fixture() {
        // split I_n: c = n; nonsplit: 2 for n even, 1 for n odd
        for (n, sign, expect) in [(4u64, 1i8, 4u64), (4, -1, 2), (5, -1, 1), (5, 1, 5)] {
            let p = ForestBuilder::new()
                .s_vertex("a")
                .s_vertex("b")
                .edge_const("e", "a", "b", n)
                .sign("e", sign)
                .build();
            let lat = lattice_of(&p).unwrap();
            assert_eq!(lat.gram.to_rows(), vec![vec![BigInt::from(n)]]);
            assert_eq!(tamagawa_oracle(&p).unwrap(), BigInt::from(expect));
        }
    }

    #[test]
    fn s_equals_t_is_trivial() {
        let p = ForestBuilder::new()
            .s_vertex("a")
            .s_vertex("b")
            .s_edge("e", "a", "b", LengthForm::constant(4))
            .build();
        let lat = lattice_of(&p).unwrap();
        assert_eq!(lat.rank(), 0);
        assert_eq!(tamagawa_oracle(&p).unwrap(), BigInt::one());
        assert!(neron_oracle(&p).unwrap().0.is_empty());
    }

    #[test]
    fn quad_neron_groups() {
        let p = quad_fixture_const(2, 2, 2, 1);
        assert_eq!(
            neron_oracle(&p).unwrap().0,
            vec![BigInt::from(2), BigInt::from(8)]
        );
        let p = quad_fixture_const(3, 2, 4, -1);
        assert_eq!(neron_oracle(&p).unwrap().0, vec![BigInt::from(6)]);
        let p = quad_fixture_const(3, 1, 1, -1);
        assert_eq!(tamagawa_oracle(&p).unwrap(), BigInt::from(6));
    }

    #[test]
    fn full_base_change_gives_geometric_order() {
        let p = quad_fixture_const(1, 2, 3, 1);
        assert_eq!(tamagawa_oracle(&p).unwrap(), BigInt::from(17));
        let q = p.scale_and_power(1, 2).unwrap();
        assert_eq!(tamagawa_oracle(&q).unwrap(), BigInt::from(17));
    }

    #[test]
    fn wheel_graph_lattice() {
        // five-spoked wheel with unit lengths: rank 5, discriminant 121
        let mut graph = MetricGraph::default();
        graph.vertices.insert("h".into());
        for i in 0..5 {
            graph.vertices.insert(format!("r{i}"));
        }
        let one = BigRational::from(BigInt::one());
        for i in 0..5usize {
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
        }
        let lat = lattice_of_graph(&graph, &GraphMap::identity(&graph)).unwrap();
        assert_eq!(lat.rank(), 5);
        assert_eq!(lat.discriminant(), BigInt::from(121));
    }

    #[test]
    fn cover_isometry_star_and_interval() {
        for p in [star_1_2_3(1), star_1_2_3(-1), quad_fixture_const(2, 2, 4, -1)] {
            let r = check_cover_isometry(&p).unwrap();
            assert!(r.ok(), "isometry report must pass: {r:?}");
        }
        let p = ForestBuilder::new()
            .s_vertex("a")
            .s_vertex("b")
            .edge_const("e", "a", "b", 4)
            .build();
        let r = check_cover_isometry(&p).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.discriminant, BigInt::from(4));
        assert!(r.ok());
    }

    #[test]
    fn cover_roundtrip_preserves_invariants() {
        for p in [
            quad_fixture_const(1, 2, 3, 1),
            quad_fixture_const(2, 2, 4, -1),
            star_1_2_3(-1),
        ] {
            let g = to_double_cover(&p).unwrap();
            let q = from_hyperelliptic_graph(&g).unwrap();
            assert_eq!(
                tamagawa_oracle(&p).unwrap(),
                tamagawa_oracle(&q).unwrap()
            );
            assert_eq!(neron_oracle(&p).unwrap().0, neron_oracle(&q).unwrap().0);
        }
    }
}
