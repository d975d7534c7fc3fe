//! Néron component groups of simple BY trees via pipes: marking, structural
//! decomposition into the four constructors, the pipe recursion, and the
//! positive/negative triple recursions with group recovery.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::abelian::{endo_power, FinGenAbGroup, GroupElement, GroupEndo, InvariantFactors};
use crate::forest::{BYForest, CoreError, EdgeId, VertexId};
use crate::oracle;
use crate::snf::{self, IMat};
use crate::tamagawa::{reduce, SimpleBYTree, TamagawaError};

#[derive(Debug, Error)]
pub enum NeronError {
    #[error("core error: {0}")]
    Core(#[from] CoreError),
    #[error("tamagawa error: {0}")]
    Tamagawa(#[from] TamagawaError),
    #[error("no F-fixed vertex outside S exists, even after subdivision")]
    NoFixedVertex,
    #[error("malformed marked tree: {0}")]
    MalformedTree(String),
    #[error("type trichotomy violated: {0} of y, η, y+η are norms")]
    TrichotomyViolation(usize),
    #[error("algorithm disagrees with the oracle: got {got}, oracle {oracle}")]
    OracleMismatch { got: String, oracle: String },
}

/// A simple BY tree together with an F-fixed marked vertex * outside S.
#[derive(Clone, Debug)]
pub struct MarkedBYTree {
    pub tree: BYForest,
    pub star: VertexId,
    /// True when the only F-fixed vertices lay inside S, so the marked
    /// vertex was pulled out of S. The input tree is then (T, S ∪ {*}, εF)
    /// for the marked tree (T, S, F, *) and its component group is
    /// recovered on the y side of the triples instead of the η side.
    pub star_in_s: bool,
}

/// Find an F-fixed vertex outside S, unit-subdividing once if necessary
/// (a metric equivalence). The returned tree keeps the input S, so the
/// component group of the unmarked tree is recovered on the η side.
pub fn mark_tree(t: &SimpleBYTree) -> Result<MarkedBYTree, NeronError> {
    let fixed = |p: &BYForest| -> Option<VertexId> {
        p.forest
            .vertices
            .iter()
            .find(|v| !p.s.vertices.contains(*v) && &p.apply_f(v) == *v)
            .cloned()
    };
    if let Some(star) = fixed(&t.tree) {
        return Ok(MarkedBYTree { tree: t.tree.clone(), star, star_in_s: false });
    }
    let sub = t.tree.subdivide()?;
    if let Some(star) = fixed(&sub) {
        return Ok(MarkedBYTree { tree: sub, star, star_in_s: false });
    }
    // Every F-fixed point lies in S: the tree is (T, S ∪ {*}, εF) for a
    // marked tree whose S omits the fixed vertex.
    let star = t
        .tree
        .forest
        .vertices
        .iter()
        .find(|v| t.tree.s.vertices.contains(*v) && &t.tree.apply_f(v) == *v)
        .cloned()
        .ok_or(NeronError::NoFixedVertex)?;
    let mut tree = t.tree.clone();
    tree.s.vertices.remove(&star);
    if tree.s.vertices.is_empty() {
        return Err(NeronError::NoFixedVertex);
    }
    Ok(MarkedBYTree { tree, star, star_in_s: true })
}

/// Structural decomposition of a marked BY tree: base edges into S, grafted
/// edges, wedges of branches at the marked point, and induced wedges for
/// branch orbits of size q > 1. Pendant yellow branches without S vertices
/// are pruned (the trivial-enlargement constructor).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constructor {
    Base(u64),
    Graft(Box<Constructor>, u64),
    Wedge(Vec<Constructor>),
    IndWedge(Box<Constructor>, u64),
}

struct SubTree {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, (VertexId, VertexId, u64)>,
    s: BTreeSet<VertexId>,
    vmap: BTreeMap<VertexId, VertexId>,
}

impl SubTree {
    fn degree(&self, v: &str) -> usize {
        self.edges.values().filter(|(a, b, _)| a == v || b == v).count()
    }

    fn incident(&self, v: &str) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, (a, b, _))| a == v || b == v)
            .map(|(e, _)| e.clone())
            .collect()
    }

    fn neighbor(&self, eid: &str, v: &str) -> VertexId {
        let (a, b, _) = &self.edges[eid];
        if a == v { b.clone() } else { a.clone() }
    }

    /// Image of an edge under the vertex map (trees have no parallel
    /// edges, so endpoints determine the edge).
    fn edge_image(&self, eid: &str) -> Result<EdgeId, NeronError> {
        let (a, b, _) = &self.edges[eid];
        let (ia, ib) = (self.vmap[a].clone(), self.vmap[b].clone());
        self.edges
            .iter()
            .find(|(_, (u, v, _))| (u, v) == (&ia, &ib) || (u, v) == (&ib, &ia))
            .map(|(e, _)| e.clone())
            .ok_or_else(|| NeronError::MalformedTree(format!("edge {eid} has no image")))
    }

    /// Remove yellow leaves other than `star` until none remain.
    fn prune(&mut self, star: &VertexId) {
        loop {
            let removable: Vec<VertexId> = self
                .vertices
                .iter()
                .filter(|v| {
                    *v != star && !self.s.contains(*v) && self.degree(v) <= 1
                })
                .cloned()
                .collect();
            if removable.is_empty() {
                return;
            }
            for v in &removable {
                for e in self.incident(v) {
                    self.edges.remove(&e);
                }
                self.vertices.remove(v);
                self.vmap.remove(v);
            }
        }
    }
}

pub fn decompose(m: &MarkedBYTree) -> Result<Constructor, NeronError> {
    let mut edges = BTreeMap::new();
    for (eid, e) in &m.tree.forest.edges {
        let l = e.length.as_constant().ok_or(CoreError::SymbolicLength)?;
        edges.insert(eid.clone(), (e.ends.0.clone(), e.ends.1.clone(), l));
    }
    let mut sub = SubTree {
        vertices: m.tree.forest.vertices.clone(),
        edges,
        s: m.tree.s.vertices.clone(),
        vmap: m.tree.aut.vertex_map.clone(),
    };
    sub.prune(&m.star);
    decompose_at(&sub, &m.star)
}

fn decompose_at(sub: &SubTree, star: &VertexId) -> Result<Constructor, NeronError> {
    // group the branches at * into orbits under the automorphism
    let incident = sub.incident(star);
    if incident.is_empty() {
        return Err(NeronError::MalformedTree(format!(
            "marked vertex {star} has no branches"
        )));
    }
    let mut seen: BTreeSet<EdgeId> = BTreeSet::new();
    let mut items: Vec<Constructor> = Vec::new();
    for eid in &incident {
        if seen.contains(eid) {
            continue;
        }
        let mut orbit = vec![eid.clone()];
        let mut cur = sub.edge_image(eid)?;
        while &cur != eid {
            orbit.push(cur.clone());
            cur = sub.edge_image(&cur)?;
        }
        seen.extend(orbit.iter().cloned());
        let q = orbit.len() as u64;
        let rep = orbit.iter().min().unwrap().clone();
        let v = sub.neighbor(&rep, star);
        let l = sub.edges[&rep].2;

        // the subtree beyond the representative edge, under the q-th power
        let mut verts = BTreeSet::from([v.clone()]);
        let mut stack = vec![v.clone()];
        let mut inner_edges: BTreeMap<EdgeId, (VertexId, VertexId, u64)> = BTreeMap::new();
        while let Some(u) = stack.pop() {
            for e in sub.incident(&u) {
                if e == rep || inner_edges.contains_key(&e) {
                    continue;
                }
                let w = sub.neighbor(&e, &u);
                if &w == star {
                    continue;
                }
                inner_edges.insert(e.clone(), sub.edges[&e].clone());
                if verts.insert(w.clone()) {
                    stack.push(w);
                }
            }
        }
        let item = if inner_edges.is_empty() {
            if !sub.s.contains(&v) {
                return Err(NeronError::MalformedTree(format!(
                    "pendant vertex {v} outside S survived pruning"
                )));
            }
            Constructor::Base(l)
        } else {
            let mut vmap_q: BTreeMap<VertexId, VertexId> = BTreeMap::new();
            for u in &verts {
                let mut img = u.clone();
                for _ in 0..q {
                    img = sub.vmap[&img].clone();
                }
                vmap_q.insert(u.clone(), img);
            }
            let inner = SubTree {
                vertices: verts.clone(),
                edges: inner_edges,
                s: sub.s.iter().filter(|x| verts.contains(*x)).cloned().collect(),
                vmap: vmap_q,
            };
            Constructor::Graft(Box::new(decompose_at(&inner, &v)?), l)
        };
        items.push(if q > 1 {
            Constructor::IndWedge(Box::new(item), q)
        } else {
            item
        });
    }
    Ok(if items.len() == 1 { items.remove(0) } else { Constructor::Wedge(items) })
}

// ---------------------------------------------------------------------
// positive triples

/// (Πᶠ, y, η): Πᶠ has torsion-free rank 1 and y, η are non-torsion. The
/// component groups of (T,S,+F) and (T,S∪{*},+F) are Πᶠ/η and Πᶠ/y.
#[derive(Clone, Debug)]
pub struct PosTriple {
    pub group: FinGenAbGroup,
    pub y: GroupElement,
    pub eta: GroupElement,
}

pub fn positive_triple(c: &Constructor) -> PosTriple {
    match c {
        Constructor::Base(l) => PosTriple {
            group: FinGenAbGroup::free(1),
            y: GroupElement::from_i64(&[*l as i64]),
            eta: GroupElement::from_i64(&[1]),
        },
        Constructor::Graft(c0, l) => {
            let t = positive_triple(c0);
            let y = t.y.add(&t.eta.scale(&BigInt::from(*l)));
            PosTriple { y, ..t }
        }
        Constructor::Wedge(items) => {
            let mut triples = items.iter().map(positive_triple);
            let first = triples.next().expect("wedge of at least one tree");
            triples.fold(first, |acc, t| {
                let rank = acc.group.rank + t.group.rank;
                let sum = acc.group.direct_sum(&t.group);
                let pad = |x: &GroupElement| FinGenAbGroup::pad_element(x, rank);
                let shift = |x: &GroupElement| {
                    let mut v = vec![BigInt::zero(); acc.group.rank];
                    v.extend(x.coordinates.iter().cloned());
                    GroupElement { coordinates: v }
                };
                let rel = pad(&acc.y).sub(&shift(&t.y));
                PosTriple {
                    group: sum.quotient_by_element(&rel),
                    y: pad(&acc.y),
                    eta: pad(&acc.eta).add(&shift(&t.eta)),
                }
            })
        }
        Constructor::IndWedge(c0, q) => {
            let t = positive_triple(c0);
            let group = t.group.adjoin_fraction(&t.y, &BigInt::from(*q));
            let rank = group.rank;
            let mut y = vec![BigInt::zero(); rank];
            y[rank - 1] = BigInt::one();
            PosTriple {
                group,
                y: GroupElement { coordinates: y },
                eta: FinGenAbGroup::pad_element(&t.eta, rank),
            }
        }
    }
}

// ---------------------------------------------------------------------
// negative triples

/// (Π⁻ᶠ, α, τ): Π⁻ᶠ finite, α a representative of a class mod 2Π⁻ᶠ, and
/// the type τ ∈ {0,1,2}. The component group of (T,S,−F) is Π⁻ᶠ when
/// τ ≠ 1 and Π⁻ᶠ⟨½α⟩ when τ = 1; that of (T,S∪{*},−F) swaps the roles of
/// τ = 0 and τ ≠ 0.
#[derive(Clone, Debug)]
pub struct NegTriple {
    pub group: FinGenAbGroup,
    pub alpha: GroupElement,
    pub tau: u8,
}

pub fn negative_triple(c: &Constructor) -> NegTriple {
    match c {
        Constructor::Base(l) => NegTriple {
            group: FinGenAbGroup::trivial(),
            alpha: GroupElement::zero(0),
            tau: if l % 2 == 1 { 2 } else { 0 },
        },
        Constructor::Graft(c0, l) => {
            let t = negative_triple(c0);
            let tau = if l % 2 == 1 { 2 - t.tau } else { t.tau };
            NegTriple { tau, ..t }
        }
        Constructor::Wedge(items) => {
            let mut triples = items.iter().map(negative_triple);
            let first = triples.next().expect("wedge of at least one tree");
            triples.fold(first, |t0, t1| {
                let rank = t0.group.rank + t1.group.rank;
                let sum = t0.group.direct_sum(&t1.group);
                let pad = |x: &GroupElement| FinGenAbGroup::pad_element(x, rank);
                let shift = |x: &GroupElement| {
                    let mut v = vec![BigInt::zero(); t0.group.rank];
                    v.extend(x.coordinates.iter().cloned());
                    GroupElement { coordinates: v }
                };
                let (group, alpha) = if t0.tau == 0 && t1.tau == 0 {
                    let half = pad(&t0.alpha).sub(&shift(&t1.alpha));
                    let g = sum.adjoin_fraction(&half, &BigInt::from(2));
                    (g, FinGenAbGroup::pad_element(&pad(&t0.alpha), rank + 1))
                } else {
                    let alpha = if t0.tau == 0 {
                        pad(&t0.alpha)
                    } else if t1.tau == 0 {
                        shift(&t1.alpha)
                    } else {
                        pad(&t0.alpha).add(&shift(&t1.alpha))
                    };
                    (sum, alpha)
                };
                NegTriple { group, alpha, tau: (t0.tau * t1.tau) % 3 }
            })
        }
        Constructor::IndWedge(c0, q) => {
            if q % 2 == 1 {
                negative_triple(c0)
            } else {
                let t = positive_triple(c0);
                NegTriple {
                    group: t.group.quotient_by_element(&t.y),
                    alpha: t.eta,
                    tau: 1,
                }
            }
        }
    }
}

// ---------------------------------------------------------------------
// pipes

/// The pipe (Π, y, η) of a marked BY tree, with the F-action on Π.
#[derive(Clone, Debug)]
pub struct Pipe {
    pub group: FinGenAbGroup,
    pub endo: GroupEndo,
    pub y: GroupElement,
    pub eta: GroupElement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PipeMethod {
    Direct,
    Recursive,
}

pub fn pipe(m: &MarkedBYTree, method: PipeMethod) -> Result<Pipe, NeronError> {
    match method {
        PipeMethod::Direct => pipe_direct(m),
        PipeMethod::Recursive => {
            let c = decompose(m)?;
            Ok(pipe_recursive(&c))
        }
    }
}

/// Direct construction: Λ = H₁(T, S∪{*}) has the paths from * to the
/// points of S as a basis; Π = Λ∨/Σ is the quotient of the dual
/// coordinates by the pairing images of the paths between consecutive
/// points of S; y is the pairing image of any single path, η the
/// all-ones functional; F permutes the dual coordinates like S.
fn pipe_direct(m: &MarkedBYTree) -> Result<Pipe, NeronError> {
    let p = &m.tree;
    let s: Vec<VertexId> = p.s.vertices.iter().cloned().collect();
    let n = s.len();
    let edge_ids: Vec<EdgeId> = p.forest.edges.keys().cloned().collect();
    let mut lengths = Vec::new();
    for e in &edge_ids {
        lengths.push(BigInt::from(
            p.forest.edges[e]
                .length
                .as_constant()
                .ok_or(CoreError::SymbolicLength)?,
        ));
    }
    let eidx: BTreeMap<&EdgeId, usize> =
        edge_ids.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut basis = IMat::zero(edge_ids.len(), n);
    for (j, sv) in s.iter().enumerate() {
        let path = p
            .forest
            .path_between(&m.star, sv)
            .ok_or_else(|| NeronError::MalformedTree("disconnected marked tree".into()))?;
        for (eid, o) in path {
            basis[(eidx[&eid], j)] += BigInt::from(o);
        }
    }
    let mut gram = IMat::zero(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = BigInt::zero();
            for (k, l) in lengths.iter().enumerate() {
                acc += l * &basis[(k, i)] * &basis[(k, j)];
            }
            gram[(i, j)] = acc;
        }
    }
    // relations: G(e_i − e_{i+1})
    let mut relations = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let mut v = Vec::with_capacity(n);
        for r in 0..n {
            v.push(&gram[(r, i)] - &gram[(r, i + 1)]);
        }
        relations.push(v);
    }
    let group = FinGenAbGroup::new(n, relations);
    let y = GroupElement { coordinates: (0..n).map(|r| gram[(r, 0)].clone()).collect() };
    let eta = GroupElement { coordinates: vec![BigInt::one(); n] };
    // F permutes the dual coordinates by its action on S
    let mut mat = vec![vec![BigInt::zero(); n]; n];
    for (i, sv) in s.iter().enumerate() {
        let img = p.apply_f(sv);
        let j = s.iter().position(|x| x == &img).expect("F preserves S");
        mat[j][i] = BigInt::one();
    }
    let endo = GroupEndo::new(&group, mat)
        .map_err(|e| NeronError::MalformedTree(format!("S permutation is no endo: {e}")))?;
    Ok(Pipe { group, endo, y, eta })
}

fn pipe_recursive(c: &Constructor) -> Pipe {
    match c {
        Constructor::Base(l) => Pipe {
            group: FinGenAbGroup::free(1),
            endo: GroupEndo::identity(1),
            y: GroupElement::from_i64(&[*l as i64]),
            eta: GroupElement::from_i64(&[1]),
        },
        Constructor::Graft(c0, l) => {
            let p = pipe_recursive(c0);
            let y = p.y.add(&p.eta.scale(&BigInt::from(*l)));
            Pipe { y, ..p }
        }
        Constructor::Wedge(items) => {
            let mut pipes = items.iter().map(pipe_recursive);
            let first = pipes.next().expect("wedge of at least one tree");
            pipes.fold(first, |p0, p1| {
                let rank = p0.group.rank + p1.group.rank;
                let sum = p0.group.direct_sum(&p1.group);
                let pad = |x: &GroupElement| FinGenAbGroup::pad_element(x, rank);
                let shift = |x: &GroupElement| {
                    let mut v = vec![BigInt::zero(); p0.group.rank];
                    v.extend(x.coordinates.iter().cloned());
                    GroupElement { coordinates: v }
                };
                let rel = pad(&p0.y).sub(&shift(&p1.y));
                let group = sum.quotient_by_element(&rel);
                // block-diagonal action
                let mut mat = vec![vec![BigInt::zero(); rank]; rank];
                for i in 0..p0.group.rank {
                    for j in 0..p0.group.rank {
                        mat[i][j] = p0.endo.matrix[i][j].clone();
                    }
                }
                let off = p0.group.rank;
                for i in 0..p1.group.rank {
                    for j in 0..p1.group.rank {
                        mat[off + i][off + j] = p1.endo.matrix[i][j].clone();
                    }
                }
                let endo = GroupEndo::new(&group, mat).expect("block action preserves wedge");
                Pipe { group, endo, y: pad(&p0.y), eta: pad(&p0.eta).add(&shift(&p1.eta)) }
            })
        }
        Constructor::IndWedge(c0, q) => {
            let p = pipe_recursive(c0);
            let q = *q as usize;
            let (ind, endo) = p.group.induce(&p.endo, q);
            let n = p.group.rank;
            // relations y@i − y@{i+1} identify the copies of y
            let mut group = ind;
            for i in 0..q - 1 {
                let mut v = vec![BigInt::zero(); n * q];
                for (k, c) in p.y.coordinates.iter().enumerate() {
                    v[i * n + k] = c.clone();
                    v[(i + 1) * n + k] = -c.clone();
                }
                group = group.quotient_by_element(&GroupElement { coordinates: v });
            }
            let endo = GroupEndo::new(&group, endo.matrix.clone())
                .expect("induced action preserves the identification");
            let y = FinGenAbGroup::pad_element(&p.y, n * q);
            let mut eta = vec![BigInt::zero(); n * q];
            for i in 0..q {
                for (k, c) in p.eta.coordinates.iter().enumerate() {
                    eta[i * n + k] = c.clone();
                }
            }
            Pipe { group, endo, y, eta: GroupElement { coordinates: eta } }
        }
    }
}

// ---------------------------------------------------------------------
// type classification

/// Which of y, η, y+η is a norm (1+F)β in Π: exactly one must be, and the
/// index (0 for y, 1 for η, 2 for y+η) is the type τ.
pub fn classify_type(p: &Pipe) -> Result<u8, NeronError> {
    let n = p.group.rank;
    let mut one_plus_f = p.endo.as_mat();
    for i in 0..n {
        one_plus_f[(i, i)] += BigInt::one();
    }
    let rel_t = p.group.relation_matrix().transpose();
    let m = if rel_t.cols > 0 { one_plus_f.hstack(&rel_t) } else { one_plus_f };
    let is_norm = |g: &GroupElement| snf::solve(&m, &g.coordinates).is_some();
    let candidates = [p.y.clone(), p.eta.clone(), p.y.add(&p.eta)];
    let hits: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter(|(_, g)| is_norm(g))
        .map(|(i, _)| i)
        .collect();
    if hits.len() != 1 {
        return Err(NeronError::TrichotomyViolation(hits.len()));
    }
    Ok(hits[0] as u8)
}

// ---------------------------------------------------------------------
// driver

/// Néron component group of a simple tree from its triples.
fn simple_neron(t: &SimpleBYTree) -> Result<FinGenAbGroup, NeronError> {
    let m = mark_tree(t)?;
    let c = decompose(&m)?;
    if t.sign > 0 {
        let tr = positive_triple(&c);
        let modulus = if m.star_in_s { &tr.y } else { &tr.eta };
        Ok(tr.group.quotient_by_element(modulus))
    } else {
        let tr = negative_triple(&c);
        let half = if m.star_in_s { tr.tau == 0 } else { tr.tau == 1 };
        if half {
            Ok(tr.group.adjoin_fraction(&tr.alpha, &BigInt::from(2)))
        } else {
            Ok(tr.group)
        }
    }
}

/// Néron component group of a BY forest: reduce, mark, decompose, run the
/// triple recursions, recover, and sum. With `oracle_check`, the result is
/// compared against the lattice oracle.
pub fn neron_group(input: &BYForest, oracle_check: bool) -> Result<InvariantFactors, NeronError> {
    let mut total = FinGenAbGroup::trivial();
    for t in reduce(input)? {
        total = total.direct_sum(&simple_neron(&t)?);
    }
    let got = total.invariant_factors();
    if oracle_check {
        let expected = oracle::neron_oracle(input)
            .map_err(|e| NeronError::MalformedTree(e.to_string()))?;
        if got.0 != expected.0 {
            return Err(NeronError::OracleMismatch {
                got: got.to_string(),
                oracle: expected.to_string(),
            });
        }
    }
    Ok(got)
}

/// Fixed-subgroup orders of εF^k on the pipe, used to compare the two pipe
/// constructions and the triple recursions.
pub fn pipe_invariants(p: &Pipe) -> (InvariantFactors, InvariantFactors, InvariantFactors) {
    let quot_y = p.group.quotient_by_element(&p.y);
    let quot_eta = p.group.quotient_by_element(&p.eta);
    (
        p.group.invariant_factors(),
        quot_y.invariant_factors(),
        quot_eta.invariant_factors(),
    )
}

/// Positive-side cross-check: Πᶠ/η from the triple recursion must agree
/// with the F-fixed subgroup of the pipe's Π/η.
pub fn check_positive_against_pipe(m: &MarkedBYTree) -> Result<(), NeronError> {
    let c = decompose(m)?;
    let t = positive_triple(&c);
    let p = pipe(m, PipeMethod::Direct)?;
    for (tr_group, pipe_elem) in [(&t.y, &p.y), (&t.eta, &p.eta)] {
        let quot_t = t.group.quotient_by_element(tr_group);
        let quot_p = p.group.quotient_by_element(pipe_elem);
        let endo = GroupEndo::new(&quot_p, p.endo.matrix.clone())
            .map_err(|e| NeronError::MalformedTree(e.to_string()))?;
        let (fixed, _) = quot_p.fixed_subgroup(&endo);
        if quot_t.invariant_factors().0 != fixed.invariant_factors().0 {
            return Err(NeronError::OracleMismatch {
                got: quot_t.invariant_factors().to_string(),
                oracle: fixed.invariant_factors().to_string(),
            });
        }
    }
    Ok(())
}

/// Negative-side cross-check: the recovered group from negative_triple must
/// agree with the (−F)-fixed subgroup computation on the pipe, and the
/// recursive τ must agree with the direct norm classification.
pub fn check_negative_against_pipe(m: &MarkedBYTree) -> Result<(), NeronError> {
    let c = decompose(m)?;
    let t = negative_triple(&c);
    let p = pipe(m, PipeMethod::Direct)?;
    let tau = classify_type(&p)?;
    if tau != t.tau {
        return Err(NeronError::OracleMismatch {
            got: format!("tau {}", t.tau),
            oracle: format!("tau {tau}"),
        });
    }
    Ok(())
}

/// Orders of εF^k coincide between the two pipe constructions.
pub fn check_pipe_methods(m: &MarkedBYTree) -> Result<(), NeronError> {
    let a = pipe(m, PipeMethod::Direct)?;
    let b = pipe(m, PipeMethod::Recursive)?;
    let ia = pipe_invariants(&a);
    let ib = pipe_invariants(&b);
    if ia.0 .0 != ib.0 .0 || ia.1 .0 != ib.1 .0 || ia.2 .0 != ib.2 .0 {
        return Err(NeronError::OracleMismatch {
            got: format!("{} / {} / {}", ib.0, ib.1, ib.2),
            oracle: format!("{} / {} / {}", ia.0, ia.1, ia.2),
        });
    }
    for k in 1..=6u64 {
        let pa = endo_power(&a.endo, k);
        let pb = endo_power(&b.endo, k);
        let fa = a.group.fixed_subgroup(&pa).0.invariant_factors();
        let fb = b.group.fixed_subgroup(&pb).0.invariant_factors();
        if fa.0 != fb.0 {
            return Err(NeronError::OracleMismatch {
                got: fb.to_string(),
                oracle: fa.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::quad_fixture_const;

    fn quad_marked(a: u64, b: u64, c: u64, sign: i8) -> (SimpleBYTree, MarkedBYTree) {
        let p = quad_fixture_const(a, b, c, sign);
        let ts = reduce(&p).unwrap();
        assert_eq!(ts.len(), 1);
        let m = mark_tree(&ts[0]).unwrap();
        (ts[0].clone(), m)
    }

    #[test]
    fn quad_decomposition_shape() {
        let (_, m) = quad_marked(2, 3, 4, 1);
        assert_eq!(m.star, "center");
        let c = decompose(&m).unwrap();
        let Constructor::Wedge(items) = c else { panic!("expected wedge, got {c:?}") };
        assert_eq!(items.len(), 3);
        assert!(items
            .iter()
            .any(|i| matches!(i, Constructor::IndWedge(b, 2) if **b == Constructor::Base(2))));
        assert!(items.contains(&Constructor::Base(3)));
        assert!(items.contains(&Constructor::Base(4)));
    }

    #[test]
    fn quad_pipe_relation_matrix() {
        // the wedge [IndWedge(Base(a),2), Base(b), Base(c)] in constructor order
        let (a, b, c) = (2i64, 4, 6);
        let cons = Constructor::Wedge(vec![
            Constructor::IndWedge(Box::new(Constructor::Base(a as u64)), 2),
            Constructor::Base(b as u64),
            Constructor::Base(c as u64),
        ]);
        let t = positive_triple(&cons);
        assert_eq!(
            t.group.relation_matrix().to_rows(),
            IMat::from_i64(&[&[a, -2, 0, 0], &[0, 1, -b, 0], &[0, 1, 0, -c]]).to_rows()
        );
        // Πᶠ/η = C_hcf × C_{(a(b+c)+2bc)/hcf}
        let phi = t.group.quotient_by_element(&t.eta);
        let inv = phi.invariant_factors();
        let n = a * (b + c) + 2 * b * c;
        let h = num_integer::gcd(num_integer::gcd(a, b), c);
        assert_eq!(inv.0, vec![BigInt::from(h), BigInt::from(n / h)]);
    }

    #[test]
    fn positive_quad_neron_groups() {
        let p = quad_fixture_const(2, 2, 2, 1);
        let inv = neron_group(&p, true).unwrap();
        assert_eq!(inv.0, vec![BigInt::from(2), BigInt::from(8)]);
        for (a, b, c) in [(1, 2, 3), (4, 6, 2), (3, 3, 3), (5, 1, 2)] {
            let p = quad_fixture_const(a, b, c, 1);
            neron_group(&p, true).unwrap();
        }
    }

    #[test]
    fn negative_quad_three_cases() {
        // b,c even → C_a×C₂; one even → C_a; both odd → C_{2a}
        let inv = neron_group(&quad_fixture_const(3, 2, 4, -1), true).unwrap();
        assert_eq!(inv.0, vec![BigInt::from(6)]); // C₃×C₂ ≅ C₆
        let inv = neron_group(&quad_fixture_const(3, 2, 1, -1), true).unwrap();
        assert_eq!(inv.0, vec![BigInt::from(3)]);
        let inv = neron_group(&quad_fixture_const(3, 1, 1, -1), true).unwrap();
        assert_eq!(inv.0, vec![BigInt::from(6)]); // C_{2a}
        let inv = neron_group(&quad_fixture_const(4, 2, 2, -1), true).unwrap();
        assert_eq!(inv.0, vec![BigInt::from(2), BigInt::from(4)]); // C₄×C₂
    }

    #[test]
    fn base_triples() {
        let t = positive_triple(&Constructor::Base(5));
        assert!(t.group.quotient_by_element(&t.eta).is_trivial());
        assert_eq!(
            t.group.quotient_by_element(&t.y).invariant_factors().0,
            vec![BigInt::from(5)]
        );
        let n = negative_triple(&Constructor::Base(5));
        assert_eq!(n.tau, 2);
        let n = negative_triple(&Constructor::Base(4));
        assert_eq!(n.tau, 0);
        let n = negative_triple(&Constructor::IndWedge(Box::new(Constructor::Base(6)), 2));
        assert_eq!(n.tau, 1);
        assert_eq!(n.group.invariant_factors().0, vec![BigInt::from(6)]);
    }

    #[test]
    fn pipe_methods_agree_on_quads() {
        for sign in [1i8, -1] {
            for (a, b, c) in [(2, 3, 4), (2, 2, 2), (4, 1, 3)] {
                let (_, m) = quad_marked(a, b, c, sign);
                check_pipe_methods(&m).unwrap();
                check_positive_against_pipe(&m).unwrap();
                check_negative_against_pipe(&m).unwrap();
            }
        }
    }

    #[test]
    fn marked_when_no_fixed_vertex() {
        // single edge with trivial F: both endpoints are in S, so a
        // subdivision vertex gets marked
        let p = crate::forest::ForestBuilder::new()
            .s_vertex("a")
            .s_vertex("b")
            .edge_const("e", "a", "b", 4)
            .build();
        let ts = reduce(&p).unwrap();
        let m = mark_tree(&ts[0]).unwrap();
        assert!(!m.tree.s.vertices.contains(&m.star));
        let inv = neron_group(&p, true).unwrap();
        assert_eq!(inv.0, vec![BigInt::from(4)]);
    }
}
