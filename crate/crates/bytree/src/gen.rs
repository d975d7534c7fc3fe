//! Random instance generators for the property suites: BY forests
//! satisfying parity conditions (A) and (B), and finite abelian groups
//! with finite-order endomorphisms.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;

use crate::abelian::{FinGenAbGroup, GroupEndo};
use crate::forest::{
    BYForest, Edge, LengthForm, MetricForest, SignedAutomorphism, SubgraphS,
};

/// A small rooted tree template; instantiated once per copy of an F-orbit
/// so the copies are isomorphic by construction.
#[derive(Clone, Debug)]
struct Template {
    /// vertex name -> in S
    vertices: Vec<(String, bool)>,
    /// (edge name, parent vertex index, child vertex index, length)
    edges: Vec<(String, usize, usize, u64)>,
}

/// Random template: root plus one or two tiers of branches. Every leaf is
/// an S-vertex; every internal edge has even length so that the distances
/// between non-qualifying vertices stay even (parity condition (A)).
fn random_template<R: Rng>(rng: &mut R, budget: usize) -> Template {
    let mut t = Template { vertices: vec![("r".into(), false)], edges: Vec::new() };
    let children = rng.gen_range(1..=2.min(budget.max(1)));
    for i in 0..children {
        if rng.gen_bool(0.75) || budget < 3 {
            // S-leaf with an arbitrary twig length
            let vi = t.vertices.len();
            t.vertices.push((format!("l{i}"), true));
            t.edges.push((format!("e{i}"), 0, vi, rng.gen_range(1..=4)));
        } else {
            // even-length edge down to a sub-center with S-leaf children
            let vi = t.vertices.len();
            t.vertices.push((format!("m{i}"), false));
            t.edges.push((format!("e{i}"), 0, vi, 2 * rng.gen_range(1..=2)));
            for j in 0..rng.gen_range(1..=2) {
                let wi = t.vertices.len();
                t.vertices.push((format!("l{i}_{j}"), true));
                t.edges.push((format!("e{i}_{j}"), vi, wi, rng.gen_range(1..=4)));
            }
        }
    }
    t
}

struct Assembly {
    vertices: BTreeSet<String>,
    edges: BTreeMap<String, Edge>,
    s: BTreeSet<String>,
    vmap: BTreeMap<String, String>,
}

impl Assembly {
    fn new() -> Self {
        Assembly {
            vertices: BTreeSet::new(),
            edges: BTreeMap::new(),
            s: BTreeSet::new(),
            vmap: BTreeMap::new(),
        }
    }

    /// Instantiate q copies of a template, gluing each copy's root edge to
    /// `anchor` with the given length, with F cycling the copies. Copy i of
    /// template vertex v is named "{p}:{v}@{i}".
    fn attach_orbit<R: Rng>(
        &mut self,
        rng: &mut R,
        anchor: &str,
        p: &str,
        t: &Template,
        q: usize,
    ) {
        let name = |v: &str, i: usize| format!("{p}:{v}@{i}");
        let stem = 2 * rng.gen_range(1..=2); // even: anchors are deg >= 3
        let stem = if t.vertices.len() == 1 { rng.gen_range(1..=4) } else { stem };
        for i in 0..q {
            for (v, in_s) in &t.vertices {
                self.vertices.insert(name(v, i));
                if *in_s {
                    self.s.insert(name(v, i));
                }
                self.vmap.insert(name(v, i), name(v, (i + 1) % q));
            }
            for (e, pa, ch, l) in &t.edges {
                self.edges.insert(
                    format!("{p}:{e}@{i}"),
                    Edge {
                        ends: (name(&t.vertices[*pa].0, i), name(&t.vertices[*ch].0, i)),
                        length: LengthForm::constant(*l),
                    },
                );
            }
            self.edges.insert(
                format!("{p}:stem@{i}"),
                Edge {
                    ends: (anchor.to_string(), name("r", i)),
                    length: LengthForm::constant(stem),
                },
            );
        }
    }

    fn finish<R: Rng>(mut self, rng: &mut R) -> BYForest {
        let mut p = BYForest {
            forest: MetricForest {
                vertices: self.vertices.clone(),
                edges: std::mem::take(&mut self.edges),
            },
            s: SubgraphS { vertices: self.s.clone(), edges: BTreeSet::new() },
            aut: SignedAutomorphism { vertex_map: self.vmap.clone(), signs: BTreeMap::new() },
        };
        let mut signs = BTreeMap::new();
        for c in p.components_minus_s() {
            if !c.edges.is_empty() {
                signs.insert(c.rep(), if rng.gen_bool(0.5) { 1 } else { -1 });
            }
        }
        p.aut.signs = signs;
        p
    }
}

/// One attempt at a random tree; the caller rejects invalid results.
fn try_random_tree<R: Rng>(rng: &mut R, root: &str, a: &mut Assembly) {
    if rng.gen_bool(0.25) {
        // inverted construction: F swaps the two ends of a central edge of
        // even length (parity condition (B)) carrying mirror-image subtrees
        let (u, v) = (format!("{root}:u"), format!("{root}:v"));
        a.vertices.insert(u.clone());
        a.vertices.insert(v.clone());
        a.vmap.insert(u.clone(), v.clone());
        a.vmap.insert(v.clone(), u.clone());
        a.edges.insert(
            format!("{root}:axis"),
            Edge {
                ends: (u.clone(), v.clone()),
                length: LengthForm::constant(2 * rng.gen_range(1..=2)),
            },
        );
        // the mirrored subtrees are one orbit of size 2 anchored by a
        // template whose two stems land on u and v
        let t = random_template(rng, 3);
        let name = |w: &str, i: usize| format!("{root}:m:{w}@{i}");
        let stem = rng.gen_range(1..=4) * 2;
        for (i, anchor) in [(0usize, &u), (1usize, &v)] {
            for (w, in_s) in &t.vertices {
                a.vertices.insert(name(w, i));
                if *in_s {
                    a.s.insert(name(w, i));
                }
                a.vmap.insert(name(w, i), name(w, (i + 1) % 2));
            }
            for (e, pa, ch, l) in &t.edges {
                a.edges.insert(
                    format!("{root}:m:{e}@{i}"),
                    Edge {
                        ends: (name(&t.vertices[*pa].0, i), name(&t.vertices[*ch].0, i)),
                        length: LengthForm::constant(*l),
                    },
                );
            }
            a.edges.insert(
                format!("{root}:m:stem@{i}"),
                Edge {
                    ends: (anchor.clone(), name("r", i)),
                    length: LengthForm::constant(stem),
                },
            );
        }
        return;
    }
    let center = format!("{root}:c");
    a.vertices.insert(center.clone());
    a.vmap.insert(center.clone(), center.clone());
    if rng.gen_bool(0.3) {
        a.s.insert(center.clone());
    }
    let groups = rng.gen_range(1..=3);
    for g in 0..groups {
        let q = *[1, 1, 1, 2, 2, 3].get(rng.gen_range(0..6)).unwrap();
        let t = if rng.gen_bool(0.6) {
            Template { vertices: vec![("r".into(), true)], edges: Vec::new() }
        } else {
            random_template(rng, 4 / q)
        };
        a.attach_orbit(rng, &center, &format!("{root}:g{g}"), &t, q);
    }
}

/// A random BY forest with at most ~10 vertices and lengths <= 4,
/// satisfying parity conditions (A) and (B). Constructed symmetrically so
/// that F is an automorphism by design, then filtered by the core
/// validators (rejection sampling).
pub fn random_forest<R: Rng>(rng: &mut R, max_vertices: usize) -> BYForest {
    loop {
        let mut a = Assembly::new();
        let trees = if rng.gen_bool(0.2) { 2 } else { 1 };
        for t in 0..trees {
            try_random_tree(rng, &format!("t{t}"), &mut a);
        }
        let p = a.finish(rng);
        if p.forest.vertices.len() > max_vertices || p.s.vertices.is_empty() {
            continue;
        }
        if !p.validate().is_empty() {
            continue;
        }
        if !matches!(p.check_parity_a(), Ok(None)) {
            continue;
        }
        if !matches!(p.check_parity_b(), Ok(None)) {
            continue;
        }
        return p;
    }
}

/// A random finite abelian group with an endomorphism of finite order:
/// a direct sum of blocks (Z/d)^q on which sigma cyclically shifts the
/// copies, multiplying by a unit mod d on wrap-around.
pub fn random_group<R: Rng>(rng: &mut R) -> (FinGenAbGroup, GroupEndo) {
    loop {
        let blocks = rng.gen_range(1..=3);
        let mut moduli: Vec<BigInt> = Vec::new();
        let mut action: Vec<(usize, usize, BigInt)> = Vec::new(); // (from, to, unit)
        for _ in 0..blocks {
            let d: u64 = rng.gen_range(2..=12);
            let q = rng.gen_range(1..=3);
            let unit = loop {
                let u = rng.gen_range(1..d.max(2));
                if u.gcd(&d) == 1 {
                    break u;
                }
            };
            let base = moduli.len();
            for i in 0..q {
                moduli.push(BigInt::from(d));
                let u = if i + 1 == q { BigInt::from(unit) } else { BigInt::one() };
                action.push((base + i, base + (i + 1) % q, u));
            }
        }
        let n = moduli.len();
        if n > 6 {
            continue;
        }
        let relations: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let mut row = vec![BigInt::zero(); n];
                row[i] = moduli[i].clone();
                row
            })
            .collect();
        let g = FinGenAbGroup::new(n, relations);
        let mut mat = vec![vec![BigInt::zero(); n]; n];
        for (from, to, u) in action {
            mat[to][from] = u;
        }
        let sigma = GroupEndo::new(&g, mat).expect("block shift preserves relations");
        if g.endo_order(&sigma, 64).is_ok() {
            return (g, sigma);
        }
    }
}

/// A random divisor-closed subset of the divisors of n!-like smooth
/// numbers: closed under taking divisors, as required by the cyclotomic
/// kernel identities.
pub fn random_divisor_closed<R: Rng>(rng: &mut R, max: u64) -> Vec<u64> {
    let mut s = BTreeSet::new();
    for _ in 0..rng.gen_range(1..=3) {
        let k = rng.gen_range(1..=max);
        for d in crate::abelian::divisors(k) {
            s.insert(d);
        }
    }
    s.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_forests_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = random_forest(&mut rng, 10);
            assert!(p.validate().is_empty());
            assert!(matches!(p.check_parity_a(), Ok(None)));
            assert!(matches!(p.check_parity_b(), Ok(None)));
            assert!(p.forest.vertices.len() <= 10);
        }
    }

    #[test]
    fn random_groups_are_finite_with_finite_order_endo() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (g, sigma) = random_group(&mut rng);
            assert!(g.order().is_some());
            assert!(g.endo_order(&sigma, 64).is_ok());
        }
    }

    #[test]
    fn divisor_closed_sets_are_divisor_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let s = random_divisor_closed(&mut rng, 8);
            for &k in &s {
                for d in crate::abelian::divisors(k) {
                    assert!(s.contains(&d), "{s:?} missing divisor {d} of {k}");
                }
            }
        }
    }
}
