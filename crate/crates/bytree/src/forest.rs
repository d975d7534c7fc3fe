//! Data model for signed metric forests: a metric forest T, a subgraph S,
//! and a signed automorphism (F together with a sign per connected component
//! of the complement of S), plus the structural transformations: validation,
//! parity checks, subdivision, convex hull of S, base-change scaling and
//! powering, and sign normalization.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use thiserror::Error;

pub type VertexId = String;
pub type EdgeId = String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    Unknown,
}

impl Parity {
    fn add(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Unknown, _) | (_, Parity::Unknown) => Parity::Unknown,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

/// A linear form c + sum of coeff * var with non-negative integer
/// coefficients; each variable carries a declared parity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthForm {
    pub constant: u64,
    /// variable name -> (coefficient, declared parity)
    pub terms: BTreeMap<String, (u64, Parity)>,
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("length is symbolic where a concrete integer is required")]
    SymbolicLength,
    #[error("parity of variable '{0}' is required but undetermined")]
    UndeterminedParity(String),
    #[error("parity condition ({0}) is violated: {1}")]
    ParityViolation(char, String),
    #[error("S is empty")]
    EmptyS,
    #[error("invalid forest: {0}")]
    Invalid(String),
    #[error("no F-fixed vertex outside S exists after subdivision")]
    NoFixedVertex,
    #[error("quotient by the involution is not a forest (cycle through {0})")]
    QuotientNotForest(String),
    #[error("non-integral length on edge {0}")]
    NonIntegralLength(String),
}

impl LengthForm {
    pub fn constant(c: u64) -> Self {
        LengthForm { constant: c, terms: BTreeMap::new() }
    }

    pub fn variable(name: &str, parity: Parity) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), (1, parity));
        LengthForm { constant: 0, terms }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.values().all(|&(c, _)| c == 0)
    }

    pub fn as_constant(&self) -> Option<u64> {
        if self.is_constant() {
            Some(self.constant)
        } else {
            None
        }
    }

    pub fn is_positive(&self) -> bool {
        self.constant > 0 || self.terms.values().any(|&(c, _)| c > 0)
    }

    pub fn add(&self, other: &LengthForm) -> LengthForm {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, &(c, p)) in &other.terms {
            let e = out.terms.entry(v.clone()).or_insert((0, p));
            e.0 += c;
        }
        out
    }

    pub fn scale(&self, k: u64) -> LengthForm {
        LengthForm {
            constant: self.constant * k,
            terms: self.terms.iter().map(|(v, &(c, p))| (v.clone(), (c * k, p))).collect(),
        }
    }

    /// Parity of the value of the form, given the declared variable parities.
    pub fn parity(&self) -> Parity {
        let mut p = if self.constant % 2 == 0 { Parity::Even } else { Parity::Odd };
        for &(c, vp) in self.terms.values() {
            if c % 2 == 1 {
                p = p.add(vp);
            }
        }
        p
    }

    /// The variable (if any) whose unknown parity blocks a parity decision.
    pub fn blocking_variable(&self) -> Option<String> {
        self.terms
            .iter()
            .find(|(_, &(c, p))| c % 2 == 1 && p == Parity::Unknown)
            .map(|(v, _)| v.clone())
    }

    pub fn eval(&self, values: &BTreeMap<String, u64>) -> Result<u64, CoreError> {
        let mut total = self.constant;
        for (v, &(c, _)) in &self.terms {
            if c == 0 {
                continue;
            }
            let val = values
                .get(v)
                .ok_or_else(|| CoreError::Invalid(format!("no value for variable '{v}'")))?;
            total += c * val;
        }
        Ok(total)
    }

    /// Substitute concrete values for all variables, producing a constant form.
    pub fn substitute(&self, values: &BTreeMap<String, u64>) -> Result<LengthForm, CoreError> {
        Ok(LengthForm::constant(self.eval(values)?))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms.iter().filter(|(_, &(c, _))| c > 0).map(|(v, _)| v.clone()).collect()
    }
}

impl std::fmt::Display for LengthForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        for (v, &(c, _)) in &self.terms {
            if c == 1 {
                parts.push(v.clone());
            } else if c > 1 {
                parts.push(format!("{c}*{v}"));
            }
        }
        if self.constant > 0 || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        write!(f, "{}", parts.join("+"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub ends: (VertexId, VertexId),
    pub length: LengthForm,
}

#[derive(Clone, Debug, Default)]
pub struct MetricForest {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeMap<EdgeId, Edge>,
}

#[derive(Clone, Debug, Default)]
pub struct SubgraphS {
    pub vertices: BTreeSet<VertexId>,
    pub edges: BTreeSet<EdgeId>,
}

/// One connected component of the topological complement of S in T.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct YellowComponent {
    pub edges: BTreeSet<EdgeId>,
    /// Interior (non-S) vertices of the component; S-vertices on its
    /// boundary are not included.
    pub vertices: BTreeSet<VertexId>,
}

impl YellowComponent {
    /// Deterministic representative: smallest edge id, or smallest interior
    /// vertex id for edgeless components.
    pub fn rep(&self) -> String {
        self.edges
            .iter()
            .next()
            .cloned()
            .unwrap_or_else(|| self.vertices.iter().next().cloned().unwrap())
    }
}

#[derive(Clone, Debug, Default)]
pub struct SignedAutomorphism {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    /// Sign per yellow component, keyed by the component representative.
    pub signs: BTreeMap<String, i8>,
}

#[derive(Clone, Debug)]
pub struct BYForest {
    pub forest: MetricForest,
    pub s: SubgraphS,
    pub aut: SignedAutomorphism,
}

impl MetricForest {
    pub fn degree(&self, v: &str) -> usize {
        self.edges.values().filter(|e| e.ends.0 == v || e.ends.1 == v).count()
    }

    pub fn incident_edges(&self, v: &str) -> Vec<EdgeId> {
        self.edges
            .iter()
            .filter(|(_, e)| e.ends.0 == v || e.ends.1 == v)
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn neighbor(&self, eid: &str, v: &str) -> VertexId {
        let e = &self.edges[eid];
        if e.ends.0 == v {
            e.ends.1.clone()
        } else {
            e.ends.0.clone()
        }
    }

    /// Connected components as vertex sets.
    pub fn tree_components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut out = Vec::new();
        for v in &self.vertices {
            if seen.contains(v) {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([v.clone()]);
            while let Some(u) = queue.pop_front() {
                if !comp.insert(u.clone()) {
                    continue;
                }
                for eid in self.incident_edges(&u) {
                    let w = self.neighbor(&eid, &u);
                    if !comp.contains(&w) {
                        queue.push_back(w);
                    }
                }
            }
            seen.extend(comp.iter().cloned());
            out.push(comp);
        }
        out
    }

    /// Unique path between two vertices, as (edge id, +1 if traversed in
    /// stored orientation) pairs; `None` if in different components.
    pub fn path_between(&self, from: &str, to: &str) -> Option<Vec<(EdgeId, i8)>> {
        if from == to {
            return Some(vec![]);
        }
        let mut parent: BTreeMap<VertexId, (VertexId, EdgeId)> = BTreeMap::new();
        let mut queue = VecDeque::from([from.to_string()]);
        let mut seen = BTreeSet::from([from.to_string()]);
        while let Some(u) = queue.pop_front() {
            for eid in self.incident_edges(&u) {
                let w = self.neighbor(&eid, &u);
                if seen.insert(w.clone()) {
                    parent.insert(w.clone(), (u.clone(), eid.clone()));
                    if w == to {
                        queue.clear();
                        break;
                    }
                    queue.push_back(w);
                }
            }
        }
        if !parent.contains_key(to) {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = to.to_string();
        while cur != from {
            let (prev, eid) = parent[&cur].clone();
            let orient = if self.edges[&eid].ends.1 == cur { 1 } else { -1 };
            path.push((eid, orient));
            cur = prev;
        }
        path.reverse();
        Some(path)
    }

    pub fn is_forest(&self) -> bool {
        // Acyclic iff every component has exactly (vertices - 1) edges and
        // no self-loops/parallel edges.
        for e in self.edges.values() {
            if e.ends.0 == e.ends.1 {
                return false;
            }
        }
        let mut pairs = BTreeSet::new();
        for e in self.edges.values() {
            let key = if e.ends.0 < e.ends.1 {
                (e.ends.0.clone(), e.ends.1.clone())
            } else {
                (e.ends.1.clone(), e.ends.0.clone())
            };
            if !pairs.insert(key) {
                return false;
            }
        }
        let comps = self.tree_components();
        let total_edges = self.edges.len();
        let expected: usize = comps.iter().map(|c| c.len() - 1).sum();
        total_edges == expected
    }
}

/// A yellow component together with its sign.
#[derive(Clone, Debug)]
pub struct SignedComponent {
    pub component: YellowComponent,
    pub sign: i8,
}

impl BYForest {
    // ------------------------------------------------------------------
    // basic structure

    /// The edge mapping induced by the vertex map: edge id -> (image edge
    /// id, +1 if the stored orientations correspond, -1 if reversed).
    pub fn edge_map(&self) -> Result<BTreeMap<EdgeId, (EdgeId, i8)>, CoreError> {
        let mut by_ends: BTreeMap<(VertexId, VertexId), EdgeId> = BTreeMap::new();
        for (id, e) in &self.forest.edges {
            let key = if e.ends.0 < e.ends.1 {
                (e.ends.0.clone(), e.ends.1.clone())
            } else {
                (e.ends.1.clone(), e.ends.0.clone())
            };
            by_ends.insert(key, id.clone());
        }
        let mut out = BTreeMap::new();
        for (id, e) in &self.forest.edges {
            let fu = self
                .aut
                .vertex_map
                .get(&e.ends.0)
                .ok_or_else(|| CoreError::Invalid(format!("F undefined on vertex {}", e.ends.0)))?
                .clone();
            let fv = self
                .aut
                .vertex_map
                .get(&e.ends.1)
                .ok_or_else(|| CoreError::Invalid(format!("F undefined on vertex {}", e.ends.1)))?
                .clone();
            let key = if fu < fv { (fu.clone(), fv.clone()) } else { (fv.clone(), fu.clone()) };
            let img = by_ends
                .get(&key)
                .ok_or_else(|| {
                    CoreError::Invalid(format!("F does not map edge {id} to an edge"))
                })?
                .clone();
            let orient = if self.forest.edges[&img].ends.0 == fu { 1 } else { -1 };
            out.insert(id.clone(), (img, orient));
        }
        Ok(out)
    }

    /// Order of the vertex permutation F.
    pub fn f_order(&self) -> u64 {
        let mut order = 1u64;
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        for v in &self.forest.vertices {
            if seen.contains(v) {
                continue;
            }
            let mut len = 0u64;
            let mut cur = v.clone();
            loop {
                seen.insert(cur.clone());
                cur = self.aut.vertex_map[&cur].clone();
                len += 1;
                if &cur == v {
                    break;
                }
            }
            order = num_integer::lcm(order, len);
        }
        order
    }

    pub fn apply_f(&self, v: &str) -> VertexId {
        self.aut.vertex_map[v].clone()
    }

    pub fn apply_f_power(&self, v: &str, k: u64) -> VertexId {
        let mut cur = v.to_string();
        for _ in 0..k {
            cur = self.apply_f(&cur);
        }
        cur
    }

    /// The vertex map of F^k.
    pub fn vertex_map_power(&self, k: u64) -> BTreeMap<VertexId, VertexId> {
        self.forest
            .vertices
            .iter()
            .map(|v| (v.clone(), self.apply_f_power(v, k)))
            .collect()
    }

    // ------------------------------------------------------------------
    // yellow components and signs

    pub fn components_minus_s(&self) -> Vec<YellowComponent> {
        // Union non-S edges through non-S vertices; isolated non-S vertices
        // (no incident non-S edge) form their own edgeless components.
        let mut comps: Vec<YellowComponent> = Vec::new();
        let mut edge_seen: BTreeSet<EdgeId> = BTreeSet::new();
        let mut vertex_claimed: BTreeSet<VertexId> = BTreeSet::new();
        for (eid, _) in self.forest.edges.iter() {
            if self.s.edges.contains(eid) || edge_seen.contains(eid) {
                continue;
            }
            let mut edges = BTreeSet::new();
            let mut interior = BTreeSet::new();
            let mut queue = VecDeque::from([eid.clone()]);
            while let Some(cur) = queue.pop_front() {
                if !edges.insert(cur.clone()) {
                    continue;
                }
                edge_seen.insert(cur.clone());
                let e = &self.forest.edges[&cur];
                for v in [&e.ends.0, &e.ends.1] {
                    if self.s.vertices.contains(v.as_str()) {
                        continue;
                    }
                    interior.insert(v.clone());
                    for next in self.forest.incident_edges(v) {
                        if !self.s.edges.contains(&next) && !edges.contains(&next) {
                            queue.push_back(next);
                        }
                    }
                }
            }
            vertex_claimed.extend(interior.iter().cloned());
            comps.push(YellowComponent { edges, vertices: interior });
        }
        for v in &self.forest.vertices {
            if !self.s.vertices.contains(v) && !vertex_claimed.contains(v) {
                comps.push(YellowComponent {
                    edges: BTreeSet::new(),
                    vertices: BTreeSet::from([v.clone()]),
                });
            }
        }
        comps.sort_by_key(|c| (c.edges.is_empty(), c.rep()));
        comps
    }

    pub fn signed_components(&self) -> Result<Vec<SignedComponent>, CoreError> {
        self.components_minus_s()
            .into_iter()
            .map(|component| {
                let rep = component.rep();
                // Edgeless components default to +1 (provably irrelevant).
                let sign = if component.edges.is_empty() {
                    *self.aut.signs.get(&rep).unwrap_or(&1)
                } else {
                    *self
                        .aut
                        .signs
                        .get(&rep)
                        .ok_or_else(|| CoreError::Invalid(format!("missing sign for component {rep}")))?
                };
                Ok(SignedComponent { component, sign })
            })
            .collect()
    }

    /// Index of the component containing a given non-S edge.
    pub fn component_of_edge<'a>(
        comps: &'a [SignedComponent],
        eid: &str,
    ) -> Option<&'a SignedComponent> {
        comps.iter().find(|c| c.component.edges.contains(eid))
    }

    /// The image component index under F, for each component index.
    pub fn component_permutation(&self, comps: &[SignedComponent]) -> Result<Vec<usize>, CoreError> {
        let emap = self.edge_map()?;
        let mut out = Vec::with_capacity(comps.len());
        for c in comps {
            let target = if let Some(e) = c.component.edges.iter().next() {
                let (img, _) = &emap[e];
                comps
                    .iter()
                    .position(|d| d.component.edges.contains(img))
                    .ok_or_else(|| CoreError::Invalid("F image edge not in any component".into()))?
            } else {
                let v = c.component.vertices.iter().next().unwrap();
                let fv = self.apply_f(v);
                comps
                    .iter()
                    .position(|d| d.component.vertices.contains(&fv))
                    .ok_or_else(|| CoreError::Invalid("F image vertex not in any component".into()))?
            };
            out.push(target);
        }
        Ok(out)
    }

    // ------------------------------------------------------------------
    // validation

    pub fn validate(&self) -> Vec<String> {
        let mut diags = Vec::new();
        for (id, e) in &self.forest.edges {
            for v in [&e.ends.0, &e.ends.1] {
                if !self.forest.vertices.contains(v.as_str()) {
                    diags.push(format!("edge {id} has unknown endpoint {v}"));
                }
            }
            if !e.length.is_positive() {
                diags.push(format!("edge {id} has non-positive length"));
            }
        }
        if !self.forest.is_forest() {
            diags.push("underlying graph is not a forest (cycle, loop, or parallel edge)".into());
        }
        for v in &self.s.vertices {
            if !self.forest.vertices.contains(v) {
                diags.push(format!("S-vertex {v} is not a vertex of the forest"));
            }
        }
        for eid in &self.s.edges {
            match self.forest.edges.get(eid) {
                None => diags.push(format!("S-edge {eid} is not an edge of the forest")),
                Some(e) => {
                    if !self.s.vertices.contains(&e.ends.0) || !self.s.vertices.contains(&e.ends.1)
                    {
                        diags.push(format!("S-edge {eid} has an endpoint outside S"));
                    }
                }
            }
        }
        // Variable parities must be declared consistently across edges.
        let mut parities: BTreeMap<String, Parity> = BTreeMap::new();
        for (id, e) in &self.forest.edges {
            for (v, &(_, p)) in &e.length.terms {
                match parities.get(v) {
                    None => {
                        parities.insert(v.clone(), p);
                    }
                    Some(&q) if q != p => {
                        diags.push(format!("variable {v} has conflicting parities (edge {id})"));
                    }
                    _ => {}
                }
            }
        }
        // F must be a permutation of vertices.
        let mut image = BTreeSet::new();
        for v in &self.forest.vertices {
            match self.aut.vertex_map.get(v) {
                None => diags.push(format!("F is undefined on vertex {v}")),
                Some(fv) => {
                    if !self.forest.vertices.contains(fv) {
                        diags.push(format!("F maps {v} outside the vertex set"));
                    }
                    if !image.insert(fv.clone()) {
                        diags.push(format!("F is not injective at {fv}"));
                    }
                }
            }
        }
        if !diags.is_empty() {
            return diags;
        }
        // F maps edges to edges preserving lengths, and S to S.
        match self.edge_map() {
            Err(e) => diags.push(e.to_string()),
            Ok(emap) => {
                for (id, (img, _)) in &emap {
                    if self.forest.edges[id].length != self.forest.edges[img].length {
                        diags.push(format!("F maps edge {id} to edge {img} of different length"));
                    }
                    if self.s.edges.contains(id) != self.s.edges.contains(img) {
                        diags.push(format!("F does not preserve S-edges at {id}"));
                    }
                }
            }
        }
        for v in &self.s.vertices {
            if !self.s.vertices.contains(&self.apply_f(v)) {
                diags.push(format!("F does not preserve S-vertices at {v}"));
            }
        }
        // Exactly one sign per edged yellow component, keyed by an edge of
        // that component (canonically its representative).
        let comps = self.components_minus_s();
        for c in &comps {
            if c.edges.is_empty() {
                continue;
            }
            let named: Vec<&String> =
                self.aut.signs.keys().filter(|k| c.edges.contains(*k)).collect();
            match named.len() {
                0 => diags.push(format!("missing sign for component {}", c.rep())),
                1 => {}
                _ => diags.push(format!("multiple signs given for component {}", c.rep())),
            }
        }
        for (key, sign) in &self.aut.signs {
            if *sign != 1 && *sign != -1 {
                diags.push(format!("sign for {key} must be +1 or -1"));
            }
            let in_edges = comps.iter().any(|c| c.edges.contains(key));
            let is_vertex_rep =
                comps.iter().any(|c| c.edges.is_empty() && c.vertices.contains(key));
            if !in_edges && !is_vertex_rep {
                diags.push(format!("sign key {key} does not name a yellow component"));
            }
        }
        diags
    }

    pub fn require_valid(&self) -> Result<(), CoreError> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Invalid(d.join("; ")))
        }
    }

    /// Canonicalize the sign map to be keyed by component representatives.
    pub fn canonicalize_signs(&mut self) -> Result<(), CoreError> {
        let comps = self.components_minus_s();
        let mut signs = BTreeMap::new();
        for c in &comps {
            if c.edges.is_empty() {
                continue;
            }
            let named: Vec<i8> = self
                .aut
                .signs
                .iter()
                .filter(|(k, _)| c.edges.contains(*k))
                .map(|(_, &s)| s)
                .collect();
            if named.len() != 1 {
                return Err(CoreError::Invalid(format!(
                    "component {} must carry exactly one sign",
                    c.rep()
                )));
            }
            signs.insert(c.rep(), named[0]);
        }
        self.aut.signs = signs;
        Ok(())
    }

    // ------------------------------------------------------------------
    // parity conditions

    fn has_concrete_lengths(&self) -> bool {
        self.forest.edges.values().all(|e| e.length.is_constant())
    }

    /// Distance between two vertices in the same tree, as a length form.
    pub fn distance_form(&self, u: &str, v: &str) -> Option<LengthForm> {
        let path = self.forest.path_between(u, v)?;
        let mut total = LengthForm::constant(0);
        for (eid, _) in &path {
            total = total.add(&self.forest.edges[eid].length);
        }
        Some(total)
    }

    fn vertex_qualifies_for_parity_a(&self, v: &str) -> bool {
        let inc = self.forest.incident_edges(v);
        let in_s = self.s.vertices.contains(v);
        match inc.len() {
            1 => in_s && !self.s.edges.contains(&inc[0]),
            2 => !in_s || (self.s.edges.contains(&inc[0]) && self.s.edges.contains(&inc[1])),
            _ => false,
        }
    }

    /// Parity condition (A): any two vertices an odd distance apart must
    /// include one vertex of the qualifying trichotomy (S-leaf with non-S
    /// edge, degree-2 vertex outside S, or degree-2 vertex interior to S).
    pub fn check_parity_a(&self) -> Result<Option<(VertexId, VertexId)>, CoreError> {
        let vs: Vec<&VertexId> = self.forest.vertices.iter().collect();
        for i in 0..vs.len() {
            for j in (i + 1)..vs.len() {
                if self.vertex_qualifies_for_parity_a(vs[i])
                    || self.vertex_qualifies_for_parity_a(vs[j])
                {
                    continue;
                }
                let Some(d) = self.distance_form(vs[i], vs[j]) else { continue };
                match d.parity() {
                    Parity::Even => {}
                    Parity::Odd => return Ok(Some((vs[i].clone(), vs[j].clone()))),
                    Parity::Unknown => {
                        return Err(CoreError::UndeterminedParity(
                            d.blocking_variable().unwrap_or_default(),
                        ))
                    }
                }
            }
        }
        Ok(None)
    }

    /// Parity condition (B): no iterate of F inverts an odd-length edge.
    /// Returns a witness (edge, iterate) on failure.
    pub fn check_parity_b(&self) -> Result<Option<(EdgeId, u64)>, CoreError> {
        let n = self.f_order();
        let emap = self.edge_map()?;
        for k in 1..=n {
            for (eid, e) in &self.forest.edges {
                // follow the edge through k applications of F
                let mut cur = eid.clone();
                for _ in 0..k {
                    cur = emap[&cur].0.clone();
                }
                if &cur == eid {
                    let u_img = self.apply_f_power(&e.ends.0, k);
                    if u_img == e.ends.1 {
                        match e.length.parity() {
                            Parity::Even => {}
                            Parity::Odd => return Ok(Some((eid.clone(), k))),
                            Parity::Unknown => {
                                return Err(CoreError::UndeterminedParity(
                                    e.length.blocking_variable().unwrap_or_default(),
                                ))
                            }
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// The (B') reformulation on concrete-length inputs: in the unit
    /// subdivision, every iterate of F stabilizing a tree component fixes a
    /// vertex of that component.
    pub fn check_parity_b_prime(&self) -> Result<bool, CoreError> {
        let sub = self.subdivide()?;
        let n = sub.f_order();
        let comps = sub.forest.tree_components();
        for comp in &comps {
            for k in 1..=n {
                let stable = comp.iter().all(|v| comp.contains(&sub.apply_f_power(v, k)));
                if stable && !comp.iter().any(|v| &sub.apply_f_power(v, k) == v) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    // ------------------------------------------------------------------
    // subdivision

    /// Replace every edge of concrete length l by a chain of l unit edges.
    pub fn subdivide(&self) -> Result<BYForest, CoreError> {
        if !self.has_concrete_lengths() {
            return Err(CoreError::SymbolicLength);
        }
        let mut vertices = self.forest.vertices.clone();
        let mut edges: BTreeMap<EdgeId, Edge> = BTreeMap::new();
        let mut s = SubgraphS { vertices: self.s.vertices.clone(), edges: BTreeSet::new() };
        // parent[new edge] = old edge
        let mut parent: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
        // chain vertices per old edge, indexed 1..l-1
        let mut chain: BTreeMap<EdgeId, Vec<VertexId>> = BTreeMap::new();
        for (eid, e) in &self.forest.edges {
            let l = e.length.as_constant().unwrap();
            assert!(l >= 1);
            let mut pts = vec![e.ends.0.clone()];
            for i in 1..l {
                let v = format!("{eid}#{i}");
                vertices.insert(v.clone());
                if self.s.edges.contains(eid) {
                    s.vertices.insert(v.clone());
                }
                pts.push(v);
            }
            pts.push(e.ends.1.clone());
            chain.insert(eid.clone(), pts[1..pts.len() - 1].to_vec());
            for i in 0..l as usize {
                let nid = if l == 1 { eid.clone() } else { format!("{eid}#e{}", i + 1) };
                edges.insert(
                    nid.clone(),
                    Edge {
                        ends: (pts[i].clone(), pts[i + 1].clone()),
                        length: LengthForm::constant(1),
                    },
                );
                if self.s.edges.contains(eid) {
                    s.edges.insert(nid.clone());
                }
                parent.insert(nid, eid.clone());
            }
        }
        // vertex map: originals as before; chain vertex i of e maps to chain
        // vertex i (or l - i if orientation reverses) of F(e).
        let emap = self.edge_map()?;
        let mut vertex_map: BTreeMap<VertexId, VertexId> = self.aut.vertex_map.clone();
        for (eid, pts) in &chain {
            let (img, orient) = &emap[eid];
            let img_pts = &chain[img];
            for (i, v) in pts.iter().enumerate() {
                let target = if *orient == 1 {
                    img_pts[i].clone()
                } else {
                    img_pts[img_pts.len() - 1 - i].clone()
                };
                vertex_map.insert(v.clone(), target);
            }
        }
        let mut out = BYForest {
            forest: MetricForest { vertices, edges },
            s,
            aut: SignedAutomorphism { vertex_map, signs: BTreeMap::new() },
        };
        out.aut.signs = self.transfer_signs(&out, &parent)?;
        Ok(out)
    }

    /// Assign signs to the components of `new`, where `parent` maps each new
    /// edge to the old edge it came from; each new component inherits the
    /// sign of the old component containing its parent edges.
    fn transfer_signs(
        &self,
        new: &BYForest,
        parent: &BTreeMap<EdgeId, EdgeId>,
    ) -> Result<BTreeMap<String, i8>, CoreError> {
        let old_comps = self.signed_components()?;
        let mut signs = BTreeMap::new();
        for c in new.components_minus_s() {
            let Some(e) = c.edges.iter().next() else { continue };
            let old_edge = parent
                .get(e)
                .ok_or_else(|| CoreError::Invalid(format!("no parent for edge {e}")))?;
            let old = BYForest::component_of_edge(&old_comps, old_edge)
                .ok_or_else(|| CoreError::Invalid("parent edge not yellow".into()))?;
            signs.insert(c.rep(), old.sign);
        }
        Ok(signs)
    }

    // ------------------------------------------------------------------
    // convex hull of S

    /// The union of all paths between S-vertices, with induced S and signs.
    pub fn convex_hull_of_s(&self) -> Result<BYForest, CoreError> {
        if self.s.vertices.is_empty() {
            return Err(CoreError::EmptyS);
        }
        let mut keep: BTreeSet<VertexId> = self.forest.vertices.clone();
        let mut kept_edges: BTreeMap<EdgeId, Edge> = self.forest.edges.clone();
        loop {
            let mut removed = false;
            let leaves: Vec<VertexId> = keep
                .iter()
                .filter(|v| {
                    !self.s.vertices.contains(*v)
                        && kept_edges.values().filter(|e| &e.ends.0 == *v || &e.ends.1 == *v).count()
                            <= 1
                })
                .cloned()
                .collect();
            for v in leaves {
                keep.remove(&v);
                kept_edges.retain(|_, e| e.ends.0 != v && e.ends.1 != v);
                removed = true;
            }
            if !removed {
                break;
            }
        }
        let parent: BTreeMap<EdgeId, EdgeId> =
            kept_edges.keys().map(|e| (e.clone(), e.clone())).collect();
        let mut out = BYForest {
            forest: MetricForest { vertices: keep.clone(), edges: kept_edges },
            s: SubgraphS {
                vertices: self.s.vertices.intersection(&keep).cloned().collect(),
                edges: self
                    .s
                    .edges
                    .iter()
                    .filter(|e| self.forest.edges.contains_key(*e))
                    .cloned()
                    .collect(),
            },
            aut: SignedAutomorphism {
                vertex_map: self
                    .aut
                    .vertex_map
                    .iter()
                    .filter(|(v, _)| keep.contains(*v))
                    .map(|(v, w)| (v.clone(), w.clone()))
                    .collect(),
                signs: BTreeMap::new(),
            },
        };
        out.s.edges.retain(|e| out.forest.edges.contains_key(e));
        out.aut.signs = self.transfer_signs(&out, &parent)?;
        Ok(out)
    }

    // ------------------------------------------------------------------
    // base change

    /// Scale all lengths by e and replace the automorphism by its f-fold
    /// composite, with signs composed along F-orbits of components.
    pub fn scale_and_power(&self, e: u64, f: u64) -> Result<BYForest, CoreError> {
        assert!(e >= 1 && f >= 1);
        let comps = self.signed_components()?;
        let perm = self.component_permutation(&comps)?;
        let mut signs = BTreeMap::new();
        for (i, c) in comps.iter().enumerate() {
            if c.component.edges.is_empty() {
                continue;
            }
            let mut sign = 1i8;
            let mut cur = i;
            for _ in 0..f {
                sign *= comps[cur].sign;
                cur = perm[cur];
            }
            signs.insert(c.component.rep(), sign);
        }
        Ok(BYForest {
            forest: MetricForest {
                vertices: self.forest.vertices.clone(),
                edges: self
                    .forest
                    .edges
                    .iter()
                    .map(|(id, edge)| {
                        (
                            id.clone(),
                            Edge { ends: edge.ends.clone(), length: edge.length.scale(e) },
                        )
                    })
                    .collect(),
            },
            s: self.s.clone(),
            aut: SignedAutomorphism { vertex_map: self.vertex_map_power(f), signs },
        })
    }

    /// Push all signs in each F-orbit of components onto the orbit
    /// representative (the orbit's sign product); all others become +1.
    pub fn normalize_signs(&self) -> Result<BYForest, CoreError> {
        let comps = self.signed_components()?;
        let perm = self.component_permutation(&comps)?;
        let mut signs = BTreeMap::new();
        let mut seen = vec![false; comps.len()];
        for i in 0..comps.len() {
            if seen[i] || comps[i].component.edges.is_empty() {
                continue;
            }
            let mut orbit = vec![i];
            seen[i] = true;
            let mut cur = perm[i];
            while cur != i {
                seen[cur] = true;
                orbit.push(cur);
                cur = perm[cur];
            }
            let product: i8 = orbit.iter().map(|&j| comps[j].sign).product();
            let rep = orbit
                .iter()
                .map(|&j| comps[j].component.rep())
                .min()
                .unwrap();
            for &j in &orbit {
                let r = comps[j].component.rep();
                signs.insert(r.clone(), if r == rep { product } else { 1 });
            }
        }
        let mut out = self.clone();
        out.aut.signs = signs;
        Ok(out)
    }

    /// Substitute concrete values for every variable.
    pub fn substitute(&self, values: &BTreeMap<String, u64>) -> Result<BYForest, CoreError> {
        let mut out = self.clone();
        for e in out.forest.edges.values_mut() {
            e.length = e.length.substitute(values)?;
        }
        Ok(out)
    }

    /// Declare the parity of a variable in every edge length.
    pub fn declare_parity(&self, var: &str, parity: Parity) -> BYForest {
        let mut out = self.clone();
        for e in out.forest.edges.values_mut() {
            if let Some(t) = e.length.terms.get_mut(var) {
                t.1 = parity;
            }
        }
        out
    }

    /// All variables appearing in edge lengths, with declared parities.
    pub fn variables(&self) -> BTreeMap<String, Parity> {
        let mut out = BTreeMap::new();
        for e in self.forest.edges.values() {
            for (v, &(c, p)) in &e.length.terms {
                if c > 0 {
                    out.entry(v.clone()).or_insert(p);
                }
            }
        }
        out
    }
}

/// Convenience builder for tests and fixtures.
pub struct ForestBuilder {
    forest: MetricForest,
    s: SubgraphS,
    vertex_map: BTreeMap<VertexId, VertexId>,
    signs: BTreeMap<String, i8>,
}

impl ForestBuilder {
    pub fn new() -> Self {
        ForestBuilder {
            forest: MetricForest::default(),
            s: SubgraphS::default(),
            vertex_map: BTreeMap::new(),
            signs: BTreeMap::new(),
        }
    }

    pub fn vertex(mut self, v: &str) -> Self {
        self.forest.vertices.insert(v.to_string());
        self
    }

    pub fn s_vertex(mut self, v: &str) -> Self {
        self.forest.vertices.insert(v.to_string());
        self.s.vertices.insert(v.to_string());
        self
    }

    pub fn edge(mut self, id: &str, u: &str, v: &str, length: LengthForm) -> Self {
        self.forest.edges.insert(
            id.to_string(),
            Edge { ends: (u.to_string(), v.to_string()), length },
        );
        self
    }

    pub fn edge_const(self, id: &str, u: &str, v: &str, l: u64) -> Self {
        self.edge(id, u, v, LengthForm::constant(l))
    }

    pub fn s_edge(mut self, id: &str, u: &str, v: &str, length: LengthForm) -> Self {
        self.s.edges.insert(id.to_string());
        self.edge(id, u, v, length)
    }

    pub fn maps(mut self, pairs: &[(&str, &str)]) -> Self {
        for (a, b) in pairs {
            self.vertex_map.insert(a.to_string(), b.to_string());
        }
        self
    }

    pub fn sign(mut self, edge: &str, sign: i8) -> Self {
        self.signs.insert(edge.to_string(), sign);
        self
    }

    /// Finish; vertices without an explicit F image are fixed.
    pub fn build(mut self) -> BYForest {
        for v in &self.forest.vertices {
            self.vertex_map.entry(v.clone()).or_insert_with(|| v.clone());
        }
        let mut f = BYForest {
            forest: self.forest,
            s: self.s,
            aut: SignedAutomorphism { vertex_map: self.vertex_map, signs: self.signs },
        };
        // Default missing component signs to +1 for convenience.
        for c in f.components_minus_s() {
            if !c.edges.is_empty() && !f.aut.signs.keys().any(|k| c.edges.contains(k)) {
                f.aut.signs.insert(c.rep(), 1);
            }
        }
        f.canonicalize_signs().expect("builder signs");
        f
    }
}

impl Default for ForestBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// The 4-leaf star fixture: center c, leaves nw/ne (length a each, swapped
/// by F), sw (length b), se (length c); S = the four leaves; sign per
/// `sign`.
pub fn quad_fixture(a: LengthForm, b: LengthForm, c: LengthForm, sign: i8) -> BYForest {
    ForestBuilder::new()
        .vertex("center")
        .s_vertex("nw")
        .s_vertex("ne")
        .s_vertex("sw")
        .s_vertex("se")
        .edge("enw", "center", "nw", a.clone())
        .edge("ene", "center", "ne", a)
        .edge("esw", "center", "sw", b)
        .edge("ese", "center", "se", c)
        .maps(&[("nw", "ne"), ("ne", "nw")])
        .sign("enw", sign)
        .build()
}

pub fn quad_fixture_const(a: u64, b: u64, c: u64, sign: i8) -> BYForest {
    quad_fixture(
        LengthForm::constant(a),
        LengthForm::constant(b),
        LengthForm::constant(c),
        sign,
    )
}

/// Exact big-integer value of a concrete length.
pub fn length_to_bigint(l: &LengthForm) -> Result<BigInt, CoreError> {
    l.as_constant().map(BigInt::from).ok_or(CoreError::SymbolicLength)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_fixture_is_valid() {
        let f = quad_fixture_const(1, 2, 3, 1);
        assert_eq!(f.validate(), Vec::<String>::new());
        let comps = f.components_minus_s();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].edges.len(), 4);
    }

    #[test]
    fn validate_catches_bad_s_edge() {
        let mut f = quad_fixture_const(1, 2, 3, 1);
        f.s.edges.insert("enw".to_string());
        // endpoint "center" is not in S
        assert!(f.validate().iter().any(|d| d.contains("endpoint outside S")));
    }

    #[test]
    fn validate_catches_non_isometry() {
        let f = ForestBuilder::new()
            .s_vertex("a")
            .s_vertex("b")
            .vertex("m")
            .edge_const("e1", "m", "a", 2)
            .edge_const("e2", "m", "b", 3)
            .maps(&[("a", "b"), ("b", "a")])
            .build();
        assert!(f.validate().iter().any(|d| d.contains("different length")));
    }

    #[test]
    fn parity_a_star_with_unknowns() {
        let f = quad_fixture(
            LengthForm::variable("a", Parity::Unknown),
            LengthForm::variable("b", Parity::Unknown),
            LengthForm::variable("c", Parity::Unknown),
            1,
        );
        // every vertex pair has a qualifying endpoint (S-leaves)
        assert_eq!(f.check_parity_a().unwrap(), None);
        assert_eq!(f.check_parity_b().unwrap(), None);
    }

    #[test]
    fn parity_a_violation() {
        // path of length 3 between two degree-3 vertices not in S
        let f = ForestBuilder::new()
            .vertex("u")
            .vertex("v")
            .s_vertex("a1")
            .s_vertex("a2")
            .s_vertex("b1")
            .s_vertex("b2")
            .edge_const("mid", "u", "v", 3)
            .edge_const("ea1", "u", "a1", 2)
            .edge_const("ea2", "u", "a2", 2)
            .edge_const("eb1", "v", "b1", 2)
            .edge_const("eb2", "v", "b2", 2)
            .build();
        let w = f.check_parity_a().unwrap();
        assert_eq!(w, Some(("u".to_string(), "v".to_string())));
    }

    #[test]
    fn parity_b_inverted_edge() {
        let make = |l: LengthForm| {
            ForestBuilder::new()
                .s_vertex("a")
                .s_vertex("b")
                .edge("e", "a", "b", l)
                .maps(&[("a", "b"), ("b", "a")])
                .build()
        };
        let odd = make(LengthForm::constant(3));
        assert_eq!(odd.check_parity_b().unwrap(), Some(("e".to_string(), 1)));
        assert!(!odd.check_parity_b_prime().unwrap());
        let even = make(LengthForm::constant(2));
        assert_eq!(even.check_parity_b().unwrap(), None);
        assert!(even.check_parity_b_prime().unwrap());
        let sym = make(LengthForm::variable("n", Parity::Unknown));
        assert!(matches!(
            sym.check_parity_b(),
            Err(CoreError::UndeterminedParity(_))
        ));
    }

    #[test]
    fn subdivide_structure() {
        let f = quad_fixture_const(1, 2, 3, 1);
        let sub = f.subdivide().unwrap();
        assert!(sub.validate().is_empty());
        assert_eq!(sub.forest.edges.len(), 1 + 1 + 2 + 3);
        assert!(sub.forest.edges.values().all(|e| e.length == LengthForm::constant(1)));
        // the swapped pair of unit edges still maps correctly
        assert!(sub.check_parity_b().unwrap().is_none());
        let comps = sub.components_minus_s();
        assert_eq!(comps.len(), 1);
    }

    #[test]
    fn hull_prunes_pendant() {
        let f = ForestBuilder::new()
            .s_vertex("a")
            .s_vertex("b")
            .vertex("m")
            .vertex("extra")
            .edge_const("e1", "a", "m", 1)
            .edge_const("e2", "m", "b", 1)
            .edge_const("e3", "m", "extra", 5)
            .build();
        let h = f.convex_hull_of_s().unwrap();
        assert!(h.validate().is_empty());
        assert!(!h.forest.vertices.contains("extra"));
        assert_eq!(h.forest.edges.len(), 2);
    }

    #[test]
    fn scale_and_power_signs() {
        // one fixed component with sign -1: f=2 gives sign +1
        let f = ForestBuilder::new()
            .s_vertex("a")
            .s_vertex("b")
            .edge_const("e", "a", "b", 3)
            .sign("e", -1)
            .build();
        let g = f.scale_and_power(2, 2).unwrap();
        assert_eq!(g.forest.edges["e"].length, LengthForm::constant(6));
        assert_eq!(g.aut.signs["e"], 1);
        let id = f.scale_and_power(1, 1).unwrap();
        assert_eq!(id.aut.signs["e"], -1);
    }

    #[test]
    fn normalize_signs_orbits() {
        // three components in an F-orbit, all signs -1 -> (-1, +1, +1)
        let mut b = ForestBuilder::new();
        for i in 0..3 {
            b = b
                .s_vertex(&format!("s{i}"))
                .s_vertex(&format!("t{i}"))
                .edge_const(&format!("e{i}"), &format!("s{i}"), &format!("t{i}"), 2)
                .sign(&format!("e{i}"), -1);
        }
        let f = b
            .maps(&[
                ("s0", "s1"),
                ("s1", "s2"),
                ("s2", "s0"),
                ("t0", "t1"),
                ("t1", "t2"),
                ("t2", "t0"),
            ])
            .build();
        let n = f.normalize_signs().unwrap();
        let signs: Vec<i8> = n.aut.signs.values().cloned().collect();
        assert_eq!(signs.iter().filter(|&&s| s == -1).count(), 1);
        assert_eq!(n.aut.signs["e0"], -1);
    }

    #[test]
    fn f_order_and_edge_map() {
        let f = quad_fixture_const(1, 2, 3, 1);
        assert_eq!(f.f_order(), 2);
        let emap = f.edge_map().unwrap();
        assert_eq!(emap["enw"].0, "ene");
        assert_eq!(emap["esw"].0, "esw");
    }
}
