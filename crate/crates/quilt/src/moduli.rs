//! Ciliated graphs, skeletized coloured surfaces and their quantized moduli
//! algebras, with the functor on surface morphisms.

use crate::associator::{doubled_strands, higher_associator, nu, AssocError, Associator};
use crate::chords::ChordSeries;
use crate::jet::{exp_degree, Exp, Jet};
use crate::liealg::{casimir, is_coisotropic, CasimirElement, ManinTriple, Subalgebra, Vector};
use crate::linalg::{Echelon, Mat, SparseVec};
use crate::ordcat::{
    compose_parenthesized, standard_parenthesization, FinSet, OrdError, OrderedMorphism, ParenthesizedOrderedMorphism,
};
use crate::rational::{fmt_q, Q};
use crate::spaces::{coisotropic_stabilizers_check, invariants, pivot_monomial, BoundStrand, ChordAction, Derivation, GSpace, SpaceError};
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModuliError {
    #[error("invalid surface: {0:?}")]
    Invalid(Vec<String>),
    #[error("invalid morphism: {0}")]
    Morphism(String),
    #[error("associator degree {have} is below the requested ℏ-degree {want}")]
    AssociatorDegree { have: usize, want: usize },
    #[error("associator mismatch: {0} vs {1}")]
    AssociatorMismatch(String, String),
    #[error("weight mismatch between source and target")]
    WeightMismatch,
    #[error("result leaves the invariant subspace at ℏ^{k}: {witness}")]
    NotInvariant { k: usize, witness: String },
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Assoc(#[from] AssocError),
    #[error(transparent)]
    Ord(#[from] OrdError),
    #[error("graph file: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub name: String,
    pub sign: Sign,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfEdge {
    pub name: String,
    pub vertex: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub name: String,
    pub plus: String,
    pub minus: String,
}

/// Half-edges are listed in cilia order: within a vertex, listing order is
/// the fiber order of the incidence map.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiliatedGraph {
    pub vertices: Vec<Vertex>,
    pub half_edges: Vec<HalfEdge>,
    pub edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(default)]
    vertex: Vec<VertexEntry>,
    #[serde(default)]
    edge: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct VertexEntry {
    name: String,
    sign: Sign,
    #[serde(default)]
    cilia: Vec<String>,
}

impl CiliatedGraph {
    pub fn vertex(&self, v: &str) -> Option<&Vertex> {
        self.vertices.iter().find(|x| x.name == v)
    }

    pub fn half_edge(&self, h: &str) -> Option<&HalfEdge> {
        self.half_edges.iter().find(|x| x.name == h)
    }

    pub fn sign_of(&self, h: &str) -> Option<Sign> {
        self.half_edge(h).and_then(|x| self.vertex(&x.vertex)).map(|v| v.sign)
    }

    /// Half-edges at v in cilia order.
    pub fn fiber(&self, v: &str) -> Vec<String> {
        self.half_edges.iter().filter(|h| h.vertex == v).map(|h| h.name.clone()).collect()
    }

    pub fn half_edges_of_sign(&self, s: Sign) -> Vec<String> {
        self.half_edges.iter().filter(|h| self.sign_of(&h.name) == Some(s)).map(|h| h.name.clone()).collect()
    }

    pub fn vertices_of_sign(&self, s: Sign) -> Vec<String> {
        self.vertices.iter().filter(|v| v.sign == s).map(|v| v.name.clone()).collect()
    }

    /// i_± : H^± → V^±.
    pub fn incidence(&self, s: Sign) -> Result<OrderedMorphism, OrdError> {
        let fibers = self.vertices_of_sign(s).into_iter().map(|v| (v.clone(), self.fiber(&v))).collect();
        OrderedMorphism::new(FinSet::new(self.half_edges_of_sign(s))?, FinSet::new(self.vertices_of_sign(s))?, &fibers)
    }

    pub fn edge_of(&self, h: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.plus == h || e.minus == h)
    }

    /// Half-edges not attached to any edge, in listing order.
    pub fn widowed(&self) -> Vec<String> {
        self.half_edges.iter().filter(|h| self.edge_of(&h.name).is_none()).map(|h| h.name.clone()).collect()
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let names = self
            .vertices
            .iter()
            .map(|v| &v.name)
            .chain(self.half_edges.iter().map(|h| &h.name))
            .chain(self.edges.iter().map(|e| &e.name));
        for n in names {
            if !seen.insert(n.clone()) {
                out.push(format!("label {n} used twice"));
            }
        }
        for h in &self.half_edges {
            if self.vertex(&h.vertex).is_none() {
                out.push(format!("half-edge {} is incident to unknown vertex {}", h.name, h.vertex));
            }
        }
        for v in &self.vertices {
            if self.fiber(&v.name).is_empty() {
                out.push(format!("incidence map is not surjective: vertex {} has no half-edges", v.name));
            }
        }
        let mut used = BTreeSet::new();
        for e in &self.edges {
            for (h, want) in [(&e.plus, Sign::Plus), (&e.minus, Sign::Minus)] {
                match self.sign_of(h) {
                    None => out.push(format!("edge {} uses unknown half-edge {h}", e.name)),
                    Some(s) if s != want => out.push(format!("edge {} attaches {h} with the wrong sign", e.name)),
                    _ => {}
                }
                if !used.insert(h.clone()) {
                    out.push(format!("half-edge {h} is attached to two edges"));
                }
            }
        }
        out
    }

    pub fn from_toml(src: &str) -> Result<Self, ModuliError> {
        let f: GraphFile = toml::from_str(src).map_err(|e| ModuliError::Parse(e.to_string()))?;
        let mut g = CiliatedGraph::default();
        for v in f.vertex {
            for h in &v.cilia {
                g.half_edges.push(HalfEdge { name: h.clone(), vertex: v.name.clone() });
            }
            g.vertices.push(Vertex { name: v.name, sign: v.sign });
        }
        g.edges = f.edge;
        Ok(g)
    }

    pub fn to_toml(&self) -> String {
        let f = GraphFile {
            vertex: self
                .vertices
                .iter()
                .map(|v| VertexEntry { name: v.name.clone(), sign: v.sign, cilia: self.fiber(&v.name) })
                .collect(),
            edge: self.edges.clone(),
        };
        toml::to_string(&f).expect("graph serializes")
    }
}

/// Monospace picture: each vertex with its cilia in order, then the edges.
pub fn render_graph(g: &CiliatedGraph) -> String {
    let mut out = String::new();
    for v in &g.vertices {
        let cilia = g.fiber(&v.name);
        let sign = if v.sign == Sign::Plus { '+' } else { '-' };
        let width = cilia.iter().map(|c| c.chars().count()).max().unwrap_or(1).max(1) + 2;
        let labels: String = cilia.iter().map(|c| format!("{c:^width$}")).collect();
        let stems: String = cilia.iter().map(|_| format!("{:^width$}", "|")).collect();
        let base: String = cilia.iter().map(|_| format!("{:-^width$}", "+")).collect();
        out.push_str(&format!("{labels}\n{stems}\n{base}-({}){sign}\n\n", v.name));
    }
    for e in &g.edges {
        out.push_str(&format!("{}: {} ====== {}\n", e.name, e.plus, e.minus));
    }
    out
}

/// A ciliated graph with coisotropic colours on vertices and formal spaces
/// on edges and widowed half-edges. Edge spaces carry the action of g ⊕ ḡ:
/// the first dim g fields act through the positive end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkeletizedColouredSurface {
    pub graph: CiliatedGraph,
    pub double: ManinTriple,
    pub colours: BTreeMap<String, Subalgebra>,
    pub spaces: BTreeMap<String, GSpace>,
}

impl SkeletizedColouredSurface {
    pub fn empty(double: ManinTriple) -> Self {
        SkeletizedColouredSurface {
            graph: CiliatedGraph::default(),
            double,
            colours: BTreeMap::new(),
            spaces: BTreeMap::new(),
        }
    }

    pub fn tensor(&self) -> CasimirElement {
        casimir(&self.double)
    }

    /// Names of the factors of X_Γ: edges, then widowed half-edges.
    pub fn factor_names(&self) -> Vec<String> {
        self.graph.edges.iter().map(|e| e.name.clone()).chain(self.graph.widowed()).collect()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = self.graph.diagnostics();
        let g = &self.double.g;
        let t = self.tensor();
        let m = self.double.dim();
        for v in &self.graph.vertices {
            match self.colours.get(&v.name) {
                None => out.push(format!("vertex {} has no colour", v.name)),
                Some(c) => {
                    if c.span.iter().any(|x| x.len() != m) {
                        out.push(format!("colour of vertex {} has vectors of the wrong length", v.name));
                    } else if !c.is_closed(g) {
                        out.push(format!("colour of vertex {} is not a subalgebra", v.name));
                    } else if !matches!(is_coisotropic(c, g, &t), Ok(true)) {
                        out.push(format!("colour of vertex {} is not coisotropic", v.name));
                    }
                }
            }
        }
        for e in &self.graph.edges {
            match self.spaces.get(&e.name) {
                None => out.push(format!("edge {} has no space", e.name)),
                Some(x) if x.lie_dim() != 2 * m => out.push(format!("edge {} space needs {} fields", e.name, 2 * m)),
                Some(x) => {
                    let plus = GSpace { fields: x.fields[..m].to_vec(), ..x.clone() };
                    let minus = GSpace { fields: x.fields[m..].to_vec(), ..x.clone() };
                    for (part, sub) in [("g", plus), ("ḡ", minus)] {
                        if let Err(w) = coisotropic_stabilizers_check(&sub, &t) {
                            out.push(format!("edge {} has non-coisotropic {part}-stabilizers: {}", e.name, w.what));
                        }
                    }
                }
            }
        }
        for h in self.graph.widowed() {
            match self.spaces.get(&h) {
                None => out.push(format!("half-edge {h} has no space")),
                Some(x) if x.lie_dim() != m => out.push(format!("half-edge {h} space needs {m} fields")),
                Some(x) => {
                    if let Err(w) = coisotropic_stabilizers_check(x, &t) {
                        out.push(format!("half-edge {h} has non-coisotropic stabilizers: {}", w.what));
                    }
                }
            }
        }
        out
    }

    fn check(&self) -> Result<(), ModuliError> {
        let d = self.validate();
        if d.is_empty() {
            Ok(())
        } else {
            Err(ModuliError::Invalid(d))
        }
    }

    /// The part of the surface on the given vertices.
    pub fn restrict(&self, vertices: &BTreeSet<String>) -> Self {
        let graph = CiliatedGraph {
            vertices: self.graph.vertices.iter().filter(|v| vertices.contains(&v.name)).cloned().collect(),
            half_edges: self.graph.half_edges.iter().filter(|h| vertices.contains(&h.vertex)).cloned().collect(),
            edges: self
                .graph
                .edges
                .iter()
                .filter(|e| self.graph.half_edge(&e.plus).is_some_and(|h| vertices.contains(&h.vertex)))
                .cloned()
                .collect(),
        };
        let colours = self.colours.iter().filter(|(v, _)| vertices.contains(*v)).map(|(a, b)| (a.clone(), b.clone())).collect();
        let keep: BTreeSet<String> = graph.edges.iter().map(|e| e.name.clone()).chain(graph.widowed()).collect();
        let spaces = self.spaces.iter().filter(|(k, _)| keep.contains(*k)).map(|(a, b)| (a.clone(), b.clone())).collect();
        SkeletizedColouredSurface { graph, double: self.double.clone(), colours, spaces }
    }

    /// Vertex sets of the connected components, in listing order.
    pub fn components(&self) -> Vec<BTreeSet<String>> {
        let names: Vec<String> = self.graph.vertices.iter().map(|v| v.name.clone()).collect();
        let mut parent: Vec<usize> = (0..names.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        let idx = |v: &str| names.iter().position(|n| n == v);
        for e in &self.graph.edges {
            let a = self.graph.half_edge(&e.plus).and_then(|h| idx(&h.vertex));
            let b = self.graph.half_edge(&e.minus).and_then(|h| idx(&h.vertex));
            if let (Some(a), Some(b)) = (a, b) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for i in 0..names.len() {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().insert(names[i].clone());
        }
        groups.into_values().collect()
    }
}

/// Γ1 ⊔ Γ2. Labels of Γ2 clashing with Γ1 get primes appended; the renaming
/// is returned.
pub fn disjoint_union(
    a: &SkeletizedColouredSurface,
    b: &SkeletizedColouredSurface,
) -> (SkeletizedColouredSurface, BTreeMap<String, String>) {
    assert_eq!(a.double, b.double, "disjoint union needs a common double");
    let mut taken: BTreeSet<String> = a
        .graph
        .vertices
        .iter()
        .map(|v| v.name.clone())
        .chain(a.graph.half_edges.iter().map(|h| h.name.clone()))
        .chain(a.graph.edges.iter().map(|e| e.name.clone()))
        .collect();
    let mut rename = BTreeMap::new();
    let labels = b
        .graph
        .vertices
        .iter()
        .map(|v| v.name.clone())
        .chain(b.graph.half_edges.iter().map(|h| h.name.clone()))
        .chain(b.graph.edges.iter().map(|e| e.name.clone()));
    for l in labels {
        let mut n = l.clone();
        while taken.contains(&n) {
            n.push('\'');
        }
        taken.insert(n.clone());
        rename.insert(l, n);
    }
    let r = |s: &String| rename[s].clone();
    let mut out = a.clone();
    out.graph.vertices.extend(b.graph.vertices.iter().map(|v| Vertex { name: r(&v.name), sign: v.sign }));
    out.graph.half_edges.extend(b.graph.half_edges.iter().map(|h| HalfEdge { name: r(&h.name), vertex: r(&h.vertex) }));
    out.graph.edges.extend(b.graph.edges.iter().map(|e| Edge { name: r(&e.name), plus: r(&e.plus), minus: r(&e.minus) }));
    out.colours.extend(b.colours.iter().map(|(k, v)| (r(k), v.clone())));
    out.spaces.extend(b.spaces.iter().map(|(k, v)| (r(k), v.clone())));
    (out, rename)
}

#[derive(Clone, Debug)]
pub struct Factor {
    pub name: String,
    pub offset: usize,
    pub space: GSpace,
}

#[derive(Clone, Debug)]
pub struct StrandSite {
    pub factor: usize,
    pub field_offset: usize,
    pub sign: Sign,
}

/// X_Γ = ∏ X_e × ∏ X_h with each half-edge acting on its factor.
#[derive(Clone, Debug)]
pub struct XGamma {
    pub nvars: usize,
    pub lie_dim: usize,
    pub factors: Vec<Factor>,
    pub strands: BTreeMap<String, StrandSite>,
}

pub fn build_x_gamma(s: &SkeletizedColouredSurface) -> XGamma {
    let m = s.double.dim();
    let mut factors = Vec::new();
    let mut strands = BTreeMap::new();
    let mut offset = 0;
    for name in s.factor_names() {
        let space = s.spaces[&name].clone();
        let idx = factors.len();
        if let Some(e) = s.graph.edges.iter().find(|e| e.name == name) {
            strands.insert(e.plus.clone(), StrandSite { factor: idx, field_offset: 0, sign: Sign::Plus });
            strands.insert(e.minus.clone(), StrandSite { factor: idx, field_offset: m, sign: Sign::Minus });
        } else {
            let sign = s.graph.sign_of(&name).expect("validated");
            strands.insert(name.clone(), StrandSite { factor: idx, field_offset: 0, sign });
        }
        let n = space.nvars();
        factors.push(Factor { name, offset, space });
        offset += n;
    }
    XGamma { nvars: offset, lie_dim: m, factors, strands }
}

impl XGamma {
    pub fn factor_vars(&self, f: usize, shift: usize) -> Vec<usize> {
        let fa = &self.factors[f];
        (0..fa.space.nvars()).map(|i| fa.offset + i + shift).collect()
    }

    pub fn factor_index(&self, name: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.name == name)
    }

    /// The strand's fields on jets in `nvars` variables, with this space's
    /// coordinates shifted by `shift`.
    pub fn bound_strand(&self, h: &str, nvars: usize, shift: usize) -> BoundStrand {
        let site = &self.strands[h];
        let fa = &self.factors[site.factor];
        let map = self.factor_vars(site.factor, shift);
        BoundStrand {
            fields: fa.space.fields[site.field_offset..site.field_offset + self.lie_dim]
                .iter()
                .map(|d| d.relabel(nvars, &map))
                .collect(),
            negative: site.sign == Sign::Minus,
        }
    }

    /// Vertex actions: for c in the colour of v, Σ_{h at v} V_c^{(h)}.
    pub fn vertex_derivations(&self, s: &SkeletizedColouredSurface) -> Vec<Derivation> {
        let mut out = Vec::new();
        for v in &s.graph.vertices {
            let strands: Vec<BoundStrand> = s.graph.fiber(&v.name).iter().map(|h| self.bound_strand(h, self.nvars, 0)).collect();
            for c in &s.colours[&v.name].span {
                let prec = strands.iter().flat_map(|b| b.fields.iter().map(|d| d.precision)).min().unwrap_or(0);
                let mut d = Derivation::zero(self.nvars, prec);
                for b in &strands {
                    for (a, x) in c.iter().enumerate() {
                        if !x.is_zero() {
                            d = d.add(&b.fields[a].scale(x));
                        }
                    }
                }
                out.push(d);
            }
        }
        out
    }

    /// The largest number of constant-coefficient fields a single chord
    /// letter can apply; bounds the degree lost per power of ℏ.
    pub fn weight(&self, t: &CasimirElement) -> usize {
        let consts: Vec<(Sign, Vec<bool>)> = self
            .strands
            .values()
            .map(|site| {
                let fa = &self.factors[site.factor];
                let c = fa.space.fields[site.field_offset..site.field_offset + self.lie_dim]
                    .iter()
                    .map(|d| d.has_constant_term())
                    .collect();
                (site.sign, c)
            })
            .collect();
        let mut w = 1;
        for (su, cu) in &consts {
            for (sv, cv) in &consts {
                if su != sv {
                    continue;
                }
                for (a, b, _) in t.entries() {
                    w = w.max(cu[a] as usize + cv[b] as usize);
                }
            }
        }
        w
    }
}

/// Truncated graded coordinates: basis element l lives in ℏ-slot k when
/// degrees[l] + weight·k ≤ order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FSpace {
    pub degrees: Vec<usize>,
    pub order: usize,
    pub hbar: usize,
    pub weight: usize,
}

/// Element of an FSpace: one sparse coordinate vector per power of ℏ.
pub type Elem = Vec<SparseVec>;

impl FSpace {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn slot_ok(&self, k: usize, l: usize) -> bool {
        k <= self.hbar && self.degrees[l] + self.weight * k <= self.order
    }

    pub fn zero(&self) -> Elem {
        vec![SparseVec::new(); self.hbar + 1]
    }

    pub fn basis_elem(&self, l: usize) -> Elem {
        let mut e = self.zero();
        e[0].insert(l, Q::one());
        e
    }

    pub fn mask(&self, x: &Elem) -> Elem {
        let mut out = self.zero();
        for (k, v) in x.iter().enumerate().take(self.hbar + 1) {
            for (l, c) in v {
                if self.slot_ok(k, *l) && !c.is_zero() {
                    out[k].insert(*l, c.clone());
                }
            }
        }
        out
    }

    pub fn add(&self, x: &Elem, y: &Elem) -> Elem {
        let mut out = x.clone();
        for (k, v) in y.iter().enumerate() {
            crate::linalg::axpy(&mut out[k], &Q::one(), v);
        }
        self.mask(&out)
    }

    pub fn scale(&self, x: &Elem, c: &Q) -> Elem {
        self.mask(&x.iter().map(|v| v.iter().map(|(l, a)| (*l, a * c)).collect()).collect())
    }

    pub fn sub(&self, x: &Elem, y: &Elem) -> Elem {
        self.add(x, &self.scale(y, &-Q::one()))
    }

    pub fn eq(&self, x: &Elem, y: &Elem) -> bool {
        self.mask(x) == self.mask(y)
    }

    pub fn tensor(&self, o: &FSpace) -> FSpace {
        assert_eq!((self.order, self.hbar, self.weight), (o.order, o.hbar, o.weight));
        let degrees = self.degrees.iter().flat_map(|a| o.degrees.iter().map(move |b| a + b)).collect();
        FSpace { degrees, order: self.order, hbar: self.hbar, weight: self.weight }
    }

    /// x ⊗ y under the pair indexing of `tensor`.
    pub fn tensor_elem(&self, o: &FSpace, x: &Elem, y: &Elem) -> Elem {
        let t = self.tensor(o);
        let mut out = t.zero();
        for (k1, v1) in x.iter().enumerate() {
            for (k2, v2) in y.iter().enumerate() {
                if k1 + k2 > t.hbar {
                    continue;
                }
                for (i, a) in v1 {
                    for (j, b) in v2 {
                        *out[k1 + k2].entry(i * o.dim() + j).or_insert_with(Q::zero) += a * b;
                    }
                }
            }
        }
        t.mask(&out)
    }
}

/// An ℏ-linear map between FSpaces: mats[k] sends slot k' to slot k + k'.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FMap {
    pub src: FSpace,
    pub dst: FSpace,
    pub mats: Vec<Mat>,
}

impl FMap {
    pub fn zero(src: &FSpace, dst: &FSpace) -> Self {
        FMap { src: src.clone(), dst: dst.clone(), mats: vec![Mat::zeros(dst.dim(), src.dim()); dst.hbar + 1] }
    }

    pub fn identity(s: &FSpace) -> Self {
        let mut m = Self::zero(s, s);
        m.mats[0] = Mat::identity(s.dim());
        m.masked()
    }

    /// Drop entries outside the target's slots; nothing else can matter.
    pub fn masked(mut self) -> Self {
        for (k, m) in self.mats.iter_mut().enumerate() {
            for (r, row) in m.data.iter_mut().enumerate() {
                if !self.dst.slot_ok(k, r) {
                    row.clear();
                }
            }
        }
        self
    }

    pub fn set_column(&mut self, l: usize, image: &Elem) {
        for (k, v) in image.iter().enumerate() {
            for (r, c) in v {
                self.mats[k].add_to(*r, l, c);
            }
        }
    }

    pub fn column(&self, l: usize) -> Elem {
        self.apply(&self.src.basis_elem(l))
    }

    pub fn apply(&self, x: &Elem) -> Elem {
        let mut out = self.dst.zero();
        for (k, m) in self.mats.iter().enumerate() {
            for (k0, v) in x.iter().enumerate() {
                if k + k0 > self.dst.hbar || v.is_empty() {
                    continue;
                }
                for (r, row) in m.data.iter().enumerate() {
                    let mut s = Q::zero();
                    for (c, a) in row {
                        if let Some(b) = v.get(c) {
                            s += a * b;
                        }
                    }
                    if !s.is_zero() {
                        *out[k + k0].entry(r).or_insert_with(Q::zero) += s;
                    }
                }
            }
        }
        self.dst.mask(&out)
    }

    /// self ∘ other.
    pub fn compose(&self, other: &FMap) -> FMap {
        assert_eq!(other.dst.degrees, self.src.degrees, "composition shape mismatch");
        let mut out = FMap::zero(&other.src, &self.dst);
        for (i, a) in self.mats.iter().enumerate() {
            for (j, b) in other.mats.iter().enumerate() {
                if i + j <= self.dst.hbar {
                    out.mats[i + j] = out.mats[i + j].add(&a.mul(b));
                }
            }
        }
        out.masked()
    }

    pub fn add(&self, o: &FMap) -> FMap {
        let mut out = self.clone();
        for (k, m) in o.mats.iter().enumerate() {
            out.mats[k] = out.mats[k].add(m);
        }
        out.masked()
    }

    pub fn scale(&self, c: &Q) -> FMap {
        FMap { src: self.src.clone(), dst: self.dst.clone(), mats: self.mats.iter().map(|m| m.scale(c)).collect() }
    }

    pub fn sub(&self, o: &FMap) -> FMap {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.clone().masked().mats.iter().all(|m| m.is_zero())
    }

    /// A ⊗ B on the pair-indexed tensor spaces.
    pub fn tensor(&self, o: &FMap) -> FMap {
        let src = self.src.tensor(&o.src);
        let dst = self.dst.tensor(&o.dst);
        let mut out = FMap::zero(&src, &dst);
        let (sd, dd) = (o.src.dim(), o.dst.dim());
        for (i, a) in self.mats.iter().enumerate() {
            for (j, b) in o.mats.iter().enumerate() {
                if i + j > dst.hbar {
                    continue;
                }
                let m = &mut out.mats[i + j];
                for (r1, row1) in a.data.iter().enumerate() {
                    for (c1, x) in row1 {
                        for (r2, row2) in b.data.iter().enumerate() {
                            for (c2, y) in row2 {
                                m.add_to(r1 * dd + r2, c1 * sd + c2, &(x * y));
                            }
                        }
                    }
                }
            }
        }
        out.masked()
    }

    /// First differing entry (k, row, col, left, right), if any.
    pub fn first_difference(&self, o: &FMap) -> Option<(usize, usize, usize, Q, Q)> {
        let d = self.sub(o);
        for (k, m) in d.mats.iter().enumerate() {
            for (r, row) in m.data.iter().enumerate() {
                if let Some((c, _)) = row.iter().next() {
                    return Some((k, r, *c, self.mats[k].get(r, *c), o.mats[k].get(r, *c)));
                }
            }
        }
        None
    }
}

/// Invariant jets of a surface with a reduced-echelon basis. Basis elements
/// are indexed by tuples of per-component basis elements, the first
/// component varying slowest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalModuli {
    pub nvars: usize,
    pub order: usize,
    pub weight: usize,
    pub basis: Vec<Jet>,
    pub pivots: Vec<Exp>,
    pub degrees: Vec<usize>,
}

impl ClassicalModuli {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn space(&self, hbar: usize) -> FSpace {
        FSpace { degrees: self.degrees.clone(), order: self.order, hbar, weight: self.weight }
    }

    /// Coordinates of an invariant jet trusted to `order`; the remainder
    /// must vanish.
    pub fn decompose(&self, f: &Jet, order: usize) -> Result<SparseVec, String> {
        let f = f.truncate(order);
        let mut coords = SparseVec::new();
        let mut rem = f.clone();
        for (l, p) in self.pivots.iter().enumerate() {
            if self.degrees[l] > order {
                continue;
            }
            let c = f.coeff(p);
            if !c.is_zero() {
                rem = rem.sub(&self.basis[l].truncate(order).scale(&c));
                coords.insert(l, c);
            }
        }
        match rem.terms.iter().next() {
            None => Ok(coords),
            Some((e, c)) => Err(format!("coefficient {} at monomial {:?}", fmt_q(c), e)),
        }
    }

    pub fn jet_of(&self, x: &SparseVec) -> Jet {
        let mut j = Jet::zero(self.nvars, self.order);
        for (l, c) in x {
            j = j.add(&self.basis[*l].scale(c));
        }
        j
    }
}

pub fn classical_moduli(s: &SkeletizedColouredSurface, order: usize) -> Result<ClassicalModuli, ModuliError> {
    s.check()?;
    let xg = build_x_gamma(s);
    let weight = xg.weight(&s.tensor());
    let mut basis = vec![Jet::one(xg.nvars, order)];
    let mut pivots: Vec<Exp> = vec![vec![0; xg.nvars]];
    for comp in s.components() {
        let sub = s.restrict(&comp);
        let sx = build_x_gamma(&sub);
        let local = invariants(sx.nvars, &sx.vertex_derivations(&sub), order)?;
        // local variable i → global variable
        let mut map = vec![0; sx.nvars];
        for (fi, f) in sx.factors.iter().enumerate() {
            let g = xg.factor_index(&f.name).expect("factor of a component");
            for (a, b) in sx.factor_vars(fi, 0).into_iter().zip(xg.factor_vars(g, 0)) {
                map[a] = b;
            }
        }
        let lifted: Vec<(Jet, Exp)> = local
            .iter()
            .map(|j| {
                let p = pivot_monomial(j).expect("nonzero basis element").clone();
                let mut gp = vec![0u8; xg.nvars];
                for (i, k) in p.iter().enumerate() {
                    gp[map[i]] += k;
                }
                (j.relabel(xg.nvars, &map), gp)
            })
            .collect();
        let mut nb = Vec::new();
        let mut np = Vec::new();
        for (b, p) in basis.iter().zip(&pivots) {
            for (lb, lp) in &lifted {
                // Products beyond the jet order are kept as inactive slots so
                // that indices match tensor products of the parts.
                np.push(p.iter().zip(lp).map(|(x, y)| x + y).collect());
                nb.push(b.mul(lb));
            }
        }
        basis = nb;
        pivots = np;
    }
    let degrees = pivots.iter().map(|p| exp_degree(p)).collect();
    Ok(ClassicalModuli { nvars: xg.nvars, order, weight, basis, pivots, degrees })
}

/// Quant(Γ): the invariant basis with ⋆ structure constants per ℏ-degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantModuliAlgebra {
    pub classical: ClassicalModuli,
    pub hbar: usize,
    /// consts[k][(i, j)] = ℏ^k part of b_i ⋆ b_j.
    pub consts: Vec<BTreeMap<(usize, usize), SparseVec>>,
    pub associator_id: String,
}

/// The series acting on the doubled space for a product: ν^{i_+} ⊗ ν^{i_-}.
struct ProductOperator {
    action: ChordAction,
    nus: Vec<ChordSeries>,
    nvars: usize,
}

/// The bracketing of i_+ and i_- used for products: the given one where
/// present, the standard one otherwise.
fn bracketing(
    s: &SkeletizedColouredSurface,
    parens: &BTreeMap<Sign, ParenthesizedOrderedMorphism>,
    sign: Sign,
) -> Result<ParenthesizedOrderedMorphism, ModuliError> {
    let i = s.graph.incidence(sign)?;
    match parens.get(&sign) {
        Some(p) if p.base() != &i => Err(ModuliError::Morphism(format!("bracketing for {sign:?} has the wrong base"))),
        Some(p) => Ok(p.clone()),
        None => Ok(standard_parenthesization(&i)),
    }
}

impl ProductOperator {
    fn new(
        s: &SkeletizedColouredSurface,
        xg: &XGamma,
        assoc: &Associator,
        parens: &BTreeMap<Sign, ParenthesizedOrderedMorphism>,
    ) -> Result<Self, ModuliError> {
        let n2 = 2 * xg.nvars;
        let mut action = ChordAction::new(n2, &s.tensor());
        let mut nus = Vec::new();
        for sign in [Sign::Plus, Sign::Minus] {
            let i = s.graph.incidence(sign)?;
            if i.source().is_empty() {
                continue;
            }
            for h in i.source().elements() {
                let [la, lb]: [String; 2] = doubled_strands(std::slice::from_ref(h)).try_into().unwrap();
                action.bind(&la, xg.bound_strand(h, n2, 0));
                action.bind(&lb, xg.bound_strand(h, n2, xg.nvars));
            }
            let v = nu(assoc, &bracketing(s, parens, sign)?);
            if v.terms().len() > 1 {
                nus.push(v);
            }
        }
        Ok(ProductOperator { action, nus, nvars: xg.nvars })
    }

    /// m ∘ ν (F ⊗ G), per power of ℏ, before any truncation.
    fn apply(&self, f: &Jet, g: &Jet, hbar: usize) -> Result<Vec<Jet>, ModuliError> {
        let n = self.nvars;
        let a: Vec<usize> = (0..n).collect();
        let b: Vec<usize> = (n..2 * n).collect();
        let p = f.relabel(2 * n, &a).mul(&g.relabel(2 * n, &b));
        let parts = apply_series(&self.action, &self.nus, &p, hbar)?;
        let diag: Vec<usize> = (0..2 * n).map(|i| i % n.max(1)).collect();
        Ok(parts.iter().map(|x| x.relabel(n, &diag)).collect())
    }
}

/// The series applied one after another to f, collected per power of ℏ.
fn apply_series(action: &ChordAction, series: &[ChordSeries], f: &Jet, hbar: usize) -> Result<Vec<Jet>, ModuliError> {
    let mut parts = vec![f.clone()];
    for v in series {
        let mut next: Vec<Option<Jet>> = vec![None; hbar + 1];
        for (k0, x) in parts.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k1, z) in action.apply(&v.truncate(hbar - k0), x)?.into_iter().enumerate() {
                let slot = &mut next[k0 + k1];
                *slot = Some(match slot.take() {
                    None => z,
                    Some(acc) => acc.add(&z),
                });
            }
        }
        parts = next.into_iter().map(|x| x.unwrap_or_else(|| Jet::zero(f.nvars, 0))).collect();
    }
    parts.resize(hbar + 1, Jet::zero(f.nvars, 0));
    Ok(parts)
}

fn decompose_parts(
    cm: &ClassicalModuli,
    parts: &[Jet],
    hbar: usize,
) -> Result<Vec<SparseVec>, ModuliError> {
    let mut out = Vec::new();
    for k in 0..=hbar {
        let Some(order) = cm.order.checked_sub(cm.weight * k) else {
            out.push(SparseVec::new());
            continue;
        };
        let part = &parts[k];
        if !part.is_zero() && part.order < order {
            return Err(SpaceError::PrecisionExhausted.into());
        }
        out.push(cm.decompose(part, order).map_err(|w| ModuliError::NotInvariant { k, witness: w })?);
    }
    Ok(out)
}

pub fn quantize(
    s: &SkeletizedColouredSurface,
    assoc: &Associator,
    hbar: usize,
    order: usize,
) -> Result<QuantModuliAlgebra, ModuliError> {
    quantize_parenthesized(s, assoc, hbar, order, &BTreeMap::new())
}

/// `quantize` with chosen bracketings of the incidence maps.
pub fn quantize_parenthesized(
    s: &SkeletizedColouredSurface,
    assoc: &Associator,
    hbar: usize,
    order: usize,
    parens: &BTreeMap<Sign, ParenthesizedOrderedMorphism>,
) -> Result<QuantModuliAlgebra, ModuliError> {
    if assoc.degree < hbar {
        return Err(ModuliError::AssociatorDegree { have: assoc.degree, want: hbar });
    }
    let assoc = assoc.truncated(hbar);
    let cm = classical_moduli(s, order)?;
    let xg = build_x_gamma(s);
    let op = ProductOperator::new(s, &xg, &assoc, parens)?;
    let n = cm.dim();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let cells: Vec<Result<Vec<SparseVec>, ModuliError>> = pairs
        .par_iter()
        .map(|(i, j)| {
            if cm.degrees[*i] + cm.degrees[*j] > order {
                return Ok(vec![SparseVec::new(); hbar + 1]);
            }
            let parts = op.apply(&cm.basis[*i], &cm.basis[*j], hbar)?;
            decompose_parts(&cm, &parts, hbar)
        })
        .collect();
    let mut consts = vec![BTreeMap::new(); hbar + 1];
    for ((i, j), cell) in pairs.into_iter().zip(cells) {
        for (k, v) in cell?.into_iter().enumerate() {
            if !v.is_empty() {
                consts[k].insert((i, j), v);
            }
        }
    }
    Ok(QuantModuliAlgebra { classical: cm, hbar, consts, associator_id: assoc.id().to_string() })
}

/// m_Γ^ℏ on two jets of X_Γ directly, per power of ℏ and decomposed.
pub fn star_jets(
    s: &SkeletizedColouredSurface,
    assoc: &Associator,
    cm: &ClassicalModuli,
    hbar: usize,
    f: &Jet,
    g: &Jet,
) -> Result<Elem, ModuliError> {
    let xg = build_x_gamma(s);
    let op = ProductOperator::new(s, &xg, &assoc.truncated(hbar), &BTreeMap::new())?;
    decompose_parts(cm, &op.apply(f, g, hbar)?, hbar)
}

impl QuantModuliAlgebra {
    pub fn dim(&self) -> usize {
        self.classical.dim()
    }

    pub fn space(&self) -> FSpace {
        self.classical.space(self.hbar)
    }

    pub fn unit(&self) -> Elem {
        let s = self.space();
        let l = self.classical.degrees.iter().position(|d| *d == 0).expect("constants are invariant");
        s.scale(&s.basis_elem(l), &self.classical.basis[l].constant_term().recip())
    }

    pub fn star(&self, x: &Elem, y: &Elem) -> Elem {
        let s = self.space();
        let mut out = s.zero();
        for (k1, v1) in x.iter().enumerate() {
            for (k2, v2) in y.iter().enumerate() {
                for (i, a) in v1 {
                    for (j, b) in v2 {
                        for (k3, c) in self.consts.iter().enumerate() {
                            let k = k1 + k2 + k3;
                            if k > self.hbar {
                                break;
                            }
                            if let Some(v) = c.get(&(*i, *j)) {
                                let ab = a * b;
                                for (l, z) in v {
                                    if s.slot_ok(k, *l) {
                                        *out[k].entry(*l).or_insert_with(Q::zero) += &ab * z;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        s.mask(&out)
    }

    /// The product of two elements given as jets of X_Γ at ℏ⁰.
    pub fn elem_of_jet(&self, f: &Jet) -> Result<Elem, String> {
        let mut e = self.space().zero();
        e[0] = self.classical.decompose(f, self.classical.order)?;
        Ok(e)
    }

    /// Quant(Γ1) ⊗ Quant(Γ2) on the pair-indexed basis.
    pub fn tensor(&self, o: &QuantModuliAlgebra) -> QuantModuliAlgebra {
        assert_eq!(self.hbar, o.hbar);
        let (a, b) = (&self.classical, &o.classical);
        let nv = a.nvars + b.nvars;
        let ma: Vec<usize> = (0..a.nvars).collect();
        let mb: Vec<usize> = (a.nvars..nv).collect();
        let mut basis = Vec::new();
        let mut pivots = Vec::new();
        let mut degrees = Vec::new();
        for i in 0..a.dim() {
            for j in 0..b.dim() {
                degrees.push(a.degrees[i] + b.degrees[j]);
                basis.push(a.basis[i].relabel(nv, &ma).mul(&b.basis[j].relabel(nv, &mb)));
                pivots.push(a.pivots[i].iter().chain(&b.pivots[j]).copied().collect());
            }
        }
        let classical = ClassicalModuli { nvars: nv, order: a.order, weight: a.weight.max(b.weight), basis, pivots, degrees };
        let space = classical.space(self.hbar);
        let nb = b.dim();
        let mut consts = vec![BTreeMap::new(); self.hbar + 1];
        for (k1, c1) in self.consts.iter().enumerate() {
            for (k2, c2) in o.consts.iter().enumerate() {
                let k = k1 + k2;
                if k > self.hbar {
                    continue;
                }
                for ((i1, j1), v1) in c1 {
                    for ((i2, j2), v2) in c2 {
                        let key = (i1 * nb + i2, j1 * nb + j2);
                        if space.degrees[key.0] + space.degrees[key.1] > a.order {
                            continue;
                        }
                        let cell: &mut SparseVec = consts[k].entry(key).or_default();
                        for (l1, x) in v1 {
                            for (l2, y) in v2 {
                                let l = l1 * nb + l2;
                                if space.slot_ok(k, l) {
                                    *cell.entry(l).or_insert_with(Q::zero) += x * y;
                                }
                            }
                        }
                    }
                }
            }
        }
        for c in &mut consts {
            for v in c.values_mut() {
                v.retain(|_, x| !x.is_zero());
            }
            c.retain(|_, v| !v.is_empty());
        }
        QuantModuliAlgebra { classical, hbar: self.hbar, consts, associator_id: self.associator_id.clone() }
    }

    /// Associativity residual on basis triples: the first failing triple.
    pub fn associativity_witness(&self) -> Option<(usize, usize, usize)> {
        let s = self.space();
        let n = self.dim();
        let basis: Vec<Elem> = (0..n).map(|l| s.basis_elem(l)).collect();
        let triples: Vec<(usize, usize, usize)> =
            (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k)))).collect();
        triples
            .into_par_iter()
            .filter(|(i, j, k)| {
                let d = &self.classical.degrees;
                d[*i] + d[*j] + d[*k] <= self.classical.order
            })
            .find_first(|(i, j, k)| {
                let l = self.star(&self.star(&basis[*i], &basis[*j]), &basis[*k]);
                let r = self.star(&basis[*i], &self.star(&basis[*j], &basis[*k]));
                !s.eq(&l, &r)
            })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let basis: Vec<serde_json::Value> = self
            .classical
            .basis
            .iter()
            .zip(&self.classical.degrees)
            .map(|(j, d)| serde_json::json!({ "degree": d, "terms": jet_terms(j) }))
            .collect();
        let consts: Vec<BTreeMap<String, BTreeMap<String, String>>> = self
            .consts
            .iter()
            .map(|c| {
                c.iter()
                    .map(|((i, j), v)| (format!("{i},{j}"), v.iter().map(|(l, x)| (l.to_string(), fmt_q(x))).collect()))
                    .collect()
            })
            .collect();
        serde_json::json!({
            "jet_order": self.classical.order,
            "hbar_degree": self.hbar,
            "weight": self.classical.weight,
            "associator": self.associator_id,
            "basis": basis,
            "star": consts,
        })
    }
}

pub fn jet_terms(j: &Jet) -> BTreeMap<String, String> {
    j.terms
        .iter()
        .map(|(e, c)| (e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","), fmt_q(c)))
        .collect()
}

pub fn fmap_json(m: &FMap) -> serde_json::Value {
    let mats: Vec<BTreeMap<String, String>> = m
        .mats
        .iter()
        .map(|mat| {
            let mut e = BTreeMap::new();
            for (r, row) in mat.data.iter().enumerate() {
                for (c, v) in row {
                    e.insert(format!("{r},{c}"), fmt_q(v));
                }
            }
            e
        })
        .collect();
    serde_json::json!({ "rows": m.dst.dim(), "cols": m.src.dim(), "hbar": mats })
}

/// A morphism Γ → Γ' of skeletized coloured surfaces. `space_maps` gives,
/// for a factor of X_Γ, its coordinates as jets on the image factor of
/// X_Γ'; absent entries are identities.
#[derive(Clone, Debug)]
pub struct SurfaceMorphism {
    pub source: SkeletizedColouredSurface,
    pub target: SkeletizedColouredSurface,
    pub vertex_map: BTreeMap<String, String>,
    pub half_edge_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, String>,
    pub space_maps: BTreeMap<String, Vec<Jet>>,
}

fn contains_span(big: &Subalgebra, small: &Subalgebra) -> bool {
    let mut e = Echelon::new(false);
    let to_sv = |v: &Vector| -> SparseVec { v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect() };
    for v in &big.span {
        e.insert(&to_sv(v));
    }
    small.span.iter().all(|v| e.reduce(&to_sv(v)).is_empty())
}

impl SurfaceMorphism {
    pub fn identity(s: &SkeletizedColouredSurface) -> Self {
        let id = |xs: Vec<String>| xs.into_iter().map(|x| (x.clone(), x)).collect();
        SurfaceMorphism {
            source: s.clone(),
            target: s.clone(),
            vertex_map: id(s.graph.vertices.iter().map(|v| v.name.clone()).collect()),
            half_edge_map: id(s.graph.half_edges.iter().map(|h| h.name.clone()).collect()),
            edge_map: id(s.graph.edges.iter().map(|e| e.name.clone()).collect()),
            space_maps: BTreeMap::new(),
        }
    }

    fn err(msg: String) -> ModuliError {
        ModuliError::Morphism(msg)
    }

    pub fn validate(&self) -> Result<(), ModuliError> {
        let (g, g2) = (&self.source.graph, &self.target.graph);
        for v in &g.vertices {
            let Some(w) = self.vertex_map.get(&v.name) else { return Err(Self::err(format!("vertex {} unmapped", v.name))) };
            let Some(w2) = g2.vertex(w) else { return Err(Self::err(format!("unknown target vertex {w}"))) };
            if w2.sign != v.sign {
                return Err(Self::err(format!("vertex {} changes sign", v.name)));
            }
            if !contains_span(&self.source.colours[&v.name], &self.target.colours[w]) {
                return Err(Self::err(format!("colour of {w} is not contained in the colour of {}", v.name)));
            }
        }
        for h in &g.half_edges {
            let Some(h2) = self.half_edge_map.get(&h.name) else { return Err(Self::err(format!("half-edge {} unmapped", h.name))) };
            let Some(h2e) = g2.half_edge(h2) else { return Err(Self::err(format!("unknown target half-edge {h2}"))) };
            if self.vertex_map[&h.vertex] != h2e.vertex {
                return Err(Self::err(format!("incidence square fails at half-edge {}", h.name)));
            }
            if (g.edge_of(&h.name).is_none()) != (g2.edge_of(h2).is_none()) {
                return Err(Self::err(format!("half-edge {} changes between widowed and attached", h.name)));
            }
        }
        for e in &g.edges {
            let Some(e2) = self.edge_map.get(&e.name) else { return Err(Self::err(format!("edge {} unmapped", e.name))) };
            let Some(e2e) = g2.edges.iter().find(|x| &x.name == e2) else { return Err(Self::err(format!("unknown target edge {e2}"))) };
            if self.half_edge_map[&e.plus] != e2e.plus || self.half_edge_map[&e.minus] != e2e.minus {
                return Err(Self::err(format!("edge square fails at {}", e.name)));
            }
        }
        Ok(())
    }

    /// Image factor of a source factor.
    fn image_factor(&self, name: &str) -> String {
        self.edge_map.get(name).or_else(|| self.half_edge_map.get(name)).expect("mapped").clone()
    }

    /// ψ ∘ φ for φ = self.
    pub fn then(&self, psi: &SurfaceMorphism) -> SurfaceMorphism {
        let comp = |a: &BTreeMap<String, String>, b: &BTreeMap<String, String>| -> BTreeMap<String, String> {
            a.iter().map(|(k, v)| (k.clone(), b[v].clone())).collect()
        };
        let mid = build_x_gamma(&psi.source);
        let mut space_maps = BTreeMap::new();
        for f in self.source.factor_names() {
            let img = self.image_factor(&f);
            let n_img = mid.factors[mid.factor_index(&img).unwrap()].space.nvars();
            let first = self.space_maps.get(&f).cloned();
            let second = psi.space_maps.get(&img).cloned();
            let m = match (first, second) {
                (None, None) => continue,
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (Some(a), Some(b)) => {
                    assert_eq!(a.first().map(|j| j.nvars).unwrap_or(n_img), n_img);
                    a.iter().map(|j| j.compose(&b)).collect()
                }
            };
            space_maps.insert(f, m);
        }
        SurfaceMorphism {
            source: self.source.clone(),
            target: psi.target.clone(),
            vertex_map: comp(&self.vertex_map, &psi.vertex_map),
            half_edge_map: comp(&self.half_edge_map, &psi.half_edge_map),
            edge_map: comp(&self.edge_map, &psi.edge_map),
            space_maps,
        }
    }

    /// φ ⊔ ψ between the disjoint unions, using the renamings produced by
    /// `disjoint_union` for the second parts.
    pub fn disjoint(&self, psi: &SurfaceMorphism) -> SurfaceMorphism {
        let (src, rs) = disjoint_union(&self.source, &psi.source);
        let (dst, rt) = disjoint_union(&self.target, &psi.target);
        let lift = |a: &BTreeMap<String, String>, b: &BTreeMap<String, String>| -> BTreeMap<String, String> {
            a.iter().map(|(k, v)| (k.clone(), v.clone())).chain(b.iter().map(|(k, v)| (rs[k].clone(), rt[v].clone()))).collect()
        };
        let mut space_maps = self.space_maps.clone();
        space_maps.extend(psi.space_maps.iter().map(|(k, v)| (rs[k].clone(), v.clone())));
        SurfaceMorphism {
            source: src,
            target: dst,
            vertex_map: lift(&self.vertex_map, &psi.vertex_map),
            half_edge_map: lift(&self.half_edge_map, &psi.half_edge_map),
            edge_map: lift(&self.edge_map, &psi.edge_map),
            space_maps,
        }
    }

    /// φ restricted to half-edges or vertices of one sign, as an ordered
    /// morphism whose fibers follow the source listing order.
    fn ordered(&self, sign: Sign, vertices: bool) -> Result<OrderedMorphism, OrdError> {
        let (g, g2) = (&self.source.graph, &self.target.graph);
        let (src, dst, map) = if vertices {
            (g.vertices_of_sign(sign), g2.vertices_of_sign(sign), &self.vertex_map)
        } else {
            (g.half_edges_of_sign(sign), g2.half_edges_of_sign(sign), &self.half_edge_map)
        };
        let mut fibers: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for x in &src {
            fibers.entry(map[x].clone()).or_default().push(x.clone());
        }
        OrderedMorphism::new(FinSet::new(src)?, FinSet::new(dst)?, &fibers)
    }

    /// Φ^{p,p'} over the source half-edges of one sign, taking the bracketing
    /// H → V → V' to the bracketing H → H' → V'.
    pub fn reparenthesization(&self, assoc: &Associator, sign: Sign) -> Result<ChordSeries, ModuliError> {
        let i = standard_parenthesization(&self.source.graph.incidence(sign)?);
        let i2 = standard_parenthesization(&self.target.graph.incidence(sign)?);
        let fv = standard_parenthesization(&self.ordered(sign, true)?);
        let fh = standard_parenthesization(&self.ordered(sign, false)?);
        let p = compose_parenthesized(&i, &fv)?;
        let p2 = compose_parenthesized(&fh, &i2)?;
        Ok(higher_associator(assoc, &p, &p2)?)
    }
}

/// f♯ : O(X_Γ) → O(X_Γ'), pulling back through the diagonals and the space
/// maps; one substitution jet per source coordinate.
pub fn pullback_diagonal(phi: &SurfaceMorphism, order: usize) -> Vec<Jet> {
    let xs = build_x_gamma(&phi.source);
    let xt = build_x_gamma(&phi.target);
    let mut subst = vec![Jet::zero(xt.nvars, order); xs.nvars];
    for (fi, f) in xs.factors.iter().enumerate() {
        let img = phi.image_factor(&f.name);
        let gi = xt.factor_index(&img).expect("image factor");
        let tv = xt.factor_vars(gi, 0);
        let n_img = xt.factors[gi].space.nvars();
        let local: Vec<Jet> = match phi.space_maps.get(&f.name) {
            Some(m) => m.iter().map(|j| j.relabel(xt.nvars, &tv).with_order(order)).collect(),
            None => {
                assert_eq!(n_img, f.space.nvars(), "identity space map needs equal dimensions");
                (0..n_img).map(|i| Jet::var(xt.nvars, order, tv[i])).collect()
            }
        };
        for (a, j) in xs.factor_vars(fi, 0).into_iter().zip(local) {
            subst[a] = j;
        }
    }
    subst
}

pub fn pull_back(f: &Jet, subst: &[Jet]) -> Jet {
    f.compose(subst)
}

/// The algebra map Quant(Γ) → Quant(Γ') of a surface morphism:
/// F ↦ f♯(Φ^{p,p'} · F), with both classical bases returned.
pub fn apply_morphism(
    phi: &SurfaceMorphism,
    assoc: &Associator,
    hbar: usize,
    order: usize,
) -> Result<(FMap, ClassicalModuli, ClassicalModuli), ModuliError> {
    phi.validate()?;
    if assoc.degree < hbar {
        return Err(ModuliError::AssociatorDegree { have: assoc.degree, want: hbar });
    }
    let assoc = assoc.truncated(hbar);
    let cs = classical_moduli(&phi.source, order)?;
    let ct = classical_moduli(&phi.target, order)?;
    if cs.weight != ct.weight {
        return Err(ModuliError::WeightMismatch);
    }
    let xs = build_x_gamma(&phi.source);
    let mut action = ChordAction::new(xs.nvars, &phi.source.tensor());
    for h in xs.strands.keys() {
        action.bind(h, xs.bound_strand(h, xs.nvars, 0));
    }
    let mut series = Vec::new();
    for sign in [Sign::Plus, Sign::Minus] {
        if phi.source.graph.half_edges_of_sign(sign).is_empty() {
            continue;
        }
        let s = phi.reparenthesization(&assoc, sign)?;
        if s.terms().len() > 1 {
            series.push(s);
        }
    }
    let subst = pullback_diagonal(phi, order);
    let (src, dst) = (cs.space(hbar), ct.space(hbar));
    let cols: Vec<Result<Elem, ModuliError>> = (0..cs.dim())
        .into_par_iter()
        .map(|l| {
            if cs.degrees[l] > order {
                return Ok(dst.zero());
            }
            let parts = apply_series(&action, &series, &cs.basis[l], hbar)?;
            let pulled: Vec<Jet> = parts
                .iter()
                .map(|x| {
                    if xs.nvars == 0 {
                        Jet::constant(ct.nvars, x.order, x.constant_term())
                    } else {
                        pull_back(x, &subst)
                    }
                })
                .collect();
            decompose_parts(&ct, &pulled, hbar)
        })
        .collect();
    let mut m = FMap::zero(&src, &dst);
    for (l, c) in cols.into_iter().enumerate() {
        m.set_column(l, &c?);
    }
    Ok((m.masked(), cs, ct))
}

/// F ↦ Φ^{p,p'}·F on Quant(Γ), for two bracketings of the incidence map of
/// one sign. It carries the product built with `p` to the one built with `p'`.
pub fn reparenthesization_map(
    s: &SkeletizedColouredSurface,
    assoc: &Associator,
    hbar: usize,
    order: usize,
    sign: Sign,
    p: &ParenthesizedOrderedMorphism,
    p2: &ParenthesizedOrderedMorphism,
) -> Result<FMap, ModuliError> {
    let assoc = assoc.truncated(hbar);
    let cm = classical_moduli(s, order)?;
    let xg = build_x_gamma(s);
    let mut action = ChordAction::new(xg.nvars, &s.tensor());
    for h in s.graph.half_edges_of_sign(sign) {
        action.bind(&h, xg.bound_strand(&h, xg.nvars, 0));
    }
    let phi = higher_associator(&assoc, p, p2)?;
    let space = cm.space(hbar);
    let cols: Vec<Result<Elem, ModuliError>> = (0..cm.dim())
        .into_par_iter()
        .map(|l| {
            if cm.degrees[l] > order {
                return Ok(space.zero());
            }
            let parts = apply_series(&action, std::slice::from_ref(&phi), &cm.basis[l], hbar)?;
            decompose_parts(&cm, &parts, hbar)
        })
        .collect();
    let mut m = FMap::zero(&space, &space);
    for (l, c) in cols.into_iter().enumerate() {
        m.set_column(l, &c?);
    }
    Ok(m.masked())
}
