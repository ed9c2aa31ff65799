//! The quantized group and its comodule algebras: surfaces with one vertex,
//! the maps induced by monotone maps of half-edges, and the Hopf structure
//! obtained by inverting the splitting map order by order in ℏ.

use crate::associator::Associator;
use crate::liealg::{ManinTriple, Subalgebra};
use crate::linalg::{Mat, SparseVec};
use crate::moduli::{
    apply_morphism, disjoint_union, quantize, CiliatedGraph, Edge, Elem, FMap, FSpace, HalfEdge, ModuliError,
    QuantModuliAlgebra, SkeletizedColouredSurface, SurfaceMorphism, Vertex,
};
use crate::moduli::Sign;
use crate::rational::Q;
use crate::spaces::GSpace;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

/// Label of the module half-edge, last in the cilia order.
pub const CLUB: &str = "♣";

#[derive(Debug, Error)]
pub enum HopfError {
    #[error("map {0:?} is not monotone")]
    NotMonotone(Vec<usize>),
    #[error("the ℏ⁰ block is singular; kernel vector {0:?}")]
    Singular(SparseVec),
    #[error("the ℏ⁰ block is not square: {0} × {1}")]
    NotSquare(usize, usize),
    #[error(transparent)]
    Moduli(#[from] ModuliError),
}

fn one_vertex(mt: &ManinTriple, cilia: &[String], spaces: BTreeMap<String, GSpace>) -> SkeletizedColouredSurface {
    let graph = CiliatedGraph {
        vertices: vec![Vertex { name: "*".into(), sign: Sign::Plus }],
        half_edges: cilia.iter().map(|h| HalfEdge { name: h.clone(), vertex: "*".into() }).collect(),
        edges: Vec::<Edge>::new(),
    };
    let colours = [("*".to_string(), Subalgebra::new(mt.h_span()))].into_iter().collect();
    SkeletizedColouredSurface { graph, double: mt.clone(), colours, spaces }
}

fn labels(n: usize) -> Vec<String> {
    (0..=n).map(|i| i.to_string()).collect()
}

/// Γ_H^(n): one positive vertex coloured by h, half-edges 0 < … < n each
/// carrying H.
pub fn gamma_h(mt: &ManinTriple, n: usize, order: usize) -> SkeletizedColouredSurface {
    let h = GSpace::group(mt, order);
    let ls = labels(n);
    let spaces = ls.iter().map(|l| (l.clone(), h.clone())).collect();
    one_vertex(mt, &ls, spaces)
}

/// Γ_M^(n): as Γ_H^(n) with an extra last half-edge ♣ carrying M.
pub fn gamma_m(mt: &ManinTriple, m: &GSpace, n: usize, order: usize) -> SkeletizedColouredSurface {
    let h = GSpace::group(mt, order);
    let mut ls = labels(n);
    let mut spaces: BTreeMap<String, GSpace> = ls.iter().map(|l| (l.clone(), h.clone())).collect();
    ls.push(CLUB.into());
    spaces.insert(CLUB.into(), m.clone());
    one_vertex(mt, &ls, spaces)
}

pub fn is_monotone(tau: &[usize]) -> bool {
    tau.windows(2).all(|w| w[0] <= w[1])
}

/// τ_! between one-vertex surfaces: half-edge i goes to τ(i), ♣ to ♣.
pub fn tau_morphism(
    tau: &[usize],
    source: &SkeletizedColouredSurface,
    target: &SkeletizedColouredSurface,
) -> Result<SurfaceMorphism, HopfError> {
    if !is_monotone(tau) {
        return Err(HopfError::NotMonotone(tau.to_vec()));
    }
    let mut half_edge_map: BTreeMap<String, String> =
        tau.iter().enumerate().map(|(i, j)| (i.to_string(), j.to_string())).collect();
    if source.graph.half_edge(CLUB).is_some() {
        half_edge_map.insert(CLUB.into(), CLUB.into());
    }
    Ok(SurfaceMorphism {
        source: source.clone(),
        target: target.clone(),
        vertex_map: [("*".to_string(), "*".to_string())].into_iter().collect(),
        half_edge_map,
        edge_map: BTreeMap::new(),
        space_maps: BTreeMap::new(),
    })
}

/// The algebra map induced by τ: {0..n} → {0..m} between the quantized
/// one-vertex surfaces (group or module versions alike).
pub fn tau_star(
    tau: &[usize],
    source: &SkeletizedColouredSurface,
    target: &SkeletizedColouredSurface,
    assoc: &Associator,
    hbar: usize,
    order: usize,
) -> Result<FMap, HopfError> {
    let phi = tau_morphism(tau, source, target)?;
    Ok(apply_morphism(&phi, assoc, hbar, order)?.0)
}

/// Disjoint union of one-vertex surfaces, each copy's half-edge i sent to
/// `shifts[c] + i` in the target (♣ to ♣).
pub fn splitting_morphism(
    parts: &[SkeletizedColouredSurface],
    shifts: &[usize],
    target: &SkeletizedColouredSurface,
) -> SurfaceMorphism {
    let mut union = parts[0].clone();
    let mut renames: Vec<BTreeMap<String, String>> =
        vec![union.graph.half_edges.iter().map(|h| (h.name.clone(), h.name.clone())).chain([("*".to_string(), "*".to_string())]).collect()];
    for p in &parts[1..] {
        let (u, r) = disjoint_union(&union, p);
        union = u;
        renames.push(r);
    }
    let mut vertex_map = BTreeMap::new();
    let mut half_edge_map = BTreeMap::new();
    for ((p, r), shift) in parts.iter().zip(&renames).zip(shifts) {
        vertex_map.insert(r["*"].clone(), "*".to_string());
        for h in &p.graph.half_edges {
            let img = if h.name == CLUB { CLUB.to_string() } else { (h.name.parse::<usize>().unwrap() + shift).to_string() };
            half_edge_map.insert(r[&h.name].clone(), img);
        }
    }
    SurfaceMorphism {
        source: union,
        target: target.clone(),
        vertex_map,
        half_edge_map,
        edge_map: BTreeMap::new(),
        space_maps: BTreeMap::new(),
    }
}

/// P^(n): Quant(Γ_H^(1))^{⊗n} → Quant(Γ_H^(n)), the j-th copy landing on
/// half-edges j, j+1.
pub fn p_star(mt: &ManinTriple, n: usize, assoc: &Associator, hbar: usize, order: usize) -> Result<FMap, HopfError> {
    let g1 = gamma_h(mt, 1, order);
    let parts = vec![g1; n];
    let shifts: Vec<usize> = (0..n).collect();
    let phi = splitting_morphism(&parts, &shifts, &gamma_h(mt, n, order));
    Ok(apply_morphism(&phi, assoc, hbar, order)?.0)
}

/// P_M^(2): Quant(Γ_H^(1)) ⊗ Quant(Γ_M^(0)) → Quant(Γ_M^(1)).
pub fn p_m_star(mt: &ManinTriple, m: &GSpace, assoc: &Associator, hbar: usize, order: usize) -> Result<FMap, HopfError> {
    let parts = vec![gamma_h(mt, 1, order), gamma_m(mt, m, 0, order)];
    let phi = splitting_morphism(&parts, &[0, 1], &gamma_m(mt, m, 1, order));
    Ok(apply_morphism(&phi, assoc, hbar, order)?.0)
}

/// T⁻¹ = Σ ℏ^k C_k with C₀ = T₀⁻¹ and C_k = −T₀⁻¹ Σ_{j<k} T_{k−j} C_j,
/// on the slots that are active at ℏ⁰.
pub fn invert_order_by_order(t: &FMap) -> Result<FMap, HopfError> {
    let act_src: Vec<usize> = (0..t.src.dim()).filter(|l| t.src.slot_ok(0, *l)).collect();
    let act_dst: Vec<usize> = (0..t.dst.dim()).filter(|l| t.dst.slot_ok(0, *l)).collect();
    if act_src.len() != act_dst.len() {
        return Err(HopfError::NotSquare(act_dst.len(), act_src.len()));
    }
    let pos_src: BTreeMap<usize, usize> = act_src.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let n = act_dst.len();
    let mut t0 = Mat::zeros(n, n);
    for (r, l) in act_dst.iter().enumerate() {
        for (c, v) in &t.mats[0].data[*l] {
            if let Some(cc) = pos_src.get(c) {
                t0.add_to(r, *cc, v);
            }
        }
    }
    let inv = t0.inverse().map_err(|k| HopfError::Singular(k.into_iter().map(|(i, v)| (act_src[i], v)).collect()))?;
    let mut c0 = FMap::zero(&t.dst, &t.src);
    for (r, row) in inv.data.iter().enumerate() {
        for (c, v) in row {
            c0.mats[0].add_to(act_src[r], act_dst[*c], v);
        }
    }
    let c0 = c0.masked();
    let mut out = c0.clone();
    for k in 1..=t.dst.hbar {
        // Σ_{j<k} T_{k−j} C_j is the ℏ^k part of T ∘ (C so far).
        let partial = t.compose(&out);
        let mut rhs = FMap::zero(&t.dst, &t.dst);
        rhs.mats[k] = partial.mats[k].clone();
        let ck = c0.compose(&rhs).scale(&-Q::one());
        out.mats[k] = out.mats[k].add(&ck.mats[k]);
        out = out.masked();
    }
    Ok(out)
}

/// m: A ⊗ A → A from the ⋆ structure constants.
pub fn multiplication_map(a: &QuantModuliAlgebra) -> FMap {
    let s = a.space();
    let n = a.dim();
    let mut m = FMap::zero(&s.tensor(&s), &s);
    for (k, c) in a.consts.iter().enumerate() {
        for ((i, j), v) in c {
            for (l, x) in v {
                m.mats[k].add_to(*l, i * n + j, x);
            }
        }
    }
    m.masked()
}

/// The ground ring as an FSpace.
pub fn scalars(like: &FSpace) -> FSpace {
    FSpace { degrees: vec![0], order: like.order, hbar: like.hbar, weight: like.weight }
}

pub fn unit_map(a: &QuantModuliAlgebra) -> FMap {
    let s = a.space();
    let mut m = FMap::zero(&scalars(&s), &s);
    m.set_column(0, &a.unit());
    m.masked()
}

/// Canonical identifications k ⊗ A ≅ A ≅ A ⊗ k are identities on indices.
fn relabel(m: &FMap, src: &FSpace, dst: &FSpace) -> FMap {
    FMap { src: src.clone(), dst: dst.clone(), mats: m.mats.clone() }
}

#[derive(Clone, Debug)]
pub struct HopfData {
    pub a: QuantModuliAlgebra,
    pub a2: QuantModuliAlgebra,
    pub delta: FMap,
    pub eps: FMap,
    pub s: FMap,
    pub p2: FMap,
}

pub fn coproduct(mt: &ManinTriple, a: &QuantModuliAlgebra, assoc: &Associator) -> Result<(FMap, FMap), HopfError> {
    let (hbar, order) = (a.hbar, a.classical.order);
    let d1 = tau_star(&[0, 2], &gamma_h(mt, 1, order), &gamma_h(mt, 2, order), assoc, hbar, order)?;
    let p2 = p_star(mt, 2, assoc, hbar, order)?;
    Ok((invert_order_by_order(&p2)?.compose(&d1), p2))
}

pub fn counit(mt: &ManinTriple, a: &QuantModuliAlgebra, assoc: &Associator) -> Result<FMap, HopfError> {
    let (hbar, order) = (a.hbar, a.classical.order);
    tau_star(&[0, 0], &gamma_h(mt, 1, order), &gamma_h(mt, 0, order), assoc, hbar, order)
}

/// f * g = m ∘ (f ⊗ g) ∘ Δ.
pub fn convolution(a: &QuantModuliAlgebra, delta: &FMap, f: &FMap, g: &FMap) -> FMap {
    multiplication_map(a).compose(&f.tensor(g)).compose(delta)
}

/// S = Σ_n (ηε − id)^{*n}, the convolution inverse of the identity.
pub fn antipode(a: &QuantModuliAlgebra, delta: &FMap, eps: &FMap) -> FMap {
    let s = a.space();
    let ee = unit_map(a).compose(eps);
    let f = ee.sub(&FMap::identity(&s));
    let mut power = ee.clone();
    let mut out = ee;
    for _ in 0..=(s.order + s.hbar) {
        power = convolution(a, delta, &f, &power);
        if power.is_zero() {
            break;
        }
        out = out.add(&power);
    }
    out
}

pub fn quantize_group(mt: &ManinTriple, assoc: &Associator, hbar: usize, order: usize) -> Result<HopfData, HopfError> {
    let a = quantize(&gamma_h(mt, 1, order), assoc, hbar, order)?;
    let (delta, p2) = coproduct(mt, &a, assoc)?;
    let eps = counit(mt, &a, assoc)?;
    let s = antipode(&a, &delta, &eps);
    let a2 = a.tensor(&a);
    Ok(HopfData { a, a2, delta, eps, s, p2 })
}

/// One named check with an optional witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub witness: Option<String>,
}

impl Check {
    pub fn ok(&self) -> bool {
        self.witness.is_none()
    }
}

fn compare(name: &str, x: &FMap, y: &FMap) -> Check {
    Check {
        name: name.into(),
        witness: x.first_difference(y).map(|(k, r, c, a, b)| format!("ℏ^{k} entry ({r}, {c}): {a} vs {b}")),
    }
}

/// Checks that φ(x ⋆ y) = φ(x) ⋆' φ(y) on basis pairs.
pub fn multiplicativity(name: &str, src: &QuantModuliAlgebra, dst: &QuantModuliAlgebra, phi: &FMap) -> Check {
    let s = src.space();
    let n = src.dim();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| s.degrees[*i] + s.degrees[*j] <= s.order)
        .collect();
    let images: Vec<Elem> = (0..n).map(|l| phi.column(l)).collect();
    let bad = pairs.into_par_iter().find_first(|(i, j)| {
        let lhs = phi.apply(&src.star(&s.basis_elem(*i), &s.basis_elem(*j)));
        let rhs = dst.star(&images[*i], &images[*j]);
        !dst.space().eq(&lhs, &rhs)
    });
    Check { name: name.into(), witness: bad.map(|(i, j)| format!("basis pair ({i}, {j})")) }
}

pub fn verify_hopf(mt: &ManinTriple, h: &HopfData, assoc: &Associator) -> Result<Vec<Check>, HopfError> {
    let s = h.a.space();
    let id = FMap::identity(&s);
    let (hbar, order) = (h.a.hbar, h.a.classical.order);
    let mut out = Vec::new();
    let left = h.delta.tensor(&id).compose(&h.delta);
    let right = id.tensor(&h.delta).compose(&h.delta);
    out.push(compare("coassociativity", &left, &right));
    let p3 = p_star(mt, 3, assoc, hbar, order)?;
    let tau = tau_star(&[0, 3], &gamma_h(mt, 1, order), &gamma_h(mt, 3, order), assoc, hbar, order)?;
    let direct = invert_order_by_order(&p3)?.compose(&tau);
    out.push(compare("coassociativity (direct triple coproduct)", &left, &direct));
    let k = scalars(&s);
    let eps_l = relabel(&h.eps.tensor(&id).compose(&h.delta), &s, &k.tensor(&s));
    let eps_r = relabel(&id.tensor(&h.eps).compose(&h.delta), &s, &s.tensor(&k));
    out.push(compare("left counit", &relabel(&eps_l, &s, &s), &id));
    out.push(compare("right counit", &relabel(&eps_r, &s, &s), &id));
    out.push(multiplicativity("coproduct multiplicative", &h.a, &h.a2, &h.delta));
    out.push(multiplicativity("counit multiplicative", &h.a, &scalar_algebra(&h.a), &h.eps));
    let ee = unit_map(&h.a).compose(&h.eps);
    out.push(compare("antipode (left)", &convolution(&h.a, &h.delta, &h.s, &id), &ee));
    out.push(compare("antipode (right)", &convolution(&h.a, &h.delta, &id, &h.s), &ee));
    let unit = h.a.unit();
    let d1 = h.delta.apply(&unit);
    out.push(Check {
        name: "coproduct of the unit".into(),
        witness: (!h.a2.space().eq(&d1, &h.a2.unit())).then(|| "Δ(1) ≠ 1 ⊗ 1".into()),
    });
    Ok(out)
}

/// The ground ring as a quantized algebra (Γ_H^(0) quantizes to it).
pub fn scalar_algebra(like: &QuantModuliAlgebra) -> QuantModuliAlgebra {
    let mut one = SparseVec::new();
    one.insert(0, Q::one());
    let mut consts = vec![BTreeMap::new(); like.hbar + 1];
    consts[0].insert((0, 0), one);
    QuantModuliAlgebra {
        classical: crate::moduli::ClassicalModuli {
            nvars: 0,
            order: like.classical.order,
            weight: like.classical.weight,
            basis: vec![crate::jet::Jet::one(0, like.classical.order)],
            pivots: vec![vec![]],
            degrees: vec![0],
        },
        hbar: like.hbar,
        consts,
        associator_id: like.associator_id.clone(),
    }
}

#[derive(Clone, Debug)]
pub struct CoactionData {
    pub b: QuantModuliAlgebra,
    pub ab: QuantModuliAlgebra,
    pub rho: FMap,
}

pub fn coaction(mt: &ManinTriple, m: &GSpace, assoc: &Associator, hbar: usize, order: usize) -> Result<CoactionData, HopfError> {
    let b = quantize(&gamma_m(mt, m, 0, order), assoc, hbar, order)?;
    let a = quantize(&gamma_h(mt, 1, order), assoc, hbar, order)?;
    let d1 = tau_star(&[0], &gamma_m(mt, m, 0, order), &gamma_m(mt, m, 1, order), assoc, hbar, order)?;
    let pm = p_m_star(mt, m, assoc, hbar, order)?;
    let rho = invert_order_by_order(&pm)?.compose(&d1);
    Ok(CoactionData { ab: a.tensor(&b), b, rho })
}

pub fn verify_coaction(h: &HopfData, c: &CoactionData) -> Vec<Check> {
    let sb = c.b.space();
    let idb = FMap::identity(&sb);
    let ida = FMap::identity(&h.a.space());
    let mut out = Vec::new();
    let left = h.delta.tensor(&idb).compose(&c.rho);
    let right = ida.tensor(&c.rho).compose(&c.rho);
    out.push(compare("coaction coassociativity", &left, &right));
    let counit = relabel(&h.eps.tensor(&idb).compose(&c.rho), &sb, &sb);
    out.push(compare("coaction counit", &counit, &idb));
    out.push(multiplicativity("coaction multiplicative", &c.b, &c.ab, &c.rho));
    out
}

/// Used by the reports: the index of a basis element with given pivot.
pub fn basis_index(a: &QuantModuliAlgebra, pivot: &[u8]) -> Option<usize> {
    a.classical.pivots.iter().position(|p| p == pivot)
}

/// A zero vector of the right shape, for building test inputs.
pub fn elem_from(a: &QuantModuliAlgebra, coords: &[(usize, usize, Q)]) -> Elem {
    let s = a.space();
    let mut e = s.zero();
    for (k, l, c) in coords {
        if !c.is_zero() {
            e[*k].insert(*l, c.clone());
        }
    }
    s.mask(&e)
}
