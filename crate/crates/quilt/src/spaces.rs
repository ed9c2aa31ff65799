//! Formal spaces with Lie algebra actions: derivations on jets with trusted
//! precision, the coisotropy and quasi-Poisson tests, chord series acting as
//! differential operators, invariant jets and the Poisson bracket of a
//! Poisson-Lie group.
//!
//! A jet's `order` is its trusted order throughout: every term of total
//! degree up to `order` is exact.

use crate::chords::{ChordSeries, Letter};
use crate::jet::{exp_degree, monomials_up_to, Exp, Jet};
use crate::liealg::{casimir, g_action_on_h_with, CasimirElement, LieAlgebra, ManinTriple, SideConvention};
use crate::linalg::{Echelon, SparseVec};
use crate::rational::Q;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("coordinate mismatch: derivation on {0} variables, jet on {1}")]
    CoordinateMismatch(usize, usize),
    #[error("precision exhausted: a derivation with constant terms needs trusted order ≥ 1")]
    PrecisionExhausted,
    #[error("strand {0} is not bound to any factor")]
    UnboundStrand(String),
}

/// A vector field Σ c_i ∂/∂x_i whose coefficients are exact up to degree
/// `precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub coeffs: Vec<Jet>,
    pub precision: usize,
}

impl Derivation {
    pub fn zero(nvars: usize, precision: usize) -> Self {
        Derivation { coeffs: vec![Jet::zero(nvars, precision); nvars], precision }
    }

    /// ∂/∂x_i.
    pub fn partial(nvars: usize, precision: usize, i: usize) -> Self {
        let mut d = Self::zero(nvars, precision);
        d.coeffs[i] = Jet::one(nvars, precision);
        d
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn has_constant_term(&self) -> bool {
        self.coeffs.iter().any(|c| !c.constant_term().is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        Derivation {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a.add(b)).collect(),
            precision: self.precision.min(o.precision),
        }
    }

    pub fn scale(&self, k: &Q) -> Self {
        Derivation { coeffs: self.coeffs.iter().map(|c| c.scale(k)).collect(), precision: self.precision }
    }

    /// The same field on a larger space: coordinate i becomes `map[i]`.
    pub fn relabel(&self, nvars: usize, map: &[usize]) -> Self {
        let mut coeffs = vec![Jet::zero(nvars, self.precision); nvars];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[map[i]] = c.relabel(nvars, map);
        }
        Derivation { coeffs, precision: self.precision }
    }

    /// [self, o] as a derivation, trusted one order less when either side
    /// has constant terms.
    pub fn bracket(&self, o: &Self) -> Result<Self, SpaceError> {
        let mut coeffs = Vec::with_capacity(self.nvars());
        for k in 0..self.nvars() {
            let a = apply_derivation(self, &o.coeffs[k])?;
            let b = apply_derivation(o, &self.coeffs[k])?;
            coeffs.push(a.sub(&b));
        }
        let precision = coeffs.iter().map(|c| c.order).min().unwrap_or(self.precision);
        Ok(Derivation { coeffs, precision })
    }
}

fn mul_to(a: &Jet, b: &Jet, order: usize, out: &mut BTreeMap<Exp, Q>) {
    for (e1, c1) in &a.terms {
        let d1 = exp_degree(e1);
        if d1 > order {
            continue;
        }
        for (e2, c2) in &b.terms {
            if d1 + exp_degree(e2) > order {
                continue;
            }
            let e: Exp = e1.iter().zip(e2).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert_with(Q::zero) += c1 * c2;
        }
    }
}

/// D(f). The result is trusted to min(precision, order f), one less when
/// some coefficient has a constant term.
pub fn apply_derivation(d: &Derivation, f: &Jet) -> Result<Jet, SpaceError> {
    if d.nvars() != f.nvars {
        return Err(SpaceError::CoordinateMismatch(d.nvars(), f.nvars));
    }
    let base = d.precision.min(f.order);
    let order = if d.has_constant_term() {
        base.checked_sub(1).ok_or(SpaceError::PrecisionExhausted)?
    } else {
        base
    };
    let mut acc = BTreeMap::new();
    for (i, c) in d.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let df = f.derivative(i);
        if df.is_zero() {
            continue;
        }
        mul_to(c, &df, order, &mut acc);
    }
    acc.retain(|_, c: &mut Q| !c.is_zero());
    Ok(Jet { nvars: f.nvars, order, terms: acc })
}

/// A formal space: jets in `coords` up to `order`, with one action field per
/// basis element of a Lie algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSpace {
    pub name: String,
    pub coords: Vec<String>,
    pub order: usize,
    pub fields: Vec<Derivation>,
}

impl GSpace {
    /// A point with the zero action of a `lie_dim`-dimensional algebra.
    pub fn point(lie_dim: usize) -> Self {
        // Zero fields are exact at every order.
        GSpace { name: "pt".into(), coords: vec![], order: 0, fields: vec![Derivation::zero(0, usize::MAX); lie_dim] }
    }

    /// The formal group H with the action of the double.
    pub fn group(mt: &ManinTriple, order: usize) -> Self {
        Self::group_with(mt, order, SideConvention::SELECTED)
    }

    pub fn group_with(mt: &ManinTriple, order: usize, side: SideConvention) -> Self {
        let fields = g_action_on_h_with(mt, order, side)
            .into_iter()
            .map(|coeffs| Derivation { coeffs, precision: order })
            .collect();
        GSpace { name: "H".into(), coords: mt.bialgebra.h.basis.clone(), order, fields }
    }

    pub fn nvars(&self) -> usize {
        self.coords.len()
    }

    pub fn lie_dim(&self) -> usize {
        self.fields.len()
    }

    /// V_ξ for ξ given in coordinates.
    pub fn field(&self, xi: &[Q]) -> Derivation {
        let mut d = Derivation::zero(self.nvars(), self.order);
        for (a, c) in xi.iter().enumerate() {
            if !c.is_zero() {
                d = d.add(&self.fields[a].scale(c));
            }
        }
        d
    }

    /// The sign s with [V_a, V_b] = s·V_{[a,b]} on every basis pair, if any.
    pub fn lie_sign(&self, g: &LieAlgebra) -> Option<i64> {
        let mut sign: Option<i64> = None;
        for a in 0..self.lie_dim() {
            for b in 0..self.lie_dim() {
                let lhs = self.fields[a].bracket(&self.fields[b]).ok()?;
                let rhs = self.field(&g.bracket(&g.unit(a), &g.unit(b)));
                let agree = |s: i64| {
                    lhs.coeffs
                        .iter()
                        .zip(&rhs.coeffs)
                        .all(|(l, r)| l.eq_to(&r.scale(&Q::int(s)), lhs.precision))
                };
                let ok: Vec<i64> = [1, -1].into_iter().filter(|s| agree(*s)).collect();
                sign = match (sign, ok.as_slice()) {
                    (_, []) => return None,
                    (None, [s]) => Some(*s),
                    (Some(s0), v) if v.contains(&s0) => Some(s0),
                    (None, _) => None,
                    _ => return None,
                };
            }
        }
        Some(sign.unwrap_or(1))
    }
}

/// Where the coisotropy or quasi-Poisson test fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub what: String,
    pub monomial: Exp,
    pub value: Q,
}

fn first_term(j: &Jet, what: String) -> Option<Witness> {
    j.terms.iter().next().map(|(e, c)| Witness { what, monomial: e.clone(), value: c.clone() })
}

/// Σ t^{ab} V_a ⊗ V_b vanishes as a symmetric tensor field.
pub fn coisotropic_stabilizers_check(x: &GSpace, t: &CasimirElement) -> Result<(), Witness> {
    let n = x.nvars();
    for k in 0..n {
        for l in k..n {
            let mut s = Jet::zero(n, x.order);
            for (a, b, tab) in t.entries() {
                s = s.add(&x.fields[a].coeffs[k].mul(&x.fields[b].coeffs[l]).scale(&tab));
            }
            if let Some(w) = first_term(&s, format!("component ({}, {})", x.coords[k], x.coords[l])) {
                return Err(w);
            }
        }
    }
    Ok(())
}

/// Σ t^{ab} V_a(f) V_b(g) = 0 for all monomials f, g of degree ≤ `degree`.
pub fn quasi_poisson_comm_check(x: &GSpace, t: &CasimirElement, degree: usize) -> Result<(), Witness> {
    let n = x.nvars();
    let monos = monomials_up_to(n, degree);
    let images: Vec<Vec<Jet>> = monos
        .iter()
        .map(|e| {
            let f = Jet::monomial(n, x.order, e.clone(), Q::one());
            x.fields.iter().map(|d| apply_derivation(d, &f).expect("order ≥ 1")).collect()
        })
        .collect();
    for (i, vf) in images.iter().enumerate() {
        for (j, vg) in images.iter().enumerate().skip(i) {
            let mut s: Option<Jet> = None;
            for (a, b, tab) in t.entries() {
                let term = vf[a].mul(&vg[b]).scale(&tab);
                s = Some(match s {
                    None => term,
                    Some(acc) => acc.add(&term),
                });
            }
            if let Some(s) = s {
                if let Some(w) = first_term(&s, format!("pair {:?}, {:?}", monos[i], monos[j])) {
                    return Err(w);
                }
            }
        }
    }
    Ok(())
}

/// A strand's action on the ambient jet space: the fields of its factor,
/// relabelled into the ambient coordinates, and whether it carries the
/// opposite invariant tensor.
#[derive(Clone, Debug)]
pub struct BoundStrand {
    pub fields: Vec<Derivation>,
    pub negative: bool,
}

impl BoundStrand {
    /// Bind to `space` whose coordinates sit at `map` among `nvars`.
    pub fn new(space: &GSpace, nvars: usize, map: &[usize], negative: bool) -> Self {
        BoundStrand { fields: space.fields.iter().map(|d| d.relabel(nvars, map)).collect(), negative }
    }
}

/// Chord series acting on jets in `nvars` variables: t^{uv} acts by
/// Σ t^{ab} V_a^{(u)} V_b^{(v)}, the right factor first.
#[derive(Clone, Debug)]
pub struct ChordAction {
    pub nvars: usize,
    pub t: Vec<(usize, usize, Q)>,
    pub strands: HashMap<String, BoundStrand>,
}

impl ChordAction {
    pub fn new(nvars: usize, t: &CasimirElement) -> Self {
        ChordAction { nvars, t: t.entries(), strands: HashMap::new() }
    }

    pub fn bind(&mut self, label: &str, s: BoundStrand) {
        self.strands.insert(label.to_string(), s);
    }

    fn strand(&self, u: &str) -> Result<&BoundStrand, SpaceError> {
        self.strands.get(u).ok_or_else(|| SpaceError::UnboundStrand(u.to_string()))
    }

    /// t^{uv} applied to f. Strands of opposite signs see no common
    /// invariant tensor and give zero.
    pub fn letter(&self, u: &str, v: &str, f: &Jet) -> Result<Jet, SpaceError> {
        let (su, sv) = (self.strand(u)?, self.strand(v)?);
        if su.negative != sv.negative {
            let order = f.order.saturating_sub(2);
            return Ok(Jet::zero(f.nvars, order));
        }
        let mut inner: BTreeMap<usize, Jet> = BTreeMap::new();
        let mut out: Option<Jet> = None;
        for (a, b, tab) in &self.t {
            if !inner.contains_key(b) {
                inner.insert(*b, apply_derivation(&sv.fields[*b], f)?);
            }
            let term = apply_derivation(&su.fields[*a], &inner[b])?.scale(tab);
            out = Some(match out {
                None => term,
                Some(acc) => acc.add(&term),
            });
        }
        let out = out.unwrap_or_else(|| Jet::zero(f.nvars, f.order));
        Ok(if su.negative { out.neg() } else { out })
    }

    /// The ℏ-graded image of f: entry k collects the words of length k,
    /// each applied letter by letter in word order.
    pub fn apply(&self, s: &ChordSeries, f: &Jet) -> Result<Vec<Jet>, SpaceError> {
        for u in s.strands() {
            self.strand(u)?;
        }
        let names = s.strands();
        let mut out: Vec<Option<Jet>> = vec![None; s.trunc() + 1];
        // Words come sorted, so consecutive words share prefixes.
        let mut stack: Vec<(Letter, Jet)> = Vec::new();
        for (w, c) in s.terms() {
            let common = stack.iter().zip(w.iter()).take_while(|((l, _), m)| l == *m).count();
            stack.truncate(common);
            for l in &w[common..] {
                let prev = stack.last().map(|(_, j)| j).unwrap_or(f);
                let next = self.letter(&names[l.0 as usize], &names[l.1 as usize], prev)?;
                stack.push((*l, next));
            }
            let img = stack.last().map(|(_, j)| j).unwrap_or(f).scale(c);
            let slot = &mut out[w.len()];
            *slot = Some(match slot.take() {
                None => img,
                Some(acc) => acc.add(&img),
            });
        }
        Ok(out
            .into_iter()
            .enumerate()
            .map(|(k, j)| j.unwrap_or_else(|| Jet::zero(f.nvars, f.order.saturating_sub(k))))
            .collect())
    }
}

/// Convenience wrapper for `ChordAction::apply`.
pub fn act_chord(s: &ChordSeries, action: &ChordAction, f: &Jet) -> Result<Vec<Jet>, SpaceError> {
    action.apply(s, f)
}

/// The lowest monomial of a jet in the column order used by `invariants`:
/// degree ascending, then lexicographically descending.
pub fn pivot_monomial(j: &Jet) -> Option<&Exp> {
    j.terms.keys().min_by(|a, b| exp_degree(a).cmp(&exp_degree(b)).then_with(|| b.cmp(a)))
}

/// Reduced echelon basis (pivot at the lowest monomial, degrees ascending)
/// of the polynomials of degree ≤ `degree` killed by every derivation, up to
/// the derivation's trusted order.
pub fn invariants(nvars: usize, derivations: &[Derivation], degree: usize) -> Result<Vec<Jet>, SpaceError> {
    let monos = monomials_up_to(nvars, degree);
    let index: HashMap<&Exp, usize> = monos.iter().enumerate().map(|(i, e)| (e, i)).collect();
    // Each (derivation, output monomial) is one linear equation.
    let mut eqs: BTreeMap<(usize, Exp), SparseVec> = BTreeMap::new();
    for (di, d) in derivations.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        for (col, e) in monos.iter().enumerate() {
            let f = Jet::monomial(nvars, degree, e.clone(), Q::one());
            let img = apply_derivation(d, &f)?;
            for (m, c) in img.terms {
                eqs.entry((di, m)).or_default().insert(col, c);
            }
        }
    }
    let rows: Vec<SparseVec> = eqs.into_values().collect();
    let kernel = crate::linalg::kernel(&rows, monos.len());
    let mut ech = Echelon::new(false);
    for v in &kernel {
        ech.insert(v);
    }
    let _ = index;
    Ok(ech
        .rows()
        .values()
        .map(|row| {
            let mut j = Jet::zero(nvars, degree);
            for (c, x) in row {
                j.terms.insert(monos[*c].clone(), x.clone());
            }
            j
        })
        .collect())
}

/// {f, g} = ½ Σ_i (V_{e^i} f · V_{e_i} g − V_{e_i} f · V_{e^i} g), for a
/// space with the action of a double whose first n basis vectors span h and
/// the last n the dual basis.
pub fn poisson_bracket(x: &GSpace, mt: &ManinTriple, f: &Jet, g: &Jet) -> Result<Jet, SpaceError> {
    let n = mt.n;
    let half = Q::new(1, 2);
    let mut out: Option<Jet> = None;
    for i in 0..n {
        let (lo, up) = (&x.fields[i], &x.fields[n + i]);
        let term = apply_derivation(up, f)?
            .mul(&apply_derivation(lo, g)?)
            .sub(&apply_derivation(lo, f)?.mul(&apply_derivation(up, g)?));
        out = Some(match out {
            None => term,
            Some(acc) => acc.add(&term),
        });
    }
    Ok(out.unwrap_or_else(|| Jet::zero(f.nvars, f.order)).scale(&half))
}

/// The Poisson bivector π^{kl} = {x_k, x_l} of the formal group H.
pub fn poisson_bivector(mt: &ManinTriple, order: usize) -> Vec<Vec<Jet>> {
    let h = GSpace::group(mt, order + 1);
    let n = h.nvars();
    let vars: Vec<Jet> = (0..n).map(|i| Jet::var(n, order + 1, i)).collect();
    (0..n)
        .map(|k| {
            (0..n)
                .map(|l| poisson_bracket(&h, mt, &vars[k], &vars[l]).expect("order ≥ 1").truncate(order))
                .collect()
        })
        .collect()
}

/// The invariant tensor of the double, for convenience.
pub fn double_tensor(mt: &ManinTriple) -> CasimirElement {
    casimir(mt)
}
