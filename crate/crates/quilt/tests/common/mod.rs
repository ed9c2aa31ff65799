//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_traits::{One, Zero};
use quilt::ordcat::{FinSet, OrderedMorphism};
use quilt::rational::Q;
use std::collections::BTreeMap;

/// Dense Gauss-Jordan elimination. Returns a particular solution (free
/// variables zero) and the nullity, or `None` when inconsistent.
pub fn dense_solve(a: &[Vec<Q>], b: &[Q]) -> Option<(Vec<Q>, usize)> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Q>> = a.iter().zip(b).map(|(r, x)| r.iter().cloned().chain([x.clone()]).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Q::one() / m[r][c].clone();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for k in 0..=cols {
                    let v = &m[r][k] * &f;
                    m[i][k] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if m[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (i, c) in pivots.iter().enumerate() {
        x[*c] = m[i][cols].clone();
    }
    Some((x, cols - pivots.len()))
}

/// Three-strand chord algebra as free(A, B) ⊗ k[c], c = t12 + t13 + t23
/// central; elements map (word in {0 = A, 1 = B}, power of c) to
/// coefficients, truncated at total degree `trunc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CModel {
    pub trunc: usize,
    pub terms: BTreeMap<(Vec<u8>, usize), Q>,
}

impl CModel {
    pub fn scalar(trunc: usize, x: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !x.is_zero() {
            terms.insert((vec![], 0), x);
        }
        CModel { trunc, terms }
    }
    pub fn a(trunc: usize) -> Self {
        CModel { trunc, terms: [((vec![0], 0), Q::one())].into_iter().collect() }
    }
    pub fn b(trunc: usize) -> Self {
        CModel { trunc, terms: [((vec![1], 0), Q::one())].into_iter().collect() }
    }
    pub fn c(trunc: usize) -> Self {
        CModel { trunc, terms: [((vec![], 1), Q::one())].into_iter().collect() }
    }
    /// t13 = c − A − B.
    pub fn t13(trunc: usize) -> Self {
        Self::c(trunc).add(&Self::a(trunc).scale(&-Q::one())).add(&Self::b(trunc).scale(&-Q::one()))
    }
    pub fn add(&self, o: &Self) -> Self {
        let mut t = self.terms.clone();
        for (k, v) in &o.terms {
            *t.entry(k.clone()).or_insert_with(Q::zero) += v;
        }
        t.retain(|_, v| !v.is_zero());
        CModel { trunc: self.trunc, terms: t }
    }
    pub fn scale(&self, x: &Q) -> Self {
        let mut t: BTreeMap<_, Q> = self.terms.iter().map(|(k, v)| (k.clone(), v * x)).collect();
        t.retain(|_, v| !v.is_zero());
        CModel { trunc: self.trunc, terms: t }
    }
    pub fn mul(&self, o: &Self) -> Self {
        let mut t: BTreeMap<(Vec<u8>, usize), Q> = BTreeMap::new();
        for ((w1, c1), v1) in &self.terms {
            for ((w2, c2), v2) in &o.terms {
                if w1.len() + c1 + w2.len() + c2 > self.trunc {
                    continue;
                }
                let mut w = w1.clone();
                w.extend(w2);
                *t.entry((w, c1 + c2)).or_insert_with(Q::zero) += v1 * v2;
            }
        }
        t.retain(|_, v| !v.is_zero());
        CModel { trunc: self.trunc, terms: t }
    }
    pub fn exp(&self) -> Self {
        let mut out = Self::scalar(self.trunc, Q::one());
        let mut p = out.clone();
        for k in 1..=self.trunc {
            p = p.mul(self).scale(&Q::new(1, k as i64));
            out = out.add(&p);
        }
        out
    }
    pub fn inverse(&self) -> Self {
        let one = Self::scalar(self.trunc, Q::one());
        let y = one.add(&self.scale(&-Q::one()));
        let mut out = one.clone();
        let mut p = one;
        for _ in 0..self.trunc {
            p = p.mul(&y);
            out = out.add(&p);
        }
        out
    }
    /// Substitute the two free generators of a series in A, B.
    pub fn subst(f: &BTreeMap<Vec<u8>, Q>, x: &Self, y: &Self, trunc: usize) -> Self {
        let mut out = Self::scalar(trunc, Q::zero());
        for (w, v) in f {
            let mut m = Self::scalar(trunc, v.clone());
            for l in w {
                m = m.mul(if *l == 0 { x } else { y });
            }
            out = out.add(&m);
        }
        out
    }
    pub fn degree_part(&self, d: usize) -> BTreeMap<(Vec<u8>, usize), Q> {
        self.terms.iter().filter(|((w, c), _)| w.len() + c == d).map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

/// Both hexagon residuals of a series in A, B, in the reading-order
/// convention, computed in the central-extension model.
pub fn model_hexagons(phi: &BTreeMap<Vec<u8>, Q>, trunc: usize) -> (CModel, CModel) {
    let (a, b, c) = (CModel::a(trunc), CModel::b(trunc), CModel::t13(trunc));
    let half = Q::new(1, 2);
    let e = |x: &CModel| x.scale(&half).exp();
    let f = |x: &CModel, y: &CModel| CModel::subst(phi, x, y, trunc);
    let lhs1 = e(&c.add(&b));
    let rhs1 = f(&a, &b).mul(&e(&b)).mul(&f(&c, &b).inverse()).mul(&e(&c)).mul(&f(&c, &a));
    let lhs2 = e(&a.add(&c));
    let rhs2 = f(&a, &b).inverse().mul(&e(&a)).mul(&f(&a, &c)).mul(&e(&c)).mul(&f(&b, &c).inverse());
    (lhs1.add(&rhs1.scale(&-Q::one())), lhs2.add(&rhs2.scale(&-Q::one())))
}

/// All words of length `d` in {0, 1}.
pub fn ab_words(d: usize) -> Vec<Vec<u8>> {
    (0..1u32 << d).map(|m| (0..d).map(|i| ((m >> (d - 1 - i)) & 1) as u8).collect()).collect()
}

/// Solve the hexagon system plus group-likeness degree by degree in the
/// model, with every word in A, B an unknown. Returns the solution by
/// degree and the nullity at each degree.
pub fn model_associator(trunc: usize) -> (BTreeMap<Vec<u8>, Q>, Vec<usize>) {
    let mut phi: BTreeMap<Vec<u8>, Q> = [(vec![], Q::one())].into_iter().collect();
    let mut nullities = Vec::new();
    for d in 1..=trunc {
        let words = ab_words(d);
        let base = model_hexagons(&phi, d);
        let mut keys: Vec<(usize, (Vec<u8>, usize))> = Vec::new();
        let mut cols: Vec<BTreeMap<(usize, (Vec<u8>, usize)), Q>> = Vec::new();
        for w in &words {
            let mut p = phi.clone();
            p.insert(w.clone(), Q::one());
            let r = model_hexagons(&p, d);
            let mut col = BTreeMap::new();
            for (i, (x, y)) in [(&r.0, &base.0), (&r.1, &base.1)].into_iter().enumerate() {
                for (k, v) in x.add(&y.scale(&-Q::one())).degree_part(d) {
                    col.insert((i, k), v);
                }
            }
            cols.push(col);
        }
        let mut rhs_map = BTreeMap::new();
        for (i, x) in [&base.0, &base.1].into_iter().enumerate() {
            for (k, v) in x.degree_part(d) {
                rhs_map.insert((i, k), -v);
            }
        }
        for c in &cols {
            keys.extend(c.keys().cloned());
        }
        keys.extend(rhs_map.keys().cloned());
        keys.sort();
        keys.dedup();
        let mut a: Vec<Vec<Q>> = keys.iter().map(|k| cols.iter().map(|c| c.get(k).cloned().unwrap_or_else(Q::zero)).collect()).collect();
        let mut b: Vec<Q> = keys.iter().map(|k| rhs_map.get(k).cloned().unwrap_or_else(Q::zero)).collect();
        // Group-likeness at degree d: the shuffle-coproduct of Φ_d must equal
        // the sum of products of lower pieces; written as linear rows in the
        // unknowns via the shuffle coefficients.
        let lower: BTreeMap<Vec<u8>, Q> = phi.clone();
        for i in 1..d {
            for u in ab_words(i) {
                for v in ab_words(d - i) {
                    // coefficient of u ⊗ v in Δ(Φ_d) = Σ_w x_w · #(ways w splits as u ⧢ v)
                    let mut row = vec![Q::zero(); words.len()];
                    for (k, w) in words.iter().enumerate() {
                        row[k] = Q::int(shuffle_count(w, &u, &v));
                    }
                    let want = lower.get(&u).cloned().unwrap_or_else(Q::zero) * lower.get(&v).cloned().unwrap_or_else(Q::zero);
                    a.push(row);
                    b.push(want);
                }
            }
        }
        // Units: deleting strand 3 (resp. 1) kills B (resp. A), so the pure
        // powers of the surviving letter must vanish.
        for l in [0u8, 1] {
            let mut row = vec![Q::zero(); words.len()];
            let k = words.iter().position(|w| w.iter().all(|x| *x == l)).unwrap();
            row[k] = Q::one();
            a.push(row);
            b.push(Q::zero());
        }
        let (x, nullity) = dense_solve(&a, &b).expect("model hexagon system consistent");
        nullities.push(nullity);
        for (w, v) in words.iter().zip(x) {
            if !v.is_zero() {
                phi.insert(w.clone(), v);
            }
        }
    }
    (phi, nullities)
}

fn shuffle_count(w: &[u8], u: &[u8], v: &[u8]) -> i64 {
    if u.is_empty() {
        return (w == v) as i64;
    }
    if v.is_empty() {
        return (w == u) as i64;
    }
    let mut n = 0;
    if w[0] == u[0] {
        n += shuffle_count(&w[1..], &u[1..], v);
    }
    if w[0] == v[0] {
        n += shuffle_count(&w[1..], u, &v[1..]);
    }
    n
}

/// All surjective ordered morphisms from `src` onto targets labelled with
/// `prefix` and an index.
pub fn ordered_surjections(src: &[String], prefix: &str) -> Vec<OrderedMorphism> {
    let n = src.len();
    let mut out = Vec::new();
    for m in 1..=n.max(1) {
        if n == 0 {
            break;
        }
        let targets: Vec<String> = (1..=m).map(|i| format!("{prefix}{i}")).collect();
        // assignments as base-m numbers
        let total = m.pow(n as u32);
        for code in 0..total {
            let mut assign = vec![0usize; n];
            let mut c = code;
            for a in assign.iter_mut() {
                *a = c % m;
                c /= m;
            }
            let mut fibers: Vec<Vec<String>> = vec![Vec::new(); m];
            for (i, a) in assign.iter().enumerate() {
                fibers[*a].push(src[i].clone());
            }
            if fibers.iter().any(|f| f.is_empty()) {
                continue;
            }
            for orders in fiber_orders(&fibers) {
                let map = targets.iter().cloned().zip(orders).collect();
                out.push(OrderedMorphism::new(FinSet::new(src.to_vec()).unwrap(), FinSet::new(targets.clone()).unwrap(), &map).unwrap());
            }
        }
    }
    out
}

fn fiber_orders(fibers: &[Vec<String>]) -> Vec<Vec<Vec<String>>> {
    let mut acc: Vec<Vec<Vec<String>>> = vec![Vec::new()];
    for f in fibers {
        let perms = permutations(f);
        let mut next = Vec::new();
        for a in &acc {
            for p in &perms {
                let mut x = a.clone();
                x.push(p.clone());
                next.push(x);
            }
        }
        acc = next;
    }
    acc
}

pub fn permutations(xs: &[String]) -> Vec<Vec<String>> {
    if xs.len() <= 1 {
        return vec![xs.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..xs.len() {
        let mut rest = xs.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// A three-strand chord series in the model: t12 = A, t23 = B,
/// t13 = c − A − B.
pub fn to_model(x: &quilt::chords::ChordSeries, trunc: usize) -> CModel {
    let letter = |l: &(u8, u8)| match l {
        (0, 1) => CModel::a(trunc),
        (1, 2) => CModel::b(trunc),
        (0, 2) => CModel::t13(trunc),
        _ => panic!("not a three-strand chord: {l:?}"),
    };
    let mut out = CModel::scalar(trunc, Q::zero());
    for (w, v) in x.terms() {
        let mut m = CModel::scalar(trunc, v.clone());
        for l in w {
            m = m.mul(&letter(l));
        }
        out = out.add(&m);
    }
    out
}

/// A series in the free letters A, B as a model element.
pub fn ab_to_model(f: &BTreeMap<Vec<u8>, Q>, trunc: usize) -> CModel {
    CModel::subst(f, &CModel::a(trunc), &CModel::b(trunc), trunc)
}
