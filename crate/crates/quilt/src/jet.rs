//! Truncated polynomial rings: jets of functions at the origin.

use crate::rational::{fmt_q, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

pub type Exp = Vec<u8>;

/// A polynomial in `nvars` variables with every monomial of total degree
/// above `order` discarded.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Jet {
    pub nvars: usize,
    pub order: usize,
    pub terms: BTreeMap<Exp, Q>,
}

pub fn exp_degree(e: &[u8]) -> usize {
    e.iter().map(|x| *x as usize).sum()
}

impl Jet {
    pub fn zero(nvars: usize, order: usize) -> Self {
        Jet { nvars, order, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, order: usize, c: Q) -> Self {
        let mut j = Self::zero(nvars, order);
        if !c.is_zero() {
            j.terms.insert(vec![0; nvars], c);
        }
        j
    }

    pub fn one(nvars: usize, order: usize) -> Self {
        Self::constant(nvars, order, Q::one())
    }

    pub fn var(nvars: usize, order: usize, i: usize) -> Self {
        let mut j = Self::zero(nvars, order);
        if order >= 1 {
            let mut e = vec![0; nvars];
            e[i] = 1;
            j.terms.insert(e, Q::one());
        }
        j
    }

    pub fn monomial(nvars: usize, order: usize, e: Exp, c: Q) -> Self {
        let mut j = Self::zero(nvars, order);
        if exp_degree(&e) <= order && !c.is_zero() {
            j.terms.insert(e, c);
        }
        j
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u8]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&vec![0; self.nvars])
    }

    /// Lowest total degree present, if any.
    pub fn valuation(&self) -> Option<usize> {
        self.terms.keys().map(|e| exp_degree(e)).min()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut j = Self::zero(self.nvars, order.min(self.order));
        j.terms = self.terms.iter().filter(|(e, _)| exp_degree(e) <= j.order).map(|(e, c)| (e.clone(), c.clone())).collect();
        j
    }

    /// Same polynomial with a different nominal order (dropping terms above it).
    pub fn with_order(&self, order: usize) -> Self {
        let mut j = self.truncate(order);
        j.order = order;
        j
    }

    pub fn degree_part(&self, d: usize) -> Self {
        let mut j = Self::zero(self.nvars, self.order);
        j.terms = self.terms.iter().filter(|(e, _)| exp_degree(e) == d).map(|(e, c)| (e.clone(), c.clone())).collect();
        j
    }

    fn check(&self, o: &Self) {
        assert_eq!(self.nvars, o.nvars, "jets over different coordinates");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let order = self.order.min(o.order);
        let mut j = self.truncate(order);
        for (e, c) in &o.terms {
            if exp_degree(e) > order {
                continue;
            }
            let x = j.terms.entry(e.clone()).or_insert_with(Q::zero);
            *x += c;
            if x.is_zero() {
                j.terms.remove(e);
            }
        }
        j
    }

    pub fn scale(&self, k: &Q) -> Self {
        let mut j = Self::zero(self.nvars, self.order);
        if !k.is_zero() {
            j.terms = self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect();
        }
        j
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let order = self.order.min(o.order);
        let mut acc: BTreeMap<Exp, Q> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            let d1 = exp_degree(e1);
            for (e2, c2) in &o.terms {
                if d1 + exp_degree(e2) > order {
                    continue;
                }
                let e: Exp = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Q::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Jet { nvars: self.nvars, order, terms: acc }
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::one(self.nvars, self.order);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// ∂/∂x_i; the order drops by one.
    pub fn derivative(&self, i: usize) -> Self {
        let mut j = Self::zero(self.nvars, self.order.saturating_sub(1));
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            if exp_degree(&f) <= j.order {
                j.terms.insert(f, c * Q::int(e[i] as i64));
            }
        }
        j
    }

    /// f(g_1, ..., g_n) for jets g_i without constant term. The result is
/// trusted to the smallest order involved.
    pub fn compose(&self, gs: &[Jet]) -> Self {
        assert_eq!(gs.len(), self.nvars);
        let nv = gs.first().map(|g| g.nvars).unwrap_or(0);
        let order = gs.iter().map(|g| g.order).min().unwrap_or(self.order).min(self.order);
        for g in gs {
            assert!(g.constant_term().is_zero(), "substitution needs vanishing constant terms");
        }
        let mut powers: Vec<Vec<Jet>> = gs.iter().map(|_| vec![Jet::one(nv, order)]).collect();
        let mut out = Jet::zero(nv, order);
        for (e, c) in &self.terms {
            if exp_degree(e) > order {
                continue;
            }
            let mut m = Jet::constant(nv, order, c.clone());
            for (i, k) in e.iter().enumerate() {
                while powers[i].len() <= *k as usize {
                    let next = powers[i].last().unwrap().mul(&gs[i]).with_order(order);
                    powers[i].push(next);
                }
                m = m.mul(&powers[i][*k as usize]).with_order(order);
            }
            out = out.add(&m);
        }
        out
    }

    /// Embed into a larger set of variables: variable i goes to `map[i]`.
    pub fn relabel(&self, nvars: usize, map: &[usize]) -> Self {
        let mut j = Self::zero(nvars, self.order);
        for (e, c) in &self.terms {
            let mut f = vec![0u8; nvars];
            for (i, k) in e.iter().enumerate() {
                f[map[i]] += k;
            }
            *j.terms.entry(f).or_insert_with(Q::zero) += c;
        }
        j.terms.retain(|_, c| !c.is_zero());
        j
    }

    /// Agreement of two jets up to total degree `d`.
    pub fn eq_to(&self, o: &Self, d: usize) -> bool {
        self.truncate(d).terms == o.truncate(d).terms
    }
}

/// All exponent vectors in `n` variables of total degree `d`, in
/// lexicographically descending order.
pub fn monomials_of_degree(n: usize, d: usize) -> Vec<Exp> {
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for k in (0..=d).rev() {
        for mut rest in monomials_of_degree(n - 1, d - k) {
            rest.insert(0, k as u8);
            out.push(rest);
        }
    }
    out
}

/// Monomials of degree ≤ d, ascending by degree.
pub fn monomials_up_to(n: usize, d: usize) -> Vec<Exp> {
    (0..=d).flat_map(|k| monomials_of_degree(n, k)).collect()
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O({})", self.order + 1);
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k > 0)
                    .map(|(i, k)| if *k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
                    .collect();
                if mono.is_empty() { fmt_q(c) } else { format!("{}*{}", fmt_q(c), mono.join("*")) }
            })
            .collect();
        write!(f, "{} + O({})", parts.join(" + "), self.order + 1)
    }
}
