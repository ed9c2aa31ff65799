//! Sparse exact linear algebra over the rationals.
//!
//! Columns are plain `usize` indices; callers map their own keys (words,
//! monomials) onto columns so that pivot choice follows their order.

use crate::rational::Q;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

pub type SparseVec = BTreeMap<usize, Q>;

pub fn axpy(y: &mut SparseVec, a: &Q, x: &SparseVec) {
    if a.is_zero() {
        return;
    }
    for (k, v) in x {
        let e = y.entry(*k).or_insert_with(Q::zero);
        *e += a * v;
        if e.is_zero() {
            y.remove(k);
        }
    }
}

/// Incremental reduced row echelon form. The pivot of a row is its largest
/// column when `pivot_high` is set, otherwise its smallest.
#[derive(Clone, Debug)]
pub struct Echelon {
    pivot_high: bool,
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new(pivot_high: bool) -> Self {
        Echelon { pivot_high, rows: BTreeMap::new() }
    }

    fn pivot_of(&self, v: &SparseVec) -> Option<usize> {
        if self.pivot_high {
            v.keys().next_back().copied()
        } else {
            v.keys().next().copied()
        }
    }

    /// Reduce `v` against the stored rows (full reduction).
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut v = v.clone();
        let cols: Vec<usize> = v.keys().copied().collect();
        // Reduce pivots in an order that never reintroduces an eliminated one.
        let mut pending: Vec<usize> = cols;
        if self.pivot_high {
            pending.sort_unstable_by(|a, b| b.cmp(a));
        } else {
            pending.sort_unstable();
        }
        loop {
            let next = v.keys().copied().filter(|c| self.rows.contains_key(c));
            let c = if self.pivot_high { next.max() } else { next.min() };
            let Some(c) = c else { break };
            let coef = v[&c].clone();
            let row = &self.rows[&c];
            axpy(&mut v, &(-coef), row);
        }
        let _ = pending;
        v
    }

    /// Insert a vector; returns true if it increased the rank.
    pub fn insert(&mut self, v: &SparseVec) -> bool {
        let mut r = self.reduce(v);
        let Some(p) = self.pivot_of(&r) else { return false };
        let inv = Q::one() / r[&p].clone();
        for x in r.values_mut() {
            *x *= &inv;
        }
        for row in self.rows.values_mut() {
            if let Some(c) = row.get(&p).cloned() {
                axpy(row, &(-c), &r);
            }
        }
        r.retain(|_, x| !x.is_zero());
        self.rows.insert(p, r);
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &usize> {
        self.rows.keys()
    }

    pub fn rows(&self) -> &BTreeMap<usize, SparseVec> {
        &self.rows
    }

    pub fn is_pivot(&self, c: usize) -> bool {
        self.rows.contains_key(&c)
    }
}

/// Solve `A x = b` for a sparse system given row by row. Free variables are
/// assigned by `free_value`. Returns `None` when inconsistent.
pub fn solve_affine(
    rows: &[(SparseVec, Q)],
    nvars: usize,
    free_value: impl Fn(usize) -> Q,
) -> Option<Vec<Q>> {
    // Augmented column `nvars` carries the right-hand side; pivots are taken
    // at the smallest variable index.
    let mut ech = Echelon::new(false);
    for (a, b) in rows {
        let mut v = a.clone();
        if !b.is_zero() {
            v.insert(nvars, b.clone());
        }
        ech.insert(&v);
    }
    if ech.is_pivot(nvars) {
        return None;
    }
    let mut x: Vec<Q> = (0..nvars).map(|i| if ech.is_pivot(i) { Q::zero() } else { free_value(i) }).collect();
    for (p, row) in ech.rows() {
        let mut val = row.get(&nvars).cloned().unwrap_or_else(Q::zero);
        for (c, a) in row {
            if *c != *p && *c < nvars {
                val -= a * &x[*c];
            }
        }
        x[*p] = val;
    }
    Some(x)
}

/// Basis of the kernel of the linear map whose rows are given.
pub fn kernel(rows: &[SparseVec], nvars: usize) -> Vec<SparseVec> {
    let mut ech = Echelon::new(false);
    for r in rows {
        ech.insert(r);
    }
    let mut out = Vec::new();
    for f in 0..nvars {
        if ech.is_pivot(f) {
            continue;
        }
        let mut v = SparseVec::new();
        v.insert(f, Q::one());
        for (p, row) in ech.rows() {
            if let Some(a) = row.get(&f) {
                v.insert(*p, -a.clone());
            }
        }
        out.push(v);
    }
    out
}

/// Dense matrix helpers used by the order-by-order inversions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BTreeMap<usize, Q>>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![BTreeMap::new(); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i].insert(i, Q::one());
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.data[r].get(&c).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &Q) {
        if v.is_zero() {
            return;
        }
        let e = self.data[r].entry(c).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.data[r].remove(&c);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_empty())
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for (r, row) in self.data.iter().enumerate() {
            for (k, a) in row {
                for (c, b) in &other.data[*k] {
                    out.add_to(r, *c, &(a * b));
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        let mut out = self.clone();
        for (r, row) in other.data.iter().enumerate() {
            for (c, v) in row {
                out.add_to(r, *c, v);
            }
        }
        out
    }

    pub fn scale(&self, s: &Q) -> Mat {
        let mut out = Mat::zeros(self.rows, self.cols);
        for (r, row) in self.data.iter().enumerate() {
            for (c, v) in row {
                out.add_to(r, *c, &(v * s));
            }
        }
        out
    }

    /// Exact inverse; on failure returns a nonzero kernel vector.
    pub fn inverse(&self) -> Result<Mat, SparseVec> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut ech = Echelon::new(false);
        // Row i of [A | I] with the identity part shifted by n.
        let mut cols_rows: Vec<SparseVec> = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = self.data[i].clone();
            v.insert(n + i, Q::one());
            cols_rows.push(v);
        }
        for v in &cols_rows {
            ech.insert(v);
        }
        if (0..n).any(|c| !ech.is_pivot(c)) {
            let k = kernel(&self.data, n);
            return Err(k.into_iter().next().unwrap_or_default());
        }
        let mut inv = Mat::zeros(n, n);
        for (p, row) in ech.rows() {
            for (c, v) in row.range(n..) {
                inv.data[*p].insert(c - n, v.clone());
            }
        }
        Ok(inv)
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for (r, row) in self.data.iter().enumerate() {
            for (c, v) in row {
                out.data[*c].insert(r, v.clone());
            }
        }
        out
    }
}
