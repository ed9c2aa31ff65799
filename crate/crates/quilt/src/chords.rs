//! Horizontal chord algebra on named strands.
//!
//! Letters are index pairs `(i, j)` with `i < j` into the strand list. The
//! level of a letter is `j`. Words with non-increasing levels form a basis of
//! the algebra modulo the infinitesimal braid relations; `normal_word` rewrites
//! any word into that basis.

use crate::linalg::{Echelon, SparseVec};
use crate::rational::{fmt_q, parse_q, q, Q};
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;
use thiserror::Error;

pub type Letter = (u8, u8);
pub type Word = Vec<Letter>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChordError {
    #[error("strand sets differ: {0:?} vs {1:?}")]
    StrandMismatch(Vec<String>, Vec<String>),
    #[error("unknown strand `{0}`")]
    UnknownStrand(String),
    #[error("strand label `{0}` already present")]
    Collision(String),
    #[error("renaming is not injective")]
    NotInjective,
    #[error("constant term must be {0}")]
    ConstantTerm(&'static str),
    #[error("malformed chord series: {0}")]
    Parse(String),
}

fn level(l: Letter) -> u8 {
    l.1
}

pub fn letter(a: u8, b: u8) -> Letter {
    assert_ne!(a, b, "chord on a single strand");
    if a < b { (a, b) } else { (b, a) }
}

pub fn is_normal(w: &[Letter]) -> bool {
    w.windows(2).all(|p| level(p[0]) >= level(p[1]))
}

/// `[x, y]` for `level(x) < level(y)`, as a combination of two-letter words
/// at level `level(y)`.
fn bracket(x: Letter, y: Letter) -> Vec<(Word, i64)> {
    let (i, j) = x;
    let (k, l) = y;
    debug_assert!(j < l);
    if k == i {
        // [t_ij, t_il] = t_il t_jl - t_jl t_il
        vec![(vec![(i, l), (j, l)], 1), (vec![(j, l), (i, l)], -1)]
    } else if k == j {
        // [t_ij, t_jl] = t_jl t_il - t_il t_jl
        vec![(vec![(j, l), (i, l)], 1), (vec![(i, l), (j, l)], -1)]
    } else {
        Vec::new()
    }
}

type Combo = Vec<(Word, i64)>;

static NF_CACHE: Lazy<RwLock<HashMap<Word, std::sync::Arc<Combo>>>> = Lazy::new(|| RwLock::new(HashMap::new()));

fn add_into(acc: &mut HashMap<Word, i64>, w: Word, c: i64) {
    if c == 0 {
        return;
    }
    let e = acc.entry(w).or_insert(0);
    *e += c;
}

fn finish(acc: HashMap<Word, i64>) -> Combo {
    let mut v: Combo = acc.into_iter().filter(|(_, c)| *c != 0).collect();
    v.sort();
    v
}

/// `x · v` rewritten into normal words, for normal `v`.
fn insert_letter(x: Letter, v: &[Letter], acc: &mut HashMap<Word, i64>, sign: i64, prefix: &mut Word) {
    if v.is_empty() || level(x) >= level(v[0]) {
        let mut w = prefix.clone();
        w.push(x);
        w.extend_from_slice(v);
        add_into(acc, w, sign);
        return;
    }
    let y = v[0];
    // Bracket terms are already normal: both letters sit at level(y).
    for (bw, c) in bracket(x, y) {
        let mut w = prefix.clone();
        w.extend_from_slice(&bw);
        w.extend_from_slice(&v[1..]);
        add_into(acc, w, sign * c);
    }
    prefix.push(y);
    insert_letter(x, &v[1..], acc, sign, prefix);
    prefix.pop();
}

/// Normal form of a single word, with integer coefficients. Memoized globally;
/// the result does not depend on strand names.
pub fn normal_word(w: &[Letter]) -> std::sync::Arc<Combo> {
    if let Some(c) = NF_CACHE.read().unwrap().get(w) {
        return c.clone();
    }
    let res = if is_normal(w) {
        vec![(w.to_vec(), 1)]
    } else {
        let tail = normal_word(&w[1..]);
        let mut acc = HashMap::new();
        let mut prefix = Vec::new();
        for (v, c) in tail.iter() {
            insert_letter(w[0], v, &mut acc, *c, &mut prefix);
        }
        finish(acc)
    };
    let res = std::sync::Arc::new(res);
    NF_CACHE.write().unwrap().insert(w.to_vec(), res.clone());
    res
}

/// Normal form of a rational combination of words.
pub fn normal_form(x: &BTreeMap<Word, Q>) -> BTreeMap<Word, Q> {
    let mut out: BTreeMap<Word, Q> = BTreeMap::new();
    for (w, c) in x {
        if c.is_zero() {
            continue;
        }
        if is_normal(w) {
            *out.entry(w.clone()).or_insert_with(Q::zero) += c;
            continue;
        }
        for (v, k) in normal_word(w).iter() {
            let e = out.entry(v.clone()).or_insert_with(Q::zero);
            *e += c * q(*k);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

pub fn all_letters(n: usize) -> Vec<Letter> {
    let mut v = Vec::new();
    for j in 0..n as u8 {
        for i in 0..j {
            v.push((i, j));
        }
    }
    v
}

pub fn all_words(n: usize, d: usize) -> Vec<Word> {
    let letters = all_letters(n);
    let mut out: Vec<Word> = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * letters.len());
        for w in &out {
            for l in &letters {
                let mut v = w.clone();
                v.push(*l);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// The degree-`d` component of the ideal generated by the infinitesimal
/// braid relations on `n` strands, in reduced echelon form. Columns follow
/// a lexicographic order in which higher-level letters are smaller, and pivots
/// sit at the largest column.
pub struct RelationBasis {
    pub n: usize,
    pub degree: usize,
    words: Vec<Word>,
    index: HashMap<Word, usize>,
    ech: Echelon,
}

fn letter_rank(l: Letter) -> (std::cmp::Reverse<u8>, u8) {
    (std::cmp::Reverse(l.1), l.0)
}

/// Quadratic relations as combinations of two-letter words.
pub fn defining_relations(n: usize) -> Vec<Vec<(Word, i64)>> {
    let letters = all_letters(n);
    let mut rels = Vec::new();
    for (a, &x) in letters.iter().enumerate() {
        for &y in &letters[a + 1..] {
            let disjoint = x.0 != y.0 && x.0 != y.1 && x.1 != y.0 && x.1 != y.1;
            if disjoint {
                rels.push(vec![(vec![x, y], 1), (vec![y, x], -1)]);
            }
        }
    }
    for k in 0..n as u8 {
        for j in 0..n as u8 {
            for i in 0..j {
                if k == i || k == j {
                    continue;
                }
                // [t_ij, t_ik + t_jk] = 0
                let a = letter(i, j);
                let b = letter(i, k);
                let c = letter(j, k);
                rels.push(vec![(vec![a, b], 1), (vec![b, a], -1), (vec![a, c], 1), (vec![c, a], -1)]);
            }
        }
    }
    rels
}

impl RelationBasis {
    pub fn build(n: usize, degree: usize) -> Self {
        let mut words = all_words(n, degree);
        words.sort_by_key(|w| w.iter().map(|l| letter_rank(*l)).collect::<Vec<_>>());
        let index: HashMap<Word, usize> = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut ech = Echelon::new(true);
        if degree >= 2 {
            let rels = defining_relations(n);
            for left in 0..=degree - 2 {
                let right = degree - 2 - left;
                for u in all_words(n, left) {
                    for v in all_words(n, right) {
                        for r in &rels {
                            let mut row = SparseVec::new();
                            for (w, c) in r {
                                let mut full = u.clone();
                                full.extend_from_slice(w);
                                full.extend_from_slice(&v);
                                let e = row.entry(index[&full]).or_insert_with(Q::zero);
                                *e += q(*c);
                            }
                            row.retain(|_, c| !c.is_zero());
                            ech.insert(&row);
                        }
                    }
                }
            }
        }
        RelationBasis { n, degree, words, index, ech }
    }

    pub fn ideal_dim(&self) -> usize {
        self.ech.rank()
    }

    pub fn quotient_dim(&self) -> usize {
        self.words.len() - self.ech.rank()
    }

    /// Remainder of a homogeneous combination after reduction by the ideal.
    pub fn reduce(&self, x: &BTreeMap<Word, Q>) -> BTreeMap<Word, Q> {
        let v: SparseVec = x.iter().map(|(w, c)| (self.index[w], c.clone())).collect();
        self.ech.reduce(&v).into_iter().map(|(i, c)| (self.words[i].clone(), c)).collect()
    }

    pub fn leading_words(&self) -> Vec<Word> {
        self.ech.pivots().map(|i| self.words[*i].clone()).collect()
    }
}

static RELATION_CACHE: Lazy<RwLock<HashMap<(usize, usize), std::sync::Arc<RelationBasis>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

pub fn relation_basis(n: usize, degree: usize) -> std::sync::Arc<RelationBasis> {
    if let Some(b) = RELATION_CACHE.read().unwrap().get(&(n, degree)) {
        return b.clone();
    }
    let b = std::sync::Arc::new(RelationBasis::build(n, degree));
    RELATION_CACHE.write().unwrap().entry((n, degree)).or_insert(b).clone()
}

/// Truncated series in ℏ with chord-algebra coefficients; a word of length
/// d carries ℏ^d.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChordSeries {
    strands: Vec<String>,
    trunc: usize,
    terms: BTreeMap<Word, Q>,
}

impl ChordSeries {
    pub fn zero(strands: &[String], trunc: usize) -> Self {
        let mut seen = std::collections::BTreeSet::new();
        for s in strands {
            assert!(seen.insert(s), "duplicate strand {s}");
        }
        assert!(strands.len() < 255);
        ChordSeries { strands: strands.to_vec(), trunc, terms: BTreeMap::new() }
    }

    pub fn one(strands: &[String], trunc: usize) -> Self {
        Self::scalar(strands, trunc, Q::one())
    }

    pub fn scalar(strands: &[String], trunc: usize, c: Q) -> Self {
        let mut s = Self::zero(strands, trunc);
        if !c.is_zero() {
            s.terms.insert(Vec::new(), c);
        }
        s
    }

    /// Strands `1..=n`.
    pub fn numbered(n: usize) -> Vec<String> {
        (1..=n).map(|i| i.to_string()).collect()
    }

    pub fn strands(&self) -> &[String] {
        &self.strands
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn terms(&self) -> &BTreeMap<Word, Q> {
        &self.terms
    }

    pub fn index_of(&self, s: &str) -> Result<u8, ChordError> {
        self.strands
            .iter()
            .position(|x| x == s)
            .map(|i| i as u8)
            .ok_or_else(|| ChordError::UnknownStrand(s.to_string()))
    }

    /// The generator t^{uv}.
    pub fn chord(strands: &[String], trunc: usize, u: &str, v: &str) -> Result<Self, ChordError> {
        let mut s = Self::zero(strands, trunc);
        let (a, b) = (s.index_of(u)?, s.index_of(v)?);
        if trunc >= 1 {
            s.terms.insert(vec![letter(a, b)], Q::one());
        }
        Ok(s)
    }

    /// Build from arbitrary words; normalizes and truncates.
    pub fn from_terms(strands: &[String], trunc: usize, terms: BTreeMap<Word, Q>) -> Self {
        let mut s = Self::zero(strands, trunc);
        let kept: BTreeMap<Word, Q> = terms.into_iter().filter(|(w, _)| w.len() <= trunc).collect();
        s.terms = normal_form(&kept);
        s
    }

    pub fn coeff(&self, w: &[Letter]) -> Q {
        self.terms.get(w).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> Q {
        self.coeff(&[])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_part(&self, d: usize) -> Self {
        let mut s = Self::zero(&self.strands, self.trunc);
        s.terms = self.terms.iter().filter(|(w, _)| w.len() == d).map(|(w, c)| (w.clone(), c.clone())).collect();
        s
    }

    pub fn truncate(&self, trunc: usize) -> Self {
        let t = trunc.min(self.trunc);
        let mut s = Self::zero(&self.strands, t);
        s.terms = self.terms.iter().filter(|(w, _)| w.len() <= t).map(|(w, c)| (w.clone(), c.clone())).collect();
        s
    }

    pub fn with_trunc(&self, trunc: usize) -> Self {
        let mut s = self.truncate(trunc);
        s.trunc = trunc;
        s
    }

    fn check_same(&self, o: &Self) -> Result<(), ChordError> {
        if self.strands != o.strands {
            return Err(ChordError::StrandMismatch(self.strands.clone(), o.strands.clone()));
        }
        Ok(())
    }

    pub fn try_add(&self, o: &Self) -> Result<Self, ChordError> {
        self.check_same(o)?;
        let t = self.trunc.min(o.trunc);
        let mut s = self.truncate(t);
        for (w, c) in &o.terms {
            if w.len() > t {
                continue;
            }
            let e = s.terms.entry(w.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                s.terms.remove(w);
            }
        }
        Ok(s)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).unwrap()
    }

    pub fn scale(&self, k: &Q) -> Self {
        let mut s = Self::zero(&self.strands, self.trunc);
        if !k.is_zero() {
            s.terms = self.terms.iter().map(|(w, c)| (w.clone(), c * k)).collect();
        }
        s
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    fn by_degree(&self, t: usize) -> Vec<Vec<(&Word, &Q)>> {
        let mut v = vec![Vec::new(); t + 1];
        for (w, c) in &self.terms {
            if w.len() <= t {
                v[w.len()].push((w, c));
            }
        }
        v
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self, ChordError> {
        self.check_same(o)?;
        let t = self.trunc.min(o.trunc);
        let (xs, ys) = (self.by_degree(t), o.by_degree(t));
        let mut acc: HashMap<Word, Q> = HashMap::new();
        for (d1, xs) in xs.iter().enumerate() {
            for ys in &ys[..=t - d1] {
                for (w1, c1) in xs {
                    for (w2, c2) in ys {
                        let c = *c1 * *c2;
                        if w1.is_empty() || w2.is_empty() {
                            let w: Word = if w1.is_empty() { (*w2).clone() } else { (*w1).clone() };
                            *acc.entry(w).or_insert_with(Q::zero) += c;
                            continue;
                        }
                        let mut w = Vec::with_capacity(w1.len() + w2.len());
                        w.extend_from_slice(w1);
                        w.extend_from_slice(w2);
                        if level(w1[w1.len() - 1]) >= level(w2[0]) {
                            *acc.entry(w).or_insert_with(Q::zero) += c;
                            continue;
                        }
                        for (v, k) in normal_word(&w).iter() {
                            *acc.entry(v.clone()).or_insert_with(Q::zero) += &c * q(*k);
                        }
                    }
                }
            }
        }
        let mut s = Self::zero(&self.strands, t);
        s.terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(s)
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).unwrap()
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn exp(&self) -> Result<Self, ChordError> {
        if !self.constant_term().is_zero() {
            return Err(ChordError::ConstantTerm("zero"));
        }
        let mut out = Self::one(&self.strands, self.trunc);
        let mut pow = Self::one(&self.strands, self.trunc);
        for k in 1..=self.trunc {
            pow = pow.mul(self).scale(&Q::new(1, k as i64));
            if pow.is_zero() {
                break;
            }
            out = out.add(&pow);
        }
        Ok(out)
    }

    pub fn log(&self) -> Result<Self, ChordError> {
        if self.constant_term() != Q::one() {
            return Err(ChordError::ConstantTerm("one"));
        }
        let x = self.sub(&Self::one(&self.strands, self.trunc));
        let mut out = Self::zero(&self.strands, self.trunc);
        let mut pow = Self::one(&self.strands, self.trunc);
        for k in 1..=self.trunc {
            pow = pow.mul(&x);
            if pow.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            out = out.add(&pow.scale(&Q::new(sign, k as i64)));
        }
        Ok(out)
    }

    /// Inverse of a series with constant term 1.
    pub fn inverse(&self) -> Result<Self, ChordError> {
        if self.constant_term() != Q::one() {
            return Err(ChordError::ConstantTerm("one"));
        }
        let one = Self::one(&self.strands, self.trunc);
        let y = one.sub(self);
        let mut out = one.clone();
        let mut pow = one;
        for _ in 1..=self.trunc {
            pow = pow.mul(&y);
            if pow.is_zero() {
                break;
            }
            out = out.add(&pow);
        }
        Ok(out)
    }

    /// Rewrite letters through `f` on strand indices into a new strand list.
    /// Letters mapped to `None` are expanded into a sum of letters.
    fn substitute(&self, strands: Vec<String>, f: &dyn Fn(Letter) -> Vec<Letter>) -> Self {
        let mut acc: BTreeMap<Word, Q> = BTreeMap::new();
        for (w, c) in &self.terms {
            let mut partial: Vec<Word> = vec![Vec::new()];
            for l in w {
                let images = f(*l);
                let mut next = Vec::with_capacity(partial.len() * images.len());
                for p in &partial {
                    for im in &images {
                        let mut v = p.clone();
                        v.push(*im);
                        next.push(v);
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            for p in partial {
                *acc.entry(p).or_insert_with(Q::zero) += c;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        let mut s = Self::zero(&strands, self.trunc);
        s.terms = normal_form(&acc);
        s
    }

    /// Double strand `u` into `(u1, u2)`, placed where `u` was.
    pub fn cable(&self, u: &str, into: (&str, &str)) -> Result<Self, ChordError> {
        self.cable_many(u, &[into.0, into.1])
    }

    /// Replace strand `u` by the given block of strands.
    pub fn cable_many(&self, u: &str, into: &[&str]) -> Result<Self, ChordError> {
        let iu = self.index_of(u)? as usize;
        for n in into {
            if self.strands.iter().any(|s| s == n && s != u) {
                return Err(ChordError::Collision(n.to_string()));
            }
        }
        let k = into.len();
        let mut strands: Vec<String> = self.strands[..iu].to_vec();
        strands.extend(into.iter().map(|s| s.to_string()));
        strands.extend_from_slice(&self.strands[iu + 1..]);
        let mut seen = std::collections::BTreeSet::new();
        for s in &strands {
            if !seen.insert(s) {
                return Err(ChordError::Collision(s.clone()));
            }
        }
        let shift = |i: u8| -> Vec<u8> {
            let i = i as usize;
            if i < iu {
                vec![i as u8]
            } else if i == iu {
                (iu..iu + k).map(|x| x as u8).collect()
            } else {
                vec![(i + k - 1) as u8]
            }
        };
        let f = |l: Letter| -> Vec<Letter> {
            let mut v = Vec::new();
            for a in shift(l.0) {
                for b in shift(l.1) {
                    v.push(letter(a, b));
                }
            }
            v
        };
        Ok(self.substitute(strands, &f))
    }

    pub fn delete(&self, u: &str) -> Result<Self, ChordError> {
        let iu = self.index_of(u)?;
        let strands: Vec<String> = self.strands.iter().filter(|s| *s != u).cloned().collect();
        let down = |i: u8| if i > iu { i - 1 } else { i };
        let f = |l: Letter| -> Vec<Letter> {
            if l.0 == iu || l.1 == iu {
                Vec::new()
            } else {
                vec![letter(down(l.0), down(l.1))]
            }
        };
        Ok(self.substitute(strands, &f))
    }

    /// Relabel strands injectively into `target` strands (which must contain
    /// every image).
    pub fn embed(&self, rename: &BTreeMap<String, String>, target: &[String]) -> Result<Self, ChordError> {
        let mut img = Vec::with_capacity(self.strands.len());
        for s in &self.strands {
            let t = rename.get(s).unwrap_or(s);
            let pos = target.iter().position(|x| x == t).ok_or_else(|| ChordError::UnknownStrand(t.clone()))?;
            img.push(pos as u8);
        }
        let mut sorted = img.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != img.len() {
            return Err(ChordError::NotInjective);
        }
        let f = |l: Letter| vec![letter(img[l.0 as usize], img[l.1 as usize])];
        Ok(self.substitute(target.to_vec(), &f))
    }

    /// Embed by listing, for each strand in order, its image label.
    pub fn embed_list(&self, images: &[&str], target: &[String]) -> Result<Self, ChordError> {
        let rename = self.strands.iter().cloned().zip(images.iter().map(|s| s.to_string())).collect();
        self.embed(&rename, target)
    }

    /// Same element over a permuted listing of the same strands.
    pub fn reorder(&self, target: &[String]) -> Result<Self, ChordError> {
        if target.len() != self.strands.len() {
            return Err(ChordError::StrandMismatch(self.strands.clone(), target.to_vec()));
        }
        self.embed(&BTreeMap::new(), target)
    }

    /// Δ(a) = a ⊗ a with every chord primitive. Each word's coproduct is the
    /// sum over subsets of letter positions; both tensor factors are
    /// normalized independently.
    pub fn is_group_like(&self) -> bool {
        if self.constant_term() != Q::one() {
            return false;
        }
        let mut lhs: BTreeMap<(Word, Word), Q> = BTreeMap::new();
        for (w, c) in &self.terms {
            let n = w.len();
            for mask in 0u32..(1u32 << n) {
                let (mut l, mut r) = (Vec::new(), Vec::new());
                for (i, x) in w.iter().enumerate() {
                    if mask & (1 << i) != 0 { l.push(*x) } else { r.push(*x) }
                }
                for (lw, lc) in normal_word(&l).iter() {
                    for (rw, rc) in normal_word(&r).iter() {
                        *lhs.entry((lw.clone(), rw.clone())).or_insert_with(Q::zero) += c * q(lc * rc);
                    }
                }
            }
        }
        lhs.retain(|_, c| !c.is_zero());
        let mut rhs: BTreeMap<(Word, Word), Q> = BTreeMap::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &self.terms {
                if w1.len() + w2.len() <= self.trunc {
                    *rhs.entry((w1.clone(), w2.clone())).or_insert_with(Q::zero) += c1 * c2;
                }
            }
        }
        rhs.retain(|_, c| !c.is_zero());
        lhs == rhs
    }

    /// Substitute each strand by a block of target strands: a chord between
    /// strands `a` and `b` becomes the sum of chords between their blocks. An
    /// empty block deletes its strand. Blocks must be pairwise disjoint.
    pub fn pullback_blocks(&self, blocks: &[Vec<String>], target: &[String]) -> Result<Self, ChordError> {
        if blocks.len() != self.strands.len() {
            return Err(ChordError::StrandMismatch(self.strands.clone(), target.to_vec()));
        }
        let mut idx: Vec<Vec<u8>> = Vec::with_capacity(blocks.len());
        let mut used = std::collections::BTreeSet::new();
        for b in blocks {
            let mut v = Vec::with_capacity(b.len());
            for s in b {
                let pos = target.iter().position(|x| x == s).ok_or_else(|| ChordError::UnknownStrand(s.clone()))?;
                if !used.insert(pos) {
                    return Err(ChordError::NotInjective);
                }
                v.push(pos as u8);
            }
            idx.push(v);
        }
        let f = |l: Letter| -> Vec<Letter> {
            let mut v = Vec::new();
            for &a in &idx[l.0 as usize] {
                for &b in &idx[l.1 as usize] {
                    v.push(letter(a, b));
                }
            }
            v
        };
        Ok(self.substitute(target.to_vec(), &f))
    }

    /// Sum of chords between two disjoint blocks, as a degree-one element.
    pub fn block_chord(strands: &[String], trunc: usize, x: &[String], y: &[String]) -> Result<Self, ChordError> {
        let mut s = Self::zero(strands, trunc);
        if trunc == 0 {
            return Ok(s);
        }
        for u in x {
            for v in y {
                let (a, b) = (s.index_of(u)?, s.index_of(v)?);
                if a == b {
                    return Err(ChordError::NotInjective);
                }
                *s.terms.entry(vec![letter(a, b)]).or_insert_with(Q::zero) += Q::one();
            }
        }
        Ok(s)
    }

    /// Image under the anti-automorphism reversing every word.
    pub fn reversed(&self) -> Self {
        let raw = self.terms.iter().map(|(w, c)| (w.iter().rev().copied().collect(), c.clone())).collect();
        Self::from_terms(&self.strands, self.trunc, raw)
    }

    /// Letters written with strand names, e.g. `t[1,2] t[2,3]`.
    pub fn word_name(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.iter()
            .map(|(a, b)| format!("t[{},{}]", self.strands[*a as usize], self.strands[*b as usize]))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_json(&self) -> ChordSeriesJson {
        ChordSeriesJson {
            strands: self.strands.clone(),
            degree: self.trunc,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| {
                    let key = w
                        .iter()
                        .map(|(a, b)| format!("{},{}", self.strands[*a as usize], self.strands[*b as usize]))
                        .collect::<Vec<_>>()
                        .join(" ");
                    (key, fmt_q(c))
                })
                .collect(),
        }
    }

    pub fn from_json(j: &ChordSeriesJson) -> Result<Self, ChordError> {
        let mut s = Self::zero(&j.strands, j.degree);
        let mut raw = BTreeMap::new();
        for (k, v) in &j.terms {
            let mut w = Vec::new();
            for l in k.split_whitespace() {
                let (a, b) = l.split_once(',').ok_or_else(|| ChordError::Parse(format!("bad letter `{l}`")))?;
                let (a, b) = (s.index_of(a)?, s.index_of(b)?);
                if a == b {
                    return Err(ChordError::Parse(format!("degenerate chord `{l}`")));
                }
                w.push(letter(a, b));
            }
            let c = parse_q(v).ok_or_else(|| ChordError::Parse(format!("bad coefficient `{v}`")))?;
            raw.insert(w, c);
        }
        s = Self::from_terms(&s.strands, s.trunc, raw);
        Ok(s)
    }
}

/// Canonical serialized form; words are space-separated `u,v` letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChordSeriesJson {
    pub strands: Vec<String>,
    pub degree: usize,
    pub terms: BTreeMap<String, String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: usize) -> Vec<String> {
        ChordSeries::numbered(n)
    }

    fn t(n: usize, u: &str, v: &str, d: usize) -> ChordSeries {
        ChordSeries::chord(&s(n), d, u, v).unwrap()
    }

    #[test]
    fn disjoint_chords_commute() {
        let a = t(4, "1", "2", 3);
        let b = t(4, "3", "4", 3);
        assert!(a.commutator(&b).is_zero());
    }

    #[test]
    fn four_term_relation_vanishes() {
        let (a, b, c) = (t(3, "1", "2", 3), t(3, "1", "3", 3), t(3, "2", "3", 3));
        let r = a.commutator(&b).sub(&c.commutator(&a));
        assert!(r.is_zero());
    }

    #[test]
    fn exp_second_order() {
        let x = t(2, "1", "2", 3).scale(&crate::rational::qf(1, 2));
        let e = x.exp().unwrap();
        assert_eq!(e.coeff(&[(0, 1), (0, 1)]), crate::rational::qf(1, 8));
        assert_eq!(e.mul(&x.neg().exp().unwrap()), ChordSeries::one(&s(2), 3));
    }

    #[test]
    fn cable_single_chord() {
        let c = t(2, "1", "2", 2).cable("1", ("1a", "1b")).unwrap();
        let strands: Vec<String> = ["1a", "1b", "2"].iter().map(|x| x.to_string()).collect();
        let expect = ChordSeries::chord(&strands, 2, "1a", "2").unwrap().add(&ChordSeries::chord(&strands, 2, "1b", "2").unwrap());
        assert_eq!(c, expect);
    }

    #[test]
    fn json_round_trip() {
        let x = t(3, "1", "2", 3).add(&t(3, "2", "3", 3).scale(&crate::rational::qf(-1, 3))).exp().unwrap();
        let j = serde_json::to_string(&x.to_json()).unwrap();
        let back: ChordSeriesJson = serde_json::from_str(&j).unwrap();
        assert_eq!(ChordSeries::from_json(&back).unwrap(), x);
    }

    #[test]
    fn group_like_examples() {
        assert!(t(2, "1", "2", 3).exp().unwrap().is_group_like());
        let one = ChordSeries::one(&s(2), 3);
        let sq = t(2, "1", "2", 3).mul(&t(2, "1", "2", 3));
        assert!(!one.add(&sq).is_group_like());
    }
}
