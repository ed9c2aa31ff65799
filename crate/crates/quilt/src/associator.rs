//! Rational associators by degree-wise linear solving, parenthesized braids
//! and the fusion elements built from them.
//!
//! Products of braid values are taken in reading order: the value of the
//! first move stands leftmost.

use crate::chords::{ChordError, ChordSeries};
use crate::linalg::{solve_affine, SparseVec};
use crate::ordcat::{
    reparenthesization_path, OrdError, OrderedMorphism, ParenthesizedOrderedMorphism, Tree,
};
use crate::rational::{qf, Q};
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};
use thiserror::Error;

pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Error)]
pub enum AssocError {
    #[error("degree {0} exceeds the supported maximum {MAX_DEGREE}")]
    DegreeOverflow(usize),
    #[error("inconsistent constraint system at degree {0}")]
    Inconsistent(usize),
    #[error("invalid braid move {0:?} for the current tree")]
    InvalidMove(BraidMove),
    #[error(transparent)]
    Chord(#[from] ChordError),
    #[error(transparent)]
    Ord(#[from] OrdError),
    #[error("morphisms have different underlying ordered maps")]
    BaseMismatch,
}

/// How free directions of the homogeneous solution space are fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TieBreak {
    Zero,
    One,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Associator {
    pub phi: ChordSeries,
    pub degree: usize,
    pub tie_break: TieBreak,
    id: String,
}

impl Associator {
    pub fn new(phi: ChordSeries, tie_break: TieBreak) -> Self {
        let degree = phi.trunc();
        let id = series_hash(&phi);
        Associator { phi, degree, tie_break, id }
    }

    /// The trivial element, which is an associator only up to degree 1.
    pub fn trivial(degree: usize) -> Self {
        Self::new(ChordSeries::one(&three(), degree), TieBreak::Zero)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn truncated(&self, d: usize) -> Self {
        Self::new(self.phi.truncate(d), self.tie_break)
    }
}

pub fn series_hash(s: &ChordSeries) -> String {
    let j = serde_json::to_string(&s.to_json()).expect("serializable");
    let h = Sha256::digest(j.as_bytes());
    h.iter().map(|b| format!("{b:02x}")).collect()
}

fn three() -> Vec<String> {
    ChordSeries::numbered(3)
}

fn strs(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Φ with its three slots replaced by blocks of `target` strands.
pub fn phi_blocks(phi: &ChordSeries, blocks: [&[String]; 3], target: &[String]) -> Result<ChordSeries, ChordError> {
    phi.pullback_blocks(&[blocks[0].to_vec(), blocks[1].to_vec(), blocks[2].to_vec()], target)
}

/// exp(ℏ t^{12}/2) on two strands.
pub fn r_matrix(trunc: usize) -> ChordSeries {
    let s = ChordSeries::numbered(2);
    ChordSeries::chord(&s, trunc, "1", "2").unwrap().scale(&qf(1, 2)).exp().unwrap()
}

/// Φ^{12,3,4}·Φ^{1,2,34} − Φ^{1,2,3}·Φ^{1,23,4}·Φ^{2,3,4}.
pub fn check_pentagon(phi: &ChordSeries) -> ChordSeries {
    let s = ChordSeries::numbered(4);
    let b = |x: &[&str]| strs(x);
    let f = |x: &[&str], y: &[&str], z: &[&str]| phi_blocks(phi, [&b(x), &b(y), &b(z)], &s).unwrap();
    let lhs = f(&["1", "2"], &["3"], &["4"]).mul(&f(&["1"], &["2"], &["3", "4"]));
    let rhs = f(&["1"], &["2"], &["3"]).mul(&f(&["1"], &["2", "3"], &["4"])).mul(&f(&["2"], &["3"], &["4"]));
    lhs.sub(&rhs)
}

/// Hexagon residuals, each "crossing a strand past a fused pair" minus the
/// composite of two crossings and three associator moves.
pub fn check_hexagons_with(phi: &ChordSeries, half: &Q) -> (ChordSeries, ChordSeries) {
    let start1 = Tree::node(Tree::node(Tree::leaf("1"), Tree::leaf("2")), Tree::leaf("3"));
    let start2 = Tree::node(Tree::leaf("1"), Tree::node(Tree::leaf("2"), Tree::leaf("3")));
    let root = vec![];
    let l = vec![false];
    let r = vec![true];
    let h1_path = [
        BraidMove::rot(&root, true),
        BraidMove::cross(&r, true),
        BraidMove::rot(&root, false),
        BraidMove::cross(&l, true),
        BraidMove::rot(&root, true),
    ];
    let h2_path = [
        BraidMove::rot(&root, false),
        BraidMove::cross(&l, true),
        BraidMove::rot(&root, true),
        BraidMove::cross(&r, true),
        BraidMove::rot(&root, false),
    ];
    let s = three();
    let ctx = BraidContext { phi, half: half.clone() };
    let ev = |t: &Tree, m: &[BraidMove]| ctx.evaluate(t, m, &s).unwrap();
    let one = [BraidMove::cross(&root, true)];
    (ev(&start1, &one).sub(&ev(&start1, &h1_path)), ev(&start2, &one).sub(&ev(&start2, &h2_path)))
}

pub fn check_hexagons(phi: &ChordSeries) -> (ChordSeries, ChordSeries) {
    check_hexagons_with(phi, &qf(1, 2))
}

/// Deletion of each strand; every entry must equal 1.
pub fn check_units(phi: &ChordSeries) -> Vec<ChordSeries> {
    ["1", "2", "3"]
        .iter()
        .map(|u| {
            let d = phi.delete(u).unwrap();
            d.sub(&ChordSeries::one(d.strands(), d.trunc()))
        })
        .collect()
}

pub fn check_all(phi: &ChordSeries) -> Vec<ChordSeries> {
    let mut v = vec![check_pentagon(phi)];
    let (h1, h2) = check_hexagons(phi);
    v.push(h1);
    v.push(h2);
    v.extend(check_units(phi));
    v
}

/// Lyndon words on two letters with their standard bracketing, as chord
/// series in A = t^{12}, B = t^{23}.
pub fn lyndon_basis(d: usize, trunc: usize) -> Vec<(Vec<u8>, ChordSeries)> {
    let s = three();
    let a = ChordSeries::chord(&s, trunc, "1", "2").unwrap();
    let b = ChordSeries::chord(&s, trunc, "2", "3").unwrap();
    let words = lyndon_words(d);
    let all: Vec<Vec<u8>> = (1..=d).flat_map(lyndon_words).collect();
    fn bracketed(w: &[u8], all: &[Vec<u8>], a: &ChordSeries, b: &ChordSeries) -> ChordSeries {
        if w.len() == 1 {
            return if w[0] == 0 { a.clone() } else { b.clone() };
        }
        // Standard factorization: the longest proper Lyndon suffix.
        let k = (1..w.len()).find(|&k| all.iter().any(|x| x.as_slice() == &w[k..])).unwrap();
        bracketed(&w[..k], all, a, b).commutator(&bracketed(&w[k..], all, a, b))
    }
    words.into_iter().map(|w| {
        let e = bracketed(&w, &all, &a, &b);
        (w, e)
    }).collect()
}

/// Duval's algorithm restricted to length `d` over {0, 1}.
pub fn lyndon_words(d: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    let mut w: Vec<u8> = vec![0];
    loop {
        if w.len() == d {
            out.push(w.clone());
        }
        let m = w.len();
        while w.len() < d {
            let c = w[w.len() - m];
            w.push(c);
        }
        while let Some(&1) = w.last() {
            w.pop();
        }
        match w.last_mut() {
            None => break,
            Some(x) => *x += 1,
        }
    }
    out
}

/// Solve for Φ = exp(φ) degree by degree, φ a Lie series in A, B.
pub fn solve_associator(degree: usize) -> Result<Associator, AssocError> {
    solve_associator_with(degree, TieBreak::Zero)
}

pub fn solve_associator_with(degree: usize, tie: TieBreak) -> Result<Associator, AssocError> {
    if degree > MAX_DEGREE {
        return Err(AssocError::DegreeOverflow(degree));
    }
    let s = three();
    let mut log = ChordSeries::zero(&s, degree);
    for d in 1..=degree {
        let basis = lyndon_basis(d, d);
        let prev = log.with_trunc(d);
        let base_phi = prev.exp()?;
        let base = check_all(&base_phi);
        let cols: Vec<Vec<ChordSeries>> = basis
            .par_iter()
            .map(|(_, e)| {
                let phi = prev.add(e).exp().unwrap();
                check_all(&phi).iter().zip(&base).map(|(x, y)| x.sub(y).degree_part(d)).collect()
            })
            .collect();
        // One row per (constraint, word) at degree d.
        let mut rows: BTreeMap<(usize, Vec<(u8, u8)>), (SparseVec, Q)> = BTreeMap::new();
        for (c, res) in base.iter().enumerate() {
            for (w, v) in res.degree_part(d).terms() {
                rows.entry((c, w.clone())).or_insert_with(|| (SparseVec::new(), Q::zero())).1 = -v.clone();
            }
        }
        for (k, col) in cols.iter().enumerate() {
            for (c, res) in col.iter().enumerate() {
                for (w, v) in res.terms() {
                    rows.entry((c, w.clone())).or_insert_with(|| (SparseVec::new(), Q::zero())).0.insert(k, v.clone());
                }
            }
        }
        let rows: Vec<(SparseVec, Q)> = rows.into_values().collect();
        let free = |_: usize| match tie {
            TieBreak::Zero => Q::zero(),
            TieBreak::One => Q::one(),
        };
        let x = solve_affine(&rows, basis.len(), free).ok_or(AssocError::Inconsistent(d))?;
        let mut next = log.with_trunc(degree);
        for ((_, e), c) in basis.iter().zip(&x) {
            next = next.add(&e.with_trunc(degree).scale(c));
        }
        log = next;
    }
    Ok(Associator::new(log.exp()?, tie))
}

/// Dimension of the homogeneous solution space at degree `d`.
pub fn free_directions(d: usize) -> usize {
    let basis = lyndon_basis(d, d);
    let zero = ChordSeries::zero(&three(), d);
    let lin = |e: &ChordSeries| -> Vec<ChordSeries> {
        // Linearization at Φ = 1 with the braiding switched off.
        let phi = zero.add(e).exp().unwrap();
        let mut v = vec![check_pentagon(&phi)];
        let (h1, h2) = check_hexagons_with(&phi, &Q::zero());
        v.push(h1);
        v.push(h2);
        v.into_iter().map(|x| x.degree_part(d)).collect()
    };
    let cols: Vec<Vec<ChordSeries>> = basis.iter().map(|(_, e)| lin(e)).collect();
    let mut rows: BTreeMap<(usize, Vec<(u8, u8)>), SparseVec> = BTreeMap::new();
    for (k, col) in cols.iter().enumerate() {
        for (c, res) in col.iter().enumerate() {
            for (w, v) in res.terms() {
                rows.entry((c, w.clone())).or_default().insert(k, v.clone());
            }
        }
    }
    let rows: Vec<SparseVec> = rows.into_values().collect();
    crate::linalg::kernel(&rows, basis.len()).len()
}

/// A move on a parenthesized braid state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BraidMove {
    /// `left_to_right`: ((X Y) Z) → (X (Y Z)), valued Φ^{X,Y,Z}; the converse
    /// is valued by its inverse.
    Rotate { node_path: Vec<bool>, left_to_right: bool },
    /// Swap the two children of a node; positive when the left block passes
    /// over, valued exp(±(ℏ/2) Σ t^{uv}).
    Cross { node_path: Vec<bool>, positive: bool },
}

impl BraidMove {
    pub fn rot(path: &[bool], left_to_right: bool) -> Self {
        BraidMove::Rotate { node_path: path.to_vec(), left_to_right }
    }

    pub fn cross(path: &[bool], positive: bool) -> Self {
        BraidMove::Cross { node_path: path.to_vec(), positive }
    }
}

pub struct BraidContext<'a> {
    pub phi: &'a ChordSeries,
    /// Coefficient of the crossing exponent, 1/2 for the standard braiding.
    pub half: Q,
}

impl BraidContext<'_> {
    /// Value of a move sequence from `start` over the strand listing `strands`.
    pub fn evaluate(&self, start: &Tree, moves: &[BraidMove], strands: &[String]) -> Result<ChordSeries, AssocError> {
        let trunc = self.phi.trunc();
        let mut t = start.clone();
        let mut acc = ChordSeries::one(strands, trunc);
        let mut phi_inv: Option<ChordSeries> = None;
        for m in moves {
            let f = match m {
                BraidMove::Rotate { node_path, left_to_right } => {
                    let node = t.at(node_path).ok_or_else(|| AssocError::InvalidMove(m.clone()))?;
                    let (x, y, z) = match (left_to_right, node) {
                        (true, Tree::Node(l, z)) => match &**l {
                            Tree::Node(x, y) => (x.leaves(), y.leaves(), z.leaves()),
                            _ => return Err(AssocError::InvalidMove(m.clone())),
                        },
                        (false, Tree::Node(x, r)) => match &**r {
                            Tree::Node(y, z) => (x.leaves(), y.leaves(), z.leaves()),
                            _ => return Err(AssocError::InvalidMove(m.clone())),
                        },
                        _ => return Err(AssocError::InvalidMove(m.clone())),
                    };
                    let dir = if *left_to_right {
                        crate::ordcat::Direction::LeftToRight
                    } else {
                        crate::ordcat::Direction::RightToLeft
                    };
                    t.rotate(node_path, dir)?;
                    let base = if *left_to_right {
                        self.phi.clone()
                    } else {
                        phi_inv.get_or_insert_with(|| self.phi.inverse().unwrap()).clone()
                    };
                    phi_blocks(&base, [&x, &y, &z], strands)?
                }
                BraidMove::Cross { node_path, positive } => {
                    let node = t.at(node_path).ok_or_else(|| AssocError::InvalidMove(m.clone()))?;
                    let Tree::Node(x, y) = node else { return Err(AssocError::InvalidMove(m.clone())) };
                    let (xl, yl) = (x.leaves(), y.leaves());
                    let swapped = Tree::Node(y.clone(), x.clone());
                    replace_at(&mut t, node_path, swapped);
                    let sign = if *positive { self.half.clone() } else { -self.half.clone() };
                    ChordSeries::block_chord(strands, trunc, &xl, &yl)?.scale(&sign).exp()?
                }
            };
            acc = acc.mul(&f);
        }
        Ok(acc)
    }

    pub fn end_tree(start: &Tree, moves: &[BraidMove]) -> Result<Tree, AssocError> {
        let mut t = start.clone();
        for m in moves {
            match m {
                BraidMove::Rotate { node_path, left_to_right } => {
                    let dir = if *left_to_right {
                        crate::ordcat::Direction::LeftToRight
                    } else {
                        crate::ordcat::Direction::RightToLeft
                    };
                    t.rotate(node_path, dir).map_err(|_| AssocError::InvalidMove(m.clone()))?;
                }
                BraidMove::Cross { node_path, .. } => {
                    let Some(Tree::Node(x, y)) = t.at(node_path) else {
                        return Err(AssocError::InvalidMove(m.clone()));
                    };
                    let swapped = Tree::Node(y.clone(), x.clone());
                    replace_at(&mut t, node_path, swapped);
                }
            }
        }
        Ok(t)
    }
}

fn replace_at(t: &mut Tree, path: &[bool], new: Tree) {
    match path.split_first() {
        None => *t = new,
        Some((d, rest)) => {
            if let Tree::Node(a, b) = t {
                replace_at(if *d { b } else { a }, rest, new)
            }
        }
    }
}

/// Value of a braid with the associator `phi` and braiding exp(ℏt/2).
pub fn braid_to_chord(phi: &ChordSeries, start: &Tree, moves: &[BraidMove], strands: &[String]) -> Result<ChordSeries, AssocError> {
    BraidContext { phi, half: qf(1, 2) }.evaluate(start, moves, strands)
}

fn rotations(t1: &Tree, t2: &Tree, prefix: &[bool]) -> Result<Vec<BraidMove>, AssocError> {
    Ok(reparenthesization_path(t1, t2, "")?
        .into_iter()
        .map(|s| {
            let mut p = prefix.to_vec();
            p.extend(s.node_path);
            BraidMove::Rotate { node_path: p, left_to_right: s.direction == crate::ordcat::Direction::LeftToRight }
        })
        .collect())
}

pub fn a_label(x: &str) -> String {
    format!("{x}.a")
}

pub fn b_label(x: &str) -> String {
    format!("{x}.b")
}

/// The pair (T^a T^b) and the fused tree T[(x^a x^b)].
pub fn fusion_endpoints(t: &Tree) -> (Tree, Tree) {
    let ta = t.map_leaves(&|s| a_label(s));
    let tb = t.map_leaves(&|s| b_label(s));
    let start = match (&ta, &tb) {
        (Tree::Empty, _) => Tree::Empty,
        _ => Tree::node(ta, tb),
    };
    let end = t.graft(&|s| Tree::node(Tree::leaf(a_label(s)), Tree::leaf(b_label(s))));
    (start, end)
}

/// Canonical fusion braid: reparenthesize to the left comb, move each
/// b-strand leftward under the a-strands it passes, then reparenthesize to
/// the fused tree.
pub fn fusion_braid(t: &Tree) -> Vec<BraidMove> {
    let leaves = t.leaves();
    let n = leaves.len();
    if n <= 1 {
        return Vec::new();
    }
    let (start, end) = fusion_endpoints(t);
    let mut order: Vec<String> = leaves.iter().map(|s| a_label(s)).chain(leaves.iter().map(|s| b_label(s))).collect();
    let m = 2 * n;
    let mut moves = rotations(&start, &Tree::left_comb(&order), &[]).unwrap();
    for k in 1..=n {
        // 1-based position of k^b is n + k; target position 2k.
        for p in (2 * k..n + k).rev() {
            // swap comb positions p and p+1
            let node_path = vec![false; m - (p + 1)];
            if p == 1 {
                moves.push(BraidMove::Cross { node_path, positive: true });
            } else {
                let mut right = node_path.clone();
                right.push(true);
                moves.push(BraidMove::Rotate { node_path: node_path.clone(), left_to_right: true });
                moves.push(BraidMove::Cross { node_path: right, positive: true });
                moves.push(BraidMove::Rotate { node_path, left_to_right: false });
            }
            order.swap(p - 1, p);
        }
    }
    moves.extend(rotations(&Tree::left_comb(&order), &end, &[]).unwrap());
    moves
}

/// The same braid through the right comb, moving a-strands rightward.
pub fn fusion_braid_right(t: &Tree) -> Vec<BraidMove> {
    let leaves = t.leaves();
    let n = leaves.len();
    if n <= 1 {
        return Vec::new();
    }
    let (start, end) = fusion_endpoints(t);
    let mut order: Vec<String> = leaves.iter().map(|s| a_label(s)).chain(leaves.iter().map(|s| b_label(s))).collect();
    let m = 2 * n;
    let mut moves = rotations(&start, &Tree::right_comb(&order), &[]).unwrap();
    for k in (1..=n).rev() {
        // k^a sits at position k and moves right past 1^b .. (k-1)^b.
        let from = k;
        let to = 2 * k - 1;
        for p in from..to {
            let node_path = vec![true; p - 1];
            if p + 1 == m {
                moves.push(BraidMove::Cross { node_path, positive: true });
            } else {
                let mut left = node_path.clone();
                left.push(false);
                moves.push(BraidMove::Rotate { node_path: node_path.clone(), left_to_right: false });
                moves.push(BraidMove::Cross { node_path: left, positive: true });
                moves.push(BraidMove::Rotate { node_path, left_to_right: true });
            }
            order.swap(p - 1, p);
        }
    }
    moves.extend(rotations(&Tree::right_comb(&order), &end, &[]).unwrap());
    moves
}

/// Strand listing a-copies then b-copies.
pub fn doubled_strands(labels: &[String]) -> Vec<String> {
    labels.iter().map(|s| a_label(s)).chain(labels.iter().map(|s| b_label(s))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionElement {
    pub k: ChordSeries,
    pub source: Tree,
    pub target: Tree,
}

type ShapeKey = (String, Tree);

static FUSION_CACHE: Lazy<RwLock<HashMap<ShapeKey, Arc<ChordSeries>>>> = Lazy::new(|| RwLock::new(HashMap::new()));

fn shape_of(t: &Tree) -> (Tree, Vec<String>) {
    let leaves = t.leaves();
    let pos: HashMap<String, usize> = leaves.iter().enumerate().map(|(i, s)| (s.clone(), i + 1)).collect();
    (t.map_leaves(&|s| pos[s].to_string()), leaves)
}

/// K for a parenthesized fiber, over the strands returned by
/// `doubled_strands(leaves)`.
pub fn fusion_element(assoc: &Associator, t: &Tree) -> FusionElement {
    let (shape, leaves) = shape_of(t);
    let key = (assoc.id().to_string(), shape.clone());
    let cached = FUSION_CACHE.read().unwrap().get(&key).cloned();
    let k_shape = match cached {
        Some(k) => k,
        None => {
            let canon = shape.leaves();
            let strands = doubled_strands(&canon);
            let (start, _) = fusion_endpoints(&shape);
            let k = if canon.len() <= 1 {
                ChordSeries::one(&strands, assoc.degree)
            } else {
                braid_to_chord(&assoc.phi, &start, &fusion_braid(&shape), &strands).unwrap()
            };
            let k = Arc::new(k);
            FUSION_CACHE.write().unwrap().insert(key, k.clone());
            k
        }
    };
    let canon = shape.leaves();
    let rename: BTreeMap<String, String> = canon
        .iter()
        .zip(&leaves)
        .flat_map(|(c, l)| [(a_label(c), a_label(l)), (b_label(c), b_label(l))])
        .collect();
    let k = k_shape.embed(&rename, &doubled_strands(&leaves)).unwrap();
    let (source, target) = fusion_endpoints(t);
    FusionElement { k, source, target }
}

/// ν^p = ∏_j K_j over the doubled source, listed as all a-copies then all
/// b-copies in the source's listing order.
pub fn nu(assoc: &Associator, p: &ParenthesizedOrderedMorphism) -> ChordSeries {
    let src = p.base().source().elements().to_vec();
    let strands = doubled_strands(&src);
    let mut acc = ChordSeries::one(&strands, assoc.degree);
    for t in p.trees() {
        if t.len() <= 1 {
            continue;
        }
        let k = fusion_element(assoc, t).k;
        acc = acc.mul(&k.embed(&BTreeMap::new(), &strands).unwrap());
    }
    acc
}

/// Product of Φ^{±1} along rotation paths, fiber by fiber, over the source
/// strands.
pub fn higher_associator(
    assoc: &Associator,
    p: &ParenthesizedOrderedMorphism,
    p2: &ParenthesizedOrderedMorphism,
) -> Result<ChordSeries, AssocError> {
    if p.base() != p2.base() {
        return Err(AssocError::BaseMismatch);
    }
    let strands = p.base().source().elements().to_vec();
    let mut acc = ChordSeries::one(&strands, assoc.degree);
    for (t1, t2) in p.trees().iter().zip(p2.trees()) {
        if t1 == t2 {
            continue;
        }
        let moves = rotations(t1, t2, &[])?;
        acc = acc.mul(&braid_to_chord(&assoc.phi, t1, &moves, &strands)?);
    }
    Ok(acc)
}

/// ν^q with each j-copy cabled into the p-fiber over j, over the doubled
/// source of p.
pub fn cable_along(nu_q: &ChordSeries, p: &OrderedMorphism) -> ChordSeries {
    let src = doubled_strands(p.source().elements());
    let blocks: Vec<Vec<String>> = nu_q
        .strands()
        .iter()
        .map(|s| {
            let (j, side) = s.rsplit_once('.').expect("doubled label");
            p.fiber(j)
                .expect("strand of the target")
                .iter()
                .map(|x| if side == "a" { a_label(x) } else { b_label(x) })
                .collect()
        })
        .collect();
    nu_q.pullback_blocks(&blocks, &src).unwrap()
}
