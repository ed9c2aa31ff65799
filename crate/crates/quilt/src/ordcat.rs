//! Ordered morphisms of finite sets, parenthesized fibers and rotation paths.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

pub type Label = String;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrdError {
    #[error("duplicate label `{0}`")]
    Duplicate(Label),
    #[error("unknown label `{0}`")]
    Unknown(Label),
    #[error("element `{0}` appears in no fiber or in more than one")]
    BadFiber(Label),
    #[error("target of the first morphism does not match the source of the second")]
    Mismatch,
    #[error("leaf sequences differ")]
    LeafMismatch,
    #[error("tree over `{0}` does not match its fiber")]
    TreeMismatch(Label),
    #[error("invalid rotation at {0:?}")]
    BadStep(Vec<bool>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinSet {
    elements: Vec<Label>,
}

impl FinSet {
    pub fn new<S: Into<Label>>(elements: impl IntoIterator<Item = S>) -> Result<Self, OrdError> {
        let elements: Vec<Label> = elements.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for e in &elements {
            if !seen.insert(e) {
                return Err(OrdError::Duplicate(e.clone()));
            }
        }
        Ok(FinSet { elements })
    }

    pub fn elements(&self) -> &[Label] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, x: &str) -> bool {
        self.elements.iter().any(|e| e == x)
    }

    pub fn position(&self, x: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == x)
    }

    /// Same elements; equality of sets ignores listing order.
    pub fn same_set(&self, other: &FinSet) -> bool {
        let a: BTreeSet<_> = self.elements.iter().collect();
        let b: BTreeSet<_> = other.elements.iter().collect();
        a == b
    }
}

/// A map of finite sets with a total order on every fiber. Fibers are stored
/// in the listing order of the target.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderedMorphism {
    source: FinSet,
    target: FinSet,
    fibers: Vec<Vec<Label>>,
}

impl OrderedMorphism {
    /// Build from fiber sequences given per target element.
    pub fn new(
        source: FinSet,
        target: FinSet,
        fibers: &BTreeMap<Label, Vec<Label>>,
    ) -> Result<Self, OrdError> {
        for k in fibers.keys() {
            if !target.contains(k) {
                return Err(OrdError::Unknown(k.clone()));
            }
        }
        let fibers: Vec<Vec<Label>> = target
            .elements()
            .iter()
            .map(|t| fibers.get(t).cloned().unwrap_or_default())
            .collect();
        let mut count: BTreeMap<&str, usize> = BTreeMap::new();
        for f in &fibers {
            for x in f {
                if !source.contains(x) {
                    return Err(OrdError::Unknown(x.clone()));
                }
                *count.entry(x).or_default() += 1;
            }
        }
        for s in source.elements() {
            if count.get(s.as_str()).copied() != Some(1) {
                return Err(OrdError::BadFiber(s.clone()));
            }
        }
        Ok(OrderedMorphism { source, target, fibers })
    }

    /// Convenience constructor from string slices.
    pub fn from_fibers(source: &[&str], target: &[&str], fibers: &[(&str, &[&str])]) -> Result<Self, OrdError> {
        let map = fibers
            .iter()
            .map(|(t, f)| (t.to_string(), f.iter().map(|s| s.to_string()).collect()))
            .collect();
        Self::new(FinSet::new(source.iter().copied())?, FinSet::new(target.iter().copied())?, &map)
    }

    pub fn identity(s: &FinSet) -> Self {
        OrderedMorphism {
            source: s.clone(),
            target: s.clone(),
            fibers: s.elements().iter().map(|x| vec![x.clone()]).collect(),
        }
    }

    pub fn source(&self) -> &FinSet {
        &self.source
    }

    pub fn target(&self) -> &FinSet {
        &self.target
    }

    pub fn fibers(&self) -> &[Vec<Label>] {
        &self.fibers
    }

    pub fn fiber(&self, t: &str) -> Option<&[Label]> {
        self.target.position(t).map(|i| self.fibers[i].as_slice())
    }

    pub fn apply(&self, x: &str) -> Option<&Label> {
        self.fibers
            .iter()
            .position(|f| f.iter().any(|y| y == x))
            .map(|i| &self.target.elements()[i])
    }

    pub fn assignment(&self) -> BTreeMap<Label, Label> {
        let mut m = BTreeMap::new();
        for (t, f) in self.target.elements().iter().zip(&self.fibers) {
            for x in f {
                m.insert(x.clone(), t.clone());
            }
        }
        m
    }

    pub fn is_surjective(&self) -> bool {
        self.fibers.iter().all(|f| !f.is_empty())
    }

    pub fn reverse(&self) -> Self {
        let mut r = self.clone();
        for f in &mut r.fibers {
            f.reverse();
        }
        r
    }
}

/// `q ∘ p`: the fiber over z concatenates the p-fibers over q's fiber of z.
pub fn compose(p: &OrderedMorphism, q: &OrderedMorphism) -> Result<OrderedMorphism, OrdError> {
    if !p.target.same_set(&q.source) {
        return Err(OrdError::Mismatch);
    }
    let fibers = q
        .fibers
        .iter()
        .map(|qf| qf.iter().flat_map(|j| p.fiber(j).unwrap().iter().cloned()).collect())
        .collect();
    Ok(OrderedMorphism { source: p.source.clone(), target: q.target.clone(), fibers })
}

/// Full binary tree; leaves carry labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tree {
    Empty,
    Leaf(Label),
    Node(Box<Tree>, Box<Tree>),
}

impl Tree {
    pub fn leaf(s: impl Into<Label>) -> Tree {
        Tree::Leaf(s.into())
    }

    pub fn node(a: Tree, b: Tree) -> Tree {
        Tree::Node(Box::new(a), Box::new(b))
    }

    pub fn leaves(&self) -> Vec<Label> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Label>) {
        match self {
            Tree::Empty => {}
            Tree::Leaf(s) => out.push(s.clone()),
            Tree::Node(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Tree::Empty => 0,
            Tree::Leaf(_) => 1,
            Tree::Node(a, b) => a.len() + b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Tree::Empty)
    }

    /// Left comb (((1 2) 3) ...) on the given leaves.
    pub fn left_comb(leaves: &[Label]) -> Tree {
        let mut it = leaves.iter();
        let Some(first) = it.next() else { return Tree::Empty };
        it.fold(Tree::leaf(first.clone()), |acc, x| Tree::node(acc, Tree::leaf(x.clone())))
    }

    pub fn right_comb(leaves: &[Label]) -> Tree {
        let mut it = leaves.iter().rev();
        let Some(last) = it.next() else { return Tree::Empty };
        it.fold(Tree::leaf(last.clone()), |acc, x| Tree::node(Tree::leaf(x.clone()), acc))
    }

    pub fn at(&self, path: &[bool]) -> Option<&Tree> {
        match path.split_first() {
            None => Some(self),
            Some((d, rest)) => match self {
                Tree::Node(a, b) => if *d { b.at(rest) } else { a.at(rest) },
                _ => None,
            },
        }
    }

    fn at_mut(&mut self, path: &[bool]) -> Option<&mut Tree> {
        match path.split_first() {
            None => Some(self),
            Some((d, rest)) => match self {
                Tree::Node(a, b) => if *d { b.at_mut(rest) } else { a.at_mut(rest) },
                _ => None,
            },
        }
    }

    /// Relabel leaves through `f`.
    pub fn map_leaves(&self, f: &impl Fn(&str) -> Label) -> Tree {
        match self {
            Tree::Empty => Tree::Empty,
            Tree::Leaf(s) => Tree::Leaf(f(s)),
            Tree::Node(a, b) => Tree::node(a.map_leaves(f), b.map_leaves(f)),
        }
    }

    /// Replace each leaf by a tree; empty replacements are pruned.
    pub fn graft(&self, f: &impl Fn(&str) -> Tree) -> Tree {
        match self {
            Tree::Empty => Tree::Empty,
            Tree::Leaf(s) => f(s),
            Tree::Node(a, b) => match (a.graft(f), b.graft(f)) {
                (Tree::Empty, y) => y,
                (x, Tree::Empty) => x,
                (x, y) => Tree::node(x, y),
            },
        }
    }

    /// Rotate at `path`: LR sends ((X Y) Z) to (X (Y Z)), RL the converse.
    pub fn rotate(&mut self, path: &[bool], dir: Direction) -> Result<(), OrdError> {
        let node = self.at_mut(path).ok_or_else(|| OrdError::BadStep(path.to_vec()))?;
        let t = std::mem::replace(node, Tree::Empty);
        let rotated = match (dir, t) {
            (Direction::LeftToRight, Tree::Node(l, z)) => match *l {
                Tree::Node(x, y) => Ok(Tree::Node(x, Box::new(Tree::Node(y, z)))),
                other => Err(Tree::Node(Box::new(other), z)),
            },
            (Direction::RightToLeft, Tree::Node(x, r)) => match *r {
                Tree::Node(y, z) => Ok(Tree::Node(Box::new(Tree::Node(x, y)), z)),
                other => Err(Tree::Node(x, Box::new(other))),
            },
            (_, other) => Err(other),
        };
        match rotated {
            Ok(t) => {
                *node = t;
                Ok(())
            }
            Err(t) => {
                *node = t;
                Err(OrdError::BadStep(path.to_vec()))
            }
        }
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Empty => write!(f, "()"),
            Tree::Leaf(s) => write!(f, "{s}"),
            Tree::Node(a, b) => write!(f, "({a} {b})"),
        }
    }
}

/// All full binary trees with the given leaf sequence.
pub fn enumerate_parenthesizations(leaves: &[Label]) -> Vec<Tree> {
    match leaves.len() {
        0 => vec![Tree::Empty],
        1 => vec![Tree::leaf(leaves[0].clone())],
        n => {
            let mut out = Vec::new();
            for k in 1..n {
                let ls = enumerate_parenthesizations(&leaves[..k]);
                let rs = enumerate_parenthesizations(&leaves[k..]);
                for l in &ls {
                    for r in &rs {
                        out.push(Tree::node(l.clone(), r.clone()));
                    }
                }
            }
            out
        }
    }
}

/// Trees on leaves `1..=n`.
pub fn enumerate_parenthesizations_n(n: usize) -> Vec<Tree> {
    let leaves: Vec<Label> = (1..=n).map(|i| i.to_string()).collect();
    enumerate_parenthesizations(&leaves)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

impl Direction {
    pub fn inverse(self) -> Self {
        match self {
            Direction::LeftToRight => Direction::RightToLeft,
            Direction::RightToLeft => Direction::LeftToRight,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReparenthesizationStep {
    pub target: Label,
    pub node_path: Vec<bool>,
    pub direction: Direction,
}

fn comb_steps(t: &Tree, target: &str) -> Vec<ReparenthesizationStep> {
    let mut t = t.clone();
    let mut steps = Vec::new();
    let mut path = Vec::new();
    while let Some(Tree::Node(_, _)) = t.at(&path) {
        while let Some(Tree::Node(_, r)) = t.at(&path) {
            if !matches!(**r, Tree::Node(_, _)) {
                break;
            }
            t.rotate(&path, Direction::RightToLeft).unwrap();
            steps.push(ReparenthesizationStep {
                target: target.to_string(),
                node_path: path.clone(),
                direction: Direction::RightToLeft,
            });
        }
        path.push(false);
    }
    steps
}

/// Rotation path from `t1` to `t2` through the left comb.
pub fn reparenthesization_path(
    t1: &Tree,
    t2: &Tree,
    target: &str,
) -> Result<Vec<ReparenthesizationStep>, OrdError> {
    if t1.leaves() != t2.leaves() {
        return Err(OrdError::LeafMismatch);
    }
    let mut steps = comb_steps(t1, target);
    let mut back = comb_steps(t2, target);
    // Shared tails of the two walks to the comb cancel.
    while let (Some(a), Some(b)) = (steps.last(), back.last()) {
        if a != b {
            break;
        }
        steps.pop();
        back.pop();
    }
    steps.extend(back.into_iter().rev().map(|mut s| {
        s.direction = s.direction.inverse();
        s
    }));
    Ok(steps)
}

pub fn apply_steps(t: &Tree, steps: &[ReparenthesizationStep]) -> Result<Tree, OrdError> {
    let mut t = t.clone();
    for s in steps {
        t.rotate(&s.node_path, s.direction)?;
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParenthesizedOrderedMorphism {
    base: OrderedMorphism,
    trees: Vec<Tree>,
}

impl ParenthesizedOrderedMorphism {
    pub fn new(base: OrderedMorphism, trees: Vec<Tree>) -> Result<Self, OrdError> {
        if trees.len() != base.fibers.len() {
            return Err(OrdError::Mismatch);
        }
        for ((t, f), name) in trees.iter().zip(&base.fibers).zip(base.target.elements()) {
            if &t.leaves() != f {
                return Err(OrdError::TreeMismatch(name.clone()));
            }
        }
        Ok(ParenthesizedOrderedMorphism { base, trees })
    }

    pub fn base(&self) -> &OrderedMorphism {
        &self.base
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn tree(&self, t: &str) -> Option<&Tree> {
        self.base.target.position(t).map(|i| &self.trees[i])
    }

    pub fn identity(s: &FinSet) -> Self {
        standard_parenthesization(&OrderedMorphism::identity(s))
    }
}

pub fn standard_parenthesization(p: &OrderedMorphism) -> ParenthesizedOrderedMorphism {
    ParenthesizedOrderedMorphism {
        base: p.clone(),
        trees: p.fibers.iter().map(|f| Tree::left_comb(f)).collect(),
    }
}

pub fn compose_parenthesized(
    p: &ParenthesizedOrderedMorphism,
    q: &ParenthesizedOrderedMorphism,
) -> Result<ParenthesizedOrderedMorphism, OrdError> {
    let base = compose(&p.base, &q.base)?;
    let trees = q
        .trees
        .iter()
        .map(|t| t.graft(&|j: &str| p.tree(j).cloned().unwrap_or(Tree::Empty)))
        .collect();
    Ok(ParenthesizedOrderedMorphism { base, trees })
}

/// Monospace drawing of the polygonal picture: one polygon per target
/// element, its top edge named by the target, bottom edges by the fiber.
pub fn render(p: &OrderedMorphism) -> String {
    let mut out = String::new();
    for (t, f) in p.target.elements().iter().zip(&p.fibers) {
        let bottom = if f.is_empty() {
            "+".to_string()
        } else {
            format!("+-{}-+", f.join("-+-"))
        };
        let w = bottom.chars().count().max(t.chars().count() + 4);
        let pad = w.saturating_sub(t.chars().count() + 2);
        let top = format!("+{}{}{}+", "-".repeat(pad / 2), t, "-".repeat(pad - pad / 2));
        let side = format!("|{}|", " ".repeat(w.saturating_sub(2)));
        out.push_str(&format!("{top}\n{side}\n{bottom}\n\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<Label> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    pub(crate) fn sample_p() -> OrderedMorphism {
        OrderedMorphism::from_fibers(
            &["1a", "2a", "1b", "2b", "3b", "1c"],
            &["a", "b", "c"],
            &[("a", &["1a", "2a"]), ("b", &["1b", "2b", "3b"]), ("c", &["1c"])],
        )
        .unwrap()
    }

    #[test]
    fn lexicographic_composite() {
        let p = sample_p();
        let q = OrderedMorphism::from_fibers(&["a", "b", "c"], &["x", "y"], &[("x", &["a", "c"]), ("y", &["b"])])
            .unwrap();
        let qp = compose(&p, &q).unwrap();
        assert_eq!(qp.fiber("x").unwrap(), labels(&["1a", "2a", "1c"]).as_slice());
        assert_eq!(qp.fiber("y").unwrap(), labels(&["1b", "2b", "3b"]).as_slice());
        assert_eq!(compose(&p, &OrderedMorphism::identity(p.target())).unwrap(), p);
        assert_eq!(compose(&OrderedMorphism::identity(p.source()), &p).unwrap(), p);
        assert!(compose(&q, &p).is_err());
    }

    #[test]
    fn bad_fibers_rejected() {
        let r = OrderedMorphism::from_fibers(&["1", "2"], &["a"], &[("a", &["1"])]);
        assert_eq!(r, Err(OrdError::BadFiber("2".into())));
        assert!(FinSet::new(["x", "x"]).is_err());
    }

    #[test]
    fn catalan_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| enumerate_parenthesizations_n(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 14, 42]);
    }

    #[test]
    fn basic_rotation_is_one_step() {
        let l = Tree::left_comb(&labels(&["1", "2", "3"]));
        let r = Tree::right_comb(&labels(&["1", "2", "3"]));
        let path = reparenthesization_path(&l, &r, "x").unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(path[0].direction, Direction::LeftToRight);
        assert_eq!(apply_steps(&l, &path).unwrap(), r);
        assert!(reparenthesization_path(&l, &l, "x").unwrap().is_empty());
    }

    #[test]
    fn standard_is_left_comb() {
        let sp = standard_parenthesization(&sample_p());
        assert_eq!(sp.tree("b").unwrap().to_string(), "((1b 2b) 3b)");
        assert_eq!(sp.tree("c").unwrap().to_string(), "1c");
    }

    #[test]
    fn render_draws_edges() {
        let s = render(&sample_p());
        assert!(s.contains("+-1a-+-2a-+"));
        assert!(s.contains("+-1b-+-2b-+-3b-+"));
        assert!(s.contains("+-1c-+"));
    }
}
