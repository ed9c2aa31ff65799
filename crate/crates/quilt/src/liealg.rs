//! Lie algebras and bialgebras by structure constants, Drinfeld doubles,
//! truncated BCH and the g-action on the formal group H.

use crate::jet::Jet;
use crate::linalg::{kernel, SparseVec};
use crate::rational::{fmt_q, parse_q, Q};
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error("structure constants are not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
    #[error("Jacobi identity fails on ({0}, {1}, {2})")]
    Jacobi(usize, usize, usize),
    #[error("cobracket is not a cocycle: the double fails Jacobi on ({0}, {1}, {2})")]
    Cocycle(usize, usize, usize),
    #[error("span is not closed under the bracket")]
    NotSubalgebra,
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Vector = Vec<Q>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    pub basis: Vec<String>,
    /// `c[i][j][k]` = c^k_{ij}: [e_i, e_j] = Σ_k c^k_{ij} e_k.
    pub c: Vec<Vec<Vec<Q>>>,
}

impl LieAlgebra {
    pub fn abelian(basis: &[&str]) -> Self {
        let n = basis.len();
        LieAlgebra { basis: basis.iter().map(|s| s.to_string()).collect(), c: vec![vec![vec![Q::zero(); n]; n]; n] }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn set_bracket(&mut self, i: usize, j: usize, v: &[Q]) {
        self.c[i][j] = v.to_vec();
        self.c[j][i] = v.iter().map(|x| -x).collect();
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Vector {
        let n = self.dim();
        let mut out = vec![Q::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let a = &x[i] * &y[j];
                for k in 0..n {
                    if !self.c[i][j][k].is_zero() {
                        out[k] += &a * &self.c[i][j][k];
                    }
                }
            }
        }
        out
    }

    pub fn unit(&self, i: usize) -> Vector {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    /// Ok, or the first basis triple violating antisymmetry or Jacobi.
    pub fn check_jacobi(&self) -> Result<(), LieError> {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.c[i][j][k] != -&self.c[j][i][k] {
                        return Err(LieError::NotAntisymmetric(i, j));
                    }
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (self.unit(i), self.unit(j), self.unit(k));
                    let s1 = self.bracket(&a, &self.bracket(&b, &c));
                    let s2 = self.bracket(&b, &self.bracket(&c, &a));
                    let s3 = self.bracket(&c, &self.bracket(&a, &b));
                    if s1.iter().zip(&s2).zip(&s3).any(|((x, y), z)| !(x + y + z).is_zero()) {
                        return Err(LieError::Jacobi(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }

    /// Bracket of g-valued jets.
    pub fn bracket_jets(&self, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
        let n = self.dim();
        let (nv, ord) = (x[0].nvars, x[0].order.min(y[0].order));
        let mut out = vec![Jet::zero(nv, ord); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() || self.c[i][j].iter().all(|c| c.is_zero()) {
                    continue;
                }
                let p = x[i].mul(&y[j]);
                for k in 0..n {
                    if !self.c[i][j][k].is_zero() {
                        out[k] = out[k].add(&p.scale(&self.c[i][j][k]));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieBialgebra {
    pub h: LieAlgebra,
    /// `d[i][j][k]` = d^{jk}_i: δ(e_i) = Σ_{j,k} d^{jk}_i e_j ⊗ e_k.
    pub d: Vec<Vec<Vec<Q>>>,
}

impl LieBialgebra {
    pub fn zero_cobracket(h: LieAlgebra) -> Self {
        let n = h.dim();
        LieBialgebra { h, d: vec![vec![vec![Q::zero(); n]; n]; n] }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    /// The two-dimensional example: [e1, e2] = e2, δ(e1) = 0, δ(e2) = e1 ∧ e2.
    pub fn example() -> Self {
        let mut h = LieAlgebra::abelian(&["e1", "e2"]);
        h.set_bracket(0, 1, &[Q::zero(), Q::one()]);
        let mut b = Self::zero_cobracket(h);
        b.d[1][0][1] = Q::one();
        b.d[1][1][0] = -Q::one();
        b
    }

    /// Abelian algebra of dimension n with zero cobracket.
    pub fn abelian(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        Self::zero_cobracket(LieAlgebra::abelian(&refs))
    }

    /// Parse the TOML description: `dim`, `basis`, a `[bracket]` table keyed
    /// by "ei ej" and a `[cobracket]` table keyed by basis element.
    pub fn from_toml(src: &str) -> Result<Self, LieError> {
        parse_bialgebra(src)
    }

    pub fn to_toml(&self) -> String {
        let n = self.dim();
        let b = &self.h.basis;
        let mut s = format!("dim = {n}\nbasis = [{}]\n\n[bracket]\n", b.iter().map(|x| format!("\"{x}\"")).collect::<Vec<_>>().join(", "));
        for i in 0..n {
            for j in i + 1..n {
                let v = &self.h.c[i][j];
                if v.iter().any(|x| !x.is_zero()) {
                    let body: Vec<String> = (0..n).filter(|k| !v[*k].is_zero()).map(|k| format!("{} = \"{}\"", b[k], fmt_q(&v[k]))).collect();
                    s.push_str(&format!("\"{} {}\" = {{ {} }}\n", b[i], b[j], body.join(", ")));
                }
            }
        }
        s.push_str("\n[cobracket]\n");
        for i in 0..n {
            let mut body = Vec::new();
            for j in 0..n {
                for k in j + 1..n {
                    if !self.d[i][j][k].is_zero() {
                        body.push(format!("\"{} {}\" = \"{}\"", b[j], b[k], fmt_q(&self.d[i][j][k])));
                    }
                }
            }
            if !body.is_empty() {
                s.push_str(&format!("{} = {{ {} }}\n", b[i], body.join(", ")));
            }
        }
        s
    }
}

fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|p| offset - p).unwrap_or(offset + 1);
    (line, col)
}

fn parse_bialgebra(src: &str) -> Result<LieBialgebra, LieError> {
    use toml::Spanned;
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Raw {
        dim: Spanned<usize>,
        basis: Spanned<Vec<Spanned<String>>>,
        #[serde(default)]
        bracket: BTreeMap<Spanned<String>, BTreeMap<Spanned<String>, Spanned<String>>>,
        #[serde(default)]
        cobracket: BTreeMap<Spanned<String>, BTreeMap<Spanned<String>, Spanned<String>>>,
    }
    let err = |span: std::ops::Range<usize>, msg: String| {
        let (line, col) = line_col(src, span.start);
        LieError::Parse { line, col, msg }
    };
    let raw: Raw = toml::from_str(src).map_err(|e| {
        let (line, col) = e.span().map(|s| line_col(src, s.start)).unwrap_or((1, 1));
        let msg = match e.message().trim() {
            "" => "invalid TOML".to_string(),
            m => m.to_string(),
        };
        LieError::Parse { line, col, msg }
    })?;
    let n = *raw.dim.get_ref();
    let names: Vec<String> = raw.basis.get_ref().iter().map(|s| s.get_ref().clone()).collect();
    if names.len() != n {
        return Err(err(raw.basis.span(), format!("basis has {} labels but dim = {n}", names.len())));
    }
    for (i, s) in raw.basis.get_ref().iter().enumerate() {
        if names[..i].contains(s.get_ref()) {
            return Err(err(s.span(), format!("duplicate basis label `{}`", s.get_ref())));
        }
    }
    let idx = |s: &Spanned<String>| -> Result<usize, LieError> {
        names.iter().position(|x| x == s.get_ref()).ok_or_else(|| err(s.span(), format!("unknown basis element `{}`", s.get_ref())))
    };
    let pair = |s: &Spanned<String>| -> Result<(usize, usize), LieError> {
        let parts: Vec<&str> = s.get_ref().split_whitespace().collect();
        if parts.len() != 2 {
            return Err(err(s.span(), format!("expected two basis elements in `{}`", s.get_ref())));
        }
        let f = |p: &str| names.iter().position(|x| x == p).ok_or_else(|| err(s.span(), format!("unknown basis element `{p}`")));
        let (a, b) = (f(parts[0])?, f(parts[1])?);
        if a == b {
            return Err(err(s.span(), "bracket of an element with itself".to_string()));
        }
        Ok((a, b))
    };
    let num = |s: &Spanned<String>| -> Result<Q, LieError> {
        parse_q(s.get_ref()).ok_or_else(|| err(s.span(), format!("not a rational number: `{}`", s.get_ref())))
    };
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut h = LieAlgebra::abelian(&refs);
    for (k, row) in &raw.bracket {
        let (i, j) = pair(k)?;
        let mut v = vec![Q::zero(); n];
        for (e, c) in row {
            v[idx(e)?] = num(c)?;
        }
        h.set_bracket(i, j, &v);
    }
    let mut b = LieBialgebra::zero_cobracket(h);
    for (k, row) in &raw.cobracket {
        let i = idx(k)?;
        for (e, c) in row {
            let (j, l) = pair(e)?;
            let x = num(c)?;
            b.d[i][j][l] = x.clone();
            b.d[i][l][j] = -x;
        }
    }
    Ok(b)
}

/// The double g = h ⊕ h* with basis e_1..e_n, e^1..e^n.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManinTriple {
    pub bialgebra: LieBialgebra,
    pub g: LieAlgebra,
    /// ⟨e_i, e^j⟩ = δ_ij.
    pub pairing: Vec<Vec<Q>>,
    pub n: usize,
}

/// Symmetric tensor t^{ab} on g.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CasimirElement {
    pub t: Vec<Vec<Q>>,
}

pub fn double(b: &LieBialgebra) -> Result<ManinTriple, LieError> {
    let n = b.dim();
    b.h.check_jacobi()?;
    let names: Vec<String> = b.h.basis.iter().cloned().chain(b.h.basis.iter().map(|s| format!("{s}*"))).collect();
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut g = LieAlgebra::abelian(&refs);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                g.c[i][j][k] = b.h.c[i][j][k].clone();
                g.c[n + i][n + j][n + k] = b.d[k][i][j].clone();
            }
        }
    }
    // [e_i, e^j] = Σ_k d^{jk}_i e_k + Σ_k c^j_{ki} e^k
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let a = b.d[i][j][k].clone();
                let c = b.h.c[k][i][j].clone();
                g.c[i][n + j][k] = a.clone();
                g.c[n + j][i][k] = -a;
                g.c[i][n + j][n + k] = c.clone();
                g.c[n + j][i][n + k] = -c;
            }
        }
    }
    g.check_jacobi().map_err(|e| match e {
        LieError::Jacobi(i, j, k) => LieError::Cocycle(i, j, k),
        other => other,
    })?;
    let mut pairing = vec![vec![Q::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        pairing[i][n + i] = Q::one();
        pairing[n + i][i] = Q::one();
    }
    Ok(ManinTriple { bialgebra: b.clone(), g, pairing, n })
}

impl ManinTriple {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn pair(&self, x: &[Q], y: &[Q]) -> Q {
        let mut s = Q::zero();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.pairing[i][j].is_zero() {
                    s += &x[i] * &y[j] * &self.pairing[i][j];
                }
            }
        }
        s
    }

    /// ⟨[z, x], y⟩ + ⟨x, [z, y]⟩ on all basis triples.
    pub fn pairing_invariant(&self) -> bool {
        let m = self.dim();
        (0..m).all(|a| {
            (0..m).all(|b| {
                (0..m).all(|c| {
                    let (z, x, y) = (self.g.unit(a), self.g.unit(b), self.g.unit(c));
                    (self.pair(&self.g.bracket(&z, &x), &y) + self.pair(&x, &self.g.bracket(&z, &y))).is_zero()
                })
            })
        })
    }

    pub fn h_span(&self) -> Vec<Vector> {
        (0..self.n).map(|i| self.g.unit(i)).collect()
    }

    pub fn hstar_span(&self) -> Vec<Vector> {
        (0..self.n).map(|i| self.g.unit(self.n + i)).collect()
    }

    pub fn project_h(&self, z: &[Jet]) -> Vec<Jet> {
        let zero = Jet::zero(z[0].nvars, z[0].order);
        (0..self.dim()).map(|i| if i < self.n { z[i].clone() } else { zero.clone() }).collect()
    }

    pub fn project_hstar(&self, z: &[Jet]) -> Vec<Jet> {
        let zero = Jet::zero(z[0].nvars, z[0].order);
        (0..self.dim()).map(|i| if i >= self.n { z[i].clone() } else { zero.clone() }).collect()
    }
}

pub fn casimir(mt: &ManinTriple) -> CasimirElement {
    let n = mt.n;
    let mut t = vec![vec![Q::zero(); 2 * n]; 2 * n];
    for i in 0..n {
        t[i][n + i] = Q::one();
        t[n + i][i] = Q::one();
    }
    CasimirElement { t }
}

impl CasimirElement {
    pub fn dim(&self) -> usize {
        self.t.len()
    }

    /// Σ_c (c^a_{ic} t^{cb} + c^b_{ic} t^{ac}) = 0 for all i, a, b.
    pub fn is_ad_invariant(&self, g: &LieAlgebra) -> bool {
        let m = self.dim();
        for i in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = Q::zero();
                    for c in 0..m {
                        s += &g.c[i][c][a] * &self.t[c][b] + &g.c[i][c][b] * &self.t[a][c];
                    }
                    if !s.is_zero() {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Nonzero entries.
    pub fn entries(&self) -> Vec<(usize, usize, Q)> {
        let mut v = Vec::new();
        for (a, row) in self.t.iter().enumerate() {
            for (b, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    v.push((a, b, x.clone()));
                }
            }
        }
        v
    }
}

/// A subalgebra given by spanning vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subalgebra {
    pub span: Vec<Vector>,
}

fn rank(vs: &[Vector]) -> usize {
    let mut e = crate::linalg::Echelon::new(false);
    for v in vs {
        let s: SparseVec = v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect();
        e.insert(&s);
    }
    e.rank()
}

impl Subalgebra {
    pub fn new(span: Vec<Vector>) -> Self {
        Subalgebra { span }
    }

    pub fn zero() -> Self {
        Subalgebra { span: Vec::new() }
    }

    pub fn is_closed(&self, g: &LieAlgebra) -> bool {
        let r = rank(&self.span);
        for a in &self.span {
            for b in &self.span {
                let mut vs = self.span.clone();
                vs.push(g.bracket(a, b));
                if rank(&vs) != r {
                    return false;
                }
            }
        }
        true
    }

    /// Basis of ann(c) ⊆ g*, as coordinate vectors.
    pub fn annihilator(&self, dim: usize) -> Vec<Vector> {
        let rows: Vec<SparseVec> = self
            .span
            .iter()
            .map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect())
            .collect();
        kernel(&rows, dim)
            .into_iter()
            .map(|k| (0..dim).map(|i| k.get(&i).cloned().unwrap_or_else(Q::zero)).collect())
            .collect()
    }

    pub fn dim(&self) -> usize {
        rank(&self.span)
    }
}

/// t restricted to ann(c) vanishes, i.e. t projects to zero in S²(g/c).
pub fn is_coisotropic(c: &Subalgebra, g: &LieAlgebra, t: &CasimirElement) -> Result<bool, LieError> {
    if !c.is_closed(g) {
        return Err(LieError::NotSubalgebra);
    }
    let ann = c.annihilator(g.dim());
    for a in &ann {
        for b in &ann {
            let mut s = Q::zero();
            for (i, j, x) in t.entries() {
                s += &a[i] * &b[j] * x;
            }
            if !s.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Coefficients of log(e^X e^Y) on words in X (0) and Y (1), divided by the
/// word length, so that the Dynkin map of the left-normed brackets yields
/// the series.
static BCH_CACHE: Lazy<RwLock<HashMap<usize, Arc<Vec<(Vec<u8>, Q)>>>>> = Lazy::new(|| RwLock::new(HashMap::new()));

pub fn bch_words(n: usize) -> Arc<Vec<(Vec<u8>, Q)>> {
    if let Some(v) = BCH_CACHE.read().unwrap().get(&n) {
        return v.clone();
    }
    type Poly = BTreeMap<Vec<u8>, Q>;
    let mul = |a: &Poly, b: &Poly| -> Poly {
        let mut out = Poly::new();
        for (u, x) in a {
            for (v, y) in b {
                if u.len() + v.len() > n {
                    continue;
                }
                let mut w = u.clone();
                w.extend(v);
                *out.entry(w).or_insert_with(Q::zero) += x * y;
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    };
    let expo = |l: u8| -> Poly {
        (0..=n).map(|k| (vec![l; k], Q::one() / crate::rational::factorial(k))).collect()
    };
    let p = mul(&expo(0), &expo(1));
    let mut x = p.clone();
    x.remove(&Vec::new());
    let mut log = Poly::new();
    let mut pw: Poly = [(Vec::new(), Q::one())].into_iter().collect();
    for k in 1..=n {
        pw = mul(&pw, &x);
        let s = Q::new(if k % 2 == 1 { 1 } else { -1 }, k as i64);
        for (w, c) in &pw {
            *log.entry(w.clone()).or_insert_with(Q::zero) += c * &s;
        }
    }
    let v: Vec<(Vec<u8>, Q)> = log
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(w, c)| {
            let d = w.len() as i64;
            (w, c / Q::int(d))
        })
        .collect();
    let v = Arc::new(v);
    BCH_CACHE.write().unwrap().insert(n, v.clone());
    v
}

/// bch(x, y) for g-valued jets, truncated at the jets' order. Inputs must
/// have no constant terms.
pub fn bch(g: &LieAlgebra, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
    let order = x[0].order.min(y[0].order);
    let words = bch_words(order);
    let nv = x[0].nvars;
    let mut out = vec![Jet::zero(nv, order); g.dim()];
    // Left-normed brackets share prefixes; memoize them.
    let mut memo: HashMap<Vec<u8>, Vec<Jet>> = HashMap::new();
    memo.insert(vec![0], x.to_vec());
    memo.insert(vec![1], y.to_vec());
    for (w, c) in words.iter() {
        let val = left_normed(g, w, &mut memo);
        for k in 0..g.dim() {
            out[k] = out[k].add(&val[k].scale(c));
        }
    }
    out
}

fn left_normed(g: &LieAlgebra, w: &[u8], memo: &mut HashMap<Vec<u8>, Vec<Jet>>) -> Vec<Jet> {
    if let Some(v) = memo.get(w) {
        return v.clone();
    }
    let head = left_normed(g, &w[..w.len() - 1], memo);
    let last = memo[&vec![w[w.len() - 1]]].clone();
    let v = g.bracket_jets(&head, &last);
    memo.insert(w.to_vec(), v.clone());
    v
}

/// Which side the group element is multiplied from, and the order of the
/// factorization G ≅ H* × H.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SideConvention {
    /// exp(x)·exp(tξ) when true, exp(−tξ)·exp(x) otherwise (the sign keeps
    /// ξ ↦ V_ξ a homomorphism for the left action). The selected right action
    /// restricts on h to the left-invariant vector fields.
    pub right_multiply: bool,
    /// z = bch(λ, x) when true, z = bch(x, λ) otherwise.
    pub dual_first: bool,
}

impl SideConvention {
    pub const SELECTED: SideConvention = SideConvention { right_multiply: true, dual_first: true };

    pub fn all() -> [SideConvention; 4] {
        [
            SideConvention { right_multiply: true, dual_first: true },
            SideConvention { right_multiply: true, dual_first: false },
            SideConvention { right_multiply: false, dual_first: true },
            SideConvention { right_multiply: false, dual_first: false },
        ]
    }
}

/// Solve z = bch(λ, x) (or bch(x, λ)) with λ ∈ h*, x ∈ h.
pub fn factorize_with(mt: &ManinTriple, z: &[Jet], dual_first: bool) -> (Vec<Jet>, Vec<Jet>) {
    let order = z[0].order;
    let mut lam = mt.project_hstar(z);
    let mut x = mt.project_h(z);
    for _ in 0..=order {
        let w = if dual_first { bch(&mt.g, &lam, &x) } else { bch(&mt.g, &x, &lam) };
        let r: Vec<Jet> = z.iter().zip(&w).map(|(a, b)| a.sub(b)).collect();
        if r.iter().all(|j| j.is_zero()) {
            break;
        }
        let (rl, rx) = (mt.project_hstar(&r), mt.project_h(&r));
        lam = lam.iter().zip(&rl).map(|(a, b)| a.add(b)).collect();
        x = x.iter().zip(&rx).map(|(a, b)| a.add(b)).collect();
    }
    (lam, x)
}

pub fn factorize(mt: &ManinTriple, z: &[Jet]) -> (Vec<Jet>, Vec<Jet>) {
    factorize_with(mt, z, SideConvention::SELECTED.dual_first)
}

/// Action fields on H in exponential coordinates: for each basis element of
/// g, the coefficient jets (one per coordinate of h), trusted to order `n`.
pub fn g_action_on_h(mt: &ManinTriple, n: usize) -> Vec<Vec<Jet>> {
    g_action_on_h_with(mt, n, SideConvention::SELECTED)
}

pub fn g_action_on_h_with(mt: &ManinTriple, n: usize, side: SideConvention) -> Vec<Vec<Jet>> {
    let dim_h = mt.n;
    let nv = dim_h + 1;
    let order = n + 1;
    let zero = Jet::zero(nv, order);
    let t = Jet::var(nv, order, dim_h);
    let point: Vec<Jet> = (0..mt.dim()).map(|i| if i < dim_h { Jet::var(nv, order, i) } else { zero.clone() }).collect();
    (0..mt.dim())
        .map(|a| {
            let ta = if side.right_multiply { t.clone() } else { t.neg() };
            let xi: Vec<Jet> = (0..mt.dim()).map(|i| if i == a { ta.clone() } else { zero.clone() }).collect();
            let z = if side.right_multiply { bch(&mt.g, &point, &xi) } else { bch(&mt.g, &xi, &point) };
            let (_, x) = factorize_with(mt, &z, side.dual_first);
            (0..dim_h)
                .map(|k| {
                    // coefficient of t^1, as a jet in the h-coordinates
                    let mut out = Jet::zero(dim_h, n);
                    for (e, c) in &x[k].terms {
                        if e[dim_h] == 1 && crate::jet::exp_degree(&e[..dim_h]) <= n {
                            out.terms.insert(e[..dim_h].to_vec(), c.clone());
                        }
                    }
                    out
                })
                .collect()
        })
        .collect()
}
