//! Exact rational scalars.
//!
//! Values that fit machine words stay in an `i64` fraction; anything larger
//! is promoted to an arbitrary-precision fraction. The representation is
//! canonical, so derived equality and hashing are value equality.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Q {
    /// Reduced, denominator positive.
    Small(i64, i64),
    Big(BigRational),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Q {
    fn from_i128(n: i128, d: i128) -> Q {
        debug_assert!(d != 0);
        let g = gcd_i128(n, d);
        let (mut n, mut d) = if g > 1 { (n / g, d / g) } else { (n, d) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(a), Ok(b)) if a != i64::MIN => Q::Small(a, b),
            _ => Q::Big(BigRational::new(BigInt::from(n), BigInt::from(d))),
        }
    }

    fn from_big(r: BigRational) -> Q {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(a), Some(b)) if a != i64::MIN => Q::Small(a, b),
            _ => Q::Big(r),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Q::Small(a, b) => BigRational::new_raw(BigInt::from(*a), BigInt::from(*b)),
            Q::Big(r) => r.clone(),
        }
    }

    pub fn new(n: i64, d: i64) -> Q {
        assert!(d != 0, "zero denominator");
        Q::from_i128(n as i128, d as i128)
    }

    pub fn from_bigints(n: BigInt, d: BigInt) -> Q {
        Q::from_big(BigRational::new(n, d))
    }

    pub fn int(n: i64) -> Q {
        Q::from_i128(n as i128, 1)
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Q::Small(a, _) => BigInt::from(*a),
            Q::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Q::Small(_, b) => BigInt::from(*b),
            Q::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Q::Small(_, b) => *b == 1,
            Q::Big(r) => r.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Q::Small(a, _) => *a < 0,
            Q::Big(r) => r.is_negative(),
        }
    }

    pub fn recip(&self) -> Q {
        match self {
            Q::Small(a, b) => Q::from_i128(*b as i128, *a as i128),
            Q::Big(r) => Q::from_big(r.recip()),
        }
    }

    pub fn pow(&self, k: u32) -> Q {
        let mut out = Q::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl Zero for Q {
    fn zero() -> Q {
        Q::Small(0, 1)
    }
    fn is_zero(&self) -> bool {
        matches!(self, Q::Small(0, _))
    }
}

impl One for Q {
    fn one() -> Q {
        Q::Small(1, 1)
    }
}

impl Default for Q {
    fn default() -> Q {
        Q::zero()
    }
}

fn add_ref(x: &Q, y: &Q) -> Q {
    match (x, y) {
        (Q::Small(a, b), Q::Small(c, d)) => {
            if b == d {
                Q::from_i128(*a as i128 + *c as i128, *b as i128)
            } else {
                Q::from_i128(*a as i128 * *d as i128 + *c as i128 * *b as i128, *b as i128 * *d as i128)
            }
        }
        _ => Q::from_big(x.to_big() + y.to_big()),
    }
}

fn mul_ref(x: &Q, y: &Q) -> Q {
    match (x, y) {
        (Q::Small(a, b), Q::Small(c, d)) => {
            if *a == 0 || *c == 0 {
                return Q::zero();
            }
            // Cross-cancel first so products stay small.
            let g1 = a.gcd(d);
            let g2 = c.gcd(b);
            let n = (*a / g1) as i128 * (*c / g2) as i128;
            let m = (*b / g2) as i128 * (*d / g1) as i128;
            match (i64::try_from(n), i64::try_from(m)) {
                (Ok(p), Ok(q)) if p != i64::MIN => Q::Small(p, q),
                _ => Q::Big(BigRational::new(BigInt::from(n), BigInt::from(m))),
            }
        }
        _ => Q::from_big(x.to_big() * y.to_big()),
    }
}

fn neg_ref(x: &Q) -> Q {
    match x {
        Q::Small(a, b) => Q::Small(-a, *b),
        Q::Big(r) => Q::from_big(-r),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:expr) => {
        impl $tr<&Q> for &Q {
            type Output = Q;
            fn $m(self, o: &Q) -> Q {
                $f(self, o)
            }
        }
        impl $tr<Q> for Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                $f(&self, &o)
            }
        }
        impl $tr<&Q> for Q {
            type Output = Q;
            fn $m(self, o: &Q) -> Q {
                $f(&self, o)
            }
        }
        impl $tr<Q> for &Q {
            type Output = Q;
            fn $m(self, o: Q) -> Q {
                $f(self, &o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Mul, mul, mul_ref);
binop!(Sub, sub, |x: &Q, y: &Q| add_ref(x, &neg_ref(y)));
binop!(Div, div, |x: &Q, y: &Q| {
    assert!(!y.is_zero(), "division by zero");
    mul_ref(x, &y.recip())
});

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        neg_ref(&self)
    }
}

impl Neg for &Q {
    type Output = Q;
    fn neg(self) -> Q {
        neg_ref(self)
    }
}

impl AddAssign<&Q> for Q {
    fn add_assign(&mut self, o: &Q) {
        *self = add_ref(self, o);
    }
}

impl AddAssign<Q> for Q {
    fn add_assign(&mut self, o: Q) {
        *self = add_ref(self, &o);
    }
}

impl SubAssign<&Q> for Q {
    fn sub_assign(&mut self, o: &Q) {
        *self = add_ref(self, &neg_ref(o));
    }
}

impl SubAssign<Q> for Q {
    fn sub_assign(&mut self, o: Q) {
        *self = add_ref(self, &neg_ref(&o));
    }
}

impl MulAssign<&Q> for Q {
    fn mul_assign(&mut self, o: &Q) {
        *self = mul_ref(self, o);
    }
}

impl MulAssign<Q> for Q {
    fn mul_assign(&mut self, o: Q) {
        *self = mul_ref(self, &o);
    }
}

impl Sum for Q {
    fn sum<I: Iterator<Item = Q>>(it: I) -> Q {
        it.fold(Q::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Q> for Q {
    fn sum<I: Iterator<Item = &'a Q>>(it: I) -> Q {
        it.fold(Q::zero(), |a, b| a + b)
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, o: &Q) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Q {
    fn cmp(&self, o: &Q) -> Ordering {
        match (self, o) {
            (Q::Small(a, b), Q::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&o.to_big()),
        }
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_q(self))
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_q(self))
    }
}

impl From<i64> for Q {
    fn from(n: i64) -> Q {
        Q::int(n)
    }
}

pub fn q(n: i64) -> Q {
    Q::int(n)
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// Canonical "p/q" string; integers print without a denominator.
pub fn fmt_q(x: &Q) -> String {
    match x {
        Q::Small(a, 1) => a.to_string(),
        Q::Small(a, b) => format!("{a}/{b}"),
        Q::Big(r) if r.is_integer() => r.numer().to_string(),
        Q::Big(r) => format!("{}/{}", r.numer(), r.denom()),
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    match s.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().ok()?;
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::from_bigints(n, d))
        }
        None => Some(Q::from_bigints(s.parse().ok()?, BigInt::one())),
    }
}

pub fn factorial(n: usize) -> Q {
    let mut f = BigInt::one();
    for k in 2..=n {
        f *= BigInt::from(k);
    }
    Q::from_bigints(f, BigInt::one())
}
