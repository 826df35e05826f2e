//! Truncated multivariate power series in supercommuting variables.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A series variable `T_{kind,index}`; odd variables square to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub kind: u8,
    pub index: u16,
    pub odd: bool,
}

impl Var {
    pub fn even(kind: u8, index: u16) -> Self {
        Var { kind, index, odd: false }
    }

    pub fn odd(kind: u8, index: u16) -> Self {
        Var { kind, index, odd: true }
    }

    fn key(&self) -> (u8, u16) {
        (self.kind, self.index)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}_{}", self.kind, self.index)
    }
}

/// Sorted by variable, exponents positive, odd exponents equal to one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|(_, e)| *e as usize).sum()
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    /// Product and whether the reordering of odd variables is odd; `None` if
    /// an odd variable repeats.
    pub fn mul(&self, o: &Monomial) -> Option<(Monomial, bool)> {
        let mut sign = false;
        // odd variables of `o` moving left past larger odd variables of `self`
        for (b, _) in o.0.iter().filter(|(v, _)| v.odd) {
            let passed = self.0.iter().filter(|(a, _)| a.odd && a.key() > b.key()).count();
            sign ^= passed % 2 == 1;
        }
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(self.0.len() + o.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < o.0.len() {
            let take_left = j == o.0.len() || (i < self.0.len() && self.0[i].0.key() <= o.0[j].0.key());
            let item = if take_left {
                i += 1;
                self.0[i - 1]
            } else {
                j += 1;
                o.0[j - 1]
            };
            match out.last_mut() {
                Some(last) if last.0.key() == item.0.key() => {
                    if item.0.odd {
                        return None;
                    }
                    last.1 += item.1;
                }
                _ => out.push(item),
            }
        }
        Some((Monomial(out), sign))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        f.write_str(&parts.join("*"))
    }
}

/// Truncated series; terms of total degree above `cap` are discarded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub cap: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Series {
    pub fn zero(cap: usize) -> Self {
        Series { cap, terms: BTreeMap::new() }
    }

    pub fn constant(c: Rational, cap: usize) -> Self {
        let mut s = Series::zero(cap);
        s.add_term(Monomial::one(), c);
        s
    }

    pub fn var(v: Var, cap: usize) -> Self {
        let mut s = Series::zero(cap);
        s.add_term(Monomial::var(v), Rational::one());
        s
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if m.degree() > self.cap || c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut out = Series { cap: self.cap.min(o.cap), terms: BTreeMap::new() };
        for (m, c) in self.terms.iter().chain(o.terms.iter()) {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn scale(&self, k: &Rational) -> Series {
        let mut out = Series::zero(self.cap);
        if !k.is_zero() {
            for (m, c) in &self.terms {
                out.terms.insert(m.clone(), c * k);
            }
        }
        out
    }

    pub fn mul(&self, o: &Series) -> Series {
        let mut out = Series::zero(self.cap.min(o.cap));
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if a.degree() + b.degree() > out.cap {
                    continue;
                }
                if let Some((m, neg)) = a.mul(b) {
                    let c = ca * cb;
                    out.add_term(m, if neg { -c } else { c });
                }
            }
        }
        out
    }

    /// Left partial derivative.
    pub fn partial(&self, v: Var) -> Result<Series> {
        let mut out = Series::zero(self.cap);
        for (m, c) in &self.terms {
            let Some(pos) = m.0.iter().position(|(x, _)| x.key() == v.key()) else { continue };
            if m.0[pos].0.odd != v.odd {
                return Err(Error::UnknownVariable(format!("{v} (parity mismatch)")));
            }
            let mut f = m.0.clone();
            let e = f[pos].1;
            let mut coeff = c * rational::int(e as i64);
            if v.odd {
                let before = f[..pos].iter().filter(|(x, _)| x.odd).count();
                if before % 2 == 1 {
                    coeff = -coeff;
                }
            }
            if e == 1 {
                f.remove(pos);
            } else {
                f[pos].1 -= 1;
            }
            out.add_term(Monomial(f), coeff);
        }
        Ok(out)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one())
    }

    pub fn truncate(&self, cap: usize) -> Series {
        let mut out = Series::zero(cap.min(self.cap));
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                if m.0.is_empty() {
                    rational::fmt(c)
                } else {
                    format!("{}*{}", rational::fmt(c), m)
                }
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Coefficient ring used by graph contraction.
pub trait Coeff: Clone + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn vanishes(&self) -> bool;
    fn add_assign(&mut self, o: &Self);
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, k: &Rational) -> Self;
    fn from_rational(r: Rational, like: &Self) -> Self;
}

impl Coeff for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn vanishes(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, k: &Rational) -> Self {
        self * k
    }
    fn from_rational(r: Rational, _: &Self) -> Self {
        r
    }
}

impl Coeff for Series {
    fn zero_like(&self) -> Self {
        Series::zero(self.cap)
    }
    fn vanishes(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_assign(&mut self, o: &Self) {
        self.cap = self.cap.min(o.cap);
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
    fn mul(&self, o: &Self) -> Self {
        Series::mul(self, o)
    }
    fn scale(&self, k: &Rational) -> Self {
        Series::scale(self, k)
    }
    fn from_rational(r: Rational, like: &Self) -> Self {
        Series::constant(r, like.cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn derivative_of_even_square() {
        let t = Series::var(Var::even(0, 1), 6);
        let s = t.mul(&t).scale(&int(5));
        assert_eq!(s.partial(Var::even(0, 1)).unwrap(), t.scale(&int(10)));
    }

    #[test]
    fn odd_left_derivative() {
        let (a, b) = (Var::odd(0, 1), Var::odd(0, 2));
        let s = Series::var(a, 6).mul(&Series::var(b, 6));
        assert_eq!(s.partial(a).unwrap(), Series::var(b, 6));
        assert_eq!(s.partial(b).unwrap(), Series::var(a, 6).scale(&int(-1)));
        let ba = Series::var(b, 6).mul(&Series::var(a, 6));
        assert_eq!(ba, s.scale(&int(-1)));
        assert!(Series::var(a, 6).mul(&Series::var(a, 6)).is_empty());
    }

    #[test]
    fn truncation_and_constant_term() {
        let t = Series::var(Var::even(0, 0), 2);
        let cube = t.mul(&t).mul(&t);
        assert!(cube.is_empty());
        assert_eq!(t.mul(&t).scale(&int(3)).constant_term(), int(0));
    }
}
