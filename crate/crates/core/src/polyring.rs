//! Sparse multivariate polynomials over [`ExactRational`].
//!
//! Variables come in three families: `x_i`, `y_i` (the two variable sets the
//! relations are stated in) and `a_k` (free coefficient symbols of the
//! symbolic family). Terms are kept in a `BTreeMap` under graded
//! lexicographic order, so the leading term is always the last entry and two
//! polynomials are equal exactly when their maps are.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{format_rational, ExactRational};

/// Default ceiling on the number of terms any single expansion may produce.
pub const DEFAULT_TERM_CAP: usize = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    ZeroDivisor,
    #[error("not divisible: remainder has leading term {0}")]
    NotDivisible(String),
    #[error("no value assigned to variable {0}")]
    MissingVariable(VarId),
    #[error("expansion exceeded the term cap of {cap} terms")]
    TermCapExceeded { cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    X,
    Y,
    A,
}

/// A variable `x_i`, `y_i` or `a_i` with `i >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId {
    pub kind: VarKind,
    pub index: u32,
}

impl VarId {
    pub fn new(kind: VarKind, index: u32) -> Self {
        assert!(index >= 1, "variable indices start at 1");
        VarId { kind, index }
    }

    pub fn x(index: u32) -> Self {
        Self::new(VarKind::X, index)
    }

    pub fn y(index: u32) -> Self {
        Self::new(VarKind::Y, index)
    }

    pub fn a(index: u32) -> Self {
        Self::new(VarKind::A, index)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.kind {
            VarKind::X => 'x',
            VarKind::Y => 'y',
            VarKind::A => 'a',
        };
        write!(f, "{}_{}", c, self.index)
    }
}

/// Product of variable powers, stored sparsely and sorted by [`VarId`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(vec![(v, 1)])
    }

    /// Builds a monomial from `(variable, exponent)` pairs in any order;
    /// repeated variables are merged and zero exponents dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (VarId, u32)>) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_default() += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn degree_in(&self, kind: VarKind) -> u32 {
        self.0.iter().filter(|(v, _)| v.kind == kind).map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// `self / other` when `other` divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for &(v, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 < v {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == v {
                let d = other.0[j].1;
                j += 1;
                match e.cmp(&d) {
                    Ordering::Less => return None,
                    Ordering::Equal => continue,
                    Ordering::Greater => out.push((v, e - d)),
                }
            } else {
                out.push((v, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Monomial(out))
    }

    /// Keeps only the factors whose variables satisfy `keep`.
    pub fn restrict(&self, keep: impl Fn(VarId) -> bool) -> Monomial {
        Monomial(self.0.iter().copied().filter(|&(v, _)| keep(v)).collect())
    }

    /// Applies a variable renaming; it must be injective on this monomial.
    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> Monomial {
        Monomial::from_pairs(self.0.iter().map(|&(v, e)| (f(v), e)))
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, name: &dyn Fn(VarId) -> String) -> fmt::Result {
        for (i, &(v, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            f.write_str(&name(v))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Graded lexicographic: total degree first, then the larger exponent on the
/// earliest variable (`x_1 > x_2 > ... > y_1 > ... > a_1 > ...`).
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let ((va, ea), (vb, eb)) = (a[i], b[j]);
            match va.cmp(&vb) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match ea.cmp(&eb) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    ord => return ord,
                },
            }
        }
        (a.len() - i).cmp(&(b.len() - j))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial; never stores a zero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, ExactRational>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(ExactRational::one())
    }

    pub fn constant(c: ExactRational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn var(v: VarId) -> Self {
        Self::term(ExactRational::one(), Monomial::var(v))
    }

    pub fn term(c: ExactRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    /// Collects `(monomial, coefficient)` pairs, merging duplicates.
    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, ExactRational)>) -> Self {
        let mut p = MultiPoly::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &ExactRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> ExactRational {
        self.terms.get(m).cloned().unwrap_or_else(ExactRational::zero)
    }

    /// The constant term.
    pub fn constant_term(&self) -> ExactRational {
        self.coefficient(&Monomial::one())
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<ExactRational> {
        match self.terms.len() {
            0 => Some(ExactRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &ExactRational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.leading_term().map(|(m, _)| m.degree())
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.iter().map(|(v, _)| v)).collect()
    }

    /// The common degree in `kind` variables when every term has the same one.
    pub fn homogeneous_degree_in(&self, kind: VarKind) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|m| m.degree_in(kind));
        let first = degrees.next().unwrap_or(0);
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn add_term(&mut self, m: Monomial, c: ExactRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &ExactRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &ExactRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a * c)).collect(),
        }
    }

    /// Product that fails once the accumulated result exceeds `cap` terms.
    pub fn checked_mul(&self, other: &MultiPoly, cap: usize) -> Result<MultiPoly, PolyError> {
        let (small, large) = if self.terms.len() <= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: HashMap<Monomial, ExactRational> =
            HashMap::with_capacity(large.terms.len().saturating_mul(small.terms.len()).min(1 << 16));
        for (ma, ca) in &small.terms {
            for (mb, cb) in &large.terms {
                let m = ma.mul(mb);
                let c = ca * cb;
                match acc.get_mut(&m) {
                    Some(v) => *v += c,
                    None => {
                        acc.insert(m, c);
                        if acc.len() > cap {
                            return Err(PolyError::TermCapExceeded { cap });
                        }
                    }
                }
            }
        }
        Ok(MultiPoly {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        self.checked_pow(e, usize::MAX).expect("unbounded cap")
    }

    pub fn checked_pow(&self, mut e: u32, cap: usize) -> Result<MultiPoly, PolyError> {
        let mut base = self.clone();
        let mut acc = MultiPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.checked_mul(&base, cap)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base, cap)?;
            }
        }
        Ok(acc)
    }

    /// Exact value at a point; every occurring variable must be assigned.
    pub fn eval(&self, point: &HashMap<VarId, ExactRational>) -> Result<ExactRational, PolyError> {
        let mut total = ExactRational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.iter() {
                let x = point.get(&v).ok_or(PolyError::MissingVariable(v))?;
                t *= num_traits::pow(x.clone(), e as usize);
            }
            total += t;
        }
        Ok(total)
    }

    /// Replaces the mapped variables by polynomials; unmapped ones stay.
    pub fn substitute(&self, map: &HashMap<VarId, MultiPoly>) -> MultiPoly {
        self.substitute_checked(map, usize::MAX).expect("unbounded cap")
    }

    pub fn substitute_checked(&self, map: &HashMap<VarId, MultiPoly>, cap: usize) -> Result<MultiPoly, PolyError> {
        let mut powers: HashMap<VarId, Vec<MultiPoly>> = HashMap::new();
        let mut out: HashMap<Monomial, ExactRational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut factor = MultiPoly::one();
            for (v, e) in m.iter() {
                match map.get(&v) {
                    None => kept.push((v, e)),
                    Some(image) => {
                        let cache = powers.entry(v).or_insert_with(|| vec![MultiPoly::one()]);
                        while cache.len() <= e as usize {
                            let next = cache.last().unwrap().checked_mul(image, cap)?;
                            cache.push(next);
                        }
                        factor = factor.checked_mul(&cache[e as usize], cap)?;
                    }
                }
            }
            let kept = Monomial(kept);
            for (fm, fc) in factor.terms {
                let key = fm.mul(&kept);
                let val = fc * c;
                match out.get_mut(&key) {
                    Some(v) => *v += val,
                    None => {
                        out.insert(key, val);
                        if out.len() > cap {
                            return Err(PolyError::TermCapExceeded { cap });
                        }
                    }
                }
            }
        }
        Ok(MultiPoly {
            terms: out.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// Exact quotient `self / den` by multivariate division under the term
    /// order; any stuck leading term means `den` does not divide `self`.
    pub fn exact_divide(&self, den: &MultiPoly) -> Result<MultiPoly, PolyError> {
        let (lead_mono, lead_coeff) = den.leading_term().ok_or(PolyError::ZeroDivisor)?;
        let tail: Vec<(&Monomial, &ExactRational)> = den.terms.iter().rev().skip(1).collect();
        let mut rem = self.terms.clone();
        let mut quotient = BTreeMap::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m
                .checked_div(lead_mono)
                .ok_or_else(|| PolyError::NotDivisible(MultiPoly::term(c.clone(), m.clone()).to_string()))?;
            let qc = c / lead_coeff;
            for (dm, dc) in &tail {
                let key = qm.mul(dm);
                let delta = &qc * *dc;
                match rem.entry(key) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                }
            }
            quotient.insert(qm, qc);
        }
        Ok(MultiPoly { terms: quotient })
    }

    /// Renames variables, e.g. to apply a permutation of `x_1..x_m`.
    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.rename(&f), c.clone())).collect(),
        }
    }

    /// Splits the polynomial by the part of each monomial outside `kind`:
    /// `self = sum_key key * part[key]` with every part only in `kind`.
    pub fn split_by_complement(&self, kind: VarKind) -> BTreeMap<Monomial, MultiPoly> {
        let mut out: BTreeMap<Monomial, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let outer = m.restrict(|v| v.kind != kind);
            let inner = m.restrict(|v| v.kind == kind);
            out.entry(outer).or_default().add_term(inner, c.clone());
        }
        out
    }

    /// Renders with a custom variable naming.
    pub fn display_with<'a>(&'a self, name: &'a dyn Fn(VarId) -> String) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, name }
    }
}

struct PolyDisplay<'a> {
    poly: &'a MultiPoly,
    name: &'a dyn Fn(VarId) -> String,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                f.write_str(&format_rational(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", format_rational(&abs))?;
                }
                m.fmt_with(f, self.name)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |v: VarId| v.to_string();
        let shown = self.display_with(&name);
        write!(f, "{shown}")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        self.fmt_with(f, &|v| v.to_string())
    }
}

impl AddAssign<&MultiPoly> for MultiPoly {
    fn add_assign(&mut self, rhs: &MultiPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&MultiPoly> for MultiPoly {
    fn sub_assign(&mut self, rhs: &MultiPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&MultiPoly> for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_mul(rhs, usize::MAX).expect("unbounded cap")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$method(rhs)
            }
        }
        impl $tr<MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

impl From<ExactRational> for MultiPoly {
    fn from(c: ExactRational) -> Self {
        MultiPoly::constant(c)
    }
}

impl From<VarId> for MultiPoly {
    fn from(v: VarId) -> Self {
        MultiPoly::var(v)
    }
}

/// Numerator over denominator, without gcd reduction. Zero tests only ever
/// look at the numerator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalFunction {
    numerator: MultiPoly,
    denominator: MultiPoly,
}

impl RationalFunction {
    /// Normalizes so the denominator's leading coefficient is positive and a
    /// zero numerator sits over 1.
    pub fn new(numerator: MultiPoly, denominator: MultiPoly) -> Result<Self, PolyError> {
        let Some((_, lc)) = denominator.leading_term() else {
            return Err(PolyError::ZeroDivisor);
        };
        if numerator.is_zero() {
            return Ok(RationalFunction {
                numerator,
                denominator: MultiPoly::one(),
            });
        }
        if lc.is_negative() {
            Ok(RationalFunction {
                numerator: -numerator,
                denominator: -denominator,
            })
        } else {
            Ok(RationalFunction { numerator, denominator })
        }
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        RationalFunction {
            numerator: p,
            denominator: MultiPoly::one(),
        }
    }

    pub fn numerator(&self) -> &MultiPoly {
        &self.numerator
    }

    pub fn denominator(&self) -> &MultiPoly {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// Value at a point; `None` if the denominator vanishes there.
    pub fn eval(&self, point: &HashMap<VarId, ExactRational>) -> Result<Option<ExactRational>, PolyError> {
        let d = self.denominator.eval(point)?;
        if d.is_zero() {
            return Ok(None);
        }
        Ok(Some(self.numerator.eval(point)? / d))
    }
}

/// `sum_i c_i * (n_i / d_i)` over the product of all denominators, numerator
/// fully expanded.
pub fn ratfunc_combine(terms: &[(MultiPoly, RationalFunction)]) -> RationalFunction {
    let mut denominator = MultiPoly::one();
    for (_, rf) in terms {
        denominator = &denominator * &rf.denominator;
    }
    let mut numerator = MultiPoly::zero();
    for (i, (c, rf)) in terms.iter().enumerate() {
        let mut t = c * &rf.numerator;
        for (j, (_, other)) in terms.iter().enumerate() {
            if i != j {
                t = &t * &other.denominator;
            }
        }
        numerator += &t;
    }
    RationalFunction::new(numerator, denominator).expect("product of nonzero denominators")
}
