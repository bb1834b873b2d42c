//! Shared helpers for the integration tests: a small expression parser for
//! the transcribed tables, fixture loaders, and a point-evaluation oracle for
//! `U` that shares no code with the symbolic pipeline.

#![allow(dead_code)]

pub mod props;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::Rng;
use symrel::{ExactRational, ExponentVector, Monomial, MultiPoly, PowerSumExpansion, VarId, VarKind};

pub type Q = ExactRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

// ---------------------------------------------------------------------------
// Expression parser

/// A leaf of a table expression: `p_3`, `a_2`, `B_4` or `C[2,1,0,0]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Sym(char, u32),
    Key(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Atom(Atom),
    Op(char),
}

fn lex(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < chars.len() && chars[*i].is_ascii_digit() {
            *i += 1;
        }
        chars[start..*i].iter().collect::<String>()
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            out.push(Tok::Num(digits(&mut i).parse().unwrap()));
        } else if c == 'C' && chars.get(i + 1) == Some(&'[') {
            let close = chars[i..].iter().position(|&c| c == ']').expect("unclosed key") + i;
            let body: String = chars[i + 2..close].iter().collect();
            let key = body.split(',').map(|s| s.trim().parse().unwrap()).collect();
            out.push(Tok::Atom(Atom::Key(key)));
            i = close + 1;
        } else if c.is_ascii_alphabetic() {
            assert_eq!(chars.get(i + 1), Some(&'_'), "bad symbol at {i} in {src}");
            i += 2;
            out.push(Tok::Atom(Atom::Sym(c, digits(&mut i).parse().unwrap())));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            panic!("unexpected {c:?} in {src}");
        }
    }
    out
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    resolve: &'a dyn Fn(&Atom) -> MultiPoly,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> MultiPoly {
        let mut acc = if self.eat('-') {
            -self.term()
        } else {
            self.eat('+');
            self.term()
        };
        loop {
            if self.eat('+') {
                acc += &self.term();
            } else if self.eat('-') {
                acc -= &self.term();
            } else {
                return acc;
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::Atom(_) | Tok::Op('(')))
    }

    fn term(&mut self) -> MultiPoly {
        let mut acc = self.power();
        loop {
            if self.eat('*') {
                acc = &acc * &self.power();
            } else if self.eat('/') {
                let d = self.power().as_constant().expect("division by a non-constant");
                acc = acc.scale(&d.recip());
            } else if self.starts_factor() {
                acc = &acc * &self.power();
            } else {
                return acc;
            }
        }
    }

    fn power(&mut self) -> MultiPoly {
        let base = self.atom();
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(e)) => {
                    self.pos += 1;
                    base.pow(e.try_into().unwrap())
                }
                t => panic!("expected exponent, found {t:?}"),
            }
        } else {
            base
        }
    }

    fn atom(&mut self) -> MultiPoly {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                MultiPoly::constant(Q::from_integer(n))
            }
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                (self.resolve)(&a)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr();
                assert!(self.eat(')'), "unbalanced parentheses");
                inner
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                -self.atom()
            }
            t => panic!("unexpected token {t:?}"),
        }
    }
}

/// Parses an expression with implicit multiplication, `^` powers and
/// division by constants.
pub fn parse_with(src: &str, resolve: &dyn Fn(&Atom) -> MultiPoly) -> MultiPoly {
    let mut p = Parser {
        toks: lex(src),
        pos: 0,
        resolve,
    };
    let out = p.expr();
    assert_eq!(p.pos, p.toks.len(), "trailing input in {src}");
    out
}

/// Polynomial in the `a_k` symbols; `B_k` is also read as the symbol `a_k`.
pub fn parse_a_poly(src: &str) -> MultiPoly {
    parse_with(src, &|atom| match atom {
        Atom::Sym('a' | 'B', k) => MultiPoly::var(VarId::a(*k)),
        other => panic!("unexpected {other:?}"),
    })
}

/// Parses an expression in power sums `p_k` (rational coefficients) into the
/// basis of weight `weight` with parts `<= max_part`.
pub fn parse_p_expansion(src: &str, weight: usize, max_part: usize) -> PowerSumExpansion {
    // p_k is carried as the placeholder y_k and read back off the monomials.
    let poly = parse_with(src, &|atom| match atom {
        Atom::Sym('p', k) => MultiPoly::var(VarId::y(*k)),
        other => panic!("unexpected {other:?}"),
    });
    let mut map = BTreeMap::new();
    for (mono, c) in poly.terms() {
        map.insert(monomial_key(mono, weight), c.clone());
    }
    PowerSumExpansion::from_map(weight, max_part, map)
}

fn monomial_key(mono: &Monomial, weight: usize) -> ExponentVector {
    let mut k = vec![0u32; weight];
    for (v, e) in mono.iter() {
        assert_eq!(v.kind, VarKind::Y);
        k[v.index as usize - 1] = e;
    }
    let key = ExponentVector::new(k);
    assert_eq!(key.weight(), weight, "term of the wrong weight");
    key
}

/// Linear form in `C[key]` symbols: coefficient per key.
pub fn parse_c_form(src: &str, keys: &[ExponentVector]) -> BTreeMap<ExponentVector, Q> {
    let poly = parse_with(src, &|atom| match atom {
        Atom::Key(k) => {
            let key = ExponentVector::new(k.clone());
            let idx = keys.iter().position(|x| *x == key).expect("unknown key");
            MultiPoly::var(VarId::x(idx as u32 + 1))
        }
        other => panic!("unexpected {other:?}"),
    });
    let mut out = BTreeMap::new();
    for (mono, c) in poly.terms() {
        let vars: Vec<_> = mono.iter().collect();
        assert!(vars.len() == 1 && vars[0].1 == 1, "not linear: {src}");
        out.insert(keys[vars[0].0.index as usize - 1].clone(), c.clone());
    }
    out
}

// ---------------------------------------------------------------------------
// Fixtures

#[derive(Clone, Debug)]
pub struct TableEntry {
    pub n: usize,
    pub m: usize,
    pub key: ExponentVector,
    pub printed: String,
    /// Independently recomputed value where the printed one is a misprint.
    pub recomputed: Option<String>,
}

impl TableEntry {
    pub fn expected(&self) -> &str {
        self.recomputed.as_deref().unwrap_or(&self.printed)
    }
}

fn parse_key(s: &str) -> ExponentVector {
    let s = s.trim();
    if s.is_empty() {
        return ExponentVector::empty();
    }
    ExponentVector::new(s.split(',').map(|t| t.trim().parse().unwrap()).collect())
}

fn load_table(text: &str) -> Vec<TableEntry> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            let nm: Vec<usize> = cols[0].split_whitespace().map(|t| t.parse().unwrap()).collect();
            TableEntry {
                n: nm[0],
                m: nm[1],
                key: parse_key(cols[1]),
                printed: cols[2].to_string(),
                recomputed: cols.get(3).map(|s| s.to_string()),
            }
        })
        .collect()
}

/// `z^m_k` entries; `n` is the weight of `k`.
pub fn z_table() -> Vec<TableEntry> {
    load_table(include_str!("../data/z_tables.txt"))
}

/// `Y_{n-m,k}(x^m)` entries; `n` is the weight of `k`.
pub fn y_table() -> Vec<TableEntry> {
    load_table(include_str!("../data/y_tables.txt"))
}

/// Dependent `C_{n,k}` relations as linear forms in the free `C[key]`
/// symbols; `n` is the weight of `key`.
pub fn c_relations() -> Vec<TableEntry> {
    include_str!("../data/c_relations.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            let n = cols[0].parse().unwrap();
            TableEntry {
                n,
                m: n,
                key: parse_key(cols[1]),
                printed: cols[2].to_string(),
                recomputed: cols.get(3).map(|s| s.to_string()),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Point oracle

/// Complete Bell polynomial value by the binomial recurrence.
pub fn bell(n: usize, b: &[Q]) -> Q {
    let mut table = vec![Q::one()];
    for j in 0..n {
        let mut next = Q::zero();
        let mut binom = BigInt::one();
        for i in 0..=j {
            next += &table[j - i] * &b[i] * Q::from_integer(binom.clone());
            binom = binom * BigInt::from(j - i) / BigInt::from(i + 1);
        }
        table.push(next);
    }
    table.swap_remove(n)
}

pub fn power_sum_at(v: &[Q], k: usize) -> Q {
    v.iter().map(|x| num_traits::pow(x.clone(), k)).sum()
}

pub fn product(v: &[Q]) -> Q {
    v.iter().fold(Q::one(), |acc, x| acc * x)
}

/// `U` at `y = 1`: `S(x)/pi(x) - sum_i S(s_i)/pi(s_i)` with rows
/// `s_i = (x_1 - x_i, ..., x_i, ..., x_m - x_i)`.
pub fn u_at(x: &[Q], s: &dyn Fn(&[Q]) -> Q) -> Q {
    let m = x.len();
    let mut u = s(x) / product(x);
    for i in 0..m {
        let row: Vec<Q> = (0..m)
            .map(|j| if i == j { x[i].clone() } else { &x[j] - &x[i] })
            .collect();
        u -= s(&row) / product(&row);
    }
    u
}

/// Value of the family polynomial of degree `n` with coefficients `a`
/// (`a[0]` is `a_1`) at the point `v`.
pub fn family_value(a: &[Q], n: usize, v: &[Q]) -> Q {
    let b: Vec<Q> = (0..n).map(|k| &a[k] * power_sum_at(v, k + 1)).collect();
    bell(n, &b)
}

/// Value of a power-sum product at `v`.
pub fn power_product_at(k: &ExponentVector, v: &[Q]) -> Q {
    k.parts()
        .map(|(part, mult)| num_traits::pow(power_sum_at(v, part), mult as usize))
        .fold(Q::one(), |acc, x| acc * x)
}

pub fn random_rational(rng: &mut StdRng) -> Q {
    let num: i64 = rng.gen_range(-9..=9);
    let den: i64 = rng.gen_range(1..=5);
    Q::new(BigInt::from(if num == 0 { 1 } else { num }), BigInt::from(den))
}

/// Distinct nonzero rationals, so every row of the S matrix has a nonzero
/// product.
pub fn random_point(rng: &mut StdRng, m: usize) -> Vec<Q> {
    loop {
        let x: Vec<Q> = (0..m).map(|_| random_rational(rng)).collect();
        let distinct = (0..m).all(|i| (i + 1..m).all(|j| x[i] != x[j]));
        if distinct && x.iter().all(|t| !t.is_zero()) {
            return x;
        }
    }
}

pub fn a_point(a: &[Q]) -> HashMap<VarId, Q> {
    a.iter()
        .enumerate()
        .map(|(i, v)| (VarId::a(i as u32 + 1), v.clone()))
        .collect()
}

/// `sum_k z_k(a) P_k(x)` for an expansion with a-polynomial coefficients.
pub fn eval_symbolic_expansion(z: &PowerSumExpansion<MultiPoly>, a: &[Q], x: &[Q]) -> Q {
    let point = a_point(a);
    z.entries()
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| c.eval(&point).unwrap() * power_product_at(k, x))
        .sum()
}

pub fn eval_expansion(y: &PowerSumExpansion, x: &[Q]) -> Q {
    y.entries().iter().map(|(k, c)| c * power_product_at(k, x)).sum()
}
