//! The matrix `S`, the function `U` and the two relations built on them.
//!
//! For a homogeneous symmetric `S_n` of degree `n` in `x_1..x_m`,
//!
//! ```text
//! U_n = S_n(x)/pi(x) - sum_i y_i^(m-n-1) S_n(s_i)/pi(s_i)
//! ```
//!
//! where `s_i` is row `i` of `S` and `pi` multiplies the components of a
//! vector. With `d_ij = y_i x_j - y_j x_i` (`i < j`) one has
//! `pi(s_i) = (-1)^(i-1) x_i prod_{j != i} d_{min,max}`, so every term shares
//! the denominator `L = prod_i x_i prod_{i<j} d_ij`. The numerator over `L` is
//! expanded exactly. For `n <= m - 1` it must vanish; for `n >= m` and all
//! `y_i = 1` it must be divisible by `L`, which is checked one linear factor
//! at a time, and the quotient is the degree `n - m` polynomial (`Z` for a
//! family, `Y` for a single power-sum product).
//!
//! Only the first row's term is expanded: swapping `x_1, y_1` with
//! `x_i, y_i` maps row 1's term to minus row `i`'s, because `L` is
//! alternating under such swaps and `S_n` is symmetric.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{format_rational, ExactRational};
use crate::families::{family_power_sum_expansion, symbolic_power_sum_expansion, Family};
use crate::partitions::ExponentVector;
use crate::polyring::{MultiPoly, PolyError, RationalFunction, VarId, VarKind, DEFAULT_TERM_CAP};
use crate::solver::linalg::{ExactMatrix, SolveError};
use crate::symmfunc::{is_symmetric, render_power_product, to_power_sum_basis_symbolic, BasisError, PowerSumExpansion};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("relation not verified ({verdict}): {detail}")]
    NotVerified { verdict: Verdict, detail: String },
}

/// `s_{i,j} = y_i x_j - y_j x_i + x_i delta_ij`, indices from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SMatrix {
    m: usize,
    entries: Vec<Vec<MultiPoly>>,
}

impl SMatrix {
    pub fn new(m: usize) -> Self {
        Self::build(m, false)
    }

    /// The matrix with every `y_i` set to 1.
    pub fn unit_y(m: usize) -> Self {
        Self::build(m, true)
    }

    fn build(m: usize, unit_y: bool) -> Self {
        assert!(m >= 1);
        let entries = (1..=m as u32)
            .map(|i| {
                (1..=m as u32)
                    .map(|j| {
                        if i == j {
                            MultiPoly::var(VarId::x(i))
                        } else {
                            pair_factor(i, j, unit_y)
                        }
                    })
                    .collect()
            })
            .collect();
        SMatrix { m, entries }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &MultiPoly {
        &self.entries[i - 1][j - 1]
    }

    pub fn row(&self, i: usize) -> &[MultiPoly] {
        &self.entries[i - 1]
    }
}

pub fn build_s_matrix(m: usize) -> SMatrix {
    SMatrix::new(m)
}

/// `y_i x_j - y_j x_i`, or `x_j - x_i` when `y = 1`.
fn pair_factor(i: u32, j: u32, unit_y: bool) -> MultiPoly {
    let (xi, xj) = (MultiPoly::var(VarId::x(i)), MultiPoly::var(VarId::x(j)));
    if unit_y {
        xj - xi
    } else {
        let (yi, yj) = (MultiPoly::var(VarId::y(i)), MultiPoly::var(VarId::y(j)));
        &yi * &xj - &yj * &xi
    }
}

/// The polynomial `U` is applied to.
#[derive(Clone, Debug, PartialEq)]
pub enum PolySource {
    Family(Family),
    /// The family with free `a_k` symbols.
    Symbolic,
    /// An explicit combination of power-sum products; coefficients may carry
    /// `a_k` symbols.
    Raw(PowerSumExpansion<MultiPoly>),
    /// Any polynomial in `x_1..x_m`, not necessarily symmetric.
    Polynomial(MultiPoly),
}

impl PolySource {
    /// The single power-sum product `P_{n,k}`.
    pub fn basis(k: &ExponentVector) -> Self {
        let n = k.weight();
        let mut e = PowerSumExpansion::zero(n, n);
        e.set(k, MultiPoly::one());
        PolySource::Raw(e)
    }

    pub fn label(&self) -> String {
        match self {
            PolySource::Family(f) => f.name().to_string(),
            PolySource::Symbolic => "symbolic".to_string(),
            PolySource::Raw(e) => {
                let nonzero: Vec<_> = e.entries().iter().filter(|(_, c)| !c.is_zero()).collect();
                match nonzero.as_slice() {
                    [(k, c)] if *c == MultiPoly::one() => format!("P_{{{},{}}}", e.weight(), k),
                    _ => format!("raw({})", e.render()),
                }
            }
            PolySource::Polynomial(p) => format!("poly({p})"),
        }
    }

    fn is_raw(&self) -> bool {
        matches!(self, PolySource::Raw(_) | PolySource::Polynomial(_))
    }

    fn subject(&self, n: usize) -> Result<Subject, RelationError> {
        Ok(match self {
            PolySource::Family(f) => Subject::Expansion(family_power_sum_expansion(*f, n).to_symbolic()),
            PolySource::Symbolic => Subject::Expansion(symbolic_power_sum_expansion(n)),
            PolySource::Raw(e) => {
                if e.weight() != n {
                    return Err(RelationError::Precondition(format!(
                        "expansion has weight {} but n = {n}",
                        e.weight()
                    )));
                }
                Subject::Expansion(e.clone())
            }
            PolySource::Polynomial(p) => Subject::Poly(p.clone()),
        })
    }
}

impl FromStr for PolySource {
    type Err = crate::families::UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("symbolic") {
            return Ok(PolySource::Symbolic);
        }
        s.parse().map(PolySource::Family)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationConfig {
    /// Random rational points tried before the exact expansion.
    pub prescreen_points: usize,
    pub term_cap: usize,
    pub seed: u64,
    /// Expand only the first row's term and obtain the others by relabeling
    /// (power-sum sources only; arbitrary polynomials always expand every row).
    pub row_symmetry: bool,
    /// Largest `m` for which the C-coefficient solver extracts `Y` by exact
    /// expansion; above it `Y` comes from [`extract_y_interpolated`].
    pub expand_max_m: usize,
}

impl Default for RelationConfig {
    fn default() -> Self {
        RelationConfig {
            prescreen_points: 3,
            term_cap: DEFAULT_TERM_CAP,
            seed: 0x5eed,
            row_symmetry: true,
            expand_max_m: 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConjectureId {
    C1,
    C2,
    #[serde(rename = "C3-zero")]
    C3Zero,
    #[serde(rename = "C3-poly")]
    C3Poly,
}

impl fmt::Display for ConjectureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConjectureId::C1 => "C1",
            ConjectureId::C2 => "C2",
            ConjectureId::C3Zero => "C3-zero",
            ConjectureId::C3Poly => "C3-poly",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Falsified,
    ResourceLimited,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Verified => "verified",
            Verdict::Falsified => "falsified",
            Verdict::ResourceLimited => "resource-limited",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageCost {
    pub stage: &'static str,
    pub micros: u64,
    /// Size of the stage's result in terms, where meaningful.
    pub terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationReport {
    pub conjecture: ConjectureId,
    pub n: usize,
    pub m: usize,
    pub source: String,
    pub verdict: Verdict,
    pub witness: Option<String>,
    pub extracted: Option<PowerSumExpansion<MultiPoly>>,
    pub stages: Vec<StageCost>,
}

impl RelationReport {
    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }
}

enum Subject {
    Expansion(PowerSumExpansion<MultiPoly>),
    Poly(MultiPoly),
}

impl Subject {
    /// `S(v_1, ..., v_m)` for polynomial arguments.
    fn at_row(&self, row: &[MultiPoly], cap: usize) -> Result<MultiPoly, PolyError> {
        match self {
            Subject::Poly(p) => {
                let map = row
                    .iter()
                    .enumerate()
                    .map(|(j, v)| (VarId::x(j as u32 + 1), v.clone()))
                    .collect();
                p.substitute_checked(&map, cap)
            }
            Subject::Expansion(e) => {
                let sums = power_sums_of(row, e.max_part(), cap)?;
                let mut cache: HashMap<(usize, u32), MultiPoly> = HashMap::new();
                let mut out = MultiPoly::zero();
                for (k, c) in e.entries() {
                    if c.is_zero() {
                        continue;
                    }
                    let mut prod = MultiPoly::one();
                    for (j, mult) in k.parts() {
                        if let Entry::Vacant(slot) = cache.entry((j, mult)) {
                            slot.insert(sums[j - 1].checked_pow(mult, cap)?);
                        }
                        prod = prod.checked_mul(&cache[&(j, mult)], cap)?;
                    }
                    out += &prod.checked_mul(c, cap)?;
                    if out.num_terms() > cap {
                        return Err(PolyError::TermCapExceeded { cap });
                    }
                }
                Ok(out)
            }
        }
    }

    fn at_point(
        &self,
        v: &[ExactRational],
        symbols: &HashMap<VarId, ExactRational>,
    ) -> Result<ExactRational, PolyError> {
        match self {
            Subject::Poly(p) => {
                let mut point = symbols.clone();
                point.extend(v.iter().enumerate().map(|(j, x)| (VarId::x(j as u32 + 1), x.clone())));
                p.eval(&point)
            }
            Subject::Expansion(e) => {
                let sums: Vec<ExactRational> = (1..=e.max_part())
                    .map(|j| v.iter().map(|x| num_traits::pow(x.clone(), j)).sum())
                    .collect();
                let mut total = ExactRational::zero();
                for (k, c) in e.entries() {
                    if c.is_zero() {
                        continue;
                    }
                    let prod = k.parts().fold(ExactRational::one(), |acc, (j, mult)| {
                        acc * num_traits::pow(sums[j - 1].clone(), mult as usize)
                    });
                    total += prod * c.eval(symbols)?;
                }
                Ok(total)
            }
        }
    }

    fn symbols(&self) -> BTreeSet<VarId> {
        let vars: BTreeSet<VarId> = match self {
            Subject::Poly(p) => p.variables(),
            Subject::Expansion(e) => e.entries().iter().flat_map(|(_, c)| c.variables()).collect(),
        };
        vars.into_iter().filter(|v| v.kind == VarKind::A).collect()
    }
}

/// `p_1(row), ..., p_K(row)`.
fn power_sums_of(row: &[MultiPoly], count: usize, cap: usize) -> Result<Vec<MultiPoly>, PolyError> {
    let mut powers: Vec<MultiPoly> = row.to_vec();
    let mut sums = Vec::with_capacity(count);
    for j in 1..=count {
        if j > 1 {
            for (p, v) in powers.iter_mut().zip(row) {
                *p = p.checked_mul(v, cap)?;
            }
        }
        sums.push(powers.iter().fold(MultiPoly::zero(), |acc, p| acc + p));
    }
    Ok(sums)
}

fn checked_product<'a>(factors: impl IntoIterator<Item = &'a MultiPoly>, cap: usize) -> Result<MultiPoly, PolyError> {
    factors
        .into_iter()
        .try_fold(MultiPoly::one(), |acc, f| acc.checked_mul(f, cap))
}

/// Numerator of `U` over `L` together with the linear factors of `L`.
struct UNumerator {
    numerator: MultiPoly,
    factors: Vec<MultiPoly>,
}

fn u_numerator(
    subject: &Subject,
    n: usize,
    m: usize,
    unit_y: bool,
    cfg: &RelationConfig,
) -> Result<UNumerator, PolyError> {
    let cap = cfg.term_cap;
    let exponent = m as i64 - n as i64 - 1;
    assert!(unit_y || exponent >= 0, "negative y exponent needs y = 1");
    let mu = m as u32;
    let pairs: Vec<(u32, u32)> = (1..=mu).flat_map(|i| (i + 1..=mu).map(move |j| (i, j))).collect();
    let d: HashMap<(u32, u32), MultiPoly> = pairs
        .iter()
        .map(|&(i, j)| ((i, j), pair_factor(i, j, unit_y)))
        .collect();
    let xs: Vec<MultiPoly> = (1..=mu).map(|i| MultiPoly::var(VarId::x(i))).collect();
    let s = if unit_y { SMatrix::unit_y(m) } else { SMatrix::new(m) };

    let row_term = |i: u32| -> Result<MultiPoly, PolyError> {
        let others = pairs.iter().filter(|&&(a, b)| a != i && b != i).map(|p| &d[p]);
        let x_others = xs
            .iter()
            .enumerate()
            .filter(|(j, _)| *j as u32 + 1 != i)
            .map(|(_, x)| x);
        let mut cofactor = checked_product(others.chain(x_others), cap)?;
        if i.is_multiple_of(2) {
            cofactor = -cofactor;
        }
        if !unit_y && exponent > 0 {
            cofactor = cofactor.mul_monomial(
                &crate::polyring::Monomial::from_pairs([(VarId::y(i), exponent as u32)]),
                &ExactRational::one(),
            );
        }
        subject.at_row(s.row(i as usize), cap)?.checked_mul(&cofactor, cap)
    };

    let vander = checked_product(pairs.iter().map(|p| &d[p]), cap)?;
    let mut numerator = subject.at_row(&xs, cap)?.checked_mul(&vander, cap)?;
    // The relabeling shortcut needs a symmetric subject.
    let symmetric = matches!(subject, Subject::Expansion(_));
    let rows: Vec<MultiPoly> = if cfg.row_symmetry && symmetric {
        let first = row_term(1)?;
        let mut out = vec![first.clone()];
        out.extend((2..=mu).map(|i| -first.rename(|v| swap_index(v, 1, i))));
        out
    } else {
        (1..=mu).into_par_iter().map(row_term).collect::<Result<_, _>>()?
    };
    for r in &rows {
        numerator -= r;
    }
    if numerator.num_terms() > cap {
        return Err(PolyError::TermCapExceeded { cap });
    }
    let mut factors = xs;
    factors.extend(pairs.iter().map(|p| d[p].clone()));
    Ok(UNumerator { numerator, factors })
}

/// Swaps index `a` and `b` on `x` and `y` variables.
fn swap_index(v: VarId, a: u32, b: u32) -> VarId {
    if v.kind == VarKind::A {
        return v;
    }
    let index = if v.index == a {
        b
    } else if v.index == b {
        a
    } else {
        v.index
    };
    VarId::new(v.kind, index)
}

fn check_exponent(n: usize, m: usize, unit_y: bool) -> Result<(), RelationError> {
    if m == 0 {
        return Err(RelationError::Precondition("m must be at least 1".into()));
    }
    if !unit_y && n >= m {
        return Err(RelationError::Precondition(format!(
            "n = {n} >= m = {m} makes the y exponent negative; only y = 1 is supported there"
        )));
    }
    Ok(())
}

/// `U_n` for a polynomial `s` of degree `n` in `x_1..x_m`, as a numerator
/// over `prod x_i prod_{i<j} (y_i x_j - y_j x_i)`; `specialize_y` sets every
/// `y_i = 1` first.
pub fn u_function(s: &MultiPoly, n: usize, m: usize, specialize_y: bool) -> Result<RationalFunction, RelationError> {
    u_function_with(
        &PolySource::Polynomial(s.clone()),
        n,
        m,
        specialize_y,
        &RelationConfig::default(),
    )
}

pub fn u_function_with(
    source: &PolySource,
    n: usize,
    m: usize,
    specialize_y: bool,
    cfg: &RelationConfig,
) -> Result<RationalFunction, RelationError> {
    check_exponent(n, m, specialize_y)?;
    let subject = source.subject(n)?;
    let u = u_numerator(&subject, n, m, specialize_y, cfg)?;
    let den = checked_product(&u.factors, cfg.term_cap)?;
    Ok(RationalFunction::new(u.numerator, den)?)
}

/// Random rationals with small numerators and denominators, nonzero.
fn small_rational(rng: &mut StdRng) -> ExactRational {
    loop {
        let p: i64 = rng.gen_range(-24..=24);
        let q: i64 = rng.gen_range(1..=9);
        if p != 0 {
            return ExactRational::new(p.into(), q.into());
        }
    }
}

struct Point {
    x: Vec<ExactRational>,
    y: Vec<ExactRational>,
    symbols: HashMap<VarId, ExactRational>,
}

impl Point {
    fn random(rng: &mut StdRng, m: usize, unit_y: bool, symbols: &BTreeSet<VarId>) -> Point {
        loop {
            let x: Vec<ExactRational> = (0..m).map(|_| small_rational(rng)).collect();
            let y: Vec<ExactRational> = (0..m)
                .map(|_| {
                    if unit_y {
                        ExactRational::one()
                    } else {
                        small_rational(rng)
                    }
                })
                .collect();
            let distinct = (0..m).all(|i| (i + 1..m).all(|j| x[i] != x[j]));
            let regular = (0..m).all(|i| (i + 1..m).all(|j| !(&y[i] * &x[j] - &y[j] * &x[i]).is_zero()));
            if distinct && regular {
                let symbols = symbols.iter().map(|&v| (v, small_rational(rng))).collect();
                return Point { x, y, symbols };
            }
        }
    }

    fn swapped(&self) -> Point {
        let mut p = Point {
            x: self.x.clone(),
            y: self.y.clone(),
            symbols: self.symbols.clone(),
        };
        p.x.swap(0, 1);
        p.y.swap(0, 1);
        p
    }

    fn describe(&self) -> String {
        let list = |v: &[ExactRational]| v.iter().map(format_rational).collect::<Vec<_>>().join(", ");
        let mut s = format!("x = ({}), y = ({})", list(&self.x), list(&self.y));
        let mut syms: Vec<_> = self.symbols.iter().collect();
        syms.sort();
        for (v, val) in syms {
            s.push_str(&format!(", {v} = {}", format_rational(val)));
        }
        s
    }
}

/// `U` evaluated at a point where no denominator vanishes.
fn u_at_point(subject: &Subject, n: usize, m: usize, p: &Point) -> Result<ExactRational, PolyError> {
    let exponent = m as i64 - n as i64 - 1;
    let prod = |v: &[ExactRational]| v.iter().fold(ExactRational::one(), |a, b| a * b);
    let mut u = subject.at_point(&p.x, &p.symbols)? / prod(&p.x);
    for i in 0..m {
        let row: Vec<ExactRational> = (0..m)
            .map(|j| {
                if i == j {
                    p.x[i].clone()
                } else {
                    &p.y[i] * &p.x[j] - &p.y[j] * &p.x[i]
                }
            })
            .collect();
        let weight = if exponent >= 0 {
            num_traits::pow(p.y[i].clone(), exponent as usize)
        } else {
            num_traits::pow(p.y[i].recip(), (-exponent) as usize)
        };
        u -= weight * subject.at_point(&row, &p.symbols)? / prod(&row);
    }
    Ok(u)
}

struct Timer {
    stages: Vec<StageCost>,
}

impl Timer {
    fn run<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T, terms: impl Fn(&T) -> usize) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push(StageCost {
            stage,
            micros: start.elapsed().as_micros() as u64,
            terms: terms(&out),
        });
        out
    }
}

struct ReportBuilder {
    conjecture: ConjectureId,
    n: usize,
    m: usize,
    source: String,
}

impl ReportBuilder {
    fn finish(
        self,
        verdict: Verdict,
        witness: Option<String>,
        extracted: Option<PowerSumExpansion<MultiPoly>>,
        timer: Timer,
    ) -> RelationReport {
        RelationReport {
            conjecture: self.conjecture,
            n: self.n,
            m: self.m,
            source: self.source,
            verdict,
            witness,
            extracted,
            stages: timer.stages,
        }
    }

    fn finish_on_poly_error(self, e: PolyError, timer: Timer) -> Result<RelationReport, RelationError> {
        match e {
            PolyError::TermCapExceeded { .. } => {
                Ok(self.finish(Verdict::ResourceLimited, Some(e.to_string()), None, timer))
            }
            other => Err(other.into()),
        }
    }
}

/// `U_n(x^m, y^m) = 0` for `0 <= n <= m - 1`, as an exact polynomial
/// identity in `x`, `y` and any `a_k` symbols.
pub fn verify_conjecture1(
    source: &PolySource,
    n: usize,
    m: usize,
    cfg: &RelationConfig,
) -> Result<RelationReport, RelationError> {
    if n >= m {
        return Err(RelationError::Precondition(format!(
            "the vanishing relation needs n <= m - 1, got n = {n}, m = {m}"
        )));
    }
    let subject = source.subject(n)?;
    let builder = ReportBuilder {
        conjecture: if source.is_raw() {
            ConjectureId::C3Zero
        } else {
            ConjectureId::C1
        },
        n,
        m,
        source: source.label(),
    };
    let mut timer = Timer { stages: Vec::new() };
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let symbols = subject.symbols();
    let screened = timer.run(
        "prescreen",
        || -> Result<Option<String>, PolyError> {
            for _ in 0..cfg.prescreen_points {
                let p = Point::random(&mut rng, m, false, &symbols);
                let u = u_at_point(&subject, n, m, &p)?;
                if !u.is_zero() {
                    return Ok(Some(format!("U = {} at {}", format_rational(&u), p.describe())));
                }
            }
            Ok(None)
        },
        |_| 0,
    )?;
    if let Some(w) = screened {
        return Ok(builder.finish(Verdict::Falsified, Some(w), None, timer));
    }
    let num = timer.run(
        "expand",
        || u_numerator(&subject, n, m, false, cfg),
        |r| r.as_ref().map_or(0, |u| u.numerator.num_terms()),
    );
    match num {
        Err(e) => builder.finish_on_poly_error(e, timer),
        Ok(u) if u.numerator.is_zero() => Ok(builder.finish(Verdict::Verified, None, None, timer)),
        Ok(u) => {
            let lead = u
                .numerator
                .leading_term()
                .map(|(mono, c)| MultiPoly::term(c.clone(), mono.clone()));
            let w = format!(
                "numerator has {} terms, leading term {}",
                u.numerator.num_terms(),
                lead.unwrap_or_default()
            );
            Ok(builder.finish(Verdict::Falsified, Some(w), None, timer))
        }
    }
}

/// For `n >= m` and `y = 1`: `U_n` is a symmetric polynomial of degree
/// `n - m`, returned in the power-sum basis with parts `<= m`.
pub fn verify_conjecture2(
    source: &PolySource,
    n: usize,
    m: usize,
    cfg: &RelationConfig,
) -> Result<RelationReport, RelationError> {
    if n < m || m == 0 {
        return Err(RelationError::Precondition(format!(
            "the polynomial relation needs n >= m >= 1, got n = {n}, m = {m}"
        )));
    }
    let subject = source.subject(n)?;
    let builder = ReportBuilder {
        conjecture: if source.is_raw() {
            ConjectureId::C3Poly
        } else {
            ConjectureId::C2
        },
        n,
        m,
        source: source.label(),
    };
    let mut timer = Timer { stages: Vec::new() };
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let symbols = subject.symbols();
    let screened = timer.run(
        "prescreen",
        || -> Result<Option<String>, PolyError> {
            if m < 2 {
                return Ok(None);
            }
            for _ in 0..cfg.prescreen_points {
                let p = Point::random(&mut rng, m, true, &symbols);
                let u = u_at_point(&subject, n, m, &p)?;
                let q = p.swapped();
                let v = u_at_point(&subject, n, m, &q)?;
                if u != v {
                    return Ok(Some(format!(
                        "U is not symmetric: U = {} at {} but {} at {}",
                        format_rational(&u),
                        p.describe(),
                        format_rational(&v),
                        q.describe()
                    )));
                }
            }
            Ok(None)
        },
        |_| 0,
    )?;
    if let Some(w) = screened {
        return Ok(builder.finish(Verdict::Falsified, Some(w), None, timer));
    }
    let num = timer.run(
        "expand",
        || u_numerator(&subject, n, m, true, cfg),
        |r| r.as_ref().map_or(0, |u| u.numerator.num_terms()),
    );
    let u = match num {
        Ok(u) => u,
        Err(e) => return builder.finish_on_poly_error(e, timer),
    };
    let divided = timer.run(
        "divide",
        || {
            let mut q = u.numerator.clone();
            for f in &u.factors {
                q = q.exact_divide(f).map_err(|e| (f.clone(), e))?;
            }
            Ok::<_, (MultiPoly, PolyError)>(q)
        },
        |r| r.as_ref().map_or(0, MultiPoly::num_terms),
    );
    let q = match divided {
        Ok(q) => q,
        Err((f, e)) => {
            let w = format!("numerator is not divisible by {f}: {e}");
            return Ok(builder.finish(Verdict::Falsified, Some(w), None, timer));
        }
    };
    let d = n - m;
    if !q.is_zero() && q.homogeneous_degree_in(VarKind::X) != Some(d as u32) {
        let w = format!("quotient is not homogeneous of degree {d}");
        return Ok(builder.finish(Verdict::Falsified, Some(w), None, timer));
    }
    if !is_symmetric(&q, m) {
        let w = format!("quotient is not symmetric: {q}");
        return Ok(builder.finish(Verdict::Falsified, Some(w), None, timer));
    }
    let basis = timer.run(
        "basis",
        || to_power_sum_basis_symbolic(&q, Some(d), m, m),
        |r| r.as_ref().map_or(0, |e| e.entries().len()),
    )?;
    Ok(builder.finish(Verdict::Verified, None, Some(basis), timer))
}

fn require_verified(report: RelationReport) -> Result<PowerSumExpansion<MultiPoly>, RelationError> {
    match (report.verdict, report.extracted) {
        (Verdict::Verified, Some(e)) => Ok(e),
        (verdict, _) => Err(RelationError::NotVerified {
            verdict,
            detail: report.witness.unwrap_or_default(),
        }),
    }
}

/// `Z_n(x^m)`: the `y = 1` quotient for the symbolic family of degree
/// `n + m`, listed over every key of weight `n` (parts above `m` get 0).
pub fn extract_z(n: usize, m: usize, cfg: &RelationConfig) -> Result<PowerSumExpansion<MultiPoly>, RelationError> {
    if m < 2 {
        return Err(RelationError::Precondition("Z needs m >= 2".into()));
    }
    let report = verify_conjecture2(&PolySource::Symbolic, n + m, m, cfg)?;
    Ok(require_verified(report)?.with_max_part(n))
}

/// `Y_{n-m,k}(x^m)` for the single product `P_{n,k}`, with parts `<= m`.
pub fn extract_y_basis(
    n: usize,
    m: usize,
    k: &ExponentVector,
    cfg: &RelationConfig,
) -> Result<PowerSumExpansion, RelationError> {
    if k.weight() != n {
        return Err(RelationError::Precondition(format!("key {k} does not have weight {n}")));
    }
    extract_y(&PolySource::basis(k), n, m, cfg)
}

/// The `y = 1` quotient of a source without symbols.
pub fn extract_y(
    source: &PolySource,
    n: usize,
    m: usize,
    cfg: &RelationConfig,
) -> Result<PowerSumExpansion, RelationError> {
    let e = require_verified(verify_conjecture2(source, n, m, cfg)?)?;
    e.as_constants()
        .ok_or_else(|| RelationError::Precondition("source carries a_k symbols".into()))
}

/// The `y = 1` quotient of a source without symbols, from exact values of
/// `U` at random points instead of the symbolic expansion.
///
/// The coefficients over the power-sum products of weight `n - m` with parts
/// `<= m` are solved for from one point per product, and
/// `max(cfg.prescreen_points, 2)` further points must agree. This presumes
/// that `U` is such a polynomial rather than proving it; a disagreement is
/// reported as a falsification. The cost does not grow with the size of the
/// expanded numerator, which is what makes large `m` reachable.
pub fn extract_y_interpolated(
    source: &PolySource,
    n: usize,
    m: usize,
    cfg: &RelationConfig,
) -> Result<PowerSumExpansion, RelationError> {
    if n < m || m == 0 {
        return Err(RelationError::Precondition(format!(
            "the polynomial relation needs n >= m >= 1, got n = {n}, m = {m}"
        )));
    }
    let subject = source.subject(n)?;
    if !subject.symbols().is_empty() {
        return Err(RelationError::Precondition("source carries a_k symbols".into()));
    }
    let mut out = PowerSumExpansion::zero(n - m, m);
    let keys: Vec<ExponentVector> = out.entries().iter().map(|(k, _)| k.clone()).collect();
    let no_symbols = BTreeSet::new();
    let mut rng = StdRng::seed_from_u64(cfg.seed);
    let mut rows: Vec<Vec<ExactRational>> = Vec::new();
    let mut values: Vec<Vec<ExactRational>> = Vec::new();
    let mut wanted = keys.len() + cfg.prescreen_points.max(2);
    for _ in 0..8 {
        while rows.len() < wanted {
            let p = Point::random(&mut rng, m, true, &no_symbols);
            let sums: Vec<ExactRational> = (1..=m)
                .map(|j| p.x.iter().map(|x| num_traits::pow(x.clone(), j)).sum())
                .collect();
            rows.push(
                keys.iter()
                    .map(|k| {
                        k.parts().fold(ExactRational::one(), |acc, (j, e)| {
                            acc * num_traits::pow(sums[j - 1].clone(), e as usize)
                        })
                    })
                    .collect(),
            );
            values.push(vec![u_at_point(&subject, n, m, &p)?]);
        }
        let a = ExactMatrix::from_rows(rows.clone());
        match a.solve(&ExactMatrix::from_rows(values.clone())) {
            Ok(x) => {
                for (i, k) in keys.iter().enumerate() {
                    out.set(k, x[(i, 0)].clone());
                }
                return Ok(out);
            }
            Err(SolveError::Inconsistent) => {
                return Err(RelationError::NotVerified {
                    verdict: Verdict::Falsified,
                    detail: format!(
                        "values of U at {} points with y = 1 fit no symmetric polynomial of degree {}",
                        rows.len(),
                        n - m
                    ),
                })
            }
            // Unlucky points; draw more.
            Err(_) => wanted += keys.len(),
        }
    }
    Err(RelationError::Precondition(
        "could not find points in general position".into(),
    ))
}

/// `Z_n(x^m)` assembled as `sum_k A_k(a) Y_{n,k}(x^m)` from the numeric
/// basis quotients, where `F_{n+m} = sum_k A_k(a) P_{n+m,k}`.
pub fn extract_z_by_linearity(
    n: usize,
    m: usize,
    cfg: &RelationConfig,
) -> Result<PowerSumExpansion<MultiPoly>, RelationError> {
    if m < 2 {
        return Err(RelationError::Precondition("Z needs m >= 2".into()));
    }
    let f = symbolic_power_sum_expansion(n + m);
    let ys: Vec<(MultiPoly, PowerSumExpansion)> = f
        .entries()
        .par_iter()
        .map(|(k, c)| Ok((c.clone(), extract_y_basis(n + m, m, k, cfg)?)))
        .collect::<Result<_, RelationError>>()?;
    let mut out: PowerSumExpansion<MultiPoly> = PowerSumExpansion::zero(n, n);
    for (key, _) in out.clone().entries() {
        if key.max_part() > m {
            continue;
        }
        let mut acc = MultiPoly::zero();
        for (c, y) in &ys {
            acc += &c.scale(&y.coefficient(key));
        }
        out.set(key, acc);
    }
    Ok(out)
}

/// `Y_{n-m,k}` rendered with its subscripts, e.g. `Y_{0,{2,0}} = 1`.
pub fn render_y_entry(n: usize, m: usize, k: &ExponentVector, y: &PowerSumExpansion) -> String {
    format!("Y_{{{},{}}} = {}", n - m, k, y.render())
}

/// `z^m_k = c` lines of a Z table.
pub fn render_z_entries(m: usize, z: &PowerSumExpansion<MultiPoly>) -> Vec<String> {
    z.entries()
        .iter()
        .map(|(k, c)| {
            let key = if k.weight() == 0 {
                "0".to_string()
            } else {
                k.to_string()
            };
            let product = render_power_product(k);
            let product = if product.is_empty() {
                String::new()
            } else {
                format!("  [{product}]")
            };
            format!("z^{m}_{key} = {c}{product}")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{frac, rat};
    use crate::families::family_polynomial;
    use crate::partitions::exponent_vectors;
    use crate::symmfunc::{denominator_product, power_sum};

    fn x(i: u32) -> MultiPoly {
        MultiPoly::var(VarId::x(i))
    }

    fn y(i: u32) -> MultiPoly {
        MultiPoly::var(VarId::y(i))
    }

    fn a(i: u32) -> MultiPoly {
        MultiPoly::var(VarId::a(i))
    }

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    fn cfg() -> RelationConfig {
        RelationConfig::default()
    }

    #[test]
    fn s_matrix_entries() {
        assert_eq!(build_s_matrix(1).row(1), &[x(1)]);
        let s = build_s_matrix(2);
        assert_eq!(s.entry(1, 2), &(&y(1) * &x(2) - &y(2) * &x(1)));
        assert_eq!(s.entry(2, 2), &x(2));
        let s = build_s_matrix(4);
        for i in 1..=4 {
            for j in 1..=4 {
                if i != j {
                    assert_eq!(s.entry(i, j), &-s.entry(j, i).clone());
                }
            }
        }
    }

    #[test]
    fn unit_y_row_product() {
        let s = SMatrix::unit_y(2);
        assert_eq!(denominator_product(s.row(1)), &x(1) * &(x(2) - x(1)));
    }

    /// Brute force over the full product denominator, as a check on the
    /// common-denominator numerator.
    fn brute_force_u(s_poly: &MultiPoly, n: usize, m: usize) -> RationalFunction {
        let s = SMatrix::new(m);
        let xs: Vec<MultiPoly> = (1..=m as u32).map(x).collect();
        let mut terms = vec![(
            MultiPoly::one(),
            RationalFunction::new(s_poly.clone(), denominator_product(&xs)).unwrap(),
        )];
        for i in 1..=m {
            let map = (1..=m as u32)
                .map(|j| (VarId::x(j), s.entry(i, j as usize).clone()))
                .collect();
            let num = s_poly.substitute(&map);
            let weight = y(i as u32).pow((m - n - 1) as u32).scale(&rat(-1));
            terms.push((
                weight,
                RationalFunction::new(num, denominator_product(s.row(i))).unwrap(),
            ));
        }
        crate::polyring::ratfunc_combine(&terms)
    }

    #[test]
    fn u_examples() {
        // S_0 = 1 with generic y
        assert!(u_function(&MultiPoly::one(), 0, 2, false).unwrap().is_zero());
        assert!(brute_force_u(&MultiPoly::one(), 0, 2).is_zero());
        // n = 1, m = 1
        assert!(u_function(&x(1), 1, 1, true).unwrap().is_zero());
        // Bernoulli S_1 = -p_1/2, m = 2
        let s1 = power_sum(1, 2).scale(&frac(-1, 2));
        assert!(u_function(&s1, 1, 2, false).unwrap().is_zero());
        assert!(brute_force_u(&s1, 1, 2).is_zero());
    }

    #[test]
    fn brute_force_agrees_on_nonzero_case() {
        // x_1^2 is not symmetric, so U does not vanish; both routes must agree
        // as rational functions (cross-multiplied).
        let p = x(1).pow(2);
        let ours = u_function(&p, 2, 3, false).unwrap();
        let brute = brute_force_u(&p, 2, 3);
        assert!(!ours.is_zero());
        assert_eq!(
            ours.numerator() * brute.denominator(),
            brute.numerator() * ours.denominator()
        );
    }

    #[test]
    fn row_symmetry_matches_direct_expansion() {
        let direct = RelationConfig {
            row_symmetry: false,
            ..cfg()
        };
        for (n, m, unit) in [(2, 3, false), (1, 3, false), (4, 3, true), (5, 2, true)] {
            let src = PolySource::Symbolic;
            let fast = u_function_with(&src, n, m, unit, &cfg()).unwrap();
            let slow = u_function_with(&src, n, m, unit, &direct).unwrap();
            assert_eq!(fast, slow, "n={n} m={m}");
        }
        let p = PolySource::Polynomial(family_polynomial(Family::Euler, 3, 3));
        assert_eq!(
            u_function_with(&p, 3, 3, true, &direct).unwrap(),
            u_function_with(&p, 3, 3, true, &cfg()).unwrap()
        );
    }

    #[test]
    fn conjecture1_examples() {
        let r = verify_conjecture1(&PolySource::Family(Family::Bernoulli), 2, 3, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Verified);
        assert_eq!(r.conjecture, ConjectureId::C1);
        let r = verify_conjecture1(&PolySource::Symbolic, 1, 2, &cfg()).unwrap();
        assert!(r.is_verified());
        let r = verify_conjecture1(&PolySource::basis(&ev(&[0, 1])), 2, 3, &cfg()).unwrap();
        assert!(r.is_verified());
        assert_eq!(r.conjecture, ConjectureId::C3Zero);
        assert!(matches!(
            verify_conjecture1(&PolySource::Family(Family::Bernoulli), 3, 2, &cfg()),
            Err(RelationError::Precondition(_))
        ));
    }

    #[test]
    fn non_symmetric_input_is_falsified_by_both_stages() {
        let src = PolySource::Polynomial(x(1).pow(2));
        let r = verify_conjecture1(&src, 2, 3, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        assert!(r.witness.unwrap().contains("U = "));
        let exact_only = RelationConfig {
            prescreen_points: 0,
            ..cfg()
        };
        let r = verify_conjecture1(&src, 2, 3, &exact_only).unwrap();
        assert_eq!(r.verdict, Verdict::Falsified);
        assert!(r.witness.unwrap().contains("numerator"));

        let src = PolySource::Polynomial(x(1).pow(3));
        assert_eq!(
            verify_conjecture2(&src, 3, 2, &cfg()).unwrap().verdict,
            Verdict::Falsified
        );
        assert_eq!(
            verify_conjecture2(&src, 3, 2, &exact_only).unwrap().verdict,
            Verdict::Falsified
        );
    }

    #[test]
    fn term_cap_gives_resource_limited() {
        let tight = RelationConfig {
            term_cap: 5,
            prescreen_points: 0,
            ..cfg()
        };
        let r = verify_conjecture1(&PolySource::Symbolic, 2, 3, &tight).unwrap();
        assert_eq!(r.verdict, Verdict::ResourceLimited);
    }

    #[test]
    fn conjecture2_examples() {
        let r = verify_conjecture2(&PolySource::Family(Family::T), 3, 2, &cfg()).unwrap();
        assert!(r.is_verified());
        let e = r.extracted.unwrap();
        assert_eq!(e.weight(), 1);
        assert!(!e.is_zero());

        let r = verify_conjecture2(&PolySource::Family(Family::Bernoulli), 4, 2, &cfg()).unwrap();
        assert!(r.is_verified());
        assert!(r.extracted.unwrap().is_zero());

        let y = extract_y_basis(2, 2, &ev(&[2, 0]), &cfg()).unwrap();
        assert_eq!(y.coefficient(&ExponentVector::empty()), rat(1));
    }

    #[test]
    fn y_examples() {
        let y = extract_y_basis(2, 2, &ev(&[0, 1]), &cfg()).unwrap();
        assert_eq!(y.render(), "3");
        // Y_{2,{1,2,0,0,0}} = -8(p_1^2 - 4 p_2) for m = 3
        let y = extract_y_basis(5, 3, &ev(&[1, 2, 0, 0, 0]), &cfg()).unwrap();
        assert_eq!(y.coefficient(&ev(&[2, 0])), rat(-8));
        assert_eq!(y.coefficient(&ev(&[0, 1])), rat(32));
        // Y_{5,{0,2,0,1,0,0,0,0}} = 0 for m = 3
        let y = extract_y_basis(8, 3, &ev(&[0, 2, 0, 1, 0, 0, 0, 0]), &cfg()).unwrap();
        assert!(y.is_zero());
        // single variable: always zero
        for n in 1..=4 {
            for k in exponent_vectors(n, n) {
                assert!(extract_y_basis(n, 1, &k, &cfg()).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn z_examples() {
        let z = extract_z(0, 2, &cfg()).unwrap();
        assert_eq!(
            z.coefficient(&ExponentVector::empty()),
            a(1).pow(2) + a(2).scale(&rat(3))
        );
        let z = extract_z(2, 2, &cfg()).unwrap();
        let want = (a(1).pow(4).scale(&rat(5)) + (a(1).pow(2) * a(2)).scale(&rat(6))
            - a(2).pow(2).scale(&rat(21))
            - (a(1) * a(3)).scale(&rat(4))
            - a(4).scale(&rat(5)))
        .scale(&frac(1, 2));
        assert_eq!(z.coefficient(&ev(&[2, 0])), want);
        let z = extract_z(3, 2, &cfg()).unwrap();
        assert!(z.coefficient(&ev(&[0, 0, 1])).is_zero());
        assert_eq!(z.entries().len(), 3);
    }

    #[test]
    fn z_by_linearity_matches_direct() {
        for (n, m) in [(0, 2), (1, 3), (2, 2), (2, 3), (3, 2)] {
            assert_eq!(
                extract_z(n, m, &cfg()).unwrap(),
                extract_z_by_linearity(n, m, &cfg()).unwrap(),
                "n={n} m={m}"
            );
        }
    }

    #[test]
    fn family_quotient_matches_specialized_z() {
        // T family: Z with a_k = T coefficients
        let (n, m) = (1, 2);
        let z = extract_z(n, m, &cfg()).unwrap();
        let t = Family::T.coefficients(n + m);
        let vals = (1..=n + m)
            .map(|k| (VarId::a(k as u32), MultiPoly::constant(t[k - 1].clone())))
            .collect();
        let want = z.eval_symbols(&vals);
        let r = verify_conjecture2(&PolySource::Family(Family::T), n + m, m, &cfg()).unwrap();
        assert_eq!(r.extracted.unwrap().with_max_part(n), want);
    }

    #[test]
    fn scale_covariance() {
        let p = family_polynomial(Family::Laguerre, 3, 3);
        let c = frac(-7, 3);
        let base = u_function(&p, 3, 3, true).unwrap();
        let scaled = u_function(&p.scale(&c), 3, 3, true).unwrap();
        assert_eq!(scaled.numerator(), &base.numerator().scale(&c));
        assert_eq!(scaled.denominator(), base.denominator());
    }

    #[test]
    fn source_parsing() {
        assert_eq!("Symbolic".parse::<PolySource>().unwrap(), PolySource::Symbolic);
        assert_eq!(
            "EULER".parse::<PolySource>().unwrap(),
            PolySource::Family(Family::Euler)
        );
        assert!("nope".parse::<PolySource>().is_err());
        assert_eq!(PolySource::basis(&ev(&[0, 1])).label(), "P_{2,{0,1}}");
    }

    #[test]
    fn interpolated_y_matches_expansion() {
        for n in 2..=6 {
            for m in 2..=n {
                for k in exponent_vectors(n, n) {
                    let exact = extract_y_basis(n, m, &k, &cfg()).unwrap();
                    let fitted = extract_y_interpolated(&PolySource::basis(&k), n, m, &cfg()).unwrap();
                    assert_eq!(fitted, exact, "n = {n}, m = {m}, k = {k}");
                }
            }
        }
    }

    #[test]
    fn interpolation_rejects_a_nonsymmetric_source() {
        let p = x(1).pow(3) + x(1) * x(2).pow(2);
        let e = extract_y_interpolated(&PolySource::Polynomial(p), 3, 2, &cfg()).unwrap_err();
        assert!(
            matches!(
                e,
                RelationError::NotVerified {
                    verdict: Verdict::Falsified,
                    ..
                }
            ),
            "{e}"
        );
        assert!(matches!(
            extract_y_interpolated(&PolySource::Symbolic, 3, 2, &cfg()),
            Err(RelationError::Precondition(_))
        ));
    }
}
