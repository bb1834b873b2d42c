//! Power sums, complete Bell polynomials and the power-sum-product basis.
//!
//! A homogeneous symmetric polynomial of degree `d` in `x_1..x_m` has a
//! unique expansion `sum_k c_k p_1^{k_1} ... p_d^{k_d}` once the parts of `k`
//! are restricted to `<= m`. [`to_power_sum_basis`] recovers those `c_k` by
//! solving the exact linear system on monomial coefficients and then
//! re-expanding to certify a zero residual.
//!
//! The denominator product `pi(v)` is taken to be the product of the
//! components of `v`. That reading is not self-evident; it is the one under
//! which the `n = 0` relation reduces to zero, which the relations tests check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exactnum::{binomial, factorial, format_rational, ExactRational};
use crate::partitions::{exponent_vectors, ExponentVector};
use crate::polyring::{Monomial, MultiPoly, VarId, VarKind};
use crate::solver::linalg::{ExactMatrix, SolveError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BasisError {
    #[error("polynomial is not symmetric in x_1..x_{0}")]
    NotSymmetric(usize),
    #[error("polynomial is not homogeneous in the x variables")]
    NotHomogeneous,
    #[error("polynomial has degree {found} but degree {expected} was requested")]
    WrongDegree { expected: usize, found: usize },
    #[error("unexpected variable {0} (only x_1..x_m{1} allowed)")]
    ForeignVariable(VarId, &'static str),
    #[error("not representable with parts <= {max_part} in {m} variables")]
    NotRepresentable { max_part: usize, m: usize },
    #[error("basis with parts <= {max_part} is linearly dependent in {m} variables")]
    DependentBasis { max_part: usize, m: usize },
    #[error("residual check failed after basis conversion")]
    NonzeroResidual,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("complete Bell polynomial of order {needed} needs {needed} arguments, got {got}")]
pub struct InsufficientArguments {
    pub needed: usize,
    pub got: usize,
}

/// The operations the Bell recurrence needs from its coefficient ring.
pub trait BellRing: Clone {
    fn ring_one() -> Self;
    fn ring_zero() -> Self;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn scale_int(&self, k: &BigInt) -> Self;
}

impl BellRing for ExactRational {
    fn ring_one() -> Self {
        ExactRational::one()
    }
    fn ring_zero() -> Self {
        ExactRational::zero()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_int(&self, k: &BigInt) -> Self {
        self * ExactRational::from_integer(k.clone())
    }
}

impl BellRing for MultiPoly {
    fn ring_one() -> Self {
        MultiPoly::one()
    }
    fn ring_zero() -> Self {
        MultiPoly::zero()
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale_int(&self, k: &BigInt) -> Self {
        self.scale(&ExactRational::from_integer(k.clone()))
    }
}

/// `p_k(x^m) = x_1^k + ... + x_m^k`.
pub fn power_sum(k: u32, m: usize) -> MultiPoly {
    assert!(k >= 1 && m >= 1);
    MultiPoly::from_terms((1..=m as u32).map(|i| (Monomial::from_pairs([(VarId::x(i), k)]), ExactRational::one())))
}

/// `P_{n,k}(x^m) = p_1^{k_1} ... p_n^{k_n}`, expanded.
pub fn power_sum_product(k: &ExponentVector, m: usize) -> MultiPoly {
    k.parts().fold(MultiPoly::one(), |acc, (part, mult)| {
        &acc * &power_sum(part as u32, m).pow(mult)
    })
}

/// `BB_n(b_1, ..., b_n)` from `BB_{j+1} = sum_{i=0}^{j} C(j,i) BB_{j-i} b_{i+1}`.
pub fn complete_bell<R: BellRing>(n: usize, b: &[R]) -> Result<R, InsufficientArguments> {
    if b.len() < n {
        return Err(InsufficientArguments {
            needed: n,
            got: b.len(),
        });
    }
    let mut bell: Vec<R> = Vec::with_capacity(n + 1);
    bell.push(R::ring_one());
    for j in 0..n {
        let mut acc = R::ring_zero();
        for i in 0..=j {
            let term = bell[j - i].ring_mul(&b[i]).scale_int(&binomial(j as u32, i as u32));
            acc = acc.ring_add(&term);
        }
        bell.push(acc);
    }
    Ok(bell.pop().expect("nonempty"))
}

/// Coefficient of `b_1^{k_1} ... b_n^{k_n}` in `BB_n`:
/// `n! / prod_i (k_i! (i!)^{k_i})`.
pub fn bell_term_coefficient(k: &ExponentVector) -> BigInt {
    let n = k.weight() as u32;
    let den = k.parts().fold(BigInt::one(), |acc, (i, ki)| {
        acc * factorial(ki) * factorial(i as u32).pow(ki)
    });
    factorial(n) / den
}

/// `pi(v) = v_1 * ... * v_m`.
pub fn denominator_product(v: &[MultiPoly]) -> MultiPoly {
    v.iter().fold(MultiPoly::one(), |acc, p| &acc * p)
}

/// Coefficient types a [`PowerSumExpansion`] can carry.
pub trait ExpansionCoeff: Clone + PartialEq + fmt::Debug {
    fn coeff_zero() -> Self;
    fn coeff_is_zero(&self) -> bool;
    fn as_poly(&self) -> MultiPoly;
    fn render(&self) -> String;
}

impl ExpansionCoeff for ExactRational {
    fn coeff_zero() -> Self {
        ExactRational::zero()
    }
    fn coeff_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn as_poly(&self) -> MultiPoly {
        MultiPoly::constant(self.clone())
    }
    fn render(&self) -> String {
        format_rational(self)
    }
}

impl ExpansionCoeff for MultiPoly {
    fn coeff_zero() -> Self {
        MultiPoly::zero()
    }
    fn coeff_is_zero(&self) -> bool {
        self.is_zero()
    }
    fn as_poly(&self) -> MultiPoly {
        self.clone()
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

/// `sum_k c_k P_{n,k}` over every basis key of weight `n` with parts
/// `<= max_part`, listed in the canonical partition order (zeros included).
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSumExpansion<C = ExactRational> {
    weight: usize,
    max_part: usize,
    entries: Vec<(ExponentVector, C)>,
}

impl<C: ExpansionCoeff> PowerSumExpansion<C> {
    pub fn zero(weight: usize, max_part: usize) -> Self {
        PowerSumExpansion {
            weight,
            max_part,
            entries: exponent_vectors(weight, max_part)
                .into_iter()
                .map(|k| (k, C::coeff_zero()))
                .collect(),
        }
    }

    /// Builds an expansion from a sparse map; keys must have the given weight
    /// and parts `<= max_part`.
    pub fn from_map(weight: usize, max_part: usize, map: BTreeMap<ExponentVector, C>) -> Self {
        let mut out = Self::zero(weight, max_part);
        for (k, c) in map {
            out.set(&k, c);
        }
        out
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn max_part(&self) -> usize {
        self.max_part
    }

    pub fn entries(&self) -> &[(ExponentVector, C)] {
        &self.entries
    }

    pub fn coefficient(&self, k: &ExponentVector) -> C {
        self.entries
            .iter()
            .find(|(key, _)| key == k)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(C::coeff_zero)
    }

    /// Panics if `k` is not a key of this expansion.
    pub fn set(&mut self, k: &ExponentVector, c: C) {
        let slot = self.entries.iter_mut().find(|(key, _)| key == k).unwrap_or_else(|| {
            panic!(
                "{k} is not a key of weight {} with parts <= {}",
                self.weight, self.max_part
            )
        });
        slot.1 = c;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, c)| c.coeff_is_zero())
    }

    /// Same expansion listed over the keys with parts `<= max_part`; the
    /// added keys get zero coefficients. Panics if a nonzero entry would be
    /// dropped.
    pub fn with_max_part(&self, max_part: usize) -> Self {
        let mut out = Self::zero(self.weight, max_part);
        for (k, c) in &self.entries {
            if c.coeff_is_zero() {
                continue;
            }
            out.set(k, c.clone());
        }
        out
    }

    pub fn map_coeffs<D: ExpansionCoeff>(&self, f: impl Fn(&C) -> D) -> PowerSumExpansion<D> {
        PowerSumExpansion {
            weight: self.weight,
            max_part: self.max_part,
            entries: self.entries.iter().map(|(k, c)| (k.clone(), f(c))).collect(),
        }
    }

    /// Expands back to a polynomial in `x_1..x_m` (A-symbols in the
    /// coefficients are carried along).
    pub fn to_poly(&self, m: usize) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (k, c) in &self.entries {
            if !c.coeff_is_zero() {
                out += &(&c.as_poly() * &power_sum_product(k, m));
            }
        }
        out
    }

    /// Renders as `c * p_1^2*p_2 + ...` over nonzero entries.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .filter(|(_, c)| !c.coeff_is_zero())
            .map(|(k, c)| {
                let mono = render_power_product(k);
                let coeff = c.render();
                match (mono.is_empty(), coeff.contains([' ', '+']) || coeff[1..].contains('-')) {
                    (true, _) => coeff,
                    (false, true) => format!("({coeff})*{mono}"),
                    (false, false) if coeff == "1" => mono,
                    (false, false) if coeff == "-1" => format!("-{mono}"),
                    (false, false) => format!("{coeff}*{mono}"),
                }
            })
            .collect();
        if parts.is_empty() {
            return "0".to_string();
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl<C: ExpansionCoeff> Serialize for PowerSumExpansion<C> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            key: &'a ExponentVector,
            coeff: String,
        }
        let mut st = serializer.serialize_struct("PowerSumExpansion", 3)?;
        st.serialize_field("weight", &self.weight)?;
        st.serialize_field("max_part", &self.max_part)?;
        let entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|(key, c)| Entry { key, coeff: c.render() })
            .collect();
        st.serialize_field("entries", &entries)?;
        st.end()
    }
}

impl PowerSumExpansion<ExactRational> {
    /// Linear combination `sum_i w_i e_i` of expansions on the same keys.
    pub fn linear_combination(items: &[(ExactRational, &PowerSumExpansion)]) -> Option<PowerSumExpansion> {
        let (_, first) = items.first()?;
        let mut out = PowerSumExpansion::zero(first.weight, first.max_part);
        for (w, e) in items {
            for ((k, c), (k2, acc)) in e.entries.iter().zip(out.entries.iter_mut()) {
                debug_assert_eq!(k, k2);
                *acc += w * c;
            }
        }
        Some(out)
    }

    pub fn to_symbolic(&self) -> PowerSumExpansion<MultiPoly> {
        self.map_coeffs(|c| MultiPoly::constant(c.clone()))
    }
}

impl PowerSumExpansion<MultiPoly> {
    /// The rational expansion, if no coefficient carries a symbol.
    pub fn as_constants(&self) -> Option<PowerSumExpansion> {
        let entries = self
            .entries
            .iter()
            .map(|(k, c)| Some((k.clone(), c.as_constant()?)))
            .collect::<Option<Vec<_>>>()?;
        Some(PowerSumExpansion {
            weight: self.weight,
            max_part: self.max_part,
            entries,
        })
    }

    /// Substitutes values for the `a_k` symbols.
    pub fn eval_symbols(&self, values: &HashMap<VarId, MultiPoly>) -> PowerSumExpansion<MultiPoly> {
        self.map_coeffs(|c| c.substitute(values))
    }
}

/// `p_1^2*p_3` style rendering of a basis key; empty for the weight-0 key.
pub fn render_power_product(k: &ExponentVector) -> String {
    k.parts()
        .map(|(i, e)| if e == 1 { format!("p_{i}") } else { format!("p_{i}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

fn transposition(m: usize) -> HashMap<VarId, MultiPoly> {
    [
        (VarId::x(1), MultiPoly::var(VarId::x(2))),
        (VarId::x(2), MultiPoly::var(VarId::x(1))),
    ]
    .into_iter()
    .take(if m >= 2 { 2 } else { 0 })
    .collect()
}

fn cycle(m: usize) -> HashMap<VarId, MultiPoly> {
    (1..=m as u32)
        .map(|i| (VarId::x(i), MultiPoly::var(VarId::x(i % m as u32 + 1))))
        .collect()
}

/// Invariance under `x_1 <-> x_2` and the cycle `x_1 -> x_2 -> ... -> x_m -> x_1`,
/// which together generate the symmetric group.
pub fn is_symmetric(p: &MultiPoly, m: usize) -> bool {
    if m < 2 {
        return true;
    }
    p.substitute(&transposition(m)) == *p && p.substitute(&cycle(m)) == *p
}

fn check_variables(p: &MultiPoly, m: usize, allow_a: bool) -> Result<(), BasisError> {
    for v in p.variables() {
        let ok = match v.kind {
            VarKind::X => v.index as usize <= m,
            VarKind::Y => false,
            VarKind::A => allow_a,
        };
        if !ok {
            let hint = if allow_a { " and a_k" } else { "" };
            return Err(BasisError::ForeignVariable(v, hint));
        }
    }
    Ok(())
}

fn check_shape(p: &MultiPoly, m: usize, degree: Option<usize>) -> Result<usize, BasisError> {
    let d = p.homogeneous_degree_in(VarKind::X).ok_or(BasisError::NotHomogeneous)? as usize;
    let d = if p.is_zero() { degree.unwrap_or(0) } else { d };
    if let Some(expected) = degree {
        if expected != d {
            return Err(BasisError::WrongDegree { expected, found: d });
        }
    }
    if !is_symmetric(p, m) {
        return Err(BasisError::NotSymmetric(m));
    }
    Ok(d)
}

/// Basis products and their monomial-coefficient matrix. Rows are the
/// monomials with non-increasing exponents along `x_1..x_m` that occur in any
/// basis product; a symmetric polynomial is determined by those coefficients.
struct BasisSystem {
    keys: Vec<ExponentVector>,
    products: Vec<MultiPoly>,
    rows: Vec<Monomial>,
    matrix: ExactMatrix,
}

fn is_dominant(mono: &Monomial, m: usize) -> bool {
    let exps: Vec<u32> = (1..=m as u32).map(|i| mono.exponent(VarId::x(i))).collect();
    exps.windows(2).all(|w| w[0] >= w[1])
}

fn basis_system(d: usize, m: usize, max_part: usize) -> BasisSystem {
    let keys = exponent_vectors(d, max_part);
    let products: Vec<MultiPoly> = keys.iter().map(|k| power_sum_product(k, m)).collect();
    let rows: Vec<Monomial> = products
        .iter()
        .flat_map(|p| p.terms().map(|(mono, _)| mono.clone()))
        .filter(|mono| is_dominant(mono, m))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let matrix = ExactMatrix::from_rows(
        rows.iter()
            .map(|r| products.iter().map(|p| p.coefficient(r)).collect())
            .collect(),
    );
    BasisSystem {
        keys,
        products,
        rows,
        matrix,
    }
}

fn map_solve_error(e: SolveError, m: usize, max_part: usize) -> BasisError {
    match e {
        SolveError::Singular { .. } => BasisError::DependentBasis { max_part, m },
        _ => BasisError::NotRepresentable { max_part, m },
    }
}

/// Expansion of a symmetric homogeneous `p` in `x_1..x_m` over products with
/// parts `<= max_part`. The degree is read off `p` (0 for the zero polynomial).
pub fn to_power_sum_basis(p: &MultiPoly, m: usize, max_part: usize) -> Result<PowerSumExpansion, BasisError> {
    to_power_sum_basis_of_degree(p, None, m, max_part)
}

/// As [`to_power_sum_basis`], with the degree pinned when known.
pub fn to_power_sum_basis_of_degree(
    p: &MultiPoly,
    degree: Option<usize>,
    m: usize,
    max_part: usize,
) -> Result<PowerSumExpansion, BasisError> {
    check_variables(p, m, false)?;
    let d = check_shape(p, m, degree)?;
    let sys = basis_system(d, m, max_part);
    let (solution, leftover) = solve_columns(&sys, std::slice::from_ref(p), m, max_part)?;
    if leftover {
        return Err(BasisError::NotRepresentable { max_part, m });
    }
    let entries = sys
        .keys
        .into_iter()
        .zip(solution.into_iter().map(|mut col| col.remove(0)))
        .collect();
    let out = PowerSumExpansion {
        weight: d,
        max_part,
        entries,
    };
    if out.to_poly(m) != *p {
        return Err(BasisError::NonzeroResidual);
    }
    Ok(out)
}

/// Symbolic variant: `p` may carry `a_k` symbols in its coefficients. Terms
/// are grouped by their `a`-monomial and each group is converted on its own.
pub fn to_power_sum_basis_symbolic(
    p: &MultiPoly,
    degree: Option<usize>,
    m: usize,
    max_part: usize,
) -> Result<PowerSumExpansion<MultiPoly>, BasisError> {
    check_variables(p, m, true)?;
    let d = check_shape(p, m, degree)?;
    let sys = basis_system(d, m, max_part);
    let groups = p.split_by_complement(VarKind::X);
    let (outer, inner): (Vec<Monomial>, Vec<MultiPoly>) = groups.into_iter().unzip();
    let (solution, leftover) = solve_columns(&sys, &inner, m, max_part)?;
    if leftover {
        return Err(BasisError::NotRepresentable { max_part, m });
    }
    let entries = sys
        .keys
        .into_iter()
        .zip(solution)
        .map(|(k, col)| {
            let c = MultiPoly::from_terms(outer.iter().cloned().zip(col));
            (k, c)
        })
        .collect();
    let out = PowerSumExpansion {
        weight: d,
        max_part,
        entries,
    };
    if out.to_poly(m) != *p {
        return Err(BasisError::NonzeroResidual);
    }
    Ok(out)
}

/// Solves for every right-hand side at once. Returns, per key, the solution
/// value for each right-hand side, plus whether some right-hand side had a
/// dominant monomial outside the span of the basis rows.
fn solve_columns(
    sys: &BasisSystem,
    rhs_polys: &[MultiPoly],
    m: usize,
    max_part: usize,
) -> Result<(Vec<Vec<ExactRational>>, bool), BasisError> {
    let leftover = rhs_polys.iter().any(|p| {
        p.terms()
            .any(|(mono, _)| is_dominant(mono, m) && sys.rows.binary_search(mono).is_err())
    });
    if sys.keys.is_empty() {
        return Ok((Vec::new(), leftover || rhs_polys.iter().any(|p| !p.is_zero())));
    }
    let rhs = ExactMatrix::from_rows(
        sys.rows
            .iter()
            .map(|r| rhs_polys.iter().map(|p| p.coefficient(r)).collect())
            .collect(),
    );
    let x = sys.matrix.solve(&rhs).map_err(|e| map_solve_error(e, m, max_part))?;
    debug_assert_eq!(x.rows(), sys.products.len());
    Ok((x.to_rows(), leftover))
}
