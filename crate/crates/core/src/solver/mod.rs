//! Linear solves on top of the relations: the `C_{n,k}` coefficient families
//! whose `Y` polynomials all vanish, the sequential elimination of `a_2, a_3,
//! ...` from the vanishing of `Z`, and the Bernoulli-number identities that
//! come out of it.

pub mod linalg;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{bernoulli_numbers, format_rational, rat, ExactRational};
use crate::families::Family;
use crate::partitions::{exponent_vectors, ExponentVector};
use crate::polyring::{Monomial, MultiPoly, VarId, VarKind};
use crate::relations::{extract_y_basis, extract_y_interpolated, extract_z, PolySource, RelationConfig, RelationError};
use crate::symmfunc::PowerSumExpansion;

pub use linalg::{ExactMatrix, SolveError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("no value given for free coefficient C_{{{n},{key}}}")]
    MissingFreeValue { n: usize, key: ExponentVector },
    #[error("z^{m}_{key} (n = {n}) is not linear in a_{index} with a rational coefficient: {equation}")]
    NotLinear {
        n: usize,
        m: usize,
        key: ExponentVector,
        index: usize,
        equation: String,
    },
    #[error("z^{m}_{key} (n = {n}) does not vanish after substitution: {residual}")]
    Inconsistent {
        n: usize,
        m: usize,
        key: ExponentVector,
        residual: String,
    },
    #[error("no equation determines a_{0}")]
    Unresolved(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

/// Nullspace of the `C_{n,k}` system in solved form: each dependent
/// coefficient as a linear form in the free ones.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CSolution {
    pub n: usize,
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
    pub free_keys: Vec<ExponentVector>,
    /// In listing order; every form is over `free_keys`.
    #[serde(serialize_with = "serialize_dependent")]
    pub dependent: Vec<(ExponentVector, Vec<(ExponentVector, ExactRational)>)>,
}

fn serialize_dependent<S: serde::Serializer>(
    dep: &[(ExponentVector, Vec<(ExponentVector, ExactRational)>)],
    s: S,
) -> Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Term<'a> {
        key: &'a ExponentVector,
        coeff: String,
    }
    #[derive(Serialize)]
    struct Row<'a> {
        key: &'a ExponentVector,
        form: Vec<Term<'a>>,
    }
    let rows: Vec<Row> = dep
        .iter()
        .map(|(key, form)| Row {
            key,
            form: form
                .iter()
                .map(|(k, c)| Term {
                    key: k,
                    coeff: format_rational(c),
                })
                .collect(),
        })
        .collect();
    serde::Serialize::serialize(&rows, s)
}

impl CSolution {
    pub fn nullspace_dim(&self) -> usize {
        self.free_keys.len()
    }

    pub fn form(&self, key: &ExponentVector) -> Option<&[(ExponentVector, ExactRational)]> {
        self.dependent.iter().find(|(k, _)| k == key).map(|(_, f)| f.as_slice())
    }

    /// `C_{n,k} = ...` lines in listing order, free coefficients omitted.
    pub fn relation_lines(&self) -> Vec<String> {
        self.dependent
            .iter()
            .map(|(key, form)| format!("{} = {}", c_name(self.n, key), render_form(self.n, form)))
            .collect()
    }
}

impl fmt::Display for CSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.relation_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

pub fn c_name(n: usize, key: &ExponentVector) -> String {
    format!("C_{{{n},{key}}}")
}

fn render_form(n: usize, form: &[(ExponentVector, ExactRational)]) -> String {
    let terms: Vec<String> = form
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| {
            let name = c_name(n, k);
            if c.is_one() {
                name
            } else if *c == -ExactRational::one() {
                format!("-{name}")
            } else {
                format!("{}*{name}", format_rational(c))
            }
        })
        .collect();
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ").replace("+ -", "- ")
    }
}

/// Nullspace basis vectors of `m`, in primitive integer form.
pub fn nullspace(m: &ExactMatrix) -> Vec<Vec<ExactRational>> {
    m.nullspace()
}

/// The equations on `C_{n,k}`: for each `2 <= m <= n`, every basis
/// coefficient of `sum_k C_k Y_{n-m,k}(x^m)`. Columns follow the listing order
/// of the weight-`n` keys. `Y` is expanded exactly for `m <= cfg.expand_max_m`
/// and interpolated from point values above that.
pub fn c_system_matrix(n: usize, cfg: &RelationConfig) -> Result<ExactMatrix, SolverError> {
    let keys = exponent_vectors(n, n);
    let cases: Vec<(usize, &ExponentVector)> = (2..=n).flat_map(|m| keys.iter().map(move |k| (m, k))).collect();
    let ys: Vec<PowerSumExpansion> = cases
        .par_iter()
        .map(|&(m, k)| {
            if m <= cfg.expand_max_m {
                extract_y_basis(n, m, k, cfg)
            } else {
                extract_y_interpolated(&PolySource::basis(k), n, m, cfg)
            }
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for (block, m) in (2..=n).enumerate() {
        let block_ys = &ys[block * keys.len()..(block + 1) * keys.len()];
        for r in 0..block_ys[0].entries().len() {
            rows.push(block_ys.iter().map(|y| y.entries()[r].1.clone()).collect());
        }
        debug_assert!(block_ys.iter().all(|y| y.weight() == n - m));
    }
    if rows.is_empty() {
        return Ok(ExactMatrix::zeros(0, keys.len()));
    }
    Ok(ExactMatrix::from_rows(rows))
}

/// Solves the `C_{n,k}` system. Elimination runs over the columns in reverse
/// listing order, so the free coefficients are the earliest keys:
/// `{n,0,...}`, then `{n-2,1,0,...}`, and so on.
pub fn solve_c_coefficients(n: usize, cfg: &RelationConfig) -> Result<CSolution, SolverError> {
    if n == 0 {
        return Err(SolverError::Precondition("n must be at least 1".into()));
    }
    let keys = exponent_vectors(n, n);
    let a = c_system_matrix(n, cfg)?;
    solve_system(n, &keys, &a)
}

fn solve_system(n: usize, keys: &[ExponentVector], a: &ExactMatrix) -> Result<CSolution, SolverError> {
    let cols = keys.len();
    let perm: Vec<usize> = (0..cols).rev().collect();
    let (red, pivots) = if a.rows() == 0 {
        (ExactMatrix::zeros(0, cols), Vec::new())
    } else {
        a.permute_columns(&perm).rref()
    };
    let pivot_orig: Vec<usize> = pivots.iter().map(|&p| perm[p]).collect();
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_orig.contains(c)).collect();
    let mut dependent: Vec<(ExponentVector, Vec<(ExponentVector, ExactRational)>)> = pivots
        .iter()
        .enumerate()
        .map(|(r, &p)| {
            let form = free
                .iter()
                .map(|&f| (keys[f].clone(), -red[(r, cols - 1 - f)].clone()))
                .collect();
            (keys[perm[p]].clone(), form)
        })
        .collect();
    dependent.sort_by_key(|(k, _)| keys.iter().position(|x| x == k));
    Ok(CSolution {
        n,
        equations: a.rows(),
        unknowns: cols,
        rank: pivots.len(),
        free_keys: free.iter().map(|&f| keys[f].clone()).collect(),
        dependent,
    })
}

/// The full coefficient vector `C_{n,k}` of `S-bar_n` from values of the free
/// coefficients.
pub fn reconstruct_s_bar(
    solution: &CSolution,
    free_values: &BTreeMap<ExponentVector, ExactRational>,
) -> Result<PowerSumExpansion, SolverError> {
    let n = solution.n;
    let mut out = PowerSumExpansion::zero(n, n);
    for key in &solution.free_keys {
        let v = free_values
            .get(key)
            .ok_or_else(|| SolverError::MissingFreeValue { n, key: key.clone() })?;
        out.set(key, v.clone());
    }
    for (key, form) in &solution.dependent {
        let v: ExactRational = form.iter().map(|(k, c)| c * &free_values[k]).sum();
        out.set(key, v);
    }
    Ok(out)
}

/// Every `z^m_k` equation with `n + m = total` and `2 <= m <= min(total, 4)`,
/// in the order they are consumed by [`sequential_a_elimination`].
fn z_equations(
    total: usize,
    cfg: &RelationConfig,
) -> Result<Vec<(usize, usize, ExponentVector, MultiPoly)>, SolverError> {
    let ms: Vec<usize> = (2..=total.min(4)).collect();
    let zs: Vec<PowerSumExpansion<MultiPoly>> = ms
        .par_iter()
        .map(|&m| extract_z(total - m, m, cfg))
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (m, z) in ms.into_iter().zip(zs) {
        for (k, c) in z.entries() {
            out.push((total - m, m, k.clone(), c.clone()));
        }
    }
    Ok(out)
}

/// Sets every `z^m_k` to zero in increasing `n + m` and solves for `a_N` as a
/// polynomial in `a_1`, one index at a time. Each equation has to be linear
/// in the newest unknown with a rational coefficient, or already satisfied.
pub fn sequential_a_elimination(
    max_index: usize,
    cfg: &RelationConfig,
) -> Result<BTreeMap<usize, MultiPoly>, SolverError> {
    if max_index < 2 {
        return Err(SolverError::Precondition("max_index must be at least 2".into()));
    }
    let mut known: HashMap<VarId, MultiPoly> = HashMap::new();
    let mut out = BTreeMap::new();
    for total in 2..=max_index {
        let target = VarId::a(total as u32);
        let mut value: Option<MultiPoly> = None;
        for (n, m, key, eq) in z_equations(total, cfg)? {
            let mut e = eq.substitute(&known);
            if let Some(v) = &value {
                e = e.substitute(&HashMap::from([(target, v.clone())]));
            }
            if e.is_zero() {
                continue;
            }
            if value.is_some() {
                return Err(SolverError::Inconsistent {
                    n,
                    m,
                    key,
                    residual: e.to_string(),
                });
            }
            let (c1, c0) = split_linear(&e, target).ok_or_else(|| SolverError::NotLinear {
                n,
                m,
                key: key.clone(),
                index: total,
                equation: e.to_string(),
            })?;
            value = Some(c0.scale(&(-c1.recip())));
        }
        let v = value.ok_or(SolverError::Unresolved(total))?;
        known.insert(target, v.clone());
        out.insert(total, v);
    }
    Ok(out)
}

/// `e = c1 * v + c0` with `c1` a nonzero rational and `c0` free of `v`.
fn split_linear(e: &MultiPoly, v: VarId) -> Option<(ExactRational, MultiPoly)> {
    let mut c1: Option<ExactRational> = None;
    let mut c0 = MultiPoly::zero();
    for (mono, c) in e.terms() {
        match mono.exponent(v) {
            0 => c0.add_term(mono.clone(), c.clone()),
            1 if mono.degree() == 1 => c1 = Some(c.clone()),
            _ => return None,
        }
    }
    c1.map(|c| (c, c0))
}

/// `-(2 a_1)^k B_k / k`.
pub fn bernoulli_a_value(k: usize) -> MultiPoly {
    let b = &bernoulli_numbers(k)[k];
    let c = -(num_traits::pow(rat(2), k) * b) / rat(k as i64);
    MultiPoly::term(c, Monomial::from_pairs([(VarId::a(1), k as u32)]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub index: usize,
    pub found: String,
    pub expected: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernoulliIdentityReport {
    pub max_index: usize,
    pub checks: Vec<IdentityCheck>,
}

impl BernoulliIdentityReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

/// Checks `a_k = -(2 a_1)^k B_k / k` for `2 <= k <= max_index` on the output
/// of [`sequential_a_elimination`].
pub fn verify_bernoulli_identity(
    max_index: usize,
    cfg: &RelationConfig,
) -> Result<BernoulliIdentityReport, SolverError> {
    let solved = sequential_a_elimination(max_index, cfg)?;
    let checks = solved
        .iter()
        .map(|(&k, found)| {
            let expected = bernoulli_a_value(k);
            IdentityCheck {
                index: k,
                found: found.to_string(),
                expected: expected.to_string(),
                holds: *found == expected,
            }
        })
        .collect();
    Ok(BernoulliIdentityReport { max_index, checks })
}

/// `(numerator, denominator, [(index, power)])` of one term.
type TermSpec<'a> = (i64, i64, &'a [(u32, u32)]);

/// A polynomial identity among Bernoulli numbers; the variable `a_k` of
/// `poly` stands for `B_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BernoulliRelation {
    pub poly: MultiPoly,
}

impl BernoulliRelation {
    fn from_terms(terms: &[TermSpec]) -> Self {
        let poly = terms
            .iter()
            .map(|&(p, q, pows)| {
                MultiPoly::term(
                    ExactRational::new(p.into(), q.into()),
                    Monomial::from_pairs(pows.iter().map(|&(k, e)| (VarId::a(k), e))),
                )
            })
            .fold(MultiPoly::zero(), |acc, t| acc + t);
        BernoulliRelation { poly }
    }

    /// Value at the actual Bernoulli numbers.
    pub fn evaluate(&self) -> ExactRational {
        let top = self
            .poly
            .variables()
            .iter()
            .map(|v| v.index as usize)
            .max()
            .unwrap_or(0);
        let b = bernoulli_numbers(top);
        let point = (1..=top).map(|k| (VarId::a(k as u32), b[k].clone())).collect();
        self.poly.eval(&point).expect("all B_k assigned")
    }
}

impl fmt::Display for BernoulliRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |v: VarId| format!("B_{}", v.index);
        let shown = self.poly.display_with(&name);
        write!(f, "{shown} = 0")
    }
}

/// The five listed relations followed by the alternative sextic one.
pub fn listed_bernoulli_relations() -> Vec<BernoulliRelation> {
    vec![
        BernoulliRelation::from_terms(&[(1, 1, &[(1, 2)]), (-3, 2, &[(2, 1)])]),
        BernoulliRelation::from_terms(&[
            (1, 1, &[(1, 4)]),
            (-15, 1, &[(1, 2), (2, 1)]),
            (63, 4, &[(2, 2)]),
            (-15, 4, &[(4, 1)]),
        ]),
        BernoulliRelation::from_terms(&[
            (1, 1, &[(1, 4)]),
            (1, 1, &[(1, 2), (2, 1)]),
            (-9, 4, &[(2, 2)]),
            (5, 4, &[(4, 1)]),
        ]),
        BernoulliRelation::from_terms(&[
            (10, 1, &[(1, 6)]),
            (-135, 1, &[(1, 4), (2, 1)]),
            (-135, 2, &[(1, 2), (2, 2)]),
            (585, 4, &[(2, 3)]),
            (-75, 2, &[(1, 2), (4, 1)]),
            (-405, 4, &[(2, 1), (4, 1)]),
            (7, 1, &[(6, 1)]),
        ]),
        BernoulliRelation::from_terms(&[
            (8, 1, &[(1, 6)]),
            (21, 1, &[(1, 4), (2, 1)]),
            (105, 1, &[(1, 2), (2, 2)]),
            (-105, 4, &[(2, 3)]),
            (35, 1, &[(1, 2), (4, 1)]),
            (315, 4, &[(2, 1), (4, 1)]),
            (-28, 3, &[(6, 1)]),
        ]),
        BernoulliRelation::from_terms(&[
            (8, 1, &[(1, 6)]),
            (-294, 1, &[(1, 4), (2, 1)]),
            (2100, 1, &[(1, 2), (2, 2)]),
            (-2205, 2, &[(2, 3)]),
            (-560, 1, &[(1, 2), (4, 1)]),
            (2835, 2, &[(2, 1), (4, 1)]),
            (-140, 1, &[(6, 1)]),
        ]),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationCheck {
    pub relation: String,
    pub value: String,
    pub holds: bool,
}

/// Evaluates every listed relation at the exact Bernoulli numbers.
pub fn verify_nonlinear_bernoulli() -> Vec<RelationCheck> {
    listed_bernoulli_relations()
        .iter()
        .map(|r| {
            let v = r.evaluate();
            RelationCheck {
                relation: r.to_string(),
                value: format_rational(&v),
                holds: v.is_zero(),
            }
        })
        .collect()
}

/// Candidate relations from `Z_n(x^m)`: each `z^m_k` with the Bernoulli
/// family's `a_j = (-1)^(j-1) B_j / j` written in the symbols `B_j` (as
/// `a_j`). Zero candidates are dropped.
pub fn bernoulli_relations_from_z(
    n: usize,
    m: usize,
    cfg: &RelationConfig,
) -> Result<Vec<(ExponentVector, BernoulliRelation)>, SolverError> {
    let z = extract_z(n, m, cfg)?;
    let top = n + m;
    let map: HashMap<VarId, MultiPoly> = (1..=top)
        .map(|j| {
            let sign = if j % 2 == 1 { 1 } else { -1 };
            let coeff = ExactRational::new(sign.into(), (j as i64).into());
            (VarId::a(j as u32), MultiPoly::var(VarId::a(j as u32)).scale(&coeff))
        })
        .collect();
    Ok(z.entries()
        .iter()
        .map(|(k, c)| {
            (
                k.clone(),
                BernoulliRelation {
                    poly: c.substitute(&map),
                },
            )
        })
        .filter(|(_, r)| !r.poly.is_zero())
        .collect())
}

/// The free-coefficient values under which `S-bar_n` is the Bernoulli
/// polynomial `B_n(x^m)`, read off its power-sum expansion.
pub fn bernoulli_free_values(solution: &CSolution) -> BTreeMap<ExponentVector, ExactRational> {
    let b = crate::families::family_power_sum_expansion(Family::Bernoulli, solution.n);
    solution
        .free_keys
        .iter()
        .map(|k| (k.clone(), b.coefficient(k)))
        .collect()
}

/// Whether every variable of `p` is among `a_1 ..= a_top`.
pub fn only_a_symbols(p: &MultiPoly, top: usize) -> bool {
    p.variables()
        .iter()
        .all(|v| v.kind == VarKind::A && (v.index as usize) <= top)
}
