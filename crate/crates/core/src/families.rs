//! The polynomial families `F_n(x^m) = b_n BB_n(f_1, ..., f_n)` with
//! `f_k = a_k p_k(x^m)`, one per row of the family table, plus a symbolic
//! family whose `a_k` are free symbols.
//!
//! Each family is stored as its `a_k` stream, i.e. `k!` times the Taylor
//! coefficients of `ln G(s_0, t)`. The generating functions are kept as
//! documentation; the Legendre and Euler streams are derived from them by
//! formal power series arithmetic.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::{bernoulli_numbers, bessel_j0_series, euler_poly_at_zero, factorial, rat, ExactRational};
use crate::partitions::exponent_vectors;
use crate::polyring::{Monomial, MultiPoly, VarId};
use crate::symmfunc::{bell_term_coefficient, complete_bell, power_sum, PowerSumExpansion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Legendre,
    Laguerre,
    Hermite,
    Fibonacci,
    Bernoulli,
    T,
    Euler,
    Bell,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown family `{0}`")]
pub struct UnknownFamily(pub String);

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Legendre,
        Family::Laguerre,
        Family::Hermite,
        Family::Fibonacci,
        Family::Bernoulli,
        Family::T,
        Family::Euler,
        Family::Bell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Legendre => "legendre",
            Family::Laguerre => "laguerre",
            Family::Hermite => "hermite",
            Family::Fibonacci => "fibonacci",
            Family::Bernoulli => "bernoulli",
            Family::T => "t",
            Family::Euler => "euler",
            Family::Bell => "bell",
        }
    }

    pub fn generating_function(self) -> &'static str {
        match self {
            Family::Legendre => "exp(s t) J_0(t sqrt(1 - s^2))",
            Family::Laguerre => "exp(-t s/(1 - t))/(1 - t)",
            Family::Hermite => "exp(2 s t - t^2)",
            Family::Fibonacci => "1/(1 - s t - t^2)",
            Family::Bernoulli => "t exp(s t)/(exp(t) - 1)",
            Family::T => "(exp(t) - 1)/(t exp(s t))",
            Family::Euler => "2 exp(s t)/(exp(t) + 1)",
            Family::Bell => "exp((exp(t) - 1) s)",
        }
    }

    pub fn a_formula(self) -> &'static str {
        match self {
            Family::Legendre => "a_{2k+1} = 0, a_{2k} = d^{2k} ln J_0(t)/dt^{2k} at t = 0",
            Family::Laguerre => "a_k = (k-1)!",
            Family::Hermite => "a_2 = -2, a_i = 0 otherwise",
            Family::Fibonacci => "a_{2k+1} = 0, a_{2k} = 2 (2k-1)!",
            Family::Bernoulli => "a_k = (-1)^(k-1) B_k/k",
            Family::T => "a_k = (-1)^k B_k/k",
            Family::Euler => "a_1 = -1/2, a_k = E_{k-1}(0)/2",
            Family::Bell => "a_k = 1",
        }
    }

    /// The point `s_0` the generating function is expanded at. Already folded
    /// into the `a_k` streams.
    pub fn s0(self) -> ExactRational {
        match self {
            Family::Bell => ExactRational::one(),
            _ => ExactRational::zero(),
        }
    }

    /// `b_n`: `1/n!` for Laguerre and Fibonacci, 1 otherwise.
    pub fn b_norm(self, n: usize) -> ExactRational {
        match self {
            Family::Laguerre | Family::Fibonacci => ExactRational::new(One::one(), factorial(n as u32)),
            _ => ExactRational::one(),
        }
    }

    /// `a_1 ..= a_K`.
    pub fn coefficients(self, count: usize) -> Vec<ExactRational> {
        let ks = 1..=count;
        match self {
            Family::Legendre => {
                let log = bessel_j0_series(count).log().expect("J_0 has constant term 1");
                ks.map(|k| log.derivative_at_zero(k)).collect()
            }
            Family::Laguerre => ks
                .map(|k| ExactRational::from_integer(factorial(k as u32 - 1)))
                .collect(),
            Family::Hermite => ks.map(|k| if k == 2 { rat(-2) } else { rat(0) }).collect(),
            Family::Fibonacci => ks
                .map(|k| {
                    if k % 2 == 0 {
                        ExactRational::from_integer(factorial(k as u32 - 1) * 2)
                    } else {
                        rat(0)
                    }
                })
                .collect(),
            Family::Bernoulli | Family::T => {
                let b = bernoulli_numbers(count);
                let flip = self == Family::T;
                ks.map(|k| {
                    let v = &b[k] / rat(k as i64);
                    if (k % 2 == 0) != flip {
                        -v
                    } else {
                        v
                    }
                })
                .collect()
            }
            Family::Euler => {
                let e = euler_poly_at_zero(count);
                ks.map(|k| if k == 1 { -rat(1) / rat(2) } else { &e[k - 1] / rat(2) })
                    .collect()
            }
            Family::Bell => ks.map(|_| rat(1)).collect(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = UnknownFamily;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Family::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| UnknownFamily(s.to_string()))
    }
}

/// `a_1 ..= a_K` of a family.
pub fn family_coefficients(f: Family, count: usize) -> Vec<ExactRational> {
    f.coefficients(count)
}

/// `F_n(x^m)` expanded in `x_1..x_m`, through the Bell recurrence.
pub fn family_polynomial(f: Family, n: usize, m: usize) -> MultiPoly {
    let a = f.coefficients(n);
    let b: Vec<MultiPoly> = a
        .iter()
        .enumerate()
        .map(|(i, ak)| power_sum(i as u32 + 1, m).scale(ak))
        .collect();
    complete_bell(n, &b).expect("n arguments").scale(&f.b_norm(n))
}

/// `F_n(x^m)` with `a_k` left as the symbols `a_1..a_n` (and `b_n = 1`).
pub fn symbolic_family_polynomial(n: usize, m: usize) -> MultiPoly {
    let b: Vec<MultiPoly> = (1..=n as u32)
        .map(|k| &MultiPoly::var(VarId::a(k)) * &power_sum(k, m))
        .collect();
    complete_bell(n, &b).expect("n arguments")
}

/// `F_n` in the power-sum-product basis from the explicit Bell coefficients:
/// the coefficient of `P_{n,k}` is `b_n n!/prod(k_i! (i!)^{k_i}) prod a_i^{k_i}`.
pub fn family_power_sum_expansion(f: Family, n: usize) -> PowerSumExpansion {
    let a = f.coefficients(n);
    let bn = f.b_norm(n);
    let mut out = PowerSumExpansion::zero(n, n);
    for k in exponent_vectors(n, n) {
        let mono = k.parts().fold(ExactRational::one(), |acc, (i, e)| {
            acc * num_traits::pow(a[i - 1].clone(), e as usize)
        });
        let c = mono * ExactRational::from_integer(bell_term_coefficient(&k)) * &bn;
        out.set(&k, c);
    }
    out
}

/// Symbolic counterpart of [`family_power_sum_expansion`]: coefficients are
/// monomials in `a_1..a_n`.
pub fn symbolic_power_sum_expansion(n: usize) -> PowerSumExpansion<MultiPoly> {
    let mut out = PowerSumExpansion::zero(n, n);
    for k in exponent_vectors(n, n) {
        let mono = Monomial::from_pairs(k.parts().map(|(i, e)| (VarId::a(i as u32), e)));
        let c = ExactRational::from_integer(bell_term_coefficient(&k));
        out.set(&k, MultiPoly::term(c, mono));
    }
    out
}
