//! Randomized property suites. Each suite runs a deterministic proptest
//! runner for a given number of cases, so the same checks back both the
//! `properties` test target and the acceptance report.

use std::collections::HashMap;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use symrel::families::{family_polynomial, symbolic_family_polynomial, Family};
use symrel::relations::{verify_conjecture1, verify_conjecture2, PolySource, RelationConfig};
use symrel::symmfunc::{is_symmetric, to_power_sum_basis_of_degree};
use symrel::{exponent_vectors, ExactMatrix, ExactRational, Monomial, MultiPoly, PowerSumExpansion, VarId, VarKind};

type Q = ExactRational;

pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

pub const SUITES: &[Suite] = &[
    ("polynomial ring axioms", ring_axioms),
    ("exact division round trip", division_round_trip),
    ("substitution and evaluation commute", substitution_commutes),
    ("power-sum basis round trip", basis_round_trip),
    ("family polynomials are symmetric and homogeneous", family_symmetry),
    ("prescreen agrees with exact verification", prescreen_agreement),
    ("fraction-free and rational elimination agree", elimination_agreement),
];

pub fn run(name: &str, cases: u32) -> Result<(), String> {
    let (_, suite) = SUITES.iter().find(|(n, _)| *n == name).expect("unknown suite");
    suite(cases)
}

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn small_rational() -> impl Strategy<Value = Q> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| Q::new(BigInt::from(n), BigInt::from(d)))
}

/// Sparse polynomial in `x_1..x_3` and `a_1`, up to five terms.
fn poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((small_rational(), 0u32..3, 0u32..3, 0u32..3, 0u32..2), 0..5).prop_map(|terms| {
        MultiPoly::from_terms(terms.into_iter().map(|(c, e1, e2, e3, ea)| {
            let mono = Monomial::from_pairs([
                (VarId::x(1), e1),
                (VarId::x(2), e2),
                (VarId::x(3), e3),
                (VarId::a(1), ea),
            ]);
            (mono, c)
        }))
    })
}

fn nonzero_poly() -> impl Strategy<Value = MultiPoly> {
    poly().prop_filter("nonzero", |p| !p.is_zero())
}

#[allow(clippy::eq_op)]
fn ring_axioms(cases: u32) -> Result<(), String> {
    check(cases, (poly(), poly(), poly()), |(a, b, c)| {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, MultiPoly::zero());
        prop_assert_eq!(&a * &MultiPoly::one(), a.clone());
        prop_assert_eq!(&a + &(-&a), MultiPoly::zero());
        Ok(())
    })
}

fn division_round_trip(cases: u32) -> Result<(), String> {
    check(cases, (poly(), nonzero_poly()), |(a, b)| {
        let prod = &a * &b;
        prop_assert_eq!(prod.exact_divide(&b).expect("exact"), a);
        Ok(())
    })
}

fn substitution_commutes(cases: u32) -> Result<(), String> {
    let images = prop::collection::vec(poly(), 3);
    let point = prop::collection::vec(small_rational(), 4);
    check(cases, (poly(), images, point), |(p, images, point)| {
        let vars = [VarId::x(1), VarId::x(2), VarId::x(3), VarId::a(1)];
        let at: HashMap<VarId, Q> = vars.iter().copied().zip(point.iter().cloned()).collect();
        let map: HashMap<VarId, MultiPoly> = vars[..3].iter().copied().zip(images.iter().cloned()).collect();
        let lhs = p.substitute(&map).eval(&at).expect("all variables bound");
        let mut inner = at.clone();
        for (v, img) in &map {
            inner.insert(*v, img.eval(&at).expect("all variables bound"));
        }
        let rhs = p.eval(&inner).expect("all variables bound");
        prop_assert_eq!(lhs, rhs);
        Ok(())
    })
}

fn basis_round_trip(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=5, 0usize..3).prop_flat_map(|(n, extra)| {
        let keys = exponent_vectors(n, n).len();
        (Just(n), Just(n + extra), prop::collection::vec(small_rational(), keys))
    });
    check(cases, strategy, |(n, m, coeffs)| {
        let mut e = PowerSumExpansion::zero(n, n);
        for (k, c) in exponent_vectors(n, n).iter().zip(coeffs) {
            e.set(k, c);
        }
        let back = to_power_sum_basis_of_degree(&e.to_poly(m), Some(n), m, n).expect("symmetric input");
        prop_assert_eq!(back, e);
        Ok(())
    })
}

fn family_symmetry(cases: u32) -> Result<(), String> {
    let strategy = (0usize..=Family::ALL.len(), 1usize..=5, 1usize..=3);
    check(cases, strategy, |(f, n, m)| {
        let p = match Family::ALL.get(f) {
            Some(&family) => family_polynomial(family, n, m),
            None => symbolic_family_polynomial(n, m),
        };
        prop_assert!(is_symmetric(&p, m));
        if !p.is_zero() {
            prop_assert_eq!(p.homogeneous_degree_in(VarKind::X), Some(n as u32));
        }
        Ok(())
    })
}

/// Homogeneous polynomials of degree `n` in `x_1, x_2`, either arbitrary or
/// built from power sums (hence symmetric).
fn test_polynomial() -> impl Strategy<Value = (usize, MultiPoly)> {
    (1usize..=3, any::<bool>(), prop::collection::vec(small_rational(), 4)).prop_map(|(n, symmetric, cs)| {
        let p = if symmetric {
            let mut e = PowerSumExpansion::zero(n, n);
            for (k, c) in exponent_vectors(n, n).iter().zip(cs) {
                e.set(k, c);
            }
            e.to_poly(2)
        } else {
            MultiPoly::from_terms(
                (0..=n as u32)
                    .zip(cs)
                    .map(|(i, c)| (Monomial::from_pairs([(VarId::x(1), i), (VarId::x(2), n as u32 - i)]), c)),
            )
        };
        (n, p)
    })
}

fn prescreen_agreement(cases: u32) -> Result<(), String> {
    check(cases, test_polynomial(), |(n, p)| {
        let source = PolySource::Polynomial(p);
        let screened = RelationConfig::default();
        let exact = RelationConfig {
            prescreen_points: 0,
            ..RelationConfig::default()
        };
        let m = 2;
        let (a, b) = if n < m {
            (
                verify_conjecture1(&source, n, m, &screened),
                verify_conjecture1(&source, n, m, &exact),
            )
        } else {
            (
                verify_conjecture2(&source, n, m, &screened),
                verify_conjecture2(&source, n, m, &exact),
            )
        };
        let (a, b) = (a.expect("valid input"), b.expect("valid input"));
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.extracted, b.extracted);
        Ok(())
    })
}

fn matrix() -> impl Strategy<Value = ExactMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(small_rational(), c), r).prop_map(ExactMatrix::from_rows)
    })
}

fn elimination_agreement(cases: u32) -> Result<(), String> {
    check(cases, matrix(), |a| {
        let (ff, ff_pivots) = a.fraction_free_echelon();
        let (rref, pivots) = a.rref();
        prop_assert_eq!(&ff_pivots, &pivots);
        prop_assert_eq!(ff.rref().0, rref);
        let kernel = a.nullspace();
        prop_assert_eq!(kernel.len(), a.cols() - pivots.len());
        for v in &kernel {
            prop_assert!(a.mul_vec(v).iter().all(|x| *x == Q::from_integer(0.into())));
        }
        Ok(())
    })
}
