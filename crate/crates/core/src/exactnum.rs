//! Exact scalars and truncated univariate power series.
//!
//! Everything downstream is built on [`ExactRational`], an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. The series type
//! is only as general as the coefficient streams of the family registry need:
//! products, inverses, logarithms and exponentials truncated at a fixed order.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

pub use num_rational::BigRational as ExactRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("truncation orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("series logarithm needs constant term 1, found {0}")]
    LogConstantTerm(String),
    #[error("series exponential needs constant term 0, found {0}")]
    ExpConstantTerm(String),
    #[error("series is not invertible: constant term is zero")]
    NotInvertible,
}

/// Integer as an exact rational.
pub fn rat(n: i64) -> ExactRational {
    ExactRational::from_integer(BigInt::from(n))
}

/// `num/den` in lowest terms. Panics on a zero denominator.
pub fn frac(num: i64, den: i64) -> ExactRational {
    ExactRational::new(BigInt::from(num), BigInt::from(den))
}

/// Renders `p/q`, or `p` when the denominator is 1.
pub fn format_rational(r: &ExactRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses the `p/q` / `p` form produced by [`format_rational`].
pub fn parse_rational(s: &str) -> Option<ExactRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(ExactRational::new(n, d))
        }
        None => Some(ExactRational::from_integer(s.parse().ok()?)),
    }
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// A power series `c_0 + c_1 t + ... + c_N t^N`, everything above `N` discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSeries {
    coeffs: Vec<ExactRational>,
}

impl FormalSeries {
    /// Pads or truncates `coeffs` to `order + 1` entries.
    pub fn new(mut coeffs: Vec<ExactRational>, order: usize) -> Self {
        coeffs.resize(order + 1, ExactRational::zero());
        FormalSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn one(order: usize) -> Self {
        Self::new(vec![ExactRational::one()], order)
    }

    /// Builds the series from a coefficient generator `k -> c_k`.
    pub fn from_fn(order: usize, f: impl Fn(usize) -> ExactRational) -> Self {
        FormalSeries {
            coeffs: (0..=order).map(f).collect(),
        }
    }

    /// `e^{c t}` truncated at `order`.
    pub fn exp_linear(c: &ExactRational, order: usize) -> Self {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = ExactRational::one();
        for k in 0..=order {
            coeffs.push(term.clone());
            term = term * c / rat(k as i64 + 1);
        }
        FormalSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &ExactRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[ExactRational] {
        &self.coeffs
    }

    /// `k! * c_k`, the k-th derivative at zero.
    pub fn derivative_at_zero(&self, k: usize) -> ExactRational {
        self.coeffs[k].clone() * ExactRational::from_integer(factorial(k as u32))
    }

    fn check_order(&self, other: &Self) -> Result<usize, SeriesError> {
        if self.order() != other.order() {
            return Err(SeriesError::OrderMismatch(self.order(), other.order()));
        }
        Ok(self.order())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_order(other)?;
        Ok(FormalSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: &ExactRational) -> Self {
        FormalSeries {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let n = self.check_order(other)?;
        let mut out = vec![ExactRational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Ok(FormalSeries { coeffs: out })
    }

    /// Multiplicative inverse, requiring a nonzero constant term.
    pub fn inverse(&self) -> Result<Self, SeriesError> {
        let c0 = &self.coeffs[0];
        if c0.is_zero() {
            return Err(SeriesError::NotInvertible);
        }
        let n = self.order();
        let mut inv: Vec<ExactRational> = Vec::with_capacity(n + 1);
        inv.push(c0.recip());
        for k in 1..=n {
            let mut acc = ExactRational::zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &inv[k - j];
            }
            inv.push(-acc / c0);
        }
        Ok(FormalSeries { coeffs: inv })
    }

    pub fn derivative(&self) -> Self {
        let n = self.order();
        let mut coeffs: Vec<ExactRational> = (1..=n).map(|k| &self.coeffs[k] * rat(k as i64)).collect();
        coeffs.push(ExactRational::zero());
        FormalSeries { coeffs }
    }

    /// Term-by-term antiderivative with zero constant; the top coefficient of
    /// `self` falls off the truncation.
    pub fn integral(&self) -> Self {
        let n = self.order();
        let mut coeffs = Vec::with_capacity(n + 1);
        coeffs.push(ExactRational::zero());
        for k in 0..n {
            coeffs.push(&self.coeffs[k] / rat(k as i64 + 1));
        }
        FormalSeries { coeffs }
    }

    /// `log a` via `(log a)' = a'/a`, for `a(0) = 1`.
    pub fn log(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_one() {
            return Err(SeriesError::LogConstantTerm(format_rational(&self.coeffs[0])));
        }
        let quotient = self.derivative().mul(&self.inverse()?)?;
        Ok(quotient.integral())
    }

    /// `exp a` for `a(0) = 0`, from `E' = a' E` solved coefficient by coefficient.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::ExpConstantTerm(format_rational(&self.coeffs[0])));
        }
        let n = self.order();
        let da = self.derivative();
        let mut e: Vec<ExactRational> = Vec::with_capacity(n + 1);
        e.push(ExactRational::one());
        for k in 1..=n {
            // k e_k = sum_{j<k} da_j e_{k-1-j}
            let mut acc = ExactRational::zero();
            for j in 0..k {
                acc += &da.coeffs[j] * &e[k - 1 - j];
            }
            e.push(acc / rat(k as i64));
        }
        Ok(FormalSeries { coeffs: e })
    }
}

/// `(e^t - 1)/t = sum t^n/(n+1)!`.
fn exp_minus_one_over_t(order: usize) -> FormalSeries {
    FormalSeries::from_fn(order, |n| ExactRational::new(BigInt::one(), factorial(n as u32 + 1)))
}

/// `B_0 ..= B_N` with `B_1 = -1/2`, from inverting `(e^t - 1)/t`.
pub fn bernoulli_numbers(n: usize) -> Vec<ExactRational> {
    let egf = exp_minus_one_over_t(n).inverse().expect("constant term is 1");
    (0..=n).map(|k| egf.derivative_at_zero(k)).collect()
}

/// `E_0(0) ..= E_N(0)`: Euler polynomials at zero, from `2/(e^t + 1)`.
pub fn euler_poly_at_zero(n: usize) -> Vec<ExactRational> {
    let half_sum = FormalSeries::from_fn(n, |k| {
        if k == 0 {
            ExactRational::one()
        } else {
            ExactRational::new(BigInt::one(), factorial(k as u32) * BigInt::from(2))
        }
    });
    let egf = half_sum.inverse().expect("constant term is 1");
    (0..=n).map(|k| egf.derivative_at_zero(k)).collect()
}

/// Bessel `J_0(t) = sum (-1)^k (t/2)^{2k} / (k!)^2` truncated at `order`.
pub fn bessel_j0_series(order: usize) -> FormalSeries {
    FormalSeries::from_fn(order, |n| {
        if n % 2 == 1 {
            return ExactRational::zero();
        }
        let k = (n / 2) as u32;
        let den = factorial(k).pow(2) * BigInt::from(4).pow(k);
        let sign = if k.is_multiple_of(2) {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        ExactRational::new(sign, den)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(v: &[ExactRational], order: usize) -> FormalSeries {
        FormalSeries::new(v.to_vec(), order)
    }

    #[test]
    fn bernoulli_small() {
        assert_eq!(bernoulli_numbers(0), vec![rat(1)]);
        assert_eq!(bernoulli_numbers(2), vec![rat(1), frac(-1, 2), frac(1, 6)]);
        let b = bernoulli_numbers(12);
        assert!(b[3].is_zero() && b[5].is_zero() && b[11].is_zero());
        assert_eq!(b[4], frac(-1, 30));
        assert_eq!(b[6], frac(1, 42));
        assert_eq!(b[12], frac(-691, 2730));
    }

    #[test]
    fn bernoulli_recurrence() {
        let b = bernoulli_numbers(30);
        for n in 1..=30u32 {
            let s: ExactRational = (0..=n)
                .map(|k| ExactRational::from_integer(binomial(n + 1, k)) * &b[k as usize])
                .sum();
            assert!(s.is_zero(), "n = {n}");
        }
    }

    #[test]
    fn bernoulli_is_deterministic() {
        assert_eq!(bernoulli_numbers(20), bernoulli_numbers(20));
    }

    #[test]
    fn mul_examples() {
        let a = series(&[rat(1), rat(1)], 2);
        let b = series(&[rat(1), rat(-1)], 2);
        assert_eq!(a.mul(&b).unwrap(), series(&[rat(1), rat(0), rat(-1)], 2));

        let e = FormalSeries::exp_linear(&rat(1), 4);
        let em = FormalSeries::exp_linear(&rat(-1), 4);
        assert_eq!(e.mul(&em).unwrap(), FormalSeries::one(4));

        let j0 = bessel_j0_series(4);
        assert_eq!(j0, series(&[rat(1), rat(0), frac(-1, 4), rat(0), frac(1, 64)], 4));
        assert_eq!(
            j0.mul(&j0).unwrap(),
            series(&[rat(1), rat(0), frac(-1, 2), rat(0), frac(3, 32)], 4)
        );
    }

    #[test]
    fn mul_order_mismatch() {
        let a = FormalSeries::one(2);
        let b = FormalSeries::one(3);
        assert_eq!(a.mul(&b), Err(SeriesError::OrderMismatch(2, 3)));
    }

    #[test]
    fn log_examples() {
        assert_eq!(FormalSeries::one(5).log().unwrap(), FormalSeries::zero(5));
        let e = FormalSeries::exp_linear(&rat(1), 3);
        assert_eq!(e.log().unwrap(), series(&[rat(0), rat(1)], 3));
        let l = bessel_j0_series(4).log().unwrap();
        assert_eq!(l, series(&[rat(0), rat(0), frac(-1, 4), rat(0), frac(-1, 64)], 4));
    }

    #[test]
    fn log_rejects_bad_constant() {
        let a = series(&[rat(2), rat(1)], 3);
        assert!(matches!(a.log(), Err(SeriesError::LogConstantTerm(_))));
    }

    #[test]
    fn log_exp_round_trip() {
        let a = series(&[rat(1), frac(3, 7), frac(-2, 5), rat(4), frac(1, 9)], 6);
        assert_eq!(a.log().unwrap().exp().unwrap(), a);
        let l = series(&[rat(0), frac(1, 3), rat(2), frac(-5, 4)], 7);
        assert_eq!(l.exp().unwrap().log().unwrap(), l);
    }

    #[test]
    fn euler_values() {
        let e = euler_poly_at_zero(6);
        assert_eq!(e[0], rat(1));
        assert_eq!(e[1], frac(-1, 2));
        assert_eq!(e[2], rat(0));
        assert_eq!(e[3], frac(1, 4));
        assert_eq!(e[4], rat(0));
        assert_eq!(e[5], frac(-1, 2));
    }

    #[test]
    fn rational_formatting() {
        assert_eq!(format_rational(&frac(-6, 4)), "-3/2");
        assert_eq!(format_rational(&rat(7)), "7");
        assert_eq!(parse_rational("-3/2"), Some(frac(-3, 2)));
        assert_eq!(parse_rational("12"), Some(rat(12)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(frac(0, 5), rat(0));
        assert!(frac(3, -6).denom() > &BigInt::zero());
    }
}
