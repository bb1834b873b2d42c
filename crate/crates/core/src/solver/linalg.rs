//! Dense exact linear algebra: rational RREF, fraction-free (Bareiss)
//! echelon form, nullspaces and multi-right-hand-side solves.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{format_rational, ExactRational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("system is inconsistent")]
    Inconsistent,
    #[error("system is underdetermined (rank {rank} < {unknowns} unknowns)")]
    Singular { rank: usize, unknowns: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactRational>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![ExactRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ExactRational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<ExactRational>>) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        ExactMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[ExactRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<ExactRational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[ExactRational]) -> Vec<ExactRational> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Same matrix with columns permuted: new column `j` is old `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.cols);
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, &p) in perm.iter().enumerate() {
                out[(i, j)] = self[(i, p)].clone();
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    /// Reduced row echelon form by plain rational elimination, with the pivot
    /// columns. Zero rows are dropped.
    pub fn rref(&self) -> (ExactMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in c..m.cols {
                    let v = &m[(r, j)] * &f;
                    m[(i, j)] -= v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        m.data.truncate(r * m.cols);
        m.rows = r;
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.fraction_free_echelon().1.len()
    }

    /// Integer row echelon form by Bareiss elimination. Each row is first
    /// cleared of denominators; the result has integer entries (as rationals)
    /// and its row space equals the input's. Zero rows are dropped.
    pub fn fraction_free_echelon(&self) -> (ExactMatrix, Vec<usize>) {
        let mut a: Vec<Vec<BigInt>> = (0..self.rows).map(|i| integer_row(self.row(i))).collect();
        let (rows, cols) = (self.rows, self.cols);
        let mut prev = BigInt::one();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
                continue;
            };
            a.swap(r, p);
            for i in r + 1..rows {
                for j in c + 1..cols {
                    let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                    // Sylvester's identity keeps this division exact.
                    a[i][j] = v / &prev;
                }
                a[i][c] = BigInt::zero();
            }
            prev = a[r][c].clone();
            pivots.push(c);
            r += 1;
        }
        a.truncate(r);
        let data = a.into_iter().flatten().map(ExactRational::from_integer).collect();
        (ExactMatrix { rows: r, cols, data }, pivots)
    }

    /// Basis of `{v : M v = 0}`, found by fraction-free elimination and back
    /// substitution; each vector is scaled to primitive integer form with a
    /// positive first nonzero entry.
    pub fn nullspace(&self) -> Vec<Vec<ExactRational>> {
        let (ech, pivots) = self.fraction_free_echelon();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![ExactRational::zero(); self.cols];
            v[f] = ExactRational::one();
            for (r, &pc) in pivots.iter().enumerate().rev() {
                let row = ech.row(r);
                let s: ExactRational = (pc + 1..self.cols).map(|j| &row[j] * &v[j]).sum();
                v[pc] = -s / &row[pc];
            }
            basis.push(primitive_integer(v));
        }
        basis
    }

    /// Solves `M X = B` for a matrix of right-hand sides, requiring full
    /// column rank and consistency.
    pub fn solve(&self, rhs: &ExactMatrix) -> Result<ExactMatrix, SolveError> {
        if rhs.rows != self.rows {
            return Err(SolveError::Dimension(format!(
                "{} equations but {} right-hand-side rows",
                self.rows, rhs.rows
            )));
        }
        let mut aug = ExactMatrix::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..rhs.cols {
                aug[(i, self.cols + j)] = rhs[(i, j)].clone();
            }
        }
        let (red, pivots) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return Err(SolveError::Inconsistent);
        }
        if pivots.len() < self.cols {
            return Err(SolveError::Singular {
                rank: pivots.len(),
                unknowns: self.cols,
            });
        }
        let mut x = ExactMatrix::zeros(self.cols, rhs.cols);
        for (r, &p) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                x[(p, j)] = red[(r, self.cols + j)].clone();
            }
        }
        Ok(x)
    }
}

fn integer_row(row: &[ExactRational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Scales to integers with gcd 1 and a positive first nonzero entry.
fn primitive_integer(v: Vec<ExactRational>) -> Vec<ExactRational> {
    let ints = integer_row(&v);
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter()
        .map(|x| ExactRational::from_integer(x * &sign / &g))
        .collect()
}

impl std::ops::Index<(usize, usize)> for ExactMatrix {
    type Output = ExactRational;
    fn index(&self, (i, j): (usize, usize)) -> &ExactRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ExactRational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}
