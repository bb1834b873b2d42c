//! Integer partitions written as exponent vectors `k` with `sum i*k_i = n`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// `k_1, ..., k_n` for a partition of `n` with `k_i` parts equal to `i`.
/// Always padded with trailing zeros to length `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    /// Accepts any vector, trimming or padding zeros to length `weight`.
    /// Nothing nonzero can sit past the weight, so this never loses data.
    pub fn new(mut entries: Vec<u32>) -> Self {
        let weight: usize = entries.iter().enumerate().map(|(i, &k)| (i + 1) * k as usize).sum();
        entries.resize(weight, 0);
        ExponentVector(entries)
    }

    /// The single part `{0, ..., 0, 1}` of weight `n`, i.e. the key of `p_n`.
    pub fn single_part(n: usize) -> Self {
        let mut v = vec![0; n];
        if n > 0 {
            v[n - 1] = 1;
        }
        ExponentVector(v)
    }

    pub fn empty() -> Self {
        ExponentVector(Vec::new())
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.len()
    }

    /// Largest `i` with `k_i > 0`, or 0 for the empty vector.
    pub fn max_part(&self) -> usize {
        self.0.iter().rposition(|&k| k > 0).map_or(0, |i| i + 1)
    }

    /// Number of parts, `sum k_i`.
    pub fn num_parts(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `(part, multiplicity)` for each part present.
    pub fn parts(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| (i + 1, k))
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        f.write_str("}")
    }
}

/// All exponent vectors of weight `n` with parts at most `max_part`.
///
/// Ordered by largest part used, ascending; within one largest part `j` by
/// the multiplicity `k_j`, ascending; the remaining parts follow the same
/// order recursively. For `n = 4` this gives
/// `{4,0,0,0}, {2,1,0,0}, {0,2,0,0}, {1,0,1,0}, {0,0,0,1}`.
pub fn exponent_vectors(n: usize, max_part: usize) -> Vec<ExponentVector> {
    let mut out = Vec::new();
    let mut scratch = vec![0u32; n];
    fill(n, max_part.min(n), &mut scratch, &mut |v| {
        out.push(ExponentVector(v.to_vec()))
    });
    for v in &out {
        let w: usize = v.0.iter().enumerate().map(|(i, &k)| (i + 1) * k as usize).sum();
        assert_eq!(w, n);
    }
    out
}

fn fill(rest: usize, max_part: usize, scratch: &mut [u32], emit: &mut dyn FnMut(&[u32])) {
    if rest == 0 {
        emit(scratch);
        return;
    }
    for j in 1..=max_part {
        for count in 1..=rest / j {
            scratch[j - 1] = count as u32;
            let left = rest - count * j;
            if left == 0 {
                emit(scratch);
            } else if j > 1 {
                fill(left, j - 1, scratch, emit);
            }
            scratch[j - 1] = 0;
        }
    }
}

/// Memoized `P_m(n)` from `P_m(n) = P_{m-1}(n) + P_m(n-m)`.
#[derive(Default)]
pub struct PartitionCounter {
    memo: HashMap<(usize, usize), u64>,
}

impl PartitionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&mut self, n: usize, max_part: usize) -> u64 {
        if n == 0 {
            return 1;
        }
        if max_part == 0 {
            return 0;
        }
        if max_part > n {
            return self.count(n, n);
        }
        if let Some(&v) = self.memo.get(&(n, max_part)) {
            return v;
        }
        let v = self.count(n, max_part - 1) + self.count(n - max_part, max_part);
        self.memo.insert((n, max_part), v);
        v
    }
}

/// Number of partitions of `n` into parts at most `max_part`.
pub fn partition_count(n: usize, max_part: usize) -> u64 {
    PartitionCounter::new().count(n, max_part)
}

/// `E_n = sum_{m=2}^{n} P_m(n - m)`, the number of linear conditions on the
/// `C_{n,k}` coefficients.
pub fn equation_count(n: usize) -> u64 {
    let mut counter = PartitionCounter::new();
    (2..=n).map(|m| counter.count(n - m, m)).sum()
}
