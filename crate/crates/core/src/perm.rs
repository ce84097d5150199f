//! Permutations in one-line notation and their mixed-radix encoding.
//!
//! A permutation `σ` on `{0, …, n-1}` is stored as its one-line list
//! `(σ(0), …, σ(n-1))`. Its radix code is the array `C[1..n]` where `C[i]`
//! counts the values smaller than `i` that appear to the left of `i` in the
//! 1-indexed list `(σ(1), …, σ(n))`. Codes are ordered by their value read as
//! a mixed-radix number with `C[n]` as the least significant digit, which
//! gives the canonical enumeration `σ_1, σ_2, …, σ_{n!}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection on `{0, …, n-1}` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(format!("{map:?}")));
            }
            seen[v] = true;
        }
        Ok(Self { map })
    }

    /// Builds a permutation from a 1-indexed one-line list such as `[2, 4, 1, 6, 3, 5]`.
    pub fn from_one_line(list: &[usize]) -> Result<Self> {
        if list.contains(&0) {
            return Err(Error::InvalidPermutation(format!("{list:?}")));
        }
        Self::new(list.iter().map(|&v| v - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    /// The 1-indexed one-line list `(σ(1), …, σ(n))`.
    pub fn one_line(&self) -> Vec<usize> {
        self.map.iter().map(|v| v + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Self { map: inv }
    }

    /// `self ∘ other`, i.e. `i ↦ self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { map: other.map.iter().map(|&i| self.map[i]).collect() }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.one_line().iter().map(|v| v.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Mixed-radix digits `C[1..n]`, stored 0-indexed so that `digits[i] <= i`.
///
/// `C[1]` is always zero and is kept to match the n-slot register layout.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RadixCode {
    digits: Vec<usize>,
}

impl RadixCode {
    pub fn new(digits: Vec<usize>) -> Result<Self> {
        for (i, &d) in digits.iter().enumerate() {
            if d > i {
                return Err(Error::InvalidDigit { position: i + 1, digit: d });
            }
        }
        Ok(Self { digits })
    }

    pub fn zero(n: usize) -> Self {
        Self { digits: vec![0; n] }
    }

    /// The last code in radix order, `C[i] = i - 1`.
    pub fn max(n: usize) -> Self {
        Self { digits: (0..n).collect() }
    }

    /// Parses a digit string such as `"002143"`.
    pub fn parse(text: &str) -> Result<Self> {
        let digits = text
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as usize)
                    .ok_or_else(|| Error::Parse(format!("bad radix digit {c:?} in {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(digits)
    }

    /// Inverse of [`radix_index`]: the code of `σ_index` for `1 <= index <= n!`.
    pub fn from_index(index: u64, n: usize) -> Result<Self> {
        let total = factorial(n);
        if index == 0 || index > total {
            return Err(Error::InvalidArgument(format!("radix index {index} outside [1, {total}]")));
        }
        let mut rest = index - 1;
        let mut digits = vec![0; n];
        for i in (0..n).rev() {
            let radix = (i + 1) as u64;
            digits[i] = (rest % radix) as usize;
            rest /= radix;
        }
        Ok(Self { digits })
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// `C[i]` with the 1-indexed convention.
    pub fn digit(&self, i: usize) -> usize {
        self.digits[i - 1]
    }
}

impl fmt::Display for RadixCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Counts, for every value, the smaller values to its left in the one-line list.
pub fn radix_encode(sigma: &Permutation) -> RadixCode {
    let list = sigma.as_slice();
    let n = list.len();
    let mut digits = vec![0; n];
    for (pos, &v) in list.iter().enumerate() {
        digits[v] = list[..pos].iter().filter(|&&u| u < v).count();
    }
    RadixCode { digits }
}

/// Rebuilds the permutation by inserting `1, 2, …, n` in turn, value `i` at slot `C[i]`.
pub fn radix_decode(code: &RadixCode) -> Permutation {
    let mut list: Vec<usize> = Vec::with_capacity(code.len());
    for (v, &c) in code.digits.iter().enumerate() {
        list.insert(c, v);
    }
    Permutation { map: list }
}

/// Rank of the code in mixed-radix order; the all-zero code has rank 1.
pub fn radix_index(code: &RadixCode) -> u64 {
    code.digits
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &d)| acc * (i as u64 + 1) + d as u64)
        + 1
}

/// Adjacent swaps of one `P_i` block for digit value `j`, in application order.
///
/// The block is `S_{j+1,j+2} S_{j+2,j+3} … S_{i-1,i}` (1-indexed system
/// labels), so `S_{i-1,i}` acts first. Each returned pair is the 0-indexed
/// positions `(l, l+1)` being exchanged. Digit values `j >= i-1`, including
/// the unreachable padding levels of the register, select the identity.
pub fn hall_block_swaps(i: usize, j: usize) -> Vec<(usize, usize)> {
    if i < 2 || j + 1 >= i {
        return Vec::new();
    }
    // 1-indexed l runs i-1 down to j+1; 0-indexed pair is (l-1, l).
    (j + 1..i).rev().map(|l| (l - 1, l)).collect()
}

/// Lists after each of `P_2, …, P_n` acting on `(1, …, n)` (0-indexed values).
///
/// The first entry is the initial identity list, so the trace has `n` entries
/// for `n >= 1`.
pub fn hall_trace(code: &RadixCode) -> Vec<Vec<usize>> {
    let n = code.len();
    let mut list: Vec<usize> = (0..n).collect();
    let mut trace = vec![list.clone()];
    for i in 2..=n {
        for (a, b) in hall_block_swaps(i, code.digit(i)) {
            list.swap(a, b);
        }
        trace.push(list.clone());
    }
    trace
}

/// Classical analogue of the controlled `P_2 … P_n` cascade.
pub fn hall_apply(code: &RadixCode) -> Permutation {
    let trace = hall_trace(code);
    Permutation { map: trace.into_iter().last().unwrap_or_default() }
}

/// Iterates over all codes of length `n` in radix order.
pub fn all_codes(n: usize) -> impl Iterator<Item = RadixCode> {
    let total = factorial(n);
    (1..=total).map(move |idx| RadixCode::from_index(idx, n).expect("index in range"))
}
