//! Rudin–Shapiro coefficient sequences.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};

/// Upper bound on the number of elements a sequence or grid may hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_len: usize,
}

impl Budget {
    pub const DEFAULT_MAX_LEN: usize = 1 << 26;

    pub fn new(max_len: usize) -> Self {
        Budget { max_len }
    }

    /// Checks that `2^log2` elements fit and returns the count.
    pub fn check_pow2(&self, what: &'static str, log2: u32) -> Result<usize> {
        let requested = 1u128.checked_shl(log2).unwrap_or(u128::MAX);
        if log2 >= usize::BITS || requested > self.max_len as u128 {
            return Err(Error::Capacity {
                what,
                requested,
                limit: self.max_len,
            });
        }
        Ok(1usize << log2)
    }

    pub fn check_len(&self, what: &'static str, len: usize) -> Result<usize> {
        if len > self.max_len {
            return Err(Error::Capacity {
                what,
                requested: len as u128,
                limit: self.max_len,
            });
        }
        Ok(len)
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Self::DEFAULT_MAX_LEN)
    }
}

/// A coefficient vector with entries in `{-1, +1}` and length `2^level`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignSequence {
    coeffs: Vec<i8>,
    level: u32,
}

impl SignSequence {
    /// Validates `coeffs` as a sign sequence of power-of-two length.
    pub fn new(coeffs: Vec<i8>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::domain(format!(
                "sign sequence length must be a power of two, got {n}"
            )));
        }
        if let Some(pos) = coeffs.iter().position(|&c| c != 1 && c != -1) {
            return Err(Error::domain(format!(
                "coefficient {pos} is {}, expected -1 or +1",
                coeffs[pos]
            )));
        }
        Ok(SignSequence {
            level: n.trailing_zeros(),
            coeffs,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[i8] {
        &self.coeffs
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|&c| c as f64).collect()
    }

    /// Sum of coefficients, the value at `z = 1`.
    pub fn sum(&self) -> i64 {
        self.coeffs.iter().map(|&c| c as i64).sum()
    }

    pub fn sum_of_squares(&self) -> u64 {
        self.coeffs
            .iter()
            .map(|&c| (c as i64 * c as i64) as u64)
            .sum()
    }

    /// Coefficients of `f(-z)`.
    pub fn alternated(&self) -> SignSequence {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| if j % 2 == 0 { c } else { -c })
            .collect();
        SignSequence {
            coeffs,
            level: self.level,
        }
    }

    /// Coefficients of the reciprocal `z^{n-1} f(1/z)`.
    pub fn reversed(&self) -> SignSequence {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        SignSequence {
            coeffs,
            level: self.level,
        }
    }

    /// One `+1`/`-1` per line.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = String::with_capacity(3 * self.len());
        for &c in &self.coeffs {
            buf.push_str(if c > 0 { "+1\n" } else { "-1\n" });
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut coeffs = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let tok = line.trim();
            if tok.is_empty() {
                continue;
            }
            let c = match tok {
                "+1" | "1" => 1,
                "-1" | "\u{2212}1" => -1,
                other => {
                    return Err(Error::Format(format!(
                        "line {}: expected +1 or -1, got {other:?}",
                        lineno + 1
                    )))
                }
            };
            coeffs.push(c);
        }
        SignSequence::new(coeffs)
    }

    /// Packed bitset: bit `j % 8` (least significant first) of byte `j / 8`
    /// is 1 exactly when coefficient `j` is `+1`. The final byte is padded
    /// with zero bits.
    pub fn to_bitset(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.len().div_ceil(8)];
        for (j, &c) in self.coeffs.iter().enumerate() {
            if c > 0 {
                bytes[j / 8] |= 1 << (j % 8);
            }
        }
        bytes
    }

    pub fn from_bitset(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::Format(format!(
                "bitset of {} bytes cannot hold exactly {len} coefficients",
                bytes.len()
            )));
        }
        let coeffs = (0..len)
            .map(|j| {
                if bytes[j / 8] >> (j % 8) & 1 == 1 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        SignSequence::new(coeffs)
    }
}

/// The Rudin–Shapiro pair `(P_k, Q_k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsPair {
    pub p: SignSequence,
    pub q: SignSequence,
}

impl RsPair {
    pub fn level(&self) -> u32 {
        self.p.level
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Builds `(P_k, Q_k)` with the default [`Budget`].
pub fn build_rs_pair(k: u32) -> Result<RsPair> {
    build_rs_pair_with_budget(k, &Budget::default())
}

/// Builds `(P_k, Q_k)` by iterated doubling from `P_0 = Q_0 = 1`.
///
/// Each step writes `P_{j+1} = [P_j, Q_j]` and `Q_{j+1} = [P_j, -Q_j]`,
/// which is the recursion `P_j(z) ± z^{2^j} Q_j(z)` at the coefficient level.
pub fn build_rs_pair_with_budget(k: u32, budget: &Budget) -> Result<RsPair> {
    let n = budget.check_pow2("Rudin-Shapiro sequence", k)?;
    let mut p: Vec<i8> = Vec::with_capacity(n);
    let mut q: Vec<i8> = Vec::with_capacity(n);
    p.push(1);
    q.push(1);
    for _ in 0..k {
        let tail = std::mem::replace(&mut q, Vec::with_capacity(n));
        q.extend_from_slice(&p);
        q.extend(tail.iter().map(|&c| -c));
        p.extend_from_slice(&tail);
    }
    Ok(RsPair {
        p: SignSequence {
            coeffs: p,
            level: k,
        },
        q: SignSequence {
            coeffs: q,
            level: k,
        },
    })
}

/// The `j`-th Golay–Rudin–Shapiro sign: `(-1)` raised to the number of
/// (possibly overlapping) occurrences of `11` in the binary expansion of `j`.
pub fn grs_coefficient(j: u64) -> i8 {
    if (j & (j >> 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sign `s` with `Q_k(-z) = s * z^{n-1} P_k(1/z)` coefficient-wise, if any.
///
/// Only the modulus identity `|Q_k(-z)| = |P_k(z)|` is asserted elsewhere;
/// this records which overall sign the coefficient-level identity carries.
pub fn reflection_sign(pair: &RsPair) -> Option<i8> {
    let lhs = pair.q.alternated();
    let rhs = pair.p.reversed();
    if lhs.coeffs == rhs.coeffs {
        Some(1)
    } else if lhs.coeffs.iter().zip(&rhs.coeffs).all(|(a, b)| *a == -*b) {
        Some(-1)
    } else {
        None
    }
}

/// Max over the grid `t_i = 2 pi i / N` of `| |Q_k(-z)| - |P_k(z)| |`.
pub fn check_eq_1_2(k: u32, grid_size: usize) -> Result<f64> {
    check_reflection_modulus(k, grid_size, &Budget::default())
}

/// See [`check_eq_1_2`]. `-z` at `t_i` is the grid point `i + N/2`.
pub fn check_reflection_modulus(k: u32, grid_size: usize, budget: &Budget) -> Result<f64> {
    let pair = build_rs_pair_with_budget(k, budget)?;
    if !grid_size.is_multiple_of(2) || grid_size < pair.len() {
        return Err(Error::domain(format!(
            "grid size {grid_size} must be even and at least {}",
            pair.len()
        )));
    }
    let p = crate::eval::eval_unit_circle_with_budget(&pair.p, grid_size, budget)?;
    let q = crate::eval::eval_unit_circle_with_budget(&pair.q, grid_size, budget)?;
    let half = grid_size / 2;
    let dev = (0..grid_size)
        .map(|i| (q.values[(i + half) % grid_size].norm() - p.values[i].norm()).abs())
        .fold(0.0, f64::max);
    Ok(dev)
}

/// Renders a sequence as a compact `+`/`-` string, handy in test failures.
pub fn sign_string(seq: &SignSequence) -> String {
    let mut s = String::with_capacity(seq.len());
    for &c in seq.coeffs() {
        let _ = write!(s, "{}", if c > 0 { '+' } else { '-' });
    }
    s
}

/// Coefficient-level summary emitted by the `build` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct BuildSummary {
    pub k: u32,
    pub n: usize,
    pub p_sum: i64,
    pub q_sum: i64,
    pub p_sum_of_squares: u64,
    pub q_sum_of_squares: u64,
    pub halves_consistent: bool,
    pub matches_closed_form: bool,
    pub reflection_sign: Option<i8>,
}

pub fn summarize(pair: &RsPair) -> BuildSummary {
    let n = pair.len();
    let half = n / 2;
    let halves_consistent = n == 1
        || (pair.p.coeffs[..half] == pair.q.coeffs[..half]
            && pair.p.coeffs[half..]
                .iter()
                .zip(&pair.q.coeffs[half..])
                .all(|(a, b)| *a == -*b));
    let matches_closed_form = pair
        .p
        .coeffs
        .iter()
        .enumerate()
        .all(|(j, &c)| c == grs_coefficient(j as u64));
    BuildSummary {
        k: pair.level(),
        n,
        p_sum: pair.p.sum(),
        q_sum: pair.q.sum(),
        p_sum_of_squares: pair.p.sum_of_squares(),
        q_sum_of_squares: pair.q.sum_of_squares(),
        halves_consistent,
        matches_closed_form,
        reflection_sign: reflection_sign(pair),
    }
}
