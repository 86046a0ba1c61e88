//! Evaluation on equispaced unit-circle grids and at single points.
//!
//! Grid sample `i` of a size-`N` grid sits at the angle `t_i = 2 pi i / N`.
//! Grids are computed with an unnormalized inverse FFT of the zero-padded
//! coefficient vector, so `value[i] = sum_j a_j e^{i t_i j}`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dd::{self, CDd, Dd};
use crate::error::{Error, Result};
use crate::sequence::{Budget, RsPair, SignSequence};

/// Complex samples of a polynomial on `t_i = 2 pi i / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub values: Vec<Complex64>,
}

/// Real samples (typically `|f|^2`) on `t_i = 2 pi i / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealGrid {
    pub values: Vec<f64>,
}

pub fn grid_angle(i: usize, size: usize) -> f64 {
    std::f64::consts::TAU * i as f64 / size as f64
}

impl ComplexGrid {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn angle(&self, i: usize) -> f64 {
        grid_angle(i, self.size())
    }

    /// Largest `|value[N-i] - conj(value[i])|`; zero for real coefficients.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let n = self.size();
        (1..n)
            .map(|i| (self.values[n - i] - self.values[i].conj()).norm())
            .fold(self.values[0].im.abs(), f64::max)
    }

    /// Little-endian `f64` pairs `(re, im)`, one per sample.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = Vec::with_capacity(16 * self.size());
        for v in &self.values {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// CSV with header `t,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("t,re,im\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{:e},{:e},{:e}\n", self.angle(i), v.re, v.im));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

impl RealGrid {
    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn angle(&self, i: usize) -> f64 {
        grid_angle(i, self.size())
    }

    pub fn mean(&self) -> f64 {
        neumaier_sum(self.values.iter().copied()) / self.size() as f64
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Little-endian `f64`, one per sample.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = Vec::with_capacity(8 * self.size());
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    pub fn read_binary(bytes: &[u8]) -> Result<RealGrid> {
        if !bytes.len().is_multiple_of(8) {
            return Err(Error::Format(format!(
                "binary grid length {} is not a multiple of 8",
                bytes.len()
            )));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(RealGrid { values })
    }

    /// CSV with header `t,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("t,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{:e},{:e}\n", self.angle(i), v));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

/// Compensated (Neumaier) summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn check_grid_size(len: usize, grid_size: usize, budget: &Budget) -> Result<()> {
    if !grid_size.is_power_of_two() || grid_size < len {
        return Err(Error::domain(format!(
            "grid size {grid_size} must be a power of two and at least {len}"
        )));
    }
    budget.check_len("evaluation grid", grid_size)?;
    Ok(())
}

/// Samples `sum_j seq[j] z^j` at `z = e^{2 pi i m / N}`, `m = 0..N`.
pub fn eval_unit_circle(seq: &SignSequence, grid_size: usize) -> Result<ComplexGrid> {
    eval_unit_circle_with_budget(seq, grid_size, &Budget::default())
}

pub fn eval_unit_circle_with_budget(
    seq: &SignSequence,
    grid_size: usize,
    budget: &Budget,
) -> Result<ComplexGrid> {
    eval_coeffs_with_budget(&seq.as_f64(), grid_size, budget)
}

/// Grid evaluation for arbitrary real coefficients (lowest degree first).
pub fn eval_coeffs(coeffs: &[f64], grid_size: usize) -> Result<ComplexGrid> {
    eval_coeffs_with_budget(coeffs, grid_size, &Budget::default())
}

pub fn eval_coeffs_with_budget(
    coeffs: &[f64],
    grid_size: usize,
    budget: &Budget,
) -> Result<ComplexGrid> {
    check_grid_size(coeffs.len(), grid_size, budget)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_size];
    for (dst, &c) in buf.iter_mut().zip(coeffs) {
        dst.re = c;
    }
    FftPlanner::new()
        .plan_fft_inverse(grid_size)
        .process(&mut buf);
    Ok(ComplexGrid { values: buf })
}

/// Pointwise `|value|^2`.
pub fn modulus_squared(grid: &ComplexGrid) -> RealGrid {
    RealGrid {
        values: grid
            .values
            .par_iter()
            .map(|v| v.re * v.re + v.im * v.im)
            .collect(),
    }
}

/// Grid deviations of the pair identities, all as maxima over `t_i`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IdentityDeviations {
    pub grid_size: usize,
    /// Mean of `|P_k|^2` over the grid; equals `n` once `N >= n`.
    pub parseval_mean: f64,
    /// `| |P|^2 + |Q|^2 - 2n |`.
    pub parallelogram: f64,
    /// `| |Q(-z)| - |P(z)| |`.
    pub reflection: f64,
    /// `| (R(t) - n) + (R(t + pi) - n) |`.
    pub antisymmetry: f64,
}

impl IdentityDeviations {
    pub fn max_deviation(&self) -> f64 {
        self.parallelogram
            .max(self.reflection)
            .max(self.antisymmetry)
    }
}

/// Evaluates `P_k` and `Q_k` on an even grid of size `N >= n` and measures
/// how far the pair identities are from holding.
pub fn identity_deviations(
    pair: &RsPair,
    grid_size: usize,
    budget: &Budget,
) -> Result<IdentityDeviations> {
    let n = pair.len();
    if !grid_size.is_multiple_of(2) || grid_size < n {
        return Err(Error::domain(format!(
            "grid size {grid_size} must be even and at least {n}"
        )));
    }
    let p = eval_unit_circle_with_budget(&pair.p, grid_size, budget)?;
    let q = eval_unit_circle_with_budget(&pair.q, grid_size, budget)?;
    let rp = modulus_squared(&p);
    let rq = modulus_squared(&q);
    let two_n = (2 * n) as f64;
    let half = grid_size / 2;
    let (parallelogram, reflection, antisymmetry) = (0..grid_size)
        .into_par_iter()
        .map(|i| {
            let j = (i + half) % grid_size;
            (
                (rp.values[i] + rq.values[i] - two_n).abs(),
                (q.values[j].norm() - p.values[i].norm()).abs(),
                (rp.values[i] + rp.values[j] - two_n).abs(),
            )
        })
        .reduce(
            || (0.0, 0.0, 0.0),
            |a, b| (a.0.max(b.0), a.1.max(b.1), a.2.max(b.2)),
        );
    Ok(IdentityDeviations {
        grid_size,
        parseval_mean: rp.mean(),
        parallelogram,
        reflection,
        antisymmetry,
    })
}

fn horner(seq: &SignSequence, t: f64) -> CDd {
    let z = dd::unit(t);
    let mut acc = CDd::default();
    for &c in seq.coeffs().iter().rev() {
        acc = acc.mul_add_real(z, c as f64);
    }
    acc
}

/// `sum_j seq[j] e^{i t j}` by Horner's rule in double-double arithmetic.
pub fn eval_point(seq: &SignSequence, t: f64) -> Complex64 {
    let v = horner(seq, t);
    Complex64::new(v.re.to_f64(), v.im.to_f64())
}

/// `|seq(e^{it})|^2 - level`, with the subtraction done before rounding.
pub fn modulus_squared_minus(seq: &SignSequence, t: f64, level: f64) -> f64 {
    (horner(seq, t).norm_sqr() - Dd::from_f64(level)).to_f64()
}

/// Exact value at `z = i^quarter` as a Gaussian integer `(re, im)`.
pub fn eval_quarter_exact(seq: &SignSequence, quarter: usize) -> (i64, i64) {
    let (mut re, mut im) = (0i64, 0i64);
    for (j, &c) in seq.coeffs().iter().enumerate() {
        let c = c as i64;
        match (j * quarter) % 4 {
            0 => re += c,
            1 => im += c,
            2 => re -= c,
            _ => im -= c,
        }
    }
    (re, im)
}

/// Aperiodic autocorrelation `c[m] = sum_j a_j a_{j+m}`, `m = 0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Autocorrelation {
    pub c: Vec<i64>,
}

impl Autocorrelation {
    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// Largest `|c[m]|` for `m >= 1`.
    pub fn peak_sidelobe(&self) -> i64 {
        self.c.iter().skip(1).map(|c| c.abs()).max().unwrap_or(0)
    }

    /// CSV with header `m,c_m`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("m,c_m\n");
        for (m, c) in self.c.iter().enumerate() {
            s.push_str(&format!("{m},{c}\n"));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }

    /// Samples `c[0] + 2 sum_{m>=1} c[m] cos(m t)` on a grid of size `N`.
    pub fn to_grid(&self, grid_size: usize) -> Result<RealGrid> {
        let mut weights: Vec<f64> = self.c.iter().map(|&c| 2.0 * c as f64).collect();
        weights[0] = self.c[0] as f64;
        let grid = eval_coeffs(&weights, grid_size)?;
        Ok(RealGrid {
            values: grid.values.into_iter().map(|v| v.re).collect(),
        })
    }
}

/// Lengths up to this use the direct quadratic sum.
const DIRECT_AUTOCORRELATION_MAX: usize = 2048;

/// Exact autocorrelation.
///
/// Long sequences go through `|FFT|^2` on a `2n` grid; every entry is rounded
/// to the nearest integer and the rounding residual must stay below one half,
/// otherwise the direct sum is used instead.
pub fn autocorrelation(seq: &SignSequence) -> Autocorrelation {
    let n = seq.len();
    if n <= DIRECT_AUTOCORRELATION_MAX {
        return autocorrelation_direct(seq);
    }
    match autocorrelation_fft(seq) {
        Some(a) => a,
        None => autocorrelation_direct(seq),
    }
}

pub fn autocorrelation_direct(seq: &SignSequence) -> Autocorrelation {
    let a = seq.coeffs();
    let n = a.len();
    let c = (0..n)
        .into_par_iter()
        .map(|m| {
            a[..n - m]
                .iter()
                .zip(&a[m..])
                .map(|(&x, &y)| (x as i64) * (y as i64))
                .sum()
        })
        .collect();
    Autocorrelation { c }
}

fn autocorrelation_fft(seq: &SignSequence) -> Option<Autocorrelation> {
    let n = seq.len();
    let size = 2 * n;
    let mut planner = FftPlanner::new();
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    for (dst, &c) in buf.iter_mut().zip(seq.coeffs()) {
        dst.re = c as f64;
    }
    planner.plan_fft_forward(size).process(&mut buf);
    for v in buf.iter_mut() {
        *v = Complex64::new(v.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let scale = 1.0 / size as f64;
    let mut c = Vec::with_capacity(n);
    for v in &buf[..n] {
        let x = v.re * scale;
        let r = x.round();
        if (x - r).abs() >= 0.5 - 1e-3 {
            return None;
        }
        c.push(r as i64);
    }
    (c[0] == n as i64).then_some(Autocorrelation { c })
}
