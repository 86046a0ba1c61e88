//! Value distribution, moments and Mahler measure of Rudin–Shapiro polynomials.
//!
//! The normalized values `R_k(t) / 2n` tend to the uniform law on `[0, 1]`,
//! and `P_k(e^{it}) / sqrt(2n)` to the uniform law on the unit disk. Both
//! are measured on equispaced grids. `M_q` is the rectangle rule for
//! `(1/2pi) int |P_k|^q`, which is exact for even `q = 2p` once
//! `N > p (n - 1)` because `R_k^p` is then a trigonometric polynomial of
//! degree below `N`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{
    eval_coeffs_with_budget, eval_unit_circle_with_budget, modulus_squared, neumaier_sum, RealGrid,
};
use crate::roots::find_roots;
use crate::sequence::{build_rs_pair_with_budget, Budget, SignSequence};
use crate::tolerance;

/// Bin of `x` among `bins` equal subintervals of `[0, 1]`; the right edge
/// belongs to the last bin.
pub fn unit_bin(x: f64, bins: usize) -> usize {
    ((x.max(0.0) * bins as f64) as usize).min(bins - 1)
}

const CHUNK: usize = 1 << 14;

/// Deterministic parallel compensated sum.
fn chunked_sum(xs: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let partial: Vec<f64> = xs
        .par_chunks(CHUNK)
        .map(|c| neumaier_sum(c.iter().map(|&x| f(x))))
        .collect();
    neumaier_sum(partial)
}

/// One-sample Kolmogorov–Smirnov distance of `samples` from `U(0, 1)`.
pub fn ks_uniform(samples: &[f64]) -> f64 {
    let mut xs: Vec<f64> = samples.iter().map(|x| x.clamp(0.0, 1.0)).collect();
    xs.par_sort_unstable_by(f64::total_cmp);
    let m = xs.len() as f64;
    xs.par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let below = x - i as f64 / m;
            let above = (i + 1) as f64 / m - x;
            below.max(above)
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram1D {
    pub k: u32,
    pub grid_size: usize,
    pub bins: usize,
    /// Fraction of grid angles with `R_k / 2n` in each bin.
    pub mass: Vec<f64>,
    pub ks_statistic: f64,
    pub mean: f64,
}

impl Histogram1D {
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins)
            .map(|b| b as f64 / self.bins as f64)
            .collect()
    }

    /// Total mass of bins `lo..hi`.
    pub fn mass_of_bins(&self, lo: usize, hi: usize) -> f64 {
        self.mass[lo..hi].iter().sum()
    }

    /// CSV with header `lo,hi,mass,reference`; the reference is uniform.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let e = self.edges();
        let reference = 1.0 / self.bins as f64;
        let mut s = String::from("lo,hi,mass,reference\n");
        for b in 0..self.bins {
            s.push_str(&format!(
                "{},{},{:e},{:e}\n",
                e[b],
                e[b + 1],
                self.mass[b],
                reference
            ));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

fn check_distribution_grid(n: usize, grid_size: usize) -> Result<()> {
    if grid_size < 4 * n {
        return Err(Error::domain(format!(
            "grid size {grid_size} must be at least 4n = {}",
            4 * n
        )));
    }
    Ok(())
}

/// Histogram of `R_k(t_i) / 2n` for `P_k` over a size-`N` grid.
pub fn value_distribution(k: u32, grid_size: usize, bins: usize) -> Result<Histogram1D> {
    let pair = build_rs_pair_with_budget(k, &Budget::default())?;
    value_distribution_of(&pair.p, grid_size, bins, &Budget::default())
}

pub fn value_distribution_of(
    seq: &SignSequence,
    grid_size: usize,
    bins: usize,
    budget: &Budget,
) -> Result<Histogram1D> {
    let n = seq.len();
    check_distribution_grid(n, grid_size)?;
    if bins == 0 {
        return Err(Error::domain("bins must be positive"));
    }
    let r = modulus_squared(&eval_unit_circle_with_budget(seq, grid_size, budget)?);
    let scale = 1.0 / (2 * n) as f64;
    let normalized: Vec<f64> = r.values.par_iter().map(|v| v * scale).collect();
    let mut counts = vec![0usize; bins];
    for &x in &normalized {
        counts[unit_bin(x, bins)] += 1;
    }
    let total = grid_size as f64;
    Ok(Histogram1D {
        k: seq.level(),
        grid_size,
        bins,
        mass: counts.iter().map(|&c| c as f64 / total).collect(),
        ks_statistic: ks_uniform(&normalized),
        mean: chunked_sum(&normalized, |x| x) / total,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Histogram2D {
    pub k: u32,
    pub grid_size: usize,
    /// Cells per axis over `[-1, 1]`.
    pub cells: usize,
    /// Row-major `cells x cells`; row index follows the imaginary part.
    pub mass: Vec<f64>,
    /// `2 area(cell ∩ D) / 2 pi` for each cell.
    pub reference: Vec<f64>,
    /// Mass of the annuli `|w|^2 ∈ [b/B, (b+1)/B)`, `B = radial_bins`.
    pub radial_mass: Vec<f64>,
    /// Mass in cells lying wholly outside the closed unit disk.
    pub mass_outside_disk: f64,
    pub max_cell_error: f64,
}

impl Histogram2D {
    pub fn cell_index(&self, row: usize, col: usize) -> usize {
        row * self.cells + col
    }

    /// CSV with header `x_lo,x_hi,y_lo,y_hi,mass,reference`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let h = 2.0 / self.cells as f64;
        let mut s = String::from("x_lo,x_hi,y_lo,y_hi,mass,reference\n");
        for row in 0..self.cells {
            for col in 0..self.cells {
                let i = self.cell_index(row, col);
                let (x0, y0) = (-1.0 + col as f64 * h, -1.0 + row as f64 * h);
                s.push_str(&format!(
                    "{},{},{},{},{:e},{:e}\n",
                    x0,
                    x0 + h,
                    y0,
                    y0 + h,
                    self.mass[i],
                    self.reference[i]
                ));
            }
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

const AREA_SUBSAMPLES: usize = 32;

/// `area(cell ∩ D)`, exact for cells wholly inside or outside the disk and
/// by 32 x 32 midpoint subsampling for cells the boundary crosses.
fn cell_disk_area(x0: f64, y0: f64, h: f64) -> f64 {
    let near = |a: f64, b: f64| {
        if a <= 0.0 && b >= 0.0 {
            0.0
        } else {
            a.abs().min(b.abs())
        }
    };
    let far = |a: f64, b: f64| a.abs().max(b.abs());
    let (x1, y1) = (x0 + h, y0 + h);
    let nx = near(x0, x1);
    let ny = near(y0, y1);
    if nx * nx + ny * ny >= 1.0 {
        return 0.0;
    }
    let fx = far(x0, x1);
    let fy = far(y0, y1);
    if fx * fx + fy * fy <= 1.0 {
        return h * h;
    }
    let step = h / AREA_SUBSAMPLES as f64;
    let mut inside = 0usize;
    for a in 0..AREA_SUBSAMPLES {
        let x = x0 + (a as f64 + 0.5) * step;
        for b in 0..AREA_SUBSAMPLES {
            let y = y0 + (b as f64 + 0.5) * step;
            if x * x + y * y < 1.0 {
                inside += 1;
            }
        }
    }
    inside as f64 * step * step
}

fn planar_bin(x: f64, cells: usize) -> usize {
    unit_bin(0.5 * (x + 1.0), cells)
}

/// 2D histogram of `P_k(e^{it_i}) / sqrt(2n)` over `G x G` cells.
pub fn planar_distribution(k: u32, grid_size: usize, cells: usize) -> Result<Histogram2D> {
    let pair = build_rs_pair_with_budget(k, &Budget::default())?;
    planar_distribution_of(&pair.p, grid_size, cells, cells, &Budget::default())
}

pub fn planar_distribution_of(
    seq: &SignSequence,
    grid_size: usize,
    cells: usize,
    radial_bins: usize,
    budget: &Budget,
) -> Result<Histogram2D> {
    let n = seq.len();
    check_distribution_grid(n, grid_size)?;
    if cells < 8 {
        return Err(Error::domain(format!(
            "need at least 8 cells per axis, got {cells}"
        )));
    }
    if radial_bins == 0 {
        return Err(Error::domain("radial bins must be positive"));
    }
    let grid = eval_unit_circle_with_budget(seq, grid_size, budget)?;
    let scale = 1.0 / ((2 * n) as f64).sqrt();
    let r_scale = 1.0 / (2 * n) as f64;
    let mut counts = vec![0usize; cells * cells];
    let mut radial = vec![0usize; radial_bins];
    for v in &grid.values {
        let col = planar_bin(v.re * scale, cells);
        let row = planar_bin(v.im * scale, cells);
        counts[row * cells + col] += 1;
        // same expression as modulus_squared, so annuli match the 1D histogram
        radial[unit_bin((v.re * v.re + v.im * v.im) * r_scale, radial_bins)] += 1;
    }
    let total = grid_size as f64;
    let mass: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let h = 2.0 / cells as f64;
    let mut reference = Vec::with_capacity(cells * cells);
    let mut mass_outside_disk = 0.0;
    for row in 0..cells {
        for col in 0..cells {
            let area = cell_disk_area(-1.0 + col as f64 * h, -1.0 + row as f64 * h, h);
            if area == 0.0 {
                mass_outside_disk += mass[row * cells + col];
            }
            reference.push(2.0 * area / std::f64::consts::TAU);
        }
    }
    let max_cell_error = mass
        .iter()
        .zip(&reference)
        .map(|(m, r)| (m - r).abs())
        .fold(0.0, f64::max);
    Ok(Histogram2D {
        k: seq.level(),
        grid_size,
        cells,
        mass,
        reference,
        radial_mass: radial.iter().map(|&c| c as f64 / total).collect(),
        mass_outside_disk,
        max_cell_error,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub k: u32,
    pub q: f64,
    pub estimate: f64,
    /// Grid size of the returned estimate.
    pub grid_size: usize,
    /// Even `q` on a grid fine enough for the rectangle rule to be exact.
    pub exact: bool,
    /// Successive doublings agreed to the convergence threshold.
    pub converged: bool,
    pub doublings: u32,
    /// `sqrt(2n) / (q/2 + 1)^{1/q}`.
    pub predicted: f64,
    pub ratio: f64,
}

/// `(mean |f|^q)^{1/q}` from samples of `|f|^2`.
pub fn power_mean(modulus_squared: &RealGrid, q: f64) -> f64 {
    let half = 0.5 * q;
    let integer_power = (half.fract() == 0.0 && half <= 64.0).then_some(half as i32);
    let s = match integer_power {
        Some(p) => chunked_sum(&modulus_squared.values, |r| r.powi(p)),
        None => chunked_sum(&modulus_squared.values, |r| r.powf(half)),
    };
    (s / modulus_squared.size() as f64).powf(1.0 / q)
}

pub fn predicted_moment(n: usize, q: f64) -> f64 {
    ((2 * n) as f64).sqrt() / (0.5 * q + 1.0).powf(1.0 / q)
}

fn is_even_integer(q: f64) -> bool {
    q.fract() == 0.0 && (q as i64) % 2 == 0
}

/// Doublings tried beyond the starting grid for non-even `q`.
const MAX_DOUBLINGS: u32 = 8;

/// `M_q(P_k)` on a grid of at least `N` points.
pub fn moment(k: u32, q: f64, grid_size: usize) -> Result<MomentReport> {
    let pair = build_rs_pair_with_budget(k, &Budget::default())?;
    moment_of(&pair.p, q, grid_size, &Budget::default())
}

pub fn moment_of(
    seq: &SignSequence,
    q: f64,
    grid_size: usize,
    budget: &Budget,
) -> Result<MomentReport> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::domain(format!("q must be positive, got {q}")));
    }
    let n = seq.len();
    let estimate_at = |size: usize| -> Result<f64> {
        let r = modulus_squared(&eval_unit_circle_with_budget(seq, size, budget)?);
        Ok(power_mean(&r, q))
    };
    let predicted = predicted_moment(n, q);
    let report =
        |estimate: f64, size: usize, exact: bool, converged: bool, doublings: u32| MomentReport {
            k: seq.level(),
            q,
            estimate,
            grid_size: size,
            exact,
            converged,
            doublings,
            predicted,
            ratio: estimate / predicted,
        };

    if is_even_integer(q) {
        let p = (q / 2.0) as usize;
        let degree = p.saturating_mul(n - 1);
        if grid_size > degree {
            return Ok(report(estimate_at(grid_size)?, grid_size, true, true, 0));
        }
    }
    let mut size = grid_size;
    let mut previous = estimate_at(size)?;
    for d in 1..=MAX_DOUBLINGS {
        let next_size = size * 2;
        if next_size > budget.max_len {
            break;
        }
        let current = estimate_at(next_size)?;
        size = next_size;
        if ((current - previous) / current).abs() < tolerance::MOMENT_CONVERGENCE {
            return Ok(report(current, size, false, true, d));
        }
        previous = current;
    }
    Ok(report(previous, size, false, false, MAX_DOUBLINGS))
}

#[derive(Debug, Clone, Serialize)]
pub struct MahlerReport {
    pub estimate: f64,
    pub grid_size: usize,
    pub clip: f64,
    /// Samples whose `log |f|` was clipped at `-clip`.
    pub clipped_samples: usize,
    /// Relative change when the grid is doubled.
    pub grid_sensitivity: f64,
    /// Relative change when the clip level is doubled.
    pub clip_sensitivity: f64,
    /// Either sensitivity exceeds the diagnostic threshold.
    pub flagged: bool,
}

fn log_mean(modulus_squared: &RealGrid, clip: f64) -> (f64, usize) {
    let clipped = modulus_squared
        .values
        .par_iter()
        .filter(|&&r| 0.5 * r.ln() < -clip)
        .count();
    let s = chunked_sum(&modulus_squared.values, |r| (0.5 * r.ln()).max(-clip));
    (s / modulus_squared.size() as f64, clipped)
}

/// Rectangle rule for `exp((1/2pi) int log |f(e^{it})| dt)`, with `log |f|`
/// floored at `-clip`. `coeffs` are lowest degree first.
pub fn mahler_quadrature(
    coeffs: &[f64],
    grid_size: usize,
    clip: f64,
    budget: &Budget,
) -> Result<MahlerReport> {
    if !(clip > 0.0) {
        return Err(Error::domain(format!("clip must be positive, got {clip}")));
    }
    if grid_size < 4 * coeffs.len() {
        return Err(Error::domain(format!(
            "grid size {grid_size} must be at least four times the coefficient count {}",
            coeffs.len()
        )));
    }
    let r = modulus_squared(&eval_coeffs_with_budget(coeffs, grid_size, budget)?);
    let (mean, clipped_samples) = log_mean(&r, clip);
    let estimate = mean.exp();

    let fine = modulus_squared(&eval_coeffs_with_budget(coeffs, 2 * grid_size, budget)?);
    let fine_estimate = log_mean(&fine, clip).0.exp();
    let loose_estimate = log_mean(&r, 2.0 * clip).0.exp();
    let grid_sensitivity = ((fine_estimate - estimate) / estimate).abs();
    let clip_sensitivity = ((loose_estimate - estimate) / estimate).abs();
    Ok(MahlerReport {
        estimate,
        grid_size,
        clip,
        clipped_samples,
        grid_sensitivity,
        clip_sensitivity,
        flagged: grid_sensitivity > tolerance::MAHLER_SENSITIVITY
            || clip_sensitivity > tolerance::MAHLER_SENSITIVITY,
    })
}

/// Divides `f` (integer coefficients, lowest degree first) by `z - 1`,
/// `z + 1` and `z^2 + 1` as long as they divide it exactly.
///
/// These factors have Mahler measure 1, so removing them leaves `M_0`
/// unchanged while taking the logarithmic singularities off the circle.
/// Returns the quotient and the number of roots removed.
pub fn deflate_unit_roots(coeffs: &[i64]) -> (Vec<i64>, usize) {
    let mut f = coeffs.to_vec();
    while f.len() > 1 && f[0] == 0 {
        f.remove(0);
    }
    let mut removed = 0;
    let eval_at = |f: &[i64], sign: i64| f.iter().rev().fold(0i64, |acc, &c| acc * sign + c);
    // f(i) = (c0 - c2 + c4 - ...) + i (c1 - c3 + ...)
    let at_i = |f: &[i64]| {
        let mut re = 0i64;
        let mut im = 0i64;
        for (j, &c) in f.iter().enumerate() {
            match j % 4 {
                0 => re += c,
                1 => im += c,
                2 => re -= c,
                _ => im -= c,
            }
        }
        re == 0 && im == 0
    };
    loop {
        if f.len() > 1 && eval_at(&f, 1) == 0 {
            f = divide_linear(&f, 1);
        } else if f.len() > 1 && eval_at(&f, -1) == 0 {
            f = divide_linear(&f, -1);
        } else if f.len() > 2 && at_i(&f) {
            f = divide_z2_plus_1(&f);
            removed += 1;
        } else {
            break;
        }
        removed += 1;
    }
    (f, removed)
}

/// Quotient of `f` by `z - root`, assuming exact divisibility.
fn divide_linear(f: &[i64], root: i64) -> Vec<i64> {
    let d = f.len() - 1;
    let mut q = vec![0i64; d];
    let mut carry = 0i64;
    for j in (0..d).rev() {
        carry = f[j + 1] + carry * root;
        q[j] = carry;
    }
    q
}

fn divide_z2_plus_1(f: &[i64]) -> Vec<i64> {
    let d = f.len() - 1;
    let mut rem = f.to_vec();
    let mut q = vec![0i64; d - 1];
    for j in (2..=d).rev() {
        let c = rem[j];
        q[j - 2] = c;
        rem[j] = 0;
        rem[j - 2] -= c;
    }
    q
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceMahlerReport {
    /// Roots at `±1` or `±i` divided out before the quadrature.
    pub deflated_unit_roots: usize,
    /// Grid doublings beyond the requested size.
    pub doublings: u32,
    #[serde(flatten)]
    pub quadrature: MahlerReport,
}

/// Mahler measure of a sign sequence by quadrature, after removing exact
/// roots at `±1, ±i`.
///
/// Starting from `grid_size`, the grid is doubled while the doubling
/// sensitivity exceeds [`tolerance::MAHLER_GRID_TARGET`] and the budget allows.
pub fn mahler_of(
    seq: &SignSequence,
    grid_size: usize,
    clip: f64,
    budget: &Budget,
) -> Result<SequenceMahlerReport> {
    if grid_size < 4 * seq.len() {
        return Err(Error::domain(format!(
            "grid size {grid_size} must be at least 4n = {}",
            4 * seq.len()
        )));
    }
    let ints: Vec<i64> = seq.coeffs().iter().map(|&c| c as i64).collect();
    let (deflated, removed) = deflate_unit_roots(&ints);
    let coeffs: Vec<f64> = deflated.iter().map(|&c| c as f64).collect();
    let mut size = grid_size;
    let mut doublings = 0;
    let mut quadrature = mahler_quadrature(&coeffs, size, clip, budget)?;
    while quadrature.grid_sensitivity > tolerance::MAHLER_GRID_TARGET
        && doublings < tolerance::MAHLER_MAX_DOUBLINGS
        && size.saturating_mul(4) <= budget.max_len
    {
        size *= 2;
        doublings += 1;
        quadrature = mahler_quadrature(&coeffs, size, clip, budget)?;
    }
    Ok(SequenceMahlerReport {
        deflated_unit_roots: removed,
        doublings,
        quadrature,
    })
}

/// Mahler measure of `P_k` by quadrature.
pub fn mahler_measure(k: u32, grid_size: usize, clip: f64) -> Result<SequenceMahlerReport> {
    let pair = build_rs_pair_with_budget(k, &Budget::default())?;
    mahler_of(&pair.p, grid_size, clip, &Budget::default())
}

#[derive(Debug, Clone, Serialize)]
pub struct RootProductReport {
    pub estimate: f64,
    pub degree: usize,
    pub roots_outside: usize,
    pub max_residual: f64,
    pub residual_bound: f64,
}

/// `|lead| * prod max(1, |z_j|)` over the roots of `sum coeffs[j] z^j`.
///
/// Every root must have a scaled residual (`|f(z)|`, divided by `|z|^deg`
/// outside the unit disk) below `residual_bound`.
pub fn mahler_from_roots(coeffs: &[f64], residual_bound: f64) -> Result<RootProductReport> {
    let roots = find_roots(coeffs)?;
    if roots.max_residual >= residual_bound {
        return Err(Error::RootFinding(format!(
            "residual {:e} exceeds {:e}",
            roots.max_residual, residual_bound
        )));
    }
    let lead = coeffs.last().copied().unwrap_or(0.0).abs();
    let log_product: f64 = roots.roots.iter().map(|z| z.norm().max(1.0).ln()).sum();
    Ok(RootProductReport {
        estimate: lead * log_product.exp(),
        degree: roots.roots.len(),
        roots_outside: roots.roots.iter().filter(|z| z.norm() > 1.0).count(),
        max_residual: roots.max_residual,
        residual_bound,
    })
}

/// Root-product Mahler measure of a sign sequence of length at most `2^cap`.
pub fn mahler_via_roots(seq: &SignSequence, cap: u32) -> Result<RootProductReport> {
    if seq.level() > cap {
        return Err(Error::domain(format!(
            "root product limited to length 2^{cap}, got 2^{}",
            seq.level()
        )));
    }
    let n = seq.len() as f64;
    mahler_from_roots(&seq.as_f64(), 1e-8 * n.sqrt())
}

/// Default cap for [`mahler_via_roots`].
pub const ROOT_PRODUCT_MAX_LEVEL: u32 = 8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::build_rs_pair;

    #[test]
    fn bins_cover_unit_interval() {
        assert_eq!(unit_bin(0.0, 10), 0);
        assert_eq!(unit_bin(0.95, 10), 9);
        assert_eq!(unit_bin(1.0, 10), 9);
        assert_eq!(unit_bin(-1e-17, 10), 0);
    }

    #[test]
    fn ks_of_exact_quantiles() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_uniform(&xs) - 0.005).abs() < 1e-12);
        assert!((ks_uniform(&[1.0; 10]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_basics() {
        let h = value_distribution(8, 1 << 12, 20).unwrap();
        assert!((h.mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((h.mean - 0.5).abs() < 1e-9);
        assert!((0.0..=1.0).contains(&h.ks_statistic));
        assert!((h.mass_of_bins(0, 20) - 1.0).abs() < 1e-12);
        assert!(value_distribution(8, 512, 20).is_err());
    }

    #[test]
    fn disk_reference_sums_to_one() {
        for g in [8, 16, 32] {
            let h = 2.0 / g as f64;
            let total: f64 = (0..g * g)
                .map(|c| cell_disk_area(-1.0 + (c % g) as f64 * h, -1.0 + (c / g) as f64 * h, h))
                .sum();
            assert!((total / std::f64::consts::PI - 1.0).abs() < 1e-3, "G={g}");
        }
    }

    #[test]
    fn moment_two_is_sqrt_n() {
        for k in 0..=10 {
            let m = moment(k, 2.0, 16 << k).unwrap();
            assert!(m.exact);
            let n = (1u64 << k) as f64;
            assert!((m.estimate / n.sqrt() - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn moment_domain() {
        assert!(moment(3, 0.0, 128).is_err());
        assert!(moment(3, -1.0, 128).is_err());
    }

    #[test]
    fn non_even_moment_converges() {
        let m = moment(6, 1.0, 1 << 10).unwrap();
        assert!(!m.exact);
        assert!(m.converged);
        assert!(m.estimate < 8.0);
    }

    #[test]
    fn mahler_of_simple_polynomials() {
        let b = Budget::default();
        let one = mahler_quadrature(&[1.0], 4, 40.0, &b).unwrap();
        assert!((one.estimate - 1.0).abs() < 1e-15);
        let lin = mahler_quadrature(&[-2.0, 1.0], 128, 40.0, &b).unwrap();
        assert!((lin.estimate - 2.0).abs() < 1e-12);
        assert!(!lin.flagged);
        let r = mahler_from_roots(&[-0.5, 1.0], 1e-8).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-14);
        let r = mahler_from_roots(&[6.0, -5.0, 1.0], 1e-8).unwrap();
        assert!((r.estimate - 6.0).abs() < 1e-12);
    }

    #[test]
    fn mahler_routes_agree_small() {
        let p3 = build_rs_pair(3).unwrap().p;
        let roots = mahler_via_roots(&p3, ROOT_PRODUCT_MAX_LEVEL).unwrap();
        let quad = mahler_of(&p3, 1 << 12, 40.0, &Budget::default()).unwrap();
        assert_eq!(quad.deflated_unit_roots, 1); // P_3(-1) = 0
        assert!((roots.estimate / quad.quadrature.estimate - 1.0).abs() < 1e-6);
        assert!(mahler_via_roots(&build_rs_pair(9).unwrap().p, 8).is_err());
    }

    #[test]
    fn deflation() {
        let (g, removed) = deflate_unit_roots(&[1, 1]);
        assert_eq!((g, removed), (vec![1], 1));
        let (g, removed) = deflate_unit_roots(&[1, 0, 1]);
        assert_eq!((g, removed), (vec![1], 2));
        // (z - 1)^2 (z + 3) = z^3 + z^2 - 5z + 3
        let (g, removed) = deflate_unit_roots(&[3, -5, 1, 1]);
        assert_eq!((g, removed), (vec![3, 1], 2));
        let (g, removed) = deflate_unit_roots(&[2, 1]);
        assert_eq!((g, removed), (vec![2, 1], 0));
    }

    #[test]
    fn clipping_catches_a_zero_on_the_grid() {
        // 1 + z vanishes at t = pi, which is a grid point
        let r = mahler_quadrature(&[1.0, 1.0], 64, 40.0, &Budget::default()).unwrap();
        assert_eq!(r.clipped_samples, 1);
        assert!(r.flagged);
    }
}
