//! Certified counting of solutions of `R_k(t) = level` on the circle.
//!
//! A sample is trusted to lie strictly above or below the level only when it
//! is farther than `tau_amb` from it, or when its value is known exactly
//! (at `z = ±1, ±i` the polynomial is a Gaussian integer). Between two
//! consecutive trusted samples of opposite sign the intermediate value
//! theorem gives a zero; a sample computed exactly on the level is a zero by
//! itself. Each arc between consecutive trusted samples contributes
//! `max(sign change ? 1 : 0, exact zeros inside)`, and arcs are disjoint, so
//! the total is a lower bound on the number of distinct solutions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::eval::{
    eval_quarter_exact, eval_unit_circle_with_budget, modulus_squared, modulus_squared_minus,
    RealGrid,
};
use crate::sequence::{build_rs_pair_with_budget, Budget, SignSequence};
use crate::tolerance;

/// Pointwise access to the function a sample grid was taken from.
pub trait LevelOracle: Sync {
    /// `f(t) - level` in extended precision.
    fn excess(&self, t: f64, level: f64) -> f64;

    /// Exact comparison of `f(t_i)` with `level` at grid point `i` of a
    /// size-`grid_size` grid, when the value there is exactly computable.
    fn exact_cmp(&self, i: usize, grid_size: usize, level: f64) -> Option<Ordering>;
}

/// `t -> |seq(e^{it})|^2`.
#[derive(Debug, Clone, Copy)]
pub struct ModulusOracle<'a> {
    pub seq: &'a SignSequence,
}

impl LevelOracle for ModulusOracle<'_> {
    fn excess(&self, t: f64, level: f64) -> f64 {
        modulus_squared_minus(self.seq, t, level)
    }

    fn exact_cmp(&self, i: usize, grid_size: usize, level: f64) -> Option<Ordering> {
        if !(4 * i).is_multiple_of(grid_size) {
            return None;
        }
        let (re, im) = eval_quarter_exact(self.seq, 4 * i / grid_size);
        // |P|^2 <= n^2 < 2^53, exactly representable
        let value = (re * re + im * im) as f64;
        value.partial_cmp(&level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    /// Opposite trusted signs at the bracket endpoints.
    SignChange,
    /// A point at which the value equals the level exactly.
    OnLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    /// Grid cell `[t_i, t_{i+1})` holding the located angle.
    pub cell: usize,
    pub angle: f64,
    /// Bracket in grid units (`t = 2 pi x / N`); `hi` may exceed `N` when
    /// the bracket wraps past `2 pi`. Degenerate for [`CrossingKind::OnLevel`].
    pub bracket: [f64; 2],
    /// `f(angle) - level` from the pointwise oracle, when one was available.
    pub residual: Option<f64>,
    pub kind: CrossingKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossingReport {
    pub level: f64,
    pub grid_size: usize,
    pub certified_count: usize,
    pub sign_changes: usize,
    pub on_level: usize,
    /// Grid cells whose two endpoints were both inside the ambiguity band.
    pub ambiguous_cells: usize,
    /// Cells still ambiguous after subdivision; never counted.
    pub unresolved_cells: usize,
    pub refined: bool,
    pub tau_ambiguity: f64,
    pub crossings: Vec<Crossing>,
}

impl CrossingReport {
    pub fn angles(&self) -> Vec<f64> {
        self.crossings.iter().map(|c| c.angle).collect()
    }

    /// CSV with header `index,cell,angle,residual,kind`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> Result<()> {
        let mut s = String::from("index,cell,angle,residual,kind\n");
        for (i, c) in self.crossings.iter().enumerate() {
            let residual = c.residual.map(|r| format!("{r:e}")).unwrap_or_default();
            let kind = match c.kind {
                CrossingKind::SignChange => "sign_change",
                CrossingKind::OnLevel => "on_level",
            };
            s.push_str(&format!(
                "{i},{},{:.17e},{residual},{kind}\n",
                c.cell, c.angle
            ));
        }
        out.write_all(s.as_bytes())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CrossingOptions {
    pub refine: bool,
    pub tau_ambiguity: f64,
    /// Target for `|f(angle) - level|` after refinement.
    pub tau_eval: f64,
}

impl CrossingOptions {
    /// Defaults for a sequence of length `n`.
    pub fn for_length(n: usize, refine: bool) -> Self {
        CrossingOptions {
            refine,
            tau_ambiguity: tolerance::tau_ambiguity(n),
            tau_eval: tolerance::tau_eval(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Above,
    Below,
    OnLevel,
    Uncertain,
}

impl Class {
    fn trusted(self) -> bool {
        matches!(self, Class::Above | Class::Below)
    }

    fn from_excess(d: f64, tau: f64) -> Class {
        if d > tau {
            Class::Above
        } else if d < -tau {
            Class::Below
        } else {
            Class::Uncertain
        }
    }

    fn from_ordering(o: Ordering) -> Class {
        match o {
            Ordering::Greater => Class::Above,
            Ordering::Less => Class::Below,
            Ordering::Equal => Class::OnLevel,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Point {
    /// Position in grid units, unwrapped (second lap adds `N`).
    pos: f64,
    excess: f64,
    class: Class,
}

/// The sample grid plus extra points inside ambiguous cells.
struct RefinedGrid<'a> {
    samples: &'a [f64],
    level: f64,
    classes: Vec<Class>,
    extras: BTreeMap<usize, Vec<Point>>,
}

impl RefinedGrid<'_> {
    fn grid_point(&self, i: usize, lap: usize) -> Point {
        Point {
            pos: (i + lap * self.samples.len()) as f64,
            excess: self.samples[i] - self.level,
            class: self.classes[i],
        }
    }

    /// Visits grid point `i` and then the extras inside cell `i`, for
    /// `i = 0..N` twice; stops when `f` returns false.
    fn walk(&self, mut f: impl FnMut(Point) -> bool) {
        let n = self.samples.len();
        for lap in 0..2 {
            for i in 0..n {
                if !f(self.grid_point(i, lap)) {
                    return;
                }
                if let Some(extra) = self.extras.get(&i) {
                    for p in extra {
                        let mut p = *p;
                        p.pos += (lap * n) as f64;
                        if !f(p) {
                            return;
                        }
                    }
                }
            }
        }
    }
}

fn cell_of(pos: f64, n: usize) -> usize {
    (pos.floor() as usize) % n
}

fn wrap_angle(pos: f64, n: usize) -> f64 {
    let x = pos.rem_euclid(n as f64);
    TAU * x / n as f64
}

/// Counts certified solutions of `sample = level` around the circle.
///
/// `samples[i]` is the value at `t_i = 2 pi i / N`, and the grid wraps.
/// With an `oracle`, cells touching an ambiguous sample are subdivided
/// 16-fold with pointwise evaluations, samples at `z = ±1, ±i` are
/// compared exactly, and (if `refine`) every sign-change bracket is
/// bisected below `2 pi / (64 N)`.
pub fn count_level_crossings(
    samples: &RealGrid,
    level: f64,
    options: &CrossingOptions,
    oracle: Option<&dyn LevelOracle>,
) -> CrossingReport {
    let n = samples.size();
    let tau = options.tau_ambiguity;
    let classes: Vec<Class> = samples
        .values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| {
            oracle
                .and_then(|o| o.exact_cmp(i, n, level))
                .map(Class::from_ordering)
                .unwrap_or_else(|| Class::from_excess(v - level, tau))
        })
        .collect();

    let both_uncertain =
        |c: &[Class], i: usize| c[i] == Class::Uncertain && c[(i + 1) % n] == Class::Uncertain;
    let ambiguous_cells = if n == 0 {
        0
    } else {
        (0..n).filter(|&i| both_uncertain(&classes, i)).count()
    };

    let mut extras = BTreeMap::new();
    let mut unresolved_cells = ambiguous_cells;
    if let Some(oracle) = oracle {
        let cells: Vec<usize> = (0..n)
            .filter(|&i| classes[i] == Class::Uncertain || classes[(i + 1) % n] == Class::Uncertain)
            .collect();
        let subdivided: Vec<(usize, Vec<Point>)> = cells
            .par_iter()
            .map(|&i| {
                let pts = (1..tolerance::AMBIGUOUS_SUBDIVISION)
                    .map(|s| {
                        let pos = i as f64 + s as f64 / tolerance::AMBIGUOUS_SUBDIVISION as f64;
                        let excess = oracle.excess(TAU * pos / n as f64, level);
                        Point {
                            pos,
                            excess,
                            class: if excess == 0.0 {
                                Class::Uncertain
                            } else {
                                Class::from_excess(excess, tau)
                            },
                        }
                    })
                    .collect();
                (i, pts)
            })
            .collect();
        extras.extend(subdivided);
        unresolved_cells = 0;
        for i in 0..n {
            let mut prev = classes[i];
            let inner = extras.get(&i).map(Vec::as_slice).unwrap_or(&[]);
            for p in inner {
                if prev == Class::Uncertain && p.class == Class::Uncertain {
                    unresolved_cells += 1;
                }
                prev = p.class;
            }
            if prev == Class::Uncertain && classes[(i + 1) % n] == Class::Uncertain {
                unresolved_cells += 1;
            }
        }
    }

    let grid = RefinedGrid {
        samples: &samples.values,
        level,
        classes,
        extras,
    };

    // Scan arcs between consecutive trusted points, starting at the first
    // trusted point of lap 0 and closing at its copy in lap 1.
    let mut first: Option<f64> = None;
    let mut last: Option<Point> = None;
    let mut on_level_in_arc: Vec<Point> = Vec::new();
    let mut brackets: Vec<(Point, Point)> = Vec::new();
    let mut on_level_points: Vec<Point> = Vec::new();
    let mut all_on_level: Vec<Point> = Vec::new();
    grid.walk(|p| {
        if p.pos < n as f64 && p.class == Class::OnLevel {
            all_on_level.push(p);
        }
        if !p.class.trusted() {
            if p.class == Class::OnLevel && last.is_some() {
                on_level_in_arc.push(p);
            }
            return true;
        }
        match (first, last) {
            (None, _) => {
                first = Some(p.pos);
            }
            (Some(_), Some(a)) => {
                if on_level_in_arc.is_empty() {
                    if a.class != p.class {
                        brackets.push((a, p));
                    }
                } else {
                    on_level_points.append(&mut on_level_in_arc);
                }
            }
            (Some(_), None) => unreachable!(),
        }
        last = Some(p);
        // the copy of the first trusted point closes the cycle
        !matches!(first, Some(f) if p.pos >= f + n as f64)
    });
    if first.is_none() {
        on_level_points = all_on_level;
    }

    let refine = options.refine;
    let mut crossings: Vec<Crossing> = on_level_points
        .iter()
        .map(|p| Crossing {
            cell: cell_of(p.pos, n),
            angle: wrap_angle(p.pos, n),
            bracket: [p.pos % n as f64, p.pos % n as f64],
            residual: if refine {
                oracle.map(|o| o.excess(wrap_angle(p.pos, n), level))
            } else {
                None
            },
            kind: CrossingKind::OnLevel,
        })
        .collect();
    let on_level = crossings.len();

    let located: Vec<Crossing> = brackets
        .par_iter()
        .map(|&(a, b)| match (oracle, refine) {
            (Some(o), true) => bisect(o, a, b, level, n, options.tau_eval),
            _ => interpolate(a, b, n),
        })
        .collect();
    let sign_changes = located.len();
    crossings.extend(located);
    crossings.sort_by(|x, y| x.angle.total_cmp(&y.angle));

    CrossingReport {
        level,
        grid_size: n,
        certified_count: crossings.len(),
        sign_changes,
        on_level,
        ambiguous_cells,
        unresolved_cells,
        refined: refine && oracle.is_some(),
        tau_ambiguity: tau,
        crossings,
    }
}

fn normalize_bracket(lo: f64, hi: f64, n: usize) -> [f64; 2] {
    let shift = (lo / n as f64).floor() * n as f64;
    [lo - shift, hi - shift]
}

fn interpolate(a: Point, b: Point, n: usize) -> Crossing {
    let frac = a.excess / (a.excess - b.excess);
    let pos = a.pos + frac.clamp(0.0, 1.0) * (b.pos - a.pos);
    Crossing {
        cell: cell_of(pos, n),
        angle: wrap_angle(pos, n),
        bracket: normalize_bracket(a.pos, b.pos, n),
        residual: None,
        kind: CrossingKind::SignChange,
    }
}

fn bisect(
    oracle: &dyn LevelOracle,
    a: Point,
    b: Point,
    level: f64,
    n: usize,
    tau_eval: f64,
) -> Crossing {
    let target_width = 1.0 / tolerance::REFINE_FACTOR;
    let (mut lo, mut hi) = (a.pos, b.pos);
    let (mut f_lo, mut f_hi) = (a.excess, b.excess);
    let lo_above = a.class == Class::Above;
    let at = |pos: f64| oracle.excess(wrap_angle(pos, n), level);
    let mut exact = None;
    for _ in 0..200 {
        if hi - lo < target_width {
            let guess = lo + (f_lo / (f_lo - f_hi)).clamp(0.0, 1.0) * (hi - lo);
            let r = at(guess);
            if r.abs() < tau_eval {
                exact = Some((guess, r));
                break;
            }
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = at(mid);
        if f_mid == 0.0 {
            exact = Some((mid, 0.0));
            lo = mid;
            hi = mid;
            break;
        }
        if (f_mid > 0.0) == lo_above {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    let (pos, residual) = exact.unwrap_or_else(|| {
        let mid = 0.5 * (lo + hi);
        (mid, at(mid))
    });
    Crossing {
        cell: cell_of(pos, n),
        angle: wrap_angle(pos, n),
        bracket: normalize_bracket(lo, hi, n),
        residual: Some(residual),
        kind: CrossingKind::SignChange,
    }
}

/// Samples of `R(t) = |seq(e^{it})|^2` on a grid of `oversample * n` points.
fn modulus_grid(seq: &SignSequence, oversample: usize, budget: &Budget) -> Result<RealGrid> {
    if oversample == 0 || !oversample.is_power_of_two() {
        return Err(Error::domain(format!(
            "oversample must be a power of two, got {oversample}"
        )));
    }
    let size = seq
        .len()
        .checked_mul(oversample)
        .ok_or_else(|| Error::Capacity {
            what: "evaluation grid",
            requested: seq.len() as u128 * oversample as u128,
            limit: budget.max_len,
        })?;
    Ok(modulus_squared(&eval_unit_circle_with_budget(
        seq, size, budget,
    )?))
}

/// Intervals `[t_j, t_{j+1}]`, `t_j = 2 pi j / n`, that certainly contain a
/// listed zero; `oversample` grid cells make up one interval.
pub fn credited_intervals(crossings: &[Crossing], n: usize, oversample: usize) -> Vec<bool> {
    let mut hit = vec![false; n];
    let os = oversample as f64;
    for c in crossings {
        let [lo, hi] = c.bracket;
        match c.kind {
            CrossingKind::OnLevel => {
                let j = (lo / os).floor();
                let ju = j as usize % n;
                hit[ju] = true;
                if lo == j * os {
                    // on t_j itself: both closed intervals
                    hit[(ju + n - 1) % n] = true;
                }
            }
            CrossingKind::SignChange => {
                let j = (lo / os).floor();
                if hi <= (j + 1.0) * os {
                    hit[j as usize % n] = true;
                }
            }
        }
    }
    hit
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingSummary {
    pub level: f64,
    pub grid_size: usize,
    pub certified_count: usize,
    pub sign_changes: usize,
    pub on_level: usize,
    pub ambiguous_cells: usize,
    pub unresolved_cells: usize,
}

impl From<&CrossingReport> for CrossingSummary {
    fn from(r: &CrossingReport) -> Self {
        CrossingSummary {
            level: r.level,
            grid_size: r.grid_size,
            certified_count: r.certified_count,
            sign_changes: r.sign_changes,
            on_level: r.on_level,
            ambiguous_cells: r.ambiguous_cells,
            unresolved_cells: r.unresolved_cells,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem21Report {
    pub k: u32,
    pub n: usize,
    pub oversample: usize,
    pub zero_count: usize,
    pub bound_zeros: usize,
    pub interval_hits: usize,
    pub bound_intervals: usize,
    pub pass: (bool, bool),
    pub summary: CrossingSummary,
    #[serde(skip)]
    pub crossings: CrossingReport,
}

impl Theorem21Report {
    pub fn passed(&self) -> bool {
        self.pass.0 && self.pass.1
    }
}

/// Counts solutions of `R_k(t) = n` and the intervals `[t_j, t_{j+1}]`
/// holding one, against the bounds `n/4 + 1` and `n/2 + 2`.
pub fn verify_theorem_2_1(k: u32, oversample: usize) -> Result<Theorem21Report> {
    verify_theorem_2_1_with(k, oversample, false, &Budget::default())
}

pub fn verify_theorem_2_1_with(
    k: u32,
    oversample: usize,
    refine: bool,
    budget: &Budget,
) -> Result<Theorem21Report> {
    if k < 2 {
        return Err(Error::domain(format!("k must be at least 2, got {k}")));
    }
    let pair = build_rs_pair_with_budget(k, budget)?;
    let n = pair.len();
    let samples = modulus_grid(&pair.p, oversample, budget)?;
    let oracle = ModulusOracle { seq: &pair.p };
    let report = count_level_crossings(
        &samples,
        n as f64,
        &CrossingOptions::for_length(n, refine),
        Some(&oracle),
    );
    let interval_hits = credited_intervals(&report.crossings, n, oversample)
        .iter()
        .filter(|&&h| h)
        .count();
    let zero_count = report.certified_count;
    let bound_zeros = n / 4 + 1;
    let bound_intervals = n / 2 + 2;
    Ok(Theorem21Report {
        k,
        n,
        oversample,
        zero_count,
        bound_zeros,
        interval_hits,
        bound_intervals,
        pass: (zero_count >= bound_zeros, interval_hits >= bound_intervals),
        summary: CrossingSummary::from(&report),
        crossings: report,
    })
}

/// `max(0, ceil((1/2 - |eta| - epsilon) * n / 2))`, evaluated exactly on
/// the binary values of `eta` and `epsilon`.
pub fn theorem_2_2_bound(n: usize, eta: f64, epsilon: f64) -> Result<usize> {
    let to_rational = |x: f64, name: &str| {
        BigRational::from_float(x).ok_or_else(|| Error::domain(format!("{name} must be finite")))
    };
    let eta = to_rational(eta, "eta")?;
    let epsilon = to_rational(epsilon, "epsilon")?;
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let factor = half - eta.abs() - epsilon;
    let value = factor * BigRational::from_integer(BigInt::from(n)) / BigInt::from(2);
    let ceil = value.ceil().to_integer();
    if ceil <= BigInt::zero() {
        Ok(0)
    } else {
        ceil.to_usize()
            .ok_or_else(|| Error::domain("bound does not fit in usize"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem22Report {
    pub k: u32,
    pub n: usize,
    pub eta: f64,
    pub epsilon: f64,
    pub level: f64,
    /// Oversampling of the grid that produced `zero_count`.
    pub oversample: usize,
    pub zero_count: usize,
    pub bound: usize,
    pub pass: bool,
    pub summary: CrossingSummary,
    #[serde(skip)]
    pub crossings: CrossingReport,
}

/// Counts solutions of `R_k(t) = (1 + eta) n` against
/// `ceil((1/2 - |eta| - epsilon) n / 2)`; for `eta = 0` the bound is
/// `n/4 + 1`. A failing count at `oversample` is retried at 64.
pub fn verify_theorem_2_2(
    k: u32,
    eta: f64,
    epsilon: f64,
    oversample: usize,
) -> Result<Theorem22Report> {
    verify_theorem_2_2_with(k, eta, epsilon, oversample, &Budget::default())
}

pub fn verify_theorem_2_2_with(
    k: u32,
    eta: f64,
    epsilon: f64,
    oversample: usize,
    budget: &Budget,
) -> Result<Theorem22Report> {
    if !(eta.abs() < 0.5) {
        return Err(Error::domain(format!("|eta| must be below 1/2, got {eta}")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if k < 2 {
        return Err(Error::domain(format!("k must be at least 2, got {k}")));
    }
    let pair = build_rs_pair_with_budget(k, budget)?;
    let n = pair.len();
    let mut bound = theorem_2_2_bound(n, eta, epsilon)?;
    if eta == 0.0 {
        bound = bound.max(n / 4 + 1);
    }
    let level = (1.0 + eta) * n as f64;
    let oracle = ModulusOracle { seq: &pair.p };
    let options = CrossingOptions::for_length(n, false);

    let mut attempts = vec![oversample];
    if oversample < tolerance::ESCALATED_OVERSAMPLE {
        attempts.push(tolerance::ESCALATED_OVERSAMPLE);
    }
    let mut last = None;
    for os in attempts {
        let samples = modulus_grid(&pair.p, os, budget)?;
        let report = count_level_crossings(&samples, level, &options, Some(&oracle));
        let pass = report.certified_count >= bound;
        last = Some(Theorem22Report {
            k,
            n,
            eta,
            epsilon,
            level,
            oversample: os,
            zero_count: report.certified_count,
            bound,
            pass,
            summary: CrossingSummary::from(&report),
            crossings: report,
        });
        if pass {
            break;
        }
    }
    Ok(last.expect("at least one attempt"))
}

/// Largest residual of `P_k(z_j) = 2 P_{k-2}(z_j)` (even `j`) and
/// `P_k(z_j) = (-1)^{(j-1)/2} 2i Q_{k-2}(z_j)` (odd `j`) over `z_j = e^{2 pi i j / n}`.
pub fn check_lemma_3_1(k: u32) -> Result<f64> {
    check_lemma_3_1_with(k, &Budget::default())
}

pub fn check_lemma_3_1_with(k: u32, budget: &Budget) -> Result<f64> {
    if k < 2 {
        return Err(Error::domain(format!("k must be at least 2, got {k}")));
    }
    let pair = build_rs_pair_with_budget(k, budget)?;
    let inner = build_rs_pair_with_budget(k - 2, budget)?;
    let n = pair.len();
    let p = eval_unit_circle_with_budget(&pair.p, n, budget)?;
    let p2 = eval_unit_circle_with_budget(&inner.p, n, budget)?;
    let q2 = eval_unit_circle_with_budget(&inner.q, n, budget)?;
    let two_i = num_complex::Complex64::new(0.0, 2.0);
    let residual = (0..n)
        .into_par_iter()
        .map(|j| {
            let rhs = if j % 2 == 0 {
                2.0 * p2.values[j]
            } else {
                let sign = if ((j - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                sign * two_i * q2.values[j]
            };
            (p.values[j] - rhs).norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(residual)
}

/// Largest `|(R_k(t_i) - n) + (R_k(t_i + pi) - n)|` over a size-`N` grid.
pub fn check_antisymmetry(k: u32, grid_size: usize) -> Result<f64> {
    check_antisymmetry_with(k, grid_size, &Budget::default())
}

pub fn check_antisymmetry_with(k: u32, grid_size: usize, budget: &Budget) -> Result<f64> {
    let pair = build_rs_pair_with_budget(k, budget)?;
    let n = pair.len() as f64;
    if !grid_size.is_multiple_of(2) || grid_size < pair.len() {
        return Err(Error::domain(format!(
            "grid size {grid_size} must be even and at least {}",
            pair.len()
        )));
    }
    let r = modulus_squared(&eval_unit_circle_with_budget(&pair.p, grid_size, budget)?);
    let half = grid_size / 2;
    Ok((0..grid_size)
        .into_par_iter()
        .map(|i| ((r.values[i] - n) + (r.values[(i + half) % grid_size] - n)).abs())
        .reduce(|| 0.0, f64::max))
}

/// Replay of the counting argument for `R_k(t) = n` over the tuple
/// `A_j = R_{k-2}(t_j) - n/4`, `j = 0..=n`.
#[derive(Debug, Clone, Serialize)]
pub struct SignChangeReport {
    pub k: u32,
    pub n: usize,
    /// Strict sign changes of the tuple, zeros skipped.
    pub sign_changes: usize,
    pub bound_sign_changes: usize,
    /// Pairs `(j, j+1)`, `0 <= j < n`, with `A_j A_{j+1} >= 0`.
    pub qualifying_pairs: usize,
    pub bound_qualifying: usize,
    /// Qualifying intervals with a certified crossing of `R_k = n`.
    pub qualifying_with_crossing: usize,
    pub zero_entries: usize,
    pub pass: bool,
    pub tuple: Vec<f64>,
    pub qualifying: Vec<usize>,
}

pub fn verify_sign_change_argument(k: u32) -> Result<SignChangeReport> {
    verify_sign_change_argument_with(k, tolerance::DEFAULT_OVERSAMPLE, &Budget::default())
}

pub fn verify_sign_change_argument_with(
    k: u32,
    oversample: usize,
    budget: &Budget,
) -> Result<SignChangeReport> {
    if k < 2 {
        return Err(Error::domain(format!("k must be at least 2, got {k}")));
    }
    let pair = build_rs_pair_with_budget(k, budget)?;
    let inner = build_rs_pair_with_budget(k - 2, budget)?;
    let n = pair.len();
    let quarter = (n / 4) as f64;

    // A_j on the n-point grid, with signs settled exactly or in double-double
    let coarse = modulus_squared(&eval_unit_circle_with_budget(&inner.p, n, budget)?);
    let band = tolerance::tau_ambiguity(n);
    let inner_oracle = ModulusOracle { seq: &inner.p };
    let signs: Vec<i8> = (0..n)
        .into_par_iter()
        .map(|j| {
            if let Some(o) = inner_oracle.exact_cmp(j, n, quarter) {
                return o as i8;
            }
            let d = coarse.values[j] - quarter;
            if d.abs() > band {
                d.signum() as i8
            } else {
                let d = inner_oracle.excess(crate::eval::grid_angle(j, n), quarter);
                if d == 0.0 {
                    0
                } else {
                    d.signum() as i8
                }
            }
        })
        .collect();
    let mut tuple: Vec<f64> = coarse.values.iter().map(|v| v - quarter).collect();
    let mut signs_closed = signs.clone();
    for (t, &s) in tuple.iter_mut().zip(&signs) {
        if s == 0 {
            *t = 0.0;
        }
    }
    tuple.push(tuple[0]);
    signs_closed.push(signs[0]);

    let mut sign_changes = 0;
    let mut prev = 0i8;
    for &s in &signs_closed {
        if s != 0 {
            if prev != 0 && s != prev {
                sign_changes += 1;
            }
            prev = s;
        }
    }
    let qualifying: Vec<usize> = (0..n)
        .filter(|&j| signs_closed[j] * signs_closed[j + 1] >= 0)
        .collect();

    let samples = modulus_grid(&pair.p, oversample, budget)?;
    let oracle = ModulusOracle { seq: &pair.p };
    let crossings = count_level_crossings(
        &samples,
        n as f64,
        &CrossingOptions::for_length(n, false),
        Some(&oracle),
    );
    let hits = credited_intervals(&crossings.crossings, n, oversample);
    let qualifying_with_crossing = qualifying.iter().filter(|&&j| hits[j]).count();

    let bound_sign_changes = n / 2 - 2;
    let bound_qualifying = n / 2 + 2;
    let pass = sign_changes <= bound_sign_changes
        && qualifying.len() >= bound_qualifying
        && qualifying_with_crossing == qualifying.len();
    Ok(SignChangeReport {
        k,
        n,
        sign_changes,
        bound_sign_changes,
        qualifying_pairs: qualifying.len(),
        bound_qualifying,
        qualifying_with_crossing,
        zero_entries: signs.iter().filter(|&&s| s == 0).count(),
        pass,
        tuple,
        qualifying,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid_of(f: impl Fn(f64) -> f64, size: usize) -> RealGrid {
        RealGrid {
            values: (0..size).map(|i| f(TAU * i as f64 / size as f64)).collect(),
        }
    }

    /// R_2(t) = 4 + 2 cos t - 2 cos 3t
    fn r2(t: f64) -> f64 {
        4.0 + 2.0 * t.cos() - 2.0 * (3.0 * t).cos()
    }

    #[test]
    fn closed_form_k2_with_oracle() {
        let p2 = build_rs_pair_with_budget(2, &Budget::default()).unwrap().p;
        let oracle = ModulusOracle { seq: &p2 };
        let samples = grid_of(r2, 64);
        let report = count_level_crossings(
            &samples,
            4.0,
            &CrossingOptions::for_length(4, true),
            Some(&oracle),
        );
        assert_eq!(report.certified_count, 4);
        for (got, want) in report
            .angles()
            .iter()
            .zip([0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2])
        {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn closed_form_k2_without_oracle_sees_only_transversal_zeros() {
        // 0 and pi are double zeros of 8 sin^2 t cos t; only the simple
        // zeros at pi/2 and 3pi/2 change sign.
        let samples = grid_of(r2, 64);
        let report =
            count_level_crossings(&samples, 4.0, &CrossingOptions::for_length(4, false), None);
        assert_eq!(report.sign_changes, 2);
        assert_eq!(report.certified_count, 2);
    }

    #[test]
    fn constant_at_level_is_all_ambiguous() {
        let samples = RealGrid {
            values: vec![3.0; 32],
        };
        let r = count_level_crossings(&samples, 3.0, &CrossingOptions::for_length(8, false), None);
        assert_eq!(r.certified_count, 0);
        assert_eq!(r.ambiguous_cells, 32);
        assert_eq!(r.unresolved_cells, 32);
    }

    #[test]
    fn level_above_max() {
        let samples = grid_of(r2, 64);
        let r = count_level_crossings(
            &samples,
            100.0,
            &CrossingOptions::for_length(4, false),
            None,
        );
        assert_eq!(r.certified_count, 0);
        assert_eq!(r.ambiguous_cells, 0);
    }

    #[test]
    fn wraparound_crossing() {
        // sin t crosses 0 upward at t=0 and downward at pi; shift so both are mid-cell
        let samples = grid_of(|t| (t + 0.05).sin(), 16);
        let r = count_level_crossings(&samples, 0.0, &CrossingOptions::for_length(1, false), None);
        assert_eq!(r.certified_count, 2);
        let angles = r.angles();
        assert!(angles.windows(2).all(|w| w[0] < w[1]));
        assert!((angles[0] - (PI - 0.05)).abs() < 0.02);
        assert!((angles[1] - (TAU - 0.05)).abs() < 0.02);
        let s = r.crossings.iter().find(|c| c.angle > 5.0).unwrap();
        assert_eq!(s.bracket, [15.0, 16.0]);
    }

    #[test]
    fn bound_rounding() {
        assert_eq!(theorem_2_2_bound(1 << 18, 0.25, 0.05).unwrap(), 26215);
        assert_eq!(theorem_2_2_bound(1 << 18, -0.25, 0.05).unwrap(), 26215);
        assert_eq!(theorem_2_2_bound(16, 0.0, 0.5).unwrap(), 0);
        assert_eq!(theorem_2_2_bound(16, 0.25, 0.125).unwrap(), 1);
        // exactly integral: (1/2 - 1/4 - 1/8) * 64 / 2 = 4
        assert_eq!(theorem_2_2_bound(64, 0.25, 0.125).unwrap(), 4);
    }

    #[test]
    fn off_level_domain_errors() {
        assert!(matches!(
            verify_theorem_2_2(4, 0.6, 0.05, 16),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            verify_theorem_2_2(4, -0.5, 0.05, 16),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            verify_theorem_2_2(4, 0.1, 0.0, 16),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn subgrid_doubling_small() {
        assert!(check_lemma_3_1(2).unwrap() < 1e-14);
        assert!(check_lemma_3_1(3).unwrap() < 1e-13);
        assert!(check_lemma_3_1(1).is_err());
    }

    #[test]
    fn sign_change_argument_k2() {
        let r = verify_sign_change_argument(2).unwrap();
        assert_eq!(r.zero_entries, 4);
        assert!(r.tuple.iter().all(|&a| a == 0.0));
        assert_eq!(r.qualifying_pairs, 4);
        assert_eq!(r.sign_changes, 0);
        assert!(r.pass);
    }

    #[test]
    fn credits_both_sides_of_a_node() {
        let c = Crossing {
            cell: 16,
            angle: 0.0,
            bracket: [16.0, 16.0],
            residual: None,
            kind: CrossingKind::OnLevel,
        };
        assert_eq!(
            credited_intervals(&[c], 4, 16),
            vec![true, true, false, false]
        );
        let straddle = Crossing {
            cell: 15,
            angle: 0.0,
            bracket: [15.5, 16.5],
            residual: None,
            kind: CrossingKind::SignChange,
        };
        assert_eq!(credited_intervals(&[straddle], 4, 16), vec![false; 4]);
    }
}
