//! Simultaneous polynomial root finding (Aberth–Ehrlich iteration).

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Roots {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    /// Largest scaled residual over the returned roots, see [`scaled_residual`].
    pub max_residual: f64,
}

const MAX_ITERATIONS: usize = 1000;

/// Value and derivative at `z`; `coeffs` lowest degree first.
fn horner_with_derivative(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

pub fn eval(coeffs: &[f64], z: Complex64) -> Complex64 {
    horner_with_derivative(coeffs, z).0
}

fn eval_reversed(coeffs: &[f64], w: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter() {
        dp = dp * w + p;
        p = p * w + c;
    }
    (p, dp)
}

/// `|f(z)|` inside the closed unit disk and `|f(z)| / |z|^deg` outside it.
///
/// Outside the disk this is the reversed polynomial at `1/z`, which Horner
/// evaluates without the `|z|^deg` growth.
pub fn scaled_residual(coeffs: &[f64], z: Complex64) -> f64 {
    if z.norm() <= 1.0 {
        eval(coeffs, z).norm()
    } else {
        eval_reversed(coeffs, z.inv()).0.norm()
    }
}

fn newton_step(coeffs: &[f64], z: Complex64) -> Option<Complex64> {
    if z.norm() <= 1.0 {
        let (p, dp) = horner_with_derivative(coeffs, z);
        let step = p / dp;
        step.is_finite().then_some(z - step)
    } else {
        let w = z.inv();
        let (p, dp) = eval_reversed(coeffs, w);
        let w = w - p / dp;
        let z = w.inv();
        z.is_finite().then_some(z)
    }
}

/// All complex roots of `sum_j coeffs[j] z^j`.
///
/// The leading coefficient must be nonzero. Convergence is declared once
/// every Aberth correction is below `1e-14 (1 + |z|)`; a non-converged run
/// is an [`Error::RootFinding`].
pub fn find_roots(coeffs: &[f64]) -> Result<Roots> {
    let degree = coeffs.len().saturating_sub(1);
    if coeffs.last().is_none_or(|&c| c == 0.0) {
        return Err(Error::domain("leading coefficient must be nonzero"));
    }
    if degree == 0 {
        return Ok(Roots {
            roots: Vec::new(),
            iterations: 0,
            max_residual: 0.0,
        });
    }
    let lead = coeffs[degree].abs();
    let radius = match coeffs.iter().position(|&c| c != 0.0) {
        Some(0) => (coeffs[0].abs() / lead).powf(1.0 / degree as f64),
        _ => 1.0,
    };
    let mut z: Vec<Complex64> = (0..degree)
        .map(|j| {
            let angle = std::f64::consts::TAU * j as f64 / degree as f64 + 0.4 / degree as f64;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let (p, dp) = horner_with_derivative(coeffs, z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        if max_step < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::RootFinding(format!(
            "degree {degree}: no convergence after {MAX_ITERATIONS} sweeps"
        )));
    }
    // Newton polish, kept only while it lowers the residual
    for zi in z.iter_mut() {
        let mut residual = scaled_residual(coeffs, *zi);
        for _ in 0..3 {
            let Some(next) = newton_step(coeffs, *zi) else {
                break;
            };
            if (next - *zi).norm() > 1e-6 * (1.0 + zi.norm()) {
                break;
            }
            let r = scaled_residual(coeffs, next);
            if r >= residual {
                break;
            }
            (*zi, residual) = (next, r);
        }
    }
    let max_residual = z
        .iter()
        .map(|&r| scaled_residual(coeffs, r))
        .fold(0.0, f64::max);
    Ok(Roots {
        roots: z,
        iterations,
        max_residual,
    })
}
