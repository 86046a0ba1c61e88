//! Double-double arithmetic for the pointwise evaluator.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`,
//! giving roughly 106 bits of significand. Only the operations Horner's
//! scheme needs are provided.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct CDd {
    pub re: Dd,
    pub im: Dd,
}

impl CDd {
    pub fn new(re: Dd, im: Dd) -> Self {
        CDd { re, im }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }

    #[inline]
    pub fn mul_add_real(self, z: CDd, c: f64) -> CDd {
        // self * z + c
        let re = self.re * z.re - self.im * z.im + Dd::from_f64(c);
        let im = self.re * z.im + self.im * z.re;
        CDd { re, im }
    }
}

/// `e^{it}` with parts carried to double-double precision.
///
/// The angle is reduced to an octant by exact multiples of `pi/4` held in
/// double-double, then cosine and sine come from Taylor series in
/// double-double arithmetic.
pub(crate) fn unit(t: f64) -> CDd {
    // pi/4 to ~106 bits
    const QPI: Dd = Dd {
        hi: std::f64::consts::FRAC_PI_4,
        lo: 3.061_616_997_868_383e-17,
    };
    let q = (t / std::f64::consts::FRAC_PI_4).round();
    // q is an integer below 2^53 for any angle we reduce, so q * QPI is exact to dd.
    let r = Dd::from_f64(t) - QPI * Dd::from_f64(q);
    let (c, s) = cos_sin_small(r);
    let sqrt_half = Dd {
        hi: std::f64::consts::FRAC_1_SQRT_2,
        lo: -4.833_646_656_726_457e-17,
    };
    let octant = (q as i64).rem_euclid(8);
    // e^{i(q pi/4 + r)} = e^{i q pi/4} * (c + i s)
    let (re, im) = match octant {
        0 => (c, s),
        2 => (-s, c),
        4 => (-c, -s),
        6 => (s, -c),
        _ => {
            // odd octant: rotate (c + i s) by (±1 ± i)/sqrt 2
            let (a, b) = match octant {
                1 => (c - s, c + s),
                3 => (-(c + s), c - s),
                5 => (s - c, -(c + s)),
                _ => (c + s, s - c),
            };
            (a * sqrt_half, b * sqrt_half)
        }
    };
    CDd::new(re, im)
}

/// Taylor series for `|r| <= pi/8`; 24 terms are far past double-double precision.
fn cos_sin_small(r: Dd) -> (Dd, Dd) {
    let r2 = r * r;
    let mut cos = Dd::from_f64(1.0);
    let mut sin = r;
    let mut cterm = Dd::from_f64(1.0);
    let mut sterm = r;
    for i in 1..=14u32 {
        let c_den = ((2 * i - 1) * (2 * i)) as f64;
        let s_den = ((2 * i) * (2 * i + 1)) as f64;
        cterm = div_f64(-(cterm * r2), c_den);
        sterm = div_f64(-(sterm * r2), s_den);
        cos = cos + cterm;
        sin = sin + sterm;
    }
    (cos, sin)
}

#[inline]
fn div_f64(a: Dd, b: f64) -> Dd {
    let q1 = a.hi / b;
    let (p1, p2) = two_prod(q1, b);
    let (s, e) = two_sum(a.hi, -p1);
    let e = e + a.lo - p2;
    let q2 = (s + e) / b;
    let (hi, lo) = quick_two_sum(q1, q2);
    Dd { hi, lo }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_product_error() {
        let a = Dd::from_f64(1.0 + f64::EPSILON);
        let p = a * a;
        assert_eq!(p.hi, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(p.lo, f64::EPSILON * f64::EPSILON);
    }

    #[test]
    fn unit_circle_points() {
        for &(t, c, s) in &[
            (0.0, 1.0, 0.0),
            (std::f64::consts::FRAC_PI_2, 0.0, 1.0),
            (1.0, 1f64.cos(), 1f64.sin()),
            (-2.5, (-2.5f64).cos(), (-2.5f64).sin()),
            (6.0, 6f64.cos(), 6f64.sin()),
        ] {
            let z = unit(t);
            assert!((z.re.to_f64() - c).abs() < 1e-15, "cos {t}");
            assert!((z.im.to_f64() - s).abs() < 1e-15, "sin {t}");
            let one = z.norm_sqr();
            assert!(
                (one - Dd::from_f64(1.0)).to_f64().abs() < 1e-30,
                "|z|^2 at {t}"
            );
        }
    }
}
