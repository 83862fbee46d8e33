//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{CascadeError, Result};

pub trait Scalar: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl Scalar for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Scalar>(f: &impl Fn(f64) -> T, a: f64, b: f64) -> (T, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron = kron + s * WGK[i];
        if i % 2 == 1 {
            gauss = gauss + s * WG[i / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).magnitude())
}

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    err: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Quad {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-12, max_panels: 1_000_000 }
    }
}

impl Quad {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    /// Integrates over the consecutive intervals of `points` as one adaptive problem.
    pub fn integrate_partitioned<T: Scalar>(&self, f: impl Fn(f64) -> T, points: &[f64]) -> Result<T> {
        let mut heap = BinaryHeap::new();
        let mut total = T::default();
        let mut err = 0.0;
        for w in points.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let (v, e) = gk15(&f, w[0], w[1]);
            total = total + v;
            err += e;
            heap.push(Panel { a: w[0], b: w[1], value: v, err: e });
        }
        let start = heap.len();
        loop {
            if !(total.magnitude().is_finite() && err.is_finite()) {
                return Err(CascadeError::Quadrature("integrand produced a non-finite value".into()));
            }
            if err <= self.abs_tol.max(self.rel_tol * total.magnitude()) {
                return Ok(total);
            }
            if heap.len() >= self.max_panels.max(start + 1) {
                return Err(CascadeError::Quadrature(format!(
                    "tolerance not met after {} panels (error estimate {err:e})",
                    heap.len()
                )));
            }
            let Some(p) = heap.pop() else { return Ok(total) };
            let m = 0.5 * (p.a + p.b);
            if !(m > p.a && m < p.b) {
                // Panel too narrow to split further: accept it as is.
                heap.push(Panel { err: 0.0, ..p });
                err -= p.err;
                continue;
            }
            let (v1, e1) = gk15(&f, p.a, m);
            let (v2, e2) = gk15(&f, m, p.b);
            total = total - p.value + v1 + v2;
            err += e1 + e2 - p.err;
            heap.push(Panel { a: p.a, b: m, value: v1, err: e1 });
            heap.push(Panel { a: m, b: p.b, value: v2, err: e2 });
        }
    }

    pub fn integrate<T: Scalar>(&self, f: impl Fn(f64) -> T, a: f64, b: f64) -> Result<T> {
        if b < a {
            return Ok(self.integrate(f, b, a)? * -1.0);
        }
        self.integrate_partitioned(f, &[a, b])
    }

    /// `∫_a^∞ f` through `x = a + s/(1-s)`.
    pub fn integrate_to_infinity<T: Scalar>(&self, f: impl Fn(f64) -> T, a: f64) -> Result<T> {
        let g = |s: f64| {
            let one = 1.0 - s;
            f(a + s / one) * (1.0 / (one * one))
        };
        self.integrate_partitioned(g, &[0.0, 0.5, 0.75, 0.875, 1.0])
    }
}

/// `∫_R^∞ r^{-γ} e^{iωr} dr` for `ω > 0`, `γ > 0`, `R > 0`, by rotating the
/// contour to `r = R + iy/ω`.
pub fn oscillatory_tail(gamma: f64, omega: f64, r0: f64, quad: &Quad) -> Result<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    let inner = quad.integrate_to_infinity(
        |y| (Complex64::new(r0, y / omega)).powf(-gamma) * (-y).exp(),
        0.0,
    )?;
    Ok(i / omega * Complex64::from_polar(1.0, omega * r0) * inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_exponential() {
        let q = Quad::default();
        let v: f64 = q.integrate(|x| x.powi(5) - 2.0 * x, 0.0, 2.0).unwrap();
        assert!((v - (64.0 / 6.0 - 4.0)).abs() < 1e-12);
        let e: f64 = q.integrate_to_infinity(|x| (-x).exp(), 0.0).unwrap();
        assert!((e - 1.0).abs() < 1e-10);
        let r: f64 = q.integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0).unwrap();
        assert!((r - 2.0).abs() < 1e-9);
        let back: f64 = q.integrate(|x| x, 1.0, 0.0).unwrap();
        assert!((back + 0.5).abs() < 1e-14);
    }

    #[test]
    fn gaussian_over_real_line() {
        let q = Quad::default();
        let right: f64 = q.integrate_to_infinity(|x| (-x * x).exp(), 0.0).unwrap();
        assert!((2.0 * right - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn contour_tail_matches_closed_forms() {
        let q = Quad::with_abs_tol(1e-13);
        // γ = 1: ∫_R^∞ cos(ωr)/r dr = -Ci(ωR), ∫ sin(ωr)/r dr = π/2 - Si(ωR).
        // Compare with direct summation over periods instead.
        for (gamma, omega, r0) in [(1.0, 2.0, 3.0), (5.0 / 3.0, 0.7, 1.5), (2.5, 6.0, 0.5)] {
            let t = oscillatory_tail(gamma, omega, r0, &q).unwrap();
            let period = 2.0 * PI / omega;
            let mut pts = vec![r0];
            let end = r0 + 4000.0 * period;
            while *pts.last().unwrap() < end {
                let next = pts.last().unwrap() + period;
                pts.push(next);
            }
            let direct: Complex64 = q
                .integrate_partitioned(|r| Complex64::from_polar(r.powf(-gamma), omega * r), &pts)
                .unwrap();
            // Remaining tail beyond `end` is O(end^{-γ}/ω).
            let bound = end.powf(-gamma) / omega * 2.0;
            assert!((t - direct).norm() < bound + 1e-9, "γ = {gamma}: {t} vs {direct}");
        }
    }

    #[test]
    fn reports_failure() {
        let q = Quad { max_panels: 10, ..Quad::default() };
        assert!(q.integrate(|x: f64| (1.0 / x).sin() / x, 1e-6, 1.0).is_err());
    }
}
