//! Bessel function `J0` and the pieces of its large-argument expansion.

use std::f64::consts::PI;

use num_complex::Complex64;

const SERIES_MAX: f64 = 8.0;
const HANKEL_MIN: f64 = 25.0;

pub fn j0(x: f64) -> f64 {
    let z = x.abs();
    if z < SERIES_MAX {
        j0_series(z)
    } else if z < HANKEL_MIN {
        j0_miller(z)
    } else {
        j0_hankel(z)
    }
}

/// `1 - J0(x)` without cancellation near the origin.
pub fn one_minus_j0(x: f64) -> f64 {
    let z = x.abs();
    if z < 1.0 {
        let q = 0.25 * z * z;
        let mut term = 1.0;
        let mut sum = 0.0;
        for m in 1..30 {
            term *= -q / (m * m) as f64;
            sum -= term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 - j0(z)
    }
}

fn j0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..60 {
        term *= -q / (m * m) as f64;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized by `J0 + 2 Σ J_{2k} = 1`.
fn j0_miller(z: f64) -> f64 {
    let start = 2 * ((z as usize + 40) / 2);
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut j0 = 0.0;
    for n in (1..=start).rev() {
        let jm1 = 2.0 * n as f64 / z * j - jp1;
        jp1 = j;
        j = jm1;
        if (n - 1) % 2 == 0 && n - 1 > 0 {
            norm += 2.0 * j;
        }
        if n - 1 == 0 {
            j0 = j;
        }
        if j.abs() > 1e250 {
            jp1 *= 1e-250;
            j *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += j0;
    j0 / norm
}

/// Coefficients `a_k` of `H0(z) ~ sqrt(2/(πz)) e^{i(z-π/4)} Σ_k i^k a_k z^{-k}`.
pub fn hankel_coefficients(count: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(count);
    let mut v = 1.0;
    a.push(v);
    for k in 1..count {
        let odd = (2 * k - 1) as f64;
        v *= -odd * odd / (8.0 * k as f64);
        a.push(v);
    }
    a
}

fn j0_hankel(z: f64) -> f64 {
    let a = hankel_coefficients(80);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut ik = Complex64::new(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for (k, ak) in a.iter().enumerate() {
        let term = ik * (ak / z.powi(k as i32));
        let mag = term.norm();
        if mag > prev {
            break;
        }
        sum += term;
        if mag < 1e-17 {
            break;
        }
        prev = mag;
        ik *= Complex64::new(0.0, 1.0);
    }
    let phase = Complex64::from_polar((2.0 / (PI * z)).sqrt(), z - PI / 4.0);
    (phase * sum).re
}

/// `(1/π) ∫_0^π cos(x sin θ) dθ` by the trapezoid rule, which converges
/// geometrically for this periodic integrand.
pub fn j0_trapezoid(x: f64) -> f64 {
    let m = (2.0 * x.abs()) as usize + 64;
    let h = PI / m as f64;
    let mut s = 0.5 * (1.0 + 1.0);
    for i in 1..m {
        s += (x * (i as f64 * h).sin()).cos();
    }
    s / m as f64
}

/// `1 - sin(z)/z` without cancellation near the origin.
pub fn one_minus_sinc(z: f64) -> f64 {
    let z = z.abs();
    if z < 0.5 {
        let q = z * z;
        let mut term = 1.0;
        let mut sum = 0.0;
        for m in 1..20 {
            term *= -q / ((2 * m) * (2 * m + 1)) as f64;
            sum -= term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        1.0 - z.sin() / z
    }
}

pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_trapezoid_representation() {
        let mut x = 0.0;
        while x < 120.0 {
            let a = j0(x);
            let b = j0_trapezoid(x);
            assert!((a - b).abs() < 2e-14, "x = {x}: {a} vs {b}");
            x += 0.173;
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(j0(0.0), 1.0);
        assert!((j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j0(2.404_825_557_695_773) ).abs() < 1e-14);
        assert!((j0(10.0) + 0.245_935_764_451_348_3).abs() < 1e-14);
    }

    #[test]
    fn complements_are_accurate_near_zero() {
        for &x in &[1e-8f64, 1e-4, 0.3, 0.99, 1.0, 3.0] {
            let want = x * x / 4.0 - x.powi(4) / 64.0 + x.powi(6) / 2304.0;
            if x < 0.1 {
                assert!((one_minus_j0(x) - want).abs() < 1e-13 * want);
            }
            assert!((one_minus_j0(x) - (1.0 - j0_trapezoid(x))).abs() < 1e-14);
            let s = one_minus_sinc(x);
            assert!((s - (1.0 - x.sin() / x)).abs() < 1e-14);
            if x < 0.1 {
                assert!((s - x * x / 6.0).abs() < 1e-2 * x * x);
            }
        }
    }

    #[test]
    fn hankel_leading_terms() {
        let a = hankel_coefficients(3);
        assert_eq!(a[0], 1.0);
        assert!((a[1] + 1.0 / 8.0).abs() < 1e-16);
        assert!((a[2] - 9.0 / 128.0).abs() < 1e-16);
    }
}
