//! Multi-dimensional complex transforms on row-major cubic arrays.
//!
//! Forward is the unnormalized sum with `exp(-2πi k·x/N)`; every inverse
//! carries the `1/N` factor of the axes it touches.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct FftPlan {
    d: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPlan").field("d", &self.d).field("n", &self.n).finish()
    }
}

impl FftPlan {
    pub fn new(d: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            d,
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn run_axis(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>) {
        assert!(axis < self.d, "axis {axis} out of range for d = {}", self.d);
        assert_eq!(data.len(), self.len());
        let n = self.n;
        let stride = n.pow((self.d - 1 - axis) as u32);
        if stride == 1 {
            plan.process(data);
            return;
        }
        // Gather the strided lines into a contiguous buffer, transform them
        // all in one call and scatter back.
        let block = stride * n;
        let mut lines = vec![Complex64::default(); data.len()];
        let mut line = 0;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let dst = &mut lines[line * n..(line + 1) * n];
                for (i, v) in dst.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                line += 1;
            }
        }
        plan.process(&mut lines);
        line = 0;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let src = &lines[line * n..(line + 1) * n];
                for (i, v) in src.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
                line += 1;
            }
        }
    }

    pub fn forward_axis(&self, data: &mut [Complex64], axis: usize) {
        self.run_axis(data, axis, &self.fwd);
    }

    pub fn inverse_axis(&self, data: &mut [Complex64], axis: usize) {
        self.run_axis(data, axis, &self.inv);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.d {
            self.run_axis(data, axis, &self.fwd);
        }
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.d {
            self.run_axis(data, axis, &self.inv);
        }
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_dft(d: usize, n: usize, x: &[Complex64]) -> Vec<Complex64> {
        let total = n.pow(d as u32);
        let digits = |mut i: usize| {
            let mut v = vec![0usize; d];
            for a in (0..d).rev() {
                v[a] = i % n;
                i /= n;
            }
            v
        };
        (0..total)
            .map(|k| {
                let kk = digits(k);
                let mut acc = Complex64::default();
                for (j, xv) in x.iter().enumerate() {
                    let jj = digits(j);
                    let phase: usize = kk.iter().zip(&jj).map(|(a, b)| a * b).sum();
                    let ang = -2.0 * PI * (phase % n) as f64 / n as f64;
                    acc += xv * Complex64::from_polar(1.0, ang);
                }
                acc
            })
            .collect()
    }

    #[test]
    fn matches_naive_sum_in_every_dimension() {
        for d in 1..=3 {
            let n = 4;
            let plan = FftPlan::new(d, n);
            let x: Vec<Complex64> = (0..plan.len())
                .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let mut y = x.clone();
            plan.forward(&mut y);
            let z = naive_dft(d, n, &x);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-10);
            }
            plan.inverse(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn axis_transforms_commute_and_invert() {
        let plan = FftPlan::new(3, 8);
        let x: Vec<Complex64> = (0..plan.len()).map(|i| Complex64::new(i as f64, -(i as f64).sqrt())).collect();
        let mut a = x.clone();
        plan.forward_axis(&mut a, 2);
        plan.forward_axis(&mut a, 0);
        let mut b = x.clone();
        plan.forward_axis(&mut b, 0);
        plan.forward_axis(&mut b, 2);
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() < 1e-9);
        }
        plan.inverse_axis(&mut a, 0);
        plan.inverse_axis(&mut a, 2);
        for (p, q) in a.iter().zip(&x) {
            assert!((p - q).norm() < 1e-9);
        }
    }
}
