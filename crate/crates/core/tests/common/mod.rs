#![allow(dead_code)]

//! Shared helpers for the integration suites.

use abcd_core::solver::FieldPair;
use abcd_core::spectral::Grid;

/// splitmix64-based deterministic doubles in [-1, 1).
pub struct Rng(pub u64);

impl Rng {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (0.5 * self.next_f64() + 0.5) * (hi - lo)
    }
}

/// Random band-limited periodic field built from the first `modes` harmonics.
pub fn band_limited(grid: &Grid, rng: &mut Rng, modes: usize, amp: f64) -> Vec<f64> {
    let mut out = vec![0.0; grid.n];
    for m in 1..=modes {
        let (a, b) = (rng.next_f64(), rng.next_f64());
        let k = 2.0 * std::f64::consts::PI * m as f64 / grid.length;
        for (i, &x) in grid.x.iter().enumerate() {
            out[i] += amp * (a * (k * x).cos() + b * (k * x).sin());
        }
    }
    out
}

pub fn l2_diff(grid: &Grid, a: &FieldPair, b: &FieldPair) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.n {
        acc += (a.u[i] - b.u[i]).powi(2) + (a.eta[i] - b.eta[i]).powi(2);
    }
    (acc * grid.dx).sqrt()
}

pub fn l2_norm(grid: &Grid, a: &FieldPair) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.n {
        acc += a.u[i].powi(2) + a.eta[i].powi(2);
    }
    (acc * grid.dx).sqrt()
}

/// Golden-section minimization of `f` on `[a, b]`.
pub fn golden_min(mut a: f64, mut b: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..300 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 * (1.0 + b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
