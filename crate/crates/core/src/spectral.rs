//! Periodic grid and Fourier-space plumbing shared by the solver and the
//! diagnostic evaluators.
//!
//! All nonlocal operators are applied through Fourier symbols on a uniform
//! periodic grid; quadrature is the rectangle rule, which is spectrally
//! accurate for smooth periodic integrands. Odd-derivative symbols zero the
//! unmatched Nyquist mode so that real fields stay real.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid size {0} must be a power of two and at least 16")]
    BadSize(usize),
    #[error("grid length {0} must be positive")]
    BadLength(f64),
}

/// Uniform periodic grid on `[-length/2, length/2)`.
#[derive(Clone)]
pub struct Grid {
    pub n: usize,
    pub length: f64,
    pub dx: f64,
    /// Node coordinates.
    pub x: Vec<f64>,
    /// Wavenumbers in FFT bin order: `2*pi/length * [0, 1, ..., n/2, -n/2+1, ..., -1]`.
    pub k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish()
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self, GridError> {
        if n < 16 || !n.is_power_of_two() {
            return Err(GridError::BadSize(n));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(GridError::BadLength(length));
        }
        let dx = length / n as f64;
        let x: Vec<f64> = (0..n).map(|i| -0.5 * length + i as f64 * dx).collect();
        let dk = 2.0 * std::f64::consts::PI / length;
        let k: Vec<f64> = (0..n)
            .map(|i| {
                let m = if i <= n / 2 {
                    i as f64
                } else {
                    i as f64 - n as f64
                };
                m * dk
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid {
            n,
            length,
            dx,
            x,
            k,
            fwd,
            inv,
        })
    }

    /// Forward transform of a real field (unnormalized, FFT bin order).
    pub fn fft(&self, field: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(field.len(), self.n);
        let mut buf: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform back to a real field (applies the 1/n normalization).
    pub fn ifft(&self, spec: &[Complex64]) -> Vec<f64> {
        debug_assert_eq!(spec.len(), self.n);
        let mut buf = spec.to_vec();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Largest imaginary residue of the inverse transform, for reality checks.
    pub fn ifft_imag_residue(&self, spec: &[Complex64]) -> f64 {
        let mut buf = spec.to_vec();
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| (c.im * scale).abs()).fold(0.0, f64::max)
    }

    /// Multiply a spectrum by (ik)^order in place. Odd orders zero the
    /// Nyquist bin, which has no matching conjugate mode.
    pub fn apply_derivative(&self, spec: &mut [Complex64], order: u32) {
        if order == 0 {
            return;
        }
        let odd = order % 2 == 1;
        for (i, c) in spec.iter_mut().enumerate() {
            if odd && i == self.n / 2 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            let ik = Complex64::new(0.0, self.k[i]);
            *c *= ik.powu(order);
        }
    }

    /// Spectral derivative of given order of a real field.
    pub fn derivative(&self, field: &[f64], order: u32) -> Vec<f64> {
        let mut spec = self.fft(field);
        self.apply_derivative(&mut spec, order);
        self.ifft(&spec)
    }

    /// Apply `(1 - d^2/dx^2)^{-1}` spectrally: division by `1 + k^2`.
    pub fn helmholtz_inverse(&self, field: &[f64]) -> Vec<f64> {
        let mut spec = self.fft(field);
        for (i, c) in spec.iter_mut().enumerate() {
            *c /= 1.0 + self.k[i] * self.k[i];
        }
        self.ifft(&spec)
    }

    /// Apply `(1 - d^2/dx^2)` spectrally (the forward Helmholtz operator).
    pub fn helmholtz_forward(&self, field: &[f64]) -> Vec<f64> {
        let mut spec = self.fft(field);
        for (i, c) in spec.iter_mut().enumerate() {
            *c *= 1.0 + self.k[i] * self.k[i];
        }
        self.ifft(&spec)
    }

    /// Rectangle-rule integral over the period.
    pub fn integrate(&self, vals: &[f64]) -> f64 {
        vals.iter().sum::<f64>() * self.dx
    }

    /// Rectangle-rule integral of a pointwise product.
    pub fn integrate_product(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.dx
    }

    /// Zero every mode with |k| above `frac` of the Nyquist wavenumber.
    pub fn truncate_spectrum(&self, spec: &mut [Complex64], frac: f64) {
        let k_max = self.k[self.n / 2].abs() * frac;
        for (i, c) in spec.iter_mut().enumerate() {
            if self.k[i].abs() > k_max {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert_eq!(Grid::new(12, 10.0).unwrap_err(), GridError::BadSize(12));
        assert_eq!(Grid::new(8, 10.0).unwrap_err(), GridError::BadSize(8));
        assert!(Grid::new(16, 10.0).is_ok());
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        let g = Grid::new(64, 2.0 * std::f64::consts::PI).unwrap();
        let f: Vec<f64> = g.x.iter().map(|&x| (3.0 * x).sin()).collect();
        let df = g.derivative(&f, 1);
        for (i, &x) in g.x.iter().enumerate() {
            assert!((df[i] - 3.0 * (3.0 * x).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn helmholtz_inverse_then_forward_is_identity() {
        let g = Grid::new(128, 40.0).unwrap();
        let f: Vec<f64> = g.x.iter().map(|&x| (-x * x / 4.0).exp()).collect();
        let h = g.helmholtz_inverse(&f);
        let back = g.helmholtz_forward(&h);
        let err = f
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "round trip error {err}");
    }

    #[test]
    fn integrate_constant() {
        let g = Grid::new(32, 5.0).unwrap();
        let ones = vec![1.0; 32];
        assert!((g.integrate(&ones) - 5.0).abs() < 1e-13);
    }
}
