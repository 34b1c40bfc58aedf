//! Pseudospectral integration of the normalized system on a periodic grid.
//!
//! The inner loop runs the rescaled form with unit smoothing operators
//! (coefficients `a/b` and `c/b`); trajectories with physical parameters are
//! obtained through the space-time dilation maps. The smoothing inverse
//! `(1 + k^2)^{-1}` keeps the system non-stiff, so a classical fourth-order
//! explicit step is used; the exact per-mode linear propagator is retained
//! as an oracle.

use crate::params::NormParams;
use crate::spectral::Grid;
use rustfft::num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite state at t = {t}; reduce dt or the data amplitude")]
    NonFiniteState { t: f64 },
}

/// Discrete `(u, eta)` pair at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub eta: Vec<f64>,
    pub t: f64,
}

impl FieldPair {
    pub fn zeros(n: usize) -> Self {
        FieldPair {
            u: vec![0.0; n],
            eta: vec![0.0; n],
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.eta).all(|v| v.is_finite())
    }
}

/// Time-stepping configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Two-thirds dealiasing of the quadratic products (default on).
    pub dealias: bool,
    /// Snapshots are stored every `stride` steps.
    pub stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt: 0.01,
            t_end: 10.0,
            dealias: true,
            stride: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, grid: &Grid) -> Result<(), SolverError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SolverError::InvalidConfig(format!("dt = {}", self.dt)));
        }
        if self.dt > 0.5 * grid.dx {
            return Err(SolverError::InvalidConfig(format!(
                "dt = {} exceeds 0.5 dx = {}",
                self.dt,
                0.5 * grid.dx
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "t_end = {}",
                self.t_end
            )));
        }
        if self.stride == 0 {
            return Err(SolverError::InvalidConfig("stride = 0".into()));
        }
        Ok(())
    }
}

fn product_spectrum(grid: &Grid, a: &[f64], b: &[f64], dealias: bool) -> Vec<Complex64> {
    let prod: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
    let mut spec = grid.fft(&prod);
    if dealias {
        grid.truncate_spectrum(&mut spec, 2.0 / 3.0);
    }
    spec
}

/// Right-hand side of the normalized system:
/// `eta_t = -(1-dxx)^{-1} dx ( at u_xx + u + u eta )`,
/// `u_t   = -(1-dxx)^{-1} dx ( ct eta_xx + eta + u^2/2 )`.
pub fn rhs(grid: &Grid, state: &FieldPair, p: &NormParams, dealias: bool) -> FieldPair {
    let n = grid.n;
    let u_spec = grid.fft(&state.u);
    let eta_spec = grid.fft(&state.eta);
    let ue_spec = product_spectrum(grid, &state.u, &state.eta, dealias);
    let uu_spec = product_spectrum(grid, &state.u, &state.u, dealias);

    let mut eta_dot = vec![Complex64::new(0.0, 0.0); n];
    let mut u_dot = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let k = grid.k[i];
        let k2 = k * k;
        // odd symbol: the Nyquist mode has no conjugate partner
        let sym = if i == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -k / (1.0 + k2))
        };
        eta_dot[i] = sym * ((1.0 - p.a_tilde * k2) * u_spec[i] + ue_spec[i]);
        u_dot[i] = sym * ((1.0 - p.c_tilde * k2) * eta_spec[i] + 0.5 * uu_spec[i]);
    }
    FieldPair {
        u: grid.ifft(&u_dot),
        eta: grid.ifft(&eta_dot),
        t: state.t,
    }
}

/// One classical fourth-order explicit step.
pub fn step_rk4(
    grid: &Grid,
    state: &FieldPair,
    p: &NormParams,
    dt: f64,
    dealias: bool,
) -> FieldPair {
    let n = grid.n;
    let add = |s: &FieldPair, k: &FieldPair, h: f64| -> FieldPair {
        let mut out = FieldPair::zeros(n);
        for i in 0..n {
            out.u[i] = s.u[i] + h * k.u[i];
            out.eta[i] = s.eta[i] + h * k.eta[i];
        }
        out.t = s.t;
        out
    };
    let k1 = rhs(grid, state, p, dealias);
    let k2 = rhs(grid, &add(state, &k1, 0.5 * dt), p, dealias);
    let k3 = rhs(grid, &add(state, &k2, 0.5 * dt), p, dealias);
    let k4 = rhs(grid, &add(state, &k3, dt), p, dealias);
    let mut out = FieldPair::zeros(n);
    for i in 0..n {
        out.u[i] = state.u[i] + dt / 6.0 * (k1.u[i] + 2.0 * k2.u[i] + 2.0 * k3.u[i] + k4.u[i]);
        out.eta[i] =
            state.eta[i] + dt / 6.0 * (k1.eta[i] + 2.0 * k2.eta[i] + 2.0 * k3.eta[i] + k4.eta[i]);
    }
    out.t = state.t + dt;
    out
}

/// Integrate and collect snapshots (the initial state, every `stride`-th
/// step, and the final state).
pub fn evolve(
    grid: &Grid,
    init: FieldPair,
    p: &NormParams,
    cfg: &SolverConfig,
) -> Result<Vec<FieldPair>, SolverError> {
    cfg.validate(grid)?;
    if !init.is_finite() {
        return Err(SolverError::NonFiniteState { t: init.t });
    }
    let steps = ((cfg.t_end - init.t) / cfg.dt).round().max(0.0) as usize;
    let mut snaps = Vec::with_capacity(steps / cfg.stride + 2);
    let mut state = init;
    snaps.push(state.clone());
    for s in 1..=steps {
        state = step_rk4(grid, &state, p, cfg.dt, cfg.dealias);
        if !state.is_finite() {
            return Err(SolverError::NonFiniteState { t: state.t });
        }
        if s % cfg.stride == 0 || s == steps {
            snaps.push(state.clone());
        }
    }
    Ok(snaps)
}

/// Exact per-mode propagation of the linearized system by time `t`:
/// each mode rotates under the 2x2 symbol, which squares to `-w(k)^2 I`.
pub fn linear_propagator(grid: &Grid, state: &FieldPair, p: &NormParams, t: f64) -> FieldPair {
    let n = grid.n;
    let u_spec = grid.fft(&state.u);
    let eta_spec = grid.fft(&state.eta);
    let mut u_out = vec![Complex64::new(0.0, 0.0); n];
    let mut eta_out = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let k = grid.k[i];
        let k2 = k * k;
        if i == n / 2 || k == 0.0 {
            u_out[i] = u_spec[i];
            eta_out[i] = eta_spec[i];
            continue;
        }
        let pu = (1.0 - p.a_tilde * k2) / (1.0 + k2);
        let qe = (1.0 - p.c_tilde * k2) / (1.0 + k2);
        let w = k.abs() * (pu * qe).sqrt();
        let (cos, sinc) = ((w * t).cos(), if w == 0.0 { t } else { (w * t).sin() / w });
        // d/dt [eta, u] = [[0, -ik pu], [-ik qe, 0]] [eta, u]
        let m01 = Complex64::new(0.0, -k * pu);
        let m10 = Complex64::new(0.0, -k * qe);
        eta_out[i] = cos * eta_spec[i] + sinc * (m01 * u_spec[i]);
        u_out[i] = cos * u_spec[i] + sinc * (m10 * eta_spec[i]);
    }
    FieldPair {
        u: grid.ifft(&u_out),
        eta: grid.ifft(&eta_out),
        t: state.t + t,
    }
}

/// Conserved energy of the normalized system:
/// `E = 1/2 int ( -at u_x^2 - ct eta_x^2 + u^2 + eta^2 + u^2 eta )`.
pub fn energy(grid: &Grid, state: &FieldPair, p: &NormParams) -> f64 {
    let ux = grid.derivative(&state.u, 1);
    let ex = grid.derivative(&state.eta, 1);
    let mut total = 0.0;
    for i in 0..grid.n {
        let (u, e) = (state.u[i], state.eta[i]);
        total += -p.a_tilde * ux[i] * ux[i] - p.c_tilde * ex[i] * ex[i] + u * u + e * e + u * u * e;
    }
    0.5 * total * grid.dx
}

/// Gaussian bump `amp * exp(-((x - center)/width)^2)`.
pub fn gaussian(grid: &Grid, amp: f64, width: f64, center: f64) -> Vec<f64> {
    grid.x
        .iter()
        .map(|&x| {
            let y = (x - center) / width;
            amp * (-y * y).exp()
        })
        .collect()
}
