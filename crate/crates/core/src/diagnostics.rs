//! Windowed and weighted norms, localized energies, and decay reports over
//! solved trajectories.

use crate::params::NormParams;
use crate::solver::{step_rk4, FieldPair};
use crate::spectral::Grid;
use crate::traj::Trajectory;
use crate::virial::{
    eval_decomposition, eval_functionals, DiscreteWeight, ScaleLaw, VirialError, WeightProfile,
};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiagError {
    #[error("window at t = {t} does not fit inside the grid")]
    WindowOutsideGrid { t: f64 },
    #[error("trajectory too short: {0}")]
    TooShortTrajectory(String),
    #[error(transparent)]
    Virial(#[from] VirialError),
}

/// Moving window of half-width `t / ln(t)^2` centered at `v t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowSpec {
    pub v: f64,
    pub t: f64,
}

impl WindowSpec {
    pub fn new(v: f64, t: f64) -> Result<Self, DiagError> {
        if t < 2.0 {
            return Err(DiagError::TooShortTrajectory(format!(
                "window requires t >= 2, got {t}"
            )));
        }
        Ok(WindowSpec { v, t })
    }

    pub fn lambda(&self) -> f64 {
        let lt = self.t.ln();
        self.t / (lt * lt)
    }

    pub fn lambda_dot(&self) -> f64 {
        let lt = self.t.ln();
        (1.0 - 2.0 / lt) / (lt * lt)
    }

    /// The interval `(v t - lambda, v t + lambda)`.
    pub fn interval(&self) -> (f64, f64) {
        let c = self.v * self.t;
        let l = self.lambda();
        (c - l, c + l)
    }
}

fn h1_density(grid: &Grid, state: &FieldPair) -> Vec<f64> {
    let ux = grid.derivative(&state.u, 1);
    let ex = grid.derivative(&state.eta, 1);
    (0..grid.n)
        .map(|i| {
            state.u[i] * state.u[i] + ux[i] * ux[i] + state.eta[i] * state.eta[i] + ex[i] * ex[i]
        })
        .collect()
}

/// Sharp-cutoff `H1 x H1` norm over the moving window.
pub fn window_norm(grid: &Grid, state: &FieldPair, spec: &WindowSpec) -> Result<f64, DiagError> {
    let (lo, hi) = spec.interval();
    if lo < -0.5 * grid.length || hi > 0.5 * grid.length {
        return Err(DiagError::WindowOutsideGrid { t: spec.t });
    }
    let dens = h1_density(grid, state);
    let mut acc = 0.0;
    for i in 0..grid.n {
        if grid.x[i] >= lo && grid.x[i] < hi {
            acc += dens[i];
        }
    }
    Ok((acc * grid.dx).sqrt())
}

/// Weighted squared `H1 x H1` norm `int w(y) (u^2 + u_x^2 + eta^2 + eta_x^2)`
/// with `y = (x - v t)/scale`.
pub fn weighted_norm(
    grid: &Grid,
    state: &FieldPair,
    w: &DiscreteWeight,
    t: f64,
) -> Result<f64, DiagError> {
    w.check_fits(grid, t)
        .map_err(|_| DiagError::WindowOutsideGrid { t })?;
    let s = w.sample(grid, t)?;
    let dens = h1_density(grid, state);
    let mut acc = 0.0;
    for i in 0..grid.n {
        acc += s.w0[i] * dens[i];
    }
    Ok(acc * grid.dx)
}

/// Localized energy
/// `E_loc = 1/2 int psi ( -at u_x^2 - ct eta_x^2 + u^2 + eta^2 + u^2 eta )`.
pub fn local_energy(
    grid: &Grid,
    state: &FieldPair,
    np: &NormParams,
    w: &DiscreteWeight,
    t: f64,
) -> Result<f64, DiagError> {
    let s = w.sample(grid, t)?;
    let ux = grid.derivative(&state.u, 1);
    let ex = grid.derivative(&state.eta, 1);
    let mut acc = 0.0;
    for i in 0..grid.n {
        let (u, e) = (state.u[i], state.eta[i]);
        acc += s.w0[i]
            * (-np.a_tilde * ux[i] * ux[i] - np.c_tilde * ex[i] * ex[i]
                + u * u
                + e * e
                + u * u * e);
    }
    Ok(0.5 * acc * grid.dx)
}

/// One frame of a decay report.
#[derive(Debug, Clone, Serialize)]
pub enum Frame {
    /// Moving window at speed `v` with the slowly-opening scale law.
    Cone { v: f64 },
    /// Exterior frame moving at speed `sigma` with fixed width `l`.
    Exterior { sigma: f64, l: f64 },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub window_h1: f64,
    pub sech2: f64,
    pub sech4: f64,
    pub eloc: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrendStats {
    pub terminal_over_initial: f64,
    pub monotone_fraction: f64,
}

fn trend(series: &[f64]) -> TrendStats {
    if series.len() < 2 {
        return TrendStats {
            terminal_over_initial: 1.0,
            monotone_fraction: 1.0,
        };
    }
    let first = series[0];
    let last = *series.last().unwrap();
    let mut dec = 0usize;
    for w in series.windows(2) {
        if w[1] <= w[0] {
            dec += 1;
        }
    }
    TrendStats {
        terminal_over_initial: if first != 0.0 { last / first } else { 0.0 },
        monotone_fraction: dec as f64 / (series.len() - 1) as f64,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameReport {
    pub frame: Frame,
    pub series: Vec<SeriesPoint>,
    /// Trend of the sech^4-weighted norm (the strong-decay monitor).
    pub sech4_trend: TrendStats,
    pub eloc_trend: TrendStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub frames: Vec<FrameReport>,
    /// Frames whose sech^4 terminal/initial ratio exceeded the threshold
    /// although the classifier predicts decay there.
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ReportConfig {
    /// Ignore snapshots before this time (frames must also satisfy t >= 2).
    pub t_start: f64,
    /// Fixed width of the exterior frames.
    pub exterior_l: f64,
    /// Ratio above which a decay-predicted frame is flagged.
    pub ratio_threshold: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            t_start: 2.0,
            exterior_l: 5.0,
            ratio_threshold: 0.5,
        }
    }
}

/// Evaluate windowed norms, weighted norms, and localized energies on every
/// usable snapshot, per frame. Frames that would touch the periodic seam at
/// some snapshot are evaluated only on the times where they fit.
pub fn decay_report(
    traj: &Trajectory,
    velocities: &[f64],
    sigmas: &[f64],
    cfg: &ReportConfig,
) -> Result<DecayReport, DiagError> {
    let np = traj.params.normalized();
    let usable: Vec<&FieldPair> = traj
        .snapshots
        .iter()
        .filter(|s| s.t >= cfg.t_start.max(2.0))
        .collect();
    if usable.len() < 2 {
        return Err(DiagError::TooShortTrajectory(format!(
            "{} usable snapshots after t = {}",
            usable.len(),
            cfg.t_start
        )));
    }
    let mut frames: Vec<Frame> = velocities.iter().map(|&v| Frame::Cone { v }).collect();
    frames.extend(sigmas.iter().map(|&s| Frame::Exterior {
        sigma: s,
        l: cfg.exterior_l,
    }));

    let reports: Vec<FrameReport> = frames
        .into_par_iter()
        .map(|frame| {
            let mut series = Vec::new();
            for state in &usable {
                let t = state.t;
                let point = match &frame {
                    Frame::Cone { v } => {
                        let spec = WindowSpec::new(*v, t)?;
                        let w2 =
                            DiscreteWeight::new(WeightProfile::Sech2, *v, ScaleLaw::LogSquared);
                        let w4 =
                            DiscreteWeight::new(WeightProfile::Sech4, *v, ScaleLaw::LogSquared);
                        match (
                            window_norm(&traj.grid, state, &spec),
                            weighted_norm(&traj.grid, state, &w2, t),
                            weighted_norm(&traj.grid, state, &w4, t),
                            local_energy(&traj.grid, state, &np, &w4, t),
                        ) {
                            (Ok(wn), Ok(s2), Ok(s4), Ok(el)) => Some(SeriesPoint {
                                t,
                                window_h1: wn,
                                sech2: s2,
                                sech4: s4,
                                eloc: el,
                            }),
                            // frames that leave the grid are skipped, not wrapped
                            _ => None,
                        }
                    }
                    Frame::Exterior { sigma, l } => {
                        let w2 =
                            DiscreteWeight::new(WeightProfile::Sech2, *sigma, ScaleLaw::Fixed(*l));
                        let w4 =
                            DiscreteWeight::new(WeightProfile::Sech4, *sigma, ScaleLaw::Fixed(*l));
                        let wp = DiscreteWeight::new(
                            WeightProfile::HalfOnePlusTanh,
                            *sigma,
                            ScaleLaw::Fixed(*l),
                        );
                        if w2.check_fits(&traj.grid, t).is_err() {
                            None
                        } else {
                            match (
                                weighted_norm(&traj.grid, state, &w2, t),
                                weighted_norm(&traj.grid, state, &w4, t),
                                local_energy(&traj.grid, state, &np, &wp, t),
                            ) {
                                (Ok(s2), Ok(s4), Ok(el)) => Some(SeriesPoint {
                                    t,
                                    window_h1: 0.0,
                                    sech2: s2,
                                    sech4: s4,
                                    eloc: el,
                                }),
                                _ => None,
                            }
                        }
                    }
                };
                if let Some(pt) = point {
                    series.push(pt);
                }
            }
            if series.len() < 2 {
                return Err(DiagError::TooShortTrajectory(format!(
                    "frame {frame:?} fits on {} snapshots",
                    series.len()
                )));
            }
            let sech4: Vec<f64> = series.iter().map(|p| p.sech4).collect();
            let eloc: Vec<f64> = series.iter().map(|p| p.eloc).collect();
            Ok(FrameReport {
                frame,
                sech4_trend: trend(&sech4),
                eloc_trend: trend(&eloc),
                series,
            })
        })
        .collect::<Result<_, DiagError>>()?;

    let scenario = crate::regions::classify(&traj.params, None)
        .map_err(|e| DiagError::TooShortTrajectory(format!("unclassifiable parameters: {e}")))?;
    let mut flags = Vec::new();
    for rep in &reports {
        if let Frame::Cone { v } = rep.frame {
            let predicted = match scenario.v_max {
                Some(vm) => v.abs() < vm,
                None => v == 0.0 && scenario.refined,
            };
            if predicted && rep.sech4_trend.terminal_over_initial > cfg.ratio_threshold {
                flags.push(format!(
                    "cone frame v = {v}: ratio {:.3} above threshold {:.3}",
                    rep.sech4_trend.terminal_over_initial, cfg.ratio_threshold
                ));
            }
        }
    }
    Ok(DecayReport {
        frames: reports,
        flags,
    })
}

/// One sample of the decomposition residual along a trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    pub dh_dt_fd: f64,
    pub q: f64,
    pub sq: f64,
    pub nq: f64,
    pub vh: f64,
    pub residual: f64,
}

/// Centered finite difference of `H` against the decomposition, at every
/// usable snapshot. The probe step is `1e-3` times the solver step, taken
/// by re-integrating from the snapshot in both directions.
pub fn virial_residual(
    traj: &Trajectory,
    alpha: f64,
    weight: &DiscreteWeight,
) -> Result<Vec<ResidualSample>, DiagError> {
    let np = traj.params.normalized();
    let h = 1e-3 * traj.solver_dt;
    let usable: Vec<&FieldPair> = traj
        .snapshots
        .iter()
        .filter(|s| match weight.scale {
            // the backward probe at t - h must stay where the scale law is
            // defined
            ScaleLaw::LogSquared => s.t - h >= 2.0,
            ScaleLaw::Fixed(_) => true,
        })
        .collect();
    if usable.len() < 3 {
        return Err(DiagError::TooShortTrajectory(format!(
            "{} usable snapshots",
            usable.len()
        )));
    }
    let out: Vec<ResidualSample> = usable
        .par_iter()
        .map(|state| -> Result<ResidualSample, DiagError> {
            let fwd = step_rk4(&traj.grid, state, &np, h, traj.dealias);
            let bwd = step_rk4(&traj.grid, state, &np, -h, traj.dealias);
            let h_fwd = eval_functionals(&traj.grid, &fwd, weight, alpha)?.h;
            let h_bwd = eval_functionals(&traj.grid, &bwd, weight, alpha)?.h;
            let dh_dt_fd = (h_fwd - h_bwd) / (2.0 * h);
            let d = eval_decomposition(&traj.grid, state, &np, weight, alpha)?;
            Ok(ResidualSample {
                t: state.t,
                dh_dt_fd,
                q: d.q,
                sq: d.sq,
                nq: d.nq,
                vh: d.vh,
                residual: dh_dt_fd - d.total(),
            })
        })
        .collect::<Result<_, DiagError>>()?;
    Ok(out)
}
