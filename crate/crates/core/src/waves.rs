//! Linear plane-wave analysis: dispersion relation, group velocity, the
//! velocity range spanned by plane waves, and detection of wavenumbers with
//! vanishing group velocity.

use crate::params::PhysParams;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WaveError {
    #[error("operation requires parameters on the symmetric line a = c")]
    NotOnAcLine,
}

/// Positive-branch dispersion relation, extended oddly to `k < 0`:
/// `w(k) = k (1 - a k^2)^{1/2} (1 - c k^2)^{1/2} / (1 + b k^2)`.
pub fn omega(p: &PhysParams, k: f64) -> f64 {
    let k2 = k * k;
    k * ((1.0 - p.a * k2).sqrt() * (1.0 - p.c * k2).sqrt()) / (1.0 + p.b * k2)
}

/// Plane-wave amplitude ratio `A(k)`, with the long-wave limit `A(0) = 1`.
pub fn amplitude(p: &PhysParams, k: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let k2 = k * k;
    k * (1.0 - p.a * k2) / (omega(p, k) * (1.0 + p.b * k2))
}

/// Alternative amplitude expression; equals [`amplitude`] exactly when the
/// dispersion relation holds. Exposed for self-testing.
pub fn amplitude_alt(p: &PhysParams, k: f64) -> f64 {
    if k == 0.0 {
        return 1.0;
    }
    let k2 = k * k;
    omega(p, k) * (1.0 + p.b * k2) / (k * (1.0 - p.c * k2))
}

/// One row of a dispersion table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSample {
    pub k: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub group_velocity: f64,
}

/// Evaluate all plane-wave quantities at one wavenumber.
pub fn sample(p: &PhysParams, k: f64) -> WaveSample {
    WaveSample {
        k,
        omega: omega(p, k),
        amplitude: amplitude(p, k),
        group_velocity: group_velocity(p, k),
    }
}

/// Numerator of the group velocity as a cubic in `x = k^2`:
/// `abc x^3 + 3ac x^2 - (b + 2a + 2c) x + 1`.
pub fn gv_numerator(p: &PhysParams, x: f64) -> f64 {
    ((p.a * p.b * p.c * x + 3.0 * p.a * p.c) * x - (p.b + 2.0 * p.a + 2.0 * p.c)) * x + 1.0
}

/// Signed group velocity `dw/dk` of the positive branch; even in `k` and
/// equal to 1 at `k = 0`.
pub fn group_velocity(p: &PhysParams, k: f64) -> f64 {
    let k2 = k * k;
    let denom = (1.0 + p.b * k2).powi(2) * (1.0 - p.a * k2).sqrt() * (1.0 - p.c * k2).sqrt();
    gv_numerator(p, k2) / denom
}

/// Group-velocity profile on the symmetric line written in `mu = b k^2`:
/// `P(mu) = (1 + (-1 - 3 bt) mu - bt mu^2) / (1 + mu)^2` with
/// `bt = 1/(6b) - 1` in `(-1, 0)`. Its only critical point sits at
/// `mu = 3`, where the minimum `1 - 3/(16b)` is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmuProfile {
    pub b_tilde: f64,
}

impl PmuProfile {
    pub fn new(p: &PhysParams) -> Result<Self, WaveError> {
        if !p.is_symmetric() {
            return Err(WaveError::NotOnAcLine);
        }
        Ok(PmuProfile {
            b_tilde: 1.0 / (6.0 * p.b) - 1.0,
        })
    }

    pub fn eval(&self, mu: f64) -> f64 {
        let bt = self.b_tilde;
        (1.0 + (-1.0 - 3.0 * bt) * mu - bt * mu * mu) / ((1.0 + mu) * (1.0 + mu))
    }

    /// Limit value as `mu` grows without bound.
    pub fn tail(&self) -> f64 {
        -self.b_tilde
    }
}

/// Convenience wrapper over [`PmuProfile`].
pub fn pmu(p: &PhysParams, mu: f64) -> Result<f64, WaveError> {
    Ok(PmuProfile::new(p)?.eval(mu))
}

/// Range of signed group velocities over `k >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PwRange {
    pub v_min: f64,
    pub v_max: f64,
}

/// Velocity range spanned by plane waves. On the symmetric line the closed
/// forms `v_max = 1` (at `k = 0`) and `v_min = 1 - 3/(16b)` (at `mu = 3`)
/// are returned; otherwise the range is located by a log-uniform scan in
/// `mu = b k^2` refined by golden-section search.
pub fn pw_range(p: &PhysParams) -> PwRange {
    if p.is_symmetric() {
        return PwRange {
            v_min: 1.0 - 3.0 / (16.0 * p.b),
            v_max: 1.0,
        };
    }
    let gv_of_mu = |mu: f64| group_velocity(p, (mu / p.b).sqrt());
    let n = 4000;
    let (lo, hi) = (1e-6_f64, 1e6_f64);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    let mut best_min = (0.0_f64, 1.0_f64); // (mu, value); k = 0 included
    let mut best_max = (0.0_f64, 1.0_f64);
    let tail = (p.a * p.c).sqrt() / p.b; // limit as k -> infinity
    if tail < best_min.1 {
        best_min = (hi, tail);
    }
    if tail > best_max.1 {
        best_max = (hi, tail);
    }
    let mut mus = Vec::with_capacity(n);
    for i in 0..n {
        let mu = lo * (ratio * i as f64).exp();
        mus.push(mu);
        let v = gv_of_mu(mu);
        if v < best_min.1 {
            best_min = (mu, v);
        }
        if v > best_max.1 {
            best_max = (mu, v);
        }
    }
    let refine = |mu0: f64, minimize: bool| -> f64 {
        let (mut a, mut b) = (mu0 / (ratio.exp()), mu0 * ratio.exp());
        a = a.max(0.0);
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        let f = |mu: f64| {
            let v = gv_of_mu(mu);
            if minimize {
                v
            } else {
                -v
            }
        };
        let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
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
            if (b - a).abs() < 1e-14 * (1.0 + b.abs()) {
                break;
            }
        }
        gv_of_mu(0.5 * (a + b))
    };
    if best_min.0 > 0.0 && best_min.0 < hi {
        best_min.1 = best_min.1.min(refine(best_min.0, true));
    }
    if best_max.0 > 0.0 && best_max.0 < hi {
        best_max.1 = best_max.1.max(refine(best_max.0, false));
    }
    PwRange {
        v_min: best_min.1,
        v_max: best_max.1,
    }
}

/// All `k > 0` at which the group velocity vanishes, i.e. the positive
/// square roots of positive real roots of the numerator cubic in `k^2`.
/// Roots are obtained from the discriminant casework of the cubic and
/// polished with Newton steps (falling back to the root of the derivative
/// for double roots) to 1e-12.
pub fn zero_gv_wavenumbers(p: &PhysParams) -> Vec<f64> {
    let c3 = p.a * p.b * p.c;
    let c2 = 3.0 * p.a * p.c;
    let c1 = -(p.b + 2.0 * p.a + 2.0 * p.c);
    let c0 = 1.0;
    // monic and depressed forms
    let a2 = c2 / c3;
    let a1 = c1 / c3;
    let a0 = c0 / c3;
    let pp = a1 - a2 * a2 / 3.0;
    let qq = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = -4.0 * pp * pp * pp - 27.0 * qq * qq;
    let scale = 4.0 * pp.abs().powi(3) + 27.0 * qq * qq + f64::MIN_POSITIVE;
    let shift = -a2 / 3.0;

    let mut candidates: Vec<f64> = Vec::new();
    if disc > 1e-9 * scale {
        // three distinct real roots (trigonometric form)
        let m = 2.0 * (-pp / 3.0).sqrt();
        let arg = (3.0 * qq / (pp * m)).clamp(-1.0, 1.0);
        let theta = arg.acos();
        for j in 0..3 {
            let y = m * ((theta - 2.0 * std::f64::consts::PI * j as f64) / 3.0).cos();
            candidates.push(y + shift);
        }
    } else if disc < -1e-9 * scale {
        // one real root (Cardano)
        let half_q = qq / 2.0;
        let r = (half_q * half_q + pp * pp * pp / 27.0).sqrt();
        let u = (-half_q + r).cbrt();
        let v = (-half_q - r).cbrt();
        candidates.push(u + v + shift);
    } else {
        // repeated roots
        if pp.abs() < 1e-12 {
            candidates.push(shift);
        } else {
            candidates.push(3.0 * qq / pp + shift);
            candidates.push(-1.5 * qq / pp + shift);
        }
    }

    let f = |x: f64| ((c3 * x + c2) * x + c1) * x + c0;
    let df = |x: f64| (3.0 * c3 * x + 2.0 * c2) * x + c1;
    let f_scale = |x: f64| {
        let ax = x.abs();
        c3.abs() * ax * ax * ax + c2.abs() * ax * ax + c1.abs() * ax + 1.0
    };

    let mut roots: Vec<f64> = Vec::new();
    for &x0 in &candidates {
        let mut x = x0;
        let mut ok = false;
        for _ in 0..60 {
            let fx = f(x);
            if fx.abs() <= 1e-13 * f_scale(x) {
                ok = true;
                break;
            }
            let d = df(x);
            if d.abs() < 1e-10 * (c3.abs() * x.abs() * x.abs() + c2.abs() * x.abs() + c1.abs()) {
                break;
            }
            x -= fx / d;
        }
        if !ok {
            // possible double root: land on the nearby critical point
            let dd = (c2 * c2 - 3.0 * c3 * c1).max(0.0).sqrt();
            for xc in [(-c2 + dd) / (3.0 * c3), (-c2 - dd) / (3.0 * c3)] {
                if xc.is_finite()
                    && f(xc).abs() <= 1e-9 * f_scale(xc)
                    && (xc - x0).abs() < 0.5 * (1.0 + x0.abs())
                {
                    x = xc;
                    ok = true;
                    break;
                }
            }
        }
        if ok && x > 1e-12 {
            roots.push(x.sqrt());
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-8 * (1.0 + b.abs()));
    roots
}
