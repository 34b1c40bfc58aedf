//! Weighted virial functionals: coefficient families, positivity
//! certificates, and discrete evaluation of the functionals and their
//! time-derivative decomposition on periodic fields.
//!
//! All coefficient formulas are evaluated in the normalized variables
//! `(a/b, c/b)`; the nonlocal operator `(1 - dxx)^{-1}` is applied
//! spectrally, so the integration-by-parts identities behind the
//! decomposition hold to rounding on the periodic grid.

use crate::params::{to_nu_b, NormParams, PhysParams};
use crate::solver::{rhs, FieldPair};
use crate::spectral::Grid;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum VirialError {
    #[error("epsilon = {0} must lie strictly inside (0, {1})")]
    EpsOutOfRange(f64, f64),
    #[error("weight at t = {t} comes within ten scale lengths of the periodic seam")]
    WeightTouchesBoundary { t: f64 },
    #[error("time-dependent scale undefined at t = {0}; need t >= 2")]
    ScaleUndefined(f64),
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

/// Closed-form weight profiles with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightProfile {
    Tanh,
    Sech2,
    Sech4,
    HalfOnePlusTanh,
    HalfOneMinusTanh,
}

impl WeightProfile {
    pub fn eval(&self, y: f64) -> f64 {
        let (s, t) = (1.0 / y.cosh(), y.tanh());
        match self {
            WeightProfile::Tanh => t,
            WeightProfile::Sech2 => s * s,
            WeightProfile::Sech4 => s * s * s * s,
            WeightProfile::HalfOnePlusTanh => 0.5 * (1.0 + t),
            WeightProfile::HalfOneMinusTanh => 0.5 * (1.0 - t),
        }
    }

    pub fn d1(&self, y: f64) -> f64 {
        let (s, t) = (1.0 / y.cosh(), y.tanh());
        let s2 = s * s;
        match self {
            WeightProfile::Tanh => s2,
            WeightProfile::Sech2 => -2.0 * s2 * t,
            WeightProfile::Sech4 => -4.0 * s2 * s2 * t,
            WeightProfile::HalfOnePlusTanh => 0.5 * s2,
            WeightProfile::HalfOneMinusTanh => -0.5 * s2,
        }
    }

    pub fn d2(&self, y: f64) -> f64 {
        let (s, t) = (1.0 / y.cosh(), y.tanh());
        let s2 = s * s;
        match self {
            WeightProfile::Tanh => -2.0 * s2 * t,
            WeightProfile::Sech2 => 4.0 * s2 * t * t - 2.0 * s2 * s2,
            WeightProfile::Sech4 => 16.0 * s2 * s2 * t * t - 4.0 * s2 * s2 * s2,
            WeightProfile::HalfOnePlusTanh => -s2 * t,
            WeightProfile::HalfOneMinusTanh => s2 * t,
        }
    }

    pub fn d3(&self, y: f64) -> f64 {
        let (s, t) = (1.0 / y.cosh(), y.tanh());
        let s2 = s * s;
        let s4 = s2 * s2;
        match self {
            WeightProfile::Tanh => 4.0 * s2 * t * t - 2.0 * s4,
            WeightProfile::Sech2 => -8.0 * s2 * t * t * t + 16.0 * s4 * t,
            WeightProfile::Sech4 => -64.0 * s4 * t * t * t + 56.0 * s4 * s2 * t,
            WeightProfile::HalfOnePlusTanh => 2.0 * s2 * t * t - s4,
            WeightProfile::HalfOneMinusTanh => -2.0 * s2 * t * t + s4,
        }
    }
}

/// Scale of a moving weight: fixed width or the slowly-opening law
/// `lambda(t) = t / ln(t)^2` (defined for `t >= 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ScaleLaw {
    Fixed(f64),
    LogSquared,
}

impl ScaleLaw {
    pub fn lambda(&self, t: f64) -> Result<f64, VirialError> {
        match *self {
            ScaleLaw::Fixed(l) => Ok(l),
            ScaleLaw::LogSquared => {
                if t < 2.0 {
                    return Err(VirialError::ScaleUndefined(t));
                }
                let lt = t.ln();
                Ok(t / (lt * lt))
            }
        }
    }

    pub fn lambda_dot(&self, t: f64) -> Result<f64, VirialError> {
        match *self {
            ScaleLaw::Fixed(_) => Ok(0.0),
            ScaleLaw::LogSquared => {
                if t < 2.0 {
                    return Err(VirialError::ScaleUndefined(t));
                }
                let lt = t.ln();
                Ok((1.0 - 2.0 / lt) / (lt * lt))
            }
        }
    }
}

/// Moving, scaled weight `profile((x - v t)/lambda(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteWeight {
    pub profile: WeightProfile,
    pub v: f64,
    pub scale: ScaleLaw,
}

/// Profile and derivative samples along the grid at one instant.
pub struct WeightSamples {
    pub y: Vec<f64>,
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub w3: Vec<f64>,
    pub lambda: f64,
    pub lambda_dot: f64,
}

impl DiscreteWeight {
    pub fn new(profile: WeightProfile, v: f64, scale: ScaleLaw) -> Self {
        DiscreteWeight { profile, v, scale }
    }

    pub fn center(&self, t: f64) -> f64 {
        self.v * t
    }

    /// The weight must stay at least ten scale lengths from the seam.
    pub fn check_fits(&self, grid: &Grid, t: f64) -> Result<(), VirialError> {
        let lambda = self.scale.lambda(t)?;
        if self.center(t).abs() + 10.0 * lambda > 0.5 * grid.length {
            return Err(VirialError::WeightTouchesBoundary { t });
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid, t: f64) -> Result<WeightSamples, VirialError> {
        let lambda = self.scale.lambda(t)?;
        let lambda_dot = self.scale.lambda_dot(t)?;
        let ctr = self.center(t);
        let n = grid.n;
        let mut y = Vec::with_capacity(n);
        let (mut w0, mut w1, mut w2, mut w3) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for &x in &grid.x {
            let yy = (x - ctr) / lambda;
            y.push(yy);
            w0.push(self.profile.eval(yy));
            w1.push(self.profile.d1(yy));
            w2.push(self.profile.d2(yy));
            w3.push(self.profile.d3(yy));
        }
        Ok(WeightSamples {
            y,
            w0,
            w1,
            w2,
            w3,
            lambda,
            lambda_dot,
        })
    }
}

// ---------------------------------------------------------------------------
// coefficient families
// ---------------------------------------------------------------------------

/// Coefficients of the leading quadratic form in canonical variables,
/// together with the third-derivative block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirialCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub d11: f64,
    pub d12: f64,
    pub d21: f64,
    pub d22: f64,
    pub alpha: f64,
}

pub fn quad_coeffs_norm(np: &NormParams, alpha: f64) -> VirialCoeffs {
    let (at, ct) = (np.a_tilde, np.c_tilde);
    VirialCoeffs {
        a1: 0.5,
        a2: -alpha - 1.5 * at,
        a3: -(1.0 - at) * alpha - 2.0 * at - 0.5,
        a4: -at * (0.5 - alpha),
        b1: 0.5,
        b2: alpha - 1.5 * ct,
        b3: (1.0 - ct) * alpha - 2.0 * ct - 0.5,
        b4: -ct * (0.5 + alpha),
        d11: 0.5 * (1.0 + at) * (alpha + 1.0) - 0.5,
        d12: -at * (alpha - 0.5),
        d21: 0.5 * (1.0 + ct) * (1.0 - alpha) - 0.5,
        d22: ct * (alpha + 0.5),
        alpha,
    }
}

pub fn quad_coeffs(p: &PhysParams, alpha: f64) -> VirialCoeffs {
    quad_coeffs_norm(&p.normalized(), alpha)
}

/// Residual coefficients after peeling a `v0+` multiple of the reference
/// block `(1/2, 3/2, 3/2, 1/2)` off the leading form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarCoeffs {
    pub a1s: f64,
    pub a2s: f64,
    pub a3s: f64,
    pub a4s: f64,
    pub b1s: f64,
    pub b2s: f64,
    pub b3s: f64,
    pub b4s: f64,
    pub v0_plus: f64,
    pub alpha: f64,
}

pub fn star_coeffs(p: &PhysParams, alpha: f64, v0: f64) -> StarCoeffs {
    let nb = to_nu_b(p);
    let (nu, b) = (nb.nu, nb.b);
    let v0_plus = 0.5 * (1.0 + v0);
    let rem = 1.0 - v0_plus;
    let t = 3.0 * nu - 2.0;
    StarCoeffs {
        a1s: 0.5 * rem,
        a2s: 1.5 * rem + t / (4.0 * b) - alpha,
        a3s: 1.5 * rem + t / (3.0 * b) - (2.0 + t / (6.0 * b)) * alpha,
        a4s: 0.5 * rem + t / (12.0 * b) - (1.0 + t / (6.0 * b)) * alpha,
        b1s: 0.5 * rem,
        b2s: 1.5 * rem - 3.0 * nu / (4.0 * b) + alpha,
        b3s: 1.5 * rem - nu / b + (2.0 - nu / (2.0 * b)) * alpha,
        b4s: 0.5 * rem - nu / (4.0 * b) + (1.0 - nu / (2.0 * b)) * alpha,
        v0_plus,
        alpha,
    }
}

// ---------------------------------------------------------------------------
// sum-of-squares certificate
// ---------------------------------------------------------------------------

/// `p(r) = (((1-r)^2 + 5)/2)^2 + 5r - 9 = r (r^3 - 4r^2 + 16r - 4)/4`.
pub fn epsilon_poly(r: f64) -> f64 {
    let q = 0.5 * ((1.0 - r) * (1.0 - r) + 5.0);
    q * q + 5.0 * r - 9.0
}

/// The unique positive root of `p`, in closed form.
pub fn epsilon_max() -> f64 {
    let base = 2.0 * 571.0_f64.sqrt() / (3.0 * 3.0_f64.sqrt()) - 170.0 / 27.0;
    let t = base.cbrt();
    t - 32.0 / (9.0 * t) + 4.0 / 3.0
}

/// Witness of nonnegativity of the quadratic form
/// `int c0 w^2 + c1 w_x^2 + c2 w_xx^2 + c3 w_xxx^2` as a perfect square
/// `int (ah w + bh w_x + ch w_xx + dh w_xxx)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SosWitness {
    pub a_hat: f64,
    pub b_hat: f64,
    pub c_hat: f64,
    pub d_hat: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub eps: f64,
    pub delta: f64,
}

impl SosWitness {
    /// Largest residual of the expansion identities
    /// `ah^2 = c0`, `bh^2 - 2 ah ch = c1`, `ch^2 - 2 bh dh = c2`, `dh^2 = c3`.
    pub fn identity_residual(&self) -> f64 {
        let r0 = self.a_hat * self.a_hat - self.c0;
        let r1 = self.b_hat * self.b_hat - 2.0 * self.a_hat * self.c_hat - self.c1;
        let r2 = self.c_hat * self.c_hat - 2.0 * self.b_hat * self.d_hat - self.c2;
        let r3 = self.d_hat * self.d_hat - self.c3;
        r0.abs().max(r1.abs()).max(r2.abs()).max(r3.abs())
    }
}

pub fn sos_certificate(eps: f64) -> Result<SosWitness, VirialError> {
    let r0 = epsilon_max();
    if !(eps > 0.0 && eps < r0) {
        return Err(VirialError::EpsOutOfRange(eps, r0));
    }
    let delta = 9.0 - (3.0 + epsilon_poly(eps) / (2.0 * (1.0 - eps))).powi(2);
    Ok(SosWitness {
        a_hat: (9.0 - delta).sqrt(),
        b_hat: 0.5 * ((1.0 - eps) * (1.0 - eps) + 5.0),
        c_hat: 1.0 - eps,
        d_hat: 1.0,
        c0: 9.0 - delta,
        c1: 3.0 + eps,
        c2: -5.0,
        c3: 1.0,
        eps,
        delta,
    })
}

/// Evaluate the witnessed quadratic form on a periodic field two ways:
/// directly from the target coefficients and as the integrated square.
/// Both are exact quadratures, so they agree to rounding.
pub fn sos_form_values(grid: &Grid, field: &[f64], w: &SosWitness) -> (f64, f64) {
    let f1 = grid.derivative(field, 1);
    let f2 = grid.derivative(field, 2);
    let f3 = grid.derivative(field, 3);
    let mut direct = 0.0;
    let mut squared = 0.0;
    for i in 0..grid.n {
        direct += w.c0 * field[i] * field[i]
            + w.c1 * f1[i] * f1[i]
            + w.c2 * f2[i] * f2[i]
            + w.c3 * f3[i] * f3[i];
        let s = w.a_hat * field[i] + w.b_hat * f1[i] + w.c_hat * f2[i] + w.d_hat * f3[i];
        squared += s * s;
    }
    (direct * grid.dx, squared * grid.dx)
}

// ---------------------------------------------------------------------------
// positivity certificates for the leading form
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateKind {
    DispersionLike,
    Pos1,
    Pos2,
    Pos3,
    Pos4,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub alpha: Option<f64>,
}

fn window_mid(lowers: [f64; 3], uppers: [f64; 3]) -> Option<f64> {
    let lo = lowers.iter().cloned().fold(f64::MIN, f64::max);
    let hi = uppers.iter().cloned().fold(f64::MAX, f64::min);
    if lo < hi {
        Some(0.5 * (lo + hi))
    } else {
        None
    }
}

fn a_upper_plain(at: f64) -> [f64; 3] {
    [-1.5 * at, (-2.0 * at - 0.5) / (1.0 - at), 0.5]
}

fn a_upper_primed(at: f64) -> [f64; 3] {
    [
        -1.5 * at - 1.0 / 6.0,
        (-2.0 * at - 2.0 / 9.0) / (1.0 - at),
        0.5 + 1.0 / (18.0 * at),
    ]
}

fn b_lower_plain(ct: f64) -> [f64; 3] {
    [1.5 * ct, (2.0 * ct + 0.5) / (1.0 - ct), -0.5]
}

fn b_lower_primed(ct: f64) -> [f64; 3] {
    [
        1.5 * ct + 1.0 / 6.0,
        (2.0 * ct + 2.0 / 9.0) / (1.0 - ct),
        -0.5 - 1.0 / (18.0 * ct),
    ]
}

/// Identify which positivity route applies to the leading quadratic form
/// and return an admissible mixing parameter. `None` exactly for triples
/// that are not refined dispersion-like.
pub fn positivity_certificate(p: &PhysParams) -> Certificate {
    let np = p.normalized();
    let (at, ct) = (np.a_tilde, np.c_tilde);
    // all eight plain coefficients positive
    if let Some(alpha) = window_mid(b_lower_plain(ct), a_upper_plain(at)) {
        if crate::regions::is_dispersion_like(p) {
            return Certificate {
                kind: CertificateKind::DispersionLike,
                alpha: Some(alpha),
            };
        }
    }
    let brk = crate::regions::refined_breakpoint();
    if ct <= at {
        if ct < brk && 45.0 * at * ct > 1.0 - at {
            if let Some(alpha) = window_mid(b_lower_primed(ct), a_upper_plain(at)) {
                return Certificate {
                    kind: CertificateKind::Pos3,
                    alpha: Some(alpha),
                };
            }
        }
        let pos1 = (ct < -1.0 / 3.0 && 18.0 * at * ct + at + ct > 0.0)
            || ((-1.0 / 3.0..-1.0 / 9.0).contains(&ct) && 27.0 * at * ct > 6.0 * at + 1.0);
        if pos1 {
            if let Some(alpha) = window_mid(b_lower_primed(ct), a_upper_primed(at)) {
                return Certificate {
                    kind: CertificateKind::Pos1,
                    alpha: Some(alpha),
                };
            }
        }
    } else {
        if at < brk && 45.0 * at * ct > 1.0 - ct {
            if let Some(alpha) = window_mid(b_lower_plain(ct), a_upper_primed(at)) {
                return Certificate {
                    kind: CertificateKind::Pos4,
                    alpha: Some(alpha),
                };
            }
        }
        let pos2 = (at < -1.0 / 3.0 && 18.0 * at * ct + at + ct > 0.0)
            || ((-1.0 / 3.0..-1.0 / 9.0).contains(&at) && 27.0 * at * ct > 6.0 * ct + 1.0);
        if pos2 {
            if let Some(alpha) = window_mid(b_lower_primed(ct), a_upper_primed(at)) {
                return Certificate {
                    kind: CertificateKind::Pos2,
                    alpha: Some(alpha),
                };
            }
        }
    }
    Certificate {
        kind: CertificateKind::None,
        alpha: None,
    }
}

// ---------------------------------------------------------------------------
// discrete evaluation
// ---------------------------------------------------------------------------

/// Canonical companion: solves `f - f_xx = u` spectrally.
pub fn helmholtz_solve(grid: &Grid, u: &[f64]) -> Vec<f64> {
    grid.helmholtz_inverse(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub i: f64,
    pub j: f64,
    pub h: f64,
}

/// The weighted functionals
/// `I = int w (u eta + u_x eta_x)`, `J = int w_x (eta u_x)`, `H = I + alpha J`.
pub fn eval_functionals(
    grid: &Grid,
    state: &FieldPair,
    w: &DiscreteWeight,
    alpha: f64,
) -> Result<Functionals, VirialError> {
    w.check_fits(grid, state.t)?;
    let s = w.sample(grid, state.t)?;
    let ux = grid.derivative(&state.u, 1);
    let ex = grid.derivative(&state.eta, 1);
    let mut i_val = 0.0;
    let mut j_val = 0.0;
    for idx in 0..grid.n {
        i_val += s.w0[idx] * (state.u[idx] * state.eta[idx] + ux[idx] * ex[idx]);
        j_val += s.w1[idx] * (state.eta[idx] * ux[idx]);
    }
    i_val *= grid.dx;
    j_val *= grid.dx / s.lambda;
    Ok(Functionals {
        i: i_val,
        j: j_val,
        h: i_val + alpha * j_val,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub q: f64,
    pub sq: f64,
    pub nq: f64,
    pub vh: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.q + self.sq + self.nq + self.vh
    }
}

/// Split of `dH/dt` into the leading quadratic form `Q`, the lower-order
/// quadratic remainder `SQ`, the cubic terms `NQ`, and the weight-motion
/// terms `VH` (zero for a fixed, non-moving weight).
pub fn eval_decomposition(
    grid: &Grid,
    state: &FieldPair,
    np: &NormParams,
    w: &DiscreteWeight,
    alpha: f64,
) -> Result<Decomposition, VirialError> {
    w.check_fits(grid, state.t)?;
    let s = w.sample(grid, state.t)?;
    let (at, ct) = (np.a_tilde, np.c_tilde);
    let (u, eta) = (&state.u, &state.eta);
    let n = grid.n;
    let dx = grid.dx;
    let lam = s.lambda;

    let ux = grid.derivative(u, 1);
    let ex = grid.derivative(eta, 1);
    let lu = grid.helmholtz_inverse(u);
    let leta = grid.helmholtz_inverse(eta);
    let lux = grid.helmholtz_inverse(&ux);
    let uu: Vec<f64> = u.iter().map(|v| v * v).collect();
    let ue: Vec<f64> = u.iter().zip(eta.iter()).map(|(a, b)| a * b).collect();
    let luu = grid.helmholtz_inverse(&uu);
    let lue = grid.helmholtz_inverse(&ue);
    let lue_x = grid.derivative(&lue, 1);

    let trip = |wgt: &[f64], a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            acc += wgt[i] * a[i] * b[i];
        }
        acc * dx
    };

    // leading quadratic form
    let c_eta2 = (1.0 + ct) * (alpha - 1.0) + 0.5;
    let c_etax2 = ct * (-alpha - 0.5);
    let c_u2 = (1.0 + at) * (-alpha - 1.0) + 0.5;
    let c_ux2 = at * (alpha - 0.5);
    let c_eta_nl = (1.0 + ct) * (1.0 - alpha);
    let c_u_nl = (1.0 + at) * (1.0 + alpha);
    let q = (c_eta2 * trip(&s.w1, eta, eta)
        + c_etax2 * trip(&s.w1, &ex, &ex)
        + c_u2 * trip(&s.w1, u, u)
        + c_ux2 * trip(&s.w1, &ux, &ux)
        + c_eta_nl * trip(&s.w1, eta, &leta)
        + c_u_nl * trip(&s.w1, u, &lu))
        / lam;

    // lower-order quadratic remainder
    let sq = alpha * (1.0 + at) * trip(&s.w2, u, &lux) / (lam * lam)
        + 0.5 * alpha * ct * trip(&s.w3, eta, eta) / (lam * lam * lam);

    // cubic terms
    let nq = (-0.5 * (1.0 + alpha) * trip(&s.w1, &uu, eta)
        + 0.5 * (1.0 - alpha) * trip(&s.w1, eta, &luu)
        + (1.0 + alpha) * trip(&s.w1, u, &lue))
        / lam
        + alpha * trip(&s.w2, u, &lue_x) / (lam * lam);

    // weight-motion terms
    let mut vh = 0.0;
    if w.v != 0.0 || s.lambda_dot != 0.0 {
        let mut t1 = 0.0; // w1 (u eta + ux ex)
        let mut t2 = 0.0; // y w1 (u eta + ux ex)
        let mut t3 = 0.0; // w1 (eta ux)
        let mut t4 = 0.0; // w2 (eta ux)
        let mut t5 = 0.0; // y w2 (eta ux)
        for i in 0..n {
            let cross = u[i] * eta[i] + ux[i] * ex[i];
            let jden = eta[i] * ux[i];
            t1 += s.w1[i] * cross;
            t2 += s.y[i] * s.w1[i] * cross;
            t3 += s.w1[i] * jden;
            t4 += s.w2[i] * jden;
            t5 += s.y[i] * s.w2[i] * jden;
        }
        let (t1, t2, t3, t4, t5) = (t1 * dx, t2 * dx, t3 * dx, t4 * dx, t5 * dx);
        vh = -(w.v / lam) * t1
            - (s.lambda_dot / lam) * t2
            - alpha
                * ((s.lambda_dot / (lam * lam)) * t3
                    + (w.v / (lam * lam)) * t4
                    + (s.lambda_dot / (lam * lam)) * t5);
    }
    Ok(Decomposition { q, sq, nq, vh })
}

/// The leading quadratic form rewritten through the canonical variables
/// `f - f_xx = u`, `g - g_xx = eta`. Agrees with the `q` component of
/// [`eval_decomposition`] to rounding.
pub fn eval_q_canonical(
    grid: &Grid,
    state: &FieldPair,
    np: &NormParams,
    w: &DiscreteWeight,
    alpha: f64,
) -> Result<f64, VirialError> {
    w.check_fits(grid, state.t)?;
    let s = w.sample(grid, state.t)?;
    let co = quad_coeffs_norm(np, alpha);
    let lam = s.lambda;
    let f = grid.helmholtz_inverse(&state.u);
    let g = grid.helmholtz_inverse(&state.eta);
    let f1 = grid.derivative(&f, 1);
    let f2 = grid.derivative(&f, 2);
    let f3 = grid.derivative(&f, 3);
    let g1 = grid.derivative(&g, 1);
    let g2 = grid.derivative(&g, 2);
    let g3 = grid.derivative(&g, 3);
    let mut main = 0.0;
    let mut third = 0.0;
    for i in 0..grid.n {
        main += s.w1[i]
            * (co.a1 * f[i] * f[i]
                + co.a2 * f1[i] * f1[i]
                + co.a3 * f2[i] * f2[i]
                + co.a4 * f3[i] * f3[i]
                + co.b1 * g[i] * g[i]
                + co.b2 * g1[i] * g1[i]
                + co.b3 * g2[i] * g2[i]
                + co.b4 * g3[i] * g3[i]);
        third += s.w3[i]
            * (co.d11 * f[i] * f[i]
                + co.d12 * f1[i] * f1[i]
                + co.d21 * g[i] * g[i]
                + co.d22 * g1[i] * g1[i]);
    }
    Ok(main * grid.dx / lam + third * grid.dx / (lam * lam * lam))
}

/// Time derivative of `H` computed directly from the equations of motion
/// and the analytic weight motion, with no integration by parts. Serves as
/// an independent check of the decomposition identities.
pub fn h_rate_direct(
    grid: &Grid,
    state: &FieldPair,
    np: &NormParams,
    w: &DiscreteWeight,
    alpha: f64,
    dealias: bool,
) -> Result<f64, VirialError> {
    w.check_fits(grid, state.t)?;
    let s = w.sample(grid, state.t)?;
    let dot = rhs(grid, state, np, dealias);
    let ux = grid.derivative(&state.u, 1);
    let ex = grid.derivative(&state.eta, 1);
    let udx = grid.derivative(&dot.u, 1);
    let edx = grid.derivative(&dot.eta, 1);
    let lam = s.lambda;
    let mut total = 0.0;
    for i in 0..grid.n {
        let ydot = -(w.v / lam) - s.y[i] * s.lambda_dot / lam;
        let w_dot = s.w1[i] * ydot;
        let wx = s.w1[i] / lam;
        let wx_dot = -(s.lambda_dot / (lam * lam)) * s.w1[i] + (s.w2[i] / lam) * ydot;
        total += w_dot * (state.u[i] * state.eta[i] + ux[i] * ex[i])
            + s.w0[i]
                * (dot.u[i] * state.eta[i]
                    + state.u[i] * dot.eta[i]
                    + udx[i] * ex[i]
                    + ux[i] * edx[i])
            + alpha
                * (wx_dot * (state.eta[i] * ux[i])
                    + wx * (dot.eta[i] * ux[i] + state.eta[i] * udx[i]));
    }
    Ok(total * grid.dx)
}
