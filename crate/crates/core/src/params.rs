//! Parameter validation and the coordinate charts used throughout the crate.
//!
//! The Hamiltonian regime requires `a, c < 0`, `d = b`, and the sum rule
//! `a + b + c + d = 1/3` (no surface tension). Together these force
//! `b > 1/6`. Two alternative charts are provided: the `(nu, b)` chart with
//! `a = -nu/2 + 1/3 - b`, `c = nu/2 - b`, and the normalized `(a/b, c/b)`
//! pair used by the solver after rescaling to `b = d = 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for the structural identities (sum rule, theta range).
/// Inputs are typically exact rationals entered as doubles; the tolerance
/// is absolute for order-one coefficients and scales with their magnitude
/// beyond that, since the raw doubles then carry proportional rounding.
pub const STRUCTURAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("not Hamiltonian: d = {d} must equal b = {b}")]
    NotHamiltonian { b: f64, d: f64 },
    #[error("sign violation: need a < 0 and c < 0, got a = {a}, c = {c}")]
    SignViolation { a: f64, c: f64 },
    #[error("sum violation: a + b + c + d = {sum}, expected 1/3")]
    SumViolation { sum: f64 },
    #[error("recovered theta^2 = {theta_sq} lies outside [0, 1]")]
    ThetaOutOfRange { theta_sq: f64 },
    #[error("(nu, b) = ({nu}, {b}) lies outside the admissible region")]
    OutsideR0 { nu: f64, b: f64 },
    #[error("b = {0} must exceed 1/6")]
    BTooSmall(f64),
}

/// Validated Hamiltonian parameter triple `(a, b, c)` with `d = b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Recovered from `c + d = (1 - theta^2)/2`; kept for validation only.
    pub theta: f64,
}

/// Point of the `(nu, b)` chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuB {
    pub nu: f64,
    pub b: f64,
}

/// Normalized dispersion coefficients `(a/b, c/b)` of the rescaled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub a_tilde: f64,
    pub c_tilde: f64,
}

/// Validate a raw `(a, b, c, d)` quadruple.
pub fn validate_phys(a: f64, b: f64, c: f64, d: f64) -> Result<PhysParams, ParamError> {
    if d != b {
        return Err(ParamError::NotHamiltonian { b, d });
    }
    if !(a < 0.0) || !(c < 0.0) {
        return Err(ParamError::SignViolation { a, c });
    }
    let sum = a + b + c + d;
    let scale = a.abs().max(b.abs()).max(c.abs()).max(1.0);
    if (sum - 1.0 / 3.0).abs() > STRUCTURAL_TOL * scale {
        return Err(ParamError::SumViolation { sum });
    }
    let theta_sq = 1.0 - 2.0 * (c + d);
    if !(-STRUCTURAL_TOL..=1.0 + STRUCTURAL_TOL).contains(&theta_sq) {
        return Err(ParamError::ThetaOutOfRange { theta_sq });
    }
    let theta = theta_sq.clamp(0.0, 1.0).sqrt();
    Ok(PhysParams { a, b, c, d, theta })
}

/// Membership in the admissible `(nu, b)` region: `nu` in `[0,1]` and
/// strictly inside `(2/3 - 2b, 2b)`, with `b > 1/6`. Boundary points are
/// rejected with no tolerance slack.
pub fn in_r0(nu: f64, b: f64) -> bool {
    b > 1.0 / 6.0 && (0.0..=1.0).contains(&nu) && nu > 2.0 / 3.0 - 2.0 * b && nu < 2.0 * b
}

/// Build parameters from the `(nu, b)` chart.
pub fn from_nu_b(nu: f64, b: f64) -> Result<PhysParams, ParamError> {
    if !in_r0(nu, b) {
        return Err(ParamError::OutsideR0 { nu, b });
    }
    let a = -0.5 * nu + 1.0 / 3.0 - b;
    let c = 0.5 * nu - b;
    validate_phys(a, b, c, b)
}

/// Inverse of [`from_nu_b`]; exact in floating point.
pub fn to_nu_b(p: &PhysParams) -> NuB {
    NuB {
        nu: 2.0 * (p.c + p.b),
        b: p.b,
    }
}

/// Normalized coefficients `(a/b, c/b)` of the rescaled system.
pub fn normalize(p: &PhysParams) -> NormParams {
    NormParams {
        a_tilde: p.a / p.b,
        c_tilde: p.c / p.b,
    }
}

impl NormParams {
    /// Recover the underlying `b` through the sum rule
    /// `(a + c)/b = 1/(3b) - 2`.
    pub fn recover_b(&self) -> f64 {
        1.0 / (3.0 * (self.a_tilde + self.c_tilde + 2.0))
    }
}

/// The symmetric family `a = c = 1/6 - b`, defined for `b > 1/6`.
pub fn a_equals_c_line(b: f64) -> Result<PhysParams, ParamError> {
    if !(b > 1.0 / 6.0) {
        return Err(ParamError::BTooSmall(b));
    }
    let ac = 1.0 / 6.0 - b;
    validate_phys(ac, b, ac, b)
}

impl PhysParams {
    pub fn nu_b(&self) -> NuB {
        to_nu_b(self)
    }

    pub fn normalized(&self) -> NormParams {
        normalize(self)
    }

    /// Whether the triple sits on the symmetric line `a = c`.
    pub fn is_symmetric(&self) -> bool {
        (self.a - self.c).abs() <= STRUCTURAL_TOL * self.a.abs().max(self.c.abs()).max(1.0)
    }
}

/// JSON parameter source accepted by the command line and config files:
/// `{"a":..,"b":..,"c":..,"d":..}`, `{"nu":..,"b":..}` or
/// `{"b":..,"ac_line":true}`.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ParamsSpec {
    Abcd { a: f64, b: f64, c: f64, d: f64 },
    NuB { nu: f64, b: f64 },
    AcLine { b: f64, ac_line: bool },
}

impl ParamsSpec {
    pub fn resolve(&self) -> Result<PhysParams, ParamError> {
        match *self {
            ParamsSpec::Abcd { a, b, c, d } => validate_phys(a, b, c, d),
            ParamsSpec::NuB { nu, b } => from_nu_b(nu, b),
            ParamsSpec::AcLine { b, ac_line } => {
                if ac_line {
                    a_equals_c_line(b)
                } else {
                    Err(ParamError::BTooSmall(b))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_symmetric_reference_triples() {
        let p = validate_phys(-1.0 / 18.0, 2.0 / 9.0, -1.0 / 18.0, 2.0 / 9.0).unwrap();
        assert!(p.theta >= 0.0 && p.theta <= 1.0);
        // theta^2 = 1 - 2(c + d) = 2/3 here
        assert!((p.theta * p.theta - 2.0 / 3.0).abs() < 1e-14);

        let q = validate_phys(-1.0 / 12.0, 0.25, -1.0 / 12.0, 0.25).unwrap();
        assert_eq!(q.a, q.c);
    }

    #[test]
    fn rejects_non_hamiltonian() {
        assert_eq!(
            validate_phys(-0.1, 0.2, -0.1, 0.3).unwrap_err(),
            ParamError::NotHamiltonian { b: 0.2, d: 0.3 }
        );
    }

    #[test]
    fn rejects_sign_and_sum_violations() {
        assert!(matches!(
            validate_phys(0.1, 0.2, -0.1, 0.2),
            Err(ParamError::SignViolation { .. })
        ));
        assert!(matches!(
            validate_phys(-0.1, 0.3, -0.1, 0.3),
            Err(ParamError::SumViolation { .. })
        ));
    }

    #[test]
    fn nu_b_chart_reference_points() {
        let p = from_nu_b(1.0 / 3.0, 0.25).unwrap();
        assert!((p.a + 1.0 / 12.0).abs() < 1e-15);
        assert!((p.c + 1.0 / 12.0).abs() < 1e-15);

        let q = from_nu_b(1.0 / 3.0, 2.0 / 9.0).unwrap();
        assert!((q.a + 1.0 / 18.0).abs() < 1e-15);
        assert!((q.c + 1.0 / 18.0).abs() < 1e-15);

        assert_eq!(
            from_nu_b(1.0 / 3.0, 1.0 / 6.0).unwrap_err(),
            ParamError::OutsideR0 {
                nu: 1.0 / 3.0,
                b: 1.0 / 6.0
            }
        );
    }

    #[test]
    fn normalization_reference_values() {
        let p = validate_phys(-1.0 / 48.0, 3.0 / 16.0, -1.0 / 48.0, 3.0 / 16.0).unwrap();
        let n = normalize(&p);
        assert!((n.a_tilde + 1.0 / 9.0).abs() < 1e-15);
        assert!((n.c_tilde + 1.0 / 9.0).abs() < 1e-15);

        let p = validate_phys(-1.0 / 18.0, 2.0 / 9.0, -1.0 / 18.0, 2.0 / 9.0).unwrap();
        let n = normalize(&p);
        assert!((n.a_tilde + 0.25).abs() < 1e-15);
        assert!((n.c_tilde + 0.25).abs() < 1e-15);
    }

    #[test]
    fn normalized_range_invariants() {
        for i in 0..200 {
            let b = 0.17 + 0.02 * i as f64;
            for j in 1..100 {
                let nu = j as f64 / 100.0;
                if !in_r0(nu, b) {
                    continue;
                }
                let n = from_nu_b(nu, b).unwrap().normalized();
                assert!(n.c_tilde >= -1.0 - 1e-14 && n.c_tilde < 0.0);
                assert!(n.a_tilde >= -1.0 - 1.0 / (6.0 * b) - 1e-14 && n.a_tilde < 0.0);
                assert!((n.recover_b() - b).abs() < 1e-10 * b.max(1.0));
            }
        }
    }

    #[test]
    fn symmetric_line_values() {
        let p = a_equals_c_line(0.25).unwrap();
        assert!((p.a + 1.0 / 12.0).abs() < 1e-15);
        let p = a_equals_c_line(3.0 / 16.0).unwrap();
        assert!((p.a + 1.0 / 48.0).abs() < 1e-15);
        assert_eq!(
            a_equals_c_line(1.0 / 6.0).unwrap_err(),
            ParamError::BTooSmall(1.0 / 6.0)
        );
        // the symmetric line always maps to nu = 1/3
        for b in [0.2, 0.3, 1.0, 7.5] {
            let nb = a_equals_c_line(b).unwrap().nu_b();
            assert!((nb.nu - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    mod properties {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]

            #[test]
            fn nu_b_round_trip(nu in 0.0..1.0f64, b in 0.167..6.0f64) {
                prop_assume!(in_r0(nu, b));
                let p = from_nu_b(nu, b).unwrap();
                let nb = to_nu_b(&p);
                prop_assert!(nb.b == b);
                prop_assert!((nb.nu - nu).abs() <= 1e-14 * b.max(1.0));
                // the sum rule holds to rounding
                let sum = p.a + p.b + p.c + p.d;
                prop_assert!((sum - 1.0 / 3.0).abs() <= 1e-14 * b.max(1.0));
            }

            #[test]
            fn symmetric_line_maps_to_one_third(b in 0.1667..8.0f64) {
                prop_assume!(b > 1.0 / 6.0);
                let nb = a_equals_c_line(b).unwrap().nu_b();
                prop_assert!((nb.nu - 1.0 / 3.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn params_spec_json_forms() {
        let s: ParamsSpec = serde_json::from_str(
            r#"{"a":-0.0833333333333333,"b":0.25,"c":-0.0833333333333333,"d":0.25}"#,
        )
        .unwrap();
        assert!(matches!(s, ParamsSpec::Abcd { .. }));
        let s: ParamsSpec = serde_json::from_str(r#"{"nu":0.3333,"b":0.25}"#).unwrap();
        assert!(matches!(s, ParamsSpec::NuB { .. }));
        let s: ParamsSpec = serde_json::from_str(r#"{"b":0.25,"ac_line":true}"#).unwrap();
        let p = s.resolve().unwrap();
        assert!((p.a + 1.0 / 12.0).abs() < 1e-15);
    }
}
