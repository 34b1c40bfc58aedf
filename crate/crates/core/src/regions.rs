//! Parameter-region predicates, threshold scalars, and the classifier that
//! maps a triple onto its decay scenario.
//!
//! Strictness follows the defining inequalities exactly: the dispersion-like
//! condition is strict, the ellipse/hyperbola and chart conditions are
//! non-strict, and no epsilon slack is applied anywhere. Rasters that need a
//! notion of "near the boundary" use the signed margins exposed alongside
//! the boolean predicates.

use crate::params::{to_nu_b, PhysParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("v0 = {0} must lie strictly inside (0, 1)")]
    V0OutOfRange(f64),
    #[error("kappa0 = {0} must lie strictly inside (0, 1/4)")]
    KappaOutOfRange(f64),
    #[error("b = {0} must exceed 1/6")]
    BTooSmall(f64),
}

/// `(2 - sqrt(3))/3`, the scale split for the modified threshold family.
pub fn kappa_split() -> f64 {
    (2.0 - 3.0_f64.sqrt()) / 3.0
}

/// `-(19 + sqrt(181))/90`, breakpoint of the refined branch conditions.
pub fn refined_breakpoint() -> f64 {
    -(19.0 + 181.0_f64.sqrt()) / 90.0
}

/// `(3 + sqrt(3))/12`, the symmetric-line threshold above which the
/// exterior decay frame speed exceeds 1.
pub fn sigma_threshold_b() -> f64 {
    (3.0 + 3.0_f64.sqrt()) / 12.0
}

// ---------------------------------------------------------------------------
// basic predicates
// ---------------------------------------------------------------------------

/// Signed margin of the dispersion-like condition on a raw triple:
/// positive iff `3b(a+c) + 2b^2 < 8ac` holds strictly.
pub fn dispersion_like_margin(a: f64, b: f64, c: f64) -> f64 {
    8.0 * a * c - (3.0 * b * (a + c) + 2.0 * b * b)
}

pub fn is_dispersion_like(p: &PhysParams) -> bool {
    dispersion_like_margin(p.a, p.b, p.c) > 0.0
}

/// The refined condition on a raw triple, written in `(a/b, c/b)`.
/// Returns the signed margin of the branch that applies (positive iff the
/// condition holds); cells where no branch applies get the dispersion-like
/// margin, which is negative there.
pub fn refined_dispersion_like_margin(a: f64, b: f64, c: f64) -> f64 {
    let dl = dispersion_like_margin(a, b, c);
    if dl > 0.0 {
        return dl;
    }
    let (at, ct) = (a / b, c / b);
    let brk = refined_breakpoint();
    let branch = if ct <= at {
        if ct < brk {
            Some(45.0 * at * ct - (1.0 - at))
        } else if ct < -1.0 / 3.0 {
            Some(18.0 * at * ct + at + ct)
        } else if ct < -1.0 / 9.0 {
            Some(27.0 * at * ct - (6.0 * at + 1.0))
        } else {
            None
        }
    } else if at < brk {
        Some(45.0 * at * ct - (1.0 - ct))
    } else if at < -1.0 / 3.0 {
        Some(18.0 * at * ct + at + ct)
    } else if at < -1.0 / 9.0 {
        Some(27.0 * at * ct - (6.0 * ct + 1.0))
    } else {
        None
    };
    match branch {
        Some(m) => m.max(dl),
        None => dl,
    }
}

pub fn is_refined_dispersion_like(p: &PhysParams) -> bool {
    refined_dispersion_like_margin(p.a, p.b, p.c) > 0.0
}

/// Joint obstruction predicate `2ab + 3ac >= b^2` and `2bc + 3ac >= b^2`;
/// expected to be unsatisfiable together with the admissibility conditions.
pub fn obstruction_margin(a: f64, b: f64, c: f64) -> f64 {
    let m1 = 2.0 * a * b + 3.0 * a * c - b * b;
    let m2 = 2.0 * b * c + 3.0 * a * c - b * b;
    m1.min(m2)
}

pub fn obstruction_holds(p: &PhysParams) -> bool {
    obstruction_margin(p.a, p.b, p.c) >= 0.0
}

// ---------------------------------------------------------------------------
// scales and thresholds of the moving-frame analysis
// ---------------------------------------------------------------------------

/// Derived scales attached to a frame-speed bound `v0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaScales {
    pub v0: f64,
    pub v0_plus: f64,
    pub kappa0: f64,
    pub b0: f64,
    pub b1: f64,
    /// Defined only for `kappa0 < (2 - sqrt(3))/3`.
    pub b2: Option<f64>,
}

pub fn kappa_scales(v0: f64) -> Result<KappaScales, RegionError> {
    if !(v0 > 0.0 && v0 < 1.0) {
        return Err(RegionError::V0OutOfRange(v0));
    }
    let v0_plus = 0.5 * (1.0 + v0);
    let kappa0 = 0.25 * (1.0 - v0);
    let b0 = 1.0 / (9.0 * kappa0);
    let b1 = 1.0 / (2.0 * (2.0 * kappa0 + 1.0));
    let b2 = if kappa0 < kappa_split() {
        let ra = ((2.0 * kappa0 + 1.0).powi(2) - 6.0 * kappa0).sqrt();
        let rb = ((3.0 * kappa0 + 1.0).powi(2) - 18.0 * kappa0).sqrt();
        Some(1.0 / (5.0 * kappa0 + 2.0 - ra - rb))
    } else {
        None
    };
    Ok(KappaScales {
        v0,
        v0_plus,
        kappa0,
        b0,
        b1,
        b2,
    })
}

/// Threshold abscissas splitting the branch tables of [`bar_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub r_minus: f64,
    pub r_plus: f64,
    pub rt_minus: f64,
    pub rt_plus: f64,
    pub s_minus: Option<f64>,
    pub s_plus: Option<f64>,
    pub st_minus: Option<f64>,
    pub st_plus: Option<f64>,
}

pub fn thresholds(kappa0: f64, b: f64) -> Result<Thresholds, RegionError> {
    if !(kappa0 > 0.0 && kappa0 < 0.25) {
        return Err(RegionError::KappaOutOfRange(kappa0));
    }
    if !(b > 1.0 / 6.0) {
        return Err(RegionError::BTooSmall(b));
    }
    let sr = ((2.0 * kappa0 + 1.0).powi(2) - 6.0 * kappa0).sqrt();
    let r_minus = 2.0 / 3.0 + 2.0 / 3.0 * b * (-(2.0 * kappa0 + 1.0) - sr);
    let r_plus = 2.0 / 3.0 + 2.0 / 3.0 * b * (-(2.0 * kappa0 + 1.0) + sr);
    let rt_minus = 2.0 / 3.0 * b * ((2.0 * kappa0 + 1.0) - sr);
    let rt_plus = 2.0 / 3.0 * b * ((2.0 * kappa0 + 1.0) + sr);
    let (s_minus, s_plus, st_minus, st_plus) = if kappa0 < kappa_split() {
        let ss = ((3.0 * kappa0 + 1.0).powi(2) - 18.0 * kappa0).sqrt();
        (
            Some(2.0 / 3.0 + 2.0 / 3.0 * b * (-(3.0 * kappa0 + 1.0) - ss)),
            Some(2.0 / 3.0 + 2.0 / 3.0 * b * (-(3.0 * kappa0 + 1.0) + ss)),
            Some(2.0 / 3.0 * b * ((3.0 * kappa0 + 1.0) - ss)),
            Some(2.0 / 3.0 * b * ((3.0 * kappa0 + 1.0) + ss)),
        )
    } else {
        (None, None, None, None)
    };
    Ok(Thresholds {
        r_minus,
        r_plus,
        rt_minus,
        rt_plus,
        s_minus,
        s_plus,
        st_minus,
        st_plus,
    })
}

// ---------------------------------------------------------------------------
// coefficient bounds of the split quadratic form
// ---------------------------------------------------------------------------

/// Which closed form realizes the selected extremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundIndex {
    Second,
    Third,
    Fourth,
}

/// Upper bounds `A2..A4` and lower bounds `B2..B4` on the mixing parameter
/// alpha, together with their branch-table extrema.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarBounds {
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub min_a: f64,
    pub min_a_index: BoundIndex,
    pub max_b: f64,
    pub max_b_index: BoundIndex,
}

pub fn bar_bounds(kappa0: f64, nu: f64, b: f64) -> Result<BarBounds, RegionError> {
    let th = thresholds(kappa0, b)?;
    let t = 3.0 * nu - 2.0;
    let a2 = 3.0 * kappa0 + t / (4.0 * b);
    let a3 = (18.0 * kappa0 * b + 2.0 * t) / (12.0 * b + t);
    let a4 = (12.0 * kappa0 * b + t) / (12.0 * b + 2.0 * t);
    let b2 = 3.0 * nu / (4.0 * b) - 3.0 * kappa0;
    let b3 = (2.0 * nu - 6.0 * kappa0 * b) / (4.0 * b - nu);
    let b4 = (nu - 4.0 * kappa0 * b) / (4.0 * b - 2.0 * nu);

    let min_a_index = if nu <= th.r_minus || nu >= th.r_plus {
        BoundIndex::Fourth
    } else if kappa0 >= kappa_split() {
        BoundIndex::Third
    } else if nu >= th.s_minus.unwrap() && nu <= th.s_plus.unwrap() {
        BoundIndex::Second
    } else {
        BoundIndex::Third
    };
    let max_b_index = if nu <= th.rt_minus || nu >= th.rt_plus {
        BoundIndex::Fourth
    } else if kappa0 >= kappa_split() {
        BoundIndex::Third
    } else if nu >= th.st_minus.unwrap() && nu <= th.st_plus.unwrap() {
        BoundIndex::Second
    } else {
        BoundIndex::Third
    };
    let pick = |i: BoundIndex, x2: f64, x3: f64, x4: f64| match i {
        BoundIndex::Second => x2,
        BoundIndex::Third => x3,
        BoundIndex::Fourth => x4,
    };
    Ok(BarBounds {
        a2,
        a3,
        a4,
        b2,
        b3,
        b4,
        min_a: pick(min_a_index, a2, a3, a4),
        min_a_index,
        max_b: pick(max_b_index, b2, b3, b4),
        max_b_index,
    })
}

/// Admissible alpha interval `[max_B, min_A]` for the split coefficients;
/// `None` when the interval is empty.
pub fn alpha_window(v0: f64, p: &PhysParams) -> Result<Option<(f64, f64)>, RegionError> {
    let scales = kappa_scales(v0)?;
    let nb = to_nu_b(p);
    let bb = bar_bounds(scales.kappa0, nb.nu, nb.b)?;
    if bb.max_b <= bb.min_a {
        Ok(Some((bb.max_b, bb.min_a)))
    } else {
        Ok(None)
    }
}

/// Uniform-decay chart membership: `b >= b0(v0)` together with the three
/// chart inequalities tied to the same `b0`.
pub fn in_r_sharp(v0: f64, p: &PhysParams) -> Result<bool, RegionError> {
    let scales = kappa_scales(v0)?;
    let nb = to_nu_b(p);
    Ok(r_sharp_margin_with_b0(scales.b0, nb.nu, nb.b) >= 0.0)
}

/// Signed margin of the uniform-decay chart conditions (minimum over the
/// four constraints; nonnegative iff all hold).
pub fn r_sharp_margin_with_b0(b0: f64, nu: f64, b: f64) -> f64 {
    let m0 = b - b0;
    let m1 = (12.0 * b * b - (12.0 * b0 + 1.0) * b) - (9.0 * b0 * nu * nu - 6.0 * b0 * nu);
    let m2 = 40.0 * b * b - 8.0 * (3.0 * b0 + 1.0) * b + 4.0 * (2.0 - 9.0 * b0) * nu * b
        - 15.0 * b0 * (3.0 * nu * nu - 2.0 * nu);
    let m3 = 120.0 * b * b - 8.0 * (18.0 * b0 + 1.0) * b + 12.0 * (9.0 * b0 - 2.0) * nu * b
        - 45.0 * b0 * (3.0 * nu * nu - 2.0 * nu);
    m0.min(m1).min(m2).min(m3)
}

// ---------------------------------------------------------------------------
// exterior-frame conditions
// ---------------------------------------------------------------------------

/// Exterior-frame admissibility summary: the two closed-form regions and
/// the minimal coercive frame speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorConditions {
    /// `153 b^2 - 54 b + 4 <= 9ac`: every frame speed above 1 is coercive.
    pub ellipse: bool,
    /// Coercivity already at speed `3 sqrt(ac)/b`.
    pub hyperbola: bool,
    /// Maximum of the four speed constraints; admissible speeds are
    /// strictly greater.
    pub sigma_min: f64,
}

pub fn ellipse_margin(a: f64, b: f64, c: f64) -> f64 {
    9.0 * a * c - (153.0 * b * b - 54.0 * b + 4.0)
}

/// Margin of the hyperbola-type region `54ac >= b (sqrt(48(6b-1)^2 +
/// (21b-2)^2) - (21b-2))`, positive inside.
pub fn hyperbola_margin(a: f64, b: f64, c: f64) -> f64 {
    let s = (48.0 * (6.0 * b - 1.0).powi(2) + (21.0 * b - 2.0).powi(2)).sqrt();
    54.0 * a * c + b * (21.0 * b - 2.0) - b * s
}

/// The four speed constraints of the exterior coercivity estimate.
pub fn sigma_terms(p: &PhysParams) -> [f64; 4] {
    let (a, b, c) = (p.a, p.b, p.c);
    [
        1.0,
        (15.0 * b - 2.0) / (3.0 * ((2.0 * b - a) * (2.0 * b - c)).sqrt()),
        (12.0 * b * b - 2.0 * b + 9.0 * a * c) / (3.0 * b * ((b - 2.0 * a) * (b - 2.0 * c)).sqrt()),
        3.0 * (a * c).sqrt() / b,
    ]
}

pub fn exterior_conditions(p: &PhysParams) -> ExteriorConditions {
    let terms = sigma_terms(p);
    let sigma_min = terms.iter().cloned().fold(f64::MIN, f64::max);
    ExteriorConditions {
        ellipse: ellipse_margin(p.a, p.b, p.c) >= 0.0,
        hyperbola: hyperbola_margin(p.a, p.b, p.c) >= 0.0,
        sigma_min,
    }
}

/// Minimal exterior frame speed on the symmetric line `a = c = 1/6 - b`:
/// 1 up to `b = (3 + sqrt(3))/12`, then `2(b - 1/6)(b - 1/8)/(b(b - 1/12))`.
pub fn sigma_ac(b: f64) -> Result<f64, RegionError> {
    if !(b > 1.0 / 6.0) {
        return Err(RegionError::BTooSmall(b));
    }
    if b <= sigma_threshold_b() {
        Ok(1.0)
    } else {
        Ok(2.0 * (b - 1.0 / 6.0) * (b - 1.0 / 8.0) / (b * (b - 1.0 / 12.0)))
    }
}

// ---------------------------------------------------------------------------
// classifier
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum ScenarioLabel {
    /// `1/6 < b <= 3/16` on the symmetric line: decay outside the light
    /// cone only.
    ExteriorOnly_b_le_3_16,
    /// `3/16 < b <= 2/9`: exterior decay plus the origin-centered window.
    ExteriorPlusOrigin_b_le_2_9,
    /// `2/9 < b <= (3+sqrt(3))/12`: moving windows up to `|v| < 1 - 2/(9b)`
    /// plus the full exterior.
    ConeBand_b_le_crit,
    /// `b > (3+sqrt(3))/12`: moving windows plus exterior frames faster
    /// than `sigma(b)`.
    ConeBand_sigma_b,
    /// Off the symmetric line: consult the individual predicates.
    NotClassified,
}

/// Decay scenario attached to a parameter triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayScenario {
    pub label: ScenarioLabel,
    /// Largest window speed with proven decay, when one applies.
    pub v_max: Option<f64>,
    /// Minimal exterior frame speed (admissible speeds strictly greater).
    pub sigma: Option<f64>,
    pub refined: bool,
    /// Uniform-window membership for the queried `v0`, when one was given.
    pub uniform: Option<bool>,
    pub exterior: ExteriorConditions,
}

pub fn classify(p: &PhysParams, v0: Option<f64>) -> Result<DecayScenario, RegionError> {
    let refined = is_refined_dispersion_like(p);
    let exterior = exterior_conditions(p);
    let uniform = match v0 {
        Some(v) => Some(in_r_sharp(v, p)?),
        None => None,
    };
    if p.is_symmetric() {
        let b = p.b;
        let label = if b <= 3.0 / 16.0 {
            ScenarioLabel::ExteriorOnly_b_le_3_16
        } else if b <= 2.0 / 9.0 {
            ScenarioLabel::ExteriorPlusOrigin_b_le_2_9
        } else if b <= sigma_threshold_b() {
            ScenarioLabel::ConeBand_b_le_crit
        } else {
            ScenarioLabel::ConeBand_sigma_b
        };
        let v_max = if b > 2.0 / 9.0 {
            Some(1.0 - 2.0 / (9.0 * b))
        } else {
            None
        };
        Ok(DecayScenario {
            label,
            v_max,
            sigma: Some(sigma_ac(b)?),
            refined,
            uniform,
            exterior,
        })
    } else {
        let v_max = match (v0, uniform) {
            (Some(v), Some(true)) => Some(v),
            _ => None,
        };
        Ok(DecayScenario {
            label: ScenarioLabel::NotClassified,
            v_max,
            sigma: Some(exterior.sigma_min),
            refined,
            uniform,
            exterior,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{a_equals_c_line, from_nu_b, in_r0};

    fn sym(b: f64) -> PhysParams {
        a_equals_c_line(b).unwrap()
    }

    #[test]
    fn dispersion_like_reference_points() {
        assert!(is_dispersion_like(&sym(0.25)));
        // equality at b = 2/9 fails the strict inequality
        assert!(!is_dispersion_like(&sym(2.0 / 9.0)));
        assert!(!is_dispersion_like(&sym(3.0 / 16.0)));
    }

    #[test]
    fn refined_reference_points() {
        // third branch at a = c, b = 0.2: 27 at ct > 6 at + 1 with at = -1/6
        let p = sym(0.2);
        assert!(is_refined_dispersion_like(&p));
        // the boundary b = 3/16 is an equality point of the branch
        // condition (excluded up to the rounding of 1/6 in doubles)
        let q = sym(3.0 / 16.0);
        assert!(refined_dispersion_like_margin(q.a, q.b, q.c).abs() < 1e-15);
        assert!(!is_refined_dispersion_like(&sym(3.0 / 16.0 - 1e-9)));
        assert!(is_refined_dispersion_like(&sym(3.0 / 16.0 + 1e-9)));
        // strictly dispersion-like parameters are refined by definition
        assert!(is_refined_dispersion_like(&sym(0.3)));
    }

    #[test]
    fn refined_is_superset_of_dispersion_like() {
        for i in 0..40 {
            for j in 1..40 {
                let b = 0.17 + 0.05 * i as f64;
                let nu = j as f64 / 40.0;
                if let Ok(p) = from_nu_b(nu, b) {
                    if is_dispersion_like(&p) {
                        assert!(is_refined_dispersion_like(&p), "({nu},{b})");
                    }
                }
            }
        }
    }

    #[test]
    fn boundary_bisection_on_symmetric_line() {
        // dispersion-like flips at b = 2/9, refined at b = 3/16
        let bisect = |pred: fn(&PhysParams) -> bool, mut lo: f64, mut hi: f64| -> f64 {
            assert!(!pred(&sym(lo)) && pred(&sym(hi)));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if pred(&sym(mid)) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let b_dl = bisect(is_dispersion_like, 0.2, 0.25);
        assert!((b_dl - 2.0 / 9.0).abs() < 1e-10, "{b_dl}");
        let b_ref = bisect(is_refined_dispersion_like, 0.17, 0.21);
        assert!((b_ref - 3.0 / 16.0).abs() < 1e-10, "{b_ref}");
    }

    #[test]
    fn kappa_scales_reference_values() {
        let s = kappa_scales(0.5).unwrap();
        assert!((s.kappa0 - 0.125).abs() < 1e-15);
        assert!((s.b0 - 8.0 / 9.0).abs() < 1e-15);
        assert!(s.b2.is_none(), "kappa0 = 1/8 >= (2-sqrt3)/3");

        // v0 -> 0 limit: kappa0 -> 1/4, b0 -> 4/9, b1 -> 1/3
        let s = kappa_scales(1e-12).unwrap();
        assert!((s.kappa0 - 0.25).abs() < 1e-12);
        assert!((s.b0 - 4.0 / 9.0).abs() < 1e-11);
        assert!((s.b1 - 1.0 / 3.0).abs() < 1e-12);

        let s = kappa_scales(0.9).unwrap();
        assert!((s.kappa0 - 0.025).abs() < 1e-15);
        assert!(s.kappa0 < kappa_split());
        let b2 = s.b2.expect("b2 defined for small kappa0");
        assert!(s.b0 > b2 && b2 > s.b1, "{} > {} > {}", s.b0, b2, s.b1);

        assert_eq!(
            kappa_scales(0.0).unwrap_err(),
            RegionError::V0OutOfRange(0.0)
        );
        assert_eq!(
            kappa_scales(1.0).unwrap_err(),
            RegionError::V0OutOfRange(1.0)
        );
    }

    #[test]
    fn scale_ordering_b0_b2_b1() {
        for i in 1..100 {
            let kappa0 = 0.25 * i as f64 / 100.0;
            let v0 = 1.0 - 4.0 * kappa0;
            if v0 <= 0.0 || v0 >= 1.0 {
                continue;
            }
            let s = kappa_scales(v0).unwrap();
            assert!(s.b0 > s.b1);
            if let Some(b2) = s.b2 {
                assert!(s.b0 > b2 && b2 > s.b1, "kappa0 = {kappa0}");
            }
        }
    }

    #[test]
    fn threshold_ordering_invariants() {
        for &kappa0 in &[0.02, 0.05, 0.0893, 0.12, 0.2, 0.24] {
            for &b in &[0.2, 0.5, 1.0, 3.0] {
                let th = thresholds(kappa0, b).unwrap();
                assert!(th.r_minus < th.r_plus);
                assert!(th.rt_minus < th.rt_plus);
                assert!(2.0 / 3.0 - 2.0 * b < th.r_minus, "kappa0={kappa0} b={b}");
                assert!(th.rt_plus < 2.0 * b, "kappa0={kappa0} b={b}");
                if kappa0 < kappa_split() {
                    let (sm, sp) = (th.s_minus.unwrap(), th.s_plus.unwrap());
                    let (tm, tp) = (th.st_minus.unwrap(), th.st_plus.unwrap());
                    assert!(th.r_minus < sm && sm < sp && sp < th.r_plus);
                    assert!(th.rt_minus < tm && tm < tp && tp < th.rt_plus);
                } else {
                    assert!(th.s_minus.is_none());
                }
                // above b1 the window tops interleave
                let b1 = 1.0 / (2.0 * (2.0 * kappa0 + 1.0));
                if b > b1 {
                    assert!(th.r_plus < th.rt_plus, "kappa0={kappa0} b={b}");
                }
            }
        }
        assert_eq!(
            thresholds(0.3, 1.0).unwrap_err(),
            RegionError::KappaOutOfRange(0.3)
        );
    }

    #[test]
    fn thresholds_are_sign_changes_of_bound_differences() {
        // oracle: bisection on a3 - a4 locates r-, r+; on a2 - a3 locates s-, s+
        let kappa0 = 0.05;
        let b = 1.4;
        let th = thresholds(kappa0, b).unwrap();
        let diff34 = |nu: f64| {
            let bb = bar_bounds(kappa0, nu, b).unwrap();
            bb.a3 - bb.a4
        };
        let diff23 = |nu: f64| {
            let bb = bar_bounds(kappa0, nu, b).unwrap();
            bb.a2 - bb.a3
        };
        let bisect = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let r_minus = bisect(&diff34, th.r_minus - 0.3, th.r_minus + 0.3);
        assert!((r_minus - th.r_minus).abs() < 1e-10);
        let r_plus = bisect(&diff34, th.r_plus - 0.3, th.r_plus + 0.3);
        assert!((r_plus - th.r_plus).abs() < 1e-10);
        let s_minus = bisect(
            &diff23,
            th.s_minus.unwrap() - 0.2,
            th.s_minus.unwrap() + 0.2,
        );
        assert!((s_minus - th.s_minus.unwrap()).abs() < 1e-10);
        let s_plus = bisect(&diff23, th.s_plus.unwrap() - 0.2, th.s_plus.unwrap() + 0.2);
        assert!((s_plus - th.s_plus.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn branch_table_selection_examples() {
        // small kappa0: the middle window selects the second bound, the far
        // wings the fourth
        let kappa0 = 0.05;
        let b = 1.4;
        let th = thresholds(kappa0, b).unwrap();
        let mid = 0.5 * (th.s_minus.unwrap() + th.s_plus.unwrap());
        let bb = bar_bounds(kappa0, mid, b).unwrap();
        assert_eq!(bb.min_a_index, BoundIndex::Second);
        if th.r_minus > 0.0 {
            let bb = bar_bounds(kappa0, th.r_minus - 0.05, b).unwrap();
            assert_eq!(bb.min_a_index, BoundIndex::Fourth);
        }
        let bb = bar_bounds(kappa0, th.r_plus + 0.05, b).unwrap();
        assert_eq!(bb.min_a_index, BoundIndex::Fourth);
    }

    #[test]
    fn branch_tables_match_brute_force_on_grid() {
        for &kappa0 in &[0.03, 0.07, 0.11, 0.19, 0.24] {
            for i in 0..200 {
                for j in 0..200 {
                    let nu = i as f64 / 199.0;
                    let b = 0.17 + 2.0 * j as f64 / 199.0;
                    if !in_r0(nu, b) {
                        continue;
                    }
                    let bb = bar_bounds(kappa0, nu, b).unwrap();
                    let brute_min = bb.a2.min(bb.a3).min(bb.a4);
                    let brute_max = bb.b2.max(bb.b3).max(bb.b4);
                    assert!(
                        (bb.min_a - brute_min).abs() < 1e-12 * (1.0 + brute_min.abs()),
                        "min at kappa0={kappa0} nu={nu} b={b}: {} vs {brute_min}",
                        bb.min_a
                    );
                    assert!(
                        (bb.max_b - brute_max).abs() < 1e-12 * (1.0 + brute_max.abs()),
                        "max at kappa0={kappa0} nu={nu} b={b}: {} vs {brute_max}",
                        bb.max_b
                    );
                }
            }
        }
    }

    #[test]
    fn r_sharp_membership_examples() {
        // v0 = 0.5, nu = 1/3, b = 2 is inside
        let p = from_nu_b(1.0 / 3.0, 2.0).unwrap();
        assert!(in_r_sharp(0.5, &p).unwrap());
        // below b0 the chart is empty regardless of nu
        let s = kappa_scales(0.5).unwrap();
        let p = from_nu_b(1.0 / 3.0, s.b0 * 0.9).unwrap();
        assert!(!in_r_sharp(0.5, &p).unwrap());
    }

    #[test]
    fn r_sharp_implies_alpha_window() {
        // membership must guarantee a nonempty alpha interval whose
        // endpoints reproduce nonnegative split coefficients
        let mut checked = 0usize;
        for &v0 in &[0.1, 0.3, 0.5, 0.7, 0.9] {
            for i in 0..60 {
                for j in 0..60 {
                    let nu = i as f64 / 59.0;
                    let b = 0.2 + 5.0 * j as f64 / 59.0;
                    let p = match from_nu_b(nu, b) {
                        Ok(p) => p,
                        Err(_) => continue,
                    };
                    if in_r_sharp(v0, &p).unwrap() {
                        let w = alpha_window(v0, &p).unwrap();
                        assert!(w.is_some(), "empty window at v0={v0} nu={nu} b={b}");
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 200, "chart sampling too sparse ({checked})");
    }

    #[test]
    fn window_closes_below_the_chart() {
        // scan b downward at nu = 1/3 until the window closes
        let v0 = 0.5;
        let s = kappa_scales(v0).unwrap();
        let mut b = s.b0 + 0.2;
        let mut saw_nonempty = false;
        let mut saw_empty = false;
        while b > 0.2 {
            let p = from_nu_b(1.0 / 3.0, b).unwrap();
            match alpha_window(v0, &p).unwrap() {
                Some(_) => saw_nonempty = true,
                None => {
                    if saw_nonempty {
                        saw_empty = true;
                        break;
                    }
                }
            }
            b -= 0.01;
        }
        assert!(saw_nonempty && saw_empty);
    }

    #[test]
    fn exterior_reference_points() {
        // ellipse vertex: nu = 1/3, b = 1/4 attains equality
        let p = sym(0.25);
        let m = ellipse_margin(p.a, p.b, p.c);
        assert!(m.abs() < 1e-15, "margin {m}");
        assert!(exterior_conditions(&p).ellipse);
        // sigma_min -> 3 along the symmetric line as b grows
        let p = sym(1e6);
        let e = exterior_conditions(&p);
        assert!((e.sigma_min - 3.0).abs() < 1e-3);
        // hyperbola boundary touches nu = 1/3 at b = 1/4
        assert!(hyperbola_margin(p.a, p.b, p.c) > 0.0);
        let q = sym(0.25);
        assert!(hyperbola_margin(q.a, q.b, q.c).abs() < 1e-12);
    }

    #[test]
    fn ellipse_implies_unit_sigma() {
        for i in 0..80 {
            for j in 0..80 {
                let nu = i as f64 / 79.0;
                let b = 0.17 + 0.33 * j as f64 / 79.0;
                if let Ok(p) = from_nu_b(nu, b) {
                    let e = exterior_conditions(&p);
                    if e.ellipse {
                        let t = sigma_terms(&p);
                        for (idx, v) in t.iter().enumerate().skip(1) {
                            assert!(*v <= 1.0 + 1e-12, "term {idx} = {v} at ({nu},{b})");
                        }
                        assert!((e.sigma_min - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hyperbola_implies_tail_term_dominates() {
        for i in 0..80 {
            for j in 0..80 {
                let nu = i as f64 / 79.0;
                let b = 0.17 + 4.0 * j as f64 / 79.0;
                if let Ok(p) = from_nu_b(nu, b) {
                    let e = exterior_conditions(&p);
                    if e.hyperbola {
                        let t = sigma_terms(&p);
                        assert!(
                            (e.sigma_min - t[3]).abs() <= 1e-10 * e.sigma_min.abs().max(1.0),
                            "({nu},{b}): sigma_min {} vs tail {}",
                            e.sigma_min,
                            t[3]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn hyperbola_forms_agree_on_grid() {
        // the (a,c) form and the (nu,b) form of the region must coincide
        for i in 0..120 {
            for j in 0..120 {
                let nu = i as f64 / 119.0;
                let b = 0.17 + 4.0 * j as f64 / 119.0;
                if !in_r0(nu, b) {
                    continue;
                }
                let p = from_nu_b(nu, b).unwrap();
                let lhs = hyperbola_margin(p.a, p.b, p.c) >= 0.0;
                let s = (2169.0 * b * b - 660.0 * b + 52.0).sqrt();
                let rhs = -3.0 * nu * nu + 2.0 * nu >= 2.0 * b / 9.0 * (20.0 - 75.0 * b + s);
                assert_eq!(lhs, rhs, "({nu},{b})");
            }
        }
    }

    #[test]
    fn sigma_ac_reference_values() {
        let bc = sigma_threshold_b();
        assert!((sigma_ac(bc).unwrap() - 1.0).abs() < 1e-10);
        // continuity: the rational form also evaluates to 1 at the threshold
        let formula = 2.0 * (bc - 1.0 / 6.0) * (bc - 1.0 / 8.0) / (bc * (bc - 1.0 / 12.0));
        assert!((formula - 1.0).abs() < 1e-10);
        assert!((sigma_ac(1e6).unwrap() - 2.0).abs() < 1e-5);
        assert!((sigma_ac(0.25).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            sigma_ac(1.0 / 6.0).unwrap_err(),
            RegionError::BTooSmall(1.0 / 6.0)
        );
        // monotone increasing above the threshold
        let mut prev = 1.0;
        for i in 0..200 {
            let b = bc + 0.05 * (i + 1) as f64;
            let s = sigma_ac(b).unwrap();
            assert!(s >= prev - 1e-13);
            prev = s;
        }
    }

    #[test]
    fn classify_symmetric_line() {
        let s = classify(&sym(0.18), None).unwrap();
        assert_eq!(s.label, ScenarioLabel::ExteriorOnly_b_le_3_16);
        assert_eq!(s.v_max, None);

        let s = classify(&sym(0.21), None).unwrap();
        assert_eq!(s.label, ScenarioLabel::ExteriorPlusOrigin_b_le_2_9);

        let s = classify(&sym(0.3), None).unwrap();
        assert_eq!(s.label, ScenarioLabel::ConeBand_b_le_crit);
        assert!((s.v_max.unwrap() - (1.0 - 2.0 / (9.0 * 0.3))).abs() < 1e-14);
        assert_eq!(s.sigma, Some(1.0));

        let s = classify(&sym(0.5), None).unwrap();
        assert_eq!(s.label, ScenarioLabel::ConeBand_sigma_b);
        assert!(s.sigma.unwrap() > 1.0);
    }

    #[test]
    fn classify_off_line_reports_predicates() {
        let p = from_nu_b(0.5, 0.35).unwrap();
        let s = classify(&p, Some(0.3)).unwrap();
        assert_eq!(s.label, ScenarioLabel::NotClassified);
        assert!(s.uniform.is_some());
        assert!(s.sigma.unwrap() >= 1.0);
    }

    #[test]
    fn obstruction_empty_on_chart_grid() {
        let mut tested = 0usize;
        for i in 0..1000 {
            for j in 0..1000 {
                let nu = i as f64 / 999.0;
                let b = 1.0 / 6.0 + 1e-6 + 3.0 * j as f64 / 999.0;
                if !in_r0(nu, b) {
                    continue;
                }
                let a = -0.5 * nu + 1.0 / 3.0 - b;
                let c = 0.5 * nu - b;
                assert!(
                    obstruction_margin(a, b, c) < 0.0,
                    "obstruction satisfied at ({nu},{b})"
                );
                tested += 1;
            }
        }
        assert!(tested > 500_000, "grid too sparse: {tested}");
    }
}
