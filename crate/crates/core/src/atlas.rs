//! Rasterization of the region predicates over parameter rectangles, with
//! CSV and SVG emission.
//!
//! Cells are evaluated at their centers. A cell's boundary flag is set when
//! its predicate value differs from any 4-neighbor or when the signed margin
//! sits on the boundary itself; boundary cells are labeled by the non-strict
//! evaluation of the defining inequality.

use crate::params;
use crate::regions;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AtlasError {
    #[error("bad raster request: {0}")]
    BadRange(String),
}

/// Predicates that can be rasterized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    DispersionLike,
    RefinedDispersionLike,
    Ellipse,
    Hyperbola,
    Obstruction,
    /// Uniform-decay chart membership for the given frame-speed bound.
    RSharp {
        v0: f64,
    },
}

impl Predicate {
    pub fn parse(name: &str, v0: Option<f64>) -> Result<Self, AtlasError> {
        match name {
            "dispersion_like" => Ok(Predicate::DispersionLike),
            "refined" | "refined_dispersion_like" => Ok(Predicate::RefinedDispersionLike),
            "ellipse" => Ok(Predicate::Ellipse),
            "hyperbola" => Ok(Predicate::Hyperbola),
            "obstruction" => Ok(Predicate::Obstruction),
            "r_sharp" => {
                let v0 = v0.ok_or_else(|| {
                    AtlasError::BadRange("predicate r_sharp requires --v0".into())
                })?;
                Ok(Predicate::RSharp { v0 })
            }
            other => Err(AtlasError::BadRange(format!("unknown predicate `{other}`"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Predicate::DispersionLike => "dispersion_like".into(),
            Predicate::RefinedDispersionLike => "refined_dispersion_like".into(),
            Predicate::Ellipse => "ellipse".into(),
            Predicate::Hyperbola => "hyperbola".into(),
            Predicate::Obstruction => "obstruction".into(),
            Predicate::RSharp { v0 } => format!("r_sharp_v0_{v0}"),
        }
    }

    /// Signed margin on a raw triple; `None` when the point is outside the
    /// predicate's domain. Positive (or zero for the non-strict predicates)
    /// means the predicate holds.
    fn margin(&self, a: f64, b: f64, c: f64) -> Option<f64> {
        if !(a < 0.0 && c < 0.0 && b > 1.0 / 6.0) {
            return None;
        }
        match *self {
            Predicate::DispersionLike => Some(regions::dispersion_like_margin(a, b, c)),
            Predicate::RefinedDispersionLike => {
                Some(regions::refined_dispersion_like_margin(a, b, c))
            }
            Predicate::Ellipse => Some(regions::ellipse_margin(a, b, c)),
            Predicate::Hyperbola => Some(regions::hyperbola_margin(a, b, c)),
            Predicate::Obstruction => Some(regions::obstruction_margin(a, b, c)),
            Predicate::RSharp { v0 } => {
                let scales = regions::kappa_scales(v0).ok()?;
                let nu = 2.0 * (c + b);
                if !params::in_r0(nu, b) {
                    return None;
                }
                Some(regions::r_sharp_margin_with_b0(scales.b0, nu, b))
            }
        }
    }
}

/// Axis layout of a raster.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Axes {
    /// x = nu, y = b; each cell maps to a triple through the chart.
    NuB,
    /// x = a, y = c at fixed b (conditions evaluated on the raw triple).
    AcAtFixedB { b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
}

/// Labeled raster over a parameter rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct RegionMap {
    pub axes: Axes,
    pub x_range: AxisRange,
    pub y_range: AxisRange,
    pub nx: usize,
    pub ny: usize,
    pub predicates: Vec<String>,
    /// Per predicate, row-major `(value, boundary)` cells.
    pub cells: Vec<Vec<(bool, bool)>>,
}

fn triple_at(axes: Axes, x: f64, y: f64) -> (f64, f64, f64) {
    match axes {
        Axes::NuB => (-0.5 * x + 1.0 / 3.0 - y, y, 0.5 * x - y),
        Axes::AcAtFixedB { b } => (x, b, y),
    }
}

pub fn rasterize(
    predicates: &[Predicate],
    axes: Axes,
    x_range: AxisRange,
    y_range: AxisRange,
    nx: usize,
    ny: usize,
) -> Result<RegionMap, AtlasError> {
    if predicates.is_empty() {
        return Err(AtlasError::BadRange("empty predicate set".into()));
    }
    if nx < 2 || ny < 2 {
        return Err(AtlasError::BadRange(format!(
            "resolution {nx}x{ny} below 2x2"
        )));
    }
    if !(x_range.lo < x_range.hi) || !(y_range.lo < y_range.hi) {
        return Err(AtlasError::BadRange("empty axis range".into()));
    }
    let dx = (x_range.hi - x_range.lo) / nx as f64;
    let dy = (y_range.hi - y_range.lo) / ny as f64;
    let cells: Vec<Vec<(bool, bool)>> = predicates
        .iter()
        .map(|pred| {
            let margins: Vec<Option<f64>> = (0..nx * ny)
                .into_par_iter()
                .map(|idx| {
                    let (i, j) = (idx % nx, idx / nx);
                    let x = x_range.lo + (i as f64 + 0.5) * dx;
                    let y = y_range.lo + (j as f64 + 0.5) * dy;
                    let (a, b, c) = triple_at(axes, x, y);
                    pred.margin(a, b, c)
                })
                .collect();
            // boundary cells (margin exactly zero) are labeled by the
            // non-strict evaluation even for the strict predicates
            let value = |m: Option<f64>| matches!(m, Some(m) if m >= 0.0);
            (0..nx * ny)
                .map(|idx| {
                    let (i, j) = (idx % nx, idx / nx);
                    let v = value(margins[idx]);
                    let exact_boundary = matches!(margins[idx], Some(m) if m == 0.0);
                    let mut boundary = exact_boundary;
                    let mut neighbors = Vec::with_capacity(4);
                    if i > 0 {
                        neighbors.push(idx - 1);
                    }
                    if i + 1 < nx {
                        neighbors.push(idx + 1);
                    }
                    if j > 0 {
                        neighbors.push(idx - nx);
                    }
                    if j + 1 < ny {
                        neighbors.push(idx + nx);
                    }
                    for nb in neighbors {
                        if value(margins[nb]) != v {
                            boundary = true;
                            break;
                        }
                    }
                    (v, boundary)
                })
                .collect()
        })
        .collect();
    Ok(RegionMap {
        axes,
        x_range,
        y_range,
        nx,
        ny,
        predicates: predicates.iter().map(Predicate::name).collect(),
        cells,
    })
}

impl RegionMap {
    pub fn cell(&self, pred: usize, i: usize, j: usize) -> (bool, bool) {
        self.cells[pred][j * self.nx + i]
    }

    fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let dx = (self.x_range.hi - self.x_range.lo) / self.nx as f64;
        let dy = (self.y_range.hi - self.y_range.lo) / self.ny as f64;
        (
            self.x_range.lo + (i as f64 + 0.5) * dx,
            self.y_range.lo + (j as f64 + 0.5) * dy,
        )
    }

    /// CSV with columns `x,y,predicate,value,boundary`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,predicate,value,boundary\n");
        for (p, name) in self.predicates.iter().enumerate() {
            for j in 0..self.ny {
                for i in 0..self.nx {
                    let (x, y) = self.center(i, j);
                    let (v, bd) = self.cell(p, i, j);
                    let _ = writeln!(out, "{x},{y},{name},{},{}", v as u8, bd as u8);
                }
            }
        }
        out
    }

    /// Standalone SVG with one layer per predicate; boundary cells are
    /// darkened.
    pub fn to_svg(&self) -> String {
        const COLORS: &[&str] = &[
            "#4878cf", "#6acc64", "#d65f5f", "#b47cc7", "#c4ad66", "#77bedb",
        ];
        let w = 800.0;
        let h = 800.0;
        let cw = w / self.nx as f64;
        let ch = h / self.ny as f64;
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        for (p, name) in self.predicates.iter().enumerate() {
            let color = COLORS[p % COLORS.len()];
            let _ = writeln!(out, r#"<g id="{name}" fill="{color}" fill-opacity="0.45">"#);
            for j in 0..self.ny {
                // merge runs of equal cells along the row
                let mut i = 0;
                while i < self.nx {
                    let (v, bd) = self.cell(p, i, j);
                    if !v {
                        i += 1;
                        continue;
                    }
                    let mut end = i + 1;
                    while end < self.nx && self.cell(p, end, j) == (v, bd) {
                        end += 1;
                    }
                    // SVG y axis points down; flip rows
                    let px = i as f64 * cw;
                    let py = (self.ny - 1 - j) as f64 * ch;
                    let rw = (end - i) as f64 * cw;
                    if bd {
                        let _ = writeln!(
                            out,
                            r#"<rect x="{px:.2}" y="{py:.2}" width="{rw:.2}" height="{ch:.2}" fill-opacity="0.9"/>"#
                        );
                    } else {
                        let _ = writeln!(
                            out,
                            r#"<rect x="{px:.2}" y="{py:.2}" width="{rw:.2}" height="{ch:.2}"/>"#
                        );
                    }
                    i = end;
                }
            }
            let _ = writeln!(out, "</g>");
        }
        let _ = writeln!(out, "</svg>");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_requests() {
        let r = AxisRange { lo: 0.0, hi: 1.0 };
        assert!(matches!(
            rasterize(&[], Axes::NuB, r, r, 10, 10),
            Err(AtlasError::BadRange(_))
        ));
        assert!(matches!(
            rasterize(&[Predicate::DispersionLike], Axes::NuB, r, r, 1, 10),
            Err(AtlasError::BadRange(_))
        ));
        assert!(matches!(
            rasterize(
                &[Predicate::DispersionLike],
                Axes::NuB,
                AxisRange { lo: 1.0, hi: 0.0 },
                r,
                10,
                10
            ),
            Err(AtlasError::BadRange(_))
        ));
    }

    #[test]
    fn dispersion_like_region_bottoms_at_two_ninths() {
        // the on-region's lowest b at nu = 1/3 must approach 2/9 as the
        // raster refines
        let map = rasterize(
            &[Predicate::DispersionLike],
            Axes::NuB,
            AxisRange { lo: 0.0, hi: 1.0 },
            AxisRange {
                lo: 1.0 / 6.0,
                hi: 0.5,
            },
            400,
            400,
        )
        .unwrap();
        // column whose center is nearest nu = 1/3
        let dx = 1.0_f64 / 400.0;
        let col = ((1.0 / 3.0 - 0.5 * dx) / dx).round() as usize;
        let dy = (0.5 - 1.0 / 6.0) / 400.0;
        let mut lowest_on = None;
        for j in 0..400 {
            if map.cell(0, col, j).0 {
                lowest_on = Some(1.0 / 6.0 + (j as f64 + 0.5) * dy);
                break;
            }
        }
        let lowest = lowest_on.expect("region present in the nu = 1/3 column");
        assert!(
            (lowest - 2.0 / 9.0).abs() < 2.0 * dy,
            "lowest on-cell at b = {lowest}"
        );
        // every other column's region must not dip below it
        for i in 0..400 {
            for j in 0..400 {
                if map.cell(0, i, j).0 {
                    let b = 1.0 / 6.0 + (j as f64 + 0.5) * dy;
                    assert!(b >= lowest - 1e-12);
                    break;
                }
            }
        }
    }

    #[test]
    fn refined_region_bottoms_at_three_sixteenths() {
        let map = rasterize(
            &[Predicate::RefinedDispersionLike],
            Axes::NuB,
            AxisRange { lo: 0.32, hi: 0.35 },
            AxisRange { lo: 0.18, hi: 0.20 },
            64,
            256,
        )
        .unwrap();
        let dy = 0.02 / 256.0;
        // nu ~ 1/3 column
        let dx = 0.03_f64 / 64.0;
        let col = ((1.0 / 3.0 - 0.32) / dx - 0.5).round() as usize;
        let mut lowest_on = None;
        for j in 0..256 {
            if map.cell(0, col, j).0 {
                lowest_on = Some(0.18 + (j as f64 + 0.5) * dy);
                break;
            }
        }
        let lowest = lowest_on.unwrap();
        assert!(
            (lowest - 3.0 / 16.0).abs() < 2.0 * dy,
            "boundary at {lowest}"
        );
    }

    #[test]
    fn csv_and_svg_are_deterministic() {
        let map = || {
            rasterize(
                &[Predicate::DispersionLike, Predicate::Ellipse],
                Axes::NuB,
                AxisRange { lo: 0.0, hi: 1.0 },
                AxisRange { lo: 0.17, hi: 0.4 },
                24,
                16,
            )
            .unwrap()
        };
        let a = map();
        let b = map();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_svg(), b.to_svg());
        let csv = a.to_csv();
        assert!(csv.starts_with("x,y,predicate,value,boundary\n"));
        assert_eq!(csv.lines().count(), 1 + 2 * 24 * 16);
    }

    #[test]
    fn ac_axes_at_fixed_b() {
        // at fixed b = 0.25, the symmetric point (-1/12, -1/12) is
        // dispersion-like; points near the origin are not
        let map = rasterize(
            &[Predicate::DispersionLike],
            Axes::AcAtFixedB { b: 0.25 },
            AxisRange {
                lo: -0.4,
                hi: -1e-4,
            },
            AxisRange {
                lo: -0.4,
                hi: -1e-4,
            },
            128,
            128,
        )
        .unwrap();
        let locate = |v: f64, lo: f64, hi: f64, n: usize| -> usize {
            (((v - lo) / (hi - lo)) * n as f64 - 0.5).round() as usize
        };
        let i = locate(-1.0 / 12.0, -0.4, -1e-4, 128);
        assert!(
            map.cell(0, i, i).0,
            "symmetric dispersion-like point not shaded"
        );
        let j = locate(-0.01, -0.4, -1e-4, 128);
        assert!(
            !map.cell(0, j, j).0,
            "near-zero dispersion should not be shaded"
        );
    }
}
