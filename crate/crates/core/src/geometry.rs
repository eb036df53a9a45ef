//! Element layout for a reflecting surface conforming to a cylinder section.
//!
//! The surface wraps a cylinder of radius `R` whose axis runs along the
//! local y direction. Rows index the curved (arc) coordinate, columns the
//! straight axis. Element `(m, n)` sits at
//!
//! ```text
//! x = R (cos psi_m - 1),   y = c_n * d_n,   z = R sin psi_m
//! ```
//!
//! where `psi_m = c_m * delta_psi`, `delta_psi = 2 asin(d_m / 2R)` keeps the
//! chord between vertically adjacent elements exactly `d_m`, and `c_m`, `c_n`
//! are indices centered on the surface midpoint. The apex of the section
//! touches the local origin and the surface bulges toward +x, so +x is the
//! outward normal at the center. A flat panel is the `curvature = 0` limit:
//! `x = 0`, `z = c_m * d_m`.
//!
//! # Example
//!
//! ```
//! use cirs_core::geometry::{CirsParams, build_cylindrical_layout};
//!
//! let params = CirsParams::curved(400, 400, 2.88e-3, 2.88e-3, 8.0, 11.53e-3).unwrap();
//! let layout = build_cylindrical_layout(&params).unwrap();
//! assert_eq!(layout.elements.len(), 160_000);
//! assert!(layout.half_span > 0.07 && layout.half_span < 0.075);
//! ```

use std::io::Write;

use crate::error::{Error, Result};

/// Construction parameters for a cylinder-section surface.
///
/// `curvature` is the reciprocal radius in 1/m; zero selects the flat-panel
/// limit so that no formula ever has to form an infinite radius.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CirsParams {
    /// Element count along the curved coordinate (M).
    pub rows: usize,
    /// Element count along the cylinder axis (N).
    pub cols: usize,
    /// Inter-element chord spacing along the curved coordinate, meters (d_m).
    pub row_spacing: f64,
    /// Inter-element spacing along the axis, meters (d_n).
    pub col_spacing: f64,
    /// Reciprocal cylinder radius 1/R in 1/m; 0 encodes a flat panel.
    pub curvature: f64,
    /// Carrier wavelength, meters.
    pub wavelength: f64,
    /// Phase-center position of the surface in its mounting frame. Element
    /// offsets are expressed relative to this point.
    pub phase_center: [f64; 3],
}

impl CirsParams {
    /// Parameters for a curved section of cylinder radius `radius` meters.
    pub fn curved(
        rows: usize,
        cols: usize,
        row_spacing: f64,
        col_spacing: f64,
        radius: f64,
        wavelength: f64,
    ) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(format!(
                "curvature radius must be finite and positive, got {radius}"
            )));
        }
        let p = CirsParams {
            rows,
            cols,
            row_spacing,
            col_spacing,
            curvature: 1.0 / radius,
            wavelength,
            phase_center: [0.0; 3],
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for a flat panel of the same grid.
    pub fn planar(
        rows: usize,
        cols: usize,
        row_spacing: f64,
        col_spacing: f64,
        wavelength: f64,
    ) -> Result<Self> {
        let p = CirsParams {
            rows,
            cols,
            row_spacing,
            col_spacing,
            curvature: 0.0,
            wavelength,
            phase_center: [0.0; 3],
        };
        p.validate()?;
        Ok(p)
    }

    /// Cylinder radius in meters; infinite for a flat panel.
    pub fn radius(&self) -> f64 {
        if self.curvature == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.curvature
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::invalid(format!(
                "element grid must be non-empty, got {}x{}",
                self.rows, self.cols
            )));
        }
        for (name, v) in [
            ("row_spacing", self.row_spacing),
            ("col_spacing", self.col_spacing),
            ("wavelength", self.wavelength),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if !(self.curvature.is_finite() && self.curvature >= 0.0) {
            return Err(Error::invalid(format!(
                "curvature must be finite and non-negative, got {}",
                self.curvature
            )));
        }
        if !self.phase_center.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("phase_center must be finite".to_string()));
        }
        if self.curvature > 0.0 {
            let half_chord = 0.5 * self.row_spacing * self.curvature;
            if half_chord > 1.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "row spacing {} m exceeds the cylinder diameter {} m",
                    self.row_spacing,
                    2.0 / self.curvature
                )));
            }
            let span = 2.0 * self.rows as f64 * half_chord.asin();
            if span > std::f64::consts::PI {
                return Err(Error::DegenerateGeometry(format!(
                    "requested arc spans {span:.3} rad, more than half the cylinder"
                )));
            }
        }
        Ok(())
    }
}

/// One reflecting element. `m` and `n` are signed centered indices; for even
/// counts they run -M/2 .. M/2-1 and the center falls between the two middle
/// elements, for odd counts the middle element has index 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub m: i64,
    pub n: i64,
    /// Arc angle of the element's row, radians (0 for flat panels).
    pub psi: f64,
    /// Position relative to the surface phase center, meters.
    pub offset: [f64; 3],
}

/// A realized element layout together with its aggregate dimensions.
#[derive(Debug, Clone)]
pub struct CirsLayout {
    pub params: CirsParams,
    /// Elements in row-major order: row `m` varies slowest.
    pub elements: Vec<Element>,
    /// Arc half-span psi_M = M asin(d_m / 2R), radians; 0 for flat panels.
    pub half_span: f64,
    /// Extent along the cylinder axis, N * d_n, meters.
    pub length: f64,
    /// Arc height 2 R psi_M (flat: M * d_m), meters.
    pub height: f64,
    /// Surface area length * height, square meters.
    pub area: f64,
}

impl CirsLayout {
    /// Centered row coordinate for row index `i` (steps of one element).
    fn centered(i: usize, count: usize) -> f64 {
        i as f64 - 0.5 * (count as f64 - 1.0)
    }

    /// Signed element index shown in exports, `i - count/2`.
    fn signed_index(i: usize, count: usize) -> i64 {
        i as i64 - (count / 2) as i64
    }
}

/// Builds the element grid for `params`.
///
/// Adjacent rows are separated by exactly the chord `d_m`; the full surface
/// subtends `2 psi_M` of arc and touches the origin at its apex.
pub fn build_cylindrical_layout(params: &CirsParams) -> Result<CirsLayout> {
    params.validate()?;
    let m_count = params.rows;
    let n_count = params.cols;
    let curved = params.curvature > 0.0;

    let (delta_psi, half_span) = if curved {
        let half_step = (0.5 * params.row_spacing * params.curvature).asin();
        (2.0 * half_step, m_count as f64 * half_step)
    } else {
        (0.0, 0.0)
    };

    let mut elements = Vec::with_capacity(m_count * n_count);
    for mi in 0..m_count {
        let cm = CirsLayout::centered(mi, m_count);
        let (psi, x, z) = if curved {
            let psi = cm * delta_psi;
            let r = 1.0 / params.curvature;
            (psi, r * (psi.cos() - 1.0), r * psi.sin())
        } else {
            (0.0, 0.0, cm * params.row_spacing)
        };
        for ni in 0..n_count {
            let cn = CirsLayout::centered(ni, n_count);
            elements.push(Element {
                m: CirsLayout::signed_index(mi, m_count),
                n: CirsLayout::signed_index(ni, n_count),
                psi,
                offset: [x, cn * params.col_spacing, z],
            });
        }
    }

    let length = n_count as f64 * params.col_spacing;
    let height = if curved {
        2.0 * half_span / params.curvature
    } else {
        m_count as f64 * params.row_spacing
    };
    Ok(CirsLayout {
        params: params.clone(),
        elements,
        half_span,
        length,
        height,
        area: length * height,
    })
}

/// Surface area `L * 2 R psi_M` (flat panels: `L * M d_m`).
pub fn layout_area(layout: &CirsLayout) -> f64 {
    layout.area
}

/// Writes the layout as CSV with columns `m,n,psi_rad,x_m,y_m,z_m` at nine
/// significant digits.
pub fn write_layout_csv<W: Write>(layout: &CirsLayout, out: &mut W) -> std::io::Result<()> {
    writeln!(out, "m,n,psi_rad,x_m,y_m,z_m")?;
    for e in &layout.elements {
        writeln!(
            out,
            "{},{},{:.8e},{:.8e},{:.8e},{:.8e}",
            e.m, e.n, e.psi, e.offset[0], e.offset[1], e.offset[2]
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const WAVELENGTH_26GHZ: f64 = 11.530e-3;

    fn assert_close(got: f64, expected: f64, tol: f64, what: &str) {
        assert!(
            (got - expected).abs() <= tol,
            "{what}: got {got}, expected {expected} within {tol}"
        );
    }

    #[test]
    fn planar_two_by_two_offsets() {
        let params = CirsParams::planar(2, 2, 1e-3, 1e-3, WAVELENGTH_26GHZ).unwrap();
        let layout = build_cylindrical_layout(&params).unwrap();
        assert_eq!(layout.elements.len(), 4);
        let offsets: Vec<[f64; 3]> = layout.elements.iter().map(|e| e.offset).collect();
        assert_eq!(offsets[0], [0.0, -0.5e-3, -0.5e-3]);
        assert_eq!(offsets[1], [0.0, 0.5e-3, -0.5e-3]);
        assert_eq!(offsets[2], [0.0, -0.5e-3, 0.5e-3]);
        assert_eq!(offsets[3], [0.0, 0.5e-3, 0.5e-3]);
        assert_eq!(layout.elements[0].m, -1);
        assert_eq!(layout.elements[3].m, 0);
        assert_eq!(layout.half_span, 0.0);
    }

    #[test]
    fn vehicle_scale_half_span_and_area() {
        // 400 rows at quarter-wavelength pitch on an 8 m cylinder.
        let d = WAVELENGTH_26GHZ / 4.0;
        let params = CirsParams::curved(400, 400, d, d, 8.0, WAVELENGTH_26GHZ).unwrap();
        let layout = build_cylindrical_layout(&params).unwrap();
        let expected_half_span = 400.0 * (d / 16.0).asin();
        assert_close(layout.half_span, expected_half_span, 1e-12, "half span");
        assert_close(layout.half_span, 0.07206, 5e-5, "half span magnitude");
        assert_close(layout.height, 16.0 * expected_half_span, 1e-12, "arc height");
        assert_close(layout.height, 1.153, 1e-3, "arc height magnitude");
        assert_close(layout_area(&layout), 1.330, 2e-3, "area");
    }

    #[test]
    fn chamber_scale_half_span_and_area() {
        // 37 rows over 0.2 m of arc on a 0.3 m cylinder, 27 columns over 0.2 m.
        let params = CirsParams::curved(37, 27, 0.2 / 37.0, 0.2 / 27.0, 0.3, WAVELENGTH_26GHZ).unwrap();
        let layout = build_cylindrical_layout(&params).unwrap();
        assert_eq!(layout.elements.len(), 999);
        assert_close(layout.half_span, 0.3333, 2e-4, "half span");
        assert_close(layout_area(&layout), 0.04, 1e-4, "area");
        assert_close(layout.length, 0.2, 1e-12, "length");
    }

    #[test]
    fn planar_unit_area() {
        let params = CirsParams::planar(10, 10, 0.1, 0.1, WAVELENGTH_26GHZ).unwrap();
        let layout = build_cylindrical_layout(&params).unwrap();
        assert_close(layout_area(&layout), 1.0, 1e-12, "area");
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(CirsParams::curved(4, 4, 0.5, 0.01, 0.1, WAVELENGTH_26GHZ).is_err(), "pitch > diameter");
        assert!(CirsParams::curved(4, 4, -0.01, 0.01, 1.0, WAVELENGTH_26GHZ).is_err(), "negative pitch");
        assert!(CirsParams::planar(0, 4, 0.01, 0.01, WAVELENGTH_26GHZ).is_err(), "zero rows");
        assert!(CirsParams::curved(4, 4, 0.01, 0.01, 1.0, 0.0).is_err(), "zero wavelength");
        // 2000 elements of 1 mm chord around a 0.3 m cylinder exceed half a turn.
        assert!(CirsParams::curved(2000, 4, 1e-3, 1e-3, 0.3, WAVELENGTH_26GHZ).is_err(), "arc span > pi");
    }

    #[test]
    fn csv_export_shape_and_precision() {
        let params = CirsParams::curved(2, 3, 1e-3, 1e-3, 0.5, WAVELENGTH_26GHZ).unwrap();
        let layout = build_cylindrical_layout(&params).unwrap();
        let mut buf = Vec::new();
        write_layout_csv(&layout, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "m,n,psi_rad,x_m,y_m,z_m");
        assert_eq!(lines.len(), 1 + 6);
        // nine significant digits: mantissa with eight decimals
        assert!(lines[1].contains("e-"), "expected scientific notation: {}", lines[1]);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0], "-1");
        assert_eq!(first[1], "-1");
        let mantissa = first[3].split('e').next().unwrap();
        let decimals = mantissa.split('.').nth(1).unwrap();
        assert_eq!(decimals.len(), 8, "eight decimals after the leading digit");
    }

    proptest! {
        #[test]
        fn chord_between_adjacent_rows_is_row_spacing(
            rows in 2usize..32,
            cols in 1usize..4,
            radius in 0.1f64..20.0,
            pitch_frac in 0.01f64..0.2,
        ) {
            // keep the arc under half a turn
            let pitch = (pitch_frac * radius).min(2.0 * radius * (0.45 * std::f64::consts::PI / rows as f64).sin());
            let params = CirsParams::curved(rows, cols, pitch, 1e-2, radius, WAVELENGTH_26GHZ).unwrap();
            let layout = build_cylindrical_layout(&params).unwrap();
            for w in layout.elements.chunks(cols).collect::<Vec<_>>().windows(2) {
                let a = w[0][0].offset;
                let b = w[1][0].offset;
                let chord = ((a[0] - b[0]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
                prop_assert!((chord - pitch).abs() <= 1e-9 * pitch,
                    "chord {chord} differs from pitch {pitch}");
            }
        }

        #[test]
        fn elements_lie_on_the_cylinder(
            rows in 1usize..24,
            radius in 0.1f64..20.0,
        ) {
            let pitch = radius * 0.05;
            let params = CirsParams::curved(rows, 2, pitch, 1e-2, radius, WAVELENGTH_26GHZ).unwrap();
            let layout = build_cylindrical_layout(&params).unwrap();
            for e in &layout.elements {
                let dx = e.offset[0] + radius;
                let r = (dx * dx + e.offset[2] * e.offset[2]).sqrt();
                prop_assert!((r - radius).abs() <= 1e-9 * radius);
                prop_assert!(e.offset[0] <= 1e-12, "surface must not cross its apex plane");
            }
        }

        #[test]
        fn even_row_layouts_are_mirror_symmetric(
            half_rows in 1usize..12,
            cols in 1usize..4,
            radius in 0.1f64..20.0,
        ) {
            let rows = 2 * half_rows;
            let pitch = radius * 0.02;
            let params = CirsParams::curved(rows, cols, pitch, 1e-2, radius, WAVELENGTH_26GHZ).unwrap();
            let layout = build_cylindrical_layout(&params).unwrap();
            for mi in 0..rows {
                let mirror = rows - 1 - mi;
                for ni in 0..cols {
                    let a = layout.elements[mi * cols + ni];
                    let b = layout.elements[mirror * cols + ni];
                    prop_assert_eq!(a.m, -(b.m + 1));
                    prop_assert!((a.offset[0] - b.offset[0]).abs() <= 1e-15);
                    prop_assert!((a.offset[2] + b.offset[2]).abs() <= 1e-12);
                    prop_assert!((a.offset[1] - b.offset[1]).abs() <= 1e-15);
                }
            }
        }

        #[test]
        fn huge_radius_converges_to_planar(
            rows in 1usize..16,
            cols in 1usize..16,
        ) {
            let pitch = 5e-3;
            let curved = build_cylindrical_layout(
                &CirsParams::curved(rows, cols, pitch, pitch, 1e9, WAVELENGTH_26GHZ).unwrap()).unwrap();
            let flat = build_cylindrical_layout(
                &CirsParams::planar(rows, cols, pitch, pitch, WAVELENGTH_26GHZ).unwrap()).unwrap();
            for (a, b) in curved.elements.iter().zip(flat.elements.iter()) {
                for k in 0..3 {
                    prop_assert!((a.offset[k] - b.offset[k]).abs() <= 1e-6);
                }
            }
        }

        #[test]
        fn column_offsets_do_not_depend_on_row(
            rows in 2usize..8,
            cols in 2usize..8,
        ) {
            let params = CirsParams::curved(rows, cols, 4e-3, 6e-3, 0.4, WAVELENGTH_26GHZ).unwrap();
            let layout = build_cylindrical_layout(&params).unwrap();
            for mi in 0..rows {
                for ni in 0..cols {
                    let e = layout.elements[mi * cols + ni];
                    let first_row = layout.elements[ni];
                    prop_assert_eq!(e.offset[1], first_row.offset[1]);
                    let first_col = layout.elements[mi * cols];
                    prop_assert_eq!(e.offset[0], first_col.offset[0]);
                    prop_assert_eq!(e.offset[2], first_col.offset[2]);
                }
            }
        }
    }
}
