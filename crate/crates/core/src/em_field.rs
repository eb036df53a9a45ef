//! Scattered-field sums over a reflecting surface.
//!
//! Directions follow the phase-design convention: unit vectors point from
//! the surface toward the terminals, so an element at offset `p` accumulates
//! the propagation phase `+k <p, u_in + u_out>` relative to the surface
//! phase center (both hop lengths shrink by the projection of `p` onto the
//! respective direction). A profile from `phase_general` at the same
//! direction pair therefore cancels every element's propagation phase and
//! the aperture sum peaks at exactly `M * N`.
//!
//! `fresnel_field` keeps the exact spherical distances instead of the
//! plane-wave projection, which is what a bench measurement at a couple of
//! meters actually probes.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{build_cylindrical_layout, CirsLayout, CirsParams};
use crate::phase_design::{
    direction_unit, phase_cylindrical_mirror, zero_reference, AngleSpec, PhaseProfile,
};

/// Plane-wave response of the surface toward `(theta, phi)`: entry
/// `exp(-j k <offset, u>)` per element, in layout order.
pub fn surface_response(layout: &CirsLayout, theta: f64, phi: f64) -> Vec<Complex64> {
    let u = direction_unit(theta, phi);
    let k = TAU / layout.params.wavelength;
    layout
        .elements
        .iter()
        .map(|e| {
            let proj = e.offset[0] * u[0] + e.offset[1] * u[1] + e.offset[2] * u[2];
            Complex64::cis(-k * proj)
        })
        .collect()
}

fn check_profile(layout: &CirsLayout, profile: &PhaseProfile) -> Result<()> {
    if profile.rows() != layout.params.rows || profile.cols() != layout.params.cols {
        return Err(Error::invalid(format!(
            "profile grid {}x{} does not match layout {}x{}",
            profile.rows(),
            profile.cols(),
            layout.params.rows,
            layout.params.cols
        )));
    }
    Ok(())
}

/// Coherent aperture gain of the configured surface between a plane-wave
/// pair: `g = sum exp(j Phi) exp(j k <p, u_in + u_out>)`. `|g| <= M N`,
/// with equality when `Phi` compensates the pair exactly.
///
/// Separable profiles (per-row plus per-column) factor the double sum into
/// a row sum times a column sum; the result is the same, at `O(M + N)` cost.
pub fn cascaded_gain(
    layout: &CirsLayout,
    profile: &PhaseProfile,
    angles: &AngleSpec,
) -> Result<Complex64> {
    check_profile(layout, profile)?;
    angles.validate()?;
    let ui = angles.unit_in();
    let uo = angles.unit_out();
    let a = [ui[0] + uo[0], ui[1] + uo[1], ui[2] + uo[2]];
    let k = TAU / layout.params.wavelength;
    let cols = layout.params.cols;

    if let Some((row, col)) = profile.separable_parts() {
        let mut row_sum = Complex64::new(0.0, 0.0);
        for (mi, rp) in row.iter().enumerate() {
            let off = layout.elements[mi * cols].offset;
            row_sum += Complex64::cis(rp + k * (off[0] * a[0] + off[2] * a[2]));
        }
        let mut col_sum = Complex64::new(0.0, 0.0);
        for (ni, cp) in col.iter().enumerate() {
            col_sum += Complex64::cis(cp + k * (layout.elements[ni].offset[1] * a[1]));
        }
        return Ok(row_sum * col_sum);
    }

    let mut sum = Complex64::new(0.0, 0.0);
    for (i, e) in layout.elements.iter().enumerate() {
        let proj = e.offset[0] * a[0] + e.offset[1] * a[1] + e.offset[2] * a[2];
        sum += Complex64::cis(profile.unwrapped(i) + k * proj);
    }
    Ok(sum)
}

/// Scattered field at `p_rx` for a transmitter at `p_tx`, both at finite
/// distance: `sum (4 pi r1 r2)^-1 exp(j Phi) exp(-j k (r1 + r2))` with the
/// exact per-element spherical distances. Positions share the frame of the
/// layout's phase center.
pub fn fresnel_field(
    layout: &CirsLayout,
    profile: &PhaseProfile,
    p_tx: [f64; 3],
    p_rx: [f64; 3],
) -> Result<Complex64> {
    check_profile(layout, profile)?;
    let k = TAU / layout.params.wavelength;
    let center = layout.params.phase_center;
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, e) in layout.elements.iter().enumerate() {
        let pos = [
            center[0] + e.offset[0],
            center[1] + e.offset[1],
            center[2] + e.offset[2],
        ];
        let r1 = distance(p_tx, pos);
        let r2 = distance(p_rx, pos);
        if r1 < 1e-9 || r2 < 1e-9 {
            return Err(Error::DegenerateGeometry(format!(
                "terminal coincides with element {i} of the surface"
            )));
        }
        let amp = 1.0 / (4.0 * std::f64::consts::PI * r1 * r2);
        sum += amp * Complex64::cis(profile.unwrapped(i) - k * (r1 + r2));
    }
    Ok(sum)
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Bench sweep setup: a curved section illuminated from a fixed transmitter
/// while a receiver slides along a straight rail in the curvature plane.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ChamberConfig {
    /// Cylinder radius of the section under test, meters.
    pub radius: f64,
    /// Element rows along the arc.
    pub rows: usize,
    /// Element columns along the cylinder axis.
    pub cols: usize,
    /// Arc extent covered by the rows, meters.
    pub arc_height: f64,
    /// Axial extent covered by the columns, meters.
    pub length: f64,
    pub wavelength: f64,
    /// Transmitter distance from the surface center, meters.
    pub tx_distance: f64,
    /// Transmitter angle from broadside within the curvature plane, radians.
    pub tx_angle: f64,
    /// Rail distance from the surface center, meters.
    pub rx_distance: f64,
    /// Rail length; the receiver slides over `+/- rx_extent / 2`, meters.
    pub rx_extent: f64,
    /// Number of evenly spaced rail positions.
    pub sweep_points: usize,
    /// Design azimuth of the mirror profile under test, radians.
    pub theta_bar: f64,
}

impl Default for ChamberConfig {
    /// The 999-element, 26 GHz bench: a 20 x 20 cm section of a 0.3 m
    /// cylinder, terminals at 1.5 m, receiver swept over a 1 m rail
    /// (about +/- 18 degrees from broadside).
    fn default() -> Self {
        ChamberConfig {
            radius: 0.3,
            rows: 37,
            cols: 27,
            arc_height: 0.2,
            length: 0.2,
            wavelength: crate::SPEED_OF_LIGHT / 26e9,
            tx_distance: 1.5,
            tx_angle: 0.0,
            rx_distance: 1.5,
            rx_extent: 1.0,
            sweep_points: 201,
            theta_bar: 0.0,
        }
    }
}

impl ChamberConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radius", self.radius),
            ("arc_height", self.arc_height),
            ("length", self.length),
            ("wavelength", self.wavelength),
            ("tx_distance", self.tx_distance),
            ("rx_distance", self.rx_distance),
            ("rx_extent", self.rx_extent),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "chamber {name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::invalid("chamber grid must be non-empty".to_string()));
        }
        if self.sweep_points == 0 {
            return Err(Error::invalid(
                "chamber sweep needs at least one point".to_string(),
            ));
        }
        if !self.tx_angle.is_finite() || !self.theta_bar.is_finite() {
            return Err(Error::invalid("chamber angles must be finite".to_string()));
        }
        Ok(())
    }

    /// Element layout implied by the bench dimensions.
    pub fn layout(&self) -> Result<CirsLayout> {
        let params = CirsParams::curved(
            self.rows,
            self.cols,
            self.arc_height / self.rows as f64,
            self.length / self.cols as f64,
            self.radius,
            self.wavelength,
        )?;
        build_cylindrical_layout(&params)
    }
}

/// One measured rail sweep: receiver angle from broadside and field level,
/// both normalized to the unpatterned surface's peak.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSweep {
    pub angles: Vec<f64>,
    pub level_db: Vec<f64>,
}

/// Reference (zero-phase) and patterned sweeps of the same bench.
#[derive(Debug, Clone, PartialEq)]
pub struct ChamberSweep {
    pub reference: PatternSweep,
    pub patterned: PatternSweep,
}

/// Runs the bench: sweeps the receiver once over the bare surface and once
/// over the mirror-configured one. Both traces are normalized so the bare
/// surface peaks at 0 dB.
pub fn chamber_sweep(cfg: &ChamberConfig) -> Result<ChamberSweep> {
    cfg.validate()?;
    let layout = cfg.layout()?;
    let reference_profile = zero_reference(&layout);
    let patterned_profile = phase_cylindrical_mirror(&layout, cfg.theta_bar)?;
    let p_tx = [
        cfg.tx_distance * cfg.tx_angle.cos(),
        0.0,
        cfg.tx_distance * cfg.tx_angle.sin(),
    ];

    let n = cfg.sweep_points;
    let mut angles = Vec::with_capacity(n);
    let mut ref_raw = Vec::with_capacity(n);
    let mut pat_raw = Vec::with_capacity(n);
    for i in 0..n {
        // single-point sweeps sample the rail center
        let t = if n == 1 {
            0.0
        } else {
            -0.5 * cfg.rx_extent + cfg.rx_extent * i as f64 / (n - 1) as f64
        };
        let p_rx = [cfg.rx_distance, 0.0, t];
        angles.push(t.atan2(cfg.rx_distance));
        ref_raw.push(db20(fresnel_field(&layout, &reference_profile, p_tx, p_rx)?.norm()));
        pat_raw.push(db20(fresnel_field(&layout, &patterned_profile, p_tx, p_rx)?.norm()));
    }

    let ref_max = ref_raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(ChamberSweep {
        reference: PatternSweep {
            angles: angles.clone(),
            level_db: ref_raw.iter().map(|v| v - ref_max).collect(),
        },
        patterned: PatternSweep {
            angles,
            level_db: pat_raw.iter().map(|v| v - ref_max).collect(),
        },
    })
}

/// Peak of the patterned trace over the peak of the reference trace, dB.
pub fn focusing_gain_db(sweep: &ChamberSweep) -> f64 {
    let peak = |s: &PatternSweep| s.level_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    peak(&sweep.patterned) - peak(&sweep.reference)
}

/// Angular width of the main lobe at 3 dB below its peak, with linear
/// interpolation between samples. When the trace never falls 3 dB below its
/// peak inside the window, the full window width is returned (a lower bound
/// on the true width).
pub fn half_power_width_rad(sweep: &PatternSweep) -> f64 {
    let peak_idx = sweep
        .level_db
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let threshold = sweep.level_db[peak_idx] - 3.0;

    let cross = |range: &mut dyn Iterator<Item = usize>, fallback: f64| -> f64 {
        let mut prev = peak_idx;
        for i in range {
            if sweep.level_db[i] <= threshold {
                let (a0, a1) = (sweep.angles[prev], sweep.angles[i]);
                let (l0, l1) = (sweep.level_db[prev], sweep.level_db[i]);
                let frac = if (l1 - l0).abs() < 1e-30 { 0.5 } else { (threshold - l0) / (l1 - l0) };
                return a0 + frac * (a1 - a0);
            }
            prev = i;
        }
        fallback
    };

    let left = cross(&mut (0..peak_idx).rev(), sweep.angles[0]);
    let right = cross(&mut (peak_idx + 1..sweep.angles.len()), *sweep.angles.last().unwrap());
    right - left
}

fn db20(x: f64) -> f64 {
    20.0 * x.log10()
}

// ---------------------------------------------------------------------------
