//! Element phase configurations for anomalous reflection.
//!
//! Two designers are provided. The general one aims an incident plane wave
//! from direction `(theta_i, phi_i)` toward `(theta_o, phi_o)`, with
//! azimuth `theta` measured from the surface normal in the horizontal plane
//! and elevation `phi` measured from the vertical axis (`phi = 90 deg` is
//! grazing-horizontal). Writing `u(theta, phi) = (cos theta sin phi,
//! sin theta sin phi, cos phi)` for the unit vector toward a terminal, the
//! element at offset `p` gets
//!
//! ```text
//! Phi = -(2 pi / lambda) <p, u_in + u_out>
//! ```
//!
//! which cancels the total path-length modulation across the aperture.
//! The cylindrical-mirror designer is the closed form of the same rule for
//! a specular pair at azimuth `theta_bar` in the curvature plane:
//!
//! ```text
//! Phi_m = -(4 pi R / lambda) (cos psi_m - 1) cos theta_bar
//! ```
//!
//! It depends only on the row angle `psi_m`, flattening the curved section
//! into an equivalent planar mirror. Profiles are kept unwrapped; wrapped
//! values in `(-pi, pi]` are produced on demand and in exports.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::CirsLayout;

/// Incident and outgoing propagation directions for the general designer.
/// Azimuths lie in `[-pi, pi]`, elevations in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSpec {
    pub theta_in: f64,
    pub phi_in: f64,
    pub theta_out: f64,
    pub phi_out: f64,
}

impl AngleSpec {
    pub fn new(theta_in: f64, phi_in: f64, theta_out: f64, phi_out: f64) -> Result<Self> {
        let spec = AngleSpec { theta_in, phi_in, theta_out, phi_out };
        spec.validate()?;
        Ok(spec)
    }

    /// The specular pair in the curvature plane served by the cylindrical
    /// mirror design: incidence at `-theta_bar`, departure at `+theta_bar`,
    /// both at horizontal elevation.
    pub fn specular(theta_bar: f64) -> Result<Self> {
        AngleSpec::new(-theta_bar, FRAC_PI_2, theta_bar, FRAC_PI_2)
    }

    /// Swaps the incident and outgoing directions.
    pub fn reversed(&self) -> Self {
        AngleSpec {
            theta_in: self.theta_out,
            phi_in: self.phi_out,
            theta_out: self.theta_in,
            phi_out: self.phi_in,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("theta_in", self.theta_in), ("theta_out", self.theta_out)] {
            if !(v.is_finite() && (-PI..=PI).contains(&v)) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [-pi, pi], got {v}"
                )));
            }
        }
        for (name, v) in [("phi_in", self.phi_in), ("phi_out", self.phi_out)] {
            if !(v.is_finite() && (0.0..=PI).contains(&v)) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, pi], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Unit vector toward the incident terminal.
    pub fn unit_in(&self) -> [f64; 3] {
        direction_unit(self.theta_in, self.phi_in)
    }

    /// Unit vector toward the outgoing terminal.
    pub fn unit_out(&self) -> [f64; 3] {
        direction_unit(self.theta_out, self.phi_out)
    }
}

/// Unit vector for azimuth `theta` (from the surface normal) and elevation
/// `phi` (from vertical).
pub fn direction_unit(theta: f64, phi: f64) -> [f64; 3] {
    let sin_phi = phi.sin();
    [theta.cos() * sin_phi, theta.sin() * sin_phi, phi.cos()]
}

/// Which designer produced a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseSource {
    General,
    CylindricalMirror,
    ZeroReference,
    /// Externally supplied per-element values.
    Custom,
}

impl PhaseSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseSource::General => "general",
            PhaseSource::CylindricalMirror => "cylindrical_mirror",
            PhaseSource::ZeroReference => "zero_reference",
            PhaseSource::Custom => "custom",
        }
    }
}

/// Per-element phases, unwrapped, in the layout's row-major element order.
///
/// Designed profiles separate into a per-row plus a per-column term, which
/// the field sums exploit; quantized or custom profiles carry the full
/// element vector.
#[derive(Debug, Clone)]
pub struct PhaseProfile {
    rows: usize,
    cols: usize,
    source: PhaseSource,
    repr: Repr,
}

#[derive(Debug, Clone)]
enum Repr {
    Separable { row: Vec<f64>, col: Vec<f64> },
    Full(Vec<f64>),
}

impl PhaseProfile {
    /// Builds a profile from explicit unwrapped per-element values in
    /// row-major order.
    pub fn from_unwrapped(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "phase vector holds {} values for a {}x{} grid",
                values.len(),
                rows,
                cols
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("phases must be finite".to_string()));
        }
        Ok(PhaseProfile { rows, cols, source: PhaseSource::Custom, repr: Repr::Full(values) })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn source(&self) -> PhaseSource {
        self.source
    }

    /// Unwrapped phase of the element at row-major index `idx`.
    pub fn unwrapped(&self, idx: usize) -> f64 {
        match &self.repr {
            Repr::Separable { row, col } => row[idx / self.cols] + col[idx % self.cols],
            Repr::Full(v) => v[idx],
        }
    }

    /// Wrapped phase in `(-pi, pi]` of the element at row-major index `idx`.
    pub fn wrapped(&self, idx: usize) -> f64 {
        wrap_phase(self.unwrapped(idx))
    }

    /// Row/column decomposition when the profile is a sum of a per-row and
    /// a per-column term.
    pub(crate) fn separable_parts(&self) -> Option<(&[f64], &[f64])> {
        match &self.repr {
            Repr::Separable { row, col } => Some((row, col)),
            Repr::Full(_) => None,
        }
    }
}

/// Wraps a phase into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else if r == 0.0 && x.is_sign_negative() {
        // rem_euclid maps negative multiples of 2 pi to -0.0
        0.0
    } else {
        r
    }
}

/// General anomalous-reflection profile for the given direction pair.
pub fn phase_general(layout: &CirsLayout, angles: &AngleSpec) -> Result<PhaseProfile> {
    angles.validate()?;
    let ui = angles.unit_in();
    let uo = angles.unit_out();
    let a = ui[0] + uo[0];
    let b = ui[1] + uo[1];
    let c = ui[2] + uo[2];
    let k = TAU / layout.params.wavelength;
    let cols = layout.params.cols;

    let row: Vec<f64> = (0..layout.params.rows)
        .map(|mi| {
            let off = layout.elements[mi * cols].offset;
            -k * (off[0] * a + off[2] * c)
        })
        .collect();
    let col: Vec<f64> = (0..cols)
        .map(|ni| -k * (layout.elements[ni].offset[1] * b))
        .collect();
    Ok(PhaseProfile {
        rows: layout.params.rows,
        cols,
        source: PhaseSource::General,
        repr: Repr::Separable { row, col },
    })
}

/// Closed-form mirror profile for a specular pair at azimuth `theta_bar` in
/// the curvature plane. Flat layouts get the all-zero profile.
pub fn phase_cylindrical_mirror(layout: &CirsLayout, theta_bar: f64) -> Result<PhaseProfile> {
    if !theta_bar.is_finite() {
        return Err(Error::invalid(format!("theta_bar must be finite, got {theta_bar}")));
    }
    let k = TAU / layout.params.wavelength;
    let cos_bar = theta_bar.cos();
    let cols = layout.params.cols;
    // x_m = R (cos psi_m - 1), so -2 k x_m cos(theta_bar) is the
    // -(4 pi R / lambda)(cos psi_m - 1) cos(theta_bar) mirror rule.
    let row: Vec<f64> = (0..layout.params.rows)
        .map(|mi| -2.0 * k * layout.elements[mi * cols].offset[0] * cos_bar)
        .collect();
    Ok(PhaseProfile {
        rows: layout.params.rows,
        cols,
        source: PhaseSource::CylindricalMirror,
        repr: Repr::Separable { row, col: vec![0.0; cols] },
    })
}

/// The all-zero profile of a bare (unpatterned) surface.
pub fn zero_reference(layout: &CirsLayout) -> PhaseProfile {
    PhaseProfile {
        rows: layout.params.rows,
        cols: layout.params.cols,
        source: PhaseSource::ZeroReference,
        repr: Repr::Separable {
            row: vec![0.0; layout.params.rows],
            col: vec![0.0; layout.params.cols],
        },
    }
}

/// Snaps every wrapped phase to the nearest of `levels` values uniformly
/// spaced in `(-pi, pi]`, grid anchored at 0; ties snap to the lower value.
pub fn quantize_phases(profile: &PhaseProfile, levels: u32) -> Result<PhaseProfile> {
    if levels < 2 {
        return Err(Error::invalid(format!(
            "quantization needs at least 2 levels, got {levels}"
        )));
    }
    let step = TAU / levels as f64;
    let snapped: Vec<f64> = (0..profile.len())
        .map(|i| {
            let w = profile.wrapped(i);
            let k = (w / step - 0.5).ceil();
            wrap_phase(k * step)
        })
        .collect();
    Ok(PhaseProfile {
        rows: profile.rows,
        cols: profile.cols,
        source: profile.source,
        repr: Repr::Full(snapped),
    })
}

/// Writes a profile as CSV with columns `m,n,phi_rad_wrapped,phi_rad_unwrapped`.
pub fn write_phase_csv<W: Write>(
    layout: &CirsLayout,
    profile: &PhaseProfile,
    out: &mut W,
) -> Result<()> {
    if profile.len() != layout.elements.len() {
        return Err(Error::invalid(format!(
            "profile holds {} phases for a layout of {} elements",
            profile.len(),
            layout.elements.len()
        )));
    }
    writeln!(out, "m,n,phi_rad_wrapped,phi_rad_unwrapped")?;
    for (i, e) in layout.elements.iter().enumerate() {
        writeln!(
            out,
            "{},{},{:.8e},{:.8e}",
            e.m,
            e.n,
            profile.wrapped(i),
            profile.unwrapped(i)
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
