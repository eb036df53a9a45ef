//! Narrowband link model: free-space pathloss, per-binary-blocker
//! penetration loss, uniform linear arrays at both vehicles, and rank-one
//! propagation paths (direct or bounced off a mounted surface).
//!
//! Arrays lie along the road axis (`y`), so steering angles are taken
//! against that axis. Each path carries a complex amplitude plus a
//! departure and an arrival angle; a channel realization is a sum of such
//! outer products, evaluated lazily against beam vectors.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;

use crate::em_field::cascaded_gain;
use crate::error::{Error, Result};
use crate::geometry::CirsLayout;
use crate::phase_design::{AngleSpec, PhaseProfile};

/// Per-antenna element pattern at both vehicles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainModel {
    /// Unit gain everywhere.
    Isotropic,
    /// `cos(angle)` toward the link, floored at zero behind the array.
    Cosine,
}

impl GainModel {
    fn amplitude(self, angle: f64) -> f64 {
        match self {
            GainModel::Isotropic => 1.0,
            GainModel::Cosine => angle.cos().max(0.0),
        }
    }
}

/// What to do when a bounce hop is shorter than the far-field guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FarFieldPolicy {
    /// Refuse the path.
    Strict,
    /// Model it anyway with the plane-wave sum.
    Proceed,
}

/// Link-budget constants shared by every path in a drop.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LinkParams {
    pub wavelength: f64,
    /// Antennas per vehicle array.
    pub antennas: usize,
    /// Array element pitch, meters.
    pub antenna_spacing: f64,
    pub tx_power_dbm: f64,
    pub noise_power_dbm: f64,
    /// Penetration loss per blocking vehicle, dB.
    pub blocker_loss_db: f64,
    pub element_gain: GainModel,
    /// Shortest hop length the bounce model accepts, meters.
    pub min_hop_distance: f64,
    pub far_field: FarFieldPolicy,
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::invalid(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if self.antennas == 0 {
            return Err(Error::invalid("arrays need at least one antenna".to_string()));
        }
        if !(self.antenna_spacing.is_finite() && self.antenna_spacing > 0.0) {
            return Err(Error::invalid(format!(
                "antenna spacing must be positive, got {}",
                self.antenna_spacing
            )));
        }
        if !self.tx_power_dbm.is_finite() || !self.noise_power_dbm.is_finite() {
            return Err(Error::invalid("power levels must be finite".to_string()));
        }
        if !(self.blocker_loss_db.is_finite() && self.blocker_loss_db >= 0.0) {
            return Err(Error::invalid(format!(
                "blocker loss must be non-negative, got {}",
                self.blocker_loss_db
            )));
        }
        if !(self.min_hop_distance.is_finite() && self.min_hop_distance >= 0.0) {
            return Err(Error::invalid(format!(
                "far-field guard must be non-negative, got {}",
                self.min_hop_distance
            )));
        }
        Ok(())
    }
}

/// Free-space amplitude `lambda / (4 pi d)`.
pub fn fspl_amplitude(distance: f64, wavelength: f64) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::DegenerateGeometry(format!(
            "pathloss needs a positive distance, got {distance}"
        )));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::invalid(format!(
            "pathloss needs a positive wavelength, got {wavelength}"
        )));
    }
    Ok(wavelength / (4.0 * PI * distance))
}

/// `20 log10` of a field amplitude.
pub fn amplitude_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

/// Steering vector of a `count`-element line array: entry
/// `exp(-j 2 pi / lambda * i * spacing * sin(angle))`.
pub fn ula_steering(count: usize, spacing: f64, wavelength: f64, angle: f64) -> Vec<Complex64> {
    let step = -TAU / wavelength * spacing * angle.sin();
    (0..count).map(|i| Complex64::cis(step * i as f64)).collect()
}

/// Angle of `to - from` against the array axis (`y`), as seen from `from`.
pub fn steering_angle(from: [f64; 3], to: [f64; 3]) -> Result<f64> {
    let d = dist(from, to);
    if d < 1e-12 {
        return Err(Error::DegenerateGeometry(
            "steering angle of a zero-length link".to_string(),
        ));
    }
    Ok(((to[1] - from[1]) / d).clamp(-1.0, 1.0).asin())
}

/// One propagation path: complex amplitude plus departure and arrival
/// steering angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankOnePath {
    pub amplitude: Complex64,
    pub aod: f64,
    pub aoa: f64,
}

/// Line-of-sight path between the two arrays with `blockers` vehicles in
/// the way. The phase is drawn uniformly.
pub fn direct_channel(
    p_tx: [f64; 3],
    p_rx: [f64; 3],
    blockers: usize,
    params: &LinkParams,
    rng: &mut impl Rng,
) -> Result<RankOnePath> {
    params.validate()?;
    let d = dist(p_tx, p_rx);
    let fspl = fspl_amplitude(d, params.wavelength)?;
    let aod = steering_angle(p_tx, p_rx)?;
    let aoa = steering_angle(p_rx, p_tx)?;
    let block = 10f64.powf(-(blockers as f64) * params.blocker_loss_db / 20.0);
    let gain = params.element_gain.amplitude(aod) * params.element_gain.amplitude(aoa);
    let phase = rng.gen_range(-PI..PI);
    Ok(RankOnePath {
        amplitude: fspl * block * gain * Complex64::cis(phase),
        aod,
        aoa,
    })
}

/// Which way a mounted surface looks along `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Facing {
    PositiveX,
    NegativeX,
}

impl Facing {
    pub fn sign(self) -> f64 {
        match self {
            Facing::PositiveX => 1.0,
            Facing::NegativeX => -1.0,
        }
    }
}

/// A configured surface mounted somewhere in the scene.
#[derive(Debug, Clone)]
pub struct PlacedSurface<'a> {
    pub layout: &'a CirsLayout,
    pub profile: &'a PhaseProfile,
    /// Phase-center position in scene coordinates.
    pub position: [f64; 3],
    pub facing: Facing,
}

/// Direction angles of `point` as seen from a surface at `position` looking
/// along `facing`: azimuth from the outward normal within the ground plane,
/// elevation from the vertical.
pub fn local_angles(position: [f64; 3], facing: Facing, point: [f64; 3]) -> Result<(f64, f64)> {
    let s = facing.sign();
    let lx = s * (point[0] - position[0]);
    let ly = s * (point[1] - position[1]);
    let lz = point[2] - position[2];
    let r = (lx * lx + ly * ly + lz * lz).sqrt();
    if r < 1e-12 {
        return Err(Error::DegenerateGeometry(
            "terminal sits on the surface phase center".to_string(),
        ));
    }
    Ok((ly.atan2(lx), (lz / r).clamp(-1.0, 1.0).acos()))
}

/// Bounce path through a mounted surface: pathloss over both hops, the
/// element aperture gain `4 pi dm dn / lambda^2`, per-blocker penetration
/// on each hop, and the coherent aperture sum at the true local angles.
pub fn cascaded_channel(
    p_tx: [f64; 3],
    p_rx: [f64; 3],
    surface: &PlacedSurface,
    blockers_in: usize,
    blockers_out: usize,
    params: &LinkParams,
    rng: &mut impl Rng,
) -> Result<RankOnePath> {
    params.validate()?;
    if (surface.layout.params.wavelength - params.wavelength).abs()
        > 1e-9 * params.wavelength
    {
        return Err(Error::invalid(format!(
            "surface designed for wavelength {} used on a {} link",
            surface.layout.params.wavelength, params.wavelength
        )));
    }
    let r1 = dist(p_tx, surface.position);
    let r2 = dist(p_rx, surface.position);
    let short = r1.min(r2);
    if short < params.min_hop_distance {
        match params.far_field {
            FarFieldPolicy::Strict => {
                return Err(Error::NearField {
                    distance_m: short,
                    limit_m: params.min_hop_distance,
                })
            }
            FarFieldPolicy::Proceed => {}
        }
    }

    let (theta_in, phi_in) = local_angles(surface.position, surface.facing, p_tx)?;
    let (theta_out, phi_out) = local_angles(surface.position, surface.facing, p_rx)?;
    let angles = AngleSpec::new(theta_in, phi_in, theta_out, phi_out)?;
    let g = cascaded_gain(surface.layout, surface.profile, &angles)?;

    let p = &surface.layout.params;
    let aperture = 4.0 * PI * p.row_spacing * p.col_spacing / (p.wavelength * p.wavelength);
    let fspl = fspl_amplitude(r1, params.wavelength)? * fspl_amplitude(r2, params.wavelength)?;
    let block = 10f64
        .powf(-((blockers_in + blockers_out) as f64) * params.blocker_loss_db / 20.0);

    let aod = steering_angle(p_tx, surface.position)?;
    let aoa = steering_angle(p_rx, surface.position)?;
    let gain = params.element_gain.amplitude(aod) * params.element_gain.amplitude(aoa);
    let phase = rng.gen_range(-PI..PI);
    Ok(RankOnePath {
        amplitude: fspl * aperture * block * gain * g * Complex64::cis(phase),
        aod,
        aoa,
    })
}

/// Sum of rank-one paths between the two arrays. `paths[0]` is the direct
/// path by convention; the order never affects the sum.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub antennas: usize,
    pub antenna_spacing: f64,
    pub wavelength: f64,
    pub paths: Vec<RankOnePath>,
}

/// Bundles a direct path and any bounce paths into one realization.
pub fn composite_channel(
    params: &LinkParams,
    direct: RankOnePath,
    bounced: Vec<RankOnePath>,
) -> ChannelRealization {
    let mut paths = Vec::with_capacity(1 + bounced.len());
    paths.push(direct);
    paths.extend(bounced);
    ChannelRealization {
        antennas: params.antennas,
        antenna_spacing: params.antenna_spacing,
        wavelength: params.wavelength,
        paths,
    }
}

impl ChannelRealization {
    /// Receive-side steering vector toward `angle`.
    pub fn rx_steering(&self, angle: f64) -> Vec<Complex64> {
        ula_steering(self.antennas, self.antenna_spacing, self.wavelength, angle)
    }

    /// Transmit-side steering vector toward `angle`.
    pub fn tx_steering(&self, angle: f64) -> Vec<Complex64> {
        ula_steering(self.antennas, self.antenna_spacing, self.wavelength, angle)
    }

    /// `w^H H f` without forming the `K x K` matrix:
    /// `sum_t amp_t (w^H a_rx(aoa_t)) (a_tx(aod_t)^H f)`.
    pub fn bilinear(&self, w: &[Complex64], f: &[Complex64]) -> Complex64 {
        debug_assert_eq!(w.len(), self.antennas);
        debug_assert_eq!(f.len(), self.antennas);
        let mut total = Complex64::new(0.0, 0.0);
        for path in &self.paths {
            let a_rx = self.rx_steering(path.aoa);
            let a_tx = self.tx_steering(path.aod);
            let rx_in = inner(w, &a_rx);
            let tx_in = inner(&a_tx, f);
            total += path.amplitude * rx_in * tx_in;
        }
        total
    }
}

/// `sum conj(a_i) b_i`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Post-combining signal-to-noise ratio in dB for a beamformed link value
/// `|w^H H f|`, with transmit power split across the array and unit-norm
/// combining absorbed into the `1/K` factor.
pub fn snr_db(params: &LinkParams, bilinear_magnitude: f64) -> f64 {
    params.tx_power_dbm - params.noise_power_dbm + 20.0 * bilinear_magnitude.log10()
        - 10.0 * (params.antennas as f64).log10()
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

// ---------------------------------------------------------------------------
