//! JSON study configuration. The document is split into sections that
//! mirror the typed configs; every field is optional and a near-empty
//! `{}` reproduces the reference 26 GHz setup: an 8-antenna link over a
//! five-lane highway with a 400 x 400 element surface of 8 m radius
//! designed for an 80 degree mirror.
//!
//! Lengths that track the carrier (antenna pitch, element pitch) default
//! to the usual fractions of the wavelength, so changing
//! `carrier_frequency_hz` rescales them unless they are pinned explicitly.

use serde::Deserialize;

use crate::channel::{FarFieldPolicy, GainModel, LinkParams};
use crate::em_field::ChamberConfig;
use crate::error::{Error, Result};
use crate::experiment::{Mode, SnrAveraging, SweepConfig};
use crate::geometry::CirsParams;
use crate::phase_design::AngleSpec;
use crate::scenario::HighwayConfig;
use crate::SPEED_OF_LIGHT;

/// Parsed study document. Call the `*_config` resolvers to obtain the
/// typed configs with defaults filled in.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub carrier_frequency_hz: Option<f64>,
    pub seed: Option<u64>,
    pub link: RawLink,
    pub surface: RawSurface,
    pub highway: HighwayConfig,
    pub sweep: RawSweep,
    pub chamber: RawChamber,
    pub phase: RawPhase,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawLink {
    pub antennas: Option<usize>,
    /// Array pitch in meters; defaults to half the wavelength.
    pub antenna_spacing_m: Option<f64>,
    pub tx_power_dbm: Option<f64>,
    pub noise_power_dbm: Option<f64>,
    pub blocker_loss_db: Option<f64>,
    pub element_gain: Option<GainModel>,
    pub min_hop_distance_m: Option<f64>,
    pub far_field: Option<FarFieldPolicy>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawSurface {
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    /// Element pitches in meters; default to a quarter wavelength.
    pub row_spacing_m: Option<f64>,
    pub col_spacing_m: Option<f64>,
    /// Cylinder radius in meters; 0 selects a flat panel.
    pub radius_m: Option<f64>,
    /// Design azimuth of the shared mirror profile, degrees.
    pub theta_bar_deg: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawSweep {
    pub rho_list: Option<Vec<f64>>,
    pub p_grid: Option<Vec<f64>>,
    pub drops_per_point: Option<usize>,
    pub modes: Option<Vec<Mode>>,
    pub snr_floor_db: Option<f64>,
    pub averaging: Option<SnrAveraging>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawChamber {
    pub radius_m: Option<f64>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    /// Arc extent covered by the rows, meters.
    pub height_m: Option<f64>,
    /// Axial extent covered by the columns, meters.
    pub width_m: Option<f64>,
    pub tx_distance_m: Option<f64>,
    pub tx_angle_deg: Option<f64>,
    pub rx_distance_m: Option<f64>,
    pub rx_extent_m: Option<f64>,
    pub sweep_points: Option<usize>,
    /// Design azimuth of the profile under test, degrees. The bench
    /// focuses broadside by default.
    pub theta_bar_deg: Option<f64>,
}

/// Angles for a general phase export, degrees.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawAngles {
    pub theta_i_deg: f64,
    pub phi_i_deg: f64,
    pub theta_o_deg: f64,
    pub phi_o_deg: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawPhase {
    /// Mirror design azimuth, degrees; falls back to the surface section.
    pub theta_bar_deg: Option<f64>,
    /// When present, export the general profile at these angles instead
    /// of the mirror design.
    pub angles: Option<RawAngles>,
}

/// Which profile a phase export writes.
#[derive(Debug, Clone, PartialEq)]
pub enum PhaseDesign {
    Mirror { theta_bar: f64 },
    General(AngleSpec),
}

impl RawConfig {
    /// Parses a JSON document. Errors carry serde's line/column context
    /// and name unknown fields.
    pub fn from_json(text: &str) -> Result<RawConfig> {
        serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("config parse error: {e}")))
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz.unwrap_or(26e9)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn link_params(&self) -> LinkParams {
        let lambda = self.wavelength();
        LinkParams {
            wavelength: lambda,
            antennas: self.link.antennas.unwrap_or(8),
            antenna_spacing: self.link.antenna_spacing_m.unwrap_or(lambda / 2.0),
            tx_power_dbm: self.link.tx_power_dbm.unwrap_or(20.0),
            noise_power_dbm: self.link.noise_power_dbm.unwrap_or(-88.0),
            blocker_loss_db: self.link.blocker_loss_db.unwrap_or(20.0),
            element_gain: self.link.element_gain.unwrap_or(GainModel::Isotropic),
            min_hop_distance: self.link.min_hop_distance_m.unwrap_or(5.0),
            far_field: self.link.far_field.unwrap_or(FarFieldPolicy::Strict),
        }
    }

    pub fn surface_params(&self) -> Result<CirsParams> {
        let lambda = self.wavelength();
        let rows = self.surface.rows.unwrap_or(400);
        let cols = self.surface.cols.unwrap_or(400);
        let dm = self.surface.row_spacing_m.unwrap_or(lambda / 4.0);
        let dn = self.surface.col_spacing_m.unwrap_or(lambda / 4.0);
        let radius = self.surface.radius_m.unwrap_or(8.0);
        if radius == 0.0 {
            CirsParams::planar(rows, cols, dm, dn, lambda)
        } else {
            CirsParams::curved(rows, cols, dm, dn, radius, lambda)
        }
    }

    pub fn theta_bar(&self) -> f64 {
        self.surface.theta_bar_deg.unwrap_or(80.0).to_radians()
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let cfg = SweepConfig {
            rho_list: self.sweep.rho_list.clone().unwrap_or_else(|| vec![10.0, 50.0]),
            p_grid: self
                .sweep
                .p_grid
                .clone()
                .unwrap_or_else(|| vec![0.0, 0.25, 0.5, 0.75, 1.0]),
            drops_per_point: self.sweep.drops_per_point.unwrap_or(1000),
            modes: self
                .sweep
                .modes
                .clone()
                .unwrap_or_else(|| vec![Mode::Direct, Mode::Cirs, Mode::Cris]),
            global_seed: self.seed(),
            link: self.link_params(),
            highway: self.highway.clone(),
            surface: self.surface_params()?,
            theta_bar: self.theta_bar(),
            snr_floor_db: self.sweep.snr_floor_db.unwrap_or(-50.0),
            averaging: self.sweep.averaging.unwrap_or(SnrAveraging::DbMean),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn chamber_config(&self) -> Result<ChamberConfig> {
        let base = ChamberConfig::default();
        let c = &self.chamber;
        let cfg = ChamberConfig {
            radius: c.radius_m.unwrap_or(base.radius),
            rows: c.rows.unwrap_or(base.rows),
            cols: c.cols.unwrap_or(base.cols),
            arc_height: c.height_m.unwrap_or(base.arc_height),
            length: c.width_m.unwrap_or(base.length),
            wavelength: self.wavelength(),
            tx_distance: c.tx_distance_m.unwrap_or(base.tx_distance),
            tx_angle: c.tx_angle_deg.map_or(base.tx_angle, f64::to_radians),
            rx_distance: c.rx_distance_m.unwrap_or(base.rx_distance),
            rx_extent: c.rx_extent_m.unwrap_or(base.rx_extent),
            sweep_points: c.sweep_points.unwrap_or(base.sweep_points),
            theta_bar: c.theta_bar_deg.map_or(base.theta_bar, f64::to_radians),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Surface and profile for a phase export.
    pub fn phase_export(&self) -> Result<(CirsParams, PhaseDesign)> {
        let params = self.surface_params()?;
        let design = match &self.phase.angles {
            Some(a) => PhaseDesign::General(AngleSpec::new(
                a.theta_i_deg.to_radians(),
                a.phi_i_deg.to_radians(),
                a.theta_o_deg.to_radians(),
                a.phi_o_deg.to_radians(),
            )?),
            None => PhaseDesign::Mirror {
                theta_bar: self
                    .phase
                    .theta_bar_deg
                    .map_or(self.theta_bar(), f64::to_radians),
            },
        };
        Ok((params, design))
    }
}

// ---------------------------------------------------------------------------
