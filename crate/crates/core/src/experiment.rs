//! Monte Carlo driver: sweeps traffic density and carrier fraction over
//! the relaying modes, aggregates per-drop SNR into one row per grid
//! point, and wraps the bench sweep. All outputs are deterministic for a
//! fixed seed regardless of thread count.
//!
//! Per-drop seeds mix the global seed with the grid coordinates and drop
//! index, never the mode, so every mode sees the same traffic and the same
//! direct-path draws at a given grid point. Mode comparisons are therefore
//! paired: a mode with no usable relay reproduces the direct result bit
//! for bit.

use std::io::Write as IoWrite;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beam_select::{build_codebooks, select_beam_pair, ChosenTarget};
use crate::channel::{
    cascaded_channel, composite_channel, direct_channel, local_angles, LinkParams,
    PlacedSurface,
};
use crate::em_field::{
    chamber_sweep, focusing_gain_db, half_power_width_rad, ChamberConfig, ChamberSweep,
};
use crate::error::{Error, Result};
use crate::geometry::{build_cylindrical_layout, CirsLayout, CirsParams};
use crate::phase_design::{phase_cylindrical_mirror, phase_general, AngleSpec, PhaseProfile};
use crate::scenario::{
    all_relay_mounts, count_blockers, generate_scenario, relay_candidates, HighwayConfig,
    Scenario,
};

/// Which links a drop may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Tx-Rx link only.
    Direct,
    /// Relays restricted to the window around the link midpoint, all
    /// running the shared mirror profile.
    Cirs,
    /// Every carrier in the drop relays, each re-phased for its true
    /// per-drop angles.
    Cris,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Cirs => "cirs",
            Mode::Cris => "cris",
        }
    }
}

/// How per-drop SNR samples collapse into the reported mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrAveraging {
    /// Mean of the per-drop dB values.
    DbMean,
    /// dB of the mean linear SNR. The reported std stays the spread of
    /// the per-drop dB values under both conventions.
    LinearMean,
}

/// Full study description: the sweep grid plus every embedded model
/// parameter set.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepConfig {
    /// Traffic densities to sweep, cars/km/lane.
    pub rho_list: Vec<f64>,
    /// Carrier fractions to sweep.
    pub p_grid: Vec<f64>,
    pub drops_per_point: usize,
    pub modes: Vec<Mode>,
    pub global_seed: u64,
    pub link: LinkParams,
    pub highway: HighwayConfig,
    pub surface: CirsParams,
    /// Design azimuth of the shared mirror profile, radians.
    pub theta_bar: f64,
    /// Drops with no usable path report this SNR instead of diverging.
    pub snr_floor_db: f64,
    pub averaging: SnrAveraging,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rho_list.is_empty() || self.p_grid.is_empty() || self.modes.is_empty() {
            return Err(Error::invalid("sweep grids must be non-empty".to_string()));
        }
        if self.drops_per_point == 0 {
            return Err(Error::invalid("sweep needs at least one drop per point".to_string()));
        }
        for &rho in &self.rho_list {
            if !(rho.is_finite() && rho >= 0.0) {
                return Err(Error::invalid(format!(
                    "traffic density must be non-negative, got {rho}"
                )));
            }
        }
        for &p in &self.p_grid {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "carrier fraction must lie in [0, 1], got {p}"
                )));
            }
        }
        if !self.theta_bar.is_finite() {
            return Err(Error::invalid("mirror design azimuth must be finite".to_string()));
        }
        if !self.snr_floor_db.is_finite() {
            return Err(Error::invalid("SNR floor must be finite".to_string()));
        }
        self.link.validate()?;
        self.highway.validate()?;
        self.surface.validate()
    }
}

/// What one drop produced.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DropOutcome {
    pub snr_db: f64,
    pub chosen: ChosenTarget,
    /// Candidates that contributed a bounce path.
    pub candidates: usize,
    /// Candidates dropped by the far-field guard.
    pub skipped_near_field: usize,
    /// Whether the direct path had at least one blocker.
    pub direct_blocked: bool,
}

/// One result row: SNR statistics at a single `(mode, rho, P)` point.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SnrStats {
    pub mode: Mode,
    pub rho: f64,
    pub p: f64,
    pub mean_snr_db: f64,
    /// Sample standard deviation of the per-drop dB values.
    pub std_snr_db: f64,
    /// Drops included in the statistics.
    pub drops: usize,
    /// Fraction of drops whose direct path was blocked.
    pub blockage_rate: f64,
    /// Drops lost to scenario generation failure.
    pub failed_drops: usize,
    /// Total candidates dropped by the far-field guard.
    pub skipped_near_field: usize,
}

/// All rows of one sweep, in `(mode, rho, P)` grid order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepResults {
    pub global_seed: u64,
    pub rows: Vec<SnrStats>,
}

impl SweepResults {
    /// `mode,rho,P,mean_snr_db,std_snr_db,drops,blockage_rate` under a
    /// `# cirs-sim <version> seed=<seed>` comment line.
    pub fn write_csv<W: IoWrite>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "# cirs-sim {} seed={}", crate::VERSION, self.global_seed)?;
        writeln!(out, "mode,rho,P,mean_snr_db,std_snr_db,drops,blockage_rate")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{},{:.6}",
                r.mode.as_str(),
                r.rho,
                r.p,
                r.mean_snr_db,
                r.std_snr_db,
                r.drops,
                r.blockage_rate
            )?;
        }
        Ok(())
    }
}

/// Seed for one drop: the global seed mixed with the density and drop
/// index. Neither the mode nor the carrier fraction enters, which pairs
/// the comparisons the study makes: at a fixed `(rho, drop)` every mode
/// and every fraction sees the same traffic and the same direct-path
/// draws, and because the carrier flag is one shared uniform draw per
/// vehicle the candidate sets are nested as the fraction grows. Mode and
/// fraction curves are therefore free of traffic-resampling noise.
pub fn drop_seed(global_seed: u64, rho: f64, drop_index: u64) -> u64 {
    fnv_mix(&[global_seed, rho.to_bits(), drop_index])
}

fn fnv_mix(parts: &[u64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for part in parts {
        for byte in part.to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

fn stream(seed: u64, lane: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(fnv_mix(&[seed, lane]))
}

/// Prepared sweep: the surface layout and the shared mirror profile are
/// built once and reused by every drop.
pub struct SweepRunner {
    cfg: SweepConfig,
    layout: CirsLayout,
    mirror: PhaseProfile,
}

impl SweepRunner {
    pub fn new(cfg: SweepConfig) -> Result<Self> {
        cfg.validate()?;
        let layout = build_cylindrical_layout(&cfg.surface)?;
        let mirror = phase_cylindrical_mirror(&layout, cfg.theta_bar)?;
        Ok(SweepRunner { cfg, layout, mirror })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &CirsLayout {
        &self.layout
    }

    /// Runs a single drop end to end: traffic, channels, beam selection.
    /// Traffic and channel phases come from two independent streams of
    /// `seed`, so candidate evaluation never disturbs the drop layout.
    pub fn run_drop(&self, rho: f64, p: f64, mode: Mode, seed: u64) -> Result<DropOutcome> {
        let mut highway = self.cfg.highway.clone();
        highway.traffic_density = rho;
        highway.cav_fraction = p;
        let scn = generate_scenario(&highway, &mut stream(seed, 1))?;
        self.run_drop_on(&scn, mode, &mut stream(seed, 2))
    }

    /// Evaluates one mode on an existing drop. Useful for replaying a
    /// scenario under different modes or with hand-built traffic.
    pub fn run_drop_on(
        &self,
        scn: &Scenario,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<DropOutcome> {
        let link = &self.cfg.link;
        let p_tx = scn.p_tx();
        let p_rx = scn.p_rx();
        let direct_blockers = count_blockers(p_tx, p_rx, scn);
        let direct = direct_channel(p_tx, p_rx, direct_blockers, link, rng)?;

        let mounts = match mode {
            Mode::Direct => Vec::new(),
            Mode::Cirs => relay_candidates(scn, self.layout.length),
            Mode::Cris => all_relay_mounts(scn),
        };

        let mut kept = Vec::with_capacity(mounts.len());
        let mut paths = Vec::with_capacity(mounts.len());
        let mut skipped_near_field = 0usize;
        for mount in mounts {
            let blockers_in = count_blockers(p_tx, mount.position, scn);
            let blockers_out = count_blockers(mount.position, p_rx, scn);
            let bounce = match mode {
                Mode::Cirs => {
                    let surface = PlacedSurface {
                        layout: &self.layout,
                        profile: &self.mirror,
                        position: mount.position,
                        facing: mount.facing,
                    };
                    cascaded_channel(p_tx, p_rx, &surface, blockers_in, blockers_out, link, rng)
                }
                Mode::Cris => {
                    let (ti, fi) = local_angles(mount.position, mount.facing, p_tx)?;
                    let (to, fo) = local_angles(mount.position, mount.facing, p_rx)?;
                    let matched =
                        phase_general(&self.layout, &AngleSpec::new(ti, fi, to, fo)?)?;
                    let surface = PlacedSurface {
                        layout: &self.layout,
                        profile: &matched,
                        position: mount.position,
                        facing: mount.facing,
                    };
                    cascaded_channel(p_tx, p_rx, &surface, blockers_in, blockers_out, link, rng)
                }
                Mode::Direct => unreachable!("direct mode has no mounts"),
            };
            match bounce {
                Ok(path) => {
                    kept.push(mount);
                    paths.push(path);
                }
                Err(Error::NearField { .. }) => skipped_near_field += 1,
                Err(e) => return Err(e),
            }
        }

        let books = build_codebooks(scn, &kept, link)?;
        let channel = composite_channel(link, direct, paths);
        let decision = select_beam_pair(&channel, &books, link)?;
        Ok(DropOutcome {
            snr_db: decision.snr_db.max(self.cfg.snr_floor_db),
            chosen: decision.chosen,
            candidates: kept.len(),
            skipped_near_field,
            direct_blocked: direct_blockers > 0,
        })
    }

    /// Runs the whole grid. Drops run in parallel; aggregation consumes
    /// them in drop-index order, so the output is a pure function of the
    /// config and seed.
    pub fn run(&self) -> Result<SweepResults> {
        let mut rows = Vec::new();
        for &mode in &self.cfg.modes {
            for &rho in &self.cfg.rho_list {
                for &p in &self.cfg.p_grid {
                    let outcomes: Vec<Result<DropOutcome>> = (0..self.cfg.drops_per_point)
                        .into_par_iter()
                        .map(|d| {
                            let seed = drop_seed(self.cfg.global_seed, rho, d as u64);
                            self.run_drop(rho, p, mode, seed)
                        })
                        .collect();
                    rows.push(summarize(mode, rho, p, &outcomes, self.cfg.averaging));
                }
            }
        }
        Ok(SweepResults { global_seed: self.cfg.global_seed, rows })
    }
}

/// Convenience wrapper: prepare and run in one call.
pub fn run_v2v_sweep(cfg: SweepConfig) -> Result<SweepResults> {
    SweepRunner::new(cfg)?.run()
}

fn summarize(
    mode: Mode,
    rho: f64,
    p: f64,
    outcomes: &[Result<DropOutcome>],
    averaging: SnrAveraging,
) -> SnrStats {
    let mut snrs = Vec::with_capacity(outcomes.len());
    let mut blocked = 0usize;
    let mut skipped = 0usize;
    let mut failed = 0usize;
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                snrs.push(o.snr_db);
                blocked += usize::from(o.direct_blocked);
                skipped += o.skipped_near_field;
            }
            Err(_) => failed += 1,
        }
    }
    let (mean, std) = mean_std(&snrs, averaging);
    SnrStats {
        mode,
        rho,
        p,
        mean_snr_db: mean,
        std_snr_db: std,
        drops: snrs.len(),
        blockage_rate: if snrs.is_empty() { 0.0 } else { blocked as f64 / snrs.len() as f64 },
        failed_drops: failed,
        skipped_near_field: skipped,
    }
}

fn mean_std(snrs_db: &[f64], averaging: SnrAveraging) -> (f64, f64) {
    if snrs_db.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = snrs_db.len() as f64;
    let db_mean = snrs_db.iter().sum::<f64>() / n;
    let mean = match averaging {
        SnrAveraging::DbMean => db_mean,
        SnrAveraging::LinearMean => {
            let lin = snrs_db.iter().map(|x| 10f64.powf(x / 10.0)).sum::<f64>() / n;
            10.0 * lin.log10()
        }
    };
    let std = if snrs_db.len() < 2 {
        0.0
    } else {
        (snrs_db.iter().map(|x| (x - db_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    (mean, std)
}

/// Bench outcome: both traces plus the headline numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ChamberRun {
    pub sweep: ChamberSweep,
    pub focusing_gain_db: f64,
    pub reference_width_rad: f64,
    pub patterned_width_rad: f64,
}

/// Runs the bench sweep and summarizes it.
pub fn run_chamber(cfg: &ChamberConfig) -> Result<ChamberRun> {
    let sweep = chamber_sweep(cfg)?;
    let focusing_gain_db = focusing_gain_db(&sweep);
    let reference_width_rad = half_power_width_rad(&sweep.reference);
    let patterned_width_rad = half_power_width_rad(&sweep.patterned);
    Ok(ChamberRun { sweep, focusing_gain_db, reference_width_rad, patterned_width_rad })
}

/// `phi_o_deg,ref_db,cirs_db` under the version/seed comment line.
pub fn write_chamber_csv<W: IoWrite>(run: &ChamberRun, seed: u64, out: &mut W) -> Result<()> {
    writeln!(out, "# cirs-sim {} seed={}", crate::VERSION, seed)?;
    writeln!(out, "phi_o_deg,ref_db,cirs_db")?;
    let sweep = &run.sweep;
    for i in 0..sweep.reference.angles.len() {
        writeln!(
            out,
            "{:.6},{:.6},{:.6}",
            sweep.reference.angles[i].to_degrees(),
            sweep.reference.level_db[i],
            sweep.patterned.level_db[i]
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
