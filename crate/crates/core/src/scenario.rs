//! Highway drops: Poisson traffic per lane around a fixed Tx/Rx pair,
//! relay-mount extraction, and blockage counting against vehicle boxes.
//!
//! Coordinates: `x` across the road (lane centers symmetric about 0),
//! `y` along it, `z` up from the pavement. All vehicles head along `+y`
//! and every box sits on the ground.

use std::io::Write as IoWrite;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::channel::Facing;
use crate::error::{Error, Result};

/// Road, traffic, and mounting geometry for one study.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct HighwayConfig {
    /// Road length, meters.
    pub length: f64,
    pub lanes: usize,
    pub lane_width: f64,
    /// Cars per kilometer per lane.
    pub traffic_density: f64,
    /// Probability that a vehicle carries a surface.
    pub cav_fraction: f64,
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    pub vehicle_height: f64,
    /// Antenna height above the pavement, meters.
    pub antenna_height: f64,
    /// Mounted-surface center height above the pavement, meters.
    pub cirs_center_height: f64,
    /// Tx-to-Rx separation along the road, meters.
    pub tx_rx_distance: f64,
    /// Lane carrying both Tx and Rx.
    pub tx_lane: usize,
}

impl Default for HighwayConfig {
    /// Five 5 m lanes over 500 m, sedan-sized boxes, link endpoints 100 m
    /// apart in the middle lane. Antennas sit at the surface mounting
    /// height so mirror profiles, which only steer in azimuth, can focus
    /// the bounce (a raised antenna defocuses the fixed profile).
    fn default() -> Self {
        HighwayConfig {
            length: 500.0,
            lanes: 5,
            lane_width: 5.0,
            traffic_density: 10.0,
            cav_fraction: 0.5,
            vehicle_length: 5.0,
            vehicle_width: 1.8,
            vehicle_height: 1.5,
            antenna_height: 0.75,
            cirs_center_height: 0.75,
            tx_rx_distance: 100.0,
            tx_lane: 2,
        }
    }
}

impl HighwayConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("length", self.length),
            ("lane_width", self.lane_width),
            ("vehicle_length", self.vehicle_length),
            ("vehicle_width", self.vehicle_width),
            ("vehicle_height", self.vehicle_height),
            ("antenna_height", self.antenna_height),
            ("cirs_center_height", self.cirs_center_height),
            ("tx_rx_distance", self.tx_rx_distance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "highway {name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.lanes == 0 {
            return Err(Error::invalid("highway needs at least one lane".to_string()));
        }
        if self.tx_lane >= self.lanes {
            return Err(Error::invalid(format!(
                "tx_lane {} out of range for {} lanes",
                self.tx_lane, self.lanes
            )));
        }
        if !(self.traffic_density.is_finite() && self.traffic_density >= 0.0) {
            return Err(Error::invalid(format!(
                "traffic density must be non-negative, got {}",
                self.traffic_density
            )));
        }
        if !(0.0..=1.0).contains(&self.cav_fraction) {
            return Err(Error::invalid(format!(
                "cav fraction must lie in [0, 1], got {}",
                self.cav_fraction
            )));
        }
        if self.vehicle_width > self.lane_width {
            return Err(Error::invalid(
                "vehicles must fit within their lane".to_string(),
            ));
        }
        if self.tx_rx_distance + self.vehicle_length > self.length {
            return Err(Error::invalid(
                "link endpoints do not fit on the road".to_string(),
            ));
        }
        Ok(())
    }

    /// Across-road coordinate of a lane center.
    pub fn lane_center_x(&self, lane: usize) -> f64 {
        (lane as f64 - (self.lanes as f64 - 1.0) / 2.0) * self.lane_width
    }

    fn tx_y(&self) -> f64 {
        (self.length - self.tx_rx_distance) / 2.0
    }
}

/// One vehicle box, heading along `+y`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Vehicle {
    pub id: usize,
    pub lane: usize,
    /// Footprint center.
    pub x: f64,
    pub y: f64,
    /// Box extent along `y`.
    pub length: f64,
    /// Box extent along `x`.
    pub width: f64,
    pub height: f64,
    pub is_cav: bool,
}

impl Vehicle {
    fn x_range(&self) -> (f64, f64) {
        (self.x - self.width / 2.0, self.x + self.width / 2.0)
    }

    fn y_range(&self) -> (f64, f64) {
        (self.y - self.length / 2.0, self.y + self.length / 2.0)
    }

    /// Boundary-inclusive box membership.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        let (x0, x1) = self.x_range();
        let (y0, y1) = self.y_range();
        p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1 && p[2] >= 0.0 && p[2] <= self.height
    }
}

/// One immutable drop. `vehicles[tx]` and `vehicles[rx]` are the forced
/// link endpoints.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Scenario {
    pub config: HighwayConfig,
    pub vehicles: Vec<Vehicle>,
    pub tx: usize,
    pub rx: usize,
}

impl Scenario {
    /// Tx antenna position.
    pub fn p_tx(&self) -> [f64; 3] {
        let v = &self.vehicles[self.tx];
        [v.x, v.y, self.config.antenna_height]
    }

    /// Rx antenna position.
    pub fn p_rx(&self) -> [f64; 3] {
        let v = &self.vehicles[self.rx];
        [v.x, v.y, self.config.antenna_height]
    }

    /// Tx-Rx midpoint on the road surface.
    pub fn link_midpoint(&self) -> [f64; 2] {
        let t = &self.vehicles[self.tx];
        let r = &self.vehicles[self.rx];
        [(t.x + r.x) / 2.0, (t.y + r.y) / 2.0]
    }
}

fn sample_poisson(mean: f64, rng: &mut impl Rng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as usize
}

/// Draws one drop: Tx and Rx first (forced surface carriers on `tx_lane`,
/// `tx_rx_distance` apart, centered along the road), then per-lane Poisson
/// counts placed uniformly with same-lane overlap rejection. Each placed
/// vehicle carries a surface with probability `cav_fraction`.
///
/// The draw sequence depends only on the road geometry and density, so two
/// configs differing in `cav_fraction` alone produce identical vehicle
/// layouts from the same stream and differ only in the carrier flags.
pub fn generate_scenario(config: &HighwayConfig, rng: &mut impl Rng) -> Result<Scenario> {
    config.validate()?;
    let y_min = config.vehicle_length / 2.0;
    let y_max = config.length - config.vehicle_length / 2.0;
    let tx_y = config.tx_y();
    let rx_y = tx_y + config.tx_rx_distance;
    if tx_y < y_min || rx_y > y_max {
        return Err(Error::invalid(
            "link endpoints do not fit on the road".to_string(),
        ));
    }

    let mut vehicles = Vec::new();
    for y in [tx_y, rx_y] {
        vehicles.push(Vehicle {
            id: vehicles.len(),
            lane: config.tx_lane,
            x: config.lane_center_x(config.tx_lane),
            y,
            length: config.vehicle_length,
            width: config.vehicle_width,
            height: config.vehicle_height,
            is_cav: true,
        });
    }

    let mean = config.traffic_density * config.length / 1000.0;
    for lane in 0..config.lanes {
        let count = sample_poisson(mean, rng);
        let mut attempts_left = 100usize.saturating_mul(count);
        let x = config.lane_center_x(lane);
        for _ in 0..count {
            let y = loop {
                if attempts_left == 0 {
                    return Err(Error::Placement(format!(
                        "lane {lane} cannot fit {count} vehicles without overlap"
                    )));
                }
                attempts_left -= 1;
                let y = rng.gen_range(y_min..y_max);
                let clear = vehicles
                    .iter()
                    .filter(|v| v.lane == lane)
                    .all(|v| (v.y - y).abs() >= config.vehicle_length);
                if clear {
                    break y;
                }
            };
            // one explicit uniform draw per vehicle (gen_bool skips the
            // draw at p = 1), so the layout is identical across fractions
            let is_cav = rng.gen::<f64>() < config.cav_fraction;
            vehicles.push(Vehicle {
                id: vehicles.len(),
                lane,
                x,
                y,
                length: config.vehicle_length,
                width: config.vehicle_width,
                height: config.vehicle_height,
                is_cav,
            });
        }
    }

    Ok(Scenario { config: config.clone(), vehicles, tx: 0, rx: 1 })
}

/// A surface mounting point on a carrier vehicle: the side panel facing
/// the link's lane, at the configured mounting height.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RelayMount {
    /// Index into `Scenario::vehicles`.
    pub vehicle: usize,
    pub position: [f64; 3],
    pub facing: Facing,
}

fn mount_on(scn: &Scenario, index: usize) -> RelayMount {
    let v = &scn.vehicles[index];
    let toward_link = scn.config.lane_center_x(scn.config.tx_lane) - v.x;
    // a carrier in the link's own lane presents its +x side
    let facing = if toward_link < 0.0 { Facing::NegativeX } else { Facing::PositiveX };
    RelayMount {
        vehicle: index,
        position: [
            v.x + facing.sign() * v.width / 2.0,
            v.y,
            scn.config.cirs_center_height,
        ],
        facing,
    }
}

fn carrier_indices(scn: &Scenario) -> impl Iterator<Item = usize> + '_ {
    (0..scn.vehicles.len())
        .filter(|&i| i != scn.tx && i != scn.rx && scn.vehicles[i].is_cav)
}

/// Mounts on carrier vehicles (link endpoints excluded) whose surface
/// center falls in the relay window: the full road width by `2 * half_span`
/// along the road, centered on the Tx-Rx midpoint.
pub fn relay_candidates(scn: &Scenario, half_span: f64) -> Vec<RelayMount> {
    let mid = scn.link_midpoint();
    let half_road = scn.config.lanes as f64 * scn.config.lane_width / 2.0;
    carrier_indices(scn)
        .map(|i| mount_on(scn, i))
        .filter(|m| {
            (m.position[1] - mid[1]).abs() <= half_span
                && (m.position[0] - mid[0]).abs() <= half_road
        })
        .collect()
}

/// Mounts on every carrier vehicle in the drop, link endpoints excluded.
pub fn all_relay_mounts(scn: &Scenario) -> Vec<RelayMount> {
    carrier_indices(scn).map(|i| mount_on(scn, i)).collect()
}

/// Number of vehicle boxes the segment `p_a -> p_b` passes through low
/// enough to be shadowed: the horizontal footprint must cross the box and
/// the segment's lowest height over the crossing must not exceed the box
/// height (equality blocks). Boxes containing either endpoint are the
/// endpoints' own vehicles and never count.
pub fn count_blockers(p_a: [f64; 3], p_b: [f64; 3], scn: &Scenario) -> usize {
    scn.vehicles
        .iter()
        .filter(|v| !v.contains(p_a) && !v.contains(p_b) && shadows(v, p_a, p_b))
        .count()
}

fn shadows(v: &Vehicle, a: [f64; 3], b: [f64; 3]) -> bool {
    let (x0, x1) = v.x_range();
    let (y0, y1) = v.y_range();
    let d = [b[0] - a[0], b[1] - a[1]];
    // clip the segment's footprint to the box: a + t d inside for t in [t0, t1]
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-d[0], a[0] - x0),
        (d[0], x1 - a[0]),
        (-d[1], a[1] - y0),
        (d[1], y1 - a[1]),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return false;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    if t0 > t1 {
        return false;
    }
    let z = |t: f64| a[2] + t * (b[2] - a[2]);
    z(t0).min(z(t1)) <= v.height
}

/// Debug dump, one row per vehicle: `vehicle_id,x,y,z,len,wid,hgt,is_cav`
/// with `z` the box center height and `is_cav` as 0/1.
pub fn write_scenario_csv<W: IoWrite>(scn: &Scenario, out: &mut W) -> Result<()> {
    writeln!(out, "vehicle_id,x,y,z,len,wid,hgt,is_cav")?;
    for v in &scn.vehicles {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            v.id,
            v.x,
            v.y,
            v.height / 2.0,
            v.length,
            v.width,
            v.height,
            u8::from(v.is_cav)
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
