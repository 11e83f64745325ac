//! Scenario configuration, circular-orbit propagation, gateway catalog and
//! coordinate geometry.
//!
//! Satellites follow circular Keplerian orbits in an Earth-centred inertial
//! frame aligned with the Earth-fixed axes at `t = 0`. Gateways are fixed on the Earth and carried
//! around by the sidereal rotation, so gateway positions at slot `k` are
//! `Rz(omega_E * t_k) * ecef(lat, lon, alt)`. When the ephemeris comes from a
//! file that is already Earth-fixed, set `earth_rotation: false`.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{Rotation3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::antenna::{AntennaPair, GainMask};
use crate::{Error, Result, SatId};

/// Mean spherical Earth radius, m.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Earth gravitational parameter, m^3/s^2.
pub const MU_EARTH: f64 = 3.986_004_418e14;
/// Sidereal rotation rate, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_0e-5;
pub const WGS84_A: f64 = 6_378_137.0;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Vec3 = Vector3<f64>;

fn default_raan_spread() -> f64 {
    360.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitalShell {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub num_planes: u32,
    pub sats_per_plane: u32,
    /// Extra argument-of-latitude offset per plane index, degrees.
    #[serde(default)]
    pub phasing_offset: f64,
    #[serde(default = "default_raan_spread")]
    pub raan_spread_deg: f64,
}

impl OrbitalShell {
    pub fn num_sats(&self) -> usize {
        self.num_planes as usize * self.sats_per_plane as usize
    }

    pub fn radius_m(&self) -> f64 {
        EARTH_RADIUS_M + self.altitude_km * 1e3
    }

    /// Circular orbital period `2 pi sqrt(a^3 / mu)`, seconds.
    pub fn period_s(&self) -> f64 {
        2.0 * PI * (self.radius_m().powi(3) / MU_EARTH).sqrt()
    }

    fn validate(&self, idx: usize) -> Result<()> {
        let field = |name: &str| format!("shells[{idx}].{name}");
        if !(self.altitude_km > 0.0) || !self.altitude_km.is_finite() {
            return Err(Error::config(field("altitude_km"), "must be positive"));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::config(field("inclination_deg"), "must be within [0, 180]"));
        }
        if self.num_planes == 0 {
            return Err(Error::config(field("num_planes"), "must be positive"));
        }
        if self.sats_per_plane == 0 {
            return Err(Error::config(field("sats_per_plane"), "must be positive"));
        }
        if !self.phasing_offset.is_finite() || !self.raan_spread_deg.is_finite() {
            return Err(Error::config(field("phasing_offset"), "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatewayStation {
    pub id: u32,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default)]
    pub altitude_m: f64,
    pub n_antennas: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    /// Seconds since the epoch at which the Earth-fixed and propagation frames coincide.
    #[serde(default)]
    pub t0_s: f64,
    pub dt_s: f64,
    pub num_slots: usize,
}

impl TimeGrid {
    pub fn time_s(&self, slot: usize) -> f64 {
        self.t0_s + self.dt_s * slot as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EarthModel {
    #[default]
    Spherical,
    Wgs84,
}

fn default_itu_threshold() -> f64 {
    -12.2
}
fn default_weak_threshold() -> f64 {
    -13.0
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub shells: Vec<OrbitalShell>,
    pub gateways: Vec<GatewayStation>,
    pub time_grid: TimeGrid,
    pub elevation_threshold_deg: f64,
    pub carrier_freq_hz: f64,
    pub total_bandwidth_hz: f64,
    pub num_subchannels: u32,
    pub tx_power_dbw: f64,
    pub noise_temp_k: f64,
    pub peak_gain_sat_db: f64,
    pub peak_gain_gs_db: f64,
    #[serde(default = "default_itu_threshold")]
    pub itu_threshold_db: f64,
    #[serde(default = "default_weak_threshold")]
    pub weak_threshold_db: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub earth_model: EarthModel,
    #[serde(default = "default_true")]
    pub earth_rotation: bool,
    /// Overrides the S.1528-like preset built from `peak_gain_sat_db`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub satellite_antenna: Option<GainMask>,
    /// Overrides the S.1428-like preset built from `peak_gain_gs_db`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gateway_antenna: Option<GainMask>,
}

impl ScenarioConfig {
    pub fn num_sats(&self) -> usize {
        self.shells.iter().map(OrbitalShell::num_sats).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.shells.is_empty() {
            return Err(Error::config("shells", "at least one shell is required"));
        }
        for (i, s) in self.shells.iter().enumerate() {
            s.validate(i)?;
        }
        let mut ids = BTreeSet::new();
        for (i, g) in self.gateways.iter().enumerate() {
            if !(g.latitude_deg.abs() <= 90.0) {
                return Err(Error::config(format!("gateways[{i}].latitude_deg"), "|lat| must be <= 90"));
            }
            if !(g.longitude_deg.abs() <= 180.0) {
                return Err(Error::config(
                    format!("gateways[{i}].longitude_deg"),
                    "|lon| must be <= 180",
                ));
            }
            if g.n_antennas == 0 {
                return Err(Error::config(format!("gateways[{i}].n_antennas"), "must be >= 1"));
            }
            if !ids.insert(g.id) {
                return Err(Error::config(format!("gateways[{i}].id"), "duplicate gateway id"));
            }
        }
        if !(self.time_grid.dt_s > 0.0) {
            return Err(Error::config("time_grid.dt_s", "must be positive"));
        }
        if self.time_grid.num_slots == 0 {
            return Err(Error::config("time_grid.num_slots", "must be >= 1"));
        }
        if self.num_subchannels == 0 {
            return Err(Error::config("num_subchannels", "must be >= 1"));
        }
        let positive = [
            ("total_bandwidth_hz", self.total_bandwidth_hz),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("noise_temp_k", self.noise_temp_k),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(name, "must be positive"));
            }
        }
        let finite = [
            ("elevation_threshold_deg", self.elevation_threshold_deg),
            ("tx_power_dbw", self.tx_power_dbw),
            ("peak_gain_sat_db", self.peak_gain_sat_db),
            ("peak_gain_gs_db", self.peak_gain_gs_db),
            ("itu_threshold_db", self.itu_threshold_db),
            ("weak_threshold_db", self.weak_threshold_db),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        self.antennas()?;
        Ok(())
    }

    /// The antenna masks in effect: explicit overrides, otherwise presets at the configured peaks.
    pub fn antennas(&self) -> Result<AntennaPair> {
        let satellite = match &self.satellite_antenna {
            Some(m) => {
                m.validate().map_err(|e| prefix_field(e, "satellite_antenna"))?;
                m.clone()
            }
            None => GainMask::s1528_like(self.peak_gain_sat_db),
        };
        let gateway = match &self.gateway_antenna {
            Some(m) => {
                m.validate().map_err(|e| prefix_field(e, "gateway_antenna"))?;
                m.clone()
            }
            None => GainMask::s1428_like(self.peak_gain_gs_db),
        };
        Ok(AntennaPair { satellite, gateway })
    }

    /// Gateways sorted by ascending id (the selection turn order).
    pub fn gateways_by_id(&self) -> Vec<GatewayStation> {
        let mut g = self.gateways.clone();
        g.sort_by_key(|g| g.id);
        g
    }
}

fn prefix_field(err: Error, prefix: &str) -> Error {
    match err {
        Error::Config { field, message } => Error::Config {
            field: format!("{prefix}.{}", field.trim_start_matches("antenna.")),
            message,
        },
        other => other,
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let cfg: ScenarioConfig = serde_json::from_reader(reader).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn save_scenario(cfg: &ScenarioConfig, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, cfg)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Satellite positions over the time grid, `positions[slot * num_sats + sat]`, metres.
#[derive(Debug, Clone, PartialEq)]
pub struct Ephemeris {
    num_slots: usize,
    num_sats: usize,
    positions: Vec<Vec3>,
}

impl Ephemeris {
    pub fn new(num_slots: usize, num_sats: usize, positions: Vec<Vec3>) -> Result<Self> {
        if positions.len() != num_slots * num_sats {
            return Err(Error::invalid(format!(
                "ephemeris has {} positions, expected {num_slots} x {num_sats}",
                positions.len()
            )));
        }
        for (i, p) in positions.iter().enumerate() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(Error::invalid(format!("non-finite position at row {i}")));
            }
            // small tolerance for rounding in external files
            if p.norm() < EARTH_RADIUS_M * (1.0 - 1e-9) {
                return Err(Error::invalid(format!(
                    "position at slot {}, sat {} is below the Earth surface",
                    i / num_sats.max(1),
                    i % num_sats.max(1)
                )));
            }
        }
        Ok(Ephemeris {
            num_slots,
            num_sats,
            positions,
        })
    }

    pub fn num_slots(&self) -> usize {
        self.num_slots
    }

    pub fn num_sats(&self) -> usize {
        self.num_sats
    }

    pub fn slot(&self, slot: usize) -> &[Vec3] {
        &self.positions[slot * self.num_sats..(slot + 1) * self.num_sats]
    }

    pub fn position(&self, slot: usize, sat: SatId) -> Vec3 {
        self.positions[slot * self.num_sats + sat.0 as usize]
    }
}

/// Position of a satellite on a circular orbit at time `t_s`.
fn circular_position(radius: f64, incl: f64, raan: f64, arg_lat: f64) -> Vec3 {
    let (su, cu) = arg_lat.sin_cos();
    let (so, co) = raan.sin_cos();
    let (si, ci) = incl.sin_cos();
    Vec3::new(
        radius * (co * cu - so * su * ci),
        radius * (so * cu + co * su * ci),
        radius * su * si,
    )
}

/// Walker-style circular propagation. Satellite ids run shell by shell, plane
/// by plane: `id = offset(shell) + plane * sats_per_plane + slot_in_plane`.
pub fn propagate_constellation(shells: &[OrbitalShell], grid: &TimeGrid) -> Result<Ephemeris> {
    for (i, s) in shells.iter().enumerate() {
        s.validate(i)?;
    }
    if !(grid.dt_s > 0.0) || grid.num_slots == 0 {
        return Err(Error::config("time_grid", "dt_s must be positive and num_slots >= 1"));
    }
    struct SatElements {
        radius: f64,
        incl: f64,
        raan: f64,
        u0: f64,
        mean_motion: f64,
    }
    let mut elements = Vec::new();
    for s in shells {
        let radius = s.radius_m();
        let mean_motion = (MU_EARTH / radius.powi(3)).sqrt();
        let incl = s.inclination_deg.to_radians();
        for p in 0..s.num_planes {
            let raan = (s.raan_spread_deg * p as f64 / s.num_planes as f64).to_radians();
            for j in 0..s.sats_per_plane {
                let u0 = 2.0 * PI * j as f64 / s.sats_per_plane as f64
                    + (s.phasing_offset * p as f64).to_radians();
                elements.push(SatElements {
                    radius,
                    incl,
                    raan,
                    u0,
                    mean_motion,
                });
            }
        }
    }
    let num_sats = elements.len();
    let positions: Vec<Vec3> = (0..grid.num_slots)
        .into_par_iter()
        .flat_map_iter(|slot| {
            let t = grid.time_s(slot);
            elements
                .iter()
                .map(move |e| circular_position(e.radius, e.incl, e.raan, e.u0 + e.mean_motion * t))
        })
        .collect();
    Ephemeris::new(grid.num_slots, num_sats, positions)
}

pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, alt_m: f64, model: EarthModel) -> Result<Vec3> {
    if !(lat_deg.abs() <= 90.0) {
        return Err(Error::invalid(format!("latitude {lat_deg} outside [-90, 90]")));
    }
    if !lon_deg.is_finite() || !alt_m.is_finite() {
        return Err(Error::invalid("longitude and altitude must be finite"));
    }
    let (slat, clat) = lat_deg.to_radians().sin_cos();
    let (slon, clon) = lon_deg.to_radians().sin_cos();
    Ok(match model {
        EarthModel::Spherical => {
            let r = EARTH_RADIUS_M + alt_m;
            Vec3::new(r * clat * clon, r * clat * slon, r * slat)
        }
        EarthModel::Wgs84 => {
            let e2 = WGS84_F * (2.0 - WGS84_F);
            let n = WGS84_A / (1.0 - e2 * slat * slat).sqrt();
            Vec3::new(
                (n + alt_m) * clat * clon,
                (n + alt_m) * clat * slon,
                (n * (1.0 - e2) + alt_m) * slat,
            )
        }
    })
}

/// Geocentric latitude/longitude (degrees) of a point given in the Earth-fixed frame.
pub fn subpoint_deg(p: &Vec3) -> (f64, f64) {
    let lat = (p.z / p.norm()).asin().to_degrees();
    let lon = p.y.atan2(p.x).to_degrees();
    (lat, lon)
}

/// Elevation of `sat_pos` above the local horizontal plane at `gs_pos`, degrees in `[-90, 90]`.
/// The local vertical is the geocentric radial direction.
pub fn elevation_angle(gs_pos: &Vec3, sat_pos: &Vec3) -> Result<f64> {
    let los = sat_pos - gs_pos;
    let range = los.norm();
    let r = gs_pos.norm();
    if range == 0.0 || r == 0.0 {
        return Err(Error::invalid("elevation undefined for coincident positions"));
    }
    Ok(elevation_unchecked(gs_pos, sat_pos))
}

#[inline]
pub(crate) fn elevation_unchecked(gs_pos: &Vec3, sat_pos: &Vec3) -> f64 {
    let los = sat_pos - gs_pos;
    let s = los.dot(gs_pos) / (los.norm() * gs_pos.norm());
    s.clamp(-1.0, 1.0).asin().to_degrees()
}

/// Angle between two vectors in degrees, robust near 0 and 180.
pub fn angle_between_deg(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b)).to_degrees()
}

/// Gateway positions at a slot, in the ephemeris frame.
pub fn gateway_positions(cfg: &ScenarioConfig, gateways: &[GatewayStation], slot: usize) -> Result<Vec<Vec3>> {
    let angle = if cfg.earth_rotation {
        EARTH_ROTATION_RATE * cfg.time_grid.time_s(slot)
    } else {
        0.0
    };
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
    gateways
        .iter()
        .map(|g| {
            geodetic_to_ecef(g.latitude_deg, g.longitude_deg, g.altitude_m, cfg.earth_model)
                .map(|p| rot * p)
        })
        .collect()
}

/// Rotate a point from the ephemeris frame into the Earth-fixed frame at a slot.
pub fn to_earth_fixed(cfg: &ScenarioConfig, slot: usize, p: &Vec3) -> Vec3 {
    if !cfg.earth_rotation {
        return *p;
    }
    let angle = -EARTH_ROTATION_RATE * cfg.time_grid.time_s(slot);
    Rotation3::from_axis_angle(&Vector3::z_axis(), angle) * p
}

#[derive(Serialize, Deserialize)]
struct EphemerisRow {
    slot: usize,
    sat_id: u32,
    x_m: f64,
    y_m: f64,
    z_m: f64,
}

/// Write `slot,sat_id,x_m,y_m,z_m`, one row per slot and satellite.
pub fn save_ephemeris(eph: &Ephemeris, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for slot in 0..eph.num_slots {
        for (sat, p) in eph.slot(slot).iter().enumerate() {
            w.serialize(EphemerisRow {
                slot,
                sat_id: sat as u32,
                x_m: p.x,
                y_m: p.y,
                z_m: p.z,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_ephemeris(path: impl AsRef<Path>) -> Result<Ephemeris> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers = rdr.headers()?.clone();
    let expected = ["slot", "sat_id", "x_m", "y_m", "z_m"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::invalid(format!(
            "ephemeris header must be `{}`",
            expected.join(",")
        )));
    }
    let mut rows: Vec<EphemerisRow> = Vec::new();
    for r in rdr.deserialize() {
        rows.push(r?);
    }
    let num_slots = rows.iter().map(|r| r.slot + 1).max().unwrap_or(0);
    let num_sats = rows.iter().map(|r| r.sat_id as usize + 1).max().unwrap_or(0);
    if rows.len() != num_slots * num_sats {
        return Err(Error::invalid(format!(
            "ephemeris rows ({}) do not cover {num_slots} slots x {num_sats} satellites",
            rows.len()
        )));
    }
    let mut positions = vec![Vec3::zeros(); rows.len()];
    let mut seen = vec![false; rows.len()];
    for r in rows {
        let idx = r.slot * num_sats + r.sat_id as usize;
        if std::mem::replace(&mut seen[idx], true) {
            return Err(Error::invalid(format!(
                "duplicate ephemeris row for slot {}, sat {}",
                r.slot, r.sat_id
            )));
        }
        positions[idx] = Vec3::new(r.x_m, r.y_m, r.z_m);
    }
    Ephemeris::new(num_slots, num_sats, positions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn shell(alt: f64, planes: u32, per: u32) -> OrbitalShell {
        OrbitalShell {
            altitude_km: alt,
            inclination_deg: 53.0,
            num_planes: planes,
            sats_per_plane: per,
            phasing_offset: 0.0,
            raan_spread_deg: 360.0,
        }
    }

    #[test]
    fn single_satellite_radius() {
        let grid = TimeGrid {
            t0_s: 0.0,
            dt_s: 37.0,
            num_slots: 50,
        };
        let eph = propagate_constellation(&[shell(550.0, 1, 1)], &grid).unwrap();
        for slot in 0..50 {
            let r = eph.position(slot, SatId(0)).norm();
            assert!((r - (EARTH_RADIUS_M + 550e3)).abs() < 1.0);
        }
    }

    #[test]
    fn returns_after_one_period() {
        let s = shell(550.0, 1, 1);
        let grid = TimeGrid {
            t0_s: 0.0,
            dt_s: s.period_s(),
            num_slots: 2,
        };
        let eph = propagate_constellation(&[s], &grid).unwrap();
        let a = eph.position(0, SatId(0));
        let b = eph.position(1, SatId(0));
        assert!((a - b).norm() / a.norm() < 1e-6);
    }

    #[test]
    fn in_plane_spacing_is_half_turn() {
        let grid = TimeGrid {
            t0_s: 0.0,
            dt_s: 10.0,
            num_slots: 1,
        };
        let eph = propagate_constellation(&[shell(550.0, 2, 2)], &grid).unwrap();
        // ids 0,1 are plane 0
        let ang = angle_between_deg(&eph.position(0, SatId(0)), &eph.position(0, SatId(1)));
        assert_relative_eq!(ang, 180.0, epsilon = 1e-9);
        let ang = angle_between_deg(&eph.position(0, SatId(2)), &eph.position(0, SatId(3)));
        assert_relative_eq!(ang, 180.0, epsilon = 1e-9);
    }

    #[test]
    fn propagation_is_deterministic() {
        let grid = TimeGrid {
            t0_s: 5.0,
            dt_s: 10.0,
            num_slots: 4,
        };
        let shells = [shell(550.0, 6, 5), shell(340.0, 3, 7)];
        let a = propagate_constellation(&shells, &grid).unwrap();
        let b = propagate_constellation(&shells, &grid).unwrap();
        assert_eq!(a, b);
        for slot in 0..4 {
            for (i, p) in a.slot(slot).iter().enumerate() {
                let r = if i < 30 { shells[0].radius_m() } else { shells[1].radius_m() };
                assert!((p.norm() - r).abs() / r < 1e-9);
            }
        }
    }

    #[test]
    fn nonpositive_altitude_rejected() {
        let grid = TimeGrid {
            t0_s: 0.0,
            dt_s: 1.0,
            num_slots: 1,
        };
        assert!(propagate_constellation(&[shell(0.0, 1, 1)], &grid).is_err());
        assert!(propagate_constellation(&[shell(-10.0, 1, 1)], &grid).is_err());
    }

    #[test]
    fn geodetic_spherical_cases() {
        let r = EARTH_RADIUS_M;
        let p = geodetic_to_ecef(0.0, 0.0, 0.0, EarthModel::Spherical).unwrap();
        assert_relative_eq!(p, Vec3::new(r, 0.0, 0.0), epsilon = 1e-6);
        let p = geodetic_to_ecef(90.0, 123.0, 0.0, EarthModel::Spherical).unwrap();
        assert_relative_eq!(p, Vec3::new(0.0, 0.0, r), epsilon = 1e-6);
        let p = geodetic_to_ecef(45.0, 45.0, 0.0, EarthModel::Spherical).unwrap();
        assert_relative_eq!(p, Vec3::new(r / 2.0, r / 2.0, r / 2f64.sqrt()), epsilon = 1e-6);
        assert!(geodetic_to_ecef(90.5, 0.0, 0.0, EarthModel::Spherical).is_err());
    }

    #[test]
    fn geodetic_wgs84_axes() {
        let p = geodetic_to_ecef(0.0, 0.0, 0.0, EarthModel::Wgs84).unwrap();
        assert_relative_eq!(p.x, WGS84_A, epsilon = 1e-6);
        let p = geodetic_to_ecef(90.0, 0.0, 0.0, EarthModel::Wgs84).unwrap();
        assert_relative_eq!(p.z, WGS84_A * (1.0 - WGS84_F), epsilon = 1e-6);
    }

    #[test]
    fn elevation_zenith_and_horizon() {
        let gs = geodetic_to_ecef(10.0, 20.0, 0.0, EarthModel::Spherical).unwrap();
        let up = gs.normalize();
        let sat = gs + up * 550e3;
        assert_relative_eq!(elevation_angle(&gs, &sat).unwrap(), 90.0, epsilon = 1e-9);
        let horizontal = up.cross(&Vec3::z()).normalize();
        let sat = gs + horizontal * 1000e3;
        assert!(elevation_angle(&gs, &sat).unwrap().abs() < 1e-9);
        assert!(elevation_angle(&gs, &gs).is_err());
    }

    #[test]
    fn elevation_matches_central_angle_formula() {
        let r = EARTH_RADIUS_M;
        let h = 550e3;
        let gamma = 10f64.to_radians();
        let gs = Vec3::new(r, 0.0, 0.0);
        let sat = Vec3::new((r + h) * gamma.cos(), (r + h) * gamma.sin(), 0.0);
        let oracle = ((gamma.cos() - r / (r + h)) / gamma.sin()).atan().to_degrees();
        assert_relative_eq!(elevation_angle(&gs, &sat).unwrap(), oracle, epsilon = 1e-9);
    }

    #[test]
    fn elevation_invariant_under_rotation() {
        let gs = geodetic_to_ecef(33.0, -40.0, 100.0, EarthModel::Spherical).unwrap();
        let sat = Vec3::new(3.0e6, -4.1e6, 4.4e6);
        let e0 = elevation_angle(&gs, &sat).unwrap();
        let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.0);
        let e1 = elevation_angle(&(rot * gs), &(rot * sat)).unwrap();
        assert_relative_eq!(e0, e1, epsilon = 1e-9);
    }

    #[test]
    fn ephemeris_csv_roundtrip() {
        let grid = TimeGrid {
            t0_s: 0.0,
            dt_s: 10.0,
            num_slots: 3,
        };
        let eph = propagate_constellation(&[shell(550.0, 2, 3)], &grid).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("eph.csv");
        save_ephemeris(&eph, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("slot,sat_id,x_m,y_m,z_m\n"));
        assert_eq!(text.lines().count(), 1 + 3 * 6);
        assert_eq!(load_ephemeris(&path).unwrap(), eph);
    }
}
