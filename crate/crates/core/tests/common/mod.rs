//! Scenario builders shared by the integration and acceptance tests.
#![allow(dead_code)]

use leofreq::scenario::{EarthModel, GatewayStation, OrbitalShell, ScenarioConfig, TimeGrid};

pub fn shell(altitude_km: f64, inclination_deg: f64, num_planes: u32, sats_per_plane: u32) -> OrbitalShell {
    OrbitalShell {
        altitude_km,
        inclination_deg,
        num_planes,
        sats_per_plane,
        phasing_offset: 0.0,
        raan_spread_deg: 360.0,
    }
}

/// The 1,584-satellite 550 km shell plus five denser shells from the second generation.
pub fn dense_shells() -> Vec<OrbitalShell> {
    vec![
        shell(550.0, 53.0, 72, 22),
        shell(540.0, 53.2, 72, 22),
        shell(340.0, 53.0, 48, 110),
        shell(345.0, 46.0, 48, 110),
        shell(350.0, 38.0, 48, 110),
        shell(525.0, 53.0, 28, 120),
    ]
}

/// `nx * ny` gateways on a square grid with `spacing_km` spacing around `(lat0, lon0)`.
pub fn gateway_grid(lat0: f64, lon0: f64, nx: usize, ny: usize, spacing_km: f64, n_antennas: u32, first_id: u32) -> Vec<GatewayStation> {
    let mut out = Vec::new();
    for i in 0..ny {
        for j in 0..nx {
            let lat = lat0 + (i as f64 - (ny as f64 - 1.0) / 2.0) * spacing_km / 111.0;
            let lon = lon0 + (j as f64 - (nx as f64 - 1.0) / 2.0) * spacing_km / (111.0 * lat0.to_radians().cos());
            out.push(GatewayStation {
                id: first_id + out.len() as u32,
                latitude_deg: lat,
                longitude_deg: lon,
                altitude_m: 0.0,
                n_antennas,
            });
        }
    }
    out
}

pub fn base_config(shells: Vec<OrbitalShell>, gateways: Vec<GatewayStation>, num_slots: usize, num_subchannels: u32) -> ScenarioConfig {
    ScenarioConfig {
        shells,
        gateways,
        time_grid: TimeGrid {
            t0_s: 0.0,
            dt_s: 30.0,
            num_slots,
        },
        elevation_threshold_deg: 40.0,
        carrier_freq_hz: 20e9,
        total_bandwidth_hz: 500e6,
        num_subchannels,
        tx_power_dbw: 12.0,
        noise_temp_k: 398.0,
        peak_gain_sat_db: 35.0,
        peak_gain_gs_db: 45.76,
        itu_threshold_db: -12.2,
        weak_threshold_db: -13.0,
        rng_seed: 1,
        earth_model: EarthModel::Spherical,
        earth_rotation: true,
        satellite_antenna: None,
        gateway_antenna: None,
    }
}

/// Twelve 4-antenna gateways on an 80 km grid over central Europe under the dense shells.
pub fn dense_europe(num_slots: usize, num_subchannels: u32) -> ScenarioConfig {
    base_config(dense_shells(), gateway_grid(50.0, 8.0, 4, 3, 80.0, 4, 1), num_slots, num_subchannels)
}

/// Two identical gateway grids, one over Europe and one over North America.
pub fn two_regions(num_slots: usize) -> ScenarioConfig {
    let mut gws = gateway_grid(50.0, 8.0, 4, 3, 80.0, 4, 1);
    gws.extend(gateway_grid(40.0, -95.0, 4, 3, 80.0, 4, 101));
    base_config(dense_shells(), gws, num_slots, 4)
}

/// Tiny scenario used by fast pipeline tests.
pub fn small(num_slots: usize) -> ScenarioConfig {
    base_config(vec![shell(550.0, 53.0, 24, 22)], gateway_grid(50.0, 8.0, 2, 1, 150.0, 2, 1), num_slots, 2)
}
