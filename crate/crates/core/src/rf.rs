//! Link budget: single-link and aggregate interference, noise, I/N, C/N,
//! SINR, capacity, capacity degradation and link-failure counting.
//!
//! Everything inside this module is in linear units; dB appears only in the
//! conversion helpers and at the I/O boundary.

use rayon::prelude::*;

use crate::antenna::AntennaPair;
use crate::scenario::{angle_between_deg, elevation_unchecked, ScenarioConfig, Vec3, SPEED_OF_LIGHT};
use crate::selection::LinkAssignment;
use crate::{Color, Error, Result, SatId};

pub const BOLTZMANN: f64 = 1.380_649e-23;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub carrier_wavelength_m: f64,
    pub subchannel_bandwidth_hz: f64,
    pub boltzmann: f64,
    pub noise_temp_k: f64,
    pub tx_power_w: f64,
    pub itu_threshold_linear: f64,
}

impl LinkBudget {
    /// Budget for `num_subchannels` equal slices of the configured band.
    pub fn from_config(cfg: &ScenarioConfig, num_subchannels: u32) -> Self {
        LinkBudget {
            carrier_wavelength_m: SPEED_OF_LIGHT / cfg.carrier_freq_hz,
            subchannel_bandwidth_hz: cfg.total_bandwidth_hz / num_subchannels.max(1) as f64,
            boltzmann: BOLTZMANN,
            noise_temp_k: cfg.noise_temp_k,
            tx_power_w: db_to_linear(cfg.tx_power_dbw),
            itu_threshold_linear: db_to_linear(cfg.itu_threshold_db),
        }
    }

    pub fn noise_power_w(&self) -> f64 {
        noise_power(self.boltzmann, self.noise_temp_k, self.subchannel_bandwidth_hz)
    }
}

/// `N = kappa * T_n * B`.
pub fn noise_power(boltzmann: f64, noise_temp_k: f64, bandwidth_hz: f64) -> f64 {
    boltzmann * noise_temp_k * bandwidth_hz
}

pub fn i_over_n(interference_w: f64, noise_w: f64) -> f64 {
    interference_w / noise_w
}

/// Free-space interference `P G_s(theta_tx) G_g(theta_rx) / (4 pi d / lambda)^2`, watts.
pub fn single_link_interference(
    tx_power_w: f64,
    off_axis_tx_deg: f64,
    off_axis_rx_deg: f64,
    distance_m: f64,
    antennas: &AntennaPair,
    wavelength_m: f64,
) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::invalid(format!("link distance must be positive, got {distance_m}")));
    }
    let g_tx = antennas.satellite.gain_db(off_axis_tx_deg)?;
    let g_rx = antennas.gateway.gain_db(off_axis_rx_deg)?;
    let path = 4.0 * std::f64::consts::PI * distance_m / wavelength_m;
    Ok(tx_power_w * db_to_linear(g_tx) * db_to_linear(g_rx) / (path * path))
}

/// One gateway antenna of the current slot, with positions resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkVertex {
    pub gateway_index: usize,
    pub gateway_id: u32,
    pub antenna: usize,
    pub sat: Option<SatId>,
    pub sat_pos: Option<Vec3>,
}

/// Positions of every link (vertex) and gateway in one slot.
#[derive(Debug, Clone)]
pub struct SlotGeometry {
    pub vertices: Vec<LinkVertex>,
    /// Indexed by `gateway_index` (ascending gateway id).
    pub gateway_positions: Vec<Vec3>,
}

/// Off-axis angles and distance of the interference path from interfering
/// satellite `u` (serving `u_gateway`) into the antenna of `victim_gateway`
/// pointed at `victim_sat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGeometry {
    pub off_axis_tx_deg: f64,
    pub off_axis_rx_deg: f64,
    pub distance_m: f64,
}

pub fn path_geometry(u_sat: &Vec3, u_gateway: &Vec3, victim_gateway: &Vec3, victim_sat: &Vec3) -> PathGeometry {
    let to_victim_gw = victim_gateway - u_sat;
    PathGeometry {
        off_axis_tx_deg: angle_between_deg(&(u_gateway - u_sat), &to_victim_gw),
        off_axis_rx_deg: angle_between_deg(&(victim_sat - victim_gateway), &(u_sat - victim_gateway)),
        distance_m: to_victim_gw.norm(),
    }
}

impl SlotGeometry {
    /// `gateway_positions` must be indexed by `gateway_index`, i.e. in ascending gateway id order.
    pub fn new(assignment: &LinkAssignment, sat_positions: &[Vec3], gateway_positions: Vec<Vec3>) -> Self {
        let vertices = assignment
            .entries
            .iter()
            .map(|e| LinkVertex {
                gateway_index: e.gateway_index,
                gateway_id: e.gateway_id,
                antenna: e.antenna,
                sat: e.sat,
                sat_pos: e.sat.map(|s| sat_positions[s.0 as usize]),
            })
            .collect();
        SlotGeometry {
            vertices,
            gateway_positions,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn gateway_of(&self, v: usize) -> &Vec3 {
        &self.gateway_positions[self.vertices[v].gateway_index]
    }

    /// Interference path from the satellite of vertex `u` into the link of vertex `victim`.
    pub fn path(&self, u: usize, victim: usize) -> Option<PathGeometry> {
        let us = self.vertices[u].sat_pos?;
        let vs = self.vertices[victim].sat_pos?;
        Some(path_geometry(&us, self.gateway_of(u), self.gateway_of(victim), &vs))
    }

    /// Other working satellites above the horizontal plane of the victim's gateway.
    pub fn interferer_set(&self, victim: usize) -> Vec<usize> {
        if self.vertices[victim].sat.is_none() {
            return Vec::new();
        }
        let gp = self.gateway_of(victim);
        self.vertices
            .iter()
            .enumerate()
            .filter(|&(u, v)| u != victim && v.sat_pos.is_some_and(|p| elevation_unchecked(gp, &p) > 0.0))
            .map(|(u, _)| u)
            .collect()
    }
}

/// Sum of single-link interference from `interferers` into `victim`, computed from geometry.
pub fn aggregate_interference(
    geometry: &SlotGeometry,
    victim: usize,
    interferers: &[usize],
    budget: &LinkBudget,
    antennas: &AntennaPair,
) -> Result<f64> {
    let mut total = 0.0;
    for &u in interferers {
        let p = geometry
            .path(u, victim)
            .ok_or_else(|| Error::invalid(format!("vertex {u} or {victim} has no satellite")))?;
        total += single_link_interference(
            budget.tx_power_w,
            p.off_axis_tx_deg,
            p.off_axis_rx_deg,
            p.distance_m,
            antennas,
            budget.carrier_wavelength_m,
        )?;
    }
    Ok(total)
}

/// Channel-agnostic single-link I/N (linear) for every victim link and every
/// interferer above its gateway horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceTable {
    /// `per_victim[v]` lists `(interferer vertex, I/N)` in ascending vertex order.
    /// Empty for vacant antennas.
    pub per_victim: Vec<Vec<(usize, f64)>>,
    pub itu_threshold_linear: f64,
}

impl InterferenceTable {
    pub fn compute(geometry: &SlotGeometry, budget: &LinkBudget, antennas: &AntennaPair) -> Self {
        let noise = budget.noise_power_w();
        let k = budget.tx_power_w * (budget.carrier_wavelength_m / (4.0 * std::f64::consts::PI)).powi(2) / noise;
        let per_victim = (0..geometry.len())
            .into_par_iter()
            .map(|v| {
                geometry
                    .interferer_set(v)
                    .into_iter()
                    .filter_map(|u| {
                        let p = geometry.path(u, v)?;
                        let g = antennas.satellite.gain_linear(p.off_axis_tx_deg)
                            * antennas.gateway.gain_linear(p.off_axis_rx_deg);
                        Some((u, k * g / (p.distance_m * p.distance_m)))
                    })
                    .collect()
            })
            .collect();
        InterferenceTable {
            per_victim,
            itu_threshold_linear: budget.itu_threshold_linear,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.per_victim.len()
    }

    /// Aggregate I/N of `victim` from co-channel interferers under `colors`.
    pub fn aggregate_i_over_n(&self, victim: usize, colors: &[Color]) -> f64 {
        let c = colors[victim];
        self.per_victim[victim]
            .iter()
            .filter(|&&(u, _)| colors[u] == c)
            .map(|&(_, x)| x)
            .sum()
    }

    /// Aggregate I/N per vertex; `None` for vacant antennas.
    pub fn link_i_over_n(&self, colors: &[Color], is_real: &[bool]) -> Vec<Option<f64>> {
        (0..self.num_vertices())
            .map(|v| is_real[v].then(|| self.aggregate_i_over_n(v, colors)))
            .collect()
    }

    /// LF count restricted to a vertex subset, with interference only from inside the subset.
    /// `local_colors[i]` is the color of `vertices[i]`; `local_of` maps global vertex -> local index.
    pub fn count_failures_in(&self, vertices: &[usize], local_of: &[usize], local_colors: &[Color]) -> usize {
        vertices
            .iter()
            .enumerate()
            .filter(|&(i, &v)| {
                let c = local_colors[i];
                let agg: f64 = self.per_victim[v]
                    .iter()
                    .filter(|&&(u, _)| local_of[u] != usize::MAX && local_colors[local_of[u]] == c)
                    .map(|&(_, x)| x)
                    .sum();
                agg > self.itu_threshold_linear
            })
            .count()
    }
}

/// `f_LF`: links whose aggregate I/N strictly exceeds the ITU threshold.
/// Only real links count; a real link left uncolored is an error.
pub fn count_link_failures(table: &InterferenceTable, colors: &[Color], is_real: &[bool]) -> Result<usize> {
    if colors.len() != table.num_vertices() {
        return Err(Error::invalid("coloring length does not match the interference table"));
    }
    let mut lf = 0;
    for v in 0..colors.len() {
        if !is_real[v] {
            continue;
        }
        if colors[v] == 0 {
            return Err(Error::invalid(format!("vertex {v} is uncolored")));
        }
        if table.aggregate_i_over_n(v, colors) > table.itu_threshold_linear {
            lf += 1;
        }
    }
    Ok(lf)
}

/// LF ranker over the whole slot, for use by the coloring algorithms.
pub struct LinkFailureRanker<'a> {
    table: &'a InterferenceTable,
    vertices: Vec<usize>,
    local_of: Vec<usize>,
}

impl<'a> LinkFailureRanker<'a> {
    /// Ranker over the real links in `vertices` (global indices); colorings
    /// passed to [`rank`](Self::rank) are indexed like `vertices`.
    pub fn new(table: &'a InterferenceTable, vertices: &[usize], is_real: &[bool]) -> Self {
        let mut local_of = vec![usize::MAX; table.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            local_of[v] = i;
        }
        LinkFailureRanker {
            table,
            vertices: vertices.iter().copied().filter(|&v| is_real[v]).collect(),
            local_of,
        }
    }

    pub fn rank(&self, local_colors: &[Color]) -> usize {
        self.vertices
            .iter()
            .filter(|&&v| {
                let c = local_colors[self.local_of[v]];
                let agg: f64 = self.table.per_victim[v]
                    .iter()
                    .filter(|&&(u, _)| {
                        let lu = self.local_of[u];
                        lu != usize::MAX && local_colors[lu] == c
                    })
                    .map(|&(_, x)| x)
                    .sum();
                agg > self.table.itu_threshold_linear
            })
            .count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCapacity {
    pub c_over_n: f64,
    pub sinr: f64,
    /// `B log2(1 + SINR)`, bit/s.
    pub rate_bps: f64,
    /// Interference-free bound `B log2(1 + C/N)`, bit/s.
    pub rate_bound_bps: f64,
}

/// C/N, SINR and Shannon capacity of a link whose carrier power is `carrier_w`.
pub fn cn_sinr_capacity(carrier_w: f64, interference_w: f64, noise_w: f64, bandwidth_hz: f64) -> LinkCapacity {
    let c_over_n = carrier_w / noise_w;
    let sinr = carrier_w / (interference_w + noise_w);
    LinkCapacity {
        c_over_n,
        sinr,
        rate_bps: bandwidth_hz * (1.0 + sinr).log2(),
        rate_bound_bps: bandwidth_hz * (1.0 + c_over_n).log2(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Degradation {
    /// `Delta R_s = 1 - R_s / R_bar_s` per link.
    pub per_link: Vec<f64>,
    /// `Delta R_hat = 1 - sum R / sum R_bar`.
    pub system: f64,
}

pub fn capacity_degradation(links: &[LinkCapacity]) -> Degradation {
    let per_link = links.iter().map(|l| 1.0 - l.rate_bps / l.rate_bound_bps).collect();
    let (r, rbar) = links
        .iter()
        .fold((0.0, 0.0), |(a, b), l| (a + l.rate_bps, b + l.rate_bound_bps));
    let system = if rbar > 0.0 { 1.0 - r / rbar } else { 0.0 };
    Degradation { per_link, system }
}

/// Capacity-degradation bound for an ITU-compliant link with SINR > 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub delta_r: f64,
    /// `log_{C/N}(1 + I_th)`.
    pub bound: f64,
    /// `log(1+SINR)/log(1+C/N) - log(SINR)/log(C/N)`.
    pub delta_gap: f64,
    pub holds: bool,
}

pub fn prop1_bound_check(c_over_n: f64, sinr: f64, itu_threshold_linear: f64) -> Result<BoundCheck> {
    if !(sinr > 1.0) {
        return Err(Error::invalid(format!("bound requires SINR > 1, got {sinr}")));
    }
    // compliance: C/N <= (1 + I_th) SINR, i.e. aggregate I/N <= I_th
    let i_over_n = c_over_n / sinr - 1.0;
    if i_over_n > itu_threshold_linear * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "link is not ITU compliant (I/N = {i_over_n:e} > {itu_threshold_linear:e})"
        )));
    }
    let delta_r = 1.0 - (1.0 + sinr).ln() / (1.0 + c_over_n).ln();
    let bound = (1.0 + itu_threshold_linear).ln() / c_over_n.ln();
    let delta_gap = (1.0 + sinr).ln() / (1.0 + c_over_n).ln() - sinr.ln() / c_over_n.ln();
    Ok(BoundCheck {
        delta_r,
        bound,
        delta_gap,
        holds: delta_r <= bound,
    })
}
