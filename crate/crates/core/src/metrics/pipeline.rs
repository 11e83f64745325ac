use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{RunReport, SlotMetrics, StageTiming};
use crate::antenna::AntennaPair;
use crate::coloring::{global_coloring, random_coloring, tcfa_cts, tcfa_gg, CtsParams, GgParams, TcfaParams};
use crate::decomp::{
    block_components, color_decomposed, connected_components, gs_kmeans, partition_by_clusters, recolor_boundary,
    Decomposition, DecompositionKind, RecolorMode,
};
use crate::igraph::{build_graph, conflicts, subgraph_density, CliquePartition, InterferenceGraph};
use crate::rf::{capacity_degradation, cn_sinr_capacity, count_link_failures, db_to_linear, InterferenceTable, LinkBudget, LinkCapacity, LinkFailureRanker, SlotGeometry};
use crate::rng::{self, derive_seed};
use crate::scenario::{
    gateway_positions, geodetic_to_ecef, propagate_constellation, subpoint_deg, to_earth_fixed, Ephemeris,
    GatewayStation, ScenarioConfig, Vec3,
};
use crate::selection::{continuity_mask, select_satellites, LinkAssignment};
use crate::vsu::{assign_vacant, capacity_gain, ReuseCapacityModel};
use crate::{Color, Error, Result, SatId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Random,
    Global,
    Gg,
    Cts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompChoice {
    #[default]
    None,
    Ccd,
    Gscd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    pub tcfa: bool,
    /// `p_s`.
    pub switch_proportionality: f64,
    pub epsilon: f64,
    pub decomposition: DecompChoice,
    /// GSCD cluster count; defaults to one cluster per ten gateways.
    pub clusters: Option<usize>,
    pub vsu: bool,
    pub reuse_model: ReuseCapacityModel,
    /// Overrides `num_subchannels`.
    pub subchannels: Option<u32>,
    /// Overrides every gateway's `n_antennas`.
    pub antennas_per_gateway: Option<u32>,
    /// Overrides `rng_seed`.
    pub seed: Option<u64>,
    pub gg: GgParams,
    pub cts: CtsParams,
    /// Stale iterations before the post-decomposition tabu pass stops.
    pub recolor_patience: usize,
}

impl RunOptions {
    pub fn new(algorithm: Algorithm) -> Self {
        RunOptions {
            algorithm,
            tcfa: false,
            switch_proportionality: 0.0,
            epsilon: 1e-9,
            decomposition: DecompChoice::None,
            clusters: None,
            vsu: false,
            reuse_model: ReuseCapacityModel::Conservative,
            subchannels: None,
            antennas_per_gateway: None,
            seed: None,
            gg: GgParams::default(),
            cts: CtsParams::default(),
            recolor_patience: 20,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tcfa && matches!(self.algorithm, Algorithm::Random | Algorithm::Global) {
            return Err(Error::config("tcfa", "only the gg and cts algorithms have time-continuous variants"));
        }
        if !(self.switch_proportionality >= 0.0) || !self.switch_proportionality.is_finite() {
            return Err(Error::config("ps", "must be a non-negative number"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if self.clusters == Some(0) {
            return Err(Error::config("clusters", "must be at least 1"));
        }
        if self.subchannels == Some(0) {
            return Err(Error::config("subchannels", "must be at least 1"));
        }
        if self.antennas_per_gateway == Some(0) {
            return Err(Error::config("nat", "must be at least 1"));
        }
        self.gg.validate()?;
        self.cts.validate()
    }
}

/// Everything produced for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub assignment: LinkAssignment,
    pub colors: Vec<Color>,
    pub reuse: Vec<Color>,
    /// Aggregate I/N (linear) per vertex; `None` for vacant antennas.
    pub i_over_n: Vec<Option<f64>>,
    /// Earth-fixed sub-satellite point `(lat, lon)` per vertex.
    pub sat_subpoints: Vec<Option<(f64, f64)>>,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub config: ScenarioConfig,
    pub report: RunReport,
    pub slots: Vec<SlotRecord>,
}

/// Runs the per-slot pipeline over the whole time grid. `ephemeris`, when
/// given, replaces propagation of the configured shells.
pub fn run_simulation(config: &ScenarioConfig, options: &RunOptions, ephemeris: Option<&Ephemeris>) -> Result<SimulationOutput> {
    options.validate()?;
    let mut cfg = config.clone();
    if let Some(c) = options.subchannels {
        cfg.num_subchannels = c;
    }
    if let Some(n) = options.antennas_per_gateway {
        cfg.gateways.iter_mut().for_each(|g| g.n_antennas = n);
    }
    if let Some(s) = options.seed {
        cfg.rng_seed = s;
    }
    cfg.validate()?;

    let owned;
    let eph = match ephemeris {
        Some(e) => {
            if e.num_slots() < cfg.time_grid.num_slots || e.num_sats() != cfg.num_sats() {
                return Err(Error::config(
                    "ephemeris",
                    format!(
                        "expected at least {} slots of {} satellites, got {} x {}",
                        cfg.time_grid.num_slots,
                        cfg.num_sats(),
                        e.num_slots(),
                        e.num_sats()
                    ),
                ));
            }
            e
        }
        None => {
            owned = propagate_constellation(&cfg.shells, &cfg.time_grid)?;
            &owned
        }
    };

    let gateways = cfg.gateways_by_id();
    let antennas = cfg.antennas()?;
    let budget = LinkBudget::from_config(&cfg, cfg.num_subchannels);
    let num_colors = cfg.num_subchannels;
    let weak = db_to_linear(cfg.weak_threshold_db);

    let block_cluster = match options.decomposition {
        DecompChoice::Gscd => {
            let pts = gateways
                .iter()
                .map(|g| geodetic_to_ecef(g.latitude_deg, g.longitude_deg, g.altitude_m, cfg.earth_model))
                .collect::<Result<Vec<_>>>()?;
            let k = options.clusters.unwrap_or(gateways.len().div_ceil(10)).min(gateways.len()).max(1);
            Some(gs_kmeans(&pts, k, derive_seed(cfg.rng_seed, rng::SUBGRAPH, 0))?)
        }
        _ => None,
    };

    let mut metrics = Vec::with_capacity(cfg.time_grid.num_slots);
    let mut records: Vec<SlotRecord> = Vec::with_capacity(cfg.time_grid.num_slots);
    for slot in 0..cfg.time_grid.num_slots {
        let prev = records.last();
        let (m, rec) = run_slot(
            &cfg,
            options,
            SlotContext {
                slot,
                eph,
                gateways: &gateways,
                antennas: &antennas,
                budget: &budget,
                num_colors,
                weak,
                block_cluster: block_cluster.as_deref(),
            },
            prev,
        )
        .map_err(|e| Error::Slot {
            slot,
            source: Box::new(e),
        })?;
        metrics.push(m);
        records.push(rec);
    }

    let report = RunReport::new(cfg.clone(), options.clone(), cfg.rng_seed, metrics);
    Ok(SimulationOutput {
        config: cfg,
        report,
        slots: records,
    })
}

/// Selection, interference table and graph of one slot.
#[derive(Debug, Clone)]
pub struct SlotProblem {
    pub assignment: LinkAssignment,
    pub table: InterferenceTable,
    pub graph: InterferenceGraph,
    pub partition: CliquePartition,
    pub is_real: Vec<bool>,
}

/// Builds the slot problem for `sats` (positions of every satellite at `slot`).
pub fn prepare_slot(cfg: &ScenarioConfig, sats: &[Vec3], slot: usize) -> Result<SlotProblem> {
    cfg.validate()?;
    let budget = LinkBudget::from_config(cfg, cfg.num_subchannels);
    prepare_slot_with(
        cfg,
        &cfg.gateways_by_id(),
        &cfg.antennas()?,
        &budget,
        db_to_linear(cfg.weak_threshold_db),
        sats,
        slot,
        &mut StageTiming::default(),
    )
}

#[allow(clippy::too_many_arguments)]
fn prepare_slot_with(
    cfg: &ScenarioConfig,
    gateways: &[GatewayStation],
    antennas: &AntennaPair,
    budget: &LinkBudget,
    weak: f64,
    sats: &[Vec3],
    slot: usize,
    timing: &mut StageTiming,
) -> Result<SlotProblem> {
    let t = Instant::now();
    let gw_pos = gateway_positions(cfg, gateways, slot)?;
    let assignment = select_satellites(sats, gateways, &gw_pos, slot, cfg.elevation_threshold_deg);
    timing.selection_ms = ms(t);

    let t = Instant::now();
    let geometry = SlotGeometry::new(&assignment, sats, gw_pos);
    let table = InterferenceTable::compute(&geometry, budget, antennas);
    timing.interference_ms = ms(t);

    let t = Instant::now();
    let vertices: Vec<Option<SatId>> = assignment.entries.iter().map(|e| e.sat).collect();
    let is_real: Vec<bool> = vertices.iter().map(Option::is_some).collect();
    let (graph, _) = build_graph(&table, vertices, weak, budget.itu_threshold_linear)?;
    let partition = CliquePartition::from_assignment(&assignment);
    timing.graph_ms = ms(t);
    Ok(SlotProblem {
        assignment,
        table,
        graph,
        partition,
        is_real,
    })
}

struct SlotContext<'a> {
    slot: usize,
    eph: &'a Ephemeris,
    gateways: &'a [GatewayStation],
    antennas: &'a AntennaPair,
    budget: &'a LinkBudget,
    num_colors: u32,
    weak: f64,
    block_cluster: Option<&'a [usize]>,
}

fn run_slot(
    cfg: &ScenarioConfig,
    options: &RunOptions,
    ctx: SlotContext<'_>,
    prev: Option<&SlotRecord>,
) -> Result<(SlotMetrics, SlotRecord)> {
    let slot = ctx.slot;
    let mut timing = StageTiming::default();
    let slot_seed = derive_seed(cfg.rng_seed, rng::SLOT, slot as u64);

    let sats = ctx.eph.slot(slot);
    let problem = prepare_slot_with(cfg, ctx.gateways, ctx.antennas, ctx.budget, ctx.weak, sats, slot, &mut timing)?;
    let SlotProblem {
        assignment,
        table,
        graph,
        partition,
        is_real,
    } = problem;

    // continuity against the previous slot
    let mask = continuity_mask(prev.map(|p| &p.assignment), &assignment);
    let prev_colors: BTreeMap<SatId, Color> = prev
        .map(|p| {
            p.assignment
                .entries
                .iter()
                .zip(&p.colors)
                .filter_map(|(e, &c)| e.sat.map(|s| (s, c)))
                .collect()
        })
        .unwrap_or_default();
    let n = graph.num_vertices();
    let mut tcfa = TcfaParams::unconstrained(n);
    tcfa.switch_proportionality = options.switch_proportionality;
    tcfa.epsilon = options.epsilon;
    if options.tcfa && slot > 0 {
        for (v, e) in assignment.entries.iter().enumerate() {
            if let Some(s) = e.sat {
                if let Some(&c) = prev_colors.get(&s).filter(|_| mask.is_constrained(s)) {
                    if (1..=ctx.num_colors).contains(&c) {
                        tcfa.constrained[v] = true;
                        tcfa.previous[v] = c;
                    }
                }
            }
        }
    }

    let t = Instant::now();
    let decomposition = match (options.decomposition, ctx.block_cluster) {
        (DecompChoice::None, _) => Decomposition {
            kind: DecompositionKind::Ccd,
            subgraphs: vec![(0..n).collect()],
            cut_edges: Vec::new(),
        },
        (DecompChoice::Ccd, _) if options.algorithm == Algorithm::Cts => block_components(&graph, &partition),
        (DecompChoice::Ccd, _) => connected_components(&graph),
        (DecompChoice::Gscd, Some(clusters)) => partition_by_clusters(&graph, &partition, clusters)?,
        (DecompChoice::Gscd, None) => unreachable!("clusters are computed for gscd"),
    };
    let stitched = color_decomposed(&graph, &decomposition, |i, subset, sub| {
        let seed = derive_seed(slot_seed, rng::SUBGRAPH, i as u64);
        color_subgraph(options, ctx.num_colors, &table, &is_real, &partition, &tcfa, subset, sub, seed)
    })?;
    timing.coloring_ms = ms(t);
    timing.subgraph_ms = stitched.subgraph_ms;

    let t = Instant::now();
    let colors = match options.algorithm {
        Algorithm::Gg => recolor_boundary(
            &graph,
            &stitched.colors,
            &decomposition.cut_edges,
            ctx.num_colors,
            &tcfa,
            RecolorMode::Greedy { seed: slot_seed },
        )?,
        Algorithm::Cts => recolor_boundary(
            &graph,
            &stitched.colors,
            &decomposition.cut_edges,
            ctx.num_colors,
            &tcfa,
            RecolorMode::Tabu {
                partition: &partition,
                params: CtsParams {
                    seed: slot_seed,
                    ..options.cts
                },
                patience: options.recolor_patience,
                seed: slot_seed,
            },
        )?,
        Algorithm::Random | Algorithm::Global => stitched.colors,
    };
    timing.recolor_ms = ms(t);

    let lf_count = count_link_failures(&table, &colors, &is_real)?;
    let i_over_n = table.link_i_over_n(&colors, &is_real);
    let noise = ctx.budget.noise_power_w();
    let links: Vec<LinkCapacity> = i_over_n
        .iter()
        .flatten()
        .map(|&x| cn_sinr_capacity(ctx.budget.tx_power_w, x * noise, noise, ctx.budget.subchannel_bandwidth_hz))
        .collect();
    let delta_r_hat = capacity_degradation(&links).system;

    let t = Instant::now();
    let (reuse, gamma_v) = if options.vsu {
        let scheme = assign_vacant(&graph, &colors, ctx.num_colors)?;
        let reused: Vec<bool> = (0..n).filter(|&v| is_real[v]).map(|v| scheme.reuse[v] != 0).collect();
        let g = capacity_gain(&links, &reused, ctx.budget.subchannel_bandwidth_hz, options.reuse_model);
        (scheme.reuse, g)
    } else {
        (vec![0; n], 0.0)
    };
    timing.vsu_ms = ms(t);

    let mut switch_events = 0;
    let mut continuity_events = 0;
    for (v, e) in assignment.entries.iter().enumerate() {
        let Some(s) = e.sat else { continue };
        if mask.m_c.get(&s) == Some(&true) {
            continuity_events += 1;
            if prev_colors.get(&s) != Some(&colors[v]) {
                switch_events += 1;
            }
        }
    }

    let densities: Vec<f64> = partition
        .blocks
        .iter()
        .map(|b| b.iter().copied().filter(|&v| is_real[v]).collect::<Vec<_>>())
        .filter(|b| b.len() >= 2)
        .map(|b| subgraph_density(&graph, &b))
        .collect();
    let num_links = assignment.num_real();
    let metrics = SlotMetrics {
        slot,
        num_links,
        lf_count,
        lf_rate: if num_links == 0 { 0.0 } else { lf_count as f64 / num_links as f64 },
        f_con: conflicts(&graph, &colors),
        edge_count: graph.edge_count(),
        delta_r_hat,
        gamma_v,
        reuse_count: reuse.iter().filter(|&&c| c != 0).count(),
        switch_events,
        continuity_events,
        num_subgraphs: decomposition.subgraphs.len(),
        cut_edges: decomposition.cut_edges.len(),
        mean_block_density: if densities.is_empty() {
            0.0
        } else {
            densities.iter().sum::<f64>() / densities.len() as f64
        },
        timing,
    };
    let sat_subpoints = assignment
        .entries
        .iter()
        .map(|e| e.sat.map(|s| subpoint_deg(&to_earth_fixed(cfg, slot, &sats[s.0 as usize]))))
        .collect();
    Ok((
        metrics,
        SlotRecord {
            assignment,
            colors,
            reuse,
            i_over_n,
            sat_subpoints,
        },
    ))
}

#[allow(clippy::too_many_arguments)]
fn color_subgraph(
    options: &RunOptions,
    num_colors: u32,
    table: &InterferenceTable,
    is_real: &[bool],
    partition: &CliquePartition,
    tcfa: &TcfaParams,
    subset: &[usize],
    sub: &InterferenceGraph,
    seed: u64,
) -> Result<Vec<Color>> {
    match options.algorithm {
        Algorithm::Random => random_coloring(sub, num_colors, seed),
        Algorithm::Global => global_coloring(sub, num_colors, seed),
        Algorithm::Gg => {
            let ranker = LinkFailureRanker::new(table, subset, is_real);
            let params = GgParams { seed, ..options.gg };
            tcfa_gg(sub, num_colors, &params, &tcfa.restrict(subset), &|c: &[Color]| ranker.rank(c))
        }
        Algorithm::Cts => {
            let ranker = LinkFailureRanker::new(table, subset, is_real);
            let params = CtsParams { seed, ..options.cts };
            let local = partition.restrict(subset, table.num_vertices());
            tcfa_cts(sub, &local, num_colors, &params, &tcfa.restrict(subset), &|c: &[Color]| ranker.rank(c))
        }
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}
