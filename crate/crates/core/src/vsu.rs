//! Vacant-subchannel utilization: a second, interference-free subchannel for
//! links whose closed neighborhood leaves colors unused.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::igraph::InterferenceGraph;
use crate::rf::LinkCapacity;
use crate::{Color, Error, Result};

/// `L_s`: colors absent from the closed neighborhood of each vertex.
pub fn feasible_color_sets(graph: &InterferenceGraph, base: &[Color], num_colors: u32) -> Vec<BTreeSet<Color>> {
    (0..graph.num_vertices())
        .map(|v| {
            let mut set: BTreeSet<Color> = (1..=num_colors).collect();
            set.remove(&base[v]);
            for &u in graph.neighbors(v) {
                set.remove(&base[u]);
            }
            set
        })
        .collect()
}

/// Duplicated graph: vertex `n + s` is the reuse copy of `s`.
#[derive(Debug, Clone)]
pub struct ReuseGraph {
    pub graph: InterferenceGraph,
    /// Base colors on `0..n`, zero on the copies.
    pub fixed: Vec<Color>,
}

pub fn build_reuse_graph(graph: &InterferenceGraph, base: &[Color]) -> Result<ReuseGraph> {
    let n = graph.num_vertices();
    if base.len() != n {
        return Err(Error::invalid("base coloring length does not match the graph"));
    }
    let mut vertices = graph.vertices().to_vec();
    vertices.extend_from_slice(graph.vertices());
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (u, v) in graph.edges() {
        edges.push((u, v));
        edges.push((n + u, n + v));
        edges.push((u, n + v));
        edges.push((v, n + u));
    }
    for s in 0..n {
        if !graph.is_virtual(s) {
            edges.push((s, n + s));
        }
    }
    let mut fixed = base.to_vec();
    fixed.resize(2 * n, 0);
    Ok(ReuseGraph {
        graph: InterferenceGraph::from_edges(vertices, edges)?,
        fixed,
    })
}

/// Reuse colors per vertex (`0` = none).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseScheme {
    pub reuse: Vec<Color>,
}

impl ReuseScheme {
    /// Number of links granted a second subchannel.
    pub fn count(&self) -> usize {
        self.reuse.iter().filter(|&&c| c != 0).count()
    }
}

/// Greedy list coloring of the reuse copies in descending degree order.
pub fn assign_vacant(graph: &InterferenceGraph, base: &[Color], num_colors: u32) -> Result<ReuseScheme> {
    let n = graph.num_vertices();
    if base.len() != n {
        return Err(Error::invalid("base coloring length does not match the graph"));
    }
    if let Some(v) = (0..n).find(|&v| !graph.is_virtual(v) && base[v] == 0) {
        return Err(Error::invalid(format!("vertex {v} has no base color")));
    }
    let lists = feasible_color_sets(graph, base, num_colors);
    let mut order: Vec<usize> = (0..n).filter(|&v| !graph.is_virtual(v)).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    let mut reuse = vec![0 as Color; n];
    for v in order {
        reuse[v] = lists[v]
            .iter()
            .copied()
            .find(|&c| graph.neighbors(v).iter().all(|&u| reuse[u] != c))
            .unwrap_or(0);
    }
    Ok(ReuseScheme { reuse })
}

/// Checks the three reuse constraints: a reuse color differs from the link's
/// own base color, from every neighbor's base color and from every
/// neighbor's reuse color.
pub fn reuse_is_valid(graph: &InterferenceGraph, base: &[Color], reuse: &[Color]) -> bool {
    (0..graph.num_vertices()).all(|v| {
        let r = reuse[v];
        r == 0
            || (r != base[v]
                && !graph.is_virtual(v)
                && graph.neighbors(v).iter().all(|&u| base[u] != r && reuse[u] != r))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReuseCapacityModel {
    /// Fixed transmit power spread over `2B`: `2B log2(1 + SINR / 2)`.
    #[default]
    Conservative,
    /// Fixed power spectral density: `2B log2(1 + SINR)`.
    Optimistic,
}

/// `gamma_v = sum R^r / sum R - 1` over the given links.
pub fn capacity_gain(links: &[LinkCapacity], reused: &[bool], bandwidth_hz: f64, model: ReuseCapacityModel) -> f64 {
    let base: f64 = links.iter().map(|l| l.rate_bps).sum();
    if base <= 0.0 {
        return 0.0;
    }
    let with: f64 = links
        .iter()
        .zip(reused)
        .map(|(l, &r)| match (r, model) {
            (false, _) => l.rate_bps,
            (true, ReuseCapacityModel::Conservative) => 2.0 * bandwidth_hz * (1.0 + l.sinr / 2.0).log2(),
            (true, ReuseCapacityModel::Optimistic) => 2.0 * bandwidth_hz * (1.0 + l.sinr).log2(),
        })
        .sum();
    with / base - 1.0
}
