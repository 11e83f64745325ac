use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_colors, least_used_with, switch_probability, Ranker, TcfaParams};
use crate::igraph::InterferenceGraph;
use crate::rng::{self, StreamRng};
use crate::{Color, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgParams {
    /// `N_GG`.
    pub n_restarts: usize,
    /// Standard deviation of the Gaussian degree perturbation.
    pub perturb_sigma: f64,
    pub seed: u64,
    /// Break least-used ties at random instead of by smallest index.
    pub random_ties: bool,
}

impl Default for GgParams {
    fn default() -> Self {
        GgParams {
            n_restarts: 100,
            perturb_sigma: 0.5,
            seed: 0,
            random_ties: false,
        }
    }
}

impl GgParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_restarts == 0 {
            return Err(Error::config("gg.n_restarts", "must be at least 1"));
        }
        if !(self.perturb_sigma >= 0.0) {
            return Err(Error::config("gg.perturb_sigma", "must be non-negative"));
        }
        Ok(())
    }
}

/// Plain generalized global coloring (no constrained vertices).
pub fn generalized_global(
    graph: &InterferenceGraph,
    num_colors: u32,
    params: &GgParams,
    ranker: &dyn Ranker,
) -> Result<Vec<Color>> {
    tcfa_gg(graph, num_colors, params, &TcfaParams::unconstrained(graph.num_vertices()), ranker)
}

/// Time-continuous generalized global coloring: best of `n_restarts`
/// perturbed greedy passes by `(ranker, pass index)`.
pub fn tcfa_gg(
    graph: &InterferenceGraph,
    num_colors: u32,
    params: &GgParams,
    tcfa: &TcfaParams,
    ranker: &dyn Ranker,
) -> Result<Vec<Color>> {
    check_colors(num_colors)?;
    params.validate()?;
    tcfa.validate(graph.num_vertices(), num_colors)?;
    let best = (0..params.n_restarts)
        .into_par_iter()
        .map(|pass| {
            let colors = gg_pass(graph, num_colors, params, tcfa, pass as u64);
            (ranker.rank(&colors), pass, colors)
        })
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
        .expect("at least one pass");
    Ok(best.2)
}

fn gg_pass(graph: &InterferenceGraph, num_colors: u32, params: &GgParams, tcfa: &TcfaParams, pass: u64) -> Vec<Color> {
    let n = graph.num_vertices();
    let mut rng: StreamRng = rng::stream(params.seed, rng::GG_PASS, pass);
    let noise = Normal::new(0.0, params.perturb_sigma).expect("sigma validated");
    let perturbed: Vec<f64> = (0..n).map(|v| graph.degree(v) as f64 + noise.sample(&mut rng)).collect();
    let mut desc: Vec<usize> = (0..n).collect();
    desc.sort_by(|&a, &b| perturbed[b].total_cmp(&perturbed[a]).then(a.cmp(&b)));

    let mut colors = vec![0 as Color; n];
    let mut hist = vec![0usize; num_colors as usize + 1];
    let mut tie_rng = params.random_ties.then(|| rng::stream(params.seed, rng::GG_PASS ^ 0xFF, pass));

    // inherit
    for (v, c) in colors.iter_mut().enumerate() {
        if tcfa.is_constrained(v) {
            *c = tcfa.previous[v];
        }
    }
    // conflict-free colors only, smallest first
    for &v in &desc {
        if colors[v] != 0 {
            continue;
        }
        hist.iter_mut().for_each(|h| *h = 0);
        for &u in graph.neighbors(v) {
            hist[colors[u] as usize] += 1;
        }
        if let Some(c) = (1..=num_colors as usize).find(|&c| hist[c] == 0) {
            colors[v] = c as Color;
        }
    }
    // least-used for the rest
    for &v in &desc {
        if colors[v] == 0 {
            colors[v] = least_used_with(graph, v, &colors, &mut hist, tie_rng.as_mut());
        }
    }
    // recoloring sweep, ascending perturbed degree
    for &v in desc.iter().rev() {
        if !tcfa.is_constrained(v) {
            continue;
        }
        let cand = least_used_with(graph, v, &colors, &mut hist, tie_rng.as_mut());
        let gain = hist[colors[v] as usize].saturating_sub(hist[cand as usize]);
        let p = switch_probability(gain, 1, tcfa.switch_proportionality, tcfa.epsilon);
        if p > 0.0 && rng.random::<f64>() < p {
            colors[v] = cand;
        }
    }
    for &v in desc.iter().rev() {
        if !tcfa.is_constrained(v) {
            colors[v] = least_used_with(graph, v, &colors, &mut hist, tie_rng.as_mut());
        }
    }
    colors
}
