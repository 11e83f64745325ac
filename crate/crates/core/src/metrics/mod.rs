//! Simulation pipeline, per-slot metrics and report files.

mod output;
mod pipeline;

pub use output::{write_outputs, write_report};
pub use pipeline::{
    prepare_slot, run_simulation, Algorithm, DecompChoice, RunOptions, SimulationOutput, SlotProblem, SlotRecord,
};

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioConfig;

/// Wall-clock time per pipeline stage, in milliseconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub selection_ms: f64,
    pub interference_ms: f64,
    pub graph_ms: f64,
    pub coloring_ms: f64,
    pub recolor_ms: f64,
    pub vsu_ms: f64,
    pub subgraph_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub slot: usize,
    /// Working real satellites, `|W(t)|`.
    pub num_links: usize,
    pub lf_count: usize,
    pub lf_rate: f64,
    pub f_con: usize,
    pub edge_count: usize,
    pub delta_r_hat: f64,
    pub gamma_v: f64,
    pub reuse_count: usize,
    pub switch_events: usize,
    pub continuity_events: usize,
    pub num_subgraphs: usize,
    pub cut_edges: usize,
    /// Mean edge density of the gateway blocks with at least two real links.
    pub mean_block_density: f64,
    #[serde(skip)]
    pub timing: StageTiming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub options: RunOptions,
    pub seed: u64,
    pub slots: Vec<SlotMetrics>,
    pub fsr: f64,
    pub mean_lf_rate: f64,
    pub max_lf_rate: f64,
    pub mean_delta_r_hat: f64,
    pub mean_gamma_v: f64,
}

impl RunReport {
    pub(crate) fn new(config: ScenarioConfig, options: RunOptions, seed: u64, slots: Vec<SlotMetrics>) -> Self {
        let fsr = frequency_switching_rate(slots.iter().map(|s| (s.switch_events, s.continuity_events)));
        let lf = lf_rate_series(&slots);
        let mean = |xs: &mut dyn Iterator<Item = f64>| {
            let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
            if n == 0 {
                0.0
            } else {
                s / n as f64
            }
        };
        RunReport {
            mean_lf_rate: mean(&mut lf.iter().copied()),
            max_lf_rate: lf.iter().copied().fold(0.0, f64::max),
            mean_delta_r_hat: mean(&mut slots.iter().map(|s| s.delta_r_hat)),
            mean_gamma_v: mean(&mut slots.iter().map(|s| s.gamma_v)),
            config,
            options,
            seed,
            fsr,
            slots,
        }
    }
}

/// Switched link-slots over continuous link-slots; `0` when nothing was continuous.
pub fn frequency_switching_rate(events: impl IntoIterator<Item = (usize, usize)>) -> f64 {
    let (sw, cont) = events.into_iter().fold((0, 0), |(a, b), (s, c)| (a + s, b + c));
    if cont == 0 {
        0.0
    } else {
        sw as f64 / cont as f64
    }
}

pub fn lf_rate_series(slots: &[SlotMetrics]) -> Vec<f64> {
    slots.iter().map(|s| s.lf_rate).collect()
}

/// Empirical CCDF `P(X > x)` evaluated at every distinct sample, ascending.
pub fn i_over_n_ccdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| !x.is_nan()).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let above = (xs.len() - i - 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = above,
            _ => out.push((x, above)),
        }
    }
    out
}

/// `P(X > x)` for a single point.
pub fn ccdf_at(samples: &[f64], x: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().filter(|&&s| s > x).count() as f64 / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fsr_cases() {
        assert_eq!(frequency_switching_rate([(0, 5), (0, 3)]), 0.0);
        assert_eq!(frequency_switching_rate([(5, 5), (3, 3)]), 1.0);
        assert_eq!(frequency_switching_rate([(0, 0)]), 0.0);
    }

    #[test]
    fn fsr_mixed_trace() {
        // (continuous, switched) per link-slot over a 10-link trace
        let trace = [
            (true, false),
            (true, true),
            (false, false),
            (true, false),
            (false, false),
            (true, true),
            (true, false),
            (false, false),
            (true, true),
            (true, false),
        ];
        let events = trace.iter().map(|&(c, s)| ((c && s) as usize, c as usize));
        assert!((frequency_switching_rate(events) - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn ccdf_examples() {
        let xs = [0.01, 0.02, 0.05];
        assert_eq!(ccdf_at(&xs, 0.0603), 0.0);
        let c = i_over_n_ccdf(&[3.0, 1.0, 2.0, 2.0]);
        assert_eq!(c, vec![(1.0, 0.75), (2.0, 0.25), (3.0, 0.0)]);
    }

    proptest! {
        #[test]
        fn ccdf_matches_rank_oracle(xs in proptest::collection::vec(-5.0f64..5.0, 1..50)) {
            let c = i_over_n_ccdf(&xs);
            for w in c.windows(2) {
                prop_assert!(w[1].1 <= w[0].1);
                prop_assert!(w[0].0 < w[1].0);
            }
            for &(x, p) in &c {
                prop_assert!((p - ccdf_at(&xs, x)).abs() < 1e-12);
            }
        }
    }
}
