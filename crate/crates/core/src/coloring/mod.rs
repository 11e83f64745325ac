//! Subchannel assignment as conflict-minimizing graph coloring.
//!
//! Colors are `1..=C`; `0` means uncolored. Algorithms minimize the conflict
//! count internally and pick among their restarts with an injected ranker,
//! which in the simulator is the link-failure count of the slot.

mod cts;
mod global;
mod gg;
mod random;

pub use cts::{clique_tabu_search, tabu_refine, tcfa_cts, CtsParams};
pub use global::global_coloring;
pub use gg::{generalized_global, tcfa_gg, GgParams};
pub use random::random_coloring;

use rand::Rng;

use crate::igraph::InterferenceGraph;
use crate::{Color, Error, Result};

/// Scores a complete coloring; lower is better.
pub trait Ranker: Sync {
    fn rank(&self, colors: &[Color]) -> usize;
}

impl<F: Fn(&[Color]) -> usize + Sync> Ranker for F {
    fn rank(&self, colors: &[Color]) -> usize {
        self(colors)
    }
}

/// Ranks by conflict count on `graph`.
pub struct ConflictRanker<'a>(pub &'a InterferenceGraph);

impl Ranker for ConflictRanker<'_> {
    fn rank(&self, colors: &[Color]) -> usize {
        crate::igraph::conflicts(self.0, colors)
    }
}

/// Time-continuity constraints for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TcfaParams {
    /// `p_s`.
    pub switch_proportionality: f64,
    pub epsilon: f64,
    /// Per vertex: serving the same gateway as in the previous slot.
    pub constrained: Vec<bool>,
    /// Per vertex: previous color, meaningful where `constrained`.
    pub previous: Vec<Color>,
}

impl TcfaParams {
    /// No constrained vertices; TCFA variants reduce to the plain algorithms.
    pub fn unconstrained(n: usize) -> Self {
        TcfaParams {
            switch_proportionality: 0.0,
            epsilon: 1e-9,
            constrained: vec![false; n],
            previous: vec![0; n],
        }
    }

    pub fn validate(&self, n: usize, num_colors: u32) -> Result<()> {
        if self.constrained.len() != n || self.previous.len() != n {
            return Err(Error::invalid("TCFA vectors do not match the graph"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon", "must be positive"));
        }
        if !(self.switch_proportionality >= 0.0) {
            return Err(Error::config("ps", "must be non-negative"));
        }
        for v in 0..n {
            if self.constrained[v] && !(1..=num_colors).contains(&self.previous[v]) {
                return Err(Error::invalid(format!(
                    "constrained vertex {v} has no previous color in 1..={num_colors}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_constrained(&self, v: usize) -> bool {
        self.constrained[v]
    }

    /// Restricted to `subset`, renumbered by position.
    pub fn restrict(&self, subset: &[usize]) -> TcfaParams {
        TcfaParams {
            switch_proportionality: self.switch_proportionality,
            epsilon: self.epsilon,
            constrained: subset.iter().map(|&v| self.constrained[v]).collect(),
            previous: subset.iter().map(|&v| self.previous[v]).collect(),
        }
    }
}

/// `min{delta * p_s / (k_c + eps), 1}`.
pub fn switch_probability(delta_conflicts: usize, k_c: usize, p_s: f64, epsilon: f64) -> f64 {
    if delta_conflicts == 0 {
        return 0.0;
    }
    (delta_conflicts as f64 * p_s / (k_c as f64 + epsilon)).min(1.0)
}

/// Number of neighbors of `v` holding each color, written into `hist[0..=C]`.
fn neighbor_histogram(graph: &InterferenceGraph, v: usize, colors: &[Color], hist: &mut [usize]) {
    hist.iter_mut().for_each(|h| *h = 0);
    for &u in graph.neighbors(v) {
        hist[colors[u] as usize] += 1;
    }
}

/// Color in `1..=C` used by the fewest neighbors of `v`; ties go to the smallest index.
pub fn least_used_color(graph: &InterferenceGraph, v: usize, colors: &[Color], num_colors: u32) -> Color {
    let mut hist = vec![0; num_colors as usize + 1];
    least_used_with(graph, v, colors, &mut hist, None::<&mut rand::rngs::ThreadRng>)
}

/// Least-used color with a scratch histogram; with `rng`, ties are broken uniformly.
pub(crate) fn least_used_with<R: Rng>(
    graph: &InterferenceGraph,
    v: usize,
    colors: &[Color],
    hist: &mut [usize],
    rng: Option<&mut R>,
) -> Color {
    neighbor_histogram(graph, v, colors, hist);
    let min = *hist[1..].iter().min().expect("at least one color");
    match rng {
        None => hist[1..].iter().position(|&h| h == min).unwrap() as Color + 1,
        Some(rng) => {
            let ties = hist[1..].iter().filter(|&&h| h == min).count();
            let pick = rng.random_range(0..ties);
            hist[1..]
                .iter()
                .enumerate()
                .filter(|(_, &h)| h == min)
                .nth(pick)
                .unwrap()
                .0 as Color
                + 1
        }
    }
}

fn check_colors(num_colors: u32) -> Result<()> {
    if num_colors == 0 {
        return Err(Error::config("num_subchannels", "must be at least 1"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SatId;
    use proptest::prelude::*;

    fn star(leaf_colors: &[Color]) -> (InterferenceGraph, Vec<Color>) {
        let n = leaf_colors.len() + 1;
        let g = InterferenceGraph::from_edges(
            (0..n as u32).map(|i| Some(SatId(i))).collect(),
            (1..n).map(|v| (0, v)),
        )
        .unwrap();
        let mut colors = vec![0];
        colors.extend_from_slice(leaf_colors);
        (g, colors)
    }

    #[test]
    fn least_used_examples() {
        let (g, c) = star(&[1, 1, 2]);
        assert_eq!(least_used_color(&g, 0, &c, 3), 3);
        let (g, c) = star(&[1, 2, 3]);
        assert_eq!(least_used_color(&g, 0, &c, 3), 1);
    }

    #[test]
    fn switch_probability_examples() {
        assert!((switch_probability(2, 1, 0.1, 1e-9) - 0.2).abs() < 1e-9);
        assert_eq!(switch_probability(0, 1, 5.0, 1e-9), 0.0);
        assert_eq!(switch_probability(1, 0, 1e-3, 1e-9), 1.0);
    }

    #[test]
    fn tcfa_validation() {
        let mut t = TcfaParams::unconstrained(2);
        assert!(t.validate(2, 3).is_ok());
        t.constrained[1] = true;
        assert!(t.validate(2, 3).is_err());
        t.previous[1] = 3;
        assert!(t.validate(2, 3).is_ok());
        assert!(t.validate(2, 2).is_err());
    }

    proptest! {
        #[test]
        fn least_used_matches_histogram(leaves in proptest::collection::vec(1u32..=5, 0..15), c in 1u32..=5) {
            let leaves: Vec<Color> = leaves.into_iter().map(|x| x.min(c)).collect();
            let (g, colors) = star(&leaves);
            let pick = least_used_color(&g, 0, &colors, c);
            let count = |k: Color| leaves.iter().filter(|&&x| x == k).count();
            let best = (1..=c).map(count).min().unwrap();
            prop_assert_eq!(count(pick), best);
            prop_assert!((1..pick).all(|k| count(k) > best));
        }
    }
}
