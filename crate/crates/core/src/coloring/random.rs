use rand::Rng;

use super::check_colors;
use crate::igraph::InterferenceGraph;
use crate::rng::{self, StreamRng};
use crate::{Color, Result};

/// Every vertex gets an independent uniform color in `1..=C`.
pub fn random_coloring(graph: &InterferenceGraph, num_colors: u32, seed: u64) -> Result<Vec<Color>> {
    check_colors(num_colors)?;
    let mut rng: StreamRng = rng::stream(seed, rng::RANDOM, 0);
    Ok((0..graph.num_vertices()).map(|_| rng.random_range(1..=num_colors)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_color() {
        let g = InterferenceGraph::edgeless(5);
        assert_eq!(random_coloring(&g, 1, 3).unwrap(), vec![1; 5]);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = InterferenceGraph::edgeless(50);
        assert_eq!(random_coloring(&g, 4, 9).unwrap(), random_coloring(&g, 4, 9).unwrap());
        assert_ne!(random_coloring(&g, 4, 9).unwrap(), random_coloring(&g, 4, 10).unwrap());
    }

    #[test]
    fn uniform_chi_square() {
        let n = 100_000;
        let c = 4;
        let colors = random_coloring(&InterferenceGraph::edgeless(n), c, 1).unwrap();
        let mut hist = [0f64; 5];
        for x in colors {
            hist[x as usize] += 1.0;
        }
        let e = n as f64 / c as f64;
        let chi2: f64 = hist[1..].iter().map(|h| (h - e).powi(2) / e).sum();
        // 3 degrees of freedom, p = 0.001
        assert!(chi2 < 16.27, "chi2 = {chi2}");
    }
}
