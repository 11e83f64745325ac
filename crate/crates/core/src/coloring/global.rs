use rand::Rng;

use super::check_colors;
use crate::igraph::InterferenceGraph;
use crate::rng::{self, StreamRng};
use crate::{Color, Result};

/// Largest-degree-first greedy coloring with unbounded colors; vertices that
/// would need a color above `C` get a uniform random color instead.
pub fn global_coloring(graph: &InterferenceGraph, num_colors: u32, seed: u64) -> Result<Vec<Color>> {
    check_colors(num_colors)?;
    let n = graph.num_vertices();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));

    let mut colors = vec![0 as Color; n];
    let mut used = Vec::new();
    for &v in &order {
        used.clear();
        used.resize(graph.degree(v) + 2, false);
        for &u in graph.neighbors(v) {
            let c = colors[u] as usize;
            if c < used.len() {
                used[c] = true;
            }
        }
        colors[v] = (1..used.len()).find(|&c| !used[c]).unwrap() as Color;
    }

    let mut rng: StreamRng = rng::stream(seed, rng::GLOBAL, 0);
    for c in colors.iter_mut() {
        if *c > num_colors {
            *c = rng.random_range(1..=num_colors);
        }
    }
    Ok(colors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::igraph::conflict_count;
    use crate::SatId;

    fn graph(n: usize, edges: &[(usize, usize)]) -> InterferenceGraph {
        InterferenceGraph::from_edges((0..n as u32).map(|i| Some(SatId(i))).collect(), edges.iter().copied()).unwrap()
    }

    #[test]
    fn path_trace() {
        // a - b - c: b first
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(global_coloring(&g, 2, 0).unwrap(), vec![2, 1, 2]);
    }

    #[test]
    fn triangle_two_colors() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        for seed in 0..20 {
            let c = global_coloring(&g, 2, seed).unwrap();
            assert_eq!(conflict_count(&g, &c).unwrap(), 1);
        }
    }

    #[test]
    fn edgeless_all_one() {
        assert_eq!(global_coloring(&InterferenceGraph::edgeless(4), 3, 0).unwrap(), vec![1; 4]);
    }
}
