//! Scale reduction: connected components and gateway-cluster partitions,
//! plus recoloring of the edges cut by a partition.

use std::time::Instant;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{least_used_color, switch_probability, tabu_refine, CtsParams, TcfaParams};
use crate::igraph::{CliquePartition, InterferenceGraph};
use crate::rng::{self, StreamRng};
use crate::scenario::Vec3;
use crate::{Color, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecompositionKind {
    Ccd,
    Gscd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub kind: DecompositionKind,
    /// Sorted vertex lists, ordered by smallest member.
    pub subgraphs: Vec<Vec<usize>>,
    pub cut_edges: Vec<(usize, usize)>,
}

/// Connected components by iterative depth-first search.
pub fn connected_components(graph: &InterferenceGraph) -> Decomposition {
    let n = graph.num_vertices();
    let mut seen = vec![false; n];
    let mut subgraphs = Vec::new();
    let mut stack = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        stack.push(root);
        let mut comp = Vec::new();
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &u in graph.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        comp.sort_unstable();
        subgraphs.push(comp);
    }
    Decomposition {
        kind: DecompositionKind::Ccd,
        subgraphs,
        cut_edges: Vec::new(),
    }
}

/// Connected components after merging every gateway block into one piece,
/// so block-structured colorings can run per component.
pub fn block_components(graph: &InterferenceGraph, partition: &CliquePartition) -> Decomposition {
    let n = graph.num_vertices();
    let mut edges: Vec<(usize, usize)> = graph.edges().collect();
    for b in &partition.blocks {
        edges.extend(b.windows(2).map(|w| (w[0], w[1])));
    }
    let vertices = vec![Some(crate::SatId(0)); n];
    let merged = InterferenceGraph::from_edges(vertices, edges).expect("edges in range");
    connected_components(&merged)
}

/// Partition by gateway cluster: subgraph `i` holds the blocks of cluster `i`.
/// Empty clusters produce no subgraph.
pub fn partition_by_clusters(
    graph: &InterferenceGraph,
    partition: &CliquePartition,
    block_cluster: &[usize],
) -> Result<Decomposition> {
    if block_cluster.len() != partition.blocks.len() {
        return Err(Error::invalid("one cluster index per gateway block is required"));
    }
    let n = graph.num_vertices();
    let k = block_cluster.iter().max().map_or(0, |m| m + 1);
    let mut sets = vec![Vec::new(); k];
    let mut owner = vec![usize::MAX; n];
    for (b, block) in partition.blocks.iter().enumerate() {
        for &v in block {
            sets[block_cluster[b]].push(v);
            owner[v] = block_cluster[b];
        }
    }
    if owner.contains(&usize::MAX) {
        return Err(Error::invalid("clique partition does not cover every vertex"));
    }
    let cut_edges = graph.edges().filter(|&(u, v)| owner[u] != owner[v]).collect();
    let mut subgraphs: Vec<Vec<usize>> = sets.into_iter().filter(|s| !s.is_empty()).collect();
    for s in &mut subgraphs {
        s.sort_unstable();
    }
    subgraphs.sort();
    Ok(Decomposition {
        kind: DecompositionKind::Gscd,
        subgraphs,
        cut_edges,
    })
}

/// Within-cluster sum of squares.
pub fn wcss(points: &[Vec3], labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sum = vec![Vec3::zeros(); k];
    let mut cnt = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        sum[l] += p;
        cnt[l] += 1;
    }
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| (p - sum[l] / cnt[l] as f64).norm_squared())
        .sum()
}

/// K-means over gateway ECEF positions: k-means++ seeding, then Lloyd
/// iterations until no centroid moves by 1e-6 m or more.
pub fn gs_kmeans(points: &[Vec3], k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::config("clusters", format!("must be in 1..={n}, got {k}")));
    }
    let mut rng: StreamRng = rng::stream(seed, rng::SUBGRAPH, 0);
    let mut centroids = vec![points[rng.random_range(0..n)]];
    while centroids.len() < k {
        let d2: Vec<f64> = points.iter().map(|p| nearest(&centroids, p).1).collect();
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            d2.iter()
                .position(|&d| {
                    r -= d;
                    r < 0.0
                })
                .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        centroids.push(points[next]);
    }

    let mut labels = vec![0; n];
    for _ in 0..1000 {
        for (i, p) in points.iter().enumerate() {
            labels[i] = nearest(&centroids, p).0;
        }
        let mut sum = vec![Vec3::zeros(); k];
        let mut cnt = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            sum[l] += p;
            cnt[l] += 1;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            let next = if cnt[c] > 0 {
                sum[c] / cnt[c] as f64
            } else {
                // reseed from the point farthest from its centroid
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = (points[a] - centroids[labels[a]]).norm_squared();
                        let db = (points[b] - centroids[labels[b]]).norm_squared();
                        da.total_cmp(&db).then(b.cmp(&a))
                    })
                    .unwrap();
                labels[far] = c;
                points[far]
            };
            shift = shift.max((next - centroids[c]).norm());
            centroids[c] = next;
        }
        if shift < 1e-6 {
            break;
        }
    }
    for (i, p) in points.iter().enumerate() {
        labels[i] = nearest(&centroids, p).0;
    }
    Ok(labels)
}

fn nearest(centroids: &[Vec3], p: &Vec3) -> (usize, f64) {
    centroids
        .iter()
        .enumerate()
        .map(|(i, c)| (i, (p - c).norm_squared()))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .unwrap()
}

/// How the endpoints of cut edges are repaired after stitching.
#[derive(Debug, Clone)]
pub enum RecolorMode<'a> {
    /// Least-used recoloring in ascending vertex order.
    Greedy { seed: u64 },
    /// Tabu search on the whole graph until `patience` stale iterations.
    Tabu {
        partition: &'a CliquePartition,
        params: CtsParams,
        patience: usize,
        seed: u64,
    },
}

/// Repairs a stitched coloring along `cut_edges`. Never increases the conflict count.
pub fn recolor_boundary(
    graph: &InterferenceGraph,
    colors: &[Color],
    cut_edges: &[(usize, usize)],
    num_colors: u32,
    tcfa: &TcfaParams,
    mode: RecolorMode<'_>,
) -> Result<Vec<Color>> {
    let mut out = colors.to_vec();
    if cut_edges.is_empty() {
        return Ok(out);
    }
    match mode {
        RecolorMode::Greedy { seed } => {
            let mut ends: Vec<usize> = cut_edges.iter().flat_map(|&(u, v)| [u, v]).collect();
            ends.sort_unstable_by_key(|&v| (graph.vertices()[v], v));
            ends.dedup();
            let mut rng: StreamRng = rng::stream(seed, rng::RECOLOR, 0);
            for v in ends {
                let cand = least_used_color(graph, v, &out, num_colors);
                let count = |c: Color| graph.neighbors(v).iter().filter(|&&u| out[u] == c).count();
                let gain = count(out[v]).saturating_sub(count(cand));
                if tcfa.is_constrained(v) {
                    let p = switch_probability(gain, 1, tcfa.switch_proportionality, tcfa.epsilon);
                    if !(p > 0.0 && rng.random::<f64>() < p) {
                        continue;
                    }
                }
                if gain > 0 || !tcfa.is_constrained(v) {
                    out[v] = cand;
                }
            }
            Ok(out)
        }
        RecolorMode::Tabu {
            partition,
            params,
            patience,
            seed,
        } => tabu_refine(graph, partition, num_colors, &params, tcfa, out, patience, seed),
    }
}

/// Per-subgraph outcome of [`color_decomposed`].
#[derive(Debug, Clone)]
pub struct StitchedColoring {
    pub colors: Vec<Color>,
    /// Wall time of each subgraph's coloring, in milliseconds.
    pub subgraph_ms: Vec<f64>,
}

/// Colors every subgraph in parallel and stitches the results.
/// `color_one(index, subset, induced_graph)` returns local colors for `subset`.
pub fn color_decomposed<F>(graph: &InterferenceGraph, decomposition: &Decomposition, color_one: F) -> Result<StitchedColoring>
where
    F: Fn(usize, &[usize], &InterferenceGraph) -> Result<Vec<Color>> + Sync,
{
    let parts: Vec<Result<(Vec<Color>, f64)>> = decomposition
        .subgraphs
        .par_iter()
        .enumerate()
        .map(|(i, subset)| {
            let start = Instant::now();
            let sub = graph.induced(subset);
            let local = color_one(i, subset, &sub)?;
            Ok((local, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let mut colors = vec![0; graph.num_vertices()];
    let mut subgraph_ms = Vec::with_capacity(parts.len());
    for (subset, part) in decomposition.subgraphs.iter().zip(parts) {
        let (local, ms) = part?;
        for (&v, c) in subset.iter().zip(local) {
            colors[v] = c;
        }
        subgraph_ms.push(ms);
    }
    Ok(StitchedColoring { colors, subgraph_ms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::igraph::conflicts;
    use crate::SatId;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> InterferenceGraph {
        InterferenceGraph::from_edges((0..n as u32).map(|i| Some(SatId(i))).collect(), edges.iter().copied()).unwrap()
    }

    fn union_find_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        let mut p: Vec<usize> = (0..n).collect();
        for &(u, v) in edges {
            let (a, b) = (find(&mut p, u), find(&mut p, v));
            p[a.max(b)] = a.min(b);
        }
        let mut groups = std::collections::BTreeMap::<usize, Vec<usize>>::new();
        for v in 0..n {
            let r = find(&mut p, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    #[test]
    fn two_triangles() {
        let g = graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        let d = connected_components(&g);
        assert_eq!(d.subgraphs, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(d.cut_edges.is_empty());
    }

    #[test]
    fn blocks_merge_components() {
        let g = graph(4, &[(0, 2)]);
        let p = CliquePartition {
            blocks: vec![vec![0, 1], vec![2, 3]],
        };
        assert_eq!(block_components(&g, &p).subgraphs, vec![vec![0, 1, 2, 3]]);
        let g = graph(4, &[]);
        assert_eq!(block_components(&g, &p).subgraphs.len(), 2);
    }

    #[test]
    fn kmeans_separates_hemispheres() {
        let r = 6.371e6;
        let mut pts = Vec::new();
        for i in 0..5 {
            let d = i as f64 * 1e4;
            pts.push(Vec3::new(r, d, 0.0));
            pts.push(Vec3::new(-r, d, 0.0));
        }
        let labels = gs_kmeans(&pts, 2, 7).unwrap();
        for i in 0..5 {
            assert_eq!(labels[2 * i], labels[0]);
            assert_eq!(labels[2 * i + 1], labels[1]);
        }
        assert_ne!(labels[0], labels[1]);
        assert!(gs_kmeans(&pts, 0, 0).is_err());
        assert!(gs_kmeans(&pts, 11, 0).is_err());
    }

    #[test]
    fn kmeans_single_cluster_is_total_variance() {
        let pts: Vec<Vec3> = (0..7).map(|i| Vec3::new(i as f64, (i * i) as f64, 1.0)).collect();
        let labels = gs_kmeans(&pts, 1, 0).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
        let mean = pts.iter().sum::<Vec3>() / 7.0;
        let var: f64 = pts.iter().map(|p| (p - mean).norm_squared()).sum();
        assert!((wcss(&pts, &labels) - var).abs() < 1e-9);
    }

    #[test]
    fn kmeans_beats_random_assignments() {
        let centers = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1e6, 0.0, 0.0), Vec3::new(0.0, 1e6, 0.0)];
        let mut pts = Vec::new();
        for c in centers {
            for j in 0..3 {
                pts.push(c + Vec3::new(j as f64 * 1e4, (j % 2) as f64 * 2e4, 0.0));
            }
        }
        let got = wcss(&pts, &gs_kmeans(&pts, 3, 1).unwrap());
        let mut rng: StreamRng = rng::stream(5, 0, 0);
        for _ in 0..50 {
            let mut labels: Vec<usize> = (0..9).map(|_| rng.random_range(0..3)).collect();
            labels[..3].copy_from_slice(&[0, 1, 2]);
            assert!(got <= wcss(&pts, &labels) + 1e-6);
        }
    }

    #[test]
    fn cluster_partition_counts() {
        let g = graph(4, &[(0, 1), (2, 3), (1, 2)]);
        let p = CliquePartition {
            blocks: vec![vec![0, 1], vec![2, 3]],
        };
        let d = partition_by_clusters(&g, &p, &[0, 1]).unwrap();
        assert_eq!(d.cut_edges, vec![(1, 2)]);
        let d = partition_by_clusters(&g, &p, &[0, 0]).unwrap();
        assert!(d.cut_edges.is_empty());
    }

    #[test]
    fn greedy_recolor_resolves_free_conflict() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let tcfa = TcfaParams::unconstrained(3);
        let out = recolor_boundary(&g, &[1, 1, 2], &[(0, 1)], 3, &tcfa, RecolorMode::Greedy { seed: 0 }).unwrap();
        assert_eq!(conflicts(&g, &out), 0);
        let same = recolor_boundary(&g, &[1, 1, 2], &[], 3, &tcfa, RecolorMode::Greedy { seed: 0 }).unwrap();
        assert_eq!(same, vec![1, 1, 2]);
    }

    proptest! {
        #[test]
        fn components_match_union_find(n in 1usize..25, raw in proptest::collection::vec((0usize..25, 0usize..25), 0..30)) {
            let edges: Vec<(usize, usize)> = raw.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
            let g = graph(n, &edges);
            prop_assert_eq!(connected_components(&g).subgraphs, union_find_components(n, &edges));
        }

        #[test]
        fn edge_conservation(n_blocks in 1usize..6, raw in proptest::collection::vec((0usize..18, 0usize..18), 0..40), labels in proptest::collection::vec(0usize..3, 6)) {
            let n = n_blocks * 3;
            let edges: Vec<(usize, usize)> = raw.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
            let g = graph(n, &edges);
            let p = CliquePartition { blocks: (0..n_blocks).map(|b| vec![3 * b, 3 * b + 1, 3 * b + 2]).collect() };
            let d = partition_by_clusters(&g, &p, &labels[..n_blocks]).unwrap();
            let inside: usize = d.subgraphs.iter().map(|s| g.induced(s).edge_count()).sum();
            prop_assert_eq!(inside + d.cut_edges.len(), g.edge_count());
        }

        #[test]
        fn greedy_recolor_never_worse(n in 2usize..15, raw in proptest::collection::vec((0usize..15, 0usize..15), 0..30), colors in proptest::collection::vec(1u32..=3, 15), cut in 0usize..30) {
            let edges: Vec<(usize, usize)> = raw.into_iter().map(|(u, v)| (u % n, v % n)).filter(|(u, v)| u != v).collect();
            let g = graph(n, &edges);
            let all: Vec<(usize, usize)> = g.edges().collect();
            let cut_edges: Vec<_> = all.iter().copied().take(cut).collect();
            let before = conflicts(&g, &colors[..n]);
            let out = recolor_boundary(&g, &colors[..n], &cut_edges, 3, &TcfaParams::unconstrained(n), RecolorMode::Greedy { seed: 0 }).unwrap();
            prop_assert!(conflicts(&g, &out) <= before);
        }
    }
}
