//! Per-slot interference graph with adaptive per-victim thresholds.

use std::io::Write;

use rayon::prelude::*;

use crate::rf::InterferenceTable;
use crate::selection::LinkAssignment;
use crate::{Color, Error, Result, SatId};

/// Undirected simple graph over the links of one slot. Vertex `i` is the
/// `i`-th antenna entry of the slot assignment; `None` marks a VIRTUAL vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceGraph {
    vertices: Vec<Option<SatId>>,
    adj: Vec<Vec<usize>>,
    edge_count: usize,
}

impl InterferenceGraph {
    /// Builds the graph from an undirected edge list; duplicates and either
    /// orientation are accepted.
    pub fn from_edges(vertices: Vec<Option<SatId>>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = vertices.len();
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            if vertices[u].is_none() || vertices[v].is_none() {
                return Err(Error::invalid(format!("edge ({u}, {v}) touches a VIRTUAL vertex")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(InterferenceGraph {
            vertices,
            adj,
            edge_count: edge_count / 2,
        })
    }

    /// Edgeless graph on `n` real vertices with placeholder ids `0..n`.
    pub fn edgeless(n: usize) -> Self {
        InterferenceGraph {
            vertices: (0..n as u32).map(|i| Some(SatId(i))).collect(),
            adj: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn vertices(&self) -> &[Option<SatId>] {
        &self.vertices
    }

    pub fn is_virtual(&self, v: usize) -> bool {
        self.vertices[v].is_none()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Subgraph induced by `subset`; vertex `i` of the result is `subset[i]`.
    pub fn induced(&self, subset: &[usize]) -> InterferenceGraph {
        let mut local = vec![usize::MAX; self.num_vertices()];
        for (i, &v) in subset.iter().enumerate() {
            local[v] = i;
        }
        let mut edge_count = 0;
        let adj: Vec<Vec<usize>> = subset
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adj[v]
                    .iter()
                    .filter_map(|&u| (local[u] != usize::MAX).then_some(local[u]))
                    .collect();
                list.sort_unstable();
                edge_count += list.len();
                list
            })
            .collect();
        InterferenceGraph {
            vertices: subset.iter().map(|&v| self.vertices[v]).collect(),
            adj,
            edge_count: edge_count / 2,
        }
    }

    /// DIMACS edge format, 1-based vertex numbers.
    pub fn write_dimacs<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "p edge {} {}", self.num_vertices(), self.edge_count)?;
        for (u, v) in self.edges() {
            writeln!(out, "e {} {}", u + 1, v + 1)?;
        }
        Ok(())
    }
}

/// Result of the adaptive threshold rule for one victim.
#[derive(Debug, Clone, PartialEq)]
pub struct VictimThreshold {
    /// I/N of the first interferer outside the compliant prefix, or `+inf`.
    pub threshold: f64,
    /// Interferers that receive an edge, in ascending I/N order.
    pub strong: Vec<usize>,
}

/// Splits one victim's interferers into a weak prefix whose summed I/N stays
/// within `itu_linear` and a strong suffix that becomes edges.
///
/// Interferers below `weak_linear` are ignored. Equal I/N values are ordered
/// by `key` and included in the prefix in that order.
pub fn adaptive_threshold<K: Ord + Copy>(
    interferers: &[(usize, f64)],
    key: impl Fn(usize) -> K,
    weak_linear: f64,
    itu_linear: f64,
) -> VictimThreshold {
    let mut above: Vec<(usize, f64)> = interferers.iter().copied().filter(|&(_, x)| x >= weak_linear).collect();
    above.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| key(a.0).cmp(&key(b.0))));
    let mut sum = 0.0;
    let mut cut = above.len();
    for (i, &(_, x)) in above.iter().enumerate() {
        if sum + x > itu_linear {
            cut = i;
            break;
        }
        sum += x;
    }
    VictimThreshold {
        threshold: above.get(cut).map_or(f64::INFINITY, |&(_, x)| x),
        strong: above[cut..].iter().map(|&(u, _)| u).collect(),
    }
}

/// Thresholds for every victim of an interference table; VIRTUAL victims get `+inf`.
pub fn adaptive_thresholds(
    table: &InterferenceTable,
    vertices: &[Option<SatId>],
    weak_linear: f64,
    itu_linear: f64,
) -> Vec<VictimThreshold> {
    table
        .per_victim
        .par_iter()
        .map(|row| adaptive_threshold(row, |u| (vertices[u], u), weak_linear, itu_linear))
        .collect()
}

/// Interference graph of a slot: union of every victim's strong interferers.
pub fn build_graph(
    table: &InterferenceTable,
    vertices: Vec<Option<SatId>>,
    weak_linear: f64,
    itu_linear: f64,
) -> Result<(InterferenceGraph, Vec<f64>)> {
    if table.num_vertices() != vertices.len() {
        return Err(Error::invalid("interference table does not match the vertex list"));
    }
    let th = adaptive_thresholds(table, &vertices, weak_linear, itu_linear);
    let edges: Vec<(usize, usize)> = th
        .iter()
        .enumerate()
        .flat_map(|(s, t)| t.strong.iter().map(move |&u| (s, u)))
        .collect();
    let g = InterferenceGraph::from_edges(vertices, edges)?;
    Ok((g, th.into_iter().map(|t| t.threshold).collect()))
}

/// `f_con`: number of edges whose endpoints share a color (each edge once).
pub fn conflict_count(graph: &InterferenceGraph, colors: &[Color]) -> Result<usize> {
    if colors.len() != graph.num_vertices() {
        return Err(Error::invalid("coloring length does not match the graph"));
    }
    if let Some(v) = colors.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("vertex {v} is uncolored")));
    }
    Ok(conflicts(graph, colors))
}

pub(crate) fn conflicts(graph: &InterferenceGraph, colors: &[Color]) -> usize {
    graph.edges().filter(|&(u, v)| colors[u] == colors[v]).count()
}

/// Vertices grouped by serving gateway.
#[derive(Debug, Clone, PartialEq)]
pub struct CliquePartition {
    pub blocks: Vec<Vec<usize>>,
}

impl CliquePartition {
    /// One block per gateway, vacant antennas included, in entry order.
    pub fn from_assignment(assignment: &LinkAssignment) -> Self {
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (v, e) in assignment.entries.iter().enumerate() {
            if blocks.len() <= e.gateway_index {
                blocks.resize(e.gateway_index + 1, Vec::new());
            }
            blocks[e.gateway_index].push(v);
        }
        CliquePartition { blocks }
    }

    /// Checks that the blocks partition `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &v in self.blocks.iter().flatten() {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(Error::invalid(format!("vertex {v} is out of range or in two blocks")));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("blocks do not cover every vertex"));
        }
        Ok(())
    }

    /// `block_of[v]` for every vertex.
    pub fn block_index(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                out[v] = b;
            }
        }
        out
    }

    /// Blocks restricted and renumbered to `subset` (local index = position in subset).
    pub fn restrict(&self, subset: &[usize], n: usize) -> CliquePartition {
        let mut local = vec![usize::MAX; n];
        for (i, &v) in subset.iter().enumerate() {
            local[v] = i;
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().filter_map(|&v| (local[v] != usize::MAX).then_some(local[v])).collect::<Vec<_>>())
            .filter(|b| !b.is_empty())
            .collect();
        CliquePartition { blocks }
    }
}

/// Edge density `2 E_k / (k (k - 1))` of the subgraph induced by `subset`.
pub fn subgraph_density(graph: &InterferenceGraph, subset: &[usize]) -> f64 {
    let k = subset.len();
    if k < 2 {
        return 0.0;
    }
    let mut e = 0usize;
    for (i, &u) in subset.iter().enumerate() {
        for &v in &subset[i + 1..] {
            if graph.is_adjacent(u, v) {
                e += 1;
            }
        }
    }
    2.0 * e as f64 / (k * (k - 1)) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn complete(n: usize) -> InterferenceGraph {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        InterferenceGraph::from_edges((0..n as u32).map(|i| Some(SatId(i))).collect(), edges).unwrap()
    }

    /// Greedy prefix enumeration written independently of `adaptive_threshold`.
    fn prefix_oracle(values: &[f64], weak: f64, itu: f64) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= weak).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
        for keep in (0..=idx.len()).rev() {
            let s: f64 = idx[..keep].iter().map(|&i| values[i]).sum();
            if s <= itu {
                return idx[keep..].to_vec();
            }
        }
        unreachable!()
    }

    #[test]
    fn threshold_example() {
        let row = [(0, 0.01), (1, 0.02), (2, 0.04), (3, 0.5)];
        let t = adaptive_threshold(&row, |u| u, 0.0, 0.0603);
        assert_eq!(t.strong, vec![2, 3]);
        assert_eq!(t.threshold, 0.04);
    }

    #[test]
    fn threshold_trivial_cases() {
        let t = adaptive_threshold(&[(0, 0.001)], |u| u, 0.05, 0.0603);
        assert!(t.strong.is_empty());
        assert_eq!(t.threshold, f64::INFINITY);
        let t = adaptive_threshold(&[(4, 0.2)], |u| u, 0.05, 0.0603);
        assert_eq!(t.strong, vec![4]);
    }

    #[test]
    fn equal_values_split_by_key() {
        let row = [(0, 0.03), (1, 0.03), (2, 0.03)];
        let t = adaptive_threshold(&row, std::cmp::Reverse, 0.0, 0.0603);
        // prefix keeps the first two in key order (2, 1)
        assert_eq!(t.strong, vec![0]);
    }

    #[test]
    fn graph_basics() {
        let g = InterferenceGraph::from_edges(
            vec![Some(SatId(0)), Some(SatId(1)), None, Some(SatId(3))],
            [(0, 1), (1, 0), (3, 1)],
        )
        .unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degrees(), vec![1, 2, 0, 1]);
        assert!(g.is_adjacent(1, 3) && g.is_adjacent(3, 1));
        assert!(!g.is_adjacent(0, 3));
        assert!(InterferenceGraph::from_edges(vec![Some(SatId(0))], [(0, 0)]).is_err());
        assert!(InterferenceGraph::from_edges(vec![Some(SatId(0)), None], [(0, 1)]).is_err());
    }

    #[test]
    fn conflict_counts() {
        let k4 = complete(4);
        assert_eq!(conflict_count(&k4, &[1, 1, 1, 1]).unwrap(), 6);
        assert_eq!(conflict_count(&k4, &[1, 2, 3, 4]).unwrap(), 0);
        assert!(conflict_count(&k4, &[1, 0, 3, 4]).is_err());
    }

    #[test]
    fn densities() {
        let k4 = complete(4);
        assert_eq!(subgraph_density(&k4, &[0, 1, 2, 3]), 1.0);
        assert_eq!(subgraph_density(&InterferenceGraph::edgeless(4), &[0, 1, 2, 3]), 0.0);
        let minus = InterferenceGraph::from_edges(
            k4.vertices().to_vec(),
            k4.edges().filter(|&e| e != (0, 1)),
        )
        .unwrap();
        assert!((subgraph_density(&minus, &[0, 1, 2, 3]) - 10.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn dimacs_dump() {
        let mut buf = Vec::new();
        complete(3).write_dimacs(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "p edge 3 3\ne 1 2\ne 1 3\ne 2 3\n");
    }

    #[test]
    fn induced_subgraph() {
        let g = complete(5).induced(&[4, 1, 2]);
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.vertices()[0], Some(SatId(4)));
    }

    #[test]
    fn build_graph_union_and_virtual() {
        let table = InterferenceTable {
            per_victim: vec![vec![(1, 0.5), (2, 0.001)], vec![(0, 0.001)], vec![], vec![]],
            itu_threshold_linear: 0.0603,
        };
        let (g, th) = build_graph(&table, vec![Some(SatId(0)), Some(SatId(1)), Some(SatId(2)), None], 0.0, 0.0603).unwrap();
        // 0 sees 1 strongly; 1 does not see 0 strongly, union keeps the edge
        assert!(g.is_adjacent(0, 1));
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(3), 0);
        assert_eq!(th[0], 0.5);
        assert_eq!(th[1], f64::INFINITY);
    }

    proptest! {
        #[test]
        fn threshold_matches_oracle_and_is_sound(values in proptest::collection::vec(0.0f64..0.08, 0..12), weak in 0.0f64..0.03) {
            let itu = 0.0603;
            let row: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
            let t = adaptive_threshold(&row, |u| u, weak, itu);
            let mut got = t.strong.clone();
            got.sort_unstable();
            let mut want = prefix_oracle(&values, weak, itu);
            want.sort_unstable();
            prop_assert_eq!(&got, &want);
            let residual: f64 = (0..values.len())
                .filter(|i| values[*i] >= weak && !t.strong.contains(i))
                .map(|i| values[i])
                .sum();
            prop_assert!(residual <= itu);
        }

        #[test]
        fn lowering_weak_threshold_never_removes_edges(values in proptest::collection::vec(0.0f64..0.08, 0..12), hi in 0.0f64..0.05, frac in 0.0f64..1.0) {
            let row: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
            let lo = hi * frac;
            let a = adaptive_threshold(&row, |u| u, hi, 0.0603);
            let b = adaptive_threshold(&row, |u| u, lo, 0.0603);
            for u in &a.strong {
                prop_assert!(b.strong.contains(u));
            }
        }

        #[test]
        fn clique_blocks_partition(sizes in proptest::collection::vec(1usize..5, 1..6)) {
            let mut blocks = Vec::new();
            let mut next = 0;
            for s in sizes {
                blocks.push((next..next + s).collect::<Vec<_>>());
                next += s;
            }
            let p = CliquePartition { blocks };
            prop_assert!(p.validate(next).is_ok());
            prop_assert!(p.validate(next + 1).is_err());
        }
    }
}
