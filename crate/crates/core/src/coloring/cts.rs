use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_colors, switch_probability, Ranker, TcfaParams};
use crate::igraph::{conflicts, CliquePartition, InterferenceGraph};
use crate::rng::{self, StreamRng};
use crate::{Color, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CtsParams {
    /// `N_in`: random initial solutions.
    pub n_initial: usize,
    /// `N_it`: tabu iterations per candidate.
    pub n_iterations: usize,
    /// `N_n`: accepted neighbors per iteration.
    pub n_neighbors: usize,
    /// `N_ca`: candidates kept for tabu search.
    pub n_candidates: usize,
    pub tabu_length: usize,
    pub seed: u64,
}

impl Default for CtsParams {
    fn default() -> Self {
        CtsParams {
            n_initial: 2000,
            n_iterations: 500,
            n_neighbors: 250,
            n_candidates: 10,
            tabu_length: 7,
            seed: 0,
        }
    }
}

impl CtsParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("cts.n_initial", self.n_initial),
            ("cts.n_iterations", self.n_iterations),
            ("cts.n_neighbors", self.n_neighbors),
            ("cts.n_candidates", self.n_candidates),
            ("cts.tabu_length", self.tabu_length),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::config(name, "must be positive"));
            }
        }
        if self.n_candidates > self.n_initial {
            return Err(Error::config("cts.n_candidates", "must not exceed cts.n_initial"));
        }
        Ok(())
    }
}

/// Clique-based tabu search without constrained vertices.
pub fn clique_tabu_search(
    graph: &InterferenceGraph,
    partition: &CliquePartition,
    num_colors: u32,
    params: &CtsParams,
    ranker: &dyn Ranker,
) -> Result<Vec<Color>> {
    let tcfa = TcfaParams::unconstrained(graph.num_vertices());
    tcfa_cts(graph, partition, num_colors, params, &tcfa, ranker)
}

/// Time-continuous clique-based tabu search. Every block must hold exactly
/// `C` vertices; every returned block is a permutation of `1..=C`.
pub fn tcfa_cts(
    graph: &InterferenceGraph,
    partition: &CliquePartition,
    num_colors: u32,
    params: &CtsParams,
    tcfa: &TcfaParams,
    ranker: &dyn Ranker,
) -> Result<Vec<Color>> {
    check_colors(num_colors)?;
    params.validate()?;
    let n = graph.num_vertices();
    partition.validate(n)?;
    tcfa.validate(n, num_colors)?;
    if let Some(b) = partition.blocks.iter().find(|b| b.len() != num_colors as usize) {
        return Err(Error::invalid(format!(
            "block of size {} does not match {num_colors} subchannels",
            b.len()
        )));
    }

    // keep only scores; the winners are regenerated from their streams
    let mut scored: Vec<(usize, usize)> = (0..params.n_initial)
        .into_par_iter()
        .map(|i| (conflicts(graph, &initial_solution(partition, num_colors, tcfa, params.seed, i)), i))
        .collect();
    scored.sort_unstable();
    scored.truncate(params.n_candidates);

    let zobrist = Zobrist::new(n, num_colors, params.seed);
    let best = scored
        .par_iter()
        .enumerate()
        .map(|(rank, &(_, i))| {
            let start = initial_solution(partition, num_colors, tcfa, params.seed, i);
            let mut rng: StreamRng = rng::stream(params.seed, rng::CTS_TABU, i as u64);
            let out = TabuSearch::new(graph, partition, tcfa, &zobrist, start).run(
                params.n_iterations,
                params.n_neighbors,
                params.tabu_length,
                None,
                &mut rng,
            );
            (ranker.rank(&out), rank, out)
        })
        .min_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)))
        .expect("at least one candidate");
    Ok(best.2)
}

/// Tabu search from an existing coloring, stopping when the best conflict
/// count has not improved for `patience` iterations. Block structure of the
/// start coloring is preserved.
#[allow(clippy::too_many_arguments)]
pub fn tabu_refine(
    graph: &InterferenceGraph,
    partition: &CliquePartition,
    num_colors: u32,
    params: &CtsParams,
    tcfa: &TcfaParams,
    start: Vec<Color>,
    patience: usize,
    seed: u64,
) -> Result<Vec<Color>> {
    check_colors(num_colors)?;
    let n = graph.num_vertices();
    partition.validate(n)?;
    tcfa.validate(n, num_colors)?;
    if start.len() != n || start.iter().any(|&c| c == 0 || c > num_colors) {
        return Err(Error::invalid("start coloring must use colors 1..=C on every vertex"));
    }
    let zobrist = Zobrist::new(n, num_colors, params.seed);
    let mut rng: StreamRng = rng::stream(seed, rng::RECOLOR, 0);
    Ok(TabuSearch::new(graph, partition, tcfa, &zobrist, start).run(
        params.n_iterations,
        params.n_neighbors,
        params.tabu_length,
        Some(patience),
        &mut rng,
    ))
}

/// One stage-1 solution: inherited colors fixed, the rest of each block a
/// random permutation of the leftover colors.
fn initial_solution(partition: &CliquePartition, num_colors: u32, tcfa: &TcfaParams, seed: u64, index: usize) -> Vec<Color> {
    let mut rng: StreamRng = rng::stream(seed, rng::CTS_INIT, index as u64);
    let n = tcfa.constrained.len();
    let mut colors = vec![0 as Color; n];
    let mut used = vec![false; num_colors as usize + 1];
    for block in &partition.blocks {
        used.iter_mut().for_each(|u| *u = false);
        for &v in block {
            let p = tcfa.previous[v];
            if tcfa.constrained[v] && (1..=num_colors).contains(&p) && !used[p as usize] {
                colors[v] = p;
                used[p as usize] = true;
            }
        }
        let mut left: Vec<Color> = (1..=num_colors).filter(|&c| !used[c as usize]).collect();
        left.shuffle(&mut rng);
        let mut it = left.into_iter();
        for &v in block {
            if colors[v] == 0 {
                colors[v] = it.next().unwrap_or(0);
            }
        }
    }
    colors
}

struct Zobrist {
    keys: Vec<u64>,
    stride: usize,
}

impl Zobrist {
    fn new(n: usize, num_colors: u32, seed: u64) -> Self {
        let stride = num_colors as usize + 1;
        let mut rng: StreamRng = rng::stream(seed, rng::ZOBRIST, 0);
        Zobrist {
            keys: (0..n * stride).map(|_| rng.random()).collect(),
            stride,
        }
    }

    fn key(&self, v: usize, c: Color) -> u64 {
        self.keys[v * self.stride + c as usize]
    }

    fn hash(&self, colors: &[Color]) -> u64 {
        colors.iter().enumerate().fold(0, |h, (v, &c)| h ^ self.key(v, c))
    }
}

struct TabuSearch<'a> {
    graph: &'a InterferenceGraph,
    partition: &'a CliquePartition,
    block_of: Vec<usize>,
    tcfa: &'a TcfaParams,
    zobrist: &'a Zobrist,
    colors: Vec<Color>,
    hash: u64,
    /// Same-color neighbors per vertex.
    conf: Vec<usize>,
    /// Vertices with `conf > 0`, with positions for O(1) removal.
    conflicted: Vec<usize>,
    slot: Vec<usize>,
    f: usize,
}

impl<'a> TabuSearch<'a> {
    fn new(
        graph: &'a InterferenceGraph,
        partition: &'a CliquePartition,
        tcfa: &'a TcfaParams,
        zobrist: &'a Zobrist,
        colors: Vec<Color>,
    ) -> Self {
        let n = graph.num_vertices();
        let conf: Vec<usize> = (0..n)
            .map(|v| graph.neighbors(v).iter().filter(|&&u| colors[u] == colors[v]).count())
            .collect();
        let mut s = TabuSearch {
            graph,
            partition,
            block_of: partition.block_index(n),
            tcfa,
            zobrist,
            hash: zobrist.hash(&colors),
            colors,
            f: conf.iter().sum::<usize>() / 2,
            conf,
            conflicted: Vec::new(),
            slot: vec![usize::MAX; n],
        };
        for v in 0..n {
            s.sync(v);
        }
        s
    }

    fn sync(&mut self, v: usize) {
        let inside = self.slot[v] != usize::MAX;
        if self.conf[v] > 0 && !inside {
            self.slot[v] = self.conflicted.len();
            self.conflicted.push(v);
        } else if self.conf[v] == 0 && inside {
            let i = self.slot[v];
            let last = *self.conflicted.last().unwrap();
            self.conflicted.swap_remove(i);
            if last != v {
                self.slot[last] = i;
            }
            self.slot[v] = usize::MAX;
        }
    }

    fn count(&self, v: usize, c: Color) -> usize {
        self.graph.neighbors(v).iter().filter(|&&u| self.colors[u] == c).count()
    }

    fn set_color(&mut self, v: usize, c: Color) {
        let old = self.colors[v];
        for i in 0..self.graph.degree(v) {
            let u = self.graph.neighbors(v)[i];
            if self.colors[u] == old {
                self.conf[u] -= 1;
                self.conf[v] -= 1;
                self.f -= 1;
                self.sync(u);
            } else if self.colors[u] == c {
                self.conf[u] += 1;
                self.conf[v] += 1;
                self.f += 1;
                self.sync(u);
            }
        }
        self.hash ^= self.zobrist.key(v, old) ^ self.zobrist.key(v, c);
        self.colors[v] = c;
        self.sync(v);
    }

    fn swap_delta(&self, x: usize, y: usize) -> isize {
        let (a, b) = (self.colors[x], self.colors[y]);
        let adj = self.graph.is_adjacent(x, y) as isize;
        self.count(x, b) as isize - self.count(x, a) as isize + self.count(y, a) as isize
            - self.count(y, b) as isize
            - 2 * adj
    }

    fn swapped_hash(&self, x: usize, y: usize) -> u64 {
        let (a, b) = (self.colors[x], self.colors[y]);
        let z = self.zobrist;
        self.hash ^ z.key(x, a) ^ z.key(x, b) ^ z.key(y, b) ^ z.key(y, a)
    }

    fn is_tabu(&self, tabu: &VecDeque<(u64, Vec<Color>)>, x: usize, y: usize) -> bool {
        let h = self.swapped_hash(x, y);
        tabu.iter().any(|(th, stored)| {
            *th == h
                && stored.iter().enumerate().all(|(v, &c)| {
                    let cur = if v == x {
                        self.colors[y]
                    } else if v == y {
                        self.colors[x]
                    } else {
                        self.colors[v]
                    };
                    cur == c
                })
        })
    }

    fn run(
        mut self,
        iterations: usize,
        pool_size: usize,
        tabu_length: usize,
        patience: Option<usize>,
        rng: &mut StreamRng,
    ) -> Vec<Color> {
        let mut tabu: VecDeque<(u64, Vec<Color>)> = VecDeque::with_capacity(tabu_length + 1);
        tabu.push_back((self.hash, self.colors.clone()));
        let mut best = (self.f, self.colors.clone());
        let mut stale = 0;
        let max_attempts = pool_size.saturating_mul(100);
        for _ in 0..iterations {
            if self.conflicted.is_empty() {
                break;
            }
            let mut accepted = 0;
            let mut attempts = 0;
            let mut choice: Option<(isize, usize, usize)> = None;
            while accepted < pool_size && attempts < max_attempts {
                attempts += 1;
                let x = self.conflicted[rng.random_range(0..self.conflicted.len())];
                let block = &self.partition.blocks[self.block_of[x]];
                if block.len() < 2 {
                    continue;
                }
                let mut y = block[rng.random_range(0..block.len() - 1)];
                if y == x {
                    y = block[block.len() - 1];
                }
                if self.colors[x] == self.colors[y] {
                    continue;
                }
                let delta = self.swap_delta(x, y);
                let k_c = self.tcfa.constrained[x] as usize + self.tcfa.constrained[y] as usize;
                let ok = k_c == 0 || {
                    let gain = (-delta).max(0) as usize;
                    let p = switch_probability(gain, k_c, self.tcfa.switch_proportionality, self.tcfa.epsilon);
                    p > 0.0 && rng.random::<f64>() < p
                };
                if !ok {
                    continue;
                }
                accepted += 1;
                if choice.is_some_and(|(d, _, _)| d <= delta) || self.is_tabu(&tabu, x, y) {
                    continue;
                }
                choice = Some((delta, x, y));
            }
            if let Some((_, x, y)) = choice {
                let (a, b) = (self.colors[x], self.colors[y]);
                self.set_color(x, b);
                self.set_color(y, a);
                tabu.push_back((self.hash, self.colors.clone()));
                if tabu.len() > tabu_length {
                    tabu.pop_front();
                }
            }
            if self.f < best.0 {
                best = (self.f, self.colors.clone());
                stale = 0;
            } else {
                stale += 1;
                if patience.is_some_and(|p| stale >= p) {
                    break;
                }
            }
        }
        best.1
    }
}
