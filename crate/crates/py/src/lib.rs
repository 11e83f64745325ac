//! Python bindings. Scenario and report objects cross the boundary as JSON.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use leofreq::antenna::GainMask as CoreGainMask;
use leofreq::coloring::{self, ConflictRanker, CtsParams, GgParams};
use leofreq::igraph::{self, CliquePartition, InterferenceGraph};
use leofreq::metrics::{self, Algorithm, DecompChoice, RunOptions};
use leofreq::scenario::{self, ScenarioConfig};
use leofreq::vsu::{self, ReuseCapacityModel};
use leofreq::{rf, Color, Error, SatId};

fn to_py(e: Error) -> PyErr {
    if e.is_config_error() || matches!(e, Error::InvalidInput(_)) {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(PyModule::import(py, "json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(name = "GainMask", module = "leofreq", from_py_object)]
#[derive(Clone)]
struct GainMask(CoreGainMask);

#[pymethods]
impl GainMask {
    /// `"s1528-like"` (satellite) or `"s1428-like"` (ground station).
    #[staticmethod]
    fn preset(name: &str, peak_gain_db: f64) -> PyResult<Self> {
        CoreGainMask::preset(name, peak_gain_db).map(GainMask).map_err(to_py)
    }

    fn gain_db(&self, off_axis_deg: f64) -> PyResult<f64> {
        self.0.gain_db(off_axis_deg).map_err(to_py)
    }

    fn gain_linear(&self, off_axis_deg: f64) -> f64 {
        self.0.gain_linear(off_axis_deg)
    }
}

#[pyclass(name = "Graph", module = "leofreq", from_py_object)]
#[derive(Clone)]
struct Graph(InterferenceGraph);

#[pymethods]
impl Graph {
    /// `virtual_vertices` lists indices of vacant antennas; they may not carry edges.
    #[new]
    #[pyo3(signature = (num_vertices, edges, virtual_vertices = Vec::new()))]
    fn new(num_vertices: usize, edges: Vec<(usize, usize)>, virtual_vertices: Vec<usize>) -> PyResult<Self> {
        let vertices = (0..num_vertices)
            .map(|v| (!virtual_vertices.contains(&v)).then_some(SatId(v as u32)))
            .collect();
        InterferenceGraph::from_edges(vertices, edges).map(Graph).map_err(to_py)
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.0.num_vertices()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.0.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.0.num_vertices() {
            return Err(PyValueError::new_err(format!("vertex {v} out of range")));
        }
        Ok(self.0.neighbors(v).to_vec())
    }

    fn degrees(&self) -> Vec<usize> {
        self.0.degrees()
    }

    fn conflict_count(&self, colors: Vec<Color>) -> PyResult<usize> {
        igraph::conflict_count(&self.0, &colors).map_err(to_py)
    }

    fn write_dimacs(&self, path: &str) -> PyResult<()> {
        let f = std::fs::File::create(path).map_err(|e| to_py(e.into()))?;
        self.0.write_dimacs(std::io::BufWriter::new(f)).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Graph(num_vertices={}, edge_count={})", self.0.num_vertices(), self.0.edge_count())
    }
}

/// Interference problem of one time slot.
#[pyclass(name = "SlotProblem", module = "leofreq")]
struct SlotProblem(metrics::SlotProblem);

#[pymethods]
impl SlotProblem {
    #[getter]
    fn graph(&self) -> Graph {
        Graph(self.0.graph.clone())
    }

    /// Antenna indices grouped by gateway.
    #[getter]
    fn blocks(&self) -> Vec<Vec<usize>> {
        self.0.partition.blocks.clone()
    }

    #[getter]
    fn is_real(&self) -> Vec<bool> {
        self.0.is_real.clone()
    }

    /// Serving satellite per antenna, `None` for vacant antennas.
    #[getter]
    fn satellites(&self) -> Vec<Option<u32>> {
        self.0.assignment.entries.iter().map(|e| e.sat.map(|s| s.0)).collect()
    }

    fn link_failures(&self, colors: Vec<Color>) -> PyResult<usize> {
        rf::count_link_failures(&self.0.table, &colors, &self.0.is_real).map_err(to_py)
    }

    /// Aggregate I/N per antenna (linear), `None` for vacant antennas.
    fn i_over_n(&self, colors: Vec<Color>) -> Vec<Option<f64>> {
        self.0.table.link_i_over_n(&colors, &self.0.is_real)
    }
}

#[pyclass(name = "Scenario", module = "leofreq", from_py_object)]
#[derive(Clone)]
struct Scenario(ScenarioConfig);

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        scenario::load_scenario(path).map(Scenario).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        cfg.validate().map_err(to_py)?;
        Ok(Scenario(cfg))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.0).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    #[getter]
    fn num_sats(&self) -> usize {
        self.0.num_sats()
    }

    #[getter]
    fn num_slots(&self) -> usize {
        self.0.time_grid.num_slots
    }

    #[getter]
    fn num_subchannels(&self) -> u32 {
        self.0.num_subchannels
    }

    fn prepare_slot(&self, slot: usize) -> PyResult<SlotProblem> {
        if slot >= self.0.time_grid.num_slots {
            return Err(PyValueError::new_err(format!("slot {slot} out of range")));
        }
        let grid = scenario::TimeGrid {
            t0_s: self.0.time_grid.time_s(slot),
            num_slots: 1,
            ..self.0.time_grid.clone()
        };
        let eph = scenario::propagate_constellation(&self.0.shells, &grid).map_err(to_py)?;
        metrics::prepare_slot(&self.0, eph.slot(0), slot).map(SlotProblem).map_err(to_py)
    }
}

#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    rf::db_to_linear(db)
}

#[pyfunction]
fn linear_to_db(x: f64) -> f64 {
    rf::linear_to_db(x)
}

/// `P G_s G_g / (4 pi d / lambda)^2` with the given masks, watts.
#[pyfunction]
fn single_link_interference(
    tx_power_w: f64,
    off_axis_tx_deg: f64,
    off_axis_rx_deg: f64,
    distance_m: f64,
    satellite: &GainMask,
    gateway: &GainMask,
    wavelength_m: f64,
) -> PyResult<f64> {
    let antennas = leofreq::antenna::AntennaPair {
        satellite: satellite.0.clone(),
        gateway: gateway.0.clone(),
    };
    rf::single_link_interference(tx_power_w, off_axis_tx_deg, off_axis_rx_deg, distance_m, &antennas, wavelength_m)
        .map_err(to_py)
}

/// Returns `(threshold, strong)` for one victim's interferer I/N values (linear).
#[pyfunction]
fn adaptive_threshold(values: Vec<f64>, weak_linear: f64, itu_linear: f64) -> (f64, Vec<usize>) {
    let row: Vec<(usize, f64)> = values.into_iter().enumerate().collect();
    let t = igraph::adaptive_threshold(&row, |u| u, weak_linear, itu_linear);
    (t.threshold, t.strong)
}

#[pyfunction]
#[pyo3(signature = (graph, num_colors, seed = 0))]
fn random_coloring(graph: &Graph, num_colors: u32, seed: u64) -> PyResult<Vec<Color>> {
    coloring::random_coloring(&graph.0, num_colors, seed).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (graph, num_colors, seed = 0))]
fn global_coloring(graph: &Graph, num_colors: u32, seed: u64) -> PyResult<Vec<Color>> {
    coloring::global_coloring(&graph.0, num_colors, seed).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (graph, num_colors, seed = 0, n_restarts = 100, perturb_sigma = 0.5))]
fn generalized_global(graph: &Graph, num_colors: u32, seed: u64, n_restarts: usize, perturb_sigma: f64) -> PyResult<Vec<Color>> {
    let params = GgParams {
        n_restarts,
        perturb_sigma,
        seed,
        ..GgParams::default()
    };
    params.validate().map_err(to_py)?;
    coloring::generalized_global(&graph.0, num_colors, &params, &ConflictRanker(&graph.0)).map_err(to_py)
}

/// `blocks` must partition the vertices into cliques of exactly `num_colors` vertices.
#[pyfunction]
#[pyo3(signature = (graph, blocks, num_colors, seed = 0, n_initial = 2000, n_candidates = 10, n_iterations = 500, n_neighbors = 250, tabu_length = 7))]
#[allow(clippy::too_many_arguments)]
fn clique_tabu_search(
    graph: &Graph,
    blocks: Vec<Vec<usize>>,
    num_colors: u32,
    seed: u64,
    n_initial: usize,
    n_candidates: usize,
    n_iterations: usize,
    n_neighbors: usize,
    tabu_length: usize,
) -> PyResult<Vec<Color>> {
    let params = CtsParams {
        n_initial,
        n_iterations,
        n_neighbors,
        n_candidates,
        tabu_length,
        seed,
    };
    params.validate().map_err(to_py)?;
    let partition = CliquePartition { blocks };
    partition.validate(graph.0.num_vertices()).map_err(to_py)?;
    coloring::clique_tabu_search(&graph.0, &partition, num_colors, &params, &ConflictRanker(&graph.0)).map_err(to_py)
}

/// Reuse colors for vacant subchannels; `0` where nothing can be reused.
#[pyfunction]
fn assign_vacant(graph: &Graph, base: Vec<Color>, num_colors: u32) -> PyResult<Vec<Color>> {
    vsu::assign_vacant(&graph.0, &base, num_colors).map(|s| s.reuse).map_err(to_py)
}

#[pyfunction]
fn reuse_is_valid(graph: &Graph, base: Vec<Color>, reuse: Vec<Color>) -> bool {
    vsu::reuse_is_valid(&graph.0, &base, &reuse)
}

/// Runs the full pipeline and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (scenario, algorithm, *, tcfa = false, ps = 0.0, decomposition = "none", clusters = None, vsu = false, optimistic_reuse = false, subchannels = None, antennas_per_gateway = None, seed = None, output_dir = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    scenario: &Scenario,
    algorithm: &str,
    tcfa: bool,
    ps: f64,
    decomposition: &str,
    clusters: Option<usize>,
    vsu: bool,
    optimistic_reuse: bool,
    subchannels: Option<u32>,
    antennas_per_gateway: Option<u32>,
    seed: Option<u64>,
    output_dir: Option<String>,
) -> PyResult<Py<PyAny>> {
    let algo = match algorithm {
        "random" => Algorithm::Random,
        "global" => Algorithm::Global,
        "gg" => Algorithm::Gg,
        "cts" => Algorithm::Cts,
        other => return Err(PyValueError::new_err(format!("unknown algorithm `{other}`"))),
    };
    let mut opts = RunOptions::new(algo);
    opts.tcfa = tcfa;
    opts.switch_proportionality = ps;
    opts.decomposition = match decomposition {
        "none" => DecompChoice::None,
        "ccd" => DecompChoice::Ccd,
        "gscd" => DecompChoice::Gscd,
        other => return Err(PyValueError::new_err(format!("unknown decomposition `{other}`"))),
    };
    opts.clusters = clusters;
    opts.vsu = vsu;
    if optimistic_reuse {
        opts.reuse_model = ReuseCapacityModel::Optimistic;
    }
    opts.subchannels = subchannels;
    opts.antennas_per_gateway = antennas_per_gateway;
    opts.seed = seed;

    let cfg = scenario.0.clone();
    let out = py.detach(|| metrics::run_simulation(&cfg, &opts, None)).map_err(to_py)?;
    if let Some(dir) = output_dir {
        metrics::write_outputs(&out, std::path::Path::new(&dir)).map_err(to_py)?;
    }
    let text = serde_json::to_string(&out.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

#[pymodule]
#[pyo3(name = "leofreq")]
fn leofreq_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GainMask>()?;
    m.add_class::<Graph>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<SlotProblem>()?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(linear_to_db, m)?)?;
    m.add_function(wrap_pyfunction!(single_link_interference, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(random_coloring, m)?)?;
    m.add_function(wrap_pyfunction!(global_coloring, m)?)?;
    m.add_function(wrap_pyfunction!(generalized_global, m)?)?;
    m.add_function(wrap_pyfunction!(clique_tabu_search, m)?)?;
    m.add_function(wrap_pyfunction!(assign_vacant, m)?)?;
    m.add_function(wrap_pyfunction!(reuse_is_valid, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
