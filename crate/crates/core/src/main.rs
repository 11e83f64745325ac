use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use leofreq::igraph::build_graph;
use leofreq::metrics::{run_simulation, write_outputs, Algorithm, DecompChoice, RunOptions};
use leofreq::rf::{db_to_linear, InterferenceTable, LinkBudget, SlotGeometry};
use leofreq::scenario::{gateway_positions, load_ephemeris, load_scenario, propagate_constellation, save_ephemeris};
use leofreq::selection::select_satellites;
use leofreq::vsu::ReuseCapacityModel;
use leofreq::{Error, Result};

#[derive(Parser)]
#[command(name = "leofreq", version, about = "Feeder-link subchannel allocation for LEO constellations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Random,
    Global,
    Gg,
    Cts,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecompArg {
    None,
    Ccd,
    Gscd,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full allocation pipeline and write reports.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        algo: AlgoArg,
        /// Time-continuous variant (gg and cts only).
        #[arg(long)]
        tcfa: bool,
        /// Switching proportionality p_s.
        #[arg(long, default_value_t = 0.0)]
        ps: f64,
        #[arg(long, default_value_t = 1e-9)]
        epsilon: f64,
        #[arg(long, value_enum, default_value = "none")]
        decomp: DecompArg,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        vsu: bool,
        /// Reused links keep power spectral density instead of total power.
        #[arg(long)]
        vsu_optimistic: bool,
        #[arg(long)]
        subchannels: Option<u32>,
        #[arg(long)]
        nat: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Precomputed ephemeris CSV (slot,sat_id,x_m,y_m,z_m).
        #[arg(long)]
        ephemeris: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        gg_restarts: usize,
        #[arg(long, default_value_t = 0.5)]
        gg_sigma: f64,
        #[arg(long)]
        gg_random_ties: bool,
        #[arg(long, default_value_t = 2000)]
        cts_initial: usize,
        #[arg(long, default_value_t = 10)]
        cts_candidates: usize,
        #[arg(long, default_value_t = 500)]
        cts_iterations: usize,
        #[arg(long, default_value_t = 250)]
        cts_neighbors: usize,
        #[arg(long, default_value_t = 7)]
        tabu_length: usize,
        #[arg(long, default_value_t = 20)]
        recolor_patience: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Propagate the constellation and write an ephemeris CSV.
    Propagate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dump one slot's interference graph in DIMACS edge format.
    Graph {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        slot: usize,
        #[arg(long)]
        nat: Option<u32>,
        #[arg(long)]
        subchannels: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            algo,
            tcfa,
            ps,
            epsilon,
            decomp,
            clusters,
            vsu,
            vsu_optimistic,
            subchannels,
            nat,
            seed,
            ephemeris,
            gg_restarts,
            gg_sigma,
            gg_random_ties,
            cts_initial,
            cts_candidates,
            cts_iterations,
            cts_neighbors,
            tabu_length,
            recolor_patience,
            out,
        } => {
            let cfg = load_scenario(&config)?;
            let eph = ephemeris.map(load_ephemeris).transpose()?;
            let mut opts = RunOptions::new(match algo {
                AlgoArg::Random => Algorithm::Random,
                AlgoArg::Global => Algorithm::Global,
                AlgoArg::Gg => Algorithm::Gg,
                AlgoArg::Cts => Algorithm::Cts,
            });
            opts.tcfa = tcfa;
            opts.switch_proportionality = ps;
            opts.epsilon = epsilon;
            opts.decomposition = match decomp {
                DecompArg::None => DecompChoice::None,
                DecompArg::Ccd => DecompChoice::Ccd,
                DecompArg::Gscd => DecompChoice::Gscd,
            };
            opts.clusters = clusters;
            opts.vsu = vsu;
            if vsu_optimistic {
                opts.reuse_model = ReuseCapacityModel::Optimistic;
            }
            opts.subchannels = subchannels;
            opts.antennas_per_gateway = nat;
            opts.seed = seed;
            opts.gg.n_restarts = gg_restarts;
            opts.gg.perturb_sigma = gg_sigma;
            opts.gg.random_ties = gg_random_ties;
            opts.cts.n_initial = cts_initial;
            opts.cts.n_candidates = cts_candidates;
            opts.cts.n_iterations = cts_iterations;
            opts.cts.n_neighbors = cts_neighbors;
            opts.cts.tabu_length = tabu_length;
            opts.recolor_patience = recolor_patience;

            let result = run_simulation(&cfg, &opts, eph.as_ref())?;
            write_outputs(&result, &out)?;
            let r = &result.report;
            println!(
                "{} slots: mean LF rate {:.4}, max {:.4}, FSR {:.4}, mean dR {:.5}, mean gamma_v {:.4}",
                r.slots.len(),
                r.mean_lf_rate,
                r.max_lf_rate,
                r.fsr,
                r.mean_delta_r_hat,
                r.mean_gamma_v
            );
            Ok(())
        }
        Command::Propagate { config, out } => {
            let cfg = load_scenario(&config)?;
            let eph = propagate_constellation(&cfg.shells, &cfg.time_grid)?;
            save_ephemeris(&eph, &out)
        }
        Command::Graph {
            config,
            slot,
            nat,
            subchannels,
            out,
        } => {
            let mut cfg = load_scenario(&config)?;
            if let Some(n) = nat {
                cfg.gateways.iter_mut().for_each(|g| g.n_antennas = n);
            }
            if let Some(c) = subchannels {
                cfg.num_subchannels = c;
            }
            cfg.validate()?;
            if slot >= cfg.time_grid.num_slots {
                return Err(Error::Config {
                    field: "slot".into(),
                    message: format!("must be below {}", cfg.time_grid.num_slots),
                });
            }
            let eph = propagate_constellation(&cfg.shells, &cfg.time_grid)?;
            let gws = cfg.gateways_by_id();
            let gp = gateway_positions(&cfg, &gws, slot)?;
            let assignment = select_satellites(eph.slot(slot), &gws, &gp, slot, cfg.elevation_threshold_deg);
            let budget = LinkBudget::from_config(&cfg, cfg.num_subchannels);
            let table = InterferenceTable::compute(&SlotGeometry::new(&assignment, eph.slot(slot), gp), &budget, &cfg.antennas()?);
            let vertices = assignment.entries.iter().map(|e| e.sat).collect();
            let (g, _) = build_graph(&table, vertices, db_to_linear(cfg.weak_threshold_db), budget.itu_threshold_linear)?;
            g.write_dimacs(BufWriter::new(File::create(&out)?))
        }
    }
}
