use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cogsyn::demo::demo_diagrams;
use cogsyn::format::parse_graph;
use cogsyn::manifest::{verify, write_run};
use cogsyn::run::{execute, RunOptions};
use cogsyn::scenario::WeightsDef;
use cogsyn_core::rational::to_pq;
use cogsyn_core::synergy::{hom_iso_census, CensusBounds, NatTransOutcome};

const UNDECIDED: u8 = 1;
const INVALID: u8 = 2;

#[derive(Parser)]
#[command(
    name = "cogsyn",
    version,
    about = "Cognitive synergy experiments on toy hypergraph agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Uniform,
    Midpoint,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name) and write reports.
    Run {
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, env = "COGSYN_OUT_DIR", default_value = "cogsyn-out")]
        out_dir: PathBuf,
        #[arg(long)]
        partition_cells: Option<u32>,
        #[arg(long, value_enum)]
        weights: Option<WeightsArg>,
        /// Also write gnuplot-ready data files.
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// Check a run directory against its manifest and reproduce it.
    Verify { manifest: PathBuf },
    /// Print the BobNice natural-transformation diagrams and cost comparison.
    DemoDiagrams {
        /// Control variant: every step costs the same.
        #[arg(long)]
        equal_costs: bool,
    },
    /// Count cheap homomorphisms against isomorphisms between two CPT graphs.
    Census {
        cpt_a: PathBuf,
        cpt_b: PathBuf,
        #[arg(long, default_value_t = 3)]
        max_links: usize,
        #[arg(long, default_value_t = 500)]
        max_subgraphs: usize,
        #[arg(long, default_value_t = 2)]
        max_merges: u64,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn read_scenario(arg: &str) -> Result<String, String> {
    let path = Path::new(arg);
    if path.exists() {
        return std::fs::read_to_string(path).map_err(|e| format!("{arg}: {e}"));
    }
    cogsyn::bundled(arg)
        .map(str::to_string)
        .ok_or_else(|| format!("{arg}: no such file or bundled scenario"))
}

fn read_graph(path: &Path) -> Result<cogsyn_core::hypergraph::Hypergraph, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_graph(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            seed,
            jobs,
            out_dir,
            partition_cells,
            weights,
            emit_gnuplot,
        } => {
            let text = match read_scenario(&scenario) {
                Ok(t) => t,
                Err(e) => return fail(INVALID, e),
            };
            let weights = weights.map(|w| match w {
                WeightsArg::Uniform => WeightsDef::Uniform,
                WeightsArg::Midpoint => WeightsDef::Midpoint,
            });
            let opts = RunOptions {
                seed,
                jobs,
                partition_cells,
                weights,
                emit_gnuplot,
            };
            let out = match execute(&text, &opts) {
                Ok(o) => o,
                Err(e) => return fail(INVALID, e),
            };
            let dir = match write_run(&out, &out_dir) {
                Ok(d) => d,
                Err(e) => return fail(INVALID, format!("{e:#}")),
            };
            print!("{}", String::from_utf8_lossy(&out.files["summary.txt"]));
            println!("wrote {}", dir.display());
            if out.undecided {
                ExitCode::from(UNDECIDED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Command::Verify { manifest } => match verify(&manifest) {
            Ok(r) if r.ok() => {
                println!("verified: outputs match and reproduce exactly");
                ExitCode::SUCCESS
            }
            Ok(r) => {
                for f in &r.tampered {
                    println!("modified: {f}");
                }
                for f in &r.not_reproduced {
                    println!("not reproduced: {f}");
                }
                ExitCode::from(INVALID)
            }
            Err(e) => fail(INVALID, e),
        },
        Command::DemoDiagrams { equal_costs } => match demo_diagrams(equal_costs) {
            Ok(r) => {
                print!("{}", r.text);
                if r.outcome == NatTransOutcome::UndecidedAtScale {
                    ExitCode::from(UNDECIDED)
                } else {
                    ExitCode::SUCCESS
                }
            }
            Err(e) => fail(INVALID, e),
        },
        Command::Census {
            cpt_a,
            cpt_b,
            max_links,
            max_subgraphs,
            max_merges,
        } => {
            let (a, b) = match (read_graph(&cpt_a), read_graph(&cpt_b)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => return fail(INVALID, e),
            };
            let bounds = CensusBounds {
                max_links,
                max_subgraphs,
                max_merges,
                ..CensusBounds::default()
            };
            let c = hom_iso_census(&a, &b, &bounds);
            let ratio = c.ratio().map(|r| to_pq(&r)).unwrap_or_else(|| "inf".into());
            println!(
                "pairs {}, n_hom {}, n_iso {}, ratio {ratio}, partial {}",
                c.pairs, c.n_hom, c.n_iso, c.partial
            );
            if c.partial {
                ExitCode::from(UNDECIDED)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
