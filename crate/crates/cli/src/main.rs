//! `arcp`: run resilient-consensus experiments, check graph robustness,
//! and grow robust graphs from the command line.
//!
//! Exit codes for `run` and `preset` follow the verdict: 0 consensus,
//! 2 stalled, 3 safety violated. Any configuration or I/O failure exits
//! with 1.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use arcp_core::digraph::{Digraph, NodeId};
use arcp_core::engine::Protocol;
use arcp_core::robustness::{
    grow_preferential_with_limit, is_rs_robust_with_limit, maximal_robustness_with_limit,
    DEFAULT_ENUMERATION_LIMIT,
};
use arcp_core::scenario::{
    format_summary_table, parse_scenario, preset, run_batch, run_scenario, scenario_hash,
    serialize_scenario, summarize, write_outputs, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "arcp",
    version,
    about = "Resilient consensus simulator and robustness checker"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write its trace CSVs.
    Run {
        /// Scenario file (line-oriented `key value` format).
        file: PathBuf,
        /// Run even if the adversary set violates the declared scope.
        #[arg(long)]
        force: bool,
        /// Output directory (default: $ARCP_OUT_DIR or the current dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in preset scenario.
    Preset {
        /// One of: prop1-two-clique, fig2-local, grow-k5, sec6-hub.
        name: String,
        /// Override the preset's protocol (`lcp` or `arcp`).
        #[arg(long)]
        protocol: Option<String>,
        /// Print the scenario text instead of running it.
        #[arg(long)]
        print: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide (r,s)-robustness of a graph from an edge-list file.
    Check {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        r: u32,
        /// Defaults to 1 (plain r-robustness).
        #[arg(long)]
        s: Option<u32>,
        /// Also report the maximal (r*, s*).
        #[arg(long)]
        maximal: bool,
        /// Node-count cap for the exponential scan.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
    },
    /// Grow a robust graph by degree-proportional attachment.
    Grow {
        #[arg(long = "seed-graph")]
        seed_graph: PathBuf,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
        /// Number of nodes to add.
        #[arg(long)]
        count: usize,
        #[arg(long)]
        rng: u64,
        /// Incoming links per new node (default r + s - 1).
        #[arg(long)]
        degree: Option<usize>,
        /// Write the grown edge list here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_LIMIT)]
        limit: usize,
    },
    /// Run every `.scn` scenario in a directory and print a summary table.
    Batch {
        dir: PathBuf,
        /// Worker threads.
        #[arg(short = 'j', long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("ARCP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_scenario(&text).map_err(|issues| {
        let mut msg = format!("{} is not a valid scenario:", path.display());
        for issue in issues {
            msg.push_str(&format!("\n  {issue}"));
        }
        msg
    })
}

fn execute_and_report(
    name: &str,
    cfg: &ScenarioConfig,
    base: Option<&Path>,
    force: bool,
    dir: &Path,
) -> Result<u8, String> {
    let trace = run_scenario(cfg, base, force).map_err(|e| e.to_string())?;
    let stem = cfg.output.clone().unwrap_or_else(|| name.to_string());
    let paths = write_outputs(dir, &stem, &trace).map_err(|e| e.to_string())?;
    let row = summarize(name, &trace);
    println!(
        "name={} verdict={} final_psi={} L={} duration={}",
        row.name, row.verdict, row.final_psi, row.final_mid, row.duration
    );
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(trace.verdict.exit_code() as u8)
}

fn run_command(command: Command) -> Result<u8, String> {
    match command {
        Command::Run { file, force, out } => {
            let cfg = load_scenario(&file)?;
            let base = file.parent().map(Path::to_path_buf);
            let name = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".into());
            execute_and_report(&name, &cfg, base.as_deref(), force, &out_dir(out))
        }
        Command::Preset {
            name,
            protocol,
            print,
            out,
        } => {
            let mut cfg = preset(&name).map_err(|e| e.to_string())?;
            let mut stem = name.clone();
            match protocol.as_deref() {
                None => {}
                Some("lcp") => {
                    cfg.protocol = Protocol::Lcp;
                    stem.push_str("-lcp");
                }
                Some("arcp") => {}
                Some(other) => return Err(format!("unknown protocol '{other}'")),
            }
            if print {
                print!("{}", serialize_scenario(&cfg));
                return Ok(0);
            }
            execute_and_report(&stem, &cfg, None, false, &out_dir(out))
        }
        Command::Check {
            graph,
            r,
            s,
            maximal,
            limit,
        } => {
            let text = std::fs::read_to_string(&graph)
                .map_err(|e| format!("cannot read {}: {e}", graph.display()))?;
            let g = Digraph::parse_edge_list(&text).map_err(|e| e.to_string())?;
            println!("graph nodes={} edges={}", g.node_count(), g.edge_count());
            let s = s.unwrap_or(1);
            println!("query r={r} s={s}");
            let cert = is_rs_robust_with_limit(&g, r, s, limit).map_err(|e| e.to_string())?;
            println!("verdict {}", cert.verdict);
            if let Some(w) = cert.witness {
                let fmt = |v: &[NodeId]| {
                    v.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                println!("witness_s1 {}", fmt(&w.s1));
                println!("witness_s2 {}", fmt(&w.s2));
                println!("reach_s1 {}", w.reach1);
                println!("reach_s2 {}", w.reach2);
            }
            if maximal {
                let (rs, ss) =
                    maximal_robustness_with_limit(&g, limit).map_err(|e| e.to_string())?;
                println!("maximal r={rs} s={ss}");
            }
            Ok(0)
        }
        Command::Grow {
            seed_graph,
            r,
            s,
            count,
            rng,
            degree,
            out,
            limit,
        } => {
            let text = std::fs::read_to_string(&seed_graph)
                .map_err(|e| format!("cannot read {}: {e}", seed_graph.display()))?;
            let seed = Digraph::parse_edge_list(&text).map_err(|e| e.to_string())?;
            let degree = degree.unwrap_or(((r + s) as usize).saturating_sub(1));
            let run = grow_preferential_with_limit(&seed, r, s, count, degree, rng, limit)
                .map_err(|e| e.to_string())?;
            eprintln!(
                "grew {} -> {} nodes (degree {degree} per new node); seed {}",
                seed.node_count(),
                run.graph.node_count(),
                if run.seed_certified {
                    "certified"
                } else {
                    "not checked (above limit)"
                }
            );
            for step in &run.steps {
                let targets: Vec<String> = step.targets.iter().map(|t| t.to_string()).collect();
                eprintln!("attached {} -> {}", step.new_node, targets.join(" "));
            }
            let listing = run.graph.to_edge_list();
            match out {
                Some(path) => std::fs::write(&path, listing)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                None => print!("{listing}"),
            }
            Ok(0)
        }
        Command::Batch { dir, jobs, out } => {
            let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| format!("cannot read {}: {e}", dir.display()))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|ext| ext == "scn"))
                .collect();
            files.sort();
            let mut items = Vec::new();
            let mut load_errors = Vec::new();
            for file in &files {
                let name = file
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "scenario".into());
                match load_scenario(file) {
                    Ok(cfg) => items.push((name, cfg)),
                    Err(e) => load_errors.push(Err(e)),
                }
            }
            let base = Some(dir.as_path());
            let results = run_batch(&items, jobs, base);
            let target = out_dir(out);
            let mut rows: Vec<Result<_, String>> = Vec::new();
            for ((name, cfg), outcome) in items.iter().zip(results) {
                match outcome {
                    Ok(result) => {
                        let stem = format!("{name}-{:08x}", scenario_hash(cfg));
                        write_outputs(&target, &stem, &result.trace).map_err(|e| e.to_string())?;
                        rows.push(Ok(result.summary));
                    }
                    Err(e) => rows.push(Err(e)),
                }
            }
            rows.extend(load_errors);
            print!("{}", format_summary_table(&rows));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
