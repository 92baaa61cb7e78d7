use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hfsmp::benchgen::{generate, write_all, GenSpec};
use hfsmp::bounds::lb_root;
use hfsmp::format::{parse_schedule, read_instance, write_schedule};
use hfsmp::harness::{read_reference_values, run_bench};
use hfsmp::model::verify_schedule;
use hfsmp::oracle::{brute_force_optimum, DEFAULT_LIMIT};
use hfsmp::search::{parse_ratio, solve, Directions, RuleChoice, SearchConfig, Strategy};

#[derive(Parser)]
#[command(
    name = "hfsmp",
    version,
    about = "Hybrid flow shop scheduling with multiprocessor tasks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random benchmark instances.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "type", value_parser = clap::value_parser!(u8).range(1..=2))]
        kind: u8,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Accept sizes outside the benchmark grid.
        #[arg(long)]
        free: bool,
    },
    /// Run the discrepancy search on one instance.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the best schedule here.
        #[arg(long)]
        schedule_out: Option<PathBuf>,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the root lower bounds as JSON.
    Bound { file: PathBuf },
    /// Compute the exact optimum of a tiny instance by enumeration.
    Oracle {
        file: PathBuf,
        /// Refuse instances with more task lists than this.
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u64,
    },
    /// Check a schedule file against an instance.
    Verify {
        instance: PathBuf,
        schedule: PathBuf,
    },
    /// Solve every `.hfs` file of a directory.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Known optima (`instance_name value` lines); %dev uses them when present.
        #[arg(long)]
        optima: Option<PathBuf>,
        /// Earlier makespans to count improvements against.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct SearchArgs {
    /// nspt, energy, spt, spr, or auto for the restart pool.
    #[arg(long, default_value = "auto")]
    rule: RuleChoice,
    /// top or bottom.
    #[arg(long, default_value = "top")]
    strategy: Strategy,
    #[arg(long)]
    depth_bound: Option<usize>,
    #[arg(long)]
    node_budget: Option<u64>,
    /// Decimal or fraction, e.g. 1.3 or 13/10.
    #[arg(long, default_value = "1.3")]
    budget_factor: String,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    /// Seconds, fractions allowed.
    #[arg(long, default_value_t = 60.0)]
    time_limit: f64,
    /// fwd, bwd or both.
    #[arg(long, default_value = "both")]
    direction: Directions,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig> {
        if !(self.time_limit.is_finite() && self.time_limit >= 0.0) {
            bail!("time limit must be a non-negative number of seconds");
        }
        Ok(SearchConfig {
            depth_bound: self.depth_bound,
            strategy: self.strategy,
            node_budget: self.node_budget,
            budget_factor: parse_ratio(&self.budget_factor)?,
            max_restarts: self.restarts,
            time_limit: Duration::from_secs_f64(self.time_limit),
            directions: self.direction,
            rules: self.rule,
            seed: 0,
        })
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate {
            n,
            m,
            kind,
            count,
            seed,
            out,
            free,
        } => {
            let instances = generate(&GenSpec {
                n,
                m,
                kind,
                count,
                seed,
                free,
            })?;
            let paths = write_all(&instances, &out)?;
            println!("wrote {} instance(s) to {}", paths.len(), out.display());
        }
        Command::Solve {
            file,
            search,
            schedule_out,
            json,
        } => {
            let inst =
                read_instance(&file).with_context(|| format!("reading {}", file.display()))?;
            let report = solve(&inst, &search.config()?)?;
            if let Some(path) = schedule_out {
                std::fs::write(&path, write_schedule(&report.best_schedule))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if json {
                print_json(&report)?;
            } else {
                println!("makespan {}", report.best_makespan);
                println!("lower bound {}", report.lb);
                println!(
                    "leaves {} (pruned {})",
                    report.leaves_evaluated, report.nodes_pruned
                );
                println!("restarts {}", report.restarts_used);
                println!("stop {}", report.stop_reason);
                println!("seconds {:.3}", report.wall_seconds);
            }
        }
        Command::Bound { file } => {
            let inst =
                read_instance(&file).with_context(|| format!("reading {}", file.display()))?;
            print_json(&lb_root(&inst))?;
        }
        Command::Oracle { file, limit } => {
            let inst =
                read_instance(&file).with_context(|| format!("reading {}", file.display()))?;
            print_json(&brute_force_optimum(&inst, limit)?)?;
        }
        Command::Verify { instance, schedule } => {
            let inst = read_instance(&instance)
                .with_context(|| format!("reading {}", instance.display()))?;
            let text = std::fs::read_to_string(&schedule)
                .with_context(|| format!("reading {}", schedule.display()))?;
            let sched = parse_schedule(&inst, &text)?;
            let violations = verify_schedule(&inst, &sched)?;
            if violations.is_empty() {
                println!("feasible, makespan {}", sched.makespan());
            } else {
                for v in &violations {
                    println!("{v}");
                }
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Bench {
            dir,
            search,
            jobs,
            optima,
            baseline,
            csv,
            summary,
        } => {
            let optima = match optima {
                Some(p) => {
                    read_reference_values(&p).with_context(|| format!("reading {}", p.display()))?
                }
                None => HashMap::new(),
            };
            let result = run_bench(&dir, &search.config()?, &optima, jobs)?;
            for (name, err) in result.errors() {
                eprintln!("{name}: {err}");
            }
            let file = File::create(&csv).with_context(|| format!("creating {}", csv.display()))?;
            result.write_csv(BufWriter::new(file))?;

            let mut text = result.summary().render();
            if let Some(p) = baseline {
                let base = read_reference_values(&p)
                    .with_context(|| format!("reading {}", p.display()))?;
                text.push('\n');
                text.push_str(&result.improvements(&base).render());
            }
            match summary {
                Some(p) => {
                    std::fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?
                }
                None => print!("{text}"),
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
