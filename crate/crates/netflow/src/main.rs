use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use netflow_core::clustering::{
    canonical_labels, kmeans, kmeans_on_row, replace_diagonal_with_average, similarity_matrix,
    spectral_cluster_with_restarts, DEFAULT_RESTARTS,
};
use netflow_core::flow::{pairwise_distance_matrix, DEFAULT_SAMPLES, DEFAULT_T_MAX};
use netflow_core::{Metric, TimeGrid};

use netflow::config::{RunConfig, Scenario};
use netflow::formats::{
    clusters_to_csv, distance_matrix_to_csv, is_bundle_dir, load_bundle, load_distance_matrix, load_graph,
    parse_matrix_csv, read_text, save_bundle, write_text, GraphFormat,
};
use netflow::heatmap::write_heatmap;
use netflow::reproduce::{build_bundle, reproduce};
use netflow::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "netflow", version, about = "Network flow distances between graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a scenario's graphs and manifest to a directory.
    Generate {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Within-block edge probability for fixed42.
        #[arg(long, default_value_t = 0.8)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise distance matrix of graph files, or of a generated directory.
    Dist {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "nld")]
        metric: String,
        #[arg(long, default_value_t = DEFAULT_T_MAX)]
        tmax: f64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
        format: FormatArg,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster the graphs of a distance matrix CSV.
    Cluster {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Spectral)]
        method: Method,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        /// With kmeans: cluster the values of this row (label or 0-based
        /// index) instead of treating every row as a point.
        #[arg(long)]
        row: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a distance or similarity matrix CSV as a PPM heatmap.
    Heatmap {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full scenario sweep from a config file.
    Reproduce {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated metric list.
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Kmeans,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Csv,
    Tsv,
}

impl From<FormatArg> for GraphFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => GraphFormat::Auto,
            FormatArg::Csv => GraphFormat::Csv,
            FormatArg::Tsv => GraphFormat::Tsv,
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn parse_metrics(list: &str) -> CliResult<Vec<Metric>> {
    list.split(',')
        .map(|m| m.trim().parse::<Metric>().map_err(CliError::from))
        .collect()
}

fn graph_inputs(inputs: &[PathBuf], format: GraphFormat) -> CliResult<(Vec<netflow_core::Graph>, Vec<String>)> {
    if let [dir] = inputs {
        if is_bundle_dir(dir) {
            let bundle = load_bundle(dir)?;
            return Ok((bundle.graphs, bundle.labels));
        }
    }
    let graphs = inputs
        .iter()
        .map(|p| load_graph(p, format))
        .collect::<CliResult<Vec<_>>>()?;
    let labels = inputs
        .iter()
        .map(|p| p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()))
        .collect();
    Ok((graphs, labels))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Generate { scenario, seed, p, out } => {
            let mut config = RunConfig::for_scenario(scenario.parse::<Scenario>()?);
            config.p = p;
            let bundle = build_bundle(&config, seed)?;
            save_bundle(&bundle, &out)?;
        }
        Command::Dist {
            inputs,
            metric,
            tmax,
            samples,
            format,
            out,
        } => {
            let metric: Metric = metric.parse()?;
            let grid = TimeGrid::new(tmax, samples)?;
            let (graphs, labels) = graph_inputs(&inputs, format.into())?;
            let d = pairwise_distance_matrix(&graphs, &labels, metric, Some(&grid))?;
            emit(&distance_matrix_to_csv(&d)?, out.as_deref())?;
        }
        Command::Cluster {
            input,
            method,
            k,
            seed,
            restarts,
            row,
            out,
        } => {
            let d = load_distance_matrix(&input)?;
            let labels = match (method, row) {
                (Method::Spectral, Some(_)) => {
                    return Err(CliError::Config("--row only applies to --method kmeans".into()))
                }
                (Method::Spectral, None) => {
                    let s = similarity_matrix(&d)?;
                    spectral_cluster_with_restarts(&s, k, seed, restarts)?.labels
                }
                (Method::Kmeans, None) => kmeans(&replace_diagonal_with_average(&d)?, k, seed, restarts)?.labels,
                (Method::Kmeans, Some(r)) => {
                    let i = d
                        .labels()
                        .iter()
                        .position(|l| *l == r)
                        .or_else(|| r.parse().ok().filter(|&i| i < d.len()))
                        .ok_or_else(|| CliError::Config(format!("no row '{r}'")))?;
                    let averaged = replace_diagonal_with_average(&d)?;
                    kmeans_on_row(averaged.row(i), k, seed, restarts)?.labels
                }
            };
            emit(&clusters_to_csv(d.labels(), &canonical_labels(&labels))?, out.as_deref())?;
        }
        Command::Heatmap { input, out } => {
            let raw = parse_matrix_csv(&read_text(&input)?, &input)?;
            write_heatmap(&raw.entries, &out)?;
        }
        Command::Reproduce {
            config,
            seed,
            tmax,
            samples,
            metric,
            out,
        } => {
            let mut config = RunConfig::load(&config)?;
            if let Some(s) = seed {
                config.seed = s;
            }
            if let Some(t) = tmax {
                config.t_max = t;
            }
            if let Some(n) = samples {
                config.n_samples = n;
            }
            if let Some(m) = metric {
                config.metrics = parse_metrics(&m)?;
            }
            if let Some(o) = out {
                config.output_dir = o;
            }
            let report = reproduce(&config)?;
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("report: {}", config.output_dir.join("report.txt").display());
            if !report.passed() {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                return Err(CliError::Assertion(format!("{failed} scenario check(s) failed")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
