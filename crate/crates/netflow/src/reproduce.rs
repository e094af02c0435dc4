//! End-to-end experiment runs: scenario bundles, distance matrices, heatmaps,
//! clusterings and the scenario's pass/fail checks, written under the
//! configured output directory.
//!
//! Layout for every seed `s`:
//!
//! ```text
//! seed-s/graphs/manifest.csv, G1.csv, ...
//! seed-s/<metric>.csv, <metric>.ppm
//! seed-s/<metric>-similarity.csv, <metric>-similarity.ppm
//! seed-s/<metric>-spectral.csv
//! report.txt
//! ```
//!
//! Paths in the report are relative to the output directory, so two runs of
//! the same config produce identical bytes wherever they are written.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use netflow_core::clustering::{
    adjusted_rand_index, canonical_labels, kmeans, kmeans_on_row, misclassified, replace_diagonal_with_average,
    same_partition, similarity_matrix, spectral_cluster_with_restarts, SimilarityMatrix,
};
use netflow_core::flow::pairwise_distance_matrix;
use netflow_core::generators::{
    bridge_deletion_params, bridge_deletion_scenario, fixed_bridge_scenario, sbm_population, two_sbm_scenario,
    SbmParams, ScenarioBundle,
};
use netflow_core::{DistanceMatrix, Error as CoreError, Metric, TimeGrid};

use crate::config::{RunConfig, Scenario};
use crate::error::{CliError, CliResult};
use crate::formats::{clusters_to_csv, distance_matrix_to_csv, format_f64, save_bundle, similarity_to_csv, write_text};
use crate::heatmap::write_heatmap;
use crate::FORMAT_HEADER;

/// Fraction of seeds the bridge scenario checks must hold on.
pub const BRIDGE_PASS_FRACTION: f64 = 0.9;
pub const FROBENIUS_TOL: f64 = 1e-12;

pub fn build_bundle(config: &RunConfig, seed: u64) -> CliResult<ScenarioBundle> {
    let bundle = match config.scenario {
        Scenario::Bridge41 => bridge_deletion_scenario(&bridge_deletion_params(), seed)?,
        Scenario::Fixed42 => fixed_bridge_scenario(config.p, seed)?,
        Scenario::TwoSbm43 => two_sbm_scenario(seed)?,
        Scenario::Custom => {
            let c = &config.custom;
            let params = SbmParams::two_block(c.block_sizes[0], c.block_sizes[1], c.p11, c.p22, c.p12)?;
            sbm_population(&params, c.count, seed)?
        }
    };
    Ok(bundle)
}

/// Spectral clustering of one metric's similarity matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOutcome {
    pub similarity: SimilarityMatrix,
    pub clusters: Vec<usize>,
    pub ari: f64,
    pub misclassified: Option<usize>,
}

/// Everything computed for one metric on one seed.
#[derive(Debug, Clone)]
pub struct MetricOutcome {
    pub distances: DistanceMatrix,
    /// `None` when all off-diagonal distances are equal.
    pub spectral: Option<SpectralOutcome>,
    /// k-means of the rows of the diagonal-averaged matrix taken as points.
    pub row_points: Vec<usize>,
    /// One-dimensional k-means of each row of the diagonal-averaged matrix.
    pub rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct SeedOutcome {
    pub seed: u64,
    pub bundle: ScenarioBundle,
    pub metrics: Vec<(Metric, MetricOutcome)>,
}

impl SeedOutcome {
    pub fn metric(&self, metric: Metric) -> Option<&MetricOutcome> {
        self.metrics.iter().find(|(m, _)| *m == metric).map(|(_, o)| o)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn analyse_metric(
    bundle: &ScenarioBundle,
    metric: Metric,
    grid: &TimeGrid,
    config: &RunConfig,
    seed: u64,
) -> CliResult<MetricOutcome> {
    let distances = pairwise_distance_matrix(&bundle.graphs, &bundle.labels, metric, Some(grid))?;
    let k = config.k.min(distances.len());
    let spectral = match similarity_matrix(&distances) {
        Ok(s) => {
            let found = spectral_cluster_with_restarts(&s, k, seed, config.restarts)?;
            let clusters = canonical_labels(&found.labels);
            Some(SpectralOutcome {
                ari: adjusted_rand_index(&clusters, &bundle.ground_truth)?,
                misclassified: misclassified(&clusters, &bundle.ground_truth).ok(),
                clusters,
                similarity: s,
            })
        }
        Err(CoreError::Degenerate(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let averaged = replace_diagonal_with_average(&distances)?;
    let row_points = canonical_labels(&kmeans(&averaged, k, seed, config.restarts)?.labels);
    let rows = (0..averaged.rows())
        .map(|i| {
            kmeans_on_row(averaged.row(i), k, seed, config.restarts).map(|a| canonical_labels(&a.labels))
        })
        .collect::<Result<_, _>>()?;
    Ok(MetricOutcome {
        distances,
        spectral,
        row_points,
        rows,
    })
}

/// Runs every metric of the config on one seed, without touching the disk.
pub fn run_seed(config: &RunConfig, seed: u64) -> CliResult<SeedOutcome> {
    let grid = TimeGrid::new(config.t_max, config.n_samples)?;
    let bundle = build_bundle(config, seed)?;
    let metrics = std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .metrics
            .iter()
            .map(|&m| {
                let (bundle, grid) = (&bundle, &grid);
                scope.spawn(move || analyse_metric(bundle, m, grid, config, seed).map(|o| (m, o)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("metric worker panicked"))
            .collect::<CliResult<Vec<_>>>()
    })?;
    Ok(SeedOutcome { seed, bundle, metrics })
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn write_seed(outcome: &SeedOutcome, root: &Path, text: &mut String, files: &mut Vec<PathBuf>) -> CliResult<()> {
    let rel_dir = PathBuf::from(format!("seed-{}", outcome.seed));
    let dir = root.join(&rel_dir);
    let _ = writeln!(text, "\n[seed {}]", outcome.seed);
    for path in save_bundle(&outcome.bundle, &dir.join("graphs"))? {
        files.push(path.strip_prefix(root).unwrap_or(&path).to_path_buf());
    }
    let _ = writeln!(text, "graphs = {}", rel_dir.join("graphs/manifest.csv").display());
    let _ = writeln!(text, "ground_truth = {}", join(&outcome.bundle.ground_truth));
    let labels = outcome.bundle.labels.clone();

    for (metric, o) in &outcome.metrics {
        let mut emit = |name: String, write: &dyn Fn(&Path) -> CliResult<()>| -> CliResult<PathBuf> {
            let rel = rel_dir.join(name);
            write(&root.join(&rel))?;
            files.push(rel.clone());
            Ok(rel)
        };
        let csv = distance_matrix_to_csv(&o.distances)?;
        let matrix = emit(format!("{metric}.csv"), &|p| write_text(p, &csv))?;
        let heat = emit(format!("{metric}.ppm"), &|p| write_heatmap(o.distances.matrix(), p))?;
        let _ = writeln!(text, "{metric} matrix = {}", matrix.display());
        let _ = writeln!(text, "{metric} heatmap = {}", heat.display());

        match &o.spectral {
            Some(sp) => {
                let s = &sp.similarity;
                let sim = similarity_to_csv(s, &labels)?;
                let sim_path = emit(format!("{metric}-similarity.csv"), &|p| write_text(p, &sim))?;
                emit(format!("{metric}-similarity.ppm"), &|p| write_heatmap(s.matrix(), p))?;
                let clusters = clusters_to_csv(&labels, &sp.clusters)?;
                let cl_path = emit(format!("{metric}-spectral.csv"), &|p| write_text(p, &clusters))?;
                let _ = writeln!(text, "{metric} similarity = {} (sigma {})", sim_path.display(), format_f64(s.sigma()));
                let miss = sp.misclassified.map_or("n/a".to_string(), |m| m.to_string());
                let _ = writeln!(
                    text,
                    "{metric} spectral = {} [{}] ari {} misclassified {miss}",
                    cl_path.display(),
                    join(&sp.clusters),
                    format_f64(sp.ari)
                );
            }
            None => {
                let _ = writeln!(text, "{metric} spectral = skipped (all off-diagonal distances equal)");
            }
        }
        let _ = writeln!(text, "{metric} row-point kmeans = [{}]", join(&o.row_points));
        for (label, row) in labels.iter().zip(&o.rows) {
            let _ = writeln!(text, "{metric} row {label} kmeans = [{}]", join(row));
        }
    }
    Ok(())
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn count_check(name: &str, hits: usize, total: usize, needed: usize) -> Check {
    check(
        name,
        hits >= needed,
        format!("{hits}/{total} seeds (need at least {needed})"),
    )
}

/// Row 0 separates the ground-truth cluster 1 from the other children.
pub fn bridge_discriminated(d: &DistanceMatrix, truth: &[usize]) -> bool {
    let row = d.row(0);
    let bridges = (1..row.len()).filter(|&j| truth[j] == 1).map(|j| row[j]);
    let within = (1..row.len()).filter(|&j| truth[j] == 0).map(|j| row[j]);
    let lowest_bridge = bridges.fold(f64::INFINITY, f64::min);
    let highest_within = within.fold(f64::NEG_INFINITY, f64::max);
    lowest_bridge > highest_within
}

/// Every row outside the bridge-deletion pair recovers the ground truth.
///
/// The rows of the two isolated graphs cannot: their own averaged diagonal
/// entry sits among the small distances while the other member of the pair
/// is far away.
pub fn rows_isolate_truth(rows: &[Vec<usize>], truth: &[usize]) -> bool {
    rows.iter()
        .zip(truth)
        .filter(|(_, &t)| t == 0)
        .all(|(r, _)| same_partition(r, truth))
}

fn exact_baselines(outcome: &SeedOutcome) -> Option<bool> {
    let h = outcome.metric(Metric::Hamming)?;
    let f = outcome.metric(Metric::Frobenius)?;
    let m = h.distances.len();
    let mut ok = true;
    for i in 0..m {
        for j in i + 1..m {
            let (hv, fv) = (h.distances.get(i, j), f.distances.get(i, j));
            if i == 0 {
                ok &= hv == 1.0 && fv == 2.0;
            } else {
                ok &= hv == 2.0 && (fv - 2.0 * std::f64::consts::SQRT_2).abs() <= FROBENIUS_TOL;
            }
        }
    }
    Some(ok)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn spectral_aris(outcomes: &[SeedOutcome], metric: Metric) -> Option<Vec<f64>> {
    outcomes
        .iter()
        .map(|o| o.metric(metric).map(|m| m.spectral.as_ref().map_or(0.0, |s| s.ari)))
        .collect()
}

/// Scenario-specific checks over the whole seed sweep.
pub fn evaluate(config: &RunConfig, outcomes: &[SeedOutcome]) -> Vec<Check> {
    let total = outcomes.len();
    let majority = total / 2 + 1;
    let mut checks = Vec::new();
    let has_nld = config.metrics.contains(&Metric::Nld);
    match config.scenario {
        Scenario::Bridge41 => {
            let needed = (BRIDGE_PASS_FRACTION * total as f64).ceil() as usize;
            let exact: Option<Vec<bool>> = outcomes.iter().map(exact_baselines).collect();
            if let Some(exact) = exact {
                let hits = exact.iter().filter(|&&b| b).count();
                checks.push(count_check("exact hamming and frobenius values", hits, total, total));
            }
            if has_nld {
                let discriminated = outcomes
                    .iter()
                    .filter(|o| {
                        let d = &o.metric(Metric::Nld).expect("nld computed").distances;
                        bridge_discriminated(d, &o.bundle.ground_truth)
                    })
                    .count();
                checks.push(count_check("nld bridge discrimination", discriminated, total, needed));
                let isolated = outcomes
                    .iter()
                    .filter(|o| {
                        rows_isolate_truth(&o.metric(Metric::Nld).expect("nld computed").rows, &o.bundle.ground_truth)
                    })
                    .count();
                checks.push(count_check("nld row kmeans isolates G2 and G6", isolated, total, needed));
            }
            if let Some(hits) = outcomes
                .iter()
                .map(|o| {
                    o.metric(Metric::Hamming)
                        .map(|h| bridge_discriminated(&h.distances, &o.bundle.ground_truth))
                })
                .collect::<Option<Vec<bool>>>()
            {
                let failures = hits.iter().filter(|&&b| !b).count();
                checks.push(count_check("hamming cannot discriminate bridges", failures, total, total));
            }
        }
        Scenario::Fixed42 => {
            if let Some(mut nld) = spectral_aris(outcomes, Metric::Nld) {
                let perfect = nld.iter().filter(|&&a| a == 1.0).count();
                checks.push(count_check("nld spectral ari = 1", perfect, total, majority));
                let nld_median = median(&mut nld);
                checks.push(check(
                    "nld median ari >= 0.9",
                    nld_median >= 0.9,
                    format!("median {}", format_f64(nld_median)),
                ));
                for other in [Metric::Gdd, Metric::Frobenius] {
                    if let Some(mut aris) = spectral_aris(outcomes, other) {
                        let m = median(&mut aris);
                        checks.push(check(
                            &format!("nld median ari > {other} median ari"),
                            nld_median > m,
                            format!("{} vs {}", format_f64(nld_median), format_f64(m)),
                        ));
                    }
                }
            }
        }
        Scenario::TwoSbm43 => {
            if has_nld {
                let good = outcomes
                    .iter()
                    .filter(|o| {
                        let m = o.metric(Metric::Nld).expect("nld computed");
                        m.spectral.as_ref().and_then(|s| s.misclassified).is_some_and(|x| x <= 2)
                    })
                    .count();
                checks.push(count_check("nld spectral misclassifies at most 2", good, total, majority));
            }
        }
        Scenario::Custom => {}
    }
    checks
}

/// Runs the sweep, writes all artifacts plus `report.txt`, and returns the
/// report. A failed check is not an error here; see [`Report::passed`].
pub fn reproduce(config: &RunConfig) -> CliResult<Report> {
    config.validate()?;
    let root = &config.output_dir;
    fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;

    let metric_names: Vec<&str> = config.metrics.iter().map(|m| m.name()).collect();
    let last_seed = config.seed + config.seeds as u64 - 1;
    let mut text = String::new();
    let _ = writeln!(text, "{FORMAT_HEADER}");
    let _ = writeln!(text, "scenario = {}", config.scenario);
    let _ = writeln!(text, "seeds = {}..={last_seed}", config.seed);
    let _ = writeln!(text, "metrics = {}", metric_names.join(","));
    let _ = writeln!(text, "t_max = {}", format_f64(config.t_max));
    let _ = writeln!(text, "n_samples = {}", config.n_samples);
    let _ = writeln!(text, "k = {}", config.k);
    let _ = writeln!(text, "restarts = {}", config.restarts);
    if config.scenario == Scenario::Fixed42 {
        let _ = writeln!(text, "p = {}", format_f64(config.p));
    }

    let mut files = Vec::new();
    let mut outcomes = Vec::with_capacity(config.seeds);
    for seed in config.seed..=last_seed {
        let outcome = run_seed(config, seed)?;
        write_seed(&outcome, root, &mut text, &mut files)?;
        outcomes.push(outcome);
    }

    let checks = evaluate(config, &outcomes);
    let _ = writeln!(text, "\n[checks]");
    for c in &checks {
        let _ = writeln!(text, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let passed = checks.iter().all(|c| c.passed);
    let _ = writeln!(text, "result = {}", if passed { "PASS" } else { "FAIL" });

    let report_path = root.join("report.txt");
    write_text(&report_path, &text)?;
    files.push(PathBuf::from("report.txt"));
    Ok(Report { text, checks, files })
}
