//! Text formats for graphs, distance/similarity matrices, cluster vectors and
//! scenario bundles.
//!
//! * adjacency CSV: `n` rows of `n` comma-separated 0/1 values
//! * edge-list TSV: `n=<count>` then one `u<TAB>v` pair per line, 0-indexed
//! * matrix CSV: a label row, then `m` rows of `m` reals with 17 significant
//!   digits; `# metric=` and `# sigma=` comment lines carry metadata
//! * cluster CSV: `label_id,graph_label,cluster`

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use netflow_core::clustering::SimilarityMatrix;
use netflow_core::generators::ScenarioBundle;
use netflow_core::{DistanceMatrix, Graph, Matrix, Metric};

use crate::error::{CliError, CliResult};
use crate::FORMAT_HEADER;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Auto,
    Csv,
    Tsv,
}

impl FromStr for GraphFormat {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "auto" => Ok(GraphFormat::Auto),
            "csv" => Ok(GraphFormat::Csv),
            "tsv" => Ok(GraphFormat::Tsv),
            other => Err(CliError::Config(format!("unknown graph format '{other}'"))),
        }
    }
}

/// Full-precision decimal (17 significant digits).
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// `key=value` pairs from `# key=value` comment lines.
fn comment_fields(text: &str) -> impl Iterator<Item = (&str, &str)> {
    text.lines().filter_map(|l| {
        let body = l.trim().strip_prefix('#')?.trim();
        let (k, v) = body.split_once('=')?;
        Some((k.trim(), v.trim()))
    })
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn parse_graph_csv(text: &str, path: &Path) -> CliResult<Graph> {
    let rows: Vec<(usize, Vec<&str>)> = data_lines(text)
        .map(|(line, l)| (line, l.split(',').map(str::trim).collect()))
        .collect();
    let n = rows.len();
    if n == 0 {
        return Err(parse_error(path, 1, "no adjacency rows"));
    }
    let mut adjacency = vec![0u8; n * n];
    for (r, (line, cells)) in rows.iter().enumerate() {
        if cells.len() != n {
            return Err(parse_error(
                path,
                *line,
                format!("row {r} has {} entries, expected {n}", cells.len()),
            ));
        }
        for (c, cell) in cells.iter().enumerate() {
            let value = match *cell {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(parse_error(
                        path,
                        *line,
                        format!("cell ({r},{c}): expected 0 or 1, found '{other}'"),
                    ))
                }
            };
            if r == c && value != 0 {
                return Err(parse_error(path, *line, format!("cell ({r},{c}): nonzero diagonal")));
            }
            adjacency[r * n + c] = value;
        }
    }
    for (r, (line, _)) in rows.iter().enumerate() {
        for c in 0..r {
            if adjacency[r * n + c] != adjacency[c * n + r] {
                return Err(parse_error(
                    path,
                    *line,
                    format!(
                        "cell ({r},{c}) = {} but cell ({c},{r}) = {}: adjacency not symmetric",
                        adjacency[r * n + c],
                        adjacency[c * n + r]
                    ),
                ));
            }
        }
    }
    Ok(Graph::from_adjacency(n, adjacency)?)
}

pub fn parse_graph_tsv(text: &str, path: &Path) -> CliResult<Graph> {
    let mut lines = data_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "missing 'n=<count>' header"))?;
    let n: usize = header
        .strip_prefix("n=")
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| parse_error(path, line, format!("expected 'n=<count>', found '{header}'")))?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let fields: Vec<&str> = l.split('\t').map(str::trim).collect();
        let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
        let (u, v) = match parsed.as_deref() {
            Some(&[u, v]) => (u, v),
            _ => return Err(parse_error(path, line, format!("expected 'u<TAB>v', found '{l}'"))),
        };
        if u >= n || v >= n {
            return Err(parse_error(path, line, format!("node pair ({u},{v}) out of range for n={n}")));
        }
        if u == v {
            return Err(parse_error(path, line, format!("self-loop ({u},{v})")));
        }
        edges.push((u, v));
    }
    Ok(Graph::from_edge_list(n, &edges)?)
}

fn sniff_format(path: &Path, text: &str) -> GraphFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => GraphFormat::Csv,
        Some("tsv") => GraphFormat::Tsv,
        _ => {
            let first = data_lines(text).next().map(|(_, l)| l).unwrap_or("");
            if first.starts_with("n=") {
                GraphFormat::Tsv
            } else {
                GraphFormat::Csv
            }
        }
    }
}

pub fn load_graph(path: &Path, format: GraphFormat) -> CliResult<Graph> {
    let text = read_text(path)?;
    let format = match format {
        GraphFormat::Auto => sniff_format(path, &text),
        f => f,
    };
    match format {
        GraphFormat::Tsv => parse_graph_tsv(&text, path),
        _ => parse_graph_csv(&text, path),
    }
}

pub fn graph_to_csv(g: &Graph) -> String {
    let mut out = String::from(FORMAT_HEADER);
    out.push('\n');
    for i in 0..g.n() {
        let row: Vec<&str> = g
            .neighbors_row(i)
            .iter()
            .map(|&a| if a == 1 { "1" } else { "0" })
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn graph_to_tsv(g: &Graph) -> String {
    let mut out = format!("{FORMAT_HEADER}\nn={}\n", g.n());
    for (u, v) in g.edges() {
        let _ = writeln!(out, "{u}\t{v}");
    }
    out
}

pub fn save_graph(g: &Graph, path: &Path, format: GraphFormat) -> CliResult<()> {
    let use_tsv = match format {
        GraphFormat::Tsv => true,
        GraphFormat::Csv => false,
        GraphFormat::Auto => path.extension().and_then(|e| e.to_str()) == Some("tsv"),
    };
    let text = if use_tsv { graph_to_tsv(g) } else { graph_to_csv(g) };
    write_text(path, &text)
}

fn check_label(label: &str) -> CliResult<()> {
    if label.is_empty() || label.contains([',', '\n', '\r']) {
        return Err(CliError::Config(format!(
            "label '{label}' must be non-empty and free of commas and newlines"
        )));
    }
    Ok(())
}

fn matrix_body(out: &mut String, labels: &[String], m: &Matrix) -> CliResult<()> {
    for l in labels {
        check_label(l)?;
    }
    out.push_str(&labels.join(","));
    out.push('\n');
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&x| format_f64(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(())
}

pub fn distance_matrix_to_csv(d: &DistanceMatrix) -> CliResult<String> {
    let mut out = format!("{FORMAT_HEADER}\n# metric={}\n", d.metric());
    matrix_body(&mut out, d.labels(), d.matrix())?;
    Ok(out)
}

pub fn similarity_to_csv(s: &SimilarityMatrix, labels: &[String]) -> CliResult<String> {
    let mut out = format!(
        "{FORMAT_HEADER}\n# metric={}\n# sigma={}\n",
        s.source_metric(),
        format_f64(s.sigma())
    );
    matrix_body(&mut out, labels, s.matrix())?;
    Ok(out)
}

/// Labels, entries and metadata of a matrix CSV, without validation.
pub struct RawMatrix {
    pub labels: Vec<String>,
    pub entries: Matrix,
    pub metric: Option<Metric>,
    pub sigma: Option<f64>,
}

pub fn parse_matrix_csv(text: &str, path: &Path) -> CliResult<RawMatrix> {
    let mut metric = None;
    let mut sigma = None;
    for (k, v) in comment_fields(text) {
        match k {
            "metric" => metric = Some(v.parse::<Metric>()?),
            "sigma" => {
                sigma = Some(
                    v.parse::<f64>()
                        .map_err(|_| parse_error(path, 1, format!("bad sigma '{v}'")))?,
                )
            }
            _ => {}
        }
    }
    let mut lines = data_lines(text);
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "missing label row"))?;
    let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    let m = labels.len();
    let mut data = Vec::with_capacity(m * m);
    let mut rows = 0;
    for (line, l) in lines {
        let cells: Vec<&str> = l.split(',').map(str::trim).collect();
        if cells.len() != m {
            return Err(parse_error(
                path,
                line,
                format!("row {rows} has {} entries, expected {m}", cells.len()),
            ));
        }
        for (c, cell) in cells.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| parse_error(path, line, format!("cell ({rows},{c}): not a number: '{cell}'")))?;
            data.push(x);
        }
        rows += 1;
    }
    if rows != m {
        return Err(parse_error(path, 1, format!("found {rows} rows for {m} labels")));
    }
    Ok(RawMatrix {
        labels,
        entries: Matrix::from_vec(m, m, data)?,
        metric,
        sigma,
    })
}

pub fn parse_distance_matrix(text: &str, path: &Path) -> CliResult<DistanceMatrix> {
    let raw = parse_matrix_csv(text, path)?;
    let metric = raw
        .metric
        .ok_or_else(|| parse_error(path, 1, "missing '# metric=' line"))?;
    Ok(DistanceMatrix::new(raw.labels, raw.entries, metric)?)
}

pub fn load_distance_matrix(path: &Path) -> CliResult<DistanceMatrix> {
    parse_distance_matrix(&read_text(path)?, path)
}

pub fn save_distance_matrix(d: &DistanceMatrix, path: &Path) -> CliResult<()> {
    write_text(path, &distance_matrix_to_csv(d)?)
}

pub fn clusters_to_csv(labels: &[String], clusters: &[usize]) -> CliResult<String> {
    if labels.len() != clusters.len() {
        return Err(CliError::Config("cluster vector does not match labels".into()));
    }
    let mut out = format!("{FORMAT_HEADER}\nlabel_id,graph_label,cluster\n");
    for (i, (l, c)) in labels.iter().zip(clusters).enumerate() {
        check_label(l)?;
        let _ = writeln!(out, "{i},{l},{c}");
    }
    Ok(out)
}

pub fn parse_clusters_csv(text: &str, path: &Path) -> CliResult<Vec<(String, usize)>> {
    let mut lines = data_lines(text);
    match lines.next() {
        Some((_, "label_id,graph_label,cluster")) => {}
        Some((line, other)) => {
            return Err(parse_error(path, line, format!("unexpected header '{other}'")))
        }
        None => return Err(parse_error(path, 1, "empty cluster file")),
    }
    lines
        .enumerate()
        .map(|(i, (line, l))| {
            let f: Vec<&str> = l.split(',').collect();
            match f.as_slice() {
                [id, label, cluster] if id.parse::<usize>().ok() == Some(i) => cluster
                    .parse()
                    .map(|c| (label.to_string(), c))
                    .map_err(|_| parse_error(path, line, format!("bad cluster id '{cluster}'"))),
                _ => Err(parse_error(path, line, format!("malformed row '{l}'"))),
            }
        })
        .collect()
}

const MANIFEST: &str = "manifest.csv";

/// Writes one adjacency CSV per graph plus `manifest.csv`.
pub fn save_bundle(bundle: &ScenarioBundle, dir: &Path) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let blocks: Vec<String> = bundle.block_sizes.iter().map(usize::to_string).collect();
    let mut manifest = format!("{FORMAT_HEADER}\n# blocks={}\nlabel,ground_truth,file\n", blocks.join(","));
    let mut written = Vec::new();
    for ((g, label), truth) in bundle.graphs.iter().zip(&bundle.labels).zip(&bundle.ground_truth) {
        check_label(label)?;
        let file = format!("{label}.csv");
        let path = dir.join(&file);
        save_graph(g, &path, GraphFormat::Csv)?;
        let _ = writeln!(manifest, "{label},{truth},{file}");
        written.push(path);
    }
    let path = dir.join(MANIFEST);
    write_text(&path, &manifest)?;
    written.push(path);
    Ok(written)
}

pub fn is_bundle_dir(path: &Path) -> bool {
    path.join(MANIFEST).is_file()
}

pub fn load_bundle(dir: &Path) -> CliResult<ScenarioBundle> {
    let path = dir.join(MANIFEST);
    let text = read_text(&path)?;
    let mut block_sizes = None;
    for (k, v) in comment_fields(&text) {
        if k == "blocks" {
            let sizes: Result<Vec<usize>, _> = v.split(',').map(|s| s.trim().parse()).collect();
            block_sizes = Some(sizes.map_err(|_| parse_error(&path, 1, format!("bad block sizes '{v}'")))?);
        }
    }
    let mut lines = data_lines(&text);
    match lines.next() {
        Some((_, "label,ground_truth,file")) => {}
        _ => return Err(parse_error(&path, 1, "expected header 'label,ground_truth,file'")),
    }
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    let mut truth = Vec::new();
    for (line, l) in lines {
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        let [label, t, file] = f.as_slice() else {
            return Err(parse_error(&path, line, format!("malformed row '{l}'")));
        };
        let t = t
            .parse()
            .map_err(|_| parse_error(&path, line, format!("bad ground truth '{t}'")))?;
        graphs.push(load_graph(&dir.join(file), GraphFormat::Auto)?);
        labels.push(label.to_string());
        truth.push(t);
    }
    let n = graphs.first().map_or(0, Graph::n);
    let block_sizes = block_sizes.unwrap_or_else(|| vec![n]);
    Ok(ScenarioBundle::new(graphs, labels, truth, block_sizes)?)
}
