//! The six verbs.
//!
//! Every verb loads and checks its inputs before touching the output
//! directory, so a bad path leaves no outputs behind. Per-sample work runs
//! on the caller's pool; results are collected in job order and written
//! from one thread, so outputs do not depend on the pool size.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use freqatt_core::metrics::{
    aggregate_similarity, attribute, average_rank_table, class_similarity_matrix, evaluate_map,
    evaluate_sample, input_space_map, sample_seed, EvalSettings, MetricKind, SampleEvaluation,
};
use freqatt_core::models::argmax;
use freqatt_core::{
    frequency_attribution, generate_synthetic, normalize, optimize_signal, subsample, AttributionMap,
    ClassifierOracle, Dataset, Error as CoreError, Method,
};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::config::{RunConfig, Verb};
use crate::dataset_io::{detect_format, load_dataset, save_dataset, DatasetFormat};
use crate::error::{CliError, Result};
use crate::manifest::{Manifest, OutputDir, MANIFEST_FILE};
use crate::map_io::{load_map, map_file_name, save_map, MapDocument, MapHeader};
use crate::model_io::{load_model, save_model};
use crate::report::{
    curve_rows, fmt_f64, method_means, read_curves, read_report, read_table, report_rows, write_curves,
    write_report, write_summary, write_table, CurveRow, ReportRow, AVERAGE_RANK_HEADER, CURVE_MEANS_HEADER,
    RANK_HEADER, SCHEMA_VERSION, SIMILARITY_HEADER, SIMILARITY_MATRIX_HEADER,
};
use crate::svg;

pub const MAPS_DIR: &str = "maps";
pub const REPORT_FILE: &str = "report.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const SIMILARITY_MATRIX_FILE: &str = "similarity_matrix.csv";

/// Samples per input directory that get attribution overlays.
pub const OVERLAY_SAMPLES: usize = 8;

/// Runs `cfg` and returns a short human-readable summary.
pub fn run(cfg: &RunConfig, pool: &ThreadPool) -> Result<String> {
    match cfg.verb {
        Verb::Generate => generate(cfg),
        Verb::Attribute => attribute_verb(cfg, pool),
        Verb::Optimize => optimize(cfg, pool),
        Verb::Evaluate => evaluate(cfg, pool),
        Verb::Compare => compare(cfg),
        Verb::Report => report(cfg),
    }
}

struct Inputs {
    dataset: Dataset,
    oracle: ClassifierOracle,
    format: DatasetFormat,
}

fn read_dataset(path: &Path, format: Option<DatasetFormat>, znorm: bool) -> Result<(Dataset, DatasetFormat)> {
    let format = match format {
        Some(f) => f,
        None => detect_format(path)?,
    };
    let ds = load_dataset(path, format)?;
    Ok((if znorm { ds.z_normalized() } else { ds }, format))
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let model_path = cfg.model.as_deref().expect("validated");
    let dataset_path = cfg.dataset.as_deref().expect("validated");
    let oracle = ClassifierOracle::from_spec(load_model(model_path)?)?;
    let (mut dataset, format) = read_dataset(dataset_path, cfg.format, cfg.znorm)?;
    if let Some(n) = cfg.samples {
        dataset = subsample(&dataset, n, cfg.seed)?;
    }
    if let Some(x) = dataset.samples().first() {
        oracle.check_dims(x)?;
    }
    Ok(Inputs { dataset, oracle, format })
}

fn jobs(ds: &Dataset, methods: &[Method]) -> Vec<(usize, Method)> {
    (0..ds.len())
        .flat_map(|i| methods.iter().map(move |&m| (i, m)))
        .collect()
}

fn generate(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.synthetic.as_ref().expect("generate carries a spec");
    let (dataset, model) = generate_synthetic(spec)?;
    let out = OutputDir::prepare(cfg)?;
    let format = if dataset.channels() == 1 {
        DatasetFormat::Delimited
    } else {
        DatasetFormat::Multivariate
    };
    save_dataset(&dataset, &out.path("synthetic.txt"), format)?;
    save_model(&model, &out.path("model.json"))?;
    let spec_path = out.path("synthetic_spec.json");
    let text = serde_json::to_string_pretty(spec).map_err(|e| CliError::format(&spec_path, e))?;
    fs::write(&spec_path, text + "\n").map_err(|e| CliError::io(&spec_path, e))?;
    out.finish()?;
    Ok(format!(
        "generated {} samples ({} steps x {} channels, {} classes, noise {}) in {}",
        dataset.len(),
        dataset.length(),
        dataset.channels(),
        dataset.num_classes(),
        spec.noise_sigma,
        cfg.out.display()
    ))
}

fn map_header(cfg: &RunConfig, sample_id: usize) -> MapHeader {
    MapHeader {
        occlusion: cfg.occlusion.clone(),
        mask: cfg.mask,
        seed: sample_seed(cfg.metric_config.seed, sample_id),
    }
}

fn save_maps(dir: &Path, docs: &[MapDocument]) -> Result<()> {
    docs.iter()
        .try_for_each(|doc| save_map(doc, &dir.join(map_file_name(doc.sample_id, doc.method))))
}

fn attribute_verb(cfg: &RunConfig, pool: &ThreadPool) -> Result<String> {
    let Inputs { dataset, oracle, .. } = load_inputs(cfg)?;
    let out = OutputDir::prepare(cfg)?;
    let random_domain = cfg.metric_config.space.domain();
    let docs = pool.install(|| {
        jobs(&dataset, &cfg.methods)
            .par_iter()
            .map(|&(i, method)| {
                let id = dataset.ids()[i];
                let header = map_header(cfg, id);
                let x = &dataset.samples()[i];
                let map = attribute(&oracle, x, method, &cfg.occlusion, cfg.mask, header.seed, random_domain)?;
                Ok(MapDocument::new(id, &map, header))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let dir = out.subdir(MAPS_DIR)?;
    save_maps(&dir, &docs)?;
    out.finish()?;
    Ok(format!("wrote {} maps to {}", docs.len(), dir.display()))
}

fn optimize(cfg: &RunConfig, pool: &ThreadPool) -> Result<String> {
    let Inputs { dataset, oracle, format } = load_inputs(cfg)?;
    let out = OutputDir::prepare(cfg)?;
    let per_sample = pool.install(|| {
        (0..dataset.len())
            .into_par_iter()
            .map(|i| {
                let x = &dataset.samples()[i];
                let a_freq = frequency_attribution(&oracle, x, &cfg.occlusion)?;
                let optimized = optimize_signal(x, &a_freq, cfg.mask)?;
                let similarity = class_similarity_matrix(&oracle, x, &cfg.occlusion, cfg.mask)?;
                Ok((a_freq, optimized, similarity))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let name = &dataset.name;
    let classes = oracle.num_classes();
    let class_name = |k: usize| dataset.class_names().get(k).cloned().unwrap_or_else(|| k.to_string());

    let optimized: Vec<_> = per_sample.iter().map(|(_, o, _)| o.clone()).collect();
    let filtered = Dataset::with_ids(
        format!("{name}_optimized"),
        dataset.split,
        optimized,
        dataset.labels().to_vec(),
        dataset.ids().to_vec(),
        dataset.class_names().to_vec(),
    )?;
    save_dataset(&filtered, &out.path("optimized.txt"), format)?;

    let docs: Vec<_> = per_sample
        .iter()
        .zip(dataset.ids())
        .map(|((a, _, _), &id)| MapDocument::new(id, a, map_header(cfg, id)))
        .collect();
    save_maps(&out.subdir(MAPS_DIR)?, &docs)?;

    let mut rows = Vec::new();
    for ((_, _, sims), (&id, &truth)) in per_sample.iter().zip(dataset.ids().iter().zip(dataset.labels())) {
        for s in sims {
            rows.push(vec![
                SCHEMA_VERSION.to_string(),
                name.clone(),
                id.to_string(),
                class_name(truth),
                class_name(s.class),
                fmt_f64(s.l2),
                fmt_f64(s.cosine),
                fmt_f64(s.cross_correlation),
            ]);
        }
    }
    write_table(&out.path("similarity.csv"), &SIMILARITY_HEADER, rows)?;

    let labelled: Vec<_> = per_sample
        .iter()
        .zip(dataset.labels())
        .map(|((_, _, sims), &truth)| (truth, sims.clone()))
        .collect();
    let matrix = aggregate_similarity(&labelled, classes)?;
    let mut rows = Vec::new();
    for truth in 0..classes {
        for toward in 0..classes {
            rows.push(vec![
                SCHEMA_VERSION.to_string(),
                name.clone(),
                class_name(truth),
                class_name(toward),
                matrix.counts[truth].to_string(),
                fmt_f64(matrix.l2_at(truth, toward)),
                fmt_f64(matrix.cosine_at(truth, toward)),
                fmt_f64(matrix.cross_correlation_at(truth, toward)),
            ]);
        }
    }
    write_table(&out.path(SIMILARITY_MATRIX_FILE), &SIMILARITY_MATRIX_HEADER, rows)?;
    out.finish()?;

    let diagonal_best = labelled
        .iter()
        .filter(|(truth, sims)| {
            let best = sims
                .iter()
                .min_by(|a, b| a.l2.total_cmp(&b.l2))
                .map(|s| s.class);
            best == Some(*truth)
        })
        .count();
    Ok(format!(
        "optimized {} samples; ground-truth class closest in L2 for {diagonal_best}",
        dataset.len()
    ))
}

#[derive(Serialize)]
struct EvaluationSummary<'a> {
    dataset: &'a str,
    samples: usize,
    accuracy: f64,
    methods: &'a [Method],
    metrics: Vec<&'static str>,
    forward_passes: u64,
}

/// Maps saved by an earlier run, keyed by `(sample id, method)`. Any
/// missing map is an incomplete grid.
fn load_saved_maps(dir: &Path, ds: &Dataset, methods: &[Method]) -> Result<BTreeMap<(usize, Method), MapDocument>> {
    let mut docs = BTreeMap::new();
    let mut missing = Vec::new();
    for &id in ds.ids() {
        for &method in methods {
            let path = dir.join(map_file_name(id, method));
            if !path.exists() {
                missing.push(path.file_name().unwrap().to_string_lossy().into_owned());
                continue;
            }
            docs.insert((id, method), load_map(&path)?);
        }
    }
    if !missing.is_empty() {
        return Err(CoreError::IncompleteGrid(format!(
            "{} of {} maps missing in {} (first: {})",
            missing.len(),
            ds.len() * methods.len(),
            dir.display(),
            missing[0]
        ))
        .into());
    }
    Ok(docs)
}

fn evaluate(cfg: &RunConfig, pool: &ThreadPool) -> Result<String> {
    let Inputs { dataset, oracle, .. } = load_inputs(cfg)?;
    let saved = match &cfg.maps {
        Some(dir) => Some(load_saved_maps(dir, &dataset, &cfg.methods)?),
        None => None,
    };
    let settings = EvalSettings {
        occlusion: cfg.occlusion.clone(),
        mask: cfg.mask,
        metrics: cfg.metric_config.clone(),
        kinds: cfg.metrics.clone(),
    };
    let out = OutputDir::prepare(cfg)?;

    let (evals, correct) = pool.install(|| -> Result<(Vec<SampleEvaluation>, usize)> {
        let evals = jobs(&dataset, &cfg.methods)
            .par_iter()
            .map(|&(i, method)| {
                let id = dataset.ids()[i];
                let x = &dataset.samples()[i];
                match &saved {
                    Some(docs) => {
                        let doc = &docs[&(id, method)];
                        evaluate_map(&oracle, x, id, doc.to_map()?, doc.config.seed, &settings)
                    }
                    None => evaluate_sample(&oracle, x, id, method, &settings),
                }
                .map_err(CliError::from)
            })
            .collect::<Result<Vec<_>>>()?;
        let correct = dataset
            .samples()
            .par_iter()
            .zip(dataset.labels())
            .map(|(x, &label)| Ok(usize::from(argmax(&oracle.predict(x)?) == label)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum();
        Ok((evals, correct))
    })?;

    let name = dataset.name.as_str();
    let reports: Vec<_> = evals.iter().map(|e| e.report.clone()).collect();
    let rows = report_rows(name, &reports);
    let curves: Vec<_> = evals
        .iter()
        .filter_map(|e| e.curve.clone().map(|c| (e.report.sample_id, e.report.method, c)))
        .collect();
    let docs: Vec<_> = evals
        .iter()
        .map(|e| MapDocument::new(e.report.sample_id, &e.map, map_header(cfg, e.report.sample_id)))
        .collect();
    save_maps(&out.subdir(MAPS_DIR)?, &docs)?;
    write_report(&out.path(REPORT_FILE), &rows)?;
    write_curves(&out.path(CURVES_FILE), &curve_rows(name, &curves))?;
    write_summary(&out.path("summary.csv"), &rows)?;

    let accuracy = if dataset.is_empty() { 0.0 } else { correct as f64 / dataset.len() as f64 };
    let summary = EvaluationSummary {
        dataset: name,
        samples: dataset.len(),
        accuracy,
        methods: &cfg.methods,
        metrics: cfg.metrics.iter().map(|m| m.as_str()).collect(),
        forward_passes: oracle.forward_pass_count(),
    };
    let path = out.path("evaluation.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::format(&path, e))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    out.finish()?;

    let mut text = format!("{name}: {} samples, accuracy {accuracy:.4}\n", dataset.len());
    for ((_, method, metric), (mean, n)) in method_means(&rows) {
        let _ = writeln!(text, "  {method:<10} {metric:<12} {mean:.6} (n={n})");
    }
    Ok(text.trim_end().to_string())
}

fn compare(cfg: &RunConfig) -> Result<String> {
    let mut rows = Vec::new();
    for dir in &cfg.inputs {
        rows.extend(read_report(&dir.join(REPORT_FILE))?);
    }
    rows.retain(|r| cfg.methods.contains(&r.method) && cfg.metrics.contains(&r.metric));
    let means = method_means(&rows);

    let mut tables = Vec::new();
    for &metric in &cfg.metrics {
        let cells: Vec<_> = means
            .iter()
            .filter(|((_, _, m), _)| *m == metric.as_str())
            .map(|((dataset, method, _), (mean, _))| (dataset.clone(), method.to_string(), *mean))
            .collect();
        if cells.is_empty() {
            continue;
        }
        let table = average_rank_table(&cells, metric.lower_is_better())?;
        tables.push((metric, cells, table));
    }
    if tables.is_empty() {
        return Err(CoreError::IncompleteGrid("no metric values to rank".into()).into());
    }

    let out = OutputDir::prepare(cfg)?;
    let mut rank_rows = Vec::new();
    let mut average_rows = Vec::new();
    let mut text = String::new();
    for (metric, cells, table) in &tables {
        for (d, dataset) in table.datasets.iter().enumerate() {
            for (m, method) in table.methods.iter().enumerate() {
                let mean = cells
                    .iter()
                    .find(|c| &c.0 == dataset && &c.1 == method)
                    .map(|c| c.2)
                    .expect("ranked cell has a value");
                rank_rows.push(vec![
                    SCHEMA_VERSION.to_string(),
                    metric.as_str().to_string(),
                    dataset.clone(),
                    method.clone(),
                    fmt_f64(mean),
                    fmt_f64(table.ranks[d][m]),
                ]);
            }
        }
        let _ = write!(text, "{}:", metric.as_str());
        for (m, method) in table.methods.iter().enumerate() {
            average_rows.push(vec![
                SCHEMA_VERSION.to_string(),
                metric.as_str().to_string(),
                method.clone(),
                fmt_f64(table.average[m]),
                table.datasets.len().to_string(),
            ]);
            let _ = write!(text, " {method}={:.3}", table.average[m]);
        }
        text.push('\n');
    }
    write_table(&out.path("ranks.csv"), &RANK_HEADER, rank_rows)?;
    write_table(&out.path("average_ranks.csv"), &AVERAGE_RANK_HEADER, average_rows)?;
    out.finish()?;
    Ok(text.trim_end().to_string())
}

/// One SVG document to write under the report directory.
struct Chart {
    file: String,
    svg: String,
}

/// Keeps dataset names usable as file-name parts.
fn file_part(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn methods_in_order(present: impl IntoIterator<Item = Method>) -> Vec<Method> {
    let present: BTreeSet<Method> = present.into_iter().collect();
    Method::ALL.into_iter().filter(|m| present.contains(m)).collect()
}

fn metric_charts(rows: &[ReportRow]) -> Vec<Chart> {
    let means = method_means(rows);
    let datasets: BTreeSet<&str> = rows.iter().map(|r| r.dataset.as_str()).collect();
    let mut charts = Vec::new();
    for dataset in datasets {
        for metric in MetricKind::ALL {
            let methods = methods_in_order(
                rows.iter()
                    .filter(|r| r.dataset == dataset && r.metric == metric)
                    .map(|r| r.method),
            );
            if methods.is_empty() {
                continue;
            }
            let bars: Vec<_> = methods
                .iter()
                .map(|&m| (m.to_string(), means[&(dataset.to_string(), m, metric.as_str())].0))
                .collect();
            let direction = if metric.lower_is_better() { "lower is better" } else { "higher is better" };
            charts.push(Chart {
                file: format!("metric_{}_{}.svg", metric.as_str(), file_part(dataset)),
                svg: svg::bar_chart(
                    &format!("{dataset}: mean {}", metric.as_str()),
                    &format!("{} ({direction})", metric.as_str()),
                    &bars,
                ),
            });
        }
    }
    charts
}

type CurveKey = (String, String, Method, usize);

/// Mean fraction and score per `(dataset, space, method, point)`.
fn curve_means(curves: &[CurveRow]) -> BTreeMap<CurveKey, (f64, f64, usize)> {
    let mut sums: BTreeMap<CurveKey, (f64, f64, usize)> = BTreeMap::new();
    for c in curves {
        let e = sums
            .entry((c.dataset.clone(), c.space.as_str().to_string(), c.method, c.point))
            .or_default();
        e.0 += c.fraction;
        e.1 += c.score;
        e.2 += 1;
    }
    sums.into_iter()
        .map(|(k, (f, s, n))| (k, (f / n as f64, s / n as f64, n)))
        .collect()
}

fn curve_charts(means: &BTreeMap<CurveKey, (f64, f64, usize)>) -> Vec<Chart> {
    let groups: BTreeSet<(&str, &str)> = means.keys().map(|k| (k.0.as_str(), k.1.as_str())).collect();
    groups
        .into_iter()
        .map(|(dataset, space)| {
            let methods = methods_in_order(
                means.keys().filter(|k| k.0 == dataset && k.1 == space).map(|k| k.2),
            );
            let series: Vec<_> = methods
                .iter()
                .map(|&m| {
                    let points = means
                        .iter()
                        .filter(|(k, _)| k.0 == dataset && k.1 == space && k.2 == m)
                        .map(|(_, &(f, s, _))| (f, s))
                        .collect();
                    (m.to_string(), points)
                })
                .collect();
            Chart {
                file: format!("deletion_curves_{}_{space}.svg", file_part(dataset)),
                svg: svg::line_chart(
                    &format!("{dataset}: {space}-space deletion"),
                    "fraction deleted",
                    "target-class probability",
                    &series,
                ),
            }
        })
        .collect()
}

struct SimilarityTable {
    dataset: String,
    rows: Vec<csv::StringRecord>,
}

fn similarity_charts(table: &SimilarityTable, path: &Path) -> Result<Vec<Chart>> {
    let mut labels: Vec<String> = Vec::new();
    for rec in &table.rows {
        if !labels.iter().any(|l| l == &rec[2]) {
            labels.push(rec[2].to_string());
        }
    }
    let k = labels.len();
    let index = |name: &str| labels.iter().position(|l| l == name);
    let mut grids = [vec![vec![0.0; k]; k], vec![vec![0.0; k]; k], vec![vec![0.0; k]; k]];
    for rec in &table.rows {
        let (Some(i), Some(j)) = (index(&rec[2]), index(&rec[3])) else {
            return Err(CliError::format(path, format!("unknown class in {rec:?}")));
        };
        for (g, col) in grids.iter_mut().zip(5..8) {
            g[i][j] = rec[col]
                .parse()
                .map_err(|_| CliError::format(path, format!("bad value in {rec:?}")))?;
        }
    }
    let ds = &table.dataset;
    Ok(["l2", "cosine", "cross_correlation"]
        .iter()
        .zip(&grids)
        .map(|(metric, grid)| Chart {
            file: format!("similarity_{metric}_{}.svg", file_part(ds)),
            svg: svg::matrix_chart(
                &format!("{ds}: {metric} after filtering toward each class"),
                "ground-truth class",
                "target class",
                &labels,
                grid,
            ),
        })
        .collect())
}

/// Heat strips of the first saved maps of a run directory, drawn over the
/// samples of the dataset its manifest names.
fn overlay_charts(dir: &Path) -> Result<Vec<Chart>> {
    let maps_dir = dir.join(MAPS_DIR);
    let manifest_path = dir.join(MANIFEST_FILE);
    if !maps_dir.is_dir() || !manifest_path.exists() {
        return Ok(Vec::new());
    }
    let manifest = Manifest::load(&manifest_path)?;
    let Some(dataset_path) = manifest.config.dataset.as_deref() else {
        return Ok(Vec::new());
    };
    let mut files: Vec<PathBuf> = fs::read_dir(&maps_dir)
        .map_err(|e| CliError::io(&maps_dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| CliError::io(&maps_dir, e)))
        .collect::<Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "json"));
    files.sort();
    if files.is_empty() {
        return Ok(Vec::new());
    }

    let (dataset, _) = read_dataset(dataset_path, manifest.config.format, manifest.config.znorm)?;
    let mut docs = Vec::new();
    for path in &files {
        docs.push((path, load_map(path)?));
    }
    let shown: BTreeSet<usize> = docs.iter().map(|(_, d)| d.sample_id).collect::<BTreeSet<_>>()
        .into_iter()
        .take(OVERLAY_SAMPLES)
        .collect();

    let mut charts = Vec::new();
    for (path, doc) in docs.iter().filter(|(_, d)| shown.contains(&d.sample_id)) {
        let index = dataset
            .ids()
            .iter()
            .position(|&id| id == doc.sample_id)
            .ok_or_else(|| CliError::format(path, format!("sample {} is not in {}", doc.sample_id, dataset_path.display())))?;
        let x = &dataset.samples()[index];
        let map: AttributionMap = doc.to_map()?;
        let heat = normalize(&input_space_map(x, &map)?);
        let signal: Vec<_> = (0..x.channels()).map(|c| x.channel(c)).collect();
        let intensity: Vec<_> = (0..x.channels()).map(|c| heat.channel(c)).collect();
        charts.push(Chart {
            file: format!(
                "{}_sample{:05}_{}.svg",
                file_part(&dataset.name),
                doc.sample_id,
                doc.method
            ),
            svg: svg::heat_strip(
                &format!("{} sample {}: {} attribution", dataset.name, doc.sample_id, doc.method),
                &signal,
                &intensity,
            ),
        });
    }
    Ok(charts)
}

/// Overlays of each input go to their own directory, since several inputs
/// may hold maps of the same samples.
fn overlay_dir_name(index: usize, dir: &Path) -> String {
    let base = dir
        .file_name()
        .map(|n| file_part(&n.to_string_lossy()))
        .unwrap_or_else(|| "run".into());
    format!("{index:02}_{base}")
}

fn write_charts(dir: &Path, charts: &[Chart]) -> Result<()> {
    for chart in charts {
        let path = dir.join(&chart.file);
        fs::write(&path, &chart.svg).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}

fn report(cfg: &RunConfig) -> Result<String> {
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    let mut similarity = Vec::new();
    let mut overlays = Vec::new();
    for dir in &cfg.inputs {
        let report_path = dir.join(REPORT_FILE);
        if report_path.exists() {
            rows.extend(read_report(&report_path)?);
        }
        let curves_path = dir.join(CURVES_FILE);
        if curves_path.exists() {
            curves.extend(read_curves(&curves_path)?);
        }
        let matrix_path = dir.join(SIMILARITY_MATRIX_FILE);
        if matrix_path.exists() {
            let records = read_table(&matrix_path, &SIMILARITY_MATRIX_HEADER)?;
            let mut by_dataset: BTreeMap<String, Vec<csv::StringRecord>> = BTreeMap::new();
            for rec in records {
                by_dataset.entry(rec[1].to_string()).or_default().push(rec);
            }
            for (dataset, rows) in by_dataset {
                similarity.push((matrix_path.clone(), SimilarityTable { dataset, rows }));
            }
        }
        let charts = overlay_charts(dir)?;
        if !charts.is_empty() {
            overlays.push((overlay_dir_name(overlays.len(), dir), charts));
        }
    }
    rows.retain(|r| cfg.methods.contains(&r.method) && cfg.metrics.contains(&r.metric));
    curves.retain(|c| cfg.methods.contains(&c.method));

    let mut charts = metric_charts(&rows);
    let means = curve_means(&curves);
    charts.extend(curve_charts(&means));
    for (path, table) in &similarity {
        charts.extend(similarity_charts(table, path)?);
    }
    if charts.is_empty() && overlays.is_empty() {
        return Err(CliError::NothingToPlot(format!(
            "no report rows, curves or similarity tables under {}",
            cfg.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(", ")
        )));
    }

    let out = OutputDir::prepare(cfg)?;
    if !rows.is_empty() {
        write_report(&out.path("values.csv"), &rows)?;
        write_summary(&out.path("metric_means.csv"), &rows)?;
    }
    if !means.is_empty() {
        let table = means.iter().map(|((dataset, space, method, point), (fraction, score, n))| {
            vec![
                SCHEMA_VERSION.to_string(),
                dataset.clone(),
                method.to_string(),
                space.clone(),
                point.to_string(),
                fmt_f64(*fraction),
                fmt_f64(*score),
                n.to_string(),
            ]
        });
        write_table(&out.path("curve_means.csv"), &CURVE_MEANS_HEADER, table)?;
    }
    for (_, table) in &similarity {
        let path = out.path(&format!("similarity_matrix_{}.csv", file_part(&table.dataset)));
        write_table(&path, &SIMILARITY_MATRIX_HEADER, table.rows.iter().map(|r| r.iter().map(str::to_string).collect::<Vec<_>>()))?;
    }
    write_charts(&out.path(""), &charts)?;
    for (name, charts) in &overlays {
        write_charts(&out.subdir(&format!("overlays/{name}"))?, charts)?;
    }
    out.finish()?;
    Ok(format!(
        "wrote {} charts and {} overlays to {}",
        charts.len(),
        overlays.iter().map(|(_, c)| c.len()).sum::<usize>(),
        cfg.out.display()
    ))
}
