//! End-to-end runs of the `freqatt` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_freqatt");

fn freqatt(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = freqatt(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Generates the default synthetic set (`count` samples, noise `sigma`)
/// and returns `(dataset, model)`.
fn generate(dir: &Path, count: usize, sigma: f64) -> (PathBuf, PathBuf) {
    let out = dir.join("gen");
    ok(&[
        "generate", "--out", s(&out), "--samples", &count.to_string(), "--noise", &sigma.to_string(), "--seed", "11", "-q",
    ]);
    (out.join("synthetic.txt"), out.join("model.json"))
}

fn files_under(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut found = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                found.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    found
}

/// `(method, metric) -> mean` from a summary table.
fn means(path: &Path) -> BTreeMap<(String, String), f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            ((rec[2].to_string(), rec[3].to_string()), rec[4].parse().unwrap())
        })
        .collect()
}

#[test]
fn attribute_writes_one_map_per_sample_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 20, 0.0);
    let out = dir.path().join("maps_run");
    ok(&["attribute", "--dataset", s(&data), "--model", s(&model), "--samples", "10", "--out", s(&out), "-q"]);
    let maps = fs::read_dir(out.join("maps")).unwrap().count();
    assert_eq!(maps, 10 * 4);
    assert!(out.join("SUCCESS").exists() && out.join("manifest.json").exists());
}

#[test]
fn missing_model_is_an_io_error_with_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = generate(dir.path(), 4, 0.0);
    let out = dir.path().join("never");
    let missing = dir.path().join("absent.json");
    let res = freqatt(&["attribute", "--dataset", s(&data), "--model", s(&missing), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn rerun_from_manifest_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 12, 0.3);
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    ok(&[
        "attribute", "--dataset", s(&data), "--model", s(&model), "--samples", "6", "--seed", "4", "--window", "2",
        "--mask", "topk:3", "--out", s(&first), "-q",
    ]);
    ok(&["attribute", "--config", s(&first.join("manifest.json")), "--out", s(&second), "-q"]);
    assert_eq!(files_under(&first), files_under(&second));
}

#[test]
fn manifest_of_another_verb_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), 4, 0.0);
    let manifest = dir.path().join("gen/manifest.json");
    let res = freqatt(&["evaluate", "--config", s(&manifest), "--out", s(&dir.path().join("x"))]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn frequency_maps_delete_faster_than_random_in_frequency_space() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 20, 0.0);
    let out = dir.path().join("eval");
    ok(&[
        "evaluate", "--dataset", s(&data), "--model", s(&model), "--methods", "frequency,random", "--metrics", "auc",
        "--space", "frequency", "--out", s(&out), "-q",
    ]);
    let m = means(&out.join("summary.csv"));
    let freq = m[&("frequency".into(), "auc".into())];
    let random = m[&("random".into(), "auc".into())];
    assert!(freq < random, "frequency {freq} vs random {random}");
}

#[test]
fn constant_model_gives_equal_aucs_and_flat_occlusion_maps() {
    let dir = tempfile::tempdir().unwrap();
    let (data, _) = generate(dir.path(), 6, 0.2);
    let model = dir.path().join("constant.json");
    let zeros = vec!["0"; 128].join(",");
    fs::write(
        &model,
        format!(
            r#"{{"kind": "linear", "num_classes": 2, "input_length": 128, "input_channels": 1,
                "weights": [[{zeros}], [{zeros}]], "bias": [1.0, 0.0]}}"#
        ),
    )
    .unwrap();
    let out = dir.path().join("eval");
    ok(&[
        "evaluate", "--dataset", s(&data), "--model", s(&model), "--metrics", "auc,continuity", "--out", s(&out), "-q",
    ]);
    let mut r = csv::Reader::from_path(out.join("report.csv")).unwrap();
    let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
    let aucs: Vec<f64> = rows.iter().filter(|r| &r[4] == "auc").map(|r| r[5].parse().unwrap()).collect();
    assert_eq!(aucs.len(), 6 * 4);
    assert!(aucs.iter().all(|&a| a == aucs[0]), "{aucs:?}");
    for row in rows.iter().filter(|r| &r[3] == "occlusion" && &r[4] == "continuity") {
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn report_rows_cover_samples_methods_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 10, 0.1);
    let out = dir.path().join("eval");
    ok(&[
        "evaluate", "--dataset", s(&data), "--model", s(&model), "--samples", "4", "--n-perturb", "2", "--out", s(&out), "-q",
    ]);
    let mut r = csv::Reader::from_path(out.join("report.csv")).unwrap();
    assert_eq!(r.records().count(), 4 * 4 * 4);
    assert!(out.join("SUCCESS").exists());
}

#[test]
fn report_charts_are_well_formed_and_values_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 8, 0.1);
    let eval = dir.path().join("eval");
    ok(&[
        "evaluate", "--dataset", s(&data), "--model", s(&model), "--methods", "occlusion,random", "--n-perturb", "2",
        "--out", s(&eval), "-q",
    ]);
    let rep = dir.path().join("report");
    ok(&["report", "--input", s(&eval), "--out", s(&rep), "-q"]);

    let files = files_under(&rep);
    let svgs: Vec<_> = files.keys().filter(|p| p.extension().is_some_and(|e| e == "svg")).collect();
    let curves: Vec<_> = svgs.iter().filter(|p| p.to_string_lossy().starts_with("deletion_curves_")).collect();
    let bars: Vec<_> = svgs.iter().filter(|p| p.to_string_lossy().starts_with("metric_")).collect();
    assert_eq!(curves.len(), 1);
    assert_eq!(bars.len(), 4);
    for path in &svgs {
        let text = String::from_utf8(files[*path].clone()).unwrap();
        roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
    let curve_svg = String::from_utf8(files[*curves[0]].clone()).unwrap();
    let doc = roxmltree::Document::parse(&curve_svg).unwrap();
    let series = doc.descendants().filter(|n| n.attribute("class") == Some("series")).count();
    assert_eq!(series, 2);

    let read = |p: &Path| -> Vec<Vec<String>> {
        csv::Reader::from_path(p)
            .unwrap()
            .records()
            .map(|r| r.unwrap().iter().map(str::to_string).collect())
            .collect()
    };
    assert_eq!(read(&rep.join("values.csv")), read(&eval.join("report.csv")));
}

#[test]
fn empty_report_is_nothing_to_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 4, 0.0);
    let eval = dir.path().join("eval");
    ok(&["evaluate", "--dataset", s(&data), "--model", s(&model), "--metrics", "auc", "--out", s(&eval), "-q"]);
    let header = fs::read_to_string(eval.join("report.csv")).unwrap();
    let header = header.lines().next().unwrap().to_string();
    fs::write(eval.join("report.csv"), header + "\n").unwrap();
    fs::write(eval.join("curves.csv"), "schema_version,dataset,sample_id,method,space,point,fraction,score\n").unwrap();
    fs::remove_dir_all(eval.join("maps")).unwrap();
    let out = dir.path().join("report");
    let res = freqatt(&["report", "--input", s(&eval), "--out", s(&out)]);
    assert_eq!(res.status.code(), Some(5));
    assert!(!out.join("SUCCESS").exists());
}

#[test]
fn generated_data_loads_and_is_classified_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 30, 0.0);
    let manifest = fs::read_to_string(dir.path().join("gen/manifest.json")).unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(manifest["seeds"]["synthetic"], 11);
    assert_eq!(manifest["config"]["synthetic"]["seed"], 11);

    let out = dir.path().join("eval");
    ok(&["evaluate", "--dataset", s(&data), "--model", s(&model), "--metrics", "auc", "--methods", "random", "--out", s(&out), "-q"]);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("evaluation.json")).unwrap()).unwrap();
    assert_eq!(summary["accuracy"], 1.0);
    assert_eq!(summary["samples"], 30);
}

#[test]
fn unknown_verb_is_rejected() {
    let res = freqatt(&["explain", "--out", "x"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!Path::new("x").exists());
}

#[test]
fn results_do_not_depend_on_the_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 12, 0.3);
    let runs: Vec<_> = ["1", "4"]
        .iter()
        .map(|w| {
            let out = dir.path().join(format!("w{w}"));
            ok(&[
                "evaluate", "--dataset", s(&data), "--model", s(&model), "--samples", "6", "--n-perturb", "3",
                "--workers", w, "--out", s(&out), "-q",
            ]);
            files_under(&out)
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn failed_run_leaves_no_success_marker() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 4, 0.0);
    let out = dir.path().join("eval");
    ok(&["evaluate", "--dataset", s(&data), "--model", s(&model), "--metrics", "auc", "--out", s(&out), "-q"]);
    assert!(out.join("SUCCESS").exists());
    // Input-space maps cannot be deleted in frequency space.
    let res = freqatt(&[
        "evaluate", "--dataset", s(&data), "--model", s(&model), "--metrics", "auc", "--space", "frequency",
        "--out", s(&out),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.join("SUCCESS").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn saved_maps_can_be_evaluated_and_gaps_are_grid_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 8, 0.2);
    let maps_run = dir.path().join("attr");
    let common = ["--dataset", s(&data), "--model", s(&model), "--samples", "4", "--n-perturb", "2"];
    ok(&[&["attribute"], &common[..], &["--out", s(&maps_run), "-q"]].concat());

    let from_maps = dir.path().join("from_maps");
    let fresh = dir.path().join("fresh");
    ok(&[&["evaluate"], &common[..], &["--maps", s(&maps_run.join("maps")), "--out", s(&from_maps), "-q"]].concat());
    ok(&[&["evaluate"], &common[..], &["--out", s(&fresh), "-q"]].concat());
    let report = |d: &Path| fs::read(d.join("report.csv")).unwrap();
    assert_eq!(report(&from_maps), report(&fresh));

    let victim = fs::read_dir(maps_run.join("maps")).unwrap().next().unwrap().unwrap().path();
    fs::remove_file(victim).unwrap();
    let gap = dir.path().join("gap");
    let res = freqatt(&[&["evaluate"], &common[..], &["--maps", s(&maps_run.join("maps")), "--out", s(&gap)]].concat());
    assert_eq!(res.status.code(), Some(5));
}

#[test]
fn compare_ranks_methods_and_rejects_incomplete_grids() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 8, 0.2);
    let run = |name: &str, methods: &str| {
        let out = dir.path().join(name);
        ok(&[
            "evaluate", "--dataset", s(&data), "--model", s(&model), "--samples", "4", "--metrics", "auc,continuity",
            "--methods", methods, "--out", s(&out), "-q",
        ]);
        out
    };
    let full = run("full", "occlusion,random");
    let cmp = dir.path().join("cmp");
    ok(&["compare", "--input", s(&full), "--out", s(&cmp), "-q"]);
    let mut r = csv::Reader::from_path(cmp.join("average_ranks.csv")).unwrap();
    let ranks: Vec<_> = r.records().map(|r| r.unwrap()).collect();
    assert_eq!(ranks.len(), 2 * 2);
    let continuity_random = ranks.iter().find(|r| &r[1] == "continuity" && &r[2] == "random").unwrap();
    assert_eq!(&continuity_random[3], "2.0");

    // Same dataset name from a second run with a different method set.
    let partial = dir.path().join("partial");
    fs::create_dir_all(&partial).unwrap();
    let text = fs::read_to_string(full.join("report.csv")).unwrap();
    let renamed: String = text
        .lines()
        .enumerate()
        .filter(|(i, l)| *i == 0 || l.contains(",occlusion,"))
        .map(|(i, l)| if i == 0 { format!("{l}\n") } else { format!("{}\n", l.replacen("synthetic", "other", 1)) })
        .collect();
    fs::write(partial.join("report.csv"), renamed).unwrap();
    let res = freqatt(&["compare", "--input", s(&full), "--input", s(&partial), "--out", s(&dir.path().join("c2"))]);
    assert_eq!(res.status.code(), Some(5));
}

#[test]
fn optimize_puts_the_true_class_on_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let (data, model) = generate(dir.path(), 6, 0.0);
    let out = dir.path().join("opt");
    ok(&["optimize", "--dataset", s(&data), "--model", s(&model), "--out", s(&out), "-q"]);
    let mut r = csv::Reader::from_path(out.join("similarity.csv")).unwrap();
    let rows: Vec<_> = r.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6 * 2);
    for pair in rows.chunks(2) {
        let best = pair.iter().min_by(|a, b| a[5].parse::<f64>().unwrap().total_cmp(&b[5].parse().unwrap())).unwrap();
        assert_eq!(best[3], best[4]);
    }
    assert!(out.join("optimized.txt").exists());

    let rep = dir.path().join("rep");
    ok(&["report", "--input", s(&out), "--out", s(&rep), "-q"]);
    assert!(rep.join("similarity_l2_synthetic.svg").exists());
}
