mod common;

use std::path::{Path, PathBuf};

use optigrade::dataset::{scan_dataset, split_dataset, BoundingBox, SplitFractions, MANIFEST_FILE};
use optigrade::metrics::{write_predictions, Detection};
use optigrade::optics::ApertureSpec;
use optigrade::resample::{output_dimensions, Image};
use optigrade::sweep::{
    emit_csv, emit_plot_data, evaluate_sweep, parse_csv, render_table, run_degradation_sweep, write_run_outputs,
    Metric, RunReport, SweepConfig,
};

use common::*;

fn boxes() -> Vec<BoundingBox> {
    vec![
        BoundingBox::new(0, 0.3, 0.3, 0.2, 0.2).unwrap(),
        BoundingBox::new(1, 0.7, 0.6, 0.25, 0.3).unwrap(),
    ]
}

/// Three 160×120 scenes split into train/val/test, one record each.
fn dataset(root: &Path) {
    let mut rng = rng(3);
    for (i, stem) in ["a", "b", "c"].iter().enumerate() {
        let img = random_image(&mut rng, 160, 120, 3);
        write_dataset_image(root, stem, &img, &boxes()[..=i.min(1)]);
    }
    let f = SplitFractions::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
    split_dataset(&scan_dataset(root).unwrap(), f, 4)
        .unwrap()
        .save(&root.join(MANIFEST_FILE))
        .unwrap();
}

fn grid() -> SweepConfig {
    SweepConfig {
        gsd_targets: vec![0.1, 0.2],
        q_values: vec![0.5, 1.0],
        apertures: vec![ApertureSpec::circular(0.1), ApertureSpec::cassegrain(0.1)],
        input_sizes: vec![640],
        source_gsd: Some(0.05),
        intermediate_kernel_size: 31,
        ..SweepConfig::default()
    }
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn grid_layout_and_resume() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("out"));
    dataset(&data);
    let cfg = grid();
    let first = run_degradation_sweep(&data, &cfg, &out).unwrap();
    assert_eq!(first.conditions.len(), 8);
    assert_eq!((first.processed(), first.reused()), (24, 0));
    assert!(first.skips.is_empty() && first.issues.is_empty());

    let mut dirs: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    dirs.sort();
    let mut expected: Vec<String> = cfg.conditions().iter().map(|c| c.dir_name()).collect();
    expected.sort();
    assert_eq!(dirs, expected);
    assert!(dirs.contains(&"g0.10_q0.50_cassegrain".to_string()));

    for c in cfg.conditions() {
        let img = Image::load_png(&out.join(c.dir_name()).join("images/a.png")).unwrap();
        let want = output_dimensions(160, 120, &c.degrade_spec(0.05, 31)).unwrap();
        assert_eq!((img.width(), img.height()), want);
        assert!(out.join(c.dir_name()).join(MANIFEST_FILE).exists());
    }

    let before = files(&out);
    let second = run_degradation_sweep(&data, &cfg, &out).unwrap();
    assert_eq!((second.processed(), second.reused()), (0, 24));
    assert_eq!(files(&out), before);
}

#[test]
fn unreachable_conditions_are_skipped() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("out"));
    dataset(&data);
    let cfg = SweepConfig {
        gsd_targets: vec![0.04, 0.1, 5.0],
        q_values: vec![1.0],
        apertures: vec![ApertureSpec::circular(0.1)],
        ..grid()
    };
    let s = run_degradation_sweep(&data, &cfg, &out).unwrap();
    assert_eq!(s.processed(), 3);
    assert_eq!(s.skips.len(), 6);
    let upsampling: Vec<_> = s.skips.iter().filter(|k| k.condition == "g0.04_q1.00_circular").collect();
    assert_eq!(upsampling.len(), 3);
    assert!(s.skips.iter().all(|k| !k.reason.is_empty()));
    assert!(!out.join("g5.00_q1.00_circular/images/a.png").exists());
}

#[test]
fn degradation_independent_of_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    dataset(&data);
    let cfg = SweepConfig {
        gsd_targets: vec![0.15],
        ..grid()
    };
    let run = |threads: usize| {
        let out = tmp.path().join(format!("out{threads}"));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_degradation_sweep(&data, &cfg, &out)).unwrap();
        files(&out)
    };
    assert_eq!(run(1), run(3));
}

/// Writes predictions for every grid cell, echoing the degraded labels when
/// `echo` is set and leaving each file empty otherwise.
fn predictions(out: &Path, preds: &Path, cfg: &SweepConfig, echo: bool) {
    for c in cfg.conditions() {
        let dir = preds.join(c.prediction_dir_name(640));
        std::fs::create_dir_all(&dir).unwrap();
        for stem in ["a", "b", "c"] {
            let text = std::fs::read_to_string(out.join(c.dir_name()).join(format!("labels/{stem}.txt"))).unwrap();
            let dets: Vec<Detection> = if echo {
                optigrade::dataset::parse_labels(&text)
                    .unwrap()
                    .into_iter()
                    .map(|b| Detection::new(b, 0.9).unwrap())
                    .collect()
            } else {
                Vec::new()
            };
            std::fs::write(dir.join(format!("{stem}.txt")), write_predictions(&dets)).unwrap();
        }
    }
}

#[test]
fn evaluation_over_the_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out) = (tmp.path().join("data"), tmp.path().join("out"));
    dataset(&data);
    let cfg = grid();
    run_degradation_sweep(&data, &cfg, &out).unwrap();

    let perfect = tmp.path().join("perfect");
    predictions(&out, &perfect, &cfg, true);
    let eval = evaluate_sweep(&perfect, &out, &cfg).unwrap();
    assert_eq!(eval.rows.len(), 8);
    assert!(eval.missing.is_empty() && eval.issues.is_empty());
    assert!(eval.rows.iter().all(|r| r.map == 1.0 && r.f1 == 1.0 && r.count_error == 0.0));

    // Only the test split is scored; count the labels it holds.
    let manifest = optigrade::dataset::DatasetManifest::load(&data.join(MANIFEST_FILE)).unwrap();
    let test: Vec<_> = manifest.records_in(optigrade::dataset::Split::Test).collect();
    assert_eq!(test.len(), 1);
    let stem = test[0].image.file_stem().unwrap().to_str().unwrap();
    let expected = if stem == "a" { 1.0 } else { 2.0 };
    let empty = tmp.path().join("empty");
    predictions(&out, &empty, &cfg, false);
    let eval = evaluate_sweep(&empty, &out, &cfg).unwrap();
    assert!(eval.rows.iter().all(|r| r.map == 0.0 && r.f1 == 0.0 && r.count_error == expected));

    // One cell missing, one with a corrupt file.
    let conds = cfg.conditions();
    std::fs::remove_dir_all(perfect.join(conds[0].prediction_dir_name(640))).unwrap();
    let bad = perfect.join(conds[1].prediction_dir_name(640)).join(format!("{stem}.txt"));
    std::fs::write(&bad, "0 0.5 0.5 0.1\n").unwrap();
    let eval = evaluate_sweep(&perfect, &out, &cfg).unwrap();
    assert_eq!(eval.missing, vec![conds[0].prediction_dir_name(640)]);
    // The corrupt file held the only test image, so that cell has nothing
    // left to score and reports that too.
    assert_eq!(eval.issues.len(), 2);
    assert_eq!(eval.issues[0].path, bad);
    assert_eq!(eval.rows.len(), 6);
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)).unwrap()
}

#[test]
fn fixtures_round_trip() {
    for name in ["circular_640.csv", "circular_1280.csv", "cassegrain_640.csv", "cassegrain_1280.csv"] {
        let text = fixture(name);
        let rows = parse_csv(&text).unwrap();
        assert_eq!(rows.len(), 45, "{name}");
        assert_eq!(emit_csv(&rows), text, "{name}");
        let plot = emit_plot_data(&rows, Metric::Map).unwrap();
        assert_eq!(plot.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).count(), 45);
        assert_eq!(plot.matches("# q=").count(), 3);
    }
}

#[test]
fn table_shows_reference_value() {
    let rows = parse_csv(&fixture("circular_640.csv")).unwrap();
    let table = render_table(&rows);
    let line = table.lines().nth(1).unwrap();
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(&fields[..6], ["0.05", "0.5", "circular", "640", "0.93", "0.375"]);
    assert_eq!(table.lines().count(), 46);
}

#[test]
fn run_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let rows = parse_csv(&fixture("cassegrain_1280.csv")).unwrap();
    let report = RunReport {
        started: "2024-01-01T00:00:00Z".into(),
        rows: rows.len(),
        ..RunReport::default()
    };
    let a = write_run_outputs(tmp.path(), &rows, &report).unwrap();
    let b = write_run_outputs(tmp.path(), &rows, &report).unwrap();
    assert_ne!(a, b);
    assert_eq!(std::fs::read_to_string(a.join("results.csv")).unwrap(), fixture("cassegrain_1280.csv"));
    for m in Metric::ALL {
        assert!(a.join("plots").join(format!("{}.dat", m.name())).exists());
    }
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.join("run_report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"], 45);

    let empty = write_run_outputs(tmp.path(), &[], &RunReport::default()).unwrap();
    assert!(!empty.join("results.csv").exists());
    assert!(empty.join("run_report.json").exists());
}
