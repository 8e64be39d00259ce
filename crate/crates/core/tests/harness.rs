use std::fs;

use tbtlrr::harness::{
    grid_search, noise_sweep, parse_results, run_pipeline, ExperimentSpec, NoiseKind, SyntheticParams, Variant,
    GRID_FILE, SWEEP_FILE,
};
use tbtlrr::io::{read_labels, read_t3b, write_labels, write_t3b};

fn small() -> SyntheticParams {
    SyntheticParams {
        k_subspaces: 3,
        samples_per_cluster: 8,
        n1: 12,
        n3: 3,
        tubal_rank: 2,
        ..SyntheticParams::default()
    }
}

#[test]
fn clean_default_run_writes_perfect_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::synthetic(SyntheticParams::default(), dir.path());
    spec.dump_tensors = true;
    let out = run_pipeline(&spec).unwrap();
    let rows = parse_results(&fs::read_to_string(&out.results_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.acc_mean == 1.0));
    for f in ["z.t3b", "e.t3b", "n.t3b", "affinity_weighted.t3b", "labels_true.csv", "trace.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(read_t3b(dir.path().join("z.t3b")).unwrap().dims(), (80, 80, 4));
    assert_eq!(read_labels(dir.path().join("labels_weighted.csv")).unwrap().len(), 80);
}

#[test]
fn file_input_matches_synthetic_source() {
    let dir = tempfile::tempdir().unwrap();
    let (x, labels) = tbtlrr::harness::generate_synthetic(&small()).unwrap();
    let (xp, lp) = (dir.path().join("x.t3b"), dir.path().join("y.csv"));
    write_t3b(&xp, &x).unwrap();
    write_labels(&lp, &labels).unwrap();
    let a = run_pipeline(&ExperimentSpec::from_files(&xp, &lp, dir.path().join("file"))).unwrap();
    let b = run_pipeline(&ExperimentSpec::synthetic(small(), dir.path().join("synth"))).unwrap();
    for v in Variant::ALL {
        assert_eq!(a.row(v).acc_mean, b.row(v).acc_mean);
        assert_eq!(a.row(v).nmi_mean, b.row(v).nmi_mean);
    }
}

#[test]
fn label_count_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let (x, labels) = tbtlrr::harness::generate_synthetic(&small()).unwrap();
    let (xp, lp) = (dir.path().join("x.t3b"), dir.path().join("y.csv"));
    write_t3b(&xp, &x).unwrap();
    write_labels(&lp, &labels[1..]).unwrap();
    assert!(run_pipeline(&ExperimentSpec::from_files(&xp, &lp, dir.path())).is_err());
}

#[test]
fn single_point_grid() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::synthetic(small(), dir.path());
    let table = grid_search(&spec, &[1.0], &[10.0]).unwrap();
    let best = table.best().unwrap();
    assert_eq!((best.lambda, best.beta), (1.0, 10.0));
    let text = fs::read_to_string(dir.path().join(GRID_FILE)).unwrap();
    assert!(text.starts_with("# tbtlrr-grid v1\n"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn grid_table_keeps_failed_points() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::synthetic(small(), dir.path());
    let table = grid_search(&spec, &[1.0, -1.0], &[1.0, 10.0]).unwrap();
    assert_eq!(table.points.len(), 4);
    assert!(table.points[2].outcome.is_err() && table.points[3].outcome.is_err());
    assert!(table.best().unwrap().lambda == 1.0);
    let text = fs::read_to_string(&table.path).unwrap();
    assert_eq!(text.lines().count(), 2 + 4);
    assert_eq!(text.matches(",\"error: ").count(), 2);
    assert!(grid_search(&spec, &[], &[1.0]).is_err());
}

#[test]
fn grid_ranks_the_good_point_first() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::synthetic(SyntheticParams::default(), dir.path());
    // A huge lambda with a tiny beta pushes the data into the Gaussian term.
    let table = grid_search(&spec, &[1e3, 1.0], &[1e-5, 10.0]).unwrap();
    let best = table.best().unwrap();
    assert_eq!(best.ranked_row().unwrap().acc_mean, 1.0);
    let accs: Vec<f64> = table.points.iter().map(|p| p.ranked_row().unwrap().acc_mean).collect();
    assert!(accs.windows(2).all(|w| w[0] >= w[1]), "{accs:?}");
}

#[test]
fn sweep_has_one_row_per_level_and_level_zero_matches_plain_run() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec::synthetic(small(), dir.path());
    let rows = noise_sweep(&spec, NoiseKind::Gaussian, &[0.0, 0.1, 0.3]).unwrap();
    assert_eq!(rows.len(), 3);
    let text = fs::read_to_string(dir.path().join(SWEEP_FILE)).unwrap();
    assert_eq!(text.lines().count(), 2 + 3);
    assert!(text.lines().nth(2).unwrap().starts_with("gaussian,0e0,"));

    let plain = run_pipeline(&ExperimentSpec::synthetic(small(), dir.path().join("plain"))).unwrap();
    let mut a = rows[0].weighted.clone();
    let mut b = plain.row(Variant::Weighted).clone();
    a.runtime_seconds = 0.0;
    b.runtime_seconds = 0.0;
    assert_eq!(a, b);
    assert!(noise_sweep(&spec, NoiseKind::Sparse, &[]).is_err());
    assert!(noise_sweep(&spec, NoiseKind::Sparse, &[1.5]).is_err());
}
