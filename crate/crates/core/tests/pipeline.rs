//! End-to-end pass through the public API on a small synthetic scene.

use hypergrid_core::augmentation::AugmentationKind;
use hypergrid_core::dataset::{
    generate_patch_splits, load_scene, save_scene, synth_scene, verify_no_leakage, HsiCube, LabelMap, SplitParams,
    SplitSpec, SynthParams,
};
use hypergrid_core::evaluation::{
    compare, experiment_rows, predict, prepare_cell, read_results, run_cell, run_experiment, write_results,
    ExperimentConfig, MetricsReport, RankScore, ResultSet,
};
use hypergrid_core::network::{load_checkpoint, save_checkpoint, NetworkConfig};
use hypergrid_core::SeededRng;

fn scene() -> (HsiCube, LabelMap, SplitSpec) {
    let params = SynthParams { width: 24, height: 24, bands: 6, classes: 3, noise: 0.02 };
    let s = synth_scene(params, &mut SeededRng::new(11)).unwrap();
    let split_params = SplitParams { folds: 3, block_size: 6, patch_radius: 1 };
    let split = generate_patch_splits(&s.labels, split_params, &mut SeededRng::new(4)).unwrap();
    (s.cube, s.labels, split)
}

fn config() -> ExperimentConfig {
    let network = NetworkConfig {
        patch_width: 3,
        patch_height: 3,
        bands: 6,
        num_conv_layers: 1,
        kernels_per_layer: 4,
        kernel_extent: 3,
        dense_widths: vec![8],
        num_classes: 3,
        per_channel_kernels: false,
    };
    let mut cfg = ExperimentConfig::new(network, AugmentationKind::Flip);
    cfg.runs = 2;
    cfg.base_seed = 7;
    cfg.train.max_epochs = 4;
    cfg.train.patience = 4;
    cfg.train.adam.learning_rate = 1e-3;
    cfg
}

#[test]
fn scene_files_round_trip() {
    let (cube, labels, split) = scene();
    let dir = tempfile::tempdir().unwrap();
    let (cp, lp) = save_scene(dir.path().join("scene"), &cube, &labels).unwrap();
    let (c2, l2) = load_scene(cp, lp).unwrap();
    assert_eq!((c2, l2), (cube, labels));

    let sp = dir.path().join("split.json");
    split.save(&sp).unwrap();
    assert_eq!(SplitSpec::load(&sp).unwrap(), split);
}

#[test]
fn generated_split_is_clean() {
    let (_, labels, split) = scene();
    assert_eq!(split.folds.len(), 3);
    assert!(verify_no_leakage(&split, &labels).is_clean());
}

#[test]
fn experiment_independent_of_threads() {
    let (cube, labels, split) = scene();
    let cfg = config();
    let a = run_experiment(&cube, &labels, &split, &cfg, 1).unwrap();
    let b = run_experiment(&cube, &labels, &split, &cfg, 3).unwrap();
    assert_eq!(a.reports.len(), 6);
    let key = |r: &MetricsReport| (r.fold, r.run, r.epochs, r.metrics.clone());
    assert_eq!(a.reports.iter().map(key).collect::<Vec<_>>(), b.reports.iter().map(key).collect::<Vec<_>>());

    let mut csv = Vec::new();
    write_results(&mut csv, &experiment_rows(&a)).unwrap();
    let rows = read_results(csv.as_slice()).unwrap();
    assert_eq!(rows.len(), 6);
    let set = ResultSet { name: "a".into(), rows };
    let cmp = compare(&[set.clone(), set], RankScore::Kappa).unwrap();
    assert_eq!(cmp.p_values[0][1], 1.0);
}

#[test]
fn checkpoint_reproduces_predictions() {
    let (cube, labels, split) = scene();
    let cfg = config();
    let cell = run_cell(&cube, &labels, &split, 0, 0, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.hgm");
    save_checkpoint(&path, &cfg.network, &cell.params).unwrap();
    let (net, params) = load_checkpoint(&path).unwrap();
    assert_eq!(net, cfg.network);

    let data = prepare_cell(&cube, &labels, &split, 0, 0, &cfg).unwrap();
    let before = predict(&cell.params, &cfg.network, &data.test).unwrap().labels;
    let after = predict(&params, &net, &data.test).unwrap().labels;
    assert_eq!(before, after);
}
