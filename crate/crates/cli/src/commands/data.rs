use std::io;

use hypergrid_core::augmentation::class_counts;
use hypergrid_core::dataset::{generate_patch_splits, load_scene, save_scene, synth_scene, verify_no_leakage, SplitParams, SynthParams};
use hypergrid_core::evaluation::prepare_cell;
use hypergrid_core::SeededRng;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult, VERIFICATION};
use crate::{AugmentArgs, SplitArgs, SynthArgs};

pub fn synth(a: SynthArgs) -> CliResult {
    let params = SynthParams { width: a.width, height: a.height, bands: a.bands, classes: a.classes, noise: a.noise };
    let scene = synth_scene(params, &mut SeededRng::new(a.seed))?;
    let (cube, labels) = save_scene(&a.out, &scene.cube, &scene.labels)?;
    println!("cube: {}", cube.display());
    println!("labels: {}", labels.display());
    let counts = scene.labels.class_counts();
    println!("class counts: {counts:?}");
    Ok(())
}

pub fn split(a: SplitArgs) -> CliResult {
    let (_, labels) = load_scene(&a.cube, &a.labels)?;
    let params = SplitParams { folds: a.folds, block_size: a.block, patch_radius: a.radius };
    let spec = generate_patch_splits(&labels, params, &mut SeededRng::new(a.seed))?;
    for (i, f) in spec.folds.iter().enumerate() {
        println!("fold {i}: blocks {} train {} test {}", f.blocks.len(), f.train.len(), f.test.len());
    }
    let report = verify_no_leakage(&spec, &labels);
    println!("violations: {}", report.violations);
    println!("coverage errors: {}", report.coverage_errors);
    if !report.is_clean() {
        return Err(CliError::new(VERIFICATION, format!("split failed verification, first violation {:?}; not written", report.first)));
    }
    spec.save(&a.out)?;
    println!("split: {}", a.out.display());
    Ok(())
}

pub fn augment(a: AugmentArgs) -> CliResult {
    let cfg = RunConfig::load(&a.config)?;
    let scene = cfg.load_scene()?;
    let exp = cfg.experiment(&scene)?;
    let data = prepare_cell(&scene.cube, &scene.labels, &scene.split, a.fold, 0, &exp)?;
    let classes = exp.network.num_classes;
    let after = class_counts(&data.augmented, classes)?;
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["class", "n_c", "s_c", "total"])?;
    for c in 0..classes {
        let n = data.budget.original[c];
        w.write_record([(c + 1).to_string(), n.to_string(), (after[c] - n).to_string(), after[c].to_string()])?;
    }
    let n: usize = data.budget.total_original();
    w.write_record(["all".to_string(), n.to_string(), (data.augmented.len() - n).to_string(), data.augmented.len().to_string()])?;
    w.flush()?;
    Ok(())
}
