use std::fs::{self, File};
use std::io::{self, Write};
use std::time::Instant;

use hypergrid_core::dataset::{apply_normalization, extract_patch, fit_normalization, load_scene, mirror_pad};
use hypergrid_core::evaluation::{experiment_rows, format_summary, run_cell, run_experiment, write_results, ResultRow};
use hypergrid_core::network::{forward, load_checkpoint, save_checkpoint};

use crate::commands::thread_count;
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::{BenchmarkArgs, ExperimentArgs, TrainArgs};

pub fn train(a: TrainArgs) -> CliResult {
    let cfg = RunConfig::load(&a.config)?;
    let scene = cfg.load_scene()?;
    let exp = cfg.experiment(&scene)?;
    if a.fold >= scene.split.folds.len() {
        return Err(CliError::usage(format!("--fold {} out of range (split has {} folds)", a.fold, scene.split.folds.len())));
    }
    let cell = run_cell(&scene.cube, &scene.labels, &scene.split, a.fold, a.run, &exp)?;
    save_checkpoint(&a.out_model, &exp.network, &cell.params)?;
    let row = ResultRow::from_report(&exp.method, &exp.dataset, &cell.report);
    write_results(File::create(&a.out_report)?, std::slice::from_ref(&row))?;
    let m = &cell.report.metrics;
    println!(
        "fold {} run {}: epochs {} oa {:.4} aa {:.4} kappa {:.4} train_oa {:.4} time {:.2}s",
        a.fold, a.run, cell.report.epochs, m.oa, m.aa, m.kappa, cell.train_oa, cell.report.training_time_s
    );
    Ok(())
}

pub fn experiment(a: ExperimentArgs) -> CliResult {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(runs) = a.runs {
        cfg.runs = runs;
    }
    let scene = cfg.load_scene()?;
    let exp = cfg.experiment(&scene)?;
    let result = run_experiment(&scene.cube, &scene.labels, &scene.split, &exp, thread_count()?)?;
    let rows = experiment_rows(&result);
    let summary = format_summary(&result)?;
    match &a.out {
        Some(path) => {
            write_results(File::create(path)?, &rows)?;
            print!("{summary}");
        }
        None => {
            write_results(io::stdout().lock(), &rows)?;
            eprint!("{summary}");
        }
    }
    if let Some(path) = &a.summary {
        fs::write(path, &summary)?;
    }
    Ok(())
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// CSV columns: `passes,samples,mean_ms,p95_ms`.
pub fn benchmark(a: BenchmarkArgs) -> CliResult {
    if a.repeat == 0 {
        return Err(CliError::usage("--repeat must be >= 1"));
    }
    let (cfg, params) = load_checkpoint(&a.model)?;
    let (cube, labels) = load_scene(&a.cube, &a.labels)?;
    if cube.bands() != cfg.bands || cfg.patch_width != cfg.patch_height || cfg.patch_width % 2 == 0 {
        return Err(CliError::usage(format!("checkpoint expects {}x{}x{} patches", cfg.patch_width, cfg.patch_height, cfg.bands)));
    }
    let coords = labels.labeled();
    if coords.is_empty() {
        return Err(CliError::usage("scene has no labeled pixels"));
    }
    let padded = mirror_pad(&apply_normalization(&cube, &fit_normalization(&cube, &coords)?)?, cfg.patch_width / 2)?;
    let patches = coords
        .iter()
        .map(|&(x, y)| extract_patch(&padded, x, y, cfg.patch_width))
        .collect::<hypergrid_core::Result<Vec<_>>>()?;
    let mut latencies = Vec::with_capacity(patches.len() * a.repeat);
    for _ in 0..a.repeat {
        for p in &patches {
            let start = Instant::now();
            let scores = forward(&params, &cfg, p)?;
            std::hint::black_box(scores);
            latencies.push(start.elapsed().as_secs_f64() * 1e3);
        }
    }
    let mean = latencies.iter().sum::<f64>() / latencies.len() as f64;
    latencies.sort_by(f64::total_cmp);
    let mut out = io::stdout().lock();
    writeln!(out, "passes,samples,mean_ms,p95_ms")?;
    writeln!(out, "{},{},{},{}", a.repeat, patches.len(), mean, percentile(&latencies, 0.95))?;
    Ok(())
}
