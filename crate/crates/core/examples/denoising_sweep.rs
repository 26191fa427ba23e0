//! A small Monte-Carlo sweep over sparsity and noise level, written as CSV.
//!
//! Pass an output directory to keep the files; otherwise rows are printed.

use std::path::PathBuf;

use pursuit_lab::experiment::{emit_results, run_experiment, ExperimentConfig, OutputFormat};

fn main() -> pursuit_lab::Result<()> {
    let mut cfg = ExperimentConfig::scaled();
    cfg.k_values = vec![5, 10];
    cfg.sigma_values = vec![0.5, 1.0, 2.0];
    cfg.trials_per_point = 50;
    let out = run_experiment(&cfg)?;

    println!("{:>3} {:>6} {:<8} {:>10} {:>10} {:>12} {:>9}", "k", "sigma", "alg", "mse", "oracle", "bound", "violated");
    for row in &out.rows {
        println!(
            "{:>3} {:>6.2} {:<8} {:>10.3} {:>10.3} {:>12.1} {:>9.3}",
            row.k,
            row.sigma,
            row.algorithm.name(),
            row.mse,
            row.oracle_mse,
            row.prob_bound,
            row.bound_violation_rate
        );
    }

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir).map_err(|e| pursuit_lab::Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        emit_results(&out.rows, OutputFormat::Csv, &dir.join("results.csv"))?;
        println!("wrote {}", dir.join("results.csv").display());
    }
    Ok(())
}
