use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use pursuit_lab::experiment::{
    draw_noise, emit_results, generate_dictionary, generate_signal_with, rng_from_seed, run_experiment,
    write_trials_jsonl, ExperimentConfig, OutputFormat,
};
use pursuit_lab::guarantees::{bound_report, bp_constant, ds_constant, GuaranteeParams};
use pursuit_lab::metrics::{rip_exact_with_budget, rip_monte_carlo, DEFAULT_ENUMERATION_BUDGET};
use pursuit_lab::pursuit::{
    read_trace_jsonl, recurrence_diagnostics, run, write_trace_jsonl, NormEstimate,
};
use pursuit_lab::{Algorithm, Dictionary, Error, PursuitConfig, Result, SparseSignal};

#[derive(Parser)]
#[command(name = "pursuit-lab", version, about = "Greedy-like sparse recovery experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RipMode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Scaled,
    Full,
    Noise,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded Gaussian dictionary with unit columns as CSV.
    GenDict {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte-Carlo sweep and write aggregate and per-trial results.
    Run {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate constants and bounds for one algorithm (sp, cosamp, iht, ds, bp).
    Bounds {
        #[arg(long)]
        algorithm: String,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        /// `||D*_{T_e} e||_2`, for the deterministic bound.
        #[arg(long)]
        noise_correlation: Option<f64>,
    },
    /// Restricted isometry constant of a dictionary CSV.
    Rip {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "exact")]
        mode: RipMode,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u128,
    },
    /// Recover a random instance on a dictionary and save its trace.
    Solve {
        #[arg(long)]
        dict: PathBuf,
        #[arg(long)]
        algorithm: Algorithm,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fixed iteration count; the practical rule with the true norm otherwise.
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        trace_out: PathBuf,
        #[arg(long)]
        instance_out: PathBuf,
    },
    /// Summarize a trace; with the dictionary and instance, check the
    /// recurrence inequalities.
    Diagnose {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, requires = "instance")]
        dict: Option<PathBuf>,
        #[arg(long, requires = "dict")]
        instance: Option<PathBuf>,
    },
}

/// Ground truth written by `solve` and read by `diagnose`.
#[derive(Serialize, Deserialize)]
struct Instance {
    algorithm: Algorithm,
    k: usize,
    x: Vec<f64>,
    e: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {err}", err.category());
            ExitCode::FAILURE
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string(value).expect("serializable");
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::GenDict { m, n, seed, out } => {
            if m == 0 || n == 0 || m > n {
                return Err(Error::Config(format!("need 0 < m <= n, got m = {m}, n = {n}")));
            }
            generate_dictionary(m, n, seed).save(&out)
        }
        Command::Run {
            config,
            preset,
            out_dir,
            format,
            threads,
        } => {
            let cfg = match (config, preset) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(Preset::Scaled)) => ExperimentConfig::scaled(),
                (None, Some(Preset::Full)) => ExperimentConfig::full_scale(),
                (None, Some(Preset::Noise)) => ExperimentConfig::noise_sweep(),
                (None, None) => return Err(Error::Config("pass --config or --preset".into())),
            };
            let output = match threads {
                Some(t) => rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| Error::Config(e.to_string()))?
                    .install(|| run_experiment(&cfg))?,
                None => run_experiment(&cfg)?,
            };
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::Io {
                path: out_dir.clone(),
                source: e,
            })?;
            if matches!(format, Format::Csv | Format::Both) {
                emit_results(&output.rows, OutputFormat::Csv, &out_dir.join("results.csv"))?;
            }
            if matches!(format, Format::Jsonl | Format::Both) {
                emit_results(&output.rows, OutputFormat::Jsonl, &out_dir.join("results.jsonl"))?;
            }
            write_trials_jsonl(&output.trials, &out_dir.join("trials.jsonl"))?;
            eprintln!(
                "{} rows, {} trial records written to {}",
                output.rows.len(),
                output.trials.len(),
                out_dir.display()
            );
            Ok(())
        }
        Command::Bounds {
            algorithm,
            delta,
            n,
            k,
            sigma,
            a,
            noise_correlation,
        } => {
            match algorithm.to_ascii_lowercase().as_str() {
                "ds" => {
                    let c = ds_constant(delta)?;
                    print_json(&serde_json::json!({ "algorithm": "ds", "delta": delta, "constant": c }));
                    return Ok(());
                }
                "bp" => {
                    bp_constant()?;
                }
                _ => {}
            }
            let alg: Algorithm = algorithm.parse()?;
            let params = GuaranteeParams {
                a,
                n_atoms: n,
                k,
                sigma,
                delta,
            };
            print_json(&bound_report(alg, &params, noise_correlation)?);
            Ok(())
        }
        Command::Rip {
            input,
            k,
            mode,
            trials,
            seed,
            budget,
        } => {
            let dict = Dictionary::load(&input)?;
            let est = match mode {
                RipMode::Exact => rip_exact_with_budget(&dict, k, budget)?,
                RipMode::Mc => rip_monte_carlo(&dict, k, trials, seed)?,
            };
            print_json(&est);
            Ok(())
        }
        Command::Solve {
            dict,
            algorithm,
            k,
            sigma,
            seed,
            iterations,
            trace_out,
            instance_out,
        } => {
            let dict = Dictionary::load(&dict)?;
            let mut rng = rng_from_seed(seed);
            let x = generate_signal_with(&mut rng, dict.n_atoms(), k);
            let e = draw_noise(&mut rng, dict.m(), sigma);
            let y = dict.apply(x.values()) + &e;
            let mut cfg = match iterations {
                Some(count) => PursuitConfig::fixed(k, count),
                None => PursuitConfig::practical(k, sigma, NormEstimate::Known(x.values().norm())),
            };
            cfg.trace_enabled = true;
            let mut res = run(algorithm, &dict, &y, &cfg, Some(x.support()))?;
            res.attach_ground_truth(x.values());
            write_trace_jsonl(&trace_out, res.trace.as_deref().unwrap_or(&[]))?;
            write_json(
                &instance_out,
                &Instance {
                    algorithm,
                    k,
                    x: x.values().iter().copied().collect(),
                    e: e.iter().copied().collect(),
                },
            )?;
            print_json(&serde_json::json!({
                "algorithm": algorithm,
                "iterations_run": res.iterations_run,
                "squared_error": res.squared_error(x.values()),
                "support_recovered": res.estimate.support() == x.support(),
            }));
            Ok(())
        }
        Command::Diagnose { input, dict, instance } => {
            let trace = read_trace_jsonl(&input)?;
            match (dict, instance) {
                (Some(dict), Some(instance)) => {
                    let dict = Dictionary::load(&dict)?;
                    let text = std::fs::read_to_string(&instance).map_err(|e| Error::Io {
                        path: instance.clone(),
                        source: e,
                    })?;
                    let inst: Instance =
                        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
                    let x = SparseSignal::from_dense(DVector::from_vec(inst.x), inst.k)?;
                    let e = DVector::from_vec(inst.e);
                    let report = recurrence_diagnostics(&trace, &x, &e, &dict, inst.algorithm)?;
                    print_json(&report);
                    if !report.all_hold() {
                        eprintln!("{} of {} checks failed", report.failures().count(), report.checks.len());
                    }
                }
                _ => {
                    let summary: Vec<_> = trace
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "iteration": r.iteration,
                                "support": r.pruned_support,
                                "residual_norm": r.residual_norm,
                                "estimate_error": r.estimate_error,
                            })
                        })
                        .collect();
                    print_json(&summary);
                }
            }
            Ok(())
        }
    }
}
