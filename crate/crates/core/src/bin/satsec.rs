//! Command-line entry point: config generation, single solves, sweeps and
//! solution checks.
//!
//! Exit status is 0 on success, 2 when some realization was infeasible (its
//! results are still written) and 1 on a fatal error or a failed check.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use satsec::config::{ExperimentSpec, SweepVar};
use satsec::harness::{
    emit_csv, emit_plot_script, evaluate, realization_channels, realized_report, run_sweep, solve_method,
    verify_instance,
};
use satsec::ratemodel::{EveCsi, SecrecyReport};
use satsec::sca::Method;
use satsec::Result;

#[derive(Parser)]
#[command(name = "satsec", version, about = "Secrecy beamforming for satellite-terrestrial downlinks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment JSON (defaults to the built-in preset).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated methods: proposed, pa_an, zf.
    #[arg(long, global = true, value_delimiter = ',')]
    method: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a default experiment config.
    Gen {
        /// Sweep variable of the preset: p_b, p_s, m, q or delta.
        #[arg(long, default_value = "p_b")]
        sweep: String,
        #[command(flatten)]
        common: Common,
    },
    /// Solve one realization at the base parameters and print its rates.
    Solve {
        #[arg(long, default_value_t = 0)]
        realization: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run the configured sweep and write sweep.csv and sweep.gp.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Solve the configured realizations with the proposed scheme and check
    /// rank, tightness, constraints and the power-minimization equivalence.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn load_spec(common: &Common, sweep: Option<SweepVar>) -> Result<ExperimentSpec> {
    let mut spec = match (&common.config, sweep) {
        (Some(path), _) => ExperimentSpec::load(path)?,
        (None, Some(v)) => ExperimentSpec::preset(v),
        (None, None) => ExperimentSpec::default(),
    };
    if let Some(seed) = common.seed {
        spec.master_seed = seed;
    }
    if let Some(list) = &common.method {
        spec.methods = list.iter().map(|m| Method::parse(m)).collect::<Result<_>>()?;
    }
    spec.validate()?;
    Ok(spec)
}

fn out_dir(common: &Common) -> Result<Option<&Path>> {
    match &common.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn gen(sweep: &str, common: &Common) -> Result<ExitCode> {
    let spec = load_spec(common, Some(SweepVar::parse(sweep)?))?;
    let json = spec.to_json()? + "\n";
    match out_dir(common)? {
        Some(dir) => {
            let path = dir.join("config.json");
            fs::write(&path, json)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn solve(realization: usize, common: &Common) -> Result<ExitCode> {
    let spec = load_spec(common, None)?;
    let dir = out_dir(common)?;
    let budget = spec.budget(spec.p_s_db, spec.p_b_db);
    let config = spec.sca_config(spec.q_tu);
    let channels = realization_channels(&spec, realization, spec.m_antennas, spec.channel.csi.delta_bound)?;
    let mut infeasible = false;
    println!("method,{}", SecrecyReport::CSV_HEADER);
    for &method in &spec.methods {
        let sol = match solve_method(method, &channels, &budget, &config, spec.master_seed, realization) {
            Ok(sol) => sol,
            Err(e) => {
                eprintln!("{}: infeasible: {e}", method.as_str());
                infeasible = true;
                continue;
            }
        };
        let report = realized_report(&sol, &channels, &budget, EveCsi::True)?;
        for row in report.csv_rows() {
            println!("{},{row}", method.as_str());
        }
        let outcome = evaluate(&sol, &channels, &budget, &config)?;
        eprintln!(
            "{}: sum secrecy {:.6} bit/s/Hz, TU margin {:.3e}, {} iterations",
            method.as_str(),
            outcome.sum_r_su,
            outcome.tu_margin,
            outcome.iterations
        );
        if let Some(dir) = dir {
            fs::write(dir.join(format!("solution_{}.json", method.as_str())), sol.to_json()? + "\n")?;
        }
    }
    Ok(if infeasible { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn sweep(common: &Common) -> Result<ExitCode> {
    let spec = load_spec(common, None)?;
    let dir = out_dir(common)?.unwrap_or(Path::new("."));
    let result = run_sweep(&spec)?;
    emit_csv(&result, &dir.join("sweep.csv"))?;
    emit_plot_script(&result, &dir.join("sweep.gp"), "sweep.csv")?;
    let infeasible = result.infeasible();
    eprintln!(
        "{} points written to {}, {infeasible} infeasible runs",
        result.points.len(),
        dir.join("sweep.csv").display()
    );
    Ok(if infeasible > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn verify(common: &Common) -> Result<ExitCode> {
    let spec = load_spec(common, None)?;
    let dir = out_dir(common)?;
    let budget = spec.budget(spec.p_s_db, spec.p_b_db);
    let config = spec.sca_config(spec.q_tu);
    let mut infeasible = 0;
    let mut failed = 0;
    let mut checks = Vec::new();
    for r in 0..spec.realizations {
        let channels = realization_channels(&spec, r, spec.m_antennas, spec.channel.csi.delta_bound)?;
        let sol = match solve_method(Method::Proposed, &channels, &budget, &config, spec.master_seed, r) {
            Ok(sol) => sol,
            Err(e) => {
                println!("realization {r}: infeasible: {e}");
                infeasible += 1;
                continue;
            }
        };
        let check = verify_instance(&sol, &channels, &budget, &config)?;
        let failures = check.failures();
        println!(
            "realization {r}: {} objective {:.6} iters {} rank {:.6} tightness {:.2e} margin {:.2e} p3 {}",
            if failures.is_empty() { "ok" } else { "FAIL" },
            check.objective,
            check.iterations,
            check.min_rank,
            check.max_tightness,
            check.tu_margin,
            match (&check.p3_error, check.p3_secrecy_gap, check.p3_power_gap) {
                (Some(e), _, _) => e.clone(),
                (None, Some(ds), Some(dp)) => format!("dsecrecy {ds:.2e} dpower {dp:.2e}"),
                _ => String::new(),
            }
        );
        for f in &failures {
            println!("  {f}");
        }
        if !failures.is_empty() {
            failed += 1;
        }
        checks.push(check);
    }
    if let Some(dir) = dir {
        fs::write(dir.join("verify.json"), serde_json::to_string_pretty(&checks)? + "\n")?;
    }
    println!("{} realizations, {failed} failed checks, {infeasible} infeasible", spec.realizations);
    Ok(if failed > 0 {
        ExitCode::FAILURE
    } else if infeasible > 0 {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen { sweep, common } => gen(sweep, common),
        Command::Solve { realization, common } => solve(*realization, common),
        Command::Sweep { common } => sweep(common),
        Command::Verify { common } => verify(common),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
