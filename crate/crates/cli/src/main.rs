use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use bsg_core::experiment::{run_experiment, ExperimentConfig, InstanceSource};
use bsg_core::game::{generate, GenSpec};
use bsg_core::lower_bound::{build_instance, critical_horizon, hardness_demo, triangulate, verify_construction};
use bsg_core::{BsgInstance, FeedbackMode, Rat};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_VALIDATION: u8 = 2;
const EXIT_WARNING: u8 = 3;

#[derive(Parser)]
#[command(name = "bsg", version, about = "Learning in Bayesian Stackelberg games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Feedback {
    Type,
    Action,
}

impl From<Feedback> for FeedbackMode {
    fn from(f: Feedback) -> Self {
        match f {
            Feedback::Type => FeedbackMode::Type,
            Feedback::Action => FeedbackMode::Action,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(short = 'K', long = "types", value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(short = 'L', long = "bits", value_parser = clap::value_parser!(u64).range(1..))]
        l: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the learner on an instance.
    Run {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        rounds: u64,
        #[arg(long, default_value = "1/10", value_parser = parse_rat)]
        delta: Rat,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long, value_enum, default_value_t = Feedback::Type)]
        feedback: Feedback,
        #[arg(long)]
        white_box: bool,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Validate an instance file.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Verify the hard family and run the vertex-sweep demo.
    Lowerbound {
        #[arg(long)]
        bits: u32,
        /// Defaults to `⌈4^B / 24⌉`.
        #[arg(long)]
        rounds: Option<u64>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize the reports of a run directory.
    Report {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    let r = Rat::parse_canonical(s).map_err(|e| format!("{e} (expected an exact fraction like 1/10)"))?;
    if !r.is_positive() || r >= Rat::one() {
        return Err(format!("{s} is not in (0, 1)"));
    }
    Ok(r)
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load(path: &Path) -> anyhow::Result<BsgInstance> {
    let s = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(BsgInstance::from_json(&s)?)
}

fn gen(spec: GenSpec, out: &Path) -> anyhow::Result<ExitCode> {
    let inst = generate(&spec)?;
    write(out, &inst.to_json())?;
    println!("wrote {} (seed {})", out.display(), spec.seed);
    Ok(ExitCode::SUCCESS)
}

fn verify(path: &Path, strict: bool) -> anyhow::Result<ExitCode> {
    let inst = match load(path) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
    };
    let report = inst.validate();
    println!("{}", serde_json::to_string_pretty(&report)?);
    if !report.is_valid() {
        return Ok(ExitCode::from(EXIT_VALIDATION));
    }
    if strict && !report.warnings.is_empty() {
        return Ok(ExitCode::from(EXIT_WARNING));
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cfg: ExperimentConfig, out_dir: &Path, strict: bool) -> anyhow::Result<ExitCode> {
    let inst = cfg.load_instance()?;
    let report = inst.validate();
    if !report.is_valid() {
        eprintln!("invalid instance: {}", report.violations.join("; "));
        return Ok(ExitCode::from(EXIT_VALIDATION));
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if strict && !report.warnings.is_empty() {
        return Ok(ExitCode::from(EXIT_WARNING));
    }
    if cfg.feedback == FeedbackMode::Action {
        bail!(bsg_core::Error::FeedbackMode(
            "with action feedback every learner suffers regret exponential in the bit complexity \
             (see `bsg lowerbound`); run with --feedback type"
                .into()
        ));
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    write(&out_dir.join("config.json"), &serde_json::to_string_pretty(&cfg)?)?;
    let (_, opt, trials) = run_experiment(&cfg)?;
    let mut failed = false;
    for t in &trials {
        write(&out_dir.join(format!("seed_{}.csv", t.seed)), &t.csv)?;
        write(&out_dir.join(format!("seed_{}.json", t.seed)), &serde_json::to_string_pretty(t)?)?;
        let wb = t.white_box.as_ref().map(|w| if w.all_passed() { " white-box ok" } else { " white-box FAILED" });
        failed |= t.white_box.as_ref().is_some_and(|w| !w.all_passed());
        println!(
            "seed {}: {} rounds, {} epochs, regret {}{}",
            t.seed,
            t.report.rounds_used,
            t.report.epochs_started,
            t.report.cum_regret.to_decimal(),
            wb.unwrap_or("")
        );
    }
    println!("OPT = {}", opt.value);
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}

fn lowerbound(bits: u32, rounds: Option<u64>, trials: usize, seed: u64, out: &Path) -> anyhow::Result<ExitCode> {
    let cells = triangulate(bits)?;
    let checks = cells
        .iter()
        .map(|c| verify_construction(&build_instance(c), c))
        .collect::<bsg_core::Result<Vec<_>>>()?;
    let passed = checks.iter().filter(|c| c.passed()).count();
    let horizon = rounds.unwrap_or_else(|| critical_horizon(bits));
    let demo = hardness_demo(bits, horizon, trials, seed)?;
    let doc = serde_json::json!({
        "B": bits,
        "cells_verified": passed,
        "cells": cells.len(),
        "max_bits": checks.iter().map(|c| c.max_bits).max(),
        "verification": checks,
        "demo": demo,
    });
    write(out, &serde_json::to_string_pretty(&doc)?)?;
    println!(
        "B = {bits}: {passed}/{} cells verified; T = {horizon}, miss rate {:.3}, mean regret {}",
        cells.len(),
        demo.miss_rate,
        demo.mean_regret.to_decimal()
    );
    Ok(if passed == cells.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VALIDATION)
    })
}

fn report(out_dir: &Path) -> anyhow::Result<ExitCode> {
    let mut paths: Vec<PathBuf> = fs::read_dir(out_dir)
        .with_context(|| format!("reading {}", out_dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "json") && p.file_name().is_some_and(|n| n.to_string_lossy().starts_with("seed_"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no seed_*.json reports in {}", out_dir.display());
    }
    println!("seed\trounds\tepochs\tcum_regret\twhite_box");
    for p in paths {
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p)?)?;
        let r = &v["report"];
        let wb = match v["white_box"].as_object() {
            None => "-".to_string(),
            Some(w) => {
                let ok = w["epoch_bound_ok"].as_bool() == Some(true);
                format!("{} epochs checked{}", w["epochs"].as_array().map_or(0, Vec::len), if ok { "" } else { ", bound violated" })
            }
        };
        let regret = r["cum_regret"].as_str().and_then(|s| Rat::parse_canonical(s).ok());
        println!(
            "{}\t{}\t{}\t{}\t{}",
            v["seed"],
            r["rounds_used"],
            r["epochs_started"],
            regret.map_or_else(|| "?".into(), |q| q.to_decimal()),
            wb
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen { m, n, k, l, seed, out } => gen(
            GenSpec {
                m: m as usize,
                n: n as usize,
                k: k as usize,
                l,
                seed,
            },
            &out,
        ),
        Command::Run {
            instance,
            rounds,
            delta,
            seeds,
            feedback,
            white_box,
            out_dir,
            strict,
        } => run(
            ExperimentConfig {
                instance: InstanceSource::Path(instance.to_string_lossy().into_owned()),
                horizon: rounds,
                delta,
                feedback: feedback.into(),
                seeds,
                white_box,
            },
            &out_dir,
            strict,
        ),
        Command::Verify { instance, strict } => verify(&instance, strict),
        Command::Lowerbound {
            bits,
            rounds,
            trials,
            seed,
            out,
        } => lowerbound(bits, rounds, trials, seed, &out),
        Command::Report { out_dir } => report(&out_dir),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
