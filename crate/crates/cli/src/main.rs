mod channel_io;
mod config;
mod stages;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use qavc_core::{scenario, seed, Error};

use config::{numeric_rows, unit_notes, ExperimentConfig, RunRecord, StageRecord};

#[derive(Parser)]
#[command(name = "qavc", about = "Experiment runner for jammer-controlled quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a config-driven pipeline and persist the run record.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    Scenarios,
    /// Run a verification suite and print one verdict per check.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Also write the verdicts as a JSON record.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Shape(_) | Error::Domain(_) => 2,
        Error::Verification(_) => 3,
        Error::Size(_) | Error::NonConvergence(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Scenarios => {
            for name in scenario::scenario_names() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, out } => match cmd_run(&config, seed, out) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_for(&e))
            }
        },
        Command::Verify { suite, seed, out } => match cmd_verify(&suite, seed, out.as_deref()) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(exit_for(&e))
            }
        },
    }
}

fn cmd_run(path: &Path, seed_override: Option<u64>, out_override: Option<PathBuf>) -> Result<ExitCode, Error> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&raw)
        .map_err(|e| Error::Domain(format!("config does not parse: {e}")))?;
    if let Some(s) = seed_override {
        cfg.seed = s;
    }
    if let Some(o) = out_override {
        cfg.out_dir = Some(o);
    }
    cfg.validate()?;

    let base = match (&cfg.scenario, &cfg.channel) {
        (Some(name), None) => scenario::channel_for(name)?,
        (None, Some(spec)) => spec.to_channel()?,
        _ => unreachable!("validated"),
    };
    let scenario_name = cfg.scenario.as_deref().map(str::to_owned);

    let started = Instant::now();
    let mut record = RunRecord {
        config: cfg.clone(),
        resolved_channel: channel_io::ChannelSpec::from_channel(&base),
        versions: [(
            "qavc".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        )]
        .into(),
        units: unit_notes(),
        stages: Vec::new(),
        failure: None,
        wall_clock_ms: 0,
    };

    let mut failed: Option<Error> = None;
    for (i, stage) in cfg.pipeline.iter().enumerate() {
        let stage_seed = seed::derive(cfg.seed, &[i as u64]);
        let params = cfg.params.get(stage);
        let result = match stage.as_str() {
            "symmetrize" => stages::stage_symmetrize(&base, params, stage_seed),
            "derandomize" => stages::stage_derandomize(&base, params, stage_seed),
            "capacity" => stages::stage_capacity(&base, params, stage_seed),
            "net" => stages::stage_net(&base, scenario_name.as_deref(), params),
            "telescope" => stages::stage_telescope(&base, scenario_name.as_deref(), params),
            "verify" => {
                let suite = params
                    .and_then(|p| p.get("suite"))
                    .and_then(|s| s.as_str())
                    .unwrap_or("all")
                    .to_string();
                verify::run_suite(&suite, stage_seed).and_then(|verdicts| {
                    let all_ok = verdicts.iter().all(|v| v.ok);
                    let value = serde_json::json!({ "verdicts": verdicts, "all_ok": all_ok });
                    if all_ok {
                        Ok(value)
                    } else {
                        Err(Error::Verification(format!(
                            "verify stage found failing checks: {}",
                            serde_json::to_string(&value).unwrap_or_default()
                        )))
                    }
                })
            }
            other => Err(Error::Domain(format!("unknown stage '{other}'"))),
        };
        match result {
            Ok(value) => record.stages.push(StageRecord {
                stage: stage.clone(),
                ok: true,
                result: value,
            }),
            Err(e) => {
                record.stages.push(StageRecord {
                    stage: stage.clone(),
                    ok: false,
                    result: serde_json::json!({ "error": e.to_string() }),
                });
                record.failure = Some(format!("stage '{stage}' failed: {e}"));
                failed = Some(e);
                break;
            }
        }
    }
    record.wall_clock_ms = started.elapsed().as_millis();

    let out_dir = cfg
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("qavc-out"));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Domain(format!("cannot create {}: {e}", out_dir.display())))?;
    let record_path = out_dir.join("record.json");
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    std::fs::write(&record_path, json)
        .map_err(|e| Error::Domain(format!("cannot write record: {e}")))?;

    let mut csv = String::from("stage,field,value\n");
    for st in &record.stages {
        let mut rows = Vec::new();
        numeric_rows("", &st.result, &mut rows);
        for (field, value) in rows {
            csv.push_str(&format!("{},{},{}\n", st.stage, field, value));
        }
    }
    std::fs::write(out_dir.join("summary.csv"), csv)
        .map_err(|e| Error::Domain(format!("cannot write summary: {e}")))?;

    for st in &record.stages {
        println!("{} {}", if st.ok { "ok  " } else { "FAIL" }, st.stage);
    }
    println!("record: {}", record_path.display());

    match failed {
        None => Ok(ExitCode::SUCCESS),
        Some(e) => Ok(ExitCode::from(exit_for(&e))),
    }
}

fn cmd_verify(suite: &str, root_seed: u64, out: Option<&Path>) -> Result<ExitCode, Error> {
    let verdicts = verify::run_suite(suite, root_seed)?;
    for v in &verdicts {
        println!(
            "{} {}.{} {}",
            if v.ok { "pass" } else { "FAIL" },
            v.suite,
            v.check,
            serde_json::to_string(&v.details).unwrap_or_default()
        );
    }
    if let Some(path) = out {
        let record = serde_json::json!({
            "suite": suite,
            "seed": root_seed,
            "units": unit_notes(),
            "verdicts": verdicts,
        });
        std::fs::write(path, serde_json::to_string_pretty(&record).expect("serializes"))
            .map_err(|e| Error::Domain(format!("cannot write record: {e}")))?;
    }
    if verdicts.iter().all(|v| v.ok) {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}
