//! Command-line surface: `simulate`, `train`, `distill`, `export`, `bench`,
//! `sweep`, `probe`, `theory`. Exit codes: 0 success, 1 validation error,
//! 2 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{DcqcnConfig, SwiftConfig};
use crate::bench::{
    ablation_csv, drops_table, latency_ablation, parameter_sweep, probe_policy, run_scenario,
    report_from_engine, sweep_csv, theory_vs_practice, ControllerSetup, DropsRow, EcnParams,
    DEFAULT_CONGESTED_DELTA,
};
use crate::config::{reward_params_from, ControllerChoice, IniDoc, LabConfig};
use crate::error::{Error, Result};
use crate::gbt::{collect_traces, export_tree_source, fidelity_report, fit_gbt, TreeEnsemble};
use crate::policy::{ActionMapper, PolicyCheckpoint, PolicyModel, RewardParams};
use crate::sim::{ScenarioKind, ScenarioSpec};
use crate::train::{evaluate_policy, train};

#[derive(Parser, Debug)]
#[command(name = "rlcc-lab", about = "Congestion-control laboratory", disable_version_flag = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// INI config file ([sim], [scenario], [controller], [train], [distill]).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides [sim] seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV and summary outputs.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Overrides the configured controller kind
    /// (dcqcn|swift|rlcc-mlp|rlcc-tree|fixed|oracle).
    #[arg(long)]
    controller: Option<String>,
    /// Overrides [sim] decision_latency_us.
    #[arg(long)]
    decision_latency_us: Option<f64>,
    /// Policy checkpoint for rlcc-mlp / rlcc-tree.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Ensemble description for rlcc-tree.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Rate for the fixed controller, Gbps.
    #[arg(long)]
    rate_gbps: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct ScenarioArgs {
    /// many_to_one | all_to_all | long_short.
    #[arg(long)]
    scenario: Option<String>,
    /// Total flows for many_to_one (one flow per host).
    #[arg(long)]
    flows: Option<usize>,
    #[arg(long)]
    hosts: Option<usize>,
    #[arg(long)]
    flows_per_host: Option<usize>,
    #[arg(long)]
    n_long: Option<usize>,
    #[arg(long)]
    n_short: Option<usize>,
    #[arg(long)]
    short_bytes: Option<u64>,
    #[arg(long)]
    duration_us: Option<f64>,
    #[arg(long)]
    warmup_us: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write the per-flow trace CSV.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Train the MLP policy over the configured curriculum.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Checkpoint output path.
        #[arg(long)]
        out: PathBuf,
        /// Training log CSV (defaults to <out>.log.csv).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Distill a trained policy into a boosted tree ensemble.
    Distill {
        #[command(flatten)]
        common: CommonArgs,
        /// Teacher checkpoint.
        #[arg(long)]
        teacher: PathBuf,
        /// Ensemble description output path.
        #[arg(long)]
        out: PathBuf,
        /// Minimum number of distinct decisions to collect.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Export an ensemble as if-else pseudocode.
    Export {
        /// Ensemble description file.
        #[arg(long)]
        ensemble: PathBuf,
        /// Pseudocode output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional re-emitted description path.
        #[arg(long)]
        desc: Option<PathBuf>,
    },
    /// Run a benchmark and write the metrics report.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also run the decision-latency ablation on this scenario.
        #[arg(long)]
        ablation: bool,
        /// Compare drops across dcqcn, swift, and the selected controller.
        #[arg(long)]
        drops: bool,
    },
    /// Train/evaluate a (target, beta) grid and report the trade-off table.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated target values.
        #[arg(long)]
        targets: Option<String>,
        /// Comma-separated beta values.
        #[arg(long)]
        betas: Option<String>,
    },
    /// Probe a policy with synthetic condition pairs; prints the 3x3 table.
    Probe {
        #[command(flatten)]
        common: CommonArgs,
        /// Policy checkpoint or ensemble description.
        #[arg(long)]
        probe_model: PathBuf,
        /// Delta magnitude used for the congested condition.
        #[arg(long, default_value_t = DEFAULT_CONGESTED_DELTA)]
        congested_delta: f64,
    },
    /// Theory-vs-practice inflation table for a trained policy.
    Theory {
        #[command(flatten)]
        common: CommonArgs,
        /// Policy checkpoint.
        #[arg(long)]
        policy: PathBuf,
        /// Comma-separated flow counts, e.g. 2,4,8,16.
        #[arg(long, default_value = "2,4,8,16,32,64,128")]
        n: String,
    },
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Usage/help text; help requests are not errors.
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if is_help { 0 } else { 1 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, scenario } => cmd_simulate(&common, &scenario),
        Command::Train { common, out, log } => cmd_train(&common, &out, log.as_deref()),
        Command::Distill { common, teacher, out, samples } => {
            cmd_distill(&common, &teacher, &out, samples)
        }
        Command::Export { ensemble, out, desc } => cmd_export(&ensemble, &out, desc.as_deref()),
        Command::Bench { common, scenario, ablation, drops } => {
            cmd_bench(&common, &scenario, ablation, drops)
        }
        Command::Sweep { common, targets, betas } => {
            cmd_sweep(&common, targets.as_deref(), betas.as_deref())
        }
        Command::Probe { common, probe_model, congested_delta } => {
            cmd_probe(&common, &probe_model, congested_delta)
        }
        Command::Theory { common, policy, n } => cmd_theory(&common, &policy, &n),
    }
}

fn load_lab(common: &CommonArgs) -> Result<LabConfig> {
    let mut lab = match &common.config {
        Some(path) => LabConfig::load(path)?,
        None => LabConfig::default(),
    };
    if let Some(seed) = common.seed {
        lab.sim.seed = seed;
    }
    if let Some(latency) = common.decision_latency_us {
        lab.sim.decision_latency_us = latency;
    }
    lab.sim.validate()?;
    Ok(lab)
}

fn apply_scenario_args(spec: &mut ScenarioSpec, args: &ScenarioArgs) -> Result<()> {
    if let Some(kind) = &args.scenario {
        let kind = ScenarioKind::parse(kind)?;
        let duration = args.duration_us.unwrap_or(spec.duration_us);
        let warmup = args.warmup_us.unwrap_or(spec.warmup_us);
        *spec = match kind {
            ScenarioKind::ManyToOne => ScenarioSpec::many_to_one(8, 1),
            ScenarioKind::AllToAll => ScenarioSpec::all_to_all(8, 1),
            ScenarioKind::LongShort => {
                ScenarioSpec::long_short(4, 100, crate::sim::DEFAULT_SHORT_BYTES)
            }
        }
        .with_horizon(duration, warmup);
    }
    if let Some(flows) = args.flows {
        if spec.kind != ScenarioKind::ManyToOne {
            return Err(Error::validation("--flows applies to many_to_one only"));
        }
        spec.hosts = flows;
        spec.flows_per_host = 1;
    }
    if let Some(hosts) = args.hosts {
        spec.hosts = hosts;
    }
    if let Some(fph) = args.flows_per_host {
        spec.flows_per_host = fph;
    }
    if let Some(v) = args.n_long {
        spec.n_long = v;
    }
    if let Some(v) = args.n_short {
        spec.n_short = v;
    }
    if let Some(v) = args.short_bytes {
        spec.short_bytes = v;
    }
    if let Some(v) = args.duration_us {
        spec.duration_us = v;
        spec.warmup_us = spec.warmup_us.min(0.5 * v);
    }
    if let Some(v) = args.warmup_us {
        spec.warmup_us = v;
    }
    spec.validate()
}

/// Reads a model file, dispatching on its first line.
fn load_any_model(path: &Path) -> Result<(PolicyModel, ActionMapper, usize)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::parse("model", format!("{}: {e}", path.display())))?;
    let first = text.lines().next().unwrap_or_default();
    if first.starts_with("rlcc-policy") {
        let ckpt = PolicyCheckpoint::from_text(&text)?;
        Ok((PolicyModel::Mlp(ckpt.mlp), ckpt.mapper, ckpt.window_len))
    } else if first.starts_with("rlcc-ensemble") {
        let ens = TreeEnsemble::from_description_text(&text)?;
        let window = ens.input_dim() / 2;
        Ok((PolicyModel::Tree(ens), ActionMapper::default(), window))
    } else {
        Err(Error::parse("model", format!("unrecognized model file {}", path.display())))
    }
}

fn resolve_controller(lab: &LabConfig, common: &CommonArgs) -> Result<ControllerSetup> {
    let choice = match common.controller.as_deref() {
        None => lab.controller.clone(),
        Some("dcqcn") => ControllerChoice::Dcqcn {
            dcqcn: DcqcnConfig::default(),
            ecn: EcnParams::default(),
        },
        Some("swift") => ControllerChoice::Swift(SwiftConfig::default()),
        Some("rlcc-mlp") => ControllerChoice::RlccMlp {
            checkpoint: None,
            params: RewardParams::default(),
        },
        Some("rlcc-tree") => ControllerChoice::RlccTree {
            model: None,
            checkpoint: None,
            params: RewardParams::default(),
        },
        Some("fixed") => ControllerChoice::Fixed(
            common
                .rate_gbps
                .ok_or_else(|| Error::validation("fixed controller needs --rate-gbps"))?,
        ),
        Some("oracle") => ControllerChoice::Oracle(RewardParams::default()),
        Some(other) => {
            return Err(Error::validation(format!("unknown controller {other:?}")))
        }
    };

    let ckpt_path = |configured: &Option<String>| -> Option<PathBuf> {
        common
            .checkpoint
            .clone()
            .or_else(|| configured.as_ref().map(PathBuf::from))
    };

    match choice {
        ControllerChoice::Dcqcn { dcqcn, ecn } => Ok(ControllerSetup::Dcqcn { dcqcn, ecn }),
        ControllerChoice::Swift(s) => Ok(ControllerSetup::Swift(s)),
        ControllerChoice::Fixed(rate) => Ok(ControllerSetup::FixedRate(rate)),
        ControllerChoice::Oracle(params) => Ok(ControllerSetup::FixedPoint(params)),
        ControllerChoice::RlccMlp { checkpoint, params } => {
            let path = ckpt_path(&checkpoint)
                .ok_or_else(|| Error::validation("rlcc-mlp needs --checkpoint"))?;
            Ok(ControllerSetup::rlcc_mlp(PolicyCheckpoint::load(path)?, params))
        }
        ControllerChoice::RlccTree { model, checkpoint, params } => {
            let model_path = common
                .model
                .clone()
                .or_else(|| model.as_ref().map(PathBuf::from))
                .ok_or_else(|| Error::validation("rlcc-tree needs --model"))?;
            let ensemble = TreeEnsemble::load(&model_path)?;
            let teacher = match ckpt_path(&checkpoint) {
                Some(p) => PolicyCheckpoint::load(p)?,
                None => PolicyCheckpoint {
                    window_len: ensemble.input_dim() / 2,
                    mlp: crate::policy::MlpPolicy::zeros(ensemble.input_dim(), 1),
                    mapper: ActionMapper::default(),
                },
            };
            Ok(ControllerSetup::rlcc_tree(ensemble, &teacher, params))
        }
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

fn cmd_simulate(common: &CommonArgs, scenario: &ScenarioArgs) -> Result<()> {
    let mut lab = load_lab(common)?;
    apply_scenario_args(&mut lab.scenario, scenario)?;
    let setup = resolve_controller(&lab, common)?;
    let engine = run_scenario(&lab.scenario, &setup, &lab.sim)?;
    let report = report_from_engine(&engine, &lab.scenario)?;
    let trace_path = write_out(&common.out_dir, "trace.csv", &engine.trace().to_csv())?;
    let summary = format!(
        "scenario {}\ncontroller {}\nseed {}\n{}\nconservation_error {:.3e}\n",
        lab.scenario.label(),
        setup.name(),
        lab.sim.seed,
        report.csv_row(&lab.scenario.label(), setup.name()),
        engine.max_conservation_error(),
    );
    write_out(&common.out_dir, "summary.txt", &summary)?;
    println!("wrote {}", trace_path.display());
    print!("{summary}");
    Ok(())
}

fn cmd_train(common: &CommonArgs, out: &Path, log: Option<&Path>) -> Result<()> {
    let lab = load_lab(common)?;
    let mut tc = lab.train.clone();
    if let Some(seed) = common.seed {
        tc.seed = seed;
    }
    let outcome = train(&tc, &lab.sim)?;
    outcome.policy.save(out)?;
    let log_path = log
        .map(Path::to_path_buf)
        .unwrap_or_else(|| out.with_extension("log.csv"));
    fs::write(&log_path, outcome.log_csv())?;
    let eval = evaluate_policy(&outcome.policy, tc.params, &tc.eval_scenario, &lab.sim)?;
    println!(
        "trained {} epochs, stop={:?}, best eval mean|delta|={:.5}",
        outcome.log.len(),
        outcome.stop,
        outcome.best_eval_mean_abs_delta
    );
    println!(
        "eval: mean|delta|={:.5} goodput={:.4} inflation={:.4} drops={:.3}",
        eval.mean_abs_delta, eval.goodput, eval.mean_inflation, eval.drops_per_flow
    );
    println!("wrote {} and {}", out.display(), log_path.display());
    Ok(())
}

/// Distillation scenario suite: the training curriculum plus flow counts the
/// teacher never saw.
fn distill_scenarios(episode_us: f64) -> Vec<ScenarioSpec> {
    let mut specs = crate::train::default_curriculum(episode_us);
    specs.push(ScenarioSpec::many_to_one(128, 1).with_horizon(episode_us, 0.0));
    specs.push(ScenarioSpec::many_to_one(24, 1).with_horizon(episode_us, 0.0));
    specs
}

fn cmd_distill(
    common: &CommonArgs,
    teacher_path: &Path,
    out: &Path,
    samples: Option<usize>,
) -> Result<()> {
    let lab = load_lab(common)?;
    let teacher = PolicyCheckpoint::load(teacher_path)?;
    let params = lab.train.params;
    let n_samples = samples.unwrap_or(lab.distill_samples);
    let scenarios = distill_scenarios(lab.train.episode_us);
    let data = collect_traces(&teacher, params, &scenarios, &lab.sim, n_samples)?;
    let ensemble = fit_gbt(&data, &lab.fit)?;
    ensemble.save(out)?;
    let fidelity_specs = vec![
        ScenarioSpec::many_to_one(64, 1),
        ScenarioSpec::many_to_one(512, 1),
    ];
    let report = fidelity_report(&teacher, &ensemble, &data, &fidelity_specs, &lab.sim, params)?;
    println!(
        "collected {} samples ({} train / {} held-out)",
        data.len(),
        data.train_indices().len(),
        data.heldout_indices().len()
    );
    println!(
        "ensemble: {} trees, max depth {}, op_count {} (budget {})",
        ensemble.trees.len(),
        ensemble.max_depth(),
        ensemble.op_count,
        crate::gbt::OP_BUDGET
    );
    print!("{}", report.summary());
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_export(ensemble_path: &Path, out: &Path, desc: Option<&Path>) -> Result<()> {
    let ensemble = TreeEnsemble::load(ensemble_path)?;
    let source = export_tree_source(&ensemble);
    fs::write(out, &source.pseudocode)?;
    if let Some(desc_path) = desc {
        fs::write(desc_path, &source.description)?;
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_bench(
    common: &CommonArgs,
    scenario: &ScenarioArgs,
    ablation: bool,
    drops: bool,
) -> Result<()> {
    let mut lab = load_lab(common)?;
    apply_scenario_args(&mut lab.scenario, scenario)?;
    let setup = resolve_controller(&lab, common)?;
    let report = crate::bench::run_benchmark(&lab.scenario, &setup, &lab.sim)?;
    let mut csv = String::from(crate::bench::METRICS_CSV_HEADER);
    csv.push('\n');
    csv.push_str(&report.csv_row(&lab.scenario.label(), setup.name()));
    csv.push('\n');
    let path = write_out(&common.out_dir, "metrics.csv", &csv)?;
    println!("wrote {}", path.display());
    print!("{csv}");

    if ablation {
        let models = vec![(setup.name(), setup.clone())];
        let rows = latency_ablation(
            &models,
            &crate::bench::ABLATION_LATENCIES_US,
            std::slice::from_ref(&lab.scenario),
            &lab.sim,
        )?;
        let path = write_out(&common.out_dir, "ablation.csv", &ablation_csv(&rows))?;
        println!("wrote {}", path.display());
    }
    if drops {
        let controllers = vec![
            (
                "dcqcn",
                ControllerSetup::Dcqcn { dcqcn: DcqcnConfig::default(), ecn: EcnParams::default() },
            ),
            ("swift", ControllerSetup::Swift(SwiftConfig::default())),
            (setup.name(), setup.clone()),
        ];
        let rows: Vec<DropsRow> =
            drops_table(&controllers, std::slice::from_ref(&lab.scenario), &lab.sim)?;
        let path = write_out(&common.out_dir, "drops.csv", &crate::bench::drops_csv(&rows))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn parse_f64_list(raw: &str, what: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation(format!("bad {what} value {tok:?}")))
        })
        .collect()
}

fn cmd_sweep(common: &CommonArgs, targets: Option<&str>, betas: Option<&str>) -> Result<()> {
    let lab = load_lab(common)?;
    let doc = match &common.config {
        Some(path) => IniDoc::load(path)?,
        None => IniDoc::default(),
    };
    let targets = match targets.or_else(|| doc.get("sweep", "targets")) {
        Some(raw) => parse_f64_list(raw, "target")?,
        None => vec![0.032, 0.064, 0.128],
    };
    let betas = match betas.or_else(|| doc.get("sweep", "betas")) {
        Some(raw) => parse_f64_list(raw, "beta")?,
        None => vec![1.0, 1.5, 2.0],
    };
    let _ = reward_params_from(&doc, "train")?;
    let eval_spec = lab.train.eval_scenario.clone();
    let points = parameter_sweep(&targets, &betas, &lab.train, &eval_spec, &lab.sim)?;
    let path = write_out(&common.out_dir, "sweep.csv", &sweep_csv(&points))?;
    println!("wrote {}", path.display());
    for p in &points {
        println!(
            "target={:.4} beta={:.2} goodput={:.4} latency={:.2}us{}",
            p.target,
            p.beta,
            p.goodput,
            p.mean_latency_us,
            if p.failed { " FAILED" } else { "" }
        );
    }
    Ok(())
}

fn cmd_probe(common: &CommonArgs, model_path: &Path, congested_delta: f64) -> Result<()> {
    let lab = load_lab(common)?;
    let (model, mapper, window_len) = load_any_model(model_path)?;
    let params = lab.train.params;
    let table = probe_policy(&model, &mapper, &params, window_len, congested_delta);
    let path = write_out(&common.out_dir, "probe.csv", &table.to_csv())?;
    println!("wrote {}", path.display());
    print!("{}", table.to_csv());
    let mut all_ok = true;
    for check in table.sign_pattern_checks() {
        println!("{} {}", if check.passed { "PASS" } else { "FAIL" }, check.label);
        all_ok &= check.passed;
    }
    println!("sign pattern: {}", if all_ok { "PASS" } else { "FAIL" });
    Ok(())
}

fn cmd_theory(common: &CommonArgs, policy: &Path, n_list: &str) -> Result<()> {
    let lab = load_lab(common)?;
    let ckpt = PolicyCheckpoint::load(policy)?;
    let params = lab.train.params;
    let flow_counts: Vec<usize> = n_list
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .map_err(|_| Error::validation(format!("bad flow count {tok:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let setup = ControllerSetup::rlcc_mlp(ckpt, params);
    let swift = ControllerSetup::Swift(SwiftConfig::default());
    let table = theory_vs_practice(&setup, &swift, &params, &flow_counts, &lab.scenario, &lab.sim)?;
    let path = write_out(&common.out_dir, "theory.csv", &table.to_csv())?;
    println!("wrote {}", path.display());
    print!("{}", table.to_csv());
    println!(
        "max relative error {:.4}, monotone={}, swift fit c={:.4} b={:.4}",
        table.max_relative_error(),
        table.measured_is_monotone(),
        table.swift_fit.0,
        table.swift_fit.1
    );
    Ok(())
}
