use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use halfrgs::belldiag::ErrorVector;
use halfrgs::chain::link_error_vector;
use halfrgs::lossmodel::{analytic_link_success, e2e_generation_success, mc_link_success, transmissivity, LossParams};
use halfrgs::oracle::{exchanged_label, golden_cases, validate};
use halfrgs::purify::{purify, success_prob, PurifyOutcome, Stabilizer};
use halfrgs::schedule::{self, evaluate, pump_baseline, resource_report};
use halfrgs::sweep::{load_schedule, rate_ratio_sensitivity, rate_ratios, run_sweep, write_csv, RunConfig};
use halfrgs::timing::{times_baseline, times_optimistic, times_raw};
use halfrgs::Error;

const EXIT_CONFIG: u8 = 3;
const EXIT_UNKNOWN_PRESET: u8 = 4;
const EXIT_SCHEDULE: u8 = 5;
const EXIT_OUTPUT: u8 = 6;
const EXIT_ORACLE: u8 = 7;

#[derive(Parser)]
#[command(name = "halfrgs", version, about = "Purification-enhanced half-RGS repeater chain simulator")]
struct Cli {
    /// JSON run configuration; unset fields take their defaults.
    #[arg(long, global = true, env = "HALFRGS_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate scenarios over a parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Density-matrix checks of the analytic maps.
    Oracle {
        #[command(subcommand)]
        command: OracleCommand,
    },
    /// Photon-loss estimates.
    Loss {
        #[command(subcommand)]
        command: LossCommand,
    },
    /// Evaluate a purification schedule.
    Schedule {
        #[command(subcommand)]
        command: ScheduleCommand,
    },
    /// Print scenario times.
    Timing {
        #[command(subcommand)]
        command: TimingCommand,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Output CSV path; defaults to the config's `output`, else stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Swept parameter name.
    #[arg(long)]
    param: Option<String>,
    #[arg(long)]
    start: Option<f64>,
    #[arg(long)]
    stop: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// Comma-separated scenarios: raw, baseline, fig5, custom:<path>.
    #[arg(long, value_delimiter = ',')]
    scenarios: Option<Vec<String>>,
    #[arg(long)]
    baseline_rounds: Option<u32>,
    /// Print the fig5-to-baseline rate ratio per grid point to stderr.
    #[arg(long)]
    ratios: bool,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Compare the analytic maps with the oracle and write golden fixtures.
    Validate {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "purify_golden.json")]
        fixtures: PathBuf,
        /// Random cases per stabilizer added to the fixtures.
        #[arg(long, default_value_t = 4)]
        fixture_cases: usize,
        /// Check an analytic layer with the ZX and XZ output maps exchanged.
        #[arg(long, hide = true)]
        tamper: bool,
    },
}

#[derive(Subcommand)]
enum LossCommand {
    /// Monte Carlo link generation success.
    Mc(LossArgs),
}

#[derive(Args)]
struct LossArgs {
    /// Photon survival probability; overrides length and attenuation.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    length_km: Option<f64>,
    #[arg(long)]
    db_per_km: Option<f64>,
    /// Tree branching vector, e.g. 16,14,1.
    #[arg(long, value_delimiter = ',')]
    branching: Option<Vec<u32>>,
    #[arg(long)]
    arms: Option<u32>,
    #[arg(long)]
    bsm_intrinsic: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// Hops for the end-to-end figure; defaults to the chain's.
    #[arg(long)]
    hops: Option<u32>,
}

#[derive(Subcommand)]
enum ScheduleCommand {
    /// Evaluate a preset or schedule file on the configured link.
    Eval(ScheduleArgs),
}

#[derive(Args)]
struct ScheduleArgs {
    /// One of fig5, raw, baseline_pump.
    #[arg(long, conflicts_with = "file")]
    preset: Option<String>,
    /// JSON schedule file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Link vector w,x,y,z instead of the chain model.
    #[arg(long, value_delimiter = ',')]
    link: Option<Vec<f64>>,
    #[arg(long)]
    p_depol: Option<f64>,
    /// Pump the raw end-to-end pair to this fidelity instead.
    #[arg(long, conflicts_with_all = ["preset", "file"])]
    pump_target: Option<f64>,
    #[arg(long, default_value_t = 16)]
    max_rounds: u32,
}

#[derive(Subcommand)]
enum TimingCommand {
    /// Scenario times under the configured timing parameters.
    Show {
        /// Also print the rate-ratio range for several tau_half and
        /// pumping-round settings.
        #[arg(long)]
        sensitivity: bool,
    },
}

enum Failure {
    Lib(Error),
    Output(PathBuf, io::Error),
    Oracle,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(Error::UnknownPreset(_)) => EXIT_UNKNOWN_PRESET,
            Failure::Lib(Error::Schedule(_)) => EXIT_SCHEDULE,
            Failure::Lib(_) => EXIT_CONFIG,
            Failure::Output(..) => EXIT_OUTPUT,
            Failure::Oracle => EXIT_ORACLE,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Output(path, e) => format!("cannot write {}: {e}", path.display()),
            Failure::Oracle => "analytic maps disagree with the oracle".into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::from_path(p),
        None => Ok(RunConfig::default()),
    }
}

fn write_output(path: &Path, bytes: &[u8]) -> Outcome {
    fs::write(path, bytes).map_err(|e| Failure::Output(path.to_path_buf(), e))
}

fn print_json(value: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
}

fn sweep(mut config: RunConfig, args: SweepArgs) -> Outcome {
    if let Some(p) = args.param {
        config.sweep.param = p;
    }
    if let Some(v) = args.start {
        config.sweep.start = v;
    }
    if let Some(v) = args.stop {
        config.sweep.stop = v;
    }
    if let Some(v) = args.points {
        config.sweep.points = v;
    }
    if let Some(s) = args.scenarios {
        config.scenarios = s;
    }
    if let Some(r) = args.baseline_rounds {
        config.baseline_rounds = r;
    }
    if let Some(o) = args.output {
        config.output = Some(o);
    }
    config.validate()?;
    let rows = run_sweep(&config)?;
    if args.ratios {
        for (value, ratio) in rate_ratios(&rows, "fig5", "baseline") {
            eprintln!("{}={value}: fig5/baseline rate ratio {ratio:.2}", config.sweep.param);
        }
    }
    let mut buf = Vec::new();
    write_csv(&config, &rows, &mut buf).expect("writing to memory");
    match &config.output {
        Some(path) => write_output(path, &buf),
        None => io::stdout()
            .write_all(&buf)
            .map_err(|e| Failure::Output(PathBuf::from("<stdout>"), e)),
    }
}

fn tampered(stab: Stabilizer, e1: &ErrorVector, e2: &ErrorVector) -> PurifyOutcome {
    let mut out = purify(exchanged_label(stab), e1, e2);
    out.p_success = success_prob(stab, e1, e2);
    out
}

fn oracle_validate(samples: usize, seed: u64, fixtures: &Path, fixture_cases: usize, tamper: bool) -> Outcome {
    let analytic = if tamper { tampered } else { purify };
    let report = validate(analytic, samples, seed);
    print!("{}", report.table());
    for row in &report.rows {
        let ok = row.self_consistent && row.success_matches == Some(row.stab);
        if ok && row.exchanged_consistent {
            println!("{}: self-consistent under either labelling", row.stab);
        } else if ok {
            println!(
                "{}: self-consistent; the {} output map sums to a different success probability, so the oracle fixes this pairing",
                row.stab,
                exchanged_label(row.stab)
            );
        }
    }
    let cases = golden_cases(fixture_cases, seed);
    let mut text = serde_json::to_string_pretty(&cases).expect("serializable");
    text.push('\n');
    write_output(fixtures, text.as_bytes())?;
    println!("wrote {} golden cases to {}", cases.len(), fixtures.display());
    if report.passed {
        println!("PASS: analytic maps match the oracle within {:e}", report.tolerance);
        Ok(())
    } else {
        Err(Failure::Oracle)
    }
}

fn loss_mc(config: &RunConfig, args: LossArgs) -> Outcome {
    let chain = &config.chain;
    let eta = match args.eta {
        Some(eta) => eta,
        None => transmissivity(
            args.length_km.unwrap_or(chain.hop_length_km),
            args.db_per_km.unwrap_or(chain.loss_db_per_km),
        )?,
    };
    let params = LossParams {
        eta,
        branching: args.branching.unwrap_or_else(|| chain.branching.clone()),
        m_arms: args.arms.unwrap_or(chain.m_arms),
        bsm_intrinsic: args.bsm_intrinsic.unwrap_or(chain.bsm_intrinsic),
        samples: args.samples,
        seed: args.seed.unwrap_or(config.seed),
    };
    let est = mc_link_success(&params)?;
    let (half_cf, link_cf) = analytic_link_success(&params)?;
    let hops = args.hops.unwrap_or(chain.hops);
    println!(
        "eta {eta:.6}, arms {}, branching {:?}, bsm_intrinsic {}, samples {}, seed {}",
        params.m_arms, params.branching, params.bsm_intrinsic, params.samples, params.seed
    );
    println!("link success:     {:.6} ± {:.2e} (closed form {link_cf:.6})", est.link.mean, est.link.stderr);
    println!("half-RGS success: {:.6} ± {:.2e} (closed form {half_cf:.6})", est.half_rgs.mean, est.half_rgs.stderr);
    println!(
        "end-to-end over {hops} hops: {:.6}",
        e2e_generation_success(est.link.mean, hops)?
    );
    if let Some(w) = &est.warning {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn schedule_eval(mut config: RunConfig, args: ScheduleArgs) -> Outcome {
    if let Some(p) = args.p_depol {
        config.chain.p_depol = p;
    }
    config.chain.validate()?;
    let hops = config.chain.hops as usize;
    let link = match &args.link {
        Some(v) => match v.as_slice() {
            [w, x, y, z] => ErrorVector::new(*w, *x, *y, *z)?,
            _ => return Err(Error::Config(format!("--link takes 4 weights, got {}", v.len())).into()),
        },
        None => link_error_vector(&config.chain)?,
    };
    if let Some(target) = args.pump_target {
        let e2e = halfrgs::belldiag::compose_power(&link, config.chain.hops);
        print_json(serde_json::to_value(pump_baseline(&e2e, target, args.max_rounds)?).expect("serializable"));
        return Ok(());
    }
    let expr = match (&args.preset, &args.file) {
        (_, Some(path)) => load_schedule(path, hops)?,
        (Some(name), None) => schedule::preset(name, hops)?,
        (None, None) => schedule::preset("fig5", hops)?,
    };
    let result = evaluate(&expr, &link, hops)?;
    let resources = resource_report(&expr, hops)?;
    print_json(serde_json::json!({
        "link": link,
        "result": result,
        "resources": resources,
    }));
    Ok(())
}

fn timing_show(config: &RunConfig, sensitivity: bool) -> Outcome {
    let t = &config.timing;
    t.validate()?;
    print_json(serde_json::json!({
        "params": t,
        "raw": times_raw(t),
        "baseline": times_baseline(t),
        "optimistic": times_optimistic(t),
    }));
    if sensitivity {
        let rows = rate_ratio_sensitivity(config, &[1e-7, 1e-6, 1e-5], &[1, 2, 3, 4])?;
        println!("{:>10} {:>7} {:>10} {:>10}", "tau_half", "rounds", "min ratio", "max ratio");
        for r in rows {
            println!(
                "{:>10.1e} {:>7} {:>10.2} {:>10.2}",
                r.tau_half, r.baseline_rounds, r.min_ratio, r.max_ratio
            );
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Sweep(args) => sweep(config, args),
        Command::Oracle {
            command:
                OracleCommand::Validate {
                    samples,
                    seed,
                    fixtures,
                    fixture_cases,
                    tamper,
                },
        } => oracle_validate(samples, seed, &fixtures, fixture_cases, tamper),
        Command::Loss {
            command: LossCommand::Mc(args),
        } => loss_mc(&config, args),
        Command::Schedule {
            command: ScheduleCommand::Eval(args),
        } => schedule_eval(config, args),
        Command::Timing {
            command: TimingCommand::Show { sensitivity },
        } => timing_show(&config, sensitivity),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
