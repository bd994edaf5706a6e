//! `wimwc`: multivariate information measures and secret-key bounds for
//! discrete wiretap multi-way channels.
//!
//! Tables print with 6 decimal places; `--json`/`--csv` emit full
//! precision. Every subcommand is deterministic for a fixed `--seed`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wimwc_core::dbbound::{dependence_balance_sides, simulate_code, ChannelSet, Conditioning};
use wimwc_core::fileio::{
    self, channel_from_json, code_from_json, dist_from_json, lambda_preset, lambda_to_json,
    system_from_json, ChannelJson, CodeJson, DistJson, SystemJson,
};
use wimwc_core::fracpart::{optimize_linear, Sense};
use wimwc_core::keybound::{secret_key_bound, AuxReceiver, OptimizerConfig};
use wimwc_core::lambda_mi::{i_lambda, Group};
use wimwc_core::macregion::{outer_region, GenFeedbackMAC, RegionOptions};
use wimwc_core::{Channel, Error, ErrorKind, FractionalPartition, JointDist};

const SCHEMA_HELP: &str = "\
FILE FORMATS (JSON)

  distribution   {\"vars\": [{\"name\": \"X1\", \"card\": 2}, ...],
                  \"probs\": <arrays nested in variable order, first
                  variable outermost>}

  channel        {\"in_vars\": [...], \"out_vars\": [...],
                  \"probs\": <nested over inputs then outputs>}
                 Wiretap channels use inputs X1..Xk and outputs Y1..Yk, Z;
                 feedback MACs use inputs X1, X2 and outputs Y, YF1, YF2.

  weighting      {\"k\": 3, \"weights\": [{\"subset\": [1, 2], \"w\": 0.5},
                  ...]} with 1-based element indices. On the command line,
                 presets `uniform-km1` and `partition:1,2|3` also work.

  code spec      {\"k\", \"n\", \"w_cards\", \"encoders\", \"schedule\"}
                 where encoders[i][j] is the flat lookup table of terminal
                 i at step j (rows: private randomness slowest, then the
                 terminal's past outputs) and schedule entries are 0 for
                 the main channel or the 1-based parallel index.

  system spec    {\"k\", \"r\", \"main\": <channel>,
                  \"parallels\": [{\"channel\": <channel>, \"alpha\": 1.0}]}

Loaders renormalize probability mass errors up to 1e-6 and reject worse.
Exit codes: 0 success, 1 property violation, 2 invalid input, 3 numerical
failure or size-cap overflow.";

#[derive(Parser)]
#[command(name = "wimwc", version, about, after_long_help = SCHEMA_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Convergence tolerance for iterative searches.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol: f64,

    /// Master seed for every randomized search and suite.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Multi-start count for heuristic searches.
    #[arg(long, global = true, default_value_t = 8)]
    restarts: usize,

    /// Per-block ascent iteration cap.
    #[arg(long, global = true, default_value_t = 300)]
    max_iters: usize,

    /// Exhaustive mode: grid points per axis (spacing 1/(grid-1)).
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Auxiliary alphabet caps for U and V (default: |X_[k]| + 1).
    #[arg(long = "aux-card-u", global = true)]
    aux_card_u: Option<usize>,
    #[arg(long = "aux-card-v", global = true)]
    aux_card_v: Option<usize>,

    /// Auxiliary receiver: `z` (copy the eavesdropper output) or a path to
    /// a channel file consuming (X1..Xk, Y1..Yk, Z) and emitting T.
    #[arg(long = "t-receiver", global = true, default_value = "z")]
    t_receiver: String,

    /// Time-sharing alphabet sizes for the MAC region solver.
    #[arg(long = "card-t1", global = true, default_value_t = 2)]
    card_t1: usize,
    #[arg(long = "card-t2", global = true, default_value_t = 2)]
    card_t2: usize,

    /// Drop the second balance constraint in MAC computations.
    #[arg(long = "drop-6b", global = true)]
    drop_6b: bool,

    /// Write machine-readable output here.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the multivariate mutual information of a distribution.
    Ilambda {
        /// Distribution file.
        #[arg(long)]
        dist: PathBuf,
        /// Terminal groups, e.g. "X1,Y1|X2,Y2" (default: one per variable).
        #[arg(long)]
        groups: Option<String>,
        /// Conditioning variables, comma separated.
        #[arg(long)]
        cond: Option<String>,
        /// Weighting: preset (`uniform-km1`, `partition:1,2|3`) or file.
        #[arg(long, default_value = "uniform-km1")]
        lambda: String,
    },
    /// Find the weighting minimizing the multivariate mutual information.
    TightestLambda {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        groups: Option<String>,
        #[arg(long)]
        cond: Option<String>,
    },
    /// Simulate an interactive code and evaluate the dependence-balance
    /// inequality on both conditionings.
    Dbcheck {
        /// Code spec file.
        #[arg(long)]
        code: PathBuf,
        /// Main wiretap channel file.
        #[arg(long)]
        main: PathBuf,
        /// Parallel channel files, in schedule order.
        #[arg(long)]
        parallel: Vec<PathBuf>,
        #[arg(long, default_value = "uniform-km1")]
        lambda: String,
    },
    /// Evaluate the secret-key capacity upper bound of a system.
    Keybound {
        /// System spec file.
        #[arg(long)]
        system: PathBuf,
        #[arg(long, default_value = "uniform-km1")]
        lambda: String,
    },
    /// Compute the outer rate region of a two-user feedback MAC.
    Macregion {
        /// Feedback MAC channel file (inputs X1, X2; outputs Y, YF1, YF2).
        #[arg(long)]
        mac: PathBuf,
    },
    /// Run the full property suite; exits nonzero on any violation.
    Props {
        /// Scale factor for randomized case counts (1.0 = full scale).
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            match e.kind() {
                ErrorKind::Input => ExitCode::from(2),
                ErrorKind::Size | ErrorKind::Numerical => ExitCode::from(3),
            }
        }
    }
}

fn optimizer_config(cli: &Cli) -> OptimizerConfig {
    OptimizerConfig {
        restarts: cli.restarts,
        master_seed: cli.seed,
        tol: cli.tol,
        max_iters: cli.max_iters,
        grid_res: cli.grid,
        card_u: cli.aux_card_u,
        card_v: cli.aux_card_v,
        card_t1: cli.card_t1,
        card_t2: cli.card_t2,
        ..OptimizerConfig::default()
    }
}

fn parse_groups(spec: &Option<String>, d: &JointDist) -> Result<Vec<Group>, Error> {
    match spec {
        None => Ok(d.vars().iter().map(|v| vec![v.name.clone()]).collect()),
        Some(s) => {
            let groups: Vec<Group> = s
                .split('|')
                .map(|g| g.split(',').map(|n| n.trim().to_string()).collect())
                .collect();
            if groups.iter().any(|g: &Group| g.iter().any(|n| n.is_empty())) {
                return Err(Error::InvalidInput(format!("malformed group spec `{}`", s)));
            }
            Ok(groups)
        }
    }
}

fn parse_cond(spec: &Option<String>) -> Vec<String> {
    match spec {
        None => vec![],
        Some(s) => s.split(',').map(|n| n.trim().to_string()).collect(),
    }
}

/// A weighting argument is either a preset name or a path to a file.
fn resolve_lambda(spec: &str, k: usize) -> Result<FractionalPartition, Error> {
    if Path::new(spec).is_file() {
        let j: fileio::LambdaJson = fileio::read_json(Path::new(spec))?;
        fileio::lambda_from_json(&j)
    } else {
        lambda_preset(spec, k)
    }
}

fn resolve_aux(cli: &Cli) -> Result<AuxReceiver<f64>, Error> {
    if cli.t_receiver == "z" {
        Ok(AuxReceiver::CopyEavesdropper)
    } else {
        let j: ChannelJson = fileio::read_json(Path::new(&cli.t_receiver))?;
        Ok(AuxReceiver::Explicit(channel_from_json(&j)?))
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    std::fs::write(path, bytes)
        .map_err(|e| Error::InvalidInput(format!("{}: {}", path.display(), e)))
}

fn write_json_value(path: &Path, value: &serde_json::Value) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.cmd {
        Cmd::Ilambda { dist, groups, cond, lambda } => {
            let j: DistJson = fileio::read_json(dist)?;
            let d: JointDist = dist_from_json(&j)?;
            let groups = parse_groups(groups, &d)?;
            let cond = parse_cond(cond);
            let fp = resolve_lambda(lambda, groups.len())?;
            let value = i_lambda(&d, &groups, &fp, &cond)?;
            println!("i_lambda = {:.6}", value);
            if let Some(path) = &cli.json {
                let out = serde_json::json!({
                    "value": value,
                    "lambda": lambda_to_json(&fp),
                });
                write_json_value(path, &out)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::TightestLambda { dist, groups, cond } => {
            let j: DistJson = fileio::read_json(dist)?;
            let d: JointDist = dist_from_json(&j)?;
            let groups = parse_groups(groups, &d)?;
            let cond = parse_cond(cond);
            let k = groups.len();
            // I_lambda is affine in the weights: minimizing it maximizes
            // the weighted sum of the conditional entropies
            let mut objective: BTreeMap<u32, f64> = BTreeMap::new();
            let full: u32 = (1 << k) - 1;
            let all: Vec<String> = groups.iter().flatten().cloned().collect();
            for mask in 1..full {
                let b: Vec<String> = groups
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .flat_map(|(_, g)| g.iter().cloned())
                    .collect();
                let mut rest: Vec<String> = groups
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) == 0)
                    .flat_map(|(_, g)| g.iter().cloned())
                    .collect();
                rest.extend(cond.iter().cloned());
                objective.insert(mask, d.cond_entropy(&b, &rest)?);
            }
            let (fp, best) = optimize_linear(k, &objective, Sense::Max)?;
            let h_all = d.cond_entropy(&all, &cond)?;
            let value = h_all - best;
            println!("tightest i_lambda = {:.6}", value);
            for (mask, w) in fp.weights() {
                let members: Vec<String> = (0..k)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| (i + 1).to_string())
                    .collect();
                println!("  lambda{{{}}} = {:.6}", members.join(","), w);
            }
            if let Some(path) = &cli.json {
                let out = serde_json::json!({
                    "value": value,
                    "lambda": lambda_to_json(&fp),
                });
                write_json_value(path, &out)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Dbcheck { code, main, parallel, lambda } => {
            let cj: CodeJson = fileio::read_json(code)?;
            let icode = code_from_json::<f64>(&cj)?;
            let mj: ChannelJson = fileio::read_json(main)?;
            let main_ch: Channel = channel_from_json(&mj)?;
            let mut parallels = Vec::new();
            for p in parallel {
                let pj: ChannelJson = fileio::read_json(p)?;
                parallels.push(channel_from_json(&pj)?);
            }
            let channels = ChannelSet::new(main_ch, parallels)?;
            let aux = resolve_aux(cli)?.for_channel(channels.main())?;
            let fp = resolve_lambda(lambda, icode.k())?;
            let trace = simulate_code(&icode, &channels, Some(&aux))?;
            let leak = trace
                .check_memoryless()?
                .into_iter()
                .fold(0.0f64, |a, b| a.max(b.abs()));
            println!("trace: {} variables, memoryless leak {:.3e}", trace.dist().vars().len(), leak);
            println!("{:<14} {:>12} {:>12} {:>12}", "conditioning", "lhs", "rhs", "slack");
            let mut report = Vec::new();
            for (name, cond) in [
                ("Z^n", Conditioning::Eavesdropper),
                ("T^n", Conditioning::AuxReceiver),
            ] {
                let sides = dependence_balance_sides(&trace, &fp, cond)?;
                println!(
                    "{:<14} {:>12.6} {:>12.6} {:>12.6}",
                    name,
                    sides.lhs,
                    sides.rhs,
                    sides.rhs - sides.lhs
                );
                report.push(serde_json::json!({
                    "conditioning": name,
                    "lhs": sides.lhs,
                    "rhs": sides.rhs,
                    "w_term": sides.w_term,
                }));
            }
            if let Some(path) = &cli.json {
                write_json_value(path, &serde_json::Value::Array(report))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Keybound { system, lambda } => {
            let sj: SystemJson = fileio::read_json(system)?;
            let sys = system_from_json::<f64>(&sj)?;
            let fp = resolve_lambda(lambda, sys.k())?;
            let aux = resolve_aux(cli)?;
            let cfg = optimizer_config(cli);
            let report = secret_key_bound(&sys, &aux, &fp, &cfg)?;
            println!("{:<12} {:>12} {:>12} {:>10}", "channel", "weight", "V", "converged");
            for c in &report.per_channel {
                println!(
                    "{:<12} {:>12.6} {:>12.6} {:>10}",
                    c.id, c.weight, c.v, c.converged
                );
            }
            println!(
                "bound = {:.6} bits per main-channel use (mode: {}, certified: {})",
                report.value,
                match report.mode {
                    wimwc_core::keybound::SearchMode::Heuristic => "heuristic",
                    wimwc_core::keybound::SearchMode::Grid => "grid",
                },
                report.certified
            );
            if let Some(path) = &cli.json {
                let v = serde_json::to_value(&report).map_err(|e| Error::Format(e.to_string()))?;
                write_json_value(path, &v)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Macregion { mac } => {
            let mj: ChannelJson = fileio::read_json(mac)?;
            let mac = GenFeedbackMAC::<f64>::new(channel_from_json(&mj)?)?;
            let cfg = optimizer_config(cli);
            let opts = RegionOptions { drop_6b: cli.drop_6b, ..RegionOptions::default() };
            let region = outer_region(&mac, &cfg, &opts)?;
            println!("sum-rate bound = {:.6}", region.sum_rate_max);
            println!("{:>12} {:>12}", "R1", "R2");
            for &(a, b) in &region.vertices {
                println!("{:>12.6} {:>12.6}", a, b);
            }
            if let Some(path) = &cli.csv {
                write_file(path, region.to_csv().as_bytes())?;
            }
            if let Some(path) = &cli.json {
                let v = serde_json::to_value(&region).map_err(|e| Error::Format(e.to_string()))?;
                write_json_value(path, &v)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Props { scale } => {
            let outcomes = wimwc_core::props::run_scaled(cli.seed, *scale);
            print!("{}", wimwc_core::props::render_report(&outcomes));
            if let Some(path) = &cli.json {
                let items: Vec<serde_json::Value> = outcomes
                    .iter()
                    .map(|o| {
                        serde_json::json!({
                            "name": o.name,
                            "passed": o.passed,
                            "cases": o.cases,
                            "worst": o.worst,
                            "detail": o.detail,
                        })
                    })
                    .collect();
                write_json_value(path, &serde_json::Value::Array(items))?;
            }
            if outcomes.iter().all(|o| o.passed) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}
