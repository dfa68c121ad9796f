//! `mpnf` — batch front end for the normal-form and monotone toolkit.
//!
//! Every subcommand reads tensor JSON (`{"dims":[...],"entries":[[re,im],...]}`,
//! plus `"kind":"density"` for density operators) from a file or stdin and
//! writes a JSON envelope with the input hash, the effective config, the seed
//! of any randomized run and the result payload. Identical invocation plus
//! seed reproduces the payload byte for byte.

use std::fs;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde_json::json;
use sha2::{Digest, Sha256};

use mpnf_core::json as tjson;
use mpnf_core::lu::{lu_equivalence_probe, lu_normal_form, zero_count, LuConfig, LuStatus};
use mpnf_core::monotones::{
    catalog, catalog_spec, check_invariance, check_invariance_unitary, check_monotonicity,
    evaluate, MonotoneSpec,
};
use mpnf_core::slocc::{normal_form, optimal_filter_report, Gauge, NormalFormStatus, SloccConfig};
use mpnf_core::states;
use mpnf_core::tensor::{MultiTensor, State};
use mpnf_core::MpnfError;

#[derive(Parser)]
#[command(name = "mpnf", version, about = "Multipartite normal forms and entanglement monotones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    output: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GaugeArg {
    Raw,
    Hermitian,
}

#[derive(Args)]
struct SloccArgs {
    /// Identity-closeness tolerance ε_id (relative).
    #[arg(long)]
    epsilon_id: Option<f64>,
    /// Sweep cap.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative trace threshold for divergence to zero.
    #[arg(long)]
    zero_threshold: Option<f64>,
    /// Operator-norm cap on accumulated filters.
    #[arg(long)]
    filter_norm_cap: Option<f64>,
    /// Relative trace below which a balanced state counts as zero.
    #[arg(long)]
    noise_floor: Option<f64>,
    #[arg(long, value_enum, default_value = "raw")]
    gauge: GaugeArg,
    /// Exit with status 3 when the run does not converge.
    #[arg(long)]
    strict: bool,
}

impl SloccArgs {
    fn config(&self, profile: &Profile) -> SloccConfig {
        let mut cfg = profile.slocc();
        if let Some(v) = self.epsilon_id {
            cfg.epsilon_id = v;
        }
        if let Some(v) = self.max_iters {
            cfg.max_sweeps = v;
        }
        if let Some(v) = self.zero_threshold {
            cfg.zero_threshold = v;
        }
        if let Some(v) = self.filter_norm_cap {
            cfg.filter_norm_cap = v;
        }
        if let Some(v) = self.noise_floor {
            cfg.noise_floor = v;
        }
        cfg.gauge = match self.gauge {
            GaugeArg::Raw => Gauge::Raw,
            GaugeArg::Hermitian => Gauge::Hermitian,
        };
        cfg
    }

    fn config_json(cfg: &SloccConfig) -> serde_json::Value {
        json!({
            "epsilon_id": cfg.epsilon_id,
            "max_iters": cfg.max_sweeps,
            "zero_threshold": cfg.zero_threshold,
            "filter_norm_cap": cfg.filter_norm_cap,
            "noise_floor": cfg.noise_floor,
            "gauge": match cfg.gauge { Gauge::Raw => "raw", Gauge::Hermitian => "hermitian" },
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Determinant-1 filtering normal form of a pure or mixed state.
    NormalForm {
        /// Input tensor JSON path, or `-` for stdin.
        input: String,
        #[command(flatten)]
        slocc: SloccArgs,
    },
    /// Local-unitary normal form (zero pattern + phase conditions).
    LuNormalForm {
        input: String,
        /// Relative fiber-tail tolerance per level.
        #[arg(long)]
        tail_tol: Option<f64>,
        /// Relative zero-pattern tolerance ε_zero.
        #[arg(long)]
        zero_tol: Option<f64>,
        /// Sweep cap per level.
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        strict: bool,
    },
    /// Evaluate one monotone on a pure state.
    Monotone {
        /// Input tensor JSON path, or `-` for stdin (not needed with --list).
        input: Option<String>,
        /// Catalog id (see `mpnf monotone --list`).
        #[arg(long, conflicts_with = "spec")]
        id: Option<String>,
        /// Path to a custom MonotoneSpec JSON.
        #[arg(long)]
        spec: Option<String>,
        /// List the catalog and exit.
        #[arg(long)]
        list: bool,
    },
    /// Check invariance of a monotone under random determinant-1 operators.
    InvarianceCheck {
        input: String,
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Sample determinant-1 unitaries instead of general operators.
        #[arg(long)]
        unitary: bool,
    },
    /// Check the averaged non-increase under random two-outcome filters.
    MonotonicityCheck {
        input: String,
        #[arg(long)]
        id: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Probe local-unitary equivalence of two pure states.
    Equivalence {
        input1: String,
        input2: String,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Canonical state generators.
    States {
        #[command(subcommand)]
        action: StatesAction,
    },
    /// Normal-form filters rescaled to implementable filtering operations.
    OptimalFilter {
        input: String,
        #[command(flatten)]
        slocc: SloccArgs,
    },
}

#[derive(Subcommand)]
enum StatesAction {
    /// Emit a canonical state as tensor JSON.
    Generate {
        /// bell | ghz<p> | w | two-bell-product | ghz-224 | ghz-223 | unbounded
        name: String,
        /// Coefficient for the unbounded-filter example state.
        #[arg(long)]
        a: Option<f64>,
        /// Emit the plain ket-sum form instead of the unit-norm state.
        #[arg(long)]
        unnormalized: bool,
    },
    /// List the available canonical state names.
    List,
}

/// Tolerance profile selected via MPNF_PROFILE (default | strict | loose);
/// explicit flags always win.
enum Profile {
    Default,
    Strict,
    Loose,
}

impl Profile {
    fn from_env() -> Result<Self, MpnfError> {
        match std::env::var("MPNF_PROFILE").ok().as_deref() {
            None | Some("default") | Some("") => Ok(Profile::Default),
            Some("strict") => Ok(Profile::Strict),
            Some("loose") => Ok(Profile::Loose),
            Some(other) => Err(MpnfError::InvalidConfig(format!(
                "unknown tolerance profile `{other}`"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Profile::Default => "default",
            Profile::Strict => "strict",
            Profile::Loose => "loose",
        }
    }

    fn slocc(&self) -> SloccConfig {
        let mut cfg = SloccConfig::default();
        match self {
            Profile::Default => {}
            Profile::Strict => {
                cfg.epsilon_id = 1e-11;
                cfg.zero_threshold = 1e-13;
            }
            Profile::Loose => {
                cfg.epsilon_id = 1e-7;
                cfg.zero_threshold = 1e-10;
            }
        }
        cfg
    }

    fn lu(&self) -> LuConfig {
        let mut cfg = LuConfig::default();
        match self {
            Profile::Default => {}
            Profile::Strict => {
                cfg.tail_tol = 1e-12;
                cfg.zero_tol = 1e-10;
            }
            Profile::Loose => {
                cfg.tail_tol = 1e-8;
                cfg.zero_tol = 1e-6;
            }
        }
        cfg
    }
}

fn error_code(e: &MpnfError) -> &'static str {
    match e {
        MpnfError::Json(_) => "malformed_json",
        MpnfError::EntryCountMismatch { .. } => "entry_count_mismatch",
        MpnfError::DimensionMismatch { .. } => "dimension_mismatch",
        MpnfError::InvalidParty { .. } => "invalid_party",
        MpnfError::InvalidDims(_) => "invalid_dims",
        MpnfError::NonFinite => "non_finite",
        MpnfError::NotHermitian { .. } => "not_hermitian",
        MpnfError::NotPsd { .. } => "not_psd",
        MpnfError::FlavorViolation { .. } => "flavor_violation",
        MpnfError::RankDeficient(_) => "rank_deficient",
        MpnfError::ZeroState => "zero_state",
        MpnfError::InvalidConfig(_) => "invalid_config",
        MpnfError::NotConverged(_) => "not_converged",
        MpnfError::InvalidMonotoneSpec(_) => "invalid_monotone_spec",
        MpnfError::UnknownMonotone(_) => "unknown_monotone",
        MpnfError::UnknownState(_) => "unknown_state",
        MpnfError::Internal(_) => "internal",
    }
}

struct Input {
    state: State,
    hash: String,
}

fn read_raw(path: &str) -> Result<Vec<u8>, MpnfError> {
    if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin()
            .read_to_end(&mut buf)
            .map_err(|e| MpnfError::Json(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        fs::read(path).map_err(|e| MpnfError::Json(format!("{path}: {e}")))
    }
}

fn read_state(path: &str) -> Result<Input, MpnfError> {
    let raw = read_raw(path)?;
    let digest = Sha256::digest(&raw);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let hash = format!("sha256:{hex}");
    let text = std::str::from_utf8(&raw).map_err(|e| MpnfError::Json(e.to_string()))?;
    Ok(Input { state: tjson::state_from_str(text)?, hash })
}

fn read_pure(path: &str) -> Result<(MultiTensor, String), MpnfError> {
    let input = read_state(path)?;
    match input.state {
        State::Pure(t) => Ok((t, input.hash)),
        State::Density(_) => Err(MpnfError::InvalidConfig(
            "this command requires a pure state (no \"kind\":\"density\")".into(),
        )),
    }
}

fn seed_or_fresh(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rng().random())
}

fn run(cli: &Cli) -> Result<(serde_json::Value, u8), MpnfError> {
    let profile = Profile::from_env()?;
    let value = match &cli.command {
        Command::NormalForm { input, slocc } => {
            let cfg = slocc.config(&profile);
            let input = read_state(input)?;
            let r = normal_form(&input.state, &cfg)?;
            let exit = if slocc.strict && r.status != NormalFormStatus::Converged { 3 } else { 0 };
            return Ok((
                json!({
                    "command": "normal-form",
                    "profile": profile.name(),
                    "input_hash": input.hash,
                    "config": SloccArgs::config_json(&cfg),
                    "result": r.to_json(),
                }),
                exit,
            ));
        }
        Command::LuNormalForm { input, tail_tol, zero_tol, max_iters, strict } => {
            let mut cfg = profile.lu();
            if let Some(v) = tail_tol {
                cfg.tail_tol = *v;
            }
            if let Some(v) = zero_tol {
                cfg.zero_tol = *v;
            }
            if let Some(v) = max_iters {
                cfg.max_sweeps_per_level = *v;
            }
            let (psi, hash) = read_pure(input)?;
            let r = lu_normal_form(&psi, &cfg)?;
            let dims = psi.dims();
            let equal = dims.iter().all(|&d| d == dims[0]);
            let exit = if *strict && r.status != LuStatus::Converged { 3 } else { 0 };
            return Ok((
                json!({
                    "command": "lu-normal-form",
                    "profile": profile.name(),
                    "input_hash": hash,
                    "config": {
                        "tail_tol": cfg.tail_tol,
                        "zero_tol": cfg.zero_tol,
                        "max_iters": cfg.max_sweeps_per_level,
                    },
                    "zero_count_equal_dims": if equal { Some(zero_count(dims[0], dims.len())) } else { None },
                    "result": r.to_json(),
                }),
                exit,
            ));
        }
        Command::Monotone { input, id, spec, list } => {
            if *list {
                let entries: Vec<_> = catalog()
                    .iter()
                    .map(|s| {
                        json!({
                            "id": s.id,
                            "description": s.description,
                            "dims": s.dims,
                            "degree": s.degree,
                        })
                    })
                    .collect();
                return Ok((json!({ "command": "monotone", "catalog": entries }), 0));
            }
            let spec: MonotoneSpec = match (id, spec) {
                (Some(id), None) => catalog_spec(id)?,
                (None, Some(path)) => {
                    let raw = read_raw(path)?;
                    let parsed: MonotoneSpec = serde_json::from_slice(&raw)
                        .map_err(|e| MpnfError::Json(e.to_string()))?;
                    parsed.validate()?;
                    parsed
                }
                _ => {
                    return Err(MpnfError::InvalidConfig(
                        "exactly one of --id and --spec is required".into(),
                    ))
                }
            };
            let input = input.as_deref().ok_or_else(|| {
                MpnfError::InvalidConfig("an input state is required (or use --list)".into())
            })?;
            let (psi, hash) = read_pure(input)?;
            let v = evaluate(&spec, &psi)?;
            json!({
                "command": "monotone",
                "input_hash": hash,
                "config": { "spec": serde_json::to_value(&spec).unwrap() },
                "result": {
                    "id": v.spec_id,
                    "value": v.value,
                    "normalized_input": v.normalized_input,
                },
            })
        }
        Command::InvarianceCheck { input, id, trials, seed, unitary } => {
            let spec = catalog_spec(id)?;
            let (psi, hash) = read_pure(input)?;
            let seed = seed_or_fresh(*seed);
            let report = if *unitary {
                check_invariance_unitary(&spec, &psi, *trials, seed)?
            } else {
                check_invariance(&spec, &psi, *trials, seed)?
            };
            json!({
                "command": "invariance-check",
                "input_hash": hash,
                "config": { "id": id, "trials": trials, "unitary": unitary },
                "seed": seed,
                "result": serde_json::to_value(&report).unwrap(),
            })
        }
        Command::MonotonicityCheck { input, id, trials, seed } => {
            let spec = catalog_spec(id)?;
            let (psi, hash) = read_pure(input)?;
            let seed = seed_or_fresh(*seed);
            let report = check_monotonicity(&spec, &psi, *trials, seed)?;
            json!({
                "command": "monotonicity-check",
                "input_hash": hash,
                "config": { "id": id, "trials": trials },
                "seed": seed,
                "result": serde_json::to_value(&report).unwrap(),
            })
        }
        Command::Equivalence { input1, input2, restarts, seed } => {
            let (a, hash1) = read_pure(input1)?;
            let (b, hash2) = read_pure(input2)?;
            let seed = seed_or_fresh(*seed);
            let report = lu_equivalence_probe(&a, &b, *restarts, seed)?;
            json!({
                "command": "equivalence",
                "input_hashes": [hash1, hash2],
                "config": { "restarts": restarts },
                "seed": seed,
                "result": report.to_json(),
                "verdict": report.verdict.as_str(),
            })
        }
        Command::States { action } => match action {
            StatesAction::Generate { name, a, unnormalized } => {
                let id = states::parse_name(name, *a)?;
                let t = states::make(id, !*unnormalized)?;
                tjson::pure_to_value(&t)
            }
            StatesAction::List => json!({
                "command": "states",
                "names": ["bell", "ghz<p>", "w", "two-bell-product", "ghz-224", "ghz-223", "unbounded"],
            }),
        },
        Command::OptimalFilter { input, slocc } => {
            let cfg = slocc.config(&profile);
            let input = read_state(input)?;
            let report = optimal_filter_report(&input.state, &cfg)?;
            let exit = if slocc.strict && report.result.status != NormalFormStatus::Converged {
                3
            } else {
                0
            };
            return Ok((
                json!({
                    "command": "optimal-filter",
                    "profile": profile.name(),
                    "input_hash": input.hash,
                    "config": SloccArgs::config_json(&cfg),
                    "result": report.to_json(),
                }),
                exit,
            ));
        }
    };
    Ok((value, 0))
}

fn emit(cli: &Cli, value: &serde_json::Value) -> Result<(), MpnfError> {
    let text = format!("{value}\n");
    match &cli.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| MpnfError::Json(format!("{path}: {e}")))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((value, exit)) => {
            if emit(&cli, &value).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(exit)
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": error_code(&e), "detail": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
