//! Command-line front end.
//!
//! ```text
//! gan-attractor [--threads N] [--out FILE] [--config FILE] <COMMAND> [OPTIONS]
//! ```
//!
//! Results are CSV (stdout, or `--out FILE`). With `--out`, a JSON sidecar
//! `FILE` with extension `.json` records `{config, seed, version, duration_ms}`;
//! passing that sidecar back through `--config` reproduces the CSV.
//!
//! Config files are flat TOML or JSON tables whose keys are the option names
//! of the subcommand with `_` for `-`. Flags override file values.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::capacity::{alpha_critical, capacity_interacting, capacity_simple, entropy_bits, CapacityParams};
use crate::characteristic::{check_conditions, estimate_moments, CharacteristicSpec, DEFAULT_CONDITION_FACTOR};
use crate::dynamics::{step_sync, DEFAULT_MAX_ITERS};
use crate::error::Error;
use crate::experiments::{basin_curve, default_grid, random_linear_network, stream, verify_ff_equivalence, BasinConfig, BasinModel};
use crate::learning::train;
use crate::model::{build_network, hamming_distance, perturb_state, random_pattern_set, GanSpec};
use crate::seed::RunSeed;

pub const THREADS_ENV: &str = "GAN_ATTRACTOR_THREADS";
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Numerical(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Config(m) | Self::Numerical(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::RootBracket { .. } | Error::NoConvergence { .. } => Self::Numerical(e.to_string()),
            other => Self::Config(other.to_string()),
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Comma-separated list on the command line, array or string in a file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FloatListRepr", into = "Vec<f64>")]
pub struct FloatList(pub Vec<f64>);

#[derive(Deserialize)]
#[serde(untagged)]
enum FloatListRepr {
    List(Vec<f64>),
    One(f64),
    Text(String),
}

impl TryFrom<FloatListRepr> for FloatList {
    type Error = String;

    fn try_from(r: FloatListRepr) -> Result<Self, String> {
        match r {
            FloatListRepr::List(v) => Ok(Self(v)),
            FloatListRepr::One(x) => Ok(Self(vec![x])),
            FloatListRepr::Text(s) => s.parse(),
        }
    }
}

impl From<FloatList> for Vec<f64> {
    fn from(l: FloatList) -> Self {
        l.0
    }
}

impl std::str::FromStr for FloatList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(v))
    }
}

#[derive(Debug, Parser)]
#[command(name = "gan-attractor", version, about = "Attractor networks of multi-variable neurons")]
struct Cli {
    /// Worker threads (default: available parallelism, or $GAN_ATTRACTOR_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the CSV here and a JSON sidecar next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat TOML or JSON file of option values; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean final distance versus initial distance from stored patterns.
    Basins(BasinsArgs),
    /// Storage capacity in bits per weight.
    Capacity(CapacityArgs),
    /// Moments and admissibility conditions of a characteristic function.
    CheckF(CheckFArgs),
    /// Compare one continuous network step with its feed-forward reading.
    FfVerify(FfVerifyArgs),
    /// Dump a single recall trajectory.
    Simulate(SimulateArgs),
}

macro_rules! fill_from {
    ($dst:expr, $src:expr; $($f:ident),* $(,)?) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )*
    };
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasinsArgs {
    /// gan or multistate.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Load; P = round(alpha * n).
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of independent pattern sets.
    #[arg(long)]
    sets: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated initial distances.
    #[arg(long)]
    d0_grid: Option<FloatList>,
    /// parity, io-code, linear:J1,J2,..., correlation:101, grandmother:01, table:v0,v1,...
    #[arg(long)]
    characteristic: Option<String>,
    /// literal-hebb, centered-hebb or perceptron.
    #[arg(long)]
    learn: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    f_mean: Option<f64>,
    #[arg(long)]
    abort_on_failure: Option<bool>,
    /// Probability of a 0 bit in GAN patterns.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// per-neuron or per-neuron-variance.
    #[arg(long)]
    multistate_norm: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacityArgs {
    /// simple, general or interacting (default: simple unless lambda, kappa, k or var_phi is set).
    #[arg(long)]
    mode: Option<String>,
    /// Comma-separated bias values (default 0.05, 0.10, ..., 0.95).
    #[arg(long)]
    rho: Option<FloatList>,
    /// Comma-separated Q/N values.
    #[arg(long)]
    lambda: Option<FloatList>,
    /// Comma-separated raw margins.
    #[arg(long)]
    kappa: Option<FloatList>,
    /// Comma-separated normalized margins (alternative to kappa).
    #[arg(long)]
    k: Option<FloatList>,
    /// Variance of the characteristic function.
    #[arg(long)]
    var_phi: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckFArgs {
    /// Characteristic function, same syntax as `basins --characteristic`.
    #[arg(long, alias = "characteristic")]
    kind: Option<String>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    /// Monte Carlo draws when q is too large for enumeration.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// "Much less than" is read as "at most factor times".
    #[arg(long)]
    factor: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FfVerifyArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    /// Random states per network.
    #[arg(long)]
    trials: Option<usize>,
    /// Random networks to check.
    #[arg(long)]
    networks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Exit 2 if any discrepancy reaches this.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Index of the stored pattern used as the reference.
    #[arg(long)]
    pattern: Option<usize>,
    #[arg(long)]
    d0: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    characteristic: Option<String>,
    #[arg(long)]
    learn: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

/// Parses a flat TOML or JSON document; a sidecar's `config` member is used
/// in place of the whole document.
fn load_config_value(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    let value: serde_json::Value = if is_toml {
        toml::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?
    } else {
        match serde_json::from_str(&text) {
            Ok(v) => v,
            Err(json_err) => toml::from_str(&text)
                .map_err(|_| config_err(format!("{}: {json_err}", path.display())))?,
        }
    };
    match value {
        serde_json::Value::Object(mut m) if m.contains_key("config") && m.contains_key("version") => {
            Ok(m.remove("config").unwrap_or_default())
        }
        v @ serde_json::Value::Object(_) => Ok(v),
        _ => Err(config_err(format!("{}: expected a table of key/value pairs", path.display()))),
    }
}

fn load_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let v = load_config_value(p)?;
            serde_json::from_value(v).map_err(|e| config_err(format!("{}: {e}", p.display())))
        }
    }
}

/// CSV text plus what goes into the sidecar.
struct Output {
    csv: String,
    config: serde_json::Value,
    seed: u64,
    summary: Option<serde_json::Value>,
}

fn to_json<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("plain data serializes")
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, CliError> {
    s.parse().map_err(CliError::from)
}

fn run_basins(mut a: BasinsArgs, file: BasinsArgs) -> Result<Output, CliError> {
    fill_from!(a, file; model, n, q, alpha, sets, seed, d0_grid, characteristic, learn, kappa,
        max_epochs, f_mean, abort_on_failure, rho, max_iters, multistate_norm);
    let model: BasinModel = parse(a.model.as_deref().unwrap_or("gan"))?;
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let mut cfg = BasinConfig::<f64>::new(model, RunSeed::new(seed));
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = a.q {
        cfg.q = v;
    }
    if let Some(v) = a.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = a.sets {
        cfg.n_sets = v;
    }
    if let Some(v) = &a.d0_grid {
        cfg.d0_grid = v.0.clone();
    }
    if let Some(v) = &a.characteristic {
        cfg.characteristic = parse(v)?;
    }
    if let Some(v) = &a.learn {
        cfg.learn.mode = parse(v)?;
    }
    if let Some(v) = a.kappa {
        cfg.learn.kappa = v;
    }
    if let Some(v) = a.max_epochs {
        cfg.learn.max_epochs = v;
    }
    cfg.learn.f_mean = a.f_mean;
    if let Some(v) = a.abort_on_failure {
        cfg.learn.abort_on_failure = v;
    }
    if let Some(v) = a.rho {
        cfg.rho = v;
    }
    if let Some(v) = a.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = &a.multistate_norm {
        cfg.multistate_norm = parse(v)?;
    }
    cfg.validate()?;

    let echo = BasinsArgs {
        model: Some(model.name().into()),
        n: Some(cfg.n),
        q: Some(cfg.q),
        alpha: Some(cfg.alpha),
        sets: Some(cfg.n_sets),
        seed: Some(seed),
        d0_grid: Some(FloatList(cfg.d0_grid.clone())),
        characteristic: Some(cfg.characteristic.to_string()),
        learn: Some(cfg.learn.mode.name().into()),
        kappa: Some(cfg.learn.kappa),
        max_epochs: Some(cfg.learn.max_epochs),
        f_mean: cfg.learn.f_mean,
        abort_on_failure: Some(cfg.learn.abort_on_failure),
        rho: Some(cfg.rho),
        max_iters: Some(cfg.max_iters),
        multistate_norm: Some(cfg.multistate_norm.name().into()),
    };

    let curve = basin_curve(&cfg)?;
    if curve.sets_used == 0 {
        return Err(CliError::Numerical(format!(
            "training failed to converge for all {} pattern sets",
            curve.sets_excluded
        )));
    }
    let mut csv = String::from("d0,mean_df,stderr,n_trials\n");
    for r in &curve.rows {
        writeln!(csv, "{:?},{:?},{:?},{}", r.d0, r.mean_df, r.stderr, r.n_trials).unwrap();
    }
    Ok(Output {
        csv,
        config: to_json(&echo),
        seed,
        summary: Some(serde_json::json!({
            "n_patterns": curve.n_patterns,
            "sets_used": curve.sets_used,
            "sets_excluded": curve.sets_excluded,
            "two_cycles": curve.two_cycles,
            "unconverged": curve.unconverged,
        })),
    })
}

fn run_capacity(mut a: CapacityArgs, file: CapacityArgs) -> Result<Output, CliError> {
    fill_from!(a, file; mode, rho, lambda, kappa, k, var_phi);
    if a.kappa.is_some() && a.k.is_some() {
        return Err(config_err("set at most one of `kappa` and `k`"));
    }
    let general_hint = a.lambda.is_some() || a.kappa.is_some() || a.k.is_some() || a.var_phi.is_some();
    let mode = a
        .mode
        .clone()
        .unwrap_or_else(|| if general_hint { "general" } else { "simple" }.into());
    let rhos = a.rho.clone().map_or_else(|| default_grid(0.95)[1..].to_vec(), |l| l.0);
    let lambdas = a.lambda.clone().map_or(vec![0.0], |l| l.0);
    let mut csv = String::from("rho,lambda,K,var_phi,root,alpha_c,E\n");

    match mode.as_str() {
        "simple" => {
            if general_hint {
                return Err(config_err("mode `simple` takes only `rho`"));
            }
            for &rho in &rhos {
                let s = capacity_simple(rho)?;
                let var = rho * (1.0 - rho);
                writeln!(csv, "{rho:?},0.0,0.0,{var:?},{:?},{:?},{:?}", s.root, s.alpha_c, s.e_bits).unwrap();
            }
        }
        "general" => {
            let var_phi = a.var_phi.unwrap_or(0.25);
            let (margins, normalized) = match (&a.kappa, &a.k) {
                (Some(l), None) => (l.0.clone(), false),
                (None, Some(l)) => (l.0.clone(), true),
                _ => (vec![0.0], true),
            };
            for &rho in &rhos {
                for &lambda in &lambdas {
                    for &m in &margins {
                        let p = if normalized {
                            CapacityParams::with_k(rho, lambda, m, var_phi)?
                        } else {
                            CapacityParams::new(rho, lambda, m, var_phi)?
                        };
                        let s = alpha_critical(&p)?;
                        writeln!(
                            csv,
                            "{rho:?},{lambda:?},{:?},{var_phi:?},{:?},{:?},{:?}",
                            p.k, s.root, s.alpha_c, s.e_bits
                        )
                        .unwrap();
                    }
                }
            }
        }
        "interacting" => {
            if a.kappa.is_some() || a.k.is_some() {
                return Err(config_err("mode `interacting` has no margin; drop `kappa`/`k`"));
            }
            let var_phi = a
                .var_phi
                .ok_or_else(|| config_err("mode `interacting` needs `var_phi`"))?;
            for &rho in &rhos {
                let s = capacity_simple(rho)?;
                let h2 = entropy_bits(rho)?;
                for &lambda in &lambdas {
                    let e = capacity_interacting(rho, lambda, var_phi)?;
                    let alpha_c = e * (1.0 + lambda) / h2;
                    writeln!(csv, "{rho:?},{lambda:?},0.0,{var_phi:?},{:?},{alpha_c:?},{e:?}", s.root).unwrap();
                }
            }
        }
        other => {
            return Err(config_err(format!(
                "invalid parameter `mode`: `{other}` is not one of simple, general, interacting"
            )))
        }
    }
    a.mode = Some(mode);
    a.rho = Some(FloatList(rhos));
    Ok(Output {
        csv,
        config: to_json(&a),
        seed: DEFAULT_SEED,
        summary: None,
    })
}

fn run_check_f(mut a: CheckFArgs, file: CheckFArgs) -> Result<Output, CliError> {
    fill_from!(a, file; kind, q, n, rho, samples, seed, factor);
    let spec: CharacteristicSpec<f64> = parse(a.kind.as_deref().unwrap_or("parity"))?;
    let q = a.q.unwrap_or(2);
    let n = a.n.unwrap_or(100);
    let rho = a.rho.unwrap_or(0.5);
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let factor = a.factor.unwrap_or(DEFAULT_CONDITION_FACTOR);
    if !(factor > 0.0) {
        return Err(config_err("invalid parameter `factor`: must be positive"));
    }
    let m = estimate_moments(&spec, q, rho, RunSeed::new(seed), a.samples)?;
    let c = check_conditions(&m, n, factor)?;
    let csv = format!(
        "mean,second_moment,variance,cond1,cond2,cond3\n{:?},{:?},{:?},{},{},{}\n",
        m.mean, m.second_moment, m.variance, c.cond1.pass, c.cond2.pass, c.cond3.pass
    );
    let echo = CheckFArgs {
        kind: Some(spec.to_string()),
        q: Some(q),
        n: Some(n),
        rho: Some(rho),
        samples: a.samples,
        seed: Some(seed),
        factor: Some(factor),
    };
    Ok(Output {
        csv,
        config: to_json(&echo),
        seed,
        summary: None,
    })
}

fn run_ff_verify(mut a: FfVerifyArgs, file: FfVerifyArgs) -> Result<Output, CliError> {
    fill_from!(a, file; n, q, trials, networks, seed, tol);
    let echo = FfVerifyArgs {
        n: Some(a.n.unwrap_or(20)),
        q: Some(a.q.unwrap_or(5)),
        trials: Some(a.trials.unwrap_or(100)),
        networks: Some(a.networks.unwrap_or(1)),
        seed: Some(a.seed.unwrap_or(DEFAULT_SEED)),
        tol: Some(a.tol.unwrap_or(1e-12)),
    };
    let (n, q, trials, networks, seed, tol) = (
        echo.n.unwrap(),
        echo.q.unwrap(),
        echo.trials.unwrap(),
        echo.networks.unwrap(),
        echo.seed.unwrap(),
        echo.tol.unwrap(),
    );
    let run_seed = RunSeed::new(seed);
    let mut csv = String::from("n,q,trials,max_abs_diff\n");
    let mut worst = 0.0f64;
    for k in 0..networks as u64 {
        let net = random_linear_network::<f64>(n, q, run_seed, k)?;
        let d = verify_ff_equivalence(&net, trials, RunSeed::new(run_seed.derive(&[k])))?;
        worst = worst.max(d);
        writeln!(csv, "{n},{q},{trials},{d:?}").unwrap();
    }
    let out = Output {
        csv,
        config: to_json(&echo),
        seed,
        summary: Some(serde_json::json!({ "max_abs_diff": worst })),
    };
    if worst >= tol {
        emit(&out, None).ok();
        return Err(CliError::Numerical(format!(
            "feed-forward discrepancy {worst:e} reached tolerance {tol:e}"
        )));
    }
    Ok(out)
}

fn run_simulate(mut a: SimulateArgs, file: SimulateArgs) -> Result<Output, CliError> {
    fill_from!(a, file; n, q, alpha, pattern, d0, seed, characteristic, learn, kappa, max_epochs, rho, max_iters);
    let seed = a.seed.unwrap_or(DEFAULT_SEED);
    let run_seed = RunSeed::new(seed);
    let mut cfg = BasinConfig::<f64>::new(BasinModel::Gan, run_seed);
    cfg.n = a.n.unwrap_or(cfg.n);
    cfg.q = a.q.unwrap_or(cfg.q);
    cfg.alpha = a.alpha.unwrap_or(cfg.alpha);
    cfg.rho = a.rho.unwrap_or(cfg.rho);
    cfg.max_iters = a.max_iters.unwrap_or(DEFAULT_MAX_ITERS);
    if let Some(v) = &a.characteristic {
        cfg.characteristic = parse(v)?;
    }
    if let Some(v) = &a.learn {
        cfg.learn.mode = parse(v)?;
    }
    cfg.learn.kappa = a.kappa.unwrap_or(cfg.learn.kappa);
    cfg.learn.max_epochs = a.max_epochs.unwrap_or(cfg.learn.max_epochs);
    let d0 = a.d0.unwrap_or(0.1);
    cfg.d0_grid = vec![d0];
    cfg.validate()?;
    let p = cfg.n_patterns();
    let pattern = a.pattern.unwrap_or(0);
    if pattern >= p {
        return Err(config_err(format!("invalid parameter `pattern`: {pattern} >= P = {p}")));
    }

    let spec = GanSpec::new(cfg.n, cfg.q, cfg.characteristic.clone(), false)?;
    let patterns = random_pattern_set(cfg.n, cfg.q, p, cfg.rho, &mut run_seed.rng(&[stream::PATTERNS, 0]))?;
    let trained = train(&patterns, &spec, &cfg.learn)?;
    if !trained.converged {
        return Err(CliError::Numerical("training did not converge".into()));
    }
    let net = build_network(spec, trained.weights, None)?;
    let reference = &patterns[pattern];
    let mut state = perturb_state(reference, d0, &mut run_seed.rng(&[stream::SIMULATE, pattern as u64]))?;
    let mut csv = String::from("t,distance,state\n");
    let mut history = vec![state.clone()];
    writeln!(csv, "0,{:?},{}", hamming_distance(&state, reference)?, state.to_bit_string()).unwrap();
    for t in 1..=cfg.max_iters {
        let next = step_sync(&net, &state)?;
        writeln!(csv, "{t},{:?},{}", hamming_distance(&next, reference)?, next.to_bit_string()).unwrap();
        let settled = next == state || (history.len() >= 2 && next == history[history.len() - 2]);
        history.push(next.clone());
        state = next;
        if settled {
            break;
        }
    }

    let echo = SimulateArgs {
        n: Some(cfg.n),
        q: Some(cfg.q),
        alpha: Some(cfg.alpha),
        pattern: Some(pattern),
        d0: Some(d0),
        seed: Some(seed),
        characteristic: Some(cfg.characteristic.to_string()),
        learn: Some(cfg.learn.mode.name().into()),
        kappa: Some(cfg.learn.kappa),
        max_epochs: Some(cfg.learn.max_epochs),
        rho: Some(cfg.rho),
        max_iters: Some(cfg.max_iters),
    };
    Ok(Output {
        csv,
        config: to_json(&echo),
        seed,
        summary: None,
    })
}

fn sidecar_path(out: &Path) -> PathBuf {
    if out.extension().is_some_and(|e| e == "json") {
        let mut s = out.as_os_str().to_owned();
        s.push(".meta.json");
        PathBuf::from(s)
    } else {
        out.with_extension("json")
    }
}

fn emit(output: &Output, out: Option<(&Path, u128)>) -> Result<(), CliError> {
    match out {
        None => {
            print!("{}", output.csv);
            Ok(())
        }
        Some((path, duration_ms)) => {
            let io = |e: std::io::Error| config_err(format!("{}: {e}", path.display()));
            std::fs::write(path, &output.csv).map_err(io)?;
            let mut record = serde_json::json!({
                "config": output.config,
                "seed": output.seed,
                "version": env!("CARGO_PKG_VERSION"),
                "duration_ms": duration_ms as u64,
            });
            if let Some(s) = &output.summary {
                record["summary"] = s.clone();
            }
            let side = sidecar_path(path);
            let text = serde_json::to_string_pretty(&record).expect("json value serializes");
            std::fs::write(&side, text + "\n").map_err(|e| config_err(format!("{}: {e}", side.display())))
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| config_err(format!("{THREADS_ENV}=`{v}`: {e}")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(config_err("invalid parameter `threads`: must be at least 1"));
    }
    Ok(n)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let start = Instant::now();
    let threads = thread_count(cli.threads)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| config_err(e.to_string()))?;
    let cfg = cli.config.as_deref();
    let output = pool.install(|| match cli.command {
        Command::Basins(a) => run_basins(a, load_config(cfg)?),
        Command::Capacity(a) => run_capacity(a, load_config(cfg)?),
        Command::CheckF(a) => run_check_f(a, load_config(cfg)?),
        Command::FfVerify(a) => run_ff_verify(a, load_config(cfg)?),
        Command::Simulate(a) => run_simulate(a, load_config(cfg)?),
    })?;
    let out = cli.out.as_deref().map(|p| (p, start.elapsed().as_millis()));
    emit(&output, out)
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}
