//! Basin-of-attraction curves for the GAN and multi-state networks, and the
//! feed-forward reading of a continuous linear-characteristic network.
//!
//! Every random draw comes from [`RunSeed::rng`] with a path that starts with
//! one of the [`stream`] identifiers, so results do not depend on how trials
//! are scheduled across threads.

use rand::Rng;
use rayon::prelude::*;

use crate::baseline::{
    multistate_hebb, multistate_run, perturb_multistate, random_multistate_patterns, HebbNorm,
};
use crate::characteristic::CharacteristicSpec;
use crate::dynamics::{continuous_characteristics, run_to_attractor, step_continuous, ContinuousState, DEFAULT_MAX_ITERS};
use crate::error::{check_probability, invalid, Error, Result};
use crate::learning::{train, LearnConfig};
use crate::model::{build_network, perturb_state, random_pattern_set, GanSpec, Network, WeightTensor};
use crate::scalar::Scalar;
use crate::seed::RunSeed;

/// First element of every seed path.
pub mod stream {
    pub const MOMENTS: u64 = 1;
    pub const PATTERNS: u64 = 2;
    pub const PERTURB: u64 = 3;
    pub const FF_STATES: u64 = 4;
    pub const RANDOM_NETWORK: u64 = 5;
    pub const SIMULATE: u64 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BasinModel {
    #[default]
    Gan,
    Multistate,
}

impl BasinModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gan => "gan",
            Self::Multistate => "multistate",
        }
    }
}

impl std::str::FromStr for BasinModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gan" => Ok(Self::Gan),
            "multistate" => Ok(Self::Multistate),
            other => Err(invalid("model", format!("`{other}` is not one of gan, multistate"))),
        }
    }
}

/// `{0, 0.05, ..., max}` computed as `k / 20`.
pub fn default_grid(max: f64) -> Vec<f64> {
    let top = (max * 20.0).round() as usize;
    (0..=top).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinConfig<T> {
    pub n: usize,
    /// Internal variables per GAN neuron; ignored by the multi-state model.
    pub q: usize,
    /// Load; `P = round(alpha N)`.
    pub alpha: f64,
    pub d0_grid: Vec<f64>,
    pub n_sets: usize,
    pub model: BasinModel,
    pub learn: LearnConfig<T>,
    pub characteristic: CharacteristicSpec<T>,
    /// Probability of a 0 bit in GAN patterns.
    pub rho: f64,
    pub multistate_norm: HebbNorm,
    pub seed: RunSeed,
    pub max_iters: usize,
}

impl<T: Scalar> BasinConfig<T> {
    /// N = 100, Q = 2, alpha = 0.05, parity, centered Hebb, 100 sets.
    pub fn new(model: BasinModel, seed: RunSeed) -> Self {
        Self {
            n: 100,
            q: 2,
            alpha: 0.05,
            d0_grid: default_grid(match model {
                BasinModel::Gan => 1.0,
                BasinModel::Multistate => 0.5,
            }),
            n_sets: 100,
            model,
            learn: LearnConfig::default(),
            characteristic: CharacteristicSpec::Parity,
            rho: 0.5,
            multistate_norm: HebbNorm::default(),
            seed,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }

    pub fn n_patterns(&self) -> usize {
        (self.alpha * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(invalid("n", "must be at least 2"));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(invalid("alpha", "must be positive"));
        }
        if self.n_patterns() == 0 {
            return Err(invalid("alpha", format!("round(alpha * n) is 0 for n = {}", self.n)));
        }
        if self.d0_grid.is_empty() {
            return Err(invalid("d0_grid", "must not be empty"));
        }
        if let Some(d) = self.d0_grid.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(invalid("d0_grid", format!("{d} is outside [0, 1]")));
        }
        if self.n_sets == 0 {
            return Err(invalid("sets", "must be at least 1"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if self.model == BasinModel::Gan {
            GanSpec::new(self.n, self.q, self.characteristic.clone(), false)?;
            check_probability("rho", self.rho)?;
            self.learn.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinRow {
    pub d0: f64,
    pub mean_df: f64,
    /// Sample standard deviation over `sqrt(n_trials)`.
    pub stderr: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinCurve<T> {
    pub rows: Vec<BasinRow>,
    pub config: BasinConfig<T>,
    pub n_patterns: usize,
    pub sets_used: usize,
    /// Sets dropped because training did not converge.
    pub sets_excluded: usize,
    /// Trajectories ending in a two-cycle.
    pub two_cycles: usize,
    /// Trajectories that hit `max_iters`.
    pub unconverged: usize,
}

impl<T> BasinCurve<T> {
    pub fn row_at(&self, d0: f64) -> Option<&BasinRow> {
        self.rows.iter().find(|r| (r.d0 - d0).abs() < 1e-12)
    }
}

/// Per-set outcome: `d_f[k][mu]` for grid point `k`, or exclusion.
struct SetResult {
    d_f: Option<Vec<Vec<f64>>>,
    two_cycles: usize,
    unconverged: usize,
}

fn gan_set<T: Scalar>(cfg: &BasinConfig<T>, set: u64, p: usize) -> Result<SetResult> {
    let spec = GanSpec::new(cfg.n, cfg.q, cfg.characteristic.clone(), false)?;
    let patterns = random_pattern_set(cfg.n, cfg.q, p, cfg.rho, &mut cfg.seed.rng(&[stream::PATTERNS, set]))?;
    let trained = train(&patterns, &spec, &cfg.learn)?;
    if !trained.converged {
        return Ok(SetResult {
            d_f: None,
            two_cycles: 0,
            unconverged: 0,
        });
    }
    let net = build_network(spec, trained.weights, None)?;
    let mut out = vec![Vec::with_capacity(p); cfg.d0_grid.len()];
    let (mut two_cycles, mut unconverged) = (0, 0);
    for (k, &d0) in cfg.d0_grid.iter().enumerate() {
        for (mu, pat) in patterns.patterns().iter().enumerate() {
            let mut rng = cfg.seed.rng(&[stream::PERTURB, set, mu as u64, k as u64]);
            let start = perturb_state(pat, d0, &mut rng)?;
            let r = run_to_attractor(&net, &start, pat, cfg.max_iters)?;
            two_cycles += usize::from(r.cycle_length == 2);
            unconverged += usize::from(r.cycle_length == 0);
            out[k].push(r.d_f);
        }
    }
    Ok(SetResult {
        d_f: Some(out),
        two_cycles,
        unconverged,
    })
}

fn multistate_set<T: Scalar>(cfg: &BasinConfig<T>, set: u64, p: usize) -> Result<SetResult> {
    let patterns = random_multistate_patterns(cfg.n, p, &mut cfg.seed.rng(&[stream::PATTERNS, set]));
    let net = multistate_hebb::<T>(&patterns, cfg.multistate_norm)?;
    let mut out = vec![Vec::with_capacity(p); cfg.d0_grid.len()];
    let (mut two_cycles, mut unconverged) = (0, 0);
    for (k, &d0) in cfg.d0_grid.iter().enumerate() {
        for (mu, pat) in patterns.iter().enumerate() {
            let mut rng = cfg.seed.rng(&[stream::PERTURB, set, mu as u64, k as u64]);
            let start = perturb_multistate(pat, d0, &mut rng)?;
            let r = multistate_run(&net, &start, pat, cfg.max_iters)?;
            two_cycles += usize::from(r.cycle_length == 2);
            unconverged += usize::from(r.cycle_length == 0);
            out[k].push(r.d_f);
        }
    }
    Ok(SetResult {
        d_f: Some(out),
        two_cycles,
        unconverged,
    })
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean final distance versus initial distance, averaged over every pattern
/// of `n_sets` independent pattern sets. Sets run in parallel; the reduction
/// is in set order, so the output does not depend on the thread count.
pub fn basin_curve<T: Scalar>(config: &BasinConfig<T>) -> Result<BasinCurve<T>> {
    config.validate()?;
    let p = config.n_patterns();
    let sets: Vec<SetResult> = (0..config.n_sets as u64)
        .into_par_iter()
        .map(|set| match config.model {
            BasinModel::Gan => gan_set(config, set, p),
            BasinModel::Multistate => multistate_set(config, set, p),
        })
        .collect::<Result<_>>()?;

    let mut per_row: Vec<Vec<f64>> = vec![Vec::new(); config.d0_grid.len()];
    let (mut used, mut excluded, mut two_cycles, mut unconverged) = (0, 0, 0, 0);
    for s in &sets {
        two_cycles += s.two_cycles;
        unconverged += s.unconverged;
        match &s.d_f {
            Some(rows) => {
                used += 1;
                for (acc, r) in per_row.iter_mut().zip(rows) {
                    acc.extend_from_slice(r);
                }
            }
            None => excluded += 1,
        }
    }
    let rows = config
        .d0_grid
        .iter()
        .zip(&per_row)
        .map(|(&d0, xs)| {
            let (mean_df, stderr) = if xs.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                mean_stderr(xs)
            };
            BasinRow {
                d0,
                mean_df,
                stderr,
                n_trials: xs.len(),
            }
        })
        .collect();
    Ok(BasinCurve {
        rows,
        config: config.clone(),
        n_patterns: p,
        sets_used: used,
        sets_excluded: excluded,
        two_cycles,
        unconverged,
    })
}

/// One neuron of a continuous linear-characteristic network read as a
/// three-layer net: `N - 1` linear inputs, `Q` logistic hidden units, one
/// linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct FfNet<T> {
    pub neuron: usize,
    /// `[a][k]` where `k` runs over the other neurons in index order.
    pub input_weights: Vec<T>,
    /// `-theta_i^a`.
    pub hidden_bias: Vec<T>,
    /// `J^a`.
    pub output_weights: Vec<T>,
}

impl<T: Scalar> FfNet<T> {
    pub fn hidden_width(&self) -> usize {
        self.output_weights.len()
    }

    pub fn input_width(&self) -> usize {
        self.input_weights.len() / self.hidden_width()
    }

    pub fn eval(&self, inputs: &[T]) -> Result<T> {
        let width = self.input_width();
        if inputs.len() != width {
            return Err(Error::DimensionMismatch {
                what: "feed-forward input",
                expected: width.to_string(),
                found: inputs.len().to_string(),
            });
        }
        let mut out = T::zero();
        for (a, (&bias, &j)) in self.hidden_bias.iter().zip(&self.output_weights).enumerate() {
            let w = &self.input_weights[a * width..(a + 1) * width];
            let mut z = T::zero();
            for (&wk, &xk) in w.iter().zip(inputs) {
                z = z + wk * xk;
            }
            out = out + j * (z + bias).sigmoid();
        }
        Ok(out)
    }
}

/// Feed-forward form of neuron `i`.
pub fn build_ff_equivalent<T: Scalar>(net: &Network<T>, i: usize) -> Result<FfNet<T>> {
    let coefficients = match net.characteristic() {
        CharacteristicSpec::Linear { coefficients } => coefficients.clone(),
        other => {
            return Err(Error::WrongCharacteristic {
                expected: "linear",
                found: other.kind(),
            })
        }
    };
    if net.couplings().is_some() {
        return Err(Error::InteractingUnsupported);
    }
    if i >= net.n() {
        return Err(invalid("neuron", format!("{i} is out of range for {} neurons", net.n())));
    }
    let mut input_weights = Vec::with_capacity(net.q() * (net.n() - 1));
    for a in 0..net.q() {
        let row = net.weights().row(a, i);
        input_weights.extend(row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &w)| w));
    }
    Ok(FfNet {
        neuron: i,
        input_weights,
        hidden_bias: (0..net.q()).map(|a| -net.threshold(i, a)).collect(),
        output_weights: coefficients,
    })
}

/// Largest `|f_i(feed-forward) - f_i(network step)|` over every neuron and
/// `n_trials` uniformly random continuous states.
pub fn verify_ff_equivalence<T: Scalar>(net: &Network<T>, n_trials: usize, seed: RunSeed) -> Result<T> {
    let ff: Vec<FfNet<T>> = (0..net.n()).map(|i| build_ff_equivalent(net, i)).collect::<Result<_>>()?;
    let (n, q) = (net.n(), net.q());
    let mut worst = T::zero();
    for trial in 0..n_trials as u64 {
        let mut rng = seed.rng(&[stream::FF_STATES, trial]);
        let values = (0..n * q).map(|_| T::of(rng.random::<f64>())).collect();
        let state = ContinuousState::new(n, q, values)?;
        let f_prev = continuous_characteristics(net, &state)?;
        let next = step_continuous(net, &state)?;
        let f_next = continuous_characteristics(net, &next)?;
        for (i, ff_i) in ff.iter().enumerate() {
            let inputs: Vec<T> = f_prev.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &f)| f).collect();
            let d = (ff_i.eval(&inputs)? - f_next[i]).abs();
            if !(d <= worst) {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// Random non-interacting linear-characteristic network: weights,
/// coefficients and thresholds uniform in `[-1, 1)`.
pub fn random_linear_network<T: Scalar>(n: usize, q: usize, seed: RunSeed, index: u64) -> Result<Network<T>> {
    let mut rng = seed.rng(&[stream::RANDOM_NETWORK, index]);
    let mut uniform = move || T::of(rng.random_range(-1.0..1.0));
    let coefficients = (0..q).map(|_| uniform()).collect();
    let spec = GanSpec::new(n, q, CharacteristicSpec::Linear { coefficients }, false)?;
    let weights = WeightTensor::from_fn(q, n, |_, _, _| uniform());
    let thresholds = (0..n * q).map(|_| uniform()).collect();
    build_network(spec, weights, None)?.with_thresholds(thresholds)
}
