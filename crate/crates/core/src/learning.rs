//! Weight construction.
//!
//! * literal Hebb: `W_ij^a = sum_mu s_i^{a mu} f_j^mu`
//! * centered Hebb (default): `W_ij^a = sum_mu (2 s_i^{a mu} - 1)(f_j^mu - fbar)`
//! * margin perceptron: trains each `(i, a)` row until every stored pattern
//!   satisfies `(2 sigma_i^{a mu} - 1) * field > kappa * |row| / sqrt(N)`
//!
//! The literal rule only produces nonnegative fields when `f >= 0`, so under
//! `H(0) = 1` the all-ones state absorbs everything; it is kept for
//! comparison runs.

use rayon::prelude::*;

use crate::characteristic::CodeTable;
use crate::error::{invalid, Error, Result};
use crate::model::{GanSpec, InternalCouplings, PatternSet, WeightTensor};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LearnMode {
    LiteralHebb,
    #[default]
    CenteredHebb,
    Perceptron,
}

impl LearnMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::LiteralHebb => "literal-hebb",
            Self::CenteredHebb => "centered-hebb",
            Self::Perceptron => "perceptron",
        }
    }
}

impl std::str::FromStr for LearnMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal-hebb" => Ok(Self::LiteralHebb),
            "centered-hebb" => Ok(Self::CenteredHebb),
            "perceptron" => Ok(Self::Perceptron),
            other => Err(invalid(
                "learn",
                format!("`{other}` is not one of literal-hebb, centered-hebb, perceptron"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig<T> {
    pub mode: LearnMode,
    /// Margin demand for the perceptron.
    pub kappa: T,
    pub max_epochs: usize,
    /// Overrides the empirical mean of `f` used by centered Hebb.
    pub f_mean: Option<T>,
    /// Perceptron only: stop at the first row that fails to converge. Rows
    /// after it are left at zero; `converged` is false either way.
    pub abort_on_failure: bool,
}

impl<T: Scalar> Default for LearnConfig<T> {
    fn default() -> Self {
        Self {
            mode: LearnMode::CenteredHebb,
            kappa: T::zero(),
            max_epochs: 1000,
            f_mean: None,
            abort_on_failure: false,
        }
    }
}

impl<T: Scalar> LearnConfig<T> {
    pub fn perceptron(kappa: T, max_epochs: usize) -> Self {
        Self {
            mode: LearnMode::Perceptron,
            kappa,
            max_epochs,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= T::zero()) {
            return Err(invalid("kappa", "must be nonnegative"));
        }
        if self.max_epochs == 0 {
            return Err(invalid("max_epochs", "must be at least 1"));
        }
        Ok(())
    }
}

fn check_patterns<T: Scalar>(patterns: &PatternSet, spec: &GanSpec<T>) -> Result<()> {
    if patterns.is_empty() {
        return Err(Error::EmptyPatternSet);
    }
    if patterns.n() != spec.n_neurons || patterns.q() != spec.q_vars {
        return Err(Error::DimensionMismatch {
            what: "pattern set",
            expected: format!("{}x{}", spec.n_neurons, spec.q_vars),
            found: format!("{}x{}", patterns.n(), patterns.q()),
        });
    }
    Ok(())
}

/// `phi[mu][j]`: characteristic value of neuron `j` in pattern `mu`.
fn characteristic_table<T: Scalar>(patterns: &PatternSet, spec: &GanSpec<T>) -> Vec<Vec<T>> {
    let table = CodeTable::new(spec.characteristic.clone(), spec.q_vars);
    patterns
        .patterns()
        .iter()
        .map(|p| p.codes().iter().map(|&c| table.eval(c)).collect())
        .collect()
}

#[inline]
fn spin<T: Scalar>(bit: bool) -> T {
    if bit {
        T::one()
    } else {
        -T::one()
    }
}

/// Generalized Hebb rule, literal or centered.
pub fn hebb_weights<T: Scalar>(
    patterns: &PatternSet,
    spec: &GanSpec<T>,
    config: &LearnConfig<T>,
) -> Result<WeightTensor<T>> {
    check_patterns(patterns, spec)?;
    let (n, q) = (spec.n_neurons, spec.q_vars);
    let phi = characteristic_table(patterns, spec);
    let (pre, post): (Vec<Vec<T>>, fn(bool) -> T) = match config.mode {
        LearnMode::LiteralHebb => (phi, |b| if b { T::one() } else { T::zero() }),
        LearnMode::CenteredHebb => {
            let fbar = config.f_mean.unwrap_or_else(|| {
                let total: T = phi.iter().flatten().copied().sum();
                total / T::of((n * patterns.len()) as f64)
            });
            let centered = phi
                .into_iter()
                .map(|row| row.into_iter().map(|f| f - fbar).collect())
                .collect();
            (centered, spin::<T>)
        }
        LearnMode::Perceptron => {
            return Err(invalid("mode", "hebb_weights needs a Hebb learning mode"))
        }
    };
    let mut w = WeightTensor::zeros(q, n);
    for a in 0..q {
        for i in 0..n {
            let row = w.row_mut(a, i);
            for (p, x) in patterns.patterns().iter().zip(&pre) {
                let s = post(p.get(i, a));
                for (j, (slot, &xj)) in row.iter_mut().zip(x).enumerate() {
                    if j != i {
                        *slot = *slot + s * xj;
                    }
                }
            }
        }
    }
    Ok(w)
}

/// `L_i^{ab} = sum_mu (2 sigma_i^{a mu} - 1)(2 sigma_i^{b mu} - 1)` for `b != a`.
pub fn hebb_internal<T: Scalar>(
    patterns: &PatternSet,
    spec: &GanSpec<T>,
) -> Result<InternalCouplings<T>> {
    check_patterns(patterns, spec)?;
    if !spec.interacting {
        return Err(invalid("interacting", "internal couplings need an interacting spec"));
    }
    let (n, q) = (spec.n_neurons, spec.q_vars);
    Ok(InternalCouplings::from_fn(n, q, |i, a, b| {
        patterns
            .patterns()
            .iter()
            .map(|p| spin::<T>(p.get(i, a)) * spin::<T>(p.get(i, b)))
            .sum()
    }))
}

/// Result of [`perceptron_train`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome<T> {
    pub weights: WeightTensor<T>,
    pub couplings: Option<InternalCouplings<T>>,
    /// Every row reached a violation-free epoch.
    pub converged: bool,
    /// Largest epoch count over the trained rows.
    pub epochs: usize,
    pub rows_converged: usize,
}

struct RowResult<T> {
    w: Vec<T>,
    l: Vec<T>,
    converged: bool,
    epochs: usize,
}

fn train_row<T: Scalar>(
    i: usize,
    a: usize,
    patterns: &PatternSet,
    phi: &[Vec<T>],
    interacting: bool,
    config: &LearnConfig<T>,
) -> RowResult<T> {
    let n = patterns.n();
    let q = patterns.q();
    let mut w = vec![T::zero(); n];
    let mut l = vec![T::zero(); if interacting { q } else { 0 }];
    let sqrt_n = T::of(n as f64).sqrt();
    let demand_scale = config.kappa / sqrt_n;
    let needs_norm = config.kappa > T::zero();

    let mut epochs = 0;
    let mut converged = false;
    while epochs < config.max_epochs {
        epochs += 1;
        let mut violations = 0usize;
        for (p, x) in patterns.patterns().iter().zip(phi) {
            let t = spin::<T>(p.get(i, a));
            let own = p.code(i);
            let mut field = T::zero();
            for (j, (&wj, &xj)) in w.iter().zip(x).enumerate() {
                if j != i {
                    field = field + wj * xj;
                }
            }
            let mut intra = T::zero();
            for (b, &lb) in l.iter().enumerate() {
                if b != a && own >> b & 1 == 1 {
                    intra = intra + lb;
                }
            }
            field = field + intra;
            let demand = if needs_norm {
                demand_scale * row_norm(&w, &l)
            } else {
                T::zero()
            };
            if t * field <= demand {
                violations += 1;
                for (j, (wj, &xj)) in w.iter_mut().zip(x).enumerate() {
                    if j != i {
                        *wj = *wj + t * xj;
                    }
                }
                for (b, lb) in l.iter_mut().enumerate() {
                    if b != a && own >> b & 1 == 1 {
                        *lb = *lb + t;
                    }
                }
            }
        }
        if violations == 0 {
            converged = true;
            break;
        }
    }

    if converged {
        // one common positive factor keeps every margin sign and ratio
        let norm_w = w.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
        if norm_w > T::zero() {
            let c = sqrt_n / norm_w;
            w.iter_mut().for_each(|x| *x = *x * c);
            l.iter_mut().for_each(|x| *x = *x * c);
        }
    }
    RowResult {
        w,
        l,
        converged,
        epochs,
    }
}

fn row_norm<T: Scalar>(w: &[T], l: &[T]) -> T {
    w.iter()
        .chain(l)
        .fold(T::zero(), |acc, &x| acc + x * x)
        .sqrt()
}

/// Trains every `(i, a)` row independently with a fixed pattern visit order.
///
/// Converged rows are rescaled so that `sum_j (W_ij^a)^2 = N`; the intra-neuron
/// part of the row is multiplied by the same factor.
pub fn perceptron_train<T: Scalar>(
    patterns: &PatternSet,
    spec: &GanSpec<T>,
    config: &LearnConfig<T>,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    check_patterns(patterns, spec)?;
    let (n, q) = (spec.n_neurons, spec.q_vars);
    let phi = characteristic_table(patterns, spec);
    let rows: Vec<(usize, usize)> = (0..q).flat_map(|a| (0..n).map(move |i| (i, a))).collect();
    let train = |&(i, a): &(usize, usize)| train_row(i, a, patterns, &phi, spec.interacting, config);

    let results: Vec<RowResult<T>> = if config.abort_on_failure {
        let mut out = Vec::with_capacity(rows.len());
        for r in &rows {
            let res = train(r);
            let failed = !res.converged;
            out.push(res);
            if failed {
                break;
            }
        }
        out
    } else {
        rows.par_iter().map(train).collect()
    };

    let mut weights = WeightTensor::zeros(q, n);
    let mut couplings = spec.interacting.then(|| InternalCouplings::zeros(n, q));
    let mut epochs = 0;
    let mut rows_converged = 0;
    for (&(i, a), res) in rows.iter().zip(&results) {
        weights.row_mut(a, i).copy_from_slice(&res.w);
        if let Some(c) = couplings.as_mut() {
            c.row_mut(i, a).copy_from_slice(&res.l);
        }
        epochs = epochs.max(res.epochs);
        rows_converged += usize::from(res.converged);
    }
    Ok(TrainOutcome {
        weights,
        couplings,
        converged: rows_converged == rows.len(),
        epochs,
        rows_converged,
    })
}

/// Weights (and couplings for interacting specs) for any learning mode.
pub fn train<T: Scalar>(
    patterns: &PatternSet,
    spec: &GanSpec<T>,
    config: &LearnConfig<T>,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    match config.mode {
        LearnMode::Perceptron => perceptron_train(patterns, spec, config),
        LearnMode::LiteralHebb | LearnMode::CenteredHebb => {
            let weights = hebb_weights(patterns, spec, config)?;
            let couplings = if spec.interacting {
                Some(hebb_internal(patterns, spec)?)
            } else {
                None
            };
            Ok(TrainOutcome {
                weights,
                couplings,
                converged: true,
                epochs: 1,
                rows_converged: spec.n_neurons * spec.q_vars,
            })
        }
    }
}
