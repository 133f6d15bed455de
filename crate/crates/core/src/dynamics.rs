//! Synchronous recall dynamics.
//!
//! Every bit updates at once from the characteristic values of the previous
//! state:
//!
//! ```text
//! s_i^a(t+1) = H( sum_{j != i} W_ij^a f_j(t) + sum_{b != a} L_i^{ab} s_i^b(t) - theta_i^a )
//! ```
//!
//! with `H(x) = 1` iff `x >= 0`. The coupling sum only appears for
//! interacting networks.
//!
//! Fields are accumulated in a fixed order (inter-neuron terms by ascending
//! `j`, then intra-neuron terms by ascending `b`, then the threshold) so the
//! packed stepper and the plain translation in [`reference`] produce the same
//! floating-point values.

use crate::error::{invalid, Error, Result};
use crate::model::{hamming_distance, Network, PatternSet, StateMatrix};
use crate::scalar::{heaviside, Scalar};

/// Default iteration cap for [`run_to_attractor`].
pub const DEFAULT_MAX_ITERS: usize = 1000;

/// Field of bit `a` of neuron `i` in `state`.
pub fn local_field<T: Scalar>(net: &Network<T>, state: &StateMatrix, i: usize, a: usize) -> T {
    let row = net.weights().row(a, i);
    let mut inter = T::zero();
    for (j, &w) in row.iter().enumerate() {
        if j != i {
            inter = inter + w * net.characteristic_of(state.code(j));
        }
    }
    finish_field(net, inter, state.code(i), i, a)
}

#[inline]
fn finish_field<T: Scalar>(net: &Network<T>, inter: T, own_code: u64, i: usize, a: usize) -> T {
    let mut field = inter;
    if let Some(l) = net.couplings() {
        let mut intra = T::zero();
        for (b, &c) in l.row(i, a).iter().enumerate() {
            if b != a && own_code >> b & 1 == 1 {
                intra = intra + c;
            }
        }
        field = field + intra;
    }
    field - net.threshold(i, a)
}

/// Reusable buffers for stepping one trajectory.
#[derive(Debug)]
pub struct Stepper<'n, T> {
    net: &'n Network<T>,
    active: Vec<(usize, T)>,
}

impl<'n, T: Scalar> Stepper<'n, T> {
    pub fn new(net: &'n Network<T>) -> Self {
        Self {
            net,
            active: Vec::with_capacity(net.n()),
        }
    }

    /// One synchronous update of `state` into `out`.
    pub fn step_into(&mut self, state: &StateMatrix, out: &mut StateMatrix) {
        let net = self.net;
        let (n, q) = (net.n(), net.q());
        // f_j(t) for every neuron first; zero terms cannot change a sum.
        self.active.clear();
        for j in 0..n {
            let f = net.characteristic_of(state.code(j));
            if f != T::zero() {
                self.active.push((j, f));
            }
        }
        let w = net.weights();
        let codes = out.codes_mut();
        for (i, slot) in codes.iter_mut().enumerate().take(n) {
            let own = state.code(i);
            let mut next = 0u64;
            for a in 0..q {
                let row = w.row(a, i);
                let mut inter = T::zero();
                for &(j, f) in &self.active {
                    if j != i {
                        inter = inter + row[j] * f;
                    }
                }
                if heaviside(finish_field(net, inter, own, i, a)) {
                    next |= 1 << a;
                }
            }
            *slot = next;
        }
    }
}

/// One synchronous step of the whole network.
pub fn step_sync<T: Scalar>(net: &Network<T>, state: &StateMatrix) -> Result<StateMatrix> {
    net.check_state(state)?;
    let mut out = state.clone();
    Stepper::new(net).step_into(state, &mut out);
    Ok(out)
}

/// Final state of a recall trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AttractorResult {
    pub final_state: StateMatrix,
    /// 1 for a fixed point, 2 for a two-cycle, 0 when `max_iters` ran out.
    pub cycle_length: u8,
    /// Number of synchronous steps applied.
    pub iterations: usize,
    /// Distance from `final_state` to the reference pattern.
    pub d_f: f64,
    /// Smaller distance of the two states of a two-cycle (equals `d_f` otherwise).
    pub d_f_min: f64,
}

impl AttractorResult {
    pub fn converged(&self) -> bool {
        self.cycle_length > 0
    }
}

/// Iterates [`step_sync`] until a fixed point or two-cycle is reached, or
/// `max_iters` steps have been applied.
pub fn run_to_attractor<T: Scalar>(
    net: &Network<T>,
    state: &StateMatrix,
    reference: &StateMatrix,
    max_iters: usize,
) -> Result<AttractorResult> {
    if max_iters == 0 {
        return Err(invalid("max_iters", "must be at least 1"));
    }
    net.check_state(state)?;
    net.check_state(reference)?;
    let mut stepper = Stepper::new(net);
    let mut prev = state.clone();
    let mut cur = state.clone();
    let mut next = state.clone();
    for it in 1..=max_iters {
        stepper.step_into(&cur, &mut next);
        if next == cur {
            let d = hamming_distance(&next, reference)?;
            return Ok(AttractorResult {
                final_state: next,
                cycle_length: 1,
                iterations: it,
                d_f: d,
                d_f_min: d,
            });
        }
        if it > 1 && next == prev {
            let d = hamming_distance(&next, reference)?;
            let d_other = hamming_distance(&cur, reference)?;
            return Ok(AttractorResult {
                final_state: next,
                cycle_length: 2,
                iterations: it,
                d_f: d,
                d_f_min: d.min(d_other),
            });
        }
        // rotate prev <- cur <- next without reallocating
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    let d = hamming_distance(&cur, reference)?;
    Ok(AttractorResult {
        final_state: cur,
        cycle_length: 0,
        iterations: max_iters,
        d_f: d,
        d_f_min: d,
    })
}

/// Stability margins `(2 sigma_i^{a mu} - 1) * field_i^a(pattern mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport<T> {
    n: usize,
    q: usize,
    /// `[mu][i][a]`
    pub margins: Vec<T>,
    /// `theta_i^a`, `[i][a]`
    pub thresholds: Vec<T>,
    pub kappa: T,
    pub min_margin: T,
    /// Every margin is at least `kappa`.
    pub all_at_least_kappa: bool,
    /// Margins that are exactly zero (field exactly zero).
    pub zero_fields: usize,
    /// Whether each pattern is a fixed point of [`step_sync`].
    pub fixed_points: Vec<bool>,
}

impl<T: Scalar> MarginReport<T> {
    #[inline]
    pub fn margin(&self, mu: usize, i: usize, a: usize) -> T {
        self.margins[(mu * self.n + i) * self.q + a]
    }

    pub fn n_patterns(&self) -> usize {
        self.fixed_points.len()
    }

    /// Smallest margin over the patterns for bit `a` of neuron `i`.
    pub fn row_min(&self, i: usize, a: usize) -> T {
        (0..self.n_patterns())
            .map(|mu| self.margin(mu, i, a))
            .fold(T::infinity(), T::min)
    }
}

pub fn stability_margins<T: Scalar>(
    net: &Network<T>,
    patterns: &PatternSet,
    kappa: T,
) -> Result<MarginReport<T>> {
    let (n, q) = (net.n(), net.q());
    let mut margins = Vec::with_capacity(patterns.len() * n * q);
    let mut fixed_points = Vec::with_capacity(patterns.len());
    let mut zero_fields = 0;
    for p in patterns.patterns() {
        net.check_state(p)?;
        let mut fixed = true;
        for i in 0..n {
            for a in 0..q {
                let field = local_field(net, p, i, a);
                let target = p.get(i, a);
                let m = if target { field } else { -field };
                if field == T::zero() {
                    zero_fields += 1;
                }
                fixed &= heaviside(field) == target;
                margins.push(m);
            }
        }
        fixed_points.push(fixed);
    }
    let min_margin = margins.iter().copied().fold(T::infinity(), T::min);
    Ok(MarginReport {
        n,
        q,
        all_at_least_kappa: margins.iter().all(|&m| m >= kappa),
        margins,
        thresholds: net.thresholds().to_vec(),
        kappa,
        min_margin,
        zero_fields,
        fixed_points,
    })
}

/// Real-valued internal variables in `[0,1]`, stored `[i][a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousState<T> {
    n: usize,
    q: usize,
    values: Vec<T>,
}

impl<T: Scalar> ContinuousState<T> {
    pub fn new(n: usize, q: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != n * q {
            return Err(Error::DimensionMismatch {
                what: "continuous state",
                expected: (n * q).to_string(),
                found: values.len().to_string(),
            });
        }
        if let Some(v) = values.iter().find(|&&v| !(v >= T::zero() && v <= T::one())) {
            return Err(invalid("values", format!("{v} is outside [0, 1]")));
        }
        Ok(Self { n, q, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn neuron(&self, i: usize) -> &[T] {
        &self.values[i * self.q..(i + 1) * self.q]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

fn require_linear<T: Scalar>(net: &Network<T>) -> Result<()> {
    match net.characteristic() {
        crate::characteristic::CharacteristicSpec::Linear { .. } => Ok(()),
        other => Err(Error::WrongCharacteristic {
            expected: "linear",
            found: other.kind(),
        }),
    }
}

/// Linear characteristic values of every neuron of a continuous state.
pub fn continuous_characteristics<T: Scalar>(
    net: &Network<T>,
    state: &ContinuousState<T>,
) -> Result<Vec<T>> {
    require_linear(net)?;
    if state.n != net.n() || state.q != net.q() {
        return Err(Error::DimensionMismatch {
            what: "continuous state",
            expected: format!("{}x{}", net.n(), net.q()),
            found: format!("{}x{}", state.n, state.q),
        });
    }
    (0..state.n)
        .map(|i| net.characteristic().eval_continuous(state.neuron(i)))
        .collect()
}

/// One synchronous step in continuous mode: the Heaviside activation is
/// replaced by the logistic sigmoid. Requires the linear characteristic.
pub fn step_continuous<T: Scalar>(
    net: &Network<T>,
    state: &ContinuousState<T>,
) -> Result<ContinuousState<T>> {
    let f = continuous_characteristics(net, state)?;
    let (n, q) = (net.n(), net.q());
    let mut values = Vec::with_capacity(n * q);
    for i in 0..n {
        let own = state.neuron(i);
        for a in 0..q {
            let row = net.weights().row(a, i);
            let mut field = T::zero();
            for (j, (&w, &fj)) in row.iter().zip(&f).enumerate() {
                if j != i {
                    field = field + w * fj;
                }
            }
            if let Some(l) = net.couplings() {
                let mut intra = T::zero();
                for (b, (&c, &s)) in l.row(i, a).iter().zip(own).enumerate() {
                    if b != a {
                        intra = intra + c * s;
                    }
                }
                field = field + intra;
            }
            values.push((field - net.threshold(i, a)).sigmoid());
        }
    }
    Ok(ContinuousState { n, q, values })
}

/// Straightforward translation of the update rule over plain bit vectors,
/// kept as an independent check on the packed stepper.
pub mod reference {
    use crate::model::Network;
    use crate::scalar::Scalar;

    /// `bits[i][a]`
    pub type Bits = Vec<Vec<bool>>;

    pub fn field<T: Scalar>(net: &Network<T>, bits: &Bits, i: usize, a: usize) -> T {
        let f: Vec<T> = bits.iter().map(|b| net.characteristic().eval_bits(b)).collect();
        field_with(net, &f, bits, i, a)
    }

    fn field_with<T: Scalar>(net: &Network<T>, f: &[T], bits: &Bits, i: usize, a: usize) -> T {
        let n = bits.len();
        let q = bits[i].len();
        let mut inter = T::zero();
        for j in 0..n {
            if j == i {
                continue;
            }
            inter = inter + net.weights().get(a, i, j) * f[j];
        }
        let mut total = inter;
        if let Some(l) = net.couplings() {
            let mut intra = T::zero();
            for b in 0..q {
                if b == a {
                    continue;
                }
                let s = if bits[i][b] { T::one() } else { T::zero() };
                intra = intra + l.get(i, a, b) * s;
            }
            total = total + intra;
        }
        total - net.threshold(i, a)
    }

    pub fn step<T: Scalar>(net: &Network<T>, bits: &Bits) -> Bits {
        let f: Vec<T> = bits.iter().map(|b| net.characteristic().eval_bits(b)).collect();
        (0..bits.len())
            .map(|i| {
                (0..bits[i].len())
                    .map(|a| field_with(net, &f, bits, i, a) >= T::zero())
                    .collect()
            })
            .collect()
    }

    /// The first `steps` states after `start` (not including `start`).
    pub fn trajectory<T: Scalar>(net: &Network<T>, start: &Bits, steps: usize) -> Vec<Bits> {
        let mut out = Vec::with_capacity(steps);
        let mut cur = start.clone();
        for _ in 0..steps {
            cur = step(net, &cur);
            out.push(cur.clone());
        }
        out
    }
}
