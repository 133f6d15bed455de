//! Network construction, random patterns, perturbation and distances.
//!
//! The internal state of neuron `i` is stored as a packed `u64` code whose bit
//! `a` is `s_i^a`, so `Q` is limited to 64 internal variables per neuron.

use rand::seq::index;
use rand::Rng;

use crate::characteristic::{CharacteristicSpec, CodeTable};
use crate::error::{check_probability, invalid, Error, Result};
use crate::scalar::Scalar;

/// Maximum number of internal bit-variables per neuron.
pub const MAX_Q: usize = 64;

/// Size and neuron type of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct GanSpec<T> {
    pub n_neurons: usize,
    pub q_vars: usize,
    /// Characteristic used by the recall dynamics.
    pub characteristic: CharacteristicSpec<T>,
    /// Whether intra-neuron couplings `L_i^{ab}` take part in the dynamics.
    pub interacting: bool,
}

impl<T: Scalar> GanSpec<T> {
    pub fn new(
        n_neurons: usize,
        q_vars: usize,
        characteristic: CharacteristicSpec<T>,
        interacting: bool,
    ) -> Result<Self> {
        let spec = Self {
            n_neurons,
            q_vars,
            characteristic,
            interacting,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_neurons < 2 {
            return Err(invalid("n_neurons", "at least two neurons are required"));
        }
        if self.q_vars == 0 || self.q_vars > MAX_Q {
            return Err(invalid("q_vars", format!("{} is outside 1..={MAX_Q}", self.q_vars)));
        }
        self.characteristic.validate(self.q_vars)
    }
}

/// The `N x Q` internal bits of every neuron at one time step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateMatrix {
    n: usize,
    q: usize,
    codes: Vec<u64>,
}

impl StateMatrix {
    pub fn zeros(n: usize, q: usize) -> Self {
        assert!((1..=MAX_Q).contains(&q), "q must be in 1..=64");
        Self {
            n,
            q,
            codes: vec![0; n],
        }
    }

    pub fn ones(n: usize, q: usize) -> Self {
        let mut s = Self::zeros(n, q);
        let m = s.mask();
        s.codes.iter_mut().for_each(|c| *c = m);
        s
    }

    /// Builds a state from row-major bits (`bits[i * q + a] = s_i^a`).
    pub fn from_bits(n: usize, q: usize, bits: &[bool]) -> Result<Self> {
        if bits.len() != n * q {
            return Err(Error::DimensionMismatch {
                what: "state bits",
                expected: (n * q).to_string(),
                found: bits.len().to_string(),
            });
        }
        let mut s = Self::zeros(n, q);
        for (k, &b) in bits.iter().enumerate() {
            s.set(k / q, k % q, b);
        }
        Ok(s)
    }

    /// Builds a state from packed per-neuron codes.
    pub fn from_codes(q: usize, codes: Vec<u64>) -> Result<Self> {
        if q == 0 || q > MAX_Q {
            return Err(invalid("q", format!("{q} is outside 1..={MAX_Q}")));
        }
        let mask = mask_for(q);
        if let Some(i) = codes.iter().position(|&c| c & !mask != 0) {
            return Err(invalid("codes", format!("neuron {i} has bits beyond q = {q}")));
        }
        Ok(Self {
            n: codes.len(),
            q,
            codes,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn mask(&self) -> u64 {
        mask_for(self.q)
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize) -> bool {
        self.codes[i] >> a & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, a: usize, bit: bool) {
        debug_assert!(a < self.q);
        if bit {
            self.codes[i] |= 1 << a;
        } else {
            self.codes[i] &= !(1 << a);
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize, a: usize) {
        debug_assert!(a < self.q);
        self.codes[i] ^= 1 << a;
    }

    #[inline]
    pub fn code(&self, i: usize) -> u64 {
        self.codes[i]
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub(crate) fn codes_mut(&mut self) -> &mut [u64] {
        &mut self.codes
    }

    /// Bits of neuron `i`, bit 0 first.
    pub fn neuron_bits(&self, i: usize) -> Vec<bool> {
        (0..self.q).map(|a| self.get(i, a)).collect()
    }

    /// Row-major bits, the inverse of [`StateMatrix::from_bits`].
    pub fn to_bits(&self) -> Vec<bool> {
        (0..self.n)
            .flat_map(|i| (0..self.q).map(move |a| (i, a)))
            .map(|(i, a)| self.get(i, a))
            .collect()
    }

    /// The configuration with every bit reversed.
    pub fn anti_state(&self) -> Self {
        let m = self.mask();
        Self {
            n: self.n,
            q: self.q,
            codes: self.codes.iter().map(|c| !c & m).collect(),
        }
    }

    pub fn count_ones(&self) -> usize {
        self.codes.iter().map(|c| c.count_ones() as usize).sum()
    }

    pub(crate) fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n && self.q == other.q
    }

    /// Bits as a string of `0`/`1`, neuron-major, bit 0 first.
    pub fn to_bit_string(&self) -> String {
        self.to_bits().iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

#[inline]
pub(crate) fn mask_for(q: usize) -> u64 {
    if q >= 64 {
        u64::MAX
    } else {
        (1u64 << q) - 1
    }
}

/// Stored patterns, all of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSet {
    patterns: Vec<StateMatrix>,
    rho: f64,
}

impl PatternSet {
    pub fn new(patterns: Vec<StateMatrix>, rho: f64) -> Result<Self> {
        let first = patterns.first().ok_or(Error::EmptyPatternSet)?;
        if let Some(bad) = patterns.iter().find(|p| !p.same_shape(first)) {
            return Err(Error::DimensionMismatch {
                what: "pattern set",
                expected: format!("{}x{}", first.n(), first.q()),
                found: format!("{}x{}", bad.n(), bad.q()),
            });
        }
        Ok(Self { patterns, rho })
    }

    pub fn patterns(&self) -> &[StateMatrix] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn n(&self) -> usize {
        self.patterns[0].n()
    }

    pub fn q(&self) -> usize {
        self.patterns[0].q()
    }
}

impl std::ops::Index<usize> for PatternSet {
    type Output = StateMatrix;

    fn index(&self, mu: usize) -> &StateMatrix {
        &self.patterns[mu]
    }
}

/// Inter-neuron weights `W_ij^a`, stored `[a][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor<T> {
    q: usize,
    n: usize,
    w: Vec<T>,
}

impl<T: Scalar> WeightTensor<T> {
    pub fn zeros(q: usize, n: usize) -> Self {
        Self {
            q,
            n,
            w: vec![T::zero(); q * n * n],
        }
    }

    /// Builds from a `[a][i][j]` buffer. The diagonal is checked by
    /// [`WeightTensor::validate`], which [`build_network`] calls.
    pub fn from_vec(q: usize, n: usize, w: Vec<T>) -> Result<Self> {
        if w.len() != q * n * n {
            return Err(Error::DimensionMismatch {
                what: "weight tensor",
                expected: (q * n * n).to_string(),
                found: w.len().to_string(),
            });
        }
        Ok(Self { q, n, w })
    }

    /// Fills every off-diagonal entry from `f(a, i, j)`; the diagonal is zero.
    pub fn from_fn(q: usize, n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut t = Self::zeros(q, n);
        for a in 0..q {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        t.w[(a * n + i) * n + j] = f(a, i, j);
                    }
                }
            }
        }
        t
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..self.q {
            for i in 0..self.n {
                if self.get(a, i, i) != T::zero() {
                    return Err(Error::NonZeroDiagonal { a, i });
                }
            }
        }
        Ok(())
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize) -> T {
        self.w[(a * self.n + i) * self.n + j]
    }

    /// Incoming weights `W_i.^a` of bit `a` of neuron `i`.
    #[inline]
    pub fn row(&self, a: usize, i: usize) -> &[T] {
        let start = (a * self.n + i) * self.n;
        &self.w[start..start + self.n]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, a: usize, i: usize) -> &mut [T] {
        let start = (a * self.n + i) * self.n;
        &mut self.w[start..start + self.n]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.w
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            q: self.q,
            n: self.n,
            w: self.w.iter().map(|&x| x * factor).collect(),
        }
    }
}

/// Intra-neuron couplings `L_i^{ab}`, stored `[i][a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InternalCouplings<T> {
    n: usize,
    q: usize,
    l: Vec<T>,
}

impl<T: Scalar> InternalCouplings<T> {
    pub fn zeros(n: usize, q: usize) -> Self {
        Self {
            n,
            q,
            l: vec![T::zero(); n * q * q],
        }
    }

    pub fn from_vec(n: usize, q: usize, l: Vec<T>) -> Result<Self> {
        if l.len() != n * q * q {
            return Err(Error::DimensionMismatch {
                what: "internal couplings",
                expected: (n * q * q).to_string(),
                found: l.len().to_string(),
            });
        }
        Ok(Self { n, q, l })
    }

    /// Fills every off-diagonal entry from `f(i, a, b)`; the diagonal is zero.
    pub fn from_fn(n: usize, q: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut c = Self::zeros(n, q);
        for i in 0..n {
            for a in 0..q {
                for b in 0..q {
                    if a != b {
                        c.l[(i * q + a) * q + b] = f(i, a, b);
                    }
                }
            }
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            for a in 0..self.q {
                if self.get(i, a, a) != T::zero() {
                    return Err(Error::NonZeroCouplingDiagonal { i, a });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn get(&self, i: usize, a: usize, b: usize) -> T {
        self.l[(i * self.q + a) * self.q + b]
    }

    #[inline]
    pub fn row(&self, i: usize, a: usize) -> &[T] {
        let start = (i * self.q + a) * self.q;
        &self.l[start..start + self.q]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize, a: usize) -> &mut [T] {
        let start = (i * self.q + a) * self.q;
        &mut self.l[start..start + self.q]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.l
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            n: self.n,
            q: self.q,
            l: self.l.iter().map(|&x| x * factor).collect(),
        }
    }
}

/// An immutable network ready for the recall dynamics.
#[derive(Debug, Clone)]
pub struct Network<T> {
    spec: GanSpec<T>,
    weights: WeightTensor<T>,
    couplings: Option<InternalCouplings<T>>,
    /// `theta_i^a`, stored `[i][a]`.
    thresholds: Vec<T>,
    table: CodeTable<T>,
}

/// Assembles a network, checking every shape and diagonal invariant.
pub fn build_network<T: Scalar>(
    spec: GanSpec<T>,
    weights: WeightTensor<T>,
    couplings: Option<InternalCouplings<T>>,
) -> Result<Network<T>> {
    spec.validate()?;
    let (n, q) = (spec.n_neurons, spec.q_vars);
    if weights.n() != n || weights.q() != q {
        return Err(Error::DimensionMismatch {
            what: "weight tensor",
            expected: format!("q={q}, n={n}"),
            found: format!("q={}, n={}", weights.q(), weights.n()),
        });
    }
    weights.validate()?;
    match (&couplings, spec.interacting) {
        (Some(_), false) => return Err(Error::UnexpectedCouplings),
        (None, true) => return Err(Error::MissingCouplings),
        (Some(c), true) => {
            if c.n() != n || c.q() != q {
                return Err(Error::DimensionMismatch {
                    what: "internal couplings",
                    expected: format!("n={n}, q={q}"),
                    found: format!("n={}, q={}", c.n(), c.q()),
                });
            }
            c.validate()?;
        }
        (None, false) => {}
    }
    let table = CodeTable::new(spec.characteristic.clone(), q);
    Ok(Network {
        thresholds: vec![T::zero(); n * q],
        spec,
        weights,
        couplings,
        table,
    })
}

impl<T: Scalar> Network<T> {
    /// Replaces the thresholds (`[i][a]` layout, default all zero).
    pub fn with_thresholds(mut self, thresholds: Vec<T>) -> Result<Self> {
        if thresholds.len() != self.n() * self.q() {
            return Err(Error::DimensionMismatch {
                what: "thresholds",
                expected: (self.n() * self.q()).to_string(),
                found: thresholds.len().to_string(),
            });
        }
        self.thresholds = thresholds;
        Ok(self)
    }

    pub fn spec(&self) -> &GanSpec<T> {
        &self.spec
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.spec.n_neurons
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.spec.q_vars
    }

    pub fn weights(&self) -> &WeightTensor<T> {
        &self.weights
    }

    pub fn couplings(&self) -> Option<&InternalCouplings<T>> {
        self.couplings.as_ref()
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    #[inline]
    pub fn threshold(&self, i: usize, a: usize) -> T {
        self.thresholds[i * self.q() + a]
    }

    pub fn characteristic(&self) -> &CharacteristicSpec<T> {
        &self.spec.characteristic
    }

    /// Characteristic value of a packed neuron code.
    #[inline]
    pub fn characteristic_of(&self, code: u64) -> T {
        self.table.eval(code)
    }

    /// Characteristic values of every neuron in `state`.
    pub fn characteristic_values(&self, state: &StateMatrix) -> Vec<T> {
        state.codes().iter().map(|&c| self.table.eval(c)).collect()
    }

    /// Copy with every weight, coupling and threshold multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            spec: self.spec.clone(),
            weights: self.weights.scaled(factor),
            couplings: self.couplings.as_ref().map(|c| c.scaled(factor)),
            thresholds: self.thresholds.iter().map(|&t| t * factor).collect(),
            table: self.table.clone(),
        }
    }

    pub(crate) fn check_state(&self, state: &StateMatrix) -> Result<()> {
        if state.n() != self.n() || state.q() != self.q() {
            return Err(Error::DimensionMismatch {
                what: "state",
                expected: format!("{}x{}", self.n(), self.q()),
                found: format!("{}x{}", state.n(), state.q()),
            });
        }
        Ok(())
    }
}

/// Samples `p` patterns whose bits are independently 0 with probability `rho`.
pub fn random_pattern_set<R: Rng + ?Sized>(
    n: usize,
    q: usize,
    p: usize,
    rho: f64,
    rng: &mut R,
) -> Result<PatternSet> {
    check_probability("rho", rho)?;
    if q == 0 || q > MAX_Q {
        return Err(invalid("q", format!("{q} is outside 1..={MAX_Q}")));
    }
    if p == 0 {
        return Err(Error::EmptyPatternSet);
    }
    let patterns = (0..p)
        .map(|_| {
            let mut s = StateMatrix::zeros(n, q);
            for code in s.codes_mut() {
                for a in 0..q {
                    if rng.random::<f64>() >= rho {
                        *code |= 1 << a;
                    }
                }
            }
            s
        })
        .collect();
    PatternSet::new(patterns, rho)
}

/// Number of bits [`perturb_state`] flips for initial distance `d0`.
pub fn flip_count(d0: f64, total_bits: usize) -> usize {
    ((d0 * total_bits as f64).round() as usize).min(total_bits)
}

/// Flips exactly `round(d0 * N * Q)` distinct bits chosen uniformly.
pub fn perturb_state<R: Rng + ?Sized>(
    pattern: &StateMatrix,
    d0: f64,
    rng: &mut R,
) -> Result<StateMatrix> {
    if !(0.0..=1.0).contains(&d0) {
        return Err(invalid("d0", format!("{d0} is outside [0, 1]")));
    }
    let total = pattern.n() * pattern.q();
    let k = flip_count(d0, total);
    let mut out = pattern.clone();
    for pos in index::sample(rng, total, k) {
        out.flip(pos / pattern.q(), pos % pattern.q());
    }
    Ok(out)
}

/// Fraction of the `N * Q` internal bits on which `a` and `b` differ.
pub fn hamming_distance(a: &StateMatrix, b: &StateMatrix) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch {
            what: "hamming distance",
            expected: format!("{}x{}", a.n(), a.q()),
            found: format!("{}x{}", b.n(), b.q()),
        });
    }
    let diff: u64 = a
        .codes
        .iter()
        .zip(&b.codes)
        .map(|(x, y)| u64::from((x ^ y).count_ones()))
        .sum();
    Ok(diff as f64 / (a.n * a.q) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::RunSeed;
    use proptest::prelude::*;

    fn parity_spec(n: usize, q: usize) -> GanSpec<f64> {
        GanSpec::new(n, q, CharacteristicSpec::Parity, false).unwrap()
    }

    #[test]
    fn spec_invariants() {
        assert!(GanSpec::<f64>::new(1, 2, CharacteristicSpec::Parity, false).is_err());
        assert!(GanSpec::<f64>::new(4, 0, CharacteristicSpec::Parity, false).is_err());
        assert!(GanSpec::<f64>::new(4, 65, CharacteristicSpec::Parity, false).is_err());
        assert!(GanSpec::<f64>::new(
            4,
            2,
            CharacteristicSpec::Linear { coefficients: vec![1.0] },
            false
        )
        .is_err());
    }

    #[test]
    fn zero_weights_build() {
        let net = build_network(parity_spec(4, 2), WeightTensor::zeros(2, 4), None);
        assert!(net.is_ok());
    }

    #[test]
    fn nonzero_diagonal_rejected() {
        let mut w = WeightTensor::<f64>::zeros(2, 4);
        w.row_mut(1, 2)[2] = 0.5;
        let err = build_network(parity_spec(4, 2), w, None).unwrap_err();
        assert_eq!(err, Error::NonZeroDiagonal { a: 1, i: 2 });
    }

    #[test]
    fn coupling_presence_must_match_spec() {
        let w = WeightTensor::<f64>::zeros(2, 4);
        let l = InternalCouplings::zeros(4, 2);
        assert_eq!(
            build_network(parity_spec(4, 2), w.clone(), Some(l.clone())).unwrap_err(),
            Error::UnexpectedCouplings
        );
        let inter = GanSpec::new(4, 2, CharacteristicSpec::Parity, true).unwrap();
        assert_eq!(
            build_network(inter.clone(), w.clone(), None).unwrap_err(),
            Error::MissingCouplings
        );
        assert!(build_network(inter, w, Some(l)).is_ok());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let w = WeightTensor::<f64>::zeros(2, 5);
        assert!(matches!(
            build_network(parity_spec(4, 2), w, None),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(WeightTensor::<f64>::from_vec(2, 4, vec![0.0; 31]).is_err());
    }

    #[test]
    fn pattern_set_shape() {
        let mut rng = RunSeed::new(1).rng(&[0]);
        let ps = random_pattern_set(100, 2, 5, 0.5, &mut rng).unwrap();
        assert_eq!(ps.len(), 5);
        assert!(ps.patterns().iter().all(|p| p.n() == 100 && p.q() == 2));
        assert!(random_pattern_set(10, 2, 5, 1.0, &mut rng).is_err());
        assert!(random_pattern_set(10, 2, 5, 0.0, &mut rng).is_err());
        assert_eq!(random_pattern_set(10, 2, 0, 0.5, &mut rng), Err(Error::EmptyPatternSet));
    }

    #[test]
    fn pattern_sampling_is_deterministic() {
        let a = random_pattern_set(50, 3, 4, 0.3, &mut RunSeed::new(9).rng(&[1])).unwrap();
        let b = random_pattern_set(50, 3, 4, 0.3, &mut RunSeed::new(9).rng(&[1])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pattern_sampling_matches_bernoulli() {
        for rho in [0.5, 0.2, 0.999] {
            let ps = random_pattern_set(1000, 4, 50, rho, &mut RunSeed::new(5).rng(&[2])).unwrap();
            let total = 1000 * 4 * 50;
            let ones: usize = ps.patterns().iter().map(|p| p.count_ones()).sum();
            let p0 = 1.0 - ones as f64 / total as f64;
            let tol = 4.0 * (rho * (1.0 - rho) / total as f64).sqrt();
            assert!((p0 - rho).abs() < tol, "rho {rho}: empirical {p0}");
        }
    }

    #[test]
    fn perturb_extremes() {
        let mut rng = RunSeed::new(2).rng(&[0]);
        let p = random_pattern_set(100, 2, 1, 0.5, &mut rng).unwrap()[0].clone();
        assert_eq!(perturb_state(&p, 0.0, &mut rng).unwrap(), p);
        assert_eq!(perturb_state(&p, 1.0, &mut rng).unwrap(), p.anti_state());
        let s = perturb_state(&p, 0.3, &mut rng).unwrap();
        let diff: u32 = p.codes().iter().zip(s.codes()).map(|(a, b)| (a ^ b).count_ones()).sum();
        assert_eq!(diff, 60);
        assert!(perturb_state(&p, 1.5, &mut rng).is_err());
        assert!(perturb_state(&p, -0.1, &mut rng).is_err());
    }

    #[test]
    fn perturb_distance_is_exact_on_grid() {
        let mut rng = RunSeed::new(3).rng(&[0]);
        for (n, q) in [(100, 2), (37, 3), (10, 1)] {
            let p = random_pattern_set(n, q, 1, 0.5, &mut rng).unwrap()[0].clone();
            for k in 0..=20 {
                let d0 = k as f64 * 0.05;
                let s = perturb_state(&p, d0, &mut rng).unwrap();
                let want = flip_count(d0, n * q) as f64 / (n * q) as f64;
                assert_eq!(hamming_distance(&s, &p).unwrap(), want);
            }
        }
    }

    #[test]
    fn distance_basics() {
        let mut rng = RunSeed::new(4).rng(&[0]);
        let x = random_pattern_set(20, 3, 1, 0.5, &mut rng).unwrap()[0].clone();
        assert_eq!(hamming_distance(&x, &x).unwrap(), 0.0);
        assert_eq!(hamming_distance(&x, &x.anti_state()).unwrap(), 1.0);
        assert!(hamming_distance(&x, &StateMatrix::zeros(20, 2)).is_err());
    }

    #[test]
    fn triangle_inequality_exhaustive() {
        // every triple of states with N * Q = 4 bits (2 neurons x 2 bits),
        // and a sample of triples for N * Q = 12
        let all: Vec<StateMatrix> = (0..16u64)
            .map(|c| StateMatrix::from_codes(2, vec![c & 3, c >> 2]).unwrap())
            .collect();
        for a in &all {
            for b in &all {
                for c in &all {
                    let ab = hamming_distance(a, b).unwrap();
                    let bc = hamming_distance(b, c).unwrap();
                    let ac = hamming_distance(a, c).unwrap();
                    assert!(ac <= ab + bc + 1e-15);
                    assert_eq!(ab, hamming_distance(b, a).unwrap());
                }
            }
        }
        let big: Vec<StateMatrix> = (0..4096u64)
            .step_by(37)
            .map(|c| StateMatrix::from_codes(3, vec![c & 7, c >> 3 & 7, c >> 6 & 7, c >> 9]).unwrap())
            .collect();
        for a in &big {
            for b in &big {
                for c in big.iter().step_by(5) {
                    let ab = hamming_distance(a, b).unwrap();
                    let bc = hamming_distance(b, c).unwrap();
                    let ac = hamming_distance(a, c).unwrap();
                    assert!(ac <= ab + bc + 1e-15);
                }
            }
        }
    }

    #[test]
    fn bit_round_trip() {
        let bits = vec![true, false, false, true, true, true];
        let s = StateMatrix::from_bits(3, 2, &bits).unwrap();
        assert_eq!(s.to_bits(), bits);
        assert_eq!(s.neuron_bits(0), vec![true, false]);
        assert_eq!(s.code(1), 0b10);
        assert_eq!(s.to_bit_string(), "100111");
        assert!(StateMatrix::from_codes(2, vec![4]).is_err());
    }

    proptest! {
        #[test]
        fn distance_zero_iff_equal(
            codes_a in prop::collection::vec(0u64..16, 1..20),
            seed in any::<u64>(),
        ) {
            let a = StateMatrix::from_codes(4, codes_a.clone()).unwrap();
            let mut rng = RunSeed::new(seed).rng(&[]);
            let b = perturb_state(&a, 0.2, &mut rng).unwrap();
            let d = hamming_distance(&a, &b).unwrap();
            prop_assert_eq!(d == 0.0, a == b);
        }
    }
}
