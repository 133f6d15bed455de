//! Characteristic functions `f: {0,1}^Q -> R`.
//!
//! A neuron never exposes its internal bits directly; other neurons only see
//! the value of its characteristic function. This module evaluates the
//! supported families, estimates their moments under the Bernoulli product
//! measure used for random patterns, and checks the three admissibility
//! conditions the capacity results rely on.
//!
//! Bit `a` of a neuron (0-based) maps to bit `a` of a packed `u64` code, so
//! the boolean-table index and the io-code value of a bit vector coincide:
//! `sum_a 2^a * s^a`.
//!
//! Text form (used by the CLI):
//!
//! | kind          | example              |
//! |---------------|----------------------|
//! | parity        | `parity`             |
//! | linear        | `linear:0.3,0.4`     |
//! | correlation   | `correlation:101`    |
//! | grandmother   | `grandmother:01`     |
//! | boolean-table | `table:0,1,1,0`      |
//! | io-code       | `io-code`            |
//!
//! Templates list bit 0 first.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{check_probability, invalid, Error, Result};
use crate::scalar::Scalar;
use crate::seed::RunSeed;

/// Largest `Q` for which [`CodeTable`] precomputes every value.
pub const TABLE_MAX_Q: usize = 16;

/// Largest `Q` for which moments are computed by exhaustive enumeration.
pub const EXHAUSTIVE_MAX_Q: usize = 20;

/// Default Monte Carlo sample count for [`estimate_moments`].
pub const DEFAULT_MOMENT_SAMPLES: usize = 100_000;

/// Variance threshold for the non-degeneracy condition.
pub const VARIANCE_EPSILON: f64 = 1e-12;

/// Default factor operationalizing "much less than" in [`check_conditions`].
pub const DEFAULT_CONDITION_FACTOR: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum CharacteristicSpec<T> {
    /// XOR of all internal bits.
    Parity,
    /// `sum_a J^a s^a`; also accepts continuous internal variables in `[0,1]`.
    Linear { coefficients: Vec<T> },
    /// `(1/Q) sum_a t^a s^a`.
    Correlation { template: Vec<bool> },
    /// 1 iff the bits equal the template.
    Grandmother { template: Vec<bool> },
    /// Arbitrary boolean function given by its `2^Q` values.
    BooleanTable { table: Vec<T> },
    /// `sum_a 2^a s^a`, the binary code of the internal state. Reserved for I/O.
    IoCode,
}

impl<T: Scalar> CharacteristicSpec<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parity => "parity",
            Self::Linear { .. } => "linear",
            Self::Correlation { .. } => "correlation",
            Self::Grandmother { .. } => "grandmother",
            Self::BooleanTable { .. } => "table",
            Self::IoCode => "io-code",
        }
    }

    /// Checks that the payload matches `q` internal variables.
    pub fn validate(&self, q: usize) -> Result<()> {
        let expect = |len: usize, want: usize, payload: &'static str| -> Result<()> {
            if len == 0 {
                return Err(Error::MissingPayload {
                    kind: self.kind(),
                    payload,
                });
            }
            if len != want {
                return Err(Error::DimensionMismatch {
                    what: payload,
                    expected: want.to_string(),
                    found: len.to_string(),
                });
            }
            Ok(())
        };
        match self {
            Self::Parity | Self::IoCode => Ok(()),
            Self::Linear { coefficients } => expect(coefficients.len(), q, "coefficients"),
            Self::Correlation { template } | Self::Grandmother { template } => {
                expect(template.len(), q, "template")
            }
            Self::BooleanTable { table } => {
                if q >= usize::BITS as usize {
                    return Err(invalid("q", "too many internal variables for a table"));
                }
                expect(table.len(), 1 << q, "table")
            }
        }
    }

    /// True when every value lies in `[0,1]`, which makes the first two
    /// admissibility conditions hold automatically.
    pub fn is_squashing(&self) -> bool {
        match self {
            Self::Parity | Self::Correlation { .. } | Self::Grandmother { .. } => true,
            Self::BooleanTable { table } => {
                table.iter().all(|&v| v >= T::zero() && v <= T::one())
            }
            Self::Linear { .. } | Self::IoCode => false,
        }
    }

    /// Evaluates on a bit vector. The payload is assumed valid for `bits.len()`.
    pub fn eval_bits(&self, bits: &[bool]) -> T {
        let q = bits.len();
        match self {
            Self::Parity => {
                if bits.iter().fold(false, |acc, &b| acc ^ b) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Linear { coefficients } => bits
                .iter()
                .zip(coefficients)
                .filter(|(&b, _)| b)
                .map(|(_, &c)| c)
                .sum(),
            Self::Correlation { template } => {
                let hits = bits.iter().zip(template).filter(|(&b, &t)| b && t).count();
                T::of(hits as f64) / T::of(q as f64)
            }
            Self::Grandmother { template } => {
                if bits == template.as_slice() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::BooleanTable { table } => {
                let idx = bits
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (a, &b)| acc | (usize::from(b) << a));
                table[idx]
            }
            Self::IoCode => bits
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(a, _)| T::of((1u64 << a) as f64))
                .sum(),
        }
    }

    /// Evaluates on a packed code of `q` bits (bit `a` of `code` is `s^a`).
    pub fn eval_code(&self, code: u64, q: usize) -> T {
        match self {
            Self::Parity => {
                if code.count_ones() & 1 == 1 {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::Linear { coefficients } => {
                let mut acc = T::zero();
                for (a, &c) in coefficients.iter().enumerate().take(q) {
                    if code >> a & 1 == 1 {
                        acc = acc + c;
                    }
                }
                acc
            }
            Self::Correlation { template } => {
                let t = pack(template);
                T::of((code & t).count_ones() as f64) / T::of(q as f64)
            }
            Self::Grandmother { template } => {
                if code == pack(template) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Self::BooleanTable { table } => table[code as usize],
            Self::IoCode => T::of(code as f64),
        }
    }

    /// Evaluates the linear characteristic on continuous internal variables.
    pub fn eval_continuous(&self, values: &[T]) -> Result<T> {
        match self {
            Self::Linear { coefficients } => {
                if coefficients.len() != values.len() {
                    return Err(Error::DimensionMismatch {
                        what: "continuous internal variables",
                        expected: coefficients.len().to_string(),
                        found: values.len().to_string(),
                    });
                }
                Ok(coefficients
                    .iter()
                    .zip(values)
                    .fold(T::zero(), |acc, (&c, &s)| acc + c * s))
            }
            other => Err(Error::ContinuousNotLinear(other.kind())),
        }
    }
}

/// Evaluates `spec` on either discrete bits or, for the linear kind, on
/// continuous internal variables.
pub fn eval_characteristic<T: Scalar>(
    spec: &CharacteristicSpec<T>,
    bits: &[bool],
    continuous: Option<&[T]>,
) -> Result<T> {
    spec.validate(bits.len())?;
    match continuous {
        Some(values) => spec.eval_continuous(values),
        None => Ok(spec.eval_bits(bits)),
    }
}

pub(crate) fn pack(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (a, &b)| acc | (u64::from(b) << a))
}

/// Characteristic evaluator over packed codes, with a lookup table when
/// `Q <= TABLE_MAX_Q`.
#[derive(Debug, Clone)]
pub struct CodeTable<T> {
    spec: CharacteristicSpec<T>,
    q: usize,
    table: Option<Vec<T>>,
}

impl<T: Scalar> CodeTable<T> {
    pub fn new(spec: CharacteristicSpec<T>, q: usize) -> Self {
        let table = (q <= TABLE_MAX_Q).then(|| (0..1u64 << q).map(|c| spec.eval_code(c, q)).collect());
        Self { spec, q, table }
    }

    #[inline]
    pub fn eval(&self, code: u64) -> T {
        match &self.table {
            Some(t) => t[code as usize],
            None => self.spec.eval_code(code, self.q),
        }
    }

    pub fn spec(&self) -> &CharacteristicSpec<T> {
        &self.spec
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Exhaustive,
    MonteCarlo { samples: usize },
}

/// First and second moments of a characteristic function over random states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate<T> {
    pub mean: T,
    pub second_moment: T,
    /// `second_moment - mean^2`, clamped at zero.
    pub variance: T,
    pub method: MomentMethod,
}

impl<T: Scalar> MomentEstimate<T> {
    fn from_sums(mean: f64, second: f64, method: MomentMethod) -> Self {
        Self {
            mean: T::of(mean),
            second_moment: T::of(second),
            variance: T::of((second - mean * mean).max(0.0)),
            method,
        }
    }
}

/// Moments of `f` when each internal bit is independently 0 with probability
/// `rho`. Exhaustive for `q <= 20`, Monte Carlo with `samples` draws (default
/// [`DEFAULT_MOMENT_SAMPLES`]) above that.
pub fn estimate_moments<T: Scalar>(
    spec: &CharacteristicSpec<T>,
    q: usize,
    rho: f64,
    seed: RunSeed,
    samples: Option<usize>,
) -> Result<MomentEstimate<T>> {
    check_probability("rho", rho)?;
    if q == 0 || q > 64 {
        return Err(invalid("q", format!("{q} is outside 1..=64")));
    }
    spec.validate(q)?;
    if q <= EXHAUSTIVE_MAX_Q {
        Ok(exhaustive_moments(spec, q, rho))
    } else {
        let n = samples.unwrap_or(DEFAULT_MOMENT_SAMPLES);
        if n == 0 {
            return Err(invalid("samples", "must be positive"));
        }
        Ok(monte_carlo_moments(spec, q, rho, seed, n))
    }
}

pub(crate) fn exhaustive_moments<T: Scalar>(
    spec: &CharacteristicSpec<T>,
    q: usize,
    rho: f64,
) -> MomentEstimate<T> {
    // weight of a code with k ones: rho^(q-k) (1-rho)^k
    let weights: Vec<f64> = (0..=q)
        .map(|k| rho.powi((q - k) as i32) * (1.0 - rho).powi(k as i32))
        .collect();
    let (mut m1, mut m2) = (0.0, 0.0);
    for code in 0..1u64 << q {
        let w = weights[code.count_ones() as usize];
        let f = spec.eval_code(code, q).as_f64();
        m1 += w * f;
        m2 += w * f * f;
    }
    MomentEstimate::from_sums(m1, m2, MomentMethod::Exhaustive)
}

pub(crate) fn monte_carlo_moments<T: Scalar>(
    spec: &CharacteristicSpec<T>,
    q: usize,
    rho: f64,
    seed: RunSeed,
    samples: usize,
) -> MomentEstimate<T> {
    let mut rng = seed.rng(&[crate::experiments::stream::MOMENTS]);
    let (mut m1, mut m2) = (0.0, 0.0);
    for _ in 0..samples {
        let mut code = 0u64;
        for a in 0..q {
            if rng.random::<f64>() >= rho {
                code |= 1 << a;
            }
        }
        let f = spec.eval_code(code, q).as_f64();
        m1 += f;
        m2 += f * f;
    }
    let n = samples as f64;
    MomentEstimate::from_sums(m1 / n, m2 / n, MomentMethod::MonteCarlo { samples })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Outcome of the three admissibility conditions:
/// `|<f>| << sqrt(N)`, `<f^2> << N`, and `<f^2> - <f>^2 != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub cond1: ConditionCheck,
    pub cond2: ConditionCheck,
    pub cond3: ConditionCheck,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.cond1.pass && self.cond2.pass && self.cond3.pass
    }
}

/// Checks the admissibility conditions with "much less than" read as
/// `<= c * bound`.
pub fn check_conditions<T: Scalar>(
    moments: &MomentEstimate<T>,
    n: usize,
    c: f64,
) -> Result<ConditionReport> {
    if n < 2 {
        return Err(invalid("n", "at least two neurons are required"));
    }
    let n = n as f64;
    let mean = moments.mean.as_f64().abs();
    let second = moments.second_moment.as_f64();
    let var = moments.variance.as_f64();
    let b1 = c * n.sqrt();
    let b2 = c * n;
    Ok(ConditionReport {
        cond1: ConditionCheck {
            value: mean,
            bound: b1,
            pass: mean <= b1,
        },
        cond2: ConditionCheck {
            value: second,
            bound: b2,
            pass: second <= b2,
        },
        cond3: ConditionCheck {
            value: var,
            bound: VARIANCE_EPSILON,
            pass: var > VARIANCE_EPSILON,
        },
    })
}

fn parse_template(body: &str) -> std::result::Result<Vec<bool>, String> {
    body.chars()
        .filter(|c| !matches!(c, ',' | ' '))
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(format!("template digit `{other}` is not 0 or 1")),
        })
        .collect()
}

fn parse_reals<T: Scalar>(body: &str) -> std::result::Result<Vec<T>, String> {
    body.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map(T::of)
                .map_err(|e| format!("`{}`: {e}", tok.trim()))
        })
        .collect()
}

impl<T: Scalar> FromStr for CharacteristicSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = match s.split_once(':') {
            Some((k, b)) => (k.trim(), Some(b.trim())),
            None => (s, None),
        };
        let fail = |reason: String| Error::ParseCharacteristic {
            input: s.to_string(),
            reason,
        };
        let need = |payload: &'static str| {
            body.filter(|b| !b.is_empty()).ok_or(Error::MissingPayload {
                kind: match kind {
                    "linear" => "linear",
                    "correlation" => "correlation",
                    "grandmother" => "grandmother",
                    _ => "table",
                },
                payload,
            })
        };
        let spec = match kind {
            "parity" | "xor" => Self::Parity,
            "io-code" | "iocode" => Self::IoCode,
            "linear" => Self::Linear {
                coefficients: parse_reals(need("coefficients")?).map_err(fail)?,
            },
            "correlation" => Self::Correlation {
                template: parse_template(need("template")?).map_err(fail)?,
            },
            "grandmother" => Self::Grandmother {
                template: parse_template(need("template")?).map_err(fail)?,
            },
            "table" | "boolean-table" => Self::BooleanTable {
                table: parse_reals(need("table")?).map_err(fail)?,
            },
            other => return Err(fail(format!("unknown kind `{other}`"))),
        };
        match (&spec, body) {
            (Self::Parity | Self::IoCode, Some(_)) => {
                Err(fail(format!("`{kind}` takes no payload")))
            }
            _ => Ok(spec),
        }
    }
}

impl<T: Scalar> fmt::Display for CharacteristicSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits = |t: &[bool]| t.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        let reals = |v: &[T]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Self::Parity => write!(f, "parity"),
            Self::IoCode => write!(f, "io-code"),
            Self::Linear { coefficients } => write!(f, "linear:{}", reals(coefficients)),
            Self::Correlation { template } => write!(f, "correlation:{}", bits(template)),
            Self::Grandmother { template } => write!(f, "grandmother:{}", bits(template)),
            Self::BooleanTable { table } => write!(f, "table:{}", reals(table)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Spec = CharacteristicSpec<f64>;

    fn unpack(code: u64, q: usize) -> Vec<bool> {
        (0..q).map(|a| code >> a & 1 == 1).collect()
    }

    #[test]
    fn parity_truth_table() {
        let p = Spec::Parity;
        assert_eq!(p.eval_bits(&[false, true]), 1.0);
        assert_eq!(p.eval_bits(&[true, true]), 0.0);
        assert_eq!(p.eval_bits(&[false, false]), 0.0);
    }

    #[test]
    fn io_code_reads_binary_value() {
        assert_eq!(Spec::IoCode.eval_bits(&[true, true]), 3.0);
        assert_eq!(Spec::IoCode.eval_bits(&[false, true]), 2.0);
    }

    #[test]
    fn correlation_extremes() {
        let t = vec![true, false, true, true];
        let c = Spec::Correlation { template: t.clone() };
        assert_eq!(c.eval_bits(&t), 0.75);
        assert_eq!(c.eval_bits(&[false; 4]), 0.0);
        let all = Spec::Correlation { template: vec![true; 3] };
        assert_eq!(all.eval_bits(&[true; 3]), 1.0);
    }

    #[test]
    fn grandmother_is_kronecker_delta() {
        let g = Spec::Grandmother { template: vec![true, false, true] };
        assert_eq!(g.eval_bits(&[true, false, true]), 1.0);
        assert_eq!(g.eval_bits(&[true, true, true]), 0.0);
    }

    #[test]
    fn linear_continuous() {
        let l = Spec::Linear { coefficients: vec![0.3, 0.4] };
        assert!((l.eval_continuous(&[1.0, 1.0]).unwrap() - 0.7).abs() < 1e-15);
        let r = eval_characteristic(&l, &[true, true], Some(&[1.0, 1.0])).unwrap();
        assert!((r - 0.7).abs() < 1e-15);
    }

    #[test]
    fn continuous_rejected_for_discrete_kinds() {
        let err = eval_characteristic(&Spec::Parity, &[true, false], Some(&[0.5, 0.5]));
        assert_eq!(err, Err(Error::ContinuousNotLinear("parity")));
    }

    #[test]
    fn payload_validation() {
        assert!(matches!(
            Spec::Linear { coefficients: vec![] }.validate(2),
            Err(Error::MissingPayload { .. })
        ));
        assert!(matches!(
            Spec::BooleanTable { table: vec![0.0; 3] }.validate(2),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Spec::BooleanTable { table: vec![0.0; 4] }.validate(2).is_ok());
        assert!(matches!(
            Spec::Grandmother { template: vec![true] }.validate(2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn parity_q2_moments() {
        let m: MomentEstimate<f64> =
            estimate_moments(&Spec::Parity, 2, 0.5, RunSeed::new(0), None).unwrap();
        assert_eq!(m.method, MomentMethod::Exhaustive);
        assert!((m.mean - 0.5).abs() < 1e-15);
        assert!((m.variance - 0.25).abs() < 1e-15);
    }

    #[test]
    fn parity_q3_biased_moments_match_hand_enumeration() {
        // P(bit = 1) = 0.25. Odd-weight states: three with one set bit
        // (3 * 0.25 * 0.75^2 = 0.421875) and one with three (0.25^3 = 0.015625).
        let mean = 0.421875 + 0.015625;
        let m: MomentEstimate<f64> =
            estimate_moments(&Spec::Parity, 3, 0.75, RunSeed::new(0), None).unwrap();
        assert!((m.mean - mean).abs() < 1e-15);
        assert!((m.second_moment - mean).abs() < 1e-15);
        assert!((m.variance - mean * (1.0 - mean)).abs() < 1e-15);
    }

    #[test]
    fn constant_table_has_zero_variance() {
        let c = Spec::BooleanTable { table: vec![0.7; 8] };
        let m: MomentEstimate<f64> = estimate_moments(&c, 3, 0.3, RunSeed::new(0), None).unwrap();
        assert!((m.mean - 0.7).abs() < 1e-14);
        assert_eq!(m.variance, 0.0);
        let r = check_conditions(&m, 100, 0.1).unwrap();
        assert!(!r.cond3.pass);
    }

    #[test]
    fn monte_carlo_above_switchover() {
        let m: MomentEstimate<f64> =
            estimate_moments(&Spec::Parity, 24, 0.5, RunSeed::new(3), Some(20_000)).unwrap();
        assert_eq!(m.method, MomentMethod::MonteCarlo { samples: 20_000 });
        assert!((m.mean - 0.5).abs() < 4.0 * (0.25f64 / 20_000.0).sqrt());
    }

    #[test]
    fn rho_out_of_range_rejected() {
        assert!(estimate_moments::<f64>(&Spec::Parity, 2, 1.0, RunSeed::new(0), None).is_err());
        assert!(estimate_moments::<f64>(&Spec::Parity, 2, 0.0, RunSeed::new(0), None).is_err());
    }

    #[test]
    fn parity_conditions_pass() {
        let m: MomentEstimate<f64> =
            estimate_moments(&Spec::Parity, 2, 0.5, RunSeed::new(0), None).unwrap();
        let r = check_conditions(&m, 100, DEFAULT_CONDITION_FACTOR).unwrap();
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn bounded_linear_conditions_pass() {
        let l = Spec::Linear { coefficients: vec![0.5, -0.2, 0.3] };
        let m: MomentEstimate<f64> = estimate_moments(&l, 3, 0.5, RunSeed::new(0), None).unwrap();
        let r = check_conditions(&m, 100, 0.1).unwrap();
        assert!(r.cond1.pass && r.cond2.pass && r.cond3.pass);
    }

    #[test]
    fn conditions_need_two_neurons() {
        let m: MomentEstimate<f64> =
            estimate_moments(&Spec::Parity, 2, 0.5, RunSeed::new(0), None).unwrap();
        assert!(check_conditions(&m, 1, 0.1).is_err());
    }

    #[test]
    fn text_form() {
        for s in ["parity", "io-code", "linear:0.3,-0.4", "correlation:101", "grandmother:01", "table:0,1,1,0.5"] {
            let spec: Spec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("linear".parse::<Spec>().is_err());
        assert!("parity:1".parse::<Spec>().is_err());
        assert!("correlation:12".parse::<Spec>().is_err());
        assert!("sine".parse::<Spec>().is_err());
    }

    fn arb_spec(q: usize) -> impl Strategy<Value = Spec> {
        prop_oneof![
            Just(Spec::Parity),
            Just(Spec::IoCode),
            prop::collection::vec(-5.0..5.0f64, q).prop_map(|c| Spec::Linear { coefficients: c }),
            prop::collection::vec(any::<bool>(), q).prop_map(|t| Spec::Correlation { template: t }),
            prop::collection::vec(any::<bool>(), q).prop_map(|t| Spec::Grandmother { template: t }),
            prop::collection::vec(0.0..1.0f64, 1 << q).prop_map(|t| Spec::BooleanTable { table: t }),
        ]
    }

    #[test]
    fn exhaustive_and_monte_carlo_agree() {
        use rand::Rng;
        let mut rng = RunSeed::new(11).rng(&[0]);
        for q in 1..=10usize {
            for round in 0..6u64 {
                let spec = match round {
                    0 => Spec::Parity,
                    1 => Spec::IoCode,
                    2 => Spec::Linear { coefficients: (0..q).map(|_| rng.random_range(-2.0..2.0)).collect() },
                    3 => Spec::Correlation { template: (0..q).map(|_| rng.random()).collect() },
                    4 => Spec::Grandmother { template: vec![false; q] },
                    _ => Spec::BooleanTable { table: (0..1 << q).map(|_| rng.random()).collect() },
                };
                let rho = rng.random_range(0.1..0.9);
                let samples = 20_000;
                let ex = exhaustive_moments(&spec, q, rho);
                let mc = monte_carlo_moments(&spec, q, rho, RunSeed::new(q as u64 * 10 + round), samples);
                let tol = 4.0 * (ex.variance / samples as f64).sqrt() + 1e-12;
                assert!((ex.mean - mc.mean).abs() <= tol, "{spec}: ex {} mc {} tol {tol}", ex.mean, mc.mean);
            }
        }
    }

    proptest! {
        #[test]
        fn text_round_trip(spec in (1usize..6).prop_flat_map(arb_spec)) {
            let back: Spec = spec.to_string().parse().unwrap();
            prop_assert_eq!(back, spec);
        }

        #[test]
        fn packed_and_slice_evaluation_agree(
            (q, spec, code) in (1usize..8).prop_flat_map(|q| (Just(q), arb_spec(q), 0u64..(1u64 << q)))
        ) {
            let bits = unpack(code, q);
            let a = spec.eval_bits(&bits);
            let b = spec.eval_code(code, q);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            prop_assert_eq!(CodeTable::new(spec.clone(), q).eval(code), b);
        }

        #[test]
        fn squashing_kinds_stay_in_unit_interval(
            (q, spec, code) in (1usize..8).prop_flat_map(|q| (Just(q), arb_spec(q), 0u64..(1u64 << q)))
        ) {
            if spec.is_squashing() {
                let v = spec.eval_code(code, q);
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }

        #[test]
        fn even_parity_is_flip_invariant(half in 1usize..16, code in any::<u64>()) {
            let q = 2 * half;
            let mask = if q == 64 { u64::MAX } else { (1u64 << q) - 1 };
            let c = code & mask;
            prop_assert_eq!(Spec::Parity.eval_code(c, q), Spec::Parity.eval_code(!c & mask, q));
        }
    }
}
