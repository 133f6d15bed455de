//! Replica-symmetric storage capacity of the attractor network.
//!
//! Notation: `phi(y)` is the standard normal density, `Phi(y)` its CDF and
//! `Phic(y) = 1 - Phi(y) = erfc(y / sqrt 2) / 2`.
//!
//! Unbiased margins, no intra-neuron couplings: `x` solves
//!
//! ```text
//! (2 rho - 1) [phi(x) - x Phic(x)] = (1 - rho) x
//! alpha_c = 1 / [1 - rho + (2 rho - 1) Phic(x)]
//! E       = H2(rho) alpha_c
//! ```
//!
//! General case with margin `K` and load ratio `lambda = Q/N`: `V` solves
//! `rho g(K - V) = (1 - rho) g(K + V)` with `g(y) = phi(y) + y Phi(y)`, and
//!
//! ```text
//! 1/alpha_c = [rho h(K - V) + (1 - rho) h(K + V)] (1 + lambda r) / (1 + lambda sqrt r)^2
//! h(y)      = y phi(y) + (1 + y^2) Phi(y)
//! r         = rho (1 - rho) / var_phi
//! E         = H2(rho) alpha_c / (1 + lambda)
//! ```
//!
//! Both residuals are strictly decreasing in the unknown, so each equation has
//! exactly one root.

pub mod erfc;

use crate::error::{check_probability, invalid, Error, Result};
use crate::scalar::Scalar;

pub use self::erfc::erfc_f64;

/// Residual tolerance used when the caller has no preference.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Bisection stops and Newton takes over once the bracket is this narrow.
const BISECT_WIDTH: f64 = 1e-6;
const MAX_NEWTON: usize = 100;
const MAX_BRACKET: f64 = 1e6;

/// Default tolerance for `T`: [`DEFAULT_TOL`], loosened to a few hundred ulp
/// for `f32`.
pub fn default_tol<T: Scalar>() -> T {
    T::of(DEFAULT_TOL).max(T::epsilon() * T::of(256.0))
}

fn gauss<T: Scalar>(y: T) -> T {
    (-(y * y) / T::of(2.0)).exp() / (T::PI() * T::of(2.0)).sqrt()
}

/// Upper normal tail `P(Z > y)`.
fn upper_tail<T: Scalar>(y: T) -> T {
    (y / T::SQRT_2()).erfc() / T::of(2.0)
}

/// Normal CDF `P(Z < y)`.
fn lower_tail<T: Scalar>(y: T) -> T {
    (-y / T::SQRT_2()).erfc() / T::of(2.0)
}

/// Binary entropy `-rho log2 rho - (1 - rho) log2 (1 - rho)` in bits.
pub fn entropy_bits<T: Scalar>(rho: T) -> Result<T> {
    check_probability("rho", rho.as_f64())?;
    let one = T::one();
    Ok(-(rho * rho.log2()) - (one - rho) * (one - rho).log2())
}

/// Left minus right side of the simple-case equation for `x`.
pub fn aux_residual<T: Scalar>(rho: T, x: T) -> T {
    let one = T::one();
    let two = T::of(2.0);
    (two * rho - one) * (gauss(x) - x * upper_tail(x)) - (one - rho) * x
}

fn aux_derivative<T: Scalar>(rho: T, x: T) -> T {
    let one = T::one();
    -(T::of(2.0) * rho - one) * upper_tail(x) - (one - rho)
}

/// Root of a strictly decreasing function: bracket expansion around zero,
/// bisection down to [`BISECT_WIDTH`], Newton polish, plain bisection as the
/// fallback whenever a Newton step leaves the bracket.
fn solve_decreasing<T: Scalar>(
    equation: &'static str,
    start: T,
    tol: T,
    f: impl Fn(T) -> T,
    df: impl Fn(T) -> T,
) -> Result<T> {
    if !(tol > T::zero()) {
        return Err(invalid("tol", "must be positive"));
    }
    let two = T::of(2.0);
    let (mut lo, mut hi) = (-start, start);
    while !(f(lo) >= T::zero() && f(hi) <= T::zero()) {
        if hi.as_f64() > MAX_BRACKET {
            return Err(Error::RootBracket {
                equation,
                lo: lo.as_f64(),
                hi: hi.as_f64(),
            });
        }
        lo = lo * two;
        hi = hi * two;
    }

    let width = T::of(BISECT_WIDTH);
    while hi - lo > width {
        let mid = (lo + hi) / two;
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut x = (lo + hi) / two;
    let mut newton_ok = false;
    for _ in 0..MAX_NEWTON {
        let r = f(x);
        if r == T::zero() {
            return Ok(x);
        }
        if r > T::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let next = x - r / d;
        if !(next >= lo && next <= hi) {
            break;
        }
        let settled = (next - x).abs() <= T::epsilon() * T::of(4.0) * x.abs().max(T::one());
        x = next;
        if settled {
            newton_ok = true;
            break;
        }
    }

    if !newton_ok || !(f(x).abs() < tol) {
        loop {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid);
            if fm == T::zero() {
                lo = mid;
                hi = mid;
                break;
            }
            if fm > T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x = if f(lo).abs() <= f(hi).abs() { lo } else { hi };
    }

    let residual = f(x);
    if residual.abs() < tol {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            equation,
            residual: residual.as_f64(),
            tol: tol.as_f64(),
        })
    }
}

/// Unique real root `x` of the simple-case equation.
pub fn solve_aux<T: Scalar>(rho: T, tol: T) -> Result<T> {
    check_probability("rho", rho.as_f64())?;
    solve_decreasing(
        "simple capacity equation",
        T::one(),
        tol,
        |x| aux_residual(rho, x),
        |x| aux_derivative(rho, x),
    )
}

/// Output of the capacity equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitySolution<T> {
    /// `x` for the simple case, `V` for the general case.
    pub root: T,
    /// Critical load `P_c / N`.
    pub alpha_c: T,
    /// Bits per weight.
    pub e_bits: T,
    /// Bits per weight at `lambda = 0`.
    pub e0_bits: T,
}

/// Capacity for unbiased margins and independent internal variables.
pub fn capacity_simple<T: Scalar>(rho: T) -> Result<CapacitySolution<T>> {
    let x = solve_aux(rho, default_tol())?;
    let one = T::one();
    let alpha_c = one / (one - rho + (T::of(2.0) * rho - one) * upper_tail(x));
    let e = entropy_bits(rho)? * alpha_c;
    Ok(CapacitySolution {
        root: x,
        alpha_c,
        e_bits: e,
        e0_bits: e,
    })
}

/// Inputs of the general capacity equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityParams<T> {
    pub rho: T,
    /// `Q / N`.
    pub lambda: T,
    /// Raw margin demand.
    pub kappa: T,
    /// Variance of the characteristic function at the stored patterns.
    pub var_phi: T,
    /// Normalized margin `kappa / [var_phi + rho (1 - rho)]`.
    pub k: T,
}

impl<T: Scalar> CapacityParams<T> {
    pub fn new(rho: T, lambda: T, kappa: T, var_phi: T) -> Result<Self> {
        let k = kappa / (var_phi + rho * (T::one() - rho));
        let p = Self {
            rho,
            lambda,
            kappa,
            var_phi,
            k,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters given the normalized margin `K` directly.
    pub fn with_k(rho: T, lambda: T, k: T, var_phi: T) -> Result<Self> {
        let kappa = k * (var_phi + rho * (T::one() - rho));
        let p = Self {
            rho,
            lambda,
            kappa,
            var_phi,
            k,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("rho", self.rho.as_f64())?;
        if !(self.lambda >= T::zero()) || !self.lambda.is_finite() {
            return Err(invalid("lambda", "must be a finite nonnegative number"));
        }
        if !(self.kappa >= T::zero()) || !self.kappa.is_finite() {
            return Err(invalid("kappa", "must be a finite nonnegative number"));
        }
        if !(self.var_phi > T::zero()) || !self.var_phi.is_finite() {
            return Err(invalid("var_phi", "must be positive"));
        }
        Ok(())
    }

    /// `rho (1 - rho) / var_phi`.
    pub fn fluctuation_ratio(&self) -> T {
        self.rho * (T::one() - self.rho) / self.var_phi
    }
}

fn g_aux<T: Scalar>(y: T) -> T {
    gauss(y) + y * lower_tail(y)
}

fn h_alpha<T: Scalar>(y: T) -> T {
    y * gauss(y) + (T::one() + y * y) * lower_tail(y)
}

/// Left minus right side of the general equation for `V`.
pub fn gen_aux_residual<T: Scalar>(params: &CapacityParams<T>, v: T) -> T {
    let (rho, k) = (params.rho, params.k);
    rho * g_aux(k - v) - (T::one() - rho) * g_aux(k + v)
}

/// Unique real root `V` of the general equation.
pub fn solve_gen_aux<T: Scalar>(params: &CapacityParams<T>, tol: T) -> Result<T> {
    params.validate()?;
    let (rho, k) = (params.rho, params.k);
    solve_decreasing(
        "general capacity equation",
        T::of(10.0) + k,
        tol,
        |v| gen_aux_residual(params, v),
        |v| -(rho * lower_tail(k - v)) - (T::one() - rho) * lower_tail(k + v),
    )
}

/// Critical load and bits per weight for the general case.
pub fn alpha_critical<T: Scalar>(params: &CapacityParams<T>) -> Result<CapacitySolution<T>> {
    let v = solve_gen_aux(params, default_tol())?;
    let (rho, k, lambda) = (params.rho, params.k, params.lambda);
    let one = T::one();
    let base = rho * h_alpha(k - v) + (one - rho) * h_alpha(k + v);
    let r = params.fluctuation_ratio();
    let gain = (one + lambda * r.sqrt()).powi(2) / (one + lambda * r);
    let alpha_c = gain / base;
    let h2 = entropy_bits(rho)?;
    Ok(CapacitySolution {
        root: v,
        alpha_c,
        e_bits: h2 * alpha_c / (one + lambda),
        e0_bits: h2 / base,
    })
}

/// Bits per weight with intra-neuron couplings, relative to the simple case.
pub fn capacity_interacting<T: Scalar>(rho: T, lambda: T, var_phi: T) -> Result<T> {
    CapacityParams::new(rho, lambda, T::zero(), var_phi)?;
    let e0 = capacity_simple(rho)?.e_bits;
    let one = T::one();
    let r = rho * (one - rho) / var_phi;
    Ok(e0 * (one + lambda * r.sqrt()).powi(2) / ((one + lambda) * (one + lambda * r)))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // 50-digit arbitrary-precision references
    const X_075: f64 = 0.436_326_563_793_651_588_758_623_030_672_768_302_465_288_383_316_61;
    const E_075: f64 = 1.951_830_185_207_807_986_228_500_572_815_275_001_510_176_688_054_8;
    const A_075: f64 = 2.405_870_596_485_100_994_869_384_717_174_451_599_215_323_255_512_2;
    const X_09: f64 = 0.861_592_112_415_828_811_672_776_174_592_062_707_926_591_540_163_72;
    const E_09: f64 = 1.835_133_727_615_349_749_999_422_480_296_512_419_793_383_633_176_9;
    const A_09: f64 = 3.912_901_853_876_375_693_154_366_309_364_494_914_841_481_202_491_8;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn unbiased_root_is_zero() {
        assert_eq!(solve_aux(0.5, 1e-12).unwrap(), 0.0);
        let s = capacity_simple(0.5_f64).unwrap();
        assert_eq!(s.alpha_c, 2.0);
        assert!((s.e_bits - 2.0).abs() < 1e-15);
    }

    #[test]
    fn simple_case_oracle() {
        let s = capacity_simple(0.75).unwrap();
        assert!(close(s.root, X_075, 1e-12));
        assert!(close(s.e_bits, E_075, 1e-12));
        assert!(close(s.alpha_c, A_075, 1e-12));
        let s = capacity_simple(0.9).unwrap();
        assert!(close(s.root, X_09, 1e-12));
        assert!(close(s.e_bits, E_09, 1e-12));
        assert!(close(s.alpha_c, A_09, 1e-12));
        let s = capacity_simple(0.1).unwrap();
        assert!(close(s.root, -X_09, 1e-12));
        assert!(close(s.e_bits, E_09, 1e-12));
    }

    #[test]
    fn residual_changes_sign() {
        assert!(aux_residual(0.9, -1e-9) > 0.0);
        assert!(aux_residual(0.9, 50.0) < 0.0);
    }

    #[test]
    fn residual_small_and_monotone() {
        for k in 1..20 {
            let rho = k as f64 * 0.05;
            let x = solve_aux(rho, 1e-12).unwrap();
            assert!(aux_residual(rho, x).abs() < 1e-12);
            let mut prev = f64::INFINITY;
            for s in -200..=200 {
                let r = aux_residual(rho, x + s as f64 * 0.05);
                assert!(r < prev);
                prev = r;
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &(rho, x) in &[(0.3, 0.2), (0.75, 1.1), (0.95, -0.7)] {
            let h = 1e-6;
            let fd: f64 = (aux_residual(rho, x + h) - aux_residual(rho, x - h)) / (2.0 * h);
            assert!((fd - aux_derivative(rho, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn bound_over_grid() {
        for k in 1..20 {
            let e = capacity_simple(k as f64 * 0.05).unwrap().e_bits;
            assert!(e > 0.0 && e <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn degenerate_rho_rejected() {
        assert!(capacity_simple(0.0).is_err());
        assert!(capacity_simple(1.0).is_err());
        assert!(solve_aux(f64::NAN, 1e-12).is_err());
        assert!(entropy_bits(1.0).is_err());
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        match solve_aux(0.7_f32, 1e-12) {
            Err(Error::NoConvergence { .. }) | Ok(_) => {}
            Err(e) => panic!("unexpected {e}"),
        }
        assert!(solve_aux(0.7, 0.0).is_err());
    }

    #[test]
    fn general_oracle() {
        let p = CapacityParams::with_k(0.8, 0.0, 0.5, 0.25).unwrap();
        let s = alpha_critical(&p).unwrap();
        assert!(close(s.root, 0.688_924_816_594_079_767_215_719_117_288_573_254_006_961_626_206_855, 1e-12));
        assert!(close(s.alpha_c, 1.305_693_539_788_335_868_403_378_282_707_734_707_682_766_102_760_22, 1e-12));
        assert!(close(s.e_bits, 0.942_616_849_686_129_761_973_971_762_843_459_817_159_066_719_628_475, 1e-12));

        let p = CapacityParams::with_k(0.7, 0.1, 0.3, 0.25).unwrap();
        let s = alpha_critical(&p).unwrap();
        assert!(close(s.root, 0.386_910_092_431_260_426_864_114_084_150_914_117_058_360_499_317_272_95, 1e-12));
        assert!(close(s.alpha_c, 1.566_311_935_442_136_277_252_374_366_446_919_096_684_702_255_073_662, 1e-12));
        assert!(close(s.e_bits, 1.254_887_685_510_515_312_367_444_268_046_334_222_098_908_479_919_553, 1e-12));

        let p = CapacityParams::with_k(0.5, 0.0, 1.0, 0.25).unwrap();
        let s = alpha_critical(&p).unwrap();
        assert_eq!(s.root, 0.0);
        assert!(close(s.alpha_c, 0.519_572_229_604_937_969_487_655_964_869_173_728_270_958_957_731_700, 1e-12));
    }

    #[test]
    fn general_unbiased_is_symmetric() {
        for k in [0.0, 0.3, 1.0, 4.0] {
            let p = CapacityParams::with_k(0.5, 0.2, k, 0.1).unwrap();
            assert_eq!(solve_gen_aux(&p, 1e-12).unwrap(), 0.0);
        }
    }

    #[test]
    fn general_reduces_to_simple() {
        for k in 1..20 {
            let rho = k as f64 * 0.05;
            let simple = capacity_simple(rho).unwrap();
            let general = alpha_critical(&CapacityParams::new(rho, 0.0, 0.0, 0.25).unwrap()).unwrap();
            assert!((general.root - simple.root).abs() < 1e-10);
            assert!((general.e_bits - simple.e_bits).abs() < 1e-8);
            assert!((general.alpha_c - simple.alpha_c).abs() < 1e-8);
        }
    }

    #[test]
    fn margin_lowers_capacity() {
        for rho in [0.3, 0.5, 0.8] {
            let mut prev = f64::INFINITY;
            for k in 0..=16 {
                let p = CapacityParams::with_k(rho, 0.0, k as f64 * 0.25, 0.25).unwrap();
                let a = alpha_critical(&p).unwrap().alpha_c;
                assert!(a <= prev);
                prev = a;
            }
        }
        let k0 = alpha_critical(&CapacityParams::with_k(0.5_f64, 0.0, 0.0, 0.25).unwrap()).unwrap();
        assert!((k0.alpha_c - 2.0).abs() < 1e-12 && (k0.e_bits - 2.0).abs() < 1e-12);
    }

    #[test]
    fn k_definition() {
        let p = CapacityParams::new(0.7, 0.0, 0.6, 0.2).unwrap();
        assert_eq!(p.k, 0.6 / (0.2 + 0.7 * 0.3));
        assert!(CapacityParams::new(0.7, 0.0, 0.6, 0.0).is_err());
        assert!(CapacityParams::new(0.7, -0.1, 0.6, 0.2).is_err());
        assert!(CapacityParams::new(0.7, 0.0, -0.6, 0.2).is_err());
    }

    #[test]
    fn interacting_identity_and_penalty() {
        for k in 1..10 {
            let rho = k as f64 * 0.1;
            let e0 = capacity_simple(rho).unwrap().e_bits;
            assert_eq!(capacity_interacting(rho, 0.0, 0.17).unwrap(), e0);
            for lambda in [0.1, 0.5, 1.0, 2.0, 5.0] {
                let same = capacity_interacting(rho, lambda, rho * (1.0 - rho)).unwrap();
                assert!((same - e0).abs() < 1e-12);
                for var in [0.05, 0.5 * rho * (1.0 - rho), 2.0 * rho * (1.0 - rho), 1.0] {
                    assert!(capacity_interacting(rho, lambda, var).unwrap() < e0);
                }
            }
        }
    }

    #[test]
    fn interacting_matches_general_route() {
        // at K = 0 the general route carries the same lambda correction
        for &(rho, lambda, var) in &[(0.6, 0.5, 0.1), (0.3, 2.0, 0.4)] {
            let via_general = alpha_critical(&CapacityParams::new(rho, lambda, 0.0, var).unwrap()).unwrap();
            let direct: f64 = capacity_interacting(rho, lambda, var).unwrap();
            assert!((via_general.e_bits - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy_bits(0.5).unwrap(), 1.0);
        assert!((entropy_bits(0.25_f64).unwrap() - 0.811_278_124_459_132_8).abs() < 1e-15);
    }

    #[test]
    fn f32_path() {
        let s = capacity_simple(0.75_f32).unwrap();
        assert!((s.e_bits - E_075 as f32).abs() < 1e-5);
        let s = capacity_simple(0.5_f32).unwrap();
        assert!((s.e_bits - 2.0).abs() < 1e-6);
    }
}
