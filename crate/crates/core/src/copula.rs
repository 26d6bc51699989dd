//! Clayton copula primitives.
//!
//! The generator is `phi(u) = (u^-alpha - 1) / alpha`, and the Kendall
//! function of the family is `K(t) = t (alpha - t^alpha + 1) / alpha` with
//! density `k(t) = (alpha + 1)(1 - t^alpha) / alpha`. Every other routine here
//! (CDF, density, conditional CDF and its inverse) follows from that
//! generator.

use crate::error::{ClaycopError, Result};
use crate::rng::RandomStream;

/// Clamp margin for values that must stay strictly inside (0, 1).
pub const UNIT_EPS: f64 = 1e-12;

/// Absolute tolerance of [`kendall_inverse`]. Bisection continues past it
/// until the bracket stops shrinking, since the seed equation amplifies any
/// error in `K(t) - u` near `t = 0`.
pub const KENDALL_INVERSE_TOL: f64 = 1e-12;
pub const KENDALL_INVERSE_MAX_ITER: usize = 200;

/// The Clayton dependence parameter.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Alpha(value))
        } else {
            Err(ClaycopError::InvalidAlpha(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A value in (0, 1), clamped into `[UNIT_EPS, 1 - UNIT_EPS]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UnitValue(f64);

impl UnitValue {
    /// Accepts anything in the closed interval `[0, 1]` and clamps it.
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(UnitValue::clamped(value))
        } else {
            Err(ClaycopError::OutOfUnitInterval(value))
        }
    }

    #[inline]
    pub(crate) fn clamped(value: f64) -> Self {
        UnitValue(value.clamp(UNIT_EPS, 1.0 - UNIT_EPS))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPair {
    pub u1: UnitValue,
    pub u2: UnitValue,
}

impl UnitPair {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        Ok(UnitPair {
            u1: UnitValue::new(u1)?,
            u2: UnitValue::new(u2)?,
        })
    }
}

/// `log(u1^-alpha + u2^-alpha - 1)` without forming the powers.
fn log_copula_sum(alpha: f64, u1: f64, u2: f64) -> f64 {
    let a = -alpha * u1.ln();
    let b = -alpha * u2.ln();
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    // e^hi + e^lo - 1 = e^hi (1 + e^(lo-hi) - e^-hi); expm1 keeps the small-hi case exact
    if hi < 1.0 {
        (hi.exp_m1() + lo.exp_m1() + 1.0).ln()
    } else {
        hi + ((lo - hi).exp() - (-hi).exp()).ln_1p()
    }
}

/// Clayton generator `phi(u) = (u^-alpha - 1) / alpha` for `u` in (0, 1].
pub fn generator_phi(alpha: Alpha, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(ClaycopError::Domain(format!(
            "generator needs u in (0, 1], got {u}"
        )));
    }
    let a = alpha.value();
    Ok((-a * u.ln()).exp_m1() / a)
}

/// Copula CDF `C(u1, u2) = (u1^-alpha + u2^-alpha - 1)^(-1/alpha)`.
pub fn copula_cdf(alpha: Alpha, p: UnitPair) -> f64 {
    let a = alpha.value();
    (-log_copula_sum(a, p.u1.value(), p.u2.value()) / a).exp()
}

/// Copula density, evaluated in log space. Near the origin the density grows
/// like `1 / u`, so with clamped inputs it stays below about `1e12 (alpha + 1)`;
/// anything beyond the double range would saturate to `f64::INFINITY`.
pub fn copula_pdf(alpha: Alpha, p: UnitPair) -> f64 {
    let a = alpha.value();
    let (u1, u2) = (p.u1.value(), p.u2.value());
    let log_c = (a + 1.0).ln() - (a + 1.0) * (u1.ln() + u2.ln())
        - (1.0 / a + 2.0) * log_copula_sum(a, u1, u2);
    log_c.exp()
}

/// Conditional CDF of `U2` at `u2` given `U1 = given_u1`.
pub fn conditional_cdf(alpha: Alpha, u2: UnitValue, given_u1: UnitValue) -> f64 {
    let a = alpha.value();
    let u1 = given_u1.value();
    let log_v = -(1.0 / a + 1.0) * log_copula_sum(a, u1, u2.value()) - (a + 1.0) * u1.ln();
    log_v.exp().min(1.0)
}

/// Inverse of [`conditional_cdf`] in `u2`: the `u2` whose conditional CDF
/// given `u1` equals `v2`.
pub fn conditional_quantile(alpha: Alpha, v2: f64, given_u1: f64) -> f64 {
    let a = alpha.value();
    // u2 = [1 + u1^-a (v2^(-a/(a+1)) - 1)]^(-1/a)
    let log_u1_term = -a * given_u1.ln();
    let bump = (-(a / (a + 1.0)) * v2.ln()).exp_m1();
    let log_inner = if bump <= 0.0 {
        0.0
    } else {
        let log_prod = log_u1_term + bump.ln();
        if log_prod > 700.0 {
            log_prod + (-log_prod).exp().ln_1p()
        } else {
            log_prod.exp().ln_1p()
        }
    };
    (-log_inner / a).exp()
}

/// Draws one pair by conditional inversion: `u1 = v1`, `u2` is the
/// conditional quantile at `v2`. Returns the pair and the `(v1, v2)` seeds.
pub fn sample_pair_with_seeds(alpha: Alpha, stream: &mut RandomStream) -> (UnitPair, (f64, f64)) {
    let v1 = stream.uniform();
    let v2 = stream.uniform();
    let u1 = UnitValue::clamped(v1);
    let u2 = UnitValue::clamped(conditional_quantile(alpha, v2, u1.value()));
    (UnitPair { u1, u2 }, (v1, v2))
}

pub fn sample_pair(alpha: Alpha, stream: &mut RandomStream) -> UnitPair {
    sample_pair_with_seeds(alpha, stream).0
}

/// `m` independent pairs from the copula.
pub fn sample_pairs(alpha: Alpha, m: usize, stream: &mut RandomStream) -> Vec<UnitPair> {
    (0..m).map(|_| sample_pair(alpha, stream)).collect()
}

/// Kendall distribution function `K(t) = t (alpha - t^alpha + 1) / alpha`
/// on `[0, 1]`; 0 below and 1 above.
pub fn kendall_cdf(alpha: Alpha, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = alpha.value();
    t * (a - t.powf(a) + 1.0) / a
}

/// Kendall density `k(t) = (alpha + 1)(1 - t^alpha) / alpha` on `[0, 1]`.
pub fn kendall_pdf(alpha: Alpha, t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    let a = alpha.value();
    (a + 1.0) * (-(a * t.ln()).exp_m1()) / a
}

/// The `t` with `K(t) = u`, by bisection on `[0, 1]`.
pub fn kendall_inverse(alpha: Alpha, u: UnitValue) -> f64 {
    let target = u.value();
    let a = alpha.value();
    // t <= K(t) <= t (a+1)/a on [0, 1] brackets the root
    let mut lo = target * a / (a + 1.0);
    let mut hi = target;
    for _ in 0..KENDALL_INVERSE_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if kendall_cdf(alpha, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Population Kendall tau of the Clayton copula, `alpha / (alpha + 2)`.
pub fn kendall_tau(alpha: Alpha) -> f64 {
    let a = alpha.value();
    a / (a + 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(a: f64) -> Alpha {
        Alpha::new(a).unwrap()
    }

    fn pair(u1: f64, u2: f64) -> UnitPair {
        UnitPair::new(u1, u2).unwrap()
    }

    #[test]
    fn alpha_rejects_non_positive() {
        assert!(Alpha::new(0.0).is_err());
        assert!(Alpha::new(-1.0).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert!(Alpha::new(f64::INFINITY).is_err());
    }

    #[test]
    fn unit_value_clamps() {
        assert_eq!(UnitValue::new(0.0).unwrap().value(), UNIT_EPS);
        assert_eq!(UnitValue::new(1.0).unwrap().value(), 1.0 - UNIT_EPS);
        assert!(UnitValue::new(1.5).is_err());
        assert!(UnitValue::new(f64::NAN).is_err());
    }

    #[test]
    fn generator_values() {
        assert_eq!(generator_phi(al(1.0), 1.0).unwrap(), 0.0);
        assert!((generator_phi(al(1.0), 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((generator_phi(al(2.0), 0.5).unwrap() - 1.5).abs() < 1e-14);
        assert!(generator_phi(al(1.0), 0.0).is_err());
        assert!(generator_phi(al(1.0), -0.2).is_err());
    }

    #[test]
    fn generator_recovers_cdf() {
        // C = phi^-1(phi(u1) + phi(u2)), phi^-1(s) = (1 + a s)^(-1/a)
        for &a in &[0.8, 1.7, 3.0, 5.0] {
            let s = generator_phi(al(a), 0.3).unwrap() + generator_phi(al(a), 0.6).unwrap();
            let c = (1.0 + a * s).powf(-1.0 / a);
            assert!((c - copula_cdf(al(a), pair(0.3, 0.6))).abs() < 1e-13);
        }
    }

    #[test]
    fn cdf_values() {
        assert!((copula_cdf(al(1.0), pair(1.0, 0.3)) - 0.3).abs() < 1e-12);
        assert!((copula_cdf(al(1.0), pair(0.5, 0.5)) - 1.0 / 3.0).abs() < 1e-14);
        assert!((copula_cdf(al(2.0), pair(0.5, 0.5)) - 1.0 / 7f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn cdf_uniform_margins() {
        for &a in &[0.8, 1.7, 3.0, 5.0] {
            for i in 1..100 {
                let u = i as f64 / 100.0;
                assert!((copula_cdf(al(a), pair(u, 1.0)) - u).abs() < 1e-12);
                assert!((copula_cdf(al(a), pair(1.0, u)) - u).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pdf_closed_form() {
        assert!((copula_pdf(al(1.0), pair(0.5, 0.5)) - 32.0 / 27.0).abs() < 1e-13);
    }

    fn mixed_difference(a: f64, u1: f64, u2: f64, h: f64) -> f64 {
        let c = |x: f64, y: f64| copula_cdf(al(a), pair(x, y));
        (c(u1 + h, u2 + h) - c(u1 + h, u2 - h) - c(u1 - h, u2 + h) + c(u1 - h, u2 - h))
            / (4.0 * h * h)
    }

    #[test]
    fn pdf_matches_mixed_difference() {
        let fd = mixed_difference(2.0, 0.5, 0.5, 1e-4);
        let pdf = copula_pdf(al(2.0), pair(0.5, 0.5));
        assert!(((fd - pdf) / pdf).abs() < 1e-5, "fd {fd} pdf {pdf}");
        let fd = mixed_difference(1.0, 0.9, 0.9, 1e-4);
        let pdf = copula_pdf(al(1.0), pair(0.9, 0.9));
        assert!(((fd - pdf) / pdf).abs() < 1e-5, "fd {fd} pdf {pdf}");
    }

    #[test]
    fn pdf_interior_grid() {
        for &a in &[0.8, 1.7, 3.0, 5.0] {
            for i in 1..10 {
                for j in 1..10 {
                    let (u1, u2) = (i as f64 / 10.0, j as f64 / 10.0);
                    let fd = mixed_difference(a, u1, u2, 1e-4);
                    let pdf = copula_pdf(al(a), pair(u1, u2));
                    assert!(((fd - pdf) / pdf).abs() < 1e-5, "a={a} ({u1},{u2})");
                }
            }
        }
    }

    #[test]
    fn pdf_saturates_near_origin() {
        for &a in &[0.8, 5.0, 100.0] {
            let v = copula_pdf(al(a), pair(0.0, 0.0));
            assert!(v.is_finite() && v > 1e11, "a={a} pdf={v}");
        }
    }

    #[test]
    fn conditional_values() {
        let one = UnitValue::new(1.0).unwrap();
        let half = UnitValue::new(0.5).unwrap();
        assert!((conditional_cdf(al(1.0), one, half) - 1.0).abs() < 1e-11);
        assert!((conditional_cdf(al(1.0), half, half) - 4.0 / 9.0).abs() < 1e-14);
        // [1 + 4 (2^(2/3) - 1)]^(-1/2)
        let u2 = conditional_quantile(al(2.0), 0.5, 0.5);
        let expected = (1.0 + 4.0 * (2f64.powf(2.0 / 3.0) - 1.0)).powf(-0.5);
        assert!((u2 - expected).abs() < 1e-14, "{u2}");
        assert!((u2 - 0.546391).abs() < 1e-6, "{u2}");
        let back = conditional_cdf(al(2.0), UnitValue::new(u2).unwrap(), half);
        assert!((back - 0.5).abs() < 1e-12);
    }

    #[test]
    fn conditional_monotone_in_u2() {
        let u1 = UnitValue::new(0.37).unwrap();
        let mut prev = 0.0;
        for i in 1..200 {
            let v = conditional_cdf(al(1.7), UnitValue::new(i as f64 / 200.0).unwrap(), u1);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn top_quantile_draw() {
        let u2 = conditional_quantile(al(1.0), 1.0 - 1e-15, 0.3);
        assert!(u2 > 1.0 - 1e-12);
    }

    #[test]
    fn sampler_roundtrip() {
        let mut s = RandomStream::new(3, 9);
        for &a in &[0.8, 1.7, 3.0, 5.0] {
            for _ in 0..2000 {
                let (p, (_, v2)) = sample_pair_with_seeds(al(a), &mut s);
                let back = conditional_cdf(al(a), p.u2, p.u1);
                assert!((back - v2).abs() < 1e-10, "a={a} v2={v2} back={back}");
            }
        }
    }

    #[test]
    fn sampler_deterministic() {
        let a = sample_pairs(al(2.0), 50, &mut RandomStream::new(5, 1));
        let b = sample_pairs(al(2.0), 50, &mut RandomStream::new(5, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn kendall_values() {
        assert_eq!(kendall_cdf(al(0.8), 1.0), 1.0);
        assert_eq!(kendall_cdf(al(0.8), 0.0), 0.0);
        assert!((kendall_cdf(al(1.0), 0.5) - 0.75).abs() < 1e-15);
        assert!((kendall_cdf(al(2.0), 0.5) - 0.6875).abs() < 1e-15);
        assert_eq!(kendall_pdf(al(1.0), 1.0), 0.0);
        assert!((kendall_pdf(al(1.0), 0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kendall_pdf_is_derivative() {
        let h = 1e-6;
        let fd = (kendall_cdf(al(3.0), 0.4 + h) - kendall_cdf(al(3.0), 0.4 - h)) / (2.0 * h);
        assert!((fd - kendall_pdf(al(3.0), 0.4)).abs() < 1e-6);
    }

    #[test]
    fn kendall_inverse_values() {
        let t = kendall_inverse(al(1.0), UnitValue::new(0.75).unwrap());
        assert!((t - 0.5).abs() < 1e-12);
        let t = kendall_inverse(al(0.8), UnitValue::new(1.0).unwrap());
        // K'(1) = 0, so 1 - t shrinks like the square root of 1 - u
        assert!(t > 1.0 - 1e-5);
        for &a in &[0.8, 1.7, 3.0, 5.0] {
            for i in 1..10 {
                let t = i as f64 / 10.0;
                let u = UnitValue::new(kendall_cdf(al(a), t)).unwrap();
                assert!((kendall_inverse(al(a), u) - t).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tau_values() {
        assert_eq!(kendall_tau(al(2.0)), 0.5);
        assert!(kendall_tau(al(1e-12)) < 1e-11);
        assert!((kendall_tau(al(0.8)) - 0.8 / 2.8).abs() < 1e-15);
    }
}
