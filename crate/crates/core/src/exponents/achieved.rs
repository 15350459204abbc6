use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::optim::{bisect_decreasing, BISECT_FTOL, BISECT_XTOL};
use crate::scalar::Real;

use super::{e0_max_with, nondegenerate_capacity, ExponentValue, Flag, ParametricPoint};

/// A point of the `E'` curve with the quantities behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievedPoint<T> {
    pub rho: T,
    pub rate: T,
    /// `E'(rho)`
    pub exponent: T,
    /// Share of each chunk spent on flow control, `E0(rho) / (E0(1) + E0(rho))`.
    pub psi: T,
    pub e0_rho: T,
    pub e0_one: T,
    /// `psi E0(1) - (1 - psi) E0(rho)`; zero up to rounding.
    pub balance_residual: T,
}

impl<T: Copy> AchievedPoint<T> {
    pub fn point(&self) -> ParametricPoint<T> {
        ParametricPoint { rho: self.rho, rate: self.rate, exponent: self.exponent }
    }
}

fn positive_rho<T: Real>(rho: T) -> Result<()> {
    if rho > T::zero() && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "rho", value: rho.to_f64_lossy(), range: "(0, inf)" })
    }
}

struct E0Pair<T> {
    e0_rho: T,
    e0_one: T,
}

fn e0_pair<T: Real>(ch: &Channel<T>, rho: T, sym: bool, e0_one: T) -> E0Pair<T> {
    E0Pair { e0_rho: e0_max_with(ch, rho, sym).value, e0_one }
}

fn e0_one<T: Real>(ch: &Channel<T>, sym: bool) -> Result<T> {
    let e1 = e0_max_with(ch, T::one(), sym).value;
    if !(e1 > T::zero()) {
        return Err(Error::DegenerateChannel { capacity: 0.0 });
    }
    Ok(e1)
}

/// Fraction of each chunk that balances the flow-control exponent `E0(1)`
/// against the data exponent `E0(rho)`.
pub fn overhead_fraction<T: Real>(ch: &Channel<T>, rho: T) -> Result<T> {
    positive_rho(rho)?;
    let sym = ch.is_symmetric();
    let e1 = e0_one(ch, sym)?;
    let p = e0_pair(ch, rho, sym, e1);
    Ok(p.e0_rho / (p.e0_one + p.e0_rho))
}

fn point_from<T: Real>(rho: T, p: E0Pair<T>) -> AchievedPoint<T> {
    let exponent = T::one() / (T::one() / p.e0_rho + T::one() / p.e0_one);
    let psi = p.e0_rho / (p.e0_one + p.e0_rho);
    let balance_residual = psi * p.e0_one - (T::one() - psi) * p.e0_rho;
    AchievedPoint { rho, rate: exponent / rho, exponent, psi, e0_rho: p.e0_rho, e0_one: p.e0_one, balance_residual }
}

/// Exponent `E'(rho) = (1/E0(rho) + 1/E0(1))^{-1}` at rate `E'(rho)/rho`.
pub fn achieved_exponent<T: Real>(ch: &Channel<T>, rho: T) -> Result<AchievedPoint<T>> {
    positive_rho(rho)?;
    let sym = ch.is_symmetric();
    let e1 = e0_one(ch, sym)?;
    Ok(point_from(rho, e0_pair(ch, rho, sym, e1)))
}

/// `E'` at a given rate, found by bisection on `rho` (the rate map
/// `E'(rho)/rho` decreases strictly). Rates at or above its supremum, the
/// capacity, return 0 with [`Flag::RateOutOfRange`].
pub fn achieved_exponent_at_rate<T: Real>(ch: &Channel<T>, rate: T) -> Result<ExponentValue<T>> {
    if !(rate > T::zero()) {
        return Err(Error::NonPositiveRate(rate.to_f64_lossy()));
    }
    let c = nondegenerate_capacity(ch)?;
    if rate >= c {
        return Ok(ExponentValue::zero(vec![Flag::RateOutOfRange]));
    }
    let sym = ch.is_symmetric();
    let e1 = e0_one(ch, sym)?;
    let rate_of = |rho: T| point_from(rho, e0_pair(ch, rho, sym, e1)).rate;

    let lo = T::lit(1e-12);
    if rate_of(lo) <= rate {
        return Ok(ExponentValue::zero(vec![Flag::RateOutOfRange]));
    }
    let mut hi = T::one();
    let cap = T::lit(2f64.powi(40));
    while rate_of(hi) >= rate {
        if hi >= cap {
            return Ok(ExponentValue { value: e1, param: None, q: None, flags: vec![Flag::UpperBracketEdge] });
        }
        hi = hi * T::lit(2.0);
    }
    let rho = bisect_decreasing(rate_of, rate, lo, hi, T::tol(BISECT_XTOL), T::tol(BISECT_FTOL));
    let at = e0_max_with(ch, rho, sym);
    let point = point_from(rho, E0Pair { e0_rho: at.value, e0_one: e1 });
    Ok(ExponentValue { value: point.exponent, param: Some(rho), q: at.q, flags: at.flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::capacity;
    use crate::exponents::{e0_raw, sphere_packing};
    use approx::assert_abs_diff_eq;

    fn bsc4() -> Channel<f64> {
        Channel::bsc(0.4).unwrap()
    }

    #[test]
    fn overhead_fraction_values() {
        let ch = bsc4();
        assert_eq!(overhead_fraction(&ch, 1.0).unwrap(), 0.5);
        let e1 = e0_raw(&ch, 1.0, &[0.5, 0.5]);
        let e2 = e0_raw(&ch, 2.0, &[0.5, 0.5]);
        // Direct evaluation of E0 at rho = 2.
        let direct = -(2.0 * ((0.4f64.powf(1.0 / 3.0) + 0.6f64.powf(1.0 / 3.0)) / 2.0).powi(3)).ln();
        assert_abs_diff_eq!(e2, direct, epsilon = 1e-15);
        assert_abs_diff_eq!(e2, 0.0135661, epsilon = 1e-7);
        assert_abs_diff_eq!(overhead_fraction(&ch, 2.0).unwrap(), e2 / (e1 + e2), epsilon = 1e-15);
        assert!(overhead_fraction(&ch, 1e-8).unwrap() < 1e-5);
        assert!(overhead_fraction(&ch, 0.0).is_err());
    }

    #[test]
    fn useless_channel_is_degenerate() {
        let useless = Channel::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(achieved_exponent(&useless, 1.0), Err(Error::DegenerateChannel { .. })));
        assert!(matches!(overhead_fraction(&useless, 1.0), Err(Error::DegenerateChannel { .. })));
        assert!(matches!(achieved_exponent_at_rate(&useless, 0.1), Err(Error::DegenerateChannel { .. })));
    }

    #[test]
    fn rho_one_point() {
        let ch = bsc4();
        let p = achieved_exponent(&ch, 1.0).unwrap();
        let e1 = e0_raw(&ch, 1.0, &[0.5, 0.5]);
        assert_abs_diff_eq!(p.exponent, e1 / 2.0, epsilon = 1e-16);
        assert_abs_diff_eq!(p.rate, e1 / 2.0, epsilon = 1e-16);
        assert_abs_diff_eq!(p.exponent, 0.0050765, epsilon = 5e-7);
    }

    #[test]
    fn small_rho_point_matches_direct_formula() {
        let ch = bsc4();
        let rho = 1e-4;
        let p = achieved_exponent(&ch, rho).unwrap();
        let e1 = e0_raw(&ch, 1.0, &[0.5, 0.5]);
        let er = e0_raw(&ch, rho, &[0.5, 0.5]);
        let direct = er * e1 / (er + e1);
        assert_abs_diff_eq!(p.exponent, direct, epsilon = 1e-17);
        assert_abs_diff_eq!(p.rate, direct / rho, epsilon = 1e-13);
        // Near rho = 0 the rate approaches C from below.
        let c = capacity(&ch).value;
        assert!(p.rate < c && p.rate > 0.99 * c);
    }

    #[test]
    fn harmonic_mean_bound() {
        let ch = bsc4();
        for rho in [0.1, 0.5, 1.0, 2.0, 7.0] {
            let p = achieved_exponent(&ch, rho).unwrap();
            assert!(p.exponent < p.e0_rho.min(p.e0_one) || rho == 1.0);
            assert!(p.balance_residual.abs() < 1e-12);
        }
    }

    #[test]
    fn rate_inversion() {
        let ch = bsc4();
        let e1 = e0_raw(&ch, 1.0, &[0.5, 0.5]);
        let v = achieved_exponent_at_rate(&ch, e1 / 2.0).unwrap();
        assert_abs_diff_eq!(v.value, e1 / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v.param.unwrap(), 1.0, epsilon = 1e-7);

        let c = capacity(&ch).value;
        let above = achieved_exponent_at_rate(&ch, c).unwrap();
        assert_eq!(above.value, 0.0);
        assert!(above.has(Flag::RateOutOfRange));
    }

    #[test]
    fn beats_sphere_packing_near_capacity() {
        let ch = bsc4();
        let c = capacity(&ch).value;
        let a = achieved_exponent_at_rate(&ch, 0.9 * c).unwrap().value;
        let sp = sphere_packing(&ch, 0.9 * c).unwrap().value;
        assert!(a > sp, "{a} <= {sp}");
    }
}
