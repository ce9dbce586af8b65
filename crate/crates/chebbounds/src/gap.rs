//! Bounds for `psi(x) - theta(x) <= a1 sqrt(x) + a2 x^(1/3)`.
//!
//! The cube-root coefficient comes from the finite sum
//! `f(x) = sum_{k=3..floor(log2 x)} x^(1/k - 1/3)`, evaluated at the range
//! endpoint and at the next power of two; the square-root coefficient is
//! `1 + eps` for a suitable table entry.

use crate::conservative::Iv;
use crate::conservative::{ConservativeReal, Direction};
use crate::error::{Error, Result};
use crate::inputs::{EpsilonTable, GlobalConstants};

const LN_2: f64 = std::f64::consts::LN_2;

/// Rigorous enclosure of `sum_{k=3}^{n} exp(b (1/k - 1/3))` for f64 `b`.
/// Compensated f64 sum with an error box; all terms lie in (0, 1].
fn f_terms_boxed(b: f64, n: u32) -> Iv {
    if n < 3 {
        return Iv::zero();
    }
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for k in 3..=n {
        let y = b * (1.0 / k as f64 - 1.0 / 3.0);
        let t = y.exp();
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    let total = sum + comp;
    // Per-term relative error: exponent rounding (|y| * eps) plus exp and
    // summation rounding, padded generously.
    let rel = (b.abs() / 3.0) * 1e-15 + 5e-15;
    let err = total * rel + n as f64 * 1e-18 + 1e-300;
    Iv {
        lo: Iv::from_f64(total - err).lo,
        hi: Iv::from_f64(total + err).hi,
    }
}

/// Term count `floor(b / log 2)`, with both candidates when the quotient sits
/// within rounding distance of an integer.
fn floor_quotient_candidates(b: f64) -> (u32, u32) {
    let q = b / LN_2;
    let f = q.floor();
    let tol = q.abs() * 4e-16 + 4e-16;
    let lo = if q - f < tol {
        (f as u32).saturating_sub(1)
    } else {
        f as u32
    };
    let hi = if (f + 1.0) - q < tol {
        f as u32 + 1
    } else {
        f as u32
    };
    (lo, hi)
}

/// Enclosure of `f(e^b)` for a log-scale argument `b >= log 8`.
pub fn f_sum_log(b: f64) -> Result<Iv> {
    if !(b >= 8.0_f64.ln() * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!(
            "f is defined for x >= 8 (got log x = {b})"
        )));
    }
    let (n_lo, n_hi) = floor_quotient_candidates(b);
    let lo = f_terms_boxed(b, n_lo);
    let hi = f_terms_boxed(b, n_hi);
    Ok(Iv { lo: lo.lo, hi: hi.hi })
}

/// `f(x) = sum_{k=3}^{floor(log2 x)} x^(1/k - 1/3)` for `x >= 8`.
/// Exact powers of two get an exact term count.
pub fn f_sum(x: f64) -> Result<ConservativeReal> {
    if !(x >= 8.0) {
        return Err(Error::Domain(format!("f is defined for x >= 8 (got {x})")));
    }
    let iv = if x.fract() == 0.0 && x <= 2f64.powi(63) && (x as u64).is_power_of_two() {
        f_terms_boxed(x.ln(), (x as u64).trailing_zeros())
    } else {
        f_sum_log(x.ln())?
    };
    Ok(ConservativeReal::new(iv, Direction::UpperSafe))
}

/// Enclosure of `f(2^m)`.
pub(crate) fn f_pow2(m: u32) -> Iv {
    f_terms_boxed(m as f64 * LN_2, m)
}

/// `eta(x0) = (1 + alpha) max(f(x0), f(2^(floor(log2 x0) + 1)))` with `x0 = e^b`.
///
/// Both candidates of the max are always evaluated; the monotonicity of
/// `f(2^n)` is a tested property, not an assumption.
pub fn eta_log(b: f64, alpha: f64) -> Result<Iv> {
    if !(b >= 9.0 * LN_2 * (1.0 - 1e-12)) {
        return Err(Error::Domain(format!(
            "eta requires x0 >= 2^9 (got log x0 = {b})"
        )));
    }
    if alpha < 0.0 {
        return Err(Error::Domain("alpha must be non-negative".into()));
    }
    let f_at = f_sum_log(b)?;
    let (n_lo, n_hi) = floor_quotient_candidates(b);
    let f_next = f_pow2(n_lo + 1).max(&f_pow2(n_hi + 1));
    let one_plus = Iv::one().add(&Iv::from_f64(alpha));
    Ok(one_plus.mul(&f_at.max(&f_next)))
}

/// `eta` with a direct `x0` argument (`x0 >= 2^9`).
pub fn eta(x0: f64, alpha: f64) -> Result<ConservativeReal> {
    if !(x0 >= 512.0) {
        return Err(Error::Domain(format!("eta requires x0 >= 2^9 (got {x0})")));
    }
    if x0.fract() == 0.0 && x0 <= 2f64.powi(63) && (x0 as u64).is_power_of_two() {
        let m = (x0 as u64).trailing_zeros();
        let one_plus = Iv::one().add(&Iv::from_f64(alpha));
        let iv = one_plus.mul(&f_pow2(m).max(&f_pow2(m + 1)));
        return Ok(ConservativeReal::new(iv, Direction::UpperSafe));
    }
    Ok(ConservativeReal::new(
        eta_log(x0.ln(), alpha)?,
        Direction::UpperSafe,
    ))
}

/// The pair `(a1, a2)` with `psi(x) - theta(x) <= a1 sqrt(x) + a2 x^(1/3)`
/// for all `x >= e^b`.
#[derive(Clone, Debug)]
pub struct GapConstants {
    pub b: f64,
    pub a1: Iv,
    pub a2: Iv,
    /// Which epsilon row fed `a1`.
    pub a1_source_b: f64,
}

pub fn gap_constants(
    b: f64,
    table: &EpsilonTable,
    consts: &GlobalConstants,
) -> Result<GapConstants> {
    if !(b >= 7.0) {
        return Err(Error::Domain(format!(
            "gap constants require b >= 7 (got {b})"
        )));
    }
    let log_x1 = consts.x1.ln();
    let eps_row = if b <= 2.0 * log_x1 {
        table.epsilon_at(log_x1)?
    } else {
        table.epsilon_at(b / 2.0)?
    };
    let a1 = Iv::one().add(&eps_row.epsilon_iv());
    let a2 = eta_log(b, consts.alpha)?;
    Ok(GapConstants {
        b,
        a1,
        a2,
        a1_source_b: eps_row.b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_single_term_region() {
        for x in [8.0, 9.5, 15.9] {
            let v = f_sum(x).unwrap();
            assert!((v.value() - 1.0).abs() < 1e-12, "{x}");
        }
        assert!(f_sum(7.9).is_err());
    }

    #[test]
    fn f_at_2_pow_9() {
        // Independently summed at 50 digits: 3.210812576...
        let v = f_sum(512.0).unwrap();
        assert!((v.value() - 3.210812576).abs() < 1e-8, "{}", v.value());
    }

    #[test]
    fn f_decreasing_on_powers_of_two() {
        for n in 9..=64u32 {
            let a = f_pow2(n);
            let b = f_pow2(n + 1);
            assert!(
                b.hi_f64() < a.lo_f64(),
                "f(2^{n}) must strictly exceed f(2^{})",
                n + 1
            );
        }
    }

    #[test]
    fn eta_at_exact_power_matches_f() {
        let alpha = 1.93378e-8;
        for n in [9u32, 12, 20, 40] {
            let e = eta(2f64.powi(n as i32), alpha).unwrap();
            let expect = Iv::one().add(&Iv::from_f64(alpha)).mul(&f_pow2(n));
            assert!((e.value() - expect.mid_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn a2_table_values() {
        let consts = GlobalConstants::default();
        // tolerance: one unit in the last printed digit
        let cases = [
            (20.0, 1.4263, 1e-4),
            (25.0, 1.2196, 1e-4),
            (30.0, 1.1211, 1e-4),
            (35.0, 1.07086, 1e-5),
            (40.0, 1.04320, 1e-5),
            (43.0, 1.03253, 1e-5),
            (50.0, 1.01718, 1e-5),
        ];
        for (b, printed, tol) in cases {
            let a2 = eta_log(b, consts.alpha).unwrap();
            assert!(
                (a2.hi_f64() - printed).abs() <= tol,
                "a2({b}) = {} vs printed {printed}",
                a2.hi_f64()
            );
        }
        let tail = [
            (100.0, 2.421e-4, 1e-7),
            (150.0, 3.749e-6, 1e-9),
            (200.0, 7.712e-8, 1e-11),
            (250.0, 2.024e-8, 1e-11),
            (300.0, 1.936e-8, 1e-11),
        ];
        for (b, printed, tol) in tail {
            let a2 = eta_log(b, consts.alpha).unwrap();
            assert!(
                (a2.hi_f64() - 1.0 - printed).abs() <= tol,
                "a2({b}) - 1 = {:e} vs printed {printed:e}",
                a2.hi_f64() - 1.0
            );
        }
    }

    #[test]
    fn a2_nonincreasing_and_floor() {
        let consts = GlobalConstants::default();
        let mut prev = f64::INFINITY;
        for b in [20.0, 25.0, 30.0, 35.0, 40.0, 43.0, 50.0, 100.0, 200.0, 300.0] {
            let v = eta_log(b, consts.alpha).unwrap().hi_f64();
            assert!(v <= prev, "a2 must be non-increasing at b={b}");
            assert!(v >= 1.0 + consts.alpha * 0.999_999);
            prev = v;
        }
    }

    #[test]
    fn gap_constant_branches() {
        let table = EpsilonTable::default_table();
        let consts = GlobalConstants::default();
        let g = gap_constants(20.0, &table, &consts).unwrap();
        assert!((g.a1.hi_f64() - (1.0 + 1.93378e-8)).abs() < 1e-16);
        assert!((g.a2.hi_f64() - 1.4263).abs() < 5e-5);
        let g = gap_constants(100.0, &table, &consts).unwrap();
        assert!((g.a2.hi_f64() - 1.0 - 2.421e-4).abs() < 1e-7);
        // past twice the bias threshold the eps(b/2) branch kicks in
        let g = gap_constants(200.0, &table, &consts).unwrap();
        assert_eq!(g.a1_source_b, 100.0);
        assert!((g.a1.hi_f64() - (1.0 + 2.45299e-12)).abs() < 1e-16);
        assert!(gap_constants(6.9, &table, &consts).is_err());
    }
}
