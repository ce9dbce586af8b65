//! Conservative real arithmetic.
//!
//! Every bound published by this crate is evaluated as a two-sided enclosure
//! at a fixed extended working precision, and reported from the safe side:
//! an `UpperSafe` result never understates the exact expression value and a
//! `LowerSafe` result never overstates it. Decimal presentation rounds toward
//! the same safe side.

use crate::error::{Error, Result};
use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use std::cell::RefCell;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Default working precision in significant decimal digits.
pub const DEFAULT_DIGITS: usize = 30;

static WORKING_DIGITS: AtomicUsize = AtomicUsize::new(DEFAULT_DIGITS);

/// Sets the working precision for the whole process. Allowed range: 6..=30.
pub fn set_working_digits(digits: usize) -> Result<()> {
    if !(6..=30).contains(&digits) {
        return Err(Error::Domain(format!(
            "working precision {digits} digits outside 6..=30"
        )));
    }
    WORKING_DIGITS.store(digits, Ordering::SeqCst);
    Ok(())
}

/// Current working precision in decimal digits (recorded in output metadata).
pub fn working_digits() -> usize {
    WORKING_DIGITS.load(Ordering::SeqCst)
}

/// Working precision in bits, with guard bits on top of the decimal request.
pub fn prec_bits() -> usize {
    let d = working_digits() as f64;
    (d * std::f64::consts::LOG2_10).ceil() as usize + 16
}

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_cc<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Which side of the enclosure is the contractual one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    UpperSafe,
    LowerSafe,
    Exact,
}

const UP: RoundingMode = RoundingMode::Up;
const DOWN: RoundingMode = RoundingMode::Down;

/// Two-sided enclosure `[lo, hi]` of a real number.
#[derive(Clone, Debug)]
pub struct Iv {
    pub(crate) lo: BigFloat,
    pub(crate) hi: BigFloat,
}

pub(crate) fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf() {
        return if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    if x.is_zero() {
        return 0.0;
    }
    // Display prints full precision; f64 parsing is correctly rounded.
    format!("{x}").parse::<f64>().unwrap_or(f64::NAN)
}

impl Iv {
    pub fn from_f64(v: f64) -> Self {
        let b = BigFloat::from_f64(v, prec_bits());
        Iv { lo: b.clone(), hi: b }
    }

    pub fn from_u64(v: u64) -> Self {
        let b = BigFloat::from_u64(v, prec_bits());
        Iv { lo: b.clone(), hi: b }
    }

    /// Parses a decimal literal into an enclosure of its exact value.
    pub fn parse(s: &str) -> Result<Self> {
        let p = prec_bits();
        let (lo, hi) = with_cc(|cc| {
            (
                BigFloat::parse(s, Radix::Dec, p, DOWN, cc),
                BigFloat::parse(s, Radix::Dec, p, UP, cc),
            )
        });
        if lo.is_nan() || hi.is_nan() {
            return Err(Error::Domain(format!("unparseable decimal literal {s:?}")));
        }
        Ok(Iv { lo, hi })
    }

    pub fn zero() -> Self {
        Iv::from_f64(0.0)
    }

    pub fn one() -> Self {
        Iv::from_f64(1.0)
    }

    pub fn lo_f64(&self) -> f64 {
        big_to_f64(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        big_to_f64(&self.hi)
    }

    pub fn mid_f64(&self) -> f64 {
        let (l, h) = (self.lo_f64(), self.hi_f64());
        0.5 * (l + h)
    }

    pub fn add(&self, rhs: &Iv) -> Iv {
        let p = prec_bits();
        Iv {
            lo: self.lo.add(&rhs.lo, p, DOWN),
            hi: self.hi.add(&rhs.hi, p, UP),
        }
    }

    pub fn sub(&self, rhs: &Iv) -> Iv {
        let p = prec_bits();
        Iv {
            lo: self.lo.sub(&rhs.hi, p, DOWN),
            hi: self.hi.sub(&rhs.lo, p, UP),
        }
    }

    pub fn neg(&self) -> Iv {
        Iv {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn mul(&self, rhs: &Iv) -> Iv {
        let p = prec_bits();
        let cands = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for (a, b) in cands {
            let d = a.mul(b, p, DOWN);
            let u = a.mul(b, p, UP);
            lo = Some(match lo {
                None => d,
                Some(cur) => cur.min(&d),
            });
            hi = Some(match hi {
                None => u,
                Some(cur) => cur.max(&u),
            });
        }
        Iv {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        }
    }

    pub fn div(&self, rhs: &Iv) -> Result<Iv> {
        let p = prec_bits();
        let zero = BigFloat::from_f64(0.0, p);
        if rhs.lo <= zero && rhs.hi >= zero {
            return Err(Error::Domain(
                "division by an interval containing zero".into(),
            ));
        }
        let cands = [
            (&self.lo, &rhs.lo),
            (&self.lo, &rhs.hi),
            (&self.hi, &rhs.lo),
            (&self.hi, &rhs.hi),
        ];
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for (a, b) in cands {
            let d = a.div(b, p, DOWN);
            let u = a.div(b, p, UP);
            lo = Some(match lo {
                None => d,
                Some(cur) => cur.min(&d),
            });
            hi = Some(match hi {
                None => u,
                Some(cur) => cur.max(&u),
            });
        }
        Ok(Iv {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
        })
    }

    pub fn exp(&self) -> Iv {
        let p = prec_bits();
        with_cc(|cc| Iv {
            lo: self.lo.exp(p, DOWN, cc),
            hi: self.hi.exp(p, UP, cc),
        })
    }

    pub fn ln(&self) -> Result<Iv> {
        let p = prec_bits();
        let zero = BigFloat::from_f64(0.0, p);
        if self.lo <= zero {
            return Err(Error::Domain("log of a non-positive argument".into()));
        }
        Ok(with_cc(|cc| Iv {
            lo: self.lo.ln(p, DOWN, cc),
            hi: self.hi.ln(p, UP, cc),
        }))
    }

    pub fn sqrt(&self) -> Result<Iv> {
        let p = prec_bits();
        let zero = BigFloat::from_f64(0.0, p);
        if self.lo < zero {
            return Err(Error::Domain("sqrt of a negative argument".into()));
        }
        Ok(Iv {
            lo: self.lo.sqrt(p, DOWN),
            hi: self.hi.sqrt(p, UP),
        })
    }

    /// `self^rhs` for a strictly positive base, via `exp(rhs * ln(self))`.
    pub fn pow(&self, rhs: &Iv) -> Result<Iv> {
        Ok(self.ln()?.mul(rhs).exp())
    }

    /// Integer power for non-negative bases.
    pub fn powi(&self, n: u32) -> Iv {
        let mut acc = Iv::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn sinh(&self) -> Iv {
        let p = prec_bits();
        with_cc(|cc| Iv {
            lo: self.lo.sinh(p, DOWN, cc),
            hi: self.hi.sinh(p, UP, cc),
        })
    }

    /// Enclosure of `sin` over the interval. Falls back to `[-1, 1]` when the
    /// interval may contain a turning point of sine.
    pub fn sin(&self) -> Iv {
        let p = prec_bits();
        with_cc(|cc| {
            let zero = BigFloat::from_f64(0.0, p);
            let c_lo_d = self.lo.cos(p, DOWN, cc);
            let c_lo_u = self.lo.cos(p, UP, cc);
            let c_hi_d = self.hi.cos(p, DOWN, cc);
            let c_hi_u = self.hi.cos(p, UP, cc);
            let all_pos = c_lo_d > zero && c_hi_d > zero;
            let all_neg = c_lo_u < zero && c_hi_u < zero;
            // Width must also be under pi to rule out a full period inside.
            let width_small = {
                let w = self.hi.sub(&self.lo, p, UP);
                w < BigFloat::from_f64(3.0, p)
            };
            if width_small && all_pos {
                Iv {
                    lo: self.lo.sin(p, DOWN, cc),
                    hi: self.hi.sin(p, UP, cc),
                }
            } else if width_small && all_neg {
                Iv {
                    lo: self.hi.sin(p, DOWN, cc),
                    hi: self.lo.sin(p, UP, cc),
                }
            } else {
                Iv {
                    lo: BigFloat::from_f64(-1.0, p),
                    hi: BigFloat::from_f64(1.0, p),
                }
            }
        })
    }

    /// Pointwise maximum (sound for the max of two functions).
    pub fn max(&self, rhs: &Iv) -> Iv {
        Iv {
            lo: self.lo.max(&rhs.lo),
            hi: self.hi.max(&rhs.hi),
        }
    }

    pub fn min(&self, rhs: &Iv) -> Iv {
        Iv {
            lo: self.lo.min(&rhs.lo),
            hi: self.hi.min(&rhs.hi),
        }
    }

    /// True when every point of `self` is <= every point of `rhs`.
    pub fn definitely_le(&self, rhs: &Iv) -> bool {
        self.hi <= rhs.lo
    }

    pub fn contains_f64(&self, v: f64) -> bool {
        let b = BigFloat::from_f64(v, prec_bits());
        self.lo <= b && b <= self.hi
    }

    pub fn is_finite(&self) -> bool {
        !(self.lo.is_inf() || self.hi.is_inf() || self.lo.is_nan() || self.hi.is_nan())
    }
}

/// A directed numeric result: midpoint, error radius and reporting direction.
#[derive(Clone, Debug)]
pub struct ConservativeReal {
    iv: Iv,
    direction: Direction,
    saturated: bool,
}

impl ConservativeReal {
    pub fn new(iv: Iv, direction: Direction) -> Self {
        let saturated = !iv.is_finite();
        ConservativeReal {
            iv,
            direction,
            saturated,
        }
    }

    pub fn exact_f64(v: f64) -> Self {
        ConservativeReal::new(Iv::from_f64(v), Direction::Exact)
    }

    /// Midpoint of the enclosure.
    pub fn value(&self) -> f64 {
        self.iv.mid_f64()
    }

    /// Error radius (non-negative; rounded up).
    pub fn err(&self) -> f64 {
        let w = self.iv.hi.sub(&self.iv.lo, prec_bits(), UP);
        (big_to_f64(&w) * 0.5).abs()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// True when evaluation left the representable range.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    /// The reported bound: `value + err` for upper-safe, `value - err` for
    /// lower-safe, the midpoint otherwise.
    pub fn reported(&self) -> f64 {
        match self.direction {
            Direction::UpperSafe => self.iv.hi_f64(),
            Direction::LowerSafe => self.iv.lo_f64(),
            Direction::Exact => self.iv.mid_f64(),
        }
    }

    pub(crate) fn reported_big(&self) -> &BigFloat {
        match self.direction {
            Direction::UpperSafe => &self.iv.hi,
            Direction::LowerSafe | Direction::Exact => &self.iv.lo,
        }
    }

    pub fn interval(&self) -> &Iv {
        &self.iv
    }

    pub fn with_direction(mut self, d: Direction) -> Self {
        self.direction = d;
        self
    }
}

/// Arithmetic expression evaluated conservatively.
#[derive(Clone, Debug)]
pub enum Expr {
    Num(f64),
    Dec(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    Neg(Box<Expr>),
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn dec(s: &str) -> Expr {
        Expr::Dec(s.to_string())
    }

    fn eval_iv(&self) -> Result<Iv> {
        match self {
            Expr::Num(v) => {
                if !v.is_finite() {
                    return Err(Error::Domain("non-finite literal".into()));
                }
                Ok(Iv::from_f64(*v))
            }
            Expr::Dec(s) => Iv::parse(s),
            Expr::Add(a, b) => Ok(a.eval_iv()?.add(&b.eval_iv()?)),
            Expr::Sub(a, b) => Ok(a.eval_iv()?.sub(&b.eval_iv()?)),
            Expr::Mul(a, b) => Ok(a.eval_iv()?.mul(&b.eval_iv()?)),
            Expr::Div(a, b) => a.eval_iv()?.div(&b.eval_iv()?),
            Expr::Exp(a) => Ok(a.eval_iv()?.exp()),
            Expr::Log(a) => a.eval_iv()?.ln(),
            Expr::Pow(a, b) => a.eval_iv()?.pow(&b.eval_iv()?),
            Expr::Sqrt(a) => a.eval_iv()?.sqrt(),
            Expr::Neg(a) => Ok(a.eval_iv()?.neg()),
        }
    }
}

/// Evaluates an expression so the reported side provably encloses the truth.
pub fn eval_conservative(expr: &Expr, direction: Direction) -> Result<ConservativeReal> {
    Ok(ConservativeReal::new(expr.eval_iv()?, direction))
}

fn round_digit_string(digits: &mut Vec<u8>, keep: usize, round_up_mag: bool, half_to_even: bool) -> bool {
    // Returns true if the carry overflowed past the leading digit.
    let first_dropped = digits.get(keep).copied().unwrap_or(0);
    let rest_nonzero = digits.len() > keep + 1 && digits[keep + 1..].iter().any(|&d| d != 0);
    let dropped_nonzero = first_dropped != 0 || rest_nonzero;
    digits.truncate(keep);
    let inc = if half_to_even {
        match first_dropped.cmp(&5) {
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => rest_nonzero || digits[keep - 1] % 2 == 1,
        }
    } else {
        round_up_mag && dropped_nonzero
    };
    if inc {
        for d in digits.iter_mut().rev() {
            if *d == 9 {
                *d = 0;
            } else {
                *d += 1;
                return false;
            }
        }
        digits.insert(0, 1);
        digits.truncate(keep);
        return true;
    }
    false
}

/// Renders a conservative value at `sig_digits` significant digits, rounding
/// toward the safe direction. Plain decimal for moderate magnitudes,
/// scientific notation otherwise.
pub fn present(v: &ConservativeReal, sig_digits: usize) -> Result<String> {
    if !(3..=12).contains(&sig_digits) {
        return Err(Error::Domain(format!(
            "sig_digits {sig_digits} outside 3..=12"
        )));
    }
    let edge = v.reported_big();
    if edge.is_nan() {
        return Ok("nan".into());
    }
    if edge.is_inf() || v.saturated() {
        return Ok(if edge.is_negative() { "-inf" } else { "inf" }.into());
    }
    if edge.is_zero() {
        return Ok("0".into());
    }
    let neg = edge.is_negative();
    // Decimal rendering of the edge, rounded in the safe direction so the
    // printed string still bounds the truth.
    let rm = match v.direction() {
        Direction::UpperSafe => UP,
        Direction::LowerSafe => DOWN,
        Direction::Exact => RoundingMode::ToEven,
    };
    let s = with_cc(|cc| edge.format(Radix::Dec, rm, cc)).map_err(|e| {
        Error::Saturation(format!("formatting failed: {e:?}"))
    })?;
    // Parse "[-]d.ddd...e±x".
    let body = s.strip_prefix('-').unwrap_or(&s);
    let (mant, exp_str) = body.split_once(['e', 'E']).unwrap_or((body, "0"));
    let mut e10: i64 = exp_str.parse().unwrap_or(0);
    let mut digits: Vec<u8> = mant
        .bytes()
        .filter(|b| b.is_ascii_digit())
        .map(|b| b - b'0')
        .collect();
    // Normalize: strip leading zeros (value like 0.xyz shouldn't occur from
    // astro-float, but be safe).
    while digits.len() > 1 && digits[0] == 0 {
        digits.remove(0);
        e10 -= 1;
    }
    while digits.len() < sig_digits {
        digits.push(0);
    }
    // Magnitude-direction of the final rounding step.
    let round_up_mag = match (v.direction(), neg) {
        (Direction::UpperSafe, false) => true,
        (Direction::UpperSafe, true) => false,
        (Direction::LowerSafe, false) => false,
        (Direction::LowerSafe, true) => true,
        (Direction::Exact, _) => false,
    };
    let overflowed = round_digit_string(
        &mut digits,
        sig_digits,
        round_up_mag,
        v.direction() == Direction::Exact,
    );
    if overflowed {
        e10 += 1;
    }
    let digit_str: String = digits.iter().map(|d| (d + b'0') as char).collect();
    let sign = if neg { "-" } else { "" };
    let out = if e10 >= 0 && (e10 as usize) < sig_digits {
        let point = e10 as usize + 1;
        if point == sig_digits {
            format!("{sign}{digit_str}")
        } else {
            format!("{sign}{}.{}", &digit_str[..point], &digit_str[point..])
        }
    } else {
        format!(
            "{sign}{}.{}e{}",
            &digit_str[..1],
            &digit_str[1..],
            e10
        )
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn upper(e: &Expr) -> ConservativeReal {
        eval_conservative(e, Direction::UpperSafe).unwrap()
    }

    #[test]
    fn exp_zero_is_exact_one() {
        let v = upper(&Expr::Exp(Box::new(Expr::num(0.0))));
        assert_eq!(v.value(), 1.0);
        assert_eq!(v.err(), 0.0);
    }

    #[test]
    fn small_range_table_entry() {
        // 0.94 * exp(-10), printed at 6 digits upper-safe
        let e = Expr::Mul(
            Box::new(Expr::dec("0.94")),
            Box::new(Expr::Exp(Box::new(Expr::num(-10.0)))),
        );
        let v = upper(&e);
        assert_eq!(present(&v, 6).unwrap(), "4.26760e-5");
    }

    #[test]
    fn composite_expression_enclosure() {
        // 20 e^{-10} + 1.4263*20 e^{-40/3} + 21*4.26760e-5
        let e = Expr::Add(
            Box::new(Expr::Add(
                Box::new(Expr::Mul(
                    Box::new(Expr::num(20.0)),
                    Box::new(Expr::Exp(Box::new(Expr::num(-10.0)))),
                )),
                Box::new(Expr::Mul(
                    Box::new(Expr::Mul(
                        Box::new(Expr::dec("1.4263")),
                        Box::new(Expr::num(20.0)),
                    )),
                    Box::new(Expr::Exp(Box::new(Expr::Div(
                        Box::new(Expr::num(-40.0)),
                        Box::new(Expr::num(3.0)),
                    )))),
                )),
            )),
            Box::new(Expr::Mul(
                Box::new(Expr::num(21.0)),
                Box::new(Expr::dec("4.26760e-5")),
            )),
        );
        let v = upper(&e);
        // Independently recomputed at 50 digits: 1.850395213...e-3
        assert!((v.reported() - 1.850395213e-3).abs() < 1e-10);
        assert!(v.err() < 1e-25);
    }

    #[test]
    fn present_directed_examples() {
        let up = ConservativeReal::new(Iv::parse("1.80778e-3").unwrap(), Direction::UpperSafe);
        assert_eq!(present(&up, 5).unwrap(), "1.8078e-3");
        let exact = ConservativeReal::new(Iv::parse("1.80770e-3").unwrap(), Direction::Exact);
        assert_eq!(present(&exact, 5).unwrap(), "1.8077e-3");
        let plain = ConservativeReal::new(Iv::parse("151.2235").unwrap(), Direction::UpperSafe);
        assert_eq!(present(&plain, 4).unwrap(), "151.3");
    }

    #[test]
    fn present_lower_safe_truncates() {
        let v = ConservativeReal::new(Iv::parse("1.23456789e-7").unwrap(), Direction::LowerSafe);
        assert_eq!(present(&v, 5).unwrap(), "1.2345e-7");
    }

    #[test]
    fn present_carry_and_plain_forms() {
        let v = ConservativeReal::new(Iv::parse("9.99999").unwrap(), Direction::UpperSafe);
        assert_eq!(present(&v, 3).unwrap(), "10.0");
        let w = ConservativeReal::new(Iv::parse("42").unwrap(), Direction::Exact);
        assert_eq!(present(&w, 4).unwrap(), "42.00");
        let big = ConservativeReal::new(Iv::parse("2.916e2").unwrap(), Direction::Exact);
        assert_eq!(present(&big, 5).unwrap(), "291.60");
        let sci = ConservativeReal::new(Iv::parse("2.916e7").unwrap(), Direction::Exact);
        assert_eq!(present(&sci, 5).unwrap(), "2.9160e7");
    }

    #[test]
    fn domain_errors() {
        assert!(eval_conservative(
            &Expr::Log(Box::new(Expr::num(0.0))),
            Direction::UpperSafe
        )
        .is_err());
        assert!(eval_conservative(
            &Expr::Sqrt(Box::new(Expr::num(-1.0))),
            Direction::UpperSafe
        )
        .is_err());
    }

    #[test]
    fn overflow_is_flagged() {
        let e = Expr::Exp(Box::new(Expr::Exp(Box::new(Expr::Exp(Box::new(
            Expr::num(100.0),
        ))))));
        let v = eval_conservative(&e, Direction::UpperSafe).unwrap();
        assert!(v.saturated());
        assert_eq!(present(&v, 5).unwrap(), "inf");
    }

    #[test]
    fn negative_directed_presentation() {
        let v = ConservativeReal::new(Iv::parse("-1.234567").unwrap(), Direction::UpperSafe);
        // toward +inf means toward smaller magnitude for negatives
        assert_eq!(present(&v, 4).unwrap(), "-1.234");
        let w = ConservativeReal::new(Iv::parse("-1.234567").unwrap(), Direction::LowerSafe);
        assert_eq!(present(&w, 4).unwrap(), "-1.235");
    }
}
