//! Arbitrary-precision real scalar used throughout the crate.
//!
//! `Real` wraps a binary big-float and exposes precision-explicit operations:
//! every rounded operation takes the target mantissa width in bits. Values
//! produced by the exact constructors (`from_f64`, `pow2`, the `*_exact` ops)
//! are exact dyadic rationals and stay exact under further exact operations,
//! which is what lets certificates pin down the realized construction
//! bit-for-bit.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

const RM: RoundingMode = RoundingMode::ToEven;

/// Largest magnitude accepted by `exp`. Beyond this the backing exponent
/// field could saturate silently, so callers must range-reduce first.
const MAX_EXP_ARG: f64 = 1.0e8;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Arbitrary-precision real number (finite; no NaN or infinity escapes this type).
#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero() -> Self {
        Real(BigFloat::from_i8(0, 64))
    }

    pub fn one() -> Self {
        Real(BigFloat::from_i8(1, 64))
    }

    /// Exact conversion; panics on NaN or infinite input.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "Real::from_f64: non-finite input {v}");
        Real(BigFloat::from_f64(v, 64))
    }

    pub fn from_u64(v: u64) -> Self {
        Real(BigFloat::from_u64(v, 64))
    }

    pub fn from_i64(v: i64) -> Self {
        Real(BigFloat::from_i64(v, 64))
    }

    pub fn from_u128(v: u128) -> Self {
        Real(BigFloat::from_u128(v, 128))
    }

    /// Exact power of two, `2^e`.
    pub fn pow2(e: i32) -> Self {
        Real(BigFloat::from_words(&[1], Sign::Pos, e + 64))
    }

    /// ln 2 rounded to `bits`.
    pub fn ln2(bits: usize) -> Self {
        Real(with_consts(|cc| cc.ln_2(bits, RM)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero() && self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn add(&self, rhs: &Real, bits: usize) -> Real {
        Real(self.0.add(&rhs.0, bits, RM))
    }

    pub fn sub(&self, rhs: &Real, bits: usize) -> Real {
        Real(self.0.sub(&rhs.0, bits, RM))
    }

    pub fn mul(&self, rhs: &Real, bits: usize) -> Real {
        Real(self.0.mul(&rhs.0, bits, RM))
    }

    pub fn div(&self, rhs: &Real, bits: usize) -> Real {
        assert!(!rhs.is_zero(), "Real::div by zero");
        Real(self.0.div(&rhs.0, bits, RM))
    }

    // The backing library's full-precision ops mishandle zero operands
    // (`0 - x` and `x - 0` both come back as 0), so the exact ops
    // special-case zeros before delegating.

    /// Exact (unrounded) addition.
    pub fn add_exact(&self, rhs: &Real) -> Real {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        Real(self.0.add_full_prec(&rhs.0))
    }

    /// Exact (unrounded) subtraction.
    pub fn sub_exact(&self, rhs: &Real) -> Real {
        if self.is_zero() {
            return rhs.neg();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        Real(self.0.sub_full_prec(&rhs.0))
    }

    /// Exact (unrounded) multiplication.
    pub fn mul_exact(&self, rhs: &Real) -> Real {
        if self.is_zero() || rhs.is_zero() {
            return Real::zero();
        }
        Real(self.0.mul_full_prec(&rhs.0))
    }

    pub fn neg(&self) -> Real {
        Real(self.0.neg())
    }

    pub fn abs(&self) -> Real {
        Real(self.0.abs())
    }

    pub fn powi(&self, n: usize, bits: usize) -> Real {
        Real(self.0.powi(n, bits, RM))
    }

    pub fn exp(&self, bits: usize) -> Real {
        let a = self.to_f64();
        assert!(
            a.abs() <= MAX_EXP_ARG,
            "Real::exp argument out of range: {a}"
        );
        Real(with_consts(|cc| self.0.exp(bits, RM, cc)))
    }

    /// Natural logarithm; panics unless `self > 0`.
    pub fn ln(&self, bits: usize) -> Real {
        assert!(self.is_positive(), "Real::ln of non-positive value");
        Real(with_consts(|cc| self.0.ln(bits, RM, cc)))
    }

    /// Round to `bits`, directed toward −∞.
    pub fn floor_to_bits(&self, bits: usize) -> Real {
        let mut v = self.0.clone();
        v.set_precision(bits, RoundingMode::Down)
            .expect("set_precision");
        Real(v)
    }

    pub fn cmp(&self, rhs: &Real) -> Ordering {
        match self.0.cmp(&rhs.0) {
            Some(c) if c < 0 => Ordering::Less,
            Some(c) if c > 0 => Ordering::Greater,
            Some(_) => Ordering::Equal,
            None => panic!("Real::cmp on NaN"),
        }
    }

    pub fn min(&self, rhs: &Real) -> Real {
        if self.cmp(rhs) == Ordering::Greater {
            rhs.clone()
        } else {
            self.clone()
        }
    }

    pub fn max(&self, rhs: &Real) -> Real {
        if self.cmp(rhs) == Ordering::Less {
            rhs.clone()
        } else {
            self.clone()
        }
    }

    /// Nearest f64 (round-off ≤ 2⁻¹⁰⁰ relative before the final f64 rounding);
    /// saturates to ±∞ / ±0 outside the f64 range.
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        let (words, _n, sign, e, _inexact) = self.0.as_raw_parts().expect("finite value");
        let sgn = if sign == Sign::Neg { -1.0 } else { 1.0 };
        // value = 0.m × 2^e with the top bit of the last word set
        let len = words.len();
        let top = words[len - 1] as f64;
        let next = if len >= 2 { words[len - 2] as f64 } else { 0.0 };
        let frac = top / 2f64.powi(64) + next / 2f64.powi(128);
        let e = e as i64;
        if e > 1024 {
            return sgn * f64::INFINITY;
        }
        if e < -1070 {
            return sgn * 0.0;
        }
        sgn * frac * pow2_f64(e as i32)
    }

    /// Exact lossless text form: `[-]0x<mantissa>p<exp2>`, value = mantissa × 2^exp2.
    pub fn to_hex(&self) -> String {
        if self.0.is_zero() {
            return "0".to_string();
        }
        let (words, _n, sign, e, _inexact) = self.0.as_raw_parts().expect("finite value");
        let mut ws: Vec<u64> = words.to_vec();
        let mut skipped: i64 = 0;
        while ws.len() > 1 && ws[0] == 0 {
            ws.remove(0);
            skipped += 1;
        }
        let exp2 = e as i64 - 64 * (ws.len() as i64 + skipped);
        let mut hex = String::new();
        for (i, w) in ws.iter().rev().enumerate() {
            if i == 0 {
                hex.push_str(&format!("{w:x}"));
            } else {
                hex.push_str(&format!("{w:016x}"));
            }
        }
        let s = if sign == Sign::Neg { "-" } else { "" };
        format!("{s}0x{hex}p{exp2}")
    }

    /// Parse the `to_hex` form back, exactly.
    pub fn from_hex(s: &str) -> Result<Real, String> {
        if s == "0" {
            return Ok(Real::zero());
        }
        let (sign, rest) = match s.strip_prefix('-') {
            Some(r) => (Sign::Neg, r),
            None => (Sign::Pos, s),
        };
        let rest = rest
            .strip_prefix("0x")
            .ok_or_else(|| format!("bad hex real: {s}"))?;
        let (mant, exp) = rest
            .split_once('p')
            .ok_or_else(|| format!("bad hex real: {s}"))?;
        let exp2: i64 = exp.parse().map_err(|_| format!("bad exponent in: {s}"))?;
        if mant.is_empty() || mant.len() > 4096 {
            return Err(format!("bad mantissa in: {s}"));
        }
        let mut words: Vec<u64> = Vec::new();
        let chars: Vec<u8> = mant.bytes().collect();
        let mut idx = chars.len();
        while idx > 0 {
            let lo = idx.saturating_sub(16);
            let chunk = std::str::from_utf8(&chars[lo..idx]).unwrap();
            let w = u64::from_str_radix(chunk, 16).map_err(|_| format!("bad mantissa in: {s}"))?;
            words.push(w);
            idx = lo;
        }
        let e = exp2 + 64 * words.len() as i64;
        if e > i32::MAX as i64 / 2 || e < i32::MIN as i64 / 2 {
            return Err(format!("exponent out of range in: {s}"));
        }
        Ok(Real(BigFloat::from_words(&words, sign, e as i32)))
    }
}

/// 2^e as f64 for |e| beyond the single `powi` range.
fn pow2_f64(e: i32) -> f64 {
    if e >= -1021 && e <= 1023 {
        2f64.powi(e)
    } else if e < 0 {
        2f64.powi(-1021) * 2f64.powi(e + 1021)
    } else {
        2f64.powi(1023) * 2f64.powi(e - 1023)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({:e})", self.to_f64())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
