//! Signed log-domain arithmetic with an exact precision contract.
//!
//! A [`LogSigned`] value is a sign together with the natural log of the
//! magnitude, so quantities like `ε_j e^{k x}` with `k x ~ 10^18` stay
//! representable. Sums are evaluated by lifting every term relative to the
//! largest one and accumulating at extended precision; the log-magnitude gap
//! between the largest term and the result (the *cancellation depth*) is
//! measured, and if the requested policy cannot cover that depth plus its
//! guard margin the sum reports `PrecisionExhausted` instead of returning a
//! value whose sign cannot be trusted. Escalating and retrying is the
//! caller's job; this module stays pure.

use crate::real::Real;
use std::cmp::Ordering;
use thiserror::Error;

/// Mantissa width and guard margin for trusted log-domain sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    mantissa_bits: usize,
    guard_bits: usize,
}

impl PrecisionPolicy {
    pub const MIN_MANTISSA_BITS: usize = 53;
    pub const MIN_GUARD_BITS: usize = 16;

    pub fn new(mantissa_bits: usize, guard_bits: usize) -> Result<Self, ScaledError> {
        if mantissa_bits < Self::MIN_MANTISSA_BITS || guard_bits < Self::MIN_GUARD_BITS {
            return Err(ScaledError::InvalidPolicy {
                mantissa_bits,
                guard_bits,
            });
        }
        Ok(PrecisionPolicy {
            mantissa_bits,
            guard_bits,
        })
    }

    pub fn mantissa_bits(&self) -> usize {
        self.mantissa_bits
    }

    pub fn guard_bits(&self) -> usize {
        self.guard_bits
    }

    /// Same guard, wider mantissa.
    pub fn with_mantissa(&self, mantissa_bits: usize) -> Self {
        PrecisionPolicy {
            mantissa_bits,
            guard_bits: self.guard_bits,
        }
    }
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            mantissa_bits: 256,
            guard_bits: 32,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScaledError {
    #[error("precision exhausted: cancellation needs ~{needed_bits} mantissa bits, policy has {available_bits}")]
    PrecisionExhausted {
        needed_bits: usize,
        available_bits: usize,
    },
    #[error("invalid precision policy: mantissa {mantissa_bits} bits, guard {guard_bits} bits")]
    InvalidPolicy {
        mantissa_bits: usize,
        guard_bits: usize,
    },
}

/// Sign and natural log of the magnitude. `sign == 0` iff the value is an
/// exact zero, in which case the log-magnitude is conventionally −∞ and not
/// stored.
#[derive(Clone, Debug)]
pub struct LogSigned {
    sign: i8,
    logmag: Real,
}

impl LogSigned {
    pub fn zero() -> Self {
        LogSigned {
            sign: 0,
            logmag: Real::zero(),
        }
    }

    pub fn one() -> Self {
        LogSigned {
            sign: 1,
            logmag: Real::zero(),
        }
    }

    pub fn new(sign: i8, logmag: Real) -> Self {
        assert!(sign == -1 || sign == 1, "LogSigned::new: sign must be ±1");
        LogSigned { sign, logmag }
    }

    /// Log-domain encoding of a plain float.
    pub fn encode(v: f64, bits: usize) -> Self {
        if v == 0.0 {
            return LogSigned::zero();
        }
        assert!(v.is_finite(), "LogSigned::encode: non-finite input");
        let sign = if v > 0.0 { 1 } else { -1 };
        LogSigned {
            sign,
            logmag: Real::from_f64(v.abs()).ln(bits),
        }
    }

    /// Back to a plain float; saturates to 0 / ±∞ outside the f64 range.
    pub fn decode(&self) -> f64 {
        if self.sign == 0 {
            return 0.0;
        }
        let lm = self.logmag.to_f64();
        if lm < -745.0 {
            return 0.0 * self.sign as f64;
        }
        if lm > 710.0 {
            return f64::INFINITY * self.sign as f64;
        }
        self.sign as f64 * self.logmag.exp(64).to_f64()
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Log magnitude; only meaningful when `sign != 0`.
    pub fn logmag(&self) -> &Real {
        assert!(self.sign != 0, "logmag of exact zero");
        &self.logmag
    }

    /// Log magnitude as f64, −∞ for zero.
    pub fn logmag_f64(&self) -> f64 {
        if self.sign == 0 {
            f64::NEG_INFINITY
        } else {
            self.logmag.to_f64()
        }
    }

    pub fn neg(&self) -> Self {
        LogSigned {
            sign: -self.sign,
            logmag: self.logmag.clone(),
        }
    }

    pub fn abs(&self) -> Self {
        LogSigned {
            sign: self.sign.abs(),
            logmag: self.logmag.clone(),
        }
    }

    /// Compare magnitudes (zero is smallest).
    pub fn abs_cmp(&self, other: &Self) -> Ordering {
        match (self.sign == 0, other.sign == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.logmag.cmp(&other.logmag),
        }
    }
}

/// Product: signs multiply, log magnitudes add (exactly); zero absorbs.
pub fn ls_mul(a: &LogSigned, b: &LogSigned) -> LogSigned {
    if a.sign == 0 || b.sign == 0 {
        return LogSigned::zero();
    }
    LogSigned {
        sign: a.sign * b.sign,
        logmag: a.logmag.add_exact(&b.logmag),
    }
}

/// Outcome of a log-domain sum: the value plus the measured cancellation
/// depth in natural-log units (`+∞` for an exact zero).
#[derive(Clone, Debug)]
pub struct SumOutcome {
    pub value: LogSigned,
    pub cancellation_depth: f64,
    /// Log magnitude of the largest contributing term (−∞ if none).
    pub max_term_logmag: f64,
}

/// Signed sum of log-domain terms.
///
/// Terms are sorted by descending magnitude, lifted by the largest log
/// magnitude, and accumulated with Neumaier compensation at
/// `mantissa + guard + log2(n) + 8` bits. The result is trusted only when
///
/// ```text
/// depth_bits + guard_bits + log2(1 + |L_max|) + log2(n) + 8 ≤ mantissa_bits
/// ```
///
/// (the `|L_max|` term accounts for the fact that a log magnitude of size `L`
/// carried with `m`-bit precision pins the value itself only to `≈ L·2⁻ᵐ`
/// relative). Otherwise `PrecisionExhausted` reports the mantissa width that
/// would suffice.
pub fn ls_sum(terms: &[LogSigned], policy: &PrecisionPolicy) -> Result<SumOutcome, ScaledError> {
    let live: Vec<&LogSigned> = terms.iter().filter(|t| t.sign != 0).collect();
    if live.is_empty() {
        return Ok(SumOutcome {
            value: LogSigned::zero(),
            cancellation_depth: f64::INFINITY,
            max_term_logmag: f64::NEG_INFINITY,
        });
    }

    let n = live.len();
    let log2n = usize::BITS as usize - n.leading_zeros() as usize;
    let work_bits = policy.mantissa_bits + policy.guard_bits + log2n + 8;

    let mut lmax = live[0].logmag.clone();
    for t in &live[1..] {
        if t.logmag.cmp(&lmax) == Ordering::Greater {
            lmax = t.logmag.clone();
        }
    }

    // Lift each term by L_max; anything more than work_bits+8 binary digits
    // below the top cannot move the trusted digits and is skipped. The
    // depth check below fires before a sum that small could be trusted.
    let drop_threshold = Real::from_f64(-((work_bits + 8) as f64)).mul(&Real::ln2(64), 64);
    let mut lifted: Vec<(usize, Real, i8)> = Vec::with_capacity(n);
    let mut largest_dropped: Option<Real> = None;
    for (i, t) in live.iter().enumerate() {
        let d = t.logmag.sub_exact(&lmax);
        if d.cmp(&drop_threshold) == Ordering::Less {
            largest_dropped = Some(match largest_dropped {
                None => d,
                Some(cur) => {
                    if d.cmp(&cur) == Ordering::Greater {
                        d
                    } else {
                        cur
                    }
                }
            });
            continue;
        }
        lifted.push((i, d, t.sign));
    }
    // Descending magnitude, original order as tiebreak: deterministic.
    lifted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut acc = Real::zero();
    let mut comp = Real::zero();
    for (_, d, sign) in &lifted {
        let v = d.exp(work_bits);
        let v = if *sign < 0 { v.neg() } else { v };
        // Neumaier two-sum
        let t = acc.add(&v, work_bits);
        let delta = if acc.abs().cmp(&v.abs()) != Ordering::Less {
            acc.sub(&t, work_bits).add(&v, work_bits)
        } else {
            v.sub(&t, work_bits).add(&acc, work_bits)
        };
        comp = comp.add(&delta, work_bits);
        acc = t;
    }
    let total = acc.add(&comp, work_bits);

    let max_term_logmag = lmax.to_f64();
    if total.is_zero() {
        // exact zero is only certifiable when every term entered the sum;
        // with skipped terms the true value is whatever they add up to, and
        // resolving its sign needs enough mantissa to reach them
        if let Some(gap) = largest_dropped {
            let gap_bits = -gap.to_f64() / std::f64::consts::LN_2;
            let needed = gap_bits + policy.guard_bits as f64 + log2n as f64 + 8.0;
            return Err(ScaledError::PrecisionExhausted {
                needed_bits: needed.ceil() as usize,
                available_bits: policy.mantissa_bits,
            });
        }
        return Ok(SumOutcome {
            value: LogSigned::zero(),
            cancellation_depth: f64::INFINITY,
            max_term_logmag,
        });
    }

    let ln_total = total.abs().ln(work_bits);
    let depth = ln_total.neg().to_f64();
    let depth_bits = depth / std::f64::consts::LN_2;
    let scale_bits = (1.0 + max_term_logmag.abs()).log2();
    let needed = depth_bits + policy.guard_bits as f64 + scale_bits + log2n as f64 + 8.0;
    if needed > policy.mantissa_bits as f64 {
        return Err(ScaledError::PrecisionExhausted {
            needed_bits: needed.ceil() as usize,
            available_bits: policy.mantissa_bits,
        });
    }

    let logmag = lmax.add(&ln_total, work_bits);
    let sign = if total.is_positive() { 1 } else { -1 };
    Ok(SumOutcome {
        value: LogSigned { sign, logmag },
        cancellation_depth: depth,
        max_term_logmag,
    })
}
