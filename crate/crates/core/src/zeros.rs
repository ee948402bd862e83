//! Zeros of G between consecutive alternation checkpoints.
//!
//! Between `b_j` and `b_{j+1}` the certified signs differ, so the scaled
//! transform H (same zeros as G) crosses zero. Near such a crossing the
//! series cancels catastrophically — the only trustworthy signal is the sign
//! of a log-domain sum whose cancellation depth stayed inside the precision
//! policy, so bisection asks `eval_h` for certified signs and escalates the
//! mantissa geometrically up to [`SIGN_CAP_BITS`] before giving up.
//!
//! Bracket endpoints are exact dyadics halved in exact arithmetic: at
//! `k ~ 10^18` the residual contract forces absolute widths far below one
//! f64 ulp of k, which plain f64 endpoints could never express.

use crate::forge::{Certificate, ZeroRecord};
use crate::real::Real;
use crate::scaled::PrecisionPolicy;
use crate::series::{AlternatingSeries, SeriesError, TransformValue};
use std::cmp::Ordering;
use thiserror::Error;

/// Mantissa ceiling for sign determination near a zero.
pub const SIGN_CAP_BITS: usize = 8192;

const MAX_ITERATIONS: u32 = 20000;

#[derive(Debug, Error)]
pub enum ZerosError {
    #[error("certificate stale against series at j={j}: {detail}")]
    MarginCheckFailed { j: u32, detail: String },
    #[error("sign lost near k={k:e}: cancellation needs ≥ {needed_bits} bits, cap {cap_bits}")]
    SignLost {
        k: f64,
        needed_bits: usize,
        cap_bits: usize,
    },
    #[error("invalid bracket or tolerance: {0}")]
    InvalidBracket(String),
    #[error("sign change not confirmed around k={k:e}")]
    SignConfirmFailed { k: f64 },
    #[error("bisection iteration budget exhausted near k={k:e}")]
    IterationsExhausted { k: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// An interval with certified opposite signs of H at its endpoints.
#[derive(Clone, Debug)]
pub struct ZeroBracket {
    /// Checkpoint index of the left endpoint (the bracket is (b_j, b_{j+1})).
    pub j_lo: u32,
    pub lo: Real,
    pub hi: Real,
    pub sign_lo: i8,
    pub sign_hi: i8,
}

fn certified_sign(
    series: &AlternatingSeries,
    k: &Real,
    policy: &PrecisionPolicy,
) -> Result<TransformValue, ZerosError> {
    match series.eval_h_capped(k, 0.0, policy, SIGN_CAP_BITS) {
        Ok(tv) => Ok(tv),
        Err(SeriesError::PrecisionEscalationFailed {
            needed_bits,
            cap_bits,
        }) => Err(ZerosError::SignLost {
            k: k.to_f64(),
            needed_bits,
            cap_bits,
        }),
        Err(e) => Err(ZerosError::Series(e)),
    }
}

/// One bracket per adjacent checkpoint pair with opposite certified signs.
/// Every endpoint is re-evaluated first; a certificate whose margins no
/// longer clear `0.99·ω` against this series is rejected as stale.
pub fn bracket_zeros(
    cert: &Certificate,
    series: &AlternatingSeries,
    policy: &PrecisionPolicy,
) -> Result<Vec<ZeroBracket>, ZerosError> {
    let ln_omega_slack = (0.99 * cert.omega).ln();
    let mut signs = Vec::with_capacity(cert.margins.len());
    for m in &cert.margins {
        let k = Real::from_f64(m.b);
        let tv = certified_sign(series, &k, policy)?;
        if tv.value.sign() != m.sign {
            return Err(ZerosError::MarginCheckFailed {
                j: m.j,
                detail: format!(
                    "sign {} at b={}, certificate says {}",
                    tv.value.sign(),
                    m.b,
                    m.sign
                ),
            });
        }
        let margin_log_g = tv.value.logmag().add_exact(&Real::from_f64(m.b)).to_f64();
        if margin_log_g < ln_omega_slack {
            return Err(ZerosError::MarginCheckFailed {
                j: m.j,
                detail: format!("margin e^{margin_log_g:.6} below 0.99·ω at b={}", m.b),
            });
        }
        // the recorded margin must reproduce within the same 1% slack,
        // otherwise the certificate was not produced from this series
        if (margin_log_g - m.final_log_g).abs() > 0.01f64.ln_1p() {
            return Err(ZerosError::MarginCheckFailed {
                j: m.j,
                detail: format!(
                    "recorded margin e^{:.6} does not reproduce (got e^{margin_log_g:.6})",
                    m.final_log_g
                ),
            });
        }
        signs.push(tv.value.sign());
    }
    let mut out = Vec::new();
    for i in 0..cert.margins.len().saturating_sub(1) {
        if signs[i] * signs[i + 1] == -1 {
            out.push(ZeroBracket {
                j_lo: cert.margins[i].j,
                lo: Real::from_f64(cert.margins[i].b),
                hi: Real::from_f64(cert.margins[i + 1].b),
                sign_lo: signs[i],
                sign_hi: signs[i + 1],
            });
        }
    }
    Ok(out)
}

/// Bisect a bracket down to `|hi − lo| ≤ rel_tol·k` *and* a residual at
/// least `guard_bits` binary digits below the largest term, then confirm the
/// sign change across `k_j ± 10·rel_tol·k_j`.
pub fn bisect(
    bracket: &ZeroBracket,
    series: &AlternatingSeries,
    rel_tol: f64,
    policy: &PrecisionPolicy,
) -> Result<ZeroRecord, ZerosError> {
    if !(rel_tol > 0.0 && rel_tol < 0.1) {
        return Err(ZerosError::InvalidBracket(format!(
            "rel_tol {rel_tol} outside (0, 0.1)"
        )));
    }
    if bracket.sign_lo * bracket.sign_hi != -1 {
        return Err(ZerosError::InvalidBracket(
            "bracket endpoints must have opposite signs".into(),
        ));
    }
    if bracket.lo.cmp(&bracket.hi) != Ordering::Less {
        return Err(ZerosError::InvalidBracket(
            "bracket must satisfy lo < hi".into(),
        ));
    }

    let half = Real::pow2(-1);
    let mut lo = bracket.lo.clone();
    let mut hi = bracket.hi.clone();
    let mut iterations: u32 = 0;
    let mut bits_used = policy.mantissa_bits();
    // required gap between the largest term and the residual, in bits;
    // one extra bit absorbs the f64 blur of the recorded term magnitude
    let guard_gap = policy.guard_bits() as f64 + 1.0;
    let mut last: Option<(Real, TransformValue)> = None;

    let record =
        |mid: &Real, tv: &TransformValue, lo: &Real, hi: &Real, iterations: u32, bits: usize| {
            let k = mid.to_f64();
            let width_rel = hi.sub_exact(lo).to_f64() / k;
            let (residual_log, margin_bits) = if tv.value.is_zero() {
                (None, None)
            } else {
                let gap = Real::from_f64(tv.max_term_logmag)
                    .sub_exact(tv.value.logmag())
                    .div(&Real::ln2(96), 96)
                    .to_f64();
                (Some(tv.value.logmag_f64()), Some(gap))
            };
            ZeroRecord {
                k,
                k_hex: mid.to_hex(),
                residual_log,
                max_term_log: tv.max_term_logmag,
                residual_margin_bits: margin_bits,
                rel_width: width_rel,
                iterations,
                bits_used: bits,
            }
        };

    loop {
        let width = hi.sub_exact(&lo);
        let width_target = Real::from_f64(rel_tol).mul(&lo, 128);
        let width_ok = width.cmp(&width_target) != Ordering::Greater;
        if width_ok {
            if let Some((mid, tv)) = &last {
                let residual_ok = tv.value.is_zero() || {
                    let gap = Real::from_f64(tv.max_term_logmag)
                        .sub_exact(tv.value.logmag())
                        .div(&Real::ln2(96), 96)
                        .to_f64();
                    gap >= guard_gap
                };
                if residual_ok {
                    let rec = record(mid, tv, &lo, &hi, iterations, bits_used);
                    confirm_sign_change(series, &rec, bracket, rel_tol, policy)?;
                    return Ok(rec);
                }
            }
        }
        if iterations >= MAX_ITERATIONS {
            return Err(ZerosError::IterationsExhausted { k: lo.to_f64() });
        }
        let mid = lo.add_exact(&hi).mul_exact(&half);
        let tv = certified_sign(series, &mid, policy)?;
        iterations += 1;
        bits_used = bits_used.max(tv.bits_used);
        if tv.value.sign() == 0 {
            // the sum cancelled exactly at a dyadic midpoint: the zero is
            // known outright and the bracket collapses to a point
            let rec = record(&mid, &tv, &mid, &mid, iterations, bits_used);
            confirm_sign_change(series, &rec, bracket, rel_tol, policy)?;
            return Ok(rec);
        }
        if tv.value.sign() == bracket.sign_lo {
            lo = mid.clone();
        } else {
            hi = mid.clone();
        }
        last = Some((mid, tv));
    }
}

fn confirm_sign_change(
    series: &AlternatingSeries,
    rec: &ZeroRecord,
    bracket: &ZeroBracket,
    rel_tol: f64,
    policy: &PrecisionPolicy,
) -> Result<(), ZerosError> {
    let w = 10.0 * rel_tol * rec.k;
    let left = certified_sign(series, &Real::from_f64(rec.k - w), policy)?;
    let right = certified_sign(series, &Real::from_f64(rec.k + w), policy)?;
    if left.value.sign() * right.value.sign() != -1 || left.value.sign() != bracket.sign_lo {
        return Err(ZerosError::SignConfirmFailed { k: rec.k });
    }
    Ok(())
}

/// Bracket and bisect every forced zero; the result is strictly increasing.
pub fn find_zeros(
    cert: &Certificate,
    series: &AlternatingSeries,
    rel_tol: f64,
    policy: &PrecisionPolicy,
) -> Result<Vec<ZeroRecord>, ZerosError> {
    let brackets = bracket_zeros(cert, series, policy)?;
    let mut out: Vec<ZeroRecord> = Vec::with_capacity(brackets.len());
    for br in &brackets {
        let rec = bisect(br, series, rel_tol, policy)?;
        debug_assert!(rec.k > br.lo.to_f64() && rec.k < br.hi.to_f64());
        if let Some(prev) = out.last() {
            if !(rec.k > prev.k) {
                return Err(ZerosError::InvalidBracket(format!(
                    "zeros not strictly increasing: {} then {}",
                    prev.k, rec.k
                )));
            }
        }
        out.push(rec);
    }
    Ok(out)
}

/// A copy of the certificate with the zero list filled in.
pub fn with_zeros(cert: &Certificate, zeros: Vec<ZeroRecord>) -> Certificate {
    let mut out = cert.clone();
    out.zeros = zeros;
    out
}
