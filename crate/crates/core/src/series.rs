//! The alternating bump series `g = Σ (−1)^j ε_j f_j` (and its all-positive
//! sibling `f = Σ ε_j f_j`), with transform evaluation under rigorous
//! truncation control.
//!
//! Real-axis evaluation works on the scaled transform `H(k) = e^{−k} G(k)`:
//! every term `ε_j e^{−k(1−c_j)} M̄_j(k)` has magnitude at most `ε_j`, the
//! zeros and signs of `H` and `G` coincide for real `k`, and nothing can
//! overflow. Truncating after `J` stored terms leaves a tail bounded by
//! `Σ_{j>J} ε_j` (each omitted term is at most `ε_j` in the same scaling),
//! which is what `TransformValue::tail_bound` records.
//!
//! Coefficients are held in log form as exact dyadic numbers. A series
//! created by [`AlternatingSeries::geometric`] represents the ideal
//! coefficient sequence `ε_j = 2^{−j}` continued past the stored horizon
//! (`geometric_tail`), so its evaluations carry an irreducible tail
//! uncertainty of `2^{−horizon}` and `c0` includes that cap. A forged series
//! is the exact finite sum of its stored terms and evaluates exactly.

use crate::basis::{BasisError, Bump, BumpFamily};
use crate::real::Real;
use crate::scaled::{ls_sum, LogSigned, PrecisionPolicy, ScaledError};
use num_complex::Complex64;
use std::cmp::Ordering;
use thiserror::Error;

pub const DEFAULT_HORIZON: u32 = 64;
/// Hard ceiling for automatic precision escalation inside `eval_H`.
pub const ESCALATION_CAP_BITS: usize = 1 << 17;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot meet tolerance {tol:.3e}: stored coefficients leave an irreducible tail of {floor:.3e}")]
    CannotMeetTolerance { tol: f64, floor: f64 },
    #[error("precision escalation failed: needed ≥ {needed_bits} bits, cap {cap_bits}")]
    PrecisionEscalationFailed { needed_bits: usize, cap_bits: usize },
    #[error("coefficients must decrease strictly (violated at position {idx})")]
    NonDecreasingEps { idx: usize },
    #[error("coefficient {idx} exceeds the geometric cap 2^-j required for the tail bound")]
    CapViolated { idx: usize },
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// Term signs: `(−1)^j` for the oscillating `g`, all `+` for `f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignPattern {
    Alternating,
    AllPositive,
}

impl SignPattern {
    pub fn sign(&self, j: u32) -> i8 {
        match self {
            SignPattern::AllPositive => 1,
            SignPattern::Alternating => {
                if j % 2 == 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }
}

/// A scaled transform value with its truncation bookkeeping.
#[derive(Clone, Debug)]
pub struct TransformValue {
    pub value: LogSigned,
    /// Index of the last series term included.
    pub truncation_j: u32,
    /// Rigorous bound on everything omitted, in the same scaling as `value`.
    pub tail_bound: f64,
    pub bits_used: usize,
    pub cancellation_depth: f64,
    pub max_term_logmag: f64,
}

#[derive(Clone, Debug)]
pub struct AlternatingSeries {
    family: BumpFamily,
    first_j: u32,
    eps_log: Vec<Real>,
    pattern: SignPattern,
    geometric_tail: bool,
    bumps: Vec<Bump>,
    one_minus_c: Vec<Real>,
}

impl AlternatingSeries {
    /// The ideal series with `ε_j = 2^{−j}` (stored as exact dyadic log
    /// values rounded toward −∞ so the cap holds with certainty), conceptually
    /// continued past `horizon`.
    pub fn geometric(
        family: BumpFamily,
        horizon: u32,
        pattern: SignPattern,
    ) -> Result<Self, SeriesError> {
        if horizon < 3 {
            return Err(SeriesError::InvalidArgument("horizon must be ≥ 3".into()));
        }
        let ln2 = Real::ln2(384);
        let mut eps_log = Vec::new();
        for j in 2..=horizon {
            let lm = ln2.mul(&Real::from_u64(j as u64), 384).neg();
            // strictly below −j·ln2, then snapped to 320 bits toward −∞
            let lm = lm.sub_exact(&Real::pow2(-360)).floor_to_bits(320);
            eps_log.push(lm);
        }
        Self::from_eps_logs(family, eps_log, pattern, true)
    }

    /// Build from explicit log-coefficients for `j = 2, 3, …`.
    pub fn from_eps_logs(
        family: BumpFamily,
        eps_log: Vec<Real>,
        pattern: SignPattern,
        geometric_tail: bool,
    ) -> Result<Self, SeriesError> {
        if eps_log.is_empty() {
            return Err(SeriesError::InvalidArgument(
                "series needs at least one coefficient".into(),
            ));
        }
        for idx in 1..eps_log.len() {
            if eps_log[idx].cmp(&eps_log[idx - 1]) != Ordering::Less {
                return Err(SeriesError::NonDecreasingEps { idx });
            }
        }
        if geometric_tail {
            let ln2 = Real::ln2(384);
            for (idx, lm) in eps_log.iter().enumerate() {
                let j = idx as u64 + 2;
                let cap = ln2.mul(&Real::from_u64(j), 384).neg();
                if lm.cmp(&cap) == Ordering::Greater {
                    return Err(SeriesError::CapViolated { idx });
                }
            }
        }
        let first_j = 2u32;
        let mut bumps = Vec::with_capacity(eps_log.len());
        let mut one_minus_c = Vec::with_capacity(eps_log.len());
        for idx in 0..eps_log.len() {
            let bump = family.bump(first_j + idx as u32)?;
            one_minus_c.push(Real::one().sub_exact(&bump.c));
            bumps.push(bump);
        }
        Ok(AlternatingSeries {
            family,
            first_j,
            eps_log,
            pattern,
            geometric_tail,
            bumps,
            one_minus_c,
        })
    }

    pub fn family(&self) -> &BumpFamily {
        &self.family
    }

    pub fn pattern(&self) -> SignPattern {
        self.pattern
    }

    pub fn len(&self) -> usize {
        self.eps_log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps_log.is_empty()
    }

    pub fn first_j(&self) -> u32 {
        self.first_j
    }

    /// Largest stored index.
    pub fn horizon(&self) -> u32 {
        self.first_j + self.eps_log.len() as u32 - 1
    }

    pub fn eps_log(&self, j: u32) -> Option<&Real> {
        self.idx(j).map(|i| &self.eps_log[i])
    }

    pub fn eps_logs(&self) -> &[Real] {
        &self.eps_log
    }

    pub fn has_geometric_tail(&self) -> bool {
        self.geometric_tail
    }

    /// Same coefficients, different sign pattern.
    pub fn with_pattern(&self, pattern: SignPattern) -> Self {
        let mut out = self.clone();
        out.pattern = pattern;
        out
    }

    /// Same coefficients truncated to `j ≤ last_j`, tail dropped exactly.
    pub fn truncated(&self, last_j: u32) -> Result<Self, SeriesError> {
        let keep = self.idx(last_j).ok_or_else(|| {
            SeriesError::InvalidArgument(format!("truncation index {last_j} not stored"))
        })?;
        Self::from_eps_logs(
            self.family.clone(),
            self.eps_log[..=keep].to_vec(),
            self.pattern,
            false,
        )
    }

    fn idx(&self, j: u32) -> Option<usize> {
        if j < self.first_j {
            return None;
        }
        let i = (j - self.first_j) as usize;
        (i < self.eps_log.len()).then_some(i)
    }

    fn sign_at(&self, j: u32) -> i8 {
        self.pattern.sign(j)
    }

    /// Rigorous f64 upper bound on ε at stored position `idx`.
    fn eps_upper_f64(&self, idx: usize) -> f64 {
        let lm = self.eps_log[idx].to_f64() + 1e-9;
        if lm < -700.0 {
            // below anything any tolerance can see, but never rounded to 0
            1e-300f64.min((lm.max(-745.0)).exp().max(1e-300))
        } else {
            lm.exp() * (1.0 + 1e-12)
        }
    }

    /// Upper bound on everything after the first `count` stored terms, in
    /// H-scaling (each omitted term is ≤ ε_j for k ≥ 0).
    fn tail_upper(&self, count: usize) -> f64 {
        let mut t = 0.0;
        for idx in count..self.eps_log.len() {
            t += self.eps_upper_f64(idx);
        }
        if self.geometric_tail {
            t += 2f64.powi(-(self.horizon() as i32));
        }
        t
    }

    /// `c₀ = ∫|g| = Σ ε_j` over stored coefficients, plus the tail cap for a
    /// geometric series.
    pub fn c0(&self) -> f64 {
        let mut acc = 0.0;
        for lm in &self.eps_log {
            let v = lm.to_f64();
            if v > -745.0 {
                acc += v.exp();
            }
        }
        if self.geometric_tail {
            acc += 2f64.powi(-(self.horizon() as i32));
        }
        acc
    }

    /// Pointwise value of g at x (plain float; a coefficient below the f64
    /// range decodes to 0 — use `eval_g_signed` when only the sign matters).
    pub fn eval_g(&self, x: f64) -> f64 {
        self.eval_g_signed(x).decode()
    }

    /// Pointwise value of g in log form. At most one bump is supported at any
    /// x, so this is a single term or an exact zero.
    pub fn eval_g_signed(&self, x: f64) -> LogSigned {
        if !(x > 0.0 && x < 1.0) {
            return LogSigned::zero();
        }
        // candidate index from x_j = 1 − 2^{−j} ≤ x  ⇔  j ≤ −log2(1−x)
        let j0 = (-(1.0 - x).log2()).floor() as i64;
        for j in [j0 - 1, j0, j0 + 1] {
            if j < self.first_j as i64 {
                continue;
            }
            let Some(idx) = self.idx(j as u32) else {
                continue;
            };
            let bump = &self.bumps[idx];
            if let Some(logf) = bump.log_density(x, 192) {
                let lm = self.eps_log[idx].add_exact(&logf);
                return LogSigned::new(self.sign_at(j as u32), lm);
            }
        }
        LogSigned::zero()
    }

    /// Scaled transform `H(k) = e^{−k} G(k)` for real k ≥ 0, truncated so the
    /// omitted tail is at most `tol`, with automatic precision escalation
    /// from `policy` up to `cap_bits` when the terms cancel deeply.
    pub fn eval_h_capped(
        &self,
        k: &Real,
        tol: f64,
        policy: &PrecisionPolicy,
        cap_bits: usize,
    ) -> Result<TransformValue, SeriesError> {
        if k.is_negative() {
            return Err(SeriesError::InvalidArgument("eval_H needs k ≥ 0".into()));
        }
        if !(tol >= 0.0) || !tol.is_finite() {
            return Err(SeriesError::InvalidArgument(format!("bad tolerance {tol}")));
        }
        // smallest truncation whose tail clears tol
        let mut count = self.eps_log.len();
        while count > 0 && self.tail_upper(count - 1) <= tol {
            count -= 1;
        }
        let tail = self.tail_upper(count);
        if tail > tol && count == self.eps_log.len() {
            return Err(SeriesError::CannotMeetTolerance { tol, floor: tail });
        }
        if count == 0 {
            count = 1; // keep at least the leading term
        }

        let mut bits = policy.mantissa_bits();
        loop {
            let terms = self.scaled_terms(k, count, bits);
            match ls_sum(&terms, &policy.with_mantissa(bits)) {
                Ok(out) => {
                    return Ok(TransformValue {
                        value: out.value,
                        truncation_j: self.first_j + count as u32 - 1,
                        tail_bound: self.tail_upper(count),
                        bits_used: bits,
                        cancellation_depth: out.cancellation_depth,
                        max_term_logmag: out.max_term_logmag,
                    })
                }
                Err(ScaledError::PrecisionExhausted { needed_bits, .. }) => {
                    let next = (bits * 2).max(needed_bits.next_power_of_two());
                    if next > cap_bits {
                        return Err(SeriesError::PrecisionEscalationFailed {
                            needed_bits: needed_bits.max(next),
                            cap_bits,
                        });
                    }
                    bits = next;
                }
                Err(e @ ScaledError::InvalidPolicy { .. }) => {
                    return Err(SeriesError::InvalidArgument(e.to_string()))
                }
            }
        }
    }

    /// `eval_h_capped` with the default escalation ceiling.
    pub fn eval_h(
        &self,
        k: &Real,
        tol: f64,
        policy: &PrecisionPolicy,
    ) -> Result<TransformValue, SeriesError> {
        self.eval_h_capped(k, tol, policy, ESCALATION_CAP_BITS)
    }

    pub fn eval_h_f64(
        &self,
        k: f64,
        tol: f64,
        policy: &PrecisionPolicy,
    ) -> Result<TransformValue, SeriesError> {
        self.eval_h(&Real::from_f64(k), tol, policy)
    }

    /// The H-scaled terms `sign_j · ε_j e^{−k(1−c_j)} M̄_j(k)` for the first
    /// `count` stored indices, at the given working precision.
    fn scaled_terms(&self, k: &Real, count: usize, bits: usize) -> Vec<LogSigned> {
        let mut terms = Vec::with_capacity(count);
        for idx in 0..count {
            let j = self.first_j + idx as u32;
            let decay = k.mul_exact(&self.one_minus_c[idx]);
            let moment = self
                .family
                .moment_of(
                    &self.bumps[idx],
                    k,
                    &PrecisionPolicy::new(bits.max(53), 16).unwrap(),
                )
                .expect("polynomial moment cannot fail");
            // moment logmag = k·c_j + ln M̄; shift to H-scaling by −k·1
            let lm = self.eps_log[idx]
                .add_exact(moment.logmag())
                .sub_exact(&k.mul_exact(&self.bumps[idx].c))
                .sub_exact(&decay);
            terms.push(LogSigned::new(self.sign_at(j), lm));
        }
        terms
    }

    /// `G(k)` for complex k with ℜk ≤ 0, |k| ≤ 10⁶, termwise in plain
    /// precision; the result is bounded by `c0` up to the stated tolerance.
    pub fn eval_g_complex(&self, k: Complex64, tol: f64) -> Result<Complex64, SeriesError> {
        if k.re > 0.0 && k.im != 0.0 {
            return Err(SeriesError::InvalidArgument(format!(
                "ℜk must be ≤ 0, got {k}"
            )));
        }
        if !(tol > 1e-250) {
            return Err(SeriesError::InvalidArgument(format!(
                "tolerance {tol} below the plain-precision floor"
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in 0..self.eps_log.len() {
            let j = self.first_j + idx as u32;
            let lm = self.eps_log[idx].to_f64();
            if lm < -745.0 {
                continue; // below f64: covered by the tail bound
            }
            let eps = lm.exp();
            if eps * (self.eps_log.len() - idx) as f64 <= tol * 1e-3 {
                break;
            }
            let g_j = self.family.moment_complex(j, k)?;
            acc += g_j * eps * self.sign_at(j) as f64;
        }
        Ok(acc)
    }
}
