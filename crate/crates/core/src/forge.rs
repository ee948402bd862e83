//! The constructive engine: pick checkpoints `b_2 < b_3 < …` and shrink
//! coefficients so the transform provably alternates sign with margin ω.
//!
//! At step j the engine first *caps* `ε_j` against an erosion budget
//! `(s−1)·ω·2^{−(j−2)}` divided by the largest value `G_j` takes at any
//! already-fixed checkpoint (s = selection margin factor). Since `G_j` is
//! increasing, every later term contributes at most its budget at every
//! earlier checkpoint, and the budgets sum to strictly less than `(s−1)·ω` —
//! so an inequality selected with margin `s·ω` survives all later steps with
//! margin > ω. The engine then *searches* for `b_j` by growth-factor
//! doubling until the signed partial sum through j clears `s·ω`, which the
//! divergence of `G_j/G_i` (j > i) guarantees terminates.
//!
//! Selection comparisons are certified: the threshold is folded into the
//! log-domain sum as one more term, so a comparison is only accepted when
//! the sign of the difference survives the cancellation-depth check.
//!
//! Budgets depend only on j and the step-2 future allowance is the
//! M-independent constant `(s−1)·ω`, so growing `pairs` extends a
//! certificate without touching the prefix it shares with smaller runs.
//!
//! The forged series is the exact finite sum over `j ≤ 2M+1`: coefficients
//! past the last checkpoint are dropped outright, because keeping them would
//! need caps of the form `e^{−b_{2M+1} c_j}`, far below any representable
//! magnitude — and an uncapped tail would eat every certified margin.

use crate::basis::{BasisError, BumpFamily, Partition, Profile};
use crate::real::Real;
use crate::scaled::{ls_sum, LogSigned, PrecisionPolicy, ScaledError, SumOutcome};
use crate::series::{AlternatingSeries, SeriesError, SignPattern, ESCALATION_CAP_BITS};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Clone, Debug)]
pub struct ForgeParams {
    /// Alternation margin ω > 0 that the final transform must clear.
    pub omega: f64,
    /// Number of alternation pairs M: checkpoints run through `b_{2M+1}`.
    pub pairs: usize,
    /// Selection threshold multiplier (> 1): inequalities are selected at
    /// `factor·ω` so erosion can spend `(factor−1)·ω`.
    pub selection_margin_factor: f64,
    /// Multiplier for the checkpoint search (> 1).
    pub k_growth_factor: f64,
    /// Search budget per checkpoint.
    pub max_doublings: usize,
    pub policy: PrecisionPolicy,
}

impl Default for ForgeParams {
    fn default() -> Self {
        ForgeParams {
            omega: 0.1,
            pairs: 5,
            selection_margin_factor: 2.0,
            k_growth_factor: 2.0,
            max_doublings: 20000,
            policy: PrecisionPolicy::default(),
        }
    }
}

impl ForgeParams {
    fn validate(&self) -> Result<(), ForgeError> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(ForgeError::InvalidParams(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if self.pairs < 1 {
            return Err(ForgeError::InvalidParams(
                "pairs must be ≥ 1 (nothing to construct for M = 0)".into(),
            ));
        }
        if !(self.selection_margin_factor > 1.0) {
            return Err(ForgeError::InvalidParams(
                "selection margin factor must exceed 1".into(),
            ));
        }
        if !(self.k_growth_factor > 1.0) {
            return Err(ForgeError::InvalidParams(
                "growth factor must exceed 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ForgeError {
    #[error("invalid forge parameters: {0}")]
    InvalidParams(String),
    #[error("series capacity {have} too small: forging {pairs} pairs needs {need} coefficients")]
    CapacityTooSmall {
        have: usize,
        need: usize,
        pairs: usize,
    },
    #[error("checkpoint search exhausted at step j={j}: no sign flip through k={reached_k:e} after {doublings} doublings")]
    SearchExhausted {
        j: u32,
        reached_k: f64,
        doublings: usize,
    },
    #[error("final margin regressed at j={j}: {detail}")]
    MarginRegression { j: u32, detail: String },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Basis(#[from] BasisError),
}

/// One certified checkpoint.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarginEntry {
    pub j: u32,
    pub b: f64,
    /// Required sign of G(b): +1 for even j, −1 for odd.
    pub sign: i8,
    /// ln |H(b)| of the full forged series (H = e^{−k} G); display precision —
    /// at b ~ 10^18 an f64 holds a number of that size only to ~0.2.
    pub log_h: f64,
    /// The scaling exponent: H-units relate to G-units by e^{scale_log}.
    pub scale_log: f64,
    /// ln of the achieved margin in G-units, computed in exact arithmetic
    /// before conversion (small magnitude, full f64 precision).
    pub final_log_g: f64,
    /// ln of the signed partial sum through j at selection time, G-units.
    pub at_selection_log_g: f64,
    /// ln of the total magnitude later terms add at this checkpoint, G-units;
    /// absent for the last checkpoint.
    pub later_erosion_log_g: Option<f64>,
}

/// A located zero of G (appended by the zeros stage).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub k: f64,
    /// Exact dyadic midpoint of the final bracket.
    pub k_hex: String,
    /// ln |H| at the reported zero (display precision); absent when the
    /// log-domain sum cancelled exactly.
    pub residual_log: Option<f64>,
    /// ln of the largest term magnitude near the zero.
    pub max_term_log: f64,
    /// How many binary digits the residual sits below the largest term,
    /// computed in exact arithmetic; absent for an exact cancellation.
    /// The bisection contract requires this to reach the policy guard width.
    pub residual_margin_bits: Option<f64>,
    /// Final bracket width relative to k.
    pub rel_width: f64,
    pub iterations: u32,
    pub bits_used: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsEntry {
    pub j: u32,
    /// ln ε_j as f64 (display precision).
    pub log: f64,
    /// ln ε_j as an exact dyadic in hex form (authoritative).
    pub log_hex: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertParams {
    pub pairs: usize,
    pub selection_margin_factor: f64,
    pub k_growth_factor: f64,
    pub max_doublings: usize,
    pub mantissa_bits: usize,
    pub guard_bits: usize,
}

/// Machine-checkable output of a forge run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub version: u32,
    pub scheme: String,
    pub p: u32,
    pub sigma: f64,
    pub profile: String,
    pub omega: f64,
    pub params: CertParams,
    pub eps: Vec<EpsEntry>,
    pub b: Vec<f64>,
    pub margins: Vec<MarginEntry>,
    pub zeros: Vec<ZeroRecord>,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificate serialization");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Certificate, String> {
        let cert: Certificate = serde_json::from_str(s).map_err(|e| e.to_string())?;
        cert.validate()?;
        Ok(cert)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.version != 1 {
            return Err(format!("unsupported certificate version {}", self.version));
        }
        if self.scheme != "dyadic" {
            return Err(format!("unknown partition scheme {:?}", self.scheme));
        }
        if self.b.is_empty() || self.b.len() != self.margins.len() {
            return Err("checkpoint and margin lists are inconsistent".into());
        }
        for w in self.b.windows(2) {
            if !(w[0] < w[1]) {
                return Err(format!(
                    "checkpoints not strictly increasing: {} then {}",
                    w[0], w[1]
                ));
            }
        }
        for (i, m) in self.margins.iter().enumerate() {
            let expect = if m.j % 2 == 0 { 1 } else { -1 };
            if m.sign != expect {
                return Err(format!(
                    "margin sign at j={} is {}, expected {expect}",
                    m.j, m.sign
                ));
            }
            if i > 0 && self.margins[i - 1].j + 1 != m.j {
                return Err("margin indices must be consecutive".into());
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Result<BumpFamily, BasisError> {
        let profile = match self.profile.as_str() {
            "mollifier" => Profile::Mollifier,
            _ => Profile::Polynomial { p: self.p },
        };
        BumpFamily::new(Partition::new(self.sigma)?, profile)
    }

    /// Reconstruct the forged series from the stored coefficients (exact via
    /// the hex form).
    pub fn series(&self) -> Result<AlternatingSeries, SeriesError> {
        let family = self.family()?;
        let mut eps_log = Vec::with_capacity(self.eps.len());
        for e in &self.eps {
            let lm = Real::from_hex(&e.log_hex)
                .map_err(|err| SeriesError::InvalidArgument(format!("bad eps hex: {err}")))?;
            eps_log.push(lm);
        }
        AlternatingSeries::from_eps_logs(family, eps_log, SignPattern::Alternating, false)
    }

    pub fn policy(&self) -> PrecisionPolicy {
        PrecisionPolicy::new(self.params.mantissa_bits, self.params.guard_bits).unwrap_or_default()
    }
}

pub struct ForgeOutcome {
    pub series: AlternatingSeries,
    pub certificate: Certificate,
}

/// Sum log-domain terms with automatic precision escalation, recomputing the
/// terms themselves at each higher working width (their log magnitudes are
/// only as accurate as the precision they were built with).
fn certified_sum_by<F>(mk_terms: F, policy: &PrecisionPolicy) -> Result<SumOutcome, ForgeError>
where
    F: Fn(usize) -> Result<Vec<LogSigned>, ForgeError>,
{
    let mut bits = policy.mantissa_bits();
    loop {
        let terms = mk_terms(bits)?;
        match ls_sum(&terms, &policy.with_mantissa(bits)) {
            Ok(out) => return Ok(out),
            Err(ScaledError::PrecisionExhausted { needed_bits, .. }) => {
                let next = (bits * 2).max(needed_bits.next_power_of_two());
                if next > ESCALATION_CAP_BITS {
                    return Err(ForgeError::Series(SeriesError::PrecisionEscalationFailed {
                        needed_bits,
                        cap_bits: ESCALATION_CAP_BITS,
                    }));
                }
                bits = next;
            }
            Err(e @ ScaledError::InvalidPolicy { .. }) => {
                return Err(ForgeError::InvalidParams(e.to_string()))
            }
        }
    }
}

/// Construct checkpoints and eroded coefficients such that the forged series
/// alternates with certified margin ≥ ω at every checkpoint.
pub fn forge(series: &AlternatingSeries, params: &ForgeParams) -> Result<ForgeOutcome, ForgeError> {
    params.validate()?;
    if series.pattern() != SignPattern::Alternating {
        return Err(ForgeError::InvalidParams(
            "forge needs the alternating sign pattern".into(),
        ));
    }
    let m = params.pairs;
    let last_j = 2 * m as u32 + 1;
    let need = 2 * m + 2;
    if series.len() < need {
        return Err(ForgeError::CapacityTooSmall {
            have: series.len(),
            need,
            pairs: m,
        });
    }

    let family = series.family().clone();
    let bits_f = params.policy.mantissa_bits().max(320);
    let omega = params.omega;
    let smf = params.selection_margin_factor;
    let kgf = params.k_growth_factor;

    // working copy of ln ε_j for j = 2..=last_j
    let mut eps_log: Vec<Real> = (2..=last_j)
        .map(|j| series.eps_log(j).expect("capacity checked").clone())
        .collect();
    let idx_of = |j: u32| (j - 2) as usize;
    let sign_of = |j: u32| if j % 2 == 0 { 1i8 } else { -1i8 };

    // ln of the selection threshold s·ω, conservatively rounded up
    let sel_threshold_ln = |extra: f64| {
        let v = (smf * omega + extra) * (1.0 + 1e-12);
        Real::from_f64(v.ln()).add_exact(&Real::pow2(-40))
    };
    // erosion budget for step j, shaved a hair so the f64 schedule still sums
    // strictly under (s−1)·ω
    let budget_ln = |j: u32| {
        let base = (smf - 1.0) * omega * (1.0 - 2f64.powi(-20));
        Real::from_f64(base.ln())
            .add_exact(&Real::from_f64(
                -(((j - 2) as f64) * std::f64::consts::LN_2),
            ))
            .floor_to_bits(bits_f)
    };

    // signed partial-sum terms through j at k, multiplied by the step sign
    let partial_terms =
        |eps_log: &[Real], j: u32, k: &Real, bits: usize| -> Result<Vec<LogSigned>, ForgeError> {
            let s_j = sign_of(j);
            let pol = params
                .policy
                .with_mantissa(bits.max(params.policy.mantissa_bits()));
            let mut terms = Vec::with_capacity(idx_of(j) + 1);
            for i in 2..=j {
                let g = family.moment(i, k, &pol)?;
                let lm = eps_log[idx_of(i)].add_exact(g.logmag());
                terms.push(LogSigned::new(s_j * sign_of(i), lm));
            }
            Ok(terms)
        };

    let mut b: Vec<f64> = Vec::with_capacity(2 * m);
    let mut at_selection_log_g: Vec<f64> = Vec::with_capacity(2 * m);

    for j in 2..=last_j {
        if j > 2 {
            // CAP: ε_j ≤ budget_j / max_{p<j} G_j(b_p), with the moment error
            // absorbed by bumping the divisor before rounding down
            let mut gmax: Option<Real> = None;
            for &bp in &b {
                let g = family.moment(j, &Real::from_f64(bp), &params.policy)?;
                let lm = g.logmag().clone();
                gmax = Some(match gmax {
                    None => lm,
                    Some(cur) => {
                        if lm.cmp(&cur) == Ordering::Greater {
                            lm
                        } else {
                            cur
                        }
                    }
                });
            }
            let gmax = gmax.expect("at least one prior checkpoint");
            let slack = Real::pow2(-(bits_f as i32 / 2));
            let cap = budget_ln(j)
                .sub_exact(&gmax.add_exact(&slack))
                .floor_to_bits(bits_f);
            let idx = idx_of(j);
            if cap.cmp(&eps_log[idx]) == Ordering::Less {
                eps_log[idx] = cap;
            }
            // keep strict decrease even if a cap lands above the previous value
            if eps_log[idx].cmp(&eps_log[idx - 1]) != Ordering::Less {
                eps_log[idx] = eps_log[idx - 1].sub_exact(&Real::one());
            }
        }

        // SEARCH: grow k until the signed partial sum clears the threshold
        let extra = if j == 2 { (smf - 1.0) * omega } else { 0.0 };
        let threshold = sel_threshold_ln(extra);
        let mut k = if j == 2 { 1.0 } else { b[idx_of(j) - 1] * kgf };
        let mut doublings = 0usize;
        loop {
            if !k.is_finite() {
                return Err(ForgeError::SearchExhausted {
                    j,
                    reached_k: k,
                    doublings,
                });
            }
            let kr = Real::from_f64(k);
            let out = certified_sum_by(
                |bits| {
                    let mut cond = partial_terms(&eps_log, j, &kr, bits)?;
                    cond.push(LogSigned::new(-1, threshold.clone()));
                    Ok(cond)
                },
                &params.policy,
            )?;
            if out.value.sign() >= 0 {
                let sel =
                    certified_sum_by(|bits| partial_terms(&eps_log, j, &kr, bits), &params.policy)?;
                if sel.value.sign() != 1 {
                    return Err(ForgeError::MarginRegression {
                        j,
                        detail: "partial sum lost its sign after clearing the threshold".into(),
                    });
                }
                b.push(k);
                at_selection_log_g.push(sel.value.logmag_f64());
                break;
            }
            doublings += 1;
            if doublings > params.max_doublings {
                return Err(ForgeError::SearchExhausted {
                    j,
                    reached_k: k,
                    doublings,
                });
            }
            k *= kgf;
        }
    }

    // the forged function is the exact finite sum through last_j
    let forged = AlternatingSeries::from_eps_logs(
        family.clone(),
        eps_log.clone(),
        SignPattern::Alternating,
        false,
    )?;

    // final re-evaluation of every margin through the independent
    // truncation-controlled path
    let mut margins = Vec::with_capacity(b.len());
    for (pos, &b_j) in b.iter().enumerate() {
        let j = pos as u32 + 2;
        let s_j = sign_of(j);
        let tol = omega / 100.0 * (-b_j).exp(); // underflows to 0 for large b: take every term
        let tv = forged.eval_h(&Real::from_f64(b_j), tol, &params.policy)?;
        if tv.value.sign() != s_j {
            return Err(ForgeError::MarginRegression {
                j,
                detail: format!("full series sign {} at b_{j} = {b_j}", tv.value.sign()),
            });
        }
        let log_h = tv.value.logmag_f64();
        // the margin in G-units must come out of exact arithmetic: log_h and
        // b_j are both ~b_j in size and their f64 sum would smear by b·2⁻⁵²
        let final_log_g = tv.value.logmag().add_exact(&Real::from_f64(b_j)).to_f64();
        if final_log_g < omega.ln() {
            return Err(ForgeError::MarginRegression {
                j,
                detail: format!("margin e^{final_log_g:.6} below ω = {omega}"),
            });
        }
        // total magnitude the later terms contribute at this checkpoint
        let kr = Real::from_f64(b_j);
        let later_erosion_log_g = if j == last_j {
            None
        } else {
            let erosion = certified_sum_by(
                |bits| {
                    let pol = params
                        .policy
                        .with_mantissa(bits.max(params.policy.mantissa_bits()));
                    let mut terms = Vec::new();
                    for i in (j + 1)..=last_j {
                        let g = family.moment(i, &kr, &pol)?;
                        let lm = eps_log[idx_of(i)].add_exact(g.logmag());
                        terms.push(LogSigned::new(1, lm));
                    }
                    Ok(terms)
                },
                &params.policy,
            )?;
            Some(erosion.value.logmag_f64())
        };
        margins.push(MarginEntry {
            j,
            b: b_j,
            sign: s_j,
            log_h,
            scale_log: -b_j,
            final_log_g,
            at_selection_log_g: at_selection_log_g[pos],
            later_erosion_log_g,
        });
    }

    let (p, profile) = match family.profile {
        Profile::Polynomial { p } => (p, "polynomial"),
        Profile::Mollifier => (0, "mollifier"),
    };
    let certificate = Certificate {
        version: 1,
        scheme: "dyadic".into(),
        p,
        sigma: family.partition.sigma(),
        profile: profile.into(),
        omega,
        params: CertParams {
            pairs: m,
            selection_margin_factor: smf,
            k_growth_factor: kgf,
            max_doublings: params.max_doublings,
            mantissa_bits: params.policy.mantissa_bits(),
            guard_bits: params.policy.guard_bits(),
        },
        eps: eps_log
            .iter()
            .enumerate()
            .map(|(i, lm)| EpsEntry {
                j: i as u32 + 2,
                log: lm.to_f64(),
                log_hex: lm.to_hex(),
            })
            .collect(),
        b,
        margins,
        zeros: Vec::new(),
    };

    Ok(ForgeOutcome {
        series: forged,
        certificate,
    })
}

/// Per-checkpoint erosion accounting derived from a certificate.
#[derive(Clone, Debug)]
pub struct ErosionRow {
    pub j: u32,
    pub b: f64,
    pub at_selection_log_g: f64,
    pub later_erosion_log_g: f64,
    pub final_log_g: f64,
    pub clears_omega: bool,
}

pub fn erosion_report(cert: &Certificate) -> Vec<ErosionRow> {
    cert.margins
        .iter()
        .map(|m| ErosionRow {
            j: m.j,
            b: m.b,
            at_selection_log_g: m.at_selection_log_g,
            later_erosion_log_g: m.later_erosion_log_g.unwrap_or(f64::NEG_INFINITY),
            final_log_g: m.final_log_g,
            clears_omega: m.final_log_g >= cert.omega.ln(),
        })
        .collect()
}

pub fn render_erosion_report(cert: &Certificate) -> String {
    let mut out = String::new();
    out.push_str("  j            b     ln sel(G)    ln erosion   ln final(G)  ≥ ω\n");
    for r in erosion_report(cert) {
        out.push_str(&format!(
            "{:>3} {:>12.5e} {:>13.5e} {:>13.5e} {:>13.5e}  {}\n",
            r.j,
            r.b,
            r.at_selection_log_g,
            r.later_erosion_log_g,
            r.final_log_g,
            if r.clears_omega { "yes" } else { "NO" }
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::DEFAULT_HORIZON;

    fn geometric() -> AlternatingSeries {
        let fam = BumpFamily::standard(0.9, 2).unwrap();
        AlternatingSeries::geometric(fam, DEFAULT_HORIZON, SignPattern::Alternating).unwrap()
    }

    fn small_params(pairs: usize, omega: f64) -> ForgeParams {
        ForgeParams {
            omega,
            pairs,
            ..ForgeParams::default()
        }
    }

    #[test]
    fn degenerate_zero_pairs_rejected() {
        let s = geometric();
        match forge(&s, &small_params(0, 0.1)) {
            Err(ForgeError::InvalidParams(msg)) => assert!(msg.contains("M = 0")),
            other => panic!("expected InvalidParams, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn capacity_precondition() {
        let fam = BumpFamily::standard(0.9, 2).unwrap();
        let s = AlternatingSeries::geometric(fam, 4, SignPattern::Alternating).unwrap(); // 3 coeffs
        assert!(matches!(
            forge(&s, &small_params(1, 0.1)),
            Err(ForgeError::CapacityTooSmall { need: 4, .. })
        ));
    }

    #[test]
    fn forge_one_pair_and_recheck() {
        let s = geometric();
        let params = small_params(1, 0.1);
        let out = forge(&s, &params).unwrap();
        let cert = &out.certificate;
        assert_eq!(cert.b.len(), 2);
        assert!(cert.b[0] < cert.b[1]);
        assert_eq!(cert.margins[0].sign, 1);
        assert_eq!(cert.margins[1].sign, -1);
        let ln_omega = 0.1f64.ln();
        for m in &cert.margins {
            assert!(m.final_log_g >= ln_omega, "margin at j={} too small", m.j);
        }
        // independent re-check at tol = ω·e^{−b}/100
        for m in &cert.margins {
            let tol = 0.001 * (-m.b).exp();
            let tv = out.series.eval_h_f64(m.b, tol, &params.policy).unwrap();
            assert_eq!(tv.value.sign(), m.sign);
            let g_log = tv.value.logmag().add_exact(&Real::from_f64(m.b)).to_f64();
            assert!(g_log >= ln_omega);
        }
    }

    #[test]
    fn large_omega_still_forgeable() {
        // the search raises the leading term arbitrarily, so ω = 10 works too
        let s = geometric();
        let out = forge(&s, &small_params(1, 10.0)).unwrap();
        for m in &out.certificate.margins {
            assert!(m.final_log_g >= 10.0f64.ln());
        }
    }

    #[test]
    fn eps_only_shrink_and_stay_decreasing() {
        let s = geometric();
        let out = forge(&s, &small_params(2, 0.1)).unwrap();
        let forged = &out.series;
        for j in 2..=5u32 {
            let before = s.eps_log(j).unwrap();
            let after = forged.eps_log(j).unwrap();
            assert!(
                after.cmp(before) != std::cmp::Ordering::Greater,
                "ε_{j} grew"
            );
        }
        for j in 2..5u32 {
            assert!(
                forged
                    .eps_log(j + 1)
                    .unwrap()
                    .cmp(forged.eps_log(j).unwrap())
                    == std::cmp::Ordering::Less
            );
        }
    }

    #[test]
    fn deterministic_and_monotone_in_pairs() {
        let s = geometric();
        let a = forge(&s, &small_params(2, 0.1)).unwrap().certificate;
        let b = forge(&s, &small_params(2, 0.1)).unwrap().certificate;
        assert_eq!(
            a.to_json(),
            b.to_json(),
            "same params must forge identical certificates"
        );

        // growing M extends the prefix without touching it
        let c = forge(&s, &small_params(3, 0.1)).unwrap().certificate;
        assert_eq!(&c.b[..a.b.len()], &a.b[..]);
        for (ea, ec) in a.eps.iter().zip(&c.eps) {
            assert_eq!(ea.log_hex, ec.log_hex, "eps prefix changed at j={}", ea.j);
        }
    }

    #[test]
    fn erosion_budgets_stay_under_allowance() {
        let s = geometric();
        let params = small_params(3, 0.1);
        let out = forge(&s, &params).unwrap();
        let rows = erosion_report(&out.certificate);
        assert_eq!(rows.len(), 6);
        let allowance = (params.selection_margin_factor - 1.0) * params.omega;
        for r in &rows {
            assert!(r.clears_omega, "final margin at j={} under ω", r.j);
            if r.later_erosion_log_g.is_finite() {
                assert!(
                    r.later_erosion_log_g < allowance.ln(),
                    "erosion at j={} exceeds the (s−1)·ω allowance",
                    r.j
                );
            }
        }
        // one pair → exactly two checkpoints reported
        let two = forge(&s, &small_params(1, 0.1)).unwrap();
        assert_eq!(erosion_report(&two.certificate).len(), 2);
    }

    #[test]
    fn forged_c0_matches_certificate_coefficients() {
        let s = geometric();
        let out = forge(&s, &small_params(2, 0.1)).unwrap();
        let from_cert: f64 = out
            .certificate
            .eps
            .iter()
            .map(|e| if e.log > -745.0 { e.log.exp() } else { 0.0 })
            .sum();
        assert!((out.series.c0() - from_cert).abs() <= from_cert * 1e-12);
    }

    #[test]
    fn certificate_round_trips_and_validates() {
        let s = geometric();
        let out = forge(&s, &small_params(1, 0.1)).unwrap();
        let json = out.certificate.to_json();
        let back = Certificate::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json, "bit-exact serialization round trip");
        // the reconstructed series evaluates identically
        let rebuilt = back.series().unwrap();
        let pol = PrecisionPolicy::default();
        let k = Real::from_f64(back.b[1]);
        let h1 = out.series.eval_h(&k, 0.0, &pol).unwrap();
        let h2 = rebuilt.eval_h(&k, 0.0, &pol).unwrap();
        assert_eq!(h1.value.sign(), h2.value.sign());
        assert_eq!(
            h1.value.logmag().cmp(h2.value.logmag()),
            std::cmp::Ordering::Equal
        );

        // tampering must be caught by validation
        let mut bad = back.clone();
        bad.b[0] = bad.b[1] + 1.0;
        assert!(bad.validate().is_err());
    }
}
