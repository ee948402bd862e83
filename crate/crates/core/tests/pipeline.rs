//! Cross-module integration: forge → verify → zeros → serialize → re-verify,
//! plus property tests for the invariants the modules promise each other.

use lapforge_core::forge::render_erosion_report;
use lapforge_core::series::DEFAULT_HORIZON;
use lapforge_core::zeros::with_zeros;
use lapforge_core::{
    erosion_report, find_zeros, forge, ls_sum, run_all_checks, AlternatingSeries, BumpFamily,
    Certificate, ForgeParams, LogSigned, Partition, PrecisionPolicy, Real, SignPattern,
};
use proptest::prelude::*;

fn standard_series() -> AlternatingSeries {
    let fam = BumpFamily::standard(0.9, 2).unwrap();
    AlternatingSeries::geometric(fam, DEFAULT_HORIZON, SignPattern::Alternating).unwrap()
}

#[test]
fn forge_verify_zeros_roundtrip() {
    let series = standard_series();
    let params = ForgeParams {
        pairs: 2,
        ..Default::default()
    };
    let out = forge(&series, &params).unwrap();
    let policy = params.policy;

    let report = run_all_checks(&out.certificate, &out.series, &policy, 42).unwrap();
    assert!(
        report.passing,
        "fresh forge fails verification:\n{}",
        report.render_text()
    );

    let zeros = find_zeros(&out.certificate, &out.series, 1e-12, &policy).unwrap();
    assert_eq!(zeros.len(), 3);
    let full = with_zeros(&out.certificate, zeros);

    // serialize, reload, re-verify through the file representation
    let json = full.to_json();
    let reloaded = Certificate::from_json(&json).unwrap();
    assert_eq!(reloaded.to_json(), json);
    let series2 = reloaded.series().unwrap();
    let report2 = run_all_checks(&reloaded, &series2, &policy, 42).unwrap();
    assert!(report2.passing);
    // deterministic: the two reports serialize identically
    assert_eq!(report.to_json(), report2.to_json());

    for row in erosion_report(&reloaded) {
        assert!(row.clears_omega);
    }
    assert!(render_erosion_report(&reloaded).contains("yes"));
}

#[test]
fn zeros_interleave_checkpoints() {
    let series = standard_series();
    let out = forge(
        &series,
        &ForgeParams {
            pairs: 2,
            ..Default::default()
        },
    )
    .unwrap();
    let policy = PrecisionPolicy::default();
    let zeros = find_zeros(&out.certificate, &out.series, 1e-10, &policy).unwrap();
    let b = &out.certificate.b;
    for (i, z) in zeros.iter().enumerate() {
        assert!(
            b[i] < z.k && z.k < b[i + 1],
            "zero {} outside ({}, {})",
            z.k,
            b[i],
            b[i + 1]
        );
    }
}

#[test]
fn scaled_transform_bounded_by_c0_on_grid() {
    // |G(k)| ≤ c₀·e^k for k ≥ 0, i.e. |H(k)| ≤ c₀, sampled across scales
    let series = standard_series();
    let policy = PrecisionPolicy::default();
    let c0 = series.c0();
    for t in 0..=20 {
        let k = 2f64.powi(t) - 1.0;
        let tv = series.eval_h_f64(k, 1e-15, &policy).unwrap();
        assert!(
            tv.value.logmag_f64() <= c0.ln() + 1e-10,
            "|H({k})| = e^{} exceeds c0 = {c0}",
            tv.value.logmag_f64()
        );
    }
}

#[test]
fn transform_value_tail_is_honest() {
    // the gap between a truncated and a full evaluation is covered by the
    // truncated evaluation's own tail bound
    let series = standard_series();
    let policy = PrecisionPolicy::default();
    for k in [0.0, 0.5, 3.0, 17.0] {
        let full = series.eval_h_f64(k, 1e-19, &policy).unwrap();
        for tol in [1e-4, 1e-7, 1e-10] {
            let cut = series.eval_h_f64(k, tol, &policy).unwrap();
            let gap = (cut.value.decode() - full.value.decode()).abs();
            assert!(
                gap <= cut.tail_bound + 1e-19,
                "k={k} tol={tol}: gap {gap} exceeds stated tail {}",
                cut.tail_bound
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    // permuting the terms of a certified sum moves the result by less than
    // the policy's stated relative error
    #[test]
    fn ls_sum_permutation_stable(
        vals in proptest::collection::vec((-80.0f64..80.0, any::<bool>()), 1..12),
        rot in 0usize..12,
    ) {
        let policy = PrecisionPolicy::default();
        let terms: Vec<LogSigned> = vals
            .iter()
            .map(|&(lm, pos)| LogSigned::new(if pos { 1 } else { -1 }, Real::from_f64(lm)))
            .collect();
        let mut shuffled = terms.clone();
        let n = shuffled.len();
        shuffled.rotate_left(rot % n);
        let a = ls_sum(&terms, &policy);
        let b = ls_sum(&shuffled, &policy);
        match (a, b) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(x.value.sign(), y.value.sign());
                if x.value.sign() != 0 {
                    let d = x.value.logmag().sub(y.value.logmag(), 256).abs();
                    prop_assert!(d.to_f64() < 2f64.powi(-(256 - 40)));
                }
            }
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "permutation changed outcome: {:?} vs {:?}", x.is_ok(), y.is_ok()),
        }
    }

    // log-domain sums agree with plain f64 arithmetic in the moderate range
    #[test]
    fn ls_sum_matches_f64(vals in proptest::collection::vec(-1e12f64..1e12, 1..10)) {
        let policy = PrecisionPolicy::default();
        let plain: f64 = vals.iter().sum();
        let terms: Vec<LogSigned> = vals.iter().map(|&v| LogSigned::encode(v, 320)).collect();
        let out = ls_sum(&terms, &policy).unwrap();
        let got = out.value.decode();
        // only assert when the sum is not itself catastrophically cancelled
        let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if plain.abs() > scale * 1e-3 {
            prop_assert!((got - plain).abs() <= plain.abs() * 1e-12, "{got} vs {plain}");
        }
    }

    // supports stay strictly inside their interval and pairwise disjoint for
    // any admissible σ
    #[test]
    fn partition_supports_disjoint(sigma in 0.05f64..0.95, j in 2u32..40) {
        let part = Partition::new(sigma).unwrap();
        let (a, c) = part.support(j).unwrap();
        let (a2, _) = part.support(j + 1).unwrap();
        prop_assert!(a.cmp(&c) == std::cmp::Ordering::Less);
        prop_assert!(c.cmp(&a2) == std::cmp::Ordering::Less);
        let x = part.point_exact(j).unwrap();
        prop_assert!(x.cmp(&a) == std::cmp::Ordering::Less);
    }

    // two evaluations at tolerances tol and tol/10 agree within tol
    #[test]
    fn eval_h_tolerance_consistency(k in 0.0f64..200.0, tol_exp in -14i32..-4) {
        let series = standard_series();
        let policy = PrecisionPolicy::default();
        let tol = 10f64.powi(tol_exp);
        let coarse = series.eval_h_f64(k, tol, &policy).unwrap();
        let fine = series.eval_h_f64(k, tol / 10.0, &policy).unwrap();
        let gap = (coarse.value.decode() - fine.value.decode()).abs();
        prop_assert!(gap <= tol, "gap {gap} at k={k}, tol={tol}");
    }
}
