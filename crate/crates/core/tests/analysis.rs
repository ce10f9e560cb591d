mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use common::SQRT2;
use nncert::analysis::*;
use nncert::generators::*;
use nncert::oracles::{classify, OracleConfig, RegionLabel};
use nncert::Error;

#[test]
fn chsh_of_boxes() {
    assert_eq!(chsh(&pr_box(1.0).unwrap()).unwrap().value, 4.0);
    assert!((chsh(&pr_box(FRAC_1_SQRT_2).unwrap()).unwrap().value - 2.0 * SQRT2).abs() < 1e-12);
    let uniform = BipartiteBox::from_fn(|_, _, _, _| 0.25);
    assert_eq!(chsh(&uniform).unwrap().value, 0.0);
}

#[test]
fn postselected_chsh_is_linear_in_visibility() {
    for k in 0..=10 {
        let v = k as f64 / 10.0;
        let p = post_selection_box(v, 0.25).unwrap();
        let value = postselected_chsh(&p, 0).unwrap().value;
        assert!((value - 4.0 * v).abs() < 1e-10, "V={v}: {value}");
    }
}

#[test]
fn fritz_functional_ignores_z() {
    for v in [0.2, 0.7, 1.0] {
        let p = fritz(FritzSide::R, v).unwrap();
        let a = fritz_chsh(&p, 0).unwrap().value;
        let b = fritz_chsh(&p, 1).unwrap().value;
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn fritz_conditioning_needs_both_charlie_outputs() {
    // Charlie always answers 0.
    let p = nncert::Correlation::from_fn(nncert::ScenarioShape::MINIMAL, |_, _, _, _, c| {
        if c == 0 {
            0.25
        } else {
            0.0
        }
    })
    .unwrap();
    assert!(fritz_chsh(&p, 0).is_err());
}

#[test]
fn mu_range_without_correlations_has_no_flip() {
    let err = mu_range(0.0, 0.25, &BisectionConfig::default(), &OracleConfig::default())
        .unwrap_err();
    assert!(matches!(err, Error::NoBracket(_)));
}

#[test]
fn mu_range_brackets_shrink_with_tol() {
    let cfg = OracleConfig::default();
    let coarse = BisectionConfig {
        tol: 1e-2,
        ..Default::default()
    };
    let fine = BisectionConfig {
        tol: 1e-3,
        ..Default::default()
    };
    let a = mu_range(FRAC_1_SQRT_2, 0.25, &coarse, &cfg).unwrap();
    let b = mu_range(FRAC_1_SQRT_2, 0.25, &fine, &cfg).unwrap();
    for (c, f) in [(a.low, b.low), (a.high.unwrap(), b.high.unwrap())] {
        assert!(f.bracket.0 >= c.bracket.0 && f.bracket.1 <= c.bracket.1);
        assert!(f.bracket.1 - f.bracket.0 <= 1e-3);
    }
    // The coarse scan has 21 points: MNN strictly between the two flips.
    assert_eq!(b.scan.len(), 21);
}

#[test]
fn theta_scan_labels() {
    let cfg = OracleConfig::default();
    let grid: Vec<f64> = (0..=8).map(|k| k as f64 * PI / 16.0).collect();
    let records = theta_scan(1.0, &grid, &cfg).unwrap();
    for (k, r) in records.iter().enumerate() {
        let expect_mnn = k % 4 != 0;
        assert_eq!(r.label == RegionLabel::Mnn, expect_mnn, "theta = {k} pi/16");
        assert_eq!(r.parameter, "theta");
    }
    // theta and pi/2 - theta carry the same label.
    for k in 0..=8 {
        assert_eq!(records[k].label, records[8 - k].label);
    }
}

#[test]
fn sweep_preserves_order_and_matches_classify() {
    let cfg = OracleConfig::default();
    let values = range_grid(0.3, 0.7, 0.2).unwrap();
    let records = sweep("mu", &values, |mu| mnn1(mu, FRAC_1_SQRT_2, 0.25), &cfg).unwrap();
    assert_eq!(records.len(), 3);
    for (r, &mu) in records.iter().zip(&values) {
        assert_eq!(r.value, mu);
        let direct = classify(&mnn1(mu, FRAC_1_SQRT_2, 0.25).unwrap(), &cfg).unwrap();
        assert_eq!(r.label, direct.label);
        // Label consistent with the violation fields at eps.
        let s0 = r.s0_violation.unwrap() <= cfg.eps;
        assert_eq!(s0, r.label == RegionLabel::Classical);
    }
    let csv = records_to_csv(&records);
    assert_eq!(csv.lines().count(), 4);
    let json: serde_json::Value = serde_json::from_str(&records_to_json(&records)).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 3);
}

#[test]
fn critical_visibility_of_the_theta_family() {
    let cfg = OracleConfig::default();
    let bis = BisectionConfig::default();
    let family = VisibilityFamily::Mnn2 { theta: PI / 8.0 };
    let r = critical_visibility(family, &bis, &cfg).unwrap();
    assert!(r.monotone);
    assert!(r.bracket.1 - r.bracket.0 <= bis.tol);
    let above = family.generate(r.v_crit + 2.0 * bis.tol).unwrap();
    assert_eq!(classify(&above, &cfg).unwrap().label, RegionLabel::Mnn);
    let below = family.generate(r.v_crit - 2.0 * bis.tol).unwrap();
    assert_eq!(classify(&below, &cfg).unwrap().label, RegionLabel::Classical);
}

#[test]
fn critical_visibility_is_stable_under_grid_doubling() {
    let bis = BisectionConfig::default();
    let family = VisibilityFamily::Mnn1Quantum { mu: 0.65 };
    let base = critical_visibility(family, &bis, &OracleConfig::default()).unwrap();
    let doubled = OracleConfig {
        grid_n: 128,
        ..OracleConfig::default()
    };
    let fine = critical_visibility(family, &bis, &doubled).unwrap();
    assert!((base.v_crit - fine.v_crit).abs() <= bis.tol);
}

#[test]
fn theta_endpoint_is_legal() {
    assert!(mnn2(FRAC_PI_2, 1.0).is_ok());
}
