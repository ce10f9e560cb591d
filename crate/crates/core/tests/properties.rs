mod common;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nncert::generators::*;
use nncert::oracles::{classify, s0_square_oracle, OracleConfig, RegionLabel};
use nncert::quantum::*;
use nncert::{mix, Correlation, Output};

/// `n . sigma` for a unit vector given by spherical angles.
fn bloch_observable(polar: f64, azimuth: f64) -> ComplexMatrix {
    let (nx, ny, nz) = (
        polar.sin() * azimuth.cos(),
        polar.sin() * azimuth.sin(),
        polar.cos(),
    );
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(nz, 0.0),
            Complex64::new(nx, -ny),
            Complex64::new(nx, ny),
            Complex64::new(-nz, 0.0),
        ],
    )
    .unwrap()
}

fn random_setup(seed: u64) -> ChainSetup {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angle = || (rng.random::<f64>() * std::f64::consts::PI, rng.random::<f64>() * 6.3);
    let povms: Vec<Povm> = (0..4)
        .map(|_| {
            let (p, a) = angle();
            projective_binary_povm(&bloch_observable(p, a)).unwrap()
        })
        .collect();
    let ket: Vec<Complex64> = {
        let raw: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        raw.into_iter().map(|c| c / norm).collect()
    };
    let v1: f64 = rng.random();
    let v2: f64 = rng.random();
    ChainSetup {
        rho_ab: apply_werner(&DensityState::phi_plus(), v1).unwrap(),
        rho_bc: apply_werner(&DensityState::psi_plus(), v2).unwrap(),
        alice: povms[..2].to_vec(),
        bob: Povm::binary_from_projector(ComplexMatrix::projector(&ket)).unwrap(),
        charlie: povms[2..].to_vec(),
    }
}

fn generator_point(kind: u8, t: f64, v: f64) -> Correlation {
    match kind % 6 {
        0 => mnn1(t, v, 0.25).unwrap(),
        1 => mnn1_quantum(t, v).unwrap(),
        2 => mnn2(t * FRAC_PI_2, v).unwrap(),
        3 => fritz(FritzSide::R, v).unwrap(),
        4 => entanglement_swapping(v).unwrap(),
        _ => local_test_noisy(v).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn born_chain_is_normalized_and_in_s2(seed in any::<u64>()) {
        let p = born_chain(&random_setup(seed)).unwrap();
        let report = p.validate();
        prop_assert!(report.is_valid);
        prop_assert!(report.max_normalization_error <= 1e-12);
        prop_assert!(p.check_s2(1e-9).in_s2);
    }

    #[test]
    fn trivial_bob_factorizes(seed in any::<u64>()) {
        let mut setup = random_setup(seed);
        setup.bob = Povm::trivial(4);
        let p = born_chain(&setup).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                for a in 0..2 {
                    for c in 0..2 {
                        let prod = p.alice_marginal(a, x) * p.charlie_marginal(c, z);
                        prop_assert!((p.get(x, z, a, 0, c) - prod).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn werner_is_affine(v1 in 0.0..=1.0f64, v2 in 0.0..=1.0f64) {
        let rho = DensityState::psi_plus();
        let mid = apply_werner(&rho, 0.5 * (v1 + v2)).unwrap();
        let a = apply_werner(&rho, v1).unwrap();
        let b = apply_werner(&rho, v2).unwrap();
        let avg = a.matrix().add(b.matrix()).unwrap().scale(0.5);
        prop_assert!(mid.matrix().max_abs_diff(&avg) < 1e-14);
    }

    #[test]
    fn mixing_preserves_s2(
        kinds in prop::array::uniform3(any::<u8>()),
        ts in prop::array::uniform3(0.0..=1.0f64),
        vs in prop::array::uniform3(0.0..=1.0f64),
        w in prop::array::uniform3(0.01..1.0f64),
    ) {
        let corrs: Vec<Correlation> = (0..3).map(|i| generator_point(kinds[i], ts[i], vs[i])).collect();
        let total: f64 = w.iter().sum();
        let weights: Vec<f64> = w.iter().map(|x| x / total).collect();
        let p = mix(&corrs, &weights).unwrap();
        prop_assert!(p.validate().is_valid);
        prop_assert!(p.check_s2(1e-9).in_s2);
        for x in 0..2 {
            for z in 0..2 {
                let all = p.marginalize(&[Output::A, Output::B, Output::C], x, z).unwrap();
                prop_assert!((all.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                let none = p.marginalize(&[], x, z).unwrap();
                prop_assert!((none[0] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mnn2_mirror_relation(theta in 0.0..=FRAC_PI_2, v in 0.0..=1.0f64) {
        let p = mnn2(theta, v).unwrap();
        let q = mnn2(FRAC_PI_2 - theta, v).unwrap();
        prop_assert!(p.mirror().max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn post_selection_b0_weight(v in 0.0..=1.0f64, pps in 0.0..=0.5f64) {
        let p = post_selection_box(v, pps).unwrap();
        for x in 0..2 {
            for z in 0..2 {
                let m = p.marginalize(&[Output::B], x, z).unwrap();
                prop_assert!((m[0] - pps).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn file_format_round_trip(seed in any::<u64>()) {
        let p = born_chain(&random_setup(seed)).unwrap();
        let back = nncert::format::from_json(&nncert::format::to_json(&p)).unwrap();
        prop_assert_eq!(back, p);
    }
}

proptest! {
    // Each case runs the full classifier twice.
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn classification_is_covariant_and_monotone(
        kind in any::<u8>(),
        t in 0.0..=1.0f64,
        v in 0.0..=1.0f64,
        mu in 0.0..=1.0f64,
    ) {
        let cfg = OracleConfig::default();
        let p = mix(&[generator_point(kind, t, v), local_test()], &[mu, 1.0 - mu]).unwrap();
        let report = classify(&p, &cfg).unwrap();
        let mirrored = classify(&p.mirror(), &cfg).unwrap();
        prop_assert_eq!(mirrored.label, report.label.mirrored());
        prop_assert!(!report.flags.monotonicity_violation);
        prop_assert!(report.label != RegionLabel::Invalid && report.label != RegionLabel::NotInS2);
        for r in [&report.s0, &report.s1_ab_classical, &report.s1_bc_classical].into_iter().flatten() {
            if r.feasible {
                prop_assert!(r.witness_error(&p).unwrap() <= 10.0 * cfg.eps);
            }
        }
    }

    #[test]
    fn classical_models_are_accepted(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = common::random_bilocal(&mut rng, 2, 3);
        let r = s0_square_oracle(&p, &OracleConfig::default()).unwrap();
        prop_assert!(r.feasible, "violation {}", r.violation);
        prop_assert!(r.witness_error(&p).unwrap() <= 1e-6);
    }

    #[test]
    fn degenerate_forms_are_classical(seed in any::<u64>(), form in 0u8..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = match form {
            0 => common::constant_b(&mut rng),
            1 => common::constant_c(&mut rng),
            _ => common::constant_a(&mut rng),
        };
        prop_assert!(s0_square_oracle(&p, &OracleConfig::default()).unwrap().feasible);
    }
}
