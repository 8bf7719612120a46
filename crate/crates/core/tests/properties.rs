mod common;

use num_rational::Ratio;
use proptest::prelude::*;

use diamag::causality::{kk_static_identity, mu_sum_rule_residual, mu_sum_rule_residual_exact, RationalStrengths};
use diamag::multipole::{iso4_average, iso4_coefficients, scalar_average, TransitionStrengths};
use diamag::polariton::{optical_sum_rule_residual, solve_branches};
use diamag::response::{MediumModel, Provenance};
use diamag::tensor::Tensor4;
use diamag::Complex64;

fn model(ts: Vec<TransitionStrengths>) -> MediumModel {
    MediumModel::new(ts, 1.0, Provenance::Phenomenological { label: "random".into() }).unwrap()
}

prop_compose! {
    fn paramagnetic()(rows in prop::collection::vec((0.5f64..5.0, 0.01f64..0.5, 0.0f64..2.0, 0.0f64..0.3), 1..4))
        -> MediumModel {
        model(rows.into_iter().map(|(w, g, e, m)| TransitionStrengths {
            omega_eg: w, gamma_e: g, d_edip: e, d_mdip: m * w * w / 4.0, ..Default::default()
        }).collect())
    }
}

prop_compose! {
    /// Mixed channels with the last transition's diamagnetic strength chosen
    /// so that the permeability sum rule closes.
    fn closed()(rows in prop::collection::vec(
        (0.5f64..5.0, 0.02f64..0.5, 0.5f64..2.0, 0.0f64..0.1, 0.0f64..0.2, 0.0f64..0.2), 2..4))
        -> MediumModel {
        let mut ts: Vec<TransitionStrengths> = rows.into_iter().map(|(w, g, e, m, q, o)| TransitionStrengths {
            omega_eg: w, gamma_e: g, d_edip: e, d_mdip: m, d_quad: q, d_dipoct: o, d_dia: 0.0,
        }).collect();
        let open: f64 = ts.iter().map(|t| t.d_quad - t.d_dipoct).sum();
        let last = ts.last_mut().unwrap();
        if open < 0.0 {
            last.d_dia = -open * last.omega_eg * last.omega_eg;
        } else {
            last.d_dipoct += open;
        }
        model(ts)
    }
}

fn tensor() -> impl Strategy<Value = Tensor4<f64>> {
    prop::collection::vec(-1.0f64..1.0, 81).prop_map(|v| Tensor4::from_slice(&v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_symmetry(m in closed(), w in 0.0f64..20.0) {
        prop_assert!((m.chi(-w) - m.chi(w).conj()).norm() <= 1e-13 * m.chi(w).norm().max(1.0));
        prop_assert!((m.epsilon(-w) - m.epsilon(w).conj()).norm() <= 1e-13 * m.epsilon(w).norm());
    }

    #[test]
    fn pole_expansion_matches(m in closed(), w in 0.0f64..20.0) {
        let pe = m.pole_expansion().unwrap();
        let z = Complex64::new(w, 0.0);
        prop_assert!((pe.chi.eval(z) - m.chi(w)).norm() < 1e-10 * m.chi(w).norm().max(1.0));
        prop_assert!(pe.chi.poles.iter().all(|(p, _)| p.im < 0.0));
    }

    #[test]
    fn classical_bound_without_negative_im_mu(m in paramagnetic()) {
        // Im μ ≥ 0 everywhere here, so μ(0) ≥ 1
        for i in 1..2000 {
            prop_assert!(m.mu(i as f64 * 0.005).unwrap().im >= -1e-15);
        }
        prop_assert!(m.static_limits().unwrap().mu0 >= 1.0);
    }

    #[test]
    fn closed_models_decay(m in closed()) {
        prop_assert!(mu_sum_rule_residual(&m).abs() < 1e-12);
        let (a, b) = (m.chi(1e4).norm() * 1e8, m.chi(1e5).norm() * 1e10);
        prop_assert!((a - b).abs() <= 1e-2 * b.max(1e-12));
    }

    #[test]
    fn iso_average_is_an_isotropic_projection(t in tensor()) {
        let avg = iso4_average(&t);
        prop_assert!((iso4_average(&avg) - avg).max_abs() < 1e-14);
        prop_assert!((common::group_average(&t) - avg).max_abs() < 1e-12);
        prop_assert!((common::isotropic(iso4_coefficients(&t)) - avg).max_abs() < 1e-14);
        // the scalar average is read off the δ_ijδ_km slot with the sign of the current
        prop_assert!((scalar_average(&t) + iso4_coefficients(&t)[2]).abs() < 1e-14);
    }

    #[test]
    fn exact_and_float_sum_rules_agree(rows in prop::collection::vec((1i64..9, -40i64..40, -40i64..40, -40i64..40), 1..5)) {
        let exact: Vec<RationalStrengths> = rows.iter().map(|&(w, d, q, o)| RationalStrengths {
            omega_eg: Ratio::from_integer(w),
            d_dia: Ratio::new(d, 8),
            d_quad: Ratio::new(q, 64),
            d_dipoct: Ratio::new(o, 64),
        }).collect();
        let m = model(rows.iter().map(|&(w, d, q, o)| TransitionStrengths {
            omega_eg: w as f64, gamma_e: 0.1, d_dia: d as f64 / 8.0, d_quad: q as f64 / 64.0, d_dipoct: o as f64 / 64.0,
            ..Default::default()
        }).collect());
        let r = mu_sum_rule_residual_exact(&exact);
        prop_assert!((*r.numer() as f64 / *r.denom() as f64 - mu_sum_rule_residual(&m)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn static_identity_for_closed_models(m in closed()) {
        let r = kk_static_identity(&m, 50.0, 4096).unwrap();
        prop_assert!(!r.tail_warning);
        prop_assert!(r.residual < 1e-2, "{:?}", r);
    }

    #[test]
    fn branch_count_matches_dense_scan(m in closed(), k in 0.2f64..30.0) {
        let s = solve_branches(&m, &[k], 1e-2).unwrap();
        let scan = common::dense_scan_count(&m, k, 20.0 * k.max(5.0), 400_000);
        prop_assert_eq!(s.counts[0].1, scan);
        // poles + 1 bounds the real roots; with mixed-sign residues a pair can go complex
        prop_assert!(s.counts[0].1 <= s.counts[0].2);
        if s.counts[0].1 < s.counts[0].2 {
            prop_assert!(!s.failures.is_empty());
            prop_assert!(!optical_sum_rule_residual(&s, &m, k).unwrap().reliable);
        }
    }
}
