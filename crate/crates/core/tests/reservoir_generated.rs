use std::cmp::Ordering;

use num_complex::Complex64;
use proptest::prelude::*;
use qmarket_core::quad::Quadrature;
use qmarket_core::reservoir::{Density, KWindow};
use qmarket_core::reservoir_generated::{
    compare_traders, critical_gamma1, delta_pi_model3, discretized_oracle_model3, kernels, model3_series,
    occupations_model3, Channel, Crossing, Model3Params,
};
use qmarket_core::{uniform_grid, MarketInit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn base() -> Model3Params {
    Model3Params {
        omega_s: 1.0,
        omega_c: 2.0,
        omega_loi: 5.0,
        omega_r_slope: 1.0,
        lambda_inf: 0.1,
        gamma: 0.2,
        n_r_density: Density::Constant(0.0),
    }
}

/// Band centred between the two trader frequencies.
fn centred_window() -> KWindow {
    KWindow::new(-18.5, 21.5, 4001).unwrap()
}

#[test]
fn eta2_matches_its_defining_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let quad = Quadrature {
        rel_tol: 1e-13,
        abs_tol: 1e-300,
        max_intervals: 20000,
    };
    for n in 0..20 {
        let ch = if n % 2 == 0 { Channel::Shares } else { Channel::Cash };
        let kern = kernels(&base(), ch).unwrap();
        let k = rng.random_range(-10.0..10.0);
        let t = rng.random_range(0.1..30.0);
        let a = Complex64::new(0.0, kern.omega) - kern.gamma;
        let breaks: Vec<f64> = (0..=64).map(|j| t * j as f64 / 64.0).collect();
        let direct = quad.integrate_breaks(|s| kern.eta1(k, s) * (a * s).exp(), &breaks).value;
        let closed = kern.eta2(k, t);
        assert!((closed - direct).norm() < 1e-8 * direct.norm(), "k={k} t={t}: {closed} vs {direct}");
    }
}

#[test]
fn alpha_modulus_approaches_limit() {
    for ch in [Channel::Shares, Channel::Cash] {
        let kern = kernels(&base(), ch).unwrap();
        let t = 30.0 / base().decay_rate();
        assert!((kern.alpha(t).norm() - kern.alpha_limit()).abs() < 1e-6);
    }
    let limit = kernels(&base(), Channel::Shares).unwrap().alpha_limit();
    let re = std::f64::consts::PI * 0.04;
    assert!((limit - 1.0 / (re * re + 16.0f64).sqrt()).abs() < 1e-14);
}

#[test]
fn initial_and_uncoupled_occupations() {
    let init = MarketInit::new(30, 15, 5);
    let p = Model3Params {
        n_r_density: Density::Constant(2.0),
        ..base()
    };
    assert_eq!(occupations_model3(&p, &init, 0.0).unwrap(), (30.0, 15.0));
    let free = Model3Params { lambda_inf: 0.0, ..p };
    for t in [0.5, 10.0, 200.0] {
        assert_eq!(occupations_model3(&free, &init, t).unwrap(), (30.0, 15.0));
    }
}

#[test]
fn equal_frequencies_give_equal_increments() {
    let p = Model3Params {
        omega_c: 1.0,
        n_r_density: Density::Constant(1.5),
        ..base()
    };
    let init = MarketInit::new(7, 3, 5);
    for t in [0.3, 4.0, 25.0] {
        let (s, k) = occupations_model3(&p, &init, t).unwrap();
        assert!(((s - 7.0) - (k - 3.0)).abs() < 1e-12);
    }
    let single = delta_pi_model3(&Model3Params { omega_c: 2.0, omega_s: 2.0, ..base() }, 5.0).unwrap();
    let d = delta_pi_model3(&Model3Params { omega_s: 2.0, ..base() }, 5.0).unwrap();
    assert_eq!(d, single);
}

#[test]
fn worked_case_examples() {
    let t = |omega: f64, gamma: f64| Model3Params {
        omega_loi: omega,
        gamma,
        ..base()
    };
    assert_eq!(compare_traders(&t(10.0, 0.2), &t(5.0, 0.2), 5.0).unwrap().ordering, Ordering::Less);
    assert_eq!(compare_traders(&t(10.0, 0.3), &t(5.0, 0.2), 5.0).unwrap().ordering, Ordering::Less);
    assert_eq!(compare_traders(&t(5.0, 0.2), &t(5.0, 0.2), 5.0).unwrap().ordering, Ordering::Equal);
    assert_eq!(delta_pi_model3(&Model3Params { lambda_inf: 0.0, ..base() }, 5.0).unwrap(), 0.0);
}

#[test]
fn case_a_and_b_orderings_for_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 100 {
        let omega_s = rng.random_range(0.0..5.0);
        let omega_c = rng.random_range(0.0..5.0);
        let omega2 = rng.random_range(0.0..10.0);
        let omega1 = rng.random_range(omega2..omega2 + 10.0);
        let closer = |w: f64| (w - omega2).abs() < (w - omega1).abs();
        if !(closer(omega_s) && closer(omega_c)) {
            continue;
        }
        let shared = Model3Params {
            omega_s,
            omega_c,
            omega_r_slope: rng.random_range(0.2..3.0),
            lambda_inf: rng.random_range(0.01..1.0),
            ..base()
        };
        let gamma2 = rng.random_range(0.01..2.0);
        let gamma1_b = rng.random_range(gamma2..gamma2 + 2.0);
        let p2 = Model3Params {
            omega_loi: omega2,
            gamma: gamma2,
            ..shared.clone()
        };
        for gamma1 in [gamma2, gamma1_b] {
            let p1 = Model3Params {
                omega_loi: omega1,
                gamma: gamma1,
                ..shared.clone()
            };
            let c = compare_traders(&p1, &p2, 5.0).unwrap();
            assert_eq!(c.ordering, Ordering::Less, "{p1:?} vs {p2:?}: {c:?}");
        }
        checked += 1;
    }
}

#[test]
fn increment_decreases_in_gamma() {
    let gammas: Vec<f64> = (0..=60).map(|i| 0.05 + 1.95 * i as f64 / 60.0).collect();
    let values: Vec<f64> = gammas
        .iter()
        .map(|&g| delta_pi_model3(&base().with_gamma(g), 5.0).unwrap())
        .collect();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            assert!(values[j] < values[i]);
        }
    }
}

#[test]
fn critical_gamma_cases() {
    match critical_gamma1(5.0, 5.0, 0.4, &base(), 5.0, None).unwrap() {
        Crossing::Root { gamma1, .. } => assert!((gamma1 - 0.4).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    match critical_gamma1(6.0, 5.0, 1.5, &base(), 5.0, None).unwrap() {
        Crossing::Root { gamma1, residual } => {
            assert!(gamma1 > 0.0 && gamma1 < 1.5);
            assert!(residual < 1e-10);
            let d1 = delta_pi_model3(&base().with_loi_frequency(6.0).with_gamma(gamma1), 5.0).unwrap();
            let d2 = delta_pi_model3(&base().with_loi_frequency(5.0).with_gamma(1.5), 5.0).unwrap();
            assert!((d1 - d2).abs() < 1e-10);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(
        critical_gamma1(40.0, 5.0, 0.01, &base(), 5.0, None).unwrap(),
        Crossing::NoCrossing
    );
    assert!(critical_gamma1(4.0, 5.0, 0.5, &base(), 5.0, None).is_err());
}

#[test]
fn sweep_sign_changes_contain_the_root() {
    let shared = Model3Params {
        omega_r_slope: 0.2,
        ..base()
    };
    let gammas: Vec<f64> = (0..19).map(|i| 0.05 + 0.025 * i as f64).collect();
    let mut changes = 0;
    for &g2 in &gammas {
        let p2 = shared.with_loi_frequency(5.0).with_gamma(g2);
        let sign: Vec<Ordering> = gammas
            .iter()
            .map(|&g1| compare_traders(&shared.with_loi_frequency(6.0).with_gamma(g1), &p2, 5.0).unwrap().ordering)
            .collect();
        for (i, w) in sign.windows(2).enumerate() {
            if w[0] != w[1] {
                changes += 1;
                match critical_gamma1(6.0, 5.0, g2, &shared, 5.0, None).unwrap() {
                    Crossing::Root { gamma1, .. } => {
                        assert!(gamma1 >= gammas[i] && gamma1 <= gammas[i + 1], "γ₂={g2}: {gamma1}");
                    }
                    other => panic!("γ₂={g2}: {other:?}"),
                }
            }
        }
    }
    assert!(changes > 0);
}

#[test]
fn oracle_conserves_and_starts_at_initial_state() {
    let p = Model3Params {
        n_r_density: Density::Constant(2.0),
        ..base()
    };
    let init = MarketInit::new(30, 15, 5);
    let grid = uniform_grid(40.0, 21).unwrap();
    let run = discretized_oracle_model3(&p, &init, &centred_window(), &grid).unwrap();
    let m0 = run.series.conserved[0];
    assert!((m0 - 50.0).abs() < 1e-9);
    assert!(run.series.conserved.iter().all(|m| (m - m0).abs() < 1e-6));
    assert!((run.series.n_shares[0] - 30.0).abs() < 1e-9);
    assert!((run.series.n_loi[0] - 5.0).abs() < 1e-9);
}

#[test]
fn oracle_without_couplings_is_static() {
    let p = Model3Params {
        lambda_inf: 0.0,
        gamma: 0.0,
        ..base()
    };
    let grid = uniform_grid(20.0, 11).unwrap();
    let run = discretized_oracle_model3(&p, &MarketInit::new(30, 15, 5), &centred_window(), &grid).unwrap();
    assert!(run.series.portfolio.iter().all(|v| (v - 45.0).abs() < 1e-9));
    assert!(run.series.n_loi.iter().all(|v| (v - 5.0).abs() < 1e-9));
}

#[test]
fn oracle_approaches_increment_as_coupling_shrinks() {
    let init = MarketInit::new(0, 0, 5);
    let mut errors = Vec::new();
    for lambda in [0.1, 0.05, 0.025] {
        let p = Model3Params {
            lambda_inf: lambda,
            ..base()
        };
        let run = discretized_oracle_model3(&p, &init, &centred_window(), &[0.0, 80.0]).unwrap();
        let oracle = run.series.portfolio[1];
        let closed = delta_pi_model3(&p, 5.0).unwrap();
        errors.push((oracle - closed).abs());
        if lambda == 0.025 {
            assert!((oracle - closed).abs() < 0.1 * closed);
        }
    }
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn oracle_matches_full_occupations_with_reservoir_noise() {
    // With N^(r) > 0 the γ-integral matters; at small λ the oracle tracks it.
    let p = Model3Params {
        lambda_inf: 0.025,
        n_r_density: Density::Constant(2.0),
        ..base()
    };
    let init = MarketInit::new(0, 0, 5);
    let grid = [0.0, 10.0, 40.0, 80.0];
    let run = discretized_oracle_model3(&p, &init, &centred_window(), &grid).unwrap();
    let full = model3_series(&p, &init, &grid, true).unwrap();
    let dropped = model3_series(&p, &init, &grid, false).unwrap();
    for i in 1..grid.len() {
        let (o, f, d) = (run.series.portfolio[i], full.portfolio[i], dropped.portfolio[i]);
        assert!((o - f).abs() < 0.02 * f, "t={}: oracle {o} vs closed {f}", grid[i]);
        assert!((o - f).abs() < (o - d).abs());
    }
}

#[test]
fn reduced_loi_matches_oracle_loi() {
    // The finite band shifts the short-time LoI by roughly 1/bandwidth.
    let p = Model3Params {
        lambda_inf: 0.0,
        n_r_density: Density::Constant(2.0),
        ..base()
    };
    let init = MarketInit::new(0, 0, 5);
    let grid = [0.0, 2.0, 8.0, 30.0];
    let closed = model3_series(&p, &init, &grid, true).unwrap();
    let gap = |w: KWindow| {
        let run = discretized_oracle_model3(&p, &init, &w, &grid).unwrap();
        (0..grid.len())
            .map(|i| (run.series.n_loi[i] - closed.n_loi[i]).abs())
            .fold(0.0, f64::max)
    };
    let narrow = gap(centred_window());
    let wide = gap(KWindow::new(-38.5, 41.5, 8001).unwrap());
    assert!(narrow < 2e-2 && wide < 0.6 * narrow, "{narrow} {wide}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_vanish_at_start(k in -20.0..20.0f64, g in 0.0..2.0f64, w in 0.0..10.0f64) {
        let p = Model3Params { gamma: g, omega_loi: w + 0.5, ..base() };
        let kern = kernels(&p, Channel::Cash).unwrap();
        prop_assert_eq!(kern.alpha(0.0).norm(), 0.0);
        prop_assert_eq!(kern.eta1(k, 0.0).norm(), 0.0);
        prop_assert_eq!(kern.eta2(k, 0.0).norm(), 0.0);
    }

    #[test]
    fn increment_positive_and_decreasing_in_detuning(l in 0.01..1.0f64, g in 0.01..2.0f64,
                                                     d in 0.0..5.0f64, extra in 0.01..5.0f64) {
        let p = Model3Params { omega_s: 3.0, omega_c: 3.0, omega_loi: 3.0 + d, lambda_inf: l, gamma: g, ..base() };
        let near = delta_pi_model3(&p, 5.0).unwrap();
        let far = delta_pi_model3(&p.with_loi_frequency(3.0 + d + extra), 5.0).unwrap();
        prop_assert!(near > 0.0 && far < near);
    }

    #[test]
    fn occupations_grow_with_loi(i in 0u32..20, t in 0.0..40.0f64) {
        let p = Model3Params { n_r_density: Density::Constant(1.0), ..base() };
        let (a, b) = occupations_model3(&p, &MarketInit::new(3, 4, i), t).unwrap();
        let (c, d) = occupations_model3(&p, &MarketInit::new(3, 4, i + 1), t).unwrap();
        prop_assert!(c >= a && d >= b);
    }
}
