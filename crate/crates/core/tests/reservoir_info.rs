use proptest::prelude::*;
use qmarket_core::quad::Quadrature;
use qmarket_core::reservoir::{Density, KWindow};
use qmarket_core::reservoir_info::{
    delta_pi_model2, discretized_oracle_model2, lorentzian_integral_check, model2_series, occupations_model2,
    ReservoirSpecII,
};
use qmarket_core::{uniform_grid, MarketInit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec() -> ReservoirSpecII {
    ReservoirSpecII::new(2.0, 3.0, 0.5, Density::Constant(5.0)).unwrap()
}

/// Window of half-width `half` around the resonance with spacing 0.02.
fn window(spec: &ReservoirSpecII, half: f64) -> KWindow {
    let n = (2.0 * half / 0.02).round() as usize + 1;
    KWindow::new(spec.resonance() - half, spec.resonance() + half, n).unwrap()
}

#[test]
fn lorentzian_normalisation_for_random_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let l = rng.random_range(0.05..2.0);
        let big = rng.random_range(0.2..10.0);
        let w = rng.random_range(-20.0..20.0);
        let s = ReservoirSpecII::new(w, big, l, Density::Constant(0.0)).unwrap();
        let integral = lorentzian_integral_check(&s).unwrap();
        let unit = 2.0 * l * l * big * big * integral;
        assert!((unit - 1.0).abs() < 1e-6, "λ={l} Ω={big} ω={w}: {unit}");

        // Shifting ω only moves the peak; halving λ quadruples the integral.
        let shifted = ReservoirSpecII::new(w + 3.7, big, l, Density::Constant(0.0)).unwrap();
        assert!((lorentzian_integral_check(&shifted).unwrap() / integral - 1.0).abs() < 1e-8);
        let half = ReservoirSpecII::new(w, big, 0.5 * l, Density::Constant(0.0)).unwrap();
        assert!((lorentzian_integral_check(&half).unwrap() / integral - 4.0).abs() < 4e-8);
    }
}

#[test]
fn long_time_portfolio_reaches_increment() {
    let s = spec();
    let t = 20.0 / s.decay().gamma_prime;
    let (n_s, n_k) = occupations_model2(&s, &MarketInit::new(30, 15, 0), t).unwrap();
    let want = delta_pi_model2(45.0, 5.0).unwrap();
    assert!(((n_s + n_k - 45.0) - want).abs() < 0.01 * want.abs());
}

#[test]
fn closed_form_series_conserves() {
    let s = spec();
    let grid = uniform_grid(20.0, 200).unwrap();
    let series = model2_series(&s, &MarketInit::new(30, 15, 0), &grid).unwrap();
    assert!(series.conserved.iter().all(|m| (m - 50.0).abs() < 1e-9));
    assert!((series.portfolio[0] - 45.0).abs() < 1e-12);
}

#[test]
fn no_information_no_action() {
    let s = ReservoirSpecII::new(2.0, 3.0, 0.0, Density::Constant(5.0)).unwrap();
    for t in [0.0, 1.0, 100.0] {
        let (a, b) = occupations_model2(&s, &MarketInit::new(30, 15, 0), t).unwrap();
        assert!((a + b - 45.0).abs() < 1e-12);
    }
}

#[test]
fn oracle_agrees_with_closed_form() {
    let s = spec();
    let t_end = 20.0 / s.decay().gamma_prime;
    let grid = uniform_grid(t_end, 41).unwrap();
    let init = MarketInit::new(30, 15, 0);
    let run = discretized_oracle_model2(&s, &init, &window(&s, 40.0), &grid).unwrap();
    assert!(run.unitarity_defect < 1e-9);
    assert!(run.series.conserved.iter().all(|m| (m - 50.0).abs() < 1e-6));
    let exact = model2_series(&s, &init, &grid).unwrap();
    let oracle_delta = run.series.portfolio.last().unwrap() - 45.0;
    let closed_delta = exact.portfolio.last().unwrap() - 45.0;
    assert!((oracle_delta - closed_delta).abs() < 0.05 * closed_delta.abs());
}

#[test]
fn oracle_converges_as_band_widens() {
    let s = spec();
    let grid = uniform_grid(5.0, 26).unwrap();
    let init = MarketInit::new(30, 15, 0);
    let exact = model2_series(&s, &init, &grid).unwrap();
    let errors: Vec<f64> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&half| {
            let run = discretized_oracle_model2(&s, &init, &window(&s, half), &grid).unwrap();
            run.series
                .portfolio
                .iter()
                .zip(&exact.portfolio)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn narrow_window_is_rejected() {
    let s = spec();
    let w = KWindow::new(s.resonance() - 0.3, s.resonance() + 0.3, 201).unwrap();
    let r = discretized_oracle_model2(&s, &MarketInit::new(30, 15, 0), &w, &[0.0, 1.0]);
    assert!(matches!(r, Err(qmarket_core::Error::WindowTooNarrow { .. })));
}

#[test]
fn tabulated_density_tracks_resonant_value() {
    // A density flat near the resonance behaves like the constant one.
    let s = ReservoirSpecII::new(
        2.0,
        3.0,
        0.5,
        Density::table(vec![-50.0, -10.0, 10.0, 50.0], vec![0.0, 5.0, 5.0, 0.0]).unwrap(),
    )
    .unwrap();
    let t = 20.0 / s.decay().gamma_prime;
    let (a, b) = occupations_model2(&s, &MarketInit::new(30, 15, 0), t).unwrap();
    assert!((a + b - 27.5).abs() < 0.01 * 17.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equal_start_splits_evenly(w in -5.0..5.0f64, big in 0.5..5.0f64, l in 0.05..1.0f64,
                                 s in 0u32..40, n in 0.0..10.0f64, t in 0.0..30.0f64) {
        let spec = ReservoirSpecII::new(w, big, l, Density::Constant(n)).unwrap();
        let (a, b) = occupations_model2(&spec, &MarketInit::new(s, s, 0), t).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
    }

    #[test]
    fn occupations_stay_non_negative(w in -5.0..5.0f64, big in 0.5..5.0f64, l in 0.05..1.0f64,
                                     s in 0u32..40, k in 0u32..40, n in 0.0..10.0f64, t in 0.0..30.0f64) {
        let spec = ReservoirSpecII::new(w, big, l, Density::Constant(n)).unwrap();
        let (a, b) = occupations_model2(&spec, &MarketInit::new(s, k, 0), t).unwrap();
        prop_assert!(a > -1e-9 && b > -1e-9);
    }

    #[test]
    fn noise_is_flat_density_closed_form(w in -5.0..5.0f64, big in 0.5..5.0f64, l in 0.05..1.0f64,
                                         n in 0.0..10.0f64, t in 0.0..30.0f64) {
        let spec = ReservoirSpecII::new(w, big, l, Density::Constant(n)).unwrap();
        let gp = spec.decay().gamma_prime;
        let got = qmarket_core::reservoir_info::reservoir_noise(&spec, t, &Quadrature::default()).unwrap();
        prop_assert!((got - 0.5 * n * (1.0 - (-2.0 * gp * t).exp())).abs() < 1e-8 * (1.0 + n));
    }
}
