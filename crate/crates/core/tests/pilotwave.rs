use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use qmarket_core::pilotwave::{
    default_r_floor, evolve_quantum_potential, integrate_portfolio, mental_force, quantum_potential,
    quantum_potential_1d, schrodinger_step, Grid2, PotentialField, QPath, SplitStepper, WaveField,
};
use qmarket_core::{uniform_grid, Error};

fn gaussian(grid: Grid2, sigma: f64, hbar: f64, mass: f64) -> WaveField {
    WaveField::from_fn(grid, hbar, mass, |a, b| {
        Complex64::new((-(a * a + b * b) / (4.0 * sigma * sigma)).exp(), 0.0)
    })
    .unwrap()
}

#[test]
fn plane_wave_picks_up_kinetic_phase() {
    let grid = Grid2::centered(64, 0.2).unwrap();
    let (m1, m2) = (3.0, -5.0);
    let length = 64.0 * 0.2;
    let (k1, k2) = (2.0 * PI * m1 / length, 2.0 * PI * m2 / length);
    for (hbar, mass) in [(1.0, 1.0), (0.7, 1.3)] {
        let psi = WaveField::from_fn(grid, hbar, mass, |a, b| Complex64::from_polar(1.0, k1 * a + k2 * b)).unwrap();
        let dt = 0.013;
        let next = schrodinger_step(&psi, &PotentialField::zero(grid).unwrap(), dt).unwrap();
        let phase = Complex64::from_polar(1.0, -hbar * hbar * (k1 * k1 + k2 * k2) * dt / (2.0 * mass));
        let worst = next
            .values
            .iter()
            .zip(&psi.values)
            .map(|(a, b)| (a - b * phase).norm() / b.norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "ħ={hbar}: {worst}");
    }
}

#[test]
fn free_gaussian_spreads_by_the_width_law() {
    let grid = Grid2::centered(256, 0.1).unwrap();
    let sigma = 1.0;
    for (hbar, mass) in [(1.0, 1.0), (0.6, 0.8)] {
        let mut psi = gaussian(grid, sigma, hbar, mass);
        let dt = 0.01;
        let stepper = SplitStepper::new(grid, hbar, mass, &PotentialField::zero(grid).unwrap(), dt).unwrap();
        for _ in 0..200 {
            stepper.step(&mut psi).unwrap();
        }
        let t = 2.0;
        let want = sigma * (1.0 + (hbar * hbar * t / (2.0 * mass * sigma * sigma)).powi(2)).sqrt();
        let (_, width) = psi.moments();
        for w in width {
            assert!((w / want - 1.0).abs() < 1e-3, "ħ={hbar}: {w} vs {want}");
        }
    }
}

#[test]
fn norm_is_conserved_over_many_steps() {
    let grid = Grid2::centered(64, 0.25).unwrap();
    let mut psi = WaveField::from_fn(grid, 1.0, 1.0, |a, b| {
        Complex64::from_polar((-(a - 1.0).powi(2) / 2.0 - b * b / 3.0).exp(), 0.8 * a)
    })
    .unwrap();
    let v = PotentialField::hard_from_fn(grid, |a, b| 0.5 * a * a + 0.2 * b * b + 0.1 * a * b).unwrap();
    let stepper = SplitStepper::new(grid, 1.0, 1.0, &v, 0.01).unwrap();
    let mut prev = psi.norm();
    let start = prev;
    for _ in 0..1000 {
        stepper.step(&mut psi).unwrap();
        let n = psi.norm();
        assert!((n - prev).abs() <= 1e-10);
        prev = n;
    }
    assert!((prev - start).abs() < 1e-6);
}

#[test]
fn stepping_back_restores_the_wave() {
    let grid = Grid2::centered(64, 0.25).unwrap();
    let psi = WaveField::from_fn(grid, 1.0, 1.0, |a, b| {
        Complex64::from_polar((-(a * a + (b - 0.5).powi(2)) / 2.0).exp(), 1.3 * b)
    })
    .unwrap();
    let v = PotentialField::hard_from_fn(grid, |a, b| (a * 0.7).sin() + 0.3 * b * b).unwrap();
    let forward = schrodinger_step(&psi, &v, 0.05).unwrap();
    let back = schrodinger_step(&forward, &v, -0.05).unwrap();
    let worst = back.values.iter().zip(&psi.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

/// Largest error of the discrete U and g against the analytic Gaussian forms
/// within 3σ, each relative to its largest analytic magnitude there.
fn gaussian_errors(dq: f64) -> (f64, f64) {
    let sigma = 1.0;
    let n = (12.8 / dq).round() as usize;
    let grid = Grid2::centered(n, dq).unwrap();
    let psi = gaussian(grid, sigma, 1.0, 1.0);
    let u = quantum_potential(&psi, default_r_floor(&psi)).unwrap();
    let g = mental_force(&u);
    let (mut eu, mut mu, mut eg, mut mg) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (grid.q1(i), grid.q2(j));
            let r2 = a * a + b * b;
            if r2 > 9.0 * sigma * sigma {
                continue;
            }
            let idx = grid.index(i, j);
            let want_u = 1.0 / sigma.powi(2) - r2 / (4.0 * sigma.powi(4));
            eu = eu.max((u.u[idx] - want_u).abs());
            mu = mu.max(want_u.abs());
            for (got, q) in [(g.g1[idx], a), (g.g2[idx], b)] {
                let want = q / (2.0 * sigma.powi(4));
                eg = eg.max((got - want).abs());
                mg = mg.max(want.abs());
            }
        }
    }
    (eu / mu, eg / mg)
}

#[test]
fn gaussian_quantum_potential_and_force() {
    let (eu, eg) = gaussian_errors(0.05);
    assert!(eu < 0.01, "U: {eu}");
    assert!(eg < 0.01, "g: {eg}");
}

#[test]
fn quantum_potential_is_second_order() {
    let (coarse, _) = gaussian_errors(0.1);
    let (fine, _) = gaussian_errors(0.05);
    assert!(coarse / fine >= 3.0, "{coarse} / {fine}");
}

#[test]
fn product_state_potential_separates() {
    let n = 128;
    let dq = 0.1;
    let grid = Grid2::centered(n, dq).unwrap();
    let f1 = |a: f64| (-a * a / 4.0).exp();
    let f2 = |b: f64| (-b * b / 2.0).exp() + 0.5 * (-(b - 1.0).powi(2)).exp();
    let psi = WaveField::from_fn(grid, 1.0, 1.0, |a, b| Complex64::from_polar(f1(a) * f2(b), 0.3 * a - b)).unwrap();
    let u = quantum_potential(&psi, default_r_floor(&psi)).unwrap();
    let r1: Vec<f64> = (0..n).map(|i| f1(grid.q1(i))).collect();
    let r2: Vec<f64> = (0..n).map(|j| f2(grid.q2(j))).collect();
    let (u1, u2) = (quantum_potential_1d(&r1, dq), quantum_potential_1d(&r2, dq));

    // Discretisation error of the 1D Gaussian factor against its exact U₁.
    let mut err_1d = 0.0f64;
    let mut residual = 0.0f64;
    for i in 0..n {
        let a = grid.q1(i);
        if a.abs() > 3.0 {
            continue;
        }
        err_1d = err_1d.max((u1[i] - (0.5 - a * a / 4.0)).abs());
        for j in 0..n {
            if grid.q2(j).abs() > 3.0 {
                continue;
            }
            residual = residual.max((u.u[grid.index(i, j)] - u1[i] - u2[j]).abs());
        }
    }
    assert!(residual < err_1d, "{residual} vs {err_1d}");

    let g = mental_force(&u);
    for i in (30..98).step_by(7) {
        let row: Vec<f64> = (30..98).map(|j| g.g1[grid.index(i, j)]).collect();
        let spread = row.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) - row.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        assert!(spread < 1e-8, "row {i}: {spread}");
    }
}

#[test]
fn constant_amplitude_gives_no_force() {
    let grid = Grid2::centered(32, 0.2).unwrap();
    let psi = WaveField::from_fn(grid, 1.0, 1.0, |a, _| Complex64::from_polar(1.0, 2.0 * PI * a / 6.4)).unwrap();
    let u = quantum_potential(&psi, default_r_floor(&psi)).unwrap();
    assert!(u.u.iter().all(|x| x.abs() < 1e-9));
    let g = mental_force(&u);
    assert!(g.g1.iter().chain(&g.g2).all(|x| x.abs() < 1e-9));
}

#[test]
fn masked_nodes_are_flagged_and_spread() {
    let grid = Grid2::centered(64, 0.25).unwrap();
    let psi = WaveField::from_fn(grid, 1.0, 1.0, |a, _| Complex64::new(a, 0.0) * (-(a * a) / 8.0).exp()).unwrap();
    let u = quantum_potential(&psi, default_r_floor(&psi)).unwrap();
    let node = grid.index(32, 10);
    assert!(u.mask[node] && u.u[node].is_nan());
    let g = mental_force(&u);
    assert!(g.mask[grid.index(31, 10)] && g.mask[grid.index(33, 10)]);
    let r = integrate_portfolio((0.0, 0.0), &PotentialField::zero(grid).unwrap(), &[(0.0, u)], &QPath::Constant(0.0, 0.0), &[0.0, 0.1]);
    assert!(matches!(r, Err(Error::MaskedRegion { .. })));
}

#[test]
fn portfolio_under_constant_fields_is_constant() {
    let grid = Grid2::centered(32, 0.2).unwrap();
    let v = PotentialField::hard_from_fn(grid, |_, _| 3.0).unwrap();
    let out = integrate_portfolio((30.0, 15.0), &v, &[], &QPath::Constant(0.5, -0.5), &uniform_grid(10.0, 50).unwrap()).unwrap();
    assert!(out.iter().all(|p| p.pi1 == 30.0 && p.pi2 == 15.0));
}

#[test]
fn linear_potential_drives_linear_growth() {
    let grid = Grid2::centered(32, 0.2).unwrap();
    let c = 0.37;
    let v = PotentialField::hard_from_fn(grid, |a, b| -c * a + 0.1 * b).unwrap();
    let path = QPath::Samples(vec![(0.0, -1.0, 0.0), (5.0, 1.0, 1.0), (10.0, 0.3, -2.0)]);
    let out = integrate_portfolio((2.0, 1.0), &v, &[], &path, &uniform_grid(10.0, 101).unwrap()).unwrap();
    for p in &out {
        assert!((p.pi1 - (2.0 + c * p.t)).abs() < 1e-10);
        assert!((p.pi2 - (1.0 - 0.1 * p.t)).abs() < 1e-10);
    }
}

#[test]
fn gaussian_mental_force_sets_portfolio_slope() {
    let sigma = 1.0;
    let grid = Grid2::centered(256, sigma / 20.0).unwrap();
    let psi = gaussian(grid, sigma, 1.0, 1.0);
    let u = quantum_potential(&psi, default_r_floor(&psi)).unwrap();
    let grid_t = uniform_grid(4.0, 41).unwrap();
    let out = integrate_portfolio((0.0, 0.0), &PotentialField::zero(grid).unwrap(), &[(0.0, u)], &QPath::Constant(sigma, 0.0), &grid_t).unwrap();
    let slope = out.last().unwrap().pi1 / 4.0;
    let want = 1.0 / (2.0 * sigma.powi(3));
    assert!((slope / want - 1.0).abs() < 0.01, "{slope}");
    assert!(out.iter().all(|p| p.pi2.abs() < 1e-9));
}

#[test]
fn evolving_potential_frames_drive_the_portfolio() {
    let grid = Grid2::centered(128, 0.1).unwrap();
    let psi = gaussian(grid, 1.0, 1.0, 1.0);
    let hard = PotentialField::zero(grid).unwrap();
    let (_, frames) = evolve_quantum_potential(&psi, &hard, 0.01, 100, 10).unwrap();
    assert_eq!(frames.len(), 11);
    let out = integrate_portfolio((0.0, 0.0), &hard, &frames, &QPath::Constant(1.0, 0.0), &uniform_grid(1.0, 11).unwrap()).unwrap();
    // As the packet spreads U flattens and the push at q = σ weakens from 1/2.
    let first = out[1].pi1 / 0.1;
    let last = (out[10].pi1 - out[9].pi1) / 0.1;
    assert!(first > last && last > 0.0 && (first - 0.5).abs() < 0.02, "{first} {last}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_steps_are_unitary(dt in -0.2..0.2f64, kx in -3.0..3.0f64, a in 0.0..1.0f64) {
        prop_assume!(dt.abs() > 1e-6);
        let grid = Grid2::centered(32, 0.3).unwrap();
        let psi = WaveField::from_fn(grid, 1.0, 1.0, |x, y| Complex64::from_polar((-(x * x + y * y) / 3.0).exp(), kx * x)).unwrap();
        let v = PotentialField::hard_from_fn(grid, |x, y| a * (x * x - y)).unwrap();
        let next = schrodinger_step(&psi, &v, dt).unwrap();
        prop_assert!((next.norm() - psi.norm()).abs() <= 1e-10);
    }
}
