//! Information as a reservoir: shares and cash (common frequency `ω`) both
//! couple with strength `λ` to a continuum of LoI modes with dispersion `Ωk`.
//!
//! In the Markov limit the LoI field decays at rate `γ′ = 2πλ²/Ω` and
//!
//! ```text
//! N_K(t) = e^{−2γ′t}[¼K(1+e^{γ′t})² + ¼S(e^{γ′t}−1)² + λ²∫N(k)|η₁(k,t)|²dk]
//! N_S(t) = N_K(t) + e^{−γ′t}[S(1−e^{γ′t}) − K(1+e^{γ′t})] + K + S
//! ```
//!
//! with `η₁(k,t) = E(i(ω−Ωk)+γ′, t)`. For constant `N` the portfolio tends to
//! `π(0)/2 + N`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::arrow::Arrowhead;
use crate::closed_market::MarketInit;
use crate::cmath::exp_integral;
use crate::error::{Error, Result};
use crate::quad::Quadrature;
use crate::reservoir::{damped_lorentzian_integral, ensure_window, snapshot, Density, KWindow};
use crate::series::{check_grid, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpecII {
    /// Common shares/cash frequency.
    pub omega: f64,
    /// Dispersion slope `Ω` of the LoI band.
    pub omega_slope: f64,
    pub lambda_inf: f64,
    pub n_density: Density,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayScale {
    pub gamma_prime: f64,
}

impl ReservoirSpecII {
    pub fn new(omega: f64, omega_slope: f64, lambda_inf: f64, n_density: Density) -> Result<Self> {
        let s = Self {
            omega,
            omega_slope,
            lambda_inf,
            n_density,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("omega must be finite, got {}", self.omega)));
        }
        if !self.omega_slope.is_finite() || self.omega_slope <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Omega_slope must be finite and > 0, got {}",
                self.omega_slope
            )));
        }
        if !self.lambda_inf.is_finite() || self.lambda_inf < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "lambda_inf must be finite and ≥ 0, got {}",
                self.lambda_inf
            )));
        }
        self.n_density.validate()
    }

    pub fn decay(&self) -> DecayScale {
        DecayScale {
            gamma_prime: 2.0 * PI * self.lambda_inf * self.lambda_inf / self.omega_slope,
        }
    }

    /// Resonant wave number `ω/Ω`.
    pub fn resonance(&self) -> f64 {
        self.omega / self.omega_slope
    }

    /// LoI density at resonance; the long-time level for a flat density.
    pub fn nominal_density(&self) -> f64 {
        self.n_density.at(self.resonance())
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

/// `η₁(k, t)`. Undefined at zero coupling.
pub fn eta1(spec: &ReservoirSpecII, k: f64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    if spec.lambda_inf == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let gp = spec.decay().gamma_prime;
    Ok(exp_integral(Complex64::new(gp, spec.omega - spec.omega_slope * k), t))
}

/// Half-width of the detuning window: `40·max(γ′, 1)`.
pub fn detuning_window(spec: &ReservoirSpecII) -> f64 {
    40.0 * spec.decay().gamma_prime.max(1.0)
}

/// `λ² e^{−2γ′t} ∫N(k)|η₁(k,t)|²dk`: adaptive quadrature over the detuning
/// window plus analytic tails with `N` held at the window edges.
pub fn reservoir_noise(spec: &ReservoirSpecII, t: f64, quad: &Quadrature) -> Result<f64> {
    check_time(t)?;
    let l2 = spec.lambda_inf * spec.lambda_inf;
    if l2 == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let slope = spec.omega_slope;
    let knots: Vec<f64> = spec.n_density.knots().iter().map(|&k| spec.omega - slope * k).collect();
    let value = damped_lorentzian_integral(
        |a| spec.n_density.at((spec.omega - a) / slope),
        spec.decay().gamma_prime,
        t,
        detuning_window(spec),
        &knots,
        quad,
    )?;
    Ok(l2 * value / slope)
}

/// `(N_S(t), N_K(t))` from the Markov-limit closed form.
pub fn occupations_model2(spec: &ReservoirSpecII, init: &MarketInit, t: f64) -> Result<(f64, f64)> {
    occupations_model2_with(spec, init, t, &Quadrature::default())
}

pub fn occupations_model2_with(
    spec: &ReservoirSpecII,
    init: &MarketInit,
    t: f64,
    quad: &Quadrature,
) -> Result<(f64, f64)> {
    spec.validate()?;
    check_time(t)?;
    let (s, k) = (init.shares as f64, init.cash as f64);
    if spec.lambda_inf == 0.0 {
        return Ok((s, k));
    }
    let e = (-spec.decay().gamma_prime * t).exp();
    let noise = reservoir_noise(spec, t, quad)?;
    let n_k = 0.25 * k * (1.0 + e).powi(2) + 0.25 * s * (1.0 - e).powi(2) + noise;
    let n_s = n_k + s * (e - 1.0) - k * (e + 1.0) + k + s;
    Ok((n_s, n_k))
}

/// Long-time portfolio shift `−π(0)/2 + N`.
pub fn delta_pi_model2(pi0: f64, n_i: f64) -> Result<f64> {
    if !pi0.is_finite() || pi0 < 0.0 || !n_i.is_finite() || n_i < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "pi0 and n_I must be finite and ≥ 0, got {pi0}, {n_i}"
        )));
    }
    Ok(-0.5 * pi0 + n_i)
}

/// `∫dk / (4π²λ⁴ + Ω²(ω−Ωk)²)` over the real line; `2λ²Ω²` times this is one.
pub fn lorentzian_integral_check(spec: &ReservoirSpecII) -> Result<f64> {
    spec.validate()?;
    if spec.lambda_inf == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let l2 = spec.lambda_inf * spec.lambda_inf;
    let slope = spec.omega_slope;
    let c = 4.0 * PI * PI * l2 * l2;
    let center = spec.resonance();
    let width = 2.0 * PI * l2 / (slope * slope);
    let est = Quadrature::default()
        .integrate_real_line(
            |k| {
                let a = slope * (spec.omega - slope * k);
                Complex64::new(1.0 / (c + a * a), 0.0)
            },
            center,
            width,
        )
        .checked(1e-8, 1e-300)?;
    Ok(est.value.re)
}

/// Closed-form series; `n_loi` is the nominal LoI density minus the portfolio
/// change, so `conserved` stays at `π(0) + N`.
pub fn model2_series(spec: &ReservoirSpecII, init: &MarketInit, t_grid: &[f64]) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    let quad = Quadrature::default();
    let pi0 = (init.shares + init.cash) as f64;
    let n_bar = spec.nominal_density();
    let mut series = TimeSeries::with_capacity(t_grid.len());
    for &t in t_grid {
        let (s, k) = occupations_model2_with(spec, init, t, &quad)?;
        let loi = n_bar - (s + k - pi0);
        series.push(t, s, k, loi, s + k + loi);
    }
    Ok(series)
}

/// Result of the discretised-band computation.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub series: TimeSeries,
    /// Largest spectral weight of a trader mode in the outer 5% of the band.
    pub leakage: f64,
    /// Largest deviation from unitarity of the trader columns of `V(t)`.
    pub unitarity_defect: f64,
}

/// Replace the continuum by `n_k` modes at `Ωkᵢ` with couplings `λ√Δk` and
/// solve the single-particle problem exactly.
///
/// With `p = (s+c)/√2`, `d = (s−c)/√2` only `p` couples (with `√2·λ√Δk`), so
/// the band plus `p` is an arrowhead matrix and `d` rotates freely at `ω`.
pub fn discretized_oracle_model2(
    spec: &ReservoirSpecII,
    init: &MarketInit,
    window: &KWindow,
    t_grid: &[f64],
) -> Result<OracleRun> {
    spec.validate()?;
    window.validate(100)?;
    check_grid(t_grid)?;
    if !window.contains(spec.resonance()) {
        return Err(Error::InvalidParameter(format!(
            "k window [{}, {}] must bracket the resonance {}",
            window.k_min,
            window.k_max,
            spec.resonance()
        )));
    }
    window.check_times(spec.omega_slope, t_grid)?;

    let ks = window.points();
    let g = (2.0 * window.dk()).sqrt() * spec.lambda_inf;
    let arrow = Arrowhead {
        hub: spec.omega,
        spokes: ks.iter().map(|&k| (spec.omega_slope * k, g)).collect(),
    };
    let eig = arrow.eigen()?;
    let leakage = if spec.lambda_inf == 0.0 {
        0.0
    } else {
        ensure_window(&eig, &[0], spec.omega_slope, window)?
    };

    let n_res: Vec<f64> = ks.iter().map(|&k| spec.n_density.at(k)).collect();
    let (s, k) = (init.shares as f64, init.cash as f64);
    let n_p = 0.5 * (s + k);
    let n_bar = spec.nominal_density();
    let mut series = TimeSeries::with_capacity(t_grid.len());
    let mut defect = 0.0f64;
    for &t in t_grid {
        let snap = snapshot(&eig, &[(0, n_p)], 1, &n_res, t);
        let p_amp = snap.amps[0][0];
        let d_amp = Complex64::from_polar(1.0, -spec.omega * t);
        let cross = 0.5 * (s - k) * (p_amp.conj() * d_amp).re;
        let n_s = 0.5 * (snap.system[0] + n_p) + cross;
        let n_k = 0.5 * (snap.system[0] + n_p) - cross;
        let loi = n_bar + snap.reservoir_response;
        series.push(t, n_s, n_k, loi, n_s + n_k + loi);
        defect = defect.max(snap.column_defect);
    }
    Ok(OracleRun {
        series,
        leakage,
        unitarity_defect: defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lambda: f64) -> ReservoirSpecII {
        ReservoirSpecII::new(2.0, 3.0, lambda, Density::Constant(5.0)).unwrap()
    }

    #[test]
    fn eta1_basics() {
        let s = spec(0.5);
        assert_eq!(eta1(&s, 0.3, 0.0).unwrap(), Complex64::new(0.0, 0.0));
        let gp = s.decay().gamma_prime;
        let res = eta1(&s, s.resonance(), 1.5).unwrap();
        assert!(res.im.abs() < 1e-15);
        assert!((res.re - ((gp * 1.5).exp() - 1.0) / gp).abs() < 1e-12);
        assert!(matches!(eta1(&spec(0.0), 0.0, 1.0), Err(Error::ZeroCoupling)));
    }

    #[test]
    fn kernel_forms_agree() {
        let s = spec(0.3);
        let gp = s.decay().gamma_prime;
        for (k, t) in [(0.1, 0.4), (1.0, 3.0), (-2.0, 7.0)] {
            let a = s.omega - s.omega_slope * k;
            let direct = eta1(&s, k, t).unwrap().norm_sqr() * (-2.0 * gp * t).exp();
            assert!((crate::reservoir::damped_kernel(a, gp, t) - direct).abs() < 1e-13 * direct.max(1e-3));
        }
    }

    #[test]
    fn flat_density_noise_is_closed_form() {
        // For constant N the noise term is (N/2)(1 − e^{−2γ′t}).
        let s = spec(0.5);
        let gp = s.decay().gamma_prime;
        for t in [0.01, 0.3, 2.0, 10.0, 38.0] {
            let got = reservoir_noise(&s, t, &Quadrature::default()).unwrap();
            let want = 2.5 * (1.0 - (-2.0 * gp * t).exp());
            assert!((got - want).abs() < 1e-9, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn delta_pi_values() {
        assert_eq!(delta_pi_model2(45.0, 5.0).unwrap(), -17.5);
        assert_eq!(delta_pi_model2(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(delta_pi_model2(8.0, 4.0).unwrap(), 0.0);
        assert!(delta_pi_model2(-1.0, 0.0).is_err());
    }
}
