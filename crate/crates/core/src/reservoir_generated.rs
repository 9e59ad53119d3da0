//! Information generated by a reservoir: the LoI mode `i` (frequency `Ω`) is
//! itself coupled with strength `γ` to a band of reservoir modes with
//! dispersion `Ω^(r)k`, and shares/cash couple to `i` with strength `λ`.
//!
//! For small `λ` the back-action of the trader on `i` is dropped and, in the
//! Markov limit, `i` decays with rate `Γ = iΩ + πγ²/Ω^(r)`. Then
//!
//! ```text
//! N_S(t) = S + λ²I|α(t)|² + λ²γ²∫N^(r)(k)|η₂(k,t)|²dk
//! α(t)    = E(iω − Γ, t)
//! η₁(k,t) = E(Γ − iΩ^(r)k, t)
//! η₂(k,t) = ∫₀ᵗ η₁(k,t₁) e^{(iω−Γ)t₁} dt₁
//! ```
//!
//! with `ω = ωˢ` (or `ωᶜ` for cash). Dropping the integral and letting
//! `t → ∞` gives the portfolio increment `λ²I Σ_ω 1/|iω − Γ|²`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::arrow::Arrowhead;
use crate::closed_market::MarketInit;
use crate::cmath::{exp_integral, exp_integral_divided};
use crate::error::{Error, Result};
use crate::quad::{integrate_real, Quadrature};
use crate::reservoir::{damped_lorentzian_integral, ensure_window, snapshot, Density, KWindow};
use crate::reservoir_info::OracleRun;
use crate::series::{check_grid, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct Model3Params {
    pub omega_s: f64,
    pub omega_c: f64,
    /// LoI frequency `Ω`.
    pub omega_loi: f64,
    /// Reservoir dispersion slope `Ω^(r)`.
    pub omega_r_slope: f64,
    pub lambda_inf: f64,
    /// LoI–reservoir coupling.
    pub gamma: f64,
    pub n_r_density: Density,
}

impl Model3Params {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_s", self.omega_s),
            ("omega_c", self.omega_c),
            ("Omega", self.omega_loi),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if !self.omega_r_slope.is_finite() || self.omega_r_slope <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Omega_r_slope must be finite and > 0, got {}",
                self.omega_r_slope
            )));
        }
        for (name, v) in [("lambda_inf", self.lambda_inf), ("gamma", self.gamma)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        self.n_r_density.validate()
    }

    /// `Re Γ = πγ²/Ω^(r)`.
    pub fn decay_rate(&self) -> f64 {
        PI * self.gamma * self.gamma / self.omega_r_slope
    }

    /// `Γ = iΩ + πγ²/Ω^(r)`.
    pub fn big_gamma(&self) -> Complex64 {
        Complex64::new(self.decay_rate(), self.omega_loi)
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..self.clone() }
    }

    pub fn with_loi_frequency(&self, omega_loi: f64) -> Self {
        Self { omega_loi, ..self.clone() }
    }
}

/// Which trader mode a kernel belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Shares,
    Cash,
}

/// Kernels for one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model3Kernels {
    pub gamma: Complex64,
    pub omega: f64,
    pub omega_r: f64,
    /// `iω = Γ`: only at `γ = 0, ω = Ω`, where `α(t)` degenerates to `t`.
    pub resonant: bool,
}

impl Model3Kernels {
    fn a(&self) -> Complex64 {
        Complex64::new(0.0, self.omega) - self.gamma
    }

    pub fn alpha(&self, t: f64) -> Complex64 {
        exp_integral(self.a(), t)
    }

    pub fn eta1(&self, k: f64, t: f64) -> Complex64 {
        exp_integral(self.gamma - Complex64::new(0.0, self.omega_r * k), t)
    }

    /// Closed form `(E(i(ω − Ω^(r)k), t) − E(iω − Γ, t)) / (Γ − iΩ^(r)k)`,
    /// continuous through a vanishing denominator.
    pub fn eta2(&self, k: f64, t: f64) -> Complex64 {
        let b = Complex64::new(0.0, self.omega - self.omega_r * k);
        exp_integral_divided(b, self.a(), t)
    }

    /// `lim |α(t)|`, infinite in the resonant case.
    pub fn alpha_limit(&self) -> f64 {
        if self.resonant {
            f64::INFINITY
        } else {
            1.0 / self.a().norm()
        }
    }
}

pub fn kernels(p: &Model3Params, channel: Channel) -> Result<Model3Kernels> {
    p.validate()?;
    let omega = match channel {
        Channel::Shares => p.omega_s,
        Channel::Cash => p.omega_c,
    };
    Ok(Model3Kernels {
        gamma: p.big_gamma(),
        omega,
        omega_r: p.omega_r_slope,
        resonant: p.gamma == 0.0 && omega == p.omega_loi,
    })
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("t must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

/// `∫N^(r)(k)|η₂(k,t)|²dk` over the real line.
///
/// The central window covers both resonances, the density knots and a margin
/// of `40·max(Re Γ, 1)/Ω^(r)`. Beyond it `N^(r)` is constant and, with
/// `x = Ω^(r)k`, `q = ω − x`, `L = 1/((Re Γ)² + (Ω − x)²)` and `e = E(iω − Γ, t)`,
///
/// ```text
/// |η₂|² = L(2/q² + |e|² − 2Re(iē/q)) + Re[e^{iqt} L(−2/q² + 2iē/q)]
/// ```
///
/// The first part is integrated after mapping the tail onto `(0, 1]`; the
/// oscillating part is analytic below the real axis there, so it is moved
/// onto the vertical line `x − iy` where it decays like `e^{−yt}`.
fn eta2_band_integral(p: &Model3Params, kern: &Model3Kernels, t: f64, quad: &Quadrature) -> Result<f64> {
    let slope = p.omega_r_slope;
    let re = p.decay_rate();
    let margin = 40.0 * re.max(1.0) / slope;
    let features = [kern.omega / slope, p.omega_loi / slope];
    let knots = p.n_r_density.knots();
    let lo = features.iter().chain(knots).copied().fold(f64::INFINITY, f64::min) - margin;
    let hi = features.iter().chain(knots).copied().fold(f64::NEG_INFINITY, f64::max) + margin;

    let mut points = vec![lo, hi];
    for &c in &features {
        points.push(c);
        for w in [re / slope, 4.0 * re / slope, 1.0 / slope, margin / 4.0, 1.0 / (slope * t), 10.0 / (slope * t)] {
            points.push(c - w);
            points.push(c + w);
        }
    }
    points.extend_from_slice(knots);
    points.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (hi - lo));
    let centre = integrate_real(quad, |k| p.n_r_density.at(k) * kern.eta2(k, t).norm_sqr(), &points);

    let e = kern.alpha(t);
    let i = Complex64::new(0.0, 1.0);
    let lorentz = |x: Complex64| 1.0 / (re * re + (p.omega_loi - x) * (p.omega_loi - x));
    let smooth = |x: f64| {
        let q = kern.omega - x;
        lorentz(Complex64::new(x, 0.0)).re * (2.0 / (q * q) + e.norm_sqr() - 2.0 * (i * e.conj() / q).re)
    };
    let h = |x: Complex64| {
        let q = kern.omega - x;
        lorentz(x) * (-2.0 / (q * q) + 2.0 * i * e.conj() / q)
    };
    let span = slope * margin;
    let mut value = centre.value.re;
    let mut error = centre.error;
    for (edge, dir) in [(slope * hi, 1.0), (slope * lo, -1.0)] {
        let flat = integrate_real(
            quad,
            |u| if u == 0.0 { 0.0 } else { smooth(edge + dir * span * (1.0 - u) / u) * span / (u * u) },
            &[0.0, 0.25, 0.5, 1.0],
        );
        // ∫ e^{−yt} H(edge − iy) dy on y = s·u/(1 − u).
        let s = 1.0 / t + span;
        let vertical = quad.integrate_breaks(
            |u| {
                if u >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let y = s * u / (1.0 - u);
                let jac = s / ((1.0 - u) * (1.0 - u));
                h(Complex64::new(edge, -y)) * ((-y * t).exp() * jac)
            },
            &[0.0, 0.25, 0.5, 0.75, 1.0],
        );
        // Right tail: −i e^{iqt}·vertical; left tail: +i e^{iqt}·vertical.
        let phase = Complex64::from_polar(1.0, (kern.omega - edge) * t);
        let osc = (-i * dir * phase * vertical.value).re;
        let density = p.n_r_density.at(edge / slope);
        value += density * (flat.value.re + osc) / slope;
        error += density * (flat.error + vertical.error) / slope;
    }
    if error > (1e-8 * value.abs()).max(1e-300) {
        return Err(Error::Quadrature { value, error });
    }
    Ok(value)
}

/// `γ²∫N^(r)(k)|η₂(k,t)|²dk` for one channel.
pub fn eta2_integral(p: &Model3Params, channel: Channel, t: f64, quad: &Quadrature) -> Result<f64> {
    check_time(t)?;
    if p.gamma == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let kern = kernels(p, channel)?;
    Ok(p.gamma * p.gamma * eta2_band_integral(p, &kern, t, quad)?)
}

/// `(N_S(t), N_K(t))`. With `include_integral = false` the γ-integral is
/// dropped, as in the derivation of the long-time increment.
pub fn occupations_model3_with(
    p: &Model3Params,
    init: &MarketInit,
    t: f64,
    include_integral: bool,
    quad: &Quadrature,
) -> Result<(f64, f64)> {
    p.validate()?;
    check_time(t)?;
    let (s, k) = (init.shares as f64, init.cash as f64);
    if p.lambda_inf == 0.0 {
        return Ok((s, k));
    }
    let l2 = p.lambda_inf * p.lambda_inf;
    let i0 = init.loi as f64;
    let mut out = [s, k];
    for (slot, ch) in out.iter_mut().zip([Channel::Shares, Channel::Cash]) {
        let kern = kernels(p, ch)?;
        *slot += l2 * i0 * kern.alpha(t).norm_sqr();
        if include_integral {
            *slot += l2 * eta2_integral(p, ch, t, quad)?;
        }
    }
    Ok((out[0], out[1]))
}

/// Occupations with the γ-integral kept.
pub fn occupations_model3(p: &Model3Params, init: &MarketInit, t: f64) -> Result<(f64, f64)> {
    occupations_model3_with(p, init, t, true, &Quadrature::default())
}

/// LoI occupation of the reduced LoI–reservoir dynamics:
/// `I e^{−2ReΓt} + γ²∫N^(r)|e^{−Γt}η₁|²dk`.
pub fn loi_occupation_model3(p: &Model3Params, init: &MarketInit, t: f64, quad: &Quadrature) -> Result<f64> {
    p.validate()?;
    check_time(t)?;
    let re = p.decay_rate();
    let decayed = init.loi as f64 * (-2.0 * re * t).exp();
    if p.gamma == 0.0 || t == 0.0 {
        return Ok(decayed);
    }
    let slope = p.omega_r_slope;
    // Detuning a = Ω − Ω^(r)k; the kernel is |e^{−Γt}η₁|².
    let knots: Vec<f64> = p.n_r_density.knots().iter().map(|&k| p.omega_loi - slope * k).collect();
    let fed = damped_lorentzian_integral(
        |a| p.n_r_density.at((p.omega_loi - a) / slope),
        re,
        t,
        40.0 * re.max(1.0),
        &knots,
        quad,
    )? / slope;
    Ok(decayed + p.gamma * p.gamma * fed)
}

/// Long-time increment `λ²I(Ω^(r))² Σ_ω 1/(π²γ⁴ + (ω − Ω)²(Ω^(r))²)`.
pub fn delta_pi_model3(p: &Model3Params, loi: f64) -> Result<f64> {
    p.validate()?;
    if !loi.is_finite() || loi < 0.0 {
        return Err(Error::InvalidParameter(format!("LoI quanta must be finite and ≥ 0, got {loi}")));
    }
    let l2 = p.lambda_inf * p.lambda_inf;
    let r2 = p.omega_r_slope * p.omega_r_slope;
    let g4 = p.gamma.powi(4);
    let mut sum = 0.0;
    for (name, w) in [("omega_s", p.omega_s), ("omega_c", p.omega_c)] {
        let den = PI * PI * g4 + (w - p.omega_loi).powi(2) * r2;
        if den == 0.0 {
            return Err(Error::Pole(format!("gamma = 0 with {name} = Omega = {w}")));
        }
        sum += 1.0 / den;
    }
    Ok(l2 * loi * r2 * sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraderComparison {
    pub delta1: f64,
    pub delta2: f64,
    /// Ordering of `δπ₁` relative to `δπ₂`.
    pub ordering: Ordering,
}

/// Increments of two traders that agree on everything except `Ω` and `γ`.
pub fn compare_traders(p1: &Model3Params, p2: &Model3Params, loi: f64) -> Result<TraderComparison> {
    let shared = |p: &Model3Params| (p.omega_s, p.omega_c, p.omega_r_slope, p.lambda_inf);
    if shared(p1) != shared(p2) {
        return Err(Error::InvalidParameter(
            "traders must share omega_s, omega_c, Omega_r_slope and lambda_inf".into(),
        ));
    }
    let delta1 = delta_pi_model3(p1, loi)?;
    let delta2 = delta_pi_model3(p2, loi)?;
    Ok(TraderComparison {
        delta1,
        delta2,
        ordering: delta1.total_cmp(&delta2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    /// `γ₁*` with `δπ₁(γ₁*) = δπ₂(γ₂)`.
    Root { gamma1: f64, residual: f64 },
    /// `δπ₁` stays below `δπ₂` on the whole bracket.
    NoCrossing,
}

/// Lower end of the `γ₁` bracket.
pub const GAMMA1_FLOOR: f64 = 1e-6;

/// Bisection for `γ₁` on `[1e−6, upper]`; `upper` defaults to `γ₂`.
/// `base` supplies the shared parameters and the LoI quanta `loi`.
pub fn critical_gamma1(
    omega1: f64,
    omega2: f64,
    gamma2: f64,
    base: &Model3Params,
    loi: f64,
    upper: Option<f64>,
) -> Result<Crossing> {
    if !(omega1 >= omega2) {
        return Err(Error::InvalidParameter(format!("need Omega1 ≥ Omega2, got {omega1} < {omega2}")));
    }
    if !gamma2.is_finite() || gamma2 <= 0.0 {
        return Err(Error::InvalidParameter(format!("gamma2 must be > 0, got {gamma2}")));
    }
    let hi = upper.unwrap_or(gamma2);
    if !hi.is_finite() || hi <= GAMMA1_FLOOR {
        return Err(Error::InvalidParameter(format!("bracket upper end must exceed {GAMMA1_FLOOR}, got {hi}")));
    }
    let trader1 = base.with_loi_frequency(omega1);
    let target = delta_pi_model3(&base.with_loi_frequency(omega2).with_gamma(gamma2), loi)?;
    let f = |g: f64| delta_pi_model3(&trader1.with_gamma(g), loi).map(|d| d - target);

    let (mut lo, mut hi) = (GAMMA1_FLOOR, hi);
    let (f_lo, f_hi) = (f(lo)?, f(hi)?);
    if f_hi == 0.0 {
        return Ok(Crossing::Root { gamma1: hi, residual: 0.0 });
    }
    if f_lo == 0.0 {
        return Ok(Crossing::Root { gamma1: lo, residual: 0.0 });
    }
    if f_lo < 0.0 && f_hi < 0.0 {
        return Ok(Crossing::NoCrossing);
    }
    if f_lo > 0.0 && f_hi > 0.0 {
        return Err(Error::NotBracketed { lo, hi });
    }
    // δπ₁ decreases in γ₁: f_lo > 0 > f_hi.
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 || hi - lo <= 2.0 * f64::EPSILON * mid {
            break;
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = f(mid)?.abs();
    if residual >= 1e-10 {
        return Err(Error::RootResidual {
            residual,
            tolerance: 1e-10,
        });
    }
    Ok(Crossing::Root { gamma1: mid, residual })
}

/// Closed-form series. `n_loi` follows the reduced LoI dynamics and
/// `conserved` is `π(t) + I(0)`, which that dynamics conserves only up to the
/// neglected trader back-action.
pub fn model3_series(
    p: &Model3Params,
    init: &MarketInit,
    t_grid: &[f64],
    include_integral: bool,
) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    let quad = Quadrature::default();
    let mut series = TimeSeries::with_capacity(t_grid.len());
    for &t in t_grid {
        let (s, k) = occupations_model3_with(p, init, t, include_integral, &quad)?;
        let loi = loi_occupation_model3(p, init, t, &quad)?;
        series.push(t, s, k, loi, s + k + init.loi as f64);
    }
    Ok(series)
}

/// Full single-particle problem with the trader back-action kept: hub `i`,
/// spokes `s`, `c` (coupling `λ`) and `n_k` reservoir modes at `Ω^(r)kᵢ`
/// (coupling `γ√Δk`).
pub fn discretized_oracle_model3(
    p: &Model3Params,
    init: &MarketInit,
    window: &KWindow,
    t_grid: &[f64],
) -> Result<OracleRun> {
    p.validate()?;
    window.validate(200)?;
    check_grid(t_grid)?;
    let slope = p.omega_r_slope;
    for (name, w) in [("omega_s", p.omega_s), ("omega_c", p.omega_c), ("Omega", p.omega_loi)] {
        if !window.contains(w / slope) {
            return Err(Error::InvalidParameter(format!(
                "k window [{}, {}] must bracket the {name} resonance {}",
                window.k_min,
                window.k_max,
                w / slope
            )));
        }
    }
    window.check_times(slope, t_grid)?;

    let ks = window.points();
    let g = p.gamma * window.dk().sqrt();
    let mut spokes = vec![(p.omega_s, p.lambda_inf), (p.omega_c, p.lambda_inf)];
    spokes.extend(ks.iter().map(|&k| (slope * k, g)));
    let eig = Arrowhead {
        hub: p.omega_loi,
        spokes,
    }
    .eigen()?;
    let leakage = if p.gamma == 0.0 {
        0.0
    } else {
        ensure_window(&eig, &[0, 1, 2], slope, window)?
    };

    let n_res: Vec<f64> = ks.iter().map(|&k| p.n_r_density.at(k)).collect();
    let system = [(0, init.loi as f64), (1, init.shares as f64), (2, init.cash as f64)];
    let mut series = TimeSeries::with_capacity(t_grid.len());
    let mut defect = 0.0f64;
    for &t in t_grid {
        let snap = snapshot(&eig, &system, 3, &n_res, t);
        let (loi, s, k) = (snap.system[0], snap.system[1], snap.system[2]);
        series.push(t, s, k, loi, s + k + loi + snap.reservoir_response);
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

    #[test]
    fn kernels_vanish_at_zero() {
        let k = kernels(&base(), Channel::Shares).unwrap();
        assert_eq!(k.alpha(0.0), Complex64::new(0.0, 0.0));
        assert_eq!(k.eta1(0.7, 0.0), Complex64::new(0.0, 0.0));
        assert_eq!(k.eta2(0.7, 0.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn alpha_limit_value() {
        let k = kernels(&base(), Channel::Shares).unwrap();
        assert!((k.alpha_limit() - 0.249_876_721_190_965_5).abs() < 1e-12);
    }

    #[test]
    fn delta_pi_example() {
        let d = delta_pi_model3(&base(), 5.0).unwrap();
        assert!((d - 0.008_667_7).abs() < 1e-6, "{d}");
        let pole = Model3Params {
            gamma: 0.0,
            omega_s: 5.0,
            ..base()
        };
        assert!(matches!(delta_pi_model3(&pole, 5.0), Err(Error::Pole(_))));
    }

    #[test]
    fn loi_relaxes_to_reservoir_level() {
        let p = Model3Params {
            n_r_density: Density::Constant(3.0),
            ..base()
        };
        let init = MarketInit::new(0, 0, 5);
        let re = p.decay_rate();
        for t in [0.5, 4.0, 30.0] {
            let got = loi_occupation_model3(&p, &init, t, &Quadrature::default()).unwrap();
            let e = (-2.0 * re * t).exp();
            let want = 5.0 * e + 3.0 * (1.0 - e);
            assert!((got - want).abs() < 1e-8, "t={t}: {got} vs {want}");
        }
    }
}
