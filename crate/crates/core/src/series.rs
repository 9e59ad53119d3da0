use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Sampled occupations of one trader.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub n_shares: Vec<f64>,
    pub n_cash: Vec<f64>,
    pub n_loi: Vec<f64>,
    pub portfolio: Vec<f64>,
    /// The model's conserved charge as evaluated along the series.
    pub conserved: Vec<f64>,
}

impl TimeSeries {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            n_shares: Vec::with_capacity(n),
            n_cash: Vec::with_capacity(n),
            n_loi: Vec::with_capacity(n),
            portfolio: Vec::with_capacity(n),
            conserved: Vec::with_capacity(n),
        }
    }

    pub fn push(&mut self, t: f64, shares: f64, cash: f64, loi: f64, conserved: f64) {
        self.times.push(t);
        self.n_shares.push(shares);
        self.n_cash.push(cash);
        self.n_loi.push(loi);
        self.portfolio.push(shares + cash);
        self.conserved.push(conserved);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `n` equally spaced samples on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !t_max.is_finite() || t_max < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time grid needs n ≥ 1 and finite t_max ≥ 0 (got n={n}, t_max={t_max})"
        )));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect())
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("time grid must be finite and ascending".into()));
    }
    Ok(())
}

/// `max − min` of a sampled signal.
pub fn peak_to_peak(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Frequency (cycles per unit time) of the largest non-zero DFT bin of a
/// uniformly sampled signal.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> f64 {
    let n = values.len();
    if n < 3 || times.len() != n {
        return 0.0;
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let best = (1..=n / 2)
        .max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm()))
        .unwrap_or(1);
    best as f64 / (n as f64 * dt)
}
