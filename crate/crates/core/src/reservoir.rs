//! Pieces shared by the two reservoir models: occupation densities, the
//! discretised k-window and single-particle bookkeeping for a hub-and-spokes
//! system coupled to a finite band.

use num_complex::Complex64;

use crate::arrow::ArrowEigen;
use crate::cmath::{cosine_tail, expm1};
use crate::error::{Error, Result};
use crate::quad::{integrate_real, Quadrature};

/// Occupation `N(k)` of the reservoir modes.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Constant(f64),
    /// Piecewise-linear in `k`, held flat outside the table.
    Table { k: Vec<f64>, n: Vec<f64> },
}

impl Density {
    pub fn table(k: Vec<f64>, n: Vec<f64>) -> Result<Self> {
        let d = Density::Table { k, n };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Density::Constant(n) => {
                if !n.is_finite() || *n < 0.0 {
                    return Err(Error::InvalidParameter(format!("density must be finite and ≥ 0, got {n}")));
                }
            }
            Density::Table { k, n } => {
                if k.len() != n.len() || k.len() < 2 {
                    return Err(Error::InvalidParameter(
                        "density table needs ≥ 2 points and equal k/n lengths".into(),
                    ));
                }
                if k.iter().any(|x| !x.is_finite()) || k.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidParameter("density table k must be finite and strictly increasing".into()));
                }
                if n.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::InvalidParameter("density table values must be finite and ≥ 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, x: f64) -> f64 {
        match self {
            Density::Constant(n) => *n,
            Density::Table { k, n } => {
                let last = k.len() - 1;
                if x <= k[0] {
                    return n[0];
                }
                if x >= k[last] {
                    return n[last];
                }
                let i = k.partition_point(|&v| v <= x) - 1;
                let f = (x - k[i]) / (k[i + 1] - k[i]);
                n[i] + f * (n[i + 1] - n[i])
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Density::Constant(_))
    }

    /// Kinks of the density, useful as quadrature breakpoints.
    pub fn knots(&self) -> &[f64] {
        match self {
            Density::Constant(_) => &[],
            Density::Table { k, .. } => k,
        }
    }
}

/// `n_k` equally spaced wave numbers on `[k_min, k_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KWindow {
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
}

impl KWindow {
    pub fn new(k_min: f64, k_max: f64, n_k: usize) -> Result<Self> {
        let w = Self { k_min, k_max, n_k };
        w.validate(2)?;
        Ok(w)
    }

    pub(crate) fn validate(&self, min_points: usize) -> Result<()> {
        if !self.k_min.is_finite() || !self.k_max.is_finite() || self.k_max <= self.k_min {
            return Err(Error::InvalidParameter(format!(
                "k window needs finite k_min < k_max, got [{}, {}]",
                self.k_min, self.k_max
            )));
        }
        if self.n_k < min_points {
            return Err(Error::InvalidParameter(format!(
                "k window needs n_k ≥ {min_points}, got {}",
                self.n_k
            )));
        }
        Ok(())
    }

    pub fn dk(&self) -> f64 {
        (self.k_max - self.k_min) / (self.n_k - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dk = self.dk();
        (0..self.n_k).map(|i| self.k_min + dk * i as f64).collect()
    }

    pub fn contains(&self, k: f64) -> bool {
        k > self.k_min && k < self.k_max
    }

    /// Longest time before the discrete band rephases, with a factor two margin.
    pub fn max_time(&self, slope: f64) -> f64 {
        std::f64::consts::PI / (slope * self.dk())
    }

    pub(crate) fn check_times(&self, slope: f64, t_grid: &[f64]) -> Result<()> {
        let limit = self.max_time(slope);
        if let Some(&t) = t_grid.iter().find(|t| t.abs() > limit) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} exceeds half the recurrence time {limit} of the discretised band; refine n_k"
            )));
        }
        Ok(())
    }
}

/// Fraction of each system mode's spectral weight sitting in the outer 5% of
/// the band on either side; the largest over `system` rows is returned.
pub(crate) fn boundary_leakage(eig: &ArrowEigen, system: &[usize], slope: f64, window: &KWindow) -> f64 {
    let margin = 0.05 * (window.k_max - window.k_min);
    let lo = slope * (window.k_min + margin);
    let hi = slope * (window.k_max - margin);
    let values = eig.values();
    system
        .iter()
        .map(|&a| {
            eig.row(a)
                .iter()
                .zip(values)
                .filter(|(_, &l)| l < lo || l > hi)
                .map(|(q, _)| q * q)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

pub(crate) fn ensure_window(eig: &ArrowEigen, system: &[usize], slope: f64, window: &KWindow) -> Result<f64> {
    let fraction = boundary_leakage(eig, system, slope, window);
    if fraction > 0.01 {
        return Err(Error::WindowTooNarrow { fraction });
    }
    Ok(fraction)
}

/// Expectations at one time for a number-diagonal initial state.
#[derive(Debug, Clone)]
pub(crate) struct Snapshot {
    /// `V_ab(t)` for `a, b` in the system list.
    pub amps: Vec<Vec<Complex64>>,
    /// `⟨n_a(t)⟩` for the system modes.
    pub system: Vec<f64>,
    /// `Σ_i ⟨n_{r_i}(t)⟩ − Σ_i N_i`.
    pub reservoir_response: f64,
    /// `max_b |Σ_a |V_ab|² − 1|` over system columns.
    pub column_defect: f64,
}

/// `system` lists basis indices of the few non-reservoir modes with their
/// initial occupations; reservoir modes are indices `first_res..first_res+len`.
pub(crate) fn snapshot(
    eig: &ArrowEigen,
    system: &[(usize, f64)],
    first_res: usize,
    n_res: &[f64],
    t: f64,
) -> Snapshot {
    let cols: Vec<Vec<Complex64>> = system.iter().map(|&(b, _)| eig.propagator_column(b, t)).collect();
    let res = first_res..first_res + n_res.len();
    let amps: Vec<Vec<Complex64>> = system
        .iter()
        .map(|&(a, _)| cols.iter().map(|col| col[a]).collect())
        .collect();
    let mut occ = Vec::with_capacity(system.len());
    for (ia, &(a, _)) in system.iter().enumerate() {
        let from_system: f64 = system
            .iter()
            .zip(&cols)
            .map(|(&(_, nb), col)| nb * col[a].norm_sqr())
            .sum();
        // V is complex symmetric, so V_{a r} is read off column a.
        let from_res: f64 = cols[ia][res.clone()].iter().zip(n_res).map(|(v, n)| n * v.norm_sqr()).sum();
        occ.push(from_system + from_res);
    }
    let mut response = 0.0;
    let mut defect = 0.0f64;
    for (&(_, nb), col) in system.iter().zip(&cols) {
        let into_res: f64 = col[res.clone()].iter().map(|v| v.norm_sqr()).sum();
        response += nb * into_res;
        let total: f64 = col.iter().map(|v| v.norm_sqr()).sum();
        defect = defect.max((total - 1.0).abs());
    }
    // Reservoir quanta that left for the system (column unitarity of r_i).
    for col in &cols {
        response -= col[res.clone()].iter().zip(n_res).map(|(v, n)| n * v.norm_sqr()).sum::<f64>();
    }
    Snapshot {
        amps,
        system: occ,
        reservoir_response: response,
        column_defect: defect,
    }
}

/// `|1 − e^{−(r + ia)t}|² / (a² + r²)`, i.e. `e^{−2rt}|E(r + ia, t)|²`
/// without growing exponentials.
pub(crate) fn damped_kernel(a: f64, r: f64, t: f64) -> f64 {
    expm1(Complex64::new(-r * t, -a * t)).norm_sqr() / (a * a + r * r)
}

/// `∫ n(a)·damped_kernel(a, r, t) da` over the real line: adaptive quadrature
/// on `|a| ≤ w`, and on each tail `n` is held at the window edge, the `1/a²`
/// part is integrated in closed form and the `r²` remainder numerically after
/// `a = w/u`.
pub(crate) fn damped_lorentzian_integral<F: Fn(f64) -> f64>(
    n: F,
    r: f64,
    t: f64,
    w: f64,
    extra_points: &[f64],
    quad: &Quadrature,
) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let mut points = vec![-w, w, 0.0, -r, r, -4.0 * r, 4.0 * r, -w / 4.0, w / 4.0];
    points.extend_from_slice(extra_points);
    points.retain(|p| p.abs() <= w);
    points.sort_by(f64::total_cmp);
    points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * w);
    let centre = integrate_real(quad, |a| n(a) * damped_kernel(a, r, t), &points).checked(1e-8, 1e-300)?;

    // g(a) = 1 + e^{−2rt} − 2e^{−rt}cos(at).
    let (e1, e2) = ((-r * t).exp(), (-2.0 * r * t).exp());
    let leading = (1.0 + e2) / w - 2.0 * e1 * cosine_tail(w, t);
    let remainder_quad = Quadrature {
        rel_tol: 1e-6,
        abs_tol: 1e-18,
        max_intervals: quad.max_intervals,
    };
    let remainder = integrate_real(
        &remainder_quad,
        |u| {
            if u == 0.0 {
                return 0.0;
            }
            let g = 1.0 + e2 - 2.0 * e1 * (w * t / u).cos();
            r * r * g * u * u / (w * (w * w + r * r * u * u))
        },
        &[0.0, 0.125, 0.25, 0.5, 1.0],
    )
    .checked(1e-4, 1e-16)?;
    let tail = leading - remainder.value.re;
    Ok(centre.value.re + (n(w) + n(-w)) * tail)
}
