//! Closed market: each trader's shares, cash and lack-of-information (LoI)
//! modes are coupled by a quadratic hopping Hamiltonian, so the annihilation
//! operators evolve linearly, `X(t) = V(t) X(0)` with `V(t) = exp(−iTt)`.
//!
//! On a number state the cross terms `⟨a_b† a_b'⟩` vanish and the expected
//! occupations reduce to `N_a(t) = Σ_b |V_ab(t)|² n_b(0)`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::{check_grid, TimeSeries};

/// Frequencies and coupling of one trader.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraderParams {
    pub omega_s: f64,
    pub omega_c: f64,
    /// LoI frequency.
    pub omega_loi: f64,
    pub lambda_inf: f64,
}

impl TraderParams {
    pub fn new(omega_s: f64, omega_c: f64, omega_loi: f64, lambda_inf: f64) -> Result<Self> {
        let p = Self {
            omega_s,
            omega_c,
            omega_loi,
            lambda_inf,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_s", self.omega_s),
            ("omega_c", self.omega_c),
            ("Omega", self.omega_loi),
            ("lambda_inf", self.lambda_inf),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Initial quantum numbers of one trader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MarketInit {
    pub shares: u32,
    pub cash: u32,
    pub loi: u32,
}

impl MarketInit {
    pub fn new(shares: u32, cash: u32, loi: u32) -> Self {
        Self { shares, cash, loi }
    }

    pub fn total(&self) -> u32 {
        self.shares + self.cash + self.loi
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.shares as f64, self.cash as f64, self.loi as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: Matrix3<Complex64>,
    pub time: f64,
}

impl Propagator {
    /// `max |V†V − 1|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.adjoint() * self.matrix;
        (prod - Matrix3::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// The coupling matrix in `dX/dt = −iT X`, ordering (shares, cash, LoI).
pub fn build_t(p: &TraderParams) -> Matrix3<f64> {
    let l = p.lambda_inf;
    Matrix3::new(
        p.omega_s, 0.0, l, //
        0.0, p.omega_c, l, //
        l, l, p.omega_loi,
    )
}

/// Diagonalised coupling matrix, reusable across many times.
#[derive(Debug, Clone)]
pub struct ClosedMarket {
    eigenvalues: Vector3<f64>,
    eigenvectors: Matrix3<f64>,
}

impl ClosedMarket {
    pub fn new(t_matrix: &Matrix3<f64>) -> Result<Self> {
        let asym = (t_matrix - t_matrix.transpose()).amax();
        if asym > 1e-12 || t_matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coupling matrix must be finite and symmetric (asymmetry {asym:e})"
            )));
        }
        let SymmetricEigen {
            eigenvalues,
            eigenvectors,
        } = SymmetricEigen::new(*t_matrix);
        let orth = (eigenvectors.transpose() * eigenvectors - Matrix3::identity()).amax();
        if orth > 1e-8 {
            return Err(Error::Eigendecomposition {
                residual: orth,
                tolerance: 1e-8,
            });
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn from_params(p: &TraderParams) -> Result<Self> {
        p.validate()?;
        Self::new(&build_t(p))
    }

    pub fn eigenvalues(&self) -> Vector3<f64> {
        self.eigenvalues
    }

    /// `V(t) = U exp(−iσt) Uᵀ`.
    pub fn propagator(&self, t: f64) -> Propagator {
        let u = self.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let phases = Matrix3::from_diagonal(&self.eigenvalues.map(|s| Complex64::from_polar(1.0, -s * t)));
        Propagator {
            matrix: u * phases * u.transpose(),
            time: t,
        }
    }
}

pub fn propagator(t_matrix: &Matrix3<f64>, t: f64) -> Result<Propagator> {
    Ok(ClosedMarket::new(t_matrix)?.propagator(t))
}

/// Expected `(N_S, N_K, N_I)` on the number state `init`.
pub fn occupations(v: &Propagator, init: &MarketInit) -> [f64; 3] {
    let n0 = init.as_vector();
    let weights = v.matrix.map(|z| z.norm_sqr());
    let n = weights * n0;
    [n[0], n[1], n[2]]
}

/// `π(t) = N_S(t) + N_K(t)` along `t_grid`, with the LoI and the conserved
/// sum `N_S + N_K + N_I`.
pub fn portfolio_series(p: &TraderParams, init: &MarketInit, t_grid: &[f64]) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    let market = ClosedMarket::from_params(p)?;
    let mut series = TimeSeries::with_capacity(t_grid.len());
    for &t in t_grid {
        let [s, k, i] = occupations(&market.propagator(t), init);
        series.push(t, s, k, i, s + k + i);
    }
    Ok(series)
}
