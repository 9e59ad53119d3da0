//! Pilot-wave stage: a two-dimensional wave `Ψ(q₁, q₂; t)` obeying
//!
//! ```text
//! i ∂Ψ/∂t = [−(ħ²/2m)(∂²/∂q₁² + ∂²/∂q₂²) + V(q₁, q₂)] Ψ
//! ```
//!
//! on a periodic grid, the quantum potential `U = −(1/R) Σⱼ ∂²R/∂qⱼ²` of
//! `R = |Ψ|`, the mental forces `gⱼ = −∂U/∂qⱼ` and the portfolio equations
//! `π̇ⱼ = fⱼ + gⱼ` with `fⱼ = −∂V/∂qⱼ`.
//!
//! Time stepping is Strang splitting with the kinetic factor applied in
//! Fourier space, so each step is exactly unitary and `dt → −dt` inverts it.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Rectangular lattice `q = min + index·spacing`, periodic in both axes.
/// Values are stored row-major with `q₁` as the slow index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub n1: usize,
    pub n2: usize,
    pub q1_min: f64,
    pub q2_min: f64,
    pub dq1: f64,
    pub dq2: f64,
}

impl Grid2 {
    pub fn new(n1: usize, n2: usize, q1_min: f64, q2_min: f64, dq1: f64, dq2: f64) -> Result<Self> {
        let g = Self {
            n1,
            n2,
            q1_min,
            q2_min,
            dq1,
            dq2,
        };
        g.validate()?;
        Ok(g)
    }

    /// `n × n` grid with spacing `dq` and the node `q = 0` at index `n/2`.
    pub fn centered(n: usize, dq: f64) -> Result<Self> {
        let min = -((n / 2) as f64) * dq;
        Self::new(n, n, min, min, dq, dq)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 4 || self.n2 < 4 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 4 nodes per axis, got {}×{}",
                self.n1, self.n2
            )));
        }
        for v in [self.dq1, self.dq2] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("grid spacing must be finite and > 0, got {v}")));
            }
        }
        if !self.q1_min.is_finite() || !self.q2_min.is_finite() {
            return Err(Error::InvalidParameter("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    pub fn q1(&self, i: usize) -> f64 {
        self.q1_min + i as f64 * self.dq1
    }

    pub fn q2(&self, j: usize) -> f64 {
        self.q2_min + j as f64 * self.dq2
    }

    pub fn cell_area(&self) -> f64 {
        self.dq1 * self.dq2
    }

    fn check_same(&self, other: &Grid2) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid2,
    pub values: Vec<Complex64>,
    pub hbar: f64,
    pub mass: f64,
}

impl WaveField {
    pub fn new(grid: Grid2, values: Vec<Complex64>, hbar: f64, mass: f64) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        for (name, v) in [("hbar", hbar), ("mass", mass)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            grid,
            values,
            hbar,
            mass,
        })
    }

    /// Samples `f(q₁, q₂)` on the grid and normalises.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: Grid2, hbar: f64, mass: f64, f: F) -> Result<Self> {
        grid.validate()?;
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                values.push(f(grid.q1(i), grid.q2(j)));
            }
        }
        let mut w = Self::new(grid, values, hbar, mass)?;
        w.normalize()?;
        Ok(w)
    }

    /// `Σ|Ψ|² Δq₁Δq₂`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_area()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(format!("cannot normalise a wave of norm {n}")));
        }
        let s = 1.0 / n.sqrt();
        self.values.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }

    /// `R = |Ψ|`.
    pub fn amplitude(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// Mean and standard deviation of `q₁` and `q₂` under `|Ψ|²`.
    pub fn moments(&self) -> ([f64; 2], [f64; 2]) {
        let g = &self.grid;
        let (mut w, mut m1, mut m2, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                let p = self.values[g.index(i, j)].norm_sqr();
                let (a, b) = (g.q1(i), g.q2(j));
                w += p;
                m1 += p * a;
                m2 += p * b;
                s1 += p * a * a;
                s2 += p * b * b;
            }
        }
        let (m1, m2) = (m1 / w, m2 / w);
        ([m1, m2], [(s1 / w - m1 * m1).sqrt(), (s2 / w - m2 * m2).sqrt()])
    }
}

/// Hard potential `V`, quantum potential `U` and amplitude `R` on one grid.
/// Masked nodes (`R` below the floor) carry `U = NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub grid: Grid2,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub r: Vec<f64>,
    pub mask: Vec<bool>,
}

impl PotentialField {
    /// A hard potential only (`U = 0`, `R = 0`, nothing masked).
    pub fn hard(grid: Grid2, v: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if v.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("hard potential must be finite".into()));
        }
        let n = grid.len();
        Ok(Self {
            grid,
            v,
            u: vec![0.0; n],
            r: vec![0.0; n],
            mask: vec![false; n],
        })
    }

    pub fn hard_from_fn<F: Fn(f64, f64) -> f64>(grid: Grid2, f: F) -> Result<Self> {
        let mut v = Vec::with_capacity(grid.len());
        for i in 0..grid.n1 {
            for j in 0..grid.n2 {
                v.push(f(grid.q1(i), grid.q2(j)));
            }
        }
        Self::hard(grid, v)
    }

    pub fn zero(grid: Grid2) -> Result<Self> {
        Self::hard(grid, vec![0.0; grid.len()])
    }

    /// Replaces the hard part, keeping `U`, `R` and the mask.
    pub fn with_hard(mut self, v: Vec<f64>) -> Result<Self> {
        let hard = Self::hard(self.grid, v)?;
        self.v = hard.v;
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    pub grid: Grid2,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioPoint {
    pub pi1: f64,
    pub pi2: f64,
    pub q: (f64, f64),
    pub t: f64,
}

/// Split-step propagator for a fixed grid, potential and time step.
pub struct SplitStepper {
    grid: Grid2,
    half_potential: Vec<Complex64>,
    kinetic: Vec<Complex64>,
    fft1: (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>),
    fft2: (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>),
}

/// Angular wavenumber of FFT bin `m` on `n` points of spacing `dq`.
fn wavenumber(m: usize, n: usize, dq: f64) -> f64 {
    let signed = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    2.0 * PI * signed / (n as f64 * dq)
}

impl SplitStepper {
    pub fn new(grid: Grid2, hbar: f64, mass: f64, potential: &PotentialField, dt: f64) -> Result<Self> {
        grid.check_same(&potential.grid)?;
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be finite and non-zero, got {dt}")));
        }
        let half_potential = potential.v.iter().map(|&v| Complex64::from_polar(1.0, -0.5 * v * dt)).collect();
        let c = hbar * hbar / (2.0 * mass);
        let mut kinetic = Vec::with_capacity(grid.len());
        for m1 in 0..grid.n1 {
            let k1 = wavenumber(m1, grid.n1, grid.dq1);
            for m2 in 0..grid.n2 {
                let k2 = wavenumber(m2, grid.n2, grid.dq2);
                kinetic.push(Complex64::from_polar(1.0, -c * (k1 * k1 + k2 * k2) * dt));
            }
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            half_potential,
            kinetic,
            fft1: (planner.plan_fft_forward(grid.n1), planner.plan_fft_inverse(grid.n1)),
            fft2: (planner.plan_fft_forward(grid.n2), planner.plan_fft_inverse(grid.n2)),
        })
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let (n1, n2) = (self.grid.n1, self.grid.n2);
        let (f1, f2) = if forward {
            (&self.fft1.0, &self.fft2.0)
        } else {
            (&self.fft1.1, &self.fft2.1)
        };
        f2.process(data);
        let mut column = vec![Complex64::new(0.0, 0.0); n1];
        for j in 0..n2 {
            for i in 0..n1 {
                column[i] = data[i * n2 + j];
            }
            f1.process(&mut column);
            for i in 0..n1 {
                data[i * n2 + j] = column[i];
            }
        }
    }

    pub fn step(&self, psi: &mut WaveField) -> Result<()> {
        self.grid.check_same(&psi.grid)?;
        let scale = 1.0 / self.grid.len() as f64;
        let data = &mut psi.values;
        data.iter_mut().zip(&self.half_potential).for_each(|(z, p)| *z *= p);
        self.transform(data, true);
        data.iter_mut().zip(&self.kinetic).for_each(|(z, p)| *z *= p * scale);
        self.transform(data, false);
        data.iter_mut().zip(&self.half_potential).for_each(|(z, p)| *z *= p);
        Ok(())
    }
}

/// One Strang step of length `dt` (negative `dt` runs backwards).
pub fn schrodinger_step(psi: &WaveField, potential: &PotentialField, dt: f64) -> Result<WaveField> {
    let stepper = SplitStepper::new(psi.grid, psi.hbar, psi.mass, potential, dt)?;
    let mut out = psi.clone();
    stepper.step(&mut out)?;
    Ok(out)
}

/// `1e−6 · max R`.
pub fn default_r_floor(psi: &WaveField) -> f64 {
    1e-6 * psi.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Periodic centred second difference of a 1D sample.
fn second_difference(r: &[f64], dq: f64, i: usize) -> f64 {
    let n = r.len();
    (r[(i + 1) % n] - 2.0 * r[i] + r[(i + n - 1) % n]) / (dq * dq)
}

/// `−R″/R` for a 1D amplitude on a periodic grid.
pub fn quantum_potential_1d(r: &[f64], dq: f64) -> Vec<f64> {
    (0..r.len()).map(|i| -second_difference(r, dq, i) / r[i]).collect()
}

/// `U = −(1/R) Σⱼ ∂²R/∂qⱼ²` with nodes where `R < r_floor` masked. The
/// returned field has `V = 0`.
pub fn quantum_potential(psi: &WaveField, r_floor: f64) -> Result<PotentialField> {
    if !r_floor.is_finite() || r_floor <= 0.0 {
        return Err(Error::InvalidParameter(format!("r_floor must be finite and > 0, got {r_floor}")));
    }
    let g = psi.grid;
    let r = psi.amplitude();
    let (n1, n2) = (g.n1, g.n2);
    let mut u = vec![f64::NAN; g.len()];
    let mut mask = vec![false; g.len()];
    for i in 0..n1 {
        let (ip, im) = ((i + 1) % n1, (i + n1 - 1) % n1);
        for j in 0..n2 {
            let idx = g.index(i, j);
            if r[idx] < r_floor {
                mask[idx] = true;
                continue;
            }
            let (jp, jm) = ((j + 1) % n2, (j + n2 - 1) % n2);
            let d1 = (r[g.index(ip, j)] - 2.0 * r[idx] + r[g.index(im, j)]) / (g.dq1 * g.dq1);
            let d2 = (r[g.index(i, jp)] - 2.0 * r[idx] + r[g.index(i, jm)]) / (g.dq2 * g.dq2);
            u[idx] = -(d1 + d2) / r[idx];
        }
    }
    Ok(PotentialField {
        grid: g,
        v: vec![0.0; g.len()],
        u,
        r,
        mask,
    })
}

/// First derivative along one axis: centred inside, second-order one-sided
/// at the two ends. `None` when a stencil node is masked.
fn derivative(values: &dyn Fn(usize) -> Option<f64>, n: usize, h: f64, i: usize) -> Option<f64> {
    if i == 0 {
        Some((-3.0 * values(0)? + 4.0 * values(1)? - values(2)?) / (2.0 * h))
    } else if i == n - 1 {
        Some((3.0 * values(n - 1)? - 4.0 * values(n - 2)? + values(n - 3)?) / (2.0 * h))
    } else {
        Some((values(i + 1)? - values(i - 1)?) / (2.0 * h))
    }
}

fn negative_gradient(grid: &Grid2, field: &[f64], mask: &[bool]) -> ForceField {
    let value = |idx: usize| if mask[idx] { None } else { Some(field[idx]) };
    let n = grid.len();
    let (mut g1, mut g2, mut out_mask) = (vec![f64::NAN; n], vec![f64::NAN; n], vec![false; n]);
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            let idx = grid.index(i, j);
            let along1 = derivative(&|a| value(grid.index(a, j)), grid.n1, grid.dq1, i);
            let along2 = derivative(&|b| value(grid.index(i, b)), grid.n2, grid.dq2, j);
            match (mask[idx], along1, along2) {
                (false, Some(a), Some(b)) => {
                    g1[idx] = -a;
                    g2[idx] = -b;
                }
                _ => out_mask[idx] = true,
            }
        }
    }
    ForceField {
        grid: *grid,
        g1,
        g2,
        mask: out_mask,
    }
}

/// `gⱼ = −∂U/∂qⱼ`; masking spreads to every node whose stencil touches a
/// masked node.
pub fn mental_force(potential: &PotentialField) -> ForceField {
    negative_gradient(&potential.grid, &potential.u, &potential.mask)
}

/// `fⱼ = −∂V/∂qⱼ`.
pub fn hard_force(potential: &PotentialField) -> ForceField {
    negative_gradient(&potential.grid, &potential.v, &vec![false; potential.grid.len()])
}

/// Configuration trajectory along which the forces are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum QPath {
    Constant(f64, f64),
    /// `(t, q₁, q₂)` samples, linearly interpolated and held at the ends.
    Samples(Vec<(f64, f64, f64)>),
}

impl QPath {
    pub fn at(&self, t: f64) -> (f64, f64) {
        match self {
            QPath::Constant(a, b) => (*a, *b),
            QPath::Samples(s) => {
                let (_, a, b) = interpolate_samples(s, t);
                (a, b)
            }
        }
    }
}

fn interpolate_samples(s: &[(f64, f64, f64)], t: f64) -> (f64, f64, f64) {
    if t <= s[0].0 {
        return s[0];
    }
    let last = s[s.len() - 1];
    if t >= last.0 {
        return last;
    }
    let k = s.partition_point(|p| p.0 <= t) - 1;
    let (a, b) = (s[k], s[k + 1]);
    let f = (t - a.0) / (b.0 - a.0);
    (t, a.1 + f * (b.1 - a.1), a.2 + f * (b.2 - a.2))
}

/// Bilinear interpolation of both components.
fn bilinear(force: &ForceField, q1: f64, q2: f64, t: f64) -> Result<(f64, f64)> {
    let g = &force.grid;
    let x = (q1 - g.q1_min) / g.dq1;
    let y = (q2 - g.q2_min) / g.dq2;
    let outside = Error::PathOutsideGrid { t, q1, q2 };
    if !(x >= 0.0 && y >= 0.0 && x <= (g.n1 - 1) as f64 && y <= (g.n2 - 1) as f64) {
        return Err(outside);
    }
    let i = (x.floor() as usize).min(g.n1 - 2);
    let j = (y.floor() as usize).min(g.n2 - 2);
    let (fx, fy) = (x - i as f64, y - j as f64);
    let corners = [
        (g.index(i, j), (1.0 - fx) * (1.0 - fy)),
        (g.index(i + 1, j), fx * (1.0 - fy)),
        (g.index(i, j + 1), (1.0 - fx) * fy),
        (g.index(i + 1, j + 1), fx * fy),
    ];
    let (mut a, mut b) = (0.0, 0.0);
    for (idx, w) in corners {
        if w == 0.0 {
            continue;
        }
        if force.mask[idx] {
            return Err(Error::MaskedRegion { t, q1, q2 });
        }
        a += w * force.g1[idx];
        b += w * force.g2[idx];
    }
    Ok((a, b))
}

/// Integrates `π̇ⱼ = fⱼ + gⱼ` with classical RK4 along `path`. `u_frames` are
/// time-stamped quantum potentials (linear in time between frames, held at
/// the ends); an empty list means `U = 0`.
pub fn integrate_portfolio(
    pi0: (f64, f64),
    hard: &PotentialField,
    u_frames: &[(f64, PotentialField)],
    path: &QPath,
    t_grid: &[f64],
) -> Result<Vec<PortfolioPoint>> {
    crate::series::check_grid(t_grid)?;
    if let QPath::Samples(s) = path {
        if s.is_empty() || s.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter("path samples must be non-empty with increasing times".into()));
        }
    }
    if u_frames.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidParameter("potential frames must have increasing times".into()));
    }
    let f_hard = hard_force(hard);
    let mental: Vec<(f64, ForceField)> = u_frames
        .iter()
        .map(|(t, u)| hard.grid.check_same(&u.grid).map(|_| (*t, mental_force(u))))
        .collect::<Result<_>>()?;

    let rhs = |t: f64| -> Result<(f64, f64)> {
        let (q1, q2) = path.at(t);
        let (mut a, mut b) = bilinear(&f_hard, q1, q2, t)?;
        if !mental.is_empty() {
            let k = mental.partition_point(|m| m.0 <= t);
            let (g1, g2) = if k == 0 {
                bilinear(&mental[0].1, q1, q2, t)?
            } else if k == mental.len() {
                bilinear(&mental[k - 1].1, q1, q2, t)?
            } else {
                let (ta, fa) = (&mental[k - 1].0, &mental[k - 1].1);
                let (tb, fb) = (&mental[k].0, &mental[k].1);
                let w = (t - ta) / (tb - ta);
                let (a1, a2) = bilinear(fa, q1, q2, t)?;
                let (b1, b2) = bilinear(fb, q1, q2, t)?;
                (a1 + w * (b1 - a1), a2 + w * (b2 - a2))
            };
            a += g1;
            b += g2;
        }
        Ok((a, b))
    };

    let mut out = Vec::with_capacity(t_grid.len());
    let (mut p1, mut p2) = pi0;
    out.push(PortfolioPoint {
        pi1: p1,
        pi2: p2,
        q: path.at(t_grid[0]),
        t: t_grid[0],
    });
    rhs(t_grid[0])?;
    for w in t_grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        // The right-hand side does not depend on π, so the stages only sample time.
        let k1 = rhs(t)?;
        let k2 = rhs(t + 0.5 * h)?;
        let k4 = rhs(t + h)?;
        p1 += h / 6.0 * (k1.0 + 4.0 * k2.0 + k4.0);
        p2 += h / 6.0 * (k1.1 + 4.0 * k2.1 + k4.1);
        out.push(PortfolioPoint {
            pi1: p1,
            pi2: p2,
            q: path.at(w[1]),
            t: w[1],
        });
    }
    Ok(out)
}

/// Evolves `psi` for `n_steps` steps of `dt`, recording `U` every `every`
/// steps (and at the start) with the default floor.
pub fn evolve_quantum_potential(
    psi: &WaveField,
    hard: &PotentialField,
    dt: f64,
    n_steps: usize,
    every: usize,
) -> Result<(WaveField, Vec<(f64, PotentialField)>)> {
    if every == 0 {
        return Err(Error::InvalidParameter("frame interval must be ≥ 1".into()));
    }
    let stepper = SplitStepper::new(psi.grid, psi.hbar, psi.mass, hard, dt)?;
    let mut wave = psi.clone();
    let mut frames = vec![(0.0, quantum_potential(&wave, default_r_floor(&wave))?)];
    for s in 1..=n_steps {
        stepper.step(&mut wave)?;
        if s % every == 0 {
            frames.push((s as f64 * dt, quantum_potential(&wave, default_r_floor(&wave))?));
        }
    }
    Ok((wave, frames))
}
