//! Eigendecomposition of real symmetric arrowhead matrices
//!
//! ```text
//!     [ a   z1  z2  ...  zn ]
//!     [ z1  d1              ]
//! T = [ z2      d2          ]
//!     [ ...          ...    ]
//!     [ zn              dn  ]
//! ```
//!
//! Every single-particle Hamiltonian of the reservoir models has this shape:
//! one hub mode coupled to a set of otherwise free modes. The eigenvalues are
//! the roots of the secular function `x − a − Σ zj²/(x − dj)`, one in each gap
//! between consecutive poles plus one on each side. Each root is stored as an
//! offset from its nearest pole so that the differences `λ − dj` used by the
//! eigenvectors keep full relative accuracy, and the couplings are recomputed
//! from the roots (Löwner) which makes the eigenvectors orthogonal to working
//! precision. Cost is O(n²) time and O(n) storage.
//!
//! Spokes with vanishing coupling and groups of (numerically) equal poles are
//! deflated before the secular solve.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Index 0 of the matrix is the hub; index `j + 1` is spoke `j`.
#[derive(Debug, Clone)]
pub struct Arrowhead {
    pub hub: f64,
    /// `(diagonal, coupling)` per spoke.
    pub spokes: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
struct Root {
    pole: usize,
    shift: f64,
}

#[derive(Debug, Clone)]
struct Deflated {
    value: f64,
    vector: Vec<(usize, f64)>,
}

/// Where an original spoke lives in the reduced problem.
#[derive(Debug, Clone, Default)]
struct SpokeMap {
    reduced: Option<(usize, f64)>,
    deflated: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct ArrowEigen {
    dim: usize,
    poles: Vec<f64>,
    couplings: Vec<f64>,
    roots: Vec<Root>,
    hub_only: Option<f64>,
    inv_norms: Vec<f64>,
    deflated: Vec<Deflated>,
    spoke_map: Vec<SpokeMap>,
    values: Vec<f64>,
    residual: f64,
}

impl Arrowhead {
    pub fn dim(&self) -> usize {
        self.spokes.len() + 1
    }

    fn scale(&self) -> f64 {
        let znorm = self.spokes.iter().map(|s| s.1 * s.1).sum::<f64>().sqrt();
        self.spokes
            .iter()
            .map(|s| s.0.abs())
            .fold(self.hub.abs(), f64::max)
            .max(znorm)
            .max(f64::MIN_POSITIVE)
    }

    /// `T·v` for a dense vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        out[0] = self.hub * v[0];
        for (j, &(d, z)) in self.spokes.iter().enumerate() {
            out[0] += z * v[j + 1];
            out[j + 1] = z * v[0] + d * v[j + 1];
        }
        out
    }

    pub fn eigen(&self) -> Result<ArrowEigen> {
        ArrowEigen::new(self)
    }
}

impl ArrowEigen {
    fn new(arrow: &Arrowhead) -> Result<Self> {
        for &(d, z) in &arrow.spokes {
            if !d.is_finite() || !z.is_finite() {
                return Err(Error::InvalidParameter("non-finite arrowhead entry".into()));
            }
        }
        if !arrow.hub.is_finite() {
            return Err(Error::InvalidParameter("non-finite arrowhead hub".into()));
        }
        let scale = arrow.scale();
        let tol = 64.0 * f64::EPSILON * scale;
        let n_spokes = arrow.spokes.len();
        let mut spoke_map = vec![SpokeMap::default(); n_spokes];
        let mut deflated = Vec::new();

        // Zero couplings decouple their spoke entirely.
        let mut live: Vec<usize> = Vec::with_capacity(n_spokes);
        for (j, &(d, z)) in arrow.spokes.iter().enumerate() {
            if z.abs() <= tol {
                spoke_map[j].deflated.push((deflated.len(), 1.0));
                deflated.push(Deflated {
                    value: d,
                    vector: vec![(j + 1, 1.0)],
                });
            } else {
                live.push(j);
            }
        }
        live.sort_by(|&a, &b| arrow.spokes[a].0.total_cmp(&arrow.spokes[b].0));

        // Merge groups of equal poles by successive rotations: one combined
        // spoke stays coupled, the orthogonal complement is exact eigenvectors.
        let mut poles = Vec::new();
        let mut couplings = Vec::new();
        let mut i = 0;
        while i < live.len() {
            let mut k = i + 1;
            while k < live.len() && arrow.spokes[live[k]].0 - arrow.spokes[live[i]].0 <= tol {
                k += 1;
            }
            let group = &live[i..k];
            let reduced = poles.len();
            let first = group[0];
            let mut u: Vec<(usize, f64)> = vec![(first, 1.0)];
            let mut r = arrow.spokes[first].1;
            let d_group = group.iter().map(|&g| arrow.spokes[g].0).sum::<f64>() / group.len() as f64;
            for &g in &group[1..] {
                let zg = arrow.spokes[g].1;
                let rn = r.hypot(zg);
                let mut w: Vec<(usize, f64)> = u.iter().map(|&(idx, c)| (idx, -zg * c / rn)).collect();
                w.push((g, r / rn));
                let mut un: Vec<(usize, f64)> = u.iter().map(|&(idx, c)| (idx, r * c / rn)).collect();
                un.push((g, zg / rn));
                u = un;
                r = rn;
                let di = deflated.len();
                for &(idx, c) in &w {
                    spoke_map[idx].deflated.push((di, c));
                }
                deflated.push(Deflated {
                    value: d_group,
                    vector: w.into_iter().map(|(idx, c)| (idx + 1, c)).collect(),
                });
            }
            for &(idx, c) in &u {
                spoke_map[idx].reduced = Some((reduced, c));
            }
            poles.push(d_group);
            couplings.push(r);
            i = k;
        }

        let mut eig = ArrowEigen {
            dim: arrow.dim(),
            poles,
            couplings,
            roots: Vec::new(),
            hub_only: None,
            inv_norms: Vec::new(),
            deflated,
            spoke_map,
            values: Vec::new(),
            residual: 0.0,
        };
        if eig.poles.is_empty() {
            eig.hub_only = Some(arrow.hub);
            eig.inv_norms.push(1.0);
        } else {
            eig.solve_secular(arrow.hub);
            eig.recompute_couplings();
            eig.normalise();
        }
        eig.values = (0..eig.dim).map(|m| eig.value(m)).collect();
        eig.residual = eig.max_residual(arrow);
        let limit = 1e-10 * scale.max(1.0);
        if eig.residual > limit {
            return Err(Error::Eigendecomposition {
                residual: eig.residual,
                tolerance: limit,
            });
        }
        Ok(eig)
    }

    fn n_roots(&self) -> usize {
        if self.hub_only.is_some() {
            1
        } else {
            self.poles.len() + 1
        }
    }

    fn solve_secular(&mut self, hub: f64) {
        let r = self.poles.len();
        let znorm = self.couplings.iter().map(|z| z * z).sum::<f64>().sqrt();
        let lower = hub.min(self.poles[0]) - znorm;
        let upper = hub.max(self.poles[r - 1]) + znorm;
        let mut roots = Vec::with_capacity(r + 1);
        for m in 0..=r {
            let (pole, lo, hi) = if m == 0 {
                (0, lower - self.poles[0], 0.0)
            } else if m == r {
                (r - 1, 0.0, upper - self.poles[r - 1])
            } else {
                let (a, b) = (self.poles[m - 1], self.poles[m]);
                let mid = 0.5 * (a + b);
                let (g, _, _) = self.secular(hub, m - 1, mid - a);
                if g >= 0.0 {
                    (m - 1, 0.0, mid - a)
                } else {
                    (m, mid - b, 0.0)
                }
            };
            let shift = self.solve_root(hub, pole, lo, hi);
            roots.push(Root { pole, shift });
        }
        self.roots = roots;
    }

    /// Secular function at `x = poles[p] + tau`, split as
    /// `tau − zp²/tau + psi(tau)`. Returns `(g, psi, psi')`.
    fn secular(&self, hub: f64, p: usize, tau: f64) -> (f64, f64, f64) {
        let dp = self.poles[p];
        let mut psi = dp - hub;
        let mut dpsi = 0.0;
        for (j, (&dj, &zj)) in self.poles.iter().zip(&self.couplings).enumerate() {
            if j == p {
                continue;
            }
            let den = (dp - dj) + tau;
            let w = zj * zj / den;
            psi -= w;
            dpsi += w / den;
        }
        let zp = self.couplings[p];
        (tau - zp * zp / tau + psi, psi, dpsi)
    }

    fn solve_root(&self, hub: f64, p: usize, mut lo: f64, mut hi: f64) -> f64 {
        let zp2 = self.couplings[p] * self.couplings[p];
        let positive = lo >= 0.0;
        let mut tau = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (g, psi, dpsi) = self.secular(hub, p, tau);
            if g == 0.0 {
                return tau;
            }
            if g < 0.0 {
                lo = tau;
            } else {
                hi = tau;
            }
            // Local model: tau − zp²/tau + psi_k + psi'_k (tau − tau_k) = 0.
            let a = 1.0 + dpsi;
            let b = psi - dpsi * tau;
            let c = -zp2;
            let disc = (b * b - 4.0 * a * c).max(0.0).sqrt();
            let (plus, minus) = if b >= 0.0 {
                let minus = (-b - disc) / (2.0 * a);
                (if minus != 0.0 { c / (a * minus) } else { 0.0 }, minus)
            } else {
                let plus = (-b + disc) / (2.0 * a);
                (plus, if plus != 0.0 { c / (a * plus) } else { 0.0 })
            };
            let mut next = if positive { plus } else { minus };
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let done = (next - tau).abs() <= 2.0 * f64::EPSILON * next.abs()
                || (hi - lo) <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs());
            tau = next;
            if done {
                break;
            }
        }
        tau
    }

    fn gap(&self, m: usize, j: usize) -> f64 {
        let root = self.roots[m];
        (self.poles[root.pole] - self.poles[j]) + root.shift
    }

    fn recompute_couplings(&mut self) {
        let r = self.poles.len();
        let mut fresh = Vec::with_capacity(r);
        for j in 0..r {
            let dj = self.poles[j];
            let mut prod = self.gap(0, j).abs() * self.gap(r, j).abs();
            for i in 0..j {
                prod *= self.gap(i + 1, j).abs() / (self.poles[i] - dj).abs();
            }
            for i in j + 1..r {
                prod *= self.gap(i, j).abs() / (self.poles[i] - dj).abs();
            }
            fresh.push(prod.sqrt().copysign(self.couplings[j]));
        }
        self.couplings = fresh;
    }

    fn normalise(&mut self) {
        let r = self.poles.len();
        self.inv_norms = (0..=r)
            .map(|m| {
                let s: f64 = (0..r)
                    .map(|j| {
                        let y = self.couplings[j] / self.gap(m, j);
                        y * y
                    })
                    .sum();
                1.0 / (1.0 + s).sqrt()
            })
            .collect();
    }

    fn value(&self, m: usize) -> f64 {
        let nr = self.n_roots();
        if m < nr {
            match self.hub_only {
                Some(v) => v,
                None => self.poles[self.roots[m].pole] + self.roots[m].shift,
            }
        } else {
            self.deflated[m - nr].value
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvalues; the ordering matches [`ArrowEigen::row`].
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest `‖T v − λ v‖∞` over all eigenpairs against the input matrix.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Components of every eigenvector on basis index `a`.
    pub fn row(&self, a: usize) -> Vec<f64> {
        assert!(a < self.dim, "basis index out of range");
        let nr = self.n_roots();
        let mut out = vec![0.0; self.dim];
        if a == 0 {
            out[..nr].copy_from_slice(&self.inv_norms);
            return out;
        }
        let map = &self.spoke_map[a - 1];
        if let Some((j, c)) = map.reduced {
            for m in 0..nr {
                out[m] = c * self.couplings[j] / self.gap(m, j) * self.inv_norms[m];
            }
        }
        for &(di, c) in &map.deflated {
            out[nr + di] = c;
        }
        out
    }

    /// `Q·c` for coefficients indexed like [`ArrowEigen::values`], without
    /// forming `Q`. O(n²).
    pub fn synthesize(&self, c: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(c.len(), self.dim, "coefficient length");
        let nr = self.n_roots();
        let zero = Complex64::new(0.0, 0.0);
        let w: Vec<Complex64> = (0..nr).map(|m| c[m] * self.inv_norms[m]).collect();
        let reduced: Vec<Complex64> = (0..self.poles.len())
            .map(|j| {
                let acc = (0..nr).fold(zero, |acc, m| acc + w[m] / self.gap(m, j));
                acc * self.couplings[j]
            })
            .collect();
        let mut out = vec![zero; self.dim];
        out[0] = w.iter().sum();
        for (a, map) in self.spoke_map.iter().enumerate() {
            let mut y = zero;
            if let Some((j, cc)) = map.reduced {
                y += reduced[j] * cc;
            }
            for &(di, cc) in &map.deflated {
                y += c[nr + di] * cc;
            }
            out[a + 1] = y;
        }
        out
    }

    /// Column `b` of `V(t) = Q e^{−iΛt} Qᵀ`.
    pub fn propagator_column(&self, b: usize, t: f64) -> Vec<Complex64> {
        let coeffs: Vec<Complex64> = self
            .row(b)
            .iter()
            .zip(&self.values)
            .map(|(&q, &l)| Complex64::from_polar(q, -l * t))
            .collect();
        self.synthesize(&coeffs)
    }

    /// Dense eigenvector matrix (columns are eigenvectors). Small systems only.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|a| self.row(a)).collect()
    }

    fn max_residual(&self, arrow: &Arrowhead) -> f64 {
        let nr = self.n_roots();
        let mut worst = 0.0f64;
        for m in 0..nr {
            let v: Vec<f64> = (0..self.dim).map(|a| self.component(a, m)).collect();
            let tv = arrow.apply(&v);
            let lam = self.values[m];
            for (x, y) in tv.iter().zip(&v) {
                worst = worst.max((x - lam * y).abs());
            }
        }
        for (k, d) in self.deflated.iter().enumerate() {
            let mut v = vec![0.0; self.dim];
            for &(idx, c) in &d.vector {
                v[idx] = c;
            }
            let tv = arrow.apply(&v);
            let lam = self.values[nr + k];
            for (x, y) in tv.iter().zip(&v) {
                worst = worst.max((x - lam * y).abs());
            }
        }
        worst
    }

    fn component(&self, a: usize, m: usize) -> f64 {
        if a == 0 {
            return self.inv_norms[m];
        }
        match self.spoke_map[a - 1].reduced {
            Some((j, c)) => c * self.couplings[j] / self.gap(m, j) * self.inv_norms[m],
            None => 0.0,
        }
    }
}

/// Time-evolution helper: `V(t) = Q e^{−iΛt} Qᵀ` restricted to a few rows.
#[derive(Debug, Clone)]
pub struct Evolution<'a> {
    eig: &'a ArrowEigen,
}

impl<'a> Evolution<'a> {
    pub fn new(eig: &'a ArrowEigen) -> Self {
        Self { eig }
    }

    pub fn phases(&self, t: f64) -> Vec<Complex64> {
        self.eig
            .values()
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect()
    }

    /// `V_ab(t)` from precomputed rows and phases.
    pub fn amplitude(row_a: &[f64], row_b: &[f64], phases: &[Complex64]) -> Complex64 {
        row_a
            .iter()
            .zip(row_b)
            .zip(phases)
            .fold(Complex64::new(0.0, 0.0), |acc, ((x, y), p)| acc + p * (x * y))
    }
}
