//! Exact evolution of one trader's three bosonic modes on a fixed-number
//! Fock sector. Independent of the single-particle reduction used by
//! [`crate::closed_market`]: it builds the many-body Hamiltonian from ladder
//! operator matrix elements and diagonalises it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::closed_market::{MarketInit, TraderParams};
use crate::error::{Error, Result};
use crate::series::{check_grid, TimeSeries};

/// Mode indices of the single-trader block.
pub const SHARES: usize = 0;
pub const CASH: usize = 1;
pub const LOI: usize = 2;

/// All occupation tuples with a fixed total, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n_modes: usize,
    total_quanta: usize,
    states: Vec<Vec<usize>>,
}

fn enumerate(n_modes: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == n_modes {
        prefix.push(remaining);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for n in 0..=remaining {
        prefix.push(n);
        enumerate(n_modes, remaining - n, prefix, out);
        prefix.pop();
    }
}

impl SectorBasis {
    pub fn new(n_modes: usize, total_quanta: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParameter("sector needs at least one mode".into()));
        }
        let mut states = Vec::new();
        enumerate(n_modes, total_quanta, &mut Vec::with_capacity(n_modes), &mut states);
        Ok(Self {
            n_modes,
            total_quanta,
            states,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn total_quanta(&self) -> usize {
        self.total_quanta
    }

    pub fn states(&self) -> &[Vec<usize>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, state: &[usize]) -> Option<usize> {
        self.states.binary_search_by(|s| s.as_slice().cmp(state)).ok()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::ModeOutOfRange {
                index: mode,
                n_modes: self.n_modes,
            });
        }
        Ok(())
    }
}

pub fn build_sector_basis(n_modes: usize, total_quanta: usize) -> Result<SectorBasis> {
    SectorBasis::new(n_modes, total_quanta)
}

/// Dense Hermitian matrix in the ordering of a [`SectorBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    pub entries: DMatrix<Complex64>,
}

impl HermitianOperator {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    /// `max |H − H†|` entrywise.
    pub fn hermiticity_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Matrix of `a†_to a_from` on the sector: entry `⟨n'|·|n⟩ = √((n_to + 1) n_from)`.
pub fn hop_matrix(basis: &SectorBasis, from_mode: usize, to_mode: usize) -> Result<DMatrix<Complex64>> {
    basis.check_mode(from_mode)?;
    basis.check_mode(to_mode)?;
    if from_mode == to_mode {
        return Err(Error::InvalidParameter("hop needs distinct modes".into()));
    }
    let dim = basis.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (col, state) in basis.states().iter().enumerate() {
        let n_from = state[from_mode];
        if n_from == 0 {
            continue;
        }
        let n_to = state[to_mode];
        let mut target = state.clone();
        target[from_mode] -= 1;
        target[to_mode] += 1;
        let row = basis
            .index_of(&target)
            .expect("hopping preserves the total number of quanta");
        m[(row, col)] = Complex64::new((((n_to + 1) * n_from) as f64).sqrt(), 0.0);
    }
    Ok(m)
}

/// `ωˢ n_s + ωᶜ n_c + Ω n_i + λ (i (s† + c†) + h.c.)` on a three-mode sector.
pub fn assemble_model1_hamiltonian(p: &TraderParams, basis: &SectorBasis) -> Result<HermitianOperator> {
    if basis.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: basis.n_modes(),
        });
    }
    p.validate()?;
    let dim = basis.len();
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    for (k, state) in basis.states().iter().enumerate() {
        let diag = p.omega_s * state[SHARES] as f64 + p.omega_c * state[CASH] as f64 + p.omega_loi * state[LOI] as f64;
        h[(k, k)] = Complex64::new(diag, 0.0);
    }
    if p.lambda_inf != 0.0 {
        let to_shares = hop_matrix(basis, LOI, SHARES)?;
        let to_cash = hop_matrix(basis, LOI, CASH)?;
        let hop = (&to_shares + &to_cash) * Complex64::new(p.lambda_inf, 0.0);
        h += &hop + hop.adjoint();
    }
    Ok(HermitianOperator { entries: h })
}

/// Eigendecomposition `H = Q Λ Q†` with its residual certified.
#[derive(Debug, Clone)]
pub struct SectorEvolution {
    values: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl SectorEvolution {
    pub fn new(h: &HermitianOperator) -> Result<Self> {
        let eig = h.entries.clone().symmetric_eigen();
        let lambda = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| Complex64::new(x, 0.0)));
        let residual = (&h.entries * &eig.eigenvectors - &eig.eigenvectors * lambda)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if residual > 1e-8 {
            return Err(Error::Eigendecomposition {
                residual,
                tolerance: 1e-8,
            });
        }
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// `e^{−iHt} ψ0`.
    pub fn evolve(&self, psi0: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let coeffs = self.vectors.adjoint() * psi0;
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(self.values.iter())
                .map(|(c, &e)| c * Complex64::from_polar(1.0, -e * t)),
        );
        &self.vectors * phased
    }
}

/// Expected mode occupations of a sector state vector, plus its norm².
pub fn mode_occupations(basis: &SectorBasis, psi: &DVector<Complex64>) -> (Vec<f64>, f64) {
    let mut occ = vec![0.0; basis.n_modes()];
    let mut norm = 0.0;
    for (state, amp) in basis.states().iter().zip(psi.iter()) {
        let p = amp.norm_sqr();
        norm += p;
        for (o, &n) in occ.iter_mut().zip(state) {
            *o += p * n as f64;
        }
    }
    (occ, norm)
}

/// Exact `⟨n_s⟩, ⟨n_c⟩, ⟨n_i⟩` starting from a basis state.
pub fn evolve_occupations_exact(
    h: &HermitianOperator,
    basis: &SectorBasis,
    initial_state: &[usize],
    t_grid: &[f64],
) -> Result<TimeSeries> {
    check_grid(t_grid)?;
    if h.dimension() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            got: h.dimension(),
        });
    }
    if basis.n_modes() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: basis.n_modes(),
        });
    }
    let start = basis
        .index_of(initial_state)
        .ok_or_else(|| Error::StateNotInBasis(initial_state.to_vec()))?;
    let evo = SectorEvolution::new(h)?;
    let mut psi0 = DVector::zeros(basis.len());
    psi0[start] = Complex64::new(1.0, 0.0);
    let mut series = TimeSeries::with_capacity(t_grid.len());
    for &t in t_grid {
        let (occ, _) = mode_occupations(basis, &evo.evolve(&psi0, t));
        series.push(t, occ[SHARES], occ[CASH], occ[LOI], occ.iter().sum());
    }
    Ok(series)
}

/// Fock-sector occupations for a trader starting in `init`.
pub fn exact_series(p: &TraderParams, init: &MarketInit, t_grid: &[f64]) -> Result<TimeSeries> {
    let basis = SectorBasis::new(3, init.total() as usize)?;
    let h = assemble_model1_hamiltonian(p, &basis)?;
    let state = [init.shares as usize, init.cash as usize, init.loi as usize];
    evolve_occupations_exact(&h, &basis, &state, t_grid)
}
