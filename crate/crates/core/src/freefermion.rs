//! Non-interacting (`V = 0`) dynamics through the one-body correlation
//! matrix `G_ij = ⟨a†_i a_j⟩`, with Wick reconstruction of two-site
//! density matrices and block entropies.

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::model::{field_profile, ModelParams};
use crate::observables::TwoSiteRdm;

/// Largest pair distance supported by the Jordan-Wigner expansion.
pub const MAX_PAIR_DISTANCE: usize = 2;

/// Tridiagonal hopping matrix `h` with its cached eigendecomposition.
#[derive(Clone, Debug)]
pub struct SingleParticleHamiltonian {
    h: DMatrix<f64>,
    energies: Vec<f64>,
    modes: DMatrix<f64>,
}

impl SingleParticleHamiltonian {
    /// Builds `h_{j,j} = Δ cos(2πβj + φ)`, `h_{j,j±1} = -J`. Requires `V = 0`.
    pub fn from_params(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if params.interaction != 0.0 {
            return Err(Error::invalid(format!(
                "free-fermion evolution requires V = 0, got V = {}",
                params.interaction
            )));
        }
        let l = params.sites;
        let field = field_profile(params);
        let h = DMatrix::from_fn(l, l, |r, c| {
            if r == c {
                field[r]
            } else if r.abs_diff(c) == 1 {
                -params.hopping
            } else {
                0.0
            }
        });
        Self::from_matrix(h)
    }

    pub fn from_matrix(h: DMatrix<f64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::invalid("single-particle Hamiltonian must be square"));
        }
        if (&h - h.transpose()).amax() > 0.0 {
            return Err(Error::invalid("single-particle Hamiltonian must be symmetric"));
        }
        let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("single-particle eigensolver failed".into()))?;
        Ok(SingleParticleHamiltonian {
            h,
            energies: eig.eigenvalues.iter().copied().collect(),
            modes: eig.eigenvectors,
        })
    }

    pub fn sites(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// `W = e^{+iht}`.
    fn forward(&self, t: f64) -> DMatrix<Complex64> {
        let l = self.sites();
        let q = &self.modes;
        let phases: Vec<Complex64> = self
            .energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, e * t))
            .collect();
        DMatrix::from_fn(l, l, |r, c| {
            (0..l)
                .map(|k| phases[k] * (q[(r, k)] * q[(c, k)]))
                .sum::<Complex64>()
        })
    }
}

/// One-body correlation matrix `G_ij = ⟨a†_i a_j⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix(DMatrix<Complex64>);

impl CorrelationMatrix {
    pub fn from_matrix(g: DMatrix<Complex64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::invalid("correlation matrix must be square"));
        }
        Ok(CorrelationMatrix(g))
    }

    pub fn sites(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    /// `G_ij` with 1-based site labels.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i - 1, j - 1)]
    }

    pub fn occupation(&self, j: usize) -> f64 {
        self.get(j, j).re
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    /// `⟨S^z_j⟩ = ⟨n_j⟩ - 1/2` for every site.
    pub fn magnetization_profile(&self) -> Vec<f64> {
        (0..self.sites()).map(|k| self.0[(k, k)].re - 0.5).collect()
    }
}

/// Néel Slater determinant: occupations `1, 0, 1, 0, …` starting at site 1.
pub fn neel_correlations(sites: usize) -> Result<CorrelationMatrix> {
    if sites == 0 || !sites.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Néel correlations need an even site count, got {sites}"
        )));
    }
    Ok(CorrelationMatrix(DMatrix::from_fn(sites, sites, |r, c| {
        if r == c && r % 2 == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })))
}

/// `G(t) = W G₀ W†` with `W = e^{+iht}`.
pub fn evolve_correlations(
    g0: &CorrelationMatrix,
    h: &SingleParticleHamiltonian,
    t: f64,
) -> Result<CorrelationMatrix> {
    if g0.sites() != h.sites() {
        return Err(Error::invalid(format!(
            "correlation matrix is {}x{}, Hamiltonian is {}x{}",
            g0.sites(),
            g0.sites(),
            h.sites(),
            h.sites()
        )));
    }
    if t == 0.0 {
        return Ok(g0.clone());
    }
    let w = h.forward(t);
    Ok(CorrelationMatrix(&w * &g0.0 * w.adjoint()))
}

/// Two-site density matrix for sites `i < j` (1-based, `j - i <= 2`).
///
/// The coherence is `⟨S⁻_i S⁺_j⟩`; after Jordan-Wigner this is
/// `⟨a†_j a_i⟩` for neighbours and `⟨a†_j (1 - 2n_{i+1}) a_i⟩` at
/// distance two, the latter expanded by Wick's theorem.
pub fn rdm_from_correlations(g: &CorrelationMatrix, i: usize, j: usize) -> Result<TwoSiteRdm> {
    let l = g.sites();
    for s in [i, j] {
        if s == 0 || s > l {
            return Err(Error::Index { index: s, len: l });
        }
    }
    if i >= j {
        return Err(Error::invalid(format!("pair ({i}, {j}) must have i < j")));
    }
    let r = j - i;
    if r > MAX_PAIR_DISTANCE {
        return Err(Error::UnsupportedRange {
            distance: r,
            max: MAX_PAIR_DISTANCE,
        });
    }
    let ni = g.occupation(i);
    let nj = g.occupation(j);
    let p_uu = ni * nj - g.get(i, j).norm_sqr();
    let p_ud = ni - p_uu;
    let p_du = nj - p_uu;
    let p_dd = 1.0 - ni - nj + p_uu;
    let coherence = if r == 1 {
        g.get(j, i)
    } else {
        let k = i + 1;
        g.get(j, i) * (1.0 - 2.0 * g.get(k, k)) + 2.0 * g.get(j, k) * g.get(k, i)
    };
    TwoSiteRdm::from_blocks(p_uu, p_ud, p_du, p_dd, coherence)
}

/// Entanglement entropy (nats) of a contiguous block of sites (1-based,
/// inclusive).
pub fn block_entropy_from_correlations(
    g: &CorrelationMatrix,
    block: RangeInclusive<usize>,
) -> Result<f64> {
    let (lo, hi) = (*block.start(), *block.end());
    if block.is_empty() {
        return Err(Error::invalid("empty block"));
    }
    if lo == 0 || hi > g.sites() {
        return Err(Error::Index {
            index: if lo == 0 { lo } else { hi },
            len: g.sites(),
        });
    }
    let sub = g.0.view((lo - 1, lo - 1), (hi - lo + 1, hi - lo + 1)).into_owned();
    let nus = hermitian_eigenvalues(sub)?;
    Ok(fermionic_entropy(&nus))
}

/// `-Σ [ν ln ν + (1-ν) ln(1-ν)]` over restricted occupations.
pub fn fermionic_entropy(nus: &[f64]) -> f64 {
    let h = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    nus.iter()
        .map(|&nu| {
            let nu = nu.clamp(0.0, 1.0);
            h(nu) + h(1.0 - nu)
        })
        .sum()
}
