//! Real-time propagation `|ψ(t)⟩ = e^{-iHt}|ψ₀⟩` with short-iteration
//! Lanczos steps, and dense spectra for small sectors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SectorBasis, SectorState, SparseHamiltonian};

/// Largest dimension accepted by [`dense_spectrum`].
pub const DENSE_LIMIT: usize = 3000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    /// Largest time increment taken by a single Krylov step.
    pub dt: f64,
    /// Maximum Krylov subspace dimension.
    pub m: usize,
    /// Local error tolerance per step.
    pub tol: f64,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        KrylovConfig {
            dt: 0.05,
            m: 30,
            tol: 1e-10,
        }
    }
}

impl KrylovConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::invalid("Krylov dt must be positive"));
        }
        if self.m < 2 {
            return Err(Error::invalid("Krylov dimension must be at least 2"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("Krylov tolerance must be positive"));
        }
        Ok(())
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Reusable Lanczos workspace for one Hamiltonian.
struct Lanczos<'a> {
    h: &'a SparseHamiltonian,
    cfg: KrylovConfig,
    m: usize,
    basis: Vec<Vec<Complex64>>,
    work: Vec<Complex64>,
    breakdown: f64,
}

impl<'a> Lanczos<'a> {
    fn new(h: &'a SparseHamiltonian, cfg: KrylovConfig) -> Self {
        let dim = h.dim();
        let m = cfg.m.min(dim).max(1);
        Lanczos {
            h,
            cfg,
            m,
            basis: Vec::with_capacity(m),
            work: vec![Complex64::new(0.0, 0.0); dim],
            breakdown: 1e-12 * h.norm_bound().max(1.0),
        }
    }

    /// Advances `psi` by as much of `tau` as the tolerance allows, returning
    /// the time actually covered (same sign as `tau`).
    fn step(&mut self, psi: &mut [Complex64], tau: f64) -> Result<f64> {
        let beta0 = norm(psi);
        if beta0 == 0.0 {
            return Ok(tau);
        }
        self.basis.clear();
        self.basis.push(psi.iter().map(|x| x / beta0).collect());
        let mut alpha: Vec<f64> = Vec::with_capacity(self.m);
        let mut beta: Vec<f64> = Vec::with_capacity(self.m);

        loop {
            let k = self.basis.len();
            self.h.apply(&self.basis[k - 1], &mut self.work);
            let a = dot(&self.basis[k - 1], &self.work).re;
            alpha.push(a);
            for (w, v) in self.work.iter_mut().zip(&self.basis[k - 1]) {
                *w -= v * a;
            }
            if k >= 2 {
                let b = beta[k - 2];
                for (w, v) in self.work.iter_mut().zip(&self.basis[k - 2]) {
                    *w -= v * b;
                }
            }
            let b_next = norm(&self.work);

            if b_next < self.breakdown {
                // Exact invariant subspace: the step is exact for any tau.
                let y = exp_tridiagonal(&alpha, &beta, tau)?;
                self.combine(psi, beta0, &y);
                return Ok(tau);
            }

            let y = exp_tridiagonal(&alpha, &beta, tau)?;
            let err = beta0 * b_next * y[k - 1].norm();
            if err <= self.cfg.tol {
                self.combine(psi, beta0, &y);
                return Ok(tau);
            }
            if k == self.m {
                // Subspace exhausted: shrink the step until the estimate passes.
                let mut t = tau;
                for _ in 0..60 {
                    t *= 0.5;
                    let y = exp_tridiagonal(&alpha, &beta, t)?;
                    if beta0 * b_next * y[k - 1].norm() <= self.cfg.tol {
                        self.combine(psi, beta0, &y);
                        return Ok(t);
                    }
                }
                return Err(Error::Numerical(
                    "Krylov step failed to reach tolerance".into(),
                ));
            }
            beta.push(b_next);
            let next: Vec<Complex64> = self.work.iter().map(|x| x / b_next).collect();
            self.basis.push(next);
        }
    }

    fn combine(&self, psi: &mut [Complex64], beta0: f64, y: &[Complex64]) {
        psi.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (v, &c) in self.basis.iter().zip(y) {
            let c = c * beta0;
            for (p, x) in psi.iter_mut().zip(v) {
                *p += x * c;
            }
        }
    }

    fn advance(&mut self, psi: &mut [Complex64], duration: f64) -> Result<()> {
        let sign = duration.signum();
        let mut left = duration.abs();
        while left > 0.0 {
            let tau = left.min(self.cfg.dt);
            let done = self.step(psi, sign * tau)?.abs();
            left -= done;
            if left < 1e-14 * duration.abs().max(1.0) {
                break;
            }
        }
        Ok(())
    }
}

/// `e^{-iTτ} e₁` for the symmetric tridiagonal `T` with diagonal `alpha`
/// and off-diagonal `beta` (length `alpha.len() - 1` or more).
fn exp_tridiagonal(alpha: &[f64], beta: &[f64], tau: f64) -> Result<Vec<Complex64>> {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::try_new(t, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("tridiagonal eigensolver did not converge".into()))?;
    let q = &eig.eigenvectors;
    let mut y = vec![Complex64::new(0.0, 0.0); k];
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(q[(0, j)], -lam * tau);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += phase * q[(i, j)];
        }
    }
    Ok(y)
}

/// Propagates `psi` by a signed time `tau`.
pub fn propagate(
    h: &SparseHamiltonian,
    psi: &SectorState,
    tau: f64,
    cfg: &KrylovConfig,
) -> Result<SectorState> {
    cfg.validate()?;
    check_dims(h, psi)?;
    let mut amps = psi.amplitudes().to_vec();
    Lanczos::new(h, *cfg).advance(&mut amps, tau)?;
    Ok(SectorState::from_raw(Arc::clone(psi.basis()), amps))
}

fn check_dims(h: &SparseHamiltonian, psi: &SectorState) -> Result<()> {
    if h.dim() != psi.amplitudes().len() {
        return Err(Error::invalid(format!(
            "Hamiltonian dimension {} does not match state dimension {}",
            h.dim(),
            psi.amplitudes().len()
        )));
    }
    Ok(())
}

/// Lazily evaluated trajectory on a time grid; yields `(t, ψ(t))`.
pub struct Evolution<'a> {
    lanczos: Lanczos<'a>,
    basis: Arc<SectorBasis>,
    psi: Vec<Complex64>,
    now: f64,
    times: std::vec::IntoIter<f64>,
}

impl Iterator for Evolution<'_> {
    type Item = Result<(f64, SectorState)>;

    fn next(&mut self) -> Option<Self::Item> {
        let t = self.times.next()?;
        if t > self.now {
            if let Err(e) = self.lanczos.advance(&mut self.psi, t - self.now) {
                return Some(Err(e));
            }
            self.now = t;
        }
        Some(Ok((
            t,
            SectorState::from_raw(Arc::clone(&self.basis), self.psi.clone()),
        )))
    }
}

/// Evolves `psi0` (taken as the state at `t = 0`) through an ascending grid
/// of non-negative times.
pub fn evolve<'a>(
    h: &'a SparseHamiltonian,
    psi0: &SectorState,
    times: &[f64],
    cfg: &KrylovConfig,
) -> Result<Evolution<'a>> {
    cfg.validate()?;
    check_dims(h, psi0)?;
    if times.iter().any(|t| !t.is_finite()) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid("time grid must be finite and start at t >= 0"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid must be strictly ascending"));
    }
    Ok(Evolution {
        lanczos: Lanczos::new(h, *cfg),
        basis: Arc::clone(psi0.basis()),
        psi: psi0.amplitudes().to_vec(),
        now: 0.0,
        times: times.to_vec().into_iter(),
    })
}

/// Eigenvalues in ascending order with optional eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct DenseSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
}

impl DenseSpectrum {
    /// `e^{-iHt}ψ` through the stored eigenbasis.
    pub fn propagate(&self, psi: &[Complex64], t: f64) -> Option<Vec<Complex64>> {
        let q = self.eigenvectors.as_ref()?;
        let n = psi.len();
        let mut coeff = vec![Complex64::new(0.0, 0.0); n];
        for (j, c) in coeff.iter_mut().enumerate() {
            let overlap: Complex64 = (0..n).map(|i| psi[i] * q[(i, j)]).sum();
            *c = overlap * Complex64::from_polar(1.0, -self.eigenvalues[j] * t);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, c) in coeff.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += c * q[(i, j)];
            }
        }
        Some(out)
    }
}

pub fn dense_spectrum(h: &SparseHamiltonian, with_vectors: bool) -> Result<DenseSpectrum> {
    if h.dim() > DENSE_LIMIT {
        return Err(Error::Capacity(format!(
            "dense diagonalisation limited to dimension {DENSE_LIMIT}, got {}",
            h.dim()
        )));
    }
    let dense = h.to_dense();
    if with_vectors {
        let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("dense eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..h.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(DenseSpectrum {
            eigenvalues,
            eigenvectors: Some(vecs),
        })
    } else {
        let vals: DVector<f64> = dense.symmetric_eigenvalues();
        let mut eigenvalues: Vec<f64> = vals.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        Ok(DenseSpectrum {
            eigenvalues,
            eigenvectors: None,
        })
    }
}
