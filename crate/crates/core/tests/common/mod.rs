//! Brute-force references in the full 2^L Hilbert space.
//!
//! Convention shared with the library: site `j` is bit `j-1`, a set bit is
//! spin up. Two-site matrices use the order {↑↑, ↑↓, ↓↑, ↓↓}.
#![allow(dead_code)]

pub mod lbit_dense;

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;
use rand::Rng;
use twosite_mbl::model::SectorState;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Single-site operator in the {↓, ↑} = {bit 0, bit 1} basis.
pub fn op2(m: [[f64; 2]; 2]) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, k| c(m[r][k]))
}

pub fn sz() -> DMatrix<Complex64> {
    op2([[-0.5, 0.0], [0.0, 0.5]])
}

pub fn s_plus() -> DMatrix<Complex64> {
    op2([[0.0, 0.0], [1.0, 0.0]])
}

pub fn s_minus() -> DMatrix<Complex64> {
    op2([[0.0, 1.0], [0.0, 0.0]])
}

/// `⊗` of single-site operators, identity elsewhere; site `L` is the most
/// significant factor so that the index equals the bit pattern.
pub fn embed(l: usize, ops: &[(usize, DMatrix<Complex64>)]) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0));
    for site in (1..=l).rev() {
        let local = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| DMatrix::identity(2, 2));
        out = out.kronecker(&local);
    }
    out
}

/// Spin Hamiltonian assembled from tensor products.
pub fn dense_spin_hamiltonian(l: usize, j: f64, v: f64, fields: &[f64]) -> DMatrix<Complex64> {
    let dim = 1 << l;
    let mut h = DMatrix::from_element(dim, dim, c(0.0));
    for s in 1..l {
        let hop = embed(l, &[(s, s_plus()), (s + 1, s_minus())]) + embed(l, &[(s, s_minus()), (s + 1, s_plus())]);
        h -= hop * c(j);
        h -= embed(l, &[(s, sz()), (s + 1, sz())]) * c(v);
    }
    for (k, &f) in fields.iter().enumerate() {
        h += embed(l, &[(k + 1, sz())]) * c(f);
    }
    h
}

pub fn fields(l: usize, delta: f64, p: f64, q: f64, phi: f64) -> Vec<f64> {
    (1..=l)
        .map(|j| delta * (2.0 * std::f64::consts::PI * p * j as f64 / q + phi).cos())
        .collect()
}

pub fn sector_indices(l: usize) -> Vec<usize> {
    (0..1usize << l).filter(|s| s.count_ones() as usize == l / 2).collect()
}

pub fn to_full(psi: &SectorState) -> DVector<Complex64> {
    let l = psi.sites();
    let mut v = DVector::from_element(1 << l, c(0.0));
    for (&s, a) in psi.basis().states().iter().zip(psi.amplitudes()) {
        v[s as usize] = *a;
    }
    v
}

/// Reduced density matrix of sites `i`, `j` by explicit summation.
pub fn partial_trace_pair(psi: &DVector<Complex64>, l: usize, i: usize, j: usize) -> Matrix4<Complex64> {
    let slot = |s: usize| {
        let ui = s >> (i - 1) & 1;
        let uj = s >> (j - 1) & 1;
        2 * (1 - ui) + (1 - uj)
    };
    let mask = (1usize << (i - 1)) | (1usize << (j - 1));
    let mut rho = Matrix4::from_element(c(0.0));
    for a in 0..1usize << l {
        for b in 0..1usize << l {
            if a & !mask == b & !mask {
                rho[(slot(a), slot(b))] += psi[a] * psi[b].conj();
            }
        }
    }
    rho
}

/// Entropy (nats) of sites `1..=l/2` from the reduced density matrix.
pub fn half_chain_entropy_dense(psi: &DVector<Complex64>, l: usize) -> f64 {
    let half = l / 2;
    let (nl, nr) = (1usize << half, 1usize << (l - half));
    let m = DMatrix::from_fn(nl, nr, |a, b| psi[a | (b << half)]);
    let rho = &m * m.adjoint();
    let eig = rho.symmetric_eigenvalues();
    eig.iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `e^{-iHt} ψ` through a dense eigendecomposition.
pub fn dense_evolve(h: &DMatrix<Complex64>, psi: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let q = &eig.eigenvectors;
    let mut coeff = q.adjoint() * psi;
    for (k, x) in coeff.iter_mut().enumerate() {
        *x *= Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    q * coeff
}

pub fn random_complex_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub fn max_abs_diff4(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}
