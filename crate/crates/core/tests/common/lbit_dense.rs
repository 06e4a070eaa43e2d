//! Dense evolution of the diagonal ℓ-bit Hamiltonian. Site 1 is the most
//! significant factor; local index 0 is `τ^z = +1`.

use nalgebra::{DMatrix, DVector, Matrix4};
use num_complex::Complex64;
use twosite_mbl::lbit::{LbitInstance, LbitProductState, Pauli};

use super::c;

fn z_value(l: usize, s: usize, j: usize) -> f64 {
    if s >> (l - j) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `E(s) = Σ_j h_j z_j + Σ_{j≠l} 𝒥_{jl} z_j z_l`, ordered pairs.
pub fn energies(inst: &LbitInstance) -> Vec<f64> {
    let l = inst.sites();
    (0..1usize << l)
        .map(|s| {
            let mut e = 0.0;
            for j in 1..=l {
                e += inst.fields[j - 1] * z_value(l, s, j);
                for k in 1..=l {
                    if k != j {
                        e += inst.coupling(j, k) * z_value(l, s, j) * z_value(l, s, k);
                    }
                }
            }
            e
        })
        .collect()
}

pub fn evolved(inst: &LbitInstance, state: &LbitProductState, t: f64) -> DVector<Complex64> {
    let mut v = DVector::from_element(1, c(1.0));
    for j in 1..=state.sites() {
        let [a, b] = state.spinor(j);
        v = v.kronecker(&DVector::from_vec(vec![a, b]));
    }
    for (k, e) in energies(inst).iter().enumerate() {
        v[k] *= Complex64::from_polar(1.0, -e * t);
    }
    v
}

pub fn embed(l: usize, ops: &[(usize, Pauli)]) -> DMatrix<Complex64> {
    let mut out = DMatrix::from_element(1, 1, c(1.0));
    for j in 1..=l {
        let p = ops.iter().find(|(s, _)| *s == j).map(|(_, p)| *p).unwrap_or(Pauli::I);
        let m = p.matrix();
        out = out.kronecker(&DMatrix::from_fn(2, 2, |r, k| m[(r, k)]));
    }
    out
}

pub fn expect(psi: &DVector<Complex64>, op: &DMatrix<Complex64>) -> Complex64 {
    (psi.adjoint() * op * psi)[(0, 0)]
}

pub fn partial_trace(psi: &DVector<Complex64>, l: usize, m: usize, n: usize) -> Matrix4<Complex64> {
    let bit = |s: usize, j: usize| s >> (l - j) & 1;
    let mask = (1usize << (l - m)) | (1usize << (l - n));
    let mut rho = Matrix4::from_element(c(0.0));
    for a in 0..1usize << l {
        for b in 0..1usize << l {
            if a & !mask == b & !mask {
                rho[(2 * bit(a, m) + bit(a, n), 2 * bit(b, m) + bit(b, n))] += psi[a] * psi[b].conj();
            }
        }
    }
    rho
}
