//! Phenomenological ℓ-bit model
//! `H = Σ_j h_j τ^z_j + Σ_{j≠l} 𝒥_{jl} τ^z_j τ^z_l` with
//! `𝒥_{jl} = 𝒲_{jl} e^{-α|j-l|}`, evolved from a product state.
//!
//! Every `τ^z` is conserved, so correlators have closed forms built from
//! three kernels:
//!
//! * `K_{m,n}(t) = Π_{j≠m} [e^{-4i𝒥_{nj}t} cos²φ_j + e^{4i𝒥_{nj}t} sin²φ_j]`
//! * `F_t(m,n,b_m,b_n) = Π_{j≠m,n} [e^{-4i(b_m𝒥_{mj}+b_n𝒥_{nj})t} cos²φ_j + c.c.-phase · sin²φ_j]`
//! * `G^α_t(m,n,b_m,b_n)`, the site-`m` factor of a transverse operator
//!   dressed by the phase it picks up from site `n`.
//!
//! Sites are 1-based.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::TwoSiteRdm;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbitParams {
    /// Number of ℓ-bits.
    pub sites: usize,
    /// Half-width `W` of the coupling distribution.
    pub coupling_width: f64,
    /// Decay rate `α` of the couplings with distance.
    pub decay: f64,
    /// Half-width of the random fields `h_j`.
    pub field_width: f64,
    pub seed: u64,
}

impl LbitParams {
    pub fn new(sites: usize) -> Self {
        LbitParams {
            sites,
            coupling_width: 1.0,
            decay: 1.0,
            field_width: 1.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::invalid("ℓ-bit model needs at least two sites"));
        }
        if !(self.coupling_width >= 0.0) || !(self.field_width >= 0.0) {
            return Err(Error::invalid("ℓ-bit widths must be non-negative"));
        }
        if !(self.decay > 0.0) {
            return Err(Error::invalid("ℓ-bit decay rate must be positive"));
        }
        Ok(())
    }
}

/// One disorder realisation: fields and the symmetric coupling matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LbitInstance {
    pub fields: Vec<f64>,
    pub couplings: DMatrix<f64>,
}

impl LbitInstance {
    pub fn sites(&self) -> usize {
        self.fields.len()
    }

    /// `𝒥_{jl}` with 1-based labels.
    pub fn coupling(&self, j: usize, l: usize) -> f64 {
        self.couplings[(j - 1, l - 1)]
    }

    pub fn from_parts(fields: Vec<f64>, couplings: DMatrix<f64>) -> Result<Self> {
        let l = fields.len();
        if couplings.shape() != (l, l) {
            return Err(Error::invalid("coupling matrix shape does not match fields"));
        }
        if (&couplings - couplings.transpose()).amax() > 0.0 || couplings.diagonal().amax() > 0.0 {
            return Err(Error::invalid(
                "couplings must be symmetric with zero diagonal",
            ));
        }
        Ok(LbitInstance { fields, couplings })
    }
}

pub fn sample_instance<R: Rng + ?Sized>(params: &LbitParams, rng: &mut R) -> Result<LbitInstance> {
    params.validate()?;
    let l = params.sites;
    let mut couplings = DMatrix::zeros(l, l);
    for j in 0..l {
        for k in j + 1..l {
            let w = params.coupling_width * (2.0 * rng.random::<f64>() - 1.0);
            let v = w * (-params.decay * (k - j) as f64).exp();
            couplings[(j, k)] = v;
            couplings[(k, j)] = v;
        }
    }
    let fields = (0..l)
        .map(|_| params.field_width * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    Ok(LbitInstance { fields, couplings })
}

/// Instance drawn from `params.seed`.
pub fn seeded_instance(params: &LbitParams) -> Result<LbitInstance> {
    sample_instance(params, &mut ChaCha8Rng::seed_from_u64(params.seed))
}

/// Product state `⊗_j [cos φ_j |↑⟩ + e^{iθ_j} sin φ_j |↓⟩]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LbitProductState {
    pub polar: Vec<f64>,
    pub azimuth: Vec<f64>,
}

impl LbitProductState {
    pub fn new(polar: Vec<f64>, azimuth: Vec<f64>) -> Result<Self> {
        if polar.len() != azimuth.len() {
            return Err(Error::invalid("angle vectors differ in length"));
        }
        if polar.iter().any(|p| !(0.0..=FRAC_PI_2).contains(p)) {
            return Err(Error::invalid("polar angles must lie in [0, π/2]"));
        }
        if azimuth.iter().any(|a| !(0.0..TAU).contains(a)) {
            return Err(Error::invalid("azimuthal angles must lie in [0, 2π)"));
        }
        Ok(LbitProductState { polar, azimuth })
    }

    pub fn sample<R: Rng + ?Sized>(sites: usize, rng: &mut R) -> Self {
        let polar = (0..sites).map(|_| FRAC_PI_2 * rng.random::<f64>()).collect();
        let azimuth = (0..sites).map(|_| TAU * rng.random::<f64>()).collect();
        LbitProductState { polar, azimuth }
    }

    pub fn sites(&self) -> usize {
        self.polar.len()
    }

    fn cos2(&self, j: usize) -> f64 {
        self.polar[j - 1].cos().powi(2)
    }

    fn sin2(&self, j: usize) -> f64 {
        self.polar[j - 1].sin().powi(2)
    }

    /// `sin φ_j cos φ_j`
    fn sc(&self, j: usize) -> f64 {
        let p = self.polar[j - 1];
        p.sin() * p.cos()
    }

    fn theta(&self, j: usize) -> f64 {
        self.azimuth[j - 1]
    }

    /// Single-site spinor `(cos φ, e^{iθ} sin φ)`.
    pub fn spinor(&self, j: usize) -> [Complex64; 2] {
        let p = self.polar[j - 1];
        [
            Complex64::new(p.cos(), 0.0),
            Complex64::from_polar(p.sin(), self.theta(j)),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Matrix2<Complex64> {
        let (o, l, i) = (
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        );
        match self {
            Pauli::I => Matrix2::new(l, o, o, l),
            Pauli::X => Matrix2::new(o, l, l, o),
            Pauli::Y => Matrix2::new(o, -i, i, o),
            Pauli::Z => Matrix2::new(l, o, o, -l),
        }
    }
}

impl FromStr for Pauli {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" | "identity" => Ok(Pauli::I),
            "x" => Ok(Pauli::X),
            "y" => Ok(Pauli::Y),
            "z" => Ok(Pauli::Z),
            other => Err(Error::invalid(format!("unknown axis '{other}'"))),
        }
    }
}

fn check_site(inst: &LbitInstance, state: &LbitProductState, m: usize) -> Result<()> {
    let l = inst.sites();
    if state.sites() != l {
        return Err(Error::invalid(format!(
            "state has {} sites, instance has {l}",
            state.sites()
        )));
    }
    if m == 0 || m > l {
        return Err(Error::Index { index: m, len: l });
    }
    Ok(())
}

/// `e^{-iωt} cos²φ_j + e^{iωt} sin²φ_j`
fn dephasing_factor(state: &LbitProductState, j: usize, omega_t: f64) -> Complex64 {
    Complex64::from_polar(state.cos2(j), -omega_t) + Complex64::from_polar(state.sin2(j), omega_t)
}

/// `K_{m,n}(t)`.
pub fn kernel_k(inst: &LbitInstance, state: &LbitProductState, m: usize, n: usize, t: f64) -> Complex64 {
    (1..=inst.sites())
        .filter(|&j| j != m && j != n)
        .map(|j| dephasing_factor(state, j, 4.0 * inst.coupling(n, j) * t))
        .product()
}

/// `F_t(m, n, b_m, b_n)` with `b = ±1`.
pub fn kernel_f(
    inst: &LbitInstance,
    state: &LbitProductState,
    m: usize,
    n: usize,
    bm: i8,
    bn: i8,
    t: f64,
) -> Complex64 {
    let (bm, bn) = (bm as f64, bn as f64);
    (1..=inst.sites())
        .filter(|&j| j != m && j != n)
        .map(|j| {
            let w = bm * inst.coupling(m, j) + bn * inst.coupling(n, j);
            dephasing_factor(state, j, 4.0 * w * t)
        })
        .product()
}

/// `G^α_t(m, n, b_m, b_n)` for `α ∈ {x, y}`.
pub fn kernel_g(
    inst: &LbitInstance,
    state: &LbitProductState,
    axis: Pauli,
    m: usize,
    n: usize,
    bm: i8,
    bn: i8,
    t: f64,
) -> Result<Complex64> {
    let jnm = inst.coupling(n, m);
    let bn = bn as f64;
    let base = if bm < 0 {
        Complex64::from_polar(state.sc(m), 4.0 * bn * jnm * t + state.theta(m))
    } else {
        Complex64::from_polar(state.sc(m), -4.0 * bn * jnm * t - state.theta(m))
    };
    let i = Complex64::new(0.0, 1.0);
    match axis {
        Pauli::X => Ok(base),
        Pauli::Y if bm < 0 => Ok(-i * base),
        Pauli::Y => Ok(i * base),
        _ => Err(Error::invalid("G kernel defined for x and y only")),
    }
}

/// `⟨τ^α_m(t)⟩`.
pub fn local_expectation(
    inst: &LbitInstance,
    state: &LbitProductState,
    m: usize,
    axis: Pauli,
    t: f64,
) -> Result<f64> {
    check_site(inst, state, m)?;
    let q = || {
        Complex64::from_polar(state.sc(m), -state.theta(m) - 2.0 * inst.fields[m - 1] * t)
            * kernel_k(inst, state, m, m, t)
    };
    Ok(match axis {
        Pauli::I => 1.0,
        Pauli::Z => state.cos2(m) - state.sin2(m),
        Pauli::X => 2.0 * q().re,
        Pauli::Y => 2.0 * (Complex64::new(0.0, 1.0) * q()).re,
    })
}

/// `Q` such that `⟨τ^z_m τ^x_n⟩ = Q + Q̄`.
fn zx_amplitude(inst: &LbitInstance, state: &LbitProductState, m: usize, n: usize, t: f64) -> Complex64 {
    let jnm = inst.coupling(n, m);
    let bracket = Complex64::from_polar(state.cos2(m), -4.0 * jnm * t)
        - Complex64::from_polar(state.sin2(m), 4.0 * jnm * t);
    bracket
        * Complex64::from_polar(state.sc(n), -state.theta(n) - 2.0 * inst.fields[n - 1] * t)
        * kernel_k(inst, state, m, n, t)
}

/// `⟨τ^α_m(t) τ^β_n(t)⟩` for `m ≠ n`.
pub fn two_point(
    inst: &LbitInstance,
    state: &LbitProductState,
    m: usize,
    n: usize,
    alpha: Pauli,
    beta: Pauli,
    t: f64,
) -> Result<Complex64> {
    check_site(inst, state, m)?;
    check_site(inst, state, n)?;
    if m == n {
        return Err(Error::invalid("two-point correlator requires m ≠ n"));
    }
    let real = |x: f64| Complex64::new(x, 0.0);
    let i = Complex64::new(0.0, 1.0);
    use Pauli::*;
    Ok(match (alpha, beta) {
        (I, I) => real(1.0),
        (I, b) => real(local_expectation(inst, state, n, b, t)?),
        (a, I) => real(local_expectation(inst, state, m, a, t)?),
        (Z, Z) => real((state.cos2(m) - state.sin2(m)) * (state.cos2(n) - state.sin2(n))),
        (Z, X) => {
            let q = zx_amplitude(inst, state, m, n, t);
            q + q.conj()
        }
        (Z, Y) => {
            let q = i * zx_amplitude(inst, state, m, n, t);
            q + q.conj()
        }
        (X | Y, Z) => two_point(inst, state, n, m, Z, alpha, t)?,
        (X | Y, X | Y) => {
            let (hm, hn) = (inst.fields[m - 1], inst.fields[n - 1]);
            let mut sum = Complex64::new(0.0, 0.0);
            for bm in [-1i8, 1] {
                for bn in [-1i8, 1] {
                    let phase = Complex64::from_polar(
                        1.0,
                        -2.0 * (bm as f64 * hm + bn as f64 * hn) * t,
                    );
                    let gm = kernel_g(inst, state, alpha, m, n, bm, bn, t)?;
                    let gn = kernel_g(inst, state, beta, n, m, -bn, -bm, t)?;
                    sum += phase * gm * gn.conj() * kernel_f(inst, state, m, n, bm, bn, t);
                }
            }
            sum
        }
    })
}

/// `ρ_{m,n}(t) = ¼ Σ_{α,β} ⟨τ^α_m τ^β_n⟩ σ^α ⊗ σ^β`.
pub fn lbit_two_site_rdm(
    inst: &LbitInstance,
    state: &LbitProductState,
    m: usize,
    n: usize,
    t: f64,
) -> Result<TwoSiteRdm> {
    if m == n {
        return Err(Error::invalid("two-site density matrix requires m ≠ n"));
    }
    let mut rho = Matrix4::<Complex64>::zeros();
    for a in Pauli::ALL {
        for b in Pauli::ALL {
            let corr = two_point(inst, state, m, n, a, b, t)?.re;
            rho += a.matrix().kronecker(&b.matrix()) * Complex64::new(0.25 * corr, 0.0);
        }
    }
    TwoSiteRdm::new(rho)
}
