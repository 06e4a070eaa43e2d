//! Measurement functionals: two-site density matrices, concurrence (general
//! and sector-specialised), the real-coherence lower bound, the aggregate
//! bulk concurrence, imbalance, and half-chain entanglement entropy.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, shannon_nats};
use crate::model::SectorState;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Off-block entries below this are treated as zero by [`TwoSiteRdm::blocks`].
pub const BLOCK_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Populations and coherence of an `S^z`-conserving two-site state.
///
/// `coherence` is the `(↑↓, ↓↑)` element, i.e. `⟨S⁻_i S⁺_j⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorBlocks {
    pub p_uu: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_dd: f64,
    pub coherence: Complex64,
}

/// Two-qubit density matrix in the basis `{↑↑, ↑↓, ↓↑, ↓↓}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSiteRdm(Matrix4<Complex64>);

impl TwoSiteRdm {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let rho = TwoSiteRdm(m);
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Wraps a matrix without any checks.
    pub fn from_matrix_unchecked(m: Matrix4<Complex64>) -> Self {
        TwoSiteRdm(m)
    }

    pub fn from_blocks(p_uu: f64, p_ud: f64, p_du: f64, p_dd: f64, coherence: Complex64) -> Result<Self> {
        let re = |x: f64| Complex64::new(x, 0.0);
        let mut m = Matrix4::from_element(ZERO);
        m[(0, 0)] = re(p_uu);
        m[(1, 1)] = re(p_ud);
        m[(2, 2)] = re(p_du);
        m[(3, 3)] = re(p_dd);
        m[(1, 2)] = coherence;
        m[(2, 1)] = coherence.conj();
        let rho = TwoSiteRdm(m);
        rho.check_trace_and_hermiticity()?;
        // positivity of the 2x2 block and the isolated populations
        let mean = 0.5 * (p_ud + p_du);
        let half_gap = (0.25 * (p_ud - p_du).powi(2) + coherence.norm_sqr()).sqrt();
        let min_eig = (mean - half_gap).min(p_uu).min(p_dd);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(rho)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    fn check_trace_and_hermiticity(&self) -> Result<()> {
        let herm = (self.0 - self.0.adjoint()).camax();
        if herm > HERMITICITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = self.0.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::invalid(format!("density matrix trace {tr} differs from 1")));
        }
        Ok(())
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(DMatrix::from_iterator(4, 4, self.0.iter().copied()))
    }

    pub fn check_invariants(&self) -> Result<()> {
        self.check_trace_and_hermiticity()?;
        let min_eig = self.eigenvalues()?[0];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(())
    }

    /// Block view, available when every entry outside the `S^z`-conserving
    /// pattern is below [`BLOCK_TOL`].
    pub fn blocks(&self) -> Option<SectorBlocks> {
        let m = &self.0;
        for r in 0..4 {
            for c in 0..4 {
                let allowed = r == c || (r, c) == (1, 2) || (r, c) == (2, 1);
                if !allowed && m[(r, c)].norm() >= BLOCK_TOL {
                    return None;
                }
            }
        }
        Some(SectorBlocks {
            p_uu: m[(0, 0)].re,
            p_ud: m[(1, 1)].re,
            p_du: m[(2, 2)].re,
            p_dd: m[(3, 3)].re,
            coherence: m[(1, 2)],
        })
    }
}

/// Reduced density matrix of sites `i < j` (1-based) of a sector state.
/// Entries outside the `S^z`-conserving blocks vanish identically.
pub fn two_site_rdm(psi: &SectorState, i: usize, j: usize) -> Result<TwoSiteRdm> {
    let l = psi.sites();
    for s in [i, j] {
        if s == 0 || s > l {
            return Err(Error::Index { index: s, len: l });
        }
    }
    if i >= j {
        return Err(Error::invalid(format!("pair ({i}, {j}) must have i < j")));
    }
    let (bi, bj) = (i - 1, j - 1);
    let basis = psi.basis();
    let amps = psi.amplitudes();
    let mut pops = [0.0f64; 4];
    let mut coherence = ZERO;
    let flip = (1u32 << bi) | (1u32 << bj);
    for (&s, a) in basis.states().iter().zip(amps) {
        let up_i = s >> bi & 1 == 1;
        let up_j = s >> bj & 1 == 1;
        let slot = match (up_i, up_j) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        pops[slot] += a.norm_sqr();
        if slot == 1 {
            let partner = basis.index_of(s ^ flip).expect("exchange stays in sector");
            coherence += a * amps[partner].conj();
        }
    }
    TwoSiteRdm::from_blocks(pops[0], pops[1], pops[2], pops[3], coherence)
}

/// `⟨S^z_j⟩` for every site.
pub fn magnetization_profile(psi: &SectorState) -> Vec<f64> {
    let l = psi.sites();
    let mut up = vec![0.0; l];
    for (&s, a) in psi.basis().states().iter().zip(psi.amplitudes()) {
        let w = a.norm_sqr();
        let mut bits = s;
        while bits != 0 {
            up[bits.trailing_zeros() as usize] += w;
            bits &= bits - 1;
        }
    }
    up.into_iter().map(|p| p - 0.5).collect()
}

fn spin_flip() -> Matrix4<Complex64> {
    // σ^y ⊗ σ^y in the {↑↑, ↑↓, ↓↑, ↓↓} basis
    let mut y = Matrix4::from_element(ZERO);
    y[(0, 3)] = Complex64::new(-1.0, 0.0);
    y[(3, 0)] = Complex64::new(-1.0, 0.0);
    y[(1, 2)] = Complex64::new(1.0, 0.0);
    y[(2, 1)] = Complex64::new(1.0, 0.0);
    y
}

/// Wootters concurrence `max(0, λ₁ - λ₂ - λ₃ - λ₄)`.
///
/// The `λ` are the square roots of the eigenvalues of `ρ ρ̃`; they are
/// obtained here as the singular values of `Vᵀ (σ^y⊗σ^y) V`, where
/// `ρ = V V†` with `V = U √p`, which avoids square roots of tiny
/// eigenvalues of `ρ ρ̃`.
pub fn wootters_concurrence(rho: &TwoSiteRdm) -> Result<f64> {
    let m = rho.matrix();
    let herm = (m - m.adjoint()).camax();
    if herm > HERMITICITY_TOL {
        return Err(Error::invalid(format!(
            "concurrence of a non-Hermitian matrix (deviation {herm:e})"
        )));
    }
    let hermitian = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(hermitian, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("4x4 eigensolver did not converge".into()))?;
    let mut v = eig.eigenvectors;
    for k in 0..4 {
        let p = eig.eigenvalues[k];
        let w = if p > 1e-15 { p.sqrt() } else { 0.0 };
        v.column_mut(k).scale_mut(w);
    }
    let tau = v.transpose() * spin_flip() * v;
    let mut lambda: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    Ok((lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0))
}

fn check_populations(p_uu: f64, p_dd: f64) -> Result<(f64, f64)> {
    if p_uu < -POSITIVITY_TOL || p_dd < -POSITIVITY_TOL {
        return Err(Error::invalid(format!(
            "negative populations P↑↑ = {p_uu:e}, P↓↓ = {p_dd:e}"
        )));
    }
    Ok((p_uu.max(0.0), p_dd.max(0.0)))
}

/// Closed form for `S^z`-conserving states:
/// `C = 2 max(0, |ρ↑↓| - √(P↑↑ P↓↓))`.
pub fn sector_concurrence(p_uu: f64, p_dd: f64, coherence: Complex64) -> Result<f64> {
    let (a, d) = check_populations(p_uu, p_dd)?;
    Ok(2.0 * (coherence.norm() - (a * d).sqrt()).max(0.0))
}

/// Lower bound that keeps only `Re ρ↑↓`, the part reachable with a global
/// pulse on both sites.
pub fn concurrence_bound(rho: &TwoSiteRdm) -> Result<f64> {
    let b = rho
        .blocks()
        .ok_or_else(|| Error::invalid("concurrence bound requires a block-diagonal matrix"))?;
    let (a, d) = check_populations(b.p_uu, b.p_dd)?;
    Ok(2.0 * (b.coherence.re.abs() - (a * d).sqrt()).max(0.0))
}

/// Concurrence through the sector formula when the block view exists,
/// otherwise through Wootters' construction.
pub fn concurrence(rho: &TwoSiteRdm) -> Result<f64> {
    match rho.blocks() {
        Some(b) => sector_concurrence(b.p_uu, b.p_dd, b.coherence),
        None => wootters_concurrence(rho),
    }
}

/// Inclusive range of bulk sites `[⌈L/3⌉, ⌊2L/3⌋]` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BulkWindow {
    pub lo: usize,
    pub hi: usize,
}

impl BulkWindow {
    pub fn for_sites(l: usize) -> Self {
        BulkWindow {
            lo: l.div_ceil(3).max(1),
            hi: 2 * l / 3,
        }
    }

    pub fn new(lo: usize, hi: usize, l: usize) -> Result<Self> {
        if lo == 0 || hi > l || lo > hi {
            return Err(Error::invalid(format!(
                "bulk window [{lo}, {hi}] invalid for L = {l}"
            )));
        }
        Ok(BulkWindow { lo, hi })
    }

    pub fn contains(&self, site: usize) -> bool {
        (self.lo..=self.hi).contains(&site)
    }

    /// Unordered pairs `i < j` inside the window, optionally with
    /// `j - i <= r_max`.
    pub fn pairs(&self, r_max: Option<usize>) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in self.lo..=self.hi {
            for j in i + 1..=self.hi {
                if r_max.is_none_or(|r| j - i <= r) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Pair concurrences at one time, keyed by `(i, j)` with `i < j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConcurrenceField(BTreeMap<(usize, usize), f64>);

impl ConcurrenceField {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `C_{ij}` (symmetric in the pair order).
    pub fn insert(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        if i == j {
            return Err(Error::invalid("concurrence pair needs distinct sites"));
        }
        if !(-1e-12..=1.0 + 1e-9).contains(&value) {
            return Err(Error::invalid(format!("concurrence {value} outside [0, 1]")));
        }
        self.0.insert((i.min(j), i.max(j)), value.max(0.0));
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.0.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.0.iter().map(|(&k, &v)| (k, v))
    }
}

/// `Σ_{i<j ∈ bulk} C̄²_{ij}`; pairs outside the window are ignored.
pub fn aggregate_concurrence(field: &ConcurrenceField, window: BulkWindow) -> f64 {
    field
        .iter()
        .filter(|&((i, j), _)| window.contains(i) && window.contains(j))
        .map(|(_, c)| c * c)
        .sum()
}

/// Even/odd imbalance over the bulk sites, signed so that the Néel state
/// (site 1 up) gives `+1`:
/// `ℐ = (⟨S^z_o⟩ - ⟨S^z_e⟩) / (1 + ⟨S^z_e⟩ + ⟨S^z_o⟩)`.
pub fn imbalance(profile: &[f64], window: BulkWindow) -> Result<f64> {
    if window.hi > profile.len() {
        return Err(Error::invalid(format!(
            "profile of length {} shorter than bulk window end {}",
            profile.len(),
            window.hi
        )));
    }
    let mean = |parity: usize| {
        let vals: Vec<f64> = (window.lo..=window.hi)
            .filter(|j| j % 2 == parity)
            .map(|j| profile[j - 1])
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let (even, odd) = match (mean(0), mean(1)) {
        (Some(e), Some(o)) => (e, o),
        _ => {
            return Err(Error::Degenerate(
                "bulk window must contain both even and odd sites".into(),
            ))
        }
    };
    let denom = 1.0 + even + odd;
    if denom.abs() < 1e-9 {
        return Err(Error::Degenerate(format!("imbalance denominator {denom:e}")));
    }
    Ok((odd - even) / denom)
}

/// Von Neumann entropy (nats) of the left half `1..=L/2` of a sector state.
pub fn half_chain_entropy(psi: &SectorState) -> Result<f64> {
    let l = psi.sites();
    let half = l / 2;
    let left_mask = (1u32 << half) - 1;
    // group amplitudes by the number of particles in the left block
    let mut blocks: Vec<(Vec<u32>, Vec<u32>, Vec<(u32, u32, Complex64)>)> =
        (0..=half).map(|_| (Vec::new(), Vec::new(), Vec::new())).collect();
    for (&s, &a) in psi.basis().states().iter().zip(psi.amplitudes()) {
        let left = s & left_mask;
        let right = s >> half;
        blocks[left.count_ones() as usize].2.push((left, right, a));
    }
    let mut probs = Vec::new();
    for (lefts, rights, entries) in blocks.iter_mut() {
        if entries.is_empty() {
            continue;
        }
        lefts.extend(entries.iter().map(|e| e.0));
        lefts.sort_unstable();
        lefts.dedup();
        rights.extend(entries.iter().map(|e| e.1));
        rights.sort_unstable();
        rights.dedup();
        let mut m = DMatrix::from_element(lefts.len(), rights.len(), ZERO);
        for &(lb, rb, a) in entries.iter() {
            let r = lefts.binary_search(&lb).expect("present");
            let c = rights.binary_search(&rb).expect("present");
            m[(r, c)] = a;
        }
        let rho_a = if m.nrows() <= m.ncols() {
            &m * m.adjoint()
        } else {
            m.adjoint() * &m
        };
        probs.extend(hermitian_eigenvalues(rho_a)?);
    }
    Ok(shannon_nats(probs))
}
