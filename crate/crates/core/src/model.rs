//! Lattice model: couplings, the zero-magnetisation sector basis, the sparse
//! XXZ Hamiltonian with a quasi-periodic field, and the Néel initial state.
//!
//! Sites are labelled `1..=L`. Site `j` maps to bit `j - 1` of a basis
//! pattern; a set bit means spin up, which is also an occupied site in the
//! fermion picture.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest chain that the sector basis will enumerate.
pub const MAX_SITES: usize = 24;

/// Exact rational `num / den`, always kept in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "(u64, u64)", into = "(u64, u64)")]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::invalid("rational with zero denominator"));
        }
        let g = num.gcd(&den).max(1);
        Ok(Rational {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Fractional part of `self * j`, reduced with integer arithmetic.
    pub fn frac_times(&self, j: u64) -> f64 {
        let r = ((self.num as u128 * j as u128) % self.den as u128) as u64;
        r as f64 / self.den as f64
    }
}

impl TryFrom<(u64, u64)> for Rational {
    type Error = Error;
    fn try_from((n, d): (u64, u64)) -> Result<Self> {
        Rational::new(n, d)
    }
}

impl From<Rational> for (u64, u64) {
    fn from(r: Rational) -> Self {
        (r.num, r.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Inverse wavelength used throughout: 532/738 (stored reduced as 266/369).
pub fn default_beta() -> Rational {
    Rational::new(532, 738).expect("nonzero denominator")
}

/// Couplings and geometry of the open XXZ chain in a quasi-periodic field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of sites `L` (even).
    pub sites: usize,
    /// Exchange / hopping amplitude `J`.
    pub hopping: f64,
    /// Nearest-neighbour `S^z S^z` interaction `V`.
    pub interaction: f64,
    /// Quasi-periodic amplitude `Δ`.
    pub disorder: f64,
    /// Inverse wavelength `β`.
    pub beta: Rational,
    /// Phase offset `φ` in `[0, 2π)`.
    pub phase: f64,
}

impl ModelParams {
    pub fn new(sites: usize, interaction: f64, disorder: f64) -> Self {
        ModelParams {
            sites,
            hopping: 1.0,
            interaction,
            disorder,
            beta: default_beta(),
            phase: 0.0,
        }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 || !self.sites.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "site count must be even and >= 2, got {}",
                self.sites
            )));
        }
        if !(self.hopping > 0.0) || !self.hopping.is_finite() {
            return Err(Error::invalid("hopping J must be positive"));
        }
        if !self.interaction.is_finite() || !self.disorder.is_finite() {
            return Err(Error::invalid("V and Δ must be finite"));
        }
        if self.beta.numer() == 0 || self.beta.numer() >= self.beta.denom() {
            return Err(Error::invalid(format!("β = {} not in (0, 1)", self.beta)));
        }
        if !(0.0..TAU).contains(&self.phase) {
            return Err(Error::invalid(format!(
                "phase {} not in [0, 2π)",
                self.phase
            )));
        }
        Ok(())
    }
}

/// On-site field `Δ cos(2πβj + φ)` at site `j` (1-based).
pub fn quasiperiodic_field(params: &ModelParams, j: usize) -> Result<f64> {
    if j == 0 || j > params.sites {
        return Err(Error::Index {
            index: j,
            len: params.sites,
        });
    }
    let angle = TAU * params.beta.frac_times(j as u64) + params.phase;
    Ok(params.disorder * angle.cos())
}

/// Field values for all sites, index 0 holding site 1.
pub fn field_profile(params: &ModelParams) -> Vec<f64> {
    (1..=params.sites)
        .map(|j| quasiperiodic_field(params, j).expect("j within 1..=L"))
        .collect()
}

/// Half-filling (`S^z_tot = 0`) basis, ordered by bit pattern.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    sites: usize,
    states: Vec<u32>,
    // binom[n][k] for n <= sites
    binom: Vec<Vec<usize>>,
}

impl SectorBasis {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> u32 {
        self.states[idx]
    }

    /// Ordinal of `pattern`, or `None` if it is not a half-filled pattern.
    ///
    /// Uses the combinatorial number system: for fixed popcount, numeric
    /// order coincides with colexicographic order of the set-bit positions.
    pub fn index_of(&self, pattern: u32) -> Option<usize> {
        if (pattern as u64) >> self.sites != 0 || pattern.count_ones() as usize != self.sites / 2 {
            return None;
        }
        let mut rank = 0;
        let mut k = 0;
        let mut bits = pattern;
        while bits != 0 {
            let pos = bits.trailing_zeros() as usize;
            k += 1;
            rank += self.binom[pos][k];
            bits &= bits - 1;
        }
        Some(rank)
    }
}

fn binomial_table(n: usize) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0usize; n + 2]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for k in 1..=i {
            t[i][k] = t[i - 1][k - 1] + if k < i { t[i - 1][k] } else { 0 };
        }
    }
    t
}

pub fn build_sector_basis(sites: usize) -> Result<SectorBasis> {
    if !sites.is_multiple_of(2) || sites == 0 {
        return Err(Error::invalid(format!(
            "sector basis needs an even site count, got {sites}"
        )));
    }
    if sites > MAX_SITES {
        return Err(Error::Capacity(format!(
            "L = {sites} exceeds the sector basis limit {MAX_SITES}"
        )));
    }
    let half = sites / 2;
    let binom = binomial_table(sites);
    let mut states = Vec::with_capacity(binom[sites][half]);
    // Gosper's hack: next integer with the same popcount.
    let mut s: u64 = (1u64 << half) - 1;
    let limit = 1u64 << sites;
    while s < limit {
        states.push(s as u32);
        let c = s & s.wrapping_neg();
        let r = s + c;
        s = (((r ^ s) >> 2) / c) | r;
    }
    Ok(SectorBasis {
        sites,
        states,
        binom,
    })
}

/// Normalised state in the sector basis.
#[derive(Clone, Debug)]
pub struct SectorState {
    basis: Arc<SectorBasis>,
    amplitudes: Vec<Complex64>,
}

pub const NORM_TOLERANCE: f64 = 1e-10;

impl SectorState {
    pub fn new(basis: Arc<SectorBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::invalid(format!(
                "amplitude vector has length {}, basis dimension is {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let state = SectorState { basis, amplitudes };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!("state norm {norm} differs from 1")));
        }
        Ok(state)
    }

    /// Normalises `amplitudes` before wrapping them.
    pub fn normalized(basis: Arc<SectorBasis>, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Degenerate("cannot normalise a zero vector".into()));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        SectorState::new(basis, amplitudes)
    }

    /// Wraps amplitudes produced by a norm-preserving map without re-checking.
    pub(crate) fn from_raw(basis: Arc<SectorBasis>, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.len(), basis.dim());
        SectorState { basis, amplitudes }
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn sites(&self) -> usize {
        self.basis.sites()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &SectorState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Bit pattern of the Néel state `↑↓↑↓…` (site 1 up).
pub fn neel_pattern(sites: usize) -> u32 {
    (0..sites).step_by(2).fold(0u32, |acc, b| acc | (1 << b))
}

pub fn neel_state(basis: &Arc<SectorBasis>) -> SectorState {
    let idx = basis
        .index_of(neel_pattern(basis.sites()))
        .expect("Néel pattern is half filled");
    let mut amps = vec![Complex64::new(0.0, 0.0); basis.dim()];
    amps[idx] = Complex64::new(1.0, 0.0);
    SectorState::from_raw(Arc::clone(basis), amps)
}

/// Real symmetric sector Hamiltonian in compressed-row layout.
///
/// Every matrix element of this model is real, so the Hermitian structure
/// reduces to exact symmetry of the stored values.
#[derive(Clone, Debug)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterator over stored `(row, col, value)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k] as usize, self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.cols[range.clone()]
            .binary_search(&(col as u32))
            .map(|k| self.values[range.start + k])
            .unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `out = H x`.
    pub fn apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(out.len(), self.dim);
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[k] as usize] * self.values[k];
            }
            *o = acc;
        }
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn expectation(&self, state: &SectorState) -> f64 {
        let mut hx = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply(state.amplitudes(), &mut hx);
        state
            .amplitudes()
            .iter()
            .zip(&hx)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(r, c, v)| self.get(c, r) == v)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }
}

/// Sector matrix of
/// `H = -Σ_j [J (S⁺_j S⁻_{j+1} + h.c.) + V S^z_j S^z_{j+1}] + Σ_j h_j S^z_j`
/// with open boundaries.
pub fn build_hamiltonian(params: &ModelParams, basis: &SectorBasis) -> Result<SparseHamiltonian> {
    params.validate()?;
    if params.sites != basis.sites() {
        return Err(Error::invalid(format!(
            "model has L = {} but basis was built for L = {}",
            params.sites,
            basis.sites()
        )));
    }
    let l = params.sites;
    let field = field_profile(params);
    let dim = basis.dim();
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);
    let mut row: Vec<(u32, f64)> = Vec::with_capacity(l);
    for &s in basis.states() {
        row.clear();
        let sz = |b: usize| if s >> b & 1 == 1 { 0.5 } else { -0.5 };
        let mut diag = 0.0;
        for b in 0..l {
            diag += field[b] * sz(b);
        }
        for b in 0..l - 1 {
            diag -= params.interaction * sz(b) * sz(b + 1);
            if (s >> b ^ s >> (b + 1)) & 1 == 1 {
                let t = s ^ (0b11 << b);
                let c = basis.index_of(t).expect("hop stays in sector");
                row.push((c as u32, -params.hopping));
            }
        }
        let own = basis.index_of(s).expect("basis state");
        row.push((own as u32, diag));
        row.sort_unstable_by_key(|e| e.0);
        for &(c, v) in &row {
            cols.push(c);
            values.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseHamiltonian {
        dim,
        row_ptr,
        cols,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn field_at_zero_argument_is_amplitude() {
        // 2πβ·1 + φ ≡ 0 mod 2π
        let mut p = ModelParams::new(4, 0.0, 3.0);
        p.phase = TAU - TAU * p.beta.frac_times(1);
        assert_abs_diff_eq!(quasiperiodic_field(&p, 1).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_amplitude_field_vanishes() {
        let p = ModelParams::new(6, 1.0, 0.0).with_phase(1.3);
        for j in 1..=6 {
            assert_eq!(quasiperiodic_field(&p, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn field_at_rational_period() {
        let p = ModelParams {
            sites: 738,
            ..ModelParams::new(738, 0.0, 3.0)
        };
        assert_eq!(quasiperiodic_field(&p, 738).unwrap(), 3.0);
    }

    #[test]
    fn field_index_errors() {
        let p = ModelParams::new(4, 0.0, 1.0);
        assert!(matches!(quasiperiodic_field(&p, 0), Err(Error::Index { .. })));
        assert!(matches!(quasiperiodic_field(&p, 5), Err(Error::Index { .. })));
    }

    #[test]
    fn field_is_periodic_in_reduced_denominator() {
        let p = ModelParams::new(2, 0.0, 1.7).with_phase(0.4);
        assert_eq!(p.beta.denom(), 369);
        for j in 1..50u64 {
            let a = TAU * p.beta.frac_times(j);
            let b = TAU * p.beta.frac_times(j + 369);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn basis_sizes() {
        let b2 = build_sector_basis(2).unwrap();
        assert_eq!(b2.states(), &[0b01, 0b10]);
        assert_eq!(build_sector_basis(4).unwrap().dim(), 6);
        assert_eq!(build_sector_basis(12).unwrap().dim(), 924);
    }

    #[test]
    fn basis_errors() {
        assert!(matches!(build_sector_basis(5), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_sector_basis(26), Err(Error::Capacity(_))));
    }

    #[test]
    fn basis_index_is_inverse() {
        let b = build_sector_basis(10).unwrap();
        for (i, &s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(b.index_of(0b1), None);
        assert_eq!(b.index_of(0b111110 << 10), None);
    }

    #[test]
    fn two_site_hamiltonian() {
        let p = ModelParams::new(2, 0.8, 0.0);
        let b = build_sector_basis(2).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap().to_dense();
        assert_abs_diff_eq!(h[(0, 0)], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 1)], 0.2, epsilon = 1e-15);
        assert_eq!(h[(0, 1)], -1.0);
        assert_eq!(h[(1, 0)], -1.0);
    }

    #[test]
    fn hamiltonian_mismatched_basis() {
        let p = ModelParams::new(4, 1.0, 1.0);
        let b = build_sector_basis(6).unwrap();
        assert!(matches!(build_hamiltonian(&p, &b), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let p = ModelParams::new(10, 1.3, 2.5).with_phase(2.0);
        let b = build_sector_basis(10).unwrap();
        let h = build_hamiltonian(&p, &b).unwrap();
        assert!(h.is_symmetric());
    }

    #[test]
    fn neel_states() {
        let b2 = Arc::new(build_sector_basis(2).unwrap());
        let s2 = neel_state(&b2);
        assert_eq!(s2.amplitudes()[b2.index_of(0b01).unwrap()], Complex64::new(1.0, 0.0));
        let b4 = Arc::new(build_sector_basis(4).unwrap());
        let s4 = neel_state(&b4);
        assert_eq!(s4.amplitudes()[b4.index_of(0b0101).unwrap()], Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(s4.norm(), 1.0);
    }

    #[test]
    fn params_validation() {
        let mut p = ModelParams::new(3, 1.0, 1.0);
        assert!(p.validate().is_err());
        p.sites = 4;
        assert!(p.validate().is_ok());
        p.phase = TAU;
        assert!(p.validate().is_err());
        p.phase = 0.0;
        p.hopping = 0.0;
        assert!(p.validate().is_err());
    }
}
