//! Level-spacing statistics: gap ratios `r_n = min(δ_n, δ_{n+1}) / max(δ_n, δ_{n+1})`.

use std::f64::consts::TAU;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_hamiltonian, build_sector_basis, ModelParams};
use crate::propagator::dense_spectrum;

/// Mean ratio for Poisson level statistics, `2 ln 2 − 1`.
pub const POISSON_MEAN_RATIO: f64 = 0.386_294_361_119_890_6;
/// Mean ratio for the Gaussian orthogonal ensemble.
pub const GOE_MEAN_RATIO: f64 = 0.5295;

pub fn gap_ratios(levels: &[f64]) -> Result<Vec<f64>> {
    if levels.len() < 3 {
        return Err(Error::invalid("gap ratios need at least three levels"));
    }
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    if let Some(pos) = gaps.iter().position(|g| !(*g >= 0.0)) {
        return Err(Error::invalid(format!("spectrum not ascending at level {}", pos + 1)));
    }
    Ok(gaps
        .windows(2)
        .map(|w| {
            let (lo, hi) = if w[0] <= w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            if hi == 0.0 { 0.0 } else { lo / hi }
        })
        .collect())
}

pub fn mean_of_gap_ratios(levels: &[f64]) -> Result<f64> {
    let r = gap_ratios(levels)?;
    Ok(r.iter().sum::<f64>() / r.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRatioStats {
    pub per_realization: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl GapRatioStats {
    pub fn from_samples(per_realization: Vec<f64>) -> Self {
        let n = per_realization.len();
        let mean = per_realization.iter().sum::<f64>() / n.max(1) as f64;
        let stderr = if n > 1 {
            let var = per_realization.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        GapRatioStats { per_realization, mean, stderr, n }
    }
}

/// Whole-spectrum `⟨r⟩` for a fixed phase.
pub fn realization_gap_ratio(params: &ModelParams) -> Result<f64> {
    let basis = build_sector_basis(params.sites)?;
    let h = build_hamiltonian(params, &basis)?;
    mean_of_gap_ratios(&dense_spectrum(&h, false)?.eigenvalues)
}

/// `⟨r⟩` averaged over `n_phi` uniformly drawn phases. The phase supplied in
/// `params` is ignored.
pub fn mean_gap_ratio<R: Rng + ?Sized>(params: &ModelParams, n_phi: usize, rng: &mut R) -> Result<GapRatioStats> {
    params.validate()?;
    if n_phi == 0 {
        return Err(Error::invalid("need at least one realisation"));
    }
    // Fail fast on capacity before spawning work.
    let dim = build_sector_basis(params.sites)?.dim();
    if dim > crate::propagator::DENSE_LIMIT {
        return Err(Error::Capacity(format!("sector dimension {dim} too large for dense spectra")));
    }
    let phases: Vec<f64> = (0..n_phi).map(|_| TAU * rng.random::<f64>()).collect();
    let samples = phases
        .par_iter()
        .map(|&phi| realization_gap_ratio(&params.clone().with_phase(phi)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GapRatioStats::from_samples(samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseScanRow {
    pub delta: f64,
    pub v: f64,
    pub r_mean: f64,
    pub r_stderr: f64,
    pub n_real: usize,
}

/// Each grid point reuses the same phase sequence drawn from `seed`.
pub fn phase_scan(grid: &[(f64, f64)], sites: usize, n_phi: usize, seed: u64) -> Result<Vec<PhaseScanRow>> {
    if grid.is_empty() {
        return Err(Error::invalid("phase scan grid is empty"));
    }
    grid.iter()
        .map(|&(delta, v)| {
            let params = ModelParams::new(sites, v, delta);
            let stats = mean_gap_ratio(&params, n_phi, &mut ChaCha8Rng::seed_from_u64(seed))?;
            Ok(PhaseScanRow {
                delta,
                v,
                r_mean: stats.mean,
                r_stderr: stats.stderr,
                n_real: stats.n,
            })
        })
        .collect()
}

pub fn write_phase_scan(rows: &[PhaseScanRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
