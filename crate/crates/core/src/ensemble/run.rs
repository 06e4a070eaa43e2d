use std::f64::consts::TAU;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Engine, ExperimentConfig, Observable, System};
use super::stats::{mean_and_variance, variance_of_aggregate};
use crate::error::{Error, Result};
use crate::freefermion::{
    block_entropy_from_correlations, evolve_correlations, neel_correlations, rdm_from_correlations,
    SingleParticleHamiltonian,
};
use crate::lbit::{lbit_two_site_rdm, sample_instance, LbitParams, LbitProductState};
use crate::model::{build_hamiltonian, build_sector_basis, neel_state, ModelParams, SectorBasis};
use crate::observables::{
    concurrence, concurrence_bound, half_chain_entropy, imbalance, magnetization_profile, two_site_rdm,
    BulkWindow, TwoSiteRdm,
};
use crate::propagator::evolve;

/// Random stream of realisation `index`. It depends only on `(seed, index)`,
/// so runs that differ in `V` see the same phases.
pub fn realization_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn realization_phase(seed: u64, index: usize) -> f64 {
    TAU * realization_rng(seed, index).random::<f64>()
}

/// Raw observables of one realisation, indexed `[time]` or `[time][pair]`.
/// Vectors of unselected observables are empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RealizationData {
    pub concurrence: Vec<Vec<f64>>,
    pub bound: Vec<Vec<f64>>,
    pub imbalance: Vec<f64>,
    pub entropy: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSeries {
    pub i: usize,
    pub j: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub n_realizations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pairs: Vec<PairSeries>,
}

impl ObservableSeries {
    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .map(|k| self.mean[k])
    }

    /// Mean of the series over grid points in `[t1, t2]`.
    pub fn time_average(&self, t1: f64, t2: f64) -> Option<f64> {
        let vals: Vec<f64> = self
            .times
            .iter()
            .zip(&self.mean)
            .filter(|(t, _)| (t1..=t2).contains(*t))
            .map(|(_, v)| *v)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub series: Vec<ObservableSeries>,
    pub metadata: RunMetadata,
}

impl RunRecord {
    pub fn series(&self, obs: Observable) -> Option<&ObservableSeries> {
        self.series.iter().find(|s| s.name == obs.name())
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let data = run_realizations(cfg)?;
    let series = aggregate(cfg, &data)?;
    Ok(RunRecord {
        config: cfg.clone(),
        series,
        metadata: RunMetadata {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    })
}

/// Evaluates every realisation in parallel, in realisation order.
pub fn run_realizations(cfg: &ExperimentConfig) -> Result<Vec<RealizationData>> {
    cfg.validate()?;
    let times = cfg.grid.times();
    let basis = match cfg.engine {
        Engine::Exact => Some(Arc::new(build_sector_basis(cfg.system.sites())?)),
        _ => None,
    };
    (0..cfg.n_realizations)
        .into_par_iter()
        .map(|k| {
            let out = match (&cfg.engine, &cfg.system) {
                (Engine::Exact, System::Chain(p)) => {
                    let basis = basis.as_ref().expect("basis built for exact engine");
                    exact_realization(cfg, p, basis, k, &times)
                }
                (Engine::FreeFermion, System::Chain(p)) => free_fermion_realization(cfg, p, k, &times),
                (Engine::Lbit, System::Lbit(p)) => lbit_realization(cfg, p, k, &times),
                _ => unreachable!("validated configuration"),
            };
            out.map_err(|e| e.context(&format!("realisation {k}")))
        })
        .collect()
}

struct Recorder<'a> {
    cfg: &'a ExperimentConfig,
    pairs: Vec<(usize, usize)>,
    window: BulkWindow,
    data: RealizationData,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Self {
        Recorder {
            cfg,
            pairs: cfg.pairs(),
            window: cfg.bulk_window(),
            data: RealizationData::default(),
        }
    }

    fn pairs_needed(&self) -> bool {
        self.cfg.wants(Observable::Concurrence) || self.cfg.wants(Observable::ConcurrenceBound)
    }

    fn record_pairs(&mut self, rdm: impl Fn(usize, usize) -> Result<TwoSiteRdm>) -> Result<()> {
        if !self.pairs_needed() {
            return Ok(());
        }
        let want_c = self.cfg.wants(Observable::Concurrence);
        let want_b = self.cfg.wants(Observable::ConcurrenceBound);
        let mut cs = Vec::with_capacity(self.pairs.len());
        let mut bs = Vec::with_capacity(self.pairs.len());
        for &(i, j) in &self.pairs {
            let rho = rdm(i, j)?;
            if want_c {
                cs.push(concurrence(&rho)?);
            }
            if want_b {
                bs.push(concurrence_bound(&rho)?);
            }
        }
        if want_c {
            self.data.concurrence.push(cs);
        }
        if want_b {
            self.data.bound.push(bs);
        }
        Ok(())
    }

    fn record_profile(&mut self, profile: &[f64]) -> Result<()> {
        if self.cfg.wants(Observable::Imbalance) {
            self.data.imbalance.push(imbalance(profile, self.window)?);
        }
        Ok(())
    }

    fn record_entropy(&mut self, entropy: impl FnOnce() -> Result<f64>) -> Result<()> {
        if self.cfg.wants(Observable::Entropy) {
            self.data.entropy.push(entropy()?);
        }
        Ok(())
    }
}

fn exact_realization(
    cfg: &ExperimentConfig,
    params: &ModelParams,
    basis: &Arc<SectorBasis>,
    k: usize,
    times: &[f64],
) -> Result<RealizationData> {
    let params = params.clone().with_phase(realization_phase(cfg.seed, k));
    let h = build_hamiltonian(&params, basis)?;
    let psi0 = neel_state(basis);
    let mut rec = Recorder::new(cfg);
    for step in evolve(&h, &psi0, times, &cfg.krylov)? {
        let (_, psi) = step?;
        rec.record_pairs(|i, j| two_site_rdm(&psi, i, j))?;
        rec.record_profile(&magnetization_profile(&psi))?;
        rec.record_entropy(|| half_chain_entropy(&psi))?;
    }
    Ok(rec.data)
}

fn free_fermion_realization(
    cfg: &ExperimentConfig,
    params: &ModelParams,
    k: usize,
    times: &[f64],
) -> Result<RealizationData> {
    let params = params.clone().with_phase(realization_phase(cfg.seed, k));
    let h = SingleParticleHamiltonian::from_params(&params)?;
    let g0 = neel_correlations(params.sites)?;
    let half = params.sites / 2;
    let mut rec = Recorder::new(cfg);
    for &t in times {
        let g = evolve_correlations(&g0, &h, t)?;
        rec.record_pairs(|i, j| rdm_from_correlations(&g, i, j))?;
        rec.record_profile(&g.magnetization_profile())?;
        rec.record_entropy(|| block_entropy_from_correlations(&g, 1..=half))?;
    }
    Ok(rec.data)
}

fn lbit_realization(cfg: &ExperimentConfig, params: &LbitParams, k: usize, times: &[f64]) -> Result<RealizationData> {
    let mut rng = realization_rng(cfg.seed, k);
    let inst = sample_instance(params, &mut rng)?;
    let state = LbitProductState::sample(params.sites, &mut rng);
    let mut rec = Recorder::new(cfg);
    for &t in times {
        rec.record_pairs(|i, j| lbit_two_site_rdm(&inst, &state, i, j, t))?;
    }
    Ok(rec.data)
}

fn pair_statistics(
    pairs: &[(usize, usize)],
    n_times: usize,
    values: impl Fn(usize, usize) -> Vec<f64>,
) -> Vec<PairSeries> {
    pairs
        .iter()
        .enumerate()
        .map(|(p, &(i, j))| {
            let (mean, variance) = (0..n_times).map(|t| mean_and_variance(&values(t, p))).unzip();
            PairSeries { i, j, mean, variance }
        })
        .collect()
}

/// Disorder averages. Pair observables aggregate as `Σ C̄²` over the pairs
/// with variance propagated from the per-pair variances of the mean.
pub fn aggregate(cfg: &ExperimentConfig, data: &[RealizationData]) -> Result<Vec<ObservableSeries>> {
    if data.is_empty() {
        return Err(Error::invalid("no realisations to aggregate"));
    }
    let times = cfg.grid.times();
    let nt = times.len();
    let n = data.len();
    let pairs = cfg.pairs();
    let mut out = Vec::new();

    let mut pair_observable = |obs: Observable, pick: fn(&RealizationData) -> &Vec<Vec<f64>>| {
        let ps = pair_statistics(&pairs, nt, |t, p| data.iter().map(|d| pick(d)[t][p]).collect());
        let mut mean = Vec::with_capacity(nt);
        let mut variance = Vec::with_capacity(nt);
        for t in 0..nt {
            let m: Vec<f64> = ps.iter().map(|s| s.mean[t]).collect();
            let v: Vec<f64> = ps.iter().map(|s| s.variance[t]).collect();
            mean.push(m.iter().map(|c| c * c).sum());
            variance.push(variance_of_aggregate(&m, &v));
        }
        out.push(ObservableSeries {
            name: obs.name().to_string(),
            times: times.clone(),
            mean,
            variance,
            n_realizations: n,
            pairs: ps,
        });
    };
    if cfg.wants(Observable::Concurrence) {
        pair_observable(Observable::Concurrence, |d| &d.concurrence);
    }
    if cfg.wants(Observable::ConcurrenceBound) {
        pair_observable(Observable::ConcurrenceBound, |d| &d.bound);
    }

    let mut scalar = |obs: Observable, pick: fn(&RealizationData) -> &Vec<f64>| {
        let (mean, variance) = (0..nt)
            .map(|t| mean_and_variance(&data.iter().map(|d| pick(d)[t]).collect::<Vec<_>>()))
            .unzip();
        out.push(ObservableSeries {
            name: obs.name().to_string(),
            times: times.clone(),
            mean,
            variance,
            n_realizations: n,
            pairs: Vec::new(),
        });
    };
    if cfg.wants(Observable::Imbalance) {
        scalar(Observable::Imbalance, |d| &d.imbalance);
    }
    if cfg.wants(Observable::Entropy) {
        scalar(Observable::Entropy, |d| &d.entropy);
    }
    Ok(out)
}
