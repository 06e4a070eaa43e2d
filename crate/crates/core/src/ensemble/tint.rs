//! Interaction time: when the interacting aggregate concurrence leaves the
//! non-interacting curve.

use serde::{Deserialize, Serialize};

use super::config::{Engine, ExperimentConfig, Observable, System};
use super::fit::{fit_offset_power, OffsetPowerFit};
use super::run::{run_experiment, ObservableSeries};
use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const DEFAULT_THRESHOLD: f64 = 0.025;
/// Further grid points that must stay above threshold.
pub const DEBOUNCE: usize = 3;
/// Crossings before this time are ignored.
pub const EARLIEST: f64 = 1.0;

/// Smallest grid time `t ≥ 1` where `|a − b| > ε` holds at `t` and at the
/// next [`DEBOUNCE`] grid points.
pub fn first_departure(times: &[f64], a: &[f64], b: &[f64], eps: f64) -> Result<Option<f64>> {
    if a.len() != times.len() || b.len() != times.len() {
        return Err(Error::invalid("series lengths differ from the time grid"));
    }
    let above: Vec<bool> = a.iter().zip(b).map(|(x, y)| (x - y).abs() > eps).collect();
    Ok((0..times.len())
        .filter(|&k| times[k] >= EARLIEST && k + DEBOUNCE < times.len())
        .find(|&k| above[k..=k + DEBOUNCE].iter().all(|&x| x))
        .map(|k| times[k]))
}

pub fn extract_t_int(series_v: &ObservableSeries, series_0: &ObservableSeries, eps: f64) -> Result<Option<f64>> {
    let same_grid = series_v.times.len() == series_0.times.len()
        && series_v
            .times
            .iter()
            .zip(&series_0.times)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same_grid {
        return Err(Error::invalid("series are on different time grids"));
    }
    first_departure(&series_v.times, &series_v.mean, &series_0.mean, eps)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TintPoint {
    pub v: f64,
    pub t_int: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TintScan {
    pub threshold: f64,
    pub points: Vec<TintPoint>,
    /// Present when at least three interaction strengths crossed.
    pub fit: Option<OffsetPowerFit>,
    pub reference: ObservableSeries,
    pub series: Vec<ObservableSeries>,
}

/// Runs the `V = 0` reference with the free-fermion engine and each `V` with
/// the exact engine, all with the phases drawn from `base.seed`.
pub fn interaction_time_scan(base: &ExperimentConfig, vs: &[f64], eps: f64) -> Result<TintScan> {
    let params = match (&base.engine, &base.system) {
        (Engine::Exact, System::Chain(p)) => p.clone(),
        _ => return Err(Error::invalid("interaction-time scan needs the exact engine on a chain")),
    };
    if vs.is_empty() {
        return Err(Error::invalid("no interaction strengths given"));
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("threshold must be positive"));
    }
    let mut cfg = base.clone();
    cfg.observables = vec![Observable::Concurrence];

    let mut reference_cfg = cfg.clone();
    reference_cfg.engine = Engine::FreeFermion;
    reference_cfg.system = System::Chain(with_interaction(&params, 0.0));
    let reference = take_concurrence(run_experiment(&reference_cfg)?)?;

    let mut points = Vec::new();
    let mut series = Vec::new();
    for &v in vs {
        let mut c = cfg.clone();
        c.system = System::Chain(with_interaction(&params, v));
        let s = take_concurrence(run_experiment(&c)?)?;
        points.push(TintPoint { v, t_int: extract_t_int(&s, &reference, eps)? });
        series.push(s);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().filter_map(|p| p.t_int.map(|t| (p.v, t))).unzip();
    let fit = if x.len() >= 3 { Some(fit_offset_power(&x, &y)?) } else { None };
    Ok(TintScan { threshold: eps, points, fit, reference, series })
}

fn take_concurrence(rec: super::run::RunRecord) -> Result<ObservableSeries> {
    rec.series
        .into_iter()
        .find(|s| s.name == Observable::Concurrence.name())
        .ok_or_else(|| Error::Numerical("run produced no concurrence series".into()))
}

fn with_interaction(p: &ModelParams, v: f64) -> ModelParams {
    let mut p = p.clone();
    p.interaction = v;
    p
}
