use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::freefermion::MAX_PAIR_DISTANCE;
use crate::lbit::LbitParams;
use crate::model::ModelParams;
use crate::observables::BulkWindow;
use crate::propagator::KrylovConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    FreeFermion,
    Lbit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            start: 0.1,
            stop: 1000.0,
            points: 61,
            spacing: Spacing::Log,
        }
    }
}

impl TimeGrid {
    pub fn linear(start: f64, stop: f64, points: usize) -> Self {
        TimeGrid { start, stop, points, spacing: Spacing::Linear }
    }

    pub fn log(start: f64, stop: f64, points: usize) -> Self {
        TimeGrid { start, stop, points, spacing: Spacing::Log }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::invalid("time grid needs at least two points"));
        }
        if !(self.start >= 0.0) || !(self.stop > self.start) || !self.stop.is_finite() {
            return Err(Error::invalid(format!(
                "time grid [{}, {}] must satisfy 0 <= start < stop",
                self.start, self.stop
            )));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::invalid("log-spaced grid needs start > 0"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        let mut t: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / last)
                .collect(),
            Spacing::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..n).map(|k| (a + (b - a) * k as f64 / last).exp()).collect()
            }
        };
        t[0] = self.start;
        t[n - 1] = self.stop;
        t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Concurrence,
    ConcurrenceBound,
    Imbalance,
    Entropy,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Concurrence => "concurrence",
            Observable::ConcurrenceBound => "concurrence_bound",
            Observable::Imbalance => "imbalance",
            Observable::Entropy => "entropy",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "concurrence" => Ok(Observable::Concurrence),
            "concurrence_bound" | "bound" => Ok(Observable::ConcurrenceBound),
            "imbalance" => Ok(Observable::Imbalance),
            "entropy" => Ok(Observable::Entropy),
            other => Err(Error::invalid(format!("unknown observable '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum System {
    Chain(ModelParams),
    Lbit(LbitParams),
}

impl System {
    pub fn sites(&self) -> usize {
        match self {
            System::Chain(p) => p.sites,
            System::Lbit(p) => p.sites,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub engine: Engine,
    pub system: System,
    pub grid: TimeGrid,
    pub n_realizations: usize,
    pub seed: u64,
    pub observables: Vec<Observable>,
    /// Defaults to `[⌈L/3⌉, ⌊2L/3⌋]`.
    pub window: Option<BulkWindow>,
    pub r_max: usize,
    pub krylov: KrylovConfig,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn chain(engine: Engine, params: ModelParams, grid: TimeGrid) -> Self {
        ExperimentConfig {
            engine,
            system: System::Chain(params),
            grid,
            n_realizations: 1,
            seed: 0,
            observables: vec![Observable::Concurrence, Observable::Imbalance],
            window: None,
            r_max: 2,
            krylov: KrylovConfig::default(),
            out_dir: None,
        }
    }

    pub fn lbit(params: LbitParams, grid: TimeGrid) -> Self {
        ExperimentConfig {
            engine: Engine::Lbit,
            system: System::Lbit(params),
            grid,
            n_realizations: 1,
            seed: 0,
            observables: vec![Observable::Concurrence],
            window: None,
            r_max: 2,
            krylov: KrylovConfig::default(),
            out_dir: None,
        }
    }

    pub fn bulk_window(&self) -> BulkWindow {
        self.window.unwrap_or_else(|| BulkWindow::for_sites(self.system.sites()))
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.bulk_window().pairs(Some(self.r_max))
    }

    pub fn wants(&self, obs: Observable) -> bool {
        self.observables.contains(&obs)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.n_realizations == 0 {
            return Err(Error::invalid("need at least one realisation"));
        }
        if self.r_max == 0 {
            return Err(Error::invalid("r_max must be at least 1"));
        }
        if self.observables.is_empty() {
            return Err(Error::invalid("no observables selected"));
        }
        let l = self.system.sites();
        if let Some(w) = self.window {
            BulkWindow::new(w.lo, w.hi, l)?;
        }
        match (&self.engine, &self.system) {
            (Engine::Exact, System::Chain(p)) => {
                p.validate()?;
                self.krylov.validate()?;
            }
            (Engine::FreeFermion, System::Chain(p)) => {
                p.validate()?;
                if p.interaction != 0.0 {
                    return Err(Error::invalid(format!(
                        "free-fermion engine requires V = 0, got V = {}",
                        p.interaction
                    )));
                }
                if self.r_max > MAX_PAIR_DISTANCE {
                    return Err(Error::UnsupportedRange {
                        distance: self.r_max,
                        max: MAX_PAIR_DISTANCE,
                    });
                }
            }
            (Engine::Lbit, System::Lbit(p)) => {
                p.validate()?;
                if let Some(o) = self.observables.iter().find(|&&o| o != Observable::Concurrence) {
                    return Err(Error::invalid(format!(
                        "ℓ-bit engine supports only concurrence, not {}",
                        o.name()
                    )));
                }
            }
            (e, _) => {
                return Err(Error::invalid(format!("engine {e:?} does not match system parameters")));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }
}
