use serde::{Deserialize, Serialize};

use super::run::ObservableSeries;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `y = A t^{-p}`
    Power,
    /// `y = A e^{-k t}`
    Exponential,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// `p` for power laws, `k` for exponentials.
    pub exponent: f64,
    pub amplitude: f64,
    pub offset: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub exponent_stderr: f64,
    pub amplitude_stderr: f64,
    pub n_points: usize,
}

struct LineFit {
    slope: f64,
    intercept: f64,
    slope_se: f64,
    intercept_se: f64,
    r2: f64,
}

fn line_fit(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    // A flat series is fitted perfectly by a zero slope.
    let r2 = if syy <= f64::EPSILON * n * my.abs().max(1.0) {
        1.0
    } else {
        (1.0 - ssr / syy).clamp(0.0, 1.0)
    };
    let (slope_se, intercept_se) = if x.len() > 2 {
        let s2 = ssr / (n - 2.0);
        ((s2 / sxx).sqrt(), (s2 * (1.0 / n + mx * mx / sxx)).sqrt())
    } else {
        (0.0, 0.0)
    };
    LineFit { slope, intercept, slope_se, intercept_se, r2 }
}

fn window_points(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (t1, t2) = window;
    if times.len() != values.len() {
        return Err(Error::invalid("times and values differ in length"));
    }
    if !(t1 < t2) {
        return Err(Error::InvalidWindow(format!("[{t1}, {t2}] is empty")));
    }
    let (lo, hi) = match (times.first(), times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::InvalidWindow("series is empty".into())),
    };
    if t1 < lo - 1e-12 || t2 > hi + 1e-12 {
        return Err(Error::InvalidWindow(format!(
            "[{t1}, {t2}] outside data range [{lo}, {hi}]"
        )));
    }
    let pts: (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| (t1..=t2).contains(*t))
        .map(|(t, v)| (*t, *v))
        .unzip();
    if pts.0.len() < 2 {
        return Err(Error::InvalidWindow(format!("[{t1}, {t2}] holds fewer than two points")));
    }
    if let Some((t, v)) = pts.0.iter().zip(&pts.1).find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::InvalidWindow(format!("non-positive value {v} at t = {t}")));
    }
    Ok(pts)
}

pub fn fit_power_law_data(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<FitResult> {
    let (t, y) = window_points(times, values, window)?;
    if t[0] <= 0.0 {
        return Err(Error::InvalidWindow("power-law fit needs t > 0".into()));
    }
    let lx: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let f = line_fit(&lx, &ly);
    let amplitude = f.intercept.exp();
    Ok(FitResult {
        model: FitModel::Power,
        exponent: -f.slope,
        amplitude,
        offset: 0.0,
        window,
        r_squared: f.r2,
        exponent_stderr: f.slope_se,
        amplitude_stderr: amplitude * f.intercept_se,
        n_points: t.len(),
    })
}

pub fn fit_exponential_data(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<FitResult> {
    let (t, y) = window_points(times, values, window)?;
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let f = line_fit(&t, &ly);
    let amplitude = f.intercept.exp();
    Ok(FitResult {
        model: FitModel::Exponential,
        exponent: -f.slope,
        amplitude,
        offset: 0.0,
        window,
        r_squared: f.r2,
        exponent_stderr: f.slope_se,
        amplitude_stderr: amplitude * f.intercept_se,
        n_points: t.len(),
    })
}

pub fn fit_power_law(series: &ObservableSeries, window: (f64, f64)) -> Result<FitResult> {
    fit_power_law_data(&series.times, &series.mean, window)
}

pub fn fit_exponential(series: &ObservableSeries, window: (f64, f64)) -> Result<FitResult> {
    fit_exponential_data(&series.times, &series.mean, window)
}

/// `y = c x^{-a} + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OffsetPowerFit {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub c_stderr: f64,
    pub a_stderr: f64,
    pub b_stderr: f64,
    pub r_squared: f64,
}

/// Linear least squares for `(c, b)` at fixed `a`; returns `(c, b, ssr)`.
fn solve_cb(x: &[f64], y: &[f64], a: f64) -> (f64, f64, f64) {
    let u: Vec<f64> = x.iter().map(|v| v.powf(-a)).collect();
    let f = line_fit(&u, y);
    let ssr = u
        .iter()
        .zip(y)
        .map(|(p, q)| (q - f.intercept - f.slope * p).powi(2))
        .sum();
    (f.slope, f.intercept, ssr)
}

/// Fits `y = c x^{-a} + b` by scanning `a` and refining with a golden
/// section search; `c` and `b` are solved linearly at each `a`.
pub fn fit_offset_power(x: &[f64], y: &[f64]) -> Result<OffsetPowerFit> {
    if x.len() != y.len() {
        return Err(Error::invalid("x and y differ in length"));
    }
    if x.len() < 3 {
        return Err(Error::invalid("offset power law needs at least three points"));
    }
    if x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("offset power law needs x > 0"));
    }
    let ssr_at = |a: f64| solve_cb(x, y, a).2;
    let grid: Vec<f64> = (1..=1000).map(|k| 0.01 * k as f64).collect();
    let k_best = (0..grid.len())
        .min_by(|&p, &q| ssr_at(grid[p]).total_cmp(&ssr_at(grid[q])))
        .expect("non-empty grid");
    let (mut lo, mut hi) = (
        grid[k_best.saturating_sub(1)],
        grid[(k_best + 1).min(grid.len() - 1)],
    );
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if ssr_at(m1) < ssr_at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let a = 0.5 * (lo + hi);
    let (c, b, ssr) = solve_cb(x, y, a);

    let n = x.len();
    let my = y.iter().sum::<f64>() / n as f64;
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };

    // Covariance from the Jacobian at the optimum.
    let (c_stderr, a_stderr, b_stderr) = if n > 3 {
        let mut jtj = nalgebra::Matrix3::<f64>::zeros();
        for &xi in x {
            let p = xi.powf(-a);
            let row = nalgebra::Vector3::new(p, -c * p * xi.ln(), 1.0);
            jtj += row * row.transpose();
        }
        match jtj.try_inverse() {
            Some(inv) => {
                let s2 = ssr / (n - 3) as f64;
                (
                    (s2 * inv[(0, 0)]).sqrt(),
                    (s2 * inv[(1, 1)]).sqrt(),
                    (s2 * inv[(2, 2)]).sqrt(),
                )
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        }
    } else {
        (0.0, 0.0, 0.0)
    };
    Ok(OffsetPowerFit { c, a, b, c_stderr, a_stderr, b_stderr, r_squared })
}
