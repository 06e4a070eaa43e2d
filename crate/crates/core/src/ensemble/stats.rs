/// Sample mean and variance of the mean (`s² / n`, zero for `n < 2`).
pub fn mean_and_variance(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, ss / ((n - 1) * n) as f64)
}

/// First-order propagation for `𝒞 = Σ C̄²`:
/// `Var(𝒞) = Σ (2 C̄_{ij})² Var(C̄_{ij})`.
pub fn variance_of_aggregate(means: &[f64], variances: &[f64]) -> f64 {
    means
        .iter()
        .zip(variances)
        .map(|(m, v)| 4.0 * m * m * v)
        .sum()
}
