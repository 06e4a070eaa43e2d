//! Acceptance report. Each criterion prints one `PASS` or `FAIL` line; the
//! test itself only fails on an engine error.

mod common;

use std::io::Write;
use std::sync::Arc;

use common::lbit_dense;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twosite_mbl::ensemble::fit::{fit_exponential_data, fit_power_law_data, FitResult};
use twosite_mbl::ensemble::tint::DEFAULT_THRESHOLD;
use twosite_mbl::ensemble::*;
use twosite_mbl::lbit::*;
use twosite_mbl::model::*;
use twosite_mbl::observables::*;
use twosite_mbl::propagator::{evolve, KrylovConfig};
use twosite_mbl::spectral::{mean_gap_ratio, GOE_MEAN_RATIO, POISSON_MEAN_RATIO};

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, ok: bool, name: &str, detail: String) {
        let line = format!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        // bypass the harness capture so the report always reaches the log
        writeln!(std::io::stdout(), "{line}").unwrap();
        self.lines.push((ok, line));
    }
}

fn krylov() -> KrylovConfig {
    KrylovConfig { dt: 0.5, ..KrylovConfig::default() }
}

fn chain_run(engine: Engine, l: usize, v: f64, delta: f64, grid: TimeGrid, n: usize, obs: &[Observable]) -> RunRecord {
    let mut cfg = ExperimentConfig::chain(engine, ModelParams::new(l, v, delta), grid);
    cfg.n_realizations = n;
    cfg.seed = 2024;
    cfg.krylov = krylov();
    cfg.observables = obs.to_vec();
    run_experiment(&cfg).unwrap()
}

/// Time average by the trapezoid rule over grid points in `[t1, t2]`.
fn time_average(s: &ObservableSeries, t1: f64, t2: f64) -> f64 {
    let pts: Vec<(f64, f64)> = s
        .times
        .iter()
        .zip(&s.mean)
        .filter(|(t, _)| (t1 - 1e-9..=t2 + 1e-9).contains(*t))
        .map(|(t, v)| (*t, *v))
        .collect();
    let span = pts.last().unwrap().0 - pts[0].0;
    pts.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum::<f64>() / span
}

fn nearest(s: &ObservableSeries, t: f64) -> usize {
    (0..s.times.len())
        .min_by(|&a, &b| (s.times[a] - t).abs().total_cmp(&(s.times[b] - t).abs()))
        .unwrap()
}

/// Largest window `[t1, t']` with `t' ≤ t2` on which the series stays
/// positive, so that a logarithmic fit is defined.
fn positive_window(s: &ObservableSeries, t1: f64, t2: f64) -> Option<(f64, f64)> {
    let mut end = None;
    for (t, v) in s.times.iter().zip(&s.mean) {
        if *t < t1 - 1e-9 {
            continue;
        }
        if *t > t2 + 1e-9 || !(*v > 0.0) {
            break;
        }
        end = Some(*t);
    }
    let first = s.times.iter().find(|t| **t >= t1 - 1e-9)?;
    match end {
        Some(e) if e > *first => Some((*first, e)),
        _ => None,
    }
}

fn power_fit(s: &ObservableSeries, t1: f64, t2: f64) -> Option<FitResult> {
    let w = positive_window(s, t1, t2)?;
    fit_power_law_data(&s.times, &s.mean, w).ok().filter(|f| f.n_points >= 3)
}

fn describe(f: &Option<FitResult>) -> String {
    match f {
        Some(f) => format!(
            "p={:.3}±{:.3} R²={:.3} on [{:.2},{:.2}]",
            f.exponent, f.exponent_stderr, f.r_squared, f.window.0, f.window.1
        ),
        None => "no positive window".into(),
    }
}

fn level_statistics(r: &mut Report) {
    let run = |delta: f64, v: f64| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        mean_gap_ratio(&ModelParams::new(12, v, delta), 50, &mut rng).unwrap()
    };
    let loc = run(4.0, 0.0);
    let erg = run(0.0, 2.0);
    let ok = (loc.mean - POISSON_MEAN_RATIO).abs() <= 0.02 && (erg.mean - GOE_MEAN_RATIO).abs() <= 0.03;
    r.record(
        ok,
        "level statistics",
        format!(
            "Δ=4,V=0 ⟨r⟩={:.4}±{:.4} (target 0.386±0.02); Δ=0,V=2 ⟨r⟩={:.4}±{:.4} (target 0.5295±0.03)",
            loc.mean, loc.stderr, erg.mean, erg.stderr
        ),
    );
}

fn engine_equivalence(r: &mut Report) {
    let all = [Observable::Concurrence, Observable::ConcurrenceBound, Observable::Imbalance, Observable::Entropy];
    let mut worst: f64 = 0.0;
    for delta in [1.0, 2.5, 4.0] {
        let grid = TimeGrid::linear(0.0, 20.0, 81);
        let a = chain_run(Engine::Exact, 10, 0.0, delta, grid, 3, &all);
        let b = chain_run(Engine::FreeFermion, 10, 0.0, delta, grid, 3, &all);
        for (sa, sb) in a.series.iter().zip(&b.series) {
            for (x, y) in sa.mean.iter().zip(&sb.mean) {
                worst = worst.max((x - y).abs());
            }
            for (pa, pb) in sa.pairs.iter().zip(&sb.pairs) {
                for (x, y) in pa.mean.iter().zip(&pb.mean) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    r.record(worst < 1e-7, "engine equivalence", format!("max deviation {worst:.2e} over t∈[0,20], L=10 (limit 1e-7)"));
}

fn lbit_oracle(r: &mut Report) {
    let l = 6;
    let mut worst: f64 = 0.0;
    for seed in 0..4u64 {
        let mut p = LbitParams::new(l);
        p.seed = seed;
        let inst = seeded_instance(&p).unwrap();
        let state = LbitProductState::sample(l, &mut ChaCha8Rng::seed_from_u64(seed + 50));
        for &t in &[0.5, 2.0, 3.0, 10.0, 40.0] {
            let psi = lbit_dense::evolved(&inst, &state, t);
            for m in 1..=l {
                for a in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let d = lbit_dense::expect(&psi, &lbit_dense::embed(l, &[(m, a)]));
                    worst = worst.max((d.re - local_expectation(&inst, &state, m, a, t).unwrap()).abs());
                }
                for n in 1..=l {
                    if n == m {
                        continue;
                    }
                    for a in Pauli::ALL {
                        for b in Pauli::ALL {
                            let d = lbit_dense::expect(&psi, &lbit_dense::embed(l, &[(m, a), (n, b)]));
                            worst = worst.max((d - two_point(&inst, &state, m, n, a, b, t).unwrap()).norm());
                        }
                    }
                    let rho = lbit_two_site_rdm(&inst, &state, m, n, t).unwrap();
                    let dense = lbit_dense::partial_trace(&psi, l, m, n);
                    worst = worst.max((rho.matrix() - dense).iter().map(|x| x.norm()).fold(0.0, f64::max));
                }
            }
        }
    }
    r.record(worst < 1e-10, "ℓ-bit analytic oracle", format!("max deviation {worst:.2e} at 5 times, L=6 (limit 1e-10)"));
}

fn al_plateau(r: &mut Report) -> f64 {
    let run = chain_run(
        Engine::FreeFermion,
        24,
        0.0,
        4.0,
        TimeGrid::linear(0.0, 200.0, 801),
        100,
        &[Observable::Concurrence, Observable::Imbalance],
    );
    let c = run.series(Observable::Concurrence).unwrap();
    let (a, b) = (time_average(c, 50.0, 100.0), time_average(c, 100.0, 200.0));
    let rel = (a - b).abs() / a.max(b);
    r.record(
        rel < 0.05 && a > 0.0 && b > 0.0,
        "AL plateau",
        format!("𝒞̄[50,100]={a:.4} 𝒞̄[100,200]={b:.4} relative difference {:.2}% (limit 5%)", 100.0 * rel),
    );
    time_average(run.series(Observable::Imbalance).unwrap(), 20.0, 50.0)
}

struct MblRuns {
    v1: RunRecord,
    imbalance_v1: f64,
}

fn mbl_power_law(r: &mut Report) -> MblRuns {
    let grid = TimeGrid::log(0.5, 50.0, 61);
    let obs = [Observable::Concurrence, Observable::ConcurrenceBound, Observable::Imbalance];
    let run = |v: f64| chain_run(Engine::Exact, 16, v, 3.0, grid, 40, &obs);
    let v1 = run(1.0);
    let fit1 = power_fit(v1.series(Observable::Concurrence).unwrap(), 3.0, 50.0);
    let full_window = fit1.as_ref().is_some_and(|f| (f.window.1 - 50.0).abs() < 1e-6);
    let ok1 = fit1.as_ref().is_some_and(|f| f.r_squared >= 0.95 && f.exponent > 0.0) && full_window;

    let half = run(0.5);
    let two = run(2.0);
    let fh = power_fit(half.series(Observable::Concurrence).unwrap(), 3.0, 50.0);
    let f2 = power_fit(two.series(Observable::Concurrence).unwrap(), 3.0, 50.0);
    let differ = match (&fh, &f2) {
        (Some(a), Some(b)) => (a.exponent - b.exponent).abs() > (a.exponent_stderr.powi(2) + b.exponent_stderr.powi(2)).sqrt(),
        _ => false,
    };
    r.record(
        ok1 && differ,
        "MBL power law",
        format!(
            "V=1 {} (need R²≥0.95, p>0); V=0.5 {}; V=2 {}; exponents differ beyond joint error: {differ}",
            describe(&fit1),
            describe(&fh),
            describe(&f2)
        ),
    );
    let imbalance_v1 = time_average(v1.series(Observable::Imbalance).unwrap(), 20.0, 50.0);
    MblRuns { v1, imbalance_v1 }
}

fn ergodic_decay(r: &mut Report) -> (f64, f64) {
    // Δ = 0 makes every phase equivalent
    let run = chain_run(
        Engine::Exact,
        16,
        2.0,
        0.0,
        TimeGrid::linear(0.0, 50.0, 201),
        2,
        &[Observable::Concurrence, Observable::Imbalance],
    );
    let c = run.series(Observable::Concurrence).unwrap();
    let i = run.series(Observable::Imbalance).unwrap();
    let (c1, c8) = (c.value_at(1.0).unwrap(), c.value_at(8.0).unwrap());
    let pw = fit_power_law_data(&c.times, &c.mean, (2.0, 8.0));
    let ex = fit_exponential_data(&c.times, &c.mean, (2.0, 8.0));
    let fits_ok = matches!((&pw, &ex), (Ok(p), Ok(e)) if e.r_squared > p.r_squared);
    let (i1, i510) = (i.value_at(1.0).unwrap(), time_average(i, 5.0, 10.0));
    let ok = c8 < 1e-3 * c1 && fits_ok && i510 < i1;
    let r2 = |f: &twosite_mbl::Result<FitResult>| f.as_ref().map(|f| format!("{:.3}", f.r_squared)).unwrap_or_else(|e| e.to_string());
    r.record(
        ok,
        "ergodic decay",
        format!(
            "𝒞(1)={c1:.3e} 𝒞(8)={c8:.3e} (need 𝒞(8)<1e-3·𝒞(1)); R² exp={} power={} on [2,8]; ℐ(1)={i1:.3} ℐ̄[5,10]={i510:.3}",
            r2(&ex),
            r2(&pw)
        ),
    );
    (time_average(i, 20.0, 50.0), time_average(i, 5.0, 10.0))
}

fn imbalance_contrast(r: &mut Report, mbl: f64, al: f64, ergodic: f64) {
    let ok = mbl > 0.1 && al > 0.1 && ergodic.abs() < 0.1;
    r.record(
        ok,
        "imbalance contrast",
        format!("ℐ̄[20,50]: Δ=3,V=1 {mbl:.3}; Δ=4,V=0 {al:.3} (need >0.1); Δ=0,V=2 {ergodic:.3} (need |ℐ̄|<0.1)"),
    );
}

fn interaction_time(r: &mut Report) {
    let mut cfg = ExperimentConfig::chain(
        Engine::Exact,
        ModelParams::new(16, 0.0, 3.0),
        TimeGrid::linear(0.0, 50.0, 201),
    );
    cfg.n_realizations = 20;
    cfg.seed = 2024;
    cfg.krylov = krylov();
    let vs = [0.1, 0.2, 0.3, 0.5];
    let scan = interaction_time_scan(&cfg, &vs, DEFAULT_THRESHOLD).unwrap();
    let pts: Vec<String> = scan
        .points
        .iter()
        .map(|p| format!("V={} t_int={}", p.v, p.t_int.map_or("none".into(), |t| format!("{t:.2}"))))
        .collect();
    // the inset form: t_int − 0.7 against V on log-log axes
    let crossed: Vec<(f64, f64)> = scan.points.iter().filter_map(|p| p.t_int.map(|t| (p.v, t))).collect();
    let inset = (crossed.len() >= 2 && crossed.iter().all(|(_, t)| *t > 0.7)).then(|| {
        let x: Vec<f64> = crossed.iter().map(|(v, _)| 1.0 / v).collect();
        let y: Vec<f64> = crossed.iter().map(|(_, t)| t - 0.7).collect();
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let xs: Vec<f64> = order.iter().map(|&k| x[k]).collect();
        let ys: Vec<f64> = order.iter().map(|&k| y[k]).collect();
        fit_power_law_data(&xs, &ys, (xs[0], xs[xs.len() - 1])).map(|f| -f.exponent).ok()
    });
    let (ok, fit) = match &scan.fit {
        Some(f) => ((f.a - 1.6).abs() <= 0.4, format!("a={:.3}±{:.3} c={:.3} b={:.3}", f.a, f.a_stderr, f.c, f.b)),
        None => (false, "fewer than three crossings".into()),
    };
    r.record(
        ok,
        "interaction time scaling",
        format!(
            "{}; free fit {fit} (target a=1.6±0.4); fixed b=0.7 gives a={}",
            pts.join(", "),
            inset.flatten().map_or("n/a".into(), |a| format!("{a:.3}"))
        ),
    );
}

fn bound_tightness(r: &mut Report, run: &RunRecord) {
    let c = run.series(Observable::Concurrence).unwrap();
    let b = run.series(Observable::ConcurrenceBound).unwrap();
    let gap = |t: f64| {
        let k = nearest(c, t);
        let sum: f64 = c.pairs.iter().zip(&b.pairs).map(|(p, q)| (p.mean[k] - q.mean[k]).abs()).sum();
        (c.times[k], sum / c.pairs.len() as f64)
    };
    let ((t5, g5), (t50, g50)) = (gap(5.0), gap(50.0));
    r.record(
        g50 < g5,
        "bound tightness",
        format!("bulk |C̄−C̃̄| = {g5:.4e} at t={t5:.2}, {g50:.4e} at t={t50:.2}"),
    );
}

fn lbit_decay(r: &mut Report) {
    let mut params = LbitParams::new(72);
    params.seed = 2024;
    let mut cfg = ExperimentConfig::lbit(params, TimeGrid::log(1.0, 1000.0, 61));
    cfg.n_realizations = 100;
    cfg.seed = 2024;
    let run = run_experiment(&cfg).unwrap();
    let c = run.series(Observable::Concurrence).unwrap();
    let fit = power_fit(c, 10.0, 1000.0);
    let full = fit.as_ref().is_some_and(|f| (f.window.1 - 1000.0).abs() < 1e-6);
    let ok = full && fit.as_ref().is_some_and(|f| f.r_squared >= 0.98);
    let k = nearest(c, 1000.0);
    r.record(
        ok,
        "ℓ-bit decay",
        format!("L=72, 100 instances: {} (need R²≥0.98 on [10,1000]); 𝒞(1000)={:.3e}", describe(&fit), c.mean[k]),
    );
}

fn invariant_suites(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = 0usize;
    for _ in 0..1000 {
        let mut p: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let coh = num_complex::Complex64::from_polar((p[1] * p[2]).sqrt() * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
        let rho = TwoSiteRdm::from_blocks(p[0], p[1], p[2], p[3], coh).unwrap();
        let cc = concurrence(&rho).unwrap();
        let bad = rho.check_invariants().is_err()
            || concurrence_bound(&rho).unwrap() > cc + 1e-12
            || (wootters_concurrence(&rho).unwrap() - sector_concurrence(p[0], p[3], coh).unwrap()).abs() > 1e-12;
        failures += bad as usize;
    }

    let basis = Arc::new(build_sector_basis(12).unwrap());
    let h = build_hamiltonian(&ModelParams::new(12, 1.0, 3.0).with_phase(0.3), &basis).unwrap();
    let psi0 = neel_state(&basis);
    let e0 = h.expectation(&psi0);
    let times: Vec<f64> = (0..=20).map(|k| k as f64).collect();
    let mut drift: f64 = 0.0;
    for step in evolve(&h, &psi0, &times, &KrylovConfig::default()).unwrap() {
        let (_, psi) = step.unwrap();
        drift = drift.max((psi.norm() - 1.0).abs()).max((h.expectation(&psi) - e0).abs() / h.norm_bound());
        for i in 1..12 {
            let rho = two_site_rdm(&psi, i, i + 1).unwrap();
            if rho.check_invariants().is_err() || concurrence_bound(&rho).unwrap() > concurrence(&rho).unwrap() + 1e-12 {
                failures += 1;
            }
        }
    }

    let prof = magnetization_profile(&psi0);
    let neel_ok = prof.iter().enumerate().all(|(k, m)| *m == if k % 2 == 0 { 0.5 } else { -0.5 })
        && imbalance(&prof, BulkWindow::for_sites(12)).unwrap() == 1.0
        && concurrence(&two_site_rdm(&psi0, 5, 6).unwrap()).unwrap() == 0.0
        && half_chain_entropy(&psi0).unwrap() == 0.0;
    r.record(
        failures == 0 && drift < 1e-8 && neel_ok,
        "invariant suites",
        format!("{failures} RDM violations, norm/energy drift {drift:.1e}, Néel t=0 values {}", if neel_ok { "exact" } else { "wrong" }),
    );
}

#[test]
fn acceptance() {
    let mut r = Report { lines: Vec::new() };
    level_statistics(&mut r);
    engine_equivalence(&mut r);
    lbit_oracle(&mut r);
    let al_imbalance = al_plateau(&mut r);
    let mbl = mbl_power_law(&mut r);
    let (ergodic_imbalance, _) = ergodic_decay(&mut r);
    imbalance_contrast(&mut r, mbl.imbalance_v1, al_imbalance, ergodic_imbalance);
    interaction_time(&mut r);
    bound_tightness(&mut r, &mbl.v1);
    lbit_decay(&mut r);
    invariant_suites(&mut r);
    let passed = r.lines.iter().filter(|(ok, _)| *ok).count();
    writeln!(std::io::stdout(), "acceptance: {passed}/{} criteria pass", r.lines.len()).unwrap();
}
