//! Experiment execution: one function per subcommand, all returning the
//! same artifact bundle shape.

use std::path::Path;

use serde_json::{json, Value};

use nuelab_core::balls;
use nuelab_core::deviations::{
    self, escape_survivor_fraction, escape_survivors_exact, exact_doubling_fraction_f64,
    fit_exponential_rate, DeviationExperiment, DeviationMode, RatePoint, RecurrenceGate,
};
use nuelab_core::diagnostics::{
    hyperbolic_time_density, hyperbolic_times_orbit, orbit_summary, HyperbolicTimeParams,
    OrbitSummary,
};
use nuelab_core::measures::{
    basin_count, empirical_measure, ruelle_check, BasinConfig, MeasureConfig, RuelleConfig,
};
use nuelab_core::rng::Stream;
use nuelab_core::stats::Z_999;
use nuelab_core::variational::{pressure, rate_bound, rate_bound_bruteforce, MarkovModel};
use nuelab_core::{FamilyId, Observable};

use crate::artifacts::{write_bundle, Bundle};
use crate::config::{Config, ExperimentKind};
use crate::svg::{render_rate_chart, RateChart};
use crate::CliError;

fn numeric(e: nuelab_core::Error) -> CliError {
    CliError::Numeric(e.to_string())
}

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Run the configured experiment and write its bundle.
pub fn run(cfg: &Config, out_dir: &Path) -> Result<Bundle, CliError> {
    let (csv, fit, oracle, metrics, chart) = match cfg.kind {
        ExperimentKind::Deviate => run_deviate(cfg)?,
        ExperimentKind::Escape => run_escape(cfg)?,
        ExperimentKind::Tail => run_tail(cfg)?,
        ExperimentKind::Hyptimes => run_hyptimes(cfg)?,
        ExperimentKind::Measure => run_measure(cfg)?,
        ExperimentKind::Simulate => run_simulate(cfg)?,
        ExperimentKind::Bound => run_bound(cfg)?,
        ExperimentKind::RuelleCheck => run_ruelle(cfg)?,
    };
    let chart = if cfg.formats.iter().any(|f| f == "svg") {
        chart
    } else {
        None
    };
    write_bundle(
        out_dir,
        cfg.kind.name(),
        cfg.echo_json(),
        csv,
        fit,
        oracle,
        metrics,
        chart,
    )
}

fn fit_to_json(fit: &deviations::RateEstimate) -> Value {
    json!({
        "xi": fit.xi,
        "xi_stderr": fit.xi_stderr,
        "intercept": fit.intercept,
        "window": {"n_lo": fit.window.0, "n_hi": fit.window.1},
        "used_points": fit.used_points,
        "decay_detected": fit.decay_detected,
    })
}

fn rate_chart(title: &str, points: &[RatePoint], reference: Option<f64>) -> Option<String> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.censored && p.p_hat > 0.0)
        .map(|p| (p.n as f64, -p.p_hat.ln() / p.n as f64))
        .collect();
    if pts.is_empty() {
        return None;
    }
    Some(render_rate_chart(&RateChart {
        title,
        points: pts,
        reference,
    }))
}

type RunOutput = (String, Value, Value, Value, Option<String>);

fn run_deviate(cfg: &Config) -> Result<RunOutput, CliError> {
    let sys = cfg
        .system
        .clone()
        .ok_or_else(|| cfg_err("deviate needs a [system] block"))?;
    let observable = cfg.observable()?;

    // Threshold mode when `threshold` is given; otherwise equilibrium
    // distance, with targets defaulting to the empirical physical-measure
    // average of the observable.
    let (mode, targets_used) = match (cfg.experiment.threshold, &cfg.experiment.omega) {
        (Some(c), None) => (DeviationMode::Threshold { c }, None),
        (None, Some(omega)) => {
            let targets = match &cfg.experiment.targets {
                Some(t) => t.clone(),
                None => {
                    let m = empirical_measure(
                        &sys,
                        &MeasureConfig {
                            starts: 2000,
                            burn_in: 100,
                            iterates: 2000,
                            bins: 100,
                            seed: cfg.seed ^ 0xE0,
                            workers: cfg.workers,
                        },
                    )
                    .map_err(numeric)?;
                    vec![m.integrate(&observable)]
                }
            };
            (
                DeviationMode::EquilibriumDistance {
                    targets: targets.clone(),
                    omega: *omega,
                },
                Some(targets),
            )
        }
        (Some(_), Some(_)) => return Err(cfg_err("set either `threshold` or `omega`, not both")),
        (None, None) => return Err(cfg_err("deviate needs `threshold` or `omega`")),
    };
    let gate = match (cfg.experiment.gate_delta, cfg.experiment.gate_epsilon) {
        (Some(delta), Some(epsilon)) => Some(RecurrenceGate { delta, epsilon }),
        (None, None) => None,
        _ => {
            return Err(cfg_err(
                "a recurrence gate needs both gate_delta and gate_epsilon",
            ))
        }
    };

    let exp = DeviationExperiment {
        system: sys.clone(),
        observable: observable.clone(),
        mode,
        gate,
        n_grid: cfg.n_grid.clone(),
        samples: cfg.samples,
        seed: cfg.seed,
        workers: cfg.workers,
    };
    exp.validate().map_err(|e| cfg_err(e.to_string()))?;

    let mut csv = String::from(
        "n_iterates,p_hat(fraction),ci_lo(fraction),ci_hi(fraction),count,samples,censored(bool)\n",
    );
    let mut points = Vec::new();
    for &n in &cfg.n_grid {
        let est = deviations::deviation_fraction(&exp, n).map_err(numeric)?;
        let censored = !est.exact && est.count == 0;
        csv.push_str(&format!(
            "{n},{:.17e},{:.17e},{:.17e},{},{},{}\n",
            est.p_hat, est.ci_lo, est.ci_hi, est.count, est.samples, censored
        ));
        points.push(RatePoint::measured(n, &est));
    }
    let fit = fit_exponential_rate(&points).ok();

    // Exact oracle for the Bernoulli-coded digit experiment.
    let is_digit_threshold = sys.family() == FamilyId::Doubling
        && observable == Observable::FirstDigit
        && matches!(exp.mode, DeviationMode::Threshold { .. });
    let oracle = if let (true, DeviationMode::Threshold { c }) = (is_digit_threshold, &exp.mode) {
        let mut band_ok = true;
        let mut exact_per_n = Vec::new();
        for (i, &n) in cfg.n_grid.iter().enumerate() {
            let p = exact_doubling_fraction_f64(n, *c).map_err(numeric)?;
            exact_per_n.push(json!({"n": n, "p_exact": p}));
            let sd = (p * (1.0 - p) / cfg.samples as f64).sqrt();
            if (points[i].p_hat - p).abs() > Z_999 * sd {
                band_ok = false;
            }
        }
        let exact_points: Vec<RatePoint> = (100..=400)
            .step_by(50)
            .map(|n| RatePoint::exact(n, exact_doubling_fraction_f64(n, *c).unwrap()))
            .collect();
        let exact_fit = fit_exponential_rate(&exact_points).map_err(numeric)?;
        let bound = rate_bound(&MarkovModel::doubling_digit(), *c).map_err(numeric)?;
        json!({
            "kind": "doubling_digit_binomial",
            "per_n": exact_per_n,
            "band_z": Z_999,
            "monte_carlo_within_band": band_ok,
            "exact_fit": fit_to_json(&exact_fit),
            "rate_bound": bound,
            "gap_exact_fit": exact_fit.xi + bound,
            "gap_monte_carlo": fit.as_ref().map(|f| f.xi + bound),
        })
    } else {
        Value::Null
    };

    let reference = oracle.get("rate_bound").and_then(Value::as_f64).map(|b| -b);
    let chart = rate_chart("deviation volume decay rate", &points, reference);
    let metrics = json!({
        "targets_used": targets_used,
        "grid_points": cfg.n_grid.len(),
    });
    Ok((
        csv,
        fit.map(|f| fit_to_json(&f)).unwrap_or(Value::Null),
        oracle,
        metrics,
        chart,
    ))
}

fn run_escape(cfg: &Config) -> Result<RunOutput, CliError> {
    let sys = cfg
        .system
        .clone()
        .ok_or_else(|| cfg_err("escape needs a [system] block"))?;
    let region = cfg.region()?;
    let exact = escape_survivors_exact(&sys, &region, *cfg.n_grid.last().unwrap()).ok();

    let mut csv = String::from(
        "n_iterates,survivor_rel(fraction of K),ci_lo,ci_hi,survivor_abs(fraction of domain),exact_abs(fraction of domain)\n",
    );
    let mut points = Vec::new();
    let mut exact_points = Vec::new();
    for &n in &cfg.n_grid {
        let est = escape_survivor_fraction(&sys, &region, n, cfg.samples, cfg.seed, cfg.workers)
            .map_err(numeric)?;
        let exact_abs = exact.as_ref().map(|v| v[n - 1]);
        csv.push_str(&format!(
            "{n},{:.17e},{:.17e},{:.17e},{:.17e},{}\n",
            est.relative.p_hat,
            est.relative.ci_lo,
            est.relative.ci_hi,
            est.absolute,
            exact_abs.map(|v| format!("{v:.17e}")).unwrap_or_default(),
        ));
        points.push(RatePoint::measured(n, &est.relative));
        if let Some(v) = exact_abs {
            exact_points.push(RatePoint::exact(n, v));
        }
    }
    let fit = fit_exponential_rate(&points).ok();
    let oracle = if exact_points.len() >= 3 {
        let efit = fit_exponential_rate(&exact_points).map_err(numeric)?;
        json!({
            "kind": "interval_enumeration",
            "exact_fit": fit_to_json(&efit),
        })
    } else {
        Value::Null
    };
    let chart = rate_chart("escape rate", &points, None);
    let metrics = json!({
        "region_fraction": region.volume() / sys.domain().volume(),
    });
    Ok((
        csv,
        fit.map(|f| fit_to_json(&f)).unwrap_or(Value::Null),
        oracle,
        metrics,
        chart,
    ))
}

fn run_tail(cfg: &Config) -> Result<RunOutput, CliError> {
    let sys = cfg
        .system
        .clone()
        .ok_or_else(|| cfg_err("tail needs a [system] block"))?;
    let delta = cfg
        .experiment
        .delta
        .ok_or_else(|| cfg_err("tail needs `delta`"))?;
    let epsilon = cfg
        .experiment
        .epsilon
        .ok_or_else(|| cfg_err("tail needs `epsilon`"))?;

    let mut csv = String::from(
        "n_iterates,p_hat(fraction),ci_lo(fraction),ci_hi(fraction),count,samples,censored(bool)\n",
    );
    let mut points = Vec::new();
    for &n in &cfg.n_grid {
        let est =
            deviations::tail_fraction(&sys, delta, epsilon, n, cfg.samples, cfg.seed, cfg.workers)
                .map_err(numeric)?;
        let censored = !est.exact && est.count == 0;
        csv.push_str(&format!(
            "{n},{:.17e},{:.17e},{:.17e},{},{},{}\n",
            est.p_hat, est.ci_lo, est.ci_hi, est.count, est.samples, censored
        ));
        points.push(RatePoint::measured(n, &est));
    }
    let fit = fit_exponential_rate(&points).ok();
    let chart = rate_chart("tail volume decay rate", &points, None);
    Ok((
        csv,
        fit.map(|f| fit_to_json(&f)).unwrap_or(Value::Null),
        Value::Null,
        json!({"delta": delta, "epsilon": epsilon}),
        chart,
    ))
}

fn run_hyptimes(cfg: &Config) -> Result<RunOutput, CliError> {
    let sys = cfg
        .system
        .clone()
        .ok_or_else(|| cfg_err("hyptimes needs a [system] block"))?;
    let params = HyperbolicTimeParams::new(
        cfg.experiment.sigma.unwrap_or(0.9),
        cfg.experiment.delta.unwrap_or(0.1),
        cfg.experiment.b.unwrap_or(0.5),
    )
    .map_err(|e| cfg_err(e.to_string()))?
    .with_indexing(cfg.indexing()?);
    let n_max = *cfg.n_grid.last().unwrap();

    let mut header = String::from("start_x,start_y");
    for n in &cfg.n_grid {
        header.push_str(&format!(",density_at_{n}(fraction)"));
    }
    let mut csv = header + "\n";

    let rows: Vec<Option<(f64, f64, Vec<f64>)>> =
        nuelab_core::parallel::run_sharded(cfg.samples, cfg.workers, |i| {
            let mut rng = Stream::for_index(cfg.seed, i as u64);
            for _ in 0..100 {
                let start = sys.domain().sample(&mut rng);
                let mut orbit = sys.orbit_seeded(start, rng.clone());
                rng.next_u64();
                match hyperbolic_times_orbit(&sys, &mut orbit, n_max, &params) {
                    Ok(times) => {
                        let densities: Vec<f64> = cfg
                            .n_grid
                            .iter()
                            .map(|n| hyperbolic_time_density(&times, *n))
                            .collect();
                        return Some((start.x, start.y, densities));
                    }
                    Err(_) => continue,
                }
            }
            None
        });

    let mut kept = 0usize;
    let mut positive = 0usize;
    let mut mean_by_n = vec![0.0f64; cfg.n_grid.len()];
    let mut max_pair_gap = 0.0f64;
    for row in rows.iter().flatten() {
        kept += 1;
        if *row.2.last().unwrap() > 0.0 {
            positive += 1;
        }
        for (i, d) in row.2.iter().enumerate() {
            mean_by_n[i] += d;
        }
        if row.2.len() >= 2 {
            let gap = (row.2[row.2.len() - 1] - row.2[row.2.len() - 2]).abs();
            max_pair_gap = max_pair_gap.max(gap);
        }
        csv.push_str(&format!("{:.17e},{:.17e}", row.0, row.1));
        for d in &row.2 {
            csv.push_str(&format!(",{d:.8}"));
        }
        csv.push('\n');
    }
    if kept == 0 {
        return Err(CliError::Numeric("all starts failed".into()));
    }
    for m in mean_by_n.iter_mut() {
        *m /= kept as f64;
    }
    let metrics = json!({
        "starts_kept": kept,
        "starts_failed": cfg.samples - kept,
        "fraction_positive_density": positive as f64 / kept as f64,
        "mean_density_by_n": cfg.n_grid.iter().zip(&mean_by_n).map(|(n, d)| json!({"n": n, "mean_density": d})).collect::<Vec<_>>(),
        "mean_density_final_gap": if mean_by_n.len() >= 2 {
            (mean_by_n[mean_by_n.len() - 1] - mean_by_n[mean_by_n.len() - 2]).abs()
        } else { 0.0 },
        "max_per_start_final_gap": max_pair_gap,
        "sigma": params.sigma,
        "delta": params.delta,
        "b": params.b,
        "indexing": format!("{:?}", params.indexing),
    });
    Ok((csv, Value::Null, Value::Null, metrics, None))
}

fn run_measure(cfg: &Config) -> Result<RunOutput, CliError> {
    let sys = cfg
        .system
        .clone()
        .ok_or_else(|| cfg_err("measure needs a [system] block"))?;
    let mcfg = MeasureConfig {
        starts: cfg.samples,
        burn_in: cfg.experiment.burn_in.unwrap_or(100),
        iterates: cfg.n_grid.last().copied().unwrap_or(1000),
        bins: cfg.experiment.bins.unwrap_or(100),
        seed: cfg.seed,
        workers: cfg.workers,
    };
    let m = empirical_measure(&sys, &mcfg).map_err(numeric)?;

    let mut csv = String::from("bin_lo_x,bin_hi_x,bin_lo_y,bin_hi_y,weight(probability)\n");
    for i in 0..m.weights().len() {
        let (x0, x1, y0, y1) = m.bin_bounds(i);
        csv.push_str(&format!(
            "{x0:.17e},{x1:.17e},{y0:.17e},{y1:.17e},{:.17e}\n",
            m.weights()[i]
        ));
    }

    let ((mean_x, var_x), (mean_y, var_y)) = m.moments();
    let basins = if cfg.experiment.basins {
        let report = basin_count(
            &sys,
            &BasinConfig {
                starts: cfg.samples.min(200),
                burn_in: mcfg.burn_in.max(200),
                iterates: mcfg.iterates.min(2000),
                bins: mcfg.bins.min(25),
                tol: cfg.experiment.tol.unwrap_or(0.2),
                seed: cfg.seed ^ 0xBA51,
                workers: cfg.workers,
            },
        )
        .map_err(numeric)?;
        json!({"count": report.count, "failed_starts": report.failed_starts})
    } else {
        Value::Null
    };
    let metrics = json!({
        "samples": m.samples,
        "total_mass": m.weights().iter().sum::<f64>(),
        "mean": [mean_x, mean_y],
        "variance": [var_x, var_y],
        "support_fraction": m.support_fraction(),
        "resampled_starts": m.resampled_starts,
        "failed_starts": m.failed_starts,
        "basins": basins,
    });
    Ok((csv, Value::Null, Value::Null, metrics, None))
}

fn run_simulate(cfg: &Config) -> Result<RunOutput, CliError> {
    let sys = cfg
        .system
        .clone()
        .ok_or_else(|| cfg_err("simulate needs a [system] block"))?;
    let observable = cfg.observable()?;
    let ht = HyperbolicTimeParams::new(
        cfg.experiment.sigma.unwrap_or(0.9),
        cfg.experiment.delta.unwrap_or(0.1),
        cfg.experiment.b.unwrap_or(0.5),
    )
    .map_err(|e| cfg_err(e.to_string()))?
    .with_indexing(cfg.indexing()?);
    let n = *cfg.n_grid.last().unwrap();
    let observables = [observable];

    let rows: Vec<Option<OrbitSummary>> =
        nuelab_core::parallel::run_sharded(cfg.samples, cfg.workers, |i| {
            let mut rng = Stream::for_index(cfg.seed, i as u64);
            for _ in 0..100 {
                let start = sys.domain().sample(&mut rng);
                let mut orbit = sys.orbit_seeded(start, rng.clone());
                rng.next_u64();
                if let Ok(s) = orbit_summary(&sys, &mut orbit, &observables, n, &ht) {
                    return Some(s);
                }
            }
            None
        });

    let names: Vec<String> = observables.iter().map(|o| o.name()).collect();
    let mut csv = OrbitSummary::csv_header(&names) + "\n";
    let mut kept = 0usize;
    let (mut mean_obs, mut mean_psi, mut mean_delta, mut mean_jac, mut mean_density) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for s in rows.iter().flatten() {
        kept += 1;
        csv.push_str(&s.csv_row());
        csv.push('\n');
        mean_obs += s.observables[0].1 / n as f64;
        mean_psi += s.sum_psi / n as f64;
        mean_delta += s.sum_delta / n as f64;
        mean_jac += s.sum_log_jac / n as f64;
        mean_density += hyperbolic_time_density(&s.hyperbolic_times, n);
    }
    if kept == 0 {
        return Err(CliError::Numeric("all starts failed".into()));
    }
    let k = kept as f64;
    let metrics = json!({
        "orbits": kept,
        "starts_failed": cfg.samples - kept,
        "n_iterates": n,
        "mean_observable_average": mean_obs / k,
        "mean_expansion_statistic": mean_psi / k,
        "mean_recurrence_depth": mean_delta / k,
        "mean_jacobian_average": mean_jac / k,
        "mean_hyperbolic_density": mean_density / k,
    });
    Ok((csv, Value::Null, Value::Null, metrics, None))
}

fn run_bound(cfg: &Config) -> Result<RunOutput, CliError> {
    let model = load_model(cfg)?;
    let c_values = cfg
        .experiment
        .c_values
        .clone()
        .ok_or_else(|| cfg_err("bound needs `c_values`"))?;
    if c_values.is_empty() {
        return Err(cfg_err("c_values must not be empty"));
    }

    let mut csv = String::from(
        "c(constraint),rate_bound(log-volume rate),bruteforce(log-volume rate),duality_gap\n",
    );
    let mut bounds = Vec::new();
    for &c in &c_values {
        let bound = rate_bound(&model, c).map_err(|e| cfg_err(e.to_string()))?;
        let brute = match cfg.experiment.grid {
            Some(g) => {
                Some(rate_bound_bruteforce(&model, c, g).map_err(|e| cfg_err(e.to_string()))?)
            }
            None => None,
        };
        csv.push_str(&format!(
            "{c:.17e},{bound:.17e},{},{}\n",
            brute.map(|b| format!("{b:.17e}")).unwrap_or_default(),
            brute
                .map(|b| format!("{:.3e}", bound - b))
                .unwrap_or_default(),
        ));
        bounds.push(json!({"c": c, "rate_bound": bound, "bruteforce": brute}));
    }
    let metrics = json!({
        "model": cfg.experiment.model,
        "alphabet": model.alphabet,
        "pressure_at_zero": pressure(&model, 0.0).map_err(numeric)?,
        "bounds": bounds,
    });
    Ok((csv, Value::Null, Value::Null, metrics, None))
}

fn load_model(cfg: &Config) -> Result<MarkovModel, CliError> {
    let spec = cfg.experiment.model.as_deref().unwrap_or("doubling_digit");
    match spec {
        "doubling_digit" => Ok(MarkovModel::doubling_digit()),
        "golden_mean_digit" => Ok(MarkovModel::golden_mean([0.0, 1.0], [0.0, 0.0])),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| cfg_err(format!("cannot read model `{path}`: {e}")))?;
            MarkovModel::from_json_str(&text).map_err(|e| cfg_err(e.to_string()))
        }
    }
}

fn run_ruelle(cfg: &Config) -> Result<RunOutput, CliError> {
    let sys = cfg
        .system
        .clone()
        .ok_or_else(|| cfg_err("ruelle-check needs a [system] block"))?;
    let rcfg = RuelleConfig {
        ensemble: cfg.experiment.ensemble.unwrap_or(200_000),
        burn_in: cfg.experiment.burn_in.unwrap_or(100),
        reference_points: 20,
        n: cfg.experiment.ball_steps.unwrap_or(12),
        eps: cfg.experiment.eps.unwrap_or(0.05),
        lyapunov_n: cfg.experiment.lyapunov_n.unwrap_or(5000),
        seed: cfg.seed,
        workers: cfg.workers,
    };
    let report = ruelle_check(&sys, &rcfg).map_err(numeric)?;

    // Dynamical-ball cross-check at a reference point, exact where the
    // arc enumeration applies.
    let ball = {
        let mut rng = Stream::new(cfg.seed ^ 0xBB);
        let x = sys.domain().sample(&mut rng);
        match balls::dynamical_ball_volume_exact(&sys, x, rcfg.n, rcfg.eps) {
            Ok(v) => json!({"exact": true, "measure": v.measure, "n": rcfg.n, "r": rcfg.eps}),
            Err(_) => Value::Null,
        }
    };

    let mut csv = String::from(
        "system,local_entropy_mean(nats per iterate),sigma_plus(nats per iterate),margin,evaluated,censored,pass(bool)\n",
    );
    csv.push_str(&format!(
        "{},{:.17e},{:.17e},{:.17e},{},{},{}\n",
        report.system,
        report.local_entropy_mean,
        report.sigma_plus,
        report.margin,
        report.evaluated,
        report.censored,
        report.pass
    ));
    let metrics = json!({
        "local_entropy_mean": report.local_entropy_mean,
        "sigma_plus": report.sigma_plus,
        "margin": report.margin,
        "pass": report.pass,
        "evaluated": report.evaluated,
        "censored": report.censored,
        "ball": ball,
    });
    Ok((csv, Value::Null, Value::Null, metrics, None))
}
