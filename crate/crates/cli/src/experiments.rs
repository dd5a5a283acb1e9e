//! One function per subcommand, each turning a parsed configuration into a
//! [`Table`]. All numeric work happens in the library; this module only
//! schedules it and formats rows.

use nevai_core::bounds::{
    fuzz_cosine_sum, fuzz_half_angle_ratio, fuzz_matrix_power, fuzz_rotation_average,
};
use nevai_core::green::{boundary_value_probe, green_first_row, weyl_wronskian_residual};
use nevai_core::prufer::prufer_run;
use nevai_core::recurrence::{eta_moments, OrthoEval};
use nevai_core::rng;
use nevai_core::spectral::{operator_moment, spectral_measure_at, truncate};
use nevai_core::transfer::{growth_test, lyapunov_estimate};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Config, Diagnostic};
use crate::output::Table;
use crate::CliError;

fn f(v: f64) -> String {
    format!("{v}")
}

/// Recurrence trace at `run.x0`: one row per index 0..=N. `p_n` and `K_n`
/// are reported at the common scale `e^log_scale` (true values are
/// `p_n * e^log_scale` and `K_n * e^(2 log_scale)`), so arbitrarily long
/// runs stay finite columnwise.
pub fn eval(cfg: &Config) -> Result<Table, CliError> {
    trace(cfg, false)
}

/// Kernel-ratio decay view of the same trace: rows on a geometric index
/// schedule (1, 2, 4, ..., N), emphasizing the r_n -> 0 tail.
pub fn nevai(cfg: &Config) -> Result<Table, CliError> {
    trace(cfg, true)
}

fn trace(cfg: &Config, geometric: bool) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let x0 = cfg.run.x0;
    let n_max = cfg.run.n;
    let mut table = Table::new(&["n", "p_n", "log_scale", "K_n", "r_n"]);
    let mut s = OrthoEval::new();
    let mut next_emit = if geometric { 1 } else { 0 };
    if !geometric {
        table.push(row_of(&s));
        next_emit = 1;
    }
    for n in 1..=n_max {
        s.advance_in(&seq, x0);
        if n == next_emit || n == n_max {
            table.push(row_of(&s));
            next_emit = if geometric {
                (next_emit * 2).max(n + 1)
            } else {
                n + 1
            };
        }
    }
    Ok(table)
}

fn row_of(s: &OrthoEval) -> Vec<String> {
    vec![
        s.index().to_string(),
        f(s.p_scaled()),
        f(s.log_scale()),
        f(s.kernel_scaled()),
        f(s.nevai_ratio()),
    ]
}

/// Transfer-product growth rate at `run.x0` over `run.n` steps.
pub fn lyapunov(cfg: &Config) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let est = lyapunov_estimate(&seq, cfg.run.x0, cfg.run.n);
    let last_slope = *est.window_slopes.last().expect("at least one window");
    let mut table = Table::new(&["x0", "N", "gamma_hat", "last_window_slope"]);
    table.push(vec![
        f(est.x0),
        est.n.to_string(),
        f(est.gamma),
        f(last_slope),
    ]);
    Ok(table)
}

/// First and second moments of the normalized kernel measure about
/// `run.x0`, on a geometric schedule of kernel degrees up to `run.n`.
pub fn eta(cfg: &Config) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let x0 = cfg.run.x0;
    let mut table = Table::new(&["n", "x0", "first_moment", "second_moment"]);
    let mut n = 1u64;
    loop {
        let m = eta_moments(&seq, x0, n);
        table.push(vec![n.to_string(), f(x0), f(m.first), f(m.second)]);
        if n >= cfg.run.n {
            break;
        }
        n = (n * 2).min(cfg.run.n);
    }
    Ok(table)
}

/// Atoms and weights of the truncation spectral measure at the configured
/// coordinate.
pub fn spectrum(cfg: &Config) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let mat = truncate(&seq, cfg.spectrum.size)?;
    let mu = spectral_measure_at(&mat, cfg.spectrum.coordinate)?;
    let mut table = Table::new(&["atom", "weight"]);
    for (&a, &w) in mu.atoms().iter().zip(mu.weights()) {
        table.push(vec![f(a), f(w)]);
    }
    Ok(table)
}

/// Operator moments `<delta_1, J^k delta_1>` through `moments.k_max`.
pub fn moments(cfg: &Config) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let mut table = Table::new(&["k", "value"]);
    for k in 0..=cfg.moments.k_max {
        table.push(vec![k.to_string(), f(operator_moment(&seq, k))]);
    }
    Ok(table)
}

/// First-row resolvent entries at `z = z_re + i z_im` with their Wronskian
/// residuals, or (in probe mode) the boundary approach of a single entry at
/// `run.x0 + i eps` along the configured offset schedule.
pub fn green(cfg: &Config) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let g = &cfg.green;
    if g.probe {
        let (values, _flag) =
            boundary_value_probe(&seq, g.n_trunc, cfg.run.x0, g.index, &g.probe_eps)?;
        let mut table = Table::new(&["eps", "re", "im", "rel_change"]);
        for (i, (&eps, v)) in g.probe_eps.iter().zip(&values).enumerate() {
            let rel = if i == 0 {
                0.0
            } else {
                (v - values[i - 1]).norm() / v.norm().max(1e-300)
            };
            table.push(vec![f(eps), f(v.re), f(v.im), f(rel)]);
        }
        return Ok(table);
    }
    let z = Complex64::new(g.z_re, g.z_im);
    let row = green_first_row(&seq, g.n_trunc, z)?;
    let rows = g.rows.min(row.len());
    let mut table = Table::new(&["index", "re", "im", "residual"]);
    for j in 1..=rows {
        let v = row[j - 1];
        let residual = if j + 1 <= g.n_trunc {
            weyl_wronskian_residual(&seq, g.n_trunc, z, j as u64)?
        } else {
            f64::NAN
        };
        table.push(vec![j.to_string(), f(v.re), f(v.im), f(residual)]);
    }
    Ok(table)
}

/// Polar trajectory at `run.x0` from the configured initial angle: radius,
/// angle, wavenumber, and the radius increment arriving at each index (zero
/// at the first).
pub fn prufer(cfg: &Config) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let run = prufer_run(&seq, cfg.run.x0, cfg.run.n, cfg.prufer.theta0)?;
    let mut table = Table::new(&["n", "R", "theta", "k", "X", "partial_sum"]);
    for i in 0..run.log_radii.len() {
        let (x, partial) = if i == 0 {
            (0.0, 0.0)
        } else {
            (run.xs[i - 1], run.partial_sums[i - 1])
        };
        table.push(vec![
            (i + 1).to_string(),
            f(run.log_radii[i].exp()),
            f(run.thetas[i]),
            f(run.wavenumbers[i]),
            f(x),
            f(partial),
        ]);
    }
    Ok(table)
}

/// The four inequality fuzzers at `bounds.samples` samples each, seeded
/// deterministically from the run seed.
pub fn bounds(cfg: &Config) -> Result<Table, CliError> {
    let samples = cfg.bounds.samples;
    let seed = cfg.run.seed;
    let checks = [
        ("rotation_average", fuzz_rotation_average(samples, rng::word_at(seed, 1))),
        ("matrix_power", fuzz_matrix_power(samples, rng::word_at(seed, 2))),
        ("half_angle_ratio", fuzz_half_angle_ratio(samples, rng::word_at(seed, 3))),
        ("cosine_sum", fuzz_cosine_sum(samples, rng::word_at(seed, 4))),
    ];
    let mut table = Table::new(&["check", "samples", "min_slack"]);
    for (name, summary) in checks {
        assert_eq!(summary.violations, 0, "{name}: inequality violated");
        table.push(vec![
            name.to_string(),
            summary.samples.to_string(),
            f(summary.min_slack),
        ]);
    }
    Ok(table)
}

/// One diagnostic value per grid energy, computed in parallel with
/// deterministic row order.
pub fn sweep(cfg: &Config) -> Result<Table, CliError> {
    let seq = cfg.model.build()?;
    let grid = cfg.sweep.grid()?;
    let n = cfg.run.n;
    let diag = cfg.sweep.diagnostic;
    let eval_one = |&x0: &f64| -> Result<f64, CliError> {
        Ok(match diag {
            Diagnostic::Growth => growth_test(&seq, x0, n),
            Diagnostic::Lyapunov => lyapunov_estimate(&seq, x0, n).gamma,
            Diagnostic::Nevai => {
                let mut s = OrthoEval::new();
                for _ in 0..n {
                    s.advance_in(&seq, x0);
                }
                s.nevai_ratio()
            }
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let values: Vec<f64> =
        pool.install(|| grid.par_iter().map(eval_one).collect::<Result<_, _>>())?;
    let mut table = Table::new(&["x0", "value"]);
    for (x0, v) in grid.iter().zip(values) {
        table.push(vec![f(*x0), f(v)]);
    }
    Ok(table)
}
